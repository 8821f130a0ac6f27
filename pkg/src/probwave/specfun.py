r"""Scalar special functions and a bisection root finder.

Every routine here accepts either a Python float or a NumPy array (except
:func:`airy` and :func:`find_root`, which are scalar) and returns the same
kind of object it was given.

* :func:`bessel_j0`, :func:`bessel_j1` -- ascending power series below
  ``EvalPolicy.asymptotic_switch``, Hankel asymptotic expansion above.
* :func:`kummer_m` -- the terminating confluent hypergeometric function
  :math:`M(-n, 1, x)`, i.e. the Laguerre polynomial :math:`L_n(x)`.
* :func:`airy` -- :math:`\mathrm{Ai}` and :math:`\mathrm{Ai}'` by Maclaurin
  series on :math:`|x| \le 8`.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BracketError, DomainError, OutOfRangeError

__all__ = [
    "EvalPolicy",
    "DEFAULT_POLICY",
    "bessel_j0",
    "bessel_j1",
    "pochhammer",
    "kummer_coefficients",
    "kummer_m",
    "airy",
    "find_root",
    "AIRY_AI0",
    "AIRY_AIP0",
]

# Ai(0) = 3^(-2/3)/Gamma(2/3) and Ai'(0) = -3^(-1/3)/Gamma(1/3).
AIRY_AI0 = 0.3550280538878172
AIRY_AIP0 = -0.2588194037928068

AIRY_MAX_ABS_X = 8.0


@dataclass(frozen=True)
class EvalPolicy:
    """Truncation controls for the series evaluators.

    Parameters
    ----------
    series_terms : int
        Upper bound on the number of power-series terms (>= 20).
    abs_tol : float
        Terms smaller than this are treated as negligible (<= 1e-12).
    asymptotic_switch : float
        ``|x|`` at which Bessel evaluation moves from the power series to
        the asymptotic expansion. Must lie in ``[8, 20]``.
    """

    series_terms: int = 60
    abs_tol: float = 1e-17
    asymptotic_switch: float = 12.0

    def __post_init__(self):
        if int(self.series_terms) != self.series_terms or self.series_terms < 20:
            raise DomainError(f"series_terms must be an integer >= 20, got {self.series_terms}")
        if not (0.0 <= self.abs_tol <= 1e-12):
            raise DomainError(f"abs_tol must lie in [0, 1e-12], got {self.abs_tol}")
        if not (8.0 <= self.asymptotic_switch <= 20.0):
            raise DomainError(
                f"asymptotic_switch must lie in [8, 20], got {self.asymptotic_switch}"
            )


DEFAULT_POLICY = EvalPolicy()


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    return arr


def _restore(result, x):
    if np.ndim(x) == 0:
        return float(result)
    return result


def _n_series_terms(t_max, policy):
    # Smallest K with t^K/(K!)^2 below abs_tol, capped by policy.series_terms.
    term = 1.0
    k = 0
    while k < policy.series_terms:
        k += 1
        term *= t_max / (k * k)
        if term < policy.abs_tol and k > t_max ** 0.5:
            break
    return k + 1


def _series_j(order, x, policy):
    """Power series for J0 (order 0) or J1 (order 1) via Horner in x^2/4."""
    t = 0.25 * x * x
    if t.size == 0:
        return np.zeros_like(x)
    n_terms = _n_series_terms(float(t.max()), policy)
    # coefficients (-1)^k / (k! (k+order)!)
    coeffs = [(-1.0) ** k / (math.factorial(k) * math.factorial(k + order)) for k in range(n_terms)]
    acc = np.full_like(t, coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * t + c
    if order == 1:
        acc = acc * (0.5 * x)
    return acc


def _hankel_pq(order, x, policy):
    """Asymptotic P and Q sums; each stops at its smallest term."""
    mu = 4.0 * order * order
    inv8x = 1.0 / (8.0 * x)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    live_p = np.ones(x.shape, dtype=bool)
    live_q = np.ones(x.shape, dtype=bool)
    prev_p = np.full_like(x, np.inf)
    prev_q = np.full_like(x, np.inf)
    for k in range(1, 2 * policy.series_terms):
        term = term * (mu - (2 * k - 1) ** 2) * inv8x / k
        mag = np.abs(term)
        if k % 2 == 1:
            sign = -1.0 if (k // 2) % 2 else 1.0  # Q: +a1, -a3, +a5, ...
            live_q &= mag < prev_q
            q = np.where(live_q, q + sign * term, q)
            prev_q = np.where(live_q, mag, prev_q)
        else:
            sign = -1.0 if (k // 2) % 2 else 1.0  # P: 1, -a2, +a4, ...
            live_p &= mag < prev_p
            p = np.where(live_p, p + sign * term, p)
            prev_p = np.where(live_p, mag, prev_p)
        if not (live_p.any() or live_q.any()) or float(mag.max()) < policy.abs_tol:
            break
    return p, q


def _asymptotic_j(order, x, policy):
    ax = np.abs(x)
    p, q = _hankel_pq(order, ax, policy)
    chi = ax - (0.5 * order + 0.25) * math.pi
    val = np.sqrt(2.0 / (math.pi * ax)) * (p * np.cos(chi) - q * np.sin(chi))
    if order == 1:
        val = np.sign(x) * val
    return val


def _bessel(order, x, policy):
    arr = _as_array(x)
    flat = np.atleast_1d(arr).astype(float)
    out = np.empty_like(flat)
    small = np.abs(flat) < policy.asymptotic_switch
    if small.any():
        out[small] = _series_j(order, flat[small], policy)
    if (~small).any():
        out[~small] = _asymptotic_j(order, flat[~small], policy)
    return _restore(out.reshape(arr.shape), x)


def bessel_j0(x, policy=DEFAULT_POLICY):
    """Zero-order Bessel function of the first kind, J0(x).

    Parameters
    ----------
    x : float or ndarray
        Finite argument(s).
    policy : EvalPolicy, optional

    Returns
    -------
    float or ndarray
    """
    return _bessel(0, x, policy)


def bessel_j1(x, policy=DEFAULT_POLICY):
    """First-order Bessel function J1(x); note J0'(x) = -J1(x)."""
    return _bessel(1, x, policy)


def pochhammer(a, k):
    """Rising factorial (a)_k = a (a+1) ... (a+k-1), with (a)_0 = 1."""
    if int(k) != k or k < 0:
        raise DomainError(f"k must be a nonnegative integer, got {k}")
    if not math.isfinite(a):
        raise DomainError("a must be finite")
    result = 1.0
    for j in range(int(k)):
        result *= a + j
    return result


def kummer_coefficients(n):
    """Power-series coefficients of M(-n, 1, x), lowest degree first.

    The k-th coefficient is (-n)_k / (k! (1)_k) = (-1)^k C(n, k) / k!,
    computed exactly in rational arithmetic before rounding.
    """
    if int(n) != n or n < 0:
        raise DomainError(f"order n must be a nonnegative integer, got {n}")
    n = int(n)
    return np.array(
        [float(Fraction((-1) ** k * math.comb(n, k), math.factorial(k))) for k in range(n + 1)]
    )


def kummer_m(n, x):
    """Terminating Kummer function M(-n, 1, x), a degree-n polynomial in x."""
    arr = _as_array(x)
    coeffs = kummer_coefficients(n)
    acc = np.full_like(arr, coeffs[-1], dtype=float)
    for c in reversed(coeffs[:-1]):
        acc = acc * arr + c
    return _restore(acc, x)


def _airy_denominators(n_terms):
    # f(x) = sum x^(3k) / prod_{j<k} (3j+2)(3j+3)
    # g(x) = sum x^(3k+1) / prod_{j<k} (3j+3)(3j+4)
    f_den, g_den = [1], [1]
    for j in range(n_terms - 1):
        f_den.append(f_den[-1] * (3 * j + 2) * (3 * j + 3))
        g_den.append(g_den[-1] * (3 * j + 3) * (3 * j + 4))
    return f_den, g_den


_AIRY_TERMS = 60
_AIRY_F_DEN, _AIRY_G_DEN = _airy_denominators(_AIRY_TERMS)


def airy(x):
    """Airy function Ai(x) and its derivative Ai'(x) for |x| <= 8.

    Sums Ai = Ai(0) f(x) + Ai'(0) g(x) from its two Maclaurin series with
    exactly rounded coefficients and compensated summation.

    Returns
    -------
    (ai, ai_prime) : tuple of float
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("argument must be finite")
    if abs(x) > AIRY_MAX_ABS_X:
        raise OutOfRangeError(f"airy series valid for |x| <= {AIRY_MAX_ABS_X}, got {x}")
    x3 = x ** 3
    ai_terms = []
    aip_terms = []
    for k in range(_AIRY_TERMS):
        p3k = x ** (3 * k)
        f_term = p3k / _AIRY_F_DEN[k]
        g_term = p3k * x / _AIRY_G_DEN[k]
        ai_terms.append(AIRY_AI0 * f_term)
        ai_terms.append(AIRY_AIP0 * g_term)
        # d/dx x^(3k) = 3k x^(3k-1); d/dx x^(3k+1) = (3k+1) x^(3k)
        if k > 0:
            aip_terms.append(AIRY_AI0 * 3 * k * x ** (3 * k - 1) / _AIRY_F_DEN[k])
        aip_terms.append(AIRY_AIP0 * (3 * k + 1) * p3k / _AIRY_G_DEN[k])
        if k > 2 and abs(x3) ** k / _AIRY_F_DEN[k] * 64.0 < 1e-20:
            break
    return math.fsum(ai_terms), math.fsum(aip_terms)


def find_root(f, lo, hi, tol=1e-12, max_iter=400):
    """Locate a sign change of ``f`` in ``[lo, hi]`` by bisection.

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` have the same sign.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = float(lo), float(hi)
    if lo > hi:
        lo, hi = hi, lo
    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
