r"""Closed-form wave families, the ODE residual operator and normalization.

The non-localized wave equation is written in the shifted coordinate
:math:`y = q - q_0`,

.. math::
    \beta \left(y \psi'' + \psi'\right) + \left[E(y) - U(y)\right] \psi = 0,
    \qquad U(y) = A_{tt} |y|,

with :math:`\beta = B^2/M`. Two families of explicit solutions are provided:

* ``BESSEL_J0``: :math:`\psi = C J_0(\omega y)`, valid when
  :math:`E - U = \beta \omega^2 y` (separable energy).
* ``KUMMER``: :math:`\psi = C e^{-\kappa |y|} M(-n, 1, 2\kappa|y|)` with
  :math:`\kappa = \sqrt{A_{tt}/\beta}` and constant energy
  :math:`E_n = (1 + 2n)\sqrt{A_{tt}\beta}`.
"""

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateError, DomainError, SizeError
from .specfun import bessel_j0, bessel_j1, kummer_coefficients

__all__ = [
    "Family",
    "Grid",
    "WaveModel",
    "PotentialSpec",
    "EnergySpec",
    "ConservationReport",
    "eval_model",
    "model_derivatives",
    "eigen_energy_kummer",
    "ode_residual",
    "normalize_discrete",
    "interaction_diagnostic",
]

MIN_GRID_POINTS = 5


class Family(str, enum.Enum):
    BESSEL_J0 = "bessel"
    KUMMER = "kummer"

    @property
    def rank(self):
        """Enumeration order, used as the last tie-breaker in model selection."""
        return list(Family).index(self)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform, strictly increasing grid of reinforcement values.

    Any non-empty grid is accepted; operations that need more points
    (:func:`ode_residual`, fitting) check their own minimum.
    """

    points: np.ndarray
    tick: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 1:
            raise SizeError("grid needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise DomainError("grid points must be finite")
        if not self.tick > 0:
            raise DomainError(f"tick must be positive, got {self.tick}")
        steps = np.diff(pts)
        if steps.size == 0:
            return
        if np.any(steps <= 0):
            raise DomainError("grid points must be strictly increasing")
        scale = max(abs(pts[0]), abs(pts[-1]), self.tick)
        if np.max(np.abs(steps - self.tick)) > 1e-9 * scale:
            raise DomainError("grid spacing is not uniform")

    @classmethod
    def uniform(cls, start, tick, count):
        pts = start + tick * np.arange(count, dtype=float)
        return cls(pts, float(tick))

    @classmethod
    def from_points(cls, points, tick=None):
        pts = np.asarray(points, dtype=float)
        if tick is None:
            if pts.size < 2:
                raise SizeError("tick must be given for a single-point grid")
            tick = (pts[-1] - pts[0]) / (pts.size - 1)
        return cls(pts, float(tick))

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.tick == other.tick and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.tick, self.points.tobytes()))


@dataclass(frozen=True)
class WaveModel:
    """One member of the Bessel or Kummer family.

    ``omega`` is meaningful only for ``BESSEL_J0`` and ``a_tt`` only for
    ``KUMMER``; ``n`` is the Kummer order (0 for Bessel). ``c`` is the
    amplitude, so the density is ``c**2 * shape**2``.
    """

    family: Family
    q0: float
    omega: float = None
    a_tt: float = None
    n: int = 0
    beta: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not math.isfinite(self.q0):
            raise DomainError("q0 must be finite")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.c > 0:
            raise DomainError(f"c must be positive, got {self.c}")
        if self.family is Family.BESSEL_J0:
            if self.omega is None or not self.omega > 0:
                raise DomainError("Bessel family needs omega > 0")
            if self.n != 0:
                raise DomainError("Bessel family has order 0")
        else:
            if self.a_tt is None or not self.a_tt > 0:
                raise DomainError("Kummer family needs a_tt > 0")
            if int(self.n) != self.n or self.n < 0:
                raise DomainError("Kummer order must be a nonnegative integer")

    @classmethod
    def bessel(cls, q0, omega, beta=1.0, c=1.0):
        return cls(Family.BESSEL_J0, q0, omega=omega, beta=beta, c=c)

    @classmethod
    def kummer(cls, q0, a_tt, n=0, beta=1.0, c=1.0):
        return cls(Family.KUMMER, q0, a_tt=a_tt, n=int(n), beta=beta, c=c)

    @property
    def kappa(self):
        """Decay rate sqrt(a_tt / beta) of the Kummer family."""
        return math.sqrt(self.a_tt / self.beta)

    @property
    def energy(self):
        """EnergySpec under which this model solves the wave equation."""
        if self.family is Family.BESSEL_J0:
            return EnergySpec.bessel_separable(self.omega)
        return EnergySpec.constant(eigen_energy_kummer(self.n, self.a_tt, self.beta))

    @property
    def potential(self):
        # a_tt is irrelevant for the Bessel reduction; 1.0 keeps PotentialSpec valid.
        return PotentialSpec(self.q0, self.a_tt if self.a_tt is not None else 1.0)

    def shape(self, q):
        """Unnormalized wave function (c = 1)."""
        y = np.asarray(q, dtype=float) - self.q0
        if self.family is Family.BESSEL_J0:
            return bessel_j0(self.omega * y)
        r = np.abs(y)
        k = self.kappa
        poly = np.polynomial.polynomial.polyval(2.0 * k * r, kummer_coefficients(self.n))
        return np.exp(-k * r) * poly

    def density(self, q):
        s = self.shape(q)
        return self.c * self.c * s * s


@dataclass(frozen=True)
class PotentialSpec:
    """V-shaped linear potential U(q) = a_tt |q - q0|."""

    q0: float
    a_tt: float

    def __post_init__(self):
        if not self.a_tt > 0:
            raise DomainError(f"a_tt must be positive, got {self.a_tt}")

    def __call__(self, q):
        return self.a_tt * np.abs(np.asarray(q, dtype=float) - self.q0)


@dataclass(frozen=True)
class EnergySpec:
    """Energy term of the wave equation.

    ``mode == "constant"`` holds a constant ``value`` (E > 0);
    ``mode == "bessel_separable"`` holds ``omega`` and encodes
    ``E(y) - U(y) = beta * omega**2 * y``.
    """

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in ("constant", "bessel_separable"):
            raise DomainError(f"unknown energy mode {self.mode!r}")
        if self.mode == "constant" and not self.value > 0:
            raise DomainError("constant energy must be positive")

    @classmethod
    def constant(cls, e):
        return cls("constant", float(e))

    @classmethod
    def bessel_separable(cls, omega):
        return cls("bessel_separable", float(omega))

    def kinetic(self, y, potential, beta):
        """E(y) - U(y) evaluated on shifted coordinates ``y``."""
        if self.mode == "constant":
            return self.value - potential.a_tt * np.abs(y)
        return beta * self.value ** 2 * y


def eval_model(model, q):
    """Evaluate psi and density = psi**2 of ``model`` at ``q``."""
    psi = model.c * model.shape(q)
    if np.ndim(q) == 0:
        psi = float(psi)
    return psi, psi * psi


def model_derivatives(model, q):
    """Analytic psi, dpsi/dy and d2psi/dy2 of a closed-form model.

    For the Kummer family the derivatives are taken in ``r = |y|``, i.e. on
    the half-line ``y >= 0`` where the radial equation is posed.
    """
    y = np.asarray(q, dtype=float) - model.q0
    c = model.c
    if model.family is Family.BESSEL_J0:
        w = model.omega
        x = w * y
        j0 = bessel_j0(x)
        j1 = bessel_j1(x)
        # J0'' = -J0 + J1/x, with the x -> 0 limit -1/2.
        with np.errstate(divide="ignore", invalid="ignore"):
            j1_over_x = np.where(x == 0, 0.5, j1 / np.where(x == 0, 1.0, x))
        return c * j0, -c * w * j1, c * w * w * (j1_over_x - j0)
    r = np.abs(y)
    k = model.kappa
    coeffs = kummer_coefficients(model.n)
    pv = np.polynomial.polynomial
    x = 2.0 * k * r
    p = pv.polyval(x, coeffs)
    dp = pv.polyval(x, pv.polyder(coeffs)) if model.n >= 1 else np.zeros_like(x)
    d2p = pv.polyval(x, pv.polyder(coeffs, 2)) if model.n >= 2 else np.zeros_like(x)
    e = c * np.exp(-k * r)
    psi = e * p
    d1 = e * k * (2.0 * dp - p)
    d2 = e * k * k * (p - 4.0 * dp + 4.0 * d2p)
    return psi, d1, d2


def eigen_energy_kummer(n, a_tt, beta=1.0):
    """Energy level (1 + 2n) sqrt(a_tt * beta) of the Kummer family."""
    if int(n) != n or n < 0:
        raise DomainError("n must be a nonnegative integer")
    if not (a_tt > 0 and beta > 0):
        raise DomainError("a_tt and beta must be positive")
    return (1 + 2 * int(n)) * math.sqrt(a_tt * beta)


def ode_residual(psi_samples, grid, energy, potential, beta=1.0, derivatives=None):
    r"""Relative residual of the wave equation on sampled data.

    Computes

    .. math::
        \max_i \left|\beta(y_i \psi''_i + \psi'_i) + (E_i - U_i)\psi_i\right|
        / \max_i |\psi_i|

    with ``y = q - potential.q0``.

    Parameters
    ----------
    psi_samples : array_like
        Wave function values aligned with ``grid``.
    grid : Grid
    energy : EnergySpec
    potential : PotentialSpec
    beta : float
    derivatives : tuple of array_like, optional
        ``(dpsi, d2psi)`` on the grid. When omitted, second-order central
        differences are used and the two endpoints are excluded.

    Returns
    -------
    float
    """
    psi = np.asarray(psi_samples, dtype=float)
    if psi.size < MIN_GRID_POINTS or len(grid) < MIN_GRID_POINTS:
        raise SizeError(f"residual needs at least {MIN_GRID_POINTS} samples")
    if psi.size != len(grid):
        raise SizeError(f"psi has {psi.size} samples but grid has {len(grid)} points")
    y = grid.points - potential.q0
    if derivatives is None:
        h = grid.tick
        d1 = (psi[2:] - psi[:-2]) / (2.0 * h)
        d2 = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / (h * h)
        y_in, psi_in = y[1:-1], psi[1:-1]
    else:
        d1 = np.asarray(derivatives[0], dtype=float)
        d2 = np.asarray(derivatives[1], dtype=float)
        y_in, psi_in = y, psi
    res = beta * (y_in * d2 + d1) + energy.kinetic(y_in, potential, beta) * psi_in
    scale = np.max(np.abs(psi))
    if scale == 0:
        raise DegenerateError("psi is identically zero")
    return float(np.max(np.abs(res)) / scale)


def normalize_discrete(model, grid):
    """Return ``model`` with ``c`` chosen so the density sums to 1 on ``grid``."""
    s = model.shape(grid.points)
    total = float(np.sum(s * s))
    if not total > 0 or not math.isfinite(total):
        raise DegenerateError("model density vanishes on the grid")
    return replace(model, c=1.0 / math.sqrt(total))


@dataclass(frozen=True)
class ConservationReport:
    """Interaction-conservation diagnostics for one distribution and model.

    ``interaction_stat[i] = (m_i / M) * (m_i / t**2)`` and
    ``implied_reversal[i] = m_i / t**2 - omega**2``. Pointwise constancy of
    these quantities is *not* asserted; only their spread is reported.
    """

    family: Family
    omega_sq: float
    a_tt: float
    interaction_stat: np.ndarray = field(repr=False)
    implied_reversal: np.ndarray = field(repr=False)
    stat_min: float
    stat_max: float
    stat_cv: float
    note: str = (
        "omega^2 = (m/M) m_tt = m_tt - A_tt cannot hold pointwise for a "
        "non-constant distribution; per-point values and their dispersion are reported."
    )


def interaction_diagnostic(dist, model):
    """Per-point interaction statistics of ``dist`` against ``model``.

    Parameters
    ----------
    dist : probwave.dataio.Distribution
    model : WaveModel

    Returns
    -------
    ConservationReport
    """
    m = np.asarray(dist.masses, dtype=float)
    if m.size == 0:
        raise DegenerateError("empty distribution")
    total = dist.total
    if not total > 0:
        raise DegenerateError("distribution has zero total")
    if not dist.t > 0:
        raise DomainError("window length t must be positive")
    m_tt = m / dist.t ** 2
    stat = (m / total) * m_tt
    if model.family is Family.BESSEL_J0:
        omega_sq = model.omega ** 2
        a_tt = float("nan")
    else:
        # Kummer family: omega_n^2 = A_n.
        omega_sq = model.a_tt
        a_tt = model.a_tt
    mean = float(np.mean(stat))
    cv = float(np.std(stat) / mean) if mean > 0 else float("nan")
    return ConservationReport(
        family=model.family,
        omega_sq=float(omega_sq),
        a_tt=float(a_tt),
        interaction_stat=stat,
        implied_reversal=m_tt - omega_sq,
        stat_min=float(np.min(stat)),
        stat_max=float(np.max(stat)),
        stat_cv=cv,
    )
