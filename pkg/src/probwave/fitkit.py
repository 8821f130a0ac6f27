"""Least-squares fitting of wave-model densities to empirical distributions.

The objective is the unweighted sum of squared differences between the
relative frequencies ``f_i = m_i / M`` and the model density normalized on
the data grid. It is minimized with Nelder-Mead from several starts over
``(q0, log omega)`` for the Bessel family and ``(q0, log a_tt)`` for the
Kummer family. ``q0`` is measured in ticks from the peak price so the
simplex sees both coordinates at a comparable scale.

Model ranking uses ``aic = n_obs * ln(sse / n_obs) + 2 * n_params``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateError, DomainError
from .specfun import bessel_j0, kummer_coefficients
from .wavemodel import Family, WaveModel, normalize_discrete

__all__ = [
    "FitOptions",
    "FitResult",
    "GoodnessOfFit",
    "fit_model",
    "goodness_of_fit",
    "chi2_pooled",
    "select_model",
    "initial_omega",
    "aic",
]

MIN_SUPPORT = 8
AIC_TIE_WINDOW = 2.0
J0_FIRST_ZERO = 2.404825557695773
CHI2_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class FitOptions:
    """Fitting controls.

    ``x_tol`` applies to the internal coordinates (ticks for q0, natural
    log for omega / a_tt); ``f_tol`` is absolute on the sse.
    """

    families: tuple = (Family.BESSEL_J0, Family.KUMMER)
    n_scan_max: int = 3
    starts: int = 8
    seed: int = 0
    max_iters: int = 2000
    x_tol: float = 1e-7
    f_tol: float = 1e-15
    beta: float = 1.0
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(Family(f) for f in self.families))
        if int(self.starts) != self.starts or self.starts < 1:
            raise DomainError("starts must be a positive integer")
        if int(self.n_scan_max) != self.n_scan_max or self.n_scan_max < 0:
            raise DomainError("n_scan_max must be a nonnegative integer")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise DomainError("max_iters must be a positive integer")
        if not (self.x_tol > 0 and self.f_tol > 0):
            raise DomainError("tolerances must be positive")
        if not self.beta > 0:
            raise DomainError("beta must be positive")


@dataclass(frozen=True)
class FitResult:
    """Best fit of one family (and Kummer order) to one distribution."""

    model: WaveModel
    sse: float
    r2: float
    chi2: float
    aic: float
    n_params: int
    starts_tried: int
    converged: bool
    q0_snapped: float
    chi2_bins: int
    q: np.ndarray = field(repr=False)
    f_emp: np.ndarray = field(repr=False)
    f_fit: np.ndarray = field(repr=False)
    initial_sse: tuple = field(repr=False, default=())

    @property
    def family(self):
        return self.model.family

    @property
    def label(self):
        if self.model.family is Family.BESSEL_J0:
            return "bessel"
        return f"kummer(n={self.model.n})"


class GoodnessOfFit(NamedTuple):
    sse: float
    r2: float
    chi2: float


def aic(sse, n_obs, n_params):
    """Akaike criterion for Gaussian least squares, constants dropped."""
    return n_obs * math.log(max(sse, 1e-300) / n_obs) + 2.0 * n_params


def _density_values(dist, model):
    if isinstance(model, WaveModel):
        d = model.shape(dist.grid.points) ** 2
    else:
        d = np.asarray(model, dtype=float)
        if d.shape != dist.masses.shape:
            raise DomainError("density array does not match the distribution grid")
    total = float(np.sum(d))
    if not total > 0 or not math.isfinite(total):
        raise DegenerateError("model density vanishes on the distribution grid")
    return d / total


def chi2_pooled(dist, density):
    """Pearson chi-square of masses against ``M * density``.

    Points whose expected count is below 5 are pooled into one bin. The
    statistic has its chi-square meaning only when masses are counts; for
    share volumes it scales with the lot size.

    Returns
    -------
    (chi2, n_bins) : (float, int)
    """
    m = dist.masses
    expected = dist.total * np.asarray(density, dtype=float)
    keep = expected >= CHI2_MIN_EXPECTED
    chi2 = float(np.sum((m[keep] - expected[keep]) ** 2 / expected[keep]))
    bins = int(np.count_nonzero(keep))
    pooled_e = float(np.sum(expected[~keep]))
    if pooled_e > 0:
        pooled_o = float(np.sum(m[~keep]))
        chi2 += (pooled_o - pooled_e) ** 2 / pooled_e
        bins += 1
    return chi2, bins


def goodness_of_fit(dist, model):
    """sse, r2 and pooled chi2 of ``model`` (or a density array) on ``dist``.

    The model density is renormalized to sum to one on the grid.
    """
    d = _density_values(dist, model)
    f = dist.frequencies
    sse = float(np.sum((f - d) ** 2))
    sst = float(np.sum((f - f.mean()) ** 2))
    r2 = 1.0 - sse / sst if sst > 0 else (1.0 if sse == 0 else -math.inf)
    chi2, _ = chi2_pooled(dist, d)
    return GoodnessOfFit(sse, r2, chi2)


def _moving_average(x, width):
    if width <= 1:
        return x
    kernel = np.ones(width) / width
    return np.convolve(x, kernel, mode="same")


def initial_omega(dist, q0=None):
    """Frequency guess 2.404825 / |q_min - q0| from the first trough around q0.

    The frequencies are smoothed before looking for the first local minimum
    below half the peak on each side of ``q0``; the nearer trough wins.
    """
    q = dist.grid.points
    f = dist.frequencies
    i0 = int(np.argmax(f)) if q0 is None else int(np.argmin(np.abs(q - q0)))
    q0 = q[i0]
    smooth = _moving_average(f, max(3, len(f) // 30) | 1)
    floor = 0.5 * smooth[i0]
    dists = []
    for direction in (1, -1):
        i = i0
        while 0 < i + direction < len(q) - 1:
            j = i + direction
            if smooth[j] <= smooth[j - 1] and smooth[j] <= smooth[j + 1] and smooth[j] < floor:
                dists.append(abs(q[j] - q0))
                break
            i = j
    if not dists:
        # no trough: put the first zero just beyond the observed span
        dists.append(max(abs(q[-1] - q0), abs(q[0] - q0), dist.grid.tick))
    return J0_FIRST_ZERO / min(dists)


def _initial_a_tt(dist, q0, n, beta):
    # for density e^{-x} L_n(x)^2 with x = 2 kappa |y|, E[x] = 2n + 1
    f = dist.frequencies
    mean_abs = float(np.sum(f * np.abs(dist.grid.points - q0)))
    mean_abs = max(mean_abs, dist.grid.tick)
    kappa = (2 * n + 1) / (2.0 * mean_abs)
    return beta * kappa * kappa


class _Objective:
    """sse as a function of (q0 offset in ticks, log parameter)."""

    def __init__(self, dist, family, n, beta):
        self.q = dist.grid.points
        self.f = dist.frequencies
        self.tick = dist.grid.tick
        self.q_ref = dist.peak_price
        self.family = family
        self.n = n
        self.beta = beta
        self.coeffs = kummer_coefficients(n) if family is Family.KUMMER else None

    def params(self, x):
        return self.q_ref + x[0] * self.tick, math.exp(x[1])

    def density(self, x):
        q0, p = self.params(x)
        y = self.q - q0
        if self.family is Family.BESSEL_J0:
            s = bessel_j0(p * y)
        else:
            kappa = math.sqrt(p / self.beta)
            r = np.abs(y)
            s = np.exp(-kappa * r) * np.polynomial.polynomial.polyval(2.0 * kappa * r, self.coeffs)
        d = s * s
        total = d.sum()
        if not total > 0 or not math.isfinite(total):
            return None
        return d / total

    def __call__(self, x):
        if not np.all(np.isfinite(x)) or abs(x[1]) > 700:
            return math.inf
        d = self.density(x)
        if d is None:
            return math.inf
        r = self.f - d
        return float(r @ r)


def _start_points(dist, family, n, opts, obj):
    q0 = obj.q_ref
    if family is Family.BESSEL_J0:
        p0 = initial_omega(dist, q0)
    else:
        p0 = _initial_a_tt(dist, q0, n, opts.beta)
    starts = [np.array([0.0, math.log(p0)])]
    extra = opts.starts - 1
    if extra > 0:
        rng = np.random.default_rng([opts.seed, family.rank, n])
        factors = np.geomspace(0.5, 2.0, extra) if extra > 1 else np.array([0.75])
        jitter = rng.normal(0.0, 2.0, size=extra)
        for fac, dq in zip(factors, jitter):
            starts.append(np.array([float(dq), math.log(p0 * fac)]))
    return starts


def _n_params(family, opts):
    if family is Family.KUMMER and opts.n_scan_max > 0:
        return 4
    return 3


def fit_model(dist, family, opts=None, order=0):
    """Fit one family to ``dist`` by multi-start Nelder-Mead.

    Parameters
    ----------
    dist : Distribution
    family : Family or str
    opts : FitOptions, optional
    order : int
        Kummer order ``n``; ignored for the Bessel family.

    Returns
    -------
    FitResult
        ``converged`` is False when no start met the simplex tolerances.

    Raises
    ------
    DegenerateError
        Fewer than 8 grid points carry mass, or the total is zero.
    """
    opts = opts or FitOptions()
    family = Family(family)
    support = int(np.count_nonzero(dist.masses > 0))
    if support < MIN_SUPPORT or not dist.total > 0:
        raise DegenerateError(f"distribution has {support} populated points; need {MIN_SUPPORT}")
    n = int(order) if family is Family.KUMMER else 0
    obj = _Objective(dist, family, n, opts.beta)
    starts = _start_points(dist, family, n, opts, obj)

    def run(x0):
        res = minimize(
            obj,
            x0,
            method="Nelder-Mead",
            options={
                "xatol": opts.x_tol,
                "fatol": opts.f_tol,
                "maxiter": opts.max_iters,
                "maxfev": 2 * opts.max_iters,
                "initial_simplex": np.array([x0, x0 + [1.0, 0.0], x0 + [0.0, 0.1]]),
            },
        )
        return float(res.fun), np.asarray(res.x, dtype=float), bool(res.success)

    if opts.jobs > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = [run(x0) for x0 in starts]
    initial = tuple(obj(x0) for x0 in starts)
    # stable reduction: lowest sse, then earliest start
    best_k = min(range(len(outcomes)), key=lambda k: (outcomes[k][0], k))
    best_sse, best_x, _ = outcomes[best_k]
    converged = any(ok for _, _, ok in outcomes)
    q0, p = obj.params(best_x)
    if family is Family.BESSEL_J0:
        model = WaveModel.bessel(q0, p, beta=opts.beta)
    else:
        model = WaveModel.kummer(q0, p, n=n, beta=opts.beta)
    model = normalize_discrete(model, dist.grid)
    f_fit = model.density(dist.grid.points)
    gof = goodness_of_fit(dist, model)
    _, bins = chi2_pooled(dist, f_fit)
    k = _n_params(family, opts)
    q = dist.grid.points
    snapped = float(q[0] + round((q0 - q[0]) / dist.grid.tick) * dist.grid.tick)
    return FitResult(
        model=model,
        sse=gof.sse,
        r2=gof.r2,
        chi2=gof.chi2,
        aic=aic(gof.sse, len(q), k),
        n_params=k,
        starts_tried=len(starts),
        converged=converged,
        q0_snapped=snapped,
        chi2_bins=bins,
        q=np.array(q),
        f_emp=dist.frequencies,
        f_fit=f_fit,
        initial_sse=initial,
    )


def _rank(results):
    pending = sorted(results, key=lambda r: (r.aic, r.family.rank, r.model.n))
    ranked = []
    while pending:
        best = pending[0].aic
        tied = [r for r in pending if r.aic <= best + AIC_TIE_WINDOW]
        pick = min(tied, key=lambda r: (r.n_params, r.family.rank, r.aic, r.model.n))
        ranked.append(pick)
        pending.remove(pick)
    return ranked


def select_model(dist, opts=None):
    """Fit every requested family and rank the fits by AIC.

    The Kummer family is scanned over ``n = 0 .. opts.n_scan_max``. Fits
    within ``2.0`` AIC units of the current best are ordered by fewer
    parameters, then by family enumeration order (Bessel before Kummer).

    Returns
    -------
    list of FitResult
        Best first.
    """
    opts = opts or FitOptions()
    tasks = []
    for fam in opts.families:
        if fam is Family.BESSEL_J0:
            tasks.append((fam, 0))
        else:
            tasks.extend((fam, n) for n in range(opts.n_scan_max + 1))
    if len(tasks) < 2:
        raise DomainError("model selection needs at least two candidates")
    inner = replace(opts, jobs=1)
    if opts.jobs > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(lambda t: fit_model(dist, t[0], inner, t[1]), tasks))
    else:
        results = [fit_model(dist, fam, inner, n) for fam, n in tasks]
    return _rank(results)
