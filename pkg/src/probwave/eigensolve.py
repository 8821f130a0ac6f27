r"""Shooting-method eigensolvers for the two wave equations.

Non-localized equation, half-line :math:`y = q - q_0 \ge 0`:

.. math::
    \beta (y \psi'' + \psi') + (E - A_{tt} y) \psi = 0,
    \qquad \psi(0) = 1, \; \psi'(0) = -E/\beta .

The origin is a regular singular point with a double indicial root; the
bounded branch is started from its Frobenius series and continued with a
fixed-step RK4 integrator. Eigenvalues are bracketed by node counting and
refined by bisection.

Reference Schrödinger equation with a V-shaped potential:

.. math::
    -\beta_s \psi'' + A_{tt} |x| \psi = E \psi ,

solved on :math:`x \ge 0` once with the even start
(:math:`\psi'(0) = 0`) and once with the odd start (:math:`\psi(0) = 0`).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, SolverError, SpectrumError
from .specfun import find_root
from .wavemodel import EnergySpec, Grid, PotentialSpec, eigen_energy_kummer, ode_residual

__all__ = [
    "SolverConfig",
    "EigenSolution",
    "Shot",
    "ComparisonTable",
    "shoot_nonlocal",
    "shoot_schrodinger",
    "solve_spectrum_nonlocal",
    "solve_bessel_truncated",
    "solve_spectrum_schrodinger",
    "compare_spectra",
    "count_nodes",
]

MIN_STEPS = 2000
RESIDUAL_TOL = 1e-5


@dataclass(frozen=True)
class SolverConfig:
    """Integration and bisection settings.

    ``y_max=None`` selects a default truncation radius per problem:
    ``40 / kappa`` for the non-localized equation and roughly four times
    the highest classical turning point for the Schrödinger equation.
    """

    y_max: float = None
    steps: int = 100_000
    e_tol: float = 1e-10
    n_max: int = 3
    residual_tol: float = RESIDUAL_TOL

    def __post_init__(self):
        if self.y_max is not None and not self.y_max > 0:
            raise DomainError(f"y_max must be positive, got {self.y_max}")
        if int(self.steps) != self.steps or self.steps < MIN_STEPS:
            raise DomainError(f"steps must be an integer >= {MIN_STEPS}, got {self.steps}")
        if not self.e_tol > 0:
            raise DomainError("e_tol must be positive")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise DomainError("n_max must be a nonnegative integer")


@dataclass(frozen=True)
class EigenSolution:
    """One eigenpair on the half-line.

    ``nodes`` counts sign changes on the open half-line. For the
    non-localized equation ``index == nodes``; for the Schrödinger equation
    ``index == 2 * nodes + parity`` (full-line node count).
    """

    index: int
    energy: float
    y: np.ndarray = field(repr=False)
    psi_samples: np.ndarray = field(repr=False)
    residual: float
    converged: bool
    nodes: int
    parity: int = None


@dataclass(frozen=True)
class Shot:
    """Result of one outward integration.

    ``nodes`` counts sign changes inside the classical turning point, i.e.
    in the bound part of the trajectory.
    ``total_nodes`` counts all sign changes, including the one a divergent
    tail picks up just above an eigenvalue; it equals the number of
    eigenvalues below the trial energy and drives the bracketing.
    """

    psi_end: float
    nodes: int
    y: np.ndarray = field(repr=False)
    psi_samples: np.ndarray = field(repr=False)
    total_nodes: int = None


def count_nodes(psi):
    """Number of sign changes in ``psi``, ignoring exact zeros."""
    s = np.sign(np.asarray(psi, dtype=float))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _frobenius(g0, g1, y, n_terms=40):
    """Bounded series solution of y p'' + p' + (g0 + g1 y) p = 0, p(0) = 1."""
    c = [1.0, -g0]
    for k in range(2, n_terms):
        c.append(-(g0 * c[k - 1] + g1 * c[k - 2]) / (k * k))
    psi = np.full_like(y, c[-1])
    dpsi = np.full_like(y, (n_terms - 1) * c[-1])
    for k in range(n_terms - 2, -1, -1):
        psi = psi * y + c[k]
    for k in range(n_terms - 2, 0, -1):
        dpsi = dpsi * y + k * c[k]
    return psi, dpsi


def _radial_shot(g0, g1, y_max, steps):
    h = y_max / steps
    y = h * np.arange(steps + 1, dtype=float)
    # series region: |g0| y <= 1/2 and |g1| y^2 <= 1/4
    reach = 0.5 / max(abs(g0), math.sqrt(abs(g1)), 1e-300)
    i0 = int(min(max(1, math.floor(reach / h)), steps))
    psi = np.empty_like(y)
    dpsi = np.empty_like(y)
    psi[: i0 + 1], dpsi[: i0 + 1] = _frobenius(g0, g1, y[: i0 + 1])
    bad = _kernels.rk4_radial(0.0, h, g0, g1, psi, dpsi, i0)
    if bad >= 0:
        raise SolverError(f"trajectory overflowed at y = {y[bad]:.6g}", location=float(y[bad]))
    return y, psi


def shoot_nonlocal(potential, beta, e, cfg=None):
    """Integrate the non-localized equation outward from the singular point.

    Parameters
    ----------
    potential : PotentialSpec
        Only ``a_tt`` is used; the integration runs in ``y = q - q0``.
    beta : float
    e : float
        Trial energy, must be positive.
    cfg : SolverConfig, optional

    Returns
    -------
    Shot
    """
    cfg = cfg or SolverConfig()
    if not (e > 0 and math.isfinite(e)):
        raise SolverError(f"energy must be positive and finite, got {e}")
    y_max = cfg.y_max if cfg.y_max is not None else _default_y_max_nonlocal(potential, beta)
    y, psi = _radial_shot(e / beta, -potential.a_tt / beta, y_max, cfg.steps)
    return _make_shot(y, psi, e / potential.a_tt)


def _default_y_max_nonlocal(potential, beta):
    return 40.0 / math.sqrt(potential.a_tt / beta)


def _make_shot(y, psi, turning):
    # eigenfunctions have no zeros in the classically forbidden region
    bound = psi[1:][y[1:] <= turning]
    return Shot(float(psi[-1]), count_nodes(bound), y, psi, count_nodes(psi[1:]))


def _bisect_nodes(shoot, lo, hi, n, tol):
    """Shrink [lo, hi] around the energy where node count passes n."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if shoot(mid).total_nodes > n:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _scan(shoot, step, n_max, max_points):
    """Energies step, 2 step, ... until the node count exceeds n_max."""
    energies, nodes = [], []
    k = 0
    while not nodes or nodes[-1] <= n_max:
        k += 1
        if k > max_points:
            break
        e = k * step
        energies.append(e)
        nodes.append(shoot(e).total_nodes)
    return energies, nodes


def _bracket(energies, nodes, n):
    lo = 0.0
    for e, m in zip(energies, nodes):
        if m > n:
            return lo, e
        lo = e
    raise SpectrumError(f"eigenvalue index {n} not bracketed by the energy scan", index=n)


def _trim_tail(y, psi, turning):
    """Cut the trajectory at its smallest magnitude beyond the turning point."""
    beyond = np.nonzero(y > turning)[0]
    if beyond.size < 2:
        return y, psi
    cut = beyond[0] + int(np.argmin(np.abs(psi[beyond])))
    return y[: cut + 1], psi[: cut + 1]


def _map_indices(func, indices, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(func, indices))
    else:
        results = [func(i) for i in indices]
    return sorted(results, key=lambda s: s.index)


def solve_spectrum_nonlocal(potential, beta=1.0, cfg=None, jobs=1):
    """Eigenvalues E_0 < ... < E_{n_max} of the non-localized equation.

    Parameters
    ----------
    potential : PotentialSpec
    beta : float
    cfg : SolverConfig, optional
    jobs : int
        Worker threads for the per-index bisections. Results do not depend
        on this value.

    Returns
    -------
    list of EigenSolution
    """
    cfg = cfg or SolverConfig()
    if not beta > 0:
        raise DomainError("beta must be positive")
    kappa = math.sqrt(potential.a_tt / beta)
    y_max = cfg.y_max if cfg.y_max is not None else _default_y_max_nonlocal(potential, beta)
    if y_max < 20.0 / kappa:
        raise DomainError(f"y_max={y_max} is below 20/kappa={20.0 / kappa}")
    g1 = -potential.a_tt / beta

    def shoot(e):
        y, psi = _radial_shot(e / beta, g1, y_max, cfg.steps)
        return _make_shot(y, psi, e / potential.a_tt)

    step = math.sqrt(potential.a_tt * beta) / 4.0
    energies, nodes = _scan(shoot, step, cfg.n_max, max_points=8 * (cfg.n_max + 2) + 8)
    half_line = PotentialSpec(0.0, potential.a_tt)

    def refine(n):
        lo, hi = _bisect_nodes(shoot, *_bracket(energies, nodes, n), n, cfg.e_tol)
        energy = 0.5 * (lo + hi)
        low = shoot(lo)
        y, psi = _trim_tail(low.y, low.psi_samples, energy / potential.a_tt)
        residual = ode_residual(
            psi, Grid(y, y[1] - y[0]), EnergySpec.constant(energy), half_line, beta
        )
        n_nodes = count_nodes(psi[1:])
        converged = hi - lo <= cfg.e_tol and residual <= cfg.residual_tol and n_nodes == n
        return EigenSolution(n, energy, y, psi, residual, converged, n_nodes)

    return _map_indices(refine, range(cfg.n_max + 1), jobs)


def solve_bessel_truncated(omega_hint_range, y_max, cfg=None):
    """Frequencies for which J0(omega y) vanishes at ``y_max``.

    Shoots ``y p'' + p' + omega^2 y p = 0`` from the singular point and
    bisects the endpoint value on every sign change found while scanning
    ``omega_hint_range``.

    Returns
    -------
    list of float
        Increasing frequencies inside the hint range.
    """
    cfg = cfg or SolverConfig()
    lo, hi = (float(v) for v in omega_hint_range)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not hi > lo or hi <= 0:
        raise DomainError(f"empty frequency range {omega_hint_range!r}")
    if not y_max > 0:
        raise DomainError("y_max must be positive")
    lo = max(lo, 0.0)

    def end_value(omega):
        if omega == 0.0:
            return 1.0
        return float(_radial_shot(0.0, omega * omega, y_max, cfg.steps)[1][-1])

    # zeros of J0 are spaced by about pi; sample several times per gap
    n_scan = max(8, int(math.ceil((hi - lo) * y_max / (math.pi / 8.0))))
    grid = np.linspace(lo, hi, n_scan + 1)
    values = [end_value(w) for w in grid]
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif (fa > 0) != (fb > 0) and fb != 0.0:
            tol = max(cfg.e_tol / y_max, 1e-15 * b)
            roots.append(find_root(end_value, a, b, tol=tol))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def shoot_schrodinger(a_tt, beta_s, e, parity, y_max, steps):
    """Half-line trajectory of the V-potential Schrödinger equation.

    ``parity`` 0 starts with psi(0)=1, psi'(0)=0; parity 1 with psi(0)=0,
    psi'(0)=1.
    """
    h = y_max / steps
    y = h * np.arange(steps + 1, dtype=float)
    psi = np.empty_like(y)
    dpsi = np.empty_like(y)
    psi[0], dpsi[0] = (1.0, 0.0) if parity == 0 else (0.0, 1.0)
    bad = _kernels.rk4_linear(h, a_tt, e, beta_s, psi, dpsi)
    if bad >= 0:
        raise SolverError(f"trajectory overflowed at x = {y[bad]:.6g}", location=float(y[bad]))
    return _make_shot(y, psi, e / a_tt)


def _schrodinger_residual(y, psi, a_tt, beta_s, e):
    h = y[1] - y[0]
    d2 = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / (h * h)
    res = -beta_s * d2 + (a_tt * y[1:-1] - e) * psi[1:-1]
    return float(np.max(np.abs(res)) / np.max(np.abs(psi)))


def _wkb_level(n):
    # half-width of the V well: 2 * (2/3) eps^(3/2) = (n + 1/2) pi
    return (0.75 * math.pi * (n + 0.5)) ** (2.0 / 3.0)


def solve_spectrum_schrodinger(a_tt, beta_s=1.0, cfg=None, jobs=1):
    """Eigenvalues of -beta_s psi'' + a_tt |x| psi = E psi, parities interleaved.

    Returns
    -------
    list of EigenSolution
        Ordered by energy; even ``index`` values carry parity 0.
    """
    cfg = cfg or SolverConfig()
    if not (a_tt > 0 and beta_s > 0):
        raise DomainError("a_tt and beta_s must be positive")
    length = (beta_s / a_tt) ** (1.0 / 3.0)
    e_scale = beta_s ** (1.0 / 3.0) * a_tt ** (2.0 / 3.0)
    eps_top = _wkb_level(cfg.n_max + 1)
    if cfg.y_max is not None:
        y_max = cfg.y_max
    else:
        y_max = length * (eps_top + min(3.0 * eps_top, 20.0))
    step = 0.05 * e_scale
    max_points = int(math.ceil(2.0 * eps_top / 0.05)) + 8

    scans = {}
    for parity in (0, 1):
        def shoot(e, parity=parity):
            return shoot_schrodinger(a_tt, beta_s, e, parity, y_max, cfg.steps)

        target = (cfg.n_max - parity) // 2
        scans[parity] = (shoot,) + _scan(shoot, step, max(target, 0), max_points)

    def refine(n):
        parity = n % 2
        k = n // 2
        shoot, energies, nodes = scans[parity]
        try:
            bracket = _bracket(energies, nodes, k)
        except SpectrumError as exc:
            raise SpectrumError(str(exc).replace(f"index {k}", f"index {n}"), index=n) from None
        lo, hi = _bisect_nodes(shoot, *bracket, k, cfg.e_tol)
        energy = 0.5 * (lo + hi)
        low = shoot(lo)
        y, psi = _trim_tail(low.y, low.psi_samples, energy / a_tt)
        residual = _schrodinger_residual(y, psi, a_tt, beta_s, energy)
        n_nodes = count_nodes(psi[1:])
        converged = hi - lo <= cfg.e_tol and residual <= cfg.residual_tol and n_nodes == k
        return EigenSolution(n, energy, y, psi, residual, converged, n_nodes, parity)

    return _map_indices(refine, range(cfg.n_max + 1), jobs)


@dataclass(frozen=True)
class ComparisonTable:
    """Side-by-side levels of the non-localized and Schrödinger spectra.

    ``spacing_ratio[k] = schrodinger_spacing[k] / nonlocal_spacing[k]``.
    """

    a_tt: float
    beta: float
    beta_s: float
    nonlocal_levels: tuple
    schrodinger_levels: tuple
    nonlocal_spacing: tuple
    schrodinger_spacing: tuple
    spacing_ratio: tuple
    nonlocal_exact: tuple

    @property
    def rows(self):
        """One dict per level index, spacings attached to the upper level."""
        out = []
        for n, (e_nl, e_s) in enumerate(zip(self.nonlocal_levels, self.schrodinger_levels)):
            row = {"n": n, "nonlocal": e_nl, "schrodinger": e_s}
            if n > 0:
                row["nonlocal_spacing"] = self.nonlocal_spacing[n - 1]
                row["schrodinger_spacing"] = self.schrodinger_spacing[n - 1]
                row["spacing_ratio"] = self.spacing_ratio[n - 1]
            out.append(row)
        return out


def compare_spectra(a_tt, beta=1.0, beta_s=1.0, n_max=3, cfg=None, jobs=1):
    """Solve both equations for the same linear potential and tabulate.

    The non-localized ladder is uniformly spaced by 2 sqrt(a_tt beta); the
    Schrödinger spacings shrink with n.
    """
    if int(n_max) != n_max or n_max < 0:
        raise DomainError("n_max must be a nonnegative integer")
    base = cfg or SolverConfig()
    cfg = SolverConfig(base.y_max, base.steps, base.e_tol, int(n_max), base.residual_tol)
    nl = [s.energy for s in solve_spectrum_nonlocal(PotentialSpec(0.0, a_tt), beta, cfg, jobs)]
    sc = [s.energy for s in solve_spectrum_schrodinger(a_tt, beta_s, cfg, jobs)]
    nl_gap = tuple(float(b - a) for a, b in zip(nl[:-1], nl[1:]))
    sc_gap = tuple(float(b - a) for a, b in zip(sc[:-1], sc[1:]))
    return ComparisonTable(
        a_tt=float(a_tt),
        beta=float(beta),
        beta_s=float(beta_s),
        nonlocal_levels=tuple(nl),
        schrodinger_levels=tuple(sc),
        nonlocal_spacing=nl_gap,
        schrodinger_spacing=sc_gap,
        spacing_ratio=tuple(s / g for s, g in zip(sc_gap, nl_gap)),
        nonlocal_exact=tuple(eigen_energy_kummer(n, a_tt, beta) for n in range(int(n_max) + 1)),
    )
