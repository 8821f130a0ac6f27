"""Acceptance criteria as runnable checks.

Each ``criterion_*`` function returns a :class:`CriterionResult`. The
special-function oracles are mpmath evaluations at 40 significant digits,
independent of the series code in :mod:`probwave.specfun`.
"""

import math
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .dataio import build_distribution, generate_synthetic, parse_trades, write_trades
from .eigensolve import (
    SolverConfig,
    compare_spectra,
    solve_bessel_truncated,
    solve_spectrum_nonlocal,
    solve_spectrum_schrodinger,
)
from .fitkit import FitOptions, fit_model, select_model
from .specfun import airy, bessel_j0, bessel_j1, find_root, kummer_m
from .wavemodel import (
    EnergySpec,
    Family,
    Grid,
    PotentialSpec,
    WaveModel,
    eigen_energy_kummer,
    interaction_diagnostic,
    model_derivatives,
    ode_residual,
)

J0_ZERO_1 = 2.404825557695773
J1_ZERO_1 = 3.8317059702075123
AI_ZERO_1 = -2.338107410459767
J0_ZEROS = (2.404825557695773, 5.520078110286311, 8.653727912911013)
AIRY_LEVELS = (1.0187929716, 2.3381074105, 3.2481975822, 4.0879494441)

# synthetic market used by the fitting criteria
Q0 = 100.0
TICK = 0.01
SPAN = 3.0
N_TRADES = 100_000


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number}. {self.name} ({self.seconds:.1f} s): {self.detail}"


def market_grid(q0=Q0, tick=TICK, span=SPAN):
    """Grid of ``q0 +- span`` in steps of ``tick``."""
    half = int(round(span / tick))
    centre = int(round(q0 / tick))
    inv = round(1.0 / tick)
    return Grid((centre + np.arange(-half, half + 1)) / inv, tick)


def _mp():
    import mpmath

    mpmath.mp.dps = 40
    return mpmath


def criterion_special_functions(jobs=1):
    mp = _mp()
    rng = np.random.default_rng(20240101)
    worst = {}

    x = rng.uniform(-50.0, 50.0, 200)
    for name, fn, order in (("j0", bessel_j0, 0), ("j1", bessel_j1, 1)):
        ref = np.array([float(mp.besselj(order, mp.mpf(v))) for v in x])
        worst[name] = float(np.max(np.abs(fn(x) - ref)))

    orders = rng.integers(0, 9, 200)
    xk = rng.uniform(0.0, 40.0, 200)
    errs = []
    for n, v in zip(orders, xk):
        ref = float(mp.hyp1f1(-int(n), 1, mp.mpf(v)))
        errs.append(abs(kummer_m(int(n), v) - ref) / max(1.0, abs(ref)))
    worst["kummer"] = max(errs)

    xa = rng.uniform(-8.0, 8.0, 200)
    ai, aip = np.array([airy(v) for v in xa]).T
    ref_ai = np.array([float(mp.airyai(mp.mpf(v))) for v in xa])
    ref_aip = np.array([float(mp.airyai(mp.mpf(v), derivative=1)) for v in xa])
    worst["airy"] = float(max(np.max(np.abs(ai - ref_ai)), np.max(np.abs(aip - ref_aip))))

    zeros = (
        find_root(bessel_j0, 2.0, 3.0),
        find_root(bessel_j1, 3.5, 4.0),
        find_root(lambda v: airy(v)[0], -3.0, -2.0),
    )
    zero_err = max(abs(z - r) for z, r in zip(zeros, (J0_ZERO_1, J1_ZERO_1, AI_ZERO_1)))

    ok = (
        worst["j0"] <= 1e-10
        and worst["j1"] <= 1e-10
        and worst["kummer"] <= 1e-10
        and worst["airy"] <= 1e-9
        and zero_err <= 1e-8
    )
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", zeros {zero_err:.1e}"
    return ok, detail


def criterion_closed_form_residuals(jobs=1):
    worst_ok, best_bad, worst_bessel = 0.0, math.inf, 0.0
    for a in (0.25, 1.0, 4.0):
        for beta in (0.5, 1.0, 2.0):
            pot = PotentialSpec(0.0, a)
            kappa = math.sqrt(a / beta)
            grid = Grid(np.linspace(0.0, 40.0 / kappa, 4001), 40.0 / kappa / 4000)
            for n in range(6):
                model = WaveModel.kummer(0.0, a, n=n, beta=beta)
                psi, d1, d2 = model_derivatives(model, grid.points)
                e = eigen_energy_kummer(n, a, beta)
                r = ode_residual(psi, grid, EnergySpec.constant(e), pot, beta, (d1, d2))
                r_bad = ode_residual(psi, grid, EnergySpec.constant(1.05 * e), pot, beta, (d1, d2))
                worst_ok = max(worst_ok, r)
                best_bad = min(best_bad, r_bad)
    grid = Grid(np.linspace(-10.0, 10.0, 4001), 20.0 / 4000)
    for omega in (0.5, 1.0, 2.0, 5.0):
        model = WaveModel.bessel(0.0, omega)
        psi, d1, d2 = model_derivatives(model, grid.points)
        r = ode_residual(psi, grid, EnergySpec.bessel_separable(omega), model.potential, 1.0, (d1, d2))
        worst_bessel = max(worst_bessel, r)
    ok = worst_ok <= 1e-6 and best_bad > 1e-3 and worst_bessel <= 1e-6
    return ok, f"kummer max {worst_ok:.1e}, perturbed min {best_bad:.1e}, bessel max {worst_bessel:.1e}"


def criterion_spectrum_recovery(jobs=1):
    worst, nodes_ok = 0.0, True
    for a, beta in ((1.0, 1.0), (4.0, 0.5), (0.25, 2.0)):
        levels = solve_spectrum_nonlocal(PotentialSpec(0.0, a), beta, SolverConfig(n_max=3), jobs)
        for s in levels:
            exact = eigen_energy_kummer(s.index, a, beta)
            worst = max(worst, abs(s.energy - exact) / exact)
            nodes_ok &= s.nodes == s.index
    return worst <= 1e-6 and nodes_ok, f"max rel err {worst:.1e}, nodes match {nodes_ok}"


def criterion_two_worlds(jobs=1):
    worst = 0.0
    for a, bs in ((1.0, 1.0), (8.0, 1.0), (2.0, 0.5)):
        levels = solve_spectrum_schrodinger(a, bs, SolverConfig(n_max=3), jobs)
        scale = bs ** (1 / 3) * a ** (2 / 3)
        for s, z in zip(levels, AIRY_LEVELS):
            worst = max(worst, abs(s.energy - z * scale) / (z * scale))
    table = compare_spectra(1.0, 1.0, 1.0, n_max=3, jobs=jobs)
    gap = 2.0 * math.sqrt(table.a_tt * table.beta)
    uniform = all(abs(g - gap) <= 1e-6 * gap for g in table.nonlocal_spacing)
    sc = table.schrodinger_spacing
    decreasing = all(b < a for a, b in zip(sc[:-1], sc[1:]))
    ok = worst <= 1e-5 and uniform and decreasing
    spacings = ", ".join(f"{g:.4f}" for g in sc)
    return ok, f"max rel err {worst:.1e}, uniform {uniform}, schrodinger spacings {spacings}"


def criterion_truncated_bessel(jobs=1):
    worst = 0.0
    for y_max in (1.0, 2.5):
        roots = solve_bessel_truncated((0.1, 9.0 / y_max), y_max)
        if len(roots) < 3:
            return False, f"only {len(roots)} roots for y_max={y_max}"
        worst = max(worst, max(abs(w * y_max - z) for w, z in zip(roots[:3], J0_ZEROS)))
    return worst <= 1e-6, f"max |omega y_max - j0k| {worst:.1e}"


def _synthetic(model, seed, grid=None):
    return generate_synthetic(model, grid or market_grid(), N_TRADES, seed)


def criterion_fit_recovery(jobs=1):
    opts = FitOptions(seed=0, jobs=jobs)
    hits_b = hits_k = 0
    for seed in range(20):
        dist = _synthetic(WaveModel.bessel(Q0, 2.0), seed)
        res = fit_model(dist, Family.BESSEL_J0, opts)
        hits_b += abs(res.model.omega - 2.0) <= 0.02 * 2.0 and abs(res.model.q0 - Q0) <= TICK
        dist = _synthetic(WaveModel.kummer(Q0, 1.0, n=0), 1000 + seed)
        res = fit_model(dist, Family.KUMMER, opts, 0)
        hits_k += abs(res.model.a_tt - 1.0) <= 0.05
    return hits_b >= 19 and hits_k >= 19, f"bessel {hits_b}/20, kummer {hits_k}/20"


def criterion_model_selection(jobs=1):
    opts = FitOptions(seed=0, jobs=jobs)
    right_b = right_k = 0
    for seed in range(100):
        ranked = select_model(_synthetic(WaveModel.bessel(Q0, 2.0), 5000 + seed), opts)
        right_b += ranked[0].family is Family.BESSEL_J0
        ranked = select_model(_synthetic(WaveModel.kummer(Q0, 1.0, n=0), 6000 + seed), opts)
        right_k += ranked[0].family is Family.KUMMER
    return right_b >= 95 and right_k >= 95, f"bessel {right_b}/100, kummer {right_k}/100"


def _cli_bytes(argv):
    from .cli import run

    code = run(argv)
    if code != 0:
        raise RuntimeError(f"probwave {' '.join(argv)} exited {code}")
    with open(argv[argv.index("--out") + 1], "rb") as fh:
        return fh.read()


def criterion_determinism(jobs=1):
    par = str(max(2, jobs))
    with tempfile.TemporaryDirectory() as tmp:
        trades = os.path.join(tmp, "trades.csv")
        _cli_bytes(["generate", "--format", "csv", "--seed", "11", "--out", trades])
        out = os.path.join(tmp, "out")
        fit = ["fit", "--input", trades, "--family", "auto", "--seed", "5", "--out", out]
        solve = ["solve", "--family", "nonlocal", "--a-tt", "2", "--nmax", "3", "--out", out]
        same = {}
        for name, argv in (("fit", fit), ("solve", solve)):
            runs = [
                _cli_bytes(argv + ["--jobs", "1"]),
                _cli_bytes(argv + ["--jobs", "1"]),
                _cli_bytes(argv + ["--jobs", par]),
            ]
            same[name] = runs[0] == runs[1] == runs[2]
    return all(same.values()), ", ".join(f"{k} identical {v}" for k, v in same.items())


def trade_fixture(n_trades=N_TRADES, seed=77, start_ms=1_704_187_800_000, session_ms=19_800_000):
    """``n_trades`` individual trades drawn from a Bessel profile.

    Prices follow the omega = 2 density around ``Q0``, volumes are 1 to 10
    lots and timestamps are uniform over a session extended by 10% on each
    side, so some trades fall outside ``[start_ms, start_ms + session_ms)``.
    """
    from .dataio import TradeRecord
    from .wavemodel import normalize_discrete

    grid = market_grid()
    probs = normalize_discrete(WaveModel.bessel(Q0, 2.0), grid).density(grid.points)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(grid), size=n_trades, p=probs / probs.sum())
    vol = rng.integers(1, 11, size=n_trades)
    pad = session_ms // 10
    ts = np.sort(rng.integers(start_ms - pad, start_ms + session_ms + pad, size=n_trades))
    return [TradeRecord(int(t), float(grid.points[i]), float(v)) for t, i, v in zip(ts, idx, vol)]


def criterion_conservation(jobs=1):
    start, end = 1_704_187_800_000, 1_704_187_800_000 + 19_800_000
    fixture = trade_fixture(start_ms=start, session_ms=end - start)
    trades = parse_trades(write_trades(fixture, TICK), lot_size=100.0)
    expected = 100 * sum(int(t.volume) for t in fixture if start <= t.timestamp < end)
    dist = build_distribution(trades, (start, end), TICK)
    exact = dist.total == expected
    report = interaction_diagnostic(dist, fit_model(dist, Family.BESSEL_J0, FitOptions(jobs=jobs)).model)
    fields_ok = (
        report.omega_sq > 0
        and report.interaction_stat.shape == dist.masses.shape
        and np.isfinite(report.stat_cv)
        and "pointwise" in report.note
    )
    return exact and fields_ok, (
        f"{len(trades)} trades, in-window volume {dist.total:.0f} (expected {expected}), "
        f"omega^2 {report.omega_sq:.4f}, stat cv {report.stat_cv:.2f}"
    )


CRITERIA = (
    (1, "special-function oracles", criterion_special_functions),
    (2, "closed-form residuals", criterion_closed_form_residuals),
    (3, "non-localized spectrum recovery", criterion_spectrum_recovery),
    (4, "two-world comparison", criterion_two_worlds),
    (5, "truncated-Bessel quantization", criterion_truncated_bessel),
    (6, "fit recovery", criterion_fit_recovery),
    (7, "model selection", criterion_model_selection),
    (8, "determinism", criterion_determinism),
    (9, "pipeline conservation", criterion_conservation),
)


def run_criterion(number, jobs=1):
    """Run one criterion, turning exceptions into failures."""
    for num, name, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(jobs=jobs)
            except Exception as exc:  # a crash is a failed criterion
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(f"no criterion {number}")


def run_all(selected=None, jobs=1, log=print):
    """Run the selected criteria (all by default) and log one line each."""
    numbers = sorted(set(selected)) if selected else [num for num, _, _ in CRITERIA]
    results = []
    for num in numbers:
        res = run_criterion(num, jobs)
        if log is not None:
            log(res.line())
        results.append(res)
    return results
