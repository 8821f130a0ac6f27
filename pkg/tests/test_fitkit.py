import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from probwave.dataio import Distribution, generate_synthetic
from probwave.errors import DegenerateError, DomainError
from probwave.fitkit import (
    FitOptions,
    aic,
    chi2_pooled,
    fit_model,
    goodness_of_fit,
    initial_omega,
    select_model,
)
from probwave.wavemodel import Family, Grid, WaveModel

GRID = Grid(np.arange(9700, 10301) / 100, 0.01)
N = 100_000


def bessel_data(seed, omega=2.0):
    return generate_synthetic(WaveModel.bessel(100.0, omega), GRID, N, seed)


def kummer_data(seed, a_tt=1.0, n=0):
    return generate_synthetic(WaveModel.kummer(100.0, a_tt, n=n), GRID, N, seed)


@pytest.fixture(scope="module")
def bessel_fit():
    dist = bessel_data(7)
    return dist, fit_model(dist, Family.BESSEL_J0)


class TestOptions:
    @pytest.mark.parametrize(
        "kwargs",
        [{"starts": 0}, {"n_scan_max": -1}, {"max_iters": 0}, {"x_tol": 0.0}, {"f_tol": -1.0}, {"beta": 0.0}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            FitOptions(**kwargs)

    def test_families_from_strings(self):
        assert FitOptions(families=("bessel", "kummer")).families == (Family.BESSEL_J0, Family.KUMMER)


class TestGoodnessOfFit:
    def test_exact_match(self):
        dist = Distribution(GRID, np.arange(1.0, 602.0))
        gof = goodness_of_fit(dist, dist.frequencies)
        assert gof.sse == 0.0 and gof.r2 == 1.0

    def test_uniform_predictor(self):
        dist = bessel_data(1)
        gof = goodness_of_fit(dist, np.ones(len(GRID)))
        assert gof.r2 == pytest.approx(0.0, abs=1e-12)

    def test_density_renormalized(self):
        dist = bessel_data(1)
        model = WaveModel.bessel(100.0, 2.0)
        assert goodness_of_fit(dist, model) == goodness_of_fit(dist, WaveModel.bessel(100.0, 2.0, c=9.0))

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            goodness_of_fit(bessel_data(1), np.ones(3))

    def test_vanishing_density(self):
        with pytest.raises(DegenerateError):
            goodness_of_fit(bessel_data(1), np.zeros(len(GRID)))

    def test_chi2_pools_small_bins(self):
        dist = Distribution(Grid.uniform(0.0, 1.0, 4), np.array([50.0, 48.0, 1.0, 1.0]))
        chi2, bins = chi2_pooled(dist, np.array([0.5, 0.48, 0.01, 0.01]))
        assert bins == 3
        assert chi2 == pytest.approx(0.0, abs=1e-12)

    def test_aic_definition(self):
        assert aic(2.0, 4, 3) == pytest.approx(4 * math.log(0.5) + 6.0)


class TestInitialOmega:
    @pytest.mark.parametrize("omega", [1.0, 2.0, 4.0])
    def test_close_to_truth(self, omega):
        est = initial_omega(bessel_data(3, omega), 100.0)
        assert 0.7 * omega <= est <= 1.4 * omega


class TestFitModel:
    def test_bessel_recovery(self, bessel_fit):
        _, res = bessel_fit
        assert res.model.omega == pytest.approx(2.0, rel=0.02)
        assert abs(res.model.q0 - 100.0) <= 0.01
        assert res.q0_snapped == pytest.approx(100.0, abs=1e-12)
        assert res.converged
        assert res.n_params == 3 and res.starts_tried == 8

    def test_kummer_recovery(self):
        res = fit_model(kummer_data(11), Family.KUMMER, FitOptions(), order=0)
        assert res.model.a_tt == pytest.approx(1.0, rel=0.05)
        assert res.label == "kummer(n=0)"

    def test_kummer_higher_order(self):
        res = fit_model(kummer_data(12, a_tt=4.0, n=1), Family.KUMMER, FitOptions(), order=1)
        assert res.model.a_tt == pytest.approx(4.0, rel=0.05)

    def test_normalization_closure(self, bessel_fit):
        dist, res = bessel_fit
        assert np.sum(res.model.density(dist.grid.points)) == pytest.approx(1.0, abs=1e-12)
        assert np.sum(res.f_fit) == pytest.approx(1.0, abs=1e-12)

    def test_sse_definition(self, bessel_fit):
        dist, res = bessel_fit
        assert res.sse == pytest.approx(float(np.sum((dist.frequencies - res.f_fit) ** 2)), rel=1e-12)
        assert res.aic == aic(res.sse, len(dist.grid), res.n_params)

    def test_objective_not_worse_than_starts(self, bessel_fit):
        _, res = bessel_fit
        assert len(res.initial_sse) == res.starts_tried
        assert res.sse <= min(res.initial_sse)

    def test_single_price_degenerate(self):
        dist = Distribution(Grid(np.array([10.0]), 0.01), np.array([500.0]))
        with pytest.raises(DegenerateError):
            fit_model(dist, Family.BESSEL_J0)

    def test_sparse_support_degenerate(self):
        m = np.zeros(len(GRID))
        m[::100] = 1.0
        with pytest.raises(DegenerateError):
            fit_model(Distribution(GRID, m), Family.BESSEL_J0)

    def test_seed_determinism(self, bessel_fit):
        dist, res = bessel_fit
        again = fit_model(dist, Family.BESSEL_J0)
        par = fit_model(dist, Family.BESSEL_J0, FitOptions(jobs=4))
        for other in (again, par):
            assert other.model == res.model and other.sse == res.sse

    @pytest.mark.parametrize("delta", [0.37, 12.0])
    def test_shift_equivariance(self, bessel_fit, delta):
        dist, res = bessel_fit
        shifted = Distribution(Grid(np.round((dist.grid.points + delta) * 100) / 100, 0.01), dist.masses)
        moved = fit_model(shifted, Family.BESSEL_J0)
        assert moved.model.q0 - delta == pytest.approx(res.model.q0, abs=1e-7 * 0.01 + 1e-9)
        assert moved.model.omega == pytest.approx(res.model.omega, rel=1e-7)
        assert moved.sse == pytest.approx(res.sse, abs=1e-15)

    def test_scale_invariance(self, bessel_fit):
        dist, res = bessel_fit
        scaled = fit_model(Distribution(dist.grid, dist.masses * 100.0), Family.BESSEL_J0)
        assert scaled.model == res.model
        assert scaled.r2 == res.r2

    @settings(max_examples=6, deadline=None)
    @given(st.floats(1.0, 4.0), st.integers(0, 2**32 - 1))
    def test_recovery_property(self, omega, seed):
        res = fit_model(bessel_data(seed, omega), Family.BESSEL_J0)
        assert res.model.omega == pytest.approx(omega, rel=0.03)
        assert abs(res.model.q0 - 100.0) <= 0.02


class TestSelectModel:
    def test_bessel_first(self):
        ranked = select_model(bessel_data(21))
        assert ranked[0].family is Family.BESSEL_J0
        assert len(ranked) == 5
        assert [r.label for r in ranked].count("bessel") == 1

    def test_kummer_first(self):
        ranked = select_model(kummer_data(22))
        assert ranked[0].family is Family.KUMMER

    def test_needs_two_candidates(self):
        with pytest.raises(DomainError):
            select_model(bessel_data(1), FitOptions(families=(Family.BESSEL_J0,)))

    def test_tie_prefers_bessel(self, monkeypatch):
        import probwave.fitkit as fk

        def fake(r_family, n):
            model = WaveModel.bessel(0.0, 1.0) if r_family is Family.BESSEL_J0 else WaveModel.kummer(0.0, 1.0, n)
            return fk.FitResult(model, 1.0, 0.5, 1.0, 10.0, 3, 1, True, 0.0, 1, np.zeros(1), np.zeros(1), np.zeros(1))

        ranked = fk._rank([fake(Family.KUMMER, 0), fake(Family.BESSEL_J0, 0)])
        assert [r.family for r in ranked] == [Family.BESSEL_J0, Family.KUMMER]

    def test_tie_window_prefers_fewer_params(self):
        import probwave.fitkit as fk

        def fake(model, a, k):
            return fk.FitResult(model, 1.0, 0.5, 1.0, a, k, 1, True, 0.0, 1, np.zeros(1), np.zeros(1), np.zeros(1))

        richer = fake(WaveModel.kummer(0.0, 1.0, 1), 100.0, 4)
        simpler = fake(WaveModel.bessel(0.0, 1.0), 101.5, 3)
        far = fake(WaveModel.kummer(0.0, 1.0, 2), 110.0, 3)
        assert fk._rank([far, richer, simpler]) == [simpler, richer, far]

    def test_parallel_matches_serial(self):
        dist = kummer_data(23)
        serial = select_model(dist)
        par = select_model(dist, FitOptions(jobs=4))
        assert [(r.label, r.sse, r.model) for r in serial] == [(r.label, r.sse, r.model) for r in par]


@pytest.mark.slow
def test_chi2_calibration():
    inside = 0
    for seed in range(100):
        res = fit_model(bessel_data(10_000 + seed), Family.BESSEL_J0)
        # q0 and omega are fitted; c is fixed by normalization
        lo, hi = stats.chi2.ppf([0.005, 0.995], res.chi2_bins - 1 - 2)
        inside += lo <= res.chi2 <= hi
    assert inside >= 95
