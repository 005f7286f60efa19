import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lightcone.errors import ConvergenceFailure, DomainError, LightConeSingularity
from lightcone.propagator import (GRID_COLUMNS, INSIDE_CONE, NEAR_CONE, OUTSIDE_CONE,
                                  ModeSumConfig, SpacetimeInterval, classify,
                                  feynman_propagator_closed, feynman_propagator_far,
                                  lorentz_boost, mode_sum_propagator, propagator_grid,
                                  regulated_closed_form)


def closed(r, tau, eps=0.0):
    return feynman_propagator_closed(SpacetimeInterval(r, tau), eps).value


class TestClosedForm:
    def test_unit_separation(self, frozen):
        assert closed(1.0, 0.0) == pytest.approx(complex(*frozen["propagator_r1"]), rel=1e-15)

    def test_inverse_square(self, frozen):
        assert abs(closed(2.0, 0.0)) == pytest.approx(frozen["propagator_r2_abs"], rel=1e-15)
        assert abs(closed(2.0, 0.0)) == pytest.approx(abs(closed(1.0, 0.0)) / 4, rel=1e-15)

    def test_on_cone_raises(self):
        with pytest.raises(LightConeSingularity):
            closed(1.0, 1.0)
        with pytest.raises(LightConeSingularity):
            closed(1.0, -1.0 - 1e-12)

    def test_regulator_allows_cone(self):
        v = feynman_propagator_closed(SpacetimeInterval(1.0, 1.0), epsilon=1e-3)
        assert v.regime == NEAR_CONE
        assert v.value == pytest.approx(-1 / (4j * math.pi**2 * (-1e-3j)))

    def test_regimes(self):
        assert classify(SpacetimeInterval(2.0, 1.0)) == OUTSIDE_CONE
        assert classify(SpacetimeInterval(1.0, 2.0)) == INSIDE_CONE
        assert classify(SpacetimeInterval(0.0, 0.0)) == NEAR_CONE

    def test_domain(self):
        with pytest.raises(DomainError):
            SpacetimeInterval(-1.0, 0.0)
        with pytest.raises(DomainError):
            feynman_propagator_closed(SpacetimeInterval(1.0, 0.0), epsilon=-1.0)
        with pytest.raises(DomainError):
            SpacetimeInterval(float("nan"), 0.0)


class TestFarZone:
    def test_values(self, frozen):
        assert feynman_propagator_far(1.0) == pytest.approx(complex(*frozen["propagator_r1"]))
        assert feynman_propagator_far(10.0) == pytest.approx(
            complex(*frozen["propagator_r10"]), rel=1e-15)

    @given(st.floats(1e-3, 1e6))
    def test_equals_closed_exactly(self, r):
        assert feynman_propagator_far(r) == closed(r, 0.0)

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_nonpositive(self, r):
        with pytest.raises(DomainError):
            feynman_propagator_far(r)


class TestBoost:
    def test_identity(self):
        assert lorentz_boost(3.0, 1.5, 0.0) == (3.0, 1.5)

    def test_known(self, frozen):
        x, t = lorentz_boost(5.0, 0.0, 0.5)
        assert (x, t) == pytest.approx(tuple(frozen["boost_5_0_05"]), rel=1e-15)
        assert x * x - t * t == pytest.approx(25.0, rel=1e-14)

    @given(st.floats(0.1, 100), st.floats(-100, 100), st.floats(-3, 3))
    def test_interval_preserved(self, x, t, y):
        xp, tp = lorentz_boost(x, t, y)
        scale = max(x * x, t * t) * math.cosh(y) ** 2
        assert abs((xp * xp - tp * tp) - (x * x - t * t)) <= 1e-13 * scale

    @given(st.floats(0.1, 10), st.floats(0.0, 10), st.floats(-2, 2))
    def test_propagator_invariant(self, r, tau, y):
        iv = SpacetimeInterval(r, tau)
        if classify(iv, 1e-3) == NEAR_CONE:
            return
        before = feynman_propagator_closed(iv).value
        after = feynman_propagator_closed(iv.boosted(y)).value
        assert abs(after - before) <= 1e-12 * abs(before) * math.cosh(y) ** 2 * 10

    @given(st.floats(0.1, 10), st.floats(0, 5), st.floats(0.01, 100))
    def test_homogeneity(self, r, tau, lam):
        iv = SpacetimeInterval(r, tau)
        if classify(iv, 1e-6) == NEAR_CONE:
            return
        scaled = abs(closed(lam * r, lam * tau))
        assert scaled == pytest.approx(abs(closed(r, tau)) / lam**2, rel=1e-12)


class TestModeSum:
    def test_ratio_tau0(self, frozen):
        iv = SpacetimeInterval(1.0, 0.0)
        res = mode_sum_propagator(iv, ModeSumConfig(0.01, 5000.0))
        ratio = res.value / (-1j * closed(1.0, 0.0))
        assert ratio.real == pytest.approx(frozen["modesum_ratio_r1_tau0_eta001"], rel=1e-9)
        assert abs(ratio.imag) < 1e-12

    def test_ratio_large_eta(self, frozen):
        iv = SpacetimeInterval(1.0, 0.0)
        res = mode_sum_propagator(iv, ModeSumConfig(0.1, 500.0))
        ratio = res.value / (-1j * closed(1.0, 0.0))
        assert ratio.real == pytest.approx(frozen["modesum_ratio_r1_tau0_eta01"], rel=1e-9)

    def test_general_tau(self, frozen):
        iv = SpacetimeInterval(1.0, 0.5)
        res = mode_sum_propagator(iv, ModeSumConfig(0.01, 5000.0))
        assert res.value == pytest.approx(complex(*frozen["modesum_value_r1_tau05_eta001"]),
                                          rel=1e-9)
        target = -1j * closed(1.0, 0.5)
        rel = abs(res.value - target) / abs(target)
        assert rel == pytest.approx(frozen["modesum_relerr_r1_tau05_eta001"], rel=1e-6)
        assert rel == pytest.approx(2 * 0.01 * 0.5 / 0.75, rel=1e-2)

    @pytest.mark.parametrize("r,tau", [(1.0, 0.0), (2.0, 1.0), (1.0, 1.5), (0.5, -0.2)])
    def test_matches_regulated_form(self, r, tau):
        iv = SpacetimeInterval(r, tau)
        cfg = ModeSumConfig.default_for(iv)
        res = mode_sum_propagator(iv, cfg)
        exact = regulated_closed_form(iv, cfg.eta)
        assert abs(res.value - exact) <= 1e-9 * abs(exact)
        assert res.error_estimate >= res.truncation_error >= 0

    def test_default_config(self):
        cfg = ModeSumConfig.default_for(SpacetimeInterval(2.0, 1.0))
        assert cfg.eta == pytest.approx(0.01)
        assert cfg.k_max == pytest.approx(5000.0)
        with pytest.raises(DomainError):
            ModeSumConfig.default_for(SpacetimeInterval(1.0, 1.0))

    def test_small_cutoff_warns(self):
        with pytest.warns(RuntimeWarning):
            ModeSumConfig(0.1, 10.0)

    def test_convergence_failure(self):
        iv = SpacetimeInterval(1.0, 0.0)
        with pytest.raises(ConvergenceFailure):
            mode_sum_propagator(iv, ModeSumConfig(0.001, 5e4, panels=1), tol=1e-15,
                                max_panels=4)

    def test_invalid_config(self):
        with pytest.raises(DomainError):
            ModeSumConfig(0.0, 10.0)
        with pytest.raises(DomainError):
            mode_sum_propagator(SpacetimeInterval(0.0, 1.0), ModeSumConfig(0.1, 500.0))


class TestGrid:
    def test_shape_and_columns(self):
        rows = propagator_grid(1.0, 3.0, 21)
        assert len(rows) == 441
        assert GRID_COLUMNS == ("x", "y", "re", "im", "magnitude", "regime")

    def test_radial_symmetry_bitwise(self):
        rows = propagator_grid(1.0, 3.0, 41)
        seen = {}
        for row in rows:
            key = tuple(sorted((abs(row.x), abs(row.y))))
            assert seen.setdefault(key, row.magnitude) == row.magnitude

    def test_outside_nonzero_and_clamped(self):
        rows = propagator_grid(1.0, 1.0, 3)  # includes r = 1 exactly on the axes
        cap = 1e6 / (4 * math.pi**2)
        on = [r for r in rows if math.hypot(r.x, r.y) == 1.0]
        assert on and all(r.regime == NEAR_CONE and r.magnitude == pytest.approx(cap)
                          for r in on)
        rows = propagator_grid(1.0, 5.0, 51)
        assert all(r.magnitude > 0 for r in rows if math.hypot(r.x, r.y) > 1.0)
        assert max(r.magnitude for r in rows) <= cap * (1 + 1e-12)

    def test_grows_towards_cone(self):
        mags = [abs(closed(1.0 + d, 1.0)) for d in (1e-1, 1e-2, 1e-3)]
        assert mags[0] < mags[1] < mags[2]
        mags = [abs(closed(1.0 - d, 1.0)) for d in (1e-1, 1e-2, 1e-3)]
        assert mags[0] < mags[1] < mags[2]

    def test_mirrored_axis(self):
        rows = propagator_grid(1.0, 2.7, 8)
        xs = sorted({r.x for r in rows})
        assert xs == [-x for x in reversed(xs)]

    def test_invalid(self):
        with pytest.raises(DomainError):
            propagator_grid(1.0, 1.0, 1)
        with pytest.raises(DomainError):
            propagator_grid(0.0, 1.0, 5)
