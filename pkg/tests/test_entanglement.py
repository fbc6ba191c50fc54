import math

import numpy as np
import pytest

from bandgauss.coefficients import METHOD_CLOSED, EnvironmentParams
from bandgauss.dynamics import (ChannelSnapshot, TwoModeGaussianState,
                                apply_channel, channel_snapshot, make_twb)
from bandgauss.entanglement import (SymplecticInvariants, find_last_upcrossing,
                                    invariants, kappa_full, kappa_full_curve,
                                    kappa_secular, kappa_secular_channel_curve,
                                    kappa_symmetric, negativity, nu_min_pt,
                                    pt_nu_min, state_kappa_curve,
                                    sudden_death_time)
from bandgauss.errors import (DomainError, NumericError, UnsupportedStateError,
                              UsageError)
from bandgauss.spectral import SpectralDensity


def narrow_env(j0=1.0, omega_lo=1.0, delta=1e-3):
    return EnvironmentParams(SpectralDensity(j0, omega_lo, delta), low_t=True)


class TestInvariants:
    def test_vacuum(self):
        inv = invariants(make_twb(0.0))
        assert (inv.i1, inv.i3) == (1.0, 0.0)
        assert inv.i4 == pytest.approx(1.0, abs=1e-14)

    def test_twb_values(self):
        for r in (0.3, 1.0, 2.0):
            inv = invariants(make_twb(r))
            assert inv.i1 == pytest.approx(math.cosh(2 * r) ** 2, rel=1e-13)
            assert inv.i3 == pytest.approx(-math.sinh(2 * r) ** 2, rel=1e-13)
            assert inv.i4 == pytest.approx(1.0, abs=1e-9 * math.cosh(2 * r) ** 2)

    def test_twb_unit_squeezing(self):
        inv = invariants(make_twb(1.0))
        assert inv.i1 == pytest.approx(14.154116418008243, rel=1e-12)
        assert inv.i3 == pytest.approx(-13.154116418008245, rel=1e-12)

    def test_rejects_asymmetric_blocks(self):
        cm = np.diag([2.0, 2.0, 3.0, 3.0])
        with pytest.raises(UnsupportedStateError):
            invariants(cm)


class TestKappaSymmetric:
    def test_vacuum_is_sqrt2(self):
        assert kappa_symmetric(invariants(make_twb(0.0))) == \
            pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_twb_closed_value(self):
        # I1 - I3 = cosh(4r), radicand = exp(-4r): kappa = sqrt(2)*exp(-2r)
        got = kappa_symmetric(invariants(make_twb(1.0)))
        assert got == pytest.approx(math.sqrt(2.0) * math.exp(-2.0), rel=1e-12)
        assert got == pytest.approx(0.19139, abs=1e-5)

    def test_inner_root_vanishing_edge(self):
        inv = SymplecticInvariants(i1=2.0, i3=-1.0, i4=9.0)
        assert kappa_symmetric(inv) == pytest.approx(math.sqrt(2.0 * 3.0), rel=1e-14)

    def test_unphysical_radicand_raises(self):
        with pytest.raises(NumericError):
            kappa_symmetric(SymplecticInvariants(i1=1.0, i3=0.0, i4=1.0 + 1e-6))

    def test_tiny_negative_radicand_clamped(self):
        kappa_symmetric(SymplecticInvariants(i1=1.0, i3=0.0, i4=1.0 + 1e-13))

    def test_stable_at_strong_squeezing(self):
        # the naive x - sqrt(x^2 - i4) form loses everything here; from exact
        # invariants the rearranged formula stays exact
        inv = SymplecticInvariants(math.cosh(20.0) ** 2,
                                   -math.sinh(20.0) ** 2, 1.0)
        got = kappa_symmetric(inv)
        assert got == pytest.approx(math.sqrt(2.0) * math.exp(-20.0), rel=1e-12)

    def test_curve_route_stable_at_strong_squeezing(self):
        # the trace evaluator carries a0 - c0 exactly, so even r = 10 starts
        # at the analytic value
        env = narrow_env(delta=0.01)
        got = state_kappa_curve(env, 10.0, np.array([0.0]), source="symmetric")
        assert got[0] == pytest.approx(math.sqrt(2.0) * math.exp(-20.0),
                                       rel=1e-12)


class TestKappaSecular:
    def test_at_zero_time(self):
        assert kappa_secular(0.9, 0.01, 1.0, 0.0) == \
            pytest.approx(0.5 * math.exp(-1.8), rel=1e-15)
        assert kappa_secular(0.9, 0.01, 1.0, 0.0) == pytest.approx(0.08264, abs=1e-5)

    def test_late_time_plateau(self):
        # tau^4 term kills the exponential: kappa -> tau^2*J0*delta/2
        got = kappa_secular(1.0, 0.01, 1.0, 10.0)
        assert got == pytest.approx(0.5 * (1.0 + math.exp(-2.0 - 1e4 * 0.01 / 6.0)),
                                    rel=1e-15)
        assert got == pytest.approx(0.5, abs=1e-8)

    def test_no_environment_is_constant(self):
        taus = np.linspace(0.0, 50.0, 7)
        np.testing.assert_array_equal(kappa_secular(0.7, 0.0, 1.0, taus),
                                      np.full(7, 0.5 * math.exp(-1.4)))

    def test_negative_parameters_rejected(self):
        with pytest.raises(DomainError):
            kappa_secular(-0.1, 0.01, 1.0, 1.0)

    def test_single_minimum_on_comparison_recipes(self):
        # the curve may rise, dip (the revival window) and rise again, but it
        # has exactly one local minimum on [0, 30] and is monotone
        # non-decreasing beyond it
        taus = np.linspace(0.0, 30.0, 3001)
        for j0_delta, omega_lo in ((1e-4, 1.0), (1e-3, 1.0), (1e-3, 3.0)):
            for r in (0.01, 0.1, 0.3, 0.5, 0.9):
                kappa = kappa_secular(r, j0_delta, omega_lo, taus)
                diffs = np.diff(kappa)
                noise = 1e-13 * np.max(np.abs(kappa))
                sign = np.sign(diffs[np.abs(diffs) > noise])
                up_turns = np.count_nonzero((sign[:-1] < 0) & (sign[1:] > 0))
                assert up_turns == 1
                argmin = int(np.argmin(kappa))
                assert np.all(diffs[argmin:] >= -noise)


class TestNuMinPt:
    def test_vacuum(self):
        assert nu_min_pt(make_twb(0.0)) == pytest.approx(1.0, abs=1e-12)

    def test_twb_spectrum(self):
        for r in (0.0, 0.1, 0.5, 1.0, 2.0):
            assert nu_min_pt(make_twb(r)) == \
                pytest.approx(math.exp(-2.0 * r), abs=1e-10)

    def test_half_squeezing(self):
        assert nu_min_pt(make_twb(0.5)) == pytest.approx(math.exp(-1.0), abs=1e-10)

    def test_agrees_with_invariant_formula_on_evolved_states(self):
        env = narrow_env()
        for tau in (0.5, 2.0, 7.0):
            state = apply_channel(make_twb(0.8),
                                  channel_snapshot(env, tau, METHOD_CLOSED))
            assert nu_min_pt(state) == \
                pytest.approx(pt_nu_min(invariants(state)), rel=1e-9)


class TestNegativity:
    def test_threshold(self):
        assert negativity(1.0) == 0.0

    def test_log_value(self):
        assert negativity(math.exp(-1.0)) == pytest.approx(2.0, rel=1e-15)

    def test_separable_branch_clamped(self):
        assert negativity(2.0) == 0.0

    def test_invalid_kappa(self):
        with pytest.raises(DomainError):
            negativity(0.0)
        with pytest.raises(DomainError):
            negativity(-0.2)

    def test_monotone_non_increasing(self):
        ks = np.linspace(0.05, 2.0, 50)
        en = negativity(ks)
        assert np.all(np.diff(en) <= 0.0)


class TestKappaFull:
    def test_coincides_with_secular_at_zero_time(self):
        env = narrow_env()
        for r in (0.0, 0.5, 0.9):
            assert kappa_full(env, r, 0.0) == \
                pytest.approx(kappa_secular(r, 1e-3, 1.0, 0.0), rel=1e-14)

    def test_channel_route_reproduces_secular_closed_form(self):
        # dropping the secular terms and using closed-form inputs must land
        # exactly on the printed closed form
        env = narrow_env()
        taus = np.linspace(0.0, 20.0, 41)
        chan = kappa_secular_channel_curve(env, 0.7, taus, METHOD_CLOSED)
        closed = kappa_secular(0.7, 1e-3, 1.0, taus)
        np.testing.assert_allclose(chan, closed, rtol=1e-13)

    def test_curve_matches_state_route(self):
        # array fast path against explicit half-scale state propagation
        env = narrow_env()
        r = 0.8
        taus = np.array([0.0, 1.0, 3.0, 7.0])
        curve = kappa_full_curve(env, r, taus, METHOD_CLOSED)
        half = TwoModeGaussianState(np.zeros(4), 0.5 * make_twb(r).cm,
                                    validate_uncertainty=False)
        for i, tau in enumerate(taus):
            snap = channel_snapshot(env, float(tau), METHOD_CLOSED)
            state = apply_channel(half, snap)
            assert curve[i] == pytest.approx(pt_nu_min(invariants(state)),
                                             rel=1e-9)

    def test_scalar_matches_curve(self):
        env = narrow_env()
        taus = np.array([0.0, 2.5, 9.0])
        curve = kappa_full_curve(env, 1.0, taus, METHOD_CLOSED)
        for i, tau in enumerate(taus):
            assert kappa_full(env, 1.0, float(tau)) == \
                pytest.approx(float(curve[i]), rel=1e-8)

    def test_free_rotation_leaves_invariants_alone(self):
        # zero-coupling snapshot: kappa of the evolved state equals its
        # initial value at any angle
        state = make_twb(0.6)
        base = kappa_symmetric(invariants(state))
        for tau in (0.7, 2.0, 11.3):
            snap = ChannelSnapshot(tau, 0.0, 0.0, (0.0, 0.0, 0.0, 0.0), tau)
            rotated = apply_channel(state, snap)
            assert kappa_symmetric(invariants(rotated)) == \
                pytest.approx(base, rel=1e-12)

    def test_oracle_source_matches_symmetric_source(self):
        env = narrow_env()
        taus = np.linspace(0.0, 5.0, 6)
        sym = state_kappa_curve(env, 0.5, taus, METHOD_CLOSED, source="symmetric")
        orc = state_kappa_curve(env, 0.5, taus, METHOD_CLOSED, source="oracle")
        np.testing.assert_allclose(sym / math.sqrt(2.0), orc, rtol=1e-9)

    def test_unknown_source_rejected(self):
        with pytest.raises(UsageError):
            state_kappa_curve(narrow_env(), 0.5, [0.0, 1.0], source="magic")


class TestSuddenDeath:
    def test_no_environment(self):
        assert sudden_death_time(1.0, 0.0, 1.0, "secular") is None

    def test_secular_baseline(self):
        # exponential already dead near the crossing: tau_SD ~ sqrt(2/(J0*delta))
        got = sudden_death_time(1.0, 0.01, 1.0, "secular")
        assert got == pytest.approx(math.sqrt(200.0), rel=0.10)

    def test_weak_dependence_on_squeezing(self):
        times = [sudden_death_time(r, 0.01, 1.0, "secular")
                 for r in (0.5, 1.0, 2.0, 10.0)]
        assert max(times) - min(times) < 0.05 * min(times)

    def test_pointwise_domination_orders_death_times(self):
        # kappa(r=2) <= kappa(r=0.5) pointwise, so death comes no sooner
        low = sudden_death_time(0.5, 0.02, 1.0, "secular")
        high = sudden_death_time(2.0, 0.02, 1.0, "secular")
        assert high >= low

    def test_full_source(self):
        got = sudden_death_time(1.0, 0.01, 1.0, "full")
        assert got == pytest.approx(math.sqrt(200.0), rel=0.10)

    def test_beyond_horizon_is_none(self):
        assert sudden_death_time(1.0, 1e-4, 1.0, "secular", tau_max=30.0) is None

    def test_unknown_source(self):
        with pytest.raises(UsageError):
            sudden_death_time(1.0, 0.01, 1.0, "closed")

    def test_bisection_tolerance(self):
        got = sudden_death_time(1.0, 0.01, 1.0, "secular", xtol=1e-6)
        assert abs(kappa_secular(1.0, 0.01, 1.0, got) - 1.0) < 2e-7

    def test_strictly_decreasing_in_bandwidth(self):
        j0_deltas = (1e-3, 10.0 ** -2.5, 1e-2, 10.0 ** -1.5, 1e-1)
        times = [sudden_death_time(1.0, jd, 1.0, "secular") for jd in j0_deltas]
        assert all(a > b for a, b in zip(times, times[1:]))


class TestBandLocationOrdering:
    def test_higher_band_location_lowers_kappa(self):
        # raising the band location only increases the damping exponent, so
        # the closed-form kappa can only drop, and the two curves meet again
        # once the exponential term is dead
        taus = np.linspace(0.0, 30.0, 301)
        for r in (0.01, 0.5, 0.9):
            low = kappa_secular(r, 1e-3, 1.0, taus)
            high = kappa_secular(r, 1e-3, 3.0, taus)
            assert np.all(high <= low + 1e-15)
            assert abs(high[-1] - low[-1]) < 1e-12


class TestLastUpcrossing:
    def test_never_below_threshold(self):
        tau = np.linspace(0.0, 10.0, 101)
        values = 1.5 + 0.1 * tau
        assert find_last_upcrossing(tau, values, 1.0, lambda t: 1.5 + 0.1 * t) is None

    def test_still_below_at_horizon(self):
        tau = np.linspace(0.0, 10.0, 101)
        values = np.full_like(tau, 0.5)
        assert find_last_upcrossing(tau, values, 1.0, lambda t: 0.5) is None

    def test_revival_dip_is_skipped(self):
        # curve crosses up, dips back below, then crosses up for good:
        # the reported time is the final crossing
        def fn(t):
            return 0.5 + 0.4 * np.sin(t) + 0.08 * t

        tau = np.linspace(0.0, 20.0, 2001)
        got = find_last_upcrossing(tau, fn(tau), 1.0, fn)
        assert got is not None
        assert fn(got) == pytest.approx(1.0, abs=1e-5)
        fine = np.linspace(got + 1e-4, 20.0, 1000)
        assert np.all(fn(fine) > 1.0)

    def test_revival_exists_before_death_at_high_band_location(self):
        # full source, band far above the mode frequency: negativity shows a
        # strictly increasing stretch before it dies
        env = narrow_env(delta=0.01, omega_lo=10.0)
        death = sudden_death_time(1.0, 0.01, 10.0, "full")
        taus = np.linspace(0.0, death * 0.999, 1500)
        kappa = kappa_full_curve(env, 1.0, taus, METHOD_CLOSED)
        e_n = np.where(kappa < 1.0, -2.0 * np.log(kappa), 0.0)
        diffs = np.diff(e_n)
        first_drop = np.argmax(diffs < 0.0)
        assert np.any(diffs[first_drop + 1:] > 1e-10)
