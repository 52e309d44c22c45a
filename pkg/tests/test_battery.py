import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fafc.battery import (DEFAULT_BATTERY, ChargeProfile, R44, R45, ProfileParams, RationalFitCoefficients, StandardPairs,
                          energy_to_soc, eval_rational_fit, fit_rmse, fit_square_errors, pairs_from_fit,
                          preferred_power, preferred_power_from_energy, profile_energy, profile_power,
                          soc_to_energy, standard_pairs, synthesize_cc_cv_profile)
from fafc.errors import ConfigError, DomainError, SingularityError

E_O = 6.3865

# exact rational evaluation of the published coefficients (50-digit oracle, frozen)
R44_AT_SOC_025 = 3.8881466444038018
R45_AT_SOC_025 = 3.9197499116831986
R44_R45_MAX_GAP = 0.23833601543343658  # over 2001 exact grid points of [0, E_o]


def test_default_battery():
    assert DEFAULT_BATTERY.capacity_mah == 1000
    assert DEFAULT_BATTERY.cv_voltage == 4.2
    assert DEFAULT_BATTERY.cc_current == 1.0
    assert DEFAULT_BATTERY.total_energy == E_O


def test_coefficients_match_table():
    assert R44.numerator == (-3.112, 1.439, 120.4, -7.452, 0.1543)
    assert R44.denominator == (1.0, -9.881, 44.84, -5.49, 0.4007)
    assert R45.numerator == (-21.65, 141.2, -11.5, 0.1526, 0.008358)
    assert R45.denominator == (1.0, -10.7, 41.01, -1.509, -0.3997, 0.0362)
    assert (len(R44.numerator), len(R44.denominator)) == (5, 5)
    assert (len(R45.numerator), len(R45.denominator)) == (5, 6)


@pytest.mark.parametrize("soc, energy", [(0.60, 3.8319), (0.0, 0.0), (1.0, E_O)])
def test_soc_to_energy(soc, energy):
    assert soc_to_energy(soc) == pytest.approx(energy, abs=1e-4)
    assert energy_to_soc(energy) == pytest.approx(soc, abs=1e-4)


@pytest.mark.parametrize("bad", [-0.01, 1.01])
def test_soc_domain(bad):
    with pytest.raises(DomainError):
        soc_to_energy(bad)
    with pytest.raises(DomainError):
        energy_to_soc(bad * E_O * 2 if bad > 0 else bad)


def test_round_trip_dense_grid():
    for s in np.linspace(0, 1, 10001):
        assert abs(energy_to_soc(soc_to_energy(float(s))) - s) < 1e-12


def test_published_point_values():
    assert eval_rational_fit(R44, 3.8319) == pytest.approx(3.8650, abs=5e-3)
    assert eval_rational_fit(R45, 3.8319) == pytest.approx(3.8712, abs=5e-3)
    assert preferred_power("R44", 0.60) == pytest.approx(3.8650, abs=5e-3)
    assert preferred_power("r45", 0.60) == pytest.approx(3.8712, abs=5e-3)


def test_against_exact_oracle():
    assert preferred_power("R44", 0.25) == pytest.approx(R44_AT_SOC_025, abs=1e-12)
    assert preferred_power("R45", 0.25) == pytest.approx(R45_AT_SOC_025, abs=1e-12)


def test_constant_term_ratio():
    fit = RationalFitCoefficients("c", (0, 0, 0, 0, 3.0), (1, 0, 0, 0, 4.0))
    assert eval_rational_fit(fit, 0.0) == 0.75


def test_singularity_raises_with_x():
    fit = RationalFitCoefficients("pole", (1.0,), (1.0, -2.0))
    with pytest.raises(SingularityError) as info:
        eval_rational_fit(fit, 2.0)
    assert info.value.x == 2.0
    with pytest.raises(SingularityError):
        eval_rational_fit(fit, np.array([0.0, 1.0, 2.0]))


def test_full_charge_requests_nothing():
    assert preferred_power("R44", 1.0) == 0.0
    assert preferred_power("R45", 1.0) == 0.0
    assert preferred_power_from_energy(R44, np.array([E_O]))[0] == 0.0


@pytest.mark.parametrize("fit", [R44, R45])
def test_fit_scan_finite_nonnegative(fit):
    x = np.linspace(0, E_O, 10_000)
    raw = eval_rational_fit(fit, x)
    assert np.all(np.isfinite(raw))
    assert np.all(preferred_power_from_energy(fit, x) >= 0)


def test_fit_agreement_bound():
    x = np.linspace(0, E_O, 10_000)
    gap = np.abs(eval_rational_fit(R44, x) - eval_rational_fit(R45, x))
    assert gap.max() < 0.25
    assert gap.max() == pytest.approx(R44_R45_MAX_GAP, abs=1e-3)


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def profile():
    return synthesize_cc_cv_profile()


def test_profile_anchors(profile):
    assert profile.time[-1] == pytest.approx(3.6)
    assert profile.current[-1] == pytest.approx(0.02, abs=1e-6)
    t_cc, t_cv, t_end = profile.boundaries
    i_cv = int(np.flatnonzero(profile.time == t_cv)[0])
    assert profile.voltage[i_cv] == pytest.approx(4.2)
    tc = profile.time < t_cc
    assert np.allclose(profile.current[tc], 0.1)
    assert np.all(profile.voltage[tc] < 3.0)
    cv = profile.time >= t_cv
    assert np.allclose(profile.voltage[cv], 4.2)


def test_profile_invariants(profile):
    assert np.all(np.diff(profile.time) > 0)
    assert np.all((profile.voltage > 0) & (profile.voltage <= 4.2 + 1e-12))
    assert np.all((profile.current >= 0.02 - 1e-12) & (profile.current <= 1.0 + 1e-12))


def test_stage_boundaries_independent_of_step():
    coarse = synthesize_cc_cv_profile(params=ProfileParams(step_hours=0.01))
    fine = synthesize_cc_cv_profile(params=ProfileParams(step_hours=0.005))
    assert coarse.boundaries == fine.boundaries


@pytest.mark.parametrize("kwargs", [dict(step_hours=0), dict(trickle_hours=-1), dict(cc_hours=0),
                                    dict(trickle_hours=2.0, cc_hours=2.0)])
def test_profile_config_errors(kwargs):
    with pytest.raises(ConfigError):
        synthesize_cc_cv_profile(params=ProfileParams(**kwargs))


def test_linear_profile_variant():
    p = synthesize_cc_cv_profile(params=ProfileParams(cc_voltage_tau_hours=None, cc_current_rise_hours=0))
    t_cc, t_cv, _ = p.boundaries
    cc = (p.time > t_cc) & (p.time < t_cv)
    assert np.allclose(p.current[cc], 1.0)
    assert np.allclose(np.diff(p.voltage[cc]) / np.diff(p.time[cc]), 1.2 / (t_cv - t_cc))


def test_profile_power_pointwise(profile):
    _, power = profile_power(profile)
    assert np.array_equal(power, profile.voltage * profile.current)
    assert np.all(power >= 0)
    two = ChargeProfile(np.array([0.0, 1.0]), np.array([4.2, 3.0]), np.array([1.0, 0.1]), (0, 0, 1))
    assert np.allclose(profile_power(two)[1], [4.2, 0.3])


def test_peak_power_at_cc_cv_boundary(profile):
    _, power = profile_power(profile)
    assert profile.time[np.argmax(power)] == pytest.approx(profile.boundaries[1])


def test_energy_rectangle():
    p = ChargeProfile(np.array([0.0, 0.5, 1.0]), np.full(3, 4.2), np.ones(3), (0.0, 0.0, 1.0))
    _, e = profile_energy(p)
    assert e[0] == 0.0
    assert e[-1] == pytest.approx(4.2)


def test_energy_monotone_and_refinement(profile):
    t, e = profile_energy(profile)
    assert e[0] == 0.0
    assert np.all(np.diff(e) >= 0)
    # independent refinement oracle: left-rectangle rule on a 100x finer synthesized grid
    fine = synthesize_cc_cv_profile(params=ProfileParams(step_hours=1e-4))
    _, p_fine = profile_power(fine)
    rect = float(np.sum(p_fine[:-1] * np.diff(fine.time)))
    assert e[-1] == pytest.approx(rect, rel=1e-3)


def test_final_energy_near_total(profile):
    _, e = profile_energy(profile)
    assert e[-1] == pytest.approx(E_O, rel=0.01)


def test_standard_pairs(profile):
    pairs = standard_pairs(profile)
    _, power = profile_power(profile)
    assert len(pairs) == len(profile)
    assert pairs.power.max() == power.max()
    assert np.all(np.diff(pairs.energy) >= 0)
    assert np.all(pairs.power >= 0)
    two = standard_pairs(ChargeProfile(np.array([0.0, 0.25]), np.full(2, 2.0), np.ones(2), (0, 0, 0.25)))
    assert np.allclose(two.energy, [0.0, 0.5])


def test_square_errors_and_rmse():
    pairs = pairs_from_fit(R44, np.linspace(0, E_O, 50))
    assert np.all(fit_square_errors(R44, pairs) == 0)
    assert fit_rmse(R44, pairs) == 0.0
    x = 3.0
    off = StandardPairs(np.array([x]), np.array([eval_rational_fit(R44, x) - 0.1]))
    assert fit_square_errors(R44, off)[0] == pytest.approx(0.01)
    two = StandardPairs(np.array([x, x]), eval_rational_fit(R44, x) - np.array([0.1, 0.2]))
    assert fit_rmse(R44, two) == pytest.approx(math.sqrt(0.025))
    with pytest.raises(DomainError):
        fit_rmse(R44, StandardPairs(np.array([]), np.array([])))


def test_default_profile_fit_quality(profile):
    pairs = standard_pairs(profile)
    for fit in (R44, R45):
        assert fit_rmse(fit, pairs) < 0.1
        assert np.max(fit_square_errors(fit, pairs)) < 0.2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, E_O), st.floats(0, 5)), min_size=1, max_size=40))
def test_rmse_metamorphic(rows):
    pairs = StandardPairs(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]))
    se = fit_square_errors(R45, pairs)
    assert fit_rmse(R45, pairs) == math.sqrt(float(np.mean(se)))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.0))
def test_preferred_power_nonnegative(soc):
    for v in ("R44", "R45"):
        assert preferred_power(v, soc) >= 0.0
