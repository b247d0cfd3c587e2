import math

import numpy as np
import pytest

from iongradim.constants import Vec3, constants
from iongradim.errors import ConfigurationError, InfeasibleError
from iongradim.estimation import (ExperimentPlan, NoiseModel, analytic_snr,
                                  dephasing_contrast, parity_estimate,
                                  required_shots, simulate_shots,
                                  spin_discrimination_snr)
from iongradim.protocol import BELL, ZeemanConfig, prepare_probe

C = constants()
ZEE = ZeemanConfig(g_factor=2.002)
COEFF = ZEE.g_factor * C.bohr_magneton / C.reduced_planck
SPACING = 1.03e-6


def pair_probe(contrast=1.0):
    return prepare_probe(BELL, (Vec3(0, 0, 0.0), Vec3(0, 0, SPACING)), contrast)


def plan(shots=100, t=0.0, bias=math.pi / 2, seed=0):
    return ExperimentPlan(shots=shots, interaction_time=t, bias_phase=bias, rng_seed=seed)


def fields_for_phase(phi, t):
    """Fields giving accumulated phase phi after time t (first-ion weight +1)."""
    return (phi / (COEFF * t), 0.0)


# ---------------------------------------------------------------------------
# simulate_shots basics

def test_deterministic_given_seed():
    p = pair_probe()
    noise = NoiseModel(gradient_rms=1e-7)
    a = simulate_shots(plan(shots=500, t=5.0, seed=99), p, ZEE, (0.0, 6.8e-13), noise)
    b = simulate_shots(plan(shots=500, t=5.0, seed=99), p, ZEE, (0.0, 6.8e-13), noise)
    assert np.array_equal(a.parities, b.parities)
    assert np.array_equal(a.outcome_indices, b.outcome_indices)
    assert np.array_equal(a.phases, b.phases)
    c = simulate_shots(plan(shots=500, t=5.0, seed=100), p, ZEE, (0.0, 6.8e-13), noise)
    assert not np.array_equal(a.parities, c.parities)


def test_all_even_at_zero_total_phase():
    p = pair_probe(contrast=1.0)
    out = simulate_shots(plan(shots=200, t=0.0, bias=0.0), p, ZEE, (0.0, 0.0), NoiseModel())
    assert np.all(out.parities == 1)
    # Bell even patterns are up-up (0) and down-down (3), roughly equally likely
    values = set(np.unique(out.outcome_indices))
    assert values <= {0, 3}
    assert len(values) == 2


def test_common_mode_noise_changes_nothing_exactly():
    p = pair_probe()
    fields = (0.0, 6.8e-13)
    quiet = NoiseModel(common_mode_rms=0.0, gradient_rms=0.0)
    loud = NoiseModel(common_mode_rms=1e-6, gradient_rms=0.0)
    a = simulate_shots(plan(shots=1000, t=5.0, seed=7), p, ZEE, fields, quiet)
    b = simulate_shots(plan(shots=1000, t=5.0, seed=7), p, ZEE, fields, loud)
    assert np.array_equal(a.parities, b.parities)
    assert np.array_equal(a.outcome_indices, b.outcome_indices)
    assert np.array_equal(a.phases, b.phases)


def test_common_mode_noise_accumulates_zero_phase():
    p = pair_probe()
    loud = NoiseModel(common_mode_rms=1e-6)
    out = simulate_shots(plan(shots=1000, t=5.0, seed=3), p, ZEE, (0.0, 0.0), loud)
    assert np.all(out.phases == 0.0)


def test_gradient_noise_dephases_to_predicted_contrast():
    # mean parity over many shots equals exp(-sigma^2/2) within sampling error
    p = pair_probe()
    t, g_rms = 5.0, 9e-7
    noise = NoiseModel(gradient_rms=g_rms)
    out = simulate_shots(plan(shots=40000, t=t, bias=0.0, seed=11), p, ZEE, (0.0, 0.0), noise)
    predicted = dephasing_contrast(g_rms, p, ZEE, t)
    measured = float(np.mean(out.parities))
    assert 0.5 < predicted < 0.95   # regime check: real dephasing, not saturation
    assert measured == pytest.approx(predicted, abs=4.0 / math.sqrt(40000))


def test_shots_depend_only_on_seed_and_index():
    # counter-based streams: a prefix of a longer run is bit-identical, so
    # shots can be evaluated in any order or in parallel without changing
    # the result
    p = pair_probe()
    noise = NoiseModel(gradient_rms=2e-7, common_mode_rms=1e-9)
    fields = (0.0, 6.8e-13)
    long = simulate_shots(plan(shots=400, t=5.0, seed=13), p, ZEE, fields, noise)
    short = simulate_shots(plan(shots=150, t=5.0, seed=13), p, ZEE, fields, noise)
    assert np.array_equal(long.parities[:150], short.parities)
    assert np.array_equal(long.phases[:150], short.phases)
    assert np.array_equal(long.outcome_indices[:150], short.outcome_indices)


def test_field_count_mismatch():
    with pytest.raises(ConfigurationError):
        simulate_shots(plan(shots=10), pair_probe(), ZEE, (0.0,), NoiseModel())


def test_plan_and_noise_validation():
    with pytest.raises(ConfigurationError):
        ExperimentPlan(shots=0, interaction_time=1.0)
    with pytest.raises(ConfigurationError):
        ExperimentPlan(shots=10, interaction_time=-1.0)
    with pytest.raises(ConfigurationError):
        ExperimentPlan(shots=10, interaction_time=1.0, rng_seed=2 ** 64)
    with pytest.raises(ConfigurationError):
        NoiseModel(common_mode_rms=-1e-9)
    with pytest.raises(ConfigurationError):
        NoiseModel(contrast=1.5)


# ---------------------------------------------------------------------------
# parity_estimate

def test_parity_estimate_examples():
    all_even = parity_estimate(np.ones(50, dtype=int))
    assert all_even.parity_estimate == 1.0
    assert all_even.std_error == pytest.approx(3.0 / 50)   # rule-of-three guard
    balanced = parity_estimate(np.array([1] * 50 + [-1] * 50))
    assert balanced.parity_estimate == 0.0
    assert balanced.std_error == pytest.approx(0.1)
    assert balanced.shots_used == 100


def test_parity_estimate_empty_rejected():
    with pytest.raises(ConfigurationError):
        parity_estimate(np.array([], dtype=int))


@pytest.fixture(scope="module")
def estimates_at_zero_parity():
    """10^4 seeded runs of 100 shots at true parity 0."""
    p = pair_probe()
    noise = NoiseModel()
    fields = (0.0, 0.0)
    values = np.empty((10000, 2))
    for k in range(10000):
        out = simulate_shots(plan(shots=100, seed=k), p, ZEE, fields, noise)
        est = parity_estimate(out)
        values[k] = (est.parity_estimate, est.std_error)
    return values


def test_projection_noise_std_at_zero_parity(estimates_at_zero_parity):
    std = float(np.std(estimates_at_zero_parity[:, 0]))
    assert std == pytest.approx(0.1, rel=0.05)


def test_estimator_consistency(estimates_at_zero_parity):
    p_hat = estimates_at_zero_parity[:, 0]
    std_err = estimates_at_zero_parity[:, 1]
    covered = np.abs(p_hat - 0.0) < 5.0 * std_err
    assert covered.mean() >= 0.99


def test_shot_variance_matches_binomial_law(estimates_at_zero_parity):
    runs = len(estimates_at_zero_parity)
    variance = float(np.var(estimates_at_zero_parity[:, 0]))
    expected = 0.01                       # (1 - P^2)/N at P = 0, N = 100
    tolerance = 3.0 * expected * math.sqrt(2.0 / runs)
    assert abs(variance - expected) < tolerance


# ---------------------------------------------------------------------------
# spin discrimination

def symmetric_arms(phi):
    """Field configs placing the two hypotheses at parity +-sin(phi) (bias pi/2)."""
    t = 5.0
    return fields_for_phase(-phi, t), fields_for_phase(phi, t), t


def test_snr_scales_with_sqrt_shots():
    # asymptotic regime: estimator bias is O(1/N), so the x4 -> x2 law is clean
    up, down, t = symmetric_arms(math.asin(0.2))
    p = pair_probe()
    noise = NoiseModel()
    medians = []
    for shots in (400, 1600):
        snrs = [spin_discrimination_snr(plan(shots=shots, t=t, seed=s), p, ZEE,
                                        up, down, noise).snr
                for s in range(201)]
        medians.append(float(np.median(snrs)))
    assert medians[1] / medians[0] == pytest.approx(2.0, rel=0.1)


def test_monte_carlo_matches_analytic_at_large_n():
    phi = math.asin(0.3)
    up, down, t = symmetric_arms(phi)
    p = pair_probe()
    snrs = [spin_discrimination_snr(plan(shots=100, t=t, seed=s), p, ZEE,
                                    up, down, NoiseModel()).snr
            for s in range(201)]
    expected = analytic_snr(100, 2.0 * math.sin(phi))
    assert float(np.median(snrs)) == pytest.approx(expected, rel=0.15)


def test_identical_hypotheses_have_no_detectable_difference():
    p = pair_probe()
    fields = (0.0, 6.8e-13)
    diffs = []
    for shots in (100, 1600):
        runs = [spin_discrimination_snr(plan(shots=shots, t=5.0, seed=s), p, ZEE,
                                        fields, fields, NoiseModel())
                for s in range(101)]
        diffs.append(float(np.median([abs(r.down.parity_estimate
                                          - r.up.parity_estimate) for r in runs])))
    assert diffs[1] < diffs[0] < 0.3      # estimated difference shrinks toward 0
    assert analytic_snr(10 ** 6, 0.0) == 0.0


def test_arms_use_independent_substreams():
    p = pair_probe()
    result = spin_discrimination_snr(plan(shots=50, t=5.0, seed=5), p, ZEE,
                                     (0.0, 0.0), (0.0, 0.0), NoiseModel())
    assert result.up.parity_estimate != result.down.parity_estimate


# ---------------------------------------------------------------------------
# required_shots

def test_required_shots_full_contrast_flip():
    # P = +-1 exactly: the rule-of-three guard governs, N sqrt(2)/3 >= target
    assert required_shots(2.0, 2.0) == 5
    assert analytic_snr(5, 2.0) >= 2.0 > analytic_snr(4, 2.0)


def test_required_shots_published_ten_repetition_claim():
    # the published claim is an upper bound: 10 repetitions suffice for SNR 2
    assert analytic_snr(10, 1.14) >= 2.0
    assert required_shots(2.0, 1.14) <= 10


def test_required_shots_quadratic_in_target():
    n1 = required_shots(2.0, 0.05)
    n2 = required_shots(4.0, 0.05)
    assert n1 == 3198   # frozen from the closed form 2 t^2 (1 - p^2) / s^2
    assert abs(n2 - 4 * n1) <= 1


def test_required_shots_monotone_in_swing():
    values = [required_shots(2.0, s) for s in (0.1, 0.3, 0.6, 1.0, 1.5)]
    assert values == sorted(values, reverse=True)


def test_required_shots_meets_target_minimally():
    for swing in (0.2, 0.7, 1.3, 1.9):
        n = required_shots(3.0, swing)
        assert analytic_snr(n, swing) >= 3.0
        if n > 1:
            assert analytic_snr(n - 1, swing) < 3.0


def test_required_shots_errors():
    with pytest.raises(InfeasibleError):
        required_shots(2.0, 0.0)
    with pytest.raises(ConfigurationError):
        required_shots(2.0, 2.5)
    with pytest.raises(ConfigurationError):
        required_shots(0.0, 1.0)


# ---------------------------------------------------------------------------
# dephasing_contrast

def test_dephasing_contrast_zero_noise():
    assert dephasing_contrast(0.0, pair_probe(), ZEE, 5.0) == 1.0


def test_dephasing_contrast_unit_phase_spread():
    g_rms = 1.0 / (COEFF * SPACING * 5.0)
    assert dephasing_contrast(g_rms, pair_probe(), ZEE, 5.0) == pytest.approx(
        math.exp(-0.5), rel=1e-12)


def test_dephasing_contrast_published_gradient_bound():
    # hand evaluation of g mu_B (1e-13 T/um * 1.03 um) t / hbar at t = 5 s
    zee = ZeemanConfig(g_factor=constants().ca40_g_factor)
    coeff = zee.g_factor * C.bohr_magneton / C.reduced_planck
    sigma = coeff * (1e-7 * SPACING) * 5.0
    expected = math.exp(-0.5 * sigma * sigma)
    value = dephasing_contrast(1e-7, pair_probe(), zee, 5.0)
    assert value == pytest.approx(expected, rel=1e-12)
    assert value == pytest.approx(0.995896879753, abs=1e-9)


def test_dephasing_contrast_rejects_negative_inputs():
    with pytest.raises(ConfigurationError):
        dephasing_contrast(-1e-9, pair_probe(), ZEE, 1.0)
    with pytest.raises(ConfigurationError):
        dephasing_contrast(1e-9, pair_probe(), ZEE, -1.0)
