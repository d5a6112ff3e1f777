"""Decay curves, theorem constants, and the certification pipeline."""

import math
from fractions import Fraction

import numpy as np
import pytest

from mcergo import (
    Distribution,
    NonlinearKernelSpec,
    PerturbationTerm,
    SamplerConfig,
    butkovsky_bound,
    c_k_bound,
    density_ratio_trajectory,
    dirac,
    empirical_decay_rate,
    evaluate,
    flow,
    gamma_perturbation,
    gamma_threshold,
    linear_power,
    lipschitz_lambda,
    n_delta_surrogate,
    perturbation_bound,
    rate_comparison,
    rational_matrix,
    sample_simplex,
    shchegolev_bound,
    theorem_constant,
    tv_decay,
    tv_distance,
    verify_main_bound,
)
from mcergo.errors import SearchFailedError, UndefinedRatioError
from mcergo.reference import (
    EXAMPLE1_GAMMA_THRESHOLD_005,
    EXAMPLE1_GAMMA_THRESHOLD_TOL,
    EXAMPLE1_N_DELTA_005,
    EXAMPLE1_ONE_MINUS_ALPHA_K,
    EXAMPLE1_RADIUS,
    EXAMPLE1_TV_DECAY_K01,
    example1_base,
    example1_spec,
    example2_base,
    example2_spec,
)


def exact_dirac(i: int, n: int) -> Distribution:
    return Distribution(np.array([Fraction(int(j == i)) for j in range(n)], dtype=object))


def test_tv_decay_starts_at_full_separation():
    curve = tv_decay(example1_spec(0.1), dirac(0, 4), dirac(1, 4), 1)
    assert curve[0] == 2.0
    assert curve[1] == pytest.approx(0.4, abs=1e-12)


@pytest.mark.parametrize("n,expected", sorted(EXAMPLE1_TV_DECAY_K01.items()))
def test_tv_decay_frozen_values(n, expected):
    spec = example1_spec(Fraction(1, 10))
    laws_mu = flow(spec, exact_dirac(0, 4), n)
    laws_nu = flow(spec, exact_dirac(1, 4), n)
    assert tv_distance(laws_mu[n], laws_nu[n]) == expected
    # the float route agrees to near machine precision
    curve = tv_decay(example1_spec(0.1), dirac(0, 4), dirac(1, 4), n)
    assert curve[n] == pytest.approx(float(expected), abs=1e-12)


def test_tv_decay_reaches_float_noise_by_horizon_fifty():
    # the true value (~ 2 C r^50 ~ 1e-22) is below the float noise floor
    curve = tv_decay(example1_spec(0.01), dirac(0, 4), dirac(1, 4), 50)
    assert 0.0 <= curve[50] < 1e-12


def test_empirical_decay_rate_reads_one_step():
    assert empirical_decay_rate([1.0, 0.5]) == pytest.approx(math.log(0.5))


def test_empirical_decay_rate_skips_underflowed_tail():
    curve = [2.0, 0.5, 1e-13]
    assert empirical_decay_rate(curve) == pytest.approx(math.log(0.5))


def test_empirical_decay_rate_without_signal():
    assert empirical_decay_rate([2.0, 0.0, 0.0]) is None
    assert empirical_decay_rate([2.0]) is None


def test_butkovsky_bound_values():
    assert butkovsky_bound(0.75, 0.0, 0) == 2.0
    assert butkovsky_bound(0.75, 0.0, 1) == pytest.approx(0.5)
    assert butkovsky_bound(0.75, 0.0, 5) == pytest.approx(0.001953125)
    assert butkovsky_bound(0.6, 0.1, 2) == pytest.approx(0.5)


def test_butkovsky_bound_envelopes_example_flows():
    for spec, states in ((example1_spec(0.01), 4), (example2_spec(0.01), 6)):
        curve = tv_decay(spec, dirac(0, states), dirac(1, states), 30)
        alpha = 0.6
        lam = 0.01
        for n, tv in enumerate(curve):
            assert tv <= butkovsky_bound(alpha, lam, n) * (1 + 1e-9)


def test_shchegolev_bound_values():
    assert shchegolev_bound(0.9, 0.1, 6, 2, 5) == pytest.approx(0.24)
    assert shchegolev_bound(0.9, 0.1, 6, 2, 1) == 6.0
    with pytest.raises(ValueError):
        shchegolev_bound(0.9, 0.1, 6, 0, 5)


def test_shchegolev_bound_envelopes_example1_flow():
    # k = 2 envelope with the exact two-step coefficients
    spec = example1_spec(0.01)
    alpha_2 = 1 - float(EXAMPLE1_ONE_MINUS_ALPHA_K[2])
    lambda_2 = c_k_bound(2) * 0.01
    curve = tv_decay(spec, dirac(0, 4), dirac(1, 4), 30)
    for n, tv in enumerate(curve):
        assert tv <= shchegolev_bound(alpha_2, lambda_2, c_k_bound(2), 2, n) * (1 + 1e-9)


def test_perturbation_bound_hand_values():
    pb = perturbation_bound(0.01, 1)
    assert pb.exact_form == pytest.approx(0.2835489375751565, abs=1e-12)
    assert pb.small_gamma_form == pytest.approx(2 * math.sqrt(0.03), abs=1e-12)
    assert pb.small_gamma_valid


def test_perturbation_bound_small_gamma_regime_ends():
    pb = perturbation_bound(1 / 3, 5)
    assert not pb.small_gamma_valid
    assert pb.exact_form > pb.small_gamma_form


def test_perturbation_bound_degenerate_and_invalid():
    pb = perturbation_bound(0.0, 3)
    assert pb.exact_form == 0.0 and pb.small_gamma_valid
    with pytest.raises(ValueError):
        perturbation_bound(-0.1, 1)
    with pytest.raises(ValueError):
        perturbation_bound(0.1, 0)


def test_perturbation_bound_envelopes_sampled_flows():
    # nonlinear flow against its base chain from 20 random starts
    spec = example1_spec(0.01)
    gamma = float(gamma_perturbation(spec).value)
    base = np.asarray(example1_base().entries, dtype=float)
    rng = np.random.default_rng(37)
    for _ in range(20):
        mu0 = sample_simplex(4, rng)
        laws = flow(spec, mu0, 10)
        linear = np.asarray(mu0.probs, dtype=float)
        for n in range(1, 11):
            linear = linear @ base
            tv = float(tv_distance(laws[n], Distribution(linear)))
            assert tv <= perturbation_bound(gamma, n).exact_form * (1 + 1e-9)


def test_n_delta_for_example1():
    assert n_delta_surrogate(example1_base(), 0.05) == EXAMPLE1_N_DELTA_005


def test_n_delta_for_immediately_coupling_kernel():
    flat = rational_matrix([["1/2", "1/2"], ["1/2", "1/2"]])
    assert n_delta_surrogate(flat, 0.05) == 1


def test_n_delta_rejects_non_decaying_target():
    with pytest.raises(ValueError):
        n_delta_surrogate(example1_base(), 0.7)
    with pytest.raises(ValueError):
        n_delta_surrogate(example1_base(), 0.0)


def test_n_delta_gives_up_past_the_cap():
    with pytest.raises(SearchFailedError):
        n_delta_surrogate(example1_base(), 1e-9, n_cap=500)


def test_gamma_threshold_hand_value():
    assert gamma_threshold(0.25, 1, 0.0) == pytest.approx(1 / 192, abs=1e-15)


def test_gamma_threshold_for_example1():
    value = gamma_threshold(0.05, EXAMPLE1_N_DELTA_005, EXAMPLE1_RADIUS)
    assert value == pytest.approx(EXAMPLE1_GAMMA_THRESHOLD_005, abs=EXAMPLE1_GAMMA_THRESHOLD_TOL)


def test_gamma_threshold_rejects_weak_decay():
    with pytest.raises(ValueError):
        gamma_threshold(0.25, 1, 0.3)
    with pytest.raises(ValueError):
        gamma_threshold(0.05, 0, 0.3)


def test_theorem_constant_values():
    assert theorem_constant(example1_spec(0.1), 1) == pytest.approx(1.1, abs=1e-12)
    assert theorem_constant(example1_spec(0.01), 3) == pytest.approx(2.06, abs=1e-12)
    assert theorem_constant(example1_spec(0.01), 1) == pytest.approx(1.01, abs=1e-12)
    linear = NonlinearKernelSpec(example1_base(), (), {})
    assert theorem_constant(linear, 4) == 1.0


def test_theorem_constant_honors_tighter_upper_bounds():
    spec = example1_spec(0.01)
    got = theorem_constant(spec, 2, lambda_upper={1: 0.01, 2: 0.0})
    assert got == pytest.approx(1.01, abs=1e-15)


def test_density_ratio_is_one_for_the_base_chain():
    linear = NonlinearKernelSpec(example1_base(), (), {})
    assert density_ratio_trajectory(linear, [0, 3, 2, 1], dirac(0, 4)) == pytest.approx(1.0)


def test_density_ratio_hand_value():
    # first transition 0 -> 0 has base mass 0.4 and perturbed mass 0.3
    spec = example1_spec(0.1)
    ratio = density_ratio_trajectory(spec, [0, 0], dirac(0, 4))
    assert ratio == pytest.approx(4 / 3, abs=1e-12)
    assert density_ratio_trajectory(spec, [0], dirac(0, 4)) == 1.0


def test_density_ratio_expectation_is_one():
    # summing nonlinear path mass times ratio over all paths recovers 1
    spec = example1_spec(0.2)
    mu0 = dirac(0, 4)
    laws = flow(spec, mu0, 2)
    p0 = np.asarray(evaluate(spec, laws[0]).entries, dtype=float)
    p1 = np.asarray(evaluate(spec, laws[1]).entries, dtype=float)
    total = 0.0
    for x1 in range(4):
        for x2 in range(4):
            mass = p0[0, x1] * p1[x1, x2]
            total += mass * density_ratio_trajectory(spec, [0, x1, x2], mu0)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_density_ratio_bounded_by_gamma_envelope():
    spec = example1_spec(0.29)
    gamma = float(gamma_perturbation(spec).value)
    rng = np.random.default_rng(6)
    for _ in range(100):
        path = list(rng.integers(0, 4, size=5))
        ratio = density_ratio_trajectory(spec, path, dirac(0, 4))
        assert ratio <= (1 + gamma) ** 4 * (1 + 1e-12)


def test_density_ratio_rejects_zero_mass_transitions():
    base = rational_matrix([["1", "0"], ["1/2", "1/2"]])
    spec = NonlinearKernelSpec(base, (), {})
    with pytest.raises(UndefinedRatioError):
        density_ratio_trajectory(spec, [0, 1], dirac(0, 2))


def test_density_ratio_validates_trajectory():
    spec = example1_spec(0.1)
    with pytest.raises(ValueError):
        density_ratio_trajectory(spec, [], dirac(0, 4))
    with pytest.raises(IndexError):
        density_ratio_trajectory(spec, [0, 4], dirac(0, 4))


def test_rate_comparison_table_example1():
    rows = rate_comparison(example1_base(), 5)
    assert [row.k for row in rows] == [1, 2, 3, 4, 5]
    for row in rows:
        assert row.one_minus_alpha == pytest.approx(
            float(EXAMPLE1_ONE_MINUS_ALPHA_K[row.k]), abs=1e-12
        )
        assert row.radius_power == pytest.approx(EXAMPLE1_RADIUS**row.k, abs=1e-9)
        assert row.strictly_smaller
    with pytest.raises(ValueError):
        rate_comparison(example1_base(), 0)


def test_one_step_flow_expansion_is_lipschitz_controlled():
    # tv after one step grows by at most (1 + lambda)
    spec = example1_spec(0.29)
    lam = float(lipschitz_lambda(spec).value)
    rng = np.random.default_rng(13)
    for _ in range(200):
        mu, nu = sample_simplex(4, rng), sample_simplex(4, rng)
        before = float(tv_distance(mu, nu))
        after = float(tv_distance(flow(spec, mu, 1)[1], flow(spec, nu, 1)[1]))
        assert after <= (1 + lam) * before + 1e-12


def test_verify_certifies_example1_at_small_kappa():
    report = verify_main_bound(example1_spec(0.01), 0.05, dirac(0, 4), dirac(1, 4), 50)
    assert report.hypotheses_met
    assert report.n_delta == EXAMPLE1_N_DELTA_005
    assert report.big_c == pytest.approx(1.01, abs=1e-12)
    assert report.all_bounds_hold
    assert report.holds_from == 0
    assert all(check.holds for check in report.perturbation_checks)
    assert not report.gamma_meets_threshold  # strict threshold is far tighter
    assert not report.equality_rate_case
    assert report.radius == pytest.approx(EXAMPLE1_RADIUS, abs=1e-9)
    assert len(report.tv_curve) == 51


def test_verify_flags_example1_at_large_kappa():
    report = verify_main_bound(example1_spec(0.29), 0.05, dirac(0, 4), dirac(1, 4), 20)
    assert not report.hypotheses_met
    assert any("gamma" in note for note in report.hypotheses_notes)
    assert any("Lipschitz" in note for note in report.hypotheses_notes)
    # diagnostics are still computed for the report
    assert report.gamma == pytest.approx(29 / 11, abs=1e-12)
    assert len(report.tv_curve) == 21
    assert report.bound_checks


def test_verify_handles_the_linear_chain():
    linear = NonlinearKernelSpec(example1_base(), (), {})
    report = verify_main_bound(linear, 0.05, dirac(0, 4), dirac(1, 4), 200)
    assert report.hypotheses_met
    assert report.gamma == 0.0
    assert report.big_c == 1.0
    assert all(check.holds for check in report.bound_checks if check.n >= report.n_delta)
    # the empirical slope approaches log r from above at the readable horizon
    assert report.empirical_rate <= report.log_radius + 0.05


def test_verify_reports_equality_case():
    base = rational_matrix([["0.7", "0.3"], ["0.3", "0.7"]])
    spec = NonlinearKernelSpec(
        base, (PerturbationTerm(0, 0, 0, -0.6), PerturbationTerm(0, 1, 0, 0.6)), {}
    )
    report = verify_main_bound(spec, 0.05, dirac(0, 2), dirac(1, 2), 10)
    assert report.equality_rate_case
    assert any("equality case" in note for note in report.hypotheses_notes)


def test_verify_is_deterministic():
    cfg = SamplerConfig(samples=50, seed=4)
    a = verify_main_bound(example1_spec(0.05), 0.05, dirac(0, 4), dirac(1, 4), 15, sampler=cfg)
    b = verify_main_bound(example1_spec(0.05), 0.05, dirac(0, 4), dirac(1, 4), 15, sampler=cfg)
    assert a.tv_curve == b.tv_curve
    assert a.alpha_nonlinear == b.alpha_nonlinear
    assert a.empirical_rate == b.empirical_rate
    assert [c.holds for c in a.bound_checks] == [c.holds for c in b.bound_checks]


def test_verify_validates_inputs():
    spec = example1_spec(0.01)
    with pytest.raises(ValueError):
        verify_main_bound(spec, 0.0, dirac(0, 4), dirac(1, 4), 10)
    with pytest.raises(ValueError):
        verify_main_bound(spec, 0.05, dirac(0, 4), dirac(1, 4), -1)


def test_verify_linear_power_consistency():
    # the uncoupled curve in the report matches the standalone exact values
    report = verify_main_bound(example1_spec(0.0), 0.05, dirac(0, 4), dirac(1, 4), 10)
    assert linear_power(example1_base(), 0).entries[0, 0] == 1
    assert report.uncoupled_curve[1] == pytest.approx(0.2, abs=1e-12)
