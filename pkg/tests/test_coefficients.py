"""Contraction, Lipschitz, and perturbation coefficients."""

from fractions import Fraction

import numpy as np
import pytest

from mcergo import (
    NonlinearKernelSpec,
    PerturbationTerm,
    SamplerConfig,
    c_k_bound,
    c_k_recursion_bound,
    dobrushin_kappa,
    gamma_perturbation,
    lipschitz_lambda,
    lipschitz_lambda_k_estimate,
    md_alpha_linear,
    md_alpha_nonlinear,
    rational_matrix,
)
from mcergo.errors import AssumptionViolationError
from mcergo.reference import (
    EXAMPLE1_ONE_MINUS_ALPHA_K,
    EXAMPLE2_ONE_MINUS_ALPHA_K,
    example1_base,
    example1_spec,
    example2_base,
    example2_spec,
)


def test_dobrushin_kappa_is_row_overlap():
    base = example1_base()
    # rows 1 and 3: min mass 0.2 + 0.1 + 0.2 + 0.1
    assert dobrushin_kappa(base, 1, 3) == Fraction(3, 5)
    assert dobrushin_kappa(base, 0, 0) == 1


def test_alpha_linear_one_step_example1():
    cert = md_alpha_linear(example1_base())
    assert cert.value == Fraction(3, 5)
    assert cert.achieved_at == (1, 3)
    assert cert.exact


@pytest.mark.parametrize("k,complement", sorted(EXAMPLE1_ONE_MINUS_ALPHA_K.items()))
def test_alpha_linear_k_step_example1(k, complement):
    cert = md_alpha_linear(example1_base(), k)
    assert 1 - cert.value == complement


@pytest.mark.parametrize("k,complement", sorted(EXAMPLE2_ONE_MINUS_ALPHA_K.items()))
def test_alpha_linear_k_step_example2(k, complement):
    cert = md_alpha_linear(example2_base(), k)
    assert 1 - cert.value == complement


def test_alpha_nonlinear_example1_is_exact():
    # perturbations touch row 0 only; the minimizing pair (1, 3) is untouched
    cert = md_alpha_nonlinear(example1_spec(Fraction(1, 10)))
    np.testing.assert_allclose(float(cert.value), 0.6, atol=1e-12)
    assert cert.exact
    assert cert.samples is not None


def test_alpha_nonlinear_example2_is_conservative():
    # every row carries a perturbation, so the grid value is a sampled infimum
    cert = md_alpha_nonlinear(example2_spec(Fraction(1, 10)))
    np.testing.assert_allclose(float(cert.value), 0.6, atol=1e-12)
    assert not cert.exact


def test_alpha_nonlinear_reproducible():
    config = SamplerConfig(samples=64, seed=9)
    a = md_alpha_nonlinear(example1_spec(0.2), config=config)
    b = md_alpha_nonlinear(example1_spec(0.2), config=config)
    assert a.value == b.value and a.achieved_at == b.achieved_at


@pytest.mark.parametrize("kappa", [Fraction(1, 100), Fraction(1, 10), Fraction(29, 100)])
def test_lipschitz_lambda_equals_kappa_example1(kappa):
    cert = lipschitz_lambda(example1_spec(kappa))
    assert cert.value == kappa
    assert cert.exact


@pytest.mark.parametrize("kappa", [Fraction(1, 20), Fraction(1, 10)])
def test_lipschitz_lambda_equals_kappa_example2(kappa):
    assert lipschitz_lambda(example2_spec(kappa)).value == kappa


def test_lipschitz_lambda_zero_without_perturbations():
    spec = NonlinearKernelSpec(example1_base(), (), {})
    assert lipschitz_lambda(spec).value == 0


def test_lambda_k_estimate_matches_exact_at_one_step():
    spec = example1_spec(Fraction(1, 10))
    est = lipschitz_lambda_k_estimate(spec, 1)
    assert not est.exact
    np.testing.assert_allclose(float(est.value), 0.1, atol=1e-12)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_lambda_k_estimate_sits_below_certified_ceiling(k):
    spec = example1_spec(Fraction(1, 10))
    est = lipschitz_lambda_k_estimate(spec, k)
    assert float(est.value) <= c_k_bound(k) * 0.1 + 1e-12


def test_c_k_bound_values():
    assert [c_k_bound(k) for k in range(1, 5)] == [6, 26, 106, 426]


def test_c_k_recursion_bound_values():
    # the recursion-tight sequence starts at 1 and lags the closed form by one index
    assert [c_k_recursion_bound(k) for k in range(1, 5)] == [1, 6, 26, 106]
    assert all(c_k_recursion_bound(k) <= c_k_bound(k) for k in range(1, 10))


def test_c_k_bound_rejects_nonpositive():
    with pytest.raises(ValueError):
        c_k_bound(0)


@pytest.mark.parametrize(
    "kappa,expected",
    [
        (Fraction(1, 100), Fraction(1, 39)),
        (Fraction(1, 20), Fraction(1, 7)),
        (Fraction(1, 10), Fraction(1, 3)),
        (Fraction(29, 100), Fraction(29, 11)),
    ],
)
def test_gamma_example1(kappa, expected):
    cert = gamma_perturbation(example1_spec(kappa))
    assert cert.value == expected
    assert cert.exact


@pytest.mark.parametrize(
    "kappa,expected",
    [(Fraction(1, 20), Fraction(1, 5)), (Fraction(1, 10), Fraction(1, 2))],
)
def test_gamma_example2(kappa, expected):
    assert gamma_perturbation(example2_spec(kappa)).value == expected


def test_gamma_zero_for_linear_chain():
    spec = NonlinearKernelSpec(example1_base(), (), {})
    assert gamma_perturbation(spec).value == 0


def test_gamma_rejects_support_mismatch():
    # at the vertex law on state 0 the (0, 1) entry collapses to zero mass
    base = rational_matrix([["1/2", "1/2"], ["1/2", "1/2"]])
    spec = NonlinearKernelSpec(
        base,
        (PerturbationTerm(0, 0, 0, 0.5), PerturbationTerm(0, 1, 0, -0.5)),
        {},
    )
    with pytest.raises(AssumptionViolationError):
        gamma_perturbation(spec)
