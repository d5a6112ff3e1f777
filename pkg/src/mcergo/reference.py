"""Bundled example systems and their frozen expected values.

Two worked examples ship with the package: a 4-state chain with a single
perturbed row and a 6-state band chain with every row perturbed.  Alongside
the builders live the values the reproduction gate checks against: the exact
12x12 pair operator of the first example, both eigenvalue lists, the exact
overlap complements 1 - alpha_k for k = 1..5, and regression values frozen
from oracle runs of this code base.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .kernels import NonlinearKernelSpec, PerturbationTerm, StochasticMatrix, rational_matrix

EXAMPLE1_BASE_ROWS = (
    ("0.4", "0.2", "0.2", "0.2"),
    ("0.3", "0.4", "0.2", "0.1"),
    ("0.2", "0.2", "0.4", "0.2"),
    ("0.2", "0.1", "0.2", "0.5"),
)

EXAMPLE2_BASE_ROWS = (
    ("0.4", "0.2", "0.1", "0.1", "0.1", "0.1"),
    ("0.2", "0.3", "0.2", "0.1", "0.1", "0.1"),
    ("0.1", "0.2", "0.3", "0.2", "0.1", "0.1"),
    ("0.1", "0.1", "0.2", "0.3", "0.2", "0.1"),
    ("0.1", "0.1", "0.1", "0.2", "0.3", "0.2"),
    ("0.1", "0.1", "0.1", "0.1", "0.2", "0.4"),
)

# Expected pair operator of example 1 on ordered off-diagonal pairs in
# lexicographic row-major order: (1,2), (1,3), (1,4), (2,1), ... 1-based.
EXAMPLE1_V_HAT_ROWS = (
    ("1/10", "0", "0", "0", "0", "0", "0", "0", "0", "0", "1/10", "0"),
    ("0", "1/5", "0", "0", "0", "0", "0", "0", "0", "0", "0", "0"),
    ("0", "0", "1/5", "0", "0", "1/10", "0", "0", "0", "0", "0", "0"),
    ("0", "0", "0", "1/10", "0", "1/10", "0", "0", "0", "0", "0", "0"),
    ("0", "1/15", "1/30", "0", "2/15", "1/15", "0", "0", "0", "0", "0", "0"),
    ("0", "0", "1/10", "0", "0", "3/10", "0", "0", "0", "0", "0", "0"),
    ("0", "0", "0", "0", "0", "0", "1/5", "0", "0", "0", "0", "0"),
    ("0", "0", "0", "0", "0", "0", "1/15", "2/15", "0", "1/30", "1/15", "0"),
    ("0", "0", "0", "0", "0", "1/10", "0", "0", "1/5", "0", "0", "0"),
    ("0", "0", "0", "0", "0", "0", "0", "0", "0", "1/5", "1/10", "0"),
    ("0", "0", "0", "0", "0", "0", "0", "0", "0", "1/10", "3/10", "0"),
    ("0", "0", "0", "0", "0", "0", "0", "0", "0", "0", "1/10", "1/5"),
)

# Closed-form spectral radius of the example 1 pair operator.
EXAMPLE1_RADIUS = 0.25 + math.sqrt(5.0) / 20.0

# Full eigenvalue multiset of the example 1 pair operator, with multiplicity.
EXAMPLE1_EIGENVALUES = tuple(
    sorted(
        [0.25 - math.sqrt(5.0) / 20.0] * 2
        + [0.25 + math.sqrt(5.0) / 20.0] * 2
        + [0.1] * 2
        + [0.2] * 4
        + [2.0 / 15.0] * 2
    )
)

# Published spectral radius of the example 2 pair operator, quoted to 4
# figures; comparisons use EXAMPLE2_RADIUS_TOL.
EXAMPLE2_RADIUS = 0.3732
EXAMPLE2_RADIUS_TOL = 5e-5

# Exact overlap complements 1 - alpha_k of the base chains, k = 1..5.
EXAMPLE1_ONE_MINUS_ALPHA_K = {
    1: Fraction(2, 5),
    2: Fraction(3, 20),
    3: Fraction(11, 200),
    4: Fraction(1, 50),
    5: Fraction(29, 4000),
}

EXAMPLE2_ONE_MINUS_ALPHA_K = {
    1: Fraction(2, 5),
    2: Fraction(4, 25),
    3: Fraction(31, 500),
    4: Fraction(59, 2500),
    5: Fraction(89, 10000),
}

# One-step overlap and Lipschitz constant of both nonlinear examples.
EXAMPLE_ALPHA = 0.6
# lambda equals the perturbation size kappa in both examples.

# Regression values frozen from oracle runs of this implementation ----------

# Exact uncoupled mass for example 1 started from the Dirac pair (1, 2),
# 1-based; tv of the marginals is bounded by twice these.
EXAMPLE1_UNCOUPLED_DIRAC12 = {1: 0.2, 5: 0.00276, 10: 1.71876e-05}

# Exact TV decay of example 1 at kappa = 1/10 from the Dirac pair (1, 2).
EXAMPLE1_TV_DECAY_K01 = {
    1: Fraction(2, 5),
    5: Fraction(11, 2000),
    10: Fraction(11, 320000),
}

# Onset step and perturbation threshold for example 1 at delta = 0.05.
EXAMPLE1_N_DELTA_005 = 1
EXAMPLE1_GAMMA_THRESHOLD_005 = 6.4822e-4
EXAMPLE1_GAMMA_THRESHOLD_TOL = 1e-7

# Perron-vector ratio of the pair operators: reducible (no strictly positive
# eigenvector) for example 1, a finite constant for example 2.
EXAMPLE1_FROBENIUS_APPLICABLE = False
EXAMPLE2_FROBENIUS_CONSTANT = 7.4641016151
EXAMPLE2_FROBENIUS_TOL = 1e-6


def example1_base() -> StochasticMatrix:
    """Exact 4-state base matrix."""
    return rational_matrix(EXAMPLE1_BASE_ROWS)


def example2_base() -> StochasticMatrix:
    """Exact 6-state base matrix."""
    return rational_matrix(EXAMPLE2_BASE_ROWS)


def example1_spec(kappa: float) -> NonlinearKernelSpec:
    """4-state chain whose first row shifts mass between columns 1 and 3.

    Row 1 reads (0.4 - kappa mu_1, 0.2, 0.2 + kappa mu_1, 0.2); admissible
    for 0 <= kappa < 0.3.
    """
    terms = ()
    if kappa:
        terms = (
            PerturbationTerm(0, 0, 0, -kappa),
            PerturbationTerm(0, 2, 0, kappa),
        )
    return NonlinearKernelSpec(
        base=example1_base(), perturbations=terms, parameters={"kappa": kappa}
    )


def example2_spec(kappa: float) -> NonlinearKernelSpec:
    """6-state band chain with every diagonal entry perturbed.

    Rows 1..5 move kappa mu_i from the diagonal to the right neighbour; the
    last row moves it from the diagonal to the left neighbour.  Admissible
    for 0 <= kappa < 0.3.
    """
    terms = []
    if kappa:
        for i in range(5):
            terms.append(PerturbationTerm(i, i, i, -kappa))
            terms.append(PerturbationTerm(i, i + 1, i, kappa))
        terms.append(PerturbationTerm(5, 5, 5, -kappa))
        terms.append(PerturbationTerm(5, 4, 5, kappa))
    return NonlinearKernelSpec(
        base=example2_base(), perturbations=tuple(terms), parameters={"kappa": kappa}
    )


def example1_expected_v_hat() -> np.ndarray:
    """The expected pair operator as exact Fractions."""
    return np.array(
        [[Fraction(v) for v in row] for row in EXAMPLE1_V_HAT_ROWS], dtype=object
    )
