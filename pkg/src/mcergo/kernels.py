"""Affine-in-measure transition kernels for finite nonlinear Markov chains.

A kernel spec is a base row-stochastic matrix plus perturbation terms.  The
transition matrix under a current law mu has entries

    P_mu[row, col] = base[row, col] + sum coefficient * mu[measure_index]

over the terms attached to (row, col).  The one-step law update is
mu_{k+1} = mu_k P_{mu_k}; k-step transition probabilities thread the evolving
law through every factor rather than freezing it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionError, InvalidMatrixError
from .measures import MASS_TOL, Distribution


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """A validated row-stochastic matrix.

    Entries may be floats or exact ``Fraction`` values (object dtype); exact
    entries make every downstream product exact.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.dtype != object:
            arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidMatrixError(f"expected a square matrix, got shape {arr.shape}")
        if np.any(arr < 0) or np.any(arr > 1):
            r, c = np.unravel_index(int(np.argmin(arr)), arr.shape)
            if arr[r, c] >= 0:
                r, c = np.unravel_index(int(np.argmax(arr)), arr.shape)
            raise InvalidMatrixError(f"entry ({r}, {c}) = {arr[r, c]} outside [0, 1]")
        sums = arr.sum(axis=1)
        for i, total in enumerate(sums):
            if abs(total - 1) > MASS_TOL:
                raise InvalidMatrixError(f"row {i} sums to {total}, not 1 within {MASS_TOL}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def row(self, x: int) -> np.ndarray:
        return self.entries[x]


@dataclass(frozen=True)
class PerturbationTerm:
    """One affine term: adds coefficient * mu[measure_index] to entry (row, col)."""

    row: int
    col: int
    measure_index: int
    coefficient: float


@dataclass(frozen=True, eq=False)
class NonlinearKernelSpec:
    """Base matrix plus affine perturbation terms, with the named constants used
    to resolve them (kept for traceability only; coefficients are already numbers).
    """

    base: StochasticMatrix
    perturbations: tuple[PerturbationTerm, ...] = ()
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "perturbations", tuple(self.perturbations))
        n = self.base.n
        for t in self.perturbations:
            for label, idx in (("row", t.row), ("col", t.col), ("measure_index", t.measure_index)):
                if not 0 <= idx < n:
                    raise IndexError(f"perturbation {label} {idx} out of range for n={n}")

    @property
    def n(self) -> int:
        return self.base.n


@dataclass(frozen=True)
class SpecValidation:
    """Outcome of validate_spec: empty violation lists mean the spec is usable."""

    zero_sum_violations: tuple  # (row, measure_index, total coefficient)
    range_violations: tuple     # (row, col, vertex, value) outside [0, 1]

    @property
    def ok(self) -> bool:
        return not self.zero_sum_violations and not self.range_violations


def _raw_evaluate(spec: NonlinearKernelSpec, probs: np.ndarray) -> np.ndarray:
    entries = np.array(spec.base.entries, copy=True)
    for t in spec.perturbations:
        entries[t.row, t.col] = entries[t.row, t.col] + t.coefficient * probs[t.measure_index]
    return entries


def evaluate(spec: NonlinearKernelSpec, mu: Distribution) -> StochasticMatrix:
    """Transition matrix P_mu.  Raises InvalidMatrixError if the perturbed
    matrix leaves the stochastic polytope (an invalid spec or law)."""
    if mu.n != spec.n:
        raise DimensionError(f"law has {mu.n} states, spec has {spec.n}")
    return StochasticMatrix(_raw_evaluate(spec, mu.probs))


def validate_spec(spec: NonlinearKernelSpec) -> SpecValidation:
    """Check the two feasibility conditions without raising.

    Per (row, measure_index) the coefficients must cancel across columns, and
    at every vertex law delta_m the evaluated matrix must stay inside [0, 1]
    entrywise.  Affine dependence makes vertex feasibility sufficient for the
    whole simplex.
    """
    n = spec.n
    totals: dict[tuple[int, int], float] = {}
    for t in spec.perturbations:
        key = (t.row, t.measure_index)
        totals[key] = totals.get(key, 0) + t.coefficient
    zero_sum = tuple(
        (row, m, total) for (row, m), total in sorted(totals.items()) if abs(total) > MASS_TOL
    )
    range_bad = []
    for vertex in range(n):
        probs = np.zeros(n)
        probs[vertex] = 1.0
        entries = _raw_evaluate(spec, probs)
        for row in range(n):
            for col in range(n):
                v = entries[row, col]
                if v < 0 or v > 1:
                    range_bad.append((row, col, vertex, v))
    return SpecValidation(zero_sum, tuple(range_bad))


def flow(spec: NonlinearKernelSpec, mu0: Distribution, n: int) -> list[Distribution]:
    """Laws [mu_0, mu_1, ..., mu_n] under mu_{k+1} = mu_k P_{mu_k}."""
    if n < 0:
        raise ValueError(f"horizon must be >= 0, got {n}")
    laws = [mu0]
    mu = mu0
    for _ in range(n):
        mu = Distribution(mu.probs @ evaluate(spec, mu).entries)
        laws.append(mu)
    return laws


def k_step_kernel(spec: NonlinearKernelSpec, mu0: Distribution, x: int, k: int) -> Distribution:
    """Law of X_k given X_0 = x when the population law starts at mu0.

    Computed by propagating the point mass through each one-step matrix of the
    flow; see k_step_matrix for the product-of-matrices route.
    """
    if not 0 <= x < spec.n:
        raise IndexError(f"state {x} out of range for n={spec.n}")
    if k < 0:
        raise ValueError(f"step count must be >= 0, got {k}")
    v = np.zeros(spec.n)
    v[x] = 1.0
    mu = mu0
    for _ in range(k):
        step = evaluate(spec, mu)
        v = v @ step.entries
        mu = Distribution(mu.probs @ step.entries)
    return Distribution(v)


def k_step_matrix(spec: NonlinearKernelSpec, mu0: Distribution, k: int) -> StochasticMatrix:
    """Product P_{mu_0} P_{mu_1} ... P_{mu_{k-1}} along the flow from mu0."""
    if k < 0:
        raise ValueError(f"step count must be >= 0, got {k}")
    out = np.eye(spec.n)
    mu = mu0
    for _ in range(k):
        step = evaluate(spec, mu)
        out = out @ step.entries
        mu = Distribution(mu.probs @ step.entries)
    return StochasticMatrix(out)


def linear_power(base: StochasticMatrix, k: int) -> StochasticMatrix:
    """k-th power of a fixed row-stochastic matrix, exact for exact entries."""
    if k < 0:
        raise ValueError(f"power must be >= 0, got {k}")
    if base.entries.dtype == object:
        out = np.array(
            [[Fraction(1) if i == j else Fraction(0) for j in range(base.n)] for i in range(base.n)],
            dtype=object,
        )
    else:
        out = np.eye(base.n)
    for _ in range(k):
        out = out @ base.entries
    return StochasticMatrix(out)


def rational_matrix(rows) -> StochasticMatrix:
    """Build an exact StochasticMatrix from strings like "0.4" or "1/15"."""
    entries = np.array(
        [[Fraction(str(v)) for v in row] for row in rows], dtype=object
    )
    return StochasticMatrix(entries)
