"""Contraction and regularity coefficients of kernels and kernel specs.

Three families of quantities live here:

* Markov-Dobrushin overlaps: kappa(x1, x2) = sum_j min of two kernel rows, and
  alpha_k, the minimal overlap of k-step rows.  For a fixed matrix this is an
  exact minimum over state pairs; for a nonlinear spec the minimum also runs
  over laws, searched on a deterministic grid plus Dirichlet samples.
* Lipschitz constants of the kernel in its measure argument, in total
  variation.  For affine specs the one-step constant is an exact maximum over
  point-mass pairs; k-step constants are sampled from below and bounded from
  above by the closed-form growth constants c_k.
* The perturbation magnitude gamma: the largest relative surplus of the base
  kernel density over the perturbed kernel, finite only when base and
  perturbed kernels share supports at every vertex law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolationError
from .kernels import NonlinearKernelSpec, StochasticMatrix, k_step_matrix, linear_power, _raw_evaluate
from .measures import Distribution

# Measure pairs closer than this in TV are skipped when estimating ratios.
RATIO_FLOOR = 1e-9


@dataclass(frozen=True)
class SamplerConfig:
    """How many Dirichlet draws to add to the deterministic grid, and the seed."""

    samples: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.samples < 0:
            raise ValueError(f"samples must be >= 0, got {self.samples}")


@dataclass(frozen=True)
class CoefficientCertificate:
    """A computed coefficient with the argument that attained it.

    value : the coefficient; exact rational when inputs were exact.
    achieved_at : indices (and laws, where relevant) attaining the extremum;
        re-evaluating the defining expression there reproduces value.
    exact : True when the extremum is provably global, False for sampled
        estimates.
    samples : Dirichlet draw count for sampled estimates, None otherwise.
    """

    value: float
    achieved_at: tuple
    exact: bool
    samples: int | None = None


def _ordered_pairs(n: int):
    return ((a, b) for a in range(n) for b in range(n) if a != b)


def _measure_grid(n: int, config: SamplerConfig) -> list[np.ndarray]:
    """All vertices, all vertex-pair midpoints, then config.samples Dirichlet draws."""
    grid = [np.eye(n)[i] for i in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            grid.append((np.eye(n)[a] + np.eye(n)[b]) / 2)
    rng = np.random.default_rng(config.seed)
    for _ in range(config.samples):
        grid.append(rng.dirichlet(np.ones(n)))
    return grid


def dobrushin_kappa(base: StochasticMatrix, x1: int, x2: int):
    """Row overlap sum_j min(base[x1, j], base[x2, j]), in [0, 1]."""
    n = base.n
    for x in (x1, x2):
        if not 0 <= x < n:
            raise IndexError(f"state {x} out of range for n={n}")
    return np.minimum(base.entries[x1], base.entries[x2]).sum()


def md_alpha_linear(base: StochasticMatrix, k: int = 1) -> CoefficientCertificate:
    """Minimal k-step row overlap over ordered state pairs, exact.

    Ties are broken by the lowest (x1, x2) tuple.  Exact-rational input gives
    an exact rational value.
    """
    if k < 1:
        raise ValueError(f"step count must be >= 1, got {k}")
    power = linear_power(base, k)
    best = None
    best_pair = None
    for x1, x2 in _ordered_pairs(base.n):
        overlap = np.minimum(power.entries[x1], power.entries[x2]).sum()
        if best is None or overlap < best:
            best, best_pair = overlap, (x1, x2)
    if best is None:
        # single-state space: the overlap of a row with itself
        best, best_pair = power.entries[0].sum(), (0, 0)
    return CoefficientCertificate(value=best, achieved_at=best_pair, exact=True)


def md_alpha_nonlinear(
    spec: NonlinearKernelSpec, k: int = 1, config: SamplerConfig = SamplerConfig()
) -> CoefficientCertificate:
    """Minimal k-step overlap min_{x,x',mu,nu} sum_j min(P^(k)_mu(x,j), P^(k)_nu(x',j)).

    The law pair (mu, nu) ranges over the sampling grid of _measure_grid; the
    state pair is unrestricted.  The result is a sampled upper envelope of the
    true infimum, flagged exact only when k = 1 and no perturbation touches
    either minimizing row, in which case those rows do not depend on the law.
    """
    if k < 1:
        raise ValueError(f"step count must be >= 1, got {k}")
    n = spec.n
    grid = _measure_grid(n, config)
    mats = np.stack([k_step_matrix(spec, Distribution(m), k).entries for m in grid])
    best = None
    best_at = None
    for i, mat in enumerate(mats):
        # overlaps[l, x, x'] pits rows of mats[i] against rows of every mats[l]
        overlaps = np.minimum(mat[None, :, None, :], mats[:, None, :, :]).sum(axis=3)
        flat = int(np.argmin(overlaps))
        if best is None or overlaps.flat[flat] < best:
            l, x, xp = np.unravel_index(flat, overlaps.shape)
            best = float(overlaps.flat[flat])
            best_at = (int(x), int(xp), tuple(grid[i]), tuple(grid[int(l)]))
    touched = {t.row for t in spec.perturbations}
    exact = k == 1 and best_at[0] not in touched and best_at[1] not in touched
    return CoefficientCertificate(
        value=best, achieved_at=best_at, exact=exact, samples=config.samples
    )


def lipschitz_lambda(spec: NonlinearKernelSpec) -> CoefficientCertificate:
    """Exact TV Lipschitz constant of mu -> P_mu for an affine spec.

    Equals max over rows x and ordered vertex pairs (a, b) of
    (1/2) sum_col |sum of coefficient * (delta_a - delta_b)[measure_index]|;
    affinity puts the maximum of the TV ratio at point-mass pairs.
    """
    n = spec.n
    per_row: dict[int, dict[int, dict[int, object]]] = {}
    for t in spec.perturbations:
        per_row.setdefault(t.row, {}).setdefault(t.col, {})
        cell = per_row[t.row][t.col]
        # int zero keeps Fraction coefficients exact
        cell[t.measure_index] = cell.get(t.measure_index, 0) + t.coefficient
    best = 0
    best_at = (0, 0, 1) if n > 1 else (0, 0, 0)
    for row, cols in sorted(per_row.items()):
        for a, b in _ordered_pairs(n):
            total = 0
            for _, coefs in sorted(cols.items()):
                total += abs(coefs.get(a, 0) - coefs.get(b, 0))
            ratio = total / 2
            if ratio > best:
                best, best_at = ratio, (row, a, b)
    return CoefficientCertificate(value=best, achieved_at=best_at, exact=True)


def lipschitz_lambda_k_estimate(
    spec: NonlinearKernelSpec, k: int, config: SamplerConfig = SamplerConfig()
) -> CoefficientCertificate:
    """Sampled lower estimate of the k-step Lipschitz constant lambda_k.

    Maximizes ||P^(k)_mu(x, .) - P^(k)_nu(x, .)||_TV / ||mu - nu||_TV over all
    states x, over all ordered pairs from the deterministic grid, and over
    config.samples random Dirichlet pairs; pairs with TV below RATIO_FLOOR are
    skipped.  A lower bound: the certified ceiling is c_k_bound(k) * lambda_1.
    """
    if k < 1:
        raise ValueError(f"step count must be >= 1, got {k}")
    n = spec.n
    det_grid = _measure_grid(n, SamplerConfig(samples=0, seed=config.seed))
    det_mats = [k_step_matrix(spec, Distribution(m), k).entries for m in det_grid]
    best = 0.0
    best_at = None

    def consider(mu, mat_mu, nu, mat_nu):
        nonlocal best, best_at
        gap = np.abs(mu - nu).sum()
        if gap <= RATIO_FLOOR:
            return
        ratios = np.abs(mat_mu - mat_nu).sum(axis=1) / gap
        x = int(np.argmax(ratios))
        if ratios[x] > best:
            best, best_at = float(ratios[x]), (x, tuple(mu), tuple(nu))

    for i, mu in enumerate(det_grid):
        for j, nu in enumerate(det_grid):
            if i != j:
                consider(mu, det_mats[i], nu, det_mats[j])
    rng = np.random.default_rng(config.seed)
    for _ in range(config.samples):
        mu = rng.dirichlet(np.ones(n))
        nu = rng.dirichlet(np.ones(n))
        consider(mu, k_step_matrix(spec, Distribution(mu), k).entries,
                 nu, k_step_matrix(spec, Distribution(nu), k).entries)
    return CoefficientCertificate(
        value=best, achieved_at=best_at, exact=False, samples=config.samples
    )


def c_k_bound(k: int) -> int:
    """Closed-form growth constant with lambda_k <= c_k * lambda_1 (lambda_1 <= 1).

    c_k = (5/3) 4^k - 2/3, an integer for every k >= 1 (6, 26, 106, ...).
    """
    if k < 1:
        raise ValueError(f"step count must be >= 1, got {k}")
    return (5 * 4**k - 2) // 3


def c_k_recursion_bound(k: int) -> int:
    """Tighter growth constant from iterating c_{k+1} = 4 c_k + 2 with c_1 = 1.

    One step behind c_k_bound (1, 6, 26, ...); reported alongside the
    closed form as the "recursion-tight bound", without asserting either as
    canonical.
    """
    if k < 1:
        raise ValueError(f"step count must be >= 1, got {k}")
    return (5 * 4 ** (k - 1) - 2) // 3


def gamma_perturbation(spec: NonlinearKernelSpec) -> CoefficientCertificate:
    """Largest relative density surplus gamma of the base over the perturbed kernel.

    gamma = max over entries (x, y) with base > 0 of
    base[x, y] / min over vertex laws of P_delta[x, y] - 1.  Affinity again
    reduces the minimum over the simplex to the vertices.  Raises
    AssumptionViolationError when supports differ at some vertex (the density
    ratio would be infinite or the kernels not equivalent).
    """
    n = spec.n
    base = spec.base.entries
    vertex_mats = []
    for vertex in range(n):
        # int-valued point mass keeps exact entries exact
        probs = np.zeros(n, dtype=base.dtype) if base.dtype == object else np.zeros(n)
        probs[vertex] = 1
        entries = _raw_evaluate(spec, probs)
        for row in range(n):
            for col in range(n):
                b, p = base[row, col], entries[row, col]
                if b > 0 and p <= 0:
                    raise AssumptionViolationError(
                        f"entry ({row}, {col}) has base mass {b} but mass {p} at vertex {vertex}"
                    )
                if b == 0 and p != 0:
                    raise AssumptionViolationError(
                        f"entry ({row}, {col}) has no base mass but mass {p} at vertex {vertex}"
                    )
        vertex_mats.append(entries)
    best = 0
    best_at = None
    for row in range(n):
        for col in range(n):
            if base[row, col] <= 0:
                continue
            values = [m[row, col] for m in vertex_mats]
            vertex = int(np.argmin(values))
            surplus = base[row, col] / values[vertex] - 1
            if best_at is None or surplus > best:
                best, best_at = surplus, (row, col, vertex)
    if best_at is None:
        raise AssumptionViolationError("base kernel carries no mass at all")
    return CoefficientCertificate(value=best, achieved_at=best_at, exact=True)
