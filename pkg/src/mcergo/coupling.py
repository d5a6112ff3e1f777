"""Markovian coupling of two copies of a linear chain, and its pair operator.

For states x1, x2 with rows p1 = base[x1, .], p2 = base[x2, .] and overlap
kappa = sum_j min(p1_j, p2_j), the residual densities are

    phi1 = (p1 - p1 ^ p2) / (1 - kappa),
    phi2 = (p2 - p1 ^ p2) / (1 - kappa),
    phi3 = (p1 ^ p2) / kappa,

with the degenerate branches: kappa = 0 keeps phi1 = p1, phi2 = p2 and sets
phi3 = p1; kappa = 1 sets phi1 = phi2 = p1 (identical rows) and phi3 = p1.
The coupled pair either merges (probability kappa, position drawn from phi3)
or stays split and moves to (y1, y2) ~ phi1 x phi2.  phi1 and phi2 have
disjoint supports, so a split pair never lands on the diagonal.

The pair operator v_hat acts on ordered off-diagonal pairs, enumerated
lexicographically row-major; its entry [z, (y1, y2)] is
(1 - kappa(z)) phi1_z(y1) phi2_z(y2).  Its spectral radius governs the decay
of the mass still uncoupled after n steps.

All constructions are dtype generic: exact Fraction inputs give exact
rational operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionError
from .kernels import StochasticMatrix
from .measures import MASS_TOL, Distribution

DEGENERATE_NONE = "none"
DEGENERATE_KAPPA_ZERO = "kappa_zero"
DEGENERATE_KAPPA_ONE = "kappa_one"


@dataclass(frozen=True)
class PairIndex:
    """Lexicographic row-major enumeration of ordered off-diagonal pairs."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"state space size must be >= 1, got {self.n}")
        pairs = tuple((a, b) for a in range(self.n) for b in range(self.n) if a != b)
        lookup = {p: i for i, p in enumerate(pairs)}
        object.__setattr__(self, "_pairs", pairs)
        object.__setattr__(self, "_lookup", lookup)

    @property
    def size(self) -> int:
        return self.n * (self.n - 1)

    @property
    def pairs(self) -> tuple:
        return self._pairs

    def index_of(self, x1: int, x2: int) -> int:
        try:
            return self._lookup[(x1, x2)]
        except KeyError:
            raise IndexError(f"({x1}, {x2}) is not an ordered off-diagonal pair for n={self.n}")

    def pair(self, z: int) -> tuple[int, int]:
        return self._pairs[z]


@dataclass(frozen=True, eq=False)
class CouplingStep:
    """Overlap and residual densities for one pair of source rows."""

    kappa: float
    phi1: Distribution
    phi2: Distribution
    phi3: Distribution
    degenerate: str  # one of the DEGENERATE_* labels


@dataclass(frozen=True, eq=False)
class CouplingOperator:
    """The pair operator together with its building blocks.

    v_hat : (P, P) matrix on ordered off-diagonal pairs, P = n(n-1).
    survival : per-pair probability 1 - kappa of staying split (exactly 0 on
        the kappa = 1 branch, so those rows of v_hat vanish).
    residual_transition : (P, n*n) row-stochastic matrix of the split-pair
        move phi1 x phi2 over all ordered targets, flattened y1 * n + y2.
    """

    index: PairIndex
    v_hat: np.ndarray
    survival: np.ndarray
    residual_transition: np.ndarray

    @property
    def n(self) -> int:
        return self.index.n


@dataclass(frozen=True, eq=False)
class ExtendedState:
    """One trajectory point of the extended chain (eta1, eta2, xi, flag).

    flag = 1 means not yet coupled; the observable copies are then
    (eta1, eta2).  flag = 0 means coupled, and both observables equal xi.
    """

    eta1: int
    eta2: int
    xi: int
    flag: int

    def __post_init__(self):
        if self.flag not in (0, 1):
            raise ValueError(f"flag must be 0 or 1, got {self.flag}")

    @property
    def observables(self) -> tuple[int, int]:
        if self.flag == 0:
            return (self.xi, self.xi)
        return (self.eta1, self.eta2)


@dataclass(frozen=True, eq=False)
class CoupledSimulation:
    """Monte Carlo record for the coupled pair at a fixed horizon."""

    n: int
    trials: int
    seed: int
    workers: int
    freq_unequal: float          # empirical P(X1_n != X2_n)
    std_error: float             # sqrt(p(1-p)/trials) at the horizon
    freq_by_step: np.ndarray     # length n+1, step 0 included
    marginal1: np.ndarray        # empirical law of the first copy at n
    marginal2: np.ndarray


def _split_densities(row1, row2, kappa_zero_phi3):
    """Shared residual computation; kappa_zero_phi3 is the phi3 fallback at kappa = 0."""
    mins = np.minimum(row1, row2)
    kappa = mins.sum()
    if kappa >= 1 - MASS_TOL:
        row = np.array(row1, copy=True)
        return CouplingStep(
            kappa=kappa,
            phi1=Distribution(row),
            phi2=Distribution(row),
            phi3=Distribution(mins / kappa),
            degenerate=DEGENERATE_KAPPA_ONE,
        )
    if kappa == 0:
        return CouplingStep(
            kappa=kappa,
            phi1=Distribution(np.array(row1, copy=True)),
            phi2=Distribution(np.array(row2, copy=True)),
            phi3=Distribution(np.array(kappa_zero_phi3, copy=True)),
            degenerate=DEGENERATE_KAPPA_ZERO,
        )
    rest = 1 - kappa
    return CouplingStep(
        kappa=kappa,
        phi1=Distribution((row1 - mins) / rest),
        phi2=Distribution((row2 - mins) / rest),
        phi3=Distribution(mins / kappa),
        degenerate=DEGENERATE_NONE,
    )


def residual_densities(base: StochasticMatrix, x1: int, x2: int) -> CouplingStep:
    """Residual densities for the source pair (x1, x2) of a fixed kernel."""
    for x in (x1, x2):
        if not 0 <= x < base.n:
            raise IndexError(f"state {x} out of range for n={base.n}")
    return _split_densities(base.entries[x1], base.entries[x2], base.entries[x1])


def initial_coupling(mu0: Distribution, nu0: Distribution) -> CouplingStep:
    """Residual densities for the initial laws; phi3 falls back to mu0 at kappa = 0."""
    if mu0.n != nu0.n:
        raise DimensionError(f"state spaces differ: {mu0.n} vs {nu0.n}")
    return _split_densities(mu0.probs, nu0.probs, mu0.probs)


def _pair_machine(base: StochasticMatrix):
    """Per-pair survival, split-move matrix, merge density, and overlap."""
    idx = PairIndex(base.n)
    n = base.n
    steps = [residual_densities(base, x1, x2) for x1, x2 in idx.pairs]
    exact = base.entries.dtype == object
    dtype = object if exact else float
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    survival = np.array(
        [zero if s.degenerate == DEGENERATE_KAPPA_ONE else one - s.kappa for s in steps],
        dtype=dtype,
    )
    residual = np.array(
        [np.outer(s.phi1.probs, s.phi2.probs).ravel() for s in steps], dtype=dtype
    ).reshape(idx.size, n * n)
    phi3 = np.array([s.phi3.probs for s in steps], dtype=dtype).reshape(idx.size, n)
    return idx, survival, residual, phi3


def build_v_hat(base: StochasticMatrix) -> CouplingOperator:
    """Assemble the pair operator of a kernel.

    Rows with kappa = 1 are exactly zero; rows with kappa = 0 keep survival 1
    and move by the plain (disjoint) kernel rows.
    """
    idx, survival, residual, _ = _pair_machine(base)
    n = base.n
    offdiag = np.array([y1 * n + y2 for y1, y2 in idx.pairs], dtype=int)
    v_hat = survival[:, None] * residual[:, offdiag]
    return CouplingOperator(
        index=idx, v_hat=v_hat, survival=survival, residual_transition=residual
    )


def _initial_pair_mass(init: CouplingStep, idx: PairIndex) -> np.ndarray:
    """Law of the split pair at time 0 on off-diagonal pairs (their supports are disjoint)."""
    outer = np.outer(init.phi1.probs, init.phi2.probs)
    flat = np.array([y1 * idx.n + y2 for y1, y2 in idx.pairs], dtype=int)
    return outer.ravel()[flat]


def uncoupled_probability_exact(
    base: StochasticMatrix, mu0: Distribution, nu0: Distribution, n: int
):
    """Exact probability that the coupled pair is still split after n steps.

    Equals (1 - kappa_0) <psi_0, A^(n-1) s> for n >= 1, where psi_0 is the
    initial split-pair law, A is the pair operator and s its survival vector;
    twice this value dominates the TV distance of the two marginal laws.
    """
    if base.n != mu0.n or base.n != nu0.n:
        raise DimensionError("kernel and laws must share one state space")
    if n < 0:
        raise ValueError(f"horizon must be >= 0, got {n}")
    init = initial_coupling(mu0, nu0)
    if init.degenerate == DEGENERATE_KAPPA_ONE:
        return 0.0 if base.entries.dtype != object else init.kappa * 0
    start_mass = 1 - init.kappa
    if n == 0:
        return start_mass
    op = build_v_hat(base)
    psi0 = _initial_pair_mass(init, op.index)
    v = op.survival
    for _ in range(n - 1):
        v = op.v_hat @ v
    return start_mass * (psi0 @ v)


def marginal_law_exact(
    base: StochasticMatrix, mu0: Distribution, nu0: Distribution, n: int, which: int
) -> Distribution:
    """Exact law of one observable copy of the extended chain after n steps.

    Propagates the pair mass (flag 1) and the merged mass (flag 0) jointly;
    the marginal must coincide with mu0 @ base^n (or nu0 @ base^n), which is
    what makes the construction a coupling.
    """
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}")
    if base.n != mu0.n or base.n != nu0.n:
        raise DimensionError("kernel and laws must share one state space")
    if n < 0:
        raise ValueError(f"horizon must be >= 0, got {n}")
    nstates = base.n
    init = initial_coupling(mu0, nu0)
    idx, survival, residual, phi3 = _pair_machine(base)
    offdiag = np.array([y1 * nstates + y2 for y1, y2 in idx.pairs], dtype=int)
    if init.degenerate == DEGENERATE_KAPPA_ONE:
        split = np.zeros(idx.size)
        merged = np.array(init.phi3.probs, copy=True)
    else:
        split = (1 - init.kappa) * _initial_pair_mass(init, idx)
        merged = init.kappa * np.array(init.phi3.probs, copy=True)
    merge_prob = 1 - survival
    for _ in range(n):
        merged = merged @ base.entries + (split * merge_prob) @ phi3
        split = ((split * survival) @ residual)[offdiag]
    full = np.zeros((nstates, nstates)) if split.dtype != object else np.zeros(
        (nstates, nstates), dtype=object
    )
    full.ravel()[offdiag] = split
    law = full.sum(axis=1) if which == 1 else full.sum(axis=0)
    return Distribution(law + merged)


def _inverse_cdf_rows(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorized inverse CDF: first index whose cumulative mass exceeds u."""
    idx = (u[:, None] >= cum_rows).sum(axis=1)
    return np.minimum(idx, cum_rows.shape[1] - 1)


def initial_extended(init: CouplingStep, uniforms: tuple[float, float, float, float]) -> ExtendedState:
    """Scalar reference draw of the extended state at time 0.

    uniforms are consumed in the fixed order (flag, xi, eta1, eta2), one
    uniform per variable through the inverse CDF over the state order.
    """
    u_flag, u_xi, u_eta1, u_eta2 = uniforms
    flag = 0 if u_flag < init.kappa or init.degenerate == DEGENERATE_KAPPA_ONE else 1
    xi = int(_inverse_cdf_rows(np.cumsum(init.phi3.probs)[None, :], np.array([u_xi]))[0])
    eta1 = int(_inverse_cdf_rows(np.cumsum(init.phi1.probs)[None, :], np.array([u_eta1]))[0])
    eta2 = int(_inverse_cdf_rows(np.cumsum(init.phi2.probs)[None, :], np.array([u_eta2]))[0])
    return ExtendedState(eta1=eta1, eta2=eta2, xi=xi, flag=flag)


def advance_extended(
    base: StochasticMatrix, state: ExtendedState, uniforms: tuple[float, float, float, float]
) -> ExtendedState:
    """Scalar reference step of the extended chain, same draw order as initial_extended."""
    u_flag, u_xi, u_eta1, u_eta2 = uniforms
    if state.flag == 0:
        row = np.cumsum(base.entries[state.xi])[None, :]
        xi = int(_inverse_cdf_rows(row, np.array([u_xi]))[0])
        eta1 = int(_inverse_cdf_rows(row, np.array([u_eta1]))[0])
        eta2 = int(_inverse_cdf_rows(row, np.array([u_eta2]))[0])
        return ExtendedState(eta1=eta1, eta2=eta2, xi=xi, flag=0)
    step = residual_densities(base, state.eta1, state.eta2)
    flag = 0 if u_flag < step.kappa or step.degenerate == DEGENERATE_KAPPA_ONE else 1
    xi = int(_inverse_cdf_rows(np.cumsum(step.phi3.probs)[None, :], np.array([u_xi]))[0])
    eta1 = int(_inverse_cdf_rows(np.cumsum(step.phi1.probs)[None, :], np.array([u_eta1]))[0])
    eta2 = int(_inverse_cdf_rows(np.cumsum(step.phi2.probs)[None, :], np.array([u_eta2]))[0])
    return ExtendedState(eta1=eta1, eta2=eta2, xi=xi, flag=flag)


def simulate_coupled(
    base: StochasticMatrix,
    mu0: Distribution,
    nu0: Distribution,
    n: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> CoupledSimulation:
    """Monte Carlo estimate of P(X1_n != X2_n) under the markovian coupling.

    Trials are split into `workers` contiguous chunks, each driven by the
    substream seeded with (seed, worker); per-variable draws use a single
    uniform through the inverse CDF, in the fixed order (flag, xi, eta1,
    eta2) per step.  Results are sums over chunks, hence reproducible for a
    fixed (seed, workers).
    """
    if base.n != mu0.n or base.n != nu0.n:
        raise DimensionError("kernel and laws must share one state space")
    if n < 0:
        raise ValueError(f"horizon must be >= 0, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    nstates = base.n
    idx, survival, residual, phi3 = _pair_machine(base)
    base_f = np.asarray(base.entries, dtype=float)
    kap = 1 - np.asarray(survival, dtype=float)
    cum_phi3 = np.cumsum(np.asarray(phi3, dtype=float), axis=1)
    split_rows = np.asarray(residual, dtype=float).reshape(idx.size, nstates, nstates)
    cum_phi1 = np.cumsum(split_rows.sum(axis=2), axis=1)
    cum_phi2 = np.cumsum(split_rows.sum(axis=1), axis=1)
    cum_base = np.cumsum(base_f, axis=1)

    pair_table = np.zeros((nstates, nstates), dtype=int)
    for z, (a, b) in enumerate(idx.pairs):
        pair_table[a, b] = z

    init = initial_coupling(mu0, nu0)
    kappa0 = 1.0 if init.degenerate == DEGENERATE_KAPPA_ONE else float(init.kappa)
    cum_init3 = np.cumsum(np.asarray(init.phi3.probs, dtype=float))[None, :]
    cum_init1 = np.cumsum(np.asarray(init.phi1.probs, dtype=float))[None, :]
    cum_init2 = np.cumsum(np.asarray(init.phi2.probs, dtype=float))[None, :]

    merged_sentinel = idx.size  # states >= sentinel encode "coupled at x"
    unequal_counts = np.zeros(n + 1, dtype=np.int64)
    count1 = np.zeros(nstates, dtype=np.int64)
    count2 = np.zeros(nstates, dtype=np.int64)

    chunk_sizes = [trials // workers + (1 if w < trials % workers else 0) for w in range(workers)]
    for worker, m in enumerate(chunk_sizes):
        if m == 0:
            continue
        rng = np.random.default_rng([seed, worker])
        u_flag, u_xi = rng.random(m), rng.random(m)
        u_e1, u_e2 = rng.random(m), rng.random(m)
        merged_now = u_flag < kappa0
        xi = _inverse_cdf_rows(np.broadcast_to(cum_init3, (m, nstates)), u_xi)
        e1 = _inverse_cdf_rows(np.broadcast_to(cum_init1, (m, nstates)), u_e1)
        e2 = _inverse_cdf_rows(np.broadcast_to(cum_init2, (m, nstates)), u_e2)
        state = np.where(merged_now, merged_sentinel + xi, pair_table[e1, e2])
        unequal_counts[0] += int((state < merged_sentinel).sum())
        for step in range(1, n + 1):
            u_flag, u_xi = rng.random(m), rng.random(m)
            u_e1, u_e2 = rng.random(m), rng.random(m)
            split_mask = state < merged_sentinel
            if split_mask.any():
                z = state[split_mask]
                merge_now = u_flag[split_mask] < kap[z]
                xi = _inverse_cdf_rows(cum_phi3[z], u_xi[split_mask])
                y1 = _inverse_cdf_rows(cum_phi1[z], u_e1[split_mask])
                y2 = _inverse_cdf_rows(cum_phi2[z], u_e2[split_mask])
                state[split_mask] = np.where(
                    merge_now, merged_sentinel + xi, pair_table[y1, y2]
                )
            if (~split_mask).any():
                x = state[~split_mask] - merged_sentinel
                state[~split_mask] = merged_sentinel + _inverse_cdf_rows(
                    cum_base[x], u_xi[~split_mask]
                )
            unequal_counts[step] += int((state < merged_sentinel).sum())
        split_mask = state < merged_sentinel
        first = np.empty(m, dtype=int)
        second = np.empty(m, dtype=int)
        if split_mask.any():
            pair_arr = np.array(idx.pairs, dtype=int).reshape(idx.size, 2)
            first[split_mask] = pair_arr[state[split_mask], 0]
            second[split_mask] = pair_arr[state[split_mask], 1]
        first[~split_mask] = state[~split_mask] - merged_sentinel
        second[~split_mask] = state[~split_mask] - merged_sentinel
        count1 += np.bincount(first, minlength=nstates)
        count2 += np.bincount(second, minlength=nstates)

    freq = unequal_counts[n] / trials
    return CoupledSimulation(
        n=n,
        trials=trials,
        seed=seed,
        workers=workers,
        freq_unequal=float(freq),
        std_error=float(np.sqrt(freq * (1 - freq) / trials)),
        freq_by_step=unequal_counts / trials,
        marginal1=count1 / trials,
        marginal2=count2 / trials,
    )
