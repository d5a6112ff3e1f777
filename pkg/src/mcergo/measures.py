"""Probability distributions on a finite state space and total variation distance.

States are indexed 0..n-1.  The total variation convention used throughout the
package is the unnormalized one,

    ||mu - nu||_TV = sum_i |mu_i - nu_i|,

so the distance between distributions lives in [0, 2] and disjoint supports
give exactly 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidDistributionError

# Mass checks reject rather than renormalize; this is the acceptance slack.
MASS_TOL = 1e-12


def _as_vector(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype != object:
        arr = np.asarray(arr, dtype=float)
    if arr.ndim != 1:
        raise InvalidDistributionError(f"expected a 1-d vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    """A validated probability vector.

    Parameters
    ----------
    probs : array_like
        Nonnegative entries summing to 1 within ``MASS_TOL``.  Entries may be
        floats or exact ``fractions.Fraction`` values (object dtype); exact
        inputs are kept exact so downstream arithmetic stays rational.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.probs)
        if arr.size == 0:
            raise InvalidDistributionError("empty state space")
        if np.any(arr < 0):
            i = int(np.argmin(arr))
            raise InvalidDistributionError(f"negative mass {arr[i]} at state {i}")
        total = arr.sum()
        if abs(total - 1) > MASS_TOL:
            raise InvalidDistributionError(f"total mass {total} is not 1 within {MASS_TOL}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def __getitem__(self, i: int):
        return self.probs[i]


def dirac(i: int, n: int) -> Distribution:
    """Point mass at state i on an n-point space."""
    if not 0 <= i < n:
        raise IndexError(f"state {i} out of range for n={n}")
    v = np.zeros(n)
    v[i] = 1.0
    return Distribution(v)


def tv_distance(mu: Distribution, nu: Distribution):
    """Total variation distance sum_i |mu_i - nu_i| in [0, 2]."""
    if mu.n != nu.n:
        raise DimensionError(f"state spaces differ: {mu.n} vs {nu.n}")
    return np.abs(mu.probs - nu.probs).sum()


def positive_part_gap(mu: Distribution, nu: Distribution):
    """sum_i (mu_i - nu_i)^+, which equals tv_distance / 2 for equal-mass vectors."""
    if mu.n != nu.n:
        raise DimensionError(f"state spaces differ: {mu.n} vs {nu.n}")
    diff = mu.probs - nu.probs
    return diff[diff > 0].sum()


def sample_simplex(n: int, rng: np.random.Generator) -> Distribution:
    """Draw one point from the flat Dirichlet distribution on the n-simplex."""
    if n < 1:
        raise InvalidDistributionError(f"state space size must be >= 1, got {n}")
    return Distribution(rng.dirichlet(np.ones(n)))
