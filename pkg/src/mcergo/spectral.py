"""Spectral radius, full spectra, Gelfand norm sequences, Frobenius constants.

The inputs of interest are the nonnegative pair operators built in
``coupling``; their spectral radius is the decay rate of the uncoupled mass.
For nonnegative matrices the radius equals the dominant eigenvalue, so power
iteration from a strictly positive start is the primary method, with a dense
eigensolve as fallback and single source of truth for full spectra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidMatrixError

METHOD_POWER = "power_iteration"
METHOD_DENSE = "dense_eigensolve"
METHOD_GELFAND = "gelfand_fallback"

POWER_BUDGET = 100_000
STABLE_RUN = 10  # consecutive Rayleigh estimates within tol to declare convergence


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Spectral radius with the method that produced it.

    eigenvalues is the complete multiset when a dense solve ran, else None.
    residual is a convergence diagnostic: the max-norm eigen-equation defect
    for power iteration, 0.0 for the dense path.
    """

    radius: float
    eigenvalues: np.ndarray | None
    method: str
    residual: float


@dataclass(frozen=True, eq=False)
class FrobeniusResult:
    """Right Perron eigenvector e (max entry 1) and C = max e / min e.

    applicable is False when power iteration does not converge to a strictly
    positive eigenvector (reducible or degenerate operator); no constant is
    reported in that case.
    """

    applicable: bool
    e: np.ndarray | None = None
    constant: float | None = None
    reason: str = ""


def _as_float_square(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrixError("matrix entries must be finite")
    return arr


def _power_iterate(arr: np.ndarray, tol: float) -> tuple[float, np.ndarray, float] | None:
    """Run power iteration; return (radius, vector, residual) or None on failure."""
    n = arr.shape[0]
    v = np.ones(n)
    estimate = np.inf
    stable = 0
    for _ in range(POWER_BUDGET):
        w = arr @ v
        peak = np.abs(w).max()
        if peak == 0.0:
            return 0.0, v, 0.0
        w /= peak
        rayleigh = float((w @ (arr @ w)) / (w @ w))
        stable = stable + 1 if abs(rayleigh - estimate) <= tol else 0
        estimate = rayleigh
        v = w
        if stable >= STABLE_RUN:
            residual = float(np.abs(arr @ v - estimate * v).max())
            return estimate, v, residual
    return None


def spectral_radius(m, tol: float = 1e-12) -> SpectrumResult:
    """Spectral radius of a square real matrix, correct to tol.

    Nonnegative matrices go through power iteration (all-ones start, max-norm
    normalization, convergence on a stable Rayleigh run); anything else, and
    any non-stabilizing iteration, falls back to the dense eigensolve.
    """
    arr = _as_float_square(m)
    if arr.shape[0] == 0:
        return SpectrumResult(0.0, np.zeros(0, dtype=complex), METHOD_DENSE, 0.0)
    if np.all(arr >= 0):
        outcome = _power_iterate(arr, tol)
        if outcome is not None:
            radius, _, residual = outcome
            return SpectrumResult(float(radius), None, METHOD_POWER, residual)
    return eigenvalues(arr)


def eigenvalues(m) -> SpectrumResult:
    """Complete eigenvalue multiset via the dense solver; radius = max modulus."""
    arr = _as_float_square(m)
    if arr.shape[0] == 0:
        return SpectrumResult(0.0, np.zeros(0, dtype=complex), METHOD_DENSE, 0.0)
    try:
        eigs = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError:
        # Last resort: a long Gelfand run brackets the radius from above.
        radius = gelfand_sequence(arr, 64)[-1]
        return SpectrumResult(float(radius), None, METHOD_GELFAND, float("inf"))
    return SpectrumResult(float(np.abs(eigs).max()), eigs, METHOD_DENSE, 0.0)


def gelfand_sequence(m, max_n: int) -> list[float]:
    """The sequence of k-th root max-row-sum norms of m^k, k = 1..max_n.

    Powers of two come from repeated squaring (the running product is resynced
    there); other exponents extend the running product by one plain factor.
    """
    arr = _as_float_square(m)
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if arr.shape[0] == 0:
        return [0.0] * max_n
    # float overflow is detected by the finiteness check, not left to numpy
    with np.errstate(over="ignore", invalid="ignore"):
        squared = {1: arr}
        power, k = arr, 1
        while 2 * k <= max_n:
            power = power @ power
            k *= 2
            squared[k] = power
        out: list[float] = []
        running = arr
        for k in range(1, max_n + 1):
            if k > 1:
                running = squared[k] if k in squared else running @ arr
            norm = float(np.abs(running).sum(axis=1).max())
            if not np.isfinite(norm):
                raise OverflowError(f"matrix power overflowed at exponent {k}")
            out.append(norm ** (1.0 / k))
    return out


def frobenius_constant(m, tol: float = 1e-12) -> FrobeniusResult:
    """Perron eigenvector ratio C = max e / min e for a nonnegative matrix.

    Only applicable when power iteration converges to a strictly positive e
    (entries above 1e-12 of the peak); reducible or nilpotent operators give
    a not-applicable outcome rather than an invented constant.
    """
    arr = _as_float_square(m)
    if np.any(arr < 0):
        raise InvalidMatrixError("matrix entries must be nonnegative")
    if arr.shape[0] == 0:
        return FrobeniusResult(False, reason="empty operator")
    outcome = _power_iterate(arr, tol)
    if outcome is None:
        return FrobeniusResult(False, reason="power iteration did not stabilize")
    radius, vector, _ = outcome
    if radius == 0.0:
        return FrobeniusResult(False, reason="spectral radius is zero")
    e = np.abs(vector)
    peak = e.max()
    if np.any(e <= 1e-12 * peak):
        return FrobeniusResult(False, reason="eigenvector is not strictly positive")
    e = e / peak
    return FrobeniusResult(True, e=e, constant=float(e.max() / e.min()))
