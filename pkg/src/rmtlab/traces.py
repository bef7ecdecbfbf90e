"""Traces of powers W_p = tr(X^p) and the recentered vector Z."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegreeOverflowError, NumericOverflowError, ShapeMismatchError, UnsupportedSpaceError
from .spaces import SpaceKind, hs_norm
from .theory import MeanPrediction


@dataclass(frozen=True)
class TraceVector:
    """W = (W_1, ..., W_m) = (tr X, tr X^2, ..., tr X^m)."""

    m: int
    values: tuple[complex, ...]

    def __getitem__(self, p: int) -> complex:
        if not 1 <= p <= self.m:
            raise KeyError(f"power {p} outside 1..{self.m}")
        return self.values[p - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)


@dataclass(frozen=True)
class CenteredVector:
    """Recentered statistics Z_p = W_p - mu_p - c_p Y_2 over the model index set."""

    index_set: tuple[int, ...]
    values: tuple[float, ...]
    y2: float

    def __getitem__(self, p: int) -> float:
        return self.values[self.index_set.index(p)]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def trace_powers(X: np.ndarray, m: int) -> TraceVector:
    """All traces tr(X^p), p = 1..m, by iterated multiplication.

    One code path valid for non-normal X; cost O(m n^3).  Raises
    NumericOverflowError if non-finite values appear.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got {X.shape}")
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    W = trace_powers_batch(X[None, :, :], m)[0]
    return TraceVector(m=m, values=tuple(complex(w) for w in W))


def trace_powers_batch(X: np.ndarray, m: int) -> np.ndarray:
    """Vectorized trace powers: (T, n, n) matrices -> (T, m) complex.

    Uses m-2 batched multiplications; the top power is contracted directly
    as tr(X^{m-1} X) without forming X^m.
    """
    X = np.asarray(X, dtype=complex)
    T, n, _ = X.shape
    W = np.empty((T, m), dtype=complex)
    W[:, 0] = np.einsum("tii->t", X)
    if m >= 2:
        P = X
        for p in range(2, m):
            P = P @ X
            W[:, p - 1] = np.einsum("tii->t", P)
        # top power contracted without forming X^m; P = X^{m-1} here
        W[:, m - 1] = np.einsum("tij,tji->t", P, X)
    if not np.all(np.isfinite(W.view(float))):
        raise NumericOverflowError("non-finite trace values; input norm too large")
    return W


def center_z(
    W: TraceVector,
    means: MeanPrediction,
    n: int,
    kind: SpaceKind | str,
    norm_sq: float | None = None,
) -> CenteredVector:
    """Recenter W into Z per the fluctuation theorems.

    Y_2 = ||X||^2 - n is taken from ``norm_sq`` when the caller has the
    matrix at hand; otherwise it is recovered from W_2 (equal to ||X||^2 for
    Hermitian / real symmetric X, to -||X||^2 for real antisymmetric X).
    Index 2 is excluded; real antisymmetric keeps even p >= 4 with the
    (-1)^{p/2} sign on the correction term.
    """
    kind = SpaceKind(kind)
    if kind in (SpaceKind.GENERAL_COMPLEX, SpaceKind.GENERAL_REAL):
        raise UnsupportedSpaceError(
            "general matrices use W - E W directly; no Y_2 correction applies"
        )
    if kind is SpaceKind.ANTIHERMITIAN_COMPLEX:
        raise UnsupportedSpaceError(
            "antihermitian statistics transport from the Hermitian case via i^p"
        )
    if means.kind is not kind or means.n != n:
        raise ShapeMismatchError("mean prediction was built for a different ensemble")
    if norm_sq is None:
        w2 = W[2].real
        norm_sq = -w2 if kind is SpaceKind.ANTISYMMETRIC_REAL else w2
    y2 = norm_sq - n

    from .theory import covariance_index_set

    idx = covariance_index_set(kind, W.m)
    out = []
    for p in idx:
        mu = float(means[p])
        coeff = p * mu / (2.0 * n)
        if kind is SpaceKind.ANTISYMMETRIC_REAL:
            coeff *= (-1) ** (p // 2)
        out.append(W[p].real - mu - coeff * y2)
    return CenteredVector(index_set=idx, values=tuple(out), y2=y2)


@dataclass(frozen=True)
class PolynomialTestFunction:
    """Analytic polynomial g(z) = sum_j coeffs[j] z^j."""

    coeffs: tuple[complex, ...]

    @property
    def degree(self) -> int:
        deg = 0
        for j, a in enumerate(self.coeffs):
            if a != 0:
                deg = j
        return deg

    def __call__(self, z: complex) -> complex:
        acc = 0.0 + 0.0j
        for a in reversed(self.coeffs):
            acc = acc * z + a
        return acc


def linear_statistic(W: TraceVector, g: PolynomialTestFunction, n: int) -> complex:
    """tr g(X) - n g(0) = sum_{j>=1} a_j W_j for an analytic polynomial g."""
    if g.degree > W.m:
        raise DegreeOverflowError(f"polynomial degree {g.degree} exceeds trace length {W.m}")
    acc = 0.0 + 0.0j
    for j in range(1, len(g.coeffs)):
        acc += g.coeffs[j] * W[j]
    return complex(acc)


def norm_squared(X: np.ndarray) -> float:
    """||X||^2 = tr(X X*), for callers building Y_2 from the matrix."""
    return hs_norm(X) ** 2
