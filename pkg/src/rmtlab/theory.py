"""Predicted means and limiting covariances for traces of powers.

Everything here is exact: means are integers, covariance matrices are
built and solved in rational arithmetic (fractions.Fraction), and floats
appear only when a caller converts at the comparison boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError, InvalidDimensionError, UnsupportedSpaceError
from .spaces import SpaceKind

# Exact integer arithmetic is safe well beyond this, but the published
# contract caps the table.
MAX_CATALAN_INDEX = 30


def catalan(r: int) -> int:
    """r-th Catalan number binom(2r, r) / (r + 1), exact."""
    if r < 0:
        raise ValueError(f"Catalan index must be nonnegative, got {r}")
    if r > MAX_CATALAN_INDEX:
        raise ValueError(f"Catalan index {r} exceeds supported bound {MAX_CATALAN_INDEX}")
    return math.comb(2 * r, r) // (r + 1)


@dataclass(frozen=True)
class CatalanTable:
    """Exact table C_0..C_m with the convolution recurrence available."""

    m: int
    values: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(catalan(r) for r in range(self.m + 1)))

    def __getitem__(self, r: int) -> int:
        return self.values[r]

    def recurrence_holds(self) -> bool:
        """C_r = sum_k C_k C_{r-1-k}, checked exactly for all r <= m."""
        v = self.values
        return all(v[r] == sum(v[k] * v[r - 1 - k] for k in range(r)) for r in range(1, self.m + 1))


@dataclass(frozen=True)
class MeanPrediction:
    """Leading-order predicted means mu_p of tr(X^p), p = 1..m."""

    kind: SpaceKind
    n: int
    m: int
    mu: tuple[Fraction, ...]

    def __getitem__(self, p: int) -> Fraction:
        if not 1 <= p <= self.m:
            raise KeyError(f"power {p} outside 1..{self.m}")
        return self.mu[p - 1]

    def as_floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.mu])


def predicted_means(kind: SpaceKind | str, n: int, m: int) -> MeanPrediction:
    """Leading-order E tr(X^p) for p = 1..m under E||X||^2 = n.

    Odd powers have mean zero in every space.  Even powers p = 2r give 0
    (general complex), 1 (general real), n C_r (Hermitian / real symmetric)
    and (-1)^r n C_r (real antisymmetric / antihermitian).
    """
    kind = SpaceKind(kind)
    if n < 2:
        raise InvalidDimensionError(f"n must be at least 2, got {n}")
    if m < 3:
        raise ConfigError(f"m must be at least 3, got {m}")
    mu = []
    for p in range(1, m + 1):
        if p % 2 == 1:
            mu.append(Fraction(0))
            continue
        r = p // 2
        if kind is SpaceKind.GENERAL_COMPLEX:
            mu.append(Fraction(0))
        elif kind is SpaceKind.GENERAL_REAL:
            mu.append(Fraction(1))
        elif kind in (SpaceKind.HERMITIAN_COMPLEX, SpaceKind.SYMMETRIC_REAL):
            mu.append(Fraction(n * catalan(r)))
        else:
            mu.append(Fraction((-1) ** r * n * catalan(r)))
    return MeanPrediction(kind=kind, n=n, m=m, mu=tuple(mu))


def covariance_index_set(kind: SpaceKind, m: int) -> tuple[int, ...]:
    """Indices of the limiting covariance for the given space.

    Ginibre-type spaces use 1..m; Hermitian / real symmetric drop index 2;
    real antisymmetric keeps even indices from 4.
    """
    kind = SpaceKind(kind)
    if kind in (SpaceKind.GENERAL_COMPLEX, SpaceKind.GENERAL_REAL):
        return tuple(range(1, m + 1))
    if kind in (SpaceKind.HERMITIAN_COMPLEX, SpaceKind.SYMMETRIC_REAL):
        return tuple(p for p in range(1, m + 1) if p != 2)
    if kind is SpaceKind.ANTISYMMETRIC_REAL:
        return tuple(p for p in range(4, m + 1, 2))
    raise UnsupportedSpaceError(
        "no covariance model for antihermitian matrices; transport the "
        "Hermitian model via tr((iX)^p) = i^p tr(X^p)"
    )


def default_beta_factor(kind: SpaceKind) -> Fraction:
    """Scale applied to the quadratic-form matrix B before solving.

    1/2 for Hermitian (matches the proof's per-index normalization and the
    GUE variance Var W_1 = 1), 1 elsewhere (matches GOE Var W_1 = 2 and the
    remaining statements as printed).
    """
    if kind is SpaceKind.HERMITIAN_COMPLEX:
        return Fraction(1, 2)
    return Fraction(1)


@dataclass(frozen=True)
class CovarianceModel:
    """Exact rational covariance model Sigma = A^{-1} (beta * B).

    A is lower triangular over ``index_set`` in its natural order, so Sigma
    is obtained by exact forward substitution.  ``sigma`` satisfies
    A @ sigma == beta_factor * B identically in rational arithmetic.
    """

    kind: SpaceKind
    m: int
    index_set: tuple[int, ...]
    A: tuple[tuple[Fraction, ...], ...]
    B: tuple[tuple[Fraction, ...], ...]
    beta_factor: Fraction
    sigma: tuple[tuple[Fraction, ...], ...]

    def sigma_floats(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.sigma])

    def sigma_entry(self, p: int, q: int) -> Fraction:
        i = self.index_set.index(p)
        j = self.index_set.index(q)
        return self.sigma[i][j]

    def is_symmetric(self) -> bool:
        """Exact rational symmetry test on Sigma."""
        k = len(self.index_set)
        return all(self.sigma[i][j] == self.sigma[j][i] for i in range(k) for j in range(i))


@dataclass(frozen=True)
class SigmaReport:
    symmetric: bool
    min_eigenvalue: float


def _forward_solve(A: list[list[Fraction]], B: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve A X = B exactly for lower-triangular A with nonzero diagonal."""
    k = len(A)
    X = [[Fraction(0)] * k for _ in range(k)]
    for col in range(k):
        for row in range(k):
            acc = B[row][col]
            for j in range(row):
                acc -= A[row][j] * X[j][col]
            X[row][col] = acc / A[row][row]
    return X


def covariance_model(
    kind: SpaceKind | str, m: int, beta_factor: Fraction | None = None
) -> CovarianceModel:
    """Exact limiting covariance of the recentered trace vector.

    Ginibre-type spaces give the diagonal Sigma with entry p at power p.
    Hermitian / real symmetric use the triangular system with entries
    a_pq = -2p C_{(p-2-q)/2} (q <= p-2, same parity), a_pp = p and
    b_pq = 2pq {C_{(p+q-2)/2} - C_{p/2}C_{q/2} (even), C_{(p+q-2)/2} (odd)},
    scaled by ``beta_factor``.  Real antisymmetric uses its own variant
    verbatim; whether that Sigma is symmetric is reported, not assumed.
    """
    kind = SpaceKind(kind)
    if m < 3:
        raise ConfigError(f"m must be at least 3, got {m}")
    if kind is SpaceKind.ANTISYMMETRIC_REAL and (m < 4 or m % 2 == 1):
        raise ConfigError(f"real antisymmetric requires even m >= 4, got {m}")
    if beta_factor is None:
        beta_factor = default_beta_factor(kind)
    idx = covariance_index_set(kind, m)
    k = len(idx)

    if kind in (SpaceKind.GENERAL_COMPLEX, SpaceKind.GENERAL_REAL):
        A = [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]
        B = [[Fraction(idx[i]) if i == j else Fraction(0) for j in range(k)] for i in range(k)]
        S = [[beta_factor * B[i][j] for j in range(k)] for i in range(k)]
        return CovarianceModel(
            kind=kind,
            m=m,
            index_set=idx,
            A=tuple(tuple(r) for r in A),
            B=tuple(tuple(r) for r in B),
            beta_factor=beta_factor,
            sigma=tuple(tuple(r) for r in S),
        )

    A = [[Fraction(0)] * k for _ in range(k)]
    B = [[Fraction(0)] * k for _ in range(k)]
    if kind in (SpaceKind.HERMITIAN_COMPLEX, SpaceKind.SYMMETRIC_REAL):
        for i, p in enumerate(idx):
            for j, q in enumerate(idx):
                if q == p:
                    A[i][j] = Fraction(p)
                elif 1 <= q <= p - 2 and (p - q) % 2 == 0:
                    A[i][j] = Fraction(-2 * p * catalan((p - 2 - q) // 2))
                if p % 2 == 0 and q % 2 == 0:
                    B[i][j] = Fraction(
                        2 * p * q * (catalan((p + q - 2) // 2) - catalan(p // 2) * catalan(q // 2))
                    )
                elif p % 2 == 1 and q % 2 == 1:
                    B[i][j] = Fraction(2 * p * q * catalan((p + q - 2) // 2))
    else:  # real antisymmetric, entries as printed
        for i, p in enumerate(idx):
            for j, q in enumerate(idx):
                if q == p:
                    A[i][j] = Fraction(1)
                elif 4 <= q <= p - 2:
                    A[i][j] = Fraction((-1) ** ((p - q) // 2) * 2 * catalan((p - 2 - q) // 2))
                B[i][j] = Fraction(
                    (-1) ** ((p + q) // 2)
                    * q
                    * (catalan((p + q - 2) // 2) - catalan(p // 2) * catalan(q // 2))
                )

    Bscaled = [[beta_factor * B[i][j] for j in range(k)] for i in range(k)]
    S = _forward_solve(A, Bscaled)
    return CovarianceModel(
        kind=kind,
        m=m,
        index_set=idx,
        A=tuple(tuple(r) for r in A),
        B=tuple(tuple(r) for r in B),
        beta_factor=beta_factor,
        sigma=tuple(tuple(r) for r in S),
    )


def check_sigma(model: CovarianceModel) -> SigmaReport:
    """Exact symmetry plus a floating lower bound on the spectrum of Sigma."""
    sym = model.is_symmetric()
    S = model.sigma_floats()
    Ssym = (S + S.T) / 2.0
    min_eig = float(np.linalg.eigvalsh(Ssym).min())
    return SigmaReport(symmetric=sym, min_eigenvalue=min_eig)


def corollary_covariance(g, h) -> complex:
    """Limiting covariance of polynomial statistics for general matrices.

    For g = sum a_p z^p and h = sum b_p z^p this is the unit-disk integral
    (1/pi) int g'(z) conj(h'(z)) d^2 z = sum_{p>=1} p a_p conj(b_p).
    """
    from .traces import PolynomialTestFunction

    ga = g.coeffs if isinstance(g, PolynomialTestFunction) else tuple(g)
    hb = h.coeffs if isinstance(h, PolynomialTestFunction) else tuple(h)
    acc = 0.0 + 0.0j
    for p in range(1, max(len(ga), len(hb))):
        a = ga[p] if p < len(ga) else 0.0
        b = hb[p] if p < len(hb) else 0.0
        acc += p * a * np.conj(b)
    return complex(acc)


def rational_table_text(rows: tuple[tuple[Fraction, ...], ...]) -> str:
    """Render a rational matrix as aligned "num/den" text."""
    cells = [[str(x) for x in row] for row in rows]
    width = max((len(c) for row in cells for c in row), default=1)
    return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)


def parse_rational(text: str | int | float | Fraction | None) -> Fraction | None:
    """Parse "p/q" / integer / Fraction into an exact Fraction."""
    if text is None:
        return None
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text).limit_denominator(10**9)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse rational {text!r}") from exc
