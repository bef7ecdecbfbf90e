"""The six matrix subspaces, their orthonormal bases and coordinate maps.

Every space is a real-linear subspace V of the n x n complex matrices,
equipped with the real inner product <A, B> = Re tr(A B*).  Matrices are
always stored as dense complex arrays, including the real-valued kinds.

Basis ordering is canonical and fixed: diagonal-type elements first, then
off-diagonal families in lexicographic (j, k) order, with imaginary copies
after real copies.  Coordinate vectors produced here are therefore
reproducible across runs and platforms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import InvalidDimensionError, NotInSubspaceError, ShapeMismatchError

_SQRT2 = np.sqrt(2.0)

# Default relative tolerance for subspace-membership checks.
MEMBERSHIP_RTOL = 1e-9


class SpaceKind(str, enum.Enum):
    """Tags for the six supported matrix subspaces."""

    GENERAL_COMPLEX = "gl_c"
    GENERAL_REAL = "gl_r"
    SYMMETRIC_REAL = "sym_r"
    HERMITIAN_COMPLEX = "herm_c"
    ANTISYMMETRIC_REAL = "asym_r"
    ANTIHERMITIAN_COMPLEX = "antiherm_c"

    def dimension(self, n: int) -> int:
        """Real dimension d of the subspace for matrix side n."""
        if n < 1:
            raise InvalidDimensionError(f"matrix side must be positive, got {n}")
        return {
            SpaceKind.GENERAL_COMPLEX: 2 * n * n,
            SpaceKind.GENERAL_REAL: n * n,
            SpaceKind.SYMMETRIC_REAL: n * (n + 1) // 2,
            SpaceKind.HERMITIAN_COMPLEX: n * n,
            SpaceKind.ANTISYMMETRIC_REAL: n * (n - 1) // 2,
            SpaceKind.ANTIHERMITIAN_COMPLEX: n * n,
        }[self]

    @property
    def real_valued(self) -> bool:
        """True if all matrices in the space have real entries."""
        return self in (
            SpaceKind.GENERAL_REAL,
            SpaceKind.SYMMETRIC_REAL,
            SpaceKind.ANTISYMMETRIC_REAL,
        )

    @property
    def real_traces(self) -> bool:
        """True if tr(X^p) is real for every X in the space and every p."""
        return self is not SpaceKind.GENERAL_COMPLEX and self is not SpaceKind.ANTIHERMITIAN_COMPLEX


def _pair_index(n: int) -> dict[tuple[int, int], int]:
    """Position of each pair (j, k), j < k, in lexicographic order."""
    out = {}
    pos = 0
    for j in range(n):
        for k in range(j + 1, n):
            out[(j, k)] = pos
            pos += 1
    return out


def _offdiag_index(n: int) -> dict[tuple[int, int], int]:
    """Position of each ordered pair (j, k), j != k, in lexicographic order."""
    out = {}
    pos = 0
    for j in range(n):
        for k in range(n):
            if j != k:
                out[(j, k)] = pos
                pos += 1
    return out


@dataclass(frozen=True)
class _EmbedMap:
    """Gather representation of the linear map coords -> matrix entries.

    Entry e (flattened row-major) equals
    ``coeff1[e] * coords[src1[e]] + coeff2[e] * coords[src2[e]]``.
    """

    src1: np.ndarray
    coeff1: np.ndarray
    src2: np.ndarray
    coeff2: np.ndarray


@dataclass(frozen=True)
class _ExtractMap:
    """Gather representation of coordinate extraction, coord_a = Re tr(M B_a*).

    Coordinate a reads up to two matrix entries:
    ``w1re*Re(M[e1]) + w1im*Im(M[e1]) + w2re*Re(M[e2]) + w2im*Im(M[e2])``.
    """

    e1: np.ndarray
    w1re: np.ndarray
    w1im: np.ndarray
    e2: np.ndarray
    w2re: np.ndarray
    w2im: np.ndarray


@dataclass(frozen=True)
class MatrixSpace:
    """One of the six subspaces, with its canonical orthonormal basis.

    Attributes
    ----------
    kind : SpaceKind
    n : int
        Matrix side; at least 2.
    d : int
        Real dimension of the space, len(basis).
    """

    kind: SpaceKind
    n: int
    d: int

    @cached_property
    def _embed_map(self) -> _EmbedMap:
        return _build_embed_map(self.kind, self.n)

    @cached_property
    def _extract_map(self) -> _ExtractMap:
        return _build_extract_map(self.kind, self.n)

    @cached_property
    def basis(self) -> np.ndarray:
        """Dense basis stack of shape (d, n, n), in canonical order."""
        B = self.embed_batch(np.eye(self.d))
        B.setflags(write=False)
        return B

    def basis_labels(self) -> list[str]:
        """Human-readable labels of the basis elements, 1-based indices."""
        return _basis_labels(self.kind, self.n)

    def embed(self, coords: np.ndarray) -> np.ndarray:
        """Map a length-d real coordinate vector to its matrix in V."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.d,):
            raise ShapeMismatchError(
                f"expected {self.d} coordinates for {self.kind.value} n={self.n}, "
                f"got shape {coords.shape}"
            )
        return self.embed_batch(coords[None, :])[0]

    def embed_batch(self, coords: np.ndarray) -> np.ndarray:
        """Vectorized embed: (T, d) coordinates -> (T, n, n) matrices."""
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != self.d:
            raise ShapeMismatchError(f"expected (T, {self.d}) coordinates, got {coords.shape}")
        m = self._embed_map
        flat = coords[:, m.src1] * m.coeff1 + coords[:, m.src2] * m.coeff2
        return flat.reshape(coords.shape[0], self.n, self.n)

    def extract(self, M: np.ndarray, check: bool = True, rtol: float = MEMBERSHIP_RTOL) -> np.ndarray:
        """Coordinates of M in the canonical basis, coord_a = Re tr(M B_a*).

        With ``check=True`` (default) the component of M orthogonal to V must
        not exceed ``rtol * ||M||``; otherwise NotInSubspaceError is raised.
        """
        M = np.asarray(M, dtype=complex)
        if M.shape != (self.n, self.n):
            raise ShapeMismatchError(f"expected a {self.n}x{self.n} matrix, got {M.shape}")
        m = self._extract_map
        flat_re = M.real.reshape(-1)
        flat_im = M.imag.reshape(-1)
        coords = (
            m.w1re * flat_re[m.e1]
            + m.w1im * flat_im[m.e1]
            + m.w2re * flat_re[m.e2]
            + m.w2im * flat_im[m.e2]
        )
        if check:
            residual = hs_norm(M - self.embed(coords))
            scale = max(hs_norm(M), 1e-300)
            if residual > rtol * scale:
                raise NotInSubspaceError(
                    f"matrix lies outside {self.kind.value}: relative residual "
                    f"{residual / scale:.3e} exceeds {rtol:.1e}"
                )
        return coords

    def contains(self, M: np.ndarray, rtol: float = MEMBERSHIP_RTOL) -> bool:
        """True if M lies in V within the membership tolerance."""
        try:
            self.extract(M, check=True, rtol=rtol)
        except NotInSubspaceError:
            return False
        return True

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        """Gaussian random matrix in V (iid standard normal coordinates)."""
        return self.embed(scale * rng.standard_normal(self.d))

    def channel_sum(self, A: np.ndarray) -> np.ndarray:
        """Direct evaluation of sum_a B_a A B_a over the whole basis.

        Valid for any square complex A; closed forms for particular kinds are
        used only as test oracles, never here.
        """
        A = np.asarray(A, dtype=complex)
        if A.shape != (self.n, self.n):
            raise ShapeMismatchError(f"expected a {self.n}x{self.n} matrix, got {A.shape}")
        B = self.basis
        return np.einsum("aij,jk,akl->il", B, A, B, optimize=True)

    def basis_traces(self, M: np.ndarray) -> np.ndarray:
        """Vector of tr(M B_a) over the basis, no conjugation."""
        M = np.asarray(M, dtype=complex)
        return np.einsum("aij,ji->a", self.basis, M, optimize=True)


def build_space(kind: SpaceKind | str, n: int) -> MatrixSpace:
    """Construct the subspace of side n with its canonical basis.

    Raises InvalidDimensionError for n < 2.
    """
    kind = SpaceKind(kind)
    if n < 2:
        raise InvalidDimensionError(f"matrix side must be at least 2, got {n}")
    return _build_space_cached(kind, n)


@lru_cache(maxsize=None)
def _build_space_cached(kind: SpaceKind, n: int) -> MatrixSpace:
    return MatrixSpace(kind=kind, n=n, d=kind.dimension(n))


def inner_product(A: np.ndarray, B: np.ndarray) -> float:
    """Real Hilbert-Schmidt inner product Re tr(A B*)."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ShapeMismatchError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.real(np.vdot(B, A)))


def hs_norm(A: np.ndarray) -> float:
    """Hilbert-Schmidt norm sqrt(tr(A A*))."""
    return float(np.linalg.norm(np.asarray(A)))


def _build_embed_map(kind: SpaceKind, n: int) -> _EmbedMap:
    d = kind.dimension(n)
    nn = n * n
    src1 = np.zeros(nn, dtype=np.intp)
    c1 = np.zeros(nn, dtype=complex)
    src2 = np.zeros(nn, dtype=np.intp)
    c2 = np.zeros(nn, dtype=complex)

    def entry(j: int, k: int) -> int:
        return j * n + k

    pair = _pair_index(n)
    off = _offdiag_index(n)
    t = n * (n - 1) // 2
    inv = 1.0 / _SQRT2

    if kind is SpaceKind.GENERAL_COMPLEX:
        # coords: [E_jj] [E_jk offdiag] [iE_jj] [iE_jk offdiag]
        for j in range(n):
            e = entry(j, j)
            src1[e], c1[e] = j, 1.0
            src2[e], c2[e] = nn + j, 1.0j
        for (j, k), pos in off.items():
            e = entry(j, k)
            src1[e], c1[e] = n + pos, 1.0
            src2[e], c2[e] = nn + n + pos, 1.0j
    elif kind is SpaceKind.GENERAL_REAL:
        for j in range(n):
            e = entry(j, j)
            src1[e], c1[e] = j, 1.0
        for (j, k), pos in off.items():
            e = entry(j, k)
            src1[e], c1[e] = n + pos, 1.0
    elif kind is SpaceKind.SYMMETRIC_REAL:
        for j in range(n):
            e = entry(j, j)
            src1[e], c1[e] = j, 1.0
        for (j, k), pos in pair.items():
            src1[entry(j, k)], c1[entry(j, k)] = n + pos, inv
            src1[entry(k, j)], c1[entry(k, j)] = n + pos, inv
    elif kind is SpaceKind.HERMITIAN_COMPLEX:
        # coords: [E_jj] [F_jk] [iG_jk]
        for j in range(n):
            e = entry(j, j)
            src1[e], c1[e] = j, 1.0
        for (j, k), pos in pair.items():
            e = entry(j, k)
            src1[e], c1[e] = n + pos, inv
            src2[e], c2[e] = n + t + pos, 1.0j * inv
            e = entry(k, j)
            src1[e], c1[e] = n + pos, inv
            src2[e], c2[e] = n + t + pos, -1.0j * inv
    elif kind is SpaceKind.ANTISYMMETRIC_REAL:
        for (j, k), pos in pair.items():
            src1[entry(j, k)], c1[entry(j, k)] = pos, inv
            src1[entry(k, j)], c1[entry(k, j)] = pos, -inv
    elif kind is SpaceKind.ANTIHERMITIAN_COMPLEX:
        # coords: [iE_jj] [G_jk] [iF_jk]
        for j in range(n):
            e = entry(j, j)
            src1[e], c1[e] = j, 1.0j
        for (j, k), pos in pair.items():
            e = entry(j, k)
            src1[e], c1[e] = n + pos, inv
            src2[e], c2[e] = n + t + pos, 1.0j * inv
            e = entry(k, j)
            src1[e], c1[e] = n + pos, -inv
            src2[e], c2[e] = n + t + pos, 1.0j * inv
    else:  # pragma: no cover
        raise InvalidDimensionError(f"unknown kind {kind}")

    assert d == kind.dimension(n)
    return _EmbedMap(src1=src1, coeff1=c1, src2=src2, coeff2=c2)


def _build_extract_map(kind: SpaceKind, n: int) -> _ExtractMap:
    d = kind.dimension(n)
    e1 = np.zeros(d, dtype=np.intp)
    w1re = np.zeros(d)
    w1im = np.zeros(d)
    e2 = np.zeros(d, dtype=np.intp)
    w2re = np.zeros(d)
    w2im = np.zeros(d)

    def entry(j: int, k: int) -> int:
        return j * n + k

    pair = _pair_index(n)
    off = _offdiag_index(n)
    t = n * (n - 1) // 2
    inv = 1.0 / _SQRT2

    if kind is SpaceKind.GENERAL_COMPLEX:
        for j in range(n):
            e1[j], w1re[j] = entry(j, j), 1.0
            e1[n * n + j], w1im[n * n + j] = entry(j, j), 1.0
        for (j, k), pos in off.items():
            e1[n + pos], w1re[n + pos] = entry(j, k), 1.0
            a = n * n + n + pos
            e1[a], w1im[a] = entry(j, k), 1.0
    elif kind is SpaceKind.GENERAL_REAL:
        for j in range(n):
            e1[j], w1re[j] = entry(j, j), 1.0
        for (j, k), pos in off.items():
            e1[n + pos], w1re[n + pos] = entry(j, k), 1.0
    elif kind is SpaceKind.SYMMETRIC_REAL:
        for j in range(n):
            e1[j], w1re[j] = entry(j, j), 1.0
        for (j, k), pos in pair.items():
            a = n + pos
            e1[a], w1re[a] = entry(j, k), inv
            e2[a], w2re[a] = entry(k, j), inv
    elif kind is SpaceKind.HERMITIAN_COMPLEX:
        for j in range(n):
            e1[j], w1re[j] = entry(j, j), 1.0
        for (j, k), pos in pair.items():
            a = n + pos
            e1[a], w1re[a] = entry(j, k), inv
            e2[a], w2re[a] = entry(k, j), inv
            a = n + t + pos
            e1[a], w1im[a] = entry(j, k), inv
            e2[a], w2im[a] = entry(k, j), -inv
    elif kind is SpaceKind.ANTISYMMETRIC_REAL:
        for (j, k), pos in pair.items():
            e1[pos], w1re[pos] = entry(j, k), inv
            e2[pos], w2re[pos] = entry(k, j), -inv
    elif kind is SpaceKind.ANTIHERMITIAN_COMPLEX:
        for j in range(n):
            e1[j], w1im[j] = entry(j, j), 1.0
        for (j, k), pos in pair.items():
            a = n + pos
            e1[a], w1re[a] = entry(j, k), inv
            e2[a], w2re[a] = entry(k, j), -inv
            a = n + t + pos
            e1[a], w1im[a] = entry(j, k), inv
            e2[a], w2im[a] = entry(k, j), inv
    else:  # pragma: no cover
        raise InvalidDimensionError(f"unknown kind {kind}")

    return _ExtractMap(e1=e1, w1re=w1re, w1im=w1im, e2=e2, w2re=w2re, w2im=w2im)


def _basis_labels(kind: SpaceKind, n: int) -> list[str]:
    diag = [f"E{j + 1}{j + 1}" for j in range(n)]
    idiag = [f"iE{j + 1}{j + 1}" for j in range(n)]
    off = [f"E{j + 1}{k + 1}" for j in range(n) for k in range(n) if j != k]
    ioff = ["i" + s for s in off]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    F = [f"F{j + 1}{k + 1}" for j, k in pairs]
    G = [f"G{j + 1}{k + 1}" for j, k in pairs]
    return {
        SpaceKind.GENERAL_COMPLEX: diag + off + idiag + ioff,
        SpaceKind.GENERAL_REAL: diag + off,
        SpaceKind.SYMMETRIC_REAL: diag + F,
        SpaceKind.HERMITIAN_COMPLEX: diag + F + ["i" + s for s in G],
        SpaceKind.ANTISYMMETRIC_REAL: G,
        SpaceKind.ANTIHERMITIAN_COMPLEX: idiag + G + ["i" + s for s in F],
    }[kind]
