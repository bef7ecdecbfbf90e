"""Exact ground truth: sphere monomial moments and trace-word expectations.

All arithmetic is big-integer rational; floats never enter.  The matrix
entries are expanded in the canonical real coordinates of the space, the
expectation of each surviving monomial is the standard moment of a uniform
point on the unit sphere in R^d,

    E prod_i u_i^{2 k_i} = prod_i (2 k_i - 1)!! / prod_{j=0}^{K-1} (d + 2 j),

scaled by n^K for the radius-sqrt(n) sphere (K = sum k_i; any odd exponent
gives zero).
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from functools import lru_cache

from .errors import RmtLabError, SizeLimitError
from .spaces import SpaceKind

MAX_EXACT_N = 4
MAX_WORD_LEN = 6
MAX_PARSE_LEN = 8
MAX_TOTAL_DEGREE = 12


def parse_trace_word(word) -> tuple[bool, ...]:
    """Parse "XX*X" or an iterable of "X"/"X*" tokens; True marks a star."""
    if isinstance(word, str):
        tokens: list[bool] = []
        i = 0
        while i < len(word):
            if word[i] != "X":
                raise ValueError(f"bad trace word {word!r} at position {i}")
            if i + 1 < len(word) and word[i + 1] == "*":
                tokens.append(True)
                i += 2
            else:
                tokens.append(False)
                i += 1
        out = tuple(tokens)
    else:
        mapping = {"X": False, "X*": True}
        try:
            out = tuple(mapping[t] for t in word)
        except KeyError as exc:
            raise ValueError(f"bad trace word token {exc.args[0]!r}") from exc
    if not out:
        raise ValueError("trace word must be nonempty")
    if len(out) > MAX_PARSE_LEN:
        raise SizeLimitError(f"trace word length {len(out)} exceeds {MAX_PARSE_LEN}")
    return out


def word_text(word: tuple[bool, ...]) -> str:
    return "".join("X*" if star else "X" for star in word)


def sphere_monomial_moment(d: int, exponents) -> Fraction:
    """E prod u_i^{e_i} for u uniform on the unit sphere in R^d, exact.

    ``exponents`` is a sequence (or index->exponent mapping) of raw
    coordinate exponents; any odd exponent makes the moment zero.
    """
    if d < 2:
        raise ValueError(f"sphere dimension must be at least 2, got {d}")
    if isinstance(exponents, dict):
        exps = [int(e) for e in exponents.values()]
    else:
        exps = [int(e) for e in exponents]
    if any(e < 0 for e in exps):
        raise ValueError("exponents must be nonnegative")
    if any(e % 2 == 1 for e in exps):
        return Fraction(0)
    ks = [e // 2 for e in exps if e > 0]
    K = sum(ks)
    if K > MAX_TOTAL_DEGREE:
        raise SizeLimitError(f"total degree {2 * K} exceeds limit {2 * MAX_TOTAL_DEGREE}")
    num = 1
    for k in ks:
        for odd in range(1, 2 * k, 2):
            num *= odd
    den = 1
    for j in range(K):
        den *= d + 2 * j
    return Fraction(num, den)


# Entry decompositions: entry (j, k) of X as an exact linear combination of
# real coordinates.  Terms are (coord, re, im, half) with the coefficient
# (re + i*im) / sqrt(2)^half; re, im in {-1, 0, 1}, half in {0, 1}.


@lru_cache(maxsize=None)
def _entry_terms(kind: SpaceKind, n: int) -> tuple[tuple[tuple[int, int, int, int], ...], ...]:
    pair = {}
    pos = 0
    for j in range(n):
        for k in range(j + 1, n):
            pair[(j, k)] = pos
            pos += 1
    off = {}
    pos = 0
    for j in range(n):
        for k in range(n):
            if j != k:
                off[(j, k)] = pos
                pos += 1
    t = n * (n - 1) // 2
    nn = n * n
    table: list[tuple[tuple[int, int, int, int], ...]] = []
    for j in range(n):
        for k in range(n):
            if kind is SpaceKind.GENERAL_COMPLEX:
                base = j if j == k else n + off[(j, k)]
                terms = ((base, 1, 0, 0), (nn + base, 0, 1, 0))
            elif kind is SpaceKind.GENERAL_REAL:
                base = j if j == k else n + off[(j, k)]
                terms = ((base, 1, 0, 0),)
            elif kind is SpaceKind.SYMMETRIC_REAL:
                if j == k:
                    terms = ((j, 1, 0, 0),)
                else:
                    terms = ((n + pair[(min(j, k), max(j, k))], 1, 0, 1),)
            elif kind is SpaceKind.HERMITIAN_COMPLEX:
                if j == k:
                    terms = ((j, 1, 0, 0),)
                elif j < k:
                    terms = ((n + pair[(j, k)], 1, 0, 1), (n + t + pair[(j, k)], 0, 1, 1))
                else:
                    terms = ((n + pair[(k, j)], 1, 0, 1), (n + t + pair[(k, j)], 0, -1, 1))
            elif kind is SpaceKind.ANTISYMMETRIC_REAL:
                if j == k:
                    terms = ()
                elif j < k:
                    terms = ((pair[(j, k)], 1, 0, 1),)
                else:
                    terms = ((pair[(k, j)], -1, 0, 1),)
            elif kind is SpaceKind.ANTIHERMITIAN_COMPLEX:
                if j == k:
                    terms = ((j, 0, 1, 0),)
                elif j < k:
                    terms = ((n + pair[(j, k)], 1, 0, 1), (n + t + pair[(j, k)], 0, 1, 1))
                else:
                    terms = ((n + pair[(k, j)], -1, 0, 1), (n + t + pair[(k, j)], 0, 1, 1))
            else:  # pragma: no cover
                raise ValueError(f"unknown kind {kind}")
            table.append(terms)
    return tuple(table)


def _half_coord_start(kind: SpaceKind, n: int) -> int:
    """Coordinates at or beyond this index carry a 1/sqrt(2) per occurrence."""
    if kind in (SpaceKind.GENERAL_COMPLEX, SpaceKind.GENERAL_REAL):
        return kind.dimension(n)  # none
    if kind is SpaceKind.ANTISYMMETRIC_REAL:
        return 0
    return n


def _index_cycles(n: int, length: int):
    """All index tuples of a trace cycle of the given length."""
    if length == 0:
        yield ()
        return
    idx = [0] * length
    while True:
        yield tuple(idx)
        pos = length - 1
        while pos >= 0 and idx[pos] == n - 1:
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            return
        idx[pos] += 1


def _accumulate_word(kind: SpaceKind, n: int, words, sink: dict) -> None:
    """Expand E[prod_w tr(word_w(X))] into monomials, adding into ``sink``."""
    entry_terms = _entry_terms(kind, n)

    def word_factors(word, tup):
        out = []
        L = len(word)
        for pos, star in enumerate(word):
            a, b = tup[pos], tup[(pos + 1) % L]
            if star:
                # (X*)_{ab} = conj(X_{ba})
                terms = tuple((c, re, -im, half) for (c, re, im, half) in entry_terms[b * n + a])
            else:
                terms = entry_terms[a * n + b]
            out.append(terms)
        return out

    def expand(factors):
        partial = [(1, 0, ())]  # (re, im, sorted coord multiset as tuple)
        for terms in factors:
            if not terms:
                return
            nxt = []
            for re0, im0, mono in partial:
                for coord, re1, im1, _half in terms:
                    re = re0 * re1 - im0 * im1
                    im = re0 * im1 + im0 * re1
                    if re == 0 and im == 0:
                        continue
                    nxt.append((re, im, mono + (coord,)))
            partial = nxt
            if not partial:
                return
        for re, im, mono in partial:
            key = tuple(sorted(mono))
            acc = sink.get(key)
            if acc is None:
                sink[key] = [re, im]
            else:
                acc[0] += re
                acc[1] += im

    nonempty = [w for w in words if len(w) > 0]

    def rec(widx, tuples):
        if widx == len(nonempty):
            factors = []
            for w, tup in zip(nonempty, tuples):
                factors.extend(word_factors(w, tup))
            expand(factors)
            return
        for tup in _index_cycles(n, len(nonempty[widx])):
            rec(widx + 1, tuples + [tup])

    rec(0, [])


def _evaluate(kind: SpaceKind, n: int, sink: dict, scale: int) -> tuple[Fraction, Fraction]:
    d = kind.dimension(n)
    start = _half_coord_start(kind, n)
    total_re = Fraction(0)
    total_im = Fraction(0)
    for mono, (re, im) in sink.items():
        if re == 0 and im == 0:
            continue
        exps = defaultdict(int)
        for coord in mono:
            exps[coord] += 1
        if any(e % 2 for e in exps.values()):
            continue
        halves = sum(e for c, e in exps.items() if c >= start)
        if halves % 2:  # cannot happen with even exponents
            raise RmtLabError("odd sqrt(2) power on an even monomial")
        K = sum(exps.values()) // 2
        weight = (
            sphere_monomial_moment(d, dict(exps))
            * Fraction(1, 2 ** (halves // 2))
            * Fraction(n) ** K
            * scale
        )
        total_re += re * weight
        total_im += im * weight
    return total_re, total_im


def _trace_product_moment(kind: SpaceKind, n: int, words, weight_norm_sq: bool) -> Fraction:
    """Exact E[prod_w tr(word_w(X))] on the radius-sqrt(n) sphere of V."""
    kind = SpaceKind(kind)
    if n < 2 or n > MAX_EXACT_N:
        raise SizeLimitError(f"exact oracle supports 2 <= n <= {MAX_EXACT_N}, got {n}")
    words = [w if isinstance(w, tuple) else (parse_trace_word(w) if w else ()) for w in words]
    total_len = sum(len(w) for w in words)
    if total_len > MAX_WORD_LEN:
        raise SizeLimitError(f"total word length {total_len} exceeds {MAX_WORD_LEN}")
    sink: dict = {}
    _accumulate_word(kind, n, words, sink)
    empties = sum(1 for w in words if len(w) == 0)
    re, im = _evaluate(kind, n, sink, n**empties)  # tr(X^0) = n per empty word
    if im != 0:
        raise RmtLabError(f"unexpected imaginary expectation {im} for words {words}")
    value = re
    if weight_norm_sq:
        value *= n  # ||X||^2 is the constant n on the sphere
    return value


def exact_trace_moment(kind: SpaceKind | str, n: int, word, weight_norm_sq: bool = False) -> Fraction:
    """Exact E[tr(word(X))] (optionally times ||X||^2 = n) on the sphere.

    The word is a string such as "XX*X*" or a sequence of "X"/"X*" tokens.
    Limits: n <= 4, word length <= 6.
    """
    return _trace_product_moment(SpaceKind(kind), n, [word], weight_norm_sq)


def trace_pair_moment(kind: SpaceKind | str, n: int, word_a, word_b) -> Fraction:
    """Exact E[tr(word_a(X)) tr(word_b(X))] on the sphere; tr(X^0) = n."""
    return _trace_product_moment(SpaceKind(kind), n, [word_a, word_b], False)


def mean_recursion_check(kind: SpaceKind | str, n: int, p: int) -> Fraction:
    """Exact E W_p on the Hermitian sphere, with its recursion verified.

    Computes E W_p and checks (p + d - 2) E W_p = n sum_l E[W_l W_{p-2-l}]
    exactly; raises if the identity fails.  Supports n <= 4, p <= 6.
    """
    kind = SpaceKind(kind)
    if kind is not SpaceKind.HERMITIAN_COMPLEX:
        raise SizeLimitError("mean recursion check is defined for the Hermitian sphere")
    if p < 1 or p > MAX_WORD_LEN:
        raise SizeLimitError(f"p must lie in 1..{MAX_WORD_LEN}, got {p}")
    d = kind.dimension(n)
    lhs = _trace_product_moment(kind, n, ["X" * p], False) * (p + d - 2)
    if p < 2:
        rhs = Fraction(0)
    else:
        rhs = Fraction(0)
        for ell in range(p - 1):
            rhs += _trace_product_moment(kind, n, ["X" * ell, "X" * (p - 2 - ell)], False)
        rhs *= n
    if lhs != rhs:
        raise RmtLabError(
            f"mean recursion failed at (herm_c, n={n}, p={p}): "
            f"(p+d-2) E W_p = {lhs} but n sum E[W_l W_(p-2-l)] = {rhs}"
        )
    return _trace_product_moment(kind, n, ["X" * p], False)
