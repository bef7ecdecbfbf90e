"""Exchangeable-pair rotations and their conditional-expectation limits.

The pair is X_eps = (U R_eps U^T)(X) with U Haar orthogonal in coordinate
space; only the first two columns K of U enter.  With Q = K C K^T and
C = [[0, 1], [-1, 0]], the coordinate map is applied exactly:

    coords(X_eps) = coords + eps * Q coords + (sqrt(1 - eps^2) - 1) K K^T coords

with no series truncation.  The eps^2 coefficients of the conditional
moments of W_eps - W are estimated by Monte Carlo over K and compared to
their closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import TwoFrame, haar_two_frame_block
from .errors import RmtLabError, ShapeMismatchError
from .spaces import MatrixSpace, SpaceKind, hs_norm
from .traces import trace_powers_batch

ROTATION_GENERATOR = np.array([[0.0, 1.0], [-1.0, 0.0]])

DEFAULT_EPS_SCHEDULE = (1e-2, 5e-3, 2.5e-3)

_AGREE_RTOL = 1e-9


@dataclass(frozen=True)
class PairSample:
    """One exchangeable-pair draw (X, X_eps) at finite eps."""

    X: np.ndarray
    K: TwoFrame
    eps: float
    X_eps: np.ndarray


def rotate_coords(coords: np.ndarray, K: np.ndarray, eps: float) -> np.ndarray:
    """Apply the exact two-plane rotation to one coordinate vector."""
    u = K.T @ coords
    q = K @ (ROTATION_GENERATOR @ u)
    kk = K @ u
    return coords + eps * q + (math.sqrt(1.0 - eps * eps) - 1.0) * kk


def rotate_pair(space: MatrixSpace, X: np.ndarray, K: TwoFrame, eps: float) -> PairSample:
    """Exchangeable partner of X under the frame K at rotation size eps."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    if K.d != space.d:
        raise ShapeMismatchError(f"frame dimension {K.d} does not match space dimension {space.d}")
    coords = space.extract(np.asarray(X, dtype=complex))
    X_eps = space.embed(rotate_coords(coords, K.K, eps))
    return PairSample(X=np.asarray(X, dtype=complex), K=K, eps=eps, X_eps=X_eps)


def _powers(X: np.ndarray, top: int) -> list[np.ndarray]:
    """[I, X, X^2, ..., X^top]."""
    n = X.shape[0]
    out = [np.eye(n, dtype=complex), np.asarray(X, dtype=complex)]
    for _ in range(2, top + 1):
        out.append(out[-1] @ X)
    return out[: top + 1]


def drift_closed_form(space: MatrixSpace, X: np.ndarray, p: int) -> complex:
    """eps^2 coefficient of E[W_{eps,p} - W_p | X].

    Evaluates the generic form

        sum_l 2(l+1) ||X||^2 / (d(d-1)) tr(X^l S(X^{p-2-l}))
            - p(p+d-2)/(d(d-1)) W_p,

    with S the basis conjugation channel, and cross-checks the specialized
    per-space identity where one exists.  Both routes must agree to 1e-9
    relative.
    """
    X = np.asarray(X, dtype=complex)
    d = space.d
    denom = d * (d - 1.0)
    pw = _powers(X, max(p, 2))
    W = lambda k: complex(np.trace(pw[k])) if k >= 0 else 0.0  # noqa: E731
    norm_sq = hs_norm(X) ** 2

    acc = 0.0 + 0.0j
    acc_abs = 0.0
    for ell in range(p - 1):
        term = 2.0 * (ell + 1) * np.einsum("ij,ji->", pw[ell], space.channel_sum(pw[p - 2 - ell]))
        acc += term
        acc_abs += abs(term)
    generic = (norm_sq / denom) * acc - (p * (p + d - 2.0) / denom) * W(p)

    special = _drift_special(space, pw, norm_sq, p)
    if special is not None:
        # tolerance floor: size of the terms that cancel, not of the result
        term_scale = (norm_sq / denom) * acc_abs + (p * (p + d - 2.0) / denom) * abs(W(p))
        scale = max(abs(generic), abs(special), term_scale, 1e-30)
        if abs(generic - special) > _AGREE_RTOL * scale:
            raise RmtLabError(
                f"drift closed forms disagree for {space.kind.value} p={p}: "
                f"generic {generic} vs specialized {special}"
            )
    return complex(generic)


def _drift_special(space: MatrixSpace, pw: list[np.ndarray], norm_sq: float, p: int):
    kind = space.kind
    d = space.d
    denom = d * (d - 1.0)
    W = lambda k: complex(np.trace(pw[k]))  # noqa: E731
    if kind is SpaceKind.GENERAL_COMPLEX:
        return -(p * (p + d - 2.0) / denom) * W(p)
    if kind is SpaceKind.GENERAL_REAL:
        acc = sum(np.einsum("ij,ij->", pw[ell], pw[p - 2 - ell]) for ell in range(p - 1))
        return (p * norm_sq / denom) * acc - (p * (p + d - 2.0) / denom) * W(p)
    if kind is SpaceKind.HERMITIAN_COMPLEX:
        conv = sum(W(ell) * W(p - 2 - ell) for ell in range(p - 1))
        return (p / denom) * W(2) * conv - (p * (p + d - 2.0) / denom) * W(p)
    if kind is SpaceKind.SYMMETRIC_REAL:
        conv = sum(W(ell) * W(p - 2 - ell) for ell in range(p - 1))
        first = (p - 1.0) * W(2) * W(p - 2) if p >= 2 else 0.0
        return (p / (2.0 * denom)) * (first + W(2) * conv - 2.0 * (p + d - 2.0) * W(p))
    return None  # no closed form asserted for the antisymmetric kinds


def quadratic_closed_form(
    space: MatrixSpace, X: np.ndarray, p: int, q: int, conjugated: bool
) -> complex:
    """eps^2 coefficient of E[(W_eps - W)_p conj^?((W_eps - W)_q) | X].

    Generic route via basis sums,

        2pq/(d(d-1)) ( ||X||^2 sum_a tr(X^{p-1}B_a) tr(X^{q-1}B_a)^(*)
                       - W_p W_q^(*) ),

    cross-checked against the specialized identities for the four spaces
    that have them.
    """
    X = np.asarray(X, dtype=complex)
    d = space.d
    pref = 2.0 * p * q / (d * (d - 1.0))
    pw = _powers(X, max(p, q, p + q - 2, 2))
    tp = space.basis_traces(pw[p - 1])
    tq = space.basis_traces(pw[q - 1])
    norm_sq = hs_norm(X) ** 2
    Wp = complex(np.trace(pw[p]))
    Wq = complex(np.trace(pw[q]))
    if conjugated:
        basis_sum = complex(np.sum(tp * np.conj(tq)))
        cross = Wp * np.conj(Wq)
    else:
        basis_sum = complex(np.sum(tp * tq))
        cross = Wp * Wq
    generic = pref * (norm_sq * basis_sum - cross)

    special = _quadratic_special(space, pw, norm_sq, p, q, conjugated)
    if special is not None:
        term_scale = pref * (norm_sq * abs(basis_sum) + abs(cross))
        scale = max(abs(generic), abs(special), term_scale, 1e-30)
        if abs(generic - special) > _AGREE_RTOL * scale:
            raise RmtLabError(
                f"quadratic closed forms disagree for {space.kind.value} "
                f"(p={p}, q={q}, conjugated={conjugated}): {generic} vs {special}"
            )
    return complex(generic)


def _quadratic_special(space, pw, norm_sq, p, q, conjugated):
    kind = space.kind
    d = space.d
    pref = 2.0 * p * q / (d * (d - 1.0))
    W = lambda k: complex(np.trace(pw[k]))  # noqa: E731
    if kind is SpaceKind.GENERAL_COMPLEX:
        if conjugated:
            inner = np.einsum("ij,ij->", pw[p - 1], np.conj(pw[q - 1]))
            return pref * (2.0 * norm_sq * inner - W(p) * np.conj(W(q)))
        # the unconjugated basis sum cancels exactly, leaving only the
        # -W_p W_q term of the generic expression
        return -pref * W(p) * W(q)
    if kind is SpaceKind.GENERAL_REAL:
        inner = np.einsum("ij,ij->", pw[p - 1], pw[q - 1])  # tr(X^{p-1} (X^{q-1})^T)
        return pref * (norm_sq * inner - W(p) * W(q))
    if kind in (SpaceKind.HERMITIAN_COMPLEX, SpaceKind.SYMMETRIC_REAL):
        return pref * (W(2) * W(p + q - 2) - W(p) * W(q))
    return None


@dataclass(frozen=True)
class LimitRow:
    """One verified limit: Monte Carlo estimate vs closed form."""

    name: str
    estimate: complex
    se: float
    closed_form: complex
    zscore: float
    per_eps: tuple[complex, ...]
    richardson_residual: float


@dataclass(frozen=True)
class CubeRow:
    """Third-moment decay E|W_eps - W|^3 / eps^2 at one eps."""

    eps: float
    estimate: float
    se: float


@dataclass(frozen=True)
class LimitReport:
    """Empirical eps^2 coefficients for one fixed X, all p and (p, q)."""

    kind: SpaceKind
    n: int
    m: int
    trials: int
    eps_schedule: tuple[float, ...]
    drift: tuple[LimitRow, ...]
    quad_conjugated: tuple[LimitRow, ...]
    quad_plain: tuple[LimitRow, ...]
    cube: tuple[CubeRow, ...]

    def all_rows(self) -> tuple[LimitRow, ...]:
        return self.drift + self.quad_conjugated + self.quad_plain

    def max_abs_zscore(self) -> float:
        return max(abs(r.zscore) for r in self.all_rows())


class _MeanAccumulator:
    """Running sums for mean and standard error of complex samples."""

    def __init__(self, shape):
        self.count = 0
        self.s = np.zeros(shape, dtype=complex)
        self.s2 = np.zeros(shape)  # sum of |x|^2 componentwise on re/im
        self.s2_im = np.zeros(shape)

    def add(self, samples: np.ndarray) -> None:
        self.count += samples.shape[0]
        self.s += samples.sum(axis=0)
        self.s2 += (samples.real**2).sum(axis=0)
        self.s2_im += (samples.imag**2).sum(axis=0)

    def mean(self) -> np.ndarray:
        return self.s / self.count

    def se(self) -> np.ndarray:
        """Componentwise SE: sqrt(var_re + var_im) / sqrt(T)."""
        mu = self.mean()
        var_re = np.maximum(self.s2 / self.count - mu.real**2, 0.0)
        var_im = np.maximum(self.s2_im / self.count - mu.imag**2, 0.0)
        return np.sqrt((var_re + var_im) / max(self.count - 1, 1))


def empirical_limits(
    space: MatrixSpace,
    X: np.ndarray,
    eps_schedule: tuple[float, ...] = DEFAULT_EPS_SCHEDULE,
    trials: int = 100_000,
    m: int = 6,
    master_seed: int = 0,
    chunk: int = 8192,
) -> LimitReport:
    """Monte Carlo verification of the conditional limits for a fixed X.

    Frames K are drawn per trial; each draw is paired with its antithetic
    partner K diag(1, -1), which flips Q and keeps K K^T, cancelling the
    eps-linear fluctuation of the drift exactly.  Estimates at each eps are
    Richardson-extrapolated to eps -> 0 assuming an O(eps) residual, using
    the two finest schedule points; standard errors come from the per-trial
    extrapolated samples.
    """
    if trials < 2:
        raise ValueError("trials must be at least 2 to report a standard error")
    eps_schedule = tuple(sorted((float(e) for e in eps_schedule), reverse=True))
    if len(eps_schedule) < 2:
        raise ValueError("need at least two eps values for extrapolation")
    X = np.asarray(X, dtype=complex)
    coords = space.extract(X)
    W0 = trace_powers_batch(X[None], m)[0]

    n_eps = len(eps_schedule)
    pairs = [(p, q) for p in range(1, m + 1) for q in range(p, m + 1)]
    drift_acc = [_MeanAccumulator(m) for _ in range(n_eps)]
    conj_acc = [_MeanAccumulator(len(pairs)) for _ in range(n_eps)]
    plain_acc = [_MeanAccumulator(len(pairs)) for _ in range(n_eps)]
    cube_acc = [_MeanAccumulator(1) for _ in range(n_eps)]
    rich_drift = _MeanAccumulator(m)
    rich_conj = _MeanAccumulator(len(pairs))
    rich_plain = _MeanAccumulator(len(pairs))

    start = 0
    while start < trials:
        stop = min(start + chunk, trials)
        idx = np.arange(start, stop)
        K = haar_two_frame_block(space.d, idx, master_seed=master_seed)
        u = np.einsum("tdj,d->tj", K, coords)
        cu = np.stack([u[:, 1], -u[:, 0]], axis=1)
        qv = np.einsum("tdj,tj->td", K, cu)
        kk = np.einsum("tdj,tj->td", K, u)

        drift_eps = []
        conj_eps = []
        plain_eps = []
        for e_i, eps in enumerate(eps_schedule):
            mu = math.sqrt(1.0 - eps * eps) - 1.0
            deltas = []
            for sign in (+1.0, -1.0):
                ceps = coords[None, :] + (sign * eps) * qv + mu * kk
                Weps = trace_powers_batch(space.embed_batch(ceps), m)
                deltas.append(Weps - W0[None, :])
            dp, dm = deltas
            inv = 1.0 / (eps * eps)
            drift_s = 0.5 * inv * (dp + dm)
            conj_s = 0.5 * inv * np.stack(
                [dp[:, p - 1] * np.conj(dp[:, q - 1]) + dm[:, p - 1] * np.conj(dm[:, q - 1]) for p, q in pairs],
                axis=1,
            )
            plain_s = 0.5 * inv * np.stack(
                [dp[:, p - 1] * dp[:, q - 1] + dm[:, p - 1] * dm[:, q - 1] for p, q in pairs],
                axis=1,
            )
            cube_s = 0.5 * inv * (
                np.linalg.norm(dp, axis=1) ** 3 + np.linalg.norm(dm, axis=1) ** 3
            )
            drift_acc[e_i].add(drift_s)
            conj_acc[e_i].add(conj_s)
            plain_acc[e_i].add(plain_s)
            cube_acc[e_i].add(cube_s[:, None].astype(complex))
            drift_eps.append(drift_s)
            conj_eps.append(conj_s)
            plain_eps.append(plain_s)

        # Richardson with the two finest eps (ratio r), per trial
        r = eps_schedule[-2] / eps_schedule[-1]
        comb = lambda a, b: (r * b - a) / (r - 1.0)  # noqa: E731
        rich_drift.add(comb(drift_eps[-2], drift_eps[-1]))
        rich_conj.add(comb(conj_eps[-2], conj_eps[-1]))
        rich_plain.add(comb(plain_eps[-2], plain_eps[-1]))
        start = stop

    def rows(acc: _MeanAccumulator, per_eps_accs, names, closed) -> tuple[LimitRow, ...]:
        mean = acc.mean()
        se = acc.se()
        out = []
        for i, name in enumerate(names):
            per_eps = tuple(complex(a.mean()[i]) for a in per_eps_accs)
            cf = closed[i]
            denom = se[i] if se[i] > 0 else float("inf")
            z = abs(mean[i] - cf) / denom
            resid = abs(per_eps[-1] - mean[i])
            out.append(
                LimitRow(
                    name=name,
                    estimate=complex(mean[i]),
                    se=float(se[i]),
                    closed_form=complex(cf),
                    zscore=float(z),
                    per_eps=per_eps,
                    richardson_residual=float(resid),
                )
            )
        return tuple(out)

    drift_closed = [drift_closed_form(space, X, p) for p in range(1, m + 1)]
    conj_closed = [quadratic_closed_form(space, X, p, q, conjugated=True) for p, q in pairs]
    plain_closed = [quadratic_closed_form(space, X, p, q, conjugated=False) for p, q in pairs]

    drift_rows = rows(rich_drift, drift_acc, [f"drift_p{p}" for p in range(1, m + 1)], drift_closed)
    conj_rows = rows(rich_conj, conj_acc, [f"quad_conj_p{p}_q{q}" for p, q in pairs], conj_closed)
    plain_rows = rows(rich_plain, plain_acc, [f"quad_plain_p{p}_q{q}" for p, q in pairs], plain_closed)
    cube_rows = tuple(
        CubeRow(eps=eps_schedule[i], estimate=float(cube_acc[i].mean()[0].real), se=float(cube_acc[i].se()[0]))
        for i in range(n_eps)
    )
    return LimitReport(
        kind=space.kind,
        n=space.n,
        m=m,
        trials=trials,
        eps_schedule=eps_schedule,
        drift=drift_rows,
        quad_conjugated=conj_rows,
        quad_plain=plain_rows,
        cube=cube_rows,
    )


@dataclass(frozen=True)
class QCheckReport:
    """Empirical second moments of Q = K C K^T vs their exact values."""

    d: int
    trials: int
    max_abs_deviation: float
    max_zscore: float
    class_zscores: dict = field(default_factory=dict)
    kk_max_zscore: float = float("nan")

    def ok(self, z_threshold: float = 3.0) -> bool:
        return all(abs(z) <= z_threshold for z in self.class_zscores.values())


def q_covariance_check(
    d: int, trials: int = 1_000_000, master_seed: int = 0, chunk: int = 4096
) -> QCheckReport:
    """Check E[q_ab q_cd] = 2/(d(d-1)) (delta_ac delta_bd - delta_ad delta_bc).

    Also checks E[K K^T] = (2/d) I.  Deviations are aggregated within the
    three delta-pattern classes (matched, swapped, vanishing); the class
    z-scores drive pass/fail while the per-pattern maximum is reported for
    diagnostics.
    """
    if d < 3:
        raise ValueError(f"d must be at least 3, got {d}")
    dd = d * d
    S1 = np.zeros((dd, dd))
    S2 = np.zeros((dd, dd))
    SK = np.zeros((d, d))
    SK2 = np.zeros((d, d))
    done = 0
    while done < trials:
        count = min(chunk, trials - done)
        idx = np.arange(done, done + count)
        K = haar_two_frame_block(d, idx, master_seed=master_seed)
        Q = np.einsum("tdj,jk,tek->tde", K, ROTATION_GENERATOR, K)
        F = Q.reshape(count, dd)
        S1 += F.T @ F
        F2 = F * F
        S2 += F2.T @ F2
        KK = np.einsum("tdj,tej->tde", K, K)
        SK += KK.sum(axis=0)
        SK2 += (KK**2).sum(axis=0)
        done += count

    mean = S1 / trials
    var = np.maximum(S2 / trials - mean**2, 0.0)
    se = np.sqrt(var / trials)

    alpha = np.repeat(np.arange(d), d)
    beta = np.tile(np.arange(d), d)
    theory = (2.0 / (d * (d - 1.0))) * (
        (alpha[:, None] == alpha[None, :]) * (beta[:, None] == beta[None, :])
        - (alpha[:, None] == beta[None, :]) * (beta[:, None] == alpha[None, :])
    ).astype(float)

    dev = mean - theory
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, np.abs(dev) / se, np.where(np.abs(dev) > 0, np.inf, 0.0))

    matched = (
        (alpha[:, None] == alpha[None, :])
        & (beta[:, None] == beta[None, :])
        & (alpha[:, None] != beta[:, None])
    )
    swapped = (
        (alpha[:, None] == beta[None, :])
        & (beta[:, None] == alpha[None, :])
        & (alpha[:, None] != beta[:, None])
    )
    other = ~(matched | swapped)

    class_z = {}
    for name, mask in (("matched", matched), ("swapped", swapped), ("vanishing", other)):
        k = int(mask.sum())
        if k == 0:
            continue
        class_dev = float(dev[mask].mean())
        class_se = float(np.sqrt((var[mask] / trials).sum()) / k)
        class_z[name] = class_dev / class_se if class_se > 0 else 0.0

    kk_mean = SK / trials
    kk_var = np.maximum(SK2 / trials - kk_mean**2, 0.0)
    kk_se = np.sqrt(kk_var / trials)
    kk_dev = kk_mean - (2.0 / d) * np.eye(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        kk_z = np.where(kk_se > 0, np.abs(kk_dev) / kk_se, 0.0)

    return QCheckReport(
        d=d,
        trials=trials,
        max_abs_deviation=float(np.abs(dev).max()),
        max_zscore=float(z.max()),
        class_zscores=class_z,
        kk_max_zscore=float(kk_z.max()),
    )
