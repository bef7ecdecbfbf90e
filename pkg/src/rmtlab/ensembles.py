"""Rotationally invariant sampling on the six subspaces.

Per-trial randomness comes from counter-based Philox streams keyed by
(master_seed, stream, trial_index), so sample(spec, i) is a pure function
of the seed and the trial index regardless of how trials are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidDimensionError, SamplerError
from .spaces import MatrixSpace, SpaceKind, build_space

# Stream tags keep independent sampling purposes on disjoint Philox keys.
STREAM_COORDS = 0
STREAM_FRAME = 1
STREAM_RADIAL = 2

_MIX = 0x9E3779B97F4A7C15  # splitmix64 increment, mixes stream into the key


def trial_generator(master_seed: int, stream: int, trial_index: int) -> np.random.Generator:
    """Deterministic per-trial generator, independent across (stream, trial)."""
    key0 = np.uint64((int(master_seed) + int(stream) * _MIX) % (1 << 64))
    key1 = np.uint64(int(trial_index) % (1 << 64))
    return np.random.Generator(np.random.Philox(key=np.array([key0, key1], dtype=np.uint64)))


@dataclass(frozen=True)
class FixedNorm:
    """Uniform distribution on the sphere ||X||^2 = n (fixed-trace ensemble)."""

    tag: str = field(default="sphere", init=False)


@dataclass(frozen=True)
class GaussianCoords:
    """Iid centered normal coordinates with variance n/d (Gaussian ensembles)."""

    tag: str = field(default="gauss", init=False)


@dataclass(frozen=True)
class CustomRadial:
    """User radial law: sampler(rng) draws R = ||X||/sqrt(n) with E R^2 = 1.

    The sampler is validated on construction of an EnsembleSpec by a
    10^4-draw estimate of E R^2; a deviation beyond 1% is refused.
    """

    sampler: Callable[[np.random.Generator], float]
    label: str = "custom"
    tag: str = field(default="custom", init=False)


RadialLaw = FixedNorm | GaussianCoords | CustomRadial

_VALIDATION_DRAWS = 10_000
_VALIDATION_SLACK = 0.01


@dataclass(frozen=True)
class EnsembleSpec:
    """A sampleable ensemble: space, radial law, and master seed."""

    space: MatrixSpace
    radial: RadialLaw
    master_seed: int = 0

    def __post_init__(self):
        if isinstance(self.radial, CustomRadial):
            _validate_custom_radial(self.radial, self.master_seed)

    @property
    def kind(self) -> SpaceKind:
        return self.space.kind

    @property
    def n(self) -> int:
        return self.space.n


def make_ensemble(
    kind: SpaceKind | str, n: int, radial: RadialLaw | str, master_seed: int = 0
) -> EnsembleSpec:
    """Convenience constructor accepting radial tags "sphere" and "gauss"."""
    if isinstance(radial, str):
        if radial == "sphere":
            radial = FixedNorm()
        elif radial == "gauss":
            radial = GaussianCoords()
        else:
            raise SamplerError(f"unknown radial tag {radial!r}; use a CustomRadial object")
    return EnsembleSpec(space=build_space(kind, n), radial=radial, master_seed=master_seed)


def _validate_custom_radial(radial: CustomRadial, master_seed: int) -> None:
    rng = trial_generator(master_seed, STREAM_RADIAL, 0)
    draws = np.array([_draw_radius(radial, rng) for _ in range(_VALIDATION_DRAWS)])
    mean_sq = float(np.mean(draws**2))
    if abs(mean_sq - 1.0) > _VALIDATION_SLACK:
        raise SamplerError(
            f"custom radial law has E R^2 = {mean_sq:.4f}; must be 1 within "
            f"{_VALIDATION_SLACK:.0%} (the theorems require E||X||^2 = n)"
        )


def _draw_radius(radial: CustomRadial, rng: np.random.Generator) -> float:
    r = float(radial.sampler(rng))
    if not math.isfinite(r) or r <= 0.0:
        raise SamplerError(f"radial sampler returned invalid value {r!r}")
    return r


def sample_coords(spec: EnsembleSpec, trial_index: int) -> np.ndarray:
    """Rotationally invariant coordinate vector in R^d for one trial."""
    d, n = spec.space.d, spec.space.n
    rng = trial_generator(spec.master_seed, STREAM_COORDS, trial_index)
    g = rng.standard_normal(d)
    if isinstance(spec.radial, GaussianCoords):
        return g * math.sqrt(n / d)
    norm = float(np.linalg.norm(g))
    while norm < 1e-200:  # vanishing Gaussian draw; keep drawing from the stream
        g = rng.standard_normal(d)
        norm = float(np.linalg.norm(g))
    unit = g / norm
    if isinstance(spec.radial, FixedNorm):
        return unit * math.sqrt(n)
    return unit * (math.sqrt(n) * _draw_radius(spec.radial, rng))


def sample(spec: EnsembleSpec, trial_index: int) -> np.ndarray:
    """One random matrix X in V; pure function of (master_seed, trial_index)."""
    return spec.space.embed(sample_coords(spec, trial_index))


def sample_block(spec: EnsembleSpec, trial_indices: np.ndarray) -> np.ndarray:
    """Stack of samples for the given trials, shape (T, n, n)."""
    coords = np.empty((len(trial_indices), spec.space.d))
    for row, idx in enumerate(trial_indices):
        coords[row] = sample_coords(spec, int(idx))
    return spec.space.embed_batch(coords)


@dataclass(frozen=True)
class RadialDeficit:
    """Estimate of t_k = |n^{-k/2} E||X||^k - 1| with its standard error."""

    k: int
    value: float
    std_error: float
    exact: bool


def radial_deficit_t(spec: EnsembleSpec, k: int, trials: int = 10_000) -> RadialDeficit:
    """Norm-moment deficit t_k(X); exact where the law allows it.

    FixedNorm is identically 0.  GaussianCoords with even k uses the exact
    chi-square product formula; other cases are Monte Carlo over the radial
    law only (no matrices are sampled).
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    d, n = spec.space.d, spec.space.n
    if isinstance(spec.radial, FixedNorm):
        return RadialDeficit(k=k, value=0.0, std_error=0.0, exact=True)
    if isinstance(spec.radial, GaussianCoords):
        if k % 2 == 0:
            # ||X||^2 = (n/d) chi^2_d, so n^{-k/2} E||X||^k = prod (1 + 2j/d)
            r = k // 2
            prod = 1.0
            for j in range(r):
                prod *= 1.0 + 2.0 * j / d
            return RadialDeficit(k=k, value=abs(prod - 1.0), std_error=0.0, exact=True)
        rng = trial_generator(spec.master_seed, STREAM_RADIAL, 1)
        ratios = (rng.chisquare(df=d, size=trials) / d) ** (k / 2.0)
    else:
        rng = trial_generator(spec.master_seed, STREAM_RADIAL, 1)
        ratios = np.array([_draw_radius(spec.radial, rng) for _ in range(trials)]) ** k
    est = float(np.mean(ratios))
    se = float(np.std(ratios, ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
    return RadialDeficit(k=k, value=abs(est - 1.0), std_error=se, exact=False)


@dataclass(frozen=True)
class TwoFrame:
    """First two columns of a Haar orthogonal d x d matrix."""

    K: np.ndarray

    @property
    def d(self) -> int:
        return self.K.shape[0]


def haar_two_frame(d: int, trial_index: int, master_seed: int = 0) -> TwoFrame:
    """Haar-distributed 2-frame by Gram-Schmidt on two Gaussian vectors."""
    if d < 2:
        raise InvalidDimensionError(f"frame dimension must be at least 2, got {d}")
    rng = trial_generator(master_seed, STREAM_FRAME, trial_index)
    return TwoFrame(K=_gram_schmidt_pair(rng.standard_normal((d, 2)), rng))


def haar_two_frame_block(
    d: int, trial_indices: np.ndarray, master_seed: int = 0
) -> np.ndarray:
    """Stack of Haar 2-frames, shape (T, d, 2)."""
    out = np.empty((len(trial_indices), d, 2))
    for row, idx in enumerate(trial_indices):
        rng = trial_generator(master_seed, STREAM_FRAME, int(idx))
        out[row] = _gram_schmidt_pair(rng.standard_normal((d, 2)), rng)
    return out


def _gram_schmidt_pair(g: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orthonormalize two columns, redrawing on numerically dependent input."""
    for _ in range(64):
        a, b = g[:, 0], g[:, 1]
        na = np.linalg.norm(a)
        if na > 1e-150:
            k1 = a / na
            b_perp = b - (k1 @ b) * k1
            nb = np.linalg.norm(b_perp)
            if nb > 1e-10 * max(np.linalg.norm(b), 1e-300):
                return np.column_stack([k1, b_perp / nb])
        g = rng.standard_normal(g.shape)
    raise SamplerError("could not orthonormalize a Gaussian pair after 64 redraws")
