"""Locally private randomization mechanisms for bounded means.

Every mechanism here consumes data in [0, 1] and emits records that a
downstream analyst can use without ever seeing the raw values. The discrete
mechanism stochastically rounds x to a uniform grid {0, 1/G, ..., 1} and then
keeps the rounded value with probability r, otherwise resampling uniformly
from the grid. The continuous alternative adds Laplace noise.

Draw protocol (part of the behavior contract): each record consumes one
uniform for the stochastic rounding, then, when r < 1, one uniform for the
keep/resample decision and one integer draw for the resample value, in that
order. Batch calls consume the same draws column-wise (all rounding uniforms
first, then all keep uniforms, then all resample draws), so privatizing a
sequence record-by-record and privatizing it as one batch advance the stream
differently; each mode is individually deterministic for a fixed generator
state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

__all__ = [
    "PrivacyParams",
    "PrivateRecord",
    "LaplaceRecord",
    "RecordBatch",
    "LaplaceBatch",
    "RandomSource",
    "epsilon_of",
    "r_of",
    "discretize",
    "nprr_privatize",
    "nprr_privatize_batch",
    "sirr_privatize",
    "sirr_privatize_batch",
    "laplace_privatize",
    "laplace_privatize_batch",
    "conditional_pmf",
    "entropy_surrogate",
    "tune_rg",
    "grid_values",
]


def _check_unit(x: float, name: str = "x") -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def _check_grid_size(G: int) -> int:
    if int(G) != G or G < 1:
        raise ValueError(f"G must be a positive integer, got {G}")
    return int(G)


@dataclass(frozen=True)
class PrivacyParams:
    """Discrete-mechanism parameters: keep probability r and grid size G."""

    r: float
    G: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        object.__setattr__(self, "G", _check_grid_size(self.G))

    @property
    def epsilon(self) -> float:
        return epsilon_of(self.r, self.G)


@dataclass(frozen=True)
class PrivateRecord:
    """One output of the discrete mechanism: grid value z plus its (r, G)."""

    z: float
    r: float
    G: int


@dataclass(frozen=True)
class LaplaceRecord:
    """One output of the Laplace mechanism: noisy value z plus its epsilon."""

    z: float
    epsilon: float


@dataclass(frozen=True)
class RecordBatch:
    """Column-wise view of a sequence of discrete-mechanism records."""

    z: np.ndarray
    r: np.ndarray
    G: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=float)
        r = np.broadcast_to(np.asarray(self.r, dtype=float), z.shape).copy()
        G = np.broadcast_to(np.asarray(self.G, dtype=np.int64), z.shape).copy()
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "G", G)

    def __len__(self) -> int:
        return int(self.z.size)

    @classmethod
    def from_records(cls, records: Sequence[PrivateRecord]) -> "RecordBatch":
        return cls(
            z=np.array([rec.z for rec in records], dtype=float),
            r=np.array([rec.r for rec in records], dtype=float),
            G=np.array([rec.G for rec in records], dtype=np.int64),
        )

    def records(self) -> list[PrivateRecord]:
        return [
            PrivateRecord(z=float(z), r=float(r), G=int(G))
            for z, r, G in zip(self.z, self.r, self.G)
        ]


@dataclass(frozen=True)
class LaplaceBatch:
    """Column-wise view of a sequence of Laplace-mechanism records."""

    z: np.ndarray
    epsilon: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=float)
        eps = np.broadcast_to(np.asarray(self.epsilon, dtype=float), z.shape).copy()
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "epsilon", eps)

    def __len__(self) -> int:
        return int(self.z.size)

    @classmethod
    def from_records(cls, records: Sequence[LaplaceRecord]) -> "LaplaceBatch":
        return cls(
            z=np.array([rec.z for rec in records], dtype=float),
            epsilon=np.array([rec.epsilon for rec in records], dtype=float),
        )

    def records(self) -> list[LaplaceRecord]:
        return [
            LaplaceRecord(z=float(z), epsilon=float(e))
            for z, e in zip(self.z, self.epsilon)
        ]


@dataclass(frozen=True)
class RandomSource:
    """Seed-keyed factory of independent, reproducible generator streams.

    Stream i is seeded from the pair (seed, i), so distinct streams are
    statistically independent and any single stream is bit-reproducible.
    """

    seed: int

    def __post_init__(self) -> None:
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an integer in [0, 2^64), got {self.seed}")

    def generator(self, stream: int = 0) -> np.random.Generator:
        if int(stream) != stream or stream < 0:
            raise ValueError(f"stream must be a nonnegative integer, got {stream}")
        return np.random.default_rng(np.random.SeedSequence([int(self.seed), int(stream)]))


def epsilon_of(r: float, G: int) -> float:
    """Privacy level of the discrete mechanism with keep probability r on a G-grid.

    Returns math.inf for r >= 1 (no resampling, no privacy).
    """
    G = _check_grid_size(G)
    if r < 0.0:
        raise ValueError(f"r must be nonnegative, got {r}")
    if r >= 1.0:
        return math.inf
    return math.log1p((G + 1) * r / (1.0 - r))


def r_of(epsilon: float, G: int) -> float:
    """Keep probability achieving privacy level epsilon on a G-grid."""
    G = _check_grid_size(G)
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    if math.isinf(epsilon):
        return 1.0
    return math.expm1(epsilon) / (math.exp(epsilon) + G)


def grid_values(G: int) -> np.ndarray:
    """The output grid {0, 1/G, ..., 1}."""
    G = _check_grid_size(G)
    return np.arange(G + 1, dtype=float) / G


def _discretize_core(x: np.ndarray, G: int, rng: np.random.Generator) -> np.ndarray:
    scaled = x * G
    lo = np.floor(scaled)
    frac = scaled - lo
    u = rng.random(x.shape)
    return (lo + (u < frac)) / G


def _nprr_core(
    x: np.ndarray, r: float, G: int, rng: np.random.Generator
) -> np.ndarray:
    y = _discretize_core(x, G, rng)
    if r >= 1.0:
        return y
    keep = rng.random(x.shape) < r
    resample = rng.integers(0, G + 1, size=x.shape) / G
    return np.where(keep, y, resample)


def discretize(x: float, G: int, rng: np.random.Generator) -> float:
    """Stochastically round x to the grid {0, 1/G, ..., 1}, preserving its mean.

    x lands on the bracketing gridpoint above with probability equal to its
    fractional position in the cell; a gridpoint maps to itself (the rounding
    uniform is still consumed, keeping the draw count input-independent).
    """
    G = _check_grid_size(G)
    _check_unit(x)
    return float(_discretize_core(np.array([x], dtype=float), G, rng)[0])


def nprr_privatize(
    x: float, params: PrivacyParams, rng: np.random.Generator
) -> PrivateRecord:
    """Privatize one value with the discrete mechanism. See the module docstring
    for the draw protocol."""
    _check_unit(x)
    z = float(_nprr_core(np.array([x], dtype=float), params.r, params.G, rng)[0])
    return PrivateRecord(z=z, r=params.r, G=params.G)


def nprr_privatize_batch(
    xs: Sequence[float], params: PrivacyParams, rng: np.random.Generator
) -> RecordBatch:
    """Privatize a sequence with the discrete mechanism in one vectorized pass."""
    arr = np.asarray(xs, dtype=float)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("all inputs must lie in [0, 1]")
    z = _nprr_core(arr, params.r, params.G, rng)
    return RecordBatch(z=z, r=params.r, G=params.G)


def sirr_privatize(x: float, r: float, rng: np.random.Generator) -> PrivateRecord:
    """Privatize one binary value with the G = 1 discrete mechanism.

    Raises ValueError when x is not exactly 0 or 1.
    """
    if x not in (0.0, 1.0):
        raise ValueError(f"x must be binary (0 or 1), got {x}")
    params = PrivacyParams(r=r, G=1)
    return nprr_privatize(float(x), params, rng)


def sirr_privatize_batch(
    xs: Sequence[float], r: float, rng: np.random.Generator
) -> RecordBatch:
    """Privatize a binary sequence with the G = 1 discrete mechanism."""
    arr = np.asarray(xs, dtype=float)
    if arr.size and not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError("all inputs must be binary (0 or 1)")
    return nprr_privatize_batch(arr, PrivacyParams(r=r, G=1), rng)


def _laplace_noise(u: np.ndarray, epsilon: float) -> np.ndarray:
    # Inverse-CDF sampling: u is uniform on [0, 1), v = u - 1/2, and the
    # noise is -sign(v) * log(1 - 2|v|) / epsilon.
    v = u - 0.5
    return np.copysign(np.log1p(-2.0 * np.abs(v)), v) / epsilon


def laplace_privatize(
    x: float, epsilon: float, rng: np.random.Generator
) -> LaplaceRecord:
    """Privatize one value by adding Laplace(1/epsilon) noise.

    Noise is drawn by inverting the Laplace CDF at a single uniform, so one
    record consumes exactly one draw.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    _check_unit(x)
    noise = float(_laplace_noise(rng.random(1), epsilon)[0])
    return LaplaceRecord(z=x + noise, epsilon=epsilon)


def laplace_privatize_batch(
    xs: Sequence[float], epsilon: float, rng: np.random.Generator
) -> LaplaceBatch:
    """Privatize a sequence by adding Laplace(1/epsilon) noise to each value."""
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    arr = np.asarray(xs, dtype=float)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("all inputs must lie in [0, 1]")
    noise = _laplace_noise(rng.random(arr.shape), epsilon)
    return LaplaceBatch(z=arr + noise, epsilon=epsilon)


def conditional_pmf(z: float, x: float, params: PrivacyParams) -> float:
    """P(Z = z | X = x) under the discrete mechanism.

    z must be a gridpoint of the {0, 1/G, ..., 1} grid; any other z is a
    domain error rather than probability zero.
    """
    _check_unit(x)
    r, G = params.r, params.G
    zi = round(z * G)
    if not 0.0 <= z <= 1.0 or abs(z * G - zi) > 1e-9:
        raise ValueError(f"z must be a gridpoint of the G={G} grid, got {z}")
    base = (1.0 - r) / (G + 1)
    scaled = x * G
    lo = math.floor(scaled)
    frac = scaled - lo
    if frac == 0.0:
        return base + (r if zi == lo else 0.0)
    if zi == lo + 1:
        return base + r * frac
    if zi == lo:
        return base + r * (1.0 - frac)
    return base


def entropy_surrogate(r: float, G: int) -> float:
    """Signed surrogate for the output entropy at a mid-cell input.

    With p0 = (1 - r)/(G + 1) and p1 = p0 + r/2, returns
    (G - 1) p0 log2 p0 + 2 p1 log2 p1. Note the sign: this is the negative
    of the mid-cell output entropy, so smaller values mean MORE output
    randomness. At G = 1 the value is exactly -1 for every r.
    """
    G = _check_grid_size(G)
    if not 0.0 <= r < 1.0:
        raise ValueError(f"r must lie in [0, 1), got {r}")
    p0 = (1.0 - r) / (G + 1)
    p1 = p0 + r / 2.0
    tail = (G - 1) * p0 * math.log2(p0) if G > 1 else 0.0
    return tail + 2.0 * p1 * math.log2(p1)


def _midcell_entropy(r: float, G: int) -> float:
    return -entropy_surrogate(r, G)


def tune_rg(
    epsilon: float, objective: Literal["entropy", "surrogate"] = "entropy"
) -> tuple[float, int]:
    """Choose (r, G) attaining privacy level epsilon.

    Scans r over {0.001, ..., 0.999}; each scan point implies the grid size
    G = (e^eps - 1)(1 - r)/r - 1, whose floor and ceiling become integer
    candidates with r re-solved exactly for each. The default objective
    minimizes the mid-cell output entropy, which keeps the output as
    informative about the input as the privacy level allows and selects
    G = 1 at every epsilon. objective="surrogate" minimizes the signed
    surrogate of entropy_surrogate instead; since that quantity decreases
    without bound in G, the surrogate choice always chases the largest
    admissible grid and is retained only for comparison. When no scan point
    yields an admissible G >= 1, falls back to (r_of(epsilon, 1), 1).
    """
    if not math.isfinite(epsilon) or epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")
    if objective not in ("entropy", "surrogate"):
        raise ValueError(f"unknown objective {objective!r}")
    score = _midcell_entropy if objective == "entropy" else entropy_surrogate
    growth = math.expm1(epsilon)
    best: tuple[float, float, int] | None = None
    for i in range(1, 1000):
        r_scan = i / 1000.0
        g_target = growth * (1.0 - r_scan) / r_scan - 1.0
        for g in {math.floor(g_target), math.ceil(g_target)}:
            if g < 1:
                continue
            r_exact = r_of(epsilon, g)
            if abs(epsilon_of(r_exact, g) - epsilon) > 1e-9:
                continue
            value = score(r_exact, g)
            if best is None or value < best[0] or (value == best[0] and g < best[2]):
                best = (value, r_exact, g)
    if best is None:
        return r_of(epsilon, 1), 1
    return best[1], best[2]
