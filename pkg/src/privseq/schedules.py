"""Weight schedules and shared statistical helpers for the sequential bounds.

The lambda functions here are the tuning weights that the confidence
machinery consumes: a fixed-sample weight, a time-uniform decaying weight,
a predictable betting weight driven by a streaming variance estimate, and
the truncation rule for the Laplace channel. The module also carries the
mixture-width optimizer and small numeric utilities used across modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import special

__all__ = [
    "ScheduleKind",
    "LambdaSchedule",
    "VarianceState",
    "lambda_fixed_n",
    "lambda_time_uniform",
    "time_uniform_weights",
    "expand_weights",
    "lambda_betting",
    "beta_opt",
    "normal_cdf",
    "log_normal_cdf",
    "laplace_cgf",
    "running_zeta",
    "running_gamma_sq",
    "predictable_zeta",
    "predictable_gamma_sq",
]

ScheduleKind = Literal["fixed-n", "time-uniform", "betting-predictable", "laplace"]

_KINDS = ("fixed-n", "time-uniform", "betting-predictable", "laplace")
_DEFAULT_C = {"betting-predictable": 0.8, "laplace": 0.1}


def check_alpha(alpha: float) -> None:
    """Validate a coverage level. alpha = 1 is allowed but degenerate (all
    thresholds collapse); it appears only in worked examples."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def _check_horizon(value: int, name: str) -> int:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return int(value)


def lambda_fixed_n(n: int, alpha: float) -> float:
    """Constant weight minimizing the fixed-sample Hoeffding width at n.

    Returns 0 when alpha = 1 (degenerate: the width objective vanishes).
    """
    n = _check_horizon(n, "n")
    check_alpha(alpha)
    return math.sqrt(8.0 * math.log(1.0 / alpha) / n)


def lambda_time_uniform(t: int, alpha: float) -> float:
    """Decaying weight for time-uniform bounds, clamped to at most 1."""
    t = _check_horizon(t, "t")
    check_alpha(alpha)
    raw = math.sqrt(8.0 * math.log(1.0 / alpha) / (t * math.log(t + 1.0)))
    return min(raw, 1.0)


def time_uniform_weights(T: int, alpha: float) -> np.ndarray:
    """Vector of lambda_time_uniform(t, alpha) for t = 1..T."""
    T = _check_horizon(T, "T")
    check_alpha(alpha)
    t = np.arange(1, T + 1, dtype=float)
    raw = np.sqrt(8.0 * math.log(1.0 / alpha) / (t * np.log(t + 1.0)))
    return np.minimum(raw, 1.0)


def lambda_betting(
    state: "VarianceState",
    n: int,
    alpha: float,
    c: float = 0.8,
    zeta_at_mu: float = 0.5,
) -> float:
    """Predictable betting weight from the variance state through the previous step.

    The uncapped value targets the fixed-sample Kelly rate using the running
    variance estimate; the cap c / zeta_at_mu keeps the bet's wealth factor
    positive for the candidate mean being tested.
    """
    n = _check_horizon(n, "n")
    check_alpha(alpha)
    if not 0.0 < c <= 1.0:
        raise ValueError(f"c must lie in (0, 1], got {c}")
    if zeta_at_mu <= 0.0:
        raise ValueError(f"zeta_at_mu must be positive, got {zeta_at_mu}")
    raw = math.sqrt(2.0 * math.log(1.0 / alpha) / (state.gamma_sq * n))
    return min(raw, c / zeta_at_mu)


def beta_opt(t0: int, alpha: float) -> float:
    """Mixture scale minimizing the two-sided mixture width at time t0."""
    t0 = _check_horizon(t0, "t0")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    inner = -2.0 * math.log(alpha) + 1.0 - alpha * alpha
    value = -alpha * alpha - 2.0 * math.log(alpha) + math.log(inner)
    return math.sqrt(value / t0)


def normal_cdf(x):
    """Standard normal CDF (vectorized)."""
    return special.ndtr(x)


def log_normal_cdf(x):
    """log of the standard normal CDF, stable far into the lower tail."""
    return special.log_ndtr(x)


def laplace_cgf(lmbda: float, epsilon: float) -> float:
    """CGF of centered Laplace(1/epsilon) noise at weight lmbda.

    Finite only for |lmbda| < epsilon; weights at or beyond epsilon are a
    domain error rather than infinity.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if abs(lmbda) >= epsilon:
        raise ValueError(
            f"laplace_cgf requires |lambda| < epsilon, got lambda={lmbda}, epsilon={epsilon}"
        )
    q = (lmbda / epsilon) ** 2
    return -math.log1p(-q)


@dataclass
class VarianceState:
    """Streaming estimates of the privatized mean and variance.

    After t updates, zeta_hat is (1/2 + sum of Z) / (t + 1) and gamma_sq is
    (1/4 + sum of squared deviations) / (t + 1), each deviation taken against
    the zeta_hat current at its own step. The prior pseudo-observation makes
    the empty state usable as a predictable plug-in (zeta_hat = 1/2,
    gamma_sq = 1/4).
    """

    t: int = 0
    sum_z: float = 0.0
    sum_sq_dev: float = 0.0

    @property
    def zeta_hat(self) -> float:
        return (0.5 + self.sum_z) / (self.t + 1)

    @property
    def gamma_sq(self) -> float:
        return (0.25 + self.sum_sq_dev) / (self.t + 1)

    def update(self, z: float) -> None:
        self.t += 1
        self.sum_z += z
        dev = z - self.zeta_hat
        self.sum_sq_dev += dev * dev

    @classmethod
    def from_stream(cls, zs: Sequence[float]) -> "VarianceState":
        state = cls()
        for z in np.asarray(zs, dtype=float):
            state.update(float(z))
        return state


def running_zeta(z: np.ndarray) -> np.ndarray:
    """zeta_hat after each prefix of z: entry i - 1 uses draws 1..i."""
    z = np.asarray(z, dtype=float)
    t = np.arange(1, z.size + 1, dtype=float)
    return (0.5 + np.cumsum(z)) / (t + 1.0)


def running_gamma_sq(z: np.ndarray) -> np.ndarray:
    """gamma_sq after each prefix of z, matching VarianceState exactly."""
    z = np.asarray(z, dtype=float)
    zh = running_zeta(z)
    dev = z - zh
    t = np.arange(1, z.size + 1, dtype=float)
    return (0.25 + np.cumsum(dev * dev)) / (t + 1.0)


def predictable_zeta(z: np.ndarray) -> np.ndarray:
    """zeta_hat from strictly earlier draws: entry i - 1 uses draws 1..i-1."""
    zh = running_zeta(z)
    out = np.empty_like(zh)
    if out.size:
        out[0] = 0.5
        out[1:] = zh[:-1]
    return out


def predictable_gamma_sq(z: np.ndarray) -> np.ndarray:
    """gamma_sq from strictly earlier draws: entry i - 1 uses draws 1..i-1."""
    g = running_gamma_sq(z)
    out = np.empty_like(g)
    if out.size:
        out[0] = 0.25
        out[1:] = g[:-1]
    return out


@dataclass(frozen=True)
class LambdaSchedule:
    """Declarative choice of per-step weights for the sequential bounds.

    kind "fixed-n" and "time-uniform" are deterministic and can be expanded
    via weights(); "betting-predictable" and "laplace" weights depend on the
    data or the noise level and are computed inside their consumers. alpha
    left as None inherits the consumer's coverage level. c defaults to 0.8
    for betting and 0.1 for the Laplace truncation.
    """

    kind: ScheduleKind
    alpha: float | None = None
    n: int | None = None
    c: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.alpha is not None:
            check_alpha(self.alpha)
        if self.n is not None:
            _check_horizon(self.n, "n")
        if self.kind == "fixed-n" and self.n is None:
            raise ValueError("fixed-n schedule needs the target sample size n")
        if self.c is None:
            object.__setattr__(self, "c", _DEFAULT_C.get(self.kind))
        elif not 0.0 < self.c <= 1.0:
            raise ValueError(f"c must lie in (0, 1], got {self.c}")

    def resolve_alpha(self, alpha: float) -> float:
        return alpha if self.alpha is None else self.alpha

    def weights(self, T: int, alpha: float) -> np.ndarray:
        """Per-step weights for steps 1..T (deterministic kinds only)."""
        a = self.resolve_alpha(alpha)
        if self.kind == "fixed-n":
            return np.full(T, lambda_fixed_n(self.n, a))
        if self.kind == "time-uniform":
            return time_uniform_weights(T, a)
        raise ValueError(
            f"{self.kind} weights are data-dependent and are computed by their consumer"
        )


def expand_weights(schedule, T: int, alpha: float) -> np.ndarray:
    """Per-step weights from a schedule, an explicit array, or the default.

    None gives the time-uniform rule at level alpha; a LambdaSchedule expands
    through its own weights(); anything else is coerced to a length-T array
    of explicit nonnegative weights.
    """
    if schedule is None:
        return time_uniform_weights(T, alpha)
    if isinstance(schedule, LambdaSchedule):
        return schedule.weights(T, alpha)
    lam = np.asarray(schedule, dtype=float)
    if lam.shape != (T,):
        raise ValueError(f"explicit weights must have length {T}, got shape {lam.shape}")
    if not np.isfinite(lam).all() or (lam < 0).any():
        raise ValueError("explicit weights must be finite and nonnegative")
    return lam
