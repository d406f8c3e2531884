"""Anytime-valid tests and e-processes built on the confidence machinery.

An e-process is a nonnegative process whose value at any stopping time has
expectation at most 1 under the null; crossing 1/alpha therefore rejects at
level alpha at any data-dependent time, and its capped inverse is an
anytime-valid p-value. This module carries the Hoeffding-weighted and
mixture e-processes for one-sided mean nulls, plus the generic bridges
between confidence sequences and tests: rejection by emptiness of the
intersection with the null set, and p-values by inverting the level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .confseq import BoundSeries, MixtureConfig, one_sided_mixture_nsm, zeta
from .mechanisms import RecordBatch
from .schedules import check_alpha, expand_weights

__all__ = [
    "NullHypothesis",
    "EProcessState",
    "TestDecision",
    "test_via_cs",
    "anytime_p_via_cs",
    "eprocess_hoeffding",
    "eprocess_mixture",
]


@dataclass(frozen=True)
class NullHypothesis:
    """Null set for the raw mean: the interval [lo, hi] (ends may be infinite)."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"need lo <= hi, got [{self.lo}, {self.hi}]")

    @classmethod
    def le(cls, value: float) -> "NullHypothesis":
        """Mean at most value."""
        return cls(lo=-math.inf, hi=value)

    @classmethod
    def ge(cls, value: float) -> "NullHypothesis":
        """Mean at least value."""
        return cls(lo=value, hi=math.inf)

    @classmethod
    def point(cls, value: float) -> "NullHypothesis":
        return cls(lo=value, hi=value)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "NullHypothesis":
        return cls(lo=lo, hi=hi)

    @property
    def one_sided_boundary(self) -> float:
        """The finite end of a half-line null; errors on two-sided nulls."""
        if math.isinf(self.lo) and math.isfinite(self.hi):
            return self.hi
        if math.isinf(self.hi) and math.isfinite(self.lo):
            return self.lo
        raise ValueError("a one-sided null (exactly one finite end) is required")


@dataclass(frozen=True)
class TestDecision:
    """Outcome of a sequential test: rejected iff a rejection time exists."""

    alpha: float
    first_rejection: int | None

    @property
    def rejected(self) -> bool:
        return self.first_rejection is not None


@dataclass(frozen=True)
class EProcessState:
    """An e-process trajectory in log space with its anytime p-values.

    log_e[i] is the log e-value after t[i] steps. p_instant caps the inverse
    e-value at 1; running_min_inv is its running minimum, the nonincreasing
    anytime p-value in (0, 1].
    """

    t: np.ndarray
    log_e: np.ndarray
    running_min_inv: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=np.int64)
        log_e = np.asarray(self.log_e, dtype=float)
        rmi = np.asarray(self.running_min_inv, dtype=float)
        if log_e.shape != t.shape or rmi.shape != t.shape:
            raise ValueError("t, log_e, running_min_inv must share one shape")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "log_e", log_e)
        object.__setattr__(self, "running_min_inv", rmi)

    @classmethod
    def from_log_e(cls, log_e: np.ndarray) -> "EProcessState":
        log_e = np.asarray(log_e, dtype=float)
        t = np.arange(1, log_e.size + 1)
        p = np.minimum(1.0, np.exp(-log_e))
        return cls(t=t, log_e=log_e, running_min_inv=np.minimum.accumulate(p))

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def p_instant(self) -> np.ndarray:
        return np.minimum(1.0, np.exp(-self.log_e))

    def log_e_at(self, t: int) -> float:
        """The log e-value after exactly t steps (a stopped value)."""
        idx = int(np.searchsorted(self.t, t))
        if idx >= len(self) or self.t[idx] != t:
            raise ValueError(f"no entry at t={t}")
        return float(self.log_e[idx])

    def anytime_p_at(self, t: int) -> float:
        idx = int(np.searchsorted(self.t, t))
        if idx >= len(self) or self.t[idx] != t:
            raise ValueError(f"no entry at t={t}")
        return float(self.running_min_inv[idx])

    def decision(self, alpha: float) -> TestDecision:
        """Reject at the first step whose e-value reaches 1/alpha."""
        check_alpha(alpha)
        crossed = self.log_e >= math.log(1.0 / alpha)
        if not crossed.any():
            return TestDecision(alpha=alpha, first_rejection=None)
        return TestDecision(alpha=alpha, first_rejection=int(self.t[int(np.argmax(crossed))]))


def test_via_cs(bounds: BoundSeries, null: NullHypothesis, alpha: float = 0.05) -> TestDecision:
    """Reject at the first step where the bounds miss the null set entirely."""
    check_alpha(alpha)
    empty = (bounds.upper < null.lo) | (bounds.lower > null.hi)
    if not empty.any():
        return TestDecision(alpha=alpha, first_rejection=None)
    return TestDecision(alpha=alpha, first_rejection=int(bounds.t[int(np.argmax(empty))]))


def anytime_p_via_cs(
    cs_factory: Callable[[float], BoundSeries],
    null: NullHypothesis,
    t: int | None = None,
    tol: float = 1e-6,
) -> float:
    """Anytime p-value by inverting the level of a confidence-sequence family.

    cs_factory(alpha) must produce the level-alpha bounds for one fixed data
    stream; the returned value is the smallest level (within tol) whose
    bounds exclude the null by step t (default: the full stream). Rejection
    must be monotone in alpha; a family that rejects at a small level but
    not at a larger one violates the contract and raises.
    """

    def rejects(alpha: float) -> bool:
        bounds = cs_factory(alpha)
        decision = test_via_cs(bounds, null, alpha)
        if decision.first_rejection is None:
            return False
        return t is None or decision.first_rejection <= t

    lo, hi = 1e-10, 1.0
    reject_lo, reject_hi = rejects(lo), rejects(hi)
    if reject_lo and not reject_hi:
        raise ValueError("cs_factory rejection is not monotone in alpha")
    if reject_lo:
        return lo
    if not reject_hi:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rejects(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def eprocess_hoeffding(
    records, schedule=None, mu0: float = 0.5, alpha: float = 0.05
) -> EProcessState:
    """Weighted-average e-process for the null that the raw mean is at most mu0.

    log E_t accumulates lambda_i (Z_i - zeta_i(mu0)) - lambda_i^2 / 8; alpha
    only shapes the default weight schedule, not validity.
    """
    batch = records if isinstance(records, RecordBatch) else RecordBatch.from_records(list(records))
    T = len(batch)
    if T == 0:
        return EProcessState.from_log_e(np.empty(0))
    lam = expand_weights(schedule, T, alpha)
    steps = lam * (batch.z - zeta(mu0, batch.r)) - lam * lam / 8.0
    return EProcessState.from_log_e(np.cumsum(steps))


def eprocess_mixture(
    records, config: MixtureConfig | None = None, null: NullHypothesis | None = None
) -> EProcessState:
    """Folded-mixture e-process for a one-sided mean null.

    With a 'mean <= value' null the score sums Z_i - zeta_i(value); the
    reflected null sums the negation. The mixture scale is 2 * beta from the
    config (one-sided resolution).
    """
    config = config or MixtureConfig()
    null = null or NullHypothesis.le(0.5)
    boundary = null.one_sided_boundary
    batch = records if isinstance(records, RecordBatch) else RecordBatch.from_records(list(records))
    T = len(batch)
    if T == 0:
        return EProcessState.from_log_e(np.empty(0))
    scores = batch.z - zeta(boundary, batch.r)
    if math.isinf(null.hi):
        scores = -scores
    S = np.cumsum(scores)
    t = np.arange(1, T + 1, dtype=float)
    rho = 2.0 * config.resolve_beta("one")
    return EProcessState.from_log_e(one_sided_mixture_nsm(S, t, rho))
