"""Locally private sequential A/B testing.

Each round assigns an arm, observes a bounded outcome, and forms the
inverse-probability-weighted pseudo-outcome, an unbiased proxy for the
instantaneous treatment effect rescaled into [0, 1]. Privatizing the
pseudo-outcome with the binary discrete mechanism (stochastic rounding to
{0, 1} plus randomized response) yields a stream whose mean any bounded-mean
confidence sequence can track; undoing the rescaling turns those bounds into
anytime-valid bounds on the running average treatment effect. A folded
mixture of the same scores gives an e-process for the weak null that the
average effect is nonpositive.

Arm randomization happens in the caller; this module consumes (outcome, arm)
pairs and privatized records, keeping the inference pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .confseq import BoundSeries, MixtureConfig, mixture_cs_lower, mixture_cs_two_sided
from .eprocess import EProcessState, NullHypothesis, eprocess_mixture
from .mechanisms import PrivacyParams, RecordBatch, nprr_privatize_batch

__all__ = [
    "ABConfig",
    "ABRecord",
    "pseudo_outcome",
    "privatize_pseudo_outcomes",
    "ab_lower_cs",
    "ab_cs_two_sided",
    "weak_null_eprocess",
    "logistic_effect_path",
    "average_effect_path",
    "first_sign_change",
]


@dataclass(frozen=True)
class ABConfig:
    """Shared knobs for one A/B stream: assignment probability, privacy, level."""

    pi: float
    mechanism: PrivacyParams
    alpha: float = 0.05
    beta: float | None = None
    t0: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.pi < 1.0:
            raise ValueError(f"pi must lie in (0, 1), got {self.pi}")
        if self.mechanism.G != 1:
            raise ValueError(
                f"the pseudo-outcome mechanism must use G = 1, got G = {self.mechanism.G}"
            )

    @property
    def effect_scale(self) -> float:
        """Slope of the map from pseudo-outcome means to treatment effects."""
        return 1.0 / self.pi + 1.0 / (1.0 - self.pi)

    @property
    def effect_shift(self) -> float:
        """Intercept of the map from pseudo-outcome means to treatment effects."""
        return -1.0 / (1.0 - self.pi)

    def mixture_config(self) -> MixtureConfig:
        return MixtureConfig(alpha=self.alpha, beta=self.beta, t0=self.t0)


@dataclass(frozen=True)
class ABRecord:
    """One privatized round: the arm, the released bit, and the stream position."""

    a: int
    psi: float
    index: int

    def __post_init__(self) -> None:
        if self.a not in (0, 1):
            raise ValueError(f"a must be 0 or 1, got {self.a}")
        if self.psi not in (0.0, 1.0):
            raise ValueError(f"psi must be 0 or 1 after privatization, got {self.psi}")


def pseudo_outcome(x, a, pi: float):
    """Rescaled inverse-probability-weighted outcome, a value in [0, 1].

    The raw estimate x * a / pi - x * (1 - a) / (1 - pi) has mean equal to
    the treatment effect; shifting by 1 / (1 - pi) and dividing by
    1 / pi + 1 / (1 - pi) squeezes it into the unit interval. Scalars give a
    float, arrays broadcast elementwise.
    """
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must lie in (0, 1), got {pi}")
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("outcomes must lie in [0, 1]")
    if a.size and not np.isin(a, (0.0, 1.0)).all():
        raise ValueError("arms must be 0 or 1")
    f = x * a / pi - x * (1.0 - a) / (1.0 - pi)
    phi = (f + 1.0 / (1.0 - pi)) / (1.0 / pi + 1.0 / (1.0 - pi))
    return phi if phi.shape else float(phi)


def privatize_pseudo_outcomes(
    x, a, config: ABConfig, rng: np.random.Generator
) -> list[ABRecord]:
    """Transform (outcome, arm) pairs and release G = 1 privatized records."""
    phi = np.atleast_1d(np.asarray(pseudo_outcome(x, a, config.pi), dtype=float))
    arms = np.broadcast_to(np.asarray(a, dtype=np.int64), phi.shape)
    batch = nprr_privatize_batch(phi, config.mechanism, rng)
    return [
        ABRecord(a=int(arm), psi=float(z), index=i + 1)
        for i, (arm, z) in enumerate(zip(arms, batch.z))
    ]


def _psi_batch(records: Sequence[ABRecord], config: ABConfig) -> RecordBatch:
    psi = np.array([rec.psi for rec in records], dtype=float)
    return RecordBatch(z=psi, r=config.mechanism.r, G=1)


def _affine(bounds: BoundSeries, scale: float, shift: float) -> BoundSeries:
    return BoundSeries(
        t=bounds.t,
        estimate=scale * bounds.estimate + shift,
        lower=scale * bounds.lower + shift,
        upper=scale * bounds.upper + shift,
    )


def ab_lower_cs(records: Sequence[ABRecord], config: ABConfig) -> BoundSeries:
    """Lower confidence sequence for the running average treatment effect.

    Runs the folded-mixture lower sequence on the privatized pseudo-outcomes
    and maps the bounds back to effect scale, so the result is exactly the
    affine image of the unit-interval sequence. The upper bound sits at the
    largest representable effect, 1 / pi.
    """
    base = mixture_cs_lower(_psi_batch(records, config), config.mixture_config())
    return _affine(base, config.effect_scale, config.effect_shift)


def ab_cs_two_sided(records: Sequence[ABRecord], config: ABConfig) -> BoundSeries:
    """Two-sided companion of ab_lower_cs, mapped to effect scale the same way."""
    base = mixture_cs_two_sided(_psi_batch(records, config), config.mixture_config())
    return _affine(base, config.effect_scale, config.effect_shift)


def weak_null_eprocess(records: Sequence[ABRecord], config: ABConfig) -> EProcessState:
    """E-process against the weak null that the average effect is nonpositive.

    A nonpositive average effect pins the pseudo-outcome mean at or below pi,
    so the folded mixture accumulates psi_i minus the privatized boundary
    mean r * pi + (1 - r) / 2; large values witness a positive effect.
    """
    return eprocess_mixture(
        _psi_batch(records, config), config.mixture_config(), NullHypothesis.le(config.pi)
    )


def logistic_effect_path(t):
    """Deterministic effect path 1.8 * (sigmoid(t / 300) - 1/2) for steps t >= 1.

    Rises from about 0.0015 at t = 1 toward the limit 0.9. Scalars give a
    float, arrays evaluate elementwise.
    """
    t = np.asarray(t, dtype=float)
    if t.size and t.min() < 1:
        raise ValueError("steps must satisfy t >= 1")
    delta = 1.8 * (expit(t / 300.0) - 0.5)
    return delta if delta.shape else float(delta)


def average_effect_path(t):
    """Running average (1/t) * sum of logistic_effect_path over steps 1..t."""
    t_arr = np.asarray(t)
    if t_arr.size == 0:
        return np.empty(0)
    if not np.issubdtype(t_arr.dtype, np.integer):
        raise ValueError("steps must be integers")
    if t_arr.min() < 1:
        raise ValueError("steps must satisfy t >= 1")
    horizon = int(t_arr.max())
    partial = np.cumsum(logistic_effect_path(np.arange(1, horizon + 1)))
    out = partial[t_arr - 1] / t_arr
    return out if t_arr.shape else float(out)


def first_sign_change(values) -> int | None:
    """First 1-based position whose sign differs from the previous entry.

    Signs follow numpy.sign with zero counted as its own sign; a sequence
    that never changes sign (or has fewer than two entries) gives None.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return None
    signs = np.sign(values)
    changed = signs[1:] != signs[:-1]
    if not changed.any():
        return None
    return int(np.argmax(changed)) + 2
