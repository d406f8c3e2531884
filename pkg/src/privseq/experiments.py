"""Monte Carlo harness: data laws, privatize-then-infer pipelines, aggregation.

A single declarative config names a data law, a mechanism, an inference
method, and the run shape (level, horizon, replications, seed). Replications
are independent: replication k draws its data from stream 2k and its
mechanism noise from stream 2k + 1 of the root seed, and aggregation is a
deterministic reduce keyed by replication index, so results do not depend on
evaluation order.

The result table carries one row per step for sequential methods (or a
single row at the horizon for fixed-sample intervals): mean width, the
fraction of replications whose bounds have missed the target at any step so
far, mean bounds, and the replication count. E-process methods reuse the
same shape, with the rejection fraction in the miscoverage column, the mean
anytime p-value in both bound columns, and zero width.

Targets are running averages: a constant law's mean, the running average of
the (clipped) sinusoidal mean path, or the running average treatment effect
for the arm-based law. Laws that state only a mean path emit Bernoulli draws
at that mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .abtest import (
    ABConfig,
    ab_cs_two_sided,
    ab_lower_cs,
    logistic_effect_path,
    privatize_pseudo_outcomes,
    weak_null_eprocess,
)
from .confseq import (
    BoundSeries,
    Interval,
    MixtureConfig,
    gridkelly_cs,
    hoeffding_ci,
    hoeffding_cs,
    laplace_hoeffding_ci,
    laplace_hoeffding_cs,
    mixture_cs_lower,
    mixture_cs_two_sided,
    pmkelly_ci,
    sirr_lr_cs,
)
from .eprocess import EProcessState, NullHypothesis, eprocess_hoeffding, eprocess_mixture
from .mechanisms import (
    PrivacyParams,
    RandomSource,
    laplace_privatize_batch,
    nprr_privatize_batch,
    r_of,
    sirr_privatize_batch,
)
from .schedules import check_alpha

__all__ = [
    "LAWS",
    "MECHANISMS",
    "METHODS",
    "ExperimentConfig",
    "StreamData",
    "ResultRow",
    "ResultTable",
    "sinusoidal_mean",
    "generate",
    "privatize_stream",
    "run_experiment",
]

LAWS = ("bernoulli", "beta", "uniform", "sinusoidal-mean", "logistic-ab")
MECHANISMS = ("nprr", "sirr", "laplace")

_CS_METHODS = (
    "nprr-hoeffding-cs",
    "nprr-mixture-two-sided",
    "nprr-mixture-lower",
    "nprr-gridkelly-cs",
    "sirr-lr-cs",
    "laplace-hoeffding-cs",
    "ab-lower-cs",
    "ab-two-sided-cs",
)
_CI_METHODS = ("nprr-hoeffding-ci", "nprr-pmkelly-ci", "laplace-hoeffding-ci")
_EPROCESS_METHODS = ("hoeffding-eprocess", "mixture-eprocess", "ab-weak-null-eprocess")
METHODS = _CS_METHODS + _CI_METHODS + _EPROCESS_METHODS

_AB_METHODS = ("ab-lower-cs", "ab-two-sided-cs", "ab-weak-null-eprocess")
_BINARY_LAWS = ("bernoulli", "sinusoidal-mean")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one simulation."""

    law: str = "bernoulli"
    mechanism: str = "nprr"
    method: str = "nprr-hoeffding-cs"
    epsilon: float = 2.0
    G: int = 1
    alpha: float = 0.05
    horizon: int = 1000
    replications: int = 1
    seed: int = 0
    bernoulli_p: float = 0.5
    beta_a: float = 10.0
    beta_b: float = 30.0
    pi: float = 0.5
    beta: float | None = None
    t0: int = 100
    null_mean: float = 0.5

    def __post_init__(self) -> None:
        if self.law not in LAWS:
            raise ValueError(f"unknown law {self.law!r}; choose from {LAWS}")
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}; choose from {MECHANISMS}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        check_alpha(self.alpha)
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1, got {self.horizon}")
        if self.replications < 1:
            raise ValueError(f"replications must be at least 1, got {self.replications}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.G) != self.G or self.G < 1:
            raise ValueError(f"G must be a positive integer, got {self.G}")
        if not 0.0 < self.bernoulli_p < 1.0:
            raise ValueError(f"bernoulli_p must lie in (0, 1), got {self.bernoulli_p}")
        if self.beta_a <= 0.0 or self.beta_b <= 0.0:
            raise ValueError("beta law parameters must be positive")
        if not 0.0 <= self.null_mean <= 1.0:
            raise ValueError(f"null_mean must lie in [0, 1], got {self.null_mean}")

        is_laplace_method = self.method.startswith("laplace-")
        if is_laplace_method != (self.mechanism == "laplace"):
            raise ValueError(
                f"method {self.method!r} and mechanism {self.mechanism!r} disagree "
                "on the privacy channel"
            )
        is_ab_method = self.method in _AB_METHODS
        if is_ab_method != (self.law == "logistic-ab"):
            raise ValueError(
                f"method {self.method!r} and law {self.law!r} disagree: arm-based "
                "methods pair with the 'logistic-ab' law only"
            )
        if self.law == "logistic-ab" and self.mechanism == "laplace":
            raise ValueError("the arm-based law uses the discrete G = 1 mechanism")
        if self.mechanism == "sirr" and self.law not in _BINARY_LAWS:
            raise ValueError(
                f"the binary mechanism needs a binary law, not {self.law!r}"
            )
        if self.method == "sirr-lr-cs":
            if self.mechanism == "nprr" and self.G != 1:
                raise ValueError("likelihood-ratio bounds need G = 1 records")

    @property
    def r(self) -> float:
        """Mixing weight of the discrete mechanism at this config's budget."""
        grid = 1 if self.mechanism == "sirr" or self.law == "logistic-ab" else self.G
        return r_of(self.epsilon, grid)

    def privacy_params(self) -> PrivacyParams:
        grid = 1 if self.mechanism == "sirr" or self.law == "logistic-ab" else self.G
        return PrivacyParams(r=self.r, G=grid)

    def mixture_config(self) -> MixtureConfig:
        return MixtureConfig(alpha=self.alpha, beta=self.beta, t0=self.t0)

    def ab_config(self) -> ABConfig:
        return ABConfig(
            pi=self.pi,
            mechanism=PrivacyParams(r=r_of(self.epsilon, 1), G=1),
            alpha=self.alpha,
            beta=self.beta,
            t0=self.t0,
        )


@dataclass(frozen=True)
class StreamData:
    """One replication's raw data: values, per-step target, optional arms."""

    x: np.ndarray
    truth: np.ndarray
    arms: np.ndarray | None = None


def sinusoidal_mean(t):
    """Drifting mean path 1 - sin(2 ln(e + t)) / (2 ln(e + 0.01 t)).

    The formula can exceed 1 for some steps; emission clips it to [0, 1], and
    targets are computed from the clipped path. Scalars give a float.
    """
    t = np.asarray(t, dtype=float)
    if t.size and t.min() < 1:
        raise ValueError("steps must satisfy t >= 1")
    mu = 1.0 - np.sin(2.0 * np.log(math.e + t)) / (2.0 * np.log(math.e + 0.01 * t))
    return mu if mu.shape else float(mu)


def generate(config: ExperimentConfig, rng) -> StreamData:
    """Draw one raw replication stream; deterministic given the generator.

    rng may be a RandomSource (its stream 0 is used) or a numpy Generator.
    Laws with a stated mean path emit Bernoulli draws at that (clipped) mean;
    the arm-based law draws all arms first, then all outcomes.
    """
    gen = rng.generator(0) if isinstance(rng, RandomSource) else rng
    T = config.horizon
    t = np.arange(1, T + 1, dtype=float)
    if config.law == "bernoulli":
        p = config.bernoulli_p
        x = (gen.random(T) < p).astype(float)
        return StreamData(x=x, truth=np.full(T, p))
    if config.law == "beta":
        mean = config.beta_a / (config.beta_a + config.beta_b)
        x = gen.beta(config.beta_a, config.beta_b, T)
        return StreamData(x=x, truth=np.full(T, mean))
    if config.law == "uniform":
        return StreamData(x=gen.random(T), truth=np.full(T, 0.5))
    if config.law == "sinusoidal-mean":
        mu = np.clip(sinusoidal_mean(t), 0.0, 1.0)
        x = (gen.random(T) < mu).astype(float)
        return StreamData(x=x, truth=np.cumsum(mu) / t)
    delta = logistic_effect_path(t)
    mu1 = (1.0 + delta) / 2.0
    mu0 = (1.0 - delta) / 2.0
    arms = (gen.random(T) < config.pi).astype(np.int64)
    means = np.where(arms == 1, mu1, mu0)
    x = (gen.random(T) < means).astype(float)
    return StreamData(x=x, truth=np.cumsum(delta) / t, arms=arms)


def privatize_stream(stream: StreamData, config: ExperimentConfig, rng: np.random.Generator):
    """Privatize one raw stream per the config's mechanism."""
    if config.law == "logistic-ab":
        return privatize_pseudo_outcomes(stream.x, stream.arms, config.ab_config(), rng)
    if config.mechanism == "nprr":
        return nprr_privatize_batch(stream.x, config.privacy_params(), rng)
    if config.mechanism == "sirr":
        return sirr_privatize_batch(stream.x, config.r, rng)
    return laplace_privatize_batch(stream.x, config.epsilon, rng)


def _infer(records, config: ExperimentConfig):
    method = config.method
    if method == "nprr-hoeffding-cs":
        return hoeffding_cs(records, alpha=config.alpha)
    if method == "nprr-mixture-two-sided":
        return mixture_cs_two_sided(records, config.mixture_config())
    if method == "nprr-mixture-lower":
        return mixture_cs_lower(records, config.mixture_config())
    if method == "nprr-gridkelly-cs":
        return gridkelly_cs(records, alpha=config.alpha)
    if method == "sirr-lr-cs":
        return sirr_lr_cs(records, alpha=config.alpha)
    if method == "laplace-hoeffding-cs":
        return laplace_hoeffding_cs(records, alpha=config.alpha)
    if method == "ab-lower-cs":
        return ab_lower_cs(records, config.ab_config())
    if method == "ab-two-sided-cs":
        return ab_cs_two_sided(records, config.ab_config())
    if method == "nprr-hoeffding-ci":
        return hoeffding_ci(records, n=config.horizon, alpha=config.alpha)
    if method == "nprr-pmkelly-ci":
        return pmkelly_ci(records, n=config.horizon, alpha=config.alpha)
    if method == "laplace-hoeffding-ci":
        return laplace_hoeffding_ci(records, n=config.horizon, alpha=config.alpha)
    if method == "hoeffding-eprocess":
        return eprocess_hoeffding(records, mu0=config.null_mean, alpha=config.alpha)
    if method == "mixture-eprocess":
        return eprocess_mixture(
            records, config.mixture_config(), NullHypothesis.le(config.null_mean)
        )
    return weak_null_eprocess(records, config.ab_config())


@dataclass(frozen=True)
class ResultRow:
    """One aggregated step of a simulation."""

    t: int
    method: str
    mean_width: float
    miscoverage: float
    mean_lower: float
    mean_upper: float
    replications: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.miscoverage <= 1.0:
            raise ValueError(f"miscoverage must lie in [0, 1], got {self.miscoverage}")
        if self.mean_width < 0.0:
            raise ValueError(f"widths must be nonnegative, got {self.mean_width}")


@dataclass(frozen=True)
class ResultTable:
    """Aggregated simulation results, one row per reported step."""

    rows: tuple[ResultRow, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def final(self) -> ResultRow:
        if not self.rows:
            raise ValueError("the table is empty")
        return self.rows[-1]

    @property
    def ever_miscoverage(self) -> float:
        """Fraction of replications that ever missed (final row's column)."""
        return self.final.miscoverage


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Run all replications of one configured simulation and aggregate.

    Each replication generates, privatizes, and infers independently; the
    aggregation is a sum keyed by step, so any execution order yields the
    same table.
    """
    source = RandomSource(config.seed)
    reps = config.replications
    T = config.horizon
    is_ci = config.method in _CI_METHODS
    is_eprocess = config.method in _EPROCESS_METHODS

    if is_ci:
        sum_width = sum_lower = sum_upper = 0.0
        misses = 0
    else:
        sum_lower = np.zeros(T)
        sum_upper = np.zeros(T)
        sum_width = np.zeros(T)
        misses = np.zeros(T, dtype=np.int64)

    for rep in range(reps):
        stream = generate(config, source.generator(2 * rep))
        records = privatize_stream(stream, config, source.generator(2 * rep + 1))
        result = _infer(records, config)
        if is_ci:
            assert isinstance(result, Interval)
            sum_width += result.width
            sum_lower += result.lower
            sum_upper += result.upper
            target = float(stream.truth[-1])
            misses += not result.lower <= target <= result.upper
        elif is_eprocess:
            assert isinstance(result, EProcessState)
            p_bar = result.running_min_inv
            sum_lower = sum_lower + p_bar
            sum_upper = sum_upper + p_bar
            crossed = result.log_e >= math.log(1.0 / config.alpha)
            misses += np.maximum.accumulate(crossed).astype(np.int64)
        else:
            assert isinstance(result, BoundSeries)
            sum_width += result.upper - result.lower
            sum_lower = sum_lower + result.lower
            sum_upper = sum_upper + result.upper
            miss = (result.lower > stream.truth) | (result.upper < stream.truth)
            misses += np.maximum.accumulate(miss).astype(np.int64)

    if is_ci:
        rows = (
            ResultRow(
                t=T,
                method=config.method,
                mean_width=sum_width / reps,
                miscoverage=misses / reps,
                mean_lower=sum_lower / reps,
                mean_upper=sum_upper / reps,
                replications=reps,
            ),
        )
        return ResultTable(rows=rows)
    rows = tuple(
        ResultRow(
            t=i + 1,
            method=config.method,
            mean_width=float(sum_width[i]) / reps,
            miscoverage=float(misses[i]) / reps,
            mean_lower=float(sum_lower[i]) / reps,
            mean_upper=float(sum_upper[i]) / reps,
            replications=reps,
        )
        for i in range(T)
    )
    return ResultTable(rows=rows)


def width_comparison(config: ExperimentConfig, other_method: str) -> float:
    """Fraction of replications where the config's method is strictly narrower.

    Both methods see identical records replication by replication; only the
    inference differs.
    """
    alt = replace(config, method=other_method)
    source = RandomSource(config.seed)
    narrower = 0
    for rep in range(config.replications):
        stream = generate(config, source.generator(2 * rep))
        records = privatize_stream(stream, config, source.generator(2 * rep + 1))
        ours = _infer(records, config)
        theirs = _infer(records, alt)
        if isinstance(ours, Interval):
            narrower += ours.width < theirs.width
        else:
            narrower += float(np.mean(ours.upper - ours.lower)) < float(
                np.mean(theirs.upper - theirs.lower)
            )
    return narrower / config.replications
