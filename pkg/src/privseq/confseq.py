"""Confidence sequences and fixed-sample intervals for privatized means.

All procedures here consume privatized records and bound the mean of the
underlying raw data. Weighted-average bounds (Hoeffding style, with fixed or
time-uniform weights, and a Laplace-channel variant) have closed forms;
mixture bounds integrate a sub-Gaussian wealth process against a Gaussian or
folded-Gaussian mixing density and are also closed form; betting bounds
(predictable Kelly and a grid of fixed bets) maintain nonnegative wealth per
candidate mean and are inverted numerically. Wealth is always tracked in log
space.

Bounds are reported per time step without intersecting across steps; call
BoundSeries.intersected() for the running intersection. NPRR-style bounds are
clipped to [0, 1]; the Laplace variants clip by default with an opt-out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .mechanisms import LaplaceBatch, LaplaceRecord, PrivateRecord, RecordBatch, grid_values
from .schedules import (
    LambdaSchedule,
    beta_opt,
    check_alpha,
    expand_weights,
    lambda_fixed_n,
    log_normal_cdf,
    predictable_gamma_sq,
    predictable_zeta,
    running_zeta,
)

__all__ = [
    "BoundSeries",
    "Interval",
    "MixtureConfig",
    "zeta",
    "hoeffding_half_width",
    "hoeffding_cs",
    "hoeffding_ci",
    "mixture_cs_two_sided",
    "mixture_cs_lower",
    "two_sided_mixture_nsm",
    "one_sided_mixture_nsm",
    "laplace_hoeffding_cs",
    "laplace_hoeffding_ci",
    "pmkelly_log_wealth",
    "pmkelly_ci",
    "gridkelly_log_wealth",
    "gridkelly_cs",
    "sirr_lr_log_wealth",
    "sirr_lr_cs",
    "invert_monotone",
]


def zeta(mu, r):
    """Conditional mean of a privatized draw when the raw mean is mu."""
    return r * mu + (1.0 - r) / 2.0


@dataclass(frozen=True)
class BoundSeries:
    """Per-step bounds on the raw mean: arrays t, estimate, lower, upper."""

    t: np.ndarray
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=np.int64)
        for name in ("estimate", "lower", "upper"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != t.shape:
                raise ValueError(f"{name} must match t in shape")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t", t)

    def __len__(self) -> int:
        return int(self.t.size)

    @classmethod
    def empty(cls) -> "BoundSeries":
        z = np.empty(0)
        return cls(t=np.empty(0, dtype=np.int64), estimate=z, lower=z, upper=z)

    def intersected(self) -> "BoundSeries":
        """Running intersection: cumulative max of lower, min of upper."""
        return BoundSeries(
            t=self.t,
            estimate=self.estimate,
            lower=np.maximum.accumulate(self.lower),
            upper=np.minimum.accumulate(self.upper),
        )


@dataclass(frozen=True)
class Interval:
    """A fixed-sample interval. lower > upper encodes an empty intersection."""

    lower: float
    upper: float

    @property
    def width(self) -> float:
        return max(0.0, self.upper - self.lower)


@dataclass(frozen=True)
class MixtureConfig:
    """Settings for the mixture bounds: level alpha, scale beta, design time t0.

    beta left as None picks the width-optimal scale at t0: the two-sided
    bound optimizes at level alpha, the one-sided variants at 2 * alpha.
    """

    alpha: float = 0.05
    beta: float | None = None
    t0: int = 100

    def __post_init__(self) -> None:
        check_alpha(self.alpha)
        if self.beta is not None and self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if int(self.t0) != self.t0 or self.t0 < 1:
            raise ValueError(f"t0 must be a positive integer, got {self.t0}")

    def resolve_beta(self, sided: str = "two") -> float:
        if self.beta is not None:
            return self.beta
        if sided == "two":
            return beta_opt(self.t0, self.alpha)
        doubled = 2.0 * self.alpha
        return beta_opt(self.t0, doubled if doubled < 1.0 else self.alpha)


def _as_record_batch(records) -> RecordBatch:
    if isinstance(records, RecordBatch):
        return records
    seq = list(records)
    if seq and not isinstance(seq[0], PrivateRecord):
        raise TypeError("expected PrivateRecord entries or a RecordBatch")
    return RecordBatch.from_records(seq)


def _as_laplace_batch(records) -> LaplaceBatch:
    if isinstance(records, LaplaceBatch):
        return records
    seq = list(records)
    if seq and not isinstance(seq[0], LaplaceRecord):
        raise TypeError("expected LaplaceRecord entries or a LaplaceBatch")
    return LaplaceBatch.from_records(seq)


def _constant_params(batch: RecordBatch) -> tuple[float, int]:
    r_vals = np.unique(batch.r)
    g_vals = np.unique(batch.G)
    if r_vals.size != 1 or g_vals.size != 1:
        raise ValueError(
            "this bound requires a constant mechanism: every record must share one (r, G)"
        )
    return float(r_vals[0]), int(g_vals[0])


def hoeffding_half_width(lam, r, alpha: float) -> float:
    """Closed-form half-width of the weighted Hoeffding bound after all steps."""
    check_alpha(alpha)
    lam = np.asarray(lam, dtype=float)
    r_arr = np.broadcast_to(np.asarray(r, dtype=float), lam.shape)
    return float(
        (math.log(1.0 / alpha) + np.sum(lam * lam) / 8.0) / np.sum(r_arr * lam)
    )


def _hoeffding_paths(batch: RecordBatch, lam: np.ndarray, alpha: float):
    num = np.cumsum(lam * (batch.z - (1.0 - batch.r) / 2.0))
    den = np.cumsum(batch.r * lam)
    width_num = math.log(1.0 / alpha) + np.cumsum(lam * lam) / 8.0
    with np.errstate(divide="ignore", invalid="ignore"):
        est = num / den
        width = width_num / den
    return est, width


def hoeffding_cs(records, schedule=None, alpha: float = 0.05, clip: bool = True) -> BoundSeries:
    """Weighted Hoeffding confidence sequence for the raw mean.

    schedule may be a LambdaSchedule (fixed-n or time-uniform), an explicit
    array of per-step weights, or None for the time-uniform default. The
    series is empty when the stream is empty.

    Each bound is a level-alpha guarantee on its own side, mirroring the
    one-sided construction it inverts; treating lower and upper jointly
    spends up to twice alpha.
    """
    check_alpha(alpha)
    batch = _as_record_batch(records)
    T = len(batch)
    if T == 0:
        return BoundSeries.empty()
    if isinstance(schedule, LambdaSchedule):
        alpha = schedule.resolve_alpha(alpha)
    lam = expand_weights(schedule, T, alpha)
    est, width = _hoeffding_paths(batch, lam, alpha)
    lower, upper = est - width, est + width
    if clip:
        lower, upper, est = np.clip(lower, 0, 1), np.clip(upper, 0, 1), np.clip(est, 0, 1)
    return BoundSeries(t=np.arange(1, T + 1), estimate=est, lower=lower, upper=upper)


def hoeffding_ci(
    records, n: int, alpha: float = 0.05, lam: float | None = None, clip: bool = True
) -> Interval:
    """Fixed-sample weighted Hoeffding interval from exactly n records.

    Uses the width-optimal constant weight for (n, alpha) unless lam
    overrides it, and intersects the per-step bounds through n.
    """
    check_alpha(alpha)
    batch = _as_record_batch(records)
    if len(batch) != n:
        raise ValueError(f"expected exactly n={n} records, got {len(batch)}")
    lam_val = lambda_fixed_n(n, alpha) if lam is None else float(lam)
    est, width = _hoeffding_paths(batch, np.full(n, lam_val), alpha)
    lower = float(np.max(est - width))
    upper = float(np.min(est + width))
    if clip:
        lower, upper = min(max(lower, 0.0), 1.0), min(max(upper, 0.0), 1.0)
    return Interval(lower=lower, upper=upper)


def _mixture_mu_hat(batch: RecordBatch, r: float) -> np.ndarray:
    t = np.arange(1, len(batch) + 1, dtype=float)
    return np.cumsum(batch.z - (1.0 - r) / 2.0) / (t * r)


def mixture_cs_two_sided(records, config: MixtureConfig | None = None) -> BoundSeries:
    """Two-sided Gaussian-mixture confidence sequence (constant mechanism only)."""
    config = config or MixtureConfig()
    batch = _as_record_batch(records)
    T = len(batch)
    if T == 0:
        return BoundSeries.empty()
    r, _ = _constant_params(batch)
    beta = config.resolve_beta("two")
    alpha = config.alpha
    t = np.arange(1, T + 1, dtype=float)
    a = t * beta * beta + 1.0
    width = np.sqrt(a / (2.0 * (t * r * beta) ** 2) * np.log(np.sqrt(a) / alpha))
    mu_hat = _mixture_mu_hat(batch, r)
    return BoundSeries(
        t=np.arange(1, T + 1),
        estimate=np.clip(mu_hat, 0, 1),
        lower=np.clip(mu_hat - width, 0, 1),
        upper=np.clip(mu_hat + width, 0, 1),
    )


def mixture_cs_lower(records, config: MixtureConfig | None = None) -> BoundSeries:
    """Lower-sided folded-mixture confidence sequence; the upper bound is 1."""
    config = config or MixtureConfig()
    batch = _as_record_batch(records)
    T = len(batch)
    if T == 0:
        return BoundSeries.empty()
    r, _ = _constant_params(batch)
    beta = config.resolve_beta("one")
    alpha = config.alpha
    t = np.arange(1, T + 1, dtype=float)
    a = t * beta * beta + 1.0
    width = np.sqrt(a / (2.0 * (t * r * beta) ** 2) * np.log1p(np.sqrt(a) / (2.0 * alpha)))
    mu_hat = _mixture_mu_hat(batch, r)
    return BoundSeries(
        t=np.arange(1, T + 1),
        estimate=np.clip(mu_hat, 0, 1),
        lower=np.clip(mu_hat - width, 0, 1),
        upper=np.ones(T),
    )


def two_sided_mixture_nsm(S, t, rho: float):
    """log of the Gaussian-mixture supermartingale at cumulative score S, time t."""
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    S = np.asarray(S, dtype=float)
    t = np.asarray(t, dtype=float)
    a = t * rho * rho / 4.0 + 1.0
    out = rho * rho * S * S / (2.0 * a) - 0.5 * np.log(a)
    return out if out.shape else float(out)


def one_sided_mixture_nsm(S, t, rho: float):
    """log of the folded-mixture supermartingale (positive bets only)."""
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    S = np.asarray(S, dtype=float)
    t = np.asarray(t, dtype=float)
    a = t * rho * rho / 4.0 + 1.0
    out = (
        math.log(2.0)
        - 0.5 * np.log(a)
        + rho * rho * S * S / (2.0 * a)
        + log_normal_cdf(rho * S / np.sqrt(a))
    )
    return out if out.shape else float(out)


def _laplace_schedule(schedule) -> LambdaSchedule:
    if schedule is None:
        return LambdaSchedule(kind="laplace")
    if not isinstance(schedule, LambdaSchedule) or schedule.kind != "laplace":
        raise ValueError("Laplace bounds take a LambdaSchedule of kind 'laplace'")
    return schedule


def _laplace_paths(batch: LaplaceBatch, lam: np.ndarray, alpha: float):
    eps = batch.epsilon
    assert (np.abs(lam) < eps).all(), "internal: weights must stay below epsilon"
    psi = -np.log1p(-((lam / eps) ** 2))
    slam = np.cumsum(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.cumsum(lam * batch.z) / slam
        width = (math.log(1.0 / alpha) + np.cumsum(lam * lam / 8.0 + psi)) / slam
    return est, width


def laplace_hoeffding_cs(
    records, schedule=None, alpha: float = 0.05, clip: bool = True
) -> BoundSeries:
    """Hoeffding-style confidence sequence for the Laplace channel.

    Weights decay like the time-uniform rule but account for the noise
    variance of each record and are truncated at c * epsilon_t. As with
    the discrete-channel sequence, each bound is level alpha on its own
    side and the pair jointly spends up to twice alpha.
    """
    check_alpha(alpha)
    sched = _laplace_schedule(schedule)
    if not 0.0 < sched.c < 1.0:
        raise ValueError(f"Laplace truncation c must lie in (0, 1), got {sched.c}")
    batch = _as_laplace_batch(records)
    T = len(batch)
    if T == 0:
        return BoundSeries.empty()
    alpha = sched.resolve_alpha(alpha)
    eps = batch.epsilon
    variance = np.cumsum(1.0 / 8.0 + 1.0 / eps**2)
    t = np.arange(1, T + 1, dtype=float)
    raw = np.sqrt(math.log(1.0 / alpha) / (variance * np.log(t + 1.0)))
    lam = np.minimum(raw, sched.c * eps)
    est, width = _laplace_paths(batch, lam, alpha)
    lower, upper = est - width, est + width
    if clip:
        lower, upper, est = np.clip(lower, 0, 1), np.clip(upper, 0, 1), np.clip(est, 0, 1)
    return BoundSeries(t=np.arange(1, T + 1), estimate=est, lower=lower, upper=upper)


def laplace_hoeffding_ci(
    records, n: int, alpha: float = 0.05, schedule=None, clip: bool = True
) -> Interval:
    """Fixed-sample interval for the Laplace channel from exactly n records."""
    check_alpha(alpha)
    sched = _laplace_schedule(schedule)
    if not 0.0 < sched.c < 1.0:
        raise ValueError(f"Laplace truncation c must lie in (0, 1), got {sched.c}")
    batch = _as_laplace_batch(records)
    if len(batch) != n:
        raise ValueError(f"expected exactly n={n} records, got {len(batch)}")
    alpha = sched.resolve_alpha(alpha)
    eps = batch.epsilon
    variance = np.cumsum(1.0 / 8.0 + 1.0 / eps**2)
    t = np.arange(1, n + 1, dtype=float)
    raw = np.sqrt(math.log(1.0 / alpha) / ((n / t) * variance))
    lam = np.minimum(raw, sched.c * eps)
    est, width = _laplace_paths(batch, lam, alpha)
    lower = float(np.max(est - width))
    upper = float(np.min(est + width))
    if clip:
        lower, upper = min(max(lower, 0.0), 1.0), min(max(upper, 0.0), 1.0)
    return Interval(lower=lower, upper=upper)


def invert_monotone(
    f: Callable[[float], float],
    threshold: float,
    lo: float = 0.0,
    hi: float = 1.0,
    tol: float = 1e-6,
    grid_step: float = 1e-3,
    inclusive: bool = False,
) -> float:
    """Smallest point in [lo, hi] where the nonincreasing f drops below threshold.

    A coarse grid at grid_step brackets the crossing (searched by bisection
    over grid indices, valid because f is monotone), then plain bisection
    refines to tol. Returns lo when f(lo) is already below the threshold and
    hi when f never drops below it. inclusive=True counts exact threshold
    hits as below, which keeps degenerate all-equal curves on the accepting
    side.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")

    def ok(x: float) -> bool:
        value = f(x)
        return value <= threshold if inclusive else value < threshold

    if ok(lo):
        return lo
    if not ok(hi):
        return hi
    npts = max(2, int(round((hi - lo) / grid_step)) + 1)
    grid = np.linspace(lo, hi, npts)
    left, right = 0, npts - 1
    while right - left > 1:
        mid = (left + right) // 2
        if ok(float(grid[mid])):
            right = mid
        else:
            left = mid
    a, b = float(grid[left]), float(grid[right])
    while b - a > tol:
        mid = 0.5 * (a + b)
        if ok(mid):
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)


def pmkelly_log_wealth(
    records, mu: float, n: int | None = None, alpha: float = 0.05, c: float = 0.8
) -> np.ndarray:
    """Per-step log wealth of the predictable Kelly bet against raw mean mu."""
    check_alpha(alpha)
    batch = _as_record_batch(records)
    horizon = len(batch) if n is None else n
    zeta_mu = zeta(mu, batch.r)
    eta = np.sqrt(
        2.0 * math.log(1.0 / alpha) / (predictable_gamma_sq(batch.z) * horizon)
    )
    lam = np.minimum(eta, c / np.maximum(zeta_mu, 1e-12))
    return np.cumsum(np.log1p(lam * (batch.z - zeta_mu)))


def _pmkelly_max_wealth(batch: RecordBatch, n: int, alpha: float, c: float):
    eta = np.sqrt(2.0 * math.log(1.0 / alpha) / (predictable_gamma_sq(batch.z) * n))

    def f(mu: float) -> float:
        zeta_mu = zeta(mu, batch.r)
        lam = np.minimum(eta, c / np.maximum(zeta_mu, 1e-12))
        return float(np.max(np.cumsum(np.log1p(lam * (batch.z - zeta_mu)))))

    return f


def pmkelly_ci(
    records,
    n: int,
    alpha: float = 0.05,
    c: float = 0.8,
    grid_step: float = 1e-3,
    tol: float = 1e-6,
) -> Interval:
    """Betting interval from exactly n records via the predictable Kelly process.

    The lower endpoint inverts the running maximum of the log wealth, which
    is nonincreasing in the candidate mean; the upper endpoint repeats the
    inversion on the mirrored records (z -> 1 - z) and reflects back.
    """
    check_alpha(alpha)
    batch = _as_record_batch(records)
    if len(batch) != n:
        raise ValueError(f"expected exactly n={n} records, got {len(batch)}")
    threshold = math.log(1.0 / alpha)
    lower = invert_monotone(
        _pmkelly_max_wealth(batch, n, alpha, c),
        threshold,
        tol=tol,
        grid_step=grid_step,
        inclusive=True,
    )
    mirrored = RecordBatch(z=1.0 - batch.z, r=batch.r, G=batch.G)
    reflected = invert_monotone(
        _pmkelly_max_wealth(mirrored, n, alpha, c),
        threshold,
        tol=tol,
        grid_step=grid_step,
        inclusive=True,
    )
    upper = 1.0 - reflected
    return Interval(lower=lower, upper=max(upper, lower))


def _gk_value_grid(batch: RecordBatch):
    r, G = _constant_params(batch)
    vals = grid_values(G)
    idx = np.rint(batch.z * G).astype(np.int64)
    if not np.allclose(batch.z, vals[idx]):
        raise ValueError("records must sit on the mechanism's output grid")
    onehot = idx[:, None] == np.arange(G + 1)[None, :]
    counts = np.cumsum(onehot, axis=0).astype(float)
    return r, vals, counts


def _gk_log_wealth_from_counts(
    counts_t: np.ndarray, vals: np.ndarray, r: float, mus: np.ndarray, D: int, theta: float
) -> np.ndarray:
    """log of the grid-bet wealth for one or many times at many candidate means.

    counts_t has shape (..., V) of per-value counts; result has shape
    (..., m) over the candidate means.
    """
    zeta_m = np.clip(zeta(mus, r), 1e-12, 1.0 - 1e-12)
    acc_plus = None
    acc_minus = None
    diff = vals[:, None] - zeta_m[None, :]
    for d in range(1, D + 1):
        lam_plus = d / ((D + 1) * zeta_m)
        lam_minus = d / ((D + 1) * (1.0 - zeta_m))
        log_plus = counts_t @ np.log1p(lam_plus[None, :] * diff)
        log_minus = counts_t @ np.log1p(-lam_minus[None, :] * diff)
        acc_plus = log_plus if acc_plus is None else np.logaddexp(acc_plus, log_plus)
        acc_minus = log_minus if acc_minus is None else np.logaddexp(acc_minus, log_minus)
    log_d = math.log(D)
    return np.logaddexp(
        math.log(theta) + acc_plus - log_d,
        math.log(1.0 - theta) + acc_minus - log_d,
    )


def gridkelly_log_wealth(records, mus, D: int = 30, theta: float = 0.5) -> np.ndarray:
    """log wealth of the convex grid-bet mixture, shape (T, len(mus)).

    Row t - 1 is the wealth after t records at each candidate mean. The D
    positive and D negative fixed bets enter with uniform weight 1/D and the
    two signs mix with weights theta and 1 - theta, so wealth starts at 1.
    Requires a constant mechanism across the stream.
    """
    if int(D) != D or D < 1:
        raise ValueError(f"D must be a positive integer, got {D}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    batch = _as_record_batch(records)
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    r, vals, counts = _gk_value_grid(batch)
    return _gk_log_wealth_from_counts(counts, vals, r, mus, int(D), theta)


def _gk_interval_edges(
    counts_row: np.ndarray,
    vals: np.ndarray,
    r: float,
    mus: np.ndarray,
    below: np.ndarray,
    logk_row: np.ndarray,
    threshold: float,
    D: int,
    theta: float,
    tol: float,
):
    idx = np.flatnonzero(below)
    if idx.size == 0:
        mu_min = float(mus[int(np.argmin(logk_row))])
        return mu_min, mu_min

    def value(mu: float) -> float:
        return float(
            _gk_log_wealth_from_counts(
                counts_row[None, :], vals, r, np.array([mu]), D, theta
            )[0, 0]
        )

    first, last = int(idx[0]), int(idx[-1])
    if first == 0:
        lower = float(mus[0])
    else:
        a, b = float(mus[first - 1]), float(mus[first])
        while b - a > tol:
            mid = 0.5 * (a + b)
            if value(mid) < threshold:
                b = mid
            else:
                a = mid
        lower = 0.5 * (a + b)
    if last == mus.size - 1:
        upper = float(mus[-1])
    else:
        a, b = float(mus[last]), float(mus[last + 1])
        while b - a > tol:
            mid = 0.5 * (a + b)
            if value(mid) < threshold:
                a = mid
            else:
                b = mid
        upper = 0.5 * (a + b)
    return lower, upper


def gridkelly_cs(
    records,
    D: int = 30,
    theta: float = 0.5,
    alpha: float = 0.05,
    grid_step: float = 1e-3,
    tol: float = 1e-6,
) -> BoundSeries:
    """Confidence sequence from the convex grid-bet wealth process.

    Each step's set is where the wealth stays below 1/alpha, located on a
    candidate-mean grid and refined at the edges by bisection. A step whose
    grid admits no candidate collapses to the wealth-minimizing point.
    """
    check_alpha(alpha)
    batch = _as_record_batch(records)
    T = len(batch)
    if T == 0:
        return BoundSeries.empty()
    r, vals, counts = _gk_value_grid(batch)
    npts = max(2, int(round(1.0 / grid_step)) + 1)
    mus = np.linspace(0.0, 1.0, npts)
    logk = _gk_log_wealth_from_counts(counts, vals, r, mus, int(D), theta)
    threshold = math.log(1.0 / alpha)
    below = logk < threshold
    lower = np.empty(T)
    upper = np.empty(T)
    for i in range(T):
        lower[i], upper[i] = _gk_interval_edges(
            counts[i], vals, r, mus, below[i], logk[i], threshold, int(D), theta, tol
        )
    t_idx = np.arange(1, T + 1, dtype=float)
    est = np.clip(np.cumsum(batch.z - (1.0 - r) / 2.0) / (t_idx * r), 0, 1)
    return BoundSeries(t=np.arange(1, T + 1), estimate=est, lower=lower, upper=upper)


def _sirr_check(batch: RecordBatch) -> None:
    if not (batch.G == 1).all():
        raise ValueError("likelihood-ratio bounds require binary records (G = 1)")
    if not np.isin(batch.z, (0.0, 1.0)).all():
        raise ValueError("likelihood-ratio bounds require z in {0, 1}")


def _sirr_numerator(batch: RecordBatch) -> np.ndarray:
    plug = predictable_zeta(batch.z)
    return np.cumsum(batch.z * np.log(plug) + (1.0 - batch.z) * np.log1p(-plug))


def _sirr_denominator_col(batch: RecordBatch, p: float) -> np.ndarray:
    zeta_p = zeta(p, batch.r)
    return np.cumsum(
        special.xlogy(batch.z, zeta_p) + special.xlogy(1.0 - batch.z, 1.0 - zeta_p)
    )


def sirr_lr_log_wealth(records, p: float) -> np.ndarray:
    """Per-step log likelihood ratio of the plug-in model against raw mean p."""
    batch = _as_record_batch(records)
    _sirr_check(batch)
    return _sirr_numerator(batch) - _sirr_denominator_col(batch, p)


def sirr_lr_cs(
    records,
    alpha: float = 0.05,
    grid_step: float = 1e-3,
    tol: float = 1e-6,
) -> BoundSeries:
    """Likelihood-ratio confidence sequence for binary-mechanism records.

    The wealth against candidate p is the running product of plug-in over
    candidate likelihoods; its log is convex in p, so each step's set is an
    interval found on a grid and refined at the edges by bisection.
    """
    check_alpha(alpha)
    batch = _as_record_batch(records)
    _sirr_check(batch)
    T = len(batch)
    if T == 0:
        return BoundSeries.empty()
    numer = _sirr_numerator(batch)
    npts = max(2, int(round(1.0 / grid_step)) + 1)
    ps = np.linspace(0.0, 1.0, npts)
    t = np.arange(1, T + 1, dtype=float)
    constant_r = np.unique(batch.r).size == 1
    if constant_r:
        r = float(batch.r[0])
        zeta_p = zeta(ps, r)
        S = np.cumsum(batch.z)
        denom = special.xlogy(S[:, None], zeta_p[None, :]) + special.xlogy(
            (t - S)[:, None], 1.0 - zeta_p[None, :]
        )
    else:
        zeta_ip = zeta(ps[None, :], batch.r[:, None])
        denom = np.cumsum(
            special.xlogy(batch.z[:, None], zeta_ip)
            + special.xlogy(1.0 - batch.z[:, None], 1.0 - zeta_ip),
            axis=0,
        )
    logm = numer[:, None] - denom
    threshold = math.log(1.0 / alpha)
    below = logm < threshold
    lower = np.empty(T)
    upper = np.empty(T)
    for i in range(T):
        idx = np.flatnonzero(below[i])
        if idx.size == 0:
            lower[i] = upper[i] = float(ps[int(np.argmin(logm[i]))])
            continue
        prefix = batch.z[: i + 1]
        pre_batch = RecordBatch(z=prefix, r=batch.r[: i + 1], G=batch.G[: i + 1])

        def value(p: float) -> float:
            return float(numer[i] - _sirr_denominator_col(pre_batch, p)[-1])

        first, last = int(idx[0]), int(idx[-1])
        if first == 0:
            lower[i] = 0.0
        else:
            a, b = float(ps[first - 1]), float(ps[first])
            while b - a > tol:
                mid = 0.5 * (a + b)
                if value(mid) < threshold:
                    b = mid
                else:
                    a = mid
            lower[i] = 0.5 * (a + b)
        if last == npts - 1:
            upper[i] = 1.0
        else:
            a, b = float(ps[last]), float(ps[last + 1])
            while b - a > tol:
                mid = 0.5 * (a + b)
                if value(mid) < threshold:
                    a = mid
                else:
                    b = mid
            upper[i] = 0.5 * (a + b)
    est = np.clip((running_zeta(batch.z) - (1.0 - batch.r) / 2.0) / batch.r, 0, 1)
    return BoundSeries(t=np.arange(1, T + 1), estimate=est, lower=lower, upper=upper)
