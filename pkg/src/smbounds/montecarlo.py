"""Empirical event-probability estimation with exact binomial confidence
intervals.

Trials are partitioned into fixed 2^16-path chunks; chunk j draws from a
counter-based substream keyed by (seed, j), so hit counts are bit-identical
no matter how the chunks are scheduled, and path i is the same path in every
run with the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import beta

from .bounds import LogProb
from .processes import EventSpec, EventVariant, IncrementLaw, event_hits, make_generator

__all__ = [
    "CHUNK_SIZE",
    "Estimate",
    "BoundCheck",
    "NestedEstimates",
    "clopper_pearson",
    "estimate_event",
    "estimate_events",
    "nested_event_estimates",
    "verify_bound",
    "tightness_ratio",
]

#: Fixed chunk size; substream j covers paths [j * CHUNK_SIZE, (j+1) * CHUNK_SIZE).
CHUNK_SIZE = 1 << 16


def clopper_pearson(hits: int, trials: int, gamma: float) -> tuple[float, float]:
    """Exact (conservative) two-sided binomial interval at confidence gamma.

    Valid at any sample size and arbitrarily deep in the tail, unlike the
    normal approximation.
    """
    if not 0 <= hits <= trials or trials < 1:
        raise ValueError(f"need 0 <= hits <= trials, got hits={hits}, trials={trials}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    alpha = 1.0 - gamma
    lo = 0.0 if hits == 0 else float(beta.ppf(alpha / 2.0, hits, trials - hits + 1))
    hi = 1.0 if hits == trials else float(beta.ppf(1.0 - alpha / 2.0, hits + 1, trials - hits))
    return lo, hi


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate of one event probability with its provenance."""

    law: IncrementLaw
    spec: EventSpec
    n: int
    trials: int
    hits: int
    gamma: float
    seed: int
    p_hat: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class BoundCheck:
    """Verdict of an estimate against a bound, carrying both for reproduction."""

    verdict: str  # "PASS" or "FLAG"
    estimate: Estimate
    bound: LogProb


@dataclass(frozen=True)
class NestedEstimates:
    """The three nested events estimated on the same sampled paths."""

    final: Estimate
    max_qc: Estimate
    stopped: Estimate
    nesting_ok: bool  # final => max => stopped held on every path


def _chunks(trials: int):
    index = 0
    done = 0
    while done < trials:
        m = min(CHUNK_SIZE, trials - done)
        yield index, m
        index += 1
        done += m


def _build_estimate(
    law: IncrementLaw, spec: EventSpec, n: int, trials: int, hits: int, gamma: float, seed: int
) -> Estimate:
    lo, hi = clopper_pearson(hits, trials, gamma)
    return Estimate(law, spec, n, trials, hits, gamma, seed, hits / trials, lo, hi)


def estimate_events(
    law: IncrementLaw,
    specs: Sequence[EventSpec],
    n: int,
    trials: int,
    seed: int,
    gamma: float = 0.95,
) -> list[Estimate]:
    """Estimate several events on the same simulated paths (shared seeds mean
    shared paths, so per-path comparisons across specs are meaningful)."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    counts = [0] * len(specs)
    for index, m in _chunks(trials):
        inc = law.sample(make_generator(seed, index), (m, n))
        for i, spec in enumerate(specs):
            counts[i] += int(event_hits(law, inc, spec).sum())
    return [
        _build_estimate(law, spec, n, trials, hits, gamma, seed)
        for spec, hits in zip(specs, counts)
    ]


def estimate_event(
    law: IncrementLaw,
    spec: EventSpec,
    n: int,
    trials: int,
    seed: int,
    gamma: float = 0.95,
) -> Estimate:
    """Estimate one event probability from `trials` independent paths."""
    return estimate_events(law, [spec], n, trials, seed, gamma)[0]


def nested_event_estimates(
    law: IncrementLaw,
    x: float,
    v: float,
    n: int,
    trials: int,
    seed: int,
    gamma: float = 0.95,
    y: Optional[float] = None,
) -> NestedEstimates:
    """Estimate the final-time, running-max, and stopped events on the same
    paths and check the per-path implications final => max => stopped."""
    specs = [
        EventSpec(x, v, EventVariant.FINAL_ONLY),
        EventSpec(x, v, EventVariant.MAX_WITH_FINAL_QC),
        EventSpec(x, v, EventVariant.STOPPED_ANY_K),
    ]
    counts = [0, 0, 0]
    nesting_ok = True
    for index, m in _chunks(trials):
        inc = law.sample(make_generator(seed, index), (m, n))
        flags = [event_hits(law, inc, spec) for spec in specs]
        for i in range(3):
            counts[i] += int(flags[i].sum())
        nesting_ok = nesting_ok and bool(
            np.all(flags[1] | ~flags[0]) and np.all(flags[2] | ~flags[1])
        )
    est = [
        _build_estimate(law, spec, n, trials, hits, gamma, seed)
        for spec, hits in zip(specs, counts)
    ]
    return NestedEstimates(est[0], est[1], est[2], nesting_ok)


def verify_bound(estimate: Estimate, bound: LogProb) -> BoundCheck:
    """PASS when the interval does not statistically contradict the bound
    (ci_low <= bound), FLAG otherwise.  Comparing against ci_low rather than
    p_hat keeps ordinary sampling noise from flagging; a PASS never asserts
    tightness."""
    verdict = "PASS" if estimate.ci_low <= bound.value else "FLAG"
    return BoundCheck(verdict, estimate, bound)


def tightness_ratio(estimate: Estimate, bound: LogProb) -> float:
    """bound / p_hat; near 1 means the bound is nearly attained."""
    if estimate.p_hat == 0.0:
        raise ValueError(
            f"ratio undefined at p_hat = 0; only the one-sided statement "
            f"p <= {estimate.ci_high:.6g} is available"
        )
    return bound.value / estimate.p_hat
