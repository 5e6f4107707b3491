"""One-step increment laws with known conditional moments, path simulation,
and the deviation events evaluated along simulated paths.

All laws are IID per path, so the quadratic characteristic and the truncated
variance are deterministic multiples of the step count; every event is then
exactly decidable from the realized partial sums alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import gammainc

__all__ = [
    "TwoPointExtremal",
    "TwoPointBounded",
    "DriftedTwoPoint",
    "CenteredExponential",
    "IncrementLaw",
    "EventVariant",
    "EventSpec",
    "PathRecord",
    "parse_law",
    "make_generator",
    "exact_mgf",
    "exceedance_tail",
    "simulate_path",
    "event_hit",
    "event_hits",
]

_U64 = (1 << 64) - 1


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream); stream i is identical
    no matter how the surrounding work is batched."""
    key = (int(seed) & _U64) | ((int(stream) & _U64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


class _TwoPointBase:
    """Shared machinery for laws supported on two atoms."""

    def atoms(self) -> tuple[tuple[float, float], tuple[float, float]]:
        raise NotImplementedError

    def mean(self) -> float:
        return sum(v * p for v, p in self.atoms())

    def second_moment(self) -> float:
        """One-step conditional second moment E[xi^2] (the per-step increment
        of the quadratic characteristic)."""
        return sum(v * v * p for v, p in self.atoms())

    def truncated_second_moment(self, y: float) -> float:
        """E[xi^2 1{xi <= y}], exact from the atoms."""
        if y <= 0:
            raise ValueError(f"truncation level y must be > 0, got {y}")
        return sum(v * v * p for v, p in self.atoms() if v <= y)

    def exceed_prob(self, y: float) -> float:
        """P(xi > y), exact from the atoms."""
        if y <= 0:
            raise ValueError(f"truncation level y must be > 0, got {y}")
        return sum(p for v, p in self.atoms() if v > y)

    @property
    def support_max(self) -> float:
        return max(v for v, _ in self.atoms())

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        (v0, p0), (v1, _) = self.atoms()
        return np.where(rng.random(shape) < p0, v0, v1)


@dataclass(frozen=True)
class TwoPointExtremal(_TwoPointBase):
    """Mean-zero law P(xi=1) = s2/(1+s2), P(xi=-s2) = 1/(1+s2); it attains the
    two-point MGF bound with equality, so E[xi^2] = s2 and support <= 1."""

    sigma2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")

    def atoms(self):
        s2 = self.sigma2
        return ((1.0, s2 / (1.0 + s2)), (-s2, 1.0 / (1.0 + s2)))

    def label(self) -> str:
        return f"extremal:{self.sigma2:g}"


@dataclass(frozen=True)
class TwoPointBounded(_TwoPointBase):
    """Mean-zero law P(xi=1) = b/(1+b), P(xi=-b) = 1/(1+b); support in [-b, 1]
    with E[xi^2] = b."""

    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"b must be > 0, got {self.b}")

    def atoms(self):
        b = self.b
        return ((1.0, b / (1.0 + b)), (-b, 1.0 / (1.0 + b)))

    def label(self) -> str:
        return f"bounded:{self.b:g}"


@dataclass(frozen=True)
class DriftedTwoPoint(_TwoPointBase):
    """TwoPointBounded(b) shifted down by delta in [0, b]: mean -delta <= 0,
    support still bounded above by 1 (a strict supermartingale increment)."""

    b: float
    delta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"b must be > 0, got {self.b}")
        if not (math.isfinite(self.delta) and 0 <= self.delta <= self.b):
            raise ValueError(f"delta must be in [0, b], got delta={self.delta}, b={self.b}")

    def atoms(self):
        b, d = self.b, self.delta
        return ((1.0 - d, b / (1.0 + b)), (-b - d, 1.0 / (1.0 + b)))

    def label(self) -> str:
        return f"drifted:{self.b:g},{self.delta:g}"


@dataclass(frozen=True)
class CenteredExponential:
    """xi = Z - 1 with Z standard exponential: mean 0, E[xi^2] = 1, xi >= -1,
    unbounded above."""

    def atoms(self) -> None:
        return None

    def mean(self) -> float:
        return 0.0

    def second_moment(self) -> float:
        return 1.0

    def truncated_second_moment(self, y: float) -> float:
        """E[xi^2 1{xi <= y}] via regularized lower incomplete gammas of the
        shifted variable: 2 P(3, c) - 2 P(2, c) + P(1, c) at c = y + 1."""
        if y <= 0:
            raise ValueError(f"truncation level y must be > 0, got {y}")
        c = y + 1.0
        return float(2.0 * gammainc(3.0, c) - 2.0 * gammainc(2.0, c) + gammainc(1.0, c))

    def exceed_prob(self, y: float) -> float:
        if y <= 0:
            raise ValueError(f"truncation level y must be > 0, got {y}")
        return math.exp(-(y + 1.0))

    @property
    def support_max(self) -> float:
        return math.inf

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.standard_exponential(shape) - 1.0

    def label(self) -> str:
        return "cexp"


IncrementLaw = Union[TwoPointExtremal, TwoPointBounded, DriftedTwoPoint, CenteredExponential]


def parse_law(text: str) -> IncrementLaw:
    """Parse a law specification string: extremal:S2 | bounded:B | drifted:B,D | cexp."""
    kind, _, params = text.strip().partition(":")
    try:
        if kind == "extremal":
            return TwoPointExtremal(float(params))
        if kind == "bounded":
            return TwoPointBounded(float(params))
        if kind == "drifted":
            b, d = params.split(",")
            return DriftedTwoPoint(float(b), float(d))
        if kind == "cexp":
            return CenteredExponential()
    except ValueError as exc:
        raise ValueError(f"bad law parameters in {text!r}: {exc}") from exc
    raise ValueError(f"unknown law kind {kind!r} (want extremal/bounded/drifted/cexp)")


def exact_mgf(law: IncrementLaw, lam: float) -> float:
    """Exact E[e^{lam*xi}] for finite-support laws (from the atoms) and for the
    centered exponential (closed form, finite only for lam < 1)."""
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    atoms = law.atoms()
    if atoms is not None:
        return sum(p * math.exp(lam * v) for v, p in atoms)
    if lam >= 1.0:
        return math.inf
    return math.exp(-lam) / (1.0 - lam)


class EventVariant(enum.Enum):
    STOPPED_ANY_K = "stopped"
    MAX_WITH_FINAL_QC = "max"
    FINAL_ONLY = "final"
    TRUNCATED_ANY_K = "truncated"


@dataclass(frozen=True)
class EventSpec:
    """Deviation event at threshold x with variance budget v^2.

    stopped:   X_k >= x and <X>_k <= v^2 for some k in [1, n]
    max:       max_k X_k >= x and <X>_n <= v^2
    final:     X_n >= x and <X>_n <= v^2
    truncated: X_k >= x and V_k^2(y) <= v^2 for some k (requires y)
    """

    x: float
    v: float
    variant: EventVariant
    y: Optional[float] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.x):
            raise ValueError(f"x must be finite, got {self.x}")
        if not (math.isfinite(self.v) and self.v > 0):
            raise ValueError(f"v must be > 0, got {self.v}")
        if self.variant is EventVariant.TRUNCATED_ANY_K:
            if self.y is None or self.y <= 0:
                raise ValueError("truncated events need a truncation level y > 0")
        elif self.y is not None:
            raise ValueError(f"y only applies to truncated events, got y={self.y}")


@dataclass
class PathRecord:
    """One simulated trajectory with its running sums and (deterministic,
    law-derived) variance processes."""

    increments: np.ndarray
    partial_sums: np.ndarray
    qc: np.ndarray
    trunc_var: Optional[np.ndarray]
    max_increment: float

    def __len__(self) -> int:
        return len(self.increments)


def simulate_path(law: IncrementLaw, n: int, seed: int, y: Optional[float] = None) -> PathRecord:
    """Simulate one path of n IID increments; bit-reproducible from (law, n, seed)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    inc = law.sample(make_generator(seed), (n,)).astype(float)
    steps = np.arange(1, n + 1, dtype=float)
    qc = law.second_moment() * steps
    tv = law.truncated_second_moment(y) * steps if y is not None else None
    return PathRecord(
        increments=inc,
        partial_sums=np.cumsum(inc),
        qc=qc,
        trunc_var=tv,
        max_increment=float(inc.max()),
    )


def event_hit(path: PathRecord, spec: EventSpec) -> bool:
    """Exact indicator of the event along the stored trajectory.

    The k-wise variants require both conditions at the same k; all
    comparisons are inclusive.
    """
    ps = path.partial_sums
    if spec.variant is EventVariant.STOPPED_ANY_K:
        return bool(np.any((ps >= spec.x) & (path.qc <= spec.v**2)))
    if spec.variant is EventVariant.MAX_WITH_FINAL_QC:
        return bool(path.qc[-1] <= spec.v**2 and np.any(ps >= spec.x))
    if spec.variant is EventVariant.FINAL_ONLY:
        return bool(path.qc[-1] <= spec.v**2 and ps[-1] >= spec.x)
    if spec.variant is EventVariant.TRUNCATED_ANY_K:
        if path.trunc_var is None:
            raise ValueError("path carries no truncated variance; simulate with y set")
        return bool(np.any((ps >= spec.x) & (path.trunc_var <= spec.v**2)))
    raise AssertionError(f"unhandled variant {spec.variant}")


def event_hits(law: IncrementLaw, increments: np.ndarray, spec: EventSpec) -> np.ndarray:
    """Vectorized event indicators for a (paths, n) increment matrix.

    The variance processes are deterministic for IID laws, so the per-k budget
    conditions reduce to a boolean mask over k shared by all paths.
    """
    if increments.ndim != 2:
        raise ValueError(f"expected a (paths, n) matrix, got shape {increments.shape}")
    n = increments.shape[1]
    ps = np.cumsum(increments, axis=1)
    steps = np.arange(1, n + 1, dtype=float)
    v2 = spec.v**2
    if spec.variant is EventVariant.STOPPED_ANY_K:
        kmask = law.second_moment() * steps <= v2
        return np.any((ps >= spec.x) & kmask, axis=1)
    if spec.variant is EventVariant.MAX_WITH_FINAL_QC:
        if law.second_moment() * n > v2:
            return np.zeros(increments.shape[0], dtype=bool)
        return np.any(ps >= spec.x, axis=1)
    if spec.variant is EventVariant.FINAL_ONLY:
        if law.second_moment() * n > v2:
            return np.zeros(increments.shape[0], dtype=bool)
        return ps[:, -1] >= spec.x
    if spec.variant is EventVariant.TRUNCATED_ANY_K:
        kmask = law.truncated_second_moment(spec.y) * steps <= v2
        return np.any((ps >= spec.x) & kmask, axis=1)
    raise AssertionError(f"unhandled variant {spec.variant}")


def exceedance_tail(law: IncrementLaw, y: float, n: int) -> tuple[float, float]:
    """Exact per-step P(xi > y) and P(max over n IID steps > y)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    per_step = law.exceed_prob(y)
    p_max = -math.expm1(n * math.log1p(-per_step)) if per_step < 1.0 else 1.0
    return per_step, p_max
