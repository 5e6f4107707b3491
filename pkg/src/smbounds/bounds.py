"""Closed-form tail bounds for sums with increments bounded from above.

Every function here evaluates a named bound on deviation probabilities of the
form P(X_k >= x with a variance budget <= v^2).  Results are carried in log
space (`LogProb`) and clamped so the linear value never exceeds 1; several of
the raw formulas (Haeusler's in particular) exceed 1 in easy regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "TailQuery",
    "LogProb",
    "AzumaRefined",
    "FukNagaev",
    "hoeffding",
    "freedman",
    "bennett",
    "bernstein",
    "prohorov",
    "azuma_denominator",
    "azuma_refined",
    "hoeffding_bounded",
    "fuk_nagaev",
    "courbot",
    "haeusler",
    "bennett_classic",
    "hoeffding_independent",
    "bennett_inverse",
    "default_grid",
]


def _require_finite(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class TailQuery:
    """Deviation query: threshold x >= 0, variance-budget root v > 0, horizon n >= 1."""

    x: float
    v: float
    n: int

    def __post_init__(self) -> None:
        _require_finite(x=self.x, v=self.v)
        if self.x < 0:
            raise ValueError(f"x must be >= 0, got {self.x}")
        if self.v <= 0:
            raise ValueError(f"v must be > 0, got {self.v}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")


@dataclass(frozen=True)
class LogProb:
    """A probability stored as its natural log, clamped to log_value <= 0."""

    log_value: float

    def __post_init__(self) -> None:
        if math.isnan(self.log_value):
            raise ValueError("log probability is NaN")
        if self.log_value > 0:
            raise ValueError(f"log probability must be <= 0, got {self.log_value}")

    @classmethod
    def from_log(cls, raw: float) -> "LogProb":
        """Clamp a raw log value at 0 (probability 1)."""
        if math.isnan(raw):
            raise ValueError("log probability is NaN")
        return cls(min(raw, 0.0))

    @property
    def value(self) -> float:
        """Linear view, always in [0, 1]."""
        return math.exp(self.log_value)


@dataclass(frozen=True)
class AzumaRefined:
    """Refined Azuma-Hoeffding bound together with its active denominator branch."""

    bound: LogProb
    u: float
    branch: str  # "range", "variance", or "tie"


@dataclass(frozen=True)
class FukNagaev:
    """Two-term Fuk-Nagaev-style bound: a rescaled closed-form term plus an
    exceedance probability, and their clamped sum."""

    h_term: LogProb
    p_exceed: float
    total: LogProb


def _log_add(log_a: float, *linear_terms: float) -> float:
    """log(exp(log_a) + sum of nonnegative linear terms), stable for tiny log_a."""
    out = log_a
    for t in linear_terms:
        if t < 0:
            raise ValueError(f"tail term must be >= 0, got {t}")
        if t == 0.0:
            continue
        lt = math.log(t)
        hi, lo = (out, lt) if out >= lt else (lt, out)
        out = hi if lo == -math.inf else hi + math.log1p(math.exp(lo - hi))
    return out


def hoeffding(q: TailQuery) -> LogProb:
    """Hoeffding-type bound for supermartingale differences bounded above by 1.

    log value = (n/(n+v^2)) * [(x+v^2) log(v^2/(x+v^2)) + (n-x) log(n/(n-x))]
    for 0 <= x < n.  At x = n the second factor is 1 by convention (the base
    diverges while the exponent vanishes), and for x > n the bound is 0.
    """
    x, v, n = q.x, q.v, q.n
    if x > n:
        return LogProb(-math.inf)
    v2 = v * v
    if x == n:
        # Distinct branch, not a limit: the general formula would produce 0*inf.
        return LogProb.from_log(n * math.log(v2 / (n + v2)))
    term1 = -(x + v2) * math.log1p(x / v2)
    r = x / n
    if r < 1.0:
        term2 = -(n - x) * math.log1p(-r)
    else:
        # x < n but x/n rounded up to 1; fall back to the explicit ratio
        term2 = -(n - x) * math.log((n - x) / n)
    return LogProb.from_log(n / (n + v2) * (term1 + term2))


def freedman(x: float, v: float) -> LogProb:
    """Freedman's bound F(x,v) = (v^2/(x+v^2))^(x+v^2) * e^x."""
    _require_finite(x=x, v=v)
    if x < 0 or v <= 0:
        raise ValueError(f"need x >= 0 and v > 0, got x={x}, v={v}")
    v2 = v * v
    return LogProb.from_log(-(x + v2) * math.log1p(x / v2) + x)


def bennett(x: float, v: float) -> LogProb:
    """Bennett's bound exp{-x^2 / (v^2 (1 + sqrt(1 + 2x/(3v^2))) + x/3)}."""
    _require_finite(x=x, v=v)
    if x < 0 or v <= 0:
        raise ValueError(f"need x >= 0 and v > 0, got x={x}, v={v}")
    if x == 0:
        return LogProb(0.0)
    v2 = v * v
    denom = v2 * (1.0 + math.sqrt(1.0 + 2.0 * x / (3.0 * v2))) + x / 3.0
    return LogProb.from_log(-x * x / denom)


def bernstein(x: float, v: float) -> LogProb:
    """Bernstein's bound exp{-x^2 / (2 (v^2 + x/3))}."""
    _require_finite(x=x, v=v)
    if x < 0 or v <= 0:
        raise ValueError(f"need x >= 0 and v > 0, got x={x}, v={v}")
    return LogProb.from_log(-x * x / (2.0 * (v * v + x / 3.0)))


def prohorov(x: float, v: float) -> LogProb:
    """Prohorov's bound exp{-(x/2) arcsinh(x / (2v^2))}."""
    _require_finite(x=x, v=v)
    if x < 0 or v <= 0:
        raise ValueError(f"need x >= 0 and v > 0, got x={x}, v={v}")
    return LogProb.from_log(-0.5 * x * math.asinh(x / (2.0 * v * v)))


def azuma_denominator(x: float, n: int, b: float) -> tuple[float, str]:
    """U_n(x,b) = min{n(1+b)^2, 4(nb + x/3)} and which branch of the min is active."""
    _require_finite(x=x, b=b)
    if x < 0 or b <= 0 or n < 1:
        raise ValueError(f"need x >= 0, b > 0, n >= 1, got x={x}, b={b}, n={n}")
    u_range = n * (1.0 + b) ** 2
    u_variance = 4.0 * (n * b + x / 3.0)
    if u_range == u_variance:
        return u_range, "tie"
    if u_range < u_variance:
        return u_range, "range"
    return u_variance, "variance"


def azuma_refined(x: float, n: int, b: float) -> AzumaRefined:
    """Refined Azuma-Hoeffding bound exp{-2x^2 / U_n(x,b)} for martingale
    differences in [-b, 1]; sharper than the plain Azuma-Hoeffding bound
    whenever the variance branch of U_n is active."""
    u, branch = azuma_denominator(x, n, b)
    return AzumaRefined(LogProb.from_log(-2.0 * x * x / u), u, branch)


def hoeffding_bounded(x: float, n: int, b: float, supermartingale: bool = False) -> LogProb:
    """Maximal-deviation bound for differences in [-b, 1]: the Hoeffding-type
    bound at the worst-case variance budget v = sqrt(n*b).

    The martingale form holds for any b > 0; the supermartingale form only for
    0 < b <= 1, so that regime must be flagged by the caller.
    """
    _require_finite(x=x, b=b)
    if b <= 0:
        raise ValueError(f"b must be > 0, got {b}")
    if supermartingale and b > 1:
        raise ValueError(f"supermartingale regime requires 0 < b <= 1, got b={b}")
    return hoeffding(TailQuery(x, math.sqrt(n * b), n))


def fuk_nagaev(x: float, y: float, v: float, n: int, p_exceed: float) -> FukNagaev:
    """Truncation bound: the rescaled closed-form term at (x/y, v/y) plus the
    caller-supplied probability that some increment exceeds the level y."""
    _require_finite(x=x, y=y, v=v)
    if y <= 0:
        raise ValueError(f"y must be > 0, got {y}")
    if not 0.0 <= p_exceed <= 1.0:
        raise ValueError(f"p_exceed must be in [0, 1], got {p_exceed}")
    h_term = hoeffding(TailQuery(x / y, v / y, n))
    total = LogProb.from_log(_log_add(h_term.log_value, p_exceed))
    return FukNagaev(h_term, p_exceed, total)


def courbot(x: float, y: float, v: float, sum_exceed: float, p_qc_exceed: float) -> LogProb:
    """Courbot's three-term bound: F(x/y, v/y) plus the summed per-step
    exceedance probabilities plus the variance-budget overflow probability."""
    _require_finite(x=x, y=y, v=v)
    if y <= 0 or v <= 0 or x < 0:
        raise ValueError(f"need x >= 0, y > 0, v > 0, got x={x}, y={y}, v={v}")
    if sum_exceed < 0 or p_qc_exceed < 0:
        raise ValueError("tail terms must be >= 0")
    f_term = freedman(x / y, v / y)
    return LogProb.from_log(_log_add(f_term.log_value, sum_exceed, p_qc_exceed))


def haeusler(x: float, y: float, v: float) -> LogProb:
    """Haeusler's replacement for the rescaled F term:
    exp{(x/y)(1 - log(xy/v^2))}, clamped at probability 1."""
    _require_finite(x=x, y=y, v=v)
    if x <= 0 or y <= 0 or v <= 0:
        raise ValueError(f"need x, y, v > 0, got x={x}, y={y}, v={v}")
    return LogProb.from_log((x / y) * (1.0 - math.log(x * y / (v * v))))


def bennett_classic(t: float, sigma2: float, n: int) -> LogProb:
    """Bennett's original bound for independent centered summands bounded above
    by 1: exp{n [(t+sigma^2) log(sigma^2/(t+sigma^2)) + t]}."""
    _require_finite(t=t, sigma2=sigma2)
    if t < 0 or sigma2 <= 0 or n < 1:
        raise ValueError(f"need t >= 0, sigma2 > 0, n >= 1, got t={t}, sigma2={sigma2}, n={n}")
    return LogProb.from_log(n * (-(t + sigma2) * math.log1p(t / sigma2) + t))


def hoeffding_independent(t: float, sigma2: float, n: int) -> LogProb:
    """Hoeffding's independent-case bound
    {(1 + t/sigma^2)^(-(t+sigma^2)/(1+sigma^2)) (1-t)^(-(1-t)/(1+sigma^2))}^n
    for 0 <= t < 1."""
    _require_finite(t=t, sigma2=sigma2)
    if not 0 <= t < 1:
        raise ValueError(f"t must be in [0, 1), got {t}")
    if sigma2 <= 0 or n < 1:
        raise ValueError(f"need sigma2 > 0 and n >= 1, got sigma2={sigma2}, n={n}")
    scale = 1.0 + sigma2
    log_per_step = -(t + sigma2) / scale * math.log1p(t / sigma2) - (1.0 - t) / scale * math.log1p(-t)
    return LogProb.from_log(n * log_per_step)


def bennett_inverse(level: float, v: float) -> tuple[float, LogProb]:
    """Inverse form of Bennett's bound: the threshold level/3 + v*sqrt(2*level)
    at which the deviation probability drops below e^{-level}."""
    _require_finite(level=level, v=v)
    if level <= 0 or v <= 0:
        raise ValueError(f"need level > 0 and v > 0, got level={level}, v={v}")
    threshold = level / 3.0 + v * math.sqrt(2.0 * level)
    return threshold, LogProb.from_log(-level)


#: Default sweep values: boundary, moderate-deviation, and limit regimes.
GRID_X = (0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0)
GRID_V = (0.1, 0.5, 1.0, 2.0, 5.0)
GRID_N = (1, 2, 5, 10, 100, 10**4, 10**6)


def default_grid() -> list[TailQuery]:
    """Default comparison grid over (x, v, n), including the x = 0.3n / 0.7n / n
    points that exercise the horizon-dependent branches."""
    queries = []
    for n in GRID_N:
        xs = sorted(set(GRID_X) | {0.3 * n, 0.7 * n, float(n)})
        for v in GRID_V:
            for x in xs:
                queries.append(TailQuery(x, v, n))
    return queries
