"""Exact event probabilities for finite-support IID increments at small n.

Since the increments are IID, the quadratic characteristic is the
deterministic ramp k * m2, so the stopped event reduces to first passage of
the partial sums above x within k_max = floor(v^2 / m2) steps.  The DP
propagates the exact distribution of the partial sum, absorbing mass at first
passage; a brute-force path enumeration is kept as an independent route.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import bounds as bnd
from .processes import IncrementLaw

__all__ = [
    "StateSpaceError",
    "LatticeLaw",
    "ExactResult",
    "BoundComparison",
    "first_passage_dp",
    "exact_event_probability",
    "exact_vs_bound",
]

#: Refuse (rather than extrapolate) beyond this many simultaneous DP states.
STATE_CAP = 10**6
#: Enumeration walks |atoms|^n paths; refuse beyond this horizon.
ENUM_MAX_N = 25
#: Lattice denominators past this fall back to tolerance-merged float sums.
LATTICE_DENOM_CAP = 10**6
#: Merge tolerance for float-summed states.
MERGE_TOL = 1e-12


class StateSpaceError(RuntimeError):
    """The DP state space exceeded the cap; the result would not be exact."""


@dataclass(frozen=True)
class LatticeLaw:
    """Finite-support law given by (value, probability) atoms."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("a law needs at least one atom")
        values = [v for v, _ in self.atoms]
        if len(set(values)) != len(values):
            raise ValueError(f"atom values must be distinct, got {values}")
        if any(p <= 0 for _, p in self.atoms):
            raise ValueError("atom probabilities must be positive")
        total = math.fsum(p for _, p in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities must sum to 1, got {total}")

    @classmethod
    def from_increment_law(cls, law: IncrementLaw) -> "LatticeLaw":
        atoms = law.atoms()
        if atoms is None:
            raise ValueError(f"{law!r} has continuous support; no exact oracle")
        return cls(tuple(atoms))

    @property
    def m2(self) -> float:
        return math.fsum(v * v * p for v, p in self.atoms)

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.atoms)

    @property
    def support_max(self) -> float:
        return max(v for v, _ in self.atoms)


@dataclass(frozen=True)
class ExactResult:
    """Exact probabilities of the three nested deviation events."""

    p_stopped: float
    p_max: float
    p_final: float
    n: int
    x: float
    v: float


@dataclass(frozen=True)
class BoundComparison:
    """Exact stopped-event probability against every applicable closed-form
    bound, with per-bound validity flags (reproduction data is the record)."""

    result: ExactResult
    bound_values: dict[str, float]
    bound_ok: dict[str, bool]

    @property
    def valid(self) -> bool:
        return all(self.bound_ok.values())


def _clamp01(p: float) -> float:
    return min(1.0, max(0.0, p))


def _k_max(n: int, v: float, m2: float) -> int:
    # inclusive budget k*m2 <= v^2, with an absolute epsilon so that budgets
    # constructed as sqrt(k*m2)**2 land on the intended side
    return min(n, math.floor(v * v / m2 + 1e-9))


def _lattice_step(values: list[float]) -> Fraction | None:
    """Common lattice step of the atom values (exact from their binary
    representation), or None when the denominator is impractically large."""
    fracs = [Fraction(v) for v in values]
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // math.gcd(denom, f.denominator)
        if denom > LATTICE_DENOM_CAP:
            return None
    num_gcd = 0
    for f in fracs:
        num_gcd = math.gcd(num_gcd, abs(f.numerator * (denom // f.denominator)))
    return Fraction(max(num_gcd, 1), denom)


def first_passage_dp(
    law: LatticeLaw, n: int, x: float
) -> tuple[list[float], list[tuple[float, float]], float]:
    """Propagate the exact distribution of the partial sums with absorption at
    the first k where X_k >= x.

    Returns (cumulative absorbed probability by step k for k = 0..n, the
    surviving final distribution as (sum, prob) pairs, and the mass defect
    |1 - absorbed - surviving|).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    values = [v for v, _ in law.atoms]
    step = _lattice_step(values)

    if step is not None:
        atom_keys = [int(Fraction(v) / step) for v in values]
        threshold = math.ceil(Fraction(x) / step)
        to_value = lambda key: float(key * step)
    else:
        atom_keys = values
        threshold = None  # compared against MERGE_TOL-rounded float sums
        to_value = lambda key: key

    def absorbed(key) -> bool:
        if threshold is not None:
            return key >= threshold
        return key >= x - MERGE_TOL * max(1.0, abs(x))

    def merge(key):
        if threshold is not None:
            return key
        return round(key / MERGE_TOL) * MERGE_TOL

    probs = [p for _, p in law.atoms]
    dist = {merge(0 if threshold is not None else 0.0): 1.0}
    absorbed_cum = [0.0]
    for _ in range(n):
        new_dist: dict = {}
        hit = 0.0
        for key, mass in dist.items():
            for ak, ap in zip(atom_keys, probs):
                nk = merge(key + ak)
                m = mass * ap
                if absorbed(nk):
                    hit += m
                else:
                    new_dist[nk] = new_dist.get(nk, 0.0) + m
        if len(new_dist) > STATE_CAP:
            raise StateSpaceError(
                f"{len(new_dist)} reachable states exceed the cap {STATE_CAP}"
            )
        absorbed_cum.append(absorbed_cum[-1] + hit)
        dist = new_dist
    surviving = math.fsum(dist.values())
    defect = abs(1.0 - absorbed_cum[-1] - surviving)
    final = [(to_value(k), p) for k, p in dist.items()]
    return absorbed_cum, final, defect


def _free_final_tail(law: LatticeLaw, n: int, x: float) -> float:
    """P(X_n >= x) with no absorption, by the same state propagation."""
    values = [v for v, _ in law.atoms]
    step = _lattice_step(values)
    if step is not None:
        atom_keys = [int(Fraction(v) / step) for v in values]
        threshold = math.ceil(Fraction(x) / step)
        at_or_above = lambda key: key >= threshold
        merge = lambda key: key
        start = 0
    else:
        atom_keys = values
        at_or_above = lambda key: key >= x - MERGE_TOL * max(1.0, abs(x))
        merge = lambda key: round(key / MERGE_TOL) * MERGE_TOL
        start = 0.0
    probs = [p for _, p in law.atoms]
    dist = {start: 1.0}
    for _ in range(n):
        new_dist: dict = {}
        for key, mass in dist.items():
            for ak, ap in zip(atom_keys, probs):
                nk = merge(key + ak)
                new_dist[nk] = new_dist.get(nk, 0.0) + mass * ap
        if len(new_dist) > STATE_CAP:
            raise StateSpaceError(
                f"{len(new_dist)} reachable states exceed the cap {STATE_CAP}"
            )
        dist = new_dist
    return math.fsum(p for k, p in dist.items() if at_or_above(k))


def _enumerate(law: LatticeLaw, n: int, x: float, v: float) -> ExactResult:
    """Brute force over |atoms|^n paths; the independent route for the DP."""
    if n > ENUM_MAX_N:
        raise ValueError(f"enumeration is capped at n <= {ENUM_MAX_N}, got {n}")
    k_max = _k_max(n, v, law.m2)
    qc_ok_final = k_max >= n
    p_stopped = p_max = p_final = 0.0
    for path in itertools.product(law.atoms, repeat=n):
        prob = 1.0
        s = 0.0
        passage = None
        for k, (val, p) in enumerate(path, start=1):
            prob *= p
            s += val
            if passage is None and s >= x:
                passage = k
        if passage is not None and passage <= k_max:
            p_stopped += prob
        if qc_ok_final and passage is not None:
            p_max += prob
        if qc_ok_final and s >= x:
            p_final += prob
    return ExactResult(_clamp01(p_stopped), _clamp01(p_max), _clamp01(p_final), n, x, v)


def exact_event_probability(
    law: LatticeLaw, n: int, x: float, v: float, method: str = "auto"
) -> ExactResult:
    """Exact probabilities of the stopped, running-max, and final-time events
    at threshold x with variance budget v^2.

    method "dp" (default for auto) propagates sums with absorption;
    "enumerate" walks every path (n <= ENUM_MAX_N).
    """
    if v <= 0:
        raise ValueError(f"v must be > 0, got {v}")
    if law.m2 <= 0:
        raise ValueError("law has zero second moment; every budget is trivial")
    if method == "enumerate":
        return _enumerate(law, n, x, v)
    if method not in ("auto", "dp"):
        raise ValueError(f"unknown method {method!r}")

    k_max = _k_max(n, v, law.m2)
    absorbed_cum, _, _ = first_passage_dp(law, n, x)
    p_stopped = absorbed_cum[k_max] if k_max >= 1 else 0.0
    if k_max >= n:
        p_max = absorbed_cum[n]
        p_final = _free_final_tail(law, n, x)
    else:
        p_max = p_final = 0.0
    return ExactResult(_clamp01(p_stopped), _clamp01(p_max), _clamp01(p_final), n, x, v)


#: Absolute slack when comparing an exact probability against a bound; covers
#: the DP accumulation round-off (<= n * |atoms| * 1e-15).
COMPARISON_SLACK = 1e-12


def exact_vs_bound(law: LatticeLaw, n: int, x: float, v: float) -> BoundComparison:
    """Exact stopped-event probability against the closed-form bound family.

    Only laws satisfying the hypotheses (support <= 1, mean <= 0 up to
    round-off) are accepted; outside them the bounds claim nothing.
    """
    if law.support_max > 1.0:
        raise ValueError(f"support max {law.support_max} > 1 violates the hypotheses")
    if law.mean > 1e-12:
        raise ValueError(f"mean {law.mean} > 0 violates the hypotheses")
    result = exact_event_probability(law, n, x, v)
    q = bnd.TailQuery(x, v, n)
    values = {
        "hoeffding": bnd.hoeffding(q).value,
        "freedman": bnd.freedman(x, v).value,
        "bennett": bnd.bennett(x, v).value,
        "bernstein": bnd.bernstein(x, v).value,
        "prohorov": bnd.prohorov(x, v).value,
    }
    ok = {name: result.p_stopped <= val + COMPARISON_SLACK for name, val in values.items()}
    return BoundComparison(result, values, ok)
