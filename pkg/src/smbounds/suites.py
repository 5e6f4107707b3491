"""Verification suites: derivative and ordering properties of the closed
forms, variational cross-checks, the exact-oracle corpus, and the Monte Carlo
corpus.  The CLI `verify` command and the acceptance tests run these same
functions, so a pass here is the artifact's health check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from . import bounds as bnd
from . import cumulant as cml
from . import montecarlo as mc
from . import oracle as orc
from .processes import (
    CenteredExponential,
    DriftedTwoPoint,
    EventSpec,
    EventVariant,
    IncrementLaw,
    TwoPointBounded,
    TwoPointExtremal,
    exact_mgf,
    exceedance_tail,
)

__all__ = [
    "Check",
    "SuiteReport",
    "SUITES",
    "run_suites",
    "applicable_checks",
    "chain_grid",
    "oracle_corpus",
    "mc_corpus",
]


@dataclass(frozen=True)
class Check:
    label: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    name: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, label: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(label, bool(passed), detail))


LAMBDA_GRID = (0.1, 0.5, 1.0, 2.0, 5.0)
FD_STEP = 1e-4
FD_TOL = 1e-6
ORDER_SLACK = 1e-10


# ---------------------------------------------------------------------------
# cumulant suite: finite-difference shape of the cumulant bound, the
# quadratic/linear envelopes, and MGF sharpness against the extremal law
# ---------------------------------------------------------------------------


def suite_cumulant() -> SuiteReport:
    rep = SuiteReport("cumulant")
    h = FD_STEP
    ts = np.concatenate(([h], np.linspace(0.01, 10.0, 100)))

    worst_second = -math.inf
    min_forward = math.inf
    ratio_ok = True
    linear_ok = True
    for lam in LAMBDA_GRID:
        prev_ratio = math.inf
        for t in ts:
            f0 = cml.cgf_bound(lam, float(t))
            second = cml.cgf_bound(lam, float(t + h)) - 2.0 * f0 + cml.cgf_bound(lam, float(t - h))
            worst_second = max(worst_second, second)
            forward = cml.cgf_bound(lam, float(t + h)) - f0
            min_forward = min(min_forward, forward)
            ratio = f0 / float(t)
            ratio_ok = ratio_ok and ratio <= prev_ratio + 1e-12
            prev_ratio = ratio
            linear_ok = linear_ok and f0 <= cml.cumulant_bound_linear(lam, float(t)) + 1e-12
    rep.add("concavity in t (centered second difference)", worst_second <= FD_TOL,
            f"max second difference {worst_second:.3e}")
    rep.add("strict increase in t (forward difference)", min_forward > 0.0,
            f"min forward difference {min_forward:.3e}")
    rep.add("t -> bound/t nonincreasing", ratio_ok)
    rep.add("linear envelope (e^lam - 1 - lam) t", linear_ok)

    quad_ok = True
    for lam in np.linspace(0.0, 10.0, 21):
        for b in np.linspace(0.05, 5.0, 25):
            if cml.cgf_bound(float(lam), float(b)) > cml.cgf_quadratic_bound(float(lam), float(b)) + 1e-12:
                quad_ok = False
    rep.add("quadratic envelope lam^2 (1+b)^2 / 8", quad_ok)

    worst_rel = 0.0
    for lam in np.linspace(0.0, 20.0, 41):
        for s2 in np.geomspace(0.01, 10.0, 25):
            exact = exact_mgf(TwoPointExtremal(float(s2)), float(lam))
            est = cml.mgf_bound(float(lam), float(s2))
            worst_rel = max(worst_rel, abs(exact - est) / est)
    rep.add("MGF sharpness on the extremal law", worst_rel <= 1e-12,
            f"max relative gap {worst_rel:.3e}")

    dom_ok = True
    zoo = [TwoPointExtremal(0.5), TwoPointBounded(0.5), TwoPointBounded(1.0),
           DriftedTwoPoint(0.5, 0.2)]
    for law in zoo:
        m2 = law.second_moment()
        for lam in np.linspace(0.0, 10.0, 21):
            if exact_mgf(law, float(lam)) > cml.mgf_bound(float(lam), m2) * (1.0 + 1e-12):
                dom_ok = False
    rep.add("exact MGF below the two-point estimate (zoo laws)", dom_ok)

    rep.add("tilted-second-moment condition holds for bounded-above laws",
            cml.check_tilted_second_moment(TwoPointExtremal(0.5), (0.0, 0.5, 1.0, 2.0, 5.0)))
    return rep


# ---------------------------------------------------------------------------
# chain suite: orderings, monotonicity in n, and the large-n limit
# ---------------------------------------------------------------------------


def chain_grid(points_per_cell: int = 290) -> Iterator[bnd.TailQuery]:
    """At least 10^4 (x, v, n) points with x restricted to [0, n]."""
    for n in bnd.GRID_N:
        extra = sorted({x for x in bnd.GRID_X if x <= n} | {0.3 * n, 0.7 * n, float(n)})
        xs = np.unique(np.concatenate([np.linspace(0.0, n, points_per_cell), extra]))
        for v in bnd.GRID_V:
            for x in xs:
                yield bnd.TailQuery(float(x), v, n)


def suite_chain() -> SuiteReport:
    rep = SuiteReport("chain")
    violations = 0
    first = ""
    count = 0
    clamp_ok = True
    for q in chain_grid():
        count += 1
        lh = bnd.hoeffding(q).log_value
        lf = bnd.freedman(q.x, q.v).log_value
        lb1 = bnd.bennett(q.x, q.v).log_value
        lb2 = bnd.bernstein(q.x, q.v).log_value
        lpro = bnd.prohorov(q.x, q.v).log_value
        clamp_ok = clamp_ok and max(lh, lf, lb1, lb2, lpro) <= 0.0
        if not (lh <= lf + ORDER_SLACK and lf <= lb1 + ORDER_SLACK
                and lb1 <= lb2 + ORDER_SLACK and lh <= lpro + ORDER_SLACK):
            violations += 1
            if not first:
                first = f"x={q.x} v={q.v} n={q.n}"
    rep.add(f"ordering chain on {count} grid points", violations == 0,
            f"{violations} violations" + (f", first at {first}" if first else ""))
    rep.add("all bounds clamp to probability <= 1", clamp_ok)

    mono_ok = True
    for v in bnd.GRID_V:
        for x in (0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
            prev = -math.inf
            for n in bnd.GRID_N:
                cur = bnd.hoeffding(bnd.TailQuery(x, v, n)).log_value
                if cur < prev - ORDER_SLACK:
                    mono_ok = False
                prev = cur
    rep.add("bound nondecreasing in the horizon n", mono_ok)

    limit_ok = True
    worst = 0.0
    for x in np.geomspace(0.1, 10.0, 25):
        for v in np.geomspace(0.1, 10.0, 25):
            lh = bnd.hoeffding(bnd.TailQuery(float(x), float(v), 10**6)).log_value
            lf = bnd.freedman(float(x), float(v)).log_value
            rel = abs(lh - lf) / abs(lf)
            worst = max(worst, rel)
            if rel > 1e-3:
                limit_ok = False
    rep.add("large-n limit matches the horizon-free form", limit_ok,
            f"max relative log gap at n=1e6: {worst:.3e}")
    return rep


# ---------------------------------------------------------------------------
# variational suite: closed forms against golden-section minimization plus the
# exact reduction, branch, and inverse identities
# ---------------------------------------------------------------------------


def suite_variational() -> SuiteReport:
    rep = SuiteReport("variational")

    worst_h = 0.0
    worst_f = 0.0
    for n in (2, 5, 10, 100):
        for v in (0.5, 1.0, 2.0, 5.0, 10.0):
            for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
                x = frac * n
                q = bnd.TailQuery(x, v, n)
                t = v * v / n
                _, val = cml.minimize_tilt(lambda lam: -lam * x + n * cml.cgf_bound(lam, t), 1.0)
                worst_h = max(worst_h, abs(val - bnd.hoeffding(q).log_value))
                v2 = v * v
                _, val_f = cml.minimize_tilt(
                    lambda lam: -lam * x + cml.cumulant_bound_linear(lam, v2), 1.0)
                worst_f = max(worst_f, abs(val_f - bnd.freedman(x, v).log_value))
    rep.add("closed form equals tilt minimization (horizon-n bound)", worst_h <= 1e-8,
            f"max |gap| {worst_h:.3e} over 100 points")
    rep.add("closed form equals tilt minimization (horizon-free bound)", worst_f <= 1e-8,
            f"max |gap| {worst_f:.3e} over 100 points")

    worst_red = 0.0
    combos = 0
    for t in np.linspace(0.05, 0.95, 10):
        for s2 in (0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0):
            for n in (1, 2, 3, 5, 8, 13, 25, 50):
                combos += 1
                li = bnd.hoeffding_independent(float(t), s2, n).log_value
                lh = bnd.hoeffding(bnd.TailQuery(n * float(t), math.sqrt(n * s2), n)).log_value
                worst_red = max(worst_red, abs(li - lh))
    rep.add(f"independent-case reduction identity ({combos} combos)", worst_red <= 1e-12,
            f"max |log gap| {worst_red:.3e}")

    # exact rational check of the denominator-branch claim, then the float
    # branch picker on the same off-boundary points
    branch_ok = True
    float_ok = True
    three_quarters = Fraction(3, 4)
    factors = [Fraction(1, 2), Fraction(9, 10), Fraction(99, 100), Fraction(1),
               Fraction(101, 100), Fraction(11, 10), Fraction(2)]
    for bk in range(1, 61):
        b = Fraction(bk, 20)
        for n in range(1, 101):
            boundary = three_quarters * n * (1 - b) ** 2
            for c in factors + [Fraction(1, 10), Fraction(10)]:
                x = boundary * c if c in factors else c
                lhs = 4 * (n * b + x / 3) < n * (1 + b) ** 2
                rhs = x < boundary
                if lhs != rhs:
                    branch_ok = False
                if x > 0 and c != 1 and boundary > 0:
                    _, branch = bnd.azuma_denominator(float(x), n, float(b))
                    want = "variance" if rhs else "range"
                    if branch not in (want, "tie"):
                        float_ok = False
    rep.add("denominator branch point x = (3/4) n (1-b)^2, exact rationals", branch_ok)
    rep.add("float branch picker agrees off the boundary", float_ok)

    inv_ok = True
    for level in (0.5, 1.0, 2.0, 5.0, 10.0):
        for v in (0.25, 1.0, 4.0):
            threshold, target = bnd.bennett_inverse(level, v)
            if bnd.bennett(threshold, v).log_value > target.log_value + math.log1p(1e-12):
                inv_ok = False
    rep.add("inverse threshold level/3 + v sqrt(2 level) reaches e^-level", inv_ok)
    return rep


# ---------------------------------------------------------------------------
# oracle suite: exact first-passage probabilities against every bound
# ---------------------------------------------------------------------------


def _corpus_laws() -> list[IncrementLaw]:
    return (
        [TwoPointExtremal(s2) for s2 in (0.25, 0.5, 1.0, 2.0)]
        + [TwoPointBounded(b) for b in (0.25, 0.5, 1.0)]
        + [DriftedTwoPoint(0.5, 0.25), DriftedTwoPoint(1.0, 0.5)]
    )


def oracle_corpus() -> Iterator[tuple[IncrementLaw, int, float, float, float]]:
    """(law, n, x, v, budget_scale) instances satisfying the hypotheses;
    budget_scale > 1 means the variance clause never binds."""
    for law in _corpus_laws():
        m2 = law.second_moment()
        for n in (2, 5, 10, 25):
            for scale in (1.0000001, 0.5):
                v = math.sqrt(n * m2 * scale)
                for x in (1.0, 0.3 * n, 0.6 * n, float(n)):
                    yield law, n, x, v, scale


def suite_oracle() -> SuiteReport:
    rep = SuiteReport("oracle")

    instances = 0
    bound_violations = []
    nesting_ok = True
    mass_ok = True
    cor2_ok = True
    for law, n, x, v, scale in oracle_corpus():
        instances += 1
        lat = orc.LatticeLaw.from_increment_law(law)
        comp = orc.exact_vs_bound(lat, n, x, v)
        if not comp.valid:
            bound_violations.append(f"{law.label()} n={n} x={x:g} v={v:g}")
        res = comp.result
        if not (res.p_final <= res.p_max + 1e-15 and res.p_max <= res.p_stopped + 1e-15):
            nesting_ok = False
        _, _, defect = orc.first_passage_dp(lat, n, x)
        mass_ok = mass_ok and defect <= 1e-12

        if scale > 1.0 and law.support_max <= 1.0:
            mean = law.mean()
            b_eff = -min(val for val, _ in law.atoms())
            supermart = mean < -1e-15
            if not supermart or b_eff <= 1.0:
                az = bnd.azuma_refined(x, n, b_eff).bound.value
                ho = bnd.hoeffding_bounded(x, n, b_eff, supermartingale=supermart).value
                slack = orc.COMPARISON_SLACK
                if res.p_max > az + slack or res.p_max > ho + slack:
                    cor2_ok = False
    rep.add(f"exact stopped probability below every bound ({instances} instances)",
            not bound_violations,
            f"{len(bound_violations)} violations"
            + (f", first: {bound_violations[0]}" if bound_violations else ""))
    rep.add("event nesting p_final <= p_max <= p_stopped", nesting_ok)
    rep.add("probability mass conserved by the first-passage DP", mass_ok)
    rep.add("running-max probability below the bounded-range bounds", cor2_ok)

    rng = np.random.default_rng(20240917)
    pool = _corpus_laws()
    extra = orc.LatticeLaw(((1.0, 0.3), (-0.45, 0.7)))  # off-lattice values
    worst = 0.0
    for _ in range(200):
        pick = rng.integers(0, len(pool) + 1)
        lat = extra if pick == len(pool) else orc.LatticeLaw.from_increment_law(pool[pick])
        n = int(rng.integers(1, 11))
        x = float(rng.uniform(-1.0, 0.9 * n))
        v = math.sqrt(float(rng.uniform(0.3, 1.4)) * n * lat.m2)
        a = orc.exact_event_probability(lat, n, x, v, method="dp")
        b = orc.exact_event_probability(lat, n, x, v, method="enumerate")
        worst = max(worst, abs(a.p_stopped - b.p_stopped), abs(a.p_max - b.p_max),
                    abs(a.p_final - b.p_final))
    rep.add("DP agrees with path enumeration on 200 random instances",
            worst <= 1e-12, f"max |gap| {worst:.3e}")
    return rep


# ---------------------------------------------------------------------------
# Monte Carlo suite: the standard corpus at gamma = 0.999
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McInstance:
    law: IncrementLaw
    n: int
    x: float
    v: float
    seed: int
    y: Optional[float] = None


def mc_corpus() -> list[McInstance]:
    return [
        McInstance(TwoPointExtremal(1.0), 50, 8.0, math.sqrt(50 * 1.0000001), 20240101),
        McInstance(TwoPointExtremal(0.5), 20, 5.0, math.sqrt(10 * 1.0000001), 20240102),
        McInstance(TwoPointBounded(0.5), 20, 4.0, math.sqrt(10 * 1.0000001), 20240103),
        McInstance(DriftedTwoPoint(0.5, 0.1), 20, 4.0, math.sqrt(20 * 0.51 * 1.0000001), 20240104),
        McInstance(CenteredExponential(), 20, 6.0, math.sqrt(20.0), 20240105, y=3.0),
    ]


def applicable_checks(law: IncrementLaw, spec: EventSpec, n: int) -> list[tuple[str, bnd.LogProb]]:
    """The bounds whose hypotheses the (law, event) pair satisfies.

    For bounded-above laws every event variant sits inside the stopped event,
    so the full family applies; bounded-below laws add the range-based pair;
    truncated events use the two-term truncation bound with the law's exact
    exceedance probability.
    """
    if spec.x < 0:
        return []  # the bounds only claim anything for nonnegative thresholds
    if spec.variant is EventVariant.TRUNCATED_ANY_K:
        _, p_max = exceedance_tail(law, spec.y, n)
        fn = bnd.fuk_nagaev(spec.x, spec.y, spec.v, n, p_max)
        return [("fuk_nagaev", fn.total)]
    if law.support_max > 1.0:
        return []
    q = bnd.TailQuery(spec.x, spec.v, n)
    checks = [
        ("hoeffding", bnd.hoeffding(q)),
        ("freedman", bnd.freedman(spec.x, spec.v)),
        ("bennett", bnd.bennett(spec.x, spec.v)),
        ("bernstein", bnd.bernstein(spec.x, spec.v)),
        ("prohorov", bnd.prohorov(spec.x, spec.v)),
    ]
    atoms = law.atoms()
    if atoms is not None:
        mean = law.mean()
        b_eff = -min(v for v, _ in atoms)
        supermart = mean < -1e-15
        if b_eff > 0 and (not supermart or b_eff <= 1.0):
            checks.append(("azuma_refined", bnd.azuma_refined(spec.x, n, b_eff).bound))
            checks.append(("hoeffding_bounded",
                           bnd.hoeffding_bounded(spec.x, n, b_eff, supermartingale=supermart)))
    return checks


def suite_mc(trials: int = 10**6, gamma: float = 0.999) -> SuiteReport:
    rep = SuiteReport("mc")
    for inst in mc_corpus():
        label = f"{inst.law.label()} n={inst.n} x={inst.x:g}"
        if inst.y is not None:
            spec = EventSpec(inst.x, inst.v, EventVariant.TRUNCATED_ANY_K, y=inst.y)
            est = mc.estimate_event(inst.law, spec, inst.n, trials, inst.seed, gamma)
            for name, bound in applicable_checks(inst.law, spec, inst.n):
                check = mc.verify_bound(est, bound)
                rep.add(f"{label} truncated(y={inst.y:g}) vs {name}", check.verdict == "PASS",
                        f"p_hat={est.p_hat:.3e} ci_high={est.ci_high:.3e} bound={bound.value:.3e}")
            # the three-term bound covers the plain running maximum
            per_step, _ = exceedance_tail(inst.law, inst.y, inst.n)
            cb = bnd.courbot(inst.x, inst.y, inst.v, inst.n * per_step, 0.0)
            plain_max = EventSpec(inst.x, math.sqrt(2 * inst.n * inst.law.second_moment()),
                                  EventVariant.MAX_WITH_FINAL_QC)
            est_max = mc.estimate_event(inst.law, plain_max, inst.n, trials, inst.seed, gamma)
            check = mc.verify_bound(est_max, cb)
            rep.add(f"{label} running max vs courbot", check.verdict == "PASS",
                    f"p_hat={est_max.p_hat:.3e} bound={cb.value:.3e}")
            continue

        nested = mc.nested_event_estimates(inst.law, inst.x, inst.v, inst.n, trials,
                                           inst.seed, gamma)
        rep.add(f"{label} per-path event nesting", nested.nesting_ok)
        spec = nested.stopped.spec
        for name, bound in applicable_checks(inst.law, spec, inst.n):
            target = nested.max_qc if name in ("azuma_refined", "hoeffding_bounded") else nested.stopped
            check = mc.verify_bound(target, bound)
            rep.add(f"{label} vs {name}", check.verdict == "PASS",
                    f"p_hat={target.p_hat:.3e} ci_low={target.ci_low:.3e} bound={bound.value:.3e}")
        if inst.law.mean() >= -1e-15 and cml.check_tilted_second_moment(inst.law, LAMBDA_GRID):
            check = mc.verify_bound(nested.stopped, bnd.freedman(inst.x, inst.v))
            rep.add(f"{label} vs horizon-free bound under the tilt condition",
                    check.verdict == "PASS")
    return rep


SUITES = {
    "cumulant": suite_cumulant,
    "chain": suite_chain,
    "variational": suite_variational,
    "oracle": suite_oracle,
    "mc": suite_mc,
}


def run_suites(names: list[str], trials: int = 10**6) -> list[SuiteReport]:
    reports = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
        reports.append(suite_mc(trials) if name == "mc" else SUITES[name]())
    return reports
