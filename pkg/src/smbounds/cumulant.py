"""Moment-generating-function and cumulant machinery behind the closed-form
bounds: the two-point MGF estimate, its log form, the cumulant-process bounds,
the closed-form tilt minimizers, and a golden-section minimizer used to
cross-check every closed form.

All quantities are functions of the exponential tilting parameter lam >= 0 and
a variance level t >= 0, kept in log space until the caller exponentiates.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .bounds import TailQuery
from .processes import CenteredExponential

__all__ = [
    "cgf_bound",
    "mgf_bound",
    "cumulant_bound",
    "cumulant_bound_linear",
    "cgf_quadratic_bound",
    "optimal_tilt",
    "optimal_tilt_linear",
    "minimize_tilt",
    "check_tilted_second_moment",
]

#: Golden-section convergence width in lam.
TILT_TOL = 1e-10
#: Maximum geometric bracket expansions before reporting a runaway objective.
MAX_EXPANSIONS = 200


def _check_lambda_t(lam: float, t: float) -> None:
    if not (math.isfinite(lam) and lam >= 0):
        raise ValueError(f"lam must be finite and >= 0, got {lam}")
    if not (math.isfinite(t) and t >= 0):
        raise ValueError(f"t must be finite and >= 0, got {t}")


def cgf_bound(lam: float, t: float) -> float:
    """log( e^{-lam*t}/(1+t) + t e^{lam}/(1+t) ), the sharp upper bound on the
    cumulant of an increment with xi <= 1, E[xi] <= 0 and E[xi^2] = t.

    The max exponent is factored out before the log, so the value stays finite
    for lam well past 700.
    """
    _check_lambda_t(lam, t)
    if t == 0.0 or lam == 0.0:
        return 0.0
    a, b = -lam * t, lam
    m = max(a, b)
    return m + math.log((math.exp(a - m) + t * math.exp(b - m)) / (1.0 + t))


def mgf_bound(lam: float, sigma2: float) -> float:
    """e^{-lam*sigma2}/(1+sigma2) + sigma2 e^{lam}/(1+sigma2): the two-point MGF
    estimate, attained with equality by the extremal law on {1, -sigma2}."""
    _check_lambda_t(lam, sigma2)
    w = 1.0 / (1.0 + sigma2)
    return w * math.exp(-lam * sigma2) + (1.0 - w) * math.exp(lam)


def cumulant_bound(lam: float, k: int, qc: float) -> float:
    """k * cgf_bound(lam, qc/k): bound on the cumulant process at step k given
    the quadratic characteristic qc, via concavity of the cumulant bound in t."""
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not (math.isfinite(qc) and qc >= 0):
        raise ValueError(f"qc must be >= 0, got {qc}")
    return k * cgf_bound(lam, qc / k)


def cumulant_bound_linear(lam: float, qc: float) -> float:
    """(e^lam - 1 - lam) * qc, the linear-in-variance cumulant bound."""
    if not (math.isfinite(lam) and lam >= 0):
        raise ValueError(f"lam must be >= 0, got {lam}")
    if not (math.isfinite(qc) and qc >= 0):
        raise ValueError(f"qc must be >= 0, got {qc}")
    # expm1 keeps the lam^2/2 leading term when lam is tiny
    return (math.expm1(lam) - lam) * qc


def cgf_quadratic_bound(lam: float, b: float) -> float:
    """lam^2 (1+b)^2 / 8, a quadratic upper bound on cgf_bound(lam, b)."""
    if not (math.isfinite(lam) and lam >= 0):
        raise ValueError(f"lam must be >= 0, got {lam}")
    if not (math.isfinite(b) and b > 0):
        raise ValueError(f"b must be > 0, got {b}")
    return lam * lam * (1.0 + b) ** 2 / 8.0


def optimal_tilt(q: TailQuery) -> float:
    """Closed-form minimizer of lam -> -lam*x + n*cgf_bound(lam, v^2/n):
    (1/(1 + v^2/n)) * log((1 + x/v^2) / (1 - x/n)); requires x < n."""
    x, v, n = q.x, q.v, q.n
    if x >= n:
        raise ValueError(f"the minimizer diverges at x >= n, got x={x}, n={n}")
    v2 = v * v
    return (math.log1p(x / v2) - math.log1p(-x / n)) / (1.0 + v2 / n)


def optimal_tilt_linear(x: float, v: float) -> float:
    """Closed-form minimizer of lam -> -lam*x + (e^lam - 1 - lam) v^2:
    log(1 + x/v^2)."""
    if not (math.isfinite(x) and x >= 0):
        raise ValueError(f"x must be >= 0, got {x}")
    if not (math.isfinite(v) and v > 0):
        raise ValueError(f"v must be > 0, got {v}")
    return math.log1p(x / (v * v))


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_tilt(
    objective: Callable[[float], float], lambda_hi_seed: float
) -> tuple[float, float]:
    """Minimize a unimodal objective over lam >= 0.

    Brackets the minimum by geometric expansion of the upper end starting from
    lambda_hi_seed, then golden-section searches to an interval width of
    TILT_TOL in lam.  Returns (argmin, min value).

    Raises RuntimeError if the bracket does not close within MAX_EXPANSIONS
    (the objective keeps decreasing, which signals a caller bug) and if the
    result is not below the objective at both bracket ends (the unimodality
    assumption failed).
    """
    if not (math.isfinite(lambda_hi_seed) and lambda_hi_seed > 0):
        raise ValueError(f"lambda_hi_seed must be > 0, got {lambda_hi_seed}")

    lo, f_lo = 0.0, objective(0.0)
    hi, f_hi = lambda_hi_seed, objective(lambda_hi_seed)
    prev, f_prev = lo, f_lo
    for _ in range(MAX_EXPANSIONS):
        if f_hi >= f_prev:
            break  # the objective turned upward: the minimum is inside [lo, hi]
        prev, f_prev = hi, f_hi
        hi *= 2.0
        f_hi = objective(hi)
    else:
        raise RuntimeError(
            f"no bracket after {MAX_EXPANSIONS} expansions (objective still "
            f"decreasing at lam={hi:g}); is the objective bounded below?"
        )

    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    f_c, f_d = objective(c), objective(d)
    while b - a > TILT_TOL:
        if f_c < f_d:
            b, d, f_d = d, c, f_c
            c = b - _INVPHI * (b - a)
            f_c = objective(c)
        else:
            a, c, f_c = c, d, f_d
            d = a + _INVPHI * (b - a)
            f_d = objective(d)
    lam = 0.5 * (a + b)
    val = objective(lam)

    # Unimodality is asserted, not assumed: the result must not sit above
    # either bracket end (allowing round-off slack).
    if val > f_lo + 1e-12 or val > f_hi + 1e-12:
        raise RuntimeError(
            f"golden-section result {val:g} at lam={lam:g} exceeds a bracket "
            f"end value (ends {f_lo:g}, {f_hi:g}); objective is not unimodal"
        )
    return lam, val


#: Node count for the quadrature fallback of check_tilted_second_moment.
QUADRATURE_NODES = 10**6


def _tilted_second_moment_cexp(lam: float) -> float:
    """E[xi^2 e^{lam*xi}] for xi = Z - 1, Z ~ Exp(1), by composite Simpson
    quadrature over z; infinite for lam >= 1."""
    if lam >= 1.0:
        return math.inf
    z_max = 80.0 / (1.0 - lam)
    z = np.linspace(0.0, z_max, QUADRATURE_NODES + 1)
    g = (z - 1.0) ** 2 * np.exp(-(1.0 - lam) * z - lam)
    h = z_max / QUADRATURE_NODES
    weights = np.ones_like(z)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(weights, g))


def check_tilted_second_moment(law, lambdas: Sequence[float]) -> bool:
    """True iff E[xi^2 e^{lam*xi}] <= e^{lam} E[xi^2] (with 1e-12 relative
    slack) for every lam in the grid.

    Accepts any law exposing atoms (a method or a tuple of (value, prob)
    pairs), plus the centered exponential; the expectation is exact for finite
    support and computed by QUADRATURE_NODES-point quadrature otherwise.
    """
    lams = list(lambdas)
    if not lams:
        raise ValueError("lambda grid must be non-empty")
    atoms_attr = getattr(law, "atoms", None)
    atoms = atoms_attr() if callable(atoms_attr) else atoms_attr
    if atoms is not None:
        m2 = math.fsum(p * v * v for v, p in atoms)
    elif isinstance(law, CenteredExponential):
        m2 = law.second_moment()
    else:
        raise ValueError(f"no moment rule for law {law!r}")
    for lam in lams:
        if not (math.isfinite(lam) and lam >= 0):
            raise ValueError(f"lam must be finite and >= 0, got {lam}")
        if atoms is not None:
            lhs = math.fsum(p * v * v * math.exp(lam * v) for v, p in atoms)
        else:
            lhs = _tilted_second_moment_cexp(lam)
        if lhs > math.exp(lam) * m2 * (1.0 + 1e-12):
            return False
    return True
