"""Robust distortion premia over Wasserstein balls and continuity bounds.

The ball of radius ``ε`` and order ``r`` around ``F`` contains every ``G``
with ``(∫|G^{-1} - F^{-1}|^r)^{1/r} <= ε``.  Raising the quantile function by
a nondecreasing shift ``δ`` adds ``∫ δ h`` to the premium, so the robust
premium is ``π_h(F)`` plus ``ε`` times the dual norm of ``h``:

* ``r = 1``: ``ε ||h||_∞``, attained by moving the top ``η`` quantiles up by
  ``ε/η`` when ``h`` is flat at its supremum on ``[1 - η, 1]``;
* ``r = p > 1``: ``ε ||h||_q``, attained by the shift ``ε (h/||h||_q)^{q/p}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dist_core import (
    DiscreteDistribution,
    PayoffTransform,
    ShiftedDistribution,
    StepDistribution,
    apply_transform,
    conjugate,
    wasserstein,
)
from .distortion import DisutilitySpec, DistortionSpec, Power, _quad, premium
from .errors import DisutilityOverflowError, DomainError, NoFiniteBoundError, UnboundedPremiumError

__all__ = [
    "AmbiguitySpec",
    "RobustResult",
    "ATTAINED",
    "NOT_ATTAINED",
    "UNBOUNDED",
    "robust_premium",
    "robust_premium_r1",
    "robust_premium_rp",
    "approximating_family",
    "diagnose_boundedness",
    "continuity_bound",
    "partial_coverage_bound",
    "robust_ceq_lower_bound",
]

ATTAINED = "attained"
NOT_ATTAINED = "approachable_not_attained"
UNBOUNDED = "unbounded"

# the CLI writes the short form "sup" for a supremum that is not attained
_STATUS_TO_JSON = {ATTAINED: "attained", NOT_ATTAINED: "sup", UNBOUNDED: "unbounded"}
_STATUS_FROM_JSON = {v: k for k, v in _STATUS_TO_JSON.items()}

SHIFT_GRID = 100


@dataclass(frozen=True)
class AmbiguitySpec:
    """Wasserstein ball parameters.

    ``metric="d1"`` uses the ground metric ``|x - y|``; ``metric="dp"`` uses
    ``|x^p - y^p|`` with ``p`` given.
    """

    epsilon: float
    r: float = 1.0
    metric: str = "d1"
    p: float | None = None

    def __post_init__(self):
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise DomainError(f"ball radius must be finite and >= 0, got {self.epsilon}")
        if not self.r >= 1:
            raise DomainError(f"ball order must be >= 1, got {self.r}")
        if self.metric not in ("d1", "dp"):
            raise DomainError(f"metric must be 'd1' or 'dp', got {self.metric!r}")
        if self.metric == "dp" and not (self.p is not None and self.p >= 1):
            raise DomainError("the dp metric needs p >= 1")


@dataclass(frozen=True)
class RobustResult:
    """Robust premium with its worst case.

    ``worst_case`` is a distribution in the ball that attains ``value`` (or
    ``None``).  ``shift`` is the quantile shift that produces it.  In the
    not-attained case ``approximating_family(n)`` returns the ball element
    that moves the top ``1/n`` quantiles up by ``ε n``.
    """

    value: float
    status: str
    base_premium: float
    ambiguity_premium: float
    worst_case: object = None
    shift: Callable | None = field(default=None, repr=False, compare=False)
    approximating_family: Callable | None = field(default=None, repr=False, compare=False)
    # ε ||h||_q^q, reported next to ε ||h||_q for the r = p case
    ambiguity_premium_qpower: float | None = None
    shift_table: tuple = field(default=(), repr=False)

    def shift_grid(self, points: int = SHIFT_GRID) -> list:
        """``[[v, shift(v)], ...]`` at the cell midpoints ``(k + 1/2)/points``."""
        if self.shift is None:
            return [list(row) for row in self.shift_table]
        v = (np.arange(points) + 0.5) / points
        s = np.asarray(self.shift(v), dtype=float)
        return [[float(a), float(b)] for a, b in zip(v, s)]

    def to_json(self, verbose: bool = False) -> dict:
        out = {
            "value": _finite_or_none(self.value),
            "status": _STATUS_TO_JSON[self.status],
            "ambiguity_premium": _finite_or_none(self.ambiguity_premium),
            "worst_case_shift": self.shift_grid(),
        }
        if verbose:
            out["base_premium"] = _finite_or_none(self.base_premium)
            if self.ambiguity_premium_qpower is not None:
                out["ambiguity_premium_qpower"] = _finite_or_none(self.ambiguity_premium_qpower)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RobustResult":
        value = _none_to_inf(obj["value"])
        amb = _none_to_inf(obj["ambiguity_premium"])
        base = obj.get("base_premium")
        if base is None:
            base = value - amb if math.isfinite(value) else math.nan
        qp = obj.get("ambiguity_premium_qpower")
        return cls(
            value=value,
            status=_STATUS_FROM_JSON[obj["status"]],
            base_premium=float(base),
            ambiguity_premium=amb,
            ambiguity_premium_qpower=_none_to_inf(qp) if "ambiguity_premium_qpower" in obj else None,
            shift_table=tuple((float(a), float(b)) for a, b in obj.get("worst_case_shift", [])),
        )


def _finite_or_none(x):
    return float(x) if x is not None and math.isfinite(x) else None


def _none_to_inf(x) -> float:
    return math.inf if x is None else float(x)


def _check_eps(eps: float):
    if not (eps >= 0 and math.isfinite(eps)):
        raise DomainError(f"ball radius must be finite and >= 0, got {eps}")


def _top_shift(F, level: float, height: float):
    """``F`` with the quantiles on ``(level, 1]`` raised by ``height``.

    Step distributions stay exact step distributions; anything else becomes
    a :class:`ShiftedDistribution`.
    """

    def shift(v):
        return np.where(np.asarray(v, dtype=float) > level, height, 0.0)

    if isinstance(F, StepDistribution):
        breaks = np.union1d(F.breaks, [level])
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        vals = np.asarray(F.quantile(mids), dtype=float) + np.where(mids > level, height, 0.0)
        return DiscreteDistribution(vals, breaks), shift
    return ShiftedDistribution(F, shift, [level]), shift


def approximating_family(F, h: DistortionSpec, eps: float, n: int):
    """Ball element ``F*_{1/n}``: the top ``1/n`` quantiles moved up by ``ε n``.

    Returns ``(distribution, premium)`` where the premium is
    ``π_h(F) + ε n (1 - H(1 - 1/n))``.
    """
    _check_eps(eps)
    if n < 1:
        raise DomainError("family index must be >= 1")
    G, _ = _top_shift(F, 1.0 - 1.0 / n, eps * n)
    top = 1.0 - float(h.H(1.0 - 1.0 / n))
    return G, premium(F, h).value + eps * n * top


def robust_premium_r1(F, h: DistortionSpec, eps: float) -> RobustResult:
    """Robust premium over the order-1 ball.

    Returns ``π_h(F) + ε ||h||_∞`` with status ``attained`` if ``h`` is flat at
    its supremum on a top interval ``[1 - η, 1]``, otherwise
    ``approachable_not_attained``; ``unbounded`` when ``h`` is unbounded.
    """
    _check_eps(eps)
    base = premium(F, h).value
    if eps == 0:
        return RobustResult(base, ATTAINED, base, 0.0, worst_case=F, shift=lambda v: np.zeros_like(np.asarray(v, float)))

    def family(n: int):
        return approximating_family(F, h, eps, n)[0]

    sup = h.sup_norm()
    if math.isinf(sup):
        return RobustResult(math.inf, UNBOUNDED, base, math.inf, approximating_family=family)
    eta = h.top_plateau()
    value = base + eps * sup
    if eta > 0:
        G, shift = _top_shift(F, 1.0 - eta, eps / eta)
        return RobustResult(value, ATTAINED, base, eps * sup, worst_case=G, shift=shift)
    return RobustResult(value, NOT_ATTAINED, base, eps * sup, approximating_family=family)


def robust_premium_rp(F, h: DistortionSpec, eps: float, p: float) -> RobustResult:
    """Robust premium over the order-``p`` ball, ``p > 1``.

    The value is ``π_h(F) + ε ||h||_q`` with ``q = p/(p - 1)``, attained by
    ``F*^{-1} = F^{-1} + ε (h/||h||_q)^{q/p}``.  If ``||h||_q`` is infinite the
    problem is unbounded: truncations of ``h^{q-1}`` give feasible shifts
    whose gains grow like ``||min(h, N)||_q``.
    """
    if not p > 1:
        raise DomainError(f"order must be > 1 here (got {p}); use robust_premium_r1 for p = 1")
    _check_eps(eps)
    q = conjugate(p)
    nq = h.q_norm(q)
    if math.isinf(p):
        # q = 1: the shift (h / ||h||_1)^0 is constant
        expo = 0.0
    else:
        expo = q / p
    if math.isinf(nq):
        try:
            base = premium(F, h).value
        except UnboundedPremiumError:
            base = math.inf
        return RobustResult(math.inf, UNBOUNDED, base, math.inf, ambiguity_premium_qpower=math.inf)
    base = premium(F, h).value
    amb = eps * nq
    qpower = eps * nq**q
    if eps == 0:
        return RobustResult(base, ATTAINED, base, 0.0, worst_case=F,
                            shift=lambda v: np.zeros_like(np.asarray(v, float)), ambiguity_premium_qpower=0.0)

    def shift(v):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return eps * (np.asarray(h.h(v), dtype=float) / nq) ** expo

    G = ShiftedDistribution(F, shift, h.breakpoints())
    return RobustResult(base + amb, ATTAINED, base, amb, worst_case=G, shift=shift, ambiguity_premium_qpower=qpower)


def robust_premium(F, h: DistortionSpec, spec: AmbiguitySpec) -> RobustResult:
    """Dispatch on the ball order.  Only ``r = 1`` and ``r = p`` have closed forms."""
    if spec.metric != "d1":
        raise DomainError("the dp ball has no closed-form robust premium; use diagnose_boundedness")
    if spec.r == 1:
        return robust_premium_r1(F, h, spec.epsilon)
    return robust_premium_rp(F, h, spec.epsilon, spec.r)


def diagnose_boundedness(h: DistortionSpec, p: float, r: float, metric: str = "d1") -> str:
    """Classify the robust problem for losses with ``p`` moments and an order-``r`` ball.

    Returns ``"bounded"``, ``"unbounded"`` or ``"undetermined"``.

    * bounded: ``||h||_q < ∞`` (so every ``F`` with ``p`` moments has a finite
      premium) and ``||h||_{r'} < ∞``, which bounds the gain over the ball;
    * unbounded: ``||h||_{r'} = ∞``.  Truncating ``h^{r'-1}`` yields feasible
      shifts with arbitrarily large gain.  This covers ``r = 1`` with
      unbounded ``h`` and ``r >= p`` with ``h`` outside ``L^q``;
    * undetermined: ``h`` is in ``L^{r'}`` but not in ``L^q``, so the outcome
      depends on the tail of ``F``.

    For ``metric="dp"`` only the bounded case is decided.
    """
    if not p >= 1 or not r >= 1:
        raise DomainError("moment and ball orders must be >= 1")
    q = conjugate(p)
    nq = h.q_norm(q)
    if metric == "dp":
        return "bounded" if math.isfinite(nq) else "undetermined"
    if metric != "d1":
        raise DomainError(f"metric must be 'd1' or 'dp', got {metric!r}")
    nr = h.q_norm(conjugate(r))
    if math.isinf(nr):
        return "unbounded"
    if math.isfinite(nq):
        return "bounded"
    return "undetermined"


def _dual_norm(h: DistortionSpec, p: float, dominating) -> float:
    q = conjugate(p)
    if dominating is None:
        return h.q_norm(q)
    c, s = dominating
    dom = Power(s)
    v = (np.arange(1, 1000) / 1000.0)
    if np.any(np.asarray(h.h(v), float) > c * np.asarray(dom.h(v), float) * (1 + 1e-12) + 1e-12):
        raise DomainError(f"h is not dominated by {c} * Power({s})")
    return c * dom.q_norm(q)


def continuity_bound(h: DistortionSpec, F, G, p: float = 1.0, dominating: tuple | None = None, **wkw) -> float:
    """Certified bound on ``|π_h(F) - π_h(G)|``.

    ``||h||_q W_p(F, G)``; with ``dominating=(c, s)`` the norm of the dominating
    density ``c · Power(s)`` is used instead.  Extra keywords go to
    :func:`wasserstein` (for non-step inputs).
    """
    if not p >= 1:
        raise DomainError(f"order must be >= 1, got {p}")
    norm = _dual_norm(h, p, dominating)
    if math.isinf(norm):
        raise NoFiniteBoundError(f"||h||_q is infinite for q = {conjugate(p)}")
    return float(norm * wasserstein(F, G, p, **wkw))


def partial_coverage_bound(h: DistortionSpec, T: PayoffTransform, F, G, r: float = 1.0, **wkw) -> float:
    """Bound on ``|π_h(T(F)) - π_h(T(G))|`` for a Hölder payoff ``T``.

    ``||h||_q H_β W_r(F, G)^β`` with ``p = r/β`` and ``q`` conjugate to ``p``.
    """
    beta = float(T.hoelder_exponent)
    p = r / beta
    if not p >= 1:
        raise DomainError(f"r / beta must be >= 1, got {p}")
    norm = h.q_norm(conjugate(p))
    if math.isinf(norm):
        raise NoFiniteBoundError(f"||h||_q is infinite for q = {conjugate(p)}")
    return float(norm * T.hoelder_constant * wasserstein(F, G, r, **wkw) ** beta)


def transformed_premium_gap(h: DistortionSpec, T: PayoffTransform, F: StepDistribution, G: StepDistribution) -> float:
    """``|π_h(T(F)) - π_h(T(G))|`` for step distributions."""
    return abs(premium(apply_transform(T, F), h).value - premium(apply_transform(T, G), h).value)


def robust_ceq_lower_bound(F, V: DisutilitySpec, h: DistortionSpec, eps: float, p: float) -> float:
    """Lower bound for the robust combined premium ``sup_G V^{-1}(∫ V(G^{-1}) h)``.

    Evaluates the combined premium at the worst case of the distortion-only
    problem (order ``p`` ball).  That ball element is feasible, so the result
    bounds the supremum from below; it is not the supremum itself.
    """
    res = robust_premium_r1(F, h, eps) if p == 1 else robust_premium_rp(F, h, eps, p)
    if res.status == UNBOUNDED:
        return math.inf
    if res.worst_case is not None:
        G = res.worst_case
    else:
        # not attained: use a member of the approximating family
        G = res.approximating_family(64)
    if isinstance(G, StepDistribution):
        w = h.weights(G.breaks)
        return float(V.inverse(np.dot(w, V.forward(G.values))))
    pts = set(np.asarray(G.breakpoints(), float)) | set(h.breakpoints())
    with np.errstate(over="raise", divide="ignore", invalid="ignore"):
        try:
            val, _ = _quad(lambda v: float(V.forward(float(G.quantile(v)))) * float(h.h(v)), 0.0, 1.0, pts)
        except FloatingPointError:
            raise DisutilityOverflowError("disutility overflowed; rescale losses") from None
    if not math.isfinite(val):
        return math.inf
    return float(V.inverse(val))

