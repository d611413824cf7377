"""Loss distributions on the real line and distances between them.

Every distribution exposes its quantile function ``quantile(v)``; all
pricing and distance computations work in quantile space.  Two families
exist:

* step distributions (:class:`EmpiricalDistribution`,
  :class:`DiscreteDistribution`) whose quantile function is a step function
  on a finite partition of (0, 1].  Distances and premia on these are exact
  finite sums.
* everything else (:class:`ParametricModel` subclasses and
  :class:`ShiftedDistribution`), handled by quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from scipy import integrate, special

from .errors import ConfigurationError, DomainError

__all__ = [
    "conjugate",
    "make_rng",
    "StepDistribution",
    "EmpiricalDistribution",
    "DiscreteDistribution",
    "ParametricModel",
    "Gamma",
    "Exponential",
    "Uniform",
    "Bernoulli",
    "ShiftedDistribution",
    "quantile",
    "wasserstein",
    "wasserstein_dp",
    "PayoffTransform",
    "XL",
    "Proportional",
    "CustomPayoff",
    "apply_transform",
    "CsvFormatError",
    "read_losses_csv",
]

# Index tolerance for ceil(v*n): absorbs rounding in products like 0.3*10.
_INDEX_TOL = 1e-9
# Midpoint grid for non-step distances.
DEFAULT_GRID = 10_001


def conjugate(p: float) -> float:
    """Hölder conjugate ``q`` with ``1/p + 1/q = 1`` (``1 <-> inf``)."""
    if p < 1:
        raise DomainError(f"Hölder exponent must be >= 1, got {p}")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for substream ``stream`` of ``seed``.

    Substream keys are ``seed + stream`` reduced modulo 2**64, so contract
    ``j`` of a batch run always draws the same numbers regardless of the
    order or thread in which contracts are processed.
    """
    key = (int(seed) + int(stream)) % (1 << 64)
    return np.random.Generator(np.random.Philox(key))


def _check_probability(v, *, open_upper: bool = False, open_lower: bool = False):
    arr = np.asarray(v, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"probability level must lie in [0, 1], got {v}")
    if open_upper and np.any(arr >= 1.0):
        raise DomainError("quantile at level 1 is infinite for this family")
    if open_lower and np.any(arr <= 0.0):
        raise DomainError("quantile at level 0 is infinite for this family")
    return arr


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Step distributions
# ---------------------------------------------------------------------------


class StepDistribution:
    """Distribution with a step quantile function.

    ``values[k]`` is the quantile on the level interval
    ``(breaks[k], breaks[k+1]]``.  ``values`` is nondecreasing and ``breaks``
    strictly increases from 0 to 1.
    """

    __slots__ = ("_values", "_breaks")

    def __init__(self, values, breaks):
        values = np.asarray(values, dtype=float)
        breaks = np.asarray(breaks, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("a step distribution needs at least one atom")
        if breaks.shape != (values.size + 1,):
            raise DomainError("breaks must have one more entry than values")
        if not np.all(np.isfinite(values)):
            raise DomainError("atoms must be finite")
        if np.any(np.diff(values) < 0):
            raise DomainError("atoms must be sorted nondecreasingly")
        if breaks[0] != 0.0 or abs(breaks[-1] - 1.0) > 1e-12 or np.any(np.diff(breaks) <= 0):
            raise DomainError("breaks must increase strictly from 0 to 1")
        breaks = breaks.copy()
        breaks[-1] = 1.0
        self._values = _frozen(values)
        self._breaks = _frozen(breaks)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def breaks(self) -> np.ndarray:
        return self._breaks

    @property
    def weights(self) -> np.ndarray:
        return np.diff(self._breaks)

    def quantile(self, v):
        arr = _check_probability(v)
        idx = np.searchsorted(self._breaks[1:], arr - 1e-12, side="left")
        out = self._values[np.minimum(idx, self._values.size - 1)]
        return float(out) if np.ndim(v) == 0 else out

    def breakpoints(self) -> np.ndarray:
        return self._breaks[1:-1]

    def mean(self) -> float:
        return float(np.dot(self.weights, self._values))

    def norm(self, p: float) -> float:
        """``||F^{-1}||_p``."""
        a = np.abs(self._values)
        if math.isinf(p):
            return float(a.max())
        return float(np.dot(self.weights, a**p) ** (1.0 / p))

    def tail_integral(self, alpha: float) -> float:
        """``∫_alpha^1 F^{-1}(v) dv``."""
        lo = np.clip(self._breaks[:-1], alpha, 1.0)
        hi = np.clip(self._breaks[1:], alpha, 1.0)
        return float(np.dot(hi - lo, self._values))

    @property
    def is_nonnegative(self) -> bool:
        return bool(self._values[0] >= 0.0)

    def __len__(self) -> int:
        return int(self._values.size)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(atoms={self._values.size})"


class EmpiricalDistribution(StepDistribution):
    """Equal-weight sample; the quantile at ``v`` is ``x_[ceil(v n)]``."""

    __slots__ = ()

    def __init__(self, sample: Iterable[float]):
        x = np.sort(np.asarray(list(sample) if not isinstance(sample, np.ndarray) else sample, dtype=float).ravel())
        n = x.size
        if n == 0:
            raise DomainError("an empirical distribution needs n >= 1")
        super().__init__(x, np.arange(n + 1) / n)

    @property
    def sorted_values(self) -> np.ndarray:
        return self.values

    @property
    def n(self) -> int:
        return int(self.values.size)

    def quantile(self, v):
        arr = _check_probability(v)
        n = self.n
        idx = np.ceil(arr * n - _INDEX_TOL).astype(int)
        idx = np.clip(idx, 1, n) - 1
        out = self.values[idx]
        return float(out) if np.ndim(v) == 0 else out

    def __eq__(self, other):
        return isinstance(other, EmpiricalDistribution) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


class DiscreteDistribution(StepDistribution):
    """Finite distribution with arbitrary atom probabilities."""

    __slots__ = ()

    @classmethod
    def from_atoms(cls, atoms: Sequence[float], probs: Sequence[float]) -> "DiscreteDistribution":
        atoms = np.asarray(atoms, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if atoms.shape != probs.shape or atoms.ndim != 1:
            raise DomainError("atoms and probabilities must be 1-d of equal length")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError("probabilities must be nonnegative and sum to 1")
        order = np.argsort(atoms, kind="stable")
        atoms, probs = atoms[order], probs[order]
        keep = probs > 0
        atoms, probs = atoms[keep], probs[keep]
        return cls(atoms, np.concatenate([[0.0], np.cumsum(probs)]))


# ---------------------------------------------------------------------------
# Parametric families
# ---------------------------------------------------------------------------


class ParametricModel:
    """Base for the closed-form loss families used by the simulation harness."""

    #: all moments of the shipped families are finite
    moment_order: float = math.inf
    is_nonnegative: bool = True

    def quantile(self, v):  # pragma: no cover - abstract
        raise NotImplementedError

    def sf(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def tail_integral(self, alpha: float) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def mean(self) -> float:
        return self.tail_integral(0.0)

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def breakpoints(self) -> np.ndarray:
        return np.empty(0)

    def sample(self, n: int, seed: int, stream: int = 0) -> EmpiricalDistribution:
        """Draw an ``n``-point empirical distribution from substream ``stream``."""
        if n < 1:
            raise DomainError("sample size must be >= 1")
        return EmpiricalDistribution(self._draw(make_rng(seed, stream), n))

    def _draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.quantile(rng.uniform(0.0, 1.0, n))

    def norm(self, p: float) -> float:
        """``||F^{-1}||_p`` by quadrature (subclasses override with closed forms)."""
        val, _ = integrate.quad(lambda x: p * x ** (p - 1) * self.sf(x), 0.0, math.inf, limit=200)
        return float(val ** (1.0 / p))


@dataclass(frozen=True)
class Gamma(ParametricModel):
    shape: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError("Gamma needs shape > 0 and scale > 0")

    def quantile(self, v):
        arr = _check_probability(v, open_upper=True)
        out = self.scale * special.gammaincinv(self.shape, arr)
        return float(out) if np.ndim(v) == 0 else out

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammaincc(self.shape, x / self.scale)

    def tail_integral(self, alpha: float) -> float:
        if alpha <= 0.0:
            return self.shape * self.scale
        if alpha >= 1.0:
            return 0.0
        q = self.quantile(alpha) / self.scale
        return float(self.shape * self.scale * special.gammaincc(self.shape + 1.0, q))

    def norm(self, p: float) -> float:
        if math.isinf(p):
            return math.inf
        logm = p * math.log(self.scale) + special.gammaln(self.shape + p) - special.gammaln(self.shape)
        return float(math.exp(logm / p))

    def _draw(self, rng, n):
        return rng.gamma(self.shape, self.scale, n)


@dataclass(frozen=True)
class Exponential(ParametricModel):
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError("Exponential needs rate > 0")

    def quantile(self, v):
        arr = _check_probability(v, open_upper=True)
        out = -np.log1p(-arr) / self.rate
        return float(out) if np.ndim(v) == 0 else out

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return np.exp(-self.rate * x)

    def tail_integral(self, alpha: float) -> float:
        if alpha >= 1.0:
            return 0.0
        alpha = max(alpha, 0.0)
        return float((1.0 - alpha) * (self.quantile(alpha) + 1.0 / self.rate))

    def norm(self, p: float) -> float:
        if math.isinf(p):
            return math.inf
        return float(math.exp(special.gammaln(1.0 + p) / p) / self.rate)

    def _draw(self, rng, n):
        return rng.exponential(1.0 / self.rate, n)


@dataclass(frozen=True)
class Uniform(ParametricModel):
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError("Uniform needs a < b")

    @property
    def is_nonnegative(self) -> bool:  # type: ignore[override]
        return self.a >= 0.0

    def quantile(self, v):
        arr = _check_probability(v)
        out = self.a + (self.b - self.a) * arr
        return float(out) if np.ndim(v) == 0 else out

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((self.b - x) / (self.b - self.a), 0.0, 1.0)

    def tail_integral(self, alpha: float) -> float:
        alpha = min(max(alpha, 0.0), 1.0)
        return float((1.0 - alpha) * (self.quantile(alpha) + self.b) / 2.0)

    def norm(self, p: float) -> float:
        if math.isinf(p):
            return max(abs(self.a), abs(self.b))
        val, _ = integrate.quad(lambda v: abs(self.quantile(v)) ** p, 0.0, 1.0, points=[0.5])
        return float(val ** (1.0 / p))


@dataclass(frozen=True)
class Bernoulli(ParametricModel):
    """Loss 0 with probability ``a`` and 1 with probability ``1 - a``."""

    a: float

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise DomainError("Bernoulli needs 0 <= a <= 1")

    def quantile(self, v):
        arr = _check_probability(v)
        out = (arr > self.a).astype(float)
        return float(out) if np.ndim(v) == 0 else out

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, np.where(x < 1, 1.0 - self.a, 0.0))

    def tail_integral(self, alpha: float) -> float:
        return float(1.0 - min(max(alpha, self.a), 1.0))

    def norm(self, p: float) -> float:
        if math.isinf(p):
            return 1.0 if self.a < 1 else 0.0
        return float((1.0 - self.a) ** (1.0 / p))

    def breakpoints(self) -> np.ndarray:
        return np.array([self.a]) if 0.0 < self.a < 1.0 else np.empty(0)

    def as_discrete(self) -> DiscreteDistribution:
        return DiscreteDistribution.from_atoms([0.0, 1.0], [self.a, 1.0 - self.a])


# ---------------------------------------------------------------------------
# Quantile-shifted distributions
# ---------------------------------------------------------------------------


class ShiftedDistribution:
    """Distribution with quantile ``base.quantile(v) + shift(v)``.

    ``shift`` must be nonnegative and nondecreasing so the result is again a
    quantile function.  ``shift_breaks`` lists levels where ``shift`` jumps or
    is singular; they are used to split quadratures.
    """

    def __init__(self, base, shift: Callable, shift_breaks: Sequence[float] = ()):
        self.base = base
        self.shift = shift
        self.shift_breaks = tuple(float(b) for b in shift_breaks if 0.0 < b < 1.0)

    def quantile(self, v):
        arr = _check_probability(v)
        out = np.asarray(self.base.quantile(arr), dtype=float) + np.asarray(self.shift(arr), dtype=float)
        return float(out) if np.ndim(v) == 0 else out

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([np.asarray(self.base.breakpoints(), dtype=float), self.shift_breaks]))

    @property
    def is_nonnegative(self) -> bool:
        return bool(self.base.is_nonnegative)

    def shift_norm(self, r: float) -> float:
        """``||shift||_r``, which equals the order-r distance to ``base``."""
        val = _quad01(lambda v: abs(float(self.shift(v))) ** r, self.shift_breaks)
        return val ** (1.0 / r)

    def mean(self) -> float:
        return _quad01(lambda v: float(self.quantile(v)), self.breakpoints())

    def norm(self, p: float) -> float:
        return _quad01(lambda v: abs(float(self.quantile(v))) ** p, self.breakpoints()) ** (1.0 / p)

    def materialize(self, n: int) -> EmpiricalDistribution:
        """``n``-point sample of cell-averaged quantiles, for plotting."""
        edges = np.arange(n + 1) / n
        vals = [
            _quad_interval(lambda v: float(self.quantile(v)), edges[i], edges[i + 1], self.breakpoints()) * n
            for i in range(n)
        ]
        return EmpiricalDistribution(vals)


def _quad_interval(f, lo, hi, points=()) -> float:
    pts = sorted(p for p in points if lo < p < hi)
    edges = [lo, *pts, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, limit=200, epsabs=1e-13, epsrel=1e-12)
        total += val
    return total


def _quad01(f, points=()) -> float:
    return _quad_interval(f, 0.0, 1.0, points)


# ---------------------------------------------------------------------------
# Quantiles and distances
# ---------------------------------------------------------------------------

Distribution = Union[StepDistribution, ParametricModel, ShiftedDistribution]


def quantile(dist: Distribution, v):
    """``F^{-1}(v)``; raises :class:`DomainError` outside the valid range."""
    return dist.quantile(v)


def _step_pieces(F: StepDistribution, G: StepDistribution):
    breaks = np.union1d(F.breaks, G.breaks)
    widths = np.diff(breaks)
    keep = widths > 0
    mids = (0.5 * (breaks[:-1] + breaks[1:]))[keep]
    widths = widths[keep]
    fv = F.values[np.searchsorted(F.breaks, mids, side="left") - 1]
    gv = G.values[np.searchsorted(G.breaks, mids, side="left") - 1]
    return widths, fv, gv


def _grid_diff(F, G, transform, grid: int, method: str):
    if method == "adaptive":
        pts = np.union1d(np.asarray(F.breakpoints(), dtype=float), np.asarray(G.breakpoints(), dtype=float))
        return None, pts
    v = (np.arange(grid) + 0.5) / grid
    return transform(np.asarray(F.quantile(v)), np.asarray(G.quantile(v))), None


def wasserstein(F: Distribution, G: Distribution, r: float = 1.0, *, grid: int = DEFAULT_GRID, method: str = "midpoint") -> float:
    """Order-``r`` Wasserstein distance with the absolute-value ground metric.

    Computed as ``(∫_0^1 |F^{-1} - G^{-1}|^r dv)^{1/r}``.  Two step
    distributions are compared exactly over the merged partition.  Otherwise
    the integral is approximated by the midpoint rule on ``grid`` interior
    points, or by adaptive quadrature with ``method="adaptive"``.
    """
    if not r >= 1:
        raise DomainError(f"Wasserstein order must be >= 1, got {r}")
    if isinstance(F, StepDistribution) and isinstance(G, StepDistribution):
        w, fv, gv = _step_pieces(F, G)
        d = np.abs(fv - gv)
        if math.isinf(r):
            return float(d.max())
        return float(np.dot(w, d**r) ** (1.0 / r))
    if math.isinf(r):
        raise DomainError("order inf is only supported between step distributions")
    if isinstance(G, ShiftedDistribution) and G.base is F and method == "adaptive":
        return G.shift_norm(r)
    if isinstance(F, ShiftedDistribution) and F.base is G and method == "adaptive":
        return F.shift_norm(r)
    diff, pts = _grid_diff(F, G, lambda a, b: np.abs(a - b) ** r, grid, method)
    if diff is None:
        val = _quad01(lambda v: abs(float(F.quantile(v)) - float(G.quantile(v))) ** r, pts)
        return float(val ** (1.0 / r))
    return float(diff.mean() ** (1.0 / r))


def wasserstein_dp(F: Distribution, G: Distribution, p: float = 1.0, *, grid: int = DEFAULT_GRID, method: str = "midpoint") -> float:
    """Order-1 Wasserstein distance for the ground metric ``|x^p - y^p|``.

    Both distributions must live on ``[0, inf)``.
    """
    if not p >= 1:
        raise DomainError(f"power must be >= 1, got {p}")
    for D in (F, G):
        if not D.is_nonnegative:
            raise DomainError("the d_p metric needs nonnegative support")
    if isinstance(F, StepDistribution) and isinstance(G, StepDistribution):
        w, fv, gv = _step_pieces(F, G)
        return float(np.dot(w, np.abs(fv**p - gv**p)))
    diff, pts = _grid_diff(F, G, lambda a, b: np.abs(a**p - b**p), grid, method)
    if diff is None:
        return _quad01(lambda v: abs(float(F.quantile(v)) ** p - float(G.quantile(v)) ** p), pts)
    return float(diff.mean())


# ---------------------------------------------------------------------------
# Payoff transforms
# ---------------------------------------------------------------------------


class PayoffTransform:
    """Nondecreasing payoff ``T`` with Hölder data ``(beta, H_beta)``."""

    hoelder_exponent: float = 1.0

    @property
    def hoelder_constant(self) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, x):  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class XL(PayoffTransform):
    """Excess-of-loss layer: pays ``min(max(x - a, 0), e - a)``."""

    attachment: float
    exit: float

    def __post_init__(self):
        if not (math.isfinite(self.attachment) and math.isfinite(self.exit)):
            raise DomainError("XL attachment and exit must be finite")
        if not 0.0 <= self.attachment < self.exit:
            raise DomainError("XL needs 0 <= attachment < exit")

    @property
    def hoelder_constant(self) -> float:
        return 1.0

    def __call__(self, x):
        return np.minimum(np.maximum(np.asarray(x, dtype=float) - self.attachment, 0.0), self.exit - self.attachment)


@dataclass(frozen=True)
class Proportional(PayoffTransform):
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("proportional share must be > 0")

    @property
    def hoelder_constant(self) -> float:
        return float(self.c)

    def __call__(self, x):
        return self.c * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class CustomPayoff(PayoffTransform):
    """Piecewise-linear payoff through ``(xs, ys)``, constant outside the knots."""

    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs, ys = np.asarray(self.xs, float), np.asarray(self.ys, float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise DomainError("custom payoff needs at least two knots")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("custom payoff knots must increase strictly")
        if np.any(np.diff(ys) < 0):
            raise DomainError("custom payoff must be nondecreasing")
        object.__setattr__(self, "xs", tuple(xs.tolist()))
        object.__setattr__(self, "ys", tuple(ys.tolist()))

    @property
    def hoelder_constant(self) -> float:
        slopes = np.diff(self.ys) / np.diff(self.xs)
        return float(max(slopes.max(), np.finfo(float).tiny))

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.ys)


def apply_transform(T: PayoffTransform, dist: StepDistribution) -> StepDistribution:
    """Image distribution of ``dist`` under the payoff ``T``.

    ``T`` is nondecreasing, so transformed order statistics stay sorted.
    """
    if not isinstance(dist, StepDistribution):
        raise TypeError("payoff transforms act on step distributions")
    vals = np.maximum.accumulate(np.asarray(T(dist.values), dtype=float))
    if isinstance(dist, EmpiricalDistribution):
        return EmpiricalDistribution(vals)
    return type(dist)(vals, dist.breaks)


# ---------------------------------------------------------------------------
# CSV input
# ---------------------------------------------------------------------------


class CsvFormatError(DomainError):
    """Malformed loss file; ``row`` is the 1-based line number."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


def _contract_sort_key(cid: str):
    try:
        return (0, int(cid), cid)
    except ValueError:
        return (1, 0, cid)


def read_losses_csv(path: str | Path) -> dict[str, EmpiricalDistribution]:
    """Read losses from ``path``.

    Single-column files (optional header ``loss``) yield one contract with id
    ``"1"``.  Two-column files ``contract_id,loss`` yield one contract per id.
    The result is ordered by contract id.
    """
    groups: dict[str, list[float]] = {}
    ncols = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells):
                continue
            if ncols is None:
                ncols = len(cells)
                if ncols not in (1, 2):
                    raise CsvFormatError(f"expected 1 or 2 columns, got {ncols}", lineno)
                header = [c.lower() for c in cells]
                if header in (["loss"], ["contract_id", "loss"]):
                    continue
            if len(cells) != ncols:
                raise CsvFormatError(f"expected {ncols} columns, got {len(cells)}", lineno)
            cid = "1" if ncols == 1 else cells[0]
            if cid == "":
                raise CsvFormatError("empty contract id", lineno)
            try:
                value = float(cells[-1])
            except ValueError:
                raise CsvFormatError(f"not a number: {cells[-1]!r}", lineno) from None
            if not math.isfinite(value):
                raise CsvFormatError(f"non-finite loss {cells[-1]!r}", lineno)
            groups.setdefault(cid, []).append(value)
    if not groups:
        raise CsvFormatError("no losses found")
    return {cid: EmpiricalDistribution(groups[cid]) for cid in sorted(groups, key=_contract_sort_key)}


def check_equal_sizes(samples: Sequence[EmpiricalDistribution]) -> int:
    sizes = {s.n for s in samples}
    if len(sizes) != 1:
        raise ConfigurationError(f"all samples must have the same size, got {sorted(sizes)}")
    return sizes.pop()
