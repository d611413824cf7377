"""Recovering a distortion density from observed premia.

Given ``m`` contracts with loss samples of common size ``n`` and their
observed prices, the density is searched in a finite basis and fitted by
constrained least squares:

* step basis (problem P1): ``h = Σ_k λ_k 1[(k-1)/l, k/l)`` with
  ``0 <= λ_1 <= ... <= λ_l`` and ``mean(λ) = 1``;
* monotone spline basis (problem P2): ``h = Σ_k λ_k S_k`` with ``λ >= 0``
  and ``Σ_k λ_k a_k = 1``.

Both reduce to least squares over a weighted simplex, which is solved
exactly by a nonnegative least-squares active-set method.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist_core import EmpiricalDistribution, Gamma, check_equal_sizes, make_rng
from .distortion import DistortionSpec, SplineMix, StepMix, distortion_premium
from .errors import ConfigurationError, ConvergenceError, DomainError
from .splines import SplineBasis

__all__ = [
    "StepBasis",
    "SplineBasis",
    "DesignMatrix",
    "FitResult",
    "build_step_design",
    "build_spline_basis",
    "build_spline_design",
    "nnls",
    "solve_qp",
    "identify",
    "SimulationResult",
    "simulate_study",
]

KKT_TOL = 1e-8


@dataclass(frozen=True)
class StepBasis:
    """``l`` equal steps over a sample of size ``n``; ``l`` must divide ``n``."""

    l: int
    n: int

    def __post_init__(self):
        if self.l < 1 or self.n < 1:
            raise ConfigurationError("step count and sample size must be positive")
        if self.n % self.l:
            raise ConfigurationError(f"step count l={self.l} does not divide sample size n={self.n}")

    @property
    def points_per_step(self) -> int:
        return self.n // self.l

    def cell_integrals(self) -> np.ndarray:
        """``A[i, k] = 1/n`` when order statistic ``i`` falls in step ``k``."""
        A = np.zeros((self.n, self.l))
        block = np.arange(self.n) // self.points_per_step
        A[np.arange(self.n), block] = 1.0 / self.n
        return A


@dataclass(frozen=True)
class DesignMatrix:
    """Cell integrals ``A`` (n x l), masses ``a`` and price design ``P`` (m x l)."""

    kind: str
    A: np.ndarray
    a: np.ndarray
    P: np.ndarray
    L: int | None = None

    @property
    def size(self) -> int:
        return int(self.A.shape[1])

    @property
    def problem(self) -> str:
        return "P1" if self.kind == "step" else "P2"


def _sorted_matrix(samples: Sequence[EmpiricalDistribution]) -> np.ndarray:
    if len(samples) == 0:
        raise ConfigurationError("need at least one contract")
    check_equal_sizes(samples)
    return np.vstack([s.sorted_values for s in samples])


def build_step_design(samples: Sequence[EmpiricalDistribution], l: int) -> DesignMatrix:
    """Price design for the step basis.

    ``P[j, k]`` is the sum of the order statistics of sample ``j`` in block
    ``k`` (indices ``L(k-1)+1 .. Lk`` with ``L = n/l``), divided by ``n``.
    """
    X = _sorted_matrix(samples)
    basis = StepBasis(int(l), X.shape[1])
    A = basis.cell_integrals()
    P = X.reshape(X.shape[0], basis.l, basis.points_per_step).sum(axis=2) / basis.n
    return DesignMatrix("step", A, A.sum(axis=0), P)


def build_spline_basis(L: int) -> SplineBasis:
    return SplineBasis(L)


def build_spline_design(samples: Sequence[EmpiricalDistribution], basis: SplineBasis) -> DesignMatrix:
    """Price design ``P = X A`` for the monotone spline basis, ``A`` exact."""
    X = _sorted_matrix(samples)
    A = basis.cell_integrals(X.shape[1])
    return DesignMatrix("spline", A, A.sum(axis=0), X @ A, L=basis.L)


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


def nnls(A: np.ndarray, b: np.ndarray, max_iter: int | None = None, tol: float | None = None):
    """Lawson-Hanson active-set solution of ``min ||A x - b||`` with ``x >= 0``.

    Returns ``(x, iterations)``.  Among equally attractive columns the one
    with the smallest index enters first.  Raises :class:`ConvergenceError`
    (with the best iterate attached) after ``max_iter`` outer iterations.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 3 * n
    if tol is None:
        tol = 10 * np.finfo(float).eps * max(m, n) * max(np.abs(A).max(initial=0.0), 1.0) * max(np.abs(b).max(initial=0.0), 1.0)
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ (b - A @ x)
    it = 0
    while (~passive).any() and np.max(np.where(passive, -np.inf, w)) > tol:
        if it >= max_iter:
            raise ConvergenceError(f"NNLS did not converge in {max_iter} iterations", best=x.copy())
        it += 1
        j = int(np.argmax(np.where(passive, -np.inf, w)))
        passive[j] = True
        while True:
            z = np.zeros(n)
            z[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if np.all(z[passive] > 0):
                x = z
                break
            neg = passive & (z <= 0)
            step = np.min(x[neg] / (x[neg] - z[neg]))
            x = x + step * (z - x)
            # the blocking variable(s) land on zero up to rounding
            passive &= ~(x <= 1e-15 * max(1.0, np.abs(x).max()))
            x[~passive] = 0.0
            if not passive.any():
                break
        w = A.T @ (b - A @ x)
    return x, it


@dataclass(frozen=True)
class FitResult:
    """Outcome of an identification fit.

    ``coefficients`` are the basis weights λ; ``active_constraints`` lists the
    inequality constraints holding with equality (for P1 index ``k`` means
    ``λ_k = λ_{k-1}``, with ``λ_0 := 0``; for P2 it means ``λ_k = 0``).
    """

    coefficients: tuple
    fitted_density: DistortionSpec | None
    objective: float
    active_constraints: tuple
    iterations: int
    kkt_residual: float
    basis: str
    L: int | None = None
    fitted_prices: tuple = field(default=(), repr=False)

    @property
    def size(self) -> int:
        return len(self.coefficients)

    def to_json(self) -> dict:
        out = {
            "basis": self.basis,
            "size": self.size,
            "lambda": list(self.coefficients),
            "objective": self.objective,
            "iterations": self.iterations,
            "active_constraints": list(self.active_constraints),
            "kkt_residual": self.kkt_residual,
        }
        if self.L is not None:
            out["L"] = self.L
        return out

    @classmethod
    def from_json(cls, obj) -> "FitResult":
        if isinstance(obj, str):
            obj = json.loads(obj)
        lam = tuple(float(x) for x in obj["lambda"])
        basis = obj["basis"]
        if basis == "step":
            dens, L = StepMix(lam), None
        elif basis == "spline":
            L = int(obj.get("L", len(lam) - 3))
            dens = SplineMix(L, lam)
        else:
            raise DomainError(f"unknown basis {basis!r}")
        return cls(
            coefficients=lam,
            fitted_density=dens,
            objective=float(obj["objective"]),
            active_constraints=tuple(int(i) for i in obj.get("active_constraints", ())),
            iterations=int(obj.get("iterations", 0)),
            kkt_residual=float(obj.get("kkt_residual", 0.0)),
            basis=basis,
            L=L,
        )


def _simplex_lsq(C: np.ndarray, d: np.ndarray, w: np.ndarray, max_iter: int):
    """Minimise ``||C x - d||²`` subject to ``w·x = 1`` and ``x >= 0`` (``w > 0``).

    On the feasible set ``C x - d = (C - d wᵀ) x``.  With ``A = C - d wᵀ`` every
    nonzero ``y >= 0`` is ``t x`` for a feasible ``x``, and
    ``min_t t²||A x||² + γ²(t - 1)²`` is increasing in ``||A x||²``.  Hence the
    NNLS solution ``y`` of ``[A; γ wᵀ] y ≈ [0; γ]`` yields the optimum
    ``x = y / (w·y)``.
    """
    A = C - np.outer(d, w)
    gamma = max(float(np.linalg.norm(d)), float(np.linalg.norm(C @ (w / (w @ w)))), 1e-300)
    At = np.vstack([A, gamma * w[None, :]])
    bt = np.concatenate([np.zeros(C.shape[0]), [gamma]])
    y, it = nnls(At, bt, max_iter=max_iter)
    s = float(w @ y)
    if not s > 0:  # pragma: no cover - y = 0 is never optimal
        raise ConvergenceError("degenerate NNLS solution", best=y)
    return y / s, it


def _kkt_residual(C, d, w, x) -> float:
    """Scaled violation of the KKT conditions at ``x``."""
    r = C @ x - d
    g = 2.0 * C.T @ r
    free = x > 0
    nu = float(g[free] @ w[free] / (w[free] @ w[free])) if free.any() else float(np.min(g / w))
    rho = g - nu * w
    viol = np.concatenate([np.abs(rho[free]), np.maximum(-rho[~free], 0.0), [max(0.0, -x.min()), abs(w @ x - 1.0)]])
    scale = 2.0 * max(np.linalg.norm(C), 1e-300) * max(np.linalg.norm(d), np.linalg.norm(C @ x), 1e-300)
    return float(viol.max() / scale)


def solve_qp(
    P,
    prices: Sequence[float],
    problem: str | None = None,
    masses: Sequence[float] | None = None,
    max_iter: int | None = None,
) -> FitResult:
    """Solve problem P1 (step basis) or P2 (spline basis).

    Parameters
    ----------
    P : DesignMatrix or ndarray of shape (m, l)
        Price design.  With a :class:`DesignMatrix` the problem type and the
        masses are taken from it.
    prices : sequence of float, length m
        Observed premia.
    problem : {"P1", "P2"}
        Required when ``P`` is a bare matrix.
    masses : sequence of float, optional
        ``a_k`` for P2; defaults to the masses of the spline basis with
        ``L = l - 3``.

    Returns
    -------
    FitResult
        The minimiser, a global optimum of the convex problem.  When several
        minimisers exist, the one reached by the active-set path is returned.

    Notes
    -----
    P1 is rewritten with increments ``μ_1 = λ_1``, ``μ_k = λ_k - λ_{k-1}``,
    which turns the ordering into ``μ >= 0`` and the mean condition into
    ``Σ_k μ_k (l - k + 1)/l = 1``.
    """
    L = None
    if isinstance(P, DesignMatrix):
        design = P
        problem = design.problem
        masses = design.a
        L = design.L
        P = design.P
    P = np.asarray(P, dtype=float)
    d = np.asarray(prices, dtype=float)
    if P.ndim != 2:
        raise DomainError("price design must be a matrix")
    m, l = P.shape
    if m == 0:
        raise ConfigurationError("need at least one contract")
    if d.shape != (m,):
        raise DomainError(f"expected {m} prices, got {d.shape}")
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(d))):
        raise DomainError("design and prices must be finite")
    if max_iter is None:
        max_iter = 50 * l

    if problem == "P1":
        M = np.tril(np.ones((l, l)))
        C = P @ M
        w = (l - np.arange(l)) / l
        mu, it = _simplex_lsq(C, d, w, max_iter)
        lam = M @ mu
        active = tuple(int(k) for k in np.flatnonzero(mu <= 0))
        kkt = _kkt_residual(C, d, w, mu)
        density = StepMix(lam)
        basis = "step"
    elif problem == "P2":
        if masses is None:
            if l < 4:
                raise DomainError("a spline basis has at least 4 members")
            L = l - 3
            masses = SplineBasis(L).masses()
        elif L is None and l >= 4:
            L = l - 3
        w = np.asarray(masses, dtype=float)
        if w.shape != (l,) or np.any(w <= 0):
            raise DomainError("P2 needs one positive mass per basis member")
        lam, it = _simplex_lsq(P, d, w, max_iter)
        active = tuple(int(k) for k in np.flatnonzero(lam <= 0))
        kkt = _kkt_residual(P, d, w, lam)
        density = None
        if L is not None:
            try:
                density = SplineMix(L, lam)
            except DomainError:
                density = None  # masses do not belong to the standard basis
        basis = "spline"
    else:
        raise DomainError(f"problem must be 'P1' or 'P2', got {problem!r}")

    if kkt > KKT_TOL:
        warnings.warn(f"KKT residual {kkt:.3g} exceeds {KKT_TOL:g}", RuntimeWarning, stacklevel=2)
    fitted = P @ lam
    objective = float(np.sum((fitted - d) ** 2))
    return FitResult(
        coefficients=tuple(float(x) for x in lam),
        fitted_density=density,
        objective=objective,
        active_constraints=active,
        iterations=int(it),
        kkt_residual=kkt,
        basis=basis,
        L=L if basis == "spline" else None,
        fitted_prices=tuple(float(x) for x in fitted),
    )


def identify(
    samples: Sequence[EmpiricalDistribution],
    observed_prices: Sequence[float],
    basis_choice: str = "step",
    size: int = 10,
) -> FitResult:
    """Fit a distortion density to observed premia.

    ``size`` is the step count ``l`` for ``basis_choice="step"`` and the number
    of knot intervals ``L`` for ``basis_choice="spline"`` (``l = L + 3``).
    """
    samples = list(samples)
    if len(samples) == 0:
        raise ConfigurationError("need at least one contract")
    if len(observed_prices) != len(samples):
        raise DomainError(f"{len(samples)} samples but {len(observed_prices)} prices")
    if basis_choice == "step":
        design = build_step_design(samples, size)
    elif basis_choice == "spline":
        design = build_spline_design(samples, build_spline_basis(size))
    else:
        raise ConfigurationError(f"basis must be 'step' or 'spline', got {basis_choice!r}")
    return solve_qp(design, observed_prices)


# ---------------------------------------------------------------------------
# Simulation study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationResult:
    shapes: tuple
    samples: tuple
    prices: tuple
    fits: dict

    def summary(self) -> dict:
        return {
            "m": len(self.samples),
            "n": self.samples[0].n if self.samples else 0,
            "objectives": {name: fit.objective for name, fit in self.fits.items()},
            "price_norm_sq": float(np.sum(np.square(self.prices))),
        }


def simulate_study(
    m: int,
    n: int,
    distortion: DistortionSpec,
    bases: Sequence[tuple[str, int]],
    seed: int,
    shape_range: tuple[float, float] = (1.0, 5.0),
    scale: float = 1.0,
) -> SimulationResult:
    """Gamma-loss identification experiment.

    Contract ``j`` has shape drawn uniformly from ``shape_range`` (stream 0)
    and a sample of size ``n`` from substream ``j + 1``.  Prices are exact
    premia under ``distortion``; each ``(kind, size)`` in ``bases`` is fitted.
    """
    if m < 1:
        raise ConfigurationError("need at least one contract (m >= 1)")
    if n < 1:
        raise ConfigurationError("need a positive sample size")
    lo, hi = shape_range
    if not 0 < lo <= hi:
        raise ConfigurationError("shape range must satisfy 0 < lo <= hi")
    shapes = make_rng(seed, 0).uniform(lo, hi, m)
    samples = tuple(Gamma(float(k), scale).sample(n, seed, stream=j + 1) for j, k in enumerate(shapes))
    prices = tuple(distortion_premium(s, distortion).value for s in samples)
    fits = {f"{kind}:{size}": identify(samples, prices, kind, size) for kind, size in bases}
    return SimulationResult(tuple(float(k) for k in shapes), samples, prices, fits)
