"""Monotone cubic spline basis on [0, 1].

Quadratic B-splines on the uniform knots ``k/L`` (boundary knots repeated
three times) are rescaled to probability densities and integrated once,
which gives ``L + 2`` nondecreasing piecewise-cubic distribution functions
``S_{-2}, ..., S_{L-1}``.  The constant ``S_L = 1`` completes the basis, so
the basis has ``L + 3`` members.

All polynomials are stored per knot interval in the local variable
``x = v - k/L``; integrals over arbitrary cells are evaluated in closed form
from the piecewise antiderivatives.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError

DEGREE = 2


def _knots(L: int) -> np.ndarray:
    inner = np.arange(L + 1) / L
    return np.concatenate([np.zeros(DEGREE), inner, np.ones(DEGREE)])


def _piece_coefficients(L: int) -> np.ndarray:
    """Local power coefficients of the unscaled B_{k,2} on every interval.

    Returns an array of shape ``(L + 2, L, 3)``: member, interval, power.
    Terms with a zero-width denominator are dropped (the 0/0 := 0 rule).
    """
    t = _knots(L)
    nb0 = t.size - 1
    out = np.zeros((L + DEGREE, L, DEGREE + 1))
    for i in range(L):
        left = i / L
        # degree 0: only the basis function sitting on [t_{i}, t_{i+1}) is on
        basis = [np.zeros(1) for _ in range(nb0)]
        basis[i + DEGREE] = np.ones(1)
        for b in range(1, DEGREE + 1):
            nxt = []
            for j in range(nb0 - b):
                term = np.zeros(1)
                den = t[j + b] - t[j]
                if den > 0:
                    # (v - t_j) / den with v = left + x
                    term = P.polyadd(term, P.polymul([(left - t[j]) / den, 1.0 / den], basis[j]))
                den = t[j + b + 1] - t[j + 1]
                if den > 0:
                    term = P.polyadd(term, P.polymul([(t[j + b + 1] - left) / den, -1.0 / den], basis[j + 1]))
                nxt.append(term)
            basis = nxt
        for k in range(L + DEGREE):
            c = basis[k]
            out[k, i, : c.size] = c
    return out


class SplineBasis:
    """Basis ``S_{-2}, ..., S_{L-1}, S_L`` of monotone cubic splines.

    Members are addressed by their label ``k`` in ``-2 .. L``; column ``k + 2``
    of design matrices belongs to label ``k``.
    """

    def __init__(self, L: int):
        if int(L) != L or L < 1:
            raise DomainError(f"number of knot intervals must be a positive integer, got {L}")
        self.L = int(L)
        t = _knots(self.L)
        raw = _piece_coefficients(self.L)
        # unscaled mass of B_{k,2} is (t_{k+3} - t_k) / 3
        masses = (t[DEGREE + 1 :] - t[: -(DEGREE + 1)]) / (DEGREE + 1)
        self._density = raw / masses[:, None, None]
        h = 1.0 / self.L
        nm, L_ = self._density.shape[:2]
        self._cdf = np.zeros((nm, L_, DEGREE + 2))
        self._cdf_int = np.zeros((nm, L_, DEGREE + 3))
        for k in range(nm):
            s0 = g0 = 0.0
            for i in range(L_):
                cs = P.polyint(self._density[k, i], k=[s0])
                cg = P.polyint(cs, k=[g0])
                self._cdf[k, i] = cs
                self._cdf_int[k, i] = cg
                s0 = P.polyval(h, cs)
                g0 = P.polyval(h, cg)

    @property
    def size(self) -> int:
        """Number of members ``l = L + 3``."""
        return self.L + 3

    @property
    def labels(self) -> range:
        return range(-2, self.L + 1)

    def _locate(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise DomainError("spline arguments must lie in [0, 1]")
        v = np.clip(v, 0.0, 1.0)
        idx = np.minimum(np.floor(v * self.L).astype(int), self.L - 1)
        return v, idx, v - idx / self.L

    def _eval(self, table, k, v):
        if not -2 <= k <= self.L - 1:
            raise DomainError(f"member label {k} outside -2..{self.L - 1}")
        v, idx, x = self._locate(v)
        coef = table[k + 2][idx]
        out = np.zeros_like(x)
        for pw in range(coef.shape[-1] - 1, -1, -1):
            out = out * x + coef[..., pw]
        return out

    def bspline(self, k: int, v):
        """Quadratic B-spline ``B_{k,2}`` scaled to unit mass."""
        return self._eval(self._density, k, v)

    def member(self, k: int, v):
        """``S_k(v)``; ``S_L`` is the constant 1."""
        if k == self.L:
            return np.ones_like(np.asarray(v, dtype=float))
        return self._eval(self._cdf, k, v)

    def member_integral(self, k: int, u):
        """``∫_0^u S_k(w) dw``."""
        if k == self.L:
            v, _, _ = self._locate(u)
            return v
        return self._eval(self._cdf_int, k, u)

    def masses(self) -> np.ndarray:
        """``a_k = ∫_0^1 S_k`` for all labels."""
        return np.array([float(self.member_integral(k, 1.0)) for k in self.labels])

    def cell_integrals(self, n: int) -> np.ndarray:
        """Matrix ``A[i, k+2] = ∫_{(i-1)/n}^{i/n} S_k`` of shape ``(n, L+3)``."""
        edges = np.arange(n + 1) / n
        cols = [np.diff(self.member_integral(k, edges)) for k in self.labels]
        return np.column_stack(cols)

    def support(self, k: int) -> tuple[float, float]:
        """Level interval on which ``S_k`` increases."""
        if k == self.L:
            return (0.0, 0.0)
        t = _knots(self.L)
        return (float(t[k + 2]), float(t[k + 5]))

    def __repr__(self) -> str:
        return f"SplineBasis(L={self.L})"
