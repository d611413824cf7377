"""Independent reference computations used by several test modules."""

import numpy as np


def qp_reduced_matrix(P, problem, masses=None):
    """Map grid coordinates y (y >= 0, Σ y = 1) to the residual ``C y - d``.

    For P1 the coefficients are λ = cumsum(μ) with ``y_k = μ_k (l - k + 1)/l``;
    for P2 ``y_k = λ_k a_k``.  Returns ``(C, to_lambda)``.
    """
    P = np.asarray(P, float)
    l = P.shape[1]
    if problem == "P1":
        w = (l - np.arange(l)) / l
        M = np.tril(np.ones((l, l)))
        C = P @ M / w
        return C, lambda y: M @ (y / w)
    w = np.asarray(masses, float)
    return P / w, lambda y: y / w


def brute_force_qp(P, d, problem, masses=None, pitch=1e-3):
    """Minimum of ``||P λ - d||²`` over the feasible set on a grid of the simplex.

    All but the last two simplex coordinates run over the grid.  On the
    remaining segment the objective is a convex parabola, so its grid
    minimum sits at the floor or ceiling of the continuous minimiser.
    Returns ``(objective, lambda)``.
    """
    C, to_lambda = qp_reduced_matrix(P, problem, masses)
    d = np.asarray(d, float)
    l = C.shape[1]
    N = int(round(1 / pitch))
    if l == 1:
        y = np.ones(1)
        return float(np.sum((C @ y - d) ** 2)), to_lambda(y)
    free = l - 2
    if free == 0:
        fixed = np.zeros((1, 0), dtype=np.int64)
    else:
        axes = np.meshgrid(*[np.arange(N + 1)] * free, indexing="ij")
        fixed = np.stack([a.ravel() for a in axes], axis=1)
        fixed = fixed[fixed.sum(axis=1) <= N]
    R = N - fixed.sum(axis=1)
    # residual at t = 0 (all remaining mass on the last coordinate)
    base = fixed @ C[:, :free].T / N + np.outer(R / N, C[:, -1]) - d
    u = C[:, -2] - C[:, -1]
    uu = float(u @ u)
    t_star = -(base @ u) / uu * N if uu > 0 else np.zeros(len(R))
    best_val = np.full(len(R), np.inf)
    best_t = np.zeros(len(R), dtype=np.int64)
    for t in (np.floor(t_star), np.ceil(t_star), np.zeros(len(R)), R.astype(float)):
        ti = np.clip(t, 0, R).astype(np.int64)
        r = base + np.outer(ti / N, u)
        val = np.einsum("ij,ij->i", r, r)
        better = val < best_val
        best_val[better] = val[better]
        best_t[better] = ti[better]
    i = int(np.argmin(best_val))
    y = np.concatenate([fixed[i], [best_t[i], R[i] - best_t[i]]]) / N
    return float(best_val[i]), to_lambda(y)


def random_qp_instance(rng, l, m, problem):
    P = rng.uniform(0.0, 2.0, (m, l))
    d = rng.uniform(0.5, 2.0, m)
    masses = rng.uniform(0.2, 1.0, l) if problem == "P2" else None
    return P, d, masses


def random_ball_element(F, eps, r, rng, extra_breaks=8):
    """A step distribution within order-``r`` distance ``eps`` of ``F``.

    A random nondecreasing step shift (negative at low levels, positive at
    high ones) is added to the quantiles of ``F``; the result is pulled back
    toward ``F`` until it lies on the ball boundary when it started outside.
    """
    from distortion_premium import DiscreteDistribution

    breaks = np.union1d(F.breaks, rng.uniform(0, 1, extra_breaks))
    widths = np.diff(breaks)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    base = np.asarray(F.quantile(mids), float)
    inc = rng.exponential(size=mids.size) * (rng.uniform(size=mids.size) < 0.4)
    shift = np.cumsum(inc) - rng.uniform(0, 1) * inc.sum()
    vals = np.maximum.accumulate(base + shift)
    delta = vals - base
    norm = float(np.dot(widths, np.abs(delta) ** r) ** (1.0 / r))
    if norm > eps:
        # convex combinations of quantile functions are quantile functions
        vals = np.maximum.accumulate(base + delta * (eps / norm))
    return DiscreteDistribution(vals, breaks)
