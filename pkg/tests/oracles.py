"""Independent reference computations. None of these call into the code they check."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def reachability_closure(n: int, pairs) -> np.ndarray:
    """reach[a, b] is True iff b is reachable from a (0-based), by BFS from every vertex."""
    succ = [[] for _ in range(n)]
    for a, b in pairs:
        succ[a].append(b)
    reach = np.zeros((n, n), dtype=bool)
    for s in range(n):
        seen = {s}
        todo = [s]
        while todo:
            v = todo.pop()
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        reach[s, list(seen)] = True
    return reach


def brute_strongly_connected(n: int, pairs) -> bool:
    return bool(reachability_closure(n, pairs).all())


def brute_primitive(m: np.ndarray) -> tuple[bool, int | None]:
    """Scan M^k > 0 for k up to the Wielandt bound (n-1)^2 + 1."""
    n = m.shape[0]
    s = (m > 0).astype(np.int64)
    p = s.copy()
    for k in range(1, (n - 1) ** 2 + 2):
        if p.all():
            return True, k
        p = np.minimum(p @ s, 1)
    return False, None


def charpoly_faddeev_leverrier(m: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (highest degree first) from matrix products only."""
    n = m.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(m)
    c = 1.0
    for k in range(1, n + 1):
        mk = m @ mk + c * np.eye(n)
        c = -np.trace(m @ mk) / k
        coeffs.append(c)
    return np.array(coeffs)


def second_modulus_by_charpoly(m: np.ndarray) -> float:
    roots = np.roots(charpoly_faddeev_leverrier(m))
    # drop the root closest to 1 (the dominant one of a stochastic matrix)
    k = int(np.argmin(np.abs(roots - 1.0)))
    rest = np.delete(roots, k)
    return float(np.max(np.abs(rest))) if len(rest) else 0.0


def direct_disagreement_trajectory(n, weighted_edges, beta, x0, steps):
    """x_i <- x_i + sum_j Ibar[j,i] beta(x_j - x_i) in plain Python loops."""
    totals = [0.0] * (n + 1)
    for s, d, w in weighted_edges:
        totals[d] += w
    x = [float(v) for v in x0]
    out = [list(x)]
    for _ in range(steps):
        new = list(x)
        for s, d, w in weighted_edges:
            if s != d:
                new[d - 1] += (w / totals[d]) * float(beta(x[s - 1] - x[d - 1]))
        x = new
        out.append(list(x))
    return np.array(out)


def exact_disagreement_norm_squared(values) -> Fraction:
    xs = [Fraction(str(v)) for v in values]
    mean = sum(xs) / len(xs)
    return sum((v - mean) ** 2 for v in xs)


def example1_reference(x0, steps, transposed=False):
    """Scalar re-implementation of Example 1 (intergroup bias, cuts 0.45 and 0.55)."""
    def grp(v):
        return 0 if v < 0.45 else (1 if v <= 0.55 else 2)

    def a(x, y):
        phi = lambda v: 1 - 5 * (v - 0.45)
        psi = lambda v: 0.5 + 5 * (v - 0.45)
        gx, gy = grp(x), grp(y)
        if gx == 0:
            return [1.0, phi(y), 0.5][gy]
        if gx == 1:
            return [phi(x), 100 * x * y - 50 * x - 50 * y + 25.75, psi(x)][gy]
        return [0.5, psi(y), 1.0][gy]

    drawn = [(1, 2, .6), (2, 1, .6), (2, 4, .4), (4, 6, .4), (1, 3, .4), (3, 5, .6), (5, 6, .6),
             (3, 4, .2), (4, 3, .2), (6, 1, 1.0)]
    edges = [(d, s, w) if transposed else (s, d, w) for s, d, w in drawn]
    w = np.zeros((6, 6))
    for s, d, v in edges:
        w[d - 1, s - 1] = v
    wn = w / w.sum(axis=1, keepdims=True)
    x = np.array(x0, dtype=float)
    states = [x]
    for _ in range(steps):
        new = x.copy()
        for i in range(6):
            for j in range(6):
                if w[i, j] > 0:
                    new[i] += wn[i, j] * a(x[i], x[j]) * (x[j] - x[i])
        x = new
        states.append(x)
    return np.array(states)
