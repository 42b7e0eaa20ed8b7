"""Matrix checks behind the consensus argument.

Primitivity is decided structurally (irreducible and aperiodic, the period
being the gcd of cycle lengths found by BFS levels) and then witnessed by
the smallest power whose support is full.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .graph import strongly_connected_components


def _square(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def is_row_stochastic(m, tol: float = 1e-12) -> tuple[bool, float]:
    """Return ``(ok, deviation)`` with deviation the largest row-sum error."""
    m = _square(m)
    dev = float(np.max(np.abs(m.sum(axis=1) - 1.0))) if m.size else 0.0
    return bool(np.all(m >= -tol) and dev <= tol), dev


def _successors(support: np.ndarray) -> list[list[int]]:
    return [list(np.flatnonzero(row)) for row in support]


def is_irreducible(m) -> bool:
    m = _square(m)
    n = m.shape[0]
    return len(strongly_connected_components(n, _successors(m != 0))) == 1


def period(m) -> int:
    """Period of an irreducible nonnegative matrix (gcd of its cycle lengths)."""
    m = _square(m)
    succ = _successors(m != 0)
    level = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for w in succ[v]:
                if w not in level:
                    level[w] = level[v] + 1
                    nxt.append(w)
        frontier = nxt
    g = 0
    for v, lv in level.items():
        for w in succ[v]:
            if w in level:
                g = math.gcd(g, lv + 1 - level[w])
    return g


@dataclass
class PrimitivityCheck:
    primitive: bool
    witness_power: int | None
    positive_at_n: bool
    period: int | None

    def __bool__(self):
        return self.primitive


def is_primitive(m) -> PrimitivityCheck:
    m = _square(m)
    if np.any(m < 0):
        raise ValueError("primitivity is defined for nonnegative matrices")
    n = m.shape[0]
    support = (m > 0).astype(np.int64)
    if not is_irreducible(m):
        return PrimitivityCheck(False, None, False, None)
    p = period(m)
    # boolean powers; primitive matrices become positive by (n-1)^2 + 1
    bound = (n - 1) ** 2 + 1 if p == 1 else n
    power = support.copy()
    witness = None
    positive_at_n = False
    for k in range(1, bound + 1):
        if witness is None and power.all():
            witness = k
        if k == n:
            positive_at_n = bool(power.all())
        if witness is not None and k >= n:
            break
        power = np.minimum(power @ support, 1)
    return PrimitivityCheck(p == 1, witness, positive_at_n, p)


def left_perron_vector(m) -> np.ndarray:
    """Solve pi^T M = pi^T with sum(pi) = 1 in the least-squares sense."""
    m = _square(m)
    n = m.shape[0]
    lhs = np.vstack([m.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return pi


@dataclass
class EigenEstimate:
    value: float
    residual: float
    iterations: int
    converged: bool
    warning: str | None = None


def _seed_block(n: int, p: int) -> np.ndarray:
    idx = np.arange(1, n + 1, dtype=float)
    return np.stack([1.0 + idx ** (k + 1) / n ** (k + 1) for k in range(p)], axis=1)


def second_eigenvalue_modulus(m, iters: int = 10_000, tol: float = 1e-10, block: int = 4) -> EigenEstimate:
    """Estimate the largest modulus among the non-dominant eigenvalues.

    Orthogonal (block power) iteration runs on ``M - 1 pi^T``, which removes
    the eigenvalue 1 carried by the consensus direction; ``pi`` is the left
    Perron vector. Ritz values of the block capture complex pairs.
    """
    m = _square(m)
    n = m.shape[0]
    if n == 1:
        return EigenEstimate(0.0, 0.0, 0, True, "1x1 matrix has no second eigenvalue")
    pi = left_perron_vector(m)
    defl = m - np.outer(np.ones(n), pi)
    p = min(block, n - 1) if n > 1 else 1
    q, _ = np.linalg.qr(defl @ _seed_block(n, p))
    prev = np.inf
    est, resid = 0.0, np.inf
    converged = False
    k = 0
    for k in range(1, iters + 1):
        z = defl @ q
        if np.linalg.norm(z) < 1e-300:
            est, resid, converged = 0.0, 0.0, True
            break
        h = q.T @ z
        theta, vecs = np.linalg.eig(h)
        top = int(np.argmax(np.abs(theta)))
        est = float(np.abs(theta[top]))
        v = q @ vecs[:, top]
        resid = float(np.linalg.norm(defl @ v - theta[top] * v) / max(np.linalg.norm(v), 1e-300))
        if abs(est - prev) <= tol and resid <= max(tol ** 0.5, 1e-6):
            converged = True
            break
        prev = est
        q, _ = np.linalg.qr(z)
    note = None
    if est >= 1.0 - 1e-9:
        note = "modulus-one eigenvalue besides the dominant one: matrix is not primitive, no contraction"
    if not converged:
        note = (note + "; " if note else "") + f"no convergence within {iters} iterations"
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    elif note:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    return EigenEstimate(est, resid, k, converged, note)


def spectral_radius(m, iters: int = 10_000, tol: float = 1e-12) -> float:
    """Collatz-Wielandt bounds iterated under ``I + M`` for a nonnegative matrix."""
    m = _square(m)
    n = m.shape[0]
    if np.any(m < 0):
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    v = np.ones(n)
    lo, hi = 0.0, np.inf
    shifted = m + np.eye(n)
    for _ in range(iters):
        mv = m @ v
        pos = v > 0
        r = mv[pos] / v[pos]
        lo, hi = float(r.min()), float(r.max())
        if hi - lo <= tol:
            break
        v = shifted @ v
        v = v / v.max()
    return 0.5 * (lo + hi)


@dataclass
class MatrixReport:
    n: int
    row_stochastic: bool
    row_sum_deviation: float
    irreducible: bool
    primitive: bool
    witness_power: int | None
    positive_at_n: bool
    period: int | None
    rho: float
    lambda2_mod: float
    lambda2_residual: float
    lambda2_converged: bool
    dominant_simple: bool
    warnings: list

    def to_dict(self) -> dict:
        return asdict(self)


def analyze_matrix(m, tol: float = 1e-12) -> MatrixReport:
    m = _square(m)
    ok, dev = is_row_stochastic(m, tol)
    irr = is_irreducible(m)
    prim = is_primitive(m) if np.all(m >= 0) else PrimitivityCheck(False, None, False, None)
    rho = spectral_radius(m)
    notes = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lam = second_eigenvalue_modulus(m)
    if lam.warning:
        notes.append(lam.warning)
    return MatrixReport(
        n=m.shape[0],
        row_stochastic=ok,
        row_sum_deviation=dev,
        irreducible=irr,
        primitive=prim.primitive,
        witness_power=prim.witness_power,
        positive_at_n=prim.positive_at_n,
        period=prim.period,
        rho=rho,
        lambda2_mod=lam.value,
        lambda2_residual=lam.residual,
        lambda2_converged=lam.converged,
        dominant_simple=bool(lam.value < rho - 1e-9),
        warnings=notes,
    )
