"""Orbits of discrete dynamical systems and finite-horizon omega-limit estimates."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np


@dataclass(frozen=True)
class MapDescriptor:
    map_id: str
    fn: Callable[[Any], Any] = field(repr=False, compare=False)

    def __call__(self, x):
        return self.fn(x)


def logistic_map(mu: float) -> MapDescriptor:
    """f(x) = mu x (1 - x); mu in [0, 4] keeps [0, 1] invariant."""
    if not 0.0 <= mu <= 4.0:
        raise ValueError(f"logistic parameter must lie in [0, 4], got {mu}")
    mu = float(mu)
    return MapDescriptor(f"logistic(mu={mu!r})", lambda x: mu * x * (1.0 - x))


def constant_map(c) -> MapDescriptor:
    return MapDescriptor(f"constant({c!r})", lambda x: c)


def opinion_map(graph, bias) -> MapDescriptor:
    """The generalized-bias update as a map on opinion vectors."""
    from .dynamics import step

    return MapDescriptor(f"opinion-update(n={graph.n}, bias={bias!r})", lambda x: step(graph, bias, x))


_REGISTRY: dict[str, Callable[..., MapDescriptor]] = {
    "logistic": logistic_map,
    "constant": constant_map,
    "opinion": opinion_map,
}


def resolve_map(name: str, **params) -> MapDescriptor:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown map {name!r}; known maps: {sorted(_REGISTRY)}") from None
    return factory(**params)


@dataclass
class Orbit:
    points: list
    map_id: str

    def __len__(self):
        return len(self.points)


def iterate_orbit(f: MapDescriptor | str, x0, n: int) -> Orbit:
    """Return ``[x0, f(x0), ..., f^n(x0)]``."""
    if isinstance(f, str):
        f = resolve_map(f)
    if not isinstance(f, MapDescriptor):
        raise TypeError(f"expected a MapDescriptor, got {type(f).__name__}")
    if n < 0:
        raise ValueError("step count must be nonnegative")
    pts = [x0]
    x = x0
    for _ in range(n):
        x = f(x)
        pts.append(x)
    return Orbit(pts, f.map_id)


@dataclass
class OmegaLimitEstimate:
    accumulation_points: list
    support: list[int]
    cluster_tol: float
    burn_in: int


def _dist(a, b) -> float:
    return float(np.max(np.abs(np.subtract(a, b))))


def _cluster(points, tol: float):
    reps: list[np.ndarray] = []
    members: list[list] = []
    for p in points:
        p = np.asarray(p, dtype=float)
        best, best_d = None, tol
        for k, r in enumerate(reps):
            d = _dist(p, r)
            if d <= best_d:
                best, best_d = k, d
        if best is None:
            reps.append(p)
            members.append([p])
        else:
            members[best].append(p)
            reps[best] = np.mean(members[best], axis=0)
    return reps, members


def omega_limit_estimate(orbit: Orbit, burn_in: int | None = None, cluster_tol: float = 1e-3,
                         min_support: int = 1) -> OmegaLimitEstimate:
    """Cluster the orbit tail (sup-norm radius ``cluster_tol``) into representatives.

    Clusters with fewer than ``min_support`` tail points are dropped.
    """
    if burn_in is None:
        burn_in = len(orbit) // 2
    if burn_in >= len(orbit):
        raise ValueError(f"burn_in {burn_in} leaves no tail of an orbit of length {len(orbit)}")
    if not cluster_tol > 0:
        raise ValueError("cluster_tol must be positive")
    reps, members = _cluster(orbit.points[burn_in:], cluster_tol)
    keep = [k for k in range(len(reps)) if len(members[k]) >= min_support]
    scalar = np.ndim(orbit.points[0]) == 0
    pts = [float(reps[k]) if scalar else reps[k] for k in keep]
    return OmegaLimitEstimate(pts, [len(members[k]) for k in keep], cluster_tol, burn_in)


def parity_split(orbit: Orbit, burn_in: int | None = None, cluster_tol: float = 1e-3) -> dict:
    """Omega-limit estimates of the even- and odd-indexed tail subsequences."""
    if burn_in is None:
        burn_in = len(orbit) // 2
    out = {}
    for name, offset in (("even", 0), ("odd", 1)):
        idx = [t for t in range(burn_in, len(orbit)) if t % 2 == offset]
        sub = Orbit([orbit.points[t] for t in idx], orbit.map_id)
        out[name] = omega_limit_estimate(sub, 0, cluster_tol).accumulation_points
    return out


def write_orbit_csv(orbit: Orbit, path: str | Path) -> None:
    first = np.atleast_1d(np.asarray(orbit.points[0], dtype=float))
    cols = ["value"] if first.size == 1 else [f"value_{k}" for k in range(1, first.size + 1)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *cols])
        for t, p in enumerate(orbit.points):
            w.writerow([t, *(f"{v:.17g}" for v in np.atleast_1d(np.asarray(p, dtype=float)))])
