"""Synchronous generalized-bias opinion updates and trajectory simulation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bias import BiasFactor, DisagreementBias, saturated_agents
from .graph import InfluenceGraph, is_strongly_connected, isolated_agents, normalized_influence

DEFAULT_TOL = 1e-8
DEFAULT_HORIZON = 100_000


def as_opinion_state(x: Sequence[float], n: int | None = None) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    if n is not None and len(arr) != n:
        raise ValueError(f"opinion state has {len(arr)} entries, expected {n}")
    if np.any(~np.isfinite(arr)) or np.any((arr < 0.0) | (arr > 1.0)):
        raise ValueError("opinions must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class OpinionModel:
    graph: InfluenceGraph
    initial: tuple[float, ...]
    bias: BiasFactor

    def __post_init__(self):
        x0 = as_opinion_state(self.initial, self.graph.n)
        object.__setattr__(self, "initial", tuple(float(v) for v in x0))


@dataclass
class SimulationTrace:
    states: np.ndarray
    etas: np.ndarray
    converged_at: int | None = None
    consensus_value: float | None = None
    # (step, agents) pairs where some agent gave every neighbor alpha = 1
    saturated: list[tuple[int, list[int]]] = field(default_factory=list)
    hypotheses: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_dict(self) -> dict:
        return {
            "converged_at": self.converged_at,
            "consensus_value": self.consensus_value,
            "final_eta": float(self.etas[-1]),
            "steps": len(self.states) - 1,
            "hypotheses": self.hypotheses,
            "saturated_steps": len(self.saturated),
            "first_saturated": (
                {"t": self.saturated[0][0], "agents": self.saturated[0][1]} if self.saturated else None
            ),
            "states": self.states.tolist(),
            "etas": self.etas.tolist(),
        }


def _check_dims(g: InfluenceGraph, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise ValueError(f"state of shape {x.shape} does not match a {g.n}-agent graph")
    return x


def build_update_matrix(g: InfluenceGraph, bias: BiasFactor, x) -> np.ndarray:
    x = _check_dims(g, x)
    et = g.edge_table
    a = np.zeros((g.n, g.n))
    if len(et.target):
        a[et.target, et.source] = et.wbar * bias.edge_values(x, et.target, et.source)
    off = a.sum(axis=1)
    a[np.diag_indices(g.n)] = 1.0 - off
    return a


def step(g: InfluenceGraph, bias: BiasFactor, x, mode: str = "sum") -> np.ndarray:
    x = _check_dims(g, x)
    if mode == "matrix":
        return build_update_matrix(g, bias, x) @ x
    if mode != "sum":
        raise ValueError(f"unknown step mode {mode!r}")
    et = g.edge_table
    if len(et.target) == 0:
        return x.copy()
    pull = et.wbar * bias.edge_values(x, et.target, et.source) * (x[et.source] - x[et.target])
    return x + np.bincount(et.target, weights=pull, minlength=g.n)


def disagreement_update(g: InfluenceGraph, beta: DisagreementBias, x) -> np.ndarray:
    """One step of x_i + sum_j Ibar[j,i] beta(x_j - x_i), evaluated edge by edge."""
    x = _check_dims(g, x)
    out = x.copy()
    for (j, i), w in normalized_influence(g).entries.items():
        if i != j:
            out[i - 1] += w * float(beta(x[j - 1] - x[i - 1]))
    return out


def disagreement_norm(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - x.mean()))


def _spread(x: np.ndarray) -> float:
    return float(np.max(np.abs(x - x.mean())))


def consensus_hypotheses(g: InfluenceGraph) -> dict:
    """Graph-side conditions for guaranteed consensus, with what fails."""
    sc = is_strongly_connected(g)
    lonely = isolated_agents(g)
    notes = []
    if not sc:
        notes.append("influence graph is not strongly connected")
    if lonely:
        notes.append(f"agents {lonely} have no in-neighbors and keep their opinion")
    return {"strongly_connected": sc, "isolated_agents": lonely, "failures": notes}


def simulate(model: OpinionModel, horizon: int = DEFAULT_HORIZON, tol: float = DEFAULT_TOL,
             monitor: bool = True) -> SimulationTrace:
    """Iterate the update until the max deviation from the mean drops below ``tol``.

    Reaching the horizon without consensus is a normal outcome, reported by
    ``converged_at is None``.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    g, bias = model.graph, model.bias
    x = np.array(model.initial, dtype=float)
    states = [x]
    saturated = []
    converged_at = None
    for t in range(horizon + 1):
        if _spread(x) < tol:
            converged_at = t
            break
        if monitor:
            sat = saturated_agents(g, bias, x)
            if sat:
                saturated.append((t, sat))
        if t == horizon:
            break
        x = step(g, bias, x)
        states.append(x)
    arr = np.array(states)
    etas = np.linalg.norm(arr - arr.mean(axis=1, keepdims=True), axis=1)
    return SimulationTrace(
        states=arr,
        etas=etas,
        converged_at=converged_at,
        consensus_value=float(x.mean()) if converged_at is not None else None,
        saturated=saturated,
        hypotheses=consensus_hypotheses(g),
    )


def detect_consensus(trace: SimulationTrace, tol: float = DEFAULT_TOL) -> float | None:
    if len(trace.states) == 0:
        raise ValueError("empty trace")
    x = trace.states[-1]
    return float(x.mean()) if _spread(x) < tol else None


def contraction_ratios(trace: SimulationTrace) -> np.ndarray:
    """Empirical eta[k+1] / eta[k] while eta[k] > 0."""
    e = trace.etas
    with np.errstate(divide="ignore", invalid="ignore"):
        r = e[1:] / e[:-1]
    return r[e[:-1] > 0]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_trace_csv(trace: SimulationTrace, path: str | Path) -> None:
    n = trace.states.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *(f"x_{i}" for i in range(1, n + 1)), "eta"])
        for t, (x, eta) in enumerate(zip(trace.states, trace.etas)):
            w.writerow([t, *(_fmt(v) for v in x), _fmt(eta)])


def read_trace_csv(path: str | Path) -> np.ndarray:
    """States of a trace CSV as a ``(T, n)`` array (the eta column is dropped)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "t" or header[-1] != "eta":
        raise ValueError(f"{path}: not a trace file")
    return np.array([[float(v) for v in r[1:-1]] for r in body]).reshape(len(body), len(header) - 2)


def write_trace_json(trace: SimulationTrace, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(trace.to_dict(), fh, indent=1)
        fh.write("\n")
