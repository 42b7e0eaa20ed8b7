"""Bias factors: state-dependent weights on neighbor disagreement.

Every factor evaluates ``alpha[i, j](x)`` for the ordered agent pair
``(i, j)`` where ``j`` is an in-neighbor of ``i``. Evaluation is
vectorized over edges through :meth:`BiasFactor.edge_values`, which takes
0-based index arrays; :func:`eval_bias` is the scalar, 1-based entry point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .graph import InfluenceGraph, isolated_agents


class BiasError(ValueError):
    """Raised for invalid bias specifications or evaluation requests."""


class BiasFactor:
    """Base class of the factor catalogue."""

    #: True if the factor is deliberately discontinuous where x_i == x_j.
    tie_discontinuous = False

    def edge_values(self, x: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(BiasFactor):
    c: float

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise BiasError(f"constant factor must lie in (0, 1], got {self.c}")

    def edge_values(self, x, i, j):
        return np.full(len(i), float(self.c))


@dataclass(frozen=True)
class Degroot(Constant):
    """Classic DeGroot averaging, alpha identically 1."""

    c: float = field(default=1.0, init=False)


# -- disagreement biases ------------------------------------------------------

_BETA_KINDS = ("linear", "saturating", "tanh", "sine")


@dataclass(frozen=True)
class DisagreementBias:
    """A scalar response ``beta(d)`` to the opinion difference ``d = x_j - x_i``.

    Catalogue:

    ``linear``      beta(d) = c d,                 0 < c < 1
    ``saturating``  beta(d) = c d (1 - |d|/2),     0 < c <= 1
    ``tanh``        beta(d) = c tanh(k d) / k,     0 < c <= 1, k > 0
    ``sine``        beta(d) = (2c/pi) sin(pi d/2), 0 < c <= 1
    """

    kind: str
    c: float = 0.5
    k: float = 1.0

    def __post_init__(self):
        if self.kind not in _BETA_KINDS:
            raise BiasError(f"unknown disagreement bias {self.kind!r}; expected one of {_BETA_KINDS}")
        upper_open = self.kind == "linear"
        if not (0.0 < self.c < 1.0 if upper_open else 0.0 < self.c <= 1.0):
            raise BiasError(f"parameter c={self.c} out of range for {self.kind!r}")
        if self.kind == "tanh" and not self.k > 0:
            raise BiasError(f"tanh scale k must be positive, got {self.k}")

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        if self.kind == "linear":
            return self.c * d
        if self.kind == "saturating":
            return self.c * d * (1.0 - np.abs(d) / 2.0)
        if self.kind == "tanh":
            return self.c * np.tanh(self.k * d) / self.k
        return (2.0 * self.c / np.pi) * np.sin(np.pi * d / 2.0)


def in_region_r(beta, probes: int = 2001) -> bool:
    """Probe ``beta`` on a grid of [-1, 1] for membership in region R.

    R requires beta(0) == 0 and, for d != 0, beta(d) d > 0 and |beta(d)| < |d|.
    """
    d = np.linspace(-1.0, 1.0, probes)
    d = d[d != 0.0]
    y = np.asarray(beta(d), dtype=float)
    return bool(float(beta(0.0)) == 0.0 and np.all(y * d > 0) and np.all(np.abs(y) < np.abs(d)))


@dataclass(frozen=True)
class Disagreement(BiasFactor):
    """Factor embedding a disagreement bias: beta(d)/d, and 0 on ties."""

    beta: DisagreementBias
    tie_discontinuous = True

    def edge_values(self, x, i, j):
        d = x[j] - x[i]
        out = np.zeros(len(d))
        nz = d != 0.0
        out[nz] = self.beta(d[nz]) / d[nz]
        return out


def from_disagreement(beta: DisagreementBias) -> Disagreement:
    if not in_region_r(beta):
        raise BiasError(f"{beta!r} leaves region R")
    return Disagreement(beta)


# -- intergroup bias ----------------------------------------------------------

@dataclass(frozen=True)
class GroupPartition:
    """Three opinion groups ``[0, c1)``, ``[c1, c2]``, ``(c2, 1]``.

    The linear pieces phi and psi interpolate between 1 and 0.5 across the
    middle group, and kappa interpolates between phi and psi in its first
    argument, so the assessment is continuous across both cut points.
    """

    c1: float = 0.45
    c2: float = 0.55

    def __post_init__(self):
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise BiasError(f"cut points must satisfy 0 < c1 < c2 < 1, got {self.c1}, {self.c2}")

    def group(self, v):
        """0, 1 or 2 for progressive, moderate, conservative."""
        v = np.asarray(v, dtype=float)
        return (v >= self.c1).astype(int) + (v > self.c2)

    def _frac(self, v):
        return (np.asarray(v, dtype=float) - self.c1) / (self.c2 - self.c1)

    def phi(self, y):
        return 1.0 - 0.5 * self._frac(y)

    def psi(self, x):
        return 0.5 + 0.5 * self._frac(x)

    def kappa(self, x, y):
        s = self._frac(x)
        return (1.0 - s) * self.phi(y) + s * self.psi(y)

    def assess(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        sx, sy = self._frac(x), self._frac(y)
        one = np.ones(x.shape)
        half = 0.5 * one
        phi_y, psi_y = 1.0 - 0.5 * sy, 0.5 + 0.5 * sy
        # rows: group of x, columns: group of y
        table = np.stack([one, phi_y, half,
                          1.0 - 0.5 * sx, (1.0 - sx) * phi_y + sx * psi_y, 0.5 + 0.5 * sx,
                          half, psi_y, one])
        pick = 3 * self.group(x) + self.group(y)
        return np.take_along_axis(table, pick[None], axis=0)[0]


DEFAULT_PARTITION = GroupPartition()


def intergroup_assessment(xi: float, xj: float, partition: GroupPartition = DEFAULT_PARTITION) -> float:
    """Weight agent ``i`` (opinion ``xi``) gives to an opinion ``xj``."""
    return float(partition.assess(xi, xj))


@dataclass(frozen=True)
class Intergroup(BiasFactor):
    partition: GroupPartition = DEFAULT_PARTITION

    def edge_values(self, x, i, j):
        return self.partition.assess(x[i], x[j])


# -- the inexpressibility counterexample --------------------------------------

def counterexample_alpha(x1, x2):
    """2 (x1 - x1^2 + 0.25) (1 - 0.9 |x1 - x2|)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return 2.0 * (x1 - x1 * x1 + 0.25) * (1.0 - 0.9 * np.abs(x1 - x2))


@dataclass(frozen=True)
class Counterexample(BiasFactor):
    """A factor depending on the lower-indexed agent's own opinion.

    On a pair (i, j) it evaluates ``counterexample_alpha(x_a, x_b)`` with
    ``a = min(i, j)`` and ``b = max(i, j)``, so both directions of a
    two-agent graph share ``alpha(x_1, x_2)``.
    """

    def edge_values(self, x, i, j):
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        return counterexample_alpha(x[lo], x[hi])


# -- combinators --------------------------------------------------------------

@dataclass(frozen=True)
class Product(BiasFactor):
    factors: tuple[BiasFactor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise BiasError("product of zero factors")

    @property
    def tie_discontinuous(self):
        return any(f.tie_discontinuous for f in self.factors)

    def edge_values(self, x, i, j):
        out = np.ones(len(i))
        for f in self.factors:
            out = out * f.edge_values(x, i, j)
        return out


@dataclass(frozen=True)
class Overridden(BiasFactor):
    """A base factor with replacements on chosen ``(i, j)`` pairs (1-based)."""

    base: BiasFactor
    overrides: Mapping[tuple[int, int], BiasFactor]

    def __post_init__(self):
        for (i, j) in self.overrides:
            if i == j:
                raise BiasError(f"override on self pair ({i}, {j})")
        object.__setattr__(self, "overrides", MappingProxyType(dict(sorted(self.overrides.items()))))

    @property
    def tie_discontinuous(self):
        return self.base.tie_discontinuous or any(f.tie_discontinuous for f in self.overrides.values())

    def edge_values(self, x, i, j):
        out = np.array(self.base.edge_values(x, i, j), dtype=float)
        for (oi, oj), f in self.overrides.items():
            mask = (i == oi - 1) & (j == oj - 1)
            if mask.any():
                out[mask] = f.edge_values(x, i[mask], j[mask])
        return out


def eval_bias(spec: BiasFactor, x: Sequence[float], i: int, j: int) -> float:
    x = np.asarray(x, dtype=float)
    n = len(x)
    for a in (i, j):
        if not 1 <= a <= n:
            raise BiasError(f"agent index {a} out of range 1..{n}")
    if i == j:
        raise BiasError("bias factors are defined only on neighbor pairs (i != j)")
    if np.any((x < 0.0) | (x > 1.0)):
        raise BiasError("opinions must lie in [0, 1]")
    return float(spec.edge_values(x, np.array([i - 1]), np.array([j - 1]))[0])


def saturated_agents(g: InfluenceGraph, spec: BiasFactor, x: np.ndarray) -> list[int]:
    """Agents with in-neighbors whose every factor equals 1 at ``x``.

    These are the agents for which the "some alpha < 1" requirement fails.
    """
    et = g.edge_table
    if len(et.target) == 0:
        return []
    vals = spec.edge_values(np.asarray(x, dtype=float), et.target, et.source)
    lowest = np.full(g.n, np.inf)
    np.minimum.at(lowest, et.target, vals)
    return [int(a) + 1 for a in np.flatnonzero(np.isfinite(lowest) & (lowest >= 1.0))]


# -- sampling-based validation of the three factor conditions ----------------

@dataclass(frozen=True)
class SamplingPlan:
    """Which states to probe. Grid states are used only while ``levels**n`` is small."""

    random_states: int = 200
    grid_levels: int = 0
    states: tuple = ()
    epsilon: float = 1e-6
    lipschitz: float = 25.0
    seed: int = 0
    max_grid_states: int = 20_000

    def draw(self, n: int) -> np.ndarray:
        chunks = []
        if self.states:
            s = np.atleast_2d(np.asarray(self.states, dtype=float))
            if s.shape[1] != n:
                raise BiasError(f"probe states have dimension {s.shape[1]}, graph has {n} agents")
            chunks.append(s)
        if self.grid_levels > 1 and self.grid_levels ** n <= self.max_grid_states:
            axes = [np.linspace(0.0, 1.0, self.grid_levels)] * n
            chunks.append(np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n))
        if self.random_states > 0:
            rng = np.random.default_rng(self.seed)
            chunks.append(rng.random((self.random_states, n)))
        if not chunks:
            raise BiasError("empty sampling plan")
        return np.concatenate(chunks)


@dataclass
class ConditionVerdict:
    name: str
    passed: bool
    checked: int
    detail: str = ""
    witness: dict | None = None


@dataclass
class ValidationReport:
    continuity: ConditionVerdict
    positivity: ConditionVerdict
    below_one: ConditionVerdict
    n_states: int
    note: str = ("sampling-based: a failure exhibits a concrete witness, "
                 "a pass only means no witness was found among the probes")

    @property
    def passed(self) -> bool:
        return self.continuity.passed and self.positivity.passed and self.below_one.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_states": self.n_states,
            "note": self.note,
            "conditions": [vars(v) for v in (self.continuity, self.positivity, self.below_one)],
        }


def validate_bias_conditions(g: InfluenceGraph, spec: BiasFactor, probes: SamplingPlan) -> ValidationReport:
    states = probes.draw(g.n)
    et = g.edge_table
    ti, sj = et.target, et.source
    rng = np.random.default_rng(probes.seed + 1)
    axes = np.eye(g.n)

    worst_jump, jump_witness = 0.0, None
    zero_witness = None
    sat_witness = None
    checked = 0

    lonely = isolated_agents(g)
    if lonely:
        sat_witness = {"agents": lonely, "reason": "no in-neighbors other than itself"}

    for x in states:
        if len(ti) == 0:
            break
        vals = spec.edge_values(x, ti, sj)
        checked += len(vals)

        if zero_witness is None:
            bad = (vals <= 0.0) & (x[ti] != x[sj])
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                zero_witness = {"state": x.tolist(), "i": int(ti[k]) + 1, "j": int(sj[k]) + 1}

        if sat_witness is None:
            sat = saturated_agents(g, spec, x)
            if sat:
                sat_witness = {"state": x.tolist(), "agents": sat}

        # axis moves of +-epsilon plus one random direction in the epsilon box
        moves = np.vstack([axes, -axes, rng.uniform(-1.0, 1.0, g.n)])
        for xp in np.clip(x + probes.epsilon * moves, 0.0, 1.0):
            jump = np.abs(spec.edge_values(xp, ti, sj) - vals)
            if spec.tie_discontinuous:
                jump[(x[ti] == x[sj]) | (xp[ti] == xp[sj])] = 0.0
            k = int(np.argmax(jump))
            if jump[k] > worst_jump:
                worst_jump = float(jump[k])
                jump_witness = {"state": x.tolist(), "perturbed": xp.tolist(),
                                "i": int(ti[k]) + 1, "j": int(sj[k]) + 1, "jump": worst_jump}

    bound = probes.lipschitz * probes.epsilon
    continuity = ConditionVerdict(
        "continuity", worst_jump <= bound, checked,
        f"max |alpha(x) - alpha(x')| = {worst_jump:.3g} for |x - x'|_inf <= {probes.epsilon:g} "
        f"(bound {bound:.3g})",
        jump_witness if worst_jump > bound else None,
    )
    positivity = ConditionVerdict(
        "positive on disagreement", zero_witness is None, checked,
        "alpha > 0 wherever x_i != x_j" if zero_witness is None else "alpha = 0 on a disagreeing pair",
        zero_witness,
    )
    below_one = ConditionVerdict(
        "some in-neighbor below one", sat_witness is None, checked,
        "every agent discounts some neighbor" if sat_witness is None
        else "some agent weighs every neighbor with alpha = 1",
        sat_witness,
    )
    return ValidationReport(continuity, positivity, below_one, len(states))
