"""Model configuration files (JSON, versioned schema)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .bias import (
    BiasError,
    BiasFactor,
    Constant,
    Counterexample,
    Degroot,
    Disagreement,
    DisagreementBias,
    GroupPartition,
    Intergroup,
    Overridden,
    Product,
    from_disagreement,
)
from .dynamics import DEFAULT_HORIZON, DEFAULT_TOL, OpinionModel
from .graph import GraphError, new_influence_graph

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Schema violation; the message starts with the offending field path."""


@dataclass(frozen=True)
class RunSettings:
    horizon: int = DEFAULT_HORIZON
    tol: float = DEFAULT_TOL
    require_consensus: bool = True


@dataclass(frozen=True)
class OutputSettings:
    trace_path: str | None = None
    report_path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class ModelConfig:
    agents: int
    edges: tuple[tuple[int, int, float], ...]
    initial: tuple[float, ...]
    bias: BiasFactor
    run: RunSettings = field(default_factory=RunSettings)
    outputs: OutputSettings = field(default_factory=OutputSettings)

    def model(self) -> OpinionModel:
        return OpinionModel(new_influence_graph(self.agents, self.edges), self.initial, self.bias)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "agents": self.agents,
            "edges": [{"src": s, "dst": d, "w": w} for s, d, w in self.edges],
            "initial": list(self.initial),
            "bias": bias_to_dict(self.bias),
            "run": {"horizon": self.run.horizon, "tol": self.run.tol,
                    "require_consensus": self.run.require_consensus},
            "outputs": {k: v for k, v in vars(self.outputs).items() if v is not None},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _expect(obj, kind, path: str):
    if not isinstance(obj, kind) or (kind in (int, float) and isinstance(obj, bool)):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"{path}: expected {names}, got {type(obj).__name__}")
    return obj


def _keys(obj: dict, path: str, required: set, optional: set = frozenset()) -> None:
    missing = required - obj.keys()
    if missing:
        raise ConfigError(f"{path}: missing field(s) {sorted(missing)}")
    extra = obj.keys() - required - optional
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {sorted(extra)}")


_NUM = (int, float)


def bias_from_dict(obj: Any, path: str = "bias") -> BiasFactor:
    _expect(obj, dict, path)
    if "type" not in obj:
        raise ConfigError(f"{path}: missing variant tag 'type'")
    tag = obj["type"]
    fields = {
        "constant": {"c"},
        "degroot": set(),
        "disagreement": {"beta"},
        "intergroup": set(),
        "counterexample": set(),
        "product": {"factors"},
    }
    if tag not in fields:
        raise ConfigError(f"{path}.type: unknown bias variant {tag!r}")
    optional = {"overrides"} | ({"cuts"} if tag == "intergroup" else set())
    _keys(obj, path, {"type"} | fields[tag], optional)
    try:
        if tag == "constant":
            spec: BiasFactor = Constant(float(_expect(obj["c"], _NUM, f"{path}.c")))
        elif tag == "degroot":
            spec = Degroot()
        elif tag == "disagreement":
            b = _expect(obj["beta"], dict, f"{path}.beta")
            _keys(b, f"{path}.beta", {"kind"}, {"c", "k"})
            beta = DisagreementBias(
                _expect(b["kind"], str, f"{path}.beta.kind"),
                float(_expect(b.get("c", 0.5), _NUM, f"{path}.beta.c")),
                float(_expect(b.get("k", 1.0), _NUM, f"{path}.beta.k")),
            )
            spec = from_disagreement(beta)
        elif tag == "intergroup":
            cuts = _expect(obj.get("cuts", [0.45, 0.55]), list, f"{path}.cuts")
            if len(cuts) != 2:
                raise ConfigError(f"{path}.cuts: expected two cut points")
            spec = Intergroup(GroupPartition(*(float(_expect(c, _NUM, f"{path}.cuts")) for c in cuts)))
        elif tag == "counterexample":
            spec = Counterexample()
        else:
            items = _expect(obj["factors"], list, f"{path}.factors")
            spec = Product(tuple(bias_from_dict(f, f"{path}.factors[{k}]") for k, f in enumerate(items)))
    except BiasError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    if "overrides" in obj:
        over = {}
        for k, rec in enumerate(_expect(obj["overrides"], list, f"{path}.overrides")):
            p = f"{path}.overrides[{k}]"
            _expect(rec, dict, p)
            _keys(rec, p, {"i", "j", "bias"})
            key = (_expect(rec["i"], int, f"{p}.i"), _expect(rec["j"], int, f"{p}.j"))
            if key in over:
                raise ConfigError(f"{p}: duplicate override for pair {key}")
            over[key] = bias_from_dict(rec["bias"], f"{p}.bias")
        try:
            spec = Overridden(spec, over)
        except BiasError as exc:
            raise ConfigError(f"{path}.overrides: {exc}") from None
    return spec


def bias_to_dict(spec: BiasFactor) -> dict:
    if isinstance(spec, Overridden):
        out = bias_to_dict(spec.base)
        out["overrides"] = [{"i": i, "j": j, "bias": bias_to_dict(f)} for (i, j), f in spec.overrides.items()]
        return out
    if isinstance(spec, Degroot):
        return {"type": "degroot"}
    if isinstance(spec, Constant):
        return {"type": "constant", "c": spec.c}
    if isinstance(spec, Disagreement):
        return {"type": "disagreement", "beta": {"kind": spec.beta.kind, "c": spec.beta.c, "k": spec.beta.k}}
    if isinstance(spec, Intergroup):
        return {"type": "intergroup", "cuts": [spec.partition.c1, spec.partition.c2]}
    if isinstance(spec, Counterexample):
        return {"type": "counterexample"}
    if isinstance(spec, Product):
        return {"type": "product", "factors": [bias_to_dict(f) for f in spec.factors]}
    raise TypeError(f"cannot serialize bias factor {spec!r}")


def config_from_dict(obj: Any) -> ModelConfig:
    _expect(obj, dict, "<root>")
    _keys(obj, "<root>", {"schema_version", "agents", "edges", "initial", "bias"}, {"run", "outputs"})
    if obj["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {obj['schema_version']!r}")
    n = _expect(obj["agents"], int, "agents")
    edges = []
    for k, e in enumerate(_expect(obj["edges"], list, "edges")):
        p = f"edges[{k}]"
        _expect(e, dict, p)
        _keys(e, p, {"src", "dst", "w"})
        edges.append((_expect(e["src"], int, f"{p}.src"), _expect(e["dst"], int, f"{p}.dst"),
                      float(_expect(e["w"], _NUM, f"{p}.w"))))
    initial = tuple(float(_expect(v, _NUM, f"initial[{k}]"))
                    for k, v in enumerate(_expect(obj["initial"], list, "initial")))
    if len(initial) != n:
        raise ConfigError(f"initial: {len(initial)} opinions for {n} agents")
    if any(not 0.0 <= v <= 1.0 for v in initial):
        raise ConfigError("initial: opinions must lie in [0, 1]")
    bias = bias_from_dict(obj["bias"])

    run_obj = _expect(obj.get("run", {}), dict, "run")
    _keys(run_obj, "run", set(), {"horizon", "tol", "require_consensus"})
    run = RunSettings(
        horizon=_expect(run_obj.get("horizon", DEFAULT_HORIZON), int, "run.horizon"),
        tol=float(_expect(run_obj.get("tol", DEFAULT_TOL), _NUM, "run.tol")),
        require_consensus=_expect(run_obj.get("require_consensus", True), bool, "run.require_consensus"),
    )
    if run.horizon < 1:
        raise ConfigError("run.horizon: must be at least 1")
    if not run.tol > 0:
        raise ConfigError("run.tol: must be positive")

    out_obj = _expect(obj.get("outputs", {}), dict, "outputs")
    _keys(out_obj, "outputs", set(), {"trace_path", "report_path", "format"})
    outputs = OutputSettings(
        trace_path=out_obj.get("trace_path"),
        report_path=out_obj.get("report_path"),
        format=out_obj.get("format", "csv"),
    )
    if outputs.format not in ("csv", "json"):
        raise ConfigError(f"outputs.format: expected 'csv' or 'json', got {outputs.format!r}")

    cfg = ModelConfig(n, tuple(edges), initial, bias, run, outputs)
    try:
        cfg.model()
    except (GraphError, ValueError) as exc:
        raise ConfigError(f"edges: {exc}") from None
    return cfg


def load_config(path: str | Path) -> ModelConfig:
    """Read and validate a config file. Raises OSError or ConfigError."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: not valid JSON ({exc})") from None
    return config_from_dict(obj)
