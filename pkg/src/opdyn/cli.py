"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 no consensus within the
horizon, 4 I/O or schema error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import demos
from .bias import Constant, SamplingPlan, counterexample_alpha, eval_bias, validate_bias_conditions
from .config import ConfigError, ModelConfig, load_config
from .dynamics import (
    build_update_matrix,
    disagreement_norm,
    read_trace_csv,
    simulate,
    step,
    consensus_hypotheses,
    write_trace_csv,
    write_trace_json,
)
from .dynsys import iterate_orbit, logistic_map, omega_limit_estimate, parity_split, write_orbit_csv
from .spectral import analyze_matrix

EXIT_OK, EXIT_INVALID, EXIT_NO_CONSENSUS, EXIT_IO = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_IO):
        super().__init__(message)
        self.code = code


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get("ODE_OUT_DIR") or "out")


def _prepare_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {path}: {exc}") from None
    return path


def _dump_json(obj, path: Path) -> None:
    try:
        path.write_text(json.dumps(obj, indent=2) + "\n")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def validation_report(cfg: ModelConfig, samples: int = 200, seed: int = 0) -> dict:
    model = cfg.model()
    g = model.graph
    hyp = consensus_hypotheses(g)
    at_x0 = validate_bias_conditions(g, model.bias, SamplingPlan(random_states=0, states=(model.initial,)))
    sampled = validate_bias_conditions(
        g, model.bias, SamplingPlan(random_states=samples, states=(model.initial,), seed=seed))
    warnings = list(hyp["failures"])
    if isinstance(model.bias, Constant) and model.bias.c == 1.0:
        warnings.append("classic DeGroot mode: alpha == 1, the 'some alpha < 1' condition fails everywhere")
    for verdict in (sampled.continuity, sampled.positivity, sampled.below_one):
        if not verdict.passed:
            warnings.append(f"bias condition '{verdict.name}' fails on a sampled state: {verdict.detail}")
    hard = cfg.run.require_consensus and not hyp["strongly_connected"]
    return {
        "passed": not hard,
        "strongly_connected": hyp["strongly_connected"],
        "isolated_agents": hyp["isolated_agents"],
        "bias_at_initial_state": at_x0.to_dict(),
        "bias_sampled": sampled.to_dict(),
        "warnings": warnings,
    }


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    rep = validation_report(cfg, samples=args.samples)
    print(f"strongly connected: {rep['strongly_connected']}")
    if rep["isolated_agents"]:
        print(f"isolated agents: {rep['isolated_agents']}")
    for c in rep["bias_sampled"]["conditions"]:
        print(f"{c['name']}: {'pass' if c['passed'] else 'FAIL'} ({c['detail']})")
    for w in rep["warnings"]:
        print(f"warning: {w}")
    print("validation:", "pass" if rep["passed"] else "FAIL: not strongly connected")
    if args.out:
        _dump_json(rep, _prepare_dir(_out_dir(args)) / "validation.json")
    return EXIT_OK if rep["passed"] else EXIT_INVALID


def run_simulation(cfg: ModelConfig, out: Path, fmt: str | None = None, force: bool = False,
                   quiet: bool = False) -> int:
    """Simulate one config into ``out``; shared by simulate, demo and sweep."""
    hyp = consensus_hypotheses(cfg.model().graph)
    if cfg.run.require_consensus and not hyp["strongly_connected"] and not force:
        if not quiet:
            print("validation failed: influence graph is not strongly connected (use --force)")
        return EXIT_INVALID
    trace = simulate(cfg.model(), horizon=cfg.run.horizon, tol=cfg.run.tol)
    fmt = fmt or cfg.outputs.format
    _prepare_dir(out)
    name = cfg.outputs.trace_path or f"trace.{fmt}"
    try:
        if fmt == "csv":
            write_trace_csv(trace, out / name)
        else:
            write_trace_json(trace, out / name)
    except OSError as exc:
        raise CliError(f"cannot write trace {out / name}: {exc}") from None
    summary = {k: v for k, v in trace.to_dict().items() if k not in ("states", "etas")}
    summary["final_state"] = trace.final.tolist()
    if cfg.outputs.report_path:
        _dump_json(summary, out / cfg.outputs.report_path)
    if not quiet:
        for w in hyp["failures"]:
            print(f"warning: {w}")
        print(f"converged_at: {trace.converged_at}")
        print(f"consensus_value: {trace.consensus_value!r}")
        print(f"final_eta: {float(trace.etas[-1])!r}")
        if trace.saturated:
            t0, agents = trace.saturated[0]
            print(f"warning: agents {agents} weigh every neighbor with alpha = 1 at step {t0} "
                  f"({len(trace.saturated)} such steps)")
        print(f"trace: {out / name}")
    return EXIT_OK if trace.converged_at is not None else EXIT_NO_CONSENSUS


def _apply_run_overrides(cfg: ModelConfig, args) -> ModelConfig:
    run = cfg.run
    if args.tol is not None:
        run = replace(run, tol=args.tol)
    if args.horizon is not None:
        run = replace(run, horizon=args.horizon)
    return replace(cfg, run=run)


def cmd_simulate(args) -> int:
    cfg = _apply_run_overrides(load_config(args.config), args)
    return run_simulation(cfg, _out_dir(args), args.format, args.force)


def _parse_matrix(text: str) -> np.ndarray:
    try:
        rows = [[float(v) for v in r.split(",")] for r in text.strip().split(";")]
        m = np.array(rows, dtype=float)
    except ValueError as exc:
        raise CliError(f"cannot parse matrix {text!r}: {exc}", EXIT_IO) from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise CliError(f"matrix {text!r} is not square", EXIT_IO)
    return m


def _resolve_state(cfg: ModelConfig, spec: str | None, trace_path: str | None) -> np.ndarray:
    model = cfg.model()
    if spec is None:
        return np.array(model.initial)
    if "," not in spec and spec.strip().lstrip("-").isdigit():
        t = int(spec)
        if trace_path:
            states = read_trace_csv(trace_path)
        else:
            states = simulate(model, horizon=max(t, 1), tol=cfg.run.tol, monitor=False).states
        if not 0 <= t < len(states):
            raise CliError(f"unknown trace step {t} (trace has steps 0..{len(states) - 1})")
        x = states[t]
    else:
        try:
            x = np.array([float(v) for v in spec.split(",")])
        except ValueError as exc:
            raise CliError(f"cannot parse state {spec!r}: {exc}") from None
    if x.shape != (cfg.agents,):
        raise CliError(f"state has {x.size} entries, model has {cfg.agents} agents")
    return x


def cmd_analyze(args) -> int:
    if args.matrix:
        m = _parse_matrix(args.matrix)
        out = analyze_matrix(m).to_dict()
    else:
        if not args.config:
            raise CliError("analyze needs --config or --matrix")
        cfg = load_config(args.config)
        model = cfg.model()
        x = _resolve_state(cfg, args.state, args.trace)
        m = build_update_matrix(model.graph, model.bias, x)
        out = analyze_matrix(m).to_dict()
        eta = disagreement_norm(x)
        nxt = disagreement_norm(step(model.graph, model.bias, x))
        out["state"] = x.tolist()
        out["eta"] = eta
        out["eta_next_ratio"] = nxt / eta if eta > 0 else None
    text = json.dumps(out, indent=2)
    print(text)
    if args.out:
        _dump_json(out, _prepare_dir(_out_dir(args)) / "matrix_report.json")
    return EXIT_OK


def _demo_counterexample(out: Path) -> int:
    cfg = demos.counterexample()
    _prepare_dir(out)
    (out / "config.json").write_text(cfg.dumps())
    a = eval_bias(cfg.bias, [0.0, 0.2], 1, 2)
    b = eval_bias(cfg.bias, [0.5, 0.7], 1, 2)
    print(f"alpha_12(0, 0.2)   = {a:.12g}")
    print(f"alpha_12(0.5, 0.7) = {b:.12g}")
    print("Both states have x_2 - x_1 = 0.2, yet the factors differ, so the update")
    print("cannot be written as x_i + beta(x_j - x_i) for any function beta of the")
    print("difference alone.")
    _dump_json({"alpha_at_0_0.2": a, "alpha_at_0.5_0.7": b,
                "closed_form": [float(counterexample_alpha(0.0, 0.2)), float(counterexample_alpha(0.5, 0.7))]},
               out / "counterexample.json")
    return run_simulation(cfg, out, quiet=True)


def _demo_logistic(out: Path) -> int:
    f = logistic_map(demos.LOGISTIC_MU)
    orbit = iterate_orbit(f, demos.LOGISTIC_X0, demos.LOGISTIC_STEPS)
    est = omega_limit_estimate(orbit, demos.LOGISTIC_BURN_IN, 1e-3)
    parity = parity_split(orbit, demos.LOGISTIC_BURN_IN)
    _prepare_dir(out)
    write_orbit_csv(orbit, out / "orbit.csv")
    pts = sorted(est.accumulation_points)
    cross = [abs(f(pts[0]) - pts[1]), abs(f(pts[1]) - pts[0])] if len(pts) == 2 else None
    rep = {"mu": demos.LOGISTIC_MU, "x0": demos.LOGISTIC_X0, "steps": demos.LOGISTIC_STEPS,
           "burn_in": est.burn_in, "cluster_tol": est.cluster_tol, "omega_limit": pts,
           "support": est.support, "even": parity["even"], "odd": parity["odd"], "cross_map_error": cross}
    _dump_json(rep, out / "omega_limit.json")
    print("omega-limit estimate:", ", ".join(f"{p:.4f}" for p in pts))
    print("even-indexed tail ->", ", ".join(f"{p:.4f}" for p in parity["even"]))
    print("odd-indexed tail  ->", ", ".join(f"{p:.4f}" for p in parity["odd"]))
    return EXIT_OK


def cmd_demo(args) -> int:
    name = args.name
    if name not in demos.DEMOS:
        raise CliError(f"unknown demo {name!r}; choose from {', '.join(demos.DEMOS)}", EXIT_IO)
    out = _out_dir(args) / name
    if name == "counterexample":
        return _demo_counterexample(out)
    if name == "logistic":
        return _demo_logistic(out)
    cfg = demos.example1(transposed=name == "example1-transposed")
    _prepare_dir(out)
    (out / "config.json").write_text(cfg.dumps())
    return run_simulation(cfg, out, force=True)


def _sweep_one(path: str, out: str, fmt: str | None, force: bool, tol, horizon) -> tuple[str, int, str]:
    try:
        cfg = _apply_run_overrides(load_config(path), argparse.Namespace(tol=tol, horizon=horizon))
        code = run_simulation(cfg, Path(out), fmt, force, quiet=True)
        return path, code, ""
    except (OSError, ConfigError, CliError) as exc:
        return path, EXIT_IO, str(exc)


def cmd_sweep(args) -> int:
    base = _out_dir(args)
    jobs = []
    seen: dict[str, int] = {}
    for p in args.config:
        stem = Path(p).stem
        seen[stem] = seen.get(stem, 0) + 1
        sub = stem if seen[stem] == 1 else f"{stem}-{seen[stem]}"
        jobs.append((p, str(base / sub)))
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        k = len(jobs)
        results = list(pool.map(_sweep_one, *zip(*jobs), [args.format] * k, [args.force] * k,
                                [args.tol] * k, [args.horizon] * k))
    worst = EXIT_OK
    for path, code, err in results:
        print(f"{path}: exit {code}{' (' + err + ')' if err else ''}")
        worst = max(worst, code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opdyn", description="Generalized-bias opinion dynamics engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="model config (JSON)")
        p.add_argument("--out", help="output directory (default $ODE_OUT_DIR or ./out)")

    p = sub.add_parser("validate", help="check graph and bias hypotheses")
    common(p)
    p.add_argument("--samples", type=int, default=200, help="random states probed for the bias conditions")
    p.set_defaults(func=cmd_validate)

    def run_flags(p):
        p.add_argument("--tol", type=float)
        p.add_argument("--horizon", type=int)
        p.add_argument("--force", action="store_true", help="run even if validation fails")
        p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("simulate", help="run a model and write its trace")
    common(p)
    run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="matrix report of A(x) at a state")
    common(p, config_required=False)
    p.add_argument("--state", help="trace step t, or comma-separated opinions")
    p.add_argument("--trace", help="trace CSV to read step t from (default: re-simulate)")
    p.add_argument("--matrix", help="inline matrix, rows separated by ';' (e.g. '0.5,0.5;0.2,0.8')")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("demo", help="reproduce a bundled example")
    p.add_argument("name", help=", ".join(demos.DEMOS))
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("sweep", help="simulate several configs concurrently")
    p.add_argument("--config", action="append", required=True)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=None)
    run_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
