"""Command-line entry point.

Exit codes carry the result: 0 means the run completed without finding
anything, 1 means a violation was found (the sought outcome, so scripts
can branch on it), 2 is a usage problem, 3 a data problem.  Every report
file ships with a manifest describing the exact configuration that
produced it; manifests carry no timestamps, so re-running one reproduces
the report byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
from pathlib import Path
from typing import Optional, Sequence

from .cleanness import (
    ComposedTrace,
    build_phi_u_fun,
    build_phi_u_rob,
    oracle_func_clean,
    oracle_robustly_clean,
)
from .contracts import load_contract
from .emissions import (
    NoDataError,
    NoxPredictor,
    UndefinedRateError,
    cycle_emissions,
    falsify_emissions,
    load_cycle,
    load_trip_dir,
    standard_context,
    standard_cycle,
    write_profile_plot,
)
from .falsify import FalsificationOutcome, FalsifierConfig, falsify, merge_restarts
from .fairness import (
    MonitoringError,
    fairness_aware,
    hr_reference_system,
    load_table_system,
    table_proposal,
)
from .logic import eval_quant
from .oversight import OversightService, create_app
from .traces import DataError, load_trace_csv


class UsageError(Exception):
    """Arguments parsed but do not make sense together."""


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "unknown"


def _resolve_out(args, name) -> Path:
    path = Path(name)
    if args.out_dir and not path.is_absolute():
        base = Path(args.out_dir)
        base.mkdir(parents=True, exist_ok=True)
        return base / path
    return path


def _config_doc(args) -> dict:
    doc = {}
    for key, value in sorted(vars(args).items()):
        if key in ("handler", "argv"):
            continue
        if isinstance(value, (int, float, bool, str)) or value is None:
            doc[key] = value
        else:
            doc[key] = str(value)
    return doc


def write_manifest(report_path: Path, args, outputs: dict) -> Path:
    """Reproducibility record written next to every report."""
    manifest = {
        "command": ["dopingcheck"] + list(args.argv),
        "config": _config_doc(args),
        "seed": args.seed,
        "versions": {"package": _package_version(), "python": platform.python_version()},
        "outputs": {key: str(value) for key, value in sorted(outputs.items())},
    }
    path = report_path.parent / (report_path.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def write_report(path: Path, outcome: FalsificationOutcome) -> None:
    """Search history as CSV; row 0 is the initial state, always accepted."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "robustness", "accepted"])
        rows = zip(outcome.robustness_history, outcome.accepted_history)
        for iteration, (robustness, accepted) in enumerate(rows):
            writer.writerow([iteration, repr(float(robustness)), "true" if accepted else "false"])


def _search_config(args, seed: int) -> FalsifierConfig:
    try:
        return FalsifierConfig(beta=args.beta, max_iterations=args.max_iter, rng_seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_restarts(args) -> None:
    if args.restarts < 1:
        raise UsageError("restarts must be at least 1")


def _load_trace_pool(directory, horizon: int) -> tuple:
    files = sorted(Path(directory).glob("*.csv"))
    if not files:
        raise DataError(f"{directory}: no trace files (*.csv) found")
    pool = []
    for f in files:
        w = load_trace_csv(f)
        if w.horizon != horizon:
            raise DataError(
                f"{f}: horizon {w.horizon} does not match the contract's standard traces ({horizon})"
            )
        pool.append(w)
    return tuple(pool)


# ---------------------------------------------------------------------------
# falsify


def _cmd_falsify(args) -> int:
    _check_restarts(args)
    loaded = load_contract(args.contract)
    if loaded.kind == "fairness":
        raise UsageError(
            "fairness contracts are monitored with `fairness monitor`; "
            "trace falsification needs a robust or func contract"
        )
    ctx = loaded.context
    std = tuple(ctx.std)
    pool = _load_trace_pool(args.traces, std[0].horizon)
    phi = build_phi_u_rob(ctx) if loaded.kind == "robust" else build_phi_u_fun(ctx)

    def score(w):
        return eval_quant(phi, ComposedTrace(w, std), 0)

    def propose(_w, rng):
        return pool[rng.randrange(len(pool))]

    outcomes = [
        falsify(score, pool[0], propose, _search_config(args, args.seed + k))
        for k in range(args.restarts)
    ]
    best = merge_restarts(outcomes)
    out = _resolve_out(args, args.out)
    write_report(out, best)
    write_manifest(out, args, {"report": out})
    _say(args, f"min robustness {best.min_robustness!r} after {best.iterations_used} proposals")
    _say(args, f"report: {out}")
    return 1 if best.falsified else 0


# ---------------------------------------------------------------------------
# emissions


def _cmd_emissions_predict(args) -> int:
    predictor = NoxPredictor(load_trip_dir(args.trips))
    cycle = load_cycle(args.cycle) if args.cycle else standard_cycle()
    result = cycle_emissions(predictor, cycle)
    _say(
        args,
        f"total_mg={result.total_mg!r} distance_km={result.distance_km!r} "
        f"mg_per_km={result.mg_per_km!r}",
    )
    if args.out:
        out = _resolve_out(args, args.out)
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["total_mg", "distance_km", "mg_per_km"])
            writer.writerow([repr(result.total_mg), repr(result.distance_km), repr(result.mg_per_km)])
        write_manifest(out, args, {"report": out})
        _say(args, f"report: {out}")
    return 0


def _cmd_emissions_falsify(args) -> int:
    _check_restarts(args)
    if args.step_bound < 0:
        raise UsageError("step-bound must be non-negative")
    if args.max_window is not None and args.max_window < 1:
        raise UsageError("max-window must be at least 1")
    predictor = NoxPredictor(load_trip_dir(args.trips))
    cycle = load_cycle(args.cycle) if args.cycle else standard_cycle()
    ctx = standard_context(predictor, cycle, kappa_in=args.kappa_in, kappa_out=args.kappa_out)
    outcomes = [
        falsify_emissions(
            ctx,
            predictor,
            _search_config(args, args.seed + k),
            step_bound=args.step_bound,
            max_window=args.max_window,
        )
        for k in range(args.restarts)
    ]
    best = merge_restarts(outcomes)
    out = _resolve_out(args, args.out)
    write_report(out, best)
    outputs = {"report": out}
    if args.plot:
        plot = _resolve_out(args, args.plot)
        write_profile_plot(plot, ctx.standard_cycle, best.argmin)
        outputs["plot"] = plot
        _say(args, f"plot: {plot}")
    write_manifest(out, args, outputs)
    _say(args, f"standard output {ctx.std_output!r} mg/km, kappa_out {ctx.kappa_out!r}")
    _say(args, f"min robustness {best.min_robustness!r} after {best.iterations_used} proposals")
    _say(args, f"report: {out}")
    return 1 if best.falsified else 0


# ---------------------------------------------------------------------------
# fairness


_BUILTIN_SYSTEMS = {"hr-mild": "mild", "hr-steep": "steep"}


def _resolve_system(spec: str):
    """Returns (system, proposal or None for the default, input width)."""
    if spec in _BUILTIN_SYSTEMS:
        return hr_reference_system(_BUILTIN_SYSTEMS[spec]), None, 5
    path = Path(spec)
    if path.exists():
        table = load_table_system(path)
        return table, table_proposal(table), len(table.inputs[0])
    raise UsageError(
        f"unknown system {spec!r}: expected one of {sorted(_BUILTIN_SYSTEMS)} or a table CSV path"
    )


def _load_inputs(path) -> tuple:
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append(tuple(float(cell) for cell in row))
            except ValueError as exc:
                raise DataError(f"{path}: row {row_no}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no input rows")
    if len({len(r) for r in rows}) != 1:
        raise DataError(f"{path}: rows have inconsistent component counts")
    return tuple(rows)


def _cmd_fairness_monitor(args) -> int:
    loaded = load_contract(args.contract)
    if loaded.kind != "fairness":
        raise UsageError(f"fairness monitoring needs a fairness contract, got {loaded.kind!r}")
    contract = loaded.context
    system, proposal, width = _resolve_system(args.system)
    inputs = _load_inputs(args.inputs)
    if len(inputs[0]) != width:
        raise DataError(
            f"{args.inputs}: inputs have {len(inputs[0])} components, system expects {width}"
        )
    any_negative = False
    rows = []
    for index, vector in enumerate(inputs, start=1):
        cfg = _search_config(args, args.seed + index - 1)
        verdict = fairness_aware(system, contract, vector, cfg, proposal)
        if verdict.normalized_score < 0:
            any_negative = True
        counterpart = json.dumps(
            {"input": list(verdict.counterpart[0]), "output": verdict.counterpart[1]},
            sort_keys=True,
            separators=(",", ":"),
        )
        rows.append([index, repr(verdict.score), repr(verdict.normalized_score), counterpart])
        _say(
            args,
            f"case {index}: score {verdict.score!r}, normalized {verdict.normalized_score!r}",
        )
    out = _resolve_out(args, args.out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case_id", "score", "normalized", "counterpart_json"])
        writer.writerows(rows)
    write_manifest(out, args, {"report": out})
    _say(args, f"report: {out}")
    return 1 if any_negative else 0


# ---------------------------------------------------------------------------
# oracle


def _cmd_oracle(args) -> int:
    loaded = load_contract(args.contract)
    if loaded.kind == "fairness":
        raise UsageError("the trace oracle works on robust or func contracts")
    ctx = loaded.context
    pool = _load_trace_pool(args.traces, tuple(ctx.std)[0].horizon)
    try:
        if loaded.kind == "robust":
            verdict = oracle_robustly_clean(pool, ctx, args.clause)
        else:
            verdict = oracle_func_clean(pool, ctx, args.clause)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if verdict.clean:
        _say(args, "clean: no violating pair found")
        return 0
    violation = verdict.violation
    _say(
        args,
        f"violation: {violation.clause}-clause fails at step {violation.fail_time} "
        f"(no admissible witness stays within the output tolerance)",
    )
    return 1


# ---------------------------------------------------------------------------
# serve


def _cmd_serve(args) -> int:
    loaded = load_contract(args.contract)
    if loaded.kind != "fairness":
        raise UsageError(f"the oversight service needs a fairness contract, got {loaded.kind!r}")
    system, proposal, width = _resolve_system(args.system)
    service = OversightService(
        system,
        loaded.context,
        args.store,
        input_width=width,
        base_seed=args.seed,
        beta=args.beta,
        max_iterations=args.max_iter,
        proposal=proposal,
    )
    app = create_app(service)
    import uvicorn

    _say(args, f"serving on http://{args.host}:{args.port} (store: {args.store})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    common.add_argument("--out-dir", default=None, help="directory for report files")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="dopingcheck",
        description="Detect software doping and individual unfairness in black-box systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_falsify = sub.add_parser(
        "falsify",
        parents=[common],
        help="search a trace pool for a cleanness violation",
    )
    p_falsify.add_argument("--contract", required=True, help="robust or func contract file")
    p_falsify.add_argument("--traces", required=True, help="directory of candidate trace CSVs")
    p_falsify.add_argument("--max-iter", type=int, default=1000)
    p_falsify.add_argument("--beta", type=float, default=1.0)
    p_falsify.add_argument("--restarts", type=int, default=1)
    p_falsify.add_argument("--out", default="report.csv")
    p_falsify.set_defaults(handler=_cmd_falsify)

    p_emissions = sub.add_parser("emissions", help="emissions workbench")
    em_sub = p_emissions.add_subparsers(dest="subcommand", required=True)

    p_predict = em_sub.add_parser(
        "predict", parents=[common], help="aggregate predicted emissions over a cycle"
    )
    p_predict.add_argument("--trips", required=True, help="directory of trip CSVs")
    p_predict.add_argument("--cycle", default=None, help="cycle file (default: built-in)")
    p_predict.add_argument("--out", default=None)
    p_predict.set_defaults(handler=_cmd_emissions_predict)

    p_emf = em_sub.add_parser(
        "falsify", parents=[common], help="search for a doped cycle near the standard one"
    )
    p_emf.add_argument("--trips", required=True, help="directory of trip CSVs")
    p_emf.add_argument("--cycle", default=None, help="cycle file (default: built-in)")
    p_emf.add_argument("--kappa-in", type=float, default=15.0, dest="kappa_in")
    p_emf.add_argument("--kappa-out", type=float, default=88.0, dest="kappa_out")
    p_emf.add_argument("--max-iter", type=int, default=3000)
    p_emf.add_argument("--beta", type=float, default=1.0)
    p_emf.add_argument("--restarts", type=int, default=1)
    p_emf.add_argument("--step-bound", type=float, default=5.0, dest="step_bound")
    p_emf.add_argument("--max-window", type=int, default=60, dest="max_window")
    p_emf.add_argument("--out", default="report.csv")
    p_emf.add_argument("--plot", default=None, help="write std vs candidate speeds CSV here")
    p_emf.set_defaults(handler=_cmd_emissions_falsify)

    p_fairness = sub.add_parser("fairness", help="individual-fairness tools")
    fair_sub = p_fairness.add_subparsers(dest="subcommand", required=True)

    p_monitor = fair_sub.add_parser(
        "monitor", parents=[common], help="score actual inputs against a fairness contract"
    )
    p_monitor.add_argument(
        "--system", required=True, help="hr-mild, hr-steep, or a table CSV path"
    )
    p_monitor.add_argument("--contract", required=True, help="fairness contract file")
    p_monitor.add_argument("--inputs", required=True, help="CSV, one actual input per row")
    p_monitor.add_argument("--max-iter", type=int, default=10_000)
    p_monitor.add_argument("--beta", type=float, default=300.0)
    p_monitor.add_argument("--out", default="fairness.csv")
    p_monitor.set_defaults(handler=_cmd_fairness_monitor)

    p_oracle = sub.add_parser(
        "oracle", parents=[common], help="exhaustively check a trace pool for cleanness"
    )
    p_oracle.add_argument("--contract", required=True, help="robust or func contract file")
    p_oracle.add_argument("--traces", required=True, help="directory of system trace CSVs")
    p_oracle.add_argument("--clause", choices=("both", "l", "u"), default="both")
    p_oracle.set_defaults(handler=_cmd_oracle)

    p_serve = sub.add_parser(
        "serve", parents=[common], help="run the human-oversight HTTP service"
    )
    p_serve.add_argument("--system", required=True, help="hr-mild, hr-steep, or a table CSV path")
    p_serve.add_argument("--contract", required=True, help="fairness contract file")
    p_serve.add_argument("--store", required=True, help="append-only store file")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--max-iter", type=int, default=10_000)
    p_serve.add_argument("--beta", type=float, default=300.0)
    p_serve.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    args.argv = list(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, NoDataError, UndefinedRateError, MonitoringError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
