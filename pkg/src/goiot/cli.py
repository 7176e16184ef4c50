"""Command-line entry point: ``goiot {validate,simulate,optimize,pareto,sweep}``.

Exit codes: 0 success, 1 infeasible optimisation, 2 input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

import numpy as np

from . import optimizer, simcore
from .errors import GoiotError, Infeasible, InputError
from .results import (PLACEMENT_COLUMNS, SIMULATION_COLUMNS, ResultTable, emit_results,
                      mark_pareto)
from .scenario import Scenario, load_scenario
from .units import parse_quantity

log = logging.getLogger("goiot")


def parse_frequencies(text: str) -> list[float]:
    """``"0.1,0.5"`` or ``"0.1..1.0"`` (step 0.1) or ``"0.1..1.0:0.05"``."""
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (float(v) for v in span.split(".."))
            step = float(step) if step else 0.1
            if step <= 0 or hi < lo:
                raise ValueError
            n = int(round((hi - lo) / step))
            values = [round(lo + k * step, 10) for k in range(n + 1)]
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse frequency list {text!r}") from None
    if not values or any(not 0.0 <= v <= 1.0 for v in values):
        raise InputError(f"frequencies must lie in [0, 1]: {text!r}")
    return values


def _simulation_row(sc: Scenario, sid: str, plan: simcore.SimulationPlan, agg: simcore.AggregateResult) -> dict:
    s = sc.strategies[sid]
    costs = simcore.strategy_costs(plan)
    lat = costs.detection_latency(plan.strategy)
    models = "-".join(st.model.name for st in plan.stages)
    threshold = plan.stages[0].threshold
    row = {
        "strategy": sid, "kind": s.kind, "models": models, "threshold_frac": threshold,
        "frequency_frac": plan.event_frequency, "runs_count": agg.runs,
    }
    for comp in agg.energy.as_dict():
        key = "energy_total_J" if comp == "total" else f"{comp}_J"
        row[key] = agg.mean["energy_total" if comp == "total" else comp]
    row.update({
        "energy_total_std_J": agg.std["energy_total"],
        "latency_radio_s": lat.radio, "latency_transport_s": lat.transport,
        "latency_routing_s": lat.routing, "latency_processing_s": lat.processing,
        "latency_detection_s": agg.mean["latency_detection"], "latency_mean_s": agg.mean["latency_mean"],
        "f1_frac": agg.f1, "inaccuracy_frac": agg.inaccuracy, "f1_run_std_frac": agg.std["f1_run"],
        "data_sent_B": agg.mean["data_sent_bytes"],
        "tp_count": agg.confusion.tp, "fp_count": agg.confusion.fp,
        "fn_count": agg.confusion.fn, "tn_count": agg.confusion.tn,
        "pareto_flag": 0,
    })
    return row


def simulation_table(sc: Scenario, strategy_ids: Sequence[str], frequencies: Sequence[float] | None = None,
                     runs: int | None = None, seed: int | None = None, backend: str | None = None) -> ResultTable:
    table = ResultTable(SIMULATION_COLUMNS)
    for sid in strategy_ids:
        plan = sc.plan_for(sid, runs=runs, seed=seed)
        freqs = [plan.event_frequency] if frequencies is None else frequencies
        for q, agg in simcore.sweep_event_frequency(plan, freqs, backend=backend):
            table.add(**_simulation_row(sc, sid, plan.with_frequency(q), agg))
    mark_pareto(table.rows, "energy_total_J", group_col="frequency_frac")
    table.sort("frequency_frac", "strategy")
    return table


def _placement_row(inst: optimizer.PlacementInstance, sol: optimizer.Solution, objective: str,
                   eps_L, eps_A, pareto: int) -> dict:
    frames = inst.meta.get("frames", 1)
    return {
        "family": inst.meta.get("family", ""), "candidate": sol.model, "compute_node": sol.cloud,
        "paths": ";".join(sol.paths), "objective": objective,
        "eps_latency_s": eps_L, "eps_accuracy_frac": eps_A,
        "energy_J": sol.energy, "energy_total_J": sol.energy * frames, "latency_s": sol.latency,
        "accuracy_frac": 1.0 - sol.inaccuracy, "inaccuracy_frac": sol.inaccuracy, "pareto_flag": pareto,
    }


def _eps_latency(args, sc: Scenario):
    if args.eps_latency is not None:
        try:
            return parse_quantity(args.eps_latency, "time")
        except ValueError as exc:
            raise InputError(f"--eps-latency: {exc}") from None
    return sc.optimizer.eps_latency


def cmd_validate(args, sc: Scenario) -> ResultTable | None:
    for sid in sc.strategies:
        sc.plan_for(sid, runs=1)
    print(f"scenario {sc.name!r} is valid: {len(sc.strategies)} strategies, "
          f"{len(sc.models)} models, {len(sc.graph.clouds)} compute nodes", file=sys.stderr)
    return None


def cmd_simulate(args, sc: Scenario) -> ResultTable:
    ids = args.strategy or list(sc.strategies)
    freqs = None if args.frequency is None else [args.frequency]
    return simulation_table(sc, ids, freqs, runs=args.runs, seed=args.seed)


def cmd_sweep(args, sc: Scenario) -> ResultTable:
    ids = args.strategy or list(sc.strategies)
    freqs = parse_frequencies(args.frequencies) if args.frequencies else list(sc.simulation.sweep_frequencies)
    return simulation_table(sc, ids, freqs, runs=args.runs, seed=args.seed)


def cmd_optimize(args, sc: Scenario) -> ResultTable:
    inst = optimizer.build_instance(sc, args.family, event_frequency=args.frequency)
    eps_L = _eps_latency(args, sc)
    sol = optimizer.solve_epsilon(inst, args.objective, eps_L, args.eps_accuracy)
    table = ResultTable(PLACEMENT_COLUMNS)
    table.add(**_placement_row(inst, sol, args.objective, eps_L, args.eps_accuracy, 1))
    return table


def cmd_pareto(args, sc: Scenario) -> ResultTable:
    inst = optimizer.build_instance(sc, args.family, event_frequency=args.frequency)
    eps_L = _eps_latency(args, sc)
    grid = sc.optimizer.accuracy_grid
    front = optimizer.epsilon_sweep(inst, grid, eps_L, args.objective)
    for eps in front.infeasible:
        log.warning("no feasible placement for eps_A=%g", eps)
    if not front.points:
        raise Infeasible("no grid point admits a feasible placement")
    table = ResultTable(PLACEMENT_COLUMNS)
    on_front = {(s.m, s.c) for s in front}
    if args.all:
        rows = optimizer.enumerate_all(inst, eps_L)
    else:
        rows = list(front)
    for sol in rows:
        table.add(**_placement_row(inst, sol, args.objective, eps_L, None, int((sol.m, sol.c) in on_front)))
    table.sort("inaccuracy_frac", "energy_J" if args.objective == "energy" else "latency_s",
               "candidate", "compute_node")
    return table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goiot", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="paper-repro",
                        help="scenario file, name in $GOIOT_SCENARIO_DIR, or bundled name (default: paper-repro)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--output", "-o", default=None, help="write results here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="load and check a scenario")

    for name, helptext in (("simulate", "Monte-Carlo simulation of strategies"),
                           ("sweep", "event-frequency sweep")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--strategy", action="append", help="strategy id (repeatable; default all)")
        p.add_argument("--runs", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        if name == "simulate":
            p.add_argument("--frequency", type=float, default=None, help="override event frequency")
        else:
            p.add_argument("--frequencies", default=None, help='e.g. "0.1..1.0" or "0.1,0.5,0.9"')

    for name, helptext in (("optimize", "single epsilon-constrained solve"),
                           ("pareto", "Pareto front via an epsilon sweep over accuracies")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--family", choices=optimizer.FAMILIES, default="TIoT")
        p.add_argument("--objective", choices=optimizer.OBJECTIVES, default="energy")
        p.add_argument("--eps-latency", default=None, help='latency bound, e.g. "0.5" or "500 ms"')
        p.add_argument("--frequency", type=float, default=None, help="override event frequency")
        if name == "optimize":
            p.add_argument("--eps-accuracy", type=float, default=None)
        else:
            p.add_argument("--all", action="store_true", help="include dominated placements")
    return parser


COMMANDS = {"validate": cmd_validate, "simulate": cmd_simulate, "sweep": cmd_sweep,
            "optimize": cmd_optimize, "pareto": cmd_pareto}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        if getattr(args, "runs", None) is not None and args.runs <= 0:
            raise InputError("--runs must be positive")
        sc = load_scenario(args.scenario)
        table = COMMANDS[args.command](args, sc)
        if table is not None:
            text = emit_results(table, args.format or sc.output_format, args.output)
            if args.output is None:
                sys.stdout.write(text)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GoiotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
