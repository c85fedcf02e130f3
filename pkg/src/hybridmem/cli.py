"""Command-line entry point.

Exit codes: 0 success, 1 config or input error, 2 infeasible problem,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import FORMAT_VERSION, __version__
from .config import ConfigError, RunConfig, load_config
from .evaluator import (
    REPORT_HEADER,
    ComparisonRow,
    compare,
    evaluate,
    fmt_real,
    report_csv,
)
from .optimizer import InfeasibleError, ProblemError, solve
from .placement import BASELINE_KINDS, LayoutError, baseline, counts, emit_layout, parse_layout
from .workload import WorkloadError, emit_aggregate, synthesize

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3

PLOT_METRICS = (
    ("energy", "energy_norm"),
    ("delay", "delay_norm"),
    ("edp", "edp_norm"),
    ("lifetime", "lifetime_norm"),
)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _out_dir(cfg: RunConfig, args) -> Path:
    return Path(args.out) if args.out else cfg.output_dir


def _require_workload(cfg: RunConfig):
    if cfg.workload is None:
        raise ConfigError("no workload configured (set workload.file, workload.events, "
                          "workload.profile or workload.kind)")
    return cfg.workload


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    source = _require_workload(cfg)
    workload = source.load(cfg.cores, cfg.grid)
    problem = cfg.problem(workload)
    result = solve(problem, cfg.solver_mode, cfg.max_brute_cells)
    report = evaluate(result.layout, workload, cfg.techlib, cfg.static_mode,
                      cfg.lines_per_bank, cfg.failure_mode, cfg.power_budget_w)
    n_dr, n_st = counts(result.layout)
    infeasible = " ".join(f"{x},{y}" for x, y in result.infeasible_sttram_coords)
    summary = [
        f"workload = {source.name}",
        f"solver = {result.solver}",
        f"phi = {cfg.phi!r}",
        f"objective_weighted_j = {fmt_real(result.objective_value)}",
        f"energy_physical_j = {fmt_real(report.energy_joules)}",
        f"edram_count = {n_dr}",
        f"sttram_count = {n_st}",
        f"infeasible_sttram_coords = {infeasible}",
        f"nodes_explored = {result.nodes_explored}",
        f"static_power_w = {fmt_real(report.static_power_watts)}",
        f"within_budget = {'true' if report.within_power_budget else 'false'}",
    ]
    out = _out_dir(cfg, args)
    _write(out / "layout.csv", emit_layout(result.layout))
    _write(out / "summary.txt", "\n".join(summary) + "\n")
    print(f"{source.name}: {n_dr} edram, {n_st} sttram, "
          f"objective {fmt_real(result.objective_value)} J -> {out / 'layout.csv'}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    source = _require_workload(cfg)
    workload = source.load(cfg.cores, cfg.grid)
    layout = parse_layout(args.layout, cfg.grid)
    problem = cfg.problem(workload)
    rows = compare([(Path(args.layout).stem, layout)], workload, problem,
                   cfg.failure_mode, cfg.power_budget_w)
    out = _out_dir(cfg, args)
    _write(out / "report.csv", report_csv(rows))
    print(f"{Path(args.layout).stem}: energy {fmt_real(rows[0].report.energy_joules)} J "
          f"-> {out / 'report.csv'}")
    return EXIT_OK


def _layouts_for(cfg: RunConfig, workload) -> list[tuple[str, object]]:
    layouts = []
    for kind in BASELINE_KINDS:
        try:
            layouts.append((kind, baseline(kind, cfg.grid)))
        except LayoutError:
            continue  # not defined on this grid
    result = solve(cfg.problem(workload), cfg.solver_mode, cfg.max_brute_cells)
    layouts.append(("optimized", result.layout))
    return layouts


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if cfg.suite is not None:
        suite = list(cfg.suite)
    else:
        suite = [cfg.workload] if cfg.workload is not None else []
    if not suite:
        raise ConfigError("no workloads configured")

    per_workload: list[tuple[str, list[ComparisonRow]]] = []
    for source in suite:
        workload = source.load(cfg.cores, cfg.grid)
        problem = cfg.problem(workload)
        rows = compare(_layouts_for(cfg, workload), workload, problem,
                       cfg.failure_mode, cfg.power_budget_w)
        per_workload.append((source.name, rows))

    out = _out_dir(cfg, args)
    combined = ["workload," + REPORT_HEADER + ",objective_weighted_j,objective_norm"]
    plots = {metric: ["workload,layout,value"] for metric, _ in PLOT_METRICS}
    for name, rows in per_workload:
        _write(out / f"report_{name}.csv", report_csv(rows))
        for line, row in zip(report_csv(rows).splitlines()[1:], rows):
            combined.append(f"{name},{line},{fmt_real(row.objective)},{fmt_real(row.objective_norm)}")
            for metric, attr in PLOT_METRICS:
                plots[metric].append(f"{name},{row.name},{fmt_real(getattr(row, attr))}")
    _write(out / "comparison.csv", "\n".join(combined) + "\n")
    for metric, lines in plots.items():
        _write(out / f"plot_{metric}.csv", "\n".join(lines) + "\n")
    print(f"compared {len(per_workload)} workloads -> {out / 'comparison.csv'}")
    return EXIT_OK


def cmd_gen_workload(args) -> int:
    cfg = load_config(args.config)
    source = _require_workload(cfg)
    if source.kind != "profile":
        raise ConfigError("gen-workload needs a workload profile (workload.kind or workload.profile)")
    matrix = synthesize(source.profile, cfg.cores, (cfg.grid.cx, cfg.grid.cy))
    out = _out_dir(cfg, args)
    _write(out / "workload.csv", emit_aggregate(matrix))
    print(f"{source.name}: {matrix.total_reads()} reads, {matrix.total_writes()} writes "
          f"-> {out / 'workload.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridmem",
        description="Optimize and evaluate hybrid eDRAM/STT-RAM memory-layer layouts.")
    parser.add_argument("--version", action="version",
                        version=f"hybridmem {__version__} (file formats v{FORMAT_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key = value run configuration")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.set_defaults(func=func)
        return p

    add("optimize", cmd_optimize, "solve for the best layout")
    ev = add("evaluate", cmd_evaluate, "evaluate a layout file")
    ev.add_argument("--layout", required=True, help="layout CSV (x,y,tech)")
    add("compare", cmd_compare, "compare reference layouts with the optimized one")
    add("gen-workload", cmd_gen_workload, "write a synthetic workload CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, WorkloadError, LayoutError, ProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
