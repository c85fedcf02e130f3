"""Physical (unweighted) metrics of a layout under a workload.

Energy here is plain joules: no ``phi`` weighting. The delay figure is a
serialized sum of access latencies, a proxy and not an IPC measurement.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Mapping, Sequence, Union

from .optimizer import (
    DEFAULT_LINES_PER_BANK,
    DesignProblem,
    ProblemError,
    StaticMode,
    coordinate_energy,
    objective,
)
from .placement import EDRAM, STTRAM, Layout, counts, validate_layout
from .techlib import TechLibrary
from .workload import AccessMatrix, Coord, totals_per_coordinate

POWER_BUDGET_W = 100.0
FAILURE_MODES = ("half_lines", "first_line")
REPORT_HEADER = ("layout,energy_j,energy_norm,static_power_w,delay_s,delay_norm,"
                 "edp_js,edp_norm,lifetime_iters,lifetime_norm,edram_count,"
                 "sttram_count,within_budget")
REFERENCE_LAYOUT = "baseline_edram"


@total_ordering
class _Unbounded:
    """Lifetime of a bank that is never written: larger than any count."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __str__(self):
        return "unbounded"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("unbounded")

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()
Lifetime = Union[int, _Unbounded]


def _check_grid(layout: Layout, workload: AccessMatrix) -> None:
    if workload.grid != (layout.grid.cx, layout.grid.cy):
        raise ProblemError(f"layout grid {layout.grid} does not match workload grid {workload.grid}")
    problems = validate_layout(layout)
    if problems:
        raise ProblemError("; ".join(problems))


def total_energy(layout: Layout, workload: AccessMatrix, techlib: TechLibrary,
                 static_mode: StaticMode = StaticMode()) -> float:
    _check_grid(layout, workload)
    totals = totals_per_coordinate(workload)
    return math.fsum(coordinate_energy(r, w, layout[c], techlib, static_mode)
                     for c, (r, w) in totals.items())


def static_power(layout: Layout, techlib: TechLibrary,
                 budget_watts: float = POWER_BUDGET_W) -> tuple[float, bool]:
    """Summed per-bank leakage in watts and whether it fits the power budget."""
    watts = math.fsum(techlib.bank_static_power(layout[c]) for c in layout.grid.coords())
    return watts, watts <= budget_watts


def delay_proxy(layout: Layout, workload: AccessMatrix, techlib: TechLibrary) -> float:
    _check_grid(layout, workload)
    totals = totals_per_coordinate(workload)
    terms = []
    for c, (r, w) in totals.items():
        t = techlib[layout[c]]
        terms.append(float(r) * t.read_latency + float(w) * t.write_latency)
    return math.fsum(terms)


def edp(layout: Layout, workload: AccessMatrix, techlib: TechLibrary,
        static_mode: StaticMode = StaticMode()) -> float:
    return total_energy(layout, workload, techlib, static_mode) * delay_proxy(layout, workload, techlib)


def bank_lifetime(writes_per_iteration: int, endurance: float, lines_per_bank: int,
                  failure_mode: str = "half_lines") -> Lifetime:
    """Whole iterations until the bank fails under worst-case line wear.

    ``half_lines`` fails once half of the lines are worn out;
    ``first_line`` fails at the first worn line.
    """
    if failure_mode == "half_lines":
        budget = Fraction(lines_per_bank, 2) * Fraction(endurance)
    elif failure_mode == "first_line":
        budget = Fraction(endurance)
    else:
        raise ValueError(f"unknown failure mode {failure_mode!r}")
    if writes_per_iteration == 0:
        return UNBOUNDED
    return math.floor(budget / writes_per_iteration)


def lifetime(layout: Layout, workload_per_iteration: AccessMatrix, techlib: TechLibrary,
             lines_per_bank: int = DEFAULT_LINES_PER_BANK,
             failure_mode: str = "half_lines") -> tuple[dict[Coord, Lifetime], Lifetime]:
    """Per-bank lifetimes (row-major) and the system lifetime, their minimum."""
    _check_grid(layout, workload_per_iteration)
    per_bank = {}
    for c, (_, w) in totals_per_coordinate(workload_per_iteration).items():
        per_bank[c] = bank_lifetime(w, techlib[layout[c]].line_endurance,
                                    lines_per_bank, failure_mode)
    return per_bank, min(per_bank.values())


@dataclass(frozen=True)
class EvaluationReport:
    energy_joules: float
    static_power_watts: float
    within_power_budget: bool
    delay_seconds: float
    edp_joule_seconds: float
    bank_lifetimes: Mapping[Coord, Lifetime]
    system_lifetime: Lifetime
    edram_count: int
    sttram_count: int
    per_technology_breakdown: Mapping[str, Mapping[str, float]] = field(default_factory=dict)


def evaluate(layout: Layout, workload: AccessMatrix, techlib: TechLibrary,
             static_mode: StaticMode = StaticMode(),
             lines_per_bank: int = DEFAULT_LINES_PER_BANK,
             failure_mode: str = "half_lines",
             budget_watts: float = POWER_BUDGET_W) -> EvaluationReport:
    energy = total_energy(layout, workload, techlib, static_mode)
    delay = delay_proxy(layout, workload, techlib)
    watts, ok = static_power(layout, techlib, budget_watts)
    per_bank, system = lifetime(layout, workload, techlib, lines_per_bank, failure_mode)
    n_dr, n_st = counts(layout)

    totals = totals_per_coordinate(workload)
    breakdown = {}
    for tech, n in ((EDRAM, n_dr), (STTRAM, n_st)):
        e = math.fsum(coordinate_energy(r, w, tech, techlib, static_mode)
                      for c, (r, w) in totals.items() if layout[c] == tech)
        breakdown[tech] = {"count": n, "energy_joules": e}

    return EvaluationReport(
        energy_joules=energy,
        static_power_watts=watts,
        within_power_budget=ok,
        delay_seconds=delay,
        edp_joule_seconds=energy * delay,
        bank_lifetimes=per_bank,
        system_lifetime=system,
        edram_count=n_dr,
        sttram_count=n_st,
        per_technology_breakdown=breakdown,
    )


# ---------------------------------------------------------------- comparison

def _ratio(value: float, reference: float) -> float:
    if reference == 0:
        return 1.0 if value == 0 else math.inf
    return value / reference


def lifetime_ratio(value: Lifetime, reference: Lifetime) -> float | _Unbounded:
    if value is UNBOUNDED:
        return 1.0 if reference is UNBOUNDED else UNBOUNDED
    if reference is UNBOUNDED:
        return 0.0
    if reference == 0:
        return 1.0 if value == 0 else UNBOUNDED
    return float(Fraction(value, reference))


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    report: EvaluationReport
    objective: float
    normalized: bool
    energy_norm: float | None = None
    delay_norm: float | None = None
    edp_norm: float | None = None
    lifetime_norm: float | _Unbounded | None = None
    objective_norm: float | None = None


def compare(layouts: Sequence[tuple[str, Layout]], workload: AccessMatrix,
            problem: DesignProblem, failure_mode: str = "half_lines",
            budget_watts: float = POWER_BUDGET_W) -> list[ComparisonRow]:
    """Evaluate every named layout; normalize to ``baseline_edram`` when present.

    ``objective`` is the phi-weighted score the optimizer minimizes, kept next
    to the physical energy so the two are never confused. Rows keep input order.
    """
    grids = {layout.grid for _, layout in layouts}
    if len(grids) > 1:
        raise ProblemError("all layouts must share one grid")
    evaluated = []
    for name, layout in layouts:
        report = evaluate(layout, workload, problem.techlib, problem.static_mode,
                          problem.lines_per_bank, failure_mode, budget_watts)
        evaluated.append((name, report, objective(layout, problem)))

    ref = next(((r, o) for name, r, o in evaluated if name == REFERENCE_LAYOUT), None)
    rows = []
    for name, report, obj in evaluated:
        if ref is None:
            rows.append(ComparisonRow(name, report, obj, normalized=False))
            continue
        ref_report, ref_obj = ref
        rows.append(ComparisonRow(
            name, report, obj, normalized=True,
            energy_norm=_ratio(report.energy_joules, ref_report.energy_joules),
            delay_norm=_ratio(report.delay_seconds, ref_report.delay_seconds),
            edp_norm=_ratio(report.edp_joule_seconds, ref_report.edp_joule_seconds),
            lifetime_norm=lifetime_ratio(report.system_lifetime, ref_report.system_lifetime),
            objective_norm=_ratio(obj, ref_obj),
        ))
    return rows


def fmt_real(value) -> str:
    if value is None:
        return ""
    if value is UNBOUNDED:
        return "unbounded"
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def report_csv(rows: Sequence[ComparisonRow]) -> str:
    out = io.StringIO()
    out.write(REPORT_HEADER + "\n")
    for row in rows:
        r = row.report
        fields = [
            row.name,
            fmt_real(r.energy_joules), fmt_real(row.energy_norm),
            fmt_real(r.static_power_watts),
            fmt_real(r.delay_seconds), fmt_real(row.delay_norm),
            fmt_real(r.edp_joule_seconds), fmt_real(row.edp_norm),
            fmt_real(r.system_lifetime), fmt_real(row.lifetime_norm),
            str(r.edram_count), str(r.sttram_count),
            "true" if r.within_power_budget else "false",
        ]
        out.write(",".join(fields) + "\n")
    return out.getvalue()
