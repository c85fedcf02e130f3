"""Weighted-energy placement of eDRAM and STT-RAM banks.

The objective is separable across coordinates: each cell pays the energy of
whichever technology it holds, with the STT-RAM side multiplied by ``phi``.
An STT-RAM bank is only allowed where its aggregate write traffic, assumed
concentrated line by line, would wear out fewer than half of its lines.

Search is done on exact integer images of the float per-cell costs, so all
three solvers agree on the optimum exactly, and the reported objective is
the correctly rounded sum (``math.fsum``) of the chosen float costs, which
does not depend on accumulation order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping

from .placement import EDRAM, STTRAM, GridDims, Layout, validate_layout
from .techlib import TechLibrary, default_library, validate
from .workload import AccessMatrix, Coord, totals_per_coordinate

DEFAULT_PHI = 0.5
# 4 MB bank / 64 B line
DEFAULT_LINES_PER_BANK = 4 * 1024 * 1024 // 64
DEFAULT_MAX_BRUTE_CELLS = 20
SOLVERS = ("brute_force", "greedy", "branch_and_bound")


class ProblemError(ValueError):
    pass


class InfeasibleError(Exception):
    """No layout satisfies the count constraints together with endurance."""


@dataclass(frozen=True)
class StaticMode:
    """How the per-bank static term is charged.

    ``paper_literal`` charges static power over one read plus one write
    latency per bank; ``time_window`` charges static power over a fixed
    window in seconds.
    """

    kind: str = "paper_literal"
    window_seconds: float = 0.0

    def __post_init__(self):
        if self.kind not in ("paper_literal", "time_window"):
            raise ProblemError(f"unknown static mode {self.kind!r}")
        if self.kind == "time_window" and not self.window_seconds >= 0:
            raise ProblemError("window_seconds must be >= 0")


@dataclass(frozen=True)
class CountConstraints:
    min_edram: int | None = None
    max_edram: int | None = None
    min_sttram: int | None = None
    max_sttram: int | None = None

    def is_empty(self) -> bool:
        return all(v is None for v in (self.min_edram, self.max_edram,
                                       self.min_sttram, self.max_sttram))

    def edram_range(self, cells: int) -> tuple[int, int]:
        """Inclusive bounds on the eDRAM count implied by all four limits."""
        lo = max(self.min_edram or 0, cells - _or(self.max_sttram, cells))
        hi = min(_or(self.max_edram, cells), cells - (self.min_sttram or 0))
        return lo, hi

    def contradictions(self, cells: int) -> list[str]:
        out = []
        for name in ("min_edram", "max_edram", "min_sttram", "max_sttram"):
            v = getattr(self, name)
            if v is not None and v < 0:
                out.append(f"{name} < 0")
            if v is not None and name.startswith("min") and v > cells:
                out.append(f"{name} > cells={cells}")
        if _both(self.min_edram, self.max_edram) and self.min_edram > self.max_edram:
            out.append("min_edram > max_edram")
        if _both(self.min_sttram, self.max_sttram) and self.min_sttram > self.max_sttram:
            out.append("min_sttram > max_sttram")
        if (self.min_edram or 0) + (self.min_sttram or 0) > cells:
            out.append(f"min_edram + min_sttram > cells={cells}")
        if _both(self.max_edram, self.max_sttram) and self.max_edram + self.max_sttram < cells:
            out.append(f"max_edram + max_sttram < cells={cells}")
        if not out:
            lo, hi = self.edram_range(cells)
            if lo > hi:
                out.append(f"no eDRAM count in [{lo}, {hi}]")
        return out

    def allows(self, edram: int, sttram: int) -> bool:
        return ((self.min_edram is None or edram >= self.min_edram)
                and (self.max_edram is None or edram <= self.max_edram)
                and (self.min_sttram is None or sttram >= self.min_sttram)
                and (self.max_sttram is None or sttram <= self.max_sttram))


def _or(v, default):
    return default if v is None else v


def _both(a, b):
    return a is not None and b is not None


@dataclass(frozen=True)
class DesignProblem:
    grid: GridDims
    workload: AccessMatrix
    techlib: TechLibrary = field(default_factory=default_library)
    phi: float = DEFAULT_PHI
    lines_per_bank: int = DEFAULT_LINES_PER_BANK
    count_constraints: CountConstraints | None = None
    static_mode: StaticMode = field(default_factory=StaticMode)
    cores: int | None = None

    def __post_init__(self):
        if self.cores is None:
            object.__setattr__(self, "cores", self.workload.cores)
        problems = []
        if not self.phi > 0:
            problems.append("phi must be > 0")
        if self.lines_per_bank < 2:
            problems.append("lines_per_bank must be >= 2")
        if self.workload.grid != (self.grid.cx, self.grid.cy):
            problems.append(f"workload grid {self.workload.grid} does not match problem grid {self.grid}")
        if self.workload.cores != self.cores:
            problems.append(f"workload has {self.workload.cores} cores, problem has {self.cores}")
        problems.extend(validate(self.techlib))
        if problems:
            raise ProblemError("; ".join(problems))
        if self.count_constraints is not None and self.count_constraints.is_empty():
            object.__setattr__(self, "count_constraints", None)

    @cached_property
    def totals(self) -> dict[Coord, tuple[int, int]]:
        return totals_per_coordinate(self.workload)

    @cached_property
    def _costs(self) -> dict[Coord, tuple[float, float]]:
        return {c: (coordinate_energy(r, w, EDRAM, self.techlib, self.static_mode),
                    coordinate_energy(r, w, STTRAM, self.techlib, self.static_mode))
                for c, (r, w) in self.totals.items()}

    @cached_property
    def _feasible(self) -> dict[Coord, bool]:
        endurance = self.techlib[STTRAM].line_endurance
        return {c: _wear_ok(w, endurance, self.lines_per_bank)
                for c, (_, w) in self.totals.items()}


@dataclass(frozen=True)
class SolveResult:
    layout: Layout
    objective_value: float
    per_coordinate_costs: Mapping[Coord, Mapping[str, float]]
    infeasible_sttram_coords: tuple[Coord, ...]
    solver: str
    nodes_explored: int = 0


# ---------------------------------------------------------------- costs

def static_term(tech: str, techlib: TechLibrary, static_mode: StaticMode) -> float:
    if static_mode.kind == "time_window":
        return techlib.bank_static_power(tech) * static_mode.window_seconds
    return techlib.static_energy(tech)


def coordinate_energy(reads: int, writes: int, tech: str, techlib: TechLibrary,
                      static_mode: StaticMode) -> float:
    """Unweighted static + dynamic energy of one bank serving the given totals."""
    params = techlib[tech]
    dynamic = float(reads) * params.read_energy + float(writes) * params.write_energy
    return static_term(tech, techlib, static_mode) + dynamic


def coordinate_cost(coord: Coord, tech: str, problem: DesignProblem) -> float:
    dr, st = problem._costs[coord]
    return dr if tech == EDRAM else st


def weighted_cost(coord: Coord, tech: str, problem: DesignProblem) -> float:
    cost = coordinate_cost(coord, tech, problem)
    return problem.phi * cost if tech == STTRAM else cost


def _wear_ok(writes: int, endurance: float, lines: int) -> bool:
    # exact rational comparison: writes / endurance < lines / 2
    return Fraction(writes) / Fraction(endurance) < Fraction(lines, 2)


def endurance_feasible(coord: Coord, problem: DesignProblem) -> bool:
    """Whether an STT-RAM bank at ``coord`` keeps more than half its lines alive."""
    return problem._feasible[coord]


def infeasible_sttram_coords(problem: DesignProblem) -> tuple[Coord, ...]:
    return tuple(c for c in problem.grid.coords() if not problem._feasible[c])


def objective(layout: Layout, problem: DesignProblem) -> float:
    """Weighted objective of an arbitrary layout; endurance is not checked here."""
    if layout.grid != problem.grid:
        raise ProblemError(f"layout grid {layout.grid} does not match problem grid {problem.grid}")
    problems = validate_layout(layout)
    if problems:
        raise ProblemError("; ".join(problems))
    return math.fsum(weighted_cost(c, layout[c], problem) for c in problem.grid.coords())


def endurance_violations(layout: Layout, problem: DesignProblem) -> list[Coord]:
    return [c for c in problem.grid.coords()
            if layout[c] == STTRAM and not problem._feasible[c]]


def is_endurance_feasible(layout: Layout, problem: DesignProblem) -> bool:
    return not endurance_violations(layout, problem)


def _exact_units(values: list[float]) -> list[int]:
    """Integers proportional to the given finite floats, with no rounding."""
    fracs = [Fraction(v) for v in values]
    scale = max(f.denominator for f in fracs) if fracs else 1
    return [f.numerator * (scale // f.denominator) for f in fracs]


def _weighted_table(problem: DesignProblem):
    coords = problem.grid.coords()
    dr = [weighted_cost(c, EDRAM, problem) for c in coords]
    st = [weighted_cost(c, STTRAM, problem) for c in coords]
    ok = [problem._feasible[c] for c in coords]
    units = _exact_units(dr + st)
    return coords, dr, st, ok, units[:len(coords)], units[len(coords):]


def _result(problem: DesignProblem, techs: list[str], solver: str, nodes: int = 0) -> SolveResult:
    layout = Layout.from_techs(problem.grid, techs)
    table = {c: {EDRAM: weighted_cost(c, EDRAM, problem),
                 STTRAM: weighted_cost(c, STTRAM, problem)}
             for c in problem.grid.coords()}
    return SolveResult(layout=layout,
                       objective_value=objective(layout, problem),
                       per_coordinate_costs=table,
                       infeasible_sttram_coords=infeasible_sttram_coords(problem),
                       solver=solver,
                       nodes_explored=nodes)


def _check_constraints(problem: DesignProblem) -> None:
    cc = problem.count_constraints
    if cc is not None:
        reasons = cc.contradictions(problem.grid.cells)
        if reasons:
            raise InfeasibleError("; ".join(reasons))


# ---------------------------------------------------------------- solvers

def solve_bruteforce(problem: DesignProblem,
                     max_cells: int = DEFAULT_MAX_BRUTE_CELLS) -> SolveResult:
    """Enumerate every assignment and keep the cheapest feasible one.

    Assignments are visited in lexicographic row-major order with eDRAM
    before STT-RAM, and only a strictly cheaper one replaces the incumbent,
    so exact ties resolve toward eDRAM at the earliest differing cell.
    """
    n = problem.grid.cells
    if n > max_cells:
        raise ProblemError(f"brute force is capped at {max_cells} cells, grid has {n}")
    _check_constraints(problem)
    cc = problem.count_constraints
    _, _, _, ok, dr, st = _weighted_table(problem)

    best = None
    best_total = None
    for choice in itertools.product((0, 1), repeat=n):
        if any(c and not f for c, f in zip(choice, ok)):
            continue
        n_st = sum(choice)
        if cc is not None and not cc.allows(n - n_st, n_st):
            continue
        total = sum(s if c else d for c, d, s in zip(choice, dr, st))
        if best_total is None or total < best_total:
            best, best_total = choice, total
    if best is None:
        raise InfeasibleError("no assignment satisfies the count and endurance constraints")
    return _result(problem, [STTRAM if c else EDRAM for c in best], "brute_force")


def solve_greedy(problem: DesignProblem) -> SolveResult:
    """Pick the cheaper feasible technology cell by cell (ties go to eDRAM)."""
    if problem.count_constraints is not None:
        raise ProblemError("greedy solver does not handle count constraints; use branch-and-bound")
    techs = []
    for c in problem.grid.coords():
        st_better = weighted_cost(c, STTRAM, problem) < weighted_cost(c, EDRAM, problem)
        techs.append(STTRAM if st_better and problem._feasible[c] else EDRAM)
    return _result(problem, techs, "greedy")


def solve_bnb(problem: DesignProblem) -> SolveResult:
    """Depth-first branch-and-bound honouring count constraints.

    Cells are branched in order of decreasing cost gap between the two
    technologies. The bound adds, to the sum of each open cell's cheapest
    feasible cost, the smallest surcharges needed to meet the remaining
    minimum eDRAM and STT-RAM counts. Costs carry a low-order row-major
    tag so the optimum is unique and matches the brute-force tie-break.
    """
    _check_constraints(problem)
    n = problem.grid.cells
    cc = problem.count_constraints or CountConstraints()
    lo, hi = cc.edram_range(n)
    _, _, _, ok, dr_units, st_units = _weighted_table(problem)

    # cost in the high bits, sttram row-major mask in the low n bits
    INF = None
    pdr = [d << n for d in dr_units]
    pst = [(s << n) + (1 << (n - 1 - i)) if ok[i] else INF
           for i, s in enumerate(st_units)]

    def gap(i):
        return (0, i) if pst[i] is INF else (1, -abs(pdr[i] - pst[i]), i)

    order = sorted(range(n), key=gap)
    mins = [pdr[i] if pst[i] is INF else min(pdr[i], pst[i]) for i in order]
    suffix = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + mins[k]

    best_key = None
    best_choice = None
    nodes = 0
    choice = [0] * n

    def bound(k: int, n_dr: int, n_st: int):
        remaining = n - k
        need_dr = max(0, lo - n_dr)
        need_st = max(0, (n - hi) - n_st)
        if need_dr + need_st > remaining:
            return None
        extra = 0
        if need_dr:
            extra += sum(sorted(pdr[order[j]] - mins[j] for j in range(k, n))[:need_dr])
        if need_st:
            pen = sorted(pst[order[j]] - mins[j] for j in range(k, n) if pst[order[j]] is not INF)
            if len(pen) < need_st:
                return None
            extra += sum(pen[:need_st])
        return suffix[k] + extra

    def dfs(k: int, n_dr: int, n_st: int, partial: int):
        nonlocal best_key, best_choice, nodes
        nodes += 1
        if k == n:
            if lo <= n_dr <= hi and (best_key is None or partial < best_key):
                best_key, best_choice = partial, list(choice)
            return
        b = bound(k, n_dr, n_st)
        if b is None or (best_key is not None and partial + b >= best_key):
            return
        i = order[k]
        options = [(pdr[i], 0)]
        if pst[i] is not INF:
            options.append((pst[i], 1))
        options.sort()
        for cost, st in options:
            if (st and n_st + 1 > n - lo) or (not st and n_dr + 1 > hi):
                continue
            choice[i] = st
            dfs(k + 1, n_dr + (1 - st), n_st + st, partial + cost)
        choice[i] = 0

    dfs(0, 0, 0, 0)
    if best_choice is None:
        raise InfeasibleError("no assignment satisfies the count and endurance constraints")
    return _result(problem, [STTRAM if s else EDRAM for s in best_choice],
                   "branch_and_bound", nodes)


SOLVER_MODES = {
    "brute": solve_bruteforce,
    "greedy": solve_greedy,
    "bnb": solve_bnb,
}


def solve(problem: DesignProblem, mode: str = "bnb",
          max_brute_cells: int = DEFAULT_MAX_BRUTE_CELLS) -> SolveResult:
    if mode == "brute":
        return solve_bruteforce(problem, max_cells=max_brute_cells)
    if mode not in SOLVER_MODES:
        raise ProblemError(f"unknown solver mode {mode!r}")
    return SOLVER_MODES[mode](problem)
