"""Solver invariants over generated problems."""

from fractions import Fraction

import numpy as np
from hypothesis import assume, given, settings, strategies as st

import oracles
from hybridmem.optimizer import (
    CountConstraints,
    DesignProblem,
    InfeasibleError,
    coordinate_cost,
    endurance_feasible,
    is_endurance_feasible,
    objective,
    solve_bnb,
    static_term,
    solve_bruteforce,
    solve_greedy,
)
from hybridmem.placement import BASELINE_KINDS, STTRAM, GridDims, LayoutError, baseline, counts
from hybridmem.workload import AccessMatrix

COUNT = st.one_of(st.just(0), st.integers(0, 2000), st.integers(0, 10**9))


@st.composite
def problems(draw, max_cells=9, constraints=True):
    cx = draw(st.integers(1, 3))
    cy = draw(st.integers(1, max(1, max_cells // cx)))
    cores = draw(st.integers(1, 3))
    n = cores * cx * cy
    reads = np.array(draw(st.lists(COUNT, min_size=n, max_size=n))).reshape(cores, cx, cy)
    writes = np.array(draw(st.lists(COUNT, min_size=n, max_size=n))).reshape(cores, cx, cy)
    cc = None
    if constraints and draw(st.booleans()):
        bound = st.one_of(st.none(), st.integers(0, cx * cy))
        cc = CountConstraints(draw(bound), draw(bound), draw(bound), draw(bound))
    return DesignProblem(
        GridDims(cx, cy), AccessMatrix(reads, writes),
        phi=draw(st.sampled_from([0.1, 0.25, 0.5, 1.0, 2.0, 4.0])),
        lines_per_bank=draw(st.sampled_from([2, 64, 65536])),
        count_constraints=cc,
    )


def _exact_cells(p):
    # weighted STT-RAM cost is defined as the float product phi * cost
    return [(Fraction(coordinate_cost(c, "edram", p)), Fraction(p.phi * coordinate_cost(c, STTRAM, p)))
            for c in p.grid.coords()]


@settings(max_examples=150, deadline=None)
@given(problems())
def test_solvers_match_exact_enumeration(p):
    cc = p.count_constraints
    feasible = [endurance_feasible(c, p) for c in p.grid.coords()]
    best, winners = oracles.enumerate_best(
        _exact_cells(p), feasible, 1,
        None if cc is None else cc.allows)
    if best is None:
        for solver in (solve_bnb, solve_bruteforce):
            try:
                solver(p)
            except InfeasibleError:
                continue
            raise AssertionError("expected infeasible")
        return
    for solver in (solve_bnb, solve_bruteforce) + ((solve_greedy,) if cc is None else ()):
        result = solver(p)
        assert tuple(result.layout.techs()) == min(winners)
        assert Fraction(result.objective_value) == Fraction(float(best))


@settings(max_examples=150, deadline=None)
@given(problems())
def test_no_sttram_on_worn_cells(p):
    try:
        result = solve_bnb(p)
    except InfeasibleError:
        return
    assert is_endurance_feasible(result.layout, p)
    for c in result.infeasible_sttram_coords:
        assert result.layout[c] != STTRAM


@settings(max_examples=100, deadline=None)
@given(problems(max_cells=16, constraints=False))
def test_dominates_feasible_baselines(p):
    result = solve_bnb(p)
    for kind in BASELINE_KINDS:
        try:
            layout = baseline(kind, p.grid)
        except LayoutError:
            continue
        if is_endurance_feasible(layout, p):
            assert result.objective_value <= objective(layout, p)


@settings(max_examples=100, deadline=None)
@given(problems(constraints=False))
def test_phi_monotone_nested(p):
    previous = None
    for phi in (0.1, 0.25, 0.5, 1.0, 2.0, 4.0):
        q = DesignProblem(p.grid, p.workload, phi=phi, lines_per_bank=p.lines_per_bank)
        chosen = solve_greedy(q).layout.sttram_coords()
        if previous is not None:
            assert chosen <= previous
        previous = chosen


@settings(max_examples=100, deadline=None)
@given(problems(constraints=False), st.sampled_from([2, 4, 1024]))
def test_scale_equivariance(p, k):
    assume(int(max(p.workload.reads.max(), p.workload.writes.max())) * k < 2**62)
    q = DesignProblem(p.grid, p.workload.scaled(k), phi=p.phi, lines_per_bank=p.lines_per_bank)
    static = {t: Fraction(static_term(t, p.techlib, p.static_mode)) for t in ("edram", STTRAM)}
    for c in p.grid.coords():
        for t in ("edram", STTRAM):
            dyn = Fraction(coordinate_cost(c, t, p)) - static[t]
            scaled = Fraction(coordinate_cost(c, t, q))
            # the two float paths each round once or twice
            assert abs(scaled - (k * dyn + static[t])) <= scaled * Fraction(1, 2**50)
    # choices whose dynamic margin dwarfs the static terms stay put
    a, b = solve_greedy(p).layout, solve_greedy(q).layout
    for c in p.grid.coords():
        margin = abs(Fraction(coordinate_cost(c, "edram", p))
                     - Fraction(p.phi) * Fraction(coordinate_cost(c, STTRAM, p)))
        same_wear = endurance_feasible(c, q) == endurance_feasible(c, p)
        if margin > 10**6 * (static["edram"] + static[STTRAM]) and same_wear:
            assert a[c] == b[c]


@settings(max_examples=100, deadline=None)
@given(problems(), st.randoms(use_true_random=False))
def test_core_permutation_invariance(p, rnd):
    order = list(range(p.cores))
    rnd.shuffle(order)
    q = DesignProblem(p.grid, p.workload.permute_cores(order), phi=p.phi,
                      lines_per_bank=p.lines_per_bank, count_constraints=p.count_constraints)
    for c in p.grid.coords():
        for t in ("edram", STTRAM):
            assert coordinate_cost(c, t, p) == coordinate_cost(c, t, q)
    try:
        a = solve_bnb(p)
    except InfeasibleError:
        return
    b = solve_bnb(q)
    assert a.layout == b.layout and a.objective_value == b.objective_value


@settings(max_examples=100, deadline=None)
@given(problems())
def test_counts_total(p):
    try:
        layout = solve_bnb(p).layout
    except InfeasibleError:
        return
    assert sum(counts(layout)) == p.grid.cells
