"""Memory-layer layouts: which technology sits at each grid coordinate.

Banks have the same footprint as cores, so every bank occupies exactly one
cell and the occupancy maps coincide with the placement indicators.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from .workload import Coord, Source, row_major

EDRAM = "edram"
STTRAM = "sttram"
TECHS = (EDRAM, STTRAM)
MEMORY_LAYER = 2

LAYOUT_HEADER = "x,y,tech"
BASELINE_KINDS = ("baseline_edram", "baseline_sttram", "hybrid_symmetric", "edram_centric")


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class GridDims:
    cx: int
    cy: int

    def __post_init__(self):
        if self.cx < 1 or self.cy < 1:
            raise LayoutError(f"grid dimensions must be >= 1, got {self.cx}x{self.cy}")

    @property
    def cells(self) -> int:
        return self.cx * self.cy

    def coords(self) -> list[Coord]:
        return row_major(self.cx, self.cy)

    def __contains__(self, coord) -> bool:
        x, y = coord
        return 0 <= x < self.cx and 0 <= y < self.cy

    def __str__(self):
        return f"{self.cx}x{self.cy}"


@dataclass(frozen=True)
class Layout:
    grid: GridDims
    assignment: Mapping[Coord, str]
    layer: int = MEMORY_LAYER

    def __post_init__(self):
        object.__setattr__(self, "assignment", MappingProxyType(dict(self.assignment)))

    @classmethod
    def from_techs(cls, grid: GridDims, techs: Iterable[str]) -> Layout:
        """Build from a row-major sequence of technology names."""
        techs = list(techs)
        if len(techs) != grid.cells:
            raise LayoutError(f"expected {grid.cells} technologies, got {len(techs)}")
        return cls(grid, dict(zip(grid.coords(), techs)))

    def techs(self) -> list[str]:
        return [self.assignment[c] for c in self.grid.coords()]

    def __getitem__(self, coord: Coord) -> str:
        return self.assignment[coord]

    def __eq__(self, other):
        if not isinstance(other, Layout):
            return NotImplemented
        return (self.grid == other.grid and self.layer == other.layer
                and dict(self.assignment) == dict(other.assignment))

    def __hash__(self):
        return hash((self.grid, self.layer, tuple(sorted(self.assignment.items()))))

    def sttram_coords(self) -> frozenset[Coord]:
        return frozenset(c for c, t in self.assignment.items() if t == STTRAM)


def baseline(kind: str, grid: GridDims) -> Layout:
    """One of the four reference layouts.

    ``hybrid_symmetric`` is a checkerboard with eDRAM at (0, 0);
    ``edram_centric`` puts eDRAM in the middle 2x2 block of a 4x4 grid.
    """
    if kind == "baseline_edram":
        return Layout.from_techs(grid, [EDRAM] * grid.cells)
    if kind == "baseline_sttram":
        return Layout.from_techs(grid, [STTRAM] * grid.cells)
    if kind == "hybrid_symmetric":
        if grid.cells % 2:
            raise LayoutError(f"hybrid_symmetric needs an even number of cells, grid is {grid}")
        return Layout(grid, {(x, y): EDRAM if (x + y) % 2 == 0 else STTRAM
                             for x, y in grid.coords()})
    if kind == "edram_centric":
        if (grid.cx, grid.cy) != (4, 4):
            raise LayoutError(f"edram_centric is defined for a 4x4 grid only, grid is {grid}")
        middle = {(1, 1), (1, 2), (2, 1), (2, 2)}
        return Layout(grid, {c: EDRAM if c in middle else STTRAM for c in grid.coords()})
    raise LayoutError(f"unknown baseline kind {kind!r}")


def validate_layout(layout: Layout) -> list[str]:
    """List every violated layout invariant; empty means valid."""
    out = []
    grid = layout.grid
    for coord, tech in layout.assignment.items():
        if coord not in grid:
            out.append(f"coordinate {_fmt(coord)} outside {grid} grid")
        elif tech not in TECHS:
            out.append(f"coordinate {_fmt(coord)} has unknown technology {tech!r}")
    for coord in grid.coords():
        if coord not in layout.assignment:
            out.append(f"coordinate {_fmt(coord)} unassigned")
    banks = sum(1 for c, t in layout.assignment.items() if c in grid and t in TECHS)
    if banks != grid.cells:
        out.append(f"bank count {banks} != P={grid.cells}")
    if layout.layer != MEMORY_LAYER:
        out.append(f"layer {layout.layer} != {MEMORY_LAYER}")
    return out


def counts(layout: Layout) -> tuple[int, int]:
    """(edram_count, sttram_count)."""
    techs = list(layout.assignment.values())
    return techs.count(EDRAM), techs.count(STTRAM)


def _fmt(coord: Coord) -> str:
    return f"({coord[0]},{coord[1]})"


def emit_layout(layout: Layout) -> str:
    out = io.StringIO()
    out.write(LAYOUT_HEADER + "\n")
    for x, y in layout.grid.coords():
        out.write(f"{x},{y},{layout.assignment[(x, y)]}\n")
    return out.getvalue()


def parse_layout(source: Source, grid: GridDims) -> Layout:
    """Read a ``x,y,tech`` layout file and validate it against ``grid``.

    Raises ``LayoutError`` naming the offending line or coordinate.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", newline="") as fh:
            text = fh.read()
    lines = text.split("\n")
    if not lines or lines[0].strip() != LAYOUT_HEADER:
        raise LayoutError(f"line 1: expected header '{LAYOUT_HEADER}'")
    assignment: dict[Coord, str] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 3:
            raise LayoutError(f"line {lineno}: expected 3 fields (x,y,tech)")
        try:
            coord = (int(fields[0]), int(fields[1]))
        except ValueError:
            raise LayoutError(f"line {lineno}: coordinates must be integers") from None
        if fields[2] not in TECHS:
            raise LayoutError(f"line {lineno}: unknown technology {fields[2]!r}")
        if coord in assignment:
            raise LayoutError(f"line {lineno}: coordinate {_fmt(coord)} mapped more than once")
        assignment[coord] = fields[2]
    layout = Layout(grid, assignment)
    problems = validate_layout(layout)
    if problems:
        raise LayoutError("; ".join(problems))
    return layout
