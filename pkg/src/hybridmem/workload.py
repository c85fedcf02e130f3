"""Per-(core, coordinate) read/write access counts.

Counts are indexed by the physical coordinate of the memory layer, not by
an abstract bank id, so the technology placed at a coordinate is what
prices the accesses that land there.
"""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

AGGREGATE_HEADER = "core,x,y,reads,writes"
EVENT_HEADER = "core,x,y,op"
PROFILE_KINDS = ("uniform", "read_heavy", "write_heavy", "hotspot")

# read fraction used when a profile does not set one
DEFAULT_READ_FRACTION = {
    "uniform": 0.5,
    "read_heavy": 0.9,
    "write_heavy": 0.3,
    "hotspot": 0.5,
}

_INT = re.compile(r"\d+")
_COUNT_LIMIT = 2**63 - 1

Coord = tuple[int, int]
Source = Union[str, os.PathLike, TextIO]


class WorkloadError(ValueError):
    pass


def row_major(cx: int, cy: int) -> list[Coord]:
    """Coordinates with y outer and x inner, the order used for all sums."""
    return [(x, y) for y in range(cy) for x in range(cx)]


@dataclass(frozen=True, eq=False)
class AccessMatrix:
    """Read and write counts, both shaped ``(cores, cx, cy)``."""

    reads: np.ndarray
    writes: np.ndarray

    def __post_init__(self):
        reads = np.array(self.reads, dtype=np.int64)
        writes = np.array(self.writes, dtype=np.int64)
        if reads.ndim != 3 or reads.shape != writes.shape:
            raise WorkloadError(
                f"reads/writes must share a (cores, cx, cy) shape, got {reads.shape} and {writes.shape}")
        if min(reads.shape) < 1:
            raise WorkloadError(f"empty dimension in shape {reads.shape}")
        if (reads < 0).any() or (writes < 0).any():
            raise WorkloadError("access counts must be non-negative")
        reads.setflags(write=False)
        writes.setflags(write=False)
        object.__setattr__(self, "reads", reads)
        object.__setattr__(self, "writes", writes)

    @classmethod
    def zeros(cls, cores: int, grid: Sequence[int]) -> AccessMatrix:
        shape = (cores, grid[0], grid[1])
        return cls(np.zeros(shape, np.int64), np.zeros(shape, np.int64))

    @property
    def cores(self) -> int:
        return self.reads.shape[0]

    @property
    def grid(self) -> tuple[int, int]:
        return self.reads.shape[1], self.reads.shape[2]

    def __eq__(self, other):
        if not isinstance(other, AccessMatrix):
            return NotImplemented
        return (self.reads.shape == other.reads.shape
                and np.array_equal(self.reads, other.reads)
                and np.array_equal(self.writes, other.writes))

    def __hash__(self):
        return hash((self.reads.tobytes(), self.writes.tobytes(), self.reads.shape))

    def total_reads(self) -> int:
        return int(self.reads.astype(object).sum())

    def total_writes(self) -> int:
        return int(self.writes.astype(object).sum())

    def scaled(self, k: int) -> AccessMatrix:
        return AccessMatrix(self.reads * k, self.writes * k)

    def permute_cores(self, order: Sequence[int]) -> AccessMatrix:
        idx = list(order)
        return AccessMatrix(self.reads[idx], self.writes[idx])


def totals_per_coordinate(m: AccessMatrix) -> dict[Coord, tuple[int, int]]:
    """Sum reads and writes over cores for every coordinate (row-major keys)."""
    # object dtype keeps the sums exact beyond int64
    reads = m.reads.astype(object).sum(axis=0)
    writes = m.writes.astype(object).sum(axis=0)
    cx, cy = m.grid
    return {(x, y): (int(reads[x, y]), int(writes[x, y])) for x, y in row_major(cx, cy)}


# ---------------------------------------------------------------- file I/O

def _open_lines(source: Source) -> list[str]:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", newline="") as fh:
            text = fh.read()
    return text.split("\n")


def _check_index(lineno: int, core: int, x: int, y: int, cores: int, grid: Sequence[int]):
    if not 0 <= core < cores:
        raise WorkloadError(f"line {lineno}: core {core} out of range (cores={cores})")
    if not (0 <= x < grid[0] and 0 <= y < grid[1]):
        raise WorkloadError(f"line {lineno}: coordinate ({x},{y}) out of range")


def _parse_fields(lineno: int, line: str, names: Sequence[str]) -> list[str]:
    fields = line.split(",")
    if len(fields) != len(names):
        raise WorkloadError(
            f"line {lineno}: expected {len(names)} fields ({','.join(names)}), got {len(fields)}")
    return [f.strip() for f in fields]


def _parse_int(lineno: int, name: str, text: str) -> int:
    if not _INT.fullmatch(text):
        raise WorkloadError(f"line {lineno}: field '{name}' is not a non-negative integer: {text!r}")
    value = int(text)
    if value > _COUNT_LIMIT:
        raise WorkloadError(f"line {lineno}: field '{name}' exceeds the 64-bit count limit")
    return value


def _body(lines: list[str], header: str) -> Iterable[tuple[int, str]]:
    if not lines or lines[0].strip() != header:
        got = lines[0].strip() if lines else ""
        raise WorkloadError(f"line 1: expected header '{header}', got {got!r}")
    for i, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if line.strip():
            yield i, line


def parse_aggregate(source: Source, cores: int, grid: Sequence[int]) -> AccessMatrix:
    """Read an aggregate ``core,x,y,reads,writes`` CSV. Duplicate keys are summed."""
    names = AGGREGATE_HEADER.split(",")
    shape = (cores, grid[0], grid[1])
    reads = np.zeros(shape, dtype=object)
    writes = np.zeros(shape, dtype=object)
    for lineno, line in _body(_open_lines(source), AGGREGATE_HEADER):
        fields = _parse_fields(lineno, line, names)
        core, x, y, r, w = (_parse_int(lineno, n, f) for n, f in zip(names, fields))
        _check_index(lineno, core, x, y, cores, grid)
        reads[core, x, y] += r
        writes[core, x, y] += w
    return _from_object_arrays(reads, writes)


def parse_events(source: Source, cores: int, grid: Sequence[int]) -> AccessMatrix:
    """Read a raw ``core,x,y,op`` event trace; each R or W event counts once."""
    names = EVENT_HEADER.split(",")
    shape = (cores, grid[0], grid[1])
    reads = np.zeros(shape, dtype=object)
    writes = np.zeros(shape, dtype=object)
    for lineno, line in _body(_open_lines(source), EVENT_HEADER):
        fields = _parse_fields(lineno, line, names)
        core, x, y = (_parse_int(lineno, n, f) for n, f in zip(names[:3], fields[:3]))
        _check_index(lineno, core, x, y, cores, grid)
        op = fields[3]
        if op == "R":
            reads[core, x, y] += 1
        elif op == "W":
            writes[core, x, y] += 1
        else:
            raise WorkloadError(f"line {lineno}: unknown op code {op!r} (expected R or W)")
    return _from_object_arrays(reads, writes)


def _from_object_arrays(reads, writes) -> AccessMatrix:
    if (reads > _COUNT_LIMIT).any() or (writes > _COUNT_LIMIT).any():
        raise WorkloadError("summed count exceeds the 64-bit count limit")
    return AccessMatrix(reads.astype(np.int64), writes.astype(np.int64))


def emit_aggregate(m: AccessMatrix) -> str:
    """Aggregate CSV text: one row per (core, coordinate), core outer, row-major inside."""
    out = io.StringIO()
    out.write(AGGREGATE_HEADER + "\n")
    cx, cy = m.grid
    for p in range(m.cores):
        for x, y in row_major(cx, cy):
            out.write(f"{p},{x},{y},{int(m.reads[p, x, y])},{int(m.writes[p, x, y])}\n")
    return out.getvalue()


# ---------------------------------------------------------------- synthesis

@dataclass(frozen=True)
class WorkloadProfile:
    kind: str = "uniform"
    total_accesses: int = 0
    read_fraction: float | None = None
    hotspot_coords: tuple[Coord, ...] = ()
    hotspot_share: float = 0.9
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hotspot_coords",
                           tuple((int(x), int(y)) for x, y in self.hotspot_coords))

    @property
    def effective_read_fraction(self) -> float:
        if self.read_fraction is None:
            return DEFAULT_READ_FRACTION.get(self.kind, 0.5)
        return self.read_fraction

    def violations(self) -> list[str]:
        out = []
        if self.kind not in PROFILE_KINDS:
            out.append(f"unknown workload kind {self.kind!r}")
        if self.total_accesses < 0:
            out.append("total_accesses must be >= 0")
        if self.total_accesses > _COUNT_LIMIT:
            out.append("total_accesses exceeds the 64-bit count limit")
        if not 0.0 <= self.effective_read_fraction <= 1.0:
            out.append("read_fraction must be in [0, 1]")
        if not 0.0 <= self.hotspot_share <= 1.0:
            out.append("hotspot_share must be in [0, 1]")
        if self.kind == "hotspot" and not self.hotspot_coords:
            out.append("hotspot workload requires hotspot coordinates")
        return out


def split_reads_writes(total: int, read_fraction: float) -> tuple[int, int]:
    reads = round(total * read_fraction)
    return reads, total - reads


def synthesize(profile: WorkloadProfile, cores: int, grid: Sequence[int]) -> AccessMatrix:
    """Generate a seeded synthetic access matrix.

    The total is met exactly: reads and writes are each drawn with a single
    multinomial over all (core, coordinate) cells.

    * ``uniform``: every cell equally likely.
    * ``read_heavy`` / ``write_heavy``: per-coordinate and per-core intensities
      drawn independently for reads and writes, so read/write ratios vary
      across the grid.
    * ``hotspot``: ``hotspot_share`` of the writes go to ``hotspot_coords``,
      the remaining writes to the other coordinates; reads are uniform.
    """
    problems = profile.violations()
    cx, cy = int(grid[0]), int(grid[1])
    for x, y in profile.hotspot_coords:
        if not (0 <= x < cx and 0 <= y < cy):
            problems.append(f"hotspot coordinate ({x},{y}) out of range")
    if problems:
        raise WorkloadError("; ".join(problems))

    rng = np.random.default_rng(profile.seed)
    n_reads, n_writes = split_reads_writes(profile.total_accesses, profile.effective_read_fraction)
    shape = (cores, cx, cy)
    uniform = np.full(shape, 1.0)

    if profile.kind in ("read_heavy", "write_heavy"):
        read_w = _intensity(rng, shape)
        write_w = _intensity(rng, shape)
        reads = _draw(rng, n_reads, read_w)
        writes = _draw(rng, n_writes, write_w)
    elif profile.kind == "hotspot":
        reads = _draw(rng, n_reads, uniform)
        hot = np.zeros((cx, cy), dtype=bool)
        for x, y in profile.hotspot_coords:
            hot[x, y] = True
        hot_w = np.broadcast_to(hot, shape).astype(float)
        n_hot = round(n_writes * profile.hotspot_share)
        if hot.all():
            n_hot = n_writes
        writes = _draw(rng, n_hot, hot_w) + _draw(rng, n_writes - n_hot, 1.0 - hot_w)
    else:
        reads = _draw(rng, n_reads, uniform)
        writes = _draw(rng, n_writes, uniform)
    return AccessMatrix(reads, writes)


def _intensity(rng: np.random.Generator, shape) -> np.ndarray:
    per_core = rng.gamma(2.0, size=shape[0])
    per_coord = rng.gamma(1.0, size=shape[1:])
    return per_core[:, None, None] * per_coord[None, :, :]


def _draw(rng: np.random.Generator, n: int, weights: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if n == 0 or weights.sum() == 0:
        return np.zeros(weights.shape, dtype=np.int64)
    p = (weights / weights.sum()).ravel()
    return rng.multinomial(n, p).reshape(weights.shape).astype(np.int64)
