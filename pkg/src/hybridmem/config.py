"""Line-oriented ``key = value`` run configuration.

``#`` starts a comment. Keys are dotted paths; unknown or repeated keys are
errors. Relative paths resolve against the directory of the config file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Mapping

from .evaluator import FAILURE_MODES, POWER_BUDGET_W
from .optimizer import (
    DEFAULT_LINES_PER_BANK,
    DEFAULT_MAX_BRUTE_CELLS,
    DEFAULT_PHI,
    SOLVER_MODES,
    CountConstraints,
    DesignProblem,
    StaticMode,
)
from .placement import GridDims
from .techlib import TechLibrary, library_from_config, validate
from .workload import (
    AccessMatrix,
    WorkloadProfile,
    parse_aggregate,
    parse_events,
    synthesize,
)


class ConfigError(ValueError):
    pass


PROFILE_KEYS = ("workload.kind", "workload.total_accesses", "workload.read_fraction",
                "workload.hotspot", "workload.hotspot_share", "workload.seed")
SOURCE_KEYS = ("workload.file", "workload.events", "workload.profile", "workload.suite")
KNOWN_KEYS = {
    "grid.cx", "grid.cy", "grid.bank_cells",
    "problem.cores", "problem.phi", "problem.lines_per_bank", "problem.static_mode",
    "problem.window_seconds", "problem.power_budget_w", "problem.failure_mode",
    "solver.mode", "solver.max_brute_cells",
    "constraint.min_edram", "constraint.max_edram",
    "constraint.min_sttram", "constraint.max_sttram",
    "output.dir",
    *PROFILE_KEYS, *SOURCE_KEYS,
}


def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{origin}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{origin}:{lineno}: duplicate key '{key}'")
        entries[key] = value
    return entries


def _data_dir():
    return resources.files("hybridmem") / "data"


def bundled_profile_names() -> list[str]:
    return sorted(p.name[:-4] for p in (_data_dir() / "profiles").iterdir()
                  if p.name.endswith(".cfg"))


def bundled_text(*parts: str) -> str:
    node = _data_dir()
    for p in parts:
        node = node / p
    return node.read_text()


# ---------------------------------------------------------------- value parsing

def _int(entries, key, default):
    if key not in entries:
        return default
    try:
        return int(entries[key])
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {entries[key]!r}") from None


def _real(entries, key, default):
    if key not in entries:
        return default
    try:
        return float(Decimal(entries[key]))
    except InvalidOperation:
        raise ConfigError(f"{key}: not a number: {entries[key]!r}") from None


def _choice(entries, key, default, choices):
    value = entries.get(key, default)
    if value not in choices:
        raise ConfigError(f"{key}: expected one of {', '.join(choices)}, got {value!r}")
    return value


def _coords(key: str, text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        try:
            x, y = (int(v) for v in item.split(","))
        except ValueError:
            raise ConfigError(f"{key}: expected 'x,y; x,y; ...', got {item!r}") from None
        out.append((x, y))
    return tuple(out)


def profile_from_entries(entries: Mapping[str, str]) -> WorkloadProfile:
    rf = _real(entries, "workload.read_fraction", None)
    profile = WorkloadProfile(
        kind=entries.get("workload.kind", "uniform"),
        total_accesses=_int(entries, "workload.total_accesses", 0),
        read_fraction=rf,
        hotspot_coords=_coords("workload.hotspot", entries.get("workload.hotspot", "")),
        hotspot_share=_real(entries, "workload.hotspot_share", 0.9),
        seed=_int(entries, "workload.seed", 0),
    )
    problems = profile.violations()
    if problems:
        raise ConfigError("invalid workload profile: " + "; ".join(problems))
    return profile


def profile_to_text(profile: WorkloadProfile) -> str:
    lines = [f"workload.kind = {profile.kind}",
             f"workload.total_accesses = {profile.total_accesses}"]
    if profile.read_fraction is not None:
        lines.append(f"workload.read_fraction = {profile.read_fraction!r}")
    if profile.hotspot_coords:
        lines.append("workload.hotspot = " + "; ".join(f"{x},{y}" for x, y in profile.hotspot_coords))
        lines.append(f"workload.hotspot_share = {profile.hotspot_share!r}")
    lines.append(f"workload.seed = {profile.seed}")
    return "\n".join(lines) + "\n"


def load_profile(ref: str, base_dir: Path) -> tuple[str, WorkloadProfile]:
    """Resolve a bundled profile name or a path to a profile file."""
    if ref in bundled_profile_names():
        text, origin, name = bundled_text("profiles", ref + ".cfg"), ref, ref
    else:
        path = base_dir / ref
        text, origin, name = path.read_text(), str(path), Path(ref).stem
    entries = parse_config_text(text, origin)
    unknown = sorted(set(entries) - set(PROFILE_KEYS))
    if unknown:
        raise ConfigError(f"{origin}: unknown profile key '{unknown[0]}'")
    return name, profile_from_entries(entries)


# ---------------------------------------------------------------- run config

@dataclass(frozen=True)
class WorkloadSource:
    name: str
    kind: str  # file | events | profile
    path: Path | None = None
    profile: WorkloadProfile | None = None

    def load(self, cores: int, grid: GridDims) -> AccessMatrix:
        if self.kind == "file":
            return parse_aggregate(self.path, cores, (grid.cx, grid.cy))
        if self.kind == "events":
            return parse_events(self.path, cores, (grid.cx, grid.cy))
        return synthesize(self.profile, cores, (grid.cx, grid.cy))


@dataclass(frozen=True)
class RunConfig:
    grid: GridDims = GridDims(4, 4)
    cores: int = 16
    phi: float = DEFAULT_PHI
    lines_per_bank: int = DEFAULT_LINES_PER_BANK
    static_mode: StaticMode = StaticMode()
    power_budget_w: float = POWER_BUDGET_W
    failure_mode: str = "half_lines"
    solver_mode: str = "bnb"
    max_brute_cells: int = DEFAULT_MAX_BRUTE_CELLS
    constraints: CountConstraints | None = None
    techlib: TechLibrary = field(default_factory=lambda: library_from_config({}))
    workload: WorkloadSource | None = None
    suite: tuple[WorkloadSource, ...] | None = None
    output_dir: Path = Path(".")

    def problem(self, workload: AccessMatrix) -> DesignProblem:
        return DesignProblem(grid=self.grid, workload=workload, techlib=self.techlib,
                             phi=self.phi, lines_per_bank=self.lines_per_bank,
                             count_constraints=self.constraints,
                             static_mode=self.static_mode, cores=self.cores)


def load_config(path: str | os.PathLike) -> RunConfig:
    path = Path(path)
    return config_from_entries(parse_config_text(path.read_text(), str(path)), path.parent)


def config_from_entries(entries: Mapping[str, str], base_dir: Path = Path(".")) -> RunConfig:
    tech_entries = {k: v for k, v in entries.items()
                    if k.startswith("tech.") or k.startswith("lib.")}
    for key in entries:
        if key not in KNOWN_KEYS and key not in tech_entries:
            raise ConfigError(f"unknown key '{key}'")
    try:
        techlib = library_from_config(tech_entries)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    problems = validate(techlib)
    if problems:
        raise ConfigError("invalid technology library: " + "; ".join(problems))

    if entries.get("grid.bank_cells", "1x1") != "1x1":
        raise ConfigError("grid.bank_cells: only single-cell (1x1) banks are supported")
    cx = _int(entries, "grid.cx", 4)
    cy = _int(entries, "grid.cy", 4)
    if cx < 1 or cy < 1:
        raise ConfigError(f"grid must be at least 1x1, got {cx}x{cy}")
    grid = GridDims(cx, cy)

    mode = _choice(entries, "problem.static_mode", "paper_literal", ("paper_literal", "time_window"))
    window = _real(entries, "problem.window_seconds", 0.0)
    if mode == "time_window" and "problem.window_seconds" not in entries:
        raise ConfigError("problem.window_seconds is required for time_window static mode")

    constraint_keys = ("min_edram", "max_edram", "min_sttram", "max_sttram")
    values = {k: _int(entries, f"constraint.{k}", None) for k in constraint_keys}
    constraints = CountConstraints(**values)

    cfg = RunConfig(
        grid=grid,
        cores=_int(entries, "problem.cores", grid.cells),
        phi=_real(entries, "problem.phi", DEFAULT_PHI),
        lines_per_bank=_int(entries, "problem.lines_per_bank", DEFAULT_LINES_PER_BANK),
        static_mode=StaticMode(mode, window),
        power_budget_w=_real(entries, "problem.power_budget_w", POWER_BUDGET_W),
        failure_mode=_choice(entries, "problem.failure_mode", "half_lines", FAILURE_MODES),
        solver_mode=_choice(entries, "solver.mode", "bnb", tuple(SOLVER_MODES)),
        max_brute_cells=_int(entries, "solver.max_brute_cells", DEFAULT_MAX_BRUTE_CELLS),
        constraints=None if constraints.is_empty() else constraints,
        techlib=techlib,
        workload=_workload_source(entries, base_dir),
        suite=_suite(entries, base_dir),
        output_dir=base_dir / entries.get("output.dir", "."),
    )
    if not cfg.phi > 0:
        raise ConfigError("problem.phi must be > 0")
    if cfg.lines_per_bank < 2:
        raise ConfigError("problem.lines_per_bank must be >= 2")
    if cfg.cores < 1:
        raise ConfigError("problem.cores must be >= 1")
    return cfg


def _workload_source(entries, base_dir: Path) -> WorkloadSource | None:
    given = [k for k in ("workload.file", "workload.events", "workload.profile") if k in entries]
    inline = any(k in entries for k in PROFILE_KEYS)
    if len(given) + inline > 1:
        raise ConfigError("configure only one of workload.file, workload.events, "
                          "workload.profile or inline workload.* profile keys")
    if "workload.file" in entries:
        ref = entries["workload.file"]
        return WorkloadSource(Path(ref).stem, "file", path=base_dir / ref)
    if "workload.events" in entries:
        ref = entries["workload.events"]
        return WorkloadSource(Path(ref).stem, "events", path=base_dir / ref)
    if "workload.profile" in entries:
        name, profile = load_profile(entries["workload.profile"], base_dir)
        return WorkloadSource(name, "profile", profile=profile)
    if inline:
        return WorkloadSource("workload", "profile", profile=profile_from_entries(entries))
    return None


def _suite(entries, base_dir: Path) -> tuple[WorkloadSource, ...] | None:
    if "workload.suite" not in entries:
        return None
    refs = [r.strip() for r in entries["workload.suite"].split(",") if r.strip()]
    if refs == ["bundled"]:
        refs = bundled_profile_names()
    out = []
    for ref in refs:
        name, profile = load_profile(ref, base_dir)
        out.append(WorkloadSource(name, "profile", profile=profile))
    return tuple(out)
