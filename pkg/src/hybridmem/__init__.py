"""Placement of eDRAM and STT-RAM banks on a 3D-stacked memory layer."""

__version__ = "0.1.0"
FORMAT_VERSION = 1

from .techlib import TechLibrary, TechnologyParams, default_library  # noqa: E402
from .workload import AccessMatrix, WorkloadProfile, synthesize  # noqa: E402
from .placement import GridDims, Layout, baseline  # noqa: E402
from .optimizer import (  # noqa: E402
    CountConstraints,
    DesignProblem,
    InfeasibleError,
    StaticMode,
    solve,
    solve_bnb,
    solve_bruteforce,
    solve_greedy,
)
from .evaluator import UNBOUNDED, compare, evaluate  # noqa: E402
