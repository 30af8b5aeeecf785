"""Exact simulator and gadget-compilation toolkit for a physically
universal two-dimensional turmite."""

from .core import (MovingTapeConfig, SparseConfig, TurmiteDef, invert,
                   outer_border, run, step_head, step_tape)
from .machines import build_barM, build_M, sigma

__all__ = [
    "MovingTapeConfig",
    "SparseConfig",
    "TurmiteDef",
    "build_M",
    "build_barM",
    "invert",
    "outer_border",
    "run",
    "sigma",
    "step_head",
    "step_tape",
]
