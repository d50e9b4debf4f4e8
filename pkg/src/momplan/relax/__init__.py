"""Relaxed trajectory optimization: program assembly and refinement."""

from __future__ import annotations

from .assemble import build_convex_relaxation
from .layout import RelaxedLayout, TimeLinearization
from .refine import (IterationRecord, RefineResult, RefinementSettings,
                     SolveReport, add_soft_penalties, add_trust_regions,
                     dc_gaps, refine)

__all__ = [
    "IterationRecord", "RefineResult", "RefinementSettings", "RelaxedLayout",
    "SolveReport", "TimeLinearization", "add_soft_penalties",
    "add_trust_regions", "build_convex_relaxation", "dc_gaps", "refine",
]
