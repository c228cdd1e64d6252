"""Cross-user viewing similarity and edge-cache simulation for tiled 360 video."""

__version__ = "0.1.0"

from .arcs import Arc, ArcSet
from .bandwidth import Constant, Empirical, ThreeLevel
from .cachesim import HitRateCurve, SimConfig, run_simulation, sweep
from .chunking import DirectionalExtent, chunk_cover, chunk_extent, direction_change_bound
from .geometry import Direction, ViewportSpec, viewport_overlap
from .qoe import DEFAULT_LADDER, QualityLadder, UtilityParams, exhaustive_optimize, optimize_tiles
from .traces import HeadTrace, TraceSet, load_traces, parse_trace, sample_at, synthesize_trace

__all__ = [
    "Arc", "ArcSet", "Constant", "Empirical", "ThreeLevel", "HitRateCurve", "SimConfig",
    "run_simulation", "sweep", "DirectionalExtent", "chunk_cover", "chunk_extent",
    "direction_change_bound", "Direction", "ViewportSpec", "viewport_overlap", "DEFAULT_LADDER",
    "QualityLadder", "UtilityParams", "exhaustive_optimize", "optimize_tiles", "HeadTrace",
    "TraceSet", "load_traces", "parse_trace", "sample_at", "synthesize_trace",
]
