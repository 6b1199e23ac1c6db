"""Alias module: the theorem pipelines live in :mod:`narrowops.pipelines`."""

from .pipelines import (  # noqa: F401
    AbsContinuityResult,
    PipelineParams,
    PipelineReport,
    check_absolute_continuity,
    pairing_construction,
    sum_compact_locally_convex,
    sum_compact_via_truncation,
    sum_finite_rank,
)
