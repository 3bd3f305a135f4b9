"""Few-shot Gaussian classification heads, refinement loops and benchmarks."""

import json

from ._fewshot import (
    ClassStatistics,
    DimensionMismatch,
    EmptyClass,
    Error,
    InvalidConfig,
    InvalidPrior,
    NotPositiveDefinite,
    acquisition_scores,
    bregman_divergence,
    class_scores,
    classify,
    energy_gap,
    estimate_class_statistics,
    gmm_classify,
    gmm_em_refine,
    mean_ci95,
    metrics,
    refine,
    run_continual_session,
    sample_task,
)
from ._fewshot import _run_benchmark


def run_benchmark(methods=(), *, tasks=100, seed=0, dims=8, class_count=64, anisotropy=16.0,
                  separation=3.0, scale=1.0, center_offset=0.0, world_seed=0, way=None, shot=1,
                  query=10, beta=1.0, min_steps=2, max_steps=4, adapt=False):
    """Evaluates `methods` (default: every head) on one synthetic domain.

    `way=None` samples variable way/shot tasks; an integer fixes way and shot.
    Returns the report as a dict with "tasks", "summaries" and "ranks".
    """
    return json.loads(_run_benchmark(
        methods=list(methods), tasks=tasks, seed=seed, dims=dims, class_count=class_count,
        anisotropy=anisotropy, separation=separation, scale=scale, center_offset=center_offset,
        world_seed=world_seed, way=way, shot=shot, query=query, beta=beta, min_steps=min_steps,
        max_steps=max_steps, adapt=adapt))


__all__ = [
    "ClassStatistics", "DimensionMismatch", "EmptyClass", "Error", "InvalidConfig", "InvalidPrior",
    "NotPositiveDefinite", "acquisition_scores", "bregman_divergence", "class_scores", "classify",
    "energy_gap", "estimate_class_statistics", "gmm_classify", "gmm_em_refine", "mean_ci95", "metrics",
    "refine", "run_benchmark", "run_continual_session", "sample_task",
]
