"""Sketched robust square-root LASSO."""

import json

from . import _core
from ._core import (
    DualPoint,
    InputError,
    NumericalError,
    ReducedProblem,
    Sketch,
    Solution,
    cardinality_reduce,
    dual_certificate,
    dual_value,
    load_libsvm,
    load_sketch,
    power_sketch,
    reduce,
    screen,
    sketch_error,
    solve_full,
    solve_instance,
    solve_reduced,
)

SCHEMA_VERSION = _core.SCHEMA_VERSION


def cross_validate(X, y, k, folds, lambdas, eps=0.0, **cfg):
    """K-fold CV report as a dict; k = 0 runs the full model."""
    return json.loads(_core.cross_validate_json(X, y, k, folds, list(lambdas), eps, **cfg))


def sparsity_profile(X, y, k, lambdas, robust=True, eps=0.0, **cfg):
    return json.loads(_core.sparsity_profile_json(X, y, robust, k, eps, list(lambdas), **cfg))


def bench(sizes, k=25, repetitions=1, seed=0, run_full=True):
    return json.loads(_core.bench_json(list(sizes), k, repetitions, seed, run_full))


__all__ = [
    "DualPoint",
    "InputError",
    "NumericalError",
    "ReducedProblem",
    "SCHEMA_VERSION",
    "Sketch",
    "Solution",
    "bench",
    "cardinality_reduce",
    "cross_validate",
    "dual_certificate",
    "dual_value",
    "load_libsvm",
    "load_sketch",
    "power_sketch",
    "reduce",
    "screen",
    "sketch_error",
    "solve_full",
    "solve_instance",
    "solve_reduced",
    "sparsity_profile",
]
