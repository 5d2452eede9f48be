"""Entropy-based failure detection from execution traces.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from runent._core import (
    Dataset,
    FaultSpec,
    RunentError,
    Tree,
    WorkloadSpec,
    call_counts,
    confusion,
    crossval,
    durations,
    featurize,
    score,
    smote,
    stratified_kfold,
    synth_run,
)

__all__ = [
    "Dataset",
    "FaultSpec",
    "RunentError",
    "Tree",
    "WorkloadSpec",
    "call_counts",
    "confusion",
    "crossval",
    "durations",
    "featurize",
    "score",
    "smote",
    "stratified_kfold",
    "synth_run",
]
