"""Federated min-max optimization (SAGDA, FSGDA and baselines)."""

from ._core import (
    DivergenceError,
    ParseError,
    check_lr_constraints,
    cli,
    parse_libsvm,
    partition_labels,
    run_experiment,
    sample_clients,
    serialize_libsvm,
    smooth,
    synthetic_phi,
)

__all__ = [
    "DivergenceError",
    "ParseError",
    "check_lr_constraints",
    "cli",
    "parse_libsvm",
    "partition_labels",
    "run_experiment",
    "sample_clients",
    "serialize_libsvm",
    "smooth",
    "synthetic_phi",
]
