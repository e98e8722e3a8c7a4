"""Deterministic discrepancy walks and spectral sparsifiers."""

from ._discwalk import (
    Error,
    Graph,
    InvalidInput,
    SubspaceExhausted,
    brute_force_min_discrepancy,
    check_resistance,
    check_sketch,
    check_spectral,
    check_sv,
    check_uc,
    complete_coloring,
    effective_resistance,
    eigh,
    expander_decompose,
    nullspace_basis,
    operator_norm,
    parse_edge_list,
    partial_color,
    resistance_sparsify,
    serialize,
    sketch,
    spectral_sparsify,
    sv_sparsify,
    uc_sparsify,
    vector_partial_color,
)

__all__ = [name for name in dir() if not name.startswith("_")]
