"""Spectral analysis of rank-one-perturbed nilpotent Toeplitz families.

Closed-form non-zero spectra, generalized eigenspaces and the Jordan
decomposition of the zero eigenvalue, resolvent norms and pseudospectrum
grids with disk enclosures, and reproducible Gaussian-perturbation
ensembles with symbol-curve comparisons.
"""

from .ensemble import (
    EnsembleCloud,
    FitResult,
    RegionGrid,
    SymbolCurve,
    conjecture_region,
    dense_eigensolve,
    fit_radius_law,
    mean_radius,
    run_ensemble,
    sample_gaussian,
    symbol_curve,
    winding_number,
)
from .jordan import (
    JordanBasis,
    assemble_similarity,
    build_basis,
    build_left_chains,
    build_right_chains,
    chain_step,
    closed_form_b0,
    condition_numbers,
    right_eigenvectors,
)
from .model import ModelParams, Multiplicities, build_matrix, multiplicities, young_diagram
from .resolvent import (
    EnclosureDisks,
    PseudoGrid,
    enclosure_disks,
    pseudospectrum_grid,
    resolvent_jordan,
    resolvent_norm_direct,
    zero_component,
)
from .spectrum import (
    CharPolynomial,
    SpectrumReport,
    char_poly,
    circular_limit,
    nonzero_eigenvalues,
    nonzero_eigenvector,
    outlier_expansion,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "Multiplicities",
    "build_matrix",
    "multiplicities",
    "young_diagram",
    "CharPolynomial",
    "SpectrumReport",
    "char_poly",
    "nonzero_eigenvalues",
    "outlier_expansion",
    "circular_limit",
    "nonzero_eigenvector",
    "JordanBasis",
    "right_eigenvectors",
    "chain_step",
    "build_right_chains",
    "build_left_chains",
    "build_basis",
    "closed_form_b0",
    "condition_numbers",
    "assemble_similarity",
    "PseudoGrid",
    "EnclosureDisks",
    "resolvent_norm_direct",
    "resolvent_jordan",
    "pseudospectrum_grid",
    "zero_component",
    "enclosure_disks",
    "EnsembleCloud",
    "SymbolCurve",
    "RegionGrid",
    "FitResult",
    "sample_gaussian",
    "dense_eigensolve",
    "run_ensemble",
    "mean_radius",
    "fit_radius_law",
    "symbol_curve",
    "winding_number",
    "conjecture_region",
    "__version__",
]
