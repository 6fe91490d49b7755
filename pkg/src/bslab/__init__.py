"""Periodic-grid laboratory for non-self-adjoint Schroedinger and Dirac operators.

Discretizes H = T(D) + V on a torus for fractional, pseudo-relativistic and
Dirac kinetic symbols with complex potentials, and exposes the objects needed
to probe their spectra quantitatively: free resolvents and their kernels,
Birman-Schwinger operators with Schatten norms and regularized determinants,
eigenvalue classification against the continuum essential spectrum, conformal
disk charts of the resolvent set, and certificate-producing verifiers for
resolvent bounds, scaling laws and weighted eigenvalue sums.
"""

from .birman_schwinger import (
    BSOperator,
    DetValue,
    SchattenReport,
    assemble_bs,
    bs_det_evaluator,
    bs_principle_check,
    det_contour_roots,
    regularized_det,
    schatten_norm,
    schatten_order,
)
from .certlab import (
    BoundCertificate,
    JobError,
    Region,
    ScalingLaw,
    THEOREM_IDS,
    VerifyJob,
    boundary_ray,
    certificate_json,
    discrete_spectrum,
    fit_scaling_law,
    fixed_argument_ray,
    run_jobs,
    sum_space_norm,
    summary_csv,
    verify_imaginary,
    verify_individual_bounds,
    verify_main,
    verify_schatten_scaling,
    verify_uniform_resolvent,
    verify_weighted_sums,
)
from .conformal import (
    NAMED_WEIGHTS,
    ConformalAtlas,
    distortion_factors,
    koebe_ratio,
    psi_inverse,
    psi_map,
    weighted_blaschke_sum,
)
from .lattice import GridFunction, TorusGrid, apply_multiplier, lp_norm, smooth_cutoff
from .potentials import (
    PotentialField,
    PotentialSpec,
    imaginary_potential,
    parse_potential_file,
    potential_norm,
    resample,
    sample_potential,
    scaled_field,
    write_potential_file,
)
from .resolvent import (
    ResolventHandle,
    ResolventPoleError,
    empirical_opnorm,
    factored_dirac_apply,
    resolvent_apply,
    resolvent_multiplier,
)
from .spectra import (
    EigenSolution,
    SpectralLabel,
    SpectralPoint,
    assemble_hamiltonian,
    classify,
    dist_to_spectrum,
    eigensolve,
    essential_spectrum,
    spectrum_csv,
)
from .symbols import SymbolKind, SymbolSpec, clifford_generators, critical_values, eval_symbol

__all__ = [
    "BSOperator",
    "BoundCertificate",
    "ConformalAtlas",
    "DetValue",
    "EigenSolution",
    "GridFunction",
    "JobError",
    "NAMED_WEIGHTS",
    "PotentialField",
    "PotentialSpec",
    "Region",
    "ResolventHandle",
    "ResolventPoleError",
    "ScalingLaw",
    "SchattenReport",
    "SpectralLabel",
    "SpectralPoint",
    "SymbolKind",
    "SymbolSpec",
    "THEOREM_IDS",
    "TorusGrid",
    "VerifyJob",
    "apply_multiplier",
    "assemble_bs",
    "assemble_hamiltonian",
    "boundary_ray",
    "bs_det_evaluator",
    "bs_principle_check",
    "certificate_json",
    "classify",
    "clifford_generators",
    "critical_values",
    "det_contour_roots",
    "discrete_spectrum",
    "dist_to_spectrum",
    "distortion_factors",
    "eigensolve",
    "empirical_opnorm",
    "essential_spectrum",
    "eval_symbol",
    "factored_dirac_apply",
    "fit_scaling_law",
    "fixed_argument_ray",
    "imaginary_potential",
    "koebe_ratio",
    "lp_norm",
    "parse_potential_file",
    "potential_norm",
    "psi_inverse",
    "psi_map",
    "regularized_det",
    "resample",
    "resolvent_apply",
    "resolvent_multiplier",
    "run_jobs",
    "sample_potential",
    "scaled_field",
    "schatten_norm",
    "schatten_order",
    "smooth_cutoff",
    "spectrum_csv",
    "sum_space_norm",
    "summary_csv",
    "verify_imaginary",
    "verify_individual_bounds",
    "verify_main",
    "verify_schatten_scaling",
    "verify_uniform_resolvent",
    "verify_weighted_sums",
    "weighted_blaschke_sum",
    "write_potential_file",
]

__version__ = "0.1.0"
