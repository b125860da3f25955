"""Bound states of the Dirichlet Laplacian on V-shaped planar waveguides.

High-order finite elements on structured nested meshes, a certified sparse
generalized eigensolver, small-angle asymptotics, counting bounds, and
exponential-decay diagnostics, with a CLI front end (`brokenguide`).
"""

from .asymptotics import (
    airy_fd_eigenvalues,
    airy_zero,
    bo_grid,
    bo_potential,
    model_airy_eigen,
    reverse_airy,
    singular_exponent,
    solve_bo,
    two_term_eigenvalue,
)
from .bounds import (
    box_bound,
    box_eigenvalue,
    count_lower_bound,
    existence_certificate,
    minimal_certificate_n,
    optimal_alpha,
)
from .decay import (
    DecayFit,
    default_slice_positions,
    fit_decay_rate,
    halfstrip_solution,
    halfstrip_tail_bound,
    trace_coefficients,
)
from .eigensolve import EigenResult, SolverParams, certify, solve_gevp
from .fem import (
    AssembledSystem,
    DofNumbering,
    assemble,
    build_basis,
    build_quadrature,
    evaluate_field,
    export_matrix,
    form_coefficients,
    interpolate,
)
from .geometry import (
    ARTIFICIAL,
    DIRICHLET,
    FULL_GUIDE,
    MODEL_GUIDE,
    NEUMANN,
    REFERENCE_STRIP,
    DomainSpec,
    Mesh,
    build_domain,
    generate_mesh,
    load_mesh,
    refine,
    save_mesh,
)

__all__ = [
    "ARTIFICIAL",
    "DIRICHLET",
    "FULL_GUIDE",
    "MODEL_GUIDE",
    "NEUMANN",
    "REFERENCE_STRIP",
    "AssembledSystem",
    "DecayFit",
    "DofNumbering",
    "DomainSpec",
    "EigenResult",
    "Mesh",
    "SolverParams",
    "airy_fd_eigenvalues",
    "airy_zero",
    "assemble",
    "bo_grid",
    "bo_potential",
    "box_bound",
    "box_eigenvalue",
    "build_basis",
    "build_domain",
    "build_quadrature",
    "certify",
    "count_lower_bound",
    "default_slice_positions",
    "evaluate_field",
    "existence_certificate",
    "export_matrix",
    "fit_decay_rate",
    "form_coefficients",
    "generate_mesh",
    "halfstrip_solution",
    "halfstrip_tail_bound",
    "interpolate",
    "load_mesh",
    "minimal_certificate_n",
    "model_airy_eigen",
    "optimal_alpha",
    "refine",
    "reverse_airy",
    "save_mesh",
    "singular_exponent",
    "solve_bo",
    "solve_gevp",
    "trace_coefficients",
    "two_term_eigenvalue",
]

__version__ = "0.1.0"
