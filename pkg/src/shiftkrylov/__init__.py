"""Deflated restarted GMRES/FOM for multiply shifted systems with multiple
right-hand sides."""

from .arnoldi import (
    DeflationSpace,
    KrylovFactorization,
    deflated_restart,
    extend_arnoldi,
    harmonic_ritz,
    ritz,
    ritz_values,
    start_factorization,
)
from .multi_rhs import (
    correct_solution,
    gmres_proj_sh,
    minres_project,
    related_rhs_project,
    shifted_project,
    solve_extra_rhs,
)
from .operators import (
    LinearOperator,
    apply_shifted,
    bidiagonal_operator,
    from_matrix,
    load_matrix_market,
    random_rhs,
    related_rhs,
)
from .shifted import (
    ConvergenceReport,
    ShiftFamilyState,
    SolverConfig,
    fom_dr_sh,
    fom_sh,
    fom_sh_cycle,
    gmres_dr_sh,
    gmres_sh,
    gmres_sh_cycle,
    restarted_sh,
)

__version__ = "0.1.0"
