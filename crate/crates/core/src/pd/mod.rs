//! Centralized solvers for the composite problem f + g + h(D·): the
//! no-inertia baseline, the inertial primal-dual iteration (scalar and
//! diagonally preconditioned), the inertial ADMM-style variants, the
//! forward-backward special case, the diagonal preconditioner builder,
//! and the step-size validators.

mod problem;
mod solvers;
mod steps;

pub use problem::{CompositeProblem, PrimalDualState};
pub use solvers::{
    optimality_residuals, CondatSolver, ForwardBackwardSolver, IadmmSolver, IpdsSolver,
    SolveOutcome, PD_TRACE_HEADER,
};
pub use steps::{
    build_diag_preconditioner, validate_for_problem, validate_step_sizes, StepCertificate,
    StepSizes,
};
