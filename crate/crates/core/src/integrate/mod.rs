//! Time integration with SDC methods and their collocation references:
//! Newton stage solves, relaxation for quadratic invariants, and the
//! convergence and drift drivers.

mod newton;
mod problem;
mod relax;
mod step;
mod study;

pub use newton::SolverOptions;
pub use problem::{
    dahlquist_problem, quadratic_form, rigid_body_casimir, rigid_body_problem, IvpProblem, RIGID_BODY_D,
    RIGID_BODY_N,
};
pub use relax::{relaxed_update, RelaxationConfig, RelaxedStep, RelaxedTime};
pub use step::{check_triangular, collocation_step, sdc_step, StepDiagnostics};
pub use study::{
    convergence_study, fit_slope, integrate, long_time_error_growth, reference_tableau, ConvergenceStudy,
    LongTimeOptions, Scheme, StudyOptions, Trajectory, TrajectorySample,
};

#[cfg(test)]
mod tests;
