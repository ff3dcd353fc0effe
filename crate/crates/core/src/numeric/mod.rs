//! Floating-point evaluation, sampling, residual statistics, and a
//! fixed-step integrator.

mod eval;
mod integrate;
mod sample;

pub use eval::{eval, summand_scale, EvalError, Point};
pub use integrate::{integrate_ode, verify_solution, Trajectory};
pub use sample::{
    random_point, residual_report, sample_box, sample_manifold, verify_on_manifold,
    verify_residual, ReportBuilder, ResidualReport, SampleError, SamplePlan, SampleRanges,
    ABSOLUTE_FLOOR,
};
