//! Jet calculus for scalar ODEs: λ-symmetries, their reconstruction as
//! nonlocal symmetries of a one-dimensional covering, and order reduction
//! by differential invariants.

pub mod cli;
pub mod expr;
pub mod field;
pub mod jet;
pub mod lambda_symmetry;
pub mod numeric;
pub mod problem;
pub mod reduction;
