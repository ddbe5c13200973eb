//! Dense matrix arithmetic and the conditioned linear-system solver used to
//! turn class statistics into classifier weights.

mod matrix;
mod solve;

pub use matrix::Matrix;
pub use solve::{condition_estimate, ols_solve, OlsSolver, RidgePolicy, SolveReport};
