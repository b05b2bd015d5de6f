//! Best subset selection with an `l0 + l1 + l2` penalty, solved through its
//! dual.
//!
//! The crate minimizes
//!
//! ```text
//! P(beta) = sum_i l(x_i^T beta, y_i) + l1 |beta|_1 + l2 |beta|_2^2 + l0 |beta|_0
//! ```
//!
//! with a primal-dual first-order method whose iterates carry a duality-gap
//! certificate. [`incremental::solve`] wraps the inner loop in an active-set
//! driver that grows the working set in small batches and drops features the
//! gap ball proves inactive. [`baselines`] holds the comparison solvers,
//! [`synth`] the synthetic benchmark data and [`oracle`] an exhaustive solver
//! for small problems.

pub mod baselines;
pub mod error;
pub mod incremental;
pub mod inner;
pub mod losses;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod solution;
pub mod synth;

pub use error::{Error, Result};
pub use incremental::{solve, LogBase, OuterConfig};
pub use inner::{inner_solve, InnerConfig, StepSchedule};
pub use losses::{LossModel, SquaredLoss};
pub use matrix::DenseMatrix;
pub use model::{GapCertificate, Penalty, ProblemSpec};
pub use solution::{OuterTraceStep, Solution, SolveStopReason, Stage};
