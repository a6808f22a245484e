//! Conservative solutions of the Hunter-Saxton equation
//!
//! `u_t + u u_x = 1/4 (mu((-inf, x)) - mu((x, inf)))`, `mu_t + (u mu)_x = 0`,
//! computed two independent ways: the exact Lagrangian flow and a
//! kernel-smoothed characteristic system, with checks for the quantitative
//! estimates satisfied by the solution.

pub mod error;
pub mod eta;
pub mod eulerian;
pub mod kernel;
pub mod lagrangian;
pub mod measure;
pub mod trajectory;
pub mod verification;

pub use error::{Error, Result};
pub use eta::{EtaState, FieldMethod, Reconstruction};
pub use eulerian::{cgh_distance, sup_distance, EulerianState};
pub use kernel::KernelSpec;
pub use lagrangian::{to_lagrangian, LagrangianFlow, LagrangianTriple, RelabelFn};
pub use measure::{Atom, DensityPiece, MonotoneFn, RadonMeasure1D, Side};
pub use trajectory::{EtaSolution, Provenance, ScaledU, Snapshot, Solution, StaticSolution, Trajectory};
pub use verification::CheckResult;
