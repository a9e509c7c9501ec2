//! Error, disturbance and fuzziness of generalized quantum measurements.
//!
//! A generalized measurement is modelled as a pair of commuting observables
//! on system ⊗ apparatus together with the apparatus preparation. From a
//! system state and two target observables the crate computes the RMS error
//! of each side, splits it into operator bias and fuzziness, evaluates the
//! known error tradeoff relations, and simulates the controlled-swap circuit
//! that estimates these quantities from measurement statistics.
//!
//! Matrices are dense and complex; tensor products order the first factor as
//! the most significant index.

pub mod analysis;
pub mod circuit;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod measurement;
pub mod operator;
pub mod relations;
pub mod sampling;

pub use analysis::{ErrorBreakdown, Scenario, ScenarioStats};
pub use error::{Error, Result};
pub use exec::Execution;
pub use measurement::{IndirectModel, JointObservables, Povm, Side};
pub use operator::{DensityMatrix, Operator, C64};
pub use relations::{RelationId, RelationReport};
