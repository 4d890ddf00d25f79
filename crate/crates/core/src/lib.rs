//! Fixed-return versus stochastic-return financing contracts.
//!
//! The crate evaluates expected payoffs and expected utilities of debt-like
//! (FR) and profit-sharing (SR) contracts over return laws on (0, 1),
//! locates their indifference points, builds mean-preserving spreads and
//! second-order dominance comparisons, and checks the resulting ordering
//! claims over scenario grids.

pub mod contracts;
pub mod error;
pub mod harness;
pub mod quadrature;
pub mod returns;
pub mod sharing;
pub mod solvers;
pub mod utility;

pub use contracts::{ContractTerms, FundAllocation, PayoffMap, PayoffSummary};
pub use error::{Error, Result};
pub use harness::{GridReport, Outcome, Proposition, Scenario, VerificationRecord};
pub use quadrature::QuadratureSpec;
pub use returns::{FiniteDist, Law, McEstimate, ReturnDistribution};
pub use solvers::{SolveReport, SolveStatus, SolveTarget, Tolerances};
pub use utility::{UtilityFamily, UtilityFunction};
