//! Variance-based global sensitivity analysis with dependent inputs.
//!
//! Sensitivity indices are computed as allocations of a cooperative game whose
//! players are the model inputs. Two allocations are provided on top of a table
//! of (closed or total) Sobol' indices:
//!
//! * Shapley effects, the egalitarian split of the output variance;
//! * proportional marginal effects (PME), the proportional values of the total
//!   Sobol' game extended to games with null coalitions. Inputs that the model
//!   does not use, even when correlated with inputs it does use, get exactly zero.
//!
//! The crate is organised bottom-up:
//!
//! * [`coalition`]: coalitions as bitmasks, dense game tables, dual games;
//! * [`allocation`]: Shapley values, random-order allocations, ratio potentials,
//!   proportional values and their extension, PME;
//! * [`gaussian`]: exact indices for Gaussian linear models and the analytical
//!   toy cases used as golden values;
//! * [`models`]: benchmark models and input samplers;
//! * [`estimators`]: double Monte Carlo and nearest-neighbour estimation of
//!   total indices, plus replication with confidence intervals;
//! * [`cli`]: the experiment runner behind the `gsa` binary.

pub mod allocation;
pub mod cli;
pub mod coalition;
pub mod error;
pub mod estimators;
pub mod games;
pub mod gaussian;
pub mod models;
pub mod rng;
pub(crate) mod summation;

pub use allocation::{Allocation, AllocationWarning, Method};
pub use coalition::{Coalition, GameTable, ValidationReport, MAX_PLAYERS};
pub use error::{Error, Result};
pub use nalgebra;
