//! Allocation rules for cooperative games.
//!
//! Every rule maps a [`GameTable`] to an [`Allocation`]: one share per player,
//! summing to the value of the grand coalition.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::coalition::{format_value, Coalition, GameTable};
use crate::error::{Error, Result};

mod proportional;
mod random_order;
mod shapley;

pub use proportional::{
    detect_exogenous, pme_from_total_indices, proportional_values, proportional_values_extended,
    pv_permutation_oracle, ratio_potential, zero_structure, RatioPotentials, ZeroStructure,
};
pub use random_order::{for_each_permutation, random_order_allocation, OrderingPmf};
pub use shapley::{shapley_coalitional, shapley_effects_from_indices, shapley_permutation};

/// Default null threshold for exact index tables.
pub const ANALYTIC_ZERO_TOL: f64 = 1e-10;

/// Default null threshold for estimated index tables.
pub const ESTIMATED_ZERO_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Shapley,
    Pv,
    Pv0,
    Pme,
    RandomOrder,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Shapley => "shapley",
            Method::Pv => "pv",
            Method::Pv0 => "pv0",
            Method::Pme => "pme",
            Method::RandomOrder => "random-order",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shapley" => Ok(Method::Shapley),
            "pv" => Ok(Method::Pv),
            "pv0" => Ok(Method::Pv0),
            "pme" => Ok(Method::Pme),
            "random-order" => Ok(Method::RandomOrder),
            other => Err(Error::contract(format!(
                "unknown allocation method {other:?}"
            ))),
        }
    }
}

/// Non-fatal conditions noticed while allocating.
#[derive(Debug, Clone, PartialEq)]
pub enum AllocationWarning {
    /// The game has this many decreasing pairs `(A, A ∪ {i})`.
    NonMonotone { violations: usize },
    /// The game has this many negative values.
    Negative { coalitions: usize },
}

impl fmt::Display for AllocationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AllocationWarning::NonMonotone { violations } => {
                write!(f, "game is not monotone ({violations} decreasing pairs)")
            }
            AllocationWarning::Negative { coalitions } => {
                write!(f, "game has {coalitions} negative values")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub shares: Vec<f64>,
    /// The value of the grand coalition the shares sum to.
    pub total: f64,
    pub method: Method,
    /// Set when `v(D) = 0`; all shares are then zero.
    pub degenerate: bool,
    pub warnings: Vec<AllocationWarning>,
}

impl Allocation {
    pub(crate) fn new(shares: Vec<f64>, total: f64, method: Method) -> Self {
        Self {
            shares,
            total,
            method,
            degenerate: false,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn degenerate(d: usize, method: Method) -> Self {
        Self {
            shares: vec![0.0; d],
            total: 0.0,
            method,
            degenerate: true,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn with_warnings(mut self, game: &GameTable) -> Self {
        self.warnings = warnings_for(game);
        self
    }

    pub fn players(&self) -> usize {
        self.shares.len()
    }

    /// `|Σ shares − total|`.
    pub fn efficiency_gap(&self) -> f64 {
        (self.shares.iter().sum::<f64>() - self.total).abs()
    }

    /// Shares divided by the total, or zeros for a degenerate allocation.
    pub fn normalized(&self) -> Vec<f64> {
        if self.total == 0.0 {
            return vec![0.0; self.shares.len()];
        }
        self.shares.iter().map(|s| s / self.total).collect()
    }

    /// Players sorted by decreasing share, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.shares.len()).collect();
        order.sort_by(|&a, &b| self.shares[b].total_cmp(&self.shares[a]).then(a.cmp(&b)));
        order
    }

    /// Writes the allocation CSV (`player,share,method`), players 1-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "player,share,method")?;
        for (i, s) in self.shares.iter().enumerate() {
            writeln!(out, "{},{},{}", i + 1, format_value(*s), self.method)?;
        }
        Ok(())
    }
}

fn warnings_for(game: &GameTable) -> Vec<AllocationWarning> {
    if game.is_monotone() && game.is_nonnegative() {
        return Vec::new();
    }
    let report = game.validate();
    let mut warnings = Vec::new();
    if !report.monotonicity.is_empty() {
        warnings.push(AllocationWarning::NonMonotone {
            violations: report.monotonicity.len(),
        });
    }
    if !report.negative.is_empty() {
        warnings.push(AllocationWarning::Negative {
            coalitions: report.negative.len(),
        });
    }
    warnings
}

/// Marginal contribution of player `i` to the coalition `bits` (which must not
/// contain `i`).
#[inline]
pub(crate) fn marginal(game: &GameTable, bits: u32, i: usize) -> f64 {
    game.value_bits(bits | (1 << i)) - game.value_bits(bits)
}

pub(crate) fn coalition_of(bits: u32, d: usize) -> Coalition {
    Coalition::new(bits, d).expect("bits within range")
}
