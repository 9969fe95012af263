//! Estimation of total Sobol' indices.
//!
//! Two estimators are provided. The double Monte Carlo estimator needs the
//! model and a sampler of the conditional input laws. The nearest-neighbour
//! estimator only needs an i.i.d. input/output sample. Both fill a full
//! [`GameTable`] of total indices that the allocation rules consume, and
//! [`replicate_with_ci`] repeats the whole pipeline to get confidence intervals.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::coalition::{Coalition, GameTable};
use crate::error::{Error, Result};
use crate::models::{InputLaw, Model};

mod data;
mod knn;
mod mc;
mod replicate;

pub use data::DataSet;
pub use knn::{estimate_total_sobol_knn, estimate_total_sobol_knn_with, NeighborSearch};
pub use mc::{estimate_total_sobol_mc, McBudget};
pub use replicate::{
    quantile, replicate_with_ci, PlayerStats, ReplicationScheme, ReplicationSummary,
};

/// Unbiased sample variance, computed with Welford's one-pass update.
pub fn estimate_variance(y: &[f64]) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::contract(format!(
            "variance needs at least 2 observations, got {}",
            y.len()
        )));
    }
    Ok(welford(y.iter().copied()))
}

/// Welford's update over a sample of length at least 2. A constant sample
/// gives exactly zero.
pub(crate) fn welford(y: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in y {
        n += 1.0;
        let delta = v - mean;
        mean += delta / n;
        m2 += delta * (v - mean);
    }
    m2 / (n - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    DoubleMc,
    Knn,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::DoubleMc => "double-mc",
            EstimatorKind::Knn => "knn",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double-mc" | "mc" => Ok(EstimatorKind::DoubleMc),
            "knn" => Ok(EstimatorKind::Knn),
            other => Err(Error::contract(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Confidence interval from replicate quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
    pub level: f64,
}

/// Estimate of one total index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEstimate {
    pub coalition: Coalition,
    pub value: f64,
    pub method: EstimatorKind,
    pub replications: Option<Vec<f64>>,
    pub ci: Option<ConfidenceInterval>,
}

impl IndexEstimate {
    pub(crate) fn point(coalition: Coalition, value: f64, method: EstimatorKind) -> Self {
        Self {
            coalition,
            value,
            method,
            replications: None,
            ci: None,
        }
    }
}

/// Where the total indices are estimated from.
#[derive(Clone, Copy)]
pub enum IndexSource<'a> {
    /// Double Monte Carlo on a model and its input law.
    MonteCarlo {
        model: &'a dyn Model,
        law: &'a dyn InputLaw,
        budget: McBudget,
    },
    /// Nearest-neighbour estimation on a fixed sample.
    GivenData { data: &'a DataSet, k: usize },
}

impl IndexSource<'_> {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            IndexSource::MonteCarlo { .. } => EstimatorKind::DoubleMc,
            IndexSource::GivenData { .. } => EstimatorKind::Knn,
        }
    }

    pub fn players(&self) -> usize {
        match self {
            IndexSource::MonteCarlo { law, .. } => law.dim(),
            IndexSource::GivenData { data, .. } => data.dim(),
        }
    }
}

/// A full table of estimated total indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedIndices {
    /// Estimates clamped to `[0, 1]`.
    pub table: GameTable,
    /// Estimates before clamping, indexed by coalition bitmask.
    pub raw: Vec<f64>,
    /// Set when the output variance estimate is zero; the table is then all zero.
    pub degenerate: bool,
    pub method: EstimatorKind,
    /// Model evaluations consumed (zero for given data).
    pub evaluations: u64,
    pub seed: u64,
    pub wall_time: Duration,
}

impl EstimatedIndices {
    /// Number of coalitions whose raw estimate left `[0, 1]`.
    pub fn clamped_count(&self) -> usize {
        self.raw
            .iter()
            .filter(|v| !(0.0..=1.0).contains(*v))
            .count()
    }
}

/// Estimates `Ŝ^T_A` for every coalition. Coalitions run in parallel, each on
/// its own random stream, so the result does not depend on scheduling.
pub fn estimate_all_total_indices(source: &IndexSource<'_>) -> Result<EstimatedIndices> {
    let start = Instant::now();
    let d = source.players();
    if d == 0 || d > crate::coalition::MAX_PLAYERS {
        return Err(Error::Dimension(d));
    }
    let n = 1usize << d;
    let (raw, evaluations, seed, degenerate) = match *source {
        IndexSource::MonteCarlo { model, law, budget } => {
            budget.validate()?;
            if model.dim() != d {
                return Err(Error::contract("model and input law dimensions differ"));
            }
            let variance = mc::output_variance(model, law, &budget)?;
            let mut evaluations = budget.nv as u64;
            if variance <= 0.0 {
                (vec![0.0; n], evaluations, budget.seed, true)
            } else {
                let raw = (0..n as u32)
                    .into_par_iter()
                    .map(|bits| {
                        mc::total_index(model, law, Coalition::new(bits, d)?, &budget, variance)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let inner = (budget.no * budget.ni) as u64;
                evaluations += inner * (n as u64).saturating_sub(2);
                (raw, evaluations, budget.seed, false)
            }
        }
        IndexSource::GivenData { data, k } => {
            knn::check_k(data, k)?;
            let variance = estimate_variance(data.y())?;
            if variance <= 0.0 {
                (vec![0.0; n], 0, 0, true)
            } else {
                let prepared = knn::Prepared::new(data);
                let raw = (0..n as u32)
                    .into_par_iter()
                    .map(|bits| {
                        let c = Coalition::new(bits, d)?;
                        Ok(prepared.total_index(c, k, variance, NeighborSearch::KdTree))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                (raw, 0, 0, false)
            }
        }
    };
    let clamped = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(EstimatedIndices {
        table: GameTable::new(d, clamped)?,
        raw,
        degenerate,
        method: source.kind(),
        evaluations,
        seed,
        wall_time: start.elapsed(),
    })
}
