use std::time::{Duration, Instant};

use rand::seq::index;
use rayon::prelude::*;

use super::{estimate_all_total_indices, ConfidenceInterval, IndexEstimate, IndexSource};
use crate::allocation::{pme_from_total_indices, shapley_effects_from_indices, Allocation};
use crate::coalition::{Coalition, GameTable};
use crate::error::{Error, Result};
use crate::rng::{self, purpose};
use crate::summation::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplicationScheme {
    /// Fresh derived seeds per replication (Monte Carlo only).
    IndependentSeeds,
    /// 80% of the rows drawn without replacement per replication (given data only).
    Subsample80,
    /// Every replication reuses the master seed and the full data.
    SameSeed,
}

impl ReplicationScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            ReplicationScheme::IndependentSeeds => "independent-seeds",
            ReplicationScheme::Subsample80 => "subsample80",
            ReplicationScheme::SameSeed => "same-seed",
        }
    }
}

impl std::str::FromStr for ReplicationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent-seeds" => Ok(ReplicationScheme::IndependentSeeds),
            "subsample80" => Ok(ReplicationScheme::Subsample80),
            "same-seed" => Ok(ReplicationScheme::SameSeed),
            other => Err(Error::contract(format!(
                "unknown replication scheme `{other}`"
            ))),
        }
    }
}

/// Per-player replicate mean and quantile interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerStats {
    pub mean: Vec<f64>,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl PlayerStats {
    fn from_replicates(reps: &[&Allocation], level: f64) -> Self {
        let d = reps[0].players();
        let mut stats = Self {
            mean: vec![0.0; d],
            low: vec![0.0; d],
            high: vec![0.0; d],
        };
        for i in 0..d {
            let values: Vec<f64> = reps.iter().map(|a| a.shares[i]).collect();
            let (m, lo, hi) = summarize(&values, level);
            stats.mean[i] = m;
            stats.low[i] = lo;
            stats.high[i] = hi;
        }
        stats
    }
}

fn summarize(values: &[f64], level: f64) -> (f64, f64, f64) {
    let mean = compensated_sum(values.iter().copied()) / values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    // Quantile interpolation can land a rounding step away from a mean
    // of identical values; keep the interval around the mean.
    let low = quantile(&sorted, tail).min(mean);
    let high = quantile(&sorted, 1.0 - tail).max(mean);
    (mean, low, high)
}

/// Sample quantile of sorted data with linear interpolation between order
/// statistics (`h = (n − 1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone)]
pub struct ReplicationSummary {
    pub shapley: PlayerStats,
    pub pme: PlayerStats,
    /// Estimated total index table of each replication.
    pub tables: Vec<GameTable>,
    /// `(Shapley, PME)` of each replication.
    pub allocations: Vec<(Allocation, Allocation)>,
    /// Raw index estimates outside `[0, 1]`, summed over replications.
    pub clamped: usize,
    pub method: super::EstimatorKind,
    pub scheme: ReplicationScheme,
    pub level: f64,
    pub wall_time: Duration,
}

impl ReplicationSummary {
    /// Per-coalition replicate values, mean and quantile interval.
    pub fn index_estimates(&self) -> Vec<IndexEstimate> {
        let d = self.tables[0].players();
        (0..1u32 << d)
            .map(|bits| {
                let c = Coalition::new(bits, d).expect("in range");
                let reps: Vec<f64> = self.tables.iter().map(|t| t.value(c)).collect();
                let (mean, low, high) = summarize(&reps, self.level);
                IndexEstimate {
                    coalition: c,
                    value: mean,
                    method: self.method,
                    replications: Some(reps),
                    ci: Some(ConfidenceInterval {
                        low,
                        high,
                        level: self.level,
                    }),
                }
            })
            .collect()
    }
}

/// Runs the pipeline (total indices, Shapley effects, PME) `r` times and
/// summarizes the replicates. Replications run in parallel on independent
/// streams derived from `seed`.
pub fn replicate_with_ci(
    source: &IndexSource<'_>,
    r: usize,
    scheme: ReplicationScheme,
    level: f64,
    tau: f64,
    seed: u64,
) -> Result<ReplicationSummary> {
    let start = Instant::now();
    if r < 2 {
        return Err(Error::contract(format!(
            "need at least 2 replications, got {r}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::contract(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    match (source, scheme) {
        (IndexSource::MonteCarlo { .. }, ReplicationScheme::Subsample80) => {
            return Err(Error::contract("subsampling needs given data"));
        }
        (IndexSource::GivenData { .. }, ReplicationScheme::IndependentSeeds) => {
            return Err(Error::contract(
                "a fixed data set cannot be redrawn with fresh seeds",
            ));
        }
        _ => {}
    }

    let runs = (0..r as u64)
        .into_par_iter()
        .map(|rep| run_one(source, scheme, tau, seed, rep))
        .collect::<Result<Vec<_>>>()?;
    let clamped = runs.iter().map(|r| r.2).sum();
    let (tables, allocations): (Vec<_>, Vec<_>) = runs.into_iter().map(|r| (r.0, r.1)).unzip();
    let shapley: Vec<&Allocation> = allocations.iter().map(|(s, _)| s).collect();
    let pme: Vec<&Allocation> = allocations.iter().map(|(_, p)| p).collect();
    Ok(ReplicationSummary {
        shapley: PlayerStats::from_replicates(&shapley, level),
        pme: PlayerStats::from_replicates(&pme, level),
        tables,
        allocations,
        clamped,
        method: source.kind(),
        scheme,
        level,
        wall_time: start.elapsed(),
    })
}

fn run_one(
    source: &IndexSource<'_>,
    scheme: ReplicationScheme,
    tau: f64,
    seed: u64,
    rep: u64,
) -> Result<(GameTable, (Allocation, Allocation), usize)> {
    let estimated = match *source {
        IndexSource::MonteCarlo { model, law, budget } => {
            let s = match scheme {
                ReplicationScheme::SameSeed => seed,
                _ => rng::replication_seed(seed, rep),
            };
            estimate_all_total_indices(&IndexSource::MonteCarlo {
                model,
                law,
                budget: budget.with_seed(s),
            })?
        }
        IndexSource::GivenData { data, k } => match scheme {
            ReplicationScheme::Subsample80 => {
                let n = data.len();
                let m = n * 4 / 5;
                let mut stream = rng::stream(seed, purpose::SUBSAMPLE, rep, 0);
                let mut rows = index::sample(&mut stream, n, m).into_vec();
                rows.sort_unstable();
                let sub = data.select_rows(&rows)?;
                estimate_all_total_indices(&IndexSource::GivenData { data: &sub, k })?
            }
            _ => estimate_all_total_indices(source)?,
        },
    };
    let clamped = estimated.clamped_count();
    let table = estimated.table;
    let shapley = shapley_effects_from_indices(&table);
    let pme = pme_from_total_indices(&table, tau)?;
    Ok((table, (shapley, pme), clamped))
}
