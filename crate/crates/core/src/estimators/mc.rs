use super::{welford, EstimatorKind, IndexEstimate};
use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::models::{InputLaw, Model};
use crate::rng::{self, purpose};

/// Sample sizes of the double Monte Carlo estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McBudget {
    /// Joint draws for the output variance.
    pub nv: usize,
    /// Outer draws of the conditioning inputs.
    pub no: usize,
    /// Inner conditional draws per outer point.
    pub ni: usize,
    pub seed: u64,
}

impl McBudget {
    pub fn new(nv: usize, no: usize, ni: usize, seed: u64) -> Result<Self> {
        let b = Self { nv, no, ni, seed };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nv < 2 || self.no < 1 || self.ni < 2 {
            return Err(Error::contract(format!(
                "budget needs nv >= 2, no >= 1, ni >= 2; got nv={}, no={}, ni={}",
                self.nv, self.no, self.ni
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// `V̂(G(X))` over `nv` joint draws.
pub(crate) fn output_variance(
    model: &dyn Model,
    law: &dyn InputLaw,
    budget: &McBudget,
) -> Result<f64> {
    let mut stream = rng::stream(budget.seed, purpose::JOINT_SAMPLE, 0, 0);
    let x = law.sample_joint(budget.nv, &mut stream);
    let mut row = vec![0.0; x.ncols()];
    let y = (0..x.nrows()).map(|i| {
        for (j, r) in row.iter_mut().enumerate() {
            *r = x[(i, j)];
        }
        model.eval(&row)
    });
    Ok(welford(y))
}

/// `(1/N_o) Σ_i V̂^{(i)} / variance`, where `V̂^{(i)}` is the sample variance of
/// `N_i` outputs with `X_Ā` fixed at its `i`-th draw and `X_A` redrawn from
/// the conditional law.
pub(crate) fn total_index(
    model: &dyn Model,
    law: &dyn InputLaw,
    a: Coalition,
    budget: &McBudget,
    variance: f64,
) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    if a.is_full() {
        return Ok(1.0);
    }
    let cond = law.conditional(a)?;
    let mut stream = rng::stream(budget.seed, purpose::COALITION, a.bits() as u64, 0);
    let mut x = vec![0.0; a.players()];
    let mut sum = 0.0;
    for _ in 0..budget.no {
        let given = cond.sample_given(&mut stream);
        for (&j, &v) in cond.given().iter().zip(&given) {
            x[j] = v;
        }
        let inner = cond.sample_free(&given, budget.ni, &mut stream);
        let y = (0..budget.ni).map(|r| {
            for (c, &j) in cond.free().iter().enumerate() {
                x[j] = inner[(r, c)];
            }
            model.eval(&x)
        });
        sum += welford(y);
    }
    Ok(sum / budget.no as f64 / variance)
}

/// Double Monte Carlo estimate of `S^T_A`. Uses `nv + no·ni` model
/// evaluations; `∅` and `D` short-circuit to 0 and 1.
pub fn estimate_total_sobol_mc(
    model: &dyn Model,
    law: &dyn InputLaw,
    a: Coalition,
    budget: McBudget,
) -> Result<IndexEstimate> {
    budget.validate()?;
    if model.dim() != law.dim() || a.players() != law.dim() {
        return Err(Error::contract(
            "model, input law and coalition dimensions differ",
        ));
    }
    if a.is_empty() || a.is_full() {
        let v = if a.is_empty() { 0.0 } else { 1.0 };
        return Ok(IndexEstimate::point(a, v, EstimatorKind::DoubleMc));
    }
    let variance = output_variance(model, law, &budget)?;
    if variance <= 0.0 {
        return Err(Error::Degenerate(
            "estimated output variance is zero".into(),
        ));
    }
    let value = total_index(model, law, a, &budget, variance)?;
    Ok(IndexEstimate::point(a, value, EstimatorKind::DoubleMc))
}
