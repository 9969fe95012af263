//! Exact Sobol' indices for Gaussian linear models and the analytical toy cases.
//!
//! For `Y = βᵀX` with `X ~ N(μ, Σ)`, conditioning on `X_A` gives
//! `E[Y | X_A] = const + cᵀ X_A` with `c = β_A + Σ_AA^{-1} Σ_{A,Ā} β_Ā`, hence
//! `Var(E[Y | X_A]) = cᵀ Σ_AA c`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::allocation::{pme_from_total_indices, shapley_effects_from_indices, Allocation, Method};
use crate::coalition::{format_value, Coalition, GameTable};
use crate::error::{Error, Result};

pub(crate) fn select_vector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

pub(crate) fn select_matrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

pub(crate) fn check_covariance(sigma: &DMatrix<f64>) -> Result<()> {
    if !sigma.is_square() {
        return Err(Error::contract("covariance matrix is not square"));
    }
    let n = sigma.nrows();
    for i in 0..n {
        for j in 0..i {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 {
                return Err(Error::contract(format!(
                    "covariance not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("covariance has non-finite entries"));
    }
    if sigma.clone().cholesky().is_none() {
        return Err(Error::LinearAlgebra(
            "covariance is not positive definite".into(),
        ));
    }
    Ok(())
}

/// `Y = βᵀX`, `X ~ N(μ, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLinearModel {
    beta: DVector<f64>,
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl GaussianLinearModel {
    pub fn new(beta: DVector<f64>, mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let d = beta.len();
        if d == 0 || d > crate::MAX_PLAYERS {
            return Err(Error::Dimension(d));
        }
        if mu.len() != d || sigma.nrows() != d {
            return Err(Error::contract(format!(
                "dimension mismatch: beta {d}, mu {}, sigma {}x{}",
                mu.len(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if beta.iter().chain(mu.iter()).any(|v| !v.is_finite()) {
            return Err(Error::contract("non-finite coefficient or mean"));
        }
        check_covariance(&sigma)?;
        Ok(Self { beta, mu, sigma })
    }

    /// Zero-mean model from row-major slices.
    pub fn centered(beta: &[f64], sigma_rows: &[&[f64]]) -> Result<Self> {
        let d = beta.len();
        let sigma = DMatrix::from_fn(d, d, |i, j| {
            sigma_rows
                .get(i)
                .and_then(|r| r.get(j))
                .copied()
                .unwrap_or(f64::NAN)
        });
        Self::new(DVector::from_row_slice(beta), DVector::zeros(d), sigma)
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.beta.iter().zip(x).map(|(b, x)| b * x).sum()
    }

    /// `Var(Y) = βᵀΣβ`.
    pub fn output_variance(&self) -> f64 {
        (self.beta.transpose() * &self.sigma * &self.beta)[(0, 0)]
    }

    /// `Var(E[Y | X_A])`.
    pub fn conditional_explained_variance(&self, a: Coalition) -> Result<f64> {
        if a.players() != self.dim() {
            return Err(Error::contract("coalition and model dimensions differ"));
        }
        if a.is_empty() {
            return Ok(0.0);
        }
        if a.is_full() {
            return Ok(self.output_variance());
        }
        let inside: Vec<usize> = a.members().collect();
        let outside: Vec<usize> = a.complement().members().collect();
        let s_aa = select_matrix(&self.sigma, &inside, &inside);
        let s_ab = select_matrix(&self.sigma, &inside, &outside);
        let chol = s_aa
            .clone()
            .cholesky()
            .ok_or_else(|| Error::LinearAlgebra(format!("covariance block of {a} is singular")))?;
        let beta_b = select_vector(&self.beta, &outside);
        let c = select_vector(&self.beta, &inside) + chol.solve(&(s_ab * beta_b));
        Ok((c.transpose() * s_aa * &c)[(0, 0)])
    }

    fn total_variance_checked(&self) -> Result<f64> {
        let v = self.output_variance();
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Degenerate("output variance is zero".into()))
        }
    }

    /// Closed Sobol' index `Var(E[Y|X_A]) / Var(Y)`.
    pub fn closed_sobol(&self, a: Coalition) -> Result<f64> {
        let v = self.total_variance_checked()?;
        Ok(self.conditional_explained_variance(a)? / v)
    }

    /// Total Sobol' index `E[Var(Y|X_Ā)] / Var(Y) = 1 − S^clos_Ā`.
    pub fn total_sobol(&self, a: Coalition) -> Result<f64> {
        Ok(1.0 - self.closed_sobol(a.complement())?)
    }

    pub fn closed_table(&self) -> Result<GameTable> {
        let d = self.dim();
        let values = (0..1u32 << d)
            .map(|b| self.closed_sobol(Coalition::new(b, d)?))
            .collect::<Result<Vec<_>>>()?;
        GameTable::new(d, values)
    }

    pub fn total_table(&self) -> Result<GameTable> {
        let d = self.dim();
        let values = (0..1u32 << d)
            .map(|b| self.total_sobol(Coalition::new(b, d)?))
            .collect::<Result<Vec<_>>>()?;
        GameTable::new(d, values)
    }
}

/// The analytical toy cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToyCase {
    /// `Y = X1 + X2`, with `X3` correlated to `X1` by `rho` but unused.
    ExogenousLinear { rho: f64 },
    /// `Y = X1 + βX2 + X3`, with `X2` and `X3` correlated by `rho`.
    UnbalancedLinear { rho: f64, beta: f64 },
    /// `Y = X1 + (1−α)X2 + X1X2`, `(X1, X2)` standard bivariate normal with
    /// correlation `rho`.
    InteractionLinear { rho: f64, alpha: f64 },
    /// `Y = X1`, with `X2` correlated to `X1` by `rho`.
    ShapleyJoke { rho: f64 },
}

/// Case names as used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToyCaseKind {
    Exogenous,
    Unbalanced,
    Interaction,
    Joke,
}

impl ToyCaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ToyCaseKind::Exogenous => "exogenous",
            ToyCaseKind::Unbalanced => "unbalanced",
            ToyCaseKind::Interaction => "interaction",
            ToyCaseKind::Joke => "joke",
        }
    }

    pub fn players(self) -> usize {
        match self {
            ToyCaseKind::Exogenous | ToyCaseKind::Unbalanced => 3,
            ToyCaseKind::Interaction | ToyCaseKind::Joke => 2,
        }
    }
}

impl fmt::Display for ToyCaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ToyCaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exogenous" => Ok(ToyCaseKind::Exogenous),
            "unbalanced" => Ok(ToyCaseKind::Unbalanced),
            "interaction" => Ok(ToyCaseKind::Interaction),
            "joke" => Ok(ToyCaseKind::Joke),
            other => Err(Error::contract(format!("unknown toy case {other:?}"))),
        }
    }
}

impl ToyCase {
    pub fn kind(&self) -> ToyCaseKind {
        match self {
            ToyCase::ExogenousLinear { .. } => ToyCaseKind::Exogenous,
            ToyCase::UnbalancedLinear { .. } => ToyCaseKind::Unbalanced,
            ToyCase::InteractionLinear { .. } => ToyCaseKind::Interaction,
            ToyCase::ShapleyJoke { .. } => ToyCaseKind::Joke,
        }
    }

    pub fn players(&self) -> usize {
        self.kind().players()
    }

    pub fn validate(&self) -> Result<()> {
        let rho = match *self {
            ToyCase::ExogenousLinear { rho } | ToyCase::ShapleyJoke { rho } => rho,
            ToyCase::UnbalancedLinear { rho, beta } => {
                if !beta.is_finite() {
                    return Err(Error::contract(format!("beta must be finite, got {beta}")));
                }
                rho
            }
            ToyCase::InteractionLinear { rho, alpha } => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::contract(format!(
                        "alpha must lie in [0, 1], got {alpha}"
                    )));
                }
                rho
            }
        };
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::contract(format!(
                "rho must lie in (-1, 1), got {rho}"
            )));
        }
        Ok(())
    }

    /// The Gaussian linear model behind the case; `None` for the interaction case.
    pub fn linear_model(&self) -> Result<Option<GaussianLinearModel>> {
        self.validate()?;
        let model = match *self {
            ToyCase::ExogenousLinear { rho } => GaussianLinearModel::centered(
                &[1.0, 1.0, 0.0],
                &[&[1.0, 0.0, rho], &[0.0, 1.0, 0.0], &[rho, 0.0, 1.0]],
            )?,
            ToyCase::UnbalancedLinear { rho, beta } => GaussianLinearModel::centered(
                &[1.0, beta, 1.0],
                &[&[1.0, 0.0, 0.0], &[0.0, 1.0, rho], &[0.0, rho, 1.0]],
            )?,
            ToyCase::ShapleyJoke { rho } => {
                GaussianLinearModel::centered(&[1.0, 0.0], &[&[1.0, rho], &[rho, 1.0]])?
            }
            ToyCase::InteractionLinear { .. } => return Ok(None),
        };
        Ok(Some(model))
    }

    /// Model output, for Monte Carlo checks.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            ToyCase::ExogenousLinear { .. } => x[0] + x[1],
            ToyCase::UnbalancedLinear { beta, .. } => x[0] + beta * x[1] + x[2],
            ToyCase::InteractionLinear { alpha, .. } => x[0] + (1.0 - alpha) * x[1] + x[0] * x[1],
            ToyCase::ShapleyJoke { .. } => x[0],
        }
    }

    /// Input covariance (all inputs are centered).
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        match (*self, self.linear_model()?) {
            (ToyCase::InteractionLinear { rho, .. }, _) => {
                Ok(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
            }
            (_, Some(model)) => Ok(model.sigma().clone()),
            (_, None) => unreachable!("every other case is linear"),
        }
    }

    /// Closed Sobol' indices of the interaction case from bivariate normal
    /// moments. With `c = 1 − α`:
    /// `E[Y|X1=x] = (1 + cρ)x + ρx²`, `E[Y|X2=y] = (ρ + c)y + ρy²`,
    /// and `Var(aX + bX²) = a² + 2b²` for a standard normal `X`;
    /// `Var(Y) = 2 + c² + 2cρ + ρ²`.
    fn interaction_closed(rho: f64, alpha: f64) -> [f64; 4] {
        let c = 1.0 - alpha;
        let var_y = 2.0 + c * c + 2.0 * c * rho + rho * rho;
        let v1 = (1.0 + c * rho).powi(2) + 2.0 * rho * rho;
        let v2 = (rho + c).powi(2) + 2.0 * rho * rho;
        [0.0, v1 / var_y, v2 / var_y, 1.0]
    }

    /// Table of total Sobol' indices.
    pub fn total_table(&self) -> Result<GameTable> {
        self.validate()?;
        match *self {
            ToyCase::InteractionLinear { rho, alpha } => {
                let closed = Self::interaction_closed(rho, alpha);
                GameTable::from_fn(2, |a| 1.0 - closed[a.complement().index()])
            }
            _ => self.linear_model()?.expect("linear case").total_table(),
        }
    }

    /// Table of closed Sobol' indices.
    pub fn closed_table(&self) -> Result<GameTable> {
        self.validate()?;
        match *self {
            ToyCase::InteractionLinear { rho, alpha } => {
                GameTable::new(2, Self::interaction_closed(rho, alpha).to_vec())
            }
            _ => self.linear_model()?.expect("linear case").closed_table(),
        }
    }

    /// Shapley effects and PME from the closed-form reference expressions.
    pub fn reference_allocations(&self) -> Result<(Allocation, Allocation)> {
        self.validate()?;
        let (sh, pme): (Vec<f64>, Vec<f64>) = match *self {
            ToyCase::ExogenousLinear { rho } => {
                let r2 = rho * rho;
                (vec![0.5 - r2 / 4.0, 0.5, r2 / 4.0], vec![0.5, 0.5, 0.0])
            }
            ToyCase::UnbalancedLinear { rho, beta } => {
                let b2 = beta * beta;
                let r2 = rho * rho;
                let var_y = 2.0 + b2 + 2.0 * rho * beta;
                let sh = vec![
                    1.0 / var_y,
                    (b2 + beta * rho + 0.5 * r2 * (1.0 - b2)) / var_y,
                    (1.0 + beta * rho - 0.5 * r2 * (1.0 - b2)) / var_y,
                ];
                let inner = 1.0 + b2 + 2.0 * rho * beta;
                let pme = vec![
                    1.0 / var_y,
                    b2 * inner / (1.0 + b2) / var_y,
                    inner / (1.0 + b2) / var_y,
                ];
                (sh, pme)
            }
            ToyCase::InteractionLinear { rho, alpha } => {
                let c = 1.0 - alpha;
                let c2 = c * c;
                let r2 = rho * rho;
                let var_y = 2.0 + c2 + 2.0 * c * rho + r2;
                let sh = vec![
                    (3.0 + r2 * c2 + 2.0 * rho * c) / (2.0 * var_y),
                    (1.0 + 2.0 * r2 + (2.0 - r2) * c2 + 2.0 * rho * c) / (2.0 * var_y),
                ];
                let pme = vec![2.0 / (3.0 + c2), (c2 + 1.0) / (3.0 + c2)];
                (sh, pme)
            }
            ToyCase::ShapleyJoke { rho } => {
                let r2 = rho * rho;
                (vec![1.0 - r2 / 2.0, r2 / 2.0], vec![1.0, 0.0])
            }
        };
        Ok((
            Allocation::new(sh, 1.0, Method::Shapley),
            Allocation::new(pme, 1.0, Method::Pme),
        ))
    }

    /// Shapley effects and PME computed from the total index table.
    pub fn pipeline_allocations(&self, tau: f64) -> Result<(Allocation, Allocation)> {
        let st = self.total_table()?;
        Ok((
            shapley_effects_from_indices(&st),
            pme_from_total_indices(&st, tau)?,
        ))
    }
}

/// One row of a toy-case sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param_name: &'static str,
    pub param_value: f64,
    pub player: usize,
    pub shapley: f64,
    pub pme: f64,
}

/// Writes `param_name,param_value,player,shapley,pme` rows, players 1-based.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "param_name,param_value,player,shapley,pme")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.param_name,
            format_value(r.param_value),
            r.player + 1,
            format_value(r.shapley),
            format_value(r.pme)
        )?;
    }
    Ok(())
}

/// The symmetric correlation grid `-0.99, -0.98, ..., 0.99`.
pub fn rho_grid() -> Vec<f64> {
    (-99..=99).map(|k| k as f64 / 100.0).collect()
}
