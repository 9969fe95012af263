//! Benchmark models and their input laws.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::gaussian::{
    check_covariance, select_matrix, select_vector, GaussianLinearModel, ToyCase,
};
use crate::rng::{self, StreamRng};

/// A deterministic model `y = G(x)`.
pub trait Model: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

/// Wraps a closure as a [`Model`].
pub struct FnModel<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnModel<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Model for FnModel<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl Model for GaussianLinearModel {
    fn dim(&self) -> usize {
        GaussianLinearModel::dim(self)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        GaussianLinearModel::eval(self, x)
    }
}

impl Model for ToyCase {
    fn dim(&self) -> usize {
        self.players()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        ToyCase::eval(self, x)
    }
}

/// `sin(x1) + 7 sin²(x2) + 0.1 x3⁴ sin(x1)`; the fourth input is unused.
pub fn ishigami(x: &[f64; 4]) -> f64 {
    let s1 = x[0].sin();
    let s2 = x[1].sin();
    s1 + 7.0 * s2 * s2 + 0.1 * x[2].powi(4) * s1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ishigami;

impl Model for Ishigami {
    fn dim(&self) -> usize {
        4
    }

    fn eval(&self, x: &[f64]) -> f64 {
        ishigami(&[x[0], x[1], x[2], x[3]])
    }
}

/// Ishigami inputs: centered Gaussians with variance `(π/3)²` and covariance
/// `rho` between the first and fourth input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IshigamiConfig {
    pub rho: f64,
}

impl IshigamiConfig {
    pub const MAX_ABS_RHO: f64 = 0.99;

    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() <= Self::MAX_ABS_RHO) {
            return Err(Error::contract(format!(
                "Ishigami covariance must satisfy |rho| <= {}, got {rho}",
                Self::MAX_ABS_RHO
            )));
        }
        Ok(Self { rho })
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let s2 = (PI / 3.0).powi(2);
        let mut sigma = DMatrix::from_diagonal_element(4, 4, s2);
        sigma[(0, 3)] = self.rho;
        sigma[(3, 0)] = self.rho;
        sigma
    }

    pub fn input_law(&self) -> Result<GaussianSampler> {
        GaussianSampler::new(DVector::zeros(4), self.covariance())
    }
}

/// Distance of the tip of a four-segment planar arm to the origin, for
/// segment lengths `l` and relative angles `a`.
pub fn robot_arm(l: &[f64; 4], a: &[f64; 4]) -> f64 {
    let mut u = 0.0;
    let mut v = 0.0;
    let mut angle = 0.0;
    for i in 0..4 {
        angle += a[i];
        u += l[i] * angle.cos();
        v += l[i] * angle.sin();
    }
    (u * u + v * v).sqrt()
}

/// Robot arm on the input vector `(A1, A2, A3, A4, L1, L2, L3, L4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotArm;

impl RobotArm {
    pub const INPUT_NAMES: [&'static str; 8] = ["A1", "A2", "A3", "A4", "L1", "L2", "L3", "L4"];
}

impl Model for RobotArm {
    fn dim(&self) -> usize {
        8
    }

    fn eval(&self, x: &[f64]) -> f64 {
        robot_arm(&[x[4], x[5], x[6], x[7]], &[x[0], x[1], x[2], x[3]])
    }
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn standard_normals(n: usize, rng: &mut StreamRng) -> impl Iterator<Item = f64> + '_ {
    (0..n).map(move |_| StandardNormal.sample(rng))
}

/// Input law of the robot arm.
///
/// Angles are uniform on `[0, 2π]`, coupled through a Gaussian copula with a
/// common pairwise correlation. Lengths are built sequentially:
/// `L1 ~ U(0, 1)` and `L_i ~ U(0, L_{i−1})`, drawn as products of uniforms.
#[derive(Debug, Clone)]
pub struct RobotInputLaw {
    angle_copula_corr: f64,
    copula_chol: DMatrix<f64>,
}

impl RobotInputLaw {
    pub const DEFAULT_ANGLE_CORRELATION: f64 = 0.95;

    pub fn new(angle_copula_corr: f64) -> Result<Self> {
        let mut r = DMatrix::from_element(4, 4, angle_copula_corr);
        r.fill_diagonal(1.0);
        check_covariance(&r)?;
        let copula_chol = r.cholesky().expect("checked above").l();
        Ok(Self {
            angle_copula_corr,
            copula_chol,
        })
    }

    pub fn angle_copula_corr(&self) -> f64 {
        self.angle_copula_corr
    }

    /// `n × 8` matrix with columns `A1..A4, L1..L4`.
    pub fn sample(&self, n: usize, rng: &mut StreamRng) -> DMatrix<f64> {
        let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
        let mut out = DMatrix::zeros(n, 8);
        for row in 0..n {
            let z = DVector::from_iterator(4, standard_normals(4, rng));
            let correlated = &self.copula_chol * z;
            for k in 0..4 {
                out[(row, k)] = 2.0 * PI * normal_cdf(correlated[k]);
            }
            let mut length = 1.0;
            for k in 0..4 {
                length *= unit.sample(rng);
                out[(row, 4 + k)] = length;
            }
        }
        out
    }
}

impl Default for RobotInputLaw {
    fn default() -> Self {
        Self::new(Self::DEFAULT_ANGLE_CORRELATION)
            .expect("0.95 equicorrelation is positive definite")
    }
}

/// `n` robot-arm input rows (`A1..A4, L1..L4`) from the default law.
pub fn sample_robot_inputs(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, rng::purpose::DATASET, 0, 0);
    RobotInputLaw::default().sample(n, &mut rng)
}

/// A joint input law that can also draw from its conditional distributions.
pub trait InputLaw: Sync {
    fn dim(&self) -> usize;

    /// `n × d` matrix of i.i.d. joint draws.
    fn sample_joint(&self, n: usize, rng: &mut StreamRng) -> DMatrix<f64>;

    /// Sampler for `X_free | X_given` where `given` is the complement of `free`.
    fn conditional(&self, free: Coalition) -> Result<Box<dyn ConditionalLaw + '_>>;
}

pub trait ConditionalLaw {
    /// Indices of the sampled inputs.
    fn free(&self) -> &[usize];

    /// Indices of the conditioning inputs.
    fn given(&self) -> &[usize];

    /// One draw of the conditioning block from its marginal law.
    fn sample_given(&self, rng: &mut StreamRng) -> Vec<f64>;

    /// `n × |free|` draws of the free block given the conditioning values.
    fn sample_free(&self, given: &[f64], n: usize, rng: &mut StreamRng) -> DMatrix<f64>;
}

/// Multivariate normal law `N(μ, Σ)` sampled through its Cholesky factor.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    chol_l: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        if mu.len() != sigma.nrows() {
            return Err(Error::contract("mean and covariance dimensions differ"));
        }
        check_covariance(&sigma)?;
        let chol_l = sigma.clone().cholesky().expect("checked above").l();
        Ok(Self { mu, sigma, chol_l })
    }

    pub fn from_model(model: &GaussianLinearModel) -> Result<Self> {
        Self::new(model.mu().clone(), model.sigma().clone())
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sample(&self, n: usize, rng: &mut StreamRng) -> DMatrix<f64> {
        draw_rows(&self.mu, &self.chol_l, n, rng)
    }

    pub fn conditional_gaussian(&self, free: Coalition) -> Result<ConditionalGaussian> {
        ConditionalGaussian::new(self, free)
    }
}

fn draw_rows(
    mean: &DVector<f64>,
    chol_l: &DMatrix<f64>,
    n: usize,
    rng: &mut StreamRng,
) -> DMatrix<f64> {
    let d = mean.len();
    let mut out = DMatrix::zeros(n, d);
    let mut z = DVector::zeros(d);
    for row in 0..n {
        for (k, v) in standard_normals(d, rng).enumerate() {
            z[k] = v;
        }
        let x = mean + chol_l * &z;
        out.row_mut(row).copy_from(&x.transpose());
    }
    out
}

impl InputLaw for GaussianSampler {
    fn dim(&self) -> usize {
        self.mu.len()
    }

    fn sample_joint(&self, n: usize, rng: &mut StreamRng) -> DMatrix<f64> {
        self.sample(n, rng)
    }

    fn conditional(&self, free: Coalition) -> Result<Box<dyn ConditionalLaw + '_>> {
        Ok(Box::new(self.conditional_gaussian(free)?))
    }
}

/// Law of `X_A | X_Ā = x̄` for a Gaussian vector:
/// mean `μ_A + Σ_AĀ Σ_ĀĀ^{-1} (x̄ − μ_Ā)`, covariance the Schur complement
/// `Σ_AA − Σ_AĀ Σ_ĀĀ^{-1} Σ_ĀA`.
#[derive(Debug, Clone)]
pub struct ConditionalGaussian {
    free: Vec<usize>,
    given: Vec<usize>,
    mu_free: DVector<f64>,
    mu_given: DVector<f64>,
    given_chol_l: DMatrix<f64>,
    gain: DMatrix<f64>,
    schur: DMatrix<f64>,
    schur_chol_l: DMatrix<f64>,
}

impl ConditionalGaussian {
    fn new(law: &GaussianSampler, free: Coalition) -> Result<Self> {
        if free.players() != law.dim() {
            return Err(Error::contract("coalition and law dimensions differ"));
        }
        let free_idx: Vec<usize> = free.members().collect();
        let given_idx: Vec<usize> = free.complement().members().collect();
        let s_ff = select_matrix(&law.sigma, &free_idx, &free_idx);
        let (gain, schur, given_chol_l) = if given_idx.is_empty() {
            (
                DMatrix::zeros(free_idx.len(), 0),
                s_ff,
                DMatrix::zeros(0, 0),
            )
        } else {
            let s_gg = select_matrix(&law.sigma, &given_idx, &given_idx);
            let s_gf = select_matrix(&law.sigma, &given_idx, &free_idx);
            let chol = s_gg
                .cholesky()
                .ok_or_else(|| Error::LinearAlgebra("conditioning block is singular".into()))?;
            // gain = Σ_FG Σ_GG^{-1}, from Σ_GG^{-1} Σ_GF transposed
            let gain = chol.solve(&s_gf).transpose();
            let schur = &s_ff - &gain * &s_gf;
            (gain, schur, chol.l())
        };
        let schur = (&schur + schur.transpose()) * 0.5;
        let schur_chol_l = if free_idx.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            schur
                .clone()
                .cholesky()
                .ok_or_else(|| Error::LinearAlgebra("conditional covariance is singular".into()))?
                .l()
        };
        Ok(Self {
            mu_free: select_vector(&law.mu, &free_idx),
            mu_given: select_vector(&law.mu, &given_idx),
            free: free_idx,
            given: given_idx,
            given_chol_l,
            gain,
            schur,
            schur_chol_l,
        })
    }

    pub fn conditional_mean(&self, given: &[f64]) -> DVector<f64> {
        if self.given.is_empty() {
            return self.mu_free.clone();
        }
        let shift = DVector::from_column_slice(given) - &self.mu_given;
        &self.mu_free + &self.gain * shift
    }

    pub fn conditional_covariance(&self) -> &DMatrix<f64> {
        &self.schur
    }
}

impl ConditionalLaw for ConditionalGaussian {
    fn free(&self) -> &[usize] {
        &self.free
    }

    fn given(&self) -> &[usize] {
        &self.given
    }

    fn sample_given(&self, rng: &mut StreamRng) -> Vec<f64> {
        if self.given.is_empty() {
            return Vec::new();
        }
        let z = DVector::from_iterator(self.given.len(), standard_normals(self.given.len(), rng));
        (&self.mu_given + &self.given_chol_l * z)
            .iter()
            .copied()
            .collect()
    }

    fn sample_free(&self, given: &[f64], n: usize, rng: &mut StreamRng) -> DMatrix<f64> {
        let mean = self.conditional_mean(given);
        draw_rows(&mean, &self.schur_chol_l, n, rng)
    }
}

/// `n` i.i.d. draws of `N(mu, sigma)` as an `n × d` matrix.
pub fn sample_gaussian(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    n: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let law = GaussianSampler::new(mu.clone(), sigma.clone())?;
    let mut rng = rng::stream(seed, rng::purpose::JOINT_SAMPLE, 0, 0);
    Ok(law.sample(n, &mut rng))
}

/// `n` draws of `X_A | X_Ā = x_bar` as an `n × |A|` matrix.
pub fn sample_conditional_gaussian(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    free: Coalition,
    x_bar: &[f64],
    n: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let law = GaussianSampler::new(mu.clone(), sigma.clone())?;
    let cond = law.conditional_gaussian(free)?;
    if x_bar.len() != cond.given.len() {
        return Err(Error::contract(format!(
            "expected {} conditioning values, got {}",
            cond.given.len(),
            x_bar.len()
        )));
    }
    let mut rng = rng::stream(seed, rng::purpose::JOINT_SAMPLE, 1, free.bits() as u64);
    Ok(cond.sample_free(x_bar, n, &mut rng))
}

/// Pearson correlation of two columns.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
