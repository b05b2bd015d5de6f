//! Synthetic sparse regression data and recovery metrics.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{norm2, DenseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    /// Correlation between adjacent columns; `Σ_ij = rho^|i-j|`.
    pub rho: f64,
    pub support_frac: f64,
    pub snr: f64,
    pub coef_low: f64,
    pub coef_high: f64,
    /// Nonzero coefficients with `|v| < coef_floor` are redrawn.
    pub coef_floor: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 200,
            p: 3000,
            rho: 0.4,
            support_frac: 0.03,
            snr: 20.0,
            coef_low: -1.0,
            coef_high: 1.0,
            coef_floor: 0.1,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    /// Number of true nonzeros, `round(support_frac * p)`.
    pub fn support_size(&self) -> usize {
        (self.support_frac * self.p as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Spec("n and p must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Spec(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if !(self.support_frac > 0.0 && self.support_frac <= 1.0) {
            return Err(Error::Spec(format!(
                "support_frac must lie in (0, 1], got {}",
                self.support_frac
            )));
        }
        if self.support_size() == 0 {
            return Err(Error::Spec(format!(
                "support_frac {} rounds to an empty support at p = {}",
                self.support_frac, self.p
            )));
        }
        if self.snr.is_nan() || self.snr <= 0.0 {
            return Err(Error::Spec(format!(
                "snr must be positive, got {}",
                self.snr
            )));
        }
        if !(self.coef_low.is_finite()
            && self.coef_high.is_finite()
            && self.coef_low < self.coef_high)
        {
            return Err(Error::Spec("need finite coef_low < coef_high".into()));
        }
        let floor = self.coef_floor;
        if floor.is_nan() || floor < 0.0 || (self.coef_low > -floor && self.coef_high < floor) {
            return Err(Error::Spec(format!(
                "coefficient floor {floor} leaves no admissible values in [{}, {}]",
                self.coef_low, self.coef_high
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub beta_true: Vec<f64>,
    pub noise_sigma: f64,
}

impl SyntheticDataset {
    pub fn true_support(&self) -> Vec<usize> {
        crate::solution::support_of(&self.beta_true)
    }
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let innov = (1.0 - spec.rho * spec.rho).sqrt();
    let mut x = DenseMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let v = if j == 0 {
                z
            } else {
                spec.rho * prev + innov * z
            };
            x.set(i, j, v);
            prev = v;
        }
    }

    let mut support = sample(&mut rng, p, spec.support_size()).into_vec();
    support.sort_unstable();
    let mut beta_true = vec![0.0; p];
    for &j in &support {
        beta_true[j] = loop {
            let v = rng.random_range(spec.coef_low..=spec.coef_high);
            if v.abs() >= spec.coef_floor && v != 0.0 {
                break v;
            }
        };
    }

    let signal = x.mul_vec(&beta_true);
    let noise_sigma = (sample_variance(&signal) / spec.snr).sqrt();
    let y = signal
        .iter()
        .map(|s| {
            let e: f64 = rng.sample(StandardNormal);
            s + noise_sigma * e
        })
        .collect();

    Ok(SyntheticDataset {
        x,
        y,
        beta_true,
        noise_sigma,
    })
}

/// Fraction of estimated supports equal to `true_support`.
pub fn pssr(estimated: &[Vec<usize>], true_support: &[usize]) -> Result<f64> {
    if estimated.is_empty() {
        return Err(Error::Config("pssr needs at least one replicate".into()));
    }
    let mut truth = true_support.to_vec();
    truth.sort_unstable();
    let hits = estimated
        .iter()
        .filter(|s| {
            let mut s = s.to_vec();
            s.sort_unstable();
            s == truth
        })
        .count();
    Ok(hits as f64 / estimated.len() as f64)
}

/// `||beta - beta_true|| / ||beta_true||`.
pub fn estimation_error(beta: &[f64], beta_true: &[f64]) -> Result<f64> {
    if beta.len() != beta_true.len() {
        return Err(Error::DimensionMismatch {
            what: "beta",
            expected: beta_true.len(),
            got: beta.len(),
        });
    }
    let denom = norm2(beta_true);
    if denom == 0.0 {
        return Err(Error::Config("beta_true must be nonzero".into()));
    }
    let diff: Vec<f64> = beta.iter().zip(beta_true).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / denom)
}

/// Affine map taking the raw design to centered, unit-norm columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub x_means: Vec<f64>,
    /// Norm of each centered column; zero for constant columns.
    pub x_scales: Vec<f64>,
    pub y_mean: f64,
}

impl Standardization {
    /// Coefficients on the raw scale; constant columns get 0.
    pub fn coef_to_raw(&self, beta_std: &[f64]) -> Vec<f64> {
        beta_std
            .iter()
            .zip(&self.x_scales)
            .map(|(&b, &s)| if s > 0.0 { b / s } else { 0.0 })
            .collect()
    }

    /// Intercept that pairs with [`coef_to_raw`](Self::coef_to_raw).
    pub fn intercept(&self, beta_raw: &[f64]) -> f64 {
        self.y_mean
            - self
                .x_means
                .iter()
                .zip(beta_raw)
                .map(|(m, b)| m * b)
                .sum::<f64>()
    }
}

/// Centers every column and scales it to unit Euclidean norm, and centers `y`.
/// Constant columns become all-zero.
pub fn standardize(x: &DenseMatrix, y: &[f64]) -> (DenseMatrix, Vec<f64>, Standardization) {
    let n = x.n_rows();
    let mut out = x.clone();
    let mut x_means = Vec::with_capacity(x.n_cols());
    let mut x_scales = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let col = out.col_mut(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        col.iter_mut().for_each(|v| *v -= mean);
        let scale = norm2(col);
        if scale > 1e-12 * (1.0 + mean.abs()) * (n as f64).sqrt() {
            col.iter_mut().for_each(|v| *v /= scale);
            x_scales.push(scale);
        } else {
            col.iter_mut().for_each(|v| *v = 0.0);
            x_scales.push(0.0);
        }
        x_means.push(mean);
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let yc = y.iter().map(|v| v - y_mean).collect();
    (
        out,
        yc,
        Standardization {
            x_means,
            x_scales,
            y_mean,
        },
    )
}
