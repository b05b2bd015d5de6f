//! Problem representation and the closed-form primal/dual quantities.
//!
//! The primal problem is
//!
//! ```text
//! P(beta) = sum_i l(x_i^T beta, y_i) + l1 ||beta||_1 + l2 ||beta||_2^2 + l0 ||beta||_0
//! ```
//!
//! and its dual, for `alpha` in the loss's feasible set, is
//!
//! ```text
//! D(alpha) = -sum_i l*(alpha_i, y_i) + sum_j psi(eta_j(alpha)),   eta(alpha) = -X^T alpha / (2 l2)
//! ```
//!
//! where `psi` and the primal-dual link are the per-coordinate minimum value
//! and minimizer of the Lagrangian. Ties at `|eta_j| = eta0` resolve to the
//! nonzero branch; both branches have the same objective value there.

use crate::error::{Error, Result};
use crate::losses::LossModel;
use crate::matrix::{dot, DenseMatrix};

/// The three regularization weights.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Penalty {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Penalty {
    /// `lambda0` may be `+inf` (forces the empty model); `lambda2` must be
    /// strictly positive.
    pub fn new(lambda0: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if lambda0.is_nan() || lambda0 < 0.0 {
            return Err(Error::Config(format!(
                "lambda0 must be >= 0, got {lambda0}"
            )));
        }
        if !lambda1.is_finite() || lambda1 < 0.0 {
            return Err(Error::Config(format!(
                "lambda1 must be finite and >= 0, got {lambda1}"
            )));
        }
        if !lambda2.is_finite() || lambda2 <= 0.0 {
            return Err(Error::Config(format!(
                "lambda2 must be finite and > 0, got {lambda2}"
            )));
        }
        Ok(Self {
            lambda0,
            lambda1,
            lambda2,
        })
    }

    /// `eta0 = (2 sqrt(l0 l2) + l1) / (2 l2)`.
    #[inline]
    pub fn eta_threshold(&self) -> f64 {
        self.screening_threshold() / (2.0 * self.lambda2)
    }

    /// `2 l2 eta0 = 2 sqrt(l0 l2) + l1`, the bound on `|x_j^T alpha|` below
    /// which feature `j` is inactive.
    #[inline]
    pub fn screening_threshold(&self) -> f64 {
        2.0 * (self.lambda0 * self.lambda2).sqrt() + self.lambda1
    }

    /// Primal-dual link: the minimizer over `u` of the Lagrangian's
    /// coordinate term at `eta`.
    #[inline]
    pub fn link(&self, eta: f64) -> f64 {
        let mag = eta.abs();
        if mag >= self.eta_threshold() {
            eta.signum() * (mag - self.lambda1 / (2.0 * self.lambda2))
        } else {
            0.0
        }
    }

    /// Coordinate contribution to the dual objective.
    #[inline]
    pub fn psi(&self, eta: f64) -> f64 {
        let mag = eta.abs();
        if mag >= self.eta_threshold() {
            let s = mag - self.lambda1 / (2.0 * self.lambda2);
            -self.lambda2 * s * s + self.lambda0
        } else {
            0.0
        }
    }

    /// Exact minimizer of
    /// `(curvature / 2 + l2) u^2 - beta_tilde u + l1 |u| + l0 [u != 0]`.
    ///
    /// With `curvature = ||x_j||^2 = 1` this is the thresholded coordinate
    /// update `sign(bt) (|bt| - l1) / (1 + 2 l2)`, kept only when its
    /// magnitude reaches `sqrt(2 l0 / (1 + 2 l2))`.
    #[inline]
    pub fn coordinate_threshold(&self, beta_tilde: f64, curvature: f64) -> f64 {
        let mag = beta_tilde.abs();
        if mag <= self.lambda1 {
            return 0.0;
        }
        let denom = curvature + 2.0 * self.lambda2;
        let cand = (mag - self.lambda1) / denom;
        if cand >= (2.0 * self.lambda0 / denom).sqrt() {
            beta_tilde.signum() * cand
        } else {
            0.0
        }
    }

    /// `l0 ||beta||_0 + l1 ||beta||_1 + l2 ||beta||^2`. `||beta||_0` counts
    /// exact nonzeros.
    pub fn value(&self, beta: &[f64]) -> f64 {
        let mut nnz = 0usize;
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for &b in beta {
            if b != 0.0 {
                nnz += 1;
                l1 += b.abs();
                l2 += b * b;
            }
        }
        let l0_term = if nnz == 0 {
            0.0
        } else {
            self.lambda0 * nnz as f64
        };
        l0_term + self.lambda1 * l1 + self.lambda2 * l2
    }
}

/// Design matrix, response and penalty weights.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    x: DenseMatrix,
    y: Vec<f64>,
    penalty: Penalty,
    col_norms: Vec<f64>,
    col_sq_norms: Vec<f64>,
}

impl ProblemSpec {
    pub fn new(x: DenseMatrix, y: Vec<f64>, penalty: Penalty) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(Error::DimensionMismatch {
                what: "response",
                expected: x.n_rows(),
                got: y.len(),
            });
        }
        if let Some(bad) = x.as_col_major().iter().chain(&y).find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite data value {bad}")));
        }
        let col_sq_norms: Vec<f64> = (0..x.n_cols()).map(|j| dot(x.col(j), x.col(j))).collect();
        let col_norms = col_sq_norms.iter().map(|v| v.sqrt()).collect();
        Ok(Self {
            x,
            y,
            penalty,
            col_norms,
            col_sq_norms,
        })
    }

    pub fn with_lambdas(x: DenseMatrix, y: Vec<f64>, l0: f64, l1: f64, l2: f64) -> Result<Self> {
        Self::new(x, y, Penalty::new(l0, l1, l2)?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.n_rows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.x.n_cols()
    }

    #[inline]
    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn penalty(&self) -> &Penalty {
        &self.penalty
    }

    #[inline]
    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    #[inline]
    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norms
    }

    /// Same data with different penalty weights.
    pub fn with_penalty(&self, penalty: Penalty) -> Self {
        Self {
            penalty,
            ..self.clone()
        }
    }

    /// Sub-problem on the listed columns (in the listed order).
    pub fn restrict(&self, cols: &[usize]) -> Self {
        Self {
            x: self.x.select_columns(cols),
            y: self.y.clone(),
            penalty: self.penalty,
            col_norms: cols.iter().map(|&j| self.col_norms[j]).collect(),
            col_sq_norms: cols.iter().map(|&j| self.col_sq_norms[j]).collect(),
        }
    }

    pub(crate) fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.p() {
            return Err(Error::DimensionMismatch {
                what: "beta",
                expected: self.p(),
                got: beta.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_alpha<L: LossModel + ?Sized>(&self, alpha: &[f64], loss: &L) -> Result<()> {
        if alpha.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "alpha",
                expected: self.n(),
                got: alpha.len(),
            });
        }
        if let Some((index, &value)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !loss.is_feasible(**a))
        {
            return Err(Error::InfeasibleDual { index, value });
        }
        Ok(())
    }
}

/// Primal objective, dual objective, their difference and the radius of
/// the dual ball that contains the dual optimum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GapCertificate {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub radius: f64,
}

impl GapCertificate {
    /// `radius = sqrt(2 max(gap, 0) / gamma)`; the raw gap is kept as is.
    pub fn new(primal: f64, dual: f64, gamma: f64) -> Self {
        let gap = primal - dual;
        Self {
            primal,
            dual,
            gap,
            radius: gap_radius(gap, gamma),
        }
    }
}

#[inline]
pub fn gap_radius(gap: f64, gamma: f64) -> f64 {
    (2.0 * gap.max(0.0) / gamma).sqrt()
}

/// `eta(alpha) = -X^T alpha / (2 l2)`.
pub fn eta(problem: &ProblemSpec, alpha: &[f64]) -> Result<Vec<f64>> {
    if alpha.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            what: "alpha",
            expected: problem.n(),
            got: alpha.len(),
        });
    }
    Ok(eta_from_products(problem, &problem.x.tr_mul_vec(alpha)))
}

/// `eta` given precomputed `X^T alpha`.
#[inline]
pub(crate) fn eta_from_products(problem: &ProblemSpec, xt_alpha: &[f64]) -> Vec<f64> {
    let scale = -1.0 / (2.0 * problem.penalty.lambda2);
    xt_alpha.iter().map(|v| v * scale).collect()
}

pub fn eta_threshold(problem: &ProblemSpec) -> f64 {
    problem.penalty.eta_threshold()
}

pub fn link_b(eta_j: f64, problem: &ProblemSpec) -> f64 {
    problem.penalty.link(eta_j)
}

pub fn psi(eta_j: f64, problem: &ProblemSpec) -> f64 {
    problem.penalty.psi(eta_j)
}

/// Primal vector obtained by linking every coordinate of `eta(alpha)`.
pub fn linked_primal(problem: &ProblemSpec, alpha: &[f64]) -> Result<Vec<f64>> {
    Ok(eta(problem, alpha)?
        .into_iter()
        .map(|e| problem.penalty.link(e))
        .collect())
}

pub(crate) fn loss_sum<L: LossModel + ?Sized>(loss: &L, fit: &[f64], y: &[f64]) -> f64 {
    fit.iter().zip(y).map(|(&u, &yi)| loss.eval(u, yi)).sum()
}

pub(crate) fn conj_sum<L: LossModel + ?Sized>(loss: &L, alpha: &[f64], y: &[f64]) -> f64 {
    alpha.iter().zip(y).map(|(&a, &yi)| loss.conj(a, yi)).sum()
}

pub fn primal_objective<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    loss: &L,
) -> Result<f64> {
    problem.check_beta(beta)?;
    let fit = problem.x.mul_vec(beta);
    Ok(primal_from_fit(problem, beta, &fit, loss))
}

#[inline]
pub(crate) fn primal_from_fit<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    fit: &[f64],
    loss: &L,
) -> f64 {
    loss_sum(loss, fit, &problem.y) + problem.penalty.value(beta)
}

pub fn dual_objective<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    alpha: &[f64],
    loss: &L,
) -> Result<f64> {
    problem.check_alpha(alpha, loss)?;
    let etas = eta(problem, alpha)?;
    Ok(dual_from_eta(problem, alpha, &etas, loss))
}

#[inline]
pub(crate) fn dual_from_eta<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    alpha: &[f64],
    etas: &[f64],
    loss: &L,
) -> f64 {
    let psi_sum: f64 = etas.iter().map(|&e| problem.penalty.psi(e)).sum();
    -conj_sum(loss, alpha, &problem.y) + psi_sum
}

/// `L(beta, alpha) = sum_i (alpha_i x_i^T beta - l*(alpha_i)) + penalty(beta)`.
pub fn lagrangian<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    alpha: &[f64],
    loss: &L,
) -> Result<f64> {
    problem.check_beta(beta)?;
    problem.check_alpha(alpha, loss)?;
    let fit = problem.x.mul_vec(beta);
    Ok(dot(alpha, &fit) - conj_sum(loss, alpha, &problem.y) + problem.penalty.value(beta))
}

/// Thresholded coordinate update for feature `j` of the squared-loss
/// problem, computed from scratch.
pub fn cd_threshold_t(problem: &ProblemSpec, beta: &[f64], j: usize) -> Result<f64> {
    problem.check_beta(beta)?;
    if j >= problem.p() {
        return Err(Error::IndexOutOfRange {
            index: j,
            p: problem.p(),
        });
    }
    let fit = problem.x.mul_vec(beta);
    let resid: Vec<f64> = problem.y.iter().zip(&fit).map(|(y, f)| y - f).collect();
    let a = problem.col_sq_norms[j];
    let beta_tilde = dot(&resid, problem.x.col(j)) + beta[j] * a;
    Ok(problem.penalty.coordinate_threshold(beta_tilde, a))
}

/// One cyclic pass of thresholded coordinate updates over `coords`, in the
/// given order, keeping `fit = X beta` current. Returns whether any
/// coordinate changed.
///
/// For the squared loss each update is an exact coordinate minimization.
/// For other losses the update minimizes the `1/mu`-smooth quadratic upper
/// bound, which still never increases the objective.
pub(crate) fn sweep_in_place<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    loss: &L,
    beta: &mut [f64],
    fit: &mut [f64],
    coords: impl IntoIterator<Item = usize>,
) -> bool {
    let inv_mu = 1.0 / loss.mu();
    let mut changed = false;
    let y = &problem.y;
    for j in coords {
        let col = problem.x.col(j);
        let curvature = problem.col_sq_norms[j] * inv_mu;
        let old = beta[j];
        let new = if curvature == 0.0 {
            0.0
        } else {
            let mut grad = 0.0;
            for ((&xij, &u), &yi) in col.iter().zip(fit.iter()).zip(y) {
                grad += loss.deriv(u, yi) * xij;
            }
            problem
                .penalty
                .coordinate_threshold(curvature * old - grad, curvature)
        };
        if new != old {
            crate::matrix::axpy(new - old, col, fit);
            beta[j] = new;
            changed = true;
        }
    }
    changed
}

/// One cyclic coordinate-descent pass over `active` in ascending index
/// order. Coordinates outside `active` are left untouched.
pub fn cd_sweep<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    active: &[usize],
    loss: &L,
) -> Result<Vec<f64>> {
    problem.check_beta(beta)?;
    let mut order = active.to_vec();
    order.sort_unstable();
    order.dedup();
    if let Some(&bad) = order.iter().find(|&&j| j >= problem.p()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            p: problem.p(),
        });
    }
    let mut out = beta.to_vec();
    let mut fit = problem.x.mul_vec(beta);
    sweep_in_place(problem, loss, &mut out, &mut fit, order);
    Ok(out)
}

/// Certificate for the pair `(beta, alpha)` with `gamma = loss.mu()`.
pub fn duality_gap<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    alpha: &[f64],
    loss: &L,
) -> Result<GapCertificate> {
    let primal = primal_objective(problem, beta, loss)?;
    let dual = dual_objective(problem, alpha, loss)?;
    Ok(GapCertificate::new(primal, dual, loss.mu()))
}

/// Dual point matched to `beta`: `alpha_i = P_F(l*'^{-1}(x_i^T beta))`.
pub fn dual_from_primal<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    loss: &L,
) -> Result<Vec<f64>> {
    problem.check_beta(beta)?;
    let fit = problem.x.mul_vec(beta);
    Ok(dual_from_fit_vec(problem, &fit, loss))
}

pub(crate) fn dual_from_fit_vec<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    fit: &[f64],
    loss: &L,
) -> Vec<f64> {
    fit.iter()
        .zip(&problem.y)
        .map(|(&u, &yi)| loss.project_feasible(loss.dual_from_fit(u, yi)))
        .collect()
}
