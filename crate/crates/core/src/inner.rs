//! Inner primal-dual solver.
//!
//! Each iteration takes a projected super-gradient step on the dual,
//! links the new dual point back to the primal, polishes the primal with
//! up to `cd_passes` cyclic coordinate-descent passes and evaluates the
//! duality gap of the (sub-)problem it was given. The pair with the smallest observed gap is
//! returned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::LossModel;
use crate::matrix::dot;
use crate::model::{self, ProblemSpec};

/// Dual step-size schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    /// `omega_t = omega`.
    Fixed,
    /// `omega_t = omega / (t * gamma)` with `gamma = mu`.
    InverseT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    pub step_size: f64,
    pub schedule: StepSchedule,
    /// Stop once `|gap(t-2) - gap(t)| <= zeta`.
    pub zeta: f64,
    /// Stop once `gap(t) <= eps`.
    pub eps: f64,
    pub max_iters: usize,
    /// Coordinate-descent passes per iteration; passes after the first stop
    /// early once a pass leaves `beta` unchanged.
    pub cd_passes: usize,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            step_size: 5e-4,
            schedule: StepSchedule::Fixed,
            zeta: 1e-6,
            eps: 1e-6,
            max_iters: 100_000,
            cd_passes: 1,
        }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        };
        positive("step_size", self.step_size)?;
        positive("zeta", self.zeta)?;
        positive("eps", self.eps)?;
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.cd_passes == 0 {
            return Err(Error::Config("cd_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why an iterative loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GapLeqEps,
    GapChangeLeqZeta,
    GapIncreasing,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    /// Coefficients over the columns of the problem that was solved.
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    pub sub_gap: f64,
    /// Iterations performed (not the index of the returned iterate).
    pub iterations: usize,
    /// Coordinate-descent passes performed over all iterations.
    pub cd_passes: usize,
    /// Iteration that produced the returned pair; 0 is the initial pair.
    pub best_iteration: usize,
    pub stop_reason: StopReason,
}

/// Per-iteration trace record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// How the primal iterate is formed after the dual step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PrimalStep {
    /// Link, then ascending coordinate-descent passes.
    CoordinateSweep,
    /// Link only.
    LinkOnly,
    /// Link, then keep the `k` largest magnitudes.
    HardThreshold(usize),
}

/// `g_i = x_i^T beta - l*'(alpha_i)`; for the squared loss `X beta - y - alpha`.
pub fn super_gradient<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    alpha: &[f64],
    loss: &L,
) -> Result<Vec<f64>> {
    problem.check_beta(beta)?;
    problem.check_alpha(alpha, loss)?;
    let fit = problem.x().mul_vec(beta);
    Ok(gradient_from_fit(&fit, alpha, problem.y(), loss))
}

#[inline]
fn gradient_from_fit<L: LossModel + ?Sized>(
    fit: &[f64],
    alpha: &[f64],
    y: &[f64],
    loss: &L,
) -> Vec<f64> {
    fit.iter()
        .zip(alpha)
        .zip(y)
        .map(|((&u, &a), &yi)| u - loss.conj_deriv(a, yi))
        .collect()
}

pub fn inner_solve<L: LossModel + ?Sized>(
    problem_active: &ProblemSpec,
    init_beta: &[f64],
    init_alpha: &[f64],
    cfg: &InnerConfig,
    loss: &L,
) -> Result<InnerResult> {
    dual_loop(
        problem_active,
        init_beta,
        init_alpha,
        cfg,
        loss,
        PrimalStep::CoordinateSweep,
        &mut |_| {},
    )
}

/// [`inner_solve`] reporting every iteration to `trace`.
pub fn inner_solve_traced<L: LossModel + ?Sized>(
    problem_active: &ProblemSpec,
    init_beta: &[f64],
    init_alpha: &[f64],
    cfg: &InnerConfig,
    loss: &L,
    trace: &mut dyn FnMut(&IterationRecord),
) -> Result<InnerResult> {
    dual_loop(
        problem_active,
        init_beta,
        init_alpha,
        cfg,
        loss,
        PrimalStep::CoordinateSweep,
        trace,
    )
}

/// Keep the `k` largest-magnitude entries (ties to the lower index).
pub(crate) fn keep_top_k(beta: &mut [f64], k: usize) {
    let nnz = beta.iter().filter(|b| **b != 0.0).count();
    if nnz <= k {
        return;
    }
    let mut order: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    order.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
    for &j in &order[k..] {
        beta[j] = 0.0;
    }
}

pub(crate) fn dual_loop<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    init_beta: &[f64],
    init_alpha: &[f64],
    cfg: &InnerConfig,
    loss: &L,
    primal_step: PrimalStep,
    trace: &mut dyn FnMut(&IterationRecord),
) -> Result<InnerResult> {
    cfg.validate()?;
    problem.check_beta(init_beta)?;
    problem.check_alpha(init_alpha, loss)?;

    let m = problem.p();
    let x = problem.x();
    let y = problem.y();
    let gamma = loss.mu();

    let mut beta = init_beta.to_vec();
    let mut alpha = init_alpha.to_vec();
    let mut fit = x.mul_vec(&beta);

    let init_primal = model::primal_from_fit(problem, &beta, &fit, loss);
    let init_dual = model::dual_objective(problem, &alpha, loss)?;
    let init_gap = init_primal - init_dual;
    if !init_gap.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }

    let mut best = InnerResult {
        beta: beta.clone(),
        alpha: alpha.clone(),
        primal: init_primal,
        dual: init_dual,
        sub_gap: init_gap,
        iterations: 0,
        cd_passes: 0,
        best_iteration: 0,
        stop_reason: StopReason::MaxIters,
    };

    // gaps[t] is the gap after iteration t; gaps[0] is the initial pair
    let mut gaps = Vec::with_capacity(cfg.max_iters.min(1 << 16) + 1);
    gaps.push(init_gap);
    let mut rising = 0usize;
    let mut etas = vec![0.0; m];
    let mut passes = 0usize;

    let mut t = 0usize;
    let stop_reason = loop {
        t += 1;
        let omega = match cfg.schedule {
            StepSchedule::Fixed => cfg.step_size,
            StepSchedule::InverseT => cfg.step_size / (t as f64 * gamma),
        };

        // (a) super-gradient at the previous pair, (b) projected ascent
        let grad = gradient_from_fit(&fit, &alpha, y, loss);
        for (a, g) in alpha.iter_mut().zip(&grad) {
            *a = loss.project_feasible(*a + omega * g);
        }

        // (c) eta, (d) link
        let scale = -1.0 / (2.0 * problem.penalty().lambda2);
        for (j, e) in etas.iter_mut().enumerate() {
            *e = scale * dot(x.col(j), &alpha);
        }
        for (b, &e) in beta.iter_mut().zip(&etas) {
            *b = problem.penalty().link(e);
        }

        // (e) primal refinement
        match primal_step {
            PrimalStep::CoordinateSweep => {
                fit = x.mul_vec(&beta);
                for _ in 0..cfg.cd_passes {
                    passes += 1;
                    if !model::sweep_in_place(problem, loss, &mut beta, &mut fit, 0..m) {
                        break;
                    }
                }
            }
            PrimalStep::LinkOnly => fit = x.mul_vec(&beta),
            PrimalStep::HardThreshold(k) => {
                keep_top_k(&mut beta, k);
                fit = x.mul_vec(&beta);
            }
        }

        // (f) gap of the current pair
        let primal = model::primal_from_fit(problem, &beta, &fit, loss);
        let dual = model::dual_from_eta(problem, &alpha, &etas, loss);
        let gap = primal - dual;
        if !gap.is_finite() {
            return Err(Error::Divergence { iteration: t });
        }
        trace(&IterationRecord {
            iteration: t,
            primal,
            dual,
            gap,
        });

        if gap < best.sub_gap {
            best.beta.copy_from_slice(&beta);
            best.alpha.copy_from_slice(&alpha);
            best.primal = primal;
            best.dual = dual;
            best.sub_gap = gap;
            best.best_iteration = t;
        }
        rising = if gap > gaps[t - 1] { rising + 1 } else { 0 };
        gaps.push(gap);

        if gap <= cfg.eps {
            break StopReason::GapLeqEps;
        }
        if t >= 2 && (gaps[t - 2] - gap).abs() <= cfg.zeta {
            break StopReason::GapChangeLeqZeta;
        }
        if rising >= 3 {
            break StopReason::GapIncreasing;
        }
        if t >= cfg.max_iters {
            break StopReason::MaxIters;
        }
    };

    best.iterations = t;
    best.cd_passes = passes;
    best.stop_reason = stop_reason;
    Ok(best)
}
