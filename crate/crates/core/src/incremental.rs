//! Dynamic incremental outer driver.
//!
//! The solver works on a small active set of features, certifies every
//! sub-problem solution against the full problem's duality gap, discards
//! features whose dual ball certifies them inactive, and grows the active
//! set from the reservoir in batches of `ceil(c log p)` until the whole
//! reservoir is certified inactive as well.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{inner_solve, InnerConfig};
use crate::losses::LossModel;
use crate::matrix::dot;
use crate::model::{self, GapCertificate, ProblemSpec};
use crate::solution::{support_of, OuterTraceStep, ScreenEvent, Solution, SolveStopReason, Stage};

/// Logarithm used for the inclusion batch size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    E,
    Ten,
    Two,
}

impl LogBase {
    pub fn log(self, v: f64) -> f64 {
        match self {
            Self::E => v.ln(),
            Self::Ten => v.log10(),
            Self::Two => v.log2(),
        }
    }
}

/// `h = ceil(c log p)`, at least 1.
pub fn inclusion_batch_size(p: usize, c: f64, base: LogBase) -> usize {
    let h = (c * base.log(p as f64)).ceil();
    if h.is_finite() && h >= 1.0 {
        h as usize
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterConfig {
    /// Stop once the full-problem gap is below `xi`.
    pub xi: f64,
    pub inclusion_c: f64,
    pub log_base: LogBase,
    /// Initial active-set size; `None` means one inclusion batch.
    pub init_size: Option<usize>,
    pub max_outer: usize,
    pub inner: InnerConfig,
    /// Apply the safe screening rule.
    pub screening: bool,
    /// Keep the dual iterate of every outer step in the trace.
    pub record_duals: bool,
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self {
            xi: 1e-6,
            inclusion_c: 4.0,
            log_base: LogBase::E,
            init_size: None,
            max_outer: 10_000,
            inner: InnerConfig::default(),
            screening: true,
            record_duals: false,
        }
    }
}

impl OuterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(Error::Config(format!(
                "xi must be finite and > 0, got {}",
                self.xi
            )));
        }
        if !(self.inclusion_c.is_finite() && self.inclusion_c > 0.0) {
            return Err(Error::Config(format!(
                "inclusion constant must be finite and > 0, got {}",
                self.inclusion_c
            )));
        }
        if self.init_size == Some(0) {
            return Err(Error::Config("init_size must be >= 1".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("max_outer must be >= 1".into()));
        }
        self.inner.validate()
    }
}

/// Active features, reservoir, and whether inclusion is still running.
///
/// Both index lists are kept sorted ascending and are disjoint; features in
/// neither have been screened out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    pub active: Vec<usize>,
    pub reservoir: Vec<usize>,
    pub do_add: bool,
}

impl ActiveSet {
    pub fn is_consistent(&self, p: usize) -> bool {
        let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&j| j < p);
        sorted(&self.active)
            && sorted(&self.reservoir)
            && self
                .active
                .iter()
                .all(|j| self.reservoir.binary_search(j).is_err())
    }
}

/// Indices of the `k` largest `scores` (ties to the lower index).
fn top_k_by_score(candidates: &[usize], scores: impl Fn(usize) -> f64, k: usize) -> Vec<usize> {
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| scores(b).total_cmp(&scores(a)).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

fn difference(all: &[usize], remove: &[usize]) -> Vec<usize> {
    all.iter()
        .copied()
        .filter(|j| remove.binary_search(j).is_err())
        .collect()
}

/// Picks the `k0` features with the largest `|x_j^T l'(0)|`.
pub fn init_active_set<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    loss: &L,
    k0: usize,
) -> Result<ActiveSet> {
    let p = problem.p();
    if k0 == 0 || k0 > p {
        return Err(Error::Config(format!(
            "initial active size must be in 1..={p}, got {k0}"
        )));
    }
    let grad0: Vec<f64> = problem.y().iter().map(|&yi| loss.deriv(0.0, yi)).collect();
    let scores: Vec<f64> = problem
        .x()
        .tr_mul_vec(&grad0)
        .into_iter()
        .map(f64::abs)
        .collect();
    let all: Vec<usize> = (0..p).collect();
    let active = top_k_by_score(&all, |j| scores[j], k0);
    let reservoir = difference(&all, &active);
    Ok(ActiveSet {
        active,
        reservoir,
        do_add: true,
    })
}

#[inline]
fn screening_score(xt_alpha_j: f64, col_norm: f64, radius: f64) -> f64 {
    xt_alpha_j.abs() + col_norm * radius
}

/// `true` iff `|x_j^T alpha| + ||x_j|| radius < 2 sqrt(l0 l2) + l1`, i.e. the
/// dual ball certifies feature `j` inactive at the optimum.
pub fn screening_test(problem: &ProblemSpec, alpha: &[f64], radius: f64, j: usize) -> Result<bool> {
    if j >= problem.p() {
        return Err(Error::IndexOutOfRange {
            index: j,
            p: problem.p(),
        });
    }
    check_alpha_len(problem, alpha)?;
    let s = screening_score(
        dot(problem.x().col(j), alpha),
        problem.col_norms()[j],
        radius,
    );
    Ok(s < problem.penalty().screening_threshold())
}

/// `true` iff every reservoir feature passes the screening test (vacuously
/// for an empty reservoir).
pub fn inclusion_stop_test(
    problem: &ProblemSpec,
    alpha: &[f64],
    radius: f64,
    reservoir: &[usize],
) -> Result<bool> {
    check_alpha_len(problem, alpha)?;
    check_indices(problem, reservoir)?;
    let xt: Vec<f64> = reservoir
        .iter()
        .map(|&j| dot(problem.x().col(j), alpha))
        .collect();
    Ok(reservoir_certified(problem, reservoir, |k| xt[k], radius))
}

fn reservoir_certified(
    problem: &ProblemSpec,
    reservoir: &[usize],
    xt_alpha: impl Fn(usize) -> f64,
    radius: f64,
) -> bool {
    let thr = problem.penalty().screening_threshold();
    reservoir
        .iter()
        .enumerate()
        .all(|(k, &j)| screening_score(xt_alpha(k), problem.col_norms()[j], radius) < thr)
}

/// Moves the `ceil(c log p)` reservoir features with the largest
/// `|x_j^T alpha|` into the active set.
pub fn feature_inclusion(
    problem: &ProblemSpec,
    alpha: &[f64],
    set: &ActiveSet,
    c: f64,
    base: LogBase,
) -> Result<ActiveSet> {
    check_alpha_len(problem, alpha)?;
    check_indices(problem, &set.reservoir)?;
    let xt = problem.x().tr_mul_vec(alpha);
    let h = inclusion_batch_size(problem.p(), c, base);
    Ok(include_top(set, &xt, h))
}

fn include_top(set: &ActiveSet, xt_alpha: &[f64], h: usize) -> ActiveSet {
    let chosen = top_k_by_score(&set.reservoir, |j| xt_alpha[j].abs(), h);
    let mut active = set.active.clone();
    active.extend_from_slice(&chosen);
    active.sort_unstable();
    ActiveSet {
        active,
        reservoir: difference(&set.reservoir, &chosen),
        do_add: set.do_add,
    }
}

/// Removes every active feature that passes the screening test, zeroes its
/// coefficient in `beta` (full length), and returns the removed indices.
pub fn screen_features(
    problem: &ProblemSpec,
    alpha: &[f64],
    radius: f64,
    set: &ActiveSet,
    beta: &mut [f64],
) -> Result<(ActiveSet, Vec<usize>)> {
    check_alpha_len(problem, alpha)?;
    problem.check_beta(beta)?;
    check_indices(problem, &set.active)?;
    let xt: Vec<f64> = (0..problem.p())
        .map(|j| {
            if set.active.binary_search(&j).is_ok() {
                dot(problem.x().col(j), alpha)
            } else {
                0.0
            }
        })
        .collect();
    Ok(screen_with_products(problem, &xt, radius, set, beta))
}

fn screen_with_products(
    problem: &ProblemSpec,
    xt_alpha: &[f64],
    radius: f64,
    set: &ActiveSet,
    beta: &mut [f64],
) -> (ActiveSet, Vec<usize>) {
    let thr = problem.penalty().screening_threshold();
    let (removed, kept): (Vec<usize>, Vec<usize>) = set
        .active
        .iter()
        .partition(|&&j| screening_score(xt_alpha[j], problem.col_norms()[j], radius) < thr);
    for &j in &removed {
        beta[j] = 0.0;
    }
    (
        ActiveSet {
            active: kept,
            reservoir: set.reservoir.clone(),
            do_add: set.do_add,
        },
        removed,
    )
}

fn check_alpha_len(problem: &ProblemSpec, alpha: &[f64]) -> Result<()> {
    if alpha.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            what: "alpha",
            expected: problem.n(),
            got: alpha.len(),
        });
    }
    Ok(())
}

fn check_indices(problem: &ProblemSpec, idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&j| j >= problem.p()) {
        Some(&index) => Err(Error::IndexOutOfRange {
            index,
            p: problem.p(),
        }),
        None => Ok(()),
    }
}

/// Full-problem certificate; also returns `X^T alpha` for reuse.
fn full_certificate<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    beta: &[f64],
    alpha: &[f64],
    loss: &L,
) -> (GapCertificate, Vec<f64>) {
    let fit = problem.x().mul_vec(beta);
    let primal = model::primal_from_fit(problem, beta, &fit, loss);
    let xt_alpha = problem.x().tr_mul_vec(alpha);
    let etas = model::eta_from_products(problem, &xt_alpha);
    let dual = model::dual_from_eta(problem, alpha, &etas, loss);
    (GapCertificate::new(primal, dual, loss.mu()), xt_alpha)
}

pub fn solve<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    cfg: &OuterConfig,
    loss: &L,
) -> Result<Solution> {
    solve_traced(problem, cfg, loss, &mut |_| {})
}

/// [`solve`] reporting every outer step to `trace`.
pub fn solve_traced<L: LossModel + ?Sized>(
    problem: &ProblemSpec,
    cfg: &OuterConfig,
    loss: &L,
    trace: &mut dyn FnMut(&OuterTraceStep),
) -> Result<Solution> {
    cfg.validate()?;
    let start = Instant::now();
    let p = problem.p();
    let n = problem.n();
    if p == 0 {
        return Err(Error::Config("problem has no features".into()));
    }

    let h = inclusion_batch_size(p, cfg.inclusion_c, cfg.log_base);
    let k0 = cfg.init_size.unwrap_or(h).min(p);
    let mut set = init_active_set(problem, loss, k0)?;

    let mut beta = vec![0.0; p];
    let mut alpha = vec![0.0; n];
    let mut steps = Vec::new();
    let mut screened = Vec::new();
    let mut inner_iterations = 0usize;
    let mut touches = 0u64;

    let mut s = 0usize;
    let (cert, stop_reason) = loop {
        let sub = problem.restrict(&set.active);
        let beta_sub: Vec<f64> = set.active.iter().map(|&j| beta[j]).collect();
        let res = inner_solve(&sub, &beta_sub, &alpha, &cfg.inner, loss)?;
        inner_iterations += res.iterations;
        touches += (res.cd_passes * set.active.len()) as u64;

        // Any primal point pairs with any dual point in the certificate, so
        // the warm start is kept when the best-gap iterate has a higher primal.
        let warm_primal = model::primal_objective(&sub, &beta_sub, loss)?;
        let kept = if res.primal <= warm_primal {
            &res.beta
        } else {
            &beta_sub
        };
        let kept = kept.clone();
        beta.iter_mut().for_each(|b| *b = 0.0);
        for (&j, &b) in set.active.iter().zip(&kept) {
            beta[j] = b;
        }
        alpha.copy_from_slice(&res.alpha);

        let (cert, xt_alpha) = full_certificate(problem, &beta, &alpha, loss);
        if !cert.gap.is_finite() {
            return Err(Error::Divergence {
                iteration: inner_iterations,
            });
        }

        let mut record = OuterTraceStep {
            step: s,
            stage: if set.do_add {
                Stage::Include
            } else {
                Stage::Pursue
            },
            active_size: set.active.len(),
            reservoir_size: set.reservoir.len(),
            screened_count: screened.len(),
            primal: cert.primal,
            dual: cert.dual,
            gap: cert.gap,
            radius: cert.radius,
            wall_time: start.elapsed().as_secs_f64(),
            inner_iterations: res.iterations,
            alpha: cfg.record_duals.then(|| alpha.clone()),
        };

        if cert.gap < cfg.xi {
            trace(&record);
            steps.push(record);
            break (cert, SolveStopReason::GapBelowThreshold);
        }

        let before = set.clone();
        if cfg.screening {
            let (next, removed) =
                screen_with_products(problem, &xt_alpha, cert.radius, &set, &mut beta);
            screened.extend(
                removed
                    .iter()
                    .map(|&feature| ScreenEvent { step: s, feature }),
            );
            set = next;
        }
        if set.do_add {
            let reservoir_xt = |k: usize| xt_alpha[set.reservoir[k]];
            if reservoir_certified(problem, &set.reservoir, reservoir_xt, cert.radius) {
                set.do_add = false;
                record.stage = Stage::Screen;
            } else {
                set = include_top(&set, &xt_alpha, h);
            }
        }
        record.screened_count = screened.len();
        trace(&record);
        steps.push(record);

        s += 1;
        if s >= cfg.max_outer {
            break (cert, SolveStopReason::MaxOuter);
        }
        // an unchanged warm start on an unchanged active set replays this step exactly
        if res.best_iteration == 0 && set == before {
            break (cert, SolveStopReason::Stalled);
        }
    };

    Ok(Solution {
        support: support_of(&beta),
        beta,
        alpha,
        primal: cert.primal,
        dual: cert.dual,
        gap: cert.gap,
        radius: cert.radius,
        stop_reason,
        outer_steps: steps.len(),
        inner_iterations,
        coordinate_touches: touches,
        trace: steps,
        screened,
    })
}
