//! Exact minimization by enumerating every support, for small `p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot};
use crate::model::ProblemSpec;

pub const DEFAULT_MAX_P: usize = 14;
const RESTRICTED_GAP: f64 = 1e-12;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_beta: Vec<f64>,
    pub best_objective: f64,
    pub best_support: Vec<usize>,
    pub supports_evaluated: usize,
}

struct Restricted {
    beta: Vec<f64>,
    objective: f64,
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Elastic-net fit on the columns in `cols`, without the `l0` term.
fn restricted_fit(problem: &ProblemSpec, cols: &[usize]) -> Restricted {
    let x = problem.x();
    let y = problem.y();
    let pen = problem.penalty();
    let (l1, l2) = (pen.lambda1, pen.lambda2);
    let sq = problem.col_sq_norms();
    let n = problem.n();

    let mut beta = vec![0.0; cols.len()];
    let mut resid = y.to_vec();
    let mut objective = 0.5 * dot(y, y);
    for _ in 0..MAX_SWEEPS {
        for (k, &j) in cols.iter().enumerate() {
            let xj = x.col(j);
            let old = beta[k];
            let new = soft(dot(xj, &resid) + sq[j] * old, l1) / (sq[j] + 2.0 * l2);
            if new != old {
                axpy(old - new, xj, &mut resid);
                beta[k] = new;
            }
        }
        // dual point alpha = X beta - y = -resid
        let primal =
            0.5 * dot(&resid, &resid) + beta.iter().map(|b| l1 * b.abs() + l2 * b * b).sum::<f64>();
        let conj: f64 = (0..n)
            .map(|i| 0.5 * resid[i] * resid[i] - resid[i] * y[i])
            .sum();
        let psi: f64 = cols
            .iter()
            .map(|&j| {
                let excess = (dot(x.col(j), &resid).abs() - l1).max(0.0);
                excess * excess / (4.0 * l2)
            })
            .sum();
        objective = primal;
        if primal - (-conj - psi) <= RESTRICTED_GAP {
            break;
        }
    }
    Restricted { beta, objective }
}

/// Global minimizer of the full objective over all `2^p` supports.
///
/// A support is scored only when its restricted minimizer is nonzero on
/// every coordinate; otherwise the same point is scored under its smaller
/// effective support. Exact ties go to the lexicographically smallest
/// support.
pub fn enumerate_solve(problem: &ProblemSpec, max_p: usize) -> Result<OracleResult> {
    let p = problem.p();
    if p > max_p || p >= usize::BITS as usize - 1 {
        return Err(Error::TooManyFeatures { p, max_p });
    }
    let l0 = problem.penalty().lambda0;
    let count = 1usize << p;

    let scored: Vec<Option<(Vec<usize>, Restricted)>> = (0..count)
        .into_par_iter()
        .map(|mask| {
            let cols: Vec<usize> = (0..p).filter(|j| mask >> j & 1 == 1).collect();
            if cols.is_empty() {
                let y = problem.y();
                return Some((
                    cols,
                    Restricted {
                        beta: Vec::new(),
                        objective: 0.5 * dot(y, y),
                    },
                ));
            }
            if l0.is_infinite() {
                return None;
            }
            let mut fit = restricted_fit(problem, &cols);
            if fit.beta.contains(&0.0) {
                return None;
            }
            fit.objective += l0 * cols.len() as f64;
            Some((cols, fit))
        })
        .collect();

    let mut best: Option<(Vec<usize>, Restricted)> = None;
    for (cols, fit) in scored.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some((bc, bf)) => {
                fit.objective < bf.objective || (fit.objective == bf.objective && cols < *bc)
            }
        };
        if better {
            best = Some((cols, fit));
        }
    }
    let (support, fit) = best.expect("empty support is always scored");
    let mut best_beta = vec![0.0; p];
    for (&j, &b) in support.iter().zip(&fit.beta) {
        best_beta[j] = b;
    }
    Ok(OracleResult {
        best_beta,
        best_objective: fit.objective,
        best_support: support,
        supports_evaluated: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::SquaredLoss;
    use crate::matrix::DenseMatrix;
    use crate::model::primal_objective;

    #[test]
    fn huge_l0_gives_empty_support() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.3], vec![0.2, 1.0], vec![0.5, 0.5]]).unwrap();
        let y = vec![1.0, -2.0, 0.5];
        for l0 in [1e6, f64::INFINITY] {
            let prob = ProblemSpec::with_lambdas(x.clone(), y.clone(), l0, 0.02, 1.0).unwrap();
            let r = enumerate_solve(&prob, DEFAULT_MAX_P).unwrap();
            assert!(r.best_support.is_empty());
            assert!(r.best_beta.iter().all(|&b| b == 0.0));
            assert_eq!(r.best_objective, 0.5 * (1.0 + 4.0 + 0.25));
        }
    }

    #[test]
    fn orthonormal_matches_coordinate_threshold() {
        let y = vec![1.3, 0.25];
        let prob =
            ProblemSpec::with_lambdas(DenseMatrix::identity(2), y.clone(), 0.3, 0.1, 0.5).unwrap();
        let r = enumerate_solve(&prob, DEFAULT_MAX_P).unwrap();
        for j in 0..2 {
            let closed = prob.penalty().coordinate_threshold(y[j], 1.0);
            assert!((r.best_beta[j] - closed).abs() < 1e-10);
        }
        assert_eq!(r.best_support, vec![0]);
        assert_eq!(r.supports_evaluated, 4);
        let p = primal_objective(&prob, &r.best_beta, &SquaredLoss).unwrap();
        assert!((p - r.best_objective).abs() < 1e-12);
    }

    #[test]
    fn refuses_large_p() {
        let prob =
            ProblemSpec::with_lambdas(DenseMatrix::zeros(2, 15), vec![0.0; 2], 0.1, 0.0, 1.0)
                .unwrap();
        assert!(matches!(
            enumerate_solve(&prob, DEFAULT_MAX_P),
            Err(Error::TooManyFeatures { p: 15, max_p: 14 })
        ));
    }
}
