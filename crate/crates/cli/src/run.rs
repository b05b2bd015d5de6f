use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use l0pd::baselines::{solve_baseline, BaselineKind};
use l0pd::inner::InnerConfig;
use l0pd::synth::{self, Standardization, SyntheticSpec};
use l0pd::{
    DenseMatrix, LogBase, OuterConfig, OuterTraceStep, ProblemSpec, Solution, SquaredLoss,
    StepSchedule,
};
use serde::{Deserialize, Serialize};

use crate::data::{read_dataset, write_dataset, write_json};
use crate::{
    Algo, LogBaseArg, ModelArgs, OracleArgs, ScheduleArg, SimulateArgs, SolveArgs, SolverArgs,
    Toggle,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coef {
    pub index: usize,
    pub value: f64,
}

pub fn sparse(beta: &[f64]) -> Vec<Coef> {
    beta.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(index, &value)| Coef { index, value })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub algo: Algo,
    pub n: usize,
    pub p: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub standardized: bool,
    /// Coefficients on the scale the solver ran on.
    pub beta: Vec<Coef>,
    /// Coefficients for the raw columns, present when standardized.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta_raw: Option<Vec<Coef>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub intercept: Option<f64>,
    pub support: Vec<usize>,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub radius: f64,
    pub stop_reason: String,
    pub converged: bool,
    pub outer_steps: usize,
    pub inner_iterations: usize,
    pub coordinate_touches: u64,
    pub screened: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub seed: u64,
    pub model: ModelArgs,
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config: RunConfig,
    pub dataset_hash: String,
    pub solver: Algo,
    pub wall_time_ms: f64,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub support_size: usize,
    pub stop_reason: String,
}

#[derive(Debug, Serialize)]
struct TraceRow {
    step: usize,
    stage: &'static str,
    active_size: usize,
    reservoir_size: usize,
    screened: usize,
    primal: f64,
    dual: f64,
    gap: f64,
    radius: f64,
    time_ms: f64,
}

/// Problem on the solver scale plus the map back to raw columns.
pub struct Prepared {
    pub problem: ProblemSpec,
    pub standardization: Option<Standardization>,
}

pub fn prepare(x: DenseMatrix, y: Vec<f64>, model: &ModelArgs) -> Result<Prepared> {
    let (x, y, standardization) = match model.standardize {
        Toggle::On => {
            let (xs, ys, st) = synth::standardize(&x, &y);
            (xs, ys, Some(st))
        }
        Toggle::Off => (x, y, None),
    };
    let problem = ProblemSpec::with_lambdas(x, y, model.lambda0, model.lambda1, model.lambda2)?;
    Ok(Prepared {
        problem,
        standardization,
    })
}

pub fn inner_config(s: &SolverArgs) -> InnerConfig {
    InnerConfig {
        step_size: s.step,
        schedule: match s.schedule {
            ScheduleArg::Fixed => StepSchedule::Fixed,
            ScheduleArg::InverseT => StepSchedule::InverseT,
        },
        zeta: s.zeta,
        eps: s.eps,
        max_iters: s.max_inner,
        cd_passes: s.cd_passes,
    }
}

pub fn outer_config(s: &SolverArgs) -> OuterConfig {
    OuterConfig {
        xi: s.xi.unwrap_or(s.eps),
        inclusion_c: s.c,
        log_base: match s.log_base {
            LogBaseArg::E => LogBase::E,
            LogBaseArg::Ten => LogBase::Ten,
            LogBaseArg::Two => LogBase::Two,
        },
        init_size: s.init_size,
        max_outer: s.max_outer,
        inner: inner_config(s),
        screening: !s.no_screening,
        record_duals: false,
    }
}

/// Checks flag combinations clap cannot express.
pub fn check_solver_args(s: &SolverArgs) -> Result<()> {
    if s.algo == Algo::Diht && s.k.is_none() {
        bail!("--algo diht requires --k");
    }
    Ok(())
}

pub fn run_solver(
    problem: &ProblemSpec,
    s: &SolverArgs,
    trace: &mut dyn FnMut(&OuterTraceStep),
) -> Result<Solution> {
    check_solver_args(s)?;
    let loss = SquaredLoss;
    let sol = match s.algo {
        Algo::Primdual => l0pd::incremental::solve_traced(problem, &outer_config(s), &loss, trace)?,
        Algo::Dualast => solve_baseline(
            problem,
            BaselineKind::DualAscent,
            &inner_config(s),
            &loss,
            trace,
        )?,
        Algo::Cdss => solve_baseline(problem, BaselineKind::Cdss, &inner_config(s), &loss, trace)?,
        Algo::Diht => solve_baseline(
            problem,
            BaselineKind::Diht {
                k: s.k.unwrap_or(0),
            },
            &inner_config(s),
            &loss,
            trace,
        )?,
    };
    Ok(sol)
}

fn write_trace(path: &Path, rows: &[OuterTraceStep], deterministic: bool) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(TraceRow {
            step: r.step,
            stage: r.stage.as_str(),
            active_size: r.active_size,
            reservoir_size: r.reservoir_size,
            screened: r.screened_count,
            primal: r.primal,
            dual: r.dual,
            gap: r.gap,
            radius: r.radius,
            time_ms: if deterministic {
                0.0
            } else {
                r.wall_time * 1e3
            },
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn exit_code(sol: &Solution) -> ExitCode {
    if sol.stop_reason.is_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

pub fn cmd_solve(a: &SolveArgs) -> Result<ExitCode> {
    check_solver_args(&a.solver)?;
    let ds = read_dataset(&a.data)?;
    let prep = prepare(ds.x, ds.y, &a.model)?;
    let problem = &prep.problem;

    let start = Instant::now();
    let sol = run_solver(problem, &a.solver, &mut |_| {})?;
    let elapsed_ms = if a.solver.deterministic {
        0.0
    } else {
        start.elapsed().as_secs_f64() * 1e3
    };

    let (beta_raw, intercept) = match &prep.standardization {
        Some(st) => {
            let raw = st.coef_to_raw(&sol.beta);
            let b0 = st.intercept(&raw);
            (Some(sparse(&raw)), Some(b0))
        }
        None => (None, None),
    };
    let out = SolutionJson {
        algo: a.solver.algo,
        n: problem.n(),
        p: problem.p(),
        lambda0: a.model.lambda0,
        lambda1: a.model.lambda1,
        lambda2: a.model.lambda2,
        standardized: prep.standardization.is_some(),
        beta: sparse(&sol.beta),
        beta_raw,
        intercept,
        support: sol.support.clone(),
        primal: sol.primal,
        dual: sol.dual,
        gap: sol.gap,
        radius: sol.radius,
        stop_reason: sol.stop_reason.as_str().to_string(),
        converged: sol.stop_reason.is_converged(),
        outer_steps: sol.outer_steps,
        inner_iterations: sol.inner_iterations,
        coordinate_touches: sol.coordinate_touches,
        screened: sol.screened.len(),
    };
    write_json(a.out.as_deref(), &out)?;
    if let Some(path) = &a.trace {
        write_trace(path, &sol.trace, a.solver.deterministic)?;
    }
    if let Some(path) = &a.record {
        let record = RunRecord {
            command: "solve".into(),
            config: RunConfig {
                data: a.data.clone(),
                seed: a.seed,
                model: a.model.clone(),
                solver: a.solver.clone(),
            },
            dataset_hash: ds.hash,
            solver: a.solver.algo,
            wall_time_ms: elapsed_ms,
            primal: sol.primal,
            dual: sol.dual,
            gap: sol.gap,
            support_size: sol.support.len(),
            stop_reason: out.stop_reason.clone(),
        };
        write_json(Some(path), &record)?;
    }
    Ok(exit_code(&sol))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Truth {
    pub spec: SyntheticSpec,
    pub noise_sigma: f64,
    pub support: Vec<usize>,
    pub beta_true: Vec<Coef>,
}

pub fn synthetic_spec(
    n: usize,
    p: usize,
    rho: f64,
    snr: f64,
    sparsity: f64,
    floor: f64,
    seed: u64,
) -> SyntheticSpec {
    SyntheticSpec {
        n,
        p,
        rho,
        support_frac: sparsity,
        snr,
        coef_floor: floor,
        seed,
        ..SyntheticSpec::default()
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let spec = SyntheticSpec {
        coef_low: a.coef_low,
        coef_high: a.coef_high,
        ..synthetic_spec(a.n, a.p, a.rho, a.snr, a.sparsity, a.coef_floor, a.seed)
    };
    let ds = synth::generate(&spec)?;
    write_dataset(&a.out, &ds.x, &ds.y)?;
    let truth_path = a.truth.clone().unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".truth.json");
        PathBuf::from(s)
    });
    let truth = Truth {
        support: ds.true_support(),
        beta_true: sparse(&ds.beta_true),
        noise_sigma: ds.noise_sigma,
        spec,
    };
    write_json(Some(&truth_path), &truth)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OracleJson {
    pub n: usize,
    pub p: usize,
    pub best_objective: f64,
    pub best_support: Vec<usize>,
    pub best_beta: Vec<Coef>,
    pub supports_evaluated: usize,
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<ExitCode> {
    let ds = read_dataset(&a.data)?;
    let prep = prepare(ds.x, ds.y, &a.model)?;
    let r = l0pd::oracle::enumerate_solve(&prep.problem, a.max_p)?;
    write_json(
        a.out.as_deref(),
        &OracleJson {
            n: prep.problem.n(),
            p: prep.problem.p(),
            best_objective: r.best_objective,
            best_support: r.best_support,
            best_beta: sparse(&r.best_beta),
            supports_evaluated: r.supports_evaluated,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ModelArgs {
        ModelArgs {
            lambda0: 0.03,
            lambda1: 0.02,
            lambda2: 1.0,
            standardize: Toggle::On,
        }
    }

    fn solver() -> SolverArgs {
        SolverArgs {
            algo: Algo::Primdual,
            k: None,
            step: 5e-4,
            schedule: ScheduleArg::Fixed,
            eps: 1e-6,
            zeta: 1e-6,
            xi: None,
            c: 4.0,
            log_base: LogBaseArg::E,
            init_size: None,
            max_inner: 100_000,
            max_outer: 10_000,
            cd_passes: 1,
            no_screening: false,
            deterministic: true,
        }
    }

    #[test]
    fn run_record_round_trips() {
        let rec = RunRecord {
            command: "solve".into(),
            config: RunConfig {
                data: PathBuf::from("d.csv"),
                seed: 7,
                model: model(),
                solver: solver(),
            },
            dataset_hash: "ab".repeat(32),
            solver: Algo::Primdual,
            wall_time_ms: 1.25,
            primal: 0.1 + 0.2,
            dual: 1.0 / 3.0,
            gap: -1e-17,
            support_size: 3,
            stop_reason: "gap_below_threshold".into(),
        };
        let text = serde_json::to_string(&rec).unwrap();
        let back: RunRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn diht_needs_k() {
        let s = SolverArgs {
            algo: Algo::Diht,
            ..solver()
        };
        assert!(check_solver_args(&s).is_err());
        assert!(check_solver_args(&SolverArgs { k: Some(2), ..s }).is_ok());
    }

    #[test]
    fn sparse_keeps_nonzeros() {
        assert_eq!(
            sparse(&[0.0, 1.5, 0.0, -2.0]),
            vec![
                Coef {
                    index: 1,
                    value: 1.5
                },
                Coef {
                    index: 3,
                    value: -2.0
                }
            ]
        );
    }

    #[test]
    fn xi_defaults_to_eps() {
        let s = SolverArgs {
            eps: 1e-8,
            ..solver()
        };
        assert_eq!(outer_config(&s).xi, 1e-8);
        assert_eq!(
            outer_config(&SolverArgs {
                xi: Some(1e-3),
                ..s
            })
            .xi,
            1e-3
        );
    }
}
