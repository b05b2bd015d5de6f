//! Synthetic benchmark grid. Every algorithm sees the same dataset for a
//! given (n, snr, replicate), and rows come out in grid order regardless of
//! thread count.

use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use l0pd::synth;
use rayon::prelude::*;
use serde::Serialize;

use crate::run::{check_solver_args, prepare, run_solver, synthetic_spec};
use crate::{Algo, BenchArgs, SolverArgs};

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub p: usize,
    pub snr: f64,
    pub algo: Algo,
    pub replicate: usize,
    pub seed: u64,
    pub time_ms: f64,
    pub gap: f64,
    pub nnz: usize,
    pub support_exact: bool,
    pub est_error: f64,
    pub stop_reason: String,
}

#[derive(Clone, Copy)]
struct Cell {
    n: usize,
    snr: f64,
    replicate: usize,
}

fn run_cell(a: &BenchArgs, cell: Cell) -> Result<Vec<BenchRow>> {
    let seed = a.seed + cell.replicate as u64;
    let spec = synthetic_spec(cell.n, a.p, a.rho, cell.snr, a.sparsity, a.coef_floor, seed);
    let ds = synth::generate(&spec)?;
    let truth = ds.true_support();
    let prep = prepare(ds.x.clone(), ds.y.clone(), &a.model)?;
    let mut rows = Vec::with_capacity(a.algos.len());
    for &algo in &a.algos {
        let solver = SolverArgs {
            algo,
            ..a.solver.clone()
        };
        let start = Instant::now();
        let sol = run_solver(&prep.problem, &solver, &mut |_| {}).with_context(|| {
            format!(
                "n={} snr={} algo={algo:?} replicate={}",
                cell.n, cell.snr, cell.replicate
            )
        })?;
        let time_ms = if solver.deterministic {
            0.0
        } else {
            start.elapsed().as_secs_f64() * 1e3
        };
        let raw = match &prep.standardization {
            Some(st) => st.coef_to_raw(&sol.beta),
            None => sol.beta.clone(),
        };
        rows.push(BenchRow {
            n: cell.n,
            p: a.p,
            snr: cell.snr,
            algo,
            replicate: cell.replicate,
            seed,
            time_ms,
            gap: sol.gap,
            nnz: sol.support.len(),
            support_exact: sol.support == truth,
            est_error: synth::estimation_error(&raw, &ds.beta_true)?,
            stop_reason: sol.stop_reason.as_str().to_string(),
        });
    }
    Ok(rows)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<ExitCode> {
    check_solver_args(&a.solver)?;
    let mut cells = Vec::new();
    for &n in &a.n {
        for &snr in &a.snr {
            for replicate in 0..a.replicates {
                cells.push(Cell { n, snr, replicate });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()?;
    let per_cell: Vec<Vec<BenchRow>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&c| run_cell(a, c))
            .collect::<Result<_>>()
    })?;

    // Grid order is (n, snr, algo, replicate).
    let mut rows: Vec<&BenchRow> = per_cell.iter().flatten().collect();
    let algo_rank = |x: Algo| a.algos.iter().position(|&b| b == x).unwrap_or(usize::MAX);
    let n_rank = |x: usize| a.n.iter().position(|&b| b == x).unwrap_or(usize::MAX);
    let snr_rank = |x: f64| a.snr.iter().position(|&b| b == x).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (n_rank(r.n), snr_rank(r.snr), algo_rank(r.algo), r.replicate));

    let mut w = match &a.out {
        Some(path) => csv::Writer::from_writer(Box::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ) as Box<dyn std::io::Write>),
        None => csv::Writer::from_writer(Box::new(std::io::stdout()) as Box<dyn std::io::Write>),
    };
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}
