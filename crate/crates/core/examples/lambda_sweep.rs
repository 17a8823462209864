//! Sweep lambda on the reference instance, print the convergence report and
//! write `sweep.csv` into a temporary directory.

use std::sync::Arc;

use gpq::calculus::ExponentConfig;
use gpq::graph::VertexFunction;
use gpq::sweep::{convergence_report, write_sweep_csv, ReportTol, DEFAULT_LAMBDAS};
use gpq::{run_sweep, Instance, ModelCoupling, PotentialPair, SolveOpts, WeightedGraph};

fn main() -> gpq::Result<()> {
    let n = 12;
    let g = WeightedGraph::path(n);
    let a = (0..n).map(|x| if x <= 2 { 0.0 } else { 1.0 }).collect();
    let b = (0..n)
        .map(|x| if (1..=3).contains(&x) { 0.0 } else { 1.0 })
        .collect();
    let pot = PotentialPair::new(VertexFunction::new(a), VertexFunction::new(b), 0.0)?;
    let cfg = ExponentConfig::new(2.0, 3.0, 4.0, 0.1, 5.0, 5.0)?;
    let nl = ModelCoupling::for_config(&g, 0, &cfg)?;
    let inst = Instance {
        graph: Arc::new(g),
        pot: Arc::new(pot),
        cfg,
        nl: Arc::new(nl),
    };

    let sr = run_sweep(&inst, &DEFAULT_LAMBDAS, &SolveOpts::default())?;
    println!("m_Omega = {:.12}", sr.m_omega);
    println!(
        "{:>8} {:>16} {:>11} {:>11} {:>11} {:>11}",
        "lambda", "m_lambda", "gap", "penalty_u", "tail_u", "drift"
    );
    for r in &sr.rows {
        println!(
            "{:>8} {:>16.12} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
            r.lambda, r.m_lambda, r.gap, r.penalty_u, r.tail_u, r.sobolev_drift
        );
    }
    let report = convergence_report(&sr, &ReportTol::default())?;
    for m in &report.metrics {
        println!("{:<26} {}", m.name, if m.passed { "pass" } else { "FAIL" });
    }

    let dir = std::env::temp_dir().join("gpq-lambda-sweep");
    std::fs::create_dir_all(&dir).map_err(|e| gpq::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    write_sweep_csv(&sr.rows, &dir.join("sweep.csv"))?;
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(())
}
