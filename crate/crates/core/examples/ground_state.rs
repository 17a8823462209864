//! Solve for the ground state of the 12-vertex reference instance and print
//! the certificate: residuals, bounds and the norm sandwich.
//!
//! `cargo run --release --example ground_state -- 100` solves at lambda = 100.

use std::sync::Arc;

use gpq::calculus::ExponentConfig;
use gpq::graph::VertexFunction;
use gpq::{
    solve_ground_state, EnergyContext, ModelCoupling, PotentialPair, SolveOpts, WeightedGraph,
};

fn main() -> gpq::Result<()> {
    let lambda: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0);
    let n = 12;
    let g = Arc::new(WeightedGraph::path(n));
    let a = (0..n).map(|x| if x <= 2 { 0.0 } else { 1.0 }).collect();
    let b = (0..n)
        .map(|x| if (1..=3).contains(&x) { 0.0 } else { 1.0 })
        .collect();
    let pot = Arc::new(PotentialPair::new(
        VertexFunction::new(a),
        VertexFunction::new(b),
        0.0,
    )?);
    let cfg = ExponentConfig::new(2.0, 3.0, 4.0, 0.1, 5.0, 5.0)?;
    let nl = Arc::new(ModelCoupling::for_config(&g, 0, &cfg)?);
    let ctx = EnergyContext::full(g.clone(), pot, cfg, nl, lambda)?;

    let opts = SolveOpts {
        record_trace: true,
        ..SolveOpts::default()
    };
    let gs = solve_ground_state(&ctx, &opts)?;
    println!("lambda = {lambda}");
    println!("m_lambda = {:.12}", gs.energy);
    println!(
        "certified = {} (start {} of {})",
        gs.certified, gs.best_start, gs.restarts_used
    );
    println!(
        "scaled |k| = {:.2e}, kkt = {:.2e}",
        gs.nehari_residual, gs.kkt_residual
    );
    println!("eta = {:.4e} <= m_lambda", gs.bounds.eta);
    println!(
        "xi = {:.4} <= ||(u, v)|| = {:.4} <= L = {:.4}",
        gs.bounds.xi, gs.norm, gs.bounds.upper_l
    );
    println!(
        "descent trace: {} points, energy {:.6} -> {:.6}",
        gs.trace.len(),
        gs.trace.first().map_or(f64::NAN, |t| t.energy),
        gs.trace.last().map_or(f64::NAN, |t| t.energy)
    );
    println!("{:>4} {:>14} {:>14}", "x", "u", "v");
    for x in 0..n {
        println!(
            "{:>4} {:>14.6e} {:>14.6e}",
            g.id(x),
            gs.state.u[x],
            gs.state.v[x]
        );
    }
    Ok(())
}
