//! The Dirichlet problem on the wells: its level `m_Omega` bounds every
//! `m_lambda` from above, and its ground state extended by zero lies on
//! every full-graph Nehari manifold.

use std::sync::Arc;

use gpq::calculus::ExponentConfig;
use gpq::graph::VertexFunction;
use gpq::limit::extend_by_zero;
use gpq::{
    solve_ground_state, solve_limit_ground_state, EnergyContext, LimitProblem, ModelCoupling,
    PotentialPair, SolveOpts, WeightedGraph,
};

fn main() -> gpq::Result<()> {
    let n = 8;
    let g = Arc::new(WeightedGraph::path(n));
    let a = (0..n)
        .map(|x| if (2..=4).contains(&x) { 0.0 } else { 2.0 })
        .collect();
    let b = (0..n)
        .map(|x| if (3..=5).contains(&x) { 0.0 } else { 2.0 })
        .collect();
    let pot = Arc::new(PotentialPair::new(
        VertexFunction::new(a),
        VertexFunction::new(b),
        0.0,
    )?);
    let cfg = ExponentConfig::new(2.0, 2.5, 4.0, 0.2, 5.0, 5.0)?;
    let nl = Arc::new(ModelCoupling::for_config(&g, 3, &cfg)?);

    let lp = LimitProblem::new(g.clone(), pot.clone(), cfg, nl.clone())?;
    println!("free unknowns: {}", lp.context().free_count());
    let limit = solve_limit_ground_state(&lp, &SolveOpts::default())?;
    println!(
        "m_Omega = {:.12} (certified {})",
        limit.energy, limit.certified
    );

    let ext = extend_by_zero(&limit.state, n);
    for lambda in [1.0, 10.0, 1000.0] {
        let ctx = EnergyContext::full(g.clone(), pot.clone(), cfg, nl.clone(), lambda)?;
        let gs = solve_ground_state(&ctx, &SolveOpts::default())?;
        println!(
            "lambda {lambda:>7}: m_lambda = {:.12}, k(extension) = {:+.1e}, J(extension) - m_Omega = {:+.1e}",
            gs.energy,
            ctx.nehari_k(&ext)?,
            ctx.j_eval(&ext)? - limit.energy
        );
    }
    Ok(())
}
