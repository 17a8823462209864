//! The fibering map `g(t) = J(t u, t v)` along one direction and its
//! projection onto the Nehari manifold.

use std::sync::Arc;

use gpq::calculus::ExponentConfig;
use gpq::graph::{PairState, VertexFunction};
use gpq::nehari::{project_state, Fiber};
use gpq::{EnergyContext, ModelCoupling, PotentialPair, WeightedGraph};

fn main() -> gpq::Result<()> {
    let g = Arc::new(WeightedGraph::path(4));
    let pot = Arc::new(PotentialPair::new(
        VertexFunction::new(vec![0.0, 0.0, 1.0, 1.0]),
        VertexFunction::new(vec![1.0, 0.0, 0.0, 1.0]),
        0.0,
    )?);
    let cfg = ExponentConfig::new(2.0, 3.0, 4.0, 0.1, 5.0, 5.0)?;
    let nl = Arc::new(ModelCoupling::for_config(&g, 0, &cfg)?);
    let ctx = EnergyContext::full(g, pot, cfg, nl, 5.0)?;

    let dir = PairState::new(
        VertexFunction::new(vec![1.0, 0.5, 0.0, 0.0]),
        VertexFunction::new(vec![0.0, 0.5, 1.0, 0.0]),
    );
    let fiber = Fiber::new(&ctx, &dir)?;
    println!("{:>10} {:>14} {:>14}", "t", "g(t)", "g'(t)");
    for i in 0..=12 {
        let t = 10f64.powf(-1.0 + i as f64 / 6.0);
        println!(
            "{t:>10.4} {:>14.6e} {:>14.6e}",
            fiber.g(t),
            fiber.g_prime(t)
        );
    }

    let (z, fr) = project_state(&ctx, &dir)?;
    println!("t0 = {:.12} after {} bisection steps", fr.t0, fr.iterations);
    println!("J at the projection = {:.12}", fr.g_at_t0);
    println!("k at the projection = {:.3e}", ctx.nehari_k(&z)?);
    println!(
        "<k'(z), z> = {:.6} (negative on the Nehari manifold)",
        ctx.k_prime_pairing(&z)?
    );
    Ok(())
}
