//! Sample the growth assumptions of the built-in nonlinearity and report
//! the worst violation of each.

use gpq::calculus::ExponentConfig;
use gpq::nonlinearity::{
    a1_evaluations, check_envelopes, check_f2, check_f3, check_f4, ModelCoupling, SampleOpts,
};
use gpq::{Nonlinearity, WeightedGraph};

fn main() -> gpq::Result<()> {
    let g = WeightedGraph::path(5);
    let cfg = ExponentConfig::new(2.0, 3.0, 4.0, 0.1, 5.0, 5.0)?;
    let nl = ModelCoupling::for_config(&g, 0, &cfg)?;
    let opts = SampleOpts::default();

    let env = nl.envelope();
    println!("envelope C1 = {:?}", env.c1.values());
    println!("envelope C2 = {:?}", env.c2.values());
    let norms = env.sup_norms(&cfg);
    println!(
        "sup norms: C1 {:.4}, C2 {:.4}, C3 {:.4}, C4 {:.4}",
        norms.c1, norms.c2, norms.c3, norms.c4
    );

    for report in [
        check_f2(&nl, &cfg, g.len(), &opts),
        check_f3(&nl, &cfg, env, g.len(), &opts),
        check_f4(&nl, &cfg, g.len(), &opts),
        check_envelopes(&nl, &cfg, env, g.len(), &opts),
    ] {
        println!(
            "{:<10} passed = {:<5} samples = {:<6} max violation = {:+.3e}",
            report.name, report.passed, report.samples, report.max_violation
        );
    }

    for (p, q) in [(2.0, 3.0), (1.2, 4.0), (0.5, 2.0)] {
        let (direct, hypothesis) = a1_evaluations(p, q);
        println!("A1 at (p, q) = ({p}, {q}): direct {direct}, hypothesis {hypothesis}");
    }
    Ok(())
}
