mod common;

use common::*;
use gpq::graph::WeightedGraph;
use gpq::limit::{solve_limit_ground_state, LimitProblem};
use gpq::nehari::{solve_ground_state, SolveOpts};
use gpq::PotentialPair;
use std::sync::Arc;

#[test]
fn single_vertex_levels_are_one_quarter() {
    let g = Arc::new(WeightedGraph::path(1));
    let pot = Arc::new(PotentialPair::zero(1));
    let inst = gpq::Instance {
        graph: g.clone(),
        pot: pot.clone(),
        cfg: quartic_cfg(),
        nl: quartic(1),
    };
    for lambda in [1.0, 100.0] {
        let gs = solve_ground_state(&inst.context(lambda).unwrap(), &SolveOpts::default()).unwrap();
        assert!(
            (gs.energy - 0.25).abs() <= 1e-10,
            "lambda {lambda}: {}",
            gs.energy
        );
        assert!(gs.certified);
    }
    let lp = LimitProblem::new(g, pot, quartic_cfg(), quartic(1)).unwrap();
    let gs = solve_limit_ground_state(&lp, &SolveOpts::default()).unwrap();
    assert!((gs.energy - 0.25).abs() <= 1e-10);
}

#[test]
fn hand_coded_energy_agrees_with_library() {
    let inst = two_vertex_instance();
    let mut r = rng(7);
    for lambda in [1.0, 4.0] {
        let ctx = inst.context(lambda).unwrap();
        for _ in 0..50 {
            let z = random_pair(&mut r, 2, 2.0);
            let arr = [z.u[0], z.u[1], z.v[0], z.v[1]];
            let j = ctx.j_eval(&z).unwrap();
            let k = ctx.nehari_k(&z).unwrap();
            assert!((j - two_vertex_energy(arr, lambda)).abs() <= 1e-12 * (1.0 + j.abs()));
            assert!((k - two_vertex_k(arr, lambda)).abs() <= 1e-12 * (1.0 + k.abs()));
        }
    }
}

#[test]
fn two_vertex_solver_matches_brute_force() {
    let inst = two_vertex_instance();
    let (oracle, dir) = two_vertex_oracle(1.0);
    let gs = solve_ground_state(&inst.context(1.0).unwrap(), &SolveOpts::default()).unwrap();
    assert!(
        (gs.energy - oracle).abs() <= 5e-3,
        "solver {} oracle {} at {dir:?}",
        gs.energy,
        oracle
    );
    // the oracle only samples Nehari points, so it cannot undercut the minimum
    assert!(oracle >= gs.energy - 1e-9);
}
