//! Build graphs, check the standing hypotheses, and read off potential wells.
//!
//! Run with `cargo run --example graph_validation`.

use gpq::graph::{
    boundary, closure, validate_graph, wells, GraphFile, VertexFunction, VertexSubset,
};
use gpq::{PotentialPair, WeightedGraph};

fn main() -> gpq::Result<()> {
    let g = WeightedGraph::path(6);
    let report = validate_graph(&g, 10.0);
    println!(
        "path(6): passed = {}, mu_min = {}, max weighted degree = {}",
        report.passed(),
        report.mu_min,
        report.max_weighted_degree
    );

    // a broken graph lists every violated hypothesis
    let bad = WeightedGraph::new(
        vec!["x".into(), "y".into(), "z".into(), "w".into()],
        vec![1.0, 0.0, 1.0, 1.0],
        &[(0, 1, 1.0), (2, 3, 1.0)],
    )?;
    for v in validate_graph(&bad, 10.0).violations {
        println!("violation: {v}");
    }

    let pot = PotentialPair::new(
        VertexFunction::new(vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
        VertexFunction::new(vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
        0.0,
    )?;
    let w = wells(&g, &pot)?;
    println!("Omega_a = {:?}", w.omega_a.ids(&g));
    println!("Omega_b = {:?}", w.omega_b.ids(&g));
    println!("Omega_a ∩ Omega_b = {:?}", w.both.ids(&g));

    let omega = VertexSubset::from_indices(6, [1, 2])?;
    println!("boundary of {{1, 2}} = {:?}", boundary(&g, &omega).ids(&g));
    println!("closure of {{1, 2}} = {:?}", closure(&g, &omega).ids(&g));

    match wells(
        &g,
        &PotentialPair::new(
            VertexFunction::new(vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0]),
            VertexFunction::zeros(6),
            0.0,
        )?,
    ) {
        Err(e) => println!("expected failure: {e}"),
        Ok(_) => unreachable!(),
    }

    // graph files round-trip through the JSON format used by the CLI
    let file = GraphFile::from_instance(&g, &pot);
    let text = serde_json::to_string(&file).expect("serializable");
    let back: GraphFile = serde_json::from_str(&text).expect("parsable");
    let (g2, _) = back.into_instance(10.0, 0.0)?;
    println!(
        "round trip keeps {} vertices and {} edges",
        g2.len(),
        g2.edges().len()
    );
    Ok(())
}
