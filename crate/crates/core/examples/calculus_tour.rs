//! Gradient forms, the p-Laplacian, norms and embedding constants on a small path.

use gpq::calculus::{
    embedding_constants, gamma_form, grad_norm, integral, norm, p_laplacian_all, NormTag,
};
use gpq::graph::VertexFunction;
use gpq::{PotentialPair, WeightedGraph};

fn main() -> gpq::Result<()> {
    let g = WeightedGraph::path(3);
    let psi = VertexFunction::new(vec![0.0, 1.0, 0.0]);
    let phi = VertexFunction::new(vec![2.0, 0.0, 0.0]);

    println!("Gamma(psi)(1)      = {}", gamma_form(&g, &psi, &psi, 1)?);
    println!("Gamma(psi, phi)(0) = {}", gamma_form(&g, &psi, &phi, 0)?);
    println!("|grad psi|(0)      = {}", grad_norm(&g, &psi, 0)?);
    println!("int psi            = {}", integral(&g, &psi)?);

    for p in [1.5, 2.0, 3.0] {
        println!("Delta_{p} psi = {:?}", p_laplacian_all(&g, &psi, p)?);
    }

    let pot = PotentialPair::new(
        VertexFunction::new(vec![0.0, 0.0, 1.0]),
        VertexFunction::new(vec![1.0, 0.0, 0.0]),
        0.0,
    )?;
    let tags = [
        ("L^2", NormTag::Lebesgue(2.0)),
        ("sup", NormTag::Sup),
        ("W^{1,2}", NormTag::Sobolev(2.0)),
        (
            "W_lambda(a), lambda = 10",
            NormTag::WLambdaA {
                p: 2.0,
                lambda: 10.0,
            },
        ),
        ("W_Omega_a", NormTag::WOmegaA { p: 2.0 }),
    ];
    for (name, tag) in tags {
        println!(
            "||psi|| in {name:<26} = {:.6}",
            norm(&g, &psi, tag, Some(&pot))?
        );
    }

    let k = embedding_constants(&g, &pot, 2.0, 3.0)?;
    println!("d1 = {}, d2 = {}", k.d1, k.d2);
    for theta in [1.0, 1.5, 2.0, 4.0] {
        println!(
            "K_(2,{theta}) = {:.6}   K*_(2,{theta}) = {:.6}",
            k.k_p(theta),
            k.k_star_p(theta)
        );
    }
    Ok(())
}
