#![allow(dead_code)]

use std::sync::Arc;

use gpq::calculus::ExponentConfig;
use gpq::energy::EnergyContext;
use gpq::graph::{PairState, PotentialPair, VertexFunction, WeightedGraph};
use gpq::nonlinearity::{GrowthEnvelope, ModelCoupling, Nonlinearity, PurePower};
use gpq::sweep::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph on `n` vertices: a path backbone plus random chords,
/// random weights and measures.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
    let mut edges: Vec<(usize, usize, f64)> = (1..n)
        .map(|i| (i - 1, i, rng.gen_range(0.2..2.0)))
        .collect();
    for x in 0..n {
        for y in x + 2..n {
            if rng.gen_bool(0.25) {
                edges.push((x, y, rng.gen_range(0.2..2.0)));
            }
        }
    }
    let ids = (0..n).map(|i| i.to_string()).collect();
    WeightedGraph::new(ids, mu, &edges).expect("valid random graph")
}

/// Potentials vanishing on overlapping backbone segments, so both wells
/// and their intersection are connected.
pub fn random_potentials(rng: &mut ChaCha8Rng, n: usize) -> PotentialPair {
    let a_len = rng.gen_range(1..=n.min(3));
    let b_start = rng.gen_range(0..a_len);
    let b_len = rng.gen_range(1..=(n - b_start).min(3));
    let a = (0..n)
        .map(|x| {
            if x < a_len {
                0.0
            } else {
                rng.gen_range(0.5..3.0)
            }
        })
        .collect();
    let b = (0..n)
        .map(|x| {
            if x >= b_start && x < b_start + b_len {
                0.0
            } else {
                rng.gen_range(0.5..3.0)
            }
        })
        .collect();
    PotentialPair::new(VertexFunction::new(a), VertexFunction::new(b), 0.0)
        .expect("valid potentials")
}

pub fn random_function(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> VertexFunction {
    VertexFunction::new((0..n).map(|_| rng.gen_range(-scale..scale)).collect())
}

pub fn random_pair(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> PairState {
    PairState::new(
        random_function(rng, n, scale),
        random_function(rng, n, scale),
    )
}

/// Random admissible exponents with `alpha > beta` and `r1, r2 > alpha`.
pub fn random_config(rng: &mut ChaCha8Rng) -> ExponentConfig {
    let p: f64 = rng.gen_range(1.5..3.5);
    let q = rng.gen_range(1.5..3.5);
    let beta = p.max(q);
    let alpha = beta + rng.gen_range(0.5..2.0);
    let vmax = ((alpha - p) / p).min((alpha - q) / q);
    let varrho = vmax * rng.gen_range(0.1..0.9);
    let r1 = alpha + rng.gen_range(0.5..2.0);
    let r2 = alpha + rng.gen_range(0.5..2.0);
    ExponentConfig::new(p, q, alpha, varrho, r1, r2).expect("admissible exponents")
}

pub fn quartic_cfg() -> ExponentConfig {
    ExponentConfig::new(2.0, 2.0, 4.0, 0.1, 5.0, 5.0).unwrap()
}

pub fn quartic(n: usize) -> Arc<dyn Nonlinearity> {
    Arc::new(PurePower::new(
        4.0,
        4.0,
        1.0,
        GrowthEnvelope::constant(n, 1.0 / 3.0, 1.0),
    ))
}

/// The 12-vertex reference path: `a = 0` on `{0,1,2}`, `b = 0` on
/// `{1,2,3}`, potential 1 elsewhere, `p = 2`, `q = 3`, `alpha = 4`.
pub fn reference_instance() -> Instance {
    let n = 12;
    let g = WeightedGraph::path(n);
    let a = (0..n).map(|x| if x <= 2 { 0.0 } else { 1.0 }).collect();
    let b = (0..n)
        .map(|x| if (1..=3).contains(&x) { 0.0 } else { 1.0 })
        .collect();
    let pot = PotentialPair::new(VertexFunction::new(a), VertexFunction::new(b), 0.0).unwrap();
    let cfg = ExponentConfig::new(2.0, 3.0, 4.0, 0.1, 5.0, 5.0).unwrap();
    let nl = ModelCoupling::for_config(&g, 0, &cfg).unwrap();
    Instance {
        graph: Arc::new(g),
        pot: Arc::new(pot),
        cfg,
        nl: Arc::new(nl),
    }
}

/// A random instance with the weighted model nonlinearity.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let g = random_graph(rng, n);
    let pot = random_potentials(rng, n);
    let cfg = random_config(rng);
    let nl = ModelCoupling::for_config(&g, 0, &cfg).unwrap();
    Instance {
        graph: Arc::new(g),
        pot: Arc::new(pot),
        cfg,
        nl: Arc::new(nl),
    }
}

pub fn full_ctx(inst: &Instance, lambda: f64) -> EnergyContext {
    inst.context(lambda).unwrap()
}

/// The 2-vertex oracle instance: `mu = (1, 2)`, one unit edge,
/// `a = (0, 1)`, `b = (1, 0)`, `F = (t^4 + s^4)/4`, `p = q = 2`.
pub fn two_vertex_instance() -> Instance {
    let g =
        WeightedGraph::new(vec!["0".into(), "1".into()], vec![1.0, 2.0], &[(0, 1, 1.0)]).unwrap();
    let pot = PotentialPair::new(
        VertexFunction::new(vec![0.0, 1.0]),
        VertexFunction::new(vec![1.0, 0.0]),
        0.0,
    )
    .unwrap();
    Instance {
        graph: Arc::new(g),
        pot: Arc::new(pot),
        cfg: quartic_cfg(),
        nl: quartic(2),
    }
}

/// Quadratic part `||u||^2 + ||v||^2` and quartic part `int F` of the
/// 2-vertex instance at `lambda`, written out by hand.
fn two_vertex_parts(z: [f64; 4], lambda: f64) -> (f64, f64) {
    let [u0, u1, v0, v1] = z;
    let du = u1 - u0;
    let dv = v1 - v0;
    let a = du * du
        + u0 * u0
        + 2.0 * (lambda + 1.0) * u1 * u1
        + dv * dv
        + (lambda + 1.0) * v0 * v0
        + 2.0 * v1 * v1;
    let b = (u0.powi(4) + 2.0 * u1.powi(4) + v0.powi(4) + 2.0 * v1.powi(4)) / 4.0;
    (a, b)
}

/// Hand-coded energy `J = A/2 - B` of the 2-vertex instance.
pub fn two_vertex_energy(z: [f64; 4], lambda: f64) -> f64 {
    let (a, b) = two_vertex_parts(z, lambda);
    a / 2.0 - b
}

/// Hand-coded Nehari functional `k = A - 4B`.
pub fn two_vertex_k(z: [f64; 4], lambda: f64) -> f64 {
    let (a, b) = two_vertex_parts(z, lambda);
    a - 4.0 * b
}

fn sphere(th: [f64; 3]) -> [f64; 4] {
    let [a, b, c] = th;
    [
        a.cos(),
        a.sin() * b.cos(),
        a.sin() * b.sin() * c.cos(),
        a.sin() * b.sin() * c.sin(),
    ]
}

/// Level of the Nehari point on the ray through `dir`: `max_t J(t dir)`,
/// found by scanning `t` and refining around the best sample.
fn ray_level(dir: [f64; 4], lambda: f64) -> f64 {
    let at = |t: f64| two_vertex_energy(dir.map(|x| t * x), lambda);
    let mut best_t = 0.0;
    let mut best = 0.0;
    for i in 1..=400 {
        let t = 0.02 * i as f64;
        let j = at(t);
        if j > best {
            best = j;
            best_t = t;
        }
    }
    let (mut lo, mut hi) = ((best_t - 0.02f64).max(0.0), best_t + 0.02);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1) < at(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    at(0.5 * (lo + hi))
}

/// Brute-force ground level of the 2-vertex instance: polar grid over the
/// unit sphere of `R^4`, fiber maximum on each ray, then coordinate
/// refinement of the best cell.
pub fn two_vertex_oracle(lambda: f64) -> (f64, [f64; 4]) {
    use std::f64::consts::PI;
    let steps = [24usize, 24, 48];
    let mut best = (f64::INFINITY, [0.0; 3]);
    for i in 0..=steps[0] {
        for j in 0..=steps[1] {
            for k in 0..steps[2] {
                let th = [
                    PI * i as f64 / steps[0] as f64,
                    PI * j as f64 / steps[1] as f64,
                    2.0 * PI * k as f64 / steps[2] as f64,
                ];
                let l = ray_level(sphere(th), lambda);
                if l < best.0 {
                    best = (l, th);
                }
            }
        }
    }
    let mut h = PI / 24.0;
    while h > 1e-7 {
        let mut moved = false;
        for c in 0..3 {
            for s in [-1.0, 1.0] {
                let mut th = best.1;
                th[c] += s * h;
                let l = ray_level(sphere(th), lambda);
                if l < best.0 {
                    best = (l, th);
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (best.0, sphere(best.1))
}
