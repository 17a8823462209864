//! The nonlinear term `F(x, t, s)`, its growth envelope and sampled
//! assumption checkers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{abs_pow, signed_pow, ExponentConfig};
use crate::error::{Error, Result};
use crate::graph::{VertexFunction, WeightedGraph};

/// Second partials of `F` with respect to `(t, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub tt: f64,
    pub ts: f64,
    pub ss: f64,
}

/// A nonlinearity `F(x, t, s)` with `F(x, 0, 0) = 0`, twice differentiable
/// in `(t, s)`, evaluated at vertex index `x`.
pub trait Nonlinearity: Send + Sync {
    fn value(&self, x: usize, t: f64, s: f64) -> f64;

    /// `(F_t, F_s)`.
    fn grad(&self, x: usize, t: f64, s: f64) -> (f64, f64);

    fn hessian(&self, x: usize, t: f64, s: f64) -> Hessian;

    /// `F_st` computed independently of [`Nonlinearity::hessian`]; defaults to `F_ts`.
    fn mixed_st(&self, x: usize, t: f64, s: f64) -> f64 {
        self.hessian(x, t, s).ts
    }

    fn envelope(&self) -> &GrowthEnvelope;

    fn name(&self) -> &str;
}

/// Coefficients `C1`, `C2` of the growth bounds on `F_t`, `F_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEnvelope {
    pub c1: VertexFunction,
    pub c2: VertexFunction,
}

impl GrowthEnvelope {
    pub fn constant(n: usize, c1: f64, c2: f64) -> Self {
        GrowthEnvelope {
            c1: VertexFunction::constant(n, c1),
            c2: VertexFunction::constant(n, c2),
        }
    }

    /// `max{1 + 1/p + (q-1)/q, 1 + 1/q + (p-1)/p}`.
    pub fn c3_factor(cfg: &ExponentConfig) -> f64 {
        let (p, q) = (cfg.p, cfg.q);
        (1.0 + 1.0 / p + (q - 1.0) / q).max(1.0 + 1.0 / q + (p - 1.0) / p)
    }

    /// `max{1 + 1/r1 + (r2-1)/r2, 1 + 1/r2 + (r1-1)/r1}`.
    pub fn c4_factor(cfg: &ExponentConfig) -> f64 {
        let (r1, r2) = (cfg.r1, cfg.r2);
        (1.0 + 1.0 / r1 + (r2 - 1.0) / r2).max(1.0 + 1.0 / r2 + (r1 - 1.0) / r1)
    }

    pub fn c3(&self, cfg: &ExponentConfig, x: usize) -> f64 {
        self.c1[x] * Self::c3_factor(cfg)
    }

    pub fn c4(&self, cfg: &ExponentConfig, x: usize) -> f64 {
        self.c2[x] * Self::c4_factor(cfg)
    }

    pub fn sup_norms(&self, cfg: &ExponentConfig) -> EnvelopeNorms {
        let c1 = self.c1.sup_norm();
        let c2 = self.c2.sup_norm();
        EnvelopeNorms {
            c1,
            c2,
            c3: c1 * Self::c3_factor(cfg),
            c4: c2 * Self::c4_factor(cfg),
        }
    }

    /// Checks `0 < C1 <= 1/(1+beta)` and `C2 > 0`.
    pub fn validate(&self, cfg: &ExponentConfig) -> Result<()> {
        let cap = 1.0 / (1.0 + cfg.beta());
        if let Some(x) = self
            .c1
            .values()
            .iter()
            .position(|&c| !(c > 0.0 && c <= cap))
        {
            return Err(Error::InvalidEnvelope(format!(
                "C1 = {} at index {x} is outside (0, 1/(1+beta)] = (0, {cap}]",
                self.c1[x]
            )));
        }
        if let Some(x) = self
            .c2
            .values()
            .iter()
            .position(|&c| !(c > 0.0 && c.is_finite()))
        {
            return Err(Error::InvalidEnvelope(format!(
                "C2 = {} at index {x} is not positive",
                self.c2[x]
            )));
        }
        Ok(())
    }
}

/// Sup norms of `C1..C4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeNorms {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// `F = w(x) (|t|^alpha + |s|^alpha) / (2 alpha (1+beta)) (1 - 1/ln(e^2 + |t|^alpha + |s|^alpha))`
/// with `w(x) = (1 + d(x, x0))^{-2}`.
#[derive(Debug, Clone)]
pub struct ModelCoupling {
    alpha: f64,
    beta: f64,
    weight: Vec<f64>,
    env: GrowthEnvelope,
}

impl ModelCoupling {
    /// Distances are measured from vertex index `base` in `g`.
    pub fn new(g: &WeightedGraph, base: usize, alpha: f64, beta: f64) -> Result<Self> {
        if base >= g.len() {
            return Err(Error::VertexIndex(base));
        }
        let dist = g.distances_from(base);
        let mut weight = Vec::with_capacity(g.len());
        for (x, d) in dist.iter().enumerate() {
            let d = d.ok_or_else(|| {
                Error::InvalidGraph(format!("vertex `{}` unreachable from base", g.id(x)))
            })?;
            weight.push(1.0 / ((1.0 + d as f64) * (1.0 + d as f64)));
        }
        let env = GrowthEnvelope {
            c1: VertexFunction::new(weight.iter().map(|w| w / (1.0 + beta)).collect()),
            c2: VertexFunction::new(weight.iter().map(|w| 2.0 * beta * w).collect()),
        };
        Ok(ModelCoupling {
            alpha,
            beta,
            weight,
            env,
        })
    }

    pub fn for_config(g: &WeightedGraph, base: usize, cfg: &ExponentConfig) -> Result<Self> {
        Self::new(g, base, cfg.alpha, cfg.beta())
    }

    fn k(&self, x: usize) -> f64 {
        self.weight[x] / (2.0 * self.alpha * (1.0 + self.beta))
    }

    fn s_sum(&self, t: f64, s: f64) -> f64 {
        abs_pow(t, self.alpha) + abs_pow(s, self.alpha)
    }

    /// `(G'(S), G''(S))` for `G(S) = S (1 - 1/ln(e^2 + S))`.
    fn shape_derivs(s_sum: f64) -> (f64, f64) {
        let e2 = std::f64::consts::E * std::f64::consts::E;
        let big_e = e2 + s_sum;
        let l = big_e.ln();
        let g1 = 1.0 - 1.0 / l + s_sum / (l * l * big_e);
        let g2 = (2.0 * l * e2 + s_sum * (l - 2.0)) / (l * l * l * big_e * big_e);
        (g1, g2)
    }

    fn partial(&self, t: f64) -> (f64, f64) {
        // (dS/dt, d2S/dt2)
        let a = self.alpha;
        (a * signed_pow(t, a), a * (a - 1.0) * abs_pow(t, a - 2.0))
    }
}

impl Nonlinearity for ModelCoupling {
    fn value(&self, x: usize, t: f64, s: f64) -> f64 {
        let sum = self.s_sum(t, s);
        if sum == 0.0 {
            return 0.0;
        }
        let e2 = std::f64::consts::E * std::f64::consts::E;
        self.k(x) * sum * (1.0 - 1.0 / (e2 + sum).ln())
    }

    fn grad(&self, x: usize, t: f64, s: f64) -> (f64, f64) {
        let (g1, _) = Self::shape_derivs(self.s_sum(t, s));
        let k = self.k(x);
        (k * g1 * self.partial(t).0, k * g1 * self.partial(s).0)
    }

    fn hessian(&self, x: usize, t: f64, s: f64) -> Hessian {
        let (g1, g2) = Self::shape_derivs(self.s_sum(t, s));
        let k = self.k(x);
        let (st, stt) = self.partial(t);
        let (ss, sss) = self.partial(s);
        Hessian {
            tt: k * (g2 * st * st + g1 * stt),
            ts: k * g2 * st * ss,
            ss: k * (g2 * ss * ss + g1 * sss),
        }
    }

    fn mixed_st(&self, x: usize, t: f64, s: f64) -> f64 {
        let (_, g2) = Self::shape_derivs(self.s_sum(s, t));
        self.k(x) * g2 * self.partial(s).0 * self.partial(t).0
    }

    fn envelope(&self) -> &GrowthEnvelope {
        &self.env
    }

    fn name(&self) -> &str {
        "model_coupling"
    }
}

/// `F = c (|t|^k1 / k1 + |s|^k2 / k2)` with a caller-supplied envelope.
#[derive(Debug, Clone)]
pub struct PurePower {
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
    env: GrowthEnvelope,
}

impl PurePower {
    pub fn new(k1: f64, k2: f64, c: f64, env: GrowthEnvelope) -> Self {
        PurePower { k1, k2, c, env }
    }
}

impl Nonlinearity for PurePower {
    fn value(&self, _x: usize, t: f64, s: f64) -> f64 {
        self.c * (abs_pow(t, self.k1) / self.k1 + abs_pow(s, self.k2) / self.k2)
    }

    fn grad(&self, _x: usize, t: f64, s: f64) -> (f64, f64) {
        (
            self.c * signed_pow(t, self.k1),
            self.c * signed_pow(s, self.k2),
        )
    }

    fn hessian(&self, _x: usize, t: f64, s: f64) -> Hessian {
        Hessian {
            tt: self.c * (self.k1 - 1.0) * abs_pow(t, self.k1 - 2.0),
            ts: 0.0,
            ss: self.c * (self.k2 - 1.0) * abs_pow(s, self.k2 - 2.0),
        }
    }

    fn envelope(&self) -> &GrowthEnvelope {
        &self.env
    }

    fn name(&self) -> &str {
        "pure_power"
    }
}

/// Where checkers sample `(x, t, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOpts {
    pub t_max: f64,
    /// Points per axis of the `(t, s)` lattice, repeated at every vertex.
    pub lattice: usize,
    /// Extra uniformly random `(x, t, s)` points.
    pub random: usize,
    pub seed: u64,
}

impl Default for SampleOpts {
    fn default() -> Self {
        SampleOpts {
            t_max: 10.0,
            lattice: 41,
            random: 1000,
            seed: 0,
        }
    }
}

impl SampleOpts {
    pub fn points(&self, n_vertices: usize) -> Vec<(usize, f64, f64)> {
        let mut pts = Vec::with_capacity(n_vertices * self.lattice * self.lattice + self.random);
        let step = if self.lattice > 1 {
            2.0 * self.t_max / (self.lattice - 1) as f64
        } else {
            0.0
        };
        for x in 0..n_vertices {
            for i in 0..self.lattice {
                for j in 0..self.lattice {
                    pts.push((
                        x,
                        -self.t_max + step * i as f64,
                        -self.t_max + step * j as f64,
                    ));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random {
            pts.push((
                rng.gen_range(0..n_vertices),
                rng.gen_range(-self.t_max..=self.t_max),
                rng.gen_range(-self.t_max..=self.t_max),
            ));
        }
        pts
    }
}

/// Result of a sampled assumption check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    /// Largest scale-relative violation; `<= 0` means the inequality held everywhere.
    pub max_violation: f64,
    pub worst_point: Option<(usize, f64, f64)>,
    pub passed: bool,
}

const CHECK_SLACK: f64 = 1e-12;

/// Runs `measure` at every point; it returns `(lhs - rhs, scale)` for an
/// inequality `lhs <= rhs`, or `None` to skip the point.
fn run_check(
    name: &str,
    pts: &[(usize, f64, f64)],
    strict: bool,
    measure: impl Fn(usize, f64, f64) -> Option<(f64, f64)> + Sync,
) -> CheckReport {
    let worst = pts
        .par_iter()
        .filter_map(|&(x, t, s)| {
            measure(x, t, s).map(|(diff, scale)| (diff / scale.max(f64::MIN_POSITIVE), (x, t, s)))
        })
        .reduce_with(|a, b| if b.0 > a.0 || b.0.is_nan() { b } else { a });
    let (max_violation, worst_point) = match worst {
        Some((v, p)) => (v, Some(p)),
        None => (f64::NEG_INFINITY, None),
    };
    let passed = if strict {
        max_violation < 0.0
    } else {
        max_violation <= CHECK_SLACK
    };
    CheckReport {
        name: name.to_string(),
        samples: pts.len(),
        max_violation,
        worst_point,
        passed: passed && !max_violation.is_nan(),
    }
}

/// `alpha F <= F_t t + F_s s + varrho (|t|^p + |s|^q)`.
pub fn check_f2(
    nl: &dyn Nonlinearity,
    cfg: &ExponentConfig,
    n_vertices: usize,
    opts: &SampleOpts,
) -> CheckReport {
    let pts = opts.points(n_vertices);
    run_check("F2", &pts, false, |x, t, s| {
        let f = nl.value(x, t, s);
        let (ft, fs) = nl.grad(x, t, s);
        let pow = abs_pow(t, cfg.p) + abs_pow(s, cfg.q);
        let lhs = cfg.alpha * f;
        let rhs = ft * t + fs * s + cfg.varrho * pow;
        let scale = 1.0 + lhs.abs() + (ft * t).abs() + (fs * s).abs() + cfg.varrho * pow;
        Some((lhs - rhs, scale))
    })
}

/// The two growth bounds on `|F_t|` and `|F_s|` with the envelope `C1`, `C2`.
pub fn check_f3(
    nl: &dyn Nonlinearity,
    cfg: &ExponentConfig,
    env: &GrowthEnvelope,
    n_vertices: usize,
    opts: &SampleOpts,
) -> CheckReport {
    let (p, q, r1, r2) = (cfg.p, cfg.q, cfg.r1, cfg.r2);
    let pts = opts.points(n_vertices);
    run_check("F3", &pts, false, |x, t, s| {
        let (ft, fs) = nl.grad(x, t, s);
        let (c1, c2) = (env.c1[x], env.c2[x]);
        let bt = c1 * (abs_pow(t, p - 1.0) + abs_pow(s, q * (p - 1.0) / p))
            + c2 * (abs_pow(t, r1 - 1.0) + abs_pow(s, r2 * (r1 - 1.0) / r1));
        let bs = c1 * (abs_pow(t, p * (q - 1.0) / q) + abs_pow(s, q - 1.0))
            + c2 * (abs_pow(t, r1 * (r2 - 1.0) / r2) + abs_pow(s, r2 - 1.0));
        let dt = (ft.abs() - bt) / (1.0 + bt);
        let ds = (fs.abs() - bs) / (1.0 + bs);
        Some((dt.max(ds), 1.0))
    })
}

/// `F_ts t s >= 0` and `0 < (beta-1)(F_t t + F_s s) < F_tt t^2 + F_ss s^2`
/// at sampled points other than the origin. The strict parts must hold with
/// a positive margin.
pub fn check_f4(
    nl: &dyn Nonlinearity,
    cfg: &ExponentConfig,
    n_vertices: usize,
    opts: &SampleOpts,
) -> CheckReport {
    let beta = cfg.beta();
    let pts = opts.points(n_vertices);
    run_check("F4", &pts, true, |x, t, s| {
        if t == 0.0 && s == 0.0 {
            return None;
        }
        let (ft, fs) = nl.grad(x, t, s);
        let h = nl.hessian(x, t, s);
        let pair = (beta - 1.0) * (ft * t + fs * s);
        let second = h.tt * t * t + h.ss * s * s;
        let scale = pair.abs() + second.abs() + (h.ts * t * s).abs();
        // all three as "lhs - rhs < 0"
        let sign = if h.ts * t * s >= 0.0 {
            f64::NEG_INFINITY
        } else {
            -h.ts * t * s
        };
        let positivity = -pair;
        let order = pair - second;
        Some((sign.max(positivity).max(order), scale))
    })
}

/// `(|F| bound, |F_t t + F_s s| bound)` from the growth envelope.
pub fn envelope_bounds(
    env: &GrowthEnvelope,
    cfg: &ExponentConfig,
    x: usize,
    t: f64,
    s: f64,
) -> (f64, f64) {
    let (p, q, r1, r2) = (cfg.p, cfg.q, cfg.r1, cfg.r2);
    let (c1, c2) = (env.c1[x], env.c2[x]);
    let f_bound = 2.0 * c1 / p * abs_pow(t, p)
        + (c1 * (p - 1.0) / p + c1 / q) * abs_pow(s, q)
        + 2.0 * c2 / r1 * abs_pow(t, r1)
        + (c2 * (r1 - 1.0) / r1 + c2 / r2) * abs_pow(s, r2);
    let pair_bound = env.c3(cfg, x) * (abs_pow(t, p) + abs_pow(s, q))
        + env.c4(cfg, x) * (abs_pow(t, r1) + abs_pow(s, r2));
    (f_bound, pair_bound)
}

/// Sampled check of both envelope inequalities.
pub fn check_envelopes(
    nl: &dyn Nonlinearity,
    cfg: &ExponentConfig,
    env: &GrowthEnvelope,
    n_vertices: usize,
    opts: &SampleOpts,
) -> CheckReport {
    let pts = opts.points(n_vertices);
    run_check("envelopes", &pts, false, |x, t, s| {
        let (fb, pb) = envelope_bounds(env, cfg, x, t, s);
        let f = nl.value(x, t, s);
        let (ft, fs) = nl.grad(x, t, s);
        let pair = ft * t + fs * s;
        let d1 = (f.abs() - fb) / (1.0 + fb);
        let d2 = (pair.abs() - pb) / (1.0 + pb);
        Some((d1.max(d2), 1.0))
    })
}

/// The two evaluations behind [`check_a1`]: the direct comparison
/// `1/(1 + max{1/p + (q-1)/q, 1/q + (p-1)/p}) > 1/(1+beta)` and the
/// hypothesis `1/gamma < beta + 1/beta - 1`.
pub fn a1_evaluations(p: f64, q: f64) -> (bool, bool) {
    let beta = p.max(q);
    let gamma = p.min(q);
    let m = (1.0 / p + (q - 1.0) / q).max(1.0 / q + (p - 1.0) / p);
    let direct = 1.0 / (1.0 + m) > 1.0 / (1.0 + beta);
    let hypothesis = 1.0 / gamma < beta + 1.0 / beta - 1.0;
    (direct, hypothesis)
}

/// True iff both evaluations of the exponent compatibility condition hold.
pub fn check_a1(p: f64, q: f64) -> bool {
    let (direct, hypothesis) = a1_evaluations(p, q);
    direct && hypothesis
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg22() -> ExponentConfig {
        ExponentConfig::new(2.0, 2.0, 4.0, 0.1, 5.0, 5.0).unwrap()
    }

    fn cfg23() -> ExponentConfig {
        ExponentConfig::new(2.0, 3.0, 4.0, 0.1, 5.0, 5.0).unwrap()
    }

    fn quartic(n: usize) -> PurePower {
        PurePower::new(4.0, 4.0, 1.0, GrowthEnvelope::constant(n, 1.0 / 3.0, 1.0))
    }

    struct Quadratic(GrowthEnvelope);

    impl Nonlinearity for Quadratic {
        fn value(&self, _: usize, t: f64, _: f64) -> f64 {
            t * t
        }
        fn grad(&self, _: usize, t: f64, _: f64) -> (f64, f64) {
            (2.0 * t, 0.0)
        }
        fn hessian(&self, _: usize, _: f64, _: f64) -> Hessian {
            Hessian {
                tt: 2.0,
                ts: 0.0,
                ss: 0.0,
            }
        }
        fn envelope(&self) -> &GrowthEnvelope {
            &self.0
        }
        fn name(&self) -> &str {
            "quadratic"
        }
    }

    struct NegativeMixed(GrowthEnvelope);

    impl Nonlinearity for NegativeMixed {
        fn value(&self, _: usize, t: f64, s: f64) -> f64 {
            t.powi(4) + s.powi(4) - 0.1 * t * t * s * s
        }
        fn grad(&self, _: usize, t: f64, s: f64) -> (f64, f64) {
            (
                4.0 * t.powi(3) - 0.2 * t * s * s,
                4.0 * s.powi(3) - 0.2 * t * t * s,
            )
        }
        fn hessian(&self, _: usize, t: f64, s: f64) -> Hessian {
            Hessian {
                tt: 12.0 * t * t - 0.2 * s * s,
                ts: -0.4 * t * s,
                ss: 12.0 * s * s - 0.2 * t * t,
            }
        }
        fn envelope(&self) -> &GrowthEnvelope {
            &self.0
        }
        fn name(&self) -> &str {
            "negative_mixed"
        }
    }

    #[test]
    fn f2_examples() {
        let opts = SampleOpts::default();
        let r = check_f2(&quartic(1), &cfg22(), 1, &opts);
        assert!(r.passed, "{r:?}");
        assert!(r.max_violation <= 0.0);

        let g = WeightedGraph::path(3);
        let model = ModelCoupling::for_config(&g, 0, &cfg23()).unwrap();
        assert!(check_f2(&model, &cfg23(), 3, &opts).passed);

        let quad = Quadratic(GrowthEnvelope::constant(1, 0.2, 1.0));
        let r = check_f2(&quad, &cfg22(), 1, &opts);
        assert!(!r.passed);
        assert!(r.max_violation > 0.0);
    }

    #[test]
    fn f3_f4_examples() {
        let opts = SampleOpts::default();
        let q = quartic(1);
        assert!(check_f4(&q, &cfg22(), 1, &opts).passed);
        let bad = NegativeMixed(GrowthEnvelope::constant(1, 0.2, 1.0));
        assert!(!check_f4(&bad, &cfg22(), 1, &opts).passed);

        let g = WeightedGraph::path(3);
        let model = ModelCoupling::for_config(&g, 0, &cfg23()).unwrap();
        assert!(check_f3(&model, &cfg23(), model.envelope(), 3, &opts).passed);
        assert!(check_f4(&model, &cfg23(), 3, &opts).passed);
    }

    #[test]
    fn envelope_examples() {
        let cfg = cfg22();
        let env = GrowthEnvelope::constant(1, 1.0 / 3.0, 1.0);
        assert_eq!(envelope_bounds(&env, &cfg, 0, 0.0, 0.0), (0.0, 0.0));
        let q = quartic(1);
        assert_eq!(q.value(0, 0.0, 0.0), 0.0);
        let (fb, _) = envelope_bounds(&env, &cfg, 0, 1.0, 0.0);
        assert_relative_eq!(q.value(0, 1.0, 0.0), 0.25);
        assert!(0.25 <= fb);

        let g = WeightedGraph::path(3);
        let model = ModelCoupling::for_config(&g, 0, &cfg23()).unwrap();
        let opts = SampleOpts {
            lattice: 0,
            random: 500,
            ..SampleOpts::default()
        };
        let r = check_envelopes(&model, &cfg23(), model.envelope(), 3, &opts);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn a1_examples() {
        assert!(check_a1(2.0, 2.0));
        assert!(check_a1(3.0, 1.1));
        assert!(check_a1(1.01, 1.01));
        let (d, h) = a1_evaluations(0.5, 2.0);
        assert!(!d && !h);
        assert!(!check_a1(0.5, 2.0));
    }

    #[test]
    fn model_coupling_envelope_constants() {
        let g = WeightedGraph::path(4);
        let model = ModelCoupling::for_config(&g, 0, &cfg23()).unwrap();
        let env = model.envelope();
        assert_relative_eq!(env.c1[0], 0.25);
        assert_relative_eq!(env.c1[2], 0.25 / 9.0);
        assert_relative_eq!(env.c2[1], 6.0 / 4.0);
        env.validate(&cfg23()).unwrap();
        let n = env.sup_norms(&cfg23());
        assert_relative_eq!(n.c3, 0.25 * (1.0 + 0.5 + 2.0 / 3.0));
        assert_relative_eq!(n.c4, 12.0);
    }

    #[test]
    fn envelope_validation_rejects_large_c1() {
        let env = GrowthEnvelope::constant(2, 0.5, 1.0);
        assert!(env.validate(&cfg22()).is_err());
    }
}
