//! Energy functionals, their derivatives, the Nehari constraint and
//! pointwise residuals.
//!
//! Both the full-graph functional `J_lambda` and the well-restricted `J_Omega`
//! are evaluated by one set of masked kernels. For `J_Omega` the state lives
//! on the full vertex set with hard zeros outside the wells; gradient terms
//! are summed over the closed wells, zeroth-order terms over the wells and
//! `F` over the union of both wells.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{
    abs_pow, gamma_at, grad_power, kahan_sum, p_laplacian_with, signed_pow, ExponentConfig,
    KahanSum,
};
use crate::error::{Error, Result};
use crate::graph::{
    closure, wells, PairState, PotentialPair, VertexFunction, WeightedGraph, Wells,
};
use crate::nonlinearity::Nonlinearity;

/// Which functional an [`EnergyContext`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Mode {
    FullGraph { lambda: f64 },
    LimitWells,
}

/// Per-component masks and weights derived from the mode.
#[derive(Debug, Clone)]
struct Component {
    exponent: f64,
    /// Coefficient of `|u|^p` at each vertex.
    zero_weight: Vec<f64>,
    /// Vertices whose gradient term enters the functional.
    grad_domain: Vec<bool>,
    /// Vertices where the component is a free unknown.
    free: Vec<bool>,
}

/// Everything needed to evaluate one functional.
#[derive(Clone)]
pub struct EnergyContext {
    pub graph: Arc<WeightedGraph>,
    pub pot: Arc<PotentialPair>,
    pub cfg: ExponentConfig,
    pub nl: Arc<dyn Nonlinearity>,
    mode: Mode,
    wells: Option<Wells>,
    cu: Component,
    cv: Component,
    f_domain: Vec<bool>,
}

impl std::fmt::Debug for EnergyContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnergyContext")
            .field("vertices", &self.graph.len())
            .field("cfg", &self.cfg)
            .field("nl", &self.nl.name())
            .field("mode", &self.mode)
            .finish()
    }
}

impl EnergyContext {
    /// Context for `J_lambda`; requires `lambda >= 1`.
    pub fn full(
        graph: Arc<WeightedGraph>,
        pot: Arc<PotentialPair>,
        cfg: ExponentConfig,
        nl: Arc<dyn Nonlinearity>,
        lambda: f64,
    ) -> Result<Self> {
        Self::new(graph, pot, cfg, nl, Mode::FullGraph { lambda })
    }

    /// Context for `J_Omega`; requires valid wells.
    pub fn limit(
        graph: Arc<WeightedGraph>,
        pot: Arc<PotentialPair>,
        cfg: ExponentConfig,
        nl: Arc<dyn Nonlinearity>,
    ) -> Result<Self> {
        Self::new(graph, pot, cfg, nl, Mode::LimitWells)
    }

    pub fn new(
        graph: Arc<WeightedGraph>,
        pot: Arc<PotentialPair>,
        cfg: ExponentConfig,
        nl: Arc<dyn Nonlinearity>,
        mode: Mode,
    ) -> Result<Self> {
        pot.check_on(&graph)?;
        let n = graph.len();
        if nl.envelope().c1.len() != n || nl.envelope().c2.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: nl.envelope().c1.len(),
            });
        }
        let (cu, cv, f_domain, w) = match mode {
            Mode::FullGraph { lambda } => {
                if !(lambda >= 1.0) || !lambda.is_finite() {
                    return Err(Error::InvalidLambda(lambda));
                }
                let comp = |e: f64, pw: &VertexFunction| Component {
                    exponent: e,
                    zero_weight: pw.values().iter().map(|a| lambda * a + 1.0).collect(),
                    grad_domain: vec![true; n],
                    free: vec![true; n],
                };
                (
                    comp(cfg.p, &pot.a),
                    comp(cfg.q, &pot.b),
                    vec![true; n],
                    None,
                )
            }
            Mode::LimitWells => {
                let w = wells(&graph, &pot)?;
                let comp = |e: f64, omega: &crate::graph::VertexSubset| Component {
                    exponent: e,
                    zero_weight: (0..n)
                        .map(|x| if omega.contains(x) { 1.0 } else { 0.0 })
                        .collect(),
                    grad_domain: closure(&graph, omega).mask().to_vec(),
                    free: omega.mask().to_vec(),
                };
                let cu = comp(cfg.p, &w.omega_a);
                let cv = comp(cfg.q, &w.omega_b);
                let f_domain = w.either().mask().to_vec();
                (cu, cv, f_domain, Some(w))
            }
        };
        Ok(EnergyContext {
            graph,
            pot,
            cfg,
            nl,
            mode,
            wells: w,
            cu,
            cv,
            f_domain,
        })
    }

    /// Same data, different functional.
    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            self.pot.clone(),
            self.cfg,
            self.nl.clone(),
            mode,
        )
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `lambda` for the full functional, `None` for the limit functional.
    pub fn lambda(&self) -> Option<f64> {
        match self.mode {
            Mode::FullGraph { lambda } => Some(lambda),
            Mode::LimitWells => None,
        }
    }

    pub fn wells(&self) -> Option<&Wells> {
        self.wells.as_ref()
    }

    pub fn n(&self) -> usize {
        self.graph.len()
    }

    /// Free-variable masks for `u` and `v`.
    pub fn free_masks(&self) -> (&[bool], &[bool]) {
        (&self.cu.free, &self.cv.free)
    }

    /// Number of free real unknowns.
    pub fn free_count(&self) -> usize {
        self.cu
            .free
            .iter()
            .chain(&self.cv.free)
            .filter(|&&f| f)
            .count()
    }

    /// Zeroes every non-free entry.
    pub fn restrict(&self, state: &PairState) -> PairState {
        let mask = |f: &VertexFunction, free: &[bool]| {
            VertexFunction::new(
                f.values()
                    .iter()
                    .zip(free)
                    .map(|(&v, &m)| if m { v } else { 0.0 })
                    .collect(),
            )
        };
        PairState::new(mask(&state.u, &self.cu.free), mask(&state.v, &self.cv.free))
    }

    /// Checks the state lives on this graph and, in limit mode, vanishes
    /// outside the wells.
    pub fn check_state(&self, state: &PairState) -> Result<()> {
        state.check_on(&self.graph)?;
        if self.mode == Mode::LimitWells {
            for (f, free) in [(&state.u, &self.cu.free), (&state.v, &self.cv.free)] {
                if let Some(x) = (0..self.n()).find(|&x| !free[x] && f[x] != 0.0) {
                    return Err(Error::DomainViolation(self.graph.id(x).to_string()));
                }
            }
        }
        Ok(())
    }

    /// `(int |grad f|^e + int w |f|^e)` over the component's domains.
    fn norm_pow(&self, c: &Component, f: &[f64]) -> f64 {
        let g = &self.graph;
        let mut acc = KahanSum::new();
        for x in 0..g.len() {
            if c.grad_domain[x] {
                acc.add(g.mu()[x] * abs_pow(gamma_at(g, f, f, x).max(0.0).sqrt(), c.exponent));
            }
            if c.zero_weight[x] != 0.0 {
                acc.add(g.mu()[x] * c.zero_weight[x] * abs_pow(f[x], c.exponent));
            }
        }
        acc.value()
    }

    /// `(||u||^p, ||v||^q)` in the norms of this functional.
    pub fn norm_pows(&self, state: &PairState) -> (f64, f64) {
        (
            self.norm_pow(&self.cu, state.u.values()),
            self.norm_pow(&self.cv, state.v.values()),
        )
    }

    /// `||u|| + ||v||`.
    pub fn pair_norm(&self, state: &PairState) -> f64 {
        let (nu, nv) = self.norm_pows(state);
        nu.powf(1.0 / self.cfg.p) + nv.powf(1.0 / self.cfg.q)
    }

    /// `int_D F(x, u, v)` over the nonlinearity domain.
    pub fn f_integral(&self, state: &PairState) -> f64 {
        let g = &self.graph;
        kahan_sum(
            (0..g.len())
                .filter(|&x| self.f_domain[x])
                .map(|x| g.mu()[x] * self.nl.value(x, state.u[x], state.v[x])),
        )
    }

    /// `int_D (F_u u + F_v v)` at `(t u, t v)`, paired with `(u, v)`.
    pub(crate) fn f_pair_scaled(&self, state: &PairState, t: f64) -> f64 {
        let g = &self.graph;
        kahan_sum((0..g.len()).filter(|&x| self.f_domain[x]).map(|x| {
            let (u, v) = (state.u[x], state.v[x]);
            let (fu, fv) = self.nl.grad(x, t * u, t * v);
            g.mu()[x] * (fu * u + fv * v)
        }))
    }

    /// `int_D F(x, t u, t v)`.
    pub(crate) fn f_integral_scaled(&self, state: &PairState, t: f64) -> f64 {
        let g = &self.graph;
        kahan_sum(
            (0..g.len())
                .filter(|&x| self.f_domain[x])
                .map(|x| g.mu()[x] * self.nl.value(x, t * state.u[x], t * state.v[x])),
        )
    }

    fn j_unchecked(&self, state: &PairState) -> f64 {
        let (nu, nv) = self.norm_pows(state);
        nu / self.cfg.p + nv / self.cfg.q - self.f_integral(state)
    }

    /// `J_lambda` or `J_Omega`.
    pub fn j_eval(&self, state: &PairState) -> Result<f64> {
        self.check_state(state)?;
        finite(self.j_unchecked(state), "energy")
    }

    /// `<J'(u, v), (phi1, phi2)>`.
    pub fn j_gateaux(&self, state: &PairState, dir: &PairState) -> Result<f64> {
        self.check_state(state)?;
        dir.check_on(&self.graph)?;
        let g = &self.graph;
        let term = |c: &Component, f: &[f64], phi: &[f64]| {
            let mut acc = KahanSum::new();
            for x in 0..g.len() {
                if c.grad_domain[x] {
                    let gn = gamma_at(g, f, f, x).max(0.0).sqrt();
                    let gm = gamma_at(g, f, phi, x);
                    if gm != 0.0 {
                        acc.add(g.mu()[x] * grad_power(gn, c.exponent - 2.0) * gm);
                    }
                }
                if c.zero_weight[x] != 0.0 {
                    acc.add(g.mu()[x] * c.zero_weight[x] * signed_pow(f[x], c.exponent) * phi[x]);
                }
            }
            acc.value()
        };
        let lin = term(&self.cu, state.u.values(), dir.u.values())
            + term(&self.cv, state.v.values(), dir.v.values());
        let f = kahan_sum((0..g.len()).filter(|&x| self.f_domain[x]).map(|x| {
            let (fu, fv) = self.nl.grad(x, state.u[x], state.v[x]);
            g.mu()[x] * (fu * dir.u[x] + fv * dir.v[x])
        }));
        finite(lin - f, "Gateaux derivative")
    }

    /// `k(u, v) = <J'(u, v), (u, v)> = ||u||^p + ||v||^q - int (F_u u + F_v v)`.
    pub fn nehari_k(&self, state: &PairState) -> Result<f64> {
        self.check_state(state)?;
        let (nu, nv) = self.norm_pows(state);
        finite(
            nu + nv - self.f_pair_scaled(state, 1.0),
            "Nehari functional",
        )
    }

    /// `<k'(u, v), (u, v)> = p||u||^p + q||v||^q - int [F_uu u^2 + F_vv v^2 + 2 F_uv uv + F_u u + F_v v]`.
    pub fn k_prime_pairing(&self, state: &PairState) -> Result<f64> {
        self.check_state(state)?;
        let (nu, nv) = self.norm_pows(state);
        let g = &self.graph;
        let f = kahan_sum((0..g.len()).filter(|&x| self.f_domain[x]).map(|x| {
            let (u, v) = (state.u[x], state.v[x]);
            let (fu, fv) = self.nl.grad(x, u, v);
            let h = self.nl.hessian(x, u, v);
            g.mu()[x] * (h.tt * u * u + h.ss * v * v + 2.0 * h.ts * u * v + fu * u + fv * v)
        }));
        finite(self.cfg.p * nu + self.cfg.q * nv - f, "k' pairing")
    }

    /// Pointwise operator part of the residual, for every vertex:
    /// `-Delta_p f + w |f|^{p-2} f`, where the p-Laplacian only collects
    /// gradient weights from the gradient domain. `smoothing` replaces
    /// `|grad f|^{e-2}` by `(|grad f|^2 + eps)^{(e-2)/2}` when `e < 2`.
    fn operator(&self, c: &Component, f: &[f64], smoothing: Option<f64>) -> Vec<f64> {
        let g = &self.graph;
        let e = c.exponent;
        let wt: Vec<f64> = (0..g.len())
            .map(|x| {
                if !c.grad_domain[x] {
                    return 0.0;
                }
                let gam = gamma_at(g, f, f, x).max(0.0);
                match smoothing {
                    Some(eps) if e < 2.0 => (gam + eps).powf((e - 2.0) / 2.0),
                    _ => grad_power(gam.sqrt(), e - 2.0),
                }
            })
            .collect();
        let lap = p_laplacian_with(g, f, &wt);
        (0..g.len())
            .map(|x| -lap[x] + c.zero_weight[x] * signed_pow(f[x], e))
            .collect()
    }

    /// Full residual vectors on every vertex, free or not.
    fn raw_residual(&self, state: &PairState, smoothing: Option<f64>) -> (Vec<f64>, Vec<f64>) {
        let (ou, ov) = rayon::join(
            || self.operator(&self.cu, state.u.values(), smoothing),
            || self.operator(&self.cv, state.v.values(), smoothing),
        );
        let n = self.n();
        let fgrad: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|x| {
                if self.f_domain[x] {
                    self.nl.grad(x, state.u[x], state.v[x])
                } else {
                    (0.0, 0.0)
                }
            })
            .collect();
        let ru = (0..n).map(|x| ou[x] - fgrad[x].0).collect();
        let rv = (0..n).map(|x| ov[x] - fgrad[x].1).collect();
        (ru, rv)
    }

    /// Pointwise Euler-Lagrange defect at the free vertices.
    pub fn residual(&self, state: &PairState) -> Result<Residual> {
        self.check_state(state)?;
        let (mut ru, mut rv) = self.raw_residual(state, None);
        for x in 0..self.n() {
            if !self.cu.free[x] {
                ru[x] = 0.0;
            }
            if !self.cv.free[x] {
                rv[x] = 0.0;
            }
        }
        let max_abs = ru.iter().chain(&rv).fold(0.0f64, |m, r| m.max(r.abs()));
        if !max_abs.is_finite() {
            return Err(Error::NonFiniteResult("residual".into()));
        }
        let mu = self.graph.mu();
        let l2 = kahan_sum((0..self.n()).map(|x| mu[x] * (ru[x] * ru[x] + rv[x] * rv[x]))).sqrt();
        Ok(Residual {
            u: ru,
            v: rv,
            max_abs,
            weighted_l2: l2,
        })
    }

    /// Weak pairing recovered from the residual vectors on all vertices,
    /// `int (r_u phi1 + r_v phi2)`, without masking.
    pub fn weak_pairing_from_residual(&self, state: &PairState, dir: &PairState) -> Result<f64> {
        self.check_state(state)?;
        let (ru, rv) = self.raw_residual(state, None);
        let mu = self.graph.mu();
        Ok(kahan_sum(
            (0..self.n()).map(|x| mu[x] * (ru[x] * dir.u[x] + rv[x] * dir.v[x])),
        ))
    }

    /// Energy and Euclidean gradient with respect to the free unknowns
    /// (non-free entries are zero). The gradient entry at `x` is
    /// `mu(x)` times the residual at `x`.
    pub fn value_and_gradient(
        &self,
        state: &PairState,
        smoothing: Option<f64>,
    ) -> (f64, PairState) {
        let j = self.j_unchecked(state);
        let (ru, rv) = self.raw_residual(state, smoothing);
        let mu = self.graph.mu();
        let gu = (0..self.n())
            .map(|x| if self.cu.free[x] { mu[x] * ru[x] } else { 0.0 })
            .collect();
        let gv = (0..self.n())
            .map(|x| if self.cv.free[x] { mu[x] * rv[x] } else { 0.0 })
            .collect();
        (
            j,
            PairState::new(VertexFunction::new(gu), VertexFunction::new(gv)),
        )
    }

    /// Diagonal scale `mu(x) w(x) + sum_y w_xy` of the quadratic part, used
    /// to precondition descent directions.
    pub fn diagonal_scale(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.graph;
        let d = |c: &Component| {
            (0..g.len())
                .map(|x| g.mu()[x] * c.zero_weight[x].max(1.0) + g.weighted_degree(x))
                .collect()
        };
        (d(&self.cu), d(&self.cv))
    }

    /// Diagonal of the Hessian of the `|grad f|^e` and `w |f|^e` terms at
    /// `state`, with `|f|` and `|grad f|` floored at `1e-3` of their maxima
    /// so the scale stays finite near zeros. Falls back to
    /// [`EnergyContext::diagonal_scale`] where that is not positive.
    pub fn diagonal_scale_at(&self, state: &PairState) -> (Vec<f64>, Vec<f64>) {
        let (bu, bv) = self.diagonal_scale();
        let d = |c: &Component, f: &[f64], base: Vec<f64>| -> Vec<f64> {
            let g = &self.graph;
            let e = c.exponent;
            let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if fmax == 0.0 {
                return base;
            }
            let gn: Vec<f64> = (0..g.len())
                .map(|x| {
                    if c.grad_domain[x] {
                        gamma_at(g, f, f, x).max(0.0).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect();
            let gmax = gn.iter().fold(0.0f64, |m, v| m.max(*v));
            let wt: Vec<f64> = (0..g.len())
                .map(|x| {
                    if !c.grad_domain[x] || gmax == 0.0 {
                        0.0
                    } else {
                        gn[x].max(1e-3 * gmax).powf(e - 2.0)
                    }
                })
                .collect();
            (0..g.len())
                .map(|x| {
                    let zero =
                        g.mu()[x] * c.zero_weight[x] * f[x].abs().max(1e-3 * fmax).powf(e - 2.0);
                    let grad: f64 = g
                        .neighbors(x)
                        .iter()
                        .map(|&(y, w)| 0.5 * w * (wt[x] + wt[y]))
                        .sum();
                    let v = (e - 1.0) * (zero + grad);
                    if v > 0.0 && v.is_finite() {
                        v
                    } else {
                        base[x]
                    }
                })
                .collect()
        };
        (
            d(&self.cu, state.u.values(), bu),
            d(&self.cv, state.v.values(), bv),
        )
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteResult(what.to_string()))
    }
}

/// Pointwise defect of the Euler-Lagrange system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub max_abs: f64,
    pub weighted_l2: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{GrowthEnvelope, PurePower};
    use approx::assert_relative_eq;

    fn single(lambda: f64) -> EnergyContext {
        let g = Arc::new(WeightedGraph::path(1));
        let pot = Arc::new(PotentialPair::zero(1));
        let cfg = ExponentConfig::new(2.0, 2.0, 4.0, 0.1, 5.0, 5.0).unwrap();
        let nl = Arc::new(PurePower::new(
            4.0,
            4.0,
            1.0,
            GrowthEnvelope::constant(1, 1.0 / 3.0, 1.0),
        ));
        EnergyContext::full(g, pot, cfg, nl, lambda).unwrap()
    }

    fn st(u: &[f64], v: &[f64]) -> PairState {
        PairState::new(
            VertexFunction::new(u.to_vec()),
            VertexFunction::new(v.to_vec()),
        )
    }

    #[test]
    fn j_eval_examples() {
        let ctx = single(1.0);
        assert_eq!(ctx.j_eval(&st(&[0.0], &[0.0])).unwrap(), 0.0);
        assert_relative_eq!(ctx.j_eval(&st(&[1.0], &[0.0])).unwrap(), 0.25);
        assert_relative_eq!(ctx.j_eval(&st(&[2.0], &[0.0])).unwrap(), -2.0);
    }

    #[test]
    fn gateaux_and_k_examples() {
        let ctx = single(7.0);
        let one = st(&[1.0], &[0.0]);
        assert_eq!(ctx.j_gateaux(&one, &one).unwrap(), 0.0);
        assert_eq!(ctx.nehari_k(&st(&[0.0], &[0.0])).unwrap(), 0.0);
        assert_eq!(ctx.nehari_k(&one).unwrap(), 0.0);
        assert_eq!(ctx.nehari_k(&st(&[2.0], &[0.0])).unwrap(), -12.0);
        assert_eq!(ctx.k_prime_pairing(&one).unwrap(), -2.0);
    }

    #[test]
    fn residual_examples() {
        let ctx = single(100.0);
        assert_eq!(ctx.residual(&st(&[1.0], &[0.0])).unwrap().max_abs, 0.0);
        assert_eq!(ctx.residual(&st(&[0.0], &[0.0])).unwrap().max_abs, 0.0);
    }

    #[test]
    fn lambda_below_one_is_rejected() {
        let ctx = single(1.0);
        assert!(matches!(
            ctx.with_mode(Mode::FullGraph { lambda: 0.5 }),
            Err(Error::InvalidLambda(_))
        ));
    }

    #[test]
    fn limit_mode_rejects_leaking_states() {
        let g = Arc::new(WeightedGraph::path(3));
        let pot = Arc::new(
            PotentialPair::new(
                VertexFunction::new(vec![0.0, 1.0, 1.0]),
                VertexFunction::new(vec![0.0, 1.0, 1.0]),
                0.0,
            )
            .unwrap(),
        );
        let cfg = ExponentConfig::new(2.0, 2.0, 4.0, 0.1, 5.0, 5.0).unwrap();
        let nl = Arc::new(PurePower::new(
            4.0,
            4.0,
            1.0,
            GrowthEnvelope::constant(3, 1.0 / 3.0, 1.0),
        ));
        let ctx = EnergyContext::limit(g, pot, cfg, nl).unwrap();
        let leak = st(&[1.0, 0.5, 0.0], &[0.0; 3]);
        assert!(matches!(ctx.j_eval(&leak), Err(Error::DomainViolation(id)) if id == "1"));
        // Gradient over the closed well sees the boundary vertex: |grad u|^2(0) = 1/2,
        // |grad u|^2(1) = 1/2, plus |u(0)|^2 = 1.
        let ok = st(&[1.0, 0.0, 0.0], &[0.0; 3]);
        let (nu, _) = ctx.norm_pows(&ok);
        assert_relative_eq!(nu, 2.0);
    }
}
