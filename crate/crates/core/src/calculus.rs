//! Gradient form, p-Laplacian, integrals, norms and embedding constants.
//!
//! All reductions use compensated summation. Vertex arguments are dense
//! indices into the graph (see [`WeightedGraph::index_of`]).

use crate::error::{Error, Result};
use crate::graph::{closure, PotentialPair, VertexFunction, VertexSubset, WeightedGraph};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::new();
        for x in iter {
            k.add(x);
        }
        k
    }
}

pub fn kahan_sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Exponents `p, q, alpha, varrho, r1, r2` of the growth conditions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExponentConfig {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub varrho: f64,
    pub r1: f64,
    pub r2: f64,
}

impl ExponentConfig {
    /// Builds and validates a configuration.
    pub fn new(p: f64, q: f64, alpha: f64, varrho: f64, r1: f64, r2: f64) -> Result<Self> {
        let cfg = ExponentConfig {
            p,
            q,
            alpha,
            varrho,
            r1,
            r2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn beta(&self) -> f64 {
        self.p.max(self.q)
    }

    pub fn gamma(&self) -> f64 {
        self.p.min(self.q)
    }

    /// Upper end of the admissible `varrho` interval.
    pub fn varrho_max(&self) -> f64 {
        ((self.alpha - self.p) / self.p).min((self.alpha - self.q) / self.q)
    }

    /// Returns the first violated condition, naming it.
    pub fn validate(&self) -> Result<()> {
        let all = [self.p, self.q, self.alpha, self.varrho, self.r1, self.r2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("exponents must be finite".into()));
        }
        if self.p <= 1.0 || self.q <= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "p and q must exceed 1 (p = {}, q = {})",
                self.p, self.q
            )));
        }
        if self.alpha <= self.beta() {
            return Err(Error::InvalidConfig(format!(
                "(F2) requires alpha > beta = max(p, q), got alpha = {} and beta = {}",
                self.alpha,
                self.beta()
            )));
        }
        if !(self.varrho > 0.0 && self.varrho < self.varrho_max()) {
            return Err(Error::InvalidConfig(format!(
                "(F2) requires 0 < varrho < {}, got {}",
                self.varrho_max(),
                self.varrho
            )));
        }
        if self.r1 <= self.alpha || self.r2 <= self.alpha {
            return Err(Error::InvalidConfig(format!(
                "(F3) requires r1, r2 > alpha = {}, got r1 = {}, r2 = {}",
                self.alpha, self.r1, self.r2
            )));
        }
        if !(1.0 / self.gamma() < self.beta() + 1.0 / self.beta() - 1.0) {
            return Err(Error::InvalidConfig(
                "(A1) requires 1/gamma < beta + 1/beta - 1".into(),
            ));
        }
        Ok(())
    }
}

fn check_vertex(g: &WeightedGraph, x: usize) -> Result<()> {
    if x < g.len() {
        Ok(())
    } else {
        Err(Error::VertexIndex(x))
    }
}

fn check_len(g: &WeightedGraph, f: &VertexFunction) -> Result<()> {
    if f.len() == g.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: g.len(),
            got: f.len(),
        })
    }
}

pub(crate) fn gamma_at(g: &WeightedGraph, f1: &[f64], f2: &[f64], x: usize) -> f64 {
    let mut acc = KahanSum::new();
    for &(y, w) in g.neighbors(x) {
        acc.add(w * ((f1[y] - f1[x]) * (f2[y] - f2[x])));
    }
    acc.value() / (2.0 * g.mu()[x])
}

/// `Gamma(psi1, psi2)(x) = (1/2mu(x)) sum_{y~x} w_xy (psi1(y)-psi1(x))(psi2(y)-psi2(x))`.
pub fn gamma_form(
    g: &WeightedGraph,
    psi1: &VertexFunction,
    psi2: &VertexFunction,
    x: usize,
) -> Result<f64> {
    check_len(g, psi1)?;
    check_len(g, psi2)?;
    check_vertex(g, x)?;
    Ok(gamma_at(g, psi1.values(), psi2.values(), x))
}

/// `|grad psi|(x) = sqrt(Gamma(psi)(x))`.
pub fn grad_norm(g: &WeightedGraph, psi: &VertexFunction, x: usize) -> Result<f64> {
    Ok(gamma_form(g, psi, psi, x)?.max(0.0).sqrt())
}

/// Gradient lengths at every vertex.
pub fn grad_norms(g: &WeightedGraph, psi: &[f64]) -> Vec<f64> {
    (0..g.len())
        .map(|x| gamma_at(g, psi, psi, x).max(0.0).sqrt())
        .collect()
}

/// `int_V psi dmu`.
pub fn integral(g: &WeightedGraph, psi: &VertexFunction) -> Result<f64> {
    check_len(g, psi)?;
    Ok(kahan_sum(
        g.mu().iter().zip(psi.values()).map(|(m, v)| m * v),
    ))
}

/// `|grad psi|^e` at a vertex where the gradient length is `norm`, with the
/// zero-gradient value `0` for `e != 0` and `1` for `e = 0`.
pub fn grad_power(norm: f64, e: f64) -> f64 {
    if norm == 0.0 {
        if e == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        norm.powf(e)
    }
}

/// `|t|^e`, with `0^e = 0` for `e > 0` and `0^0 = 1`.
pub fn abs_pow(t: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if t == 0.0 {
        0.0
    } else {
        t.abs().powf(e)
    }
}

/// `|t|^{p-2} t`, equal to `0` at `t = 0` for every `p > 1`.
pub fn signed_pow(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

/// `Delta_p psi` at every vertex from precomputed gradient weights
/// `wt[x] = |grad psi|^{p-2}(x)`.
pub(crate) fn p_laplacian_with(g: &WeightedGraph, psi: &[f64], wt: &[f64]) -> Vec<f64> {
    (0..g.len())
        .map(|x| {
            let mut acc = KahanSum::new();
            for &(y, w) in g.neighbors(x) {
                let d = psi[y] - psi[x];
                if d != 0.0 {
                    acc.add((wt[y] + wt[x]) * w * d);
                }
            }
            acc.value() / (2.0 * g.mu()[x])
        })
        .collect()
}

/// `Delta_p psi` at every vertex.
pub fn p_laplacian_all(g: &WeightedGraph, psi: &VertexFunction, p: f64) -> Result<Vec<f64>> {
    check_len(g, psi)?;
    if !(p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if !psi.is_finite() {
        return Err(Error::NonFiniteResult("p-Laplacian input".into()));
    }
    let wt: Vec<f64> = grad_norms(g, psi.values())
        .into_iter()
        .map(|n| grad_power(n, p - 2.0))
        .collect();
    let out = p_laplacian_with(g, psi.values(), &wt);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteResult("p-Laplacian".into()));
    }
    Ok(out)
}

/// `Delta_p psi(x) = (1/2mu(x)) sum_{y~x} (|grad psi|^{p-2}(y) + |grad psi|^{p-2}(x)) w_xy (psi(y)-psi(x))`.
pub fn p_laplacian(g: &WeightedGraph, psi: &VertexFunction, p: f64, x: usize) -> Result<f64> {
    check_vertex(g, x)?;
    Ok(p_laplacian_all(g, psi, p)?[x])
}

/// Which norm [`norm`] computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormTag {
    /// `(int_V |psi|^theta)^{1/theta}`, `theta >= 1`.
    Lebesgue(f64),
    Sup,
    /// `(int_V |grad psi|^s + |psi|^s)^{1/s}`.
    Sobolev(f64),
    /// `W_lambda(a)` with exponent `p`.
    WLambdaA {
        p: f64,
        lambda: f64,
    },
    /// `W_lambda(b)` with exponent `q`.
    WLambdaB {
        q: f64,
        lambda: f64,
    },
    /// `W_{Omega_a}`: gradient over the closed well, values over the well.
    WOmegaA {
        p: f64,
    },
    WOmegaB {
        q: f64,
    },
}

/// `int_V |grad psi|^p + (lambda w + 1)|psi|^p`, the `p`-th power of the
/// weighted Sobolev norm.
pub fn w_lambda_pow(g: &WeightedGraph, psi: &[f64], p: f64, lambda: f64, weight: &[f64]) -> f64 {
    let gn = grad_norms(g, psi);
    kahan_sum(
        (0..g.len()).map(|x| {
            g.mu()[x] * (abs_pow(gn[x], p) + (lambda * weight[x] + 1.0) * abs_pow(psi[x], p))
        }),
    )
}

/// `int_{closure(omega)} |grad psi|^p + int_omega |psi|^p`.
pub fn w_omega_pow(g: &WeightedGraph, psi: &[f64], p: f64, omega: &VertexSubset) -> f64 {
    let bar = closure(g, omega);
    let mut acc = KahanSum::new();
    for x in bar.iter() {
        acc.add(g.mu()[x] * abs_pow(gamma_at(g, psi, psi, x).max(0.0).sqrt(), p));
    }
    for x in omega.iter() {
        acc.add(g.mu()[x] * abs_pow(psi[x], p));
    }
    acc.value()
}

/// `(int_omega |psi|^theta)^{1/theta}`.
pub fn lebesgue_norm_on(g: &WeightedGraph, psi: &[f64], theta: f64, omega: &VertexSubset) -> f64 {
    kahan_sum(omega.iter().map(|x| g.mu()[x] * abs_pow(psi[x], theta))).powf(1.0 / theta)
}

fn zero_set(f: &VertexFunction, tol: f64) -> VertexSubset {
    VertexSubset::from_mask(f.values().iter().map(|&v| v <= tol).collect())
}

/// Evaluates the norm selected by `tag`. Weighted norms need `pot`.
pub fn norm(
    g: &WeightedGraph,
    psi: &VertexFunction,
    tag: NormTag,
    pot: Option<&PotentialPair>,
) -> Result<f64> {
    check_len(g, psi)?;
    let v = psi.values();
    let need_pot = || pot.ok_or(Error::MissingPotential);
    let exp_ok = |e: f64| {
        if e > 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidExponent(e))
        }
    };
    let lambda_ok = |l: f64| {
        if l >= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidLambda(l))
        }
    };
    match tag {
        NormTag::Sup => Ok(psi.sup_norm()),
        NormTag::Lebesgue(theta) => {
            if !(theta >= 1.0) || !theta.is_finite() {
                return Err(Error::InvalidExponent(theta));
            }
            Ok(kahan_sum((0..g.len()).map(|x| g.mu()[x] * abs_pow(v[x], theta))).powf(1.0 / theta))
        }
        NormTag::Sobolev(s) => {
            exp_ok(s)?;
            Ok(w_lambda_pow(g, v, s, 0.0, &vec![0.0; g.len()]).powf(1.0 / s))
        }
        NormTag::WLambdaA { p, lambda } => {
            exp_ok(p)?;
            lambda_ok(lambda)?;
            let pot = need_pot()?;
            Ok(w_lambda_pow(g, v, p, lambda, pot.a.values()).powf(1.0 / p))
        }
        NormTag::WLambdaB { q, lambda } => {
            exp_ok(q)?;
            lambda_ok(lambda)?;
            let pot = need_pot()?;
            Ok(w_lambda_pow(g, v, q, lambda, pot.b.values()).powf(1.0 / q))
        }
        NormTag::WOmegaA { p } => {
            exp_ok(p)?;
            let pot = need_pot()?;
            Ok(w_omega_pow(g, v, p, &zero_set(&pot.a, pot.zero_tol)).powf(1.0 / p))
        }
        NormTag::WOmegaB { q } => {
            exp_ok(q)?;
            let pot = need_pot()?;
            Ok(w_omega_pow(g, v, q, &zero_set(&pot.b, pot.zero_tol)).powf(1.0 / q))
        }
    }
}

/// Constants of the Sobolev-type embeddings on the whole graph and on the wells.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EmbeddingConstants {
    pub p: f64,
    pub q: f64,
    pub mu_min: f64,
    /// `(1/mu_min)^{1/p}`.
    pub d1: f64,
    /// `(1/mu_min)^{1/q}`.
    pub d2: f64,
    /// `||(a+1)^{-1}||_{1/(p-1)}`.
    pub inv_a_norm: f64,
    /// `||(b+1)^{-1}||_{1/(q-1)}`.
    pub inv_b_norm: f64,
    /// `mu(Omega_a)`.
    pub well_a_mass: f64,
    /// `mu(Omega_b)`.
    pub well_b_mass: f64,
}

/// `||f||_s = (int |f|^s)^{1/s}` for any `s > 0`.
fn quasi_norm(g: &WeightedGraph, f: impl Fn(usize) -> f64, s: f64) -> f64 {
    kahan_sum((0..g.len()).map(|x| g.mu()[x] * f(x).abs().powf(s))).powf(1.0 / s)
}

fn k_whole(d: f64, inv_norm: f64, p: f64, theta: f64) -> f64 {
    if theta >= p {
        d.powf((theta - p) / theta)
    } else {
        let first = d.powf((theta - 1.0) / theta) * inv_norm.powf(1.0 / (p * theta));
        let second = d.powf(p * (theta - 1.0) / theta) * inv_norm.powf(1.0 / p);
        first.min(second)
    }
}

impl EmbeddingConstants {
    /// `K_{(p,theta)}`, valid for `theta >= 1`.
    pub fn k_p(&self, theta: f64) -> f64 {
        k_whole(self.d1, self.inv_a_norm, self.p, theta)
    }

    /// `K_{(q,theta)}`, valid for `theta >= 1`.
    pub fn k_q(&self, theta: f64) -> f64 {
        k_whole(self.d2, self.inv_b_norm, self.q, theta)
    }

    /// `K*_{(p,theta)} = mu(Omega_a)^{1/theta} (1/mu_min)^{1/p}`.
    pub fn k_star_p(&self, theta: f64) -> f64 {
        self.well_a_mass.powf(1.0 / theta) * self.d1
    }

    pub fn k_star_q(&self, theta: f64) -> f64 {
        self.well_b_mass.powf(1.0 / theta) * self.d2
    }

    /// `||(a+1)^{-1}||^{1/p}_{1/(p-1)}`, the constant in `int |psi| <= C ||psi||_{W_lambda(a)}`.
    pub fn l1_constant_a(&self) -> f64 {
        self.inv_a_norm.powf(1.0 / self.p)
    }

    pub fn l1_constant_b(&self) -> f64 {
        self.inv_b_norm.powf(1.0 / self.q)
    }
}

/// Evaluates the embedding constants for exponents `p`, `q`.
pub fn embedding_constants(
    g: &WeightedGraph,
    pot: &PotentialPair,
    p: f64,
    q: f64,
) -> Result<EmbeddingConstants> {
    pot.check_on(g)?;
    for e in [p, q] {
        if !(e > 1.0) {
            return Err(Error::InvalidExponent(e));
        }
    }
    let mu_min = g.mu_min();
    if !(mu_min > 0.0) {
        return Err(Error::InvalidGraph("measure not uniformly positive".into()));
    }
    let a = pot.a.values();
    let b = pot.b.values();
    let mass = |set: VertexSubset| kahan_sum(set.iter().map(|x| g.mu()[x]));
    Ok(EmbeddingConstants {
        p,
        q,
        mu_min,
        d1: (1.0 / mu_min).powf(1.0 / p),
        d2: (1.0 / mu_min).powf(1.0 / q),
        inv_a_norm: quasi_norm(g, |x| 1.0 / (a[x] + 1.0), 1.0 / (p - 1.0)),
        inv_b_norm: quasi_norm(g, |x| 1.0 / (b[x] + 1.0), 1.0 / (q - 1.0)),
        well_a_mass: mass(zero_set(&pot.a, pot.zero_tol)),
        well_b_mass: mass(zero_set(&pot.b, pot.zero_tol)),
    })
}
