//! Nehari projection, ground-state search and certification.
//!
//! A direction `(u, v)` is projected onto the Nehari manifold by locating the
//! unique positive root of the fibering derivative `g'(t)`, where
//! `g(t) = J(t u, t v)`. The ground state is found by preconditioned descent
//! on the projected energy from several deterministic starts, followed by a
//! Newton polish of the Euler-Lagrange system.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{abs_pow, embedding_constants};
use crate::energy::{EnergyContext, Mode};
use crate::error::{Error, Result};
use crate::graph::{wells, PairState, VertexFunction};
use crate::nonlinearity::EnvelopeNorms;

const T_MIN: f64 = 1e-12;
const T_MAX: f64 = 1e12;
const BISECT_REL_WIDTH: f64 = 1e-14;
const BISECT_MAX_ITERS: usize = 200;
const SMOOTHING: f64 = 1e-12;
const ARMIJO_C: f64 = 1e-4;
/// Scaled KKT level at which descent hands over to Newton.
const NEWTON_HANDOFF: f64 = 1e-4;
/// Largest trial step along the preconditioned direction.
const MAX_STEP: f64 = 4.0;

/// The fibering map `t -> J(t u, t v)` of a fixed direction.
#[derive(Debug)]
pub struct Fiber<'a> {
    ctx: &'a EnergyContext,
    dir: &'a PairState,
    nu: f64,
    nv: f64,
}

impl<'a> Fiber<'a> {
    pub fn new(ctx: &'a EnergyContext, dir: &'a PairState) -> Result<Self> {
        ctx.check_state(dir)?;
        let (nu, nv) = ctx.norm_pows(dir);
        Ok(Fiber { ctx, dir, nu, nv })
    }

    pub fn g(&self, t: f64) -> f64 {
        let (p, q) = (self.ctx.cfg.p, self.ctx.cfg.q);
        abs_pow(t, p) / p * self.nu + abs_pow(t, q) / q * self.nv
            - self.ctx.f_integral_scaled(self.dir, t)
    }

    pub fn g_prime(&self, t: f64) -> f64 {
        let (p, q) = (self.ctx.cfg.p, self.ctx.cfg.q);
        t.powf(p - 1.0) * self.nu + t.powf(q - 1.0) * self.nv - self.ctx.f_pair_scaled(self.dir, t)
    }

    /// Magnitude of the terms making up `g'(t)`, for relative tolerances.
    pub fn g_prime_scale(&self, t: f64) -> f64 {
        let (p, q) = (self.ctx.cfg.p, self.ctx.cfg.q);
        t.powf(p - 1.0) * self.nu
            + t.powf(q - 1.0) * self.nv
            + self.ctx.f_pair_scaled(self.dir, t).abs()
    }
}

/// `g(t) = J(t u, t v)`.
pub fn fiber_g(ctx: &EnergyContext, dir: &PairState, t: f64) -> Result<f64> {
    Ok(Fiber::new(ctx, dir)?.g(t))
}

/// `g'(t) = <J'(t u, t v), (u, v)>`.
pub fn fiber_g_prime(ctx: &EnergyContext, dir: &PairState, t: f64) -> Result<f64> {
    Ok(Fiber::new(ctx, dir)?.g_prime(t))
}

/// Root of the fibering derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberResult {
    pub t0: f64,
    pub g_at_t0: f64,
    pub gprime_bracket: (f64, f64),
    pub iterations: usize,
}

/// Finds the `t0 > 0` with `(t0 u, t0 v)` on the Nehari manifold.
pub fn project_to_nehari(ctx: &EnergyContext, dir: &PairState) -> Result<FiberResult> {
    if dir.is_zero() {
        return Err(Error::BracketFailure);
    }
    let fiber = Fiber::new(ctx, dir)?;
    let gp = |t: f64| fiber.g_prime(t);
    let mut iterations = 0;
    let g1 = gp(1.0);
    if g1.is_nan() {
        return Err(Error::BracketFailure);
    }
    if g1 == 0.0 {
        return Ok(FiberResult {
            t0: 1.0,
            g_at_t0: fiber.g(1.0),
            gprime_bracket: (1.0, 1.0),
            iterations,
        });
    }
    // lo has g' > 0, hi has g' < 0
    let (mut lo, mut hi) = if g1 > 0.0 {
        let mut t = 1.0;
        loop {
            let next = t * 2.0;
            iterations += 1;
            if next > T_MAX {
                return Err(Error::BracketFailure);
            }
            let v = gp(next);
            if v.is_nan() {
                return Err(Error::BracketFailure);
            }
            if v <= 0.0 {
                break (t, next);
            }
            t = next;
        }
    } else {
        let mut t = 1.0;
        loop {
            let next = t * 0.5;
            iterations += 1;
            if next < T_MIN {
                return Err(Error::BracketFailure);
            }
            let v = gp(next);
            if v.is_nan() {
                return Err(Error::BracketFailure);
            }
            if v >= 0.0 {
                break (next, t);
            }
            t = next;
        }
    };
    let bracket = (lo, hi);
    let mut glo = gp(lo);
    let mut ghi = gp(hi);
    let mut it = 0;
    while hi - lo > BISECT_REL_WIDTH * hi && it < BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = gp(mid);
        it += 1;
        if gm.is_nan() {
            return Err(Error::BracketFailure);
        }
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            glo = 0.0;
            ghi = 0.0;
            break;
        }
        if gm > 0.0 {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    let t0 = if glo.abs() <= ghi.abs() { lo } else { hi };
    Ok(FiberResult {
        t0,
        g_at_t0: fiber.g(t0),
        gprime_bracket: bracket,
        iterations: iterations + it,
    })
}

/// Projects and returns the scaled state.
pub fn project_state(ctx: &EnergyContext, dir: &PairState) -> Result<(PairState, FiberResult)> {
    let fr = project_to_nehari(ctx, dir)?;
    Ok((dir.scaled(fr.t0), fr))
}

/// Closed-form lower and upper bounds for a ground state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    /// Lower bound on the ground-state level.
    pub eta: f64,
    /// Radius at which `eta` was evaluated.
    pub rho: f64,
    /// Lower bound on the norm of any Nehari state.
    pub xi: f64,
    pub xi_parts: [f64; 4],
    /// Upper bound on the ground-state norm.
    pub upper_l: f64,
    /// Level plugged into `upper_l`.
    pub m_ref: f64,
    /// Embedding constants `K_{(p,r1)}`, `K_{(q,r2)}` (or their well analogues).
    pub k_p_r1: f64,
    pub k_q_r2: f64,
    pub envelope: EnvelopeNorms,
}

/// Bound formulas from the exponents, envelope sup norms and embedding
/// constants `k_p = K_{(p,r1)}`, `k_q = K_{(q,r2)}`.
pub fn bounds_from_constants(
    cfg: &crate::calculus::ExponentConfig,
    env: EnvelopeNorms,
    k_p: f64,
    k_q: f64,
    m_ref: f64,
) -> Result<BoundsReport> {
    let (p, q, r1, r2) = (cfg.p, cfg.q, cfg.r1, cfg.r2);
    let beta = cfg.beta();
    let gamma = cfg.gamma();
    if env.c3 >= 1.0 {
        return Err(Error::InvalidEnvelope(format!(
            "||C3|| = {} is not below 1",
            env.c3
        )));
    }
    let l_den = 1.0 / beta - (1.0 + cfg.varrho) / cfg.alpha;
    if l_den <= 0.0 {
        return Err(Error::InvalidEnvelope(
            "1/beta <= (1 + varrho)/alpha leaves the upper bound undefined".into(),
        ));
    }

    // level lower bound
    let a_num = 1.0 / p - 2.0 * env.c1 / p;
    let a_coef = 2.0 * env.c2 / r1 * k_p.powf(r1);
    let b_num = 1.0 / q - env.c1 * (p - 1.0) / p - env.c1 / q;
    let b_coef = (env.c2 * (r1 - 1.0) / r1 + env.c2 / r2) * k_q.powf(r2);
    if a_num <= 0.0 || b_num <= 0.0 {
        return Err(Error::InvalidEnvelope("empty interval for rho".into()));
    }
    let rho_max = 1f64
        .min((a_num / a_coef).powf(1.0 / (r1 - p)))
        .min((b_num / b_coef).powf(1.0 / (r2 - q)));
    if !(rho_max > 0.0) {
        return Err(Error::InvalidEnvelope("empty interval for rho".into()));
    }
    let eta_at = |rho: f64| {
        2f64.powf(1.0 - beta)
            * rho.powf(beta)
            * (a_num - a_coef * rho.powf(r1 - p)).min(b_num - b_coef * rho.powf(r2 - q))
    };
    let (rho, eta) = (1..1000)
        .map(|k| {
            let rho = rho_max * k as f64 / 1000.0;
            (rho, eta_at(rho))
        })
        .fold((0.0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });

    // norm lower bound
    let m = (env.c4 * k_p.powf(r1)).max(env.c4 * k_q.powf(r2));
    let c = 1.0 - env.c3;
    let xi_parts = [
        (c / (2f64.powf(gamma) * m)).powf(1.0 / (r1.max(r2) - gamma)),
        (c / (2.0 * m)).powf(1.0 / (r1 - p).max(r2)),
        (c / (2.0 * m)).powf(1.0 / r1.max(r2 - q)),
        (c / (2f64.powf(beta) * m)).powf(1.0 / (r1.max(r2) - beta)),
    ];
    let xi = xi_parts.iter().copied().fold(f64::INFINITY, f64::min);

    // norm upper bound
    let upper_l =
        (2f64.powf(p - 1.0).max(2f64.powf(q - 1.0)) * (m_ref / l_den + 1.0)).powf(1.0 / gamma);

    Ok(BoundsReport {
        eta,
        rho,
        xi,
        xi_parts,
        upper_l,
        m_ref,
        k_p_r1: k_p,
        k_q_r2: k_q,
        envelope: env,
    })
}

/// Evaluates the bounds for the functional of `ctx` with level `m_ref`.
/// The full functional uses the whole-graph embedding constants, the
/// limit functional the well constants.
pub fn compute_bounds(ctx: &EnergyContext, m_ref: f64) -> Result<BoundsReport> {
    let cfg = &ctx.cfg;
    let env = ctx.nl.envelope();
    env.validate(cfg)?;
    let k = embedding_constants(&ctx.graph, &ctx.pot, cfg.p, cfg.q)?;
    let (kp, kq) = match ctx.mode() {
        Mode::FullGraph { .. } => (k.k_p(cfg.r1), k.k_q(cfg.r2)),
        Mode::LimitWells => (k.k_star_p(cfg.r1), k.k_star_q(cfg.r2)),
    };
    bounds_from_constants(cfg, env.sup_norms(cfg), kp, kq, m_ref)
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOpts {
    /// Random restarts in addition to the warm starts.
    pub restarts: usize,
    pub max_iters: usize,
    /// Bound on `|k| / max(1, ||u||^p + ||v||^q)`.
    pub tol_k: f64,
    /// Bound on `max |residual| / (1 + ||state||_inf)`.
    pub tol_res: f64,
    pub seed: u64,
    /// Extra starting directions tried before the built-in ones.
    pub warm_starts: Vec<PairState>,
    /// Keep the descent trace of the winning start.
    pub record_trace: bool,
    pub newton_polish: bool,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            restarts: 16,
            max_iters: 5000,
            tol_k: 1e-10,
            tol_res: 1e-8,
            seed: 0,
            warm_starts: Vec::new(),
            record_trace: false,
            newton_polish: true,
        }
    }
}

/// One descent iterate: energy and the two norm powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub energy: f64,
    pub norm_pow_u: f64,
    pub norm_pow_v: f64,
}

/// A solved and certified (or best-effort) ground state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundState {
    pub state: PairState,
    /// `m_lambda` or `m_Omega`.
    pub energy: f64,
    /// `None` for the limit functional.
    pub lambda: Option<f64>,
    /// `|k| / max(1, ||u||^p + ||v||^q)`.
    pub nehari_residual: f64,
    /// `max |residual| / (1 + ||state||_inf)`.
    pub kkt_residual: f64,
    pub residual_max_abs: f64,
    pub k_prime_pairing: f64,
    /// `||u|| + ||v||` in the functional's norm.
    pub norm: f64,
    pub bounds: BoundsReport,
    pub restarts_used: usize,
    /// Index of the winning start.
    pub best_start: usize,
    pub iterations: usize,
    pub seed: u64,
    pub certified: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

impl GroundState {
    /// Whether `xi <= norm <= L`.
    pub fn within_sandwich(&self) -> bool {
        self.bounds.xi <= self.norm && self.norm <= self.bounds.upper_l
    }

    /// Trace points violating
    /// `(1/p - (1+varrho)/alpha)||u||^p + (1/q - (1+varrho)/alpha)||v||^q <= J`.
    pub fn coercivity_violations(&self, cfg: &crate::calculus::ExponentConfig) -> usize {
        let cp = 1.0 / cfg.p - (1.0 + cfg.varrho) / cfg.alpha;
        let cq = 1.0 / cfg.q - (1.0 + cfg.varrho) / cfg.alpha;
        self.trace
            .iter()
            .filter(|t| {
                cp * t.norm_pow_u + cq * t.norm_pow_v > t.energy + 1e-9 * (1.0 + t.energy.abs())
            })
            .count()
    }
}

/// Outcome of one start.
#[derive(Debug, Clone)]
struct RunResult {
    state: PairState,
    energy: f64,
    start_energy: f64,
    iterations: usize,
    trace: Vec<TracePoint>,
}

fn dot(a: &PairState, b: &PairState) -> f64 {
    a.u.values()
        .iter()
        .zip(b.u.values())
        .map(|(x, y)| x * y)
        .sum::<f64>()
        + a.v
            .values()
            .iter()
            .zip(b.v.values())
            .map(|(x, y)| x * y)
            .sum::<f64>()
}

/// `max |r| / (1 + ||z||_inf)` from a Euclidean gradient `mu r`.
fn scaled_kkt(ctx: &EnergyContext, state: &PairState, grad: &PairState) -> f64 {
    let mu = ctx.graph.mu();
    let m = (0..ctx.n())
        .map(|x| (grad.u[x] / mu[x]).abs().max((grad.v[x] / mu[x]).abs()))
        .fold(0.0, f64::max);
    m / (1.0 + state.sup_norm())
}

fn descend(
    ctx: &EnergyContext,
    start: &PairState,
    opts: &SolveOpts,
    target_kkt: f64,
    max_iters: usize,
) -> Result<RunResult> {
    let (mut z, _) = project_state(ctx, &ctx.restrict(start))?;
    let (mut j, mut grad) = ctx.value_and_gradient(&z, Some(SMOOTHING));
    let start_energy = j;
    let mut trace = Vec::new();
    let record = |z: &PairState, j: f64, trace: &mut Vec<TracePoint>| {
        if opts.record_trace {
            let (nu, nv) = ctx.norm_pows(z);
            trace.push(TracePoint {
                energy: j,
                norm_pow_u: nu,
                norm_pow_v: nv,
            });
        }
    };
    record(&z, j, &mut trace);
    let mut step: f64 = 1.0;
    let mut stagnant = 0;
    let mut iterations = 0;
    while iterations < max_iters {
        if scaled_kkt(ctx, &z, &grad) <= target_kkt {
            break;
        }
        let (du, dv) = ctx.diagonal_scale_at(&z);
        let d = PairState::new(
            VertexFunction::new((0..ctx.n()).map(|x| -grad.u[x] / du[x]).collect()),
            VertexFunction::new((0..ctx.n()).map(|x| -grad.v[x] / dv[x]).collect()),
        );
        let slope = dot(&grad, &d);
        if !(slope < 0.0) {
            break;
        }
        let mut s = (step * 2.0).min(MAX_STEP);
        let mut accepted = None;
        for _ in 0..60 {
            if let Ok((cand, _)) = project_state(ctx, &z.axpy(s, &d)) {
                let jc = ctx.value_and_gradient(&cand, Some(SMOOTHING));
                if jc.0.is_finite() && jc.0 <= j + ARMIJO_C * s * slope {
                    accepted = Some((cand, jc));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((mut cand, (mut jc, mut gc))) = accepted else {
            break;
        };
        // minimizer of the parabola through j, the slope and the accepted value
        let curvature = jc - j - slope * s;
        if curvature > 0.0 {
            let s_star = -slope * s * s / (2.0 * curvature);
            if s_star > 1e-3 * s && s_star < 0.9 * s {
                if let Ok((c2, _)) = project_state(ctx, &z.axpy(s_star, &d)) {
                    let j2 = ctx.value_and_gradient(&c2, Some(SMOOTHING));
                    if j2.0 < jc {
                        cand = c2;
                        (jc, gc) = j2;
                        s = s_star;
                    }
                }
            }
        }
        iterations += 1;
        step = s;
        let decrease = j - jc;
        z = cand;
        j = jc;
        grad = gc;
        record(&z, j, &mut trace);
        if decrease <= 1e-15 * (1.0 + j.abs()) {
            stagnant += 1;
            if stagnant >= 25 {
                break;
            }
        } else {
            stagnant = 0;
        }
    }
    Ok(RunResult {
        state: z,
        energy: j,
        start_energy,
        iterations,
        trace,
    })
}

/// Newton iteration on the Euler-Lagrange system in the free unknowns,
/// with a finite-difference Jacobian of the analytic residual and an SVD
/// solve. Steps are kept only while they reduce the residual without
/// raising the energy.
fn newton_polish(ctx: &EnergyContext, run: &mut RunResult) {
    let (fu, fv) = ctx.free_masks();
    let idx: Vec<(bool, usize)> = (0..ctx.n())
        .filter(|&x| fu[x])
        .map(|x| (false, x))
        .chain((0..ctx.n()).filter(|&x| fv[x]).map(|x| (true, x)))
        .collect();
    let m = idx.len();
    if m == 0 {
        return;
    }
    let mu = ctx.graph.mu().to_vec();
    let resid = |z: &PairState| -> DVector<f64> {
        let (_, g) = ctx.value_and_gradient(z, None);
        DVector::from_iterator(
            m,
            idx.iter()
                .map(|&(is_v, x)| if is_v { g.v[x] / mu[x] } else { g.u[x] / mu[x] }),
        )
    };
    let get = |z: &PairState, k: usize| {
        let (is_v, x) = idx[k];
        if is_v {
            z.v[x]
        } else {
            z.u[x]
        }
    };
    let set = |z: &mut PairState, k: usize, val: f64| {
        let (is_v, x) = idx[k];
        if is_v {
            z.v[x] = val;
        } else {
            z.u[x] = val;
        }
    };
    let mut z = run.state.clone();
    let mut r = resid(&z);
    let mut rnorm = r.amax();
    for _ in 0..30 {
        if rnorm == 0.0 {
            break;
        }
        let mut jac = DMatrix::zeros(m, m);
        for k in 0..m {
            let base = get(&z, k);
            let h = 1e-7 * (1.0 + base.abs());
            let mut zp = z.clone();
            set(&mut zp, k, base + h);
            let mut zm = z.clone();
            set(&mut zm, k, base - h);
            let col = (resid(&zp) - resid(&zm)) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let Ok(delta) = svd.solve(&(-&r), 1e-12 * smax.max(f64::MIN_POSITIVE)) else {
            break;
        };
        let mut improved = false;
        let mut s = 1.0;
        for _ in 0..12 {
            let mut cand = z.clone();
            for k in 0..m {
                set(&mut cand, k, get(&z, k) + s * delta[k]);
            }
            if let Ok((proj, _)) = project_state(ctx, &cand) {
                let rc = resid(&proj);
                let rcn = rc.amax();
                let jc = ctx.value_and_gradient(&proj, None).0;
                if rcn < rnorm && jc <= run.energy + 1e-12 * (1.0 + run.energy.abs()) {
                    z = proj;
                    r = rc;
                    rnorm = rcn;
                    run.energy = jc;
                    improved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !improved {
            break;
        }
    }
    run.state = z;
}

/// Seeded uniform direction on the free entries.
pub fn random_direction(ctx: &EnergyContext, seed: u64) -> PairState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fu, fv) = ctx.free_masks();
    let n = ctx.n();
    let mut draw = |free: &[bool]| {
        VertexFunction::new(
            (0..n)
                .map(|x| {
                    let r: f64 = rng.gen_range(-1.0..=1.0);
                    if free[x] {
                        r
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
    };
    let u = draw(fu);
    let v = draw(fv);
    PairState::new(u, v)
}

/// Well indicators `(1_a, 0)`, `(0, 1_b)`, `(1_a, 1_b)`; falls back to
/// constants when the potentials have no valid wells.
pub fn well_indicator_starts(ctx: &EnergyContext) -> Vec<PairState> {
    let n = ctx.n();
    let (ia, ib) = match ctx
        .wells()
        .cloned()
        .map(Ok)
        .unwrap_or_else(|| wells(&ctx.graph, &ctx.pot))
    {
        Ok(w) => (
            VertexFunction::indicator(&w.omega_a),
            VertexFunction::indicator(&w.omega_b),
        ),
        Err(_) => (
            VertexFunction::constant(n, 1.0),
            VertexFunction::constant(n, 1.0),
        ),
    };
    let zero = VertexFunction::zeros(n);
    vec![
        PairState::new(ia.clone(), zero.clone()),
        PairState::new(zero, ib.clone()),
        PairState::new(ia, ib),
    ]
}

/// Minimizes the energy over the Nehari manifold from the given starts.
/// Starts that cannot be projected (zero on the free entries) are skipped.
/// Descent to a loose KKT level, Newton, and, if Newton stalls, descent to
/// the strict level followed by another Newton pass.
fn run_start(ctx: &EnergyContext, start: &PairState, opts: &SolveOpts) -> Option<RunResult> {
    let strict = opts.tol_res * 1e-2;
    if !opts.newton_polish {
        return descend(ctx, start, opts, strict, opts.max_iters).ok();
    }
    let mut run = descend(ctx, start, opts, NEWTON_HANDOFF.max(strict), opts.max_iters).ok()?;
    newton_polish(ctx, &mut run);
    let (_, grad) = ctx.value_and_gradient(&run.state, Some(SMOOTHING));
    if scaled_kkt(ctx, &run.state, &grad) <= strict || run.iterations >= opts.max_iters {
        return Some(run);
    }
    let Ok(mut more) = descend(
        ctx,
        &run.state,
        opts,
        strict,
        opts.max_iters - run.iterations,
    ) else {
        return Some(run);
    };
    newton_polish(ctx, &mut more);
    more.start_energy = run.start_energy;
    more.iterations += run.iterations;
    run.trace.extend(more.trace.into_iter().skip(1));
    more.trace = run.trace;
    Some(more)
}

pub fn solve_from_starts(
    ctx: &EnergyContext,
    starts: &[PairState],
    opts: &SolveOpts,
) -> Result<GroundState> {
    let runs: Vec<Option<RunResult>> = starts.par_iter().map(|s| run_start(ctx, s, opts)).collect();
    let mut best: Option<(usize, &RunResult)> = None;
    for (i, r) in runs.iter().enumerate() {
        if let Some(r) = r {
            if best.map_or(true, |(_, b)| r.energy < b.energy) {
                best = Some((i, r));
            }
        }
    }
    let Some((best_start, best)) = best else {
        return Err(Error::BracketFailure);
    };
    let min_start = runs
        .iter()
        .flatten()
        .map(|r| r.start_energy)
        .fold(f64::INFINITY, f64::min);
    debug_assert!(best.energy <= min_start + 1e-9 * (1.0 + min_start.abs()));
    certify(ctx, best, best_start, runs.iter().flatten().count(), opts)
}

fn certify(
    ctx: &EnergyContext,
    run: &RunResult,
    best_start: usize,
    restarts_used: usize,
    opts: &SolveOpts,
) -> Result<GroundState> {
    let state = run.state.clone();
    let energy = ctx.j_eval(&state)?;
    let residual = ctx.residual(&state)?;
    let kkt_residual = residual.max_abs / (1.0 + state.sup_norm());
    let (nu, nv) = ctx.norm_pows(&state);
    let nehari_residual = ctx.nehari_k(&state)?.abs() / (nu + nv).max(1.0);
    let k_prime_pairing = ctx.k_prime_pairing(&state)?;
    let norm = ctx.pair_norm(&state);
    let bounds = compute_bounds(ctx, energy)?;
    let certified = nehari_residual <= opts.tol_k
        && kkt_residual <= opts.tol_res
        && k_prime_pairing < 0.0
        && !state.is_zero();
    let gs = GroundState {
        state,
        energy,
        lambda: ctx.lambda(),
        nehari_residual,
        kkt_residual,
        residual_max_abs: residual.max_abs,
        k_prime_pairing,
        norm,
        bounds,
        restarts_used,
        best_start,
        iterations: run.iterations,
        seed: opts.seed,
        certified,
        trace: run.trace.clone(),
    };
    if !certified {
        return Err(Error::NoDescent { best: Box::new(gs) });
    }
    if !gs.within_sandwich() {
        let reason = format!(
            "norm {} outside [{}, {}]",
            gs.norm, gs.bounds.xi, gs.bounds.upper_l
        );
        return Err(Error::BoundViolation {
            reason,
            state: Box::new(gs),
        });
    }
    Ok(gs)
}

/// The default start list: `opts.warm_starts`, then the well indicators,
/// then `opts.restarts` seeded random directions.
pub fn default_starts(ctx: &EnergyContext, opts: &SolveOpts) -> Vec<PairState> {
    let mut starts: Vec<PairState> = opts.warm_starts.iter().map(|s| ctx.restrict(s)).collect();
    starts.extend(well_indicator_starts(ctx).iter().map(|s| ctx.restrict(s)));
    starts.extend(
        (0..opts.restarts).map(|i| random_direction(ctx, opts.seed.wrapping_add(i as u64))),
    );
    starts
}

/// Ground state of the functional in `ctx`.
pub fn solve_ground_state(ctx: &EnergyContext, opts: &SolveOpts) -> Result<GroundState> {
    solve_from_starts(ctx, &default_starts(ctx, opts), opts)
}
