//! Lambda sweeps: how full-graph ground states approach the limit problem.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{abs_pow, kahan_sum, w_lambda_pow, ExponentConfig};
use crate::energy::EnergyContext;
use crate::error::{Error, Result};
use crate::graph::{PairState, PotentialPair, WeightedGraph};
use crate::limit::{solve_limit_ground_state, LimitProblem};
use crate::nehari::{solve_ground_state, GroundState, SolveOpts};
use crate::nonlinearity::Nonlinearity;

pub const DEFAULT_LAMBDAS: [f64; 5] = [1.0, 10.0, 1e2, 1e3, 1e4];

/// Graph, potentials, exponents and nonlinearity of one experiment.
#[derive(Clone)]
pub struct Instance {
    pub graph: Arc<WeightedGraph>,
    pub pot: Arc<PotentialPair>,
    pub cfg: ExponentConfig,
    pub nl: Arc<dyn Nonlinearity>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("vertices", &self.graph.len())
            .field("cfg", &self.cfg)
            .field("nl", &self.nl.name())
            .finish()
    }
}

impl Instance {
    pub fn context(&self, lambda: f64) -> Result<EnergyContext> {
        EnergyContext::full(
            self.graph.clone(),
            self.pot.clone(),
            self.cfg,
            self.nl.clone(),
            lambda,
        )
    }

    pub fn limit_problem(&self) -> Result<LimitProblem> {
        LimitProblem::new(
            self.graph.clone(),
            self.pot.clone(),
            self.cfg,
            self.nl.clone(),
        )
    }
}

/// One lambda of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub m_lambda: f64,
    /// `m_Omega - m_lambda`.
    pub gap: f64,
    /// `lambda int a |u|^p`.
    pub penalty_u: f64,
    /// `lambda int b |v|^q`.
    pub penalty_v: f64,
    /// `int_{V \ Omega_a} |u|^p`.
    pub tail_u: f64,
    pub tail_v: f64,
    /// `| ||u||^p_{W^{1,p}} - ||u0||^p_{W^{1,p}} | + | ||v||^q_{W^{1,q}} - ||v0||^q_{W^{1,q}} |`.
    pub sobolev_drift: f64,
    pub kkt_residual: f64,
    /// `int_V |u|^p`, the reference for `tail_u`.
    pub mass_u: f64,
    pub mass_v: f64,
    pub failed: bool,
}

/// All rows plus the limit level and state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub m_omega: f64,
    pub limit_state: PairState,
    pub seed: u64,
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    for &l in lambdas {
        if !(l >= 1.0) || !l.is_finite() {
            return Err(Error::InvalidLambda(l));
        }
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "lambda values must be strictly ascending".into(),
        ));
    }
    Ok(())
}

fn row_for(
    inst: &Instance,
    lambda: f64,
    gs: &GroundState,
    limit: &GroundState,
    failed: bool,
) -> SweepRow {
    let g = &inst.graph;
    let (p, q) = (inst.cfg.p, inst.cfg.q);
    let mu = g.mu();
    let (u, v) = (gs.state.u.values(), gs.state.v.values());
    let wells = crate::graph::wells(g, &inst.pot).ok();
    let in_a = |x: usize| wells.as_ref().map_or(true, |w| w.omega_a.contains(x));
    let in_b = |x: usize| wells.as_ref().map_or(true, |w| w.omega_b.contains(x));
    let n = g.len();
    let penalty_u = lambda * kahan_sum((0..n).map(|x| mu[x] * inst.pot.a[x] * abs_pow(u[x], p)));
    let penalty_v = lambda * kahan_sum((0..n).map(|x| mu[x] * inst.pot.b[x] * abs_pow(v[x], q)));
    let tail_u = kahan_sum(
        (0..n)
            .filter(|&x| !in_a(x))
            .map(|x| mu[x] * abs_pow(u[x], p)),
    );
    let tail_v = kahan_sum(
        (0..n)
            .filter(|&x| !in_b(x))
            .map(|x| mu[x] * abs_pow(v[x], q)),
    );
    let mass_u = kahan_sum((0..n).map(|x| mu[x] * abs_pow(u[x], p)));
    let mass_v = kahan_sum((0..n).map(|x| mu[x] * abs_pow(v[x], q)));
    let zeros = vec![0.0; n];
    let sob = |f: &[f64], e: f64| w_lambda_pow(g, f, e, 0.0, &zeros);
    let drift = (sob(u, p) - sob(limit.state.u.values(), p)).abs()
        + (sob(v, q) - sob(limit.state.v.values(), q)).abs();
    SweepRow {
        lambda,
        m_lambda: gs.energy,
        gap: limit.energy - gs.energy,
        penalty_u,
        penalty_v,
        tail_u,
        tail_v,
        sobolev_drift: drift,
        kkt_residual: gs.kkt_residual,
        mass_u,
        mass_v,
        failed,
    }
}

/// Solves the limit problem once and the full problem at every `lambda`,
/// warm-starting each solve from the previous ground state. Per-lambda
/// solver failures are recorded in the row instead of aborting.
pub fn run_sweep(inst: &Instance, lambdas: &[f64], opts: &SolveOpts) -> Result<SweepResult> {
    check_lambdas(lambdas)?;
    let limit = solve_limit_ground_state(&inst.limit_problem()?, opts)?;
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut previous: Option<PairState> = None;
    for &lambda in lambdas {
        let ctx = inst.context(lambda)?;
        let mut o = opts.clone();
        if let Some(prev) = &previous {
            o.warm_starts.insert(0, prev.clone());
        }
        let row = match solve_ground_state(&ctx, &o) {
            Ok(gs) => {
                previous = Some(gs.state.clone());
                row_for(inst, lambda, &gs, &limit, false)
            }
            Err(Error::NoDescent { best }) | Err(Error::BoundViolation { state: best, .. }) => {
                previous = Some(best.state.clone());
                row_for(inst, lambda, &best, &limit, true)
            }
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(SweepResult {
        rows,
        m_omega: limit.energy,
        limit_state: limit.state,
        seed: opts.seed,
    })
}

/// Thresholds of [`convergence_report`], relative to `m_Omega` (gap and
/// penalties) or to the total mass (tails).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportTol {
    pub gap_rel: f64,
    pub penalty_rel: f64,
    pub tail_rel: f64,
    /// Allowed negative gap from round-off.
    pub gap_floor: f64,
}

impl Default for ReportTol {
    fn default() -> Self {
        ReportTol {
            gap_rel: 0.02,
            penalty_rel: 1e-3,
            tail_rel: 1e-3,
            gap_floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub passed: bool,
    pub threshold: f64,
    pub observed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub metrics: Vec<Metric>,
    pub passed: bool,
}

impl ConvergenceReport {
    pub fn pass_flags(&self) -> BTreeMap<String, bool> {
        self.metrics
            .iter()
            .map(|m| (m.name.clone(), m.passed))
            .collect()
    }
}

/// Checks `m_lambda <= m_Omega` everywhere and smallness of the gap,
/// penalties and tails at the largest `lambda`.
pub fn convergence_report(sr: &SweepResult, tol: &ReportTol) -> Result<ConvergenceReport> {
    if sr.rows.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "a convergence report needs >= 3 lambda values, got {}",
            sr.rows.len()
        )));
    }
    let last = sr.rows.last().expect("nonempty");
    let m = sr.m_omega;
    let col = |f: fn(&SweepRow) -> f64| sr.rows.iter().map(f).collect::<Vec<_>>();
    let tails: Vec<f64> = sr
        .rows
        .iter()
        .map(|r| {
            let total = r.mass_u + r.mass_v;
            if total > 0.0 {
                (r.tail_u + r.tail_v) / total
            } else {
                0.0
            }
        })
        .collect();
    let floor = -tol.gap_floor * m.abs().max(1.0);
    let metrics = vec![
        Metric {
            name: "gap_nonnegative".into(),
            passed: sr.rows.iter().all(|r| r.gap >= floor),
            threshold: floor,
            observed: col(|r| r.gap),
        },
        Metric {
            name: "gap_at_max_lambda".into(),
            passed: last.gap <= tol.gap_rel * m,
            threshold: tol.gap_rel * m,
            observed: vec![last.gap],
        },
        Metric {
            name: "penalty_u_at_max_lambda".into(),
            passed: last.penalty_u <= tol.penalty_rel * m,
            threshold: tol.penalty_rel * m,
            observed: col(|r| r.penalty_u),
        },
        Metric {
            name: "penalty_v_at_max_lambda".into(),
            passed: last.penalty_v <= tol.penalty_rel * m,
            threshold: tol.penalty_rel * m,
            observed: col(|r| r.penalty_v),
        },
        Metric {
            name: "tail_at_max_lambda".into(),
            passed: *tails.last().expect("nonempty") <= tol.tail_rel,
            threshold: tol.tail_rel,
            observed: tails,
        },
        Metric {
            name: "all_rows_certified".into(),
            passed: sr.rows.iter().all(|r| !r.failed),
            threshold: 0.0,
            observed: col(|r| if r.failed { 1.0 } else { 0.0 }),
        },
    ];
    let passed = metrics.iter().all(|m| m.passed);
    Ok(ConvergenceReport { metrics, passed })
}

/// Writes one CSV row per lambda.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// `lambda,gap` pairs for plotting.
pub fn write_gap_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct GapRow {
        lambda: f64,
        gap: f64,
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(GapRow {
            lambda: r.lambda,
            gap: r.gap,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// `{m_omega, seed, pass_flags, passed}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub m_omega: f64,
    pub seed: u64,
    pub pass_flags: BTreeMap<String, bool>,
    pub passed: bool,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
