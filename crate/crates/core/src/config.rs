//! Experiment files and the `validate`, `solve` and `sweep` commands.
//!
//! An experiment is a JSON file naming a graph file (relative to the
//! experiment file), the exponents, the nonlinearity, solver settings and
//! the lambda values to sweep. `schemas/` documents every file format.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::ExponentConfig;
use crate::energy::EnergyContext;
use crate::error::{Error, Result};
use crate::graph::{validate_graph, wells, GraphFile, PairState, ValidationReport, WeightedGraph};
use crate::nehari::{
    compute_bounds, project_state, solve_ground_state, well_indicator_starts, BoundsReport,
    GroundState, SolveOpts,
};
use crate::nonlinearity::{
    a1_evaluations, check_envelopes, check_f2, check_f3, check_f4, CheckReport, GrowthEnvelope,
    ModelCoupling, Nonlinearity, PurePower, SampleOpts,
};
use crate::sweep::{
    convergence_report, run_sweep, write_gap_csv, write_json, write_sweep_csv, ConvergenceReport,
    Instance, ReportTol, SweepResult, SweepSummary, DEFAULT_LAMBDAS,
};

/// Which coupling term to use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityChoice {
    /// `F = k S (1 - 1/ln(e^2 + S))`, `S = |t|^alpha + |s|^alpha`, with
    /// weights decaying in the distance to `base_vertex`.
    ModelCoupling { base_vertex: String },
    /// `F = c (|t|^k1 / k1 + |s|^k2 / k2)` with a constant envelope.
    PurePower {
        k1: f64,
        k2: f64,
        c: f64,
        c1: f64,
        c2: f64,
    },
}

/// Solver settings; missing fields take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol_k: f64,
    pub tol_res: f64,
    pub seed: u64,
    pub newton_polish: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolveOpts::default();
        SolverSettings {
            restarts: d.restarts,
            max_iters: d.max_iters,
            tol_k: d.tol_k,
            tol_res: d.tol_res,
            seed: d.seed,
            newton_polish: d.newton_polish,
        }
    }
}

impl SolverSettings {
    pub fn opts(&self) -> SolveOpts {
        SolveOpts {
            restarts: self.restarts,
            max_iters: self.max_iters,
            tol_k: self.tol_k,
            tol_res: self.tol_res,
            seed: self.seed,
            newton_polish: self.newton_polish,
            ..SolveOpts::default()
        }
    }
}

/// Contents of an experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Graph file, relative to the experiment file.
    pub graph: PathBuf,
    pub exponents: ExponentConfig,
    pub nonlinearity: NonlinearityChoice,
    /// Bound on the weighted degree; no bound when absent.
    #[serde(default)]
    pub c_deg: Option<f64>,
    /// Potential values at most this large count as zero.
    #[serde(default)]
    pub zero_tol: f64,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Used by `solve` unless overridden; defaults to 1.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Used by `sweep`; defaults to `1, 10, ..., 1e4`.
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub report: Option<ReportTol>,
    /// Output directory, relative to the experiment file.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// A parsed experiment together with the directory it was read from.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, &e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Experiment { config, base_dir })
    }

    pub fn graph_path(&self) -> PathBuf {
        self.base_dir.join(&self.config.graph)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(
            self.config
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out")),
        )
    }

    /// Validates exponents, graph, wells and envelope, in that order, and
    /// assembles the instance.
    pub fn instance(&self) -> Result<Instance> {
        let cfg = self.config.exponents;
        cfg.validate()?;
        let c_deg = self.config.c_deg.unwrap_or(f64::INFINITY);
        let (g, pot) =
            GraphFile::read(&self.graph_path())?.into_instance(c_deg, self.config.zero_tol)?;
        wells(&g, &pot)?;
        let nl = build_nonlinearity(&self.config.nonlinearity, &g, &cfg)?;
        nl.envelope().validate(&cfg)?;
        Ok(Instance {
            graph: Arc::new(g),
            pot: Arc::new(pot),
            cfg,
            nl,
        })
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.config
            .lambdas
            .clone()
            .unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec())
    }
}

pub fn build_nonlinearity(
    choice: &NonlinearityChoice,
    g: &WeightedGraph,
    cfg: &ExponentConfig,
) -> Result<Arc<dyn Nonlinearity>> {
    Ok(match choice {
        NonlinearityChoice::ModelCoupling { base_vertex } => {
            let base = g.index_of(base_vertex)?;
            Arc::new(ModelCoupling::for_config(g, base, cfg)?)
        }
        NonlinearityChoice::PurePower { k1, k2, c, c1, c2 } => Arc::new(PurePower::new(
            *k1,
            *k2,
            *c,
            GrowthEnvelope::constant(g.len(), *c1, *c2),
        )),
    })
}

/// Everything `validate` checks.
#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub graph: ValidationReport,
    pub vertices: usize,
    pub well_sizes: [usize; 3],
    /// Direct and hypothesis evaluations of the exponent compatibility test.
    pub a1: (bool, bool),
    pub checks: Vec<CheckReport>,
    /// Bounds at `lambda = 1` with the level of the projected well indicator.
    pub bounds: Option<BoundsReport>,
    pub passed: bool,
}

impl ValidateReport {
    pub fn render(&self) -> String {
        let mark = |b: bool| if b { "PASS" } else { "FAIL" };
        let mut out = String::new();
        out.push_str(&format!(
            "graph: {} vertices, mu_min {:.6e}, max weighted degree {:.6e}: {}\n",
            self.vertices,
            self.graph.mu_min,
            self.graph.max_weighted_degree,
            mark(self.graph.passed())
        ));
        for v in &self.graph.violations {
            out.push_str(&format!("  violation: {v}\n"));
        }
        out.push_str(&format!(
            "wells: |Omega_a| = {}, |Omega_b| = {}, |Omega_a ∩ Omega_b| = {}\n",
            self.well_sizes[0], self.well_sizes[1], self.well_sizes[2]
        ));
        out.push_str(&format!(
            "A1: direct {}, hypothesis {}\n",
            self.a1.0, self.a1.1
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{}: {} ({} samples, max violation {:.3e})\n",
                c.name,
                mark(c.passed),
                c.samples,
                c.max_violation
            ));
        }
        if let Some(b) = &self.bounds {
            out.push_str(&format!(
                "bounds: eta {:.6e}, xi {:.6e}, L {:.6e} (m_ref {:.6e})\n",
                b.eta, b.xi, b.upper_l, b.m_ref
            ));
        }
        out.push_str(&format!("overall: {}\n", mark(self.passed)));
        out
    }
}

/// Runs every hypothesis check on an experiment.
pub fn cmd_validate(exp: &Experiment) -> Result<ValidateReport> {
    let inst = exp.instance()?;
    let g = &inst.graph;
    let cfg = &inst.cfg;
    let report = validate_graph(g, exp.config.c_deg.unwrap_or(f64::INFINITY));
    let w = wells(g, &inst.pot)?;
    let opts = SampleOpts::default();
    let env = inst.nl.envelope();
    let checks = vec![
        check_f2(inst.nl.as_ref(), cfg, g.len(), &opts),
        check_f3(inst.nl.as_ref(), cfg, env, g.len(), &opts),
        check_f4(inst.nl.as_ref(), cfg, g.len(), &opts),
        check_envelopes(inst.nl.as_ref(), cfg, env, g.len(), &opts),
    ];
    let ctx = inst.context(1.0)?;
    let m_ref = well_indicator_starts(&ctx)
        .iter()
        .filter_map(|d| project_state(&ctx, d).ok())
        .filter_map(|(s, _)| ctx.j_eval(&s).ok())
        .fold(f64::INFINITY, f64::min);
    let bounds = if m_ref.is_finite() {
        Some(compute_bounds(&ctx, m_ref)?)
    } else {
        None
    };
    let a1 = a1_evaluations(cfg.p, cfg.q);
    let passed = report.passed() && a1.0 && a1.1 && checks.iter().all(|c| c.passed);
    Ok(ValidateReport {
        graph: report,
        vertices: g.len(),
        well_sizes: [w.omega_a.len(), w.omega_b.len(), w.both.len()],
        a1,
        checks,
        bounds,
        passed,
    })
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub force: bool,
}

fn prepare_output(dir: &Path, files: &[&str], force: bool) -> Result<()> {
    if !force {
        for f in files {
            let p = dir.join(f);
            if p.exists() {
                return Err(Error::OutputExists(p));
            }
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VertexValues {
    pub id: String,
    pub u: f64,
    pub v: f64,
}

/// Contents of `ground_state.json`.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateFile<'a> {
    pub lambda: f64,
    pub seed: u64,
    pub energy: f64,
    pub certified: bool,
    pub nehari_residual: f64,
    pub kkt_residual: f64,
    pub k_prime_pairing: f64,
    pub norm: f64,
    pub within_sandwich: bool,
    pub bounds: &'a BoundsReport,
    pub vertices: Vec<VertexValues>,
}

pub fn vertex_values(g: &WeightedGraph, state: &PairState) -> Vec<VertexValues> {
    (0..g.len())
        .map(|x| VertexValues {
            id: g.id(x).to_string(),
            u: state.u[x],
            v: state.v[x],
        })
        .collect()
}

pub const GROUND_STATE_FILES: [&str; 2] = ["ground_state.json", "summary.txt"];
pub const SWEEP_FILES: [&str; 4] = ["sweep.csv", "gap.csv", "summary.json", "limit_state.json"];

fn write_ground_state(g: &WeightedGraph, gs: &GroundState, lambda: f64, dir: &Path) -> Result<()> {
    let file = GroundStateFile {
        lambda,
        seed: gs.seed,
        energy: gs.energy,
        certified: gs.certified,
        nehari_residual: gs.nehari_residual,
        kkt_residual: gs.kkt_residual,
        k_prime_pairing: gs.k_prime_pairing,
        norm: gs.norm,
        within_sandwich: gs.within_sandwich(),
        bounds: &gs.bounds,
        vertices: vertex_values(g, &gs.state),
    };
    write_json(&file, &dir.join(GROUND_STATE_FILES[0]))?;
    let summary = format!(
        "lambda {lambda}\nseed {}\nm_lambda {:.12e}\ncertified {}\n|k| (scaled) {:.3e}\nkkt residual {:.3e}\nk' pairing {:.6e}\nnorm {:.6e} in [xi, L] = [{:.6e}, {:.6e}]\neta {:.6e}\n",
        gs.seed,
        gs.energy,
        gs.certified,
        gs.nehari_residual,
        gs.kkt_residual,
        gs.k_prime_pairing,
        gs.norm,
        gs.bounds.xi,
        gs.bounds.upper_l,
        gs.bounds.eta,
    );
    let p = dir.join(GROUND_STATE_FILES[1]);
    fs::write(&p, summary).map_err(|e| Error::io(&p, e))
}

/// Solves for the ground state at one lambda and writes `ground_state.json`
/// and `summary.txt`. A stalled solve still writes its best state before
/// the error is returned.
pub fn cmd_solve(exp: &Experiment, ov: &RunOverrides) -> Result<(GroundState, PathBuf)> {
    let lambda = ov.lambda.or(exp.config.lambda).unwrap_or(1.0);
    if !(lambda >= 1.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    let inst = exp.instance()?;
    let dir = ov.out.clone().unwrap_or_else(|| exp.output_dir());
    prepare_output(&dir, &GROUND_STATE_FILES, ov.force)?;
    let mut opts = exp.config.solver.opts();
    if let Some(s) = ov.seed {
        opts.seed = s;
    }
    let ctx: EnergyContext = inst.context(lambda)?;
    match solve_ground_state(&ctx, &opts) {
        Ok(gs) => {
            write_ground_state(&inst.graph, &gs, lambda, &dir)?;
            Ok((gs, dir))
        }
        Err(Error::NoDescent { best }) => {
            write_ground_state(&inst.graph, &best, lambda, &dir)?;
            Err(Error::NoDescent { best })
        }
        Err(Error::BoundViolation { reason, state }) => {
            write_ground_state(&inst.graph, &state, lambda, &dir)?;
            Err(Error::BoundViolation { reason, state })
        }
        Err(e) => Err(e),
    }
}

/// Runs a sweep and writes `sweep.csv`, `gap.csv`, `summary.json` and
/// `limit_state.json`.
pub fn cmd_sweep(
    exp: &Experiment,
    ov: &RunOverrides,
) -> Result<(SweepResult, ConvergenceReport, PathBuf)> {
    let inst = exp.instance()?;
    let lambdas = exp.lambdas();
    let dir = ov.out.clone().unwrap_or_else(|| exp.output_dir());
    prepare_output(&dir, &SWEEP_FILES, ov.force)?;
    let mut opts = exp.config.solver.opts();
    if let Some(s) = ov.seed {
        opts.seed = s;
    }
    let sr = run_sweep(&inst, &lambdas, &opts)?;
    let report = convergence_report(&sr, &exp.config.report.unwrap_or_default())?;
    write_sweep_csv(&sr.rows, &dir.join(SWEEP_FILES[0]))?;
    write_gap_csv(&sr.rows, &dir.join(SWEEP_FILES[1]))?;
    let summary = SweepSummary {
        m_omega: sr.m_omega,
        seed: sr.seed,
        pass_flags: report.pass_flags(),
        passed: report.passed,
    };
    write_json(&summary, &dir.join(SWEEP_FILES[2]))?;
    write_json(
        &vertex_values(&inst.graph, &sr.limit_state),
        &dir.join(SWEEP_FILES[3]),
    )?;
    Ok((sr, report, dir))
}
