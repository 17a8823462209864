//! The Dirichlet problem on the potential wells and its level `m_Omega`.

use std::sync::Arc;

use crate::calculus::ExponentConfig;
use crate::energy::{EnergyContext, Mode};
use crate::error::Result;
use crate::graph::{PairState, PotentialPair, VertexFunction, WeightedGraph, Wells};
use crate::nehari::{default_starts, project_to_nehari, solve_from_starts, GroundState, SolveOpts};
use crate::nonlinearity::Nonlinearity;

/// Free unknowns up to which the direction grid is scanned.
pub const GRID_SCAN_MAX_FREE: usize = 6;
const GRID_LEVELS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
const GRID_KEEP: usize = 4;

/// The limit problem: `u` lives on `Omega_a`, `v` on `Omega_b`, both vanish
/// on the well boundaries.
#[derive(Debug, Clone)]
pub struct LimitProblem {
    ctx: EnergyContext,
}

impl LimitProblem {
    pub fn new(
        graph: Arc<WeightedGraph>,
        pot: Arc<PotentialPair>,
        cfg: ExponentConfig,
        nl: Arc<dyn Nonlinearity>,
    ) -> Result<Self> {
        Ok(LimitProblem {
            ctx: EnergyContext::limit(graph, pot, cfg, nl)?,
        })
    }

    /// Limit problem sharing the data of any context.
    pub fn from_context(ctx: &EnergyContext) -> Result<Self> {
        Ok(LimitProblem {
            ctx: ctx.with_mode(Mode::LimitWells)?,
        })
    }

    pub fn context(&self) -> &EnergyContext {
        &self.ctx
    }

    pub fn wells(&self) -> &Wells {
        self.ctx.wells().expect("limit context always has wells")
    }

    /// Best projected directions of the grid `{-1, -1/2, 0, 1/2, 1}^n` over
    /// the free unknowns, used as extra starts on small wells.
    pub fn grid_starts(&self) -> Vec<PairState> {
        let ctx = &self.ctx;
        let (fu, fv) = ctx.free_masks();
        let slots: Vec<(bool, usize)> = (0..ctx.n())
            .filter(|&x| fu[x])
            .map(|x| (false, x))
            .chain((0..ctx.n()).filter(|&x| fv[x]).map(|x| (true, x)))
            .collect();
        let m = slots.len();
        if m == 0 || m > GRID_SCAN_MAX_FREE {
            return Vec::new();
        }
        let total = GRID_LEVELS.len().pow(m as u32);
        let mut scored: Vec<(f64, usize, PairState)> = Vec::new();
        for code in 0..total {
            let mut c = code;
            let mut dir = PairState::zeros(ctx.n());
            for &(is_v, x) in &slots {
                let level = GRID_LEVELS[c % GRID_LEVELS.len()];
                c /= GRID_LEVELS.len();
                if is_v {
                    dir.v[x] = level;
                } else {
                    dir.u[x] = level;
                }
            }
            if dir.is_zero() {
                continue;
            }
            if let Ok(fr) = project_to_nehari(ctx, &dir) {
                scored.push((fr.g_at_t0, code, dir));
            }
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored
            .into_iter()
            .take(GRID_KEEP)
            .map(|(_, _, d)| d)
            .collect()
    }
}

/// Ground state of the limit problem. Boundary and exterior values are
/// exactly zero by construction.
pub fn solve_limit_ground_state(lp: &LimitProblem, opts: &SolveOpts) -> Result<GroundState> {
    let mut starts = lp.grid_starts();
    starts.extend(default_starts(lp.context(), opts));
    let gs = solve_from_starts(lp.context(), &starts, opts)?;
    debug_assert!(lp.context().check_state(&gs.state).is_ok());
    Ok(gs)
}

/// The limit state viewed as a state of the full graph (the storage is
/// already full-size with zeros off the wells).
pub fn extend_by_zero(state: &PairState, n: usize) -> PairState {
    let pad = |f: &VertexFunction| {
        let mut v = f.values().to_vec();
        v.resize(n, 0.0);
        VertexFunction::new(v)
    };
    PairState::new(pad(&state.u), pad(&state.v))
}
