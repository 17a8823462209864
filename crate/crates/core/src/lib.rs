//! Ground states of coupled (p,q)-Laplacian systems with potential wells on
//! locally finite weighted graphs, computed on the Nehari manifold.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: weighted graphs, vertex functions, potentials and wells.
//! * [`calculus`]: gradient forms, the p-Laplacian, norms and embedding constants.
//! * [`nonlinearity`]: the coupling term `F` and checkers for its growth assumptions.
//! * [`energy`]: the functionals `J_lambda` and `J_Omega`, the Nehari functional and residuals.
//! * [`nehari`]: fiber projection, a priori bounds and the ground-state solver.
//! * [`limit`]: the Dirichlet problem on the wells.
//! * [`sweep`]: lambda sweeps and convergence reports.
//! * [`config`]: experiment files and the `validate`, `solve`, `sweep` commands.

pub mod calculus;
pub mod config;
pub mod energy;
pub mod error;
pub mod graph;
pub mod limit;
pub mod nehari;
pub mod nonlinearity;
pub mod sweep;

pub use calculus::ExponentConfig;
pub use energy::{EnergyContext, Mode};
pub use error::{Error, Result};
pub use graph::{PairState, PotentialPair, VertexFunction, VertexSubset, WeightedGraph};
pub use limit::{solve_limit_ground_state, LimitProblem};
pub use nehari::{solve_ground_state, GroundState, SolveOpts};
pub use nonlinearity::{GrowthEnvelope, ModelCoupling, Nonlinearity, PurePower};
pub use sweep::{run_sweep, Instance, SweepResult};
