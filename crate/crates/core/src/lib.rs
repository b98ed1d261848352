//! Escape-rate machinery for random walks on finite vertex-transitive graphs.
//!
//! The crate builds Cayley graphs of explicit finite groups, the simple
//! random-walk kernel on them, and three kinds of escape potentials
//! (second eigenfunctions, heat-flow power sums of Følner seeds, arbitrary
//! mean-zero vectors). From a potential it derives lower bounds on
//! `E[dist(X_0, X_t)^2]`, the normalized equivariant embedding into
//! `l^2(group)`, and its harmonic defect. Seeded Monte Carlo simulation of the
//! walk and of synthetic martingales checks the bounds and the hitting-time,
//! `L^1`-rate and occupation inequalities against simulated data.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | [`GraphSpec`], [`Graph`], BFS distances, left-translation action |
//! | [`kernel`] | [`Kernel`], Dirichlet form, Rayleigh ratio, powers of `P` |
//! | [`spectral`] | second eigenpair by deflated power iteration |
//! | [`potential`] | Følner seeds, heat-flow potentials, [`BoundCurve`] |
//! | [`harmonic`] | [`Embedding`], local energy, harmonic defect |
//! | [`walker`] | walk simulation, [`WalkSummary`], walk inequalities |
//! | [`martingale`] | synthetic martingales and their lemma checks |
//! | [`report`] | [`RunConfig`], [`Report`], pipeline orchestration |

// `!(x > 0.0)` guards are written to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod error;
pub mod graph;
pub mod harmonic;
pub mod kernel;
pub mod martingale;
pub mod potential;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod walker;

pub use check::{NamedCheck, Verdict};
pub use error::{Error, Result};
pub use graph::{bfs_distances, build_graph, translation_action, DistanceField, Family, Graph, GraphSpec};
pub use harmonic::{defect_report, embed, embedded_martingale_check, DefectReport, Embedding, MartingaleCheck};
pub use kernel::{srw_kernel, Kernel};
pub use martingale::{
    simulate_martingale, verify_martingale_lemmas, MartingaleParams, MartingaleSpec, MartingaleSummary, YuvalParams,
};
pub use potential::{
    escape_lower_bound, finite_bound_curve, folner_indicator, heat_flow_potential, nearly_amenable_bound, BoundCurve,
    PotentialResult,
};
pub use report::{conjecture_sweep, run, CheckSelector, PotentialMode, Report, RunConfig};
pub use spectral::{closed_form_eigenpair, second_eigenpair, SpectralResult};
pub use walker::{
    sample_trajectories, simulate, verify_against_bounds, verify_mean_escape, verify_walk_inequalities, BoundReport,
    InequalityParams, Trajectories, WalkConfig, WalkSummary,
};

/// Tool version written into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
