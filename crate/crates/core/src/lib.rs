//! Pilot clustering for asymmetric cellular massive-MIMO networks.
//!
//! Cells own a few unique pilot sequences and may pool them inside
//! coalitions. Pooling lets every member schedule more users but exposes
//! them to pilot contamination from each other. This crate evaluates the
//! per-cell average spectral efficiency of any coalition structure in
//! closed form, runs the budgeted coalition-formation dynamics that reach an
//! individually stable structure, and provides exhaustive search and
//! Monte-Carlo oracles for validation.
//!
//! Module map:
//!
//! * [`geometry`]: random deployments on a wrap-around square, torus metric,
//!   pathloss, Voronoi cell association and uniform user sampling.
//! * [`propagation`]: Monte-Carlo estimates of the first and second moments
//!   of the channel-variance ratios between cells.
//! * [`spectral`]: closed-form interference terms and utilities for MRC and
//!   ZFC, plus the per-position SINR oracle.
//! * [`game`]: coalition structures, deviations, admissibility, the
//!   formation dynamics, stability certification and exhaustive search.
//! * [`harness`]: seeded experiment sweeps, CSV records and aggregation.

pub mod error;
pub mod game;
pub mod geometry;
pub mod harness;
pub mod propagation;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use game::{
    enumerate_partitions, exhaustive_optimum, restricted_utility, CoalitionStructure, Deviation,
    FormationTrace, Game, Objective, Target,
};
pub use geometry::{Deployment, Point};
pub use propagation::{estimate_propagation, PropagationTable};
pub use spectral::{cell_utility, interference, oracle_se, OracleEstimate, Scheme, SystemParams};
