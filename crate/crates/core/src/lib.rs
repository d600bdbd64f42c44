//! Dropout-robust clustering for sensor placement.
//!
//! Sensors (cluster centers) fail independently with probability `p`. The
//! dropout variants of k-means and k-median minimise the expected clustering
//! cost over every failure outcome, which groups into a per-point geometric
//! weighting of the centers ranked by distance. The crate also provides the
//! classic algorithms, a stochastic-dropout baseline, exact detection
//! probability / RMSD metrics, AIS ingestion and an experiment harness.

pub mod cluster;
pub mod error;
pub mod experiment;
pub mod geo;
pub mod io;
pub mod metrics;

pub use cluster::{
    CenterSet, Coord, DropoutParams, RankAssignment, RunResult, SurvivalWeightRow,
};
pub use error::{Error, Result};
pub use geo::{PlanarPoint, ProjectionOrigin, RawAisRecord, RegionPolygon};
pub use metrics::{MetricsResult, ShipGrouping};
