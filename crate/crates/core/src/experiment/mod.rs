//! Repeated-trial comparison of the five algorithms.
//!
//! Every trial draws one initial center set and runs each selected algorithm
//! from it, so differences between algorithms are not initialisation noise.

mod report;
pub mod seed;
mod synth;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{
    self, distinct_count, CenterSet, Coord, DropoutParams, RunResult, DEFAULT_INNER_ITERS,
    DEFAULT_MAX_ITERS, DEFAULT_WEISZFELD_TOL, STOCHASTIC_MAX_ITERS,
};
use crate::error::{Error, Result};
use crate::geo::{self, FormatConfig, PlanarPoint, ProjectionOrigin, RegionPolygon};
use crate::io;
use crate::metrics::{self, ShipGrouping};

pub use report::{
    emit_report, read_placements, render_table, OutputFormat, Placement, PLACEMENTS_FILE,
    STRUCTURED_FILE, TABLE_FILE,
};
pub use seed::trial_seed;
pub use synth::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    ClassicKmeans,
    DropoutKmeans,
    StochasticDropoutKmeans,
    ClassicKmedian,
    DropoutKmedian,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::ClassicKmeans,
        Algorithm::DropoutKmeans,
        Algorithm::StochasticDropoutKmeans,
        Algorithm::ClassicKmedian,
        Algorithm::DropoutKmedian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ClassicKmeans => "classic-kmeans",
            Algorithm::DropoutKmeans => "dropout-kmeans",
            Algorithm::StochasticDropoutKmeans => "stochastic-dropout-kmeans",
            Algorithm::ClassicKmedian => "classic-kmedian",
            Algorithm::DropoutKmedian => "dropout-kmedian",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm `{s}` (expected one of {})",
                    Algorithm::ALL.map(Algorithm::name).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitMethod {
    #[serde(rename = "kmeans++")]
    KmeansPlusPlus,
    #[serde(rename = "uniform")]
    Uniform,
}

impl FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans++" => Ok(InitMethod::KmeansPlusPlus),
            "uniform" => Ok(InitMethod::Uniform),
            _ => Err(Error::InvalidParameter(format!(
                "unknown init `{s}` (expected kmeans++ or uniform)"
            ))),
        }
    }
}

/// Everything `run` needs. Keys mirror the command-line flags so the same
/// names work in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    /// AIS table or planar point cache; the bundled fixture when absent.
    pub input: Option<PathBuf>,
    /// GeoJSON region polygon applied to AIS input.
    pub region: Option<PathBuf>,
    /// `[min_lat, min_lon, max_lat, max_lon]`, used when no polygon is given.
    pub bbox: Option<[f64; 4]>,
    /// `[lat0, lon0]`; defaults to the data centroid for AIS input.
    pub origin: Option<[f64; 2]>,
    pub columns: FormatConfig,
    pub k: usize,
    pub p: f64,
    pub radius_km: f64,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub init: InitMethod,
    pub max_iters: usize,
    pub stochastic_max_iters: usize,
    pub inner_iters: usize,
    pub weiszfeld_tol: f64,
    pub out: PathBuf,
    pub format: Vec<OutputFormat>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            input: None,
            region: None,
            bbox: None,
            origin: None,
            columns: FormatConfig::default(),
            k: 5,
            p: 0.3,
            radius_km: 10.0,
            trials: 30,
            seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            init: InitMethod::KmeansPlusPlus,
            max_iters: DEFAULT_MAX_ITERS,
            stochastic_max_iters: STOCHASTIC_MAX_ITERS,
            inner_iters: DEFAULT_INNER_ITERS,
            weiszfeld_tol: DEFAULT_WEISZFELD_TOL,
            out: PathBuf::from("results"),
            format: vec![OutputFormat::Table, OutputFormat::Structured, OutputFormat::Geo],
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<DropoutParams> {
        DropoutParams::new(self.p, self.k, self.radius_km)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms selected".into()));
        }
        if !(self.weiszfeld_tol >= 0.0) {
            return Err(Error::InvalidParameter("weiszfeld-tol must be non-negative".into()));
        }
        if let Some([lat0, lon0]) = self.origin {
            ProjectionOrigin::new(lat0, lon0)?;
        }
        Ok(())
    }

    pub fn projection_origin(&self) -> Result<Option<ProjectionOrigin>> {
        self.origin
            .map(|[lat0, lon0]| ProjectionOrigin::new(lat0, lon0))
            .transpose()
    }
}

/// Parameters of the bundled synthetic dataset.
///
/// Three broad blobs (60 km spread against a 10 km detection radius) with
/// twenty ships per blob, each ship holding twenty scattered points.
pub fn fixture_spec() -> SyntheticSpec {
    SyntheticSpec {
        blobs: 3,
        points_per_blob: 400,
        spread_km: 60.0,
        ships_per_blob: 20,
        extent_km: 300.0,
        seed: 20190710,
    }
}

/// Points ready for clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<PlanarPoint>,
    pub origin: Option<ProjectionOrigin>,
    /// Malformed AIS rows dropped during parsing.
    pub skipped_rows: usize,
    /// Human-readable description of where the points came from.
    pub source: String,
}

impl Dataset {
    pub fn fixture() -> Self {
        Dataset {
            points: generate_synthetic(&fixture_spec()),
            origin: None,
            skipped_rows: 0,
            source: "bundled synthetic fixture".into(),
        }
    }

    pub fn coords(&self) -> Vec<Coord> {
        self.points.iter().map(PlanarPoint::coord).collect()
    }

    pub fn ships(&self) -> ShipGrouping {
        let ids: Vec<&str> = self.points.iter().map(|p| p.ship_id.as_str()).collect();
        ShipGrouping::from_ids(&ids)
    }
}

/// Reads the configured input: the fixture, a planar cache (recognised by
/// its header) or an AIS table that is region-filtered and projected.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let Some(path) = &config.input else {
        return Ok(Dataset::fixture());
    };
    let origin = config.projection_origin()?;
    if io::is_planar_cache(path)? {
        let points = io::read_points_path(path)?;
        let origin = match origin {
            Some(o) => Some(o),
            None => io::read_origin(path)?,
        };
        return Ok(Dataset {
            points,
            origin,
            skipped_rows: 0,
            source: path.display().to_string(),
        });
    }
    ingest(config, path, origin)
}

fn ingest(
    config: &ExperimentConfig,
    path: &std::path::Path,
    origin: Option<ProjectionOrigin>,
) -> Result<Dataset> {
    let parsed = geo::read_ais_path(path, &config.columns)?;
    let region = match (&config.region, config.bbox) {
        (Some(region), _) => Some(RegionPolygon::read_geojson(region)?),
        (None, Some([a, b, c, d])) => Some(RegionPolygon::from_bbox(a, b, c, d)?),
        (None, None) => None,
    };
    let records = match &region {
        Some(region) => geo::filter_region(&parsed.records, region),
        None => parsed.records,
    };
    let origin = match origin.or_else(|| ProjectionOrigin::centroid(&records)) {
        Some(o) => o,
        None => return Err(Error::EmptyPoints),
    };
    Ok(Dataset {
        points: geo::project(&records, &origin),
        origin: Some(origin),
        skipped_rows: parsed.skipped,
        source: path.display().to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and sample standard deviation (`n - 1`); the deviation of a
    /// single value is reported as 0.
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, std }
    }
}

/// One algorithm run within one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub trial_seed: u64,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub converged: bool,
    pub runtime_s: f64,
    pub rmsd_km: f64,
    pub p_d: f64,
    pub initial_centers: CenterSet,
    pub final_centers: CenterSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub converged_runs: usize,
    pub iterations: Stat,
    pub runtime_s: Stat,
    pub rmsd_km: Stat,
    pub p_d: Stat,
}

impl AlgorithmSummary {
    pub fn from_rows(algorithm: Algorithm, rows: &[TrialRow]) -> Self {
        let rows: Vec<&TrialRow> = rows.iter().filter(|r| r.algorithm == algorithm).collect();
        let column = |f: fn(&TrialRow) -> f64| Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
        AlgorithmSummary {
            algorithm,
            runs: rows.len(),
            converged_runs: rows.iter().filter(|r| r.converged).count(),
            iterations: column(|r| r.iterations as f64),
            runtime_s: column(|r| r.runtime_s),
            rmsd_km: column(|r| r.rmsd_km),
            p_d: column(|r| r.p_d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub points: usize,
    pub ships: usize,
    pub skipped_rows: usize,
    pub origin: Option<ProjectionOrigin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub std_convention: String,
    pub summary: Vec<AlgorithmSummary>,
    pub trials: Vec<TrialRow>,
}

impl ExperimentReport {
    pub fn summary_for(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summary.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Runs one algorithm from `init`. `trial_seed` feeds the stochastic
/// baseline only.
pub fn run_algorithm(
    algorithm: Algorithm,
    points: &[Coord],
    init: &CenterSet,
    config: &ExperimentConfig,
    trial_seed: u64,
) -> Result<RunResult> {
    match algorithm {
        Algorithm::ClassicKmeans => cluster::run_classic_kmeans(points, init, config.max_iters),
        Algorithm::DropoutKmeans => {
            cluster::run_dropout_kmeans(points, init, config.p, config.max_iters)
        }
        Algorithm::StochasticDropoutKmeans => {
            let mut rng = seed::stream_rng(trial_seed, seed::STOCHASTIC_STREAM);
            cluster::stochastic::run_stochastic_with(
                points,
                init,
                config.p,
                config.radius_km,
                config.stochastic_max_iters,
                &mut rng,
            )
        }
        Algorithm::ClassicKmedian => cluster::run_classic_kmedian(
            points,
            init,
            config.max_iters,
            config.inner_iters,
            config.weiszfeld_tol,
        ),
        Algorithm::DropoutKmedian => cluster::run_dropout_kmedian(
            points,
            init,
            config.p,
            config.max_iters,
            config.inner_iters,
            config.weiszfeld_tol,
        ),
    }
}

/// Initial centers of trial `t`.
pub fn trial_init(config: &ExperimentConfig, points: &[Coord], trial: usize) -> Result<CenterSet> {
    let mut rng = seed::stream_rng(trial_seed(config.seed, trial), seed::INIT_STREAM);
    match config.init {
        InitMethod::KmeansPlusPlus => cluster::init::kmeanspp_with(points, config.k, &mut rng),
        InitMethod::Uniform => cluster::init::uniform_with(points, config.k, &mut rng),
    }
}

pub fn run_experiment(config: &ExperimentConfig, data: &Dataset) -> Result<ExperimentReport> {
    config.validate()?;
    let params = config.params()?;
    let points = data.coords();
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let distinct = distinct_count(&points);
    if distinct < config.k {
        return Err(Error::InsufficientPoints {
            needed: config.k,
            found: distinct,
        });
    }
    let ships = data.ships();

    let mut rows = Vec::with_capacity(config.trials * config.algorithms.len());
    for trial in 0..config.trials {
        let ts = trial_seed(config.seed, trial);
        let init = trial_init(config, &points, trial)?;
        for &algorithm in &config.algorithms {
            let run = run_algorithm(algorithm, &points, &init, config, ts)?;
            let m = metrics::evaluate(&ships, &points, &run.centers, &params)?;
            rows.push(TrialRow {
                trial,
                trial_seed: ts,
                algorithm,
                iterations: run.iterations,
                converged: run.converged,
                runtime_s: run.wall_time,
                rmsd_km: m.rmsd,
                p_d: m.p_d,
                initial_centers: run.initial,
                final_centers: run.centers,
            });
        }
    }

    let summary = config
        .algorithms
        .iter()
        .map(|&a| AlgorithmSummary::from_rows(a, &rows))
        .collect();
    Ok(ExperimentReport {
        config: config.clone(),
        dataset: DatasetInfo {
            source: data.source.clone(),
            points: points.len(),
            ships: ships.len(),
            skipped_rows: data.skipped_rows,
            origin: data.origin,
        },
        std_convention: "sample standard deviation (n - 1)".into(),
        summary,
        trials: rows,
    })
}
