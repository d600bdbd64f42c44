use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use geojson::{Feature, FeatureCollection, GeoJson, Geometry, JsonObject, Value};
use serde::{Deserialize, Serialize};

use super::{ExperimentReport, Stat};
use crate::cluster::{CenterSet, Coord};
use crate::error::{Error, Result};
use crate::geo::{project_coord, unproject, ProjectionOrigin};

pub const TABLE_FILE: &str = "report.txt";
pub const STRUCTURED_FILE: &str = "report.json";
pub const PLACEMENTS_FILE: &str = "placements.geojson";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// Plain-text summary table.
    Table,
    /// JSON with the config, the summary and every trial row.
    Structured,
    /// GeoJSON points of every final placement.
    Geo,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "structured" => Ok(OutputFormat::Structured),
            "geo" => Ok(OutputFormat::Geo),
            _ => Err(Error::InvalidParameter(format!(
                "unknown format `{s}` (expected table, structured or geo)"
            ))),
        }
    }
}

fn cell(s: Stat, decimals: usize) -> String {
    format!("{:.*} ± {:.*}", decimals, s.mean, decimals, s.std)
}

/// Summary table: one row per algorithm, mean ± std per column.
pub fn render_table(report: &ExperimentReport) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# K={} p={} r={} km trials={} seed={} init={}",
        cfg.k,
        cfg.p,
        cfg.radius_km,
        cfg.trials,
        cfg.seed,
        match cfg.init {
            super::InitMethod::KmeansPlusPlus => "kmeans++",
            super::InitMethod::Uniform => "uniform",
        }
    );
    let _ = writeln!(
        out,
        "# dataset: {} ({} points, {} ships)",
        report.dataset.source, report.dataset.points, report.dataset.ships
    );
    let _ = writeln!(out, "# values: mean ± {} over trials", report.std_convention);
    let _ = writeln!(
        out,
        "{:<26} {:>16} {:>18} {:>18} {:>16}",
        "algorithm", "iterations", "runtime_s", "rmsd_km", "p_d"
    );
    for s in &report.summary {
        let _ = writeln!(
            out,
            "{:<26} {:>16} {:>18} {:>18} {:>16}",
            s.algorithm.name(),
            cell(s.iterations, 1),
            cell(s.runtime_s, 3),
            cell(s.rmsd_km, 2),
            cell(s.p_d, 3)
        );
    }
    out
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn placements_geojson(report: &ExperimentReport, origin: &ProjectionOrigin) -> Result<String> {
    let mut features = Vec::new();
    for row in &report.trials {
        for (k, c) in row.final_centers.iter().enumerate() {
            let (lat, lon) = unproject(*c, origin)?;
            let mut props = JsonObject::new();
            props.insert("algorithm".into(), row.algorithm.name().into());
            props.insert("trial".into(), row.trial.into());
            props.insert("k".into(), k.into());
            props.insert("x_km".into(), c.x.into());
            props.insert("y_km".into(), c.y.into());
            features.push(Feature {
                bbox: None,
                geometry: Some(Geometry::new(Value::Point(vec![lon, lat]))),
                id: None,
                properties: Some(props),
                foreign_members: None,
            });
        }
    }
    let mut foreign = JsonObject::new();
    foreign.insert("origin".into(), serde_json::to_value(origin)?);
    let fc = FeatureCollection {
        bbox: None,
        features,
        foreign_members: Some(foreign),
    };
    Ok(GeoJson::from(fc).to_string())
}

/// Writes the requested formats into `dir` (created if needed) and returns
/// the written paths. Placements of planar data without a known origin are
/// anchored at (0, 0).
pub fn emit_report(
    report: &ExperimentReport,
    formats: &[OutputFormat],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for format in formats {
        let (name, body) = match format {
            OutputFormat::Table => (TABLE_FILE, render_table(report)),
            OutputFormat::Structured => {
                let mut s = serde_json::to_string_pretty(report)?;
                s.push('\n');
                (STRUCTURED_FILE, s)
            }
            OutputFormat::Geo => {
                let origin = report.dataset.origin.unwrap_or(ProjectionOrigin {
                    lat0: 0.0,
                    lon0: 0.0,
                });
                (PLACEMENTS_FILE, placements_geojson(report, &origin)?)
            }
        };
        let path = dir.join(name);
        if !written.contains(&path) {
            write_file(&path, body.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Centers of one algorithm in one trial, back in planar km.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub algorithm: String,
    pub trial: usize,
    pub centers: CenterSet,
}

/// Parses a placement file written by [`emit_report`] (or any GeoJSON point
/// collection with `k` properties). Points are re-projected with `origin`,
/// falling back to the `origin` member stored in the file.
pub fn read_placements(text: &str, origin: Option<ProjectionOrigin>) -> Result<Vec<Placement>> {
    let bad = |msg: String| Error::InvalidPlacement(msg);
    let fc = match text.parse::<GeoJson>().map_err(|e| bad(e.to_string()))? {
        GeoJson::FeatureCollection(fc) => fc,
        _ => return Err(bad("expected a FeatureCollection".into())),
    };
    let origin = match origin {
        Some(o) => o,
        None => {
            let stored = fc
                .foreign_members
                .as_ref()
                .and_then(|m| m.get("origin"))
                .ok_or_else(|| bad("no projection origin given or stored".into()))?;
            serde_json::from_value(stored.clone())?
        }
    };

    let mut groups: BTreeMap<(usize, String), Vec<(usize, Coord)>> = BTreeMap::new();
    let mut order: Vec<(usize, String)> = Vec::new();
    for f in &fc.features {
        let (lon, lat) = match f.geometry.as_ref().map(|g| &g.value) {
            Some(Value::Point(pos)) if pos.len() >= 2 => (pos[0], pos[1]),
            _ => return Err(bad("every feature must be a point".into())),
        };
        let prop = |key: &str| f.properties.as_ref().and_then(|p| p.get(key));
        let k = prop("k")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| bad("feature without integer `k`".into()))? as usize;
        let algorithm = prop("algorithm")
            .and_then(|v| v.as_str())
            .unwrap_or("placement")
            .to_string();
        let trial = prop("trial").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
        let key = (trial, algorithm);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups
            .entry(key)
            .or_default()
            .push((k, project_coord(lat, lon, &origin)));
    }

    order
        .into_iter()
        .map(|key| {
            let mut centers = groups.remove(&key).unwrap_or_default();
            centers.sort_by_key(|(k, _)| *k);
            if centers.iter().enumerate().any(|(i, (k, _))| *k != i) {
                return Err(bad(format!(
                    "{} trial {}: center indices must be 0..K without gaps",
                    key.1, key.0
                )));
            }
            Ok(Placement {
                algorithm: key.1,
                trial: key.0,
                centers: CenterSet::new(centers.into_iter().map(|(_, c)| c).collect())?,
            })
        })
        .collect()
}
