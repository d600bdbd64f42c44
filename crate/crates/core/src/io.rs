//! Delimited-text caches: planar points (`ship_id,x_km,y_km`) and center
//! sets (`k,x_km,y_km`), plus the small JSON sidecar that remembers the
//! projection origin of a point cache.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{CenterSet, Coord};
use crate::error::{Error, Result};
use crate::geo::{PlanarPoint, ProjectionOrigin};

#[derive(Debug, Serialize, Deserialize)]
struct PointRow {
    ship_id: String,
    x_km: f64,
    y_km: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CenterRow {
    k: usize,
    x_km: f64,
    y_km: f64,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_points<W: Write>(out: W, points: &[PlanarPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(PointRow {
            ship_id: p.ship_id.clone(),
            x_km: p.x,
            y_km: p.y,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a planar point cache. Unlike AIS input every row must parse.
pub fn read_points<R: Read>(input: R) -> Result<Vec<PlanarPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: PointRow = row?;
        if !(row.x_km.is_finite() && row.y_km.is_finite()) || row.ship_id.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "invalid planar point for ship `{}`",
                row.ship_id
            )));
        }
        out.push(PlanarPoint {
            x: row.x_km,
            y: row.y_km,
            ship_id: row.ship_id,
        });
    }
    Ok(out)
}

pub fn write_points_path(path: &Path, points: &[PlanarPoint]) -> Result<()> {
    write_points(create(path)?, points)
}

pub fn read_points_path(path: &Path) -> Result<Vec<PlanarPoint>> {
    read_points(std::io::BufReader::new(open(path)?))
}

/// True when the header of `path` names the planar cache columns.
pub fn is_planar_cache(path: &Path) -> Result<bool> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let headers = r.headers()?;
    Ok(["ship_id", "x_km", "y_km"]
        .iter()
        .all(|name| headers.iter().any(|h| h.trim() == *name)))
}

pub fn write_centers<W: Write>(out: W, centers: &CenterSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (k, c) in centers.iter().enumerate() {
        w.serialize(CenterRow {
            k,
            x_km: c.x,
            y_km: c.y,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads `k,x_km,y_km` rows; rows are placed by `k`, which must cover
/// `0..K` exactly once.
pub fn read_centers<R: Read>(input: R) -> Result<CenterSet> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<CenterRow> = r.deserialize().collect::<Result<_, _>>()?;
    rows.sort_by_key(|row| row.k);
    if rows.iter().enumerate().any(|(i, row)| row.k != i) {
        return Err(Error::InvalidPlacement(
            "center indices must be 0..K without gaps".into(),
        ));
    }
    CenterSet::new(rows.into_iter().map(|r| Coord::new(r.x_km, r.y_km)).collect())
        .map_err(|e| Error::InvalidPlacement(e.to_string()))
}

pub fn origin_sidecar(points_path: &Path) -> PathBuf {
    let mut name = points_path.as_os_str().to_owned();
    name.push(".origin.json");
    PathBuf::from(name)
}

pub fn write_origin(points_path: &Path, origin: &ProjectionOrigin) -> Result<()> {
    let path = origin_sidecar(points_path);
    let mut f = create(&path)?;
    serde_json::to_writer_pretty(&mut f, origin)?;
    writeln!(f).map_err(|source| Error::Write { path, source })
}

/// Origin stored next to a point cache, if any.
pub fn read_origin(points_path: &Path) -> Result<Option<ProjectionOrigin>> {
    let path = origin_sidecar(points_path);
    if !path.exists() {
        return Ok(None);
    }
    let origin: ProjectionOrigin = serde_json::from_reader(open(&path)?)?;
    ProjectionOrigin::new(origin.lat0, origin.lon0).map(Some)
}
