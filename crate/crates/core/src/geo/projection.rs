use serde::{Deserialize, Serialize};

use super::RawAisRecord;
use crate::cluster::Coord;
use crate::error::{Error, Result};

/// Mean Earth radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Observation in local planar kilometres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
    pub ship_id: String,
}

impl PlanarPoint {
    pub fn coord(&self) -> Coord {
        Coord::new(self.x, self.y)
    }
}

/// Tangent point of the equirectangular projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOrigin {
    pub lat0: f64,
    pub lon0: f64,
}

impl ProjectionOrigin {
    pub fn new(lat0: f64, lon0: f64) -> Result<Self> {
        if !(lat0.abs() <= 90.0 && lon0.abs() <= 180.0) {
            return Err(Error::InvalidParameter(format!(
                "projection origin ({lat0}, {lon0}) out of range"
            )));
        }
        Ok(ProjectionOrigin { lat0, lon0 })
    }

    /// Arithmetic mean latitude and longitude, `None` for no records.
    pub fn centroid(records: &[RawAisRecord]) -> Option<Self> {
        if records.is_empty() {
            return None;
        }
        let n = records.len() as f64;
        let lat = records.iter().map(|r| r.lat).sum::<f64>() / n;
        let lon = records.iter().map(|r| r.lon).sum::<f64>() / n;
        Some(ProjectionOrigin {
            lat0: lat,
            lon0: lon,
        })
    }
}

/// `x = R cos(lat0) (lon - lon0)`, `y = R (lat - lat0)`, angles in radians.
pub fn project_coord(lat: f64, lon: f64, origin: &ProjectionOrigin) -> Coord {
    let scale = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
    Coord::new(
        scale * origin.lat0.to_radians().cos() * (lon - origin.lon0),
        scale * (lat - origin.lat0),
    )
}

pub fn project(records: &[RawAisRecord], origin: &ProjectionOrigin) -> Vec<PlanarPoint> {
    records
        .iter()
        .map(|r| {
            let c = project_coord(r.lat, r.lon, origin);
            PlanarPoint {
                x: c.x,
                y: c.y,
                ship_id: r.ship_id.clone(),
            }
        })
        .collect()
}

/// Inverse of [`project_coord`]; returns `(lat, lon)`.
pub fn unproject(point: Coord, origin: &ProjectionOrigin) -> Result<(f64, f64)> {
    let cos_lat0 = origin.lat0.to_radians().cos();
    if cos_lat0.abs() < 1e-12 {
        return Err(Error::PolarOrigin(origin.lat0));
    }
    let scale = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
    Ok((
        origin.lat0 + point.y / scale,
        origin.lon0 + point.x / (scale * cos_lat0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, lat: f64, lon: f64) -> RawAisRecord {
        RawAisRecord {
            ship_id: id.into(),
            lat,
            lon,
            timestamp: None,
        }
    }

    #[test]
    fn origin_maps_to_zero() {
        let o = ProjectionOrigin::new(-1.5, 9.25).unwrap();
        assert_eq!(project_coord(-1.5, 9.25, &o), Coord::new(0.0, 0.0));
        assert_eq!(unproject(Coord::new(0.0, 0.0), &o).unwrap(), (-1.5, 9.25));
    }

    #[test]
    fn one_degree_north() {
        let o = ProjectionOrigin::new(0.0, 9.0).unwrap();
        let c = project_coord(1.0, 9.0, &o);
        // 6371 * pi / 180 = 111.19492664455873
        assert!((c.y - 111.194_926_644_558_73).abs() < 1e-9);
        assert_eq!(c.x, 0.0);
    }

    #[test]
    fn inverse_of_one_degree_east() {
        let o = ProjectionOrigin::new(0.0, 9.0).unwrap();
        let (lat, lon) = unproject(Coord::new(111.19, 0.0), &o).unwrap();
        assert_eq!(lat, 0.0);
        assert!((lon - 10.0).abs() < 1e-4);
    }

    #[test]
    fn polar_origin_cannot_be_inverted() {
        let o = ProjectionOrigin::new(90.0, 0.0).unwrap();
        assert!(matches!(unproject(Coord::new(1.0, 1.0), &o), Err(Error::PolarOrigin(_))));
    }

    #[test]
    fn preserves_order_and_ids() {
        let recs = [rec("a", 0.1, 9.0), rec("b", 0.2, 9.1), rec("a", 0.1, 9.0)];
        let o = ProjectionOrigin::centroid(&recs).unwrap();
        let pts = project(&recs, &o);
        let ids: Vec<_> = pts.iter().map(|p| p.ship_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "a"]);
        assert_eq!(pts[0], pts[2]);
    }

    #[test]
    fn centroid_is_mean() {
        let o = ProjectionOrigin::centroid(&[rec("a", 0.0, 8.0), rec("b", 2.0, 10.0)]).unwrap();
        assert_eq!((o.lat0, o.lon0), (1.0, 9.0));
        assert!(ProjectionOrigin::centroid(&[]).is_none());
        assert!(ProjectionOrigin::new(91.0, 0.0).is_err());
    }
}
