use std::path::Path;

use geojson::{GeoJson, Geometry, Value};

use super::RawAisRecord;
use crate::error::{Error, Result};

/// Simple polygon in geographic degrees. Vertices are `(lat, lon)`; the ring
/// closes implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPolygon {
    vertices: Vec<(f64, f64)>,
}

type Pt = (f64, f64);

// Geometry below works on (lon, lat) = (x, y).
fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn within_box(p: Pt, a: Pt, b: Pt) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn on_segment(p: Pt, a: Pt, b: Pt) -> bool {
    let scale = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1.0);
    cross(a, b, p).abs() <= 1e-12 * scale && within_box(p, a, b)
}

fn segments_intersect(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

impl RegionPolygon {
    /// Validates and builds a polygon from `(lat, lon)` vertices. A repeated
    /// closing vertex is dropped.
    pub fn new(mut vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidRegion(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(&(lat, lon)) = vertices
            .iter()
            .find(|(lat, lon)| !(lat.abs() <= 90.0 && lon.abs() <= 180.0))
        {
            return Err(Error::InvalidRegion(format!(
                "vertex ({lat}, {lon}) out of range"
            )));
        }
        let polygon = RegionPolygon { vertices };
        polygon.check_simple()?;
        Ok(polygon)
    }

    /// Axis-aligned box, inclusive bounds.
    pub fn from_bbox(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self> {
        if !(min_lat < max_lat && min_lon < max_lon) {
            return Err(Error::InvalidRegion(format!(
                "empty bounding box [{min_lat}, {max_lat}] x [{min_lon}, {max_lon}]"
            )));
        }
        Self::new(vec![
            (min_lat, min_lon),
            (min_lat, max_lon),
            (max_lat, max_lon),
            (max_lat, min_lon),
        ])
    }

    /// Parses a GeoJSON document holding exactly one polygon: a bare
    /// geometry, a feature, or a collection with a single polygon feature.
    /// GeoJSON positions are `[lon, lat]`. Interior rings are rejected.
    pub fn from_geojson(text: &str) -> Result<Self> {
        let doc: GeoJson = text
            .parse()
            .map_err(|e| Error::InvalidRegion(format!("not GeoJSON: {e}")))?;
        let mut polygons: Vec<Vec<Vec<Vec<f64>>>> = Vec::new();
        let mut collect = |g: &Geometry| match &g.value {
            Value::Polygon(rings) => polygons.push(rings.clone()),
            Value::MultiPolygon(parts) => polygons.extend(parts.iter().cloned()),
            _ => {}
        };
        match &doc {
            GeoJson::Geometry(g) => collect(g),
            GeoJson::Feature(f) => f.geometry.iter().for_each(&mut collect),
            GeoJson::FeatureCollection(fc) => fc
                .features
                .iter()
                .filter_map(|f| f.geometry.as_ref())
                .for_each(&mut collect),
        }
        let rings = match polygons.len() {
            1 => polygons.pop().unwrap(),
            n => {
                return Err(Error::InvalidRegion(format!(
                    "expected exactly one polygon, found {n}"
                )))
            }
        };
        if rings.len() != 1 {
            return Err(Error::InvalidRegion(
                "polygons with interior rings are not supported".into(),
            ));
        }
        let vertices = rings[0]
            .iter()
            .map(|pos| match pos.as_slice() {
                [lon, lat, ..] => Ok((*lat, *lon)),
                _ => Err(Error::InvalidRegion("position with fewer than 2 values".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vertices)
    }

    pub fn read_geojson(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_geojson(&text)
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Pt, Pt)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let (alat, alon) = self.vertices[i];
            let (blat, blon) = self.vertices[(i + 1) % n];
            ((alon, alat), (blon, blat))
        })
    }

    fn check_simple(&self) -> Result<()> {
        let edges: Vec<_> = self.edges().collect();
        let n = edges.len();
        for (i, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::InvalidRegion(format!("repeated vertex at index {i}")));
            }
            for (j, &(c, d)) in edges.iter().enumerate().skip(i + 1) {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // neighbours share one endpoint; they may not fold back
                    // onto each other
                    let (shared, other_i, other_j) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if cross(shared, other_i, other_j) == 0.0
                        && (on_segment(other_j, shared, other_i) || on_segment(other_i, shared, other_j))
                    {
                        return Err(Error::InvalidRegion(format!(
                            "edges {i} and {j} overlap"
                        )));
                    }
                    continue;
                }
                if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidRegion(format!(
                        "polygon is self-intersecting (edges {i} and {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ray-casting test; points on an edge or vertex count as inside.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        let p = (lon, lat);
        let mut inside = false;
        for (a, b) in self.edges() {
            if on_segment(p, a, b) {
                return true;
            }
            if (a.1 > p.1) != (b.1 > p.1) {
                let x = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
                if p.0 < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Records inside or on the boundary of `region`, in input order.
pub fn filter_region(records: &[RawAisRecord], region: &RegionPolygon) -> Vec<RawAisRecord> {
    records
        .iter()
        .filter(|r| region.contains(r.lat, r.lon))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> RegionPolygon {
        RegionPolygon::from_bbox(-1.0, 8.0, 1.0, 10.0).unwrap()
    }

    fn rec(lat: f64, lon: f64) -> RawAisRecord {
        RawAisRecord {
            ship_id: "s".into(),
            lat,
            lon,
            timestamp: None,
        }
    }

    #[test]
    fn interior_exterior_boundary() {
        let sq = square();
        assert!(sq.contains(0.0, 9.0));
        assert!(!sq.contains(5.0, 9.0));
        assert!(sq.contains(1.0, 9.0));
        assert!(sq.contains(0.3, 8.0));
        assert!(sq.contains(-1.0, 10.0));
        assert!(!sq.contains(1.0 + 1e-9, 9.0));
    }

    #[test]
    fn filter_keeps_order() {
        let recs = vec![rec(0.0, 9.0), rec(5.0, 9.0), rec(1.0, 9.5), rec(-0.5, 8.5)];
        let kept = filter_region(&recs, &square());
        assert_eq!(kept, vec![recs[0].clone(), recs[2].clone(), recs[3].clone()]);
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(RegionPolygon::new(vec![(0.0, 0.0), (1.0, 1.0)]).is_err());
        // bow tie
        assert!(RegionPolygon::new(vec![(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)]).is_err());
        // spike folding back along an edge
        assert!(RegionPolygon::new(vec![(0.0, 0.0), (0.0, 2.0), (0.0, 1.0), (1.0, 1.0)]).is_err());
        assert!(RegionPolygon::new(vec![(0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(RegionPolygon::new(vec![(95.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(RegionPolygon::from_bbox(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn closing_vertex_is_optional() {
        let open = RegionPolygon::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]).unwrap();
        let closed =
            RegionPolygon::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.0, 0.0)]).unwrap();
        assert_eq!(open, closed);
    }

    #[test]
    fn geojson_forms() {
        let ring = "[[8.0,-1.0],[10.0,-1.0],[10.0,1.0],[8.0,1.0],[8.0,-1.0]]";
        let geometry = format!(r#"{{"type":"Polygon","coordinates":[{ring}]}}"#);
        let feature = format!(r#"{{"type":"Feature","properties":{{}},"geometry":{geometry}}}"#);
        let collection = format!(r#"{{"type":"FeatureCollection","features":[{feature}]}}"#);
        for doc in [&geometry, &feature, &collection] {
            let poly = RegionPolygon::from_geojson(doc).unwrap();
            assert_eq!(poly, square());
        }
        let two = format!(r#"{{"type":"FeatureCollection","features":[{feature},{feature}]}}"#);
        assert!(RegionPolygon::from_geojson(&two).is_err());
        let holed = format!(
            r#"{{"type":"Polygon","coordinates":[{ring},[[8.5,-0.5],[9.0,-0.5],[9.0,0.0],[8.5,-0.5]]]}}"#
        );
        assert!(RegionPolygon::from_geojson(&holed).is_err());
        assert!(RegionPolygon::from_geojson("not json").is_err());
    }
}
