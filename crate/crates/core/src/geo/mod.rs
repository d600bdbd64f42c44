//! AIS ingestion: table parsing, region filtering and the local planar
//! projection used by the clustering code.

mod ais;
mod projection;
mod region;

pub use ais::{parse_ais_file, read_ais_path, FormatConfig, ParsedAis, RawAisRecord};
pub use projection::{
    project, project_coord, unproject, PlanarPoint, ProjectionOrigin, EARTH_RADIUS_KM,
};
pub use region::{filter_region, RegionPolygon};
