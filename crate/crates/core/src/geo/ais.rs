use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One decoded AIS position report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawAisRecord {
    pub ship_id: String,
    pub lat: f64,
    pub lon: f64,
    pub timestamp: Option<String>,
}

/// Which header columns hold the fields of a [`RawAisRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormatConfig {
    pub ship_id: String,
    pub lat: String,
    pub lon: String,
    pub timestamp: Option<String>,
    pub delimiter: u8,
}

impl Default for FormatConfig {
    fn default() -> Self {
        FormatConfig {
            ship_id: "mmsi".into(),
            lat: "lat".into(),
            lon: "lon".into(),
            timestamp: None,
            delimiter: b',',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedAis {
    pub records: Vec<RawAisRecord>,
    /// Rows dropped because a field was missing, unparsable or out of range.
    pub skipped: usize,
}

fn column(headers: &csv::ByteRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| std::str::from_utf8(h).is_ok_and(|h| h.trim() == name))
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn field(row: &csv::ByteRecord, idx: usize) -> Option<&str> {
    row.get(idx)
        .and_then(|f| std::str::from_utf8(f).ok())
        .map(str::trim)
}

fn coordinate(row: &csv::ByteRecord, idx: usize, limit: f64) -> Option<f64> {
    let v: f64 = field(row, idx)?.parse().ok()?;
    (v.is_finite() && v.abs() <= limit).then_some(v)
}

/// Reads a delimited AIS table with a header row. Malformed rows are skipped
/// and counted; a missing mandatory column or an unreadable stream fails.
pub fn parse_ais_file<R: Read>(stream: R, config: &FormatConfig) -> Result<ParsedAis> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(stream);
    let headers = reader.byte_headers()?.clone();
    let id_col = column(&headers, &config.ship_id)?;
    let lat_col = column(&headers, &config.lat)?;
    let lon_col = column(&headers, &config.lon)?;
    let ts_col = config
        .timestamp
        .as_deref()
        .map(|name| column(&headers, name))
        .transpose()?;

    let mut records = Vec::new();
    let mut skipped = 0;
    let mut row = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                skipped += 1;
                continue;
            }
        }
        let ship_id = field(&row, id_col).filter(|s| !s.is_empty());
        let lat = coordinate(&row, lat_col, 90.0);
        let lon = coordinate(&row, lon_col, 180.0);
        match (ship_id, lat, lon) {
            (Some(id), Some(lat), Some(lon)) => records.push(RawAisRecord {
                ship_id: id.to_string(),
                lat,
                lon,
                timestamp: ts_col
                    .and_then(|c| field(&row, c))
                    .filter(|s| !s.is_empty())
                    .map(str::to_string),
            }),
            _ => skipped += 1,
        }
    }
    Ok(ParsedAis { records, skipped })
}

pub fn read_ais_path(path: &Path, config: &FormatConfig) -> Result<ParsedAis> {
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ais_file(std::io::BufReader::new(file), config)
}
