use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dropout_cluster::cluster::DropoutParams;
use dropout_cluster::experiment::{
    self, emit_report, generate_synthetic, load_dataset, read_placements, run_experiment,
    render_table, Algorithm, ExperimentConfig, InitMethod, OutputFormat, Placement, SyntheticSpec,
};
use dropout_cluster::geo::{self, FormatConfig, ProjectionOrigin, RegionPolygon};
use dropout_cluster::{io, metrics, Error};

#[derive(Parser)]
#[command(name = "dropout-cluster", version, about = "Dropout-robust sensor placement by clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an AIS table, filter it to a region and cache planar points.
    Ingest(IngestArgs),
    /// Run the algorithm comparison over repeated trials.
    Run(RunArgs),
    /// Generate a synthetic point set.
    Synth(SynthArgs),
    /// Evaluate placements against a dataset.
    Metrics(MetricsArgs),
}

#[derive(Args, Default)]
struct Columns {
    /// Ship identifier column.
    #[arg(long)]
    ship_col: Option<String>,
    /// Latitude column.
    #[arg(long)]
    lat_col: Option<String>,
    /// Longitude column.
    #[arg(long)]
    lon_col: Option<String>,
    /// Optional timestamp column.
    #[arg(long)]
    time_col: Option<String>,
    /// Field delimiter (single byte).
    #[arg(long)]
    delimiter: Option<char>,
}

impl Columns {
    fn apply(&self, mut cfg: FormatConfig) -> Result<FormatConfig, Error> {
        if let Some(v) = &self.ship_col {
            cfg.ship_id = v.clone();
        }
        if let Some(v) = &self.lat_col {
            cfg.lat = v.clone();
        }
        if let Some(v) = &self.lon_col {
            cfg.lon = v.clone();
        }
        if let Some(v) = &self.time_col {
            cfg.timestamp = Some(v.clone());
        }
        if let Some(d) = self.delimiter {
            cfg.delimiter = u8::try_from(d)
                .ok()
                .filter(u8::is_ascii)
                .ok_or_else(|| Error::InvalidParameter(format!("delimiter `{d}` is not ASCII")))?;
        }
        Ok(cfg)
    }
}

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    parse_list::<2>(s)
}

fn parse_bbox(s: &str) -> Result<[f64; 4], String> {
    parse_list::<4>(s)
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_init(s: &str) -> Result<InitMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct IngestArgs {
    /// AIS table with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Planar point cache to write (ship_id,x_km,y_km).
    #[arg(long)]
    out: PathBuf,
    /// GeoJSON file with one region polygon.
    #[arg(long)]
    region: Option<PathBuf>,
    /// Bounding box fallback: MIN_LAT,MIN_LON,MAX_LAT,MAX_LON.
    #[arg(long, value_parser = parse_bbox, conflicts_with = "region")]
    bbox: Option<[f64; 4]>,
    /// Projection origin LAT,LON (default: centroid of the kept points).
    #[arg(long, value_parser = parse_pair)]
    origin: Option<[f64; 2]>,
    #[command(flatten)]
    columns: Columns,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file whose keys mirror these flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// AIS table or planar point cache (default: bundled synthetic fixture).
    #[arg(long)]
    input: Option<PathBuf>,
    /// GeoJSON region polygon for AIS input.
    #[arg(long)]
    region: Option<PathBuf>,
    /// Bounding box fallback: MIN_LAT,MIN_LON,MAX_LAT,MAX_LON.
    #[arg(long, value_parser = parse_bbox)]
    bbox: Option<[f64; 4]>,
    /// Projection origin LAT,LON.
    #[arg(long, value_parser = parse_pair)]
    origin: Option<[f64; 2]>,
    #[command(flatten)]
    columns: Columns,
    /// Number of sensors [default: 5].
    #[arg(long)]
    k: Option<usize>,
    /// Failure probability of each sensor [default: 0.3].
    #[arg(long)]
    p: Option<f64>,
    /// Detection radius in km [default: 10].
    #[arg(long)]
    radius_km: Option<f64>,
    /// Number of trials [default: 30].
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated algorithms [default: all five].
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Option<Vec<Algorithm>>,
    /// Initial centers: kmeans++ or uniform [default: kmeans++].
    #[arg(long, value_parser = parse_init)]
    init: Option<InitMethod>,
    /// Iteration cap of the deterministic algorithms [default: 1000].
    #[arg(long)]
    max_iters: Option<usize>,
    /// Iteration cap of the stochastic baseline [default: 300].
    #[arg(long)]
    stochastic_max_iters: Option<usize>,
    /// Weiszfeld iterations per k-median update [default: 50].
    #[arg(long)]
    inner_iters: Option<usize>,
    /// Weiszfeld movement tolerance in km [default: 1e-6].
    #[arg(long)]
    weiszfeld_tol: Option<f64>,
    /// Output directory [default: results].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, repeatable: table, structured, geo [default: all].
    #[arg(long, value_parser = parse_format)]
    format: Vec<OutputFormat>,
}

#[derive(Args)]
struct SynthArgs {
    /// Planar point cache to write.
    #[arg(long)]
    out: PathBuf,
    /// Write the bundled fixture instead of a custom set.
    #[arg(long)]
    fixture: bool,
    #[arg(long, default_value_t = 3)]
    blobs: usize,
    #[arg(long, default_value_t = 100)]
    points_per_blob: usize,
    /// Per-axis standard deviation of each blob, km.
    #[arg(long, default_value_t = 10.0)]
    spread_km: f64,
    #[arg(long, default_value_t = 10)]
    ships_per_blob: usize,
    /// Side of the square holding the blob centers, km.
    #[arg(long, default_value_t = 200.0)]
    extent_km: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MetricsArgs {
    /// Planar point cache or AIS table.
    #[arg(long)]
    input: PathBuf,
    /// Placement file: GeoJSON points (as written by `run`) or k,x_km,y_km.
    #[arg(long)]
    placement: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 10.0)]
    radius_km: f64,
    /// Projection origin LAT,LON for AIS input and GeoJSON placements.
    #[arg(long, value_parser = parse_pair)]
    origin: Option<[f64; 2]>,
    #[command(flatten)]
    columns: Columns,
}

fn ingest(args: IngestArgs) -> Result<(), Error> {
    let columns = args.columns.apply(FormatConfig::default())?;
    let parsed = geo::read_ais_path(&args.input, &columns)?;
    let region = match (&args.region, args.bbox) {
        (Some(path), _) => Some(RegionPolygon::read_geojson(path)?),
        (None, Some([a, b, c, d])) => Some(RegionPolygon::from_bbox(a, b, c, d)?),
        (None, None) => None,
    };
    let total = parsed.records.len();
    let records = match &region {
        Some(region) => geo::filter_region(&parsed.records, region),
        None => parsed.records,
    };
    let origin = match args.origin {
        Some([lat0, lon0]) => ProjectionOrigin::new(lat0, lon0)?,
        None => ProjectionOrigin::centroid(&records).ok_or(Error::EmptyPoints)?,
    };
    let points = geo::project(&records, &origin);
    io::write_points_path(&args.out, &points)?;
    io::write_origin(&args.out, &origin)?;
    println!(
        "parsed {total} records ({} malformed rows skipped), kept {} in region",
        parsed.skipped,
        points.len()
    );
    println!(
        "origin lat0={} lon0={}; wrote {}",
        origin.lat0,
        origin.lon0,
        args.out.display()
    );
    Ok(())
}

fn run_config(args: RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
                path: path.clone(),
                source,
            })?;
            toml::from_str(&text)
                .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    macro_rules! take {
        ($($field:ident),*) => {$(
            if let Some(v) = args.$field { cfg.$field = v; }
        )*};
    }
    take!(k, p, radius_km, trials, seed, algorithms, init, max_iters, stochastic_max_iters,
          inner_iters, weiszfeld_tol, out);
    if args.input.is_some() {
        cfg.input = args.input;
    }
    if args.region.is_some() {
        cfg.region = args.region;
    }
    if args.bbox.is_some() {
        cfg.bbox = args.bbox;
    }
    if args.origin.is_some() {
        cfg.origin = args.origin;
    }
    if !args.format.is_empty() {
        cfg.format = args.format;
    }
    cfg.columns = args.columns.apply(cfg.columns)?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let cfg = run_config(args)?;
    let data = load_dataset(&cfg)?;
    let report = run_experiment(&cfg, &data)?;
    let written = emit_report(&report, &cfg.format, &cfg.out)?;
    print!("{}", render_table(&report));
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Error> {
    let spec = if args.fixture {
        experiment::fixture_spec()
    } else {
        SyntheticSpec {
            blobs: args.blobs,
            points_per_blob: args.points_per_blob,
            spread_km: args.spread_km,
            ships_per_blob: args.ships_per_blob,
            extent_km: args.extent_km,
            seed: args.seed,
        }
    };
    if !(spec.spread_km >= 0.0 && spec.spread_km.is_finite() && spec.extent_km >= 0.0) {
        return Err(Error::InvalidParameter(
            "spread and extent must be finite and non-negative".into(),
        ));
    }
    let points = generate_synthetic(&spec);
    io::write_points_path(&args.out, &points)?;
    println!("wrote {} points to {}", points.len(), args.out.display());
    Ok(())
}

fn load_placements(path: &Path, origin: Option<ProjectionOrigin>) -> Result<Vec<Placement>, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    if text.trim_start().starts_with('{') {
        read_placements(&text, origin)
    } else {
        Ok(vec![Placement {
            algorithm: "placement".into(),
            trial: 0,
            centers: io::read_centers(text.as_bytes())?,
        }])
    }
}

fn metrics_cmd(args: MetricsArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig {
        input: Some(args.input.clone()),
        origin: args.origin,
        columns: args.columns.apply(FormatConfig::default())?,
        ..ExperimentConfig::default()
    };
    let data = load_dataset(&cfg)?;
    let origin = cfg.projection_origin()?.or(data.origin);
    let placements = load_placements(&args.placement, origin)?;
    let points = data.coords();
    let ships = data.ships();
    println!("{:<26} {:>6} {:>3} {:>12} {:>10}", "algorithm", "trial", "K", "rmsd_km", "p_d");
    for pl in placements {
        let params = DropoutParams::new(args.p, pl.centers.len(), args.radius_km)?;
        let m = metrics::evaluate(&ships, &points, &pl.centers, &params)?;
        println!(
            "{:<26} {:>6} {:>3} {:>12.4} {:>10.6}",
            pl.algorithm,
            pl.trial,
            pl.centers.len(),
            m.rmsd,
            m.p_d
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
        Command::Metrics(a) => metrics_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
