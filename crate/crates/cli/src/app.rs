//! Command definitions and the batch workflow dispatcher.
//!
//! Every subcommand composes the library stages in workflow order: load
//! entities, build the interaction matrix, attach transport costs, run the
//! model, export. Each stage appends one record to the run log, which is
//! written to `run.log` in the output directory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use marketflow_core::{
    cd_probabilities, clustering_indicator, fca2s, fit_huff, flows, hansen,
    inter_location_costs, log_centering_transform, market_areas, mci_fit, mci_predict,
    probabilities, utilities, CDParams, CostMatrix, CostSource, CostUnit, CustomerOrigin,
    DecayKind, DecaySpec, FitConfig, GeoPoint, HuffParams, InteractionMatrix, ObservedData,
    SupplyLocation, ZeroSharePolicy, DEFAULT_COST_FLOOR,
};

use crate::columns::ColumnSpec;
use crate::config::FileConfig;
use crate::csv_io;
use crate::export;
use crate::geojson_io;
use crate::ors::{OrsClient, API_KEY_ENV};
use crate::runlog::RunLog;
use crate::CliError;

#[derive(Parser)]
#[command(
    name = "marketflow",
    version,
    about = "Market area analysis: Huff and MCI models, calibration, and accessibility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the interaction matrix with transport costs
    Matrix(MatrixArgs),
    /// Huff pipeline: probabilities, flows, and market areas
    Huff(HuffArgs),
    /// Competing Destinations pipeline with a clustering term
    Cd(CdArgs),
    /// Fit MCI coefficients by log-centering least squares
    #[command(name = "mci-fit")]
    MciFit(MciFitArgs),
    /// Predict market shares from fitted MCI coefficients
    #[command(name = "mci-predict")]
    MciPredict(MciPredictArgs),
    /// Nonlinear calibration of Huff weighting parameters
    Fit(FitArgs),
    /// Hansen accessibility per origin
    Hansen(HansenArgs),
    /// Two-step floating catchment area analysis
    #[command(name = "2sfca")]
    TwoSfca(TwoSfcaArgs),
    /// Fetch a travel-time matrix from an OpenRouteService-compatible endpoint
    Traveltime(TravelTimeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Customer origins file (.csv, .geojson)
    #[arg(long)]
    origins: PathBuf,
    /// Supply locations file (.csv, .geojson)
    #[arg(long)]
    locations: PathBuf,
    /// Id column / property name [default: id]
    #[arg(long)]
    id_col: Option<String>,
    /// Latitude column [default: lat]
    #[arg(long)]
    lat_col: Option<String>,
    /// Longitude column [default: lon]
    #[arg(long)]
    lon_col: Option<String>,
    /// Demand column on the origins file; absent means demand 0
    #[arg(long)]
    demand_col: Option<String>,
    /// Attraction column on the locations file; absent means attraction 1
    #[arg(long)]
    attraction_col: Option<String>,
    /// Comma-separated attribute columns on the locations file
    #[arg(long)]
    attribute_cols: Option<String>,
    /// CSV delimiter, "," or ";"
    #[arg(long)]
    delimiter: Option<String>,
}

#[derive(Args)]
struct CostArgs {
    /// Transport-cost source: haversine, external, traveltime [default: haversine]
    #[arg(long)]
    costs: Option<String>,
    /// External long-format cost matrix (origin_id,location_id,cost)
    #[arg(long)]
    cost_matrix: Option<PathBuf>,
    /// Unit of the external matrix: km or min [default: km]
    #[arg(long)]
    cost_unit: Option<String>,
    /// Lower bound applied to every transport cost [default: 0.1]
    #[arg(long)]
    cost_floor: Option<f64>,
    /// Travel-time endpoint [default: https://api.openrouteservice.org]
    #[arg(long)]
    ors_endpoint: Option<String>,
    /// API key; falls back to the MARKETFLOW_ORS_KEY environment variable
    #[arg(long)]
    api_key: Option<String>,
    /// Routing profile [default: driving-car]
    #[arg(long)]
    profile: Option<String>,
    /// Directory for cached travel-time responses [default: .marketflow-cache]
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
    /// Output format for point-joined results: csv or geojson [default: csv]
    #[arg(long)]
    format: Option<String>,
    /// Flat TOML config mirroring the flags; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HuffArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Attraction exponent [default: 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Decay spec, e.g. power:2, exponential:0.1, logistic:-5,0.5 [default: power:2]
    #[arg(long)]
    decay: Option<String>,
}

#[derive(Args)]
struct CdArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Attraction exponent [default: 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Decay spec; the standard form expects exponential [default: exponential:0.1]
    #[arg(long)]
    decay: Option<String>,
    /// Clustering exponent beta (required)
    #[arg(long)]
    beta: Option<f64>,
    /// Clustering-indicator attraction exponent [default: 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Clustering-indicator cost exponent [default: 1]
    #[arg(long)]
    delta: Option<f64>,
    /// Allow non-exponential decay in the utility term
    #[arg(long)]
    any_decay: bool,
}

#[derive(Args)]
struct MciFitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Observed shares CSV (origin_id,location_id,share)
    #[arg(long)]
    observed: PathBuf,
    /// Comma-separated attribute names; "t" is the transport cost
    #[arg(long)]
    attributes: Option<String>,
    /// Zero-share policy: drop or epsilon [default: drop]
    #[arg(long)]
    zero_policy: Option<String>,
    /// Replacement value for the epsilon policy [default: 1e-6]
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct MciPredictArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Coefficients JSON as written by mci-fit
    #[arg(long)]
    coefficients: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Observed CSV; kind inferred from the header (shares, flows, or totals)
    #[arg(long)]
    observed: PathBuf,
    /// Decay family (power, exponential, logistic), optionally with initial
    /// parameters, e.g. exponential:0.3
    #[arg(long)]
    decay: Option<String>,
    /// Fix gamma at its initial value instead of fitting it
    #[arg(long, conflicts_with = "fit_gamma")]
    fix_gamma: bool,
    /// Fit gamma even for totals (under-identified; emits a warning)
    #[arg(long)]
    fit_gamma: bool,
    /// Initial gamma [default: 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial lambda [default: 1]
    #[arg(long)]
    lambda: Option<f64>,
    /// Initial logistic a [default: 0]
    #[arg(long)]
    a: Option<f64>,
    /// Initial logistic b [default: 0.5]
    #[arg(long)]
    b: Option<f64>,
    /// Simplex spread tolerance [default: 1e-8]
    #[arg(long)]
    tolerance: Option<f64>,
    /// Iteration cap per start [default: 2000]
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Additional jittered starts [default: 3]
    #[arg(long)]
    restarts: Option<u64>,
    /// Seed for the restart jitter [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Record the per-iteration objective trace in fit.json
    #[arg(long)]
    trace: bool,
    /// Exit with code 4 when the fit does not converge
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct HansenArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Decay spec, e.g. power:1.5 (required); opportunities come from the
    /// attraction column
    #[arg(long)]
    decay: Option<String>,
}

#[derive(Args)]
struct TwoSfcaArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Catchment threshold in the matrix's cost unit (required); population
    /// comes from the demand column, supply from the attraction column
    #[arg(long)]
    d0: Option<f64>,
}

#[derive(Args)]
struct TravelTimeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses argv and runs the selected workflow; returns the process exit
/// code (0 ok, 2 validation, 3 I/O, 4 non-convergence with --strict, 64
/// usage).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Matrix(args) => run_matrix(args),
        Command::Huff(args) => run_huff(args),
        Command::Cd(args) => run_cd(args),
        Command::MciFit(args) => run_mci_fit(args),
        Command::MciPredict(args) => run_mci_predict(args),
        Command::Fit(args) => run_fit(args),
        Command::Hansen(args) => run_hansen(args),
        Command::TwoSfca(args) => run_2sfca(args),
        Command::Traveltime(args) => run_traveltime(args),
    }
}

fn parse_name_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn is_geojson(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("geojson") | Some("json")
    )
}

struct InputSetup {
    spec: ColumnSpec,
    delimiter: u8,
}

fn resolve_input(args: &InputArgs, config: &FileConfig) -> Result<InputSetup, CliError> {
    let spec = ColumnSpec {
        id_column: args
            .id_col
            .clone()
            .or(config.string("id_col")?)
            .unwrap_or_else(|| "id".into()),
        lat_column: args
            .lat_col
            .clone()
            .or(config.string("lat_col")?)
            .unwrap_or_else(|| "lat".into()),
        lon_column: args
            .lon_col
            .clone()
            .or(config.string("lon_col")?)
            .unwrap_or_else(|| "lon".into()),
        demand_column: args.demand_col.clone().or(config.string("demand_col")?),
        attraction_column: args
            .attraction_col
            .clone()
            .or(config.string("attraction_col")?),
        attribute_columns: args
            .attribute_cols
            .clone()
            .or(config.string("attribute_cols")?)
            .map(|s| parse_name_list(&s))
            .unwrap_or_default(),
    };
    let delimiter = match args
        .delimiter
        .clone()
        .or(config.string("delimiter")?)
        .unwrap_or_else(|| ",".into())
        .as_str()
    {
        "," => b',',
        ";" => b';',
        other => {
            return Err(CliError::Usage(format!(
                "unsupported delimiter {other:?}; use \",\" or \";\""
            )))
        }
    };
    Ok(InputSetup { spec, delimiter })
}

fn load_entities(
    args: &InputArgs,
    setup: &InputSetup,
    log: &mut RunLog,
) -> Result<(Vec<CustomerOrigin>, Vec<SupplyLocation>), CliError> {
    let origins = if is_geojson(&args.origins) {
        geojson_io::load_origins_geojson(&args.origins, &setup.spec)?
    } else {
        csv_io::load_origins_csv(&args.origins, &setup.spec, setup.delimiter)?
    };
    log.add(
        "load_origins",
        vec![
            ("path".into(), args.origins.display().to_string()),
            ("count".into(), origins.len().to_string()),
        ],
        vec![],
    );
    let locations = if is_geojson(&args.locations) {
        geojson_io::load_locations_geojson(&args.locations, &setup.spec)?
    } else {
        csv_io::load_locations_csv(&args.locations, &setup.spec, setup.delimiter)?
    };
    log.add(
        "load_locations",
        vec![
            ("path".into(), args.locations.display().to_string()),
            ("count".into(), locations.len().to_string()),
        ],
        vec![],
    );
    Ok((origins, locations))
}

fn resolve_ors_client(args: &CostArgs, config: &FileConfig) -> Result<(OrsClient, String), CliError> {
    let endpoint = args
        .ors_endpoint
        .clone()
        .or(config.string("ors_endpoint")?)
        .unwrap_or_else(|| "https://api.openrouteservice.org".into());
    let api_key = args
        .api_key
        .clone()
        .or(config.string("api_key")?)
        .or_else(|| std::env::var(API_KEY_ENV).ok())
        .ok_or_else(|| {
            CliError::Validation(format!(
                "no API key: pass --api-key or set {API_KEY_ENV}"
            ))
        })?;
    let profile = args
        .profile
        .clone()
        .or(config.string("profile")?)
        .unwrap_or_else(|| "driving-car".into());
    let cache_dir = match args.cache_dir.clone() {
        Some(dir) => dir,
        None => config
            .path("cache_dir")?
            .unwrap_or_else(|| PathBuf::from(".marketflow-cache")),
    };
    Ok((OrsClient::new(endpoint, api_key).with_cache_dir(cache_dir), profile))
}

/// Builds the interaction matrix and attaches transport costs from the
/// selected source, logging both stages.
fn build_matrix(
    origins: Vec<CustomerOrigin>,
    locations: Vec<SupplyLocation>,
    args: &CostArgs,
    config: &FileConfig,
    delimiter: u8,
    log: &mut RunLog,
) -> Result<InteractionMatrix, CliError> {
    let matrix = InteractionMatrix::new(origins, locations)?;
    log.add(
        "create_interaction_matrix",
        vec![
            ("origins".into(), matrix.origin_count().to_string()),
            ("locations".into(), matrix.location_count().to_string()),
        ],
        vec![],
    );

    let source_name = args
        .costs
        .clone()
        .or(config.string("costs")?)
        .unwrap_or_else(|| "haversine".into());
    let cost_floor = match args.cost_floor {
        Some(f) => f,
        None => config.float("cost_floor")?.unwrap_or(DEFAULT_COST_FLOOR),
    };

    let (source, unit_label, mut warnings) = match source_name.as_str() {
        "haversine" => (CostSource::Haversine, "km".to_string(), vec![]),
        "external" => {
            let path = args
                .cost_matrix
                .clone()
                .or(config.path("cost_matrix")?)
                .ok_or_else(|| {
                    CliError::Usage("--costs external needs --cost-matrix".into())
                })?;
            let unit: CostUnit = args
                .cost_unit
                .clone()
                .or(config.string("cost_unit")?)
                .unwrap_or_else(|| "km".into())
                .parse()?;
            let pairs = csv_io::load_cost_pairs_csv(&path, delimiter)?;
            let external = densify_cost_pairs(&matrix, &pairs, unit)?;
            (CostSource::External(external), unit.to_string(), vec![])
        }
        "traveltime" => {
            let (client, profile) = resolve_ors_client(args, config)?;
            let origin_points: Vec<GeoPoint> =
                matrix.origins().iter().map(|o| o.point().clone()).collect();
            let location_points: Vec<GeoPoint> =
                matrix.locations().iter().map(|l| l.point().clone()).collect();
            let fetched = client.fetch_matrix(&origin_points, &location_points, &profile)?;
            (
                CostSource::External(fetched.matrix),
                "min".to_string(),
                fetched.warnings,
            )
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown cost source {other:?}; use haversine, external, or traveltime"
            )))
        }
    };

    let matrix = matrix.with_transport_costs(&source, cost_floor)?;
    log.add(
        "transport_costs",
        vec![
            ("source".into(), source_name),
            ("unit".into(), unit_label),
            ("floor".into(), export::fmt_f64(cost_floor)),
        ],
        std::mem::take(&mut warnings),
    );
    Ok(matrix)
}

/// Expands a long-format pair map into the dense I x J matrix; every pair
/// must be present and every key must reference known ids.
fn densify_cost_pairs(
    matrix: &InteractionMatrix,
    pairs: &HashMap<(String, String), f64>,
    unit: CostUnit,
) -> Result<CostMatrix, CliError> {
    if pairs.len() != matrix.pair_count() {
        return Err(CliError::Validation(format!(
            "external cost matrix has {} pairs, expected {}",
            pairs.len(),
            matrix.pair_count()
        )));
    }
    let mut values = Vec::with_capacity(matrix.pair_count());
    for origin in matrix.origins() {
        for location in matrix.locations() {
            let key = (origin.id().to_string(), location.id().to_string());
            let cost = pairs.get(&key).ok_or_else(|| {
                CliError::Validation(format!(
                    "external cost matrix is missing pair ({}, {})",
                    key.0, key.1
                ))
            })?;
            values.push(*cost);
        }
    }
    CostMatrix::new(
        matrix.origin_count(),
        matrix.location_count(),
        unit,
        values,
    )
    .map_err(CliError::from)
}

fn parse_decay(text: &str) -> Result<DecaySpec, CliError> {
    text.parse::<DecaySpec>().map_err(CliError::from)
}

enum OutputFormat {
    Csv,
    Geojson,
}

fn resolve_format(args: &OutputArgs, config: &FileConfig) -> Result<OutputFormat, CliError> {
    match args
        .format
        .clone()
        .or(config.string("format")?)
        .unwrap_or_else(|| "csv".into())
        .as_str()
    {
        "csv" => Ok(OutputFormat::Csv),
        "geojson" => Ok(OutputFormat::Geojson),
        other => Err(CliError::Usage(format!(
            "unknown format {other:?}; use csv or geojson"
        ))),
    }
}

fn prepare_out_dir(args: &OutputArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out.display())))
}

fn finish(log: &RunLog, out: &Path, written: &[PathBuf]) -> Result<(), CliError> {
    log.write(&out.join("run.log"))?;
    for path in written {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", out.join("run.log").display());
    Ok(())
}

fn run_matrix(args: MatrixArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let path = args.output.out.join("interaction_matrix.csv");
    export::export_interaction_csv(&matrix, &path)?;
    log.add(
        "export",
        vec![("file".into(), path.display().to_string())],
        vec![],
    );
    finish(&log, &args.output.out, &[path])
}

/// Shared tail of the huff and cd pipelines: flows, market areas, exports.
fn export_share_pipeline(
    matrix: &InteractionMatrix,
    args: &OutputArgs,
    format: &OutputFormat,
    log: &mut RunLog,
    mut written: Vec<PathBuf>,
) -> Result<(), CliError> {
    let with_flows = flows(matrix)?;
    log.add("flows", vec![], vec![]);
    let areas = market_areas(&with_flows)?;
    log.add(
        "market_areas",
        vec![(
            "demand_total".into(),
            export::fmt_f64(areas.demand_total()),
        )],
        vec![],
    );

    let p_path = args.out.join("probabilities.csv");
    export::export_probabilities_csv(&with_flows, &p_path)?;
    written.push(p_path);
    let f_path = args.out.join("flows.csv");
    export::export_flows_csv(&with_flows, &f_path)?;
    written.push(f_path);
    let areas_path = match format {
        OutputFormat::Csv => {
            let path = args.out.join("market_areas.csv");
            export::export_market_areas_csv(&areas, &path)?;
            path
        }
        OutputFormat::Geojson => {
            let path = args.out.join("market_areas.geojson");
            let points: Vec<GeoPoint> = with_flows
                .locations()
                .iter()
                .map(|l| l.point().clone())
                .collect();
            export::export_market_areas_geojson(&areas, &points, &path)?;
            path
        }
    };
    written.push(areas_path);
    log.add(
        "export",
        vec![("files".into(), written.len().to_string())],
        vec![],
    );
    finish(log, &args.out, &written)
}

fn run_huff(args: HuffArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let format = resolve_format(&args.output, &config)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let gamma = match args.gamma {
        Some(g) => g,
        None => config.float("gamma")?.unwrap_or(1.0),
    };
    let decay = parse_decay(
        &args
            .decay
            .clone()
            .or(config.string("decay")?)
            .unwrap_or_else(|| "power:2".into()),
    )?;
    let params = HuffParams::new(gamma, decay);

    let with_u = utilities(&matrix, &params)?;
    log.add(
        "utilities",
        vec![
            ("gamma".into(), export::fmt_f64(gamma)),
            ("decay".into(), decay.to_string()),
        ],
        vec![],
    );
    let with_p = probabilities(&with_u)?;
    log.add("probabilities", vec![], vec![]);

    export_share_pipeline(&with_p, &args.output, &format, &mut log, Vec::new())
}

fn run_cd(args: CdArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let format = resolve_format(&args.output, &config)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let gamma = match args.gamma {
        Some(g) => g,
        None => config.float("gamma")?.unwrap_or(1.0),
    };
    let decay = parse_decay(
        &args
            .decay
            .clone()
            .or(config.string("decay")?)
            .unwrap_or_else(|| "exponential:0.1".into()),
    )?;
    let beta = match args.beta {
        Some(b) => b,
        None => config
            .float("beta")?
            .ok_or_else(|| CliError::Usage("cd needs --beta (clustering exponent)".into()))?,
    };
    let alpha = match args.alpha {
        Some(a) => a,
        None => config.float("alpha")?.unwrap_or(1.0),
    };
    let delta = match args.delta {
        Some(d) => d,
        None => config.float("delta")?.unwrap_or(1.0),
    };
    let cost_floor = match args.cost.cost_floor {
        Some(f) => f,
        None => config.float("cost_floor")?.unwrap_or(DEFAULT_COST_FLOOR),
    };

    let base = HuffParams::new(gamma, decay);
    let params = if args.any_decay {
        CDParams::with_any_decay(base, beta, alpha, delta)?
    } else {
        CDParams::new(base, beta, alpha, delta)?
    };

    // inter-location costs stay haversine regardless of the pair source
    let location_costs = inter_location_costs(matrix.locations(), cost_floor)?;
    let clustering = clustering_indicator(matrix.locations(), &location_costs, alpha, delta)?;
    log.add(
        "clustering_indicator",
        vec![
            ("alpha".into(), export::fmt_f64(alpha)),
            ("delta".into(), export::fmt_f64(delta)),
        ],
        vec![],
    );
    let with_p = cd_probabilities(&matrix, &params, &clustering)?;
    log.add(
        "cd_probabilities",
        vec![
            ("gamma".into(), export::fmt_f64(gamma)),
            ("decay".into(), decay.to_string()),
            ("beta".into(), export::fmt_f64(beta)),
        ],
        vec![],
    );

    let clustering_path = args.output.out.join("clustering.csv");
    export::export_named_values_csv(
        ("location_id", "clustering"),
        clustering.iter().map(|(k, v)| (k.clone(), *v)),
        &clustering_path,
    )?;
    export_share_pipeline(
        &with_p,
        &args.output,
        &format,
        &mut log,
        vec![clustering_path],
    )
}

/// Densifies an observed share map onto the matrix pair order.
fn observed_shares_vector(
    matrix: &InteractionMatrix,
    values: &HashMap<(String, String), f64>,
) -> Result<Vec<f64>, CliError> {
    let origin_index: HashMap<&str, usize> = matrix
        .origins()
        .iter()
        .enumerate()
        .map(|(i, o)| (o.id(), i))
        .collect();
    let location_index: HashMap<&str, usize> = matrix
        .locations()
        .iter()
        .enumerate()
        .map(|(j, l)| (l.id(), j))
        .collect();
    let mut dense = vec![0.0; matrix.pair_count()];
    for ((origin, location), value) in values {
        let i = *origin_index.get(origin.as_str()).ok_or_else(|| {
            CliError::Validation(format!("observed data references unknown origin id {origin}"))
        })?;
        let j = *location_index.get(location.as_str()).ok_or_else(|| {
            CliError::Validation(format!(
                "observed data references unknown location id {location}"
            ))
        })?;
        dense[i * matrix.location_count() + j] = *value;
    }
    Ok(dense)
}

fn run_mci_fit(args: MciFitArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let observed = csv_io::load_observed_csv(&args.observed, setup.delimiter)?;
    let ObservedData::Shares(share_map) = &observed else {
        return Err(CliError::Validation(format!(
            "mci-fit needs observed shares, got {}",
            observed.kind_name()
        )));
    };
    log.add(
        "load_observed",
        vec![
            ("path".into(), args.observed.display().to_string()),
            ("kind".into(), "shares".into()),
        ],
        vec![],
    );
    let matrix = matrix.with_observed_probabilities(observed_shares_vector(&matrix, share_map)?)?;

    let attributes: Vec<String> = args
        .attributes
        .clone()
        .or(config.string("attributes")?)
        .map(|s| parse_name_list(&s))
        .ok_or_else(|| {
            CliError::Usage("mci-fit needs --attributes (comma-separated names; \"t\" is the transport cost)".into())
        })?;
    let policy = match args
        .zero_policy
        .clone()
        .or(config.string("zero_policy")?)
        .unwrap_or_else(|| "drop".into())
        .as_str()
    {
        "drop" => ZeroSharePolicy::Drop,
        "epsilon" => {
            let epsilon = match args.epsilon {
                Some(e) => e,
                None => config.float("epsilon")?.unwrap_or(1e-6),
            };
            ZeroSharePolicy::AddEpsilon(epsilon)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown zero-share policy {other:?}; use drop or epsilon"
            )))
        }
    };

    let design = log_centering_transform(&matrix, &attributes, policy)?;
    log.add(
        "log_centering_transform",
        vec![
            ("attributes".into(), attributes.join(",")),
            (
                "policy".into(),
                match policy {
                    ZeroSharePolicy::Drop => "drop".into(),
                    ZeroSharePolicy::AddEpsilon(e) => format!("epsilon:{}", export::fmt_f64(e)),
                },
            ),
            ("rows".into(), design.rows().len().to_string()),
        ],
        design.warnings().to_vec(),
    );
    let fit = mci_fit(&design)?;
    log.add(
        "mci_fit",
        fit.coefficients()
            .iter()
            .map(|(name, value)| (name.clone(), export::fmt_f64(*value)))
            .collect(),
        vec![],
    );

    let json_path = args.output.out.join("mci_fit.json");
    export::export_mci_fit_json(&fit, policy, design.warnings(), &json_path)?;
    let txt_path = args.output.out.join("mci_fit.txt");
    export::export_mci_fit_txt(&fit, &txt_path)?;
    log.add(
        "export",
        vec![("files".into(), "2".into())],
        vec![],
    );
    finish(&log, &args.output.out, &[json_path, txt_path])
}

fn run_mci_predict(args: MciPredictArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let coefficients = export::read_coefficients_json(&args.coefficients)?;
    log.add(
        "load_coefficients",
        vec![
            ("path".into(), args.coefficients.display().to_string()),
            ("count".into(), coefficients.len().to_string()),
        ],
        vec![],
    );
    let predicted = mci_predict(&matrix, &coefficients)?;
    log.add("mci_predict", vec![], vec![]);

    let path = args.output.out.join("predicted_probabilities.csv");
    export::export_probabilities_csv(&predicted, &path)?;
    log.add(
        "export",
        vec![("file".into(), path.display().to_string())],
        vec![],
    );
    finish(&log, &args.output.out, &[path])
}

fn run_fit(args: FitArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let observed = csv_io::load_observed_csv(&args.observed, setup.delimiter)?;
    log.add(
        "load_observed",
        vec![
            ("path".into(), args.observed.display().to_string()),
            ("kind".into(), observed.kind_name().into()),
        ],
        vec![],
    );

    // family alone selects what is fitted; a full spec also sets initials
    let decay_text = args
        .decay
        .clone()
        .or(config.string("decay")?)
        .ok_or_else(|| {
            CliError::Usage("fit needs --decay (power, exponential, or logistic)".into())
        })?;
    let (decay_kind, spec_initials) = if decay_text.contains(':') {
        let spec = parse_decay(&decay_text)?;
        (spec.kind(), Some(spec))
    } else {
        (
            decay_text
                .parse::<DecayKind>()
                .map_err(CliError::from)?,
            None,
        )
    };

    let mut fit_config = FitConfig::default();
    if let Some(g) = args.gamma.or(config.float("gamma")?) {
        fit_config.initial_gamma = g;
    }
    if let Some(l) = args.lambda.or(config.float("lambda")?) {
        fit_config.initial_lambda = l;
    }
    if let Some(a) = args.a.or(config.float("a")?) {
        fit_config.initial_a = a;
    }
    if let Some(b) = args.b.or(config.float("b")?) {
        fit_config.initial_b = b;
    }
    match spec_initials {
        Some(DecaySpec::Power { lambda }) | Some(DecaySpec::Exponential { lambda }) => {
            fit_config.initial_lambda = lambda;
        }
        Some(DecaySpec::Logistic { a, b }) => {
            fit_config.initial_a = a;
            fit_config.initial_b = b;
        }
        None => {}
    }
    if let Some(t) = args.tolerance.or(config.float("tolerance")?) {
        fit_config.tolerance = t;
    }
    if let Some(m) = args.max_iterations.or(config.integer("max_iterations")?) {
        fit_config.max_iterations = m as usize;
    }
    if let Some(r) = args.restarts.or(config.integer("restarts")?) {
        fit_config.restarts = r as usize;
    }
    if let Some(s) = args.seed.or(config.integer("seed")?) {
        fit_config.seed = s;
    }
    if args.fix_gamma {
        fit_config.fit_gamma = Some(false);
    } else if args.fit_gamma {
        fit_config.fit_gamma = Some(true);
    }
    fit_config.record_trace = args.trace;
    let strict = args.strict || config.boolean("strict")?.unwrap_or(false);

    let result = fit_huff(&matrix, &observed, decay_kind, &fit_config)?;
    log.add(
        "fit_huff",
        vec![
            ("decay".into(), decay_kind.to_string()),
            ("converged".into(), result.converged.to_string()),
            ("iterations".into(), result.iterations.to_string()),
            (
                "objective".into(),
                export::fmt_f64(result.objective_value),
            ),
        ],
        result.warnings.clone(),
    );

    let path = args.output.out.join("fit.json");
    export::export_fit_json(&result, &path)?;
    log.add(
        "export",
        vec![("file".into(), path.display().to_string())],
        vec![],
    );
    finish(&log, &args.output.out, &[path])?;

    if strict && !result.converged {
        return Err(CliError::NonConvergence);
    }
    Ok(())
}

fn run_hansen(args: HansenArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let format = resolve_format(&args.output, &config)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let decay = parse_decay(
        &args
            .decay
            .clone()
            .or(config.string("decay")?)
            .ok_or_else(|| CliError::Usage("hansen needs --decay, e.g. power:1.5".into()))?,
    )?;
    let opportunities: HashMap<String, f64> = matrix
        .locations()
        .iter()
        .map(|l| (l.id().to_string(), l.attraction()))
        .collect();
    let result = hansen(&matrix, &opportunities, &decay)?;
    log.add(
        "hansen",
        vec![("decay".into(), decay.to_string())],
        result.warnings().to_vec(),
    );

    let path = match format {
        OutputFormat::Csv => {
            let path = args.output.out.join("accessibility.csv");
            export::export_accessibility_csv(&result, &path)?;
            path
        }
        OutputFormat::Geojson => {
            let path = args.output.out.join("accessibility.geojson");
            let points: Vec<GeoPoint> = matrix
                .origins()
                .iter()
                .map(|o| o.point().clone())
                .collect();
            export::export_accessibility_geojson(&result, &points, &path)?;
            path
        }
    };
    log.add(
        "export",
        vec![("file".into(), path.display().to_string())],
        vec![],
    );
    finish(&log, &args.output.out, &[path])
}

fn run_2sfca(args: TwoSfcaArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let format = resolve_format(&args.output, &config)?;
    let setup = resolve_input(&args.input, &config)?;
    if setup.spec.demand_column.is_none() {
        return Err(CliError::Usage(
            "2sfca needs --demand-col: the origin population".into(),
        ));
    }
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;
    let matrix = build_matrix(origins, locations, &args.cost, &config, setup.delimiter, &mut log)?;

    let d0 = match args.d0 {
        Some(d) => d,
        None => config
            .float("d0")?
            .ok_or_else(|| CliError::Usage("2sfca needs --d0 (catchment threshold)".into()))?,
    };
    let supply: HashMap<String, f64> = matrix
        .locations()
        .iter()
        .map(|l| (l.id().to_string(), l.attraction()))
        .collect();
    let population: HashMap<String, f64> = matrix
        .origins()
        .iter()
        .map(|o| (o.id().to_string(), o.demand()))
        .collect();
    let result = fca2s(&matrix, &supply, &population, d0)?;
    log.add(
        "2sfca",
        vec![("d0".into(), export::fmt_f64(d0))],
        result.warnings().to_vec(),
    );

    let mut written = Vec::new();
    let access_path = match format {
        OutputFormat::Csv => {
            let path = args.output.out.join("accessibility.csv");
            export::export_accessibility_csv(&result, &path)?;
            path
        }
        OutputFormat::Geojson => {
            let path = args.output.out.join("accessibility.geojson");
            let points: Vec<GeoPoint> = matrix
                .origins()
                .iter()
                .map(|o| o.point().clone())
                .collect();
            export::export_accessibility_geojson(&result, &points, &path)?;
            path
        }
    };
    written.push(access_path);
    let ratio_path = args.output.out.join("ratios.csv");
    export::export_ratios_csv(&result, &ratio_path)?;
    written.push(ratio_path);
    log.add(
        "export",
        vec![("files".into(), written.len().to_string())],
        vec![],
    );
    finish(&log, &args.output.out, &written)
}

fn run_traveltime(args: TravelTimeArgs) -> Result<(), CliError> {
    let config = FileConfig::load(args.output.config.as_deref())?;
    prepare_out_dir(&args.output)?;
    let setup = resolve_input(&args.input, &config)?;
    let mut log = RunLog::new();
    let (origins, locations) = load_entities(&args.input, &setup, &mut log)?;

    let (client, profile) = resolve_ors_client(&args.cost, &config)?;
    let origin_points: Vec<GeoPoint> = origins.iter().map(|o| o.point().clone()).collect();
    let location_points: Vec<GeoPoint> = locations.iter().map(|l| l.point().clone()).collect();
    let fetched = client.fetch_matrix(&origin_points, &location_points, &profile)?;
    log.add(
        "fetch_travel_time_matrix",
        vec![
            ("profile".into(), profile),
            ("pairs".into(), fetched.matrix.values().len().to_string()),
        ],
        fetched.warnings.clone(),
    );

    let path = args.output.out.join("traveltime.csv");
    export::export_traveltime_csv(
        &origin_points,
        &location_points,
        fetched.matrix.values(),
        &path,
    )?;
    log.add(
        "export",
        vec![("file".into(), path.display().to_string())],
        vec![],
    );
    finish(&log, &args.output.out, &[path])
}
