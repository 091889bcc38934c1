use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rbslipt::emit::{emit, Format};
use rbslipt::energy_map::{energy_distribution_map, MapGrid, MapMode};
use rbslipt::geometry::KernelChoice;
use rbslipt::sweep::PRESETS;
use rbslipt::{fox_li_solve, run_sweep, Error, ModeCache, SweepSpec, SystemConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "rbslipt", version, about = "Resonant-beam SLIPT link sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sweep and write the result table.
    Run(RunArgs),
    /// List the built-in sweeps.
    Presets,
    /// Print the default configuration file.
    Defaults,
    /// Solve one cavity mode and print its summary as JSON.
    Mode(ModeArgs),
    /// Output-power map over the receiving plane.
    Map(MapArgs),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override algorithm.samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Override algorithm.iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Override algorithm.kernel (auto, impulse_response, transfer_function).
    #[arg(long)]
    kernel: Option<String>,
    /// Override link.input_power (W).
    #[arg(long)]
    input_power: Option<f64>,
    /// Override link.split_ratio.
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Args)]
struct CacheArgs {
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Recompute every mode.
    #[arg(long)]
    no_cache: bool,
    /// Persist modes here (defaults to $RBSLIPT_CACHE_DIR).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    cache: CacheArgs,
    /// Preset name or axes, e.g. "L_m=1:10:0.5;theta_deg=0,10,15".
    #[arg(long, default_value = "single")]
    sweep: String,
    /// Output path, or - for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// csv or json; inferred from the output extension when omitted.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct ModeArgs {
    #[command(flatten)]
    common: Common,
    /// Link distance L (m); defaults to link.distance.
    #[arg(long)]
    distance: Option<f64>,
    /// Angle θ (degrees); defaults to link.theta_deg.
    #[arg(long)]
    theta: Option<f64>,
    /// Write |U|² at the gain-medium mirror as CSV.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    cache: CacheArgs,
    /// Transmitter height above the receiving plane (m).
    #[arg(long, default_value_t = 3.0)]
    height: f64,
    /// Half-width of the mapped square (m).
    #[arg(long, default_value_t = 1.5)]
    half_width: f64,
    /// Points per side.
    #[arg(long, default_value_t = 31)]
    points: usize,
    /// Interpolate between this many radial nodes instead of solving
    /// every position.
    #[arg(long)]
    interpolate: Option<usize>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

fn load_config(common: &Common) -> rbslipt::Result<SystemConfig> {
    let mut config = match &common.config {
        Some(path) => SystemConfig::load(path)?,
        None => SystemConfig::default(),
    };
    if let Some(n) = common.samples {
        config.algorithm.samples = n;
    }
    if let Some(n) = common.iterations {
        config.algorithm.iterations = n;
    }
    if let Some(k) = &common.kernel {
        config.algorithm.kernel = match k.as_str() {
            "auto" => KernelChoice::Auto,
            "impulse_response" | "ir" => KernelChoice::ImpulseResponse,
            "transfer_function" | "tf" => KernelChoice::TransferFunction,
            other => {
                return Err(Error::Validation {
                    field: "algorithm.kernel".into(),
                    message: format!("unknown kernel {other:?}"),
                })
            }
        };
    }
    if let Some(p) = common.input_power {
        config.link.input_power = p;
    }
    if let Some(mu) = common.mu {
        config.link.split_ratio = mu;
    }
    config.validate()?;
    Ok(config)
}

fn open_cache(args: &CacheArgs) -> rbslipt::Result<ModeCache> {
    if args.no_cache {
        Ok(ModeCache::disabled())
    } else if let Some(dir) = &args.cache_dir {
        ModeCache::with_dir(dir)
    } else {
        ModeCache::from_env()
    }
}

fn infer_format(explicit: Option<&str>, out: &Path) -> rbslipt::Result<Format> {
    match explicit {
        Some(f) => f.parse(),
        None => Ok(match out.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }),
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut config = load_config(&args.common)?;
    let spec: SweepSpec = args.sweep.parse()?;
    spec.preset_overrides(&mut config);
    let format = infer_format(args.format.as_deref(), &args.out)?;
    let cache = open_cache(&args.cache)?;
    log::info!("sweep {spec}: {} points on {} thread(s)", spec.len(), args.cache.jobs);
    let rows = run_sweep(&config, &spec, &cache, args.cache.jobs)?;
    emit(&rows, format, &args.out)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} points failed; see the status column", rows.len());
    }
    Ok(())
}

fn mode(args: ModeArgs) -> anyhow::Result<()> {
    let config = load_config(&args.common)?;
    let distance = args.distance.unwrap_or(config.link.distance);
    let theta = args.theta.unwrap_or(config.link.theta_deg).to_radians();
    let solution = fox_li_solve(&config.cavity(distance, theta))?;
    if let Some(path) = &args.dump {
        solution.write_intensity_csv(path)?;
    }
    println!("{}", serde_json::to_string_pretty(&solution.summary())?);
    Ok(())
}

fn map(args: MapArgs) -> anyhow::Result<()> {
    let config = load_config(&args.common)?;
    let grid = MapGrid {
        height: args.height,
        half_width: args.half_width,
        points: args.points,
    };
    let mode = match args.interpolate {
        Some(nodes) => MapMode::Interpolated { nodes },
        None => MapMode::Exact,
    };
    let cache = open_cache(&args.cache)?;
    let map = energy_distribution_map(&config, &grid, mode, &cache, args.cache.jobs)?;
    let text = map.to_csv();
    if args.out == Path::new("-") {
        print!("{text}");
    } else {
        std::fs::write(&args.out, text)
            .map_err(|e| Error::Io {
                path: args.out.clone(),
                source: e,
            })
            .context("writing map")?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Io { .. }) => EXIT_IO,
        Some(
            Error::Config(_)
            | Error::Validation { .. }
            | Error::InvalidGeometry(_)
            | Error::Sampling { .. }
            | Error::DegenerateCavity { .. },
        ) => EXIT_CONFIG,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Presets => {
            for name in PRESETS {
                let spec = SweepSpec::preset(name).expect("preset exists");
                println!("{name}\t{}", spec.description());
            }
            Ok(())
        }
        Command::Defaults => {
            print!("{}", SystemConfig::default().to_toml_string());
            Ok(())
        }
        Command::Mode(a) => mode(a),
        Command::Map(a) => map(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
