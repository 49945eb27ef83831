//! The `xychain` command line: `sweep`, `crossings`, `factorization`, and
//! `validate` subcommands.
//!
//! Exit codes: 0 on success, 1 on numerical or validation failure, 2 on
//! usage errors.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::correlations::MeasureSide;
use crate::freefermion::analytic_sector_ground_energy;
use crate::operators::factorizing_field;
use crate::spectral::{sector_ground_energies, Parity, CRITICAL_FIELD};
use crate::sweep::{
    check_factorization, minima_report, report_crossings, run_sweep, write_records, HGrid,
    OutputFormat, SweepConfig, DEFAULT_BISECTION_TOL, DEFAULT_PROMINENCE,
};
use crate::{operators::ChainSpec, Error, Result};

const EXIT_OK: i32 = 0;
const EXIT_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

/// Tolerance of the dense-vs-analytic validation grid.
const VALIDATION_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "xychain",
    version,
    about = "Finite XY chains in a transverse field: spectra, level crossings, \
             factorization, and genuine multipartite correlations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the transverse field and write one record per (h, T) point.
    Sweep(SweepArgs),
    /// Locate the parity level crossings by dense and analytic routes.
    Crossings(CrossingsArgs),
    /// Check the exact factorization of the ground state at h_F.
    Factorization(FactorizationArgs),
    /// Cross-validate dense against free-fermion sector energies.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureSideArg {
    A,
    B,
    Best,
}

impl From<MeasureSideArg> for MeasureSide {
    fn from(arg: MeasureSideArg) -> Self {
        match arg {
            MeasureSideArg::A => MeasureSide::SideA,
            MeasureSideArg::B => MeasureSide::SideB,
            MeasureSideArg::Best => MeasureSide::Best,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct SweepArgs {
    /// Number of sites (2..=12).
    #[arg(long = "n")]
    n_sites: Option<usize>,
    /// Anisotropy γ in [0, 1].
    #[arg(long)]
    gamma: Option<f64>,
    /// Coupling J (default 1).
    #[arg(long)]
    coupling: Option<f64>,
    /// Comma-separated temperatures, e.g. 0.01,0.05,1.
    #[arg(long, value_delimiter = ',')]
    temps: Option<Vec<f64>>,
    /// Field grid start:stop:points, e.g. 0:1.2:241.
    #[arg(long = "h")]
    h_grid: Option<HGrid>,
    /// Also compute the genuine classical/quantum split per point.
    #[arg(long)]
    discord: bool,
    /// Which side of the optimal cut carries the measurement.
    #[arg(long, value_enum)]
    measure_side: Option<MeasureSideArg>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Seed of the measurement-optimizer restarts.
    #[arg(long)]
    seed: Option<u64>,
    /// Minima prominence threshold in bits.
    #[arg(long)]
    prominence: Option<f64>,
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CrossingsArgs {
    #[arg(long = "n")]
    n_sites: usize,
    #[arg(long)]
    gamma: f64,
    /// Scan range start:stop (the scan itself uses a 512-point grid).
    #[arg(long, default_value = "0:1", value_parser = parse_range)]
    range: (f64, f64),
    /// Bisection tolerance on each crossing.
    #[arg(long, default_value_t = DEFAULT_BISECTION_TOL)]
    tol: f64,
}

fn parse_range(raw: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = raw
        .split_once(':')
        .ok_or_else(|| format!("range '{raw}' must be start:stop"))?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad range start '{lo}'"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad range stop '{hi}'"))?;
    Ok((lo, hi))
}

#[derive(Args)]
struct FactorizationArgs {
    #[arg(long = "n")]
    n_sites: usize,
    #[arg(long)]
    gamma: f64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Largest chain length of the dense side of the comparison.
    #[arg(long, default_value_t = 8)]
    max_n: usize,
}

/// Run the CLI and return the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(args) => sweep_command(&args),
        Command::Crossings(args) => crossings_command(&args),
        Command::Factorization(args) => factorization_command(&args),
        Command::Validate(args) => validate_command(&args),
    };
    match outcome {
        Ok(code) => code,
        // a reader closing the pipe early (e.g. `| head`) is not a failure
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidChainSpec(_)
        | Error::AnisotropyOutOfRange(_)
        | Error::SiteOutOfRange { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Resolve a sweep configuration from flags and the optional key=value file;
/// flags win over file entries, defaults fill the rest.
fn parse_config(args: &SweepArgs) -> Result<SweepConfig> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => HashMap::new(),
    };
    let from_file = |key: &str| file.get(key).cloned();

    let n_sites = match args.n_sites {
        Some(n) => n,
        None => match from_file("n") {
            Some(raw) => parse_value::<usize>("n", &raw)?,
            None => return Err(Error::InvalidArgument("missing --n".into())),
        },
    };
    let gamma = match args.gamma {
        Some(g) => g,
        None => match from_file("gamma") {
            Some(raw) => parse_value::<f64>("gamma", &raw)?,
            None => return Err(Error::InvalidArgument("missing --gamma".into())),
        },
    };

    let mut config = SweepConfig::new(n_sites, gamma);
    if let Some(coupling) = resolve(args.coupling, from_file("coupling").as_deref(), "coupling")? {
        config.coupling = coupling;
    }
    if let Some(temps) = &args.temps {
        config.temperatures = temps.clone();
    } else if let Some(raw) = from_file("temps") {
        config.temperatures = raw
            .split(',')
            .map(|t| parse_value::<f64>("temps", t.trim()))
            .collect::<Result<Vec<f64>>>()?;
    }
    if let Some(grid) = args.h_grid {
        config.h_grid = grid;
    } else if let Some(raw) = from_file("h") {
        config.h_grid = raw.parse()?;
    }
    config.compute_discord = args.discord
        || from_file("discord")
            .map(|raw| parse_value::<bool>("discord", &raw))
            .transpose()?
            .unwrap_or(false);
    if let Some(side) = args.measure_side {
        config.optimizer.measure_side = side.into();
    } else if let Some(raw) = from_file("measure-side") {
        config.optimizer.measure_side = match raw.as_str() {
            "a" => MeasureSide::SideA,
            "b" => MeasureSide::SideB,
            "best" => MeasureSide::Best,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "measure-side '{other}' is not one of a, b, best"
                )))
            }
        };
    }
    if let Some(seed) = resolve(args.seed, from_file("seed").as_deref(), "seed")? {
        config.optimizer.seed = seed;
    }
    if let Some(prominence) = resolve(
        args.prominence,
        from_file("prominence").as_deref(),
        "prominence",
    )? {
        config.prominence = prominence;
    }
    config.out = args
        .out
        .clone()
        .or_else(|| from_file("out").map(PathBuf::from));
    config.format = match args.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Jsonl) => OutputFormat::Jsonl,
        None => match from_file("format").as_deref() {
            Some("csv") | None => OutputFormat::Csv,
            Some("jsonl") => OutputFormat::Jsonl,
            Some(other) => {
                return Err(Error::InvalidArgument(format!(
                    "format '{other}' is not one of csv, jsonl"
                )))
            }
        },
    };
    config.validate()?;
    Ok(config)
}

fn resolve<T: std::str::FromStr>(
    flag: Option<T>,
    file_value: Option<&str>,
    key: &str,
) -> Result<Option<T>> {
    match (flag, file_value) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(raw)) => parse_value(key, raw).map(Some),
        (None, None) => Ok(None),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::InvalidArgument(format!("config value {key}={raw} does not parse")))
}

fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::InvalidArgument(format!("cannot read config file {}: {e}", path.display()))
    })?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!(
                "config line {} is not key=value: '{line}'",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        const KNOWN: [&str; 11] = [
            "n",
            "gamma",
            "coupling",
            "temps",
            "h",
            "discord",
            "measure-side",
            "out",
            "format",
            "seed",
            "prominence",
        ];
        if !KNOWN.contains(&key) {
            return Err(Error::InvalidArgument(format!(
                "unknown config key '{key}' on line {}",
                lineno + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn sweep_command(args: &SweepArgs) -> Result<i32> {
    let config = parse_config(args)?;
    let records = run_sweep(&config)?;

    match &config.out {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            write_records(&records, config.format, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_records(&records, config.format, &mut lock)?;
            lock.flush()?;
        }
    }

    let flagged = records.iter().filter(|r| r.error.is_some()).count();
    for record in records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: point (h = {}, T = {}) failed: {}",
            record.h,
            record.temperature,
            record.error.as_deref().unwrap_or("unknown")
        );
    }

    // summary on stderr so the data stream stays clean
    let mut temperatures = config.temperatures.clone();
    temperatures.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    temperatures.dedup();
    for &t in &temperatures {
        let report = minima_report(&records, t, &config)?;
        eprintln!(
            "T = {t}: {} minima of T^(N) at prominence >= {} bits",
            report.minima.len(),
            config.prominence
        );
        for m in &report.minima {
            eprintln!(
                "  minimum at h = {:.6} (value {:.6} bits, prominence {:.6})",
                m.h, m.value, m.prominence
            );
        }
        eprintln!(
            "  crossings h_i = [{}], h_F = {:.6}, h_C = {}",
            report
                .crossings
                .fields()
                .iter()
                .map(|h| format!("{h:.6}"))
                .collect::<Vec<_>>()
                .join(", "),
            report.factorizing_field_value,
            config.critical_field,
        );
    }

    Ok(if flagged == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn crossings_command(args: &CrossingsArgs) -> Result<i32> {
    let report = report_crossings(args.n_sites, args.gamma, args.range, args.tol)?;
    println!(
        "dense crossings (N = {}, gamma = {}):",
        args.n_sites, args.gamma
    );
    for h in report.dense.fields() {
        println!("  h_i = {h:.8}");
    }
    for t in report.dense.tangencies() {
        println!("  tangency near h = {t:.8} (gap touches zero without crossing)");
    }
    match &report.analytic {
        Some(analytic) => {
            println!("free-fermion crossings:");
            for h in analytic.fields() {
                println!("  h_i = {h:.8}");
            }
        }
        None => println!("free-fermion route skipped (needs N >= 3)"),
    }
    println!(
        "factorizing field h_F = {:.8}, critical field h_C = {}",
        report.factorizing_field, report.critical_field
    );
    if let Some(max) = report.max_disagreement {
        println!("max dense/analytic disagreement = {max:.3e}");
    }
    if !report.agree {
        eprintln!("warning: dense and analytic crossings disagree");
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

fn factorization_command(args: &FactorizationArgs) -> Result<i32> {
    let report = check_factorization(args.n_sites, args.gamma)?;
    println!(
        "factorization check at N = {}, gamma = {}: h_F = {:.8}, alpha = {:.8}",
        report.n_sites, report.gamma, report.factorizing_field, report.alpha
    );
    println!(
        "ground energy {:.12} with manifold dimension {}",
        report.ground_energy, report.ground_manifold_dim
    );
    for b in &report.branches {
        println!(
            "  branch {:?}: energy {:.12}, variance {:.3e}, manifold overlap 1 - {:.3e}",
            b.branch,
            b.energy,
            b.energy_variance,
            (1.0 - b.manifold_overlap).max(0.0)
        );
    }
    match report.passed {
        Some(true) => {
            println!("PASS");
            Ok(EXIT_OK)
        }
        Some(false) => {
            println!("FAIL");
            Ok(EXIT_FAILURE)
        }
        None => {
            println!(
                "boundary case (gamma = {}): factorized state is trivial, no pass/fail",
                report.gamma
            );
            Ok(EXIT_OK)
        }
    }
}

fn validate_command(args: &ValidateArgs) -> Result<i32> {
    if args.max_n < 3 {
        return Err(Error::InvalidArgument(format!(
            "--max-n = {}, need at least 3",
            args.max_n
        )));
    }
    let max_n = args.max_n.min(8);
    let gammas = [0.2, 0.6, 1.0];
    let fields = [0.0, 0.25, 0.5, 0.8, 1.0, 1.5];
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for n in 3..=max_n {
        for &gamma in &gammas {
            for &h in &fields {
                let spec = ChainSpec::new(n, gamma, h, 0.0)?;
                let (dense_even, dense_odd) = sector_ground_energies(&spec)?;
                let even = analytic_sector_ground_energy(n, gamma, h, Parity::Even)?;
                let odd = analytic_sector_ground_energy(n, gamma, h, Parity::Odd)?;
                worst = worst
                    .max((dense_even - even).abs())
                    .max((dense_odd - odd).abs());
                checked += 1;
            }
        }
        // the largest crossing must sit at the factorizing field
        for &gamma in &[0.3, 0.6, 0.9] {
            let h_f = factorizing_field(gamma)?;
            let report = report_crossings(n, gamma, (0.0, 1.0), DEFAULT_BISECTION_TOL)?;
            if !report.agree {
                eprintln!("crossing disagreement at N = {n}, gamma = {gamma}");
                return Ok(EXIT_FAILURE);
            }
            if let Some(last) = report.dense.last() {
                if (last - h_f).abs() > 1e-6 {
                    eprintln!(
                        "largest crossing {last} off the factorizing field {h_f} at N = {n}, gamma = {gamma}"
                    );
                    return Ok(EXIT_FAILURE);
                }
            }
        }
    }
    println!(
        "validated {checked} sector-energy points up to N = {max_n}: max |dense - analytic| = {worst:.3e}"
    );
    println!("annotations: h_C = {CRITICAL_FIELD}, default prominence = {DEFAULT_PROMINENCE} bits");
    if worst > VALIDATION_TOL {
        eprintln!("validation failed: {worst:.3e} above {VALIDATION_TOL:.1e}");
        return Ok(EXIT_FAILURE);
    }
    println!("PASS");
    Ok(EXIT_OK)
}
