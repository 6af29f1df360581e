mod expr;
mod mahler_cmd;
mod ring;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lavec_core::analytic::experiments::{self, EXPERIMENTS};
use lavec_core::analytic::report::RunConfig;
use lavec_core::analytic::{witness_search, GroupContext, WitnessSearch, GROUP_PRECISION};
use lavec_core::mahler::AnyMahler;
use lavec_core::module::{SeriesModule, WittModule};
use lavec_core::rational::{parse_q, Q};
use lavec_core::Error;
use serde::Serialize;

use ring::{Mode, Ring, Value};

#[derive(Parser, Debug)]
#[command(name = "lavec", version, about = "Locally analytic vectors: ring calculator, Mahler tools and experiments")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Run configuration. Flags override values read from `--config`.
#[derive(clap::Args, Debug)]
struct Opts {
    /// TOML file with `RunConfig` keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// The prime p (default 2).
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Series cap `B`, an exact rational.
    #[arg(long, global = true)]
    cap: Option<String>,
    /// Witt vector length n.
    #[arg(long, global = true)]
    witt_length: Option<usize>,
    /// Mahler degree `N`.
    #[arg(long, global = true)]
    degree: Option<u64>,
    /// Comma-separated rationals or `lo:hi:step` ranges.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    lambda_grid: Option<Vec<String>>,
    /// Comma-separated group levels l.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    /// Sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Samples per experiment.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output format; the default depends on the command.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; a directory for `experiment`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate an expression over X, T, [·], phi, phiinv, gamma(a, ·).
    Ring {
        /// Work in W_n(Ẽ) with n = --witt-length instead of Ẽ.
        #[arg(long)]
        witt: bool,
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Search the configured levels and λ grid for an analyticity witness.
    Witness {
        #[arg(long)]
        witt: bool,
        /// `r` in the Witt valuation.
        #[arg(long, default_value = "1")]
        r: String,
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Mahler coefficient tooling.
    Mahler {
        #[command(subcommand)]
        op: MahlerOp,
    },
    /// Run a named experiment and write its JSON and CSV reports.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        name: String,
    },
}

#[derive(Subcommand, Debug)]
enum MahlerOp {
    /// Coefficients of an integer-valued expression in x, y, z.
    Coeffs {
        expr: String,
        /// p-adic precision of the values.
        #[arg(long, default_value_t = 32)]
        precision: u32,
    },
    /// Evaluate a stored expansion at integers or `r+O(p^N)` points.
    Eval {
        file: PathBuf,
        /// Put negative points after `--`.
        point: Vec<String>,
    },
    /// Compare the coefficient and difference criteria at (λ, μ).
    Check {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
    },
    /// Restrict a stored expansion to p^l Z_p^d.
    Restrict {
        file: PathBuf,
        #[arg(long)]
        level: u32,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Properties(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Properties(_) => 1,
            Failure::Core(e) if e.is_precision() => 3,
            Failure::Core(_) | Failure::Usage(_) => 2,
        }
    }

    fn record(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Core(e) => (e.kind().to_string(), e.to_string()),
            Failure::Usage(m) => ("Usage".into(), m.clone()),
            Failure::Properties(f) => ("PropertyFailure".into(), f.join("; ")),
        };
        serde_json::json!({ "status": "error", "exit_code": self.code(), "kind": kind, "message": message })
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load_config(opts: &Opts) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match &opts.config {
        Some(path) => {
            let text = read(path)?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = opts.prime {
        cfg.prime = v;
    }
    if let Some(v) = &opts.cap {
        cfg.cap = v.clone();
    }
    if let Some(v) = opts.witt_length {
        cfg.witt_length = v;
    }
    if let Some(v) = opts.degree {
        cfg.degree = v;
    }
    if let Some(v) = &opts.lambda_grid {
        cfg.lambda_grid = v.clone();
    }
    if let Some(v) = &opts.levels {
        cfg.levels = v.clone();
    }
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if let Some(v) = opts.samples {
        cfg.samples = v;
    }
    // Validate everything up front so bad input is a usage error.
    cfg.prime()?;
    cfg.cap()?;
    cfg.lambdas()?;
    if cfg.witt_length == 0 {
        return Err(Failure::Usage("witt_length must be at least 1".into()));
    }
    Ok(cfg)
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Outcome {
    std::fs::write(path, body).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(opts: &Opts, body: &str) -> Outcome {
    match &opts.out {
        Some(path) => write(path, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn no_csv(what: &str) -> Failure {
    Failure::Usage(format!("csv output is not available for `{what}`"))
}

fn ring_of(cfg: &RunConfig, witt: bool) -> std::result::Result<Ring, Failure> {
    let mode = if witt { Mode::Witt(cfg.witt_length) } else { Mode::Series };
    Ok(Ring { p: cfg.prime()?, cap: cfg.cap()?, mode })
}

fn cmd_ring(opts: &Opts, cfg: &RunConfig, witt: bool, src: &str) -> Outcome {
    let ring = ring_of(cfg, witt)?;
    let value = ring.eval(&expr::parse(src)?)?;
    let body = match opts.format.unwrap_or(Format::Text) {
        Format::Text => value.pretty() + "\n",
        Format::Json => json(&serde_json::json!({
            "schema": "lavec.ring/1",
            "prime": cfg.prime,
            "cap": cfg.cap,
            "kind": value.kind(),
            "value": value.canonical(),
            "pretty": value.pretty(),
        })),
        Format::Csv => return Err(no_csv("ring")),
    };
    emit(opts, &body)
}

#[derive(Serialize)]
struct WitnessOut<'a> {
    schema: &'static str,
    element: String,
    config: &'a RunConfig,
    #[serde(flatten)]
    search: WitnessSearch,
}

fn cmd_witness(opts: &Opts, cfg: &RunConfig, witt: bool, r: &str, src: &str) -> Outcome {
    let ring = ring_of(cfg, witt)?;
    let p = ring.p;
    let contexts: Vec<GroupContext> =
        cfg.levels.iter().map(|&l| GroupContext::standard(p, l, GROUP_PRECISION)).collect();
    let grid = cfg.lambdas()?;
    let value = ring.eval(&expr::parse(src)?)?;
    let search = match &value {
        Value::Series(f) => witness_search(&SeriesModule::new(p, ring.cap), f, &contexts, &grid, cfg.degree)?,
        Value::Witt(w) => {
            let module = WittModule::new(p, w.len(), ring.cap, parse_q(r)?)?;
            witness_search(&module, w, &contexts, &grid, cfg.degree)?
        }
        Value::Num(_) => return Err(Failure::Usage("a constant has every witness; give a ring element".into())),
    };
    let out = WitnessOut { schema: "lavec.witness/1", element: value.canonical(), config: cfg, search };
    let body = match opts.format.unwrap_or(Format::Text) {
        Format::Json => json(&out),
        Format::Csv => return Err(no_csv("witness")),
        Format::Text => {
            let mut s = format!("element {}\n", value.pretty());
            for scan in &out.search.scans {
                s += &format!("level {}: best λ {}\n", scan.level, scan.best_lambda.as_deref().unwrap_or("none"));
            }
            match &out.search.witness {
                Some(w) => s += &format!("witness: level {}, λ = {}, μ = {}, N = {}\n", w.level, w.lambda, w.mu, w.checked_up_to),
                None => s += "no witness on the grid\n",
            }
            s
        }
    };
    emit(opts, &body)
}

fn load_mahler(path: &Path) -> std::result::Result<AnyMahler, Failure> {
    Ok(AnyMahler::from_json(&read(path)?)?)
}

fn mahler_out(opts: &Opts, f: &AnyMahler) -> Outcome {
    let body = match opts.format.unwrap_or(Format::Json) {
        Format::Json => f.to_json() + "\n",
        Format::Text => mahler_cmd::text(f),
        Format::Csv => return Err(no_csv("mahler")),
    };
    emit(opts, &body)
}

fn cmd_mahler(opts: &Opts, cfg: &RunConfig, op: &MahlerOp) -> Outcome {
    match op {
        MahlerOp::Coeffs { expr: src, precision } => {
            let f = mahler_cmd::coeffs(cfg.prime()?, *precision, &expr::parse(src)?, cfg.degree)?;
            mahler_out(opts, &f)
        }
        MahlerOp::Restrict { file, level } => mahler_out(opts, &mahler_cmd::restrict(&load_mahler(file)?, *level)?),
        MahlerOp::Eval { file, point } => {
            let v = mahler_cmd::eval(&load_mahler(file)?, point)?;
            let body = match opts.format.unwrap_or(Format::Text) {
                Format::Text => v + "\n",
                Format::Json => json(&serde_json::json!({ "point": point, "value": v })),
                Format::Csv => return Err(no_csv("mahler eval")),
            };
            emit(opts, &body)
        }
        MahlerOp::Check { file, lambda, mu } => {
            let (lambda, mu): (Q, Q) = (parse_q(lambda)?, parse_q(mu)?);
            let r = mahler_cmd::check(&load_mahler(file)?, &lambda, &mu)?;
            let body = match opts.format.unwrap_or(Format::Json) {
                Format::Json => json(&r),
                Format::Text => format!("cond1 {}\ncond2 {}\n", r.cond1, r.cond2),
                Format::Csv => return Err(no_csv("mahler check")),
            };
            emit(opts, &body)
        }
    }
}

fn cmd_experiment(opts: &Opts, cfg: &RunConfig, name: &str) -> Outcome {
    let report = experiments::run(name, cfg)?;
    if let Some(dir) = &opts.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        write(&dir.join(format!("{name}.json")), &report.to_json())?;
        write(&dir.join(format!("{name}.csv")), &report.to_csv())?;
    }
    print!(
        "{}",
        match opts.format.unwrap_or(Format::Text) {
            Format::Json => report.to_json(),
            Format::Csv => report.to_csv(),
            Format::Text => report.to_text(),
        }
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Properties(report.failures.clone()))
    }
}

fn run(cli: &Cli) -> Outcome {
    let cfg = load_config(&cli.opts)?;
    match &cli.cmd {
        Cmd::Ring { witt, expr } => cmd_ring(&cli.opts, &cfg, *witt, expr),
        Cmd::Witness { witt, r, expr } => cmd_witness(&cli.opts, &cfg, *witt, r, expr),
        Cmd::Mahler { op } => cmd_mahler(&cli.opts, &cfg, op),
        Cmd::Experiment { name } => cmd_experiment(&cli.opts, &cfg, name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.code())
        }
    }
}
