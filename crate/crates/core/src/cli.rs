//! Command-line front end. The `tdesign` binary only calls [`main`].
//!
//! Exit codes: 0 on success, 2 for invalid input or parameters, 3 for
//! singular input (coincident or antipodal points where an energy or split
//! is undefined), 1 for internal failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{
    fit_residual_exponent, linear_fit, predict_log_energy, predict_riesz_energy, sweep, FitResult,
    LinearFit, PointSource, SweepConfig, SweepRange, SweepRecord,
};
use crate::cache::{cached_kernel_coefficients, design_header, CACHE_DIR_ENV};
use crate::designs::{construct_design, verify_design, ConstructOptions, StepRule, VerifyOptions};
use crate::energy::{
    energy, kernel_split_energy, with_threads, EnergyKind, EnergyMethod, EnergyOptions,
    EnergyReport, SplitEnergy, SumOptions,
};
use crate::error::{invalid, Error, Result};
use crate::geom::{load_point_set, write_point_set};

#[derive(Debug, Parser)]
#[command(name = "tdesign", version, about = "Energies and designs on spheres")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Fixed-order reductions: bit-identical results for any thread count
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// Output format; kernel and sweep default to csv, everything else to json
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Cache directory for kernel tables and constructed designs
    /// (falls back to $TDESIGN_CACHE_DIR)
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Log,
    Riesz,
}

#[derive(Debug, Args)]
pub struct KindArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Riesz exponent
    #[arg(long)]
    pub s: Option<f64>,
}

impl KindArgs {
    fn kind(&self) -> Result<EnergyKind> {
        match (self.kind, self.s) {
            (KindArg::Log, None) => Ok(EnergyKind::Log),
            (KindArg::Log, Some(_)) => Err(invalid("--s only applies to --kind riesz")),
            (KindArg::Riesz, Some(s)) => Ok(EnergyKind::Riesz { s }),
            (KindArg::Riesz, None) => Err(invalid("--kind riesz needs --s")),
        }
    }
}

#[derive(Debug, Args)]
pub struct PointFile {
    /// Point-set file: one point per line, d+1 coordinates
    #[arg(long)]
    pub file: PathBuf,
    /// Sphere dimension
    #[arg(long)]
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Lbfgs,
    Bb,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Constructed,
    Files,
    Fibonacci,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMode {
    /// Exponent of |residual| against N in log-log space
    Power,
    /// Slope of residual/N² against log N
    Trend,
    /// Slope of measured/leading against log N
    Ratio,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy of a point set
    Energy {
        #[command(flatten)]
        kind: KindArgs,
        #[command(flatten)]
        points: PointFile,
        #[arg(long, value_enum, default_value = "direct")]
        method: MethodArg,
        /// Jacobi parameter for --method split (default s+2, or d+3 for log)
        #[arg(long)]
        lambda: Option<f64>,
        /// Split degree for --method split
        #[arg(long, default_value_t = 10)]
        t: usize,
        /// Series truncation degree for --method split
        #[arg(long, default_value_t = 2000)]
        nmax: usize,
    },
    /// Certify a point set as a t-design
    Verify {
        #[command(flatten)]
        points: PointFile,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = crate::designs::DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Random monomials in the cross-check
        #[arg(long, default_value_t = 32)]
        spot_monomials: usize,
    },
    /// Construct a well-separated approximate t-design
    Construct {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: usize,
        /// Point count (default ceil(c (t+1)^d) with c = --point-factor)
        #[arg(long = "N", alias = "n")]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        point_factor: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        options: ConstructArgs,
        /// Where to write the constructed points
        #[arg(long)]
        points_out: Option<PathBuf>,
    },
    /// Tabulate head, tail and closed form of a kernel series
    Kernel {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 2000)]
        nmax: usize,
        /// Number of interior grid points in (-1, 1)
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Asymptotic prediction for a design's energy
    Predict {
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        d: usize,
        #[arg(long = "N", alias = "n")]
        n: usize,
        #[arg(long)]
        t: Option<usize>,
    },
    /// Measured against predicted energies over a range of sizes
    Sweep {
        #[arg(long)]
        d: usize,
        /// Comma-separated kinds: log, riesz:<s>
        #[arg(long, value_delimiter = ',', default_value = "log")]
        kinds: Vec<String>,
        #[arg(long, value_enum, default_value = "constructed")]
        source: SourceArg,
        /// Strengths, e.g. 2..14 or 2,4,8
        #[arg(long)]
        t_range: Option<String>,
        /// Point counts, e.g. 100,200,400 or 100..400..100
        #[arg(long)]
        n_range: Option<String>,
        /// Path template with {t} or {N} for --source files
        #[arg(long)]
        template: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        point_factor: f64,
        #[command(flatten)]
        options: ConstructArgs,
    },
    /// Fit sweep records
    Fit {
        /// Sweep output (csv or json)
        #[arg(long)]
        input: PathBuf,
        /// Only records of this kind: log or riesz:<s>
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_enum, default_value = "power")]
        mode: FitMode,
    },
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long, default_value_t = crate::designs::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1e-14)]
    pub polish_target: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 2_000)]
    pub spread_iters: usize,
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
    /// c in the separation goal c N^{-1/d}
    #[arg(long, default_value_t = 1.0)]
    pub separation_target: f64,
    #[arg(long, default_value_t = 1.0)]
    pub separation_weight: f64,
    #[arg(long, value_enum, default_value = "lbfgs")]
    pub rule: RuleArg,
    /// Step for --rule fixed, memory for --rule lbfgs
    #[arg(long)]
    pub step: Option<f64>,
}

impl ConstructArgs {
    fn options(&self, deterministic: bool) -> ConstructOptions {
        let rule = match self.rule {
            RuleArg::Lbfgs => StepRule::Lbfgs {
                memory: self.step.map_or(20, |m| m.max(1.0) as usize),
            },
            RuleArg::Bb => StepRule::BarzilaiBorwein,
            RuleArg::Fixed => StepRule::Fixed {
                step: self.step.unwrap_or(0.1),
            },
        };
        ConstructOptions {
            tolerance: self.tolerance,
            polish_target: self.polish_target,
            max_iters: self.max_iters,
            spread_iters: self.spread_iters,
            rule,
            separation_target: self.separation_target,
            separation_weight: self.separation_weight,
            restarts: self.restarts,
            deterministic,
        }
    }
}

/// Runs the CLI on the process arguments.
pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()) as u8)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match with_threads(config.threads, || execute(&config)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Singular(_) | Error::AntipodalPair { .. } => 3,
        Error::Consistency(_) | Error::Quadrature { .. } | Error::RootFinding(_) => 1,
        _ => 2,
    }
}

#[derive(Serialize)]
struct EnergyOutput {
    #[serde(flatten)]
    report: EnergyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    split: Option<SplitEnergy>,
}

#[derive(Serialize)]
struct KernelRow {
    x: f64,
    head: f64,
    tail: f64,
    sum: f64,
    exact: f64,
    remainder_estimate: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitOutput {
    Power(FitResult),
    Line(LinearFit),
}

fn execute(config: &RunConfig) -> Result<()> {
    let sum = if config.deterministic {
        SumOptions::deterministic()
    } else {
        SumOptions::default()
    };
    let cache_dir = config
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from));
    let out = Output {
        path: config.output.clone(),
    };
    match &config.command {
        Command::Energy {
            kind,
            points,
            method,
            lambda,
            t,
            nmax,
        } => {
            let kind = kind.kind()?;
            let set = load_point_set(&points.file, points.d)?;
            let opts = EnergyOptions {
                sum,
                allow_empty: false,
            };
            let mut report = energy(&set, kind, opts)?;
            let mut split = None;
            if *method == MethodArg::Split {
                let lambda = lambda.unwrap_or_else(|| kind.default_lambda(points.d));
                let table = cached_kernel_coefficients(
                    cache_dir.as_deref(),
                    kind,
                    lambda,
                    points.d,
                    *nmax,
                )?;
                let parts = kernel_split_energy(&set, &table, *t, sum)?;
                report.value = parts.total();
                report.method = EnergyMethod::KernelSplit {
                    lambda,
                    t: *t,
                    nmax: *nmax,
                };
                split = Some(parts);
            }
            match config.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&EnergyOutput { report, split }),
                Format::Csv => out.csv(&EnergyReport::CSV_HEADER, [report.csv_record()]),
            }
        }
        Command::Verify {
            points,
            t,
            tolerance,
            spot_monomials,
        } => {
            require_json(config.format, "verify")?;
            let set = load_point_set(&points.file, points.d)?;
            let cert = verify_design(
                &set,
                *t,
                *tolerance,
                VerifyOptions {
                    sum,
                    spot_monomials: *spot_monomials,
                    ..Default::default()
                },
            )?;
            out.json(&cert)
        }
        Command::Construct {
            d,
            t,
            n,
            point_factor,
            seed,
            options,
            points_out,
        } => {
            require_json(config.format, "construct")?;
            let n = n.unwrap_or_else(|| crate::designs::default_point_count(*d, *t, *point_factor));
            let outcome = construct_design(
                *d,
                *t,
                Some(n),
                *seed,
                options.options(config.deterministic),
            )?;
            if let Some(path) = points_out {
                write_point_set(path, outcome.points(), &design_header(&outcome))?;
            }
            out.json(&outcome)
        }
        Command::Kernel {
            kind,
            d,
            lambda,
            t,
            nmax,
            grid,
        } => {
            let kind = kind.kind()?;
            if *grid == 0 {
                return Err(invalid("--grid must be positive"));
            }
            let lambda = lambda.unwrap_or_else(|| kind.default_lambda(*d));
            let table = cached_kernel_coefficients(cache_dir.as_deref(), kind, lambda, *d, *nmax)?;
            let rows = (0..*grid)
                .map(|k| {
                    let x = -1.0 + 2.0 * (k + 1) as f64 / (*grid + 1) as f64;
                    let head = table.head(*t, x)?;
                    let tail = table.tail_with_estimate(*t, x)?;
                    Ok(KernelRow {
                        x,
                        head,
                        tail: tail.value,
                        sum: head + tail.value,
                        exact: kind.exact(x),
                        remainder_estimate: tail.remainder_estimate,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match config.format.unwrap_or(Format::Csv) {
                Format::Json => out.json(&rows),
                Format::Csv => out.csv(
                    &["x", "head", "tail", "sum", "exact", "remainder_estimate"],
                    rows.iter().map(|r| {
                        [r.x, r.head, r.tail, r.sum, r.exact, r.remainder_estimate]
                            .map(|v| v.to_string())
                            .to_vec()
                    }),
                ),
            }
        }
        Command::Predict { kind, d, n, t } => {
            let kind = kind.kind()?;
            let p = match kind {
                EnergyKind::Log => predict_log_energy(*d, *n)?,
                EnergyKind::Riesz { s } => predict_riesz_energy(*d, s, *n, *t)?,
            };
            match config.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&p),
                Format::Csv => {
                    let (k, s) = crate::energy::kind_fields(&p.kind);
                    out.csv(
                        &[
                            "N",
                            "d",
                            "t",
                            "kind",
                            "s",
                            "leading",
                            "second",
                            "predicted",
                            "remainder_order",
                            "bound_only",
                        ],
                        [vec![
                            p.n.to_string(),
                            p.d.to_string(),
                            p.t.map(|t| t.to_string()).unwrap_or_default(),
                            k,
                            s,
                            p.leading_term.to_string(),
                            p.second_term.to_string(),
                            p.predicted.to_string(),
                            p.remainder_order.clone(),
                            p.bound_only.to_string(),
                        ]],
                    )
                }
            }
        }
        Command::Sweep {
            d,
            kinds,
            source,
            t_range,
            n_range,
            template,
            seed,
            point_factor,
            options,
        } => {
            let kinds = kinds
                .iter()
                .map(|k| parse_kind(k))
                .collect::<Result<Vec<_>>>()?;
            let range = match (t_range, n_range) {
                (Some(t), None) => SweepRange::Strengths(parse_range(t)?),
                (None, Some(n)) => SweepRange::Counts(parse_range(n)?),
                _ => return Err(invalid("give exactly one of --t-range and --n-range")),
            };
            let source = match source {
                SourceArg::Constructed => PointSource::Constructed {
                    seed: *seed,
                    options: options.options(config.deterministic),
                },
                SourceArg::Files => PointSource::Files {
                    template: template
                        .clone()
                        .ok_or_else(|| invalid("--source files needs --template"))?,
                },
                SourceArg::Fibonacci => PointSource::Fibonacci,
                SourceArg::Random => PointSource::Random { seed: *seed },
            };
            let mut cfg = SweepConfig::new(*d, kinds, source, range);
            cfg.point_factor = *point_factor;
            cfg.energy = EnergyOptions {
                sum,
                allow_empty: false,
            };
            cfg.cache_dir = cache_dir;
            let records = sweep(&cfg)?;
            match config.format.unwrap_or(Format::Csv) {
                Format::Json => out.json(&records),
                Format::Csv => out.csv(
                    &SweepRecord::CSV_HEADER,
                    records.iter().map(SweepRecord::csv_record),
                ),
            }
        }
        Command::Fit { input, kind, mode } => {
            let mut records = read_records(input)?;
            if let Some(k) = kind {
                let (name, s) = crate::energy::kind_fields(&parse_kind(k)?);
                let s = s.parse::<f64>().ok();
                records.retain(|r| r.kind == name && r.s == s);
            }
            records.retain(|r| r.error.is_none());
            let fit = match mode {
                FitMode::Power => FitOutput::Power(fit_residual_exponent(&records)?),
                FitMode::Trend | FitMode::Ratio => {
                    let pts: Vec<(f64, f64)> = records
                        .iter()
                        .filter_map(|r| {
                            let y = match mode {
                                FitMode::Trend => r.residual? / (r.n as f64).powi(2),
                                _ => r.normalized()?,
                            };
                            Some(((r.n as f64).ln(), y))
                        })
                        .collect();
                    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                    FitOutput::Line(linear_fit(&xs, &ys)?)
                }
            };
            match config.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&fit),
                Format::Csv => {
                    let row = match &fit {
                        FitOutput::Power(f) => {
                            vec![f.exponent, f.intercept, f.r_squared, f.records as f64]
                        }
                        FitOutput::Line(f) => {
                            vec![f.slope, f.intercept, f.r_squared, f.count as f64]
                        }
                    };
                    out.csv(
                        &["slope", "intercept", "r_squared", "records"],
                        [row.iter().map(f64::to_string).collect()],
                    )
                }
            }
        }
    }
}

fn require_json(format: Option<Format>, cmd: &str) -> Result<()> {
    match format {
        Some(Format::Csv) => Err(invalid(format!("{cmd} only emits json"))),
        _ => Ok(()),
    }
}

/// `log` or `riesz:<s>`.
pub fn parse_kind(text: &str) -> Result<EnergyKind> {
    let text = text.trim();
    if text == "log" {
        return Ok(EnergyKind::Log);
    }
    match text.strip_prefix("riesz:").map(str::parse::<f64>) {
        Some(Ok(s)) => Ok(EnergyKind::Riesz { s }),
        _ => Err(invalid(format!(
            "unknown energy kind '{text}' (use log or riesz:<s>)"
        ))),
    }
}

/// `a..b` (inclusive), `a..b..step`, or a comma-separated list.
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = || invalid(format!("cannot parse range '{text}'"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = text.split("..").collect();
    let values = match parts.as_slice() {
        [list] => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?,
        [a, b] => (num(a)?..=num(b)?).collect(),
        [a, b, step] => {
            let step = num(step)?;
            if step == 0 {
                return Err(bad());
            }
            (num(a)?..=num(b)?).step_by(step).collect()
        }
        _ => return Err(bad()),
    };
    if values.is_empty() {
        return Err(invalid(format!("range '{text}' is empty")));
    }
    Ok(values)
}

fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn write(&self, bytes: &[u8]) -> Result<()> {
        let io = |source| Error::Io {
            path: self
                .path
                .clone()
                .unwrap_or_else(|| PathBuf::from("<stdout>")),
            source,
        };
        match &self.path {
            Some(p) => std::fs::write(p, bytes).map_err(io),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(bytes)
                    .and_then(|_| stdout.flush())
                    .map_err(io)
            }
        }
    }

    fn json<T: Serialize + ?Sized>(&self, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(&bytes)
    }

    fn csv<I: IntoIterator<Item = Vec<String>>>(&self, header: &[&str], rows: I) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
        self.write(&bytes)
    }
}
