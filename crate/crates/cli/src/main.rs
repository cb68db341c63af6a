//! Command-line surface: validate mixing specs, emit PMF tables and figure
//! data, run oracle comparisons, and sample counts, with machine-readable
//! output and deterministic results for a fixed argv.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use poimix::{
    check_family, mc_estimate, pgf_coeffs, pgf_eval, pmf_closed, pmf_table, FamilySpec, Verdict,
};

/// Default mass tolerance for tables backing `sample`.
const TABLE_EPSILON: f64 = 1e-10;
/// Default index cap for tables backing `sample`.
const TABLE_CAP: usize = 100_000;

#[derive(Parser)]
#[command(
    name = "poimix",
    version,
    about = "Mixed Poisson distributions generated by real-valued mixing laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the existence gate and print the verdict as JSON
    Validate {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Print the count PMF for n = 0..=nmax
    Pmf {
        #[command(flatten)]
        family: FamilyArgs,
        /// Largest count index to emit
        #[arg(long, default_value_t = 30)]
        nmax: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the probability generating function at a point
    Pgf {
        #[command(flatten)]
        family: FamilyArgs,
        /// Evaluation point in [0, 1]
        #[arg(long)]
        z: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw counts by inversion sampling, one per line
    Sample {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the mass at a count, against the exact value
    /// where one exists
    Oracle {
        #[command(flatten)]
        family: FamilyArgs,
        /// Count index to estimate
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the mixing-law and count-PMF data behind the two reference
    /// figures (two-point and asymmetric Laplace mixtures)
    Figure {
        /// Which figure: 1 (two-point) or 2 (asymmetric Laplace)
        #[arg(long)]
        which: u8,
        /// Directory for the two CSV files
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    TwoPoint,
    AsymLaplace,
    Gaussian,
    ExtremeStable,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// two-point: magnitude of the negative atom (the atom sits at -a)
    #[arg(long)]
    a: Option<f64>,
    /// two-point: location of the positive atom
    #[arg(long)]
    b: Option<f64>,
    /// two-point / asym-laplace: probability of the negative component
    #[arg(long)]
    p: Option<f64>,
    /// asym-laplace: left tail rate
    #[arg(long)]
    lambda1: Option<f64>,
    /// asym-laplace: right tail rate
    #[arg(long)]
    lambda2: Option<f64>,
    /// gaussian: mean
    #[arg(long)]
    mu: Option<f64>,
    /// gaussian: variance
    #[arg(long)]
    sigma2: Option<f64>,
    /// extreme-stable: index in (0, 2]
    #[arg(long)]
    alpha: Option<f64>,
    /// extreme-stable: scale
    #[arg(long)]
    sigma: Option<f64>,
    /// extreme-stable: location
    #[arg(long)]
    delta: Option<f64>,
}

impl FamilyArgs {
    fn build(&self) -> Result<FamilySpec, String> {
        let (kind, wanted): (_, &[(&str, Option<f64>)]) = match self.family {
            FamilyKind::TwoPoint => ("two-point", &[("--a", self.a), ("--b", self.b), ("--p", self.p)]),
            FamilyKind::AsymLaplace => (
                "asym-laplace",
                &[
                    ("--lambda1", self.lambda1),
                    ("--lambda2", self.lambda2),
                    ("--p", self.p),
                ],
            ),
            FamilyKind::Gaussian => ("gaussian", &[("--mu", self.mu), ("--sigma2", self.sigma2)]),
            FamilyKind::ExtremeStable => (
                "extreme-stable",
                &[
                    ("--alpha", self.alpha),
                    ("--sigma", self.sigma),
                    ("--delta", self.delta),
                ],
            ),
        };
        let missing: Vec<&str> = wanted
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(name, _)| *name)
            .collect();
        if !missing.is_empty() {
            return Err(format!("{kind} requires {}", missing.join(", ")));
        }
        let all: [(&str, Option<f64>); 10] = [
            ("--a", self.a),
            ("--b", self.b),
            ("--p", self.p),
            ("--lambda1", self.lambda1),
            ("--lambda2", self.lambda2),
            ("--mu", self.mu),
            ("--sigma2", self.sigma2),
            ("--alpha", self.alpha),
            ("--sigma", self.sigma),
            ("--delta", self.delta),
        ];
        let stray: Vec<&str> = all
            .iter()
            .filter(|(name, v)| v.is_some() && !wanted.iter().any(|(w, _)| w == name))
            .map(|(name, _)| *name)
            .collect();
        if !stray.is_empty() {
            return Err(format!("{kind} does not take {}", stray.join(", ")));
        }
        let spec = match self.family {
            FamilyKind::TwoPoint => {
                FamilySpec::two_point(self.a.unwrap(), self.b.unwrap(), self.p.unwrap())
            }
            FamilyKind::AsymLaplace => FamilySpec::asym_laplace(
                self.lambda1.unwrap(),
                self.lambda2.unwrap(),
                self.p.unwrap(),
            ),
            FamilyKind::Gaussian => FamilySpec::gaussian(self.mu.unwrap(), self.sigma2.unwrap()),
            FamilyKind::ExtremeStable => FamilySpec::extreme_stable(
                self.alpha.unwrap(),
                self.sigma.unwrap(),
                self.delta.unwrap(),
            ),
        };
        spec.map_err(|e| e.to_string())
    }
}

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("invalid usage"));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

enum CliError {
    /// Malformed invocation: exit 2.
    Usage(String),
    /// The spec failed a gate or the operation failed: exit 1.
    Run(String),
}

impl From<poimix::Error> for CliError {
    fn from(e: poimix::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(format!("io: {e}"))
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Validate { family } => {
            let spec = family.build().map_err(CliError::Usage)?;
            let report = check_family(&spec);
            println!(
                "{}",
                serde_json::to_string(&report).expect("reports serialize")
            );
            Ok(if report.verdict == Verdict::Valid {
                0
            } else {
                EXIT_INVALID
            })
        }
        Command::Pmf {
            family,
            nmax,
            format,
            out,
        } => {
            let spec = family.build().map_err(CliError::Usage)?;
            let masses = pmf_values(&spec, nmax)?;
            let content = match format {
                Format::Csv => {
                    let mut s = String::from("n,pmf\n");
                    for (n, f) in masses.iter().enumerate() {
                        writeln!(s, "{n},{f:e}").expect("string write");
                    }
                    s
                }
                Format::Json => {
                    let ns: Vec<usize> = (0..masses.len()).collect();
                    let doc = json!({ "n": ns, "pmf": masses });
                    format!("{doc}\n")
                }
            };
            emit(out.as_deref(), &content)?;
            Ok(0)
        }
        Command::Pgf { family, z, out } => {
            let spec = family.build().map_err(CliError::Usage)?;
            let value = pgf_eval(&spec, z)?;
            emit(out.as_deref(), &format!("{}\n", json!({ "z": z, "value": value })))?;
            Ok(0)
        }
        Command::Sample {
            family,
            count,
            seed,
            out,
        } => {
            let spec = family.build().map_err(CliError::Usage)?;
            if count == 0 {
                return Err(CliError::Usage("--count must be at least 1".into()));
            }
            let table = pmf_table(&spec, TABLE_EPSILON, TABLE_CAP)?;
            let counts = table.sample_counts(seed, count)?;
            let mut content = String::with_capacity(count * 3);
            for y in counts {
                writeln!(content, "{y}").expect("string write");
            }
            emit(out.as_deref(), &content)?;
            Ok(0)
        }
        Command::Oracle {
            family,
            n,
            samples,
            seed,
            out,
        } => {
            let spec = family.build().map_err(CliError::Usage)?;
            let estimate = mc_estimate(&spec, n, samples, seed)?;
            let exact = exact_mass(&spec, n);
            let ratio = exact.map(|v| (estimate.value - v).abs() / estimate.stderr);
            let doc = json!({
                "value": estimate.value,
                "stderr": estimate.stderr,
                "samples": estimate.samples,
                "seed": estimate.seed,
                "n": estimate.n,
                "exact": exact,
                "abs_diff_over_stderr": ratio,
            });
            emit(out.as_deref(), &format!("{doc}\n"))?;
            Ok(0)
        }
        Command::Figure { which, out } => {
            let (mixing, pmf) = match which {
                1 => figure_two_point()?,
                2 => figure_asym_laplace()?,
                other => {
                    return Err(CliError::Usage(format!(
                        "--which must be 1 or 2, got {other}"
                    )))
                }
            };
            std::fs::create_dir_all(&out)?;
            let mixing_path = out.join(format!("figure{which}_mixing.csv"));
            let pmf_path = out.join(format!("figure{which}_pmf.csv"));
            std::fs::write(&mixing_path, mixing)?;
            std::fs::write(&pmf_path, pmf)?;
            println!("{}", mixing_path.display());
            println!("{}", pmf_path.display());
            Ok(0)
        }
    }
}

fn pmf_values(spec: &FamilySpec, nmax: usize) -> Result<Vec<f64>, CliError> {
    match spec {
        FamilySpec::TwoPoint { .. } | FamilySpec::AsymLaplace { .. } => (0..=nmax)
            .map(|n| pmf_closed(spec, n as u64).map_err(CliError::from))
            .collect(),
        _ => Ok(pgf_coeffs(spec, nmax)?.p),
    }
}

fn exact_mass(spec: &FamilySpec, n: u64) -> Option<f64> {
    match spec {
        FamilySpec::TwoPoint { .. } | FamilySpec::AsymLaplace { .. } => pmf_closed(spec, n).ok(),
        _ => pgf_coeffs(spec, n as usize).ok().map(|s| s.p[n as usize]),
    }
}

/// Two-point mixture at the reference parameters: atoms at -2 and 2 with
/// negative mass 0.009. The mixing panel is the two atoms themselves.
fn figure_two_point() -> Result<(String, String), CliError> {
    let spec = FamilySpec::two_point(2.0, 2.0, 0.009).unwrap();
    let mut mixing = String::from("x,mass\n");
    writeln!(mixing, "{:e},{:e}", -2.0, 0.009).expect("string write");
    writeln!(mixing, "{:e},{:e}", 2.0, 0.991).expect("string write");
    Ok((mixing, pmf_csv(&spec, 15)?))
}

/// Asymmetric Laplace mixture at the reference parameters: rates 2.3 / 0.3
/// with negative mass 0.058. The mixing panel is a 400-point density grid
/// on [-4, 12].
fn figure_asym_laplace() -> Result<(String, String), CliError> {
    let (lambda1, lambda2, p) = (2.3, 0.3, 0.058);
    let spec = FamilySpec::asym_laplace(lambda1, lambda2, p).unwrap();
    let mut mixing = String::from("x,density\n");
    for i in 0..400 {
        let x = -4.0 + 16.0 * i as f64 / 399.0;
        let density = if x < 0.0 {
            p * lambda1 * (lambda1 * x).exp()
        } else {
            (1.0 - p) * lambda2 * (-lambda2 * x).exp()
        };
        writeln!(mixing, "{x:e},{density:e}").expect("string write");
    }
    Ok((mixing, pmf_csv(&spec, 30)?))
}

fn pmf_csv(spec: &FamilySpec, nmax: usize) -> Result<String, CliError> {
    let mut csv = String::from("n,pmf\n");
    for (n, f) in pmf_values(spec, nmax)?.iter().enumerate() {
        writeln!(csv, "{n},{f:e}").expect("string write");
    }
    Ok(csv)
}

fn emit(out: Option<&Path>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
