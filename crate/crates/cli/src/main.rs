use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dgaf_core::report::BoundReport;
use serde::Serialize;

mod suites;

const DEFAULT_SEED: u64 = 20_240_401;

#[derive(Parser, Debug)]
#[command(name = "dgaf")]
#[command(about = "Verification suites for coupled Dirichlet-space Gaussian analytic functions")]
#[command(version)]
struct Cli {
    /// Seed for every random stream of the run
    #[arg(long, global = true, env = "DGAF_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Series bound, circle-mean bound and fundamental integral estimate
    Bounds(BoundsArgs),
    /// Chase permutation: closed form, argmax, diagonal sums and series estimate
    Chase(ChaseArgs),
    /// Grunsky symbol, matrix, wave-equation residual and reconstruction of a map
    Grunsky(GrunskyArgs),
    /// Symbols of contractions: frames, transfer and Möbius identity
    Symbols(SymbolsArgs),
    /// Sampling contracts, covariance PSD checks and the triangle bound for one coupling
    Gaf(GafArgs),
    /// Log-characteristic polynomial of Haar unitaries against the limit kernel
    Cue(CueArgs),
    /// Diagonal norm expansion, combinatorial identity and Littlewood-Paley
    Expansion(ExpansionArgs),
    /// Greedy mock-Bloch construction
    Mockbloch(MockBlochArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Independent,
    Identical,
    ConjugateReflect,
    Permutation,
    Contraction,
    Sesquianalytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsSuite {
    Series,
    Circle,
    Fundamental,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value_t = BoundsSuite::All)]
    pub suite: BoundsSuite,
    #[arg(long, value_enum, default_value_t = ModeArg::Contraction)]
    pub mode: ModeArg,
    /// Use the Chase permutation of this base (permutation mode)
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long, visible_alias = "n", default_value_t = 256)]
    pub trunc: usize,
    /// Random instances for the random modes
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long = "s-grid", visible_alias = "s", value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    #[arg(long = "r-grid", visible_alias = "r", value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChaseMode {
    Formula,
    Argmax,
    Sums,
    Series,
}

#[derive(Args, Debug, Serialize)]
pub struct ChaseArgs {
    #[arg(long, default_value_t = 29)]
    pub d: u64,
    #[arg(long, value_enum, default_value_t = ChaseMode::Formula)]
    pub mode: ChaseMode,
    #[arg(long = "m-max", default_value_t = 5)]
    pub m_max: u32,
    #[arg(long = "r-grid", visible_alias = "r", value_delimiter = ',')]
    pub r_grid: Option<Vec<f64>>,
    /// Argmax search range
    #[arg(long, default_value_t = 3)]
    pub lo: u64,
    #[arg(long, default_value_t = 200)]
    pub hi: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrunskyCheck {
    Invariants,
    Matrix,
    Diagonal,
    Residual,
    Roundtrip,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct GrunskyArgs {
    /// identity, koebe, cayley:<c> or poly:<a_2>,<a_3>,...
    #[arg(long, default_value = "koebe")]
    pub map: String,
    #[arg(long, visible_alias = "n", default_value_t = 24)]
    pub trunc: usize,
    #[arg(long, value_enum, default_value_t = GrunskyCheck::All)]
    pub check: GrunskyCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolsSuite {
    Systems,
    Transfer,
    Mobius,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct SymbolsArgs {
    #[arg(long, value_enum, default_value_t = SymbolsSuite::All)]
    pub suite: SymbolsSuite,
    #[arg(long, visible_alias = "n", default_value_t = 16)]
    pub trunc: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Largest |a| of the random Möbius maps
    #[arg(long, default_value_t = 0.4)]
    pub radius: f64,
    /// Working order of the Möbius conjugation
    #[arg(long = "working-order")]
    pub working_order: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct GafArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Contraction)]
    pub mode: ModeArg,
    #[arg(long, visible_alias = "n", default_value_t = 16)]
    pub trunc: usize,
    /// Monte Carlo draws
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    /// Coefficient indices probed by the contract check
    #[arg(long, default_value_t = 4)]
    pub probe: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct CueArgs {
    /// Matrix size
    #[arg(long, visible_alias = "n", default_value_t = 64)]
    pub trunc: usize,
    /// Haar samples
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    /// Radii of the evaluation points (each used on the real and imaginary axis)
    #[arg(long = "r-grid", visible_alias = "r", value_delimiter = ',', default_values_t = vec![0.0, 0.3, 0.6])]
    pub r_grid: Vec<f64>,
    /// Absolute tolerance against the limit kernel
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionSuite {
    Diagonal,
    Combinatorial,
    LittlewoodPaley,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct ExpansionArgs {
    #[arg(long, value_enum, default_value_t = ExpansionSuite::All)]
    pub suite: ExpansionSuite,
    /// Random polynomials
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Largest degree in each variable
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    #[arg(long = "n-max", default_value_t = 20)]
    pub n_max: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct MockBlochArgs {
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Growth multipliers, in sharpening order
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 3.0, 4.0])]
    pub multiplier: Vec<f64>,
    /// Taylor order of f, g and fg
    #[arg(long, default_value_t = 64)]
    pub order: usize,
    /// Lower bound the last level must exceed under the sharpest policy
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,
}

fn resolved<T: Serialize>(report: &mut BoundReport, args: &T) {
    if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(args) {
        for (k, v) in map {
            report.params.entry(k).or_insert(v);
        }
    }
}

fn run(cli: &Cli) -> Result<BoundReport> {
    let seed = cli.seed;
    let mut report = match &cli.command {
        Command::Bounds(a) => {
            let mut r = suites::bounds(a, seed)?;
            resolved(&mut r, a);
            r
        }
        Command::Chase(a) => {
            let mut r = suites::chase(a)?;
            resolved(&mut r, a);
            r
        }
        Command::Grunsky(a) => {
            let mut r = suites::grunsky(a)?;
            resolved(&mut r, a);
            r
        }
        Command::Symbols(a) => {
            let mut r = suites::symbols(a, seed)?;
            resolved(&mut r, a);
            r
        }
        Command::Gaf(a) => {
            let mut r = suites::gaf(a, seed)?;
            resolved(&mut r, a);
            r
        }
        Command::Cue(a) => {
            let mut r = suites::cue(a, seed)?;
            resolved(&mut r, a);
            r
        }
        Command::Expansion(a) => {
            let mut r = suites::expansion(a, seed)?;
            resolved(&mut r, a);
            r
        }
        Command::Mockbloch(a) => {
            let mut r = suites::mockbloch(a)?;
            resolved(&mut r, a);
            r
        }
    };
    report.seed = Some(seed);
    Ok(report)
}

fn render(report: &BoundReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(report)?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            match &report.table {
                Some(t) => {
                    w.write_record(&t.columns)?;
                    for row in &t.rows {
                        w.write_record(row.iter().map(|x| x.to_string()))?;
                    }
                }
                None => {
                    w.write_record(["label", "lhs", "rhs", "margin", "pass", "tol"])?;
                    for c in &report.checks {
                        w.write_record([
                            c.label.clone(),
                            c.lhs.to_string(),
                            c.rhs.to_string(),
                            c.margin.to_string(),
                            c.pass.to_string(),
                            c.tol.to_string(),
                        ])?;
                    }
                }
            }
            Ok(w.into_inner()?)
        }
    }
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = render(&report, cli.format).and_then(|b| emit(&b, cli.out.as_deref())) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let failed = report.failures().count();
    eprintln!(
        "{}: {} checks, {} failed",
        report.suite,
        report.checks.len(),
        failed
    );
    for c in report.failures().take(10) {
        eprintln!("  FAIL {}: lhs {} rhs {} margin {:e}", c.label, c.lhs, c.rhs, c.margin);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
