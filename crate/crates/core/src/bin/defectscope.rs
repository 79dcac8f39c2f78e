use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Rational64;

use defectscope::commands::{self, Output, Overrides};
use defectscope::fields::FieldMode;
use defectscope::quadrature::QuadratureLevel;
use defectscope::rates::QExponent;
use defectscope::{spec, Error};

#[derive(Parser)]
#[command(name = "defectscope", version, about = "Defect analysis for tangent fields on charted surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geometry summary and Gauss-Bonnet residual.
    Analyze(Common),
    /// Itemized conservation law for the field.
    Check(Common),
    /// Per-site divergence rates.
    Rates(Common),
    /// Minimal-rate defect configurations.
    Predict(Common),
    /// Energy divergence sweep around one defect.
    Energy(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    spec: PathBuf,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the table as CSV here (rates, energy).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<FieldMode>,
    /// Search bound B, e.g. 2 or 3/2.
    #[arg(long, value_parser = parse_bound)]
    bound: Option<Rational64>,
    #[arg(long)]
    mod_symmetry: bool,
    #[arg(long, value_parser = parse_exponent)]
    q_exponent: Option<QExponent>,
    #[arg(long, value_parser = parse_level)]
    quadrature: Option<QuadratureLevel>,
    /// Extra levels above the minimum to report.
    #[arg(long)]
    levels: Option<usize>,
    /// Also print the JSON report.
    #[arg(long)]
    verbose: bool,
}

fn parse_mode(s: &str) -> Result<FieldMode, String> {
    FieldMode::parse(s).ok_or_else(|| "expected vector or director".into())
}

fn parse_bound(s: &str) -> Result<Rational64, String> {
    let b: Rational64 = s.parse().map_err(|_| "expected a fraction such as 2 or 5/2".to_string())?;
    if b < Rational64::from_integer(0) {
        return Err("bound must be non-negative".into());
    }
    Ok(b)
}

fn parse_exponent(s: &str) -> Result<QExponent, String> {
    s.parse::<i64>()
        .ok()
        .and_then(QExponent::parse)
        .ok_or_else(|| "expected 1 or 2".into())
}

fn parse_level(s: &str) -> Result<QuadratureLevel, String> {
    QuadratureLevel::parse(s).ok_or_else(|| "expected Q1, Q2 or Q3".into())
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run(cmd: Command) -> Result<(), Error> {
    let (args, f): (Common, fn(&spec::Problem) -> defectscope::Result<Output>) = match cmd {
        Command::Analyze(a) => (a, commands::analyze),
        Command::Check(a) => (a, commands::check),
        Command::Rates(a) => (a, commands::rates),
        Command::Predict(a) => (a, commands::predict),
        Command::Energy(a) => (a, commands::energy),
    };
    let mut problem = spec::load(&args.spec)?;
    Overrides {
        mode: args.mode,
        bound: args.bound,
        mod_symmetry: args.mod_symmetry,
        q_exponent: args.q_exponent,
        quadrature: args.quadrature,
        levels: args.levels,
    }
    .apply(&mut problem);
    let out = f(&problem)?;
    print!("{}", out.text);
    let json = serde_json::to_string_pretty(&out.json).expect("report serializes") + "\n";
    if args.verbose {
        print!("{json}");
    }
    if let Some(p) = &args.json {
        write(p, &json)?;
    }
    if let Some(p) = &args.csv {
        match &out.csv {
            Some(csv) => write(p, csv)?,
            None => return Err(Error::spec("--csv", "this command has no table output")),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("DEFECTSCOPE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
