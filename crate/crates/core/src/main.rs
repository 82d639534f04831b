use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use finjet::cli::{self, Report};
use finjet::FinjetError;

#[derive(Parser)]
#[command(name = "finjet", version, about = "Finsler connections, Schwarzian-type cocycles and quantization checks")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print one quantity at a point.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// `x=...;y=...`, comma-separated coordinates.
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        quantity: String,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated suite names; all suites if omitted.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides every suite tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Report path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two reports of the same scenario.
    Diff { baseline: PathBuf, candidate: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, FinjetError> {
    std::fs::read_to_string(path).map_err(|e| FinjetError::Config(format!("{}: {e}", path.display())))
}

fn run(args: Args) -> Result<u8, FinjetError> {
    match args.cmd {
        Cmd::Eval { config, point, quantity } => {
            let l = cli::load_path(&config)?;
            let pt = point.as_deref().map(cli::parse_point).transpose()?;
            let rows = cli::eval_quantity(&l, pt.as_ref(), &quantity)?;
            print!("{}", cli::format_rows(&rows));
            Ok(0)
        }
        Cmd::Verify { config, suite, seed, tol, out } => {
            let l = cli::load_path(&config)?;
            let report = cli::verify(&l, &suite, seed, tol)?;
            let text = report.to_json();
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| FinjetError::Config(format!("{}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            for c in report.checks.iter().filter(|c| !c.pass) {
                let r = c.max_residual.map_or("non-finite".to_string(), |r| format!("{r:e}"));
                eprintln!("FAIL {}/{}: residual {r}, tolerance {:e}", c.suite, c.check, c.tolerance);
            }
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Cmd::Diff { baseline, candidate } => {
            let a = Report::from_json(&read(&baseline)?)?;
            let b = Report::from_json(&read(&candidate)?)?;
            let lines = cli::diff_reports(&a, &b)?;
            for line in &lines {
                println!("{line}");
            }
            Ok(if lines.iter().any(|l| l.is_regression()) { 1 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
