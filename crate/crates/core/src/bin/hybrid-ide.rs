use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hybrid_ide::problem::{csv_string, emit_csv, load_problem, report_string, run, RunOptions};
use hybrid_ide::reproduce::reproduce_all;
use hybrid_ide::SolveOptions;

/// Hybrid block-pulse/Legendre solver for nonlinear Fredholm and Volterra
/// integro-differential equations.
///
/// Expressions use t and s, + - * / ^, sin cos exp log sqrt abs, pi and e.
/// `^` binds tighter than unary minus: -t^2 = -(t^2).
#[derive(Parser)]
#[command(name = "hybrid-ide", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a problem file.
    Solve {
        file: PathBuf,
        /// Legendre orders per subinterval (overrides the file).
        #[arg(long)]
        r: Option<usize>,
        /// Number of block-pulse subintervals (overrides the file).
        #[arg(long)]
        q: Option<usize>,
        /// Newton tolerance on the residual infinity norm.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Evaluate on i/N, i = 0..N instead of the file's grid.
        #[arg(long)]
        grid_size: Option<usize>,
        /// Supply M for the error bound instead of estimating it.
        #[arg(long)]
        bound_m: Option<f64>,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Text report path (stderr when omitted).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-run both worked examples and compare with the stored reference values.
    ReproducePaper {
        /// Print every check, not only failures.
        #[arg(long)]
        verbose: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Solve {
            file,
            r,
            q,
            tol,
            max_iter,
            grid_size,
            bound_m,
            out,
            report,
        } => {
            let spec = match load_problem(&file) {
                Ok(spec) => spec,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                r,
                q,
                solve: SolveOptions { tol, max_iter },
                grid_size,
                bound_m,
            };
            let output = match run(&spec, &opts) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {}: {e}", file.display());
                    return ExitCode::from(1);
                }
            };
            let text = report_string(&output);
            match &report {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => eprint!("{text}"),
            }
            if !output.report.converged {
                eprintln!(
                    "error: {}: solver did not converge (residual {:e} after {} iterations)",
                    file.display(),
                    output.report.residual_norm,
                    output.report.iterations
                );
                return ExitCode::from(1);
            }
            match &out {
                Some(path) => {
                    if let Err(e) = emit_csv(&output, path) {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                }
                None => print!("{}", csv_string(&output)),
            }
            ExitCode::SUCCESS
        }
        Command::ReproducePaper { verbose } => {
            let cases = match reproduce_all(&RunOptions::default()) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let mut failed = 0;
            for case in &cases {
                let bad = case.checks.iter().filter(|c| !c.passed()).count();
                failed += bad;
                println!(
                    "{}: {}/{} checks pass (max grid error {:.6e})",
                    case.label,
                    case.checks.len() - bad,
                    case.checks.len(),
                    case.output.max_abs_error().unwrap_or(f64::NAN)
                );
                for c in &case.checks {
                    if verbose || !c.passed() {
                        println!(
                            "  {} {:<16} expected {:<14.9} got {:<14.9} |diff| {:.3e} (tol {:.1e})",
                            if c.passed() { "ok  " } else { "FAIL" },
                            c.name,
                            c.expected,
                            c.actual,
                            (c.actual - c.expected).abs(),
                            c.tol
                        );
                    }
                }
            }
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                println!("{failed} check(s) failed");
                ExitCode::from(1)
            }
        }
    }
}
