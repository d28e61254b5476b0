use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmdom::accel::{ConvergenceReport, Schedule};
use rmdom::bench::{
    check_places, compare, emit, parse_list, BenchmarkConfig, Depth, OutputFormat, PhaseSource,
    ReferenceTable,
};
use rmdom::quadrature::QuadratureKind;
use rmdom::solver::{IntensityPart, SolutionTable};
use rmdom::Error;

const EXIT_DISCREPANCY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "rmdom", version, about = "Response matrix discrete ordinates slab solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at a single quadrature order and print the edit table.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Half-range quadrature order.
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Raise the quadrature order until the edits converge, with Wynn-epsilon estimates.
    Converge {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare computed edits against a reference table.
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Reference CSV path, or an embedded table: ia, ib, iia, iib.
        #[arg(long)]
        reference: String,
        /// Solve at this single order instead of sweeping.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Significant digits to compare (defaults to the table's own).
        #[arg(long)]
        places: Option<usize>,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Optical thickness of the slab [default: 64, or the reference table's].
    #[arg(long)]
    tau1: Option<f64>,
    /// Single-scatter albedo; values above 1 - 1e-12 are clamped.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// isotropic, linear:<b1>, cloudc1, or a coefficient file.
    #[arg(long, default_value = "cloudc1")]
    phase: String,
    /// gauss or radau.
    #[arg(long, default_value = "radau")]
    quad: String,
    /// Signed edit cosines, comma separated [default: -1, -0.8, ..., 1].
    #[arg(long, allow_hyphen_values = true)]
    mu_edits: Option<String>,
    /// Edit depths: fractions of tau1 (1/20), tau1, or absolute values [default: 0,1/20,1/5,1/2,3/4,tau1].
    #[arg(long)]
    tau_edits: Option<String>,
    /// total or diffuse (uncollided beam removed).
    #[arg(long, default_value = "diffuse")]
    component: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = Schedule::default().n_start)]
    n_start: usize,
    #[arg(long, default_value_t = Schedule::default().n_step)]
    n_step: usize,
    #[arg(long, default_value_t = Schedule::default().n_max)]
    n_max: usize,
    /// Relative change between successive orders that ends the sweep.
    #[arg(long, default_value_t = 5e-8)]
    tol: f64,
    /// Solve the next order concurrently (same results, less waiting).
    #[arg(long)]
    speculative: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value_t = 8)]
    places: usize,
    /// text or csv.
    #[arg(long, default_value = "text")]
    format: String,
}

fn build_config(args: &ProblemArgs, reference: Option<&ReferenceTable>) -> Result<BenchmarkConfig, Error> {
    let mut cfg = match reference {
        Some(r) => BenchmarkConfig::for_reference(r)?,
        None => BenchmarkConfig::default(),
    };
    if let Some(t) = args.tau1 {
        cfg.tau1 = t;
    }
    cfg.omega = args.omega;
    cfg.phase_source = args.phase.parse::<PhaseSource>()?;
    cfg.quad = args.quad.parse::<QuadratureKind>()?;
    cfg.part = args.component.parse::<IntensityPart>()?;
    if let Some(m) = &args.mu_edits {
        cfg.edit_mus = parse_list::<f64>(m)
            .map_err(|_| Error::InvalidArgument(format!("cannot read direction list '{m}'")))?;
    }
    if let Some(t) = &args.tau_edits {
        cfg.edit_taus = parse_list::<Depth>(t)?;
    }
    Ok(cfg)
}

fn apply_sweep(cfg: &mut BenchmarkConfig, sweep: &SweepArgs) {
    cfg.schedule = Schedule {
        n_start: sweep.n_start,
        n_step: sweep.n_step,
        n_max: sweep.n_max,
    };
    cfg.tol = sweep.tol;
}

fn describe_sweep(report: &ConvergenceReport) -> String {
    let orders: Vec<String> = report.orders.iter().map(|n| n.to_string()).collect();
    format!(
        "# orders: {}\n# final relative change: {:.3e}\n# converged: {}\n",
        orders.join(", "),
        report.final_rel_err,
        report.converged
    )
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve { problem, n, output } => {
            check_places(output.places)?;
            let format: OutputFormat = output.format.parse()?;
            let cfg = build_config(&problem, None)?;
            let table = cfg.solve_at(n)?;
            print!("{}", emit(&table, format, output.places)?);
            Ok(0)
        }
        Command::Converge { problem, sweep, output } => {
            check_places(output.places)?;
            let format: OutputFormat = output.format.parse()?;
            let mut cfg = build_config(&problem, None)?;
            apply_sweep(&mut cfg, &sweep);
            let (table, report) = match cfg.run_with(sweep.speculative) {
                Ok(r) => r,
                Err(failure) => {
                    eprint!("{}", describe_sweep(&failure.partial));
                    return Err(failure.error);
                }
            };
            print!("{}", describe_sweep(&report));
            print!("{}", emit(&table, format, output.places)?);
            if let Some(acc) = report.accelerated_grid() {
                let accelerated = SolutionTable {
                    values: acc,
                    ..table
                };
                println!("# Wynn-epsilon estimates over the orders above");
                print!("{}", emit(&accelerated, format, output.places)?);
            }
            if !report.converged {
                eprintln!("warning: not converged to {} by N = {}", cfg.tol, cfg.schedule.n_max);
            }
            Ok(0)
        }
        Command::Compare {
            problem,
            reference,
            n,
            sweep,
            places,
        } => {
            let reference = ReferenceTable::load(&reference)?;
            let places = places.unwrap_or(reference.places);
            check_places(places)?;
            let mut cfg = build_config(&problem, Some(&reference))?;
            apply_sweep(&mut cfg, &sweep);
            let table = match n {
                Some(n) => cfg.solve_at(n)?,
                None => {
                    let (table, report) = cfg.run_with(sweep.speculative).map_err(|f| f.error)?;
                    print!("{}", describe_sweep(&report));
                    table
                }
            };
            let cmp = compare(&table, &reference, places)?;
            if !reference.title.is_empty() {
                println!("# {}", reference.title);
            }
            print!("{}", cmp.render());
            Ok(if cmp.is_clean() { 0 } else { EXIT_DISCREPANCY })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
    }
}
