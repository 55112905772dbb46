use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qgt_cli::berry::{run_berry, BerryOutcome, BerryPlan};
use qgt_cli::exponents::{report, ExponentQuery};
use qgt_cli::fit::{execute_fit, FitPlan};
use qgt_cli::gaps::{run_gaps, GapPlan};
use qgt_cli::settings::{KeySpec, Settings};
use qgt_cli::sweep::{execute_sweep, SweepPlan};
use qgt_cli::table::write_file;
use qgt_cli::{CliError, ExitStatus};

/// Quantum geometric tensor sweeps, finite-size fits and Berry phases for
/// spin chains.
#[derive(Debug, Parser)]
#[command(name = "qgt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the QGT over chain lengths and parameter points into a CSV.
    Sweep(SweepArgs),
    /// Fit finite-size forms per parameter group of a dataset.
    Fit(FitArgs),
    /// Print scaling-dimension predictions.
    Exponents(ExponentArgs),
    /// Plaquette curvature on a mesh, or the phase around a loop.
    Berry(BerryArgs),
    /// Tabulate the lowest excitation gap.
    Gap(GapArgs),
}

/// Model flags shared by the solving commands.
#[derive(Debug, Args)]
struct ModelArgs {
    /// xxz, xxz-field, tfim, rotated-xy or qubit.
    #[arg(long)]
    model: Option<String>,
    /// Chain lengths: `8:20:2` or `8,10,12`.
    #[arg(long = "L")]
    sizes: Option<String>,
    /// Parameter values; axes separated by `;`, each `a,b,c` or `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// periodic or open.
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long)]
    coupling: Option<String>,
    /// Lanczos start-vector seed.
    #[arg(long)]
    seed: Option<String>,
    /// Lanczos residual tolerance.
    #[arg(long)]
    tol: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    /// Largest sector solved densely.
    #[arg(long = "dense-threshold")]
    dense_threshold: Option<String>,
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ModelArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("model", self.model.clone()),
            ("L", self.sizes.clone()),
            ("lambda", self.lambda.clone()),
            ("boundary", self.boundary.clone()),
            ("coupling", self.coupling.clone()),
            ("seed", self.seed.clone()),
            ("tol", self.tol.clone()),
            ("max-iter", self.max_iter.clone()),
            ("dense-threshold", self.dense_threshold.clone()),
        ]
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// fd, spectral or corr.
    #[arg(long)]
    method: Option<String>,
    /// Finite-difference step.
    #[arg(long)]
    dlambda: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Sweep CSV, or any CSV with `L` and the fitted column.
    input: Option<String>,
    /// gapless, gapless-irrelevant, logarithmic, massive or power-law.
    #[arg(long)]
    model: Option<String>,
    /// Column to fit.
    #[arg(long)]
    column: Option<String>,
    /// Drop points with smaller L.
    #[arg(long = "min-L")]
    min_sites: Option<String>,
    /// Correlation length of the massive form.
    #[arg(long)]
    xi: Option<String>,
    /// Dimension of the irrelevant operator; 4K(lambda) by default.
    #[arg(long = "irrelevant-dim")]
    irrelevant_dim: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExponentArgs {
    /// xxz or quasi-free.
    #[arg(long)]
    preset: Option<String>,
    /// XXZ anisotropy; implies the xxz preset.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long = "dim-mu")]
    dim_mu: Option<String>,
    #[arg(long = "dim-nu")]
    dim_nu: Option<String>,
    #[arg(long = "dim-lambda")]
    dim_lambda: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BerryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// `start:end:cells;start:end:cells` over the two parameters.
    #[arg(long, allow_hyphen_values = true)]
    mesh: Option<String>,
    /// `circle:<axis>` or `rect:a0,a1:b0,b1`.
    #[arg(long = "loop", allow_hyphen_values = true)]
    path: Option<String>,
    /// Points per loop edge.
    #[arg(long)]
    steps: Option<String>,
    /// Repeat the loop at twice the resolution (true/false).
    #[arg(long)]
    refine: Option<String>,
    /// Compare a rectangle loop with its plaquette sum.
    #[arg(long)]
    stokes: bool,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct GapArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<String>,
}

fn settings(keys: &[KeySpec], config: Option<&PathBuf>, flags: &[(&str, Option<String>)]) -> Result<Settings, CliError> {
    Settings::resolve(keys, config.map(PathBuf::as_path), flags)
}

fn run(command: Command) -> Result<ExitStatus, CliError> {
    match command {
        Command::Sweep(a) => {
            let mut flags = a.model.flags();
            flags.extend([("method", a.method), ("dlambda", a.dlambda), ("out", a.out), ("workers", a.workers)]);
            let plan = SweepPlan::from_settings(&settings(&SweepPlan::keys(), a.model.config.as_ref(), &flags)?)?;
            let (manifest, status) = execute_sweep(&plan)?;
            eprintln!(
                "wrote {} ({} of {} points, {} failed); manifest {}",
                plan.out.display(),
                manifest.completed,
                manifest.planned,
                manifest.failed,
                qgt_cli::manifest::RunManifest::path_for(&plan.out).display()
            );
            Ok(status)
        }
        Command::Fit(a) => {
            let flags = [
                ("input", a.input),
                ("model", a.model),
                ("column", a.column),
                ("min-L", a.min_sites),
                ("xi", a.xi),
                ("irrelevant-dim", a.irrelevant_dim),
                ("out", a.out),
            ];
            let plan = FitPlan::from_settings(&settings(FitPlan::KEYS, a.config.as_ref(), &flags)?)?;
            let report = execute_fit(&plan)?;
            for row in &report.rows {
                match &row.result {
                    Ok(s) => println!(
                        "{:?}: {} A = {:?} R2 = {:.12} RSS = {:.6e}",
                        row.params,
                        s.kind.name(),
                        s.coefficients,
                        s.r_squared,
                        s.rss
                    ),
                    Err(e) => eprintln!("{:?}: fit failed: {e}", row.params),
                }
            }
            eprintln!("wrote {}, {}, {}", plan.out.display(), plan.data_path().display(), plan.script_path().display());
            Ok(report.status)
        }
        Command::Exponents(a) => {
            let flags = [
                ("preset", a.preset),
                ("lambda", a.lambda),
                ("d", a.d),
                ("zeta", a.zeta),
                ("dim-mu", a.dim_mu),
                ("dim-nu", a.dim_nu),
                ("dim-lambda", a.dim_lambda),
            ];
            let query = ExponentQuery::from_settings(&settings(ExponentQuery::KEYS, a.config.as_ref(), &flags)?)?;
            print!("{}", report(&query)?);
            Ok(ExitStatus::Success)
        }
        Command::Berry(a) => {
            let mut flags = a.model.flags();
            flags.extend([
                ("mesh", a.mesh),
                ("loop", a.path),
                ("steps", a.steps),
                ("refine", a.refine),
                ("stokes", a.stokes.then(|| "true".to_string())),
                ("out", a.out),
            ]);
            let plan = BerryPlan::from_settings(&settings(&BerryPlan::keys(), a.model.config.as_ref(), &flags)?)?;
            let outcome = run_berry(&plan)?;
            if let BerryOutcome::Field { table, .. } = &outcome {
                match &plan.out {
                    Some(path) => {
                        write_file(path, &table.to_csv())?;
                    }
                    None => print!("{}", table.to_csv()),
                }
            }
            match (&outcome, &plan.out) {
                (BerryOutcome::Field { .. }, None) => eprint!("{}", outcome.summary()),
                _ => print!("{}", outcome.summary()),
            }
            Ok(ExitStatus::Success)
        }
        Command::Gap(a) => {
            let flags = [a.model.flags(), vec![("out", a.out)]].concat();
            let plan = GapPlan::from_settings(&settings(&GapPlan::keys(), a.model.config.as_ref(), &flags)?)?;
            let (table, failures) = run_gaps(&plan);
            match &plan.out {
                Some(path) => {
                    write_file(path, &table.to_csv())?;
                }
                None => print!("{}", table.to_csv()),
            }
            for (l, p, e) in &failures {
                eprintln!("L = {l}, {p:?}: {e}");
            }
            Ok(if failures.is_empty() { ExitStatus::Success } else { ExitStatus::PartialFailure })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitStatus::Usage as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
