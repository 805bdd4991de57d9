use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symtile::energy::WeightScheme;
use symtile::pipeline::{run, Method, Mode, PartialConfig, PipelineError, SigmaArg};

/// Harmonic parameterization of marked disks and 3-fold symmetric spheres through glued tori.
#[derive(Parser)]
#[command(name = "symtile", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, solve and check one mesh; writes `<name>.uv.obj`, `<name>.svg`, `<name>.report.json`.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// disk-isosceles, disk-equilateral, disk-rectangle or sphere-3fold
    #[arg(long)]
    mode: Option<Mode>,
    /// Triangle mesh in OBJ format
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated boundary vertices, counterclockwise (3 or 4 depending on the mode)
    #[arg(long, value_delimiter = ',')]
    marks: Option<Vec<usize>>,
    /// cotan or uniform
    #[arg(long)]
    weights: Option<WeightScheme>,
    /// torus, direct or both
    #[arg(long)]
    method: Option<Method>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact base name; defaults to the input file stem
    #[arg(long)]
    name: Option<String>,
    /// Fixed vertex of the rotation (sphere-3fold)
    #[arg(long = "pO")]
    p_o: Option<usize>,
    /// Rotation as a comma-separated vertex permutation, or `detect` (sphere-3fold)
    #[arg(long)]
    sigma: Option<SigmaArg>,
    /// Vertex moved by the rotation where the first cut ends (sphere-3fold)
    #[arg(long)]
    seed_target: Option<usize>,
    /// Rectangle width over height (disk-rectangle)
    #[arg(long)]
    aspect: Option<f64>,
    /// JSON file with any of the above plus `tolerances`; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn into_partial(self) -> (Option<PathBuf>, PartialConfig) {
        (
            self.config,
            PartialConfig {
                input: self.input,
                mode: self.mode,
                marks: self.marks,
                weights: self.weights,
                method: self.method,
                out: self.out,
                name: self.name,
                p_o: self.p_o,
                sigma: self.sigma,
                seed_target: self.seed_target,
                aspect: self.aspect,
                tolerances: None,
            },
        )
    }
}

fn execute(args: RunArgs) -> Result<i32, PipelineError> {
    let (config, flags) = args.into_partial();
    let base = match config {
        Some(path) => PartialConfig::load(&path)?,
        None => PartialConfig::default(),
    };
    let cfg = base.overlay(flags).finish()?;
    let outcome = run(&cfg)?;
    let r = &outcome.report;
    println!("construction: {} copies, energy {:.12}", r.k, r.total_energy.unwrap_or_else(|| r.energies.iter().sum()));
    if let Some(c) = &r.crosscheck {
        println!("crosscheck relative RMS: {:.3e}", c.relative_rms);
    }
    for (name, ok) in &r.checks {
        let value = r.residuals.get(name).map(|v| format!(" ({v:.3e})")).unwrap_or_default();
        println!("{} {name}{value}", if *ok { "pass" } else { "FAIL" });
    }
    println!("report: {}", outcome.report_path.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("SYMTILE_LOG", "warn")).init();
    let Command::Run(args) = Cli::parse().command;
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let kind = match &e {
                PipelineError::Config(_) => "config",
                PipelineError::Input(_) | PipelineError::Construct(_) => "input",
                _ => "run",
            };
            eprintln!("error[{kind}]: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
