use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lab_cli::{emit_plotdata, run, ExperimentConfig, Kind, LabError, Stage};

#[derive(Parser)]
#[command(name = "sslab", version, about = "Self-similar semilinear wave laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of L against their closed forms.
    Spectrum(Common),
    /// Modulate a perturbed soliton onto the family.
    Modulate(Common),
    /// Evolve from a perturbed soliton and track the parameters.
    Evolve(Common),
    /// Three-run trapping experiment around kappa(d).
    Trap(Common),
    /// Random small data around zero.
    ZeroStability(Common),
    /// Asymptotics of the one-dimensional integral table.
    Tables(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set grid.radial=32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(kind: Kind, c: Common) -> Result<bool, LabError> {
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Stage::Config.err(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut overrides = vec![format!("kind=\"{}\"", kind.name())];
    if let Some(s) = c.seed {
        overrides.push(format!("seed={s}"));
    }
    overrides.extend(c.overrides);
    let cfg = ExperimentConfig::from_toml_with(&text, &overrides)?;
    let t0 = Instant::now();
    let bundle = run(&cfg)?;
    bundle.write(&c.out, Some(t0.elapsed()))?;
    emit_plotdata(&bundle, &c.out)?;
    for l in &bundle.lines {
        println!("{l}");
    }
    println!("config {} -> {}", bundle.config_hash, c.out.display());
    Ok(bundle.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Spectrum(c) => (Kind::Spectrum, c),
        Command::Modulate(c) => (Kind::Modulate, c),
        Command::Evolve(c) => (Kind::Evolve, c),
        Command::Trap(c) => (Kind::Trap, c),
        Command::ZeroStability(c) => (Kind::ZeroStability, c),
        Command::Tables(c) => (Kind::Tables, c),
    };
    match execute(kind, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("[{}] checks failed; see summary.txt", kind.name());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
