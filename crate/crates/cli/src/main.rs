//! `onsager-skeleton`: verification and sweep workflows for Onsager-integrable clock chains.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{exit_code, Failure, Outcome, Payload};
use config::{ConfigError, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "onsager-skeleton", version, about)]
struct Cli {
    /// TOML run configuration; flags override its keys.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Directory for reports when no output file is named.
    #[arg(long, global = true, env = "ONSAGER_SKELETON_OUT")]
    out_dir: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Onsager-algebra and Dolan-Grady residuals.
    VerifyAlgebra,
    /// Skeleton eigenstate, ground-state verdict and momentum excitations.
    Eigenstate,
    /// Gap scan over a coupling grid, written as CSV.
    Sweep,
    /// Disorder parameter from the transfer matrix.
    Disorder,
    /// Truncated skeleton approximations of a gapped polynomial.
    Approx,
    /// Layer coefficients b_k of g.
    Bk,
    /// Coefficients r_alpha of the transformed Hamiltonian.
    Ralpha,
    /// Tensors of the d = 1 matrix-product state as JSON.
    MpsExport,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::Eigenstate => "eigenstate",
            Command::Sweep => "sweep",
            Command::Disorder => "disorder",
            Command::Approx => "approx",
            Command::Bk => "bk",
            Command::Ralpha => "ralpha",
            Command::MpsExport => "mps-export",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        [
            Command::VerifyAlgebra,
            Command::Eigenstate,
            Command::Sweep,
            Command::Disorder,
            Command::Approx,
            Command::Bk,
            Command::Ralpha,
            Command::MpsExport,
        ]
        .into_iter()
        .find(|c| c.name() == name)
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&cli.overrides);
    let command = match (cli.command, cfg.command.as_deref()) {
        (Some(c), _) => c,
        (None, Some(name)) => Command::parse(name)
            .ok_or_else(|| config::field_error("command", format!("unknown command `{name}`")))?,
        (None, None) => return Err(ConfigError("no command given".into()).into()),
    };
    cfg.command = Some(command.name().to_string());
    let out = match command {
        Command::VerifyAlgebra => commands::verify_algebra(&cfg),
        Command::Eigenstate => commands::eigenstate(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Disorder => commands::disorder(&cfg),
        Command::Approx => commands::approx(&cfg),
        Command::Bk => commands::bk(&cfg),
        Command::Ralpha => commands::ralpha(&cfg),
        Command::MpsExport => commands::mps_export(&cfg),
    }?;
    let ext = match out.payload {
        Payload::Json(_) => "json",
        Payload::Csv(_) => "csv",
    };
    let target = cfg.output.clone().or_else(|| cli.out_dir.as_ref().map(|d| d.join(format!("{}.{ext}", command.name()))));
    write_payload(&out.payload, target.as_deref())
        .map_err(|e| ConfigError(format!("cannot write output: {e}")))?;
    Ok(out)
}

fn write_payload(payload: &Payload, target: Option<&std::path::Path>) -> std::io::Result<()> {
    let bytes = match payload {
        Payload::Json(v) => {
            let mut s = serde_json::to_vec_pretty(v).map_err(std::io::Error::other)?;
            s.push(b'\n');
            s
        }
        Payload::Csv(b) => b.clone(),
    };
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, bytes)
        }
        None => std::io::stdout().lock().write_all(&bytes),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => ExitCode::from(out.status as u8),
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("error: {e}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&f) as u8)
        }
    }
}
