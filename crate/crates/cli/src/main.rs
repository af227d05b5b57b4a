use std::path::PathBuf;
use std::process::ExitCode;

use bicoherent::coordinate::{uniform_grid, wavefunction_rows};
use bicoherent_cli::config::{build_map, RunConfig};
use bicoherent_cli::output::{table, write_convergence, write_suite, write_wavefunctions};
use bicoherent_cli::suite::{FD_HALF_WIDTH, FD_POINTS};
use bicoherent_cli::{convergence_study, run_suite, CliError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bicoherent",
    version,
    about = "Verify pseudo-boson and bicoherent-state identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random maps.
    #[arg(long)]
    seed: Option<u64>,
    /// Dimension of the truncated space.
    #[arg(long)]
    dim: Option<usize>,
    /// Treat out-of-regime checks as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full check suite.
    Verify(Common),
    /// Residuals against the dimension.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Ascending dimensions.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        dims: Vec<usize>,
    },
    /// Write wavefunction tables for each z sample (projector maps only).
    EmitWavefunctions(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    cfg.apply_overrides(common.dim, common.seed)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.outputs.clone());
    Ok((cfg, out))
}

fn verify(common: &Common) -> Result<bool, CliError> {
    let (cfg, out) = load(common)?;
    let outcome = run_suite(&cfg)?;
    write_suite(&out, &outcome)?;
    print!("{}", table(&outcome.reports));
    Ok(!outcome.failed(common.strict))
}

fn converge(common: &Common, dims: &[usize]) -> Result<bool, CliError> {
    let (cfg, out) = load(common)?;
    let rows = convergence_study(&cfg, dims)?;
    let path = write_convergence(&out, &rows)?;
    println!(
        "{:>5} {:>10} {:>11} {:>11} {:>11} regime",
        "dim", "z", "bch", "eigen", "resolution"
    );
    for r in &rows {
        println!(
            "{:>5} {:>10} {:>11.3e} {:>11.3e} {:>11.3e} {}",
            r.dim,
            format!("{}{:+}i", r.z_re, r.z_im),
            r.bch_residual,
            r.eigen_residual,
            r.resolution_deviation,
            if r.out_of_regime { "out-of-regime" } else { "ok" }
        );
    }
    println!("wrote {}", path.display());
    Ok(!(common.strict && rows.iter().any(|r| r.out_of_regime)))
}

fn emit(common: &Common) -> Result<bool, CliError> {
    let (cfg, out) = load(common)?;
    let built = build_map(&cfg)??;
    let proj = built
        .projector()
        .ok_or_else(|| CliError::Config("emit-wavefunctions needs a projector map".into()))?;
    let grid = uniform_grid(FD_HALF_WIDTH, FD_POINTS);
    for (i, z) in cfg.z_values().into_iter().enumerate() {
        let rows = wavefunction_rows(proj, z, &grid)?;
        let path = write_wavefunctions(&out, i, &rows)?;
        println!("z = {}{:+}i -> {}", z.re, z.im, path.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(c) => verify(c),
        Command::Converge { common, dims } => converge(common, dims),
        Command::EmitWavefunctions(c) => emit(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
