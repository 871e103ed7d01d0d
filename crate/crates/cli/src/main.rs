use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cksvar::{Dgp, FilterKind, ModelKind, ShockSize};
use cksvar_cli::{manifest, CliError, CliResult, Command, RunConfig};

/// Censored and kinked structural VARs with an occasionally binding lower bound.
#[derive(Parser)]
#[command(name = "cksvar", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Sub {
    /// Maximum-likelihood fits with standard errors.
    Estimate,
    /// Likelihood-ratio tests of KSVAR and CSVAR against CKSVAR.
    Test,
    /// Point-identified impulse responses, with optional bootstrap bands.
    Irf,
    /// Identified set of structural solutions and their impulse responses.
    Idset,
    /// Monte Carlo moments and LR test rejection rates.
    Mc,
    /// Simulate a dataset from a built-in design or a parameter file.
    Simulate,
    /// Repeat the run recorded in a manifest and verify its outputs.
    Rerun {
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct Flags {
    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Name of the bound-constrained series.
    #[arg(long, global = true)]
    constrained: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    bound: Option<f64>,
    #[arg(long, global = true)]
    bind_tol: Option<f64>,
    #[arg(long, global = true)]
    lags: Option<usize>,
    /// Comma-separated model kinds: ksvar, csvar, cksvar.
    #[arg(long, global = true, value_delimiter = ',')]
    model: Option<Vec<ModelKind>>,
    /// analytic, sis or fapf.
    #[arg(long, global = true)]
    filter: Option<FilterKind>,
    #[arg(long, global = true)]
    particles: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Bootstrap replications (0 disables).
    #[arg(long, global = true)]
    bootstrap: Option<usize>,
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// unit, one_sd, or a number.
    #[arg(long, global = true, value_parser = parse_shock, allow_negative_numbers = true)]
    shock: Option<ShockSize>,
    #[arg(long, global = true)]
    draws: Option<usize>,
    /// 1-based impact period of the impulse responses.
    #[arg(long, global = true)]
    period: Option<usize>,
    #[arg(long, global = true)]
    xi_grid: Option<usize>,
    #[arg(long, global = true)]
    sign_restrict: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo or simulation design: 1, 2 or 3.
    #[arg(long, global = true)]
    dgp: Option<Dgp>,
    #[arg(long, global = true)]
    nrep: Option<usize>,
    /// Sample length for `mc` and `simulate`.
    #[arg(long, global = true)]
    t_len: Option<usize>,
    #[arg(long, global = true)]
    burn_in: Option<usize>,
    /// Structural parameter JSON for `simulate`.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
}

fn parse_shock(s: &str) -> Result<ShockSize, String> {
    match s {
        "unit" => Ok(ShockSize::Unit),
        "one_sd" | "sd" => Ok(ShockSize::OneSd),
        v => v
            .parse()
            .map(ShockSize::Value)
            .map_err(|_| format!("'{v}' is not unit, one_sd or a number")),
    }
}

fn resolve(flags: Flags) -> CliResult<RunConfig> {
    let mut c = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($flag:ident => $($field:tt)+) => {
            if let Some(v) = flags.$flag {
                c.$($field)+ = v;
            }
        };
    }
    if flags.data.is_some() {
        c.data.path = flags.data;
    }
    if flags.constrained.is_some() {
        c.data.constrained = flags.constrained;
    }
    if flags.params.is_some() {
        c.simulate.params = flags.params;
    }
    if flags.period.is_some() {
        c.irf.period = flags.period;
    }
    set!(bound => data.bound);
    set!(bind_tol => data.bind_tol);
    set!(lags => model.lags);
    set!(model => model.kinds);
    set!(filter => model.filter);
    set!(particles => model.particles);
    set!(seed => model.seed);
    set!(bootstrap => bootstrap.replications);
    set!(horizon => irf.horizon);
    set!(shock => irf.shock);
    set!(draws => irf.draws);
    set!(xi_grid => idset.xi_grid);
    set!(out => out);
    set!(nrep => mc.n_rep);
    set!(burn_in => mc.burn_in);
    if let Some(d) = flags.dgp {
        c.mc.dgp = d;
        c.simulate.dgp = d;
    }
    if let Some(t) = flags.t_len {
        c.mc.t_len = t;
        c.simulate.t_len = t;
    }
    if let Some(b) = flags.burn_in {
        c.simulate.burn_in = b;
    }
    if flags.sign_restrict {
        c.idset.sign_restrict = true;
    }
    Ok(c)
}

fn execute(cli: Cli) -> CliResult<manifest::Manifest> {
    let command = match cli.command {
        Sub::Rerun { manifest: path } => return manifest::rerun(&path, cli.flags.out),
        Sub::Estimate => Command::Estimate,
        Sub::Test => Command::Test,
        Sub::Irf => Command::Irf,
        Sub::Idset => Command::Idset,
        Sub::Mc => Command::Mc,
        Sub::Simulate => Command::Simulate,
    };
    let cfg = resolve(cli.flags)?;
    manifest::run(command, &cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(m) => {
            let dir = &m.config.out;
            for f in &m.outputs {
                println!("{}", dir.join(&f.path).display());
            }
            println!("{}", dir.join(manifest::MANIFEST_FILE).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = match &e {
                CliError::Numerical(_) => "numerical failure",
                CliError::Mismatch(_) => "reproduction failure",
                _ => "configuration error",
            };
            eprintln!("error ({kind}): {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
