use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use critnls::experiment::{output_dir, run, OUT_ENV};
use critnls::{Experiment, RawConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Classify,
    Scatter,
    Picard,
    Duhamel,
    Sweep,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Classify => Experiment::Classify,
            Command::Scatter => Experiment::Scatter,
            Command::Picard => Experiment::Picard,
            Command::Duhamel => Experiment::Duhamel,
            Command::Sweep => Experiment::Sweep,
        }
    }
}

/// Experiments on critical homogeneous nonlinear Schrödinger equations.
#[derive(Debug, Parser)]
#[command(name = "critnls", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Command,

    /// Config file, `key = value` lines or a JSON object.
    #[arg(long, short)]
    config: PathBuf,

    /// Output directory. Defaults to `$CRITNLS_OUT/<experiment>-<hash>`.
    #[arg(long, short)]
    out: Option<PathBuf>,

    /// Replace one config value, `key=value`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match drive(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn drive(cli: &Cli) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading {}", cli.config.display()))?;
    let mut raw = RawConfig::parse(&text).with_context(|| format!("parsing {}", cli.config.display()))?;
    raw.set("experiment", Experiment::from(cli.experiment).name())?;
    for pair in &cli.overrides {
        raw.apply_override(pair)?;
    }
    let cfg = raw.resolve().context("invalid configuration")?;
    let dir = output_dir(&cfg, cli.out.as_deref());
    log::info!("running {} into {} ({OUT_ENV} sets the default root)", cfg.experiment, dir.display());
    let output = run(&cfg).context("experiment failed")?;
    let written = output
        .write(&dir)
        .with_context(|| format!("writing outputs to {}", dir.display()))?;
    let r = &output.report;
    println!("experiment: {}", r.experiment);
    println!("preset: {}", r.preset);
    println!("config_hash: {}", r.config_hash);
    if let Some(c) = &r.classification {
        println!("range_type: {:?}", c.range_type);
        println!("g1: {:.15} {:+.3e}i", c.g1.re, c.g1.im);
        println!("lipschitz_sup: {:.6}", c.lipschitz_sup);
    }
    if let Some(e) = r.fitted_exponent {
        println!("fitted_exponent: {e:.6}");
    }
    if let Some(e) = r.unmodified_exponent {
        println!("unmodified_exponent: {e:.6}");
    }
    if !r.picard_ratios.is_empty() {
        let ratios: Vec<String> = r.picard_ratios.iter().map(|x| format!("{x:.3e}")).collect();
        println!("picard_ratios: {}", ratios.join(" "));
    }
    if let Some(a) = r.picard_agreement {
        println!("picard_agreement: {a:.3e}");
    }
    if let Some(w) = &r.weighted_norm {
        println!("weighted_norm: {:.6e}", w.total);
    }
    if let Some(t) = r.tail_proxy {
        println!("tail_proxy: {t:.3e}");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
