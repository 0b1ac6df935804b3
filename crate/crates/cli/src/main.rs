use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scalab_cli::config::{parse_set, Command, ScenarioConfig};
use scalab_cli::run::execute;

/// Invariant scalar curvature experiments on warped products, group
/// metrics and submersions.
#[derive(Parser)]
#[command(name = "scalab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Key-value config file, one `key = value` per line.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Model preset (`model.preset`).
    #[arg(long)]
    model: Option<String>,
    /// Number of mesh nodes (`model.N`).
    #[arg(short = 'N', long = "nodes")]
    nodes: Option<String>,
    #[arg(long)]
    outdir: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sign of the conformal class of a warped product.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Constant scalar curvature in the conformal class.
    Yamabe {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        c: Option<String>,
        /// Solve for scal ≡ -c instead of a positive constant.
        #[arg(long)]
        negative: bool,
    },
    /// Prescribe scalar curvature by scaling, approximation and Newton.
    Prescribe {
        #[command(flatten)]
        common: Common,
        /// Expression in r, or a file of `r value` samples.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Cheeger deformation sweep of a left-invariant metric.
    Cheeger {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_max: Option<String>,
    },
    /// Canonical variation sweep of a submersion preset.
    Canonical {
        #[command(flatten)]
        common: Common,
        /// Submersion preset (`model.preset`).
        #[arg(long)]
        preset: Option<String>,
        /// `s_min:s_max:steps`.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Approximate a target by f composed with a circle diffeomorphism.
    Approx {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        eps: Option<String>,
    },
}

fn push(out: &mut Vec<(String, String)>, key: &str, v: Option<String>) {
    if let Some(v) = v {
        out.push((key.to_string(), v));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut flags = Vec::new();
    let (command, common) = match cli.command {
        Cmd::Classify { common } => (Command::Classify, common),
        Cmd::Yamabe { common, c, negative } => {
            push(&mut flags, "yamabe.c", c);
            if negative {
                flags.push(("yamabe.negative".into(), "true".into()));
            }
            (Command::Yamabe, common)
        }
        Cmd::Prescribe { common, target, p, eps } => {
            push(&mut flags, "prescribe.target", target);
            push(&mut flags, "prescribe.p", p);
            push(&mut flags, "prescribe.eps", eps);
            (Command::Prescribe, common)
        }
        Cmd::Cheeger { common, t_max } => {
            push(&mut flags, "cheeger.t_max", t_max);
            (Command::Cheeger, common)
        }
        Cmd::Canonical { common, preset, sweep } => {
            push(&mut flags, "model.preset", preset);
            push(&mut flags, "canonical.sweep", sweep);
            (Command::Canonical, common)
        }
        Cmd::Approx { common, f, target, p, eps } => {
            push(&mut flags, "approx.f", f);
            push(&mut flags, "approx.target", target);
            push(&mut flags, "approx.p", p);
            push(&mut flags, "approx.eps", eps);
            (Command::Approx, common)
        }
    };

    let mut overrides = Vec::new();
    for s in &common.set {
        match parse_set(s) {
            Ok(kv) => overrides.push(kv),
            Err(e) => {
                eprintln!("scalab: {e}");
                return ExitCode::from(4);
            }
        }
    }
    push(&mut overrides, "model.preset", common.model);
    push(&mut overrides, "model.N", common.nodes);
    push(&mut overrides, "run.outdir", common.outdir);
    push(&mut overrides, "run.seed", common.seed);
    push(&mut overrides, "solver.tol", common.tol);
    push(&mut overrides, "solver.max_iter", common.max_iter);
    overrides.extend(flags);

    let cfg = match ScenarioConfig::resolve(command, common.config.as_deref(), &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("scalab {command}: configuration: {e}");
            return ExitCode::from(4);
        }
    };
    ExitCode::from(execute(&cfg) as u8)
}
