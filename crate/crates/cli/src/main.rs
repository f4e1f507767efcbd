//! `journeys`: extract, evaluate and name interest journeys from JSONL files.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use journey_core::naming::PromptKind;
use journey_core::pipeline::Method;

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "journeys", version, about = "Interest-journey extraction, evaluation and naming")]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for per-user work (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Icpc,
    Cooc,
    Multimodal,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Icpc => Method::Icpc,
            MethodArg::Cooc => Method::Cooc,
            MethodArg::Multimodal => Method::Multimodal,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Offline,
    Remote,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TemplateArg {
    NaturalTitles,
    StructuredTitles,
    StructuredKeywords,
    StructuredTitlesKeywords,
}

impl From<TemplateArg> for PromptKind {
    fn from(t: TemplateArg) -> Self {
        match t {
            TemplateArg::NaturalTitles => PromptKind::NaturalTitles,
            TemplateArg::StructuredTitles => PromptKind::StructuredTitles,
            TemplateArg::StructuredKeywords => PromptKind::StructuredKeywords,
            TemplateArg::StructuredTitlesKeywords => PromptKind::StructuredTitlesKeywords,
        }
    }
}

#[derive(Debug, Args)]
struct ExtractorArgs {
    /// Item corpus (items.jsonl).
    #[arg(long)]
    items: Option<PathBuf>,
    /// Trained co-occurrence assignment (from `train-cooc`).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Minimum journey size kept by the extractor.
    #[arg(long)]
    min_cluster_size: Option<usize>,
    /// Multimodal micro-cluster radius (default: median sampled pair distance).
    #[arg(long)]
    eps_dist: Option<f64>,
}

#[derive(Debug, Args)]
struct NamingArgs {
    #[arg(long, value_enum, default_value = "offline")]
    backend: BackendArg,
    /// Completion endpoint for the remote backend.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, value_enum)]
    template: Option<TemplateArg>,
    /// Keep only the last N titles of each journey.
    #[arg(long)]
    max_items: Option<usize>,
    /// Few-shot exemplars, JSONL of {input: {titles, keywords}, target}.
    #[arg(long)]
    exemplars: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus (items, playlists, histories).
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Train the co-occurrence baseline's global cluster assignment.
    TrainCooc {
        #[arg(long)]
        items: Option<PathBuf>,
        #[arg(long)]
        histories: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long = "k")]
        clusters: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Extract journeys for every user in a histories file.
    Extract {
        #[arg(long, value_enum, default_value = "icpc")]
        method: MethodArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        extractor: ExtractorArgs,
    },
    /// Mix playlists two per user, extract, and score against the playlists.
    EvalE2 {
        #[arg(long)]
        playlists: PathBuf,
        #[arg(long, value_enum, default_value = "icpc")]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        extractor: ExtractorArgs,
    },
    /// Granularity statistics over unlabeled histories.
    StatsE1 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_size: usize,
        #[arg(long, value_enum, default_value = "icpc")]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        extractor: ExtractorArgs,
    },
    /// Name journeys from a journeys file.
    Name {
        #[arg(long)]
        items: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        naming: NamingArgs,
    },
    /// Compare whole-history, concatenated and per-journey naming.
    CompareNaming {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        extractor: ExtractorArgs,
        #[command(flatten)]
        naming: NamingArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(t) = cli.threads {
        cfg.parallelism = t;
    }
    match cli.command {
        Command::Gen { spec, out_dir } => commands::gen(&spec, &out_dir),
        Command::TrainCooc {
            items,
            histories,
            out,
            dim,
            clusters,
            seed,
        } => {
            cfg.io.items = items.or(cfg.io.items);
            if let Some(d) = dim {
                cfg.cooc.dim = d;
            }
            if let Some(k) = clusters {
                cfg.cooc.k = k;
            }
            if let Some(s) = seed {
                cfg.cooc.seed = s;
            }
            commands::train_cooc(&cfg, &histories, &out)
        }
        Command::Extract {
            method,
            input,
            out,
            extractor,
        } => {
            apply_extractor_args(&mut cfg, extractor);
            commands::extract(&cfg, method.into(), &input, out.as_deref())
        }
        Command::EvalE2 {
            playlists,
            method,
            seed,
            out,
            extractor,
        } => {
            apply_extractor_args(&mut cfg, extractor);
            commands::eval_e2(&cfg, method.into(), &playlists, seed, out.as_deref())
        }
        Command::StatsE1 {
            input,
            min_size,
            method,
            out,
            extractor,
        } => {
            apply_extractor_args(&mut cfg, extractor);
            commands::stats_e1(&cfg, method.into(), &input, min_size, out.as_deref())
        }
        Command::Name {
            items,
            input,
            out,
            naming,
        } => {
            cfg.io.items = items.or(cfg.io.items);
            let remote = apply_naming_args(&mut cfg, naming);
            commands::name(&cfg, remote, &input, out.as_deref())
        }
        Command::CompareNaming {
            input,
            out,
            extractor,
            naming,
        } => {
            apply_extractor_args(&mut cfg, extractor);
            let remote = apply_naming_args(&mut cfg, naming);
            commands::compare_naming(&cfg, remote, &input, out.as_deref())
        }
    }
}

fn apply_extractor_args(cfg: &mut Config, args: ExtractorArgs) {
    cfg.io.items = args.items.or(cfg.io.items.take());
    cfg.io.model = args.model.or(cfg.io.model.take());
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(m) = args.min_cluster_size {
        cfg.min_cluster_size = m;
    }
    if args.eps_dist.is_some() {
        cfg.multimodal.eps_dist = args.eps_dist;
    }
}

/// Returns true when the remote backend was requested.
fn apply_naming_args(cfg: &mut Config, args: NamingArgs) -> bool {
    if args.endpoint.is_some() {
        cfg.naming.endpoint = args.endpoint;
    }
    if let Some(t) = args.template {
        cfg.naming.template = t.into();
    }
    if args.max_items.is_some() {
        cfg.naming.max_items = args.max_items;
    }
    if args.exemplars.is_some() {
        cfg.naming.exemplars = args.exemplars;
    }
    matches!(args.backend, BackendArg::Remote)
}
