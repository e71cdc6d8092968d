//! `viseme-lab` command-line interface.

mod analyze;
mod config;
mod error;
mod inspect;
mod output;
mod reproduce;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use viseme_lab::analyzer::DetectionParams;
use viseme_lab::viseme::LanguageId;

use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "viseme-lab",
    version,
    about = "Bilingual viseme mapping, surrogate training and critical-period analysis",
    after_help = "Outputs go under the config's output_dir, else $VISEME_LAB_OUTPUT, else ./viseme-lab-output.\n\
                  Exit codes: 0 success, 1 usage, 2 data, 3 numeric failure."
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Run configuration (TOML); bundled defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use this single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel training runs.
    #[arg(long, global = true, default_value_t = default_jobs())]
    jobs: usize,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Retrain runs whose traces already exist.
    #[arg(long, global = true)]
    force: bool,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a word's phonemes and visemes.
    Map {
        word: String,
        #[arg(long, default_value = "en")]
        lang: String,
    },
    /// Viseme occurrence counts of a word list.
    CorpusStats {
        #[arg(long, default_value = "en")]
        lang: String,
        /// Word list to count instead of the configured one.
        #[arg(long)]
        words: Option<PathBuf>,
        /// Write a bar chart (SVG) here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run the training matrix, one trace per run.
    Train {
        /// Trace directory [default: <output root>/traces].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical periods, fraction summaries, cross-inference and figures.
    Analyze {
        /// Trace files or directories of traces.
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Report directory [default: <output root>/analysis].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        window: Option<u32>,
        /// Shorthand for a surge fraction of 0.95.
        #[arg(long, conflicts_with = "fraction")]
        strict: bool,
    },
    /// Corpus statistics, training matrix, analysis and a claim summary.
    Reproduce {
        /// Artifact directory [default: the output root].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn language(tag: &str) -> CliResult<LanguageId> {
    tag.parse().map_err(|_| CliError::Usage(format!("unknown language `{tag}` (use en or cmn)")))
}

fn load_config(global: &Global) -> CliResult<RunConfig> {
    let mut config = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.seeds = vec![seed];
    }
    Ok(config)
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    let config = load_config(g)?;
    let root = config.output_root();
    match cli.command {
        Command::Map { word, lang } => inspect::cmd_map(&config.data, &word, language(&lang)?, g.json),
        Command::CorpusStats { lang, words, plot } => {
            inspect::cmd_corpus_stats(&config.data, language(&lang)?, words.as_deref(), plot.as_deref(), g.json)
        }
        Command::Train { out } => {
            let dir = out.unwrap_or_else(|| root.join("traces"));
            train::cmd_train(&config, &dir, g.jobs, g.force, g.json)
        }
        Command::Analyze { traces, out, threshold, fraction, window, strict } => {
            let mut params = if strict { DetectionParams::strict() } else { config.training.detection };
            params.threshold = threshold.unwrap_or(params.threshold);
            params.fraction = fraction.unwrap_or(params.fraction);
            params.window = window.unwrap_or(params.window);
            let dir = out.unwrap_or_else(|| root.join("analysis"));
            analyze::cmd_analyze(&traces, &params, &dir, g.json)
        }
        Command::Reproduce { out } => {
            let dir = out.unwrap_or(root);
            reproduce::cmd_reproduce(&config, &dir, g.jobs, g.force, g.json)
        }
    }
}

fn main() -> ExitCode {
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
            eprintln!("viseme-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
