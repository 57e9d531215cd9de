//! `semsub`: learn contrastive subspaces from minimal pairs, pick their size,
//! run zero-shot transfer experiments, and neutralise words.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 parse, 5 precondition,
//! 6 internal.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "semsub", version, about = "Contrastive semantic subspaces from minimal pairs")]
struct Cli {
    /// Flat TOML experiment file; SEMSUB_<KEY> variables and flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    keys: KeyFlags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a subspace from minimal pairs and save it.
    Learn,
    /// Cross-validate the number of components and write the F1 curve.
    Select,
    /// Zero-shot transfer from pairs to labelled task files.
    Transfer,
    /// Replace words by their nearest neighbours after subspace removal.
    Substitute {
        /// Words to substitute, in addition to any `--words` file.
        #[arg(value_name = "WORD")]
        tokens: Vec<String>,
    },
    /// Write a synthetic benchmark with a planted direction.
    GenBench,
}

/// Every configuration key as a flag.
#[derive(Debug, Args)]
struct KeyFlags {
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for transfer runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Centre the pair vectors before PCA (default).
    #[arg(long, global = true, overrides_with = "no_center")]
    center: bool,
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    no_center: bool,
    /// Scale every input vector to unit length.
    #[arg(long, global = true)]
    normalize_inputs: bool,
    /// Subtract the subspace mean before projecting.
    #[arg(long, global = true)]
    centered_projection: bool,
    /// Equal class priors in LDA.
    #[arg(long, global = true)]
    uniform_priors: bool,

    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    sentence_embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    pairs: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    tasks: Option<Vec<PathBuf>>,
    #[arg(long, global = true)]
    positive_label: Option<String>,
    /// RAW or NORM.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Fixed number of components (cross-validated when omitted).
    #[arg(short, long, global = true)]
    c: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    c_grid: Option<Vec<usize>>,
    #[arg(long, global = true)]
    k_folds: Option<usize>,
    /// BASE, PCA_RAW, PCA_NORM.
    #[arg(long, global = true, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    #[arg(long, global = true, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    subspace: Option<PathBuf>,
    #[arg(long, global = true)]
    words: Option<PathBuf>,
    #[arg(long, global = true)]
    k_neighbors: Option<usize>,
    /// Keep candidates that contain the source word.
    #[arg(long, global = true)]
    keep_variants: bool,
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    bench_dim: Option<usize>,
    #[arg(long, global = true)]
    bench_pairs: Option<usize>,
    #[arg(long, global = true)]
    bench_task: Option<usize>,
    #[arg(long, global = true)]
    bench_topic_shift: Option<f64>,
    #[arg(long, global = true)]
    bench_noise: Option<f64>,
}

impl KeyFlags {
    fn into_config(self) -> ExperimentConfig {
        let set = |flag: bool| flag.then_some(true);
        ExperimentConfig {
            embeddings: self.embeddings,
            sentence_embeddings: self.sentence_embeddings,
            pairs: self.pairs,
            tasks: self.tasks,
            positive_label: self.positive_label,
            mode: self.mode,
            c: self.c,
            c_grid: self.c_grid,
            k_folds: self.k_folds,
            kinds: self.kinds,
            sizes: self.sizes,
            seed: self.seed,
            runs: self.runs,
            center: if self.no_center { Some(false) } else { set(self.center) },
            normalize_inputs: set(self.normalize_inputs),
            centered_projection: set(self.centered_projection),
            uniform_priors: set(self.uniform_priors),
            subspace: self.subspace,
            words: self.words,
            k_neighbors: self.k_neighbors,
            exclude_variants: self.keep_variants.then_some(false),
            output: self.output,
            out_dir: self.out_dir,
            threads: self.threads,
            bench_dim: self.bench_dim,
            bench_pairs: self.bench_pairs,
            bench_task: self.bench_task,
            bench_topic_shift: self.bench_topic_shift,
            bench_noise: self.bench_noise,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let flags = cli.keys.into_config();
    let cfg = ExperimentConfig::resolve(cli.config.as_deref(), &flags)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Internal(e.to_string()))?;

    pool.install(|| match &cli.command {
        Command::Learn => commands::learn(&cfg),
        Command::Select => commands::select(&cfg),
        Command::Transfer => commands::transfer(&cfg),
        Command::Substitute { tokens } => commands::substitute_batch(&cfg, tokens),
        Command::GenBench => commands::gen_bench(&cfg),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
