use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semsub::embeddings::sentence_record_line;
use semsub::linalg::norm;
use semsub::selection::default_grid;
use semsub::transfer::{ComponentPolicy, RepresentationKind, TransferSpec};
use semsub::{
    embed_pairs, embed_sentence_pairs, generate_synthetic_benchmark, learn_subspace_with,
    load_sentence_embeddings, load_word_vectors, mean_shift, orthographic_variants,
    read_pair_file, run_transfer, select_components_with, substitute, BenchmarkParams,
    EmbeddedPairSet, EmbeddingTable, LabeledDataset, LdaOptions, PairMode, PcaOptions,
    ProtocolOptions, Subspace,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_RUNS: usize = 5;
pub const DEFAULT_K_FOLDS: usize = 5;
pub const DEFAULT_K_NEIGHBORS: usize = 4;
const DEFAULT_SIZES: [usize; 6] = [2, 5, 10, 20, 50, 100];

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn with_path<T>(path: &Path, r: semsub::Result<T>) -> Result<T> {
    r.map_err(|source| match source {
        semsub::Error::Io(e) => CliError::io(path, e),
        source => CliError::Data {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Buffered output to a file, or to stdout when no path is given.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    w.flush()
        .map_err(|e| CliError::io(path.unwrap_or(Path::new("<stdout>")), e))
}

fn write_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::io(path.unwrap_or(Path::new("<stdout>")), e)
}

fn normalize_inputs(cfg: &ExperimentConfig) -> bool {
    cfg.normalize_inputs.unwrap_or(false)
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn load_table(cfg: &ExperimentConfig) -> Result<EmbeddingTable> {
    let path = ExperimentConfig::require(&cfg.embeddings, "embeddings")?;
    let table = with_path(&path, load_word_vectors(open(&path)?))?;
    if table.duplicates() > 0 {
        eprintln!(
            "warning: {}: {} duplicate token(s), first occurrence kept",
            path.display(),
            table.duplicates()
        );
    }
    Ok(if normalize_inputs(cfg) { table.normalized() } else { table })
}

fn load_dataset(path: &Path, cfg: &ExperimentConfig) -> Result<LabeledDataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let mut ds = with_path(
        path,
        load_sentence_embeddings(open(path)?, &name, cfg.positive_label.as_deref()),
    )?;
    if normalize_inputs(cfg) {
        for inst in &mut ds.instances {
            inst.vector = unit(std::mem::take(&mut inst.vector));
        }
    }
    Ok(ds)
}

/// The RAW pair set described by the configuration: tokens resolved in the
/// word-vector table, or sentence ids resolved in the sentence embeddings.
fn load_pairs(cfg: &ExperimentConfig) -> Result<EmbeddedPairSet> {
    let path = ExperimentConfig::require(&cfg.pairs, "pairs")?;
    let list = with_path(&path, read_pair_file(open(&path)?))?;
    match (&cfg.sentence_embeddings, &cfg.embeddings) {
        (Some(sentences), _) => {
            let ds = load_dataset(sentences, cfg)?;
            with_path(&path, embed_sentence_pairs(&list, &ds))
        }
        (None, Some(_)) => {
            let table = load_table(cfg)?;
            with_path(&path, embed_pairs(&list, &table))
        }
        (None, None) => Err(CliError::Missing("embeddings")),
    }
}

fn pair_mode(cfg: &ExperimentConfig, default: PairMode) -> Result<PairMode> {
    match &cfg.mode {
        Some(m) => Ok(m.parse()?),
        None => Ok(default),
    }
}

fn in_mode(set: EmbeddedPairSet, mode: PairMode) -> Result<EmbeddedPairSet> {
    Ok(match mode {
        PairMode::Raw => set,
        PairMode::Norm => mean_shift(&set)?,
    })
}

fn protocol(cfg: &ExperimentConfig) -> ProtocolOptions {
    ProtocolOptions {
        pca: PcaOptions {
            center: cfg.center.unwrap_or(true),
        },
        lda: LdaOptions {
            uniform_priors: cfg.uniform_priors.unwrap_or(false),
        },
        centered_projection: cfg.centered_projection.unwrap_or(false),
    }
}

/// Per-run seeds drawn from one ChaCha8 stream seeded by the top-level seed.
pub fn expand_seeds(seed: u64, runs: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..runs).map(|_| rng.next_u64()).collect()
}

fn cv_select(set: &EmbeddedPairSet, cfg: &ExperimentConfig) -> Result<semsub::ComponentSelection> {
    let k = cfg.k_folds.unwrap_or(DEFAULT_K_FOLDS);
    let grid = match &cfg.c_grid {
        Some(g) => g.clone(),
        None => default_grid(set.len(), k, set.dim()),
    };
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    Ok(select_components_with(set, &grid, k, seed, protocol(cfg))?)
}

pub fn learn(cfg: &ExperimentConfig) -> Result<()> {
    let output = ExperimentConfig::require(&cfg.output, "output")?;
    let mode = pair_mode(cfg, PairMode::Norm)?;
    let set = in_mode(load_pairs(cfg)?, mode)?;
    let c = match cfg.c {
        Some(c) => c,
        None => cv_select(&set, cfg)?.chosen_c,
    };
    let subspace = learn_subspace_with(&set, c, protocol(cfg).pca)?;
    let mut w = sink(Some(&output))?;
    subspace.write_to(&mut w)?;
    finish(w, Some(&output))?;

    let explained: f64 = subspace.explained_variance_ratio().iter().sum();
    println!(
        "learned {mode} subspace: {} pairs, c = {c}, explained variance {explained:.4} -> {}",
        set.len(),
        output.display()
    );
    Ok(())
}

pub fn select(cfg: &ExperimentConfig) -> Result<()> {
    let mode = pair_mode(cfg, PairMode::Raw)?;
    let set = in_mode(load_pairs(cfg)?, mode)?;
    let selection = cv_select(&set, cfg)?;
    let out = cfg.output.as_deref();
    let mut w = sink(out)?;
    selection.write_curve(&mut w)?;
    finish(w, out)?;
    eprintln!(
        "chosen c = {} ({}-fold, seed {})",
        selection.chosen_c, selection.k_folds, selection.seed
    );
    Ok(())
}

pub fn transfer(cfg: &ExperimentConfig) -> Result<()> {
    let out_dir = ExperimentConfig::require(&cfg.out_dir, "out_dir")?;
    let task_paths = ExperimentConfig::require(&cfg.tasks, "tasks")?;
    let pairs = load_pairs(cfg)?;
    let tasks = task_paths
        .iter()
        .map(|p| load_dataset(p, cfg))
        .collect::<Result<Vec<_>>>()?;

    let kinds = match &cfg.kinds {
        Some(ks) => ks.iter().map(|k| k.parse()).collect::<semsub::Result<Vec<RepresentationKind>>>()?,
        None => RepresentationKind::ALL.to_vec(),
    };
    let sizes = match &cfg.sizes {
        Some(s) => s.clone(),
        None => {
            let mut s: Vec<usize> = DEFAULT_SIZES.iter().copied().filter(|&s| s <= pairs.len()).collect();
            if !s.contains(&pairs.len()) {
                s.push(pairs.len());
            }
            s
        }
    };
    let policy = match cfg.c {
        Some(c) => ComponentPolicy::Fixed(c),
        None => ComponentPolicy::Intrinsic {
            k: cfg.k_folds.unwrap_or(DEFAULT_K_FOLDS),
            grid: cfg.c_grid.clone(),
        },
    };
    let spec = TransferSpec {
        sizes,
        kinds,
        seeds: expand_seeds(cfg.seed.unwrap_or(DEFAULT_SEED), cfg.runs.unwrap_or(DEFAULT_RUNS)),
        policy,
        options: protocol(cfg),
    };
    let report = run_transfer(&pairs, &tasks, &spec)?;

    let report_path = out_dir.join("report.tsv");
    let mut w = sink(Some(&report_path))?;
    report.write_tsv(&mut w)?;
    finish(w, Some(&report_path))?;

    let runs_path = out_dir.join("runs.tsv");
    let mut w = sink(Some(&runs_path))?;
    let err = write_err(Some(&runs_path));
    writeln!(w, "kind\tn_pairs\tseed\ttask\tmacro_f1\tc").map_err(&err)?;
    for r in &report.runs {
        let c = r.chosen_c.map_or_else(|| "-".to_string(), |c| c.to_string());
        writeln!(w, "{}\t{}\t{}\t{}\t{:.6}\t{c}", r.kind, r.n_pairs, r.seed, r.task, r.macro_f1)
            .map_err(&err)?;
    }
    finish(w, Some(&runs_path))?;

    let config_path = out_dir.join("config.toml");
    fs::write(&config_path, cfg.to_reproducible_toml()).map_err(|e| CliError::io(&config_path, e))?;

    let mut stdout = io::stdout().lock();
    report.write_table(&mut stdout)?;
    Ok(())
}

/// One token per line; blank lines and `#` comments are skipped.
fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let mut words = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            words.push(t.to_string());
        }
    }
    Ok(words)
}

/// Writes `source rank candidate cosine` rows. Words that are not in the
/// vocabulary, or whose vector lies entirely inside the subspace, get a
/// single row with `-` in the other columns and are counted on stderr; the
/// batch itself still succeeds.
pub fn substitute_batch(cfg: &ExperimentConfig, extra_words: &[String]) -> Result<()> {
    let table = load_table(cfg)?;
    let subspace_path = ExperimentConfig::require(&cfg.subspace, "subspace")?;
    let subspace = with_path(&subspace_path, Subspace::read_from(open(&subspace_path)?))?;
    if subspace.dim() != table.dim() {
        return Err(semsub::Error::DimensionMismatch {
            expected: table.dim(),
            found: subspace.dim(),
        }
        .into());
    }
    let mut words = match &cfg.words {
        Some(p) => read_word_list(p)?,
        None => Vec::new(),
    };
    words.extend(extra_words.iter().cloned());
    let k = cfg.k_neighbors.unwrap_or(DEFAULT_K_NEIGHBORS);
    let filter_variants = cfg.exclude_variants.unwrap_or(true);

    let out = cfg.output.as_deref();
    let mut w = sink(out)?;
    let err = write_err(out);
    let mut flagged = 0;
    for word in &words {
        let result = if filter_variants {
            substitute(word, &table, &subspace, k, orthographic_variants(word))
        } else {
            substitute(word, &table, &subspace, k, |_| false)
        };
        match result {
            Ok(r) => {
                for (rank, (cand, cos)) in r.candidates.iter().enumerate() {
                    writeln!(w, "{word}\t{}\t{cand}\t{cos:.6}", rank + 1).map_err(&err)?;
                }
            }
            Err(e @ (semsub::Error::UnknownToken(_) | semsub::Error::Degenerate(_))) => {
                flagged += 1;
                eprintln!("skipped {word:?}: {e}");
                writeln!(w, "{word}\t-\t-\t-").map_err(&err)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    finish(w, out)?;
    if flagged > 0 {
        eprintln!("{flagged} of {} word(s) flagged", words.len());
    }
    Ok(())
}

pub fn gen_bench(cfg: &ExperimentConfig) -> Result<()> {
    let out_dir = ExperimentConfig::require(&cfg.out_dir, "out_dir")?;
    let params = BenchmarkParams {
        dim: cfg.bench_dim.unwrap_or(64),
        n_pairs: cfg.bench_pairs.unwrap_or(100),
        n_task: cfg.bench_task.unwrap_or(400),
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        topic_shift: cfg.bench_topic_shift.unwrap_or(5.0),
        noise_scale: cfg.bench_noise.unwrap_or(1.0),
    };
    let bench = generate_synthetic_benchmark(params)?;
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    let pairs_path = out_dir.join("pairs.tsv");
    let mut w = sink(Some(&pairs_path))?;
    let err = write_err(Some(&pairs_path));
    for (a, b) in bench.pair_ids() {
        writeln!(w, "{a}\t{b}").map_err(&err)?;
    }
    finish(w, Some(&pairs_path))?;

    for (file, ds) in [("source.jsonl", bench.source_dataset()), ("task.jsonl", bench.task.clone())] {
        let path = out_dir.join(file);
        let mut w = sink(Some(&path))?;
        let err = write_err(Some(&path));
        for inst in &ds.instances {
            writeln!(w, "{}", sentence_record_line(inst, &ds.positive_label)).map_err(&err)?;
        }
        finish(w, Some(&path))?;
    }

    let direction_path = out_dir.join("direction.txt");
    let cells: Vec<String> = bench.direction.iter().map(|x| format!("{x:.16e}")).collect();
    fs::write(&direction_path, cells.join(" ") + "\n").map_err(|e| CliError::io(&direction_path, e))?;

    let experiment = ExperimentConfig {
        sentence_embeddings: Some(PathBuf::from("source.jsonl")),
        pairs: Some(PathBuf::from("pairs.tsv")),
        tasks: Some(vec![PathBuf::from("task.jsonl")]),
        positive_label: Some(bench.task.positive_label.clone()),
        sizes: Some(DEFAULT_SIZES.iter().copied().filter(|&s| s <= params.n_pairs).collect()),
        seed: Some(params.seed),
        runs: Some(DEFAULT_RUNS),
        out_dir: Some(PathBuf::from("report")),
        ..Default::default()
    };
    let config_path = out_dir.join("transfer.toml");
    fs::write(&config_path, experiment.to_reproducible_toml()).map_err(|e| CliError::io(&config_path, e))?;

    println!(
        "benchmark: dim {}, {} pairs, {} task instances, topic shift {}, noise {} -> {}",
        params.dim,
        params.n_pairs,
        params.n_task,
        params.topic_shift,
        params.noise_scale,
        out_dir.display()
    );
    Ok(())
}
