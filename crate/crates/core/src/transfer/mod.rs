//! Zero-shot transfer harness.
//!
//! Classifiers are trained only on (subsets of) the minimal pairs, in one of
//! three representations, and scored on target tasks they have never seen.
//! Every `(seed, size)` run draws its own subsample, selects its own `c`, and
//! learns its own subspace.

mod synthetic;

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{evaluate, fit_lda_with, LdaModel};
use crate::embeddings::{Class, LabeledDataset};
use crate::error::{Error, Result};
use crate::selection::{
    default_grid, max_cv_components, mean_and_stderr, select_components_with, ProtocolOptions,
};
use crate::subspace::{learn_subspace_with, max_components, mean_shift, EmbeddedPairSet, PairMode, Subspace};

pub use synthetic::{
    generate_synthetic_benchmark, BenchmarkParams, SyntheticBenchmark, INTENSITY_JITTER, SEPARATION,
    SOURCE_NOISE_FRACTION, TOPIC_SPREAD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepresentationKind {
    /// The embedding itself.
    #[serde(rename = "BASE")]
    Base,
    /// Projection onto the subspace of the raw pairs.
    #[serde(rename = "PCA_RAW")]
    PcaRaw,
    /// Projection onto the subspace of the mean-shifted pairs.
    #[serde(rename = "PCA_NORM")]
    PcaNorm,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 3] = [
        RepresentationKind::Base,
        RepresentationKind::PcaRaw,
        RepresentationKind::PcaNorm,
    ];
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepresentationKind::Base => "BASE",
            RepresentationKind::PcaRaw => "PCA_RAW",
            RepresentationKind::PcaNorm => "PCA_NORM",
        })
    }
}

impl FromStr for RepresentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "BASE" => Ok(RepresentationKind::Base),
            "PCA_RAW" => Ok(RepresentationKind::PcaRaw),
            "PCA_NORM" => Ok(RepresentationKind::PcaNorm),
            _ => Err(Error::invalid(format!("unknown representation kind {s:?}"))),
        }
    }
}

/// How each PCA run picks its number of components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentPolicy {
    /// Intrinsic cross-validation on the run's own subsample. Runs with fewer
    /// than `k` pairs use one fold per pair. Without an explicit grid the
    /// default grid for the subsample size is used; an explicit grid is
    /// clipped to the values the subsample supports.
    Intrinsic { k: usize, grid: Option<Vec<usize>> },
    Fixed(usize),
}

impl Default for ComponentPolicy {
    fn default() -> Self {
        ComponentPolicy::Intrinsic { k: 5, grid: None }
    }
}

/// Draws `n` pairs without replacement: the first `n` entries of a seeded
/// ChaCha8 shuffle of the pair order.
pub fn subsample_pairs(set: &EmbeddedPairSet, n: usize, seed: u64) -> Result<EmbeddedPairSet> {
    if n == 0 || n > set.len() {
        return Err(Error::invalid(format!(
            "sample size {n} outside 1..={}",
            set.len()
        )));
    }
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.truncate(n);
    set.select(&order)
}

/// A representation map fitted on one subsample.
#[derive(Debug, Clone)]
pub struct Representation {
    pub kind: RepresentationKind,
    pub subspace: Option<Subspace>,
    centered_projection: bool,
}

impl Representation {
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        match &self.subspace {
            None => Ok(v.to_vec()),
            Some(s) if self.centered_projection => s.project_centered(v),
            Some(s) => s.project(v),
        }
    }
}

/// Fits the representation and classifier of one kind on a RAW subsample.
///
/// For the PCA kinds the classifier is trained on the raw pair vectors
/// projected onto the subspace; for PCA_NORM only the subspace comes from
/// the mean-shifted pairs.
pub fn fit_representation(
    sample: &EmbeddedPairSet,
    kind: RepresentationKind,
    policy: &ComponentPolicy,
    cv_seed: u64,
    options: ProtocolOptions,
) -> Result<(Representation, LdaModel)> {
    if sample.mode() != PairMode::Raw {
        return Err(Error::invalid("transfer expects RAW pairs"));
    }
    let subspace = match kind {
        RepresentationKind::Base => None,
        RepresentationKind::PcaRaw | RepresentationKind::PcaNorm => {
            let learn_set = if kind == RepresentationKind::PcaNorm {
                mean_shift(sample)?
            } else {
                sample.clone()
            };
            let c = choose_c(&learn_set, policy, cv_seed, options)?;
            Some(learn_subspace_with(&learn_set, c, options.pca)?)
        }
    };
    let repr = Representation {
        kind,
        subspace,
        centered_projection: options.centered_projection,
    };
    let mut xs = Vec::with_capacity(2 * sample.len());
    let mut ys = Vec::with_capacity(2 * sample.len());
    for (v, class) in sample.labeled_vectors() {
        xs.push(repr.apply(v)?);
        ys.push(class);
    }
    let model = fit_lda_with(&xs, &ys, options.lda)?;
    Ok((repr, model))
}

fn choose_c(
    set: &EmbeddedPairSet,
    policy: &ComponentPolicy,
    seed: u64,
    options: ProtocolOptions,
) -> Result<usize> {
    match policy {
        ComponentPolicy::Fixed(c) => {
            let limit = max_components(set.len(), set.dim());
            if *c == 0 || *c > limit {
                return Err(Error::invalid(format!(
                    "fixed c = {c} outside 1..={limit} for {} pairs",
                    set.len()
                )));
            }
            Ok(*c)
        }
        ComponentPolicy::Intrinsic { k, grid } => {
            let k = (*k).min(set.len());
            let grid = match grid {
                None => default_grid(set.len(), k, set.dim()),
                Some(g) => {
                    let limit = max_cv_components(set.len(), k, set.dim());
                    g.iter().copied().filter(|&c| c >= 1 && c <= limit).collect()
                }
            };
            Ok(select_components_with(set, &grid, k, seed, options)?.chosen_c)
        }
    }
}

/// Macro-F1 of one run on one task.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub kind: RepresentationKind,
    pub n_pairs: usize,
    pub seed: u64,
    pub task: String,
    pub macro_f1: f64,
    /// Components used (`None` for BASE).
    pub chosen_c: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub kind: RepresentationKind,
    pub n_pairs: usize,
    pub task: String,
    pub mean_macro_f1: f64,
    pub std_error: f64,
    pub runs: usize,
    pub chosen_c: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub rows: Vec<ReportRow>,
    /// Individual runs ordered by (kind, size, task, seed position).
    pub runs: Vec<RunResult>,
}

#[derive(Debug, Clone, Default)]
pub struct TransferSpec {
    pub sizes: Vec<usize>,
    pub kinds: Vec<RepresentationKind>,
    pub seeds: Vec<u64>,
    pub policy: ComponentPolicy,
    pub options: ProtocolOptions,
}

/// Runs every `(seed, size, kind)` combination and aggregates macro-F1 per
/// `(kind, size, task)`.
///
/// Runs are evaluated in parallel on the current rayon pool; the report
/// does not depend on scheduling. Fails if any pair surface form equals a
/// task instance id.
pub fn run_transfer(
    pairs: &EmbeddedPairSet,
    tasks: &[LabeledDataset],
    spec: &TransferSpec,
) -> Result<TransferReport> {
    if spec.sizes.is_empty() || spec.kinds.is_empty() || spec.seeds.is_empty() {
        return Err(Error::invalid("sizes, kinds and seeds must all be nonempty"));
    }
    if pairs.mode() != PairMode::Raw {
        return Err(Error::invalid("transfer expects RAW pairs"));
    }
    if let Some(&bad) = spec.sizes.iter().find(|&&s| s < 2 || s > pairs.len()) {
        return Err(Error::invalid(format!(
            "training size {bad} outside 2..={}",
            pairs.len()
        )));
    }
    for task in tasks {
        if task.dim != pairs.dim() {
            return Err(Error::DimensionMismatch {
                expected: pairs.dim(),
                found: task.dim,
            });
        }
        if task.is_empty() {
            return Err(Error::invalid(format!("task {:?} has no instances", task.name)));
        }
    }
    let train_ids: HashSet<&str> = pairs.surfaces().collect();
    for task in tasks {
        if let Some(hit) = task.instances.iter().find(|i| train_ids.contains(i.id.as_str())) {
            return Err(Error::ZeroShotViolation(hit.id.clone()));
        }
    }

    let mut jobs = Vec::new();
    for &kind in &spec.kinds {
        for &size in &spec.sizes {
            for (pos, &seed) in spec.seeds.iter().enumerate() {
                jobs.push((kind, size, pos, seed));
            }
        }
    }
    let results: Vec<Vec<RunResult>> = jobs
        .par_iter()
        .map(|&(kind, size, _, seed)| {
            let sample = subsample_pairs(pairs, size, seed)?;
            let (repr, model) = fit_representation(&sample, kind, &spec.policy, seed, spec.options)?;
            let chosen_c = repr.subspace.as_ref().map(Subspace::n_components);
            tasks
                .iter()
                .map(|task| {
                    let mut pred = Vec::with_capacity(task.len());
                    let mut gold = Vec::with_capacity(task.len());
                    for inst in &task.instances {
                        pred.push(model.predict(&repr.apply(&inst.vector)?)?);
                        gold.push(inst.label);
                    }
                    Ok(RunResult {
                        kind,
                        n_pairs: size,
                        seed,
                        task: task.name.clone(),
                        macro_f1: evaluate(&pred, &gold)?.macro_f1,
                        chosen_c,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    // Jobs are (kind, size, seed); regroup as (kind, size, task, seed).
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    let n_seeds = spec.seeds.len();
    for (block, chunk) in results.chunks(n_seeds).enumerate() {
        let (kind, size, _, _) = jobs[block * n_seeds];
        for (t, task) in tasks.iter().enumerate() {
            let per_seed: Vec<&RunResult> = chunk.iter().map(|r| &r[t]).collect();
            let f1s: Vec<f64> = per_seed.iter().map(|r| r.macro_f1).collect();
            let (mean, se) = mean_and_stderr(&f1s);
            rows.push(ReportRow {
                kind,
                n_pairs: size,
                task: task.name.clone(),
                mean_macro_f1: mean,
                std_error: se,
                runs: f1s.len(),
                chosen_c: per_seed.iter().map(|r| r.chosen_c).collect(),
            });
            runs.extend(per_seed.into_iter().cloned());
        }
    }
    Ok(TransferReport { rows, runs })
}

impl TransferReport {
    pub fn row(&self, kind: RepresentationKind, n_pairs: usize, task: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.n_pairs == n_pairs && r.task == task)
    }

    /// Tab-separated export, one line per row.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kind\tn_pairs\ttask\tmean_macro_f1\tstd_error\truns\tchosen_c")?;
        for r in &self.rows {
            writeln!(
                w,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}",
                r.kind,
                r.n_pairs,
                r.task,
                r.mean_macro_f1,
                r.std_error,
                r.runs,
                format_chosen(&r.chosen_c)
            )?;
        }
        Ok(())
    }

    /// Fixed-width table for terminals.
    pub fn write_table<W: Write>(&self, mut w: W) -> Result<()> {
        let task_w = self.rows.iter().map(|r| r.task.len()).max().unwrap_or(4).max(4);
        writeln!(
            w,
            "{:<8}  {:>7}  {:<task_w$}  {:>15}  c",
            "kind", "n_pairs", "task", "macro-F1"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{:<8}  {:>7}  {:<task_w$}  {:>6.2} ± {:<6.2}  {}",
                r.kind.to_string(),
                r.n_pairs,
                r.task,
                100.0 * r.mean_macro_f1,
                100.0 * r.std_error,
                format_chosen(&r.chosen_c)
            )?;
        }
        Ok(())
    }
}

fn format_chosen(chosen: &[Option<usize>]) -> String {
    if chosen.iter().all(Option::is_none) {
        return "-".to_string();
    }
    chosen
        .iter()
        .map(|c| c.map_or_else(|| "-".to_string(), |c| c.to_string()))
        .collect::<Vec<_>>()
        .join(",")
}

/// Class labels of a task, in instance order.
pub fn gold_labels(task: &LabeledDataset) -> Vec<Class> {
    task.instances.iter().map(|i| i.label).collect()
}
