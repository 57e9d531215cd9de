//! Intrinsic choice of the subspace dimensionality by k-fold cross-validation
//! over the minimal pairs themselves.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{evaluate, fit_lda_with, LdaOptions};
use crate::embeddings::Class;
use crate::error::{Error, Result};
use crate::subspace::{learn_subspace_with, EmbeddedPairSet, PcaOptions, Subspace};

/// Upper bound of the default component grid.
pub const DEFAULT_GRID_CAP: usize = 128;

/// Settings shared by cross-validation and the transfer harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProtocolOptions {
    pub pca: PcaOptions,
    pub lda: LdaOptions,
    /// Subtract the subspace's global mean before projecting.
    pub centered_projection: bool,
}

impl ProtocolOptions {
    pub(crate) fn project(&self, subspace: &Subspace, v: &[f64]) -> Result<Vec<f64>> {
        if self.centered_projection {
            subspace.project_centered(v)
        } else {
            subspace.project(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub c: usize,
    pub mean_f1: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSelection {
    pub chosen_c: usize,
    pub curve: Vec<CurvePoint>,
    pub k_folds: usize,
    pub seed: u64,
}

impl ComponentSelection {
    /// Tab-separated curve with a `c mean_f1 stderr` header.
    pub fn write_curve<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "c\tmean_f1\tstderr")?;
        for p in &self.curve {
            writeln!(w, "{}\t{:.6}\t{:.6}", p.c, p.mean_f1, p.std_error)?;
        }
        Ok(())
    }
}

/// Splits pair indices `0..n` into `k` folds: the indices are shuffled with a
/// ChaCha8 generator seeded by `seed`, and shuffled position `p` goes to fold
/// `p % k`. Each fold is returned in ascending index order.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    folds
}

/// Largest `c` that every training split of `k`-fold CV over `n_pairs` pairs
/// can support.
pub fn max_cv_components(n_pairs: usize, k: usize, dim: usize) -> usize {
    let smallest_train = n_pairs - n_pairs.div_ceil(k);
    (2 * smallest_train).saturating_sub(1).min(dim)
}

/// `1..=max_cv_components`, capped at [`DEFAULT_GRID_CAP`].
pub fn default_grid(n_pairs: usize, k: usize, dim: usize) -> Vec<usize> {
    (1..=max_cv_components(n_pairs, k, dim).min(DEFAULT_GRID_CAP)).collect()
}

pub fn select_components(
    set: &EmbeddedPairSet,
    c_grid: &[usize],
    k: usize,
    seed: u64,
) -> Result<ComponentSelection> {
    select_components_with(set, c_grid, k, seed, ProtocolOptions::default())
}

/// Cross-validates every `c` in `c_grid` and picks the one with the highest
/// fold-averaged macro-F1 (smallest `c` on ties).
///
/// Folds partition the pairs, so both members of a pair are always held out
/// together. In each fold a subspace is learned on the training pairs, an LDA
/// is fit on the projected training vectors, and the held-out vectors are
/// scored.
pub fn select_components_with(
    set: &EmbeddedPairSet,
    c_grid: &[usize],
    k: usize,
    seed: u64,
    options: ProtocolOptions,
) -> Result<ComponentSelection> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    let n = set.len();
    if n < k {
        return Err(Error::invalid(format!("{n} pairs cannot fill {k} folds")));
    }
    if c_grid.is_empty() {
        return Err(Error::invalid("component grid is empty"));
    }
    let limit = max_cv_components(n, k, set.dim());
    if let Some(&bad) = c_grid.iter().find(|&&c| c == 0 || c > limit) {
        return Err(Error::invalid(format!(
            "grid value {bad} outside 1..={limit} for {n} pairs, {k} folds, dimension {}",
            set.dim()
        )));
    }
    let max_c = *c_grid.iter().max().expect("grid is nonempty");

    let folds = fold_assignment(n, k, seed);
    // scores[g][f]: macro-F1 of grid entry g on fold f.
    let mut scores = vec![Vec::with_capacity(k); c_grid.len()];
    for held_out in &folds {
        let train_idx: Vec<usize> = (0..n).filter(|i| held_out.binary_search(i).is_err()).collect();
        let train = set.select(&train_idx)?;
        let test = set.select(held_out)?;
        let subspace = learn_subspace_with(&train, max_c, options.pca)?;

        let project_all = |s: &EmbeddedPairSet| -> Result<(Vec<Vec<f64>>, Vec<Class>)> {
            let mut xs = Vec::with_capacity(2 * s.len());
            let mut ys = Vec::with_capacity(2 * s.len());
            for (v, class) in s.labeled_vectors() {
                xs.push(options.project(&subspace, v)?);
                ys.push(class);
            }
            Ok((xs, ys))
        };
        let (train_x, train_y) = project_all(&train)?;
        let (test_x, test_y) = project_all(&test)?;

        for (g, &c) in c_grid.iter().enumerate() {
            // Leading coordinates equal the projection onto the leading c components.
            let tx: Vec<&[f64]> = train_x.iter().map(|v| &v[..c]).collect();
            let model = fit_lda_with(&tx, &train_y, options.lda)?;
            let pred = test_x
                .iter()
                .map(|v| model.predict(&v[..c]))
                .collect::<Result<Vec<_>>>()?;
            scores[g].push(evaluate(&pred, &test_y)?.macro_f1);
        }
    }

    let curve: Vec<CurvePoint> = c_grid
        .iter()
        .zip(&scores)
        .map(|(&c, s)| {
            let (mean_f1, std_error) = mean_and_stderr(s);
            CurvePoint { c, mean_f1, std_error }
        })
        .collect();
    let chosen_c = curve
        .iter()
        .fold(None::<&CurvePoint>, |best, p| match best {
            Some(b) if b.mean_f1 > p.mean_f1 || (b.mean_f1 == p.mean_f1 && b.c <= p.c) => Some(b),
            _ => Some(p),
        })
        .map(|p| p.c)
        .expect("curve is nonempty");
    Ok(ComponentSelection {
        chosen_c,
        curve,
        k_folds: k,
        seed,
    })
}

/// Mean and standard error (sample standard deviation over `√n`; zero for a
/// single value).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
