//! Minimal-pair sets and the principal subspaces learned from them.
//!
//! A pair set holds `N` pairs `(a, b)` where `a` carries the semantic feature
//! of interest (e.g. a profane word) and `b` is its neutral counterpart. In
//! [`PairMode::Raw`] the vectors are the embeddings themselves; in
//! [`PairMode::Norm`] each pair has been shifted by its own midpoint so that
//! `a = -b`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embeddings::{Class, EmbeddingTable, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PairMode {
    Raw,
    Norm,
}

impl fmt::Display for PairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairMode::Raw => "RAW",
            PairMode::Norm => "NORM",
        })
    }
}

impl FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RAW" => Ok(PairMode::Raw),
            "NORM" => Ok(PairMode::Norm),
            _ => Err(Error::invalid(format!("unknown pair mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub surface_a: Option<String>,
    pub surface_b: Option<String>,
}

impl Pair {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        Pair {
            a,
            b,
            surface_a: None,
            surface_b: None,
        }
    }
}

/// An ordered set of embedded minimal pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPairSet {
    pairs: Vec<Pair>,
    dim: usize,
    mode: PairMode,
}

impl EmbeddedPairSet {
    pub fn new(pairs: Vec<Pair>, mode: PairMode) -> Result<Self> {
        let dim = pairs
            .first()
            .map(|p| p.a.len())
            .ok_or_else(|| Error::invalid("a pair set needs at least one pair"))?;
        if dim == 0 {
            return Err(Error::invalid("pair vectors must be nonempty"));
        }
        for p in &pairs {
            for v in [&p.a, &p.b] {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.len(),
                    });
                }
            }
        }
        Ok(EmbeddedPairSet { pairs, dim, mode })
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> PairMode {
        self.mode
    }

    /// Subset of pairs in the order of `indices`.
    pub fn select(&self, indices: &[usize]) -> Result<EmbeddedPairSet> {
        let pairs = indices
            .iter()
            .map(|&i| {
                self.pairs
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("pair index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        EmbeddedPairSet::new(pairs, self.mode)
    }

    /// All `2N` vectors with their class role: `a` is positive, `b` neutral.
    pub fn labeled_vectors(&self) -> impl Iterator<Item = (&[f64], Class)> {
        self.pairs.iter().flat_map(|p| {
            [
                (p.a.as_slice(), Class::Positive),
                (p.b.as_slice(), Class::Neutral),
            ]
        })
    }

    /// Surface forms (or sentence ids) of both members of every pair.
    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.pairs
            .iter()
            .flat_map(|p| [p.surface_a.as_deref(), p.surface_b.as_deref()])
            .flatten()
    }
}

/// Reads a minimal-pair file: one `positive<TAB>neutral` pair per line, `#`
/// comments and blank lines ignored.
pub fn read_pair_file<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split('\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
                out.push((a.trim().to_string(), b.trim().to_string()))
            }
            _ => {
                return Err(Error::parse(
                    idx + 1,
                    "expected two tab-separated columns",
                ))
            }
        }
    }
    Ok(out)
}

/// Looks up both members of every pair. Reports every missing token at once.
pub fn embed_pairs(pair_list: &[(String, String)], table: &EmbeddingTable) -> Result<EmbeddedPairSet> {
    embed_with(pair_list, table.dim(), |t| table.get(t).map(<[f64]>::to_vec))
}

/// Resolves sentence-level pairs by id into a sentence-embedding dataset.
pub fn embed_sentence_pairs(
    pair_list: &[(String, String)],
    sentences: &LabeledDataset,
) -> Result<EmbeddedPairSet> {
    let index: std::collections::HashMap<&str, &[f64]> = sentences
        .instances
        .iter()
        .map(|i| (i.id.as_str(), i.vector.as_slice()))
        .collect();
    embed_with(pair_list, sentences.dim, |id| index.get(id).map(|v| v.to_vec()))
}

fn embed_with<F>(pair_list: &[(String, String)], dim: usize, lookup: F) -> Result<EmbeddedPairSet>
where
    F: Fn(&str) -> Option<Vec<f64>>,
{
    let mut missing: Vec<String> = Vec::new();
    let mut pairs = Vec::with_capacity(pair_list.len());
    for (sa, sb) in pair_list {
        let a = lookup(sa);
        let b = lookup(sb);
        for (s, v) in [(sa, &a), (sb, &b)] {
            if v.is_none() && !missing.contains(s) {
                missing.push(s.clone());
            }
        }
        if let (Some(a), Some(b)) = (a, b) {
            pairs.push(Pair {
                a,
                b,
                surface_a: Some(sa.clone()),
                surface_b: Some(sb.clone()),
            });
        }
    }
    if !missing.is_empty() {
        return Err(Error::UnknownToken(missing));
    }
    let set = EmbeddedPairSet::new(pairs, PairMode::Raw)?;
    debug_assert_eq!(set.dim(), dim);
    Ok(set)
}

/// Subtracts each pair's midpoint from both members.
pub fn mean_shift(set: &EmbeddedPairSet) -> Result<EmbeddedPairSet> {
    if set.mode != PairMode::Raw {
        return Err(Error::invalid("mean shift expects a RAW pair set"));
    }
    let pairs = set
        .pairs
        .iter()
        .map(|p| {
            // (a - b) / 2 and its negation are the exact shifted members.
            let half: Vec<f64> = p.a.iter().zip(&p.b).map(|(a, b)| 0.5 * (a - b)).collect();
            let neg: Vec<f64> = half.iter().map(|x| -x).collect();
            Pair {
                a: half,
                b: neg,
                surface_a: p.surface_a.clone(),
                surface_b: p.surface_b.clone(),
            }
        })
        .collect();
    Ok(EmbeddedPairSet {
        pairs,
        dim: set.dim,
        mode: PairMode::Norm,
    })
}

/// Options for principal component extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcaOptions {
    /// Subtract the global mean of the `2N` points before decomposition.
    pub center: bool,
}

impl Default for PcaOptions {
    fn default() -> Self {
        PcaOptions { center: true }
    }
}

/// Largest admissible number of components for a set of `n_pairs` pairs in
/// `dim` dimensions.
pub fn max_components(n_pairs: usize, dim: usize) -> usize {
    (2 * n_pairs).saturating_sub(1).min(dim)
}

/// Orthonormal principal components learned from a pair set.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    components: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    explained_variance_ratio: Vec<f64>,
    mean: Vec<f64>,
    mode: PairMode,
    centered: bool,
}

/// Learns the top-`c` principal components of all `2N` vectors of `set`,
/// with the data centred by its global mean.
pub fn learn_subspace(set: &EmbeddedPairSet, c: usize) -> Result<Subspace> {
    learn_subspace_with(set, c, PcaOptions::default())
}

pub fn learn_subspace_with(set: &EmbeddedPairSet, c: usize, options: PcaOptions) -> Result<Subspace> {
    let limit = max_components(set.len(), set.dim());
    if c == 0 || c > limit {
        return Err(Error::invalid(format!(
            "number of components {c} outside 1..={limit} for {} pairs in {} dimensions",
            set.len(),
            set.dim()
        )));
    }
    let dim = set.dim();
    let n = 2 * set.len();
    let mut mean = vec![0.0; dim];
    if options.center {
        for (v, _) in set.labeled_vectors() {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
    }
    let mut centered = DMatrix::<f64>::zeros(n, dim);
    for (row, (v, _)) in set.labeled_vectors().enumerate() {
        for j in 0..dim {
            centered[(row, j)] = v[j] - mean[j];
        }
    }
    let denom = if options.center { (n - 1) as f64 } else { n as f64 };
    let covariance = centered.tr_mul(&centered) / denom;
    let total: f64 = covariance.trace();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::Degenerate(
            "all pair vectors coincide; covariance is zero".into(),
        ));
    }

    let (values, vectors) = linalg::sorted_symmetric_eigen(covariance);
    let mut components = DMatrix::<f64>::zeros(c, dim);
    for k in 0..c {
        let mut v: DVector<f64> = vectors.column(k).into_owned();
        v.normalize_mut();
        linalg::canonical_sign(&mut v);
        components.set_row(k, &v.transpose());
    }
    let eigenvalues: Vec<f64> = values[..c].iter().map(|&v| v.max(0.0)).collect();
    let explained_variance_ratio = eigenvalues.iter().map(|v| v / total).collect();
    Ok(Subspace {
        components,
        eigenvalues,
        explained_variance_ratio,
        mean,
        mode: set.mode(),
        centered: options.center,
    })
}

impl Subspace {
    /// Builds a subspace from explicit rows. Rows must be orthonormal.
    pub fn from_components(rows: &[Vec<f64>], mode: PairMode) -> Result<Subspace> {
        let c = rows.len();
        let dim = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("a subspace needs at least one component"))?;
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let components = DMatrix::from_fn(c, dim, |i, j| rows[i][j]);
        let gram = &components * components.transpose();
        let off = (gram - DMatrix::identity(c, c)).amax();
        if off > 1e-8 {
            return Err(Error::invalid(format!(
                "component rows are not orthonormal (max deviation {off:e})"
            )));
        }
        Ok(Subspace {
            components,
            eigenvalues: vec![0.0; c],
            explained_variance_ratio: vec![0.0; c],
            mean: vec![0.0; dim],
            mode,
            centered: false,
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn mode(&self) -> PairMode {
        self.mode
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Component matrix, one component per row.
    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.components.row(k).iter().copied().collect()
    }

    /// Variance captured by each component.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn explained_variance_ratio(&self) -> &[f64] {
        &self.explained_variance_ratio
    }

    /// Global mean removed before decomposition (zero when not centred).
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// The leading `c` components. Principal components are nested, so this
    /// equals learning with `c` directly.
    pub fn truncated(&self, c: usize) -> Result<Subspace> {
        if c == 0 || c > self.n_components() {
            return Err(Error::invalid(format!(
                "cannot truncate {} components to {c}",
                self.n_components()
            )));
        }
        Ok(Subspace {
            components: self.components.rows(0, c).into_owned(),
            eigenvalues: self.eigenvalues[..c].to_vec(),
            explained_variance_ratio: self.explained_variance_ratio[..c].to_vec(),
            mean: self.mean.clone(),
            mode: self.mode,
            centered: self.centered,
        })
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Coordinates of `v` in the component basis (`C v`).
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok(self
            .components
            .row_iter()
            .map(|row| row.iter().zip(v).map(|(c, x)| c * x).sum())
            .collect())
    }

    /// Coordinates of `v - mean` in the component basis.
    pub fn project_centered(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        let shifted: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        self.project(&shifted)
    }

    /// Maps subspace coordinates back to the ambient space (`Cᵀ y`).
    pub fn reconstruct(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.n_components() {
            return Err(Error::DimensionMismatch {
                expected: self.n_components(),
                found: coords.len(),
            });
        }
        let y = DVector::from_column_slice(coords);
        Ok((self.components.transpose() * y).iter().copied().collect())
    }

    /// Removes the orthogonal projection of `v` onto the subspace and rescales
    /// the residual to unit length.
    pub fn remove(&self, v: &[f64]) -> Result<Vec<f64>> {
        let coords = self.project(v)?;
        let inside = self.reconstruct(&coords)?;
        let mut residual: Vec<f64> = v.iter().zip(&inside).map(|(x, p)| x - p).collect();
        // One re-orthogonalisation pass keeps |C r| at rounding level when
        // most of the mass of v lies inside the subspace.
        let again = self.reconstruct(&self.project(&residual)?)?;
        residual.iter_mut().zip(&again).for_each(|(r, p)| *r -= p);
        let len = linalg::norm(&residual);
        if len.is_nan() || len <= 1e-10 {
            return Err(Error::Degenerate(
                "vector lies inside the subspace; nothing remains after removal".into(),
            ));
        }
        residual.iter_mut().for_each(|r| *r /= len);
        Ok(residual)
    }

    /// Writes the subspace in its self-describing text format. Floats use 17
    /// significant digits so a read-back is bit-identical.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let join = |xs: &mut dyn Iterator<Item = f64>| {
            xs.map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ")
        };
        writeln!(w, "# semsub subspace v1")?;
        writeln!(w, "mode {}", self.mode)?;
        writeln!(w, "centered {}", self.centered)?;
        writeln!(w, "dim {}", self.dim())?;
        writeln!(w, "c {}", self.n_components())?;
        writeln!(w, "eigenvalues {}", join(&mut self.eigenvalues.iter().copied()))?;
        writeln!(
            w,
            "explained_variance_ratio {}",
            join(&mut self.explained_variance_ratio.iter().copied())
        )?;
        writeln!(w, "mean {}", join(&mut self.mean.iter().copied()))?;
        for row in self.components.row_iter() {
            writeln!(w, "component {}", join(&mut row.iter().copied()))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Subspace> {
        let mut mode = None;
        let mut centered = None;
        let mut dim = None;
        let mut c = None;
        let mut eigenvalues = None;
        let mut ratio = None;
        let mut mean = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let floats = || -> Result<Vec<f64>> {
                rest.split_whitespace()
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| Error::parse(line_no, format!("bad number {s:?}")))
                    })
                    .collect()
            };
            let int = || -> Result<usize> {
                rest.trim()
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad integer {rest:?}")))
            };
            match key {
                "mode" => mode = Some(rest.trim().parse::<PairMode>().map_err(|e| Error::parse(line_no, e.to_string()))?),
                "centered" => {
                    centered = Some(
                        rest.trim()
                            .parse::<bool>()
                            .map_err(|_| Error::parse(line_no, "expected true or false"))?,
                    )
                }
                "dim" => dim = Some(int()?),
                "c" => c = Some(int()?),
                "eigenvalues" => eigenvalues = Some(floats()?),
                "explained_variance_ratio" => ratio = Some(floats()?),
                "mean" => mean = Some(floats()?),
                "component" => rows.push(floats()?),
                other => return Err(Error::parse(line_no, format!("unknown key {other:?}"))),
            }
        }

        let missing = |name: &str| Error::parse(0, format!("subspace file lacks {name:?}"));
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let c = c.ok_or_else(|| missing("c"))?;
        let eigenvalues = eigenvalues.ok_or_else(|| missing("eigenvalues"))?;
        let ratio = ratio.ok_or_else(|| missing("explained_variance_ratio"))?;
        let mean = mean.ok_or_else(|| missing("mean"))?;
        if c == 0 || rows.len() != c || eigenvalues.len() != c || ratio.len() != c {
            return Err(Error::parse(0, format!("expected {c} components and ratios")));
        }
        if mean.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::parse(0, format!("vectors must have length {dim}")));
        }
        Ok(Subspace {
            components: DMatrix::from_fn(c, dim, |i, j| rows[i][j]),
            eigenvalues,
            explained_variance_ratio: ratio,
            mean,
            mode: mode.ok_or_else(|| missing("mode"))?,
            centered: centered.ok_or_else(|| missing("centered"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[(&[f64], &[f64])], mode: PairMode) -> EmbeddedPairSet {
        EmbeddedPairSet::new(
            pairs
                .iter()
                .map(|(a, b)| Pair::new(a.to_vec(), b.to_vec()))
                .collect(),
            mode,
        )
        .unwrap()
    }

    fn axes(rows: &[&[f64]]) -> Subspace {
        Subspace::from_components(
            &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            PairMode::Raw,
        )
        .unwrap()
    }

    #[test]
    fn embed_pairs_looks_up_in_order() {
        let table = EmbeddingTable::from_entries(
            2,
            [("bad".to_string(), vec![0.0, 1.0]), ("fine".to_string(), vec![1.0, 0.0])],
        )
        .unwrap();
        let got = embed_pairs(&[("bad".into(), "fine".into())], &table).unwrap();
        assert_eq!(got.pairs()[0].a, vec![0.0, 1.0]);
        assert_eq!(got.pairs()[0].b, vec![1.0, 0.0]);
        assert_eq!(got.pairs()[0].surface_a.as_deref(), Some("bad"));

        let err = embed_pairs(
            &[
                ("bad".into(), "missing".into()),
                ("gone".into(), "fine".into()),
            ],
            &table,
        )
        .unwrap_err();
        match err {
            Error::UnknownToken(t) => assert_eq!(t, vec!["missing".to_string(), "gone".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pair_file_parsing() {
        let src = "# header\nArschloch\tMann\n\nFotze\tFrau\n";
        let got = read_pair_file(src.as_bytes()).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1], ("Fotze".to_string(), "Frau".to_string()));
        assert!(matches!(
            read_pair_file("one column\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn mean_shift_examples() {
        let s = set(&[(&[3.0, 1.0], &[1.0, 1.0]), (&[0.0, 5.0], &[-2.0, 5.0])], PairMode::Raw);
        let n = mean_shift(&s).unwrap();
        assert_eq!(n.mode(), PairMode::Norm);
        assert_eq!(n.pairs()[0].a, vec![1.0, 0.0]);
        assert_eq!(n.pairs()[0].b, vec![-1.0, 0.0]);
        assert_eq!(n.pairs()[1].a, vec![1.0, 0.0]);
        assert_eq!(n.pairs()[1].b, vec![-1.0, 0.0]);
        assert!(mean_shift(&n).is_err());

        let same = set(&[(&[2.5, -1.0, 7.0], &[2.5, -1.0, 7.0])], PairMode::Raw);
        let z = mean_shift(&same).unwrap();
        assert!(z.pairs()[0].a.iter().chain(&z.pairs()[0].b).all(|&x| x == 0.0));
    }

    #[test]
    fn learn_on_axis_zero() {
        let s = set(&[(&[1.0, 0.0], &[-1.0, 0.0]), (&[2.0, 0.0], &[-2.0, 0.0])], PairMode::Norm);
        let sub = learn_subspace(&s, 1).unwrap();
        assert_eq!(sub.mode(), PairMode::Norm);
        assert!((sub.component(0)[0].abs() - 1.0).abs() < 1e-12);
        assert!(sub.component(0)[0] > 0.0);
        assert!((sub.explained_variance_ratio()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn learn_raw_prefers_inter_pair_spread() {
        // Centred covariance of (3,1) (1,1) (0,5) (-2,5) is [[13/3, -4], [-4, 16/3]];
        // the leading eigenvector comes from the closed-form 2x2 solution.
        let s = set(&[(&[3.0, 1.0], &[1.0, 1.0]), (&[0.0, 5.0], &[-2.0, 5.0])], PairMode::Raw);
        let sub = learn_subspace(&s, 1).unwrap();
        let (a, b, d): (f64, f64, f64) = (13.0 / 3.0, -4.0, 16.0 / 3.0);
        let lambda = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let (vx, vy) = (b, lambda - a);
        let len = (vx * vx + vy * vy).sqrt();
        let pc = sub.component(0);
        let cos = (pc[0] * vx + pc[1] * vy) / len;
        assert!((cos.abs() - 1.0).abs() < 1e-12);
        assert!((sub.eigenvalues()[0] - lambda).abs() < 1e-12);
        // Axis 1 dominates, though centring leaves cos(pc, e1) near 0.75.
        assert!(pc[1].abs() > pc[0].abs());
        assert!((pc[1].abs() - 0.7497).abs() < 1e-3);
    }

    #[test]
    fn component_range_and_degenerate() {
        let s = set(&[(&[1.0, 0.0], &[-1.0, 0.0]), (&[2.0, 0.0], &[-2.0, 0.0])], PairMode::Norm);
        assert!(matches!(learn_subspace(&s, 4), Err(Error::InvalidArgument(_))));
        assert!(matches!(learn_subspace(&s, 0), Err(Error::InvalidArgument(_))));
        let flat = set(&[(&[1.0, 1.0], &[1.0, 1.0]), (&[1.0, 1.0], &[1.0, 1.0])], PairMode::Raw);
        assert!(matches!(learn_subspace(&flat, 1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn uncentered_pca_uses_second_moment() {
        let s = set(&[(&[1.0, 5.0], &[-1.0, 5.0]), (&[2.0, 5.0], &[-2.0, 5.0])], PairMode::Raw);
        let centered = learn_subspace(&s, 1).unwrap();
        assert!((centered.component(0)[0] - 1.0).abs() < 1e-12);
        let raw = learn_subspace_with(&s, 1, PcaOptions { center: false }).unwrap();
        assert!(raw.component(0)[1].abs() > 0.99);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(axes(&[&[1.0, 0.0]]).project(&[3.0, 4.0]).unwrap(), vec![3.0]);
        assert_eq!(
            axes(&[&[1.0, 0.0], &[0.0, 1.0]]).project(&[3.0, 4.0]).unwrap(),
            vec![3.0, 4.0]
        );
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let got = axes(&[&[h, h]]).project(&[1.0, 1.0]).unwrap();
        assert!((got[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            axes(&[&[1.0, 0.0]]).project(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn removal_examples() {
        assert_eq!(axes(&[&[1.0, 0.0]]).remove(&[3.0, 4.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(
            axes(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).remove(&[1.0, 1.0, 1.0]).unwrap(),
            vec![0.0, 0.0, 1.0]
        );
        assert!(matches!(
            axes(&[&[1.0, 0.0]]).remove(&[5.0, 0.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn persistence_is_bit_exact() {
        let s = set(
            &[(&[0.3, 1.7, -2.2], &[1.1, 0.4, 0.9]), (&[-0.5, 2.5, 1.0], &[0.123456789, -3.3, 0.2])],
            PairMode::Raw,
        );
        let sub = learn_subspace(&s, 2).unwrap();
        let mut buf = Vec::new();
        sub.write_to(&mut buf).unwrap();
        let back = Subspace::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, sub);
        assert!(Subspace::read_from("dim 2\n".as_bytes()).is_err());
    }

    #[test]
    fn truncation_matches_direct_learning() {
        let s = set(
            &[
                (&[0.3, 1.7, -2.2], &[1.1, 0.4, 0.9]),
                (&[-0.5, 2.5, 1.0], &[0.1, -3.3, 0.2]),
                (&[1.5, 0.5, 0.0], &[0.7, 0.3, -1.9]),
            ],
            PairMode::Raw,
        );
        let full = learn_subspace(&s, 3).unwrap();
        assert_eq!(full.truncated(2).unwrap(), learn_subspace(&s, 2).unwrap());
    }
}
