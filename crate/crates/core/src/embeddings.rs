//! Word and sentence embedding ingestion, lookup, pooling, and exact cosine
//! nearest-neighbour search.
//!
//! Word vectors are read from the word2vec/fastText text format: a header
//! line `V D` followed by `V` lines `token x1 ... xD`. Sentence vectors are
//! read from JSON lines with the keys `id`, `label`, `vec`, and an optional
//! `text`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Label name of the negative class in every dataset.
pub const NEUTRAL: &str = "neutral";

/// Class role of a vector: the contrast side of a minimal pair, or the gold
/// label of a task instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    Neutral,
    Positive,
}

impl Class {
    pub fn flip(self) -> Class {
        match self {
            Class::Neutral => Class::Positive,
            Class::Positive => Class::Neutral,
        }
    }
}

/// A vocabulary of tokens with fixed-dimension vectors, kept in file order.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    norms: Vec<f64>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` entries. Later duplicates of a
    /// token are dropped and counted.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        let mut table = EmbeddingTable {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
            duplicates: 0,
        };
        for (token, vector) in entries {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: vector.len(),
                });
            }
            table.push(token, &vector);
        }
        Ok(table)
    }

    fn push(&mut self, token: String, vector: &[f64]) {
        if self.index.contains_key(&token) {
            self.duplicates += 1;
            return;
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.norms.push(linalg::norm(vector));
        self.data.extend_from_slice(vector);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of duplicate token lines that were skipped while building.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    /// Returns the stored vector of `token`.
    pub fn lookup(&self, token: &str) -> Result<&[f64]> {
        self.get(token)
            .ok_or_else(|| Error::UnknownToken(vec![token.to_string()]))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens
            .iter()
            .enumerate()
            .map(move |(i, t)| (t.as_str(), self.row(i)))
    }

    /// Returns a copy with every nonzero vector scaled to unit length.
    pub fn normalized(&self) -> EmbeddingTable {
        let mut out = self.clone();
        for (i, norm) in out.norms.iter_mut().enumerate() {
            if *norm > 0.0 {
                for x in &mut out.data[i * self.dim..(i + 1) * self.dim] {
                    *x /= *norm;
                }
                *norm = 1.0;
            }
        }
        out
    }

    /// Exact top-`k` tokens by cosine similarity to `query`, descending, with
    /// ties broken by ascending token. Tokens in `exclude` never appear, and
    /// zero vectors in the table are skipped.
    pub fn nearest_neighbors<F>(&self, query: &[f64], k: usize, exclude: F) -> Result<Vec<(String, f64)>>
    where
        F: Fn(&str) -> bool,
    {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        let query_norm = linalg::norm(query);
        if query_norm == 0.0 || !query_norm.is_finite() {
            return Err(Error::invalid("query vector has zero norm"));
        }

        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|&i| self.norms[i] > 0.0 && !exclude(&self.tokens[i]))
            .map(|i| {
                let cos = linalg::dot(query, self.row(i)) / (query_norm * self.norms[i]);
                (i, cos)
            })
            .collect();
        let order = |a: &(usize, f64), b: &(usize, f64)| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.tokens[a.0].cmp(&self.tokens[b.0]))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_by(order);
        Ok(scored
            .into_iter()
            .map(|(i, cos)| (self.tokens[i].clone(), cos))
            .collect())
    }
}

/// Reads word vectors in the text format with a `V D` header line.
///
/// Fields may be separated by any run of spaces or tabs. Duplicate tokens keep
/// their first occurrence; see [`EmbeddingTable::duplicates`].
pub fn load_word_vectors<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::parse(1, "missing header line")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (vocab, dim) = match fields.as_slice() {
        [v, d] => match (v.parse::<usize>(), d.parse::<usize>()) {
            (Ok(v), Ok(d)) if d > 0 => (v, d),
            _ => return Err(Error::parse(1, format!("malformed header {header:?}"))),
        },
        _ => return Err(Error::parse(1, format!("malformed header {header:?}"))),
    };

    let mut table = EmbeddingTable::from_entries(dim, std::iter::empty())?;
    let mut vector = Vec::with_capacity(dim);
    for idx in 0..vocab {
        let line_no = idx + 2;
        let line = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(Error::parse(
                    line_no,
                    format!("expected {vocab} vectors, file ends after {idx}"),
                ))
            }
        };
        let mut parts = line.split_whitespace();
        let token = parts
            .next()
            .ok_or_else(|| Error::parse(line_no, "empty line"))?;
        vector.clear();
        for part in parts {
            let x: f64 = part
                .parse()
                .map_err(|_| Error::parse(line_no, format!("non-numeric coordinate {part:?}")))?;
            vector.push(x);
        }
        if vector.len() != dim {
            return Err(Error::parse(
                line_no,
                format!("expected {dim} coordinates, found {}", vector.len()),
            ));
        }
        table.push(token.to_string(), &vector);
    }
    for (offset, line) in lines.enumerate() {
        if !line?.trim().is_empty() {
            return Err(Error::parse(
                vocab + 2 + offset,
                format!("more vectors than the {vocab} declared in the header"),
            ));
        }
    }
    Ok(table)
}

/// Coordinate-wise mean of a nonempty list of equal-length vectors.
pub fn mean_pool<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::invalid("cannot pool an empty list of vectors"))?;
    let dim = first.as_ref().len();
    let mut sum = vec![0.0; dim];
    for v in vectors {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(sum)
}

/// One labelled vector of a target task or a sentence-level pair file.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub vector: Vec<f64>,
    pub label: Class,
    pub text: Option<String>,
}

/// Two-class labelled vectors sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub dim: usize,
    pub positive_label: String,
    pub instances: Vec<Instance>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        positive_label: impl Into<String>,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dataset dimension must be positive"));
        }
        if let Some(bad) = instances.iter().find(|i| i.vector.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.vector.len(),
            });
        }
        Ok(LabeledDataset {
            name: name.into(),
            dim,
            positive_label: positive_label.into(),
            instances,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_name(&self, class: Class) -> &str {
        match class {
            Class::Neutral => NEUTRAL,
            Class::Positive => &self.positive_label,
        }
    }

    pub fn get(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SentenceRecord {
    id: String,
    label: String,
    vec: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

/// Reads a sentence-embedding file, one JSON object per line.
///
/// Labels must be `neutral` or the positive class name. When
/// `positive_label` is `None`, the first non-neutral label seen declares the
/// positive class. Blank lines are skipped.
pub fn load_sentence_embeddings<R: BufRead>(
    reader: R,
    name: &str,
    positive_label: Option<&str>,
) -> Result<LabeledDataset> {
    let mut positive = positive_label.map(str::to_string);
    let mut dim = None;
    let mut instances = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SentenceRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(line_no, format!("malformed record: {e}")))?;
        let label = if record.label == NEUTRAL {
            Class::Neutral
        } else {
            match &positive {
                Some(p) if *p == record.label => Class::Positive,
                Some(_) => {
                    return Err(Error::UnknownLabel {
                        line: line_no,
                        label: record.label,
                    })
                }
                None => {
                    positive = Some(record.label.clone());
                    Class::Positive
                }
            }
        };
        let expected = *dim.get_or_insert(record.vec.len());
        if record.vec.len() != expected {
            return Err(Error::parse(
                line_no,
                format!(
                    "inconsistent dimension: expected {expected}, found {}",
                    record.vec.len()
                ),
            ));
        }
        if expected == 0 {
            return Err(Error::parse(line_no, "empty vector"));
        }
        if record.vec.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(line_no, "non-finite coordinate"));
        }
        instances.push(Instance {
            id: record.id,
            vector: record.vec,
            label,
            text: record.text,
        });
    }
    let dim = dim.ok_or_else(|| Error::parse(1, "no records"))?;
    LabeledDataset::new(
        name,
        dim,
        positive.unwrap_or_else(|| "profane".to_string()),
        instances,
    )
}

/// Writes one instance as a sentence-embedding JSON line (no newline).
pub fn sentence_record_line(instance: &Instance, positive_label: &str) -> String {
    let record = SentenceRecord {
        id: instance.id.clone(),
        label: match instance.label {
            Class::Neutral => NEUTRAL.to_string(),
            Class::Positive => positive_label.to_string(),
        },
        vec: instance.vector.clone(),
        text: instance.text.clone(),
    };
    serde_json::to_string(&record).expect("finite vectors serialize")
}
