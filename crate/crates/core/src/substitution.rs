//! Lexical substitution by subspace removal: strip the learned subspace from
//! a word's vector, renormalise, and look up the nearest remaining words.

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::subspace::{PairMode, Subspace};

#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionResult {
    pub source: String,
    pub neutralized: Vec<f64>,
    pub candidates: Vec<(String, f64)>,
    pub subspace_mode: PairMode,
    pub c: usize,
}

impl SubstitutionResult {
    pub fn best(&self) -> Option<&str> {
        self.candidates.first().map(|(t, _)| t.as_str())
    }
}

/// Tokens whose lowercase form contains the lowercase source word, e.g.
/// spelling variants of the source.
pub fn orthographic_variants(word: &str) -> impl Fn(&str) -> bool {
    let needle = word.to_lowercase();
    move |token: &str| token.to_lowercase().contains(&needle)
}

/// Removes `subspace` from `word` and returns its `k` nearest neighbours.
/// The word itself is always excluded; `exclude` filters further tokens.
pub fn substitute<F>(
    word: &str,
    table: &EmbeddingTable,
    subspace: &Subspace,
    k: usize,
    exclude: F,
) -> Result<SubstitutionResult>
where
    F: Fn(&str) -> bool,
{
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let vector = table.lookup(word)?;
    let neutralized = subspace.remove(vector)?;
    let candidates = table.nearest_neighbors(&neutralized, k, |t| t == word || exclude(t))?;
    Ok(SubstitutionResult {
        source: word.to_string(),
        neutralized,
        candidates,
        subspace_mode: subspace.mode(),
        c: subspace.n_components(),
    })
}

/// Nearest neighbours of the unmodified word vector, excluding the word.
pub fn neighbors_before(word: &str, table: &EmbeddingTable, k: usize) -> Result<Vec<(String, f64)>> {
    let vector = table.lookup(word)?;
    table.nearest_neighbors(vector, k, |t| t == word)
}
