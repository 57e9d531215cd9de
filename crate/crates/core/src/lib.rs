//! Contrastive semantic subspaces learned from minimal pairs of embeddings.
//!
//! The crate covers the whole pipeline: reading word and sentence vectors,
//! building raw and mean-shifted minimal-pair sets, learning PCA subspaces,
//! choosing their dimensionality by cross-validation over the pairs, training
//! LDA classifiers on subspace projections, evaluating zero-shot transfer to
//! unseen tasks, and neutralising words by subspace removal.

pub mod classifier;
pub mod embeddings;
mod error;
pub mod linalg;
pub mod selection;
pub mod subspace;
pub mod substitution;
pub mod transfer;

pub use classifier::{evaluate, fit_lda, fit_lda_with, EvalScores, LdaModel, LdaOptions};
pub use embeddings::{
    load_sentence_embeddings, load_word_vectors, mean_pool, Class, EmbeddingTable, Instance,
    LabeledDataset,
};
pub use error::{Error, Result};
pub use selection::{select_components, select_components_with, ComponentSelection, ProtocolOptions};
pub use subspace::{
    embed_pairs, embed_sentence_pairs, learn_subspace, learn_subspace_with, mean_shift,
    read_pair_file, EmbeddedPairSet, Pair, PairMode, PcaOptions, Subspace,
};
pub use substitution::{neighbors_before, orthographic_variants, substitute, SubstitutionResult};
pub use transfer::{
    generate_synthetic_benchmark, run_transfer, subsample_pairs, BenchmarkParams, ComponentPolicy,
    RepresentationKind, SyntheticBenchmark, TransferReport, TransferSpec,
};
