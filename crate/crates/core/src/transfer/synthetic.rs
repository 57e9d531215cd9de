//! Synthetic benchmark with a planted semantic direction.
//!
//! Every vector is `base + s·(δ/2 + j)·u + t + ε`, where `u` is the planted
//! unit direction, `s = ±1` the class side, `j` a small intensity jitter
//! along `u`, `t` a topic vector inside a random subspace `T ⟂ u`, and `ε`
//! isotropic noise. Both members of a source pair share their topic vector.
//! Target instances draw their topic around a mean displaced by `topic_shift`
//! along a random direction of `T`. Isotropic noise has scale `noise_scale`
//! in the target and `SOURCE_NOISE_FRACTION · noise_scale` in the source, so
//! with `noise_scale = 0` every vector lies in `base + span(u, T)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::embeddings::{Class, Instance, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::{EmbeddedPairSet, Pair, PairMode};

/// Distance between the two class sides along `u`.
pub const SEPARATION: f64 = 6.0;
/// Standard deviation of the per-vector intensity along `u`.
pub const INTENSITY_JITTER: f64 = 0.1;
/// Standard deviation of topic vectors in each direction of `T`; this is the
/// within-topic spread that `topic_shift` is measured against.
pub const TOPIC_SPREAD: f64 = 0.5;
/// Source isotropic noise relative to the target's `noise_scale`.
pub const SOURCE_NOISE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkParams {
    pub dim: usize,
    pub n_pairs: usize,
    pub n_task: usize,
    pub seed: u64,
    pub topic_shift: f64,
    pub noise_scale: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticBenchmark {
    pub pairs: EmbeddedPairSet,
    pub task: LabeledDataset,
    /// The planted unit direction `u`.
    pub direction: Vec<f64>,
    /// Orthonormal basis of the topic subspace `T`.
    pub topic_basis: Vec<Vec<f64>>,
}

impl SyntheticBenchmark {
    /// The pair members as a sentence-embedding dataset whose ids are the pair
    /// surfaces, so the pairs can be replayed from files.
    pub fn source_dataset(&self) -> LabeledDataset {
        let instances = self
            .pairs
            .pairs()
            .iter()
            .flat_map(|p| {
                [
                    (p.surface_a.clone(), p.a.clone(), Class::Positive),
                    (p.surface_b.clone(), p.b.clone(), Class::Neutral),
                ]
            })
            .map(|(id, vector, label)| Instance {
                id: id.expect("synthetic pairs carry ids"),
                vector,
                label,
                text: None,
            })
            .collect();
        LabeledDataset {
            name: "source".into(),
            dim: self.pairs.dim(),
            positive_label: self.task.positive_label.clone(),
            instances,
        }
    }

    /// `(positive id, neutral id)` for every pair.
    pub fn pair_ids(&self) -> Vec<(String, String)> {
        self.pairs
            .pairs()
            .iter()
            .map(|p| {
                (
                    p.surface_a.clone().unwrap_or_default(),
                    p.surface_b.clone().unwrap_or_default(),
                )
            })
            .collect()
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Gram-Schmidt of fresh Gaussian vectors against `basis`.
fn orthonormal_extend(rng: &mut ChaCha8Rng, basis: &mut Vec<Vec<f64>>, count: usize, dim: usize) {
    let target = basis.len() + count;
    while basis.len() < target {
        let mut v = gaussian(rng, dim);
        for _ in 0..2 {
            for b in basis.iter() {
                let d = linalg::dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = linalg::norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
}

pub fn generate_synthetic_benchmark(params: BenchmarkParams) -> Result<SyntheticBenchmark> {
    let BenchmarkParams {
        dim,
        n_pairs,
        n_task,
        seed,
        topic_shift,
        noise_scale,
    } = params;
    if dim < 4 {
        return Err(Error::invalid(format!("dimension must be at least 4, got {dim}")));
    }
    if n_pairs < 5 {
        return Err(Error::invalid(format!("need at least 5 pairs, got {n_pairs}")));
    }
    if n_task < 10 {
        return Err(Error::invalid(format!("need at least 10 task instances, got {n_task}")));
    }
    if !(topic_shift >= 0.0 && topic_shift.is_finite() && noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::invalid("topic_shift and noise_scale must be finite and nonnegative"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis = Vec::new();
    orthonormal_extend(&mut rng, &mut basis, 1, dim);
    let topic_dim = (dim / 4).max(1);
    orthonormal_extend(&mut rng, &mut basis, topic_dim, dim);
    let direction = basis[0].clone();
    let topic_basis: Vec<Vec<f64>> = basis[1..].to_vec();

    let base = gaussian(&mut rng, dim);
    let mut shift_coords = gaussian(&mut rng, topic_dim);
    let len = linalg::norm(&shift_coords);
    shift_coords.iter_mut().for_each(|x| *x *= topic_shift / len);

    let in_topic = |coords: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for (c, b) in coords.iter().zip(&topic_basis) {
            v.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        v
    };
    let member = |rng: &mut ChaCha8Rng, side: f64, topic: &[f64], noise: f64| -> Vec<f64> {
        let along = side * (0.5 * SEPARATION + INTENSITY_JITTER * rng.sample::<f64, _>(StandardNormal));
        (0..dim)
            .map(|i| {
                let eps: f64 = rng.sample(StandardNormal);
                base[i] + along * direction[i] + topic[i] + noise * eps
            })
            .collect()
    };
    let source_noise = SOURCE_NOISE_FRACTION * noise_scale;

    let mut pairs = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let coords: Vec<f64> = gaussian(&mut rng, topic_dim).iter().map(|z| TOPIC_SPREAD * z).collect();
        let topic = in_topic(&coords);
        let a = member(&mut rng, 1.0, &topic, source_noise);
        let b = member(&mut rng, -1.0, &topic, source_noise);
        pairs.push(Pair {
            a,
            b,
            surface_a: Some(format!("src-{i:04}-pos")),
            surface_b: Some(format!("src-{i:04}-neu")),
        });
    }

    let mut instances = Vec::with_capacity(n_task);
    for i in 0..n_task {
        let label = if i % 2 == 0 { Class::Positive } else { Class::Neutral };
        let side = if label == Class::Positive { 1.0 } else { -1.0 };
        let coords: Vec<f64> = gaussian(&mut rng, topic_dim)
            .iter()
            .zip(&shift_coords)
            .map(|(z, s)| s + TOPIC_SPREAD * z)
            .collect();
        let topic = in_topic(&coords);
        instances.push(Instance {
            id: format!("tgt-{i:05}"),
            vector: member(&mut rng, side, &topic, noise_scale),
            label,
            text: None,
        });
    }

    Ok(SyntheticBenchmark {
        pairs: EmbeddedPairSet::new(pairs, PairMode::Raw)?,
        task: LabeledDataset::new("synthetic", dim, "profane", instances)?,
        direction,
        topic_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BenchmarkParams {
        BenchmarkParams {
            dim: 16,
            n_pairs: 20,
            n_task: 40,
            seed: 5,
            topic_shift: 3.0,
            noise_scale: 0.5,
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic_benchmark(params()).unwrap();
        let b = generate_synthetic_benchmark(params()).unwrap();
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(a.task, b.task);
        let c = generate_synthetic_benchmark(BenchmarkParams { seed: 6, ..params() }).unwrap();
        assert_ne!(a.direction, c.direction);
    }

    #[test]
    fn geometry() {
        let bench = generate_synthetic_benchmark(params()).unwrap();
        assert!((linalg::norm(&bench.direction) - 1.0).abs() < 1e-12);
        assert_eq!(bench.topic_basis.len(), 4);
        for t in &bench.topic_basis {
            assert!(linalg::dot(t, &bench.direction).abs() < 1e-12);
        }
        assert_eq!(bench.pairs.len(), 20);
        assert_eq!(bench.task.len(), 40);
        let positives = bench.task.instances.iter().filter(|i| i.label == Class::Positive).count();
        assert_eq!(positives, 20);
        // Pair members differ along u by about the separation.
        let p = &bench.pairs.pairs()[0];
        let diff: Vec<f64> = p.a.iter().zip(&p.b).map(|(a, b)| a - b).collect();
        assert!((linalg::dot(&diff, &bench.direction) - SEPARATION).abs() < 5.0 * INTENSITY_JITTER);
    }

    #[test]
    fn source_dataset_replays_pairs() {
        let bench = generate_synthetic_benchmark(params()).unwrap();
        let ds = bench.source_dataset();
        let ids = bench.pair_ids();
        let replay = crate::subspace::embed_sentence_pairs(&ids, &ds).unwrap();
        assert_eq!(replay, bench.pairs);
    }

    #[test]
    fn parameter_ranges() {
        for bad in [
            BenchmarkParams { dim: 3, ..params() },
            BenchmarkParams { n_pairs: 4, ..params() },
            BenchmarkParams { n_task: 9, ..params() },
            BenchmarkParams { noise_scale: -1.0, ..params() },
            BenchmarkParams { topic_shift: f64::NAN, ..params() },
        ] {
            assert!(generate_synthetic_benchmark(bad).is_err());
        }
    }
}
