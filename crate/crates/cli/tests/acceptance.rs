//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (no libtest harness) so the verdict lines
//! always appear in the test output.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use semsub::linalg::{cosine, dot, norm};
use semsub::transfer::{ComponentPolicy, RepresentationKind, TransferSpec};
use semsub::{
    embed_pairs, evaluate, fit_lda, generate_synthetic_benchmark, learn_subspace,
    learn_subspace_with, mean_shift, orthographic_variants, run_transfer, select_components,
    substitute, BenchmarkParams, Class, EmbeddedPairSet, EmbeddingTable, Pair, PairMode,
    PcaOptions,
};

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed < limit
}

// ---------------------------------------------------------------------------
// 1. Linear-algebra oracle equivalence

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_pca = 0.0f64;
    let mut worst_lda = 0.0f64;
    let mut instances = 0;
    for case in 0..30 {
        let d = 2 + case % 5;
        let n = 4 + case % 7;
        let scales: Vec<f64> = (0..d).map(|j| 1.0 + 0.6 * j as f64).collect();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|_| {
                let mut a = gaussian(&mut rng, d);
                let mut b = gaussian(&mut rng, d);
                for j in 0..d {
                    a[j] *= scales[j];
                    b[j] *= scales[j];
                }
                (a, b)
            })
            .collect();
        let points: Vec<Vec<f64>> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        let set = EmbeddedPairSet::new(
            pairs.iter().map(|(a, b)| Pair::new(a.clone(), b.clone())).collect(),
            PairMode::Raw,
        )
        .unwrap();
        let c = d;
        let sub = learn_subspace_with(&set, c, PcaOptions::default()).unwrap();
        let (values, comps) = semsub_oracle::pca(&points, c, true);
        for k in 0..c {
            let scale = values[0].max(1.0);
            worst_pca = worst_pca.max((sub.eigenvalues()[k] - values[k]).abs() / scale);
            let ours = sub.component(k);
            let plus = ours.iter().zip(&comps[k]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let minus = ours.iter().zip(&comps[k]).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            worst_pca = worst_pca.max(plus.min(minus));
        }

        let labels: Vec<bool> = (0..points.len()).map(|i| i % 2 == 0).collect();
        let y: Vec<Class> = labels
            .iter()
            .map(|&p| if p { Class::Positive } else { Class::Neutral })
            .collect();
        let model = fit_lda(&points, &y).unwrap();
        let (w, _) = semsub_oracle::lda(&points, &labels);
        let wn = norm(&w);
        let rel = model.weights.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / wn;
        worst_lda = worst_lda.max(rel);
        instances += 1;
    }
    let elapsed = start.elapsed();
    verdict(
        instances >= 20 && worst_pca < 1e-6 && worst_lda < 1e-6 && within(Duration::from_secs(5), elapsed),
        format!(
            "{instances} instances, max PCA deviation {worst_pca:.2e}, max LDA relative error {worst_lda:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. Subspace invariants, property-tested

fn pair_sets() -> impl Strategy<Value = EmbeddedPairSet> {
    (2usize..=8)
        .prop_flat_map(|d| {
            prop::collection::vec(
                (prop::collection::vec(-10.0f64..10.0, d), prop::collection::vec(-10.0f64..10.0, d)),
                1..=10,
            )
        })
        .prop_map(|pairs| {
            EmbeddedPairSet::new(pairs.into_iter().map(|(a, b)| Pair::new(a, b)).collect(), PairMode::Raw)
                .unwrap()
        })
        .prop_filter("zero variance", |set| {
            let first = &set.pairs()[0].a;
            set.labeled_vectors().any(|(v, _)| v.iter().zip(first).any(|(x, y)| (x - y).abs() > 1e-3))
        })
}

fn subspace_invariants() -> Verdict {
    const CASES: u32 = 1000;
    let start = Instant::now();
    let mut runner = TestRunner::new(PropConfig {
        cases: CASES,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (pair_sets(), prop::collection::vec(-10.0f64..10.0, 8), 0.0f64..1.0);
    let outcome = runner.run(&strategy, |(set, v, frac)| {
        let d = set.dim();
        let max_c = (2 * set.len() - 1).min(d);
        let c = 1 + ((max_c - 1) as f64 * frac) as usize;
        let sub = learn_subspace(&set, c).unwrap();
        let comps: Vec<Vec<f64>> = (0..c).map(|k| sub.component(k)).collect();

        let mut ortho = 0.0f64;
        for i in 0..c {
            for j in 0..c {
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((dot(&comps[i], &comps[j]) - target).abs());
            }
        }
        prop_assert!(ortho < 1e-8, "orthonormality {ortho}");

        let shifted = mean_shift(&set).unwrap();
        for p in shifted.pairs() {
            for (a, b) in p.a.iter().zip(&p.b) {
                prop_assert!((a + b).abs() < 1e-12, "pair sum {}", a + b);
            }
        }

        let v = &v[..d];
        if let Ok(r) = sub.remove(v) {
            for comp in &comps {
                prop_assert!(dot(&r, comp).abs() < 1e-8);
            }
            prop_assert!((norm(&r) - 1.0).abs() <= 1e-10);
        }

        let p = sub.project(v).unwrap();
        prop_assert!(norm(&p) <= norm(v) * (1.0 + 1e-12) + 1e-12);
        Ok(())
    });
    let elapsed = start.elapsed();
    match outcome {
        Ok(()) => verdict(
            within(Duration::from_secs(10), elapsed),
            format!("{CASES} random cases, {:.2}s", elapsed.as_secs_f64()),
        ),
        Err(e) => verdict(false, format!("counterexample: {e}")),
    }
}

// ---------------------------------------------------------------------------
// 3. Metric exactness

fn metric_exactness() -> Verdict {
    use Class::{Neutral as N, Positive as P};
    let f1 = evaluate(&[P, N, N, N], &[P, P, N, N]).unwrap().macro_f1;
    let expected = (2.0 / 3.0 + 0.8) / 2.0;
    let perfect = evaluate(&[P, N, P, N], &[P, N, P, N]).unwrap().macro_f1;
    verdict(
        (f1 - 11.0 / 15.0).abs() < 1e-12 && (f1 - expected).abs() < 1e-12 && perfect == 1.0,
        format!("example macro-F1 {f1:.15}, perfect {perfect}"),
    )
}

// ---------------------------------------------------------------------------
// 4. Intrinsic selection on a planted single direction

fn planted_single_direction() -> EmbeddedPairSet {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pairs = (0..20)
        .map(|_| {
            let s = 1.0 + rng.random::<f64>();
            let mut a = vec![0.0; 6];
            let mut b = vec![0.0; 6];
            a[0] = s;
            b[0] = -s;
            Pair::new(a, b)
        })
        .collect();
    EmbeddedPairSet::new(pairs, PairMode::Raw).unwrap()
}

fn selection_correctness() -> Verdict {
    let set = planted_single_direction();
    let grid: Vec<usize> = (1..=6).collect();
    let first = select_components(&set, &grid, 5, 11).unwrap();
    let second = select_components(&set, &grid, 5, 11).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    first.write_curve(&mut a).unwrap();
    second.write_curve(&mut b).unwrap();
    let mean_at_one = first.curve[0].mean_f1;
    verdict(
        first.chosen_c == 1 && mean_at_one == 1.0 && a == b,
        format!(
            "chosen c = {}, mean F1 at c=1 = {mean_at_one}, rerun identical: {}",
            first.chosen_c,
            a == b
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. Transfer gap on the synthetic benchmark

fn acceptance_benchmark(seed: u64) -> semsub::SyntheticBenchmark {
    generate_synthetic_benchmark(BenchmarkParams {
        dim: 64,
        n_pairs: 100,
        n_task: 400,
        seed,
        topic_shift: 10.0 * semsub::transfer::TOPIC_SPREAD,
        noise_scale: 1.0,
    })
    .unwrap()
}

fn transfer_gap() -> Verdict {
    let start = Instant::now();
    let bench = acceptance_benchmark(0);
    let spec = TransferSpec {
        sizes: vec![50],
        kinds: vec![RepresentationKind::Base, RepresentationKind::PcaRaw],
        seeds: (0..5).collect(),
        policy: ComponentPolicy::default(),
        options: Default::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let report = pool.install(|| run_transfer(&bench.pairs, std::slice::from_ref(&bench.task), &spec)).unwrap();
    let elapsed = start.elapsed();
    let base = report.row(RepresentationKind::Base, 50, "synthetic").unwrap().mean_macro_f1;
    let raw = report.row(RepresentationKind::PcaRaw, 50, "synthetic").unwrap().mean_macro_f1;
    verdict(
        raw >= 0.90 && raw - base >= 0.10 && within(Duration::from_secs(60), elapsed),
        format!(
            "size 50, 5 seeds: PCA_RAW {raw:.4}, BASE {base:.4}, gap {:+.4}, {:.2}s single-threaded",
            raw - base,
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Recovery of the planted direction

fn subspace_recovery() -> Verdict {
    let mut cosines = Vec::new();
    for seed in 0..5 {
        let bench = acceptance_benchmark(seed);
        let norm_set = mean_shift(&bench.pairs).unwrap();
        let sub = learn_subspace(&norm_set, 1).unwrap();
        cosines.push(cosine(&sub.component(0), &bench.direction).abs());
    }
    let worst = cosines.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        worst >= 0.95,
        format!(
            "|cos(PC1, u)| per seed: {}",
            cosines.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Substitution on a planted profanity axis

fn substitution_property() -> Verdict {
    const DIM: usize = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut entries = Vec::new();
    let mut pair_list = Vec::new();
    let mut neutral_set = Vec::new();
    for i in 0..40 {
        let mut neutral = gaussian(&mut rng, DIM);
        neutral[0] = 0.0;
        let mut profane = neutral.clone();
        profane[0] = 1.5 + rng.random::<f64>();
        let word = format!("curse{i:02}");
        let calm = format!("calm{i:02}");
        entries.push((format!("{word}zz"), profane.clone()));
        entries.push((word.to_uppercase(), profane.clone()));
        entries.push((word.clone(), profane));
        entries.push((calm.clone(), neutral));
        neutral_set.push(calm.clone());
        pair_list.push((word, calm));
    }
    let table = EmbeddingTable::from_entries(DIM, entries).unwrap();
    let set = mean_shift(&embed_pairs(&pair_list, &table).unwrap()).unwrap();
    let sub = learn_subspace(&set, 1).unwrap();

    let mut neutral_top = 0;
    let mut leaks = 0;
    for (word, _) in &pair_list {
        let r = substitute(word, &table, &sub, 5, orthographic_variants(word)).unwrap();
        if r.best().is_some_and(|b| neutral_set.iter().any(|n| n == b)) {
            neutral_top += 1;
        }
        let is_variant = orthographic_variants(word);
        leaks += r.candidates.iter().filter(|(t, _)| t == word || is_variant(t)).count();
    }
    verdict(
        neutral_top == pair_list.len() && leaks == 0,
        format!(
            "{neutral_top}/{} profane tokens with a neutral top candidate, {leaks} source/variant leaks",
            pair_list.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. End-to-end determinism of the transfer command

fn semsub_cli(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_semsub"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn end_to_end_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let gen = semsub_cli(
        dir.path(),
        &["gen-bench", "--out-dir", "bench", "--seed", "5", "--bench-dim", "32", "--bench-pairs", "60", "--bench-task", "200"],
    );
    if !gen.status.success() {
        return verdict(false, format!("gen-bench failed: {}", String::from_utf8_lossy(&gen.stderr)));
    }
    let mut outputs = Vec::new();
    // Every run writes to the same directory; the files are read back before
    // the next run overwrites them.
    for threads in ["1", "1", "4", "4"] {
        let out_dir = "out";
        let _ = fs::remove_dir_all(dir.path().join(out_dir));
        let run = semsub_cli(
            dir.path(),
            &["transfer", "--config", "bench/transfer.toml", "--sizes", "5,20,50", "--runs", "3", "--threads", threads, "--out-dir", out_dir],
        );
        if !run.status.success() {
            return verdict(false, format!("transfer failed: {}", String::from_utf8_lossy(&run.stderr)));
        }
        let files: Vec<Vec<u8>> = ["report.tsv", "runs.tsv", "config.toml"]
            .iter()
            .map(|f| fs::read(dir.path().join(out_dir).join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    let bytes: usize = outputs[0].iter().map(Vec::len).sum();
    verdict(
        identical,
        format!("4 runs (threads 1,1,4,4), {bytes} report bytes each, identical: {identical}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("linear-algebra oracle equivalence", oracle_equivalence),
        ("subspace invariant suite", subspace_invariants),
        ("metric exactness", metric_exactness),
        ("intrinsic selection correctness", selection_correctness),
        ("zero-shot transfer gap on synthetic benchmark", transfer_gap),
        ("subspace recovery", subspace_recovery),
        ("substitution property", substitution_property),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failures += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
