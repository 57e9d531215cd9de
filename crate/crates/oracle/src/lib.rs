//! Slow, explicit reference computations for tests.
//!
//! Nothing here shares code with the `semsub` crate: matrices are plain
//! `Vec<Vec<f64>>`, eigenpairs come from cyclic Jacobi rotations, linear
//! systems from Gaussian elimination with partial pivoting, and the
//! cross-validation loop is written out step by step.

#![allow(clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<f64>>;

/// Eigenvalues (descending) and matching unit eigenvectors of a symmetric
/// matrix, by cyclic Jacobi rotations.
pub fn jacobi_eigen(a: &Matrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| (a[j][j], v.iter().map(|row| row[j]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    pairs.into_iter().unzip()
}

/// Sample covariance (divisor `n - 1`) of centred points, or the second
/// moment (divisor `n`) without centring.
pub fn covariance(points: &[Vec<f64>], center: bool) -> Matrix {
    let n = points.len();
    let d = points[0].len();
    let mut mean = vec![0.0; d];
    if center {
        for p in points {
            for j in 0..d {
                mean[j] += p[j] / n as f64;
            }
        }
    }
    let denom = if center { (n - 1) as f64 } else { n as f64 };
    let mut cov = vec![vec![0.0; d]; d];
    for p in points {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]) / denom;
            }
        }
    }
    cov
}

/// Top-`c` principal components of `points` with the largest-magnitude
/// coordinate of each made positive, plus their eigenvalues.
pub fn pca(points: &[Vec<f64>], c: usize, center: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (values, vectors) = jacobi_eigen(&covariance(points, center));
    let comps = vectors
        .into_iter()
        .take(c)
        .map(|mut v| {
            let mut best = 0;
            for i in 1..v.len() {
                if v[i].abs() > v[best].abs() {
                    best = i;
                }
            }
            if v[best] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    (values.into_iter().take(c).collect(), comps)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Two-class LDA by the textbook formulas: pooled within-class covariance
/// with divisor `n - 2`, ridge `1e-6 · trace / m`, weights `Σ⁻¹(μ₁ − μ₀)`,
/// bias at the midpoint plus the log prior ratio. Labels: `true` = positive.
pub fn lda(x: &[Vec<f64>], positive: &[bool]) -> (Vec<f64>, f64) {
    let m = x[0].len();
    let mean_of = |cls: bool| -> (Vec<f64>, usize) {
        let members: Vec<&Vec<f64>> = x.iter().zip(positive).filter(|(_, &p)| p == cls).map(|(v, _)| v).collect();
        let mut mu = vec![0.0; m];
        for v in &members {
            for j in 0..m {
                mu[j] += v[j];
            }
        }
        mu.iter_mut().for_each(|u| *u /= members.len() as f64);
        (mu, members.len())
    };
    let (mu0, n0) = mean_of(false);
    let (mu1, n1) = mean_of(true);
    let n = x.len();
    let dof = if n > 2 { (n - 2) as f64 } else { 1.0 };
    let mut sigma = vec![vec![0.0; m]; m];
    for (v, &p) in x.iter().zip(positive) {
        let mu = if p { &mu1 } else { &mu0 };
        for i in 0..m {
            for j in 0..m {
                sigma[i][j] += (v[i] - mu[i]) * (v[j] - mu[j]) / dof;
            }
        }
    }
    let trace: f64 = (0..m).map(|i| sigma[i][i]).sum();
    for (i, row) in sigma.iter_mut().enumerate() {
        row[i] += 1e-6 * trace / m as f64;
    }
    let diff: Vec<f64> = mu1.iter().zip(&mu0).map(|(a, b)| a - b).collect();
    let w = solve(&sigma, &diff);
    let mid: f64 = (0..m).map(|j| w[j] * 0.5 * (mu0[j] + mu1[j])).sum();
    let bias = -mid + (n1 as f64 / n0 as f64).ln();
    (w, bias)
}

fn macro_f1(pred: &[bool], gold: &[bool]) -> f64 {
    let f1 = |cls: bool| {
        let tp = pred.iter().zip(gold).filter(|(&p, &g)| p == cls && g == cls).count() as f64;
        let pp = pred.iter().filter(|&&p| p == cls).count() as f64;
        let gp = gold.iter().filter(|&&g| g == cls).count() as f64;
        let prec = if pp > 0.0 { tp / pp } else { 0.0 };
        let rec = if gp > 0.0 { tp / gp } else { 0.0 };
        if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 }
    };
    0.5 * (f1(true) + f1(false))
}

/// Reference run of intrinsic component selection: returns the chosen `c`
/// and the fold-averaged macro-F1 for each grid value.
///
/// Folds: pair indices shuffled by `ChaCha8Rng::seed_from_u64(seed)`,
/// shuffled position `p` in fold `p % k`. Each `c` learns its own PCA.
pub fn select_components(
    pairs: &[(Vec<f64>, Vec<f64>)],
    grid: &[usize],
    k: usize,
    seed: u64,
) -> (usize, Vec<f64>) {
    let n = pairs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let fold_of: Vec<usize> = {
        let mut f = vec![0; n];
        for (pos, &idx) in order.iter().enumerate() {
            f[idx] = pos % k;
        }
        f
    };
    let mut means = Vec::new();
    for &c in grid {
        let mut total = 0.0;
        for fold in 0..k {
            let split = |held: bool| -> (Vec<Vec<f64>>, Vec<bool>) {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (i, (a, b)) in pairs.iter().enumerate() {
                    if (fold_of[i] == fold) == held {
                        xs.push(a.clone());
                        ys.push(true);
                        xs.push(b.clone());
                        ys.push(false);
                    }
                }
                (xs, ys)
            };
            let (train_x, train_y) = split(false);
            let (test_x, test_y) = split(true);
            let (_, comps) = pca(&train_x, c, true);
            let project = |v: &Vec<f64>| -> Vec<f64> {
                comps.iter().map(|pc| pc.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
            };
            let ptrain: Vec<Vec<f64>> = train_x.iter().map(project).collect();
            let (w, bias) = lda(&ptrain, &train_y);
            let pred: Vec<bool> = test_x
                .iter()
                .map(|v| {
                    let p = project(v);
                    w.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() + bias >= 0.0
                })
                .collect();
            total += macro_f1(&pred, &test_y);
        }
        means.push(total / k as f64);
    }
    let mut best = 0;
    for g in 1..grid.len() {
        if means[g] > means[best] || (means[g] == means[best] && grid[g] < grid[best]) {
            best = g;
        }
    }
    (grid[best], means)
}
