//! Two-class linear discriminant analysis and macro-F1 scoring.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::embeddings::{Class, NEUTRAL};
use crate::error::{Error, Result};
use crate::linalg;

/// Relative ridge added to the pooled covariance: `λ = RIDGE · trace(Σ) / m`.
pub const RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LdaOptions {
    /// Use equal class priors instead of the empirical class frequencies.
    pub uniform_priors: bool,
}

/// A fitted two-class LDA: `score(x) = w·x + b`, positive class when `score ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Class names `(negative, positive)`.
    pub labels: (String, String),
    /// Priors of `(negative, positive)`.
    pub priors: (f64, f64),
}

pub fn fit_lda<V: AsRef<[f64]>>(x: &[V], y: &[Class]) -> Result<LdaModel> {
    fit_lda_with(x, y, LdaOptions::default())
}

/// Fits the shared-covariance Gaussian discriminant.
///
/// The pooled within-class covariance is ridge-regularised by
/// `1e-6 · trace(Σ) / m`; when every class is a single repeated point the
/// covariance is replaced by the identity.
pub fn fit_lda_with<V: AsRef<[f64]>>(x: &[V], y: &[Class], options: LdaOptions) -> Result<LdaModel> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors but {} labels",
            x.len(),
            y.len()
        )));
    }
    let m = x
        .first()
        .map(|v| v.as_ref().len())
        .ok_or_else(|| Error::invalid("no training data"))?;
    if m == 0 {
        return Err(Error::invalid("feature vectors are empty"));
    }

    let mut sums = [DVector::<f64>::zeros(m), DVector::<f64>::zeros(m)];
    let mut counts = [0usize; 2];
    for (v, &c) in x.iter().zip(y) {
        let v = v.as_ref();
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
        if v.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        let k = c as usize;
        counts[k] += 1;
        for (s, f) in sums[k].iter_mut().zip(v) {
            *s += f;
        }
    }
    if counts.contains(&0) {
        return Err(Error::invalid("both classes must be present in the training data"));
    }
    let means = [
        &sums[0] / counts[0] as f64,
        &sums[1] / counts[1] as f64,
    ];

    let mut scatter = DMatrix::<f64>::zeros(m, m);
    for (v, &c) in x.iter().zip(y) {
        let d = DVector::from_column_slice(v.as_ref()) - &means[c as usize];
        scatter.ger(1.0, &d, &d, 1.0);
    }
    let n = x.len();
    let dof = if n > 2 { (n - 2) as f64 } else { 1.0 };
    let mut sigma = scatter / dof;
    let trace = sigma.trace();
    if trace > 0.0 {
        let lambda = RIDGE * trace / m as f64;
        for i in 0..m {
            sigma[(i, i)] += lambda;
        }
    } else {
        sigma = DMatrix::identity(m, m);
    }

    let diff = &means[1] - &means[0];
    let w = match sigma.clone().cholesky() {
        Some(chol) => chol.solve(&diff),
        None => sigma
            .lu()
            .solve(&diff)
            .ok_or_else(|| Error::Degenerate("pooled covariance is singular".into()))?,
    };

    let priors = if options.uniform_priors {
        (0.5, 0.5)
    } else {
        (counts[0] as f64 / n as f64, counts[1] as f64 / n as f64)
    };
    let midpoint = (&means[0] + &means[1]) * 0.5;
    let bias = -w.dot(&midpoint) + (priors.1 / priors.0).ln();

    Ok(LdaModel {
        weights: w.iter().copied().collect(),
        bias,
        labels: (NEUTRAL.to_string(), "positive".to_string()),
        priors,
    })
}

impl LdaModel {
    pub fn with_labels(mut self, negative: impl Into<String>, positive: impl Into<String>) -> Self {
        self.labels = (negative.into(), positive.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: x.len(),
            });
        }
        Ok(linalg::dot(&self.weights, x) + self.bias)
    }

    /// Predicted class; a score of exactly zero goes to the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Class> {
        Ok(if self.decision_score(x)? >= 0.0 {
            Class::Positive
        } else {
            Class::Neutral
        })
    }

    pub fn label_name(&self, class: Class) -> &str {
        match class {
            Class::Neutral => &self.labels.0,
            Class::Positive => &self.labels.1,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let weights: Vec<String> = self.weights.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "# semsub lda v1")?;
        writeln!(w, "labels {} {}", self.labels.0, self.labels.1)?;
        writeln!(w, "priors {:.16e} {:.16e}", self.priors.0, self.priors.1)?;
        writeln!(w, "bias {:.16e}", self.bias)?;
        writeln!(w, "weights {}", weights.join(" "))?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<LdaModel> {
        let (mut labels, mut priors, mut bias, mut weights) = (None, None, None, None);
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let key = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let floats = || -> Result<Vec<f64>> {
                rest.iter()
                    .map(|s| {
                        s.parse()
                            .map_err(|_| Error::parse(line_no, format!("bad number {s:?}")))
                    })
                    .collect()
            };
            match (key, rest.len()) {
                ("labels", 2) => labels = Some((rest[0].to_string(), rest[1].to_string())),
                ("priors", 2) => {
                    let p = floats()?;
                    priors = Some((p[0], p[1]));
                }
                ("bias", 1) => bias = Some(floats()?[0]),
                ("weights", _) => weights = Some(floats()?),
                _ => return Err(Error::parse(line_no, format!("unexpected line {line:?}"))),
            }
        }
        let missing = |k: &str| Error::parse(0, format!("model file lacks {k:?}"));
        Ok(LdaModel {
            weights: weights.ok_or_else(|| missing("weights"))?,
            bias: bias.ok_or_else(|| missing("bias"))?,
            labels: labels.ok_or_else(|| missing("labels"))?,
            priors: priors.ok_or_else(|| missing("priors"))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalScores {
    pub macro_f1: f64,
    pub per_class: BTreeMap<Class, ClassScores>,
    pub support: BTreeMap<Class, usize>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision, recall and F1 (with `0/0 = 0`) and their macro mean.
pub fn evaluate(pred: &[Class], gold: &[Class]) -> Result<EvalScores> {
    if pred.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} predictions but {} gold labels",
            pred.len(),
            gold.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    let mut per_class = BTreeMap::new();
    let mut support = BTreeMap::new();
    for class in [Class::Neutral, Class::Positive] {
        let mut tp = 0;
        let mut predicted = 0;
        let mut actual = 0;
        for (&p, &g) in pred.iter().zip(gold) {
            tp += usize::from(p == class && g == class);
            predicted += usize::from(p == class);
            actual += usize::from(g == class);
        }
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, actual);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.insert(class, ClassScores { precision, recall, f1 });
        support.insert(class, actual);
    }
    let macro_f1 = 0.5 * (per_class[&Class::Neutral].f1 + per_class[&Class::Positive].f1);
    Ok(EvalScores {
        macro_f1,
        per_class,
        support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Class::{Neutral as N, Positive as P};

    fn model(weights: &[f64], bias: f64) -> LdaModel {
        LdaModel {
            weights: weights.to_vec(),
            bias,
            labels: ("neutral".into(), "profane".into()),
            priors: (0.5, 0.5),
        }
    }

    #[test]
    fn separated_clusters() {
        let x = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [4.0, 0.0], [4.0, 1.0], [5.0, 0.0]];
        let y = [N, N, N, P, P, P];
        let m = fit_lda(&x, &y).unwrap();
        assert_eq!(m.predict(&[1.0, 0.0]).unwrap(), N);
        assert_eq!(m.predict(&[3.9, 0.5]).unwrap(), P);
        assert_eq!(m.priors, (0.5, 0.5));
    }

    #[test]
    fn symmetric_means_cross_origin() {
        let a = 1.5;
        let x = [[-a - 1.0, 0.0], [-a + 1.0, 0.0], [-a, 1.0], [-a, -1.0], [a - 1.0, 0.0], [a + 1.0, 0.0], [a, 1.0], [a, -1.0]];
        let y = [N, N, N, N, P, P, P, P];
        let m = fit_lda(&x, &y).unwrap();
        assert!(m.decision_score(&[0.0, 0.0]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn fit_errors() {
        assert!(fit_lda(&[[0.0], [1.0]], &[P, P]).is_err());
        assert!(fit_lda(&[[0.0], [f64::NAN]], &[N, P]).is_err());
        assert!(fit_lda(&[[0.0], [1.0]], &[N]).is_err());
        assert!(fit_lda::<[f64; 1]>(&[], &[]).is_err());
    }

    #[test]
    fn degenerate_covariance_falls_back_to_identity() {
        let m = fit_lda(&[[0.0, 0.0], [2.0, 0.0]], &[N, P]).unwrap();
        assert_eq!(m.predict(&[1.5, 0.0]).unwrap(), P);
        assert_eq!(m.predict(&[0.5, 0.0]).unwrap(), N);
    }

    #[test]
    fn uniform_priors_drop_log_odds() {
        let x = [[0.0], [0.2], [1.0], [2.0], [2.2]];
        let y = [N, N, N, P, P];
        let emp = fit_lda(&x, &y).unwrap();
        let uni = fit_lda_with(&x, &y, LdaOptions { uniform_priors: true }).unwrap();
        assert_eq!(emp.weights, uni.weights);
        assert!((emp.bias - uni.bias - (2.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn prediction_and_scores() {
        let m = model(&[1.0, 0.0], -2.0);
        assert_eq!(m.decision_score(&[3.0, 0.0]).unwrap(), 1.0);
        assert_eq!(m.predict(&[3.0, 0.0]).unwrap(), P);
        assert_eq!(m.predict(&[1.0, 0.0]).unwrap(), N);
        assert_eq!(m.predict(&[2.0, 0.0]).unwrap(), P);
        assert!(m.predict(&[1.0]).is_err());
        assert_eq!(model(&[0.0, 0.0], 0.5).decision_score(&[9.0, -3.0]).unwrap(), 0.5);
        assert_eq!(model(&[1.0, 1.0], 0.0).decision_score(&[0.25, 0.75]).unwrap(), 1.0);
    }

    #[test]
    fn model_round_trip() {
        let m = model(&[0.1, -2.5e-7, 3.0], 1.0 / 3.0);
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(LdaModel::read_from(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn metric_examples() {
        let perfect = evaluate(&[P, N, P], &[P, N, P]).unwrap();
        assert_eq!(perfect.macro_f1, 1.0);

        let s = evaluate(&[P, N, N, N], &[P, P, N, N]).unwrap();
        assert!((s.per_class[&P].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.per_class[&N].f1 - 0.8).abs() < 1e-12);
        assert!((s.macro_f1 - 11.0 / 15.0).abs() < 1e-12);
        assert_eq!(s.support[&P], 2);

        let z = evaluate(&[N, N], &[P, P]).unwrap();
        assert_eq!(z.per_class[&P].f1, 0.0);
        assert_eq!(z.per_class[&N].f1, 0.0);
        assert_eq!(z.macro_f1, 0.0);

        assert!(evaluate(&[P], &[P, N]).is_err());
        assert!(evaluate(&[], &[]).is_err());
    }
}
