//! Identification decision functions: one-class and two-class RBF SVMs.
//!
//! Enrollment with legitimate-user data only trains a one-class model;
//! when benchmark impostor cycles are available a two-class soft-margin
//! model is trained instead. Both duals are solved by the sequential
//! pairwise optimizer in [`smo`]. Features are z-scored with statistics
//! fitted on the training split only; the scaler travels with the model.

mod smo;

pub use smo::{solve as smo_solve, SmoSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureLayout, FeatureVector};

/// Per-dimension standardization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Standard deviations; zero-variance dimensions are stored as 1 so
    /// they pass through unchanged.
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Scaler {
        let n = rows.len() as f64;
        let d = rows[0].len();
        let mut mean = vec![0.0; d];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|&s| (s / n).sqrt()).map(|s| if s > 0.0 { s } else { 1.0 }).collect();
        Scaler { mean, std }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect()
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmKind {
    OneClass,
    TwoClass,
}

/// Class label for two-class training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Legit,
    Impostor,
}

impl Label {
    fn sign(self) -> f64 {
        match self {
            Label::Legit => 1.0,
            Label::Impostor => -1.0,
        }
    }
}

/// A trained decision function. Support vectors are stored in scaled
/// (z-scored) space; the scaler transforms incoming probes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub kind: SvmKind,
    pub support_vectors: Vec<Vec<f64>>,
    /// alpha_i for one-class models, alpha_i * y_i for two-class models.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    /// Upper bound of the dual box: 1/(nu*n) for one-class, C for two-class.
    pub dual_bound: f64,
    pub scaler: Scaler,
    pub feature_layout: FeatureLayout,
    /// Scores strictly above this accept; ties reject (fail closed).
    pub decision_threshold: f64,
}

/// Outcome of scoring one probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub accept: bool,
    pub score: f64,
}

/// Training knobs shared by both trainers.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    /// RBF width; `None` picks 1/(d * mean scaled variance).
    pub gamma: Option<f64>,
    /// KKT stopping tolerance of the dual solver.
    pub tolerance: f64,
    /// Cap on pair updates.
    pub max_iterations: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { gamma: None, tolerance: 1e-3, max_iterations: 100_000 }
    }
}

fn resolve_gamma(scaled: &[Vec<f64>], requested: Option<f64>) -> Result<f64> {
    if let Some(g) = requested {
        if !(g > 0.0) {
            return Err(Error::Parameter(format!("gamma must be positive, got {g}")));
        }
        return Ok(g);
    }
    let d = scaled[0].len();
    let n = scaled.len() as f64;
    let mut mean_var = 0.0;
    for dim in 0..d {
        let mean: f64 = scaled.iter().map(|r| r[dim]).sum::<f64>() / n;
        mean_var += scaled.iter().map(|r| (r[dim] - mean).powi(2)).sum::<f64>() / n;
    }
    mean_var /= d as f64;
    if mean_var <= 0.0 {
        return Err(Error::DegenerateData("zero variance in every dimension".into()));
    }
    Ok(1.0 / (d as f64 * mean_var))
}

fn kernel_matrix(rows: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = rbf(&rows[i], &rows[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

fn all_rows_identical(rows: &[Vec<f64>]) -> bool {
    rows.windows(2).all(|w| w[0] == w[1])
}

/// Train a one-class model on legitimate-user cycles only.
///
/// Solves the nu-parameterized one-class dual: the dual variables live in
/// `[0, 1/(nu*n)]` and sum to 1, so at most a nu fraction of the training
/// points end up outside the learned boundary.
pub fn train_one_class(
    x: &[Vec<f64>],
    nu: f64,
    layout: FeatureLayout,
    cfg: &TrainConfig,
) -> Result<SvmModel> {
    let n = x.len();
    if n < 8 {
        return Err(Error::Parameter(format!("one-class training needs >= 8 rows, got {n}")));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Parameter(format!("nu must be in (0, 1], got {nu}")));
    }
    if x.iter().any(|r| r.len() != layout.len()) {
        return Err(Error::LayoutMismatch {
            expected: layout.to_string(),
            got: format!("row of length {}", x.iter().find(|r| r.len() != layout.len()).unwrap().len()),
        });
    }
    if all_rows_identical(x) {
        return Err(Error::DegenerateData("all training rows are identical".into()));
    }

    let scaler = Scaler::fit(x);
    let scaled: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
    let gamma = resolve_gamma(&scaled, cfg.gamma)?;

    let bound = 1.0 / (nu * n as f64);
    let mut alpha = vec![0.0; n];
    let n_at_bound = (nu * n as f64).floor() as usize;
    for a in alpha.iter_mut().take(n_at_bound) {
        *a = bound;
    }
    if n_at_bound < n {
        alpha[n_at_bound] = 1.0 - n_at_bound as f64 * bound;
    }

    let q = kernel_matrix(&scaled, gamma);
    let y = vec![1.0; n];
    let p = vec![0.0; n];
    let c = vec![bound; n];
    let sol = smo::solve(&q, &y, &p, &c, alpha, cfg.tolerance, cfg.max_iterations);

    // Offset at the smallest free-SV gradient: free support vectors then
    // score >= 0, so only bound duals can reject training points, and those
    // are capped at nu*n by feasibility (each carries alpha = 1/(nu*n),
    // they sum to at most 1).
    let free_min = sol
        .alpha
        .iter()
        .zip(&sol.gradient)
        .filter(|(&a, _)| a > 1e-12 && a < bound - 1e-12)
        .map(|(_, &g)| g)
        .fold(f64::INFINITY, f64::min);
    let rho = if free_min.is_finite() { free_min } else { sol.rho };

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (row, &a) in scaled.iter().zip(&sol.alpha) {
        if a > 1e-12 {
            support_vectors.push(row.clone());
            dual_coefs.push(a);
        }
    }
    let model = SvmModel {
        kind: SvmKind::OneClass,
        support_vectors,
        dual_coefs,
        bias: -rho,
        gamma,
        dual_bound: bound,
        scaler,
        feature_layout: layout,
        decision_threshold: 0.0,
    };
    model.validate()?;
    Ok(model)
}

/// Train a soft-margin two-class model from legitimate and impostor cycles.
pub fn train_two_class(
    x: &[Vec<f64>],
    labels: &[Label],
    c_param: f64,
    layout: FeatureLayout,
    cfg: &TrainConfig,
) -> Result<SvmModel> {
    if x.len() != labels.len() {
        return Err(Error::Parameter("row/label count mismatch".into()));
    }
    if !(c_param > 0.0) {
        return Err(Error::Parameter(format!("C must be positive, got {c_param}")));
    }
    let n_pos = labels.iter().filter(|l| **l == Label::Legit).count();
    let n_neg = labels.len() - n_pos;
    if n_pos < 2 || n_neg < 2 {
        return Err(Error::Parameter(format!(
            "two-class training needs both classes (>= 2 rows each), got {n_pos} legit / {n_neg} impostor"
        )));
    }
    if x.iter().any(|r| r.len() != layout.len()) {
        return Err(Error::LayoutMismatch {
            expected: layout.to_string(),
            got: "row of different length".into(),
        });
    }

    let scaler = Scaler::fit(x);
    let scaled: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
    let gamma = resolve_gamma(&scaled, cfg.gamma)?;

    let n = x.len();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let k = kernel_matrix(&scaled, gamma);
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = y[i] * y[j] * k[i * n + j];
        }
    }
    let p = vec![-1.0; n];
    let c = vec![c_param; n];
    let sol = smo::solve(&q, &y, &p, &c, vec![0.0; n], cfg.tolerance, cfg.max_iterations);

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for ((row, &a), &yi) in scaled.iter().zip(&sol.alpha).zip(&y) {
        if a > 1e-12 {
            support_vectors.push(row.clone());
            dual_coefs.push(a * yi);
        }
    }
    let model = SvmModel {
        kind: SvmKind::TwoClass,
        support_vectors,
        dual_coefs,
        bias: -sol.rho,
        gamma,
        dual_bound: c_param,
        scaler,
        feature_layout: layout,
        decision_threshold: 0.0,
    };
    model.validate()?;
    Ok(model)
}

impl SvmModel {
    /// Check the dual-feasibility invariants of a trained model.
    pub fn validate(&self) -> Result<()> {
        if self.support_vectors.is_empty() {
            return Err(Error::DegenerateData("model has no support vectors".into()));
        }
        if self.support_vectors.len() != self.dual_coefs.len() {
            return Err(Error::Format("support vector / coefficient count mismatch".into()));
        }
        let tol = 1e-6;
        match self.kind {
            SvmKind::OneClass => {
                let sum: f64 = self.dual_coefs.iter().sum();
                if (sum - 1.0).abs() > tol {
                    return Err(Error::Format(format!("one-class duals sum to {sum}, not 1")));
                }
                if self.dual_coefs.iter().any(|&a| a < -tol || a > self.dual_bound + tol) {
                    return Err(Error::Format("one-class dual out of box".into()));
                }
            }
            SvmKind::TwoClass => {
                let sum: f64 = self.dual_coefs.iter().sum();
                if sum.abs() > tol {
                    return Err(Error::Format(format!(
                        "two-class duals must balance, sum is {sum}"
                    )));
                }
                if self.dual_coefs.iter().any(|&a| a.abs() > self.dual_bound + tol) {
                    return Err(Error::Format("two-class dual out of box".into()));
                }
            }
        }
        let finite = self.bias.is_finite()
            && self.gamma > 0.0
            && self.dual_coefs.iter().all(|v| v.is_finite())
            && self.support_vectors.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Format("model contains non-finite values".into()));
        }
        Ok(())
    }

    /// Raw decision score of an unscaled probe; no layout check.
    pub fn score(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.feature_layout.len() {
            return Err(Error::LayoutMismatch {
                expected: self.feature_layout.to_string(),
                got: format!("vector of length {}", values.len()),
            });
        }
        let probe = self.scaler.transform(values);
        let mut score = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            score += coef * rbf(sv, &probe, self.gamma);
        }
        Ok(score)
    }
}

/// Score a probe against a model: accept iff the score is strictly above
/// the decision threshold (a tie rejects — the biometric fails closed).
pub fn decide(model: &SvmModel, v: &FeatureVector) -> Result<Decision> {
    if v.layout != model.feature_layout {
        return Err(Error::LayoutMismatch {
            expected: model.feature_layout.to_string(),
            got: v.layout.to_string(),
        });
    }
    let score = model.score(&v.values)?;
    Ok(Decision { accept: score > model.decision_threshold, score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureMode, Side};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_layout(dim: usize) -> FeatureLayout {
        // Tests use small synthetic vectors; the mfcc-only layouts give
        // convenient 40-dim (left) and 80-dim (fused) spaces, so build
        // arbitrary-dimension rows only through helper clusters below.
        match dim {
            40 => FeatureLayout { mode: FeatureMode::Mfcc, side: Side::Left },
            80 => FeatureLayout { mode: FeatureMode::Mfcc, side: Side::Fused },
            _ => panic!("unsupported test dim"),
        }
    }

    /// Cluster with 3 effective dimensions embedded in a `dim`-sized layout
    /// (the rest constant), like real cycle features where a few resonant
    /// modes drive many correlated bands.
    fn cluster(center: f64, spread: f64, n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..dim)
                    .map(|d| if d < 3 { center + spread * rng.gen_range(-1.0..1.0) } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn one_class_separates_clusters() {
        // nu bounds the training rejection rate, so hitting 95% acceptance
        // on held-out same-distribution data needs nu well under 5%.
        let dim = 40;
        let train = cluster(0.0, 0.5, 60, dim, 1);
        let held_out = cluster(0.0, 0.5, 40, dim, 2);
        let outliers = cluster(5.0, 0.5, 40, dim, 3);
        let model =
            train_one_class(&train, 0.02, toy_layout(dim), &TrainConfig::default()).unwrap();

        let accept_rate = |rows: &[Vec<f64>]| {
            rows.iter().filter(|r| model.score(r).unwrap() > 0.0).count() as f64
                / rows.len() as f64
        };
        assert!(accept_rate(&held_out) >= 0.95, "held-out acceptance too low");
        assert!(accept_rate(&outliers) <= 0.05, "outliers accepted");
    }

    #[test]
    fn one_class_outlier_fraction_bounded_by_nu() {
        let dim = 40;
        let train = cluster(0.0, 1.0, 80, dim, 5);
        for nu in [0.05, 0.1, 0.3] {
            let model =
                train_one_class(&train, nu, toy_layout(dim), &TrainConfig::default()).unwrap();
            let negatives = train.iter().filter(|r| model.score(r).unwrap() < 0.0).count();
            let fraction = negatives as f64 / train.len() as f64;
            assert!(fraction <= nu + 0.05, "nu={nu}: {fraction} of training scored negative");
        }
    }

    #[test]
    fn nu_one_makes_every_point_a_bounded_sv() {
        let dim = 40;
        let train = cluster(0.0, 1.0, 20, dim, 6);
        let model = train_one_class(&train, 1.0, toy_layout(dim), &TrainConfig::default()).unwrap();
        assert_eq!(model.support_vectors.len(), train.len());
        for &a in &model.dual_coefs {
            assert!((a - 1.0 / train.len() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicated_rows_leave_decision_function_unchanged() {
        let dim = 40;
        let train = cluster(0.0, 1.0, 30, dim, 7);
        let mut doubled = train.clone();
        doubled.extend(train.iter().cloned());

        let tight = TrainConfig { tolerance: 1e-8, max_iterations: 2_000_000, gamma: Some(0.05) };
        let m1 = train_one_class(&train, 0.2, toy_layout(dim), &tight).unwrap();
        let m2 = train_one_class(&doubled, 0.2, toy_layout(dim), &tight).unwrap();

        let probes = cluster(0.0, 2.0, 50, dim, 8);
        for p in &probes {
            let s1 = m1.score(p).unwrap();
            let s2 = m2.score(p).unwrap();
            assert!((s1 - s2).abs() < 1e-6, "scores diverged: {s1} vs {s2}");
        }
    }

    #[test]
    fn degenerate_one_class_data_rejected() {
        let rows = vec![vec![1.0; 40]; 10];
        let err = train_one_class(&rows, 0.1, toy_layout(40), &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateData(_)));
    }

    #[test]
    fn xor_pattern_fits_with_rbf() {
        let dim = 40;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (a, b, label) in
            [(0.0, 0.0, Label::Legit), (1.0, 1.0, Label::Legit), (0.0, 1.0, Label::Impostor), (1.0, 0.0, Label::Impostor)]
        {
            let mut row = vec![0.0; dim];
            row[0] = a;
            row[1] = b;
            x.push(row);
            y.push(label);
        }
        let cfg = TrainConfig { gamma: Some(1.0), ..TrainConfig::default() };
        let model = train_two_class(&x, &y, 10.0, toy_layout(dim), &cfg).unwrap();
        for (row, label) in x.iter().zip(&y) {
            let score = model.score(row).unwrap();
            match label {
                Label::Legit => assert!(score > 0.0, "legit point scored {score}"),
                Label::Impostor => assert!(score < 0.0, "impostor point scored {score}"),
            }
        }
    }

    #[test]
    fn well_separated_gaussians_generalize() {
        let dim = 40;
        let mut x = cluster(0.0, 1.0, 50, dim, 9);
        x.extend(cluster(6.0, 1.0, 50, dim, 10));
        let mut y = vec![Label::Legit; 50];
        y.extend(vec![Label::Impostor; 50]);
        let model = train_two_class(&x, &y, 1.0, toy_layout(dim), &TrainConfig::default()).unwrap();

        let test_pos = cluster(0.0, 1.0, 100, dim, 11);
        let test_neg = cluster(6.0, 1.0, 100, dim, 12);
        let mut correct = 0;
        for r in &test_pos {
            if model.score(r).unwrap() > 0.0 {
                correct += 1;
            }
        }
        for r in &test_neg {
            if model.score(r).unwrap() < 0.0 {
                correct += 1;
            }
        }
        assert!(correct >= 198, "accuracy {correct}/200");
    }

    #[test]
    fn flipping_labels_negates_scores() {
        let dim = 40;
        let mut x = cluster(0.0, 1.0, 20, dim, 13);
        x.extend(cluster(3.0, 1.0, 20, dim, 14));
        let y: Vec<Label> = (0..40).map(|i| if i < 20 { Label::Legit } else { Label::Impostor }).collect();
        let flipped: Vec<Label> =
            y.iter().map(|l| if *l == Label::Legit { Label::Impostor } else { Label::Legit }).collect();

        let cfg = TrainConfig { tolerance: 1e-8, max_iterations: 1_000_000, gamma: Some(0.02) };
        let m1 = train_two_class(&x, &y, 1.0, toy_layout(dim), &cfg).unwrap();
        let m2 = train_two_class(&x, &flipped, 1.0, toy_layout(dim), &cfg).unwrap();
        for p in cluster(1.5, 2.0, 30, dim, 15) {
            let s1 = m1.score(&p).unwrap();
            let s2 = m2.score(&p).unwrap();
            assert!((s1 + s2).abs() < 1e-6, "scores not symmetric: {s1} vs {s2}");
        }
    }

    #[test]
    fn single_class_labels_rejected() {
        let x = cluster(0.0, 1.0, 10, 40, 16);
        let y = vec![Label::Legit; 10];
        assert!(matches!(
            train_two_class(&x, &y, 1.0, toy_layout(40), &TrainConfig::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn decide_enforces_layout_and_threshold() {
        let dim = 40;
        let train = cluster(0.0, 1.0, 30, dim, 17);
        let mut model =
            train_one_class(&train, 0.1, toy_layout(dim), &TrainConfig::default()).unwrap();

        let interior = FeatureVector { values: train[0].clone(), layout: toy_layout(dim) };
        assert!(decide(&model, &interior).unwrap().accept);

        let far = FeatureVector { values: vec![100.0; dim], layout: toy_layout(dim) };
        assert!(!decide(&model, &far).unwrap().accept);

        let wrong_layout = FeatureVector {
            values: vec![0.0; 80],
            layout: toy_layout(80),
        };
        assert!(matches!(decide(&model, &wrong_layout), Err(Error::LayoutMismatch { .. })));

        model.decision_threshold = f64::INFINITY;
        assert!(!decide(&model, &interior).unwrap().accept);
    }

    #[test]
    fn scaler_absorbs_per_dimension_gain() {
        let dim = 40;
        let mut train = cluster(0.0, 1.0, 30, dim, 18);
        train.extend(cluster(4.0, 1.0, 30, dim, 19));
        let labels: Vec<Label> =
            (0..60).map(|i| if i < 30 { Label::Legit } else { Label::Impostor }).collect();
        let probes = cluster(2.0, 3.0, 40, dim, 20);

        let model =
            train_two_class(&train, &labels, 1.0, toy_layout(dim), &TrainConfig::default())
                .unwrap();

        // Scale one dimension of the whole corpus by a power of two; means
        // and deviations scale exactly, so every score is bit-identical.
        let k = 1024.0;
        let scale_rows = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|r| {
                    let mut r = r.clone();
                    r[7] *= k;
                    r
                })
                .collect()
        };
        let model_scaled = train_two_class(
            &scale_rows(&train),
            &labels,
            1.0,
            toy_layout(dim),
            &TrainConfig::default(),
        )
        .unwrap();
        for (p, ps) in probes.iter().zip(scale_rows(&probes)) {
            let s1 = model.score(p).unwrap();
            let s2 = model_scaled.score(&ps).unwrap();
            assert_eq!(s1, s2, "score changed under per-dimension gain");
        }
    }
}
