//! Evaluation protocols, sweeps, and reports.
//!
//! Every protocol iterates over subjects: each in turn plays the
//! legitimate user, a model is trained on that subject's split (one-class
//! for the enrollment-only scheme, two-class otherwise), the held-out side
//! is scored, and FAR/FRR/BAC are averaged, unweighted, across subjects.

mod metrics;
mod split;

pub use metrics::{metrics, Counts, Metrics};
pub use split::{split, FeatureItem, Split, SplitScheme, SubjectData};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{train_one_class, train_two_class, Label, SvmModel, TrainConfig};
use crate::dataio::manifest::{Footwear, Ground};
use crate::error::{Error, Result};
use crate::features::FeatureLayout;
use crate::synth::mix_seed;

/// Classifier hyperparameters used by the protocols.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Hyperparams {
    /// One-class training-outlier bound.
    pub nu: f64,
    /// Two-class soft-margin weight.
    pub c: f64,
    /// RBF width; `None` = 1/d on standardized features.
    pub gamma: Option<f64>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { nu: 0.1, c: 1.0, gamma: None }
    }
}

/// Full protocol configuration.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub scheme: SplitScheme,
    pub seed: u64,
    pub hyper: Hyperparams,
}

impl ProtocolConfig {
    pub fn new(scheme: SplitScheme, seed: u64) -> Self {
        ProtocolConfig { scheme, seed, hyper: Hyperparams::default() }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig { gamma: self.hyper.gamma, ..TrainConfig::default() }
    }
}

/// A feature dataset ready for evaluation: one entry per subject, all rows
/// sharing one layout.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub layout: FeatureLayout,
    pub subjects: Vec<SubjectData>,
}

/// Per-subject evaluation outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectReport {
    pub subject_id: String,
    pub far: f64,
    pub frr: f64,
    pub bac: f64,
    pub counts: Counts,
    pub train_pos: usize,
    pub train_neg: usize,
}

/// Aggregated protocol outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub scheme: SplitScheme,
    pub seed: u64,
    pub per_subject: Vec<SubjectReport>,
    pub mean_far: f64,
    pub mean_frr: f64,
    pub mean_bac: f64,
    /// Typical training class balance, e.g. "1:5.0" (positive:negative);
    /// "1:0" for the one-class scheme.
    pub train_pos_neg_ratio: String,
}

fn evaluate_subject(
    dataset: &Dataset,
    subject_id: &str,
    config: &ProtocolConfig,
) -> Result<SubjectReport> {
    let s = split(&dataset.subjects, subject_id, config.scheme, config.seed)?;
    let model = train_for_split(&s, dataset.layout, config)?;
    let mut counts = Counts::default();
    for (row, &y) in s.test_x.iter().zip(&s.test_y) {
        let accept = model.score(row)? > model.decision_threshold;
        match (y > 0, accept) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fn_ += 1,
            (false, true) => counts.fp += 1,
            (false, false) => counts.tn += 1,
        }
    }
    let m = metrics(counts)?;
    Ok(SubjectReport {
        subject_id: subject_id.to_string(),
        far: m.far,
        frr: m.frr,
        bac: m.bac,
        counts,
        train_pos: s.train_pos(),
        train_neg: s.train_neg(),
    })
}

fn train_for_split(s: &Split, layout: FeatureLayout, config: &ProtocolConfig) -> Result<SvmModel> {
    let tc = config.train_config();
    match config.scheme {
        SplitScheme::OcSvm => {
            let pos: Vec<Vec<f64>> = s
                .train_x
                .iter()
                .zip(&s.train_y)
                .filter(|(_, &y)| y > 0)
                .map(|(r, _)| r.clone())
                .collect();
            train_one_class(&pos, config.hyper.nu, layout, &tc)
        }
        _ => {
            let labels: Vec<Label> = s
                .train_y
                .iter()
                .map(|&y| if y > 0 { Label::Legit } else { Label::Impostor })
                .collect();
            train_two_class(&s.train_x, &labels, config.hyper.c, layout, &tc)
        }
    }
}

fn aggregate(
    scheme: SplitScheme,
    seed: u64,
    per_subject: Vec<SubjectReport>,
) -> Result<EvalReport> {
    if per_subject.is_empty() {
        return Err(Error::Sizing("no subjects evaluated".into()));
    }
    let n = per_subject.len() as f64;
    let mean_far = per_subject.iter().map(|r| r.far).sum::<f64>() / n;
    let mean_frr = per_subject.iter().map(|r| r.frr).sum::<f64>() / n;
    let mean_bac = per_subject.iter().map(|r| r.bac).sum::<f64>() / n;
    let pos: usize = per_subject.iter().map(|r| r.train_pos).sum();
    let neg: usize = per_subject.iter().map(|r| r.train_neg).sum();
    let ratio = if pos == 0 {
        "0:1".to_string()
    } else {
        format!("1:{:.1}", neg as f64 / pos as f64)
    };
    Ok(EvalReport {
        scheme,
        seed,
        per_subject,
        mean_far,
        mean_frr,
        mean_bac,
        train_pos_neg_ratio: ratio,
    })
}

/// Run a protocol over every subject of the dataset. Subject loops run in
/// parallel; the report is ordered by subject id regardless of scheduling.
pub fn run_protocol(dataset: &Dataset, config: &ProtocolConfig) -> Result<EvalReport> {
    let mut ids: Vec<&str> = dataset.subjects.iter().map(|s| s.subject_id.as_str()).collect();
    ids.sort_unstable();
    let per_subject: Vec<SubjectReport> = ids
        .par_iter()
        .map(|id| evaluate_subject(dataset, id, config))
        .collect::<Result<Vec<_>>>()?;
    aggregate(config.scheme, config.seed, per_subject)
}

fn distribute(total: usize, bins: usize) -> Vec<usize> {
    let base = total / bins;
    let extra = total % bins;
    (0..bins).map(|i| base + usize::from(i < extra)).collect()
}

/// Sweep the training-set size with a fixed held-out test set.
///
/// For each subject, 20% of its cycles (and an equal number of impostor
/// cycles from 5 fixed impostors) are frozen as the test set; the training
/// side then grows through `sizes` (fractions of the subject's cycle
/// count), staying positive/negative balanced. Returns one report per size.
pub fn training_size_sweep(
    dataset: &Dataset,
    sizes: &[f64],
    config: &ProtocolConfig,
) -> Result<Vec<(f64, EvalReport)>> {
    if sizes.is_empty() {
        return Err(Error::Sizing("no sizes requested".into()));
    }
    for &f in sizes {
        if !(f > 0.0 && f <= 0.8) {
            return Err(Error::Sizing(format!("size fraction {f} outside (0, 0.8]")));
        }
    }
    let mut ids: Vec<&str> = dataset.subjects.iter().map(|s| s.subject_id.as_str()).collect();
    ids.sort_unstable();

    // Freeze per-subject orders and impostor choices once.
    struct Fixture<'a> {
        legit: &'a SubjectData,
        legit_order: Vec<usize>,
        impostors: Vec<(&'a SubjectData, Vec<usize>)>,
        test_n: usize,
    }
    let mut fixtures = Vec::new();
    for id in &ids {
        let legit = dataset.subjects.iter().find(|s| s.subject_id == *id).unwrap();
        let m = legit.items.len();
        let test_n = (0.2 * m as f64).floor() as usize;
        if test_n == 0 {
            return Err(Error::Sizing(format!("subject '{id}' too small for a 20% test set")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[config.seed, 0x5357, fnv(id)]));
        let legit_order = order_of(legit, &mut rng);
        let mut impostors: Vec<&SubjectData> =
            dataset.subjects.iter().filter(|s| s.subject_id != *id).collect();
        impostors.shuffle(&mut rng);
        impostors.truncate(impostors.len().min(5));
        impostors.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
        let impostors = impostors
            .into_iter()
            .map(|imp| {
                let mut r = ChaCha8Rng::seed_from_u64(mix_seed(&[
                    config.seed,
                    0x5358,
                    fnv(id),
                    fnv(&imp.subject_id),
                ]));
                let order = order_of(imp, &mut r);
                (imp, order)
            })
            .collect();
        fixtures.push(Fixture { legit, legit_order, impostors, test_n });
    }

    let mut out = Vec::new();
    for &size in sizes {
        let per_subject: Vec<SubjectReport> = fixtures
            .par_iter()
            .map(|fx| -> Result<SubjectReport> {
                let m = fx.legit.items.len();
                let k = (size * m as f64).floor() as usize;
                if k == 0 {
                    return Err(Error::Sizing(format!("size {size} rounds to zero cycles")));
                }
                if k + fx.test_n > m {
                    return Err(Error::Sizing(format!(
                        "size {size} needs {k} training cycles but only {} remain",
                        m - fx.test_n
                    )));
                }
                let rows =
                    |s: &SubjectData, order: &[usize], range: std::ops::Range<usize>| -> Vec<Vec<f64>> {
                        order[range].iter().map(|&i| s.items[i].values.clone()).collect()
                    };

                let mut sp = Split::default();
                for r in rows(fx.legit, &fx.legit_order, 0..k) {
                    sp.train_x.push(r);
                    sp.train_y.push(1);
                }
                for r in rows(fx.legit, &fx.legit_order, m - fx.test_n..m) {
                    sp.test_x.push(r);
                    sp.test_y.push(1);
                }
                let train_counts = distribute(k, fx.impostors.len());
                let test_counts = distribute(fx.test_n, fx.impostors.len());
                for ((imp, order), (&tr, &te)) in
                    fx.impostors.iter().zip(train_counts.iter().zip(&test_counts))
                {
                    if tr + te > imp.items.len() {
                        return Err(Error::Sizing(format!(
                            "impostor '{}' cannot supply {tr}+{te} cycles",
                            imp.subject_id
                        )));
                    }
                    for r in rows(imp, order, 0..tr) {
                        sp.train_x.push(r);
                        sp.train_y.push(-1);
                    }
                    for r in rows(imp, order, imp.items.len() - te..imp.items.len()) {
                        sp.test_x.push(r);
                        sp.test_y.push(-1);
                    }
                }

                let cfg = ProtocolConfig {
                    scheme: SplitScheme::BiBalanced5,
                    seed: config.seed,
                    hyper: config.hyper,
                };
                let model = train_for_split(&sp, dataset.layout, &cfg)?;
                let mut counts = Counts::default();
                for (row, &y) in sp.test_x.iter().zip(&sp.test_y) {
                    let accept = model.score(row)? > model.decision_threshold;
                    match (y > 0, accept) {
                        (true, true) => counts.tp += 1,
                        (true, false) => counts.fn_ += 1,
                        (false, true) => counts.fp += 1,
                        (false, false) => counts.tn += 1,
                    }
                }
                let m_ = metrics(counts)?;
                Ok(SubjectReport {
                    subject_id: fx.legit.subject_id.clone(),
                    far: m_.far,
                    frr: m_.frr,
                    bac: m_.bac,
                    counts,
                    train_pos: k,
                    train_neg: k,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((size, aggregate(SplitScheme::BiBalanced5, config.seed, per_subject)?));
    }
    Ok(out)
}

fn order_of(subject: &SubjectData, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..subject.items.len()).collect();
    order.shuffle(rng);
    order
}

fn fnv(s: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in s.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    h
}

/// One cell of the per-condition report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCell {
    pub ground: Ground,
    pub footwear: Footwear,
    /// Absent when the cell was skipped.
    pub report: Option<EvalReport>,
    pub notice: Option<String>,
}

/// Per-condition evaluation plus the combined-data cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub cells: Vec<ConditionCell>,
    pub combined: EvalReport,
}

/// Evaluate each (ground, footwear) cell separately, then all data
/// together. Cells that cannot support the protocol (too few cycles or
/// subjects) are skipped with a notice instead of failing the run.
pub fn condition_report(
    by_condition: &[((Ground, Footwear), Dataset)],
    config: &ProtocolConfig,
) -> Result<ConditionReport> {
    if by_condition.is_empty() {
        return Err(Error::Sizing("no condition cells".into()));
    }
    let mut cells = Vec::new();
    for ((ground, footwear), dataset) in by_condition {
        let cell = match run_protocol(dataset, config) {
            Ok(report) => ConditionCell {
                ground: *ground,
                footwear: *footwear,
                report: Some(report),
                notice: None,
            },
            Err(Error::Sizing(msg)) | Err(Error::Parameter(msg)) => ConditionCell {
                ground: *ground,
                footwear: *footwear,
                report: None,
                notice: Some(format!("skipped: {msg}")),
            },
            Err(e) => return Err(e),
        };
        cells.push(cell);
    }

    // Combined cell: merge every condition's items per subject.
    let layout = by_condition[0].1.layout;
    let mut merged: Vec<SubjectData> = Vec::new();
    for (_, dataset) in by_condition {
        if dataset.layout != layout {
            return Err(Error::LayoutMismatch {
                expected: layout.to_string(),
                got: dataset.layout.to_string(),
            });
        }
        for subject in &dataset.subjects {
            match merged.iter_mut().find(|s| s.subject_id == subject.subject_id) {
                Some(s) => s.items.extend(subject.items.iter().cloned()),
                None => merged.push(subject.clone()),
            }
        }
    }
    merged.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let combined = run_protocol(&Dataset { layout, subjects: merged }, config)?;
    Ok(ConditionReport { cells, combined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureLayout, FeatureMode, Side};
    use rand::Rng;

    fn layout() -> FeatureLayout {
        FeatureLayout { mode: FeatureMode::Mfcc, side: Side::Left }
    }

    /// Synthetic feature dataset: each subject is a Gaussian blob around
    /// its own center, `sep` apart along distinct axes.
    fn blob_dataset(n_subjects: usize, m: usize, sep: f64, seed: u64) -> Dataset {
        let dim = layout().len();
        let mut subjects = Vec::new();
        for s in 0..n_subjects {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, s as u64]));
            let mut items = Vec::new();
            for c in 0..m {
                let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                v[s % dim] += sep;
                items.push(FeatureItem {
                    session_id: format!("sess{}", c % 2),
                    values: v,
                });
            }
            subjects.push(SubjectData { subject_id: format!("s{s:02}"), items });
        }
        Dataset { layout: layout(), subjects }
    }

    #[test]
    fn separable_subjects_reach_high_bac() {
        let dataset = blob_dataset(6, 60, 6.0, 3);
        let report =
            run_protocol(&dataset, &ProtocolConfig::new(SplitScheme::BiBalanced5, 1)).unwrap();
        assert!(report.mean_bac >= 0.9, "mean BAC {}", report.mean_bac);
        assert_eq!(report.per_subject.len(), 6);
        for w in report.per_subject.windows(2) {
            assert!(w[0].subject_id < w[1].subject_id);
        }
    }

    #[test]
    fn identical_subjects_hover_at_chance() {
        // Every subject drawn from the same blob.
        let dim = layout().len();
        let mut subjects = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for s in 0..5 {
            let items = (0..60)
                .map(|c| FeatureItem {
                    session_id: format!("sess{}", c % 2),
                    values: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                })
                .collect();
            subjects.push(SubjectData { subject_id: format!("s{s:02}"), items });
        }
        let dataset = Dataset { layout: layout(), subjects };
        let report =
            run_protocol(&dataset, &ProtocolConfig::new(SplitScheme::BiBalancedAll, 2)).unwrap();
        assert!((report.mean_bac - 0.5).abs() <= 0.1, "mean BAC {}", report.mean_bac);
    }

    #[test]
    fn imbalanced_scheme_reports_ratio() {
        let dataset = blob_dataset(6, 40, 5.0, 4);
        let report =
            run_protocol(&dataset, &ProtocolConfig::new(SplitScheme::BiImbalanced, 0)).unwrap();
        assert_eq!(report.train_pos_neg_ratio, "1:5.0");
        let balanced =
            run_protocol(&dataset, &ProtocolConfig::new(SplitScheme::BiBalanced5, 0)).unwrap();
        assert_eq!(balanced.train_pos_neg_ratio, "1:1.0");
    }

    #[test]
    fn reports_are_reproducible() {
        let dataset = blob_dataset(4, 40, 5.0, 5);
        let cfg = ProtocolConfig::new(SplitScheme::BiBalanced5, 11);
        let a = run_protocol(&dataset, &cfg).unwrap();
        let b = run_protocol(&dataset, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn bac_identity_holds_exactly() {
        let dataset = blob_dataset(4, 40, 2.0, 6);
        for scheme in [SplitScheme::OcSvm, SplitScheme::BiBalancedAll] {
            let report = run_protocol(&dataset, &ProtocolConfig::new(scheme, 3)).unwrap();
            for row in &report.per_subject {
                assert_eq!(row.bac, 1.0 - (row.far + row.frr) / 2.0);
            }
        }
    }

    #[test]
    fn sweep_counts_and_fixed_test_set() {
        let dataset = blob_dataset(6, 80, 5.0, 7);
        let sizes = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        let cfg = ProtocolConfig::new(SplitScheme::BiBalanced5, 13);
        let reports = training_size_sweep(&dataset, &sizes, &cfg).unwrap();
        assert_eq!(reports.len(), 8);
        for (i, (size, report)) in reports.iter().enumerate() {
            let expected_train = (size * 80.0).floor() as usize;
            assert_eq!(expected_train, 8 * (i + 1));
            for row in &report.per_subject {
                assert_eq!(row.train_pos, expected_train);
                assert_eq!(row.train_neg, expected_train);
                assert_eq!(row.counts.tp + row.counts.fn_, 16);
                assert_eq!(row.counts.tn + row.counts.fp, 16);
            }
        }
    }

    #[test]
    fn sweep_rejects_zero_size() {
        let dataset = blob_dataset(3, 40, 5.0, 8);
        let cfg = ProtocolConfig::new(SplitScheme::BiBalanced5, 0);
        assert!(matches!(
            training_size_sweep(&dataset, &[0.0], &cfg),
            Err(Error::Sizing(_))
        ));
    }

    #[test]
    fn sweep_no_catastrophic_regression() {
        let dataset = blob_dataset(5, 80, 6.0, 9);
        let cfg = ProtocolConfig::new(SplitScheme::BiBalanced5, 1);
        let reports = training_size_sweep(&dataset, &[0.1, 0.4], &cfg).unwrap();
        let bac_small = reports[0].1.mean_bac;
        let bac_large = reports[1].1.mean_bac;
        assert!(bac_large >= bac_small - 0.05, "{bac_small} -> {bac_large}");
    }

    #[test]
    fn condition_cells_and_combined() {
        let tiles = blob_dataset(4, 40, 6.0, 10);
        let carpet = blob_dataset(4, 40, 6.0, 11);
        let sparse = Dataset { layout: layout(), subjects: vec![] };
        let cells = vec![
            ((Ground::Tiles, Footwear::Sneakers), tiles),
            ((Ground::Carpet, Footwear::Sneakers), carpet),
            ((Ground::Tiles, Footwear::Barefoot), sparse),
        ];
        let cfg = ProtocolConfig::new(SplitScheme::BiBalanced5, 2);
        let report = condition_report(&cells, &cfg).unwrap();
        assert_eq!(report.cells.len(), 3);
        assert!(report.cells[0].report.is_some());
        assert!(report.cells[1].report.is_some());
        assert!(report.cells[2].report.is_none());
        assert!(report.cells[2].notice.is_some());
        assert_eq!(report.combined.per_subject.len(), 4);
    }
}
