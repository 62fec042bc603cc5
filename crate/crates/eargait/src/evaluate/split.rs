//! Train/test splitting for the four evaluation protocols.
//!
//! All sampling is seeded and reproducible; per-subject splits stratify by
//! session (each session contributes proportionally to train and test) and
//! train/test cycle sets are always disjoint. The two balanced schemes
//! produce exactly equal positive and negative counts on both sides.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::mix_seed;

/// The four training/testing protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitScheme {
    /// Train one-class on 70% of the legitimate subject; test on the rest
    /// plus every impostor cycle.
    OcSvm,
    /// Two-class, 70/30 of everyone; heavily imbalanced toward impostors.
    BiImbalanced,
    /// Two-class, balanced: half the legit cycles vs the same number drawn
    /// from the pooled impostors, for both train and test.
    BiBalancedAll,
    /// Two-class, balanced, impostors limited to 5 sampled subjects, 10%
    /// of the legit count from each.
    BiBalanced5,
}

impl std::fmt::Display for SplitScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SplitScheme::OcSvm => "oc-svm",
            SplitScheme::BiImbalanced => "bi-imbalanced",
            SplitScheme::BiBalancedAll => "bi-balanced-all",
            SplitScheme::BiBalanced5 => "bi-balanced-5",
        };
        write!(f, "{s}")
    }
}

/// One cycle's features plus where it came from.
#[derive(Debug, Clone)]
pub struct FeatureItem {
    pub session_id: String,
    pub values: Vec<f64>,
}

/// All cycles of one subject, in extraction order.
#[derive(Debug, Clone)]
pub struct SubjectData {
    pub subject_id: String,
    pub items: Vec<FeatureItem>,
}

/// A labeled train/test split; `y` is +1 for the legitimate subject.
#[derive(Debug, Clone, Default)]
pub struct Split {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<i8>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<i8>,
}

impl Split {
    pub fn train_pos(&self) -> usize {
        self.train_y.iter().filter(|&&y| y > 0).count()
    }
    pub fn train_neg(&self) -> usize {
        self.train_y.len() - self.train_pos()
    }
    pub fn test_pos(&self) -> usize {
        self.test_y.iter().filter(|&&y| y > 0).count()
    }
    pub fn test_neg(&self) -> usize {
        self.test_y.len() - self.test_pos()
    }
}

/// Shuffle a subject's cycle indices stratified by session: within each
/// session the order is random, sessions contribute proportionally to any
/// prefix taken from the result.
fn stratified_order(subject: &SubjectData, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut sessions: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, item) in subject.items.iter().enumerate() {
        match sessions.iter_mut().find(|(sid, _)| *sid == item.session_id) {
            Some((_, idxs)) => idxs.push(i),
            None => sessions.push((item.session_id.clone(), vec![i])),
        }
    }
    for (_, idxs) in &mut sessions {
        idxs.shuffle(rng);
    }
    // Interleave sessions by fractional position so any prefix is
    // proportionally stratified.
    let total: usize = sessions.iter().map(|(_, v)| v.len()).sum();
    let mut cursors = vec![0usize; sessions.len()];
    let mut order = Vec::with_capacity(total);
    for _ in 0..total {
        let (best, _) = cursors
            .iter()
            .enumerate()
            .filter(|(s, &c)| c < sessions[*s].1.len())
            .map(|(s, &c)| (s, (c as f64 + 0.5) / sessions[s].1.len() as f64))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
            .expect("cursor available while order incomplete");
        order.push(sessions[best].1[cursors[best]]);
        cursors[best] += 1;
    }
    order
}

fn take_rows(subject: &SubjectData, order: &[usize], range: std::ops::Range<usize>) -> Vec<Vec<f64>> {
    order[range].iter().map(|&i| subject.items[i].values.clone()).collect()
}

fn subject_rng(seed: u64, scheme: SplitScheme, subject_id: &str, salt: u64) -> ChaCha8Rng {
    let mut h = 0xcbf29ce484222325u64;
    for b in subject_id.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(mix_seed(&[seed, scheme as u64, h, salt]))
}

/// Build the train/test split for `legit_subject` under a scheme.
///
/// Fractional counts are floored; leftover legitimate cycles go to the test
/// side except in the balanced schemes, where both sides are truncated to
/// exactly equal positive and negative counts.
pub fn split(
    dataset: &[SubjectData],
    legit_subject: &str,
    scheme: SplitScheme,
    seed: u64,
) -> Result<Split> {
    if dataset.len() < 2 {
        return Err(Error::Sizing("need at least 2 subjects".into()));
    }
    let legit = dataset
        .iter()
        .find(|s| s.subject_id == legit_subject)
        .ok_or_else(|| Error::Sizing(format!("unknown subject '{legit_subject}'")))?;
    let m = legit.items.len();
    if m < 10 {
        return Err(Error::Sizing(format!(
            "subject '{legit_subject}' has {m} cycles, need at least 10"
        )));
    }
    let impostors: Vec<&SubjectData> =
        dataset.iter().filter(|s| s.subject_id != legit_subject).collect();

    let mut rng = subject_rng(seed, scheme, legit_subject, 0);
    let legit_order = stratified_order(legit, &mut rng);

    let mut out = Split::default();
    let push = |split: &mut Split, rows: Vec<Vec<f64>>, label: i8, train: bool| {
        for r in rows {
            if train {
                split.train_x.push(r);
                split.train_y.push(label);
            } else {
                split.test_x.push(r);
                split.test_y.push(label);
            }
        }
    };

    match scheme {
        SplitScheme::OcSvm => {
            let n_train = (0.7 * m as f64).floor() as usize;
            push(&mut out, take_rows(legit, &legit_order, 0..n_train), 1, true);
            push(&mut out, take_rows(legit, &legit_order, n_train..m), 1, false);
            for imp in &impostors {
                let rows: Vec<Vec<f64>> = imp.items.iter().map(|i| i.values.clone()).collect();
                push(&mut out, rows, -1, false);
            }
        }
        SplitScheme::BiImbalanced => {
            let n_train = (0.7 * m as f64).floor() as usize;
            push(&mut out, take_rows(legit, &legit_order, 0..n_train), 1, true);
            push(&mut out, take_rows(legit, &legit_order, n_train..m), 1, false);
            for imp in &impostors {
                let mut imp_rng = subject_rng(seed, scheme, &imp.subject_id, 1);
                let order = stratified_order(imp, &mut imp_rng);
                let k = (0.7 * imp.items.len() as f64).floor() as usize;
                push(&mut out, take_rows(imp, &order, 0..k), -1, true);
                push(&mut out, take_rows(imp, &order, k..imp.items.len()), -1, false);
            }
        }
        SplitScheme::BiBalancedAll => {
            let half = (0.5 * m as f64).floor() as usize;
            let test_pos = m - half;
            push(&mut out, take_rows(legit, &legit_order, 0..half), 1, true);
            push(&mut out, take_rows(legit, &legit_order, half..m), 1, false);

            // Pool every impostor cycle, sample train and a disjoint test set.
            let mut pool: Vec<Vec<f64>> = impostors
                .iter()
                .flat_map(|imp| imp.items.iter().map(|i| i.values.clone()))
                .collect();
            if pool.len() < half + test_pos {
                return Err(Error::Sizing(format!(
                    "impostor pool of {} cannot supply {} train + {} test cycles",
                    pool.len(),
                    half,
                    test_pos
                )));
            }
            pool.shuffle(&mut rng);
            let mut it = pool.into_iter();
            push(&mut out, it.by_ref().take(half).collect(), -1, true);
            push(&mut out, it.take(test_pos).collect(), -1, false);
        }
        SplitScheme::BiBalanced5 => {
            let n_imp = impostors.len().min(5);
            let tenth = (0.1 * m as f64).floor() as usize;
            if tenth == 0 {
                return Err(Error::Sizing(format!("10% of {m} cycles rounds to zero")));
            }
            // Equal positive/negative counts on both sides.
            let train_pos = (0.5 * m as f64).floor().min((n_imp * tenth) as f64) as usize;
            let test_pos = (m - train_pos).min(n_imp * tenth);

            push(&mut out, take_rows(legit, &legit_order, 0..train_pos), 1, true);
            push(&mut out, take_rows(legit, &legit_order, train_pos..train_pos + test_pos), 1, false);

            let mut chosen: Vec<&SubjectData> = impostors.clone();
            chosen.shuffle(&mut rng);
            chosen.truncate(n_imp);
            chosen.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
            // Round-robin so per-impostor counts stay even when truncation
            // trims the totals.
            let mut train_quota = train_pos;
            let mut test_quota = test_pos;
            for (idx, imp) in chosen.iter().enumerate() {
                if imp.items.len() < 2 * tenth {
                    return Err(Error::Sizing(format!(
                        "impostor '{}' has {} cycles, needs {}",
                        imp.subject_id,
                        imp.items.len(),
                        2 * tenth
                    )));
                }
                let mut imp_rng = subject_rng(seed, scheme, &imp.subject_id, 2 + idx as u64);
                let order = stratified_order(imp, &mut imp_rng);
                let k_train = tenth.min(train_quota);
                let k_test = tenth.min(test_quota);
                train_quota -= k_train;
                test_quota -= k_test;
                push(&mut out, take_rows(imp, &order, 0..k_train), -1, true);
                push(&mut out, take_rows(imp, &order, k_train..k_train + k_test), -1, false);
            }
        }
    }
    Ok(out)
}
