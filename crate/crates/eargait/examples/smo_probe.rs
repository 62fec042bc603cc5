use eargait::classify::{train_one_class, TrainConfig};
use eargait::features::{FeatureLayout, FeatureMode, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cluster(center: f64, spread: f64, n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|d| if d < 3 { center + spread * rng.gen_range(-1.0_f64..1.0) } else { 0.0 }).collect())
        .collect()
}

fn main() {
    let dim = 40;
    let layout = FeatureLayout { mode: FeatureMode::Mfcc, side: Side::Left };
    let train = cluster(0.0, 0.5, 60, dim, 1);
    let held_out = cluster(0.0, 0.5, 40, dim, 2);
    let outliers = cluster(5.0, 0.5, 40, dim, 3);
    for nu in [0.02, 0.05] {
        let model = train_one_class(&train, nu, layout, &TrainConfig::default()).unwrap();
        let rate = |rows: &[Vec<f64>]| {
            rows.iter().filter(|r| model.score(r).unwrap() > 0.0).count() as f64 / rows.len() as f64
        };
        let mut scores: Vec<f64> = held_out.iter().map(|r| model.score(r).unwrap()).collect();
        scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!(
            "nu={nu}: gamma={:.4} svs={} held={:.3} out={:.3} held q0/q2/q5/q50={:.4}/{:.4}/{:.4}/{:.4}",
            model.gamma, model.support_vectors.len(), rate(&held_out), rate(&outliers),
            scores[0], scores[2], scores[5], scores[20]
        );
    }
}
