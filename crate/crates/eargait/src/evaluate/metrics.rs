//! Identification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts of one evaluation: legitimate probes are positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

/// False-acceptance rate, false-rejection rate, balanced accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub far: f64,
    pub frr: f64,
    pub bac: f64,
}

/// Compute FAR/FRR/BAC from confusion counts.
///
/// far = fp/(fp+tn), frr = fn/(fn+tp); bac is evaluated through the
/// identity `bac = 1 - (far + frr)/2`, which equals (TPR+TNR)/2 and makes
/// the identity hold bit-exactly on every report.
pub fn metrics(counts: Counts) -> Result<Metrics> {
    let Counts { tp, tn, fp, fn_ } = counts;
    if fp + tn == 0 {
        return Err(Error::UndefinedMetric("no impostor probes (fp + tn = 0)".into()));
    }
    if fn_ + tp == 0 {
        return Err(Error::UndefinedMetric("no legitimate probes (fn + tp = 0)".into()));
    }
    let far = fp as f64 / (fp + tn) as f64;
    let frr = fn_ as f64 / (fn_ + tp) as f64;
    Ok(Metrics { far, frr, bac: 1.0 - (far + frr) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn perfect_classifier() {
        let m = metrics(Counts { tp: 10, tn: 10, fp: 0, fn_: 0 }).unwrap();
        assert_eq!(m.far, 0.0);
        assert_eq!(m.frr, 0.0);
        assert_eq!(m.bac, 1.0);
    }

    #[test]
    fn formula_arithmetic() {
        let m = metrics(Counts { tp: 9, fn_: 1, tn: 8, fp: 2 }).unwrap();
        assert!((m.far - 0.2).abs() < 1e-15);
        assert!((m.frr - 0.1).abs() < 1e-15);
        assert!((m.bac - 0.85).abs() < 1e-15);
    }

    #[test]
    fn headline_triple_satisfies_identity() {
        // far 3.23%, frr 2.25% -> bac 97.26%.
        let bac: f64 = 1.0 - (0.0323 + 0.0225) / 2.0;
        assert!((bac - 0.9726).abs() < 0.005);
    }

    #[test]
    fn identity_is_exact_for_random_counts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let c = Counts {
                tp: rng.gen_range(0..500),
                tn: rng.gen_range(1..500),
                fp: rng.gen_range(0..500),
                fn_: rng.gen_range(1..500),
            };
            let m = metrics(c).unwrap();
            assert_eq!(m.bac, 1.0 - (m.far + m.frr) / 2.0);
            assert!((0.0..=1.0).contains(&m.far));
            assert!((0.0..=1.0).contains(&m.frr));
            assert!((0.0..=1.0).contains(&m.bac));
        }
    }

    #[test]
    fn empty_class_is_undefined() {
        assert!(metrics(Counts { tp: 5, tn: 0, fp: 0, fn_: 1 }).is_err());
        assert!(metrics(Counts { tp: 0, tn: 5, fp: 1, fn_: 0 }).is_err());
    }
}
