//! ROC metrics against brute-force oracles that share no code with the
//! implementation: pair counting, a dense threshold grid and an exhaustive
//! threshold scan.

use agefair_core::evaluation::{auc, eer, pauc, roc_curve, EvalConfig, PaucNormalization};
use agefair_core::Label;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair_count_auc(scores: &[f64], labels: &[Label]) -> f64 {
    let (mut credit, mut pairs) = (0.0, 0.0);
    for (i, li) in labels.iter().enumerate() {
        for (j, lj) in labels.iter().enumerate() {
            if *li == Label::Fake && *lj == Label::Real {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    credit += 1.0;
                } else if scores[i] == scores[j] {
                    credit += 0.5;
                }
            }
        }
    }
    credit / pairs
}

/// (fpr, tpr) when predicting fake for every score >= threshold.
fn rates_at(scores: &[f64], labels: &[Label], threshold: f64) -> (f64, f64) {
    let (mut tp, mut fp, mut p, mut n) = (0.0, 0.0, 0.0, 0.0);
    for (s, l) in scores.iter().zip(labels) {
        let hit = *s >= threshold;
        if *l == Label::Fake {
            p += 1.0;
            if hit {
                tp += 1.0;
            }
        } else {
            n += 1.0;
            if hit {
                fp += 1.0;
            }
        }
    }
    (fp / n, tp / p)
}

/// Trapezoidal area over fpr <= max_fpr from a uniform grid of thresholds.
fn grid_partial_area(scores: &[f64], labels: &[Label], max_fpr: f64, steps: usize) -> f64 {
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1e-3;
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min) - 1e-3;
    let mut area = 0.0;
    let mut prev = rates_at(scores, labels, f64::INFINITY);
    for k in 0..=steps {
        let t = hi - (hi - lo) * k as f64 / steps as f64;
        let cur = rates_at(scores, labels, t);
        if cur == prev {
            continue;
        }
        let ((x0, y0), (x1, y1)) = (prev, cur);
        if x0 < max_fpr {
            let x_end = x1.min(max_fpr);
            let y_end = if x1 > max_fpr { y0 + (y1 - y0) * (max_fpr - x0) / (x1 - x0) } else { y1 };
            area += (x_end - x0) * (y0 + y_end) / 2.0;
        }
        prev = cur;
    }
    area
}

/// Scan every distinct score as a threshold, then solve for fpr == fnr on
/// the bracketing segment.
fn scan_eer(scores: &[f64], labels: &[Label]) -> f64 {
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.push(f64::INFINITY);
    thresholds.push(f64::NEG_INFINITY);
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let pts: Vec<(f64, f64)> = thresholds.iter().map(|&t| rates_at(scores, labels, t)).collect();
    for w in pts.windows(2) {
        let (f0, t0) = w[0];
        let (f1, t1) = w[1];
        let d0 = f0 - (1.0 - t0);
        let d1 = f1 - (1.0 - t1);
        if d0 == 0.0 {
            return f0;
        }
        if d0 < 0.0 && d1 >= 0.0 {
            return f0 + (f1 - f0) * (-d0) / (d1 - d0);
        }
    }
    unreachable!("curve ends at (1, 1)")
}

/// Scores on a 1/20 lattice (so ties are common and every gap is far wider
/// than the threshold grid) with both classes present.
fn random_case(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Label>) {
    loop {
        let n = rng.gen_range(2..=30);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=20) as f64 / 20.0).collect();
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { Label::Fake } else { Label::Real })
            .collect();
        if labels.contains(&Label::Fake) && labels.contains(&Label::Real) {
            return (scores, labels);
        }
    }
}

#[test]
fn auc_matches_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (s, l) = random_case(&mut rng);
        assert!((auc(&s, &l).unwrap() - pair_count_auc(&s, &l)).abs() < 1e-9);
    }
}

#[test]
fn pauc_matches_threshold_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..50 {
        let (s, l) = random_case(&mut rng);
        let max_fpr = [0.1, 0.25, 0.5, 1.0][case % 4];
        let raw_cfg = EvalConfig { max_fpr, pauc_normalization: PaucNormalization::None };
        let oracle = grid_partial_area(&s, &l, max_fpr, 20_000);
        assert!((pauc(&s, &l, &raw_cfg).unwrap() - oracle).abs() < 1e-9, "case {case}");
    }
}

#[test]
fn eer_matches_threshold_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let (s, l) = random_case(&mut rng);
        assert!((eer(&s, &l).unwrap() - scan_eer(&s, &l)).abs() < 1e-9);
    }
}

#[test]
fn roc_vertices_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let (s, l) = random_case(&mut rng);
        let roc = roc_curve(&s, &l).unwrap();
        assert_eq!(roc.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.last(), Some(&(1.0, 1.0)));
        assert!(roc.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }
}

fn case_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<Label>)> {
    prop::collection::vec((0u8..=40, any::<bool>()), 2..30)
        .prop_filter("both classes", |v| v.iter().any(|x| x.1) && v.iter().any(|x| !x.1))
        .prop_map(|v| {
            let scores = v.iter().map(|x| f64::from(x.0) / 40.0 - 0.3).collect();
            let labels = v.iter().map(|x| if x.1 { Label::Fake } else { Label::Real }).collect();
            (scores, labels)
        })
}

proptest! {
    #[test]
    fn metrics_invariant_under_monotone_transform((s, l) in case_strategy()) {
        let t: Vec<f64> = s.iter().map(|x| (3.0 * x).exp() + 7.0).collect();
        let cfg = EvalConfig::default();
        prop_assert!((auc(&s, &l).unwrap() - auc(&t, &l).unwrap()).abs() < 1e-12);
        prop_assert!((pauc(&s, &l, &cfg).unwrap() - pauc(&t, &l, &cfg).unwrap()).abs() < 1e-12);
        prop_assert!((eer(&s, &l).unwrap() - eer(&t, &l).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn flipped_labels_complement_auc((s, l) in case_strategy()) {
        let flipped: Vec<Label> = l.iter().map(|x| if *x == Label::Fake { Label::Real } else { Label::Fake }).collect();
        prop_assert!((auc(&s, &l).unwrap() + auc(&s, &flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauc_bounds((s, l) in case_strategy(), max_fpr in 0.01f64..1.0) {
        let raw = pauc(&s, &l, &EvalConfig { max_fpr, pauc_normalization: PaucNormalization::None }).unwrap();
        let norm = pauc(&s, &l, &EvalConfig { max_fpr, pauc_normalization: PaucNormalization::Width }).unwrap();
        prop_assert!(raw <= max_fpr + 1e-12);
        prop_assert!(norm <= 1.0 + 1e-12);
        let full = pauc(&s, &l, &EvalConfig { max_fpr: 1.0, pauc_normalization: PaucNormalization::Width }).unwrap();
        prop_assert!((full - auc(&s, &l).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn eer_continuous_under_small_perturbation((s, l) in case_strategy(), seed in any::<u64>()) {
        // Distinct scores only, so a perturbation below the minimum gap
        // cannot reorder anything.
        let mut distinct: Vec<f64> = (0..s.len()).map(|i| i as f64 / s.len() as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..distinct.len()).rev() {
            distinct.swap(i, rng.gen_range(0..=i));
        }
        let gap = 1.0 / s.len() as f64;
        let nudged: Vec<f64> = distinct.iter().map(|x| x + rng.gen_range(-0.4..0.4) * gap).collect();
        prop_assert!((eer(&distinct, &l).unwrap() - eer(&nudged, &l).unwrap()).abs() < 1e-12);
    }
}
