mod common;

use common::rng;
use deptrigger::combiner::{loss_and_gradient, train, TrainParams};
use deptrigger::eval::{
    average_precision, reciprocal_rank, triggering_report, tune_threshold, ScoredGroup,
};
use deptrigger::{FeatureVector, Label};
use proptest::prelude::*;
use rand::Rng;

fn random_rows(r: &mut impl Rng, n: usize, dim: usize) -> (Vec<FeatureVector>, Vec<Label>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let x: Vec<f64> = (0..dim).map(|_| r.gen_range(-2.0..2.0)).collect();
        let noisy = x[0] - 0.5 * x[1 % dim] + r.gen_range(-1.0..1.0);
        rows.push(FeatureVector::new(x));
        // Alternate the first two labels so both classes always appear.
        labels.push(match i {
            0 => Label::Positive,
            1 => Label::Negative,
            _ if noisy > 0.0 => Label::Positive,
            _ => Label::Negative,
        });
    }
    (rows, labels)
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let mut r = rng(3);
    let dim = 4;
    let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..dim).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
    let y: Vec<f64> = (0..30).map(|_| r.gen_range(0..2) as f64).collect();
    let l2 = 1e-2;
    let h = 1e-6;
    for _ in 0..20 {
        let w: Vec<f64> = (0..dim).map(|_| r.gen_range(-3.0..3.0)).collect();
        let b = r.gen_range(-1.0..1.0);
        let (_, gw, gb) = loss_and_gradient(&w, b, &rows, &y, l2);
        let rel = |analytic: f64, numeric: f64| (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
        for k in 0..dim {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[k] += h;
            minus[k] -= h;
            let numeric = (loss_and_gradient(&plus, b, &rows, &y, l2).0
                - loss_and_gradient(&minus, b, &rows, &y, l2).0)
                / (2.0 * h);
            assert!(rel(gw[k], numeric) < 1e-5, "w[{k}]: {} vs {numeric}", gw[k]);
        }
        let numeric = (loss_and_gradient(&w, b + h, &rows, &y, l2).0
            - loss_and_gradient(&w, b - h, &rows, &y, l2).0)
            / (2.0 * h);
        assert!(rel(gb, numeric) < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_feature_rescaling_leaves_predictions(seed in any::<u64>(), scale in 0.1f64..50.0, shift in -10.0f64..10.0, flip in any::<bool>()) {
        let mut r = rng(seed);
        let (rows, labels) = random_rows(&mut r, 25, 3);
        let a = if flip { -scale } else { scale };
        let moved: Vec<FeatureVector> = rows
            .iter()
            .map(|x| {
                let mut v = x.values.clone();
                v[0] = a * v[0] + shift;
                FeatureVector::new(v)
            })
            .collect();
        let names: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let p = TrainParams::default();
        let m1 = train(&rows, &labels, &names, &p, 0.5).unwrap().model;
        let m2 = train(&moved, &labels, &names, &p, 0.5).unwrap().model;
        for (x, y) in rows.iter().zip(&moved) {
            let d = (m1.probability(x).unwrap() - m2.probability(y).unwrap()).abs();
            prop_assert!(d < 1e-9, "difference {}", d);
        }
    }

    #[test]
    fn metric_ranges_and_threshold_monotonicity(seed in any::<u64>(), t1 in -0.5f64..1.5, dt in 0.0f64..1.0) {
        let groups = random_groups(&mut rng(seed), 8);
        let lo = triggering_report(&groups, t1);
        let hi = triggering_report(&groups, t1 + dt);
        for rep in [&lo, &hi] {
            prop_assert!((0.0..=1.0).contains(&rep.map_value) && (0.0..=1.0).contains(&rep.mrr_value));
            for v in [rep.precision, rep.recall, rep.f1] {
                prop_assert!((0.0..=100.0).contains(&v));
            }
        }
        prop_assert!(hi.counts.questions_triggered <= lo.counts.questions_triggered);
    }

    #[test]
    fn monotone_transform_keeps_metrics(seed in any::<u64>(), t in 0.0f64..1.0) {
        let groups = random_groups(&mut rng(seed), 8);
        let f = |s: f64| (3.0 * s).exp() - 2.0;
        let moved: Vec<ScoredGroup> = groups
            .iter()
            .map(|g| ScoredGroup::new(
                g.question_id.clone(),
                g.candidates.iter().map(|(id, s, l)| (id.clone(), f(*s), *l)).collect(),
            ))
            .collect();
        for (g, h) in groups.iter().zip(&moved) {
            prop_assert_eq!(average_precision(g), average_precision(h));
            prop_assert_eq!(reciprocal_rank(g), reciprocal_rank(h));
        }
        let a = triggering_report(&groups, t);
        let b = triggering_report(&moved, f(t));
        prop_assert_eq!(a.counts, b.counts);
        prop_assert_eq!((a.map_value, a.mrr_value, a.f1), (b.map_value, b.mrr_value, b.f1));
    }

    #[test]
    fn tuning_matches_exhaustive_sweep(seed in any::<u64>()) {
        let groups = random_groups(&mut rng(seed), 6);
        prop_assume!(groups.iter().any(ScoredGroup::is_answerable));
        let (t, f1) = tune_threshold(&groups).unwrap();
        let mut best = 0.0f64;
        for g in &groups {
            for (_, s, _) in &g.candidates {
                for probe in [s - 1e-9, *s, s + 1e-9] {
                    best = best.max(triggering_report(&groups, probe).f1);
                }
            }
        }
        prop_assert_eq!(f1, best);
        prop_assert_eq!(triggering_report(&groups, t).f1, f1);
    }
}

/// Scores on a 1/8 grid so ties happen.
fn random_groups(r: &mut impl Rng, n: usize) -> Vec<ScoredGroup> {
    (0..n)
        .map(|i| {
            let k = r.gen_range(1..=5);
            let scored: Vec<(f64, Label)> = (0..k)
                .map(|_| {
                    let label = if r.gen_ratio(1, 3) { Label::Positive } else { Label::Negative };
                    (r.gen_range(0..=8) as f64 / 8.0, label)
                })
                .collect();
            ScoredGroup::from_scores(format!("q{i}"), &scored)
        })
        .collect()
}
