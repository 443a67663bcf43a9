use glycosim_core::analysis::{
    anova_oneway, biological_peak, bonferroni, classify, reclassify_outliers, GlucoseCurve, GroupLabel,
};
use glycosim_core::dataset::{parse_subject, Sample, SubjectRecord};
use glycosim_core::integrator::{integrate, TimeGrid};
use glycosim_core::model::{
    gastric_emptying_rate, DoseProfile, EstimatedParameters, FixedParameters, Model, ModelOptions, ParameterBounds,
};
use proptest::prelude::*;

fn theta_in_box() -> impl Strategy<Value = EstimatedParameters<f64>> {
    let b = ParameterBounds::<f64>::default();
    let (lo, hi) = (b.lower.to_array(), b.upper.to_array());
    let ranges: Vec<_> = (0..11).map(|i| lo[i]..=hi[i]).collect();
    ranges.prop_map(|v| EstimatedParameters::from_array(v.try_into().unwrap()))
}

fn label() -> impl Strategy<Value = GroupLabel> {
    prop_oneof![
        Just(GroupLabel::Group1),
        Just(GroupLabel::Group2),
        Just(GroupLabel::Group3),
        Just(GroupLabel::Outlier)
    ]
}

fn curve() -> impl Strategy<Value = GlucoseCurve> {
    prop::collection::vec(60.0..250.0f64, 2..60)
        .prop_map(|g| GlucoseCurve::new((0..g.len()).map(|k| 2.5 * k as f64).collect(), g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emptying_rate_stays_between_its_limits(theta in theta_in_box(), frac in 0.0..=1.0f64) {
        let dose = 50000.0;
        let k = gastric_emptying_rate(frac * dose, &theta, dose);
        prop_assert!(k >= theta.k_min - 1e-9 && k <= theta.k_max + 1e-9);
    }

    #[test]
    fn emptying_rate_is_halfway_at_both_anchors(theta in theta_in_box()) {
        let dose = 50000.0;
        let mid = 0.5 * (theta.k_min + theta.k_max);
        let tol = 1e-3 * (theta.k_max - theta.k_min);
        prop_assert!((gastric_emptying_rate(theta.b * dose, &theta, dose) - mid).abs() <= tol);
        prop_assert!((gastric_emptying_rate(theta.d * dose, &theta, dose) - mid).abs() <= tol);
    }

    #[test]
    fn basal_state_is_held_without_a_meal(theta in theta_in_box(), gb in 60.0..130.0f64) {
        let fixed = FixedParameters { dose: 0.0, ..FixedParameters::default() };
        let options = ModelOptions { basal_consistency: true, ..ModelOptions::default() };
        let model = Model::new(fixed, theta, gb, DoseProfile::instantaneous(0.0), options).unwrap();
        let g = integrate(&model, &TimeGrid::default()).unwrap().glucose();
        prop_assert!(g.iter().all(|v| (v - gb).abs() <= 1e-6));
    }

    #[test]
    fn subject_csv_round_trips(
        id in "[a-z][a-z0-9_]{0,11}",
        steps in prop::collection::vec(0.01..30.0f64, 1..20),
        glucose in prop::collection::vec(20.0..400.0f64, 20),
    ) {
        let mut t = 0.0;
        let mut samples = vec![Sample { t, glucose: glucose[0] }];
        for (dt, g) in steps.iter().zip(&glucose[1..]) {
            t += dt;
            samples.push(Sample { t, glucose: *g });
        }
        let record = SubjectRecord::new(id.as_str(), samples).unwrap();
        let mut buf = Vec::new();
        record.write_csv(&mut buf).unwrap();
        let back = parse_subject(buf.as_slice(), "unused").unwrap();
        prop_assert_eq!(back, record);
    }

    #[test]
    fn biological_peak_time_shrinks_as_tolerance_grows(c in curve(), a in 0.0..20.0f64, b in 0.0..20.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(biological_peak(&c, hi).0 <= biological_peak(&c, lo).0);
    }

    #[test]
    fn reclassification_only_promotes_outliers(
        items in prop::collection::vec((label(), curve()), 1..12),
        tol in 0.0..10.0f64,
    ) {
        let (labels, curves): (Vec<GroupLabel>, Vec<GlucoseCurve>) = items.into_iter().unzip();
        let out = reclassify_outliers(&labels, &curves, tol);
        for (before, after) in labels.iter().zip(&out) {
            if *before == GroupLabel::Outlier {
                prop_assert!(matches!(after, GroupLabel::Outlier | GroupLabel::Group1));
            } else {
                prop_assert_eq!(before, after);
            }
        }
        // a second pass changes nothing
        prop_assert_eq!(reclassify_outliers(&out, &curves, tol), out);
    }

    #[test]
    fn anova_ignores_shift_and_scale(
        groups in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 2..8), 2..5),
        shift in -1000.0..1000.0f64,
        scale in 0.01..100.0f64,
    ) {
        let base = anova_oneway(&groups).unwrap();
        let moved: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|v| scale * v + shift).collect()).collect();
        let other = anova_oneway(&moved).unwrap();
        prop_assert!((base.f - other.f).abs() <= 1e-6 * base.f.max(1.0));
        prop_assert!((base.p - other.p).abs() <= 1e-8);
    }

    #[test]
    fn bonferroni_is_monotone_and_clamped(
        mut p in prop::collection::vec(0.0..=1.0f64, 1..20),
        extra in 0usize..10,
    ) {
        p.sort_by(f64::total_cmp);
        let m = p.len() + extra;
        let adj = bonferroni(&p, m);
        for (raw, (a, _)) in p.iter().zip(&adj) {
            prop_assert!(*a <= 1.0 && *a >= *raw);
        }
        for w in adj.windows(2) {
            prop_assert!(w[0].0 <= w[1].0);
            prop_assert!(w[0].1.len() >= w[1].1.len());
        }
    }
}

#[test]
fn classify_is_a_step_function_with_two_breakpoints() {
    let mut changes = Vec::new();
    let mut prev = classify(0.0);
    for k in 1..=200_000 {
        let t = k as f64 * 0.001;
        let cur = classify(t);
        if cur != prev {
            changes.push((t, cur));
        }
        assert_ne!(cur, GroupLabel::Outlier);
        prev = cur;
    }
    assert_eq!(changes.len(), 2);
    assert_eq!(changes[0].1, GroupLabel::Group2);
    assert!((changes[0].0 - 30.0).abs() < 1e-9);
    assert_eq!(changes[1].1, GroupLabel::Group3);
    assert!((changes[1].0 - 50.001).abs() < 1e-9);
}
