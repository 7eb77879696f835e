use collider_audit::classifiers::{external_predict, logistic_gradient, logistic_loss};
use collider_audit::demo::ColliderDemo;
use collider_audit::{
    flip_protected, Attribute, AttributeKind, AuditRoles, ClassifierModel, Dataset, LogisticParams, ModelError, Record,
    Schema, TrainSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn schema() -> Schema {
    Schema::new(
        vec![
            Attribute::new("A", AttributeKind::Binary),
            Attribute::new("X1", AttributeKind::Continuous),
            Attribute::new("X2", AttributeKind::Continuous),
            Attribute::new("C", AttributeKind::Continuous),
            Attribute::new("Y", AttributeKind::Binary),
        ],
        AuditRoles::new("A", "Y").unwrap(),
    )
    .unwrap()
}

/// `label(a, x1, x2, rng)` decides Y; C is noise unless the label uses it.
fn dataset(n: usize, seed: u64, label: impl Fn(f64, f64, f64, &mut ChaCha8Rng) -> bool) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|id| {
            let a = rng.random_range(0..2) as f64;
            let x1: f64 = rng.random_range(-2.0..2.0);
            let x2: f64 = rng.random_range(-2.0..2.0);
            let y = label(a, x1, x2, &mut rng) as u8 as f64;
            let c = y + a + rng.random_range(0.0..0.01);
            Record { id, values: vec![a, x1, x2, c, y] }
        })
        .collect();
    Dataset::new(schema(), records).unwrap()
}

fn features(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn accuracy(model: &ClassifierModel, data: &Dataset) -> f64 {
    let y = data.schema.outcome_index();
    let hits = data
        .records
        .iter()
        .filter(|r| (model.predict_proba(&data.schema, r).unwrap() >= 0.5) == (r.values[y] == 1.0))
        .count();
    hits as f64 / data.len() as f64
}

#[test]
fn logistic_separates_separable_data() {
    let rule = |_: f64, x1: f64, x2: f64, _: &mut ChaCha8Rng| x1 + 2.0 * x2 > 0.3;
    let train = dataset(400, 1, rule);
    let held_out = dataset(400, 2, rule);
    let m = ClassifierModel::train(TrainSpec::Logistic(LogisticParams::default()), &train, &features(&["X1", "X2"])).unwrap();
    assert!(accuracy(&m, &train) >= 0.95);
    assert!(accuracy(&m, &held_out) >= 0.95);
}

#[test]
fn naive_bayes_falls_back_to_prior_under_independence() {
    let data = dataset(100_000, 3, |_, _, _, rng| rng.random::<f64>() < 0.3);
    let prior = data.column("Y").unwrap().iter().sum::<f64>() / data.len() as f64;
    let m = ClassifierModel::train(TrainSpec::NaiveBayes, &data, &features(&["A", "X1", "X2"])).unwrap();
    for r in data.records.iter().take(500) {
        let p = m.predict_proba(&data.schema, r).unwrap();
        assert!((p - prior).abs() < 0.02, "p = {p}, prior = {prior}");
    }
}

#[test]
fn one_nearest_neighbour_recalls_training_labels() {
    let data = dataset(300, 4, |a, x1, _, rng| a + x1 + rng.random_range(-1.0..1.0) > 0.5);
    let m = ClassifierModel::train(TrainSpec::Knn { k: 1 }, &data, &features(&["A", "X1", "X2"])).unwrap();
    let y = data.schema.outcome_index();
    for r in &data.records {
        assert_eq!(m.predict_proba(&data.schema, r).unwrap(), r.values[y]);
    }
}

#[test]
fn training_is_deterministic() {
    let data = dataset(500, 5, |a, x1, x2, rng| a + x1 - x2 + rng.random_range(-1.0..1.0) > 0.0);
    let f = features(&["A", "X1", "X2", "C"]);
    for spec in ["lr", "nb", "knn:k=7"] {
        let spec = ClassifierModel::parse_train_spec(spec).unwrap();
        let m1 = ClassifierModel::train(spec, &data, &f).unwrap();
        let m2 = ClassifierModel::train(spec, &data, &f).unwrap();
        assert_eq!(m1, m2);
    }
}

#[test]
fn models_without_the_collider_ignore_it() {
    let data = dataset(500, 6, |a, x1, _, rng| a + x1 + rng.random_range(-1.0..1.0) > 0.5);
    let c = data.schema.require("C").unwrap();
    for spec in ["lr", "nb", "knn"] {
        let m = ClassifierModel::train(ClassifierModel::parse_train_spec(spec).unwrap(), &data, &features(&["A", "X1", "X2"])).unwrap();
        for r in data.records.iter().take(50) {
            let base = m.predict_proba(&data.schema, r).unwrap();
            for v in [-10.0, 0.0, 1.5, 42.0] {
                assert_eq!(m.predict_proba(&data.schema, &r.with_value(c, v)).unwrap(), base);
            }
        }
    }
}

#[test]
fn logistic_gradient_vanishes_at_the_fit() {
    let data = dataset(50, 7, |a, x1, x2, rng| 0.5 * a + x1 - 0.5 * x2 + rng.random_range(-1.5..1.5) > 0.0);
    let f = features(&["A", "X1", "X2"]);
    let params = LogisticParams::default();
    let m = ClassifierModel::train(TrainSpec::Logistic(params), &data, &f).unwrap();
    let lr = m.as_logistic().unwrap();
    let raw: Vec<Vec<f64>> = data.records.iter().map(|r| m.features_of(&data.schema, r).unwrap()).collect();
    let rows = lr.design_rows(&raw).unwrap();
    let labels = data.column("Y").unwrap();
    let g = logistic_gradient(&lr.weights, lr.bias, &rows, &labels, params.l2);
    let max_norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(max_norm < 1e-4, "gradient max-norm {max_norm}");

    // Central differences of the loss against the analytic gradient.
    let h = 1e-6;
    for j in 0..=lr.weights.len() {
        let loss_at = |delta: f64| {
            let mut w = lr.weights.clone();
            let mut b = lr.bias;
            if j < w.len() {
                w[j] += delta;
            } else {
                b += delta;
            }
            logistic_loss(&w, b, &rows, &labels, params.l2)
        };
        let numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
        assert!((numeric - g[j]).abs() < 1e-5, "component {j}: {numeric} vs {}", g[j]);
    }
}

#[test]
fn lookup_returns_the_table_cell() {
    let demo = ColliderDemo::build(20, 1).unwrap();
    let s = &demo.test.schema;
    let race = s.require("Race").unwrap();
    let suburb = s.require("Suburb").unwrap();
    let scm = &demo.scm;
    let (r, b, y) = (scm.node("Race").unwrap(), scm.node("Suburb").unwrap(), scm.node("Salary").unwrap());
    let none = vec![None; scm.dag().len()];
    for rec in &demo.test.records {
        let (rv, bv) = (rec.values[race] as usize, rec.values[suburb] as usize);
        let exact = scm.probability((y, 1), &[(r, rv), (b, bv)], &none).unwrap();
        assert!((demo.classifier.predict_proba(s, rec).unwrap() - exact).abs() < 1e-15);
    }
}

#[test]
fn flip_keeps_id_and_other_fields() {
    let data = dataset(10, 8, |_, x1, _, _| x1 > 0.0);
    let a = data.schema.protected_index();
    for r in &data.records {
        let f = flip_protected(r, &data.schema);
        assert_eq!(f.id, r.id);
        assert_eq!(f.values[a], 1.0 - r.values[a]);
        for j in (0..r.values.len()).filter(|&j| j != a) {
            assert_eq!(f.values[j], r.values[j]);
        }
        assert_eq!(flip_protected(&f, &data.schema), *r);
    }
}

#[test]
fn external_stub_protocol() {
    let data = dataset(3, 9, |_, x1, _, _| x1 > 0.0);
    let f = features(&["A", "X1"]);
    let probs = external_predict("awk 'NR > 1 { print 0.5 }'", &data.schema, &f, &data.records).unwrap();
    assert_eq!(probs, vec![0.5, 0.5, 0.5]);

    let err = external_predict("cat > /dev/null; echo model exploded >&2; exit 3", &data.schema, &f, &data.records)
        .unwrap_err();
    match err {
        ModelError::External(msg) => assert!(msg.contains("model exploded"), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }

    let err = external_predict("cat > /dev/null; printf '0.1\\n0.2\\n'", &data.schema, &f, &data.records).unwrap_err();
    assert!(matches!(err, ModelError::CountMismatch { expected: 3, got: 2 }), "{err:?}");

    let err = external_predict("cat > /dev/null; printf '0.1\\n1.5\\n0.2\\n'", &data.schema, &f, &data.records).unwrap_err();
    assert!(matches!(err, ModelError::OutOfRange(..)), "{err:?}");
}

#[test]
fn external_sees_features_in_order() {
    let data = dataset(4, 10, |_, x1, _, _| x1 > 0.0);
    // Echo back the protected attribute as the probability.
    let probs =
        external_predict("awk -F, 'NR == 1 { if ($1 != \"A\") exit 1; next } { print $1 }'", &data.schema, &features(&["A", "X2"]), &data.records)
            .unwrap();
    let a = data.schema.protected_index();
    assert_eq!(probs, data.records.iter().map(|r| r.values[a]).collect::<Vec<_>>());
}

proptest! {
    #[test]
    fn logistic_outputs_are_probabilities(w in proptest::collection::vec(-50.0f64..50.0, 3), bias in -50.0f64..50.0, x in proptest::collection::vec(-100.0f64..100.0, 2), a in 0u8..2) {
        let s = schema();
        let attrs = ["A", "X1", "X2"].iter().map(|n| s.attribute(n).unwrap().clone()).collect();
        let m = ClassifierModel::logistic(collider_audit::classifiers::LogisticModel::from_parameters(attrs, w, bias).unwrap());
        let p = m.predict_row(&[a as f64, x[0], x[1]]).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
