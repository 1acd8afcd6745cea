use proptest::prelude::*;
use roadgnn::eval::{build_dataset, error_histogram, metrics, DatasetSpec};
use roadgnn::par::ExecMode;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn metric_ranges(pairs in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), 1..200)) {
        let (t, p): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let m = metrics(&t, &p).unwrap();
        prop_assert!(m.mae >= 0.0);
        prop_assert!(m.mape >= 0.0 || m.mape.is_nan());
        prop_assert!(m.pearson.is_nan() || (-1.0 - 1e-12..=1.0 + 1e-12).contains(&m.pearson));
        prop_assert_eq!(m.n, pairs.len());
        let h = error_histogram(&pairs);
        prop_assert_eq!(h.iter().map(|b| b.2).sum::<usize>(), t.iter().filter(|&&x| x > 0.0).count());
    }

    #[test]
    fn perfect_predictions_score_zero(t in prop::collection::vec(0.1..100.0f64, 2..100)) {
        let m = metrics(&t, &t).unwrap();
        prop_assert_eq!((m.mae, m.mape), (0.0, 0.0));
    }

    #[test]
    fn mape_is_scale_invariant(pairs in prop::collection::vec((0.1..100.0f64, 0.0..100.0f64), 1..50), k in 0.01..100.0f64) {
        let (t, p): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let a = metrics(&t, &p).unwrap();
        let ts: Vec<f64> = t.iter().map(|x| x * k).collect();
        let ps: Vec<f64> = p.iter().map(|x| x * k).collect();
        let b = metrics(&ts, &ps).unwrap();
        prop_assert!((a.mape - b.mape).abs() <= 1e-9 * a.mape.max(1.0));
    }
}

#[test]
fn dataset_is_reproducible_and_disjoint() {
    let spec = DatasetSpec {
        preset: "1k".into(),
        train_topologies: 2,
        test_topologies: 1,
        train_samples: 30,
        test_samples: 7,
        batch_size: 8,
        seed: 12,
    };
    let a = build_dataset(&spec, ExecMode::Parallel).unwrap();
    let b = build_dataset(&spec, ExecMode::Sequential).unwrap();
    assert_eq!(a.manifest(), b.manifest());
    assert_eq!(a.graphs, b.graphs);
    assert_eq!(a.train.len(), 30);
    assert_eq!(a.test.len(), 7);
    assert!(a.train.iter().all(|s| s.topology < 2));
    assert!(a.test.iter().all(|s| s.topology == 2));
    assert_eq!(a.train_graphs().len(), 2);

    let dir = tempfile::tempdir().unwrap();
    a.save(dir.path()).unwrap();
    let c = roadgnn::eval::Dataset::load(dir.path(), ExecMode::default()).unwrap();
    assert_eq!(c.manifest(), a.manifest());
    // Stored coordinates carry 9 significant digits, so labels are recomputed on the reloaded graphs.
    for (x, y) in c.train.iter().chain(&c.test).zip(a.train.iter().chain(&a.test)) {
        assert_eq!((x.topology, x.source), (y.topology, y.source));
        let exact = roadgnn::oracle::dijkstra(&c.graphs[x.topology], x.source).unwrap().dist;
        assert_eq!(x.dist, exact);
        for (u, v) in x.dist.iter().zip(&y.dist) {
            assert!((u - v).abs() <= 1e-7 * v.max(1.0));
        }
    }

    let other = build_dataset(&DatasetSpec { seed: 13, ..spec }, ExecMode::default()).unwrap();
    assert_ne!(other.manifest(), a.manifest());
}
