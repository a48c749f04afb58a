use gbtsvm_core::dataset::{generate_ndc, Dataset, DatasetMeta, Label};
use gbtsvm_core::feature_map::{Activation, FeatureSpace, RandomLayer};
use gbtsvm_core::granular_ball::{generate_granular_balls, two_means, GranularBallSet};
use gbtsvm_core::model::{fit, fit_twin, ModelConfig};
use gbtsvm_core::qp::SolverOptions;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dataset_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (
            proptest::collection::vec(-3i32..=3, n * m),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(cells, flags)| {
                // coarse integer grid so duplicate rows occur
                let x = DMatrix::from_row_iterator(n, m, cells.into_iter().map(f64::from));
                let labels = flags.into_iter().map(|b| if b { Label::Pos } else { Label::Neg }).collect();
                Dataset::new(x, labels, DatasetMeta::default()).unwrap()
            })
    })
}

fn assert_certificates(d: &Dataset, g: &GranularBallSet) {
    let mut seen = vec![0usize; d.n()];
    for ball in &g.balls {
        for &i in &ball.members {
            seen[i] += 1;
        }
        if ball.count() == 1 {
            assert_eq!(ball.purity, 1.0);
        }
        let identical = ball.members.iter().all(|&i| d.row(i) == d.row(ball.members[0]));
        assert!(ball.purity >= g.eta || identical, "purity {} < eta {}", ball.purity, g.eta);
    }
    assert!(seen.iter().all(|&c| c == 1), "not a partition");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balls_partition_and_meet_purity(d in dataset_strategy(40, 3), eta_idx in 0usize..3) {
        let eta = [0.8, 0.9, 1.0][eta_idx];
        let g = generate_granular_balls(&d, eta, 0).unwrap();
        assert_certificates(&d, &g);
    }

    #[test]
    fn raising_eta_never_reduces_ball_count(d in dataset_strategy(40, 3)) {
        let ks: Vec<usize> = [0.6, 0.75, 0.9, 1.0].iter().map(|&e| generate_granular_balls(&d, e, 3).unwrap().k()).collect();
        prop_assert!(ks.windows(2).all(|w| w[0] <= w[1]), "{:?}", ks);
    }

    #[test]
    fn granulation_is_deterministic(d in dataset_strategy(30, 3)) {
        prop_assert_eq!(generate_granular_balls(&d, 0.9, 5).unwrap(), generate_granular_balls(&d, 0.9, 5).unwrap());
    }

    #[test]
    fn enhanced_block_reproduces_input(d in dataset_strategy(20, 4), h in 1usize..12, act in 1u8..=9, seed in any::<u64>()) {
        let layer = RandomLayer::new(d.m(), h, Activation::from_index(act).unwrap(), seed).unwrap();
        let e = layer.enhanced_features(d.features()).unwrap().values;
        prop_assert_eq!(e.columns(h, d.m()).into_owned(), d.features().clone());
        prop_assert_eq!(e.columns(0, h).into_owned(), layer.hidden_features(d.features()).unwrap().values);
    }

    #[test]
    fn rescaled_normals_predict_identically(seed in 0u64..1000, factor in 1e-3f64..1e3) {
        let d = generate_ndc(60, 3, 4, 0.5, seed).unwrap();
        let cfg = ModelConfig { seed, hidden: 7, ..ModelConfig::default() };
        let Ok(m) = fit(&cfg, &d) else { return Ok(()) };
        prop_assert_eq!(m.predict(d.features()).unwrap(), m.rescaled(factor).predict(d.features()).unwrap());
    }
}

#[test]
fn blob_partition_is_exact() {
    let rows = [
        [0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.3, 0.3],
        [100.0, 100.0], [100.5, 100.0], [100.0, 100.5], [100.3, 100.3],
    ];
    let x = DMatrix::from_fn(8, 2, |i, j| rows[i][j]);
    let labels = [Label::Pos, Label::Neg, Label::Pos, Label::Neg, Label::Pos, Label::Neg, Label::Pos, Label::Neg];
    let all: Vec<usize> = (0..8).collect();
    let (mut a, mut b) = two_means(&x, &all, &labels).unwrap();
    a.sort();
    b.sort();
    // brute-force minimum within-cluster SSE over all 2-partitions
    let sse = |g: &[usize]| -> f64 {
        let c: Vec<f64> = (0..2).map(|j| g.iter().map(|&i| x[(i, j)]).sum::<f64>() / g.len() as f64).collect();
        g.iter().map(|&i| (0..2).map(|j| (x[(i, j)] - c[j]).powi(2)).sum::<f64>()).sum()
    };
    let mut best = (f64::INFINITY, vec![]);
    for mask in 1u32..(1 << 7) {
        let g1: Vec<usize> = (0..8).filter(|&i| i < 7 && mask & (1 << i) != 0).collect();
        let g2: Vec<usize> = (0..8).filter(|i| !g1.contains(i)).collect();
        let s = sse(&g1) + sse(&g2);
        if s < best.0 {
            best = (s, g1);
        }
    }
    let mut groups = [a, b];
    groups.sort();
    let mut other: Vec<usize> = (0..8).filter(|i| !best.1.contains(i)).collect();
    other.sort();
    let mut expected = [best.1.clone(), other];
    expected.sort();
    assert_eq!(groups, expected);
    assert_eq!(groups[0], vec![0, 1, 2, 3]);
}

#[test]
fn xor_layout_gives_pure_balls() {
    let d = Dataset::from_rows(
        &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![Label::Pos, Label::Pos, Label::Neg, Label::Neg],
        DatasetMeta::default(),
    )
    .unwrap();
    let g = generate_granular_balls(&d, 1.0, 0).unwrap();
    assert!(g.balls.iter().all(|b| b.purity == 1.0));
    // coinciding class means trigger the halves fallback, which here splits by label
    assert!(g.k() <= 4);
}

#[test]
fn separable_blobs_compress() {
    let d = generate_ndc(1000, 4, 2, 3.0, 11).unwrap();
    let g = generate_granular_balls(&d, 0.9, 11).unwrap();
    assert!(g.k() <= d.n() / 10, "k = {}", g.k());
}

#[test]
fn row_permutation_keeps_center_multiset() {
    let d = generate_ndc(80, 2, 4, 0.3, 2).unwrap();
    let mut order: Vec<usize> = (0..d.n()).collect();
    order.reverse();
    order.swap(3, 40);
    let permuted = d.select_rows(&order).unwrap();
    let (a, b) = (generate_granular_balls(&d, 1.0, 0).unwrap(), generate_granular_balls(&permuted, 1.0, 0).unwrap());
    // centers are averages, so compare after rounding away summation-order noise
    let round = |g: &GranularBallSet| {
        let mut v: Vec<(Vec<i64>, Label)> =
            g.balls.iter().map(|b| (b.center.iter().map(|c| (c * 1e9).round() as i64).collect(), b.label)).collect();
        v.sort();
        v
    };
    assert_eq!(round(&a), round(&b));
}

#[test]
fn isolated_singletons_match_raw_fit() {
    // alternating labels on a line: every 2-means split isolates points until singletons remain
    let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64 * 0.1]).collect();
    let labels = (0..10).map(|i| if i % 2 == 0 { Label::Pos } else { Label::Neg }).collect();
    let d = Dataset::from_rows(&rows, labels, DatasetMeta::default()).unwrap();
    let balls = generate_granular_balls(&d, 1.0, 0).unwrap();
    assert_eq!(balls.k(), d.n());

    let tight = SolverOptions { tol: 1e-13, max_iter: 1_000_000, ..SolverOptions::default() };
    let base = ModelConfig { feature_space: FeatureSpace::Enhanced, eta: 1.0, hidden: 5, seed: 4, solver: tight, ..ModelConfig::default() };
    let gb = fit(&base, &d).unwrap();
    let raw = fit(&ModelConfig { granulate: false, ..base }, &d).unwrap();
    for (p, q) in [(gb.plane_pos(), raw.plane_pos()), (gb.plane_neg(), raw.plane_neg())] {
        for (a, b) in p.w.iter().chain([&p.b]).zip(q.w.iter().chain([&q.b])) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }
    assert_eq!(gb.predict(d.features()).unwrap(), raw.predict(d.features()).unwrap());
}

#[test]
fn label_swap_swaps_predictions() {
    for seed in 0..8 {
        let d = generate_ndc(50, 3, 4, 0.2, seed).unwrap();
        let flipped = Dataset::new(
            d.features().clone(),
            d.labels().iter().map(|l| l.flipped()).collect(),
            DatasetMeta::default(),
        )
        .unwrap();
        let cfg = ModelConfig { granulate: false, feature_space: FeatureSpace::Hidden, hidden: 6, seed, ..ModelConfig::default() };
        let (a, b) = (fit(&cfg, &d).unwrap(), fit(&cfg, &flipped).unwrap());
        let probe = generate_ndc(40, 3, 2, 0.0, seed + 100).unwrap();
        let dv = a.decision_matrix(probe.features()).unwrap();
        let (pa, pb) = (a.predict(probe.features()).unwrap(), b.predict(probe.features()).unwrap());
        for ((x, y), (dp, dn)) in pa.iter().zip(&pb).zip(dv) {
            if dp != dn {
                assert_eq!(*x, y.flipped());
            }
        }
    }
}

#[test]
fn dual_solutions_are_box_feasible() {
    let d = generate_ndc(120, 4, 4, 0.5, 9).unwrap();
    let cfg = ModelConfig { d1: 0.5, d2: 2.0, seed: 9, hidden: 11, ..ModelConfig::default() };
    let f = fit_twin(&cfg, &d).unwrap();
    assert!(f.alpha.iter().all(|&a| (0.0..=0.5).contains(&a)));
    assert!(f.gamma.iter().all(|&g| (0.0..=2.0).contains(&g)));
    assert_eq!(f.alpha.len(), f.model.diagnostics().k2);
    assert_eq!(f.gamma.len(), f.model.diagnostics().k1);
}

#[test]
fn seeded_fit_is_deterministic() {
    let d = generate_ndc(200, 5, 6, 0.5, 21).unwrap();
    let cfg = ModelConfig { seed: 21, ..ModelConfig::default() };
    assert_eq!(fit(&cfg, &d).unwrap(), fit(&cfg, &d).unwrap());
}
