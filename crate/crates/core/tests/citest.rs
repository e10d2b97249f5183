use cilist_core::citest::{
    chi_square, fisher_z, simulate_linear_gaussian, test_model, Column, Dataset, DEFAULT_MIN_EXPECTED,
};
use cilist_core::randgen::stream_seed;
use cilist_core::{testgraphs, CausalGraph, VariableOrder};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn continuous(cols: Vec<(&str, Vec<f64>)>) -> Dataset {
    Dataset::from_columns(cols.into_iter().map(|(n, v)| (n.to_string(), Column::Continuous(v))).collect()).unwrap()
}

#[test]
fn fisher_z_false_rejection_rate() {
    let reps = 1000;
    let rejected = (0..reps)
        .filter(|&k| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(2024, 0, k));
            let d = continuous(vec![("x", normals(&mut rng, 2000)), ("y", normals(&mut rng, 2000))]);
            fisher_z(&d, "x", "y", &[]).unwrap().p_value < 0.05
        })
        .count();
    let rate = rejected as f64 / f64::from(reps);
    assert!((rate - 0.05).abs() <= 0.02, "rate {rate}");
}

#[test]
fn fisher_z_symmetric_and_affine_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let z = normals(&mut rng, 500);
    let x: Vec<f64> = z.iter().zip(normals(&mut rng, 500)).map(|(a, e)| a + e).collect();
    let y: Vec<f64> = x.iter().zip(normals(&mut rng, 500)).map(|(a, e)| 0.3 * a + e).collect();
    let scaled: Vec<f64> = y.iter().map(|v| -4.0 * v + 17.0).collect();
    let zs: Vec<f64> = z.iter().map(|v| 0.01 * v - 3.0).collect();
    let d = continuous(vec![("x", x), ("y", y), ("z", z), ("ys", scaled), ("zs", zs)]);
    let base = fisher_z(&d, "x", "y", &["z"]).unwrap().statistic;
    let swapped = fisher_z(&d, "y", "x", &["z"]).unwrap().statistic;
    let affine = fisher_z(&d, "x", "ys", &["zs"]).unwrap().statistic;
    assert!((base - swapped).abs() <= 1e-9 * base.abs());
    // A negative scale flips the sign of the correlation only.
    assert!((base + affine).abs() <= 1e-9 * base.abs());
}

#[test]
fn shuffling_breaks_dependence() {
    let mut medians = Vec::new();
    for seed in 0..15 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = normals(&mut rng, 300);
        let mut y: Vec<f64> = x.iter().zip(normals(&mut rng, 300)).map(|(a, e)| a + 0.5 * e).collect();
        let d = continuous(vec![("x", x.clone()), ("y", y.clone())]);
        assert!(fisher_z(&d, "x", "y", &[]).unwrap().p_value < 1e-10);
        y.shuffle(&mut rng);
        let d = continuous(vec![("x", x), ("y", y)]);
        medians.push(fisher_z(&d, "x", "y", &[]).unwrap().p_value);
    }
    medians.sort_by(f64::total_cmp);
    assert!(medians[medians.len() / 2] > 0.2);
}

fn coin_data(x: &[u32], y: &[u32], z: &[u32]) -> Dataset {
    let col = |v: &[u32]| Column::Categorical { codes: v.to_vec(), levels: vec!["0".into(), "1".into()] };
    Dataset::from_columns(vec![("x".into(), col(x)), ("y".into(), col(y)), ("z".into(), col(z))]).unwrap()
}

#[test]
fn chi_square_calibration_and_power() {
    let reps = 400;
    let mut false_rejections = 0;
    let mut detected = 0;
    for k in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(77, 1, k));
        let n = 2000;
        let x: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let y: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let z: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
        if chi_square(&coin_data(&x, &y, &z), "x", &["y"], &[], DEFAULT_MIN_EXPECTED).unwrap().p_value < 0.05 {
            false_rejections += 1;
        }
        // y depends on x only through an XOR with z, plus 20% noise.
        let noisy: Vec<u32> = x.iter().zip(&z).map(|(a, b)| (a ^ b) ^ u32::from(rng.random_bool(0.2))).collect();
        if chi_square(&coin_data(&x, &noisy, &z), "x", &["y"], &["z"], DEFAULT_MIN_EXPECTED).unwrap().p_value < 0.05 {
            detected += 1;
        }
    }
    let rate = f64::from(false_rejections) / f64::from(reps);
    assert!((rate - 0.05).abs() <= 0.03, "rate {rate}");
    assert!(f64::from(detected) / f64::from(reps) > 0.9);
}

#[test]
fn faithful_sem_false_violation_rate() {
    let f = testgraphs::sachs();
    let order = f.order.unwrap();
    let (mut violated, mut tested) = (0, 0);
    for seed in 0..60 {
        let d = simulate_linear_gaussian(&f.graph, 5000, stream_seed(5, 2, seed)).unwrap();
        let report = test_model(&f.graph, &order, &d, 0.05).unwrap();
        assert_eq!(report.errors(), 0);
        violated += report.violations();
        tested += report.tested();
    }
    let rate = violated as f64 / tested as f64;
    assert!((rate - 0.05).abs() <= 0.03, "rate {rate} over {tested} tests");
}

#[test]
fn wrong_model_is_flagged() {
    // Data from a complete DAG over the same order violates every statement.
    let f = testgraphs::sachs();
    let order = f.order.clone().unwrap();
    let names: Vec<&str> = order.sequence().iter().map(|&v| f.graph.name(v)).collect();
    let edges: Vec<(&str, &str)> = (0..names.len())
        .flat_map(|i| (i + 1..names.len()).map(move |j| (i, j)))
        .map(|(i, j)| (names[i], names[j]))
        .collect();
    let dense = CausalGraph::from_edges(&names, &edges, &[]).unwrap();
    let d = simulate_linear_gaussian(&dense, 3000, 12).unwrap();
    let report = test_model(&f.graph, &order, &d, 0.05).unwrap();
    assert!(report.violations() >= 8, "{}", report.render_text(&f.graph));
    let o = VariableOrder::from_names(&f.graph, &names).unwrap();
    assert_eq!(test_model(&f.graph, &o, &d, 0.05).unwrap().entries.len(), 10);
}
