//! Linear-Gaussian data generation for a graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dataset::{Column, Dataset};
use super::CiTestError;
use crate::graph::CausalGraph;

/// Samples `rows` rows from a linear SEM faithful to `g` in general.
///
/// Each directed edge gets a coefficient drawn uniformly from
/// `±[0.5, 1.5]`; each bidirected edge becomes an unobserved standard-normal
/// common cause with its own pair of coefficients. Every column is
/// standardised once generated, which only rescales the model. Latent nodes
/// are simulated but not returned.
pub fn simulate_linear_gaussian(g: &CausalGraph, rows: usize, seed: u64) -> Result<Dataset, CiTestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef = |rng: &mut ChaCha8Rng| {
        let m: f64 = rng.random_range(0.5..1.5);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let n = g.node_count();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut confounders: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    let bidirected = g.bidirected_edges();
    for _ in &bidirected {
        let a = coef(&mut rng);
        let b = coef(&mut rng);
        let u = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
        confounders.push((a, b, u));
    }
    for v in topological(g) {
        let mut col: Vec<f64> = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
        for &p in g.parents_of(v) {
            let beta = coef(&mut rng);
            for (c, x) in col.iter_mut().zip(&values[p]) {
                *c += beta * x;
            }
        }
        for (k, &(a, b)) in bidirected.iter().enumerate() {
            let (ca, cb, u) = &confounders[k];
            let gamma = if a == v {
                *ca
            } else if b == v {
                *cb
            } else {
                continue;
            };
            for (c, x) in col.iter_mut().zip(u) {
                *c += gamma * x;
            }
        }
        standardize(&mut col);
        values[v] = col;
    }
    let pairs = (0..n)
        .filter(|&v| !g.is_latent(v))
        .map(|v| (g.name(v).to_string(), Column::Continuous(std::mem::take(&mut values[v]))))
        .collect();
    Dataset::from_columns(pairs)
}

fn standardize(col: &mut [f64]) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        col.iter_mut().for_each(|x| *x = (*x - mean) / sd);
    }
}

fn topological(g: &CausalGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut indegree: Vec<usize> = (0..n).map(|v| g.parents_of(v).len()).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).rev().collect();
    let mut out = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        out.push(v);
        for &c in g.children_of(v) {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    out
}
