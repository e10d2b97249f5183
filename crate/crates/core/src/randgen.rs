//! Seeded random semi-Markovian graphs.
//!
//! Nodes `V1..Vn` are in a fixed order and directed edges only point
//! forward, so every sample is acyclic without rejection.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, GraphBuilder};

/// Written into benchmark output so runs can be reproduced elsewhere.
pub const PRNG_DESCRIPTION: &str =
    "ChaCha8Rng (rand_chacha 0.9) seeded via SeedableRng::seed_from_u64; run seed = splitmix64(base ^ splitmix64(cell << 32 | sample))";

/// `G(n, pd, pb)`: each slot `i < j` independently gets `Vi -> Vj` with
/// probability `pd` and `Vi <-> Vj` with probability `pb`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomGraphSpec {
    pub n: usize,
    pub pd: f64,
    pub pb: f64,
    pub seed: u64,
}

impl RandomGraphSpec {
    pub fn new(n: usize, pd: f64, pb: f64, seed: u64) -> Result<Self> {
        let spec = Self { n, pd, pb, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        check_probability("pd", self.pd)?;
        check_probability("pb", self.pb)
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} = {p} is not a probability")))
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-run seed for sample `sample` of grid cell `cell`.
pub fn stream_seed(base: u64, cell: u32, sample: u32) -> u64 {
    splitmix64(base ^ splitmix64((u64::from(cell) << 32) | u64::from(sample)))
}

fn nodes(n: usize) -> GraphBuilder {
    let mut b = GraphBuilder::new();
    for i in 1..=n {
        b.add_node(&format!("V{i}")).expect("distinct names");
    }
    b
}

pub fn random_graph(spec: &RandomGraphSpec) -> Result<CausalGraph> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let mut b = nodes(spec.n);
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            if rng.random_bool(spec.pd) {
                b.add_directed(i, j)?;
            }
            if rng.random_bool(spec.pb) {
                b.add_bidirected(i, j)?;
            }
        }
    }
    Ok(b.build())
}

/// Exactly `md` directed edges chosen uniformly among the `n(n-1)/2`
/// forward slots, then bidirected edges Bernoulli(`pb`) per slot.
pub fn random_graph_fixed_md(n: usize, md: usize, pb: f64, seed: u64) -> Result<CausalGraph> {
    RandomGraphSpec::new(n, 0.0, pb, seed)?;
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    if md > slots.len() {
        return Err(Error::Precondition(format!("{md} directed edges do not fit in {n} nodes")));
    }
    let mut rng = rng_for(seed);
    let mut b = nodes(n);
    for k in index::sample(&mut rng, slots.len(), md) {
        let (i, j) = slots[k];
        b.add_directed(i, j)?;
    }
    for &(i, j) in &slots {
        if rng.random_bool(pb) {
            b.add_bidirected(i, j)?;
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgraphs;

    #[test]
    fn extremes() {
        let g = random_graph(&RandomGraphSpec::new(6, 0.0, 0.0, 1).unwrap()).unwrap();
        assert_eq!(g, CausalGraph::empty(6));
        let g = random_graph(&RandomGraphSpec::new(6, 0.0, 1.0, 1).unwrap()).unwrap();
        assert_eq!(g, testgraphs::bidirected_clique(6));
        let g = random_graph_fixed_md(6, 15, 0.0, 3).unwrap();
        assert_eq!(g.directed_count(), 15);
        assert!(random_graph_fixed_md(4, 7, 0.0, 3).is_err());
    }

    #[test]
    fn deterministic() {
        let s = RandomGraphSpec::new(12, 0.3, 0.2, 99).unwrap();
        assert_eq!(random_graph(&s).unwrap(), random_graph(&s).unwrap());
        assert_eq!(random_graph_fixed_md(9, 10, 0.3, 5).unwrap(), random_graph_fixed_md(9, 10, 0.3, 5).unwrap());
        assert_ne!(stream_seed(1, 0, 1), stream_seed(1, 1, 0));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(RandomGraphSpec::new(0, 0.1, 0.1, 0).is_err());
        assert!(RandomGraphSpec::new(3, 1.5, 0.1, 0).is_err());
        assert!(RandomGraphSpec::new(3, 0.1, -0.1, 0).is_err());
    }

    #[test]
    fn slot_frequencies_match() {
        let (pd, pb) = (0.3, 0.6);
        let samples = 10_000;
        let mut dir = [[0u32; 6]; 6];
        let mut bi = [[0u32; 6]; 6];
        for seed in 0..samples {
            let g = random_graph(&RandomGraphSpec::new(6, pd, pb, seed).unwrap()).unwrap();
            for (i, j) in g.directed_edges() {
                dir[i][j] += 1;
            }
            for (i, j) in g.bidirected_edges() {
                bi[i][j] += 1;
            }
        }
        for i in 0..6 {
            for j in i + 1..6 {
                assert!((f64::from(dir[i][j]) / samples as f64 - pd).abs() < 0.02);
                assert!((f64::from(bi[i][j]) / samples as f64 - pb).abs() < 0.02);
            }
        }
    }
}
