//! Timed enumeration over grids of random graphs.

use std::io::Write;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Deserialize;

use crate::clmp::list_ci_until;
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::order::default_order;
use crate::randgen::{random_graph, random_graph_fixed_md, stream_seed, RandomGraphSpec, PRNG_DESCRIPTION};

fn default_timeout() -> f64 {
    60.0
}

fn default_samples() -> u32 {
    1
}

/// A sweep grid, usually read from JSON. Exactly one of `pd` and `md` is
/// given: Bernoulli directed edges or a fixed directed-edge count.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub n: Vec<usize>,
    #[serde(default)]
    pub pd: Vec<f64>,
    #[serde(default)]
    pub md: Vec<usize>,
    pub pb: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: u32,
    pub seed: u64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Worker threads; runs are sequential by default so timings do not
    /// contend.
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Density {
    Probability(f64),
    EdgeCount(usize),
}

/// One grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub n: usize,
    pub density: Density,
    pub pb: f64,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Precondition(format!("bad grid: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pd.is_empty() == self.md.is_empty() {
            return Err(Error::Precondition("grid needs exactly one of `pd` and `md`".into()));
        }
        if self.n.is_empty() || self.pb.is_empty() {
            return Err(Error::Precondition("grid needs non-empty `n` and `pb`".into()));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(Error::Precondition("timeout_secs must be positive".into()));
        }
        for c in self.cells() {
            match c.density {
                Density::Probability(pd) => {
                    RandomGraphSpec::new(c.n, pd, c.pb, 0)?;
                }
                Density::EdgeCount(md) => {
                    RandomGraphSpec::new(c.n, 0.0, c.pb, 0)?;
                    if md > c.n * c.n.saturating_sub(1) / 2 {
                        return Err(Error::Precondition(format!("md = {md} does not fit in n = {}", c.n)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Grid points in `n`, then density, then `pb` order.
    pub fn cells(&self) -> Vec<GridCell> {
        let densities: Vec<Density> = if self.md.is_empty() {
            self.pd.iter().map(|&p| Density::Probability(p)).collect()
        } else {
            self.md.iter().map(|&m| Density::EdgeCount(m)).collect()
        };
        let mut out = Vec::new();
        for &n in &self.n {
            for &density in &densities {
                for &pb in &self.pb {
                    out.push(GridCell { n, density, pb });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub cell: u32,
    pub sample: u32,
    pub n: usize,
    /// Directed edges in the sampled graph.
    pub md: usize,
    /// Bidirected edges in the sampled graph.
    pub mu: usize,
    /// Size of the largest c-component.
    pub s: usize,
    pub pd: Option<f64>,
    pub pb: f64,
    pub seed: u64,
    pub ci_count: u64,
    pub total_ms: f64,
    pub max_delay_ms: f64,
    pub timed_out: bool,
    /// Gaps between consecutive emissions, starting from the call and
    /// ending at the return.
    pub delays_ms: Vec<f64>,
}

/// Runs the enumerator on `g`, recording the gap before each emission and
/// the final gap to completion.
pub fn time_listing(g: &CausalGraph, timeout: Duration) -> Result<(u64, Vec<f64>, f64, bool)> {
    let order = default_order(g);
    let start = Instant::now();
    let deadline = start + timeout;
    let mut last = start;
    let mut delays = Vec::new();
    let mut count = 0u64;
    let flow = list_ci_until(g, &order, &|| Instant::now() >= deadline, |_, _| {
        let now = Instant::now();
        delays.push(ms(now - std::mem::replace(&mut last, now)));
        count += 1;
        ControlFlow::Continue(())
    })?;
    let end = Instant::now();
    delays.push(ms(end - last));
    Ok((count, delays, ms(end - start), flow.is_break()))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn run(cfg: &BenchConfig, cell_index: u32, cell: GridCell, sample: u32) -> Result<BenchRecord> {
    let seed = stream_seed(cfg.seed, cell_index, sample);
    let (g, pd) = match cell.density {
        Density::Probability(pd) => (random_graph(&RandomGraphSpec::new(cell.n, pd, cell.pb, seed)?)?, Some(pd)),
        Density::EdgeCount(md) => (random_graph_fixed_md(cell.n, md, cell.pb, seed)?, None),
    };
    let (ci_count, delays_ms, total_ms, timed_out) = time_listing(&g, Duration::from_secs_f64(cfg.timeout_secs))?;
    Ok(BenchRecord {
        cell: cell_index,
        sample,
        n: cell.n,
        md: g.directed_count(),
        mu: g.bidirected_count(),
        s: g.largest_c_component(),
        pd,
        pb: cell.pb,
        seed,
        ci_count,
        total_ms,
        max_delay_ms: delays_ms.iter().copied().fold(0.0, f64::max),
        timed_out,
        delays_ms,
    })
}

/// Runs every `(cell, sample)` and returns records in that order. Timeouts
/// are recorded, not raised.
pub fn bench_sweep(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let jobs: Vec<(u32, GridCell, u32)> = cfg
        .cells()
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| (0..cfg.samples).map(move |s| (i as u32, c, s)))
        .collect();
    let threads = cfg.threads.unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(|&(i, c, s)| run(cfg, i, c, s)).collect())
}

pub const CSV_COLUMNS: [&str; 11] =
    ["n", "md", "mu", "s", "pd", "pb", "seed", "ci_count", "total_ms", "max_delay_ms", "timed_out"];

/// Writes a `#` line naming the generator, then a CSV table.
pub fn write_csv<W: Write>(mut out: W, records: &[BenchRecord]) -> std::io::Result<()> {
    writeln!(out, "# prng: {PRNG_DESCRIPTION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.md.to_string(),
            r.mu.to_string(),
            r.s.to_string(),
            r.pd.map(|p| p.to_string()).unwrap_or_default(),
            r.pb.to_string(),
            r.seed.to_string(),
            r.ci_count.to_string(),
            format!("{:.3}", r.total_ms),
            format!("{:.3}", r.max_delay_ms),
            r.timed_out.to_string(),
        ])?;
    }
    w.flush()
}
