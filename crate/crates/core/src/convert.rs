//! Oversampling conversion from a base k-spanner construction to an
//! r-fault-tolerant one.
//!
//! Each iteration samples a vertex set `J` (every vertex independently with
//! probability `p`), runs the base algorithm on `G \ J`, and the result is the
//! union over all iterations. Iteration `i` draws from the stream seeded with
//! `seed ^ i`, so iterations are independent of each other and of the
//! iteration count.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::graph::{EdgeId, FaultSet, Graph};
use crate::rng;
use crate::spanner::{BaseSpannerAlgorithm, Greedy, Spanner, SpannerError, SpannerMeta};

pub const DEFAULT_C_ITER: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvertError {
    #[error("fault budget r = {r} must be smaller than n = {n}")]
    FaultBudgetTooLarge { r: usize, n: usize },
    #[error("invalid conversion config: {0}")]
    InvalidConfig(&'static str),
    #[error("stretch k = {0} must be odd and at least 3")]
    InvalidStretch(u32),
    #[error("base algorithm failed in iteration {iteration}: {source}")]
    Base { iteration: usize, source: SpannerError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionConfig {
    pub r: usize,
    pub iterations: usize,
    /// Probability that a vertex joins the sampled fault set `J`.
    pub sample_keep_prob: f64,
    pub seed: u64,
    pub c_iter: f64,
}

impl ConversionConfig {
    /// Defaults: `c_iter = 4`, iterations from [`default_iterations`] and
    /// `p = 1 - 1/r` (`1/2` when `r = 1`).
    pub fn new(n: usize, r: usize, seed: u64) -> Self {
        Self::with_c_iter(n, r, seed, DEFAULT_C_ITER)
    }

    pub fn with_c_iter(n: usize, r: usize, seed: u64, c_iter: f64) -> Self {
        ConversionConfig {
            r,
            iterations: default_iterations(n, r, c_iter),
            sample_keep_prob: default_join_probability(r),
            seed,
            c_iter,
        }
    }

    pub fn validate(&self) -> Result<(), ConvertError> {
        if self.iterations == 0 {
            return Err(ConvertError::InvalidConfig("iterations must be at least 1"));
        }
        let p = self.sample_keep_prob;
        if self.r >= 1 && !(p >= 0.0 && p < 1.0) {
            return Err(ConvertError::InvalidConfig("sampling probability must lie in [0, 1)"));
        }
        Ok(())
    }
}

pub fn default_join_probability(r: usize) -> f64 {
    match r {
        0 => 0.0,
        1 => 0.5,
        _ => 1.0 - 1.0 / r as f64,
    }
}

/// `ceil(c_iter * r^3 * ln n)`, at least 1; `r = 0` gives 1.
pub fn default_iterations(n: usize, r: usize, c_iter: f64) -> usize {
    if r == 0 || n < 2 {
        return 1;
    }
    let r = r as f64;
    let it = libm::ceil(c_iter * r * r * r * libm::log(n as f64));
    if it.is_finite() && it >= 1.0 {
        it as usize
    } else {
        1
    }
}

/// Samples `J`: each vertex independently with probability `p`.
pub fn sample_fault_set<R: Rng>(n: usize, p: f64, rng: &mut R) -> FaultSet {
    FaultSet::new((0..n).filter(|_| rng.random::<f64>() < p))
}

/// Result of one conversion iteration, in host edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub sampled: FaultSet,
    pub edges: Vec<EdgeId>,
}

impl IterationOutcome {
    pub fn survivors(&self, n: usize) -> usize {
        n - self.sampled.len()
    }
}

/// Runs iteration `i` in isolation; pure given `(g, k, cfg, i)`.
pub fn conversion_iteration(
    g: &Graph,
    k: u32,
    cfg: &ConversionConfig,
    iteration: usize,
    base: &dyn BaseSpannerAlgorithm,
) -> Result<IterationOutcome, ConvertError> {
    let mut rng = rng::stream(cfg.seed ^ iteration as u64);
    let sampled = sample_fault_set(g.n(), cfg.sample_keep_prob, &mut rng);
    let sub = g.remove_vertices(&sampled).expect("sampled ids are in range");
    let local = base.build(&sub, k).map_err(|source| ConvertError::Base { iteration, source })?;
    let edges = local
        .edges()
        .iter()
        .map(|&e| {
            let ed = sub.edge(e);
            g.edge_between(ed.tail, ed.head).expect("subgraph edge exists in host")
        })
        .collect();
    Ok(IterationOutcome { sampled, edges })
}

/// The fault-tolerant conversion of `base`.
pub fn ft_convert(
    g: &Graph,
    k: u32,
    cfg: &ConversionConfig,
    base: &dyn BaseSpannerAlgorithm,
) -> Result<Spanner, ConvertError> {
    cfg.validate()?;
    if cfg.r >= g.n() && g.n() > 0 {
        return Err(ConvertError::FaultBudgetTooLarge { r: cfg.r, n: g.n() });
    }
    let meta = SpannerMeta::new(base.name(), k, cfg.r, cfg.seed);
    if cfg.r == 0 {
        let h = base.build(g, k).map_err(|source| ConvertError::Base { iteration: 0, source })?;
        return Ok(Spanner::new(h.edges().iter().copied(), meta));
    }
    let mut union = BTreeSet::new();
    for i in 0..cfg.iterations {
        union.extend(conversion_iteration(g, k, cfg, i, base)?.edges);
    }
    Ok(Spanner::new(union, meta))
}

/// Conversion applied to the greedy spanner with default parameters.
pub fn ft_greedy(g: &Graph, k: u32, r: usize, seed: u64) -> Result<Spanner, ConvertError> {
    ft_greedy_with(g, k, &ConversionConfig::new(g.n(), r, seed))
}

pub fn ft_greedy_with(g: &Graph, k: u32, cfg: &ConversionConfig) -> Result<Spanner, ConvertError> {
    if k < 3 || k % 2 == 0 {
        return Err(ConvertError::InvalidStretch(k));
    }
    if g.directed() {
        return Err(ConvertError::Base {
            iteration: 0,
            source: SpannerError::DirectedInput("greedy spanner"),
        });
    }
    let mut h = ft_convert(g, k, cfg, &Greedy)?;
    h.meta.algorithm = "ft-greedy".into();
    Ok(h)
}
