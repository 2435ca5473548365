//! Subcommand implementations behind the `chordal` binary.

use std::io::Write;

use chordal_bgw::analytic::{Analysis, AnalyticConstants};
use chordal_bgw::chordal::graph::{binom, ChordalGraph};
use chordal_bgw::chordal::{Deroot, GraphSampler, SampleMode};
use chordal_bgw::gfchain::{brute_force_class, ChainConfig, ChainDepth, GFChain};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Largest size the brute-force oracle accepts.
pub const ORACLE_MAX: usize = 8;

/// Rooted draws per unrooted sample before giving up.
pub const DEROOT_ATTEMPTS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] chordal_bgw::Error),
    #[error(transparent)]
    Experiment(#[from] chordal_experiments::ExpError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Counts of the class for `n ≤ n_max`, with brute-force oracle counts for
/// `n ≤ oracle`.
pub fn enumerate<W: Write>(t: usize, k: usize, n_max: usize, rooted: bool, oracle: Option<usize>, out: W) -> Result<bool> {
    if let Some(n0) = oracle {
        if n0 > ORACLE_MAX {
            return Err(CliError::Usage(format!("--oracle-check is limited to {ORACLE_MAX}")));
        }
    }
    let depth = if rooted { ChainDepth::Rooted } else { ChainDepth::Complete };
    let chain = GFChain::exact(ChainConfig::new(t, k, n_max).depth(depth).decoration_order(0))?;
    let mut w = csv::Writer::from_writer(out);
    if oracle.is_some() {
        w.write_record(["n", "count", "oracle_count", "match"])?;
    } else {
        w.write_record(["n", "count"])?;
    }
    let mut all = true;
    let first = if rooted { 0 } else { 1 };
    for n in first..=n_max {
        let count = chain.count(n, rooted)?;
        match oracle {
            None => w.write_record([n.to_string(), count.to_string()])?,
            Some(n0) if n <= n0 => {
                let want = oracle_count(t, k, n, rooted)?;
                let ok = want == count;
                all &= ok;
                w.write_record([n.to_string(), count.to_string(), want.to_string(), ok.to_string()])?;
            }
            Some(_) => w.write_record([n.to_string(), count.to_string(), String::new(), String::new()])?,
        }
    }
    w.flush()?;
    Ok(all)
}

/// Brute-force count. A rooted structure with `n` non-root vertices
/// corresponds to `C(n+k, k)` pairs of a graph on `n + k` vertices and one
/// of its `k`-cliques, so the rooted count is `Σ n_k(G) / C(n+k, k)`.
pub fn oracle_count(t: usize, k: usize, n: usize, rooted: bool) -> Result<BigInt> {
    if !rooted {
        return Ok(BigInt::from(brute_force_class(t, k, n)?.len()));
    }
    let total = n + k;
    if total > ORACLE_MAX {
        return Err(CliError::Usage(format!("rooted oracle needs n + k <= {ORACLE_MAX}")));
    }
    let mut pairs = 0u64;
    for g in brute_force_class(t, k, total)? {
        pairs += g.clique_count(k)?;
    }
    Ok(BigInt::from(pairs / binom(total as u64, k as u64)))
}

pub fn constants(t: usize, k: usize, order: usize, tol: f64) -> Result<AnalyticConstants> {
    Ok(Analysis::new(t, k, order, tol)?.constants)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
}

/// One sampled graph in the JSON schema.
#[derive(Clone, Debug, Serialize)]
pub struct GraphRecord {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
    pub root_clique: Option<Vec<u32>>,
    pub labels: Option<Vec<u32>>,
    pub seed: u64,
}

impl GraphRecord {
    pub fn new(g: &ChordalGraph, seed: u64) -> Self {
        GraphRecord { n: g.n(), edges: g.labelled_edges(), root_clique: g.root_clique.clone(), labels: g.labels.clone(), seed }
    }
}

/// Draws `count` graphs with `n` non-root vertices; graph `i` uses seed
/// `seed + i`, so each one can be regenerated alone. Without `deroot` the
/// graphs keep their root clique `0..k`.
#[allow(clippy::too_many_arguments)]
pub fn sample<W: Write>(
    t: usize,
    k: usize,
    n: usize,
    mode: SampleMode,
    count: usize,
    seed: u64,
    deroot: Option<Deroot>,
    format: Format,
    mut out: W,
) -> Result<()> {
    let sampler = GraphSampler::new(t, k, n, mode)?;
    for i in 0..count {
        let s = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let g = match deroot {
            None => sampler.rooted(n as u32, &mut rng)?,
            Some(d) => sampler.unrooted(n as u32, d, &mut rng, DEROOT_ATTEMPTS)?.0,
        };
        match format {
            Format::Json => {
                serde_json::to_writer(&mut out, &GraphRecord::new(&g, s))?;
                writeln!(out)?;
            }
            Format::Dot => out.write_all(g.to_dot().as_bytes())?,
        }
    }
    out.flush()?;
    Ok(())
}
