//! Seeded network generators.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64`; the seed fully
//! determines the output, and the generator choice is fixed so that saved
//! fixtures stay valid across releases.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::network::QuantumNetwork;

/// Redraws allowed per diagonal before giving up.
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordParams {
    /// `2^l` nodes
    pub l: u32,
    /// ring capacity
    pub c0: f64,
    pub seed: u64,
    pub diagonals_per_level: u32,
}

impl ChordParams {
    pub fn new(l: u32, c0: f64, seed: u64) -> Self {
        ChordParams {
            l,
            c0,
            seed,
            diagonals_per_level: 1,
        }
    }
}

/// Ring `v0 -> v1 -> ... -> v0` of capacity `c0`, plus for every level
/// `i = 1..=l` some diagonals `v_n -> v_{n+m}` with `m` drawn from
/// `[2^(i-1), 2^i]` and capacity `c0 / m`. Draws that would close a
/// self-loop or repeat an existing vertex pair are redrawn.
pub fn generate_chord(p: &ChordParams) -> Result<QuantumNetwork> {
    if p.l < 2 {
        return Err(Error::invalid(format!("chord networks need l >= 2, got {}", p.l)));
    }
    if p.l > 20 {
        return Err(Error::invalid(format!("l = {} is too large", p.l)));
    }
    if !(p.c0.is_finite() && p.c0 > 0.0) {
        return Err(Error::invalid(format!("ring capacity must be positive, got {}", p.c0)));
    }
    let n = 1usize << p.l;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let name = |i: usize| format!("v{i}");
    let mut taken = std::collections::BTreeSet::new();
    let mut channels = Vec::new();
    for v in 0..n {
        let w = (v + 1) % n;
        taken.insert((v.min(w), v.max(w)));
        channels.push((format!("ring{v}"), name(v), name(w), ChannelSpec::explicit(p.c0, p.c0)));
    }
    for i in 1..=p.l {
        for d in 0..p.diagonals_per_level {
            let mut placed = false;
            for _ in 0..MAX_REDRAWS {
                let start = rng.gen_range(0..n);
                let m = rng.gen_range(1usize << (i - 1)..=1usize << i);
                let end = (start + m) % n;
                let key = (start.min(end), start.max(end));
                if start == end || taken.contains(&key) {
                    continue;
                }
                taken.insert(key);
                let c = p.c0 / m as f64;
                channels.push((format!("diag{i}_{d}"), name(start), name(end), ChannelSpec::explicit(c, c)));
                placed = true;
                break;
            }
            if !placed {
                return Err(Error::invalid(format!("no free vertex pair left for a level-{i} diagonal")));
            }
        }
    }
    QuantumNetwork::ingest((0..n).map(name), channels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomNetworkParams {
    pub vertices: usize,
    pub extra_edges: usize,
    pub capacity_range: (f64, f64),
    pub seed: u64,
}

/// A random spanning tree plus `extra_edges` further vertex pairs, each a
/// channel of random orientation with capacity uniform in the range.
/// Vertices are `n0, n1, ...`, channels `e0, e1, ...`.
pub fn generate_random_connected(p: &RandomNetworkParams) -> Result<QuantumNetwork> {
    let nv = p.vertices;
    if nv < 2 {
        return Err(Error::invalid("a random network needs at least two vertices"));
    }
    let (lo, hi) = p.capacity_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(Error::invalid(format!("bad capacity range [{lo}, {hi}]")));
    }
    let wanted = nv - 1 + p.extra_edges;
    if wanted > nv * (nv - 1) / 2 {
        return Err(Error::invalid(format!("{nv} vertices cannot carry {wanted} distinct edges")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut order: Vec<usize> = (0..nv).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(wanted);
    for k in 1..nv {
        let parent = order[rng.gen_range(0..k)];
        pairs.push((order[k], parent));
    }
    let mut free: Vec<(usize, usize)> = (0..nv)
        .flat_map(|a| (a + 1..nv).map(move |b| (a, b)))
        .filter(|&(a, b)| !pairs.iter().any(|&(x, y)| (x.min(y), x.max(y)) == (a, b)))
        .collect();
    for _ in 0..p.extra_edges {
        let k = rng.gen_range(0..free.len());
        pairs.push(free.swap_remove(k));
    }
    let channels = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let (tail, head) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let c = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
            (format!("e{i}"), format!("n{tail}"), format!("n{head}"), ChannelSpec::explicit(c, c))
        })
        .collect();
    QuantumNetwork::ingest((0..nv).map(|i| format!("n{i}")), channels)
}
