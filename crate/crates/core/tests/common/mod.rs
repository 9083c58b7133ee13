#![allow(dead_code)]

use qnetcap::netgen::{generate_random_connected, RandomNetworkParams};
use qnetcap::{ChannelSpec, QuantumNetwork};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected network with `2..=max_v` vertices and at most `max_e` channels,
/// explicit channels with equal lower and upper values in `[0.1, 5]`.
pub fn random_network(seed: u64, max_v: usize, max_e: usize) -> QuantumNetwork {
    let mut r = rng(seed ^ 0x5eed);
    let nv = r.gen_range(2..=max_v);
    let room = (nv * (nv - 1) / 2).min(max_e) - (nv - 1);
    let extra = r.gen_range(0..=room);
    generate_random_connected(&RandomNetworkParams {
        vertices: nv,
        extra_edges: extra,
        capacity_range: (0.1, 5.0),
        seed,
    })
    .unwrap()
}

/// Like [`random_network`], but about a third of the channels also get an
/// anti-parallel partner with its own capacity.
pub fn random_network_with_reverse(seed: u64, max_v: usize, max_e: usize) -> QuantumNetwork {
    let base = random_network(seed, max_v, max_e);
    let mut r = rng(seed ^ 0xba5e);
    let mut channels: Vec<_> = base
        .graph()
        .edges()
        .iter()
        .map(|e| (e.id.clone(), e.tail.clone(), e.head.clone(), base.channels()[&e.id].clone()))
        .collect();
    for e in base.graph().edges() {
        if r.gen_bool(1.0 / 3.0) {
            let c = r.gen_range(0.1..=5.0);
            channels.push((format!("{}r", e.id), e.head.clone(), e.tail.clone(), ChannelSpec::explicit(c, c)));
        }
    }
    QuantumNetwork::ingest(base.graph().vertices().to_vec(), channels).unwrap()
}

/// `count` distinct vertices of `net`.
pub fn pick(net: &QuantumNetwork, seed: u64, count: usize) -> Vec<String> {
    let mut vs = net.graph().vertices().to_vec();
    vs.shuffle(&mut rng(seed ^ 0x9a125));
    vs.truncate(count);
    vs
}

/// Up to `max_pairs` random ordered pairs of distinct vertices.
pub fn pick_pairs(net: &QuantumNetwork, seed: u64, max_pairs: usize) -> Vec<(String, String)> {
    let mut r = rng(seed ^ 0x7a1f);
    let vs = net.graph().vertices();
    let count = r.gen_range(1..=max_pairs);
    (0..count)
        .map(|_| {
            let a = r.gen_range(0..vs.len());
            let mut b = r.gen_range(0..vs.len() - 1);
            if b >= a {
                b += 1;
            }
            (vs[a].clone(), vs[b].clone())
        })
        .collect()
}
