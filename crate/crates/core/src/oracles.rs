//! Brute-force ground truth for the cut quantities that the flow programs
//! bound. Everything here is exponential; each function refuses inputs
//! above a fixed size instead of running for hours.

use std::collections::{BTreeSet, HashMap};

use crate::channel::BoundSide;
use crate::error::{Error, Result};
use crate::graph::UnitMultigraph;
use crate::network::QuantumNetwork;
use crate::programs::{CommoditySet, UserGroup};
use crate::UndirectedNetwork;

pub const MAX_CUT_VERTICES: usize = 20;
pub const MAX_MULTICUT_EDGES: usize = 20;
pub const MAX_CONNECTIVITY_VERTICES: usize = 16;
pub const MAX_PACKING_MEDGES: usize = 12;
pub const MAX_PATH_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// One side of a vertex bipartition.
    Side(BTreeSet<String>),
    /// Removed undirected edges, by uid.
    Edges(Vec<usize>),
    /// Edge-disjoint trees, each a sorted list of medge ids.
    Trees(Vec<Vec<usize>>),
    /// Vertex sequence of a path.
    Path(Vec<String>),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub witness: Witness,
}

fn guard(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        return Err(Error::GuardExceeded { what, actual, limit });
    }
    Ok(())
}

fn side_of(vertices: &[String], mask: u64) -> BTreeSet<String> {
    (0..vertices.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| vertices[i].clone())
        .collect()
}

/// Minimizes `cost(mask)` over vertex masks containing every vertex in
/// `forced_in` and none in `forced_out`; `cost` returns `None` to skip.
fn scan_masks(
    n: usize,
    forced_in: &[usize],
    forced_out: &[usize],
    mut cost: impl FnMut(u64) -> Option<f64>,
) -> Option<(f64, u64)> {
    let fixed: Vec<usize> = forced_in.iter().chain(forced_out).copied().collect();
    let free: Vec<usize> = (0..n).filter(|v| !fixed.contains(v)).collect();
    let base: u64 = forced_in.iter().map(|&v| 1u64 << v).sum();
    let mut best: Option<(f64, u64)> = None;
    for bits in 0u64..(1 << free.len()) {
        let mut mask = base;
        for (k, &v) in free.iter().enumerate() {
            if bits >> k & 1 == 1 {
                mask |= 1 << v;
            }
        }
        if let Some(c) = cost(mask) {
            if best.is_none_or(|(b, _)| c < b) {
                best = Some((c, mask));
            }
        }
    }
    best
}

/// Minimum `s`-`t` cut by enumerating every side containing `s` but not `t`.
pub fn min_st_cut(gp: &UndirectedNetwork, s: &str, t: &str) -> Result<OracleResult> {
    guard("vertices", gp.vertex_count(), MAX_CUT_VERTICES)?;
    let (si, ti) = (gp.index(s)?, gp.index(t)?);
    if si == ti {
        return Err(Error::invalid(format!("source and sink are both `{s}`")));
    }
    let (value, mask) = scan_masks(gp.vertex_count(), &[si], &[ti], |m| Some(gp.cut_of_mask(m)))
        .unwrap_or_else(|| unreachable!("the side {{s}} always exists"));
    Ok(OracleResult {
        value,
        witness: Witness::Side(side_of(gp.vertices(), mask)),
    })
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

fn pair_indices(gp: &UndirectedNetwork, pairs: &CommoditySet) -> Result<Vec<(usize, usize)>> {
    pairs
        .pairs()
        .iter()
        .map(|c| Ok((gp.index(&c.source)?, gp.index(&c.sink)?)))
        .collect()
}

/// Cheapest set of undirected edges whose removal disconnects every pair.
pub fn min_multicut(gp: &UndirectedNetwork, pairs: &CommoditySet) -> Result<OracleResult> {
    let ne = gp.uedges().len();
    guard("undirected edges", ne, MAX_MULTICUT_EDGES)?;
    let ends = pair_indices(gp, pairs)?;
    let mut best: Option<(f64, u64)> = None;
    for removed in 0u64..(1 << ne) {
        let cost: f64 = (0..ne).filter(|j| removed >> j & 1 == 1).map(|j| gp.uedges()[j].capacity).sum();
        if best.is_some_and(|(b, _)| cost >= b) {
            continue;
        }
        let mut sets = DisjointSets::new(gp.vertex_count());
        for (j, e) in gp.uedges().iter().enumerate() {
            if removed >> j & 1 == 0 {
                sets.union(e.ends.0, e.ends.1);
            }
        }
        if ends.iter().all(|&(s, t)| sets.find(s) != sets.find(t)) {
            best = Some((cost, removed));
        }
    }
    let (value, removed) = best.unwrap_or_else(|| unreachable!("removing every edge separates all pairs"));
    Ok(OracleResult {
        value,
        witness: Witness::Edges((0..ne).filter(|j| removed >> j & 1 == 1).collect()),
    })
}

/// Minimum over vertex bipartitions of crossing capacity divided by the
/// number of pairs the bipartition separates.
pub fn min_cut_ratio(gp: &UndirectedNetwork, pairs: &CommoditySet) -> Result<OracleResult> {
    let n = gp.vertex_count();
    guard("vertices", n, MAX_CUT_VERTICES)?;
    let ends = pair_indices(gp, pairs)?;
    // the last vertex stays outside: each bipartition is seen once
    let best = scan_masks(n, &[], &[n - 1], |m| {
        let demand = ends.iter().filter(|&&(s, t)| (m >> s & 1) != (m >> t & 1)).count();
        (demand > 0).then(|| gp.cut_of_mask(m) / demand as f64)
    });
    let (value, mask) = best.ok_or(Error::UndefinedRatio)?;
    Ok(OracleResult {
        value,
        witness: Witness::Side(side_of(gp.vertices(), mask)),
    })
}

fn group_indices(vertices: &[String], group: &UserGroup) -> Result<Vec<usize>> {
    group
        .members()
        .iter()
        .map(|v| crate::graph::index_of(vertices, v))
        .collect()
}

/// Minimum capacity of a cut leaving members of `group` on both sides.
pub fn min_steiner_cut(gp: &UndirectedNetwork, group: &UserGroup) -> Result<OracleResult> {
    let n = gp.vertex_count();
    guard("vertices", n, MAX_CUT_VERTICES)?;
    let users = group_indices(gp.vertices(), group)?;
    let best = scan_masks(n, &[users[0]], &[], |m| {
        users.iter().any(|&u| m >> u & 1 == 0).then(|| gp.cut_of_mask(m))
    });
    let (value, mask) = best.unwrap_or_else(|| unreachable!("groups have two members"));
    Ok(OracleResult {
        value,
        witness: Witness::Side(side_of(gp.vertices(), mask)),
    })
}

/// `lambda_S`: fewest medges whose removal splits `group`.
pub fn s_connectivity(mg: &UnitMultigraph, group: &UserGroup) -> Result<usize> {
    let n = mg.vertex_count();
    guard("vertices", n, MAX_CONNECTIVITY_VERTICES)?;
    let users = group_indices(mg.vertices(), group)?;
    let crossing = |m: u64| {
        mg.medges()
            .iter()
            .filter(|e| (m >> e.ends.0 & 1) != (m >> e.ends.1 & 1))
            .count()
    };
    let best = scan_masks(n, &[users[0]], &[], |m| {
        users.iter().any(|&u| m >> u & 1 == 0).then(|| crossing(m) as f64)
    });
    Ok(best.map_or(0, |(v, _)| v as usize))
}

/// Whether the medge subset `mask` is a minimal S-tree: acyclic, connected,
/// spanning every user, and with users at every leaf.
fn is_minimal_tree(mg: &UnitMultigraph, users: &[usize], mask: u32) -> bool {
    let n = mg.vertex_count();
    let mut sets = DisjointSets::new(n);
    let mut degree = vec![0usize; n];
    for (j, e) in mg.medges().iter().enumerate() {
        if mask >> j & 1 == 1 {
            if !sets.union(e.ends.0, e.ends.1) {
                return false;
            }
            degree[e.ends.0] += 1;
            degree[e.ends.1] += 1;
        }
    }
    let root = sets.find(users[0]);
    if users.iter().any(|&u| sets.find(u) != root) {
        return false;
    }
    (0..n).all(|v| degree[v] == 0 || (sets.find(v) == root && (degree[v] > 1 || users.contains(&v))))
}

struct Packer {
    trees: Vec<u32>,
    memo: HashMap<u32, (usize, Option<usize>)>,
}

impl Packer {
    /// Best packing inside `avail`, with the tree chosen first (if any).
    fn best(&mut self, avail: u32) -> usize {
        if let Some(&(v, _)) = self.memo.get(&avail) {
            return v;
        }
        let result = if avail == 0 {
            (0, None)
        } else {
            let low = avail & avail.wrapping_neg();
            let mut best = (self.best(avail & !low), None);
            for k in 0..self.trees.len() {
                let t = self.trees[k];
                if t & low != 0 && t & !avail == 0 {
                    let v = 1 + self.best(avail & !t);
                    if v > best.0 {
                        best = (v, Some(k));
                    }
                }
            }
            best
        };
        self.memo.insert(avail, result);
        result.0
    }

    fn witness(&mut self, mut avail: u32) -> Vec<u32> {
        let mut out = Vec::new();
        while avail != 0 {
            self.best(avail);
            match self.memo[&avail].1 {
                Some(k) => {
                    out.push(self.trees[k]);
                    avail &= !self.trees[k];
                }
                None => avail &= avail - 1,
            }
        }
        out
    }
}

/// `t_S`: the largest number of pairwise medge-disjoint S-trees, found by
/// exhaustive search over minimal trees.
pub fn max_tree_packing(mg: &UnitMultigraph, group: &UserGroup) -> Result<OracleResult> {
    let m = mg.medges().len();
    guard("multigraph edges", m, MAX_PACKING_MEDGES)?;
    let users = group_indices(mg.vertices(), group)?;
    let trees: Vec<u32> = (1u32..(1 << m)).filter(|&t| is_minimal_tree(mg, &users, t)).collect();
    let mut packer = Packer {
        trees,
        memo: HashMap::new(),
    };
    let all = if m == 0 { 0 } else { u32::MAX >> (32 - m) };
    let value = packer.best(all);
    let trees = packer
        .witness(all)
        .into_iter()
        .map(|t| (0..m).filter(|j| t >> j & 1 == 1).collect())
        .collect();
    Ok(OracleResult {
        value: value as f64,
        witness: Witness::Trees(trees),
    })
}

/// Best single repeater path: the maximum over simple undirected `s`-`t`
/// paths of `1 / sum_e 1/C_e`. Each undirected edge uses its better channel
/// direction; edges of zero capacity are skipped.
pub fn best_path_harmonic(net: &QuantumNetwork, side: BoundSide, s: &str, t: &str) -> Result<OracleResult> {
    let gp = net.undirected(side)?;
    let n = gp.vertex_count();
    guard("vertices", n, MAX_PATH_VERTICES)?;
    let (si, ti) = (gp.index(s)?, gp.index(t)?);
    if si == ti {
        return Err(Error::invalid(format!("source and sink are both `{s}`")));
    }
    let caps = net.capacities(side)?;
    let best_channel: Vec<f64> = gp
        .uedges()
        .iter()
        .map(|e| e.members.iter().map(|id| caps[id]).fold(0.0, f64::max))
        .collect();
    let adj = gp.adjacency();

    struct Search<'a> {
        adj: &'a [Vec<(usize, usize)>],
        cap: &'a [f64],
        target: usize,
        on_path: Vec<bool>,
        path: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, v: usize, cost: f64) {
            if v == self.target {
                if self.best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    self.best = Some((cost, self.path.clone()));
                }
                return;
            }
            for k in 0..self.adj[v].len() {
                let (w, uid) = self.adj[v][k];
                if self.on_path[w] || self.cap[uid] <= 0.0 {
                    continue;
                }
                self.on_path[w] = true;
                self.path.push(w);
                self.go(w, cost + 1.0 / self.cap[uid]);
                self.path.pop();
                self.on_path[w] = false;
            }
        }
    }
    let mut search = Search {
        adj: &adj,
        cap: &best_channel,
        target: ti,
        on_path: vec![false; n],
        path: vec![si],
        best: None,
    };
    search.on_path[si] = true;
    search.go(si, 0.0);
    Ok(match search.best {
        Some((cost, path)) => OracleResult {
            value: 1.0 / cost,
            witness: Witness::Path(path.into_iter().map(|v| gp.name(v).to_string()).collect()),
        },
        None => OracleResult {
            value: 0.0,
            witness: Witness::None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;

    fn path_abcd() -> UndirectedNetwork {
        UndirectedNetwork::from_edges(["a", "b", "c", "d"], &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0)]).unwrap()
    }

    fn doubled_triangle() -> UnitMultigraph {
        UnitMultigraph::from_pairs(
            ["a", "b", "c"],
            &[("a", "b"), ("a", "b"), ("b", "c"), ("b", "c"), ("c", "a"), ("c", "a")],
        )
        .unwrap()
    }

    #[test]
    fn st_cut_examples() {
        let g = UndirectedNetwork::from_edges(["s", "t"], &[("s", "t", 2.0)]).unwrap();
        let r = min_st_cut(&g, "s", "t").unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.witness, Witness::Side(["s".to_string()].into()));
        let g = UndirectedNetwork::from_edges(["s", "a", "t"], &[("s", "a", 1.0), ("a", "t", 0.5)]).unwrap();
        assert_eq!(min_st_cut(&g, "s", "t").unwrap().value, 0.5);
    }

    #[test]
    fn multicut_and_ratio() {
        let g = path_abcd();
        let pairs = CommoditySet::new([("a", "c"), ("b", "d")]).unwrap();
        let cut = min_multicut(&g, &pairs).unwrap();
        assert_eq!(cut.value, 1.0);
        assert_eq!(cut.witness, Witness::Edges(vec![1]));
        assert_eq!(min_cut_ratio(&g, &pairs).unwrap().value, 0.5);

        let one = CommoditySet::new([("a", "d")]).unwrap();
        assert_eq!(min_multicut(&g, &one).unwrap().value, min_st_cut(&g, "a", "d").unwrap().value);
        assert_eq!(min_cut_ratio(&g, &one).unwrap().value, 1.0);

        let split = UndirectedNetwork::from_edges(["a", "b", "c", "d"], &[("a", "b", 1.0), ("c", "d", 1.0)]).unwrap();
        let pairs = CommoditySet::new([("a", "b"), ("c", "d")]).unwrap();
        assert_eq!(min_multicut(&split, &pairs).unwrap().value, 2.0);
        assert_eq!(min_cut_ratio(&split, &pairs).unwrap().value, 1.0);
    }

    #[test]
    fn steiner_cuts() {
        let tri = UndirectedNetwork::from_edges(["a", "b", "c"], &[("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)]).unwrap();
        assert_eq!(min_steiner_cut(&tri, &UserGroup::new(["a", "b", "c"]).unwrap()).unwrap().value, 2.0);
        let star = UndirectedNetwork::from_edges(["r", "x", "y", "z"], &[("r", "x", 1.0), ("r", "y", 1.0), ("r", "z", 1.0)]).unwrap();
        assert_eq!(min_steiner_cut(&star, &UserGroup::new(["x", "y", "z"]).unwrap()).unwrap().value, 1.0);
        let two = UserGroup::new(["a", "c"]).unwrap();
        assert_eq!(min_steiner_cut(&tri, &two).unwrap().value, min_st_cut(&tri, "a", "c").unwrap().value);
    }

    #[test]
    fn connectivity_examples() {
        let all = UserGroup::new(["a", "b", "c"]).unwrap();
        assert_eq!(s_connectivity(&doubled_triangle(), &all).unwrap(), 4);
        let single = UnitMultigraph::from_pairs(["a", "b"], &[("a", "b")]).unwrap();
        assert_eq!(s_connectivity(&single, &UserGroup::new(["a", "b"]).unwrap()).unwrap(), 1);
        let apart = UnitMultigraph::from_pairs(["a", "b", "c"], &[("a", "b")]).unwrap();
        assert_eq!(s_connectivity(&apart, &UserGroup::new(["a", "c"]).unwrap()).unwrap(), 0);
    }

    #[test]
    fn packing_examples() {
        let all = UserGroup::new(["a", "b", "c"]).unwrap();
        let r = max_tree_packing(&doubled_triangle(), &all).unwrap();
        assert_eq!(r.value, 3.0);
        let Witness::Trees(trees) = r.witness else { panic!() };
        assert_eq!(trees.len(), 3);
        let mut used: Vec<usize> = trees.concat();
        used.sort_unstable();
        used.dedup();
        assert_eq!(used.len(), 6);

        let path = UnitMultigraph::from_pairs(["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(max_tree_packing(&path, &all).unwrap().value, 1.0);
        let apart = UnitMultigraph::from_pairs(["a", "b", "c"], &[("a", "b")]).unwrap();
        assert_eq!(max_tree_packing(&apart, &all).unwrap().value, 0.0);

        let big = UnitMultigraph::from_pairs(["a", "b"], &[("a", "b"); 13]).unwrap();
        assert!(max_tree_packing(&big, &UserGroup::new(["a", "b"]).unwrap()).unwrap_err().is_guard());
    }

    #[test]
    fn harmonic_paths() {
        let net = |edges: &[(&str, &str, f64)]| {
            let mut vs: Vec<&str> = edges.iter().flat_map(|e| [e.0, e.1]).collect();
            vs.sort_unstable();
            vs.dedup();
            QuantumNetwork::ingest(
                vs,
                edges
                    .iter()
                    .enumerate()
                    .map(|(i, e)| (format!("e{i}"), e.0.into(), e.1.into(), ChannelSpec::explicit(e.2, e.2)))
                    .collect(),
            )
            .unwrap()
        };
        let one = best_path_harmonic(&net(&[("s", "t", 0.5)]), BoundSide::Upper, "s", "t").unwrap();
        assert_eq!(one.value, 0.5);
        let two = net(&[("s", "m", 1.0), ("m", "t", 1.0)]);
        assert_eq!(best_path_harmonic(&two, BoundSide::Upper, "s", "t").unwrap().value, 0.5);
        let three = net(&[("s", "x", 1.0), ("x", "y", 1.0), ("y", "t", 1.0)]);
        let r = best_path_harmonic(&three, BoundSide::Upper, "s", "t").unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.witness, Witness::Path(vec!["s".into(), "x".into(), "y".into(), "t".into()]));
        let apart = net(&[("s", "x", 1.0), ("y", "t", 1.0)]);
        assert_eq!(best_path_harmonic(&apart, BoundSide::Upper, "s", "t").unwrap().value, 0.0);
    }

    #[test]
    fn guards_refuse() {
        let names: Vec<String> = (0..21).map(|i| format!("v{i:02}")).collect();
        let g = UndirectedNetwork::from_edges(names.iter().map(String::as_str), &[("v00", "v01", 1.0)]).unwrap();
        assert!(min_st_cut(&g, "v00", "v01").unwrap_err().is_guard());
    }
}
