//! Constructive side of the lower bounds: peel an LP flow into paths,
//! round the path flows to integers, realize them as edge-disjoint paths of
//! Bell pairs, and count what an aggregated repeater protocol delivers.

use std::collections::{BTreeMap, BTreeSet};

use crate::channel::BoundSide;
use crate::error::{Error, Result};
use crate::graph::{floor_multigraph, snapped_floor, UndirectedNetwork, UnitMultigraph};
use crate::network::QuantumNetwork;
use crate::oracles::max_tree_packing;
use crate::programs::{frequency_capacities, scenario_flow, FlowSolution, FrequencyMode, MultiPairObjective, Scenario, UserGroup};

/// Conservation slack accepted by [`decompose_flow`].
pub const CONSERVATION_TOL: f64 = 1e-6;
/// Arc flows at or below this are treated as exhausted while peeling.
const PEEL_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowPath {
    /// Vertex indices from source to sink.
    pub vertices: Vec<usize>,
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathDecomposition {
    pub vertices: Vec<String>,
    pub source: usize,
    pub sink: usize,
    pub paths: Vec<FlowPath>,
    /// Arc-flow mass left after peeling (circulations), summed over arcs.
    pub residual_cycles_discarded: f64,
}

impl PathDecomposition {
    pub fn total_flow(&self) -> f64 {
        self.paths.iter().map(|p| p.flow).sum()
    }

    pub fn path_names(&self, i: usize) -> Vec<&str> {
        self.paths[i].vertices.iter().map(|&v| self.vertices[v].as_str()).collect()
    }
}

/// Peels one commodity of `flow` into simple source-to-sink paths. Each
/// round takes the lexicographically smallest path (by vertex index) over
/// arcs with flow left and subtracts its bottleneck.
pub fn decompose_flow(flow: &FlowSolution, commodity: usize) -> Result<PathDecomposition> {
    let c = flow
        .commodities
        .get(commodity)
        .ok_or_else(|| Error::invalid(format!("no commodity {commodity}")))?;
    let (s, t) = (flow.vertex_index(&c.source)?, flow.vertex_index(&c.sink)?);
    let n = flow.vertices.len();
    for v in (0..n).filter(|&v| v != s && v != t) {
        let net = flow.net_outflow(commodity, v);
        if net.abs() > CONSERVATION_TOL {
            return Err(Error::invalid(format!(
                "flow violates conservation at `{}` by {net}",
                flow.vertices[v]
            )));
        }
    }
    let mut residual: BTreeMap<(usize, usize), f64> = flow
        .arcs(commodity)
        .into_iter()
        .filter(|a| a.2 > PEEL_ZERO)
        .map(|(a, b, f)| ((a, b), f))
        .collect();
    let mut paths = Vec::new();
    while let Some(path) = smallest_path(&residual, n, s, t) {
        let arcs: Vec<(usize, usize)> = path.windows(2).map(|w| (w[0], w[1])).collect();
        let bottleneck = arcs.iter().map(|a| residual[a]).fold(f64::INFINITY, f64::min);
        for a in &arcs {
            let left = residual[a] - bottleneck;
            if left > PEEL_ZERO {
                residual.insert(*a, left);
            } else {
                residual.remove(a);
            }
        }
        paths.push(FlowPath {
            vertices: path,
            flow: bottleneck,
        });
    }
    Ok(PathDecomposition {
        vertices: flow.vertices.clone(),
        source: s,
        sink: t,
        paths,
        residual_cycles_discarded: residual.values().sum(),
    })
}

/// Lexicographically smallest simple path: at every step move to the
/// smallest neighbour from which `t` is still reachable without revisiting.
fn smallest_path(arcs: &BTreeMap<(usize, usize), f64>, n: usize, s: usize, t: usize) -> Option<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in arcs.keys() {
        out[a].push(b);
    }
    let reaches = |from: usize, blocked: &[bool]| {
        let mut seen = blocked.to_vec();
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            if v == t {
                return true;
            }
            for &w in &out[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    };
    let mut on_path = vec![false; n];
    on_path[s] = true;
    if !reaches(s, &vec![false; n]) {
        return None;
    }
    let mut path = vec![s];
    let mut v = s;
    while v != t {
        let next = out[v].iter().copied().find(|&w| !on_path[w] && reaches(w, &on_path))?;
        on_path[next] = true;
        path.push(next);
        v = next;
    }
    Some(path)
}

/// How the path count `N` of a multi-commodity rounding is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathCount {
    /// Largest per-commodity path count (worst-case and group rounding).
    Max,
    /// Summed path counts (total-flow rounding).
    Sum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedCommodity {
    pub source: usize,
    pub sink: usize,
    /// Value of the commodity's path flows, `sum_i f^(i)`.
    pub flow: f64,
    pub paths: Vec<Vec<usize>>,
    /// `n_i = floor(k N f^(i))`
    pub n_bar: Vec<u64>,
    /// `F^(i) = m n_i`
    pub counts: Vec<u64>,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedRouting {
    pub m: u64,
    pub k: u64,
    pub n: u64,
    pub commodities: Vec<RoundedCommodity>,
    /// Bell multigraph `G''` with `floor(m k N c')` copies of every edge.
    pub multigraph: UnitMultigraph,
}

impl RoundedRouting {
    /// `m k N`
    pub fn scale(&self) -> u64 {
        self.m * self.k * self.n
    }

    /// `m k N (f - 1/k)` for a flow value `f`.
    pub fn guarantee(&self, f: f64) -> f64 {
        self.scale() as f64 * (f - 1.0 / self.k as f64)
    }
}

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::invalid(format!("{name} must be a positive integer")));
    }
    Ok(())
}

/// Rounds every path flow down to a multiple of `1/(kN)` and scales by
/// `m k N`, so that commodity totals satisfy `F >= m k N (f - 1/k)` and all
/// counts fit `floor(m k N c')` on every edge of `caps`.
pub fn round_commodities(
    decs: &[PathDecomposition],
    m: u64,
    k: u64,
    count: PathCount,
    caps: &UndirectedNetwork,
) -> Result<RoundedRouting> {
    check_positive("m", m)?;
    check_positive("k", k)?;
    if decs.is_empty() {
        return Err(Error::invalid("nothing to round"));
    }
    let sizes = decs.iter().map(|d| d.paths.len() as u64);
    let n = match count {
        PathCount::Max => sizes.max().unwrap_or(0),
        PathCount::Sum => sizes.sum(),
    }
    .max(1);
    let commodities = decs
        .iter()
        .map(|d| {
            let n_bar: Vec<u64> = d.paths.iter().map(|p| snapped_floor((k * n) as f64 * p.flow)).collect();
            let counts: Vec<u64> = n_bar.iter().map(|x| m * x).collect();
            RoundedCommodity {
                source: d.source,
                sink: d.sink,
                flow: d.total_flow(),
                paths: d.paths.iter().map(|p| p.vertices.clone()).collect(),
                total: counts.iter().sum(),
                n_bar,
                counts,
            }
        })
        .collect();
    Ok(RoundedRouting {
        m,
        k,
        n,
        commodities,
        multigraph: floor_multigraph(caps, (m * k * n) as f64)?,
    })
}

/// Single-commodity rounding with `N` equal to the number of peeled paths.
pub fn round_to_integer_paths(dec: &PathDecomposition, m: u64, k: u64, caps: &UndirectedNetwork) -> Result<RoundedRouting> {
    round_commodities(std::slice::from_ref(dec), m, k, PathCount::Max, caps)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutedPath {
    pub commodity: usize,
    pub vertices: Vec<usize>,
    pub medges: Vec<usize>,
}

/// Realizes the rounded counts as medge-disjoint paths of `mg`, taking the
/// lowest unused medge id on every hop.
pub fn extract_edge_disjoint_paths(mg: &UnitMultigraph, routing: &RoundedRouting) -> Result<Vec<RoutedPath>> {
    let mut free: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for e in mg.medges().iter().rev() {
        free.entry(e.ends).or_default().push(e.mid);
    }
    let mut out = Vec::new();
    for (ci, c) in routing.commodities.iter().enumerate() {
        for (path, &count) in c.paths.iter().zip(&c.counts) {
            for _ in 0..count {
                let mut medges = Vec::with_capacity(path.len() - 1);
                for w in path.windows(2) {
                    let key = (w[0].min(w[1]), w[0].max(w[1]));
                    let mid = free.get_mut(&key).and_then(Vec::pop).ok_or_else(|| {
                        Error::Inconsistent(format!(
                            "rounded routing exceeds the Bell pairs between `{}` and `{}`",
                            mg.name(key.0),
                            mg.name(key.1)
                        ))
                    })?;
                    medges.push(mid);
                }
                out.push(RoutedPath {
                    commodity: ci,
                    vertices: path.clone(),
                    medges,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapRecord {
    pub source: String,
    pub sink: String,
    pub consumed: usize,
}

/// Entanglement swapping along a chain of Bell pairs: consumes every medge
/// of the chain and yields one `source`-`sink` pair.
pub fn swap_chain(mg: &UnitMultigraph, medges: &[usize], source: &str, sink: &str) -> Result<SwapRecord> {
    let (s, t) = (mg.index(source)?, mg.index(sink)?);
    if s == t {
        return Err(Error::invalid("swap chain needs distinct endpoints"));
    }
    let mut seen = BTreeSet::new();
    let mut at = s;
    for &mid in medges {
        let e = mg
            .medges()
            .get(mid)
            .ok_or_else(|| Error::invalid(format!("no medge {mid}")))?;
        if !seen.insert(mid) {
            return Err(Error::invalid(format!("medge {mid} used twice in one chain")));
        }
        at = match e.ends {
            (a, b) if a == at => b,
            (a, b) if b == at => a,
            _ => {
                return Err(Error::invalid(format!(
                    "chain breaks at `{}`: medge {mid} does not touch it",
                    mg.name(at)
                )))
            }
        };
    }
    if at != t {
        return Err(Error::invalid(format!("chain ends at `{}`, not `{sink}`", mg.name(at))));
    }
    Ok(SwapRecord {
        source: source.to_string(),
        sink: sink.to_string(),
        consumed: medges.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GhzRecord {
    pub members: Vec<String>,
    /// Tree vertices outside the group, measured out after merging.
    pub removed: Vec<String>,
    pub consumed: usize,
}

/// Merges the Bell pairs of an S-tree into one GHZ state over the group.
pub fn merge_ghz(mg: &UnitMultigraph, tree: &[usize], group: &UserGroup) -> Result<GhzRecord> {
    let n = mg.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut touched = BTreeSet::new();
    for &mid in tree {
        let e = mg
            .medges()
            .get(mid)
            .ok_or_else(|| Error::invalid(format!("no medge {mid}")))?;
        let (ra, rb) = (find(&mut parent, e.ends.0), find(&mut parent, e.ends.1));
        if ra == rb {
            return Err(Error::invalid("tree contains a cycle"));
        }
        parent[ra] = rb;
        touched.insert(e.ends.0);
        touched.insert(e.ends.1);
    }
    let users = group
        .members()
        .iter()
        .map(|v| mg.index(v))
        .collect::<Result<Vec<_>>>()?;
    let root = find(&mut parent, users[0]);
    let spans = users.iter().all(|&u| touched.contains(&u) && find(&mut parent, u) == root);
    let connected = touched.iter().all(|&v| find(&mut parent, v) == root);
    if !spans || !connected {
        return Err(Error::invalid("tree does not connect every group member"));
    }
    Ok(GhzRecord {
        members: group.members().to_vec(),
        removed: touched
            .into_iter()
            .filter(|v| !users.contains(v))
            .map(|v| mg.name(v).to_string())
            .collect(),
        consumed: tree.len(),
    })
}

/// Repeatedly grows a breadth-first tree from the first member over unused
/// medges, prunes leaves outside the group, and keeps it if it reaches
/// every member. Maximal, not necessarily maximum.
pub fn greedy_tree_packing(mg: &UnitMultigraph, group: &UserGroup) -> Result<Vec<Vec<usize>>> {
    let users = group
        .members()
        .iter()
        .map(|v| mg.index(v))
        .collect::<Result<Vec<_>>>()?;
    let n = mg.vertex_count();
    let mut used = vec![false; mg.medges().len()];
    let mut trees = Vec::new();
    loop {
        let mut via: Vec<Option<usize>> = vec![None; n];
        let mut reached = vec![false; n];
        reached[users[0]] = true;
        let mut queue = std::collections::VecDeque::from([users[0]]);
        while let Some(v) = queue.pop_front() {
            for e in mg.medges() {
                if used[e.mid] {
                    continue;
                }
                let w = match e.ends {
                    (a, b) if a == v => b,
                    (a, b) if b == v => a,
                    _ => continue,
                };
                if !reached[w] {
                    reached[w] = true;
                    via[w] = Some(e.mid);
                    queue.push_back(w);
                }
            }
        }
        if users.iter().any(|&u| !reached[u]) {
            return Ok(trees);
        }
        // keep only the edges on root paths of members
        let mut keep = BTreeSet::new();
        for &u in &users {
            let mut v = u;
            while let Some(mid) = via[v] {
                if !keep.insert(mid) {
                    break;
                }
                let e = mg.medges()[mid];
                v = if e.ends.0 == v { e.ends.1 } else { e.ends.0 };
            }
        }
        for &mid in &keep {
            used[mid] = true;
        }
        trees.push(keep.into_iter().collect());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RepeaterOptions {
    /// Pack GHZ trees with the exhaustive oracle instead of the greedy
    /// heuristic; required for a certified GHZ bound check.
    pub exact_packing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeaterRunReport {
    pub scenario: String,
    pub m: u64,
    pub k: u64,
    pub n: u64,
    /// `max ceil(1/p_e)` over used channels
    pub m_tilde: u64,
    /// `m <= m_tilde`: nothing is guaranteed
    pub guarantee_vacuous: bool,
    /// LP value on the frequency-scaled lower capacities
    pub lp_value: f64,
    /// `(a, b, count)` per undirected edge
    pub bell_pairs_per_uedge: Vec<(String, String, u64)>,
    /// End-to-end pairs per commodity, or a single GHZ count for a group.
    pub delivered: Vec<u64>,
    pub consumed: u64,
    pub rates: Vec<f64>,
    pub rate: f64,
    pub bound: f64,
    pub bound_satisfied: bool,
    /// Whether `bound_satisfied` is a proven guarantee (false for
    /// GHZ runs with greedy packing).
    pub certified: bool,
    pub paths: Vec<RoutedPath>,
    pub trees: Vec<Vec<usize>>,
}

/// `max ceil(1/p_e)` over channels with `p_e > 0`.
pub fn m_tilde(freqs: &BTreeMap<String, f64>) -> Result<u64> {
    freqs
        .values()
        .filter(|&&p| p > 0.0)
        .map(|&p| (1.0 / p - 1e-9).ceil() as u64)
        .max()
        .ok_or_else(|| Error::invalid("every usage frequency is zero"))
}

/// Runs the aggregated repeater protocol at usage frequencies `freqs`:
/// distill `floor((m - m~) k N c')` Bell pairs per edge, then route them by
/// rounding and swapping (pairs) or by packing S-trees (groups).
pub fn aggregated_repeater_run(
    net: &QuantumNetwork,
    scenario: &Scenario,
    freqs: &BTreeMap<String, f64>,
    m: u64,
    k: u64,
    options: RepeaterOptions,
) -> Result<RepeaterRunReport> {
    check_positive("m", m)?;
    check_positive("k", k)?;
    let caps = frequency_capacities(net, freqs, BoundSide::Lower)?;
    let mt = m_tilde(freqs)?;
    let eff = m.saturating_sub(mt);
    let solution = scenario_flow(net, scenario, &FrequencyMode::Fixed(freqs.clone()), BoundSide::Lower)?;
    let decs = (0..solution.commodities.len())
        .map(|i| decompose_flow(&solution, i))
        .collect::<Result<Vec<_>>>()?;
    let count = match scenario {
        Scenario::Pairs {
            objective: MultiPairObjective::Total,
            ..
        } => PathCount::Sum,
        _ => PathCount::Max,
    };
    let sizes = decs.iter().map(|d| d.paths.len() as u64);
    let n = match count {
        PathCount::Max => sizes.max().unwrap_or(0),
        PathCount::Sum => sizes.sum(),
    }
    .max(1);
    let f = solution.objective;
    let (mf, kf, nf) = (m as f64, k as f64, n as f64);
    let keep = 1.0 - mt as f64 / mf;
    let mut report = RepeaterRunReport {
        scenario: scenario.tag().to_string(),
        m,
        k,
        n,
        m_tilde: mt,
        guarantee_vacuous: m <= mt,
        lp_value: f,
        bell_pairs_per_uedge: Vec::new(),
        delivered: Vec::new(),
        consumed: 0,
        rates: Vec::new(),
        rate: 0.0,
        bound: 0.0,
        bound_satisfied: false,
        certified: true,
        paths: Vec::new(),
        trees: Vec::new(),
    };
    let pairs_of = |mg: &UnitMultigraph| {
        caps.uedges()
            .iter()
            .map(|e| {
                let c = mg.medges().iter().filter(|x| x.uedge == e.uid).count() as u64;
                (caps.name(e.ends.0).to_string(), caps.name(e.ends.1).to_string(), c)
            })
            .collect()
    };

    if let Scenario::Group(group) = scenario {
        let mg = if eff == 0 {
            floor_multigraph(&caps, 1.0)?.without_edges()
        } else {
            floor_multigraph(&caps, (2 * eff * k * n) as f64)?
        };
        let trees = if options.exact_packing {
            match max_tree_packing(&mg, group)?.witness {
                crate::oracles::Witness::Trees(t) => t,
                _ => Vec::new(),
            }
        } else {
            greedy_tree_packing(&mg, group)?
        };
        for t in &trees {
            report.consumed += merge_ghz(&mg, t, group)?.consumed as u64;
        }
        let ghz = trees.len() as u64;
        let outside = (mg.vertex_count() - group.len()) as f64;
        let g2 = outside / 2.0 + 1.0;
        report.rate = ghz as f64 / (2.0 * mf * kf * nf);
        report.rates = vec![report.rate];
        report.delivered = vec![ghz];
        report.bound = 0.5 * keep * (f - 1.0 / kf) - g2 / (2.0 * mf * kf * nf);
        report.certified = options.exact_packing;
        report.bell_pairs_per_uedge = pairs_of(&mg);
        report.trees = trees;
    } else {
        let commodities = solution.commodities.len();
        let (mg, delivered, paths) = if eff == 0 {
            (floor_multigraph(&caps, 1.0)?.without_edges(), vec![0; commodities], Vec::new())
        } else {
            let routing = round_commodities(&decs, eff, k, count, &caps)?;
            let paths = extract_edge_disjoint_paths(&routing.multigraph, &routing)?;
            let mut delivered = vec![0u64; commodities];
            for p in &paths {
                let c = &solution.commodities[p.commodity];
                report.consumed += swap_chain(&routing.multigraph, &p.medges, &c.source, &c.sink)?.consumed as u64;
                delivered[p.commodity] += 1;
            }
            (routing.multigraph, delivered, paths)
        };
        report.rates = delivered.iter().map(|&d| d as f64 / (mf * kf * nf)).collect();
        report.rate = match scenario {
            Scenario::Pairs {
                objective: MultiPairObjective::Total,
                ..
            } => report.rates.iter().sum(),
            _ => report.rates.iter().copied().fold(f64::INFINITY, f64::min),
        };
        report.bound = keep * f - 1.0 / kf;
        report.delivered = delivered;
        report.bell_pairs_per_uedge = pairs_of(&mg);
        report.paths = paths;
    }
    let generated: u64 = report.bell_pairs_per_uedge.iter().map(|e| e.2).sum();
    if report.consumed > generated {
        return Err(Error::Inconsistent(format!(
            "consumed {} Bell pairs but only {generated} were generated",
            report.consumed
        )));
    }
    report.bound_satisfied = report.rate >= report.bound - 1e-9;
    Ok(report)
}
