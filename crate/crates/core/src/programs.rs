//! Capacity linear programs.
//!
//! Every program here is a multi-commodity flow over the undirected
//! reduction `G'`. Each undirected edge `{a, b}` carries two nonnegative
//! variables per commodity, one per direction, and the pair of them is
//! bounded by the edge capacity. The programs differ in
//!
//! * the objective: the summed net source outflow (single pair, total
//!   multi-pair) or a slack variable bounded by every commodity's net
//!   outflow (worst case, Steiner connectivity);
//! * capacity sharing: the multi-pair programs put all commodities on one
//!   capacity row per edge, while the Steiner program gives every user pair
//!   its own copy of the edge capacity;
//! * the capacity source: fixed usage frequencies give constants
//!   `c'({v,w}) = p_vw C(vw) + p_wv C(wv)`, while frequency optimization
//!   makes the `p_e` variables of the same program, with `sum p_e = 1`.

use std::collections::BTreeMap;

use crate::channel::BoundSide;
use crate::error::{Error, Result};
use crate::graph::{build_undirected, UndirectedNetwork};
use crate::lp::{self, LpBuilder, LpStatus, RowKind, Sense, StandardFormLp};
use crate::network::QuantumNetwork;

/// Flow values below this are reported as zero.
const FLOW_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commodity {
    pub source: String,
    pub sink: String,
}

/// Source/sink pairs with optional weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CommoditySet {
    pairs: Vec<Commodity>,
    weights: Option<Vec<f64>>,
}

impl CommoditySet {
    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, S)>) -> Result<Self> {
        let pairs: Vec<Commodity> = pairs
            .into_iter()
            .map(|(s, t)| Commodity {
                source: s.into(),
                sink: t.into(),
            })
            .collect();
        if pairs.is_empty() {
            return Err(Error::invalid("at least one source/sink pair is required"));
        }
        if let Some(c) = pairs.iter().find(|c| c.source == c.sink) {
            return Err(Error::invalid(format!("pair ({0}, {0}) has identical endpoints", c.source)));
        }
        Ok(CommoditySet { pairs, weights: None })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.pairs.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} pairs",
                weights.len(),
                self.pairs.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("weights sum to {sum}, expected 1")));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn pairs(&self) -> &[Commodity] {
        &self.pairs
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Keeps the pairs at `indices`, dropping weights.
    pub fn subset(&self, indices: &[usize]) -> Result<CommoditySet> {
        let pairs = indices
            .iter()
            .map(|&i| {
                self.pairs
                    .get(i)
                    .map(|c| (c.source.clone(), c.sink.clone()))
                    .ok_or_else(|| Error::invalid(format!("pair index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        CommoditySet::new(pairs)
    }
}

/// A set of at least two distinct users, kept in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserGroup {
    members: Vec<String>,
}

impl UserGroup {
    pub fn new<S: Into<String>>(members: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut members: Vec<String> = members.into_iter().map(Into::into).collect();
        members.sort();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("user group lists a vertex twice"));
        }
        if members.len() < 2 {
            return Err(Error::invalid("a user group needs at least two members"));
        }
        Ok(UserGroup { members })
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Unordered member pairs `(s_i, s_j)` with `i < j`.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let m = &self.members;
        (0..m.len())
            .flat_map(|i| (i + 1..m.len()).map(move |j| (m[i].clone(), m[j].clone())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyMode {
    /// Fixed usage frequency per directed edge id; must sum to one.
    Fixed(BTreeMap<String, f64>),
    /// Frequencies become LP variables.
    Optimize,
    /// Every channel is used once per round, so `c'` is the plain sum of
    /// channel capacities and rates are per round rather than per channel use.
    PerChannel,
}

impl FrequencyMode {
    /// Every channel used with frequency `1/|E|`.
    pub fn uniform(net: &QuantumNetwork) -> Self {
        let n = net.graph().edges().len() as f64;
        FrequencyMode::Fixed(net.graph().edges().iter().map(|e| (e.id.clone(), 1.0 / n)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityAssignment {
    pub mode: FrequencyMode,
    pub side: BoundSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiPairObjective {
    Total,
    Worst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Pair { source: String, sink: String },
    Pairs { pairs: CommoditySet, objective: MultiPairObjective },
    Group(UserGroup),
}

impl Scenario {
    pub fn pair(source: impl Into<String>, sink: impl Into<String>) -> Result<Self> {
        let (source, sink) = (source.into(), sink.into());
        if source == sink {
            return Err(Error::invalid(format!("source and sink are both `{source}`")));
        }
        Ok(Scenario::Pair { source, sink })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Scenario::Pair { .. } => "single-pair",
            Scenario::Pairs {
                objective: MultiPairObjective::Total,
                ..
            } => "multi-pair-total",
            Scenario::Pairs {
                objective: MultiPairObjective::Worst,
                ..
            } => "multi-pair-worst",
            Scenario::Group(_) => "multipartite",
        }
    }

    /// The commodities the scenario's flow program routes.
    pub fn commodities(&self) -> Vec<Commodity> {
        match self {
            Scenario::Pair { source, sink } => vec![Commodity {
                source: source.clone(),
                sink: sink.clone(),
            }],
            Scenario::Pairs { pairs, .. } => pairs.pairs().to_vec(),
            Scenario::Group(g) => g
                .pairs()
                .into_iter()
                .map(|(source, sink)| Commodity { source, sink })
                .collect(),
        }
    }
}

/// Optimal multi-commodity flow together with the network skeleton it lives
/// on, so that it can be checked, decomposed and exported on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub objective: f64,
    pub vertices: Vec<String>,
    /// Endpoint indices of each undirected edge, `a < b`.
    pub uedges: Vec<(usize, usize)>,
    /// Capacity each undirected edge had in the solved program (for
    /// frequency optimization, the capacity induced by the chosen `p_e`).
    pub capacities: Vec<f64>,
    /// Whether all commodities share one capacity row per edge.
    pub shared_capacity: bool,
    pub commodities: Vec<Commodity>,
    /// `flows[i][j] = [a -> b, b -> a]` for commodity `i` on uedge `j`.
    pub flows: Vec<Vec<[f64; 2]>>,
    /// Net source outflow of each commodity.
    pub commodity_values: Vec<f64>,
    /// Chosen usage frequency per directed edge id, when optimized.
    pub frequencies: Option<BTreeMap<String, f64>>,
}

impl FlowSolution {
    pub fn vertex_index(&self, v: &str) -> Result<usize> {
        crate::graph::index_of(&self.vertices, v)
    }

    /// Flow of `commodity` on the arc `tail -> head` (zero if no such edge).
    pub fn arc_flow(&self, commodity: usize, tail: &str, head: &str) -> f64 {
        let (Ok(a), Ok(b)) = (self.vertex_index(tail), self.vertex_index(head)) else {
            return 0.0;
        };
        let key = (a.min(b), a.max(b));
        self.uedges
            .iter()
            .position(|&e| e == key)
            .map(|j| self.flows[commodity][j][usize::from(a > b)])
            .unwrap_or(0.0)
    }

    /// Nonzero arcs of one commodity as `(tail, head, flow)`, in uedge order.
    pub fn arcs(&self, commodity: usize) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (j, &(a, b)) in self.uedges.iter().enumerate() {
            let [fwd, bwd] = self.flows[commodity][j];
            if fwd > 0.0 {
                out.push((a, b, fwd));
            }
            if bwd > 0.0 {
                out.push((b, a, bwd));
            }
        }
        out
    }

    pub fn net_outflow(&self, commodity: usize, v: usize) -> f64 {
        self.uedges
            .iter()
            .zip(&self.flows[commodity])
            .map(|(&(a, b), [fwd, bwd])| {
                if v == a {
                    fwd - bwd
                } else if v == b {
                    bwd - fwd
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Checks capacity and conservation rows within `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        for (j, &c) in self.capacities.iter().enumerate() {
            let loads: Vec<f64> = self.flows.iter().map(|f| f[j][0] + f[j][1]).collect();
            let load = if self.shared_capacity {
                loads.iter().sum()
            } else {
                loads.iter().copied().fold(0.0, f64::max)
            };
            if load > c + tol {
                return Err(Error::Inconsistent(format!("edge {j} carries {load} > capacity {c}")));
            }
        }
        for (i, c) in self.commodities.iter().enumerate() {
            let (s, t) = (self.vertex_index(&c.source)?, self.vertex_index(&c.sink)?);
            for v in (0..self.vertices.len()).filter(|&v| v != s && v != t) {
                let net = self.net_outflow(i, v);
                if net.abs() > tol {
                    return Err(Error::Inconsistent(format!(
                        "commodity {i} violates conservation at `{}` by {net}",
                        self.vertices[v]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Where the per-edge capacities of a flow program come from.
#[derive(Debug, Clone)]
pub(crate) enum CapacitySource {
    Fixed(Vec<f64>),
    Frequencies {
        edge_ids: Vec<String>,
        /// per uedge: `(directed edge index, channel capacity)`
        members: Vec<Vec<(usize, f64)>>,
        /// `p_e <= 1` as explicit rows instead of variable bounds
        bound_rows: bool,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct FlowProgram<'a> {
    pub skeleton: &'a UndirectedNetwork,
    pub commodities: Vec<Commodity>,
    pub shared: bool,
    pub worst: bool,
    pub capacities: CapacitySource,
}

struct Layout {
    commodities: Vec<(usize, usize)>,
    frequency_base: Option<usize>,
}

impl FlowProgram<'_> {
    fn flow_var(&self, commodity: usize, uedge: usize, dir: usize) -> usize {
        2 * (commodity * self.skeleton.uedges().len() + uedge) + dir
    }

    fn outflow_terms(&self, commodity: usize, v: usize, sign: f64) -> Vec<(usize, f64)> {
        let mut terms = Vec::new();
        for e in self.skeleton.uedges() {
            let (fwd, bwd) = (self.flow_var(commodity, e.uid, 0), self.flow_var(commodity, e.uid, 1));
            if e.ends.0 == v {
                terms.push((fwd, sign));
                terms.push((bwd, -sign));
            } else if e.ends.1 == v {
                terms.push((bwd, sign));
                terms.push((fwd, -sign));
            }
        }
        terms
    }

    fn build(&self) -> Result<(StandardFormLp, Layout)> {
        let gp = self.skeleton;
        let ne = gp.uedges().len();
        let r = self.commodities.len();
        let ends = self
            .commodities
            .iter()
            .map(|c| Ok((gp.index(&c.source)?, gp.index(&c.sink)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut b = LpBuilder::new(Sense::Maximize);
        for _ in 0..2 * r * ne {
            b.add_var(0.0, 0.0, None);
        }
        let frequency_base = match &self.capacities {
            CapacitySource::Frequencies { edge_ids, bound_rows, .. } if !edge_ids.is_empty() => {
                let base = b.num_vars();
                for _ in edge_ids {
                    let upper = if *bound_rows { None } else { Some(1.0) };
                    b.add_var(0.0, 0.0, upper);
                }
                Some(base)
            }
            _ => None,
        };
        let slack = self.worst.then(|| b.add_var(1.0, 0.0, None));

        // objective / worst-case rows
        for (i, &(s, _)) in ends.iter().enumerate() {
            match slack {
                None => {
                    for (j, a) in self.outflow_terms(i, s, 1.0) {
                        b.add_objective(j, a);
                    }
                }
                Some(f) => {
                    let mut row = self.outflow_terms(i, s, -1.0);
                    row.push((f, 1.0));
                    b.add_row(row, RowKind::Le, 0.0);
                }
            }
        }

        // capacity rows
        let cap_row = |b: &mut LpBuilder, mut terms: Vec<(usize, f64)>, uedge: usize| match &self.capacities {
            CapacitySource::Fixed(caps) => b.add_row(terms, RowKind::Le, caps[uedge]),
            CapacitySource::Frequencies { members, .. } => {
                let base = frequency_base.unwrap_or(0);
                for &(e, c) in &members[uedge] {
                    terms.push((base + e, -c));
                }
                b.add_row(terms, RowKind::Le, 0.0);
            }
        };
        if self.shared {
            for j in 0..ne {
                let terms = (0..r)
                    .flat_map(|i| [(self.flow_var(i, j, 0), 1.0), (self.flow_var(i, j, 1), 1.0)])
                    .collect();
                cap_row(&mut b, terms, j);
            }
        } else {
            for i in 0..r {
                for j in 0..ne {
                    cap_row(&mut b, vec![(self.flow_var(i, j, 0), 1.0), (self.flow_var(i, j, 1), 1.0)], j);
                }
            }
        }

        // frequency simplex
        if let (Some(base), CapacitySource::Frequencies { edge_ids, bound_rows, .. }) =
            (frequency_base, &self.capacities)
        {
            if *bound_rows {
                for e in 0..edge_ids.len() {
                    b.add_row(vec![(base + e, 1.0)], RowKind::Le, 1.0);
                }
            }
            b.add_row((0..edge_ids.len()).map(|e| (base + e, 1.0)).collect(), RowKind::Eq, 1.0);
        }

        // conservation
        for (i, &(s, t)) in ends.iter().enumerate() {
            for v in 0..gp.vertex_count() {
                if v == s || v == t {
                    continue;
                }
                let terms = self.outflow_terms(i, v, 1.0);
                if !terms.is_empty() {
                    b.add_row(terms, RowKind::Eq, 0.0);
                }
            }
        }
        Ok((
            b.build(),
            Layout {
                commodities: ends,
                frequency_base,
            },
        ))
    }

    pub(crate) fn dimension(&self) -> Result<(usize, usize)> {
        let (lp, _) = self.build()?;
        Ok((lp.num_vars(), lp.inequality_rows()))
    }

    pub(crate) fn solve(&self) -> Result<FlowSolution> {
        let (lp, layout) = self.build()?;
        let sol = lp::solve(&lp)?;
        let (objective, x) = match (sol.status, sol.objective, sol.x) {
            (LpStatus::Optimal, Some(o), Some(x)) => (o, x),
            (LpStatus::Infeasible, ..) => return Err(Error::UnexpectedStatus("infeasible")),
            _ => return Err(Error::UnexpectedStatus("unbounded")),
        };
        let gp = self.skeleton;
        let ne = gp.uedges().len();
        let clean = |v: f64| if v.abs() < FLOW_ZERO { 0.0 } else { v };
        let flows: Vec<Vec<[f64; 2]>> = (0..self.commodities.len())
            .map(|i| {
                (0..ne)
                    .map(|j| [clean(x[self.flow_var(i, j, 0)]), clean(x[self.flow_var(i, j, 1)])])
                    .collect()
            })
            .collect();
        let (capacities, frequencies) = match &self.capacities {
            CapacitySource::Fixed(c) => (c.clone(), None),
            CapacitySource::Frequencies { edge_ids, members, .. } => {
                let p: Vec<f64> = match layout.frequency_base {
                    Some(base) => (0..edge_ids.len()).map(|e| clean(x[base + e]).clamp(0.0, 1.0)).collect(),
                    None => Vec::new(),
                };
                let caps = members.iter().map(|m| m.iter().map(|&(e, c)| p[e] * c).sum()).collect();
                (caps, Some(edge_ids.iter().cloned().zip(p).collect()))
            }
        };
        let mut out = FlowSolution {
            objective: clean(objective),
            vertices: gp.vertices().to_vec(),
            uedges: gp.uedges().iter().map(|e| e.ends).collect(),
            capacities,
            shared_capacity: self.shared,
            commodities: self.commodities.clone(),
            flows,
            commodity_values: Vec::new(),
            frequencies,
        };
        out.commodity_values = layout
            .commodities
            .iter()
            .enumerate()
            .map(|(i, &(s, _))| clean(out.net_outflow(i, s)))
            .collect();
        Ok(out)
    }
}

fn check_pair(gp: &UndirectedNetwork, s: &str, t: &str) -> Result<()> {
    if s == t {
        return Err(Error::invalid(format!("source and sink are both `{s}`")));
    }
    gp.index(s)?;
    gp.index(t)?;
    Ok(())
}

fn fixed_program<'a>(gp: &'a UndirectedNetwork, commodities: Vec<Commodity>, shared: bool, worst: bool) -> FlowProgram<'a> {
    FlowProgram {
        skeleton: gp,
        commodities,
        shared,
        worst,
        capacities: CapacitySource::Fixed(gp.capacities()),
    }
}

/// Maximum `s -> t` flow on `gp`.
pub fn single_pair_flow(gp: &UndirectedNetwork, s: &str, t: &str) -> Result<FlowSolution> {
    check_pair(gp, s, t)?;
    let c = Commodity {
        source: s.into(),
        sink: t.into(),
    };
    fixed_program(gp, vec![c], true, false).solve()
}

/// Maximum summed flow over all commodities on shared capacities.
pub fn total_multipair_flow(gp: &UndirectedNetwork, pairs: &CommoditySet) -> Result<FlowSolution> {
    fixed_program(gp, pairs.pairs().to_vec(), true, false).solve()
}

/// Maximum flow value that every commodity reaches simultaneously.
pub fn worst_case_multipair_flow(gp: &UndirectedNetwork, pairs: &CommoditySet) -> Result<FlowSolution> {
    fixed_program(gp, pairs.pairs().to_vec(), true, true).solve()
}

/// Minimum pairwise max-flow among the group's members, as one program
/// with a separate copy of the capacities for every member pair.
pub fn steiner_connectivity_flow(gp: &UndirectedNetwork, group: &UserGroup) -> Result<FlowSolution> {
    let commodities = Scenario::Group(group.clone()).commodities();
    fixed_program(gp, commodities, false, true).solve()
}

fn validate_frequencies(net: &QuantumNetwork, freqs: &BTreeMap<String, f64>) -> Result<()> {
    for e in net.graph().edges() {
        let p = *freqs.get(&e.id).ok_or_else(|| Error::MissingCapacity(e.id.clone()))?;
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::invalid(format!("frequency {p} for `{}` outside [0, 1]", e.id)));
        }
    }
    if let Some(k) = freqs.keys().find(|k| net.graph().edge(k).is_none()) {
        return Err(Error::invalid(format!("frequency given for unknown edge `{k}`")));
    }
    let sum: f64 = freqs.values().sum();
    if !net.graph().edges().is_empty() && (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("frequencies sum to {sum}, expected 1")));
    }
    Ok(())
}

/// `c'` from fixed frequencies: each channel contributes `p_e * C(e)`.
pub fn frequency_capacities(net: &QuantumNetwork, freqs: &BTreeMap<String, f64>, side: BoundSide) -> Result<UndirectedNetwork> {
    validate_frequencies(net, freqs)?;
    let caps = net.capacities(side)?;
    let scaled = caps.into_iter().map(|(id, c)| {
        let p = freqs[&id];
        (id, p * c)
    });
    build_undirected(net.graph(), &scaled.collect())
}

fn scenario_program<'a>(
    net: &QuantumNetwork,
    skeleton: &'a UndirectedNetwork,
    scenario: &Scenario,
    mode: &FrequencyMode,
    side: BoundSide,
) -> Result<FlowProgram<'a>> {
    let (shared, worst) = match scenario {
        Scenario::Pair { source, sink } => {
            check_pair(skeleton, source, sink)?;
            (true, false)
        }
        Scenario::Pairs { objective, .. } => (true, *objective == MultiPairObjective::Worst),
        Scenario::Group(_) => (false, true),
    };
    let capacities = match mode {
        FrequencyMode::Fixed(_) | FrequencyMode::PerChannel => CapacitySource::Fixed(skeleton.capacities()),
        FrequencyMode::Optimize => {
            let caps = net.capacities(side)?;
            let edges = net.graph().edges();
            let pos: BTreeMap<&str, usize> = edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
            CapacitySource::Frequencies {
                edge_ids: edges.iter().map(|e| e.id.clone()).collect(),
                members: skeleton
                    .uedges()
                    .iter()
                    .map(|u| u.members.iter().map(|id| (pos[id.as_str()], caps[id])).collect())
                    .collect(),
                bound_rows: !matches!(scenario, Scenario::Pair { .. }),
            }
        }
    };
    Ok(FlowProgram {
        skeleton,
        commodities: scenario.commodities(),
        shared,
        worst,
        capacities,
    })
}

fn scenario_skeleton(net: &QuantumNetwork, mode: &FrequencyMode, side: BoundSide) -> Result<UndirectedNetwork> {
    match mode {
        FrequencyMode::Fixed(freqs) => frequency_capacities(net, freqs, side),
        FrequencyMode::Optimize | FrequencyMode::PerChannel => net.undirected(side),
    }
}

/// Solves the flow program of `scenario` with channel capacities from
/// `side`, either at fixed frequencies or optimizing them jointly.
pub fn scenario_flow(net: &QuantumNetwork, scenario: &Scenario, mode: &FrequencyMode, side: BoundSide) -> Result<FlowSolution> {
    let skeleton = scenario_skeleton(net, mode, side)?;
    scenario_program(net, &skeleton, scenario, mode, side)?.solve()
}

pub fn single_pair_capacity(net: &QuantumNetwork, s: &str, t: &str, assign: &CapacityAssignment) -> Result<FlowSolution> {
    scenario_flow(net, &Scenario::pair(s, t)?, &assign.mode, assign.side)
}

/// Lower and upper capacity bounds of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub scenario: String,
    /// Reported lower bound, `lower_factor * lower_bound_lp_value`.
    pub lower_bound: f64,
    pub lower_bound_lp_value: f64,
    pub lower_factor: f64,
    pub upper_bound_lp_value: f64,
    /// Flow-cut gap multiplier applied to the upper LP value.
    pub gap_factor: f64,
    pub reported_upper: f64,
    pub lower_flow: Option<FlowSolution>,
    pub upper_flow: Option<FlowSolution>,
    pub notes: Vec<String>,
}

fn check_gap(gap: f64) -> Result<()> {
    if !(gap.is_finite() && gap >= 1.0) {
        return Err(Error::invalid(format!("flow-cut gap must be >= 1, got {gap}")));
    }
    Ok(())
}

fn bounds_report(net: &QuantumNetwork, scenario: &Scenario, mode: &FrequencyMode, gap: f64) -> Result<BoundsReport> {
    check_gap(gap)?;
    let lower = scenario_flow(net, scenario, mode, BoundSide::Lower)?;
    let upper = scenario_flow(net, scenario, mode, BoundSide::Upper)?;
    let lower_factor = if matches!(scenario, Scenario::Group(_)) { 0.5 } else { 1.0 };
    let mut notes = Vec::new();
    if gap > 1.0 || matches!(scenario, Scenario::Pairs { .. }) {
        notes.push(format!(
            "upper bound is certified only up to the flow-cut gap; reported value uses gap factor {gap}"
        ));
    }
    if lower_factor != 1.0 {
        notes.push("GHZ lower bound carries a factor 1/2 on the Steiner connectivity".into());
    }
    Ok(BoundsReport {
        scenario: scenario.tag().to_string(),
        lower_bound: lower_factor * lower.objective,
        lower_bound_lp_value: lower.objective,
        lower_factor,
        upper_bound_lp_value: upper.objective,
        gap_factor: gap,
        reported_upper: gap * upper.objective,
        lower_flow: Some(lower),
        upper_flow: Some(upper),
        notes,
    })
}

pub fn single_pair_bounds(net: &QuantumNetwork, s: &str, t: &str, mode: &FrequencyMode) -> Result<BoundsReport> {
    bounds_report(net, &Scenario::pair(s, t)?, mode, 1.0)
}

pub fn multipair_capacity(
    net: &QuantumNetwork,
    pairs: &CommoditySet,
    objective: MultiPairObjective,
    mode: &FrequencyMode,
    gap: f64,
) -> Result<BoundsReport> {
    let scenario = Scenario::Pairs {
        pairs: pairs.clone(),
        objective,
    };
    bounds_report(net, &scenario, mode, gap)
}

pub fn multipartite_capacity(net: &QuantumNetwork, group: &UserGroup, mode: &FrequencyMode) -> Result<BoundsReport> {
    bounds_report(net, &Scenario::Group(group.clone()), mode, 1.0)
}

fn weights_of(pairs: &CommoditySet) -> Result<&[f64]> {
    pairs
        .weights()
        .ok_or_else(|| Error::invalid("weighted objective needs pair weights"))
}

/// Subset family used for the weighted polytope when the caller gives none:
/// every subset of size at least two for up to six pairs, otherwise all
/// two-element subsets plus the full set.
pub fn default_subsets(r: usize) -> Vec<Vec<usize>> {
    if r <= 6 {
        (0u32..(1 << r))
            .filter(|m| m.count_ones() >= 2)
            .map(|m| (0..r).filter(|i| m >> i & 1 == 1).collect())
            .collect()
    } else {
        let mut out: Vec<Vec<usize>> = (0..r).flat_map(|i| (i + 1..r).map(move |j| vec![i, j])).collect();
        out.push((0..r).collect());
        out
    }
}

fn pair_values(net: &QuantumNetwork, pairs: &CommoditySet, mode: &FrequencyMode, side: BoundSide) -> Result<Vec<f64>> {
    pairs
        .pairs()
        .iter()
        .map(|c| Ok(scenario_flow(net, &Scenario::pair(&c.source, &c.sink)?, mode, side)?.objective))
        .collect()
}

/// Upper bound on the weighted multi-pair rate: maximizes `sum q_i R_i` over
/// the polytope cut out by the single-pair facets `R_i <= f_i` and the
/// subset facets `sum_{i in U} R_i <= gap * f_U`, all with upper-bound
/// channel capacities.
pub fn weighted_upper_polytope(
    net: &QuantumNetwork,
    pairs: &CommoditySet,
    subsets: Option<&[Vec<usize>]>,
    mode: &FrequencyMode,
    gap: f64,
) -> Result<f64> {
    check_gap(gap)?;
    let weights = weights_of(pairs)?;
    let r = pairs.len();
    let defaults;
    let subsets = match subsets {
        Some(s) => s,
        None => {
            defaults = default_subsets(r);
            &defaults
        }
    };
    for u in subsets {
        let mut sorted = u.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != u.len() || u.len() < 2 || u.iter().any(|&i| i >= r) {
            return Err(Error::invalid(format!("bad pair subset {u:?}")));
        }
    }
    let singles = pair_values(net, pairs, mode, BoundSide::Upper)?;
    let mut b = LpBuilder::new(Sense::Maximize);
    let vars: Vec<usize> = weights.iter().zip(&singles).map(|(&q, &f)| b.add_var(q, 0.0, Some(f))).collect();
    for u in subsets {
        let scenario = Scenario::Pairs {
            pairs: pairs.subset(u)?,
            objective: MultiPairObjective::Total,
        };
        let value = scenario_flow(net, &scenario, mode, BoundSide::Upper)?.objective;
        b.add_row(u.iter().map(|&i| (vars[i], 1.0)).collect(), RowKind::Le, gap * value);
    }
    let sol = lp::solve(&b.build())?;
    sol.objective.ok_or(Error::UnexpectedStatus("infeasible"))
}

/// Lower bound on the weighted multi-pair rate by time-sharing single-pair
/// protocols: the best vertex of the convex hull of the axis points, i.e.
/// `max_i q_i f_i` with lower-bound channel capacities.
pub fn weighted_lower_timeshare(net: &QuantumNetwork, pairs: &CommoditySet, mode: &FrequencyMode) -> Result<f64> {
    let weights = weights_of(pairs)?;
    let singles = pair_values(net, pairs, mode, BoundSide::Lower)?;
    Ok(weights.iter().zip(&singles).map(|(q, f)| q * f).fold(0.0, f64::max))
}

/// Weighted scenario report. Flow tables are omitted; `upper_bound_lp_value`
/// is the polytope optimum with unit gap and `reported_upper` the optimum
/// with the subset facets scaled by `gap`.
pub fn weighted_capacity(
    net: &QuantumNetwork,
    pairs: &CommoditySet,
    subsets: Option<&[Vec<usize>]>,
    mode: &FrequencyMode,
    gap: f64,
) -> Result<BoundsReport> {
    let lower = weighted_lower_timeshare(net, pairs, mode)?;
    let upper = weighted_upper_polytope(net, pairs, subsets, mode, 1.0)?;
    let reported = if gap == 1.0 {
        upper
    } else {
        weighted_upper_polytope(net, pairs, subsets, mode, gap)?
    };
    Ok(BoundsReport {
        scenario: "multi-pair-weighted".into(),
        lower_bound: lower,
        lower_bound_lp_value: lower,
        lower_factor: 1.0,
        upper_bound_lp_value: upper,
        gap_factor: gap,
        reported_upper: reported,
        lower_flow: None,
        upper_flow: None,
        notes: vec![format!("subset facets of the rate polytope carry gap factor {gap}")],
    })
}

/// The four frequency-optimized program families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpFamily {
    SinglePair,
    Total,
    Worst,
    Steiner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LpSizes {
    pub uedges: usize,
    pub edges: usize,
    pub pairs: usize,
    pub group_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionAudit {
    pub family: LpFamily,
    /// variables plus inequality slacks, from the closed-form count
    pub predicted: usize,
    /// the same count read off the constructed program
    pub built: usize,
    pub variables: usize,
    pub inequality_rows: usize,
}

/// Standard-form size `N` (variables plus inequality slacks) of each family.
pub fn predicted_dimension(family: LpFamily, s: LpSizes) -> usize {
    let choose2 = s.group_size * s.group_size.saturating_sub(1) / 2;
    match family {
        LpFamily::SinglePair => 3 * s.uedges + s.edges,
        LpFamily::Total => (2 * s.pairs + 1) * s.uedges + 2 * s.edges,
        LpFamily::Worst => (2 * s.pairs + 1) * s.uedges + 2 * s.edges + 1 + s.pairs,
        LpFamily::Steiner => 3 * choose2 * s.uedges + 2 * s.edges + 1 + choose2,
    }
}

/// Counts variables and inequality rows of the frequency-optimized program
/// actually built for `scenario` on `net`.
pub fn network_dimension(net: &QuantumNetwork, scenario: &Scenario) -> Result<(usize, usize)> {
    let skeleton = net.undirected(BoundSide::Upper)?;
    scenario_program(net, &skeleton, scenario, &FrequencyMode::Optimize, BoundSide::Upper)?.dimension()
}

/// Builds a synthetic network of the requested size, constructs the
/// family's program on it and compares the size with the closed form.
pub fn lp_dimension_audit(family: LpFamily, sizes: LpSizes) -> Result<DimensionAudit> {
    use crate::channel::ChannelSpec;

    if sizes.edges < sizes.uedges || sizes.edges > 2 * sizes.uedges {
        return Err(Error::invalid(format!(
            "{} directed edges cannot reduce to {} undirected edges",
            sizes.edges, sizes.uedges
        )));
    }
    let need = match family {
        LpFamily::Steiner => sizes.group_size.max(2),
        _ => 2,
    };
    let mut n = need;
    while n * (n - 1) / 2 < sizes.uedges {
        n += 1;
    }
    let name = |i: usize| format!("v{i:03}");
    let vertices: Vec<String> = (0..n).map(name).collect();
    let mut channels = Vec::new();
    let unordered = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    for (k, (a, b)) in unordered.take(sizes.uedges).enumerate() {
        channels.push((format!("f{k}"), name(a), name(b), ChannelSpec::explicit(1.0, 1.0)));
        if k < sizes.edges - sizes.uedges {
            channels.push((format!("r{k}"), name(b), name(a), ChannelSpec::explicit(1.0, 1.0)));
        }
    }
    let net = QuantumNetwork::ingest(vertices, channels)?;
    let scenario = match family {
        LpFamily::SinglePair => Scenario::pair(name(0), name(1))?,
        LpFamily::Total | LpFamily::Worst => {
            if sizes.pairs == 0 {
                return Err(Error::invalid("at least one pair is required"));
            }
            let pairs = CommoditySet::new((0..sizes.pairs).map(|i| (name(i % n), name((i + 1) % n))))?;
            let objective = if family == LpFamily::Total {
                MultiPairObjective::Total
            } else {
                MultiPairObjective::Worst
            };
            Scenario::Pairs { pairs, objective }
        }
        LpFamily::Steiner => Scenario::Group(UserGroup::new((0..sizes.group_size).map(name))?),
    };
    let (variables, inequality_rows) = network_dimension(&net, &scenario)?;
    Ok(DimensionAudit {
        family,
        predicted: predicted_dimension(family, sizes),
        built: variables + inequality_rows,
        variables,
        inequality_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn net(vertices: &[&str], edges: &[(&str, &str, &str, ChannelSpec)]) -> QuantumNetwork {
        QuantumNetwork::ingest(
            vertices.iter().copied(),
            edges
                .iter()
                .map(|(id, a, b, s)| (id.to_string(), a.to_string(), b.to_string(), s.clone()))
                .collect(),
        )
        .unwrap()
    }

    fn unit(c: f64) -> ChannelSpec {
        ChannelSpec::explicit(c, c)
    }

    fn path_abcd() -> UndirectedNetwork {
        UndirectedNetwork::from_edges(["a", "b", "c", "d"], &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0)]).unwrap()
    }

    fn triangle() -> QuantumNetwork {
        net(
            &["a", "b", "c"],
            &[("ab", "a", "b", unit(1.0)), ("bc", "b", "c", unit(1.0)), ("ca", "c", "a", unit(1.0))],
        )
    }

    #[test]
    fn single_pair_examples() {
        let g = UndirectedNetwork::from_edges(["s", "t"], &[("s", "t", 2.0)]).unwrap();
        assert!(close(single_pair_flow(&g, "s", "t").unwrap().objective, 2.0));
        let g = UndirectedNetwork::from_edges(["s", "a", "t"], &[("s", "a", 1.0), ("a", "t", 0.5)]).unwrap();
        let sol = single_pair_flow(&g, "s", "t").unwrap();
        assert!(close(sol.objective, 0.5));
        sol.check(1e-9).unwrap();
        assert!(single_pair_flow(&g, "s", "s").is_err());
        let g = UndirectedNetwork::from_edges(["s", "a", "t"], &[("s", "a", 1.0)]).unwrap();
        assert_eq!(single_pair_flow(&g, "s", "t").unwrap().objective, 0.0);
    }

    #[test]
    fn frequency_optimized_single_pair() {
        let fig5 = net(
            &["s", "t", "x", "y"],
            &[
                ("a", "s", "t", unit(0.5)),
                ("b1", "s", "x", unit(1.0)),
                ("b2", "x", "y", unit(1.0)),
                ("b3", "y", "t", unit(1.0)),
            ],
        );
        let assign = CapacityAssignment {
            mode: FrequencyMode::Optimize,
            side: BoundSide::Lower,
        };
        let sol = single_pair_capacity(&fig5, "s", "t", &assign).unwrap();
        assert!(close(sol.objective, 0.5));
        let p = sol.frequencies.as_ref().unwrap();
        assert!(close(p.values().sum::<f64>(), 1.0));

        let one = net(&["s", "t"], &[("e", "s", "t", unit(3.0))]);
        let sol = single_pair_capacity(&one, "s", "t", &assign).unwrap();
        assert!(close(sol.objective, 3.0));
        assert!(close(sol.frequencies.unwrap()["e"], 1.0));

        let two = net(&["s", "m", "t"], &[("e1", "s", "m", unit(1.0)), ("e2", "m", "t", unit(1.0))]);
        assert!(close(single_pair_capacity(&two, "s", "t", &assign).unwrap().objective, 0.5));
    }

    #[test]
    fn fixed_frequencies_scale_channels() {
        let two = net(&["s", "m", "t"], &[("e1", "s", "m", unit(1.0)), ("e2", "m", "t", unit(1.0))]);
        let assign = CapacityAssignment {
            mode: FrequencyMode::uniform(&two),
            side: BoundSide::Upper,
        };
        assert!(close(single_pair_capacity(&two, "s", "t", &assign).unwrap().objective, 0.5));
        let bad: BTreeMap<String, f64> = [("e1".to_string(), 0.7), ("e2".to_string(), 0.7)].into();
        let assign = CapacityAssignment {
            mode: FrequencyMode::Fixed(bad),
            side: BoundSide::Upper,
        };
        assert!(single_pair_capacity(&two, "s", "t", &assign).is_err());
    }

    #[test]
    fn multipair_examples() {
        let g = path_abcd();
        let pairs = CommoditySet::new([("a", "c"), ("b", "d")]).unwrap();
        let total = total_multipair_flow(&g, &pairs).unwrap();
        assert!(close(total.objective, 1.0));
        total.check(1e-9).unwrap();
        let worst = worst_case_multipair_flow(&g, &pairs).unwrap();
        assert!(close(worst.objective, 0.5));
        assert!(worst.commodity_values.iter().all(|&v| v >= 0.5 - 1e-9));

        let split = UndirectedNetwork::from_edges(["a", "b", "c", "d"], &[("a", "b", 1.0), ("c", "d", 2.0)]).unwrap();
        let pairs = CommoditySet::new([("a", "b"), ("c", "d")]).unwrap();
        assert!(close(total_multipair_flow(&split, &pairs).unwrap().objective, 3.0));
        let pairs = CommoditySet::new([("a", "b"), ("a", "c")]).unwrap();
        assert_eq!(worst_case_multipair_flow(&split, &pairs).unwrap().objective, 0.0);

        let one = CommoditySet::new([("a", "d")]).unwrap();
        let single = single_pair_flow(&g, "a", "d").unwrap().objective;
        assert!(close(total_multipair_flow(&g, &one).unwrap().objective, single));
        assert!(close(worst_case_multipair_flow(&g, &one).unwrap().objective, single));
    }

    #[test]
    fn commodity_validation() {
        assert!(CommoditySet::new(Vec::<(&str, &str)>::new()).is_err());
        assert!(CommoditySet::new([("a", "a")]).is_err());
        let pairs = CommoditySet::new([("a", "b"), ("c", "d")]).unwrap();
        assert!(pairs.clone().with_weights(vec![0.5, 0.6]).is_err());
        assert!(pairs.with_weights(vec![0.25, 0.75]).is_ok());
        assert!(UserGroup::new(["a"]).is_err());
        assert!(UserGroup::new(["a", "b", "a"]).is_err());
        assert_eq!(UserGroup::new(["c", "a", "b"]).unwrap().pairs().len(), 3);
    }

    #[test]
    fn multipair_reports() {
        let edge = net(&["a", "b"], &[("e", "a", "b", ChannelSpec::explicit(0.3, 0.7))]);
        let pairs = CommoditySet::new([("a", "b")]).unwrap();
        let r = multipair_capacity(&edge, &pairs, MultiPairObjective::Total, &FrequencyMode::Optimize, 1.0).unwrap();
        assert!(close(r.lower_bound, 0.3));
        assert!(close(r.reported_upper, 0.7));
        let r = multipair_capacity(&edge, &pairs, MultiPairObjective::Total, &FrequencyMode::Optimize, 2.0).unwrap();
        assert!(close(r.reported_upper, 1.4));
        assert!(multipair_capacity(&edge, &pairs, MultiPairObjective::Total, &FrequencyMode::Optimize, 0.5).is_err());

        let optical = net(&["a", "b"], &[("e", "a", "b", ChannelSpec::lossy_optical(0.5))]);
        let r = multipair_capacity(&optical, &pairs, MultiPairObjective::Worst, &FrequencyMode::Optimize, 1.0).unwrap();
        assert!(close(r.lower_bound, r.reported_upper));

        let path = net(
            &["a", "b", "c", "d"],
            &[("ab", "a", "b", unit(1.0)), ("bc", "b", "c", unit(1.0)), ("cd", "c", "d", unit(1.0))],
        );
        let pairs = CommoditySet::new([("a", "c"), ("b", "d")]).unwrap();
        let mode = FrequencyMode::Fixed(path.graph().edges().iter().map(|e| (e.id.clone(), 1.0 / 3.0)).collect());
        let r = multipair_capacity(&path, &pairs, MultiPairObjective::Worst, &mode, 1.0).unwrap();
        assert!(close(r.lower_bound, 0.5 / 3.0));
        assert!(close(r.reported_upper, 0.5 / 3.0));
    }

    #[test]
    fn weighted_bounds() {
        let split = net(
            &["a", "b", "c", "d"],
            &[("ab", "a", "b", unit(1.0)), ("cd", "c", "d", unit(2.0))],
        );
        let pairs = CommoditySet::new([("a", "b"), ("c", "d")]).unwrap().with_weights(vec![0.5, 0.5]).unwrap();
        let uniform = FrequencyMode::uniform(&split);
        let upper = weighted_upper_polytope(&split, &pairs, Some(&[vec![0, 1]]), &uniform, 1.0).unwrap();
        assert!(close(upper, 0.5 * (0.5 + 1.0)));
        // with optimized frequencies the two pairs compete for channel uses
        let mode = FrequencyMode::Optimize;
        let f1 = scenario_flow(&split, &Scenario::pair("a", "b").unwrap(), &mode, BoundSide::Upper).unwrap().objective;
        let upper = weighted_upper_polytope(&split, &pairs, Some(&[vec![0, 1]]), &mode, 1.0).unwrap();
        assert!(close(upper, 1.0));
        assert!(weighted_upper_polytope(&split, &pairs, Some(&[vec![0]]), &mode, 1.0).is_err());

        let one = CommoditySet::new([("a", "b")]).unwrap().with_weights(vec![1.0]).unwrap();
        assert!(close(weighted_upper_polytope(&split, &one, None, &mode, 1.0).unwrap(), f1));
        assert!(close(weighted_lower_timeshare(&split, &one, &mode).unwrap(), f1));

        let degenerate = CommoditySet::new([("a", "b"), ("c", "d")]).unwrap().with_weights(vec![1.0, 0.0]).unwrap();
        assert!(close(weighted_lower_timeshare(&split, &degenerate, &mode).unwrap(), f1));
        assert!(close(weighted_upper_polytope(&split, &degenerate, None, &mode, 1.0).unwrap(), f1));

        let sym = net(&["a", "b", "c"], &[("ab", "a", "b", unit(1.0)), ("bc", "b", "c", unit(1.0))]);
        let pairs = CommoditySet::new([("a", "b"), ("c", "b")]).unwrap().with_weights(vec![0.5, 0.5]).unwrap();
        let f = scenario_flow(&sym, &Scenario::pair("a", "b").unwrap(), &mode, BoundSide::Lower).unwrap().objective;
        assert!(close(weighted_lower_timeshare(&sym, &pairs, &mode).unwrap(), 0.5 * f));
        assert!(weighted_lower_timeshare(&sym, &CommoditySet::new([("a", "b")]).unwrap(), &mode).is_err());
    }

    #[test]
    fn default_subset_family() {
        assert_eq!(default_subsets(3).len(), 4);
        assert_eq!(default_subsets(6).len(), 64 - 6 - 1);
        assert_eq!(default_subsets(7).len(), 21 + 1);
    }

    #[test]
    fn steiner_examples() {
        let tri = triangle().undirected(BoundSide::Upper).unwrap();
        let all = UserGroup::new(["a", "b", "c"]).unwrap();
        let sol = steiner_connectivity_flow(&tri, &all).unwrap();
        assert!(close(sol.objective, 2.0));
        sol.check(1e-9).unwrap();
        let two = UserGroup::new(["a", "b"]).unwrap();
        assert!(close(steiner_connectivity_flow(&tri, &two).unwrap().objective, 2.0));

        let star = UndirectedNetwork::from_edges(
            ["r", "x", "y", "z"],
            &[("r", "x", 1.0), ("r", "y", 1.0), ("r", "z", 1.0)],
        )
        .unwrap();
        let s = UserGroup::new(["x", "y", "z"]).unwrap();
        assert!(close(steiner_connectivity_flow(&star, &s).unwrap().objective, 1.0));
    }

    #[test]
    fn multipartite_reports() {
        let tri = triangle();
        let all = UserGroup::new(["a", "b", "c"]).unwrap();
        let fixed = FrequencyMode::Fixed(tri.graph().edges().iter().map(|e| (e.id.clone(), 1.0)).collect());
        assert!(multipartite_capacity(&tri, &all, &fixed).is_err());
        let r = multipartite_capacity(&tri, &all, &FrequencyMode::PerChannel).unwrap();
        assert!(close(r.lower_bound, 1.0) && close(r.upper_bound_lp_value, 2.0));
        let r = multipartite_capacity(&tri, &all, &FrequencyMode::uniform(&tri)).unwrap();
        assert!(close(r.lower_bound, 1.0 / 3.0) && close(r.upper_bound_lp_value, 2.0 / 3.0));

        let optical = net(&["a", "b"], &[("e", "a", "b", ChannelSpec::lossy_optical(0.5))]);
        let r = multipartite_capacity(&optical, &UserGroup::new(["a", "b"]).unwrap(), &FrequencyMode::Optimize).unwrap();
        assert!(close(r.lower_bound, 0.5 * r.reported_upper));

        let empty = net(&["a", "b", "c"], &[]);
        let r = multipartite_capacity(&empty, &all, &FrequencyMode::Optimize).unwrap();
        assert_eq!((r.lower_bound, r.reported_upper), (0.0, 0.0));
    }

    #[test]
    fn dimension_examples() {
        let sizes = LpSizes {
            uedges: 4,
            edges: 5,
            pairs: 2,
            group_size: 3,
        };
        for (family, expect) in [
            (LpFamily::SinglePair, 17),
            (LpFamily::Total, 30),
            (LpFamily::Worst, 33),
            (LpFamily::Steiner, 50),
        ] {
            let audit = lp_dimension_audit(family, sizes).unwrap();
            assert_eq!((audit.predicted, audit.built), (expect, expect), "{family:?}");
        }
        assert!(lp_dimension_audit(LpFamily::SinglePair, LpSizes { uedges: 3, edges: 7, ..sizes }).is_err());
    }
}
