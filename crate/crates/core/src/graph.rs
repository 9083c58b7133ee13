//! Network graphs and the reductions between them.
//!
//! A [`DirectedNetwork`] holds one record per quantum channel. Capacity
//! analysis happens on the [`UndirectedNetwork`], where the two directions of
//! a vertex pair are merged into one edge whose capacity is the sum of the
//! channel capacities. Integer constructions (edge-disjoint paths, Steiner
//! tree packings) live on a [`UnitMultigraph`], which replaces every
//! undirected edge by `floor(scale * capacity)` parallel unit edges, each one
//! standing for a single Bell pair.
//!
//! Vertex identifiers are opaque, case-sensitive strings. All vertex lists
//! are kept in lexicographic order, and that order is what every
//! deterministic tie-break downstream refers to.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when flooring scaled capacities, so that `0.5 * 6` lands on 3
/// even when the product is computed as `2.9999999999`.
pub(crate) const FLOOR_SLACK: f64 = 1e-9;

pub(crate) fn snapped_floor(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= FLOOR_SLACK * x.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        x.floor().max(0.0) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub id: String,
    pub tail: String,
    pub head: String,
}

impl DirectedEdge {
    pub fn new(id: impl Into<String>, tail: impl Into<String>, head: impl Into<String>) -> Self {
        DirectedEdge {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
        }
    }
}

/// The channel graph: vertices plus one directed edge per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedNetwork {
    vertices: Vec<String>,
    edges: Vec<DirectedEdge>,
}

impl DirectedNetwork {
    /// Builds a network, rejecting self-loops, duplicate edge ids, dangling
    /// endpoints and parallel edges on the same ordered pair.
    pub fn new<I, S>(vertices: I, edges: Vec<DirectedEdge>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for v in vertices {
            let v = v.into();
            if !set.insert(v.clone()) {
                return Err(Error::invalid(format!("duplicate vertex `{v}`")));
            }
        }
        let mut ids = BTreeSet::new();
        let mut ordered = BTreeSet::new();
        for e in &edges {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::invalid(format!("duplicate edge id `{}`", e.id)));
            }
            for end in [&e.tail, &e.head] {
                if !set.contains(end) {
                    return Err(Error::UnknownVertex(end.clone()));
                }
            }
            if e.tail == e.head {
                return Err(Error::invalid(format!("edge `{}` is a self-loop", e.id)));
            }
            if !ordered.insert((e.tail.as_str(), e.head.as_str())) {
                return Err(Error::invalid(format!(
                    "parallel edge `{}` on {}->{}; merge parallel channels first",
                    e.id, e.tail, e.head
                )));
            }
        }
        Ok(DirectedNetwork {
            vertices: set.into_iter().collect(),
            edges,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[DirectedEdge] {
        &self.edges
    }

    pub fn edge(&self, id: &str) -> Option<&DirectedEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn contains_vertex(&self, v: &str) -> bool {
        self.vertices.binary_search_by(|x| x.as_str().cmp(v)).is_ok()
    }

    /// The same network with every edge reversed.
    pub fn reversed(&self) -> DirectedNetwork {
        DirectedNetwork {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| DirectedEdge::new(e.id.clone(), e.head.clone(), e.tail.clone()))
                .collect(),
        }
    }
}

/// One edge of the undirected reduction. `ends.0 < ends.1` index into the
/// sorted vertex list; `members` are the ids of the directed channels that
/// were merged into it.
#[derive(Debug, Clone, PartialEq)]
pub struct UEdge {
    pub uid: usize,
    pub ends: (usize, usize),
    pub capacity: f64,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedNetwork {
    vertices: Vec<String>,
    uedges: Vec<UEdge>,
}

impl UndirectedNetwork {
    /// Builds an undirected network directly from `(a, b, capacity)` triples.
    /// Repeated unordered pairs are merged by summing.
    pub fn from_edges<I, S>(vertices: I, edges: &[(&str, &str, f64)]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vertices: BTreeSet<String> = vertices.into_iter().map(Into::into).collect();
        let vertices: Vec<String> = vertices.into_iter().collect();
        let mut merged: BTreeMap<(usize, usize), (f64, Vec<String>)> = BTreeMap::new();
        for (n, &(a, b, c)) in edges.iter().enumerate() {
            let ia = index_of(&vertices, a)?;
            let ib = index_of(&vertices, b)?;
            if ia == ib {
                return Err(Error::invalid(format!("self-loop on `{a}`")));
            }
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::invalid(format!("capacity {c} on {{{a},{b}}}")));
            }
            let entry = merged
                .entry((ia.min(ib), ia.max(ib)))
                .or_insert((0.0, Vec::new()));
            entry.0 += c;
            entry.1.push(format!("e{n}"));
        }
        let uedges = merged
            .into_iter()
            .enumerate()
            .map(|(uid, (ends, (capacity, members)))| UEdge {
                uid,
                ends,
                capacity,
                members,
            })
            .collect();
        Ok(UndirectedNetwork { vertices, uedges })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn uedges(&self) -> &[UEdge] {
        &self.uedges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn index(&self, v: &str) -> Result<usize> {
        index_of(&self.vertices, v)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.uedges.iter().map(|e| e.capacity).collect()
    }

    pub fn total_capacity(&self) -> f64 {
        self.uedges.iter().map(|e| e.capacity).sum()
    }

    /// Same topology with new per-uedge capacities.
    pub fn with_capacities(&self, caps: &[f64]) -> Result<Self> {
        if caps.len() != self.uedges.len() {
            return Err(Error::invalid(format!(
                "{} capacities for {} edges",
                caps.len(),
                self.uedges.len()
            )));
        }
        let mut out = self.clone();
        for (e, &c) in out.uedges.iter_mut().zip(caps) {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::invalid(format!("capacity {c}")));
            }
            e.capacity = c;
        }
        Ok(out)
    }

    /// Same topology with every capacity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let caps: Vec<f64> = self.uedges.iter().map(|e| e.capacity * factor).collect();
        self.with_capacities(&caps)
    }

    /// Adjacency list: for each vertex, `(neighbour, uid)` sorted by neighbour.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.uedges {
            adj[e.ends.0].push((e.ends.1, e.uid));
            adj[e.ends.1].push((e.ends.0, e.uid));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub(crate) fn cut_of_mask(&self, mask: u64) -> f64 {
        self.uedges
            .iter()
            .filter(|e| ((mask >> e.ends.0) & 1) != ((mask >> e.ends.1) & 1))
            .map(|e| e.capacity)
            .sum()
    }
}

pub(crate) fn index_of(vertices: &[String], v: &str) -> Result<usize> {
    vertices
        .binary_search_by(|x| x.as_str().cmp(v))
        .map_err(|_| Error::UnknownVertex(v.to_string()))
}

/// Merges anti-parallel channels into single undirected edges,
/// `c'({v,w}) = c(vw) + c(wv)`.
pub fn build_undirected(g: &DirectedNetwork, caps: &BTreeMap<String, f64>) -> Result<UndirectedNetwork> {
    let vertices = g.vertices().to_vec();
    let mut merged: BTreeMap<(usize, usize), (f64, Vec<String>)> = BTreeMap::new();
    for e in g.edges() {
        let c = *caps
            .get(&e.id)
            .ok_or_else(|| Error::MissingCapacity(e.id.clone()))?;
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid(format!("capacity {c} on edge `{}`", e.id)));
        }
        let a = index_of(&vertices, &e.tail)?;
        let b = index_of(&vertices, &e.head)?;
        let entry = merged.entry((a.min(b), a.max(b))).or_insert((0.0, Vec::new()));
        entry.0 += c;
        entry.1.push(e.id.clone());
    }
    let uedges = merged
        .into_iter()
        .enumerate()
        .map(|(uid, (ends, (capacity, mut members)))| {
            members.sort();
            UEdge {
                uid,
                ends,
                capacity,
                members,
            }
        })
        .collect();
    Ok(UndirectedNetwork { vertices, uedges })
}

/// A unit-capacity edge of the Bell-pair multigraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MEdge {
    pub mid: usize,
    pub ends: (usize, usize),
    /// uid of the undirected edge this copy came from
    pub uedge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitMultigraph {
    vertices: Vec<String>,
    medges: Vec<MEdge>,
}

impl UnitMultigraph {
    /// Builds a multigraph from explicit endpoint pairs (by name); each pair
    /// becomes one unit edge.
    pub fn from_pairs<I, S>(vertices: I, pairs: &[(&str, &str)]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vertices: BTreeSet<String> = vertices.into_iter().map(Into::into).collect();
        let vertices: Vec<String> = vertices.into_iter().collect();
        let mut uedge_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut medges = Vec::with_capacity(pairs.len());
        for (mid, &(a, b)) in pairs.iter().enumerate() {
            let ia = index_of(&vertices, a)?;
            let ib = index_of(&vertices, b)?;
            if ia == ib {
                return Err(Error::invalid(format!("self-loop on `{a}`")));
            }
            let ends = (ia.min(ib), ia.max(ib));
            let next = uedge_of.len();
            let uedge = *uedge_of.entry(ends).or_insert(next);
            medges.push(MEdge { mid, ends, uedge });
        }
        Ok(UnitMultigraph { vertices, medges })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn medges(&self) -> &[MEdge] {
        &self.medges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn index(&self, v: &str) -> Result<usize> {
        index_of(&self.vertices, v)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    /// The same vertex set with no edges.
    pub fn without_edges(&self) -> Self {
        UnitMultigraph {
            vertices: self.vertices.clone(),
            medges: Vec::new(),
        }
    }

    /// Number of parallel medges between `a` and `b`.
    pub fn multiplicity(&self, a: usize, b: usize) -> usize {
        let ends = (a.min(b), a.max(b));
        self.medges.iter().filter(|m| m.ends == ends).count()
    }
}

/// Replaces each undirected edge by `floor(scale * capacity)` parallel unit
/// edges. Medge ids are assigned in uedge order.
pub fn floor_multigraph(gp: &UndirectedNetwork, scale: f64) -> Result<UnitMultigraph> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid(format!("multigraph scale must be positive, got {scale}")));
    }
    let mut medges = Vec::new();
    for e in gp.uedges() {
        for _ in 0..snapped_floor(scale * e.capacity) {
            medges.push(MEdge {
                mid: medges.len(),
                ends: e.ends,
                uedge: e.uid,
            });
        }
    }
    Ok(UnitMultigraph {
        vertices: gp.vertices().to_vec(),
        medges,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutSpec {
    pub side: BTreeSet<String>,
    pub crossing_uedges: Vec<usize>,
    pub capacity: f64,
}

/// Capacity of the cut between `side` and its complement.
pub fn cut_capacity(gp: &UndirectedNetwork, side: &BTreeSet<String>) -> Result<CutSpec> {
    if side.is_empty() || side.len() >= gp.vertex_count() {
        return Err(Error::invalid("cut side must be a nonempty proper subset"));
    }
    let mut inside = vec![false; gp.vertex_count()];
    for v in side {
        inside[gp.index(v)?] = true;
    }
    if inside.iter().all(|&b| b) {
        return Err(Error::invalid("cut side must be a nonempty proper subset"));
    }
    let crossing: Vec<usize> = gp
        .uedges()
        .iter()
        .filter(|e| inside[e.ends.0] != inside[e.ends.1])
        .map(|e| e.uid)
        .collect();
    let capacity = crossing.iter().map(|&u| gp.uedges()[u].capacity).sum();
    Ok(CutSpec {
        side: side.clone(),
        crossing_uedges: crossing,
        capacity,
    })
}
