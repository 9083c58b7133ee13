use std::collections::BTreeMap;

use crate::channel::{BoundSide, ChannelSpec};
use crate::error::{Error, Result};
use crate::graph::{build_undirected, DirectedEdge, DirectedNetwork, UndirectedNetwork};

/// A channel graph together with the channel behind every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumNetwork {
    graph: DirectedNetwork,
    channels: BTreeMap<String, ChannelSpec>,
}

impl QuantumNetwork {
    pub fn new(graph: DirectedNetwork, channels: BTreeMap<String, ChannelSpec>) -> Result<Self> {
        for e in graph.edges() {
            channels
                .get(&e.id)
                .ok_or_else(|| Error::MissingCapacity(e.id.clone()))?
                .validate()?;
        }
        if channels.len() != graph.edges().len() {
            let stray = channels.keys().find(|k| graph.edge(k).is_none()).cloned();
            return Err(Error::invalid(format!(
                "channel `{}` has no edge",
                stray.unwrap_or_default()
            )));
        }
        Ok(QuantumNetwork { graph, channels })
    }

    /// Builds a network from raw channel records. Channels sharing an ordered
    /// vertex pair are merged into one explicit channel whose lower and upper
    /// values are the sums of the parts; the merged edge keeps the first id.
    pub fn ingest<I, S>(vertices: I, channels: Vec<(String, String, String, ChannelSpec)>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut order: Vec<(String, String)> = Vec::new();
        let mut groups: BTreeMap<(String, String), Vec<(String, ChannelSpec)>> = BTreeMap::new();
        for (id, tail, head, spec) in channels {
            spec.validate()?;
            let key = (tail, head);
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            groups.entry(key).or_default().push((id, spec));
        }
        let mut edges = Vec::new();
        let mut specs = BTreeMap::new();
        for key in order {
            let mut group = groups.remove(&key).unwrap_or_default();
            let (id, spec) = if group.len() == 1 {
                group.pop().unwrap_or_else(|| unreachable!())
            } else {
                let id = group[0].0.clone();
                let mut lower = 0.0;
                let mut upper = 0.0;
                for (_, s) in &group {
                    lower += s.lower_capacity()?;
                    upper += s.upper_bound()?;
                }
                (id, ChannelSpec::explicit(lower, upper))
            };
            if specs.insert(id.clone(), spec).is_some() {
                return Err(Error::invalid(format!("duplicate channel id `{id}`")));
            }
            edges.push(DirectedEdge::new(id, key.0, key.1));
        }
        QuantumNetwork::new(DirectedNetwork::new(vertices, edges)?, specs)
    }

    pub fn graph(&self) -> &DirectedNetwork {
        &self.graph
    }

    pub fn channels(&self) -> &BTreeMap<String, ChannelSpec> {
        &self.channels
    }

    pub fn channel(&self, id: &str) -> Option<&ChannelSpec> {
        self.channels.get(id)
    }

    /// Per-edge capacity for one side of the bounds.
    pub fn capacities(&self, side: BoundSide) -> Result<BTreeMap<String, f64>> {
        self.channels
            .iter()
            .map(|(id, spec)| Ok((id.clone(), spec.capacity(side)?)))
            .collect()
    }

    /// The undirected reduction with `c'` equal to the summed per-use channel
    /// capacities (every channel used once).
    pub fn undirected(&self, side: BoundSide) -> Result<UndirectedNetwork> {
        build_undirected(&self.graph, &self.capacities(side)?)
    }

    pub fn is_distillable(&self) -> bool {
        self.channels.values().all(ChannelSpec::is_distillable)
    }
}
