//! JSON network documents and flow exports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::network::QuantumNetwork;
use crate::programs::FlowSolution;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelRecord {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub channel: ChannelSpec,
}

/// On-disk form of a [`QuantumNetwork`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub version: u32,
    pub nodes: Vec<NodeRecord>,
    pub channels: Vec<ChannelRecord>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl NetworkDocument {
    pub fn from_network(net: &QuantumNetwork, metadata: BTreeMap<String, serde_json::Value>) -> Self {
        NetworkDocument {
            version: FORMAT_VERSION,
            nodes: net
                .graph()
                .vertices()
                .iter()
                .map(|id| NodeRecord { id: id.clone() })
                .collect(),
            channels: net
                .graph()
                .edges()
                .iter()
                .map(|e| ChannelRecord {
                    id: e.id.clone(),
                    tail: e.tail.clone(),
                    head: e.head.clone(),
                    channel: net.channels()[&e.id].clone(),
                })
                .collect(),
            metadata,
        }
    }

    /// Validates the document and builds the network. Channels sharing an
    /// ordered vertex pair are merged (see [`QuantumNetwork::ingest`]).
    pub fn to_network(&self) -> Result<QuantumNetwork> {
        if self.version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported document version {} (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &self.channels {
            if !seen.insert(c.id.as_str()) {
                return Err(Error::invalid(format!("duplicate channel id `{}`", c.id)));
            }
        }
        let mut nodes = BTreeSet::new();
        for n in &self.nodes {
            if !nodes.insert(n.id.as_str()) {
                return Err(Error::invalid(format!("duplicate node id `{}`", n.id)));
            }
        }
        QuantumNetwork::ingest(
            self.nodes.iter().map(|n| n.id.clone()),
            self.channels
                .iter()
                .map(|c| (c.id.clone(), c.tail.clone(), c.head.clone(), c.channel.clone()))
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed network document: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_else(|e| unreachable!("{e}"));
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcFlow {
    pub tail: String,
    pub head: String,
    pub flow: f64,
}

/// One commodity's nonzero arc flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTable {
    pub commodity: usize,
    pub source: String,
    pub sink: String,
    pub value: f64,
    pub arcs: Vec<ArcFlow>,
}

pub fn flow_tables(sol: &FlowSolution) -> Vec<FlowTable> {
    sol.commodities
        .iter()
        .enumerate()
        .map(|(i, c)| FlowTable {
            commodity: i,
            source: c.source.clone(),
            sink: c.sink.clone(),
            value: sol.commodity_values[i],
            arcs: sol
                .arcs(i)
                .into_iter()
                .map(|(a, b, flow)| ArcFlow {
                    tail: sol.vertices[a].clone(),
                    head: sol.vertices[b].clone(),
                    flow,
                })
                .collect(),
        })
        .collect()
}

/// `commodity,tail,head,flow` rows, one per nonzero arc.
pub fn flows_to_csv(sol: &FlowSolution) -> String {
    let mut out = String::from("commodity,tail,head,flow\n");
    for t in flow_tables(sol) {
        for a in &t.arcs {
            let _ = writeln!(out, "{},{},{},{}", t.commodity, a.tail, a.head, a.flow);
        }
    }
    out
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph with one labeled arc per nonzero commodity flow.
pub fn flows_to_dot(sol: &FlowSolution) -> String {
    let mut out = String::from("digraph flows {\n");
    for v in &sol.vertices {
        let _ = writeln!(out, "  {};", quoted(v));
    }
    for t in flow_tables(sol) {
        for a in &t.arcs {
            let _ = writeln!(
                out,
                "  {} -> {} [commodity={}, label=\"{}\"];",
                quoted(&a.tail),
                quoted(&a.head),
                t.commodity,
                a.flow
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BoundSide;
    use crate::programs::single_pair_flow;

    fn doc() -> NetworkDocument {
        NetworkDocument::from_json(
            r#"{
              "version": 1,
              "nodes": [{"id": "s"}, {"id": "a"}, {"id": "t"}],
              "channels": [
                {"id": "sa", "tail": "s", "head": "a", "channel": {"kind": "lossy_optical", "eta": 0.5}},
                {"id": "at", "tail": "a", "head": "t", "channel": {"kind": "explicit", "lower": 0.25, "upper": 0.5}}
              ],
              "metadata": {"source": "hand"}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let net = doc().to_network().unwrap();
        let emitted = NetworkDocument::from_network(&net, doc().metadata);
        let text = emitted.to_json();
        let back = NetworkDocument::from_json(&text).unwrap();
        assert_eq!(back, emitted);
        assert_eq!(back.to_network().unwrap(), net);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rejects_bad_documents() {
        let mut d = doc();
        d.version = 2;
        assert!(d.to_network().is_err());
        let mut d = doc();
        d.channels[1].id = "sa".into();
        assert!(d.to_network().is_err());
        let mut d = doc();
        d.channels[0].head = "nowhere".into();
        assert!(d.to_network().is_err());
        assert!(NetworkDocument::from_json(r#"{"version":1,"nodes":[],"channels":[],"extra":0}"#).is_err());
        assert!(NetworkDocument::from_json(
            r#"{"version":1,"nodes":[{"id":"a"},{"id":"b"}],"channels":[{"id":"x","tail":"a","head":"b","channel":{"kind":"bosonic","g":2}}]}"#
        )
        .is_err());
    }

    #[test]
    fn exports_agree_with_tables() {
        let gp = doc().to_network().unwrap().undirected(BoundSide::Lower).unwrap();
        let sol = single_pair_flow(&gp, "s", "t").unwrap();
        let csv = flows_to_csv(&sol);
        assert_eq!(csv, "commodity,tail,head,flow\n0,s,a,0.25\n0,a,t,0.25\n");
        let dot = flows_to_dot(&sol);
        assert!(dot.contains("\"s\" -> \"a\" [commodity=0, label=\"0.25\"];"));
        assert_eq!(flow_tables(&sol)[0].value, 0.25);
    }
}
