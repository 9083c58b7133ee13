//! Capacity bounds for quantum networks.
//!
//! Networks of quantum channels are reduced to undirected flow graphs whose
//! capacities come from per-channel capacity bounds. Linear programs over
//! those graphs bound single-pair, multi-pair and group entanglement rates;
//! [`routing`] turns their solutions into integer repeater protocols and
//! [`oracles`] cross-checks them by enumeration on small inputs.

pub mod channel;
pub mod error;
pub mod graph;
pub mod io;
pub mod lp;
pub mod netgen;
pub mod network;
pub mod oracles;
pub mod programs;
pub mod routing;

pub use channel::{BoundSide, ChannelSpec};
pub use error::{Error, Result};
pub use graph::{DirectedEdge, DirectedNetwork, UndirectedNetwork, UnitMultigraph};
pub use network::QuantumNetwork;
pub use programs::{BoundsReport, CommoditySet, FlowSolution, FrequencyMode, MultiPairObjective, Scenario, UserGroup};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/single-pair.md")]
    mod single_pair {}
    #[doc = include_str!("../../../book/src/multi-pair.md")]
    mod multi_pair {}
    #[doc = include_str!("../../../book/src/multipartite.md")]
    mod multipartite {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/repeater.md")]
    mod repeater {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
