//! Phase I: clique factors of a random layer and packing bounded
//! components into them.

pub mod cell;
pub mod factors;
pub mod hypergraph;
pub mod layer;
pub mod merge;

pub use cell::{pack_into_clique, pack_into_clique_partial, CellPacking};
pub use factors::{clique_factor_collection, CliqueFactor, FactorCollection, FactorOptions};
pub use hypergraph::{enumerate_cliques, proper_hyperedge_coloring, CliqueHypergraph, Coloring, Hypergraph};
pub use layer::{pack_layer, spread_tallies, LayerOutcome, LayerPlan, SpreadCaps, SpreadReport, SpreadTallies};
pub use merge::{merge_small_graphs, MergeParams, Merged};
