//! Edge-disjoint packing of bounded-degree separable graphs into `K_n`.
//!
//! The host's edges are split at random into layers. Each graph is cut into
//! a small separator `S`, a 2-independent set `I`, and the bounded-size
//! components left over. The components are packed through clique factors
//! of a random layer, the separators are added greedily through reserved
//! vertex zones, and `I` is filled in last through perfect matchings in
//! auxiliary bipartite graphs. A separate verifier rechecks everything.

pub mod balance;
pub mod clique;
pub mod completion;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod instances;
pub mod ledger;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod slicer;
pub mod verify;

pub use balance::{balanced_partition, PartitionResult, WeightVector};
pub use embedding::{validate_embedding, CompleteHost, Embedding, HostEdges, Phase, Violation};
pub use error::Error;
pub use graph::{connected_components, Edge, Graph};
pub use instances::{InstanceGraph, InstanceSet};
pub use ledger::PackingLedger;
pub use pipeline::{run_pipeline, Family, RunConfig};
pub use report::PackingReport;
pub use scalar::Scalar;

/// Exact coordinates for the balancing steps of the pipeline.
pub type Rational = num_rational::Ratio<i64>;

pub type WeightVectorF64 = WeightVector<f64>;
pub type WeightVectorF32 = WeightVector<f32>;
pub type ExactWeightVector = WeightVector<Rational>;
pub type PartitionF64 = PartitionResult<f64>;
pub type ExactPartition = PartitionResult<Rational>;
