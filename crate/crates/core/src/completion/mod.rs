//! Phases II and III: separators through the zones, then the 2-independent
//! sets through perfect matchings in auxiliary bipartite graphs.

pub mod matching;
pub mod resilience;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, Phase};
use crate::error::CompletionError;
use crate::graph::{binomial2, pair_index, Edge};
use crate::instances::InstanceSet;
use crate::ledger::PackingLedger;
use crate::rng::stream;
use crate::slicer::SlicedHost;

pub use matching::{
    build_aux_bipartite, edge_disjoint_perfect_matchings, filter_eligible, hopcroft_karp, max_matching,
    reference_matching, AuxBipartite, MatchingCollection,
};
pub use resilience::{estimate_resilience, ResilienceRow, ResilienceStats};

/// Runtime checks that must read zero after a successful run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionCounters {
    pub zone_load_violations: usize,
    pub eligibility_conflicts: usize,
}

/// Everything the later phases read and write.
#[derive(Clone, Debug)]
pub struct PhaseState {
    pub host: SlicedHost,
    pub instances: InstanceSet,
    /// Per instance; grows from the Phase I map to the full embedding.
    pub embeddings: Vec<Embedding>,
    /// Layer `k >= 1` each instance was batched into.
    pub layer_of_instance: Vec<usize>,
    pub ledger: PackingLedger,
    /// Separator images carried by each zone vertex.
    pub zone_load: Vec<u32>,
    pub assertions: AssertionCounters,
}

impl PhaseState {
    pub fn new(host: SlicedHost, instances: InstanceSet) -> Self {
        let n = host.n();
        let embeddings = instances
            .instances
            .iter()
            .enumerate()
            .map(|(i, inst)| Embedding::new(i, inst.graph.vertex_count(), Phase::Phase1))
            .collect();
        let t = instances.instances.len();
        PhaseState {
            host,
            instances,
            embeddings,
            layer_of_instance: vec![0; t],
            ledger: PackingLedger::new(n),
            zone_load: vec![0; n],
            assertions: AssertionCounters::default(),
        }
    }

    /// Instances by decreasing edge count, ties by index.
    pub fn processing_order(&self, ids: &[usize]) -> Vec<usize> {
        let mut order = ids.to_vec();
        order.sort_by_key(|&i| (std::cmp::Reverse(self.instances.instances[i].graph.edge_count()), i));
        order
    }

    pub fn zone_cap(&self) -> usize {
        self.host.constants.zone_cap()
    }

    /// Post-hoc recount of the zone loads from the embeddings themselves.
    pub fn recount_zone_violations(&self) -> usize {
        let n = self.host.n();
        let mut load = vec![0usize; n];
        for (inst, e) in self.instances.instances.iter().zip(&self.embeddings) {
            for &v in &inst.separator {
                if let Some(x) = e.get(v) {
                    load[x] += 1;
                }
            }
        }
        load.iter().filter(|&&l| l > self.zone_cap()).count()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeparatorStats {
    pub embedded: usize,
    pub max_zone_load: u32,
}

/// Embeds the separator of every instance batched into layer `k`, vertex by
/// vertex, into the zone of layer `k`. A candidate must be joined to the
/// images of the already-embedded neighbours by unused edges of layer `k`,
/// must not already be used by the instance, and must have room under the
/// zone cap. The least-loaded candidate wins, then the smallest index.
pub fn embed_separators(
    state: &mut PhaseState,
    k: usize,
    batch: &[usize],
) -> Result<SeparatorStats, CompletionError> {
    let cap = state.zone_cap() as u32;
    let zone: Vec<usize> = state.host.zone(k).to_vec();
    let mut stats = SeparatorStats::default();
    for i in state.processing_order(batch) {
        let separator = state.instances.instances[i].separator.clone();
        for v in separator {
            let graph = &state.instances.instances[i].graph;
            let e = &state.embeddings[i];
            let nbrs: Vec<usize> = graph.neighbors(v).iter().filter_map(|&u| e.get(u)).collect();
            let image = e.image_mask(state.host.n());
            let under_cap: Vec<usize> = zone.iter().copied().filter(|&z| state.zone_load[z] < cap).collect();
            let unused_by_instance: Vec<usize> = under_cap.iter().copied().filter(|&z| !image[z]).collect();
            let adjacent: Vec<usize> = unused_by_instance
                .iter()
                .copied()
                .filter(|&z| nbrs.iter().all(|&y| state.host.layer_of(z, y) == Some(k)))
                .collect();
            let free: Vec<usize> = adjacent
                .iter()
                .copied()
                .filter(|&z| nbrs.iter().all(|&y| !state.ledger.is_used(z, y)))
                .collect();
            let Some(&z) = free.iter().min_by_key(|&&z| (state.zone_load[z], z)) else {
                return Err(CompletionError::NoCandidate {
                    instance: i,
                    vertex: v,
                    trace: format!(
                        "zone {}, under cap {}, unused by instance {}, adjacent {}, edges free {}",
                        zone.len(),
                        under_cap.len(),
                        unused_by_instance.len(),
                        adjacent.len(),
                        free.len()
                    ),
                });
            };
            let edges: Vec<Edge> = nbrs.iter().map(|&y| (z, y)).collect();
            state.ledger.commit_edges(&edges, &state.host.phase2_view(k))?;
            state.embeddings[i].set(v, z);
            state.embeddings[i].phase = Phase::Phase2;
            state.zone_load[z] += 1;
            if state.zone_load[z] > cap {
                state.assertions.zone_load_violations += 1;
            }
            stats.embedded += 1;
            stats.max_zone_load = stats.max_zone_load.max(state.zone_load[z]);
        }
        state.embeddings[i].phase = Phase::Phase2;
    }
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub max_vertex: u32,
    pub median_vertex: f64,
    pub max_pair: u32,
    pub vertex_cap: f64,
    pub pair_cap: f64,
    pub violations: usize,
    /// Per host vertex.
    #[serde(skip)]
    pub vertex_counts: Vec<u32>,
}

/// Counts, per host vertex and per pair, the instances whose set
/// `g(N(I)) ∪ (V \ Im g)` contains it. Caps are `slack γ^0.9 n` and
/// `slack γ^1.9 n`.
pub fn check_balance(state: &PhaseState, slack: f64) -> BalanceReport {
    let n = state.host.n();
    let mut vertex = vec![0u32; n];
    let mut pairs = vec![0u32; binomial2(n)];
    for (inst, e) in state.instances.instances.iter().zip(&state.embeddings) {
        let mut hit = vec![false; n];
        let image = e.image_mask(n);
        for x in 0..n {
            hit[x] = !image[x];
        }
        for &v in &inst.two_independent {
            for &u in inst.graph.neighbors(v) {
                if let Some(x) = e.get(u) {
                    hit[x] = true;
                }
            }
        }
        let set: Vec<usize> = (0..n).filter(|&x| hit[x]).collect();
        for (a, &x) in set.iter().enumerate() {
            vertex[x] += 1;
            for &y in &set[a + 1..] {
                pairs[pair_index(x, y)] += 1;
            }
        }
    }
    let gamma = state.host.constants.gamma;
    let vertex_cap = slack * gamma.powf(0.9) * n as f64;
    let pair_cap = slack * gamma.powf(1.9) * n as f64;
    let mut sorted = vertex.clone();
    sorted.sort_unstable();
    let median_vertex = match sorted.len() {
        0 => 0.0,
        len if len % 2 == 1 => sorted[len / 2] as f64,
        len => (sorted[len / 2 - 1] + sorted[len / 2]) as f64 / 2.0,
    };
    let max_pair = pairs.iter().copied().max().unwrap_or(0);
    let violations = vertex.iter().filter(|&&c| c as f64 > vertex_cap).count()
        + pairs.iter().filter(|&&c| c as f64 > pair_cap).count();
    BalanceReport {
        max_vertex: sorted.last().copied().unwrap_or(0),
        median_vertex,
        max_pair,
        vertex_cap,
        pair_cap,
        violations,
        vertex_counts: vertex,
    }
}

#[derive(Clone, Debug)]
pub struct CompletionOptions {
    /// Matchings to collect per instance; `None` means `max(1, round(γ^1.2 n))`.
    pub matchings: Option<usize>,
    /// Failed attempts allowed per position before giving up.
    pub retries: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompletionStats {
    pub requested: usize,
    /// Collection size found for each instance, by instance index.
    pub collection_sizes: Vec<usize>,
    pub retries: usize,
    pub rollbacks: usize,
}

/// Extends one instance through a uniformly chosen eligible perfect matching.
fn complete_one<R: Rng>(
    state: &mut PhaseState,
    i: usize,
    requested: usize,
    rng: &mut R,
) -> Result<usize, CompletionError> {
    let inst = &state.instances.instances[i];
    let aux = build_aux_bipartite(&state.host, &inst.graph, &inst.two_independent, &state.embeddings[i])?;
    let eligible = filter_eligible(&aux, &state.ledger);
    let collection = edge_disjoint_perfect_matchings(&eligible, requested);
    if collection.matchings.is_empty() {
        return Err(CompletionError::Shortfall {
            found: 0,
            wanted: requested,
        });
    }
    let pick = &collection.matchings[rng.gen_range(0..collection.matchings.len())];
    let mut edges = Vec::new();
    let mut e = state.embeddings[i].clone();
    for (l, &r) in pick.iter().enumerate() {
        let x = eligible.right[r];
        e.set(eligible.left_vertices[l], x);
        edges.extend(eligible.left[l].iter().map(|&y| (y, x)));
    }
    if let Err(err) = state.ledger.commit_edges(&edges, &state.host.phase3_view()) {
        state.assertions.eligibility_conflicts += 1;
        return Err(err.into());
    }
    e.phase = Phase::Phase3;
    state.embeddings[i] = e;
    Ok(collection.matchings.len())
}

/// Phase III over all instances, by decreasing edge count. When an instance
/// has no eligible perfect matching, the last few completed instances are
/// rolled back and redone with fresh choices, more of them each time.
pub fn complete_embeddings(
    state: &mut PhaseState,
    opts: &CompletionOptions,
) -> Result<CompletionStats, CompletionError> {
    let n = state.host.n();
    let gamma = state.host.constants.gamma;
    let requested = opts
        .matchings
        .unwrap_or_else(|| (gamma.powf(1.2) * n as f64).round() as usize)
        .max(1);
    let t = state.instances.instances.len();
    let order = state.processing_order(&(0..t).collect::<Vec<_>>());
    let mut stats = CompletionStats {
        requested,
        collection_sizes: vec![0; t],
        ..CompletionStats::default()
    };
    let mut snapshots: Vec<(PackingLedger, Embedding)> = Vec::new();
    let mut failures = vec![0usize; order.len()];
    let mut attempt = 0u64;
    let mut pos = 0;
    while pos < order.len() {
        let i = order[pos];
        if snapshots.len() == pos {
            snapshots.push((state.ledger.clone(), state.embeddings[i].clone()));
        }
        let mut rng = stream(opts.seed, "phase3", attempt);
        attempt += 1;
        match complete_one(state, i, requested, &mut rng) {
            Ok(found) => {
                stats.collection_sizes[i] = found;
                pos += 1;
            }
            Err(CompletionError::Shortfall { .. }) | Err(CompletionError::Ledger(_)) => {
                failures[pos] += 1;
                stats.retries += 1;
                if failures[pos] > opts.retries {
                    return Err(CompletionError::CompletionFailed(i));
                }
                let back = failures[pos].min(pos);
                let target = pos - back;
                state.ledger = snapshots[target].0.clone();
                for p in target..=pos {
                    if p < snapshots.len() {
                        state.embeddings[order[p]] = snapshots[p].1.clone();
                    }
                }
                snapshots.truncate(target);
                if back > 0 {
                    stats.rollbacks += 1;
                }
                pos = target;
            }
            Err(other) => return Err(other),
        }
    }
    Ok(stats)
}
