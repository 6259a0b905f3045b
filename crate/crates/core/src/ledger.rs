//! The global record of host edges already claimed by some embedding.

use std::collections::BTreeMap;

use bitvec::vec::BitVec;

use crate::embedding::{validate_embedding, Embedding, HostEdges};
use crate::error::LedgerError;
use crate::graph::{binomial2, ordered, pair_from_index, pair_index, Edge, Graph};

/// Used-edge set over `K_n` with per-vertex counters.
///
/// Edges live in a flat bitset indexed by [`pair_index`]. Every mutation goes
/// through a commit that checks all edges before touching any state, so a
/// failed commit leaves the ledger bit-identical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingLedger {
    host_size: usize,
    used: BitVec,
    used_count: usize,
    used_degree: Vec<u32>,
    tags: BTreeMap<String, Vec<u32>>,
}

impl PackingLedger {
    pub fn new(host_size: usize) -> Self {
        let mut used = BitVec::new();
        used.resize(binomial2(host_size), false);
        PackingLedger {
            host_size,
            used,
            used_count: 0,
            used_degree: vec![0; host_size],
            tags: BTreeMap::new(),
        }
    }

    pub fn host_size(&self) -> usize {
        self.host_size
    }

    #[inline]
    pub fn is_used(&self, u: usize, v: usize) -> bool {
        u != v && self.used[pair_index(u, v)]
    }

    pub fn used_count(&self) -> usize {
        self.used_count
    }

    pub fn used_degree(&self, v: usize) -> u32 {
        self.used_degree[v]
    }

    pub fn used_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.used.iter_ones().map(pair_from_index)
    }

    /// Inserts the image of every guest edge with both endpoints mapped.
    ///
    /// The embedding must be valid against `host`; on any conflict nothing is
    /// written and the first offending edge (in guest edge order) is reported.
    pub fn commit<H: HostEdges + ?Sized>(
        &mut self,
        guest: &Graph,
        e: &Embedding,
        host: &H,
    ) -> Result<usize, LedgerError> {
        let violations = validate_embedding(guest, host, e);
        if !violations.is_empty() {
            return Err(LedgerError::InvalidEmbedding(violations.len()));
        }
        let edges: Vec<Edge> = e.image_edges(guest).collect();
        self.commit_edges(&edges, host)
    }

    /// Inserts a batch of host pairs atomically.
    pub fn commit_edges<H: HostEdges + ?Sized>(
        &mut self,
        edges: &[Edge],
        host: &H,
    ) -> Result<usize, LedgerError> {
        let mut indices = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            let e = ordered(u, v);
            if u == v || e.1 >= self.host_size || !host.contains(u, v) {
                return Err(LedgerError::OutsideHost(e));
            }
            let idx = pair_index(u, v);
            if self.used[idx] {
                return Err(LedgerError::Conflict(e));
            }
            indices.push(idx);
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(LedgerError::Conflict(pair_from_index(w[0])));
        }
        for (idx, &(u, v)) in indices.into_iter().zip(edges) {
            self.used.set(idx, true);
            self.used_degree[u] += 1;
            self.used_degree[v] += 1;
        }
        self.used_count += edges.len();
        Ok(edges.len())
    }

    /// A named per-vertex counter family, created on first use.
    pub fn tag_counter(&mut self, name: &str) -> &mut Vec<u32> {
        let n = self.host_size;
        self.tags
            .entry(name.to_string())
            .or_insert_with(|| vec![0; n])
    }

    pub fn tag_counters(&self) -> &BTreeMap<String, Vec<u32>> {
        &self.tags
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{CompleteHost, Phase};

    fn triangle_at(a: usize, b: usize, c: usize) -> (Graph, Embedding) {
        (
            Graph::complete(3),
            Embedding::total(0, &[a, b, c], Phase::Phase3),
        )
    }

    #[test]
    fn edge_disjoint_triangles_commit() {
        let host = CompleteHost(5);
        let mut ledger = PackingLedger::new(5);
        let (g, e) = triangle_at(0, 1, 2);
        assert_eq!(ledger.commit(&g, &e, &host), Ok(3));
        let (g, e) = triangle_at(0, 3, 4);
        assert_eq!(ledger.commit(&g, &e, &host), Ok(3));
        assert_eq!(ledger.used_count(), 6);
        assert_eq!(ledger.used_degree(0), 4);
    }

    #[test]
    fn repeated_triangle_conflicts_and_leaves_state() {
        let host = CompleteHost(5);
        let mut ledger = PackingLedger::new(5);
        let (g, e) = triangle_at(0, 1, 2);
        ledger.commit(&g, &e, &host).unwrap();
        let before = ledger.clone();
        assert_eq!(
            ledger.commit(&g, &e, &host),
            Err(LedgerError::Conflict((0, 1)))
        );
        assert_eq!(ledger, before);
    }

    #[test]
    fn edgeless_guest_is_noop() {
        let mut ledger = PackingLedger::new(4);
        let g = Graph::empty(3);
        let e = Embedding::total(0, &[0, 1, 2], Phase::Phase3);
        assert_eq!(ledger.commit(&g, &e, &CompleteHost(4)), Ok(0));
        assert_eq!(ledger.used_count(), 0);
    }

    #[test]
    fn restricted_host_rejects_outside_edges() {
        let host = Graph::path(4);
        let mut ledger = PackingLedger::new(4);
        assert_eq!(
            ledger.commit_edges(&[(0, 1), (0, 2)], &host),
            Err(LedgerError::OutsideHost((0, 2)))
        );
        assert_eq!(ledger.used_count(), 0);
    }

    #[test]
    fn used_edges_roundtrip() {
        let mut ledger = PackingLedger::new(6);
        ledger
            .commit_edges(&[(4, 1), (2, 5), (0, 3)], &CompleteHost(6))
            .unwrap();
        let mut got: Vec<Edge> = ledger.used_edges().collect();
        got.sort_unstable();
        assert_eq!(got, vec![(0, 3), (1, 4), (2, 5)]);
    }
}
