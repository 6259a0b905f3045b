//! Independent re-verification of a claimed packing.
//!
//! Nothing here reads pipeline bookkeeping: the checks work from the guests,
//! the host edge set and the final vertex maps alone.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, HostEdges};
use crate::graph::{binomial2, ordered, Edge, Graph};
use crate::instances::InstanceGraph;
use crate::slicer::SlicedHost;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    CountMismatch { guests: usize, embeddings: usize },
    OrderMismatch { instance: usize, guest: usize, map: usize },
    Unmapped { instance: usize, vertex: usize },
    OutOfRange { instance: usize, vertex: usize, image: usize },
    NonInjective { instance: usize, first: usize, second: usize, image: usize },
    MissingHostEdge { instance: usize, guest: Edge, host: Edge },
    Overlap { edge: Edge, first: usize, second: usize },
    WrongLayer { instance: usize, guest: Edge, host: Edge, expected: String },
    SpreadMismatch { layer: usize, counter: String, reported: u32, recomputed: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub used_edges: usize,
    pub density: f64,
    pub findings: Vec<Finding>,
}

/// Checks that every embedding is total, injective and edge-preserving into
/// `host`, and that the images are pairwise edge-disjoint.
pub fn verify_packing<H: HostEdges + ?Sized>(host: &H, guests: &[Graph], embeddings: &[Embedding]) -> VerificationReport {
    let n = host.order();
    let mut findings = Vec::new();
    if guests.len() != embeddings.len() {
        findings.push(Finding::CountMismatch {
            guests: guests.len(),
            embeddings: embeddings.len(),
        });
    }
    let mut owner: HashMap<Edge, usize> = HashMap::new();
    let mut overlaps = Vec::new();
    for (i, (g, e)) in guests.iter().zip(embeddings).enumerate() {
        let map = e.map();
        if map.len() != g.vertex_count() {
            findings.push(Finding::OrderMismatch {
                instance: i,
                guest: g.vertex_count(),
                map: map.len(),
            });
            continue;
        }
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for (v, image) in map.iter().enumerate() {
            match *image {
                None => findings.push(Finding::Unmapped { instance: i, vertex: v }),
                Some(x) if x >= n => findings.push(Finding::OutOfRange {
                    instance: i,
                    vertex: v,
                    image: x,
                }),
                Some(x) => {
                    if let Some(&first) = seen.get(&x) {
                        findings.push(Finding::NonInjective {
                            instance: i,
                            first,
                            second: v,
                            image: x,
                        });
                    } else {
                        seen.insert(x, v);
                    }
                }
            }
        }
        for (u, v) in g.edges() {
            let (Some(x), Some(y)) = (map[u], map[v]) else { continue };
            if x >= n || y >= n || x == y {
                continue;
            }
            let h = ordered(x, y);
            if !host.contains(x, y) {
                findings.push(Finding::MissingHostEdge {
                    instance: i,
                    guest: (u, v),
                    host: h,
                });
            }
            if let Some(&first) = owner.get(&h) {
                overlaps.push(Finding::Overlap {
                    edge: h,
                    first,
                    second: i,
                });
            } else {
                owner.insert(h, i);
            }
        }
    }
    findings.extend(overlaps);
    let pairs = binomial2(n);
    VerificationReport {
        valid: findings.is_empty(),
        used_edges: owner.len(),
        density: if pairs == 0 { 0.0 } else { owner.len() as f64 / pairs as f64 },
        findings,
    }
}

/// Phase edge discipline: edges at `I` lie in layer 0; other edges at `S` lie
/// in the instance's layer and touch its zone; the rest lie in that layer
/// away from its zone.
pub fn verify_discipline(
    host: &SlicedHost,
    instances: &[InstanceGraph],
    layer_of_instance: &[usize],
    embeddings: &[Embedding],
) -> Vec<Finding> {
    let mut findings = Vec::new();
    for (i, (inst, e)) in instances.iter().zip(embeddings).enumerate() {
        let k = layer_of_instance[i];
        let zone: Vec<usize> = if k >= 1 && k <= host.zones.len() {
            host.zones[k - 1].clone()
        } else {
            Vec::new()
        };
        let in_zone = |x: usize| zone.contains(&x);
        let in_i = |v: usize| inst.two_independent.contains(&v);
        let in_s = |v: usize| inst.separator.contains(&v);
        for (u, v) in inst.graph.edges() {
            let (Some(x), Some(y)) = (e.get(u), e.get(v)) else { continue };
            let layer = host.layers.iter().position(|l| l.has_edge(x, y));
            let (ok, expected) = if in_i(u) || in_i(v) {
                (layer == Some(0), "layer 0".to_string())
            } else if in_s(u) || in_s(v) {
                (
                    layer == Some(k) && (in_zone(x) || in_zone(y)),
                    format!("layer {k}, zone-incident"),
                )
            } else {
                (
                    layer == Some(k) && !in_zone(x) && !in_zone(y),
                    format!("layer {k}, away from zone"),
                )
            };
            if !ok {
                findings.push(Finding::WrongLayer {
                    instance: i,
                    guest: (u, v),
                    host: ordered(x, y),
                    expected,
                });
            }
        }
    }
    findings
}

/// Spread maxima of one layer recomputed from the final maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpread {
    pub layer: usize,
    pub max_anchor_s: u32,
    pub max_free: u32,
    pub max_pair: u32,
}

/// Restricts each map to `G - S - I` and counts, over the vertices outside
/// the layer's zone, anchor hits and `f(B) ∪ (V \ (Z ∪ Im f))` hits.
pub fn recompute_spread(
    host: &SlicedHost,
    instances: &[InstanceGraph],
    layer_of_instance: &[usize],
    embeddings: &[Embedding],
) -> Vec<LayerSpread> {
    let n = host.n();
    let mut out = Vec::new();
    for k in 1..=host.layer_count() {
        let zone: Vec<usize> = host.zones.get(k - 1).cloned().unwrap_or_default();
        let mut anchor: HashMap<usize, u32> = HashMap::new();
        let mut free: HashMap<usize, u32> = HashMap::new();
        let mut pair: HashMap<Edge, u32> = HashMap::new();
        for (i, (inst, e)) in instances.iter().zip(embeddings).enumerate() {
            if layer_of_instance[i] != k {
                continue;
            }
            let rest = |v: usize| !inst.separator.contains(&v) && !inst.two_independent.contains(&v);
            let image: Vec<usize> = (0..inst.graph.vertex_count())
                .filter(|&v| rest(v))
                .filter_map(|v| e.get(v))
                .collect();
            for &a in &inst.anchors_s {
                if let Some(x) = e.get(a) {
                    *anchor.entry(x).or_default() += 1;
                }
            }
            let mut set: Vec<usize> = inst.anchors_i.iter().filter_map(|&b| e.get(b)).collect();
            set.extend((0..n).filter(|x| !zone.contains(x) && !image.contains(x)));
            set.retain(|x| !zone.contains(x));
            set.sort_unstable();
            set.dedup();
            for (a, &x) in set.iter().enumerate() {
                *free.entry(x).or_default() += 1;
                for &y in &set[a + 1..] {
                    *pair.entry((x, y)).or_default() += 1;
                }
            }
        }
        out.push(LayerSpread {
            layer: k,
            max_anchor_s: anchor.values().copied().max().unwrap_or(0),
            max_free: free.values().copied().max().unwrap_or(0),
            max_pair: pair.values().copied().max().unwrap_or(0),
        });
    }
    out
}
