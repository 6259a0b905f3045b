//! Partial injective vertex maps from a guest graph into a host.

use serde::{Deserialize, Serialize};

use crate::graph::{ordered, Edge, Graph};

/// Which stage of the pipeline produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Bounded components, packed through clique factors.
    Phase1,
    /// Separators added through the reserved zones.
    Phase2,
    /// Two-independent vertices added through matchings; total.
    Phase3,
}

/// Read-only view of the edges a host makes available.
pub trait HostEdges {
    fn order(&self) -> usize;
    fn contains(&self, u: usize, v: usize) -> bool;
}

impl HostEdges for Graph {
    fn order(&self) -> usize {
        self.vertex_count()
    }

    fn contains(&self, u: usize, v: usize) -> bool {
        u != v && self.has_edge(u, v)
    }
}

/// The complete graph on `n` vertices without materialized adjacency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompleteHost(pub usize);

impl HostEdges for CompleteHost {
    fn order(&self) -> usize {
        self.0
    }

    fn contains(&self, u: usize, v: usize) -> bool {
        u != v && u < self.0 && v < self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub instance_id: usize,
    pub phase: Phase,
    map: Vec<Option<usize>>,
}

impl Embedding {
    pub fn new(instance_id: usize, guest_order: usize, phase: Phase) -> Self {
        Embedding {
            instance_id,
            phase,
            map: vec![None; guest_order],
        }
    }

    pub fn from_map(instance_id: usize, map: Vec<Option<usize>>, phase: Phase) -> Self {
        Embedding {
            instance_id,
            phase,
            map,
        }
    }

    /// A total map given as an image per guest vertex.
    pub fn total(instance_id: usize, images: &[usize], phase: Phase) -> Self {
        Embedding::from_map(instance_id, images.iter().map(|&x| Some(x)).collect(), phase)
    }

    #[inline]
    pub fn get(&self, v: usize) -> Option<usize> {
        self.map[v]
    }

    #[inline]
    pub fn set(&mut self, v: usize, image: usize) {
        self.map[v] = Some(image);
    }

    pub fn clear(&mut self, v: usize) {
        self.map[v] = None;
    }

    pub fn guest_order(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn domain_size(&self) -> usize {
        self.map.iter().filter(|x| x.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// `(guest, host)` pairs in guest order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter_map(|(v, x)| x.map(|x| (v, x)))
    }

    /// Membership mask of the image over `host_order` vertices.
    pub fn image_mask(&self, host_order: usize) -> Vec<bool> {
        let mut mask = vec![false; host_order];
        for (_, x) in self.pairs() {
            if x < host_order {
                mask[x] = true;
            }
        }
        mask
    }

    /// Host pairs covered by guest edges whose endpoints are both mapped.
    pub fn image_edges<'a>(&'a self, guest: &'a Graph) -> impl Iterator<Item = Edge> + 'a {
        guest
            .edges()
            .filter_map(move |(u, v)| match (self.map[u], self.map[v]) {
                (Some(x), Some(y)) => Some(ordered(x, y)),
                _ => None,
            })
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }
}

/// One reason an embedding fails to be a valid partial embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OrderMismatch { guest: usize, map: usize },
    ImageOutOfRange { vertex: usize, image: usize },
    NonInjective { first: usize, second: usize, image: usize },
    MissingHostEdge { guest: Edge, host: Edge },
    Unmapped { vertex: usize },
}

/// Checks injectivity and edge preservation; an empty list means valid.
pub fn validate_embedding<H: HostEdges + ?Sized>(
    guest: &Graph,
    host: &H,
    e: &Embedding,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if e.guest_order() != guest.vertex_count() {
        out.push(Violation::OrderMismatch {
            guest: guest.vertex_count(),
            map: e.guest_order(),
        });
        return out;
    }
    let n = host.order();
    let mut owner = vec![usize::MAX; n];
    for (v, x) in e.pairs() {
        if x >= n {
            out.push(Violation::ImageOutOfRange { vertex: v, image: x });
        } else if owner[x] != usize::MAX {
            out.push(Violation::NonInjective {
                first: owner[x],
                second: v,
                image: x,
            });
        } else {
            owner[x] = v;
        }
    }
    for (u, v) in guest.edges() {
        if let (Some(x), Some(y)) = (e.get(u), e.get(v)) {
            if x < n && y < n && !host.contains(x, y) {
                out.push(Violation::MissingHostEdge {
                    guest: (u, v),
                    host: ordered(x, y),
                });
            }
        }
    }
    if e.phase == Phase::Phase3 {
        out.extend(
            (0..guest.vertex_count())
                .filter(|&v| e.get(v).is_none())
                .map(|vertex| Violation::Unmapped { vertex }),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_triangle() {
        let k3 = Graph::complete(3);
        let e = Embedding::total(0, &[0, 1, 2], Phase::Phase3);
        assert!(validate_embedding(&k3, &k3, &e).is_empty());
    }

    #[test]
    fn any_injection_of_p3_into_k3() {
        let p3 = Graph::path(3);
        let k3 = Graph::complete(3);
        for images in [[0, 1, 2], [2, 0, 1], [1, 2, 0], [2, 1, 0]] {
            let e = Embedding::total(0, &images, Phase::Phase3);
            assert!(validate_embedding(&p3, &k3, &e).is_empty());
        }
    }

    #[test]
    fn triangle_into_path_misses_chord() {
        let e = Embedding::total(0, &[0, 1, 2], Phase::Phase3);
        let v = validate_embedding(&Graph::complete(3), &Graph::path(3), &e);
        assert_eq!(
            v,
            vec![Violation::MissingHostEdge {
                guest: (0, 2),
                host: (0, 2)
            }]
        );
    }

    #[test]
    fn collision_and_unmapped() {
        let g = Graph::path(3);
        let e = Embedding::from_map(0, vec![Some(1), Some(1), None], Phase::Phase3);
        let v = validate_embedding(&g, &CompleteHost(4), &e);
        assert!(v.contains(&Violation::NonInjective {
            first: 0,
            second: 1,
            image: 1
        }));
        assert!(v.contains(&Violation::Unmapped { vertex: 2 }));
    }

    #[test]
    fn partial_maps_ignore_unmapped_edges() {
        let g = Graph::complete(3);
        let e = Embedding::from_map(0, vec![Some(0), Some(1), None], Phase::Phase1);
        assert!(validate_embedding(&g, &Graph::path(3), &e).is_empty());
    }
}
