//! Auxiliary bipartite graphs for Phase III and matchings in them.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::CompletionError;
use crate::graph::Graph;
use crate::ledger::PackingLedger;
use crate::slicer::SlicedHost;

/// Left side: for each `v` in `I`, the host set `X = g(N(v))`. Right side:
/// the host vertices outside the image of `g`. `(X, x)` is an edge when `x`
/// is adjacent in layer 0 to every member of `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxBipartite {
    pub instance_id: usize,
    pub left_vertices: Vec<usize>,
    pub left: Vec<Vec<usize>>,
    pub right: Vec<usize>,
    /// Right indices adjacent to each left index, increasing.
    pub adj: Vec<Vec<usize>>,
}

impl AuxBipartite {
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// A bipartite graph given directly by its adjacency.
    pub fn from_adjacency(adj: Vec<Vec<usize>>, right: usize) -> Self {
        AuxBipartite {
            instance_id: 0,
            left_vertices: (0..adj.len()).collect(),
            left: vec![Vec::new(); adj.len()],
            right: (0..right).collect(),
            adj,
        }
    }
}

/// Builds the auxiliary graph of one instance against the untouched layer 0.
pub fn build_aux_bipartite(
    host: &SlicedHost,
    guest: &Graph,
    two_independent: &[usize],
    g: &Embedding,
) -> Result<AuxBipartite, CompletionError> {
    let n = host.n();
    let image = g.image_mask(n);
    let right: Vec<usize> = (0..n).filter(|&x| !image[x]).collect();
    let left: Vec<Vec<usize>> = two_independent
        .iter()
        .map(|&v| {
            let mut xs: Vec<usize> = guest.neighbors(v).iter().filter_map(|&u| g.get(u)).collect();
            xs.sort_unstable();
            xs
        })
        .collect();
    if left.len() != right.len() {
        return Err(CompletionError::SizeMismatch {
            instance: g.instance_id,
            left: left.len(),
            right: right.len(),
        });
    }
    let adj = left
        .iter()
        .map(|xs| {
            (0..right.len())
                .filter(|&r| xs.iter().all(|&y| host.layer_of(y, right[r]) == Some(0)))
                .collect()
        })
        .collect();
    Ok(AuxBipartite {
        instance_id: g.instance_id,
        left_vertices: two_independent.to_vec(),
        left,
        right,
        adj,
    })
}

/// Drops `(X, x)` when some `{y, x}` with `y` in `X` is already used.
pub fn filter_eligible(aux: &AuxBipartite, ledger: &PackingLedger) -> AuxBipartite {
    let mut out = aux.clone();
    for (l, rs) in out.adj.iter_mut().enumerate() {
        rs.retain(|&r| aux.left[l].iter().all(|&y| !ledger.is_used(y, aux.right[r])));
    }
    out
}

/// Maximum matching by Hopcroft-Karp; entry `l` is the right index matched to `l`.
pub fn max_matching(aux: &AuxBipartite) -> Vec<Option<usize>> {
    hopcroft_karp(&aux.adj, aux.right.len())
}

pub fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let left = adj.len();
    let mut match_l: Vec<Option<usize>> = vec![None; left];
    let mut match_r: Vec<Option<usize>> = vec![None; right];
    let mut dist = vec![INF; left];
    loop {
        // layer the graph from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..left {
            if match_l[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = INF;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                match match_r[r] {
                    None => found = true,
                    Some(l2) if dist[l2] == INF => {
                        dist[l2] = dist[l] + 1;
                        queue.push_back(l2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        fn augment(
            l: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            match_l: &mut [Option<usize>],
            match_r: &mut [Option<usize>],
        ) -> bool {
            for &r in &adj[l] {
                let ok = match match_r[r] {
                    None => true,
                    Some(l2) => dist[l2] == dist[l] + 1 && augment(l2, adj, dist, match_l, match_r),
                };
                if ok {
                    match_l[l] = Some(r);
                    match_r[r] = Some(l);
                    return true;
                }
            }
            dist[l] = usize::MAX;
            false
        }
        for l in 0..left {
            if match_l[l].is_none() {
                augment(l, adj, &mut dist, &mut match_l, &mut match_r);
            }
        }
    }
    match_l
}

/// Simple augmenting-path matcher, one search per left vertex.
pub fn reference_matching(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    fn try_kuhn(l: usize, adj: &[Vec<usize>], seen: &mut [bool], match_r: &mut [Option<usize>]) -> bool {
        for &r in &adj[l] {
            if !seen[r] {
                seen[r] = true;
                if match_r[r].is_none_or(|l2| try_kuhn(l2, adj, seen, match_r)) {
                    match_r[r] = Some(l);
                    return true;
                }
            }
        }
        false
    }
    let mut match_r = vec![None; right];
    for l in 0..adj.len() {
        let mut seen = vec![false; right];
        try_kuhn(l, adj, &mut seen, &mut match_r);
    }
    let mut match_l = vec![None; adj.len()];
    for (r, l) in match_r.iter().enumerate() {
        if let Some(l) = l {
            match_l[*l] = Some(r);
        }
    }
    match_l
}

pub fn matching_size(m: &[Option<usize>]) -> usize {
    m.iter().filter(|x| x.is_some()).count()
}

/// Pairwise edge-disjoint perfect matchings; `matchings[j][l]` is a right index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingCollection {
    pub matchings: Vec<Vec<usize>>,
    pub requested: usize,
}

impl MatchingCollection {
    pub fn shortfall(&self) -> bool {
        self.matchings.len() < self.requested
    }

    pub fn require_full(&self) -> Result<(), CompletionError> {
        if self.shortfall() {
            Err(CompletionError::Shortfall {
                found: self.matchings.len(),
                wanted: self.requested,
            })
        } else {
            Ok(())
        }
    }
}

/// Repeatedly takes a perfect matching and deletes its edges.
pub fn edge_disjoint_perfect_matchings(aux: &AuxBipartite, count: usize) -> MatchingCollection {
    let mut adj = aux.adj.clone();
    let mut matchings = Vec::new();
    let perfect_possible = aux.left.len() == aux.right.len();
    while perfect_possible && matchings.len() < count {
        let m = hopcroft_karp(&adj, aux.right.len());
        if matching_size(&m) != adj.len() {
            break;
        }
        let m: Vec<usize> = m.into_iter().map(Option::unwrap).collect();
        for (l, &r) in m.iter().enumerate() {
            adj[l].retain(|&x| x != r);
        }
        matchings.push(m);
        if adj.is_empty() {
            break;
        }
    }
    MatchingCollection {
        matchings,
        requested: count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complete_and_star() {
        let k = 6;
        let full = AuxBipartite::from_adjacency(vec![(0..k).collect(); k], k);
        assert_eq!(matching_size(&max_matching(&full)), k);
        let mut star = vec![Vec::new(); k];
        star[0] = (0..k).collect();
        let star = AuxBipartite::from_adjacency(star, k);
        assert_eq!(matching_size(&max_matching(&star)), 1);
    }

    #[test]
    fn agrees_with_reference_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let adj: Vec<Vec<usize>> = (0..50)
                .map(|_| (0..50).filter(|_| rng.gen_bool(0.2)).collect())
                .collect();
            assert_eq!(
                matching_size(&hopcroft_karp(&adj, 50)),
                matching_size(&reference_matching(&adj, 50))
            );
        }
        for _ in 0..50 {
            let adj: Vec<Vec<usize>> = (0..30)
                .map(|_| (0..30).filter(|_| rng.gen_bool(0.05)).collect())
                .collect();
            assert_eq!(
                matching_size(&hopcroft_karp(&adj, 30)),
                matching_size(&reference_matching(&adj, 30))
            );
        }
    }

    #[test]
    fn latin_square_from_k33() {
        let aux = AuxBipartite::from_adjacency(vec![vec![0, 1, 2]; 3], 3);
        let c = edge_disjoint_perfect_matchings(&aux, 3);
        assert_eq!(c.matchings.len(), 3);
        assert!(!c.shortfall());
        let mut seen = std::collections::HashSet::new();
        for m in &c.matchings {
            for (l, &r) in m.iter().enumerate() {
                assert!(seen.insert((l, r)));
            }
        }
    }

    #[test]
    fn path_has_one_matching() {
        let aux = AuxBipartite::from_adjacency(vec![vec![0, 1], vec![1]], 2);
        let c = edge_disjoint_perfect_matchings(&aux, 2);
        assert_eq!(c.matchings.len(), 1);
        assert!(matches!(c.require_full(), Err(CompletionError::Shortfall { found: 1, wanted: 2 })));
    }

    #[test]
    fn isolated_right_vertex_blocks_everything() {
        let aux = AuxBipartite::from_adjacency(vec![vec![0], vec![0]], 2);
        assert!(edge_disjoint_perfect_matchings(&aux, 1).matchings.is_empty());
    }
}
