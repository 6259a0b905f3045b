//! Clique hypergraphs and proper hyperedge colouring.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{pair_index, Edge, Graph};
use crate::rng::stream;

/// Hyperedges over a ground set `0..ground`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    pub ground: usize,
    pub edges: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub max_degree: usize,
    pub min_degree: usize,
    /// Largest number of hyperedges containing one pair of ground elements.
    pub max_codegree: usize,
}

impl Hypergraph {
    pub fn new(ground: usize, edges: Vec<Vec<usize>>) -> Self {
        Hypergraph { ground, edges }
    }

    /// Hyperedges at each ground element.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut at = vec![Vec::new(); self.ground];
        for (h, e) in self.edges.iter().enumerate() {
            for &g in e {
                at[g].push(h);
            }
        }
        at
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.ground];
        for e in &self.edges {
            for &g in e {
                d[g] += 1;
            }
        }
        d
    }

    pub fn stats(&self) -> DegreeStats {
        let d = self.degrees();
        let mut co: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.edges {
            for (i, &a) in e.iter().enumerate() {
                for &b in &e[i + 1..] {
                    *co.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
        }
        DegreeStats {
            max_degree: d.iter().copied().max().unwrap_or(0),
            min_degree: d.iter().copied().min().unwrap_or(0),
            max_codegree: co.values().copied().max().unwrap_or(0),
        }
    }
}

/// All `ell`-cliques of a graph, with containment counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueHypergraph {
    pub ell: usize,
    pub vertex_count: usize,
    /// Each clique as a sorted vertex list.
    pub cliques: Vec<Vec<usize>>,
    /// Edges of the source graph; index `j` is ground element `j` of
    /// [`CliqueHypergraph::over_edges`].
    pub ground_edges: Vec<Edge>,
    pub edge_counts: Vec<usize>,
    pub vertex_counts: Vec<usize>,
}

impl CliqueHypergraph {
    /// Cliques as sets of graph edges.
    pub fn over_edges(&self) -> Hypergraph {
        let mut index = HashMap::with_capacity(self.ground_edges.len());
        for (j, &(u, v)) in self.ground_edges.iter().enumerate() {
            index.insert(pair_index(u, v), j);
        }
        let edges = self
            .cliques
            .iter()
            .map(|c| {
                let mut e = Vec::with_capacity(c.len() * (c.len() - 1) / 2);
                for (i, &a) in c.iter().enumerate() {
                    for &b in &c[i + 1..] {
                        e.push(index[&pair_index(a, b)]);
                    }
                }
                e
            })
            .collect();
        Hypergraph::new(self.ground_edges.len(), edges)
    }

    /// Cliques as sets of graph vertices.
    pub fn over_vertices(&self) -> Hypergraph {
        Hypergraph::new(self.vertex_count, self.cliques.clone())
    }

    pub fn max_edge_count(&self) -> usize {
        self.edge_counts.iter().copied().max().unwrap_or(0)
    }
}

fn extend(
    g: &Graph,
    ell: usize,
    current: &mut Vec<usize>,
    candidates: &[usize],
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == ell {
        out.push(current.clone());
        return;
    }
    for (i, &v) in candidates.iter().enumerate() {
        if current.len() + (candidates.len() - i) < ell {
            break;
        }
        let next: Vec<usize> = candidates[i + 1..]
            .iter()
            .copied()
            .filter(|&u| g.has_edge(u, v))
            .collect();
        current.push(v);
        extend(g, ell, current, &next, out);
        current.pop();
    }
}

/// Every `ell`-clique of `g`, each listed once in increasing vertex order.
pub fn enumerate_cliques(g: &Graph, ell: usize) -> CliqueHypergraph {
    let n = g.vertex_count();
    let mut cliques = Vec::new();
    if ell >= 1 {
        let mut current = Vec::with_capacity(ell);
        for v in 0..n {
            let higher: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
            current.push(v);
            extend(g, ell, &mut current, &higher, &mut cliques);
            current.pop();
        }
    }
    let ground_edges: Vec<Edge> = g.edges().collect();
    let mut index = HashMap::with_capacity(ground_edges.len());
    for (j, &(u, v)) in ground_edges.iter().enumerate() {
        index.insert(pair_index(u, v), j);
    }
    let mut edge_counts = vec![0; ground_edges.len()];
    let mut vertex_counts = vec![0; n];
    for c in &cliques {
        for (i, &a) in c.iter().enumerate() {
            vertex_counts[a] += 1;
            for &b in &c[i + 1..] {
                edge_counts[index[&pair_index(a, b)]] += 1;
            }
        }
    }
    CliqueHypergraph {
        ell,
        vertex_count: n,
        cliques,
        ground_edges,
        edge_counts,
        vertex_counts,
    }
}

/// A proper colouring: hyperedges sharing a ground element get different colours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub colors: Vec<usize>,
    pub count: usize,
}

impl Coloring {
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.count];
        for (h, &c) in self.colors.iter().enumerate() {
            classes[c].push(h);
        }
        classes
    }
}

pub fn is_proper(h: &Hypergraph, colors: &[usize]) -> bool {
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    for (e, &c) in h.edges.iter().zip(colors) {
        for &g in e {
            if seen.insert((g, c), ()).is_some() {
                return false;
            }
        }
    }
    true
}

/// Per-(ground, colour) occupancy used by the reduction passes.
struct Counts {
    colors: usize,
    table: Vec<u16>,
}

impl Counts {
    fn at(&self, g: usize, c: usize) -> u16 {
        self.table[g * self.colors + c]
    }
    fn add(&mut self, e: &[usize], c: usize) {
        for &g in e {
            self.table[g * self.colors + c] += 1;
        }
    }
    fn remove(&mut self, e: &[usize], c: usize) {
        for &g in e {
            self.table[g * self.colors + c] -= 1;
        }
    }
    /// Clashes `e` would have in colour `c`, not counting itself.
    fn clashes(&self, e: &[usize], c: usize, own: usize) -> usize {
        e.iter()
            .map(|&g| self.at(g, c) as usize - usize::from(own == c))
            .sum()
    }
}

/// First-fit in a random order, then passes that try to empty the top
/// colour class by min-conflicts local search.
pub fn proper_hyperedge_coloring(h: &Hypergraph, seed: u64) -> Coloring {
    let mut rng = stream(seed, "coloring", h.edges.len() as u64);
    let m = h.edges.len();
    if m == 0 {
        return Coloring {
            colors: Vec::new(),
            count: 0,
        };
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let mut at_colors: Vec<Vec<usize>> = vec![Vec::new(); h.ground];
    let mut colors = vec![0; m];
    let mut count = 0;
    let mut mark: Vec<bool> = Vec::new();
    for &e in &order {
        mark.clear();
        mark.resize(count + 1, false);
        for &g in &h.edges[e] {
            for &c in &at_colors[g] {
                mark[c] = true;
            }
        }
        let c = mark.iter().position(|&b| !b).unwrap_or(count);
        colors[e] = c;
        count = count.max(c + 1);
        for &g in &h.edges[e] {
            at_colors[g].push(c);
        }
    }

    let incidence = h.incidence();
    let lower = h.degrees().into_iter().max().unwrap_or(0).max(1);
    let mut counts = Counts {
        colors: count,
        table: vec![0; h.ground * count],
    };
    for (e, &c) in colors.iter().enumerate() {
        counts.add(&h.edges[e], c);
    }
    while count > lower {
        let top = count - 1;
        let saved = colors.clone();
        let saved_table = counts.table.clone();
        let class: Vec<usize> = (0..m).filter(|&e| colors[e] == top).collect();
        let mut queue = Vec::new();
        for &e in &class {
            counts.remove(&h.edges[e], top);
            let best = best_color(&counts, &h.edges[e], top, usize::MAX, &mut rng);
            colors[e] = best;
            counts.add(&h.edges[e], best);
            queue.push(e);
        }
        let budget = 200 * class.len() + 10_000;
        if repair(h, &incidence, &mut colors, &mut counts, top, queue, budget, &mut rng) {
            count = top;
        } else {
            colors = saved;
            counts.table = saved_table;
            break;
        }
    }
    Coloring { colors, count }
}

fn best_color<R: Rng>(counts: &Counts, e: &[usize], limit: usize, avoid: usize, rng: &mut R) -> usize {
    let mut best = Vec::new();
    let mut best_score = usize::MAX;
    for c in 0..limit {
        if c == avoid {
            continue;
        }
        let s: usize = e.iter().map(|&g| counts.at(g, c) as usize).sum();
        if s < best_score {
            best_score = s;
            best.clear();
        }
        if s == best_score {
            best.push(c);
        }
    }
    if best.is_empty() {
        return avoid;
    }
    best[rng.gen_range(0..best.len())]
}

/// Min-conflicts repair over colours `0..limit`; true when proper.
#[allow(clippy::too_many_arguments)]
fn repair<R: Rng>(
    h: &Hypergraph,
    incidence: &[Vec<usize>],
    colors: &mut [usize],
    counts: &mut Counts,
    limit: usize,
    mut queue: Vec<usize>,
    budget: usize,
    rng: &mut R,
) -> bool {
    let mut steps = 0;
    while let Some(pos) = (!queue.is_empty()).then(|| rng.gen_range(0..queue.len())) {
        let e = queue.swap_remove(pos);
        let c = colors[e];
        if counts.clashes(&h.edges[e], c, c) == 0 {
            continue;
        }
        steps += 1;
        if steps > budget {
            return false;
        }
        counts.remove(&h.edges[e], c);
        let next = if rng.gen_bool(0.1) {
            rng.gen_range(0..limit)
        } else {
            best_color(counts, &h.edges[e], limit, c, rng)
        };
        colors[e] = next;
        counts.add(&h.edges[e], next);
        for &g in &h.edges[e] {
            if counts.at(g, next) > 1 {
                for &f in &incidence[g] {
                    if colors[f] == next {
                        queue.push(f);
                    }
                }
            }
        }
    }
    is_proper(h, colors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangles_of_k4_and_c5() {
        let h = enumerate_cliques(&Graph::complete(4), 3);
        assert_eq!(h.cliques.len(), 4);
        assert!(h.edge_counts.iter().all(|&c| c == 2));
        assert!(h.vertex_counts.iter().all(|&c| c == 3));
        assert_eq!(h.over_edges().stats().max_codegree, 1);
        assert!(enumerate_cliques(&Graph::cycle(5), 3).cliques.is_empty());
    }

    #[test]
    fn clique_counts_of_complete_graphs() {
        for (n, ell, want) in [(6, 2, 15), (6, 3, 20), (7, 4, 35), (5, 5, 1)] {
            assert_eq!(enumerate_cliques(&Graph::complete(n), ell).cliques.len(), want);
        }
    }

    #[test]
    fn matching_needs_one_colour() {
        let h = Hypergraph::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        assert_eq!(proper_hyperedge_coloring(&h, 1).count, 1);
    }

    #[test]
    fn sunflower_needs_k_colours() {
        let k = 5;
        let edges = (0..k).map(|i| vec![0, 1 + 2 * i, 2 + 2 * i]).collect();
        let h = Hypergraph::new(1 + 2 * k, edges);
        let c = proper_hyperedge_coloring(&h, 3);
        assert_eq!(c.count, k);
        assert!(is_proper(&h, &c.colors));
    }

    #[test]
    fn one_factorisation_of_k6() {
        let h = enumerate_cliques(&Graph::complete(6), 2).over_vertices();
        for seed in 0..10 {
            let c = proper_hyperedge_coloring(&h, seed);
            assert!(is_proper(&h, &c.colors));
            assert_eq!(c.count, 5, "seed {seed}");
        }
    }
}
