//! Undirected simple graphs on dense `0..n` vertex indices, plus the plain
//! text interchange format used by the CLI.
//!
//! The text format is line oriented: a header `n m`, then `m` lines `u v`
//! with `u < v < n`. Lines starting with `#` are ignored. Writers always
//! terminate the last line with a newline, and readers require it.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::GraphError;

/// An unordered vertex pair, stored with the smaller index first.
pub type Edge = (usize, usize);

/// Normalizes a pair so that the smaller endpoint comes first.
#[inline]
pub fn ordered(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Position of the pair `{u, v}` in the row-major lower triangle of `K_n`.
#[inline]
pub fn pair_index(u: usize, v: usize) -> usize {
    let (a, b) = ordered(u, v);
    b * (b - 1) / 2 + a
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(index: usize) -> Edge {
    // b is the largest integer with b(b-1)/2 <= index
    let mut b = ((((8 * index + 1) as f64).sqrt() + 1.0) / 2.0) as usize;
    while b * (b - 1) / 2 > index {
        b -= 1;
    }
    while (b + 1) * b / 2 <= index {
        b += 1;
    }
    (index - b * (b - 1) / 2, b)
}

#[inline]
pub fn binomial2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n)
            .map(|v| (0..n).filter(|&u| u != v).collect())
            .collect();
        Graph {
            adjacency,
            edge_count: binomial2(n),
        }
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        Self::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle edges are valid")
    }

    /// The star `K_{1,leaves}` with centre 0.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star edges are valid")
    }

    /// Builds a graph, rejecting loops, out-of-range endpoints and repeated pairs.
    /// Binomial random graph `G(n, p)`; pair `{u, v}` is present iff its
    /// uniform draw is below `p`.
    pub fn gnp(n: usize, p: f64, seed: u64) -> Self {
        let mut g = Graph::empty(n);
        for v in 1..n {
            for u in 0..v {
                if crate::rng::unit_draw(seed, pair_index(u, v) as u64) < p {
                    g.adjacency[u].push(v);
                    g.adjacency[v].push(u);
                    g.edge_count += 1;
                }
            }
        }
        for nb in &mut g.adjacency {
            nb.sort_unstable();
        }
        g
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            if !g.add_edge(u, v)? {
                return Err(GraphError::DuplicateEdge(ordered(u, v)));
            }
        }
        Ok(g)
    }

    /// Inserts `{u, v}`; returns `Ok(false)` if the edge was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        let n = self.vertex_count();
        for x in [u, v] {
            if x >= n {
                return Err(GraphError::VertexOutOfRange {
                    vertex: x,
                    order: n,
                });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adjacency[u].insert(pos, v);
                let pos = self.adjacency[v].binary_search(&u).unwrap_err();
                self.adjacency[v].insert(pos, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if u >= self.vertex_count() || v >= self.vertex_count() {
            return false;
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(pos) => {
                self.adjacency[u].remove(pos);
                let pos = self.adjacency[v].binary_search(&u).expect("symmetric");
                self.adjacency[v].remove(pos);
                self.edge_count -= 1;
                true
            }
            Err(_) => false,
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Degree of `v` counting only neighbours with `active[u]`.
    pub fn degree_within(&self, v: usize, active: &[bool]) -> usize {
        self.adjacency[v].iter().filter(|&&u| active[u]).count()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// All edges as `(u, v)` with `u < v`, ordered by `u` then `v`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn non_isolated_count(&self) -> usize {
        self.adjacency.iter().filter(|nb| !nb.is_empty()).count()
    }

    /// Same vertex set; every edge touching a `removed` vertex is dropped.
    pub fn without_vertices(&self, removed: &[bool]) -> Graph {
        let adjacency: Vec<Vec<usize>> = self
            .adjacency
            .iter()
            .enumerate()
            .map(|(v, nb)| {
                if removed[v] {
                    Vec::new()
                } else {
                    nb.iter().copied().filter(|&u| !removed[u]).collect()
                }
            })
            .collect();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            adjacency,
            edge_count,
        }
    }

    /// Subgraph induced on `vertices`, relabelled `0..len` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut g = Graph::empty(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for &u in &self.adjacency[v] {
                let j = local[u];
                if j != usize::MAX && i < j {
                    g.add_edge(i, j).expect("induced edges are valid");
                }
            }
        }
        g
    }

    /// Disjoint union; `other`'s vertices are shifted past `self`'s.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.vertex_count();
        let mut adjacency = self.adjacency.clone();
        adjacency.extend(
            other
                .adjacency
                .iter()
                .map(|nb| nb.iter().map(|&u| u + shift).collect::<Vec<_>>()),
        );
        Graph {
            adjacency,
            edge_count: self.edge_count + other.edge_count,
        }
    }

    /// Drops isolated vertices; returns the compacted graph and, for each new
    /// vertex, its old index.
    pub fn strip_isolated(&self) -> (Graph, Vec<usize>) {
        let keep: Vec<usize> = (0..self.vertex_count())
            .filter(|&v| !self.adjacency[v].is_empty())
            .collect();
        (self.induced(&keep), keep)
    }

    /// Appends isolated vertices until the graph has `n` vertices.
    pub fn padded(&self, n: usize) -> Graph {
        let mut g = self.clone();
        if g.adjacency.len() < n {
            g.adjacency.resize(n, Vec::new());
        }
        g
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Graph {
        let n = self.vertex_count();
        let mut adjacency = vec![Vec::new(); n];
        for (v, nb) in self.adjacency.iter().enumerate() {
            let mut mapped: Vec<usize> = nb.iter().map(|&u| perm[u]).collect();
            mapped.sort_unstable();
            adjacency[perm[v]] = mapped;
        }
        Graph {
            adjacency,
            edge_count: self.edge_count,
        }
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vertex_count(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Graph, GraphError> {
        if !text.is_empty() && !text.ends_with('\n') {
            return Err(GraphError::Parse {
                line: text.lines().count(),
                message: "missing trailing newline".into(),
            });
        }
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut g = Graph::empty(n);
        let mut seen = 0usize;
        for (line, body) in lines {
            let (u, v) = parse_pair(line, body)?;
            if u >= v {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected u < v, got {u} {v}"),
                });
            }
            if !g.add_edge(u, v)? {
                return Err(GraphError::DuplicateEdge((u, v)));
            }
            seen += 1;
        }
        if seen != m {
            return Err(GraphError::Parse {
                line: hline,
                message: format!("header announces {m} edges, found {seen}"),
            });
        }
        Ok(g)
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
        Graph::parse_text(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_pair(line: usize, body: &str) -> Result<(usize, usize), GraphError> {
    let mut it = body.split_whitespace();
    let mut next = || -> Result<usize, GraphError> {
        it.next()
            .ok_or_else(|| GraphError::Parse {
                line,
                message: "expected two integers".into(),
            })?
            .parse::<usize>()
            .map_err(|e| GraphError::Parse {
                line,
                message: e.to_string(),
            })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(GraphError::Parse {
            line,
            message: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// Maximal connected vertex sets, each sorted, listed by smallest member.
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &u in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Components restricted to the vertices with `active[v]`.
pub fn components_within(g: &Graph, active: &[bool]) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut seen: Vec<bool> = active.iter().map(|a| !a).collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_is_one_component() {
        let comps = connected_components(&Graph::path(4));
        assert_eq!(comps, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn triangle_plus_edge() {
        let g = Graph::complete(3).disjoint_union(&Graph::path(2));
        let comps = connected_components(&g);
        let sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 2]);
        assert_eq!(comps[1], vec![3, 4]);
    }

    #[test]
    fn pair_index_roundtrip() {
        let mut idx = 0;
        for b in 1..40 {
            for a in 0..b {
                assert_eq!(pair_index(a, b), idx);
                assert_eq!(pair_index(b, a), idx);
                assert_eq!(pair_from_index(idx), (a, b));
                idx += 1;
            }
        }
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Graph::from_edges(3, [(0, 0)]),
            Err(GraphError::SelfLoop(0))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(GraphError::VertexOutOfRange { .. })
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge((0, 1)))
        ));
    }

    #[test]
    fn text_format() {
        let g = Graph::cycle(5);
        let text = g.to_text();
        assert!(text.starts_with("5 5\n"));
        assert_eq!(Graph::parse_text(&text).unwrap(), g);

        let with_comments = "# a comment\n3 2\n0 1\n# another\n1 2\n";
        assert_eq!(Graph::parse_text(with_comments).unwrap(), Graph::path(3));

        assert!(Graph::parse_text("3 1\n0 1").is_err(), "trailing newline");
        assert!(Graph::parse_text("3 1\n1 0\n").is_err(), "u < v");
        assert!(Graph::parse_text("3 2\n0 1\n").is_err(), "count mismatch");
    }

    #[test]
    fn without_vertices_keeps_indices() {
        let g = Graph::star(3).without_vertices(&[true, false, false, false]);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn edge_count_matches_degrees() {
        let g = Graph::complete(6);
        assert_eq!(g.edge_count(), 15);
        assert_eq!(g.degree_sequence().iter().sum::<usize>(), 2 * g.edge_count());
    }
}
