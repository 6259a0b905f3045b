//! Input collections: generators for the supported families, separators,
//! 2-independent sets, and the normalization that merges small graphs and
//! pads everything to the host order.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::InstanceError;
use crate::graph::{components_within, connected_components, Graph};
use crate::rng::stream;

/// Random labelled tree on `n` vertices with maximum degree at most `max_degree`.
///
/// Vertex `i` attaches to a uniform earlier vertex that still has spare
/// degree, then the labels are shuffled.
pub fn gen_bounded_tree(n: usize, max_degree: usize, seed: u64) -> Result<Graph, InstanceError> {
    if n >= 3 && max_degree < 2 {
        return Err(InstanceError::InvalidDegree { n, max_degree });
    }
    let mut rng = stream(seed, "tree", n as u64);
    let mut g = Graph::empty(n);
    let mut open: Vec<usize> = Vec::with_capacity(n);
    if n > 0 {
        open.push(0);
    }
    for v in 1..n {
        let slot = rng.gen_range(0..open.len());
        let u = open[slot];
        g.add_edge(u, v).expect("fresh edge");
        if g.degree(u) >= max_degree {
            open.swap_remove(slot);
        }
        if max_degree > 1 {
            open.push(v);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    Ok(g.relabeled(&perm))
}

/// Forest with exactly `trees` components of near-equal size.
pub fn gen_forest(n: usize, trees: usize, max_degree: usize, seed: u64) -> Result<Graph, InstanceError> {
    if trees == 0 || trees > n {
        return Err(InstanceError::InvalidRange { lo: trees, n });
    }
    let mut g = Graph::empty(0);
    for k in 0..trees {
        let size = n / trees + usize::from(k < n % trees);
        let t = gen_bounded_tree(size, max_degree, crate::rng::sub_seed(seed, "forest", k as u64))?;
        g = g.disjoint_union(&t);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(seed, "forest-labels", 0));
    Ok(g.relabeled(&perm))
}

/// Trees `T_lo, ..., T_n` with `v(T_i) = i`.
pub fn gen_tpc_sequence(
    n: usize,
    max_degree: usize,
    lo: usize,
    seed: u64,
) -> Result<Vec<Graph>, InstanceError> {
    if lo == 0 || lo > n {
        return Err(InstanceError::InvalidRange { lo, n });
    }
    (lo..=n)
        .map(|i| gen_bounded_tree(i, max_degree, crate::rng::sub_seed(seed, "tpc", i as u64)))
        .collect()
}

/// Disjoint union of cycles with the given lengths.
pub fn gen_oberwolfach(n: usize, cycle_lengths: &[usize]) -> Result<Graph, InstanceError> {
    if let Some(&short) = cycle_lengths.iter().find(|&&l| l < 3) {
        return Err(InstanceError::CycleTooShort(short));
    }
    let sum: usize = cycle_lengths.iter().sum();
    if sum != n {
        return Err(InstanceError::WrongLengthSum { sum, n });
    }
    Ok(cycle_lengths
        .iter()
        .fold(Graph::empty(0), |g, &l| g.disjoint_union(&Graph::cycle(l))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separator {
    pub vertices: Vec<usize>,
    /// Largest component of `g - S` (at least 1).
    pub component_bound: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Tree,
    Cycle,
    Other,
}

fn shape_of(g: &Graph, comp: &[usize]) -> Shape {
    let degree_sum: usize = comp.iter().map(|&v| g.degree(v)).sum();
    let edges = degree_sum / 2;
    if edges + 1 == comp.len() {
        Shape::Tree
    } else if edges == comp.len() && comp.iter().all(|&v| g.degree(v) == 2) {
        Shape::Cycle
    } else {
        Shape::Other
    }
}

/// Bottom-up greedy on one tree: a vertex is cut as soon as its residual
/// subtree exceeds `k`. Gives the fewest cuts for that `k`.
fn tree_cuts(g: &Graph, root: usize, k: usize, out: &mut Vec<usize>) {
    let mut order = Vec::new();
    let mut stack = vec![(root, usize::MAX)];
    while let Some((v, p)) = stack.pop() {
        order.push((v, p));
        for &u in g.neighbors(v) {
            if u != p {
                stack.push((u, v));
            }
        }
    }
    let mut residual = std::collections::HashMap::with_capacity(order.len());
    for &(v, p) in order.iter().rev() {
        let below: usize = g
            .neighbors(v)
            .iter()
            .filter(|&&u| u != p)
            .map(|u| residual.get(u).copied().unwrap_or(0))
            .sum();
        if below + 1 > k {
            out.push(v);
            residual.insert(v, 0);
        } else {
            residual.insert(v, below + 1);
        }
    }
}

fn cycle_cuts(g: &Graph, comp: &[usize], k: usize, out: &mut Vec<usize>) {
    let len = comp.len();
    if len <= k {
        return;
    }
    // walk the cycle from its smallest vertex
    let mut walk = Vec::with_capacity(len);
    let (mut prev, mut cur) = (usize::MAX, comp[0]);
    for _ in 0..len {
        walk.push(cur);
        let next = g.neighbors(cur).iter().copied().find(|&u| u != prev).unwrap();
        prev = cur;
        cur = next;
    }
    let r = len.div_ceil(k + 1);
    out.extend((0..r).map(|j| walk[j * len / r]));
}

fn cuts_for(g: &Graph, comps: &[(Vec<usize>, Shape)], k: usize) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    for (comp, shape) in comps {
        if comp.len() <= k {
            continue;
        }
        match shape {
            Shape::Tree => tree_cuts(g, comp[0], k, &mut out),
            Shape::Cycle => cycle_cuts(g, comp, k, &mut out),
            Shape::Other => return None,
        }
    }
    out.sort_unstable();
    Some(out)
}

/// Smallest separator for a fixed component bound `k`.
pub fn separator_for_bound(g: &Graph, k: usize) -> Result<Separator, InstanceError> {
    let comps = classified(g);
    let k = k.max(1);
    match cuts_for(g, &comps, k) {
        Some(vertices) => Ok(finish(g, vertices)),
        None => {
            let size = comps
                .iter()
                .filter(|(c, s)| *s == Shape::Other && c.len() > k)
                .map(|(c, _)| c.len())
                .max()
                .unwrap_or(0);
            Err(InstanceError::UnsupportedFamily { size, bound: k })
        }
    }
}

fn classified(g: &Graph) -> Vec<(Vec<usize>, Shape)> {
    connected_components(g)
        .into_iter()
        .map(|c| {
            let s = shape_of(g, &c);
            (c, s)
        })
        .collect()
}

fn finish(g: &Graph, vertices: Vec<usize>) -> Separator {
    let mut removed = vec![false; g.vertex_count()];
    for &v in &vertices {
        removed[v] = true;
    }
    let active: Vec<bool> = removed.iter().map(|r| !r).collect();
    let component_bound = components_within(g, &active)
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0)
        .max(1);
    Separator {
        vertices,
        component_bound,
    }
}

/// Separator with at most `floor(delta * v(g))` vertices and the smallest
/// component bound reachable within that budget.
pub fn find_separator(g: &Graph, delta: f64) -> Result<Separator, InstanceError> {
    find_separator_capped(g, delta, None)
}

/// As [`find_separator`], failing when the bound would exceed `k_max`.
pub fn find_separator_capped(
    g: &Graph,
    delta: f64,
    k_max: Option<usize>,
) -> Result<Separator, InstanceError> {
    let budget = (delta * g.vertex_count() as f64 + 1e-9).floor() as usize;
    let comps = classified(g);
    let largest = comps.iter().map(|(c, _)| c.len()).max().unwrap_or(0).max(1);
    let floor_k = comps
        .iter()
        .filter(|(_, s)| *s == Shape::Other)
        .map(|(c, _)| c.len())
        .max()
        .unwrap_or(1);
    let fits = |k: usize| cuts_for(g, &comps, k).filter(|c| c.len() <= budget);
    // the cut count is non-increasing in k, so bisect
    let (mut lo, mut hi) = (floor_k, largest);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if fits(mid).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if let Some(cap) = k_max {
        if lo > cap {
            if floor_k > cap {
                return Err(InstanceError::UnsupportedFamily {
                    size: floor_k,
                    bound: cap,
                });
            }
            let needed = cuts_for(g, &comps, cap).map_or(usize::MAX, |c| c.len());
            return Err(InstanceError::SeparatorBudget { needed, budget });
        }
    }
    let cuts = fits(lo).expect("largest component bound needs no cuts");
    Ok(finish(g, cuts))
}

/// Marks `v` and everything within distance two as blocked.
fn block_ball(g: &Graph, v: usize, blocked: &mut [bool]) {
    blocked[v] = true;
    for &u in g.neighbors(v) {
        blocked[u] = true;
        for &w in g.neighbors(u) {
            blocked[w] = true;
        }
    }
}

/// Greedy 2-independent set over `order`, skipping `blocked` vertices and
/// updating `blocked` as it goes. Stops after `limit` picks.
pub fn greedy_two_independent(
    g: &Graph,
    order: impl IntoIterator<Item = usize>,
    blocked: &mut [bool],
    limit: usize,
) -> Vec<usize> {
    let mut out = Vec::new();
    for v in order {
        if out.len() >= limit {
            break;
        }
        if !blocked[v] {
            out.push(v);
            block_ball(g, v, blocked);
        }
    }
    out
}

/// Exactly `m` pairwise distance-3 vertices outside `avoid`, scanning by index.
pub fn find_two_independent(g: &Graph, m: usize, avoid: &[bool]) -> Result<Vec<usize>, InstanceError> {
    let mut blocked = avoid.to_vec();
    blocked.resize(g.vertex_count(), false);
    let found = greedy_two_independent(g, 0..g.vertex_count(), &mut blocked, m);
    if found.len() < m {
        return Err(InstanceError::Infeasible {
            wanted: m,
            found: found.len(),
        });
    }
    Ok(found)
}

/// Up to `m` 2-independent vertices outside `avoid`, cheapest first:
/// isolated vertices, then by ascending degree, ties by index.
pub fn cheap_two_independent(g: &Graph, m: usize, avoid: &[bool]) -> Vec<usize> {
    let mut blocked = avoid.to_vec();
    blocked.resize(g.vertex_count(), false);
    let mut order: Vec<usize> = (0..g.vertex_count()).collect();
    order.sort_by_key(|&v| (g.degree(v), v));
    let mut found = greedy_two_independent(g, order, &mut blocked, m);
    found.sort_unstable();
    found
}

pub fn is_two_independent(g: &Graph, set: &[usize]) -> bool {
    let mut owner = vec![usize::MAX; g.vertex_count()];
    for (k, &v) in set.iter().enumerate() {
        if owner[v] != usize::MAX {
            return false;
        }
        owner[v] = k;
    }
    for &v in set {
        for &u in g.neighbors(v) {
            if owner[u] != usize::MAX {
                return false;
            }
        }
    }
    // disjoint neighbourhoods
    let mut seen = vec![usize::MAX; g.vertex_count()];
    for (k, &v) in set.iter().enumerate() {
        for &u in g.neighbors(v) {
            if seen[u] != usize::MAX && seen[u] != k {
                return false;
            }
            seen[u] = k;
        }
    }
    true
}

/// Where an input graph ended up after normalization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub instance: usize,
    /// Instance vertex per input vertex; `None` for isolated vertices dropped by a merge.
    pub vertex_map: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceGraph {
    pub graph: Graph,
    pub separator: Vec<usize>,
    pub two_independent: Vec<usize>,
    /// Neighbours of the separator inside `G - S - I`.
    pub anchors_s: Vec<usize>,
    /// Neighbours of `I` inside `G - S - I`.
    pub anchors_i: Vec<usize>,
    pub component_bound: usize,
    /// Input indices merged into this instance.
    pub inputs: Vec<usize>,
}

impl InstanceGraph {
    pub fn bare(graph: Graph, inputs: Vec<usize>) -> Self {
        let component_bound = connected_components(&graph)
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .max(1);
        InstanceGraph {
            graph,
            separator: Vec::new(),
            two_independent: Vec::new(),
            anchors_s: Vec::new(),
            anchors_i: Vec::new(),
            component_bound,
            inputs,
        }
    }

    /// Installs `S` and `I` and recomputes anchors and the component bound.
    pub fn set_parts(&mut self, mut separator: Vec<usize>, mut two_independent: Vec<usize>) {
        separator.sort_unstable();
        two_independent.sort_unstable();
        let n = self.graph.vertex_count();
        let mut in_s = vec![false; n];
        let mut in_i = vec![false; n];
        for &v in &separator {
            in_s[v] = true;
        }
        for &v in &two_independent {
            in_i[v] = true;
        }
        let rest = |v: usize| !in_s[v] && !in_i[v];
        let collect = |mask: &[bool]| -> Vec<usize> {
            (0..n)
                .filter(|&v| rest(v) && self.graph.neighbors(v).iter().any(|&u| mask[u]))
                .collect()
        };
        self.anchors_s = collect(&in_s);
        self.anchors_i = collect(&in_i);
        let active: Vec<bool> = in_s.iter().map(|s| !s).collect();
        self.component_bound = components_within(&self.graph, &active)
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .max(1);
        self.separator = separator;
        self.two_independent = two_independent;
    }

    /// Membership mask of `G - S - I`.
    pub fn phase1_mask(&self) -> Vec<bool> {
        let mut mask = vec![true; self.graph.vertex_count()];
        for &v in self.separator.iter().chain(&self.two_independent) {
            mask[v] = false;
        }
        mask
    }

    pub fn mask_of(&self, set: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.graph.vertex_count()];
        for &v in set {
            mask[v] = true;
        }
        mask
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSet {
    pub instances: Vec<InstanceGraph>,
    pub n: usize,
    pub max_degree: usize,
    pub total_edges: usize,
    /// Indexed by input graph.
    pub provenance: Vec<Provenance>,
}

struct Pending {
    graph: Graph,
    maps: Vec<(usize, Vec<Option<usize>>)>,
}

/// Merges small inputs and pads every graph to exactly `n` vertices.
///
/// While two graphs have fewer than `n/4` edges (hence fewer than `n/2`
/// non-isolated vertices) the two smallest are replaced by the disjoint
/// union of their non-isolated parts.
pub fn normalize_collection(graphs: &[Graph], n: usize) -> Result<InstanceSet, InstanceError> {
    for (index, g) in graphs.iter().enumerate() {
        if g.vertex_count() > n {
            return Err(InstanceError::TooLarge {
                index,
                order: g.vertex_count(),
                n,
            });
        }
    }
    let mut pending: Vec<Pending> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| Pending {
            graph: g.clone(),
            maps: vec![(i, (0..g.vertex_count()).map(Some).collect())],
        })
        .collect();
    let small = |p: &Pending| 4 * p.graph.edge_count() < n;
    loop {
        let mut candidates: Vec<usize> = (0..pending.len()).filter(|&k| small(&pending[k])).collect();
        if candidates.len() < 2 {
            break;
        }
        candidates.sort_by_key(|&k| (pending[k].graph.edge_count(), k));
        let (a, b) = (candidates[0].min(candidates[1]), candidates[0].max(candidates[1]));
        let second = pending.remove(b);
        let first = pending.remove(a);
        let (ga, keep_a) = first.graph.strip_isolated();
        let (gb, keep_b) = second.graph.strip_isolated();
        let shift = ga.vertex_count();
        let relocate = |maps: Vec<(usize, Vec<Option<usize>>)>, keep: &[usize], shift: usize| {
            let mut local = vec![None; keep.iter().max().map_or(0, |m| m + 1)];
            for (new, &old) in keep.iter().enumerate() {
                local[old] = Some(new + shift);
            }
            maps.into_iter()
                .map(|(i, map)| {
                    let map = map
                        .into_iter()
                        .map(|x| x.and_then(|x| local.get(x).copied().flatten()))
                        .collect();
                    (i, map)
                })
                .collect::<Vec<_>>()
        };
        let mut maps = relocate(first.maps, &keep_a, 0);
        maps.extend(relocate(second.maps, &keep_b, shift));
        pending.insert(
            a,
            Pending {
                graph: ga.disjoint_union(&gb),
                maps,
            },
        );
    }
    let mut provenance = vec![
        Provenance {
            instance: 0,
            vertex_map: Vec::new()
        };
        graphs.len()
    ];
    let mut instances = Vec::with_capacity(pending.len());
    for (k, p) in pending.into_iter().enumerate() {
        let mut inputs = Vec::new();
        for (i, map) in p.maps {
            inputs.push(i);
            provenance[i] = Provenance {
                instance: k,
                vertex_map: map,
            };
        }
        inputs.sort_unstable();
        instances.push(InstanceGraph::bare(p.graph.padded(n), inputs));
    }
    Ok(InstanceSet {
        total_edges: instances.iter().map(|i| i.graph.edge_count()).sum(),
        max_degree: instances.iter().map(|i| i.graph.max_degree()).max().unwrap_or(0),
        instances,
        n,
        provenance,
    })
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    file: String,
    separator: Vec<usize>,
    two_independent: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    n: usize,
    delta_max_degree: usize,
    instances: Vec<ManifestEntry>,
}

impl InstanceSet {
    /// Bundles already-normalized graphs without merging.
    pub fn from_graphs(graphs: Vec<Graph>, n: usize) -> Self {
        let instances: Vec<InstanceGraph> = graphs
            .into_iter()
            .enumerate()
            .map(|(i, g)| InstanceGraph::bare(g.padded(n), vec![i]))
            .collect();
        InstanceSet {
            provenance: instances
                .iter()
                .enumerate()
                .map(|(i, inst)| Provenance {
                    instance: i,
                    vertex_map: (0..inst.graph.vertex_count()).map(Some).collect(),
                })
                .collect(),
            total_edges: instances.iter().map(|i| i.graph.edge_count()).sum(),
            max_degree: instances.iter().map(|i| i.graph.max_degree()).max().unwrap_or(0),
            instances,
            n,
        }
    }

    /// One graph file per instance plus `manifest.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), InstanceError> {
        fs::create_dir_all(dir).map_err(crate::error::GraphError::from)?;
        let mut entries = Vec::new();
        for (i, inst) in self.instances.iter().enumerate() {
            let file = format!("instance_{i:04}.txt");
            inst.graph.write_to(dir.join(&file))?;
            entries.push(ManifestEntry {
                file,
                separator: inst.separator.clone(),
                two_independent: inst.two_independent.clone(),
            });
        }
        let manifest = Manifest {
            n: self.n,
            delta_max_degree: self.max_degree,
            instances: entries,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")
            .map_err(crate::error::GraphError::from)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<InstanceSet, InstanceError> {
        let text = fs::read_to_string(dir.join("manifest.json")).map_err(crate::error::GraphError::from)?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        let mut graphs = Vec::new();
        for e in &manifest.instances {
            graphs.push(Graph::read_from(dir.join(&e.file))?);
        }
        let mut set = InstanceSet::from_graphs(graphs, manifest.n);
        set.max_degree = set.max_degree.max(manifest.delta_max_degree);
        for (inst, e) in set.instances.iter_mut().zip(manifest.instances) {
            if !e.separator.is_empty() || !e.two_independent.is_empty() {
                inst.set_parts(e.separator, e.two_independent);
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_trees() {
        assert_eq!(gen_bounded_tree(1, 3, 0).unwrap(), Graph::empty(1));
        let t = gen_bounded_tree(2, 3, 0).unwrap();
        assert_eq!(t.edge_count(), 1);
        assert!(matches!(
            gen_bounded_tree(3, 1, 0),
            Err(InstanceError::InvalidDegree { .. })
        ));
    }

    #[test]
    fn large_tree_respects_degree_cap() {
        let t = gen_bounded_tree(1000, 3, 11).unwrap();
        assert_eq!(t.edge_count(), 999);
        assert!(t.degree_sequence().iter().all(|&d| d <= 3));
        assert_eq!(connected_components(&t).len(), 1);
        assert_eq!(t, gen_bounded_tree(1000, 3, 11).unwrap());
    }

    #[test]
    fn degree_two_gives_paths() {
        let t = gen_bounded_tree(50, 2, 5).unwrap();
        assert_eq!(t.max_degree(), 2);
        assert_eq!(connected_components(&t).len(), 1);
    }

    #[test]
    fn forest_component_count() {
        for k in 1..6 {
            let f = gen_forest(40, k, 3, k as u64).unwrap();
            assert_eq!(connected_components(&f).len(), k);
            assert_eq!(f.edge_count(), 40 - k);
        }
    }

    #[test]
    fn tpc_sequences() {
        let s = gen_tpc_sequence(3, 3, 1, 0).unwrap();
        let edges: Vec<usize> = s.iter().map(Graph::edge_count).collect();
        assert_eq!(edges, vec![0, 1, 2]);
        let lo = (0.3f64 * 200.0).ceil() as usize;
        let s = gen_tpc_sequence(200, 3, lo, 4).unwrap();
        assert_eq!(s.len(), 141);
        let total: usize = s.iter().map(Graph::edge_count).sum();
        assert_eq!(total, (lo..=200).map(|i| i - 1).sum::<usize>());
        assert_eq!(gen_tpc_sequence(9, 3, 9, 0).unwrap().len(), 1);
    }

    #[test]
    fn oberwolfach_graphs() {
        assert_eq!(gen_oberwolfach(3, &[3]).unwrap(), Graph::complete(3));
        let g = gen_oberwolfach(9, &[3, 3, 3]).unwrap();
        assert_eq!(connected_components(&g).len(), 3);
        let g = gen_oberwolfach(201, &[3; 67]).unwrap();
        assert_eq!(g.edge_count(), 201);
        assert!(g.degree_sequence().iter().all(|&d| d == 2));
        assert!(matches!(gen_oberwolfach(5, &[2, 3]), Err(InstanceError::CycleTooShort(2))));
        assert!(matches!(gen_oberwolfach(7, &[3, 3]), Err(InstanceError::WrongLengthSum { .. })));
    }

    #[test]
    fn path_separator() {
        let s = find_separator(&Graph::path(100), 0.1).unwrap();
        assert_eq!(s.vertices.len(), 10);
        assert!(s.component_bound <= 9);
        let gaps: Vec<usize> = s.vertices.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|&d| d == 10));
    }

    #[test]
    fn star_and_edgeless_separators() {
        let s = find_separator(&Graph::star(9), 0.1).unwrap();
        assert_eq!(s.vertices, vec![0]);
        assert_eq!(s.component_bound, 1);
        let s = find_separator(&Graph::empty(20), 0.1).unwrap();
        assert!(s.vertices.is_empty());
        assert_eq!(s.component_bound, 1);
    }

    #[test]
    fn cycle_separator() {
        let g = gen_oberwolfach(30, &[10, 20]).unwrap();
        let s = find_separator(&g, 0.2).unwrap();
        assert!(s.vertices.len() <= 6);
        assert!(s.component_bound <= 5);
    }

    #[test]
    fn non_separable_component_needs_its_size() {
        let g = Graph::complete(5).disjoint_union(&Graph::path(20));
        let s = find_separator(&g, 0.2).unwrap();
        assert_eq!(s.component_bound, 5);
        assert!(matches!(
            find_separator_capped(&g, 0.2, Some(4)),
            Err(InstanceError::UnsupportedFamily { size: 5, bound: 4 })
        ));
        assert!(matches!(
            find_separator_capped(&Graph::path(20), 0.0, Some(4)),
            Err(InstanceError::SeparatorBudget { .. })
        ));
    }

    #[test]
    fn two_independent_examples() {
        let none = vec![false; 10];
        assert_eq!(find_two_independent(&Graph::path(10), 3, &none).unwrap(), vec![0, 3, 6]);
        assert!(matches!(
            find_two_independent(&Graph::complete(4), 2, &[false; 4]),
            Err(InstanceError::Infeasible { wanted: 2, found: 1 })
        ));
        let mut avoid = vec![false; 10];
        avoid[0] = true;
        assert_eq!(find_two_independent(&Graph::path(10), 1, &avoid).unwrap(), vec![1]);
    }

    #[test]
    fn cheap_two_independent_prefers_isolated_then_leaves() {
        let g = Graph::path(7).padded(9);
        let set = cheap_two_independent(&g, 4, &[false; 9]);
        assert!(set.contains(&7) && set.contains(&8));
        assert!(set.contains(&0) && set.contains(&6));
        assert!(is_two_independent(&g, &set));
    }

    #[test]
    fn normalize_merges_small_graphs() {
        let set = normalize_collection(&[Graph::complete(3), Graph::complete(3)], 100).unwrap();
        assert_eq!(set.instances.len(), 1);
        assert_eq!(set.instances[0].graph.edge_count(), 6);
        assert_eq!(set.instances[0].graph.vertex_count(), 100);
        assert_eq!(set.provenance[0].instance, 0);
        assert_eq!(set.provenance[1].instance, 0);
        assert_eq!(set.instances[0].inputs, vec![0, 1]);

        let t = gen_bounded_tree(50, 3, 1).unwrap();
        let set = normalize_collection(std::slice::from_ref(&t), 50).unwrap();
        assert_eq!(set.instances[0].graph, t);

        let set = normalize_collection(&[], 10).unwrap();
        assert!(set.instances.is_empty());
        assert_eq!(set.total_edges, 0);
    }

    #[test]
    fn provenance_maps_edges() {
        let inputs = vec![Graph::path(4), Graph::star(3).padded(6), Graph::complete(3)];
        let set = normalize_collection(&inputs, 40).unwrap();
        for (i, g) in inputs.iter().enumerate() {
            let p = &set.provenance[i];
            let host = &set.instances[p.instance].graph;
            for (u, v) in g.edges() {
                let (x, y) = (p.vertex_map[u].unwrap(), p.vertex_map[v].unwrap());
                assert!(host.has_edge(x, y));
            }
        }
    }

    #[test]
    fn parts_and_anchors() {
        let mut inst = InstanceGraph::bare(Graph::path(10), vec![0]);
        inst.set_parts(vec![5], vec![0, 9]);
        assert_eq!(inst.anchors_s, vec![4, 6]);
        assert_eq!(inst.anchors_i, vec![1, 8]);
        assert_eq!(inst.component_bound, 5);
        let mask = inst.phase1_mask();
        assert_eq!(mask.iter().filter(|&&m| m).count(), 7);
    }

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = InstanceSet::from_graphs(vec![Graph::path(6), Graph::cycle(6)], 6);
        set.instances[0].set_parts(vec![2], vec![0]);
        set.write_dir(dir.path()).unwrap();
        let back = InstanceSet::read_dir(dir.path()).unwrap();
        assert_eq!(back.instances[0].separator, vec![2]);
        assert_eq!(back.instances[1].graph, Graph::cycle(6));
        assert_eq!(back.n, 6);
    }
}
