//! Clique factors: vertex-disjoint sets of `ell`-cliques, pairwise edge-disjoint.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::hypergraph::{proper_hyperedge_coloring, Hypergraph};
use crate::error::CliqueError;
use crate::graph::{ordered, Graph};
use crate::rng::{stream, sub_seed};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueFactor {
    pub factor_id: usize,
    /// Vertex-disjoint cliques, each a sorted vertex list.
    pub cells: Vec<Vec<usize>>,
}

impl CliqueFactor {
    pub fn vertex_total(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorCollection {
    pub factors: Vec<CliqueFactor>,
    pub ell: usize,
    /// Edge-disjoint cliques found before colouring.
    pub cliques_packed: usize,
    pub colors_used: usize,
    /// Factors containing each vertex.
    pub coverage: Vec<usize>,
    /// Targets `(1 - eps) n p / (ell - 1)` and `(1 - eps) n / ell`.
    pub target_factors: f64,
    pub target_cells: f64,
    pub min_coverage_fraction: f64,
    pub mean_coverage_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct FactorOptions {
    pub ell: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Factors to build; defaults to `(1 - eps)` times the mean number of
    /// packed cliques at a vertex.
    pub target: Option<usize>,
    /// Factors with fewer cells are dropped at the end.
    pub min_cells: Option<usize>,
    pub min_factors: usize,
}

impl FactorOptions {
    pub fn new(ell: usize, epsilon: f64, seed: u64) -> Self {
        FactorOptions {
            ell,
            epsilon,
            seed,
            target: None,
            min_cells: None,
            min_factors: 1,
        }
    }
}

/// Bitset adjacency of the still-unused edges.
struct FreeEdges {
    words: usize,
    bits: Vec<u64>,
}

impl FreeEdges {
    fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for (u, v) in g.edges() {
            bits[u * words + v / 64] |= 1 << (v % 64);
            bits[v * words + u / 64] |= 1 << (u % 64);
        }
        FreeEdges { words, bits }
    }
    fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }
    fn has(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }
    fn clear(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] &= !(1 << (v % 64));
        self.bits[v * self.words + u / 64] &= !(1 << (u % 64));
    }
}

fn ones(row: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &word) in row.iter().enumerate() {
        let mut x = word;
        while x != 0 {
            out.push(w * 64 + x.trailing_zeros() as usize);
            x &= x - 1;
        }
    }
    out
}

/// Grows `clique` to size `ell` inside `pool`, trying candidates in shuffled order.
fn grow<R: rand::Rng>(free: &FreeEdges, clique: &mut Vec<usize>, pool: Vec<u64>, ell: usize, rng: &mut R, budget: &mut usize) -> bool {
    if clique.len() == ell {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let mut cand = ones(&pool);
    if cand.len() < ell - clique.len() {
        return false;
    }
    cand.shuffle(rng);
    for v in cand {
        let next: Vec<u64> = pool.iter().zip(free.row(v)).map(|(a, b)| a & b).collect();
        clique.push(v);
        if grow(free, clique, next, ell, rng, budget) {
            return true;
        }
        clique.pop();
        if *budget == 0 {
            return false;
        }
    }
    false
}

/// Edge-disjoint `ell`-cliques by random greedy: edges in random order,
/// each still-free edge is extended to a clique of free edges if one exists.
/// This is the first colour class of first-fit colouring the clique-edge
/// hypergraph in a random order, without listing every clique.
pub fn random_clique_packing(g: &Graph, ell: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = stream(seed, "clique-packing", ell as u64);
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    edges.shuffle(&mut rng);
    if ell < 2 {
        return Vec::new();
    }
    if ell == 2 {
        return edges.into_iter().map(|(u, v)| vec![u, v]).collect();
    }
    let mut free = FreeEdges::new(g);
    let mut out = Vec::new();
    for (u, v) in edges {
        if !free.has(u, v) {
            continue;
        }
        let pool: Vec<u64> = free.row(u).iter().zip(free.row(v)).map(|(a, b)| a & b).collect();
        let mut clique = vec![u, v];
        let mut budget = 64;
        if grow(&free, &mut clique, pool, ell, &mut rng, &mut budget) {
            for i in 0..clique.len() {
                for j in i + 1..clique.len() {
                    free.clear(clique[i], clique[j]);
                }
            }
            clique.sort_unstable();
            out.push(clique);
        }
    }
    out
}

/// Grows the classes listed in `kept` by moving cliques in from the other
/// classes, evicting at most one clique per move. Moves are scored by a
/// concave function of per-vertex coverage, so thinly covered vertices win.
fn grow_factors<R: rand::Rng>(
    n: usize,
    cliques: &[Vec<usize>],
    classes: &mut [Vec<usize>],
    kept: usize,
    rng: &mut R,
) {
    const NONE: u32 = u32::MAX;
    if kept == 0 {
        return;
    }
    let mut occ = vec![NONE; kept * n];
    let mut cov = vec![0usize; n];
    let mut pool = Vec::new();
    for (c, class) in classes.iter().enumerate() {
        for &q in class {
            if c < kept {
                for &v in &cliques[q] {
                    occ[c * n + v] = q as u32;
                    cov[v] += 1;
                }
            } else {
                pool.push(q);
            }
        }
    }
    if pool.is_empty() {
        return;
    }
    // marginal value of one more factor at a vertex covered `c` times
    let gain = |c: usize| (kept.saturating_sub(c)) as i64;
    let budget = 400 * pool.len() + 20_000;
    for _ in 0..budget {
        let slot = rng.gen_range(0..pool.len());
        let q = pool[slot];
        let mut best: Vec<(usize, Option<u32>)> = Vec::new();
        let mut best_score = i64::MIN;
        for c in 0..kept {
            let mut evict = NONE;
            let mut ok = true;
            for &v in &cliques[q] {
                let o = occ[c * n + v];
                if o != NONE {
                    if evict == NONE || evict == o {
                        evict = o;
                    } else {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut score = 0i64;
            for &v in &cliques[q] {
                if occ[c * n + v] == NONE {
                    score += gain(cov[v]);
                }
            }
            if evict != NONE {
                for &v in &cliques[evict as usize] {
                    if !cliques[q].contains(&v) {
                        score -= gain(cov[v] - 1);
                    }
                }
            }
            if score > best_score {
                best_score = score;
                best.clear();
            }
            if score == best_score {
                best.push((c, (evict != NONE).then_some(evict)));
            }
        }
        if best.is_empty() || best_score < 0 || (best_score == 0 && rng.gen_bool(0.7)) {
            continue;
        }
        let (c, evict) = best[rng.gen_range(0..best.len())];
        if let Some(e) = evict {
            for &v in &cliques[e as usize] {
                occ[c * n + v] = NONE;
                cov[v] -= 1;
            }
            classes[c].retain(|&x| x != e as usize);
            pool[slot] = e as usize;
        } else {
            pool.swap_remove(slot);
        }
        for &v in &cliques[q] {
            occ[c * n + v] = q as u32;
            cov[v] += 1;
        }
        classes[c].push(q);
        if pool.is_empty() {
            break;
        }
    }
    for class in classes.iter_mut().skip(kept) {
        class.clear();
    }
}

/// Clique factors of `layer`: edge-disjoint cliques by random greedy, a
/// proper colouring of them by shared vertices, and the large classes kept
/// and grown with cliques from the rest.
pub fn clique_factor_collection(
    layer: &Graph,
    opts: &FactorOptions,
) -> Result<FactorCollection, CliqueError> {
    let n = layer.vertex_count();
    let ell = opts.ell;
    let active = layer.non_isolated_count();
    let cliques = random_clique_packing(layer, ell, sub_seed(opts.seed, "pack", 0));
    let h = Hypergraph::new(n, cliques);
    let coloring = proper_hyperedge_coloring(&h, sub_seed(opts.seed, "color", 0));
    let mut classes = coloring.classes();
    classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mean_count = if active == 0 {
        0.0
    } else {
        (h.edges.len() * ell) as f64 / active as f64
    };
    let kept = opts
        .target
        .unwrap_or(((1.0 - opts.epsilon) * mean_count).floor() as usize)
        .clamp(usize::from(!classes.is_empty()), classes.len());
    let mut rng = stream(opts.seed, "grow", kept as u64);
    grow_factors(n, &h.edges, &mut classes, kept, &mut rng);
    classes.truncate(kept);
    classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let min_cells = opts.min_cells.unwrap_or(1).max(1);
    let mut factors = Vec::new();
    let mut coverage = vec![0; n];
    for class in classes.into_iter().filter(|c| c.len() >= min_cells) {
        let mut cells: Vec<Vec<usize>> = class.iter().map(|&e| h.edges[e].clone()).collect();
        cells.sort();
        for c in &cells {
            for &v in c {
                coverage[v] += 1;
            }
        }
        factors.push(CliqueFactor {
            factor_id: factors.len(),
            cells,
        });
    }
    if factors.len() < opts.min_factors {
        return Err(CliqueError::InsufficientFactors {
            found: factors.len(),
            required: opts.min_factors,
        });
    }
    let density = if n > 1 {
        2.0 * layer.edge_count() as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };
    let covered: Vec<f64> = (0..n)
        .filter(|&v| layer.degree(v) > 0)
        .map(|v| coverage[v] as f64 / factors.len().max(1) as f64)
        .collect();
    Ok(FactorCollection {
        ell,
        cliques_packed: h.edges.len(),
        colors_used: coloring.count,
        coverage,
        target_factors: (1.0 - opts.epsilon) * n as f64 * density / (ell.max(2) - 1) as f64,
        target_cells: (1.0 - opts.epsilon) * n as f64 / ell as f64,
        min_coverage_fraction: covered.iter().copied().fold(f64::INFINITY, f64::min).min(1.0).max(0.0),
        mean_coverage_fraction: if covered.is_empty() {
            0.0
        } else {
            covered.iter().sum::<f64>() / covered.len() as f64
        },
        factors,
    })
}

/// Checks the structural promises of a collection against `layer`.
pub fn factor_problems(layer: &Graph, c: &FactorCollection) -> Vec<String> {
    let mut problems = Vec::new();
    let mut used = std::collections::HashSet::new();
    for f in &c.factors {
        let mut seen = vec![false; layer.vertex_count()];
        for cell in &f.cells {
            if cell.len() != c.ell {
                problems.push(format!("factor {}: cell of size {}", f.factor_id, cell.len()));
            }
            for (i, &a) in cell.iter().enumerate() {
                if std::mem::replace(&mut seen[a], true) {
                    problems.push(format!("factor {}: vertex {a} twice", f.factor_id));
                }
                for &b in &cell[i + 1..] {
                    if !layer.has_edge(a, b) {
                        problems.push(format!("factor {}: {a}-{b} not in layer", f.factor_id));
                    }
                    if !used.insert(ordered(a, b)) {
                        problems.push(format!("factor {}: {a}-{b} reused", f.factor_id));
                    }
                }
            }
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k6_splits_into_five_perfect_matchings() {
        let c = clique_factor_collection(&Graph::complete(6), &FactorOptions::new(2, 0.0, 4)).unwrap();
        assert_eq!(c.factors.len(), 5);
        assert!(c.factors.iter().all(|f| f.cells.len() == 3));
        assert!(factor_problems(&Graph::complete(6), &c).is_empty());
        assert!(c.coverage.iter().all(|&x| x == 5));
    }

    #[test]
    fn k4_is_one_factor() {
        let c = clique_factor_collection(&Graph::complete(4), &FactorOptions::new(4, 0.0, 0)).unwrap();
        assert_eq!(c.factors.len(), 1);
        assert_eq!(c.factors[0].cells, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn too_few_factors_is_an_error() {
        let mut o = FactorOptions::new(3, 0.0, 0);
        o.min_factors = 2;
        assert!(matches!(
            clique_factor_collection(&Graph::cycle(6), &o),
            Err(CliqueError::InsufficientFactors { found: 0, required: 2 })
        ));
    }

    #[test]
    fn packing_is_edge_disjoint() {
        let g = Graph::complete(12);
        let p = random_clique_packing(&g, 4, 9);
        let mut used = std::collections::HashSet::new();
        for c in &p {
            for i in 0..4 {
                for j in i + 1..4 {
                    assert!(used.insert((c[i], c[j])));
                }
            }
        }
        assert!(p.len() >= 5);
    }
}
