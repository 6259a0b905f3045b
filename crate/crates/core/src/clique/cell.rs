//! Packing a handful of small guests into one `K_ell` cell.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::embedding::{Embedding, Phase};
use crate::error::CliqueError;
use crate::graph::{binomial2, pair_index, Graph};
use crate::oracle::{brute_force_pack, OracleOutcome};
use crate::rng::stream;

/// Exhaustive fallback runs only for cells up to this size.
pub const ORACLE_MAX_ELL: usize = 8;
const ORACLE_BUDGET: u64 = 200_000;
const GUEST_BUDGET: usize = 2_000;

/// Result of a best-effort cell packing; `None` marks an unplaced guest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellPacking {
    pub embeddings: Vec<Option<Embedding>>,
    pub restarts: usize,
    pub used_oracle: bool,
}

impl CellPacking {
    pub fn unplaced(&self) -> Vec<usize> {
        (0..self.embeddings.len()).filter(|&k| self.embeddings[k].is_none()).collect()
    }
}

struct Cell {
    ell: usize,
    used: Vec<bool>,
    free_degree: Vec<usize>,
}

impl Cell {
    fn new(ell: usize) -> Self {
        Cell {
            ell,
            used: vec![false; binomial2(ell)],
            free_degree: vec![ell.saturating_sub(1); ell],
        }
    }
    fn set(&mut self, x: usize, ys: &[usize], on: bool) {
        for &y in ys {
            self.used[pair_index(x, y)] = on;
            if on {
                self.free_degree[x] -= 1;
                self.free_degree[y] -= 1;
            } else {
                self.free_degree[x] += 1;
                self.free_degree[y] += 1;
            }
        }
    }
}

fn guest_order(g: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = Vec::with_capacity(g.vertex_count());
    let mut seen = vec![false; g.vertex_count()];
    let mut starts: Vec<usize> = (0..g.vertex_count()).collect();
    starts.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut head = order.len();
        order.push(s);
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &u in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    order.push(u);
                }
            }
        }
    }
    order
}

fn place_guest<R: Rng>(
    cell: &mut Cell,
    g: &Graph,
    order: &[usize],
    step: usize,
    map: &mut Vec<Option<usize>>,
    rng: &mut R,
    budget: &mut usize,
) -> bool {
    if step == order.len() {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let v = order[step];
    let mapped: Vec<usize> = g.neighbors(v).iter().filter_map(|&u| map[u]).collect();
    let mut taken = vec![false; cell.ell];
    for x in map.iter().flatten() {
        taken[*x] = true;
    }
    let mut cand: Vec<usize> = (0..cell.ell)
        .filter(|&x| !taken[x] && cell.free_degree[x] >= g.degree(v))
        .filter(|&x| mapped.iter().all(|&y| !cell.used[pair_index(x, y)]))
        .collect();
    cand.shuffle(rng);
    // roomiest vertices first; the shuffle breaks ties
    cand.sort_by_key(|&x| std::cmp::Reverse(cell.free_degree[x]));
    for x in cand {
        cell.set(x, &mapped, true);
        map[v] = Some(x);
        if place_guest(cell, g, order, step + 1, map, rng, budget) {
            return true;
        }
        map[v] = None;
        cell.set(x, &mapped, false);
        if *budget == 0 {
            return false;
        }
    }
    false
}

fn greedy_attempt<R: Rng>(ell: usize, guests: &[Graph], rng: &mut R) -> Vec<Option<Embedding>> {
    let mut idx: Vec<usize> = (0..guests.len()).collect();
    idx.shuffle(rng);
    idx.sort_by_key(|&k| std::cmp::Reverse((guests[k].edge_count(), guests[k].max_degree())));
    let mut cell = Cell::new(ell);
    let mut out = vec![None; guests.len()];
    for k in idx {
        let g = &guests[k];
        if g.vertex_count() > ell {
            continue;
        }
        let order = guest_order(g);
        let mut map = vec![None; g.vertex_count()];
        let mut budget = GUEST_BUDGET;
        if place_guest(&mut cell, g, &order, 0, &mut map, rng, &mut budget) {
            out[k] = Some(Embedding::from_map(k, map, Phase::Phase1));
        }
    }
    out
}

fn placed_edges(guests: &[Graph], e: &[Option<Embedding>]) -> usize {
    e.iter()
        .zip(guests)
        .filter(|(e, _)| e.is_some())
        .map(|(_, g)| g.edge_count())
        .sum()
}

/// Best-effort packing: randomised greedy with restarts, then the exhaustive
/// search for small cells. Returns the attempt placing the most edges.
pub fn pack_into_clique_partial(ell: usize, guests: &[Graph], seed: u64, restarts: usize) -> CellPacking {
    let mut rng = stream(seed, "cell", ell as u64);
    let mut best: Option<Vec<Option<Embedding>>> = None;
    for r in 0..=restarts {
        let attempt = greedy_attempt(ell, guests, &mut rng);
        let done = attempt.iter().all(Option::is_some);
        let better = best
            .as_ref()
            .is_none_or(|b| placed_edges(guests, &attempt) > placed_edges(guests, b));
        if better {
            best = Some(attempt);
        }
        if done {
            return CellPacking {
                embeddings: best.unwrap(),
                restarts: r,
                used_oracle: false,
            };
        }
    }
    if ell <= ORACLE_MAX_ELL {
        if let OracleOutcome::Packing(es) = brute_force_pack(guests, ell, ORACLE_BUDGET) {
            return CellPacking {
                embeddings: es.into_iter().map(|e| Some(e.with_phase(Phase::Phase1))).collect(),
                restarts,
                used_oracle: true,
            };
        }
    }
    CellPacking {
        embeddings: best.unwrap_or_default(),
        restarts,
        used_oracle: false,
    }
}

/// Packs every guest edge-disjointly into `K_ell`; embedding `k` belongs to guest `k`.
pub fn pack_into_clique(ell: usize, guests: &[Graph], seed: u64) -> Result<Vec<Embedding>, CliqueError> {
    let restarts = 30;
    let p = pack_into_clique_partial(ell, guests, seed, restarts);
    if p.embeddings.iter().all(Option::is_some) {
        Ok(p.embeddings.into_iter().map(Option::unwrap).collect())
    } else {
        Err(CliqueError::CellPackingFailed { restarts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::CompleteHost;
    use crate::ledger::PackingLedger;

    fn check(ell: usize, guests: &[Graph], es: &[Embedding]) {
        let mut ledger = PackingLedger::new(ell);
        for (g, e) in guests.iter().zip(es) {
            ledger.commit(g, e, &CompleteHost(ell)).unwrap();
        }
    }

    #[test]
    fn three_perfect_matchings_into_k6() {
        let m = Graph::from_edges(6, [(0, 1), (2, 3), (4, 5)]).unwrap();
        let guests = vec![m; 3];
        let es = pack_into_clique(6, &guests, 2).unwrap();
        check(6, &guests, &es);
    }

    #[test]
    fn k6_decomposes_into_five_matchings() {
        let m = Graph::from_edges(6, [(0, 1), (2, 3), (4, 5)]).unwrap();
        let guests = vec![m; 5];
        let es = pack_into_clique(6, &guests, 0).unwrap();
        check(6, &guests, &es);
    }

    #[test]
    fn infeasible_cell_fails() {
        let claw = Graph::star(3);
        assert!(matches!(
            pack_into_clique(4, &[claw.clone(), claw], 0),
            Err(CliqueError::CellPackingFailed { .. })
        ));
        let p = pack_into_clique_partial(4, &[Graph::star(3), Graph::star(3)], 0, 3);
        assert_eq!(p.unplaced().len(), 1);
    }

    #[test]
    fn seven_triangles_via_fallback() {
        let guests = vec![Graph::complete(3); 7];
        let es = pack_into_clique(7, &guests, 5).unwrap();
        check(7, &guests, &es);
    }
}
