//! Exhaustive packing search for tiny hosts, and the divisibility conditions
//! for perfect packings of one graph into `K_n`.

use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, Phase};
use crate::graph::{pair_index, binomial2, Graph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    /// Embeddings into `K_host_n`, one per guest in input order.
    Packing(Vec<Embedding>),
    Infeasible,
    BudgetExhausted,
}

impl OracleOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OracleOutcome::Packing(_))
    }
}

struct Search<'a> {
    guests: Vec<&'a Graph>,
    /// Guest vertices in BFS order, per guest.
    orders: Vec<Vec<usize>>,
    /// `same_as_prev[k]`: guest `k` equals guest `k - 1`.
    same_as_prev: Vec<bool>,
    n: usize,
    used: Vec<bool>,
    free_degree: Vec<usize>,
    /// Host vertices touched by any used edge.
    touched: Vec<u32>,
    free_edges: usize,
    remaining_edges: usize,
    maps: Vec<Vec<Option<usize>>>,
    nodes: u64,
    budget: u64,
}

fn bfs_order(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut starts: Vec<usize> = (0..n).collect();
    // big components and high degrees first prune earlier
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
            let mut next: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| !seen[u]).collect();
            next.sort_by_key(|&u| std::cmp::Reverse(g.degree(u)));
            for u in next {
                seen[u] = true;
                order.push(u);
            }
        }
    }
    order
}

impl Search<'_> {
    fn run(&mut self, guest: usize, step: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        if guest == self.guests.len() {
            return Some(true);
        }
        if step == self.orders[guest].len() {
            return self.run(guest + 1, 0);
        }
        if self.remaining_edges > self.free_edges {
            return Some(false);
        }
        let g = self.guests[guest];
        let v = self.orders[guest][step];
        let mapped: Vec<usize> = g
            .neighbors(v)
            .iter()
            .filter_map(|&u| self.maps[guest][u])
            .collect();
        let in_use: Vec<bool> = {
            let mut m = vec![false; self.n];
            for x in self.maps[guest].iter().flatten() {
                m[*x] = true;
            }
            m
        };
        // identical consecutive guests: first vertex images non-decreasing
        let floor = if step == 0 && self.same_as_prev[guest] {
            let prev = self.orders[guest - 1][0];
            self.maps[guest - 1][prev].unwrap_or(0)
        } else {
            0
        };
        let mut fresh_tried = false;
        for x in floor..self.n {
            if in_use[x] || self.free_degree[x] < g.degree(v) {
                continue;
            }
            // untouched host vertices outside this guest's image are interchangeable
            let fresh = self.touched[x] == 0;
            if fresh {
                if fresh_tried {
                    continue;
                }
                fresh_tried = true;
            }
            if mapped.iter().any(|&y| self.used[pair_index(x, y)]) {
                continue;
            }
            self.place(guest, v, x, &mapped, true);
            let r = self.run(guest, step + 1);
            self.place(guest, v, x, &mapped, false);
            match r {
                Some(true) => {
                    self.maps[guest][v] = Some(x);
                    return Some(true);
                }
                None => return None,
                Some(false) => {}
            }
        }
        Some(false)
    }

    fn place(&mut self, guest: usize, v: usize, x: usize, mapped: &[usize], on: bool) {
        for &y in mapped {
            let idx = pair_index(x, y);
            self.used[idx] = on;
            if on {
                self.free_degree[x] -= 1;
                self.free_degree[y] -= 1;
                self.touched[x] += 1;
                self.touched[y] += 1;
                self.free_edges -= 1;
                self.remaining_edges -= 1;
            } else {
                self.free_degree[x] += 1;
                self.free_degree[y] += 1;
                self.touched[x] -= 1;
                self.touched[y] -= 1;
                self.free_edges += 1;
                self.remaining_edges += 1;
            }
        }
        self.maps[guest][v] = if on { Some(x) } else { None };
    }
}

/// Exhaustive backtracking packing of `guests` into `K_host_n`.
///
/// Guests are searched largest first. Identical consecutive guests are
/// placed in canonical order, and among host vertices not yet touched by
/// any edge only the smallest is tried. `budget` caps the search nodes.
pub fn brute_force_pack(guests: &[Graph], host_n: usize, budget: u64) -> OracleOutcome {
    if guests.iter().any(|g| g.vertex_count() > host_n) {
        return OracleOutcome::Infeasible;
    }
    let total: usize = guests.iter().map(Graph::edge_count).sum();
    if total > binomial2(host_n) {
        return OracleOutcome::Infeasible;
    }
    let mut order: Vec<usize> = (0..guests.len()).collect();
    order.sort_by(|&a, &b| {
        guests[b]
            .edge_count()
            .cmp(&guests[a].edge_count())
            .then(guests[b].max_degree().cmp(&guests[a].max_degree()))
            .then(guests[a].to_text().cmp(&guests[b].to_text()))
            .then(a.cmp(&b))
    });
    let sorted: Vec<&Graph> = order.iter().map(|&k| &guests[k]).collect();
    let same_as_prev = (0..sorted.len())
        .map(|k| k > 0 && sorted[k] == sorted[k - 1])
        .collect();
    let mut search = Search {
        orders: sorted.iter().map(|g| bfs_order(g)).collect(),
        maps: sorted.iter().map(|g| vec![None; g.vertex_count()]).collect(),
        guests: sorted,
        same_as_prev,
        n: host_n,
        used: vec![false; binomial2(host_n)],
        free_degree: vec![host_n.saturating_sub(1); host_n],
        touched: vec![0; host_n],
        free_edges: binomial2(host_n),
        remaining_edges: total,
        nodes: 0,
        budget,
    };
    match search.run(0, 0) {
        None => OracleOutcome::BudgetExhausted,
        Some(false) => OracleOutcome::Infeasible,
        Some(true) => {
            let mut out = vec![None; guests.len()];
            for (slot, &k) in order.iter().enumerate() {
                out[k] = Some(Embedding::from_map(k, search.maps[slot].clone(), Phase::Phase3));
            }
            OracleOutcome::Packing(out.into_iter().map(Option::unwrap).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub edges_divide: bool,
    pub gcd_divides: bool,
    pub reasons: Vec<String>,
}

impl DivisibilityReport {
    pub fn passes(&self) -> bool {
        self.edges_divide && self.gcd_divides
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Necessary conditions for a perfect packing of copies of `h` into `K_n`:
/// `e(h)` divides `C(n,2)` and the gcd of the non-zero degrees divides `n - 1`.
pub fn divisibility_check(h: &Graph, n: usize) -> DivisibilityReport {
    let e = h.edge_count();
    let pairs = binomial2(n);
    let g = h.degree_sequence().into_iter().filter(|&d| d > 0).fold(0, gcd);
    let edges_divide = e > 0 && pairs.is_multiple_of(e);
    let gcd_divides = g > 0 && n > 0 && (n - 1).is_multiple_of(g);
    let mut reasons = Vec::new();
    if !edges_divide {
        reasons.push(format!("e(H) = {e} does not divide C({n},2) = {pairs}"));
    }
    if !gcd_divides {
        reasons.push(format!("gcd of degrees {g} does not divide n - 1 = {}", n.saturating_sub(1)));
    }
    DivisibilityReport {
        edges_divide,
        gcd_divides,
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::CompleteHost;
    use crate::ledger::PackingLedger;

    fn commits(guests: &[Graph], n: usize, embeddings: &[Embedding]) {
        let mut ledger = PackingLedger::new(n);
        for (g, e) in guests.iter().zip(embeddings) {
            ledger.commit(g, e, &CompleteHost(n)).unwrap();
        }
    }

    #[test]
    fn two_claws_do_not_fit_k4() {
        let claw = Graph::star(3);
        assert_eq!(
            brute_force_pack(&[claw.clone(), claw], 4, 1_000_000),
            OracleOutcome::Infeasible
        );
    }

    #[test]
    fn steiner_triple_system_of_order_seven() {
        let guests = vec![Graph::complete(3); 7];
        match brute_force_pack(&guests, 7, 10_000_000) {
            OracleOutcome::Packing(es) => {
                commits(&guests, 7, &es);
                let mut ledger = PackingLedger::new(7);
                for (g, e) in guests.iter().zip(&es) {
                    ledger.commit(g, e, &CompleteHost(7)).unwrap();
                }
                assert_eq!(ledger.used_count(), 21);
            }
            other => panic!("expected a packing, got {other:?}"),
        }
    }

    #[test]
    fn path_and_star_into_k5() {
        let guests = vec![Graph::path(4), Graph::star(4)];
        match brute_force_pack(&guests, 5, 1_000_000) {
            OracleOutcome::Packing(es) => commits(&guests, 5, &es),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_trees_fill_k3() {
        let guests = vec![Graph::empty(1), Graph::path(2), Graph::path(3)];
        assert!(brute_force_pack(&guests, 3, 1000).is_feasible());
        let guests = vec![Graph::complete(3), Graph::path(2)];
        assert_eq!(brute_force_pack(&guests, 3, 1000), OracleOutcome::Infeasible);
    }

    #[test]
    fn budget_is_reported() {
        let guests = vec![Graph::complete(3); 7];
        assert_eq!(brute_force_pack(&guests, 7, 3), OracleOutcome::BudgetExhausted);
    }

    #[test]
    fn divisibility_examples() {
        assert!(divisibility_check(&Graph::complete(3), 7).passes());
        let r = divisibility_check(&Graph::complete(3), 6);
        assert!(!r.passes());
        assert!(!r.gcd_divides);
        assert!(divisibility_check(&Graph::star(3), 4).passes());
    }
}
