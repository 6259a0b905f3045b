//! Empirical probe of perfect-matching resilience in random bipartite graphs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matching::hopcroft_karp;
use crate::rng::{stream, sub_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilienceRow {
    pub n: usize,
    pub p: f64,
    pub deletion_fraction: f64,
    pub trial: usize,
    pub pm_survived: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilienceStats {
    pub rows: Vec<ResilienceRow>,
    pub survived: usize,
    pub survival_rate: f64,
}

impl ResilienceStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p,deletion_fraction,trial,pm_survived,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n, r.p, r.deletion_fraction, r.trial, r.pm_survived, r.seed
            ));
        }
        out
    }
}

/// Deletes edges greedily: always at a right vertex of least current degree,
/// taking its neighbour of largest degree, while both ends have budget left.
fn adversary(adj: &mut [Vec<bool>], budget: usize) {
    let n = adj.len();
    let mut left_deg: Vec<usize> = adj.iter().map(|row| row.iter().filter(|&&b| b).count()).collect();
    let mut right_deg: Vec<usize> = (0..n).map(|r| (0..n).filter(|&l| adj[l][r]).count()).collect();
    let mut left_spent = vec![0usize; n];
    let mut right_spent = vec![0usize; n];
    loop {
        let target = (0..n)
            .filter(|&r| right_spent[r] < budget)
            .filter(|&r| (0..n).any(|l| adj[l][r] && left_spent[l] < budget))
            .min_by_key(|&r| (right_deg[r], r));
        let Some(r) = target else { break };
        let l = (0..n)
            .filter(|&l| adj[l][r] && left_spent[l] < budget)
            .max_by_key(|&l| (left_deg[l], std::cmp::Reverse(l)))
            .expect("target has a deletable edge");
        adj[l][r] = false;
        left_deg[l] -= 1;
        right_deg[r] -= 1;
        left_spent[l] += 1;
        right_spent[r] += 1;
    }
}

/// Samples `B(n, p)`, lets the adversary delete up to
/// `floor(deletion_fraction n p / 2)` edges at every vertex, and records
/// whether a perfect matching survives.
pub fn estimate_resilience(n: usize, p: f64, deletion_fraction: f64, trials: usize, seed: u64) -> ResilienceStats {
    let budget = (deletion_fraction * n as f64 * p / 2.0).floor() as usize;
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let trial_seed = sub_seed(seed, "resilience", trial as u64);
        let mut rng = stream(trial_seed, "bipartite", n as u64);
        let mut adj: Vec<Vec<bool>> = (0..n).map(|_| (0..n).map(|_| rng.gen_bool(p)).collect()).collect();
        adversary(&mut adj, budget);
        let lists: Vec<Vec<usize>> = adj
            .iter()
            .map(|row| (0..n).filter(|&r| row[r]).collect())
            .collect();
        let m = hopcroft_karp(&lists, n);
        rows.push(ResilienceRow {
            n,
            p,
            deletion_fraction,
            trial,
            pm_survived: m.iter().all(Option::is_some),
            seed: trial_seed,
        });
    }
    let survived = rows.iter().filter(|r| r.pm_survived).count();
    ResilienceStats {
        survival_rate: if trials == 0 { 1.0 } else { survived as f64 / trials as f64 },
        survived,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_deletions_keeps_the_matching() {
        let s = estimate_resilience(60, 0.4, 0.0, 20, 1);
        assert_eq!(s.survived, 20);
        assert!(s.to_csv().starts_with("n,p,deletion_fraction,trial,pm_survived,seed\n"));
        assert_eq!(s.to_csv().lines().count(), 21);
    }

    #[test]
    fn full_budget_in_a_sparse_graph_isolates() {
        let s = estimate_resilience(20, 0.2, 0.999, 20, 2);
        assert!(s.survival_rate < 1.0);
    }
}
