//! Vector balancing: split a set of `[0,1]^d` vectors into `m` parts whose
//! coordinate sums all sit close to the average, then the two pipeline uses
//! of it (batching instances over layers, spreading components over cells).
//!
//! The partitioner is a seeded greedy pass followed by move/swap local
//! search under a fixed attempt budget. It is generic over [`Scalar`], so the
//! same code runs on `f64` or on exact rationals.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::BalanceError;
use crate::graph::{components_within, Graph};
use crate::instances::{InstanceGraph, InstanceSet};
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    pub coords: Vec<T>,
    pub payload_id: usize,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(payload_id: usize, coords: Vec<T>) -> Self {
        WeightVector { coords, payload_id }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult<T> {
    /// Payload ids per part.
    pub parts: Vec<Vec<usize>>,
    pub per_part_sums: Vec<Vec<T>>,
    pub discrepancy: T,
}

impl<T: Scalar> PartitionResult<T> {
    /// Recomputes the discrepancy of `parts` from the input vectors.
    pub fn recompute_discrepancy(&self, vectors: &[WeightVector<T>]) -> T {
        discrepancy_of(vectors, &self.parts)
    }
}

/// Largest `|part sum - average|` over parts and coordinates.
pub fn discrepancy_of<T: Scalar>(vectors: &[WeightVector<T>], parts: &[Vec<usize>]) -> T {
    let d = vectors.first().map_or(0, |v| v.coords.len());
    let m = parts.len().max(1);
    let by_id = |id: usize| {
        vectors
            .iter()
            .find(|v| v.payload_id == id)
            .expect("payload present")
    };
    let mut total = vec![T::zero(); d];
    for v in vectors {
        for (t, &c) in total.iter_mut().zip(&v.coords) {
            *t = *t + c;
        }
    }
    let target: Vec<T> = total.iter().map(|&t| t / T::of(m)).collect();
    let mut worst = T::zero();
    for part in parts {
        let mut sum = vec![T::zero(); d];
        for &id in part {
            for (s, &c) in sum.iter_mut().zip(&by_id(id).coords) {
                *s = *s + c;
            }
        }
        for (s, t) in sum.iter().zip(&target) {
            worst = worst.max_of((*s - *t).abs());
        }
    }
    worst
}

struct Balancer<'a, T> {
    vectors: &'a [WeightVector<T>],
    target: Vec<T>,
    sums: Vec<Vec<T>>,
    members: Vec<Vec<usize>>,
    part_of: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct Score<T> {
    max: T,
    sumsq: T,
}

impl<'a, T: Scalar> Balancer<'a, T> {
    fn new(vectors: &'a [WeightVector<T>], m: usize) -> Self {
        let d = vectors.first().map_or(0, |v| v.coords.len());
        let mut total = vec![T::zero(); d];
        for v in vectors {
            for (t, &c) in total.iter_mut().zip(&v.coords) {
                *t = *t + c;
            }
        }
        let target = total.iter().map(|&t| t / T::of(m)).collect();
        Balancer {
            vectors,
            target,
            sums: vec![vec![T::zero(); d]; m],
            members: vec![Vec::new(); m],
            part_of: vec![usize::MAX; vectors.len()],
        }
    }

    fn place(&mut self, x: usize, part: usize) {
        for (s, &c) in self.sums[part].iter_mut().zip(&self.vectors[x].coords) {
            *s = *s + c;
        }
        self.members[part].push(x);
        self.part_of[x] = part;
    }

    fn unplace(&mut self, x: usize) {
        let part = self.part_of[x];
        for (s, &c) in self.sums[part].iter_mut().zip(&self.vectors[x].coords) {
            *s = *s - c;
        }
        let pos = self.members[part].iter().position(|&y| y == x).unwrap();
        self.members[part].swap_remove(pos);
        self.part_of[x] = usize::MAX;
    }

    fn score_with(&self, overrides: &[(usize, &[T])]) -> Score<T> {
        let mut max = T::zero();
        let mut sumsq = T::zero();
        for (j, row) in self.sums.iter().enumerate() {
            let row = overrides
                .iter()
                .find(|(p, _)| *p == j)
                .map_or(row.as_slice(), |(_, r)| r);
            for (s, t) in row.iter().zip(&self.target) {
                let dev = *s - *t;
                max = max.max_of(dev.abs());
                sumsq = sumsq + dev * dev;
            }
        }
        Score { max, sumsq }
    }

    fn score(&self) -> Score<T> {
        self.score_with(&[])
    }

    fn greedy(&mut self, order: &[usize]) {
        let m = self.sums.len();
        for &x in order {
            let mut best = 0;
            let mut best_key: Option<(T, T)> = None;
            for j in 0..m {
                let mut over = None::<T>;
                let mut fill = T::zero();
                for ((s, t), &c) in self.sums[j]
                    .iter()
                    .zip(&self.target)
                    .zip(&self.vectors[x].coords)
                {
                    let dev = *s + c - *t;
                    over = Some(over.map_or(dev, |o| o.max_of(dev)));
                    fill = fill + *s;
                }
                let key = (over.unwrap_or_else(T::zero), fill);
                if best_key.is_none_or(|b| key < b) {
                    best_key = Some(key);
                    best = j;
                }
            }
            self.place(x, best);
        }
    }

    fn shifted(&self, part: usize, add: Option<usize>, remove: Option<usize>) -> Vec<T> {
        let mut row = self.sums[part].clone();
        if let Some(a) = add {
            for (s, &c) in row.iter_mut().zip(&self.vectors[a].coords) {
                *s = *s + c;
            }
        }
        if let Some(r) = remove {
            for (s, &c) in row.iter_mut().zip(&self.vectors[r].coords) {
                *s = *s - c;
            }
        }
        row
    }

    fn worst_part(&self) -> usize {
        let mut best = 0;
        let mut worst = None::<T>;
        for (j, row) in self.sums.iter().enumerate() {
            for (s, t) in row.iter().zip(&self.target) {
                let dev = (*s - *t).abs();
                if worst.is_none_or(|w| dev > w) {
                    worst = Some(dev);
                    best = j;
                }
            }
        }
        best
    }

    /// Move/swap local search around the worst part; returns attempts used.
    fn improve(&mut self, budget: usize) -> usize {
        let m = self.sums.len();
        let mut attempts = 0;
        if m < 2 {
            return 0;
        }
        let mut current = self.score();
        'outer: loop {
            let w = self.worst_part();
            let mut applied = false;
            'search: for k in (0..m).filter(|&k| k != w) {
                let from_w = self.members[w].clone();
                let from_k = self.members[k].clone();
                for &x in &from_w {
                    attempts += 1;
                    if attempts > budget {
                        break 'outer;
                    }
                    let rw = self.shifted(w, None, Some(x));
                    let rk = self.shifted(k, Some(x), None);
                    let s = self.score_with(&[(w, &rw), (k, &rk)]);
                    if s < current {
                        self.unplace(x);
                        self.place(x, k);
                        current = s;
                        applied = true;
                        break 'search;
                    }
                }
                for &y in &from_k {
                    attempts += 1;
                    if attempts > budget {
                        break 'outer;
                    }
                    let rw = self.shifted(w, Some(y), None);
                    let rk = self.shifted(k, None, Some(y));
                    let s = self.score_with(&[(w, &rw), (k, &rk)]);
                    if s < current {
                        self.unplace(y);
                        self.place(y, w);
                        current = s;
                        applied = true;
                        break 'search;
                    }
                }
                for &x in &from_w {
                    for &y in &from_k {
                        attempts += 1;
                        if attempts > budget {
                            break 'outer;
                        }
                        let rw = self.shifted(w, Some(y), Some(x));
                        let rk = self.shifted(k, Some(x), Some(y));
                        let s = self.score_with(&[(w, &rw), (k, &rk)]);
                        if s < current {
                            self.unplace(x);
                            self.unplace(y);
                            self.place(x, k);
                            self.place(y, w);
                            current = s;
                            applied = true;
                            break 'search;
                        }
                    }
                }
            }
            if !applied {
                break;
            }
        }
        attempts.min(budget)
    }

    /// Depth-first over all assignments; `used` parts are open so far, which
    /// skips relabelled copies.
    fn exhaustive(&mut self, x: usize, used: usize, best: &mut Option<(Score<T>, PartitionResult<T>)>) {
        if x == self.vectors.len() {
            let s = self.score();
            if best.as_ref().is_none_or(|(bs, _)| s < *bs) {
                *best = Some((s, self.result()));
            }
            return;
        }
        let m = self.sums.len();
        for j in 0..m.min(used + 1) {
            self.place(x, j);
            self.exhaustive(x + 1, used.max(j + 1), best);
            self.unplace(x);
        }
    }

    fn result(&self) -> PartitionResult<T> {
        let parts = self
            .members
            .iter()
            .map(|mem| {
                let mut ids: Vec<usize> =
                    mem.iter().map(|&x| self.vectors[x].payload_id).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        PartitionResult {
            parts,
            per_part_sums: self.sums.clone(),
            discrepancy: self.score().max,
        }
    }
}

fn check_input<T: Scalar>(a: &[WeightVector<T>], m: usize) -> Result<(), BalanceError> {
    if m == 0 {
        return Err(BalanceError::NoParts);
    }
    let d = a.first().map_or(0, |v| v.coords.len());
    for v in a {
        if v.coords.len() != d {
            return Err(BalanceError::Dimension);
        }
        if v.coords.iter().any(|&c| c < T::zero() || c > T::one()) {
            return Err(BalanceError::CoordinateRange {
                payload: v.payload_id,
            });
        }
    }
    Ok(())
}

/// Greedy + local search partition, returned even when it is poor.
///
/// Inputs with few enough assignments are solved exactly. Otherwise uses
/// `10 * |A|` move/swap evaluations in total, split over seeded restarts.
pub fn partition_vectors<T: Scalar>(
    a: &[WeightVector<T>],
    m: usize,
    seed: u64,
) -> Result<PartitionResult<T>, BalanceError> {
    partition_with_budget(a, m, seed, 10 * a.len())
}

pub fn partition_with_budget<T: Scalar>(
    a: &[WeightVector<T>],
    m: usize,
    seed: u64,
    budget: usize,
) -> Result<PartitionResult<T>, BalanceError> {
    check_input(a, m)?;
    if exhaustive_fits(a.len(), m) {
        let mut b = Balancer::new(a, m);
        let mut best = None;
        b.exhaustive(0, 0, &mut best);
        let (_, mut result) = best.expect("at least one leaf");
        if b_dim(a) == 0 {
            result.discrepancy = T::zero();
        }
        return Ok(result);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..a.len()).collect();
    let mut remaining = budget;
    let mut best: Option<(Score<T>, PartitionResult<T>)> = None;
    loop {
        order.shuffle(&mut rng);
        let mut b = Balancer::new(a, m);
        b.greedy(&order);
        let used = b.improve(remaining);
        remaining -= used;
        let s = b.score();
        if best.as_ref().is_none_or(|(bs, _)| s < *bs) {
            best = Some((s, b.result()));
        }
        let done = best
            .as_ref()
            .is_none_or(|(bs, _)| bs.max == T::zero());
        // a restart needs at least one sweep worth of evaluations
        if done || used == 0 || remaining < a.len() {
            break;
        }
    }
    let (_, mut result) = best.expect("at least one pass");
    if b_dim(a) == 0 {
        result.discrepancy = T::zero();
    }
    Ok(result)
}

const EXHAUSTIVE_LEAVES: usize = 200_000;

/// Small enough to enumerate: at most `m^(|A|-1)` leaves.
fn exhaustive_fits(len: usize, m: usize) -> bool {
    let mut leaves: usize = 1;
    for _ in 1..len {
        leaves = leaves.saturating_mul(m);
        if leaves > EXHAUSTIVE_LEAVES {
            return false;
        }
    }
    true
}

fn b_dim<T>(a: &[WeightVector<T>]) -> usize {
    a.first().map_or(0, |v| v.coords.len())
}

/// Partition into `m` parts with discrepancy at most `tolerance`.
pub fn balanced_partition<T: Scalar>(
    a: &[WeightVector<T>],
    m: usize,
    tolerance: T,
    seed: u64,
) -> Result<PartitionResult<T>, BalanceError> {
    let result = partition_vectors(a, m, seed)?;
    if result.discrepancy > tolerance {
        return Err(BalanceError::ToleranceUnmet {
            achieved: result.discrepancy.approx(),
            tolerance: tolerance.approx(),
        });
    }
    Ok(result)
}

/// Tolerance `3d` for `d`-dimensional inputs.
pub fn default_tolerance<T: Scalar>(d: usize) -> T {
    T::of(3 * d)
}

/// Assignment of instances to layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Batches {
    pub batches: Vec<Vec<usize>>,
    pub discrepancy: f64,
    pub max_batch_size: usize,
    /// `t / M + discrepancy`.
    pub size_window: f64,
    pub max_edge_sum: usize,
    /// `(sum of e) / M + discrepancy * Delta * n / 2`.
    pub edge_window: f64,
}

/// Splits instances into `m` batches balancing count and edge total.
///
/// Uses the exact vectors `(1, 2e(G_i) / (Delta n))`.
pub fn group_graphs(
    instances: &InstanceSet,
    m: usize,
    tolerance: f64,
    seed: u64,
) -> Result<Batches, BalanceError> {
    let scale = instances.max_degree.max(1) * instances.n.max(1);
    let vectors: Vec<WeightVector<Rational>> = instances
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            WeightVector::new(
                i,
                vec![
                    Rational::from_integer(1),
                    Rational::new((2 * inst.graph.edge_count()) as i64, scale as i64),
                ],
            )
        })
        .collect();
    let result = partition_vectors(&vectors, m, seed)?;
    let disc = result.discrepancy.approx();
    if disc > tolerance {
        return Err(BalanceError::ToleranceUnmet {
            achieved: disc,
            tolerance,
        });
    }
    let t = instances.instances.len();
    let total: usize = instances.total_edges;
    let edge_sum = |b: &Vec<usize>| -> usize {
        b.iter()
            .map(|&i| instances.instances[i].graph.edge_count())
            .sum()
    };
    Ok(Batches {
        max_batch_size: result.parts.iter().map(Vec::len).max().unwrap_or(0),
        max_edge_sum: result.parts.iter().map(edge_sum).max().unwrap_or(0),
        size_window: t as f64 / m as f64 + disc,
        edge_window: total as f64 / m as f64 + disc * scale as f64 / 2.0,
        discrepancy: disc,
        batches: result.parts,
    })
}

/// Components of one instance distributed over the cells of a clique factor.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSplit {
    /// Vertex sets of the components being split, each sorted.
    pub components: Vec<Vec<usize>>,
    /// Component indices per cell.
    pub cells: Vec<Vec<usize>>,
    /// Singleton components that did not fit any cell.
    pub overflow: Vec<usize>,
    /// Larger components that did not fit any cell, by index.
    pub spilled: Vec<usize>,
    pub cell_vertices: Vec<usize>,
    pub cell_edges: Vec<usize>,
    pub cell_anchors_s: Vec<usize>,
    pub cell_anchors_i: Vec<usize>,
    /// Discrepancy of the balancing step, in units of the scaled coordinates.
    pub discrepancy: f64,
    /// Largest `|v(H_j) - v/b|` after capacity repair.
    pub vertex_deviation: f64,
    pub edge_deviation: f64,
}

impl CellSplit {
    /// Vertices assigned to cell `j`, components kept contiguous.
    pub fn cell_vertex_list(&self, j: usize) -> Vec<usize> {
        self.cells[j]
            .iter()
            .flat_map(|&c| self.components[c].iter().copied())
            .collect()
    }
}

/// Input to [`split_components`]: a graph with an active vertex mask.
pub struct SplitInput<'a> {
    pub graph: &'a Graph,
    pub active: &'a [bool],
    pub anchors_s: &'a [usize],
    pub anchors_i: &'a [usize],
    /// Upper bound on component size used to scale the vectors.
    pub component_bound: usize,
}

/// Spreads the components of `input` over `b` cells.
///
/// Each component `C` becomes `(v(C)/K, e(C)/K^2, |C n A|/K, |C n B|/K)`.
/// With `capacity = Some(l)` no cell receives more than `l` vertices:
/// the smallest components are moved first. Singletons that fit nowhere go
/// to `overflow`, larger components to `spilled`. A component bigger than
/// the capacity itself is an error.
pub fn split_components(
    input: &SplitInput<'_>,
    b: usize,
    capacity: Option<usize>,
    tolerance: f64,
    seed: u64,
) -> Result<CellSplit, BalanceError> {
    if b == 0 {
        return Err(BalanceError::NoParts);
    }
    let g = input.graph;
    let k = input.component_bound.max(1) as i64;
    let components = components_within(g, input.active);
    let mut in_a = vec![false; g.vertex_count()];
    let mut in_b = vec![false; g.vertex_count()];
    for &v in input.anchors_s {
        in_a[v] = true;
    }
    for &v in input.anchors_i {
        in_b[v] = true;
    }
    let stats: Vec<[usize; 4]> = components
        .iter()
        .map(|c| {
            let edges = c.iter().map(|&v| g.degree_within(v, input.active)).sum::<usize>() / 2;
            [
                c.len(),
                edges,
                c.iter().filter(|&&v| in_a[v]).count(),
                c.iter().filter(|&&v| in_b[v]).count(),
            ]
        })
        .collect();
    let largest = stats.iter().map(|s| s[0]).max().unwrap_or(0) as i64;
    let k = k.max(largest);
    let vectors: Vec<WeightVector<Rational>> = stats
        .iter()
        .enumerate()
        .map(|(i, s)| {
            WeightVector::new(
                i,
                vec![
                    Rational::new(s[0] as i64, k),
                    Rational::new(s[1] as i64, k * k),
                    Rational::new(s[2] as i64, k),
                    Rational::new(s[3] as i64, k),
                ],
            )
        })
        .collect();
    let result = partition_vectors(&vectors, b, seed)?;
    let disc = result.discrepancy.approx();
    if disc > tolerance {
        return Err(BalanceError::ToleranceUnmet {
            achieved: disc,
            tolerance,
        });
    }
    let mut cells = result.parts;
    let mut overflow = Vec::new();
    let mut spilled = Vec::new();
    if let Some(cap) = capacity {
        repair_capacity(&stats, &mut cells, (&mut overflow, &mut spilled), cap, &components)?;
    }
    let sum_over = |cell: &Vec<usize>, f: usize| cell.iter().map(|&c| stats[c][f]).sum::<usize>();
    let cell_vertices: Vec<usize> = cells.iter().map(|c| sum_over(c, 0)).collect();
    let cell_edges: Vec<usize> = cells.iter().map(|c| sum_over(c, 1)).collect();
    let total_v: usize = stats.iter().map(|s| s[0]).sum();
    let total_e: usize = stats.iter().map(|s| s[1]).sum();
    let dev = |xs: &[usize], total: usize| {
        xs.iter()
            .map(|&x| (x as f64 - total as f64 / b as f64).abs())
            .fold(0.0, f64::max)
    };
    Ok(CellSplit {
        vertex_deviation: dev(&cell_vertices, total_v),
        edge_deviation: dev(&cell_edges, total_e),
        cell_anchors_s: cells.iter().map(|c| sum_over(c, 2)).collect(),
        cell_anchors_i: cells.iter().map(|c| sum_over(c, 3)).collect(),
        cell_vertices,
        cell_edges,
        cells,
        overflow,
        spilled,
        components,
        discrepancy: disc,
    })
}

fn repair_capacity(
    stats: &[[usize; 4]],
    cells: &mut [Vec<usize>],
    (overflow, spilled): (&mut Vec<usize>, &mut Vec<usize>),
    cap: usize,
    components: &[Vec<usize>],
) -> Result<(), BalanceError> {
    let load = |cell: &Vec<usize>| cell.iter().map(|&c| stats[c][0]).sum::<usize>();
    let total: usize = stats.iter().map(|s| s[0]).sum();
    let largest = stats.iter().map(|s| s[0]).max().unwrap_or(0);
    let overflow_error = || BalanceError::CellOverflow {
        capacity: cap,
        largest,
        total,
    };
    if largest > cap {
        return Err(overflow_error());
    }
    for j in 0..cells.len() {
        while load(&cells[j]) > cap {
            // evict the smallest component, singletons first
            let (pos, &comp) = cells[j]
                .iter()
                .enumerate()
                .min_by_key(|(_, &c)| (stats[c][0], stats[c][1]))
                .expect("overfull cell is non-empty");
            let size = stats[comp][0];
            cells[j].swap_remove(pos);
            let target = (0..cells.len())
                .filter(|&i| i != j && load(&cells[i]) + size <= cap)
                .max_by_key(|&i| (cap - load(&cells[i]), std::cmp::Reverse(i)));
            match target {
                Some(i) => cells[i].push(comp),
                None if size == 1 => overflow.push(components[comp][0]),
                None => spilled.push(comp),
            }
        }
    }
    for cell in cells.iter_mut() {
        cell.sort_unstable();
    }
    overflow.sort_unstable();
    spilled.sort_unstable();
    Ok(())
}

/// [`split_components`] applied to the phase-one part `G - S - I` of an instance.
pub fn split_instance(
    inst: &InstanceGraph,
    b: usize,
    capacity: Option<usize>,
    tolerance: f64,
    seed: u64,
) -> Result<CellSplit, BalanceError> {
    let active = inst.phase1_mask();
    split_components(
        &SplitInput {
            graph: &inst.graph,
            active: &active,
            anchors_s: &inst.anchors_s,
            anchors_i: &inst.anchors_i,
            component_bound: inst.component_bound,
        },
        b,
        capacity,
        tolerance,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(values: &[(i64, i64)]) -> Vec<WeightVector<Rational>> {
        values
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| WeightVector::new(i, vec![Rational::new(a, b)]))
            .collect()
    }

    #[test]
    fn four_equal_vectors_split_evenly() {
        let a: Vec<WeightVector<f64>> =
            (0..4).map(|i| WeightVector::new(i, vec![1.0, 0.5])).collect();
        let r = balanced_partition(&a, 2, 6.0, 1).unwrap();
        assert_eq!(r.discrepancy, 0.0);
        for (part, sums) in r.parts.iter().zip(&r.per_part_sums) {
            assert_eq!(part.len(), 2);
            assert_eq!(sums, &vec![2.0, 1.0]);
        }
    }

    #[test]
    fn one_dimensional_exact_split() {
        // {0.9, 0.8, 0.1, 0.2}: the only zero-discrepancy split pairs 0.9 with 0.1
        let a = exact(&[(9, 10), (8, 10), (1, 10), (2, 10)]);
        for seed in 0..20 {
            let r = balanced_partition(&a, 2, Rational::from_integer(3), seed).unwrap();
            assert_eq!(r.discrepancy, Rational::from_integer(0), "seed {seed}");
            let mut parts = r.parts.clone();
            parts.sort();
            assert_eq!(parts, vec![vec![0, 2], vec![1, 3]]);
        }
    }

    #[test]
    fn reported_discrepancy_is_recomputable() {
        let a = exact(&[(3, 7), (1, 2), (5, 9), (1, 3), (2, 3), (1, 11), (4, 5)]);
        let r = partition_vectors(&a, 3, 9).unwrap();
        assert_eq!(r.discrepancy, r.recompute_discrepancy(&a));
    }

    fn exhaustive_optimum(a: &[WeightVector<f64>], m: usize) -> f64 {
        let mut best = f64::INFINITY;
        let mut assign = vec![0usize; a.len()];
        loop {
            let mut parts = vec![Vec::new(); m];
            for (x, &p) in assign.iter().enumerate() {
                parts[p].push(a[x].payload_id);
            }
            best = best.min(discrepancy_of(a, &parts));
            let mut k = 0;
            while k < assign.len() {
                assign[k] += 1;
                if assign[k] < m {
                    break;
                }
                assign[k] = 0;
                k += 1;
            }
            if k == assign.len() {
                return best;
            }
        }
    }

    #[test]
    fn within_twice_the_exhaustive_optimum() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..40 {
            let size = rng.gen_range(1..=9);
            let m = rng.gen_range(1..=3);
            let d = rng.gen_range(1..=2);
            let a: Vec<WeightVector<f64>> = (0..size)
                .map(|i| WeightVector::new(i, (0..d).map(|_| rng.gen::<f64>()).collect()))
                .collect();
            let got = partition_vectors(&a, m, case).unwrap().discrepancy;
            let opt = exhaustive_optimum(&a, m);
            assert!(got <= 2.0 * opt + 1e-12, "case {case}: {got} vs optimum {opt}");
        }
    }

    #[test]
    fn thousand_planar_vectors_meet_three_d() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<WeightVector<f64>> = (0..1000)
            .map(|i| WeightVector::new(i, vec![rng.gen(), rng.gen()]))
            .collect();
        let r = balanced_partition(&a, 10, default_tolerance(2), 1).unwrap();
        assert!(r.discrepancy <= 6.0);
        let mut ids: Vec<usize> = r.parts.concat();
        ids.sort_unstable();
        assert_eq!(ids, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn input_validation() {
        let a = vec![WeightVector::new(0, vec![1.5f64])];
        assert_eq!(
            partition_vectors(&a, 2, 0).unwrap_err(),
            BalanceError::CoordinateRange { payload: 0 }
        );
        assert_eq!(
            partition_vectors::<f64>(&[], 0, 0).unwrap_err(),
            BalanceError::NoParts
        );
        let mixed = vec![
            WeightVector::new(0, vec![0.5f64]),
            WeightVector::new(1, vec![0.5, 0.5]),
        ];
        assert_eq!(
            partition_vectors(&mixed, 2, 0).unwrap_err(),
            BalanceError::Dimension
        );
    }

    #[test]
    fn tolerance_unmet_is_reported() {
        let a = vec![WeightVector::new(0, vec![1.0f64])];
        let err = balanced_partition(&a, 2, 0.1, 0).unwrap_err();
        assert!(matches!(err, BalanceError::ToleranceUnmet { achieved, .. } if achieved == 0.5));
    }

    #[test]
    fn identical_components_fill_cells_evenly() {
        let b = 5;
        let g = (0..2 * b).fold(Graph::empty(0), |acc, _| acc.disjoint_union(&Graph::path(3)));
        let active = vec![true; g.vertex_count()];
        let split = split_components(
            &SplitInput {
                graph: &g,
                active: &active,
                anchors_s: &[],
                anchors_i: &[],
                component_bound: 3,
            },
            b,
            None,
            12.0,
            4,
        )
        .unwrap();
        assert!(split.cells.iter().all(|c| c.len() == 2));
        assert_eq!(split.vertex_deviation, 0.0);
        assert_eq!(split.discrepancy, 0.0);
    }

    #[test]
    fn empty_graph_gives_empty_cells() {
        let g = Graph::empty(0);
        let split = split_components(
            &SplitInput {
                graph: &g,
                active: &[],
                anchors_s: &[],
                anchors_i: &[],
                component_bound: 1,
            },
            4,
            Some(3),
            12.0,
            0,
        )
        .unwrap();
        assert_eq!(split.cells, vec![Vec::<usize>::new(); 4]);
        assert!(split.overflow.is_empty());
    }

    #[test]
    fn capacity_is_enforced() {
        // five triangles and four singletons into three cells of capacity 4
        let mut g = Graph::empty(0);
        for _ in 0..3 {
            g = g.disjoint_union(&Graph::complete(3));
        }
        g = g.padded(g.vertex_count() + 4);
        let active = vec![true; g.vertex_count()];
        let split = split_components(
            &SplitInput {
                graph: &g,
                active: &active,
                anchors_s: &[],
                anchors_i: &[],
                component_bound: 3,
            },
            3,
            Some(4),
            12.0,
            2,
        )
        .unwrap();
        assert!(split.cell_vertices.iter().all(|&v| v <= 4));
        let placed: usize = split.cell_vertices.iter().sum::<usize>() + split.overflow.len();
        assert_eq!(placed, 13);
        assert_eq!(split.overflow.len(), 1);

        let err = split_components(
            &SplitInput {
                graph: &g,
                active: &active,
                anchors_s: &[],
                anchors_i: &[],
                component_bound: 3,
            },
            3,
            Some(2),
            12.0,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, BalanceError::CellOverflow { .. }));
    }
}
