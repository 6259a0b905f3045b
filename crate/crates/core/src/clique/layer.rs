//! Phase I for one layer: the bounded components of every instance in the
//! layer's batch, packed through clique factors of the layer minus its zone.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cell::pack_into_clique_partial;
use super::factors::{clique_factor_collection, FactorOptions};
use crate::balance::{partition_vectors, split_components, SplitInput, WeightVector};
use crate::embedding::{Embedding, HostEdges, Phase};
use crate::error::CliqueError;
use crate::graph::{binomial2, components_within, pair_index, Graph};
use crate::instances::InstanceGraph;
use crate::ledger::PackingLedger;
use crate::rng::{stream, sub_seed};
use crate::slicer::{LayerView, PipelineConstants, SlicedHost};
use crate::Rational;

/// Caps on the spread counters of one layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadCaps {
    /// Instances with `v` in the image of the separator's neighbours.
    pub anchor_s: f64,
    /// Instances with `v` in the image of `I`'s neighbours or outside the image.
    pub free: f64,
    /// The same event for both ends of a pair.
    pub pair: f64,
    pub enforce: bool,
}

impl SpreadCaps {
    /// `2 a t`, `4 (b + xi) t` and `5 (b + xi)^2 t` with `a = Delta delta`,
    /// `b = Delta gamma`, times `slack`.
    pub fn from_constants(c: &PipelineConstants, batch: usize, slack: f64) -> Self {
        let d = c.max_degree as f64;
        let t = batch as f64;
        let beta = d * c.gamma + c.xi().max(0.0);
        SpreadCaps {
            anchor_s: slack * 2.0 * d * c.delta * t,
            free: slack * 4.0 * beta * t,
            pair: slack * 5.0 * beta * beta * t,
            enforce: false,
        }
    }

    pub fn unbounded() -> Self {
        SpreadCaps {
            anchor_s: f64::INFINITY,
            free: f64::INFINITY,
            pair: f64::INFINITY,
            enforce: false,
        }
    }
}

/// Spread counters over the vertices outside one zone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadTallies {
    pub anchor_s: Vec<u32>,
    pub free: Vec<u32>,
    pub max_pair: u32,
}

impl SpreadTallies {
    pub fn max_anchor_s(&self) -> u32 {
        self.anchor_s.iter().copied().max().unwrap_or(0)
    }
    pub fn max_free(&self) -> u32 {
        self.free.iter().copied().max().unwrap_or(0)
    }
}

/// Tallies for the partial maps `embeddings` (Phase I images only).
pub fn spread_tallies(
    n: usize,
    zone_mask: &[bool],
    instances: &[&InstanceGraph],
    embeddings: &[&Embedding],
) -> SpreadTallies {
    let mut anchor_s = vec![0u32; n];
    let mut free = vec![0u32; n];
    let mut pairs = vec![0u32; binomial2(n)];
    for (inst, e) in instances.iter().zip(embeddings) {
        for &a in &inst.anchors_s {
            if let Some(x) = e.get(a) {
                anchor_s[x] += 1;
            }
        }
        let mut hit = vec![false; n];
        for &b in &inst.anchors_i {
            if let Some(x) = e.get(b) {
                hit[x] = true;
            }
        }
        let image = e.image_mask(n);
        for v in 0..n {
            if !zone_mask[v] && !image[v] {
                hit[v] = true;
            }
        }
        let set: Vec<usize> = (0..n).filter(|&v| hit[v] && !zone_mask[v]).collect();
        for (i, &u) in set.iter().enumerate() {
            free[u] += 1;
            for &v in &set[i + 1..] {
                pairs[pair_index(u, v)] += 1;
            }
        }
    }
    SpreadTallies {
        anchor_s,
        free,
        max_pair: pairs.into_iter().max().unwrap_or(0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    pub max_anchor_s: u32,
    pub max_free: u32,
    pub max_pair: u32,
    pub caps: SpreadCaps,
    pub violations: Vec<String>,
}

impl SpreadReport {
    pub fn new(t: &SpreadTallies, caps: SpreadCaps) -> Self {
        let mut violations = Vec::new();
        let mut check = |name: &str, value: u32, cap: f64| {
            if value as f64 > cap {
                violations.push(format!("{name} {value} > {cap:.2}"));
            }
        };
        check("anchor_s", t.max_anchor_s(), caps.anchor_s);
        check("free", t.max_free(), caps.free);
        check("pair", t.max_pair, caps.pair);
        SpreadReport {
            max_anchor_s: t.max_anchor_s(),
            max_free: t.max_free(),
            max_pair: t.max_pair,
            caps,
            violations,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LayerPlan<'a> {
    pub layer: usize,
    /// Instance indices of the batch.
    pub batch: &'a [usize],
    pub ell: usize,
    pub epsilon: f64,
    pub caps: SpreadCaps,
    pub seed: u64,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSummary {
    pub found: usize,
    pub used: usize,
    pub cliques_packed: usize,
    pub colors: usize,
    pub min_cells: usize,
    pub target_factors: f64,
    pub target_cells: f64,
    pub min_coverage_fraction: f64,
    pub mean_coverage_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerOutcome {
    pub layer: usize,
    #[serde(skip)]
    pub embeddings: Vec<Embedding>,
    pub factors: FactorSummary,
    pub assignment_discrepancy: f64,
    pub cells_packed: usize,
    pub oracle_cells: usize,
    /// Components placed outside the factor cells.
    pub spilled_components: usize,
    pub overflow_vertices: usize,
    pub spread: SpreadReport,
}

/// Embeds one connected piece into unused edges of `view`, avoiding `blocked`.
fn spill_component<R: Rng>(
    g: &Graph,
    comp: &[usize],
    view: &LayerView<'_>,
    ledger: &PackingLedger,
    blocked: &[bool],
    map: &mut Embedding,
    rng: &mut R,
) -> bool {
    // BFS order inside the component
    let mut inside = vec![false; g.vertex_count()];
    for &v in comp {
        inside[v] = true;
    }
    let mut order = vec![comp[0]];
    let mut seen = vec![false; g.vertex_count()];
    seen[comp[0]] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &u in g.neighbors(v) {
            if inside[u] && !seen[u] {
                seen[u] = true;
                order.push(u);
            }
        }
    }
    let n = view.order();
    let mut taken = blocked.to_vec();
    let mut budget = 20_000usize;
    fn go<R: Rng>(
        g: &Graph,
        order: &[usize],
        step: usize,
        view: &LayerView<'_>,
        ledger: &PackingLedger,
        taken: &mut Vec<bool>,
        map: &mut Embedding,
        rng: &mut R,
        budget: &mut usize,
        n: usize,
    ) -> bool {
        if step == order.len() {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let v = order[step];
        let mapped: Vec<usize> = g.neighbors(v).iter().filter_map(|&u| map.get(u)).collect();
        let mut cand: Vec<usize> = match mapped.first() {
            Some(&y) => view
                .neighbors(y)
                .filter(|&x| !taken[x] && !ledger.is_used(x, y))
                .collect(),
            None => (0..n).filter(|&x| !taken[x]).collect(),
        };
        cand.retain(|&x| mapped.iter().all(|&y| view.contains(x, y) && !ledger.is_used(x, y)));
        cand.shuffle(rng);
        for x in cand {
            taken[x] = true;
            map.set(v, x);
            if go(g, order, step + 1, view, ledger, taken, map, rng, budget, n) {
                return true;
            }
            map.clear(v);
            taken[x] = false;
            if *budget == 0 {
                return false;
            }
        }
        false
    }
    go(g, &order, 0, view, ledger, &mut taken, map, rng, &mut budget, n)
}

/// Packs `G_i - S_i - I_i` for every `i` in the batch into layer `k` minus
/// its zone and commits the edges. Returned embeddings follow batch order.
pub fn pack_layer(
    host: &SlicedHost,
    instances: &[InstanceGraph],
    plan: &LayerPlan<'_>,
    ledger: &mut PackingLedger,
) -> Result<LayerOutcome, CliqueError> {
    let k = plan.layer;
    let n = host.n();
    let ell = plan.ell;
    let zone_mask: Vec<bool> = (0..n).map(|v| host.zone_of(v) == Some(k)).collect();
    let mut rng = stream(plan.seed, "layer", k as u64);
    let batch: Vec<&InstanceGraph> = plan.batch.iter().map(|&i| &instances[i]).collect();
    let mut maps: Vec<Embedding> = plan
        .batch
        .iter()
        .map(|&i| Embedding::new(i, instances[i].graph.vertex_count(), Phase::Phase1))
        .collect();

    // components too big for a cell are embedded directly later on
    let mut leftovers: Vec<Vec<Vec<usize>>> = vec![Vec::new(); batch.len()];
    let mut active: Vec<Vec<bool>> = Vec::with_capacity(batch.len());
    let mut need = 0;
    for (j, inst) in batch.iter().enumerate() {
        let mut mask = inst.phase1_mask();
        let mut small = 0;
        for comp in components_within(&inst.graph, &mask) {
            if comp.len() > ell {
                leftovers[j].push(comp);
            } else if comp.len() > 1 {
                small += comp.len();
            }
        }
        for comp in &leftovers[j] {
            for &v in comp {
                mask[v] = false;
            }
        }
        need = need.max(small);
        active.push(mask);
    }
    // factors may fall short by an ε fraction; the rest spills
    let min_cells = (((1.0 - plan.epsilon) * need as f64) / ell.max(1) as f64).ceil().max(1.0) as usize;
    let g1 = host.layers[k].without_vertices(&zone_mask);
    let mut outcome = LayerOutcome {
        layer: k,
        embeddings: Vec::new(),
        factors: FactorSummary {
            found: 0,
            used: 0,
            cliques_packed: 0,
            colors: 0,
            min_cells,
            target_factors: 0.0,
            target_cells: 0.0,
            min_coverage_fraction: 0.0,
            mean_coverage_fraction: 0.0,
        },
        assignment_discrepancy: 0.0,
        cells_packed: 0,
        oracle_cells: 0,
        spilled_components: 0,
        overflow_vertices: 0,
        spread: SpreadReport::new(
            &SpreadTallies {
                anchor_s: vec![],
                free: vec![],
                max_pair: 0,
            },
            plan.caps,
        ),
    };
    if batch.is_empty() {
        return Ok(outcome);
    }
    if need == 0 {
        // only singletons fit the cells; place them as overflow
        for (j, mask) in active.iter().enumerate() {
            leftovers[j].extend((0..n).filter(|&v| mask[v]).map(|v| vec![v]));
        }
        return finish_layer(host, plan, ledger, &batch, maps, leftovers, outcome, &zone_mask, &mut rng);
    }

    let collection = clique_factor_collection(
        &g1,
        &FactorOptions {
            ell,
            epsilon: plan.epsilon,
            seed: sub_seed(plan.seed, "factors", k as u64),
            // one factor per instance where the layer allows it
            target: Some(batch.len()),
            min_cells: Some(min_cells),
            min_factors: 1,
        },
    )?;
    let factors = &collection.factors;
    outcome.factors = FactorSummary {
        found: factors.len(),
        used: 0,
        cliques_packed: collection.cliques_packed,
        colors: collection.colors_used,
        min_cells,
        target_factors: collection.target_factors,
        target_cells: collection.target_cells,
        min_coverage_fraction: collection.min_coverage_fraction,
        mean_coverage_fraction: collection.mean_coverage_fraction,
    };

    // instances onto factors, balancing count and phase-one edges
    let kb = batch.iter().map(|i| i.component_bound).max().unwrap_or(1).max(1);
    let vectors: Vec<WeightVector<Rational>> = batch
        .iter()
        .enumerate()
        .map(|(j, inst)| {
            let mask = inst.phase1_mask();
            let e = inst.graph.edges().filter(|&(u, v)| mask[u] && mask[v]).count();
            WeightVector::new(
                j,
                vec![Rational::from_integer(1), Rational::new(e as i64, (kb * n.max(1)) as i64)],
            )
        })
        .collect();
    let parts = partition_vectors(&vectors, factors.len(), sub_seed(plan.seed, "assign", k as u64))?;
    outcome.assignment_discrepancy = crate::Scalar::approx(parts.discrepancy);
    outcome.factors.used = parts.parts.iter().filter(|p| !p.is_empty()).count();

    for (s, members) in parts.parts.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let cells = &factors[s].cells;
        let splits = members
            .iter()
            .map(|&j| {
                let inst = batch[j];
                split_components(
                    &SplitInput {
                        graph: &inst.graph,
                        active: &active[j],
                        anchors_s: &inst.anchors_s,
                        anchors_i: &inst.anchors_i,
                        component_bound: inst.component_bound.min(ell),
                    },
                    cells.len(),
                    Some(ell),
                    f64::INFINITY,
                    sub_seed(plan.seed, "split", (k * 1_000_003 + plan.batch[j]) as u64),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (&j, split) in members.iter().zip(&splits) {
            for &c in &split.spilled {
                leftovers[j].push(split.components[c].clone());
            }
            for &v in &split.overflow {
                leftovers[j].push(vec![v]);
            }
        }
        for (cell_index, cell) in cells.iter().enumerate() {
            let mut owners = Vec::new();
            let mut guests = Vec::new();
            let mut vertex_lists = Vec::new();
            for (&j, split) in members.iter().zip(&splits) {
                let vs = split.cell_vertex_list(cell_index);
                if vs.is_empty() {
                    continue;
                }
                guests.push(batch[j].graph.induced(&vs));
                vertex_lists.push(vs);
                owners.push(j);
            }
            if guests.is_empty() {
                continue;
            }
            let packing = pack_into_clique_partial(
                ell,
                &guests,
                sub_seed(plan.seed, "cell", ((k * 65_537 + s) * 4_099 + cell_index) as u64),
                plan.restarts,
            );
            outcome.cells_packed += 1;
            outcome.oracle_cells += usize::from(packing.used_oracle);
            let mut sigma: Vec<usize> = (0..ell).collect();
            sigma.shuffle(&mut rng);
            for (g, e) in packing.embeddings.iter().enumerate() {
                let j = owners[g];
                match e {
                    Some(e) => {
                        for (a, x) in e.pairs() {
                            maps[j].set(vertex_lists[g][a], cell[sigma[x]]);
                        }
                    }
                    None => {
                        let sub = &guests[g];
                        for comp in crate::graph::connected_components(sub) {
                            leftovers[j].push(comp.iter().map(|&a| vertex_lists[g][a]).collect());
                        }
                    }
                }
            }
        }
    }

    finish_layer(host, plan, ledger, &batch, maps, leftovers, outcome, &zone_mask, &mut rng)
}

/// Commits the cell maps, spills the leftovers and tallies the spread.
#[allow(clippy::too_many_arguments)]
fn finish_layer<R: Rng>(
    host: &SlicedHost,
    plan: &LayerPlan<'_>,
    ledger: &mut PackingLedger,
    batch: &[&InstanceGraph],
    mut maps: Vec<Embedding>,
    mut leftovers: Vec<Vec<Vec<usize>>>,
    mut outcome: LayerOutcome,
    zone_mask: &[bool],
    rng: &mut R,
) -> Result<LayerOutcome, CliqueError> {
    let k = plan.layer;
    let n = host.n();
    let view = host.phase1_view(k);
    for (j, inst) in batch.iter().enumerate() {
        ledger.commit(&inst.graph, &maps[j], &view)?;
    }

    // spill whatever the cells could not hold
    for (j, inst) in batch.iter().enumerate() {
        let mut pieces = std::mem::take(&mut leftovers[j]);
        pieces.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        for comp in pieces {
            let mut blocked = zone_mask.to_vec();
            for x in maps[j].map().iter().flatten() {
                blocked[*x] = true;
            }
            if comp.len() == 1 {
                let free: Vec<usize> = (0..n).filter(|&x| !blocked[x]).collect();
                let Some(&x) = free.choose(rng) else {
                    return Err(CliqueError::Unplaced {
                        instance: plan.batch[j],
                        vertices: 1,
                    });
                };
                maps[j].set(comp[0], x);
                outcome.overflow_vertices += 1;
                continue;
            }
            let before = maps[j].clone();
            if !spill_component(&inst.graph, &comp, &view, ledger, &blocked, &mut maps[j], rng) {
                return Err(CliqueError::Unplaced {
                    instance: plan.batch[j],
                    vertices: comp.len(),
                });
            }
            let mut inside = vec![false; inst.graph.vertex_count()];
            for &v in &comp {
                inside[v] = true;
            }
            let edges: Vec<(usize, usize)> = inst
                .graph
                .edges()
                .filter(|&(u, v)| inside[u] && inside[v])
                .map(|(u, v)| (maps[j].get(u).unwrap(), maps[j].get(v).unwrap()))
                .collect();
            if let Err(e) = ledger.commit_edges(&edges, &view) {
                maps[j] = before;
                return Err(e.into());
            }
            outcome.spilled_components += 1;
        }
    }

    let tallies = spread_tallies(n, zone_mask, batch, &maps.iter().collect::<Vec<_>>());
    outcome.spread = SpreadReport::new(&tallies, plan.caps);
    if plan.caps.enforce {
        let checks = [
            ("anchor_s", tallies.max_anchor_s(), plan.caps.anchor_s),
            ("free", tallies.max_free(), plan.caps.free),
            ("pair", tallies.max_pair, plan.caps.pair),
        ];
        if let Some(&(counter, value, cap)) = checks.iter().find(|c| c.1 as f64 > c.2) {
            return Err(CliqueError::SpreadViolation {
                counter,
                location: format!("layer {k}"),
                value: value as usize,
                cap,
            });
        }
    }
    outcome.embeddings = maps;
    Ok(outcome)
}
