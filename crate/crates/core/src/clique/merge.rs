//! Merging many small guests into fewer larger ones before cell packing.
//!
//! Very small graphs are joined by disjoint union. Mid-sized graphs are
//! merged three at a time: each is split into buckets of whole components,
//! and matching buckets are superposed edge-disjointly onto a common small
//! vertex set. A packing of the merged graphs restricts to one of the inputs.

use crate::error::CliqueError;
use crate::graph::{connected_components, Graph};
use crate::rng::sub_seed;

use super::cell::pack_into_clique;

/// Where each vertex of an input guest went in a merged graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergePart {
    pub guest: usize,
    /// Guest vertex to merged vertex; `None` for dropped isolated vertices.
    pub map: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Merged {
    pub graph: Graph,
    pub parts: Vec<MergePart>,
}

impl Merged {
    fn single(guest: usize, g: &Graph) -> Self {
        Merged {
            graph: g.clone(),
            parts: vec![MergePart {
                guest,
                map: (0..g.vertex_count()).map(Some).collect(),
            }],
        }
    }

    fn stripped(&self) -> Merged {
        let (graph, keep) = self.graph.strip_isolated();
        let mut new_of = vec![None; self.graph.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            new_of[v] = Some(i);
        }
        Merged {
            graph,
            parts: self
                .parts
                .iter()
                .map(|p| MergePart {
                    guest: p.guest,
                    map: p.map.iter().map(|m| m.and_then(|v| new_of[v])).collect(),
                })
                .collect(),
        }
    }

    fn union(&self, other: &Merged) -> Merged {
        let shift = self.graph.vertex_count();
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().map(|p| MergePart {
            guest: p.guest,
            map: p.map.iter().map(|m| m.map(|v| v + shift)).collect(),
        }));
        Merged {
            graph: self.graph.disjoint_union(&other.graph),
            parts,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MergeParams {
    pub ell: usize,
    pub epsilon: f64,
    pub component_bound: usize,
    pub c: usize,
    pub seed: u64,
}

/// Splits the components of `g` into at most `r` buckets of at most `cap` vertices.
fn buckets(g: &Graph, r: usize, cap: usize) -> Option<Vec<Vec<usize>>> {
    let mut comps = connected_components(g);
    comps.retain(|c| c.len() > 1);
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); r];
    for c in comps {
        let slot = out.iter().position(|b| b.len() + c.len() <= cap)?;
        out[slot].extend(c);
    }
    for b in &mut out {
        b.sort_unstable();
    }
    Some(out)
}

fn superpose(three: &[Merged], p: &MergeParams, round: u64) -> Result<Merged, CliqueError> {
    let k = p.component_bound.max(1);
    let host = p.c * k;
    let r = (((1.0 - p.epsilon / 2.0) * p.ell as f64) / host as f64).floor().max(1.0) as usize;
    let cap = (((1.0 - p.epsilon / 4.0) * host as f64).floor() as usize).max(1);
    let split: Vec<Vec<Vec<usize>>> = three
        .iter()
        .map(|m| buckets(&m.graph, r, cap))
        .collect::<Option<_>>()
        .ok_or(CliqueError::BucketSuperposition { c: p.c })?;
    let mut result: Option<Merged> = None;
    for bucket in 0..r {
        let pieces: Vec<Graph> = (0..three.len())
            .map(|j| three[j].graph.induced(&split[j][bucket]))
            .collect();
        let es = pack_into_clique(host, &pieces, sub_seed(p.seed, "superpose", round * 64 + bucket as u64))
            .map_err(|_| CliqueError::BucketSuperposition { c: p.c })?;
        let mut graph = Graph::empty(host);
        let mut parts = Vec::new();
        for (j, e) in es.iter().enumerate() {
            let vs = &split[j][bucket];
            for (a, b) in pieces[j].edges() {
                graph
                    .add_edge(e.get(a).unwrap(), e.get(b).unwrap())
                    .expect("superposition is edge-disjoint");
            }
            for part in &three[j].parts {
                let map = part
                    .map
                    .iter()
                    .map(|m| {
                        m.and_then(|v| vs.binary_search(&v).ok())
                            .and_then(|local| e.get(local))
                    })
                    .collect();
                parts.push(MergePart {
                    guest: part.guest,
                    map,
                });
            }
        }
        let piece = Merged { graph, parts }.stripped();
        result = Some(match result {
            None => piece,
            Some(acc) => combine_parts(&acc, &piece),
        });
    }
    Ok(result.expect("at least one bucket"))
}

/// Disjoint union where parts for the same guest are folded together.
fn combine_parts(a: &Merged, b: &Merged) -> Merged {
    let u = a.union(b);
    let mut parts: Vec<MergePart> = Vec::new();
    for p in u.parts {
        if let Some(q) = parts.iter_mut().find(|q| q.guest == p.guest) {
            for (x, y) in q.map.iter_mut().zip(p.map) {
                if x.is_none() {
                    *x = y;
                }
            }
        } else {
            parts.push(p);
        }
    }
    Merged {
        graph: u.graph,
        parts,
    }
}

/// Merges `guests` for packing into `K_ell`. Every guest edge survives in
/// exactly one merged graph, and the parts record where it went.
pub fn merge_small_graphs(guests: &[Graph], p: &MergeParams) -> Result<Vec<Merged>, CliqueError> {
    let small = (1.0 - p.epsilon) * p.ell as f64 / 4.0;
    let mid = 3.0 * small;
    let mut pool: Vec<Merged> = guests.iter().enumerate().map(|(i, g)| Merged::single(i, g)).collect();
    loop {
        let mut idx: Vec<usize> = (0..pool.len())
            .filter(|&i| pool[i].graph.edge_count() as f64 <= small)
            .collect();
        if idx.len() < 2 {
            break;
        }
        idx.sort_by_key(|&i| (pool[i].graph.edge_count(), i));
        let (a, b) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
        let mb = pool.remove(b);
        let ma = pool.remove(a);
        pool.push(ma.stripped().union(&mb.stripped()));
    }
    let mut round = 0;
    loop {
        let idx: Vec<usize> = (0..pool.len())
            .filter(|&i| {
                let e = pool[i].graph.edge_count() as f64;
                e > small && e <= mid
            })
            .collect();
        if idx.len() < 3 {
            break;
        }
        let chosen = [idx[0], idx[1], idx[2]];
        let three: Vec<Merged> = chosen.iter().map(|&i| pool[i].clone()).collect();
        let merged = superpose(&three, p, round)?;
        for &i in chosen.iter().rev() {
            pool.remove(i);
        }
        pool.push(merged);
        round += 1;
    }
    Ok(pool)
}
