//! Run reports, their canonical JSON and CSV forms, and the embedding dump.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clique::LayerOutcome;
use crate::completion::{AssertionCounters, BalanceReport, CompletionStats, SeparatorStats};
use crate::embedding::{Embedding, Phase};
use crate::error::GraphError;
use crate::slicer::PipelineConstants;
use crate::verify::VerificationReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureInfo {
    pub phase: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub edges: usize,
    pub separator: usize,
    pub two_independent: usize,
    pub component_bound: usize,
    pub layer: usize,
    /// Last phase that finished for this instance, if any.
    pub reached: Option<Phase>,
    /// Matchings found in Phase III.
    pub matchings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub relation: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub instances_ms: f64,
    pub slicing_ms: f64,
    pub phase1_ms: f64,
    pub phase2_ms: f64,
    pub phase3_ms: f64,
    pub verify_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingReport {
    /// Set from the independent verification only.
    pub valid: bool,
    pub failure: Option<FailureInfo>,
    pub seed: u64,
    /// Seed of the attempt the report describes.
    pub run_seed: u64,
    pub config: serde_json::Value,
    pub constants: PipelineConstants,
    pub xi: f64,
    pub zone_cap: usize,
    /// `round(γ^-2)`, the layer count of the literal coupling.
    pub literal_layers: usize,
    pub constant_chain: Vec<ChainEntry>,
    pub instance_count: usize,
    pub total_edges: usize,
    pub density: f64,
    pub instances: Vec<InstanceOutcome>,
    pub layers: Vec<LayerOutcome>,
    pub separators: Vec<SeparatorStats>,
    pub balance: Option<BalanceReport>,
    pub completion: Option<CompletionStats>,
    pub assertions: AssertionCounters,
    /// Zone loads above the cap, recounted from the final maps.
    pub zone_recount: usize,
    pub verification: VerificationReport,
    pub retry_log: Vec<String>,
    pub timings: Timings,
    #[serde(skip)]
    pub embeddings: Vec<Embedding>,
}

impl PackingReport {
    /// Sorted keys, timings left out, so equal runs give equal bytes.
    pub fn to_canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("timings");
        }
        serde_json::to_string_pretty(&value).expect("value serializes") + "\n"
    }

    /// Everything, timings included.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::to_value(self).expect("report serializes"))
            .expect("value serializes")
            + "\n"
    }

    pub fn csv_header() -> &'static str {
        "seed,run_seed,n,instances,total_edges,density,valid,failure_phase,layers,min_factor_coverage,min_matchings,retries,findings,total_ms"
    }

    pub fn to_csv_row(&self) -> String {
        let min_cov = self
            .layers
            .iter()
            .filter(|l| l.factors.found > 0)
            .map(|l| l.factors.min_coverage_fraction)
            .fold(f64::INFINITY, f64::min);
        let min_matchings = self.instances.iter().map(|i| i.matchings).min().unwrap_or(0);
        format!(
            "{},{},{},{},{},{:.6},{},{},{},{},{},{},{},{:.1}",
            self.seed,
            self.run_seed,
            self.constants.n,
            self.instance_count,
            self.total_edges,
            self.density,
            self.valid,
            self.failure.as_ref().map_or("", |f| f.phase.as_str()),
            self.layers.len(),
            if min_cov.is_finite() { format!("{min_cov:.4}") } else { String::new() },
            min_matchings,
            self.retry_log.len(),
            self.verification.findings.len(),
            self.timings.total_ms,
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::csv_header(), self.to_csv_row())
    }
}

/// One line per embedding: `i: v0→x0 v1→x1 ...`, unmapped vertices omitted.
pub fn dump_embeddings(embeddings: &[Embedding]) -> String {
    let mut out = String::new();
    for (i, e) in embeddings.iter().enumerate() {
        write!(out, "{i}:").unwrap();
        for (v, x) in e.pairs() {
            write!(out, " {v}→{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`dump_embeddings`]; `orders[i]` is the guest order of line `i`.
/// Accepts `->` in place of `→`.
pub fn parse_embeddings(text: &str, orders: &[usize]) -> Result<Vec<Embedding>, GraphError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| GraphError::Parse {
            line: lineno + 1,
            message,
        };
        let (head, rest) = line.split_once(':').ok_or_else(|| err("missing ':'".into()))?;
        let i: usize = head.trim().parse().map_err(|_| err(format!("bad index {head:?}")))?;
        if i != out.len() {
            return Err(err(format!("expected embedding {}, found {i}", out.len())));
        }
        let order = *orders
            .get(i)
            .ok_or_else(|| err(format!("no guest for embedding {i}")))?;
        let mut e = Embedding::new(i, order, Phase::Phase3);
        for token in rest.split_whitespace() {
            let (v, x) = token
                .split_once('→')
                .or_else(|| token.split_once("->"))
                .ok_or_else(|| err(format!("bad pair {token:?}")))?;
            let v: usize = v.parse().map_err(|_| err(format!("bad vertex {v:?}")))?;
            let x: usize = x.parse().map_err(|_| err(format!("bad image {x:?}")))?;
            if v >= order {
                return Err(err(format!("vertex {v} outside guest of order {order}")));
            }
            e.set(v, x);
        }
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let mut a = Embedding::new(0, 3, Phase::Phase3);
        a.set(0, 4);
        a.set(2, 1);
        let b = Embedding::total(1, &[2, 0], Phase::Phase3);
        let text = dump_embeddings(&[a.clone(), b.clone()]);
        assert_eq!(text, "0: 0→4 2→1\n1: 0→2 1→0\n");
        let back = parse_embeddings(&text, &[3, 2]).unwrap();
        assert_eq!(back[0].map(), a.map());
        assert_eq!(back[1].map(), b.map());
        let ascii = parse_embeddings("0: 0->4 2->1\n1: 0->2 1->0\n", &[3, 2]).unwrap();
        assert_eq!(ascii, back);
    }

    #[test]
    fn dump_parser_rejects_garbage() {
        assert!(parse_embeddings("0 0→1", &[2]).is_err());
        assert!(parse_embeddings("1: 0→1", &[2, 2]).is_err());
        assert!(parse_embeddings("0: 5→1", &[2]).is_err());
        assert!(parse_embeddings("0: 0=1", &[2]).is_err());
    }
}
