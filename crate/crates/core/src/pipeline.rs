//! End-to-end runs: config, instance preparation, the three phases with
//! their retries, and the final independent verification.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::balance::{default_tolerance, group_graphs};
use crate::clique::{pack_layer, LayerOutcome, LayerPlan, SpreadCaps};
use crate::completion::{
    check_balance, complete_embeddings, embed_separators, CompletionOptions, PhaseState,
};
use crate::embedding::{CompleteHost, Embedding, Phase};
use crate::error::{ConfigError, Error};
use crate::graph::{binomial2, connected_components, Graph};
use crate::instances::{
    cheap_two_independent, find_separator_capped, find_two_independent, gen_bounded_tree, gen_forest,
    gen_oberwolfach, gen_tpc_sequence, normalize_collection, InstanceSet,
};
use crate::report::{ChainEntry, FailureInfo, InstanceOutcome, PackingReport, Timings};
use crate::rng::{stream, sub_seed};
use crate::slicer::{PipelineConstants, SlicedHost};
use crate::verify::{recompute_spread, verify_discipline, verify_packing, Finding};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `count` random trees with orders uniform in `[min_order, n]`.
    Trees {
        count: usize,
        #[serde(default)]
        min_order: Option<usize>,
    },
    /// `T_lo, ..., T_n` with `v(T_i) = i`.
    TpcSequence { lo: usize },
    /// `copies` copies of the disjoint union of cycles of the given lengths.
    Oberwolfach { cycle_lengths: Vec<usize>, copies: usize },
    /// `count` spanning forests whose trees have at most `component_size` vertices.
    BoundedComponents { count: usize, component_size: usize },
    /// An instance directory as written by `generate`.
    FromFiles { dir: PathBuf },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Trees { .. } => "trees",
            Family::TpcSequence { .. } => "tpc_sequence",
            Family::Oberwolfach { .. } => "oberwolfach",
            Family::BoundedComponents { .. } => "bounded_components",
            Family::FromFiles { .. } => "from_files",
        }
    }
}

/// Overrides on the desk constants; absent fields keep the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub zeta: Option<f64>,
    pub p0: Option<f64>,
    pub layers: Option<usize>,
    /// Layer probability; defaults to `(1 - p0) / M`.
    pub p: Option<f64>,
    pub ell: Option<usize>,
    pub component_bound: Option<usize>,
    /// Use `M = round(γ^-2)` and `p = γ^2 (1 - p0)`.
    #[serde(default)]
    pub literal_layers: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapConfig {
    pub slack: f64,
    pub enforce: bool,
}

impl Default for CapConfig {
    fn default() -> Self {
        CapConfig {
            slack: 2.0,
            enforce: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetryBudget {
    /// Reseeded attempts per layer in Phase I.
    pub layer: usize,
    /// Failures allowed per position in Phase III.
    pub completion: usize,
    /// Full reseeded reruns after a phase gives up.
    pub run: usize,
    /// Greedy restarts per clique cell.
    pub cell_restarts: usize,
}

impl Default for RetryBudget {
    fn default() -> Self {
        RetryBudget {
            layer: 3,
            completion: 8,
            run: 2,
            cell_restarts: 30,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub instances: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoIndependentStrategy {
    /// Isolated and low-degree vertices first; takes as many as it finds.
    #[default]
    Cheap,
    /// Index order; fails unless the full target is reached.
    Scan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub epsilon: f64,
    pub max_degree: usize,
    pub family: Family,
    #[serde(default)]
    pub constants: ConstantOverrides,
    #[serde(default)]
    pub caps: CapConfig,
    #[serde(default)]
    pub retries: RetryBudget,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub two_independent: TwoIndependentStrategy,
    /// Matchings collected per instance in Phase III.
    #[serde(default)]
    pub matchings_target: Option<usize>,
}

impl RunConfig {
    pub fn new(n: usize, family: Family, seed: u64) -> Self {
        RunConfig {
            n,
            epsilon: 0.35,
            max_degree: 3,
            family,
            constants: ConstantOverrides::default(),
            caps: CapConfig::default(),
            retries: RetryBudget::default(),
            seed,
            output: OutputPaths::default(),
            two_independent: TwoIndependentStrategy::default(),
            matchings_target: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon = {} is outside (0, 1)", self.epsilon));
        }
        if self.max_degree < 1 {
            return bad("max_degree must be at least 1".into());
        }
        if self.caps.slack.is_nan() || self.caps.slack < 1.0 {
            return bad(format!("slack {} is below 1", self.caps.slack));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        self.pipeline_constants(self.seed)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Desk constants with the overrides applied.
    pub fn pipeline_constants(&self, seed: u64) -> PipelineConstants {
        let o = &self.constants;
        let mut c = PipelineConstants::desk(self.n, seed);
        c.epsilon = self.epsilon;
        c.max_degree = self.max_degree;
        c.gamma = o.gamma.unwrap_or(c.gamma);
        c.delta = o.delta.unwrap_or(c.delta);
        c.zeta = o.zeta.unwrap_or(c.zeta);
        c.p0 = o.p0.unwrap_or(c.p0);
        c.ell = o.ell.unwrap_or(c.ell);
        c.component_bound = o.component_bound;
        let layers = o.layers.unwrap_or(c.layers);
        c = if o.literal_layers {
            c.with_literal_layers()
        } else {
            c.with_layers(layers)
        };
        if let Some(p) = o.p {
            c.p = p;
        }
        c
    }
}

/// The raw input graphs of a family.
pub fn generate_family(cfg: &RunConfig) -> Result<Vec<Graph>, Error> {
    let n = cfg.n;
    let d = cfg.max_degree;
    let seed = sub_seed(cfg.seed, "instances", 0);
    Ok(match &cfg.family {
        Family::Trees { count, min_order } => {
            let lo = min_order.unwrap_or(n).clamp(1, n);
            let mut rng = stream(seed, "tree-orders", 0);
            (0..*count)
                .map(|t| {
                    let order = rng.gen_range(lo..=n);
                    gen_bounded_tree(order, d, sub_seed(seed, "trees", t as u64))
                })
                .collect::<Result<_, _>>()?
        }
        Family::TpcSequence { lo } => gen_tpc_sequence(n, d, *lo, seed)?,
        Family::Oberwolfach { cycle_lengths, copies } => {
            let f = gen_oberwolfach(n, cycle_lengths)?;
            vec![f; *copies]
        }
        Family::BoundedComponents { count, component_size } => {
            let trees = n.div_ceil((*component_size).max(1));
            (0..*count)
                .map(|t| gen_forest(n, trees, d.max(2), sub_seed(seed, "forests", t as u64)))
                .collect::<Result<_, _>>()?
        }
        Family::FromFiles { dir } => InstanceSet::read_dir(dir)?
            .instances
            .into_iter()
            .map(|i| i.graph)
            .collect(),
    })
}

/// Instances with separators and 2-independent sets installed.
pub fn prepare_instances(cfg: &RunConfig) -> Result<InstanceSet, Error> {
    let c = cfg.pipeline_constants(cfg.seed);
    let mut set = match &cfg.family {
        Family::FromFiles { dir } => InstanceSet::read_dir(dir)?,
        _ => normalize_collection(&generate_family(cfg)?, cfg.n)?,
    };
    if set.n != cfg.n {
        return Err(ConfigError::Invalid(format!("instances have order {}, config says {}", set.n, cfg.n)).into());
    }
    let budget = ((1.0 - cfg.epsilon) * binomial2(cfg.n) as f64 + 1e-9).floor() as usize;
    if set.total_edges > budget {
        return Err(ConfigError::Invalid(format!(
            "instances have {} edges, more than (1 - epsilon) C(n, 2) = {budget}",
            set.total_edges
        ))
        .into());
    }
    if set.max_degree > cfg.max_degree {
        return Err(ConfigError::Invalid(format!(
            "instances have maximum degree {}, config allows {}",
            set.max_degree, cfg.max_degree
        ))
        .into());
    }
    let target = (c.gamma * cfg.n as f64).round() as usize;
    for inst in &mut set.instances {
        if !inst.separator.is_empty() || !inst.two_independent.is_empty() {
            continue;
        }
        let separator = if c.delta > 0.0 {
            find_separator_capped(&inst.graph, c.delta, c.component_bound)?.vertices
        } else {
            let largest = connected_components(&inst.graph).iter().map(Vec::len).max().unwrap_or(1);
            if let Some(cap) = c.component_bound.filter(|&cap| largest > cap) {
                return Err(crate::error::InstanceError::SeparatorBudget { needed: largest - cap, budget: 0 }.into());
            }
            Vec::new()
        };
        let avoid = inst.mask_of(&separator);
        let two_independent = match cfg.two_independent {
            TwoIndependentStrategy::Cheap => cheap_two_independent(&inst.graph, target, &avoid),
            TwoIndependentStrategy::Scan => find_two_independent(&inst.graph, target, &avoid)?,
        };
        inst.set_parts(separator, two_independent);
    }
    Ok(set)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

struct Attempt {
    state: PhaseState,
    layers: Vec<LayerOutcome>,
    separators: Vec<crate::completion::SeparatorStats>,
    balance: Option<crate::completion::BalanceReport>,
    completion: Option<crate::completion::CompletionStats>,
    reached: Vec<Option<Phase>>,
    matchings: Vec<usize>,
    failure: Option<FailureInfo>,
}

fn fail(phase: &str, message: impl ToString) -> Option<FailureInfo> {
    Some(FailureInfo {
        phase: phase.to_string(),
        message: message.to_string(),
    })
}

/// One seeded pass through slicing and the three phases.
fn attempt(cfg: &RunConfig, set: &InstanceSet, run_seed: u64, log: &mut Vec<String>, timings: &mut Timings) -> Result<Attempt, Error> {
    let c = cfg.pipeline_constants(run_seed);
    let t0 = Instant::now();
    let host = SlicedHost::build(&c)?;
    let t = set.instances.len();
    let mut out = Attempt {
        state: PhaseState::new(host, set.clone()),
        layers: Vec::new(),
        separators: Vec::new(),
        balance: None,
        completion: None,
        reached: vec![None; t],
        matchings: vec![0; t],
        failure: None,
    };
    if let Err(e) = out.state.host.check_marginals(5.0) {
        out.failure = fail("slicing", e);
        return Ok(out);
    }
    timings.slicing_ms += ms(t0);

    let t1 = Instant::now();
    let m = c.layers.max(1);
    if c.layers == 0 && t > 0 {
        out.failure = fail("grouping", "no layers for Phase I");
        return Ok(out);
    }
    let batches = match group_graphs(set, m, default_tolerance::<f64>(2), sub_seed(run_seed, "group", 0)) {
        Ok(b) => b,
        Err(e) => {
            out.failure = fail("grouping", e);
            return Ok(out);
        }
    };
    for (b, batch) in batches.batches.iter().enumerate() {
        for &i in batch {
            out.state.layer_of_instance[i] = b + 1;
        }
    }
    for (b, batch) in batches.batches.iter().enumerate() {
        let k = b + 1;
        let caps = SpreadCaps {
            enforce: cfg.caps.enforce,
            ..SpreadCaps::from_constants(&c, batch.len(), cfg.caps.slack)
        };
        let snapshot = out.state.ledger.clone();
        let mut done = None;
        for a in 0..=cfg.retries.layer {
            let plan = LayerPlan {
                layer: k,
                batch,
                ell: c.ell,
                epsilon: c.epsilon,
                caps,
                seed: sub_seed(run_seed, "layer", (k * 1000 + a) as u64),
                restarts: cfg.retries.cell_restarts,
            };
            match pack_layer(&out.state.host, &set.instances, &plan, &mut out.state.ledger) {
                Ok(o) => {
                    done = Some(o);
                    break;
                }
                Err(e) => {
                    log.push(format!("phase1 layer {k} attempt {a}: {e}"));
                    out.state.ledger = snapshot.clone();
                }
            }
        }
        let Some(outcome) = done else {
            out.failure = fail("phase1", format!("layer {k} failed after {} attempts", cfg.retries.layer + 1));
            timings.phase1_ms += ms(t1);
            return Ok(out);
        };
        for (e, &i) in outcome.embeddings.iter().zip(batch) {
            out.state.embeddings[i] = e.clone();
            out.reached[i] = Some(Phase::Phase1);
        }
        out.layers.push(outcome);
    }
    timings.phase1_ms += ms(t1);

    let t2 = Instant::now();
    for (b, batch) in batches.batches.iter().enumerate() {
        match embed_separators(&mut out.state, b + 1, batch) {
            Ok(s) => out.separators.push(s),
            Err(e) => {
                out.failure = fail("phase2", e);
                timings.phase2_ms += ms(t2);
                return Ok(out);
            }
        }
        for &i in batch {
            out.reached[i] = Some(Phase::Phase2);
        }
    }
    out.balance = Some(check_balance(&out.state, cfg.caps.slack));
    timings.phase2_ms += ms(t2);

    let t3 = Instant::now();
    let opts = CompletionOptions {
        matchings: cfg.matchings_target,
        retries: cfg.retries.completion,
        seed: sub_seed(run_seed, "phase3", 0),
    };
    match complete_embeddings(&mut out.state, &opts) {
        Ok(stats) => {
            if stats.retries > 0 {
                log.push(format!(
                    "phase3: {} retries, {} rollbacks",
                    stats.retries, stats.rollbacks
                ));
            }
            out.matchings = stats.collection_sizes.clone();
            out.reached = vec![Some(Phase::Phase3); t];
            out.completion = Some(stats);
        }
        Err(e) => out.failure = fail("phase3", e),
    }
    timings.phase3_ms += ms(t3);
    Ok(out)
}

/// Verifies the final maps against `K_n`, the phase edge discipline and the
/// reported spread counters.
fn verify_attempt(a: &Attempt) -> crate::verify::VerificationReport {
    let s = &a.state;
    let guests: Vec<Graph> = s.instances.instances.iter().map(|i| i.graph.clone()).collect();
    let mut report = verify_packing(&CompleteHost(s.host.n()), &guests, &s.embeddings);
    let discipline = verify_discipline(&s.host, &s.instances.instances, &s.layer_of_instance, &s.embeddings);
    report.findings.extend(discipline);
    let spread = recompute_spread(&s.host, &s.instances.instances, &s.layer_of_instance, &s.embeddings);
    for layer in &a.layers {
        let Some(r) = spread.iter().find(|r| r.layer == layer.layer) else { continue };
        for (counter, reported, recomputed) in [
            ("anchor_s", layer.spread.max_anchor_s, r.max_anchor_s),
            ("free", layer.spread.max_free, r.max_free),
            ("pair", layer.spread.max_pair, r.max_pair),
        ] {
            if reported != recomputed {
                report.findings.push(Finding::SpreadMismatch {
                    layer: layer.layer,
                    counter: counter.into(),
                    reported,
                    recomputed,
                });
            }
        }
    }
    report.valid = report.findings.is_empty();
    report
}

/// Runs the whole pipeline. Only config and I/O problems are errors; a
/// failed phase still yields a report with `valid = false`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PackingReport, Error> {
    cfg.validate()?;
    let start = Instant::now();
    let mut timings = Timings::default();
    let set = prepare_instances(cfg)?;
    timings.instances_ms = ms(start);
    if let Some(dir) = &cfg.output.instances {
        set.write_dir(dir)?;
    }

    let mut log = Vec::new();
    let mut run_seed = cfg.seed;
    let mut last = None;
    for r in 0..=cfg.retries.run {
        if r > 0 {
            run_seed = sub_seed(cfg.seed, "rerun", r as u64);
            log.push(format!("rerun {r} with seed {run_seed}"));
        }
        let a = attempt(cfg, &set, run_seed, &mut log, &mut timings)?;
        let failed = a.failure.clone();
        last = Some(a);
        match failed {
            None => break,
            Some(f) => {
                log.push(format!("{} failed: {}", f.phase, f.message));
                if f.phase == "slicing" {
                    break;
                }
            }
        }
    }
    let a = last.expect("at least one attempt");

    let tv = Instant::now();
    let verification = verify_attempt(&a);
    timings.verify_ms = ms(tv);
    timings.total_ms = ms(start);

    let c = a.state.host.constants.clone();
    let n = c.n;
    let achieved_k = set.instances.iter().map(|i| i.component_bound).max().unwrap_or(1);
    let instances = set
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| InstanceOutcome {
            index: i,
            edges: inst.graph.edge_count(),
            separator: inst.separator.len(),
            two_independent: inst.two_independent.len(),
            component_bound: inst.component_bound,
            layer: a.state.layer_of_instance[i],
            reached: a.reached[i],
            matchings: a.matchings[i],
        })
        .collect();
    let report = PackingReport {
        valid: verification.valid,
        failure: a.failure.clone(),
        seed: cfg.seed,
        run_seed,
        config: serde_json::to_value(cfg).map_err(ConfigError::from)?,
        xi: c.xi(),
        zone_cap: c.zone_cap(),
        literal_layers: (1.0 / (c.gamma * c.gamma)).round() as usize,
        constant_chain: c
            .chain_ratios(achieved_k)
            .into_iter()
            .map(|(relation, ratio)| ChainEntry { relation, ratio })
            .collect(),
        constants: c,
        instance_count: set.instances.len(),
        total_edges: set.total_edges,
        density: if n < 2 { 0.0 } else { set.total_edges as f64 / binomial2(n) as f64 },
        instances,
        layers: a.layers,
        separators: a.separators,
        balance: a.balance,
        completion: a.completion,
        assertions: a.state.assertions,
        zone_recount: a.state.recount_zone_violations(),
        verification,
        retry_log: log,
        timings,
        embeddings: a.state.embeddings,
    };
    Ok(report)
}

/// Writes whichever outputs the config names.
pub fn emit_outputs(cfg: &RunConfig, report: &PackingReport) -> Result<(), Error> {
    let o = &cfg.output;
    if let Some(p) = &o.report {
        std::fs::write(p, report.to_canonical_json())?;
    }
    if let Some(p) = &o.csv {
        std::fs::write(p, report.to_csv())?;
    }
    if let Some(p) = &o.embeddings {
        std::fs::write(p, crate::report::dump_embeddings(&report.embeddings))?;
    }
    Ok(())
}

/// Embeddings of a report, checked again from scratch against `K_n`.
pub fn reverify(guests: &[Graph], n: usize, embeddings: &[Embedding]) -> crate::verify::VerificationReport {
    verify_packing(&CompleteHost(n), guests, embeddings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spanning_tree_packs() {
        let mut cfg = RunConfig::new(100, Family::Trees { count: 1, min_order: None }, 3);
        cfg.constants.delta = Some(0.0);
        cfg.constants.zeta = Some(0.0);
        cfg.constants.layers = Some(1);
        let r = run_pipeline(&cfg).unwrap();
        assert!(r.valid, "{:?} {:?}", r.failure, r.verification.findings);
        assert_eq!(r.total_edges, 99);
        assert!((r.density - 99.0 / 4950.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"n": 10, "epsilon": 0.3, "max_degree": 3, "family": {"kind": "tpc_sequence", "lo": 5}, "bogus": 1}"#;
        assert!(matches!(RunConfig::from_json(text), Err(ConfigError::Json(_))));
    }

    #[test]
    fn bad_slack_is_a_config_error() {
        let mut cfg = RunConfig::new(20, Family::TpcSequence { lo: 10 }, 0);
        cfg.caps.slack = 0.5;
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn over_budget_collections_are_refused() {
        let mut cfg = RunConfig::new(
            9,
            Family::Oberwolfach {
                cycle_lengths: vec![3, 3, 3],
                copies: 4,
            },
            0,
        );
        cfg.max_degree = 2;
        cfg.epsilon = 0.5;
        assert!(matches!(run_pipeline(&cfg), Err(Error::Config(_))));
    }
}
