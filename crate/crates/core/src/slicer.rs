//! Random slicing of `E(K_n)` into the layers `Γ^(0..M)` and the fixed
//! vertex zones `Z^(1..M)`.
//!
//! Every host pair gets one uniform draw from a counter-based hash of
//! `(seed, pair index)`, so the assignment of an edge never depends on the
//! order in which edges are visited.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::HostEdges;
use crate::error::SliceError;
use crate::graph::{binomial2, pair_from_index, pair_index, Graph};
use crate::rng::unit_draw;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConstants {
    pub n: usize,
    pub epsilon: f64,
    pub max_degree: usize,
    pub gamma: f64,
    pub delta: f64,
    pub zeta: f64,
    pub p0: f64,
    /// Component bound; `None` means "whatever the separators achieve".
    pub component_bound: Option<usize>,
    pub layers: usize,
    /// Probability of each layer `Γ^(k)`, `k >= 1`.
    pub p: f64,
    pub ell: usize,
    pub seed: u64,
}

impl PipelineConstants {
    /// Desk-scale defaults: `M = 8`, `p = (1 - p0) / M`.
    pub fn desk(n: usize, seed: u64) -> Self {
        let mut c = PipelineConstants {
            n,
            epsilon: 0.35,
            max_degree: 3,
            gamma: 0.15,
            delta: 0.02,
            zeta: 0.05,
            p0: 0.3,
            component_bound: None,
            layers: 8,
            p: 0.0,
            ell: 4,
            seed,
        };
        c.p = c.even_layer_probability();
        c
    }

    /// The literal coupling `M = round(γ^-2)`, `p = γ^2 (1 - p0)`.
    pub fn with_literal_layers(mut self) -> Self {
        self.layers = (1.0 / (self.gamma * self.gamma)).round() as usize;
        self.p = self.gamma * self.gamma * (1.0 - self.p0);
        self
    }

    /// Sets `M` and spreads the non-`Γ^(0)` mass evenly over the layers.
    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self.p = self.even_layer_probability();
        self
    }

    fn even_layer_probability(&self) -> f64 {
        if self.layers == 0 {
            0.0
        } else {
            (1.0 - self.p0) / self.layers as f64
        }
    }

    /// `ξ` from `1 - δ - γ = (1 - ξ)(1 - ζ)`.
    pub fn xi(&self) -> f64 {
        1.0 - (1.0 - self.delta - self.gamma) / (1.0 - self.zeta)
    }

    pub fn zone_size(&self) -> usize {
        (self.zeta * self.n as f64 + 1e-9).floor() as usize
    }

    /// Most separator images any zone vertex may carry: `floor(ζ² n)`.
    pub fn zone_cap(&self) -> usize {
        (self.zeta * self.zeta * self.n as f64 + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<(), SliceError> {
        let bad = |msg: String| Err(SliceError::Constants(msg));
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("zeta", self.zeta),
            ("p0", self.p0),
            ("p", self.p),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        let mass = self.p0 + self.layers as f64 * self.p;
        if mass > 1.0 + 1e-9 {
            return bad(format!("p0 + M p = {mass:.4} exceeds 1"));
        }
        if self.layers * self.zone_size() > self.n {
            return Err(SliceError::ZonesDoNotFit {
                zones: self.layers,
                size: self.zone_size(),
                n: self.n,
            });
        }
        let xi = self.xi();
        if xi < self.gamma / 2.0 - 1e-9 || xi > 2.0 * self.gamma + 1e-9 {
            return bad(format!(
                "xi = {xi:.4} is outside [gamma/2, 2 gamma] = [{:.4}, {:.4}]",
                self.gamma / 2.0,
                2.0 * self.gamma
            ));
        }
        if self.ell < 2 {
            return bad(format!("clique order {} is below 2", self.ell));
        }
        Ok(())
    }

    /// Ratios `a / b` for each `a << b` in `1/K << δ << ζ << γ << p0 << ε`.
    pub fn chain_ratios(&self, achieved_k: usize) -> Vec<(String, f64)> {
        let k_inv = 1.0 / achieved_k.max(1) as f64;
        let chain = [
            ("1/K", k_inv),
            ("delta", self.delta),
            ("zeta", self.zeta),
            ("gamma", self.gamma),
            ("p0", self.p0),
            ("epsilon", self.epsilon),
        ];
        chain
            .windows(2)
            .map(|w| {
                let ratio = if w[1].1 > 0.0 { w[0].1 / w[1].1 } else { f64::INFINITY };
                (format!("{} << {}", w[0].0, w[1].0), ratio)
            })
            .collect()
    }
}

/// Marker for pairs outside every layer.
pub const UNASSIGNED: u16 = u16::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct SlicedHost {
    pub constants: PipelineConstants,
    /// `Γ^(0), ..., Γ^(M)`.
    pub layers: Vec<Graph>,
    /// `zones[k - 1]` is `Z^(k)`.
    pub zones: Vec<Vec<usize>>,
    assignment: Vec<u16>,
    zone_of: Vec<Option<usize>>,
}

/// Layer index for one uniform draw.
fn layer_for(x: f64, c: &PipelineConstants) -> u16 {
    if x <= c.p0 {
        return 0;
    }
    if c.p <= 0.0 {
        return UNASSIGNED;
    }
    let mut k = ((x - c.p0) / c.p).ceil().max(1.0) as usize;
    // guard the rounding at interval ends
    while k > 1 && x <= c.p0 + (k - 1) as f64 * c.p {
        k -= 1;
    }
    while x > c.p0 + k as f64 * c.p {
        k += 1;
    }
    if k <= c.layers {
        k as u16
    } else {
        UNASSIGNED
    }
}

/// Assigns every host pair to a layer; zones are left empty.
pub fn slice_edges(c: &PipelineConstants) -> Result<SlicedHost, SliceError> {
    c.validate()?;
    if c.layers >= UNASSIGNED as usize {
        return Err(SliceError::Constants(format!("{} layers is too many", c.layers)));
    }
    let pairs = binomial2(c.n);
    let assignment: Vec<u16> = (0..pairs)
        .map(|idx| layer_for(unit_draw(c.seed, idx as u64), c))
        .collect();
    let mut layers = vec![Graph::empty(c.n); c.layers + 1];
    for (idx, &k) in assignment.iter().enumerate() {
        if k != UNASSIGNED {
            let (u, v) = pair_from_index(idx);
            layers[k as usize].add_edge(u, v).expect("each pair drawn once");
        }
    }
    Ok(SlicedHost {
        constants: c.clone(),
        layers,
        zones: Vec::new(),
        assignment,
        zone_of: vec![None; c.n],
    })
}

/// Contiguous blocks `[k z, (k+1) z)` with `z = floor(ζ n)`.
pub fn reserve_zones(c: &PipelineConstants) -> Result<Vec<Vec<usize>>, SliceError> {
    let z = c.zone_size();
    if c.layers * z > c.n {
        return Err(SliceError::ZonesDoNotFit {
            zones: c.layers,
            size: z,
            n: c.n,
        });
    }
    Ok((0..c.layers).map(|k| (k * z..(k + 1) * z).collect()).collect())
}

impl SlicedHost {
    pub fn build(c: &PipelineConstants) -> Result<SlicedHost, SliceError> {
        let mut host = slice_edges(c)?;
        host.set_zones(reserve_zones(c)?);
        Ok(host)
    }

    fn set_zones(&mut self, zones: Vec<Vec<usize>>) {
        self.zone_of = vec![None; self.constants.n];
        for (k, zone) in zones.iter().enumerate() {
            for &v in zone {
                self.zone_of[v] = Some(k + 1);
            }
        }
        self.zones = zones;
    }

    pub fn n(&self) -> usize {
        self.constants.n
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len() - 1
    }

    /// Layer holding the pair `{u, v}`, if any.
    #[inline]
    pub fn layer_of(&self, u: usize, v: usize) -> Option<usize> {
        if u == v || u >= self.n() || v >= self.n() {
            return None;
        }
        match self.assignment[pair_index(u, v)] {
            UNASSIGNED => None,
            k => Some(k as usize),
        }
    }

    /// Layer `k >= 1` whose zone contains `v`.
    #[inline]
    pub fn zone_of(&self, v: usize) -> Option<usize> {
        self.zone_of[v]
    }

    pub fn zone(&self, k: usize) -> &[usize] {
        &self.zones[k - 1]
    }

    /// Edges of `Γ^(k)` with no endpoint in `Z^(k)`.
    pub fn phase1_view(&self, k: usize) -> LayerView<'_> {
        LayerView {
            host: self,
            layer: k,
            kind: ViewKind::AwayFromZone,
        }
    }

    /// Edges of `Γ^(k)` with at least one endpoint in `Z^(k)`.
    pub fn phase2_view(&self, k: usize) -> LayerView<'_> {
        LayerView {
            host: self,
            layer: k,
            kind: ViewKind::ZoneIncident,
        }
    }

    /// All of `Γ^(0)`.
    pub fn phase3_view(&self) -> LayerView<'_> {
        LayerView {
            host: self,
            layer: 0,
            kind: ViewKind::Whole,
        }
    }

    /// Checks each layer's edge count against `Binomial(C(n,2), q)` within
    /// `sigmas` standard deviations.
    pub fn check_marginals(&self, sigmas: f64) -> Result<(), SliceError> {
        let c = &self.constants;
        let pairs = binomial2(c.n) as f64;
        for (k, layer) in self.layers.iter().enumerate() {
            let q = if k == 0 { c.p0 } else { c.p };
            let q = q.clamp(0.0, 1.0);
            let mean = pairs * q;
            let sd = (pairs * q * (1.0 - q)).sqrt();
            let (lo, hi) = (mean - sigmas * sd - 0.5, mean + sigmas * sd + 0.5);
            let observed = layer.edge_count();
            if (observed as f64) < lo || (observed as f64) > hi {
                return Err(SliceError::Marginal {
                    layer: k,
                    observed,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    pub fn unassigned_count(&self) -> usize {
        self.assignment.iter().filter(|&&k| k == UNASSIGNED).count()
    }

    /// One graph file per layer plus `manifest.json` with constants and zones.
    pub fn write_dir(&self, dir: &Path) -> Result<(), SliceError> {
        fs::create_dir_all(dir).map_err(crate::error::GraphError::from)?;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.write_to(dir.join(format!("layer_{k:03}.txt")))?;
        }
        let manifest = SliceManifest {
            constants: self.constants.clone(),
            zones: self.zones.clone(),
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")
            .map_err(crate::error::GraphError::from)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<SlicedHost, SliceError> {
        let text = fs::read_to_string(dir.join("manifest.json")).map_err(crate::error::GraphError::from)?;
        let manifest: SliceManifest = serde_json::from_str(&text)?;
        let c = manifest.constants;
        let layers = (0..=c.layers)
            .map(|k| Graph::read_from(dir.join(format!("layer_{k:03}.txt"))))
            .collect::<Result<Vec<_>, _>>()?;
        SlicedHost::from_parts(c, layers, manifest.zones)
    }

    /// A host from explicit layers and zones; used for hand-built cases.
    pub fn from_parts(
        c: PipelineConstants,
        layers: Vec<Graph>,
        zones: Vec<Vec<usize>>,
    ) -> Result<SlicedHost, SliceError> {
        if layers.len() != c.layers + 1 || zones.len() > c.layers {
            return Err(SliceError::Constants(format!(
                "{} layers and {} zones for M = {}",
                layers.len(),
                zones.len(),
                c.layers
            )));
        }
        let mut assignment = vec![UNASSIGNED; binomial2(c.n)];
        for (k, layer) in layers.iter().enumerate() {
            if layer.vertex_count() != c.n {
                return Err(SliceError::Constants(format!("layer {k} has the wrong order")));
            }
            for (u, v) in layer.edges() {
                let slot = &mut assignment[pair_index(u, v)];
                if *slot != UNASSIGNED {
                    return Err(SliceError::Constants(format!("pair {u}-{v} is in two layers")));
                }
                *slot = k as u16;
            }
        }
        let mut host = SlicedHost {
            zone_of: vec![None; c.n],
            constants: c,
            layers,
            zones: Vec::new(),
            assignment,
        };
        host.set_zones(zones);
        Ok(host)
    }
}

#[derive(Serialize, Deserialize)]
struct SliceManifest {
    constants: PipelineConstants,
    zones: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ViewKind {
    Whole,
    AwayFromZone,
    ZoneIncident,
}

/// The slice of one layer a phase is entitled to; anything else is absent.
#[derive(Clone, Copy)]
pub struct LayerView<'a> {
    host: &'a SlicedHost,
    layer: usize,
    kind: ViewKind,
}

impl LayerView<'_> {
    pub fn layer(&self) -> usize {
        self.layer
    }

    /// Neighbours of `v` visible in this view.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.host.layers[self.layer]
            .neighbors(v)
            .iter()
            .copied()
            .filter(move |&u| self.contains(u, v))
    }
}

impl HostEdges for LayerView<'_> {
    fn order(&self) -> usize {
        self.host.n()
    }

    #[inline]
    fn contains(&self, u: usize, v: usize) -> bool {
        if self.host.layer_of(u, v) != Some(self.layer) {
            return false;
        }
        let zoned = |x: usize| self.host.zone_of[x] == Some(self.layer);
        match self.kind {
            ViewKind::Whole => true,
            ViewKind::AwayFromZone => !zoned(u) && !zoned(v),
            ViewKind::ZoneIncident => zoned(u) || zoned(v),
        }
    }
}
