//! Problem instances: anchors, targets with cached profiles, channel, jamming
//! parameters and an optional SNR gate.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::crlb::{
    crlb_gated, d_lim, ChannelModel, JammingParams, SnrGate, TargetProfile,
};
use crate::error::ModelError;
use crate::geometry::{distance, Point2, TAU_GEO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnchorId(pub u32);

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for AnchorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub id: AnchorId,
    pub position: Point2,
}

/// Target as configured, before profile construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub id: TargetId,
    pub position: Point2,
    pub k: f64,
    /// `None` means every anchor is in line of sight.
    pub los_anchor_ids: Option<Vec<AnchorId>>,
    pub nlos_anchor_ids: Vec<AnchorId>,
}

impl TargetSpec {
    pub fn new(id: u32, x: f64, y: f64) -> Self {
        Self {
            id: TargetId(id),
            position: Point2::new(x, y),
            k: 1.0,
            los_anchor_ids: None,
            nlos_anchor_ids: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub anchors: Vec<Anchor>,
    pub targets: Vec<TargetProfile>,
    pub channel: ChannelModel,
    pub jamming: JammingParams,
    pub gate: Option<SnrGate>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        anchors: Vec<Anchor>,
        targets: Vec<TargetSpec>,
        channel: ChannelModel,
        jamming: JammingParams,
        gate: Option<SnrGate>,
    ) -> Result<Self, ModelError> {
        jamming.validate()?;
        let invalid = |msg: String| Err(ModelError::InvalidParameter(msg));

        let mut anchor_col = HashMap::new();
        for (col, a) in anchors.iter().enumerate() {
            if !a.position.is_finite() {
                return invalid(format!("anchor {} has a non-finite position", a.id));
            }
            if anchor_col.insert(a.id, col).is_some() {
                return invalid(format!("duplicate anchor id {}", a.id));
            }
        }
        let mut seen = HashSet::new();
        for (i, t) in targets.iter().enumerate() {
            if !t.position.is_finite() {
                return invalid(format!("target {} has a non-finite position", t.id));
            }
            if !seen.insert(t.id) {
                return invalid(format!("duplicate target id {}", t.id));
            }
            if let Some(other) = targets[..i].iter().find(|o| distance(o.position, t.position) <= TAU_GEO) {
                return invalid(format!("targets {} and {} share a position", other.id, t.id));
            }
        }
        if let ChannelModel::ExplicitLambda(m) = &channel {
            if m.len() != targets.len() || m.iter().any(|row| row.len() != anchors.len()) {
                return invalid(format!(
                    "explicit lambda matrix must be {} x {}",
                    targets.len(),
                    anchors.len()
                ));
            }
        }
        if let Some(g) = &gate {
            if !(g.snr_threshold > 0.0 && g.snr_threshold.is_finite()) {
                return invalid(format!("snr_threshold = {}", g.snr_threshold));
            }
            if let crate::crlb::EnergyModel::Explicit(m) = &g.energy {
                if m.len() != targets.len() || m.iter().any(|row| row.len() != anchors.len()) {
                    return invalid(format!(
                        "explicit energy matrix must be {} x {}",
                        targets.len(),
                        anchors.len()
                    ));
                }
            }
        }

        let mut profiles = Vec::with_capacity(targets.len());
        for (row, t) in targets.iter().enumerate() {
            let los: Vec<AnchorId> = match &t.los_anchor_ids {
                Some(ids) => ids.clone(),
                None => anchors
                    .iter()
                    .map(|a| a.id)
                    .filter(|id| !t.nlos_anchor_ids.contains(id))
                    .collect(),
            };
            for id in los.iter().chain(&t.nlos_anchor_ids) {
                if !anchor_col.contains_key(id) {
                    return invalid(format!("target {} references unknown anchor {}", t.id, id));
                }
            }
            let mut lambdas = Vec::with_capacity(los.len());
            let mut angles = Vec::with_capacity(los.len());
            let mut energies = Vec::with_capacity(los.len());
            for id in &los {
                let col = anchor_col[id];
                let a = anchors[col].position;
                if distance(a, t.position) <= TAU_GEO {
                    return invalid(format!("target {} coincides with anchor {}", t.id, id));
                }
                lambdas.push(channel.lambda(row, col, t.position, a));
                let v = a - t.position;
                angles.push(v.y.atan2(v.x));
                if let Some(g) = &gate {
                    let e = g.energy.energy(row, col, t.position, a);
                    // well-posedness does not depend on power
                    d_lim(e, g, &jamming, t.k)?;
                    energies.push(e);
                }
            }
            profiles.push(TargetProfile::new(
                t.id,
                t.position,
                t.k,
                los,
                lambdas,
                angles,
                t.nlos_anchor_ids.clone(),
                gate.as_ref().map(|_| energies),
            )?);
        }

        Ok(Scenario { name: name.into(), anchors, targets: profiles, channel, jamming, gate })
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.targets.iter().map(|t| t.position).collect()
    }

    pub fn target_ids(&self, idx: &[usize]) -> Vec<TargetId> {
        idx.iter().map(|&i| self.targets[i].id).collect()
    }

    pub fn index_of(&self, id: TargetId) -> Option<usize> {
        self.targets.iter().position(|t| t.id == id)
    }

    pub fn epsilon(&self) -> f64 {
        self.jamming.epsilon
    }

    pub fn normalized_power(&self) -> f64 {
        self.jamming.normalized_power()
    }

    /// Same instance at normalized power `p`, keeping `N_0`.
    pub fn with_normalized_power(&self, p: f64) -> Scenario {
        let mut s = self.clone();
        s.jamming.pj = p * s.jamming.n0 / 2.0;
        s
    }

    pub fn with_pj_watts(&self, pj: f64) -> Scenario {
        let mut s = self.clone();
        s.jamming.pj = pj;
        s
    }

    /// Replaces `N_0`, keeping the jammer power in watts.
    pub fn with_noise(&self, n0: f64) -> Scenario {
        let mut s = self.clone();
        s.jamming.n0 = n0;
        s
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Scenario {
        let mut s = self.clone();
        s.jamming.epsilon = epsilon;
        s
    }

    pub fn without_gate(&self) -> Scenario {
        let mut s = self.clone();
        s.gate = None;
        for t in &mut s.targets {
            t.energies = None;
        }
        s
    }

    /// Same instance under a different SNR gate.
    pub fn with_gate(&self, gate: SnrGate) -> Result<Scenario, ModelError> {
        let specs = self
            .targets
            .iter()
            .map(|t| TargetSpec {
                id: t.id,
                position: t.position,
                k: t.k,
                los_anchor_ids: Some(t.los_anchors.clone()),
                nlos_anchor_ids: t.nlos_anchors.clone(),
            })
            .collect();
        Scenario::new(self.name.clone(), self.anchors.clone(), specs, self.channel.clone(), self.jamming, Some(gate))
    }

    pub fn is_gated(&self) -> bool {
        self.gate.is_some()
    }

    /// All jammer-target distances at least `epsilon` (with geometric slack).
    pub fn is_feasible(&self, z: Point2) -> bool {
        let eps = self.epsilon() - TAU_GEO;
        self.targets.iter().all(|t| distance(z, t.position) >= eps)
    }

    /// CRLB of target `i` at `z`, gated when a gate is configured.
    pub fn crlb_of(&self, i: usize, z: Point2) -> Result<f64, ModelError> {
        let t = &self.targets[i];
        let d = distance(z, t.position);
        if d <= TAU_GEO {
            return Err(ModelError::CoincidentJammer(t.id));
        }
        Ok(match &self.gate {
            Some(g) => crlb_gated(t, d, &self.jamming, g),
            None => t.crlb_at(d, &self.jamming),
        })
    }

    pub fn crlbs_at(&self, z: Point2) -> Result<Vec<f64>, ModelError> {
        (0..self.n_targets()).map(|i| self.crlb_of(i, z)).collect()
    }

    /// Precomputed evaluator for hot loops.
    pub fn objective(&self) -> Objective<'_> {
        Objective::new(self)
    }
}

/// Fast min-CRLB evaluation with critical distances resolved for the current power.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    scenario: &'a Scenario,
    lims: Vec<Option<Vec<f64>>>,
}

impl<'a> Objective<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let lims = scenario
            .targets
            .iter()
            .map(|t| match &scenario.gate {
                Some(g) => t.d_lims(g, &scenario.jamming).and_then(Result::ok),
                None => None,
            })
            .collect();
        Objective { scenario, lims }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    /// CRLB of target `i` at jammer distance `d`.
    #[inline]
    pub fn crlb_at_distance(&self, i: usize, d: f64) -> f64 {
        let t = &self.scenario.targets[i];
        let jp = &self.scenario.jamming;
        let level = if jp.nu == 2.0 {
            t.k * jp.pj / (d * d) + jp.noise_floor()
        } else {
            jp.interference(t.k, d)
        };
        let r = match &self.lims[i] {
            None => t.r,
            Some(lims) => {
                let mask = lims
                    .iter()
                    .enumerate()
                    .fold(0usize, |m, (j, &l)| if d > l { m | (1 << j) } else { m });
                if mask == t.full_mask() {
                    t.r
                } else {
                    t.subset_factor(mask)
                }
            }
        };
        r * level
    }

    #[inline]
    pub fn crlb(&self, i: usize, z: Point2) -> f64 {
        self.crlb_at_distance(i, distance(z, self.scenario.targets[i].position))
    }

    /// Minimum CRLB over `idx`; `-inf` when `z` sits on one of those targets.
    #[inline]
    pub fn min_over(&self, idx: &[usize], z: Point2) -> f64 {
        let mut v = f64::INFINITY;
        for &i in idx {
            let d = distance(z, self.scenario.targets[i].position);
            if d <= TAU_GEO {
                return f64::NEG_INFINITY;
            }
            v = v.min(self.crlb_at_distance(i, d));
        }
        v
    }

    /// Minimum CRLB over all targets; `-inf` when `z` sits on a target.
    #[inline]
    pub fn value(&self, z: Point2) -> f64 {
        let mut v = f64::INFINITY;
        for i in 0..self.scenario.targets.len() {
            let d = distance(z, self.scenario.targets[i].position);
            if d <= TAU_GEO {
                return f64::NEG_INFINITY;
            }
            v = v.min(self.crlb_at_distance(i, d));
        }
        v
    }

    /// Objective of the constrained problem: `-inf` outside the feasible set.
    #[inline]
    pub fn constrained(&self, z: Point2) -> f64 {
        let eps = self.scenario.epsilon();
        let mut v = f64::INFINITY;
        for i in 0..self.scenario.targets.len() {
            let d = distance(z, self.scenario.targets[i].position);
            if d < eps || d <= TAU_GEO {
                return f64::NEG_INFINITY;
            }
            v = v.min(self.crlb_at_distance(i, d));
        }
        v
    }

    /// Gated critical distances of target `i`, if any.
    pub fn d_lims(&self, i: usize) -> Option<&[f64]> {
        self.lims[i].as_deref()
    }
}

/// The three reference scenarios shipped with the crate.
pub mod bundled {
    use super::Scenario;
    use crate::io::load_scenario_str;

    pub const SCENARIO_A: &str = include_str!("../scenarios/scenario_a.toml");
    pub const SCENARIO_B: &str = include_str!("../scenarios/scenario_b.toml");
    pub const SCENARIO_C: &str = include_str!("../scenarios/scenario_c.toml");
    pub const SCENARIO_A_GATED: &str = include_str!("../scenarios/scenario_a_gated.toml");

    pub fn scenario_a() -> Scenario {
        load_scenario_str(SCENARIO_A).expect("bundled scenario_a")
    }

    pub fn scenario_b() -> Scenario {
        load_scenario_str(SCENARIO_B).expect("bundled scenario_b")
    }

    pub fn scenario_c() -> Scenario {
        load_scenario_str(SCENARIO_C).expect("bundled scenario_c")
    }

    /// Scenario A with the SNR gate `SNR_0 = 1`, `E_ij = 2000 / d^2`.
    pub fn scenario_a_gated() -> Scenario {
        load_scenario_str(SCENARIO_A_GATED).expect("bundled scenario_a_gated")
    }

    pub fn by_name(name: &str) -> Option<Scenario> {
        match name.to_ascii_lowercase().as_str() {
            "a" | "scenario_a" => Some(scenario_a()),
            "b" | "scenario_b" => Some(scenario_b()),
            "c" | "scenario_c" => Some(scenario_c()),
            "a_gated" | "scenario_a_gated" => Some(scenario_a_gated()),
            _ => None,
        }
    }
}
