//! Per-target localization factors and the CRLB objective.
//!
//! A target's CRLB for a jammer at distance `d` factors as
//! `R_i * (K_i * P_J / d^nu + N_0 / 2)`, where `R_i` depends on anchor
//! geometry only. The gated variant drops anchors whose critical distance
//! exceeds `d` and yields `f64::INFINITY` when what is left cannot localize.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::{distance, Point2, TAU_GEO};
use crate::scenario::{AnchorId, Scenario, TargetId};

/// Relative tolerance for treating two CRLB values as equal.
pub const TAU_VAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalParams {
    pub effective_bandwidth: f64,
    pub first_path_amplitude_sq: f64,
    pub signal_energy: f64,
    pub path_overlap: f64,
    pub propagation_speed: f64,
}

/// Ranging information intensity `4 pi^2 beta^2 |alpha|^2 E (1 - xi) / c^2`.
pub fn lambda_from_signal(sp: &SignalParams) -> Result<f64, ModelError> {
    let ok = sp.effective_bandwidth > 0.0
        && sp.signal_energy > 0.0
        && sp.first_path_amplitude_sq >= 0.0
        && (0.0..=1.0).contains(&sp.path_overlap)
        && sp.propagation_speed > 0.0;
    if !ok {
        return Err(ModelError::InvalidParameter(format!("{sp:?}")));
    }
    let beta = sp.effective_bandwidth;
    Ok(4.0 * PI * PI * beta * beta * sp.first_path_amplitude_sq * sp.signal_energy * (1.0 - sp.path_overlap)
        / (sp.propagation_speed * sp.propagation_speed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    /// `lambda[t][a]` for target row `t` and anchor column `a`, in scenario order.
    ExplicitLambda(Vec<Vec<f64>>),
    FreeSpace { c0: f64, exponent: f64 },
}

impl ChannelModel {
    pub fn free_space(c0: f64, exponent: f64) -> Self {
        ChannelModel::FreeSpace { c0, exponent }
    }

    pub fn lambda(&self, target_row: usize, anchor_col: usize, target: Point2, anchor: Point2) -> f64 {
        match self {
            ChannelModel::ExplicitLambda(m) => m[target_row][anchor_col],
            ChannelModel::FreeSpace { c0, exponent } => c0 * distance(target, anchor).powf(-exponent),
        }
    }
}

/// Jammer power `pj` is in watts; the normalized power is `2 pj / n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JammingParams {
    pub pj: f64,
    pub n0: f64,
    pub nu: f64,
    pub epsilon: f64,
}

impl JammingParams {
    pub fn from_normalized(pj_normalized: f64, n0: f64, nu: f64, epsilon: f64) -> Result<Self, ModelError> {
        Self::new(pj_normalized * n0 / 2.0, n0, nu, epsilon)
    }

    pub fn new(pj: f64, n0: f64, nu: f64, epsilon: f64) -> Result<Self, ModelError> {
        let jp = Self { pj, n0, nu, epsilon };
        jp.validate()?;
        Ok(jp)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: &str, v: f64| Err(ModelError::InvalidParameter(format!("{what} = {v}")));
        if !(self.pj >= 0.0 && self.pj.is_finite()) {
            return bad("P_J", self.pj);
        }
        if !(self.n0 > 0.0 && self.n0.is_finite()) {
            return bad("N_0", self.n0);
        }
        if !(self.nu >= 1.0 && self.nu.is_finite()) {
            return bad("nu", self.nu);
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon);
        }
        Ok(())
    }

    pub fn normalized_power(&self) -> f64 {
        2.0 * self.pj / self.n0
    }

    pub fn noise_floor(&self) -> f64 {
        self.n0 / 2.0
    }

    /// Noise-plus-jamming level seen by a target with constant `k` at distance `d`.
    pub fn interference(&self, k: f64, d: f64) -> f64 {
        k * self.pj * d.powf(-self.nu) + self.noise_floor()
    }
}

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fim2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Fim2 {
    pub fn outer(angle: f64, weight: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Fim2 { a: weight * c * c, b: weight * c * s, c: weight * s * s }
    }

    pub fn scaled(self, s: f64) -> Self {
        Fim2 { a: self.a * s, b: self.b * s, c: self.c * s }
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a * self.a + 2.0 * self.b * self.b + self.c * self.c).sqrt()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0.0 && self.det() > 0.0
    }

    fn is_invertible(&self) -> bool {
        let n = self.norm();
        self.det().abs() > 1e-14 * n * n
    }

    pub fn inverse(&self) -> Result<Fim2, ModelError> {
        if !self.is_invertible() {
            return Err(ModelError::SingularGeometry(None));
        }
        let det = self.det();
        Ok(Fim2 { a: self.c / det, b: -self.b / det, c: self.a / det })
    }

    /// `tr(M^-1) = tr(M) / det(M)` without forming the inverse.
    pub fn trace_of_inverse(&self) -> Result<f64, ModelError> {
        if !self.is_invertible() {
            return Err(ModelError::SingularGeometry(None));
        }
        Ok(self.trace() / self.det())
    }
}

impl std::ops::Add for Fim2 {
    type Output = Fim2;
    fn add(self, o: Fim2) -> Fim2 {
        Fim2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c }
    }
}

fn information_sum<'a>(pairs: impl Iterator<Item = (&'a f64, &'a f64)>) -> Fim2 {
    pairs.fold(Fim2::default(), |m, (&l, &phi)| m + Fim2::outer(phi, l))
}

/// `tr{[sum_j lambda_j phi_j phi_j^T]^-1}`.
pub fn localization_factor(lambdas: &[f64], angles: &[f64]) -> Result<f64, ModelError> {
    if lambdas.len() != angles.len() {
        return Err(ModelError::InvalidParameter("lambda and angle counts differ".into()));
    }
    if lambdas.len() < 2 {
        return Err(ModelError::SingularGeometry(None));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(ModelError::InvalidParameter(format!("lambda = {l}")));
    }
    let r = information_sum(lambdas.iter().zip(angles)).trace_of_inverse()?;
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(ModelError::SingularGeometry(None))
    }
}

/// Derived per-target quantities. Angles point from the target to each LOS anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetProfile {
    pub id: TargetId,
    pub position: Point2,
    pub los_anchors: Vec<AnchorId>,
    pub nlos_anchors: Vec<AnchorId>,
    pub lambdas: Vec<f64>,
    pub angles: Vec<f64>,
    pub r: f64,
    pub k: f64,
    /// Per-LOS-anchor energies for the SNR gate, aligned with `los_anchors`.
    pub energies: Option<Vec<f64>>,
    subset_r: Vec<f64>,
}

const MAX_CACHED_ANCHORS: usize = 12;

impl TargetProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: TargetId,
        position: Point2,
        k: f64,
        los_anchors: Vec<AnchorId>,
        lambdas: Vec<f64>,
        angles: Vec<f64>,
        nlos_anchors: Vec<AnchorId>,
        energies: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("K for target {id} = {k}")));
        }
        if los_anchors.len() != lambdas.len() {
            return Err(ModelError::InvalidParameter(format!("target {id}: lambda count mismatch")));
        }
        if let Some(e) = &energies {
            if e.len() != lambdas.len() {
                return Err(ModelError::InvalidParameter(format!("target {id}: energy count mismatch")));
            }
        }
        let r = localization_factor(&lambdas, &angles).map_err(|e| match e {
            ModelError::SingularGeometry(_) => ModelError::SingularGeometry(Some(id)),
            other => other,
        })?;
        let mut profile = TargetProfile {
            id,
            position,
            los_anchors,
            nlos_anchors,
            lambdas,
            angles,
            r,
            k,
            energies,
            subset_r: Vec::new(),
        };
        let n = profile.lambdas.len();
        if profile.energies.is_some() && n <= MAX_CACHED_ANCHORS {
            profile.subset_r = (0..1usize << n).map(|mask| profile.subset_factor(mask)).collect();
        }
        Ok(profile)
    }

    /// Localization factor over the anchors whose bit is set; infinite when singular.
    pub fn subset_factor(&self, mask: usize) -> f64 {
        if let Some(r) = self.subset_r.get(mask) {
            return *r;
        }
        let m = information_sum(
            self.lambdas
                .iter()
                .zip(&self.angles)
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, p)| p),
        );
        match m.trace_of_inverse() {
            Ok(r) if r > 0.0 && r.is_finite() => r,
            _ => f64::INFINITY,
        }
    }

    pub fn full_mask(&self) -> usize {
        (1usize << self.lambdas.len()) - 1
    }

    /// CRLB as a function of the jammer distance alone.
    pub fn crlb_at(&self, d: f64, jp: &JammingParams) -> f64 {
        self.r * jp.interference(self.k, d)
    }

    /// Distance at which this target's CRLB equals `level`; infinite when the
    /// level is at or below the jamming-free floor.
    pub fn radius_for_level(&self, level: f64, jp: &JammingParams) -> f64 {
        let excess = level / self.r - jp.noise_floor();
        if excess <= 0.0 {
            return f64::INFINITY;
        }
        (jp.pj * self.k / excess).powf(1.0 / jp.nu)
    }

    /// Critical distances for each LOS anchor, or `None` without a gate.
    pub fn d_lims(&self, gate: &SnrGate, jp: &JammingParams) -> Option<Result<Vec<f64>, ModelError>> {
        self.energies
            .as_ref()
            .map(|es| es.iter().map(|&e| d_lim(e, gate, jp, self.k)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnergyModel {
    /// `E_ij = e0 / |x_i - y_j|^2`.
    InverseSquare { e0: f64 },
    /// `E[t][a]` in scenario order.
    Explicit(Vec<Vec<f64>>),
}

impl EnergyModel {
    pub fn energy(&self, target_row: usize, anchor_col: usize, target: Point2, anchor: Point2) -> f64 {
        match self {
            EnergyModel::InverseSquare { e0 } => {
                let d = distance(target, anchor);
                e0 / (d * d)
            }
            EnergyModel::Explicit(m) => m[target_row][anchor_col],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrGate {
    pub snr_threshold: f64,
    pub energy: EnergyModel,
}

/// `(K P_J / (E / SNR_0 - N_0 / 2))^(1/nu)`.
pub fn d_lim(e: f64, gate: &SnrGate, jp: &JammingParams, k: f64) -> Result<f64, ModelError> {
    let denom = e / gate.snr_threshold - jp.noise_floor();
    if !(denom > 0.0) {
        return Err(ModelError::GateIllPosed(denom));
    }
    Ok((k * jp.pj / denom).powf(1.0 / jp.nu))
}

pub fn fim(profile: &TargetProfile, z: Point2, jp: &JammingParams) -> Result<Fim2, ModelError> {
    let d = distance(z, profile.position);
    if d <= TAU_GEO {
        return Err(ModelError::CoincidentJammer(profile.id));
    }
    let level = jp.interference(profile.k, d);
    Ok(information_sum(profile.lambdas.iter().zip(&profile.angles)).scaled(1.0 / level))
}

pub fn crlb(profile: &TargetProfile, z: Point2, jp: &JammingParams) -> Result<f64, ModelError> {
    let d = distance(z, profile.position);
    if d <= TAU_GEO {
        return Err(ModelError::CoincidentJammer(profile.id));
    }
    Ok(profile.crlb_at(d, jp))
}

/// Gated CRLB at jammer distance `d`; anchors survive only when `d > d_lim`.
/// Without energies on the profile this is the baseline CRLB.
pub fn crlb_gated(profile: &TargetProfile, d: f64, jp: &JammingParams, gate: &SnrGate) -> f64 {
    let Some(energies) = &profile.energies else {
        return profile.crlb_at(d, jp);
    };
    let mut mask = 0usize;
    for (j, &e) in energies.iter().enumerate() {
        match d_lim(e, gate, jp, profile.k) {
            Ok(lim) if d > lim => mask |= 1 << j,
            _ => {}
        }
    }
    profile.subset_factor(mask) * jp.interference(profile.k, d)
}

/// Minimum CRLB over targets and the indices attaining it within [`TAU_VAL`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinCrlb {
    pub value: f64,
    pub argmin: Vec<usize>,
    pub per_target: Vec<f64>,
}

pub fn near_equal(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= TAU_VAL * a.abs().max(b.abs())
}

/// Indices whose value is within [`TAU_VAL`] of the minimum.
pub fn argmin_set(values: &[f64]) -> (f64, Vec<usize>) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let idx = values
        .iter()
        .enumerate()
        .filter(|(_, v)| near_equal(**v, min))
        .map(|(i, _)| i)
        .collect();
    (min, idx)
}

/// Objective of the placement problem at `z`, gated when the scenario has a gate.
pub fn min_crlb(scenario: &Scenario, z: Point2) -> Result<MinCrlb, ModelError> {
    let per_target = scenario.crlbs_at(z)?;
    let (value, argmin) = argmin_set(&per_target);
    Ok(MinCrlb { value, argmin, per_target })
}
