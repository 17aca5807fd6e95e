//! Scenario files (TOML, `schema_version = 1`) and result tables (CSV).
//!
//! ```toml
//! schema_version = 1
//! name = "scenario_a"            # optional
//!
//! [[anchors]]
//! id = 1
//! x = 0.0
//! y = 0.0
//!
//! [[targets]]
//! id = 1
//! x = 2.0
//! y = 5.0
//! K = 1.0                        # optional, default 1
//! los_anchor_ids = [1, 2, 3, 4]  # optional, default every anchor not listed as NLOS
//! nlos_anchor_ids = []           # optional
//!
//! [channel.free_space]           # or: [channel] explicit = [[...], ...]
//! c0 = 100.0                     #     rows = targets, columns = anchors, file order
//! exponent = 2.0
//!
//! [jamming]
//! pj_normalized = 6.0            # or pj_watts; exactly one
//! n0 = 2.0                       # optional, default 2
//! nu = 2.0                       # optional, default 2
//! epsilon = 1.0                  # optional, default 1
//!
//! [gate]                         # optional
//! snr_threshold = 1.0
//! [gate.energy]
//! inverse_square = 2000.0        # or: explicit = [[...], ...]
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crlb::{ChannelModel, EnergyModel, JammingParams, SnrGate};
use crate::error::{IoError, ModelError};
use crate::geometry::Point2;
use crate::scenario::{Anchor, AnchorId, Scenario, TargetId, TargetSpec};
use crate::solver::{PlacementResult, SweepResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const SOLVER_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const RESULTS_HEADER: &str = "pj_normalized,zx_m,zy_m,value_m2,branch,active_targets,feasible";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub anchors: Vec<AnchorEntry>,
    pub targets: Vec<TargetEntry>,
    pub channel: ChannelEntry,
    pub jamming: JammingEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorEntry {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetEntry {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "K", default = "one")]
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los_anchor_ids: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nlos_anchor_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelEntry {
    FreeSpace { c0: f64, exponent: f64 },
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JammingEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pj_normalized: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pj_watts: Option<f64>,
    #[serde(default = "two")]
    pub n0: f64,
    #[serde(default = "two")]
    pub nu: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateEntry {
    pub snr_threshold: f64,
    pub energy: EnergyEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyEntry {
    InverseSquare(f64),
    Explicit(Vec<Vec<f64>>),
}

fn schema(msg: impl Into<String>) -> IoError {
    IoError::Schema(msg.into())
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario, IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let jp = match (self.jamming.pj_normalized, self.jamming.pj_watts) {
            (Some(p), None) => JammingParams::from_normalized(p, self.jamming.n0, self.jamming.nu, self.jamming.epsilon),
            (None, Some(w)) => JammingParams::new(w, self.jamming.n0, self.jamming.nu, self.jamming.epsilon),
            (Some(_), Some(_)) => return Err(schema("jamming: give pj_normalized or pj_watts, not both")),
            (None, None) => return Err(schema("jamming: one of pj_normalized or pj_watts is required")),
        }
        .map_err(|e| schema(format!("jamming: {e}")))?;

        let anchors = self
            .anchors
            .iter()
            .map(|a| Anchor { id: AnchorId(a.id), position: Point2::new(a.x, a.y) })
            .collect();
        let targets = self
            .targets
            .iter()
            .map(|t| TargetSpec {
                id: TargetId(t.id),
                position: Point2::new(t.x, t.y),
                k: t.k,
                los_anchor_ids: t.los_anchor_ids.as_ref().map(|v| v.iter().map(|&i| AnchorId(i)).collect()),
                nlos_anchor_ids: t.nlos_anchor_ids.iter().map(|&i| AnchorId(i)).collect(),
            })
            .collect();
        let channel = match self.channel {
            ChannelEntry::FreeSpace { c0, exponent } => {
                if !(c0 > 0.0 && c0.is_finite() && exponent.is_finite()) {
                    return Err(schema("channel.free_space: c0 must be positive and finite"));
                }
                ChannelModel::FreeSpace { c0, exponent }
            }
            ChannelEntry::Explicit(m) => {
                if m.iter().flatten().any(|l| !(*l > 0.0 && l.is_finite())) {
                    return Err(schema("channel.explicit: every lambda must be positive"));
                }
                ChannelModel::ExplicitLambda(m)
            }
        };
        let gate = self.gate.map(|g| SnrGate {
            snr_threshold: g.snr_threshold,
            energy: match g.energy {
                EnergyEntry::InverseSquare(e0) => EnergyModel::InverseSquare { e0 },
                EnergyEntry::Explicit(m) => EnergyModel::Explicit(m),
            },
        });
        Scenario::new(self.name.unwrap_or_default(), anchors, targets, channel, jp, gate).map_err(|e| match e {
            ModelError::InvalidParameter(msg) => IoError::Schema(msg),
            other => IoError::Model(other),
        })
    }

    /// Canonical file form: explicit LOS lists and normalized power.
    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            name: (!s.name.is_empty()).then(|| s.name.clone()),
            anchors: s
                .anchors
                .iter()
                .map(|a| AnchorEntry { id: a.id.0, x: a.position.x, y: a.position.y })
                .collect(),
            targets: s
                .targets
                .iter()
                .map(|t| TargetEntry {
                    id: t.id.0,
                    x: t.position.x,
                    y: t.position.y,
                    k: t.k,
                    los_anchor_ids: Some(t.los_anchors.iter().map(|a| a.0).collect()),
                    nlos_anchor_ids: t.nlos_anchors.iter().map(|a| a.0).collect(),
                })
                .collect(),
            channel: match &s.channel {
                ChannelModel::FreeSpace { c0, exponent } => ChannelEntry::FreeSpace { c0: *c0, exponent: *exponent },
                ChannelModel::ExplicitLambda(m) => ChannelEntry::Explicit(m.clone()),
            },
            jamming: JammingEntry {
                pj_normalized: Some(s.normalized_power()),
                pj_watts: None,
                n0: s.jamming.n0,
                nu: s.jamming.nu,
                epsilon: s.jamming.epsilon,
            },
            gate: s.gate.as_ref().map(|g| GateEntry {
                snr_threshold: g.snr_threshold,
                energy: match &g.energy {
                    EnergyModel::InverseSquare { e0 } => EnergyEntry::InverseSquare(*e0),
                    EnergyModel::Explicit(m) => EnergyEntry::Explicit(m.clone()),
                },
            }),
        }
    }
}

pub fn load_scenario_str(text: &str) -> Result<Scenario, IoError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| IoError::Parse(e.message().to_string()))?;
    file.into_scenario()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    load_scenario_str(&text)
}

pub fn scenario_to_toml(s: &Scenario) -> String {
    toml::to_string(&ScenarioFile::from_scenario(s)).expect("scenario file serializes")
}

/// SHA-256 of the canonical TOML form, hex encoded.
pub fn scenario_hash(s: &Scenario) -> String {
    hex::encode(Sha256::digest(scenario_to_toml(s).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub scenario_hash: String,
    pub pj_normalized: f64,
    pub result: PlacementResult,
    pub per_target_crlb: Vec<f64>,
    pub solver_version: String,
    pub wall_time_ms: f64,
}

impl ResultRecord {
    pub fn new(s: &Scenario, result: PlacementResult, wall_time_ms: f64) -> Self {
        let per_target_crlb = s.crlbs_at(result.z_opt).unwrap_or_default();
        ResultRecord {
            scenario_hash: scenario_hash(s),
            pj_normalized: s.normalized_power(),
            result,
            per_target_crlb,
            solver_version: SOLVER_VERSION.to_string(),
            wall_time_ms,
        }
    }
}

fn join_ids(ids: &[TargetId]) -> String {
    ids.iter().map(|t| t.0.to_string()).collect::<Vec<_>>().join(";")
}

/// Results table; one header line plus one line per record.
pub fn format_results(records: &[ResultRecord]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let p = &r.result;
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{},{},{}",
            r.pj_normalized,
            p.z_opt.x,
            p.z_opt.y,
            p.value,
            p.branch,
            join_ids(&p.active_targets),
            p.feasible
        );
    }
    out
}

pub fn save_results(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<(), IoError> {
    if records.is_empty() {
        return Err(IoError::EmptyRecords);
    }
    let path = path.as_ref();
    fs::write(path, format_results(records)).map_err(|source| IoError::Write { path: path.to_path_buf(), source })
}

/// Sweep table with per-target CRLBs at each optimum and `# breakpoint` footers.
pub fn format_sweep(s: &Scenario, sweep: &SweepResult) -> String {
    let mut out = String::from("pj_normalized");
    for t in &s.targets {
        let _ = write!(out, ",crlb_{}", t.id);
    }
    out.push_str(",max_min,zx_m,zy_m,branch,active_targets\n");
    for (p, r) in &sweep.samples {
        let _ = write!(out, "{p:.6}");
        let sp = s.with_normalized_power(*p);
        for c in sp.crlbs_at(r.z_opt).unwrap_or_default() {
            let _ = write!(out, ",{c:.6}");
        }
        let _ = writeln!(
            out,
            ",{:.6},{:.6},{:.6},{},{}",
            r.value,
            r.z_opt.x,
            r.z_opt.y,
            r.branch,
            join_ids(&r.active_targets)
        );
    }
    for b in &sweep.breakpoints {
        let _ = writeln!(out, "# breakpoint {b:.2}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::bundled;
    use crate::solver::solve;

    #[test]
    fn bundled_scenario_a_loads() {
        let s = bundled::scenario_a();
        assert_eq!(s.anchors.len(), 4);
        assert_eq!(s.n_targets(), 3);
        assert!(s.targets.iter().all(|t| t.r > 0.0));
        let corners: Vec<(f64, f64)> = s.anchors.iter().map(|a| (a.position.x, a.position.y)).collect();
        assert_eq!(corners, vec![(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)]);
        let pos: Vec<(f64, f64)> = s.targets.iter().map(|t| (t.position.x, t.position.y)).collect();
        assert_eq!(pos, vec![(2.0, 5.0), (6.0, 2.0), (9.0, 4.0)]);
    }

    #[test]
    fn bundled_b_and_c_match_captions() {
        let b: Vec<(f64, f64)> = bundled::scenario_b().targets.iter().map(|t| (t.position.x, t.position.y)).collect();
        assert_eq!(b, vec![(2.0, 5.0), (4.0, 1.0), (8.0, 8.0), (9.0, 2.0)]);
        let c: Vec<(f64, f64)> = bundled::scenario_c().targets.iter().map(|t| (t.position.x, t.position.y)).collect();
        assert_eq!(c, vec![(1.0, 4.0), (3.0, 1.0), (4.0, 6.0), (7.0, 5.0), (9.0, 3.0)]);
        assert_eq!(bundled::scenario_c().normalized_power(), 4.0);
    }

    #[test]
    fn duplicate_target_id_is_schema_error() {
        let text = bundled::SCENARIO_A.replace("id = 2\nx = 6.0", "id = 1\nx = 6.0");
        assert!(matches!(load_scenario_str(&text), Err(IoError::Schema(_))));
    }

    #[test]
    fn single_los_anchor_is_singular() {
        let text = bundled::SCENARIO_A.replace("id = 3\nx = 9.0\ny = 4.0\n", "id = 3\nx = 9.0\ny = 4.0\nlos_anchor_ids = [2]\n");
        match load_scenario_str(&text) {
            Err(IoError::Model(ModelError::SingularGeometry(Some(id)))) => assert_eq!(id, TargetId(3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_forms_are_exclusive() {
        let both = bundled::SCENARIO_A.replace("pj_normalized = 6.0", "pj_normalized = 6.0\npj_watts = 6.0");
        assert!(matches!(load_scenario_str(&both), Err(IoError::Schema(_))));
        let none = bundled::SCENARIO_A.replace("pj_normalized = 6.0\n", "");
        assert!(matches!(load_scenario_str(&none), Err(IoError::Schema(_))));
        let watts = bundled::SCENARIO_A.replace("pj_normalized = 6.0", "pj_watts = 3.0");
        assert_eq!(load_scenario_str(&watts).unwrap().normalized_power(), 3.0);
    }

    #[test]
    fn defaults_apply() {
        let text = bundled::SCENARIO_A
            .replace("n0 = 2.0\n", "")
            .replace("nu = 2.0\n", "")
            .replace("epsilon = 1.0\n", "");
        let s = load_scenario_str(&text).unwrap();
        assert_eq!((s.jamming.n0, s.jamming.nu, s.jamming.epsilon), (2.0, 2.0, 1.0));
        assert!(s.targets.iter().all(|t| t.k == 1.0));
    }

    #[test]
    fn unknown_fields_and_versions_rejected() {
        let extra = bundled::SCENARIO_A.replace("[jamming]", "[jamming]\nbogus = 1");
        assert!(matches!(load_scenario_str(&extra), Err(IoError::Parse(_))));
        let v2 = bundled::SCENARIO_A.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(load_scenario_str(&v2), Err(IoError::Schema(_))));
        let missing = bundled::SCENARIO_A.replace("los", "");
        assert!(load_scenario_str(&missing).is_ok());
        let unknown_anchor = bundled::SCENARIO_A.replace("id = 1\nx = 2.0\ny = 5.0\n", "id = 1\nx = 2.0\ny = 5.0\nlos_anchor_ids = [1, 9]\n");
        assert!(matches!(load_scenario_str(&unknown_anchor), Err(IoError::Schema(_))));
    }

    #[test]
    fn missing_file_is_read_error() {
        assert!(matches!(load_scenario("/nonexistent/scenario.toml"), Err(IoError::Read { .. })));
    }

    #[test]
    fn round_trip_is_idempotent() {
        for s in [bundled::scenario_a(), bundled::scenario_b(), bundled::scenario_c(), bundled::scenario_a_gated()] {
            let text = scenario_to_toml(&s);
            let again = load_scenario_str(&text).unwrap();
            assert_eq!(again, s);
            assert_eq!(scenario_to_toml(&again), text);
            assert_eq!(scenario_hash(&again), scenario_hash(&s));
        }
    }

    #[test]
    fn explicit_channel_round_trip() {
        let text = bundled::SCENARIO_A.replace(
            "[channel.free_space]\nc0 = 100.0\nexponent = 2.0\n",
            "[channel]\nexplicit = [[1.0, 2.0, 3.0, 4.0], [4.0, 3.0, 2.0, 1.0], [1.0, 1.0, 1.0, 1.0]]\n",
        );
        let s = load_scenario_str(&text).unwrap();
        assert_eq!(s.targets[0].lambdas, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(load_scenario_str(&scenario_to_toml(&s)).unwrap(), s);
    }

    #[test]
    fn results_table_format() {
        let s = bundled::scenario_a();
        let r = solve(&s).unwrap();
        let rec = ResultRecord::new(&s, r, 1.0);
        let text = format_results(&[rec.clone()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], RESULTS_HEADER);
        assert!(lines[1].starts_with("6.000000,4.871"));
        assert!(lines[1].contains(",0.927860,Prop2Pair,1;3,true"), "{}", lines[1]);
        assert!(!text.contains('\r'));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        assert!(matches!(save_results(&[], &path), Err(IoError::EmptyRecords)));
        let many: Vec<ResultRecord> = (0..30).map(|_| rec.clone()).collect();
        save_results(&many, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 31);
        assert!(matches!(save_results(&many, dir.path().join("no/such/dir.csv")), Err(IoError::Write { .. })));
    }

    #[test]
    fn record_reproduces_value() {
        let s = bundled::scenario_b();
        let rec = ResultRecord::new(&s, solve(&s).unwrap(), 0.0);
        let min = rec.per_target_crlb.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min - rec.result.value).abs() <= 1e-6 * min);
        assert_eq!(rec.scenario_hash.len(), 64);
    }
}
