//! Per-subcommand configuration: embedded defaults, optional JSON file,
//! then `--set key=value` overrides with dotted keys for nested fields.

use std::f64::consts::PI;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use usc_qec::dynamics::{CavityFieldSpec, RampShape};
use usc_qec::fluxqubit::{linspace, CutoffPolicy};
use usc_qec::noise::{Backend, CodeKind, MeasurementMode};

use crate::CliError;

/// One value, an explicit list, or `count` evenly spaced points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Single(f64),
    List(Vec<f64>),
    Range(Range),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        Grid::Range(Range { start, stop, count })
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Single(x) => vec![*x],
            Grid::List(v) => v.clone(),
            Grid::Range(r) => linspace(r.start, r.stop, r.count),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSweepConfig {
    #[serde(rename = "E_J_GHz")]
    pub e_j_ghz: f64,
    /// `E_J / E_C`.
    #[serde(rename = "E_C_ratio")]
    pub e_c_ratio: f64,
    pub alpha: Grid,
    pub beta: f64,
    pub gamma: f64,
    pub f1: Grid,
    pub f2: f64,
    pub f3: f64,
    pub n_max: usize,
    pub cutoff_policy: CutoffPolicy,
}

impl Default for QubitSweepConfig {
    fn default() -> Self {
        Self {
            e_j_ghz: 221.0,
            e_c_ratio: 32.0,
            alpha: Grid::range(0.6, 1.0, 40),
            beta: 0.1,
            gamma: 0.1,
            f1: Grid::range(0.46, 0.54, 41),
            f2: 0.0,
            f3: 0.0,
            n_max: 8,
            cutoff_policy: CutoffPolicy::Fixed,
        }
    }
}

/// Missing line parameters fall back to the synthetic resonator for `N`
/// junctions, with `C_J` tuned so the manifold is degenerate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub length_m: Option<f64>,
    pub l_per_m: Option<f64>,
    pub c_per_m: Option<f64>,
    #[serde(rename = "C_J_F")]
    pub c_j_f: Option<f64>,
    #[serde(rename = "L_J_H")]
    pub l_j_h: Option<f64>,
    pub gamma: f64,
    pub beta: f64,
    #[serde(rename = "max_freq_GHz")]
    pub max_freq_ghz: f64,
    /// Relative window for the degenerate-manifold report.
    pub degeneracy_window: f64,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self {
            n: 5,
            length_m: None,
            l_per_m: None,
            c_per_m: None,
            c_j_f: None,
            l_j_h: None,
            gamma: 0.1,
            beta: 0.1,
            max_freq_ghz: 12.0,
            degeneracy_window: 1e-6,
        }
    }
}

/// Cavity field as written in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CavityConfig {
    Vacuum,
    Thermal {
        #[serde(rename = "temp_mK")]
        temp_mk: f64,
    },
    Coherent { gamma: f64 },
}

impl From<CavityConfig> for CavityFieldSpec {
    fn from(c: CavityConfig) -> Self {
        match c {
            CavityConfig::Vacuum => CavityFieldSpec::Vacuum,
            CavityConfig::Thermal { temp_mk } => CavityFieldSpec::Thermal { temp_mk },
            CavityConfig::Coherent { gamma } => CavityFieldSpec::coherent(gamma),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateFidelityConfig {
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: f64,
    pub omega_q_over_omega: f64,
    pub g_over_omega: f64,
    pub modes: usize,
    pub cx: Grid,
    pub cavity: Vec<CavityConfig>,
    pub cutoff: usize,
}

impl Default for GateFidelityConfig {
    fn default() -> Self {
        Self {
            omega_ghz: 5.0,
            omega_q_over_omega: 0.25,
            g_over_omega: 1.0 / (4.0 * 2f64.sqrt()),
            modes: 2,
            cx: Grid::range(0.0, 0.3, 7),
            cavity: vec![
                CavityConfig::Thermal { temp_mk: 15.0 },
                CavityConfig::Vacuum,
                CavityConfig::Coherent { gamma: 0.25 },
                CavityConfig::Coherent { gamma: 0.5 },
                CavityConfig::Coherent { gamma: 1.0 },
            ],
            cutoff: 15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampConfig {
    pub g0_over_omega: f64,
    #[serde(rename = "T_over_omega")]
    pub t_over_omega: f64,
    pub shape: RampShape,
    pub steps: usize,
    pub check_halving: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticConfig {
    #[serde(rename = "omega_GHz")]
    pub omega_ghz: f64,
    pub omega_q_over_omega: f64,
    pub cx: f64,
    pub qubits: usize,
    pub modes: usize,
    pub cutoff: usize,
    pub ramp: RampConfig,
}

impl Default for AdiabaticConfig {
    fn default() -> Self {
        Self {
            omega_ghz: 5.0,
            omega_q_over_omega: 1.0,
            cx: 1.0,
            qubits: 2,
            modes: 2,
            cutoff: 6,
            ramp: RampConfig {
                g0_over_omega: 1.0 / (4.0 * 2f64.sqrt()),
                t_over_omega: 250.0,
                shape: RampShape::LinearInG,
                steps: 500,
                check_halving: true,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateChoice {
    /// `diag(1, 1, 1, -1)`.
    Ideal,
    /// The simulated cavity gate with its local phases removed.
    Simulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub code: CodeKind,
    /// Edge-list file replacing the built-in Steane graph.
    pub graph: Option<String>,
    pub gate: GateChoice,
    pub verify: bool,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self { code: CodeKind::FiveQubit, graph: None, gate: GateChoice::Ideal, verify: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    Trajectory,
    Channel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MontecarloConfig {
    pub code: CodeKind,
    pub p1_grid: Grid,
    pub p2_grid: Grid,
    pub p_m: f64,
    /// Defaults to 5000 for the five-qubit code and 1000 otherwise.
    pub trials: Option<usize>,
    pub seed: u64,
    pub mode: EstimatorMode,
    pub measurement: MeasurementMode,
    pub backend: Backend,
    pub noisy_corrections: bool,
}

impl Default for MontecarloConfig {
    fn default() -> Self {
        Self {
            code: CodeKind::FiveQubit,
            p1_grid: Grid::range(0.0, 0.05, 6),
            p2_grid: Grid::range(0.0, 0.05, 6),
            p_m: 0.01,
            trials: None,
            seed: 2024,
            mode: EstimatorMode::Trajectory,
            measurement: MeasurementMode::Corrected,
            backend: Backend::Frame,
            noisy_corrections: false,
        }
    }
}

impl MontecarloConfig {
    pub fn resolved_trials(&self) -> usize {
        self.trials.unwrap_or(match self.code {
            CodeKind::FiveQubit => 5000,
            _ => 1000,
        })
    }
}

pub fn omega_rad_per_ns(omega_ghz: f64) -> f64 {
    2.0 * PI * omega_ghz
}

/// Recursively overlays `patch` onto `base`.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `a.b.c=value`; the value is parsed as JSON and falls back to a
/// plain string.
pub fn apply_set(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {assignment:?}")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = slot
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("{key}: {part} is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        slot = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
        if slot.is_null() {
            *slot = Value::Object(Default::default());
        }
    }
    Ok(())
}

/// Defaults, then `file`, then the overrides in order.
pub fn resolve<T>(file: Option<Value>, sets: &[String]) -> Result<T, CliError>
where
    T: Default + Serialize + DeserializeOwned,
{
    let mut doc = serde_json::to_value(T::default()).expect("defaults serialize");
    if let Some(f) = file {
        if !f.is_object() {
            return Err(CliError::Config("config file must hold a JSON object".into()));
        }
        merge(&mut doc, f);
    }
    for s in sets {
        apply_set(&mut doc, s)?;
    }
    serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))
}
