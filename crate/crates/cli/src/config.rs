//! JSON run configuration. Frequencies are linear (Hz) and every quantity
//! key carries its unit as a suffix; conversion to rad/s happens here.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use ioncav::cavity_model::{CavityParams, MAX_FOCK_CUTOFF};
use ioncav::ion_model::{DriveGeometry, ZeemanParams, ZEEMAN_RATIO_P_OVER_S};
use ioncav::steadystate::SystemParams;
use ioncav::trapchar::{ATOMIC_MASS_UNIT, YB174_ION_MASS};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const PAPER_DEFAULTS: &str = include_str!("../data/paper_defaults.json");

#[derive(Clone, Debug, PartialEq)]
pub struct AtomConfig {
    pub gamma_hz: f64,
    pub delta0_hz: f64,
    pub zeeman_s_hz: f64,
    pub zeeman_p_hz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CavityConfig {
    pub g_hz: f64,
    pub g_averaging_factor: f64,
    pub kappa_hz: f64,
    pub fock_cutoff: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveConfig {
    pub intensity_sat: f64,
    pub theta_k_deg: f64,
    pub psi_pol_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub delta_c_start_hz: f64,
    pub delta_c_stop_hz: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetConfig {
    pub detected_per_s: f64,
    pub stages: Vec<(String, f64)>,
    pub cavity_output_stage: String,
    pub fsr_hz: f64,
    pub fwhm_hz: f64,
    pub t_out_ppm: f64,
    pub t_in_ppm: f64,
    pub loss_ppm: f64,
    pub t_out_over_loss: f64,
    pub wavelength_m: f64,
    pub waist_m: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonatorConfig {
    pub length_m: f64,
    pub radius_m: f64,
    pub ir_wavelength_m: f64,
    pub offset_hz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrapConfig {
    pub v0_volts: f64,
    pub rf_hz: f64,
    /// Ion mass, kg.
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub atom: AtomConfig,
    pub cavity: CavityConfig,
    pub drive: DriveConfig,
    pub scan: ScanConfig,
    pub budget: Option<BudgetConfig>,
    pub resonator: Option<ResonatorConfig>,
    pub trap: Option<TrapConfig>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Typed access to one JSON object with a fixed set of allowed keys.
struct Section<'a> {
    path: String,
    map: Option<&'a Map<String, Value>>,
    known: BTreeSet<&'static str>,
}

impl<'a> Section<'a> {
    /// Fails on the first key outside `known`.
    fn new(path: &str, value: Option<&'a Value>, known: &[&'static str]) -> Result<Self, CliError> {
        let map = match value {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => return Err(config_err(format!("{path} must be an object"))),
        };
        let s = Self { path: path.to_string(), map, known: known.iter().copied().collect() };
        s.check_keys()?;
        Ok(s)
    }

    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        debug_assert!(self.known.contains(key), "{key} not declared");
        self.map.and_then(|m| m.get(key))
    }

    fn opt_f64(&mut self, key: &'static str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(config_err(format!("{} must be a finite number", self.key_path(key)))),
            },
        }
    }

    fn f64(&mut self, key: &'static str) -> Result<f64, CliError> {
        self.opt_f64(key)?.ok_or_else(|| config_err(format!("missing {}", self.key_path(key))))
    }

    fn opt_usize(&mut self, key: &'static str) -> Result<Option<usize>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| config_err(format!("{} must be a non-negative integer", self.key_path(key)))),
        }
    }

    fn string(&mut self, key: &'static str) -> Result<String, CliError> {
        match self.get(key) {
            None => Err(config_err(format!("missing {}", self.key_path(key)))),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(config_err(format!("{} must be a string", self.key_path(key)))),
        }
    }

    fn array(&mut self, key: &'static str) -> Result<&'a Vec<Value>, CliError> {
        match self.get(key) {
            None => Err(config_err(format!("missing {}", self.key_path(key)))),
            Some(Value::Array(a)) => Ok(a),
            Some(_) => Err(config_err(format!("{} must be an array", self.key_path(key)))),
        }
    }

    /// A key that differs from a known one only in its unit suffix gets a
    /// more specific message than a plain unknown key.
    fn check_keys(&self) -> Result<(), CliError> {
        let Some(map) = self.map else { return Ok(()) };
        for key in map.keys() {
            if self.known.contains(key.as_str()) {
                continue;
            }
            let near = self.known.iter().find(|k| {
                let stem = unit_stem(k);
                key == stem || key.starts_with(&format!("{stem}_"))
            });
            return Err(match near {
                Some(expected) => config_err(format!(
                    "unit suffix violation at {}: expected {}",
                    self.key_path(key),
                    self.key_path(expected)
                )),
                None => config_err(format!("unknown key {}", self.key_path(key))),
            });
        }
        Ok(())
    }
}

const UNIT_SUFFIXES: [&str; 8] = ["_hz", "_deg", "_ppm", "_per_s", "_volts", "_amu", "_sat", "_m"];

fn unit_stem(key: &str) -> &str {
    UNIT_SUFFIXES.iter().find_map(|s| key.strip_suffix(s)).unwrap_or(key)
}

fn positive(path: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(config_err(format!("{path} must be positive, got {x}")))
    }
}

fn parse_budget(root: &Map<String, Value>) -> Result<Option<BudgetConfig>, CliError> {
    let Some(v) = root.get("budget") else { return Ok(None) };
    let mut s = Section::new(
        "budget",
        Some(v),
        &[
            "detected_per_s",
            "stages",
            "cavity_output_stage",
            "fsr_hz",
            "fwhm_hz",
            "t_out_ppm",
            "t_in_ppm",
            "loss_ppm",
            "t_out_over_loss",
            "wavelength_m",
            "waist_m",
        ],
    )?;
    let detected_per_s = positive("budget.detected_per_s", s.f64("detected_per_s")?)?;
    let mut stages = Vec::new();
    for (i, item) in s.array("stages")?.iter().enumerate() {
        let path = format!("budget.stages[{i}]");
        let mut st = Section::new(&path, Some(item), &["label", "efficiency"])?;
        let label = st.string("label")?;
        let efficiency = st.f64("efficiency")?;
        stages.push((label, efficiency));
    }
    let cfg = BudgetConfig {
        detected_per_s,
        stages,
        cavity_output_stage: s.string("cavity_output_stage")?,
        fsr_hz: s.f64("fsr_hz")?,
        fwhm_hz: s.f64("fwhm_hz")?,
        t_out_ppm: s.f64("t_out_ppm")?,
        t_in_ppm: s.f64("t_in_ppm")?,
        loss_ppm: s.f64("loss_ppm")?,
        t_out_over_loss: s.f64("t_out_over_loss")?,
        wavelength_m: s.f64("wavelength_m")?,
        waist_m: s.f64("waist_m")?,
    };
    if !cfg.stages.iter().any(|(l, _)| *l == cfg.cavity_output_stage) {
        return Err(config_err(format!(
            "budget.cavity_output_stage {:?} does not name a stage",
            cfg.cavity_output_stage
        )));
    }
    Ok(Some(cfg))
}

fn parse_resonator(root: &Map<String, Value>) -> Result<Option<ResonatorConfig>, CliError> {
    let Some(v) = root.get("resonator") else { return Ok(None) };
    let mut s = Section::new("resonator", Some(v), &["length_m", "radius_m", "ir_wavelength_m", "offset_hz"])?;
    let cfg = ResonatorConfig {
        length_m: s.f64("length_m")?,
        radius_m: s.f64("radius_m")?,
        ir_wavelength_m: positive("resonator.ir_wavelength_m", s.f64("ir_wavelength_m")?)?,
        offset_hz: s.f64("offset_hz")?,
    };
    Ok(Some(cfg))
}

fn parse_trap(root: &Map<String, Value>) -> Result<Option<TrapConfig>, CliError> {
    let Some(v) = root.get("trap") else { return Ok(None) };
    let mut s = Section::new("trap", Some(v), &["v0_volts", "rf_hz", "ion_mass_amu"])?;
    let v0_volts = s.f64("v0_volts")?;
    let rf_hz = positive("trap.rf_hz", s.f64("rf_hz")?)?;
    let mass = match s.opt_f64("ion_mass_amu")? {
        Some(m) => positive("trap.ion_mass_amu", m)? * ATOMIC_MASS_UNIT,
        None => YB174_ION_MASS,
    };
    Ok(Some(TrapConfig { v0_volts, rf_hz, mass }))
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let root: Value = if text.trim().is_empty() {
            Value::Object(Map::new())
        } else {
            serde_json::from_str(text).map_err(|e| config_err(format!("malformed JSON: {e}")))?
        };
        let Value::Object(root) = root else {
            return Err(config_err("configuration must be a JSON object"));
        };

        let top = Value::Object(root.clone());
        Section::new("", Some(&top), &["atom", "cavity", "drive", "scan", "budget", "resonator", "trap"])?;

        let mut a = Section::new(
            "atom",
            root.get("atom"),
            &["gamma_hz", "delta0_hz", "zeeman_s_hz", "zeeman_p_hz"],
        )?;
        let gamma_hz = positive("atom.gamma_hz", a.f64("gamma_hz")?)?;
        let delta0_hz = a.f64("delta0_hz")?;
        let zeeman_s_hz = a.opt_f64("zeeman_s_hz")?.unwrap_or(1e6);
        let zeeman_p_hz = a.opt_f64("zeeman_p_hz")?.unwrap_or(zeeman_s_hz * ZEEMAN_RATIO_P_OVER_S);

        let mut c = Section::new(
            "cavity",
            root.get("cavity"),
            &["g_hz", "g_averaging_factor", "kappa_hz", "fock_cutoff"],
        )?;
        let g_hz = c.f64("g_hz")?;
        let g_averaging_factor = c.opt_f64("g_averaging_factor")?.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
        let kappa_hz = c.f64("kappa_hz")?;
        let fock_cutoff = c.opt_usize("fock_cutoff")?.unwrap_or(2);
        if !(1..=MAX_FOCK_CUTOFF).contains(&fock_cutoff) {
            return Err(config_err(format!(
                "cavity.fock_cutoff = {fock_cutoff} outside supported range 1-{MAX_FOCK_CUTOFF}"
            )));
        }
        if !(0.0..=1.0).contains(&g_averaging_factor) {
            return Err(config_err(format!("cavity.g_averaging_factor = {g_averaging_factor} outside [0, 1]")));
        }

        let mut d = Section::new("drive", root.get("drive"), &["intensity_sat", "theta_k_deg", "psi_pol_deg"])?;
        let drive = DriveConfig {
            intensity_sat: d.f64("intensity_sat")?,
            theta_k_deg: d.f64("theta_k_deg")?,
            psi_pol_deg: d.f64("psi_pol_deg")?,
        };

        let mut sc = Section::new("scan", root.get("scan"), &["delta_c_start_hz", "delta_c_stop_hz", "points"])?;
        let scan = ScanConfig {
            delta_c_start_hz: sc.opt_f64("delta_c_start_hz")?.unwrap_or(-450e6),
            delta_c_stop_hz: sc.opt_f64("delta_c_stop_hz")?.unwrap_or(450e6),
            points: sc.opt_usize("points")?.unwrap_or(181),
        };

        let cfg = RunConfig {
            atom: AtomConfig { gamma_hz, delta0_hz, zeeman_s_hz, zeeman_p_hz },
            cavity: CavityConfig { g_hz, g_averaging_factor, kappa_hz, fock_cutoff },
            drive,
            scan,
            budget: parse_budget(&root)?,
            resonator: parse_resonator(&root)?,
            trap: parse_trap(&root)?,
        };
        cfg.validate_scan()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Self::from_str(PAPER_DEFAULTS),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", p.display())))?;
                Self::from_str(&text)
            }
        }
    }

    pub fn validate_scan(&self) -> Result<(), CliError> {
        if self.scan.points < 3 {
            return Err(config_err(format!("scan.points = {} must be at least 3", self.scan.points)));
        }
        if !(self.scan.delta_c_stop_hz > self.scan.delta_c_start_hz) {
            return Err(config_err("scan.delta_c_stop_hz must exceed scan.delta_c_start_hz"));
        }
        Ok(())
    }

    /// Solver parameters in rad/s. The cavity detuning is left at zero; the
    /// scan sets it per point.
    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        let w = |hz: f64| 2.0 * PI * hz;
        let p = SystemParams {
            gamma: w(self.atom.gamma_hz),
            delta_0: w(self.atom.delta0_hz),
            zeeman: ZeemanParams::new(w(self.atom.zeeman_s_hz), w(self.atom.zeeman_p_hz))?,
            cavity: CavityParams::new(
                w(self.cavity.g_hz) * self.cavity.g_averaging_factor,
                w(self.cavity.kappa_hz),
                0.0,
                self.cavity.fock_cutoff,
            )?,
            i_rel: self.drive.intensity_sat,
            geometry: DriveGeometry::from_degrees(self.drive.theta_k_deg, self.drive.psi_pol_deg)?,
        };
        p.validate()?;
        Ok(p)
    }
}
