use std::f64::consts::PI;
use std::path::Path;

use ioncav::lineshape::{linear_grid, scan};
use ioncav::photometrics::{
    cavity_metrics, cavity_solid_angle, collection_probability, cooperativity, efficiency_chain,
    enhancement_factor, isotropic_rate, saturation_intensity, scatter_rate, CavityInputs, SPEED_OF_LIGHT,
};
use ioncav::resonator::{dual_band_offset, gouy_phase, length_diff_from_offset, MirrorGeometry};
use ioncav::trapchar::{fit_eta, Axis, SecularMeasurement, TrapDrive};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::format::sig_digits;

pub const SYNTHETIC_TRAP_CSV: &str = include_str!("../data/trap_synthetic.csv");

const CSV_DIGITS: usize = 9;

fn w(hz: f64) -> f64 {
    2.0 * PI * hz
}

fn hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref().ok_or_else(|| CliError::Config(format!("missing {name} section")))
}

/// Cavity-detuning scan as CSV text. Nothing is returned unless every point
/// solved.
pub fn run_scan(cfg: &RunConfig, points: Option<usize>, intensity: Option<f64>) -> Result<String, CliError> {
    let mut cfg = cfg.clone();
    if let Some(n) = points {
        cfg.scan.points = n;
    }
    if let Some(i) = intensity {
        cfg.drive.intensity_sat = i;
    }
    cfg.validate_scan()?;
    let params = cfg.system_params()?;
    let grid_hz = linear_grid(cfg.scan.delta_c_start_hz, cfg.scan.delta_c_stop_hz, cfg.scan.points)?;
    let grid: Vec<f64> = grid_hz.iter().map(|&f| w(f)).collect();
    let table = scan(&params, &grid)?;

    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["delta_c_hz", "n_h", "n_v", "count_rate_per_s"])?;
    for (f, row) in grid_hz.iter().zip(table.rows()) {
        out.write_record([
            sig_digits(*f, CSV_DIGITS),
            sig_digits(row.n_h, CSV_DIGITS),
            sig_digits(row.n_v, CSV_DIGITS),
            sig_digits(row.count_rate, CSV_DIGITS),
        ])?;
    }
    let bytes = out.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are ASCII"))
}

pub fn run_budget(cfg: &RunConfig) -> Result<Value, CliError> {
    let b = section(&cfg.budget, "budget")?;
    let metrics = cavity_metrics(&CavityInputs {
        fsr: Some(b.fsr_hz),
        fwhm: b.fwhm_hz,
        t_out_ppm: Some(b.t_out_ppm),
        t_in_ppm: Some(b.t_in_ppm),
        loss_ppm: Some(b.loss_ppm),
        ..Default::default()
    })?;

    let gamma = w(cfg.atom.gamma_hz);
    let kappa = w(cfg.cavity.kappa_hz);
    let g = w(cfg.cavity.g_hz);
    let c = cooperativity(g, kappa, gamma)?;
    let c_eff = cooperativity(g * cfg.cavity.g_averaging_factor, kappa, gamma)?;
    let p_coll = collection_probability(b.t_out_over_loss, kappa, gamma, c_eff)?;

    let chain = efficiency_chain(b.detected_per_s, &b.stages)?;
    let cavity_output = chain
        .stages
        .iter()
        .find(|s| s.label == b.cavity_output_stage)
        .map(|s| s.rate)
        .expect("stage label checked when the config was loaded");
    let gamma_sc = scatter_rate(cfg.drive.intensity_sat, w(cfg.atom.delta0_hz), gamma)?;
    let solid_angle = cavity_solid_angle(b.wavelength_m, b.waist_m)?;
    let isotropic = isotropic_rate(gamma_sc, solid_angle)?;
    let enhancement = enhancement_factor(cavity_output, isotropic)?;
    let i_sat = saturation_intensity(b.wavelength_m, gamma)?;

    let stages: Vec<Value> = chain
        .stages
        .iter()
        .map(|s| json!({"label": s.label, "efficiency": s.efficiency, "rate_per_s": s.rate}))
        .collect();
    Ok(json!({
        "cavity": {
            "length_m": metrics.length,
            "fsr_hz": metrics.fsr,
            "fwhm_hz": metrics.fwhm,
            "finesse": metrics.finesse,
            "kappa_hz": hz(metrics.kappa),
            "outcoupling_efficiency": metrics.outcoupling_efficiency,
        },
        "coupling": {
            "g_hz": cfg.cavity.g_hz,
            "kappa_hz": cfg.cavity.kappa_hz,
            "gamma_hz": cfg.atom.gamma_hz,
            "cooperativity": c,
            "effective_cooperativity": c_eff,
            "collection_probability": p_coll,
        },
        "emission": {
            "intensity_sat": cfg.drive.intensity_sat,
            "saturation_intensity_mw_per_cm2": i_sat * 0.1,
            "scatter_rate_per_s": gamma_sc,
            "solid_angle_sr": solid_angle,
            "isotropic_rate_per_s": isotropic,
            "cavity_output_per_s": cavity_output,
            "enhancement_factor": enhancement,
        },
        "ladder": {
            "detected_per_s": chain.detected,
            "stages": stages,
            "source_rate_per_s": chain.source_rate(),
        },
    }))
}

pub fn run_resonator(cfg: &RunConfig) -> Result<Value, CliError> {
    let r = section(&cfg.resonator, "resonator")?;
    let nu_ir = SPEED_OF_LIGHT / r.ir_wavelength_m;
    let g = MirrorGeometry::symmetric(r.length_m, r.radius_m, nu_ir)?;
    let phi = gouy_phase(r.length_m, r.radius_m)?;
    let gouy_offset = dual_band_offset(&g)?;
    let dl = length_diff_from_offset(r.offset_hz, &g)?;
    Ok(json!({
        "length_m": r.length_m,
        "radius_m": r.radius_m,
        "gouy_phase_rad": phi,
        "fsr_hz": SPEED_OF_LIGHT / (2.0 * r.length_m),
        "ir_frequency_hz": nu_ir,
        "equal_length_offset_hz": gouy_offset,
        "offset_hz": r.offset_hz,
        "length_difference_m": dl,
        "length_difference_nm": dl * 1e9,
    }))
}

#[derive(Debug, Deserialize)]
struct TrapRow {
    u0_volts: f64,
    separation_um: f64,
    axis: String,
    omega_hz: f64,
}

fn read_trap_csv(text: &str) -> Result<Vec<SecularMeasurement>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["u0_volts", "separation_um", "axis", "omega_hz"] {
        return Err(CliError::Config(format!(
            "trap CSV header must be u0_volts,separation_um,axis,omega_hz, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<TrapRow>().enumerate() {
        let row = row?;
        let axis: Axis = row
            .axis
            .parse()
            .map_err(|e| CliError::Config(format!("trap CSV row {}: {e}", i + 1)))?;
        out.push(SecularMeasurement {
            u0: row.u0_volts,
            separation: row.separation_um * 1e-6,
            axis,
            omega: w(row.omega_hz),
        });
    }
    Ok(out)
}

pub fn run_trap_fit(cfg: &RunConfig, csv_path: Option<&Path>) -> Result<Value, CliError> {
    let t = section(&cfg.trap, "trap")?;
    let text = match csv_path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?,
        None => SYNTHETIC_TRAP_CSV.to_string(),
    };
    let data = read_trap_csv(&text)?;
    let drive = TrapDrive { v0: t.v0_volts, omega_rf: w(t.rf_hz), mass: t.mass };
    let fit = fit_eta(&data, &drive)?;
    let seps: Vec<Value> = fit
        .separations
        .iter()
        .map(|s| json!({"separation_um": (s.separation * 1e12).round() / 1e6, "eta": s.eta, "points": s.points, "sse_rad2_per_s2": s.sse}))
        .collect();
    Ok(json!({
        "v0_volts": t.v0_volts,
        "rf_hz": t.rf_hz,
        "separations": seps,
        "anisotropy": fit.anisotropy,
        "sse_rad2_per_s2": fit.sse,
    }))
}

/// Pass/fail table and whether everything passed.
pub fn run_selftest() -> (String, bool) {
    let checks = ioncav::selftest::run();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in &checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{mark}  {:width$}  {}\n", c.name, c.detail));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    out.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    (out, passed == checks.len())
}
