//! Classical photon-budget arithmetic: cavity figures of merit, collection
//! probability, solid angles, scatter rates and detection-chain ladders.
//!
//! Rates are in s⁻¹, angular frequencies in rad/s, lengths in m, linear
//! frequencies in Hz.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;

/// Relative disagreement tolerated when a quantity is specified twice.
pub const CONSISTENCY_TOL: f64 = 0.01;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} = {v} must be positive and finite")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} = {v} must be non-negative and finite")))
    }
}

/// Measured cavity quantities. At least one of `length` and `fsr` is
/// required; if both are given they must agree within 1%.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct CavityInputs {
    pub length: Option<f64>,
    pub fsr: Option<f64>,
    pub fwhm: f64,
    pub t_out_ppm: Option<f64>,
    pub t_in_ppm: Option<f64>,
    pub loss_ppm: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CavityMetrics {
    pub length: f64,
    pub fsr: f64,
    pub fwhm: f64,
    pub finesse: f64,
    /// Field decay rate `κ = π·fwhm`, rad/s.
    pub kappa: f64,
    pub t_out_ppm: Option<f64>,
    pub t_in_ppm: Option<f64>,
    pub loss_ppm: Option<f64>,
    /// `T_out / (T_out + T_in + losses)`, when `T_out` is known.
    pub outcoupling_efficiency: Option<f64>,
}

pub fn cavity_metrics(inputs: &CavityInputs) -> Result<CavityMetrics> {
    let fwhm = positive("fwhm", inputs.fwhm)?;
    let (length, fsr) = match (inputs.length, inputs.fsr) {
        (None, None) => {
            return Err(Error::Domain("cavity metrics need the length or the free spectral range".into()))
        }
        (Some(l), None) => {
            let l = positive("length", l)?;
            (l, SPEED_OF_LIGHT / (2.0 * l))
        }
        (None, Some(f)) => {
            let f = positive("fsr", f)?;
            (SPEED_OF_LIGHT / (2.0 * f), f)
        }
        (Some(l), Some(f)) => {
            let l = positive("length", l)?;
            let f = positive("fsr", f)?;
            let implied = SPEED_OF_LIGHT / (2.0 * l);
            if ((implied - f) / f).abs() > CONSISTENCY_TOL {
                return Err(Error::Consistency(format!(
                    "length {l} m implies fsr {implied:.6e} Hz, but fsr {f:.6e} Hz was given"
                )));
            }
            (l, f)
        }
    };
    let opt = |name: &str, v: Option<f64>| v.map(|v| non_negative(name, v)).transpose();
    let t_out_ppm = opt("t_out_ppm", inputs.t_out_ppm)?;
    let t_in_ppm = opt("t_in_ppm", inputs.t_in_ppm)?;
    let loss_ppm = opt("loss_ppm", inputs.loss_ppm)?;
    let outcoupling_efficiency = match t_out_ppm {
        Some(t) => {
            let total = t + t_in_ppm.unwrap_or(0.0) + loss_ppm.unwrap_or(0.0);
            if total > 0.0 {
                Some(t / total)
            } else {
                None
            }
        }
        None => None,
    };
    Ok(CavityMetrics {
        length,
        fsr,
        fwhm,
        finesse: fsr / fwhm,
        kappa: PI * fwhm,
        t_out_ppm,
        t_in_ppm,
        loss_ppm,
        outcoupling_efficiency,
    })
}

/// `g² / (κ γ)`.
pub fn cooperativity(g: f64, kappa: f64, gamma: f64) -> Result<f64> {
    non_negative("g", g)?;
    positive("kappa", kappa)?;
    positive("gamma", gamma)?;
    Ok(g * g / (kappa * gamma))
}

/// Probability that a photon scattered by the atom leaves through the
/// outcoupling mirror: outcoupling × cavity-vs-atom loss ratio × Purcell
/// factor.
pub fn collection_probability(t_out_over_loss: f64, kappa: f64, gamma: f64, c_eff: f64) -> Result<f64> {
    non_negative("t_out_over_loss", t_out_over_loss)?;
    if t_out_over_loss > 1.0 {
        return Err(Error::Domain(format!("t_out_over_loss = {t_out_over_loss} exceeds 1")));
    }
    non_negative("kappa", kappa)?;
    non_negative("gamma", gamma)?;
    non_negative("c_eff", c_eff)?;
    let branching = if kappa == 0.0 { 0.0 } else { 2.0 * kappa / (2.0 * kappa + gamma) };
    let purcell = 2.0 * c_eff / (1.0 + 2.0 * c_eff);
    Ok(t_out_over_loss * branching * purcell)
}

/// `2λ² / (π w0²)`: twice the solid angle of the mode in one direction.
pub fn cavity_solid_angle(lambda: f64, w0: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("w0", w0)?;
    Ok(2.0 * lambda * lambda / (PI * w0 * w0))
}

/// Waist that reproduces a given (doubled) cavity solid angle.
pub fn waist_from_solid_angle(lambda: f64, solid_angle: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("solid_angle", solid_angle)?;
    Ok((2.0 * lambda * lambda / (PI * solid_angle)).sqrt())
}

/// Two-level scattering rate `(γ/2)·s / (1 + s + (2δ/γ)²)`, s⁻¹.
pub fn scatter_rate(i_rel: f64, delta: f64, gamma: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    if !delta.is_finite() {
        return Err(Error::Domain(format!("delta = {delta} is not finite")));
    }
    if i_rel == f64::INFINITY {
        return Ok(gamma / 2.0);
    }
    non_negative("i_rel", i_rel)?;
    let x = 2.0 * delta / gamma;
    Ok(0.5 * gamma * i_rel / (1.0 + i_rel + x * x))
}

/// Isotropic emission into the outcoupling half of the doubled cavity solid
/// angle.
pub fn isotropic_rate(gamma_sc: f64, solid_angle_full: f64) -> Result<f64> {
    non_negative("gamma_sc", gamma_sc)?;
    positive("solid_angle", solid_angle_full)?;
    Ok(gamma_sc * (solid_angle_full / 2.0) / (4.0 * PI))
}

pub fn enhancement_factor(cavity_output: f64, isotropic: f64) -> Result<f64> {
    non_negative("cavity_output", cavity_output)?;
    if !(isotropic > 0.0) {
        return Err(Error::Domain(format!("isotropic rate {isotropic} must be positive")));
    }
    Ok(cavity_output / isotropic)
}

/// `ħ ω0³ γ / (12π c²)` in W/m².
pub fn saturation_intensity(lambda: f64, gamma: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("gamma", gamma)?;
    let omega0 = 2.0 * PI * SPEED_OF_LIGHT / lambda;
    Ok(HBAR * omega0.powi(3) * gamma / (12.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainStage {
    pub label: String,
    pub efficiency: f64,
    /// Rate in front of this element, s⁻¹.
    pub rate: f64,
}

/// Detection ladder walked backward from the detected rate.
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyChain {
    pub detected: f64,
    pub stages: Vec<ChainStage>,
}

impl EfficiencyChain {
    /// Rate in front of the first element of the ladder (the last stage).
    pub fn source_rate(&self) -> f64 {
        self.stages.last().map_or(self.detected, |s| s.rate)
    }

    /// Walk forward from the source through every efficiency.
    pub fn forward(&self) -> f64 {
        self.stages.iter().rev().fold(self.source_rate(), |r, s| r * s.efficiency)
    }
}

/// Stages are listed from the detector outward; `rate_k = detected / Π_{j≤k} η_j`.
pub fn efficiency_chain<S: AsRef<str>>(detected: f64, stages: &[(S, f64)]) -> Result<EfficiencyChain> {
    positive("detected rate", detected)?;
    let mut rate = detected;
    let mut out = Vec::with_capacity(stages.len());
    for (label, eff) in stages {
        let eff = *eff;
        if !(eff > 0.0 && eff <= 1.0) {
            return Err(Error::Domain(format!(
                "efficiency {eff} of stage '{}' outside (0, 1]",
                label.as_ref()
            )));
        }
        rate /= eff;
        out.push(ChainStage { label: label.as_ref().to_string(), efficiency: eff, rate });
    }
    Ok(EfficiencyChain { detected, stages: out })
}
