//! Longitudinal resonances of a near-planar two-mirror cavity at two
//! wavelengths, and the frequency offset between the infrared lock and the
//! ultraviolet resonance.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::photometrics::SPEED_OF_LIGHT;

/// `arccos(1 − L/R)` for `0 ≤ L ≤ 2R`.
pub fn gouy_phase(length: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !(length >= 0.0) || length > 2.0 * radius {
        return Err(Error::Domain(format!(
            "L = {length} m, R = {radius} m is outside the stability range 0 <= L <= 2R"
        )));
    }
    Ok((1.0 - length / radius).clamp(-1.0, 1.0).acos())
}

/// Frequency of longitudinal mode `q`: `(c/2L)(q + φ/π)`.
pub fn resonance_frequency(q: u64, length: f64, radius: f64) -> Result<f64> {
    if q < 1 {
        return Err(Error::Domain("mode index q must be >= 1".into()));
    }
    let phi = gouy_phase(length, radius)?;
    Ok(SPEED_OF_LIGHT / (2.0 * length) * (q as f64 + phi / PI))
}

/// Planar-limit resonance `q c / 2L`.
pub fn planar_resonance_frequency(q: u64, length: f64) -> Result<f64> {
    if q < 1 || !(length > 0.0) {
        return Err(Error::Domain(format!("invalid planar resonance q = {q}, L = {length}")));
    }
    Ok(q as f64 * SPEED_OF_LIGHT / (2.0 * length))
}

/// Effective lengths and radii seen by the infrared and ultraviolet light.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MirrorGeometry {
    pub l_ir: f64,
    pub l_uv: f64,
    pub r_ir: f64,
    pub r_uv: f64,
    /// Infrared lock frequency, Hz.
    pub nu_ir: f64,
}

impl MirrorGeometry {
    /// Same length and radius in both bands.
    pub fn symmetric(length: f64, radius: f64, nu_ir: f64) -> Result<Self> {
        let g = Self { l_ir: length, l_uv: length, r_ir: radius, r_uv: radius, nu_ir };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (l, r) in [(self.l_ir, self.r_ir), (self.l_uv, self.r_uv)] {
            if !(l > 0.0 && l < 2.0 * r) {
                return Err(Error::Domain(format!("L = {l} m, R = {r} m violates 0 < L < 2R")));
            }
        }
        if !(self.nu_ir > 0.0 && self.nu_ir.is_finite()) {
            return Err(Error::Domain(format!("nu_ir = {} must be positive", self.nu_ir)));
        }
        Ok(())
    }

    /// Gouy contribution to the offset, infrared phase taken at `l_ir`.
    fn gouy_term_at(&self, l_ir: f64) -> Result<f64> {
        let phi_ir = gouy_phase(l_ir, self.r_ir)?;
        let phi_uv = gouy_phase(self.l_uv, self.r_uv)?;
        Ok(SPEED_OF_LIGHT / (2.0 * PI * self.l_uv) * (phi_ir - 0.5 * phi_uv))
    }
}

/// `Δf = ν_ir − ν_uv/2` for the given geometry, Hz.
pub fn dual_band_offset(g: &MirrorGeometry) -> Result<f64> {
    g.validate()?;
    Ok(g.nu_ir * (g.l_uv - g.l_ir) / g.l_uv + g.gouy_term_at(g.l_ir)?)
}

/// Signed `L_uv − L_ir` that produces `offset`, to first order: the
/// infrared Gouy phase is evaluated at `l_uv` and `l_ir` is ignored.
pub fn length_diff_from_offset(offset: f64, g: &MirrorGeometry) -> Result<f64> {
    g.validate()?;
    if !offset.is_finite() {
        return Err(Error::Domain(format!("offset = {offset} is not finite")));
    }
    Ok((offset - g.gouy_term_at(g.l_uv)?) * g.l_uv / g.nu_ir)
}
