//! RF trap electrical model: secular frequencies in the lowest-order
//! pseudopotential, traceless quadrupole bookkeeping, and extraction of the
//! voltage efficiency factor from measured secular frequencies.
//!
//! `x` is the axis joining the two electrodes (separation `2 x0`), `y` and
//! `z` are the transverse directions. `V0` is the RF amplitude, not the
//! peak-to-peak voltage.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optimize::golden_section;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of a singly charged ¹⁷⁴Yb ion, kg.
pub const YB174_ION_MASS: f64 = 173.938_867_5 * ATOMIC_MASS_UNIT - 9.109_383_7e-31;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Domain(format!("unknown trap axis '{other}', expected x, y or z"))),
        }
    }
}

/// Quadrupole strengths, m⁻². Fields are private so the set is always
/// traceless: `q_z` is built as `−q_x − q_y`, which makes
/// `(q_x + q_y) + q_z` vanish exactly in floating point.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QuadrupoleMoments {
    q_x: f64,
    q_y: f64,
    q_z: f64,
}

impl QuadrupoleMoments {
    pub fn q_x(&self) -> f64 {
        self.q_x
    }

    pub fn q_y(&self) -> f64 {
        self.q_y
    }

    pub fn q_z(&self) -> f64 {
        self.q_z
    }

    pub fn along(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.q_x,
            Axis::Y => self.q_y,
            Axis::Z => self.q_z,
        }
    }
}

fn check_eta_x0(eta: f64, x0: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta = {eta} outside (0, 1]")));
    }
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::Domain(format!("x0 = {x0} must be positive")));
    }
    Ok(())
}

/// `q_x = η/x0²`, `q_y = −r q_x`, `q_z = −(1−r) q_x`.
pub fn quadrupole_from_eta(eta: f64, x0: f64, anisotropy: f64) -> Result<QuadrupoleMoments> {
    check_eta_x0(eta, x0)?;
    if !(0.0..=1.0).contains(&anisotropy) {
        return Err(Error::Domain(format!("anisotropy r = {anisotropy} outside [0, 1]")));
    }
    let q_x = eta / (x0 * x0);
    let q_y = -anisotropy * q_x;
    Ok(QuadrupoleMoments { q_x, q_y, q_z: -q_x - q_y })
}

fn radicand(u0: f64, v0: f64, omega_rf: f64, q: f64, mass: f64) -> f64 {
    let dc = ELEMENTARY_CHARGE * u0 * q / mass;
    let rf = ELEMENTARY_CHARGE * v0 * q / (mass * omega_rf);
    dc + 0.5 * rf * rf
}

fn check_drive(omega_rf: f64, mass: f64) -> Result<()> {
    if !(omega_rf > 0.0 && mass > 0.0) {
        return Err(Error::Domain(format!("omega_rf = {omega_rf} and mass = {mass} must be positive")));
    }
    Ok(())
}

/// `ω_i = √(e U0 Q_i/m + ½ (e V0 Q_i/(m Ω))²)`, rad/s.
pub fn secular_frequency(u0: f64, v0: f64, omega_rf: f64, q_i: f64, mass: f64) -> Result<f64> {
    check_drive(omega_rf, mass)?;
    let r = radicand(u0, v0, omega_rf, q_i, mass);
    if r < 0.0 {
        return Err(Error::Unstable { radicand: r });
    }
    Ok(r.sqrt())
}

/// DC bias at which the secular radicand on an axis with strength `q_i`
/// crosses zero: `U0 = −e V0² Q_i / (2 m Ω²)`.
pub fn instability_threshold(v0: f64, omega_rf: f64, q_i: f64, mass: f64) -> Result<f64> {
    check_drive(omega_rf, mass)?;
    Ok(-ELEMENTARY_CHARGE * v0 * v0 * q_i / (2.0 * mass * omega_rf * omega_rf))
}

/// Electrical parameters of one trap configuration.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrapGeometry {
    pub x0: f64,
    pub eta: f64,
    pub omega_rf: f64,
    pub v0: f64,
    pub u0: f64,
    pub mass: f64,
}

impl TrapGeometry {
    pub fn new(x0: f64, eta: f64, omega_rf: f64, v0: f64, u0: f64, mass: f64) -> Result<Self> {
        check_eta_x0(eta, x0)?;
        check_drive(omega_rf, mass)?;
        Ok(Self { x0, eta, omega_rf, v0, u0, mass })
    }

    pub fn quadrupole(&self, anisotropy: f64) -> Result<QuadrupoleMoments> {
        quadrupole_from_eta(self.eta, self.x0, anisotropy)
    }

    pub fn secular(&self, axis: Axis, anisotropy: f64) -> Result<f64> {
        let q = self.quadrupole(anisotropy)?.along(axis);
        secular_frequency(self.u0, self.v0, self.omega_rf, q, self.mass)
    }
}

/// One measured secular frequency.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SecularMeasurement {
    pub u0: f64,
    /// Electrode separation `2 x0`, m.
    pub separation: f64,
    pub axis: Axis,
    /// rad/s
    pub omega: f64,
}

/// Drive parameters shared by all measurements.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrapDrive {
    pub v0: f64,
    pub omega_rf: f64,
    pub mass: f64,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SeparationFit {
    pub separation: f64,
    pub eta: f64,
    pub sse: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaFit {
    /// One entry per distinct separation, ascending.
    pub separations: Vec<SeparationFit>,
    /// Transverse split, shared by all separations. `None` when only `x`
    /// was measured, which leaves it unconstrained.
    pub anisotropy: Option<f64>,
    pub sse: f64,
}

const ETA_LO: f64 = 1e-4;
const ETA_GRID: usize = 200;
const R_GRID: usize = 41;

/// Model frequency; an anti-trapping configuration predicts 0.
fn model_omega(m: &SecularMeasurement, eta: f64, r: f64, drive: &TrapDrive) -> f64 {
    let x0 = 0.5 * m.separation;
    let q_x = eta / (x0 * x0);
    let q_y = -r * q_x;
    let q = match m.axis {
        Axis::X => q_x,
        Axis::Y => q_y,
        Axis::Z => -q_x - q_y,
    };
    radicand(m.u0, drive.v0, drive.omega_rf, q, drive.mass).max(0.0).sqrt()
}

fn group_sse(group: &[SecularMeasurement], eta: f64, r: f64, drive: &TrapDrive) -> f64 {
    group.iter().map(|m| (model_omega(m, eta, r, drive) - m.omega).powi(2)).sum()
}

/// Grid over `[lo, hi]` followed by golden section in the bracket around the
/// best grid point.
fn minimize_1d<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, tol: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let (ibest, _) = xs
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    let a = xs[ibest.saturating_sub(1)];
    let b = xs[(ibest + 1).min(n - 1)];
    golden_section(f, a, b, tol)
}

fn fit_groups(groups: &[Vec<SecularMeasurement>], r: f64, drive: &TrapDrive) -> Vec<(f64, f64)> {
    groups
        .iter()
        .map(|g| minimize_1d(|eta| group_sse(g, eta, r, drive), ETA_LO, 1.0, ETA_GRID, 1e-13))
        .collect()
}

/// Least-squares estimate of η for every electrode separation, with a
/// transverse split `r` shared by all separations. Every point has unit
/// weight. The result does not depend on the order of `data`.
pub fn fit_eta(data: &[SecularMeasurement], drive: &TrapDrive) -> Result<EtaFit> {
    check_drive(drive.omega_rf, drive.mass)?;
    if data.is_empty() {
        return Err(Error::Underdetermined("no secular-frequency measurements".into()));
    }
    for m in data {
        if !(m.separation > 0.0 && m.separation.is_finite()) || !(m.omega >= 0.0) || !m.u0.is_finite() {
            return Err(Error::Domain(format!("invalid measurement {m:?}")));
        }
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| {
        a.separation
            .total_cmp(&b.separation)
            .then(a.axis.cmp(&b.axis))
            .then(a.u0.total_cmp(&b.u0))
            .then(a.omega.total_cmp(&b.omega))
    });
    let mut groups: Vec<Vec<SecularMeasurement>> = Vec::new();
    for m in sorted {
        match groups.last_mut() {
            Some(g) if g[0].separation == m.separation => g.push(m),
            _ => groups.push(vec![m]),
        }
    }
    for g in &groups {
        let single_axis = g.iter().all(|m| m.axis == g[0].axis);
        let single_bias = g.iter().all(|m| m.u0 == g[0].u0);
        if g.len() < 2 || (single_axis && single_bias) {
            return Err(Error::Underdetermined(format!(
                "separation {:.3e} m: {} point(s), need at least 2 spanning two bias voltages or two axes",
                g[0].separation,
                g.len()
            )));
        }
    }

    let total = |r: f64| fit_groups(&groups, r, drive).iter().map(|(_, s)| s).sum::<f64>();
    let r_free = groups.iter().flatten().any(|m| m.axis != Axis::X);
    let (anisotropy, r_eval) = if r_free {
        let (r, _) = minimize_1d(total, 0.0, 1.0, R_GRID, 1e-12);
        (Some(r), r)
    } else {
        (None, 0.5)
    };
    let fits = fit_groups(&groups, r_eval, drive);
    let separations: Vec<SeparationFit> = groups
        .iter()
        .zip(&fits)
        .map(|(g, &(eta, sse))| SeparationFit { separation: g[0].separation, eta, sse, points: g.len() })
        .collect();
    let sse = separations.iter().map(|s| s.sse).sum();
    Ok(EtaFit { separations, anisotropy, sse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn traceless_exactly() {
        for (eta, x0, r) in [(0.45, 90e-6, 0.5), (0.3, 65e-6, 0.123), (1.0, 1e-3, 0.999), (0.01, 7e-5, 0.0)] {
            let q = quadrupole_from_eta(eta, x0, r).unwrap();
            assert_eq!(q.q_x() + q.q_y() + q.q_z(), 0.0);
        }
        let q = quadrupole_from_eta(0.45, 90e-6, 0.5).unwrap();
        assert_eq!(q.q_y(), q.q_z());
        assert!(quadrupole_from_eta(0.45, 90e-6, 1.5).is_err());
        assert!(quadrupole_from_eta(0.0, 90e-6, 0.5).is_err());
        assert!(quadrupole_from_eta(1.2, 90e-6, 0.5).is_err());
    }

    #[test]
    fn rf_only_limit() {
        let (v0, w, q, m) = (300.0, 2.0 * PI * 21.6e6, 5e7, YB174_ION_MASS);
        let omega = secular_frequency(0.0, v0, w, q, m).unwrap();
        assert_relative_eq!(omega, ELEMENTARY_CHARGE * v0 * q / (2f64.sqrt() * m * w), max_relative = 1e-14);
        assert_relative_eq!(secular_frequency(0.0, 2.0 * v0, w, q, m).unwrap(), 2.0 * omega, max_relative = 1e-14);
        assert_relative_eq!(secular_frequency(0.0, v0, 2.0 * w, q, m).unwrap(), omega / 2.0, max_relative = 1e-14);
        assert_eq!(secular_frequency(0.0, v0, w, 0.0, m).unwrap(), 0.0);
    }

    #[test]
    fn instability_at_threshold() {
        let (v0, w, m) = (300.0, 2.0 * PI * 21.6e6, YB174_ION_MASS);
        let q = -2.5e7;
        let u = instability_threshold(v0, w, q, m).unwrap();
        assert!(u > 0.0);
        assert!(secular_frequency(u * 0.999, v0, w, q, m).is_ok());
        match secular_frequency(u * 1.001, v0, w, q, m) {
            Err(Error::Unstable { radicand }) => assert!(radicand < 0.0),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn dc_terms_cancel() {
        let q = quadrupole_from_eta(0.45, 90e-6, 0.3).unwrap();
        let m = YB174_ION_MASS;
        let sum: f64 = [Axis::X, Axis::Y, Axis::Z].iter().map(|&a| ELEMENTARY_CHARGE * 5.0 * q.along(a) / m).sum();
        assert!(sum.abs() < 1e-12 * ELEMENTARY_CHARGE * 5.0 * q.q_x() / m);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("X".parse::<Axis>().unwrap(), Axis::X);
        assert_eq!(" z ".parse::<Axis>().unwrap(), Axis::Z);
        assert!("w".parse::<Axis>().is_err());
    }

    fn drive() -> TrapDrive {
        TrapDrive { v0: 300.0, omega_rf: 2.0 * PI * 21.6e6, mass: YB174_ION_MASS }
    }

    fn synth(eta: f64, r: f64, seps: &[f64]) -> Vec<SecularMeasurement> {
        let d = drive();
        let mut out = Vec::new();
        for &s in seps {
            for u0 in [-2.0, 0.0, 2.0, 4.0] {
                for axis in [Axis::X, Axis::Y] {
                    let g = TrapGeometry::new(s / 2.0, eta, d.omega_rf, d.v0, u0, d.mass).unwrap();
                    out.push(SecularMeasurement { u0, separation: s, axis, omega: g.secular(axis, r).unwrap() });
                }
            }
        }
        out
    }

    #[test]
    fn exact_round_trip() {
        let data = synth(0.45, 0.5, &[150e-6, 180e-6]);
        let fit = fit_eta(&data, &drive()).unwrap();
        assert_relative_eq!(fit.anisotropy.unwrap(), 0.5, max_relative = 1e-6);
        for s in &fit.separations {
            assert_relative_eq!(s.eta, 0.45, max_relative = 1e-6);
        }
        let mut shuffled = data.clone();
        shuffled.reverse();
        shuffled.swap(0, 5);
        assert_eq!(fit_eta(&shuffled, &drive()).unwrap(), fit);
    }

    #[test]
    fn degenerate_designs() {
        let d = drive();
        let one = |u0: f64, axis: Axis| SecularMeasurement { u0, separation: 1.8e-4, axis, omega: 2e7 };
        assert!(matches!(fit_eta(&[one(1.0, Axis::X), one(1.0, Axis::X)], &d), Err(Error::Underdetermined(_))));
        assert!(matches!(fit_eta(&[one(1.0, Axis::X)], &d), Err(Error::Underdetermined(_))));
        assert!(matches!(fit_eta(&[], &d), Err(Error::Underdetermined(_))));
        let x_only: Vec<_> = synth(0.4, 0.5, &[1.8e-4]).into_iter().filter(|m| m.axis == Axis::X).collect();
        let fit = fit_eta(&x_only, &d).unwrap();
        assert_eq!(fit.anisotropy, None);
        assert_relative_eq!(fit.separations[0].eta, 0.4, max_relative = 1e-6);
    }
}
