//! Four-level S1/2 ↔ P1/2 Zeeman structure of a spin-zero-nucleus ion.
//!
//! Basis order (fixed everywhere): `|S,-1/2>, |S,+1/2>, |P,-1/2>, |P,+1/2>`.
//!
//! Lab frame: `z` along the magnetic field (quantization axis), `x` along the
//! cavity axis, `y` completing a right-handed frame.
//!
//! Spherical components follow `v_q = e_q^* · v` with
//! `e_{+1} = -(x + iy)/√2`, `e_0 = z`, `e_{-1} = (x - iy)/√2`, so that
//! `v = Σ_q v_q e_q`. The lowering operator `A_q` takes `|P, m+q>` to
//! `|S, m>`; its adjoint absorbs a photon carrying the `q` component of the
//! field polarization.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::qspace::{CMatrix, Operator, C64, ATOM_DIM};

/// Ratio of the P1/2 to S1/2 Zeeman shifts (Landé factors 2/3 and 2).
pub const ZEEMAN_RATIO_P_OVER_S: f64 = 1.0 / 3.0;

/// Tolerance on polarization-vector normalization.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Magnetic sublevel of a J = 1/2 manifold.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sublevel {
    Minus,
    Plus,
}

impl Sublevel {
    pub const ALL: [Sublevel; 2] = [Sublevel::Minus, Sublevel::Plus];

    pub fn twice_m(self) -> i32 {
        match self {
            Sublevel::Minus => -1,
            Sublevel::Plus => 1,
        }
    }

    pub fn m(self) -> f64 {
        0.5 * self.twice_m() as f64
    }
}

/// The four atomic basis states.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum AtomLevel {
    SMinus,
    SPlus,
    PMinus,
    PPlus,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 4] =
        [AtomLevel::SMinus, AtomLevel::SPlus, AtomLevel::PMinus, AtomLevel::PPlus];

    pub fn index(self) -> usize {
        match self {
            AtomLevel::SMinus => 0,
            AtomLevel::SPlus => 1,
            AtomLevel::PMinus => 2,
            AtomLevel::PPlus => 3,
        }
    }

    pub fn ground(m: Sublevel) -> Self {
        match m {
            Sublevel::Minus => AtomLevel::SMinus,
            Sublevel::Plus => AtomLevel::SPlus,
        }
    }

    pub fn excited(m: Sublevel) -> Self {
        match m {
            Sublevel::Minus => AtomLevel::PMinus,
            Sublevel::Plus => AtomLevel::PPlus,
        }
    }

    pub fn is_excited(self) -> bool {
        matches!(self, AtomLevel::PMinus | AtomLevel::PPlus)
    }
}

/// Zeeman half-splittings in rad/s.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ZeemanParams {
    pub delta_s: f64,
    pub delta_p: f64,
}

impl ZeemanParams {
    pub fn new(delta_s: f64, delta_p: f64) -> Result<Self> {
        if !(delta_s >= 0.0 && delta_p >= 0.0) {
            return Err(Error::Domain(format!(
                "Zeeman shifts must be non-negative, got ({delta_s}, {delta_p})"
            )));
        }
        Ok(Self { delta_s, delta_p })
    }

    /// Excited-state shift derived from the ground shift by the Landé ratio.
    pub fn from_ground(delta_s: f64) -> Result<Self> {
        Self::new(delta_s, delta_s * ZEEMAN_RATIO_P_OVER_S)
    }

    pub fn zero() -> Self {
        Self { delta_s: 0.0, delta_p: 0.0 }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { delta_s: self.delta_s * factor, delta_p: self.delta_p * factor }
    }
}

/// Pump beam direction and linear polarization angle.
///
/// The propagation direction lies in the x–z plane at `theta_k` from the
/// field axis z. The polarization is rotated by `psi_pol` inside the
/// transverse plane, starting from the normalized projection of the cavity
/// axis x onto that plane (or from y when the beam runs along the cavity
/// axis and the projection vanishes).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DriveGeometry {
    theta_k: f64,
    psi_pol: f64,
}

impl DriveGeometry {
    pub fn new(theta_k: f64, psi_pol: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta_k) {
            return Err(Error::Domain(format!("theta_k = {theta_k} rad outside [0, π]")));
        }
        if !(0.0..PI).contains(&psi_pol) {
            return Err(Error::Domain(format!("psi_pol = {psi_pol} rad outside [0, π)")));
        }
        Ok(Self { theta_k, psi_pol })
    }

    pub fn from_degrees(theta_k_deg: f64, psi_pol_deg: f64) -> Result<Self> {
        Self::new(theta_k_deg.to_radians(), psi_pol_deg.to_radians())
    }

    pub fn theta_k(&self) -> f64 {
        self.theta_k
    }

    pub fn psi_pol(&self) -> f64 {
        self.psi_pol
    }

    /// Unit propagation vector.
    pub fn k_hat(&self) -> [f64; 3] {
        [self.theta_k.sin(), 0.0, self.theta_k.cos()]
    }
}

/// Complex polarization vector in the lab Cartesian frame `(x, y, z)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PolVector([C64; 3]);

impl PolVector {
    /// Checked constructor; the vector must be unit norm.
    pub fn new(components: [C64; 3]) -> Result<Self> {
        let v = PolVector(components);
        if (v.norm_sqr() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::Domain(format!(
                "polarization vector has squared norm {}, expected 1",
                v.norm_sqr()
            )));
        }
        Ok(v)
    }

    /// Normalizing constructor for real vectors.
    pub fn from_real(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(PolVector([
            C64::new(v[0] / n, 0.0),
            C64::new(v[1] / n, 0.0),
            C64::new(v[2] / n, 0.0),
        ]))
    }

    pub fn x_hat() -> Self {
        PolVector([C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn y_hat() -> Self {
        PolVector([C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn z_hat() -> Self {
        PolVector([C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
    }

    /// `(x + iy)/√2`, which drives Δm = +1 transitions.
    pub fn sigma_plus() -> Self {
        PolVector([
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, FRAC_1_SQRT_2),
            C64::new(0.0, 0.0),
        ])
    }

    pub fn components(&self) -> [C64; 3] {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn conj(&self) -> Self {
        PolVector(self.0.map(|z| z.conj()))
    }

    pub fn scale_phase(&self, phase: f64) -> Self {
        let f = C64::from_polar(1.0, phase);
        PolVector(self.0.map(|z| z * f))
    }

    /// Bilinear dot product (no conjugation).
    pub fn dot(&self, other: &PolVector) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// Hermitian inner product `<self|other>`.
    pub fn inner(&self, other: &PolVector) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn dot_real(&self, v: [f64; 3]) -> C64 {
        self.0.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
    }
}

fn q_index(q: i32) -> Result<usize> {
    match q {
        -1 => Ok(0),
        0 => Ok(1),
        1 => Ok(2),
        _ => Err(Error::Domain(format!("spherical index q = {q} not in {{-1, 0, +1}}"))),
    }
}

/// Clebsch–Gordan coefficient `<1, q; 1/2, m_s | 1/2, m_p>` in the
/// Condon–Shortley convention (photon angular momentum coupled first).
///
/// Uses the closed form for coupling `j1 = 1` with `j2 = 1/2` into
/// `J = j1 - 1/2`.
pub fn cg_coeff_checked(m_s: Sublevel, q: i32, m_p: Sublevel) -> Result<f64> {
    q_index(q)?;
    // m_p = m_s + q, in half-integer units
    if m_p.twice_m() != m_s.twice_m() + 2 * q {
        return Ok(0.0);
    }
    let j1 = 1.0;
    let big_m = m_p.m();
    let c = match m_s {
        Sublevel::Minus => ((j1 + big_m + 0.5) / (2.0 * j1 + 1.0)).sqrt(),
        Sublevel::Plus => -((j1 - big_m + 0.5) / (2.0 * j1 + 1.0)).sqrt(),
    };
    Ok(c)
}

/// Convenience wrapper taking twice the magnetic quantum numbers.
pub fn cg_coeff(two_m_s: i32, q: i32, two_m_p: i32) -> Result<f64> {
    let level = |two_m: i32| match two_m {
        -1 => Ok(Sublevel::Minus),
        1 => Ok(Sublevel::Plus),
        _ => Err(Error::Domain(format!("2m = {two_m} is not ±1 for a J = 1/2 level"))),
    };
    cg_coeff_checked(level(two_m_s)?, q, level(two_m_p)?)
}

/// Lowering operators `[A_{-1}, A_0, A_{+1}]` on the atomic subsystem.
pub fn lowering_operators() -> [Operator; 3] {
    [-1, 0, 1].map(|q| {
        let mut m = CMatrix::zeros(ATOM_DIM, ATOM_DIM);
        for ms in Sublevel::ALL {
            for mp in Sublevel::ALL {
                let c = cg_coeff_checked(ms, q, mp).expect("q is in range");
                if c != 0.0 {
                    m[(AtomLevel::ground(ms).index(), AtomLevel::excited(mp).index())] =
                        C64::new(c, 0.0);
                }
            }
        }
        Operator::from_matrix(m).expect("4x4 is a valid layout")
    })
}

/// Spherical components `(v_{-1}, v_0, v_{+1})`.
pub fn spherical_components(v: &PolVector) -> [C64; 3] {
    let [x, y, z] = v.components();
    let i = C64::new(0.0, 1.0);
    let vm = (x + i * y) * FRAC_1_SQRT_2;
    let vp = -(x - i * y) * FRAC_1_SQRT_2;
    [vm, z, vp]
}

/// `Â·ε ≡ Σ_q A_q ε_q^*`, the atomic lowering operator projected on `ε`.
pub fn lowering_along(eps: &PolVector) -> Operator {
    let comps = spherical_components(eps);
    let ops = lowering_operators();
    let mut m = CMatrix::zeros(ATOM_DIM, ATOM_DIM);
    for (op, c) in ops.iter().zip(comps.iter()) {
        m += op.matrix() * c.conj();
    }
    Operator::from_matrix(m).expect("4x4 is a valid layout")
}

/// Linear pump polarization for the given beam geometry.
pub fn drive_polarization(geom: &DriveGeometry) -> PolVector {
    let k = geom.k_hat();
    // projection of the cavity axis x onto the plane transverse to k
    let proj = [1.0 - k[0] * k[0], -k[0] * k[1], -k[0] * k[2]];
    let proj_norm = (proj[0] * proj[0] + proj[1] * proj[1] + proj[2] * proj[2]).sqrt();
    let reference = if proj_norm < 1e-12 {
        [0.0, 1.0, 0.0]
    } else {
        proj.map(|c| c / proj_norm)
    };
    let second = cross(k, reference);
    let (s, c) = geom.psi_pol().sin_cos();
    let e = [0, 1, 2].map(|i| c * reference[i] + s * second[i]);
    PolVector::from_real(e).expect("rotation of a unit vector is unit")
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Atomic Hamiltonian in the frame rotating at the laser frequency
/// (ħ = 1, rad/s).
pub fn build_h_atom(delta_0: f64, z: &ZeemanParams) -> Operator {
    let diag = [-z.delta_s, z.delta_s, delta_0 - z.delta_p, delta_0 + z.delta_p];
    let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        ATOM_DIM,
        diag.iter().map(|&d| C64::new(d, 0.0)),
    ));
    Operator::from_matrix(m).expect("4x4 is a valid layout")
}

/// Classical drive coupling `-(Ω/2)[Â·ε + (Â·ε)^†]`.
pub fn build_h_drive(omega_rabi: f64, eps: &PolVector) -> Operator {
    let lower = lowering_along(eps);
    (&lower + &lower.adjoint()).scale(-0.5 * omega_rabi)
}

/// Rabi frequency `γ √(I / 2 I_sat)`.
pub fn rabi_from_intensity(i_rel: f64, gamma: f64) -> Result<f64> {
    if !(i_rel >= 0.0) {
        return Err(Error::Domain(format!("relative intensity {i_rel} must be >= 0")));
    }
    Ok(gamma * (i_rel / 2.0).sqrt())
}

/// Projector onto the excited manifold.
pub fn excited_projector() -> Operator {
    let mut m = CMatrix::zeros(ATOM_DIM, ATOM_DIM);
    m[(AtomLevel::PMinus.index(), AtomLevel::PMinus.index())] = C64::new(1.0, 0.0);
    m[(AtomLevel::PPlus.index(), AtomLevel::PPlus.index())] = C64::new(1.0, 0.0);
    Operator::from_matrix(m).expect("4x4 is a valid layout")
}
