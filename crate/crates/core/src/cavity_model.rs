//! Two degenerate polarization modes of the cavity and their coupling to the
//! atom.
//!
//! The V mode is polarized along the field axis `z` and couples π
//! transitions; the H mode is polarized along `y` and couples the σ± pair
//! with equal weight. Both are transverse to the cavity axis `x`.

use crate::error::{Error, Result};
use crate::ion_model::{excited_projector, lowering_along, lowering_operators, PolVector};
use crate::qspace::{
    annihilation, embed, number, Operator, SpaceLayout, C64, ATOM_SLOT, MODE_H_SLOT, MODE_V_SLOT,
};

/// Largest supported photon-number cutoff per mode.
pub const MAX_FOCK_CUTOFF: usize = 3;

/// Cavity parameters, angular frequencies in rad/s.
///
/// `g` is the coupling that enters the Jaynes–Cummings term; callers that
/// model standing-wave averaging pass the reduced effective coupling here.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CavityParams {
    pub g: f64,
    pub kappa: f64,
    pub delta_c: f64,
    pub n_max: usize,
}

impl CavityParams {
    pub fn new(g: f64, kappa: f64, delta_c: f64, n_max: usize) -> Result<Self> {
        let p = Self { g, kappa, delta_c, n_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.kappa >= 0.0) {
            return Err(Error::Domain(format!(
                "cavity rates must be non-negative: g = {}, kappa = {}",
                self.g, self.kappa
            )));
        }
        if !self.delta_c.is_finite() {
            return Err(Error::Domain(format!("delta_c = {} is not finite", self.delta_c)));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidTruncation(self.n_max));
        }
        if self.n_max > MAX_FOCK_CUTOFF {
            return Err(Error::Domain(format!(
                "Fock cutoff {} outside supported range 1..={MAX_FOCK_CUTOFF}",
                self.n_max
            )));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<SpaceLayout> {
        SpaceLayout::atom_cavity(self.n_max)
    }

    pub fn with_delta_c(&self, delta_c: f64) -> Self {
        Self { delta_c, ..*self }
    }
}

/// Polarization vectors `(e_H, e_V)` of the two cavity modes.
pub fn mode_basis() -> (PolVector, PolVector) {
    (PolVector::y_hat(), PolVector::z_hat())
}

fn check_layout(p: &CavityParams, layout: &SpaceLayout) -> Result<()> {
    let expected = p.layout()?;
    if *layout != expected {
        return Err(Error::Layout(format!(
            "expected layout {:?} for n_max = {}, got {:?}",
            expected.dims(),
            p.n_max,
            layout.dims()
        )));
    }
    Ok(())
}

/// Mode operators embedded on the full atom–cavity space.
#[derive(Clone, Debug)]
pub struct ModeOperators {
    pub a_h: Operator,
    pub a_v: Operator,
    pub n_h: Operator,
    pub n_v: Operator,
}

impl ModeOperators {
    pub fn new(layout: &SpaceLayout) -> Result<Self> {
        let n_max = layout
            .dims()
            .get(MODE_H_SLOT)
            .map(|d| d.saturating_sub(1))
            .ok_or_else(|| Error::Layout("layout has no cavity modes".into()))?;
        let a = annihilation(n_max)?;
        let n = number(n_max)?;
        Ok(Self {
            a_h: embed(&a, MODE_H_SLOT, layout)?,
            a_v: embed(&a, MODE_V_SLOT, layout)?,
            n_h: embed(&n, MODE_H_SLOT, layout)?,
            n_v: embed(&n, MODE_V_SLOT, layout)?,
        })
    }
}

/// `δ_c (a_H† a_H + a_V† a_V)`.
pub fn build_h_cav(p: &CavityParams, layout: &SpaceLayout) -> Result<Operator> {
    check_layout(p, layout)?;
    let modes = ModeOperators::new(layout)?;
    Ok((&modes.n_h + &modes.n_v).scale(p.delta_c))
}

/// `i g Σ_p [a_p† (Â·e_p*) − (Â·e_p*)† a_p]`.
pub fn build_h_jc(p: &CavityParams, layout: &SpaceLayout) -> Result<Operator> {
    check_layout(p, layout)?;
    let modes = ModeOperators::new(layout)?;
    let (e_h, e_v) = mode_basis();
    let mut h = Operator::zeros(layout);
    for (a, e) in [(&modes.a_h, e_h), (&modes.a_v, e_v)] {
        let lower = embed(&lowering_along(&e.conj()), ATOM_SLOT, layout)?;
        let emit = &a.adjoint() * &lower;
        let absorb = &lower.adjoint() * a;
        h = &h + &(&emit - &absorb);
    }
    Ok(h.scale_complex(C64::new(0.0, p.g)))
}

/// A jump operator already multiplied by the square root of its rate.
#[derive(Clone, Debug)]
pub struct Collapse {
    pub label: &'static str,
    pub rate: f64,
    pub op: Operator,
}

/// Atomic decay `√γ A_q` for each q, then cavity loss `√(2κ) a_p`.
pub fn collapse_operators(gamma: f64, p: &CavityParams, layout: &SpaceLayout) -> Result<Vec<Collapse>> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma = {gamma} must be >= 0")));
    }
    p.validate()?;
    check_layout(p, layout)?;
    let labels = ["atom q=-1", "atom q=0", "atom q=+1"];
    let mut out = Vec::with_capacity(5);
    for (a, label) in lowering_operators().iter().zip(labels) {
        out.push(Collapse { label, rate: gamma, op: embed(a, ATOM_SLOT, layout)?.scale(gamma.sqrt()) });
    }
    let modes = ModeOperators::new(layout)?;
    let k = (2.0 * p.kappa).sqrt();
    out.push(Collapse { label: "cavity H", rate: 2.0 * p.kappa, op: modes.a_h.scale(k) });
    out.push(Collapse { label: "cavity V", rate: 2.0 * p.kappa, op: modes.a_v.scale(k) });
    Ok(out)
}

/// Atomic excitation plus total photon number; conserved by the
/// Jaynes–Cummings coupling.
pub fn excitation_number(layout: &SpaceLayout) -> Result<Operator> {
    let modes = ModeOperators::new(layout)?;
    let pe = embed(&excited_projector(), ATOM_SLOT, layout)?;
    Ok(&(&pe + &modes.n_h) + &modes.n_v)
}
