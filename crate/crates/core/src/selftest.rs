//! Quick oracle and invariant checks, runnable from the command line.

use std::f64::consts::PI;

use crate::cavity_model::CavityParams;
use crate::error::Result;
use crate::ion_model::{cg_coeff, excited_projector, lowering_operators, DriveGeometry, ZeemanParams};
use crate::lineshape::bloch_two_level;
use crate::photometrics::{cavity_metrics, efficiency_chain, saturation_intensity, CavityInputs, SPEED_OF_LIGHT};
use crate::qspace::{Operator, C64};
use crate::resonator::{length_diff_from_offset, MirrorGeometry};
use crate::steadystate::{build_hamiltonian, solve, solve_two_level, system_liouvillian, SystemParams};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `⟨j1 m1; j2 m2 | J M⟩` from Racah's closed form. All arguments are
/// doubled so half-integers stay integral.
pub fn racah_cg(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let pre = ((tj + 1) as f64 * factorial(h(tj + tj1 - tj2)) * factorial(h(tj - tj1 + tj2))
        * factorial(h(tj1 + tj2 - tj))
        / factorial(h(tj1 + tj2 + tj) + 1))
        .sqrt();
    let norm = (factorial(h(tj + tm))
        * factorial(h(tj - tm))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj1 + tm1))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj2 + tm2)))
    .sqrt();
    let mut sum = 0.0;
    for k in 0..=h(tj1 + tj2 - tj) {
        let args = [
            h(tj1 + tj2 - tj) - k,
            h(tj1 - tm1) - k,
            h(tj2 + tm2) - k,
            h(tj - tj2 + tm1) + k,
            h(tj - tj1 - tm2) + k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let den: f64 = factorial(k) * args.iter().map(|&a| factorial(a)).product::<f64>();
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / den;
    }
    pre * norm * sum
}

fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

fn default_params(i_rel: f64) -> Result<SystemParams> {
    Ok(SystemParams {
        gamma: mhz(19.6),
        delta_0: mhz(10.0),
        zeeman: ZeemanParams::from_ground(mhz(1.0))?,
        cavity: CavityParams::new(mhz(3.92) / 2f64.sqrt(), mhz(23.7), mhz(5.0), 2)?,
        i_rel,
        geometry: DriveGeometry::from_degrees(45.0, 35.0)?,
    })
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn run_fallible(name: &'static str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| check(name, false, format!("error: {e}")))
}

/// Run every check. Takes well under a second.
pub fn run() -> Vec<Check> {
    let mut out = Vec::new();

    out.push(run_fallible("clebsch-gordan vs Racah formula", || {
        let mut worst: f64 = 0.0;
        for tms in [-1, 1] {
            for q in [-1, 0, 1] {
                for tmp in [-1, 1] {
                    let ours = cg_coeff(tms, q, tmp)?;
                    let oracle = racah_cg(2, 2 * q as i64, 1, tms as i64, 1, tmp as i64);
                    worst = worst.max((ours - oracle).abs());
                }
            }
        }
        Ok(check("clebsch-gordan vs Racah formula", worst < 1e-12, format!("max deviation {worst:.2e}")))
    }));

    out.push(run_fallible("clebsch-gordan sum rule", || {
        let mut worst: f64 = 0.0;
        for tmp in [-1, 1] {
            let mut s = 0.0;
            for tms in [-1, 1] {
                for q in [-1, 0, 1] {
                    s += cg_coeff(tms, q, tmp)?.powi(2);
                }
            }
            worst = worst.max((s - 1.0).abs());
        }
        Ok(check("clebsch-gordan sum rule", worst < 1e-12, format!("max |sum - 1| {worst:.2e}")))
    }));

    out.push(run_fallible("selection rule", || {
        let mut violations = 0;
        for tms in [-1, 1] {
            for q in [-1, 0, 1] {
                for tmp in [-1, 1] {
                    if tms + 2 * q != tmp && cg_coeff(tms, q, tmp)? != 0.0 {
                        violations += 1;
                    }
                }
            }
        }
        Ok(check("selection rule", violations == 0, format!("{violations} nonzero forbidden coefficients")))
    }));

    out.push(run_fallible("decay sum rule", || {
        let a = lowering_operators();
        let mut sum = Operator::zeros(a[0].layout());
        for op in &a {
            sum = &sum + &(&op.adjoint() * op);
        }
        let err = (&sum - &excited_projector()).max_abs();
        Ok(check("decay sum rule", err < 1e-12, format!("max deviation {err:.2e}")))
    }));

    out.push(run_fallible("two-level Bloch oracle", || {
        let gamma = 1.0;
        let mut worst: f64 = 0.0;
        for omega in [0.1, 0.7, 2.0, 9.0] {
            for delta in [-3.0, -0.4, 0.0, 1.1] {
                let pe = solve_two_level(omega, delta, gamma)?;
                worst = worst.max((pe - bloch_two_level(omega, delta, gamma)?).abs());
            }
        }
        Ok(check("two-level Bloch oracle", worst < 1e-8, format!("max deviation {worst:.2e}")))
    }));

    out.push(run_fallible("hamiltonian hermiticity", || {
        let h = build_hamiltonian(&default_params(600.0)?)?;
        let err = h.hermiticity_error() / h.max_abs().max(1.0);
        Ok(check("hamiltonian hermiticity", err < 1e-12, format!("relative error {err:.2e}")))
    }));

    out.push(run_fallible("trace preservation", || {
        let l = system_liouvillian(&default_params(600.0)?)?;
        let d = l.hilbert_dim();
        let mut worst: f64 = 0.0;
        for c in 0..l.dim() {
            let s: f64 = l.column(c).filter(|(r, _)| r % (d + 1) == 0).map(|(_, v)| v).sum::<C64>().norm();
            worst = worst.max(s);
        }
        let rel = worst / l.max_abs();
        Ok(check("trace preservation", rel < 1e-10, format!("max |tr(L x)| / |L| {rel:.2e}")))
    }));

    out.push(run_fallible("steady-state invariants", || {
        let r = solve(&default_params(600.0)?)?;
        let tr = (r.rho.trace().re - 1.0).abs();
        let herm = r.rho.hermiticity_error();
        let ok = tr < 1e-9 && herm < 1e-10 && r.min_eigenvalue >= -1e-10 && r.residual < 1e-8;
        Ok(check(
            "steady-state invariants",
            ok,
            format!(
                "trace err {tr:.1e}, herm {herm:.1e}, min eig {:.1e}, residual {:.1e}",
                r.min_eigenvalue, r.residual
            ),
        ))
    }));

    out.push(run_fallible("finesse", || {
        let a = cavity_metrics(&CavityInputs { fsr: Some(70.5e9), fwhm: 18.6e6, ..Default::default() })?;
        let b = cavity_metrics(&CavityInputs { fsr: Some(70.5e9), fwhm: 47.4e6, ..Default::default() })?;
        let ok = (a.finesse / 3790.0 - 1.0).abs() < 0.01 && (b.finesse / 1490.0 - 1.0).abs() < 0.01;
        Ok(check("finesse", ok, format!("{:.0} and {:.0}", a.finesse, b.finesse)))
    }));

    out.push(run_fallible("efficiency ladder", || {
        let c = efficiency_chain(
            8000.0,
            &[("Before PMT", 0.19), ("Before Prism", 0.235), ("Before vacuum window", 0.9), ("Outcoupling", 0.24)],
        )?;
        let expected = [42_000.0, 180_000.0, 200_000.0, 800_000.0];
        let ok = c.stages.iter().zip(expected).all(|(s, e)| (s.rate / e - 1.0).abs() <= 0.05);
        Ok(check("efficiency ladder", ok, format!("top rate {:.0} /s", c.source_rate())))
    }));

    out.push(run_fallible("saturation intensity", || {
        let i = saturation_intensity(369.5e-9, mhz(19.6))? * 0.1; // mW/cm²
        Ok(check("saturation intensity", (i / 50.7 - 1.0).abs() < 0.01, format!("{i:.2} mW/cm^2")))
    }));

    out.push(run_fallible("dual-band length difference", || {
        let g = MirrorGeometry::symmetric(2.126e-3, 25e-3, SPEED_OF_LIGHT / 739e-9)?;
        let dl = length_diff_from_offset(2.3e9, &g)?;
        Ok(check(
            "dual-band length difference",
            (dl.abs() / 12e-9 - 1.0).abs() <= 0.1,
            format!("{:.2} nm", dl * 1e9),
        ))
    }));

    out
}
