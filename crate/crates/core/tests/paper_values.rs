mod common;

use approx::assert_relative_eq;
use common::{mhz, paper_point};
use ioncav::ion_model::{build_h_atom, drive_polarization, rabi_from_intensity, DriveGeometry, ZeemanParams};
use ioncav::photometrics::*;
use ioncav::resonator::*;
use ioncav::steadystate::solve;
use ioncav::trapchar::*;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn rabi_frequency_at_600() {
    let omega = rabi_from_intensity(600.0, mhz(19.6)).unwrap();
    assert!(rel(omega, mhz(339.5)) < 1e-3);
    assert_relative_eq!(rabi_from_intensity(2.0, 3.0).unwrap(), 3.0);
}

#[test]
fn atom_hamiltonian_at_pump_detuning() {
    let h = build_h_atom(mhz(10.0), &ZeemanParams::zero());
    let d: Vec<f64> = (0..4).map(|i| h.matrix()[(i, i)].re).collect();
    assert_eq!(d, vec![0.0, 0.0, mhz(10.0), mhz(10.0)]);
}

#[test]
fn fit_geometry_polarization_vector() {
    let e = drive_polarization(&DriveGeometry::from_degrees(45.0, 35.0).unwrap()).components();
    let c = 35f64.to_radians().cos();
    let expected = [c / 2f64.sqrt(), 35f64.to_radians().sin(), -c / 2f64.sqrt()];
    for (a, b) in e.iter().zip(expected) {
        assert!((a.re - b).abs() < 1e-12 && a.im == 0.0);
    }
}

#[test]
fn cavity_metrics_from_fsr() {
    let a = cavity_metrics(&CavityInputs {
        fsr: Some(70.5e9),
        fwhm: 18.6e6,
        t_out_ppm: Some(1000.0),
        t_in_ppm: Some(200.0),
        loss_ppm: Some(400.0),
        ..Default::default()
    })
    .unwrap();
    assert!(rel(a.length, 2.126e-3) < 0.005);
    assert!(rel(a.finesse, 3790.0) < 0.01);
    // the stated mirror numbers give 0.625 against the quoted 0.6
    assert!((a.outcoupling_efficiency.unwrap() - 0.6).abs() < 0.03);
    let b = cavity_metrics(&CavityInputs { fsr: Some(70.5e9), fwhm: 47.4e6, ..Default::default() }).unwrap();
    assert!(rel(b.finesse, 1490.0) < 0.01);
    assert_relative_eq!(b.kappa, mhz(23.7), max_relative = 1e-12);
}

#[test]
fn collection_probability_at_operating_point() {
    let c = cooperativity(mhz(3.92), mhz(23.7), mhz(19.6)).unwrap();
    assert!((c - 0.033).abs() < 0.0005);
    let p = collection_probability(0.24, mhz(23.7), mhz(19.6), c / 2.0).unwrap();
    assert!(rel(p, 5.4e-3) < 0.02, "{p}");
}

#[test]
fn solid_angle_and_implied_waist() {
    let a = cavity_solid_angle(369.5e-9, 25e-6).unwrap();
    assert!(rel(a, 1.39e-4) < 0.005);
    let w0 = waist_from_solid_angle(369.5e-9, 1.465e-4).unwrap();
    assert!(rel(w0, 24.36e-6) < 0.001);
}

#[test]
fn scatter_and_isotropic_rates() {
    let gsc = scatter_rate(600.0, mhz(10.0), mhz(19.6)).unwrap();
    assert!(rel(gsc, 6.1e7) < 0.01, "{gsc}");
    let iso = isotropic_rate(gsc, cavity_solid_angle(369.5e-9, 25e-6).unwrap()).unwrap();
    assert!(rel(iso, 300.0) < 0.2, "{iso}");
    let e = enhancement_factor(200_000.0, iso).unwrap();
    assert!(rel(e, 600.0) < 0.15, "{e}");
    assert!(rel(enhancement_factor(200_000.0, 300.0).unwrap(), 600.0) < 0.15);
}

#[test]
fn detection_ladder() {
    let chain = efficiency_chain(
        8000.0,
        &[("Before PMT", 0.19), ("Before Prism", 0.235), ("Before vacuum window", 0.9), ("Outcoupling", 0.24)],
    )
    .unwrap();
    let rates: Vec<f64> = chain.stages.iter().map(|s| s.rate).collect();
    for (r, exact) in rates.iter().zip([42_105.263, 179_171.333, 199_079.259, 829_496.914]) {
        assert!(rel(*r, exact) < 1e-8);
    }
    for (r, quoted) in rates.iter().zip([42_000.0, 180_000.0, 200_000.0, 800_000.0]) {
        assert!(rel(*r, quoted) <= 0.05);
    }
    assert_relative_eq!(chain.forward(), 8000.0, max_relative = 1e-14);
}

#[test]
fn saturation_intensity_value() {
    let i = saturation_intensity(369.5e-9, mhz(19.6)).unwrap();
    // W/m² to mW/cm²
    assert!(rel(i * 0.1, 50.7) < 0.01, "{}", i * 0.1);
}

#[test]
fn resonator_numbers() {
    let l = 2.126e-3;
    // arccos(1 - 2.126/25) evaluated independently
    assert!((gouy_phase(l, 25e-3).unwrap() - 0.415_387_5).abs() < 1e-6);
    let fsr = resonance_frequency(2001, l, 25e-3).unwrap() - resonance_frequency(2000, l, 25e-3).unwrap();
    assert!(rel(fsr, 70.5e9) < 0.001);

    let g = MirrorGeometry::symmetric(l, 25e-3, SPEED_OF_LIGHT / 739e-9).unwrap();
    let gouy_only = dual_band_offset(&g).unwrap();
    assert!(rel(gouy_only, 4.7e9) < 0.02, "{gouy_only}");
    let dl = length_diff_from_offset(2.3e9, &g).unwrap();
    assert!(dl < 0.0);
    assert!(rel(dl.abs(), 12e-9) < 0.1, "{dl}");
}

#[test]
fn trap_operating_point() {
    let q = quadrupole_from_eta(0.45, 90e-6, 0.5).unwrap();
    assert!(rel(q.q_x(), 5.56e7) < 0.001);
    let omega = secular_frequency(0.0, 300.0, 2.0 * PI * 21.6e6, q.q_x(), 174.0 * ATOMIC_MASS_UNIT).unwrap();
    let f = omega / (2.0 * PI);
    assert!(f > 2e6 && f < 8e6, "{f}");
}

#[test]
fn weak_excitation_at_operating_point() {
    let r = solve(&paper_point(600.0, 2)).unwrap();
    assert!(r.photon_number() < 1e-2, "{}", r.photon_number());
    assert!(r.photon_number() > 0.0);
}
