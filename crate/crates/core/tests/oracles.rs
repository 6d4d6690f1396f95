mod common;

use approx::assert_abs_diff_eq;
use common::{mhz, paper_point, racah};
use ioncav::cavity_model::{build_h_jc, CavityParams};
use ioncav::ion_model::{
    build_h_drive, cg_coeff, lowering_operators, AtomLevel, PolVector, Sublevel,
};
use ioncav::lineshape::{bloch_two_level, find_peaks, linear_grid, scan};
use ioncav::qspace::{Operator, SpaceLayout, C64};
use ioncav::steadystate::{build_liouvillian, solve_two_level};

#[test]
fn clebsch_gordan_matches_racah() {
    for tms in [-1, 1] {
        for q in [-1i32, 0, 1] {
            for tmp in [-1, 1] {
                let ours = cg_coeff(tms, q, tmp).unwrap();
                let oracle = racah(2, 2 * q as i64, 1, tms as i64, 1, tmp as i64);
                assert_abs_diff_eq!(ours, oracle, epsilon = 1e-12);
            }
        }
    }
    assert_abs_diff_eq!(cg_coeff(-1, 1, 1).unwrap(), (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(cg_coeff(1, 0, 1).unwrap(), -(1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    assert_eq!(cg_coeff(1, 1, 1).unwrap(), 0.0);
}

#[test]
fn pi_lowering_element() {
    let a0 = &lowering_operators()[1];
    let s = AtomLevel::ground(Sublevel::Minus).index();
    let p = AtomLevel::excited(Sublevel::Minus).index();
    let oracle = racah(2, 0, 1, -1, 1, -1);
    assert_abs_diff_eq!(a0.matrix()[(s, p)].re, oracle, epsilon = 1e-15);
    assert_abs_diff_eq!(oracle, (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
}

#[test]
fn pi_drive_couples_only_equal_m() {
    let omega = 2.7;
    let h = build_h_drive(omega, &PolVector::z_hat());
    let m = h.matrix();
    for m_s in Sublevel::ALL {
        for m_p in Sublevel::ALL {
            let v = m[(AtomLevel::ground(m_s).index(), AtomLevel::excited(m_p).index())];
            if m_s == m_p {
                let cg = racah(2, 0, 1, m_s.twice_m() as i64, 1, m_p.twice_m() as i64);
                assert_abs_diff_eq!(v.re, -0.5 * omega * cg, epsilon = 1e-15);
                assert_abs_diff_eq!(v.norm(), 0.5 * omega * (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
            } else {
                assert_eq!(v.norm(), 0.0);
            }
        }
    }
}

#[test]
fn vacuum_rabi_element_into_v_mode() {
    let g = 1.9;
    let p = CavityParams::new(g, 1.0, 0.0, 2).unwrap();
    let h = build_h_jc(&p, &p.layout().unwrap()).unwrap();
    let oracle = racah(2, 0, 1, -1, 1, -1).abs();
    // |S-; 0_H; 1_V> and |P-; 0; 0>
    assert_abs_diff_eq!(h.matrix()[(1, 18)].norm(), g * oracle, epsilon = 1e-15);
}

#[test]
fn two_level_decay_spectrum() {
    // pure decay: eigenvalues 0, -γ (population), -γ/2 twice (coherences)
    let gamma: f64 = 0.8;
    let layout = SpaceLayout::single(2).unwrap();
    let c = Operator::outer(2, 0, 1).unwrap().scale(gamma.sqrt());
    let l = build_liouvillian(&Operator::zeros(&layout), &[c]).unwrap();
    let mut ev: Vec<f64> = l.to_dense().eigenvalues().unwrap().iter().map(|z: &C64| z.re).collect();
    ev.sort_by(f64::total_cmp);
    for (a, b) in ev.iter().zip([-gamma, -gamma / 2.0, -gamma / 2.0, 0.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
    }
}

#[test]
fn two_level_bloch_grid() {
    let gamma = 1.0;
    assert_abs_diff_eq!(solve_two_level(gamma / 2f64.sqrt(), 0.0, gamma).unwrap(), 0.25, epsilon = 1e-12);
    assert_abs_diff_eq!(solve_two_level(0.0, 0.3, gamma).unwrap(), 0.0, epsilon = 1e-15);
    for i in 0..10 {
        for j in 0..10 {
            let omega = 0.05 + 0.6 * i as f64;
            let delta = -4.0 + 0.9 * j as f64;
            let oracle = (omega * omega / 4.0) / (delta * delta + gamma * gamma / 4.0 + omega * omega / 2.0);
            assert_abs_diff_eq!(solve_two_level(omega, delta, gamma).unwrap(), oracle, epsilon = 1e-8);
            assert_abs_diff_eq!(bloch_two_level(omega, delta, gamma).unwrap(), oracle, epsilon = 1e-15);
        }
    }
}

#[test]
fn strong_drive_sidebands_at_generalized_rabi_frequency() {
    let p = paper_point(600.0, 1);
    // effective Rabi frequency read off the drive Hamiltonian: its
    // eigenvalues are ±Ω_eff/2
    let eps = ioncav::ion_model::drive_polarization(&p.geometry);
    let ev = build_h_drive(p.omega_rabi().unwrap(), &eps).hermitian_eigenvalues();
    let omega_eff = 2.0 * ev[ev.len() - 1];
    let expected = (omega_eff * omega_eff + p.delta_0 * p.delta_0).sqrt();

    let grid = linear_grid(-mhz(450.0), mhz(450.0), 181).unwrap();
    let t = scan(&p, &grid).unwrap();
    let peaks = find_peaks(&t, None).unwrap();
    assert_eq!(peaks.len(), 3, "{:?}", peaks.positions());
    let pos = peaks.positions();
    assert!(pos[1].abs() <= mhz(5.0));
    for side in [pos[0], pos[2]] {
        assert!((side.abs() / expected - 1.0).abs() < 0.1, "sideband {} vs {}", side / mhz(1.0), expected / mhz(1.0));
    }
}
