//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use ioncav::cavity_model::CavityParams;
use ioncav::ion_model::{cg_coeff, DriveGeometry, ZeemanParams};
use ioncav::lineshape::{
    find_peaks, fit_geometry, fit_lorentzian, linear_grid, scan, sideband_prominence, GeometryBounds,
    GeometryFitOptions, LineshapeTable,
};
use ioncav::photometrics::{
    cavity_metrics, cavity_solid_angle, efficiency_chain, enhancement_factor, isotropic_rate,
    saturation_intensity, scatter_rate, CavityInputs, SPEED_OF_LIGHT,
};
use ioncav::resonator::{length_diff_from_offset, MirrorGeometry};
use ioncav::selftest::racah_cg;
use ioncav::steadystate::{converge_truncation, solve, solve_two_level, SystemParams};
use ioncav::trapchar::{fit_eta, Axis, SecularMeasurement, TrapDrive, TrapGeometry, YB174_ION_MASS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn paper_params(i_rel: f64, n_max: usize) -> SystemParams {
    SystemParams {
        gamma: mhz(19.6),
        delta_0: mhz(10.0),
        zeeman: ZeemanParams::from_ground(mhz(1.0)).unwrap(),
        cavity: CavityParams::new(mhz(3.92) / 2f64.sqrt(), mhz(23.7), 0.0, n_max).unwrap(),
        i_rel,
        geometry: DriveGeometry::from_degrees(45.0, 35.0).unwrap(),
    }
}

fn wide_scan(i_rel: f64) -> LineshapeTable {
    let grid = linear_grid(-mhz(450.0), mhz(450.0), 181).unwrap();
    scan(&paper_params(i_rel, 2), &grid).unwrap()
}

fn cavity_metrics_regression() -> Outcome {
    let a = cavity_metrics(&CavityInputs { fsr: Some(70.5e9), fwhm: 18.6e6, ..Default::default() }).unwrap();
    let b = cavity_metrics(&CavityInputs { fsr: Some(70.5e9), fwhm: 47.4e6, ..Default::default() }).unwrap();
    let ok = rel(a.finesse, 3790.0) <= 0.01 && rel(b.finesse, 1490.0) <= 0.01 && rel(a.length, 2.126e-3) <= 0.005;
    outcome(
        ok,
        format!("finesse {:.1} and {:.1}, L = {:.4} mm", a.finesse, b.finesse, a.length * 1e3),
    )
}

fn detection_ladder() -> Outcome {
    let c = efficiency_chain(
        8000.0,
        &[("Before PMT", 0.19), ("Before Prism", 0.235), ("Before vacuum window", 0.9), ("Outcoupling", 0.24)],
    )
    .unwrap();
    let quoted = [42_000.0, 180_000.0, 200_000.0, 800_000.0];
    let worst = c.stages.iter().zip(quoted).map(|(s, q)| rel(s.rate, q)).fold(0.0, f64::max);
    let rates: Vec<String> = c.stages.iter().map(|s| format!("{:.0}", s.rate)).collect();
    outcome(worst <= 0.05, format!("rates [{}] /s, worst deviation {:.1}%", rates.join(", "), worst * 100.0))
}

fn enhancement() -> Outcome {
    let gsc = scatter_rate(600.0, mhz(10.0), mhz(19.6)).unwrap();
    let iso = isotropic_rate(gsc, cavity_solid_angle(369.5e-9, 25e-6).unwrap()).unwrap();
    let e = enhancement_factor(200_000.0, iso).unwrap();
    outcome(
        rel(e, 600.0) <= 0.15,
        format!("scatter {gsc:.3e} /s, isotropic {iso:.1} /s, enhancement {e:.0}"),
    )
}

fn saturation() -> Outcome {
    let i = saturation_intensity(369.5e-9, mhz(19.6)).unwrap() * 0.1;
    outcome(rel(i, 50.7) <= 0.01, format!("{i:.2} mW/cm^2"))
}

fn dual_band() -> Outcome {
    let g = MirrorGeometry::symmetric(2.126e-3, 25e-3, SPEED_OF_LIGHT / 739e-9).unwrap();
    let dl = length_diff_from_offset(2.3e9, &g).unwrap();
    outcome(rel(dl.abs(), 12e-9) <= 0.1, format!("dL = {:.2} nm", dl * 1e9))
}

fn two_level() -> Outcome {
    let gamma = 1.0;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let omega = 0.05 + 0.6 * i as f64;
            let delta = -4.0 + 0.9 * j as f64;
            let exact = (omega * omega / 4.0) / (delta * delta + gamma * gamma / 4.0 + omega * omega / 2.0);
            worst = worst.max((solve_two_level(omega, delta, gamma).unwrap() - exact).abs());
        }
    }
    outcome(worst < 1e-8, format!("max |dP_e| = {worst:.2e} over 100 points"))
}

fn mollow(strong: &LineshapeTable) -> Outcome {
    let peaks = find_peaks(strong, None).unwrap();
    let omega = mhz(19.6) * 300f64.sqrt();
    let expected = (omega * omega + mhz(10.0) * mhz(10.0)).sqrt();
    let pos: Vec<f64> = peaks.positions();
    let sidebands_ok = pos.len() == 3 && [pos[0], pos[2]].iter().all(|p| rel(p.abs(), expected) <= 0.1);

    let grid = linear_grid(-mhz(150.0), mhz(150.0), 121).unwrap();
    let weak = scan(&paper_params(2.0, 2), &grid).unwrap();
    let weak_peaks = find_peaks(&weak, None).unwrap().len();
    let fit = fit_lorentzian(&weak).unwrap();
    let weak_ok = weak_peaks == 1 && fit.r_squared > 0.99;

    let shown: Vec<String> = pos.iter().map(|p| format!("{:.0}", p / mhz(1.0))).collect();
    outcome(
        sidebands_ok && weak_ok,
        format!(
            "I=600: {} maxima at [{}] MHz, expected sidebands at +-{:.0} MHz; I=2: {} maximum, Lorentzian R^2 = {:.5}",
            pos.len(),
            shown.join(", "),
            expected / mhz(1.0),
            weak_peaks,
            fit.r_squared
        ),
    )
}

fn onset(scans: &[(f64, &LineshapeTable)]) -> Outcome {
    let prom: Vec<f64> = scans.iter().map(|(_, t)| sideband_prominence(t).unwrap()).collect();
    let monotone = prom.windows(2).all(|w| w[1] >= w[0]);
    let grows = prom.last() > prom.first();
    let shown: Vec<String> = scans.iter().zip(&prom).map(|((i, _), p)| format!("I={i}: {p:.0}")).collect();
    outcome(monotone && grows, format!("prominence /s {}", shown.join(", ")))
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        gamma: mhz(rng.gen_range(5.0..30.0)),
        delta_0: mhz(rng.gen_range(-30.0..30.0)),
        zeeman: ZeemanParams::from_ground(mhz(rng.gen_range(0.0..3.0))).unwrap(),
        cavity: CavityParams::new(
            mhz(rng.gen_range(0.5..5.0)),
            mhz(rng.gen_range(10.0..50.0)),
            mhz(rng.gen_range(-100.0..100.0)),
            2,
        )
        .unwrap(),
        i_rel: rng.gen_range(0.1..1000.0),
        geometry: DriveGeometry::from_degrees(rng.gen_range(5.0..85.0), rng.gen_range(0.0..179.0)).unwrap(),
    }
}

fn invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2009);
    let (mut tr, mut herm, mut eig, mut res, mut trunc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let r = solve(&p).unwrap();
        tr = tr.max((r.rho.trace() - 1.0).norm());
        herm = herm.max(r.rho.hermiticity_error());
        eig = eig.min(r.min_eigenvalue);
        res = res.max(r.residual);
        trunc = trunc.max(converge_truncation(&p).unwrap().relative_change);
    }
    outcome(
        tr < 1e-9 && herm < 1e-10 && eig > -1e-10 && res < 1e-8 && trunc < 1e-3,
        format!(
            "50 sets: trace {tr:.1e}, hermiticity {herm:.1e}, min eigenvalue {eig:.1e}, residual {res:.1e}, truncation {trunc:.1e}"
        ),
    )
}

fn clebsch_gordan() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut sum_err: f64 = 0.0;
    let mut forbidden = 0;
    for tmp in [-1, 1] {
        let mut s = 0.0;
        for tms in [-1, 1] {
            for q in [-1, 0, 1] {
                let c = cg_coeff(tms, q, tmp).unwrap();
                s += c * c;
                worst = worst.max((c - racah_cg(2, 2 * q as i64, 1, tms as i64, 1, tmp as i64)).abs());
                if tms + 2 * q != tmp && c != 0.0 {
                    forbidden += 1;
                }
            }
        }
        sum_err = sum_err.max((s - 1.0).abs());
    }
    outcome(
        worst < 1e-12 && sum_err < 1e-12 && forbidden == 0,
        format!("Racah deviation {worst:.1e}, sum rule {sum_err:.1e}, {forbidden} forbidden nonzero"),
    )
}

fn geometry_round_trip() -> (bool, String) {
    let grid = linear_grid(-mhz(450.0), mhz(450.0), 91).unwrap();
    let truth = paper_params(600.0, 1);
    let clean = scan(&truth, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let noisy: Vec<f64> = clean.rates().iter().map(|r| r * (1.0 + noise.sample(&mut rng))).collect();
    let data = LineshapeTable::from_rates(&clean.detunings(), &noisy).unwrap();
    let bounds = GeometryBounds {
        i_rel: (150.0, 1200.0),
        theta_k: (5f64.to_radians(), 85f64.to_radians()),
        psi_pol: (5f64.to_radians(), 85f64.to_radians()),
        amplitude: (0.0, 10.0),
    };
    let fit = fit_geometry(&data, &paper_params(1.0, 1), &bounds, &GeometryFitOptions::default()).unwrap();
    let (th, ps) = (fit.theta_k.to_degrees(), fit.psi_pol.to_degrees());
    let ok = rel(fit.i_rel, 600.0) <= 0.15 && (th - 45.0).abs() <= 5.0 && (ps - 35.0).abs() <= 5.0;
    (
        ok,
        format!(
            "geometry fit I = {:.1}, theta = {th:.1} deg, psi = {ps:.1} deg ({} evaluations)",
            fit.i_rel, fit.evaluations
        ),
    )
}

fn eta_round_trip() -> (bool, String) {
    let drive = TrapDrive { v0: 300.0, omega_rf: 2.0 * PI * 21.6e6, mass: YB174_ION_MASS };
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let mut data = Vec::new();
    for sep in [130e-6, 150e-6, 170e-6, 200e-6] {
        for axis in [Axis::X, Axis::Z] {
            for u0 in [-20.0, -10.0, 0.0, 10.0, 20.0] {
                let t = TrapGeometry::new(0.5 * sep, 0.45, drive.omega_rf, drive.v0, u0, drive.mass).unwrap();
                let omega = t.secular(axis, 0.3).unwrap() * (1.0 + noise.sample(&mut rng));
                data.push(SecularMeasurement { u0, separation: sep, axis, omega });
            }
        }
    }
    let fit = fit_eta(&data, &drive).unwrap();
    let worst = fit.separations.iter().map(|s| rel(s.eta, 0.45)).fold(0.0, f64::max);
    let etas: Vec<String> = fit.separations.iter().map(|s| format!("{:.4}", s.eta)).collect();
    (worst <= 0.03, format!("eta [{}], worst {:.2}%", etas.join(", "), worst * 100.0))
}

fn fits() -> Outcome {
    let (g_ok, g) = geometry_round_trip();
    let (e_ok, e) = eta_round_trip();
    outcome(g_ok && e_ok, format!("{g}; {e}"))
}

fn run_scan(parallel: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_ioncav"))
        .args(["scan", "--parallel", &parallel.to_string()])
        .output()
        .expect("run ioncav");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Outcome {
    let a = run_scan(1);
    let b = run_scan(8);
    let c = run_scan(8);
    let lines = a.iter().filter(|&&b| b == b'\n').count();
    outcome(a == b && b == c, format!("{lines} CSV lines, {} bytes, identical across 3 runs", a.len()))
}

fn main() {
    let mut failed = Vec::new();
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {mark}  {name}: {} [{:.1} s]", o.detail, t.elapsed().as_secs_f64());
        if !o.passed {
            failed.push(n);
        }
    };

    report(1, "cavity metrics", &mut cavity_metrics_regression);
    report(2, "detection ladder", &mut detection_ladder);
    report(3, "enhancement factor", &mut enhancement);
    report(4, "saturation intensity", &mut saturation);
    report(5, "dual-band length difference", &mut dual_band);
    report(6, "two-level oracle", &mut two_level);

    let t0 = Instant::now();
    let strong = wide_scan(600.0);
    let scan_time = t0.elapsed().as_secs_f64();
    report(7, "Mollow triplet", &mut || {
        let mut o = mollow(&strong);
        o.detail.push_str(&format!("; 181-point scan {scan_time:.1} s"));
        o
    });
    report(8, "monotone onset", &mut || {
        let low: Vec<(f64, LineshapeTable)> = [2.0, 50.0, 150.0].iter().map(|&i| (i, wide_scan(i))).collect();
        let mut all: Vec<(f64, &LineshapeTable)> = low.iter().map(|(i, t)| (*i, t)).collect();
        all.push((600.0, &strong));
        onset(&all)
    });
    report(9, "steady-state invariants", &mut invariants);
    report(10, "Clebsch-Gordan suite", &mut clebsch_gordan);
    report(11, "fit round trips", &mut fits);
    report(12, "determinism", &mut determinism);

    if failed.is_empty() {
        println!("all 12 criteria passed");
    } else {
        println!("{} of 12 criteria failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
