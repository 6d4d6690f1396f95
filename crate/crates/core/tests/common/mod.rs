#![allow(dead_code)]

use std::f64::consts::PI;

use ioncav::cavity_model::CavityParams;
use ioncav::ion_model::{DriveGeometry, ZeemanParams};
use ioncav::steadystate::SystemParams;

pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

pub fn deg(a: f64) -> f64 {
    a * PI / 180.0
}

/// Degraded-cavity operating point with the standing-wave averaged coupling.
pub fn paper_point(i_rel: f64, n_max: usize) -> SystemParams {
    SystemParams {
        gamma: mhz(19.6),
        delta_0: mhz(10.0),
        zeeman: ZeemanParams::from_ground(mhz(1.0)).unwrap(),
        cavity: CavityParams::new(mhz(3.92) / 2f64.sqrt(), mhz(23.7), 0.0, n_max).unwrap(),
        i_rel,
        geometry: DriveGeometry::from_degrees(45.0, 35.0).unwrap(),
    }
}

/// ⟨j1 m1; j2 m2 | J M⟩ by Racah's formula, arguments doubled.
pub fn racah(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    let f = |n: i64| -> f64 { (1..=n).map(|k| k as f64).product() };
    let tri = (tj + 1) as f64 * f((tj + tj1 - tj2) / 2) * f((tj - tj1 + tj2) / 2) * f((tj1 + tj2 - tj) / 2)
        / f((tj1 + tj2 + tj) / 2 + 1);
    let ms = f((tj + tm) / 2) * f((tj - tm) / 2) * f((tj1 - tm1) / 2) * f((tj1 + tm1) / 2) * f((tj2 - tm2) / 2)
        * f((tj2 + tm2) / 2);
    let mut s = 0.0;
    for k in 0..=(tj1 + tj2 - tj) / 2 {
        let a = [
            (tj1 + tj2 - tj) / 2 - k,
            (tj1 - tm1) / 2 - k,
            (tj2 + tm2) / 2 - k,
            (tj - tj2 + tm1) / 2 + k,
            (tj - tj1 - tm2) / 2 + k,
        ];
        if a.iter().all(|&x| x >= 0) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign / (f(k) * a.iter().map(|&x| f(x)).product::<f64>());
        }
    }
    (tri * ms).sqrt() * s
}
