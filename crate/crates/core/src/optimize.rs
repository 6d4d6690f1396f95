//! Derivative-free minimizers used by the fitting routines.
//!
//! Both are deterministic: no random restarts, fixed starting points.

/// Box constraints, one `(lower, upper)` pair per coordinate.
pub type Bounds = [(f64, f64)];

/// Stopping rules for [`nelder_mead`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Stop when `f_worst − f_best <= rel_tol · |f_best|` over the simplex.
    pub rel_tol: f64,
    /// Stop as soon as `f_best <= abs_tol`.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 0.0, max_iter: 200 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn clamp_into(x: &mut [f64], bounds: &Bounds) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Nelder–Mead with standard coefficients (1, 2, ½, ½). Trial points are
/// projected back into the box. `step[i]` sets the initial simplex edge along
/// coordinate `i`; an edge that would leave the box is flipped. Non-finite
/// objective values are treated as `+∞`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], bounds: &Bounds, opts: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(step.len(), n, "step length mismatch");
    assert_eq!(bounds.len(), n, "bounds length mismatch");
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut start = x0.to_vec();
    clamp_into(&mut start, bounds);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(&start);
    simplex.push((start.clone(), v0));
    for i in 0..n {
        let mut x = start.clone();
        let (lo, hi) = bounds[i];
        x[i] = if x[i] + step[i] <= hi { x[i] + step[i] } else { x[i] - step[i] };
        x[i] = x[i].clamp(lo, hi);
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if best <= opts.abs_tol || (worst.is_finite() && worst - best <= opts.rel_tol * best.abs()) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            let mut p: Vec<f64> = centroid.iter().zip(from).map(|(c, w)| c + t * (c - w)).collect();
            clamp_into(&mut p, bounds);
            p
        };
        let worst_x = simplex[n].0.clone();
        let second = simplex[n - 1].1;

        let xr = along(1.0, &worst_x);
        let fr = eval(&xr);
        if fr < best {
            let xe = along(2.0, &worst_x);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = along(0.5, &worst_x);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5, &worst_x);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut x: Vec<f64> = best_x.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            clamp_into(&mut x, bounds);
            let v = eval(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations, evaluations, converged }
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, f(x))` after the bracket shrinks below `tol`.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
