//! Cavity-detuning scans, peak detection and lineshape fits.
//!
//! The cavity is the spectral filter: the emission spectrum is read off as
//! the steady-state output rate while `δ_c` is stepped, the way the
//! experiment records it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ion_model::DriveGeometry;
use crate::optimize::{golden_section, nelder_mead, SimplexOptions};
use crate::steadystate::{solve, SystemParams};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LineshapeRow {
    /// Cavity detuning `ω_c − ω_L`, rad/s.
    pub delta_c: f64,
    pub n_h: f64,
    pub n_v: f64,
    /// Photons per second leaving the cavity.
    pub count_rate: f64,
}

/// Scan result ordered by strictly increasing `delta_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineshapeTable {
    rows: Vec<LineshapeRow>,
}

impl LineshapeTable {
    pub fn new(rows: Vec<LineshapeRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("lineshape table is empty".into()));
        }
        for w in rows.windows(2) {
            if !(w[1].delta_c > w[0].delta_c) {
                return Err(Error::Domain(format!(
                    "delta_c must be strictly increasing ({} then {})",
                    w[0].delta_c, w[1].delta_c
                )));
            }
        }
        if let Some(r) = rows.iter().find(|r| !(r.count_rate >= 0.0)) {
            return Err(Error::Domain(format!(
                "negative or undefined count rate {} at delta_c = {}",
                r.count_rate, r.delta_c
            )));
        }
        Ok(Self { rows })
    }

    /// Table from bare `(delta_c, count_rate)` pairs, photon numbers zero.
    pub fn from_rates(delta_c: &[f64], rates: &[f64]) -> Result<Self> {
        if delta_c.len() != rates.len() {
            return Err(Error::Domain(format!(
                "{} detunings but {} rates",
                delta_c.len(),
                rates.len()
            )));
        }
        Self::new(
            delta_c
                .iter()
                .zip(rates)
                .map(|(&delta_c, &count_rate)| LineshapeRow { delta_c, n_h: 0.0, n_v: 0.0, count_rate })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[LineshapeRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn detunings(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta_c).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.count_rate).collect()
    }

    /// Same table with every count rate multiplied by `factor > 0`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::Domain(format!("rescale factor {factor} must be > 0")));
        }
        Self::new(
            self.rows
                .iter()
                .map(|r| LineshapeRow { count_rate: r.count_rate * factor, ..*r })
                .collect(),
        )
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 points, got {points}")));
    }
    if !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain(format!("grid bounds must satisfy start < stop, got {start}..{stop}")));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { stop } else { start + step * i as f64 })
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("scan grid is empty".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!(
            "scan grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn scan_point(params: &SystemParams, delta_c: f64) -> Result<LineshapeRow> {
    let r = solve(&params.with_delta_c(delta_c))
        .map_err(|e| Error::ScanPoint { delta_c, source: Box::new(e) })?;
    // photon numbers at the 1e-17 level can come out with either sign
    let n_h = r.n_h.max(0.0);
    let n_v = r.n_v.max(0.0);
    Ok(LineshapeRow { delta_c, n_h, n_v, count_rate: 2.0 * params.cavity.kappa * (n_h + n_v) })
}

/// One steady-state solve per grid point, in parallel on the current rayon
/// pool. Each point is solved independently, so the table does not depend on
/// the number of threads.
pub fn scan(params: &SystemParams, grid: &[f64]) -> Result<LineshapeTable> {
    params.validate()?;
    check_grid(grid)?;
    let rows = grid
        .par_iter()
        .map(|&dc| scan_point(params, dc))
        .collect::<Result<Vec<_>>>()?;
    LineshapeTable::new(rows)
}

/// Same as [`scan`] but on the calling thread only.
pub fn scan_serial(params: &SystemParams, grid: &[f64]) -> Result<LineshapeTable> {
    params.validate()?;
    check_grid(grid)?;
    let rows = grid.iter().map(|&dc| scan_point(params, dc)).collect::<Result<Vec<_>>>()?;
    LineshapeTable::new(rows)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub delta_c: f64,
    pub height: f64,
}

/// Interior local maxima sorted by detuning.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.delta_c).collect()
    }
}

/// Centered moving average of odd `width`; the window is truncated at the
/// ends.
pub fn boxcar(values: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return values.to_vec();
    }
    let half = width / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Three-point local maxima (`y[i−1] < y[i] >= y[i+1]`), optionally after a
/// boxcar of the given width. Endpoints are never peaks. Heights are the
/// (smoothed) values at the maxima.
pub fn find_peaks(t: &LineshapeTable, smoothing: Option<usize>) -> Result<PeakSet> {
    if t.len() < 3 {
        return Err(Error::Domain(format!("peak search needs at least 3 rows, got {}", t.len())));
    }
    let y = boxcar(&t.rates(), smoothing.unwrap_or(1));
    let peaks = (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| Peak { index: i, delta_c: t.rows()[i].delta_c, height: y[i] })
        .collect();
    Ok(PeakSet { peaks })
}

/// Height of the weaker sideband above the lowest point separating it from
/// the central peak (the peak nearest `δ_c = 0`). Zero when fewer than three
/// peaks are present.
pub fn sideband_prominence(t: &LineshapeTable) -> Result<f64> {
    let set = find_peaks(t, None)?;
    if set.len() < 3 {
        return Ok(0.0);
    }
    let y = t.rates();
    let center = set
        .peaks
        .iter()
        .min_by(|a, b| a.delta_c.abs().total_cmp(&b.delta_c.abs()))
        .copied()
        .expect("nonempty");
    let side = |pred: &dyn Fn(&Peak) -> bool| -> Option<f64> {
        let p = set.peaks.iter().filter(|p| pred(p)).max_by(|a, b| a.height.total_cmp(&b.height))?;
        let (lo, hi) = if p.index < center.index { (p.index, center.index) } else { (center.index, p.index) };
        let valley = y[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
        Some(p.height - valley)
    };
    match (side(&|p| p.index < center.index), side(&|p| p.index > center.index)) {
        (Some(l), Some(r)) => Ok(l.min(r)),
        _ => Ok(0.0),
    }
}

/// Analytic steady-state excited population of a two-level atom.
pub fn bloch_two_level(omega: f64, delta: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma = {gamma} must be > 0")));
    }
    Ok((omega * omega / 4.0) / (delta * delta + gamma * gamma / 4.0 + omega * omega / 2.0))
}

/// `A / (1 + ((x − x0)/w)²)` fitted by least squares.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
    pub sse: f64,
    pub r_squared: f64,
}

fn lorentz_profile(x: &[f64], center: f64, half_width: f64) -> Vec<f64> {
    x.iter().map(|&xi| 1.0 / (1.0 + ((xi - center) / half_width).powi(2))).collect()
}

/// Best non-negative amplitude for `a·model ≈ data` and the resulting SSE.
fn profile_amplitude(model: &[f64], data: &[f64], range: (f64, f64)) -> (f64, f64) {
    let num: f64 = model.iter().zip(data).map(|(m, d)| m * d).sum();
    let den: f64 = model.iter().map(|m| m * m).sum();
    let a = if den > 0.0 { (num / den).clamp(range.0, range.1) } else { range.0 };
    let sse = model.iter().zip(data).map(|(m, d)| (a * m - d).powi(2)).sum();
    (a, sse)
}

pub fn fit_lorentzian(t: &LineshapeTable) -> Result<LorentzianFit> {
    if t.len() < 4 {
        return Err(Error::Underdetermined(format!("Lorentzian fit needs at least 4 rows, got {}", t.len())));
    }
    let x = t.detunings();
    let y = t.rates();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if !(sst > 0.0) {
        return Err(Error::Underdetermined("Lorentzian fit of a flat lineshape".into()));
    }
    let span = x[x.len() - 1] - x[0];
    let (imax, ymax) = y.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
    let above = y.iter().filter(|&&v| v >= ymax / 2.0).count().max(1);
    let w0 = (span / (x.len() - 1) as f64 * above as f64 / 2.0).max(span * 1e-3);

    // work in units of the scan span to keep the simplex well scaled
    let objective = |p: &[f64]| {
        let m = lorentz_profile(&x, p[0] * span, p[1].exp() * span);
        profile_amplitude(&m, &y, (0.0, f64::INFINITY)).1
    };
    let x_lo = x[0] / span - 1.0;
    let x_hi = x[x.len() - 1] / span + 1.0;
    let opts = SimplexOptions { rel_tol: 1e-12, abs_tol: 0.0, max_iter: 2000 };
    let m = nelder_mead(
        objective,
        &[x[imax] / span, (w0 / span).ln()],
        &[0.05, 0.3],
        &[(x_lo, x_hi), ((1e-6f64).ln(), (10.0f64).ln())],
        &opts,
    );
    let center = m.x[0] * span;
    let half_width = m.x[1].exp() * span;
    let (amplitude, sse) = profile_amplitude(&lorentz_profile(&x, center, half_width), &y, (0.0, f64::INFINITY));
    Ok(LorentzianFit { center, half_width, amplitude, sse, r_squared: 1.0 - sse / sst })
}

/// Search box for [`fit_geometry`]. Angles in radians.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GeometryBounds {
    pub i_rel: (f64, f64),
    pub theta_k: (f64, f64),
    pub psi_pol: (f64, f64),
    pub amplitude: (f64, f64),
}

impl GeometryBounds {
    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !(ok(self.i_rel) && ok(self.theta_k) && ok(self.psi_pol) && self.amplitude.0 <= self.amplitude.1) {
            return Err(Error::Domain(format!("fit bounds are empty or unordered: {self:?}")));
        }
        if self.i_rel.0 < 0.0
            || self.theta_k.0 < 0.0
            || self.theta_k.1 > std::f64::consts::PI
            || self.psi_pol.0 < 0.0
            || self.psi_pol.1 >= std::f64::consts::PI
            || self.amplitude.1 <= 0.0
        {
            return Err(Error::Domain(format!("fit bounds outside the physical range: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GeometryFitOptions {
    /// Coarse grid points along (i_rel, theta_k, psi_pol).
    pub grid: [usize; 3],
    pub simplex: SimplexOptions,
}

impl Default for GeometryFitOptions {
    fn default() -> Self {
        Self { grid: [4, 4, 4], simplex: SimplexOptions::default() }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GeometryFit {
    pub i_rel: f64,
    pub theta_k: f64,
    pub psi_pol: f64,
    pub amplitude: f64,
    pub sse: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    if n <= 1 || range.0 == range.1 {
        return vec![0.5 * (range.0 + range.1)];
    }
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

/// Least-squares fit of pump intensity, beam angle and polarization angle
/// to a measured lineshape. The overall amplitude is solved in closed form
/// at every probe and clamped to its bounds. A coarse grid over the three
/// shape parameters seeds a bounded simplex. Probes where the solver fails
/// score `+∞` and are skipped.
///
/// `base` supplies everything else (rates, detuning, Zeeman, cutoff).
pub fn fit_geometry(
    data: &LineshapeTable,
    base: &SystemParams,
    bounds: &GeometryBounds,
    opts: &GeometryFitOptions,
) -> Result<GeometryFit> {
    bounds.validate()?;
    base.validate()?;
    let grid = data.detunings();
    let y = data.rates();
    let amp_range = (bounds.amplitude.0.max(0.0), bounds.amplitude.1);

    let shape = |p: &[f64]| -> Option<(f64, f64)> {
        let geometry = match DriveGeometry::new(p[1], p[2]) {
            Ok(g) => g,
            Err(e) => {
                log::warn!("fit probe {p:?} rejected: {e}");
                return None;
            }
        };
        let params = SystemParams { i_rel: p[0], geometry, ..*base };
        match scan(&params, &grid) {
            Ok(t) => Some(profile_amplitude(&t.rates(), &y, amp_range)),
            Err(e) => {
                log::warn!("fit probe {p:?} failed: {e}");
                None
            }
        }
    };
    let objective = |p: &[f64]| shape(p).map_or(f64::INFINITY, |(_, sse)| sse);

    let axes = [
        axis(bounds.i_rel, opts.grid[0]),
        axis(bounds.theta_k, opts.grid[1]),
        axis(bounds.psi_pol, opts.grid[2]),
    ];
    let mut best = (vec![axes[0][0], axes[1][0], axes[2][0]], f64::INFINITY);
    let mut evaluations = 0;
    for &a in &axes[0] {
        for &b in &axes[1] {
            for &c in &axes[2] {
                let p = vec![a, b, c];
                let v = objective(&p);
                evaluations += 1;
                if v < best.1 {
                    best = (p, v);
                }
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Numerical("every grid probe of the geometry fit failed".into()));
    }
    let ranges = [bounds.i_rel, bounds.theta_k, bounds.psi_pol];
    let step: Vec<f64> = ranges
        .iter()
        .zip(&opts.grid)
        .map(|(&(lo, hi), &n)| 0.5 * (hi - lo) / (n.max(2) - 1) as f64)
        .collect();
    let power: f64 = y.iter().map(|v| v * v).sum();
    let simplex = SimplexOptions { abs_tol: opts.simplex.abs_tol.max(power * 1e-15), ..opts.simplex };
    let m = nelder_mead(objective, &best.0, &step, &ranges, &simplex);
    evaluations += m.evaluations;
    let (amplitude, sse) = shape(&m.x).ok_or_else(|| Error::Numerical("fit optimum could not be re-evaluated".into()))?;
    Ok(GeometryFit {
        i_rel: m.x[0],
        theta_k: m.x[1],
        psi_pol: m.x[2],
        amplitude,
        sse,
        evaluations: evaluations + 1,
        converged: m.converged,
    })
}

/// Position of the largest value of `f` on `[lo, hi]` refined by golden
/// section; used to locate sidebands between grid points.
pub fn refine_maximum<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (x, v) = golden_section(|x| -f(x), lo, hi, tol);
    (x, -v)
}
