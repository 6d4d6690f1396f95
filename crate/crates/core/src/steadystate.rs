//! Lindblad steady state of the driven atom–cavity system.
//!
//! The Liouvillian is assembled in column-stacking form,
//! `vec(AXB) = (Bᵀ ⊗ A) vec(X)`, and stored as a compressed-column sparse
//! matrix. The stationary state comes from a direct LU solve in which one
//! population equation is replaced by the trace constraint. Because the
//! Liouvillian maps Hermitian matrices to Hermitian matrices, the solve runs
//! over the `d²` real parameters of a Hermitian `ρ` rather than over `d²`
//! complex unknowns.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};

use crate::cavity_model::{build_h_cav, build_h_jc, collapse_operators, CavityParams, ModeOperators};
use crate::error::{Error, Result};
use crate::ion_model::{
    build_h_atom, build_h_drive, drive_polarization, excited_projector, rabi_from_intensity,
    DriveGeometry, ZeemanParams,
};
use crate::qspace::{embed, expectation, CMatrix, Operator, SpaceLayout, C64, ATOM_SLOT};

/// Condition-number estimate above which the kernel is treated as
/// degenerate.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Negative eigenvalues of `ρ` down to this value are clipped to zero.
pub const EIGENVALUE_CLIP: f64 = 1e-10;

/// Relative change in photon number accepted by the truncation check.
pub const TRUNCATION_TOL: f64 = 1e-3;

/// Physical parameters of one steady-state solve, angular units (rad/s).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub gamma: f64,
    pub delta_0: f64,
    pub zeeman: ZeemanParams,
    pub cavity: CavityParams,
    /// Pump intensity in units of the saturation intensity.
    pub i_rel: f64,
    pub geometry: DriveGeometry,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::Domain(format!("gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.i_rel >= 0.0) {
            return Err(Error::Domain(format!("i_rel = {} must be >= 0", self.i_rel)));
        }
        if !self.delta_0.is_finite() {
            return Err(Error::Domain(format!("delta_0 = {} is not finite", self.delta_0)));
        }
        ZeemanParams::new(self.zeeman.delta_s, self.zeeman.delta_p)?;
        self.cavity.validate()
    }

    pub fn omega_rabi(&self) -> Result<f64> {
        rabi_from_intensity(self.i_rel, self.gamma)
    }

    pub fn with_delta_c(&self, delta_c: f64) -> Self {
        Self { cavity: self.cavity.with_delta_c(delta_c), ..*self }
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        Self { cavity: CavityParams { n_max, ..self.cavity }, ..*self }
    }

    /// Multiply every rate and detuning by `factor`. The relative intensity
    /// is unchanged, so the Rabi frequency scales with `gamma`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            gamma: self.gamma * factor,
            delta_0: self.delta_0 * factor,
            zeeman: self.zeeman.scaled(factor),
            cavity: CavityParams {
                g: self.cavity.g * factor,
                kappa: self.cavity.kappa * factor,
                delta_c: self.cavity.delta_c * factor,
                n_max: self.cavity.n_max,
            },
            i_rel: self.i_rel,
            geometry: self.geometry,
        }
    }
}

/// Liouvillian in column-stacking form, acting on `vec(ρ)`, stored by
/// compressed columns.
#[derive(Clone, Debug)]
pub struct Superoperator {
    layout: SpaceLayout,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
}

impl Superoperator {
    fn from_triplets(layout: SpaceLayout, mut entries: Vec<(usize, usize, C64)>) -> Self {
        let n = layout.total().pow(2);
        entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry exists") += v;
                continue;
            }
            last = Some((r, c));
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self { layout, col_ptr, row_idx, values }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    /// Hilbert-space dimension `d` (the superoperator is `d² × d²`).
    pub fn hilbert_dim(&self) -> usize {
        self.layout.total()
    }

    pub fn dim(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of column `c` as `(row, value)` pairs.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        self.row_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for c in 0..n {
            for (r, v) in self.column(c) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `L(ρ)` as an operator.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.layout() != &self.layout {
            return Err(Error::Layout("density matrix layout does not match Liouvillian".into()));
        }
        let d = self.hilbert_dim();
        let x = rho.matrix().as_slice();
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for (c, xc) in x.iter().enumerate() {
            if *xc == C64::new(0.0, 0.0) {
                continue;
            }
            for (r, v) in self.column(c) {
                out[r] += v * xc;
            }
        }
        Operator::new(self.layout.clone(), CMatrix::from_column_slice(d, d, &out))
    }
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != C64::new(0.0, 0.0) {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// `ρ̇ = −i[H, ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ})` in vectorized form.
pub fn build_liouvillian(h: &Operator, collapse: &[Operator]) -> Result<Superoperator> {
    let tol = 1e-12 * h.max_abs().max(1.0);
    let herm = h.hermiticity_error();
    if herm > tol {
        return Err(Error::Model(format!("Hamiltonian is not Hermitian (max |H - H†| = {herm:.3e})")));
    }
    let layout = h.layout().clone();
    if let Some(c) = collapse.iter().find(|c| c.layout() != &layout) {
        return Err(Error::Layout(format!(
            "collapse operator layout {:?} differs from Hamiltonian layout {:?}",
            c.layout().dims(),
            layout.dims()
        )));
    }
    let d = layout.total();

    // effective non-Hermitian generator K = -iH - ½ Σ C†C, so that
    // L = I⊗K + conj(K)⊗I + Σ conj(C)⊗C
    let mut k = h.matrix() * C64::new(0.0, -1.0);
    for c in collapse {
        k -= (c.matrix().adjoint() * c.matrix()).scale(0.5);
    }
    let k_nz = nonzeros(&k);
    let mut entries = Vec::with_capacity(2 * d * k_nz.len());
    for &(i, kk, v) in &k_nz {
        for j in 0..d {
            entries.push((j * d + i, j * d + kk, v));
        }
    }
    for &(j, l, v) in &k_nz {
        for i in 0..d {
            entries.push((j * d + i, l * d + i, v.conj()));
        }
    }
    for c in collapse {
        let c_nz = nonzeros(c.matrix());
        for &(j, l, a) in &c_nz {
            for &(i, kk, b) in &c_nz {
                entries.push((j * d + i, l * d + kk, a.conj() * b));
            }
        }
    }
    Ok(Superoperator::from_triplets(layout, entries))
}

/// Stationary density matrix and solver diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: Operator,
    /// `‖L vec(ρ)‖_∞ / max|L|`.
    pub residual: f64,
    /// Smallest eigenvalue of `ρ` before clipping.
    pub min_eigenvalue: f64,
    /// 1-norm condition estimate of the constrained linear system.
    pub condition: f64,
}

// Real coordinates of a Hermitian matrix stored at the column-stacked
// index r = p + q d: Re ρ_pq for p <= q, Im ρ_qp for p > q.
fn rho_from_real(x: &[f64], d: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(d, d);
    for q in 0..d {
        for p in 0..=q {
            let re = x[p + q * d];
            let im = if p == q { 0.0 } else { x[q + p * d] };
            rho[(p, q)] = C64::new(re, im);
            rho[(q, p)] = C64::new(re, -im);
        }
    }
    rho
}

/// Real form of `L` with the `ρ_00` equation replaced by the trace row,
/// entries divided by `scale`.
fn constrained_real_system(l: &Superoperator, scale: f64) -> Vec<Triplet<usize, usize, f64>> {
    let d = l.hilbert_dim();
    let n = d * d;
    let i = C64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(2 * l.nnz());
    let mut acc = vec![C64::new(0.0, 0.0); n];
    let mut touched: Vec<usize> = Vec::new();
    let mut push_column = |var: usize, acc: &mut Vec<C64>, touched: &mut Vec<usize>| {
        touched.sort_unstable();
        touched.dedup();
        for &r in touched.iter() {
            let (p, q) = (r % d, r / d);
            let v = acc[r];
            acc[r] = C64::new(0.0, 0.0);
            // Lρ is Hermitian: the upper triangle carries all the information
            if p > q || r == 0 {
                continue;
            }
            if v.re != 0.0 {
                out.push(Triplet::new(r, var, v.re / scale));
            }
            if p < q && v.im != 0.0 {
                out.push(Triplet::new(q + p * d, var, v.im / scale));
            }
        }
        touched.clear();
    };
    for b in 0..d {
        for a in 0..=b {
            let upper = a + b * d;
            let lower = b + a * d;
            if a == b {
                for (r, v) in l.column(upper) {
                    acc[r] += v;
                    touched.push(r);
                }
                push_column(upper, &mut acc, &mut touched);
                continue;
            }
            for (r, v) in l.column(upper).chain(l.column(lower)) {
                acc[r] += v;
                touched.push(r);
            }
            push_column(upper, &mut acc, &mut touched);
            for (r, v) in l.column(upper) {
                acc[r] += v * i;
                touched.push(r);
            }
            for (r, v) in l.column(lower) {
                acc[r] -= v * i;
                touched.push(r);
            }
            push_column(lower, &mut acc, &mut touched);
        }
    }
    for k in 0..d {
        out.push(Triplet::new(0, k + k * d, 1.0));
    }
    out
}

/// True when no permutation puts a structural nonzero on every diagonal
/// position (maximum bipartite matching between rows and columns is not
/// perfect). Such a matrix is singular for every choice of values.
fn structurally_singular(entries: &[Triplet<usize, usize, f64>], n: usize) -> bool {
    let mut col_ptr = vec![0usize; n + 1];
    for t in entries {
        col_ptr[t.col + 1] += 1;
    }
    for c in 0..n {
        col_ptr[c + 1] += col_ptr[c];
    }
    let mut rows = vec![0usize; entries.len()];
    let mut fill = col_ptr.clone();
    for t in entries {
        rows[fill[t.col]] = t.row;
        fill[t.col] += 1;
    }
    let mut row_match = vec![usize::MAX; n];
    // cheap greedy pass first
    let mut unmatched = Vec::new();
    for c in 0..n {
        match rows[col_ptr[c]..col_ptr[c + 1]].iter().find(|&&r| row_match[r] == usize::MAX) {
            Some(&r) => row_match[r] = c,
            None => unmatched.push(c),
        }
    }
    // augmenting paths, iterative depth-first search
    let mut visited = vec![usize::MAX; n];
    for (stamp, &start) in unmatched.iter().enumerate() {
        let mut stack: Vec<(usize, usize)> = vec![(start, col_ptr[start])];
        let mut path_rows: Vec<usize> = Vec::new();
        let mut found = false;
        while let Some(&mut (c, ref mut next)) = stack.last_mut() {
            if *next == col_ptr[c + 1] {
                stack.pop();
                path_rows.pop();
                continue;
            }
            let r = rows[*next];
            *next += 1;
            if visited[r] == stamp {
                continue;
            }
            visited[r] = stamp;
            path_rows.push(r);
            if row_match[r] == usize::MAX {
                found = true;
                break;
            }
            let owner = row_match[r];
            stack.push((owner, col_ptr[owner]));
        }
        if !found {
            return true;
        }
        // flip the alternating path: column k of the stack takes row k
        for (k, &(c, _)) in stack.iter().enumerate() {
            row_match[path_rows[k]] = c;
        }
    }
    false
}

fn one_norm(entries: &[Triplet<usize, usize, f64>], n: usize) -> f64 {
    let mut cols = vec![0.0f64; n];
    for t in entries {
        cols[t.col] += t.val.abs();
    }
    cols.into_iter().fold(0.0, f64::max)
}

/// Hager's estimate of `‖A⁻¹‖₁` from an existing factorization.
fn inverse_one_norm_estimate(lu: &impl Solve<f64>, n: usize) -> f64 {
    let mut x = Mat::<f64>::from_fn(n, 1, |_, _| 1.0 / n as f64);
    let mut estimate = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x);
        let norm_y: f64 = (0..n).map(|i| y[(i, 0)].abs()).sum();
        if !norm_y.is_finite() {
            return f64::INFINITY;
        }
        if norm_y <= estimate {
            break;
        }
        estimate = norm_y;
        let xi = Mat::<f64>::from_fn(n, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
        let z = lu.solve_transpose(&xi);
        let (j, zmax) = (0..n)
            .map(|i| (i, z[(i, 0)].abs()))
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        if !zmax.is_finite() {
            return f64::INFINITY;
        }
        let ztx: f64 = (0..n).map(|i| z[(i, 0)] * x[(i, 0)]).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x = Mat::<f64>::zeros(n, 1);
        x[(j, 0)] = 1.0;
    }
    estimate
}

static SEQUENTIAL_KERNELS: Once = Once::new();

/// Solve `L ρ = 0` with `tr ρ = 1`.
pub fn solve_steady(l: &Superoperator) -> Result<SteadyState> {
    // scan points are parallelized one level up; keeping the factorization
    // single-threaded also keeps its rounding independent of the pool size
    SEQUENTIAL_KERNELS.call_once(|| faer::set_global_parallelism(Par::Seq));

    let d = l.hilbert_dim();
    let n = d * d;
    let scale = l.max_abs();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::NonUniqueSteadyState { condition: f64::INFINITY });
    }
    let entries = constrained_real_system(l, scale);
    let norm = one_norm(&entries, n);
    if structurally_singular(&entries, n) {
        return Err(Error::NonUniqueSteadyState { condition: f64::INFINITY });
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| Error::Numerical(format!("sparse assembly failed: {e:?}")))?;
    let lu = match a.sp_lu() {
        Ok(lu) => lu,
        Err(_) => return Err(Error::NonUniqueSteadyState { condition: f64::INFINITY }),
    };
    let condition = norm * inverse_one_norm_estimate(&lu, n);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::NonUniqueSteadyState { condition });
    }
    let mut rhs = Mat::<f64>::zeros(n, 1);
    rhs[(0, 0)] = 1.0;
    let x = lu.solve(&rhs);
    let xs: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonUniqueSteadyState { condition: f64::INFINITY });
    }
    let raw = rho_from_real(&xs, d);
    let mut rho = (&raw + raw.adjoint()).scale(0.5);

    let eig = rho.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -EIGENVALUE_CLIP {
        return Err(Error::Numerical(format!(
            "steady state has eigenvalue {min_eigenvalue:.3e} below -{EIGENVALUE_CLIP:e}"
        )));
    }
    if min_eigenvalue < 0.0 {
        let clipped = eig.eigenvalues.map(|v| C64::new(v.max(0.0), 0.0));
        let v = &eig.eigenvectors;
        rho = v * CMatrix::from_diagonal(&clipped) * v.adjoint();
        let tr = rho.trace().re;
        rho /= C64::new(tr, 0.0);
        rho = (&rho + rho.adjoint()).scale(0.5);
    }
    let rho = Operator::new(l.layout.clone(), rho)?;
    let residual = l.apply(&rho)?.max_abs() / scale;
    Ok(SteadyState { rho, residual, min_eigenvalue, condition })
}

/// Observables extracted from a steady state.
#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho: Operator,
    pub n_h: f64,
    pub n_v: f64,
    /// `2κ (n_H + n_V)` in photons per second.
    pub count_rate: f64,
    /// Total population of the P1/2 manifold.
    pub p_excited: f64,
    pub residual: f64,
    pub min_eigenvalue: f64,
}

impl SteadyStateResult {
    pub fn photon_number(&self) -> f64 {
        self.n_h + self.n_v
    }
}

pub fn observables(rho: &Operator, params: &SystemParams) -> Result<SteadyStateResult> {
    let layout = rho.layout();
    let modes = ModeOperators::new(layout)?;
    let n_h = expectation(rho, &modes.n_h)?.re;
    let n_v = expectation(rho, &modes.n_v)?.re;
    let pe = embed(&excited_projector(), ATOM_SLOT, layout)?;
    let p_excited = expectation(rho, &pe)?.re;
    let min_eigenvalue = rho.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
    Ok(SteadyStateResult {
        rho: rho.clone(),
        n_h,
        n_v,
        count_rate: 2.0 * params.cavity.kappa * (n_h + n_v),
        p_excited,
        residual: 0.0,
        min_eigenvalue,
    })
}

/// Full Hamiltonian `H_a + H_d + H_c + H_jc` on the atom–cavity space.
pub fn build_hamiltonian(params: &SystemParams) -> Result<Operator> {
    params.validate()?;
    let layout = params.cavity.layout()?;
    let eps = drive_polarization(&params.geometry);
    let atom = &build_h_atom(params.delta_0, &params.zeeman)
        + &build_h_drive(params.omega_rabi()?, &eps);
    let h_atom = embed(&atom, ATOM_SLOT, &layout)?;
    let h_cav = build_h_cav(&params.cavity, &layout)?;
    let h_jc = build_h_jc(&params.cavity, &layout)?;
    Ok(&(&h_atom + &h_cav) + &h_jc)
}

pub fn system_liouvillian(params: &SystemParams) -> Result<Superoperator> {
    let h = build_hamiltonian(params)?;
    let layout = params.cavity.layout()?;
    let cs: Vec<Operator> = collapse_operators(params.gamma, &params.cavity, &layout)?
        .into_iter()
        .map(|c| c.op)
        .collect();
    build_liouvillian(&h, &cs)
}

/// Assemble, solve and evaluate observables for one parameter set.
pub fn solve(params: &SystemParams) -> Result<SteadyStateResult> {
    let l = system_liouvillian(params)?;
    let ss = solve_steady(&l)?;
    let mut out = observables(&ss.rho, params)?;
    out.residual = ss.residual;
    out.min_eigenvalue = ss.min_eigenvalue;
    if params.cavity.g == 0.0 {
        // modes decouple and relax to vacuum; drop LU roundoff
        out.n_h = 0.0;
        out.n_v = 0.0;
        out.count_rate = 0.0;
    }
    Ok(out)
}

/// Steady-state excited population of a closed two-level atom, computed with
/// the general Liouvillian machinery (`H = δ|e><e| − (Ω/2)(σ + σ†)`,
/// decay `√γ σ`).
pub fn solve_two_level(omega: f64, delta: f64, gamma: f64) -> Result<f64> {
    let layout = SpaceLayout::single(2)?;
    let mut sigma = CMatrix::zeros(2, 2);
    sigma[(0, 1)] = C64::new(1.0, 0.0);
    let sigma = Operator::new(layout.clone(), sigma)?;
    let mut h = CMatrix::zeros(2, 2);
    h[(1, 1)] = C64::new(delta, 0.0);
    h[(0, 1)] = C64::new(-0.5 * omega, 0.0);
    h[(1, 0)] = C64::new(-0.5 * omega, 0.0);
    let h = Operator::new(layout, h)?;
    let l = build_liouvillian(&h, &[sigma.scale(gamma.sqrt())])?;
    let ss = solve_steady(&l)?;
    Ok(ss.rho.matrix()[(1, 1)].re)
}

/// Outcome of re-solving at one extra photon per mode.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TruncationReport {
    pub n_max: usize,
    pub photons: f64,
    pub photons_next: f64,
    pub relative_change: f64,
    pub converged: bool,
}

pub fn converge_truncation(params: &SystemParams) -> Result<TruncationReport> {
    let n_max = params.cavity.n_max;
    if n_max + 1 > crate::cavity_model::MAX_FOCK_CUTOFF {
        return Err(Error::Domain(format!(
            "cannot check truncation at n_max = {n_max}: n_max + 1 exceeds the supported cutoff"
        )));
    }
    let base = solve(params)?.photon_number();
    let next = solve(&params.with_n_max(n_max + 1))?.photon_number();
    let scale = base.abs().max(next.abs());
    let relative_change = if scale == 0.0 { 0.0 } else { (next - base).abs() / scale };
    Ok(TruncationReport {
        n_max,
        photons: base,
        photons_next: next,
        relative_change,
        converged: relative_change <= TRUNCATION_TOL,
    })
}
