//! Dense complex operators on composite Hilbert spaces.
//!
//! Every operator carries the [`SpaceLayout`] it acts on, so that embedding a
//! single-subsystem operator into the full atom–cavity space and multiplying
//! operators from different spaces are checked rather than silently wrong.
//! The global subsystem order is `(atom, mode H, mode V)`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest supported total Hilbert-space dimension.
pub const MAX_TOTAL_DIM: usize = 256;

/// Slot of the atomic subsystem in the atom–cavity layout.
pub const ATOM_SLOT: usize = 0;
/// Slot of the H-polarized cavity mode.
pub const MODE_H_SLOT: usize = 1;
/// Slot of the V-polarized cavity mode.
pub const MODE_V_SLOT: usize = 2;

/// Number of atomic levels kept in the model.
pub const ATOM_DIM: usize = 4;

/// Ordered list of subsystem dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    dims: Vec<usize>,
}

impl SpaceLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Layout("layout needs at least one subsystem".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::Layout(format!("subsystem dimension {d} is not >= 1")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        if total > MAX_TOTAL_DIM {
            return Err(Error::Layout(format!(
                "total dimension {total} exceeds the supported maximum {MAX_TOTAL_DIM}"
            )));
        }
        Ok(Self { dims })
    }

    /// Layout of the four-level atom and two cavity modes truncated at
    /// `n_max` photons each.
    pub fn atom_cavity(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidTruncation(n_max));
        }
        Self::new(vec![ATOM_DIM, n_max + 1, n_max + 1])
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    fn concat(&self, other: &SpaceLayout) -> Result<SpaceLayout> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SpaceLayout::new(dims)
    }
}

/// A square complex matrix tagged with the layout it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(layout: SpaceLayout, matrix: CMatrix) -> Result<Self> {
        let n = layout.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Layout(format!(
                "matrix is {}x{} but layout {:?} has dimension {n}",
                matrix.nrows(),
                matrix.ncols(),
                layout.dims
            )));
        }
        Ok(Self { layout, matrix })
    }

    /// Operator on a single subsystem whose dimension is the matrix size.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let layout = SpaceLayout::single(matrix.nrows())?;
        Self::new(layout, matrix)
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        let n = layout.total();
        Self { layout: layout.clone(), matrix: CMatrix::identity(n, n) }
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        let n = layout.total();
        Self { layout: layout.clone(), matrix: CMatrix::zeros(n, n) }
    }

    /// Projector `|i><j|` on a single subsystem of dimension `dim`.
    pub fn outer(dim: usize, i: usize, j: usize) -> Result<Self> {
        let layout = SpaceLayout::single(dim)?;
        if i >= dim || j >= dim {
            return Err(Error::Layout(format!("index ({i}, {j}) outside dimension {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, j)] = C64::new(1.0, 0.0);
        Self::new(layout, m)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.scale(factor) }
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self { layout: self.layout.clone(), matrix: &self.matrix * factor }
    }

    /// Largest entry of `|M - M^†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Tensor product `self ⊗ other`; the layouts are concatenated.
    pub fn kron(&self, other: &Operator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { layout, matrix: self.matrix.kronecker(&other.matrix) })
    }

    fn check_same_layout(&self, other: &Operator) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::Layout(format!(
                "layouts differ: {:?} vs {:?}",
                self.layout.dims, other.layout.dims
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

// Operator arithmetic panics on layout mismatch; the fallible `try_*`
// variants are for inputs that are not known to agree.
impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator layouts must match")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator layouts must match")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operator layouts must match")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

/// Bosonic annihilation operator truncated at `n_max` photons
/// (dimension `n_max + 1`).
pub fn annihilation(n_max: usize) -> Result<Operator> {
    if n_max < 1 {
        return Err(Error::InvalidTruncation(n_max));
    }
    let dim = n_max + 1;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_matrix(m)
}

pub fn creation(n_max: usize) -> Result<Operator> {
    Ok(annihilation(n_max)?.adjoint())
}

pub fn number(n_max: usize) -> Result<Operator> {
    let a = annihilation(n_max)?;
    Ok(&a.adjoint() * &a)
}

/// Fock state `|n><n|` on a mode truncated at `n_max`.
pub fn fock_projector(n_max: usize, n: usize) -> Result<Operator> {
    if n_max < 1 {
        return Err(Error::InvalidTruncation(n_max));
    }
    Operator::outer(n_max + 1, n, n)
}

/// Embed a single-subsystem operator at `slot` of `layout`, padding every
/// other slot with the identity.
pub fn embed(op: &Operator, slot: usize, layout: &SpaceLayout) -> Result<Operator> {
    let dims = layout.dims();
    if slot >= dims.len() {
        return Err(Error::Layout(format!("slot {slot} outside layout {dims:?}")));
    }
    if op.dim() != dims[slot] {
        return Err(Error::Layout(format!(
            "operator of dimension {} cannot sit in slot {slot} of dimension {}",
            op.dim(),
            dims[slot]
        )));
    }
    let left: usize = dims[..slot].iter().product();
    let right: usize = dims[slot + 1..].iter().product();
    let mut m = op.matrix().clone();
    if left > 1 {
        m = CMatrix::identity(left, left).kronecker(&m);
    }
    if right > 1 {
        m = m.kronecker(&CMatrix::identity(right, right));
    }
    Operator::new(layout.clone(), m)
}

/// Trace tolerance accepted for a density matrix.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// `tr(rho · obs)`.
pub fn expectation(rho: &Operator, obs: &Operator) -> Result<C64> {
    rho.check_same_layout(obs)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > NORMALIZATION_TOL || tr.im.abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization(tr.re));
    }
    let (r, o) = (rho.matrix(), obs.matrix());
    let n = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += r[(i, k)] * o[(k, i)];
        }
    }
    Ok(acc)
}
