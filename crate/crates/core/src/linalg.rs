//! Complex matrix primitives, bipartite structure and entropy functionals.
//!
//! Matrices are `nalgebra` dense complex matrices. Bipartite indices follow the
//! Kronecker convention: basis state `|i_A, i_B>` sits at row `i_A * d_B + i_B`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Complex64 = nalgebra::Complex<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Entrywise tolerance on `M - M^dag` accepted when building a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Accepted deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this count as zero (`0 ln 0 = 0`, support tests).
pub const EIGEN_CUTOFF: f64 = 1e-12;
/// Weight of `rho` on a null direction of `sigma` that makes `S(rho||sigma)` infinite.
pub const SUPPORT_WEIGHT: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Diagonal complex matrix with the given real entries.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    let d = values.len();
    ComplexMatrix::from_fn(d, d, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
}

/// Largest entrywise modulus of `M - M^dag`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M^dag) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part of `m`.
fn hermitian_eigen(m: &ComplexMatrix) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    hermitian_part(m).symmetric_eigen()
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_fn(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let eig = hermitian_eigen(m);
    let v = &eig.eigenvectors;
    let mapped = DMatrix::from_fn(v.ncols(), v.ncols(), |i, j| {
        if i == j {
            c(f(eig.eigenvalues[i]), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    v * mapped * v.adjoint()
}

/// Kronecker product `a (x) b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Dimensions `(d_A, d_B)` of a bipartite system with `d = d_A d_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BipartiteDims {
    da: usize,
    db: usize,
}

impl BipartiteDims {
    /// Trivial factors (`d_A = 1` or `d_B = 1`) are allowed as long as `d >= 2`.
    pub fn new(da: usize, db: usize) -> Result<Self> {
        if da == 0 || db == 0 || da * db < 2 {
            return Err(Error::InvalidDims { da, db });
        }
        Ok(Self { da, db })
    }

    pub fn two_qubit() -> Self {
        Self { da: 2, db: 2 }
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    pub fn d(&self) -> usize {
        self.da * self.db
    }

    /// The same system with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self { da: self.db, db: self.da }
    }

    fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), found: m.nrows() });
        }
        Ok(())
    }
}

/// `Tr_B` of an arbitrary `d x d` matrix.
pub fn partial_trace_b_matrix(x: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    dims.check_square(x)?;
    let (da, db) = (dims.da, dims.db);
    Ok(ComplexMatrix::from_fn(da, da, |a, b| {
        (0..db).map(|j| x[(a * db + j, b * db + j)]).sum()
    }))
}

/// `Tr_A` of an arbitrary `d x d` matrix.
pub fn partial_trace_a_matrix(x: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    dims.check_square(x)?;
    let (da, db) = (dims.da, dims.db);
    Ok(ComplexMatrix::from_fn(db, db, |a, b| {
        (0..da).map(|i| x[(i * db + a, i * db + b)]).sum()
    }))
}

/// `Gamma(X) = Tr_B(X) (x) 1_B`.
pub fn gamma_map(x: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    Ok(tensor_product(&partial_trace_b_matrix(x, dims)?, &identity(dims.db)))
}

/// A validated quantum state: Hermitian, unit trace, positive semi-definite.
///
/// The spectrum is computed once at construction (after symmetrization) and
/// reused by every spectral functional.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    /// Eigenvalues in descending order.
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        if mat.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let defect = hermiticity_defect(&mat);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let mat = hermitian_part(&mat);
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(trace.re));
        }
        let mut eigenvalues: Vec<f64> = mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let min = *eigenvalues.last().unwrap();
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { mat, eigenvalues })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let p = 1.0 / d as f64;
        Self { mat: identity(d).scale(p), eigenvalues: vec![p; d] }
    }

    /// `diag(p_1, ..., p_d)`.
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        let mut eigenvalues = spectrum.probs().to_vec();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { mat: diag(spectrum.probs()), eigenvalues }
    }

    /// `|psi><psi|` for a unit vector `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    /// The maximally entangled state `(|00> + |11> + ...)/sqrt(n)` on `n x n`.
    pub fn bell(n: usize) -> Self {
        let amp = 1.0 / (n as f64).sqrt();
        let mut psi = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            psi[i * n + i] = c(amp, 0.0);
        }
        Self::pure(&psi).expect("Bell state is a valid pure state")
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The spectrum with roundoff negatives clipped to zero and renormalised.
    pub fn spectrum(&self) -> Spectrum {
        let clipped: Vec<f64> = self.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        Spectrum { probs: clipped.into_iter().map(|x| x / total).collect() }
    }

    /// `U rho U^dag`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Self::new(u * &self.mat * u.adjoint())
    }
}

/// A probability vector (point of the simplex).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    probs: Vec<f64>,
}

impl Spectrum {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSpectrum("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -1e-12) {
            return Err(Error::InvalidSpectrum(format!("entry {p} is negative or not finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidSpectrum(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(d: usize) -> Self {
        Self { probs: vec![1.0 / d as f64; d] }
    }

    /// `(1, 0, ..., 0)`.
    pub fn pure(d: usize) -> Self {
        let mut probs = vec![0.0; d];
        probs[0] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Entries in descending order.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.probs.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// `sum p^2`.
    pub fn purity(&self) -> f64 {
        self.power_sum(2)
    }

    pub fn power_sum(&self, k: u32) -> f64 {
        self.probs.iter().map(|p| p.max(0.0).powi(k as i32)).sum()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }
}

/// `-sum p ln p`, with entries below [`EIGEN_CUTOFF`] contributing zero.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > EIGEN_CUTOFF).map(|&p| -p * p.ln()).sum()
}

/// Reduced state on A.
pub fn partial_trace_b(rho: &DensityMatrix, dims: BipartiteDims) -> Result<DensityMatrix> {
    DensityMatrix::new(partial_trace_b_matrix(rho.matrix(), dims)?)
}

/// Reduced state on B.
pub fn partial_trace_a(rho: &DensityMatrix, dims: BipartiteDims) -> Result<DensityMatrix> {
    DensityMatrix::new(partial_trace_a_matrix(rho.matrix(), dims)?)
}

/// `S(rho) = -Tr rho ln rho` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(rho.eigenvalues()).max(0.0)
}

/// `Tr rho^2`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    matrix_power_trace(rho, 2)
}

/// `1 - Tr rho^2`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// `Tr rho^k` from the spectrum.
pub fn matrix_power_trace(rho: &DensityMatrix, k: u32) -> f64 {
    rho.eigenvalues().iter().map(|l| l.max(0.0).powi(k as i32)).sum()
}

/// `S(rho||sigma) = Tr rho (ln rho - ln sigma)`.
///
/// Returns `f64::INFINITY` when `rho` has weight above [`SUPPORT_WEIGHT`] on an
/// eigenvector of `sigma` whose eigenvalue is below [`EIGEN_CUTOFF`].
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let neg_entropy = -von_neumann_entropy(rho);
    let eig = hermitian_eigen(sigma.matrix());
    let mut cross = 0.0;
    for k in 0..sigma.dim() {
        let v = eig.eigenvectors.column(k);
        let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        let s = eig.eigenvalues[k];
        if s < EIGEN_CUTOFF {
            if weight > SUPPORT_WEIGHT {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * s.ln();
    }
    Ok(neg_entropy - cross)
}

/// Positive square root of a density matrix.
pub fn sqrt_psd(rho: &DensityMatrix) -> ComplexMatrix {
    hermitian_fn(rho.matrix(), |x| x.max(0.0).sqrt())
}

/// `F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho))`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(fidelity_with_sqrt(&sqrt_psd(rho), sigma.matrix()))
}

/// Fidelity against a fixed state whose square root is already known.
pub(crate) fn fidelity_with_sqrt(sqrt_rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let inner = sqrt_rho * sigma * sqrt_rho;
    let eig = hermitian_eigen(&inner);
    let f: f64 = eig.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).sum();
    f.clamp(0.0, 1.0)
}

/// Binary entropy `h(p) = -(p ln p + (1-p) ln(1-p))`, nonnegative.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// `H_k = sum_{j=1..k} 1/j`.
pub fn harmonic_number(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}
