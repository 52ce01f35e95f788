//! Reproducible Haar sampling.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream)`, so a Monte
//! Carlo batch can rebuild its generator from its index alone.

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, Complex64, ComplexMatrix, DensityMatrix, Spectrum};

/// Seeded random stream. Identical `(seed, stream)` and call sequence give
/// identical samples.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::for_stream(seed, 0)
    }

    /// Independent stream `stream` of the generator keyed by `seed`.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Draw a standard complex Gaussian `(x + i y)/sqrt(2)`, `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut RngState) -> ComplexMatrix {
    // column-major fill keeps the draw order independent of nalgebra internals
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.complex_normal();
        }
    }
    m
}

/// Haar-distributed `U in U(d)`: QR of a Ginibre matrix with each column of Q
/// multiplied by the phase of the matching diagonal entry of R.
pub fn sample_haar_unitary(d: usize, rng: &mut RngState) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { min: 1, d });
    }
    let qr = ginibre(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        let phase = if norm > 0.0 { rjj / norm } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-random unit vector in `C^d`.
pub fn sample_pure_state(d: usize, rng: &mut RngState) -> Result<Vec<Complex64>> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { min: 1, d });
    }
    let v: DVector<Complex64> = ginibre(d, 1, rng).column(0).into_owned();
    let norm = v.norm();
    Ok(v.iter().map(|z| z / norm).collect())
}

/// Random state from the induced measure: `G G^dag / Tr(G G^dag)` with `G` a
/// `d x rank` Ginibre matrix, i.e. the reduction of a Haar pure state on
/// `C^d (x) C^rank`.
pub fn sample_random_density(d: usize, rank: usize, rng: &mut RngState) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { min: 1, d });
    }
    if rank == 0 {
        return Err(Error::InvalidConfig("rank must be at least 1".into()));
    }
    let g = ginibre(d, rank, rng);
    let w: DMatrix<Complex64> = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(w.unscale(tr))
}

/// Uniform point of the simplex `Delta_{d-1}` (flat Dirichlet via normalised
/// exponentials).
pub fn sample_simplex(d: usize, rng: &mut RngState) -> Result<Spectrum> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { min: 1, d });
    }
    let draws: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut rng.rng)).collect();
    let total: f64 = draws.iter().sum();
    Spectrum::new(draws.into_iter().map(|x| x / total).collect())
}
