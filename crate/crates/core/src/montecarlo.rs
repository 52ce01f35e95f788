//! Haar Monte Carlo estimators.
//!
//! Work is split into batches; batch `b` draws from `RngState::for_stream(seed, b)`
//! so results depend only on the configuration, never on thread scheduling.
//! Standard errors come from the spread of batch means.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::{sample_haar_unitary, RngState};
use crate::linalg::{
    c, fidelity_with_sqrt, gamma_map, hermitian_part, identity, linear_entropy, partial_trace_a, partial_trace_b,
    purity, sqrt_psd, tensor_product, von_neumann_entropy, BipartiteDims, Complex64, ComplexMatrix, DensityMatrix,
};
use crate::weingarten::{KrausChannel, SixthMomentOperands, SuperOperator};

/// Absolute slack added to matrix gates so exactly-constant integrands
/// (zero standard error) still compare equal after roundoff.
pub const MATRIX_GATE_FLOOR: f64 = 1e-10;

/// Slack on the per-sample entropy range check.
const ENTROPY_RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCConfig {
    pub samples: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub sigma_gate: f64,
}

impl MCConfig {
    /// `samples` split into 100 batches, 3-sigma gate.
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self { samples, seed, batch_size: samples.div_ceil(100).max(1), sigma_gate: 3.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_batch_size(self, batch_size: usize) -> Result<Self> {
        let cfg = Self { batch_size, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sigma(self, sigma_gate: f64) -> Result<Self> {
        let cfg = Self { sigma_gate, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 100 {
            return Err(Error::InvalidConfig(format!("samples must be at least 100, got {}", self.samples)));
        }
        if self.batch_size == 0 || self.batches() < 2 {
            return Err(Error::InvalidConfig(format!(
                "batch size {} leaves fewer than 2 batches",
                self.batch_size
            )));
        }
        if !(self.sigma_gate.is_finite() && self.sigma_gate > 0.0) {
            return Err(Error::InvalidConfig(format!("sigma gate must be positive, got {}", self.sigma_gate)));
        }
        Ok(())
    }

    pub fn batches(&self) -> usize {
        self.samples.div_ceil(self.batch_size)
    }

    fn batch_len(&self, b: usize) -> usize {
        self.batch_size.min(self.samples - b * self.batch_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MCEstimate {
    /// `(mean - reference) / std_error`. Differences within the absolute floor
    /// count as zero, so exactly constant integrands do not report roundoff as
    /// huge z-scores.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if diff.abs() <= MATRIX_GATE_FLOOR {
            0.0
        } else if self.std_error > 0.0 {
            diff / self.std_error
        } else {
            diff.signum() * f64::INFINITY
        }
    }

    /// `|mean - reference| <= sigma * SE` (with a tiny absolute floor).
    pub fn agrees_with(&self, reference: f64, sigma: f64) -> bool {
        (self.mean - reference).abs() <= sigma * self.std_error + MATRIX_GATE_FLOOR
    }

    /// `mean + sigma * SE >= bound`.
    pub fn at_least(&self, bound: f64, sigma: f64) -> bool {
        self.mean + sigma * self.std_error + MATRIX_GATE_FLOOR >= bound
    }

    /// `mean - sigma * SE <= bound`.
    pub fn at_most(&self, bound: f64, sigma: f64) -> bool {
        self.mean - sigma * self.std_error - MATRIX_GATE_FLOOR <= bound
    }
}

/// Entrywise estimate of a matrix-valued expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct MCMatrixEstimate {
    pub mean: ComplexMatrix,
    /// Standard error of each entry, `sqrt(se_re^2 + se_im^2)`.
    pub entry_se: DMatrix<f64>,
    pub max_entry_se: f64,
    pub samples: usize,
}

impl MCMatrixEstimate {
    /// Largest `|mean_ij - reference_ij| / (se_ij + floor)`.
    pub fn max_deviation(&self, reference: &ComplexMatrix) -> f64 {
        self.mean
            .iter()
            .zip(reference.iter())
            .zip(self.entry_se.iter())
            .map(|((m, r), se)| (m - r).norm() / (se + MATRIX_GATE_FLOOR))
            .fold(0.0, f64::max)
    }

    /// Every entry within `k * se_ij` of the reference (plus the absolute floor).
    pub fn agrees_with(&self, reference: &ComplexMatrix, k: f64) -> bool {
        reference.shape() == self.mean.shape()
            && self
                .mean
                .iter()
                .zip(reference.iter())
                .zip(self.entry_se.iter())
                .all(|((m, r), se)| (m - r).norm() <= k * se + MATRIX_GATE_FLOOR)
    }

    /// Replace the mean by its Hermitian part and average the mirrored errors.
    pub fn symmetrized(self) -> Self {
        let entry_se = (&self.entry_se + self.entry_se.transpose()) * 0.5;
        Self { mean: hermitian_part(&self.mean), max_entry_se: entry_se.max(), entry_se, samples: self.samples }
    }
}

/// Means and batch-means standard errors of a vector-valued sample function.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

impl VectorEstimate {
    pub fn component(&self, i: usize) -> MCEstimate {
        MCEstimate { mean: self.mean[i], std_error: self.std_error[i], samples: self.samples }
    }
}

/// Runs `sample` `cfg.samples` times, each call writing `len` values into the
/// provided buffer, and returns per-component means with batch-means errors.
pub fn estimate_vector<F>(cfg: &MCConfig, len: usize, sample: F) -> Result<VectorEstimate>
where
    F: Fn(&mut RngState, &mut [f64]) -> Result<()> + Sync,
{
    cfg.validate()?;
    let batch_sums: Vec<Vec<f64>> = (0..cfg.batches())
        .into_par_iter()
        .map(|b| {
            let mut rng = RngState::for_stream(cfg.seed, b as u64);
            let mut sums = vec![0.0; len];
            let mut buf = vec![0.0; len];
            for _ in 0..cfg.batch_len(b) {
                sample(&mut rng, &mut buf)?;
                for (s, v) in sums.iter_mut().zip(&buf) {
                    *s += v;
                }
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;

    let n = cfg.samples as f64;
    let nb = batch_sums.len() as f64;
    let mut mean = vec![0.0; len];
    for sums in &batch_sums {
        for (m, s) in mean.iter_mut().zip(sums) {
            *m += s;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    // weighted batch-means variance of the overall mean:
    // sum_b n_b^2 (mean_b - mean)^2 / N^2 * B/(B-1)
    let mut var = vec![0.0; len];
    for (b, sums) in batch_sums.iter().enumerate() {
        let nb_len = cfg.batch_len(b) as f64;
        for ((v, s), m) in var.iter_mut().zip(sums).zip(&mean) {
            let dev = s - nb_len * m;
            *v += dev * dev;
        }
    }
    let std_error = var.into_iter().map(|v| (v / (n * n) * nb / (nb - 1.0)).sqrt()).collect();
    Ok(VectorEstimate { mean, std_error, samples: cfg.samples })
}

/// Scalar version of [`estimate_vector`].
pub fn estimate_scalar<F>(cfg: &MCConfig, sample: F) -> Result<MCEstimate>
where
    F: Fn(&mut RngState) -> Result<f64> + Sync,
{
    let est = estimate_vector(cfg, 1, |rng, out| {
        out[0] = sample(rng)?;
        Ok(())
    })?;
    Ok(est.component(0))
}

/// Entrywise estimate of `E[sample]` for a `d x d` complex matrix.
pub fn estimate_matrix<F>(cfg: &MCConfig, d: usize, sample: F) -> Result<MCMatrixEstimate>
where
    F: Fn(&mut RngState) -> Result<ComplexMatrix> + Sync,
{
    let est = estimate_vector(cfg, 2 * d * d, |rng, out| {
        let m = sample(rng)?;
        for (k, z) in m.iter().enumerate() {
            out[2 * k] = z.re;
            out[2 * k + 1] = z.im;
        }
        Ok(())
    })?;
    let mean = ComplexMatrix::from_iterator(d, d, (0..d * d).map(|k| c(est.mean[2 * k], est.mean[2 * k + 1])));
    let entry_se = DMatrix::from_iterator(
        d,
        d,
        (0..d * d).map(|k| est.std_error[2 * k].hypot(est.std_error[2 * k + 1])),
    );
    Ok(MCMatrixEstimate { max_entry_se: entry_se.max(), mean, entry_se, samples: est.samples })
}

fn check_dims(rho: &DensityMatrix, dims: BipartiteDims) -> Result<()> {
    if rho.dim() != dims.d() {
        return Err(Error::DimensionMismatch { expected: dims.d(), found: rho.dim() });
    }
    Ok(())
}

/// One orbit point `U rho U^dag` with its two validated marginals.
struct OrbitSample {
    u: ComplexMatrix,
    a: DensityMatrix,
    b: DensityMatrix,
}

fn orbit_sample(rho: &DensityMatrix, dims: BipartiteDims, rng: &mut RngState) -> Result<OrbitSample> {
    let u = sample_haar_unitary(dims.d(), rng)?;
    let state = &u * rho.matrix() * u.adjoint();
    let moved = DensityMatrix::new(state).map_err(|e| invariant("orbit point", e))?;
    let a = partial_trace_b(&moved, dims).map_err(|e| invariant("marginal A", e))?;
    let b = partial_trace_a(&moved, dims).map_err(|e| invariant("marginal B", e))?;
    Ok(OrbitSample { u, a, b })
}

fn invariant(what: &str, err: Error) -> Error {
    Error::InvariantViolation(format!("{what}: {err}"))
}

fn checked_entropy(rho: &DensityMatrix, side: &str) -> Result<f64> {
    let s = von_neumann_entropy(rho);
    let ceiling = (rho.dim() as f64).ln();
    if !(-ENTROPY_RANGE_SLACK..=ceiling + ENTROPY_RANGE_SLACK).contains(&s) {
        return Err(Error::InvariantViolation(format!("S({side}) = {s} outside [0, ln {}]", rho.dim())));
    }
    Ok(s)
}

/// `E[S(Tr_B U rho U^dag)]`.
pub fn mc_average_entropy_a(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<MCEstimate> {
    check_dims(rho, dims)?;
    estimate_scalar(cfg, |rng| checked_entropy(&orbit_sample(rho, dims, rng)?.a, "A"))
}

/// `E[S(rho'_A) + S(rho'_B)]`.
pub fn mc_average_entropy_sum(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<MCEstimate> {
    check_dims(rho, dims)?;
    estimate_scalar(cfg, |rng| {
        let s = orbit_sample(rho, dims, rng)?;
        Ok(checked_entropy(&s.a, "A")? + checked_entropy(&s.b, "B")?)
    })
}

pub fn mc_average_linear_entropy_a(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<MCEstimate> {
    check_dims(rho, dims)?;
    estimate_scalar(cfg, |rng| Ok(linear_entropy(&orbit_sample(rho, dims, rng)?.a)))
}

pub fn mc_average_linear_entropy_b(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<MCEstimate> {
    check_dims(rho, dims)?;
    estimate_scalar(cfg, |rng| Ok(linear_entropy(&orbit_sample(rho, dims, rng)?.b)))
}

/// Orbit-averaged mutual information and its shift from the input state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QmiEstimate {
    pub average: MCEstimate,
    /// `E[I(A:B)_{rho'}] - I(A:B)_rho`.
    pub delta: f64,
}

pub fn mc_average_qmi(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<QmiEstimate> {
    check_dims(rho, dims)?;
    let s_ab = von_neumann_entropy(rho);
    let average = estimate_scalar(cfg, |rng| {
        let s = orbit_sample(rho, dims, rng)?;
        Ok(checked_entropy(&s.a, "A")? + checked_entropy(&s.b, "B")? - s_ab)
    })?;
    let delta = average.mean - crate::orbit::qmi(rho, dims)?;
    Ok(QmiEstimate { average, delta })
}

/// `E[F(rho', rho'_A (x) rho'_B)]`, evaluated as `F(rho, U^dag (rho'_A (x) rho'_B) U)`
/// so the square root of `rho` is computed once.
pub fn mc_average_fidelity(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<MCEstimate> {
    check_dims(rho, dims)?;
    let sqrt_rho = sqrt_psd(rho);
    estimate_scalar(cfg, |rng| {
        let s = orbit_sample(rho, dims, rng)?;
        let product = tensor_product(s.a.matrix(), s.b.matrix());
        Ok(fidelity_with_sqrt(&sqrt_rho, &(s.u.adjoint() * product * &s.u)))
    })
}

/// `E[rho'_A (x) rho'_B]`.
pub fn mc_product_average(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<MCMatrixEstimate> {
    check_dims(rho, dims)?;
    let est = estimate_matrix(cfg, dims.d(), |rng| {
        let s = orbit_sample(rho, dims, rng)?;
        Ok(tensor_product(s.a.matrix(), s.b.matrix()))
    })?;
    Ok(est.symmetrized())
}

/// `E[U^dag (rho'_A (x) rho'_B) U]`.
pub fn mc_pullback_average(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<MCMatrixEstimate> {
    check_dims(rho, dims)?;
    let est = estimate_matrix(cfg, dims.d(), |rng| {
        let s = orbit_sample(rho, dims, rng)?;
        Ok(s.u.adjoint() * tensor_product(s.a.matrix(), s.b.matrix()) * &s.u)
    })?;
    Ok(est.symmetrized())
}

/// Entrywise estimate of `E[U A U^dag B U X U^dag C U D U^dag]`.
pub fn mc_sixth_moment(ops: &SixthMomentOperands<'_>, cfg: &MCConfig) -> Result<MCMatrixEstimate> {
    let d = ops.dim()?;
    estimate_matrix(cfg, d, |rng| Ok(ops.integrand(&sample_haar_unitary(d, rng)?)))
}

/// Real and imaginary parts of a complex scalar estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexEstimate {
    pub re: MCEstimate,
    pub im: MCEstimate,
}

impl ComplexEstimate {
    pub fn agrees_with(&self, reference: Complex64, sigma: f64) -> bool {
        self.re.agrees_with(reference.re, sigma) && self.im.agrees_with(reference.im, sigma)
    }
}

/// `E[Tr(U A U^dag B U X U^dag C U D U^dag)]`.
pub fn mc_sixth_moment_trace(ops: &SixthMomentOperands<'_>, cfg: &MCConfig) -> Result<ComplexEstimate> {
    let d = ops.dim()?;
    let est = estimate_vector(cfg, 2, |rng, out| {
        let t = ops.integrand(&sample_haar_unitary(d, rng)?).trace();
        out[0] = t.re;
        out[1] = t.im;
        Ok(())
    })?;
    Ok(ComplexEstimate { re: est.component(0), im: est.component(1) })
}

/// `a_n = E[Tr(rho U^dag Gamma(U T U^dag)^n U)]` with `T = I/d_B - rho`.
pub fn mc_an(rho: &DensityMatrix, dims: BipartiteDims, n: u32, cfg: &MCConfig) -> Result<MCEstimate> {
    check_dims(rho, dims)?;
    if n == 0 {
        return Err(Error::InvalidConfig("series index n must be at least 1".into()));
    }
    let t = identity(dims.d()).unscale(dims.db() as f64) - rho.matrix();
    estimate_scalar(cfg, |rng| {
        let u = sample_haar_unitary(dims.d(), rng)?;
        let g = gamma_map(&(&u * &t * u.adjoint()), dims)?;
        let power = (1..n).fold(g.clone(), |acc, _| &acc * &g);
        Ok((rho.matrix() * u.adjoint() * power * &u).trace().re)
    })
}

/// `E[Tr E(U rho U^dag)^2]`.
pub fn mc_channel_purity(ch: &KrausChannel, rho: &DensityMatrix, cfg: &MCConfig) -> Result<MCEstimate> {
    if ch.input_dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: ch.input_dim(), found: rho.dim() });
    }
    estimate_scalar(cfg, |rng| {
        let moved = rho.conjugate(&sample_haar_unitary(rho.dim(), rng)?).map_err(|e| invariant("orbit point", e))?;
        let out = DensityMatrix::new(ch.apply(moved.matrix())).map_err(|e| invariant("channel output", e))?;
        Ok(purity(&out))
    })
}

/// `E[U^dag Xi(U X U^dag) U]`.
pub fn mc_twirl_second_moment<S>(phi: &S, x: &ComplexMatrix, cfg: &MCConfig) -> Result<MCMatrixEstimate>
where
    S: SuperOperator + Sync + ?Sized,
{
    let d = phi.dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.nrows() });
    }
    estimate_matrix(cfg, d, |rng| {
        let u = sample_haar_unitary(d, rng)?;
        Ok(u.adjoint() * phi.apply(&(&u * x * u.adjoint())) * &u)
    })
}

/// Side-by-side estimates of `E[S(rho'_A)]` and `E[S(rho'_B)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub entropy_a: MCEstimate,
    pub entropy_b: MCEstimate,
    /// `S_A - S_B`, with its error estimated from the paired samples.
    pub difference: MCEstimate,
}

/// Compares the two subsystem entropy averages. Exploratory only: whether they
/// coincide for `d_A = d_B` is an open question, so nothing here is gated.
pub fn mc_subsystem_symmetry(rho: &DensityMatrix, dims: BipartiteDims, cfg: &MCConfig) -> Result<SymmetryReport> {
    check_dims(rho, dims)?;
    let est = estimate_vector(cfg, 3, |rng, out| {
        let s = orbit_sample(rho, dims, rng)?;
        out[0] = checked_entropy(&s.a, "A")?;
        out[1] = checked_entropy(&s.b, "B")?;
        out[2] = out[0] - out[1];
        Ok(())
    })?;
    Ok(SymmetryReport { entropy_a: est.component(0), entropy_b: est.component(1), difference: est.component(2) })
}

/// `E[|Tr U|^2]` over `U(d)`; equals 1 for every `d`.
pub fn mc_trace_second_moment(d: usize, cfg: &MCConfig) -> Result<MCEstimate> {
    estimate_scalar(cfg, |rng| Ok(sample_haar_unitary(d, rng)?.trace().norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample_random_density;
    use crate::linalg::max_abs_diff;
    use crate::weingarten::{sixth_moment_integral, IdentityMap};

    fn cfg(samples: usize) -> MCConfig {
        MCConfig::new(samples, 42).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(MCConfig::new(99, 1).is_err());
        let c = MCConfig::new(1000, 1).unwrap();
        assert_eq!(c.batch_size, 10);
        assert_eq!(c.batches(), 100);
        assert!(c.with_batch_size(1000).is_err());
        assert!(c.with_batch_size(0).is_err());
        assert_eq!(c.with_batch_size(300).unwrap().batches(), 4);
        assert!(c.with_sigma(0.0).is_err());
        let odd = MCConfig::new(1001, 1).unwrap();
        assert_eq!((0..odd.batches()).map(|b| odd.batch_len(b)).sum::<usize>(), 1001);
    }

    #[test]
    fn engine_recovers_known_moments() {
        let est = estimate_scalar(&cfg(20_000), |rng| Ok(rng.complex_normal().norm_sqr())).unwrap();
        assert!(est.agrees_with(1.0, 4.0), "{est:?}");
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn reproducible_under_fixed_seed() {
        let rho = sample_random_density(4, 4, &mut RngState::new(1)).unwrap();
        let d = BipartiteDims::two_qubit();
        let a = mc_average_entropy_a(&rho, d, &cfg(500)).unwrap();
        let b = mc_average_entropy_a(&rho, d, &cfg(500)).unwrap();
        assert_eq!(a, b);
        let c2 = mc_average_entropy_a(&rho, d, &MCConfig::new(500, 43).unwrap()).unwrap();
        assert_ne!(a.mean, c2.mean);
    }

    #[test]
    fn maximally_mixed_orbit_is_a_point() {
        let d = BipartiteDims::two_qubit();
        let mixed = DensityMatrix::maximally_mixed(4);
        let s = mc_average_entropy_a(&mixed, d, &cfg(200)).unwrap();
        assert!((s.mean - 2f64.ln()).abs() < 1e-10 && s.std_error < 1e-10);
        let f = mc_average_fidelity(&mixed, d, &cfg(200)).unwrap();
        assert!((f.mean - 1.0).abs() < 1e-9);
        let q = mc_average_qmi(&mixed, d, &cfg(200)).unwrap();
        assert!(q.average.mean.abs() < 1e-9);
        let p = mc_product_average(&mixed, d, &cfg(200)).unwrap();
        assert!(max_abs_diff(&p.mean, &identity(4).scale(0.25)) < 1e-12);
    }

    #[test]
    fn identity_twirl_is_exact() {
        let mut rng = RngState::new(3);
        let x = crate::haar::ginibre(3, 3, &mut rng);
        let est = mc_twirl_second_moment(&IdentityMap(3), &x, &cfg(200)).unwrap();
        assert!(max_abs_diff(&est.mean, &x) < 1e-12);
        assert!(est.agrees_with(&x, 5.0));
    }

    #[test]
    fn constant_sixth_moment_has_no_error() {
        let mut rng = RngState::new(4);
        let id = identity(3);
        let b = crate::haar::ginibre(3, 3, &mut rng);
        let cc = crate::haar::ginibre(3, 3, &mut rng);
        let ops = SixthMomentOperands { a: &id, b: &b, c: &cc, d: &id, x: &id };
        let est = mc_sixth_moment(&ops, &cfg(200)).unwrap();
        assert!(est.max_entry_se < 1e-12);
        assert!(est.agrees_with(&sixth_moment_integral(&ops).unwrap(), 5.0));
    }

    #[test]
    fn se_scales_with_sample_count() {
        let rho = sample_random_density(4, 4, &mut RngState::new(5)).unwrap();
        let d = BipartiteDims::two_qubit();
        let small = mc_average_linear_entropy_a(&rho, d, &cfg(20_000)).unwrap();
        let large = mc_average_linear_entropy_a(&rho, d, &cfg(40_000)).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn an_rejects_zero() {
        let d = BipartiteDims::two_qubit();
        assert!(mc_an(&DensityMatrix::maximally_mixed(4), d, 0, &cfg(100)).is_err());
    }
}
