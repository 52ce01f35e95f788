//! Closed-form orbit averages and bounds.
//!
//! Every function here depends on the state only through its dimensions and
//! the power sums `Tr rho^k` (or the full spectrum), so each is invariant
//! under `rho -> U rho U^dag`. `P` below always denotes the purity `Tr rho^2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    binary_entropy, harmonic_number, identity, matrix_power_trace, partial_trace_a, partial_trace_b, purity,
    relative_entropy, tensor_product, von_neumann_entropy, BipartiteDims, DensityMatrix, Spectrum, EIGEN_CUTOFF,
};

/// Slack used by the boolean bound checks in this module.
const BOUND_SLACK: f64 = 1e-9;

fn check_state(rho: &DensityMatrix, dims: BipartiteDims) -> Result<()> {
    if rho.dim() != dims.d() {
        return Err(Error::DimensionMismatch { expected: dims.d(), found: rho.dim() });
    }
    Ok(())
}

fn check_spectrum(spectrum: &Spectrum, dims: BipartiteDims) -> Result<()> {
    if spectrum.len() != dims.d() {
        return Err(Error::DimensionMismatch { expected: dims.d(), found: spectrum.len() });
    }
    Ok(())
}

fn require_d3(dims: BipartiteDims) -> Result<()> {
    if dims.d() < 3 {
        return Err(Error::DegenerateDimension { k: 3, d: dims.d() });
    }
    Ok(())
}

/// `N_d = (d^2 - 1)(d^2 - 4)`.
fn n_d(d: f64) -> f64 {
    (d * d - 1.0) * (d * d - 4.0)
}

fn check_page(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::PageOrder { m, n });
    }
    Ok(())
}

/// Page's average entanglement entropy of an `m x n` Haar pure state,
/// `H_{mn} - H_n - (m-1)/(2n)` for `1 <= m <= n`.
pub fn page_average_entropy(m: usize, n: usize) -> Result<f64> {
    Ok(diagonal_average_entropy(m, n)? - average_coherence(m, n)?)
}

/// Average entropy of the diagonal part of the reduced state, `H_{mn} - H_n`.
pub fn diagonal_average_entropy(m: usize, n: usize) -> Result<f64> {
    check_page(m, n)?;
    Ok(harmonic_number(m * n) - harmonic_number(n))
}

/// Average relative-entropy coherence of the reduced state, `(m-1)/(2n)`.
pub fn average_coherence(m: usize, n: usize) -> Result<f64> {
    check_page(m, n)?;
    Ok((m as f64 - 1.0) / (2.0 * n as f64))
}

/// First series coefficient as a function of purity.
pub fn a1_from_purity(p: f64, dims: BipartiteDims) -> f64 {
    let (da, db, d) = (dims.da() as f64, dims.db() as f64, dims.d() as f64);
    (da - 1.0) / (d * d - 1.0) * ((1.0 + d * db) - (d + db) * p)
}

/// `a_1 = (d_A - 1)/(d^2 - 1) [(1 + d d_B) - (d + d_B) P]`.
pub fn a1(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    check_state(rho, dims)?;
    Ok(a1_from_purity(purity(rho), dims))
}

/// The three auxiliary coefficients assembling `a_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fgh {
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

/// `f, g, h` as functions of purity; only `f` depends on the state.
pub fn fgh_from_purity(p: f64, dims: BipartiteDims) -> Result<Fgh> {
    require_d3(dims)?;
    let (da, db, d) = (dims.da() as f64, dims.db() as f64, dims.d() as f64);
    let n = n_d(d);
    let (da2, db2) = (da * da - 1.0, db * db - 1.0);
    let f = da * da2 * db2 / n * (da + db * p - 2.0) + (d * d - 2.0 * da * da - 2.0) * db2 / n * (da - 1.0).powi(2);
    let g = 2.0 * d * (da - 1.0) * da2 * db2 / n;
    let h = da2 * (da * da - 4.0) * db * db / n;
    Ok(Fgh { f, g, h })
}

pub fn fgh(rho: &DensityMatrix, dims: BipartiteDims) -> Result<Fgh> {
    check_state(rho, dims)?;
    fgh_from_purity(purity(rho), dims)
}

/// `a_2` from purity `p` and cubic power sum `p3 = Tr rho^3`.
pub fn a2_from_moments(p: f64, p3: f64, dims: BipartiteDims) -> Result<f64> {
    let Fgh { f, g, h } = fgh_from_purity(p, dims)?;
    let db = dims.db() as f64;
    Ok((f + g / db + h / (db * db)) - (g + 2.0 * h / db) * p + h * p3)
}

/// `a_2 = (f + g/d_B + h/d_B^2) - (g + 2h/d_B) P + h Tr rho^3`.
pub fn a2(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    check_state(rho, dims)?;
    a2_from_moments(purity(rho), matrix_power_trace(rho, 3), dims)
}

/// A lower bound on the average subsystem entropy, capped at `ln d_A`.
///
/// `clamped` is set when the raw value exceeded the ceiling, which signals an
/// inconsistency in the bound rather than a property of the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBound {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
}

impl EntropyBound {
    fn capped(raw: f64, ceiling: f64) -> Self {
        Self { value: raw.min(ceiling), raw, clamped: raw > ceiling + 1e-12 }
    }
}

/// `a_1 + a_2/2`, the first two terms of the entropy series.
pub fn entropy_lower_bound_truncated(rho: &DensityMatrix, dims: BipartiteDims) -> Result<EntropyBound> {
    let raw = a1(rho, dims)? + a2(rho, dims)? / 2.0;
    Ok(EntropyBound::capped(raw, (dims.da() as f64).ln()))
}

/// `-ln(1 - a_1)`, from `a_n >= a_1^n`.
pub fn entropy_lower_bound_log(rho: &DensityMatrix, dims: BipartiteDims) -> Result<EntropyBound> {
    let raw = -(1.0 - a1(rho, dims)?).ln();
    Ok(EntropyBound::capped(raw, (dims.da() as f64).ln()))
}

/// Exact average of `1 - Tr (rho'_A)^2` over the orbit.
pub fn average_linear_entropy_a(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    check_state(rho, dims)?;
    Ok(linear_entropy_average(1.0 - purity(rho), dims.da() as f64, dims.db() as f64))
}

/// Exact average of `1 - Tr (rho'_B)^2` over the orbit.
pub fn average_linear_entropy_b(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    check_state(rho, dims)?;
    Ok(linear_entropy_average(1.0 - purity(rho), dims.db() as f64, dims.da() as f64))
}

pub fn average_linear_entropy_sum(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    check_state(rho, dims)?;
    let (da, db) = (dims.da() as f64, dims.db() as f64);
    let d = da * db;
    let sl = 1.0 - purity(rho);
    Ok(2.0 * (da - 1.0) * (db - 1.0) / (d + 1.0) + (da + db) / (d + 1.0) * sl)
}

/// `(d_A-1)(d_B-1)/(d+1) + (d d_keep - d_other)/(d^2-1) S_L`.
fn linear_entropy_average(sl: f64, keep: f64, other: f64) -> f64 {
    let d = keep * other;
    (keep - 1.0) * (other - 1.0) / (d + 1.0) + (d * keep - other) / (d * d - 1.0) * sl
}

/// Coefficients of `E[U^dag (rho'_A (x) rho'_B) U] = c0 I + c1 rho + c2 rho^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl CCoefficients {
    /// `c0 + c1 x + c2 x^2`, the image of an eigenvalue.
    pub fn map_eigenvalue(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x + self.c2 * x * x
    }
}

pub fn c_coefficients_from_purity(p: f64, dims: BipartiteDims) -> Result<CCoefficients> {
    require_d3(dims)?;
    let (da, db, d) = (dims.da() as f64, dims.db() as f64, dims.d() as f64);
    let n = n_d(d);
    let (da2, db2) = (da * da - 1.0, db * db - 1.0);
    Ok(CCoefficients {
        c0: da2 * db2 / n * (d - 2.0 * p),
        c1: (d * d * (da * da + db * db - 6.0) + 4.0) / n,
        c2: 2.0 * d * da2 * db2 / n,
    })
}

pub fn c_coefficients(rho: &DensityMatrix, dims: BipartiteDims) -> Result<CCoefficients> {
    check_state(rho, dims)?;
    c_coefficients_from_purity(purity(rho), dims)
}

/// Every scalar coefficient attached to a state at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl OrbitCoefficients {
    pub fn new(rho: &DensityMatrix, dims: BipartiteDims) -> Result<Self> {
        let Fgh { f, g, h } = fgh(rho, dims)?;
        let CCoefficients { c0, c1, c2 } = c_coefficients(rho, dims)?;
        Ok(Self { a1: a1(rho, dims)?, a2: a2(rho, dims)?, f, g, h, c0, c1, c2 })
    }
}

/// `c0 I + c1 rho + c2 rho^2`, the orbit average of the product of marginals
/// pulled back by `U`.
pub fn pullback_product_average(rho: &DensityMatrix, dims: BipartiteDims) -> Result<DensityMatrix> {
    let c = c_coefficients(rho, dims)?;
    let r = rho.matrix();
    DensityMatrix::new(identity(dims.d()).scale(c.c0) + r.scale(c.c1) + (r * r).scale(c.c2))
}

/// Spectrum of [`pullback_product_average`] for a state with spectrum `lambda`.
pub fn pullback_spectrum(spectrum: &Spectrum, dims: BipartiteDims) -> Result<Vec<f64>> {
    check_spectrum(spectrum, dims)?;
    let c = c_coefficients_from_purity(spectrum.purity(), dims)?;
    Ok(spectrum.probs().iter().map(|&x| c.map_eigenvalue(x)).collect())
}

/// `I(A:B) = S(rho_A) + S(rho_B) - S(rho_AB)`.
pub fn qmi(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    check_state(rho, dims)?;
    let ra = partial_trace_b(rho, dims)?;
    let rb = partial_trace_a(rho, dims)?;
    Ok(von_neumann_entropy(&ra) + von_neumann_entropy(&rb) - von_neumann_entropy(rho))
}

/// `I(A:B) = S(rho || rho_A (x) rho_B)`, the relative-entropy form.
pub fn qmi_relative(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    check_state(rho, dims)?;
    let ra = partial_trace_b(rho, dims)?;
    let rb = partial_trace_a(rho, dims)?;
    let product = DensityMatrix::new(tensor_product(ra.matrix(), rb.matrix()))?;
    relative_entropy(rho, &product)
}

/// `S(rho || c0 I + c1 rho + c2 rho^2)`, a lower bound on the orbit-averaged
/// mutual information.
pub fn qmi_lower_bound(rho: &DensityMatrix, dims: BipartiteDims) -> Result<f64> {
    let sigma = pullback_product_average(rho, dims)?;
    relative_entropy(rho, &sigma)
}

/// A two-sided estimate; `value_or_estimate` carries the exact value or an MC
/// estimate when one is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub value_or_estimate: Option<f64>,
}

impl BoundsReport {
    pub fn is_ordered(&self) -> bool {
        self.lower <= self.upper + BOUND_SLACK
    }

    pub fn with_estimate(self, estimate: f64) -> Self {
        Self { value_or_estimate: Some(estimate), ..self }
    }
}

/// Bounds on the orbit average of `F(rho', rho'_A (x) rho'_B)`:
/// `c0 + c1 Tr rho^2 + c2 Tr rho^3 <= E[F] <= F(rho, c0 I + c1 rho + c2 rho^2)`.
pub fn fidelity_bounds(rho: &DensityMatrix, dims: BipartiteDims) -> Result<BoundsReport> {
    check_state(rho, dims)?;
    fidelity_bounds_spectral(&rho.spectrum(), dims)
}

/// [`fidelity_bounds`] evaluated on a spectrum; `rho` and its pullback commute,
/// so the upper bound is `sum_j sqrt(lambda_j sigma_j)`.
pub fn fidelity_bounds_spectral(spectrum: &Spectrum, dims: BipartiteDims) -> Result<BoundsReport> {
    check_spectrum(spectrum, dims)?;
    let c = c_coefficients_from_purity(spectrum.purity(), dims)?;
    let lower = c.c0 + c.c1 * spectrum.purity() + c.c2 * spectrum.power_sum(3);
    let upper: f64 = spectrum
        .probs()
        .iter()
        .filter(|&&x| x > EIGEN_CUTOFF)
        .map(|&x| (x * c.map_eigenvalue(x)).sqrt())
        .sum();
    Ok(BoundsReport { lower, upper: upper.min(1.0), value_or_estimate: None })
}

/// Bounds on `E[S(rho'_A) + S(rho'_B)]`:
/// `S(rho) + S(rho || sigma) <= E[S_A + S_B] <= S(sigma)` with `sigma` the pullback average.
pub fn sum_entropy_bounds(rho: &DensityMatrix, dims: BipartiteDims) -> Result<BoundsReport> {
    let sigma = pullback_product_average(rho, dims)?;
    let lower = von_neumann_entropy(rho) + relative_entropy(rho, &sigma)?;
    Ok(BoundsReport { lower, upper: von_neumann_entropy(&sigma), value_or_estimate: None })
}

/// Spectral form of [`sum_entropy_bounds`]: `lower = -sum lambda ln sigma`,
/// `upper = S(sigma)`.
pub fn sum_entropy_bounds_spectral(spectrum: &Spectrum, dims: BipartiteDims) -> Result<BoundsReport> {
    let sigma = pullback_spectrum(spectrum, dims)?;
    let lower: f64 = spectrum
        .probs()
        .iter()
        .zip(&sigma)
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &s)| -x * s.ln())
        .sum();
    let upper = crate::linalg::shannon_entropy(&sigma);
    Ok(BoundsReport { lower, upper, value_or_estimate: None })
}

/// Width of the sum-entropy sandwich, `S(sigma) + sum lambda ln sigma`.
pub fn entropy_gap(spectrum: &Spectrum, dims: BipartiteDims) -> Result<f64> {
    let b = sum_entropy_bounds_spectral(spectrum, dims)?;
    Ok(b.upper - b.lower)
}

/// Largest mutual information on the orbit, `ln d - S(Lambda)`, for `d_A = d_B`.
pub fn max_qmi(spectrum: &Spectrum, dims: BipartiteDims) -> Result<f64> {
    if dims.da() != dims.db() {
        return Err(Error::UnbalancedDims { da: dims.da(), db: dims.db() });
    }
    check_spectrum(spectrum, dims)?;
    Ok((dims.d() as f64).ln() - spectrum.entropy())
}

fn two_qubit_sorted(spectrum: &Spectrum) -> Result<[f64; 4]> {
    let v = spectrum.sorted_desc();
    v.try_into().map_err(|v: Vec<f64>| Error::DimensionMismatch { expected: 4, found: v.len() })
}

/// Smallest mutual information on a two-qubit orbit,
/// `h(l1 + l2) + h(l1 + l3) - S(Lambda)`.
pub fn min_qmi_two_qubit(spectrum: &Spectrum) -> Result<f64> {
    let [l1, l2, l3, _] = two_qubit_sorted(spectrum)?;
    Ok(binary_entropy(l1 + l2) + binary_entropy(l1 + l3) - spectrum.entropy())
}

/// Whether smallest marginal eigenvalues `(lam_a, lam_b)` are compatible with a
/// two-qubit spectrum (Bravyi's inequalities).
pub fn bravyi_compatible(spectrum: &Spectrum, lam_a_min: f64, lam_b_min: f64) -> Result<bool> {
    let [l1, l2, l3, l4] = two_qubit_sorted(spectrum)?;
    let eps = BOUND_SLACK;
    Ok(lam_a_min.min(lam_b_min) >= l3 + l4 - eps
        && lam_a_min + lam_b_min >= l2 + l3 + 2.0 * l4 - eps
        && (lam_a_min - lam_b_min).abs() <= (l1 - l3).min(l2 - l4) + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_haar_unitary, sample_random_density, sample_simplex, RngState};
    use std::f64::consts::LN_2;

    fn two_qubit() -> BipartiteDims {
        BipartiteDims::two_qubit()
    }

    fn diag_state(p: &[f64]) -> DensityMatrix {
        DensityMatrix::from_spectrum(&Spectrum::new(p.to_vec()).unwrap())
    }

    fn pure4() -> DensityMatrix {
        diag_state(&[1.0, 0.0, 0.0, 0.0])
    }

    #[test]
    fn page_values() {
        for n in 1..6 {
            assert!(page_average_entropy(1, n).unwrap().abs() < 1e-15);
            assert!(diagonal_average_entropy(1, n).unwrap().abs() < 1e-15);
            assert_eq!(average_coherence(1, n).unwrap(), 0.0);
        }
        assert!((page_average_entropy(2, 2).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((diagonal_average_entropy(2, 2).unwrap() - 7.0 / 12.0).abs() < 1e-14);
        assert_eq!(average_coherence(2, 2).unwrap(), 0.25);
        for (m, n) in [(2, 3), (3, 3), (2, 7), (4, 5)] {
            let gap = diagonal_average_entropy(m, n).unwrap() - page_average_entropy(m, n).unwrap();
            assert!((gap - (m as f64 - 1.0) / (2.0 * n as f64)).abs() < 1e-14);
        }
        assert_eq!(page_average_entropy(3, 2), Err(Error::PageOrder { m: 3, n: 2 }));
        assert!(page_average_entropy(0, 2).is_err());
    }

    #[test]
    fn a1_two_qubit_form() {
        let mut rng = RngState::new(1);
        for _ in 0..20 {
            let rho = sample_random_density(4, 3, &mut rng).unwrap();
            let p = purity(&rho);
            assert!((a1(&rho, two_qubit()).unwrap() - (0.6 - 0.4 * p)).abs() < 1e-14);
        }
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((a1(&mixed, two_qubit()).unwrap() - 0.5).abs() < 1e-15);
        let dims = BipartiteDims::new(1, 4).unwrap();
        assert_eq!(a1(&pure4(), dims).unwrap(), 0.0);
        assert!(a1(&DensityMatrix::maximally_mixed(3), two_qubit()).is_err());
    }

    #[test]
    fn fgh_edge_cases() {
        let rho = pure4();
        assert_eq!(fgh(&rho, two_qubit()).unwrap().h, 0.0);
        let z = fgh(&rho, BipartiteDims::new(1, 4).unwrap()).unwrap();
        assert_eq!((z.f, z.g, z.h), (0.0, 0.0, 0.0));
        assert!(fgh_from_purity(1.0, BipartiteDims::new(1, 2).unwrap()).is_err());
    }

    #[test]
    fn a2_two_qubit_form() {
        let mut rng = RngState::new(2);
        for _ in 0..20 {
            let rho = sample_random_density(4, 4, &mut rng).unwrap();
            let p = purity(&rho);
            assert!((a2(&rho, two_qubit()).unwrap() - (0.3 - 0.2 * p)).abs() < 1e-14);
        }
        assert!((a2(&pure4(), two_qubit()).unwrap() - 0.1).abs() < 1e-15);
        assert!((a2(&DensityMatrix::maximally_mixed(4), two_qubit()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn entropy_lower_bounds_two_qubit() {
        let d = two_qubit();
        let pure = entropy_lower_bound_truncated(&pure4(), d).unwrap();
        assert!((pure.value - 0.25).abs() < 1e-14 && !pure.clamped);
        let mixed = DensityMatrix::maximally_mixed(4);
        let t = entropy_lower_bound_truncated(&mixed, d).unwrap();
        assert!((t.raw - 0.625).abs() < 1e-14);
        assert!(t.value <= LN_2);

        let log = entropy_lower_bound_log(&mixed, d).unwrap();
        assert!((log.value - LN_2).abs() < 1e-14);
        assert!(!log.clamped);
        let log_pure = entropy_lower_bound_log(&pure4(), d).unwrap();
        assert!((log_pure.value + 0.8f64.ln()).abs() < 1e-14);
        assert!((log_pure.value - 0.2231).abs() < 1e-4);
        let trivial = entropy_lower_bound_log(&pure4(), BipartiteDims::new(1, 4).unwrap()).unwrap();
        assert_eq!(trivial.value, 0.0);
    }

    #[test]
    fn clamp_flags_bounds_above_the_ceiling() {
        let b = EntropyBound::capped(0.75, LN_2);
        assert!(b.clamped);
        assert_eq!(b.value, LN_2);
        assert_eq!(b.raw, 0.75);
    }

    #[test]
    fn linear_entropy_averages() {
        let d = two_qubit();
        let mut rng = RngState::new(3);
        for _ in 0..10 {
            let rho = sample_random_density(4, 2, &mut rng).unwrap();
            let sl = 1.0 - purity(&rho);
            let a = average_linear_entropy_a(&rho, d).unwrap();
            assert!((a - (0.2 + 0.4 * sl)).abs() < 1e-14);
            let s = average_linear_entropy_sum(&rho, d).unwrap();
            assert!((s - (0.4 + 0.8 * sl)).abs() < 1e-14);
        }
        assert!((average_linear_entropy_a(&pure4(), d).unwrap() - 0.2).abs() < 1e-15);
        assert!((average_linear_entropy_sum(&pure4(), d).unwrap() - 0.4).abs() < 1e-15);

        for (da, db) in [(2, 3), (3, 2), (3, 4)] {
            let dims = BipartiteDims::new(da, db).unwrap();
            let mixed = DensityMatrix::maximally_mixed(dims.d());
            assert!((average_linear_entropy_a(&mixed, dims).unwrap() - (1.0 - 1.0 / da as f64)).abs() < 1e-14);
            assert!((average_linear_entropy_b(&mixed, dims).unwrap() - (1.0 - 1.0 / db as f64)).abs() < 1e-14);
            let rho = sample_random_density(dims.d(), 2, &mut rng).unwrap();
            let sum = average_linear_entropy_a(&rho, dims).unwrap() + average_linear_entropy_b(&rho, dims).unwrap();
            assert!((sum - average_linear_entropy_sum(&rho, dims).unwrap()).abs() < 1e-12);
            // unequal factors: sides differ for mixed states, larger side has larger average
            let diff = average_linear_entropy_a(&rho, dims).unwrap() - average_linear_entropy_b(&rho, dims).unwrap();
            assert_eq!(diff > 0.0, da > db);
        }
    }

    #[test]
    fn c_coefficients_two_qubit_and_fixed_point() {
        let mut rng = RngState::new(4);
        for _ in 0..10 {
            let rho = sample_random_density(4, 4, &mut rng).unwrap();
            let p = purity(&rho);
            let c = c_coefficients(&rho, two_qubit()).unwrap();
            assert!((c.c0 - (2.0 - p) / 10.0).abs() < 1e-14);
            assert!((c.c1 - 0.2).abs() < 1e-14);
            assert!((c.c2 - 0.4).abs() < 1e-14);
        }
        for (da, db) in [(2, 2), (2, 3), (3, 3), (3, 2)] {
            let dims = BipartiteDims::new(da, db).unwrap();
            let d = dims.d() as f64;
            let c = c_coefficients_from_purity(1.0 / d, dims).unwrap();
            assert!((c.c0 + c.c1 / d + c.c2 / (d * d) - 1.0 / d).abs() < 1e-14);
            let rho = sample_random_density(dims.d(), 2, &mut rng).unwrap();
            let p = purity(&rho);
            let c = c_coefficients(&rho, dims).unwrap();
            assert!((d * c.c0 + c.c1 + c.c2 * p - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn pullback_average_properties() {
        let mixed = DensityMatrix::maximally_mixed(6);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let out = pullback_product_average(&mixed, dims).unwrap();
        assert!(crate::linalg::max_abs_diff(out.matrix(), mixed.matrix()) < 1e-14);

        let spec = Spectrum::new(vec![0.5, 0.3, 0.15, 0.05]).unwrap();
        let rho = DensityMatrix::from_spectrum(&spec);
        let out = pullback_product_average(&rho, two_qubit()).unwrap();
        let expected = pullback_spectrum(&spec, two_qubit()).unwrap();
        for (j, e) in expected.iter().enumerate() {
            assert!((out.matrix()[(j, j)].re - e).abs() < 1e-14);
        }
    }

    #[test]
    fn qmi_examples() {
        let d = two_qubit();
        let bell = DensityMatrix::bell(2);
        assert!((qmi(&bell, d).unwrap() - 2.0 * LN_2).abs() < 1e-10);
        assert!((qmi_relative(&bell, d).unwrap() - 2.0 * LN_2).abs() < 1e-8);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!(qmi(&mixed, d).unwrap().abs() < 1e-12);
        let product = DensityMatrix::new(tensor_product(
            &crate::linalg::diag(&[0.3, 0.7]),
            &crate::linalg::diag(&[0.6, 0.4]),
        ))
        .unwrap();
        assert!(qmi(&product, d).unwrap().abs() < 1e-12);

        let mut rng = RngState::new(5);
        for (da, db) in [(2, 2), (2, 3)] {
            let dims = BipartiteDims::new(da, db).unwrap();
            let rho = sample_random_density(dims.d(), dims.d(), &mut rng).unwrap();
            assert!((qmi(&rho, dims).unwrap() - qmi_relative(&rho, dims).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn qmi_lower_bound_examples() {
        let d = two_qubit();
        assert!(qmi_lower_bound(&DensityMatrix::maximally_mixed(4), d).unwrap().abs() < 1e-12);
        let bell = DensityMatrix::bell(2);
        let v = qmi_lower_bound(&bell, d).unwrap();
        assert!((v + 0.7f64.ln()).abs() < 1e-9);
        assert!((v - 0.3567).abs() < 1e-4);
    }

    #[test]
    fn fidelity_bounds_examples() {
        let d = two_qubit();
        // at I/4 the lower bound is Tr(rho sigma) = 1/4 while the upper bound is F(rho, rho) = 1
        let mixed = fidelity_bounds(&DensityMatrix::maximally_mixed(4), d).unwrap();
        assert!((mixed.lower - 0.25).abs() < 1e-14 && (mixed.upper - 1.0).abs() < 1e-14);
        let pure = fidelity_bounds(&pure4(), d).unwrap();
        assert!((pure.lower - 0.7).abs() < 1e-14);
        assert!((pure.upper - 0.7f64.sqrt()).abs() < 1e-14);
        assert!(pure.is_ordered());

        // spectral shortcut agrees with the matrix fidelity
        let mut rng = RngState::new(6);
        let rho = sample_random_density(4, 4, &mut rng).unwrap();
        let sigma = pullback_product_average(&rho, d).unwrap();
        let direct = crate::linalg::fidelity(&rho, &sigma).unwrap();
        assert!((fidelity_bounds(&rho, d).unwrap().upper - direct).abs() < 1e-9);
    }

    #[test]
    fn sum_entropy_bounds_examples() {
        let d = two_qubit();
        let mixed = sum_entropy_bounds(&DensityMatrix::maximally_mixed(4), d).unwrap();
        assert!((mixed.lower - 4f64.ln()).abs() < 1e-12);
        assert!((mixed.upper - 4f64.ln()).abs() < 1e-12);

        let pure = sum_entropy_bounds(&pure4(), d).unwrap();
        assert!((pure.lower + 0.7f64.ln()).abs() < 1e-9);
        let upper = -0.3 * 0.1f64.ln() - 0.7 * 0.7f64.ln();
        assert!((pure.upper - upper).abs() < 1e-9);
        assert!((pure.upper - 0.9404).abs() < 1e-4);

        let mut rng = RngState::new(7);
        let rho = sample_random_density(4, 3, &mut rng).unwrap();
        let m = sum_entropy_bounds(&rho, d).unwrap();
        let s = sum_entropy_bounds_spectral(&rho.spectrum(), d).unwrap();
        assert!((m.lower - s.lower).abs() < 1e-9 && (m.upper - s.upper).abs() < 1e-9);
        assert!(m.is_ordered());
        assert!(m.upper <= 4f64.ln() + 1e-12);
    }

    #[test]
    fn entropy_gap_corners() {
        let d = two_qubit();
        assert!(entropy_gap(&Spectrum::uniform(4), d).unwrap().abs() < 1e-14);
        let corner = entropy_gap(&Spectrum::pure(4), d).unwrap();
        let expected = -0.3 * 0.1f64.ln() + 0.3 * 0.7f64.ln();
        assert!((corner - expected).abs() < 1e-12);
        assert!((corner - 0.58).abs() < 5e-3);

        let mut rng = RngState::new(8);
        for _ in 0..1000 {
            let s = sample_simplex(4, &mut rng).unwrap();
            let f = entropy_gap(&s, d).unwrap();
            assert!(f >= -1e-9 && f <= corner + 1e-6, "F = {f}");
        }
    }

    #[test]
    fn max_and_min_qmi() {
        let d = two_qubit();
        assert!(max_qmi(&Spectrum::uniform(4), d).unwrap().abs() < 1e-14);
        assert!((max_qmi(&Spectrum::pure(4), d).unwrap() - 4f64.ln()).abs() < 1e-14);
        let half = Spectrum::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!((max_qmi(&half, d).unwrap() - LN_2).abs() < 1e-14);
        assert!(max_qmi(&Spectrum::uniform(6), BipartiteDims::new(2, 3).unwrap()).is_err());

        assert!(min_qmi_two_qubit(&Spectrum::uniform(4)).unwrap().abs() < 1e-14);
        assert!(min_qmi_two_qubit(&Spectrum::pure(4)).unwrap().abs() < 1e-14);
        assert!(min_qmi_two_qubit(&half).unwrap().abs() < 1e-14);
        // unsorted input is sorted internally
        let shuffled = Spectrum::new(vec![0.1, 0.4, 0.2, 0.3]).unwrap();
        let sorted = Spectrum::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!((min_qmi_two_qubit(&shuffled).unwrap() - min_qmi_two_qubit(&sorted).unwrap()).abs() < 1e-15);
        assert!(min_qmi_two_qubit(&sorted).unwrap() >= -1e-9);
        assert!(min_qmi_two_qubit(&Spectrum::uniform(3)).is_err());
    }

    #[test]
    fn bravyi_examples() {
        assert!(bravyi_compatible(&Spectrum::uniform(4), 0.5, 0.5).unwrap());
        assert!(bravyi_compatible(&Spectrum::pure(4), 0.0, 0.0).unwrap());
        let s = Spectrum::new(vec![0.7, 0.3, 0.0, 0.0]).unwrap();
        assert!(!bravyi_compatible(&s, 0.5, 0.0).unwrap());
    }

    #[test]
    fn bravyi_holds_on_sampled_marginals() {
        let d = two_qubit();
        let mut rng = RngState::new(9);
        for _ in 0..500 {
            let rho = sample_random_density(4, 4, &mut rng).unwrap();
            let u = sample_haar_unitary(4, &mut rng).unwrap();
            let moved = rho.conjugate(&u).unwrap();
            let la = *partial_trace_b(&moved, d).unwrap().eigenvalues().last().unwrap();
            let lb = *partial_trace_a(&moved, d).unwrap().eigenvalues().last().unwrap();
            assert!(bravyi_compatible(&rho.spectrum(), la, lb).unwrap());
        }
    }

    #[test]
    fn closed_forms_are_unitarily_invariant() {
        let mut rng = RngState::new(10);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let rho = sample_random_density(6, 3, &mut rng).unwrap();
        let moved = rho.conjugate(&sample_haar_unitary(6, &mut rng).unwrap()).unwrap();
        let (a, b) = (OrbitCoefficients::new(&rho, dims).unwrap(), OrbitCoefficients::new(&moved, dims).unwrap());
        for (x, y) in [(a.a1, b.a1), (a.a2, b.a2), (a.c0, b.c0), (a.f, b.f)] {
            assert!((x - y).abs() < 1e-10);
        }
        let (fa, fb) = (fidelity_bounds(&rho, dims).unwrap(), fidelity_bounds(&moved, dims).unwrap());
        assert!((fa.lower - fb.lower).abs() < 1e-10 && (fa.upper - fb.upper).abs() < 1e-10);
        let (sa, sb) = (sum_entropy_bounds(&rho, dims).unwrap(), sum_entropy_bounds(&moved, dims).unwrap());
        assert!((sa.lower - sb.lower).abs() < 1e-9 && (sa.upper - sb.upper).abs() < 1e-10);
    }
}
