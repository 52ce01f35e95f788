//! Unitary Weingarten calculus up to third order.
//!
//! Provides the closed-form Weingarten functions for `k <= 3`, the
//! second-moment twirl `E[U^dag Xi(U X U^dag) U]` of an arbitrary
//! superoperator, and the sixth-moment integral
//!
//! ```text
//! E[U A U^dag B U X U^dag C U D U^dag] = mu1 I + mu2 BC + mu3 CB + mu4 B + mu5 C
//! ```
//!
//! whose coefficients are computed two ways: from the simplified
//! `N_d mu_j` expressions (production path) and from the raw twelve-term
//! Weingarten sums (cross-check). `N_d = (d^2 - 1)(d^2 - 4)`.

use crate::error::{Error, Result};
use crate::haar::{sample_haar_unitary, RngState};
use crate::linalg::{c, gamma_map, identity, BipartiteDims, Complex64, ComplexMatrix, DensityMatrix};

fn normalize_partition(partition: &[usize]) -> Result<Vec<usize>> {
    if partition.is_empty() || partition.contains(&0) {
        return Err(Error::InvalidPartition(partition.to_vec()));
    }
    let mut parts = partition.to_vec();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Ok(parts)
}

/// Weingarten function `Wg(lambda, d)` for a partition `lambda` of `k <= 3`.
///
/// The partition is the cycle type of the permutation; parts may be given in
/// any order.
pub fn wg(partition: &[usize], d: usize) -> Result<f64> {
    let parts = normalize_partition(partition)?;
    let k: usize = parts.iter().sum();
    if k > 3 {
        return Err(Error::UnsupportedOrder(k));
    }
    if d < k {
        return Err(Error::DegenerateDimension { k, d });
    }
    let x = d as f64;
    let d2 = x * x;
    Ok(match parts.as_slice() {
        [1] => 1.0 / x,
        [1, 1] => 1.0 / (d2 - 1.0),
        [2] => -1.0 / (x * (d2 - 1.0)),
        [1, 1, 1] => (d2 - 2.0) / (x * (d2 - 1.0) * (d2 - 4.0)),
        [2, 1] => -1.0 / ((d2 - 1.0) * (d2 - 4.0)),
        [3] => 2.0 / (x * (d2 - 1.0) * (d2 - 4.0)),
        _ => unreachable!("all partitions of k <= 3 are listed"),
    })
}

/// All Weingarten values for `k <= 3` at a fixed dimension `d >= 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeingartenTable {
    pub d: usize,
    pub wg1: f64,
    pub wg11: f64,
    pub wg2: f64,
    pub wg111: f64,
    pub wg21: f64,
    pub wg3: f64,
}

impl WeingartenTable {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::DegenerateDimension { k: 3, d });
        }
        Ok(Self {
            d,
            wg1: wg(&[1], d)?,
            wg11: wg(&[1, 1], d)?,
            wg2: wg(&[2], d)?,
            wg111: wg(&[1, 1, 1], d)?,
            wg21: wg(&[2, 1], d)?,
            wg3: wg(&[3], d)?,
        })
    }
}

/// A linear map on `d x d` matrices.
pub trait SuperOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix;

    /// `Tr Xi` as a linear map. Override when a closed form is known.
    fn trace(&self) -> Complex64 {
        superop_trace(|x| self.apply(x), self.dim())
    }

    /// `Tr Xi(1)`.
    fn identity_image_trace(&self) -> Complex64 {
        self.apply(&identity(self.dim())).trace()
    }
}

/// `Tr Xi = sum_{m,n} <m| Xi(|m><n|) |n>`.
pub fn superop_trace(phi: impl Fn(&ComplexMatrix) -> ComplexMatrix, d: usize) -> Complex64 {
    let mut total = c(0.0, 0.0);
    for m in 0..d {
        for n in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(m, n)] = c(1.0, 0.0);
            total += phi(&unit)[(m, n)];
        }
    }
    total
}

/// The identity map on `d x d` matrices.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap(pub usize);

impl SuperOperator for IdentityMap {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.clone()
    }

    fn trace(&self) -> Complex64 {
        c((self.0 * self.0) as f64, 0.0)
    }
}

/// `Gamma(X) = Tr_B(X) (x) 1_B` with `Tr Gamma = d_A^2 d_B` and
/// `Tr Gamma(1) = d_A d_B^2`.
#[derive(Debug, Clone, Copy)]
pub struct GammaMap(pub BipartiteDims);

impl SuperOperator for GammaMap {
    fn dim(&self) -> usize {
        self.0.d()
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        gamma_map(x, self.0).expect("GammaMap applied to a matrix of the wrong size")
    }

    fn trace(&self) -> Complex64 {
        let (da, db) = (self.0.da() as f64, self.0.db() as f64);
        c(da * da * db, 0.0)
    }

    fn identity_image_trace(&self) -> Complex64 {
        let (da, db) = (self.0.da() as f64, self.0.db() as f64);
        c(da * db * db, 0.0)
    }
}

/// `X -> A X A^dag`.
#[derive(Debug, Clone)]
pub struct Conjugation(pub ComplexMatrix);

impl SuperOperator for Conjugation {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.0 * x * self.0.adjoint()
    }
}

/// Wraps a closure as a superoperator.
pub struct FnMap<F> {
    pub dim: usize,
    pub map: F,
}

impl<F: Fn(&ComplexMatrix) -> ComplexMatrix> SuperOperator for FnMap<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        (self.map)(x)
    }
}

/// `E[U^dag Xi(U X U^dag) U]` over Haar `U`:
///
/// ```text
/// (d Tr Xi(1) - Tr Xi)/(d(d^2-1)) Tr(X) 1 + (d Tr Xi - Tr Xi(1))/(d(d^2-1)) X
/// ```
pub fn twirl_second_moment<S: SuperOperator + ?Sized>(phi: &S, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = phi.dim();
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, d });
    }
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.nrows() });
    }
    let (tr_phi, tr_phi_id) = (phi.trace(), phi.identity_image_trace());
    let df = d as f64;
    let denom = df * (df * df - 1.0);
    let coef_id = (tr_phi_id * df - tr_phi) / denom;
    let coef_x = (tr_phi * df - tr_phi_id) / denom;
    Ok(identity(d) * (coef_id * x.trace()) + x * coef_x)
}

/// The five operands of the sixth-moment integral
/// `E[U A U^dag B U X U^dag C U D U^dag]`.
#[derive(Debug, Clone, Copy)]
pub struct SixthMomentOperands<'a> {
    pub a: &'a ComplexMatrix,
    pub b: &'a ComplexMatrix,
    pub c: &'a ComplexMatrix,
    pub d: &'a ComplexMatrix,
    pub x: &'a ComplexMatrix,
}

impl SixthMomentOperands<'_> {
    /// Common dimension of the operands.
    pub fn dim(&self) -> Result<usize> {
        let n = self.a.nrows();
        for m in [self.a, self.b, self.c, self.d, self.x] {
            if m.nrows() != m.ncols() {
                return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
            }
            if m.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
        }
        if n < 3 {
            return Err(Error::DegenerateDimension { k: 3, d: n });
        }
        Ok(n)
    }

    /// The integrand for one unitary.
    pub fn integrand(&self, u: &ComplexMatrix) -> ComplexMatrix {
        let ud = u.adjoint();
        u * self.a * &ud * self.b * u * self.x * &ud * self.c * u * self.d * &ud
    }
}

/// Trace invariants entering the mu coefficients.
struct Traces {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    x: Complex64,
    ad: Complex64,
    adx: Complex64,
    dax: Complex64,
    dx: Complex64,
    ax: Complex64,
    bc: Complex64,
}

impl Traces {
    fn new(ops: &SixthMomentOperands<'_>) -> Self {
        let ad = ops.a * ops.d;
        let da = ops.d * ops.a;
        Self {
            a: ops.a.trace(),
            b: ops.b.trace(),
            c: ops.c.trace(),
            d: ops.d.trace(),
            x: ops.x.trace(),
            ad: ad.trace(),
            adx: (&ad * ops.x).trace(),
            dax: (&da * ops.x).trace(),
            dx: (ops.d * ops.x).trace(),
            ax: (ops.a * ops.x).trace(),
            bc: (ops.b * ops.c).trace(),
        }
    }
}

/// `[mu1, mu2, mu3, mu4, mu5]`.
pub type MuCoefficients = [Complex64; 5];

/// Mu coefficients from the simplified `N_d mu_j` expressions.
pub fn mu_coefficients(ops: &SixthMomentOperands<'_>) -> Result<MuCoefficients> {
    let n = ops.dim()? as f64;
    let t = Traces::new(ops);
    let nd = (n * n - 1.0) * (n * n - 4.0);
    let big = n - 2.0 / n;
    let small = 2.0 / n;

    let mu1 = (t.ad * t.x * t.bc) * big + (t.dax * t.b * t.c) * big
        + (t.a * t.dx * t.bc) * small
        + (t.d * t.ax * t.bc) * small
        + (t.a * t.d * t.x * t.b * t.c) * small
        + (t.adx * t.b * t.c) * small
        - t.a * t.d * t.x * t.bc
        - t.adx * t.bc
        - t.dax * t.bc
        - t.ad * t.x * t.b * t.c
        - t.a * t.dx * t.b * t.c
        - t.d * t.ax * t.b * t.c;
    let mu2 = (t.a * t.d * t.x) * big + t.adx * small + t.dax * small
        - t.ad * t.x
        - t.a * t.dx
        - t.d * t.ax;
    let mu3 = t.dax * small + (t.a * t.d * t.x) * small + t.adx * big
        - t.ad * t.x
        - t.a * t.dx
        - t.d * t.ax;
    let mu4 = (t.a * t.dx * t.c) * big + (t.ad * t.x * t.c) * small + (t.d * t.ax * t.c) * small
        - t.a * t.d * t.x * t.c
        - t.adx * t.c
        - t.dax * t.c;
    let mu5 = (t.ad * t.x * t.b) * small + (t.a * t.dx * t.b) * small + (t.d * t.ax * t.b) * big
        - t.a * t.d * t.x * t.b
        - t.adx * t.b
        - t.dax * t.b;
    Ok([mu1 / nd, mu2 / nd, mu3 / nd, mu4 / nd, mu5 / nd])
}

/// Mu coefficients from the raw Weingarten-weighted sums over `S_3 x S_3`.
pub fn mu_coefficients_raw(ops: &SixthMomentOperands<'_>) -> Result<MuCoefficients> {
    let n = ops.dim()?;
    let w = WeingartenTable::new(n)?;
    let t = Traces::new(ops);
    let (w111, w21, w3) = (w.wg111, w.wg21, w.wg3);

    let mu1 = t.ad * t.x * t.bc * w111
        + t.a * t.d * t.x * t.bc * w21
        + t.adx * t.bc * w21
        + t.dax * t.bc * w21
        + t.a * t.dx * t.bc * w3
        + t.d * t.ax * t.bc * w3
        + t.ad * t.x * t.b * t.c * w21
        + t.a * t.d * t.x * t.b * t.c * w3
        + t.adx * t.b * t.c * w3
        + t.dax * t.b * t.c * w111
        + t.a * t.dx * t.b * t.c * w21
        + t.d * t.ax * t.b * t.c * w21;
    let mu2 = t.ad * t.x * w21
        + t.a * t.d * t.x * w111
        + t.adx * w3
        + t.dax * w3
        + t.a * t.dx * w21
        + t.d * t.ax * w21;
    let mu3 = t.ad * t.x * w21
        + t.a * t.d * t.x * w3
        + t.adx * w111
        + t.dax * w3
        + t.a * t.dx * w21
        + t.d * t.ax * w21;
    let mu4 = t.ad * t.x * t.c * w3
        + t.a * t.d * t.x * t.c * w21
        + t.adx * t.c * w21
        + t.dax * t.c * w21
        + t.a * t.dx * t.c * w111
        + t.d * t.ax * t.c * w3;
    let mu5 = t.ad * t.x * t.b * w3
        + t.a * t.d * t.x * t.b * w21
        + t.adx * t.b * w21
        + t.dax * t.b * w21
        + t.a * t.dx * t.b * w3
        + t.d * t.ax * t.b * w111;
    Ok([mu1, mu2, mu3, mu4, mu5])
}

/// Assembles `mu1 I + mu2 BC + mu3 CB + mu4 B + mu5 C`.
pub fn assemble_sixth_moment(ops: &SixthMomentOperands<'_>, mu: &MuCoefficients) -> ComplexMatrix {
    let n = ops.b.nrows();
    identity(n) * mu[0] + (ops.b * ops.c) * mu[1] + (ops.c * ops.b) * mu[2] + ops.b * mu[3] + ops.c * mu[4]
}

/// Closed form of `E[U A U^dag B U X U^dag C U D U^dag]`; requires `d >= 3`.
pub fn sixth_moment_integral(ops: &SixthMomentOperands<'_>) -> Result<ComplexMatrix> {
    let mu = mu_coefficients(ops)?;
    Ok(assemble_sixth_moment(ops, &mu))
}

/// A quantum channel in Kraus form, `E(X) = sum_j E_j X E_j^dag`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus_ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes and trace preservation (`sum E_j^dag E_j = I` within 1e-8).
    pub fn new(kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus_ops.first().ok_or(Error::EmptyChannel)?;
        let (rows, cols) = first.shape();
        let mut acc = ComplexMatrix::zeros(cols, cols);
        for e in &kraus_ops {
            if e.shape() != (rows, cols) {
                return Err(Error::DimensionMismatch { expected: rows, found: e.nrows() });
            }
            acc += e.adjoint() * e;
        }
        let defect = crate::linalg::max_abs_diff(&acc, &identity(cols));
        if defect > 1e-8 {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(Self { kraus_ops })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus_ops: vec![identity(d)] }
    }

    /// `X -> Tr(X) I/d`, Kraus operators `|i><j|/sqrt(d)`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let mut ops = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(i, j)] = c(s, 0.0);
                ops.push(e);
            }
        }
        Self { kraus_ops: ops }
    }

    /// Random channel with `count` Kraus operators cut from a Haar isometry.
    pub fn random(d: usize, count: usize, rng: &mut RngState) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyChannel);
        }
        let u = sample_haar_unitary(d * count, rng)?;
        let ops = (0..count).map(|j| u.view((j * d, 0), (d, d)).into_owned()).collect();
        Self::new(ops)
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    pub fn input_dim(&self) -> usize {
        self.kraus_ops[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus_ops[0].nrows()
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.kraus_ops
            .iter()
            .fold(ComplexMatrix::zeros(self.output_dim(), self.output_dim()), |acc, e| acc + e * x * e.adjoint())
    }

    fn require_square(&self) -> Result<usize> {
        let (rows, cols) = (self.output_dim(), self.input_dim());
        if rows != cols {
            return Err(Error::NonSquareChannel { rows, cols });
        }
        Ok(rows)
    }
}

impl SuperOperator for KrausChannel {
    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        KrausChannel::apply(self, x)
    }

    /// `Tr E = sum_j |Tr E_j|^2`.
    fn trace(&self) -> Complex64 {
        c(self.kraus_ops.iter().map(|e| e.trace().norm_sqr()).sum(), 0.0)
    }
}

/// Column-stacking vectorisation.
fn vec_columns(m: &ComplexMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

/// Choi matrix `J = sum_j vec(E_j) vec(E_j)^dag`.
pub fn choi_matrix(ch: &KrausChannel) -> ComplexMatrix {
    let n = ch.input_dim() * ch.output_dim();
    ch.kraus_ops.iter().fold(ComplexMatrix::zeros(n, n), |acc, e| {
        let v = vec_columns(e);
        acc + &v * v.adjoint()
    })
}

/// Average purity of `E(U rho U^dag)` over Haar `U`:
///
/// ```text
/// (d P - 1)/(d(d^2-1)) Tr J^2 + (d - P)/(d(d^2-1)) Tr E(1)^2,   P = Tr rho^2
/// ```
pub fn channel_average_purity(ch: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let d = ch.require_square()?;
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, d });
    }
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let p = crate::linalg::purity(rho);
    let j = choi_matrix(ch);
    let tr_j2 = (&j * &j).trace().re;
    let e_id = ch.apply(&identity(d));
    let tr_e2 = (&e_id * &e_id).trace().re;
    let df = d as f64;
    let denom = df * (df * df - 1.0);
    Ok((df * p - 1.0) / denom * tr_j2 + (df - p) / denom * tr_e2)
}
