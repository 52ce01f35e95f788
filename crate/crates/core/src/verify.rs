//! Gate suites comparing closed forms against Monte Carlo.
//!
//! Each suite returns a [`Report`] listing every gate; a suite passes when all
//! of its gates pass. Exact gates compare absolute differences against a fixed
//! tolerance, MC gates compare `|analytic - mean|` in units of standard error.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::{ginibre, sample_haar_unitary, sample_random_density, RngState};
use crate::linalg::{
    hermitian_part, identity, max_abs_diff, partial_trace_a, partial_trace_b, BipartiteDims, ComplexMatrix,
    DensityMatrix,
};
use crate::montecarlo::{self as mc, MCConfig, MCEstimate, MCMatrixEstimate};
use crate::orbit;
use crate::weingarten::{
    channel_average_purity, mu_coefficients, mu_coefficients_raw, sixth_moment_integral, twirl_second_moment, wg,
    GammaMap, IdentityMap, KrausChannel, SixthMomentOperands, SuperOperator,
};

pub const REPORT_SCHEMA: u32 = 1;

/// Entrywise SE multiple used for matrix-valued gates.
pub const MATRIX_SIGMA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    /// Absolute difference against a fixed tolerance.
    Exact,
    /// Scalar MC estimate within `threshold` standard errors.
    Scalar,
    /// Matrix MC estimate, worst entry within `threshold` standard errors.
    Matrix,
    /// One-sided inequality between an estimate and a bound.
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub analytic: f64,
    pub mc_mean: Option<f64>,
    pub se: Option<f64>,
    /// Exact gates: absolute error. MC gates: error in standard errors.
    /// Bound gates: amount by which the inequality is violated (<= 0 passes).
    pub deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Gate {
    pub fn exact(name: impl Into<String>, analytic: f64, computed: f64, tol: f64) -> Self {
        let deviation = (analytic - computed).abs();
        Self {
            name: name.into(),
            kind: GateKind::Exact,
            analytic,
            mc_mean: Some(computed),
            se: None,
            deviation,
            threshold: tol,
            pass: deviation <= tol,
        }
    }

    pub fn scalar(name: impl Into<String>, analytic: f64, est: &MCEstimate, sigma: f64) -> Self {
        Self {
            name: name.into(),
            kind: GateKind::Scalar,
            analytic,
            mc_mean: Some(est.mean),
            se: Some(est.std_error),
            deviation: est.z_score(analytic).abs(),
            threshold: sigma,
            pass: est.agrees_with(analytic, sigma),
        }
    }

    /// Reports the worst entry; `analytic` and `mc_mean` are its real parts.
    pub fn matrix(name: impl Into<String>, analytic: &ComplexMatrix, est: &MCMatrixEstimate, k: f64) -> Self {
        let worst = (0..analytic.len())
            .max_by(|&i, &j| {
                let dev = |n: usize| (est.mean[n] - analytic[n]).norm() / (est.entry_se[n] + mc::MATRIX_GATE_FLOOR);
                dev(i).total_cmp(&dev(j))
            })
            .unwrap_or(0);
        Self {
            name: name.into(),
            kind: GateKind::Matrix,
            analytic: analytic[worst].re,
            mc_mean: Some(est.mean[worst].re),
            se: Some(est.entry_se[worst]),
            deviation: est.max_deviation(analytic),
            threshold: k,
            pass: est.agrees_with(analytic, k),
        }
    }

    /// `bound <= estimate` (`lower = true`) or `estimate <= bound`, relaxed by `sigma` SE.
    pub fn bound(name: impl Into<String>, bound: f64, est: &MCEstimate, sigma: f64, lower: bool) -> Self {
        let slack = sigma * est.std_error + mc::MATRIX_GATE_FLOOR;
        let violation = if lower { bound - est.mean - slack } else { est.mean - bound - slack };
        Self {
            name: name.into(),
            kind: GateKind::Bound,
            analytic: bound,
            mc_mean: Some(est.mean),
            se: Some(est.std_error),
            deviation: violation,
            threshold: 0.0,
            pass: violation <= 0.0,
        }
    }

    /// A deterministic inequality `lhs <= rhs + tol`.
    pub fn ordering(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let violation = lhs - rhs - tol;
        Self {
            name: name.into(),
            kind: GateKind::Bound,
            analytic: rhs,
            mc_mean: Some(lhs),
            se: None,
            deviation: violation,
            threshold: 0.0,
            pass: violation <= 0.0,
        }
    }
}

/// Observations recorded alongside the gates but never gated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Note {
    pub name: String,
    pub value: f64,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub parameters: serde_json::Value,
    pub passed: bool,
    pub gates: Vec<Gate>,
    pub notes: Vec<Note>,
}

impl Report {
    fn new(suite: &str, parameters: serde_json::Value, gates: Vec<Gate>, notes: Vec<Note>) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            suite: suite.into(),
            parameters,
            passed: gates.iter().all(|g| g.pass),
            gates,
            notes,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| !g.pass)
    }
}

fn random_hermitian(d: usize, rng: &mut RngState) -> ComplexMatrix {
    hermitian_part(&ginibre(d, d, rng))
}

/// Weingarten values, twirl identities and sixth-moment MC gates at each `d`.
pub fn verify_weingarten(dims: &[usize], cfg: &MCConfig) -> Result<Report> {
    if let Some(&d) = dims.iter().find(|&&d| d < 3) {
        return Err(Error::DegenerateDimension { k: 3, d });
    }
    let mut rng = RngState::for_stream(cfg.seed, u64::MAX);
    let mut gates = Vec::new();
    for &d in dims {
        let x = d as f64;
        let nd = (x * x - 1.0) * (x * x - 4.0);
        gates.push(Gate::exact(format!("wg111_d{d}"), (x * x - 2.0) / (x * nd), wg(&[1, 1, 1], d)?, 1e-14));
        gates.push(Gate::exact(format!("wg21_d{d}"), -1.0 / nd, wg(&[2, 1], d)?, 1e-14));
        gates.push(Gate::exact(format!("wg3_d{d}"), 2.0 / (x * nd), wg(&[3], d)?, 1e-14));

        let probe = ginibre(d, d, &mut rng);
        let fixed = twirl_second_moment(&IdentityMap(d), &probe)?;
        gates.push(Gate::exact(format!("twirl_identity_d{d}"), 0.0, max_abs_diff(&fixed, &probe), 1e-12));

        let b = random_hermitian(d, &mut rng);
        let c = random_hermitian(d, &mut rng);
        let id = identity(d);
        let constant = SixthMomentOperands { a: &id, b: &b, c: &c, d: &id, x: &id };
        let bc = &b * &c;
        gates.push(Gate::exact(
            format!("sixth_moment_constant_d{d}"),
            0.0,
            max_abs_diff(&sixth_moment_integral(&constant)?, &bc),
            1e-12,
        ));

        let ops: Vec<ComplexMatrix> = (0..5).map(|_| random_hermitian(d, &mut rng)).collect();
        let operands = SixthMomentOperands { a: &ops[0], b: &ops[1], c: &ops[2], d: &ops[3], x: &ops[4] };
        let simplified = mu_coefficients(&operands)?;
        let raw = mu_coefficients_raw(&operands)?;
        let mu_gap = simplified.iter().zip(&raw).map(|(s, r)| (s - r).norm() / (1.0 + r.norm())).fold(0.0, f64::max);
        gates.push(Gate::exact(format!("mu_raw_vs_simplified_d{d}"), 0.0, mu_gap, 1e-10));

        let analytic = sixth_moment_integral(&operands)?;
        let est = mc::mc_sixth_moment(&operands, cfg)?;
        gates.push(Gate::matrix(format!("sixth_moment_mc_d{d}"), &analytic, &est, MATRIX_SIGMA));
        let tr = mc::mc_sixth_moment_trace(&operands, cfg)?;
        gates.push(Gate::scalar(format!("sixth_moment_trace_re_d{d}"), analytic.trace().re, &tr.re, cfg.sigma_gate));
        gates.push(Gate::scalar(format!("sixth_moment_trace_im_d{d}"), analytic.trace().im, &tr.im, cfg.sigma_gate));

        let channel = KrausChannel::random(d, 2, &mut rng)?;
        let xm = random_hermitian(d, &mut rng);
        let est = mc::mc_twirl_second_moment(&channel, &xm, cfg)?;
        gates.push(Gate::matrix(
            format!("twirl_channel_mc_d{d}"),
            &twirl_second_moment(&channel, &xm)?,
            &est,
            MATRIX_SIGMA,
        ));
    }
    let params = serde_json::json!({ "dims": dims, "samples": cfg.samples, "seed": cfg.seed, "sigma": cfg.sigma_gate });
    Ok(Report::new("verify-weingarten", params, gates, Vec::new()))
}

/// Orbit closed forms against MC on `states` random full-rank states.
pub fn verify_orbit(dims: BipartiteDims, states: usize, cfg: &MCConfig) -> Result<Report> {
    if dims.d() < 3 {
        return Err(Error::DegenerateDimension { k: 3, d: dims.d() });
    }
    let sigma = cfg.sigma_gate;
    let mut rng = RngState::for_stream(cfg.seed, u64::MAX);
    let mut gates = Vec::new();
    let mut notes = Vec::new();
    let d = dims.d();
    let product_target = identity(d).unscale(d as f64);

    for s in 0..states {
        let rho = sample_random_density(d, d, &mut rng)?;
        // a distinct seed per state keeps the estimates independent
        let cfg = MCConfig { seed: cfg.seed.wrapping_add(1 + s as u64), ..*cfg };
        let tag = |name: &str| format!("{name}_state{s}");

        let est = mc::mc_product_average(&rho, dims, &cfg)?;
        gates.push(Gate::matrix(tag("product_average"), &product_target, &est, MATRIX_SIGMA));
        let pullback = orbit::pullback_product_average(&rho, dims)?;
        let est = mc::mc_pullback_average(&rho, dims, &cfg)?;
        gates.push(Gate::matrix(tag("pullback_average"), pullback.matrix(), &est, MATRIX_SIGMA));

        gates.push(Gate::scalar(tag("a1"), orbit::a1(&rho, dims)?, &mc::mc_an(&rho, dims, 1, &cfg)?, sigma));
        gates.push(Gate::scalar(tag("a2"), orbit::a2(&rho, dims)?, &mc::mc_an(&rho, dims, 2, &cfg)?, sigma));

        let la = mc::mc_average_linear_entropy_a(&rho, dims, &cfg)?;
        gates.push(Gate::scalar(tag("linear_entropy_a"), orbit::average_linear_entropy_a(&rho, dims)?, &la, sigma));
        let lb = mc::mc_average_linear_entropy_b(&rho, dims, &cfg)?;
        gates.push(Gate::scalar(tag("linear_entropy_b"), orbit::average_linear_entropy_b(&rho, dims)?, &lb, sigma));

        let sym = mc::mc_subsystem_symmetry(&rho, dims, &cfg)?;
        let ceiling = (dims.da() as f64).ln();
        let truncated = orbit::entropy_lower_bound_truncated(&rho, dims)?;
        let log = orbit::entropy_lower_bound_log(&rho, dims)?;
        gates.push(Gate::bound(tag("entropy_a_above_log_bound"), log.value, &sym.entropy_a, sigma, true));
        gates.push(Gate::bound(tag("entropy_a_below_ceiling"), ceiling, &sym.entropy_a, sigma, false));
        notes.push(Note { name: tag("truncated_bound_raw"), value: truncated.raw, se: None });
        notes.push(Note {
            name: tag("truncated_bound_minus_mc_entropy_a"),
            value: truncated.raw - sym.entropy_a.mean,
            se: Some(sym.entropy_a.std_error),
        });
        notes.push(Note {
            name: tag("entropy_a_minus_entropy_b"),
            value: sym.difference.mean,
            se: Some(sym.difference.std_error),
        });

        let sum = mc::mc_average_entropy_sum(&rho, dims, &cfg)?;
        let sandwich = orbit::sum_entropy_bounds(&rho, dims)?;
        gates.push(Gate::ordering(tag("sum_entropy_bounds_ordered"), sandwich.lower, sandwich.upper, 1e-9));
        gates.push(Gate::bound(tag("sum_entropy_lower"), sandwich.lower, &sum, sigma, true));
        gates.push(Gate::bound(tag("sum_entropy_upper"), sandwich.upper, &sum, sigma, false));

        let fid = mc::mc_average_fidelity(&rho, dims, &cfg)?;
        let fb = orbit::fidelity_bounds(&rho, dims)?;
        gates.push(Gate::ordering(tag("fidelity_bounds_ordered"), fb.lower, fb.upper, 1e-9));
        gates.push(Gate::bound(tag("fidelity_lower"), fb.lower, &fid, sigma, true));
        gates.push(Gate::bound(tag("fidelity_upper"), fb.upper, &fid, sigma, false));
    }

    if dims == BipartiteDims::two_qubit() {
        let sweeps = 10_000;
        let mut violations = 0usize;
        for _ in 0..sweeps {
            let rho = sample_random_density(4, 4, &mut rng)?;
            let moved = rho.conjugate(&sample_haar_unitary(4, &mut rng)?)?;
            let la = *partial_trace_b(&moved, dims)?.eigenvalues().last().unwrap();
            let lb = *partial_trace_a(&moved, dims)?.eigenvalues().last().unwrap();
            if !orbit::bravyi_compatible(&rho.spectrum(), la, lb)? {
                violations += 1;
            }
        }
        gates.push(Gate::exact("bravyi_sweep_violations", 0.0, violations as f64, 0.0));
    }

    let params = serde_json::json!({
        "da": dims.da(), "db": dims.db(), "states": states,
        "samples": cfg.samples, "seed": cfg.seed, "sigma": sigma,
    });
    Ok(Report::new("verify-orbit", params, gates, notes))
}

/// Channel purity closed form against MC for the identity, completely
/// depolarizing and a random two-Kraus channel.
pub fn verify_channel(d: usize, cfg: &MCConfig) -> Result<Report> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, d });
    }
    let mut rng = RngState::for_stream(cfg.seed, u64::MAX);
    let rho = sample_random_density(d, d, &mut rng)?;
    let channels = [
        ("identity", KrausChannel::identity(d)),
        ("depolarizing", KrausChannel::completely_depolarizing(d)),
        ("random_2_kraus", KrausChannel::random(d, 2, &mut rng)?),
    ];
    let mut gates = Vec::new();
    for (name, ch) in &channels {
        let analytic = channel_average_purity(ch, &rho)?;
        gates.push(Gate::scalar(
            format!("channel_purity_{name}"),
            analytic,
            &mc::mc_channel_purity(ch, &rho, cfg)?,
            cfg.sigma_gate,
        ));
    }
    let dep = channel_average_purity(&channels[1].1, &rho)?;
    gates.push(Gate::exact("depolarizing_closed_form", 1.0 / d as f64, dep, 1e-12));
    let id = channel_average_purity(&channels[0].1, &rho)?;
    gates.push(Gate::exact("identity_closed_form", crate::linalg::purity(&rho), id, 1e-12));

    let dims = BipartiteDims::new(1, d)?;
    let gamma = GammaMap(dims);
    let tr = crate::weingarten::superop_trace(|x| gamma.apply(x), d);
    gates.push(Gate::exact("gamma_trace_generic", gamma.trace().re, tr.re, 1e-9));

    let params = serde_json::json!({ "dim": d, "samples": cfg.samples, "seed": cfg.seed, "sigma": cfg.sigma_gate });
    Ok(Report::new("verify-channel", params, gates, Vec::new()))
}

/// Closed forms only, no sampling.
pub fn closed_form_summary(rho: &DensityMatrix, dims: BipartiteDims) -> Result<serde_json::Value> {
    let mut out = serde_json::json!({
        "da": dims.da(),
        "db": dims.db(),
        "purity": crate::linalg::purity(rho),
        "entropy": crate::linalg::von_neumann_entropy(rho),
        "a1": orbit::a1(rho, dims)?,
        "linear_entropy_a": orbit::average_linear_entropy_a(rho, dims)?,
        "linear_entropy_b": orbit::average_linear_entropy_b(rho, dims)?,
        "linear_entropy_sum": orbit::average_linear_entropy_sum(rho, dims)?,
        "entropy_lower_bound_log": orbit::entropy_lower_bound_log(rho, dims)?,
        "qmi": orbit::qmi(rho, dims)?,
    });
    if dims.d() >= 3 {
        let fields = serde_json::json!({
            "coefficients": orbit::OrbitCoefficients::new(rho, dims)?,
            "entropy_lower_bound_truncated": orbit::entropy_lower_bound_truncated(rho, dims)?,
            "qmi_lower_bound": orbit::qmi_lower_bound(rho, dims)?,
            "fidelity_bounds": orbit::fidelity_bounds(rho, dims)?,
            "sum_entropy_bounds": orbit::sum_entropy_bounds(rho, dims)?,
        });
        if let (Some(o), serde_json::Value::Object(extra)) = (out.as_object_mut(), fields) {
            o.extend(extra);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weingarten_suite_rejects_d2() {
        let cfg = MCConfig::new(200, 1).unwrap();
        let err = verify_weingarten(&[2], &cfg).unwrap_err();
        assert_eq!(err.to_string(), "k=3 Weingarten undefined at d=2");
    }

    #[test]
    fn small_suites_are_deterministic() {
        let cfg = MCConfig::new(2_000, 7).unwrap();
        let a = verify_channel(3, &cfg).unwrap();
        let b = verify_channel(3, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.schema, 1);
        assert!(a.gates.iter().any(|g| g.name == "depolarizing_closed_form" && g.pass));
    }

    #[test]
    fn gate_constructors() {
        let est = MCEstimate { mean: 1.0, std_error: 0.1, samples: 100 };
        assert!(Gate::scalar("ok", 1.25, &est, 3.0).pass);
        assert!(!Gate::scalar("bad", 1.5, &est, 3.0).pass);
        assert!(Gate::bound("lower", 1.2, &est, 3.0, true).pass);
        assert!(!Gate::bound("lower", 1.5, &est, 3.0, true).pass);
        assert!(Gate::bound("upper", 0.8, &est, 3.0, false).pass);
        assert!(Gate::ordering("ord", 1.0, 1.0, 1e-9).pass);
        assert!(!Gate::exact("ex", 1.0, 1.1, 1e-3).pass);
    }

    #[test]
    fn closed_form_summary_two_qubit_mixed() {
        let rho = DensityMatrix::maximally_mixed(4);
        let v = closed_form_summary(&rho, BipartiteDims::two_qubit()).unwrap();
        assert!((v["a1"].as_f64().unwrap() - 0.5).abs() < 1e-14);
        let log = v["entropy_lower_bound_log"]["value"].as_f64().unwrap();
        assert!((log - 2f64.ln()).abs() < 1e-14);
        let fb = &v["fidelity_bounds"];
        assert!((fb["lower"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        assert!((fb["upper"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let sb = &v["sum_entropy_bounds"];
        assert!((sb["lower"].as_f64().unwrap() - sb["upper"].as_f64().unwrap()).abs() < 1e-12);
    }
}
