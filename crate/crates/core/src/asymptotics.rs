//! Leading-order stationary-phase predictions for the peak coefficients of
//! `Bⁿ`, and the two van der Corput bounds used to control everything else.
//!
//! Terms are in integral units: `I ≈ ∫ B(e^{iθ})ⁿ e^{−ikθ} dθ` near one
//! critical point, so the matching Fourier coefficient is `I / 2π`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::coefficients::CoefficientSeries;
use crate::error::{Error, Result};
use crate::phase::{CriticalPoint, PhasePortrait};
use crate::product::BlaschkeProduct;
use crate::quad;

/// `Γ(1/N)`.
pub fn gamma_reciprocal_n(order: usize) -> Result<f64> {
    if order < 2 {
        return Err(Error::ParameterOutOfRange(format!("order must be at least 2, got {order}")));
    }
    Ok(gamma(1.0 / order as f64))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Modulus of the leading term; depends on `n` only through `n^{−1/N}`.
pub fn stationary_phase_modulus(cp: &CriticalPoint, n: u64) -> f64 {
    let big_n = cp.order;
    let nf = big_n as f64;
    let base = (factorial(big_n) / (n as f64 * cp.psi_n.abs())).powf(1.0 / nf);
    let shape = if big_n % 2 == 0 {
        1.0
    } else {
        (FRAC_PI_2 / nf).cos()
    };
    2.0 / nf * base * gamma(1.0 / nf) * shape
}

/// Leading contribution of `cp` to `∫ Bⁿ e^{−ikθ} dθ`.
///
/// For even order the phase carries `e^{±iπ/2N}` with the sign of
/// `ψ^{(N)}(ξ)`; for odd order the two half-lines combine into a real
/// `cos(π/2N)` factor.
pub fn stationary_phase_term(b: &BlaschkeProduct, cp: &CriticalPoint, n: u64, k: i64) -> Complex64 {
    let xi = cp.xi.radians();
    let winding = (n as f64 * b.eval_boundary(xi).arg()).rem_euclid(TAU);
    // k·ξ can be large; reduce the integer part first.
    let shift = (k as f64 * xi).rem_euclid(TAU);
    let mut phase = winding - shift;
    if cp.order % 2 == 0 {
        phase += cp.psi_n.signum() * PI / (2.0 * cp.order as f64);
    }
    Complex64::from_polar(stationary_phase_modulus(cp, n), phase)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakPrediction {
    pub n: u64,
    #[serde(rename = "N")]
    pub order: usize,
    pub d_values: Vec<usize>,
    /// `terms[d][j]` is the contribution of the j-th dominant point to `k_d`.
    pub terms: Vec<Vec<Complex64>>,
    pub sigma: Vec<Complex64>,
    /// `max_d |Σ_d|`, integral units.
    pub omega: f64,
    pub predicted_k: Vec<i64>,
}

impl PeakPrediction {
    /// Predicted Fourier coefficient at `predicted_k[d]`.
    pub fn coefficient(&self, d: usize) -> Complex64 {
        self.sigma[d] / TAU
    }

    /// Predicted sup norm, `Ω / 2π`.
    pub fn predicted_sup(&self) -> f64 {
        self.omega / TAU
    }

    /// Index `d` attaining `Ω`.
    pub fn peak_d(&self) -> usize {
        let mut best = 0;
        for d in 1..self.sigma.len() {
            if self.sigma[d].norm() > self.sigma[best].norm() {
                best = d;
            }
        }
        best
    }
}

pub fn predict_peak(b: &BlaschkeProduct, portrait: &PhasePortrait, n: u64) -> Result<PeakPrediction> {
    if n == 0 {
        return Err(Error::InvalidInput("power n must be at least 1".into()));
    }
    let r = portrait.representative_point();
    let base = (n as f64 * r.psi_prime).floor() as i64;
    let d_values: Vec<usize> = (0..portrait.d).collect();
    let predicted_k: Vec<i64> = d_values.iter().map(|&d| base + d as i64).collect();
    let terms: Vec<Vec<Complex64>> = predicted_k
        .iter()
        .map(|&k| portrait.dominant_points().map(|cp| stationary_phase_term(b, cp, n, k)).collect())
        .collect();
    let sigma: Vec<Complex64> = terms.iter().map(|t| t.iter().sum()).collect();
    let omega = sigma.iter().map(|s| s.norm()).fold(0.0, f64::max);
    Ok(PeakPrediction {
        n,
        order: portrait.order,
        d_values,
        terms,
        sigma,
        omega,
        predicted_k,
    })
}

/// Prediction at the peak index set against computed coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakComparison {
    pub n: u64,
    pub k: i64,
    pub predicted: Complex64,
    pub computed: Complex64,
    /// `| |predicted| − |computed| | / |computed|`.
    pub rel_err: f64,
    /// Wrapped argument difference in `[0, π]`.
    pub phase_err: f64,
    pub sup: f64,
    pub argmax_k: usize,
}

pub fn compare(prediction: &PeakPrediction, series: &CoefficientSeries) -> PeakComparison {
    let d = prediction.peak_d();
    let k = prediction.predicted_k[d];
    let predicted = prediction.coefficient(d);
    let computed = usize::try_from(k)
        .ok()
        .and_then(|i| series.coeffs.get(i).copied())
        .unwrap_or_default();
    let rel_err = (predicted.norm() - computed.norm()).abs() / computed.norm();
    let phase_err = (predicted.arg() - computed.arg() + PI).rem_euclid(TAU) - PI;
    let (sup, argmax_k) = series.sup();
    PeakComparison {
        n: prediction.n,
        k,
        predicted,
        computed,
        rel_err,
        phase_err: phase_err.abs(),
        sup,
        argmax_k,
    }
}

/// First van der Corput bound for `∫ₐᵇ e^{ig}` with `g'` monotone and of
/// one sign.
pub fn vdc_first_order_bound(g_prime_a: f64, g_prime_b: f64) -> Result<f64> {
    if g_prime_a == 0.0 || g_prime_b == 0.0 {
        return Err(Error::ZeroDerivative);
    }
    Ok(2.0 / g_prime_a.abs() + 2.0 / g_prime_b.abs())
}

/// Second van der Corput bound for `∫ₐᵇ G e^{ig}` with `|g''| ≥ μ` and
/// `0 < G ≤ M` monotone.
pub fn vdc_second_order_bound(m: f64, mu: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::NonPositiveInput(format!("M = {m}")));
    }
    if !(mu > 0.0) {
        return Err(Error::NonPositiveInput(format!("mu = {mu}")));
    }
    Ok(8.0 * m / mu.sqrt())
}

/// `∫ₐᵇ G(t) e^{ig(t)} dt` by adaptive quadrature.
pub fn oscillatory_integral<G, A>(g: G, amplitude: A, a: f64, b: f64, tol: f64) -> Complex64
where
    G: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    quad::integrate(|t| Complex64::from_polar(amplitude(t), g(t)), a, b, tol).value
}
