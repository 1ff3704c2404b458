//! The backward shift on the model space `K_B` for `B = ∏ b_{λ_j}ⁿ`, its
//! matrix in the Malmquist–Walsh basis, and the lower bounds for
//! `‖S⁻¹‖` in the `ℓ∞_A` norm (sup of Taylor coefficient moduli).
//!
//! The quantities of interest overflow `f64` quickly (`|g(0)|` grows like
//! `∏|λ_j|^{−n}`), so moduli are carried as natural logarithms and printed
//! through `DecimalScaled`.

use std::f64::consts::{LN_10, PI, TAU};
use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{self, initial_samples, SamplerOptions};
use crate::error::{Error, Result};
use crate::phase;
use crate::product::BlaschkeProduct;

pub const GRAM_TOL: f64 = 1e-9;
const MAX_TRUNCATION: usize = 1 << 20;

/// Distinct nonzero points of the disk; each carries multiplicity `n` once
/// a power is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    lambdas: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(lambdas: Vec<Complex64>) -> Result<Self> {
        // Reuse the product checks for emptiness, range and the origin.
        BlaschkeProduct::new(lambdas.clone())?;
        for i in 0..lambdas.len() {
            for j in 0..i {
                if (lambdas[i] - lambdas[j]).norm() < 1e-12 {
                    return Err(Error::InvalidInput(format!("spectrum point {} repeated", lambdas[i])));
                }
            }
        }
        Ok(Spectrum { lambdas })
    }

    pub fn from_product(b: &BlaschkeProduct) -> Result<Self> {
        Self::new(b.zeros().to_vec())
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn product(&self) -> BlaschkeProduct {
        BlaschkeProduct::new(self.lambdas.clone()).expect("validated on construction")
    }

    /// `σ_1, …, σ_{nm}`: each point repeated `n` times, in order.
    pub fn sequence(&self, n: usize) -> Vec<Complex64> {
        self.lambdas.iter().flat_map(|&l| std::iter::repeat(l).take(n)).collect()
    }

    /// `n·Σ ln|λ_j|`, the log of `∏|λ_j|ⁿ`.
    pub fn log_det_mod(&self, n: u64) -> f64 {
        n as f64 * self.lambdas.iter().map(|l| l.norm().ln()).sum::<f64>()
    }
}

/// A positive real `mantissa · 10^exponent` with `mantissa ∈ [1, 10)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecimalScaled {
    pub mantissa: f64,
    pub exponent: i64,
}

impl DecimalScaled {
    pub fn from_ln(ln: f64) -> Self {
        let log10 = ln / LN_10;
        let mut exponent = log10.floor() as i64;
        let mut mantissa = 10f64.powf(log10 - exponent as f64);
        if mantissa >= 10.0 {
            mantissa /= 10.0;
            exponent += 1;
        }
        DecimalScaled { mantissa, exponent }
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.exponent as f64 * LN_10
    }

    /// The value as `f64`; saturates to `0` or `∞` out of range.
    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }
}

impl fmt::Display for DecimalScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16}e{}", self.mantissa, self.exponent)
    }
}

impl Serialize for DecimalScaled {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DecimalScaled {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let (m, e) = text
            .split_once(['e', 'E'])
            .ok_or_else(|| serde::de::Error::custom("expected mantissa e exponent"))?;
        let mantissa: f64 = m.parse().map_err(serde::de::Error::custom)?;
        let exponent: i64 = e.trim_start_matches('+').parse().map_err(serde::de::Error::custom)?;
        Ok(DecimalScaled { mantissa, exponent })
    }
}

// ---- power-series helpers ---------------------------------------------

/// `x / (1 − a z)`.
fn divide_kernel(x: &mut [Complex64], a: Complex64) {
    for j in 1..x.len() {
        let prev = x[j - 1];
        x[j] += a * prev;
    }
}

/// `x · (z − σ)/(1 − σ̄ z)`.
fn multiply_factor(x: &mut [Complex64], sigma: Complex64) {
    for j in (0..x.len()).rev() {
        let lower = if j > 0 { x[j - 1] } else { Complex64::default() };
        x[j] = lower - sigma * x[j];
    }
    divide_kernel(x, sigma.conj());
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Orthonormal basis of `K_B`, each vector as its first `l` Taylor
/// coefficients. `e_k = (1−|σ_k|²)^{1/2} (1 − σ̄_k z)^{−1} ∏_{j<k} b_{σ_j}`.
pub fn malmquist_walsh_basis(sigma: &Spectrum, n: usize, l: usize) -> Result<Vec<Vec<Complex64>>> {
    let seq = sigma.sequence(n);
    let dim = seq.len();
    if n == 0 {
        return Err(Error::InvalidInput("multiplicity n must be at least 1".into()));
    }
    if l < dim + 50 * sigma.len() {
        return Err(Error::InvalidInput(format!(
            "truncation {l} below dim + 50·m = {}",
            dim + 50 * sigma.len()
        )));
    }
    let mut q = vec![Complex64::default(); l];
    q[0] = Complex64::new(1.0, 0.0);
    let mut basis = Vec::with_capacity(dim);
    for &s in &seq {
        let mut e = q.clone();
        divide_kernel(&mut e, s.conj());
        let c = (1.0 - s.norm_sqr()).sqrt();
        e.iter_mut().for_each(|v| *v *= c);
        basis.push(e);
        multiply_factor(&mut q, s);
    }
    let residual = gram_residual(&basis);
    if residual > GRAM_TOL {
        return Err(Error::TruncationTooShort { length: l, residual });
    }
    Ok(basis)
}

/// `max |⟨e_i, e_j⟩ − δ_ij|`.
pub fn gram_residual(basis: &[Vec<Complex64>]) -> f64 {
    (0..basis.len())
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| {
                    let g = inner(&basis[i], &basis[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    (g - want).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagonalMatch {
    /// Diagonal equals `λ̄_j`.
    Conjugate,
    /// Diagonal equals `λ_j`.
    Lambda,
    /// Both (all `λ_j` real).
    Both,
    Neither,
}

#[derive(Debug, Clone)]
pub struct ShiftOperator {
    pub sigma: Spectrum,
    pub n: usize,
    pub dim: usize,
    /// `matrix[i][j] = ⟨S e_i, e_j⟩`; row `i` holds the image of `e_i`.
    pub matrix: Vec<Vec<Complex64>>,
    pub basis_truncation: usize,
    basis: Vec<Vec<Complex64>>,
}

/// Matrix of `S f = (f − f(0))/z` on `K_B`, by projecting shifted basis
/// vectors back onto the basis. Doubles the truncation until the Gram
/// check passes.
pub fn build_shift(sigma: &Spectrum, n: usize) -> Result<ShiftOperator> {
    let dim = n * sigma.len();
    let mut l = dim + 50 * sigma.len();
    let basis = loop {
        match malmquist_walsh_basis(sigma, n, l) {
            Ok(b) => break b,
            Err(Error::TruncationTooShort { .. }) if 2 * l <= MAX_TRUNCATION => l *= 2,
            Err(e) => return Err(e),
        }
    };
    let matrix: Vec<Vec<Complex64>> = basis
        .par_iter()
        .map(|e| {
            let shifted = &e[1..];
            basis.iter().map(|f| inner(shifted, &f[..l - 1])).collect()
        })
        .collect();
    Ok(ShiftOperator {
        sigma: sigma.clone(),
        n,
        dim,
        matrix,
        basis_truncation: l,
        basis,
    })
}

impl ShiftOperator {
    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    /// Largest modulus strictly above the diagonal.
    pub fn upper_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.matrix.iter().enumerate() {
            for v in &row[i + 1..] {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.matrix[i][i]).collect()
    }

    pub fn log_abs_det(&self) -> f64 {
        self.diagonal().iter().map(|d| d.norm().ln()).sum()
    }

    /// Maximal deviation of the diagonal from `(λ_j)` and from `(λ̄_j)`.
    pub fn diagonal_deviation(&self) -> (f64, f64) {
        let seq = self.sigma.sequence(self.n);
        let diag = self.diagonal();
        let dev = |f: &dyn Fn(Complex64) -> Complex64| {
            diag.iter().zip(&seq).map(|(d, s)| (d - f(*s)).norm()).fold(0.0, f64::max)
        };
        (dev(&|s| s), dev(&|s| s.conj()))
    }

    pub fn diagonal_match(&self) -> DiagonalMatch {
        let (plain, conj) = self.diagonal_deviation();
        let tol = 1e-9;
        match (plain < tol, conj < tol) {
            (true, true) => DiagonalMatch::Both,
            (false, true) => DiagonalMatch::Conjugate,
            (true, false) => DiagonalMatch::Lambda,
            (false, false) => DiagonalMatch::Neither,
        }
    }

    /// `‖S‖` in `ℓ∞_A`; the backward shift on a model space of dimension
    /// above one has norm one, which is recorded rather than computed.
    pub fn reported_norm(&self) -> Option<f64> {
        (self.dim > 1).then_some(1.0)
    }

    /// Taylor coefficients of `Σ c_i e_i`.
    pub fn synthesize(&self, coords: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.basis_truncation];
        for (c, e) in coords.iter().zip(&self.basis) {
            for (o, v) in out.iter_mut().zip(e) {
                *o += c * v;
            }
        }
        out
    }

    /// Coordinates of `S⁻¹ f` from those of `f`. In coordinates `S` acts
    /// by the transpose of `matrix`, which is upper triangular.
    pub fn solve_inverse(&self, coords: &[Complex64]) -> Vec<Complex64> {
        let mut x = coords.to_vec();
        for j in (0..self.dim).rev() {
            let mut acc = x[j];
            for i in j + 1..self.dim {
                acc -= self.matrix[i][j] * x[i];
            }
            x[j] = acc / self.matrix[j][j];
        }
        x
    }

    pub fn to_json(&self) -> String {
        let doc = ShiftDoc {
            dim: self.dim,
            n: self.n,
            basis_truncation: self.basis_truncation,
            upper_residual: self.upper_residual(),
            log_abs_det: self.log_abs_det(),
            diagonal_match: self.diagonal_match(),
            matrix: self.matrix.iter().map(|r| r.iter().map(|c| [c.re, c.im]).collect()).collect(),
        };
        serde_json::to_string(&doc).expect("plain data serializes")
    }
}

#[derive(Serialize)]
struct ShiftDoc {
    dim: usize,
    n: usize,
    basis_truncation: usize,
    upper_residual: f64,
    log_abs_det: f64,
    diagonal_match: DiagonalMatch,
    matrix: Vec<Vec<[f64; 2]>>,
}

fn sup_abs(c: &[Complex64]) -> f64 {
    c.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Heuristic `ℓ∞_A` norm of `S⁻¹`: power iteration from the last basis
/// vector, keeping the largest ratio `‖S⁻¹f‖/‖f‖` seen. Every ratio is a
/// genuine lower bound, so the estimate never overshoots the true norm.
pub fn estimate_inverse_norm(op: &ShiftOperator, iterations: usize) -> f64 {
    let mut coords = vec![Complex64::default(); op.dim];
    coords[op.dim - 1] = Complex64::new(1.0, 0.0);
    let mut best = 0.0f64;
    for _ in 0..iterations.max(1) {
        let f_norm = sup_abs(&op.synthesize(&coords));
        let next = op.solve_inverse(&coords);
        let g_norm = sup_abs(&op.synthesize(&next));
        best = best.max(g_norm / f_norm);
        let scale = 1.0 / g_norm;
        coords = next.into_iter().map(|c| c * scale).collect();
    }
    best
}

pub const SCHAFFER_HEADER: &str = "n,N,e_peak,g0_mod,sinv_lb,det_mod,ratio,phi_lb";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchafferReport {
    pub n: u64,
    #[serde(rename = "N")]
    pub order: usize,
    /// `‖ê_{nm}‖_{ℓ∞}`.
    pub e_peak: f64,
    pub g0_mod: DecimalScaled,
    pub g0_arg: f64,
    /// `‖ĝ‖_{ℓ∞} / ‖ê_{nm}‖_{ℓ∞}`, a lower bound for `‖S⁻¹‖`.
    pub sinv_lb: DecimalScaled,
    /// `∏|λ_j|ⁿ`.
    pub det_mod: DecimalScaled,
    /// `det_mod · sinv_lb`.
    pub schaffer_ratio: f64,
    pub phi_lb: f64,
}

impl SchafferReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{},{},{},{:.16e},{:.16e}",
            self.n,
            self.order,
            self.e_peak,
            self.g0_mod,
            self.sinv_lb,
            self.det_mod,
            self.schaffer_ratio,
            self.phi_lb
        )
    }
}

pub fn schaffer_csv(rows: &[SchafferReport]) -> String {
    let mut out = String::from(SCHAFFER_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Coefficients of `ê_{nm} = (1 − |λ_m|²)^{1/2} Bⁿ / (z − λ_m)`, the last
/// Malmquist–Walsh vector, by the same certified sampling as `Bⁿ`.
pub fn last_basis_coeffs(sigma: &Spectrum, n: u64, opts: SamplerOptions) -> Result<Vec<Complex64>> {
    let b = sigma.product();
    let lm = *sigma.lambdas().last().expect("nonempty");
    let c = (1.0 - lm.norm_sqr()).sqrt();
    let power = coefficients::boundary_power(&b, n);
    let f = |theta: f64| c * power(theta) / (Complex64::from_polar(1.0, theta) - lm);
    coefficients::taylor_coefficients(f, 1.0, initial_samples(&b, n), opts).map(|r| r.0)
}

/// `ln|g(0)|` and `arg g(0)` for `g(0) = −(1 − |λ_m|²)^{1/2} ∏ (−λ̄_j)^{−n}`.
pub fn g0_log_polar(sigma: &Spectrum, n: u64) -> (f64, f64) {
    let lm = *sigma.lambdas().last().expect("nonempty");
    let nf = n as f64;
    let ln = 0.5 * (1.0 - lm.norm_sqr()).ln() - nf * sigma.lambdas().iter().map(|l| l.norm().ln()).sum::<f64>();
    // arg of −∏(−λ̄_j)^{−n}
    let turns: f64 = sigma.lambdas().iter().map(|l| (nf * (-l.conj()).arg()).rem_euclid(TAU)).sum();
    let arg = (2.0 * PI - turns).rem_euclid(TAU) - PI;
    (ln, arg)
}

/// Matrix-free Schäffer quantities from `g = g(0) + z·e_{nm}`.
pub fn schaffer_lower_bound(sigma: &Spectrum, n: u64, eps: f64) -> Result<SchafferReport> {
    if n == 0 {
        return Err(Error::InvalidInput("power n must be at least 1".into()));
    }
    let opts = SamplerOptions::with_eps(eps);
    let b = sigma.product();
    let order = phase::analyze(&b)?.order;
    let e = last_basis_coeffs(sigma, n, opts)?;
    let e_peak = sup_abs(&e);
    let (g0_ln, g0_arg) = g0_log_polar(sigma, n);
    let sinv_ln = g0_ln.max(e_peak.ln()) - e_peak.ln();
    let det_ln = sigma.log_det_mod(n);
    let bn = coefficients::fourier_coeffs_with(&b, n, opts)?;
    Ok(SchafferReport {
        n,
        order,
        e_peak,
        g0_mod: DecimalScaled::from_ln(g0_ln),
        g0_arg,
        sinv_lb: DecimalScaled::from_ln(sinv_ln),
        det_mod: DecimalScaled::from_ln(det_ln),
        schaffer_ratio: (det_ln + sinv_ln).exp(),
        phi_lb: 1.0 / bn.sup().0 - det_ln.exp(),
    })
}

pub fn schaffer_scan(sigma: &Spectrum, n_list: &[u64], eps: f64) -> Result<Vec<SchafferReport>> {
    coefficients::check_n_list(n_list)?;
    n_list.par_iter().map(|&n| schaffer_lower_bound(sigma, n, eps)).collect()
}

/// `1/‖B̂ⁿ‖_{ℓ∞} − ∏|λ_j|ⁿ`.
pub fn phi_lower_bound(sigma: &Spectrum, n: u64) -> Result<f64> {
    let b = sigma.product();
    let s = coefficients::fourier_coeffs(&b, n, coefficients::DEFAULT_EPS)?;
    Ok(1.0 / s.sup().0 - sigma.log_det_mod(n).exp())
}
