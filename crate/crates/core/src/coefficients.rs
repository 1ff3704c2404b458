//! Taylor coefficients of functions in H² from boundary samples, with a
//! doubling loop that certifies the aliasing error, plus `ℓ^p` scans of `Bⁿ`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product::BlaschkeProduct;

pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_SAMPLE_CAP: usize = 1 << 24;

#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub eps: f64,
    pub cap: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            eps: DEFAULT_EPS,
            cap: DEFAULT_SAMPLE_CAP,
        }
    }
}

impl SamplerOptions {
    pub fn with_eps(eps: f64) -> Self {
        SamplerOptions {
            eps,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1e-3) {
            return Err(Error::InvalidInput(format!("eps must lie in (0, 1e-3), got {}", self.eps)));
        }
        Ok(())
    }
}

/// Taylor coefficients `f̂(0..K)` of a function with known `ℓ²` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSeries {
    pub n: u64,
    #[serde(with = "pairs")]
    pub coeffs: Vec<Complex64>,
    /// Number of samples in the final round.
    pub samples: usize,
    pub aliasing_bound: f64,
}

mod pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl CoefficientSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(max_k |c_k|, argmax)`; the first index wins ties.
    pub fn sup(&self) -> (f64, usize) {
        sup_of(&self.coeffs)
    }

    pub fn l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

fn sup_of(c: &[Complex64]) -> (f64, usize) {
    let mut best = (0.0, 0);
    for (k, v) in c.iter().enumerate() {
        let a = v.norm();
        if a > best.0 {
            best = (a, k);
        }
    }
    best
}

/// Samples `f` at `M` equispaced points of the circle and returns its first
/// `M/2` Taylor coefficients, doubling `M` from `initial` until the retained
/// `ℓ²` norm is within `eps` of `expected_l2` and the sup norm is stable to
/// `eps/10` between consecutive rounds. The retained length is then cut to
/// the shortest prefix whose discarded tail has `ℓ²` norm below `eps`.
pub fn taylor_coefficients<F>(
    f: F,
    expected_l2: f64,
    initial: usize,
    opts: SamplerOptions,
) -> Result<(Vec<Complex64>, usize, f64)>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    opts.validate()?;
    let mut m = initial.max(8).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let mut previous_sup: Option<f64> = None;
    loop {
        if m > opts.cap {
            return Err(Error::BudgetExceeded {
                required: m,
                cap: opts.cap,
            });
        }
        let mut buf: Vec<Complex64> = (0..m)
            .into_par_iter()
            .map(|j| f(TAU * j as f64 / m as f64))
            .collect();
        planner.plan_fft_forward(m).process(&mut buf);
        let scale = 1.0 / m as f64;
        buf.truncate(m / 2);
        buf.iter_mut().for_each(|c| *c *= scale);

        let l2 = buf.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let residual = (l2 - expected_l2).abs();
        let (sup, _) = sup_of(&buf);
        if let Some(prev) = previous_sup {
            let change = (sup - prev).abs();
            if residual < opts.eps && change < opts.eps / 10.0 {
                let keep = retained_length(&buf, opts.eps);
                buf.truncate(keep);
                return Ok((buf, m, residual + change));
            }
        }
        previous_sup = Some(sup);
        m *= 2;
    }
}

fn retained_length(c: &[Complex64], eps: f64) -> usize {
    let target = eps * eps;
    let mut tail = 0.0;
    for k in (0..c.len()).rev() {
        let next = tail + c[k].norm_sqr();
        if next >= target {
            return k + 1;
        }
        tail = next;
    }
    1
}

/// First sample count tried for `Bⁿ`: covers the instantaneous frequency
/// range `[0, n·max ψ']` four times over.
pub fn initial_samples(b: &BlaschkeProduct, n: u64) -> usize {
    let band = (n as f64 * b.max_psi_prime()).ceil() as usize + b.degree();
    (4 * band).next_power_of_two()
}

/// Boundary values of `Bⁿ` computed as `exp(i·n·arg B)`, which keeps them
/// unimodular regardless of `n`.
pub fn boundary_power(b: &BlaschkeProduct, n: u64) -> impl Fn(f64) -> Complex64 + Sync + '_ {
    let nf = n as f64;
    move |theta| Complex64::from_polar(1.0, nf * b.eval_boundary(theta).arg())
}

/// Fourier coefficients `B̂ⁿ(k)` with default sample cap.
pub fn fourier_coeffs(b: &BlaschkeProduct, n: u64, eps: f64) -> Result<CoefficientSeries> {
    fourier_coeffs_with(b, n, SamplerOptions::with_eps(eps))
}

pub fn fourier_coeffs_with(
    b: &BlaschkeProduct,
    n: u64,
    opts: SamplerOptions,
) -> Result<CoefficientSeries> {
    if n == 0 {
        return Err(Error::InvalidInput("power n must be at least 1".into()));
    }
    let (coeffs, samples, aliasing_bound) =
        taylor_coefficients(boundary_power(b, n), 1.0, initial_samples(b, n), opts)?;
    Ok(CoefficientSeries {
        n,
        coeffs,
        samples,
        aliasing_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub n: u64,
    pub sup: f64,
    pub argmax_k: usize,
    pub l1: f64,
    pub l2: f64,
}

impl NormRow {
    pub fn from_series(s: &CoefficientSeries) -> Self {
        let (sup, argmax_k) = s.sup();
        NormRow {
            n: s.n,
            sup,
            argmax_k,
            l1: s.l1(),
            l2: s.l2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScan {
    pub rows: Vec<NormRow>,
}

pub const NORM_SCAN_HEADER: &str = "n,sup,argmax_k,l1,l2";

impl NormScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(NORM_SCAN_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.16e},{},{:.16e},{:.16e}", r.n, r.sup, r.argmax_k, r.l1, r.l2);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn column(&self, column: Column) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match column {
                Column::Sup => r.sup,
                Column::L1 => r.l1,
            })
            .collect()
    }
}

pub(crate) fn check_n_list(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("n_list is empty".into()));
    }
    if n_list[0] == 0 {
        return Err(Error::InvalidInput("n_list entries must be positive".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("n_list must be strictly increasing".into()));
    }
    Ok(())
}

pub fn norm_scan(b: &BlaschkeProduct, n_list: &[u64], eps: f64) -> Result<NormScan> {
    norm_scan_with(b, n_list, SamplerOptions::with_eps(eps))
}

pub fn norm_scan_with(b: &BlaschkeProduct, n_list: &[u64], opts: SamplerOptions) -> Result<NormScan> {
    check_n_list(n_list)?;
    opts.validate()?;
    let rows = n_list
        .par_iter()
        .map(|&n| fourier_coeffs_with(b, n, opts).map(|s| NormRow::from_series(&s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormScan { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    Sup,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn fit_exponent(scan: &NormScan, column: Column) -> Result<ExponentFit> {
    let xs: Vec<f64> = scan.rows.iter().map(|r| r.n as f64).collect();
    fit_power_law(&xs, &scan.column(column))
}

/// Least-squares line through `(log x, log y)`; needs at least four points.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput("fit columns differ in length".into()));
    }
    if xs.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} rows, need at least 4", xs.len())));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(**v > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive value {v}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        slope,
        intercept,
        max_residual,
    })
}
