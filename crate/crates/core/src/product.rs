//! Finite Blaschke products and closed-form boundary phase derivatives.
//!
//! With `u_j = conj(λ_j) e^{iθ}` the phase derivative is
//! `ψ'(θ) = -m + 2 Re Σ_j 1/(1 - u_j)`, and since `d/dθ = i u d/du` every
//! higher derivative reduces to
//!
//! ```text
//! ψ^{(s+1)}(θ) = 2 Re Σ_j i^s Σ_{p=1}^{s} S2(s,p) p! u_j^p / (1 - u_j)^{p+1}
//! ```
//!
//! with `S2` the Stirling numbers of the second kind. The inner sum is a
//! polynomial in `q = u/(1-u)` divided by `1 - u`, evaluated by Horner's rule.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Default tolerance for [`Angle`] equality, in radians.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-9;
/// Default highest phase derivative order accepted by [`BlaschkeProduct::psi_derivative`].
pub const DEFAULT_MAX_ORDER: usize = 12;
/// Hard ceiling on derivative orders (size of the Stirling table).
pub const ORDER_CEILING: usize = 24;

/// An angle reduced to its representative in `[0, 2π)`.
///
/// Equality is approximate: two angles are equal when their circular
/// distance is below [`DEFAULT_ANGLE_TOL`]. Use [`Angle::approx_eq`] for a
/// different tolerance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        let mut r = theta.rem_euclid(TAU);
        if r >= TAU {
            r = 0.0;
        }
        Angle(r)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Distance on the circle, in `[0, π]`.
    pub fn distance(self, other: Angle) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(TAU - d)
    }

    pub fn approx_eq(self, other: Angle, tol: f64) -> bool {
        self.distance(other) < tol
    }
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(*other, DEFAULT_ANGLE_TOL)
    }
}

impl From<f64> for Angle {
    fn from(theta: f64) -> Self {
        Angle::new(theta)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `c[s][p] = S2(s, p) * p!`, the coefficients of `(u d/du)^s` acting on `1/(1-u)`.
fn stirling_factorial_table() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = ORDER_CEILING;
        let mut s2 = vec![vec![0f64; n + 1]; n + 1];
        s2[0][0] = 1.0;
        for s in 1..=n {
            for p in 1..=s {
                s2[s][p] = p as f64 * s2[s - 1][p] + s2[s - 1][p - 1];
            }
        }
        let mut out = vec![vec![0f64; n + 1]; n + 1];
        for s in 0..=n {
            let mut fact = 1.0;
            for p in 1..=s {
                fact *= p as f64;
                out[s][p] = s2[s][p] * fact;
            }
        }
        out
    })
}

/// A finite Blaschke product `B(z) = Π (z - λ_j)/(1 - conj(λ_j) z)`, with all
/// zeros in the punctured open disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    max_order: usize,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::InvalidProduct("zero list is empty".into()));
        }
        for (j, z) in zeros.iter().enumerate() {
            let r = z.norm();
            if !r.is_finite() || r >= 1.0 {
                return Err(Error::InvalidProduct(format!(
                    "zero {j} = {z} lies outside the open unit disk"
                )));
            }
            if r == 0.0 {
                return Err(Error::InvalidProduct(format!("zero {j} is the origin")));
            }
        }
        Ok(BlaschkeProduct {
            zeros,
            max_order: DEFAULT_MAX_ORDER,
        })
    }

    /// Raises or lowers the highest derivative order callers may request.
    pub fn with_max_order(mut self, max_order: usize) -> Result<Self> {
        if max_order == 0 || max_order >= ORDER_CEILING {
            return Err(Error::OrderOutOfRange {
                order: max_order,
                max: ORDER_CEILING - 1,
            });
        }
        self.max_order = max_order;
        Ok(self)
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `(ρ_j, θ_j)` with `θ_j ∈ (-π, π]`.
    pub fn polar(&self) -> Vec<(f64, f64)> {
        self.zeros.iter().map(|z| z.to_polar()).collect()
    }

    /// `B(0) = Π (-λ_j)`.
    pub fn value_at_origin(&self) -> Complex64 {
        self.zeros.iter().map(|z| -z).product()
    }

    /// `B(z)` anywhere off the poles.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .map(|l| (z - l) / (1.0 - l.conj() * z))
            .product()
    }

    pub fn eval_boundary(&self, theta: impl Into<Angle>) -> Complex64 {
        self.eval(Complex64::from_polar(1.0, theta.into().radians()))
    }

    /// `ψ'(θ)` as a sum of Poisson kernels; strictly positive.
    pub fn psi_prime(&self, theta: impl Into<Angle>) -> f64 {
        let t = theta.into().radians();
        self.zeros
            .iter()
            .map(|z| {
                let (r, a) = z.to_polar();
                (1.0 - r * r) / (1.0 + r * r - 2.0 * r * (t - a).cos())
            })
            .sum()
    }

    /// `ψ^{(order)}(θ)` for `1 <= order <= max_order`.
    pub fn psi_derivative(&self, theta: impl Into<Angle>, order: usize) -> Result<f64> {
        if order == 0 || order > self.max_order {
            return Err(Error::OrderOutOfRange {
                order,
                max: self.max_order,
            });
        }
        Ok(self.psi_derivative_unchecked(theta.into().radians(), order))
    }

    /// Same as [`psi_derivative`](Self::psi_derivative) without the configured
    /// cap; `order` must stay below [`ORDER_CEILING`]. Accepts any real `theta`.
    pub(crate) fn psi_derivative_unchecked(&self, theta: f64, order: usize) -> f64 {
        debug_assert!(order >= 1 && order <= ORDER_CEILING);
        let e = Complex64::from_polar(1.0, theta);
        let s = order - 1;
        if s == 0 {
            let sum: Complex64 = self.zeros.iter().map(|l| 1.0 / (1.0 - l.conj() * e)).sum();
            return -(self.degree() as f64) + 2.0 * sum.re;
        }
        let coeffs = &stirling_factorial_table()[s];
        let mut total = Complex64::new(0.0, 0.0);
        for l in &self.zeros {
            let u = l.conj() * e;
            let inv = 1.0 / (1.0 - u);
            let q = u * inv;
            // Horner in q over p = s..=1, then one extra factor of q.
            let mut acc = Complex64::new(coeffs[s], 0.0);
            for p in (1..s).rev() {
                acc = acc * q + coeffs[p];
            }
            total += acc * q * inv;
        }
        // i^s
        let rot = match s % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        2.0 * (rot * total).re
    }

    /// Continuous argument `ψ_B(θ)` anchored at `ψ_B(0) = arg B(1) ∈ (-π, π]`,
    /// computed by adaptive quadrature of `ψ'` over `[0, θ]` (absolute
    /// tolerance `1e-10`). `θ` is not reduced, so the result winds by
    /// `2πm` per turn.
    pub fn psi(&self, theta: f64) -> f64 {
        let anchor = self.eval(Complex64::new(1.0, 0.0)).arg();
        anchor + quad::integrate_real(|t| self.psi_prime(t), 0.0, theta, 1e-10)
    }

    /// Maximum of `ψ'` over the circle, from a dense grid followed by
    /// golden-section refinement around the best sample.
    pub fn max_psi_prime(&self) -> f64 {
        let grid = 512 * self.degree();
        let h = TAU / grid as f64;
        let (best, _) = (0..grid)
            .map(|i| (i, self.psi_prime(i as f64 * h)))
            .fold((0, f64::MIN), |acc, v| if v.1 > acc.1 { v } else { acc });
        let mut lo = (best as f64 - 1.0) * h;
        let mut hi = (best as f64 + 1.0) * h;
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if self.psi_prime(a) > self.psi_prime(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        self.psi_prime(0.5 * (lo + hi)).max(self.psi_prime(best as f64 * h))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeroDoc {
    pub re: f64,
    pub im: f64,
}

/// JSON document shape `{"zeros": [{"re": .., "im": ..}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductDoc {
    pub zeros: Vec<ZeroDoc>,
}

impl From<&BlaschkeProduct> for ProductDoc {
    fn from(b: &BlaschkeProduct) -> Self {
        ProductDoc {
            zeros: b.zeros.iter().map(|z| ZeroDoc { re: z.re, im: z.im }).collect(),
        }
    }
}

impl TryFrom<ProductDoc> for BlaschkeProduct {
    type Error = Error;

    fn try_from(doc: ProductDoc) -> Result<Self> {
        BlaschkeProduct::new(doc.zeros.iter().map(|z| Complex64::new(z.re, z.im)).collect())
    }
}

impl Serialize for BlaschkeProduct {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProductDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlaschkeProduct {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ProductDoc::deserialize(d)?;
        BlaschkeProduct::try_from(doc).map_err(serde::de::Error::custom)
    }
}

impl BlaschkeProduct {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProductDoc =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        BlaschkeProduct::try_from(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProductDoc::from(self)).expect("plain data serializes")
    }
}

/// A single Blaschke factor as a product, the common test subject.
pub fn single_factor(lambda: Complex64) -> Result<BlaschkeProduct> {
    BlaschkeProduct::new(vec![lambda])
}
