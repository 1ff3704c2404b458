//! Blaschke products whose coefficient sup norm decays like `n^{−1/N}` for a
//! prescribed `N`, built from parameters `w` through `λ = (w − 1)/(w + 1)`,
//! together with validators for the power-sum conditions they rely on.
//!
//! With `w = (1 + λ)/(1 − λ)` the phase derivative at `θ = 0` expands in
//! the power sums `Re Σ w_j^k`; equal odd power sums up to `2q − 1` make
//! `ψ''` vanish to order `2q − 1` at the origin. The inequalities keep the
//! order exact and rule out competing points at `θ = π`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::phase::{self, PhasePortrait};
use crate::product::{Angle, BlaschkeProduct};
use crate::surd::QuadSurd;

const EQ_TOL: f64 = 1e-12;
const NE_MARGIN: f64 = 1e-9;
const MAX_T_RETRIES: usize = 6;

/// Default `t` for the general family. See `construct_general_validated`.
pub fn default_general_t() -> f64 {
    0.95 / TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "general_N")]
    General,
    #[serde(rename = "deg2_conjugate")]
    Deg2Conjugate,
    #[serde(rename = "deg2_real")]
    Deg2Real,
    #[serde(rename = "deg4")]
    Deg4,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::General => "general_N",
            Family::Deg2Conjugate => "deg2_conjugate",
            Family::Deg2Real => "deg2_real",
            Family::Deg4 => "deg4",
        }
    }
}

/// A parameter given either as a float (real or complex) or exactly as
/// `a + b·√d` with rational strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex { re: f64, im: f64 },
    Surd { a: String, b: String, d: i64 },
}

impl Scalar {
    pub fn to_complex(&self) -> Result<Complex64> {
        Ok(match self {
            Scalar::Real(x) => Complex64::new(*x, 0.0),
            Scalar::Complex { re, im } => Complex64::new(*re, *im),
            Scalar::Surd { .. } => self.exact()?.expect("surd").to_complex(),
        })
    }

    pub fn exact(&self) -> Result<Option<QuadSurd>> {
        match self {
            Scalar::Surd { a, b, d } => QuadSurd::parse(a, b, *d).map(Some),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub family: Family,
    #[serde(default)]
    pub params: Value,
    #[serde(rename = "expected_N", default, skip_serializing_if = "Option::is_none")]
    pub expected_n: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralParams {
    #[serde(rename = "N")]
    n: usize,
    t: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConjugateParams {
    w: Scalar,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairParams {
    w1: Scalar,
    w2: Scalar,
}

fn params<T: for<'de> Deserialize<'de>>(family: Family, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone())
        .map_err(|e| Error::InvalidInput(format!("{} params: {e}", family.name())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validation {
    Exact,
    Float,
    Phase,
}

/// `Re Σ_j w_j^k` for one exponent, as checked by the validator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    pub k: i32,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleBuild {
    pub family: Family,
    #[serde(rename = "expected_N")]
    pub expected_n: usize,
    #[serde(with = "zeros")]
    pub product: BlaschkeProduct,
    pub validation: Validation,
    pub power_sums: Vec<PowerSum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub t_retries: usize,
}

mod zeros {
    use crate::product::{BlaschkeProduct, ProductDoc};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(b: &BlaschkeProduct, s: S) -> Result<S::Ok, S::Error> {
        ProductDoc::from(b).zeros.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BlaschkeProduct, D::Error> {
        let zeros = Deserialize::deserialize(d)?;
        BlaschkeProduct::try_from(ProductDoc { zeros }).map_err(serde::de::Error::custom)
    }
}

impl ExampleBuild {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

impl ExampleSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("example spec: {e}")))
    }

    pub fn build(&self) -> Result<ExampleBuild> {
        let built = match self.family {
            Family::General => {
                let p: GeneralParams = params(self.family, &self.params)?;
                let g = construct_general_validated(p.n, p.t.unwrap_or_else(default_general_t))?;
                ExampleBuild {
                    family: self.family,
                    expected_n: p.n,
                    product: g.product,
                    validation: Validation::Phase,
                    power_sums: Vec::new(),
                    t: Some(g.t),
                    t_retries: g.retries,
                }
            }
            Family::Deg2Conjugate => {
                let p: ConjugateParams = params(self.family, &self.params)?;
                from_pair_data(self.family, 5, &[p.w])?
            }
            Family::Deg2Real => {
                let p: PairParams = params(self.family, &self.params)?;
                from_pair_data(self.family, 5, &[p.w1, p.w2])?
            }
            Family::Deg4 => {
                let p: PairParams = params(self.family, &self.params)?;
                from_pair_data(self.family, 7, &[p.w1, p.w2])?
            }
        };
        if let Some(want) = self.expected_n {
            if want != built.expected_n {
                return Err(Error::InvalidInput(format!(
                    "expected_N = {want} but family {} at these parameters has N = {}",
                    self.family.name(),
                    built.expected_n
                )));
            }
        }
        Ok(built)
    }
}

fn from_pair_data(family: Family, expected_n: usize, ws: &[Scalar]) -> Result<ExampleBuild> {
    let exact: Option<Vec<QuadSurd>> = ws.iter().map(|w| w.exact()).collect::<Result<Vec<_>>>()?.into_iter().collect();
    let (product, power_sums, validation) = match exact {
        Some(e) => {
            let (b, sums) = match family {
                Family::Deg2Conjugate => construct_deg2_conjugate_exact(&e[0])?,
                Family::Deg2Real => construct_deg2_real_exact(&e[0], &e[1])?,
                _ => construct_deg4_exact(&e[0], &e[1])?,
            };
            (b, sums, Validation::Exact)
        }
        None => {
            let zs: Vec<Complex64> = ws.iter().map(Scalar::to_complex).collect::<Result<_>>()?;
            let (b, sums) = match family {
                Family::Deg2Conjugate => deg2_conjugate_checked(zs[0])?,
                Family::Deg2Real => {
                    if zs.iter().any(|z| z.im != 0.0) {
                        return Err(Error::ParameterOutOfRange("deg2_real needs real w1, w2".into()));
                    }
                    deg2_real_checked(zs[0].re, zs[1].re)?
                }
                _ => deg4_checked(zs[0], zs[1])?,
            };
            (b, sums, Validation::Float)
        }
    };
    Ok(ExampleBuild {
        family,
        expected_n,
        product,
        validation,
        power_sums,
        t: None,
        t_retries: 0,
    })
}

/// `(w − 1)/(w + 1)`.
pub fn cayley(w: Complex64) -> Complex64 {
    (w - 1.0) / (w + 1.0)
}

fn check_domain(w: Complex64) -> Result<()> {
    if !(w.re > 0.0) || !w.im.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("w = {w} needs positive real part")));
    }
    if w == Complex64::new(1.0, 0.0) {
        return Err(Error::ParameterOutOfRange("w = 1 puts a zero at the origin".into()));
    }
    Ok(())
}

/// The general family: `N` zeros arranged so that `ψ''` vanishes to order
/// `N − 2` at `θ = 0` for every admissible `t`.
pub fn construct_general(order: usize, t: f64) -> Result<BlaschkeProduct> {
    if order < 3 {
        return Err(Error::ParameterOutOfRange(format!("N = {order} must be at least 3")));
    }
    if !(t > 0.0 && t < 1.0 / TAU) {
        return Err(Error::ParameterOutOfRange(format!("t = {t} must lie in (0, 1/(2π))")));
    }
    let nf = order as f64;
    let zeta = Complex64::from_polar(t, PI * (nf - 1.0) / (2.0 * nf));
    let zeros = (1..=order)
        .map(|j| {
            let c = (zeta * Complex64::from_polar(1.0, TAU * j as f64 / nf)).conj();
            c / (1.0 + c)
        })
        .collect();
    let b = BlaschkeProduct::new(zeros)?;
    // Orders up to N must be resolvable by the phase analysis.
    if order >= b.max_order() {
        return b.with_max_order(order + 1);
    }
    Ok(b)
}

#[derive(Debug, Clone)]
pub struct GeneralBuild {
    pub product: BlaschkeProduct,
    pub portrait: PhasePortrait,
    pub t: f64,
    pub retries: usize,
}

/// Builds the general family and checks with the phase analysis that the
/// origin carries the maximal order `N`; on failure halves `t`, at most
/// six times.
///
/// The construction only needs `t` small enough for the leading term of
/// `ψ''` to dominate, but `ψ'` varies by `O(tᴺ)` so the decay only becomes
/// visible once `n·tᴺ` is large. The default therefore sits near the top of
/// the admissible range instead of at a cautious small value.
pub fn construct_general_validated(order: usize, t0: f64) -> Result<GeneralBuild> {
    let mut t = t0;
    let mut last = String::new();
    for retries in 0..=MAX_T_RETRIES {
        let b = construct_general(order, t)?;
        match phase::analyze(&b) {
            Ok(p) => {
                let origin_ok = p
                    .points
                    .iter()
                    .any(|c| c.xi.approx_eq(Angle::new(0.0), 1e-8) && c.order == order);
                if p.order == order && origin_ok {
                    return Ok(GeneralBuild {
                        product: b,
                        portrait: p,
                        t,
                        retries,
                    });
                }
                last = format!("portrait N = {} at t = {t}", p.order);
            }
            Err(e) => last = format!("{e} at t = {t}"),
        }
        t /= 2.0;
    }
    Err(Error::ConditionViolated {
        condition: format!("origin is the maximal-order point with N = {order} ({last})"),
        residual: t,
    })
}

// ---- float validators -------------------------------------------------

fn re_power_sum(ws: &[Complex64], k: i32) -> f64 {
    ws.iter().map(|w| w.powi(k).re).sum()
}

fn magnitude(ws: &[Complex64], k: i32) -> f64 {
    ws.iter().map(|w| w.norm().powi(k)).sum::<f64>().max(1.0)
}

/// Checks `S(1) = S(3) = … = S(top − 2) ≠ S(top)` and `S(−1) ≠ S(−3)` for
/// `S(k) = Re Σ w_j^k`.
fn float_conditions(ws: &[Complex64], top: i32) -> Result<Vec<PowerSum>> {
    let ks: Vec<i32> = (1..=top).step_by(2).chain([-1, -3]).collect();
    let sums: Vec<PowerSum> = ks
        .iter()
        .map(|&k| PowerSum {
            k,
            value: re_power_sum(ws, k),
            exact: None,
        })
        .collect();
    let at = |k: i32| sums.iter().find(|s| s.k == k).expect("listed").value;
    for k in (3..top).step_by(2) {
        let r = (at(k) - at(1)).abs();
        if r > EQ_TOL * magnitude(ws, k) {
            return Err(Error::ConditionViolated {
                condition: format!("Re S(1) = Re S({k})"),
                residual: r,
            });
        }
    }
    for (k1, k2) in [(top - 2, top), (-1, -3)] {
        let r = (at(k1) - at(k2)).abs();
        if r <= NE_MARGIN {
            return Err(Error::ConditionViolated {
                condition: format!("Re S({k1}) != Re S({k2})"),
                residual: r,
            });
        }
    }
    Ok(sums)
}

fn deg2_conjugate_checked(w: Complex64) -> Result<(BlaschkeProduct, Vec<PowerSum>)> {
    check_domain(w)?;
    let sums = float_conditions(&[w], 5)?;
    let l = cayley(w);
    Ok((BlaschkeProduct::new(vec![l, l.conj()])?, sums))
}

fn deg2_real_checked(w1: f64, w2: f64) -> Result<(BlaschkeProduct, Vec<PowerSum>)> {
    let ws = [Complex64::new(w1, 0.0), Complex64::new(w2, 0.0)];
    for w in ws {
        check_domain(w)?;
    }
    let sums = float_conditions(&ws, 5)?;
    Ok((BlaschkeProduct::new(ws.iter().map(|&w| cayley(w)).collect())?, sums))
}

fn deg4_checked(w1: Complex64, w2: Complex64) -> Result<(BlaschkeProduct, Vec<PowerSum>)> {
    check_domain(w1)?;
    check_domain(w2)?;
    let sums = float_conditions(&[w1, w2], 7)?;
    let zeros = [w1, w2, w1.conj(), w2.conj()].iter().map(|&w| cayley(w)).collect();
    Ok((BlaschkeProduct::new(zeros)?, sums))
}

/// Conjugate pair `λ, λ̄` with `λ = (w − 1)/(w + 1)`.
pub fn construct_deg2_conjugate(w: Complex64) -> Result<BlaschkeProduct> {
    deg2_conjugate_checked(w).map(|r| r.0)
}

/// Two real zeros `(w_j − 1)/(w_j + 1)`.
pub fn construct_deg2_real(w1: f64, w2: f64) -> Result<BlaschkeProduct> {
    deg2_real_checked(w1, w2).map(|r| r.0)
}

/// Zeros from `w1, w2, w̄1, w̄2`.
pub fn construct_deg4(w1: Complex64, w2: Complex64) -> Result<BlaschkeProduct> {
    deg4_checked(w1, w2).map(|r| r.0)
}

// ---- exact validators -------------------------------------------------

fn exact_conditions(ws: &[QuadSurd], top: i32) -> Result<Vec<PowerSum>> {
    if ws.windows(2).any(|p| p[0].d != p[1].d) {
        return Err(Error::InvalidInput("exact parameters must share one radicand".into()));
    }
    let sum = |k: i32| -> Result<QuadSurd> {
        let mut acc = ws[0].rational(BigRational::zero());
        for w in ws {
            acc = &acc + &w.pow(k)?.real_part();
        }
        Ok(acc)
    };
    let ks: Vec<i32> = (1..=top).step_by(2).chain([-1, -3]).collect();
    let mut exact = Vec::new();
    for &k in &ks {
        exact.push((k, sum(k)?));
    }
    let at = |k: i32| &exact.iter().find(|e| e.0 == k).expect("listed").1;
    let residual = |a: &QuadSurd, b: &QuadSurd| (a - b).to_complex().norm();
    for k in (3..top).step_by(2) {
        if at(k) != at(1) {
            return Err(Error::ConditionViolated {
                condition: format!("Re S(1) = Re S({k})"),
                residual: residual(at(k), at(1)),
            });
        }
    }
    for (k1, k2) in [(top - 2, top), (-1, -3)] {
        if at(k1) == at(k2) {
            return Err(Error::ConditionViolated {
                condition: format!("Re S({k1}) != Re S({k2})"),
                residual: 0.0,
            });
        }
    }
    Ok(exact
        .into_iter()
        .map(|(k, v)| PowerSum {
            k,
            value: v.to_complex().re,
            exact: Some(v.to_string()),
        })
        .collect())
}

fn exact_domain(w: &QuadSurd) -> Result<Complex64> {
    let z = w.to_complex();
    if !(z.re > 0.0) || w.d < 0 && !w.a.is_positive() {
        return Err(Error::ParameterOutOfRange(format!("w = {w} needs positive real part")));
    }
    if w.b.is_zero() && w.a.is_one() {
        return Err(Error::ParameterOutOfRange("w = 1 puts a zero at the origin".into()));
    }
    Ok(z)
}

pub fn construct_deg2_conjugate_exact(w: &QuadSurd) -> Result<(BlaschkeProduct, Vec<PowerSum>)> {
    let z = exact_domain(w)?;
    let sums = exact_conditions(std::slice::from_ref(w), 5)?;
    let l = cayley(z);
    Ok((BlaschkeProduct::new(vec![l, l.conj()])?, sums))
}

pub fn construct_deg2_real_exact(w1: &QuadSurd, w2: &QuadSurd) -> Result<(BlaschkeProduct, Vec<PowerSum>)> {
    if !w1.is_real() || !w2.is_real() {
        return Err(Error::ParameterOutOfRange("deg2_real needs real w1, w2".into()));
    }
    let (z1, z2) = (exact_domain(w1)?, exact_domain(w2)?);
    let sums = exact_conditions(&[w1.clone(), w2.clone()], 5)?;
    Ok((BlaschkeProduct::new(vec![cayley(z1), cayley(z2)])?, sums))
}

pub fn construct_deg4_exact(w1: &QuadSurd, w2: &QuadSurd) -> Result<(BlaschkeProduct, Vec<PowerSum>)> {
    let (z1, z2) = (exact_domain(w1)?, exact_domain(w2)?);
    let sums = exact_conditions(&[w1.clone(), w2.clone()], 7)?;
    let zeros = [z1, z2, z1.conj(), z2.conj()].iter().map(|&w| cayley(w)).collect();
    Ok((BlaschkeProduct::new(zeros)?, sums))
}

// ---- reference parameters ---------------------------------------------

/// `w = 2 + i`.
pub fn reference_deg2_conjugate() -> QuadSurd {
    QuadSurd::from_ints((2, 1), (1, 1), -1).expect("valid radicand")
}

/// `w1 = 1/2`, `w2 = (1 + √13)/4`.
pub fn reference_deg2_real() -> (QuadSurd, QuadSurd) {
    (
        QuadSurd::from_ints((1, 2), (0, 1), 13).expect("valid radicand"),
        QuadSurd::from_ints((1, 4), (1, 4), 13).expect("valid radicand"),
    )
}

/// `w1 = 1 + 2i/√3`, `w2 = 2 + i/√3`.
pub fn reference_deg4() -> (QuadSurd, QuadSurd) {
    (
        QuadSurd::from_ints((1, 1), (2, 3), -3).expect("valid radicand"),
        QuadSurd::from_ints((2, 1), (1, 3), -3).expect("valid radicand"),
    )
}

pub fn reference_spec(family: Family) -> ExampleSpec {
    let surd = |w: &QuadSurd| Scalar::Surd {
        a: w.a.to_string(),
        b: w.b.to_string(),
        d: w.d,
    };
    let params = match family {
        Family::General => serde_json::json!({ "N": 5 }),
        Family::Deg2Conjugate => serde_json::json!({ "w": surd(&reference_deg2_conjugate()) }),
        Family::Deg2Real => {
            let (a, b) = reference_deg2_real();
            serde_json::json!({ "w1": surd(&a), "w2": surd(&b) })
        }
        Family::Deg4 => {
            let (a, b) = reference_deg4();
            serde_json::json!({ "w1": surd(&a), "w2": surd(&b) })
        }
    };
    ExampleSpec {
        family,
        params,
        expected_n: None,
    }
}
