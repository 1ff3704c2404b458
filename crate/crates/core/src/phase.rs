//! Zeros of `ψ''` on the circle, their orders, and the dominant class that
//! controls the decay exponent of `‖(Bⁿ)^‖_∞`.
//!
//! A zero of `ψ''` of multiplicity `q` has order `N = q + 2`. Multiple zeros
//! cannot be located accurately from `ψ''` alone (the sign-change bracket only
//! pins them to `ulp^{1/q}`), so each candidate is walked up the derivative
//! chain: once `ψ^{(s+1)}` is found to vanish, the point is re-polished as a
//! root of `ψ^{(s+1)}` by Newton's method. The walk stops at the first
//! derivative that clears the relative threshold, and that index is the order.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product::{Angle, BlaschkeProduct};

/// Relative threshold separating vanishing derivatives from non-vanishing ones.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default samples per zero of `B`.
pub const DEFAULT_GRID_PER_ZERO: usize = 1024;
/// Relative tolerance when grouping maximal-order points by `ψ'` value.
pub const CLASS_TOL: f64 = 1e-8;

// Points closer than this after polishing are the same zero.
const MERGE_RADIUS: f64 = 1e-7;

/// A zero `ξ` of `ψ''` together with the order `N` of the first
/// non-vanishing derivative there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub xi: Angle,
    pub order: usize,
    pub psi_prime: f64,
    /// `ψ^{(order)}(ξ)`, nonzero.
    #[serde(rename = "psi_N")]
    pub psi_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    pub points: Vec<CriticalPoint>,
    /// Maximal order over all points.
    #[serde(rename = "N")]
    pub order: usize,
    /// Maximal-order points grouped by equal `ψ'` value (indices into `points`).
    pub classes: Vec<Vec<usize>>,
    pub dominant: Vec<usize>,
    #[serde(rename = "D")]
    pub d: usize,
    pub representative: usize,
}

impl PhasePortrait {
    pub fn dominant_points(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.dominant.iter().map(move |&i| &self.points[i])
    }

    pub fn representative_point(&self) -> &CriticalPoint {
        &self.points[self.representative]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub grid_size: usize,
    pub tol: f64,
}

impl SearchOptions {
    pub fn for_product(b: &BlaschkeProduct) -> Self {
        SearchOptions {
            grid_size: DEFAULT_GRID_PER_ZERO * b.degree(),
            tol: DEFAULT_TOL,
        }
    }
}

struct Context<'a> {
    b: &'a BlaschkeProduct,
    tol: f64,
    step: f64,
    // scales[s] = max over the grid of |ψ^{(s)}|
    scales: Vec<f64>,
}

impl Context<'_> {
    fn d(&self, theta: f64, s: usize) -> f64 {
        self.b.psi_derivative_unchecked(theta, s)
    }

    fn vanishes(&self, theta: f64, s: usize) -> bool {
        self.d(theta, s).abs() <= self.tol * self.scales[s]
    }

    fn bisect(&self, s: usize, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = self.d(lo, s);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo < 1e-14 {
                break;
            }
            let fm = self.d(mid, s);
            if fm == 0.0 {
                return mid;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Newton iteration on `ψ^{(s)}` confined to one grid step around `x0`.
    /// Returns the iterate with the smallest residual.
    fn newton(&self, s: usize, x0: f64) -> Option<f64> {
        let mut x = x0;
        let mut best = (self.d(x, s).abs(), x);
        for _ in 0..200 {
            let f = self.d(x, s);
            let fp = self.d(x, s + 1);
            if f == 0.0 {
                return Some(x);
            }
            if fp == 0.0 || !fp.is_finite() {
                break;
            }
            let step = f / fp;
            x -= step;
            if (x - x0).abs() > self.step {
                return None;
            }
            let r = self.d(x, s).abs();
            if r < best.0 {
                best = (r, x);
            }
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        Some(best.1)
    }

    /// Walks the derivative chain from a point where `ψ^{(2..=s)}` vanish.
    fn resolve(&self, theta: f64, mut s: usize) -> Result<(f64, usize)> {
        let max = self.b.max_order();
        let mut xi = self.newton(s, theta).unwrap_or(theta);
        loop {
            if s + 1 > max {
                return Err(Error::MultiplicityOverflow { xi, max_order: max });
            }
            if !self.vanishes(xi, s + 1) {
                return Ok((xi, s + 1));
            }
            if let Some(x) = self.newton(s + 1, xi) {
                let consistent = (x - theta).abs() <= self.step
                    && (2..=s + 1).all(|j| self.vanishes(x, j));
                if consistent {
                    xi = x;
                }
            }
            s += 1;
        }
    }
}

/// Locates every zero of `ψ''` on `[0, 2π)` and its order.
///
/// Odd-multiplicity zeros come from sign changes of `ψ''` on the grid; even
/// ones from sign changes of `ψ'''` where `|ψ''|` is below threshold.
pub fn find_critical_points(
    b: &BlaschkeProduct,
    grid_size: usize,
    tol: f64,
) -> Result<Vec<CriticalPoint>> {
    let m = b.degree();
    if grid_size < 256 * m {
        return Err(Error::InvalidInput(format!(
            "grid_size {grid_size} below 256 per zero ({})",
            256 * m
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let step = TAU / grid_size as f64;
    let thetas: Vec<f64> = (0..grid_size).map(|i| i as f64 * step).collect();
    let top = b.max_order() + 1;
    let mut scales = vec![0.0; top + 1];
    for (s, slot) in scales.iter_mut().enumerate().skip(1) {
        *slot = thetas
            .iter()
            .map(|&t| b.psi_derivative_unchecked(t, s).abs())
            .fold(0.0, f64::max);
    }
    let ctx = Context {
        b,
        tol,
        step,
        scales,
    };

    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for s in [2usize, 3] {
        let values: Vec<f64> = thetas.iter().map(|&t| ctx.d(t, s)).collect();
        for i in 0..grid_size {
            let lo = thetas[i];
            let hi = lo + step;
            let (fa, fb) = (values[i], values[(i + 1) % grid_size]);
            let root = if fa == 0.0 {
                Some(lo)
            } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
                Some(ctx.bisect(s, lo, hi))
            } else {
                None
            };
            if let Some(r) = root {
                if s == 2 || ctx.vanishes(r, 2) {
                    candidates.push((r, s));
                }
            }
        }
    }

    let mut points: Vec<CriticalPoint> = Vec::new();
    for (theta, s) in candidates {
        let (xi, order) = ctx.resolve(theta, s)?;
        let angle = Angle::new(xi);
        if let Some(existing) = points.iter_mut().find(|p| p.xi.approx_eq(angle, MERGE_RADIUS)) {
            if order > existing.order {
                *existing = make_point(b, xi, order);
            }
            continue;
        }
        points.push(make_point(b, xi, order));
    }
    points.sort_by(|a, b| a.xi.radians().total_cmp(&b.xi.radians()));

    if points.len() > 1 {
        for i in 0..points.len() {
            let a = points[i].xi;
            let c = points[(i + 1) % points.len()].xi;
            if a.distance(c) < 4.0 * step {
                return Err(Error::GridTooCoarse {
                    first: a.radians(),
                    second: c.radians(),
                    step,
                });
            }
        }
    }
    Ok(points)
}

fn make_point(b: &BlaschkeProduct, xi: f64, order: usize) -> CriticalPoint {
    CriticalPoint {
        xi: Angle::new(xi),
        order,
        psi_prime: b.psi_prime(xi),
        psi_n: b.psi_derivative_unchecked(xi, order),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Size-free weight of a point's stationary-phase contribution,
/// `(N!/|ψ^{(N)}(ξ)|)^{1/N}`.
pub fn amplitude_weight(point: &CriticalPoint) -> f64 {
    let n = point.order;
    (factorial(n) / point.psi_n.abs()).powf(1.0 / n as f64)
}

/// Computes `N`, groups the maximal-order points by `ψ'` value, and picks the
/// class with the largest summed amplitude weight as the dominant one
/// (ties go to the class containing the smallest `ξ`).
pub fn classify(_b: &BlaschkeProduct, points: &[CriticalPoint]) -> Result<PhasePortrait> {
    let order = points.iter().map(|p| p.order).max().ok_or(Error::EmptyPortrait)?;
    let mut members: Vec<usize> = (0..points.len()).filter(|&i| points[i].order == order).collect();
    members.sort_by(|&a, &b| points[a].psi_prime.total_cmp(&points[b].psi_prime));

    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in members {
        let v = points[i].psi_prime;
        match classes.last_mut() {
            Some(c) if (points[c[0]].psi_prime - v).abs() <= CLASS_TOL * v.abs().max(1.0) => c.push(i),
            _ => classes.push(vec![i]),
        }
    }
    for c in &mut classes {
        c.sort_unstable();
    }
    classes.sort_by_key(|c| c[0]);

    let score = |c: &Vec<usize>| c.iter().map(|&i| amplitude_weight(&points[i])).sum::<f64>();
    let mut best = 0;
    for k in 1..classes.len() {
        let (sk, sb) = (score(&classes[k]), score(&classes[best]));
        if sk > sb * (1.0 + 1e-12) {
            best = k;
        }
    }
    let dominant = classes[best].clone();
    Ok(PhasePortrait {
        points: points.to_vec(),
        order,
        d: dominant.len(),
        representative: dominant[0],
        dominant,
        classes,
    })
}

/// `find_critical_points` + `classify` with default options.
pub fn analyze(b: &BlaschkeProduct) -> Result<PhasePortrait> {
    analyze_with(b, SearchOptions::for_product(b))
}

pub fn analyze_with(b: &BlaschkeProduct, opts: SearchOptions) -> Result<PhasePortrait> {
    let points = find_critical_points(b, opts.grid_size, opts.tol)?;
    classify(b, &points)
}

/// Checks on a grid that `ψ''` keeps one sign strictly between consecutive
/// critical points (samples within `margin` of a point are skipped).
pub fn psi2_sign_constant_between(
    b: &BlaschkeProduct,
    points: &[CriticalPoint],
    grid_size: usize,
    margin: f64,
) -> bool {
    if points.is_empty() {
        return true;
    }
    let step = TAU / grid_size as f64;
    let k = points.len();
    for i in 0..k {
        let start = points[i].xi.radians();
        let mut end = points[(i + 1) % k].xi.radians();
        if end <= start {
            end += TAU;
        }
        let mut sign = 0.0;
        let mut t = start + margin;
        while t < end - margin {
            let v = b.psi_derivative_unchecked(t, 2);
            if v != 0.0 {
                if sign == 0.0 {
                    sign = v.signum();
                } else if v.signum() != sign {
                    return false;
                }
            }
            t += step;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn half() -> BlaschkeProduct {
        BlaschkeProduct::new(vec![Complex64::new(0.5, 0.0)]).unwrap()
    }

    #[test]
    fn single_factor_has_two_simple_points() {
        let b = half();
        let pts = find_critical_points(&b, 1024, DEFAULT_TOL).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].xi, Angle::new(0.0));
        assert_eq!(pts[1].xi, Angle::new(PI));
        assert!(pts.iter().all(|p| p.order == 3));
    }

    #[test]
    fn single_factor_portrait() {
        let b = half();
        let p = analyze(&b).unwrap();
        assert_eq!(p.order, 3);
        assert_eq!(p.classes.len(), 2);
        assert_eq!(p.d, 1);
        let values: Vec<f64> = p.points.iter().map(|c| c.psi_prime).collect();
        assert!((values[0] - 3.0).abs() < 1e-12);
        assert!((values[1] - 1.0 / 3.0).abs() < 1e-12);
        // |ψ'''| is smaller at π, so that point carries the larger amplitude.
        assert_eq!(p.dominant, vec![1]);
    }

    #[test]
    fn off_axis_zero_rotates_points() {
        let b = BlaschkeProduct::new(vec![Complex64::from_polar(0.6, 1.0)]).unwrap();
        let p = analyze(&b).unwrap();
        assert_eq!(p.points.len(), 2);
        assert_eq!(p.points[0].xi, Angle::new(1.0));
        assert_eq!(p.points[1].xi, Angle::new(1.0 + PI));
    }

    #[test]
    fn symmetric_pair_pairs_up_classes() {
        let b = BlaschkeProduct::new(vec![Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)])
            .unwrap();
        let p = analyze(&b).unwrap();
        assert_eq!(p.order, 3);
        assert!(p.classes.iter().all(|c| c.len() == 2), "{:?}", p.classes);
        assert_eq!(p.d, 2);
        let [i, j] = [p.dominant[0], p.dominant[1]];
        let gap = p.points[i].xi.distance(p.points[j].xi);
        assert!((gap - PI).abs() < 1e-9);
    }

    #[test]
    fn example_one_has_order_five_at_origin() {
        let b = BlaschkeProduct::new(vec![Complex64::new(0.4, 0.2), Complex64::new(0.4, -0.2)])
            .unwrap();
        let p = analyze(&b).unwrap();
        assert_eq!(p.order, 5);
        let origin = p.points.iter().find(|c| c.xi == Angle::new(0.0)).unwrap();
        assert_eq!(origin.order, 5);
        assert_eq!(p.dominant.len(), 1);
        assert_eq!(p.points[p.dominant[0]].xi, Angle::new(0.0));
    }

    #[test]
    fn returned_points_are_zeros_of_psi2() {
        let b = BlaschkeProduct::new(vec![
            Complex64::new(0.3, 0.5),
            Complex64::new(-0.6, 0.1),
            Complex64::new(0.2, -0.7),
        ])
        .unwrap();
        let pts = find_critical_points(&b, 256 * 3 * 4, DEFAULT_TOL).unwrap();
        let scale = (0..4096)
            .map(|i| b.psi_derivative_unchecked(TAU * i as f64 / 4096.0, 2).abs())
            .fold(0.0, f64::max);
        for p in &pts {
            assert!(b.psi_derivative_unchecked(p.xi.radians(), 2).abs() < 1e-9 * scale);
        }
        assert!(psi2_sign_constant_between(&b, &pts, 1 << 14, 1e-6));
    }

    #[test]
    fn rejects_coarse_grid_and_bad_tol() {
        let b = half();
        assert!(matches!(find_critical_points(&b, 100, 1e-6), Err(Error::InvalidInput(_))));
        assert!(matches!(find_critical_points(&b, 1024, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn empty_point_list_is_rejected() {
        assert!(matches!(classify(&half(), &[]), Err(Error::EmptyPortrait)));
    }

    #[test]
    fn overflow_when_threshold_is_unreachable() {
        // A tolerance above 1 declares every derivative vanishing.
        let r = find_critical_points(&half(), 1024, 10.0);
        assert!(matches!(r, Err(Error::MultiplicityOverflow { .. })), "{r:?}");
    }

    #[test]
    fn portrait_json_shape() {
        let p = analyze(&half()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["N"], 3);
        assert_eq!(v["D"], 1);
        assert_eq!(v["points"][0]["order"], 3);
        assert!(v["points"][0]["psi_N"].is_number());
        assert!(v["points"][0]["psi_prime"].is_number());
        assert!(v["points"][0]["xi"].is_number());
        assert_eq!(v["dominant"][0], 1);
    }
}
