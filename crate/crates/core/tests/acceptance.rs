//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! the measured numbers; the process exits non-zero if any check fails.
//!
//! Run alone with `cargo test -p blaschke-core --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use blaschke_core::asymptotics::{
    compare, gamma_reciprocal_n, oscillatory_integral, predict_peak, vdc_first_order_bound,
    vdc_second_order_bound,
};
use blaschke_core::coefficients::{fit_exponent, fit_power_law, fourier_coeffs, norm_scan, Column};
use blaschke_core::examples::{
    construct_general_validated, default_general_t, reference_spec, Family,
};
use blaschke_core::model_space::{build_shift, phi_lower_bound, schaffer_scan, Spectrum};
use blaschke_core::phase::{analyze, PhasePortrait};
use blaschke_core::quad;
use blaschke_core::BlaschkeProduct;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-8;

fn pow2(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

fn half() -> BlaschkeProduct {
    BlaschkeProduct::new(vec![Complex64::new(0.5, 0.0)]).unwrap()
}

fn reference(f: Family) -> BlaschkeProduct {
    reference_spec(f).build().unwrap().product
}

fn random_product(rng: &mut ChaCha8Rng, degree: usize) -> BlaschkeProduct {
    let zeros = (0..degree)
        .map(|_| Complex64::from_polar(rng.gen_range(0.05..0.9), rng.gen_range(0.0..TAU)))
        .collect();
    BlaschkeProduct::new(zeros).unwrap()
}

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Check {
            ok: true,
            detail: String::new(),
        }
    }

    fn record(&mut self, ok: bool, text: String) {
        self.ok &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let mark = if ok { "" } else { "[x] " };
        self.detail.push_str(&format!("{mark}{text}"));
    }

    fn slope(&mut self, label: &str, slope: f64, target: f64, tol: f64) {
        let ok = (slope - target).abs() <= tol;
        self.record(ok, format!("{label} slope {slope:.4} (target {target:.4} ± {tol})"));
    }
}

fn exact_invariants() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut products: Vec<BlaschkeProduct> = (1..=6).map(|d| random_product(&mut rng, d)).collect();
    products.extend([half(), reference(Family::Deg2Conjugate), reference(Family::Deg2Real), reference(Family::Deg4)]);

    let mut unimod = 0.0f64;
    for b in &products {
        for _ in 0..2000 {
            unimod = unimod.max((b.eval_boundary(rng.gen_range(0.0..TAU)).norm() - 1.0).abs());
        }
    }
    c.record(unimod < 1e-12, format!("max ||B|-1| = {unimod:.1e}"));

    let mut parseval = 0.0f64;
    let mut origin = 0.0f64;
    for b in &products {
        for n in [1u64, 3, 64, 1 << 10, 1 << 14] {
            let s = fourier_coeffs(b, n, EPS).unwrap();
            parseval = parseval.max((s.l2() - 1.0).abs());
            origin = origin.max((s.coeffs[0] - b.value_at_origin().powu(n as u32)).norm());
        }
    }
    c.record(parseval < 1e-8, format!("max |l2-1| = {parseval:.1e}"));
    c.record(origin < 1e-10, format!("max |c0 - prod(-lambda)^n| = {origin:.1e}"));

    let mut winding = 0.0f64;
    for b in &products {
        let w = quad::integrate_real(|t| b.psi_prime(t), 0.0, TAU, 1e-12) / TAU;
        winding = winding.max((w - b.degree() as f64).abs());
    }
    c.record(winding < 1e-9, format!("max |winding - m| = {winding:.1e}"));

    let mut refl = 0.0f64;
    for order in 2..=16usize {
        let x = 1.0 / order as f64;
        let g = gamma_reciprocal_n(order).unwrap();
        let other = statrs::function::gamma::gamma(1.0 - x);
        refl = refl.max((g * other - PI / (PI * x).sin()).abs());
    }
    c.record(refl < 1e-10, format!("max reflection defect = {refl:.1e}"));
    c
}

fn sup_slope(b: &BlaschkeProduct, ns: &[u64]) -> f64 {
    fit_exponent(&norm_scan(b, ns, EPS).unwrap(), Column::Sup).unwrap().slope
}

fn single_factor_decay() -> Check {
    let mut c = Check::new();
    c.slope("lambda=0.5 sup", sup_slope(&half(), &pow2(8, 14)), -1.0 / 3.0, 0.03);
    c
}

fn portrait_and_slope(c: &mut Check, label: &str, b: &BlaschkeProduct, order: usize, tol: f64) {
    let p = analyze(b).unwrap();
    c.record(p.order == order, format!("{label} N = {} (want {order})", p.order));
    c.slope(label, sup_slope(b, &pow2(10, 16)), -1.0 / order as f64, tol);
}

fn order_five_examples() -> Check {
    let mut c = Check::new();
    portrait_and_slope(&mut c, "conjugate pair", &reference(Family::Deg2Conjugate), 5, 0.03);
    portrait_and_slope(&mut c, "real pair", &reference(Family::Deg2Real), 5, 0.03);
    c
}

fn order_seven_example() -> Check {
    let mut c = Check::new();
    portrait_and_slope(&mut c, "degree four", &reference(Family::Deg4), 7, 0.05);
    c
}

fn general_family() -> Check {
    let mut c = Check::new();
    for order in 3..=5 {
        let g = construct_general_validated(order, default_general_t()).unwrap();
        let label = format!("N={order} (t={:.4}, retries {})", g.t, g.retries);
        portrait_and_slope(&mut c, &label, &g.product, order, 0.05);
    }
    c
}

fn norm_growth() -> Check {
    let mut c = Check::new();
    let scan = norm_scan(&half(), &pow2(8, 14), EPS).unwrap();
    let l1 = fit_exponent(&scan, Column::L1).unwrap().slope;
    c.slope("lambda=0.5 l1", l1, 0.5, 0.05);
    let worst = scan.rows.iter().map(|r| (r.l2 - 1.0).abs()).fold(0.0, f64::max);
    c.record(worst < EPS, format!("max |l2-1| over rows = {worst:.1e}"));
    c
}

fn peak_prediction() -> Check {
    let mut c = Check::new();
    for (label, b) in [("lambda=0.5", half()), ("conjugate pair", reference(Family::Deg2Conjugate))] {
        let portrait: PhasePortrait = analyze(&b).unwrap();
        let mut errs = Vec::new();
        let mut offsets = Vec::new();
        for n in [1u64 << 10, 1 << 12, 1 << 14] {
            let pred = predict_peak(&b, &portrait, n).unwrap();
            let series = fourier_coeffs(&b, n, EPS).unwrap();
            let cmp = compare(&pred, &series);
            errs.push(cmp.rel_err);
            // Distance from the argmax to the nearest floor(n·ψ'(ξ)), ξ dominant.
            let off = portrait
                .dominant_points()
                .map(|p| (cmp.argmax_k as i64 - (n as f64 * p.psi_prime).floor() as i64).abs())
                .min()
                .unwrap();
            offsets.push(off);
        }
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        let errs_txt: Vec<String> = errs.iter().map(|e| format!("{:.2}%", 100.0 * e)).collect();
        c.record(
            decreasing && errs[2] < 0.15,
            format!("{label} rel err at k_d {}", errs_txt.join(" > ")),
        );
        let within = offsets.iter().all(|&o| o <= portrait.d as i64 + 2);
        c.record(within, format!("{label} |argmax - k_d| = {offsets:?} (allowed {})", portrait.d + 2));
    }
    c
}

fn van_der_corput() -> Check {
    let mut c = Check::new();
    let tol = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    for i in 0..100 {
        let len = rng.gen_range(0.5..3.0);
        // g' = s(α + βt + γt²) is monotone and never vanishes on [0, len].
        let (alpha, beta, gamma) = (rng.gen_range(1.0..50.0), rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let g = |t: f64| sign * (alpha * t + beta * t * t / 2.0 + gamma * t.powi(3) / 3.0);
        let gp = |t: f64| sign * (alpha + beta * t + gamma * t * t);
        let v = oscillatory_integral(g, |_| 1.0, 0.0, len, tol).norm();
        let bound = vdc_first_order_bound(gp(0.0), gp(len)).unwrap();
        worst1 = worst1.max(v / bound);

        // g'' ≥ μ, amplitude monotone in (0, M].
        let (mu, cubic, slope) = (rng.gen_range(1.0..200.0), rng.gen_range(0.0..30.0), rng.gen_range(0.0..3.0));
        let g2 = |t: f64| sign * (mu * t * t / 2.0 + cubic * t.powi(3)) + alpha * t;
        let increasing = i % 4 < 2;
        let amp = |t: f64| if increasing { 1.0 + slope * t } else { 1.0 + slope * (len - t) };
        let m = 1.0 + slope * len;
        let v = oscillatory_integral(g2, amp, 0.0, len, tol).norm();
        worst2 = worst2.max(v / vdc_second_order_bound(m, mu).unwrap());
    }
    c.record(worst1 <= 1.0, format!("random first-order: max |I|/bound = {worst1:.3}"));
    c.record(worst2 <= 1.0, format!("random second-order: max |I|/bound = {worst2:.3}"));

    // Oscillatory integrals of Bⁿ e^{−ikθ} between consecutive critical points.
    let b = reference(Family::Deg2Conjugate);
    let portrait = analyze(&b).unwrap();
    let xs: Vec<f64> = portrait.points.iter().map(|p| p.xi.radians()).collect();
    let n = 1024u64;
    let nf = n as f64;
    let mut worst = 0.0f64;
    let mut pieces = 0;
    let k0 = (nf * portrait.representative_point().psi_prime).floor();
    for dk in [-200.0, -37.0, 0.0, 11.0, 150.0, 900.0] {
        let k = k0 + dk;
        let phase = |t: f64| nf * b.eval_boundary(t).arg() - k * t;
        for i in 0..xs.len() {
            let a = xs[i];
            let mut e = xs[(i + 1) % xs.len()];
            if e <= a {
                e += TAU;
            }
            let delta = 0.02;
            let (lo, hi) = (a + delta, e - delta);
            if hi <= lo {
                continue;
            }
            let integrand = |t: f64| Complex64::from_polar(1.0, phase(t));
            let gp = |t: f64| nf * b.psi_prime(t) - k;
            // First order on pieces where g' keeps one sign.
            let split = bisect_sign_change(&gp, lo, hi);
            let parts: Vec<(f64, f64)> = match split {
                Some(s) => vec![(lo, s - 0.05), (s + 0.05, hi)],
                None => vec![(lo, hi)],
            };
            for (p, q) in parts {
                if q <= p {
                    continue;
                }
                let v = quad::integrate(integrand, p, q, tol).value.norm();
                let bound = vdc_first_order_bound(gp(p), gp(q)).unwrap();
                worst = worst.max(v / bound);
                pieces += 1;
            }
            // Second order with μ the minimum of n|ψ''| on the piece.
            let mu = (0..=4096)
                .map(|j| nf * b.psi_derivative(lo + (hi - lo) * j as f64 / 4096.0, 2).unwrap().abs())
                .fold(f64::INFINITY, f64::min)
                * 0.99;
            let v = quad::integrate(integrand, lo, hi, tol).value.norm();
            worst = worst.max(v / vdc_second_order_bound(1.0, mu).unwrap());
            pieces += 1;
        }
    }
    c.record(worst <= 1.0, format!("conjugate pair, n={n}: {pieces} intervals, max |I|/bound = {worst:.3}"));
    c
}

fn bisect_sign_change(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    let (fa, fb) = (f(a), f(b));
    if (fa < 0.0) == (fb < 0.0) {
        return None;
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if (f(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

fn shift_operator() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ex1 = Spectrum::from_product(&reference(Family::Deg2Conjugate)).unwrap();
    let d4 = Spectrum::from_product(&reference(Family::Deg4)).unwrap();
    let random3 = Spectrum::new((0..3).map(|_| Complex64::from_polar(rng.gen_range(0.1..0.85), rng.gen_range(0.0..TAU))).collect()).unwrap();
    let cases = [
        (Spectrum::from_product(&half()).unwrap(), 256usize),
        (Spectrum::from_product(&half()).unwrap(), 1),
        (ex1.clone(), 128),
        (d4, 64),
        (random3, 85),
    ];
    let mut upper = 0.0f64;
    let mut det = 0.0f64;
    for (s, n) in &cases {
        let op = build_shift(s, *n).unwrap();
        upper = upper.max(op.upper_residual());
        det = det.max((op.log_abs_det() - s.log_det_mod(*n as u64)).abs());
    }
    c.record(upper < 1e-10, format!("max above-diagonal = {upper:.1e}"));
    c.record(det < 1e-8, format!("max |ln|det| - n sum ln|lambda|| = {det:.1e}"));

    for (label, s, target, tol) in [
        ("lambda=0.5", Spectrum::from_product(&half()).unwrap(), 1.0 / 3.0, 0.05),
        ("conjugate pair", ex1, 0.2, 0.07),
    ] {
        let ns = pow2(8, 13);
        let rows = schaffer_scan(&s, &ns, EPS).unwrap();
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.schaffer_ratio).collect();
        c.slope(&format!("{label} ratio"), fit_power_law(&xs, &ys).unwrap().slope, target, tol);
    }
    c
}

fn phi_growth() -> Check {
    let mut c = Check::new();
    let s = Spectrum::from_product(&half()).unwrap();
    let ns = pow2(8, 13);
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| phi_lower_bound(&s, n).unwrap()).collect();
    c.slope("lambda=0.5 phi_lb", fit_power_law(&xs, &ys).unwrap().slope, 1.0 / 3.0, 0.05);
    c
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("exact invariants", exact_invariants),
        ("single factor sup decay", single_factor_decay),
        ("order-5 examples", order_five_examples),
        ("order-7 example", order_seven_example),
        ("general family", general_family),
        ("l1 growth and l2 identity", norm_growth),
        ("stationary-phase peak", peak_prediction),
        ("van der Corput bounds", van_der_corput),
        ("shift operator and ratio", shift_operator),
        ("phi lower bound growth", phi_growth),
    ];
    let mut failed = 0;
    for (i, (name, run)) in checks.iter().enumerate() {
        let start = Instant::now();
        let c = run();
        let status = if c.ok { "PASS" } else { "FAIL" };
        println!(
            "{status} [{:>2}] {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            c.detail
        );
        failed += usize::from(!c.ok);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
