//! `ζ(1/2 + it)` on the critical line.
//!
//! Below [`RS_THRESHOLD`] the value comes from Euler–Maclaurin summation with
//! complex arithmetic; above it from the Riemann–Siegel formula with the main
//! sum and five correction terms `C_0 … C_4`.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::math::{self, PI, TAU};
use crate::rs_coeffs;

/// Heights at or above this use Riemann–Siegel.
pub const RS_THRESHOLD: f64 = 300.0;

/// Target absolute accuracy of [`zeta_half`] for heights up to `10^6`.
pub const ZETA_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ZetaMethod {
    EulerMaclaurin,
    RiemannSiegel,
}

impl ZetaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ZetaMethod::EulerMaclaurin => "euler_maclaurin",
            ZetaMethod::RiemannSiegel => "riemann_siegel",
        }
    }

    /// Method chosen for height `t`.
    pub fn for_height(t: f64) -> Self {
        if t.abs() < RS_THRESHOLD {
            ZetaMethod::EulerMaclaurin
        } else {
            ZetaMethod::RiemannSiegel
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaPoint {
    pub t: f64,
    pub value: Complex64,
    pub method: ZetaMethod,
    pub est_abs_err: f64,
}

/// `ζ(1/2 + it)` with the default method for `t`. Negative heights are
/// accepted: Euler–Maclaurin evaluates them directly, Riemann–Siegel by
/// reflection.
pub fn zeta_half(t: f64) -> ZetaPoint {
    zeta_half_with(t, ZetaMethod::for_height(t))
}

/// `ζ(1/2 + it)` by an explicitly chosen method.
///
/// Riemann–Siegel is only meaningful for `|t|` of a few dozen or more; its
/// error estimate grows accordingly at small heights.
pub fn zeta_half_with(t: f64, method: ZetaMethod) -> ZetaPoint {
    match method {
        ZetaMethod::EulerMaclaurin => {
            let (value, est_abs_err) = euler_maclaurin(Complex64::new(0.5, t));
            ZetaPoint {
                t,
                value,
                method,
                est_abs_err,
            }
        }
        ZetaMethod::RiemannSiegel => {
            let a = t.abs();
            let (z, err) = hardy_z_rs(a, None);
            let th = theta(a);
            let (s, c) = math::sin_cos(th);
            let mut value = Complex64::new(z * c, -z * s);
            if t < 0.0 {
                value = value.conj();
            }
            ZetaPoint {
                t,
                value,
                method,
                est_abs_err: err,
            }
        }
    }
}

/// The Riemann–Siegel theta function by its Stirling expansion; accurate to
/// about `1e-12` absolute for `t >= 10`.
pub fn theta(t: f64) -> f64 {
    let r = 1.0 / t;
    let r2 = r * r;
    let tail = r
        * (1.0 / 48.0
            + r2 * (7.0 / 5760.0
                + r2 * (31.0 / 80640.0 + r2 * (127.0 / 430080.0 + r2 * (511.0 / 1216512.0)))));
    0.5 * t * math::ln(t / TAU) - 0.5 * t - PI / 8.0 + tail
}

/// Hardy's `Z(t)` for `t >= RS_THRESHOLD`-ish by Riemann–Siegel, with its
/// estimated absolute error. `tables` optionally supplies `(ln n, n^{-1/2})`.
fn hardy_z_rs(t: f64, tables: Option<&RsTables>) -> (f64, f64) {
    let a = math::sqrt(t / TAU);
    let n = math::floor(a) as usize;
    let p = a - n as f64;
    let th = theta(t);

    let mut main = 0.0;
    match tables {
        Some(tab) if n < tab.ln.len() => {
            for k in 1..=n {
                main += tab.inv_sqrt[k] * math::cos(math::reduce_angle(th - t * tab.ln[k]));
            }
        }
        _ => {
            for k in 1..=n {
                let kf = k as f64;
                main += math::cos(math::reduce_angle(th - t * math::ln(kf))) / math::sqrt(kf);
            }
        }
    }

    let u = p - 0.5;
    let inv_a = 1.0 / a;
    let corr = horner(&rs_coeffs::C0, u)
        + inv_a
            * (horner(&rs_coeffs::C1, u)
                + inv_a
                    * (horner(&rs_coeffs::C2, u)
                        + inv_a * (horner(&rs_coeffs::C3, u) + inv_a * horner(&rs_coeffs::C4, u))));
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let z = 2.0 * main + sign * corr / math::sqrt(a);

    let truncation = 0.05 * math::powf(t, -2.75);
    let rounding = f64::EPSILON * t * math::ln(t) * math::sqrt(math::ln((n.max(1)) as f64) + 1.0);
    (z, truncation + rounding)
}

#[inline]
fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * u + x)
}

/// `B_{2k} / (2k)!` for `k = 1..=30`.
#[allow(clippy::excessive_precision)]
const BERNOULLI_OVER_FACTORIAL: [f64; 30] = [
    0.083333333333333333333,
    -0.0013888888888888888889,
    0.000033068783068783068783,
    -8.2671957671957671958e-7,
    2.0876756987868098979e-8,
    -5.2841901386874931848e-10,
    1.3382536530684678833e-11,
    -3.3896802963225828668e-13,
    8.5860620562778445641e-15,
    -2.1748686985580618730e-16,
    5.5090028283602295151e-18,
    -1.3954464685812523341e-19,
    3.5347070396294674717e-21,
    -8.9535174270375468504e-23,
    2.2679524523376830603e-24,
    -5.7447906688722024453e-26,
    1.4551724756148649018e-27,
    -3.6859949406653101781e-29,
    9.3367342570950446721e-31,
    -2.3650224157006299346e-32,
    5.9906717624821343044e-34,
    -1.5174548844682902628e-35,
    3.8437581254541882322e-37,
    -9.7363530726466910512e-39,
    2.4662470442006809939e-40,
    -6.2470767418207436931e-42,
    1.5824030244644914655e-43,
    -4.0082736859489359048e-45,
    1.0153075855569556312e-46,
    -2.5718041582418717499e-48,
];

/// Euler–Maclaurin summation for `ζ(s)` with `Re s = 1/2`; returns the value
/// and an estimate of the remainder.
fn euler_maclaurin(s: Complex64) -> (Complex64, f64) {
    let n = math::ceil(s.norm() / PI) as usize + 10;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..n {
        sum += n_pow_neg_s(k as f64, s);
    }
    let nf = n as f64;
    let n_neg_s = n_pow_neg_s(nf, s);
    sum += n_neg_s * nf / (s - 1.0);
    sum += 0.5 * n_neg_s;

    // term_k = B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
    let inv_n2 = 1.0 / (nf * nf);
    let mut rising = s * n_neg_s / nf; // s * N^{-s-1}
    let mut last = 0.0;
    let mut err = f64::INFINITY;
    for (k, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = rising * b;
        sum += term;
        last = term.norm();
        let j = 2.0 * k as f64 + 1.0;
        // advance to s(s+1)...(s+2k) * N^{-s-2k-1}
        rising = rising * (s + j) * (s + j + 1.0) * inv_n2;
        if last < 1e-17 * sum.norm().max(1.0) {
            let next = rising.norm() * BERNOULLI_OVER_FACTORIAL.get(k + 1).map_or(b, |x| x.abs());
            let m = 2.0 * (k as f64 + 1.0);
            err = next * (s + m + 1.0).norm() / (s.re + m + 1.0);
            break;
        }
    }
    if !err.is_finite() {
        err = last;
    }
    // rounding in the direct sum
    let rounding = 4.0 * f64::EPSILON * (s.im.abs() * math::ln(nf) + 1.0) * math::sqrt(nf);
    (sum, err + rounding)
}

#[inline]
fn n_pow_neg_s(n: f64, s: Complex64) -> Complex64 {
    let ln = math::ln(n);
    let mag = math::exp(-s.re * ln);
    let (sn, cs) = math::sin_cos(math::reduce_angle(s.im * ln));
    Complex64::new(mag * cs, -mag * sn)
}

struct RsTables {
    ln: Vec<f64>,
    inv_sqrt: Vec<f64>,
}

/// Reusable evaluator of `|ζ(1/2 + it)|²` and `Z(t)` with precomputed
/// `ln n` and `n^{-1/2}` tables. Immutable once built; share freely.
pub struct ZetaEngine {
    tables: RsTables,
}

impl ZetaEngine {
    /// Tables sized for heights up to `t_max`; larger heights still work,
    /// without the tables.
    pub fn new(t_max: f64) -> Self {
        let len = math::sqrt(t_max.max(RS_THRESHOLD) / TAU) as usize + 2;
        let mut ln = Vec::with_capacity(len);
        let mut inv_sqrt = Vec::with_capacity(len);
        ln.push(0.0);
        inv_sqrt.push(0.0);
        for k in 1..len {
            let kf = k as f64;
            ln.push(math::ln(kf));
            inv_sqrt.push(1.0 / math::sqrt(kf));
        }
        ZetaEngine {
            tables: RsTables { ln, inv_sqrt },
        }
    }

    /// `|ζ(1/2 + it)|²`.
    #[inline]
    pub fn abs_sq(&self, t: f64) -> f64 {
        let a = t.abs();
        if a < RS_THRESHOLD {
            euler_maclaurin(Complex64::new(0.5, a)).0.norm_sqr()
        } else {
            let z = hardy_z_rs(a, Some(&self.tables)).0;
            z * z
        }
    }

    /// Full evaluation at `t`.
    pub fn point(&self, t: f64) -> ZetaPoint {
        let a = t.abs();
        if a < RS_THRESHOLD {
            return zeta_half_with(t, ZetaMethod::EulerMaclaurin);
        }
        let (z, err) = hardy_z_rs(a, Some(&self.tables));
        let (s, c) = math::sin_cos(theta(a));
        let mut value = Complex64::new(z * c, -z * s);
        if t < 0.0 {
            value = value.conj();
        }
        ZetaPoint {
            t,
            value,
            method: ZetaMethod::RiemannSiegel,
            est_abs_err: err,
        }
    }
}

/// Hardy's `Z(t) = e^{iθ(t)} ζ(1/2 + it)`, real for real `t`.
pub fn hardy_z(t: f64) -> f64 {
    if t.abs() < RS_THRESHOLD {
        let v = euler_maclaurin(Complex64::new(0.5, t)).0;
        let (s, c) = math::sin_cos(if t.abs() < 10.0 {
            theta_small(t)
        } else {
            theta(t.abs()) * t.signum()
        });
        (v * Complex64::new(c, s)).re
    } else {
        hardy_z_rs(t.abs(), None).0
    }
}

// theta for small |t| via the reflection-free Stirling series of log Γ(1/4 + it/2)
fn theta_small(t: f64) -> f64 {
    // shift up by 8 in the argument of log Γ, then apply the recurrence
    let mut z = Complex64::new(0.25, 0.5 * t);
    let mut shift = 0.0;
    for _ in 0..8 {
        shift += z.arg();
        z += 1.0;
    }
    let lg = (z - 0.5) * z.ln() - z + 0.5 * math::ln(TAU) + 1.0 / (12.0 * z)
        - 1.0 / (360.0 * z * z * z)
        + 1.0 / (1260.0 * z * z * z * z * z);
    lg.im - shift - 0.5 * t * math::ln(PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (t, Re ζ, Im ζ, Z) from an independent 30-digit evaluation.
    const REFERENCE: [(f64, f64, f64, f64); 12] = [
        (0.0, -1.46035450880958681, 0.0, -1.46035450880958681),
        (
            1.0,
            0.14393642707718906,
            -0.722099743531673089,
            -0.736305462867317735,
        ),
        (
            10.0,
            1.54489522029675277,
            -0.115336465271273375,
            -1.54919454618102239,
        ),
        (
            50.0,
            -0.081712108320979975,
            0.330792194038661296,
            -0.340735005955024983,
        ),
        (
            100.0,
            2.69261988568132409,
            -0.0203860296025981618,
            2.69269705666446347,
        ),
        (
            150.0,
            -0.0635050565486052306,
            -0.0651927599258052327,
            -0.0910109232674035934,
        ),
        (
            299.0,
            3.11084431666007436,
            -0.977528552903022311,
            3.26081499540175721,
        ),
        (
            301.0,
            1.03691799018299156,
            -1.72193057885550748,
            -2.01003577997079386,
        ),
        (
            1000.0,
            0.356334367194396055,
            0.931997831232993665,
            0.997794637521586614,
        ),
        (
            12345.6,
            1.09819318517687684,
            0.28381310282961062,
            -1.13427428310206577,
        ),
        (
            100000.7,
            -0.301807335416577291,
            -0.661205006795595669,
            0.7268285414888563,
        ),
        (
            1000000.25,
            3.77664538442911999,
            0.175640523953409255,
            -3.78072743706610033,
        ),
    ];

    #[test]
    fn matches_reference_values() {
        for &(t, re, im, z) in &REFERENCE {
            let p = zeta_half(t);
            let err = (p.value - Complex64::new(re, im)).norm();
            assert!(err <= ZETA_TOLERANCE, "t = {t}: err {err:e}");
            assert!(
                p.est_abs_err <= ZETA_TOLERANCE,
                "t = {t}: est {:e}",
                p.est_abs_err
            );
            assert!(
                err <= p.est_abs_err.max(1e-12),
                "t = {t}: err {err:e} > est"
            );
            assert!((hardy_z(t) - z).abs() <= ZETA_TOLERANCE, "Z({t})");
            let engine = ZetaEngine::new(2e6);
            assert!((engine.abs_sq(t) - (re * re + im * im)).abs() <= 4.0 * ZETA_TOLERANCE);
        }
    }

    #[test]
    fn zeta_at_one_half() {
        let p = zeta_half(0.0);
        assert!((p.value.re + 1.460_354_508_8).abs() < 1e-10);
        assert_eq!(p.method, ZetaMethod::EulerMaclaurin);
    }

    #[test]
    fn first_zero() {
        let p = zeta_half(14.134_725_141_734_695);
        assert!(p.value.norm() <= 1e-6);
    }

    #[test]
    fn conjugate_symmetry() {
        for &t in &[3.5, 100.0, 250.0, 5000.0] {
            let up = zeta_half(t).value;
            let down = zeta_half(-t).value;
            assert!((down - up.conj()).norm() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn methods_agree_in_overlap() {
        let mut t = 30.0;
        while t <= 200.0 {
            let em = zeta_half_with(t, ZetaMethod::EulerMaclaurin);
            let rs = zeta_half_with(t, ZetaMethod::RiemannSiegel);
            let diff = (em.value.norm() - rs.value.norm()).abs();
            assert!(diff <= em.est_abs_err + rs.est_abs_err, "t = {t}: {diff:e}");
            t += 7.3;
        }
    }

    #[test]
    fn angle_reduction_keeps_digits() {
        let x = 123_456_789.123_456_789_f64;
        let r = math::reduce_angle(x);
        assert!(r.abs() <= PI + 1e-12);
        assert!((math::cos(r) - math::cos(x)).abs() < 1e-9);
    }
}
