//! Atkinson's explicit formula for `E(T)`: two oscillatory divisor sums whose
//! total differs from `E(T)` by `O(log² T)`.

use crate::divisor::DivisorTable;
use crate::math::{self, PI, TAU};
use crate::sum::KahanSum;
use crate::{Error, Result};

/// Heights above this are refused: phases reach ~`2T` and double precision no
/// longer carries enough fractional digits.
pub const MAX_HEIGHT: f64 = 1e8;

/// Admissible truncation band `a_lo · T < N < a_hi · T`, and the default `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtkinsonConfig {
    pub a_lo: f64,
    pub a_hi: f64,
}

impl Default for AtkinsonConfig {
    fn default() -> Self {
        AtkinsonConfig {
            a_lo: 0.5,
            a_hi: 2.0,
        }
    }
}

impl AtkinsonConfig {
    /// Default truncation `N = round(T)`.
    pub fn default_truncation(&self, t: f64) -> u64 {
        (math::round(t) as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AtkinsonEval {
    pub t: f64,
    pub n: u64,
    pub n_prime: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// `sigma1 + sigma2`.
    pub e_approx: f64,
}

fn check_height(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            what: "T",
            value: t,
        });
    }
    if t > MAX_HEIGHT {
        return Err(Error::PrecisionGuard {
            t,
            limit: MAX_HEIGHT,
        });
    }
    Ok(())
}

/// `f(T, n) = 2T arsinh(√(πn/2T)) + √(2πnT + π²n²) − π/4`.
pub fn phase_f(t: f64, n: u64) -> f64 {
    let nf = n as f64;
    let x = math::sqrt(PI * nf / (2.0 * t));
    2.0 * t * math::asinh(x) + math::sqrt(2.0 * PI * nf * t + PI * PI * nf * nf) - 0.25 * PI
}

/// `f(T, n)` reduced modulo 2π piecewise, for use inside cosines.
#[inline]
fn phase_f_reduced(t: f64, nf: f64, ash: f64) -> f64 {
    math::reduce_angle(2.0 * t * ash)
        + math::reduce_angle(PI * nf * math::sqrt(1.0 + 2.0 * t / (PI * nf)))
        - 0.25 * PI
}

/// `e(T, n) = (1 + πn/2T)^{−1/4} {(2T/πn)^{1/2} arsinh(√(πn/2T))}^{−1}`.
pub fn amp_e(t: f64, n: u64) -> f64 {
    let x = math::sqrt(PI * n as f64 / (2.0 * t));
    amp_from(x, math::asinh(x))
}

#[inline]
fn amp_from(x: f64, ash: f64) -> f64 {
    x / (math::sqrt(math::sqrt(1.0 + x * x)) * ash)
}

/// `N' = T/2π + N/2 − (N²/4 + NT/2π)^{1/2}`, evaluated as
/// `(T/2π)² / (T/2π + N/2 + (N²/4 + NT/2π)^{1/2})` to avoid cancellation.
pub fn n_prime(t: f64, n: u64) -> f64 {
    let a = t / TAU;
    let nf = n as f64;
    let root = math::sqrt(0.25 * nf * nf + nf * a);
    a * a / (a + 0.5 * nf + root)
}

/// Whether [`sigma1`] uses the true cosines or replaces them by 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigma1Mode {
    Cosine,
    /// Diagnostic: every `cos f(T, n)` replaced by 1.
    UnitPhase,
}

/// `Σ₁(T) = √2 (T/2π)^{1/4} Σ_{n ≤ N} (−1)^n d(n) n^{−3/4} e(T, n) cos f(T, n)`.
pub fn sigma1(t: f64, n: u64, table: &DivisorTable, mode: Sigma1Mode) -> Result<f64> {
    check_height(t)?;
    if n > table.n_max() {
        return Err(Error::TableExhausted {
            required: n,
            n_max: table.n_max(),
        });
    }
    let scale = PI / (2.0 * t);
    let mut acc = KahanSum::new();
    for k in 1..=n {
        let kf = k as f64;
        let x = math::sqrt(scale * kf);
        let ash = math::asinh(x);
        let mut term = table.d(k) as f64 * math::powf(kf, -0.75) * amp_from(x, ash);
        if mode == Sigma1Mode::Cosine {
            term *= math::cos(phase_f_reduced(t, kf, ash));
        }
        acc.add(if k % 2 == 0 { term } else { -term });
    }
    Ok(core::f64::consts::SQRT_2 * math::sqrt(math::sqrt(t / TAU)) * acc.value())
}

/// Result of [`sigma2`]; `empty` flags `N' < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma2 {
    pub value: f64,
    pub terms: u64,
    pub empty: bool,
}

/// `Σ₂(T) = −2 Σ_{n ≤ N'} d(n) n^{−1/2} (log(T/2πn))^{−1} cos(T log(T/2πn) − T + π/4)`.
pub fn sigma2(t: f64, n: u64, table: &DivisorTable) -> Result<Sigma2> {
    check_height(t)?;
    let np = n_prime(t, n);
    let terms = math::floor(np) as u64;
    if terms == 0 {
        return Ok(Sigma2 {
            value: 0.0,
            terms: 0,
            empty: true,
        });
    }
    if terms > table.n_max() {
        return Err(Error::TableExhausted {
            required: terms,
            n_max: table.n_max(),
        });
    }
    let a = t / TAU;
    let t_red = math::reduce_angle(t);
    let mut acc = KahanSum::new();
    for k in 1..=terms {
        let kf = k as f64;
        let l = math::ln(a / kf);
        debug_assert!(l > 0.0);
        let phase = math::reduce_angle(t * l) - t_red + 0.25 * PI;
        acc.add(table.d(k) as f64 / (math::sqrt(kf) * l) * math::cos(phase));
    }
    Ok(Sigma2 {
        value: -2.0 * acc.value(),
        terms,
        empty: false,
    })
}

/// Atkinson's approximation `Σ₁ + Σ₂` to `E(T)` with the default truncation.
pub fn atkinson_e(t: f64, table: &DivisorTable) -> Result<AtkinsonEval> {
    let cfg = AtkinsonConfig::default();
    atkinson_e_with(t, cfg.default_truncation(t), table, &cfg)
}

/// Atkinson's approximation with an explicit truncation `N`, which must lie
/// strictly inside the configured band.
pub fn atkinson_e_with(
    t: f64,
    n: u64,
    table: &DivisorTable,
    cfg: &AtkinsonConfig,
) -> Result<AtkinsonEval> {
    check_height(t)?;
    let nf = n as f64;
    if !(cfg.a_lo * t < nf && nf < cfg.a_hi * t) {
        return Err(Error::Precondition(
            "truncation N outside the band (a_lo T, a_hi T)",
        ));
    }
    let s1 = sigma1(t, n, table, Sigma1Mode::Cosine)?;
    let s2 = sigma2(t, n, table)?;
    Ok(AtkinsonEval {
        t,
        n,
        n_prime: n_prime(t, n),
        sigma1: s1,
        sigma2: s2.value,
        e_approx: s1 + s2.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> &'static DivisorTable {
        use std::sync::OnceLock;
        static T: OnceLock<DivisorTable> = OnceLock::new();
        T.get_or_init(|| DivisorTable::sieve(20_000).unwrap())
    }

    // High-precision values of f and e from an independent 40-digit evaluation.
    const F_1000_1000: f64 = 6_117.591_267_765_230_03;
    const E_1000_500: f64 = 0.960_030_262_986_000_4;

    #[test]
    fn phase_expansion() {
        let (t, n) = (1e5, 1u64);
        let nf = n as f64;
        let series = -0.25 * PI
            + math::sqrt(8.0 * PI * nf * t)
            + math::sqrt(2.0 * PI * PI * PI) / 6.0 * math::powf(nf, 1.5) / math::sqrt(t);
        assert!((phase_f(t, n) - series).abs() <= 1e-3);
    }

    #[test]
    fn phase_increasing_in_n() {
        for n in 1..=100 {
            assert!(phase_f(1000.0, n + 1) > phase_f(1000.0, n));
        }
    }

    #[test]
    fn high_precision_values() {
        let f = phase_f(1000.0, 1000);
        assert!((f - F_1000_1000).abs() <= 1e-9 * F_1000_1000, "{f}");
        let e = amp_e(1000.0, 500);
        assert!((e - E_1000_500).abs() <= 1e-9 * E_1000_500, "{e}");
    }

    #[test]
    fn amplitude_limits_and_range() {
        assert!((amp_e(1e8, 1) - 1.0).abs() <= 1e-7);
        for &t in &[100.0, 1000.0, 5000.0] {
            let mut prev = 1.0;
            for n in 1..=(t as u64) {
                let e = amp_e(t, n);
                assert!(e > 0.0 && e <= 1.0);
                assert!(e <= prev);
                prev = e;
            }
        }
    }

    #[test]
    fn n_prime_closed_forms() {
        let t = 2000.0;
        let a = t / TAU;
        // N = a exactly is not an integer; use a height where it is
        let t2 = TAU * 300.0;
        let np = n_prime(t2, 300);
        assert!((np - 300.0 * (3.0 - math::sqrt(5.0)) / 2.0).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for n in [1u64, 10, 100, 1_000, 10_000, 1_000_000, 1_000_000_000] {
            let v = n_prime(t, n);
            assert!(v > 0.0 && v < a && v < prev);
            // naive form for comparison where it is still accurate
            if n <= 10_000 {
                let nf = n as f64;
                let naive = a + nf / 2.0 - math::sqrt(nf * nf / 4.0 + nf * a);
                assert!((v - naive).abs() <= 1e-9 * a);
            }
            prev = v;
        }
        // N ≫ T: N' ~ a² / N
        let big = 1e12;
        assert!((n_prime(t, big as u64) * big / (a * a) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sigma1_single_term() {
        let t = 777.0;
        let s = sigma1(t, 1, table(), Sigma1Mode::Cosine).unwrap();
        let expect = core::f64::consts::SQRT_2
            * math::powf(t / TAU, 0.25)
            * -amp_e(t, 1)
            * math::cos(phase_f(t, 1));
        assert!((s - expect).abs() < 1e-12);
    }

    #[test]
    fn sigma1_unit_phase_matches_direct_sum() {
        let t = 1500.0;
        let n = 1500;
        let s = sigma1(t, n, table(), Sigma1Mode::UnitPhase).unwrap();
        let mut direct = 0.0;
        for k in 1..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            direct += sign * table().d(k) as f64 * (k as f64).powf(-0.75) * amp_e(t, k);
        }
        direct *= 2f64.sqrt() * (t / TAU).powf(0.25);
        assert!((s - direct).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn sigma2_empty_and_single_term() {
        // T = 100: a ≈ 15.9; N large enough that N' < 1
        let s = sigma2(100.0, 10_000, table()).unwrap();
        assert!(s.empty && s.value == 0.0);
        // find N with 1 <= N' < 2
        let n = (1..20_000u64).find(|&n| n_prime(100.0, n) < 2.0).unwrap();
        let np = n_prime(100.0, n);
        assert!((1.0..2.0).contains(&np));
        let s = sigma2(100.0, n, table()).unwrap();
        assert_eq!(s.terms, 1);
        let l = (100.0 / TAU).ln();
        let expect = -2.0 / l * (100.0 * l - 100.0 + PI / 4.0).cos();
        assert!((s.value - expect).abs() < 1e-12);
    }

    #[test]
    fn truncation_band_enforced() {
        let cfg = AtkinsonConfig::default();
        assert!(atkinson_e_with(1000.0, 400, table(), &cfg).is_err());
        assert!(atkinson_e_with(1000.0, 2100, table(), &cfg).is_err());
        assert!(atkinson_e_with(1000.0, 1000, table(), &cfg).is_ok());
        assert!(matches!(
            atkinson_e(2e8, table()),
            Err(Error::PrecisionGuard { .. })
        ));
        assert!(matches!(
            atkinson_e(30_000.0, table()),
            Err(Error::TableExhausted { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let a = atkinson_e(3210.5, table()).unwrap();
        let b = atkinson_e(3210.5, table()).unwrap();
        assert_eq!(a.e_approx.to_bits(), b.e_approx.to_bits());
        assert_eq!(a.e_approx, a.sigma1 + a.sigma2);
    }
}
