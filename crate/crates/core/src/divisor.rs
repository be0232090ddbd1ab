//! The divisor function and the divisor-problem error terms `Δ(x)`, `Δ*(x)`.

use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::sum::KahanSum;
use crate::{Error, Result, EULER_GAMMA};

/// Largest table the sieve will attempt. Counts are 32-bit, prefixes 64-bit.
pub const MAX_TABLE: u64 = 1 << 34;

/// Exact `d(n)` for `1 <= n <= n_max` with running sums of `d(n)` and
/// `(-1)^n d(n)`.
///
/// All arrays are indexed from 0 with a zero sentinel at index 0, so that
/// `prefix(m) - prefix(m - 1) == d(m)` holds for every `m >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTable {
    d: Vec<u32>,
    prefix: Vec<u64>,
    alt_prefix: Vec<i64>,
}

impl DivisorTable {
    /// Multiple-marking sieve in `O(n_max log n_max)`.
    pub fn sieve(n_max: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Precondition("n_max must be at least 1"));
        }
        let len = checked_len(n_max)?;
        let mut d = try_zeroed::<u32>(len, n_max)?;
        let n = n_max as usize;
        for q in 1..=n {
            let mut m = q;
            while m <= n {
                d[m] += 1;
                m += q;
            }
        }
        Self::with_counts(d, n_max)
    }

    /// Rebuilds a table from `d(1), …, d(n_max)`; prefixes are recomputed.
    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Precondition("divisor counts must be non-empty"));
        }
        let n_max = counts.len() as u64;
        let len = checked_len(n_max)?;
        let mut d = try_zeroed::<u32>(len, n_max)?;
        d[1..].copy_from_slice(counts);
        Self::with_counts(d, n_max)
    }

    fn with_counts(d: Vec<u32>, n_max: u64) -> Result<Self> {
        let len = d.len();
        let mut prefix = try_zeroed::<u64>(len, n_max)?;
        let mut alt_prefix = try_zeroed::<i64>(len, n_max)?;
        for m in 1..len {
            let dm = d[m] as u64;
            prefix[m] = prefix[m - 1] + dm;
            alt_prefix[m] = if m % 2 == 0 {
                alt_prefix[m - 1] + dm as i64
            } else {
                alt_prefix[m - 1] - dm as i64
            };
        }
        Ok(DivisorTable {
            d,
            prefix,
            alt_prefix,
        })
    }

    pub fn n_max(&self) -> u64 {
        (self.d.len() - 1) as u64
    }

    /// `d(n)`; `n` must lie in `1..=n_max`.
    #[inline]
    pub fn d(&self, n: u64) -> u32 {
        debug_assert!(n >= 1);
        self.d[n as usize]
    }

    /// `d(1), …, d(n_max)`.
    pub fn counts(&self) -> &[u32] {
        &self.d[1..]
    }

    /// `Σ_{n ≤ m} d(n)`, with `prefix(0) = 0`.
    #[inline]
    pub fn prefix(&self, m: u64) -> u64 {
        self.prefix[m as usize]
    }

    /// `Σ_{n ≤ m} (-1)^n d(n)`, with `alt_prefix(0) = 0`.
    #[inline]
    pub fn alt_prefix(&self, m: u64) -> i64 {
        self.alt_prefix[m as usize]
    }

    /// Fails with [`Error::TableExhausted`] unless `m <= n_max`.
    pub fn require(&self, m: u64) -> Result<()> {
        if m > self.n_max() {
            Err(Error::TableExhausted {
                required: m,
                n_max: self.n_max(),
            })
        } else {
            Ok(())
        }
    }
}

fn checked_len(n_max: u64) -> Result<usize> {
    if n_max > MAX_TABLE {
        return Err(Error::Capacity { n_max });
    }
    usize::try_from(n_max)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or(Error::Capacity { n_max })
}

fn try_zeroed<T: Default + Clone>(len: usize, n_max: u64) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|_| Error::Capacity { n_max })?;
    v.resize(len, T::default());
    Ok(v)
}

/// `x (log x + 2γ − 1)`, the main term of the divisor problem.
pub fn main_term(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "x",
            value: x,
        });
    }
    Ok(x * (math::ln(x) + 2.0 * EULER_GAMMA - 1.0))
}

fn floor_index(x: f64) -> u64 {
    math::floor(x) as u64
}

/// `Δ(x) = Σ_{n ≤ x} d(n) − x (log x + 2γ − 1)`. The sum includes `n = x`.
pub fn delta(x: f64, table: &DivisorTable) -> Result<f64> {
    let main = main_term(x)?;
    let m = floor_index(x);
    table.require(m)?;
    Ok(table.prefix(m) as f64 - main)
}

/// `Δ*(x) = ½ Σ_{n ≤ 4x} (−1)^n d(n) − x (log x + 2γ − 1)`.
pub fn delta_star_exact(x: f64, table: &DivisorTable) -> Result<f64> {
    let main = main_term(x)?;
    let m = floor_index(4.0 * x);
    table.require(m)?;
    Ok(0.5 * table.alt_prefix(m) as f64 - main)
}

/// `Δ*(x)` with the boundary term `n = 4x` weighted by ½, i.e. the mean of
/// the left and right limits. This is the value the Voronoi series converges
/// to; it differs from [`delta_star_exact`] only when `4x` is an integer.
pub fn delta_star_normalized(x: f64, table: &DivisorTable) -> Result<f64> {
    let v = delta_star_exact(x, table)?;
    let y = 4.0 * x;
    if y == math::floor(y) {
        let n = y as u64;
        let d = table.d(n) as f64;
        Ok(v - 0.25 * if n.is_multiple_of(2) { d } else { -d })
    } else {
        Ok(v)
    }
}

/// `Δ*(x)` as `−Δ(x) + 2Δ(2x) − ½Δ(4x)`; slower twin of [`delta_star_exact`].
pub fn delta_star_combination(x: f64, table: &DivisorTable) -> Result<f64> {
    Ok(-delta(x, table)? + 2.0 * delta(2.0 * x, table)? - 0.5 * delta(4.0 * x, table)?)
}

/// Constants of the heuristic tail estimate `c · x^{1/2+ε} · N^{-1/2}`.
///
/// The estimate is not a rigorous bound: the implied constant of the series
/// remainder is unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailHeuristic {
    pub c: f64,
    pub eps: f64,
}

impl Default for TailHeuristic {
    fn default() -> Self {
        TailHeuristic { c: 1.0, eps: 0.01 }
    }
}

/// Allowed truncation relative to `x`: `n_trunc <= VORONOI_TRUNC_CAP * x`.
pub const VORONOI_TRUNC_CAP: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiEval {
    pub value: f64,
    /// Heuristic, non-rigorous size of the discarded tail.
    pub tail_bound: f64,
}

/// Truncated Voronoi series
/// `x^{1/4}/(π√2) Σ_{n ≤ N} (−1)^n d(n) n^{−3/4} cos(4π√(nx) − π/4)`.
pub fn delta_star_voronoi(
    x: f64,
    n_trunc: u64,
    table: &DivisorTable,
    tail: TailHeuristic,
) -> Result<VoronoiEval> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "x",
            value: x,
        });
    }
    if n_trunc == 0 {
        return Err(Error::Precondition("n_trunc must be at least 1"));
    }
    if n_trunc as f64 > VORONOI_TRUNC_CAP * x {
        return Err(Error::Precondition(
            "n_trunc exceeds the truncation cap for x",
        ));
    }
    table.require(n_trunc)?;

    let four_pi_sqrt_x = 4.0 * PI * math::sqrt(x);
    let mut acc = KahanSum::new();
    for n in 1..=n_trunc {
        let nf = n as f64;
        let phase = math::reduce_angle(four_pi_sqrt_x * math::sqrt(nf) - 0.25 * PI);
        let amp = table.d(n) as f64 * math::powf(nf, -0.75);
        let term = amp * math::cos(phase);
        acc.add(if n % 2 == 0 { term } else { -term });
    }
    let value = math::powf(x, 0.25) / (PI * core::f64::consts::SQRT_2) * acc.value();
    let tail_bound = tail.c * math::powf(x, 0.5 + tail.eps) / math::sqrt(n_trunc as f64);
    Ok(VoronoiEval { value, tail_bound })
}

/// `Δ*(x + h) − Δ*(x)` together with its two pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortIntervalDelta {
    /// The exact difference, from two evaluations of [`delta_star_exact`].
    pub difference: f64,
    /// `−[(x+h)(log(x+h) + 2γ − 1) − x(log x + 2γ − 1)]`.
    pub smooth: f64,
    /// `½ Σ_{4x < n ≤ 4(x+h)} (−1)^n d(n)`.
    pub alternating: f64,
}

/// Short-interval increment of `Δ*` at `x` over a length `h >= 0`.
pub fn delta_star_short_interval(
    x: f64,
    h: f64,
    table: &DivisorTable,
) -> Result<ShortIntervalDelta> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::Domain {
            what: "h",
            value: h,
        });
    }
    let hi = x + h;
    let difference = delta_star_exact(hi, table)? - delta_star_exact(x, table)?;
    let smooth = -(main_term(hi)? - main_term(x)?);
    let alternating = 0.5
        * (table.alt_prefix(floor_index(4.0 * hi)) - table.alt_prefix(floor_index(4.0 * x))) as f64;
    Ok(ShortIntervalDelta {
        difference,
        smooth,
        alternating,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> u32 {
        (1..=n).filter(|q| n.is_multiple_of(*q)).count() as u32
    }

    #[test]
    fn sieve_matches_trial_division() {
        let t = DivisorTable::sieve(500).unwrap();
        for n in 1..=500 {
            assert_eq!(t.d(n), trial_division(n), "d({n})");
        }
        assert_eq!(t.d(6), 4);
        assert_eq!(t.prefix(5), 10);
        assert_eq!(t.alt_prefix(4), 2);
    }

    #[test]
    fn single_entry_table() {
        let t = DivisorTable::sieve(1).unwrap();
        assert_eq!(t.counts(), &[1]);
        assert_eq!(t.n_max(), 1);
    }

    #[test]
    fn zero_and_oversized_tables_rejected() {
        assert!(matches!(
            DivisorTable::sieve(0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            DivisorTable::sieve(MAX_TABLE + 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn primes_have_two_divisors() {
        let t = DivisorTable::sieve(2000).unwrap();
        for p in 2..=2000u64 {
            if (2..p).take_while(|q| q * q <= p).all(|q| p % q != 0) {
                assert_eq!(t.d(p), 2);
            }
        }
    }

    #[test]
    fn hyperbola_identity() {
        let t = DivisorTable::sieve(10_000).unwrap();
        for m in 1..=10_000u64 {
            let s: u64 = (1..=m).map(|q| m / q).sum();
            assert_eq!(t.prefix(m), s);
        }
    }

    #[test]
    fn from_counts_rebuilds_prefixes() {
        let t = DivisorTable::sieve(300).unwrap();
        let u = DivisorTable::from_counts(t.counts()).unwrap();
        assert_eq!(t, u);
    }

    #[test]
    fn main_term_values() {
        assert!((main_term(1.0).unwrap() - 0.154_431_329_803_065_7).abs() < 1e-15);
        assert!((main_term(5.0).unwrap() - 8.819_346_211_185_831).abs() < 1e-12);
        let root = math::exp(1.0 - 2.0 * EULER_GAMMA);
        assert!(main_term(root).unwrap().abs() < 1e-15);
        assert!(matches!(main_term(0.0), Err(Error::Domain { .. })));
        assert!(matches!(main_term(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn euler_gamma_prefix() {
        assert_eq!(math::floor(EULER_GAMMA * 1e6), 577_215.0);
    }

    #[test]
    fn delta_values() {
        let t = DivisorTable::sieve(64).unwrap();
        assert!((delta(1.0, &t).unwrap() - 0.845_568_670_196_934_3).abs() < 1e-14);
        assert!((delta(5.0, &t).unwrap() - 1.180_653_788_814_169).abs() < 1e-12);
        let below = 2.0 - 1e-9;
        let left = delta(below, &t).unwrap();
        assert!((left - (1.0 - main_term(below).unwrap())).abs() < 1e-14);
        // jump of d(2) = 2 at x = 2
        let jump = delta(2.0, &t).unwrap() - left;
        assert!((jump - 2.0).abs() < 1e-6);
        assert_eq!(
            delta(65.0, &t),
            Err(Error::TableExhausted {
                required: 65,
                n_max: 64
            })
        );
    }

    #[test]
    fn delta_star_values() {
        let t = DivisorTable::sieve(64).unwrap();
        assert!((delta_star_exact(1.0, &t).unwrap() - 0.845_568_670_196_934_3).abs() < 1e-14);
        assert!((delta_star_exact(0.25, &t).unwrap() + 0.192_034_242_170_793_8).abs() < 1e-14);
        assert!(matches!(
            delta_star_exact(16.5, &t),
            Err(Error::TableExhausted { required: 66, .. })
        ));
    }

    #[test]
    fn voronoi_single_term() {
        let t = DivisorTable::sieve(16).unwrap();
        let x = 7.3;
        let v = delta_star_voronoi(x, 1, &t, TailHeuristic::default()).unwrap();
        let expect = math::powf(x, 0.25) / (PI * core::f64::consts::SQRT_2)
            * -math::cos(4.0 * PI * math::sqrt(x) - 0.25 * PI);
        assert!((v.value - expect).abs() < 1e-14);
        assert!(delta_star_voronoi(x, 0, &t, TailHeuristic::default()).is_err());
        assert!(delta_star_voronoi(0.5, 1, &t, TailHeuristic::default()).is_err());
    }

    #[test]
    fn voronoi_close_to_exact_at_100() {
        let t = DivisorTable::sieve(1024).unwrap();
        let v = delta_star_voronoi(100.0, 400, &t, TailHeuristic::default()).unwrap();
        let mid = delta_star_normalized(100.0, &t).unwrap();
        assert!((v.value - mid).abs() <= 1.0, "{} vs {}", v.value, mid);
        // d(400) = 15, so the right-continuous value sits 15/4 above the midpoint
        let exact = delta_star_exact(100.0, &t).unwrap();
        assert!((exact - mid - 3.75).abs() < 1e-12);
        assert!((v.tail_bound - math::powf(100.0, 0.51) / 20.0).abs() < 1e-12);
    }

    #[test]
    fn short_interval_decomposition() {
        let t = DivisorTable::sieve(50_000).unwrap();
        let z = delta_star_short_interval(1234.5, 0.0, &t).unwrap();
        assert_eq!(z.difference, 0.0);
        for &(x, h) in &[(1000.3, 1.0), (2222.7, 17.25), (9000.0, 500.0)] {
            let s = delta_star_short_interval(x, h, &t).unwrap();
            let recomposed = s.smooth + s.alternating;
            assert!(
                (recomposed - s.difference).abs() <= 1e-9 * s.difference.abs().max(1.0),
                "{recomposed} vs {}",
                s.difference
            );
        }
    }

    proptest! {
        #[test]
        fn two_forms_of_delta_star_agree(x in 1.0f64..2500.0) {
            let t = table_10k();
            let a = delta_star_exact(x, t).unwrap();
            let b = delta_star_combination(x, t).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn delta_star_smooth_between_jumps(m in 4u64..9000, a in 0.01f64..0.49, b in 0.51f64..0.99) {
            // both points share floor(4x) = m
            let t = table_10k();
            let (x1, x2) = ((m as f64 + a) / 4.0, (m as f64 + b) / 4.0);
            let diff = delta_star_exact(x2, t).unwrap() - delta_star_exact(x1, t).unwrap();
            let smooth = main_term(x1).unwrap() - main_term(x2).unwrap();
            prop_assert!((diff - smooth).abs() < 1e-9);
        }
    }

    fn table_10k() -> &'static DivisorTable {
        use std::sync::OnceLock;
        static T: OnceLock<DivisorTable> = OnceLock::new();
        T.get_or_init(|| DivisorTable::sieve(10_000).unwrap())
    }
}
