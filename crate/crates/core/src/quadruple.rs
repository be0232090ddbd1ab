//! Near-coincidences of sums of `k`-th roots, and the inverse square-root gap
//! sum.
//!
//! Quadruples are ordered and range over `N < n₁, n₂, n₃, n₄ <= 2N`. A
//! quadruple is counted when `|(r₁ + r₂) − (r₃ + r₄)| < δ N^{1/k}`, where each
//! `rᵢ` is the double-precision root and the two pair sums are rounded before
//! subtracting. The brute-force oracle in the tests evaluates exactly that
//! expression, so both algorithms agree bit for bit.

use alloc::vec::Vec;
use core::ops::Range;

use crate::math;
use crate::sum::KahanSum;
use crate::{Error, Result};

/// Largest `N` accepted by [`count_quadruples`].
pub const MAX_N: u32 = 2000;

/// Largest `K` accepted by [`inverse_sqrt_gap_sum`].
pub const MAX_GAP_K: u64 = 1_000_000;

/// Above this `K` the gap sum is evaluated by differences instead of pairs.
pub const DIRECT_GAP_K: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadrupleCount {
    pub n: u32,
    pub k: u32,
    pub delta: f64,
    pub count: u64,
    /// `N⁴ δ + N²`.
    pub bound_value: f64,
    pub ratio: f64,
}

impl QuadrupleCount {
    pub fn new(n: u32, k: u32, delta: f64, count: u64) -> Self {
        let nf = n as f64;
        let bound_value = nf * nf * nf * nf * delta + nf * nf;
        QuadrupleCount {
            n,
            k,
            delta,
            count,
            bound_value,
            ratio: count as f64 / bound_value,
        }
    }
}

/// `n^{1/k}` in double precision.
pub fn root(n: u32, k: u32) -> f64 {
    let x = n as f64;
    match k {
        2 => math::sqrt(x),
        3 => math::cbrt(x),
        _ => math::powf(x, 1.0 / k as f64),
    }
}

fn check_args(n: u32, k: u32, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain {
            what: "N",
            value: 0.0,
        });
    }
    if k < 2 {
        return Err(Error::Domain {
            what: "k",
            value: k as f64,
        });
    }
    if !(delta > 0.0) {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
        });
    }
    if n > MAX_N {
        return Err(Error::Budget {
            what: "N",
            value: n as u64,
            limit: MAX_N as u64,
        });
    }
    Ok(())
}

/// Window half-width `δ N^{1/k}`.
pub fn window(n: u32, k: u32, delta: f64) -> f64 {
    delta * root(n, k)
}

/// All `N²` ordered pair sums `r_i + r_j`, sorted ascending.
pub fn sorted_pair_sums(n: u32, k: u32) -> Vec<f64> {
    let roots: Vec<f64> = (n + 1..=2 * n).map(|m| root(m, k)).collect();
    let mut sums = Vec::with_capacity(roots.len() * roots.len());
    for &a in &roots {
        for &b in &roots {
            sums.push(a + b);
        }
    }
    sums.sort_unstable_by(|a, b| a.total_cmp(b));
    sums
}

/// Number of index pairs `i < j`, with `i` in `rows`, such that
/// `sums[j] − sums[i] < w`. `sums` must be sorted.
pub fn count_close_pairs(sums: &[f64], w: f64, rows: Range<usize>) -> u64 {
    let mut j = rows.start + 1;
    let mut total = 0u64;
    for i in rows {
        if j <= i {
            j = i + 1;
        }
        while j < sums.len() && sums[j] - sums[i] < w {
            j += 1;
        }
        total += (j - i - 1) as u64;
    }
    total
}

/// Total ordered quadruple count from the one-sided pair count.
pub fn quadruples_from_pairs(n_pairs: usize, close_pairs: u64) -> u64 {
    n_pairs as u64 + 2 * close_pairs
}

/// Exact count of near-coincident quadruples by sorted pair sums and a
/// two-pointer sweep.
pub fn count_quadruples(n: u32, k: u32, delta: f64) -> Result<QuadrupleCount> {
    check_args(n, k, delta)?;
    let sums = sorted_pair_sums(n, k);
    let close = count_close_pairs(&sums, window(n, k, delta), 0..sums.len());
    Ok(QuadrupleCount::new(
        n,
        k,
        delta,
        quadruples_from_pairs(sums.len(), close),
    ))
}

/// Counts for every `(N, δ)` combination, `N` major.
pub fn bound_sweep(n_list: &[u32], k: u32, delta_list: &[f64]) -> Result<Vec<QuadrupleCount>> {
    let mut out = Vec::with_capacity(n_list.len() * delta_list.len());
    for &n in n_list {
        for &d in delta_list {
            check_args(n, k, d)?;
        }
        let sums = sorted_pair_sums(n, k);
        for &d in delta_list {
            let close = count_close_pairs(&sums, window(n, k, d), 0..sums.len());
            out.push(QuadrupleCount::new(
                n,
                k,
                d,
                quadruples_from_pairs(sums.len(), close),
            ));
        }
    }
    Ok(out)
}

/// Largest ratio in a sweep (NaN when empty).
pub fn max_ratio(counts: &[QuadrupleCount]) -> f64 {
    counts.iter().map(|c| c.ratio).fold(f64::NAN, f64::max)
}

/// Whether `√a + √b = √c + √d` holds exactly, decided in integer arithmetic
/// by squaring twice.
pub fn sqrt_sums_equal(a: u64, b: u64, c: u64, d: u64) -> bool {
    let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
    // √(cd) − √(ab) = p/2 with X² − Y² = cd − ab
    let p = a + b - c - d;
    let diff = c * d - a * b;
    if p == 0 {
        return diff == 0;
    }
    let x_num = 4 * diff + p * p;
    let y_num = 4 * diff - p * p;
    let nonneg = |num: i128| num == 0 || (num > 0) == (p > 0);
    nonneg(x_num) && nonneg(y_num) && x_num * x_num == 16 * p * p * c * d
}

/// `Σ_{K < m ≠ n <= 2K} |√m − √n|^{−1}`.
pub fn inverse_sqrt_gap_sum(k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain {
            what: "K",
            value: k as f64,
        });
    }
    if k > MAX_GAP_K {
        return Err(Error::Budget {
            what: "K",
            value: k,
            limit: MAX_GAP_K,
        });
    }
    if k <= DIRECT_GAP_K {
        Ok(gap_sum_rows(k, false))
    } else {
        Ok(gap_sum_by_difference(k))
    }
}

/// Direct double sum over ordered pairs, using
/// `1/|√m − √n| = (√m + √n)/|m − n|`. With `transpose` the outer loop runs
/// over `n` instead of `m`.
pub fn gap_sum_rows(k: u64, transpose: bool) -> f64 {
    let roots: Vec<f64> = (k + 1..=2 * k).map(|m| math::sqrt(m as f64)).collect();
    let mut total = KahanSum::new();
    for i in 0..roots.len() {
        let mut row = 0.0;
        for j in 0..roots.len() {
            if i == j {
                continue;
            }
            let (m, n) = if transpose { (j, i) } else { (i, j) };
            let gap = (m as f64 - n as f64).abs();
            row += (roots[m] + roots[n]) / gap;
        }
        total.add(row);
    }
    total.value()
}

/// The same sum grouped by `d = |m − n|`, in `O(K)` using prefix sums of `√j`:
/// `2 Σ_d (1/d) Σ_{m=K+1}^{2K−d} (√m + √(m+d))`.
pub fn gap_sum_by_difference(k: u64) -> f64 {
    // prefix[i] = Σ_{j=K+1}^{K+i} √j
    let mut prefix = Vec::with_capacity(k as usize + 1);
    let mut acc = KahanSum::new();
    prefix.push(0.0);
    for j in k + 1..=2 * k {
        acc.add(math::sqrt(j as f64));
        prefix.push(acc.value());
    }
    let kk = k as usize;
    let mut total = KahanSum::new();
    for d in 1..kk {
        let lower = prefix[kk - d];
        let upper = prefix[kk] - prefix[d];
        total.add((lower + upper) / d as f64);
    }
    2.0 * total.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: u32, k: u32, delta: f64) -> u64 {
        let roots: Vec<f64> = (n + 1..=2 * n).map(|m| root(m, k)).collect();
        let w = window(n, k, delta);
        let mut c = 0;
        for &a in &roots {
            for &b in &roots {
                for &x in &roots {
                    for &y in &roots {
                        if ((a + b) - (x + y)).abs() < w {
                            c += 1;
                        }
                    }
                }
            }
        }
        c
    }

    #[test]
    fn single_point() {
        let q = count_quadruples(1, 2, 1e-9).unwrap();
        assert_eq!(q.count, 1);
        assert_eq!(q.bound_value, 1e-9 + 1.0);
    }

    #[test]
    fn wide_window_counts_everything() {
        for &(n, k) in &[(5u32, 2u32), (9, 3), (7, 5)] {
            let spread = 2.0 * (root(2 * n, k) - root(n + 1, k));
            let delta = 1.01 * spread / root(n, k);
            assert_eq!(
                count_quadruples(n, k, delta).unwrap().count,
                (n as u64).pow(4)
            );
        }
    }

    #[test]
    fn matches_brute_force() {
        assert_eq!(
            count_quadruples(8, 2, 0.01).unwrap().count,
            brute(8, 2, 0.01)
        );
        for n in 1..=12 {
            for k in [2, 3] {
                for d in [1e-3, 1e-1, 1.0] {
                    assert_eq!(
                        count_quadruples(n, k, d).unwrap().count,
                        brute(n, k, d),
                        "N={n} k={k} δ={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn sweep_is_monotone_and_bounded_below() {
        let ns = [16, 32, 64];
        let rows = bound_sweep(&ns, 2, &[1e-4, 1e-3, 1e-2, 1e-1, 1.0]).unwrap();
        for chunk in rows.chunks(5) {
            let n = chunk[0].n as u64;
            assert!(chunk.windows(2).all(|w| w[1].count >= w[0].count));
            assert!(chunk
                .iter()
                .all(|c| c.count >= n * n && c.count <= n.pow(4)));
        }
        assert!(max_ratio(&rows).is_finite());
    }

    #[test]
    fn budget_and_domain() {
        assert!(matches!(
            count_quadruples(2001, 2, 0.1),
            Err(Error::Budget { .. })
        ));
        assert!(count_quadruples(0, 2, 0.1).is_err());
        assert!(count_quadruples(4, 1, 0.1).is_err());
        assert!(count_quadruples(4, 2, 0.0).is_err());
    }

    #[test]
    fn exact_coincidences_match_float_count() {
        // √81 + √121 = √100 + √100 is a nontrivial coincidence at N = 64
        assert!(sqrt_sums_equal(81, 121, 100, 100));
        assert!(!sqrt_sums_equal(2, 3, 1, 4));
        assert!(sqrt_sums_equal(8, 2, 18, 0));
        for n in [4u32, 16, 64] {
            let lo = n as u64 + 1;
            let hi = 2 * n as u64;
            let mut exact = 0u64;
            for a in lo..=hi {
                for b in lo..=hi {
                    for c in lo..=hi {
                        for d in lo..=hi {
                            if sqrt_sums_equal(a, b, c, d) {
                                exact += 1;
                            }
                        }
                    }
                }
            }
            let float = count_quadruples(n, 2, 1e-11).unwrap().count;
            assert_eq!(exact, float, "N={n}");
        }
    }

    #[test]
    fn gap_sum_small() {
        let v = inverse_sqrt_gap_sum(2).unwrap();
        let want = 2.0 / (2.0 - 3f64.sqrt());
        assert!((v - want).abs() < 1e-12);
        assert!((v - 7.464_101_615_137_754).abs() < 1e-12);
    }

    #[test]
    fn gap_sum_forms_agree() {
        for k in [2u64, 3, 10, 100, 1000] {
            let a = gap_sum_rows(k, false);
            let b = gap_sum_rows(k, true);
            let c = gap_sum_by_difference(k);
            assert!((a - b).abs() <= 1e-12 * a);
            assert!((a - c).abs() <= 1e-12 * a, "K={k}: {a} vs {c}");
        }
        assert!(inverse_sqrt_gap_sum(1).is_err());
        assert!(inverse_sqrt_gap_sum(MAX_GAP_K + 1).is_err());
    }

    proptest! {
        #[test]
        fn two_pointer_equals_brute(n in 1u32..8, k in 2u32..5, delta in 1e-4f64..2.0) {
            prop_assert_eq!(count_quadruples(n, k, delta).unwrap().count, brute(n, k, delta));
        }
    }
}
