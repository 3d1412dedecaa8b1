//! Benchmark functions that prior-free auction revenue is measured against.
//!
//! Notation: b_(k) is the k-th highest bid of the profile. The benchmarks:
//!
//! - `f2(b) = max_{2 <= k <= n} k * b_(k)`, the best fixed-price revenue
//!   that serves at least two bidders. Requiring two winners keeps the
//!   benchmark attainable by a truthful mechanism up to a constant factor.
//! - `f2l(b, l)` restricts the maximum to `k <= l`, the limited-supply
//!   variant with `l` units.
//! - `maxv(b) = max_{1 <= k < n} k * b_(k+1)`, the best single-price
//!   revenue extractable from the top k bidders at the price of the bidder
//!   just below them.
//! - `online_f(b) = max(4 b_(2), 3 b_(3), 4 b_(4), 5 b_(5), ..., n b_(n))`,
//!   the inflated benchmark a bid-independent online pricing rule can be
//!   measured against without losing more than a constant.
//! - `efo2_multiunit(b, l)`, the envelope benchmark: with g(j) = j * v_(j)
//!   and ghat the upper concave envelope of g on [2, n], the value is the
//!   maximum of ghat over [2, min(l, n)]. Concavity makes the benchmark
//!   monotone under unit splits, which the raw maximum `f2l` is not.
//! - `efo_fixed_price(b, env)`, the everywhere-fixed-price benchmark with
//!   the two-winner floor dropped.
//!
//! The envelope here is computed with a monotone-chain upper hull in
//! O(n log n); `harness::brute` keeps an O(n^3) reference implementation
//! used by the tests.

use crate::core::{AuctionLabError, BidProfile, EnvironmentSpec, Result};

/// `F2(b) = max_{2 <= k <= n} k * b_(k)`; 0 when fewer than two bids.
pub fn f2(p: &BidProfile) -> f64 {
    let n = p.n();
    if n < 2 {
        return 0.0;
    }
    (2..=n)
        .map(|k| k as f64 * p.nth_or_zero(k))
        .fold(0.0, f64::max)
}

/// `F2l(b, l) = max_{2 <= k <= min(l, n)} k * b_(k)`; 0 when fewer than two
/// bids. Needs `l >= 2`, otherwise the two-winner floor is unsatisfiable.
pub fn f2l(p: &BidProfile, units: u32) -> Result<f64> {
    if units < 2 {
        return Err(AuctionLabError::UnitsOutOfRange {
            context: "f2l",
            minimum: 2,
            got: units,
        });
    }
    let n = p.n();
    if n < 2 {
        return Ok(0.0);
    }
    let hi = n.min(units as usize);
    Ok((2..=hi)
        .map(|k| k as f64 * p.nth_or_zero(k))
        .fold(0.0, f64::max))
}

/// `maxV(b) = max_{1 <= k < n} k * b_(k+1)`; 0 when fewer than two bids.
pub fn maxv(p: &BidProfile) -> f64 {
    let n = p.n();
    if n < 2 {
        return 0.0;
    }
    (1..n)
        .map(|k| k as f64 * p.nth_or_zero(k + 1))
        .fold(0.0, f64::max)
}

/// `f(b) = max(4 b_(2), 3 b_(3), 4 b_(4), 5 b_(5), ..., n b_(n))`; 0 when
/// fewer than two bids. The coefficient is 4 at rank 2, then k for every
/// rank k >= 3.
pub fn online_f(p: &BidProfile) -> f64 {
    let n = p.n();
    if n < 2 {
        return 0.0;
    }
    let mut best = 4.0 * p.nth_or_zero(2);
    for k in 3..=n {
        best = best.max(k as f64 * p.nth_or_zero(k));
    }
    best
}

/// The revenue curve g(j) = j * v_(j) together with its upper concave
/// envelope ghat on [2, n].
///
/// Invariants:
/// - `ghat(j) >= g(j)` for every j in [2, n];
/// - the envelope is sequence-concave: first differences are non-increasing;
/// - `ghat(2) = g(2)` and `ghat(n) = g(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GCurve {
    n: usize,
    g: Vec<f64>,
    ghat: Vec<f64>,
}

impl GCurve {
    pub fn n(&self) -> usize {
        self.n
    }

    /// g(j) for j in [1, n].
    pub fn g(&self, j: usize) -> f64 {
        assert!((1..=self.n).contains(&j), "g is defined on [1, n]");
        self.g[j - 1]
    }

    /// ghat(j) for j in [2, n].
    pub fn envelope(&self, j: usize) -> f64 {
        assert!((2..=self.n).contains(&j), "ghat is defined on [2, n]");
        self.ghat[j - 2]
    }
}

/// Builds the revenue curve and its envelope; needs at least two bids.
pub fn g_curve(p: &BidProfile) -> Result<GCurve> {
    let n = p.n();
    if n < 2 {
        return Err(AuctionLabError::TooFewBidders {
            operation: "g_curve",
            minimum: 2,
            got: n,
        });
    }
    let g: Vec<f64> = (1..=n).map(|j| j as f64 * p.nth_or_zero(j)).collect();
    let ghat = upper_envelope(&g[1..], 2);
    Ok(GCurve { n, g, ghat })
}

/// `EFO2l(b, l) = max_{2 <= j <= min(l, n)} ghat(j)`; needs `l >= 2` and at
/// least two bids.
pub fn efo2_multiunit(p: &BidProfile, units: u32) -> Result<f64> {
    if units < 2 {
        return Err(AuctionLabError::UnitsOutOfRange {
            context: "efo2_multiunit",
            minimum: 2,
            got: units,
        });
    }
    let curve = g_curve(p)?;
    let hi = curve.n().min(units as usize);
    Ok((2..=hi)
        .map(|j| curve.envelope(j))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// The fixed-price benchmark without the two-winner floor.
///
/// - Unlimited supply: `max_{1 <= k <= n} k * b_(k)`.
/// - l units: the upper concave envelope of g on [1, n], maximized over
///   [1, min(l, n)].
/// - Explicit downward-closed systems are not supported here; computing the
///   benchmark there requires optimizing over the set family.
pub fn efo_fixed_price(p: &BidProfile, env: &EnvironmentSpec) -> Result<f64> {
    env.validate()?;
    let n = p.n();
    match env {
        EnvironmentSpec::UnlimitedSupply => Ok((1..=n)
            .map(|k| k as f64 * p.nth_or_zero(k))
            .fold(0.0, f64::max)),
        EnvironmentSpec::MultiUnit { units } => {
            if n == 0 {
                return Ok(0.0);
            }
            let g: Vec<f64> = (1..=n).map(|j| j as f64 * p.nth_or_zero(j)).collect();
            let ghat = upper_envelope(&g, 1);
            let hi = n.min(*units as usize);
            Ok(ghat[..hi].iter().copied().fold(0.0, f64::max))
        }
        EnvironmentSpec::DownwardClosed { .. } => Err(AuctionLabError::UnsupportedEnvironment {
            operation: "efo_fixed_price",
        }),
    }
}

/// Upper concave envelope of the points (lo, values[0]), (lo+1, values[1]),
/// ... evaluated back at the same integer abscissas. Monotone-chain upper
/// hull followed by a linear walk over the hull segments.
fn upper_envelope(values: &[f64], lo: usize) -> Vec<f64> {
    let m = values.len();
    if m == 0 {
        return Vec::new();
    }
    // Hull vertices as (x, y); x strictly increasing.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(m);
    for (offset, &y) in values.iter().enumerate() {
        let x = (lo + offset) as f64;
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Keep b only if (a, b, new) turns clockwise, i.e. b lies
            // strictly above the chord from a to the new point.
            let cross = (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let mut out = Vec::with_capacity(m);
    let mut seg = 0;
    for offset in 0..m {
        let x = (lo + offset) as f64;
        while seg + 1 < hull.len() && hull[seg + 1].0 < x {
            seg += 1;
        }
        if seg + 1 == hull.len() {
            out.push(hull[seg].1);
        } else {
            let (x0, y0) = hull[seg];
            let (x1, y1) = hull[seg + 1];
            out.push(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::brute;

    fn profile(bids: &[f64]) -> BidProfile {
        BidProfile::new(bids.to_vec()).unwrap()
    }

    // ------------------------------------------------------------------
    // f2, f2l, maxv
    // ------------------------------------------------------------------

    #[test]
    fn f2_takes_the_best_rank_at_least_two() {
        assert_eq!(f2(&profile(&[10.0, 4.0])), 8.0);
        assert_eq!(f2(&profile(&[10.0, 4.0, 4.0])), 12.0);
        assert_eq!(f2(&profile(&[5.0, 5.0, 1.0])), 10.0);
        assert_eq!(f2(&profile(&[9.0])), 0.0);
        assert_eq!(f2(&profile(&[])), 0.0);
    }

    #[test]
    fn f2l_caps_the_rank_at_the_unit_count() {
        let p = profile(&[6.0, 6.0, 6.0, 6.0]);
        assert_eq!(f2l(&p, 2).unwrap(), 12.0);
        assert_eq!(f2l(&p, 3).unwrap(), 18.0);
        assert_eq!(f2l(&p, 10).unwrap(), 24.0);
        assert!(f2l(&p, 1).is_err());
        assert_eq!(f2l(&profile(&[3.0]), 2).unwrap(), 0.0);
    }

    #[test]
    fn f2l_at_full_supply_matches_f2() {
        let p = profile(&[7.0, 3.0, 2.5, 2.0, 1.0]);
        assert_eq!(f2l(&p, 5).unwrap(), f2(&p));
        assert_eq!(f2l(&p, 64).unwrap(), f2(&p));
    }

    #[test]
    fn maxv_prices_the_top_k_at_the_next_bid() {
        assert_eq!(maxv(&profile(&[10.0, 4.0])), 4.0);
        assert_eq!(maxv(&profile(&[10.0, 4.0, 4.0])), 8.0);
        assert_eq!(maxv(&profile(&[5.0, 5.0, 1.0])), 5.0);
        assert_eq!(maxv(&profile(&[9.0])), 0.0);
    }

    #[test]
    fn maxv_never_exceeds_f2_by_more_than_the_top_term() {
        // maxv uses prices one rank deeper, so maxv <= f2 on every profile
        // with the same winner count, except the k = 1 term.
        let p = profile(&[8.0, 6.0, 5.0, 1.0]);
        assert!(maxv(&p) <= f2(&p).max(p.nth_or_zero(2)));
    }

    // ------------------------------------------------------------------
    // online_f
    // ------------------------------------------------------------------

    #[test]
    fn online_f_uses_coefficient_four_at_rank_two() {
        assert_eq!(online_f(&profile(&[10.0, 4.0])), 16.0);
        assert_eq!(online_f(&profile(&[1.0, 1.0, 1.0])), 4.0);
        assert_eq!(online_f(&profile(&[9.0])), 0.0);
    }

    #[test]
    fn online_f_matches_the_rank_terms_beyond_two() {
        // Ranks: 4*5, 3*4, 4*3, 5*2, 6*1; the rank-2 term wins.
        let p = profile(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        assert_eq!(online_f(&p), 20.0);
        // A deep flat profile is dominated by the last rank.
        let flat = profile(&[2.0; 12]);
        assert_eq!(online_f(&flat), 24.0);
    }

    #[test]
    fn online_f_equals_max_of_4b2_and_f2() {
        // max(4 b_(2), 3 b_(3), 4 b_(4), ...) = max(4 b_(2), F2): the rank-3
        // term 3 b_(3) is dominated by 4 b_(2) whenever it beats nothing
        // else, and every rank k >= 4 term appears in both sides.
        for bids in [
            vec![10.0, 4.0],
            vec![5.0, 5.0, 5.0],
            vec![9.0, 7.0, 1.0, 0.5],
            vec![2.0; 9],
            vec![100.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        ] {
            let p = profile(&bids);
            assert_eq!(online_f(&p), (4.0 * p.nth_or_zero(2)).max(f2(&p)));
        }
    }

    // ------------------------------------------------------------------
    // envelope
    // ------------------------------------------------------------------

    #[test]
    fn envelope_bridges_the_dip() {
        // v = (4, 4, 2, 2, 2, 2, 2, 2): g = (4, 8, 6, 8, 10, 12, 14, 16).
        // The dip at j = 3 is bridged by the chord from (2, 8) to (4, 8),
        // then the envelope follows the chord from (2, 8) up to (8, 16):
        // ghat(3) = 8 + (16 - 8) / 6 = 28/3.
        let p = profile(&[4.0, 4.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
        let curve = g_curve(&p).unwrap();
        assert!((curve.envelope(3) - 28.0 / 3.0).abs() < 1e-12);
        assert_eq!(curve.envelope(2), curve.g(2));
        assert_eq!(curve.envelope(8), curve.g(8));
        assert_eq!(efo2_multiunit(&p, 3).unwrap(), curve.envelope(3));
        assert_eq!(efo2_multiunit(&p, 8).unwrap(), 16.0);
    }

    #[test]
    fn envelope_dominates_g_and_is_concave() {
        let p = profile(&[9.0, 7.0, 6.5, 2.0, 1.9, 1.0, 0.4]);
        let curve = g_curve(&p).unwrap();
        let n = curve.n();
        for j in 2..=n {
            assert!(curve.envelope(j) >= curve.g(j) - 1e-12);
        }
        for j in 3..n {
            let left = curve.envelope(j) - curve.envelope(j - 1);
            let right = curve.envelope(j + 1) - curve.envelope(j);
            assert!(right <= left + 1e-9, "envelope not concave at {j}");
        }
    }

    #[test]
    fn envelope_matches_the_cubic_reference() {
        let profiles = [
            vec![4.0, 4.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0],
            vec![10.0, 9.0, 1.0, 1.0, 1.0],
            vec![3.0, 3.0, 3.0],
            vec![8.0, 5.0, 5.0, 4.0, 2.0, 2.0, 1.0, 0.5, 0.25, 0.1],
        ];
        for bids in profiles {
            let p = profile(&bids);
            let curve = g_curve(&p).unwrap();
            let reference = brute::efo2_envelope_brute(&p);
            for j in 2..=p.n() {
                assert!(
                    (curve.envelope(j) - reference[j - 2]).abs() < 1e-9,
                    "envelope mismatch at j = {j} on {bids:?}"
                );
            }
        }
    }

    #[test]
    fn g_curve_needs_two_bidders() {
        assert!(g_curve(&profile(&[5.0])).is_err());
        assert!(efo2_multiunit(&profile(&[5.0]), 2).is_err());
    }

    // ------------------------------------------------------------------
    // efo_fixed_price
    // ------------------------------------------------------------------

    #[test]
    fn fixed_price_benchmark_allows_a_single_winner() {
        let p = profile(&[10.0, 4.0]);
        let unlimited = EnvironmentSpec::unlimited();
        assert_eq!(efo_fixed_price(&p, &unlimited).unwrap(), 10.0);
        let single = profile(&[9.0]);
        assert_eq!(efo_fixed_price(&single, &unlimited).unwrap(), 9.0);
    }

    #[test]
    fn fixed_price_benchmark_envelopes_in_multi_unit() {
        // The multi-unit value is the maximum of the envelope over the
        // unit prefix; for (10, 1, 1, 1) the top bid dominates every later
        // envelope point, so two units still give 10.
        let p = profile(&[10.0, 1.0, 1.0, 1.0]);
        let env = EnvironmentSpec::multi_unit(2);
        assert_eq!(efo_fixed_price(&p, &env).unwrap(), 10.0);
        let one = EnvironmentSpec::multi_unit(1);
        assert_eq!(efo_fixed_price(&p, &one).unwrap(), 10.0);
        // g on (4,4,2,...,2) with n = 8 is (4, 8, 6, 8, 10, 12, 14, 16);
        // the hull bridges (2, 8) to (8, 16), so at three units the chord
        // value 28/3 beats every plain fixed price in the prefix.
        let gap = profile(&[4.0, 4.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
        let three = EnvironmentSpec::multi_unit(3);
        assert!((efo_fixed_price(&gap, &three).unwrap() - 28.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_price_benchmark_rejects_set_systems() {
        let env = EnvironmentSpec::downward_closed(vec![
            crate::core::FeasibleSet {
                members: std::collections::BTreeSet::new(),
                prob: 0.5,
            },
            crate::core::FeasibleSet {
                members: [0].into_iter().collect(),
                prob: 0.5,
            },
        ]);
        assert!(matches!(
            efo_fixed_price(&profile(&[1.0]), &env),
            Err(AuctionLabError::UnsupportedEnvironment { .. })
        ));
    }

    // ------------------------------------------------------------------
    // scale covariance
    // ------------------------------------------------------------------

    #[test]
    fn benchmarks_are_scale_covariant() {
        let bids = vec![7.0, 3.0, 2.0, 1.5];
        let p = profile(&bids);
        let scaled = profile(&bids.iter().map(|b| b * 3.0).collect::<Vec<_>>());
        assert!((f2(&scaled) - 3.0 * f2(&p)).abs() < 1e-12);
        assert!((maxv(&scaled) - 3.0 * maxv(&p)).abs() < 1e-12);
        assert!((online_f(&scaled) - 3.0 * online_f(&p)).abs() < 1e-12);
        assert!(
            (efo2_multiunit(&scaled, 3).unwrap() - 3.0 * efo2_multiunit(&p, 3).unwrap()).abs()
                < 1e-9
        );
    }
}
