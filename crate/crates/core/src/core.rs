//! Domain types shared by every module: bid profiles with a stable sorted
//! view, feasibility environments, auction outcomes, and the deterministic
//! randomness plumbing.
//!
//! Everything here is immutable after construction and safe to share across
//! threads. Operations are pure functions of their inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Crate-wide error type. Invalid inputs are rejected eagerly so that the
/// numeric code can assume well-formed data everywhere else.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuctionLabError {
    #[error("bid {value} at index {index} must be finite and nonnegative")]
    InvalidBid { index: usize, value: f64 },
    #[error("{context}: unit count must be at least {minimum}, got {got}")]
    UnitsOutOfRange {
        context: &'static str,
        minimum: u32,
        got: u32,
    },
    #[error("{operation}: needs at least {minimum} bidders, got {got}")]
    TooFewBidders {
        operation: &'static str,
        minimum: usize,
        got: usize,
    },
    #[error("{operation} is not implemented for explicit downward-closed set systems")]
    UnsupportedEnvironment { operation: &'static str },
    #[error(transparent)]
    Environment(#[from] EnvironmentViolation),
    #[error("sigma must lie strictly between 0 and 1/2, got {got}")]
    InvalidSigma { got: f64 },
    #[error("mixture weights must be positive, got {got}")]
    InvalidWeight { got: f64 },
    #[error("parameter {name} must be at least {minimum}, got {got}")]
    ParameterTooSmall {
        name: &'static str,
        minimum: u64,
        got: u64,
    },
    #[error("order statistic rank {k} is out of range for {n} draws")]
    RankOutOfRange { n: u64, k: u64 },
    #[error("the expectation of the top order statistic diverges; rank must be at least 2, got {k}")]
    OrderStatisticDiverges { k: u64 },
    #[error(
        "closed-form survival of the online benchmark requires n >= 5; \
         small n is covered by the hard-coded branch of ratio_online_f"
    )]
    SmallNUnsupported { got: u64 },
    #[error("adaptive quadrature did not converge: requested {requested}, achieved {achieved}")]
    QuadratureDidNotConverge { requested: f64, achieved: f64 },
    #[error("arrival order is not a permutation of 0..{n}")]
    InvalidArrivalOrder { n: usize },
    #[error("unknown property suite {name:?}")]
    UnknownSuite { name: String },
}

/// Shorthand used throughout the crate.
pub type Result<T> = std::result::Result<T, AuctionLabError>;

// ============================================================================
// Bid profiles
// ============================================================================

/// A finite list of nonnegative real bids, the universal input of every
/// benchmark and auction.
///
/// Invariants, enforced at construction:
/// - every bid is finite and >= 0;
/// - the sorted view b_(1) >= b_(2) >= ... >= b_(n) is a permutation of the
///   stored bids with ties broken by ascending original index, so every
///   rank-based formula is well defined under ties.
#[derive(Clone, PartialEq)]
pub struct BidProfile {
    bids: Vec<f64>,
    by_rank: Vec<usize>,
}

/// One entry of the sorted view: `rank` is 1-based, `index` is the position
/// of the bid in the original profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedBid {
    pub rank: usize,
    pub index: usize,
    pub value: f64,
}

impl BidProfile {
    /// Validates and wraps a bid vector. Bids of exactly 0 are legal;
    /// auctions treat them as non-buyers at any positive price.
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        for (index, &value) in bids.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(AuctionLabError::InvalidBid { index, value });
            }
        }
        let by_rank = stable_descending_order(&bids);
        Ok(Self { bids, by_rank })
    }

    pub fn n(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    /// Bids in their original submission order.
    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn bid(&self, index: usize) -> f64 {
        self.bids[index]
    }

    /// The stable sorted view: values non-increasing by rank, ties broken by
    /// ascending original index.
    pub fn sorted_view(&self) -> Vec<RankedBid> {
        self.by_rank
            .iter()
            .enumerate()
            .map(|(r, &index)| RankedBid {
                rank: r + 1,
                index,
                value: self.bids[index],
            })
            .collect()
    }

    /// b_(rank) with 1-based rank; `None` outside 1..=n.
    pub fn nth_highest(&self, rank: usize) -> Option<f64> {
        if rank == 0 || rank > self.n() {
            return None;
        }
        Some(self.bids[self.by_rank[rank - 1]])
    }

    /// b_(rank), reading 0 beyond the profile. Matches the convention
    /// v_(l+1) = 0 when n <= l used by the limited-supply formulas.
    pub fn nth_or_zero(&self, rank: usize) -> f64 {
        self.nth_highest(rank).unwrap_or(0.0)
    }

    /// Original index of the bidder holding the given 1-based rank.
    pub fn index_at_rank(&self, rank: usize) -> Option<usize> {
        self.by_rank.get(rank - 1).copied()
    }

    /// Values sorted in non-increasing order.
    pub fn sorted_values(&self) -> Vec<f64> {
        self.by_rank.iter().map(|&i| self.bids[i]).collect()
    }

    /// The profile with one bidder removed; the remaining bids keep their
    /// relative submission order.
    pub fn without(&self, index: usize) -> BidProfile {
        let bids: Vec<f64> = self
            .bids
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, &b)| b)
            .collect();
        BidProfile::new(bids).expect("removing a bid preserves validity")
    }

    /// The profile with one bid replaced, used to evaluate deviations.
    pub fn with_bid(&self, index: usize, value: f64) -> Result<BidProfile> {
        let mut bids = self.bids.clone();
        bids[index] = value;
        BidProfile::new(bids)
    }
}

impl fmt::Debug for BidProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BidProfile({:?})", self.bids)
    }
}

fn stable_descending_order(bids: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| {
        bids[b]
            .partial_cmp(&bids[a])
            .expect("bids are finite")
            .then(a.cmp(&b))
    });
    order
}

/// Rank-wise dominance p >= q: for every rank i up to len(q), the i-th
/// largest bid of p exists and is at least the i-th largest bid of q.
/// False whenever p has fewer bids than q, so a market profile must cover
/// the target rank for rank.
pub fn dominates(p: &BidProfile, q: &BidProfile) -> bool {
    if p.n() < q.n() {
        return false;
    }
    (1..=q.n()).all(|r| p.nth_or_zero(r) >= q.nth_or_zero(r))
}

// ============================================================================
// Environments
// ============================================================================

/// One feasible winner set of an explicit downward-closed environment,
/// together with the probability of drawing it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub members: BTreeSet<usize>,
    pub prob: f64,
}

/// Supply model. An allocation is feasible iff its winner set is a subset of
/// a feasible set; for `MultiUnit` that means at most `units` winners, and
/// for `UnlimitedSupply` every winner set is feasible.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentSpec {
    UnlimitedSupply,
    MultiUnit { units: u32 },
    DownwardClosed { sets: Vec<FeasibleSet> },
}

/// Violations reported by [`EnvironmentSpec::validate`]; each names the
/// offending set or probability mass.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvironmentViolation {
    #[error("multi-unit environments need at least one unit")]
    ZeroUnits,
    #[error("feasible-set probabilities sum to {total}, expected 1 within 1e-12")]
    ProbabilityMass { total: f64 },
    #[error("feasible set #{set_index} has negative probability {prob}")]
    NegativeProbability { set_index: usize, prob: f64 },
    #[error("downward closure fails: {superset:?} is listed but its subset {subset:?} is not")]
    MissingSubset {
        superset: Vec<usize>,
        subset: Vec<usize>,
    },
    #[error("feasible set #{set_index} has {size} members; closure validation caps sets at {cap}")]
    SetTooLarge {
        set_index: usize,
        size: usize,
        cap: usize,
    },
}

/// Largest feasible set size that closure validation will enumerate.
const CLOSURE_VALIDATION_CAP: usize = 20;

const PROBABILITY_MASS_TOLERANCE: f64 = 1e-12;

impl EnvironmentSpec {
    pub fn unlimited() -> Self {
        EnvironmentSpec::UnlimitedSupply
    }

    pub fn multi_unit(units: u32) -> Self {
        EnvironmentSpec::MultiUnit { units }
    }

    pub fn downward_closed(sets: Vec<FeasibleSet>) -> Self {
        EnvironmentSpec::DownwardClosed { sets }
    }

    /// Accepts iff the structural invariants hold: positive unit counts,
    /// probability mass 1 within 1e-12, and a set family closed under
    /// subsets.
    pub fn validate(&self) -> std::result::Result<(), EnvironmentViolation> {
        match self {
            EnvironmentSpec::UnlimitedSupply => Ok(()),
            EnvironmentSpec::MultiUnit { units } => {
                if *units == 0 {
                    Err(EnvironmentViolation::ZeroUnits)
                } else {
                    Ok(())
                }
            }
            EnvironmentSpec::DownwardClosed { sets } => {
                let mut total = 0.0;
                for (set_index, set) in sets.iter().enumerate() {
                    if set.prob < 0.0 {
                        return Err(EnvironmentViolation::NegativeProbability {
                            set_index,
                            prob: set.prob,
                        });
                    }
                    total += set.prob;
                }
                if (total - 1.0).abs() > PROBABILITY_MASS_TOLERANCE {
                    return Err(EnvironmentViolation::ProbabilityMass { total });
                }
                let listed: BTreeSet<&BTreeSet<usize>> =
                    sets.iter().map(|s| &s.members).collect();
                for (set_index, set) in sets.iter().enumerate() {
                    let members: Vec<usize> = set.members.iter().copied().collect();
                    if members.len() > CLOSURE_VALIDATION_CAP {
                        return Err(EnvironmentViolation::SetTooLarge {
                            set_index,
                            size: members.len(),
                            cap: CLOSURE_VALIDATION_CAP,
                        });
                    }
                    for mask in 0u32..(1u32 << members.len()) {
                        let subset: BTreeSet<usize> = members
                            .iter()
                            .enumerate()
                            .filter(|&(bit, _)| mask & (1 << bit) != 0)
                            .map(|(_, &m)| m)
                            .collect();
                        if !listed.contains(&subset) {
                            return Err(EnvironmentViolation::MissingSubset {
                                superset: members.clone(),
                                subset: subset.into_iter().collect(),
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Whether the given winner set can be served in this environment.
    pub fn allows(&self, winners: &BTreeSet<usize>) -> bool {
        match self {
            EnvironmentSpec::UnlimitedSupply => true,
            EnvironmentSpec::MultiUnit { units } => winners.len() <= *units as usize,
            EnvironmentSpec::DownwardClosed { sets } => sets
                .iter()
                .any(|s| s.prob > 0.0 && winners.is_subset(&s.members)),
        }
    }
}

// ============================================================================
// Outcomes
// ============================================================================

/// Per-bidder service indicators and payments. Revenue is the payment sum.
///
/// Invariants checked by [`AuctionOutcome::validate`]:
/// - a positive payment implies service;
/// - no payment exceeds the submitted bid (ex-post individual rationality);
/// - the winner set is feasible in the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    served: Vec<bool>,
    payments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutcomeViolation {
    #[error("bidder {bidder} pays {payment} without being served")]
    PaymentWithoutService { bidder: usize, payment: f64 },
    #[error("bidder {bidder} pays {payment}, exceeding the bid {bid}")]
    PaymentExceedsBid {
        bidder: usize,
        payment: f64,
        bid: f64,
    },
    #[error("bidder {bidder} has negative payment {payment}")]
    NegativePayment { bidder: usize, payment: f64 },
    #[error("winner set is infeasible in the environment")]
    InfeasibleWinners,
    #[error("outcome covers {outcome_n} bidders, profile has {profile_n}")]
    LengthMismatch { outcome_n: usize, profile_n: usize },
}

impl AuctionOutcome {
    pub fn new(served: Vec<bool>, payments: Vec<f64>) -> Self {
        assert_eq!(
            served.len(),
            payments.len(),
            "service flags and payments must cover the same bidders"
        );
        Self { served, payments }
    }

    /// The outcome that serves nobody and charges nothing.
    pub fn reject_all(n: usize) -> Self {
        Self {
            served: vec![false; n],
            payments: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.served.len()
    }

    pub fn served(&self) -> &[bool] {
        &self.served
    }

    pub fn payments(&self) -> &[f64] {
        &self.payments
    }

    pub fn is_served(&self, bidder: usize) -> bool {
        self.served[bidder]
    }

    pub fn payment(&self, bidder: usize) -> f64 {
        self.payments[bidder]
    }

    pub fn revenue(&self) -> f64 {
        self.payments.iter().sum()
    }

    pub fn winners(&self) -> BTreeSet<usize> {
        self.served
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s)
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks the outcome invariants against the submitted profile and the
    /// environment.
    pub fn validate(
        &self,
        profile: &BidProfile,
        env: &EnvironmentSpec,
    ) -> std::result::Result<(), OutcomeViolation> {
        if self.n() != profile.n() {
            return Err(OutcomeViolation::LengthMismatch {
                outcome_n: self.n(),
                profile_n: profile.n(),
            });
        }
        for bidder in 0..self.n() {
            let payment = self.payments[bidder];
            if payment < 0.0 {
                return Err(OutcomeViolation::NegativePayment { bidder, payment });
            }
            if payment > 0.0 && !self.served[bidder] {
                return Err(OutcomeViolation::PaymentWithoutService { bidder, payment });
            }
            if self.served[bidder] && payment > profile.bid(bidder) {
                return Err(OutcomeViolation::PaymentExceedsBid {
                    bidder,
                    payment,
                    bid: profile.bid(bidder),
                });
            }
        }
        if !env.allows(&self.winners()) {
            return Err(OutcomeViolation::InfeasibleWinners);
        }
        Ok(())
    }

    /// Shared post-check run in debug and test builds by every auction in
    /// this crate before an outcome is returned.
    pub(crate) fn checked(self, profile: &BidProfile, env: &EnvironmentSpec) -> Self {
        debug_assert!(
            self.validate(profile, env).is_ok(),
            "auction produced an invalid outcome: {:?} on {:?}",
            self.validate(profile, env).unwrap_err(),
            profile
        );
        self
    }
}

// ============================================================================
// Randomness
// ============================================================================

/// Deterministic randomness handle: a master seed plus a stream id.
///
/// Invariants:
/// - identical (seed, stream) pairs produce identical draw sequences;
/// - distinct stream ids select distinct cipher streams of the same keyed
///   ChaCha12 generator, giving statistically independent sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSource {
    master_seed: u64,
    stream_id: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_stream(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A child source on the same master seed whose stream id mixes the
    /// current id with `tag`. Used to hand independent randomness to
    /// sub-auctions without sharing draw positions.
    pub fn substream(&self, tag: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(tag)),
        }
    }

    /// The generator for this (seed, stream) pair.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Folds `parts` into `base` with a splitmix64 chain. Used to key
/// content-addressed randomness such as the online pricer's half-split,
/// where the draw must be a pure function of the observed data.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(base);
    for &part in parts {
        acc = splitmix64(acc ^ splitmix64(part));
    }
    acc
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn profile(bids: &[f64]) -> BidProfile {
        BidProfile::new(bids.to_vec()).unwrap()
    }

    // ------------------------------------------------------------------
    // sorted_view
    // ------------------------------------------------------------------

    #[test]
    fn sorted_view_orders_by_value_then_index() {
        let p = profile(&[5.0, 9.0, 3.0]);
        let view = p.sorted_view();
        let values: Vec<f64> = view.iter().map(|r| r.value).collect();
        let indices: Vec<usize> = view.iter().map(|r| r.index).collect();
        assert_eq!(values, vec![9.0, 5.0, 3.0]);
        assert_eq!(indices, vec![1, 0, 2]);
    }

    #[test]
    fn sorted_view_breaks_ties_by_ascending_index() {
        let p = profile(&[4.0, 4.0]);
        let view = p.sorted_view();
        assert_eq!(view[0].index, 0);
        assert_eq!(view[1].index, 1);
        assert_eq!(view[0].value, 4.0);
        assert_eq!(view[1].value, 4.0);
    }

    #[test]
    fn sorted_view_of_empty_profile_is_empty() {
        let p = profile(&[]);
        assert!(p.sorted_view().is_empty());
    }

    #[test]
    fn sorted_view_is_a_permutation() {
        let p = profile(&[2.0, 7.0, 2.0, 0.0, 7.0]);
        let mut from_view: Vec<f64> = p.sorted_view().iter().map(|r| r.value).collect();
        let mut original = p.bids().to_vec();
        from_view.sort_by(|a, b| a.partial_cmp(b).unwrap());
        original.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(from_view, original);
    }

    #[test]
    fn invalid_bids_are_rejected() {
        assert!(BidProfile::new(vec![1.0, -0.5]).is_err());
        assert!(BidProfile::new(vec![f64::NAN]).is_err());
        assert!(BidProfile::new(vec![f64::INFINITY]).is_err());
        assert!(BidProfile::new(vec![0.0]).is_ok());
    }

    // ------------------------------------------------------------------
    // dominates
    // ------------------------------------------------------------------

    #[test]
    fn dominates_compares_rank_by_rank() {
        assert!(dominates(&profile(&[10.0, 5.0, 4.0]), &profile(&[4.0, 4.0, 4.0])));
        assert!(!dominates(&profile(&[10.0, 5.0, 3.0]), &profile(&[4.0, 4.0, 4.0])));
    }

    #[test]
    fn shorter_profile_never_dominates() {
        assert!(!dominates(&profile(&[7.0]), &profile(&[7.0, 1.0])));
    }

    #[test]
    fn dominates_is_reflexive_and_monotone() {
        let p = profile(&[3.0, 1.0, 8.0]);
        assert!(dominates(&p, &p));
        let raised = p.with_bid(1, 5.0).unwrap();
        assert!(dominates(&raised, &p));
    }

    // ------------------------------------------------------------------
    // environments
    // ------------------------------------------------------------------

    fn fs(members: &[usize], prob: f64) -> FeasibleSet {
        FeasibleSet {
            members: members.iter().copied().collect(),
            prob,
        }
    }

    #[test]
    fn downward_closed_family_validates() {
        let env = EnvironmentSpec::downward_closed(vec![fs(&[], 0.5), fs(&[0], 0.5)]);
        assert!(env.validate().is_ok());
    }

    #[test]
    fn missing_subset_is_reported() {
        let env = EnvironmentSpec::downward_closed(vec![fs(&[0, 1], 1.0)]);
        match env.validate() {
            Err(EnvironmentViolation::MissingSubset { superset, .. }) => {
                assert_eq!(superset, vec![0, 1]);
            }
            other => panic!("expected closure violation, got {other:?}"),
        }
    }

    #[test]
    fn zero_units_is_rejected() {
        assert_eq!(
            EnvironmentSpec::multi_unit(0).validate(),
            Err(EnvironmentViolation::ZeroUnits)
        );
    }

    #[test]
    fn probability_mass_must_be_one() {
        let env = EnvironmentSpec::downward_closed(vec![fs(&[], 0.25), fs(&[0], 0.25)]);
        assert!(matches!(
            env.validate(),
            Err(EnvironmentViolation::ProbabilityMass { .. })
        ));
    }

    #[test]
    fn feasibility_respects_the_kind() {
        let unlimited = EnvironmentSpec::unlimited();
        let two = EnvironmentSpec::multi_unit(2);
        let winners: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        assert!(unlimited.allows(&winners));
        assert!(!two.allows(&winners));
        let dc = EnvironmentSpec::downward_closed(vec![fs(&[], 0.5), fs(&[1], 0.5)]);
        assert!(dc.allows(&[1].into_iter().collect()));
        assert!(!dc.allows(&[0].into_iter().collect()));
    }

    // ------------------------------------------------------------------
    // outcomes
    // ------------------------------------------------------------------

    #[test]
    fn outcome_invariants_are_enforced() {
        let p = profile(&[5.0, 3.0]);
        let env = EnvironmentSpec::unlimited();
        let ok = AuctionOutcome::new(vec![true, false], vec![3.0, 0.0]);
        assert!(ok.validate(&p, &env).is_ok());
        assert_eq!(ok.revenue(), 3.0);

        let pays_unserved = AuctionOutcome::new(vec![false, false], vec![1.0, 0.0]);
        assert!(matches!(
            pays_unserved.validate(&p, &env),
            Err(OutcomeViolation::PaymentWithoutService { bidder: 0, .. })
        ));

        let overcharges = AuctionOutcome::new(vec![true, false], vec![6.0, 0.0]);
        assert!(matches!(
            overcharges.validate(&p, &env),
            Err(OutcomeViolation::PaymentExceedsBid { bidder: 0, .. })
        ));

        let crowded = AuctionOutcome::new(vec![true, true], vec![1.0, 1.0]);
        assert!(matches!(
            crowded.validate(&p, &EnvironmentSpec::multi_unit(1)),
            Err(OutcomeViolation::InfeasibleWinners)
        ));
    }

    // ------------------------------------------------------------------
    // randomness
    // ------------------------------------------------------------------

    #[test]
    fn identical_source_replays_identically() {
        let a: Vec<u64> = RandomSource::with_stream(7, 3).rng().sample_iter(rand::distributions::Standard).take(8).collect();
        let b: Vec<u64> = RandomSource::with_stream(7, 3).rng().sample_iter(rand::distributions::Standard).take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_differ() {
        let a: Vec<u64> = RandomSource::with_stream(7, 0).rng().sample_iter(rand::distributions::Standard).take(8).collect();
        let b: Vec<u64> = RandomSource::with_stream(7, 1).rng().sample_iter(rand::distributions::Standard).take(8).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn derive_seed_is_deterministic_and_order_sensitive() {
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
    }

    #[test]
    fn substream_changes_the_stream_only() {
        let base = RandomSource::new(11);
        let child = base.substream(4);
        assert_eq!(child.master_seed(), 11);
        assert_ne!(child.stream_id(), base.stream_id());
        assert_eq!(base.substream(4), child);
    }
}
