//! Stratified two-arm success tables.
//!
//! Rates are kept as exact rationals so that every ordering decision
//! (which arm is ahead, whether pooling flips the winner) is independent of
//! floating rounding. Decimals only appear when rendering.

mod significance;

pub use significance::{chi_squared, chi_squared_with, fisher_exact, fisher_exact_with};
pub use significance::{Alternative, TestMethod, TestResult};

use crate::rational::{ratio, round_half_even, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContingencyError {
    #[error("arm has zero trials")]
    ZeroTrials,
    #[error("successes ({successes}) exceed trials ({trials})")]
    SuccessesExceedTrials { successes: u64, trials: u64 },
    #[error("arm labels must be distinct, got {0:?} twice")]
    DuplicateArmLabel(String),
    #[error("stratified table needs at least one stratum")]
    NoStrata,
    #[error("duplicate stratum label {0:?}")]
    DuplicateStratum(String),
    #[error("stratum {stratum:?} has arms {found:?}, expected {expected:?}")]
    ArmLabelMismatch {
        stratum: String,
        found: [String; 2],
        expected: [String; 2],
    },
    #[error("unknown arm {0:?}")]
    UnknownArm(String),
    #[error("degenerate table: {0} margin is zero")]
    DegenerateTable(&'static str),
}

/// Successes out of trials for one arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawArmCounts")]
pub struct ArmCounts {
    successes: u64,
    trials: u64,
}

#[derive(Deserialize)]
struct RawArmCounts {
    successes: u64,
    trials: u64,
}

impl TryFrom<RawArmCounts> for ArmCounts {
    type Error = ContingencyError;
    fn try_from(raw: RawArmCounts) -> Result<Self, Self::Error> {
        ArmCounts::new(raw.successes, raw.trials)
    }
}

impl ArmCounts {
    pub fn new(successes: u64, trials: u64) -> Result<Self, ContingencyError> {
        if trials == 0 {
            return Err(ContingencyError::ZeroTrials);
        }
        if successes > trials {
            return Err(ContingencyError::SuccessesExceedTrials { successes, trials });
        }
        Ok(Self { successes, trials })
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn failures(&self) -> u64 {
        self.trials - self.successes
    }

    pub fn rate(&self) -> Rational {
        rate(self)
    }

    /// Sign of `self.rate() - other.rate()` by cross-multiplication.
    pub fn compare_rate(&self, other: &ArmCounts) -> Ordering {
        let lhs = self.successes as u128 * other.trials as u128;
        let rhs = other.successes as u128 * self.trials as u128;
        lhs.cmp(&rhs)
    }
}

/// Exact success proportion `successes / trials`.
pub fn rate(counts: &ArmCounts) -> Rational {
    ratio(counts.successes, counts.trials)
}

/// Decimal rendering of a rate, half-to-even at `places` digits.
pub fn render_rate(counts: &ArmCounts, places: u32) -> String {
    round_half_even(&rate(counts), places)
}

/// Two labelled arms, e.g. treatment vs control.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoArmTable {
    labels: [String; 2],
    arms: [ArmCounts; 2],
}

impl TwoArmTable {
    pub fn new(
        label_a: impl Into<String>,
        arm_a: ArmCounts,
        label_b: impl Into<String>,
        arm_b: ArmCounts,
    ) -> Result<Self, ContingencyError> {
        let (label_a, label_b) = (label_a.into(), label_b.into());
        if label_a == label_b {
            return Err(ContingencyError::DuplicateArmLabel(label_a));
        }
        Ok(Self {
            labels: [label_a, label_b],
            arms: [arm_a, arm_b],
        })
    }

    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn arm_a(&self) -> &ArmCounts {
        &self.arms[0]
    }

    pub fn arm_b(&self) -> &ArmCounts {
        &self.arms[1]
    }

    pub fn arm(&self, label: &str) -> Option<&ArmCounts> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.arms[i])
    }

    /// Same data with the two arms exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            labels: [self.labels[1].clone(), self.labels[0].clone()],
            arms: [self.arms[1], self.arms[0]],
        }
    }

    pub fn total_trials(&self) -> u64 {
        self.arms[0].trials + self.arms[1].trials
    }

    /// Which arm has the higher success rate.
    pub fn direction(&self) -> Direction {
        Direction::from(self.arms[0].compare_rate(&self.arms[1]))
    }
}

/// Stratum-labelled two-arm tables sharing the same arm labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedTable {
    strata: Vec<(String, TwoArmTable)>,
}

impl StratifiedTable {
    pub fn new(strata: Vec<(String, TwoArmTable)>) -> Result<Self, ContingencyError> {
        let Some((_, first)) = strata.first() else {
            return Err(ContingencyError::NoStrata);
        };
        let expected = first.labels.clone();
        for (i, (label, table)) in strata.iter().enumerate() {
            if strata[..i].iter().any(|(l, _)| l == label) {
                return Err(ContingencyError::DuplicateStratum(label.clone()));
            }
            if table.labels != expected {
                return Err(ContingencyError::ArmLabelMismatch {
                    stratum: label.clone(),
                    found: table.labels.clone(),
                    expected,
                });
            }
        }
        Ok(Self { strata })
    }

    pub fn strata(&self) -> &[(String, TwoArmTable)] {
        &self.strata
    }

    pub fn arm_labels(&self) -> &[String; 2] {
        &self.strata[0].1.labels
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn swapped_arms(&self) -> Self {
        Self {
            strata: self
                .strata
                .iter()
                .map(|(l, t)| (l.clone(), t.swapped()))
                .collect(),
        }
    }

    pub fn grand_total(&self) -> u64 {
        self.strata.iter().map(|(_, t)| t.total_trials()).sum()
    }
}

/// Sums successes and trials per arm across all strata.
pub fn pool(strata: &StratifiedTable) -> TwoArmTable {
    let mut sums = [(0u64, 0u64); 2];
    for (_, table) in &strata.strata {
        for (sum, arm) in sums.iter_mut().zip(&table.arms) {
            sum.0 += arm.successes;
            sum.1 += arm.trials;
        }
    }
    let arms = sums.map(|(successes, trials)| ArmCounts { successes, trials });
    TwoArmTable {
        labels: strata.arm_labels().clone(),
        arms,
    }
}

/// Sign of `rate_a - rate_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FavorsA,
    Tie,
    FavorsB,
}

impl Direction {
    pub fn sign(self) -> i8 {
        match self {
            Direction::FavorsA => 1,
            Direction::Tie => 0,
            Direction::FavorsB => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::FavorsA => Direction::FavorsB,
            Direction::Tie => Direction::Tie,
            Direction::FavorsB => Direction::FavorsA,
        }
    }
}

impl From<Ordering> for Direction {
    fn from(ord: Ordering) -> Self {
        match ord {
            Ordering::Greater => Direction::FavorsA,
            Ordering::Equal => Direction::Tie,
            Ordering::Less => Direction::FavorsB,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateComparison {
    pub label: String,
    pub counts: [ArmCounts; 2],
    pub rates: [Rational; 2],
    pub direction: Direction,
}

impl RateComparison {
    fn of(label: String, table: &TwoArmTable) -> Self {
        Self {
            label,
            counts: table.arms,
            rates: [rate(&table.arms[0]), rate(&table.arms[1])],
            direction: table.direction(),
        }
    }

    /// Both rates rendered half-to-even.
    pub fn rendered(&self, places: u32) -> [String; 2] {
        [
            round_half_even(&self.rates[0], places),
            round_half_even(&self.rates[1], places),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversalReport {
    pub arm_labels: [String; 2],
    pub per_stratum: Vec<RateComparison>,
    pub pooled: RateComparison,
    pub reversal: bool,
    pub note: Option<String>,
}

impl ReversalReport {
    pub fn per_stratum_directions(&self) -> Vec<Direction> {
        self.per_stratum.iter().map(|c| c.direction).collect()
    }

    pub fn pooled_direction(&self) -> Direction {
        self.pooled.direction
    }
}

/// Compares per-stratum orderings with the pooled ordering.
///
/// A reversal needs every stratum to favour the same arm strictly and the
/// pooled table to favour the other arm strictly. Ties never count.
pub fn detect_reversal(strata: &StratifiedTable) -> ReversalReport {
    let per_stratum: Vec<_> = strata
        .strata
        .iter()
        .map(|(label, table)| RateComparison::of(label.clone(), table))
        .collect();
    let pooled = RateComparison::of("pooled".to_string(), &pool(strata));

    let common = per_stratum[0].direction;
    let unanimous = common != Direction::Tie && per_stratum.iter().all(|c| c.direction == common);
    let single = per_stratum.len() < 2;
    let reversal = !single && unanimous && pooled.direction == common.flipped();
    let note = if single {
        Some("single stratum: pooling cannot reverse the ordering".to_string())
    } else if per_stratum.iter().any(|c| c.direction == Direction::Tie)
        || pooled.direction == Direction::Tie
    {
        Some("tied rates present: ties block a reversal verdict".to_string())
    } else {
        None
    };

    ReversalReport {
        arm_labels: strata.arm_labels().clone(),
        per_stratum,
        pooled,
        reversal,
        note,
    }
}

fn exceeds(num_a: u64, den_a: u64, num_b: u64, den_b: u64) -> bool {
    num_a as u128 * den_b as u128 > num_b as u128 * den_a as u128
}

/// `a1/b1 > c1/d1`, `a2/b2 > c2/d2` and yet `(c1+c2)/(d1+d2) > (a1+a2)/(b1+b2)`.
///
/// All comparisons are by cross-multiplication. Zero denominators return
/// `false`.
#[allow(clippy::too_many_arguments)]
pub fn reversal_condition(
    a1: u64,
    b1: u64,
    c1: u64,
    d1: u64,
    a2: u64,
    b2: u64,
    c2: u64,
    d2: u64,
) -> bool {
    if [b1, d1, b2, d2].contains(&0) {
        return false;
    }
    exceeds(a1, b1, c1, d1)
        && exceeds(a2, b2, c2, d2)
        && exceeds(c1 + c2, d1 + d2, a1 + a2, b1 + b2)
}

/// Back-door adjusted success probability for `arm`: stratum rates weighted
/// by each stratum's share of all subjects.
pub fn backdoor_adjust(strata: &StratifiedTable, arm: &str) -> Result<Rational, ContingencyError> {
    let index = strata
        .arm_labels()
        .iter()
        .position(|l| l == arm)
        .ok_or_else(|| ContingencyError::UnknownArm(arm.to_string()))?;
    let grand = strata.grand_total();
    let mut adjusted = Rational::zero();
    for (_, table) in &strata.strata {
        adjusted += rate(&table.arms[index]) * ratio(table.total_trials(), grand);
    }
    Ok(adjusted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arm(s: u64, t: u64) -> ArmCounts {
        ArmCounts::new(s, t).unwrap()
    }

    type Row<'a> = (&'a str, (u64, u64), (u64, u64));

    fn stratified(rows: &[Row], labels: [&str; 2]) -> StratifiedTable {
        StratifiedTable::new(
            rows.iter()
                .map(|(z, a, b)| {
                    let t = TwoArmTable::new(labels[0], arm(a.0, a.1), labels[1], arm(b.0, b.1))
                        .unwrap();
                    (z.to_string(), t)
                })
                .collect(),
        )
        .unwrap()
    }

    fn two_study_table() -> StratifiedTable {
        stratified(
            &[
                ("Study 1", (81, 87), (234, 270)),
                ("Study 2", (192, 263), (55, 80)),
            ],
            ["Treatment 1", "Treatment 2"],
        )
    }

    fn gender_table() -> StratifiedTable {
        stratified(
            &[("Males", (18, 30), (7, 10)), ("Females", (2, 10), (9, 30))],
            ["Treatment", "Control"],
        )
    }

    #[test]
    fn counts_validation() {
        assert_eq!(ArmCounts::new(1, 0), Err(ContingencyError::ZeroTrials));
        assert!(matches!(
            ArmCounts::new(3, 2),
            Err(ContingencyError::SuccessesExceedTrials { .. })
        ));
        assert!(TwoArmTable::new("x", arm(1, 2), "x", arm(1, 2)).is_err());
    }

    #[test]
    fn rates_render() {
        assert_eq!(render_rate(&arm(81, 87), 3), "0.931");
        assert_eq!(rate(&arm(0, 10)), Rational::zero());
        // Printed as 0.83 in the source table; the counts give 0.867.
        assert_eq!(render_rate(&arm(234, 270), 3), "0.867");
    }

    #[test]
    fn pooling() {
        let pooled = pool(&two_study_table());
        assert_eq!(*pooled.arm_a(), arm(273, 350));
        assert_eq!(*pooled.arm_b(), arm(289, 350));
        let pooled = pool(&gender_table());
        assert_eq!(*pooled.arm_a(), arm(20, 40));
        let single = stratified(&[("z", (3, 4), (1, 5))], ["a", "b"]);
        assert_eq!(pool(&single), single.strata()[0].1);
    }

    #[test]
    fn stratified_validation() {
        assert_eq!(
            StratifiedTable::new(vec![]),
            Err(ContingencyError::NoStrata)
        );
        let t = TwoArmTable::new("a", arm(1, 2), "b", arm(1, 2)).unwrap();
        let u = TwoArmTable::new("a", arm(1, 2), "c", arm(1, 2)).unwrap();
        assert!(matches!(
            StratifiedTable::new(vec![("z".into(), t.clone()), ("z".into(), t.clone())]),
            Err(ContingencyError::DuplicateStratum(_))
        ));
        assert!(matches!(
            StratifiedTable::new(vec![("z".into(), t), ("w".into(), u)]),
            Err(ContingencyError::ArmLabelMismatch { .. })
        ));
    }

    #[test]
    fn reversal_on_published_tables() {
        let r = detect_reversal(&two_study_table());
        assert!(r.reversal);
        assert_eq!(r.per_stratum_directions(), vec![Direction::FavorsA; 2]);
        assert_eq!(r.pooled_direction(), Direction::FavorsB);

        let r = detect_reversal(&gender_table());
        assert!(r.reversal);
        assert_eq!(r.per_stratum_directions(), vec![Direction::FavorsB; 2]);
        assert_eq!(r.pooled_direction(), Direction::FavorsA);
    }

    #[test]
    fn single_stratum_and_ties() {
        let r = detect_reversal(&stratified(&[("z", (3, 4), (1, 5))], ["a", "b"]));
        assert!(!r.reversal);
        assert!(r.note.is_some());
        let r = detect_reversal(&stratified(
            &[("z", (1, 2), (1, 2)), ("w", (1, 3), (2, 3))],
            ["a", "b"],
        ));
        assert!(!r.reversal);
        assert_eq!(r.per_stratum[0].direction, Direction::Tie);
    }

    #[test]
    fn equal_denominators_never_reverse() {
        // With identical trial counts per stratum and arm the pooled rate is
        // an average with the same weights for both arms.
        for t1 in 1..=5u64 {
            for t2 in 1..=5u64 {
                for a1 in 0..=t1 {
                    for b1 in 0..=t1 {
                        for a2 in 0..=t2 {
                            for b2 in 0..=t2 {
                                let s = stratified(
                                    &[("1", (a1, t1), (b1, t1)), ("2", (a2, t2), (b2, t2))],
                                    ["a", "b"],
                                );
                                assert!(!detect_reversal(&s).reversal);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reversal_condition_examples() {
        assert!(reversal_condition(81, 87, 234, 270, 192, 263, 55, 80));
        assert!(!reversal_condition(1, 2, 1, 2, 1, 2, 1, 2));
        assert!(!reversal_condition(1, 0, 1, 2, 1, 2, 1, 2));
    }

    #[test]
    fn reversal_condition_matches_float_scan() {
        // Brute-force floating comparison; exact ties are excluded because
        // floating division can misorder equal fractions.
        let n = 12u64;
        let fracs: Vec<(u64, u64)> = (1..=n).flat_map(|d| (0..=d).map(move |a| (a, d))).collect();
        let gt = |x: (u64, u64), y: (u64, u64)| {
            let (fx, fy) = (x.0 as f64 / x.1 as f64, y.0 as f64 / y.1 as f64);
            if x.0 * y.1 == y.0 * x.1 {
                false
            } else {
                fx > fy
            }
        };
        let mut hits = 0usize;
        for &s1a in &fracs {
            for &s1c in &fracs {
                if !gt(s1a, s1c) {
                    assert!(!reversal_condition(s1a.0, s1a.1, s1c.0, s1c.1, 1, 1, 0, 1));
                    continue;
                }
                for &s2a in &fracs {
                    for &s2c in &fracs {
                        let expected = gt(s2a, s2c)
                            && gt(
                                (s1c.0 + s2c.0, s1c.1 + s2c.1),
                                (s1a.0 + s2a.0, s1a.1 + s2a.1),
                            );
                        let got = reversal_condition(
                            s1a.0, s1a.1, s1c.0, s1c.1, s2a.0, s2a.1, s2c.0, s2c.1,
                        );
                        assert_eq!(got, expected);
                        hits += got as usize;
                    }
                }
            }
        }
        assert!(hits > 0);
    }

    #[test]
    fn backdoor_examples() {
        let t = gender_table();
        assert_eq!(backdoor_adjust(&t, "Treatment").unwrap(), ratio(2, 5));
        assert_eq!(backdoor_adjust(&t, "Control").unwrap(), ratio(1, 2));
        assert!(matches!(
            backdoor_adjust(&t, "Placebo"),
            Err(ContingencyError::UnknownArm(_))
        ));
        let single = stratified(&[("z", (3, 4), (1, 5))], ["a", "b"]);
        assert_eq!(backdoor_adjust(&single, "a").unwrap(), ratio(3, 4));
    }
}
