//! St. Petersburg gamble valuations.
//!
//! A coin is flipped until heads; heads on flip `k` pays `base * 2^(k-1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Terms of the expected-log series below this magnitude are dropped.
pub const SERIES_TERM_FLOOR: f64 = 1e-15;

/// Absolute tolerance on the bisected fair price.
pub const PRICE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StPetersburgError {
    #[error("base payout must be positive, got {0}")]
    InvalidBase(f64),
    #[error("max_rounds must be at least 1")]
    ZeroRounds,
    #[error("bankroll {bankroll} must be at least the base payout {base}")]
    InvalidBankroll { bankroll: f64, base: f64 },
    #[error("wealth must be positive, got {0}")]
    InvalidWealth(f64),
    #[error("{0} is required for this valuation")]
    Missing(&'static str),
    #[error("expected log gain is not positive at zero price")]
    NoRoot,
}

/// What the house pays if a truncated game ends without heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoHeadsPayout {
    #[default]
    Zero,
    /// The largest payout of the truncated game, `base * 2^(n-1)`, capped by
    /// the bankroll when one is set.
    FinalAmount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StPetersburgSpec {
    base: f64,
    max_rounds: Option<u32>,
    bankroll: Option<f64>,
    no_heads: NoHeadsPayout,
}

impl StPetersburgSpec {
    /// `max_rounds = None` is the unbounded game.
    pub fn new(
        base: f64,
        max_rounds: Option<u32>,
        bankroll: Option<f64>,
    ) -> Result<Self, StPetersburgError> {
        if !(base.is_finite() && base > 0.0) {
            return Err(StPetersburgError::InvalidBase(base));
        }
        if max_rounds == Some(0) {
            return Err(StPetersburgError::ZeroRounds);
        }
        if let Some(b) = bankroll {
            if !(b.is_finite() && b >= base) {
                return Err(StPetersburgError::InvalidBankroll { bankroll: b, base });
            }
        }
        Ok(Self {
            base,
            max_rounds,
            bankroll,
            no_heads: NoHeadsPayout::Zero,
        })
    }

    pub fn with_no_heads_payout(mut self, no_heads: NoHeadsPayout) -> Self {
        self.no_heads = no_heads;
        self
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn max_rounds(&self) -> Option<u32> {
        self.max_rounds
    }

    pub fn bankroll(&self) -> Option<f64> {
        self.bankroll
    }

    pub fn no_heads(&self) -> NoHeadsPayout {
        self.no_heads
    }

    /// Payout for heads on flip `k` (1-based), after the bankroll cap.
    pub fn payout(&self, k: u32) -> f64 {
        let raw = self.base * 2f64.powi(k as i32 - 1);
        match self.bankroll {
            Some(b) => raw.min(b),
            None => raw,
        }
    }

    fn no_heads_payout(&self, n: u32) -> f64 {
        match self.no_heads {
            NoHeadsPayout::Zero => 0.0,
            NoHeadsPayout::FinalAmount => self.payout(n),
        }
    }
}

/// Expected payout of the game stopped after `max_rounds` flips, ignoring
/// any bankroll: each flip contributes `base / 2`.
pub fn truncated_ev(spec: &StPetersburgSpec) -> Result<f64, StPetersburgError> {
    let n = spec
        .max_rounds
        .ok_or(StPetersburgError::Missing("max_rounds"))?;
    let uncapped = StPetersburgSpec {
        bankroll: None,
        ..*spec
    };
    let tail = 0.5f64.powi(n as i32) * uncapped.no_heads_payout(n);
    Ok(n as f64 * spec.base / 2.0 + tail)
}

/// Expected payout when the house can pay at most `bankroll`.
///
/// Flips before the cap binds each add `base / 2`; from the first capped
/// flip `k` onward the remaining mass `2^-(k-1)` pays the bankroll.
pub fn bankroll_capped_ev(spec: &StPetersburgSpec) -> Result<f64, StPetersburgError> {
    let bankroll = spec
        .bankroll
        .ok_or(StPetersburgError::Missing("bankroll"))?;
    let limit = spec.max_rounds.unwrap_or(u32::MAX);
    let mut ev = 0.0;
    let mut k = 1u32;
    while k <= limit && spec.base * 2f64.powi(k as i32 - 1) < bankroll {
        ev += spec.base / 2.0;
        k += 1;
    }
    let remaining = 0.5f64.powi(k as i32 - 1);
    match spec.max_rounds {
        None => ev += bankroll * remaining,
        Some(n) => {
            if k <= n {
                ev += bankroll * (remaining - 0.5f64.powi(n as i32));
            }
            ev += 0.5f64.powi(n as i32) * spec.no_heads_payout(n);
        }
    }
    Ok(ev)
}

/// Outcome distribution as `(probability, payout)` pairs; the unbounded
/// game is cut where `keep(k, probability, payout)` returns false.
fn for_each_outcome(spec: &StPetersburgSpec, mut visit: impl FnMut(u32, f64, f64) -> bool) {
    let mut k = 1u32;
    loop {
        if let Some(n) = spec.max_rounds {
            if k > n {
                visit(k, 0.5f64.powi(n as i32), spec.no_heads_payout(n));
                return;
            }
        }
        if !visit(k, 0.5f64.powi(k as i32), spec.payout(k)) {
            return;
        }
        k += 1;
    }
}

/// `Σ_k 2^-k [ln(wealth - price + payout_k) - ln(wealth)]`.
pub fn expected_log_gain(wealth: f64, price: f64, spec: &StPetersburgSpec) -> f64 {
    let ln_w = wealth.ln();
    let mut total = 0.0;
    for_each_outcome(spec, |k, prob, payout| {
        let ln_after = (wealth - price + payout).ln();
        total += prob * (ln_after - ln_w);
        // Magnitude bound that cannot vanish through cancellation.
        k < 2 || prob * (ln_after.abs() + ln_w.abs()) >= SERIES_TERM_FLOOR
    });
    total
}

/// Entry price at which a log-utility player with `wealth` is indifferent,
/// found by bisection.
///
/// The search runs over `(0, wealth + smallest payout)`, the prices for
/// which every outcome leaves positive wealth.
pub fn log_utility_fair_price(
    wealth: f64,
    spec: &StPetersburgSpec,
) -> Result<f64, StPetersburgError> {
    if !(wealth.is_finite() && wealth > 0.0) {
        return Err(StPetersburgError::InvalidWealth(wealth));
    }
    let mut min_payout = f64::INFINITY;
    for_each_outcome(spec, |k, _, payout| {
        min_payout = min_payout.min(payout);
        k < 2
    });
    if let Some(n) = spec.max_rounds {
        min_payout = min_payout.min(spec.no_heads_payout(n));
    }
    let gain = |c: f64| expected_log_gain(wealth, c, spec);
    if gain(0.0).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(StPetersburgError::NoRoot);
    }
    let (mut lo, mut hi) = (0.0, wealth + min_payout);
    while hi - lo > PRICE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gain(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: Option<u32>, bankroll: Option<f64>) -> StPetersburgSpec {
        StPetersburgSpec::new(1.0, n, bankroll).unwrap()
    }

    /// Direct summation of probability × payout over flips 1..=rounds.
    fn brute_ev(spec: &StPetersburgSpec, rounds: u32) -> f64 {
        (1..=rounds)
            .map(|k| 0.5f64.powi(k as i32) * spec.payout(k))
            .sum()
    }

    #[test]
    fn validation() {
        assert!(StPetersburgSpec::new(0.0, None, None).is_err());
        assert_eq!(
            StPetersburgSpec::new(1.0, Some(0), None),
            Err(StPetersburgError::ZeroRounds)
        );
        assert!(StPetersburgSpec::new(2.0, None, Some(1.0)).is_err());
        assert_eq!(
            truncated_ev(&unit(None, None)),
            Err(StPetersburgError::Missing("max_rounds"))
        );
        assert_eq!(
            bankroll_capped_ev(&unit(None, None)),
            Err(StPetersburgError::Missing("bankroll"))
        );
        assert!(log_utility_fair_price(0.0, &unit(None, None)).is_err());
    }

    #[test]
    fn truncated_values() {
        assert_eq!(truncated_ev(&unit(Some(1), None)).unwrap(), 0.5);
        assert_eq!(
            truncated_ev(&unit(Some(10), None)).unwrap(),
            brute_ev(&unit(None, None), 10)
        );
        assert_eq!(truncated_ev(&unit(Some(10), None)).unwrap(), 5.0);
        for n in 1..60 {
            let a = truncated_ev(&unit(Some(n), None)).unwrap();
            let b = truncated_ev(&unit(Some(n + 1), None)).unwrap();
            assert_eq!(b - a, 0.5);
        }
        let final_variant = unit(Some(3), None).with_no_heads_payout(NoHeadsPayout::FinalAmount);
        assert_eq!(truncated_ev(&final_variant).unwrap(), 1.5 + 0.125 * 4.0);
    }

    #[test]
    fn capped_values() {
        assert_eq!(bankroll_capped_ev(&unit(None, Some(1.0))).unwrap(), 1.0);
        let spec = unit(None, Some(2f64.powi(20)));
        let ev = bankroll_capped_ev(&spec).unwrap();
        assert!((ev - brute_ev(&spec, 1_000_000)).abs() < 1e-9);
        assert!((ev - 11.0).abs() < 1e-12);

        let spec = unit(None, Some(1000.0));
        assert!((bankroll_capped_ev(&spec).unwrap() - brute_ev(&spec, 2000)).abs() < 1e-12);

        let mut previous = 0.0;
        for b in [1.0, 1.5, 2.0, 3.0, 7.0, 100.0, 1e6, 1e12] {
            let ev = bankroll_capped_ev(&unit(None, Some(b))).unwrap();
            assert!(ev >= previous);
            previous = ev;
        }
    }

    #[test]
    fn capped_and_truncated() {
        let spec = unit(Some(10), Some(64.0));
        let ev = bankroll_capped_ev(&spec).unwrap();
        assert!((ev - brute_ev(&spec, 10)).abs() < 1e-15);
        assert!(ev <= truncated_ev(&spec).unwrap());
        let spec = unit(Some(4), Some(1e6));
        assert_eq!(bankroll_capped_ev(&spec).unwrap(), 2.0);
    }

    #[test]
    fn fair_price_residual() {
        let spec = unit(None, None);
        assert!(expected_log_gain(1000.0, 0.0, &spec) > 0.0);
        let price = log_utility_fair_price(1000.0, &spec).unwrap();
        // Independent summation over a fixed 200 flips.
        let direct: f64 = (1..=200)
            .map(|k| 0.5f64.powi(k) * ((1000.0 - price + 2f64.powi(k - 1)).ln() - 1000f64.ln()))
            .sum();
        assert!(direct.abs() < 1e-8);
        assert!(price > 5.0 && price < 15.0, "price {price}");
    }

    #[test]
    fn fair_price_monotone_in_wealth() {
        let spec = unit(None, None);
        let mut previous = 0.0;
        for w in [0.5, 1.0, 2.0, 10.0, 100.0, 1e3, 1e4, 1e6] {
            let price = log_utility_fair_price(w, &spec).unwrap();
            assert!(price >= previous, "w = {w}");
            assert!(expected_log_gain(w, price, &spec).abs() < 1e-8);
            previous = price;
        }
    }

    #[test]
    fn fair_price_with_zero_tail_stays_below_wealth() {
        let spec = unit(Some(5), None);
        let price = log_utility_fair_price(3.0, &spec).unwrap();
        assert!(price < 3.0);
        assert!(expected_log_gain(3.0, price, &spec).abs() < 1e-8);
    }
}
