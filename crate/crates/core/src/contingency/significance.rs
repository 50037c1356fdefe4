//! Pearson chi-squared and Fisher exact tests on the 2×2 table
//! (arm × success/failure).

use super::{ContingencyError, TwoArmTable};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Relative slack when deciding that a table is at most as probable as the
/// observed one.
const POINT_PROB_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    PearsonChiSquared,
    PearsonChiSquaredYates,
    FisherExactTwoSided,
    FisherExactLess,
    FisherExactGreater,
}

/// Alternative hypothesis for Fisher's test, phrased in terms of the first
/// arm's success count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    Less,
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Chi-squared statistic; `None` for the exact test.
    pub statistic: Option<f64>,
    pub p_value: f64,
    pub method: TestMethod,
}

struct Cells {
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl Cells {
    fn of(t: &TwoArmTable) -> Result<Self, ContingencyError> {
        let cells = Cells {
            a: t.arm_a().successes(),
            b: t.arm_a().failures(),
            c: t.arm_b().successes(),
            d: t.arm_b().failures(),
        };
        if cells.a + cells.c == 0 {
            return Err(ContingencyError::DegenerateTable("success"));
        }
        if cells.b + cells.d == 0 {
            return Err(ContingencyError::DegenerateTable("failure"));
        }
        Ok(cells)
    }
}

/// Pearson chi-squared test without continuity correction.
pub fn chi_squared(t: &TwoArmTable) -> Result<TestResult, ContingencyError> {
    chi_squared_with(t, false)
}

/// Pearson chi-squared test, optionally with Yates' continuity correction.
///
/// Uses the closed form `N (ad - bc)^2 / (r1 r2 c1 c2)`. The cross term is
/// computed in integers so the statistic is exactly zero iff the two
/// proportions are equal.
pub fn chi_squared_with(t: &TwoArmTable, yates: bool) -> Result<TestResult, ContingencyError> {
    let Cells { a, b, c, d } = Cells::of(t)?;
    let n = (a + b + c + d) as f64;
    let cross = (a as i128 * d as i128 - b as i128 * c as i128).unsigned_abs() as f64;
    let margins = (a + b) as f64 * (c + d) as f64 * (a + c) as f64 * (b + d) as f64;
    let cross = if yates {
        (cross - n / 2.0).max(0.0)
    } else {
        cross
    };
    let statistic = n * cross * cross / margins;
    Ok(TestResult {
        statistic: Some(statistic),
        p_value: chi_squared_sf_1df(statistic),
        method: if yates {
            TestMethod::PearsonChiSquaredYates
        } else {
            TestMethod::PearsonChiSquared
        },
    })
}

/// Survival function of the chi-squared distribution with one degree of
/// freedom: `P(X > x) = erfc(sqrt(x / 2))`.
pub(crate) fn chi_squared_sf_1df(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    erfc((x / 2.0).sqrt()).clamp(0.0, 1.0)
}

/// Two-sided Fisher exact test.
pub fn fisher_exact(t: &TwoArmTable) -> Result<TestResult, ContingencyError> {
    fisher_exact_with(t, Alternative::TwoSided)
}

/// Fisher exact test conditioned on both margins.
///
/// The two-sided p-value sums the hypergeometric probabilities of every
/// table no more probable than the observed one.
pub fn fisher_exact_with(
    t: &TwoArmTable,
    alt: Alternative,
) -> Result<TestResult, ContingencyError> {
    let Cells { a, b, c, d } = Cells::of(t)?;
    let row_a = a + b;
    let row_b = c + d;
    let col_success = a + c;
    let n = row_a + row_b;
    let ln_fact = ln_factorials(n as usize);
    let ln_choose =
        |n: u64, k: u64| ln_fact[n as usize] - ln_fact[k as usize] - ln_fact[(n - k) as usize];
    let ln_denom = ln_choose(n, col_success);
    let ln_point = |k: u64| ln_choose(row_a, k) + ln_choose(row_b, col_success - k) - ln_denom;

    let lo = col_success.saturating_sub(row_b);
    let hi = row_a.min(col_success);
    let ln_observed = ln_point(a);
    let cutoff = ln_observed + POINT_PROB_REL_TOL.ln_1p();

    let p: f64 = match alt {
        Alternative::TwoSided => (lo..=hi)
            .map(ln_point)
            .filter(|&lp| lp <= cutoff)
            .map(f64::exp)
            .sum(),
        Alternative::Less => (lo..=a).map(|k| ln_point(k).exp()).sum(),
        Alternative::Greater => (a..=hi).map(|k| ln_point(k).exp()).sum(),
    };
    let method = match alt {
        Alternative::TwoSided => TestMethod::FisherExactTwoSided,
        Alternative::Less => TestMethod::FisherExactLess,
        Alternative::Greater => TestMethod::FisherExactGreater,
    };
    Ok(TestResult {
        statistic: None,
        p_value: p.clamp(0.0, 1.0),
        method,
    })
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    let mut acc = 0.0f64;
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contingency::ArmCounts;

    fn two(a: (u64, u64), b: (u64, u64)) -> TwoArmTable {
        TwoArmTable::new(
            "a",
            ArmCounts::new(a.0, a.1).unwrap(),
            "b",
            ArmCounts::new(b.0, b.1).unwrap(),
        )
        .unwrap()
    }

    /// Σ (O - E)^2 / E over the four cells.
    fn hand_chi_squared(a: (u64, u64), b: (u64, u64)) -> f64 {
        let obs = [
            [a.0 as f64, (a.1 - a.0) as f64],
            [b.0 as f64, (b.1 - b.0) as f64],
        ];
        let rows = [obs[0][0] + obs[0][1], obs[1][0] + obs[1][1]];
        let cols = [obs[0][0] + obs[1][0], obs[0][1] + obs[1][1]];
        let n = rows[0] + rows[1];
        let mut stat = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let e = rows[i] * cols[j] / n;
                stat += (obs[i][j] - e).powi(2) / e;
            }
        }
        stat
    }

    /// P(X > x) for one degree of freedom as 2 ∫_{√x}^{∞} φ(z) dz, composite
    /// Simpson rule.
    fn quadrature_sf(x: f64) -> f64 {
        let lo = x.sqrt();
        let hi = lo + 40.0;
        let steps = 400_000;
        let h = (hi - lo) / steps as f64;
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut sum = phi(lo) + phi(hi);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * phi(lo + i as f64 * h);
        }
        2.0 * sum * h / 3.0
    }

    #[test]
    fn chi_squared_equal_rates() {
        let r = chi_squared(&two((10, 20), (10, 20))).unwrap();
        assert_eq!(r.statistic, Some(0.0));
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.method, TestMethod::PearsonChiSquared);
    }

    #[test]
    fn chi_squared_matches_hand_formula() {
        for (a, b) in [
            ((273, 350), (289, 350)),
            ((20, 40), (16, 40)),
            ((81, 87), (234, 270)),
            ((36, 45), (3, 15)),
        ] {
            let r = chi_squared(&two(a, b)).unwrap();
            let expect = hand_chi_squared(a, b);
            assert!((r.statistic.unwrap() - expect).abs() < 1e-10 * expect.max(1.0));
            assert!((r.p_value - quadrature_sf(expect)).abs() < 1e-10);
        }
    }

    #[test]
    fn survival_function_against_quadrature() {
        for x in [0.01, 0.5, 1.0, 2.5, 3.841458820694124, 7.0, 15.0, 30.0] {
            assert!(
                (chi_squared_sf_1df(x) - quadrature_sf(x)).abs() < 1e-10,
                "x = {x}"
            );
        }
    }

    #[test]
    fn yates_correction() {
        let r = chi_squared_with(&two((20, 40), (16, 40)), true).unwrap();
        // N(|ad-bc| - N/2)^2 / (r1 r2 c1 c2) with ad-bc = 160, N = 80.
        let expect = 80.0 * 120.0f64.powi(2) / (40.0 * 40.0 * 36.0 * 44.0);
        assert!((r.statistic.unwrap() - expect).abs() < 1e-12);
        assert_eq!(r.method, TestMethod::PearsonChiSquaredYates);
        let r = chi_squared_with(&two((1, 2), (1, 2)), true).unwrap();
        assert_eq!(r.statistic, Some(0.0));
    }

    #[test]
    fn degenerate_margins() {
        assert_eq!(
            chi_squared(&two((0, 5), (0, 3))),
            Err(ContingencyError::DegenerateTable("success"))
        );
        assert_eq!(
            fisher_exact(&two((5, 5), (3, 3))),
            Err(ContingencyError::DegenerateTable("failure"))
        );
    }

    #[test]
    fn fisher_trivial_table() {
        let r = fisher_exact(&two((1, 1), (0, 1))).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.statistic, None);
    }

    #[test]
    fn fisher_one_sided_sum_exceeds_one_by_point_mass() {
        let t = two((18, 30), (7, 10));
        let less = fisher_exact_with(&t, Alternative::Less).unwrap().p_value;
        let greater = fisher_exact_with(&t, Alternative::Greater).unwrap().p_value;
        assert!(less + greater > 1.0);
        assert!(less <= 1.0 && greater <= 1.0);
        // Observed success rate in the first arm is lower, so "less" is the
        // more significant side.
        assert!(less < greater);
    }
}
