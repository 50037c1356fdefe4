//! Test-only reference computations, independent of the library code paths.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use paradox_core::contingency::{ArmCounts, StratifiedTable, TwoArmTable};

/// Pascal's triangle of exact binomial coefficients up to `n`.
pub struct Binomials {
    rows: Vec<Vec<BigUint>>,
}

impl Binomials {
    pub fn up_to(n: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::from(1u32)]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = Vec::with_capacity(i + 1);
            row.push(BigUint::from(1u32));
            for k in 1..i {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::from(1u32));
            rows.push(row);
        }
        Self { rows }
    }

    pub fn choose(&self, n: u64, k: u64) -> &BigUint {
        &self.rows[n as usize][k as usize]
    }
}

/// Two-sided Fisher p-value by enumerating every table with the observed
/// margins, with exact integer weights `C(r1, k) C(r2, c1 - k)`.
pub fn fisher_brute_force(binom: &Binomials, a: u64, row_a: u64, c: u64, row_b: u64) -> f64 {
    let col = a + c;
    let observed = binom.choose(row_a, a) * binom.choose(row_b, c);
    // weight_k <= observed * (1 + 1e-12), scaled to integers.
    let scale = BigUint::from(1_000_000_000_000u64);
    let bound = &observed * (&scale + 1u32);
    let mut total = BigUint::zero();
    for k in 0..=row_a.min(col) {
        if col - k > row_b {
            continue;
        }
        let w = binom.choose(row_a, k) * binom.choose(row_b, col - k);
        if &w * &scale <= bound {
            total += w;
        }
    }
    let denom = binom.choose(row_a + row_b, col);
    BigRational::new(total.into(), denom.clone().into())
        .to_f64()
        .unwrap()
}

/// Σ (O - E)^2 / E over the four cells of (arm × success/failure).
pub fn hand_chi_squared(t: &TwoArmTable) -> f64 {
    let obs = [
        [t.arm_a().successes() as f64, t.arm_a().failures() as f64],
        [t.arm_b().successes() as f64, t.arm_b().failures() as f64],
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

pub fn table(label_a: &str, a: (u64, u64), label_b: &str, b: (u64, u64)) -> TwoArmTable {
    TwoArmTable::new(
        label_a,
        ArmCounts::new(a.0, a.1).unwrap(),
        label_b,
        ArmCounts::new(b.0, b.1).unwrap(),
    )
    .unwrap()
}

/// Stratum label, then (successes, trials) for each arm.
pub type Row<'a> = (&'a str, (u64, u64), (u64, u64));

pub fn stratified(labels: [&str; 2], rows: &[Row]) -> StratifiedTable {
    StratifiedTable::new(
        rows.iter()
            .map(|(z, a, b)| (z.to_string(), table(labels[0], *a, labels[1], *b)))
            .collect(),
    )
    .unwrap()
}

/// Medical study table: two studies, two treatments.
pub fn two_study_table() -> StratifiedTable {
    stratified(
        ["Treatment 1", "Treatment 2"],
        &[
            ("Study 1", (81, 87), (234, 270)),
            ("Study 2", (192, 263), (55, 80)),
        ],
    )
}

/// Gender-stratified treatment vs control table.
pub fn gender_table() -> StratifiedTable {
    stratified(
        ["Treatment", "Control"],
        &[("Males", (18, 30), (7, 10)), ("Females", (2, 10), (9, 30))],
    )
}
