//! Belief states and staged trees built from two-stage outcome tables.
//!
//! Joint tables and tree probabilities are exact rationals; amplitudes are
//! `f64` since they are square roots.

use crate::rational::{from_f64_decimal, ratio, to_f64, Rational};
use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use thiserror::Error;

/// Absolute tolerance for unit-norm and sum-to-one checks.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("grid shape does not match its labels: {0}")]
    Shape(String),
    #[error("entry {value} at ({row}, {col}) is outside [{min}, {max}]")]
    OutOfRange {
        row: String,
        col: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("every fraction is zero")]
    AllZero,
    #[error("joint probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("squared amplitudes sum to {0}, not 1")]
    NotUnitNorm(f64),
    #[error("stage-1 outcome {0:?} has zero marginal probability")]
    ZeroMarginal(String),
    #[error("label {0:?} not present")]
    LabelMismatch(String),
    #[error("expected {expected} outcomes, got {found}")]
    DimensionError { expected: usize, found: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
}

fn check_distinct(labels: &[String]) -> Result<(), BeliefError> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(BeliefError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn check_shape<T>(rows: &[String], cols: &[String], grid: &[Vec<T>]) -> Result<(), BeliefError> {
    if rows.is_empty() || cols.is_empty() {
        return Err(BeliefError::Shape("no labels".into()));
    }
    if grid.len() != rows.len() || grid.iter().any(|r| r.len() != cols.len()) {
        return Err(BeliefError::Shape(format!(
            "expected {}x{} entries",
            rows.len(),
            cols.len()
        )));
    }
    check_distinct(rows)?;
    check_distinct(cols)
}

/// Per-cell outcome fractions of a two-stage experiment, optionally with the
/// `[successes, trials]` counts they came from.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawGridJson")]
pub struct RawFractionGrid {
    rows: Vec<String>,
    cols: Vec<String>,
    fractions: Vec<Vec<f64>>,
    counts: Option<Vec<Vec<[u64; 2]>>>,
}

#[derive(Deserialize)]
struct RawGridJson {
    rows: Vec<String>,
    cols: Vec<String>,
    fractions: Vec<Vec<f64>>,
    #[serde(default)]
    counts: Option<Vec<Vec<[u64; 2]>>>,
}

impl TryFrom<RawGridJson> for RawFractionGrid {
    type Error = BeliefError;
    fn try_from(raw: RawGridJson) -> Result<Self, Self::Error> {
        RawFractionGrid::new(raw.rows, raw.cols, raw.fractions, raw.counts)
    }
}

impl RawFractionGrid {
    pub fn new(
        rows: Vec<String>,
        cols: Vec<String>,
        fractions: Vec<Vec<f64>>,
        counts: Option<Vec<Vec<[u64; 2]>>>,
    ) -> Result<Self, BeliefError> {
        check_shape(&rows, &cols, &fractions)?;
        for (i, row) in fractions.iter().enumerate() {
            for (j, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(BeliefError::OutOfRange {
                        row: rows[i].clone(),
                        col: cols[j].clone(),
                        value,
                        min: 0.0,
                        max: 1.0,
                    });
                }
            }
        }
        if let Some(counts) = &counts {
            check_shape(&rows, &cols, counts)?;
            for (i, row) in counts.iter().enumerate() {
                for (j, &[s, t]) in row.iter().enumerate() {
                    let consistent =
                        t > 0 && s <= t && (s as f64 / t as f64 - fractions[i][j]).abs() < 0.005;
                    if !consistent {
                        return Err(BeliefError::Shape(format!(
                            "counts {s}/{t} at ({}, {}) do not match fraction {}",
                            rows[i], cols[j], fractions[i][j]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            fractions,
            counts,
        })
    }

    /// Grid without source counts.
    pub fn from_fractions<S: Into<String>>(
        rows: impl IntoIterator<Item = S>,
        cols: impl IntoIterator<Item = S>,
        fractions: Vec<Vec<f64>>,
    ) -> Result<Self, BeliefError> {
        Self::new(
            rows.into_iter().map(Into::into).collect(),
            cols.into_iter().map(Into::into).collect(),
            fractions,
            None,
        )
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn fractions(&self) -> &[Vec<f64>] {
        &self.fractions
    }

    pub fn counts(&self) -> Option<&[Vec<[u64; 2]>]> {
        self.counts.as_deref()
    }

    /// Exact cell values: `s/t` from counts when present, otherwise the
    /// fraction read as the decimal literal it prints as.
    pub fn exact_entries(&self) -> Vec<Vec<Rational>> {
        match &self.counts {
            Some(counts) => counts
                .iter()
                .map(|row| row.iter().map(|&[s, t]| ratio(s, t)).collect())
                .collect(),
            None => self
                .fractions
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&f| from_f64_decimal(f).expect("validated finite"))
                        .collect()
                })
                .collect(),
        }
    }
}

/// Probability distribution over (stage-1, stage-2) outcome pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcomeTable {
    rows: Vec<String>,
    cols: Vec<String>,
    probs: Vec<Vec<Rational>>,
}

impl JointOutcomeTable {
    pub fn new(
        rows: Vec<String>,
        cols: Vec<String>,
        probs: Vec<Vec<Rational>>,
    ) -> Result<Self, BeliefError> {
        check_shape(&rows, &cols, &probs)?;
        for (i, row) in probs.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if p.is_negative() {
                    return Err(BeliefError::OutOfRange {
                        row: rows[i].clone(),
                        col: cols[j].clone(),
                        value: to_f64(p),
                        min: 0.0,
                        max: 1.0,
                    });
                }
            }
        }
        let total: Rational = probs.iter().flatten().sum();
        let total = to_f64(&total);
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(BeliefError::NotNormalized(total));
        }
        Ok(Self { rows, cols, probs })
    }

    /// Table from `f64` probabilities, each read as its decimal literal.
    pub fn from_f64<S: Into<String>>(
        rows: impl IntoIterator<Item = S>,
        cols: impl IntoIterator<Item = S>,
        probs: &[Vec<f64>],
    ) -> Result<Self, BeliefError> {
        let rows: Vec<String> = rows.into_iter().map(Into::into).collect();
        let cols: Vec<String> = cols.into_iter().map(Into::into).collect();
        let exact = probs
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &p)| {
                        from_f64_decimal(p).ok_or_else(|| BeliefError::OutOfRange {
                            row: rows.get(i).cloned().unwrap_or_default(),
                            col: cols.get(j).cloned().unwrap_or_default(),
                            value: p,
                            min: 0.0,
                            max: 1.0,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows, cols, exact)
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn probabilities(&self) -> &[Vec<Rational>] {
        &self.probs
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn row_index(&self, label: &str) -> Result<usize, BeliefError> {
        self.rows
            .iter()
            .position(|r| r == label)
            .ok_or_else(|| BeliefError::LabelMismatch(label.to_string()))
    }

    fn col_index(&self, label: &str) -> Result<usize, BeliefError> {
        self.cols
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| BeliefError::LabelMismatch(label.to_string()))
    }

    pub fn get(&self, row: &str, col: &str) -> Result<&Rational, BeliefError> {
        Ok(&self.probs[self.row_index(row)?][self.col_index(col)?])
    }

    /// Stage-1 marginal of `row`.
    pub fn marginal(&self, row: &str) -> Result<Rational, BeliefError> {
        Ok(self.probs[self.row_index(row)?].iter().sum())
    }

    /// Joint outcome label, the concatenation of the stage labels.
    pub fn outcome_label(&self, i: usize, j: usize) -> String {
        format!("{}{}", self.rows[i], self.cols[j])
    }

    fn require_square(&self) -> Result<(), BeliefError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(BeliefError::LabelMismatch(format!(
                "rows {:?} differ from columns {:?}",
                self.rows, self.cols
            )))
        }
    }
}

/// Divides every fraction by the grand sum of fractions.
pub fn normalize_fractions(raw: &RawFractionGrid) -> Result<JointOutcomeTable, BeliefError> {
    let entries = raw.exact_entries();
    let total: Rational = entries.iter().flatten().sum();
    if total.is_zero() {
        return Err(BeliefError::AllZero);
    }
    let probs = entries
        .into_iter()
        .map(|row| row.into_iter().map(|e| e / &total).collect())
        .collect();
    Ok(JointOutcomeTable {
        rows: raw.rows.clone(),
        cols: raw.cols.clone(),
        probs,
    })
}

/// Unit-norm real amplitude vector over labelled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    labels: Vec<String>,
    amplitudes: Vec<f64>,
}

impl BeliefState {
    pub fn new(labels: Vec<String>, amplitudes: Vec<f64>) -> Result<Self, BeliefError> {
        if labels.len() != amplitudes.len() || labels.is_empty() {
            return Err(BeliefError::DimensionError {
                expected: labels.len(),
                found: amplitudes.len(),
            });
        }
        check_distinct(&labels)?;
        let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(BeliefError::NotUnitNorm(norm));
        }
        Ok(Self { labels, amplitudes })
    }

    /// Basis state concentrated on `labels[index]`.
    pub fn basis(labels: Vec<String>, index: usize) -> Result<Self, BeliefError> {
        let mut amplitudes = vec![0.0; labels.len()];
        *amplitudes
            .get_mut(index)
            .ok_or(BeliefError::DimensionError {
                expected: labels.len(),
                found: index + 1,
            })? = 1.0;
        Self::new(labels, amplitudes)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: &str) -> Result<f64, BeliefError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.amplitudes[i])
            .ok_or_else(|| BeliefError::LabelMismatch(label.to_string()))
    }

    pub fn squared_norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }
}

/// Amplitudes are the nonnegative square roots of the joint probabilities,
/// labelled by stage-1 label followed by stage-2 label.
pub fn state_from_joint(joint: &JointOutcomeTable) -> BeliefState {
    let mut labels = Vec::new();
    let mut amplitudes = Vec::new();
    for (i, row) in joint.probs.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            labels.push(joint.outcome_label(i, j));
            amplitudes.push(to_f64(p).sqrt());
        }
    }
    BeliefState { labels, amplitudes }
}

/// Born-rule probability of `outcome`.
pub fn measure(state: &BeliefState, outcome: &str) -> Result<f64, BeliefError> {
    state.amplitude(outcome).map(|a| a * a)
}

/// Planar rotation of a two-outcome state. Positive `theta` moves weight
/// toward the first listed outcome: `(x, y) -> (x cos θ + y sin θ, -x sin θ + y cos θ)`.
pub fn rotate2(state: &BeliefState, theta: f64) -> Result<BeliefState, BeliefError> {
    let [x, y] = state.amplitudes[..] else {
        return Err(BeliefError::DimensionError {
            expected: 2,
            found: state.amplitudes.len(),
        });
    };
    let (sin, cos) = theta.sin_cos();
    Ok(BeliefState {
        labels: state.labels.clone(),
        amplitudes: vec![x * cos + y * sin, -x * sin + y * cos],
    })
}

/// Stage-1 marginals and stage-2 conditionals of a joint table.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTree {
    rows: Vec<String>,
    cols: Vec<String>,
    marginals: Vec<Rational>,
    conditionals: Vec<Vec<Rational>>,
}

impl QuantumTree {
    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn marginals(&self) -> &[Rational] {
        &self.marginals
    }

    pub fn conditionals(&self) -> &[Vec<Rational>] {
        &self.conditionals
    }

    pub fn marginal(&self, row: &str) -> Result<&Rational, BeliefError> {
        let i = position(&self.rows, row)?;
        Ok(&self.marginals[i])
    }

    /// P(col at stage 2 | row at stage 1).
    pub fn conditional(&self, col: &str, row: &str) -> Result<&Rational, BeliefError> {
        let i = position(&self.rows, row)?;
        let j = position(&self.cols, col)?;
        Ok(&self.conditionals[i][j])
    }
}

fn position(labels: &[String], label: &str) -> Result<usize, BeliefError> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| BeliefError::LabelMismatch(label.to_string()))
}

pub fn build_tree(joint: &JointOutcomeTable) -> Result<QuantumTree, BeliefError> {
    let mut marginals = Vec::with_capacity(joint.rows.len());
    let mut conditionals = Vec::with_capacity(joint.rows.len());
    for (label, row) in joint.rows.iter().zip(&joint.probs) {
        let marginal: Rational = row.iter().sum();
        if marginal.is_zero() {
            return Err(BeliefError::ZeroMarginal(label.clone()));
        }
        conditionals.push(row.iter().map(|p| p / &marginal).collect());
        marginals.push(marginal);
    }
    Ok(QuantumTree {
        rows: joint.rows.clone(),
        cols: joint.cols.clone(),
        marginals,
        conditionals,
    })
}

/// `P(first, second) - P(second, first)`.
pub fn order_effect(
    joint: &JointOutcomeTable,
    first: &str,
    second: &str,
) -> Result<Rational, BeliefError> {
    joint.require_square()?;
    Ok(joint.get(first, second)? - joint.get(second, first)?)
}

/// `P(label, label) - P(label at stage 1)^2`; zero under independent,
/// identically distributed stages.
pub fn independence_defect(
    joint: &JointOutcomeTable,
    label: &str,
) -> Result<Rational, BeliefError> {
    joint.require_square()?;
    let marginal = joint.marginal(label)?;
    Ok(joint.get(label, label)? - &marginal * &marginal)
}

/// Response rates for two survey items under both question orders.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SurveyOrderData {
    pub items: [String; 2],
    /// Rate for each item when it is asked first.
    pub asked_first: [f64; 2],
    /// Rate for each item when it is asked second.
    pub asked_second: [f64; 2],
}

impl SurveyOrderData {
    pub fn new(
        items: [String; 2],
        asked_first: [f64; 2],
        asked_second: [f64; 2],
    ) -> Result<Self, BeliefError> {
        for (i, &r) in asked_first.iter().chain(&asked_second).enumerate() {
            if !(0.0..=1.0).contains(&r) {
                return Err(BeliefError::OutOfRange {
                    row: items[i % 2].clone(),
                    col: if i < 2 { "first" } else { "second" }.into(),
                    value: r,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self {
            items,
            asked_first,
            asked_second,
        })
    }
}

/// Per item, the rate when asked second minus the rate when asked first.
pub fn survey_order_shift(data: &SurveyOrderData) -> Vec<(String, f64)> {
    (0..2)
        .map(|i| {
            (
                data.items[i].clone(),
                data.asked_second[i] - data.asked_first[i],
            )
        })
        .collect()
}

/// Whether every conditional row of the tree sums to one exactly.
pub fn tree_is_stochastic(tree: &QuantumTree) -> bool {
    let one = Rational::one();
    tree.marginals.iter().sum::<Rational>() == one
        && tree
            .conditionals
            .iter()
            .all(|row| row.iter().sum::<Rational>() == one)
}
