//! Report construction and rendering.
//!
//! Every real number is rounded to the configured significant digits when
//! the report is built, so the text and JSON renderings print the same
//! values and a parsed JSON report re-renders byte-identically.

use crate::input::{GambleInput, StPetersburgInput};
use crate::{CliError, Format};
use paradox_core::contingency::{
    backdoor_adjust, chi_squared_with, detect_reversal, fisher_exact_with, pool, Alternative,
    RateComparison, StratifiedTable, TestResult, TwoArmTable,
};
use paradox_core::prospect::{
    acceptance_probability, disjunction_report, expected_utility, matching_rotation_angle,
    trajectory, AcceptanceData, EffectOperator, Gamble, ProspectError, ProspectState,
    ROTATION_CONVENTION,
};
use paradox_core::quantum_belief::{
    build_tree, independence_defect, normalize_fractions, order_effect, state_from_joint,
    RawFractionGrid,
};
use paradox_core::rational::{render_exact, to_f64, Rational};
use paradox_core::stpetersburg::{
    bankroll_capped_ev, expected_log_gain, log_utility_fair_price, truncated_ev, NoHeadsPayout,
    StPetersburgSpec,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: &'static str,
    pub body: Value,
    infeasible: bool,
}

impl Report {
    fn new(kind: &'static str, body: impl Serialize) -> Self {
        Self {
            kind,
            body: serde_json::to_value(body).expect("report serializes"),
            infeasible: false,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.infeasible
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => render_json(&self.body),
            Format::Text => {
                let mut out = format!("{} report\n", self.kind);
                render_text(&self.body, 0, &mut out);
                out.trim_end().to_string()
            }
        }
    }
}

pub fn render_json(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn render_text(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                if is_scalar_like(v) {
                    let _ = writeln!(out, "{pad}{key}: {}", scalar_text(v));
                } else {
                    let _ = writeln!(out, "{pad}{key}:");
                    render_text(v, indent + 1, out);
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if is_scalar_like(item) {
                    let _ = writeln!(out, "{pad}- {}", scalar_text(item));
                } else {
                    let _ = writeln!(out, "{pad}-");
                    render_text(item, indent + 1, out);
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar_text(other));
        }
    }
}

fn is_plain(v: &Value) -> bool {
    !v.is_object() && !v.is_array()
}

/// Scalars, arrays of scalars and objects of scalars print on one line.
fn is_scalar_like(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(is_plain),
        Value::Object(map) => map.values().all(is_plain),
        _ => true,
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!(
            "[{}]",
            items.iter().map(scalar_text).collect::<Vec<_>>().join(", ")
        ),
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}={}", scalar_text(v)))
            .collect::<Vec<_>>()
            .join(" "),
        other => other.to_string(),
    }
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: u8) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", digits.saturating_sub(1) as usize, x)
        .parse()
        .expect("formatted float parses")
}

#[derive(Serialize)]
struct ExactValue {
    exact: String,
    value: f64,
}

fn exact(r: &Rational, p: u8) -> ExactValue {
    ExactValue {
        exact: render_exact(r),
        value: round_sig(to_f64(r), p),
    }
}

// reversal

#[derive(Serialize)]
struct ArmRate {
    arm: String,
    successes: u64,
    trials: u64,
    rate: ExactValue,
}

#[derive(Serialize)]
struct Comparison {
    stratum: String,
    arms: Vec<ArmRate>,
    direction: i8,
    favors: Option<String>,
    chi_squared: Value,
    fisher_exact: Value,
}

fn test_json(result: Result<TestResult, impl std::fmt::Display>, p: u8) -> Value {
    match result {
        Ok(r) => json!({
            "method": r.method,
            "statistic": r.statistic.map(|s| round_sig(s, p)),
            "p_value": round_sig(r.p_value, p),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn comparison(
    c: &RateComparison,
    labels: &[String; 2],
    table: &TwoArmTable,
    yates: bool,
    alt: Alternative,
    p: u8,
) -> Comparison {
    let arms = (0..2)
        .map(|i| ArmRate {
            arm: labels[i].clone(),
            successes: c.counts[i].successes(),
            trials: c.counts[i].trials(),
            rate: exact(&c.rates[i], p),
        })
        .collect();
    let favors = match c.direction.sign() {
        1 => Some(labels[0].clone()),
        -1 => Some(labels[1].clone()),
        _ => None,
    };
    Comparison {
        stratum: c.label.clone(),
        arms,
        direction: c.direction.sign(),
        favors,
        chi_squared: test_json(chi_squared_with(table, yates), p),
        fisher_exact: test_json(fisher_exact_with(table, alt), p),
    }
}

pub fn reversal(t: &StratifiedTable, yates: bool, one_sided: bool, p: u8) -> Report {
    let alt = if one_sided {
        Alternative::Greater
    } else {
        Alternative::TwoSided
    };
    let r = detect_reversal(t);
    let labels = t.arm_labels();
    let strata: Vec<Comparison> = r
        .per_stratum
        .iter()
        .zip(t.strata())
        .map(|(c, (_, table))| comparison(c, labels, table, yates, alt, p))
        .collect();
    let pooled = comparison(&r.pooled, labels, &pool(t), yates, alt, p);
    let adjusted: Vec<Value> = labels
        .iter()
        .map(|arm| {
            let value = backdoor_adjust(t, arm).expect("arm label from table");
            json!({ "arm": arm, "adjusted_rate": exact(&value, p) })
        })
        .collect();
    Report::new(
        "reversal",
        json!({
            "arms": labels,
            "strata": strata,
            "pooled": pooled,
            "reversal": r.reversal,
            "note": r.note,
            "backdoor_adjusted": adjusted,
        }),
    )
}

// belief

pub fn belief(grid: &RawFractionGrid, p: u8) -> Result<Report, CliError> {
    let joint = normalize_fractions(grid)?;
    let state = state_from_joint(&joint);
    let joint_json: Vec<Vec<ExactValue>> = joint
        .probabilities()
        .iter()
        .map(|row| row.iter().map(|x| exact(x, p)).collect())
        .collect();
    let tree = match build_tree(&joint) {
        Ok(tree) => json!({
            "marginals": tree.rows().iter().zip(tree.marginals())
                .map(|(row, m)| json!({ "row": row, "probability": exact(m, p) }))
                .collect::<Vec<_>>(),
            "conditionals": tree.rows().iter().zip(tree.conditionals())
                .flat_map(|(row, cond)| tree.cols().iter().zip(cond).map(move |(col, c)| {
                    json!({ "row": row, "col": col, "probability": exact(c, p) })
                }))
                .collect::<Vec<_>>(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let (order_effects, defects) = if joint.is_square() {
        let labels = joint.rows();
        let mut order = Vec::new();
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                let effect = order_effect(&joint, a, b)?;
                order.push(json!({ "first": a, "second": b, "difference": exact(&effect, p) }));
            }
        }
        let defects = labels
            .iter()
            .map(|l| {
                independence_defect(&joint, l)
                    .map(|d| json!({ "label": l, "defect": exact(&d, p) }))
            })
            .collect::<Result<Vec<_>, _>>()?;
        (Value::from(order), Value::from(defects))
    } else {
        (Value::Null, Value::Null)
    };
    Ok(Report::new(
        "belief",
        json!({
            "rows": joint.rows(),
            "cols": joint.cols(),
            "joint": joint_json,
            "state": {
                "labels": state.labels(),
                "amplitudes": state.amplitudes().iter().map(|a| round_sig(*a, p)).collect::<Vec<_>>(),
                "squared_norm": round_sig(state.squared_norm(), p),
            },
            "tree": tree,
            "order_effects": order_effects,
            "independence_defects": defects,
        }),
    ))
}

// disjunction

fn state_json(s: &ProspectState, g: &Gamble, p: u8) -> Value {
    json!({
        "amplitude_loss": round_sig(s.amplitude_loss(), p),
        "amplitude_win": round_sig(s.amplitude_win(), p),
        "loss_probability": round_sig(s.loss_probability(), p),
        "win_probability": round_sig(s.win_probability(), p),
        "expected_utility": round_sig(expected_utility(s, g), p),
    })
}

fn effect_json(e: &EffectOperator, p: u8) -> Value {
    let (lo, hi) = e.eigenvalues();
    json!({
        "diag_loss": round_sig(e.diag_loss(), p),
        "diag_win": round_sig(e.diag_win(), p),
        "off_diag": round_sig(e.off_diag(), p),
        "eigenvalues": [round_sig(lo, p), round_sig(hi, p)],
    })
}

pub fn disjunction(
    input: &GambleInput,
    theta: Option<f64>,
    rounds: Option<u32>,
    p: u8,
) -> Result<Report, CliError> {
    let g = Gamble::new(input.win, input.loss, input.stated_win_chance)?;
    let d = AcceptanceData::new(
        input.accept_given_win,
        input.accept_given_loss,
        input.accept_unknown,
    )?;
    if let Some(t) = theta {
        if t.is_nan() || t < 0.0 {
            return Err(CliError::InvalidArgument(format!(
                "--theta must be nonnegative, got {t}"
            )));
        }
    }
    let report = disjunction_report(&g, &d);
    let calibration = match &report.calibration {
        Ok(e) => json!({ "feasible": true, "effect": effect_json(e, p) }),
        Err(
            e @ ProspectError::InfeasibleCalibration {
                off_diag,
                min_eigenvalue,
                max_eigenvalue,
            },
        ) => json!({
            "feasible": false,
            "error": e.to_string(),
            "off_diag": round_sig(*off_diag, p),
            "eigenvalues": [round_sig(*min_eigenvalue, p), round_sig(*max_eigenvalue, p)],
        }),
        Err(e) => json!({ "feasible": false, "error": e.to_string() }),
    };
    let diagonal = EffectOperator::diagonal(d.accept_given_loss(), d.accept_given_win())?;

    let (angle, source) = match theta {
        Some(t) => (Some(t), "argument"),
        None => (
            matching_rotation_angle(&g, &d),
            "matched_interference_free_acceptance",
        ),
    };
    let trajectory_json = match angle {
        Some(angle) => {
            let rounds = rounds.unwrap_or(1);
            let steps: Vec<Value> = trajectory(&report.reference, angle, rounds)?
                .iter()
                .enumerate()
                .map(|(round, s)| {
                    let mut step = state_json(s, &g, p);
                    step["round"] = json!(round);
                    step["acceptance_interference_free"] =
                        json!(round_sig(acceptance_probability(s, &diagonal), p));
                    if let Ok(e) = &report.calibration {
                        step["acceptance_calibrated"] =
                            json!(round_sig(acceptance_probability(s, e), p));
                    }
                    step
                })
                .collect();
            json!({
                "theta_per_round": round_sig(angle, p),
                "theta_source": source,
                "rounds": rounds,
                "steps": steps,
            })
        }
        None => Value::Null,
    };

    let mut out = Report::new(
        "disjunction",
        json!({
            "gamble": {
                "win": input.win,
                "loss": input.loss,
                "stated_win_chance": input.stated_win_chance,
            },
            "acceptance": {
                "given_win": d.accept_given_win(),
                "given_loss": d.accept_given_loss(),
                "unknown": d.accept_unknown(),
            },
            "rotation_convention": ROTATION_CONVENTION,
            "reference": state_json(&report.reference, &g, p),
            "classical_bound": [report.classical_bound.0, report.classical_bound.1],
            "interference_free_acceptance": round_sig(report.interference_free_acceptance, p),
            "effect_present": report.effect_present,
            "calibration": calibration,
            "trajectory": trajectory_json,
        }),
    );
    out.infeasible = report.calibration.is_err();
    Ok(out)
}

// stpetersburg

pub fn stpetersburg(input: &StPetersburgInput, pay_final: bool, p: u8) -> Result<Report, CliError> {
    let no_heads = if pay_final {
        NoHeadsPayout::FinalAmount
    } else {
        NoHeadsPayout::Zero
    };
    let full = StPetersburgSpec::new(input.base, input.max_rounds, input.bankroll)?
        .with_no_heads_payout(no_heads);
    let truncated = match input.max_rounds {
        Some(_) => Some(truncated_ev(
            &StPetersburgSpec::new(input.base, input.max_rounds, None)?
                .with_no_heads_payout(no_heads),
        )?),
        None => None,
    };
    let capped = match input.bankroll {
        Some(_) => Some(bankroll_capped_ev(&StPetersburgSpec::new(
            input.base,
            None,
            input.bankroll,
        )?)?),
        None => None,
    };
    let fair = match input.wealth {
        Some(w) => {
            let price = log_utility_fair_price(w, &full)?;
            json!({
                "wealth": w,
                "price": round_sig(price, p),
                "residual": round_sig(expected_log_gain(w, price, &full), p),
            })
        }
        None => Value::Null,
    };
    Ok(Report::new(
        "stpetersburg",
        json!({
            "base": input.base,
            "max_rounds": input.max_rounds,
            "bankroll": input.bankroll,
            "no_heads_payout": no_heads,
            "truncated_ev": truncated.map(|v| round_sig(v, p)),
            "bankroll_capped_ev": capped.map(|v| round_sig(v, p)),
            "log_utility_fair_price": fair,
        }),
    ))
}
