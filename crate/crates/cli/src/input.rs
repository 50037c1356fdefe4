//! Input files: stratified count CSV and the JSON documents for the other
//! subcommands.

use crate::CliError;
use paradox_core::contingency::{ArmCounts, StratifiedTable, TwoArmTable};
use serde::Deserialize;
use std::path::Path;

pub const CSV_HEADER: [&str; 4] = ["stratum", "arm", "successes", "trials"];

/// Reads `stratum,arm,successes,trials` rows into a stratified table.
/// Strata and arms keep their order of first appearance.
pub fn parse_stratified_csv(path: &Path) -> Result<StratifiedTable, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_stratified_reader(file)
}

pub fn parse_stratified_reader<R: std::io::Read>(reader: R) -> Result<StratifiedTable, CliError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers().map_err(|e| csv_error(1, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut arms: Vec<String> = Vec::new();
    // (stratum, [counts per arm])
    let mut strata: Vec<(String, [Option<ArmCounts>; 2])> = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_count = |field: &str, index: usize| -> Result<u64, CliError> {
            record[index].parse().map_err(|_| CliError::Parse {
                line,
                message: format!("{field} `{}` is not a nonnegative integer", &record[index]),
            })
        };
        let stratum = record[0].to_string();
        let arm = record[1].to_string();
        if stratum.is_empty() || arm.is_empty() {
            return Err(CliError::Parse {
                line,
                message: "stratum and arm labels must be nonempty".into(),
            });
        }
        let counts = ArmCounts::new(parse_count("successes", 2)?, parse_count("trials", 3)?)
            .map_err(|e| CliError::Parse {
                line,
                message: e.to_string(),
            })?;

        let arm_index = match arms.iter().position(|a| *a == arm) {
            Some(i) => i,
            None if arms.len() < 2 => {
                arms.push(arm.clone());
                arms.len() - 1
            }
            None => {
                return Err(CliError::Arity(format!(
                    "line {line}: third arm `{arm}` (already have `{}` and `{}`)",
                    arms[0], arms[1]
                )))
            }
        };
        let slot = match strata.iter().position(|(s, _)| *s == stratum) {
            Some(i) => &mut strata[i].1,
            None => {
                strata.push((stratum.clone(), [None, None]));
                &mut strata.last_mut().unwrap().1
            }
        };
        if slot[arm_index].replace(counts).is_some() {
            return Err(CliError::Parse {
                line,
                message: format!("duplicate row for stratum `{stratum}`, arm `{arm}`"),
            });
        }
    }

    if strata.is_empty() {
        return Err(CliError::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    if arms.len() < 2 {
        return Err(CliError::Arity(format!(
            "need exactly two arms, found {}",
            arms.len()
        )));
    }
    let tables = strata
        .into_iter()
        .map(|(label, slots)| match slots {
            [Some(a), Some(b)] => {
                let table = TwoArmTable::new(arms[0].clone(), a, arms[1].clone(), b)?;
                Ok((label, table))
            }
            _ => {
                let missing = if slots[0].is_none() {
                    &arms[0]
                } else {
                    &arms[1]
                };
                Err(CliError::Arity(format!(
                    "stratum `{label}` lacks arm `{missing}`"
                )))
            }
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(StratifiedTable::new(tables)?)
}

fn csv_error(line: u64, e: csv::Error) -> CliError {
    CliError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Gamble and acceptance rates for `disjunction`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GambleInput {
    pub win: f64,
    pub loss: f64,
    #[serde(default)]
    pub stated_win_chance: Option<f64>,
    pub accept_given_win: f64,
    pub accept_given_loss: f64,
    pub accept_unknown: f64,
}

/// Game description for `stpetersburg`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StPetersburgInput {
    #[serde(default = "default_base")]
    pub base: f64,
    #[serde(default)]
    pub max_rounds: Option<u32>,
    #[serde(default)]
    pub bankroll: Option<f64>,
    #[serde(default)]
    pub wealth: Option<f64>,
}

fn default_base() -> f64 {
    1.0
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
