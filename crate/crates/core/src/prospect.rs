//! Two-outcome prospect state for the disjunction effect.
//!
//! Basis order is `|loss⟩, |win⟩`. The state starts at the reference
//! superposition whose expected payoff is zero; unobserved play rotates it
//! toward `|loss⟩`, and learning an outcome resets it to the reference.
//! Acceptance of a further play is read off a 2×2 effect operator whose
//! diagonal holds the known-outcome acceptance rates and whose off-diagonal
//! entry carries the interference term.

use crate::quantum_belief::{rotate2, BeliefState};
use serde::Serialize;
use thiserror::Error;

pub const NORM_TOLERANCE: f64 = 1e-12;

/// Slack on the `0 ≤ E ≤ I` check.
pub const EFFECT_TOLERANCE: f64 = 1e-12;

pub const ROTATION_CONVENTION: &str =
    "positive angles rotate toward |loss> (clockwise with loss on the horizontal axis)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProspectError {
    #[error("gamble needs win > 0 > loss, got win {win}, loss {loss}")]
    InvalidGamble { win: f64, loss: f64 },
    #[error("{name} = {value} is not a probability")]
    NotProbability { name: &'static str, value: f64 },
    #[error("state has squared norm {0}, not 1")]
    NotUnitNorm(f64),
    #[error("effect operator eigenvalues ({min_eigenvalue}, {max_eigenvalue}) leave [0, 1]")]
    InvalidEffect {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },
    #[error(
        "calibrated off-diagonal {off_diag} gives eigenvalues ({min_eigenvalue}, {max_eigenvalue}) outside [0, 1]"
    )]
    InfeasibleCalibration {
        off_diag: f64,
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },
    #[error("reference state needs both amplitudes nonzero")]
    DegenerateReference,
    #[error("rotation angle must be nonnegative, got {0}")]
    NegativeAngle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamble {
    win: f64,
    loss: f64,
    stated_win_chance: Option<f64>,
}

impl Gamble {
    pub fn new(win: f64, loss: f64, stated_win_chance: Option<f64>) -> Result<Self, ProspectError> {
        if !(win.is_finite() && loss.is_finite() && win > 0.0 && loss < 0.0) {
            return Err(ProspectError::InvalidGamble { win, loss });
        }
        if let Some(p) = stated_win_chance {
            check_probability("stated_win_chance", p)?;
        }
        Ok(Self {
            win,
            loss,
            stated_win_chance,
        })
    }

    pub fn win(&self) -> f64 {
        self.win
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    /// Informational only; the model never uses it.
    pub fn stated_win_chance(&self) -> Option<f64> {
        self.stated_win_chance
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<f64, ProspectError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ProspectError::NotProbability { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProspectState {
    amplitude_loss: f64,
    amplitude_win: f64,
}

impl ProspectState {
    pub fn new(amplitude_loss: f64, amplitude_win: f64) -> Result<Self, ProspectError> {
        let norm = amplitude_loss * amplitude_loss + amplitude_win * amplitude_win;
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(ProspectError::NotUnitNorm(norm));
        }
        Ok(Self {
            amplitude_loss,
            amplitude_win,
        })
    }

    /// State at `angle` radians from `|loss⟩`, measured toward `|win⟩`.
    pub fn at_angle(angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self {
            amplitude_loss: cos,
            amplitude_win: sin,
        }
    }

    pub fn amplitude_loss(&self) -> f64 {
        self.amplitude_loss
    }

    pub fn amplitude_win(&self) -> f64 {
        self.amplitude_win
    }

    pub fn loss_probability(&self) -> f64 {
        self.amplitude_loss * self.amplitude_loss
    }

    pub fn win_probability(&self) -> f64 {
        self.amplitude_win * self.amplitude_win
    }

    /// Angle from `|loss⟩` toward `|win⟩`, in `(-π, π]`.
    pub fn angle(&self) -> f64 {
        self.amplitude_win.atan2(self.amplitude_loss)
    }

    fn to_belief(self) -> BeliefState {
        BeliefState::new(
            vec!["loss".into(), "win".into()],
            vec![self.amplitude_loss, self.amplitude_win],
        )
        .expect("unit-norm prospect state")
    }

    fn from_belief(state: &BeliefState) -> Self {
        let a = state.amplitudes();
        Self {
            amplitude_loss: a[0],
            amplitude_win: a[1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceData {
    accept_given_win: f64,
    accept_given_loss: f64,
    accept_unknown: f64,
}

impl AcceptanceData {
    pub fn new(
        accept_given_win: f64,
        accept_given_loss: f64,
        accept_unknown: f64,
    ) -> Result<Self, ProspectError> {
        Ok(Self {
            accept_given_win: check_probability("accept_given_win", accept_given_win)?,
            accept_given_loss: check_probability("accept_given_loss", accept_given_loss)?,
            accept_unknown: check_probability("accept_unknown", accept_unknown)?,
        })
    }

    pub fn accept_given_win(&self) -> f64 {
        self.accept_given_win
    }

    pub fn accept_given_loss(&self) -> f64 {
        self.accept_given_loss
    }

    pub fn accept_unknown(&self) -> f64 {
        self.accept_unknown
    }
}

/// Symmetric 2×2 operator `[[diag_loss, off_diag], [off_diag, diag_win]]`
/// with `0 ≤ E ≤ I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectOperator {
    diag_loss: f64,
    diag_win: f64,
    off_diag: f64,
}

fn eigenvalues(diag_loss: f64, diag_win: f64, off_diag: f64) -> (f64, f64) {
    let mean = 0.5 * (diag_loss + diag_win);
    let radius = (0.5 * (diag_loss - diag_win)).hypot(off_diag);
    (mean - radius, mean + radius)
}

/// `0 ≤ E ≤ I` via trace and determinant of `E` and of `I - E`.
fn is_effect(diag_loss: f64, diag_win: f64, off_diag: f64) -> bool {
    let tol = EFFECT_TOLERANCE;
    let trace = diag_loss + diag_win;
    let det = diag_loss * diag_win - off_diag * off_diag;
    let co_trace = 2.0 - trace;
    let co_det = (1.0 - diag_loss) * (1.0 - diag_win) - off_diag * off_diag;
    [diag_loss, diag_win, off_diag]
        .iter()
        .all(|v| v.is_finite())
        && trace >= -tol
        && det >= -tol
        && co_trace >= -tol
        && co_det >= -tol
}

impl EffectOperator {
    pub fn new(diag_loss: f64, diag_win: f64, off_diag: f64) -> Result<Self, ProspectError> {
        if !is_effect(diag_loss, diag_win, off_diag) {
            let (min_eigenvalue, max_eigenvalue) = eigenvalues(diag_loss, diag_win, off_diag);
            return Err(ProspectError::InvalidEffect {
                min_eigenvalue,
                max_eigenvalue,
            });
        }
        Ok(Self {
            diag_loss,
            diag_win,
            off_diag,
        })
    }

    /// Interference-free effect with the given known-outcome acceptance rates.
    pub fn diagonal(diag_loss: f64, diag_win: f64) -> Result<Self, ProspectError> {
        Self::new(diag_loss, diag_win, 0.0)
    }

    pub fn diag_loss(&self) -> f64 {
        self.diag_loss
    }

    pub fn diag_win(&self) -> f64 {
        self.diag_win
    }

    pub fn off_diag(&self) -> f64 {
        self.off_diag
    }

    /// `(min, max)` eigenvalues.
    pub fn eigenvalues(&self) -> (f64, f64) {
        eigenvalues(self.diag_loss, self.diag_win, self.off_diag)
    }
}

/// Superposition with loss probability `win / (win - loss)`, the unique
/// split giving zero expected payoff.
pub fn reference_state(g: &Gamble) -> ProspectState {
    let p_loss = g.win / (g.win - g.loss);
    ProspectState {
        amplitude_loss: p_loss.sqrt(),
        amplitude_win: (1.0 - p_loss).sqrt(),
    }
}

pub fn expected_utility(s: &ProspectState, g: &Gamble) -> f64 {
    s.loss_probability() * g.loss + s.win_probability() * g.win
}

/// Learning the outcome returns the belief to the reference state.
pub fn observe_reset(_s: &ProspectState, g: &Gamble) -> ProspectState {
    reference_state(g)
}

/// Rotates toward `|loss⟩` by `theta_per_round` once per unobserved round.
pub fn evolve_unrevealed(
    s: &ProspectState,
    theta_per_round: f64,
    rounds: u32,
) -> Result<ProspectState, ProspectError> {
    if theta_per_round.is_nan() || theta_per_round < 0.0 {
        return Err(ProspectError::NegativeAngle(theta_per_round));
    }
    let mut state = s.to_belief();
    for _ in 0..rounds {
        state = rotate2(&state, theta_per_round).expect("two outcomes");
    }
    Ok(ProspectState::from_belief(&state))
}

/// Every intermediate state of [`evolve_unrevealed`], starting with `s`.
pub fn trajectory(
    s: &ProspectState,
    theta_per_round: f64,
    rounds: u32,
) -> Result<Vec<ProspectState>, ProspectError> {
    let mut states = vec![*s];
    for _ in 0..rounds {
        let next = evolve_unrevealed(states.last().unwrap(), theta_per_round, 1)?;
        states.push(next);
    }
    Ok(states)
}

/// `⟨s|E|s⟩`.
pub fn acceptance_probability(s: &ProspectState, e: &EffectOperator) -> f64 {
    let (l, w) = (s.amplitude_loss, s.amplitude_win);
    let p = e.diag_loss * l * l + e.diag_win * w * w + 2.0 * e.off_diag * l * w;
    p.clamp(0.0, 1.0)
}

/// Anchors the diagonal at the known-outcome rates and solves the
/// off-diagonal so the reference state accepts at `accept_unknown`.
pub fn calibrate_effect(
    d: &AcceptanceData,
    s_ref: &ProspectState,
) -> Result<EffectOperator, ProspectError> {
    let (l, w) = (s_ref.amplitude_loss, s_ref.amplitude_win);
    if l == 0.0 || w == 0.0 {
        return Err(ProspectError::DegenerateReference);
    }
    let diag_loss = d.accept_given_loss;
    let diag_win = d.accept_given_win;
    let off_diag = (d.accept_unknown - diag_loss * l * l - diag_win * w * w) / (2.0 * l * w);
    EffectOperator::new(diag_loss, diag_win, off_diag).map_err(|_| {
        let (min_eigenvalue, max_eigenvalue) = eigenvalues(diag_loss, diag_win, off_diag);
        ProspectError::InfeasibleCalibration {
            off_diag,
            min_eigenvalue,
            max_eigenvalue,
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjunctionReport {
    pub reference: ProspectState,
    /// `[min, max]` of the known-outcome acceptance rates; any classical
    /// mixture of the two lands here.
    pub classical_bound: (f64, f64),
    /// Acceptance at the reference state with the off-diagonal set to zero.
    pub interference_free_acceptance: f64,
    /// Acceptance under the unknown outcome falls strictly below both
    /// known-outcome rates.
    pub effect_present: bool,
    pub calibration: Result<EffectOperator, ProspectError>,
}

pub fn disjunction_report(g: &Gamble, d: &AcceptanceData) -> DisjunctionReport {
    let reference = reference_state(g);
    let lo = d.accept_given_win.min(d.accept_given_loss);
    let hi = d.accept_given_win.max(d.accept_given_loss);
    let interference_free_acceptance = d.accept_given_loss * reference.loss_probability()
        + d.accept_given_win * reference.win_probability();
    DisjunctionReport {
        reference,
        classical_bound: (lo, hi),
        interference_free_acceptance,
        effect_present: d.accept_unknown < lo,
        calibration: calibrate_effect(d, &reference),
    }
}

/// Rotation angle from the reference state, toward `|loss⟩`, at which the
/// interference-free effect accepts at `accept_unknown`. `None` when no
/// positive angle up to the loss axis does so.
pub fn matching_rotation_angle(g: &Gamble, d: &AcceptanceData) -> Option<f64> {
    let reference = reference_state(g);
    let (dl, dw, u) = (d.accept_given_loss, d.accept_given_win, d.accept_unknown);
    if dl == dw {
        return None;
    }
    // Acceptance at angle ψ from |loss⟩ is dl cos²ψ + dw sin²ψ.
    let cos_sq = (u - dw) / (dl - dw);
    if !(0.0..=1.0).contains(&cos_sq) {
        return None;
    }
    let theta = reference.angle() - cos_sq.sqrt().acos();
    (theta > 0.0).then_some(theta)
}
