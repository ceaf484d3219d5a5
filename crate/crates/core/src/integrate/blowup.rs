use serde::Serialize;

use super::dopri::{Stepper, Tolerance};
use super::IntegratorConfig;
use crate::error::{Error, Result};
use crate::model::{eval_tilde_y, BlowupState, Direction, Params};

/// Stopping rules for an orbit of `Ỹ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupLimits {
    /// Stop once `r ≥ r_max`.
    pub r_max: f64,
    /// Stop once `0 < r < r_min`; orbits on the divisor are unaffected.
    pub r_min: Option<f64>,
    pub max_time: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupStop {
    Handoff,
    OriginApproach,
    Equilibrium,
    MaxTime,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupCurve {
    /// `(σ, state)` with `σ` the time of `Ỹ` along the traversal.
    pub samples: Vec<(f64, BlowupState)>,
    pub stop: BlowupStop,
}

impl BlowupCurve {
    pub fn last(&self) -> &BlowupState {
        &self.samples.last().expect("curve has its initial sample").1
    }

    pub fn min_r(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.1.r)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Integrates `Ỹ` from `b0` until `r ≥ handoff_radius` or an equilibrium
/// (‖Ỹ‖ < 1e−12) is reached.
pub fn trace_blowup(
    params: &Params,
    b0: &BlowupState,
    direction: Direction,
    cfg: &IntegratorConfig,
) -> Result<BlowupCurve> {
    cfg.validate()?;
    let limits = BlowupLimits {
        r_max: cfg.handoff_radius,
        r_min: None,
        max_time: 1e3,
        max_step: cfg.max_step.max(0.5),
    };
    trace_blowup_with(params, b0, direction, &limits, &cfg.tolerance())
}

pub fn trace_blowup_with(
    params: &Params,
    b0: &BlowupState,
    direction: Direction,
    limits: &BlowupLimits,
    tol: &Tolerance,
) -> Result<BlowupCurve> {
    if !(b0.r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "blow-up radius must be ≥ 0 (got {})",
            b0.r
        )));
    }
    let sign = direction.sign();
    let f = move |y: &[f64; 3]| {
        let v = eval_tilde_y(params, &BlowupState::new(y[0], y[1], y[2]));
        [sign * v[0], sign * v[1], sign * v[2]]
    };
    let mut samples = vec![(0.0, *b0)];
    let norm = |v: &[f64; 3]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm(&f(&[b0.r, b0.alpha, b0.theta])) < 1e-12 {
        return Ok(BlowupCurve {
            samples,
            stop: BlowupStop::Equilibrium,
        });
    }
    let mut st = Stepper::new(f, [b0.r, b0.alpha, b0.theta], *tol, limits.max_step, None);
    let stop = loop {
        match st.advance() {
            Ok(_) => {}
            Err(Error::StepUnderflow { .. }) => break BlowupStop::StepUnderflow,
            Err(e) => return Err(e),
        }
        let y = st.y;
        samples.push((st.elapsed, BlowupState::new(y[0], y[1], y[2])));
        if y[0] >= limits.r_max {
            break BlowupStop::Handoff;
        }
        if limits.r_min.is_some_and(|m| y[0] > 0.0 && y[0] < m) {
            break BlowupStop::OriginApproach;
        }
        if norm(&st.current_derivative()) < 1e-12 {
            break BlowupStop::Equilibrium;
        }
        if st.elapsed >= limits.max_time {
            break BlowupStop::MaxTime;
        }
    };
    Ok(BlowupCurve { samples, stop })
}
