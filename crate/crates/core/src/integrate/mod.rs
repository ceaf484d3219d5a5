//! Adaptive integration of the profile system with event detection.
//!
//! Curves are traced in two charts. Away from the axes the arclength system
//! `X` is used directly. Within `chart_radius` of an axis, and near the
//! origin, the state moves to the blow-up chart `(r, α, θ)` where `Ỹ` is
//! regular; arclength is carried along as a fourth component with
//! `ds/dσ = r sin α cos α`. Passages close to an axis are cusps of the global
//! solution curve and are reported as axis events.

mod asymptote;
mod blowup;
pub mod dopri;
mod profile;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProfileState, TracedCurve};

pub use asymptote::{
    center_estimates, estimate_at, extrapolate, CenterEstimate, OscillationTracker,
};
pub use blowup::{trace_blowup, trace_blowup_with, BlowupCurve, BlowupLimits, BlowupStop};
pub use dopri::{rk_step, StepReport, Tolerance};
pub use profile::{compose_type_e, trace_global, trace_profile, trace_type_e_branch};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step in the independent variable of either chart.
    pub max_step: f64,
    pub max_arclength: f64,
    /// An axis minimum closer than this is a cusp.
    pub axis_epsilon: f64,
    /// Trailing arclength over which asymptote estimates must settle.
    pub asymptote_window: f64,
    /// Allowed spread of the asymptote estimates over the window.
    pub asymptote_tol: f64,
    /// Radius at which an origin branch leaves the blow-up chart.
    pub handoff_radius: f64,
    /// Distance to an axis below which the blow-up chart takes over.
    pub chart_radius: f64,
    pub origin_radius: f64,
    pub bounds_radius: f64,
    /// Arclength spacing of the regular sample grid.
    pub sample_spacing: f64,
    pub stop_on_asymptote: bool,
    pub seed_r0: f64,
    pub series_order: usize,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            max_arclength: 500.0,
            axis_epsilon: 1e-6,
            asymptote_window: 5.0,
            asymptote_tol: 1e-5,
            handoff_radius: 0.1,
            chart_radius: 0.02,
            origin_radius: 1e-5,
            bounds_radius: 1e4,
            sample_spacing: 0.01,
            stop_on_asymptote: true,
            seed_r0: 1e-4,
            series_order: 4,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("max_arclength", self.max_arclength),
            ("axis_epsilon", self.axis_epsilon),
            ("asymptote_window", self.asymptote_window),
            ("asymptote_tol", self.asymptote_tol),
            ("handoff_radius", self.handoff_radius),
            ("chart_radius", self.chart_radius),
            ("origin_radius", self.origin_radius),
            ("bounds_radius", self.bounds_radius),
            ("sample_spacing", self.sample_spacing),
            ("seed_r0", self.seed_r0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be > 0 (got {v})"
                )));
            }
        }
        if self.series_order == 0 {
            return Err(Error::InvalidArgument("series_order must be ≥ 1".into()));
        }
        if self.seed_r0 >= self.handoff_radius {
            return Err(Error::InvalidArgument(format!(
                "seed_r0 ({}) must be below handoff_radius ({})",
                self.seed_r0, self.handoff_radius
            )));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Cusp on the x-axis (`y → 0`).
    AxisTouchX,
    /// Cusp on the y-axis (`x → 0`).
    AxisTouchY,
    OriginApproach,
    AsymptoteX,
    AsymptoteY,
    BoundsExit,
    MaxLength,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::AxisTouchX => "axis_touch_x",
            EventKind::AxisTouchY => "axis_touch_y",
            EventKind::OriginApproach => "origin_approach",
            EventKind::AsymptoteX => "asymptote_x",
            EventKind::AsymptoteY => "asymptote_y",
            EventKind::BoundsExit => "bounds_exit",
            EventKind::MaxLength => "max_length",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub state: ProfileState,
    /// Whether tracing stopped here.
    pub terminal: bool,
    /// Asymptote position for asymptote events; the axis coordinate of the
    /// cusp for axis events.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

/// Why a trace ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Stop {
    Event { kind: EventKind },
    StepUnderflow { t: f64, dt: f64 },
    StepLimit { t: f64 },
}

impl Stop {
    pub fn is_numeric_failure(&self) -> bool {
        matches!(self, Stop::StepUnderflow { .. } | Stop::StepLimit { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceOutcome {
    pub curve: TracedCurve,
    pub events: Vec<Event>,
    pub stop: Stop,
    /// `(t, x)` at every turning point of `x`, in traversal order.
    #[serde(skip)]
    pub x_extrema: Vec<(f64, f64)>,
    #[serde(skip)]
    pub y_extrema: Vec<(f64, f64)>,
}

impl TraceOutcome {
    pub fn first_event(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }

    pub fn terminal_event(&self) -> Option<&Event> {
        self.events.iter().rev().find(|e| e.terminal)
    }
}

/// A curve traced in both directions from one point, with the backward half
/// at negative `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalTrace {
    pub curve: TracedCurve,
    pub events: Vec<Event>,
    pub forward: Stop,
    pub backward: Stop,
}

impl GlobalTrace {
    pub fn has_numeric_failure(&self) -> bool {
        self.forward.is_numeric_failure() || self.backward.is_numeric_failure()
    }
}
