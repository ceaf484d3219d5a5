//! The taxonomy of global solution curves, the geometry of the curve
//! through the origin, and the minimal cone.
//!
//! A global solution curve has at most one cusp on each axis. Type A has
//! none, B one on the x-axis, C one on the y-axis, D one on each, and E a
//! single cusp at the origin.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::Serialize;

use crate::equilibria::alpha0;
use crate::error::{Error, Result};
use crate::integrate::{
    trace_blowup_with, trace_global, trace_profile, BlowupLimits, BlowupStop, Event, EventKind,
    GlobalTrace, IntegratorConfig,
};
use crate::manifolds::{closed_form_l1l2, seed_point, series_coefficients, Branch};
use crate::model::{
    cmc_residual, eval_x, principal_curvatures, BlowupState, CurveSample, Direction, Params,
    PrincipalCurvatures, ProfileState, Provenance, TracedCurve,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Tag {
    A,
    B,
    C,
    D,
    E,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::A => "A",
            Tag::B => "B",
            Tag::C => "C",
            Tag::D => "D",
            Tag::E => "E",
        };
        f.write_str(s)
    }
}

/// A cusp on a coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cusp {
    pub x: f64,
    pub y: f64,
    /// Tangent direction at the cusp, in `[0, π)`.
    pub direction: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionType {
    pub tag: Tag,
    pub cusp_x: Option<Cusp>,
    pub cusp_y: Option<Cusp>,
    pub origin_cusp: bool,
    /// Set when the curve was not traced to a terminal event at both ends.
    pub partial: bool,
}

fn cusp_from(e: &Event) -> Cusp {
    let (x, y) = match e.kind {
        EventKind::AxisTouchX => (e.value.unwrap_or(e.state.x), 0.0),
        _ => (0.0, e.value.unwrap_or(e.state.y)),
    };
    Cusp {
        x,
        y,
        direction: e.state.theta.rem_euclid(PI),
        t: e.t,
    }
}

/// Classifies a curve from its events.
///
/// # Errors
///
/// [`Error::TaxonomyViolation`] if an axis carries two cusps, the origin is
/// met twice, or an origin cusp coexists with an axis cusp.
pub fn classify_curve(curve: &TracedCurve, events: &[Event]) -> Result<SolutionType> {
    let count = |k: EventKind| events.iter().filter(|e| e.kind == k).count();
    let (nx, ny, no) = (
        count(EventKind::AxisTouchX),
        count(EventKind::AxisTouchY),
        count(EventKind::OriginApproach),
    );
    if nx > 1 || ny > 1 {
        return Err(Error::TaxonomyViolation(format!(
            "{nx} cusps on the x-axis and {ny} on the y-axis ({} samples)",
            curve.len()
        )));
    }
    if no > 1 || (no == 1 && nx + ny > 0) {
        return Err(Error::TaxonomyViolation(format!(
            "origin met {no} times alongside {} axis cusps",
            nx + ny
        )));
    }
    let find = |k: EventKind| events.iter().find(|e| e.kind == k).map(cusp_from);
    let cusp_x = find(EventKind::AxisTouchX);
    let cusp_y = find(EventKind::AxisTouchY);
    let tag = match (no, cusp_x.is_some(), cusp_y.is_some()) {
        (1, _, _) => Tag::E,
        (_, false, false) => Tag::A,
        (_, true, false) => Tag::B,
        (_, false, true) => Tag::C,
        (_, true, true) => Tag::D,
    };
    let terminal = events.iter().filter(|e| e.terminal).count();
    Ok(SolutionType {
        tag,
        cusp_x,
        cusp_y,
        origin_cusp: no == 1,
        partial: terminal < 2,
    })
}

pub fn classify_global(trace: &GlobalTrace) -> Result<SolutionType> {
    classify_curve(&trace.curve, &trace.events)
}

/// `k_u(0) = 2H(p+q−1)/(3p+3q−4)`, the curvature of the unstable branch at
/// the origin.
pub fn origin_curvature(params: &Params) -> f64 {
    2.0 * closed_form_l1l2(params).l1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginBranch {
    Unstable,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginGeometry {
    pub tangent_angle: f64,
    /// Signed curvature with the branch parametrized away from the origin.
    pub curvature: f64,
    pub branch: OriginBranch,
}

/// Outer radius of the curvature fit near the origin.
pub const CURVATURE_FIT_RADIUS: f64 = 5e-3;

/// Required proximity of the innermost sample to the origin.
pub const ORIGIN_PROXIMITY: f64 = 1e-3;

fn mean(v: &[(f64, f64)]) -> (f64, f64) {
    let n = v.len() as f64;
    (
        v.iter().map(|a| a.0).sum::<f64>() / n,
        v.iter().map(|a| a.1).sum::<f64>() / n,
    )
}

/// Tangent direction and curvature at the origin of a traced origin branch.
///
/// The angle comes from quadratic extrapolation of `atan2(y, x)` in `t` over
/// the three innermost samples. The curvature is the intercept of the line
/// `k(r) = 2l₁ + 6l₂r` through the mean points of two windows of radius,
/// `(0, R/2]` and `(R/2, R]` with `R = 5e−3`.
pub fn origin_geometry(curve: &TracedCurve, params: &Params) -> Result<OriginGeometry> {
    let _ = params;
    let closest = curve
        .samples
        .iter()
        .map(|s| s.state.radius())
        .fold(f64::INFINITY, f64::min);
    if !(closest <= ORIGIN_PROXIMITY) {
        return Err(Error::NotNearOrigin(closest));
    }
    let (branch, sign) = match curve.direction {
        Direction::Forward => (OriginBranch::Unstable, 1.0),
        Direction::Backward => (OriginBranch::Stable, -1.0),
    };
    let inner: Vec<&CurveSample> = curve.samples.iter().take(3).collect();
    if inner.len() < 3 {
        return Err(Error::InvalidArgument("need at least three samples".into()));
    }
    let ts: Vec<f64> = inner.iter().map(|s| s.t).collect();
    let angles: Vec<f64> = inner.iter().map(|s| s.state.y.atan2(s.state.x)).collect();
    let mut tangent_angle = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= ts[j] / (ts[j] - ts[i]);
            }
        }
        tangent_angle += w * angles[i];
    }

    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .map(|s| (s.state.radius(), sign * s.curvatures.lambda1))
        .filter(|(r, _)| *r <= CURVATURE_FIT_RADIUS)
        .collect();
    let half = CURVATURE_FIT_RADIUS / 2.0;
    let (lo, hi): (Vec<_>, Vec<_>) = pts.into_iter().partition(|(r, _)| *r <= half);
    if lo.is_empty() || hi.is_empty() {
        return Err(Error::InvalidArgument(
            "too few samples near the origin for the curvature fit".into(),
        ));
    }
    let (r1, k1) = mean(&lo);
    let (r2, k2) = mean(&hi);
    let slope = (k2 - k1) / (r2 - r1);
    Ok(OriginGeometry {
        tangent_angle,
        curvature: k1 - slope * r1,
        branch,
    })
}

/// The horizontal and vertical asymptotic lines `x = (q−1)/(|H|(p+q−1))`
/// and `y = (p−1)/(|H|(p+q−1))`.
pub fn asymptote_lines(params: &Params) -> Result<(f64, f64)> {
    if params.is_minimal() {
        return Err(Error::InvalidArgument(
            "H = 0: the asymptotic lines are at infinity".into(),
        ));
    }
    let d = params.h().abs() * params.dim();
    Ok((params.qm1() / d, params.pm1() / d))
}

/// The minimal cone `y = tan α₀ · x` for `H = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cone {
    pub params: Params,
    pub alpha0: f64,
}

impl Cone {
    /// Point at arclength `t` from the origin.
    pub fn point(&self, t: f64) -> ProfileState {
        let (s, c) = self.alpha0.sin_cos();
        ProfileState::new(t * c, t * s, self.alpha0)
    }

    /// `(0, (1/t)√((p−1)/(q−1)), −(1/t)√((q−1)/(p−1)))`.
    pub fn curvatures(&self, t: f64) -> PrincipalCurvatures {
        let ratio = (self.params.pm1() / self.params.qm1()).sqrt();
        PrincipalCurvatures {
            lambda1: 0.0,
            lambda2: ratio / t,
            lambda3: -1.0 / (ratio * t),
        }
    }

    /// Perpendicular distance from the cone line.
    pub fn distance(&self, s: &ProfileState) -> f64 {
        let (sn, cs) = self.alpha0.sin_cos();
        (s.x * sn - s.y * cs).abs()
    }

    /// Samples of the exact cone at the given arclengths, with curvatures
    /// and residuals evaluated from the model.
    pub fn sample(&self, ts: &[f64]) -> Result<TracedCurve> {
        let mut curve = TracedCurve::new(self.params, Provenance::Cone, Direction::Forward);
        for &t in ts {
            let state = self.point(t);
            let lambda1 = eval_x(&self.params, &state)?[2];
            let curvatures = principal_curvatures(&self.params, &state, lambda1)?;
            let residual = cmc_residual(&self.params, &state, lambda1)?;
            curve.samples.push(CurveSample {
                t,
                state,
                curvatures,
                residual,
            });
        }
        Ok(curve)
    }
}

pub fn cone(params: &Params) -> Result<Cone> {
    if !params.is_minimal() {
        return Err(Error::InvalidArgument(format!(
            "the cone needs H = 0 (got {})",
            params.h()
        )));
    }
    Ok(Cone {
        params: *params,
        alpha0: alpha0(params),
    })
}

/// Integrates the profile system from the cone point at `t_start` over
/// `length` and returns the largest distance from the cone line.
pub fn cone_drift(
    cone: &Cone,
    t_start: f64,
    length: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, TracedCurve)> {
    let cfg = IntegratorConfig {
        max_arclength: length,
        stop_on_asymptote: false,
        ..*cfg
    };
    let out = trace_profile(&cone.params, &cone.point(t_start), Direction::Forward, &cfg)?;
    if out
        .events
        .iter()
        .any(|e| matches!(e.kind, EventKind::AxisTouchX | EventKind::AxisTouchY))
    {
        return Err(Error::TaxonomyViolation("the cone touched an axis".into()));
    }
    let drift = out
        .curve
        .samples
        .iter()
        .map(|s| cone.distance(&s.state))
        .fold(0.0, f64::max);
    Ok((drift, out.curve))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// A point at distance `eps` from a cusp at `at` on an axis, on the branch
/// leaving the axis perpendicularly, with the first-order correction of `θ`.
pub fn cusp_seed(params: &Params, axis: Axis, at: f64, eps: f64) -> ProfileState {
    let dh = params.dim() * params.h();
    match axis {
        Axis::X => {
            let v = (dh * at - params.qm1()) / (f64::from(params.p()) * at);
            ProfileState::new(at, eps, FRAC_PI_2 + eps * v)
        }
        Axis::Y => {
            let w = (dh * at + params.pm1()) / (f64::from(params.q()) * at);
            ProfileState::new(eps, at, eps * w)
        }
    }
}

/// Default offset of cusp seeds from the axis.
pub const CUSP_EPS: f64 = 1e-7;

/// The global curve through a cusp at `at` on `axis`.
pub fn trace_through_cusp(
    params: &Params,
    axis: Axis,
    at: f64,
    cfg: &IntegratorConfig,
) -> Result<GlobalTrace> {
    let seed = cusp_seed(params, axis, at, CUSP_EPS);
    let mut g = trace_global(params, &seed, cfg)?;
    g.curve.provenance = match axis {
        Axis::X => Provenance::Cusp { x: at, y: 0.0 },
        Axis::Y => Provenance::Cusp { x: 0.0, y: at },
    };
    Ok(g)
}

/// Which way the branch leaving the x-axis at `x0` turns at its `k`-th
/// minimum of `x` (1-based): `+1` upward, `−1` downward, `None` if there is
/// no such minimum within arclength 50.
fn x_turn(params: &Params, x0: f64, k: usize, cfg: &IntegratorConfig) -> Result<Option<f64>> {
    let cfg = IntegratorConfig {
        max_arclength: cfg.max_arclength.min(50.0),
        ..*cfg
    };
    let out = trace_profile(
        params,
        &cusp_seed(params, Axis::X, x0, CUSP_EPS),
        Direction::Forward,
        &cfg,
    )?;
    let minima = out
        .curve
        .samples
        .windows(3)
        .filter(|w| w[1].state.x < w[0].state.x && w[1].state.x <= w[2].state.x);
    Ok(minima.map(|w| w[1].state.theta.sin().signum()).nth(k - 1))
}

/// Bisects for a cusp position `x0 ∈ [lo, hi]` on the x-axis whose branch
/// meets the y-axis at its `k`-th minimum of `x`, giving a curve with a cusp
/// on each axis.
pub fn shoot_double_cusp(
    params: &Params,
    lo: f64,
    hi: f64,
    k: usize,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("minimum index is 1-based".into()));
    }
    let sign = |x: f64| -> Result<f64> {
        x_turn(params, x, k, cfg)?.ok_or_else(|| {
            Error::InvalidArgument(format!("branch from x0 = {x} has fewer than {k} minima"))
        })
    };
    let (mut lo, mut hi) = (lo, hi);
    let s_lo = sign(lo)?;
    if s_lo == sign(hi)? {
        return Err(Error::InvalidArgument(format!(
            "no sign change of the turning direction on [{lo}, {hi}]"
        )));
    }
    while hi - lo > 1e-14 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if sign(mid)? == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanRay {
    pub theta: f64,
    pub forward: BlowupStop,
    pub backward: BlowupStop,
    pub min_r: f64,
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanReport {
    pub r0: f64,
    pub alpha: f64,
    pub rays: Vec<FanRay>,
    /// Whether each series seed reaches the origin: the positive controls.
    pub controls: Vec<(Branch, bool)>,
}

impl FanReport {
    pub fn connecting(&self) -> usize {
        self.rays.iter().filter(|r| r.connected).count()
    }
}

/// Radius below which a fan orbit counts as having reached the origin.
pub const FAN_ORIGIN_RADIUS: f64 = 1e-5;

/// Launches `n` orbits of `Ỹ` from radius `r0` on the ray `α = α₀`, with
/// tangent angles `θ_j = α₀ + 2π(j + ½)/n` avoiding both branch directions,
/// and follows each in both time directions until it reaches the origin or
/// leaves the neighbourhood `r < 0.5`.
pub fn origin_fan(params: &Params, n: usize, r0: f64, cfg: &IntegratorConfig) -> Result<FanReport> {
    let a0 = alpha0(params);
    let limits = BlowupLimits {
        r_max: 0.5,
        r_min: Some(FAN_ORIGIN_RADIUS),
        max_time: 500.0,
        max_step: 0.5,
    };
    let tol = cfg.tolerance();
    let follow = |b: &BlowupState| -> Result<(BlowupStop, BlowupStop, f64)> {
        let f = trace_blowup_with(params, b, Direction::Forward, &limits, &tol)?;
        let g = trace_blowup_with(params, b, Direction::Backward, &limits, &tol)?;
        Ok((f.stop, g.stop, f.min_r().min(g.min_r())))
    };
    let mut rays = Vec::with_capacity(n);
    for j in 0..n {
        let theta = a0 + 2.0 * PI * (j as f64 + 0.5) / n as f64;
        let (forward, backward, min_r) = follow(&BlowupState::new(r0, a0, theta))?;
        rays.push(FanRay {
            theta,
            forward,
            backward,
            min_r,
            connected: forward == BlowupStop::OriginApproach
                || backward == BlowupStop::OriginApproach,
        });
    }
    let mut controls = Vec::new();
    for br in Branch::BOTH {
        let s = series_coefficients(params, br, cfg.series_order)?;
        let (f, b, _) = follow(&seed_point(&s, r0)?)?;
        controls.push((
            br,
            f == BlowupStop::OriginApproach || b == BlowupStop::OriginApproach,
        ));
    }
    Ok(FanReport {
        r0,
        alpha: a0,
        rays,
        controls,
    })
}
