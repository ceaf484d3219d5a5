use std::f64::consts::FRAC_PI_2;

use super::asymptote::OscillationTracker;
use super::dopri::{Step, Stepper, Tolerance};
use super::{Event, EventKind, GlobalTrace, IntegratorConfig, Stop, TraceOutcome};
use crate::equilibria::alpha0;
use crate::error::{Error, Result};
use crate::manifolds::{seed_point, series_coefficients, Branch};
use crate::model::{
    eval_x_unchecked, principal_curvatures, tilde_y_trig, CurveSample, Direction, Params,
    ProfileState, Provenance, TracedCurve,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    Profile,
    /// `(r, α, φ, s)` with `θ = quarter·π/2 + φ`, or `(r, π/2 − α, φ, s)` when
    /// `flip` is set. Both offsets keep the distance to an axis and to the
    /// lines of equilibria over it resolved to full relative precision.
    Blowup {
        flip: bool,
        quarter: i64,
    },
}

impl Chart {
    fn quarter(self) -> i64 {
        match self {
            Chart::Profile => 0,
            Chart::Blowup { quarter, .. } => quarter,
        }
    }

    fn theta(self, phi: f64) -> f64 {
        self.quarter() as f64 * FRAC_PI_2 + phi
    }
}

fn trig(flip: bool, a: f64) -> (f64, f64) {
    let (s, c) = a.sin_cos();
    if flip {
        (c, s)
    } else {
        (s, c)
    }
}

/// `(sin θ, cos θ)` for `θ = quarter·π/2 + φ`.
fn quarter_trig(quarter: i64, phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    match quarter.rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

type Field<'a> = Box<dyn Fn(&[f64; 4]) -> [f64; 4] + 'a>;

fn field<'a>(params: &'a Params, chart: Chart, sign: f64) -> Field<'a> {
    match chart {
        Chart::Profile => Box::new(move |y: &[f64; 4]| {
            let v = eval_x_unchecked(params, y[0], y[1], y[2]);
            [sign * v[0], sign * v[1], sign * v[2], 1.0]
        }),
        Chart::Blowup { flip, quarter } => Box::new(move |y: &[f64; 4]| {
            let (sa, ca) = trig(flip, y[1]);
            let v = tilde_y_trig(params, y[0], (sa, ca), quarter_trig(quarter, y[2]));
            let da = if flip { -v[1] } else { v[1] };
            [sign * v[0], sign * da, sign * v[2], y[0] * sa * ca]
        }),
    }
}

fn to_profile(chart: Chart, y: &[f64; 4]) -> ProfileState {
    match chart {
        Chart::Profile => ProfileState::new(y[0], y[1], y[2]),
        Chart::Blowup { flip, .. } => {
            let (s, c) = trig(flip, y[1]);
            ProfileState::new(y[0] * c, y[0] * s, chart.theta(y[2]))
        }
    }
}

fn radius(chart: Chart, y: &[f64; 4]) -> f64 {
    match chart {
        Chart::Profile => y[0].hypot(y[1]),
        Chart::Blowup { .. } => y[0],
    }
}

/// Moves a state from chart `from` to chart `to`.
fn convert(from: Chart, to: Chart, y: &[f64; 4]) -> [f64; 4] {
    let s = to_profile(from, y);
    let phi = (from.quarter() - to.quarter()) as f64 * FRAC_PI_2 + y[2];
    match to {
        Chart::Profile => [s.x, s.y, s.theta, y[3]],
        Chart::Blowup { flip: false, .. } => [s.x.hypot(s.y), s.y.atan2(s.x), phi, y[3]],
        Chart::Blowup { flip: true, .. } => [s.x.hypot(s.y), s.x.atan2(s.y), phi, y[3]],
    }
}

fn blowup_for(s: &ProfileState) -> Chart {
    Chart::Blowup {
        flip: s.x < s.y,
        quarter: (s.theta / FRAC_PI_2).round() as i64,
    }
}

/// Bisection for a sign change of `g` on `[0, 1]`.
fn bisect(g: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let glo = g(lo);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy)]
enum Candidate {
    Grid,
    Crossing(i64),
    MaxLength,
    Origin,
    Bounds,
}

struct Recorder<'a> {
    params: &'a Params,
    cfg: &'a IntegratorConfig,
    sign: f64,
    curve: TracedCurve,
    events: Vec<Event>,
    next_grid: f64,
    x_track: OscillationTracker,
    y_track: OscillationTracker,
    x_fired: bool,
    y_fired: bool,
    x_extrema: Vec<(f64, f64)>,
    y_extrema: Vec<(f64, f64)>,
}

impl<'a> Recorder<'a> {
    fn push_sample(&mut self, t: f64, state: ProfileState) {
        if self.curve.last().is_some_and(|s| t <= s.t) || !state.in_open_quadrant() {
            return;
        }
        let lambda1 = eval_x_unchecked(self.params, state.x, state.y, state.theta)[2];
        let Ok(curvatures) = principal_curvatures(self.params, &state, lambda1) else {
            return;
        };
        let residual = curvatures.weighted_sum(self.params) - self.params.dim() * self.params.h();
        self.curve.samples.push(CurveSample {
            t,
            state,
            curvatures,
            residual,
        });
    }

    fn push_event(
        &mut self,
        kind: EventKind,
        t: f64,
        state: ProfileState,
        terminal: bool,
        value: Option<f64>,
    ) {
        self.events.push(Event {
            kind,
            t,
            state,
            terminal,
            value,
        });
    }

    fn sample_at(&mut self, chart: Chart, step: &Step<4>, u: f64) -> (f64, ProfileState) {
        let y = step.eval(u);
        let state = to_profile(chart, &y);
        self.push_sample(y[3], state);
        (y[3], state)
    }

    /// Records samples and events inside an accepted step; returns the stop
    /// reason if a terminal event falls within it.
    fn process(&mut self, chart: Chart, step: &Step<4>) -> Option<Stop> {
        let cfg = self.cfg;
        let (y0, y1) = (step.y0, step.y1);
        let mut cands: Vec<(f64, Candidate)> = Vec::new();

        let t_of = |u: f64| step.eval(u)[3];
        while self.next_grid < y1[3] {
            let g = self.next_grid;
            let u = if g <= y0[3] {
                0.0
            } else {
                bisect(|u| t_of(u) - g)
            };
            cands.push((u, Candidate::Grid));
            self.next_grid += cfg.sample_spacing;
        }

        // crossings of θ = m·π/2, located in the chart's own angle offset
        let m0 = (y0[2] / FRAC_PI_2).floor() as i64;
        let m1 = (y1[2] / FRAC_PI_2).floor() as i64;
        let crossed: Vec<i64> = if m1 > m0 {
            (m0 + 1..=m1).collect()
        } else {
            (m1 + 1..=m0).rev().collect()
        };
        for m in crossed {
            let target = m as f64 * FRAC_PI_2;
            cands.push((
                bisect(|u| step.eval(u)[2] - target),
                Candidate::Crossing(m + chart.quarter()),
            ));
        }

        if y1[3] >= cfg.max_arclength {
            cands.push((
                bisect(|u| t_of(u) - cfg.max_arclength),
                Candidate::MaxLength,
            ));
        }
        let r_of = |u: f64| radius(chart, &step.eval(u));
        if radius(chart, &y1) < cfg.origin_radius {
            cands.push((bisect(|u| r_of(u) - cfg.origin_radius), Candidate::Origin));
        }
        if radius(chart, &y1) > cfg.bounds_radius {
            cands.push((bisect(|u| r_of(u) - cfg.bounds_radius), Candidate::Bounds));
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));

        for (u, cand) in cands {
            match cand {
                Candidate::Grid => {
                    self.sample_at(chart, step, u);
                }
                Candidate::Crossing(m) => {
                    if let Some(stop) = self.extremum(chart, step, u, m) {
                        return Some(stop);
                    }
                }
                Candidate::MaxLength | Candidate::Origin | Candidate::Bounds => {
                    let kind = match cand {
                        Candidate::MaxLength => EventKind::MaxLength,
                        Candidate::Origin => EventKind::OriginApproach,
                        _ => EventKind::BoundsExit,
                    };
                    let (t, state) = self.sample_at(chart, step, u);
                    self.push_event(kind, t, state, true, None);
                    return Some(Stop::Event { kind });
                }
            }
        }
        self.sample_at(chart, step, 1.0);
        None
    }

    /// `θ` crossed `m·π/2`: a turning point of `x` (odd `m`) or `y` (even).
    fn extremum(&mut self, chart: Chart, step: &Step<4>, u: f64, m: i64) -> Option<Stop> {
        let cfg = self.cfg;
        let (t, state) = self.sample_at(chart, step, u);
        let dtheta = step.derivative(u)[2];
        let (sin, cos) = state.theta.sin_cos();
        if m.rem_euclid(2) == 1 {
            let is_min = -self.sign * sin * dtheta > 0.0;
            self.x_extrema.push((t, state.x));
            self.y_track.clear();
            self.y_fired = false;
            if is_min && state.x < cfg.axis_epsilon {
                self.push_event(EventKind::AxisTouchY, t, state, false, Some(state.y));
            }
            let fired = self
                .x_track
                .push(t, state.x, cfg.asymptote_window, cfg.asymptote_tol);
            if let (Some(c), false) = (fired, self.x_fired) {
                self.x_fired = true;
                self.push_event(
                    EventKind::AsymptoteX,
                    t,
                    state,
                    cfg.stop_on_asymptote,
                    Some(c),
                );
                if cfg.stop_on_asymptote {
                    return Some(Stop::Event {
                        kind: EventKind::AsymptoteX,
                    });
                }
            }
        } else {
            let is_min = self.sign * cos * dtheta > 0.0;
            self.y_extrema.push((t, state.y));
            self.x_track.clear();
            self.x_fired = false;
            if is_min && state.y < cfg.axis_epsilon {
                self.push_event(EventKind::AxisTouchX, t, state, false, Some(state.x));
            }
            let fired = self
                .y_track
                .push(t, state.y, cfg.asymptote_window, cfg.asymptote_tol);
            if let (Some(c), false) = (fired, self.y_fired) {
                self.y_fired = true;
                self.push_event(
                    EventKind::AsymptoteY,
                    t,
                    state,
                    cfg.stop_on_asymptote,
                    Some(c),
                );
                if cfg.stop_on_asymptote {
                    return Some(Stop::Event {
                        kind: EventKind::AsymptoteY,
                    });
                }
            }
        }
        None
    }
}

struct Launch {
    chart: Chart,
    y: [f64; 4],
    /// Stay in the blow-up chart until `r` first reaches this radius.
    hold_until: Option<f64>,
}

fn run(
    params: &Params,
    cfg: &IntegratorConfig,
    direction: Direction,
    provenance: Provenance,
    launch: Launch,
) -> Result<TraceOutcome> {
    cfg.validate()?;
    let sign = direction.sign();
    let tol: Tolerance = cfg.tolerance();
    let mut chart = launch.chart;
    let mut hold = launch.hold_until;
    let mut stepper = Stepper::new(
        field(params, chart, sign),
        launch.y,
        tol,
        cfg.max_step,
        None,
    );

    let t0 = launch.y[3];
    let mut rec = Recorder {
        params,
        cfg,
        sign,
        curve: TracedCurve::new(*params, provenance, direction),
        events: Vec::new(),
        next_grid: (t0 / cfg.sample_spacing).floor() * cfg.sample_spacing + cfg.sample_spacing,
        x_track: OscillationTracker::default(),
        y_track: OscillationTracker::default(),
        x_fired: false,
        y_fired: false,
        x_extrema: Vec::new(),
        y_extrema: Vec::new(),
    };
    rec.push_sample(t0, to_profile(chart, &launch.y));

    let mut steps = 0usize;
    let stop = loop {
        steps += 1;
        if steps > cfg.max_steps {
            break Stop::StepLimit { t: stepper.y[3] };
        }
        let step = match stepper.advance() {
            Ok(step) => step,
            Err(Error::StepUnderflow { dt, .. }) => {
                break Stop::StepUnderflow {
                    t: stepper.y[3],
                    dt,
                }
            }
            Err(e) => return Err(e),
        };
        if let Some(stop) = rec.process(chart, &step) {
            break stop;
        }
        let y = step.y1;

        let s = to_profile(chart, &y);
        let near_axis = s.x.min(s.y);
        let next = match chart {
            Chart::Blowup { .. } => match hold {
                Some(r_h) if y[0] < r_h => chart,
                Some(_) => {
                    hold = None;
                    if near_axis > cfg.chart_radius {
                        Chart::Profile
                    } else {
                        chart
                    }
                }
                None if near_axis > 2.0 * cfg.chart_radius => Chart::Profile,
                None => chart,
            },
            Chart::Profile if near_axis < cfg.chart_radius => blowup_for(&s),
            Chart::Profile => Chart::Profile,
        };
        if next != chart {
            // ds/dσ = r sin α cos α = xy/r converts the step size
            let speed = s.x * s.y / s.radius();
            let h = match next {
                Chart::Blowup { .. } => stepper.h / speed,
                Chart::Profile => stepper.h * speed,
            };
            let y_new = convert(chart, next, &y);
            chart = next;
            stepper = Stepper::new(
                field(params, chart, sign),
                y_new,
                tol,
                cfg.max_step,
                Some(h),
            );
        }
    };

    Ok(TraceOutcome {
        curve: rec.curve,
        events: rec.events,
        stop,
        x_extrema: rec.x_extrema,
        y_extrema: rec.y_extrema,
    })
}

/// Traces the arclength system from `s0` in one direction until a terminal
/// event.
pub fn trace_profile(
    params: &Params,
    s0: &ProfileState,
    direction: Direction,
    cfg: &IntegratorConfig,
) -> Result<TraceOutcome> {
    if !(s0.in_open_quadrant() && s0.theta.is_finite()) {
        return Err(Error::OffQuadrant { x: s0.x, y: s0.y });
    }
    let y = [s0.x, s0.y, s0.theta, 0.0];
    let launch = if s0.x.min(s0.y) < cfg.chart_radius {
        let chart = blowup_for(s0);
        Launch {
            chart,
            y: convert(Chart::Profile, chart, &y),
            hold_until: None,
        }
    } else {
        Launch {
            chart: Chart::Profile,
            y,
            hold_until: None,
        }
    };
    run(
        params,
        cfg,
        direction,
        Provenance::InitialCondition { state: *s0 },
        launch,
    )
}

/// Traces one origin branch: series seed at `seed_r0`, `Ỹ` until
/// `handoff_radius`, then the profile system out to the asymptote.
///
/// Arclength is measured from the origin, approximated by `seed_r0` at the
/// seed. The unstable branch is traversed forward, the stable one backward.
pub fn trace_type_e_branch(
    params: &Params,
    branch: Branch,
    cfg: &IntegratorConfig,
) -> Result<TraceOutcome> {
    if params.is_minimal() {
        return Err(Error::InvalidArgument(
            "H = 0: the origin branches form the minimal cone (use the cone)".into(),
        ));
    }
    cfg.validate()?;
    let series = series_coefficients(params, branch, cfg.series_order)?;
    let seed = seed_point(&series, cfg.seed_r0)?;
    let direction = match branch {
        Branch::UnstableP5 => Direction::Forward,
        Branch::StableP6 => Direction::Backward,
    };
    run(
        params,
        cfg,
        direction,
        Provenance::Branch {
            name: branch.name().into(),
        },
        Launch {
            chart: Chart::Blowup {
                flip: false,
                quarter: 0,
            },
            y: [seed.r, seed.alpha, seed.theta, cfg.seed_r0],
            hold_until: Some(cfg.handoff_radius),
        },
    )
}

fn mirror_events(events: &[Event]) -> impl Iterator<Item = Event> + '_ {
    events.iter().rev().map(|e| Event { t: -e.t, ..*e })
}

fn join(
    params: &Params,
    provenance: Provenance,
    back: &TraceOutcome,
    fwd: &TraceOutcome,
) -> (TracedCurve, Vec<Event>) {
    let mut curve = TracedCurve::new(*params, provenance, Direction::Forward);
    curve.samples = back
        .curve
        .samples
        .iter()
        .rev()
        .map(|s| CurveSample { t: -s.t, ..*s })
        .chain(fwd.curve.samples.iter().copied())
        .collect();
    curve.samples.dedup_by(|b, a| b.t <= a.t);
    let events = mirror_events(&back.events)
        .chain(fwd.events.iter().copied())
        .collect();
    (curve, events)
}

/// Traces from `s0` in both directions and joins the halves, the backward
/// one at negative `t`.
pub fn trace_global(
    params: &Params,
    s0: &ProfileState,
    cfg: &IntegratorConfig,
) -> Result<GlobalTrace> {
    let fwd = trace_profile(params, s0, Direction::Forward, cfg)?;
    let back = trace_profile(params, s0, Direction::Backward, cfg)?;
    let (curve, events) = join(
        params,
        Provenance::InitialCondition { state: *s0 },
        &back,
        &fwd,
    );
    Ok(GlobalTrace {
        curve,
        events,
        forward: fwd.stop,
        backward: back.stop,
    })
}

/// The curve through the origin: the stable branch arriving at `t = 0`
/// followed by the unstable branch leaving it.
pub fn compose_type_e(params: &Params, cfg: &IntegratorConfig) -> Result<GlobalTrace> {
    let fwd = trace_type_e_branch(params, Branch::UnstableP5, cfg)?;
    let back = trace_type_e_branch(params, Branch::StableP6, cfg)?;
    let (curve, mut events) = join(params, Provenance::Composed, &back, &fwd);
    let at = events
        .iter()
        .position(|e| e.t > 0.0)
        .unwrap_or(events.len());
    events.insert(
        at,
        Event {
            kind: EventKind::OriginApproach,
            t: 0.0,
            state: ProfileState::new(0.0, 0.0, alpha0(params)),
            terminal: false,
            value: None,
        },
    );
    Ok(GlobalTrace {
        curve,
        events,
        forward: fwd.stop,
        backward: back.stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u32, q: u32, h: f64) -> Params {
        Params::new(p, q, h).unwrap()
    }

    #[test]
    fn flipped_chart_matches_plain_chart() {
        let par = params(3, 2, 0.8);
        let y = [0.03, 0.9, 2.1, 0.0];
        let plain = Chart::Blowup {
            flip: false,
            quarter: 1,
        };
        let flipped = Chart::Blowup {
            flip: true,
            quarter: 1,
        };
        let a = convert(Chart::Profile, plain, &y);
        let b = convert(Chart::Profile, flipped, &y);
        assert!((a[1] + b[1] - FRAC_PI_2).abs() < 1e-15);
        let fa = field(&par, plain, 1.0)(&a);
        let fb = field(&par, flipped, 1.0)(&b);
        assert!((fa[0] - fb[0]).abs() < 1e-15);
        assert!((fa[1] + fb[1]).abs() < 1e-15);
        assert!((fa[2] - fb[2]).abs() < 1e-15);
        let back = convert(flipped, Chart::Profile, &b);
        for i in 0..4 {
            assert!((back[i] - y[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn blowup_field_is_a_time_change_of_x() {
        let par = params(2, 5, -1.3);
        let y = [0.7, 0.2, 0.4, 0.0];
        let chart = Chart::Blowup {
            flip: false,
            quarter: 0,
        };
        let b = convert(Chart::Profile, chart, &y);
        let fb = field(&par, chart, 1.0)(&b);
        let fx = field(&par, Chart::Profile, 1.0)(&y);
        // dθ/ds agrees after dividing by ds/dσ
        assert!((fb[2] / fb[3] - fx[2]).abs() < 1e-13);
    }

    #[test]
    fn quarter_offset_is_exact_at_right_angles() {
        for q in -5..6 {
            let (s, c) = quarter_trig(q, 0.0);
            let want = (q as f64 * FRAC_PI_2).sin_cos();
            assert!((s - want.0).abs() < 1e-15 && (c - want.1).abs() < 1e-15);
            assert!(s == 0.0 || c == 0.0);
        }
        let (s, c) = quarter_trig(1, 1e-20);
        assert_eq!((s, c), (1.0, -1e-20));
    }

    #[test]
    fn cusp_passage_escapes_a_line_of_equilibria() {
        // θ′ vanishes to rounding on the seed, so a plain θ would never move
        let par = params(2, 3, 1.0);
        let seed = ProfileState::new(0.5, 1e-7, FRAC_PI_2);
        let out = trace_profile(
            &par,
            &seed,
            Direction::Backward,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(!out.stop.is_numeric_failure(), "{:?}", out.stop);
    }

    #[test]
    fn forward_trace_ends_on_vertical_asymptote() {
        let par = params(2, 2, 1.0);
        let out = trace_profile(
            &par,
            &ProfileState::new(1.0, 1.0, 0.0),
            Direction::Forward,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let e = out.terminal_event().unwrap();
        assert_eq!(e.kind, EventKind::AsymptoteX);
        assert!((e.value.unwrap() - 1.0 / 3.0).abs() < 1e-4);
        assert!(out.curve.max_abs_residual() < 1e-6);
        assert!(out.curve.check_unit_speed(1e-9));
    }

    #[test]
    fn reversing_a_trace_returns_to_the_start() {
        let par = params(3, 2, 0.5);
        let cfg = IntegratorConfig {
            max_arclength: 6.0,
            stop_on_asymptote: false,
            ..Default::default()
        };
        let s0 = ProfileState::new(0.8, 0.6, 1.0);
        let fwd = trace_profile(&par, &s0, Direction::Forward, &cfg).unwrap();
        assert_eq!(
            fwd.stop,
            Stop::Event {
                kind: EventKind::MaxLength
            }
        );
        let end = fwd.curve.last().unwrap().state;
        let back = trace_profile(&par, &end, Direction::Backward, &cfg).unwrap();
        let s1 = back.curve.last().unwrap().state;
        assert!((s1.x - s0.x).abs() < 1e-8 && (s1.y - s0.y).abs() < 1e-8);
        assert!((s1.theta - s0.theta).abs() < 1e-8);
    }

    #[test]
    fn type_e_branches_need_curvature() {
        assert!(trace_type_e_branch(
            &params(2, 2, 0.0),
            Branch::UnstableP5,
            &IntegratorConfig::default()
        )
        .is_err());
    }

    #[test]
    fn handoff_radius_does_not_move_the_asymptote() {
        let par = params(3, 2, 1.0);
        let at = |handoff_radius: f64| {
            let cfg = IntegratorConfig {
                handoff_radius,
                ..Default::default()
            };
            let out = trace_type_e_branch(&par, Branch::UnstableP5, &cfg).unwrap();
            out.terminal_event().unwrap().value.unwrap()
        };
        assert!((at(0.05) - at(0.2)).abs() < 1e-5);
    }

    #[test]
    fn composed_curve_passes_through_origin_once() {
        let g = compose_type_e(&params(2, 2, 1.0), &IntegratorConfig::default()).unwrap();
        let origin: Vec<_> = g
            .events
            .iter()
            .filter(|e| e.kind == EventKind::OriginApproach)
            .collect();
        assert_eq!(origin.len(), 1);
        assert_eq!(origin[0].t, 0.0);
        assert!(g.curve.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert!(!g.has_numeric_failure());
    }
}
