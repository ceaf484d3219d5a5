use std::path::PathBuf;

use clap::{Args, ValueEnum};
use cmcrot_core::classify::{classify_curve, SolutionType};
use cmcrot_core::integrate::{
    compose_type_e, trace_global, trace_profile, trace_type_e_branch, Event, IntegratorConfig, Stop,
};
use cmcrot_core::manifolds::Branch;
use cmcrot_core::model::canonical_theta;
use cmcrot_core::{Direction, Params, ProfileState, TracedCurve};
use serde_json::{json, Value};

use crate::args::{triple, NumArgs, ParamArgs};
use crate::{output, svg, CliError};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TraceBranch {
    Unstable,
    Stable,
    /// Both branches joined at the origin.
    Both,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub num: NumArgs,
    /// Origin branch to follow.
    #[arg(
        long,
        value_enum,
        conflicts_with = "from",
        required_unless_present = "from"
    )]
    pub branch: Option<TraceBranch>,
    /// Start point `x,y,theta` in the open quadrant.
    #[arg(long, value_parser = triple, allow_hyphen_values = true)]
    pub from: Option<[f64; 3]>,
    /// Trace backward from `--from` as well.
    #[arg(long, requires = "from", conflicts_with = "branch")]
    pub both_directions: bool,
    /// CSV of the samples [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with the events, stops and classification.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

struct Traced {
    curve: TracedCurve,
    events: Vec<Event>,
    stops: Value,
    failed: Option<String>,
    classification: Option<SolutionType>,
}

fn stop_failure(stops: &[Stop]) -> Option<String> {
    stops
        .iter()
        .find(|s| s.is_numeric_failure())
        .map(|s| match s {
            Stop::StepUnderflow { t, dt } => format!("step size underflow at t = {t}: dt = {dt:e}"),
            Stop::StepLimit { t } => format!("step limit reached at t = {t}"),
            Stop::Event { .. } => unreachable!(),
        })
}

fn two_sided(
    curve: TracedCurve,
    events: Vec<Event>,
    fwd: Stop,
    back: Stop,
) -> Result<Traced, CliError> {
    let failed = stop_failure(&[fwd, back]);
    let classification = if failed.is_none() {
        Some(classify_curve(&curve, &events)?)
    } else {
        None
    };
    Ok(Traced {
        curve,
        events,
        stops: json!({ "forward": fwd, "backward": back }),
        failed,
        classification,
    })
}

fn trace(params: &Params, a: &TraceArgs, cfg: &IntegratorConfig) -> Result<Traced, CliError> {
    if let Some(b) = a.branch {
        if params.is_minimal() {
            return Err(CliError::Usage(
                "H = 0: the origin branches form the minimal cone; use `cmcrot cone`".into(),
            ));
        }
        let one = |br: Branch| -> Result<Traced, CliError> {
            let out = trace_type_e_branch(params, br, cfg)?;
            Ok(Traced {
                failed: stop_failure(&[out.stop]),
                stops: json!({ "stop": out.stop }),
                curve: out.curve,
                events: out.events,
                classification: None,
            })
        };
        return match b {
            TraceBranch::Unstable => one(Branch::UnstableP5),
            TraceBranch::Stable => one(Branch::StableP6),
            TraceBranch::Both => {
                let g = compose_type_e(params, cfg)?;
                two_sided(g.curve, g.events, g.forward, g.backward)
            }
        };
    }
    let [x, y, theta] = a.from.expect("clap requires --from without --branch");
    let s0 = ProfileState::new(x, y, theta);
    if !s0.in_open_quadrant() || !theta.is_finite() {
        return Err(CliError::Usage(format!(
            "start ({x}, {y}, {theta}) must have x, y > 0 and finite theta"
        )));
    }
    if a.both_directions {
        let g = trace_global(params, &s0, cfg)?;
        two_sided(g.curve, g.events, g.forward, g.backward)
    } else {
        let out = trace_profile(params, &s0, Direction::Forward, cfg)?;
        Ok(Traced {
            failed: stop_failure(&[out.stop]),
            stops: json!({ "stop": out.stop }),
            curve: out.curve,
            events: out.events,
            classification: None,
        })
    }
}

fn events_json(params: &Params, t: &Traced) -> Value {
    let events: Vec<Event> = t
        .events
        .iter()
        .map(|e| Event {
            state: ProfileState {
                theta: canonical_theta(e.state.theta),
                ..e.state
            },
            ..*e
        })
        .collect();
    json!({
        "params": { "p": params.p(), "q": params.q(), "H": params.h() },
        "provenance": t.curve.provenance,
        "stops": t.stops,
        "events": events,
        "classification": t.classification,
        "max_residual": t.curve.max_abs_residual(),
        "samples": t.curve.len(),
    })
}

pub fn run(a: &TraceArgs) -> Result<(), CliError> {
    let params = a.params.params()?;
    let cfg = a.num.integrator()?;
    let t = trace(&params, a, &cfg)?;
    log::info!(
        "{} samples, {} events, max residual {:.2e}",
        t.curve.len(),
        t.events.len(),
        t.curve.max_abs_residual()
    );
    output::write_csv(&t.curve, &mut *output::sink(a.out.as_deref())?)?;
    if let Some(path) = &a.events {
        output::write_json(&events_json(&params, &t), &mut *output::sink(Some(path))?)?;
    }
    if let Some(path) = &a.svg {
        let title = format!(
            "profile curve, p = {}, q = {}, H = {}",
            params.p(),
            params.q(),
            params.h()
        );
        std::fs::write(path, svg::profile(&t.curve, &t.events, &title))?;
    }
    match t.failed {
        Some(msg) => Err(CliError::Numeric(msg)),
        None => Ok(()),
    }
}
