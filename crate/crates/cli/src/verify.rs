//! The invariant suite as a TAP report.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use clap::Args;
use cmcrot_core::classify::{classify_global, cone, cone_drift};
use cmcrot_core::equilibria::{
    discriminant, find_equilibria_2d, numeric_spectrum_2d, numeric_spectrum_3d, saddle3d,
    EquilibriumLabel, SaddleLabel,
};
use cmcrot_core::integrate::{compose_type_e, trace_global, IntegratorConfig};
use cmcrot_core::linalg::spectrum_distance;
use cmcrot_core::manifolds::{closed_form_for_branch, series_coefficients, Branch};
use cmcrot_core::model::{eval_tilde_y, eval_tilde_y0, eval_x, eval_y};
use cmcrot_core::{BlowupState, Params, ProfileState};
use rayon::prelude::*;

use crate::args::{range, NumArgs};
use crate::CliError;

pub const CHECKS: [&str; 6] = [
    "series",
    "spectra",
    "identities",
    "type_e",
    "cone",
    "classification",
];

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub num: NumArgs,
    /// Range of p, as `a-b`.
    #[arg(long, value_parser = range, default_value = "2-6")]
    pub p_range: (u32, u32),
    #[arg(long, value_parser = range, default_value = "2-6")]
    pub q_range: (u32, u32),
    /// Comma-separated nonzero mean curvatures.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-1,0.5,1,2"
    )]
    pub h_list: Vec<f64>,
    /// Small sweep: p, q in 2-4 and H in {-1, 1}.
    #[arg(long)]
    pub quick: bool,
    /// Makes the named check fail, to exercise the harness.
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn series(par: &Params) -> Check {
    let mut worst: f64 = 0.0;
    for br in Branch::BOTH {
        let s = series_coefficients(par, br, 6).map_err(|e| e.to_string())?;
        let c = closed_form_for_branch(par, br);
        for (got, want) in [
            (s.l(1), c.l1),
            (s.l(2), c.l2),
            (s.k(1), c.k1),
            (s.k(2), c.k2),
        ] {
            worst = worst.max((got - want).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("coefficient error {worst:.2e}"))?;
    Ok(format!("max error {worst:.1e}"))
}

fn spectra(par: &Params) -> Check {
    let mut worst: f64 = 0.0;
    for eq in find_equilibria_2d(par) {
        worst = worst.max(spectrum_distance(
            &eq.eigenvalues,
            &numeric_spectrum_2d(par, eq.alpha, eq.theta),
        ));
        if eq.label == EquilibriumLabel::P5 {
            let d = discriminant(par);
            ensure(eq.kind.is_focus() == (d < 0.0), || {
                format!("p5 is {} with D = {d}", eq.kind)
            })?;
        }
    }
    for label in [SaddleLabel::P5, SaddleLabel::P6] {
        let s = saddle3d(par, label);
        worst = worst.max(spectrum_distance(
            &s.eigenvalues,
            &numeric_spectrum_3d(par, &s.location),
        ));
    }
    ensure(worst <= 1e-6, || format!("spectral distance {worst:.2e}"))?;
    Ok(format!("max distance {worst:.1e}"))
}

fn identities(par: &Params) -> Check {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    let mut n = 0;
    for i in 1..8 {
        for j in 1..8 {
            let r = 0.3 * f64::from(i);
            let a = FRAC_PI_2 * f64::from(j) / 8.0;
            let t = 0.9 * f64::from(i * j) - 3.0;
            let (sa, ca) = a.sin_cos();
            let s = ProfileState::new(r * ca, r * sa, t);
            let x = eval_x(par, &s).map_err(|e| e.to_string())?;
            let y = eval_y(par, &s);
            let xy = s.x * s.y;
            ensure((0..3).all(|k| close(y[k], xy * x[k])), || {
                format!("Y = xyX fails at {s:?}")
            })?;
            let v = eval_tilde_y(par, &BlowupState::new(r, a, t));
            let pushed = [
                r * (ca * v[0] - r * sa * v[1]),
                r * (sa * v[0] + r * ca * v[1]),
                r * v[2],
            ];
            ensure((0..3).all(|k| close(pushed[k], y[k])), || {
                format!("pushforward fails at {s:?}")
            })?;
            let d = eval_tilde_y(par, &BlowupState::new(0.0, a, t));
            let d0 = eval_tilde_y0(par, a, t);
            ensure(d[0] == 0.0 && d[1] == d0[0] && d[2] == d0[1], || {
                format!("divisor restriction fails at alpha = {a}, theta = {t}")
            })?;
            n += 1;
        }
    }
    Ok(format!("{n} states"))
}

fn type_e(par: &Params, cfg: &IntegratorConfig) -> Check {
    let g = compose_type_e(par, cfg).map_err(|e| e.to_string())?;
    ensure(!g.has_numeric_failure(), || {
        format!("stops {:?} / {:?}", g.forward, g.backward)
    })?;
    let c = classify_global(&g).map_err(|e| e.to_string())?;
    ensure(c.tag.to_string() == "E" && !c.partial, || {
        format!("classified {} (partial {})", c.tag, c.partial)
    })?;
    let res = g.curve.max_abs_residual();
    ensure(res <= 1e-6, || format!("residual {res:.2e}"))?;
    Ok(format!("{} samples, residual {res:.1e}", g.curve.len()))
}

fn cone_check(par: &Params, cfg: &IntegratorConfig, length: f64) -> Check {
    let c = cone(&par.with_h(0.0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (drift, curve) = cone_drift(&c, 1.0, length, cfg).map_err(|e| e.to_string())?;
    ensure(drift <= 1e-8, || format!("drift {drift:.2e}"))?;
    let res = curve.max_abs_residual();
    ensure(res <= 1e-6, || format!("residual {res:.2e}"))?;
    Ok(format!("drift {drift:.1e} over {length}"))
}

fn classification(par: &Params, cfg: &IntegratorConfig) -> Check {
    let s = 1.0 / par.h().abs();
    let g = trace_global(par, &ProfileState::new(s, s, 0.0), cfg).map_err(|e| e.to_string())?;
    ensure(!g.has_numeric_failure(), || {
        format!("stops {:?} / {:?}", g.forward, g.backward)
    })?;
    let c = classify_global(&g).map_err(|e| e.to_string())?;
    Ok(format!("type {}", c.tag))
}

struct Cell {
    params: Params,
    results: Vec<(&'static str, Check)>,
}

fn run_cell(par: Params, cfg: &IntegratorConfig, quick: bool, fault: Option<&str>) -> Cell {
    let length = if quick { 100.0 } else { 1000.0 };
    let mut results: Vec<(&'static str, Check)> = vec![
        ("series", series(&par)),
        ("spectra", spectra(&par)),
        ("identities", identities(&par)),
        ("type_e", type_e(&par, cfg)),
        ("cone", cone_check(&par, cfg, length)),
        ("classification", classification(&par, cfg)),
    ];
    for (name, r) in &mut results {
        if Some(*name) == fault {
            *r = Err("injected fault".into());
        }
    }
    Cell {
        params: par,
        results,
    }
}

fn yaml_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

pub fn run(a: &VerifyArgs) -> Result<(), CliError> {
    let cfg = a.num.integrator()?;
    if let Some(f) = &a.inject_fault {
        if !CHECKS.contains(&f.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown check {f:?} (one of {})",
                CHECKS.join(", ")
            )));
        }
    }
    let (p_range, q_range, hs) = if a.quick {
        ((2, 4), (2, 4), vec![-1.0, 1.0])
    } else {
        (a.p_range, a.q_range, a.h_list.clone())
    };
    let mut grid = Vec::new();
    for p in p_range.0..=p_range.1 {
        for q in q_range.0..=q_range.1 {
            for &h in &hs {
                if h == 0.0 || !h.is_finite() {
                    return Err(CliError::Usage(format!(
                        "H values must be finite and nonzero (got {h})"
                    )));
                }
                grid.push(Params::new(p, q, h)?);
            }
        }
    }
    let fault = a.inject_fault.as_deref();
    let cells: Vec<Cell> = grid
        .into_par_iter()
        .map(|par| run_cell(par, &cfg, a.quick, fault))
        .collect();

    let total: usize = cells.iter().map(|c| c.results.len()).sum();
    let mut out = std::io::stdout().lock();
    writeln!(out, "TAP version 13")?;
    writeln!(out, "1..{total}")?;
    let mut k = 0;
    let mut failed = Vec::new();
    for cell in &cells {
        let par = &cell.params;
        for (name, r) in &cell.results {
            k += 1;
            let id = format!("{name} p={} q={} H={}", par.p(), par.q(), par.h());
            match r {
                Ok(msg) => writeln!(out, "ok {k} - {id} # {msg}")?,
                Err(msg) => {
                    writeln!(out, "not ok {k} - {id}")?;
                    writeln!(out, "  ---")?;
                    writeln!(out, "  check: {name}")?;
                    writeln!(out, "  message: {}", yaml_quote(msg))?;
                    writeln!(out, "  ...")?;
                    failed.push(id);
                }
            }
        }
    }
    out.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "{} of {total} checks failed: {}",
            failed.len(),
            failed.join("; ")
        )))
    }
}
