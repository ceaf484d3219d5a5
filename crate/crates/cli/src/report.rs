//! Equilibrium, series and cone reports.

use cmcrot_core::classify::{cone, cone_drift};
use cmcrot_core::equilibria::{
    alpha0, discriminant, find_equilibria_2d, lambda0, saddle3d, singular_lines, Equilibrium2D,
    SaddleLabel,
};
use cmcrot_core::integrate::IntegratorConfig;
use cmcrot_core::manifolds::{closed_form_for_branch, series_coefficients, Branch, LowOrder};
use cmcrot_core::{Params, TracedCurve};
use serde_json::{json, Map, Value};

fn equilibrium(e: &Equilibrium2D) -> Value {
    json!({
        "alpha": e.alpha,
        "theta": e.theta,
        "eigenvalues": e.eigenvalues,
        "kind": e.kind,
    })
}

pub fn equilibria(params: &Params) -> Value {
    let mut out = Map::new();
    out.insert("p".into(), json!(params.p()));
    out.insert("q".into(), json!(params.q()));
    out.insert("H".into(), json!(params.h()));
    out.insert("alpha0".into(), json!(alpha0(params)));
    out.insert("lambda0".into(), json!(lambda0(params)));
    out.insert("D".into(), json!(discriminant(params)));
    for e in find_equilibria_2d(params) {
        out.insert(e.label.name().into(), equilibrium(&e));
    }
    let saddles: Map<String, Value> = [SaddleLabel::P5, SaddleLabel::P6]
        .into_iter()
        .map(|label| {
            let s = saddle3d(params, label);
            (
                label.name().to_string(),
                json!({
                    "r": s.location.r,
                    "alpha": s.location.alpha,
                    "theta": s.location.theta,
                    "eigenvalues": s.eigenvalues,
                    "unstable_dim": s.unstable_dim,
                }),
            )
        })
        .collect();
    out.insert("saddles".into(), Value::Object(saddles));
    let lines: Vec<Value> = singular_lines(params)
        .iter()
        .map(|l| {
            json!({
                "label": l.label.name(),
                "base": l.base.label.name(),
                "alpha": l.base.alpha,
                "theta": l.base.theta,
                "transverse_eigenvalues": l.transverse_eigenvalues,
            })
        })
        .collect();
    out.insert("lines".into(), Value::Array(lines));
    Value::Object(out)
}

pub struct SeriesReport {
    pub json: Value,
    pub rows: Vec<(usize, f64, f64)>,
}

pub fn series(params: &Params, branch: Branch, order: usize) -> cmcrot_core::Result<SeriesReport> {
    let s = series_coefficients(params, branch, order)?;
    let LowOrder { l1, l2, k1, k2 } = closed_form_for_branch(params, branch);
    let json = json!({
        "p": params.p(),
        "q": params.q(),
        "H": params.h(),
        "branch": branch.name(),
        "order": order,
        "alpha0": s.alpha0,
        "theta_star": s.theta_star,
        "l": s.l,
        "k": s.k,
        "closed_form": { "l1": l1, "l2": l2, "k1": k1, "k2": k2 },
        "order3_ratio": s.order3_ratio(),
    });
    let rows = (1..=order).map(|i| (i, s.l(i), s.k(i))).collect();
    Ok(SeriesReport { json, rows })
}

pub struct ConeReport {
    pub json: Value,
    pub exact: TracedCurve,
}

/// The exact cone on `[t_min, t_max]` and a trace started on it.
pub fn cone_report(
    params: &Params,
    t_min: f64,
    t_max: f64,
    samples: usize,
    length: f64,
    cfg: &IntegratorConfig,
) -> cmcrot_core::Result<ConeReport> {
    let c = cone(params)?;
    let n = samples.max(2);
    let ts: Vec<f64> = (0..n)
        .map(|i| t_min * (t_max / t_min).powf(i as f64 / (n - 1) as f64))
        .collect();
    let exact = c.sample(&ts)?;
    let mut curvature_error: f64 = 0.0;
    for s in &exact.samples {
        let k = c.curvatures(s.t);
        curvature_error = curvature_error
            .max((s.curvatures.lambda1 - k.lambda1).abs())
            .max((s.curvatures.lambda2 - k.lambda2).abs())
            .max((s.curvatures.lambda3 - k.lambda3).abs());
    }
    let (drift, traced) = cone_drift(&c, t_min.max(1e-3), length, cfg)?;
    let json = json!({
        "p": params.p(),
        "q": params.q(),
        "alpha0": c.alpha0,
        "slope": c.alpha0.tan(),
        "t_range": [t_min, t_max],
        "max_curvature_error": curvature_error,
        "max_residual": exact.max_abs_residual(),
        "drift": { "length": length, "max_distance": drift, "max_residual": traced.max_abs_residual() },
    });
    Ok(ConeReport { json, exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn equilibria_example_values() {
        let v = equilibria(&Params::new(2, 2, 1.0).unwrap());
        assert!((v["alpha0"].as_f64().unwrap() - 0.7853982).abs() < 1e-7);
        assert_eq!(v["D"].as_f64(), Some(-7.0));
        assert_eq!(v["p5"]["kind"], "attractor-focus");
        let v = equilibria(&Params::new(4, 4, 1.0).unwrap());
        assert_eq!(v["p5"]["kind"], "attractor-node");
        assert_eq!(v["lines"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn series_rows_follow_the_order() {
        let r = series(&Params::new(3, 2, 1.0).unwrap(), Branch::UnstableP5, 4).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!((r.rows[0].1 - 4.0 / 11.0).abs() < 1e-12);
        let z = series(&Params::new(3, 2, 0.0).unwrap(), Branch::UnstableP5, 4).unwrap();
        assert!(z.rows.iter().all(|&(_, l, k)| l == 0.0 && k == 0.0));
    }
}
