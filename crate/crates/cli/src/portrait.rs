//! Phase portrait of the flow on the exceptional divisor, drawn on
//! `θ ∈ [0, 2π] × α ∈ [0, π/2]`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use cmcrot_core::equilibria::{find_equilibria_2d, Kind};
use cmcrot_core::integrate::dopri::Stepper;
use cmcrot_core::integrate::IntegratorConfig;
use cmcrot_core::model::{canonical_theta, eval_tilde_y0, jacobian_tilde_y0};
use cmcrot_core::Params;

use crate::svg::{Frame, Svg};

const MAX_TIME: f64 = 40.0;
const MAX_STEPS: usize = 5000;
/// Offset of separatrix seeds from their saddle.
const SEPARATRIX_EPS: f64 = 1e-6;

/// Integral curve through `(α, θ)` in the direction `sign`, as `(α, θ)`
/// points with θ unreduced. Stops near an equilibrium.
pub fn orbit(params: &Params, start: [f64; 2], sign: f64, cfg: &IntegratorConfig) -> Vec<[f64; 2]> {
    let f = move |y: &[f64; 2]| {
        let v = eval_tilde_y0(params, y[0], y[1]);
        [sign * v[0], sign * v[1]]
    };
    let mut st = Stepper::new(f, start, cfg.tolerance(), 0.05, None);
    let mut pts = vec![start];
    for _ in 0..MAX_STEPS {
        if st.elapsed > MAX_TIME {
            break;
        }
        let Ok(step) = st.advance() else { break };
        let [a, t] = step.y1;
        if !(-1e-9..=FRAC_PI_2 + 1e-9).contains(&a) {
            break;
        }
        pts.push([a, t]);
        let v = st.current_derivative();
        if v[0].hypot(v[1]) < 1e-9 {
            break;
        }
    }
    pts
}

/// Splits a curve into `(θ, α)` polylines with θ reduced to `[0, 2π)`.
fn wrapped(pts: &[[f64; 2]]) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    let mut prev: Option<f64> = None;
    for &[a, t] in pts {
        let th = canonical_theta(t);
        if prev.is_some_and(|p| (th - p).abs() > PI) {
            out.push(Vec::new());
        }
        out.last_mut().expect("nonempty").push((th, a));
        prev = Some(th);
    }
    out.retain(|l| l.len() > 1);
    out
}

/// Eigenvector of a 2×2 matrix for the real eigenvalue `mu`.
fn eigenvector(j: &[[f64; 2]; 2], mu: f64) -> [f64; 2] {
    let a = [j[0][1], mu - j[0][0]];
    let b = [mu - j[1][1], j[1][0]];
    let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) {
        a
    } else {
        b
    };
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Separatrices of the saddles `p₁…p₄`: unstable ones traced forward,
/// stable ones backward.
pub fn separatrices(params: &Params, cfg: &IntegratorConfig) -> Vec<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for e in find_equilibria_2d(params) {
        if e.kind != Kind::Saddle {
            continue;
        }
        let j = jacobian_tilde_y0(params, e.alpha, e.theta);
        for mu in e.eigenvalues.map(|z| z.re) {
            let v = eigenvector(&j, mu);
            for s in [1.0, -1.0] {
                let a = e.alpha + s * SEPARATRIX_EPS * v[0];
                if !(0.0..=FRAC_PI_2).contains(&a) {
                    continue;
                }
                let start = [a, e.theta + s * SEPARATRIX_EPS * v[1]];
                out.push(orbit(params, start, mu.signum(), cfg));
            }
        }
    }
    out
}

fn marker_color(kind: Kind) -> &'static str {
    match kind {
        Kind::Saddle => "orange",
        Kind::AttractorFocus | Kind::AttractorNode => "seagreen",
        Kind::RepellerFocus | Kind::RepellerNode => "crimson",
    }
}

pub fn render(params: &Params, density: usize, cfg: &IntegratorConfig) -> String {
    let mut svg = Svg::new(Frame {
        x: (0.0, TAU),
        y: (0.0, FRAC_PI_2),
        width: 720.0,
        height: 240.0,
        margin: 40.0,
    });
    let rows = (density / 3).max(2);
    for i in 0..density {
        for j in 0..rows {
            let t = TAU * (i as f64 + 0.5) / density as f64;
            let a = FRAC_PI_2 * (j as f64 + 0.5) / rows as f64;
            for sign in [1.0, -1.0] {
                for line in wrapped(&orbit(params, [a, t], sign, cfg)) {
                    svg.polyline(&line, "lightsteelblue", 0.8);
                }
            }
        }
    }
    for sep in separatrices(params, cfg) {
        for line in wrapped(&sep) {
            svg.polyline(&line, "black", 1.4);
        }
    }
    for e in find_equilibria_2d(params) {
        let label = format!("{} {}", e.label.name(), e.kind);
        svg.marker(
            canonical_theta(e.theta),
            e.alpha,
            marker_color(e.kind),
            &label,
        );
    }
    let (m, w, h) = (svg.frame.margin, svg.frame.width, svg.frame.height);
    svg.text(m + w / 2.0, m + h + 28.0, "theta");
    svg.text(4.0, m + h / 2.0, "alpha");
    svg.finish(&format!(
        "flow on the divisor, p = {}, q = {}",
        params.p(),
        params.q()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmcrot_core::equilibria::alpha0;

    fn params(p: u32, q: u32) -> Params {
        Params::new(p, q, 0.0).unwrap()
    }

    /// Total turning of `orbit − p₅` for an orbit started near `p₅`.
    fn rotation_into_p5(par: &Params) -> f64 {
        let a0 = alpha0(par);
        let cfg = IntegratorConfig::default();
        let pts = orbit(par, [a0 + 0.03, a0 + 0.04], 1.0, &cfg);
        let ang: Vec<f64> = pts
            .iter()
            .take_while(|p| (p[0] - a0).hypot(p[1] - a0) > 1e-7)
            .map(|p| (p[1] - a0).atan2(p[0] - a0))
            .collect();
        ang.windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                d - TAU * (d / TAU).round()
            })
            .sum::<f64>()
            .abs()
    }

    #[test]
    fn nodes_do_not_spiral() {
        assert!(rotation_into_p5(&params(4, 4)) < PI);
        assert!(rotation_into_p5(&params(3, 5)) < PI);
        assert!(rotation_into_p5(&params(3, 4)) > PI);
        assert!(rotation_into_p5(&params(2, 2)) > TAU);
    }

    #[test]
    fn separatrices_leave_and_enter_saddles() {
        let par = params(2, 2);
        let seps = separatrices(&par, &IntegratorConfig::default());
        assert!(seps.len() >= 8);
        for s in &seps {
            assert!(s.len() > 2);
            assert!(s.iter().all(|p| (-1e-9..=FRAC_PI_2 + 1e-9).contains(&p[0])));
        }
    }

    #[test]
    fn svg_marks_six_equilibria() {
        let s = render(&params(2, 2), 4, &IntegratorConfig::default());
        assert!(s.starts_with("<?xml"));
        assert_eq!(s.matches("<circle").count(), 6);
        for l in ["p1", "p2", "p3", "p4", "p5", "p6"] {
            assert!(s.contains(&format!(">{l} ")));
        }
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn wrapping_breaks_polylines() {
        let pts = [
            [0.5, TAU - 0.1],
            [0.5, TAU - 0.01],
            [0.5, TAU + 0.05],
            [0.5, TAU + 0.1],
        ];
        let lines = wrapped(&pts);
        assert_eq!(lines.len(), 2);
    }
}
