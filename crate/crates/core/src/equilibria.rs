//! Equilibria of the divisor field `Ỹ₀`, the saddles `P₅`, `P₆` of `Ỹ` and
//! the singular lines over the axis equilibria.
//!
//! Every spectrum is given in closed form and can be cross-checked against a
//! finite-difference Jacobian through [`numeric_spectrum_2d`] and
//! [`numeric_spectrum_3d`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg;
use crate::model::{eval_tilde_y, eval_tilde_y0, jacobian_tilde_y0, BlowupState, Params};

/// Finite-difference step for numeric Jacobians.
pub const FD_STEP: f64 = 1e-5;

/// An eigenvalue is treated as complex when `|Im| > COMPLEX_EPS·(1 + |Re|)`.
pub const COMPLEX_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumLabel {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
}

impl EquilibriumLabel {
    pub const ALL: [EquilibriumLabel; 6] = [
        EquilibriumLabel::P1,
        EquilibriumLabel::P2,
        EquilibriumLabel::P3,
        EquilibriumLabel::P4,
        EquilibriumLabel::P5,
        EquilibriumLabel::P6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EquilibriumLabel::P1 => "p1",
            EquilibriumLabel::P2 => "p2",
            EquilibriumLabel::P3 => "p3",
            EquilibriumLabel::P4 => "p4",
            EquilibriumLabel::P5 => "p5",
            EquilibriumLabel::P6 => "p6",
        }
    }
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Saddle,
    AttractorFocus,
    AttractorNode,
    RepellerFocus,
    RepellerNode,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Saddle => "saddle",
            Kind::AttractorFocus => "attractor-focus",
            Kind::AttractorNode => "attractor-node",
            Kind::RepellerFocus => "repeller-focus",
            Kind::RepellerNode => "repeller-node",
        }
    }

    pub fn is_focus(self) -> bool {
        matches!(self, Kind::AttractorFocus | Kind::RepellerFocus)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn is_complex(z: Complex64) -> bool {
    z.im.abs() > COMPLEX_EPS * (1.0 + z.re.abs())
}

/// Classifies a planar hyperbolic equilibrium from its two eigenvalues.
///
/// Returns `None` for a non-hyperbolic spectrum.
pub fn classify_kind(eig: [Complex64; 2]) -> Option<Kind> {
    if eig.iter().any(|z| z.re == 0.0) {
        return None;
    }
    let focus = is_complex(eig[0]) || is_complex(eig[1]);
    match (eig[0].re > 0.0, eig[1].re > 0.0) {
        (true, true) if focus => Some(Kind::RepellerFocus),
        (true, true) => Some(Kind::RepellerNode),
        (false, false) if focus => Some(Kind::AttractorFocus),
        (false, false) => Some(Kind::AttractorNode),
        _ => Some(Kind::Saddle),
    }
}

/// `α₀ = arctan √((p−1)/(q−1))`, the direction of the cone and of both
/// origin branches.
pub fn alpha0(params: &Params) -> f64 {
    (params.pm1() / params.qm1()).sqrt().atan()
}

/// `λ₀ = sin α₀ cos α₀ = √((p−1)(q−1))/(p+q−2)`.
pub fn lambda0(params: &Params) -> f64 {
    (params.pm1() * params.qm1()).sqrt() / f64::from(params.p() + params.q() - 2)
}

/// `D = (p+q)² − 10(p+q) + 17`; foci for `D < 0`, nodes otherwise.
pub fn discriminant(params: &Params) -> f64 {
    let s = f64::from(params.p() + params.q());
    s * s - 10.0 * s + 17.0
}

fn principal_sqrt(d: f64) -> Complex64 {
    Complex64::new(d, 0.0).sqrt()
}

/// Closed-form eigenvalues `μ_a, μ_b = λ₀(−(p+q−1) ± √D)/2` of `DỸ₀(p₅)`.
pub fn p5_spectrum(params: &Params) -> [Complex64; 2] {
    let l0 = lambda0(params);
    let root = principal_sqrt(discriminant(params));
    let n = params.dim();
    [(root - n) * (l0 / 2.0), (-root - n) * (l0 / 2.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium2D {
    pub label: EquilibriumLabel,
    pub alpha: f64,
    pub theta: f64,
    pub eigenvalues: [Complex64; 2],
    pub kind: Kind,
}

impl Equilibrium2D {
    pub fn location(&self) -> (f64, f64) {
        (self.alpha, self.theta)
    }
}

/// Location of an equilibrium of `Ỹ₀` in `[0, π/2] × [0, 2π)`.
pub fn location(params: &Params, label: EquilibriumLabel) -> (f64, f64) {
    let a0 = alpha0(params);
    match label {
        EquilibriumLabel::P1 => (0.0, FRAC_PI_2),
        EquilibriumLabel::P2 => (0.0, 3.0 * FRAC_PI_2),
        EquilibriumLabel::P3 => (FRAC_PI_2, 0.0),
        EquilibriumLabel::P4 => (FRAC_PI_2, PI),
        EquilibriumLabel::P5 => (a0, a0),
        EquilibriumLabel::P6 => (a0, a0 + PI),
    }
}

/// Closed-form eigenvalues at each equilibrium of `Ỹ₀`.
///
/// The Jacobians at `p₁…p₄` are triangular with diagonals `(1, −(p−1))` and
/// `(1, −(q−1))` up to sign; `p₆` carries the negated spectrum of `p₅`.
pub fn closed_form_spectrum_2d(params: &Params, label: EquilibriumLabel) -> [Complex64; 2] {
    let re = |a: f64, b: f64| [Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
    let (pm1, qm1) = (params.pm1(), params.qm1());
    match label {
        EquilibriumLabel::P1 => re(1.0, -pm1),
        EquilibriumLabel::P2 => re(pm1, -1.0),
        EquilibriumLabel::P3 => re(1.0, -qm1),
        EquilibriumLabel::P4 => re(qm1, -1.0),
        EquilibriumLabel::P5 => p5_spectrum(params),
        EquilibriumLabel::P6 => {
            let [a, b] = p5_spectrum(params);
            [-b, -a]
        }
    }
}

/// All six equilibria of `Ỹ₀` with closed-form spectra.
pub fn find_equilibria_2d(params: &Params) -> Vec<Equilibrium2D> {
    EquilibriumLabel::ALL
        .iter()
        .map(|&label| {
            let (alpha, theta) = location(params, label);
            let mut eigenvalues = closed_form_spectrum_2d(params, label);
            linalg::sort_spectrum(&mut eigenvalues);
            let kind = classify_kind(eigenvalues).expect("equilibria of Ỹ₀ are hyperbolic");
            Equilibrium2D {
                label,
                alpha,
                theta,
                eigenvalues,
                kind,
            }
        })
        .collect()
}

/// Eigenvalues of the analytic Jacobian of `Ỹ₀` at an arbitrary point.
pub fn analytic_spectrum_2d(params: &Params, alpha: f64, theta: f64) -> Vec<Complex64> {
    linalg::eigenvalues_2x2(&jacobian_tilde_y0(params, alpha, theta))
}

/// Eigenvalues of a central-difference Jacobian of `Ỹ₀`.
pub fn numeric_spectrum_2d(params: &Params, alpha: f64, theta: f64) -> Vec<Complex64> {
    let jac = linalg::fd_jacobian(
        |v: &[f64; 2]| eval_tilde_y0(params, v[0], v[1]),
        [alpha, theta],
        FD_STEP,
    );
    linalg::eigenvalues_2x2(&jac)
}

/// Central-difference Jacobian of `Ỹ` in `(r, α, θ)`.
pub fn fd_jacobian_3d(params: &Params, b: &BlowupState) -> [[f64; 3]; 3] {
    linalg::fd_jacobian(
        |v: &[f64; 3]| eval_tilde_y(params, &BlowupState::new(v[0], v[1], v[2])),
        [b.r, b.alpha, b.theta],
        FD_STEP,
    )
}

pub fn numeric_spectrum_3d(params: &Params, b: &BlowupState) -> Vec<Complex64> {
    linalg::eigenvalues_3x3(&fd_jacobian_3d(params, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SaddleLabel {
    P5,
    P6,
}

impl SaddleLabel {
    pub fn name(self) -> &'static str {
        match self {
            SaddleLabel::P5 => "P5",
            SaddleLabel::P6 => "P6",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Saddle3D {
    pub label: SaddleLabel,
    pub location: BlowupState,
    /// `(μ₁, μ₂, μ₃)`: the radial eigenvalue first, then the divisor pair.
    pub eigenvalues: [Complex64; 3],
    pub unstable_dim: usize,
}

/// The hyperbolic saddles of `Ỹ` on the divisor over `p₅` and `p₆`.
///
/// At `P₅`, `μ₁ = λ₀` is the only expanding direction and `(μ₂, μ₃)` is the
/// spectrum of `DỸ₀(p₅)`; `P₆` carries the negated spectrum.
pub fn saddle3d(params: &Params, label: SaddleLabel) -> Saddle3D {
    let l0 = lambda0(params);
    let [mu2, mu3] = p5_spectrum(params);
    let mu1 = Complex64::new(l0, 0.0);
    let (eq, eigenvalues) = match label {
        SaddleLabel::P5 => (EquilibriumLabel::P5, [mu1, mu2, mu3]),
        SaddleLabel::P6 => (EquilibriumLabel::P6, [-mu1, -mu2, -mu3]),
    };
    let (alpha, theta) = location(params, eq);
    let unstable_dim = eigenvalues.iter().filter(|z| z.re > 0.0).count();
    Saddle3D {
        label,
        location: BlowupState::new(0.0, alpha, theta),
        eigenvalues,
        unstable_dim,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LineLabel {
    L1,
    L2,
    L3,
    L4,
}

impl LineLabel {
    pub fn name(self) -> &'static str {
        match self {
            LineLabel::L1 => "l1",
            LineLabel::L2 => "l2",
            LineLabel::L3 => "l3",
            LineLabel::L4 => "l4",
        }
    }
}

/// A line `{(r, pᵢ) : r ≥ 0}` of equilibria of `Ỹ` over an axis equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularLine {
    pub label: LineLabel,
    pub base: Equilibrium2D,
    pub transverse_eigenvalues: [f64; 2],
}

/// Radii at which [`singular_lines`] checks that `Ỹ` vanishes.
pub const LINE_SAMPLE_RADII: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

/// The four normally hyperbolic lines over `p₁…p₄`.
///
/// # Panics
///
/// If `Ỹ` fails to vanish along a line, which would mean the field itself is
/// wrong.
pub fn singular_lines(params: &Params) -> Vec<SingularLine> {
    let labels = [LineLabel::L1, LineLabel::L2, LineLabel::L3, LineLabel::L4];
    find_equilibria_2d(params)
        .into_iter()
        .take(4)
        .zip(labels)
        .map(|(base, label)| {
            for r in LINE_SAMPLE_RADII {
                let v = eval_tilde_y(params, &BlowupState::new(r, base.alpha, base.theta));
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                assert!(
                    norm <= 1e-12,
                    "Ỹ does not vanish on {} at r = {r}",
                    label.name()
                );
            }
            SingularLine {
                label,
                base,
                transverse_eigenvalues: [base.eigenvalues[0].re, base.eigenvalues[1].re],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn params(p: u32, q: u32, h: f64) -> Params {
        Params::new(p, q, h).unwrap()
    }

    #[test]
    fn alpha0_examples() {
        assert_abs_diff_eq!(alpha0(&params(2, 2, 0.0)), FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha0(&params(5, 2, 0.0)), 1.1071487, epsilon = 1e-7);
        assert_abs_diff_eq!(alpha0(&params(2, 5, 0.0)), 0.4636476, epsilon = 1e-7);
        for p in 2..10 {
            for q in 2..10 {
                let par = params(p, q, 0.0);
                let a = alpha0(&par);
                assert!(a > 0.0 && a < FRAC_PI_2);
                assert_abs_diff_eq!(par.qm1() * a.tan().powi(2), par.pm1(), epsilon = 1e-12);
                assert_abs_diff_eq!(a + alpha0(&par.swapped()), FRAC_PI_2, epsilon = 1e-15);
                assert_abs_diff_eq!(lambda0(&par), a.sin() * a.cos(), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn discriminant_values() {
        assert_eq!(discriminant(&params(4, 4, 0.0)), 1.0);
        assert_eq!(discriminant(&params(3, 4, 0.0)), -4.0);
        assert_eq!(discriminant(&params(2, 2, 0.0)), -7.0);
    }

    #[test]
    fn equilibria_examples() {
        let eq = find_equilibria_2d(&params(2, 2, 1.0));
        assert_eq!(eq.len(), 6);
        let p5 = eq[4];
        assert_eq!(p5.label, EquilibriumLabel::P5);
        assert_abs_diff_eq!(p5.alpha, FRAC_PI_4);
        assert_abs_diff_eq!(p5.theta, FRAC_PI_4);
        assert_eq!(p5.kind, Kind::AttractorFocus);
        assert_eq!(eq[5].kind, Kind::RepellerFocus);

        let eq = find_equilibria_2d(&params(4, 4, 1.0));
        assert_eq!(eq[4].kind, Kind::AttractorNode);
        assert_abs_diff_eq!(eq[4].eigenvalues[0].re, -1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(eq[4].eigenvalues[1].re, -2.0, epsilon = 1e-14);

        let eq = find_equilibria_2d(&params(3, 2, 1.0));
        assert_eq!(
            eq[0].eigenvalues,
            [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)]
        );
        for e in &eq[..4] {
            assert_eq!(e.kind, Kind::Saddle);
        }
    }

    #[test]
    fn residual_at_equilibria() {
        for p in 2..10 {
            for q in 2..10 {
                let par = params(p, q, 0.3);
                for e in find_equilibria_2d(&par) {
                    let v = eval_tilde_y0(&par, e.alpha, e.theta);
                    assert!(v[0].hypot(v[1]) <= 1e-12, "{} {p} {q}: {v:?}", e.label);
                }
            }
        }
    }

    #[test]
    fn p5_trace_and_determinant() {
        for p in 2..10 {
            for q in 2..10 {
                let par = params(p, q, 0.0);
                let (a, t) = location(&par, EquilibriumLabel::P5);
                let j = jacobian_tilde_y0(&par, a, t);
                let l0 = lambda0(&par);
                let s = f64::from(p + q);
                assert_abs_diff_eq!(j[0][0] + j[1][1], -l0 * (s - 1.0), epsilon = 1e-12);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                assert_abs_diff_eq!(det, 2.0 * l0 * l0 * (s - 2.0), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn saddle_examples() {
        let s = saddle3d(&params(2, 2, 1.0), SaddleLabel::P5);
        assert_abs_diff_eq!(s.eigenvalues[0].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[1].re, -0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[1].im, 7f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[2].im, -(7f64.sqrt()) / 4.0, epsilon = 1e-15);
        assert_eq!(s.unstable_dim, 1);

        let s = saddle3d(&params(3, 2, 1.0), SaddleLabel::P5);
        assert_abs_diff_eq!(s.eigenvalues[0].re, 2f64.sqrt() / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[0].re, 0.4714, epsilon = 1e-4);

        for p in 2..10 {
            for q in 2..10 {
                let par = params(p, q, 1.0);
                let s = saddle3d(&par, SaddleLabel::P5);
                let prod = s.eigenvalues[1] * s.eigenvalues[2];
                let expect = 2.0 * par.pm1() * par.qm1() / f64::from(p + q - 2);
                assert_abs_diff_eq!(prod.re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(prod.im, 0.0, epsilon = 1e-12);
                let s6 = saddle3d(&par, SaddleLabel::P6);
                for i in 0..3 {
                    assert_eq!(s6.eigenvalues[i], -s.eigenvalues[i]);
                }
                assert_eq!(s6.unstable_dim, 2);
            }
        }
    }

    #[test]
    fn singular_line_examples() {
        let lines = singular_lines(&params(2, 2, 1.0));
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0].transverse_eigenvalues, [1.0, -1.0]);
        let lines = singular_lines(&params(3, 2, 1.0));
        assert_eq!(lines[2].label, LineLabel::L3);
        assert_eq!(lines[2].transverse_eigenvalues, [1.0, -1.0]);
        for (p, q, h) in [(2, 2, 1.0), (7, 3, -2.0), (4, 9, 0.0)] {
            let par = params(p, q, h);
            for l in singular_lines(&par) {
                let v = eval_tilde_y(&par, &BlowupState::new(1.37, l.base.alpha, l.base.theta));
                assert!(v.iter().all(|c| c.abs() <= 1e-14), "{v:?}");
            }
        }
    }

    #[test]
    fn kind_classification_rules() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        assert_eq!(
            classify_kind([c(1.0, 0.0), c(-1.0, 0.0)]),
            Some(Kind::Saddle)
        );
        assert_eq!(
            classify_kind([c(-1.0, 1e-3), c(-1.0, -1e-3)]),
            Some(Kind::AttractorFocus)
        );
        assert_eq!(
            classify_kind([c(-1.0, 1e-12), c(-1.0, -1e-12)]),
            Some(Kind::AttractorNode)
        );
        assert_eq!(
            classify_kind([c(2.0, 0.0), c(1.0, 0.0)]),
            Some(Kind::RepellerNode)
        );
        assert_eq!(classify_kind([c(0.0, 1.0), c(0.0, -1.0)]), None);
    }
}
