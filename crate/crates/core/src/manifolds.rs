//! Power-series parametrizations `α(r)`, `θ(r)` of the one-dimensional
//! invariant manifolds `Wᵘ(P₅)` and `Wˢ(P₆)` of `Ỹ`.
//!
//! Substituting `α = α₀ + Σ lᵢ rⁱ`, `θ = θ* + Σ kᵢ rⁱ` into the 1-forms
//! `ω₁ = Ỹ_α − Ỹ_r α'` and `ω₂ = Ỹ_θ − Ỹ_r θ'` and collecting powers of `r`
//! gives, at each order, a 2×2 linear system for `(lᵢ, kᵢ)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::equilibria::{alpha0, lambda0};
use crate::error::{Error, Result};
use crate::model::{eval_tilde_y, BlowupState, Params, ProfileState};
use crate::series::Truncated;

/// Default truncation order of the series.
pub const DEFAULT_ORDER: usize = 4;

/// Default seed radius.
pub const DEFAULT_SEED_R0: f64 = 1e-4;

/// Pivot threshold below which a per-order system counts as singular.
pub const PIVOT_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `Wᵘ(P₅)`, leaving the origin.
    #[serde(rename = "unstable_P5")]
    UnstableP5,
    /// `Wˢ(P₆)`, arriving at the origin.
    #[serde(rename = "stable_P6")]
    StableP6,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::UnstableP5, Branch::StableP6];

    pub fn name(self) -> &'static str {
        match self {
            Branch::UnstableP5 => "unstable_P5",
            Branch::StableP6 => "stable_P6",
        }
    }

    /// `+1` over `p₅`, `−1` over `p₆`: `cos(θ* − α₀)`.
    pub fn sigma(self) -> f64 {
        match self {
            Branch::UnstableP5 => 1.0,
            Branch::StableP6 => -1.0,
        }
    }

    /// `θ*`, the tangent angle on the divisor.
    pub fn theta_star(self, params: &Params) -> f64 {
        match self {
            Branch::UnstableP5 => alpha0(params),
            Branch::StableP6 => alpha0(params) + PI,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unstable" | "unstable_p5" | "u" => Ok(Branch::UnstableP5),
            "stable" | "stable_p6" | "s" => Ok(Branch::StableP6),
            _ => Err(Error::InvalidArgument(format!(
                "unknown branch {s:?} (expected unstable or stable)"
            ))),
        }
    }
}

/// The linear system solved at one order: `matrix · (lᵢ, kᵢ) = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderSystem {
    pub order: usize,
    pub matrix: [[f64; 2]; 2],
    pub rhs: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesExpansion {
    pub params: Params,
    pub branch: Branch,
    pub order: usize,
    pub alpha0: f64,
    pub theta_star: f64,
    /// `l[i−1] = lᵢ`.
    pub l: Vec<f64>,
    /// `k[i−1] = kᵢ`.
    pub k: Vec<f64>,
    #[serde(skip)]
    pub systems: Vec<OrderSystem>,
}

impl SeriesExpansion {
    pub fn l(&self, i: usize) -> f64 {
        self.l[i - 1]
    }

    pub fn k(&self, i: usize) -> f64 {
        self.k[i - 1]
    }

    /// Offsets `(α − α₀, θ − θ*)` at `r`.
    pub fn offsets(&self, r: f64) -> (f64, f64) {
        let a = self.l.iter().rev().fold(0.0, |acc, c| (acc + c) * r);
        let b = self.k.iter().rev().fold(0.0, |acc, c| (acc + c) * r);
        (a, b)
    }

    /// Derivatives `(α', θ')` at `r`.
    pub fn offset_derivatives(&self, r: f64) -> (f64, f64) {
        let d = |c: &[f64]| {
            c.iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (i, ci)| acc * r + (i + 1) as f64 * ci)
        };
        (d(&self.l), d(&self.k))
    }

    pub fn eval(&self, r: f64) -> BlowupState {
        let (a, b) = self.offsets(r);
        BlowupState::new(r, self.alpha0 + a, self.theta_star + b)
    }

    /// `k₃/l₃`, reported for information; `None` below order 3 or when
    /// `l₃ = 0`.
    pub fn order3_ratio(&self) -> Option<f64> {
        (self.order >= 3 && self.l[2] != 0.0).then(|| self.k[2] / self.l[2])
    }
}

/// `(ω₁, ω₂)` at a point of blow-up space with slopes `dα/dr`, `dθ/dr`.
pub fn one_forms(params: &Params, b: &BlowupState, dalpha_dr: f64, dtheta_dr: f64) -> [f64; 2] {
    let [yr, ya, yt] = eval_tilde_y(params, b);
    [ya - yr * dalpha_dr, yt - yr * dtheta_dr]
}

fn one_form_series(
    params: &Params,
    branch: Branch,
    a: &Truncated,
    b: &Truncated,
) -> (Truncated, Truncated) {
    let n = a.degree();
    let a0 = alpha0(params);
    let alpha = &Truncated::constant(a0, n) + a;
    let theta = &Truncated::constant(branch.theta_star(params), n) + b;
    let r = Truncated::variable(n);
    let (sa, ca) = alpha.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sd, cd) = (&theta - &alpha).sin_cos();
    let sc = &sa * &ca;

    let y_r = &(&r * &sc) * &cd;
    let y_a = &sc * &sd;
    let y_t = &(&(&r * &sc).scale(params.dim() * params.h()) + &(&ca * &ct).scale(params.pm1()))
        - &(&sa * &st).scale(params.qm1());

    let w1 = &y_a - &(&y_r * &a.derivative());
    let w2 = &y_t - &(&y_r * &b.derivative());
    (w1, w2)
}

fn solve_2x2(m: [[f64; 2]; 2], rhs: [f64; 2], order: usize) -> Result<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    if scale == 0.0 || (det / (scale * scale)).abs() < PIVOT_EPS {
        return Err(Error::SingularSystem { order, pivot: det });
    }
    Ok([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Series coefficients through order `order` by order-by-order elimination.
///
/// At order `i` the coefficient of `rⁱ` in both 1-forms is affine in
/// `(lᵢ, kᵢ)`; the map is recovered by probing and the system solved directly.
pub fn series_coefficients(
    params: &Params,
    branch: Branch,
    order: usize,
) -> Result<SeriesExpansion> {
    if order == 0 {
        return Err(Error::InvalidArgument("series order must be ≥ 1".into()));
    }
    let mut l = vec![0.0; order];
    let mut k = vec![0.0; order];
    let mut systems = Vec::with_capacity(order);

    for i in 1..=order {
        let coeff_at = |li: f64, ki: f64| {
            let mut lc = vec![0.0; order + 1];
            let mut kc = vec![0.0; order + 1];
            lc[1..i].copy_from_slice(&l[..i - 1]);
            kc[1..i].copy_from_slice(&k[..i - 1]);
            lc[i] = li;
            kc[i] = ki;
            let a = Truncated::from_coeffs(&lc, order);
            let b = Truncated::from_coeffs(&kc, order);
            let (w1, w2) = one_form_series(params, branch, &a, &b);
            [w1.coeff(i), w2.coeff(i)]
        };
        let base = coeff_at(0.0, 0.0);
        let e_l = coeff_at(1.0, 0.0);
        let e_k = coeff_at(0.0, 1.0);
        let matrix = [
            [e_l[0] - base[0], e_k[0] - base[0]],
            [e_l[1] - base[1], e_k[1] - base[1]],
        ];
        let rhs = [-base[0], -base[1]];
        let [li, ki] = solve_2x2(matrix, rhs, i)?;
        l[i - 1] = li;
        k[i - 1] = ki;
        systems.push(OrderSystem {
            order: i,
            matrix,
            rhs,
        });
    }

    Ok(SeriesExpansion {
        params: *params,
        branch,
        order,
        alpha0: alpha0(params),
        theta_star: branch.theta_star(params),
        l,
        k,
        systems,
    })
}

/// Closed-form first two coefficients of a branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowOrder {
    pub l1: f64,
    pub l2: f64,
    pub k1: f64,
    pub k2: f64,
}

/// `l₁ = H(p+q−1)/(3(p+q)−4)`, `k₁ = 2l₁`,
/// `l₂ = −H²(p+q−2)(p−q)(p+q−1)² / (2(2p+2q−1)(3p+3q−4)²√((p−1)(q−1)))`,
/// `k₂ = 3l₂` for the unstable branch.
pub fn closed_form_l1l2(params: &Params) -> LowOrder {
    let (p, q, h) = (f64::from(params.p()), f64::from(params.q()), params.h());
    let s = p + q;
    let l1 = h * (s - 1.0) / (3.0 * s - 4.0);
    let l2 = -h * h * (s - 2.0) * (p - q) * (s - 1.0).powi(2)
        / (2.0 * (2.0 * s - 1.0) * (3.0 * s - 4.0).powi(2) * (params.pm1() * params.qm1()).sqrt());
    LowOrder {
        l1,
        l2,
        k1: 2.0 * l1,
        k2: 3.0 * l2,
    }
}

/// Closed forms for either branch: the stable branch negates `l₁`, `k₁`.
pub fn closed_form_for_branch(params: &Params, branch: Branch) -> LowOrder {
    let c = closed_form_l1l2(params);
    match branch {
        Branch::UnstableP5 => c,
        Branch::StableP6 => LowOrder {
            l1: -c.l1,
            k1: -c.k1,
            ..c
        },
    }
}

/// The series evaluated at `r0`.
pub fn seed_point(series: &SeriesExpansion, r0: f64) -> Result<BlowupState> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "seed radius must be > 0 (got {r0})"
        )));
    }
    Ok(series.eval(r0))
}

/// `(r, α, θ) ↦ (r cos α, r sin α, θ)` on `r > 0`, `0 < α < π/2`.
pub fn blow_down(b: &BlowupState) -> Result<ProfileState> {
    if !(b.r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "blow-down needs r > 0 (got {})",
            b.r
        )));
    }
    if !(b.alpha > 0.0 && b.alpha < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "blow-down needs 0 < α < π/2 (got {})",
            b.alpha
        )));
    }
    let (s, c) = b.alpha.sin_cos();
    Ok(ProfileState::new(b.r * c, b.r * s, b.theta))
}

/// `(ω₁, ω₂)` of the truncated series at `r`, evaluated in a form free of the
/// cancellation between the two curvature terms, so residuals far below
/// `r·ε_mach` remain resolvable.
pub fn series_residual(series: &SeriesExpansion, r: f64) -> [f64; 2] {
    let params = &series.params;
    let sigma = series.branch.sigma();
    let (a, b) = series.offsets(r);
    let (da, db) = series.offset_derivatives(r);
    let alpha = series.alpha0 + a;
    let sc = alpha.sin() * alpha.cos();
    let (sd, cd) = (b - a).sin_cos();

    let y_r = sigma * r * sc * cd;
    let y_a = sigma * sc * sd;
    let curv = sigma
        * ((params.pm1() - params.qm1()) * a.sin() * b.sin()
            - lambda0(params) * (params.dim() - 1.0) * (a + b).sin());
    let y_t = r * params.dim() * params.h() * sc + curv;
    [y_a - y_r * da, y_t - y_r * db]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{saddle3d, SaddleLabel};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn params(p: u32, q: u32, h: f64) -> Params {
        Params::new(p, q, h).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let c = closed_form_l1l2(&params(2, 2, 1.0));
        assert_eq!((c.l1, c.l2, c.k1, c.k2), (0.375, 0.0, 0.75, 0.0));
        let c = closed_form_l1l2(&params(2, 2, -1.0));
        assert_eq!((c.l1, c.k1), (-0.375, -0.75));
        let c = closed_form_l1l2(&params(3, 2, 1.0));
        assert_abs_diff_eq!(c.l1, 4.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.l2, -0.0155836, epsilon = 1e-7);
        assert_abs_diff_eq!(c.k2, -0.0467509, epsilon = 1e-7);
        assert_abs_diff_eq!(
            c.l2,
            -48.0 / (2.0 * 9.0 * 121.0 * 2f64.sqrt()),
            epsilon = 1e-16
        );
    }

    #[test]
    fn series_matches_closed_form() {
        for (p, q, h) in [(2, 2, 1.0), (3, 2, 1.0), (5, 2, -2.0), (2, 7, 0.5)] {
            let par = params(p, q, h);
            for br in Branch::BOTH {
                let s = series_coefficients(&par, br, 4).unwrap();
                let c = closed_form_for_branch(&par, br);
                assert_abs_diff_eq!(s.l(1), c.l1, epsilon = 1e-12);
                assert_abs_diff_eq!(s.k(1), c.k1, epsilon = 1e-12);
                assert_abs_diff_eq!(s.l(2), c.l2, epsilon = 1e-12);
                assert_abs_diff_eq!(s.k(2), c.k2, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn order_one_system_shape() {
        // rows reduce to k₁ − 2l₁ = 0 and (H − k₁)(p+q−1) − (p+q−2)l₁ = 0
        let par = params(3, 4, 1.3);
        let s = series_coefficients(&par, Branch::UnstableP5, 1).unwrap();
        let (l1, k1) = (s.l(1), s.k(1));
        assert_abs_diff_eq!(k1 - 2.0 * l1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((1.3 - k1) * 6.0 - 5.0 * l1, 0.0, epsilon = 1e-13);
        let l0 = lambda0(&par);
        let m = s.systems[0].matrix;
        assert_abs_diff_eq!(m[0][0], -2.0 * l0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[0][1], l0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[1][0], -5.0 * l0, epsilon = 1e-14);
        assert_abs_diff_eq!(m[1][1], -6.0 * l0, epsilon = 1e-14);
    }

    #[test]
    fn minimal_case_is_flat() {
        for (p, q) in [(2, 2), (3, 2), (4, 7)] {
            for br in Branch::BOTH {
                let s = series_coefficients(&params(p, q, 0.0), br, 5).unwrap();
                assert!(s.l.iter().chain(&s.k).all(|c| *c == 0.0));
                let seed = seed_point(&s, 0.1).unwrap();
                assert_eq!(seed.alpha, s.alpha0);
                assert_eq!(seed.theta, s.theta_star);
            }
        }
    }

    #[test]
    fn seed_examples() {
        let s = series_coefficients(&params(2, 2, 1.0), Branch::UnstableP5, 2).unwrap();
        let b = seed_point(&s, 1e-4).unwrap();
        assert_abs_diff_eq!(b.alpha, FRAC_PI_4 + 3.75e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.theta, FRAC_PI_4 + 7.5e-5, epsilon = 1e-15);

        let par = params(3, 2, 1.0);
        let s = series_coefficients(&par, Branch::StableP6, 4).unwrap();
        let b = seed_point(&s, 1e-4).unwrap();
        let a0 = alpha0(&par);
        assert_abs_diff_eq!(b.alpha, a0 - 4e-4 / 11.0 - 1.558e-10, epsilon = 1e-13);
        assert_abs_diff_eq!(b.theta, a0 + PI - 7.273e-5, epsilon = 1e-8);
        assert!(seed_point(&s, 0.0).is_err());
    }

    #[test]
    fn blow_down_examples() {
        let s = blow_down(&BlowupState::new(2.0, PI / 6.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s.x, 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.y, 1.0, epsilon = 1e-15);
        let par = params(3, 2, 1.0);
        let a0 = alpha0(&par);
        let s = blow_down(&BlowupState::new(0.3, a0, a0)).unwrap();
        assert_abs_diff_eq!(s.y / s.x, 2f64.sqrt(), epsilon = 1e-14);
        assert!(blow_down(&BlowupState::new(0.0, 0.5, 0.0)).is_err());
        assert!(blow_down(&BlowupState::new(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn residual_agrees_with_direct_forms() {
        let s = series_coefficients(&params(3, 2, 1.0), Branch::UnstableP5, 4).unwrap();
        let r = 0.05;
        let (da, db) = s.offset_derivatives(r);
        let direct = one_forms(&s.params, &s.eval(r), da, db);
        let stable = series_residual(&s, r);
        assert_abs_diff_eq!(direct[0], stable[0], epsilon = 1e-15);
        assert_abs_diff_eq!(direct[1], stable[1], epsilon = 1e-15);
    }

    #[test]
    fn residual_slope() {
        for (p, q, h) in [(3, 2, 1.0), (2, 5, 2.0), (4, 4, 1.0), (2, 2, -1.0)] {
            let s = series_coefficients(&params(p, q, h), Branch::UnstableP5, 4).unwrap();
            let norm = |r: f64| {
                let [a, b] = series_residual(&s, r);
                a.hypot(b)
            };
            let slope = (norm(1e-2) / norm(1e-3)).log10();
            assert!(slope >= 4.8, "({p},{q},{h}): slope {slope}");
        }
    }

    #[test]
    fn tangent_is_radial_eigenvector() {
        for (p, q, h) in [(2, 2, 1.0), (3, 2, 1.0), (2, 5, 2.0)] {
            let par = params(p, q, h);
            for (br, lbl) in [
                (Branch::UnstableP5, SaddleLabel::P5),
                (Branch::StableP6, SaddleLabel::P6),
            ] {
                let s = series_coefficients(&par, br, 2).unwrap();
                let sad = saddle3d(&par, lbl);
                let j = crate::equilibria::fd_jacobian_3d(&par, &sad.location);
                let v = [1.0, s.l(1), s.k(1)];
                let mu = sad.eigenvalues[0].re;
                for row in 0..3 {
                    let jv: f64 = (0..3).map(|c| j[row][c] * v[c]).sum();
                    assert_abs_diff_eq!(jv, mu * v[row], epsilon = 1e-6);
                }
            }
        }
    }
}
