//! Domain types and the four vector fields of the profile-curve problem.
//!
//! A profile curve `(x(t), y(t))` in the orbit-space quadrant generates an
//! `O(p)×O(q)`-invariant hypersurface of `R^{p+q}`. Parametrized by arclength
//! with tangent angle `θ`, it is an integral curve of the field `X`. The
//! fields `Y = xy·X`, its cylindrical blow-up `Ỹ` and the divisor restriction
//! `Ỹ₀` are the regular charts used near the axes and the origin.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The symmetry group `O(p)×O(q)` and the normalized mean curvature `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    p: u32,
    q: u32,
    #[serde(rename = "H")]
    h: f64,
}

impl Params {
    pub fn new(p: u32, q: u32, h: f64) -> Result<Self> {
        if p < 2 || q < 2 {
            return Err(Error::InvalidDimensions { p, q });
        }
        if !h.is_finite() {
            return Err(Error::NonFiniteCurvature(h));
        }
        Ok(Self { p, q, h })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `p − 1`, the multiplicity of `λ₃`.
    pub fn pm1(&self) -> f64 {
        f64::from(self.p - 1)
    }

    /// `q − 1`, the multiplicity of `λ₂`.
    pub fn qm1(&self) -> f64 {
        f64::from(self.q - 1)
    }

    /// `p + q − 1`, the hypersurface dimension.
    pub fn dim(&self) -> f64 {
        f64::from(self.p + self.q - 1)
    }

    pub fn is_minimal(&self) -> bool {
        self.h == 0.0
    }

    /// Same group with the factors exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
            h: self.h,
        }
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(self.p, self.q, h)
    }
}

/// A point of the arclength system: radii `x`, `y` and tangent angle `θ`.
///
/// `θ` is kept unwrapped; use [`canonical_theta`] for output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl ProfileState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn in_open_quadrant(&self) -> bool {
        self.x > 0.0 && self.y > 0.0
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }

    fn require_quadrant(&self) -> Result<()> {
        if self.in_open_quadrant() {
            Ok(())
        } else {
            Err(Error::OffQuadrant {
                x: self.x,
                y: self.y,
            })
        }
    }
}

/// A point in blow-up coordinates, `x = r cos α`, `y = r sin α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupState {
    pub r: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl BlowupState {
    pub fn new(r: f64, alpha: f64, theta: f64) -> Self {
        Self { r, alpha, theta }
    }

    /// Polar coordinates of a profile point. Defined on the closed quadrant
    /// minus the origin.
    pub fn from_profile(s: &ProfileState) -> Self {
        Self {
            r: s.radius(),
            alpha: s.y.atan2(s.x),
            theta: s.theta,
        }
    }
}

/// Principal curvatures of the generated hypersurface. `lambda2` has
/// multiplicity `q − 1` and `lambda3` multiplicity `p − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalCurvatures {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl PrincipalCurvatures {
    /// `λ₁ + (q−1)λ₂ + (p−1)λ₃`, which equals `(p+q−1)H` on solutions.
    pub fn weighted_sum(&self, params: &Params) -> f64 {
        self.lambda1 + params.qm1() * self.lambda2 + params.pm1() * self.lambda3
    }
}

/// Orientation in which a curve was traversed relative to its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Where a traced curve came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    /// One branch of the curve through the origin.
    Branch { name: String },
    /// A trace launched from an interior point.
    InitialCondition { state: ProfileState },
    /// Both origin branches joined at the origin.
    Composed,
    /// The exact minimal cone.
    Cone,
    /// Launched from a cusp on a coordinate axis.
    Cusp { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    /// Arclength along the traversal.
    pub t: f64,
    pub state: ProfileState,
    pub curvatures: PrincipalCurvatures,
    pub residual: f64,
}

/// A sampled solution curve in the orbit space.
///
/// `t` increases along the traversal. For backward traversals the curve's own
/// orientation is opposite to increasing `t`; `θ` and the curvatures always
/// refer to the curve's own orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedCurve {
    pub params: Params,
    pub provenance: Provenance,
    pub direction: Direction,
    pub samples: Vec<CurveSample>,
}

impl TracedCurve {
    pub fn new(params: Params, provenance: Provenance, direction: Direction) -> Self {
        Self {
            params,
            provenance,
            direction,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&CurveSample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&CurveSample> {
        self.samples.last()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.residual.abs())
            .fold(0.0, f64::max)
    }

    /// Checks that `t` strictly increases and that no chord between
    /// consecutive points exceeds `Δt` by more than `eps`.
    pub fn check_unit_speed(&self, eps: f64) -> bool {
        self.samples.windows(2).all(|w| {
            let dt = w[1].t - w[0].t;
            let dx = w[1].state.x - w[0].state.x;
            let dy = w[1].state.y - w[0].state.y;
            dt > 0.0 && dx.hypot(dy) <= dt + eps
        })
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn canonical_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// The arclength field `X` on the open quadrant.
pub fn eval_x(params: &Params, s: &ProfileState) -> Result<[f64; 3]> {
    s.require_quadrant()?;
    Ok(eval_x_unchecked(params, s.x, s.y, s.theta))
}

#[inline]
pub(crate) fn eval_x_unchecked(params: &Params, x: f64, y: f64, theta: f64) -> [f64; 3] {
    let (sin, cos) = theta.sin_cos();
    [
        cos,
        sin,
        params.dim() * params.h + params.pm1() * cos / y - params.qm1() * sin / x,
    ]
}

/// `Y = xy·X`, written without divisions so it extends to the closed quadrant.
pub fn eval_y(params: &Params, s: &ProfileState) -> [f64; 3] {
    let (sin, cos) = s.theta.sin_cos();
    let xy = s.x * s.y;
    [
        xy * cos,
        xy * sin,
        params.dim() * params.h * xy + params.pm1() * s.x * cos - params.qm1() * s.y * sin,
    ]
}

/// The blown-up field `Ỹ = (1/r)·R*Y` in `(r, α, θ)`.
pub fn eval_tilde_y(params: &Params, b: &BlowupState) -> [f64; 3] {
    let (sa, ca) = b.alpha.sin_cos();
    let (st, ct) = b.theta.sin_cos();
    tilde_y_trig(params, b.r, (sa, ca), (st, ct))
}

/// `Ỹ` from the sines and cosines of `α` and `θ`.
pub(crate) fn tilde_y_trig(
    params: &Params,
    r: f64,
    (sa, ca): (f64, f64),
    (st, ct): (f64, f64),
) -> [f64; 3] {
    let sc = sa * ca;
    // sin(θ−α), cos(θ−α) expanded to reuse the four trig values
    let s_diff = st * ca - ct * sa;
    let c_diff = ct * ca + st * sa;
    [
        r * sc * c_diff,
        sc * s_diff,
        r * params.dim() * params.h * sc + params.pm1() * ca * ct - params.qm1() * sa * st,
    ]
}

/// `Ỹ` restricted to the divisor `r = 0`, projected to `(α, θ)`.
pub fn eval_tilde_y0(params: &Params, alpha: f64, theta: f64) -> [f64; 2] {
    let v = eval_tilde_y(params, &BlowupState::new(0.0, alpha, theta));
    [v[1], v[2]]
}

/// Analytic Jacobian of `Ỹ₀`, rows `(α', θ')`, columns `(∂α, ∂θ)`.
pub fn jacobian_tilde_y0(params: &Params, alpha: f64, theta: f64) -> [[f64; 2]; 2] {
    let (sa, ca) = alpha.sin_cos();
    let (st, ct) = theta.sin_cos();
    let d = theta - alpha;
    let (pm1, qm1) = (params.pm1(), params.qm1());
    [
        [
            (2.0 * alpha).cos() * d.sin() - sa * ca * d.cos(),
            sa * ca * d.cos(),
        ],
        [
            -pm1 * sa * ct - qm1 * ca * st,
            -pm1 * ca * st - qm1 * sa * ct,
        ],
    ]
}

/// Principal curvatures of the arclength-parametrized profile at `s`, given
/// the turning rate `dθ/dt` of the curve.
pub fn principal_curvatures(
    params: &Params,
    s: &ProfileState,
    dtheta_dt: f64,
) -> Result<PrincipalCurvatures> {
    let _ = params;
    s.require_quadrant()?;
    let (sin, cos) = s.theta.sin_cos();
    Ok(PrincipalCurvatures {
        lambda1: dtheta_dt,
        lambda2: sin / s.x,
        lambda3: -cos / s.y,
    })
}

/// `λ₁ + (q−1)λ₂ + (p−1)λ₃ − (p+q−1)H`.
pub fn cmc_residual(params: &Params, s: &ProfileState, dtheta_dt: f64) -> Result<f64> {
    let k = principal_curvatures(params, s, dtheta_dt)?;
    Ok(k.weighted_sum(params) - params.dim() * params.h)
}
