//! Dormand–Prince 5(4) with FSAL and the fourth-order dense output.
//! Fields are autonomous, so the node coefficients `cᵢ` never appear.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest admissible step size.
pub const MIN_STEP: f64 = 1e-14;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    fn scale(&self, a: f64, b: f64) -> f64 {
        self.abs + self.rel * a.abs().max(b.abs())
    }
}

/// One attempted step with its embedded error and interpolation data.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    /// `f(y1)`, reused as the first stage of the next step.
    pub f1: [f64; N],
    /// Scaled RMS error; the step is acceptable when `err ≤ 1`.
    pub err: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Interpolated state at `y0 + s·h`, `s ∈ [0, 1]`.
    pub fn eval(&self, s: f64) -> [f64; N] {
        let u = 1.0 - s;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + s * (r[1][i] + u * (r[2][i] + s * (r[3][i] + u * r[4][i])))
        })
    }

    /// Derivative of the interpolant with respect to the independent variable.
    pub fn derivative(&self, s: f64) -> [f64; N] {
        let u = 1.0 - s;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            let c = r[3][i] + u * r[4][i];
            let b = r[2][i] + s * c;
            let a = r[1][i] + u * b;
            let db = c - s * r[4][i];
            let da = -b + u * db;
            (a + s * da) / self.h
        })
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// One Dormand–Prince step of size `h` from `y0` with `f0 = f(y0)`.
pub fn dopri_step<const N: usize, F>(
    f: &F,
    y0: &[f64; N],
    f0: &[f64; N],
    h: f64,
    tol: &Tolerance,
) -> Step<N>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = *f0;
    let k2 = f(&axpy(y0, h, &[(A21, &k1)]));
    let k3 = f(&axpy(y0, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(&axpy(y0, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(
        y0,
        h,
        &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
    ));
    let k6 = f(&axpy(
        y0,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y1 = axpy(
        y0,
        h,
        &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(&y1);

    let mut sum = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.scale(y0[i], y1[i]);
        sum += (e / sc).powi(2);
    }
    let err = (sum / N as f64).sqrt();

    let mut rcont = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y1[i] - y0[i];
        let bspl = h * k1[i] - dy;
        rcont[0][i] = y0[i];
        rcont[1][i] = dy;
        rcont[2][i] = bspl;
        rcont[3][i] = dy - h * k7[i] - bspl;
        rcont[4][i] =
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }

    Step {
        h,
        y0: *y0,
        y1,
        f1: k7,
        err,
        rcont,
    }
}

/// Step-size factor from a scaled error.
pub fn step_factor(err: f64, accepted: bool) -> f64 {
    let fac = if err == 0.0 {
        FAC_MAX
    } else {
        (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
    };
    if accepted {
        fac
    } else {
        fac.min(1.0)
    }
}

/// Initial step size by the usual two-evaluation heuristic.
pub fn initial_step<const N: usize, F>(
    f: &F,
    y0: &[f64; N],
    f0: &[f64; N],
    tol: &Tolerance,
    max_step: f64,
) -> f64
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let norm = |v: &[f64; N]| {
        let s: f64 = (0..N)
            .map(|i| (v[i] / tol.scale(y0[i], y0[i])).powi(2))
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(&y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(max_step)
}

/// Result of [`rk_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<const N: usize> {
    pub state: [f64; N],
    pub error: f64,
    pub dt_next: f64,
    pub accepted: bool,
}

/// A single adaptive step: advances by `dt` when the embedded estimate meets
/// the mixed tolerance, otherwise leaves the state unchanged; either way
/// proposes the next step size.
pub fn rk_step<const N: usize, F>(
    f: F,
    state: &[f64; N],
    dt: f64,
    tol: &Tolerance,
) -> Result<StepReport<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    if !(dt.abs() >= MIN_STEP) {
        return Err(Error::StepUnderflow { t: 0.0, dt });
    }
    let f0 = f(state);
    let step = dopri_step(&f, state, &f0, dt, tol);
    let accepted = step.err <= 1.0;
    Ok(StepReport {
        state: if accepted { step.y1 } else { *state },
        error: step.err,
        dt_next: dt * step_factor(step.err, accepted),
        accepted,
    })
}

/// Adaptive driver for an autonomous field, one accepted step at a time.
pub struct Stepper<const N: usize, F> {
    f: F,
    pub y: [f64; N],
    fy: [f64; N],
    pub h: f64,
    pub tol: Tolerance,
    pub max_step: f64,
    pub elapsed: f64,
}

impl<const N: usize, F> Stepper<N, F>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    pub fn new(f: F, y: [f64; N], tol: Tolerance, max_step: f64, h: Option<f64>) -> Self {
        let fy = f(&y);
        let h = h.unwrap_or_else(|| initial_step(&f, &y, &fy, &tol, max_step));
        Self {
            f,
            y,
            fy,
            h: h.min(max_step),
            tol,
            max_step,
            elapsed: 0.0,
        }
    }

    pub fn field(&self, y: &[f64; N]) -> [f64; N] {
        (self.f)(y)
    }

    pub fn current_derivative(&self) -> [f64; N] {
        self.fy
    }

    /// Takes one accepted step, shrinking `h` as needed.
    pub fn advance(&mut self) -> Result<Step<N>> {
        loop {
            if self.h < MIN_STEP || !self.h.is_finite() {
                return Err(Error::StepUnderflow {
                    t: self.elapsed,
                    dt: self.h,
                });
            }
            let step = dopri_step(&self.f, &self.y, &self.fy, self.h, &self.tol);
            let finite = step.y1.iter().chain(&step.f1).all(|v| v.is_finite());
            if finite && step.err <= 1.0 {
                self.y = step.y1;
                self.fy = step.f1;
                self.elapsed += step.h;
                self.h = (self.h * step_factor(step.err, true)).min(self.max_step);
                return Ok(step);
            }
            let err = if finite { step.err } else { f64::INFINITY };
            self.h *= if finite {
                step_factor(err, false)
            } else {
                FAC_MIN
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerance = Tolerance {
        rel: 1e-10,
        abs: 1e-12,
    };

    #[test]
    fn harmonic_oscillator_accuracy() {
        let mut st = Stepper::new(|y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], TOL, 0.5, None);
        while st.elapsed < 10.0 {
            st.advance().unwrap();
        }
        let t = st.elapsed;
        assert!((st.y[0] - t.cos()).abs() < 1e-8);
        assert!((st.y[1] + t.sin()).abs() < 1e-8);
    }

    #[test]
    fn dense_output_is_fourth_order() {
        // interpolation error at mid-step scales like h⁵
        let f = |y: &[f64; 1]| [y[0]];
        let err_at = |h: f64| {
            let st = dopri_step(&f, &[1.0], &[1.0], h, &TOL);
            (st.eval(0.5)[0] - (0.5 * h).exp()).abs()
        };
        let ratio = err_at(0.2) / err_at(0.1);
        assert!(ratio > 20.0, "ratio {ratio}");
        let st = dopri_step(&f, &[1.0], &[1.0], 0.1, &TOL);
        assert!((st.derivative(0.0)[0] - 1.0).abs() < 1e-14);
        assert!((st.derivative(1.0)[0] - st.f1[0]).abs() < 1e-14);
        assert!((st.derivative(0.4)[0] - (0.04f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn fixed_point_is_exact() {
        let r = rk_step(|_: &[f64; 2]| [0.0, 0.0], &[0.3, 0.7], 0.1, &TOL).unwrap();
        assert_eq!(r.state, [0.3, 0.7]);
        assert_eq!(r.error, 0.0);
        assert!(r.accepted);
    }

    #[test]
    fn rejects_tiny_step() {
        assert!(matches!(
            rk_step(|y: &[f64; 1]| *y, &[1.0], 1e-16, &TOL),
            Err(Error::StepUnderflow { .. })
        ));
    }
}
