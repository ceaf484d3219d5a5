use std::f64::consts::FRAC_PI_2;

use cmcrot_core::integrate::{trace_profile, IntegratorConfig};
use cmcrot_core::linalg::fd_jacobian;
use cmcrot_core::model::{eval_tilde_y, eval_tilde_y0, eval_x, eval_y, jacobian_tilde_y0};
use cmcrot_core::{BlowupState, Direction, Params, ProfileState};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = Params> {
    (2u32..=9, 2u32..=9, -3.0f64..3.0).prop_map(|(p, q, h)| Params::new(p, q, h).unwrap())
}

fn profile_state() -> impl Strategy<Value = ProfileState> {
    (0.01f64..10.0, 0.01f64..10.0, -10.0f64..10.0).prop_map(|(x, y, t)| ProfileState::new(x, y, t))
}

fn blowup_state() -> impl Strategy<Value = BlowupState> {
    (1e-3f64..5.0, 0.01f64..FRAC_PI_2 - 0.01, -10.0f64..10.0)
        .prop_map(|(r, a, t)| BlowupState::new(r, a, t))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn pushforward_of_blowup_field(par in params(), b in blowup_state()) {
        let v = eval_tilde_y(&par, &b);
        let (s, c) = b.alpha.sin_cos();
        let dx = c * v[0] - b.r * s * v[1];
        let dy = s * v[0] + b.r * c * v[1];
        let y = eval_y(&par, &ProfileState::new(b.r * c, b.r * s, b.theta));
        prop_assert!(close(b.r * dx, y[0], 1e-12));
        prop_assert!(close(b.r * dy, y[1], 1e-12));
        prop_assert!(close(b.r * v[2], y[2], 1e-12));
    }

    #[test]
    fn y_is_x_times_xy(par in params(), s in profile_state()) {
        let x = eval_x(&par, &s).unwrap();
        let y = eval_y(&par, &s);
        for i in 0..3 {
            prop_assert!(close(s.x * s.y * x[i], y[i], 1e-12));
        }
    }

    #[test]
    fn divisor_is_invariant(par in params(), a in 0.0f64..FRAC_PI_2, t in -10.0f64..10.0) {
        prop_assert_eq!(eval_tilde_y(&par, &BlowupState::new(0.0, a, t))[0], 0.0);
    }

    #[test]
    fn swap_conjugates_x(par in params(), s in profile_state()) {
        // the reflection reverses orientation, so H changes sign
        let swapped = Params::new(par.q(), par.p(), -par.h()).unwrap();
        let v = eval_x(&par, &s).unwrap();
        let m = ProfileState::new(s.y, s.x, FRAC_PI_2 - s.theta);
        let w = eval_x(&swapped, &m).unwrap();
        prop_assert!(close(w[0], v[1], 1e-12));
        prop_assert!(close(w[1], v[0], 1e-12));
        prop_assert!(close(w[2], -v[2], 1e-12));
    }

    #[test]
    fn swap_conjugates_divisor_field(par in params(), a in 0.0f64..FRAC_PI_2, t in -10.0f64..10.0) {
        let v = eval_tilde_y0(&par, a, t);
        let w = eval_tilde_y0(&par.swapped(), FRAC_PI_2 - a, FRAC_PI_2 - t);
        prop_assert!(close(w[0], -v[0], 1e-12));
        prop_assert!(close(w[1], -v[1], 1e-12));
    }

    #[test]
    fn homothety_rescales_turning_rate(par in params(), s in profile_state(), c in 0.1f64..10.0) {
        prop_assume!(!par.is_minimal());
        let scaled = par.with_h(par.h() / c).unwrap();
        let v = eval_x(&par, &s).unwrap();
        let w = eval_x(&scaled, &ProfileState::new(c * s.x, c * s.y, s.theta)).unwrap();
        prop_assert!(close(c * w[2], v[2], 1e-12));
    }

    #[test]
    fn minimal_field_is_scale_invariant(p in 2u32..=9, q in 2u32..=9, s in profile_state(), c in 0.1f64..10.0) {
        let par = Params::new(p, q, 0.0).unwrap();
        let v = eval_y(&par, &s);
        let w = eval_y(&par, &ProfileState::new(c * s.x, c * s.y, s.theta));
        // the image of a trajectory has velocity (c·ẋ, c·ẏ, θ̇), parallel to w
        let m = [c * v[0], c * v[1], v[2]];
        for i in 0..3 {
            prop_assert!(close(w[i], c * m[i], 1e-12));
        }
    }

    #[test]
    fn divisor_jacobian_matches_differences(par in params(), a in 0.05f64..1.5, t in -4.0f64..4.0) {
        let j = jacobian_tilde_y0(&par, a, t);
        let fd = fd_jacobian(|z: &[f64; 2]| eval_tilde_y0(&par, z[0], z[1]), [a, t], 1e-6);
        for i in 0..2 {
            for k in 0..2 {
                prop_assert!((j[i][k] - fd[i][k]).abs() < 1e-7 * (1.0 + j[i][k].abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn traces_have_unit_speed_and_small_residual(
        par in params(),
        x in 0.2f64..3.0,
        y in 0.2f64..3.0,
        t in -3.0f64..3.0,
        forward in any::<bool>(),
    ) {
        let cfg = IntegratorConfig { max_arclength: 20.0, ..Default::default() };
        let dir = if forward { Direction::Forward } else { Direction::Backward };
        let out = trace_profile(&par, &ProfileState::new(x, y, t), dir, &cfg).unwrap();
        prop_assert!(out.curve.len() > 2);
        prop_assert!(out.curve.check_unit_speed(1e-9));
        prop_assert!(out.curve.max_abs_residual() <= 1e-6);
        prop_assert!(out.curve.samples.iter().all(|s| s.state.in_open_quadrant()));
    }
}
