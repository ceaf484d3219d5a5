//! Small dense helpers: finite-difference Jacobians, characteristic
//! polynomials and polynomial root finding for the spectral cross-checks.

use num_complex::Complex64;

/// Central-difference Jacobian of `f` at `x` with step `h`.
pub fn fd_jacobian<const N: usize, F>(f: F, x: [f64; N], h: f64) -> [[f64; N]; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let mut jac = [[0.0; N]; N];
    for col in 0..N {
        let mut xp = x;
        let mut xm = x;
        xp[col] += h;
        xm[col] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for row in 0..N {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    jac
}

/// Monic characteristic polynomial coefficients, highest degree first,
/// without the leading 1: `λ² + c₁λ + c₀` → `[c₁, c₀]`.
pub fn char_poly_2x2(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [-tr, det]
}

/// `λ³ + c₂λ² + c₁λ + c₀` → `[c₂, c₁, c₀]`.
pub fn char_poly_3x3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    [-tr, minors, -det]
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    // monic polynomial with implicit leading 1; returns (p(z), p'(z))
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of the monic polynomial `zⁿ + c[0]zⁿ⁻¹ + … + c[n−1]` by
/// Durand–Kerner iteration followed by Newton polishing.
pub fn monic_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let bound = 1.0 + coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let seed = Complex64::from_polar(0.4 * bound, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..500 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let (p, _) = horner(coeffs, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let step = p / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(coeffs, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= p / dp;
        }
    }
    sort_spectrum(&mut z);
    z
}

/// Orders eigenvalues by descending real part, then descending imaginary part.
pub fn sort_spectrum(z: &mut [Complex64]) {
    z.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> Vec<Complex64> {
    monic_roots(&char_poly_2x2(m))
}

pub fn eigenvalues_3x3(m: &[[f64; 3]; 3]) -> Vec<Complex64> {
    monic_roots(&char_poly_3x3(m))
}

/// Largest pairwise distance between two spectra under the best matching.
///
/// Sorting alone is not enough: a conjugate pair whose real parts differ in
/// the last bit would be paired crosswise. Spectra here have at most three
/// entries, so all permutations are tried.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    fn best(a: &[Complex64], b: &mut Vec<Complex64>, k: usize) -> f64 {
        if k == a.len() {
            return 0.0;
        }
        let mut out = f64::INFINITY;
        for i in k..b.len() {
            b.swap(k, i);
            let d = (a[k] - b[k]).norm().max(best(a, b, k + 1));
            out = out.min(d);
            b.swap(k, i);
        }
        out
    }
    best(a, &mut b.to_vec(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_known_cubic() {
        // (z − 1)(z + 2)(z − 3) = z³ − 2z² − 5z + 6
        let r = monic_roots(&[-2.0, -5.0, 6.0]);
        let expect = [3.0, 1.0, -2.0];
        for (z, e) in r.iter().zip(expect) {
            assert!((z.re - e).abs() < 1e-13 && z.im.abs() < 1e-13, "{z}");
        }
    }

    #[test]
    fn complex_pair() {
        // z² + 2z + 5 → −1 ± 2i
        let r = monic_roots(&[2.0, 5.0]);
        assert!((r[0] - Complex64::new(-1.0, 2.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(-1.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn triangular_spectrum() {
        let m = [[0.5, 0.0, 0.0], [1.5, -0.5, 0.5], [0.0, -1.0, -1.0]];
        let ev = eigenvalues_3x3(&m);
        assert!((ev[0] - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        // lower block: λ² + 1.5λ + 1 → (−3 ± i√7)/4
        assert!((ev[1] - Complex64::new(-0.75, 7f64.sqrt() / 4.0)).norm() < 1e-13);
    }

    #[test]
    fn fd_jacobian_of_quadratic_map() {
        let j = fd_jacobian(|v: &[f64; 2]| [v[0] * v[1], v[0] * v[0]], [2.0, 3.0], 1e-5);
        assert!((j[0][0] - 3.0).abs() < 1e-9);
        assert!((j[0][1] - 2.0).abs() < 1e-9);
        assert!((j[1][0] - 4.0).abs() < 1e-9);
        assert!(j[1][1].abs() < 1e-9);
    }

    #[test]
    fn matching_ignores_last_bit_ordering() {
        let a = [Complex64::new(-1.25, 0.66), Complex64::new(-1.25, -0.66)];
        let b = [
            Complex64::new(-1.25 + 1e-16, -0.66),
            Complex64::new(-1.25, 0.66),
        ];
        assert!(spectrum_distance(&a, &b) < 1e-15);
        let c = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        let d = [Complex64::new(2.5, 0.0), Complex64::new(1.0, 0.0)];
        assert_eq!(spectrum_distance(&c, &d), 0.5);
    }
}
