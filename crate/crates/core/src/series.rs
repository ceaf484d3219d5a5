//! Dense truncated power series `Σ_{i ≤ N} cᵢ rⁱ` with real coefficients.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Truncated {
    coeffs: Vec<f64>,
}

impl Truncated {
    /// The zero series truncated at degree `degree`.
    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
        }
    }

    pub fn constant(c: f64, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = c;
        s
    }

    /// The series `r`.
    pub fn variable(degree: usize) -> Self {
        let mut s = Self::zero(degree);
        if degree >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    /// Builds a series from coefficients; missing ones are zero, extra ones
    /// are dropped.
    pub fn from_coeffs(coeffs: &[f64], degree: usize) -> Self {
        let mut s = Self::zero(degree);
        for (dst, src) in s.coeffs.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `d/dr`, keeping the truncation degree (the top coefficient becomes 0).
    pub fn derivative(&self) -> Self {
        let n = self.degree();
        let mut out = Self::zero(n);
        for i in 1..=n {
            out.coeffs[i - 1] = i as f64 * self.coeffs[i];
        }
        out
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
    }

    /// `(sin s, cos s)` by Taylor expansion around the constant term:
    /// with `s = c + u`, `sin s = sin c·cos u + cos c·sin u` and the Maclaurin
    /// series of `sin u`, `cos u` terminate since `u` has no constant term.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.degree();
        let c = self.coeffs[0];
        let mut u = self.clone();
        u.coeffs[0] = 0.0;

        let mut sin_u = Self::zero(n);
        let mut cos_u = Self::constant(1.0, n);
        let mut power = Self::constant(1.0, n);
        let mut factorial = 1.0;
        for k in 1..=n {
            power = &power * &u;
            factorial *= k as f64;
            let term = power.scale(1.0 / factorial);
            match k % 4 {
                1 => sin_u = &sin_u + &term,
                2 => cos_u = &cos_u - &term,
                3 => sin_u = &sin_u - &term,
                _ => cos_u = &cos_u + &term,
            }
        }
        let (sc, cc) = c.sin_cos();
        let sin = &sin_u.scale(cc) + &cos_u.scale(sc);
        let cos = &cos_u.scale(cc) - &sin_u.scale(sc);
        (sin, cos)
    }
}

impl Add for &Truncated {
    type Output = Truncated;
    fn add(self, rhs: &Truncated) -> Truncated {
        assert_eq!(self.degree(), rhs.degree());
        Truncated {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Truncated {
    type Output = Truncated;
    fn sub(self, rhs: &Truncated) -> Truncated {
        assert_eq!(self.degree(), rhs.degree());
        Truncated {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Truncated {
    type Output = Truncated;
    fn mul(self, rhs: &Truncated) -> Truncated {
        assert_eq!(self.degree(), rhs.degree());
        let n = self.degree();
        let mut out = Truncated::zero(n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in rhs.coeffs[..=n - i].iter().enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }
}

impl Neg for &Truncated {
    type Output = Truncated;
    fn neg(self) -> Truncated {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent reference: sin/cos of a series via the ODE recurrences
    // s' = c·f', c' = −s·f', i.e. n sₙ = Σ k f_k c_{n−k}.
    fn sin_cos_recurrence(f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = f.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = f[0].sin();
        c[0] = f[0].cos();
        for m in 1..n {
            let mut sa = 0.0;
            let mut ca = 0.0;
            for k in 1..=m {
                sa += k as f64 * f[k] * c[m - k];
                ca -= k as f64 * f[k] * s[m - k];
            }
            s[m] = sa / m as f64;
            c[m] = ca / m as f64;
        }
        (s, c)
    }

    #[test]
    fn sin_cos_matches_recurrence() {
        let f = [0.7, -1.3, 0.4, 2.1, -0.6, 0.25, 0.9];
        let series = Truncated::from_coeffs(&f, 6);
        let (s, c) = series.sin_cos();
        let (s_ref, c_ref) = sin_cos_recurrence(&f);
        for i in 0..=6 {
            assert!((s.coeff(i) - s_ref[i]).abs() < 1e-13, "sin {i}");
            assert!((c.coeff(i) - c_ref[i]).abs() < 1e-13, "cos {i}");
        }
    }

    #[test]
    fn sin_cos_pythagoras() {
        let series = Truncated::from_coeffs(&[1.1, 0.3, -0.8, 0.5, 0.2], 4);
        let (s, c) = series.sin_cos();
        let one = &(&s * &s) + &(&c * &c);
        assert!((one.coeff(0) - 1.0).abs() < 1e-15);
        for i in 1..=4 {
            assert!(one.coeff(i).abs() < 1e-14);
        }
    }

    #[test]
    fn product_and_derivative() {
        // (1 + r)(1 − r + r²) = 1 + r³
        let a = Truncated::from_coeffs(&[1.0, 1.0], 4);
        let b = Truncated::from_coeffs(&[1.0, -1.0, 1.0], 4);
        assert_eq!((&a * &b).coeffs(), &[1.0, 0.0, 0.0, 1.0, 0.0]);
        let d = Truncated::from_coeffs(&[5.0, 1.0, 2.0, 3.0], 3).derivative();
        assert_eq!(d.coeffs(), &[1.0, 4.0, 9.0, 0.0]);
        assert_eq!(Truncated::from_coeffs(&[1.0, 2.0, 3.0], 2).eval(2.0), 17.0);
    }

    #[test]
    fn truncation_drops_high_terms() {
        let r = Truncated::variable(2);
        let r2 = &r * &r;
        assert_eq!((&r2 * &r).coeffs(), &[0.0, 0.0, 0.0]);
    }
}
