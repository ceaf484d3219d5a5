//! Detection of the approach to an asymptotic line.
//!
//! Near the line `x = c` the deviation `x − c` oscillates with a slowly
//! decaying amplitude (like `t^{-(p−1)/2}`), so `x` itself settles far too
//! slowly for a raw-value test. Instead each run of five consecutive extrema
//! gives a center estimate with binomial weights `(1, 4, 6, 4, 1)/16`, which
//! cancels the decaying amplitude up to its fourth difference; the remaining
//! bias is proportional to the squared amplitude. The line is declared once
//! those estimates stop moving, and its position is reported by
//! extrapolating the estimates linearly in the squared amplitude to zero.

/// Number of center estimates used for the stability test and the fit.
pub const MIN_ESTIMATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterEstimate {
    pub t: f64,
    pub center: f64,
    pub amp2: f64,
}

const WEIGHTS: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// Center estimates from a run of alternating extrema `(t, value)`.
pub fn center_estimates(extrema: &[(f64, f64)]) -> Vec<CenterEstimate> {
    extrema
        .windows(5)
        .map(|w| {
            let center = w.iter().zip(WEIGHTS).map(|(e, k)| k * e.1).sum::<f64>() / 16.0;
            let amp = w.windows(2).map(|d| (d[1].1 - d[0].1).abs()).sum::<f64>() / 8.0;
            CenterEstimate {
                t: w[2].0,
                center,
                amp2: amp * amp,
            }
        })
        .collect()
}

/// Least-squares intercept of `center` against `amp2`.
pub fn extrapolate(estimates: &[CenterEstimate]) -> f64 {
    let n = estimates.len() as f64;
    let ma = estimates.iter().map(|e| e.amp2).sum::<f64>() / n;
    let mc = estimates.iter().map(|e| e.center).sum::<f64>() / n;
    let saa: f64 = estimates.iter().map(|e| (e.amp2 - ma).powi(2)).sum();
    let sac: f64 = estimates
        .iter()
        .map(|e| (e.amp2 - ma) * (e.center - mc))
        .sum();
    if saa <= 1e-300 || saa <= 1e-24 * ma * ma * n {
        return mc;
    }
    mc - (sac / saa) * ma
}

/// The asymptote estimate from the extrema up to and including index `end`
/// (exclusive), or `None` with too few extrema.
pub fn estimate_at(extrema: &[(f64, f64)], end: usize) -> Option<f64> {
    let est = center_estimates(&extrema[..end.min(extrema.len())]);
    (est.len() >= MIN_ESTIMATES).then(|| extrapolate(&est[est.len() - MIN_ESTIMATES..]))
}

/// Extrema of one coordinate along a trace.
#[derive(Debug, Clone, Default)]
pub struct OscillationTracker {
    extrema: Vec<(f64, f64)>,
}

impl OscillationTracker {
    pub fn clear(&mut self) {
        self.extrema.clear();
    }

    pub fn extrema(&self) -> &[(f64, f64)] {
        &self.extrema
    }

    /// Records an extremum and returns the line position once the center
    /// estimates over the trailing `window` of arclength (at least
    /// [`MIN_ESTIMATES`] of them) vary by less than `tol`.
    pub fn push(&mut self, t: f64, value: f64, window: f64, tol: f64) -> Option<f64> {
        self.extrema.push((t, value));
        let n = self.extrema.len();
        if n < MIN_ESTIMATES + 4 {
            return None;
        }
        let start = n.saturating_sub(64);
        let est = center_estimates(&self.extrema[start..]);
        let t_last = est.last()?.t;
        let in_window = est.iter().filter(|e| e.t >= t_last - window).count();
        let tail = &est[est.len() - in_window.max(MIN_ESTIMATES)..];
        let lo = tail.iter().map(|e| e.center).fold(f64::INFINITY, f64::min);
        let hi = tail
            .iter()
            .map(|e| e.center)
            .fold(f64::NEG_INFINITY, f64::max);
        (hi - lo < tol).then(|| extrapolate(&est[est.len() - MIN_ESTIMATES..]))
    }
}
