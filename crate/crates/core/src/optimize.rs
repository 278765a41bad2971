//! One-dimensional maximization of unimodal objectives: a coarse scan that
//! seeds the bracket and checks the shape, followed by golden-section search.

use crate::error::Result;
use crate::fading::FadingDraw;
use crate::fbl::{block_error_snr, capacity_snr};
use crate::params::{LinkGains, SystemParams};
use crate::relay::compose_error;

/// Points of the coarse scan that precedes golden-section search.
pub const SCAN_POINTS: usize = 33;

/// Golden-section iteration budget.
pub const MAX_ITERATIONS: usize = 200;

/// Differences smaller than this (relative to the largest scanned value) are
/// treated as ties when checking the shape of an objective.
pub const SHAPE_TOLERANCE: f64 = 1e-12;

/// Outcome classification of a maximization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptFlag {
    Converged,
    BudgetExhausted,
    /// The coarse scan found a local minimum between two rises, so the
    /// objective is not unimodal. The result is still the best point found.
    NonUnimodalDetected,
}

impl OptFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            OptFlag::Converged => "converged",
            OptFlag::BudgetExhausted => "budget_exhausted",
            OptFlag::NonUnimodalDetected => "non_unimodal_detected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub argmax: f64,
    pub value: f64,
    /// Objective evaluations, scan included.
    pub iterations: usize,
    /// Width of the final bracket.
    pub bracket: f64,
    pub flag: OptFlag,
}

/// Shape of a sampled sequence: the number of rise-to-fall and fall-to-rise
/// turns of its first differences, ignoring steps with `|Δ| ≤ tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Turns {
    pub peaks: usize,
    pub valleys: usize,
}

impl Turns {
    /// A single peak and no valley (or a monotone sequence).
    pub fn is_unimodal(&self) -> bool {
        self.valleys == 0 && self.peaks <= 1
    }
}

pub fn turns(values: &[f64], tol: f64) -> Turns {
    let mut last = 0i8;
    let mut t = Turns { peaks: 0, valleys: 0 };
    for w in values.windows(2) {
        let d = w[1] - w[0];
        let s = if d > tol {
            1
        } else if d < -tol {
            -1
        } else {
            continue;
        };
        if last == 1 && s == -1 {
            t.peaks += 1;
        } else if last == -1 && s == 1 {
            t.valleys += 1;
        }
        last = s;
    }
    t
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Maximizes `objective` on `[lo, hi]` to within `tol` in the argument.
pub fn maximize_unimodal<F: FnMut(f64) -> f64>(mut objective: F, lo: f64, hi: f64, tol: f64) -> OptResult {
    try_maximize_unimodal(|x| Ok(objective(x)), lo, hi, tol).expect("infallible objective")
}

/// [`maximize_unimodal`] for objectives that can fail; the first error aborts
/// the search.
pub fn try_maximize_unimodal<F>(mut objective: F, lo: f64, hi: f64, tol: f64) -> Result<OptResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    assert!(lo < hi, "empty search interval [{lo}, {hi}]");
    let xs = linspace(lo, hi, SCAN_POINTS);
    let mut ys = Vec::with_capacity(SCAN_POINTS);
    for &x in &xs {
        ys.push(objective(x)?);
    }
    let mut evals = SCAN_POINTS;
    let (best, &best_y) = ys.iter().enumerate().fold(
        (0, &f64::NEG_INFINITY),
        |acc, (i, y)| if *y > *acc.1 { (i, y) } else { acc },
    );
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let shape = turns(&ys, SHAPE_TOLERANCE * scale.max(1.0));

    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(SCAN_POINTS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    evals += 2;
    let mut iterations = 0;
    while (b - a) > tol && iterations < MAX_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
        evals += 1;
        iterations += 1;
    }
    let (mut argmax, mut value) = if fc >= fd { (c, fc) } else { (d, fd) };
    if best_y > value {
        argmax = xs[best];
        value = best_y;
    }
    let flag = if !shape.is_unimodal() {
        OptFlag::NonUnimodalDetected
    } else if b - a > tol {
        OptFlag::BudgetExhausted
    } else {
        OptFlag::Converged
    };
    Ok(OptResult {
        argmax,
        value,
        iterations: evals,
        bracket: b - a,
        flag,
    })
}

/// Instantaneous two-hop throughput `r·(1 − ε_R)/2` for a known fading draw.
pub fn instant_throughput(draw: &FadingDraw, r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> f64 {
    let mf = m as f64;
    let e2 = block_error_snr(params.snr(draw.z2 * gains.g2), r, mf);
    let emrc = block_error_snr(params.snr(draw.z1 * gains.g1 + draw.z3 * gains.g3), r, mf);
    0.5 * r * (1.0 - compose_error(e2, emrc))
}

/// Best per-period coding rate when the transmitter knows the draw.
///
/// Searches `(0, 1.5·C(γ_min)]` where `γ_min` is the weaker of the backhaul
/// and combined SNRs of the draw.
pub fn maximize_rate_perfect_csi(
    draw: &FadingDraw,
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    tol: f64,
) -> OptResult {
    let snr2 = params.snr(draw.z2 * gains.g2);
    let snr_mrc = params.snr(draw.z1 * gains.g1 + draw.z3 * gains.g3);
    let hi = 1.5 * capacity_snr(snr2.min(snr_mrc));
    if !(hi > 0.0) {
        return OptResult {
            argmax: 0.0,
            value: 0.0,
            iterations: 0,
            bracket: 0.0,
            flag: OptFlag::Converged,
        };
    }
    maximize_unimodal(|r| instant_throughput(draw, r, m, gains, params), 0.0, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let r = maximize_unimodal(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-6);
        assert!((r.argmax - 0.3).abs() <= 1e-6);
        assert_eq!(r.flag, OptFlag::Converged);
        assert!(r.bracket <= 1e-6);
    }

    #[test]
    fn constant_objective() {
        let r = maximize_unimodal(|_| 2.5, -1.0, 1.0, 1e-8);
        assert_eq!(r.value, 2.5);
        assert_eq!(r.flag, OptFlag::Converged);
        assert!((-1.0..=1.0).contains(&r.argmax));
    }

    #[test]
    fn maximum_at_boundary() {
        let r = maximize_unimodal(|x| x, 0.0, 2.0, 1e-9);
        assert!((r.argmax - 2.0).abs() <= 1e-9);
        let r = maximize_unimodal(|x| -x, 0.0, 2.0, 1e-9);
        assert!(r.argmax.abs() <= 1e-9);
    }

    #[test]
    fn detects_two_peaks() {
        let f = |x: f64| (6.0 * std::f64::consts::PI * x).sin();
        let r = maximize_unimodal(f, 0.0, 1.0, 1e-8);
        assert_eq!(r.flag, OptFlag::NonUnimodalDetected);
        assert!((r.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = maximize_unimodal(|x| -(x - 0.3).powi(2), 0.0, 1.0, 0.0);
        assert_eq!(r.flag, OptFlag::BudgetExhausted);
    }

    #[test]
    fn value_never_below_scan() {
        // A narrow spike that golden-section might step over.
        let f = |x: f64| (-((x - 0.5) / 1e-3).powi(2)).exp();
        let r = maximize_unimodal(f, 0.0, 1.0, 1e-6);
        assert!(r.value >= f(0.5) - 1e-12);
    }

    #[test]
    fn turns_counts_shape() {
        assert_eq!(turns(&[0.0, 1.0, 2.0, 1.0, 0.0], 0.0), Turns { peaks: 1, valleys: 0 });
        assert_eq!(turns(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.0), Turns { peaks: 2, valleys: 1 });
        assert_eq!(turns(&[3.0, 3.0, 3.0], 0.0), Turns { peaks: 0, valleys: 0 });
        assert!(turns(&[0.0, 1.0, 1.0, 0.5, 0.5, 0.0], 0.0).is_unimodal());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.01, std::f64::consts::LN_2, 100);
        assert_eq!(v.len(), 100);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[99], std::f64::consts::LN_2);
    }

    #[test]
    fn perfect_csi_zero_draw() {
        let gains = LinkGains::new(1.0, 1.0, 1.0).unwrap();
        let params = SystemParams::unit_snr(500, 1e-3, 0.2).unwrap();
        let r = maximize_rate_perfect_csi(&FadingDraw::new(0.0, 0.0, 0.0).unwrap(), 500, &gains, &params, 1e-5);
        assert_eq!((r.argmax, r.value), (0.0, 0.0));
    }

    #[test]
    fn perfect_csi_large_gains_approach_half_capacity() {
        let gains = LinkGains::new(1e9, 1e9, 1e9).unwrap();
        let params = SystemParams::unit_snr(500, 1e-3, 0.2).unwrap();
        let draw = FadingDraw::unit();
        let r = maximize_rate_perfect_csi(&draw, 500, &gains, &params, 1e-5);
        let c = capacity_snr(1e9);
        assert_eq!(r.flag, OptFlag::Converged);
        assert!((r.value - c / 2.0).abs() < 0.01 * c / 2.0, "{} vs {}", r.value, c / 2.0);
    }
}
