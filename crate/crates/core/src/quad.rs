//! Gaussian quadrature rules and a globally adaptive tiled integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp;
            loop {
                let (p1, p2) = legendre_pair(n, z);
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 {
                    break;
                }
            }
            let (p1, p2) = legendre_pair(n, z);
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + h * x);
        }
        sum * h
    }
}

/// Returns `(P_n(z), P_{n-1}(z))`.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
    }
    (p1, p2)
}

/// Gauss–Laguerre rule for `∫_0^∞ e^{-z} f(z) dz`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let nf = n as f64;
        let mut nodes: Vec<f64> = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut z = 0.0;
        for i in 0..n {
            // Initial guesses follow the classic asymptotic spacing of Laguerre zeros.
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            for _ in 0..100 {
                let (p1, p2) = laguerre_pair(n, z);
                let pp = nf * (p1 - p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                    break;
                }
            }
            let (p1, p2) = laguerre_pair(n, z);
            let pp = nf * (p1 - p2) / z;
            nodes.push(z);
            weights.push(-1.0 / (pp * nf * p2));
        }
        GaussLaguerre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `∫_0^∞ e^{-z} f(z) dz`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Returns `(L_n(z), L_{n-1}(z))`.
fn laguerre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
    }
    (p1, p2)
}

/// Settings of the adaptive tiled integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    /// Gauss–Legendre points per tile.
    pub nodes_per_tile: usize,
    /// Absolute tolerance on the summed error estimate.
    pub tolerance: f64,
    /// Maximum number of tiles before giving up.
    pub max_tiles: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            nodes_per_tile: 15,
            tolerance: 1e-12,
            max_tiles: 4000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub tiles: usize,
}

struct Tile {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl PartialEq for Tile {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Tile {}
impl PartialOrd for Tile {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Tile {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn tile<F: FnMut(f64) -> f64>(rule: &GaussLegendre, f: &mut F, a: f64, b: f64, whole: f64) -> Tile {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, &mut *f);
    let right = rule.integrate(mid, b, &mut *f);
    Tile {
        a,
        b,
        left,
        right,
        error: (left + right - whole).abs(),
    }
}

/// Globally adaptive Gauss–Legendre integration over `[lo, hi]`.
///
/// `breakpoints` seed the initial tiling; those outside `(lo, hi)` are
/// ignored. Each tile carries the rule on the whole tile and on its two
/// halves; the difference is the error estimate and the tile with the
/// largest estimate is bisected until the sum drops below the tolerance.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    config: &AdaptiveConfig,
    mut f: F,
) -> Result<Integral> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));

    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a {
            let whole = rule.integrate(a, b, &mut f);
            heap.push(tile(rule, &mut f, a, b, whole));
        }
    }

    loop {
        let total_error: f64 = heap.iter().map(|t| t.error).sum();
        if total_error <= config.tolerance {
            break;
        }
        if heap.len() >= config.max_tiles {
            return Err(Error::NonConvergence {
                estimate: total_error,
                tolerance: config.tolerance,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Tile at floating-point resolution; accept what we have.
            heap.push(Tile { error: 0.0, ..worst });
            continue;
        }
        heap.push(tile(rule, &mut f, worst.a, mid, worst.left));
        heap.push(tile(rule, &mut f, mid, worst.b, worst.right));
    }

    // Sum in position order so the result does not depend on heap layout.
    let mut tiles = heap.into_vec();
    tiles.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = tiles.iter().map(|t| t.left + t.right).sum();
    let error_estimate = tiles.iter().map(|t| t.error).sum();
    Ok(Integral {
        value,
        error_estimate,
        tiles: tiles.len(),
    })
}
