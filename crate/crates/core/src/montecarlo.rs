//! Seeded, parallel Monte Carlo estimators that mirror every analytic
//! expectation of the library.
//!
//! Samples are split into fixed-size batches. Batch `i` draws from a ChaCha8
//! generator seeded with the user seed and switched to stream `i`, so the
//! result depends only on `(seed, n)` and not on the number of worker
//! threads. Batch accumulators are merged in batch order.

use rand::distr::OpenClosed01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::FadingDraw;
use crate::fbl::block_error_snr;
use crate::link_layer::ServiceStats;
use crate::params::{LinkGains, SystemParams};
use crate::relay::compose_error;

/// Samples per batch; fixes the mapping from sample index to RNG stream.
pub const BATCH_SIZE: u64 = 1 << 14;

/// Random generator used by every estimator.
pub type McRng = ChaCha8Rng;

/// Generator for batch `batch` of a run seeded with `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// A Monte Carlo estimate of a mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by `√n`.
    pub std_err: f64,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err
    }
}

/// Accumulators that can be combined across batches.
pub trait Merge: Default + Send {
    fn merge(&mut self, other: Self);
}

/// Streaming central moments up to order four.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n as f64 - 1.0)
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Standard error of [`Moments::variance`] from the fourth central moment.
    pub fn variance_std_err(&self) -> f64 {
        if self.n < 4 {
            return 0.0;
        }
        let n = self.n as f64;
        let mu4 = self.m4 / n;
        let s2 = self.m2 / n;
        let v = (mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
        v.max(0.0).sqrt()
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        McEstimate {
            mean: self.mean,
            std_err: self.std_err(),
            n: self.n,
            seed,
        }
    }
}

impl Merge for Moments {
    fn merge(&mut self, other: Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        let m3 =
            self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n) + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        self.mean += delta * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.n += other.n;
    }
}

impl Merge for u64 {
    fn merge(&mut self, other: Self) {
        *self += other;
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge(&mut self, other: Self) {
        self.0.merge(other.0);
        self.1.merge(other.1);
    }
}

/// Runs `n` samples of `sample` in parallel batches and merges the batch
/// accumulators in batch order.
pub fn run_batched<A, F>(n: u64, seed: u64, sample: F) -> A
where
    A: Merge,
    F: Fn(&mut McRng, &mut A) + Sync,
{
    let batches = n.div_ceil(BATCH_SIZE);
    let parts: Vec<A> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let mut acc = A::default();
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            for _ in 0..len {
                sample(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = A::default();
    for part in parts {
        total.merge(part);
    }
    total
}

/// Sample mean of `f(draw)` over `n` independent fading draws.
pub fn mc_mean<F>(n: u64, seed: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&FadingDraw, &mut McRng) -> f64 + Sync,
{
    check_samples(n)?;
    let moments: Moments = run_batched(n, seed, |rng, acc: &mut Moments| {
        let draw = draw_fading(rng);
        acc.push(f(&draw, rng));
    });
    Ok(moments.estimate(seed))
}

fn check_samples(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("n", "at least one sample is required"))
    } else {
        Ok(())
    }
}

/// Unit-mean exponential variate by inversion, `−ln u` with `u ∈ (0, 1]`.
#[inline]
pub fn exp_variate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(OpenClosed01);
    -u.ln()
}

/// Three independent unit-mean exponential fading gains.
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> FadingDraw {
    FadingDraw {
        z1: exp_variate(rng),
        z2: exp_variate(rng),
        z3: exp_variate(rng),
    }
}

/// Instantaneous backhaul and combined-link error probabilities of a draw.
#[inline]
fn hop_errors(draw: &FadingDraw, r: f64, m: f64, gains: &LinkGains, params: &SystemParams) -> (f64, f64) {
    let e2 = block_error_snr(params.snr(draw.z2 * gains.g2), r, m);
    let emrc = block_error_snr(params.snr(draw.z1 * gains.g1 + draw.z3 * gains.g3), r, m);
    (e2, emrc)
}

/// Sampled twin of the fading-averaged backhaul error.
pub fn mc_expected_error_backhaul(
    r: f64,
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    let mf = m as f64;
    mc_mean(n, seed, |d, _| block_error_snr(params.snr(d.z2 * gains.g2), r, mf))
}

/// Sampled twin of the fading-averaged combined-link error.
pub fn mc_expected_error_mrc(
    r: f64,
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    let mf = m as f64;
    mc_mean(n, seed, |d, _| {
        block_error_snr(params.snr(d.z1 * gains.g1 + d.z3 * gains.g3), r, mf)
    })
}

/// Sample mean of the per-period overall error probability.
pub fn mc_expected_overall_error(
    r: f64,
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    let mf = m as f64;
    mc_mean(n, seed, |d, _| {
        let (e2, emrc) = hop_errors(d, r, mf, gains, params);
        compose_error(e2, emrc)
    })
}

/// Simulates the decode events of one period: the relay decodes with
/// probability `1 − ε₂`, then the destination decodes the combined signal
/// with probability `1 − ε_MRC`.
#[inline]
fn period_success<R: Rng + ?Sized>(rng: &mut R, e2: f64, emrc: f64) -> bool {
    let relay_ok = rng.random::<f64>() >= e2;
    relay_ok && rng.random::<f64>() >= emrc
}

/// Average correctly delivered bits per channel use, `r/2` per successful
/// two-hop period.
pub fn mc_bl_throughput(
    r: f64,
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    let mf = m as f64;
    mc_mean(n, seed, |d, rng| {
        let (e2, emrc) = hop_errors(d, r, mf, gains, params);
        if period_success(rng, e2, emrc) {
            0.5 * r
        } else {
            0.0
        }
    })
}

/// Empirical statistics of the service increment `s = r·m·1{success}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceStatsEstimate {
    pub mean: McEstimate,
    pub variance: f64,
    pub variance_std_err: f64,
}

impl ServiceStatsEstimate {
    /// The estimate as plain service statistics, with the error probability
    /// implied by the sampled mean.
    pub fn stats(&self, r: f64, m: u64) -> ServiceStats {
        let rm = r * m as f64;
        let eps_bar = if rm > 0.0 { 1.0 - self.mean.mean / rm } else { 0.0 };
        ServiceStats {
            mean: self.mean.mean,
            variance: self.variance,
            eps_bar,
        }
    }
}

pub fn mc_service_stats(
    r: f64,
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    n: u64,
    seed: u64,
) -> Result<ServiceStatsEstimate> {
    check_samples(n)?;
    let mf = m as f64;
    let rm = r * mf;
    let moments: Moments = run_batched(n, seed, |rng, acc: &mut Moments| {
        let d = draw_fading(rng);
        let (e2, emrc) = hop_errors(&d, r, mf, gains, params);
        acc.push(if period_success(rng, e2, emrc) { rm } else { 0.0 });
    });
    Ok(ServiceStatsEstimate {
        mean: moments.estimate(seed),
        variance: moments.variance(),
        variance_std_err: moments.variance_std_err(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sqrt()).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(b);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        assert!(rel(a.mean, all.mean) < 1e-13);
        assert!(rel(a.m2, all.m2) < 1e-11);
        assert!(rel(a.m3, all.m3) < 1e-8);
        assert!(rel(a.m4, all.m4) < 1e-10);
    }

    #[test]
    fn moments_of_known_data() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        // Fourth central moment sum: 2·(1.5⁴ + 0.5⁴).
        assert!((m.m4 - 10.25).abs() < 1e-12);
    }

    #[test]
    fn exponential_draws_have_unit_mean_and_median_ln2() {
        let n = 1_000_000u64;
        let (m, below): (Moments, u64) = run_batched(n, 7, |rng, acc: &mut (Moments, u64)| {
            let d = draw_fading(rng);
            acc.0.push(d.z2);
            if d.z2 < LN_2 {
                acc.1 += 1;
            }
        });
        assert!((m.mean() - 1.0).abs() < 0.004);
        assert!((below as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn seeded_streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..5)
            .map(|_| 0.0)
            .scan(batch_rng(1, 0), |r, _| Some(exp_variate(r)))
            .collect();
        let b: Vec<f64> = (0..5)
            .map(|_| 0.0)
            .scan(batch_rng(1, 0), |r, _| Some(exp_variate(r)))
            .collect();
        let c: Vec<f64> = (0..5)
            .map(|_| 0.0)
            .scan(batch_rng(1, 1), |r, _| Some(exp_variate(r)))
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn estimates_do_not_depend_on_thread_count() {
        let gains = LinkGains::new(0.5, 20.0, 20.0).unwrap();
        let params = SystemParams::unit_snr(200, 1e-3, 0.2).unwrap();
        let run = || mc_expected_overall_error(2.0, 200, &gains, &params, 50_000, 9).unwrap();
        let base = run();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let triple = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(base, single);
        assert_eq!(base, triple);
    }

    #[test]
    fn zero_rate_is_nearly_error_free() {
        let gains = LinkGains::new(1e4, 1e4, 1e4).unwrap();
        let params = SystemParams::unit_snr(500, 1e-3, 0.2).unwrap();
        let e = mc_expected_overall_error(0.0, 500, &gains, &params, 10_000, 1).unwrap();
        assert!(e.mean < 1e-4, "{}", e.mean);
    }

    #[test]
    fn error_free_links_deliver_half_the_rate() {
        // Huge gains and a tiny rate make both errors underflow to zero.
        let gains = LinkGains::new(1e12, 1e12, 1e12).unwrap();
        let params = SystemParams::unit_snr(500, 1e-3, 0.2).unwrap();
        let t = mc_bl_throughput(1.0, 500, &gains, &params, 20_000, 3).unwrap();
        assert_eq!(t.mean, 0.5);
        assert_eq!(t.std_err, 0.0);
        let s = mc_service_stats(1.0, 500, &gains, &params, 20_000, 3).unwrap();
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.mean.mean, 500.0);
    }

    #[test]
    fn rejects_empty_runs() {
        let gains = LinkGains::new(0.5, 20.0, 20.0).unwrap();
        let params = SystemParams::unit_snr(500, 1e-3, 0.2).unwrap();
        assert!(mc_bl_throughput(1.0, 500, &gains, &params, 0, 3).is_err());
    }
}
