//! Exact binomial statistics, confidence intervals, and reproducible
//! Monte Carlo plumbing.
//!
//! The binomial tail here is *exact* (a compensated sum of probability mass
//! terms, not a normal approximation): dispute verdict thresholds sit in the
//! far tail where approximations are off by orders of magnitude. Trial
//! running is counter-based: every trial derives its own RNG from
//! `(master seed, trial index)`, so estimates are independent of execution
//! order and replay bit-for-bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::quantum::{Axis, Direction};

/// Errors from statistical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    /// Tail threshold `k` beyond the number of draws `n`.
    #[error("threshold k = {k} exceeds n = {n}")]
    ThresholdOutOfRange { n: u64, k: u64 },
    /// A probability parameter outside `[0, 1]`.
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    /// More successes than trials.
    #[error("successes {successes} exceed trials {trials}")]
    TooManySuccesses { successes: u64, trials: u64 },
    /// Confidence level outside the open interval `(0, 1)`.
    #[error("confidence level {0} outside (0, 1)")]
    InvalidLevel(f64),
    /// An estimate needs at least one trial.
    #[error("at least one trial is required")]
    NoTrials,
}

fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Binomial probability mass at `m` as `mantissa * 2^exp2`.
///
/// Built as an interleaved product of binomial-coefficient factors
/// `((n-m+j)/j)·p` and plain `q` factors, with explicit power-of-two
/// rescaling — no logarithms, so the only error is one rounding per
/// multiplication and far-tail masses keep full relative precision instead
/// of underflowing.
fn scaled_pmf(n: u64, m: u64, p: f64, q: f64) -> (f64, i64) {
    const LOW: f64 = 1e-270;
    const HIGH: f64 = 1e270;
    // 2^900 is exactly representable; multiplying by it only shifts the
    // exponent.
    let up = 2f64.powi(900);
    let down = 2f64.powi(-900);
    let q_factors = n - m;
    let mut mantissa = 1.0f64;
    let mut exp2 = 0i64;
    let mut taken_p = 0u64;
    let mut taken_q = 0u64;
    while taken_p < m || taken_q < q_factors {
        if taken_q < q_factors && (mantissa >= 1.0 || taken_p == m) {
            mantissa *= q;
            taken_q += 1;
        } else {
            taken_p += 1;
            mantissa *= (q_factors + taken_p) as f64 / taken_p as f64 * p;
        }
        if mantissa < LOW {
            mantissa *= up;
            exp2 -= 900;
        } else if mantissa > HIGH {
            mantissa *= down;
            exp2 += 900;
        }
    }
    (mantissa, exp2)
}

/// `x * 2^e` without intermediate overflow/underflow surprises.
fn apply_exp2(mut x: f64, mut e: i64) -> f64 {
    while e > 900 {
        x *= 2f64.powi(900);
        e -= 900;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -900 {
        x *= 2f64.powi(-900);
        e += 900;
        if x == 0.0 {
            return 0.0;
        }
    }
    x * 2f64.powi(e as i32)
}

/// Exact upper tail `P[X >= k]` for `X ~ Binomial(n, p)`.
///
/// Anchors at the largest mass in `[k, n]`, walks the exact term recurrence
/// in both directions with a Kahan-compensated sum, and terminates once
/// terms stop contributing. Relative accuracy is near machine precision for
/// `n` up to 1e5, including tails far below 1e-300 (which round to the
/// nearest representable, possibly 0).
pub fn binomial_tail(n: u64, k: u64, p: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::InvalidProbability(p));
    }
    if k > n {
        return Err(StatsError::ThresholdOutOfRange { n, k });
    }
    if k == 0 {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let q = 1.0 - p;
    // The unconstrained mode floor((n+1)p), clamped into the summation
    // range: terms decrease monotonically moving away from it.
    let mode = ((n as f64 + 1.0) * p).floor().clamp(k as f64, n as f64) as u64;
    let (anchor, exp2) = scaled_pmf(n, mode, p, q);
    let mut sum = anchor;
    let mut comp = 0.0f64;
    // Upward sweep: pmf(i+1) = pmf(i) * (n-i)/(i+1) * p/q.
    let mut term = anchor;
    let mut i = mode;
    while i < n {
        term *= (n - i) as f64 * p / ((i + 1) as f64 * q);
        i += 1;
        kahan_add(&mut sum, &mut comp, term);
        if term < sum * 1e-18 {
            break;
        }
    }
    // Downward sweep to k: pmf(j-1) = pmf(j) * j/(n-j+1) * q/p.
    term = anchor;
    let mut j = mode;
    while j > k {
        term *= j as f64 * q / ((n - j + 1) as f64 * p);
        j -= 1;
        kahan_add(&mut sum, &mut comp, term);
        if term < sum * 1e-18 {
            break;
        }
    }
    Ok(apply_exp2(sum, exp2).min(1.0))
}

/// Wilson score interval for a binomial proportion at the given two-sided
/// confidence level.
///
/// Boundary cases are algebraically exact: zero successes pin the lower
/// bound to 0.0 and all-successes pin the upper bound to 1.0.
pub fn confidence_interval(
    successes: u64,
    trials: u64,
    level: f64,
) -> Result<(f64, f64), StatsError> {
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    if successes > trials {
        return Err(StatsError::TooManySuccesses { successes, trials });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidLevel(level));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal parameters are valid")
        .inverse_cdf(0.5 + level / 2.0);
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((low, high))
}

/// Outcome of a repeated-trial estimate: success count, point estimate, and
/// Wilson confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
}

/// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child stream `index` from a master seed.
///
/// Statistically decorrelated across both arguments (SplitMix64 finalizer
/// applied twice), so trials, sweep rows, and per-direction streams can all
/// hang off one master seed without sharing state.
pub fn child_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Runs `trials` independent boolean experiments and estimates the success
/// probability with a Wilson interval at `level`.
///
/// Trial `i` receives a fresh ChaCha12 RNG seeded with
/// `child_seed(master_seed, i)`: results are reproducible and independent of
/// the order in which trials run.
pub fn run_trials<F>(
    trials: u64,
    master_seed: u64,
    level: f64,
    mut experiment: F,
) -> Result<TrialEstimate, StatsError>
where
    F: FnMut(&mut ChaCha12Rng) -> bool,
{
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    let mut successes = 0u64;
    for i in 0..trials {
        let mut rng = ChaCha12Rng::seed_from_u64(child_seed(master_seed, i));
        if experiment(&mut rng) {
            successes += 1;
        }
    }
    let (ci_low, ci_high) = confidence_interval(successes, trials, level)?;
    Ok(TrialEstimate {
        trials,
        successes,
        estimate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        level,
    })
}

/// A direction drawn uniformly from the sphere (uniform `z`, uniform
/// azimuth).
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Direction::new(s * phi.cos(), s * phi.sin(), z)
        .expect("construction is unit length by trigonometry")
}

/// An axis drawn uniformly from the projective sphere.
pub fn uniform_axis<R: Rng + ?Sized>(rng: &mut R) -> Axis {
    Axis::new(uniform_direction(rng))
}

/// A direction at polar angle `theta` (radians) from the axis
/// representative, with uniform azimuth.
pub fn direction_at_polar_angle<R: Rng + ?Sized>(
    axis: Axis,
    theta: f64,
    rng: &mut R,
) -> Direction {
    let a = axis.representative();
    let (u, v) = a.tangent_frame();
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (st, ct) = theta.sin_cos();
    let (cp, sp) = (phi.cos(), phi.sin());
    let c = [
        ct * a.x() + st * (cp * u.x() + sp * v.x()),
        ct * a.y() + st * (cp * u.y() + sp * v.y()),
        ct * a.z() + st * (cp * u.z() + sp * v.z()),
    ];
    Direction::new(c[0], c[1], c[2])
        .expect("rotation of a unit vector stays unit length")
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference tails computed with 60-digit arithmetic, written with
    // their full computed decimals.
    const TAIL_100_60_HALF: f64 = 0.028443966820490396;
    const TAIL_100_60_P55: f64 = 0.18305694421446546;
    #[allow(clippy::excessive_precision)]
    const TAIL_1E5_50250_HALF: f64 = 0.057285273232777512;
    const TAIL_1E5_300_P002: f64 = 2.5777793417404989e-11;

    #[test]
    fn tail_handles_edge_parameters() {
        assert_eq!(binomial_tail(10, 0, 0.3).unwrap(), 1.0);
        assert_eq!(binomial_tail(10, 3, 0.0).unwrap(), 0.0);
        assert_eq!(binomial_tail(10, 0, 0.0).unwrap(), 1.0);
        assert_eq!(binomial_tail(10, 10, 1.0).unwrap(), 1.0);
        assert_eq!(binomial_tail(0, 0, 0.5).unwrap(), 1.0);
        assert!(matches!(
            binomial_tail(10, 11, 0.5),
            Err(StatsError::ThresholdOutOfRange { .. })
        ));
        assert!(matches!(
            binomial_tail(10, 3, 1.5),
            Err(StatsError::InvalidProbability(_))
        ));
    }

    #[test]
    fn tail_matches_small_closed_forms() {
        // P[X >= n] = p^n and P[X >= 1] = 1 - q^n.
        let t = binomial_tail(20, 20, 0.5).unwrap();
        assert_eq!(t, 0.5f64.powi(20));
        let t = binomial_tail(8, 1, 0.25).unwrap();
        assert!((t - (1.0 - 0.75f64.powi(8))).abs() < 1e-16);
        // Symmetric coin: P[X >= k] + P[X >= n-k+1] = 1 + pmf-overlap-free
        // complement; at n=5, k=3: P[X>=3] = 0.5 exactly.
        assert!((binomial_tail(5, 3, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tail_matches_reference_values() {
        let t = binomial_tail(100, 60, 0.5).unwrap();
        assert!((t - TAIL_100_60_HALF).abs() < 1e-15, "got {t:.17e}");
        let t = binomial_tail(100, 60, 0.55).unwrap();
        assert!((t - TAIL_100_60_P55).abs() < 1e-14, "got {t:.17e}");
    }

    #[test]
    fn tail_stays_accurate_at_large_n() {
        let t = binomial_tail(100_000, 50_250, 0.5).unwrap();
        assert!(
            (t - TAIL_1E5_50250_HALF).abs() < 1e-12,
            "got {t:.17e}, want {TAIL_1E5_50250_HALF:.17e}"
        );
        let t = binomial_tail(100_000, 300, 0.002).unwrap();
        assert!(
            ((t - TAIL_1E5_300_P002) / TAIL_1E5_300_P002).abs() < 1e-10,
            "got {t:.17e}, want {TAIL_1E5_300_P002:.17e}"
        );
    }

    #[test]
    fn tail_complement_sums_to_one() {
        // Independent lower-sum oracle via the same-direction recurrence
        // starting from pmf(0) = q^n (parameters chosen so it does not
        // underflow).
        let cases = [
            (400u64, 173u64, 0.42f64),
            (250, 200, 0.8),
            (97, 13, 0.2),
            (1000, 500, 0.5),
        ];
        for (n, k, p) in cases {
            let q = 1.0 - p;
            let mut term = q.powi(n as i32);
            let mut lower = 0.0f64;
            let mut comp = 0.0f64;
            for i in 0..k {
                if i > 0 {
                    term *= (n - i + 1) as f64 * p / (i as f64 * q);
                }
                kahan_add(&mut lower, &mut comp, term);
            }
            let upper = binomial_tail(n, k, p).unwrap();
            assert!(
                (upper + lower - 1.0).abs() < 1e-12,
                "n={n} k={k} p={p}: {upper} + {lower}"
            );
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn wilson_interval_matches_reference() {
        // 50/100 at 95%: classic Wilson bounds, full computed decimals.
        let (lo, hi) = confidence_interval(50, 100, 0.95).unwrap();
        assert!((lo - 0.40383153036599563).abs() < 1e-6);
        assert!((hi - 0.59616846963400437).abs() < 1e-6);
        // Interval is centered for a symmetric count.
        assert!((lo + hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_boundaries_are_exact() {
        let (lo, hi) = confidence_interval(0, 100, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = confidence_interval(100, 100, 0.95).unwrap();
        assert_eq!(hi, 1.0);
        assert!(lo > 0.95 && lo < 1.0);
    }

    #[test]
    fn wilson_interval_rejects_bad_inputs() {
        assert!(matches!(
            confidence_interval(5, 0, 0.95),
            Err(StatsError::NoTrials)
        ));
        assert!(matches!(
            confidence_interval(5, 4, 0.95),
            Err(StatsError::TooManySuccesses { .. })
        ));
        assert!(matches!(
            confidence_interval(1, 4, 1.0),
            Err(StatsError::InvalidLevel(_))
        ));
    }

    #[test]
    fn wilson_interval_narrows_with_trials() {
        let (lo1, hi1) = confidence_interval(50, 100, 0.95).unwrap();
        let (lo2, hi2) = confidence_interval(5000, 10_000, 0.95).unwrap();
        assert!(hi2 - lo2 < hi1 - lo1);
    }

    #[test]
    fn child_seeds_do_not_collide_locally() {
        let mut seen = std::collections::HashSet::new();
        for master in [0u64, 1, 0xDEAD_BEEF] {
            for i in 0..10_000u64 {
                assert!(seen.insert(child_seed(master, i)));
            }
        }
    }

    #[test]
    fn run_trials_is_reproducible_and_order_independent() {
        let coin = |rng: &mut ChaCha12Rng| rng.random::<f64>() < 0.3;
        let a = run_trials(2000, 99, 0.95, coin).unwrap();
        let b = run_trials(2000, 99, 0.95, coin).unwrap();
        assert_eq!(a, b);
        // Reverse-order replay: same per-trial seeds, same success count.
        let mut successes = 0u64;
        for i in (0..2000u64).rev() {
            let mut rng = ChaCha12Rng::seed_from_u64(child_seed(99, i));
            if coin(&mut rng) {
                successes += 1;
            }
        }
        assert_eq!(successes, a.successes);
        // And the estimate is statistically sane.
        assert!(a.ci_low < 0.3 && 0.3 < a.ci_high);
    }

    #[test]
    fn run_trials_requires_trials() {
        assert!(matches!(
            run_trials(0, 1, 0.95, |_| true),
            Err(StatsError::NoTrials)
        ));
    }

    #[test]
    fn uniform_direction_is_unbiased_per_octant() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 80_000;
        let mut octants = [0u32; 8];
        for _ in 0..n {
            let d = uniform_direction(&mut rng);
            let idx = ((d.x() > 0.0) as usize)
                | (((d.y() > 0.0) as usize) << 1)
                | (((d.z() > 0.0) as usize) << 2);
            octants[idx] += 1;
        }
        let expected = n as f64 / 8.0;
        let sigma = (n as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
        for (i, &c) in octants.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() < 4.0 * sigma,
                "octant {i}: {c} vs {expected}"
            );
        }
    }

    #[test]
    fn polar_angle_direction_has_requested_angle() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..100 {
            let axis = uniform_axis(&mut rng);
            let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            let d = direction_at_polar_angle(axis, theta, &mut rng);
            let cos = d.dot(axis.representative());
            assert!((cos - theta.cos()).abs() < 1e-12);
        }
    }
}
