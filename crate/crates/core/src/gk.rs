//! Gauss-Kuzmin limits for continued-fraction digits of a uniform random
//! number, and a seeded Monte Carlo check against them.
//!
//! Samples are dyadic cells `[n/2^bits, (n+1)/2^bits)`; a digit counts only
//! when both endpoints of the cell agree on it.

use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cf::random::{dyadic_cell_digits, sample_numerator};
use crate::cf::DIVERGENCE_THRESHOLD;
use crate::error::{Error, Result};

/// Digits tabulated in reports.
pub const TABLE_MAX: u64 = 10;

/// `lim P(a_k = n) = log2(1 + 1/(n(n+2)))`.
pub fn gk_limit(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidInput("digit must be >= 1".into()));
    }
    let n = n as f64;
    Ok((1.0 / (n * (n + 2.0))).ln_1p() / std::f64::consts::LN_2)
}

/// `lim P(a_k = n2 | a_{k-1} = n1)`.
pub fn gk_conditional(n1: u64, n2: u64) -> Result<f64> {
    if n1 < 1 || n2 < 1 {
        return Err(Error::InvalidInput("digits must be >= 1".into()));
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let joint = (1.0 / (((b + 1.0) * a + 1.0) * ((a + 1.0) * b + 1.0))).ln_1p();
    let marginal = (1.0 / (a * (a + 2.0))).ln_1p();
    Ok(joint / marginal)
}

/// Bits so that `window` digits are determined for nearly every sample;
/// `q_W` grows like `e^{1.19 W}`, so the cell must be finer than `q_W^{-2}`.
pub fn bits_for_window(window: usize) -> u32 {
    (5 * window as u32 + 64).max(256)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// Binomial standard error `sqrt(p(1 - p)/count)`.
    pub stderr: f64,
    pub count: u64,
}

impl Estimate {
    fn binomial(hits: u64, count: u64) -> Estimate {
        let value = if count == 0 { f64::NAN } else { hits as f64 / count as f64 };
        let stderr = if count == 0 {
            f64::NAN
        } else {
            (value * (1.0 - value) / count as f64).sqrt()
        };
        Estimate { value, stderr, count }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitRow {
    pub n: u64,
    pub empirical: f64,
    pub limit: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    pub window: usize,
    pub threshold: u64,
    /// Share of samples with `sum_{j=2}^{W} 1/(a_j a_{j-1}) > threshold`.
    pub fraction: Estimate,
    pub dropped: u64,
    /// A finite window cannot certify divergence.
    pub heuristic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub seed: u64,
    pub samples: u64,
    pub k_index: usize,
    pub bits: u32,
    /// Samples whose `a_k` was not determined by their cell.
    pub dropped: u64,
    pub digits: Vec<DigitRow>,
    /// `P(a_k = 1 | a_{k-1} = 1)`.
    pub conditional_one_one: Estimate,
    pub conditional_limit: f64,
    pub divergence: Option<Divergence>,
}

impl MonteCarloReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,empirical,limit,stderr\n");
        for r in &self.digits {
            s.push_str(&format!("{},{:.6},{:.6},{:.6}\n", r.n, r.empirical, r.limit, r.stderr));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub seed: u64,
    pub samples: u64,
    pub k_index: usize,
    pub bits: u32,
    /// Window `W` for the divergence proxy, if wanted.
    pub window: Option<usize>,
    pub threshold: u64,
}

impl MonteCarloConfig {
    pub fn new(seed: u64, samples: u64, k_index: usize) -> Self {
        MonteCarloConfig {
            seed,
            samples,
            k_index,
            bits: 256,
            window: None,
            threshold: DIVERGENCE_THRESHOLD,
        }
    }
}

#[derive(Default)]
struct Tally {
    determined: u64,
    digit_counts: [u64; TABLE_MAX as usize + 1],
    prev_one: u64,
    one_one: u64,
    window_determined: u64,
    diverged: u64,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.determined += o.determined;
        for (a, b) in self.digit_counts.iter_mut().zip(&o.digit_counts) {
            *a += b;
        }
        self.prev_one += o.prev_one;
        self.one_one += o.one_one;
        self.window_determined += o.window_determined;
        self.diverged += o.diverged;
    }
}

/// Sample `i` draws from stream `i` of the seeded generator, so results do
/// not depend on how samples are split across threads.
fn tally_range(cfg: &MonteCarloConfig, range: std::ops::Range<u64>) -> Tally {
    let mut t = Tally::default();
    let k = cfg.k_index;
    for i in range {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i);
        let n = sample_numerator(&mut rng, cfg.bits);
        let d = dyadic_cell_digits(&n, cfg.bits);
        if d.len() >= k {
            t.determined += 1;
            let a = d[k - 1];
            if a <= TABLE_MAX {
                t.digit_counts[a as usize] += 1;
            }
            if k >= 2 && d[k - 2] == 1 {
                t.prev_one += 1;
                if a == 1 {
                    t.one_one += 1;
                }
            }
        }
        if let Some(w) = cfg.window {
            if d.len() >= w {
                t.window_determined += 1;
                let s: f64 = d[..w].windows(2).map(|p| 1.0 / (p[0] as f64 * p[1] as f64)).sum();
                if s > cfg.threshold as f64 {
                    t.diverged += 1;
                }
            }
        }
    }
    t
}

pub fn montecarlo(cfg: &MonteCarloConfig) -> Result<MonteCarloReport> {
    if cfg.samples < 1 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    if cfg.k_index < 1 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    let workers = thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let chunk = cfg.samples.div_ceil(workers);
    let mut total = Tally::default();
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(cfg.samples);
                let hi = ((w + 1) * chunk).min(cfg.samples);
                s.spawn(move || tally_range(cfg, lo..hi))
            })
            .collect();
        for h in handles {
            total.merge(&h.join().expect("sampling thread"));
        }
    });

    let digits = (1..=TABLE_MAX)
        .map(|n| {
            let e = Estimate::binomial(total.digit_counts[n as usize], total.determined);
            DigitRow {
                n,
                empirical: e.value,
                limit: gk_limit(n).expect("n >= 1"),
                stderr: e.stderr,
            }
        })
        .collect();
    let divergence = cfg.window.map(|w| Divergence {
        window: w,
        threshold: cfg.threshold,
        fraction: Estimate::binomial(total.diverged, total.window_determined),
        dropped: cfg.samples - total.window_determined,
        heuristic: true,
    });
    Ok(MonteCarloReport {
        seed: cfg.seed,
        samples: cfg.samples,
        k_index: cfg.k_index,
        bits: cfg.bits,
        dropped: cfg.samples - total.determined,
        digits,
        conditional_one_one: Estimate::binomial(total.one_one, total.prev_one),
        conditional_limit: gk_conditional(1, 1).expect("valid digits"),
        divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        assert!((gk_limit(1).unwrap() - 0.4150).abs() < 5e-5);
        assert!((gk_limit(2).unwrap() - (9.0f64 / 8.0).log2()).abs() < 1e-15);
        assert!((gk_conditional(1, 1).unwrap() - 0.3662).abs() < 5e-5);
        assert!(gk_limit(0).is_err());
        assert!(gk_conditional(0, 3).is_err());
    }

    #[test]
    fn partial_sums_approach_one() {
        let s: f64 = (1..=1000).map(|n| gk_limit(n).unwrap()).sum();
        // telescopes to log2(2(N+1)/(N+2))
        assert!((s - (2.0 * 1001.0 / 1002.0f64).log2()).abs() < 1e-12);
        // the deficit log2((N+2)/(N+1)) first drops below 1e-3 at N = 1442
        let deficit = |n: f64| ((n + 2.0) / (n + 1.0)).log2();
        assert!(deficit(1000.0) > 1e-3);
        assert!(deficit(1441.0) > 1e-3 && deficit(1442.0) <= 1e-3);
        let s: f64 = (1..=1442).map(|n| gk_limit(n).unwrap()).sum();
        assert!(1.0 - s <= 1e-3);
        for n1 in 1..=3 {
            let row: f64 = (1..=100_000).map(|n2| gk_conditional(n1, n2).unwrap()).sum();
            assert!((row - 1.0).abs() < 1e-3, "row {n1}: {row}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = MonteCarloConfig::new(3, 500, 5);
        let a = montecarlo(&cfg).unwrap();
        let b = montecarlo(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.dropped < 5);
        assert!(a.to_csv().starts_with("n,empirical,limit,stderr\n1,"));
    }
}
