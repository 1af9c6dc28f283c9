//! Statistical plumbing: compensated summation, binomial confidence
//! intervals, chi-square goodness-of-fit, and Kolmogorov-Smirnov tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Kahan compensated accumulator; per-term error O(ulp).
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn merge(&mut self, other: Kahan) {
        self.add(other.sum);
        self.add(-other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Kahan::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// An empirical rate that never travels without its sample count and CI.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RateStat {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// z used for the Wilson interval (1.96 = 95%).
    pub ci_z: f64,
}

impl RateStat {
    pub fn wilson(successes: u64, trials: u64) -> Self {
        Self::wilson_z(successes, trials, 1.96)
    }

    pub fn wilson_z(successes: u64, trials: u64, z: f64) -> Self {
        assert!(successes <= trials);
        let n = trials as f64;
        if trials == 0 {
            return RateStat {
                successes,
                trials,
                rate: f64::NAN,
                ci_low: f64::NAN,
                ci_high: f64::NAN,
                ci_z: z,
            };
        }
        let p = successes as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
        RateStat {
            successes,
            trials,
            rate: p,
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
            ci_z: z,
        }
    }

    /// Binomial standard error sqrt(p(1-p)/n).
    pub fn stderr(&self) -> f64 {
        (self.rate * (1.0 - self.rate) / self.trials as f64).sqrt()
    }
}

/// Outcome of a chi-square goodness-of-fit test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

impl ChiSquareOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("dof > 0");
    1.0 - dist.cdf(statistic)
}

/// One-sample goodness of fit of observed counts against expected
/// probabilities. Bins with expected count < `min_expected` are merged into a
/// shared tail bin (standard validity condition for the chi-square
/// approximation); leftover probability mass is assigned to the tail bin.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> ChiSquareOutcome {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    let mut tail_obs = 0.0;
    let mut tail_exp = (1.0 - probs.iter().sum::<f64>()).max(0.0) * nf;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * nf;
        if e >= min_expected {
            stat += (o as f64 - e).powi(2) / e;
            bins += 1;
        } else {
            tail_obs += o as f64;
            tail_exp += e;
        }
    }
    if tail_exp > 0.0 {
        stat += (tail_obs - tail_exp).powi(2) / tail_exp;
        bins += 1;
    }
    let dof = bins.saturating_sub(1);
    ChiSquareOutcome {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
        bins,
    }
}

/// Two-sample chi-square homogeneity test on matched count vectors
/// (2 x B contingency table). Low-count bins are merged.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_total: f64) -> ChiSquareOutcome {
    assert_eq!(a.len(), b.len());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        acc.0 += x as f64;
        acc.1 += y as f64;
        if acc.0 + acc.1 >= min_total {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    let na: f64 = merged.iter().map(|r| r.0).sum();
    let nb: f64 = merged.iter().map(|r| r.1).sum();
    let total = na + nb;
    let mut stat = 0.0;
    for (oa, ob) in &merged {
        let row = oa + ob;
        let ea = row * na / total;
        let eb = row * nb / total;
        if ea > 0.0 {
            stat += (oa - ea).powi(2) / ea;
        }
        if eb > 0.0 {
            stat += (ob - eb).powi(2) / eb;
        }
    }
    let dof = merged.len().saturating_sub(1);
    ChiSquareOutcome {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
        bins: merged.len(),
    }
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic one-sample KS critical value; c(0.01) = 1.628.
pub fn ks_critical(n: usize, c_alpha: f64) -> f64 {
    c_alpha / (n as f64).sqrt()
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let xa = a[i];
        let xb = b[j];
        if xa <= xb {
            i += 1;
        }
        if xb <= xa {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    d
}

pub fn ks_two_sample_critical(na: usize, nb: usize, c_alpha: f64) -> f64 {
    c_alpha * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}
