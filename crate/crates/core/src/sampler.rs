//! Discrete Gaussian samplers.
//!
//! Two independent routes are kept deliberately: an exact sampler (CDF
//! inversion over a tail-truncated, enumerated support) and a Klein-style
//! randomized nearest-plane sampler with a rejection correction that makes
//! its output distribution exact in the valid regime. Cross-validating the
//! two is the main distributional test in this crate.

use crate::enumerate::FloatEnum;
use crate::error::Error;
use crate::gaussian::{rho_scalar_sq, smoothing_parameter, GaussianParam, TruncationPolicy};
use crate::lattice::{Basis, FloatLattice, LatticeVector};
use crate::rational::{rat_from_f64, Rat};
use crate::stats::Kahan;
use num_bigint::BigInt;
use rand::Rng;
use std::f64::consts::PI;

/// Exact sampler for D_{L,s}: enumerated support sorted deterministically,
/// prefix-sum CDF, binary-search inversion. Total-variation distance from
/// D_{L,s} is bounded by the truncation policy's relative error target.
pub struct DiscreteGaussian {
    basis: Basis,
    support: Vec<(Vec<i64>, f64)>,
    cdf: Vec<f64>,
    total: f64,
    pub s: f64,
    pub truncation_radius: f64,
}

impl DiscreteGaussian {
    pub fn build(
        basis: &Basis,
        fl: &FloatLattice,
        s: f64,
        policy: TruncationPolicy,
    ) -> Result<Self, Error> {
        GaussianParam::new(s)?;
        let radius = policy.radius(fl.n, s, policy.initial_tail_x());
        let center = vec![0.0; fl.n];
        let mut support: Vec<(Vec<i64>, f64)> = Vec::new();
        FloatEnum::new(fl, &center).visit(radius, |z, dist_sq| {
            support.push((z.to_vec(), rho_scalar_sq(s, dist_sq)));
        });
        if support.is_empty() {
            return Err(Error::InvalidParameter(
                "empty truncated support; width too small for policy radius".into(),
            ));
        }
        // Deterministic order: weight descending, then lexicographic coords.
        support.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| a.0.cmp(&b.0))
        });
        let mut cdf = Vec::with_capacity(support.len());
        let mut acc = Kahan::new();
        for (_, w) in &support {
            acc.add(*w);
            cdf.push(acc.value());
        }
        Ok(DiscreteGaussian {
            basis: basis.clone(),
            support,
            cdf,
            total: acc.value(),
            s,
            truncation_radius: radius,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> LatticeVector {
        let u: f64 = rng.random::<f64>() * self.total;
        let idx = self.cdf.partition_point(|&c| c < u).min(self.support.len() - 1);
        let coords: Vec<BigInt> = self.support[idx].0.iter().map(|&z| BigInt::from(z)).collect();
        self.basis.lattice_vector(coords)
    }

    /// Probability mass of a support point under the truncated distribution.
    pub fn pmf_coords(&self, coords: &[i64]) -> f64 {
        self.support
            .iter()
            .find(|(z, _)| z == coords)
            .map(|(_, w)| w / self.total)
            .unwrap_or(0.0)
    }

    pub fn support(&self) -> &[(Vec<i64>, f64)] {
        &self.support
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }
}

/// One draw from the 1-d discrete Gaussian D_{Z, s, c} (integers, center c),
/// by CDF inversion over a tail-truncated window.
pub fn sample_z_discrete<R: Rng>(c: f64, s: f64, tail_x: f64, rng: &mut R) -> i64 {
    let t = s * (tail_x + (1.0 / (2.0 * PI)).sqrt());
    let lo = (c - t).floor() as i64;
    let hi = (c + t).ceil() as i64;
    let mut weights = Vec::with_capacity((hi - lo + 1) as usize);
    let mut total = 0.0;
    for k in lo..=hi {
        let d = k as f64 - c;
        let w = (-PI * d * d / (s * s)).exp();
        total += w;
        weights.push(total);
    }
    let u: f64 = rng.random::<f64>() * total;
    let idx = weights.partition_point(|&x| x < u).min(weights.len() - 1);
    lo + idx as i64
}

/// Truncated 1-d mass rho_s(Z - c).
fn rho_z_shifted(c: f64, s: f64, tail_x: f64) -> f64 {
    let t = s * (tail_x + (1.0 / (2.0 * PI)).sqrt());
    let lo = (c - t).floor() as i64;
    let hi = (c + t).ceil() as i64;
    let mut acc = Kahan::new();
    for k in lo..=hi {
        let d = k as f64 - c;
        acc.add((-PI * d * d / (s * s)).exp());
    }
    acc.value()
}

/// Precondition handling for Klein's sampler below its valid width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthCheck {
    /// Reject widths below ||B~|| sqrt(log n).
    Strict,
    /// Proceed anyway (experiments); acceptance rate may crater.
    WarnAndProceed,
}

/// Klein / randomized-nearest-plane sampler with rejection correction: each
/// candidate is accepted with probability
/// prod_i rho_{s_i}(Z - c_i) / rho_{s_i}(Z), which turns the nearest-plane
/// proposal into exactly D_{L,s}.
pub struct KleinSampler {
    basis: Basis,
    fl: FloatLattice,
    pub s: f64,
    tail_x: f64,
    centered_masses: Vec<f64>,
    pub width_ok: bool,
    max_retries: usize,
}

impl KleinSampler {
    pub fn new(
        basis: &Basis,
        s: f64,
        policy: TruncationPolicy,
        check: WidthCheck,
    ) -> Result<Self, Error> {
        GaussianParam::new(s)?;
        let fl = basis.to_float();
        let n = fl.n;
        let floor = fl.max_gs_norm() * ((n.max(2)) as f64).ln().sqrt();
        let width_ok = s >= floor;
        if !width_ok && check == WidthCheck::Strict {
            return Err(Error::PreconditionViolated(format!(
                "Klein width {s} below ||B~|| sqrt(log n) = {floor}"
            )));
        }
        let tail_x = policy.initial_tail_x();
        let centered_masses = (0..n)
            .map(|i| rho_z_shifted(0.0, s / fl.norms_sq[i].sqrt(), tail_x))
            .collect();
        Ok(KleinSampler {
            basis: basis.clone(),
            fl,
            s,
            tail_x,
            centered_masses,
            width_ok,
            max_retries: 100_000,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<LatticeVector, Error> {
        for _ in 0..self.max_retries {
            if let Some(v) = self.propose(rng) {
                return Ok(v);
            }
        }
        Err(Error::RetryExhausted(format!(
            "Klein rejection never accepted at width {} (below smoothing?)",
            self.s
        )))
    }

    fn propose<R: Rng>(&self, rng: &mut R) -> Option<LatticeVector> {
        let n = self.fl.n;
        let mut z = vec![0i64; n];
        let mut accept_prob = 1.0f64;
        for i in (0..n).rev() {
            // Center of the level-i coefficient given choices above it.
            let mut c = 0.0;
            for j in (i + 1)..n {
                c -= self.fl.mu[j][i] * z[j] as f64;
            }
            let s_i = self.s / self.fl.norms_sq[i].sqrt();
            z[i] = sample_z_discrete(c, s_i, self.tail_x, rng);
            accept_prob *= rho_z_shifted(c, s_i, self.tail_x) / self.centered_masses[i];
        }
        // The rejection step that removes the center-dependent bias.
        if rng.random::<f64>() <= accept_prob {
            let coords: Vec<BigInt> = z.iter().map(|&v| BigInt::from(v)).collect();
            Some(self.basis.lattice_vector(coords))
        } else {
            None
        }
    }
}

/// Output of the convolution step: the combined vector and the effective
/// width sqrt(sum (z_i s_i)^2), with the exact squared value carried along.
#[derive(Clone, Debug)]
pub struct Convolved {
    pub vector: LatticeVector,
    pub s_eff: f64,
    pub s_eff_sq: Rat,
}

/// Combines independent D_{L, s_i} samples with coefficients in {-1, 0, 1}:
/// y = sum z_i y_i, distributed close to D_{L, s} for
/// s = sqrt(sum (z_i s_i)^2), provided each s_i >= sqrt(2) ||z||_inf
/// eta_eps(L). In strict mode the width condition is checked against the
/// computed smoothing parameter.
pub fn convolve_dgs(
    basis: &Basis,
    samples: &[LatticeVector],
    z: &[i8],
    widths: &[f64],
    eps: f64,
    policy: TruncationPolicy,
    strict: bool,
) -> Result<Convolved, Error> {
    if samples.len() != z.len() || widths.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: samples.len().max(widths.len()),
        });
    }
    if z.iter().all(|&c| c == 0) {
        return Err(Error::InvalidParameter("z must be nonzero".into()));
    }
    if z.iter().any(|&c| !(-1..=1).contains(&c)) {
        return Err(Error::InvalidParameter("z entries must be in {-1,0,1}".into()));
    }
    if strict {
        let eta = smoothing_parameter(basis, eps, policy)?;
        let floor = (2.0f64).sqrt() * eta; // ||z||_inf = 1 for nonzero ternary z
        for (i, &s_i) in widths.iter().enumerate() {
            if z[i] != 0 && s_i < floor {
                return Err(Error::PreconditionViolated(format!(
                    "convolution width s_{i} = {s_i} below sqrt(2) eta_eps = {floor}"
                )));
            }
        }
    }
    let n = basis.n();
    let mut coords = vec![BigInt::from(0); n];
    for (i, &c) in z.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if samples[i].coords.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: samples[i].coords.len(),
            });
        }
        for (j, coord) in samples[i].coords.iter().enumerate() {
            if c > 0 {
                coords[j] += coord;
            } else {
                coords[j] -= coord;
            }
        }
    }
    let mut s_eff_sq = Rat::from_integer(BigInt::from(0));
    let mut s2 = 0.0f64;
    for (i, &c) in z.iter().enumerate() {
        if c != 0 {
            s2 += widths[i] * widths[i];
            let w = rat_from_f64(widths[i]);
            s_eff_sq += &w * &w;
        }
    }
    Ok(Convolved {
        vector: basis.lattice_vector(coords),
        s_eff: s2.sqrt(),
        s_eff_sq,
    })
}
