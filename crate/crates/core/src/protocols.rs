//! Simulation of the two-round private-coin ball-shift protocol: Arthur's
//! sampling round, the honest distance-threshold Merlin, and a Bayes-optimal
//! cheating Merlin built from exact preimage counting. The soundness
//! analysis only asserts an information-theoretic limit on any cheater;
//! building the optimal one lets the tests probe that limit's tightness.

use crate::enumerate::points_within;
use crate::error::Error;
use crate::formulas::{self, Ratio64};
use crate::geometry::{sample_uniform_body, BodyKind, NormBody};
use crate::lattice::{reduce_mod_parallelepiped, Basis, Target};
use crate::rational::{self, rat_from_f64, Rat};
use crate::rng::SeedTree;
use crate::solvers::{cvp_exact, EnumerationCaps};
use crate::verifiers::PresetTag;
use num_traits::Signed;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Protocol configuration. The sampling radius is r = gamma d / 2, kept as
/// an exact rational so the honest threshold comparison is exact.
#[derive(Clone, Debug)]
pub struct GGConfig {
    pub gamma: Rat,
    pub d: Rat,
    pub rounds: usize,
    pub body: BodyKind,
    pub preset: PresetTag,
}

impl GGConfig {
    pub fn desk(gamma: Rat, d: Rat, rounds: usize, body: BodyKind) -> Result<Self, Error> {
        if !gamma.is_positive() || !d.is_positive() {
            return Err(Error::InvalidParameter("gamma and d must be positive".into()));
        }
        Ok(GGConfig {
            gamma,
            d,
            rounds,
            body,
            preset: PresetTag::Desk,
        })
    }

    /// Paper preset, Euclidean clause: rounds N2 = 10 n^{3/2}
    /// (1 - 1/gamma^2)^{-(n+1)/2}; refuses over budget. Requires
    /// gamma >= 1 + 1/n.
    pub fn paper_l2(n: usize, gamma: Ratio64, d: Rat, budget_log2: f64) -> Result<Self, Error> {
        Self::paper_common(n, gamma, d, budget_log2, BodyKind::L2)
    }

    /// Paper preset, general-norm clause: N = 10 n (1 - 1/gamma)^{-n}.
    pub fn paper_general(
        n: usize,
        gamma: Ratio64,
        d: Rat,
        budget_log2: f64,
        body: BodyKind,
    ) -> Result<Self, Error> {
        Self::paper_common(n, gamma, d, budget_log2, body)
    }

    fn paper_common(
        n: usize,
        gamma: Ratio64,
        d: Rat,
        budget_log2: f64,
        body: BodyKind,
    ) -> Result<Self, Error> {
        let g = gamma.to_f64();
        if g < 1.0 + 1.0 / n as f64 {
            return Err(Error::InvalidParameter(format!(
                "paper preset needs gamma >= 1 + 1/n, got {g}"
            )));
        }
        let cost = formulas::gg_costs(n as u64, gamma)?;
        let log2_rounds = match body {
            BodyKind::L2 => cost.log2_rounds_l2,
            _ => cost.log2_rounds_general,
        };
        let rounds =
            formulas::materialize_count(log2_rounds, budget_log2, "GG protocol round count")?
                as usize;
        Ok(GGConfig {
            gamma: rational::rat(gamma.num, gamma.den),
            d,
            rounds,
            body,
            preset: PresetTag::Paper,
        })
    }

    /// Desk round count giving cheater failure probability >= `target`
    /// given a measured per-sample collision rate p_hat:
    /// smallest N with (1 - p_hat/2)^N <= 1 - target.
    pub fn desk_rounds_for(p_hat: f64, target: f64) -> usize {
        ((1.0 - target).ln() / (1.0 - p_hat / 2.0).ln()).ceil().max(1.0) as usize
    }

    /// Sampling radius gamma d / 2.
    pub fn r(&self) -> Rat {
        &self.gamma * &self.d / rational::rat_int(2)
    }

    pub fn r_f64(&self) -> f64 {
        rational::rat_to_f64(&self.r())
    }
}

/// One round as recorded in a transcript.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub secret_bit: u8,
    /// Arthur's secret sample s (float; its exact rational image determines
    /// v).
    pub secret_point: Vec<f64>,
    /// Sent point v = s mod P(B), exact.
    pub sent: Vec<String>,
    pub reply: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
    pub accepted: bool,
    /// True for the vacuous zero-round configuration.
    pub degenerate: bool,
}

/// Which Merlin plays.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MerlinKind {
    Honest,
    OptimalCheat,
}

/// Arthur's move: a uniform bit b and a uniform sample s from r K + b t,
/// reduced mod P(B).
pub fn arthur_round<R: Rng>(
    basis: &Basis,
    t: &Target,
    cfg: &GGConfig,
    rng: &mut R,
) -> Result<(u8, Vec<f64>, Target), Error> {
    if t.dim() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: t.dim(),
        });
    }
    let b: u8 = if rng.random::<bool>() { 1 } else { 0 };
    let body = NormBody::new(cfg.body.clone(), cfg.r_f64(), vec![0.0; basis.n()])?;
    let u = sample_uniform_body(&body, rng);
    // s = u + b t, promoted exactly into rationals.
    let mut s_rat: Vec<Rat> = u.iter().map(|&x| rat_from_f64(x)).collect();
    if b == 1 {
        s_rat = rational::add(&s_rat, &t.coords);
    }
    let s_float: Vec<f64> = rational::to_f64_vec(&s_rat);
    let v = reduce_mod_parallelepiped(basis, &Target::new(s_rat));
    Ok((b, s_float, v))
}

/// Honest Merlin: replies 0 iff dist_K(v, L) <= gamma d / 2, with ties
/// resolved to 0. Exact for the Euclidean and hypercube bodies; oracle
/// bodies are resolved in floating point over nearby lattice points.
pub fn honest_merlin(
    basis: &Basis,
    v: &Target,
    cfg: &GGConfig,
    caps: EnumerationCaps,
) -> Result<u8, Error> {
    let r = cfg.r();
    let within = match &cfg.body {
        BodyKind::L2 => {
            let cv = cvp_exact(basis, v, caps)?;
            cv.dist_sq <= &r * &r
        }
        BodyKind::Linf => linf_within(basis, v, &r, caps)?,
        BodyKind::Oracle {
            contains,
            bounding_half_width,
            ..
        } => {
            caps.check(basis.n())?;
            // Candidates inside the circumscribed Euclidean ball of r K.
            let rf = cfg.r_f64();
            let reach = rf * bounding_half_width * (basis.n() as f64).sqrt() + 1e-9;
            let gs = basis.gram_schmidt();
            let reach_sq = rat_from_f64(reach * reach);
            let candidates = points_within(&gs, &v.coords, &reach_sq);
            let vf = v.to_f64();
            candidates.iter().any(|z| {
                let y = basis.embed(z);
                let rel: Vec<f64> = y
                    .iter()
                    .zip(&vf)
                    .map(|(a, b)| (rational::rat_to_f64(a) - b) / rf)
                    .collect();
                contains(&rel)
            })
        }
    };
    Ok(if within { 0 } else { 1 })
}

/// Exact l-infinity distance test: dist_inf(v, L) <= r? Candidates are
/// enumerated in the circumscribed Euclidean ball of radius r sqrt(n) and
/// filtered coordinate-wise with exact arithmetic.
fn linf_within(basis: &Basis, v: &Target, r: &Rat, caps: EnumerationCaps) -> Result<bool, Error> {
    caps.check(basis.n())?;
    let n = basis.n();
    let gs = basis.gram_schmidt();
    let r2 = r * r * rational::rat_int(n as i64);
    let candidates = points_within(&gs, &v.coords, &r2);
    Ok(candidates.iter().any(|z| {
        let y = basis.embed(z);
        y.iter()
            .zip(&v.coords)
            .all(|(a, b)| (a - b).abs() <= *r)
    }))
}

/// Bayes-optimal cheating Merlin: counts preimages of v in r K + b t for
/// both values of b (lattice points y with v + y - b t inside r K; the
/// counts are proportional to the likelihoods under the uniform density)
/// and answers the argmax, ties to 0.
pub fn optimal_cheating_merlin(
    basis: &Basis,
    t: &Target,
    v: &Target,
    cfg: &GGConfig,
    caps: EnumerationCaps,
) -> Result<u8, Error> {
    caps.check(basis.n())?;
    let gs = basis.gram_schmidt();
    let r = cfg.r();
    let count_for = |b: u8| -> usize {
        // Count y in L with ||y - (b t - v)||_K <= r.
        let center = if b == 1 {
            rational::sub(&t.coords, &v.coords)
        } else {
            v.coords.iter().map(|c| -c).collect()
        };
        match &cfg.body {
            BodyKind::L2 => {
                let r2 = &r * &r;
                points_within(&gs, &center, &r2).len()
            }
            BodyKind::Linf => {
                let r2 = &r * &r * rational::rat_int(basis.n() as i64);
                points_within(&gs, &center, &r2)
                    .into_iter()
                    .filter(|z| {
                        let y = basis.embed(z);
                        y.iter()
                            .zip(&center)
                            .all(|(a, c)| (a - c).abs() <= r)
                    })
                    .count()
            }
            BodyKind::Oracle {
                contains,
                bounding_half_width,
                ..
            } => {
                let rf = rational::rat_to_f64(&r);
                let reach = rf * bounding_half_width * (basis.n() as f64).sqrt() + 1e-9;
                let reach_sq = rat_from_f64(reach * reach);
                let centerf = rational::to_f64_vec(&center);
                points_within(&gs, &center, &reach_sq)
                    .into_iter()
                    .filter(|z| {
                        let y = basis.embed(z);
                        let rel: Vec<f64> = y
                            .iter()
                            .zip(&centerf)
                            .map(|(a, c)| (rational::rat_to_f64(a) - c) / rf)
                            .collect();
                        contains(&rel)
                    })
                    .count()
            }
        }
    };
    let c0 = count_for(0);
    let c1 = count_for(1);
    Ok(if c1 > c0 { 1 } else { 0 })
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub accepted: bool,
    pub transcript: Transcript,
    /// Rounds where the reply matched Arthur's bit.
    pub correct_rounds: usize,
}

/// Runs the full protocol: rounds are independent, executed in parallel on
/// per-round RNG substreams; Arthur accepts iff every reply matches.
pub fn run_protocol(
    basis: &Basis,
    t: &Target,
    cfg: &GGConfig,
    merlin: MerlinKind,
    caps: EnumerationCaps,
    seed: SeedTree,
) -> Result<ProtocolOutcome, Error> {
    if cfg.rounds == 0 {
        return Ok(ProtocolOutcome {
            accepted: true,
            transcript: Transcript {
                rounds: Vec::new(),
                accepted: true,
                degenerate: true,
            },
            correct_rounds: 0,
        });
    }
    let records: Result<Vec<RoundRecord>, Error> = (0..cfg.rounds)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let (b, s, v) = arthur_round(basis, t, cfg, &mut rng)?;
            let reply = match merlin {
                MerlinKind::Honest => honest_merlin(basis, &v, cfg, caps)?,
                MerlinKind::OptimalCheat => optimal_cheating_merlin(basis, t, &v, cfg, caps)?,
            };
            Ok(RoundRecord {
                round: i,
                secret_bit: b,
                secret_point: s,
                sent: v.coords.iter().map(rational::format_rat).collect(),
                reply,
            })
        })
        .collect();
    let records = records?;
    let correct = records
        .iter()
        .filter(|r| r.reply == r.secret_bit)
        .count();
    let accepted = correct == cfg.rounds;
    Ok(ProtocolOutcome {
        accepted,
        transcript: Transcript {
            rounds: records,
            accepted,
            degenerate: false,
        },
        correct_rounds: correct,
    })
}
