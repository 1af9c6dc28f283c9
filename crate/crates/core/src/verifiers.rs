//! The co-nondeterministic verifier (dual membership + f_W threshold +
//! moment checks) and the randomized coMA verifier (ball-shift trials), with
//! paper-exact and desk-scale parameter presets, honest witness generation,
//! and a cheating-witness fuzz suite.
//!
//! Verdict semantics: FAR only when every check passes; CLOSE records which
//! check failed. The verifiers assert nothing about the promise of the
//! instance they are given.

use crate::error::Error;
use crate::formulas::{self, Ratio64};
use crate::gaussian::TruncationPolicy;
use crate::lattice::{is_dual_member, Basis, LatticeVector, Target};
use crate::moments::{multi_indices_up_to, sample_moments_batch, v_product};
use crate::rational::{self, Rat};
use crate::rng::SeedTree;
use crate::sampler::DiscreteGaussian;
use crate::solvers::{svp_exact, EnumerationCaps};
use crate::stats::Kahan;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ordered list of claimed dual-lattice vectors with cached float
/// embeddings.
#[derive(Clone, Debug)]
pub struct Witness {
    vectors: Vec<Vec<Rat>>,
    floats: Vec<Vec<f64>>,
}

impl Witness {
    pub fn new(vectors: Vec<Vec<Rat>>) -> Result<Self, Error> {
        if vectors.is_empty() {
            return Err(Error::MalformedWitness("witness must be nonempty".into()));
        }
        let n = vectors[0].len();
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::MalformedWitness(
                "witness vectors have mixed dimensions".into(),
            ));
        }
        let floats = vectors.iter().map(|v| rational::to_f64_vec(v)).collect();
        Ok(Witness { vectors, floats })
    }

    pub fn from_lattice_vectors(vs: &[LatticeVector]) -> Result<Self, Error> {
        Witness::new(vs.iter().map(|v| v.embedding.clone()).collect())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<Rat>] {
        &self.vectors
    }

    pub fn floats(&self) -> &[Vec<f64>] {
        &self.floats
    }

    /// Rescaled witness w_i / c (used when instances are rescaled by c).
    pub fn scale_down(&self, c: &Rat) -> Result<Witness, Error> {
        let inv = c.recip();
        Witness::new(
            self.vectors
                .iter()
                .map(|v| rational::scale(v, &inv))
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PresetTag {
    Paper,
    Desk,
}

/// Parameters of the co-nondeterministic verifier.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConpParams {
    /// Odd Taylor order; moments checked up to total degree 2k.
    pub k: u32,
    pub n_witness: usize,
    /// Moment tolerance eps.
    pub eps: f64,
    /// Strict f_W(t) threshold.
    pub fw_threshold: f64,
    pub preset: PresetTag,
}

impl ConpParams {
    /// Paper preset: N = (20 k^2 n^2 log n)^{2k+1},
    /// eps = 20 log^k(2nN) sqrt(k log(n)/N), threshold = 20 sqrt(log(N)/N).
    /// Refuses (with the exact cost) when N exceeds the budget.
    pub fn paper(n: usize, k: u32, budget_log2: f64) -> Result<Self, Error> {
        let cost = formulas::conp_costs(n as u64, k)?;
        let n_witness = formulas::materialize_count(
            cost.log2_witness,
            budget_log2,
            "conp paper-preset witness size N",
        )? as usize;
        Ok(ConpParams {
            k,
            n_witness,
            eps: 2f64.powf(cost.log2_eps),
            fw_threshold: 2f64.powf(cost.log2_fw_threshold),
            preset: PresetTag::Paper,
        })
    }

    /// Desk preset: all three knobs explicit.
    pub fn desk(k: u32, n_witness: usize, eps: f64, fw_threshold: f64) -> Result<Self, Error> {
        if k == 0 || k % 2 == 0 {
            return Err(Error::InvalidParameter("k must be odd positive".into()));
        }
        Ok(ConpParams {
            k,
            n_witness,
            eps,
            fw_threshold,
            preset: PresetTag::Desk,
        })
    }

    /// Desk defaults that keep soundness unconditional at rank n under the
    /// CVP' scaling convention (CLOSE distance <= sqrt(k)/4 at k = 1): eps
    /// is sized so the closed-form f_W lower bound stays above the
    /// threshold, and the witness count gives honest moments ~4 sigma of
    /// headroom inside eps.
    pub fn desk_default(n: usize) -> ConpParams {
        let k = 1u32;
        let r = 0.25f64; // sqrt(k)/4
        let fw_threshold = 0.2f64;
        let room = (-PI * r * r).exp() - (10.0 * r * r).powi(2) - fw_threshold;
        let eps = 0.8 * room / ((n as f64).powi(2) * (2.0 * PI * r).exp());
        // Degree-2 moment noise scale for a width-1 dual Gaussian is about
        // sqrt(V_4 - V_2^2) ~ 0.23.
        let n_witness = (4.0 * 0.23 / (0.8 * eps)).powi(2).ceil() as usize;
        ConpParams {
            k,
            n_witness,
            eps,
            fw_threshold,
            preset: PresetTag::Desk,
        }
    }

    /// Margin between the guaranteed f_W lower bound at distance r_close and
    /// the FAR threshold; positive means soundness is unconditional for
    /// instances with dist <= r_close.
    pub fn soundness_margin(&self, n: usize, r_close: f64) -> Result<f64, Error> {
        Ok(crate::moments::fw_lower_bound(r_close, self.k, self.eps, n)? - self.fw_threshold)
    }
}

/// Parameters of the coMA verifier.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComaParams {
    pub alpha: f64,
    pub beta: f64,
    pub n_witness: usize,
    pub trials: usize,
    /// Both per-trial comparisons use this value: e^{-pi alpha^2 n} / 2.
    pub threshold: f64,
    pub preset: PresetTag,
}

impl ComaParams {
    /// Paper preset: N = 2^{10 alpha^2 n}, trials = 2^{2 beta^2 n}; alpha
    /// and beta squared are taken as exact rationals. Requires
    /// beta <= alpha < 1/3.
    pub fn paper(
        n: usize,
        alpha_sq: Ratio64,
        beta_sq: Ratio64,
        budget_log2: f64,
    ) -> Result<Self, Error> {
        let a = alpha_sq.to_f64();
        let b = beta_sq.to_f64();
        if !(b <= a && a < 1.0 / 9.0) {
            return Err(Error::InvalidParameter(
                "paper preset needs beta <= alpha < 1/3".into(),
            ));
        }
        let cost = formulas::coma_costs(n as u64, alpha_sq, beta_sq)?;
        let n_witness =
            formulas::materialize_count(cost.log2_witness, budget_log2, "coma witness size N")?
                as usize;
        let trials =
            formulas::materialize_count(cost.log2_trials, budget_log2, "coma trial count")?
                as usize;
        Ok(ComaParams {
            alpha: a.sqrt(),
            beta: b.sqrt(),
            n_witness,
            trials,
            threshold: 2f64.powf(cost.log2_threshold),
            preset: PresetTag::Paper,
        })
    }

    /// Desk preset: explicit witness size and trial count; the threshold
    /// keeps its defining formula e^{-pi alpha^2 n}/2.
    pub fn desk(n: usize, alpha: f64, beta: f64, n_witness: usize, trials: usize) -> Result<Self, Error> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidParameter("alpha, beta must be positive".into()));
        }
        Ok(ComaParams {
            alpha,
            beta,
            n_witness,
            trials,
            threshold: (-PI * alpha * alpha * n as f64).exp() / 2.0,
            preset: PresetTag::Desk,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Close,
    Far,
}

/// Which check tripped (CLOSE verdicts only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FailedCheck {
    DualMembership { index: usize },
    FwThreshold { value: f64 },
    Moment { index: Vec<u32>, deviation: f64 },
    Trial { trial: usize, which: TrialSide },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialSide {
    /// f_W(v) failed to exceed the threshold.
    NearZero,
    /// f_W(v + t) failed to stay at or below the threshold.
    NearTarget,
}

/// Per-trial record of the coMA verifier.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub fw_v: f64,
    pub fw_v_plus_t: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub fw_value: Option<f64>,
    pub max_moment_deviation: Option<f64>,
    pub moment_indices_checked: Option<usize>,
    pub trials: Vec<TrialRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub failed_check: Option<FailedCheck>,
    pub diagnostics: Diagnostics,
}

impl Verdict {
    fn far(diagnostics: Diagnostics) -> Verdict {
        Verdict {
            outcome: Outcome::Far,
            failed_check: None,
            diagnostics,
        }
    }

    fn close(failed: FailedCheck, diagnostics: Diagnostics) -> Verdict {
        Verdict {
            outcome: Outcome::Close,
            failed_check: Some(failed),
            diagnostics,
        }
    }
}

fn check_witness_shape(basis: &Basis, t: &Target, w: &Witness) -> Result<(), Error> {
    if t.dim() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: t.dim(),
        });
    }
    if w.dim() != basis.n() {
        return Err(Error::MalformedWitness(format!(
            "witness dimension {} does not match rank {}",
            w.dim(),
            basis.n()
        )));
    }
    Ok(())
}

/// The deterministic three-check verifier. Checks, in order: every w_i is a
/// dual member (exact); f_W(t) < threshold (strict); every moment with total
/// degree <= 2k matches its Gaussian value within eps. All pass -> FAR.
pub fn conp_verify(
    basis: &Basis,
    t: &Target,
    params: &ConpParams,
    witness: &Witness,
) -> Result<Verdict, Error> {
    check_witness_shape(basis, t, witness)?;
    let mut diag = Diagnostics::default();

    for (i, w) in witness.vectors().iter().enumerate() {
        if !is_dual_member(basis, w) {
            return Ok(Verdict::close(FailedCheck::DualMembership { index: i }, diag));
        }
    }

    let fw = crate::moments::f_w(witness.vectors(), t);
    diag.fw_value = Some(fw);
    // The pass condition is the strict inequality f_W(t) < threshold, as
    // written; a NaN must fail it and land on CLOSE.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(fw < params.fw_threshold) {
        return Ok(Verdict::close(FailedCheck::FwThreshold { value: fw }, diag));
    }

    let indices = multi_indices_up_to(basis.n(), 2 * params.k);
    diag.moment_indices_checked = Some(indices.len());
    let moments = sample_moments_batch(witness.floats(), &indices);
    let mut worst: Option<(usize, f64)> = None;
    for (i, (a, m)) in indices.iter().zip(&moments).enumerate() {
        let dev = (v_product(a) - m).abs();
        if worst.is_none_or(|(_, d)| dev > d) {
            worst = Some((i, dev));
        }
        if dev > params.eps {
            diag.max_moment_deviation = Some(dev);
            return Ok(Verdict::close(
                FailedCheck::Moment {
                    index: a.0.clone(),
                    deviation: dev,
                },
                diag,
            ));
        }
    }
    diag.max_moment_deviation = worst.map(|(_, d)| d);
    Ok(Verdict::far(diag))
}

/// Honest witness: N independent D_{L*} samples from the exact sampler.
pub fn conp_witness_gen(
    basis: &Basis,
    n_samples: usize,
    policy: TruncationPolicy,
    seed: SeedTree,
) -> Result<Witness, Error> {
    let dual = basis.dual();
    let dual_fl = dual.to_float();
    let dgs = DiscreteGaussian::build(&dual, &dual_fl, 1.0, policy)?;
    let mut rng = seed.rng();
    let vs: Vec<LatticeVector> = (0..n_samples).map(|_| dgs.sample(&mut rng)).collect();
    Witness::from_lattice_vectors(&vs)
}

/// The randomized ball-shift verifier. Dual membership first; then each
/// trial samples v uniform in B(0, alpha sqrt(n)) and requires
/// f_W(v) > threshold and f_W(v + t) <= threshold (strict comparisons as
/// written). FAR only if every trial passes; per-trial values recorded.
pub fn coma_verify(
    basis: &Basis,
    t: &Target,
    params: &ComaParams,
    witness: &Witness,
    seed: SeedTree,
) -> Result<Verdict, Error> {
    check_witness_shape(basis, t, witness)?;
    let mut diag = Diagnostics::default();

    for (i, w) in witness.vectors().iter().enumerate() {
        if !is_dual_member(basis, w) {
            return Ok(Verdict::close(FailedCheck::DualMembership { index: i }, diag));
        }
    }

    // Exact fractional phases <w_i, t> mod 1, computed once.
    let frac_wt: Vec<f64> = witness
        .vectors()
        .iter()
        .map(|w| {
            let phase = rational::dot(w, &t.coords);
            rational::rat_to_f64(&(&phase - Rat::from_integer(rational::floor_rat(&phase))))
        })
        .collect();
    let n = basis.n();
    let ball = crate::geometry::NormBody::ball(params.alpha * (n as f64).sqrt(), vec![0.0; n])?;

    // Trials run in parallel on per-trial substreams; the verdict stays
    // deterministic because records are collected in trial order.
    use rayon::prelude::*;
    let records: Vec<(TrialRecord, Option<TrialSide>)> = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed.child(trial as u64).rng();
            let v = crate::geometry::sample_uniform_body(&ball, &mut rng);
            let mut near_zero = Kahan::new();
            let mut near_target = Kahan::new();
            for (w, &frac) in witness.floats().iter().zip(&frac_wt) {
                let wv: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
                near_zero.add((2.0 * PI * wv).cos());
                near_target.add((2.0 * PI * (wv + frac)).cos());
            }
            let fw_v = near_zero.value() / witness.len() as f64;
            let fw_vt = near_target.value() / witness.len() as f64;
            let pass_zero = fw_v > params.threshold;
            let pass_target = fw_vt <= params.threshold;
            let side = if !pass_zero {
                Some(TrialSide::NearZero)
            } else if !pass_target {
                Some(TrialSide::NearTarget)
            } else {
                None
            };
            (
                TrialRecord {
                    fw_v,
                    fw_v_plus_t: fw_vt,
                    passed: side.is_none(),
                },
                side,
            )
        })
        .collect();
    let mut failure: Option<FailedCheck> = None;
    for (trial, (record, side)) in records.into_iter().enumerate() {
        if failure.is_none() {
            if let Some(which) = side {
                failure = Some(FailedCheck::Trial { trial, which });
            }
        }
        diag.trials.push(record);
    }
    match failure {
        Some(f) => Ok(Verdict::close(f, diag)),
        None => Ok(Verdict::far(diag)),
    }
}

/// Generators for cheating witnesses, labeled by kind: wrong-width Gaussian
/// witnesses, short-dual-only, duplicates, the all-zero witness, and a
/// greedy witness tuned to push f_W(t) down.
pub fn adversarial_witness_suite(
    basis: &Basis,
    t: &Target,
    n_witness: usize,
    policy: TruncationPolicy,
    caps: EnumerationCaps,
    seed: SeedTree,
) -> Result<Vec<(String, Witness)>, Error> {
    let dual = basis.dual();
    let dual_fl = dual.to_float();
    let mut out = Vec::new();

    for (label, s) in [("scaled-narrow-s0.5", 0.5), ("scaled-wide-s2", 2.0)] {
        let dgs = DiscreteGaussian::build(&dual, &dual_fl, s, policy)?;
        let mut rng = seed.child(label.len() as u64).rng();
        let vs: Vec<LatticeVector> = (0..n_witness).map(|_| dgs.sample(&mut rng)).collect();
        out.push((label.to_string(), Witness::from_lattice_vectors(&vs)?));
    }

    // Shortest dual vector, alternating signs.
    let sv = svp_exact(&dual, None, caps)?;
    let mut short_vs = Vec::with_capacity(n_witness);
    for i in 0..n_witness {
        let mut v = sv.witness.clone();
        if i % 2 == 1 {
            v.coords = v.coords.iter().map(|c| -c).collect();
            v.embedding = v.embedding.iter().map(|c| -c).collect();
        }
        short_vs.push(v);
    }
    out.push((
        "short-dual-only".to_string(),
        Witness::from_lattice_vectors(&short_vs)?,
    ));

    // One honest sample duplicated N times.
    let dgs = DiscreteGaussian::build(&dual, &dual_fl, 1.0, policy)?;
    let mut rng = seed.child(101).rng();
    let one = dgs.sample(&mut rng);
    out.push((
        "duplicated".to_string(),
        Witness::from_lattice_vectors(&vec![one; n_witness])?,
    ));

    // All zeros: trivially dual, grossly non-Gaussian moments.
    out.push((
        "zero".to_string(),
        Witness::new(vec![vec![Rat::zero(); basis.n()]; n_witness])?,
    ));

    // Dual-membership violators: honest samples shifted off the dual
    // lattice by half a dual basis vector.
    let mut rng = seed.child(303).rng();
    let half_dual = rational::scale(dual.column(0), &rational::rat(1, 2));
    let non_dual: Vec<Vec<Rat>> = (0..n_witness)
        .map(|_| rational::add(&dgs.sample(&mut rng).embedding, &half_dual))
        .collect();
    out.push(("non-dual".to_string(), Witness::new(non_dual)?));

    // Greedy: from a pool of honest draws keep the N with the most negative
    // cos(2 pi <w, t>), minimizing f_W(t).
    let mut rng = seed.child(202).rng();
    let mut pool: Vec<LatticeVector> = (0..(4 * n_witness)).map(|_| dgs.sample(&mut rng)).collect();
    let score = |v: &LatticeVector| -> f64 {
        let phase = rational::dot(&v.embedding, &t.coords);
        let frac = rational::rat_to_f64(
            &(&phase - Rat::from_integer(rational::floor_rat(&phase))),
        );
        (2.0 * PI * frac).cos()
    };
    pool.sort_by(|a, b| score(a).partial_cmp(&score(b)).unwrap());
    pool.truncate(n_witness);
    out.push((
        "greedy-fw".to_string(),
        Witness::from_lattice_vectors(&pool)?,
    ));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MultiIndex;
    use crate::rational::{rat, rat_int};

    fn scaled_z2_far_instance() -> (Basis, Target) {
        // 3 Z^2: lambda_1 = 3 > sqrt(2); t deep inside a cell, dist = 1.5
        // sqrt(2) > sqrt(2).
        let b = Basis::diagonal(&[rat_int(3), rat_int(3)]).unwrap();
        let t = Target::new(vec![rat(3, 2), rat(3, 2)]);
        (b, t)
    }

    #[test]
    fn conp_params_validation() {
        assert!(ConpParams::desk(2, 100, 0.1, 0.1).is_err());
        assert!(ConpParams::desk(3, 100, 0.1, 0.1).is_ok());
        // Paper preset at tiny n/k is materializable; at k large it refuses.
        assert!(ConpParams::paper(2, 1, 33.0).is_ok());
        assert!(matches!(
            ConpParams::paper(16, 101, 33.0),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn desk_default_is_sound_at_close_radius() {
        // The default desk preset keeps the closed-form soundness margin
        // positive at the CVP' close radius sqrt(k)/4 for n = 2 and 3.
        for n in [2usize, 3] {
            let p = ConpParams::desk_default(n);
            let r_close = (p.k as f64).sqrt() / 4.0;
            assert!(
                p.soundness_margin(n, r_close).unwrap() > 0.0,
                "margin at n = {n}"
            );
        }
    }

    #[test]
    fn non_dual_vector_fails_check_one() {
        let (b, t) = scaled_z2_far_instance();
        let mut vectors = vec![vec![rat_int(0), rat_int(0)]; 50];
        vectors[17] = vec![rat(1, 2), rat(0, 1)]; // not in (3Z^2)* = (1/3)Z^2... actually 1/2 is not a multiple of 1/3
        let w = Witness::new(vectors).unwrap();
        let params = ConpParams::desk_default(2);
        let v = conp_verify(&b, &t, &params, &w).unwrap();
        assert_eq!(v.outcome, Outcome::Close);
        assert_eq!(
            v.failed_check,
            Some(FailedCheck::DualMembership { index: 17 })
        );
    }

    #[test]
    fn honest_witness_on_far_instance_yields_far() {
        let (b, t) = scaled_z2_far_instance();
        let params = ConpParams::desk_default(2);
        let w = conp_witness_gen(&b, params.n_witness, TruncationPolicy::default(), SeedTree::new(7))
            .unwrap();
        // Every generated vector is an exact dual member.
        assert!(w.vectors().iter().all(|v| is_dual_member(&b, v)));
        let verdict = conp_verify(&b, &t, &params, &w).unwrap();
        assert_eq!(verdict.outcome, Outcome::Far, "diag {:?}", verdict.diagnostics);
    }

    #[test]
    fn witness_gen_second_moments_match_dual_gaussian() {
        // Empirical second moment along e_1 vs the exact D_{L*} moment
        // within 4 sigma.
        let b = Basis::diagonal(&[rat_int(2), rat_int(2)]).unwrap();
        let n_samples = 20_000;
        let w = conp_witness_gen(&b, n_samples, TruncationPolicy::default(), SeedTree::new(9))
            .unwrap();
        let a = MultiIndex(vec![2, 0]);
        let emp = crate::moments::sample_moment(w.floats(), &a);
        let dual = b.dual();
        let exact = crate::hermite::lattice_monomial_expectation(
            &dual.to_float(),
            1.0,
            &a,
            TruncationPolicy::default(),
        )
        .unwrap();
        let fourth = crate::hermite::lattice_monomial_expectation(
            &dual.to_float(),
            1.0,
            &MultiIndex(vec![4, 0]),
            TruncationPolicy::default(),
        )
        .unwrap();
        let sigma = ((fourth - exact * exact) / n_samples as f64).sqrt();
        assert!((emp - exact).abs() <= 4.0 * sigma, "emp {emp} exact {exact}");
    }

    #[test]
    fn witness_gen_seed_determinism() {
        let b = Basis::integer_lattice(2);
        let w1 = conp_witness_gen(&b, 64, TruncationPolicy::default(), SeedTree::new(3)).unwrap();
        let w2 = conp_witness_gen(&b, 64, TruncationPolicy::default(), SeedTree::new(3)).unwrap();
        assert_eq!(w1.vectors(), w2.vectors());
    }

    #[test]
    fn coma_non_dual_witness_close() {
        let (b, t) = scaled_z2_far_instance();
        let w = Witness::new(vec![vec![rat(1, 2), rat(0, 1)]; 16]).unwrap();
        let params = ComaParams::desk(2, 0.3, 0.3, 16, 8).unwrap();
        let v = coma_verify(&b, &t, &params, &w, SeedTree::new(1)).unwrap();
        assert_eq!(v.outcome, Outcome::Close);
        assert!(matches!(
            v.failed_check,
            Some(FailedCheck::DualMembership { .. })
        ));
    }

    #[test]
    fn coma_verdict_records_trials() {
        let (b, t) = scaled_z2_far_instance();
        let params = ComaParams::desk(2, 0.3, 0.3, 2048, 16).unwrap();
        let w = conp_witness_gen(&b, params.n_witness, TruncationPolicy::default(), SeedTree::new(5))
            .unwrap();
        let v = coma_verify(&b, &t, &params, &w, SeedTree::new(6)).unwrap();
        assert_eq!(v.diagnostics.trials.len(), 16);
        // FAR iff failed_check empty.
        assert_eq!(v.outcome == Outcome::Far, v.failed_check.is_none());
    }

    #[test]
    fn coma_paper_preset_bounds() {
        assert!(ComaParams::paper(
            8,
            Ratio64::new(1, 9).unwrap(),
            Ratio64::new(1, 9).unwrap(),
            33.0
        )
        .is_err()); // alpha = 1/3 not < 1/3
        let p = ComaParams::paper(
            8,
            Ratio64::new(1, 16).unwrap(),
            Ratio64::new(1, 16).unwrap(),
            33.0,
        )
        .unwrap();
        assert_eq!(p.n_witness, 32); // 2^{10 * (1/16) * 8} = 2^5
        assert_eq!(p.trials, 2); // 2^{2 * (1/16) * 8} = 2^1
    }

    #[test]
    fn adversarial_suite_is_nontrivial() {
        let (b, t) = scaled_z2_far_instance();
        let suite = adversarial_witness_suite(
            &b,
            &t,
            256,
            TruncationPolicy::default(),
            EnumerationCaps::default(),
            SeedTree::new(11),
        )
        .unwrap();
        assert_eq!(suite.len(), 7);
        // The membership violator trips check 1.
        let nd = &suite.iter().find(|(l, _)| l == "non-dual").unwrap().1;
        let v = conp_verify(&b, &t, &ConpParams::desk_default(2), nd).unwrap();
        assert!(matches!(
            v.failed_check,
            Some(FailedCheck::DualMembership { .. })
        ));
        // Greedy witness pushes f_W(t) below the honest value.
        let honest =
            conp_witness_gen(&b, 256, TruncationPolicy::default(), SeedTree::new(12)).unwrap();
        let honest_fw = crate::moments::f_w(honest.vectors(), &t);
        let greedy = &suite.iter().find(|(l, _)| l == "greedy-fw").unwrap().1;
        let greedy_fw = crate::moments::f_w(greedy.vectors(), &t);
        assert!(greedy_fw < honest_fw, "greedy {greedy_fw} honest {honest_fw}");
        // Suite members are all dual (by construction, except none here
        // violate membership): moment checks are what reject them.
        for (label, w) in &suite {
            if label.starts_with("scaled") || label == "zero" || label == "duplicated" {
                let params = ConpParams::desk_default(2);
                let t_close = Target::new(vec![rat(1, 10), rat(1, 10)]);
                let verdict = conp_verify(&b, &t_close, &params, w).unwrap();
                assert_eq!(verdict.outcome, Outcome::Close, "witness {label}");
            }
        }
    }

    #[test]
    fn malformed_witness_is_error_not_close() {
        let (b, t) = scaled_z2_far_instance();
        let w = Witness::new(vec![vec![rat_int(0); 3]; 4]).unwrap();
        let params = ConpParams::desk_default(2);
        assert!(matches!(
            conp_verify(&b, &t, &params, &w),
            Err(Error::MalformedWitness(_))
        ));
    }
}
