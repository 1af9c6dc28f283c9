//! Worst-case reductions, end to end at desk scale: the column-doubling
//! SVP -> CVP' reduction, SVP -> BDD via random ball shifts, SVP -> DGS
//! wrappers driving the two verifiers, and the DGS -> SIS pipeline with a
//! brute-force SIS oracle.

use crate::error::Error;
use crate::formulas::{self, Ratio64};
use crate::gaussian::{smoothing_parameter, TruncationPolicy};
use crate::geometry::NormBody;
use crate::lattice::{reduce_mod_parallelepiped, same_lattice, Basis, LatticeVector, Target};
use crate::lll::lll_reduce;
use crate::rational::{self, floor_sqrt, rat_from_f64, Mat, Rat};
use crate::rng::SeedTree;
use crate::sampler::{DiscreteGaussian, KleinSampler, WidthCheck};
use crate::solvers::{BddAnswer, BddOracleExact};
use crate::verifiers::{
    coma_verify, conp_verify, ComaParams, ConpParams, Outcome, Verdict, Witness,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Yes,
    No,
}

/// Rational approximation of sqrt(x) to ~2^-48 relative error (the exact
/// normal-form scale sqrt(n)/(gamma d) is irrational; promises downstream
/// are stated against the recorded rational scale, so nothing exact leaks).
pub fn rational_sqrt_approx(x: &Rat) -> Rat {
    let shift = BigInt::one() << 96u32;
    let scaled = x * Rat::from_integer(shift);
    let root = floor_sqrt(&scaled);
    Rat::new(root, BigInt::one() << 48u32)
}

/// One CVP' instance produced by the column-doubling reduction.
#[derive(Clone, Debug)]
pub struct Cvp1Instance {
    pub basis: Basis,
    pub target: Target,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct GmssReduction {
    pub instances: Vec<Cvp1Instance>,
    /// Rational scale c ~ sqrt(n)/(gamma d) applied to the input lattice.
    pub scale: Rat,
    /// Scaled CLOSE threshold c d (~ sqrt(n)/gamma); YES iff some instance
    /// has dist <= this, exactly.
    pub close_threshold: Rat,
}

/// SVP -> CVP' by doubling one basis column at a time: instance i is
/// (b_1, ..., 2 b_i, ..., b_n) with target b_i, all rescaled so the SVP
/// threshold d lands at ~ sqrt(n)/gamma. YES iff at least one instance is
/// YES; in fact min_i dist(t_i, L_i) = lambda_1 exactly.
pub fn gmss_reduce(basis: &Basis, d: &Rat, gamma: &Rat) -> Result<GmssReduction, Error> {
    if !d.is_positive() || !gamma.is_positive() {
        return Err(Error::InvalidParameter("need d > 0 and gamma > 0".into()));
    }
    let n = basis.n();
    let sqrt_n = rational_sqrt_approx(&rational::rat_int(n as i64));
    let scale = &sqrt_n / &(gamma * d);
    let scaled = basis.scale(&scale)?;
    let mut instances = Vec::with_capacity(n);
    for i in 0..n {
        let mut cols = scaled.columns().to_vec();
        cols[i] = rational::scale(&cols[i], &rational::rat_int(2));
        instances.push(Cvp1Instance {
            basis: Basis::new(cols)?,
            target: Target::new(scaled.column(i).to_vec()),
            index: i,
        });
    }
    Ok(GmssReduction {
        instances,
        scale: scale.clone(),
        close_threshold: &scale * d,
    })
}

/// Pluggable BDD oracle; the exact solver-backed oracle implements it.
pub trait BddOracle {
    fn decode(&self, t: &Target) -> Result<BddAnswer, Error>;
}

impl BddOracle for BddOracleExact {
    fn decode(&self, t: &Target) -> Result<BddAnswer, Error> {
        BddOracleExact::decode(self, t)
    }
}

#[derive(Clone, Debug)]
pub struct BddReductionRun {
    pub decision: Decision,
    pub trials_run: usize,
    /// Trial index of the first discrepancy, when any.
    pub first_discrepancy: Option<usize>,
}

/// Trial count of the paper preset: 10 n^{3/2} (1 - 1/(2 alpha gamma)^2)
/// ^ {-(n+1)/2}, materialized within the budget. Requires the preset's
/// stronger precondition alpha gamma >= 1/2 + 1/n.
pub fn bdd_paper_trials(
    n: usize,
    alpha: Ratio64,
    gamma: Ratio64,
    budget_log2: f64,
) -> Result<usize, Error> {
    if alpha.to_f64() * gamma.to_f64() < 0.5 + 1.0 / n as f64 {
        return Err(Error::InvalidParameter(format!(
            "paper preset needs alpha gamma >= 1/2 + 1/n, got {}",
            alpha.to_f64() * gamma.to_f64()
        )));
    }
    let log2 = formulas::bdd_query_count_log2(n as u64, alpha, gamma)?;
    Ok(formulas::materialize_count(log2, budget_log2, "BDD query count N")? as usize)
}

/// SVP -> BDD: each trial samples s uniform in the ball of radius
/// r = alpha gamma d, hands t = s mod P(B) to the oracle, and answers YES as
/// soon as the oracle's output differs from t - s.
#[allow(clippy::too_many_arguments)]
pub fn svp_to_bdd(
    basis: &Basis,
    d: &Rat,
    gamma: &Rat,
    alpha: &Rat,
    oracle: &dyn BddOracle,
    n_trials: usize,
    seed: SeedTree,
) -> Result<BddReductionRun, Error> {
    let n = basis.n();
    let alpha_f = rational::rat_to_f64(alpha);
    let gamma_f = rational::rat_to_f64(gamma);
    // NaN alpha must be rejected, hence the negated strict comparison.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(alpha_f < 0.5) {
        return Err(Error::InvalidParameter("need alpha < 1/2".into()));
    }
    // Below alpha gamma = 1/2 the sampling ball cannot straddle a shortest
    // vector, so the YES side has no power at all; the paper preset's
    // stronger 1/2 + 1/n slack is enforced where its trial count is built.
    if alpha_f * gamma_f <= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "need alpha gamma > 1/2, got {}",
            alpha_f * gamma_f
        )));
    }
    let r = rational::rat_to_f64(&(alpha * gamma * d));
    let ball = NormBody::ball(r, vec![0.0; n])?;
    for trial in 0..n_trials {
        let mut rng = seed.child(trial as u64).rng();
        let u = crate::geometry::sample_uniform_body(&ball, &mut rng);
        let s: Vec<Rat> = u.iter().map(|&x| rat_from_f64(x)).collect();
        if bdd_trial_discrepancy(basis, oracle, &s)? {
            return Ok(BddReductionRun {
                decision: Decision::Yes,
                trials_run: trial + 1,
                first_discrepancy: Some(trial),
            });
        }
    }
    Ok(BddReductionRun {
        decision: Decision::No,
        trials_run: n_trials,
        first_discrepancy: None,
    })
}

/// One deterministic trial with an explicit shift s: true iff the oracle's
/// answer differs from the planted vector t - s.
pub fn bdd_trial_discrepancy(
    basis: &Basis,
    oracle: &dyn BddOracle,
    s: &[Rat],
) -> Result<bool, Error> {
    let t = reduce_mod_parallelepiped(basis, &Target::new(s.to_vec()));
    let planted = rational::sub(&t.coords, s);
    let planted_coords = basis
        .lattice_coords(&planted)
        .expect("t - s is a lattice vector by construction");
    let answer = oracle.decode(&t)?;
    Ok(match answer.vector {
        Some(v) => v.coords != planted_coords,
        None => true,
    })
}

/// Pluggable discrete Gaussian sampling oracle (the DGS problem's solver).
pub trait DgsOracle {
    fn sample_batch(
        &mut self,
        lattice: &Basis,
        s: f64,
        count: usize,
        seed: SeedTree,
    ) -> Result<Vec<LatticeVector>, Error>;
}

/// Honest oracle backed by the exact sampler.
pub struct ExactDgsOracle {
    pub policy: TruncationPolicy,
}

impl DgsOracle for ExactDgsOracle {
    fn sample_batch(
        &mut self,
        lattice: &Basis,
        s: f64,
        count: usize,
        seed: SeedTree,
    ) -> Result<Vec<LatticeVector>, Error> {
        let fl = lattice.to_float();
        let dgs = DiscreteGaussian::build(lattice, &fl, s, self.policy)?;
        let mut rng = seed.rng();
        Ok((0..count).map(|_| dgs.sample(&mut rng)).collect())
    }
}

/// Adversarially biased oracle: samples at width_factor * s instead of s.
/// Used for the failure-rate-vs-bias sweep; no guarantee is asserted.
pub struct BiasedDgsOracle {
    pub policy: TruncationPolicy,
    pub width_factor: f64,
}

impl DgsOracle for BiasedDgsOracle {
    fn sample_batch(
        &mut self,
        lattice: &Basis,
        s: f64,
        count: usize,
        seed: SeedTree,
    ) -> Result<Vec<LatticeVector>, Error> {
        ExactDgsOracle { policy: self.policy }.sample_batch(
            lattice,
            s * self.width_factor,
            count,
            seed,
        )
    }
}

#[derive(Clone, Debug)]
pub struct DgsReductionRun {
    pub decision: Decision,
    pub per_instance: Vec<Verdict>,
    pub gmss_scale: Rat,
}

/// SVP -> DGS -> co-nondeterministic verifier. Per CVP' instance: rescale by
/// gamma', draw N dual samples at parameter s := gamma' (the value
/// consistent with the DGS promise), rescale the witness by 1/gamma', and
/// run the deterministic verifier; the reduction answers YES iff some
/// instance comes back CLOSE.
#[allow(clippy::too_many_arguments)]
pub fn svp_to_dgs_np(
    basis: &Basis,
    d: &Rat,
    gamma: &Rat,
    gamma_prime: &Rat,
    oracle: &mut dyn DgsOracle,
    params: &ConpParams,
    seed: SeedTree,
) -> Result<DgsReductionRun, Error> {
    if !gamma_prime.is_positive() {
        return Err(Error::InvalidParameter("gamma' must be positive".into()));
    }
    let gmss = gmss_reduce(basis, d, gamma)?;
    let gp_f = rational::rat_to_f64(gamma_prime);
    let mut per_instance = Vec::with_capacity(gmss.instances.len());
    let mut any_close = false;
    for inst in &gmss.instances {
        let scaled_basis = inst.basis.scale(gamma_prime)?;
        let scaled_target = Target::new(rational::scale(&inst.target.coords, gamma_prime));
        let dual = inst.basis.dual();
        let samples = oracle.sample_batch(
            &dual,
            gp_f,
            params.n_witness,
            seed.child(inst.index as u64),
        )?;
        let witness = Witness::from_lattice_vectors(&samples)?.scale_down(gamma_prime)?;
        let verdict = conp_verify(&scaled_basis, &scaled_target, params, &witness)?;
        any_close |= verdict.outcome == Outcome::Close;
        per_instance.push(verdict);
    }
    Ok(DgsReductionRun {
        decision: if any_close { Decision::Yes } else { Decision::No },
        per_instance,
        gmss_scale: gmss.scale,
    })
}

/// Same pipeline with the randomized verifier; alpha = beta =
/// sqrt(2 gamma'/gamma) per the coMA wrapper.
#[allow(clippy::too_many_arguments)]
pub fn svp_to_dgs_ma(
    basis: &Basis,
    d: &Rat,
    gamma: &Rat,
    gamma_prime: &Rat,
    oracle: &mut dyn DgsOracle,
    n_witness: usize,
    trials: usize,
    seed: SeedTree,
) -> Result<DgsReductionRun, Error> {
    if !gamma_prime.is_positive() {
        return Err(Error::InvalidParameter("gamma' must be positive".into()));
    }
    let alpha = (2.0 * rational::rat_to_f64(gamma_prime) / rational::rat_to_f64(gamma)).sqrt();
    let params = ComaParams::desk(basis.n(), alpha, alpha, n_witness, trials)?;
    let gmss = gmss_reduce(basis, d, gamma)?;
    let gp_f = rational::rat_to_f64(gamma_prime);
    let mut per_instance = Vec::with_capacity(gmss.instances.len());
    let mut any_close = false;
    for inst in &gmss.instances {
        let scaled_basis = inst.basis.scale(gamma_prime)?;
        let scaled_target = Target::new(rational::scale(&inst.target.coords, gamma_prime));
        let dual = inst.basis.dual();
        let samples = oracle.sample_batch(
            &dual,
            gp_f,
            n_witness,
            seed.child(inst.index as u64),
        )?;
        let witness = Witness::from_lattice_vectors(&samples)?.scale_down(gamma_prime)?;
        let verdict = coma_verify(
            &scaled_basis,
            &scaled_target,
            &params,
            &witness,
            seed.child(1000 + inst.index as u64),
        )?;
        any_close |= verdict.outcome == Outcome::Close;
        per_instance.push(verdict);
    }
    Ok(DgsReductionRun {
        decision: if any_close { Decision::Yes } else { Decision::No },
        per_instance,
        gmss_scale: gmss.scale,
    })
}

/// Paper-formula parameters for the NP-side wrapper: k is the nearest odd
/// integer to 20 n (gamma'/gamma)^2.
pub fn dgs_np_paper_k(n: usize, gamma: &Rat, gamma_prime: &Rat) -> u32 {
    let ratio = rational::rat_to_f64(gamma_prime) / rational::rat_to_f64(gamma);
    let raw = 20.0 * n as f64 * ratio * ratio;
    let rounded = raw.round().max(1.0) as i64;
    let k = if rounded % 2 == 0 {
        if raw >= rounded as f64 {
            rounded + 1
        } else {
            rounded - 1
        }
    } else {
        rounded
    };
    k.max(1) as u32
}

/// Average-case SIS instance: A in Z_q^{m x n} (rows a_i), m > n log2 q.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SisInstance {
    pub n: usize,
    pub m: usize,
    pub q: u64,
    /// m rows of n entries each, in [0, q).
    pub a: Vec<Vec<u64>>,
}

impl SisInstance {
    pub fn new(n: usize, m: usize, q: u64, a: Vec<Vec<u64>>) -> Result<Self, Error> {
        if q < 3 {
            return Err(Error::InvalidParameter("need q > 2".into()));
        }
        if (m as f64) <= n as f64 * (q as f64).log2() {
            return Err(Error::InvalidParameter(format!(
                "SIS shape needs m > n log2 q (m = {m}, n log2 q = {})",
                n as f64 * (q as f64).log2()
            )));
        }
        if a.len() != m || a.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: a.iter().map(|r| r.len()).sum(),
            });
        }
        if a.iter().flatten().any(|&x| x >= q) {
            return Err(Error::InvalidParameter("entries must lie in [0, q)".into()));
        }
        Ok(SisInstance { n, m, q, a })
    }

    pub fn random<R: Rng>(n: usize, m: usize, q: u64, rng: &mut R) -> Result<Self, Error> {
        let a = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0..q)).collect())
            .collect();
        SisInstance::new(n, m, q, a)
    }

    /// A z mod q for ternary z.
    pub fn apply(&self, z: &[i8]) -> Vec<u64> {
        let q = self.q as i128;
        (0..self.n)
            .map(|j| {
                let mut acc: i128 = 0;
                for (i, &zi) in z.iter().enumerate() {
                    acc += zi as i128 * self.a[i][j] as i128;
                }
                (acc.rem_euclid(q)) as u64
            })
            .collect()
    }
}

/// Hard cap on brute-force SIS dimension (3^m candidates).
pub const SIS_BRUTE_FORCE_MAX_M: usize = 16;

/// Exhaustive scan over nonzero ternary vectors in a fixed deterministic
/// order (balanced ternary counting); first kernel vector wins.
pub fn sis_oracle_bruteforce(inst: &SisInstance) -> Result<Option<Vec<i8>>, Error> {
    if inst.m > SIS_BRUTE_FORCE_MAX_M {
        return Err(Error::DimensionCap {
            n: inst.m,
            cap: SIS_BRUTE_FORCE_MAX_M,
        });
    }
    let mut z = vec![0i8; inst.m];
    let total = 3usize.pow(inst.m as u32);
    for code in 1..total {
        let mut c = code;
        for slot in z.iter_mut() {
            *slot = match c % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            c /= 3;
        }
        if inst.apply(&z).iter().all(|&x| x == 0) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// Pluggable SIS oracle with call accounting.
pub trait SisOracle {
    fn solve(&mut self, inst: &SisInstance) -> Result<Option<Vec<i8>>, Error>;
    fn calls(&self) -> u64;
}

pub struct BruteForceSis {
    calls: u64,
}

impl BruteForceSis {
    pub fn new() -> Self {
        BruteForceSis { calls: 0 }
    }
}

impl Default for BruteForceSis {
    fn default() -> Self {
        Self::new()
    }
}

impl SisOracle for BruteForceSis {
    fn solve(&mut self, inst: &SisInstance) -> Result<Option<Vec<i8>>, Error> {
        self.calls += 1;
        sis_oracle_bruteforce(inst)
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Source of fresh D_{L,s} samples for the SIS pipeline.
pub trait SampleSupply {
    fn next(&mut self) -> Result<LatticeVector, Error>;
    fn consumed(&self) -> usize;
}

/// Supply backed by the exact sampler.
pub struct ExactSupply {
    dgs: DiscreteGaussian,
    rng: rand_chacha::ChaCha12Rng,
    consumed: usize,
}

impl ExactSupply {
    pub fn new(basis: &Basis, s: f64, policy: TruncationPolicy, seed: SeedTree) -> Result<Self, Error> {
        let fl = basis.to_float();
        Ok(ExactSupply {
            dgs: DiscreteGaussian::build(basis, &fl, s, policy)?,
            rng: seed.rng(),
            consumed: 0,
        })
    }
}

impl SampleSupply for ExactSupply {
    fn next(&mut self) -> Result<LatticeVector, Error> {
        self.consumed += 1;
        Ok(self.dgs.sample(&mut self.rng))
    }

    fn consumed(&self) -> usize {
        self.consumed
    }
}

/// Supply backed by Klein's sampler (used inside the full pipeline).
pub struct KleinSupply {
    sampler: KleinSampler,
    rng: rand_chacha::ChaCha12Rng,
    consumed: usize,
}

impl KleinSupply {
    pub fn new(
        basis: &Basis,
        s: f64,
        policy: TruncationPolicy,
        check: WidthCheck,
        seed: SeedTree,
    ) -> Result<Self, Error> {
        Ok(KleinSupply {
            sampler: KleinSampler::new(basis, s, policy, check)?,
            rng: seed.rng(),
            consumed: 0,
        })
    }
}

impl SampleSupply for KleinSupply {
    fn next(&mut self) -> Result<LatticeVector, Error> {
        self.consumed += 1;
        self.sampler.sample(&mut self.rng)
    }

    fn consumed(&self) -> usize {
        self.consumed
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StepConfig {
    /// Smoothing slack used in the width precondition s >= sqrt(2) q eta_eps.
    pub eps: f64,
    /// Attempt budget before the zero-output fallback.
    pub retry_budget: usize,
    /// Check the width precondition (strict mode).
    pub strict_width_check: bool,
    pub policy: TruncationPolicy,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            eps: 1e-4,
            retry_budget: 256,
            strict_width_check: true,
            policy: TruncationPolicy::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub vector: LatticeVector,
    /// Exact effective squared width s^2 (r^2 / q^2)^c.
    pub s_eff_sq: Rat,
    pub s_eff: f64,
    pub fell_back_zero: bool,
    pub oracle_attempts: usize,
    pub samples_consumed: usize,
}

/// One combination round: write m fresh samples as y_i = B a_i mod qL, feed
/// A = (a_1 .. a_m) to the SIS oracle, keep solutions with ||z||^2 = r^2,
/// and output w = sum z_i y_i / q ~ D_{L, s r / q}. After the retry budget
/// the fallback output is 0 (logged in the outcome).
#[allow(clippy::too_many_arguments)]
pub fn dgs_to_sis_step(
    basis: &Basis,
    s: f64,
    s_sq: &Rat,
    supply: &mut dyn SampleSupply,
    oracle: &mut dyn SisOracle,
    m: usize,
    q: u64,
    r_sq: u64,
    cfg: &StepConfig,
) -> Result<StepOutcome, Error> {
    check_step_width(basis, s, q, cfg)?;
    chain_rounds(basis, s, s_sq, 1, supply, oracle, m, q, r_sq, cfg)
}

/// c chained rounds, each multiplying the width by r/q exactly. The
/// precondition s (r/q)^{c-1} > sqrt(2) q eta_eps is checked in strict mode.
#[allow(clippy::too_many_arguments)]
pub fn dgs_chain(
    basis: &Basis,
    s: f64,
    s_sq: &Rat,
    c: u32,
    supply: &mut dyn SampleSupply,
    oracle: &mut dyn SisOracle,
    m: usize,
    q: u64,
    r_sq: u64,
    cfg: &StepConfig,
) -> Result<StepOutcome, Error> {
    if c == 0 {
        return Err(Error::InvalidParameter("chain needs c >= 1".into()));
    }
    // Width at the input of the last round: s (r/q)^{c-1}.
    let ratio = ((r_sq as f64).sqrt() / q as f64).powi(c as i32 - 1);
    check_step_width(basis, s * ratio, q, cfg)?;
    chain_rounds(basis, s, s_sq, c, supply, oracle, m, q, r_sq, cfg)
}

fn check_step_width(basis: &Basis, s: f64, q: u64, cfg: &StepConfig) -> Result<(), Error> {
    if !cfg.strict_width_check {
        return Ok(());
    }
    let eta = smoothing_parameter(basis, cfg.eps, cfg.policy)?;
    let floor = (2.0f64).sqrt() * q as f64 * eta;
    if s < floor {
        return Err(Error::PreconditionViolated(format!(
            "step width {s} below sqrt(2) q eta_eps = {floor}"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn chain_rounds(
    basis: &Basis,
    s: f64,
    s_sq: &Rat,
    level: u32,
    supply: &mut dyn SampleSupply,
    oracle: &mut dyn SisOracle,
    m: usize,
    q: u64,
    r_sq: u64,
    cfg: &StepConfig,
) -> Result<StepOutcome, Error> {
    let mut attempts = 0usize;
    let start_consumed = supply.consumed();
    let vector = chain_sample(basis, level, supply, oracle, m, q, r_sq, cfg, &mut attempts)?;
    let (vector, fell_back) = match vector {
        Some(v) => (v, false),
        None => (LatticeVector::zero(basis.n()), true),
    };
    let ratio = Rat::new(BigInt::from(r_sq), BigInt::from(q) * BigInt::from(q));
    let mut s_eff_sq = s_sq.clone();
    for _ in 0..level {
        s_eff_sq *= ratio.clone();
    }
    let s_eff = s * (((r_sq as f64).sqrt() / q as f64).powi(level as i32));
    Ok(StepOutcome {
        vector,
        s_eff_sq,
        s_eff,
        fell_back_zero: fell_back,
        oracle_attempts: attempts,
        samples_consumed: supply.consumed() - start_consumed,
    })
}

/// Recursive sampler: level 0 pulls from the base supply; level j > 0 runs
/// the combination round on level j-1 outputs. Intermediate fallbacks
/// propagate as None so a truncated chain never silently mixes widths.
#[allow(clippy::too_many_arguments)]
fn chain_sample(
    basis: &Basis,
    level: u32,
    supply: &mut dyn SampleSupply,
    oracle: &mut dyn SisOracle,
    m: usize,
    q: u64,
    r_sq: u64,
    cfg: &StepConfig,
    attempts: &mut usize,
) -> Result<Option<LatticeVector>, Error> {
    if level == 0 {
        return supply.next().map(Some);
    }
    for _ in 0..cfg.retry_budget {
        *attempts += 1;
        let mut ys = Vec::with_capacity(m);
        for _ in 0..m {
            match chain_sample(basis, level - 1, supply, oracle, m, q, r_sq, cfg, attempts)? {
                Some(v) => ys.push(v),
                None => return Ok(None),
            }
        }
        // a_i = coords(y_i) mod q; A's rows must be (nearly) uniform.
        let a: Vec<Vec<u64>> = ys
            .iter()
            .map(|y| coords_mod_q(&y.coords, q))
            .collect();
        let inst = SisInstance::new(basis.n(), m, q, a)?;
        let Some(z) = oracle.solve(&inst)? else {
            continue;
        };
        let z_norm_sq: u64 = z.iter().map(|&v| (v as i64 * v as i64) as u64).sum();
        if z_norm_sq != r_sq {
            continue;
        }
        // w = sum z_i y_i / q; divisibility is exact by A z = 0 mod q.
        let mut coords = vec![BigInt::zero(); basis.n()];
        for (i, &zi) in z.iter().enumerate() {
            if zi == 0 {
                continue;
            }
            for (j, c) in ys[i].coords.iter().enumerate() {
                if zi > 0 {
                    coords[j] += c;
                } else {
                    coords[j] -= c;
                }
            }
        }
        let qb = BigInt::from(q);
        let mut out = Vec::with_capacity(coords.len());
        for c in coords {
            let (quot, rem) = c.div_rem(&qb);
            if !rem.is_zero() {
                return Err(Error::InvalidParameter(
                    "SIS combination not divisible by q (oracle returned a bad z)".into(),
                ));
            }
            out.push(quot);
        }
        return Ok(Some(basis.lattice_vector(out)));
    }
    Ok(None)
}

fn coords_mod_q(coords: &[BigInt], q: u64) -> Vec<u64> {
    let qb = BigInt::from(q);
    coords
        .iter()
        .map(|c| {
            let r = c.mod_floor(&qb);
            r.to_u64().expect("residue fits")
        })
        .collect()
}

/// Calibration result: the most common solution length over random
/// instances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SisCalibration {
    pub r_sq: u64,
    /// Fraction of oracle calls returning a solution of length r.
    pub hit_rate: f64,
    pub successes: usize,
    pub calls: usize,
}

/// Samples random SIS instances until `target_successes` solutions are seen;
/// r^2 is the most common ||z||^2, ties broken toward smaller r.
pub fn calibrate_sis_r(
    n: usize,
    m: usize,
    q: u64,
    oracle: &mut dyn SisOracle,
    target_successes: usize,
    seed: SeedTree,
) -> Result<SisCalibration, Error> {
    let mut rng = seed.rng();
    let mut counts: std::collections::BTreeMap<u64, usize> = std::collections::BTreeMap::new();
    let mut successes = 0usize;
    let mut calls = 0usize;
    let max_calls = target_successes.saturating_mul(64).max(512);
    while successes < target_successes {
        if calls >= max_calls {
            return Err(Error::CalibrationFailure(format!(
                "only {successes} successes in {calls} oracle calls"
            )));
        }
        calls += 1;
        let inst = SisInstance::random(n, m, q, &mut rng)?;
        if let Some(z) = oracle.solve(&inst)? {
            let r_sq: u64 = z.iter().map(|&v| (v as i64 * v as i64) as u64).sum();
            *counts.entry(r_sq).or_default() += 1;
            successes += 1;
        }
    }
    // BTreeMap order makes the tie-break toward smaller r deterministic.
    let (r_sq, hits) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, v)| (*k, *v))
        .ok_or_else(|| Error::CalibrationFailure("no successes recorded".into()))?;
    Ok(SisCalibration {
        r_sq,
        hit_rate: hits as f64 / calls as f64,
        successes,
        calls,
    })
}

/// Converts n linearly independent lattice vectors into a basis of the full
/// lattice whose Gram-Schmidt norms do not exceed max_i ||s_i||: write
/// S = B Z, bring Z to upper-triangular form by unimodular row operations,
/// and mirror the inverse column operations onto B.
pub fn short_vectors_to_basis(basis: &Basis, short: &[LatticeVector]) -> Result<Basis, Error> {
    let n = basis.n();
    if short.len() != n {
        return Err(Error::InvalidParameter(format!(
            "need exactly n = {n} vectors, got {}",
            short.len()
        )));
    }
    // Z: column j = coords of short[j].
    let mut z: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| short[j].coords[i].clone()).collect())
        .collect();
    let mut cols: Vec<Vec<Rat>> = basis.columns().to_vec();

    for col in 0..n {
        loop {
            // Rows >= col with nonzero entry in this column.
            let mut nz: Vec<usize> = (col..n).filter(|&r| !z[r][col].is_zero()).collect();
            if nz.is_empty() {
                return Err(Error::InvalidParameter(
                    "vectors are linearly dependent".into(),
                ));
            }
            // Pivot: smallest magnitude.
            nz.sort_by_key(|&r| z[r][col].magnitude().clone());
            let p = nz[0];
            if p != col {
                z.swap(p, col);
                cols.swap(p, col);
            }
            if nz.len() == 1 && !z[col][col].is_zero() {
                break;
            }
            let pivot = z[col][col].clone();
            let mut reduced_all = true;
            for r in (col + 1)..n {
                if z[r][col].is_zero() {
                    continue;
                }
                let quot = div_round(&z[r][col], &pivot);
                if !quot.is_zero() {
                    // Row op on Z: row_r -= quot * row_col; mirrored inverse
                    // column op on B: col_col += quot * col_r.
                    for j in 0..n {
                        let sub = &quot * &z[col][j];
                        z[r][j] -= sub;
                    }
                    let quot_rat = Rat::from_integer(quot);
                    for i in 0..n {
                        let add = &quot_rat * &cols[r][i];
                        cols[col][i] += add;
                    }
                }
                if !z[r][col].is_zero() {
                    reduced_all = false;
                }
            }
            if reduced_all {
                break;
            }
        }
    }
    let out = Basis::new(cols)?;
    debug_assert!(same_lattice(basis, &out));
    Ok(out)
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // Nearest integer to a/b (half rounds up).
    rational::floor_rat(&(Rat::new(a.clone(), b.clone()) + rational::rat(1, 2)))
}

#[derive(Clone, Debug)]
pub struct FullPipelineConfig {
    pub m: usize,
    pub q: u64,
    /// Desk-scale stand-in for the cubic calibration count.
    pub calibration_successes: usize,
    pub step: StepConfig,
    /// Run basis reduction once at entry (establishes the Gram-Schmidt
    /// precondition for the phase loop).
    pub run_lll_at_entry: bool,
    /// Attempts to find n linearly independent short vectors per phase.
    pub phase_sample_budget: usize,
}

impl FullPipelineConfig {
    pub fn desk(m: usize, q: u64) -> Self {
        FullPipelineConfig {
            m,
            q,
            calibration_successes: (10 * m).max(200),
            step: StepConfig::default(),
            run_lll_at_entry: true,
            phase_sample_budget: 64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FullPipelineRun {
    pub samples: Vec<LatticeVector>,
    pub calibration: SisCalibration,
    pub c_rounds: u32,
    pub phases: usize,
    pub klein_width: f64,
    pub fallback_zeros: usize,
}

/// The full DGS -> SIS reduction: calibrate r, then loop phases improving
/// the basis until the Klein regime s_target (q/r)^c >= ||B~|| sqrt(log n)
/// is reached, and emit samples at s_target by sampling high and chaining
/// down c rounds.
pub fn dgs_to_sis_full(
    basis: &Basis,
    s_target: f64,
    s_target_sq: &Rat,
    oracle: &mut dyn SisOracle,
    count: usize,
    cfg: &FullPipelineConfig,
    seed: SeedTree,
) -> Result<FullPipelineRun, Error> {
    let n = basis.n();
    let mut current = if cfg.run_lll_at_entry {
        lll_reduce(basis)
    } else {
        basis.clone()
    };

    let calibration = calibrate_sis_r(n, cfg.m, cfg.q, oracle, cfg.calibration_successes, seed.child(0))?;
    let r = (calibration.r_sq as f64).sqrt();
    if r >= cfg.q as f64 {
        return Err(Error::CalibrationFailure("need r < q".into()));
    }
    // Retry budget: 64 x the estimated expected attempts per length-r hit.
    let mut cfg = cfg.clone();
    cfg.step.retry_budget = (64.0 / calibration.hit_rate.max(1e-6)).ceil() as usize;
    let cfg = &cfg;
    let c = (((n as f64).ln() / (cfg.q as f64 / r).ln()).ceil() as u32).max(1);
    let up = (cfg.q as f64 / r).powi(c as i32);
    let log_n = (n.max(2) as f64).ln().sqrt();

    let mut phases = 0usize;
    loop {
        let gs_norm = current.to_float().max_gs_norm();
        if s_target * up >= gs_norm * log_n {
            break;
        }
        phases += 1;
        if phases > n {
            return Err(Error::PhaseLimit { phases });
        }
        // Off-regime phase: sample at s' = ||B~|| sqrt(log n), chain down,
        // and rebuild a 2x better basis from the short outputs.
        let s_prime = gs_norm * log_n;
        let target_len = gs_norm / 2.0;
        let mut shorts: Vec<LatticeVector> = Vec::new();
        let mut tries = 0usize;
        while shorts.len() < n {
            tries += 1;
            if tries > cfg.phase_sample_budget * n * n {
                return Err(Error::RetryExhausted(format!(
                    "phase {phases}: could not collect {n} independent short vectors"
                )));
            }
            let mut supply = KleinSupply::new(
                &current,
                s_prime,
                cfg.step.policy,
                WidthCheck::WarnAndProceed,
                seed.child(10_000 + (phases * 1000 + tries) as u64),
            )?;
            let out = chain_rounds(
                &current,
                s_prime,
                &rat_from_f64(s_prime * s_prime),
                c,
                &mut supply,
                oracle,
                cfg.m,
                cfg.q,
                calibration.r_sq,
                &cfg.step,
            )?;
            if out.fell_back_zero {
                continue;
            }
            let norm = rational::rat_to_f64(&out.vector.norm_sq()).sqrt();
            if norm > target_len || out.vector.is_zero() {
                continue;
            }
            // Keep only if it extends the independent set (exact rank test).
            shorts.push(out.vector);
            if !independent(&shorts) {
                shorts.pop();
            }
        }
        current = short_vectors_to_basis(&current, &shorts)?;
        let new_norm = current.to_float().max_gs_norm();
        if new_norm > gs_norm / 2.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "phase {phases} failed to halve ||B~||: {gs_norm} -> {new_norm}"
            )));
        }
    }

    // Klein regime: sample at s_target (q/r)^c and chain back down to
    // s_target exactly.
    let ratio_sq = Rat::new(
        BigInt::from(cfg.q) * BigInt::from(cfg.q),
        BigInt::from(calibration.r_sq),
    );
    let mut s_hi_sq = s_target_sq.clone();
    for _ in 0..c {
        s_hi_sq *= ratio_sq.clone();
    }
    let s_hi = rational::rat_to_f64(&s_hi_sq).sqrt();
    let mut supply = KleinSupply::new(
        &current,
        s_hi,
        cfg.step.policy,
        WidthCheck::Strict,
        seed.child(777),
    )?;
    let mut samples = Vec::with_capacity(count);
    let mut fallback_zeros = 0usize;
    for _ in 0..count {
        let out = chain_rounds(
            &current,
            s_hi,
            &s_hi_sq,
            c,
            &mut supply,
            oracle,
            cfg.m,
            cfg.q,
            calibration.r_sq,
            &cfg.step,
        )?;
        if out.fell_back_zero {
            fallback_zeros += 1;
        }
        debug_assert_eq!(&out.s_eff_sq, s_target_sq);
        samples.push(out.vector);
    }
    Ok(FullPipelineRun {
        samples,
        calibration,
        c_rounds: c,
        phases,
        klein_width: s_hi,
        fallback_zeros,
    })
}

/// Exact linear independence over the rationals of lattice-vector coords.
fn independent(vs: &[LatticeVector]) -> bool {
    if vs.is_empty() {
        return true;
    }
    let n = vs[0].coords.len();
    if vs.len() > n {
        return false;
    }
    // Rank via fraction-free elimination on a copy.
    let mut m: Vec<Vec<Rat>> = vs
        .iter()
        .map(|v| {
            v.coords
                .iter()
                .map(|c| Rat::from_integer(c.clone()))
                .collect()
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        for r in (rank + 1)..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for j in col..n {
                let sub = &f * &m[rank][j];
                m[r][j] -= sub;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank == vs.len()
}

/// Convenience wrapper computing the paper-preset SVP->BDD query-count
/// formula for parameter reporting.
pub fn bdd_paper_queries_log2(n: usize, alpha: Ratio64, gamma: Ratio64) -> Result<f64, Error> {
    formulas::bdd_query_count_log2(n as u64, alpha, gamma)
}

/// Change-of-coordinates check used by tests: U = A^{-1} B.
pub fn unimodular_transform(a: &Basis, b: &Basis) -> Mat {
    Mat::from_columns(a.columns())
        .inverse()
        .expect("basis invariant")
        .mul(&Mat::from_columns(b.columns()))
}
