//! Experiment runners: each dispatches into the core crate per seed, then
//! aggregates rates (always with sample counts and Wilson CIs) into a
//! reproducible report.

use crate::report::ExperimentReport;
use anyhow::{Context, Result};
use latlab::error::Error;
use latlab::fixtures::{Fixture, FixtureKind};
use latlab::formulas::Ratio64;
use latlab::gaussian::TruncationPolicy;
use latlab::json::SampleLine;
use latlab::lattice::Basis;
use latlab::protocols::{run_protocol, GGConfig, MerlinKind};
use latlab::rational::{self, format_rat, Rat};
use latlab::reductions::{
    SisOracle,
    dgs_to_sis_full, svp_to_bdd, svp_to_dgs_ma, svp_to_dgs_np, rational_sqrt_approx,
    BruteForceSis, Decision, ExactDgsOracle, FullPipelineConfig,
};
use latlab::rng::SeedTree;
use latlab::solvers::{BddMode, BddOracleExact, EnumerationCaps};
use latlab::stats::RateStat;
use latlab::verifiers::{
    adversarial_witness_suite, coma_verify, conp_verify, conp_witness_gen, ComaParams, ConpParams,
    Outcome,
};
use latlab::geometry::BodyKind;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::time::Instant;

pub const DEFAULT_BUDGET_LOG2: f64 = 33.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessSource {
    Honest,
    Adversarial,
}

fn caps() -> EnumerationCaps {
    EnumerationCaps::default()
}

fn rate_value(label: &str, successes: u64, trials: u64) -> Value {
    json!({ label: RateStat::wilson(successes, trials) })
}

/// GG protocol experiment: acceptance rate over seeds plus pooled per-round
/// reply correctness.
pub fn run_gg(
    fixture: &Fixture,
    preset_paper: bool,
    merlin: MerlinKind,
    rounds: usize,
    seeds: &[u64],
    budget_log2: f64,
    transcript_out: Option<&std::path::Path>,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let n = fixture.basis.n();
    let cfg = if preset_paper {
        let gamma64 = ratio64_of(&fixture.gamma)?;
        GGConfig::paper_l2(n, gamma64, fixture.d.clone(), budget_log2)?
    } else {
        GGConfig::desk(
            fixture.gamma.clone(),
            fixture.d.clone(),
            rounds,
            BodyKind::L2,
        )?
    };
    let outcomes: Result<Vec<_>, Error> = seeds
        .par_iter()
        .map(|&seed| {
            let out = run_protocol(
                &fixture.basis,
                &fixture.target,
                &cfg,
                merlin,
                caps(),
                SeedTree::new(seed),
            )?;
            Ok((seed, out.accepted, out.correct_rounds))
        })
        .collect();
    let outcomes = outcomes?;
    if let (Some(path), Some(&first_seed)) = (transcript_out, seeds.first()) {
        // Replayable transcript of the first seed's run, one round per line.
        let replay = run_protocol(
            &fixture.basis,
            &fixture.target,
            &cfg,
            merlin,
            caps(),
            SeedTree::new(first_seed),
        )?;
        let lines: Vec<String> = replay
            .transcript
            .rounds
            .iter()
            .map(|r| serde_json::to_string(r).context("serialize round"))
            .collect::<Result<_>>()?;
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, lines.join("\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let accepted = outcomes.iter().filter(|o| o.1).count() as u64;
    let correct: u64 = outcomes.iter().map(|o| o.2 as u64).sum();
    let total_rounds = (cfg.rounds * seeds.len()) as u64;
    let per_seed: Vec<Value> = outcomes
        .iter()
        .map(|(seed, acc, corr)| json!({ "seed": seed, "accepted": acc, "correct_rounds": corr }))
        .collect();
    Ok(ExperimentReport::new(
        "run gg",
        json!({
            "fixture": fixture.to_file(),
            "preset": if preset_paper { "paper" } else { "desk" },
            "merlin": format!("{merlin:?}"),
            "rounds": cfg.rounds,
            "gamma": format_rat(&cfg.gamma),
            "d": format_rat(&cfg.d),
            "sampling_radius": format_rat(&cfg.r()),
        }),
        seeds.to_vec(),
        per_seed,
        json!({
            "acceptance": RateStat::wilson(accepted, seeds.len() as u64),
            "round_correctness": RateStat::wilson(correct, total_rounds),
        }),
        start.elapsed().as_millis(),
    ))
}

/// conp verifier experiment over seeds; honest witnesses measure
/// completeness, the adversarial suite measures soundness.
pub fn run_conp(
    fixture: &Fixture,
    params: &ConpParams,
    source: WitnessSource,
    seeds: &[u64],
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let policy = TruncationPolicy::default();
    let per_seed_results: Result<Vec<Value>, Error> = seeds
        .par_iter()
        .map(|&seed| match source {
            WitnessSource::Honest => {
                let w = conp_witness_gen(
                    &fixture.basis,
                    params.n_witness,
                    policy,
                    SeedTree::new(seed),
                )?;
                let v = conp_verify(&fixture.basis, &fixture.target, params, &w)?;
                Ok(json!({
                    "seed": seed,
                    "verdicts": [{
                        "witness": "honest",
                        "outcome": v.outcome,
                        "failed_check": v.failed_check,
                        "fw": v.diagnostics.fw_value,
                        "max_moment_deviation": v.diagnostics.max_moment_deviation,
                    }],
                }))
            }
            WitnessSource::Adversarial => {
                let suite = adversarial_witness_suite(
                    &fixture.basis,
                    &fixture.target,
                    params.n_witness.min(512),
                    policy,
                    caps(),
                    SeedTree::new(seed),
                )?;
                let verdicts: Result<Vec<Value>, Error> = suite
                    .iter()
                    .map(|(label, w)| {
                        let v = conp_verify(&fixture.basis, &fixture.target, params, w)?;
                        Ok(json!({
                            "witness": label,
                            "outcome": v.outcome,
                            "failed_check": v.failed_check,
                        }))
                    })
                    .collect();
                Ok(json!({ "seed": seed, "verdicts": verdicts? }))
            }
        })
        .collect();
    let per_seed = per_seed_results?;
    let mut far = 0u64;
    let mut total = 0u64;
    for entry in &per_seed {
        for v in entry["verdicts"].as_array().unwrap() {
            total += 1;
            if v["outcome"] == json!(Outcome::Far) {
                far += 1;
            }
        }
    }
    Ok(ExperimentReport::new(
        "run conp",
        json!({
            "fixture": fixture.to_file(),
            "params": params,
            "witness_source": format!("{source:?}"),
        }),
        seeds.to_vec(),
        per_seed,
        rate_value("far_rate", far, total),
        start.elapsed().as_millis(),
    ))
}

/// One fixed witness against the deterministic verifier.
pub fn run_conp_fixed_witness(
    fixture: &Fixture,
    params: &ConpParams,
    witness: &latlab::verifiers::Witness,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let v = conp_verify(&fixture.basis, &fixture.target, params, witness)?;
    let far = (v.outcome == Outcome::Far) as u64;
    Ok(ExperimentReport::new(
        "run conp (fixed witness)",
        json!({ "fixture": fixture.to_file(), "params": params, "witness_len": witness.len() }),
        vec![],
        vec![json!({
            "outcome": v.outcome,
            "failed_check": v.failed_check,
            "fw": v.diagnostics.fw_value,
            "max_moment_deviation": v.diagnostics.max_moment_deviation,
        })],
        rate_value("far_rate", far, 1),
        start.elapsed().as_millis(),
    ))
}

/// coMA verifier experiment over seeds.
pub fn run_coma(
    fixture: &Fixture,
    params: &ComaParams,
    source: WitnessSource,
    seeds: &[u64],
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let policy = TruncationPolicy::default();
    let per_seed_results: Result<Vec<Value>, Error> = seeds
        .par_iter()
        .map(|&seed| {
            let tree = SeedTree::new(seed);
            let witnesses: Vec<(String, latlab::verifiers::Witness)> = match source {
                WitnessSource::Honest => vec![(
                    "honest".to_string(),
                    conp_witness_gen(&fixture.basis, params.n_witness, policy, tree.child(0))?,
                )],
                WitnessSource::Adversarial => adversarial_witness_suite(
                    &fixture.basis,
                    &fixture.target,
                    params.n_witness.min(512),
                    policy,
                    caps(),
                    tree.child(0),
                )?,
            };
            let verdicts: Result<Vec<Value>, Error> = witnesses
                .iter()
                .map(|(label, w)| {
                    let v = coma_verify(&fixture.basis, &fixture.target, params, w, tree.child(1))?;
                    let rejected_trials =
                        v.diagnostics.trials.iter().filter(|t| !t.passed).count();
                    Ok(json!({
                        "witness": label,
                        "outcome": v.outcome,
                        "failed_check": v.failed_check,
                        "trials": v.diagnostics.trials.len(),
                        "rejected_trials": rejected_trials,
                    }))
                })
                .collect();
            Ok(json!({ "seed": seed, "verdicts": verdicts? }))
        })
        .collect();
    let per_seed = per_seed_results?;
    let mut far = 0u64;
    let mut total = 0u64;
    let mut rejected = 0u64;
    let mut trials = 0u64;
    for entry in &per_seed {
        for v in entry["verdicts"].as_array().unwrap() {
            total += 1;
            if v["outcome"] == json!(Outcome::Far) {
                far += 1;
            }
            rejected += v["rejected_trials"].as_u64().unwrap();
            trials += v["trials"].as_u64().unwrap();
        }
    }
    Ok(ExperimentReport::new(
        "run coma",
        json!({
            "fixture": fixture.to_file(),
            "params": params,
            "witness_source": format!("{source:?}"),
        }),
        seeds.to_vec(),
        per_seed,
        json!({
            "far_rate": RateStat::wilson(far, total),
            "per_trial_rejection": RateStat::wilson(rejected, trials),
        }),
        start.elapsed().as_millis(),
    ))
}

/// SVP -> BDD with the exact oracle. Far-promise fixtures run the NO branch
/// at the fixture threshold; other fixtures run the YES branch with d pinned
/// just above lambda_1.
pub fn run_svp_to_bdd(
    fixture: &Fixture,
    alpha: &Rat,
    trials: usize,
    mode: BddMode,
    seeds: &[u64],
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let d = match fixture.kind {
        FixtureKind::FarPromise => fixture.d.clone(),
        _ => {
            // d >= lambda_1: rational sqrt approximation padded upward.
            rational_sqrt_approx(&fixture.lambda1_sq) + rational::rat(1, 1 << 20)
        }
    };
    let oracle = BddOracleExact::new(&fixture.basis, alpha, mode, caps())?;
    let outcomes: Result<Vec<_>, Error> = seeds
        .par_iter()
        .map(|&seed| {
            let run = svp_to_bdd(
                &fixture.basis,
                &d,
                &fixture.gamma,
                alpha,
                &oracle,
                trials,
                SeedTree::new(seed),
            )?;
            Ok((seed, run.decision, run.trials_run))
        })
        .collect();
    let outcomes = outcomes?;
    let yes = outcomes.iter().filter(|o| o.1 == Decision::Yes).count() as u64;
    let per_seed = outcomes
        .iter()
        .map(|(s, dec, t)| json!({ "seed": s, "decision": dec, "trials_run": t }))
        .collect();
    Ok(ExperimentReport::new(
        "run svp-to-bdd",
        json!({
            "fixture": fixture.to_file(),
            "alpha": format_rat(alpha),
            "d": format_rat(&d),
            "trials": trials,
            "oracle_mode": format!("{mode:?}"),
        }),
        seeds.to_vec(),
        per_seed,
        rate_value("yes_rate", yes, seeds.len() as u64),
        start.elapsed().as_millis(),
    ))
}

pub enum DgsFlavor {
    Np { params: ConpParams },
    Ma { n_witness: usize, trials: usize },
}

/// SVP -> DGS wrappers with the exact sampler standing in for the oracle.
pub fn run_svp_to_dgs(
    fixture: &Fixture,
    gamma_prime: &Rat,
    flavor: &DgsFlavor,
    seeds: &[u64],
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let policy = TruncationPolicy::default();
    let outcomes: Result<Vec<_>, Error> = seeds
        .par_iter()
        .map(|&seed| {
            let mut oracle = ExactDgsOracle { policy };
            let run = match flavor {
                DgsFlavor::Np { params } => svp_to_dgs_np(
                    &fixture.basis,
                    &fixture.d,
                    &fixture.gamma,
                    gamma_prime,
                    &mut oracle,
                    params,
                    SeedTree::new(seed),
                )?,
                DgsFlavor::Ma { n_witness, trials } => svp_to_dgs_ma(
                    &fixture.basis,
                    &fixture.d,
                    &fixture.gamma,
                    gamma_prime,
                    &mut oracle,
                    *n_witness,
                    *trials,
                    SeedTree::new(seed),
                )?,
            };
            Ok((seed, run.decision))
        })
        .collect();
    let outcomes = outcomes?;
    let yes = outcomes.iter().filter(|o| o.1 == Decision::Yes).count() as u64;
    let per_seed = outcomes
        .iter()
        .map(|(s, dec)| json!({ "seed": s, "decision": dec }))
        .collect();
    let flavor_cfg = match flavor {
        DgsFlavor::Np { params } => json!({ "kind": "np", "params": params }),
        DgsFlavor::Ma { n_witness, trials } => {
            json!({ "kind": "ma", "n_witness": n_witness, "trials": trials })
        }
    };
    Ok(ExperimentReport::new(
        "run svp-to-dgs",
        json!({
            "fixture": fixture.to_file(),
            "gamma_prime": format_rat(gamma_prime),
            "flavor": flavor_cfg,
        }),
        seeds.to_vec(),
        per_seed,
        rate_value("yes_rate", yes, seeds.len() as u64),
        start.elapsed().as_millis(),
    ))
}

/// Full DGS -> SIS pipeline; emits the sample stream as JSONL lines and
/// returns the summary report.
pub fn run_dgs_to_sis(
    basis: &Basis,
    s_target: f64,
    q: u64,
    m: usize,
    count: usize,
    seed: u64,
) -> Result<(ExperimentReport, Vec<String>)> {
    let start = Instant::now();
    let mut oracle = BruteForceSis::new();
    let cfg = FullPipelineConfig::desk(m, q);
    let s_sq = rational::rat_from_f64(s_target * s_target);
    let run = dgs_to_sis_full(
        basis,
        s_target,
        &s_sq,
        &mut oracle,
        count,
        &cfg,
        SeedTree::new(seed),
    )?;
    let lines: Vec<String> = run
        .samples
        .iter()
        .map(|v| serde_json::to_string(&SampleLine::from_vector(v)).context("serialize sample"))
        .collect::<Result<_>>()?;
    let zero_rate = RateStat::wilson(run.fallback_zeros as u64, count as u64);
    let report = ExperimentReport::new(
        "run dgs-to-sis",
        json!({
            "n": basis.n(),
            "s_target": s_target,
            "q": q,
            "m": m,
            "count": count,
            "calibration": run.calibration,
            "c_rounds": run.c_rounds,
            "phases": run.phases,
            "klein_width": run.klein_width,
        }),
        vec![seed],
        vec![],
        json!({
            "fallback_zero_rate": zero_rate,
            "oracle_calls": oracle.calls(),
        }),
        start.elapsed().as_millis(),
    );
    Ok((report, lines))
}

pub fn ratio64_of(r: &Rat) -> Result<Ratio64> {
    use num_traits::ToPrimitive;
    let num = r
        .numer()
        .to_i64()
        .context("gamma numerator exceeds i64 (paper formulas take small rationals)")?;
    let den = r.denom().to_i64().context("gamma denominator exceeds i64")?;
    Ok(Ratio64::new(num, den)?)
}
