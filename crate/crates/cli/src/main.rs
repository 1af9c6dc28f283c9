//! `latlab`: seeded experiment runner for the lattice protocol lab.
//!
//! Exit codes: 0 success, 2 budget refusal (the required cost is printed),
//! 3 fixture promise violation, 1 anything else.

mod report;
mod runners;
mod table;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use latlab::error::Error;
use latlab::fixtures::{self, Fixture, FixtureKind};
use latlab::formulas::Ratio64;
use latlab::protocols::MerlinKind;
use latlab::rational::{parse_rat, rat_to_f64, Rat};
use latlab::solvers::{BddMode, EnumerationCaps};
use latlab::verifiers::{ComaParams, ConpParams};
use runners::{DgsFlavor, WitnessSource, DEFAULT_BUDGET_LOG2};
use std::path::{Path, PathBuf};

/// Environment variable holding the default fixture directory.
const FIXTURE_DIR_ENV: &str = "LATLAB_FIXTURE_DIR";

#[derive(Parser)]
#[command(name = "latlab", version, about = "Desk-scale lattice protocol laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Paper,
    Desk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    #[value(name = "close-promise")]
    ClosePromise,
    #[value(name = "far-promise")]
    FarPromise,
    Random,
    #[value(name = "scaled-zn")]
    ScaledZn,
}

impl From<KindArg> for FixtureKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::ClosePromise => FixtureKind::ClosePromise,
            KindArg::FarPromise => FixtureKind::FarPromise,
            KindArg::Random => FixtureKind::Random,
            KindArg::ScaledZn => FixtureKind::ScaledZn,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MerlinArg {
    Honest,
    Cheat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WitnessArg {
    Honest,
    Adversarial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleModeArg {
    Closest,
    Garbage,
    Abstain,
}

#[derive(Args, Clone)]
struct CommonRun {
    /// Fixture JSON path (resolved against $LATLAB_FIXTURE_DIR when not
    /// found directly).
    #[arg(long)]
    fixture: PathBuf,
    /// Seed list: "7", "1,2,9", or an inclusive range "0..99".
    #[arg(long, default_value = "0")]
    seeds: String,
    /// Report output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// log2 of the largest affordable trial/witness count for paper presets.
    #[arg(long, default_value_t = DEFAULT_BUDGET_LOG2)]
    budget: f64,
}

#[derive(Subcommand)]
enum Commands {
    /// Emit the time/approximation tradeoff table (log2 cost per cell).
    TradeoffTable {
        /// Ranks, comma separated.
        #[arg(long, default_value = "2,4,8,16,32,64,128")]
        n: String,
        /// Approximation factors as rationals, comma separated.
        #[arg(long, default_value = "3/2,2,3,4,8,16")]
        gamma: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a promise-certified fixture.
    FixtureGen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        /// Approximation factor (rational).
        #[arg(long, default_value = "8")]
        gamma: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate an honest witness (N independent dual-Gaussian samples)
    /// for a fixture, as Witness JSON.
    WitnessGen {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long, default_value_t = 4096)]
        n_witness: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a SIS instance JSON with the brute-force oracle.
    SisSolve {
        /// Instance file: { "n", "m", "q", "A": [[int]] }.
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run an experiment against a fixture.
    #[command(subcommand)]
    Run(RunCommands),
}

#[derive(Subcommand)]
enum RunCommands {
    /// Ball-shift protocol rounds with honest or Bayes-optimal Merlin.
    Gg {
        #[command(flatten)]
        common: CommonRun,
        #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
        preset: PresetArg,
        #[arg(long, value_enum, default_value_t = MerlinArg::Honest)]
        merlin: MerlinArg,
        /// Desk-preset round count.
        #[arg(long, default_value_t = 200)]
        rounds: usize,
        /// Replay transcript of the first seed as JSONL (one round per line).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Deterministic three-check verifier.
    Conp {
        #[command(flatten)]
        common: CommonRun,
        #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
        preset: PresetArg,
        #[arg(long, value_enum, default_value_t = WitnessArg::Honest)]
        witness: WitnessArg,
        /// Odd Taylor order (desk override; paper preset requires it).
        #[arg(long)]
        k: Option<u32>,
        /// Witness size override (desk).
        #[arg(long)]
        n_witness: Option<usize>,
        /// Moment tolerance override (desk).
        #[arg(long)]
        eps: Option<f64>,
        /// f_W threshold override (desk).
        #[arg(long)]
        fw_threshold: Option<f64>,
        /// Verify a fixed Witness JSON file instead of generating per seed.
        #[arg(long)]
        witness_file: Option<PathBuf>,
    },
    /// Randomized ball-shift verifier.
    Coma {
        #[command(flatten)]
        common: CommonRun,
        #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
        preset: PresetArg,
        #[arg(long, value_enum, default_value_t = WitnessArg::Honest)]
        witness: WitnessArg,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 0.3)]
        beta: f64,
        #[arg(long, default_value_t = 4096)]
        n_witness: usize,
        #[arg(long, default_value_t = 64)]
        trials: usize,
    },
    /// SVP -> BDD reduction against the exact oracle.
    SvpToBdd {
        #[command(flatten)]
        common: CommonRun,
        #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
        preset: PresetArg,
        /// BDD decoding radius fraction (rational, < 1/2).
        #[arg(long, default_value = "9/20")]
        alpha: String,
        /// Desk-preset trial count (paper preset derives it).
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = OracleModeArg::Closest)]
        oracle_mode: OracleModeArg,
    },
    /// SVP -> DGS -> deterministic verifier.
    SvpToDgsNp {
        #[command(flatten)]
        common: CommonRun,
        #[arg(long, default_value = "1")]
        gamma_prime: String,
    },
    /// SVP -> DGS -> randomized verifier.
    SvpToDgsMa {
        #[command(flatten)]
        common: CommonRun,
        #[arg(long, default_value = "1")]
        gamma_prime: String,
        #[arg(long, default_value_t = 4096)]
        n_witness: usize,
        #[arg(long, default_value_t = 64)]
        trials: usize,
    },
    /// Full DGS -> SIS pipeline; emits a JSONL sample stream.
    DgsToSis {
        /// Lattice JSON path, or use --zn for the integer lattice.
        #[arg(long)]
        lattice: Option<PathBuf>,
        /// Shortcut: Z^n of this rank.
        #[arg(long)]
        zn: Option<usize>,
        #[arg(long)]
        s_target: f64,
        #[arg(long, default_value_t = 3)]
        q: u64,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample stream output (JSONL); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(err) => {
            let code = exit_code_for(&err);
            eprintln!("error: {err:#}");
            std::process::exit(code);
        }
    }
}

/// 2 for budget refusals, 3 for fixture promise violations, 1 otherwise.
fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => 2,
        Some(Error::PromiseViolation(_)) => 3,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Commands::TradeoffTable {
            n,
            gamma,
            format,
            out,
        } => {
            let ns = parse_u64_list(&n)?;
            let gammas = parse_ratio_list(&gamma)?;
            let cells = table::build_table(&ns, &gammas)?;
            let body = match format {
                FormatArg::Csv => table::to_csv(&cells),
                FormatArg::Json => serde_json::to_string_pretty(&cells)?,
                FormatArg::Jsonl => cells
                    .iter()
                    .map(|c| serde_json::to_string(c).map_err(Into::into))
                    .collect::<Result<Vec<_>>>()?
                    .join("\n"),
            };
            emit(out.as_deref(), &body)
        }
        Commands::FixtureGen {
            kind,
            n,
            gamma,
            seed,
            out,
        } => {
            let gamma = parse_rat(&gamma)?;
            let fixture = fixtures::generate(kind.into(), n, &gamma, seed, EnumerationCaps::default())?;
            let body = serde_json::to_string_pretty(&fixture.to_file())?;
            emit(Some(&out), &body)?;
            eprintln!(
                "wrote {:?} fixture (n = {n}, lambda1_sq = {}, dist_sq = {})",
                FixtureKind::from(kind),
                fixture.to_file().promise.lambda1_sq,
                fixture.to_file().promise.dist_sq,
            );
            Ok(())
        }
        Commands::WitnessGen {
            fixture,
            n_witness,
            seed,
            out,
        } => {
            let fixture = load_fixture(&fixture)?;
            let w = latlab::verifiers::conp_witness_gen(
                &fixture.basis,
                n_witness,
                latlab::gaussian::TruncationPolicy::default(),
                latlab::rng::SeedTree::new(seed),
            )?;
            let body = serde_json::to_string(&latlab::json::WitnessFile::from_witness(&w))?;
            emit(Some(&out), &body)
        }
        Commands::SisSolve { instance } => {
            let text = std::fs::read_to_string(resolve_path(&instance))
                .with_context(|| format!("reading {}", instance.display()))?;
            let file: latlab::json::SisFile = serde_json::from_str(&text)?;
            let inst = file.to_instance()?;
            match latlab::reductions::sis_oracle_bruteforce(&inst)? {
                Some(z) => emit(None, &serde_json::to_string(&serde_json::json!({ "z": z }))?),
                None => emit(None, "{\"z\":null}"),
            }
        }
        Commands::Run(run) => dispatch_run(run),
    }
}

fn dispatch_run(run: RunCommands) -> Result<()> {
    match run {
        RunCommands::Gg {
            common,
            preset,
            merlin,
            rounds,
            transcript,
        } => {
            let fixture = load_fixture(&common.fixture)?;
            let report = runners::run_gg(
                &fixture,
                matches!(preset, PresetArg::Paper),
                match merlin {
                    MerlinArg::Honest => MerlinKind::Honest,
                    MerlinArg::Cheat => MerlinKind::OptimalCheat,
                },
                rounds,
                &parse_seeds(&common.seeds)?,
                common.budget,
                transcript.as_deref(),
            )?;
            emit_report(&common, &report)
        }
        RunCommands::Conp {
            common,
            preset,
            witness,
            k,
            n_witness,
            eps,
            fw_threshold,
            witness_file,
        } => {
            let fixture = load_fixture(&common.fixture)?;
            let n = fixture.basis.n();
            let params = match preset {
                PresetArg::Paper => {
                    let k = k.unwrap_or_else(|| {
                        latlab::formulas::conp_k_for_gamma(n as u64, rat_to_f64(&fixture.gamma))
                    });
                    ConpParams::paper(n, k, common.budget)?
                }
                PresetArg::Desk => {
                    let mut p = ConpParams::desk_default(n);
                    if let Some(k) = k {
                        p = ConpParams::desk(k, p.n_witness, p.eps, p.fw_threshold)?;
                    }
                    if let Some(nw) = n_witness {
                        p.n_witness = nw;
                    }
                    if let Some(e) = eps {
                        p.eps = e;
                    }
                    if let Some(t) = fw_threshold {
                        p.fw_threshold = t;
                    }
                    p
                }
            };
            let report = match witness_file {
                Some(path) => {
                    let text = std::fs::read_to_string(resolve_path(&path))
                        .with_context(|| format!("reading {}", path.display()))?;
                    let file: latlab::json::WitnessFile = serde_json::from_str(&text)?;
                    runners::run_conp_fixed_witness(&fixture, &params, &file.to_witness()?)?
                }
                None => runners::run_conp(
                    &fixture,
                    &params,
                    witness_source(witness),
                    &parse_seeds(&common.seeds)?,
                )?,
            };
            emit_report(&common, &report)
        }
        RunCommands::Coma {
            common,
            preset,
            witness,
            alpha,
            beta,
            n_witness,
            trials,
        } => {
            let fixture = load_fixture(&common.fixture)?;
            let n = fixture.basis.n();
            let params = match preset {
                PresetArg::Paper => {
                    let a = float_to_ratio(alpha * alpha)?;
                    let b = float_to_ratio(beta * beta)?;
                    ComaParams::paper(n, a, b, common.budget)?
                }
                PresetArg::Desk => ComaParams::desk(n, alpha, beta, n_witness, trials)?,
            };
            let report = runners::run_coma(
                &fixture,
                &params,
                witness_source(witness),
                &parse_seeds(&common.seeds)?,
            )?;
            emit_report(&common, &report)
        }
        RunCommands::SvpToBdd {
            common,
            preset,
            alpha,
            trials,
            oracle_mode,
        } => {
            let fixture = load_fixture(&common.fixture)?;
            let alpha = parse_rat(&alpha)?;
            let trials = match preset {
                PresetArg::Paper => latlab::reductions::bdd_paper_trials(
                    fixture.basis.n(),
                    runners::ratio64_of(&alpha)?,
                    runners::ratio64_of(&fixture.gamma)?,
                    common.budget,
                )?,
                PresetArg::Desk => trials,
            };
            let mode = match oracle_mode {
                OracleModeArg::Closest => BddMode::ClosestAnyway,
                OracleModeArg::Garbage => BddMode::Garbage,
                OracleModeArg::Abstain => BddMode::Abstain,
            };
            let report = runners::run_svp_to_bdd(
                &fixture,
                &alpha,
                trials,
                mode,
                &parse_seeds(&common.seeds)?,
            )?;
            emit_report(&common, &report)
        }
        RunCommands::SvpToDgsNp {
            common,
            gamma_prime,
        } => {
            let fixture = load_fixture(&common.fixture)?;
            let params = ConpParams::desk_default(fixture.basis.n());
            let report = runners::run_svp_to_dgs(
                &fixture,
                &parse_rat(&gamma_prime)?,
                &DgsFlavor::Np { params },
                &parse_seeds(&common.seeds)?,
            )?;
            emit_report(&common, &report)
        }
        RunCommands::SvpToDgsMa {
            common,
            gamma_prime,
            n_witness,
            trials,
        } => {
            let fixture = load_fixture(&common.fixture)?;
            let report = runners::run_svp_to_dgs(
                &fixture,
                &parse_rat(&gamma_prime)?,
                &DgsFlavor::Ma { n_witness, trials },
                &parse_seeds(&common.seeds)?,
            )?;
            emit_report(&common, &report)
        }
        RunCommands::DgsToSis {
            lattice,
            zn,
            s_target,
            q,
            m,
            count,
            seed,
            out,
            report,
        } => {
            let basis = match (lattice, zn) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(resolve_path(&path))
                        .with_context(|| format!("reading {}", path.display()))?;
                    let file: latlab::json::LatticeFile = serde_json::from_str(&text)?;
                    file.to_basis()?
                }
                (None, Some(n)) => latlab::lattice::Basis::integer_lattice(n),
                _ => bail!("pass exactly one of --lattice or --zn"),
            };
            let (summary, lines) = runners::run_dgs_to_sis(&basis, s_target, q, m, count, seed)?;
            emit(out.as_deref(), &lines.join("\n"))?;
            let body = serde_json::to_string_pretty(&summary)?;
            match report {
                Some(p) => emit(Some(&p), &body),
                None => {
                    eprintln!("{body}");
                    Ok(())
                }
            }
        }
    }
}

/// Small-denominator rational image of a float parameter (paper presets
/// take exact rationals).
fn float_to_ratio(x: f64) -> Result<Ratio64> {
    if !(x.is_finite() && x > 0.0) {
        bail!("parameter must be positive and finite, got {x}");
    }
    Ok(Ratio64::new((x * 1e6).round() as i64, 1_000_000)?)
}

fn witness_source(w: WitnessArg) -> WitnessSource {
    match w {
        WitnessArg::Honest => WitnessSource::Honest,
        WitnessArg::Adversarial => WitnessSource::Adversarial,
    }
}

fn emit_report(common: &CommonRun, report: &report::ExperimentReport) -> Result<()> {
    let body = serde_json::to_string_pretty(report)?;
    emit(common.out.as_deref(), &body)
}

fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
        }
        None => println!("{}", body.trim_end_matches('\n')),
    }
    Ok(())
}

/// Fixture paths fall back to $LATLAB_FIXTURE_DIR when not found directly.
fn resolve_path(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var(FIXTURE_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn load_fixture(path: &Path) -> Result<Fixture> {
    let resolved = resolve_path(path);
    let text = std::fs::read_to_string(&resolved)
        .with_context(|| format!("reading fixture {}", resolved.display()))?;
    let file: fixtures::FixtureFile = serde_json::from_str(&text)?;
    // Promise stamps are re-verified on load; tampering exits with code 3.
    Ok(file.load_verified(EnumerationCaps::default())?)
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let lo: u64 = a.trim().parse().context("seed range start")?;
        let hi: u64 = b.trim().parse().context("seed range end")?;
        if hi < lo {
            bail!("empty seed range {s:?}");
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(Into::into))
        .collect()
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(Into::into))
        .collect()
}

fn parse_ratio_list(s: &str) -> Result<Vec<Ratio64>> {
    s.split(',')
        .map(|t| {
            let r: Rat = parse_rat(t.trim())?;
            runners::ratio64_of(&r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_parsing() {
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1,2,9").unwrap(), vec![1, 2, 9]);
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert!(parse_seeds("5..2").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
