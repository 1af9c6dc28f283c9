//! End-to-end tests of the binary: report determinism, exit codes, fixture
//! round trips, and the external file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latlab"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn latlab");
    assert!(
        out.status.success(),
        "latlab {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gen_fixture(dir: &Path, kind: &str, n: usize, gamma: &str, seed: u64) -> PathBuf {
    let path = dir.join(format!("{kind}-{n}-{seed}.json"));
    run_ok(&[
        "fixture-gen",
        "--kind",
        kind,
        "--n",
        &n.to_string(),
        "--gamma",
        gamma,
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    path
}

#[test]
fn reports_are_deterministic_modulo_meta() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = gen_fixture(dir.path(), "far-promise", 2, "2", 5);
    let run = |out: &Path| {
        run_ok(&[
            "run",
            "gg",
            "--fixture",
            fixture.to_str().unwrap(),
            "--seeds",
            "0..3",
            "--rounds",
            "40",
            "--out",
            out.to_str().unwrap(),
        ]);
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("meta");
        v
    };
    let a = run(&dir.path().join("r1.json"));
    let b = run(&dir.path().join("r2.json"));
    assert_eq!(a, b, "identical invocations must produce identical bodies");
    // Far fixture + honest Merlin: acceptance rate exactly 1.0, and the rate
    // carries its sample count.
    assert_eq!(a["aggregate"]["acceptance"]["rate"], 1.0);
    assert_eq!(a["aggregate"]["acceptance"]["trials"], 4);
}

#[test]
fn budget_refusal_exits_2_and_prints_cost() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = gen_fixture(dir.path(), "far-promise", 3, "2", 1);
    let out = bin()
        .args([
            "run",
            "conp",
            "--fixture",
            fixture.to_str().unwrap(),
            "--preset",
            "paper",
            "--budget",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "budget refusal must exit 2");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("required log2 cost"),
        "refusal must print the required cost, got: {err}"
    );
}

#[test]
fn tampered_fixture_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = gen_fixture(dir.path(), "far-promise", 2, "2", 9);
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&fixture).unwrap()).unwrap();
    v["promise"]["dist_sq"] = serde_json::json!("12345");
    std::fs::write(&fixture, serde_json::to_string(&v).unwrap()).unwrap();
    let out = bin()
        .args([
            "run",
            "gg",
            "--fixture",
            fixture.to_str().unwrap(),
            "--rounds",
            "5",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "promise violation must exit 3");
}

#[test]
fn fixture_dir_env_var_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(dir.path(), "far-promise", 2, "2", 4);
    let out = bin()
        .args([
            "run",
            "gg",
            "--fixture",
            "far-promise-2-4.json",
            "--rounds",
            "10",
        ])
        .env("LATLAB_FIXTURE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn tradeoff_table_formats() {
    let csv = run_ok(&["tradeoff-table", "--n", "2,4", "--gamma", "2,8"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,gamma,"));
    assert_eq!(lines.count(), 4);

    let json = run_ok(&[
        "tradeoff-table",
        "--n",
        "2",
        "--gamma",
        "8",
        "--format",
        "json",
    ]);
    let cells: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(cells.as_array().unwrap().len(), 1);
    // log2 of coMA witness 2^{10 * (2/8) * 2} = 5 exactly.
    assert_eq!(cells[0]["log2_coma_witness"], 5.0);
}

#[test]
fn gg_transcript_is_replayable_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = gen_fixture(dir.path(), "far-promise", 2, "2", 2);
    let transcript = dir.path().join("rounds.jsonl");
    run_ok(&[
        "run",
        "gg",
        "--fixture",
        fixture.to_str().unwrap(),
        "--seeds",
        "7",
        "--rounds",
        "12",
        "--transcript",
        transcript.to_str().unwrap(),
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    let body = std::fs::read_to_string(&transcript).unwrap();
    let rounds: Vec<serde_json::Value> = body
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rounds.len(), 12);
    for (i, r) in rounds.iter().enumerate() {
        assert_eq!(r["round"], i as u64);
        assert_eq!(r["reply"], r["secret_bit"], "honest replies on FAR");
        assert!(r["sent"].as_array().unwrap().len() == 2);
    }
}

#[test]
fn dgs_to_sis_stream_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("stream.jsonl");
    let report = dir.path().join("summary.json");
    run_ok(&[
        "run",
        "dgs-to-sis",
        "--zn",
        "1",
        "--s-target",
        "9",
        "--q",
        "3",
        "--m",
        "8",
        "--count",
        "30",
        "--out",
        stream.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    let body = std::fs::read_to_string(&stream).unwrap();
    assert_eq!(body.lines().count(), 30);
    for line in body.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        v["coords"][0].as_str().unwrap().parse::<i64>().unwrap();
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(summary["config"]["calibration"]["r_sq"].as_u64().unwrap() >= 1);
    assert_eq!(summary["aggregate"]["fallback_zero_rate"]["trials"], 30);
}

#[test]
fn svp_to_bdd_and_dgs_wrappers_run() {
    let dir = tempfile::tempdir().unwrap();
    let far = gen_fixture(dir.path(), "far-promise", 2, "8", 6);
    let out = run_ok(&[
        "run",
        "svp-to-bdd",
        "--fixture",
        far.to_str().unwrap(),
        "--trials",
        "20",
        "--seeds",
        "0..2",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["aggregate"]["yes_rate"]["rate"], 0.0, "NO instance");

    let out = run_ok(&[
        "run",
        "svp-to-dgs-np",
        "--fixture",
        far.to_str().unwrap(),
        "--seeds",
        "0",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["per_seed"][0]["decision"], "No");
}

#[test]
fn witness_file_round_trip_through_verifier() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = gen_fixture(dir.path(), "far-promise", 2, "8", 12);
    let witness = dir.path().join("w.json");
    run_ok(&[
        "witness-gen",
        "--fixture",
        fixture.to_str().unwrap(),
        "--n-witness",
        "15000",
        "--seed",
        "3",
        "--out",
        witness.to_str().unwrap(),
    ]);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    assert_eq!(parsed["N"], 15000);
    assert_eq!(parsed["n"], 2);
    let out = run_ok(&[
        "run",
        "conp",
        "--fixture",
        fixture.to_str().unwrap(),
        "--witness-file",
        witness.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["per_seed"][0]["outcome"], "Far");
}

#[test]
fn sis_solve_reads_instance_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sis.json");
    std::fs::write(
        &path,
        r#"{"n":2,"m":8,"q":3,"A":[[1,2],[1,2],[0,1],[2,0],[1,1],[2,2],[0,2],[1,0]]}"#,
    )
    .unwrap();
    let out = run_ok(&["sis-solve", "--instance", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let z: Vec<i64> = v["z"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_i64().unwrap())
        .collect();
    assert!(z.iter().any(|&c| c != 0));
    // Verify the kernel property.
    let a = [[1i64, 2], [1, 2], [0, 1], [2, 0], [1, 1], [2, 2], [0, 2], [1, 0]];
    for j in 0..2 {
        let dot: i64 = (0..8).map(|i| z[i] * a[i][j]).sum();
        assert_eq!(dot.rem_euclid(3), 0);
    }
}

#[test]
fn adversarial_suite_on_close_fixture_never_far() {
    let dir = tempfile::tempdir().unwrap();
    let close = gen_fixture(dir.path(), "close-promise", 2, "8", 8);
    let out = run_ok(&[
        "run",
        "conp",
        "--fixture",
        close.to_str().unwrap(),
        "--witness",
        "adversarial",
        "--seeds",
        "0..2",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["aggregate"]["far_rate"]["rate"], 0.0);
    // 7 suite members per seed, 3 seeds.
    assert_eq!(report["aggregate"]["far_rate"]["trials"], 21);
}
