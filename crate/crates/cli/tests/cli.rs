//! End-to-end tests of the `leontief` binary: exit codes, stream layout
//! (JSON/CSV on stdout, commentary on stderr), seed precedence, and the
//! promise that input files are never modified.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GAME: &str = r#"{"A": [[2, 1], [1, 2]], "B": [[2, 1], [1, 2]], "range": [1, 2]}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_leontief"));
    // Tests control seeding explicitly; a seed inherited from the calling
    // shell would make them flaky.
    cmd.env_remove("LEONTIEF_SEED");
    cmd
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process killed by signal")
}

/// Reduces GAME into `dir` and returns the path of the reduced-economy file.
fn reduced_fixture(dir: &TempDir) -> PathBuf {
    let game = write(dir, "game.json", GAME);
    let out = run(&["reduce", "--game", game.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("reduced.json");
    fs::write(&path, &out.stdout).unwrap();
    path
}

#[test]
fn reduce_emits_the_block_embedding_on_stdout() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "game.json", GAME);
    let out = run(&["reduce", "--game", game.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);

    let doc = stdout_json(&out);
    assert_eq!(doc["m"], 4);
    assert_eq!(doc["n"], 4);
    assert_eq!(doc["game_size"], 2);
    assert_eq!(doc["sigma"], 0.0);
    // Identity endowments, and the game blocks off the demand diagonal.
    for i in 0..4 {
        for j in 0..4 {
            let e = doc["endowments"][i][j].as_f64().unwrap();
            assert_eq!(e, if i == j { 1.0 } else { 0.0 });
        }
    }
    assert_eq!(doc["demands"][0][2], 2.0);
    assert_eq!(doc["demands"][0][0], 0.0);
    // Commentary goes to stderr, not stdout.
    assert!(!out.stderr.is_empty());
}

#[test]
fn solve_market_round_trips_into_verify() {
    let dir = TempDir::new().unwrap();
    let reduced = reduced_fixture(&dir);
    let out = run(&[
        "solve-market",
        "--econ",
        reduced.to_str().unwrap(),
        "--resolution",
        "4",
        "--eps",
        "1e-6",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["status"], "found");
    assert!(doc["achieved_eps"].as_f64().unwrap() <= 1e-6);

    let eq = write(&dir, "eq.json", &doc["equilibrium"].to_string());
    let verify = run(&[
        "verify-market",
        "--econ",
        reduced.to_str().unwrap(),
        "--eq",
        eq.to_str().unwrap(),
        "--eps",
        "1e-9",
    ]);
    assert_eq!(exit_code(&verify), 0);
    assert!(String::from_utf8_lossy(&verify.stderr).contains("PASS"));
    assert_eq!(stdout_json(&verify)["passed"], true);
}

#[test]
fn solve_market_exhausting_its_budget_exits_one() {
    let dir = TempDir::new().unwrap();
    let reduced = reduced_fixture(&dir);
    let out = run(&[
        "solve-market",
        "--econ",
        reduced.to_str().unwrap(),
        "--resolution",
        "4",
        "--eps",
        "1e-6",
        "--max-points",
        "2",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_json(&out)["status"], "budget_exhausted");
}

#[test]
fn verify_market_failure_exits_one_and_names_the_condition() {
    let dir = TempDir::new().unwrap();
    let reduced = reduced_fixture(&dir);
    // Equal prices on all four goods are far from an equilibrium of the
    // coordination embedding at this utility vector.
    let eq = write(
        &dir,
        "eq.json",
        r#"{"u": [1.0, 1.0, 1.0, 1.0], "w": [0.25, 0.25, 0.25, 0.25]}"#,
    );
    let out = run(&[
        "verify-market",
        "--econ",
        reduced.to_str().unwrap(),
        "--eq",
        eq.to_str().unwrap(),
        "--eps",
        "0.01",
    ]);
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("FAIL"), "stderr: {stderr}");
    assert_eq!(stdout_json(&out)["passed"], false);
}

#[test]
fn rational_verification_is_exact_at_eps_zero() {
    let dir = TempDir::new().unwrap();
    // One good, one trader demanding a third of a unit per utility point:
    // u = 3 exactly, and 22/7 is as good a price as any because the checks
    // are scale-free. Float arithmetic could not verify this at eps 0.
    let econ = write(
        &dir,
        "econ.json",
        r#"{"m": 1, "n": 1, "endowments": [["1"]], "demands": [["1/3"]]}"#,
    );
    let eq = write(&dir, "eq.json", r#"{"u": ["3"], "w": ["22/7"]}"#);
    let out = run(&[
        "verify-market",
        "--econ",
        econ.to_str().unwrap(),
        "--eq",
        eq.to_str().unwrap(),
        "--eps",
        "0",
        "--rational",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["passed"], true);
    // Decisions are exact; the reported slack magnitude is rounded to a
    // float for display and is exactly zero here.
    for condition in doc["conditions"].as_array().unwrap() {
        assert_eq!(condition["worst_slack"], 0.0);
    }
}

#[test]
fn verify_nash_handles_absolute_and_relative_notions() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "game.json", GAME);
    let good = write(&dir, "good.json", r#"{"x": [1, 0], "y": [1, 0]}"#);
    let bad = write(&dir, "bad.json", r#"{"x": [1, 0], "y": [0, 1]}"#);

    let pass = run(&[
        "verify-nash",
        "--game",
        game.to_str().unwrap(),
        "--profile",
        good.to_str().unwrap(),
        "--eps",
        "1e-9",
    ]);
    assert_eq!(exit_code(&pass), 0);

    let fail = run(&[
        "verify-nash",
        "--game",
        game.to_str().unwrap(),
        "--profile",
        bad.to_str().unwrap(),
        "--eps",
        "1e-9",
    ]);
    assert_eq!(exit_code(&fail), 1);

    // Relatively, the bad profile earns 1 against a best response of 2 for
    // both players: it passes at eps 1/2 and fails below it.
    let rel_pass = run(&[
        "verify-nash",
        "--game",
        game.to_str().unwrap(),
        "--profile",
        bad.to_str().unwrap(),
        "--eps",
        "1/2",
        "--relative",
        "--rational",
    ]);
    assert_eq!(exit_code(&rel_pass), 0);

    let rel_fail = run(&[
        "verify-nash",
        "--game",
        game.to_str().unwrap(),
        "--profile",
        bad.to_str().unwrap(),
        "--eps",
        "49/100",
        "--relative",
        "--rational",
    ]);
    assert_eq!(exit_code(&rel_fail), 1);
}

#[test]
fn solve_game_supports_both_methods() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "game.json", GAME);
    let enumeration = run(&["solve-game", "--game", game.to_str().unwrap()]);
    assert_eq!(exit_code(&enumeration), 0);
    let profile = stdout_json(&enumeration);
    assert_eq!(profile["x"][0], 1.0);

    let lh = run(&[
        "solve-game",
        "--game",
        game.to_str().unwrap(),
        "--method",
        "lemke-howson",
        "--label",
        "1",
    ]);
    assert_eq!(exit_code(&lh), 0);
    let lh_profile = stdout_json(&lh);
    assert!(lh_profile["x"].is_array() && lh_profile["y"].is_array());
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "game.json", GAME);

    // Unknown flag: rejected by the argument parser.
    let unknown = run(&["reduce", "--game", game.to_str().unwrap(), "--bogus"]);
    assert_eq!(exit_code(&unknown), 2);

    // Missing input file.
    let missing = run(&["reduce", "--game", "/nonexistent/g.json"]);
    assert_eq!(exit_code(&missing), 2);

    // Malformed numeric flag.
    let bad_eps = run(&[
        "solve-market",
        "--econ",
        game.to_str().unwrap(),
        "--resolution",
        "4",
        "--eps",
        "not-a-number",
    ]);
    assert_eq!(exit_code(&bad_eps), 2);

    // Malformed JSON payload.
    let garbage = write(&dir, "garbage.json", "{not json");
    let parse = run(&["reduce", "--game", garbage.to_str().unwrap()]);
    assert_eq!(exit_code(&parse), 2);

    // --strict needs the allocation it is supposed to check.
    let eq = write(&dir, "eq.json", r#"{"u": [1], "w": [1]}"#);
    let strict = run(&[
        "verify-market",
        "--econ",
        game.to_str().unwrap(),
        "--eq",
        eq.to_str().unwrap(),
        "--eps",
        "0.1",
        "--strict",
    ]);
    assert_eq!(exit_code(&strict), 2);
}

#[test]
fn seed_flag_overrides_the_environment() {
    let dir = TempDir::new().unwrap();
    let reduced = reduced_fixture(&dir);
    let path = reduced.to_str().unwrap();
    let args = ["perturb", "--reduced", path, "--sigma", "0.01"];

    let flagged = bin().args(args).args(["--seed", "42"]).output().unwrap();
    let env_only = bin()
        .args(args)
        .env("LEONTIEF_SEED", "42")
        .output()
        .unwrap();
    let both = bin()
        .args(args)
        .args(["--seed", "42"])
        .env("LEONTIEF_SEED", "7")
        .output()
        .unwrap();
    let other = bin().args(args).args(["--seed", "7"]).output().unwrap();

    assert_eq!(exit_code(&flagged), 0);
    assert_eq!(flagged.stdout, env_only.stdout, "env seed must match --seed");
    assert_eq!(flagged.stdout, both.stdout, "--seed must beat the env");
    assert_ne!(flagged.stdout, other.stdout, "different seeds must differ");

    // An unparseable environment seed is a usage error, not a silent default.
    let bad_env = bin()
        .args(args)
        .env("LEONTIEF_SEED", "not-a-seed")
        .output()
        .unwrap();
    assert_eq!(exit_code(&bad_env), 2);
}

#[test]
fn pipeline_reports_partial_progress_when_the_solver_gives_up() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "game.json", GAME);
    // A two-point-per-axis grid cannot hit eps 1e-12 on a perturbed economy.
    let out = run(&[
        "pipeline",
        "--game",
        game.to_str().unwrap(),
        "--eps-prime",
        "0.1",
        "--seed",
        "1",
        "--resolution",
        "2",
        "--eps",
        "1e-12",
    ]);
    assert_eq!(exit_code(&out), 1);
    let doc = stdout_json(&out);
    assert!(doc["profile"].is_null());
    assert!(doc["record"]["points_scanned"].as_u64().unwrap() > 0);
    assert!(doc["record"]["market_eps"].is_null());
}

#[test]
fn experiment_writes_csv_rows_for_every_trial() {
    let dir = TempDir::new().unwrap();
    let config = write(
        &dir,
        "config.json",
        r#"{
            "game": {"A": [[2, 1], [1, 2]], "B": [[2, 1], [1, 2]], "range": [1, 2]},
            "sigmas": [0.01, 0.05],
            "trials": 3,
            "eps_prime": 0.1,
            "solver": {"grid": {"resolution": 16, "eps_target": 0.2, "max_points": 100000}},
            "master_seed": 11
        }"#,
    );
    let out = run(&["experiment", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3, "header plus one row per trial");
    assert!(lines[0].starts_with("sigma,seed,time_ms,points_scanned"));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("σ = 0.01"), "aggregates belong on stderr");
}

#[test]
fn commands_never_modify_their_input_files() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "game.json", GAME);
    let reduced = reduced_fixture(&dir);
    let before_game = fs::read(&game).unwrap();
    let before_reduced = fs::read(&reduced).unwrap();

    let gpath = game.to_str().unwrap();
    let rpath = reduced.to_str().unwrap();
    run(&["reduce", "--game", gpath]);
    run(&["solve-game", "--game", gpath]);
    run(&["solve-market", "--econ", rpath, "--resolution", "4", "--eps", "0.1"]);
    run(&["perturb", "--reduced", rpath, "--sigma", "0.01", "--seed", "3"]);
    run(&["pipeline", "--game", gpath, "--eps-prime", "0.1", "--seed", "3"]);

    assert_eq!(fs::read(&game).unwrap(), before_game);
    assert_eq!(fs::read(&reduced).unwrap(), before_reduced);
    assert_unchanged_dir(dir.path(), &["game.json", "reduced.json"]);
}

/// No command may leave stray files next to its inputs.
fn assert_unchanged_dir(dir: &Path, expected: &[&str]) {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut want: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
    want.sort();
    assert_eq!(names, want);
}
