//! End-to-end checks of the command-line interface: subcommands, file
//! formats, reproducibility, and exit codes.

use std::path::Path;
use std::process::Command;

fn facloc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_facloc"))
}

fn run_ok(args: &[&str]) -> String {
    let out = facloc().args(args).output().expect("spawn facloc");
    assert!(
        out.status.success(),
        "facloc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        run_ok(&[
            "gen",
            "--generator",
            "random-graph",
            "--variant",
            "robust",
            "--n",
            "8",
            "--m",
            "12",
            "--w-max",
            "10",
            "--seed",
            "1",
            "--out",
            p.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap()
    );
}

fn gen_instance(dir: &Path, variant: &str, seed: &str) -> String {
    let path = dir.join(format!("{variant}-{seed}.json"));
    run_ok(&[
        "gen",
        "--generator",
        "random-metric",
        "--variant",
        variant,
        "--nf",
        "4",
        "--nc",
        "6",
        "--seed",
        seed,
        "--out",
        path.to_str().unwrap(),
    ]);
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_certify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "robust", "5");
    let cert = dir.path().join("cert.json");
    let json = run_ok(&[
        "solve",
        &inst,
        "--with-oracle",
        "--eps",
        "0.01",
        "--emit-cert",
        cert.to_str().unwrap(),
    ]);
    let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
    let row = &rows[0];
    assert_eq!(row["feasible"], true);
    assert_eq!(row["bound_ok"], true);
    let ratio = row["ratio"].as_f64().unwrap();
    assert!((1.0 - 1e-9..=5.02 + 1e-9).contains(&ratio));

    let report = run_ok(&["certify", &inst, "--cert", cert.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["feasible"], true);

    // tampering flips feasibility but certify still exits 0
    let mut cert_val: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    cert_val["v"][0] = serde_json::json!(1e12);
    std::fs::write(&cert, serde_json::to_string(&cert_val).unwrap()).unwrap();
    let report = run_ok(&["certify", &inst, "--cert", cert.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["feasible"], false);
}

#[test]
fn simulate_emits_transcript_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "penalty", "9");
    let transcript = dir.path().join("tr.json");
    let csv = run_ok(&[
        "--format",
        "csv",
        "simulate",
        &inst,
        "--k",
        "3",
        "--eps",
        "0.25",
        "--seed",
        "11",
        "--with-oracle",
        "--transcript-out",
        transcript.to_str().unwrap(),
    ]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,seed,variant,eps,k,alg_cost,opt_cost,ratio,dual_obj,feasible,bound_ok,charged_rounds"
    );
    let row = lines.next().unwrap();
    assert!(row.contains(",penalty,"));
    let tr: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&transcript).unwrap()).unwrap();
    assert!(tr["charged_rounds"].as_u64().unwrap() > 0);
    assert_eq!(tr["k"], 3);
    assert_eq!(tr["B"], 16);
    assert!(tr["per_primitive"].as_array().unwrap().len() > 1);
}

#[test]
fn simulate_rows_are_rederivable() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "robust", "13");
    let args = [
        "simulate", &inst, "--k", "2", "--eps", "0.25", "--seed", "21", "--with-oracle",
    ];
    assert_eq!(run_ok(&args), run_ok(&args));
}

#[test]
fn bench_produces_expected_row_count() {
    let json = run_ok(&[
        "bench",
        "--generator",
        "random-metric",
        "--variant",
        "penalty",
        "--nf",
        "3",
        "--nc",
        "4",
        "--trials",
        "3",
        "--k-list",
        "1,2",
        "--eps",
        "0.25",
        "--seed",
        "2",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3 * 3); // sequential + two k values, three trials
    for row in rows {
        assert_eq!(row["feasible"], true);
        let ratio = row["ratio"].as_f64().unwrap();
        assert!(ratio >= 1.0 - 1e-9);
    }
}

#[test]
fn distance_dump_is_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "plain", "21");
    let dump = run_ok(&["distances", &inst, "--source", "0"]);
    let mut lines = dump.lines();
    assert_eq!(lines.next().unwrap(), "source,target,distance");
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,0,0"));
    assert_eq!(dump.lines().count(), 1 + 10); // header + nf+nc targets
}

#[test]
fn exit_codes_match_contract() {
    let status = facloc().args(["solve", "/no/such/file.json"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));

    let status = facloc().args(["definitely-not-a-command"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.json");
    std::fs::write(
        &path,
        r#"{"variant":"robust","facilities":1,"clients":2,"opening_costs":[1.0],
            "coverage":2,"metric":{"mode":"implicit","edges":[[0,1,1.0]]}}"#,
    )
    .unwrap();
    let status = facloc().args(["solve", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn bellman_ford_backend_validates_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_instance(dir.path(), "penalty", "17");
    let transcript = dir.path().join("tr.json");
    run_ok(&[
        "simulate",
        &inst,
        "--k",
        "3",
        "--eps",
        "0.25",
        "--seed",
        "4",
        "--mssp-backend",
        "bellman-ford",
        "--transcript-out",
        transcript.to_str().unwrap(),
    ]);
    let tr: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&transcript).unwrap()).unwrap();
    assert!(tr["executed_rounds"].as_u64().unwrap() > 0);
}
