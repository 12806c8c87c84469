use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn gridcheck(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gridcheck"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(bytes) = stdin {
            pipe.write_all(bytes).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn exponent_anchor() {
    let out = gridcheck(
        &[
            "graph", "exponent", "--gamma", "7/15", "--lambda", "15/16", "--d", "4",
        ],
        None,
    );
    assert!(out.status.success());
    assert!(json(&out)["coefficient"].as_f64().unwrap() <= -0.25);
}

#[test]
fn gen_pipes_into_verify_deterministically() {
    let gen = gridcheck(
        &["graph", "gen", "--n", "16", "--d", "4", "--seed", "1"],
        None,
    );
    assert!(gen.status.success());
    let again = gridcheck(
        &["graph", "gen", "--n", "16", "--d", "4", "--seed", "1"],
        None,
    );
    assert_eq!(gen.stdout, again.stdout);
    let verify = |bytes: &[u8]| {
        gridcheck(
            &["graph", "verify", "--alpha", "15/16", "--beta", "7/16"],
            Some(bytes),
        )
    };
    let a = verify(&gen.stdout);
    let b = verify(&gen.stdout);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(json(&a)["resilient"].as_bool().unwrap(), a.status.success());
}

#[test]
fn edgeless_graph_is_not_resilient() {
    let out = gridcheck(
        &["graph", "verify", "--alpha", "1", "--beta", "0.25"],
        Some(b"8 0\n"),
    );
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["resilient"], false);
    assert_eq!(v["witness"].as_array().unwrap().len(), 8);
}

#[test]
fn malformed_edge_list_is_an_error() {
    let out = gridcheck(
        &["graph", "verify", "--alpha", "1", "--beta", "1/2"],
        Some(b"3 1\n0 0\n"),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("self-loop") || !out.stderr.is_empty());
}

#[test]
fn gen_writes_edge_list_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let out = gridcheck(
        &[
            "graph",
            "gen",
            "--n",
            "12",
            "--d",
            "3",
            "--seed",
            "5",
            "--alpha",
            "3/4",
            "--beta",
            "1/2",
            "--out",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("12 "));
    let verify = gridcheck(
        &[
            "graph",
            "verify",
            "--alpha",
            "3/4",
            "--beta",
            "1/2",
            "--input",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert!(verify.status.success());
}

#[test]
fn diagnose_examples() {
    let out = gridcheck(
        &[
            "diagnose",
            "3round",
            "--n",
            "20",
            "--cheaters",
            "1",
            "--seed",
            "3",
        ],
        None,
    );
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["exact_match"], true);
    assert_eq!(v["false_accusations"], 0);
    assert_eq!(v["rounds_used"], 3);

    let out = gridcheck(
        &[
            "diagnose",
            "5round",
            "--n",
            "40",
            "--cheaters",
            "4",
            "--seed",
            "3",
        ],
        None,
    );
    assert!(out.status.success());
    assert_eq!(json(&out)["exact_match"], true);

    let out = gridcheck(
        &["diagnose", "3round", "--n", "20", "--cheaters", "3"],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceed"));

    let out = gridcheck(
        &[
            "diagnose",
            "3round",
            "--n",
            "20",
            "--cheaters",
            "3",
            "--allow-out-of-contract",
        ],
        None,
    );
    assert!(out.status.success());
    assert_eq!(json(&out)["out_of_contract"], true);
}

#[test]
fn diagnose_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    std::fs::write(
        &path,
        "seed = 11\n[scenario]\nparticipants = 80\nstrategy = \"martyr\"\n[[scenario.coalition]]\ncheaters = 3\n[[scenario.coalition]]\ncheaters = 5\n",
    )
    .unwrap();
    let out = gridcheck(
        &[
            "diagnose",
            "5round",
            "--config",
            path.to_str().unwrap(),
            "--no-timestamp",
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["cheaters"], 8);
    assert_eq!(v["coalitions"], 2);
    assert_eq!(v["strategy"], "martyr");
    assert!(v.get("generated_at_unix").is_none());

    std::fs::write(&path, "seed = 1\nbogus = 2\n").unwrap();
    let out = gridcheck(
        &["diagnose", "3round", "--config", path.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn econ_examples() {
    let v = json(&gridcheck(
        &["econ", "threshold", "--B", "1", "--U", "2", "--C", "2"],
        None,
    ));
    assert_eq!(v["threshold"], 0.25);
    let v = json(&gridcheck(
        &["econ", "threshold", "--B", "2", "--U", "1", "--C", "0"],
        None,
    ));
    assert_eq!(v["threshold"], 0.0);
    let v = json(&gridcheck(
        &["econ", "sybil", "--t", "20", "--P", "0.5", "--G", "0.95"],
        None,
    ));
    assert!((v["replication_prob"].as_f64().unwrap() - 0.526).abs() < 1e-3);
    let v = json(&gridcheck(
        &[
            "econ", "deter", "--B", "1", "--U", "2", "--C", "1", "--P", "0.5",
        ],
        None,
    ));
    assert_eq!(v["cooperation_preferred"], true);
    let v = json(&gridcheck(
        &[
            "econ",
            "balance",
            "--B",
            "1",
            "--C",
            "1",
            "--L",
            "100",
            "--S",
            "1",
            "--G",
            "1",
            "--P",
            "0.5",
            "--utility",
            "1:0.1,2:0.1,3:0.1,4:0.1,5:0.1,6:0.1,7:0.1,8:0.1,9:0.1,10:0.1",
        ],
        None,
    ));
    assert!((v["residual"].as_f64().unwrap() - 78.5).abs() < 1e-9);
    assert!((v["solution"].as_f64().unwrap() - 9.0 / 11.0).abs() < 1e-6);
    let out = gridcheck(&["econ", "sybil", "--P", "0.99", "--G", "0.95"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_reports_and_csv() {
    let out = gridcheck(
        &[
            "simulate",
            "delayed",
            "--coalition-fraction",
            "0.01",
            "--n-tasks",
            "100000",
            "--seeds",
            "0..2",
            "--no-timestamp",
        ],
        None,
    );
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    let rate = v["aggregate"]["catch_rate"]["estimate"].as_f64().unwrap();
    assert!((rate - 0.99).abs() < 0.02);

    let out = gridcheck(
        &[
            "simulate",
            "same_round",
            "--coalition-fraction",
            "0",
            "--n-tasks",
            "1000",
            "--csv",
        ],
        None,
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("mode,seed,tasks_total,tasks_forged"));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("same_round,0,1000,0,0,0,"));

    let out = gridcheck(
        &[
            "simulate",
            "sybil",
            "--population",
            "500",
            "--n-tasks",
            "20000",
            "--trace-identities",
            "3",
            "--no-timestamp",
        ],
        None,
    );
    let v = json(&out);
    let rec = &v["records"][0];
    assert!(rec["caught_within_10"].as_f64().unwrap() > 0.99);
    assert_eq!(rec["traces"].as_array().unwrap().len(), 3);

    let out = gridcheck(&["simulate", "delayed", "--replication-prob", "1.5"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    let args = [
        "simulate",
        "sybil",
        "--population",
        "300",
        "--n-tasks",
        "5000",
        "--seeds",
        "4..6",
        "--no-timestamp",
    ];
    assert_eq!(gridcheck(&args, None).stdout, gridcheck(&args, None).stdout);
    let stamped = json(&gridcheck(
        &["diagnose", "3round", "--n", "20", "--cheaters", "1"],
        None,
    ));
    assert!(stamped["generated_at_unix"].as_u64().is_some());
}
