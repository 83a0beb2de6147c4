use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdot-cluster"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn tables() {
    let out = run(&["table", "table1"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("Total +1 0 +1 +2 +1 0 +1\n"));
    let out = run(&["table", "table2", "--m", "8"]);
    assert!(stdout(&out).contains("Total 4 0 0 0 0 0 4 8 4 0\n"));
    let out = run(&["table", "table2", "--m", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("4..=8"));
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn ratio_csv() {
    for (spec, want) in [
        ("gen:one-step", "0.203"),
        ("gen:three-step", "0.0900"),
        ("gen:m-step:8", "0.00986"),
    ] {
        let out = run(&["ratio", "--schedule", spec]);
        assert!(out.status.success());
        let text = stdout(&out);
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(lines.next(), Some("schedule,b_over_a,ratio"));
        assert_eq!(lines.next().unwrap(), format!("{spec},10,{want}"));
    }
}

#[test]
fn simulate_csv() {
    let out = run(&["simulate", "--schedule", "gen:one-step", "--n", "2"]);
    assert_eq!(stdout(&out), "N,schedule,fidelity\n2,gen:one-step,1\n");
    let out = run(&["simulate", "--schedule", "gen:one-step", "--n", "30"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schedule_gen_and_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three.txt");
    let path_str = path.to_str().unwrap();
    let out = run(&[
        "schedule-gen",
        "--schedule",
        "gen:three-step",
        "--n",
        "8",
        "--out",
        path_str,
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "chain 8\n1/2 UUDDUUDD\n1/2 UDDUUDDU\n1/1 UUUUUUUU\n");
    let file_spec = format!("file:{path_str}");
    let out = run(&["schedule-gen", "--schedule", &file_spec]);
    assert_eq!(stdout(&out), text);
    let out = run(&["schedule-gen", "--schedule", &file_spec, "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["total_time"], "2/1");
    assert_eq!(doc["lattice"]["kind"], "chain");
}

#[test]
fn verify_against_target() {
    let ok = run(&[
        "schedule-verify",
        "--schedule",
        "gen:three-step",
        "--target",
        r#"{"cancel":[2],"family":{"kind":"window","period":4}}"#,
    ]);
    assert!(ok.status.success());
    let bad = run(&[
        "schedule-verify",
        "--schedule",
        "gen:three-step",
        "--target",
        r#"{"cancel":[2,3],"family":{"kind":"window","period":4}}"#,
    ]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn synth_exit_codes() {
    let out = run(&[
        "synth",
        "--target",
        r#"{"cancel":[2,3,4],"family":{"kind":"window","period":6}}"#,
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("chain 24\n1/4 "));
    assert!(text.contains("k,coefficient\n1,1/1\n2,0/1\n"));
    let out = run(&[
        "synth",
        "--target",
        r#"{"cancel":[2,3,4,5,6,7],"family":{"kind":"window","period":9}}"#,
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "synth",
        "--target",
        r#"{"cancel":[1],"family":{"kind":"window","period":6}}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jitter_is_deterministic() {
    let args = [
        "jitter",
        "--schedule",
        "gen:three-step",
        "--n",
        "6",
        "--jitter",
        "0.05",
        "--samples",
        "4",
        "--seed",
        "11",
    ];
    let a = stdout(&run(&args));
    assert_eq!(a, stdout(&run(&args)));
    assert_eq!(a.lines().count(), 5);
    assert!(a
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("11,gen:three-step,0.05,"));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["ratio"]).status.code(), Some(2));
    assert_eq!(
        run(&["ratio", "--schedule", "gen:nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["ratio", "--schedule", "gen:m-step:9"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["couplings", "--b", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        run(&["ratio", "--schedule", "gen:three-step", "--kmax", "5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn grid_simulation() {
    let out = run(&[
        "simulate",
        "--schedule",
        "gen:2d-three-step",
        "--rows",
        "3",
        "--cols",
        "3",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("3x3,gen:2d-three-step,"));
}
