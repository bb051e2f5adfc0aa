use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn k3kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3kit"))
        .args(args)
        .env_remove("K3KIT_TOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn help_and_unknown_commands() {
    let o = k3kit(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("etadet"));
    let o = k3kit(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frobnicate"));
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_json_names_the_flag() {
    let o = k3kit(&["count", "--lattice", "U+E8(-1)", "--l", "[1,1,"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--l"));
}

#[test]
fn domain_errors_carry_codes() {
    let cases: [(&[&str], &str); 5] = [
        (&["lattice", "--lattice", "E7"], "MalformedDescriptor"),
        (&["etadet", "--im", "-1"], "LowerHalfPlane"),
        (
            &["etadet", "--im", "1", "--format", "csv"],
            "UnsupportedFormat",
        ),
        (&["qseries", "--order", "-3"], "NegativeTruncation"),
        (
            &[
                "count",
                "--lattice",
                "U+E8(-1)",
                "--l",
                "[1,-1,0,0,0,0,0,0,0,0]",
            ],
            "NotPolarization",
        ),
    ];
    for (args, code) in cases {
        let o = k3kit(args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        assert!(
            stderr(&o).starts_with(&format!("ERROR {code}: ")),
            "{args:?}: {}",
            stderr(&o)
        );
    }
}

#[test]
fn csv_headers() {
    let o = k3kit(&["qseries", "--order", "5", "--format", "csv"]);
    assert!(stdout(&o).starts_with("exponent,coefficient\n"));
    let o = k3kit(&[
        "count",
        "--lattice",
        "U+E8(-1)",
        "--l",
        "[1,1,0,0,0,0,0,0,0,0]",
        "--max-n",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(stdout(&o), "n,a_n,c_n\n1,480,480\n2,2640,5760\n");
    let o = k3kit(&[
        "qseries",
        "--kind",
        "log-derivative",
        "--order",
        "3",
        "--lattice",
        "U+E8(-1)",
        "--l",
        "[1,1,0,0,0,0,0,0,0,0]",
    ]);
    assert_eq!(stdout(&o), "exponent,coefficient\n1,480\n2,5760\n3,42240\n");
}

#[test]
fn reduce_certificates_replay_from_file() {
    let o = k3kit(&["--format", "json", "--seed", "3", "reduce", "--random", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let path = std::env::temp_dir().join(format!("k3kit-replay-{}.json", std::process::id()));
    std::fs::write(&path, &o.stdout).unwrap();
    let r = k3kit(&["reduce", "--replay", path.to_str().unwrap()]);
    assert_eq!(stdout(&r), "replay ok 4\n");

    let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    v[0]["output"][0] = serde_json::json!(5);
    std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
    let r = k3kit(&["reduce", "--replay", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(r.status.code(), Some(3));
    assert!(stderr(&r).starts_with("ERROR "));

    let missing = k3kit(&["reduce", "--replay", "/nonexistent/k3kit.json"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).starts_with("ERROR Io: "));
}

#[test]
fn seed_changes_random_output() {
    let a = k3kit(&["--seed", "1", "reduce", "--random", "3"]);
    let b = k3kit(&["--seed", "2", "reduce", "--random", "3"]);
    let c = k3kit(&["--seed", "1", "reduce", "--random", "3"]);
    assert_eq!(Sha256::digest(&a.stdout), Sha256::digest(&c.stdout));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn tolerance_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_k3kit"))
        .args(["--format", "json", "etadet", "--im", "1"])
        .env("K3KIT_TOL", "1e-3")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let t: f64 = v["target_precision"].as_str().unwrap().parse().unwrap();
    assert_eq!(t, 1e-3);
}

#[test]
fn etadet_text_report() {
    let o = k3kit(&["etadet", "--re", "0.5", "--im", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("det_value"), "{text}");
}
