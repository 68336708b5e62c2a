//! Golden reports, exit codes and the binary's byte-for-byte determinism.

use std::path::PathBuf;
use std::process::Command;

use hcw_cli::run;

const CASES: &[(&str, &[&str])] = &[
    ("enum_challenge.json", &["enum", "--challenge", "0"]),
    ("enum_triple.json", &["enum", "--triple", "7", "--universe", "8"]),
    ("orbit_e5.json", &["orbit", "--w", "twos", "--y", "e5", "--K", "8"]),
    ("orbit_e5_csv.csv", &["orbit", "--w", "twos", "--y", "e5", "--K", "8", "--csv"]),
    ("hit.json", &["hit", "--w", "periodic:12", "--y", "0,0,1/2", "--q", "1", "--eps", "1/2", "--K", "8"]),
    ("build_hc.json", &["build-hc", "--w", "periodic:12", "--challenges", "3"]),
    ("defeat.json", &["defeat", "--y", "1,1/2,1/4", "--K", "12"]),
    ("encode.json", &["encode", "--universe", "2", "--a", "0b01", "--blocks", "3", "--prefix", "8"]),
    ("verify_pair.json", &["verify-pair", "--universe", "8", "--a", "0b00001111", "--b", "0b00000011", "--blocks", "12"]),
    ("nice_check.json", &["nice", "check", "--w", "twos", "--y", "e3", "--k", "3", "--q", "8", "--eps", "1/2"]),
    ("force_extend.json", &["force", "extend", "--p2", r#"{"alpha":"111","r":["1","0"],"delta":"1/64"}"#, "--p1", r#"{"alpha":"11","r":["1"],"delta":"1/16"}"#]),
];

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("hcw").chain(args.iter().copied()).map(String::from).collect()
}

#[test]
fn golden_reports() {
    let update = std::env::var_os("HCW_UPDATE_GOLDEN").is_some();
    for (name, args) in CASES {
        let out = run(argv(args));
        assert_eq!(out.code, 0, "{name}: {}", out.stderr);
        let path = golden(name);
        if update {
            std::fs::write(&path, &out.stdout).unwrap();
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(out.stdout, want, "{name} drifted from its golden report");
    }
}

#[test]
fn orbit_csv_peaks_at_five() {
    let out = run(argv(&["orbit", "--w", "twos", "--y", "e5", "--K", "8", "--csv"]));
    let rows: Vec<Vec<String>> =
        out.stdout.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let peak = rows.iter().max_by_key(|r| r[1].parse::<u64>().unwrap()).unwrap();
    assert_eq!((peak[0].as_str(), peak[1].as_str()), ("5", "1024"));
}

#[test]
fn exit_codes() {
    // input errors
    assert_eq!(run(argv(&["orbit", "--w", "3", "--y", "e1"])).code, 2);
    assert_eq!(run(argv(&["orbit", "--w", "twos", "--y", "e1", "--frobnicate"])).code, 2);
    assert_eq!(run(argv(&["force", "extend", "--p2", "{oops", "--p1", "{}"])).code, 2);
    assert_eq!(run(argv(&["force", "extend", "--p2", r#"{"alpha":"1","r":["0"],"delta":"1"}"#, "--p1", r#"{"alpha":"1","r":[],"delta":"1/4"}"#])).code, 2);
    // not certified
    assert_eq!(run(argv(&["hit", "--w", "ones", "--y", "e5", "--q", "1", "--eps", "1/2", "--K", "3"])).code, 1);
    let out = run(argv(&["fmap", "--y", "1,1/2,1/4", "--K", "40"]));
    assert_eq!(out.code, 1, "the interval two-count claim fails for n = 0");
    // help is not an error
    let out = run(argv(&["--help"]));
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("verify-pair"));
}

#[test]
fn config_table_overrides_challenges() {
    let dir = std::env::temp_dir().join(format!("hcw-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"enumeration":"custom","challenges":[{"q":["8"],"eps":"1/2"}]}"#).unwrap();
    let out = run(argv(&["--config", cfg.to_str().unwrap(), "hit", "--w", "twos", "--y", "e3", "--challenge", "0", "--K", "5"]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["result"]["k"], 3);
    assert_eq!(v["config"]["enumeration"], "custom");
}

#[test]
fn binary_is_deterministic() {
    for (_, args) in CASES {
        let once = || Command::new(env!("CARGO_BIN_EXE_hcw")).args(*args).output().unwrap();
        let (a, b) = (once(), once());
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(String::from_utf8(a.stdout).unwrap(), run(argv(args)).stdout);
    }
}
