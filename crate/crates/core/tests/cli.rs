use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sumofdm"))
}

fn body(csv: &str) -> Vec<String> {
    csv.lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect()
}

#[test]
fn ber_writes_header_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let status = bin()
        .args(["ber", "--snr", "10,20", "--seed", "3", "--set", "min_errors=50"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# seed=3"));
    let rows = body(&csv);
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("snr_db,"));
    assert!(rows[1].starts_with("10,"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# baseline run\nscheme=ofdm\nq=4\nsnr_db=15\nmin_errors=20\n").unwrap();
    let out = bin()
        .args(["ber", "--detector", "ml", "--set", "seed=9"])
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("# scheme=ofdm") && csv.contains("# seed=9"));
    assert_eq!(body(&csv).len(), 2);
}

#[test]
fn bound_with_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let ber = dir.path().join("ber.csv");
    assert!(bin()
        .args(["ber", "--snr", "10", "--set", "min_errors=20"])
        .arg("--out")
        .arg(&ber)
        .status()
        .unwrap()
        .success());
    let out = bin()
        .args(["bound", "--snr", "10,20"])
        .arg("--overlay")
        .arg(&ber)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows = body(&csv);
    assert!(rows[0].contains("union_bound"));
    assert_eq!(rows.len(), 3);
}

#[test]
fn tables_match_reference() {
    let out = bin().args(["tables"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("MISMATCH"));
}

#[test]
fn sync_demo_trace_replay() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("rx.iq");
    let rec = bin()
        .args([
            "sync-demo",
            "--snr",
            "25",
            "--set",
            "frames=10",
            "--set",
            "cfo=0.15",
            "--set",
            "to_samples=21",
        ])
        .arg("--trace-out")
        .arg(&trace)
        .output()
        .unwrap();
    assert!(rec.status.success());
    assert!(trace.exists() && dir.path().join("rx.iq.hdr").exists());
    let rep = bin()
        .args(["sync-demo"])
        .arg("--trace-in")
        .arg(&trace)
        .output()
        .unwrap();
    assert!(rep.status.success());
    assert_eq!(rec.stdout, rep.stdout);
}

#[test]
fn bad_input_is_reported() {
    let out = bin().args(["ber", "--set", "modes=3"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"));
    let out = bin().args(["ber", "--set", "no_such_key=1"]).output().unwrap();
    assert!(!out.status.success());
}
