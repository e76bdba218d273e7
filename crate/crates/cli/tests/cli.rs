use std::fs;
use std::process::Command;

fn netdiv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netdiv"))
}

#[test]
fn generate_analyze_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("tc.txt");
    let gen = netdiv()
        .args([
            "generate",
            "--model",
            "triangle_closing",
            "--n",
            "80",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&edges)
        .output()
        .unwrap();
    assert!(gen.status.success());
    fs::write(dir.path().join("manifest.tsv"), "tc\ttc.txt\tunipartite\n").unwrap();

    let out = dir.path().join("bundle");
    let run = netdiv()
        .args([
            "analyze",
            "--timepoints",
            "12",
            "--t1",
            "9",
            "--measures",
            "clustering,gini",
            "--jobs",
            "1",
        ])
        .arg("--manifest")
        .arg(dir.path().join("manifest.tsv"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let table = String::from_utf8(run.stdout).unwrap();
    assert!(table.contains("c *"), "{table}");

    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    // Two measures, 12 Full and 4 Connected timepoints.
    assert_eq!(series.lines().count(), 1 + 2 * (12 + 4));

    let verify = netdiv().arg("verify").arg(&out).output().unwrap();
    assert!(
        verify.status.success(),
        "{}",
        String::from_utf8_lossy(&verify.stderr)
    );
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = netdiv()
        .args(["analyze", "--measures", "nonsense", "--manifest"])
        .arg(dir.path().join("missing.tsv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let out = netdiv()
        .arg("verify")
        .arg(dir.path().join("nothing"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}
