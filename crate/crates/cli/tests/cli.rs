use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn firm3_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/firm3/config.toml")
}

fn sckg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sckg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn full_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = firm3_config();
    let cfg = cfg.to_str().unwrap();
    for stage in ["ingest", "extract", "build"] {
        let o = sckg(&[stage, "--config", cfg, "--out", out, "--concurrency", "2"]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = sckg(&["report", "stats", "--config", cfg, "--out", out, "--arm", "snippet", "--tier", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("nodes"));
    assert!(dir.path().join("reports/stats-snippet-tier3.json").is_file());

    let o = sckg(&["report", "ccdf", "--config", cfg, "--out", out, "--listed"]);
    assert!(o.status.success());
    assert!(dir.path().join("reports/ccdf-both-listed.csv").is_file());

    let o = sckg(&["report", "topdeg", "--config", cfg, "--out", out, "--top", "3", "--arm", "fulltext"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count() <= 3, "{text}");

    for kind in ["cost", "saturation", "coverage"] {
        let o = sckg(&["report", kind, "--config", cfg, "--out", out]);
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = firm3_config();
    let cfg = cfg.to_str().unwrap();

    let o = sckg(&["ingest", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));

    let o = sckg(&["ingest", "--config", cfg, "--out", out, "--concurrency", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = sckg(&["build", "--config", cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(3));

    let o = sckg(&["report", "stats", "--config", cfg, "--out", out, "--tier", "9"]);
    assert_eq!(o.status.code(), Some(2));

    // clap usage errors
    let o = sckg(&["report", "nonsense", "--config", cfg]);
    assert_eq!(o.status.code(), Some(2));
}
