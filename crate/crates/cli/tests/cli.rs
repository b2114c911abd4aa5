use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn flt(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_flt"))
        .args(args)
        .env("NO_COLOR", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn flt");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("flt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const BATCH: &str = r#"
[[scenario]]
command = "bounds"
kappa = 1
r = 1
p = 1.5
seed = 3
restarts = 2
bump_samples = 8

[[scenario]]
command = "limit"
r = 1
kappas = [10, 100, 10000]
points = [0.5, 2]
"#;

#[test]
fn batch_json_is_byte_identical_across_runs() {
    let path = scratch("batch.toml", BATCH);
    let a = flt(&["batch", path.to_str().unwrap(), "--format", "json"], None);
    let b = flt(&["batch", path.to_str().unwrap(), "--format", "json"], None);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn hypothesis_violation_exits_with_input_error() {
    let out = flt(
        &["bounds", "--kappa", "0.2", "--r", "0.2", "--p", "1.5"],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa + r"));
}

#[test]
fn empty_gls_intersection_reports_error() {
    let text = r#"
command = "gls"
kappa = 1
r = 1
f = { kind = "indicator", b = 1 }
psi = { support = { lo = 3, hi = 5 }, descriptor = { kind = "constant", value = 1 } }
"#;
    let out = flt(&["gls", "-", "--format", "json"], Some(text));
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"].as_str().unwrap().contains("does not meet"));
}

#[test]
fn sharpness_csv_from_flags() {
    let out = flt(
        &[
            "sharpness",
            "--kappa",
            "1",
            "--r",
            "1",
            "--set",
            "p_grid=[1.5,1.9]",
            "--format",
            "csv",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,ratio,z,lower37"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn mismatched_command_is_rejected() {
    let path = scratch(
        "constants.toml",
        "command = \"constants\"\nkappa = 1\nr = 1\np = 1.5\n",
    );
    let out = flt(&["norm", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file_and_flags_override_input() {
    let input = scratch(
        "c.toml",
        "command = \"constants\"\nkappa = 1\nr = 1\np = 1.5\n",
    );
    let dest = input.with_file_name("c.json");
    let out = flt(
        &[
            "constants",
            input.to_str().unwrap(),
            "--p",
            "1.25",
            "--format",
            "json",
            "--out",
            dest.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["scenario"]["p"].as_f64(), Some(1.25));
}

#[test]
fn human_output_has_no_color_under_no_color() {
    let out = flt(
        &["constants", "--kappa", "2", "--r", "1", "--p", "1.5"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(text.contains("wall time"));
    assert!(!text.contains('\x1b'));
}
