use std::path::Path;
use std::process::{Command, Output};

use finite_cz::format::save_kernel;
use finite_cz::TruncatedKernel;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finite-cz")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_passes_on_a_small_hilbert_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = write(
        dir.path(),
        "ok.toml",
        &format!(
            "family = \"hilbert\"\nsizes = [16]\nsystems = 2\n\n[output]\ndir = {:?}\nformats = [\"csv\", \"jsonl\"]\n",
            out_dir.to_str().unwrap()
        ),
    );
    let out = run(&["verify", "--config", &config, "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(out_dir.join("verify.csv")).unwrap();
    assert!(csv.starts_with("suite,name,pass,achieved,relation,tolerance\n"));
    assert!(out_dir.join("verify.jsonl").exists());
}

#[test]
fn corrupted_kernel_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.toml", "family = \"hilbert\"\nsizes = [16]\nsystems = 2\ncorrupt_truncation = true\n");
    let out = run(&["verify", "--config", &config]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL [kernel]"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.toml", "family = \"hilbert\"\nsizes = []\n");
    assert_eq!(code(&run(&["verify", "--config", &empty])), 2);
    let unknown = write(dir.path(), "unknown.toml", "family = \"hilbert\"\nsizes = [8]\ncolour = 1\n");
    assert_eq!(code(&run(&["scaling", "--config", &unknown])), 2);
    assert_eq!(code(&run(&["grids", "--n", "16", "--eps", "3", "--trials", "10"])), 2);
}

#[test]
fn missing_files_exit_with_three() {
    let out = run(&["verify", "--config", "/nonexistent/config.toml"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/config.toml"));
    assert_eq!(code(&run(&["norms", "--file", "/nonexistent/k.json", "--s", "2", "--p", "2", "--d", "1"])), 3);
}

#[test]
fn grids_reports_every_level() {
    let out = run(&["grids", "--n", "32", "--eps", "0.25", "--trials", "200"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("boundary probability <= 2 eps: yes"));
}

#[test]
fn norms_of_a_saved_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    save_kernel(&TruncatedKernel::finite_hilbert(16).unwrap(), &path).unwrap();
    let file = path.to_str().unwrap();
    let out = run(&["norms", "--file", file, "--s", "2", "--p", "2", "--d", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("spectral"), "{text}");
    assert_eq!(code(&run(&["norms", "--file", file, "--s", "0.5", "--p", "2", "--d", "1"])), 2);
}
