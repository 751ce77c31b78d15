//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime budget.
//!
//! Run with `cargo test -p vortexlab-cli --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use vortexlab_core::selftest;

/// Runtime budget in seconds for criteria 1 to 11.
const BUDGETS: [f64; 11] = [1.0, 10.0, 30.0, 5.0, 10.0, 10.0, 5.0, 2.0, 10.0, 10.0, 30.0];

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

/// Every file below `dir`, keyed by relative path.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Subcommand declared by `action = ...` in a figure config.
fn declared_action(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find_map(|l| l.trim().strip_prefix("action").map(|r| r.trim_start_matches([' ', '=']).trim().to_string()))
        .unwrap_or_else(|| panic!("{} declares no action", path.display()))
}

fn invoke(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_vortexlab")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

/// Runs `selftest` and every `fig*.ini` twice and compares all bytes produced.
fn determinism() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    let first = invoke(&["selftest"]);
    let second = invoke(&["selftest"]);
    if first != second {
        ok = false;
        notes.push("selftest output differs".to_string());
    }
    let mut figs: Vec<PathBuf> = fs::read_dir(examples())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name.starts_with("fig") && name.ends_with(".ini")
        })
        .collect();
    figs.sort();
    let tmp = tempfile::tempdir().unwrap();
    for fig in &figs {
        let action = declared_action(fig);
        let stem = fig.file_stem().unwrap().to_string_lossy().to_string();
        let mut runs = Vec::new();
        for k in 0..2 {
            let dir = tmp.path().join(format!("{stem}-{k}"));
            let (code, stdout) =
                invoke(&[&action, "--config", fig.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--quiet"]);
            if code != 0 {
                ok = false;
                notes.push(format!("{stem} exited with {code}"));
            }
            runs.push((stdout, snapshot(&dir)));
        }
        if runs[0] != runs[1] || runs[0].1.is_empty() {
            ok = false;
            notes.push(format!("{stem} outputs differ"));
        }
    }
    let detail = if notes.is_empty() {
        format!("selftest and {} figure configs byte-identical across two runs", figs.len())
    } else {
        notes.join("; ")
    };
    (ok, detail)
}

#[test]
fn acceptance() {
    let mut failures = Vec::new();
    for (k, &(id, title)) in selftest::CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let outcome = selftest::run(id);
        let secs = start.elapsed().as_secs_f64();
        let in_budget = secs < BUDGETS[k];
        let passed = outcome.passed && in_budget;
        println!(
            "{} criterion {id:>2} ({title}): {} [{secs:.2} s, budget {} s]",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            BUDGETS[k]
        );
        if !passed {
            failures.push(id);
        }
    }
    let start = Instant::now();
    let (passed, detail) = determinism();
    println!(
        "{} criterion 12 (determinism): {detail} [{:.2} s]",
        if passed { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    if !passed {
        failures.push(12);
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
