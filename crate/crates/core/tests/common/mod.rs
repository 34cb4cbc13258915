#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub const MORSE: [&str; 8] = ["--family", "morse", "--v0", "25", "--lambda", "1", "--mass", "0.5"];
pub const HO: [&str; 6] = ["--family", "ho", "--mass", "1", "--omega", "1"];

pub fn sijc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sijc"))
        .args(args)
        .output()
        .expect("spawn sijc")
}

pub fn with(base: &[&str], subcommand: &str, extra: &[&str]) -> Vec<String> {
    std::iter::once(subcommand)
        .chain(base.iter().copied())
        .chain(extra.iter().copied())
        .map(String::from)
        .collect()
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Reference runs whose standard output is pinned byte for byte.
pub fn golden_runs() -> Vec<(&'static str, Vec<String>)> {
    let plain = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        ("families.txt", plain(&["families"])),
        ("families.json", plain(&["families", "--format", "json"])),
        ("families.csv", plain(&["families", "--format", "csv"])),
        (
            "spectrum_morse.txt",
            with(&MORSE, "spectrum", &["--omega-drive", "2", "--levels", "2"]),
        ),
        (
            "spectrum_morse.json",
            with(
                &MORSE,
                "spectrum",
                &["--omega-drive", "2", "--levels", "2", "--format", "json"],
            ),
        ),
        (
            "spectrum_morse.csv",
            with(
                &MORSE,
                "spectrum",
                &["--omega-drive", "2", "--levels", "4", "--format", "csv"],
            ),
        ),
        (
            "spectrum_ho.txt",
            with(&HO, "spectrum", &["--omega-drive", "4", "--levels", "6"]),
        ),
        (
            "spectrum_scaling.csv",
            plain(&[
                "spectrum",
                "--family",
                "scaling",
                "--r1",
                "1",
                "--q",
                "0.5",
                "--omega-drive",
                "1",
                "--levels",
                "4",
                "--format",
                "csv",
            ]),
        ),
        (
            "dressed_morse.txt",
            with(&MORSE, "dressed", &["--omega-drive", "2", "--n-max", "3"]),
        ),
        (
            "dressed_morse.json",
            with(
                &MORSE,
                "dressed",
                &["--omega-drive", "2", "--n-max", "3", "--format", "json"],
            ),
        ),
        (
            "dressed_ho.txt",
            with(&HO, "dressed", &["--omega-drive", "4", "--n-max", "0"]),
        ),
    ]
}

/// Compares the run's stdout with the stored golden file. With
/// `SIJC_BLESS=1` the golden file is (re)written instead.
pub fn check_golden(name: &str, args: &[String]) -> Result<(), String> {
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = sijc(&args);
    if !out.status.success() {
        return Err(format!(
            "{name}: exit {:?}\n{}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let path = golden_dir().join(name);
    if std::env::var_os("SIJC_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).map_err(|e| format!("{name}: {e}"))?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != out.stdout {
        return Err(format!(
            "{name}: output differs from golden file\n--- expected\n{}\n--- actual\n{}",
            String::from_utf8_lossy(&expected),
            String::from_utf8_lossy(&out.stdout)
        ));
    }
    Ok(())
}
