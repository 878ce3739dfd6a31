//! Configuration-driven experiment suites with CSV tables and a PASS/FAIL summary.

mod config;
mod export;
mod suites;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use export::{matrix_csv, matrix_metadata, write_matrix, MatrixMetadata};
pub use suites::{run_factorization_suite, run_norm_identity, run_quantization_suite, run_spectrum_suite};

use crate::error::{Error, Result};

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 4] = ["norm", "factorization", "quantization", "spectrum"];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Outcome of one suite: checks plus named output files.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    /// `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

impl SuiteReport {
    pub(crate) fn new(suite: &str, config: &ExperimentConfig) -> Self {
        Self { suite: suite.to_string(), config: config.clone(), checks: Vec::new(), tables: Vec::new() }
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub(crate) fn table(&mut self, name: impl Into<String>, contents: String) {
        self.tables.push((name.into(), contents));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("suite {}\n", self.suite);
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        let _ = writeln!(s, "{} {} ({} checks)", if self.passed() { "PASS" } else { "FAIL" }, self.suite, self.checks.len());
        s
    }

    /// Replace `dir` with `summary.txt`, `config.txt` and the tables. Files go
    /// to a sibling staging directory first and are swapped in by rename.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let staging = sibling(dir, "staging")?;
        let retired = sibling(dir, "retired")?;
        for p in [&staging, &retired] {
            if p.exists() {
                fs::remove_dir_all(p)?;
            }
        }
        fs::create_dir_all(&staging)?;
        fs::write(staging.join("summary.txt"), self.summary())?;
        fs::write(staging.join("config.txt"), self.config.to_string())?;
        for (name, contents) in &self.tables {
            fs::write(staging.join(name), contents)?;
        }
        if dir.exists() {
            fs::rename(dir, &retired)?;
        }
        fs::rename(&staging, dir)?;
        if retired.exists() {
            fs::remove_dir_all(&retired)?;
        }
        Ok(())
    }
}

fn sibling(dir: &Path, tag: &str) -> Result<PathBuf> {
    let name = dir
        .file_name()
        .ok_or_else(|| Error::config(format!("output path '{}' has no final component", dir.display())))?;
    let mut s = std::ffi::OsString::from(".");
    s.push(name);
    s.push(format!(".{tag}-{}", std::process::id()));
    Ok(dir.with_file_name(s))
}

/// Run a suite by name.
pub fn run_suite(name: &str, config: &ExperimentConfig) -> Result<SuiteReport> {
    match name {
        "norm" => run_norm_identity(config),
        "factorization" => run_factorization_suite(config),
        "quantization" => run_quantization_suite(config),
        "spectrum" => run_spectrum_suite(config),
        other => Err(Error::config(format!("unknown suite '{other}' (expected one of {})", SUITES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_directory_is_replaced() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("run");
        let mut r = SuiteReport::new("demo", &ExperimentConfig::for_suite("norm"));
        r.check("first", true, "ok");
        r.table("a.csv", "x\n1\n".into());
        r.write_to(&out).unwrap();
        assert!(out.join("a.csv").exists());
        let mut r2 = SuiteReport::new("demo", &ExperimentConfig::for_suite("norm"));
        r2.check("second", false, "bad");
        r2.table("b.csv", "y\n".into());
        r2.write_to(&out).unwrap();
        assert!(!out.join("a.csv").exists());
        let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
        assert_eq!(summary, "suite demo\nFAIL second: bad\nFAIL demo (1 checks)\n");
        let entries: Vec<_> = fs::read_dir(tmp.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("nope", &ExperimentConfig::for_suite("norm")), Err(Error::Config(_))));
    }
}
