//! The machine-readable test report.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Echo of everything needed to reproduce a `test` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfigEcho {
    pub command: String,
    pub x_path: String,
    pub y_path: String,
    pub covariates_path: Option<String>,
    pub lambda_x: Vec<String>,
    pub lambda_y: Vec<String>,
    pub explicit_pairs: Option<Vec<String>>,
    pub heritability_grid: Option<Vec<f64>>,
    pub permutations: usize,
    pub exhaustive: bool,
    pub seed: u64,
    pub standardize_x: bool,
    pub standardize_y: bool,
    pub paper_p_direction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub lambda_x: String,
    pub lambda_y: String,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedPair {
    pub index: usize,
    pub lambda_x: String,
    pub lambda_y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub config: TestConfigEcho,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub pairs: Vec<PairResult>,
    pub adaptive_p: f64,
    pub selected: SelectedPair,
    pub seed: u64,
    pub runtime_ms: u64,
}

impl TestReport {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_through_json() {
        let report = TestReport {
            schema_version: SCHEMA_VERSION,
            config: TestConfigEcho {
                command: "test".into(),
                x_path: "x.csv".into(),
                y_path: "y.csv".into(),
                covariates_path: None,
                lambda_x: vec!["100".into(), "inf".into()],
                lambda_y: vec!["inf".into()],
                explicit_pairs: None,
                heritability_grid: Some(vec![0.1, 0.4]),
                permutations: 999,
                exhaustive: false,
                seed: 42,
                standardize_x: true,
                standardize_y: false,
                paper_p_direction: false,
            },
            n: 12,
            p: 3,
            q: 2,
            pairs: vec![PairResult {
                lambda_x: "100".into(),
                lambda_y: "inf".into(),
                statistic: 0.1234567890123456789,
                p_value: 17.0 / 1000.0,
            }],
            adaptive_p: 17.0 / 1000.0,
            selected: SelectedPair {
                index: 0,
                lambda_x: "100".into(),
                lambda_y: "inf".into(),
            },
            seed: 42,
            runtime_ms: 5,
        };
        let json = serde_json::to_string(&report).unwrap();
        let parsed: TestReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, report);
    }
}
