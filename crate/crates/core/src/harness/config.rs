use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heuristics::HeuristicKind;

/// Environment variable naming the directory relative output paths go to.
pub const OUT_DIR_ENV: &str = "TRICRIT_OUT_DIR";

/// Parameters of a simulation campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub edges: usize,
    pub procs: Vec<usize>,
    /// Number of random graphs averaged per sweep point.
    pub runs: usize,
    /// Graph `r` of a point uses seed `seed + r`.
    pub seed: u64,
    /// Deadlines as multiples of the full-speed makespan.
    pub ratios: Vec<f64>,
    /// Reliability threshold speeds; `None` means `2/3 * f_max`.
    pub f_rels: Option<Vec<f64>>,
    pub lambda0s: Vec<f64>,
    pub d: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    pub heuristics: Vec<HeuristicKind>,
    pub output: PathBuf,
    /// Measure wall time per heuristic call; when off the `ms` column is 0
    /// and the CSV depends only on the configuration.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            nodes: 100,
            edges: 300,
            procs: vec![1, 10, 50],
            runs: 10,
            seed: 1,
            ratios: vec![1.0, 1.2, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            f_rels: None,
            lambda0s: vec![1e-5],
            d: 0.0,
            f_min: 0.1,
            f_max: 1.0,
            weight_min: 0.0,
            weight_max: 10.0,
            heuristics: HeuristicKind::ALL.to_vec(),
            output: PathBuf::from("sweep.csv"),
            timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn f_rel_values(&self) -> Vec<f64> {
        self.f_rels.clone().unwrap_or_else(|| vec![2.0 / 3.0 * self.f_max])
    }

    /// Output path, placed under `$TRICRIT_OUT_DIR` when relative and the
    /// variable is set.
    pub fn output_path(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if self.output.is_relative() => Path::new(&dir).join(&self.output),
            _ => self.output.clone(),
        }
    }

    /// Sets one field from its textual `key` and `value`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: String| Error::Config(format!("{}: {}", key, e));
        let value = value.trim();
        match key.trim() {
            "nodes" => self.nodes = parse_one(value).map_err(bad)?,
            "edges" => self.edges = parse_one(value).map_err(bad)?,
            "procs" => self.procs = parse_list(value).map_err(bad)?,
            "runs" => self.runs = parse_one(value).map_err(bad)?,
            "seed" => self.seed = parse_one(value).map_err(bad)?,
            "ratios" | "ratio" => self.ratios = parse_list(value).map_err(bad)?,
            "f_rel" | "frel" => self.f_rels = Some(parse_list(value).map_err(bad)?),
            "lambda0" => self.lambda0s = parse_list(value).map_err(bad)?,
            "d" => self.d = parse_one(value).map_err(bad)?,
            "f_min" => self.f_min = parse_one(value).map_err(bad)?,
            "f_max" => self.f_max = parse_one(value).map_err(bad)?,
            "weight_min" => self.weight_min = parse_one(value).map_err(bad)?,
            "weight_max" => self.weight_max = parse_one(value).map_err(bad)?,
            "heuristics" => {
                self.heuristics = value
                    .split(',')
                    .map(|s| s.parse::<HeuristicKind>())
                    .collect::<Result<Vec<_>>>()?
            }
            "output" => self.output = PathBuf::from(value),
            "timing" => self.timing = parse_one(value).map_err(bad)?,
            other => return Err(Error::Config(format!("unknown key {:?}", other))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, got {:?}", line),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.nodes == 0 {
            return bad("nodes must be positive");
        }
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.procs.is_empty() || self.procs.contains(&0) {
            return bad("procs must be a non-empty list of positive counts");
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|&r| !(r >= 1.0)) {
            return bad("deadline ratios must be >= 1");
        }
        if self.lambda0s.is_empty() || self.f_rel_values().is_empty() {
            return bad("empty sweep list");
        }
        if self.heuristics.is_empty() {
            return bad("no heuristic selected");
        }
        if !(self.weight_min >= 0.0 && self.weight_max > self.weight_min) {
            return bad("need 0 <= weight_min < weight_max");
        }
        Ok(())
    }
}

fn parse_one<V: std::str::FromStr>(s: &str) -> std::result::Result<V, String> {
    s.trim().parse().map_err(|_| format!("cannot parse {:?}", s))
}

/// Comma-separated list.
pub fn parse_list<V: std::str::FromStr>(s: &str) -> std::result::Result<Vec<V>, String> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_one).collect()
}

/// One CSV row: a sweep point, a heuristic, and means over the runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub ratio: f64,
    pub procs: usize,
    pub frel: f64,
    pub lambda0: f64,
    pub heuristic: String,
    /// Energy divided by that of `HNO_REEX` on the same instance.
    pub norm_energy: f64,
    pub makespan: f64,
    /// Number of runs whose schedule met every constraint.
    pub feasible: usize,
    pub ms: f64,
}
