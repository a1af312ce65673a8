use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{generate_random, TaskGraph};
use crate::heuristics::{run_on, HeuristicKind, HeuristicRun};
use crate::model::{ExecutionPlan, PlatformModel};
use crate::schedule::{list_schedule, Instance, Mapping};

use super::config::{ExperimentConfig, ExperimentRecord};

/// One combination of swept parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub procs: usize,
    pub f_rel: f64,
    pub lambda0: f64,
    pub ratio: f64,
}

/// Sweep points in output order: processors, then `f_rel`, then `lambda0`,
/// then deadline ratio.
pub fn sweep_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for &procs in &config.procs {
        for f_rel in config.f_rel_values() {
            for &lambda0 in &config.lambda0s {
                for &ratio in &config.ratios {
                    out.push(SweepPoint { procs, f_rel, lambda0, ratio });
                }
            }
        }
    }
    out
}

/// Result of one heuristic on one instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub energy: f64,
    pub makespan: f64,
    pub feasible: bool,
    pub ms: f64,
}

/// A generated instance: graph, mapping, platform and deadline.
pub struct Generated {
    pub graph: TaskGraph<f64>,
    pub mapping: Mapping,
    pub platform: PlatformModel<f64>,
    pub d_min: f64,
    pub deadline: f64,
}

/// Builds run `run` of a sweep point.
pub fn generate_instance(config: &ExperimentConfig, point: &SweepPoint, run: usize) -> Result<Generated> {
    let graph = generate_random(
        config.nodes,
        config.edges,
        (config.weight_min, config.weight_max),
        config.seed.wrapping_add(run as u64),
    )?;
    let mapping = list_schedule(&graph, point.procs)?;
    let platform = PlatformModel::new(config.f_min, config.f_max, point.f_rel, point.lambda0, config.d, point.procs)?;
    let d_min = Instance::new(&graph, &mapping, &platform, f64::INFINITY)?
        .makespan(&vec![ExecutionPlan::once(config.f_max); graph.len()]);
    Ok(Generated { graph, mapping, platform, d_min, deadline: point.ratio * d_min })
}

/// Runs `kinds` on one instance. `Best` is derived from the other seven
/// rather than recomputed; its time is their sum.
pub fn measure(
    inst: &Instance<'_, f64>,
    kinds: &[HeuristicKind],
    timing: bool,
) -> Result<BTreeMap<HeuristicKind, (Measurement, HeuristicRun<f64>)>> {
    let mut needed: Vec<HeuristicKind> = kinds.iter().copied().filter(|&k| k != HeuristicKind::Best).collect();
    if kinds.contains(&HeuristicKind::Best) {
        needed = HeuristicKind::BASE.to_vec();
    }
    let mut out = BTreeMap::new();
    for k in needed {
        let t0 = Instant::now();
        let r = run_on(k, inst)?;
        let ms = if timing { t0.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let feasible = r.metrics.feasible && r.metrics.plans_valid;
        if !feasible {
            log::warn!("{} returned an infeasible schedule", k);
        }
        out.insert(k, (Measurement { energy: r.metrics.energy, makespan: r.metrics.makespan, feasible, ms }, r));
    }
    if kinds.contains(&HeuristicKind::Best) {
        let total_ms: f64 = out.values().map(|(m, _)| m.ms).sum();
        let (m, r) = HeuristicKind::BASE
            .iter()
            .map(|k| &out[k])
            .fold(None::<&(Measurement, HeuristicRun<f64>)>, |best, cur| match best {
                Some(b) if b.0.energy <= cur.0.energy => Some(b),
                _ => Some(cur),
            })
            .expect("base heuristics ran");
        let mut run = r.clone();
        run.kind = HeuristicKind::Best;
        out.insert(HeuristicKind::Best, (Measurement { ms: total_ms, ..*m }, run));
    }
    Ok(out)
}

/// Averages every configured heuristic over the runs of one point.
pub fn run_point(config: &ExperimentConfig, point: &SweepPoint) -> Result<Vec<ExperimentRecord>> {
    let kinds = &config.heuristics;
    let mut with_ref = kinds.clone();
    if !with_ref.contains(&HeuristicKind::HNoReex) {
        with_ref.push(HeuristicKind::HNoReex);
    }
    let n = kinds.len();
    let (mut norm, mut makespan, mut feasible, mut ms) = (vec![0.0; n], vec![0.0; n], vec![0usize; n], vec![0.0; n]);
    for r in 0..config.runs {
        let gen = generate_instance(config, point, r)?;
        let inst = Instance::new(&gen.graph, &gen.mapping, &gen.platform, gen.deadline)?;
        let res = measure(&inst, &with_ref, config.timing)?;
        let reference = res[&HeuristicKind::HNoReex].0.energy;
        for (k, kind) in kinds.iter().enumerate() {
            let m = res[kind].0;
            norm[k] += m.energy / reference;
            makespan[k] += m.makespan;
            feasible[k] += m.feasible as usize;
            ms[k] += m.ms;
        }
    }
    let runs = config.runs as f64;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(k, kind)| ExperimentRecord {
            ratio: point.ratio,
            procs: point.procs,
            frel: point.f_rel,
            lambda0: point.lambda0,
            heuristic: kind.name().to_string(),
            norm_energy: norm[k] / runs,
            makespan: makespan[k] / runs,
            feasible: feasible[k],
            ms: ms[k] / runs,
        })
        .collect())
}

/// Runs every sweep point (in parallel) and returns the rows in sweep order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let points = sweep_points(config);
    let rows: Vec<Vec<ExperimentRecord>> =
        points.par_iter().map(|p| run_point(config, p)).collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let csv_err = |source| Error::Csv { path: path.display().to_string(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Runs the sweep and writes it to the configured output; returns the path.
pub fn run_sweep_to_file(config: &ExperimentConfig) -> Result<std::path::PathBuf> {
    let records = run_sweep(config)?;
    let path = config.output_path();
    write_csv(&records, &path)?;
    Ok(path)
}
