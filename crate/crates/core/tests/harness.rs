use std::collections::BTreeMap;

use tricrit::harness::{
    generate_instance, run_sweep, run_sweep_to_file, sweep_points, write_csv, ExperimentConfig, OUT_DIR_ENV,
};
use tricrit::heuristics::HeuristicKind;

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        nodes: 30,
        edges: 60,
        procs: vec![1, 5],
        runs: 3,
        ratios: vec![1.0, 1.5, 8.0],
        timing: false,
        ..ExperimentConfig::default()
    }
}

#[test]
fn points_follow_sweep_order() {
    let mut c = small_config();
    c.lambda0s = vec![1e-6, 1e-5];
    let pts = sweep_points(&c);
    assert_eq!(pts.len(), 2 * 2 * 3);
    assert_eq!((pts[0].procs, pts[0].lambda0, pts[0].ratio), (1, 1e-6, 1.0));
    assert_eq!((pts[1].procs, pts[1].lambda0, pts[1].ratio), (1, 1e-6, 1.5));
    assert_eq!((pts[3].procs, pts[3].lambda0), (1, 1e-5));
    assert_eq!(pts[6].procs, 5);
}

#[test]
fn generated_deadline_scales_the_full_speed_makespan() {
    let c = small_config();
    let pts = sweep_points(&c);
    let g = generate_instance(&c, &pts[1], 0).unwrap();
    assert!((g.deadline - 1.5 * g.d_min).abs() <= 1e-12 * g.deadline);
    // one processor: the full-speed makespan is the total work
    assert!((g.d_min - g.graph.total_weight()).abs() <= 1e-9 * g.d_min);
}

#[test]
fn normalization_invariants() {
    let rows = run_sweep(&small_config()).unwrap();
    assert_eq!(rows.len(), 2 * 3 * HeuristicKind::ALL.len());
    let mut by_point: BTreeMap<(usize, u64), BTreeMap<String, f64>> = BTreeMap::new();
    for r in &rows {
        assert_eq!(r.feasible, 3, "{:?}", r);
        assert_eq!(r.ms, 0.0);
        by_point.entry((r.procs, r.ratio.to_bits())).or_default().insert(r.heuristic.clone(), r.norm_energy);
    }
    for ((procs, ratio), h) in by_point {
        let ratio = f64::from_bits(ratio);
        assert!((h["HNO_REEX"] - 1.0).abs() <= 1e-12);
        if ratio == 1.0 {
            for (name, v) in &h {
                if procs == 1 {
                    // no slack at all: f_dec = f_max and nothing can be re-executed
                    assert!((v - 1.0).abs() <= 1e-9, "{} gave {}", name, v);
                } else {
                    // tasks off the critical path may still have room
                    assert!(*v <= 1.0 + 1e-9, "{} at p={} gave {}", name, procs, v);
                }
            }
        } else {
            assert!((h["HFMAX"] - 2.25).abs() <= 1e-9);
        }
        let best = h["BEST"];
        assert!(h.values().all(|&v| best <= v + 1e-12));
    }
}

#[test]
fn sweep_is_deterministic_and_csv_has_the_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.output = dir.path().join("a/b/run1.csv");
    let p1 = run_sweep_to_file(&c).unwrap();
    c.output = dir.path().join("run2.csv");
    let p2 = run_sweep_to_file(&c).unwrap();
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "ratio,procs,frel,lambda0,heuristic,norm_energy,makespan,feasible,ms");
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 8);
}

#[test]
fn output_dir_env_applies_to_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.output = "rel.csv".into();
    std::env::set_var(OUT_DIR_ENV, dir.path());
    let rel = c.output_path();
    c.output = dir.path().join("abs.csv");
    let abs = c.output_path();
    std::env::remove_var(OUT_DIR_ENV);
    assert_eq!(rel, dir.path().join("rel.csv"));
    assert_eq!(abs, dir.path().join("abs.csv"));
}

#[test]
fn config_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.cfg");
    std::fs::write(&path, "nodes = 12\nedges = 20 # sparse\nlambda0 = 1e-6,1e-5\n").unwrap();
    let mut c = ExperimentConfig::default();
    c.apply_file(&path).unwrap();
    assert_eq!((c.nodes, c.edges), (12, 20));
    assert_eq!(c.lambda0s, vec![1e-6, 1e-5]);
    let err = c.apply_file(&dir.path().join("missing.cfg")).unwrap_err();
    assert!(err.to_string().contains("missing.cfg"));
    let err = write_csv(&[], &path.join("under_a_file.csv")).unwrap_err();
    assert!(err.to_string().contains("under_a_file.csv") || err.to_string().contains("exp.cfg"));
    c.runs = 0;
    assert!(run_sweep(&c).is_err());
}
