use approx::assert_relative_eq;
use proptest::prelude::*;
use tricrit::graph::{generate_random, TaskGraph};
use tricrit::model::{f_re_ex, ExecutionPlan, PlatformModel};
use tricrit::schedule::{critical_path_tasks, evaluate, list_schedule, slack_reclaim, Instance, Mapping, Schedule};
use tricrit::{PlatformModel64, TaskGraph64};

fn platform(procs: usize) -> PlatformModel64 {
    PlatformModel::new(0.1, 1.0, 2.0 / 3.0, 1e-5, 0.0, procs).unwrap()
}

fn instance_parts(nodes: usize, edges: usize, procs: usize, seed: u64) -> (TaskGraph64, Mapping, PlatformModel64) {
    let g = generate_random(nodes, edges, (0.0, 10.0), seed).unwrap();
    let m = list_schedule(&g, procs).unwrap();
    (g, m, platform(procs))
}

/// Plans mixing speeds in `[f_rel, f_max]` and a few re-executions.
fn mixed_plans(inst: &Instance<'_, f64>, salt: u64) -> Vec<ExecutionPlan<f64>> {
    let f_rel = inst.platform().f_rel();
    (0..inst.len())
        .map(|i| {
            let h = (i as u64).wrapping_mul(2654435761).wrapping_add(salt) % 7;
            if h == 0 && inst.can_reexecute(i) {
                ExecutionPlan::twice(f_re_ex(f_rel))
            } else {
                ExecutionPlan::once(f_rel + (1.0 - f_rel) * h as f64 / 6.0)
            }
        })
        .collect()
}

#[test]
fn list_schedule_on_one_processor_is_a_topological_order() {
    let (g, m, _) = instance_parts(30, 60, 1, 4);
    let order = &m.processors()[0];
    let mut pos = vec![0; g.len()];
    for (k, &t) in order.iter().enumerate() {
        pos[t] = k;
    }
    assert!(g.edges().iter().all(|&(u, v)| pos[u] < pos[v]));
}

#[test]
fn independent_tasks_spread_over_processors() {
    let g = TaskGraph::independent(&[3.0, 2.0, 1.0, 4.0]).unwrap();
    let m = list_schedule(&g, 4).unwrap();
    assert!(m.processors().iter().all(|l| l.len() == 1));
    // heaviest first onto processor 0
    assert_eq!(m.processors()[0], vec![3]);
}

#[test]
fn mapping_validation() {
    assert!(Mapping::new(vec![vec![0, 1], vec![1]], 2).is_err());
    assert!(Mapping::new(vec![vec![0]], 2).is_err());
    let m = Mapping::new(vec![vec![1], vec![0, 2]], 3).unwrap();
    assert_eq!((m.proc_of(2), m.position(2), m.proc_predecessor(2)), (1, 1, Some(0)));
    // a processor order against the precedence edges is a cycle
    let g = TaskGraph::chain(&[1.0, 1.0]).unwrap();
    let bad = Mapping::single_processor(vec![1, 0]).unwrap();
    assert!(Instance::new(&g, &bad, &platform(1), 10.0).is_err());
}

#[test]
fn chain_of_two_reclaims_to_the_uniform_optimum() {
    let g = TaskGraph::chain(&[1.0, 2.0]).unwrap();
    let m = Mapping::single_processor(vec![0, 1]).unwrap();
    let p = platform(1);
    let inst = Instance::new(&g, &m, &p, 6.0).unwrap();
    let plans = vec![ExecutionPlan::once(1.0); 2];
    let lower = vec![p.f_rel(); 2];
    let out = slack_reclaim(&inst, &plans, &[0, 1], &lower);
    // 3 units of work over 6 time units would be 0.5, below f_rel
    for plan in &out {
        assert_relative_eq!(plan.first, 2.0 / 3.0, max_relative = 1e-9);
    }
    let inst = Instance::new(&g, &m, &p, 4.0).unwrap();
    let out = slack_reclaim(&inst, &plans, &[0, 1], &lower);
    for plan in &out {
        assert_relative_eq!(plan.first, 0.75, max_relative = 1e-9);
    }
}

#[test]
fn schedule_text_round_trip() {
    let (g, m, p) = instance_parts(25, 40, 3, 9);
    let inst = Instance::new(&g, &m, &p, 1e9).unwrap();
    let s = Schedule { mapping: m.clone(), plans: mixed_plans(&inst, 5) };
    let back = Schedule::<f64>::from_text(&s.to_text()).unwrap();
    assert_eq!(back.mapping, s.mapping);
    assert_eq!(back.plans, s.plans);
    assert!(Schedule::<f64>::from_text("0 0 0 -1\n").is_err());
    assert!(Schedule::<f64>::from_text("0 0 0\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evaluate_respects_both_edge_kinds(nodes in 2usize..40, frac in 0.0f64..0.3, procs in 1usize..6, seed in any::<u64>(), salt in any::<u64>()) {
        let edges = (frac * (nodes * (nodes - 1) / 2) as f64) as usize;
        let (g, m, p) = instance_parts(nodes, edges, procs, seed);
        let inst = Instance::new(&g, &m, &p, 1e9).unwrap();
        let plans = mixed_plans(&inst, salt);
        let metrics = evaluate(&g, &Schedule { mapping: m.clone(), plans: plans.clone() }, 1e9, &p).unwrap();
        for i in 0..nodes {
            let dur = plans[i].time(g.weight(i));
            prop_assert!((metrics.finish[i] - metrics.start[i] - dur).abs() <= 1e-9 * dur.max(1.0));
            let mut preds: Vec<usize> = g.predecessors(i).to_vec();
            preds.extend(m.proc_predecessor(i));
            for j in preds {
                prop_assert!(metrics.finish[i] >= metrics.finish[j] + dur - 1e-9 * metrics.finish[i].max(1.0));
            }
            // as soon as possible: some predecessor ends exactly at the start, or it starts at 0
            let latest_pred = g.predecessors(i).iter().copied().chain(m.proc_predecessor(i))
                .map(|j| metrics.finish[j]).fold(0.0, f64::max);
            prop_assert!((metrics.start[i] - latest_pred).abs() <= 1e-12 * latest_pred.max(1.0));
        }
    }

    #[test]
    fn critical_path_sets_the_makespan(nodes in 1usize..40, frac in 0.0f64..0.3, procs in 1usize..6, seed in any::<u64>()) {
        let edges = (frac * (nodes * (nodes - 1) / 2) as f64) as usize;
        let (g, m, p) = instance_parts(nodes, edges, procs, seed);
        let plans = vec![ExecutionPlan::once(1.0); nodes];
        let cp = critical_path_tasks(&g, &Schedule { mapping: m.clone(), plans: plans.clone() }, &p).unwrap();
        prop_assert!(!cp.is_empty());
        let inst = Instance::new(&g, &m, &p, 1e9).unwrap();
        let base = inst.makespan(&plans);
        // slowing any critical task stretches the makespan by exactly its extra time
        for &t in &cp {
            let mut slower = plans.clone();
            slower[t] = ExecutionPlan::once(0.8);
            let extra = g.weight(t) * (1.0 / 0.8 - 1.0);
            prop_assert!((inst.makespan(&slower) - base - extra).abs() <= 1e-9 * base);
        }
    }

    #[test]
    fn slack_reclaim_is_safe(nodes in 2usize..50, frac in 0.0f64..0.2, procs in 1usize..8, seed in any::<u64>(), ratio in 1.0f64..6.0, salt in any::<u64>()) {
        let edges = (frac * (nodes * (nodes - 1) / 2) as f64) as usize;
        let (g, m, p) = instance_parts(nodes, edges, procs, seed);
        let probe = Instance::new(&g, &m, &p, f64::INFINITY).unwrap();
        let plans = mixed_plans(&probe, salt);
        let deadline = ratio * probe.makespan(&plans);
        let inst = Instance::new(&g, &m, &p, deadline).unwrap();
        let targets: Vec<usize> = (0..nodes).filter(|i| i % 3 != 1).collect();
        let lower: Vec<f64> = (0..nodes).map(|i| inst.lower_bound(i, &plans[i])).collect();
        let out = slack_reclaim(&inst, &plans, &targets, &lower);
        prop_assert!(inst.is_feasible(&out));
        prop_assert!(inst.energy(&out) <= inst.energy(&plans));
        for i in 0..nodes {
            prop_assert!(out[i].first <= plans[i].first);
            prop_assert!(out[i].first >= lower[i] * (1.0 - 1e-12));
            prop_assert_eq!(out[i].is_reexecuted(), plans[i].is_reexecuted());
            if !targets.contains(&i) {
                prop_assert_eq!(out[i], plans[i]);
            }
        }
    }
}
