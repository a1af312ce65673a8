use approx::assert_relative_eq;
use proptest::prelude::*;
use tricrit::graph::generate_random;
use tricrit::heuristics::{run_on, HeuristicKind};
use tricrit::model::{execution_failure, ExecutionPlan, PlatformModel};
use tricrit::schedule::{list_schedule, Instance};
use tricrit::vdd::{continuous_to_vdd, reduce_to_two_speeds, vdd_schedule_convert, VddPlan};
use tricrit::{Error, PlatformModel64, VddPlan64};

fn platform(d: f64) -> PlatformModel64 {
    PlatformModel::new(0.1, 1.0, 2.0 / 3.0, 1e-5, d, 4).unwrap()
}

const MODES: [f64; 6] = [0.1, 0.25, 0.4, 0.6, 0.8, 1.0];

#[test]
fn worked_reduction() {
    let plan = VddPlan::new(vec![(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]);
    assert_relative_eq!(plan.energy(), 36.0);
    let r = reduce_to_two_speeds(&plan);
    assert_relative_eq!(r.energy(), 24.0, max_relative = 1e-12);
    assert_eq!(r.active(), 1);
    assert_relative_eq!(r.time(), 3.0, max_relative = 1e-12);
    assert_relative_eq!(r.work(), 6.0, max_relative = 1e-12);
}

#[test]
fn split_between_modes() {
    let p = platform(0.0);
    let v = continuous_to_vdd(0.7, 2.1, &MODES, &p, 1.0).unwrap();
    assert_eq!(v.active(), 2);
    assert_relative_eq!(v.time(), 3.0, max_relative = 1e-12);
    assert_relative_eq!(v.work(), 2.1, max_relative = 1e-12);
    let exact = continuous_to_vdd(0.6, 1.2, &MODES, &p, 1.0).unwrap();
    assert_eq!(exact.allocations, vec![(0.6, 2.0)]);
    assert!(matches!(continuous_to_vdd(1.2, 1.0, &MODES, &p, 1.0), Err(Error::SpeedOutOfRange { .. })));
}

#[test]
fn converted_schedule_meets_constraints() {
    for (seed, d) in [(1u64, 0.0), (2, 1.5), (3, 4.0)] {
        let g = generate_random(40, 80, (0.0, 10.0), seed).unwrap();
        let m = list_schedule(&g, 4).unwrap();
        let p = platform(d);
        let probe = Instance::new(&g, &m, &p, f64::INFINITY).unwrap();
        let dmin = probe.makespan(&vec![ExecutionPlan::once(1.0); g.len()]);
        let inst = Instance::new(&g, &m, &p, 3.0 * dmin).unwrap();
        let r = run_on(HeuristicKind::Best, &inst).unwrap();
        let v = vdd_schedule_convert(&g, &r.schedule, &MODES, 3.0 * dmin, &p).unwrap();
        assert!(v.feasible);
        assert!(v.makespan <= 3.0 * dmin * (1.0 + 1e-9));
        assert!(v.energy >= v.continuous_energy * (1.0 - 1e-12));
        assert!(v.overhead() >= -1e-12);
        for (i, execs) in v.plans.iter().enumerate() {
            let failure: f64 = execs.iter().map(|e| e.failure(&p)).product();
            assert!(failure <= execution_failure(g.weight(i), p.f_rel(), &p) * (1.0 + 1e-9));
        }
    }
}

fn multi_speed_plan() -> impl Strategy<Value = VddPlan64> {
    prop::collection::vec((0.05f64..2.0, 0.0f64..3.0), 1..7).prop_map(VddPlan::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reduction_laws(plan in multi_speed_plan(), d in 0.0f64..4.0) {
        let r = reduce_to_two_speeds(&plan);
        let distinct = {
            let mut s: Vec<f64> = plan.allocations.iter().filter(|a| a.1 > 0.0).map(|a| a.0).collect();
            s.sort_by(f64::total_cmp);
            s.dedup();
            s.len()
        };
        prop_assert!(r.active() <= 2.min(distinct.max(1)));
        prop_assert!((r.work() - plan.work()).abs() <= 1e-12 * plan.work().max(1e-300));
        prop_assert!(r.time() <= plan.time() * (1.0 + 1e-12));
        prop_assert!(r.energy() <= plan.energy() * (1.0 + 1e-12));
        prop_assert!(r.failure_term(d) <= plan.failure_term(d) * (1.0 + 1e-12));
    }

    #[test]
    fn discrete_costs_at_least_continuous(f in 0.1f64..1.0, w in 0.1f64..10.0, d in 0.0f64..3.0) {
        let p = platform(d);
        let v = continuous_to_vdd(f, w, &MODES, &p, 1.0).unwrap();
        prop_assert!((v.time() - w / f).abs() <= 1e-12 * (w / f));
        prop_assert!((v.work() - w).abs() <= 1e-12 * w);
        prop_assert!(v.energy() >= w * f * f * (1.0 - 1e-12));
    }

    #[test]
    fn promotion_meets_the_target(f in 0.1f64..1.0, w in 0.1f64..10.0, d in 0.5f64..4.0) {
        let p = platform(d);
        let target = execution_failure(w, f, &p);
        let v = continuous_to_vdd(f, w, &MODES, &p, target).unwrap();
        prop_assert!(v.failure(&p) <= target * (1.0 + 1e-9));
        prop_assert!(v.time() <= w / f * (1.0 + 1e-12));
    }
}
