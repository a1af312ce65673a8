use approx::assert_relative_eq;
use proptest::prelude::*;
use tricrit::model::{
    compute_c, execution_failure, f_inf, f_re_ex, meets_reliability, reexec_window, single_task_optimal,
    DeadlineBreakpoints, ExecutionPlan, PlatformModel, Regime,
};
use tricrit::{Error, PlatformModel32, PlatformModel64};

fn platform(f_min: f64, d: f64) -> PlatformModel64 {
    PlatformModel::new(f_min, 1.0, 2.0 / 3.0, 1e-5, d, 1).unwrap()
}

/// Smallest feasible speed found by scanning a grid and then bisecting the
/// feasibility boundary next to the best grid point. Energy is increasing in
/// speed for a fixed number of executions, so this is the optimum.
fn grid_min_speed(lo: f64, hi: f64, feasible: impl Fn(f64) -> bool) -> Option<f64> {
    const STEPS: usize = 2000;
    let at = |k: usize| lo + (hi - lo) * k as f64 / STEPS as f64;
    let k = (0..=STEPS).find(|&k| feasible(at(k)))?;
    if k == 0 {
        return Some(lo);
    }
    let (mut a, mut b) = (at(k - 1), at(k));
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if feasible(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Some(b)
}

/// Brute-force single-task optimum: best of one execution and two.
fn brute_single(w: f64, deadline: f64, p: &PlatformModel64) -> Option<f64> {
    let once = grid_min_speed(p.f_rel(), p.f_max(), |f| w / f <= deadline).map(|f| w * f * f);
    let twice = reexec_window(w, p).and_then(|(lo, hi)| {
        let hi = hi * (1.0 - 1e-15);
        grid_min_speed(lo, hi, |f| 2.0 * w / f <= deadline).map(|f| 2.0 * w * f * f)
    });
    match (once, twice) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

#[test]
fn c_is_the_positive_root() {
    let c: f64 = compute_c();
    assert!((0.2837..=0.2839).contains(&c));
    assert!((7.0 * c.powi(3) + 21.0 * c * c - 3.0 * c - 1.0).abs() <= 1e-12);
    let c32: f32 = compute_c();
    assert!((c32 as f64 - c).abs() < 1e-6);
    assert_relative_eq!(f_re_ex(2.0 / 3.0), 2.0 * c / (1.0 + c) * 2.0 / 3.0, max_relative = 1e-15);
}

#[test]
fn f_re_ex_lies_in_the_reexecution_window() {
    let p = platform(0.1, 0.0);
    let (lo, hi) = reexec_window(5.0, &p).unwrap();
    let f = f_re_ex(p.f_rel());
    assert!(lo <= f && f < hi);
}

#[test]
fn breakpoints_are_ordered() {
    for &d in &[0.0, 1.0, 4.0] {
        let p = platform(1e-3, d);
        for &w in &[0.1, 1.0, 7.0] {
            let bp = DeadlineBreakpoints::of(w, &p);
            assert!(bp.d0 <= bp.d1 && bp.d1 < bp.d2 && bp.d2 < bp.d3, "{:?}", bp);
        }
    }
}

#[test]
fn case_table_walk() {
    let p = platform(1e-3, 0.0);
    let w = 2.0;
    let bp = DeadlineBreakpoints::of(w, &p);
    let cases = [
        (0.5 * (bp.d0 + bp.d1), Regime::Stretched),
        (0.5 * (bp.d1 + bp.d2), Regime::AtThreshold),
        (0.5 * (bp.d2 + bp.d3), Regime::ReexecStretched),
        (2.0 * bp.d3, Regime::ReexecFloor),
    ];
    for (d, regime) in cases {
        let o = single_task_optimal(w, d, &p).unwrap();
        assert_eq!(o.regime, regime, "deadline {}", d);
    }
    assert!(matches!(single_task_optimal(w, 0.9 * bp.d0, &p), Err(Error::Infeasible(_))));
}

#[test]
fn f_min_floor_takes_over_when_above_f_inf() {
    let p = platform(0.2, 0.0);
    let w = 1.0;
    assert!(f_inf(w, &p) < 0.2);
    let o = single_task_optimal(w, 1e6, &p).unwrap();
    assert_eq!(o.regime, Regime::ReexecFloor);
    assert_relative_eq!(o.plan.first, 0.2, max_relative = 1e-12);
}

#[test]
fn empty_window_means_no_reexecution() {
    // a huge task needs f_inf above f_rel / sqrt 2
    let p = PlatformModel::new(1e-3, 1.0, 2.0 / 3.0, 1e-2, 0.0, 1).unwrap();
    let w = 100.0;
    assert!(reexec_window(w, &p).is_none());
    let o = single_task_optimal(w, 1e6, &p).unwrap();
    assert_eq!(o.regime, Regime::AtThreshold);
}

#[test]
fn f32_agrees_with_f64() {
    let p64 = platform(1e-3, 0.5);
    let p32: PlatformModel32 = PlatformModel::new(1e-3, 1.0, 2.0 / 3.0, 1e-5, 0.5, 1).unwrap();
    for &w in &[0.5, 3.0] {
        assert!((f_inf(w as f32, &p32) as f64 - f_inf(w, &p64)).abs() <= 1e-4 * f_inf(w, &p64));
        for &d in &[1.0 * w, 5.0 * w, 20.0 * w, 5000.0 * w] {
            let a = single_task_optimal(w as f32, d as f32, &p32).unwrap().energy as f64;
            let b = single_task_optimal(w, d, &p64).unwrap().energy;
            assert!((a - b).abs() <= 1e-4 * b, "w={} d={} {} vs {}", w, d, a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn single_task_matches_brute_force(w in 0.05f64..20.0, scale in 1.0f64..60.0, d in 0.0f64..3.0, f_min in 1e-3f64..0.3) {
        let p = platform(f_min, d);
        let deadline = scale * w / p.f_max();
        let o = single_task_optimal(w, deadline, &p).unwrap();
        let brute = brute_single(w, deadline, &p).unwrap();
        prop_assert!(o.energy <= brute * (1.0 + 1e-9), "closed form {} above brute {}", o.energy, brute);
        prop_assert!((o.energy - brute).abs() <= 1e-6 * brute, "closed form {} vs brute {}", o.energy, brute);
        prop_assert!(o.plan.time(w) <= deadline * (1.0 + 1e-12));
        prop_assert!(meets_reliability(w, &o.plan, &p));
    }

    #[test]
    fn f_inf_solves_its_equation(w in 1e-3f64..1e3, d in 0.0f64..8.0) {
        let p = platform(1e-6, d);
        let f = f_inf(w, &p);
        let two = ExecutionPlan::twice(f);
        prop_assert!(meets_reliability(w, &two, &p));
        prop_assert!(!meets_reliability(w, &ExecutionPlan::twice(f * (1.0 - 1e-6)), &p));
        // squared single-execution failure at f_inf equals the threshold failure
        let lhs = execution_failure(w, f, &p).powi(2);
        let rhs = execution_failure(w, p.f_rel(), &p);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn energy_is_nonincreasing_in_deadline(w in 0.1f64..10.0, a in 1.0f64..80.0, b in 1.0f64..80.0) {
        let p = platform(1e-3, 0.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let e_lo = single_task_optimal(w, lo * w, &p).unwrap().energy;
        let e_hi = single_task_optimal(w, hi * w, &p).unwrap().energy;
        prop_assert!(e_hi <= e_lo * (1.0 + 1e-12));
    }
}
