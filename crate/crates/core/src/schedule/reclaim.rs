use crate::model::ExecutionPlan;
use crate::scalar::Scalar;

use super::Instance;

const STRETCH_ITER: usize = 100;
const MAX_PASSES: usize = 200;

/// Slows the `targets` down as far as the deadline allows, never below
/// `lower[i]` and never above their current speed.
///
/// First every target is stretched by one common factor (found by
/// bisection), which spreads the slack evenly along shared paths. Then
/// repeated passes in reverse topological order give each target the whole
/// window between its earliest start and its latest finish, until no speed
/// moves by more than the step tolerance.
///
/// The input is expected to meet the deadline; the result then does too, and
/// its energy is no larger.
pub fn slack_reclaim<T: Scalar>(
    inst: &Instance<'_, T>,
    plans: &[ExecutionPlan<T>],
    targets: &[usize],
    lower: &[T],
) -> Vec<ExecutionPlan<T>> {
    let mut plans = plans.to_vec();
    if targets.is_empty() {
        return plans;
    }
    let deadline = inst.deadline();
    let base: Vec<T> = targets.iter().map(|&t| plans[t].first).collect();
    let stretched = |plans: &mut Vec<ExecutionPlan<T>>, alpha: T| {
        for (k, &t) in targets.iter().enumerate() {
            let s = (base[k] * alpha).max(lower[t]).min(base[k]);
            plans[t] = plans[t].with_speed(s);
        }
    };

    if inst.makespan(&plans) <= deadline {
        let mut trial = plans.clone();
        stretched(&mut trial, T::zero());
        if inst.makespan(&trial) <= deadline {
            plans = trial;
        } else {
            let (mut lo, mut hi) = (T::zero(), T::one());
            for _ in 0..STRETCH_ITER {
                let mid = (lo + hi) / T::lit(2.0);
                stretched(&mut trial, mid);
                if inst.makespan(&trial) <= deadline {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= T::epsilon() {
                    break;
                }
            }
            stretched(&mut plans, hi);
        }
    }

    let mut order: Vec<usize> = inst.order().iter().rev().copied().filter(|t| targets.contains(t)).collect();
    order.dedup();
    for _ in 0..MAX_PASSES {
        let mut changed = false;
        for &t in &order {
            let d = inst.durations(&plans);
            let start = inst.start_times(&d);
            let lf = inst.latest_finish(&d, deadline);
            let window = lf[t] - start[t];
            if !(window > T::zero()) {
                continue;
            }
            let plan = plans[t];
            let k = if plan.is_reexecuted() { T::lit(2.0) } else { T::one() };
            let cur = plan.first;
            let s = (k * inst.weight(t) / window).max(lower[t]).min(cur);
            if s < cur {
                if cur - s > T::STEP_TOL * cur {
                    changed = true;
                }
                plans[t] = plan.with_speed(s);
            }
        }
        if !changed {
            break;
        }
    }
    plans
}
