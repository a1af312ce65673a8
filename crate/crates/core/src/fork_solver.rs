//! Exact solutions for independent tasks and forks, one task per processor.

use crate::error::{Error, Result};
use crate::model::{single_task_optimal, DeadlineBreakpoints, ExecutionPlan, PlatformModel, TaskOptimum};
use crate::scalar::Scalar;

/// Optimal plans for a fork whose source gets `deadline - d2` and whose
/// leaves all get `d2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForkSolution<T> {
    /// Time left to the leaves after the source finishes.
    pub d2: T,
    /// Source first, then the leaves in input order.
    pub plans: Vec<ExecutionPlan<T>>,
    pub energy: T,
}

/// Each task alone on its processor: the per-task optima are independent.
pub fn independent_tasks_optimal<T: Scalar>(
    weights: &[T],
    deadline: T,
    platform: &PlatformModel<T>,
) -> Result<(Vec<ExecutionPlan<T>>, T)> {
    let mut plans = Vec::with_capacity(weights.len());
    let mut total = T::zero();
    for &w in weights {
        let opt = single_task_optimal(w, deadline, platform)?;
        plans.push(opt.plan);
        total = total + opt.energy;
    }
    Ok((plans, total))
}

struct Split<T> {
    source: TaskOptimum<T>,
    leaves: Vec<TaskOptimum<T>>,
    energy: T,
}

fn split_at<T: Scalar>(w0: T, leaves: &[T], deadline: T, d2: T, platform: &PlatformModel<T>) -> Result<Split<T>> {
    let source = single_task_optimal(w0, deadline - d2, platform)?;
    let leaves = leaves
        .iter()
        .map(|&w| single_task_optimal(w, d2, platform))
        .collect::<Result<Vec<_>>>()?;
    let energy = source.energy + leaves.iter().map(|o| o.energy).sum::<T>();
    Ok(Split { source, leaves, energy })
}

/// Total fork energy when the leaves get `d2`, `None` if that split is infeasible.
pub fn fork_energy_at<T: Scalar>(w0: T, leaves: &[T], deadline: T, d2: T, platform: &PlatformModel<T>) -> Option<T> {
    split_at(w0, leaves, deadline, d2, platform).ok().map(|s| s.energy)
}

/// Minimum-energy schedule of a fork with source `w0` and the given leaves.
///
/// The split point `d2` ranges over `[max_i w_i / f_max, D - w0 / f_max]`.
/// Between consecutive regime changes of any task the energy reads
/// `K / (D - d2)^2 + K' / d2^2 + K''`, whose minimum is at
/// `d2 = D / (1 + (K / K')^(1/3))` clamped to the interval.
pub fn fork_optimal<T: Scalar>(w0: T, leaves: &[T], deadline: T, platform: &PlatformModel<T>) -> Result<ForkSolution<T>> {
    if leaves.is_empty() {
        let opt = single_task_optimal(w0, deadline, platform)?;
        return Ok(ForkSolution { d2: T::zero(), plans: vec![opt.plan], energy: opt.energy });
    }
    let f_max = platform.f_max();
    let lo = leaves.iter().map(|&w| w / f_max).fold(T::zero(), T::max);
    let hi = deadline - w0 / f_max;
    if lo > hi + T::DEDUP_TOL * T::one().max(deadline) {
        return Err(Error::Infeasible(format!(
            "fork needs at least {} time units, deadline is {}",
            lo + w0 / f_max,
            deadline
        )));
    }
    let hi = hi.max(lo);

    let mut points = vec![lo, hi];
    let source_bp = DeadlineBreakpoints::of(w0, platform).as_array();
    points.extend(source_bp.iter().map(|&b| deadline - b));
    for &w in leaves {
        points.extend(DeadlineBreakpoints::of(w, platform).as_array());
    }
    let mut points: Vec<T> = points.into_iter().filter(|p| p.is_finite() && *p >= lo && *p <= hi).collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = T::DEDUP_TOL * T::one().max(deadline);
    points.dedup_by(|b, a| *b - *a <= tol);

    let mut best: Option<(T, Split<T>)> = None;
    let mut consider = |d2: T| {
        if let Ok(split) = split_at(w0, leaves, deadline, d2, platform) {
            if best.as_ref().is_none_or(|(_, b)| split.energy < b.energy) {
                best = Some((d2, split));
            }
        }
    };
    if points.len() == 1 {
        consider(points[0]);
    }
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = (a + b) / T::lit(2.0);
        let Ok(shape) = split_at(w0, leaves, deadline, mid, platform) else {
            continue;
        };
        let (k_src, _) = shape.source.energy_shape(w0);
        let k_leaf: T = shape.leaves.iter().zip(leaves).map(|(o, &w)| o.energy_shape(w).0).sum();
        let d2 = if k_src > T::zero() && k_leaf > T::zero() {
            (deadline / (T::one() + (k_src / k_leaf).cbrt())).max(a).min(b)
        } else if k_leaf > T::zero() {
            b
        } else {
            a
        };
        consider(d2);
        consider(a);
        consider(b);
    }
    let (d2, split) = best.ok_or_else(|| Error::Infeasible("no admissible deadline split".into()))?;
    let mut plans = vec![split.source.plan];
    plans.extend(split.leaves.iter().map(|o| o.plan));
    Ok(ForkSolution { d2, plans, energy: split.energy })
}

/// Speeds of the closed-form solution for a fork of `n + 1` identical tasks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdenticalForkSolution<T> {
    pub f_src: T,
    pub f_leaf: T,
    pub energy: T,
}

/// Largest deadline for which no identical-fork task is re-executed.
pub fn identical_fork_limit<T: Scalar>(w: T, n: usize, platform: &PlatformModel<T>) -> T {
    let nf = T::from_usize_lossy(n);
    let r = nf.cbrt();
    let base = T::one() + r + r;
    w / platform.f_rel() * base * base.sqrt() / (T::one() + nf).sqrt()
}

/// Closed form for a fork of identical tasks (source plus `n >= 2` leaves),
/// valid while no task is re-executed.
pub fn identical_fork_closed_form<T: Scalar>(
    w: T,
    n: usize,
    deadline: T,
    platform: &PlatformModel<T>,
) -> Result<IdenticalForkSolution<T>> {
    if n < 2 {
        return Err(Error::NotApplicable(format!("need at least two leaves, got {}", n)));
    }
    let (f_max, f_rel) = (platform.f_max(), platform.f_rel());
    let d = deadline;
    let two = T::lit(2.0);
    if d < two * w / f_max * (T::one() - T::FEAS_TOL) {
        return Err(Error::Infeasible(format!("fork of weight {} needs at least {}", w, two * w / f_max)));
    }
    let limit = identical_fork_limit(w, n, platform);
    if d > limit {
        return Err(Error::NotApplicable(format!("deadline {} beyond {}", d, limit)));
    }
    let r = T::from_usize_lossy(n).cbrt();
    let a = w / f_max * (T::one() + r);
    let b = w * (T::one() / f_rel + T::one() / f_max);
    let (f_src, f_leaf) = if d <= a.min(b) {
        (f_max, (w * f_max / (d * f_max - w)).min(f_max))
    } else if a <= b && d <= w / f_rel * (T::one() + r) / r {
        let f_src = w / d * (T::one() + r);
        (f_src, f_src / r)
    } else if d <= two * w / f_rel {
        (w * f_rel / (d * f_rel - w), f_rel)
    } else {
        (f_rel, f_rel)
    };
    let energy = w * f_src * f_src + T::from_usize_lossy(n) * w * f_leaf * f_leaf;
    Ok(IdenticalForkSolution { f_src, f_leaf, energy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn platform() -> PlatformModel<f64> {
        PlatformModel::new(0.01, 1.0, 2.0 / 3.0, 1e-5, 0.0, 8).unwrap()
    }

    #[test]
    fn one_leaf_symmetric_split() {
        let p = platform();
        let s = fork_optimal(1.0, &[1.0], 2.5, &p).unwrap();
        assert_relative_eq!(s.d2, 1.25, max_relative = 1e-12);
        assert_relative_eq!(s.energy, 2.0 / 1.25f64.powi(2), max_relative = 1e-12);
    }

    #[test]
    fn identical_fork_first_case() {
        let p = platform();
        let c = identical_fork_closed_form(1.0, 2, 2.2, &p).unwrap();
        assert_eq!(c.f_src, 1.0);
        assert_relative_eq!(c.f_leaf, 1.0 / 1.2, max_relative = 1e-12);
        let s = fork_optimal(1.0, &[1.0, 1.0], 2.2, &p).unwrap();
        assert_relative_eq!(s.energy, c.energy, max_relative = 1e-9);
        assert_relative_eq!(s.plans[0].first, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn identical_fork_threshold_leaves() {
        let p = platform();
        let (w, n) = (1.0, 3usize);
        let r = (n as f64).cbrt();
        let d = 0.5 * (w / p.f_rel() * (1.0 + r) / r + 2.0 * w / p.f_rel());
        let c = identical_fork_closed_form(w, n, d, &p).unwrap();
        assert_relative_eq!(c.f_leaf, p.f_rel());
        assert_relative_eq!(c.f_src, w * p.f_rel() / (d * p.f_rel() - w), max_relative = 1e-12);
    }

    #[test]
    fn closed_form_domain() {
        let p = platform();
        assert!(matches!(identical_fork_closed_form(1.0, 2, 1.9, &p), Err(Error::Infeasible(_))));
        assert!(matches!(identical_fork_closed_form(1.0, 2, 100.0, &p), Err(Error::NotApplicable(_))));
        assert!(matches!(identical_fork_closed_form(1.0, 1, 3.0, &p), Err(Error::NotApplicable(_))));
        assert!(matches!(fork_optimal(1.0, &[1.0], 1.9, &p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn independent_tasks_match_single_task() {
        let p = platform();
        let (plans, e) = independent_tasks_optimal(&[1.0], 3.0, &p).unwrap();
        let single = single_task_optimal(1.0, 3.0, &p).unwrap();
        assert_eq!(plans[0], single.plan);
        assert_eq!(e, single.energy);
        let (plans, _) = independent_tasks_optimal(&[2.0, 2.0, 2.0], 5.0, &p).unwrap();
        assert!(plans.iter().all(|q| *q == plans[0]));
    }
}
