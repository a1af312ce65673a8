//! Vdd-Hopping: executions split over a discrete set of speed modes.

use crate::error::{Error, Result};
use crate::graph::TaskGraph;
use crate::model::{execution_failure, ExecutionPlan, PlatformModel};
use crate::scalar::Scalar;
use crate::schedule::{Instance, Schedule};

/// Time spent in each mode by one execution of a task.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VddPlan<T> {
    /// `(mode speed, time at that speed)`.
    pub allocations: Vec<(T, T)>,
}

impl<T: Scalar> VddPlan<T> {
    pub fn new(allocations: Vec<(T, T)>) -> Self {
        VddPlan { allocations }
    }

    pub fn single(speed: T, time: T) -> Self {
        VddPlan { allocations: vec![(speed, time)] }
    }

    pub fn time(&self) -> T {
        self.allocations.iter().map(|&(_, a)| a).sum()
    }

    pub fn work(&self) -> T {
        self.allocations.iter().map(|&(f, a)| f * a).sum()
    }

    pub fn energy(&self) -> T {
        self.allocations.iter().map(|&(f, a)| f * f * f * a).sum()
    }

    /// `sum_j exp(-d f_j) alpha_j`; the failure probability is `lambda0` times this.
    pub fn failure_term(&self, d: T) -> T {
        self.allocations.iter().map(|&(f, a)| (-d * f).exp() * a).sum()
    }

    pub fn failure(&self, platform: &PlatformModel<T>) -> T {
        platform.lambda0() * self.failure_term(platform.d())
    }

    pub fn reliability(&self, platform: &PlatformModel<T>) -> T {
        T::one() - self.failure(platform)
    }

    /// Number of modes with a positive time share.
    pub fn active(&self) -> usize {
        self.allocations.iter().filter(|&&(_, a)| a > T::zero()).count()
    }

    /// Sorted by speed, equal speeds merged, empty shares dropped.
    pub fn normalized(&self) -> Self {
        let mut alloc: Vec<(T, T)> = self.allocations.iter().copied().filter(|&(_, a)| a > T::zero()).collect();
        alloc.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut out: Vec<(T, T)> = Vec::with_capacity(alloc.len());
        for (f, a) in alloc {
            match out.last_mut() {
                Some(last) if last.0 == f => last.1 = last.1 + a,
                _ => out.push((f, a)),
            }
        }
        VddPlan { allocations: out }
    }
}

/// Moves time from the two outer speeds of `f1 < f2 < f3` to the middle one
/// without changing the work or the total time. At least one outer share
/// drops to zero.
fn reduce_three<T: Scalar>(lo: (T, T), mid: (T, T), hi: (T, T)) -> [(T, T); 3] {
    let ((f1, a1), (f2, a2), (f3, a3)) = (lo, mid, hi);
    let e1 = a1.min(a3 * (f3 - f2) / (f2 - f1));
    let e3 = a3.min(a1 * (f2 - f1) / (f3 - f2));
    let (n1, n3) = if e1 == a1 { (T::zero(), a3 - e3) } else { (a1 - e1, T::zero()) };
    [(f1, n1), (f2, a2 + e1 + e3), (f3, n3)]
}

/// Rewrites a plan so that at most two speeds are used, repeatedly merging
/// the three slowest active speeds into fewer.
///
/// Work and total time are preserved; energy and the failure term do not
/// increase.
pub fn reduce_to_two_speeds<T: Scalar>(plan: &VddPlan<T>) -> VddPlan<T> {
    let mut cur = plan.normalized();
    while cur.allocations.len() > 2 {
        let a = &cur.allocations;
        let reduced = reduce_three(a[0], a[1], a[2]);
        let mut next: Vec<(T, T)> = reduced.to_vec();
        next.extend_from_slice(&a[3..]);
        cur = VddPlan::new(next).normalized();
    }
    cur
}

/// Splits one execution at continuous speed `f` over the two modes that
/// bracket it, keeping its time `w / f` and its work `w`.
///
/// If that split fails more often than `max_failure`, the execution is moved
/// wholly to the next faster modes until it complies.
pub fn continuous_to_vdd<T: Scalar>(
    f: T,
    w: T,
    modes: &[T],
    platform: &PlatformModel<T>,
    max_failure: T,
) -> Result<VddPlan<T>> {
    if modes.is_empty() {
        return Err(Error::InvalidPlatform("empty mode list".into()));
    }
    let top = modes[modes.len() - 1];
    if f > top * (T::one() + T::FEAS_TOL) {
        return Err(Error::SpeedOutOfRange {
            speed: f.to_f64_lossy(),
            min: modes[0].to_f64_lossy(),
            max: top.to_f64_lossy(),
        });
    }
    let limit = max_failure * (T::one() + T::FEAS_TOL);
    let complies = |p: &VddPlan<T>| p.failure(platform) <= limit;

    let b = modes.iter().position(|&m| m >= f * (T::one() - T::DEDUP_TOL)).unwrap_or(modes.len() - 1);
    let time = w / f;
    let plan = if b == 0 || (modes[b] - f).abs() <= T::DEDUP_TOL * f {
        VddPlan::single(modes[b], w / modes[b])
    } else {
        let (fa, fb) = (modes[b - 1], modes[b]);
        let alpha_b = (w - fa * time) / (fb - fa);
        VddPlan::new(vec![(fa, time - alpha_b), (fb, alpha_b)])
    };
    if complies(&plan) {
        return Ok(plan);
    }
    let start = if plan.allocations.len() == 2 { b } else { b + 1 };
    for &m in &modes[start.min(modes.len())..] {
        let p = VddPlan::single(m, w / m);
        if complies(&p) {
            return Ok(p);
        }
    }
    Err(Error::Infeasible(format!(
        "no mode keeps the failure probability of a task of weight {} below {}",
        w, max_failure
    )))
}

/// Discrete counterpart of a continuous schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct VddSchedule<T> {
    /// Per task, one plan per execution.
    pub plans: Vec<Vec<VddPlan<T>>>,
    pub energy: T,
    pub continuous_energy: T,
    pub makespan: T,
    pub feasible: bool,
}

impl<T: Scalar> VddSchedule<T> {
    /// Relative energy increase over the continuous schedule.
    pub fn overhead(&self) -> T {
        self.energy / self.continuous_energy - T::one()
    }
}

/// Converts every execution of a continuous schedule to Vdd-Hopping.
///
/// The reliability target of a single execution is the threshold failure
/// probability of the task; each of two executions gets its square root, so
/// that the pair meets the threshold.
pub fn vdd_schedule_convert<T: Scalar>(
    g: &TaskGraph<T>,
    schedule: &Schedule<T>,
    modes: &[T],
    deadline: T,
    platform: &PlatformModel<T>,
) -> Result<VddSchedule<T>> {
    let inst = Instance::new(g, &schedule.mapping, platform, deadline)?;
    let mut plans = Vec::with_capacity(g.len());
    let mut durations = Vec::with_capacity(g.len());
    let mut reliable = true;
    for (i, plan) in schedule.plans.iter().enumerate() {
        let w = g.weight(i);
        let reference = execution_failure(w, platform.f_rel(), platform);
        let execs = execution_speeds(plan);
        let target = if execs.len() == 2 { reference.sqrt() } else { reference };
        let converted = execs
            .iter()
            .map(|&f| continuous_to_vdd(f, w, modes, platform, target))
            .collect::<Result<Vec<_>>>()?;
        let failure = converted.iter().map(|p| p.failure(platform)).fold(T::one(), |acc, x| acc * x);
        reliable &= failure <= reference * (T::one() + T::FEAS_TOL);
        durations.push(converted.iter().map(|p| p.time()).sum());
        plans.push(converted);
    }
    let start = inst.start_times(&durations);
    let makespan = (0..g.len()).map(|i| start[i] + durations[i]).fold(T::zero(), T::max);
    let energy = plans.iter().flatten().map(|p| p.energy()).sum();
    Ok(VddSchedule {
        plans,
        energy,
        continuous_energy: inst.energy(&schedule.plans),
        makespan,
        feasible: reliable && inst.meets_deadline(makespan),
    })
}

fn execution_speeds<T: Scalar>(plan: &ExecutionPlan<T>) -> Vec<T> {
    std::iter::once(plan.first).chain(plan.second).collect()
}
