use crate::error::{Error, Result};
use crate::graph::{topological_sort, TaskGraph};
use crate::model::{execution_failure, plan_failure, reexec_window, reliability_checked, ExecutionPlan, PlatformModel};
use crate::scalar::{le_tol, Scalar};

use super::{Mapping, Schedule};

/// Times, energy and constraint verdicts of a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleMetrics<T> {
    pub makespan: T,
    pub energy: T,
    pub start: Vec<T>,
    pub finish: Vec<T>,
    /// `R_i - R_i(f_rel)`, computed on failure probabilities.
    pub reliability_slack: Vec<T>,
    pub deadline_met: bool,
    pub reliability_met: bool,
    /// Every plan respects the speed range and the re-execution window.
    pub plans_valid: bool,
    /// Deadline and reliability both met.
    pub feasible: bool,
}

/// A graph, a mapping, a platform and a deadline, with everything that does
/// not depend on the speeds precomputed.
///
/// Time quantities are evaluated on the augmented DAG whose edges are the
/// precedence edges plus one edge between consecutive tasks of a processor.
#[derive(Clone, Debug)]
pub struct Instance<'a, T> {
    graph: &'a TaskGraph<T>,
    mapping: &'a Mapping,
    platform: &'a PlatformModel<T>,
    deadline: T,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    order: Vec<usize>,
    windows: Vec<Option<(T, T)>>,
    fail_ref: Vec<T>,
}

impl<'a, T: Scalar> Instance<'a, T> {
    pub fn new(
        graph: &'a TaskGraph<T>,
        mapping: &'a Mapping,
        platform: &'a PlatformModel<T>,
        deadline: T,
    ) -> Result<Self> {
        let n = graph.len();
        if mapping.task_count() != n {
            return Err(Error::InvalidMapping(format!(
                "mapping covers {} tasks, graph has {}",
                mapping.task_count(),
                n
            )));
        }
        let mut preds: Vec<Vec<usize>> = (0..n).map(|i| graph.predecessors(i).to_vec()).collect();
        let mut succs: Vec<Vec<usize>> = (0..n).map(|i| graph.successors(i).to_vec()).collect();
        for list in mapping.processors() {
            for pair in list.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                if !succs[a].contains(&b) {
                    succs[a].push(b);
                    preds[b].push(a);
                }
            }
        }
        let order = topological_sort(n, |u| succs[u].iter().copied()).map_err(|e| match e {
            Error::Cycle { node } => Error::InvalidMapping(format!(
                "processor order contradicts precedence constraints around task {}",
                node
            )),
            other => other,
        })?;
        let windows = graph.tasks().iter().map(|t| reexec_window(t.weight, platform)).collect();
        let fail_ref = graph
            .tasks()
            .iter()
            .map(|t| execution_failure(t.weight, platform.f_rel(), platform))
            .collect();
        Ok(Instance { graph, mapping, platform, deadline, preds, succs, order, windows, fail_ref })
    }

    pub fn graph(&self) -> &'a TaskGraph<T> {
        self.graph
    }

    pub fn mapping(&self) -> &'a Mapping {
        self.mapping
    }

    pub fn platform(&self) -> &'a PlatformModel<T> {
        self.platform
    }

    pub fn deadline(&self) -> T {
        self.deadline
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn weight(&self, i: usize) -> T {
        self.graph.weight(i)
    }

    /// Topological order of the augmented DAG.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Admissible re-execution speeds of task `i`, `None` if it cannot be re-executed.
    pub fn window(&self, i: usize) -> Option<(T, T)> {
        self.windows[i]
    }

    pub fn can_reexecute(&self, i: usize) -> bool {
        self.windows[i].is_some()
    }

    /// Slowest speed task `i` may use under its current plan kind.
    pub fn lower_bound(&self, i: usize, plan: &ExecutionPlan<T>) -> T {
        match (plan.is_reexecuted(), self.windows[i]) {
            (true, Some((lo, _))) => lo,
            (true, None) => plan.first,
            (false, _) => self.platform.f_rel(),
        }
    }

    pub fn durations(&self, plans: &[ExecutionPlan<T>]) -> Vec<T> {
        (0..self.len()).map(|i| plans[i].time(self.weight(i))).collect()
    }

    /// Earliest start times.
    pub fn start_times(&self, durations: &[T]) -> Vec<T> {
        let mut start = vec![T::zero(); self.len()];
        for &u in &self.order {
            start[u] = self.preds[u].iter().map(|&p| start[p] + durations[p]).fold(T::zero(), T::max);
        }
        start
    }

    /// Latest finish times that keep every task done by `horizon`.
    pub fn latest_finish(&self, durations: &[T], horizon: T) -> Vec<T> {
        let mut lf = vec![horizon; self.len()];
        for &u in self.order.iter().rev() {
            lf[u] = self.succs[u].iter().map(|&s| lf[s] - durations[s]).fold(horizon, T::min);
        }
        lf
    }

    /// Length of the longest path strictly after each task.
    pub fn tails(&self, durations: &[T]) -> Vec<T> {
        let mut tail = vec![T::zero(); self.len()];
        for &u in self.order.iter().rev() {
            tail[u] = self.succs[u].iter().map(|&s| durations[s] + tail[s]).fold(T::zero(), T::max);
        }
        tail
    }

    pub fn makespan(&self, plans: &[ExecutionPlan<T>]) -> T {
        let d = self.durations(plans);
        let start = self.start_times(&d);
        (0..self.len()).map(|i| start[i] + d[i]).fold(T::zero(), T::max)
    }

    pub fn energy(&self, plans: &[ExecutionPlan<T>]) -> T {
        (0..self.len()).map(|i| plans[i].energy(self.weight(i))).sum()
    }

    pub fn meets_deadline(&self, makespan: T) -> bool {
        le_tol(makespan, self.deadline)
    }

    /// Reliability check with the slack measured relative to the threshold
    /// failure probability of the task.
    pub fn meets_reliability(&self, i: usize, plan: &ExecutionPlan<T>) -> bool {
        let reference = self.fail_ref[i];
        plan_failure(self.weight(i), plan, self.platform) <= reference * (T::one() + T::FEAS_TOL)
    }

    /// Speed range and re-execution window, using the cached window.
    pub fn plan_valid(&self, i: usize, plan: &ExecutionPlan<T>) -> bool {
        let tol = T::FEAS_TOL;
        let p = self.platform;
        match plan.second {
            None => plan.first >= p.f_rel() * (T::one() - tol) && plan.first <= p.f_max() * (T::one() + tol),
            Some(s) => match self.windows[i] {
                None => false,
                Some((lo, hi)) => (s - plan.first).abs() <= tol * s && s >= lo * (T::one() - tol) && s < hi,
            },
        }
    }

    /// Deadline, reliability and plan validity together.
    pub fn is_feasible(&self, plans: &[ExecutionPlan<T>]) -> bool {
        (0..self.len()).all(|i| self.plan_valid(i, &plans[i]) && self.meets_reliability(i, &plans[i]))
            && self.meets_deadline(self.makespan(plans))
    }

    pub fn metrics(&self, plans: &[ExecutionPlan<T>]) -> ScheduleMetrics<T> {
        let n = self.len();
        let d = self.durations(plans);
        let start = self.start_times(&d);
        let finish: Vec<T> = (0..n).map(|i| start[i] + d[i]).collect();
        let makespan = finish.iter().copied().fold(T::zero(), T::max);
        let mut reliability_met = true;
        let mut plans_valid = true;
        let mut slack = Vec::with_capacity(n);
        for (i, plan) in plans.iter().enumerate().take(n) {
            let w = self.weight(i);
            if let (_, Some(warn)) = reliability_checked(w, plan, self.platform) {
                log::warn!("task {}: first-order reliability is inaccurate (eps={:.3e})", i, warn.epsilon);
            }
            slack.push(self.fail_ref[i] - plan_failure(w, plan, self.platform));
            reliability_met &= self.meets_reliability(i, plan);
            plans_valid &= self.plan_valid(i, plan);
        }
        let deadline_met = self.meets_deadline(makespan);
        ScheduleMetrics {
            makespan,
            energy: self.energy(plans),
            start,
            finish,
            reliability_slack: slack,
            deadline_met,
            reliability_met,
            plans_valid,
            feasible: deadline_met && reliability_met,
        }
    }

    fn time_tol(&self, makespan: T) -> T {
        T::FEAS_TOL * T::one().max(makespan)
    }

    /// Tasks lying on a longest path of the augmented DAG under the current
    /// durations, in increasing id order.
    pub fn critical_path(&self, plans: &[ExecutionPlan<T>]) -> Vec<usize> {
        let d = self.durations(plans);
        let start = self.start_times(&d);
        let tail = self.tails(&d);
        let length: Vec<T> = (0..self.len()).map(|i| start[i] + d[i] + tail[i]).collect();
        let makespan = length.iter().copied().fold(T::zero(), T::max);
        let tol = self.time_tol(makespan);
        (0..self.len()).filter(|&i| length[i] >= makespan - tol).collect()
    }

    /// Tasks whose execution interval lies inside that of task `i`, `i` included.
    pub fn cohort(&self, plans: &[ExecutionPlan<T>], i: usize) -> Vec<usize> {
        let d = self.durations(plans);
        let start = self.start_times(&d);
        self.cohort_with(&start, &d, i)
    }

    fn cohort_with(&self, start: &[T], d: &[T], i: usize) -> Vec<usize> {
        let makespan = (0..self.len()).map(|j| start[j] + d[j]).fold(T::zero(), T::max);
        let tol = self.time_tol(makespan);
        let (lo, hi) = (start[i], start[i] + d[i]);
        (0..self.len())
            .filter(|&j| j == i || (start[j] >= lo - tol && start[j] + d[j] <= hi + tol))
            .collect()
    }

    /// Super-weight of every task: total weight of its cohort.
    pub fn super_weights(&self, plans: &[ExecutionPlan<T>]) -> Vec<T> {
        let d = self.durations(plans);
        let start = self.start_times(&d);
        (0..self.len())
            .map(|i| self.cohort_with(&start, &d, i).into_iter().map(|j| self.weight(j)).sum())
            .collect()
    }
}

/// Orders tasks by decreasing super-weight, then decreasing weight, then id.
pub fn sus_sort<T: Scalar>(tasks: &[usize], super_weights: &[T], weights: &[T]) -> Vec<usize> {
    let mut out = tasks.to_vec();
    out.sort_by(|&a, &b| {
        super_weights[b]
            .partial_cmp(&super_weights[a])
            .unwrap()
            .then(weights[b].partial_cmp(&weights[a]).unwrap())
            .then(a.cmp(&b))
    });
    out
}

/// Evaluates a schedule against a deadline.
pub fn evaluate<T: Scalar>(
    g: &TaskGraph<T>,
    schedule: &Schedule<T>,
    deadline: T,
    platform: &PlatformModel<T>,
) -> Result<ScheduleMetrics<T>> {
    check_plan_count(g, schedule)?;
    Ok(Instance::new(g, &schedule.mapping, platform, deadline)?.metrics(&schedule.plans))
}

/// Tasks on a critical path of the schedule.
pub fn critical_path_tasks<T: Scalar>(
    g: &TaskGraph<T>,
    schedule: &Schedule<T>,
    platform: &PlatformModel<T>,
) -> Result<Vec<usize>> {
    check_plan_count(g, schedule)?;
    Ok(Instance::new(g, &schedule.mapping, platform, T::infinity())?.critical_path(&schedule.plans))
}

/// Super-weight of one task.
pub fn super_weight<T: Scalar>(
    g: &TaskGraph<T>,
    schedule: &Schedule<T>,
    platform: &PlatformModel<T>,
    task: usize,
) -> Result<T> {
    check_plan_count(g, schedule)?;
    let inst = Instance::new(g, &schedule.mapping, platform, T::infinity())?;
    Ok(inst.cohort(&schedule.plans, task).into_iter().map(|j| g.weight(j)).sum())
}

fn check_plan_count<T: Scalar>(g: &TaskGraph<T>, schedule: &Schedule<T>) -> Result<()> {
    if schedule.plans.len() != g.len() {
        return Err(Error::InvalidPlan(format!("{} plans for {} tasks", schedule.plans.len(), g.len())));
    }
    Ok(())
}
