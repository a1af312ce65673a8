//! Polynomial heuristics choosing speeds and re-executions on a fixed mapping.
//!
//! Type A heuristics slow every task down first and then look for
//! re-executions; type B heuristics pick re-executions from the full-speed
//! schedule first and slow down afterwards.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::TaskGraph;
use crate::model::{f_re_ex, ExecutionPlan, PlatformModel};
use crate::scalar::Scalar;
use crate::schedule::{slack_reclaim, sus_sort, Instance, Mapping, Schedule, ScheduleMetrics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeuristicKind {
    HFmax,
    HNoReex,
    AGreedy,
    ASusCrit,
    BGreedy,
    BSusCrit,
    BSusCritSlow,
    Best,
}

impl HeuristicKind {
    /// The seven heuristics `Best` chooses from, in reporting order.
    pub const BASE: [HeuristicKind; 7] = [
        HeuristicKind::HFmax,
        HeuristicKind::HNoReex,
        HeuristicKind::AGreedy,
        HeuristicKind::ASusCrit,
        HeuristicKind::BGreedy,
        HeuristicKind::BSusCrit,
        HeuristicKind::BSusCritSlow,
    ];

    pub const ALL: [HeuristicKind; 8] = [
        HeuristicKind::HFmax,
        HeuristicKind::HNoReex,
        HeuristicKind::AGreedy,
        HeuristicKind::ASusCrit,
        HeuristicKind::BGreedy,
        HeuristicKind::BSusCrit,
        HeuristicKind::BSusCritSlow,
        HeuristicKind::Best,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::HFmax => "HFMAX",
            HeuristicKind::HNoReex => "HNO_REEX",
            HeuristicKind::AGreedy => "A_GREEDY",
            HeuristicKind::ASusCrit => "A_SUS_CRIT",
            HeuristicKind::BGreedy => "B_GREEDY",
            HeuristicKind::BSusCrit => "B_SUS_CRIT",
            HeuristicKind::BSusCritSlow => "B_SUS_CRIT_SLOW",
            HeuristicKind::Best => "BEST",
        }
    }

    pub fn is_type_a(self) -> bool {
        matches!(self, HeuristicKind::AGreedy | HeuristicKind::ASusCrit)
    }

    pub fn is_type_b(self) -> bool {
        matches!(self, HeuristicKind::BGreedy | HeuristicKind::BSusCrit | HeuristicKind::BSusCritSlow)
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace(['-', '.'], "_");
        HeuristicKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown heuristic {:?}", s)))
    }
}

/// Speeds shared by the heuristics of one instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedSpeeds<T> {
    /// Makespan with every task once at `f_max`.
    pub d_min: T,
    /// Slowest uniform speed meeting deadline and reliability.
    pub f_dec: T,
    pub f_re_ex: T,
}

pub fn derived_speeds<T: Scalar>(inst: &Instance<'_, T>) -> DerivedSpeeds<T> {
    let p = inst.platform();
    let d_min = inst.makespan(&vec![ExecutionPlan::once(p.f_max()); inst.len()]);
    let f_dec = p.f_rel().max(d_min / inst.deadline() * p.f_max()).min(p.f_max());
    DerivedSpeeds { d_min, f_dec, f_re_ex: f_re_ex(p.f_rel()) }
}

/// Applies `delta` to `plans` and reports whether the result meets the
/// deadline, every reliability threshold and every plan constraint.
pub fn feasibility_probe<T: Scalar>(
    inst: &Instance<'_, T>,
    plans: &[ExecutionPlan<T>],
    delta: &[(usize, ExecutionPlan<T>)],
) -> bool {
    let mut trial = plans.to_vec();
    for &(i, plan) in delta {
        trial[i] = plan;
    }
    inst.is_feasible(&trial)
}

/// Outcome of one heuristic.
#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicRun<T> {
    pub kind: HeuristicKind,
    /// For `Best`, the heuristic whose result was kept; otherwise `kind`.
    pub chosen: HeuristicKind,
    pub schedule: Schedule<T>,
    pub metrics: ScheduleMetrics<T>,
}

/// Runs one heuristic on a mapped graph.
pub fn run<T: Scalar>(
    kind: HeuristicKind,
    g: &TaskGraph<T>,
    mapping: &Mapping,
    deadline: T,
    platform: &PlatformModel<T>,
) -> Result<HeuristicRun<T>> {
    let inst = Instance::new(g, mapping, platform, deadline)?;
    run_on(kind, &inst)
}

/// Runs every heuristic of `kinds` on the same instance.
pub fn run_all<T: Scalar>(kinds: &[HeuristicKind], inst: &Instance<'_, T>) -> Result<Vec<HeuristicRun<T>>> {
    kinds.iter().map(|&k| run_on(k, inst)).collect()
}

pub fn run_on<T: Scalar>(kind: HeuristicKind, inst: &Instance<'_, T>) -> Result<HeuristicRun<T>> {
    let speeds = derived_speeds(inst);
    if !inst.meets_deadline(speeds.d_min) {
        return Err(Error::Infeasible(format!(
            "deadline {} is below the full-speed makespan {}",
            inst.deadline(),
            speeds.d_min
        )));
    }
    if kind == HeuristicKind::Best {
        let mut best: Option<HeuristicRun<T>> = None;
        for k in HeuristicKind::BASE {
            let r = run_on(k, inst)?;
            if best.as_ref().is_none_or(|b| r.metrics.energy < b.metrics.energy) {
                best = Some(r);
            }
        }
        let mut best = best.expect("at least one heuristic ran");
        best.kind = HeuristicKind::Best;
        return Ok(best);
    }
    let h = Heuristic { inst, speeds };
    let plans = match kind {
        HeuristicKind::HFmax => h.uniform(inst.platform().f_max()),
        HeuristicKind::HNoReex => h.uniform(speeds.f_dec),
        HeuristicKind::AGreedy => {
            let mut plans = h.uniform(speeds.f_dec);
            for t in h.greedy_list() {
                h.try_reexec(&mut plans, t);
            }
            h.reclaim_reexecuted(plans)
        }
        HeuristicKind::ASusCrit => {
            let mut plans = h.uniform(speeds.f_dec);
            for t in h.list_sw(&plans) {
                h.reexec_with_cohort(&mut plans, t, false);
            }
            // tasks off the critical paths get the greedy treatment
            for t in h.greedy_list() {
                if !plans[t].is_reexecuted() {
                    h.try_reexec(&mut plans, t);
                }
            }
            h.reclaim_reexecuted(plans)
        }
        HeuristicKind::BGreedy => h.b_greedy(h.uniform(inst.platform().f_max())),
        HeuristicKind::BSusCrit => {
            let mut plans = h.uniform(inst.platform().f_max());
            for t in h.list_sw(&plans) {
                h.reexec_with_cohort(&mut plans, t, false);
            }
            h.b_greedy(plans)
        }
        HeuristicKind::BSusCritSlow => {
            let mut plans = h.uniform(inst.platform().f_max());
            for t in h.list_sw(&plans) {
                h.reexec_with_cohort(&mut plans, t, true);
            }
            for t in h.greedy_list() {
                if plans[t].is_reexecuted() || h.try_reexec(&mut plans, t) {
                    continue;
                }
                plans = h.reclaim(&plans, &[t]);
            }
            h.reclaim_reexecuted(plans)
        }
        HeuristicKind::Best => unreachable!("handled above"),
    };
    debug_assert!(inst.is_feasible(&plans), "{} produced an infeasible schedule", kind);
    let metrics = inst.metrics(&plans);
    Ok(HeuristicRun {
        kind,
        chosen: kind,
        schedule: Schedule { mapping: inst.mapping().clone(), plans },
        metrics,
    })
}

struct Heuristic<'i, 'a, T> {
    inst: &'i Instance<'a, T>,
    speeds: DerivedSpeeds<T>,
}

impl<T: Scalar> Heuristic<'_, '_, T> {
    fn uniform(&self, f: T) -> Vec<ExecutionPlan<T>> {
        vec![ExecutionPlan::once(f); self.inst.len()]
    }

    /// All tasks by decreasing weight, smaller id first on ties.
    fn greedy_list(&self) -> Vec<usize> {
        let g = self.inst.graph();
        let mut list: Vec<usize> = (0..g.len()).collect();
        list.sort_by(|&a, &b| g.weight(b).partial_cmp(&g.weight(a)).unwrap().then(a.cmp(&b)));
        list
    }

    /// Critical-path tasks by decreasing super-weight.
    fn list_sw(&self, plans: &[ExecutionPlan<T>]) -> Vec<usize> {
        let crit = self.inst.critical_path(plans);
        let sw = self.inst.super_weights(plans);
        sus_sort(&crit, &sw, &self.inst.graph().weights())
    }

    /// Re-executes `t` at the re-execution speed if the schedule stays feasible.
    fn try_reexec(&self, plans: &mut [ExecutionPlan<T>], t: usize) -> bool {
        let plan = ExecutionPlan::twice(self.speeds.f_re_ex);
        if feasibility_probe(self.inst, plans, &[(t, plan)]) {
            plans[t] = plan;
            true
        } else {
            false
        }
    }

    /// Re-executes `t` and then, one by one, the tasks nested in its
    /// execution interval. When `t` itself cannot be re-executed and
    /// `slow_down` is set, `t` and those tasks are slowed down instead.
    fn reexec_with_cohort(&self, plans: &mut Vec<ExecutionPlan<T>>, t: usize, slow_down: bool) {
        if plans[t].is_reexecuted() {
            return;
        }
        let cohort = self.inst.cohort(plans, t);
        if self.try_reexec(plans, t) {
            for &j in &cohort {
                if j != t && !plans[j].is_reexecuted() {
                    self.try_reexec(plans, j);
                }
            }
        } else if slow_down {
            *plans = self.reclaim(plans, &cohort);
        }
    }

    fn reclaim(&self, plans: &[ExecutionPlan<T>], targets: &[usize]) -> Vec<ExecutionPlan<T>> {
        let lower: Vec<T> = (0..self.inst.len()).map(|i| self.inst.lower_bound(i, &plans[i])).collect();
        slack_reclaim(self.inst, plans, targets, &lower)
    }

    fn reclaim_reexecuted(&self, plans: Vec<ExecutionPlan<T>>) -> Vec<ExecutionPlan<T>> {
        let targets: Vec<usize> = (0..plans.len()).filter(|&i| plans[i].is_reexecuted()).collect();
        self.reclaim(&plans, &targets)
    }

    /// Greedy re-execution, then slowing down re-executed tasks, then the others.
    fn b_greedy(&self, mut plans: Vec<ExecutionPlan<T>>) -> Vec<ExecutionPlan<T>> {
        for t in self.greedy_list() {
            if !plans[t].is_reexecuted() {
                self.try_reexec(&mut plans, t);
            }
        }
        let plans = self.reclaim_reexecuted(plans);
        let single: Vec<usize> = (0..plans.len()).filter(|&i| !plans[i].is_reexecuted()).collect();
        self.reclaim(&plans, &single)
    }
}
