//! Mapping of tasks to processors and evaluation of speed assignments on a
//! fixed mapping.

mod instance;
mod reclaim;

pub use instance::{critical_path_tasks, evaluate, super_weight, sus_sort, Instance, ScheduleMetrics};
pub use reclaim::slack_reclaim;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::TaskGraph;
use crate::model::ExecutionPlan;
use crate::scalar::Scalar;

/// Ordered task list per processor. Every task appears exactly once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mapping {
    lists: Vec<Vec<usize>>,
    proc_of: Vec<usize>,
    position: Vec<usize>,
}

impl Mapping {
    /// `lists[p]` is the execution order on processor `p`; `n` is the task count.
    pub fn new(lists: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if lists.is_empty() {
            return Err(Error::InvalidMapping("no processors".into()));
        }
        let mut proc_of = vec![usize::MAX; n];
        let mut position = vec![0; n];
        for (p, list) in lists.iter().enumerate() {
            for (k, &t) in list.iter().enumerate() {
                if t >= n {
                    return Err(Error::InvalidMapping(format!("task {} does not exist", t)));
                }
                if proc_of[t] != usize::MAX {
                    return Err(Error::InvalidMapping(format!("task {} mapped twice", t)));
                }
                proc_of[t] = p;
                position[t] = k;
            }
        }
        if let Some(t) = proc_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidMapping(format!("task {} is not mapped", t)));
        }
        Ok(Mapping { lists, proc_of, position })
    }

    /// Task `i` alone on processor `i`.
    pub fn one_per_processor(n: usize) -> Self {
        Self::new((0..n).map(|i| vec![i]).collect(), n).expect("identity mapping is valid")
    }

    /// Every task on processor 0 in the given order.
    pub fn single_processor(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        Self::new(vec![order], n)
    }

    pub fn processors(&self) -> &[Vec<usize>] {
        &self.lists
    }

    pub fn proc_count(&self) -> usize {
        self.lists.len()
    }

    pub fn task_count(&self) -> usize {
        self.proc_of.len()
    }

    pub fn proc_of(&self, task: usize) -> usize {
        self.proc_of[task]
    }

    pub fn position(&self, task: usize) -> usize {
        self.position[task]
    }

    /// Task running right before `task` on the same processor.
    pub fn proc_predecessor(&self, task: usize) -> Option<usize> {
        let k = self.position[task];
        (k > 0).then(|| self.lists[self.proc_of[task]][k - 1])
    }

    /// Same mapping with processor ids permuted: list `p` moves to `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut lists = vec![Vec::new(); self.lists.len()];
        for (p, list) in self.lists.iter().enumerate() {
            lists[perm[p]] = list.clone();
        }
        Self::new(lists, self.task_count())
    }
}

/// Speed assignment on a fixed mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule<T> {
    pub mapping: Mapping,
    /// Indexed by task id.
    pub plans: Vec<ExecutionPlan<T>>,
}

impl<T: Scalar> Schedule<T> {
    /// Every task once at `speed`.
    pub fn uniform(mapping: Mapping, speed: T) -> Self {
        let n = mapping.task_count();
        Schedule { mapping, plans: vec![ExecutionPlan::once(speed); n] }
    }

    pub fn reexecuted(&self) -> Vec<usize> {
        (0..self.plans.len()).filter(|&i| self.plans[i].is_reexecuted()).collect()
    }

    /// One line per task: `id proc order speed1 [speed2]`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, plan) in self.plans.iter().enumerate() {
            write!(out, "{} {} {} {}", id, self.mapping.proc_of(id), self.mapping.position(id), plan.first).unwrap();
            if let Some(s) = plan.second {
                write!(out, " {}", s).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`Schedule::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 && f.len() != 5 {
                return Err(err(format!("expected `id proc order speed1 [speed2]`, got {:?}", line)));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("not an integer: {:?}", s)));
            let real = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| *v > 0.0)
                    .map(T::lit)
                    .ok_or_else(|| err(format!("not a positive speed: {:?}", s)))
            };
            let plan = ExecutionPlan { first: real(f[3])?, second: f.get(4).map(|s| real(s)).transpose()? };
            rows.push((int(f[0])?, int(f[1])?, int(f[2])?, plan));
        }
        let n = rows.len();
        let procs = rows.iter().map(|r| r.1 + 1).max().unwrap_or(1);
        let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); procs];
        let mut plans = vec![None; n];
        for (id, p, k, plan) in rows {
            if id >= n || plans[id].is_some() {
                return Err(Error::InvalidMapping(format!("task ids must be 0..{} without repeats", n)));
            }
            plans[id] = Some(plan);
            slots[p].push((k, id));
        }
        let lists = slots
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.into_iter().map(|(_, id)| id).collect()
            })
            .collect();
        Ok(Schedule {
            mapping: Mapping::new(lists, n)?,
            plans: plans.into_iter().map(|p| p.expect("checked above")).collect(),
        })
    }
}

/// Critical-path list scheduling at unit speed.
///
/// Event driven: whenever processors are idle, the ready task with the
/// largest bottom-level (smaller id on ties) goes to the idle processor with
/// the smallest id.
pub fn list_schedule<T: Scalar>(g: &TaskGraph<T>, procs: usize) -> Result<Mapping> {
    if procs == 0 {
        return Err(Error::InvalidMapping("need at least one processor".into()));
    }
    let n = g.len();
    let bl = g.bottom_levels();
    let mut lists = vec![Vec::new(); procs];
    let mut free_at = vec![T::zero(); procs];
    let mut finish = vec![T::zero(); n];
    let mut missing: Vec<usize> = (0..n).map(|i| g.predecessors(i).len()).collect();
    // tasks whose predecessors are all dispatched, with their data-ready time
    let mut pending: Vec<usize> = (0..n).filter(|&i| missing[i] == 0).collect();
    let mut ready_at = vec![T::zero(); n];
    let mut now = T::zero();
    let mut dispatched = 0;

    while dispatched < n {
        let mut ready: Vec<usize> = pending.iter().copied().filter(|&t| ready_at[t] <= now).collect();
        ready.sort_by(|&a, &b| bl[b].partial_cmp(&bl[a]).unwrap().then(a.cmp(&b)));
        let idle: Vec<usize> = (0..procs).filter(|&p| free_at[p] <= now).collect();
        for (p, t) in idle.into_iter().zip(ready) {
            lists[p].push(t);
            finish[t] = now + g.weight(t);
            free_at[p] = finish[t];
            pending.retain(|&x| x != t);
            dispatched += 1;
            for &s in g.successors(t) {
                missing[s] -= 1;
                ready_at[s] = ready_at[s].max(finish[t]);
                if missing[s] == 0 {
                    pending.push(s);
                }
            }
        }
        if dispatched == n {
            break;
        }
        // next instant at which a processor frees up or a task becomes ready
        let next_proc = free_at.iter().copied().filter(|&f| f > now).fold(T::infinity(), T::min);
        let next_task = pending.iter().map(|&t| ready_at[t]).filter(|&r| r > now).fold(T::infinity(), T::min);
        let any_idle = free_at.iter().any(|&f| f <= now);
        let any_ready = pending.iter().any(|&t| ready_at[t] <= now);
        now = match (any_idle, any_ready) {
            (true, false) => next_task.min(next_proc),
            (false, _) => next_proc,
            (true, true) => unreachable!("an idle processor and a ready task were left unmatched"),
        };
        debug_assert!(now.is_finite());
    }
    Mapping::new(lists, n)
}
