//! Closed-form physics of a single task: execution time, dynamic energy,
//! speed-dependent transient fault rate, first-order reliability, and the
//! exact single-task optimizer.
//!
//! A task of weight `w` executed at speed `f` runs for `w / f` time units and
//! consumes `w * f^2` energy. The fault rate is `lambda0 * exp(-d * f)`, and
//! the probability that one execution fails is approximated to first order by
//! `lambda(f) * w / f`. A task may be re-executed; both executions are always
//! budgeted in time and energy (worst case).

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Failure probability from which on the first-order reliability model is no
/// longer trusted.
pub const APPROXIMATION_LIMIT: f64 = 0.01;

const F_INF_MAX_ITER: usize = 200;

/// Speed model of the processors.
#[derive(Clone, Debug, PartialEq)]
pub enum SpeedModel<T> {
    /// Any speed in `[f_min, f_max]`.
    Continuous,
    /// Vdd-Hopping over a strictly increasing list of modes.
    Discrete(Vec<T>),
}

/// Homogeneous platform description.
#[derive(Clone, Debug, PartialEq)]
pub struct PlatformModel<T> {
    f_min: T,
    f_max: T,
    f_rel: T,
    lambda0: T,
    d: T,
    procs: usize,
    speeds: SpeedModel<T>,
}

impl<T: Scalar> PlatformModel<T> {
    /// Continuous-speed platform.
    ///
    /// `lambda0` is the fault-rate scale such that `lambda(f) = lambda0 * exp(-d f)`;
    /// `d` is the per-speed-unit sensitivity exponent.
    pub fn new(f_min: T, f_max: T, f_rel: T, lambda0: T, d: T, procs: usize) -> Result<Self> {
        let p = PlatformModel {
            f_min,
            f_max,
            f_rel,
            lambda0,
            d,
            procs,
            speeds: SpeedModel::Continuous,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same platform restricted to a discrete set of modes.
    pub fn with_modes(mut self, modes: Vec<T>) -> Result<Self> {
        self.speeds = SpeedModel::Discrete(modes);
        self.validate()?;
        Ok(self)
    }

    pub fn with_f_rel(mut self, f_rel: T) -> Result<Self> {
        self.f_rel = f_rel;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda0(mut self, lambda0: T) -> Result<Self> {
        self.lambda0 = lambda0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_procs(mut self, procs: usize) -> Result<Self> {
        self.procs = procs;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlatform(msg));
        let finite = [self.f_min, self.f_max, self.f_rel, self.lambda0, self.d]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite parameter".into());
        }
        if !(self.f_min > T::zero() && self.f_min <= self.f_rel && self.f_rel <= self.f_max) {
            return bad(format!(
                "need 0 < f_min <= f_rel <= f_max, got f_min={} f_rel={} f_max={}",
                self.f_min, self.f_rel, self.f_max
            ));
        }
        if self.lambda0 <= T::zero() {
            return bad(format!("lambda0 must be positive, got {}", self.lambda0));
        }
        if self.d < T::zero() {
            return bad(format!("d must be non-negative, got {}", self.d));
        }
        if self.procs == 0 {
            return bad("processor count must be positive".into());
        }
        if let SpeedModel::Discrete(modes) = &self.speeds {
            if modes.is_empty() {
                return bad("empty mode list".into());
            }
            if modes.windows(2).any(|w| w[0] >= w[1]) {
                return bad("modes must be strictly increasing".into());
            }
            if modes[0] < self.f_min || modes[modes.len() - 1] > self.f_max {
                return bad("modes must lie within [f_min, f_max]".into());
            }
        }
        Ok(())
    }

    pub fn f_min(&self) -> T {
        self.f_min
    }
    pub fn f_max(&self) -> T {
        self.f_max
    }
    pub fn f_rel(&self) -> T {
        self.f_rel
    }
    pub fn lambda0(&self) -> T {
        self.lambda0
    }
    pub fn d(&self) -> T {
        self.d
    }
    pub fn procs(&self) -> usize {
        self.procs
    }
    pub fn speeds(&self) -> &SpeedModel<T> {
        &self.speeds
    }

    /// `true` if `f` lies in `[f_min, f_max]` up to rounding.
    pub fn speed_in_range(&self, f: T) -> bool {
        let tol = T::FEAS_TOL;
        f >= self.f_min * (T::one() - tol) && f <= self.f_max * (T::one() + tol)
    }
}

/// A task of the application graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Task<T> {
    pub id: usize,
    pub weight: T,
}

/// Speeds of one task: a single execution, or an execution followed by a
/// re-execution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExecutionPlan<T> {
    pub first: T,
    pub second: Option<T>,
}

impl<T: Scalar> ExecutionPlan<T> {
    pub fn once(speed: T) -> Self {
        ExecutionPlan { first: speed, second: None }
    }

    /// Execution and re-execution at the same speed.
    pub fn twice(speed: T) -> Self {
        ExecutionPlan { first: speed, second: Some(speed) }
    }

    pub fn is_reexecuted(&self) -> bool {
        self.second.is_some()
    }

    /// Worst-case duration: both executions count when re-executed.
    pub fn time(&self, w: T) -> T {
        w / self.first + self.second.map_or(T::zero(), |s| w / s)
    }

    pub fn energy(&self, w: T) -> T {
        w * self.first * self.first + self.second.map_or(T::zero(), |s| w * s * s)
    }

    /// Same plan with every speed replaced by `speed`.
    pub fn with_speed(&self, speed: T) -> Self {
        ExecutionPlan { first: speed, second: self.second.map(|_| speed) }
    }

    /// Slowest speed used by the plan.
    pub fn min_speed(&self) -> T {
        self.second.map_or(self.first, |s| s.min(self.first))
    }
}

impl<T: fmt::Display> fmt::Display for ExecutionPlan<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.second {
            None => write!(f, "once@{}", self.first),
            Some(s) => write!(f, "twice@{}/{}", self.first, s),
        }
    }
}

pub fn exe_time<T: Scalar>(w: T, plan: &ExecutionPlan<T>) -> T {
    plan.time(w)
}

pub fn energy<T: Scalar>(w: T, plan: &ExecutionPlan<T>) -> T {
    plan.energy(w)
}

/// `lambda0 * exp(-d f)` for `f` in `[f_min, f_max]`.
pub fn fault_rate<T: Scalar>(f: T, platform: &PlatformModel<T>) -> Result<T> {
    if !platform.speed_in_range(f) {
        return Err(Error::SpeedOutOfRange {
            speed: f.to_f64_lossy(),
            min: platform.f_min.to_f64_lossy(),
            max: platform.f_max.to_f64_lossy(),
        });
    }
    Ok(platform.lambda0 * (-platform.d * f).exp())
}

/// First-order failure probability of one execution, `lambda(f) * w / f`.
///
/// Not range-checked; callers that need the domain check use [`fault_rate`].
pub fn execution_failure<T: Scalar>(w: T, f: T, platform: &PlatformModel<T>) -> T {
    platform.lambda0 * (-platform.d * f).exp() * w / f
}

/// Failure probability of a whole plan: a re-executed task fails only if both
/// executions fail.
pub fn plan_failure<T: Scalar>(w: T, plan: &ExecutionPlan<T>, platform: &PlatformModel<T>) -> T {
    let first = execution_failure(w, plan.first, platform);
    match plan.second {
        None => first,
        Some(s) => first * execution_failure(w, s, platform),
    }
}

/// Emitted when a single execution's failure probability is too large for
/// the first-order approximation to be accurate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityWarning {
    /// Largest per-execution failure probability seen in the plan.
    pub epsilon: f64,
}

/// Reliability and an optional model-validity warning.
pub fn reliability_checked<T: Scalar>(
    w: T,
    plan: &ExecutionPlan<T>,
    platform: &PlatformModel<T>,
) -> (T, Option<ValidityWarning>) {
    let eps1 = execution_failure(w, plan.first, platform);
    let eps2 = plan.second.map(|s| execution_failure(w, s, platform));
    let worst = eps2.map_or(eps1, |e| e.max(eps1));
    let value = T::one() - eps2.map_or(eps1, |e| e * eps1);
    let warning = (worst >= T::lit(APPROXIMATION_LIMIT))
        .then(|| ValidityWarning { epsilon: worst.to_f64_lossy() });
    (value, warning)
}

/// `1 - lambda(f) w / f` for one execution, `1 - (1 - R1)(1 - R2)` for two.
pub fn reliability<T: Scalar>(w: T, plan: &ExecutionPlan<T>, platform: &PlatformModel<T>) -> T {
    let (r, warning) = reliability_checked(w, plan, platform);
    if let Some(wn) = warning {
        log::warn!(
            "first-order reliability approximation is inaccurate (w={}, plan={}, eps={:.3e})",
            w,
            plan,
            wn.epsilon
        );
    }
    r
}

/// `R(plan) - R(once at f_rel)`, computed on failure probabilities to avoid
/// cancellation near 1.
pub fn reliability_slack<T: Scalar>(w: T, plan: &ExecutionPlan<T>, platform: &PlatformModel<T>) -> T {
    execution_failure(w, platform.f_rel, platform) - plan_failure(w, plan, platform)
}

pub fn meets_reliability<T: Scalar>(w: T, plan: &ExecutionPlan<T>, platform: &PlatformModel<T>) -> bool {
    let reference = execution_failure(w, platform.f_rel, platform);
    reliability_slack(w, plan, platform) >= -T::FEAS_TOL * reference
}

/// Slowest common speed at which two executions still meet the reliability
/// threshold: the root of `lambda0 w exp(-2 d f) / f^2 = exp(-d f_rel) / f_rel`.
pub fn f_inf<T: Scalar>(w: T, platform: &PlatformModel<T>) -> T {
    let lambda0 = platform.lambda0;
    let d = platform.d;
    let rhs = (-d * platform.f_rel).exp() / platform.f_rel;
    let lhs = |f: T| lambda0 * w * (-(d + d) * f).exp() / (f * f);

    // lhs is strictly decreasing on (0, inf)
    let mut hi = platform.f_rel;
    while lhs(hi) > rhs {
        hi = hi + hi;
    }
    let mut lo = hi;
    while lhs(lo) < rhs {
        lo = lo / T::lit(16.0);
    }
    let mut mid = (lo + hi) / T::lit(2.0);
    for _ in 0..F_INF_MAX_ITER {
        mid = (lo + hi) / T::lit(2.0);
        let g = lhs(mid) - rhs;
        if g.abs() <= T::ROOT_TOL * rhs {
            break;
        }
        if g > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Admissible re-execution speeds `[max(f_inf, f_min), f_rel / sqrt 2)`, or
/// `None` when that window is empty and the task cannot be re-executed.
pub fn reexec_window<T: Scalar>(w: T, platform: &PlatformModel<T>) -> Option<(T, T)> {
    let lo = f_inf(w, platform).max(platform.f_min);
    let hi = platform.f_rel * T::FRAC_1_SQRT_2();
    (lo < hi).then_some((lo, hi))
}

/// The constant `c ~ 0.2838`, positive root of `7y^3 + 21y^2 - 3y - 1`.
pub fn compute_c<T: Scalar>() -> T {
    let seven = T::lit(7.0);
    let inner = (T::PI() - (T::one() / seven.sqrt()).atan()) / T::lit(3.0);
    T::lit(4.0) * (T::lit(2.0) / seven).sqrt() * inner.cos() - T::one()
}

/// Re-execution speed used by the heuristics: `2c / (1 + c) * f_rel`.
pub fn f_re_ex<T: Scalar>(f_rel: T) -> T {
    let c = compute_c::<T>();
    (c + c) / (T::one() + c) * f_rel
}

/// Checks the speed-range and re-execution window constraints on a plan.
pub fn check_plan<T: Scalar>(w: T, plan: &ExecutionPlan<T>, platform: &PlatformModel<T>) -> Result<()> {
    let tol = T::FEAS_TOL;
    match plan.second {
        None => {
            let f = plan.first;
            if f < platform.f_rel * (T::one() - tol) || f > platform.f_max * (T::one() + tol) {
                return Err(Error::InvalidPlan(format!(
                    "single execution at {} outside [f_rel, f_max] = [{}, {}]",
                    f, platform.f_rel, platform.f_max
                )));
            }
        }
        Some(s) => {
            if (s - plan.first).abs() > tol * s {
                return Err(Error::InvalidPlan(format!(
                    "re-execution speeds differ: {} vs {}",
                    plan.first, s
                )));
            }
            let Some((lo, hi)) = reexec_window(w, platform) else {
                return Err(Error::InvalidPlan(format!("task of weight {} cannot be re-executed", w)));
            };
            if s < lo * (T::one() - tol) || s >= hi {
                return Err(Error::InvalidPlan(format!(
                    "re-execution speed {} outside [{}, {})",
                    s, lo, hi
                )));
            }
        }
    }
    Ok(())
}

/// Deadlines at which the optimal single-task strategy changes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeadlineBreakpoints<T> {
    /// `w / f_max`: below this there is no solution.
    pub d0: T,
    /// `w / f_rel`
    pub d1: T,
    /// `2 sqrt(2) w / f_rel`: beyond this re-execution pays off.
    pub d2: T,
    /// `2 w / f_floor` where `f_floor = max(f_inf, f_min)`.
    pub d3: T,
}

impl<T: Scalar> DeadlineBreakpoints<T> {
    /// When the re-execution window is empty, `d2` and `d3` are infinite.
    pub fn of(w: T, platform: &PlatformModel<T>) -> Self {
        let d0 = w / platform.f_max;
        let d1 = w / platform.f_rel;
        match reexec_window(w, platform) {
            Some((floor, _)) => DeadlineBreakpoints {
                d0,
                d1,
                d2: T::lit(2.0) * T::SQRT_2() * w / platform.f_rel,
                d3: (w + w) / floor,
            },
            None => DeadlineBreakpoints { d0, d1, d2: T::infinity(), d3: T::infinity() },
        }
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.d0, self.d1, self.d2, self.d3]
    }
}

/// Which of the single-task cases is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Once at `w / D`.
    Stretched,
    /// Once at `f_rel`.
    AtThreshold,
    /// Twice at `2 w / D`.
    ReexecStretched,
    /// Twice at the slowest admissible re-execution speed.
    ReexecFloor,
}

/// Optimal plan of a single task for a given deadline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaskOptimum<T> {
    pub plan: ExecutionPlan<T>,
    pub energy: T,
    pub regime: Regime,
}

impl<T: Scalar> TaskOptimum<T> {
    /// Energy written as `k / D^2 + k_const` for the active regime.
    pub fn energy_shape(&self, w: T) -> (T, T) {
        let w3 = w * w * w;
        match self.regime {
            Regime::Stretched => (w3, T::zero()),
            Regime::ReexecStretched => (T::lit(8.0) * w3, T::zero()),
            Regime::AtThreshold | Regime::ReexecFloor => (T::zero(), self.energy),
        }
    }
}

/// Minimum-energy plan for one task of weight `w` alone on a processor with
/// deadline `deadline`.
pub fn single_task_optimal<T: Scalar>(w: T, deadline: T, platform: &PlatformModel<T>) -> Result<TaskOptimum<T>> {
    if !(w > T::zero()) || !(deadline > T::zero()) {
        return Err(Error::InvalidPlan(format!("need w > 0 and D > 0, got w={} D={}", w, deadline)));
    }
    let bp = DeadlineBreakpoints::of(w, platform);
    if deadline < bp.d0 * (T::one() - T::FEAS_TOL) {
        return Err(Error::Infeasible(format!(
            "task of weight {} needs at least {} time units, deadline is {}",
            w, bp.d0, deadline
        )));
    }
    let two = T::lit(2.0);
    let opt = if deadline <= bp.d1 {
        let f = (w / deadline).min(platform.f_max);
        TaskOptimum { plan: ExecutionPlan::once(f), energy: w * f * f, regime: Regime::Stretched }
    } else if deadline <= bp.d2 {
        let f = platform.f_rel;
        TaskOptimum { plan: ExecutionPlan::once(f), energy: w * f * f, regime: Regime::AtThreshold }
    } else if deadline <= bp.d3 {
        let f = two * w / deadline;
        TaskOptimum { plan: ExecutionPlan::twice(f), energy: two * w * f * f, regime: Regime::ReexecStretched }
    } else {
        let f = two * w / bp.d3;
        TaskOptimum { plan: ExecutionPlan::twice(f), energy: two * w * f * f, regime: Regime::ReexecFloor }
    };
    Ok(opt)
}
