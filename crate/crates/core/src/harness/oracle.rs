use crate::error::{Error, Result};
use crate::model::{reexec_window, ExecutionPlan, PlatformModel};
use crate::scalar::{le_tol, Scalar};

/// Default size limit of the exhaustive chain oracle.
pub const CHAIN_ORACLE_MAX_N: usize = 12;

const LEVEL_ITER: usize = 200;

/// Minimum energy of a chain on one processor, with the chosen plans.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainOracle<T> {
    pub energy: T,
    pub plans: Vec<ExecutionPlan<T>>,
}

/// Exhaustive optimum for a chain on a single processor.
///
/// Every subset of re-executed tasks is tried. For a fixed subset the problem
/// is to minimize `sum v_i s_i^2` subject to `sum v_i / s_i <= D` and box
/// bounds on each `s_i`, where `v_i` is the work (doubled when re-executed).
/// Its optimum puts every task at a common level clamped to its box; the
/// level is found by bisection. The re-execution upper bound `f_rel / sqrt 2`
/// is treated as attainable, so the result never exceeds the true optimum.
pub fn chain_oracle<T: Scalar>(
    weights: &[T],
    deadline: T,
    platform: &PlatformModel<T>,
    max_n: usize,
) -> Result<ChainOracle<T>> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::InvalidGraph("empty chain".into()));
    }
    if n > max_n {
        return Err(Error::NotApplicable(format!("chain of {} tasks exceeds the limit of {}", n, max_n)));
    }
    let windows: Vec<Option<(T, T)>> = weights.iter().map(|&w| reexec_window(w, platform)).collect();
    let mut best: Option<ChainOracle<T>> = None;
    'subsets: for mask in 0u32..(1u32 << n) {
        let mut work = Vec::with_capacity(n);
        let mut bounds = Vec::with_capacity(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                let Some(win) = windows[i] else { continue 'subsets };
                work.push(weights[i] + weights[i]);
                bounds.push(win);
            } else {
                work.push(weights[i]);
                bounds.push((platform.f_rel(), platform.f_max()));
            }
        }
        let Some((energy, speeds)) = water_fill(&work, &bounds, deadline) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| energy < b.energy) {
            let plans = (0..n)
                .map(|i| if mask >> i & 1 == 1 { ExecutionPlan::twice(speeds[i]) } else { ExecutionPlan::once(speeds[i]) })
                .collect();
            best = Some(ChainOracle { energy, plans });
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no plan of the chain meets deadline {}", deadline)))
}

/// Minimizes `sum v_i s_i^2` with `sum v_i / s_i <= D` and `lo_i <= s_i <= hi_i`.
fn water_fill<T: Scalar>(work: &[T], bounds: &[(T, T)], deadline: T) -> Option<(T, Vec<T>)> {
    let time = |level: T| -> T { work.iter().zip(bounds).map(|(&v, &(lo, hi))| v / level.max(lo).min(hi)).sum() };
    let speeds_at = |level: T| -> Vec<T> { bounds.iter().map(|&(lo, hi)| level.max(lo).min(hi)).collect() };
    let floor = bounds.iter().map(|b| b.0).fold(T::infinity(), T::min);
    let ceil = bounds.iter().map(|b| b.1).fold(T::zero(), T::max);
    if !le_tol(time(ceil), deadline) {
        return None;
    }
    let level = if time(floor) <= deadline {
        floor
    } else {
        let (mut lo, mut hi) = (floor, ceil);
        for _ in 0..LEVEL_ITER {
            let mid = (lo + hi) / T::lit(2.0);
            if time(mid) <= deadline {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        // the optimum lies in [lo, hi]; lo keeps the result a lower bound
        lo
    };
    let speeds = speeds_at(level);
    let energy = work.iter().zip(&speeds).map(|(&v, &s)| v * s * s).sum();
    Some((energy, speeds))
}
