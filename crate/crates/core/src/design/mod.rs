//! IRS reflection design.
//!
//! * [`design_reverse_alignment`]: single radar, cancel `g + Σ θ_n h_n`.
//! * [`design_mmse_multi`]: several radars, minimize `Σ_k |g_k + Σ_n θ_n h_{k,n}|²`.
//! * [`design_null_zone`]: minimax echo power over an angular zone.
//! * [`design_spoof`]: maximize a decoy return under a residual-echo budget.
//! * [`brute_force_best`]: exhaustive search over discrete phases, used as
//!   the reference the continuous designs are checked against.
//!
//! All designers rescale their inputs to unit magnitude internally, so the
//! stopping tolerances below are relative to the problem scale.

mod decoy;
mod oracle;
mod stealth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::ReflectionPattern;
use crate::scalar::{Scalar, C};
use crate::scenario::ReflectionMode;
use crate::seeding::{rng_from, uniform_phase};

pub use decoy::{constrained_ascent, design_spoof, min_leak_power, BudgetProblem};
pub use oracle::{brute_force_best, DecoyObjective, MAX_ENUMERATION_BITS};
pub use stealth::{design_mmse_multi, design_null_zone, design_reverse_alignment, least_squares_objective};

/// Stop once a sweep improves the (normalized) objective by less than this.
pub const IMPROVEMENT_TOL: f64 = 1e-12;
/// Sweep cap for the coordinate methods.
pub const MAX_SWEEPS: usize = 200;
/// Diagonal loading of the least-squares normal equations.
pub const LS_REGULARIZATION: f64 = 1e-12;
/// Relative slack allowed on power budgets.
pub const BUDGET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DesignResult<T> {
    pub pattern: ReflectionPattern<T>,
    /// Residual echo power for stealth designs, decoy (or Bob) power for
    /// budgeted designs, linear channel units.
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Exact `min_φ |g + Σ_n exp(jφ_n)·h_n|`.
///
/// The reachable set of `Σ exp(jφ_n)·h_n` is the annulus with outer radius
/// `U = Σ|h_n|` and inner radius `max(0, 2·max|h_n| − U)`.
pub fn optimal_residual_bound<T: Scalar>(g: C<T>, h: &[C<T>]) -> T {
    let (outer, inner) = annulus(h);
    let a = g.norm();
    if a > outer {
        a - outer
    } else if a < inner {
        inner - a
    } else {
        T::zero()
    }
}

pub(crate) fn annulus<T: Scalar>(h: &[C<T>]) -> (T, T) {
    let outer: T = h.iter().map(|z| z.norm()).sum();
    let hmax = h.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    (outer, (T::of(2.0) * hmax - outer).max(T::zero()))
}

/// Uniform i.i.d. phases, all amplitudes 1.
pub fn random_pattern<T: Scalar>(n: usize, seed: u64, mode: ReflectionMode) -> ReflectionPattern<T> {
    let mut rng = rng_from(seed);
    let phases = (0..n).map(|_| uniform_phase(&mut rng)).collect();
    ReflectionPattern {
        mode,
        ..ReflectionPattern::unit(phases)
    }
}

/// Snap every phase to the nearest multiple of `2π / 2^bits`, ties going to
/// the smaller phase. Amplitudes are untouched.
pub fn quantize_pattern<T: Scalar>(pattern: &ReflectionPattern<T>, bits: u32) -> Result<ReflectionPattern<T>> {
    if bits == 0 || bits > 24 {
        return Err(Error::range("bits", f64::from(bits), "1..=24"));
    }
    let levels = 1u64 << bits;
    let step = T::TAU() / T::of(levels as f64);
    let phases = pattern
        .phases
        .iter()
        .map(|&p| {
            let x = crate::scalar::wrap_phase(p) / step;
            let idx = (x - T::of(0.5)).ceil().to_u64().unwrap_or(0) % levels;
            step * T::of(idx as f64)
        })
        .collect();
    Ok(ReflectionPattern {
        phases,
        bits: Some(bits),
        ..pattern.clone()
    })
}

/// Scale of a (g, h) problem used for normalization; 1 when everything is 0.
pub(crate) fn problem_scale<T: Scalar>(g: &[C<T>], h: impl Iterator<Item = C<T>>) -> T {
    let s = g
        .iter()
        .copied()
        .chain(h)
        .map(|z| z.norm())
        .fold(T::zero(), T::max);
    if s > T::zero() && s.is_finite() {
        s
    } else {
        T::one()
    }
}
