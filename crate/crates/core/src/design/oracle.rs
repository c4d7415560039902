//! Exhaustive search over discrete unit-modulus patterns.

use rayon::prelude::*;

use super::DesignResult;
use crate::error::{Error, Result};
use crate::propagation::ReflectionPattern;
use crate::scalar::{cis, Scalar, C};

/// Upper limit on `N·bits`.
pub const MAX_ENUMERATION_BITS: usize = 24;

const CHUNK: u64 = 1 << 14;

/// Budgeted objective for [`brute_force_best`]: maximize
/// `|offset + Σ θ_n gain_n|²` subject to `|g + Σ θ_n h_n|² ≤ budget`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoyObjective<T> {
    pub offset: C<T>,
    pub gain: Vec<C<T>>,
    pub budget: T,
}

#[derive(Clone, Copy)]
struct Best<T> {
    index: u64,
    value: T,
}

fn better<T: Scalar>(a: Option<Best<T>>, b: Option<Best<T>>, maximize: bool) -> Option<Best<T>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let x_wins = if x.value == y.value {
                x.index < y.index
            } else if maximize {
                x.value > y.value
            } else {
                x.value < y.value
            };
            Some(if x_wins { x } else { y })
        }
    }
}

/// Enumerate all `2^(N·bits)` phase patterns with phases `2πl / 2^bits`.
///
/// Without `decoy`, returns the pattern minimizing `|g + Σ θ_n h_n|²`
/// (objective: that power). With `decoy`, returns the feasible pattern
/// maximizing the decoy power (objective: that power). Ties go to the
/// lowest enumeration index, element 0 being the least significant digit.
pub fn brute_force_best<T: Scalar>(
    g: C<T>,
    h: &[C<T>],
    bits: u32,
    decoy: Option<&DecoyObjective<T>>,
) -> Result<DesignResult<T>> {
    let n = h.len();
    if bits == 0 {
        return Err(Error::range("bits", 0.0, ">= 1"));
    }
    let total = n * bits as usize;
    if total > MAX_ENUMERATION_BITS {
        return Err(Error::Size { bits: total });
    }
    if let Some(d) = decoy {
        if d.gain.len() != n {
            return Err(Error::Dimension(format!("{} decoy vs {} echo coefficients", d.gain.len(), n)));
        }
    }
    let levels = 1usize << bits;
    let phasors: Vec<C<T>> = (0..levels)
        .map(|l| cis(T::TAU() * T::of_usize(l) / T::of_usize(levels)))
        .collect();
    let hl: Vec<Vec<C<T>>> = h.iter().map(|z| phasors.iter().map(|p| z * p).collect()).collect();
    let tl: Option<Vec<Vec<C<T>>>> = decoy.map(|d| d.gain.iter().map(|z| phasors.iter().map(|p| z * p).collect()).collect());
    let mask = (levels - 1) as u64;
    let count: u64 = 1u64 << total;
    let chunks = count.div_ceil(CHUNK);

    let evaluate = |idx: u64| -> (T, T) {
        let mut e = g;
        let mut a = decoy.map(|d| d.offset).unwrap_or(g);
        let mut rest = idx;
        for m in 0..n {
            let l = (rest & mask) as usize;
            rest >>= bits;
            e += hl[m][l];
            if let Some(tl) = &tl {
                a += tl[m][l];
            }
        }
        (e.norm_sqr(), a.norm_sqr())
    };

    let maximize = decoy.is_some();
    let budget_ok = |q: T| match decoy {
        Some(d) => q <= d.budget * (T::one() + T::of(1e-9)),
        None => true,
    };
    let (best, min_leak) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut best: Option<Best<T>> = None;
            let mut min_leak: Option<Best<T>> = None;
            for idx in lo..hi {
                let (q, p) = evaluate(idx);
                min_leak = better(min_leak, Some(Best { index: idx, value: q }), false);
                if budget_ok(q) {
                    let value = if maximize { p } else { q };
                    best = better(best, Some(Best { index: idx, value }), maximize);
                }
            }
            (best, min_leak)
        })
        .reduce(
            || (None, None),
            |x, y| (better(x.0, y.0, maximize), better(x.1, y.1, false)),
        );

    let best = match best {
        Some(b) => b,
        None => {
            return Err(Error::Infeasible {
                budget: decoy.map(|d| d.budget.to_f64_lossy()).unwrap_or(0.0),
                bound: min_leak.map(|b| b.value.to_f64_lossy()).unwrap_or(f64::NAN),
            })
        }
    };
    let mut rest = best.index;
    let phases = (0..n)
        .map(|_| {
            let l = (rest & mask) as usize;
            rest >>= bits;
            T::TAU() * T::of_usize(l) / T::of_usize(levels)
        })
        .collect();
    Ok(DesignResult {
        pattern: ReflectionPattern {
            bits: Some(bits),
            ..ReflectionPattern::unit(phases)
        },
        objective: best.value,
        iterations: count as usize,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{design_reverse_alignment, optimal_residual_bound};
    use crate::propagation::combine;
    use crate::scenario::ReflectionMode;
    use crate::seeding::{complex_gaussian, rng_from};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn one_element_one_bit() {
        let one = Complex64::new(1.0, 0.0);
        let r = brute_force_best(one, &[one], 1, None).unwrap();
        assert!((r.pattern.phases[0] - PI).abs() < 1e-15);
        assert!(r.objective < 1e-30);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn size_limit() {
        let h = vec![Complex64::new(1.0, 0.0); 9];
        assert_eq!(brute_force_best(Complex64::new(1.0, 0.0), &h, 3, None).unwrap_err().category(), "size");
    }

    // Independent check of the enumeration: naive nested recursion.
    fn naive_min(g: Complex64, h: &[Complex64], bits: u32) -> f64 {
        let levels = 1 << bits;
        fn rec(acc: Complex64, h: &[Complex64], levels: usize) -> f64 {
            match h.split_first() {
                None => acc.norm_sqr(),
                Some((first, rest)) => (0..levels)
                    .map(|l| rec(acc + first * Complex64::from_polar(1.0, 2.0 * PI * l as f64 / levels as f64), rest, levels))
                    .fold(f64::INFINITY, f64::min),
            }
        }
        rec(g, h, levels)
    }

    #[test]
    fn matches_naive_enumeration_and_relaxation_order() {
        let mut rng = rng_from(9);
        for _ in 0..20 {
            let g = complex_gaussian(&mut rng, 4.0);
            let h: Vec<Complex64> = (0..6).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let r = brute_force_best(g, &h, 3, None).unwrap();
            assert!((r.objective - naive_min(g, &h, 3)).abs() < 1e-12);
            assert!(r.objective >= optimal_residual_bound(g, &h).powi(2) - 1e-12);
            let recomputed = combine(g, &h, &r.pattern.coefficients()).norm_sqr();
            assert!((recomputed - r.objective).abs() <= 1e-9 * r.objective.max(1e-12));
        }
    }

    #[test]
    fn continuous_design_dominates_discrete() {
        let mut rng = rng_from(10);
        for _ in 0..50 {
            let g = complex_gaussian(&mut rng, 4.0);
            let h: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let d = brute_force_best(g, &h, 3, None).unwrap();
            let c = design_reverse_alignment(g, &h, ReflectionMode::UnitModulus).unwrap();
            assert!(c.objective <= d.objective + 1e-9);
        }
    }

    #[test]
    fn decoy_oracle_respects_budget() {
        let mut rng = rng_from(12);
        let g = complex_gaussian(&mut rng, 4.0);
        let h: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let t: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let stealth = brute_force_best(g, &h, 3, None).unwrap().objective;
        let d = DecoyObjective { offset: Complex64::new(0.0, 0.0), gain: t.clone(), budget: 2.0 * stealth };
        let r = brute_force_best(g, &h, 3, Some(&d)).unwrap();
        let leak = combine(g, &h, &r.pattern.coefficients()).norm_sqr();
        assert!(leak <= 2.0 * stealth * (1.0 + 1e-9));
        let too_tight = DecoyObjective { budget: 0.5 * stealth, ..d };
        assert_eq!(brute_force_best(g, &h, 3, Some(&too_tight)).unwrap_err().category(), "infeasible");
    }

    #[test]
    fn spoof_reaches_discrete_optimum() {
        let mut worst = f64::INFINITY;
        for seed in 0..60u64 {
            let n = 2 + (seed as usize % 5);
            let mut rng = rng_from(1000 + seed);
            let g = complex_gaussian(&mut rng, 4.0);
            let h: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let t: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let delta = 2.0 * brute_force_best(g, &h, 3, None).unwrap().objective;
            let d = DecoyObjective { offset: Complex64::new(0.0, 0.0), gain: t.clone(), budget: delta };
            let oracle = brute_force_best(g, &h, 3, Some(&d)).unwrap().objective;
            let r = crate::design::design_spoof(g, &h, &t, delta).unwrap();
            worst = worst.min(r.objective / oracle);
        }
        assert!(worst >= 0.95, "worst ratio {worst}");
    }
}
