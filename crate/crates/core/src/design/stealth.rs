use ndarray::Array2;
use num_complex::Complex;

use super::{annulus, problem_scale, DesignResult, IMPROVEMENT_TOL, LS_REGULARIZATION, MAX_SWEEPS};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, solve};
use crate::propagation::{combine, ReflectionPattern};
use crate::scalar::{cis, unit_or, Scalar, C};
use crate::scenario::ReflectionMode;

fn cone<T: Scalar>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

fn residual_power<T: Scalar>(g: C<T>, h: &[C<T>], pattern: &ReflectionPattern<T>) -> T {
    combine(g, h, &pattern.coefficients()).norm_sqr()
}

/// Cyclic exact coordinate descent on `|g + Σ θ_n h_n|` over unit-modulus
/// `θ`. Returns `(sweeps, converged, objective after each sweep)`.
pub(crate) fn unit_cd_single<T: Scalar>(
    g: C<T>,
    h: &[C<T>],
    theta: &mut [C<T>],
    max_sweeps: usize,
) -> (usize, bool, Vec<T>) {
    let tol = T::of(IMPROVEMENT_TOL);
    let mut e = combine(g, h, theta);
    let mut obj = e.norm_sqr();
    let mut history = vec![obj];
    for sweep in 1..=max_sweeps {
        for (tn, hn) in theta.iter_mut().zip(h) {
            let mag = hn.norm();
            if mag == T::zero() {
                continue;
            }
            let r = e - *tn * hn;
            if r.norm() > T::zero() {
                // θ_n·h_n anti-parallel to the rest of the residual
                *tn = -(r / r.norm()) * (hn.conj() / mag);
            }
            e = r + *tn * hn;
        }
        e = combine(g, h, theta);
        let next = e.norm_sqr();
        history.push(next);
        let improvement = obj - next;
        obj = next;
        if improvement < tol {
            return (sweep, true, history);
        }
    }
    (max_sweeps, false, history)
}

/// Globally optimal unit-modulus solution of `min |g + Σ θ_n h_n|`.
///
/// The target `v = −g` is first projected onto the reachable annulus. Each
/// element is then placed so that what is left of `v` stays inside the
/// annulus reachable by the remaining elements; the last element closes
/// the sum exactly.
pub(crate) fn annulus_construction<T: Scalar>(g: C<T>, h: &[C<T>]) -> Vec<C<T>> {
    let mags: Vec<T> = h.iter().map(|z| z.norm()).collect();
    let (outer, inner) = annulus(h);
    let dir = unit_or(-g, cone());
    let mut v = dir * g.norm().max(inner).min(outer);
    let mut theta = Vec::with_capacity(h.len());
    for n in 0..h.len() {
        let m = mags[n];
        if m == T::zero() {
            theta.push(cone());
            continue;
        }
        let (rest_outer, rest_inner) = annulus(&h[n + 1..]);
        let vm = v.norm();
        let lo = rest_inner.max((vm - m).abs());
        let hi = rest_outer.min(vm + m);
        let rho = vm.max(lo).min(hi);
        // x_n closes the triangle (|v|, m, ρ); components along and across v
        // in factored form to avoid cancellation near degenerate triangles
        let x = if vm > T::zero() {
            let two_v = T::of(2.0) * vm;
            let m_minus_a = ((rho - vm + m) * (rho + vm - m) / two_v).max(T::zero());
            let m_plus_a = ((vm + m - rho) * (vm + m + rho) / two_v).max(T::zero());
            let along = m - m_minus_a;
            let across = (m_minus_a * m_plus_a).sqrt();
            (v / vm) * Complex::new(along, across)
        } else {
            dir * m
        };
        theta.push(unit_or(x / h[n], cone()));
        v -= x;
    }
    theta
}

/// Single-radar stealth design.
///
/// Unit-modulus: cyclic coordinate descent, each element set anti-phase to
/// the residual of all others, started from full reverse alignment, then
/// compared against the exact annulus construction.
/// Amplitude-adjustable: all elements reverse aligned with the common
/// amplitude `min(1, |g| / Σ|h_n|)`.
pub fn design_reverse_alignment<T: Scalar>(g: C<T>, h: &[C<T>], mode: ReflectionMode) -> Result<DesignResult<T>> {
    if h.is_empty() {
        return Err(Error::Dimension("reverse alignment needs at least one IRS element".into()));
    }
    let s = problem_scale(&[g], h.iter().copied());
    let gn = g / s;
    let hn: Vec<C<T>> = h.iter().map(|z| z / s).collect();
    let g_dir = unit_or(gn, cone());
    let aligned: Vec<C<T>> = hn.iter().map(|z| -g_dir * unit_or(z.conj(), cone())).collect();

    let (pattern, iterations, converged) = match mode {
        ReflectionMode::AmplitudeAdjustable => {
            let (outer, _) = annulus(&hn);
            let c = if outer > T::zero() { (gn.norm() / outer).min(T::one()) } else { T::zero() };
            let theta: Vec<C<T>> = aligned.iter().map(|z| z * c).collect();
            (ReflectionPattern::from_coefficients(&theta, mode), 0, true)
        }
        ReflectionMode::UnitModulus => {
            let mut theta = aligned;
            let (sweeps, converged, _) = unit_cd_single(gn, &hn, &mut theta, MAX_SWEEPS);
            let exact = annulus_construction(gn, &hn);
            if combine(gn, &hn, &exact).norm_sqr() < combine(gn, &hn, &theta).norm_sqr() {
                theta = exact;
            }
            (ReflectionPattern::from_coefficients(&theta, mode), sweeps, converged)
        }
    };
    Ok(DesignResult {
        objective: residual_power(g, h, &pattern),
        pattern,
        iterations,
        converged,
    })
}

fn check_multi<T: Scalar>(g: &[C<T>], h: &Array2<C<T>>) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Dimension("need at least one radar".into()));
    }
    if h.ncols() != g.len() {
        return Err(Error::Dimension(format!("{} echoes vs {} channel columns", g.len(), h.ncols())));
    }
    if h.nrows() == 0 {
        return Err(Error::Dimension("need at least one IRS element".into()));
    }
    Ok(())
}

/// `Σ_k |g_k + Σ_n θ_n h_{n,k}|²`
pub(crate) fn multi_objective<T: Scalar>(g: &[C<T>], h: &Array2<C<T>>, theta: &[C<T>]) -> T {
    g.iter()
        .enumerate()
        .map(|(k, &gk)| {
            h.column(k)
                .iter()
                .zip(theta)
                .fold(gk, |acc, (hn, tn)| acc + hn * tn)
                .norm_sqr()
        })
        .sum()
}

/// Regularized least-squares `argmin_θ Σ_k |g_k + h_kᵀθ|²` over all complex
/// `θ`, solved in whichever of the two equivalent normal-equation forms is
/// smaller.
fn regularized_ls<T: Scalar>(g: &[C<T>], h: &Array2<C<T>>) -> Result<Vec<C<T>>> {
    let (n, k) = h.dim();
    let lambda = T::of(LS_REGULARIZATION);
    if k <= n {
        // θ = −Aᴴ (A Aᴴ + λI)⁻¹ g with A = hᵀ
        let gram = Array2::from_shape_fn((k, k), |(i, j)| {
            let mut acc: C<T> = (0..n).map(|m| h[[m, i]] * h[[m, j]].conj()).sum();
            if i == j {
                acc += lambda;
            }
            acc
        });
        let y = solve(&gram, g, T::zero())?;
        Ok((0..n)
            .map(|m| -(0..k).map(|i| h[[m, i]].conj() * y[i]).sum::<C<T>>())
            .collect())
    } else {
        // (AᴴA + λI) θ = −Aᴴ g
        let gram = Array2::from_shape_fn((n, n), |(a, b)| {
            let mut acc: C<T> = (0..k).map(|i| h[[a, i]].conj() * h[[b, i]]).sum();
            if a == b {
                acc += lambda;
            }
            acc
        });
        let rhs: Vec<C<T>> = (0..n)
            .map(|a| -(0..k).map(|i| h[[a, i]].conj() * g[i]).sum::<C<T>>())
            .collect();
        solve(&gram, &rhs, T::zero())
    }
}

fn project<T: Scalar>(theta: &[C<T>], mode: ReflectionMode) -> Vec<C<T>> {
    theta
        .iter()
        .map(|&z| match mode {
            ReflectionMode::UnitModulus => unit_or(z, cone()),
            ReflectionMode::AmplitudeAdjustable => {
                if z.norm() > T::one() {
                    z / z.norm()
                } else {
                    z
                }
            }
        })
        .collect()
}

/// Exact minimum of `Σ_k |g_k + h_kᵀθ|²` over unconstrained complex `θ`:
/// the energy of `g` outside the range of `hᵀ`.
pub fn least_squares_objective<T: Scalar>(g: &[C<T>], h: &Array2<C<T>>) -> Result<T> {
    check_multi(g, h)?;
    let (n, k) = h.dim();
    let gram = Array2::from_shape_fn((k, k), |(i, j)| (0..n).map(|m| h[[m, i]] * h[[m, j]].conj()).sum::<C<T>>());
    let eig = hermitian_eigen(&gram)?;
    let top = eig.values.iter().copied().fold(T::zero(), T::max);
    let cut = top * T::of(1e-12);
    Ok((0..k)
        .filter(|&i| eig.values[i] <= cut)
        .map(|i| {
            (0..k)
                .map(|r| eig.vectors[[r, i]].conj() * g[r])
                .sum::<C<T>>()
                .norm_sqr()
        })
        .sum())
}

const REFINE_STEPS: usize = 200;

/// Levenberg–Marquardt refinement of the phases of a unit-modulus
/// multi-radar design. With `φ` real, the residual `r_k = g_k + Σ_n
/// h_{n,k}·exp(jφ_n)` has Jacobian `∂r_k/∂φ_n = j·h_{n,k}·θ_n`; the step
/// `Δφ = −Jᵀ(JJᵀ + λI)⁻¹r` is taken in the 2K-dimensional real residual
/// space. Only improving steps are kept.
fn phase_refine<T: Scalar>(g: &[C<T>], h: &Array2<C<T>>, theta: &mut [C<T>]) {
    let (n, k) = h.dim();
    let residual = |th: &[C<T>]| -> Vec<C<T>> {
        (0..k)
            .map(|i| (0..n).fold(g[i], |acc, m| acc + h[[m, i]] * th[m]))
            .collect()
    };
    let power = |r: &[C<T>]| r.iter().map(|z| z.norm_sqr()).sum::<T>();
    let mut r = residual(theta);
    let mut obj = power(&r);
    let mut lambda = T::of(1e-6);
    let j = Complex::new(T::zero(), T::one());
    for _ in 0..REFINE_STEPS {
        if obj == T::zero() {
            return;
        }
        // real Jacobian, rows (Re r_0, Im r_0, Re r_1, …), one column per element
        let jac: Vec<Vec<T>> = (0..k)
            .flat_map(|i| {
                let row: Vec<C<T>> = (0..n).map(|m| j * h[[m, i]] * theta[m]).collect();
                [row.iter().map(|z| z.re).collect::<Vec<T>>(), row.iter().map(|z| z.im).collect()]
            })
            .collect();
        let rv: Vec<T> = r.iter().flat_map(|z| [z.re, z.im]).collect();
        let dim = 2 * k;
        let jjt = Array2::from_shape_fn((dim, dim), |(a, b)| (0..n).map(|m| jac[a][m] * jac[b][m]).sum::<T>());
        let scale = (0..dim).map(|a| jjt[[a, a]]).fold(T::zero(), T::max);
        if !(scale > T::zero()) {
            return;
        }
        let mut improved = false;
        while lambda < T::of(1e12) {
            let sys = Array2::from_shape_fn((dim, dim), |(a, b)| {
                let v = jjt[[a, b]] + if a == b { lambda * scale } else { T::zero() };
                Complex::new(v, T::zero())
            });
            let rhs: Vec<C<T>> = rv.iter().map(|&v| Complex::new(v, T::zero())).collect();
            let Ok(y) = solve(&sys, &rhs, T::zero()) else {
                lambda *= T::of(10.0);
                continue;
            };
            let trial: Vec<C<T>> = (0..n)
                .map(|m| {
                    let step: T = (0..dim).map(|a| jac[a][m] * y[a].re).sum();
                    theta[m] * cis(-step)
                })
                .collect();
            let r_new = residual(&trial);
            let obj_new = power(&r_new);
            if obj_new < obj {
                theta.copy_from_slice(&trial);
                r = r_new;
                obj = obj_new;
                lambda = (lambda * T::of(0.1)).max(T::of(1e-15));
                improved = true;
                break;
            }
            lambda *= T::of(10.0);
        }
        if !improved {
            return;
        }
    }
}

/// Multi-radar stealth design: least squares, projection onto the feasible
/// set, then cyclic exact per-element updates. Unit-modulus designs are
/// finished with a damped Gauss–Newton refinement of the phases.
///
/// `h` is `N × K` (elements × radars).
pub fn design_mmse_multi<T: Scalar>(
    g: &[C<T>],
    h: &Array2<C<T>>,
    mode: ReflectionMode,
    max_iters: usize,
) -> Result<DesignResult<T>> {
    check_multi(g, h)?;
    let (n, k) = h.dim();
    let s = problem_scale(g, h.iter().copied());
    let gn: Vec<C<T>> = g.iter().map(|z| z / s).collect();
    let hn = h.mapv(|z| z / s);

    let ls = regularized_ls(&gn, &hn)?;
    let mut theta = project(&ls, mode);

    let col_energy: Vec<T> = (0..n).map(|m| hn.row(m).iter().map(|z| z.norm_sqr()).sum()).collect();
    let mut e: Vec<C<T>> = (0..k)
        .map(|i| (0..n).fold(gn[i], |acc, m| acc + hn[[m, i]] * theta[m]))
        .collect();
    let mut obj: T = e.iter().map(|z| z.norm_sqr()).sum();
    let tol = T::of(IMPROVEMENT_TOL);
    let mut iterations = 0;
    let mut converged = max_iters == 0 && obj == T::zero();
    for sweep in 1..=max_iters {
        iterations = sweep;
        for m in 0..n {
            if col_energy[m] == T::zero() {
                continue;
            }
            let old = theta[m];
            // c = Σ_k conj(h_{m,k})·(e_k − h_{m,k}θ_m)
            let c: C<T> = (0..k).map(|i| hn[[m, i]].conj() * (e[i] - hn[[m, i]] * old)).sum();
            let new = match mode {
                ReflectionMode::UnitModulus => {
                    if c.norm() > T::zero() {
                        -c / c.norm()
                    } else {
                        old
                    }
                }
                ReflectionMode::AmplitudeAdjustable => {
                    let z = -c / col_energy[m];
                    if z.norm() > T::one() {
                        z / z.norm()
                    } else {
                        z
                    }
                }
            };
            theta[m] = new;
            let delta = new - old;
            for (i, ei) in e.iter_mut().enumerate() {
                *ei += hn[[m, i]] * delta;
            }
        }
        e = (0..k)
            .map(|i| (0..n).fold(gn[i], |acc, m| acc + hn[[m, i]] * theta[m]))
            .collect();
        let next: T = e.iter().map(|z| z.norm_sqr()).sum();
        let improvement = obj - next;
        obj = next;
        if improvement < tol {
            converged = true;
            break;
        }
    }
    if mode == ReflectionMode::UnitModulus {
        phase_refine(&gn, &hn, &mut theta);
    }
    if k == 1 && mode == ReflectionMode::UnitModulus {
        let h0: Vec<C<T>> = hn.column(0).to_vec();
        let exact = annulus_construction(gn[0], &h0);
        if combine(gn[0], &h0, &exact).norm_sqr() < combine(gn[0], &h0, &theta).norm_sqr() {
            theta = exact;
        }
    }
    let pattern = ReflectionPattern::from_coefficients(&theta, mode);
    Ok(DesignResult {
        objective: multi_objective(g, h, &pattern.coefficients()),
        pattern,
        iterations,
        converged,
    })
}

/// Worst-angle echo suppression over `zone = (from, to)` degrees.
///
/// The zone is sampled every `grid_step` degrees; iteratively reweighted
/// least squares on [`design_mmse_multi`] with weights proportional to the
/// current per-angle power (30 rounds) drives the design towards the
/// minimax pattern. The best worst-angle pattern seen is returned, and its
/// worst-angle power is the objective.
pub fn design_null_zone<T, F>(
    channel_fn: F,
    zone: (T, T),
    grid_step: T,
    mode: ReflectionMode,
) -> Result<DesignResult<T>>
where
    T: Scalar,
    F: Fn(T) -> Result<(C<T>, Vec<C<T>>)>,
{
    const ROUNDS: usize = 30;
    let (lo, hi) = zone;
    if !(lo <= hi) {
        return Err(Error::range("zone", hi.to_f64_lossy(), "upper edge >= lower edge"));
    }
    if !(grid_step > T::zero()) {
        return Err(Error::range("grid_step", grid_step.to_f64_lossy(), "> 0"));
    }
    let mut angles = Vec::new();
    let mut i = 0usize;
    loop {
        let a = lo + grid_step * T::of_usize(i);
        if a > hi + grid_step * T::of(1e-9) {
            break;
        }
        angles.push(a.min(hi));
        i += 1;
    }
    let mut g = Vec::with_capacity(angles.len());
    let mut cols = Vec::with_capacity(angles.len());
    for &a in &angles {
        let (ga, ha) = channel_fn(a)?;
        g.push(ga);
        cols.push(ha);
    }
    let n = cols[0].len();
    if cols.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension("channel_fn returned inconsistent element counts".into()));
    }
    let h = Array2::from_shape_fn((n, angles.len()), |(m, k)| cols[k][m]);
    let per_angle = |theta: &[C<T>]| -> Vec<T> {
        (0..angles.len())
            .map(|k| combine(g[k], &cols[k], theta).norm_sqr())
            .collect()
    };

    let mut weights = vec![T::one(); angles.len()];
    let mut best: Option<DesignResult<T>> = None;
    let mut total_iters = 0;
    for _ in 0..ROUNDS {
        let root: Vec<T> = weights.iter().map(|w| w.sqrt()).collect();
        let gw: Vec<C<T>> = g.iter().zip(&root).map(|(z, r)| z * *r).collect();
        let hw = Array2::from_shape_fn(h.dim(), |(m, k)| h[[m, k]] * root[k]);
        let r = design_mmse_multi(&gw, &hw, mode, MAX_SWEEPS)?;
        total_iters += r.iterations;
        let powers = per_angle(&r.pattern.coefficients());
        let worst = powers.iter().copied().fold(T::zero(), T::max);
        if best.as_ref().is_none_or(|b| worst < b.objective) {
            best = Some(DesignResult {
                pattern: r.pattern,
                objective: worst,
                iterations: 0,
                converged: r.converged,
            });
        }
        if worst == T::zero() {
            break;
        }
        weights = powers.iter().map(|&p| p / worst).collect();
    }
    let mut best = best.expect("at least one round runs");
    best.iterations = total_iters;
    Ok(best)
}
