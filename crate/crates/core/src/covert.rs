//! IRS-assisted covert link: Alice transmits to Bob while Willie runs an
//! energy detector.
//!
//! Channels use the same non-conjugated convention as the radar side:
//! Bob receives `d_b + Σ_n θ_n r_{b,n}` and Willie `d_w + Σ_n θ_n r_{w,n}`.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::design::{constrained_ascent, min_leak_power, BudgetProblem, DesignResult};
use crate::error::{Error, Result};
use crate::geometry::{distance, PlanarArray, Vec3};
use crate::propagation::{combine, fspl_amplitude, ReflectionPattern};
use crate::scalar::{cis, dbm_to_mw, Scalar, C};
use crate::scenario::{irs_panel, ReflectionMode, SPEED_OF_LIGHT};
use crate::seeding::{complex_gaussian, derive_indexed, derive_seed, rng_from};

/// Trials per parallel work unit in [`willie_min_error_prob`].
pub const DETECTION_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fading {
    #[default]
    Los,
    Rayleigh,
}

/// Node placement and link budget of the covert scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct CovertGeometry<T> {
    #[serde(default = "alice_default")]
    pub alice: Vec3<T>,
    #[serde(default = "bob_default")]
    pub bob: Vec3<T>,
    #[serde(default = "willie_default")]
    pub willie: Vec3<T>,
    #[serde(default = "covert_irs_default")]
    pub irs: PlanarArray<T>,
    #[serde(default = "one")]
    pub element_amp_gain: T,
    #[serde(default = "tx_default")]
    pub tx_power_dbm: T,
    #[serde(default = "noise_default")]
    pub noise_b_dbm: T,
    #[serde(default = "noise_default")]
    pub noise_w_dbm: T,
    /// Extra loss on the two direct links (obstructed line of sight).
    #[serde(default = "blockage_default")]
    pub direct_blockage_db: T,
}

fn alice_default<T: Scalar>() -> Vec3<T> {
    [T::zero(); 3]
}

fn bob_default<T: Scalar>() -> Vec3<T> {
    [T::of(60.0), T::of(-10.0), T::zero()]
}

fn willie_default<T: Scalar>() -> Vec3<T> {
    [T::of(40.0), T::of(-25.0), T::zero()]
}

fn covert_irs_default<T: Scalar>() -> PlanarArray<T> {
    PlanarArray {
        center: [T::zero(), T::of(5.0), T::zero()],
        normal: [T::zero(), -T::one(), T::zero()],
        ..irs_panel(5, 10)
    }
}

fn one<T: Scalar>() -> T {
    T::one()
}

fn tx_default<T: Scalar>() -> T {
    T::of(15.0)
}

fn noise_default<T: Scalar>() -> T {
    T::of(-90.0)
}

fn blockage_default<T: Scalar>() -> T {
    T::of(30.0)
}

impl<T: Scalar> Default for CovertGeometry<T> {
    fn default() -> Self {
        Self {
            alice: alice_default(),
            bob: bob_default(),
            willie: willie_default(),
            irs: covert_irs_default(),
            element_amp_gain: one(),
            tx_power_dbm: tx_default(),
            noise_b_dbm: noise_default(),
            noise_w_dbm: noise_default(),
            direct_blockage_db: blockage_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CovertChannels<T> {
    pub d_b: C<T>,
    pub d_w: C<T>,
    pub r_b: Vec<C<T>>,
    pub r_w: Vec<C<T>>,
    /// Linear powers, mW.
    pub noise_b: T,
    pub noise_w: T,
    pub tx_power: T,
}

impl<T: Scalar> CovertChannels<T> {
    pub fn elements(&self) -> usize {
        self.r_b.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_w.len() != self.r_b.len() {
            return Err(Error::Dimension(format!("{} Bob vs {} Willie cascade coefficients", self.r_b.len(), self.r_w.len())));
        }
        for (name, v) in [("noise_b", self.noise_b), ("noise_w", self.noise_w)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::range(name, v.to_f64_lossy(), "> 0"));
            }
        }
        if !(self.tx_power >= T::zero()) || !self.tx_power.is_finite() {
            return Err(Error::range("tx_power", self.tx_power.to_f64_lossy(), ">= 0"));
        }
        Ok(())
    }

    /// Received signal power at Bob, mW.
    pub fn bob_power(&self, pattern: &ReflectionPattern<T>) -> T {
        self.tx_power * combine(self.d_b, &self.r_b, &pattern.coefficients()).norm_sqr()
    }

    /// Received signal power at Willie, mW.
    pub fn willie_power(&self, pattern: &ReflectionPattern<T>) -> T {
        self.tx_power * combine(self.d_w, &self.r_w, &pattern.coefficients()).norm_sqr()
    }
}

fn leg<T: Scalar>(a: Vec3<T>, b: Vec3<T>, wavelength: T) -> Result<C<T>> {
    let d = distance(a, b);
    Ok(cis(-T::TAU() * d / wavelength) * fspl_amplitude(d, wavelength)?)
}

/// One-way free-space channels. In Rayleigh mode every coefficient is
/// multiplied by its own unit-variance circular Gaussian factor, drawn in
/// the order `d_b, d_w, r_b[..], r_w[..]`.
pub fn synth_covert_channels<T: Scalar>(
    geometry: &CovertGeometry<T>,
    carrier_hz: T,
    fading: Fading,
    seed: u64,
) -> Result<CovertChannels<T>> {
    if !(carrier_hz > T::zero()) || !carrier_hz.is_finite() {
        return Err(Error::range("carrier_hz", carrier_hz.to_f64_lossy(), "> 0"));
    }
    if !(geometry.element_amp_gain > T::zero()) {
        return Err(Error::range("element_amp_gain", geometry.element_amp_gain.to_f64_lossy(), "> 0"));
    }
    if !geometry.direct_blockage_db.is_finite() || geometry.direct_blockage_db < T::zero() {
        return Err(Error::range("direct_blockage_db", geometry.direct_blockage_db.to_f64_lossy(), ">= 0"));
    }
    let wavelength = T::of(SPEED_OF_LIGHT) / carrier_hz;
    let irs = geometry.irs.normalized()?;
    let elements = irs.positions(wavelength);
    let tol = T::of(1e-9);
    let nodes = [("alice", geometry.alice), ("bob", geometry.bob), ("willie", geometry.willie)];
    for (i, (name, p)) in nodes.iter().enumerate() {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("{name} position must be finite")));
        }
        for (other, q) in &nodes[i + 1..] {
            if distance(*p, *q) <= tol {
                return Err(Error::Singularity(format!("{name} and {other} coincide")));
            }
        }
        if distance(*p, irs.center) <= tol || elements.iter().any(|e| distance(*p, *e) <= tol) {
            return Err(Error::Singularity(format!("{name} coincides with the IRS")));
        }
    }

    let blockage = T::of(10.0).powf(-geometry.direct_blockage_db / T::of(20.0));
    let mut d_b = leg(geometry.alice, geometry.bob, wavelength)? * blockage;
    let mut d_w = leg(geometry.alice, geometry.willie, wavelength)? * blockage;
    let gain = geometry.element_amp_gain;
    let cascade = |rx: Vec3<T>| -> Result<Vec<C<T>>> {
        elements
            .iter()
            .map(|&e| Ok(leg(geometry.alice, e, wavelength)? * leg(e, rx, wavelength)? * gain))
            .collect()
    };
    let mut r_b = cascade(geometry.bob)?;
    let mut r_w = cascade(geometry.willie)?;
    if fading == Fading::Rayleigh {
        let mut rng = rng_from(derive_seed(seed, "covert/fading"));
        d_b *= complex_gaussian::<T, _>(&mut rng, T::one());
        d_w *= complex_gaussian::<T, _>(&mut rng, T::one());
        for z in r_b.iter_mut().chain(r_w.iter_mut()) {
            *z *= complex_gaussian::<T, _>(&mut rng, T::one());
        }
    }
    let ch = CovertChannels {
        d_b,
        d_w,
        r_b,
        r_w,
        noise_b: dbm_to_mw(geometry.noise_b_dbm),
        noise_w: dbm_to_mw(geometry.noise_w_dbm),
        tx_power: dbm_to_mw(geometry.tx_power_dbm),
    };
    ch.validate()?;
    Ok(ch)
}

/// Maximize Bob's received power subject to Willie's received power
/// `≤ epsilon` (mW). The objective of the result is Bob's power in mW.
pub fn design_covert<T: Scalar>(
    ch: &CovertChannels<T>,
    epsilon: T,
    mode: ReflectionMode,
    max_iters: usize,
) -> Result<DesignResult<T>> {
    ch.validate()?;
    if !(epsilon >= T::zero()) {
        return Err(Error::range("epsilon", epsilon.to_f64_lossy(), ">= 0"));
    }
    if !(ch.tx_power > T::zero()) {
        return Err(Error::range("tx_power", ch.tx_power.to_f64_lossy(), "> 0"));
    }
    if max_iters == 0 {
        return Err(Error::range("max_iters", 0.0, ">= 1"));
    }
    let floor = ch.tx_power * min_leak_power(ch.d_w, &ch.r_w, mode);
    let problem = BudgetProblem {
        offset: ch.d_b,
        gain: &ch.r_b,
        echo: ch.d_w,
        leak: &ch.r_w,
        budget: epsilon / ch.tx_power,
    };
    match constrained_ascent(&problem, mode, max_iters) {
        Ok(r) => Ok(DesignResult {
            objective: ch.bob_power(&r.pattern),
            ..r
        }),
        Err(Error::Infeasible { .. }) => Err(Error::Infeasible {
            budget: epsilon.to_f64_lossy(),
            bound: floor.to_f64_lossy(),
        }),
        Err(e) => Err(e),
    }
}

/// `log2(1 + SNR_Bob)`
pub fn bob_rate<T: Scalar>(ch: &CovertChannels<T>, pattern: &ReflectionPattern<T>) -> Result<T> {
    if !(ch.noise_b > T::zero()) {
        return Err(Error::range("noise_b", ch.noise_b.to_f64_lossy(), "> 0"));
    }
    Ok((T::one() + ch.bob_power(pattern) / ch.noise_b).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub p_fa: f64,
    pub p_md: f64,
    /// `min_τ (p_fa + p_md)` over the pooled empirical statistics.
    pub xi: f64,
    /// Energy threshold attaining `xi`; Willie declares a transmission when
    /// the average energy is at or above it.
    pub threshold: f64,
    pub trials: usize,
    pub samples: usize,
    /// Willie's received signal power, mW.
    pub signal_power: f64,
    /// `xi` under a Gaussian approximation of both statistics.
    pub gaussian_xi: f64,
}

/// Unit-mean energy averages `(1/L)·Σ|z_l|²/σ²` for one trial. Each trial
/// owns the stream `derive_indexed(seed, "willie/energy", trial)`, so trials
/// with different `L` share their first samples.
fn unit_energy(seed: u64, trial: usize, samples: usize) -> f64 {
    let mut rng = rng_from(derive_indexed(seed, "willie/energy", trial as u64));
    let sum: f64 = (0..samples).map(|_| rng.sample::<f64, _>(Exp1)).sum();
    sum / samples as f64
}

/// Monte Carlo radiometer at Willie with Gaussian signaling.
///
/// Under H0 the per-sample observation is noise of power `noise_w`, under
/// H1 noise plus signal of power `p_w = tx_power·|d_w + Σθ r_w|²`. Both
/// hypotheses reuse the same exponential draws (scaled by their total
/// power), which keeps `xi` exactly monotone in `p_w` and makes it exactly
/// 1 at `p_w = 0`; each empirical error rate still uses only its own
/// hypothesis.
pub fn willie_min_error_prob<T: Scalar>(
    ch: &CovertChannels<T>,
    pattern: &ReflectionPattern<T>,
    samples: usize,
    trials: usize,
    seed: u64,
) -> Result<DetectionReport> {
    ch.validate()?;
    pattern.validate()?;
    if pattern.len() != ch.elements() {
        return Err(Error::Dimension(format!("{}-element pattern for {} IRS elements", pattern.len(), ch.elements())));
    }
    if samples == 0 {
        return Err(Error::range("samples", 0.0, ">= 1"));
    }
    if trials == 0 {
        return Err(Error::range("trials", 0.0, ">= 1"));
    }
    let noise = ch.noise_w.to_f64_lossy();
    let p_w = ch.willie_power(pattern).to_f64_lossy();
    let chunks = trials.div_ceil(DETECTION_CHUNK);
    let mut base: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let lo = c * DETECTION_CHUNK;
            let hi = (lo + DETECTION_CHUNK).min(trials);
            (lo..hi).map(move |t| unit_energy(seed, t, samples))
        })
        .collect();
    base.sort_by(f64::total_cmp);
    let h0: Vec<f64> = base.iter().map(|e| e * noise).collect();
    let h1: Vec<f64> = base.iter().map(|e| e * (noise + p_w)).collect();

    let n = trials as f64;
    // τ = +∞: never declare, p_fa = 0, p_md = 1
    let mut best = (1.0, 0.0, 1.0, f64::INFINITY);
    for &tau in h0.iter().chain(&h1) {
        let p_fa = (trials - h0.partition_point(|&x| x < tau)) as f64 / n;
        let p_md = h1.partition_point(|&x| x < tau) as f64 / n;
        let sum = p_fa + p_md;
        if sum < best.0 || (sum == best.0 && tau < best.3) {
            best = (sum, p_fa, p_md, tau);
        }
    }
    Ok(DetectionReport {
        p_fa: best.1,
        p_md: best.2,
        xi: best.0,
        threshold: best.3,
        trials,
        samples,
        signal_power: p_w,
        gaussian_xi: gaussian_xi(noise, noise + p_w, samples),
    })
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `min_τ [P(N(μ0, σ0²) ≥ τ) + P(N(μ1, σ1²) < τ)]` with `μ_i = s_i`,
/// `σ_i = s_i/√L`, minimized where the two densities cross.
pub fn gaussian_xi(s0: f64, s1: f64, samples: usize) -> f64 {
    if s1 <= s0 {
        return 1.0;
    }
    let l = samples as f64;
    let (m0, m1) = (s0, s1);
    let (v0, v1) = (s0 * s0 / l, s1 * s1 / l);
    // (τ−m0)²/v0 − (τ−m1)²/v1 = ln(v1/v0)
    let a = 1.0 / v0 - 1.0 / v1;
    let b = -2.0 * (m0 / v0 - m1 / v1);
    let c = m0 * m0 / v0 - m1 * m1 / v1 - (v1 / v0).ln();
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let roots = [q / a, c / q];
    let err = |tau: f64| normal_sf((tau - m0) / v0.sqrt()) + 1.0 - normal_sf((tau - m1) / v1.sqrt());
    roots
        .iter()
        .filter(|r| r.is_finite())
        .map(|&r| err(r))
        .fold(1.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::optimal_residual_bound;
    use num_complex::Complex64;
    use statrs::distribution::{ContinuousCDF, Gamma};

    fn los() -> CovertChannels<f64> {
        synth_covert_channels(&CovertGeometry::default(), 6e9, Fading::Los, 0).unwrap()
    }

    #[test]
    fn los_is_deterministic_and_reciprocal_in_form() {
        let a = los();
        let b = synth_covert_channels(&CovertGeometry::default(), 6e9, Fading::Los, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.elements(), 50);
        let lambda = SPEED_OF_LIGHT / 6e9;
        let d = distance(CovertGeometry::<f64>::default().alice, CovertGeometry::<f64>::default().bob);
        let expected = lambda / (4.0 * std::f64::consts::PI * d) * 10f64.powf(-1.5);
        assert!((a.d_b.norm() / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_nodes_rejected() {
        let mut g = CovertGeometry::<f64>::default();
        g.bob = g.irs.center;
        assert_eq!(synth_covert_channels(&g, 6e9, Fading::Los, 0).unwrap_err().category(), "singularity");
        let mut g = CovertGeometry::<f64>::default();
        g.willie = g.alice;
        assert_eq!(synth_covert_channels(&g, 6e9, Fading::Los, 0).unwrap_err().category(), "singularity");
    }

    #[test]
    fn rayleigh_unit_variance() {
        let los = los();
        let geometry = CovertGeometry::default();
        let mean: f64 = (0..10_000u64)
            .map(|s| synth_covert_channels(&geometry, 6e9, Fading::Rayleigh, s).unwrap().d_b.norm_sqr())
            .sum::<f64>()
            / 1e4;
        assert!((mean / los.d_b.norm_sqr() - 1.0).abs() < 0.03, "{}", mean / los.d_b.norm_sqr());
    }

    fn toy(d_w: Complex64, r_w: Vec<Complex64>) -> CovertChannels<f64> {
        CovertChannels {
            d_b: Complex64::from_polar(1.0, 0.4),
            d_w,
            r_b: vec![Complex64::from_polar(0.5, 1.0), Complex64::from_polar(0.25, -2.0), Complex64::from_polar(1.5, 3.0)],
            r_w,
            noise_b: 1.0,
            noise_w: 1.0,
            tx_power: 1.0,
        }
    }

    #[test]
    fn no_willie_channel_means_pure_alignment() {
        let z = Complex64::new(0.0, 0.0);
        let ch = toy(z, vec![z; 3]);
        let r = design_covert(&ch, 0.0, ReflectionMode::UnitModulus, 200).unwrap();
        let amp = ch.d_b.norm() + ch.r_b.iter().map(|z| z.norm()).sum::<f64>();
        assert!((r.objective - amp * amp).abs() < 1e-12);
        for (theta, r) in r.pattern.coefficients().iter().zip(&ch.r_b) {
            assert!((theta - Complex64::from_polar(1.0, ch.d_b.arg() - r.arg())).norm() < 1e-12);
        }
    }

    #[test]
    fn slack_budget_is_unconstrained() {
        let r_w = vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), Complex64::new(0.1, -0.1)];
        let d_w = Complex64::new(0.2, 0.2);
        let ch = toy(d_w, r_w.clone());
        let eps = (d_w.norm() + r_w.iter().map(|z| z.norm()).sum::<f64>()).powi(2);
        let r = design_covert(&ch, eps, ReflectionMode::UnitModulus, 200).unwrap();
        let amp = ch.d_b.norm() + ch.r_b.iter().map(|z| z.norm()).sum::<f64>();
        assert!((r.objective - amp * amp).abs() < 1e-9);
    }

    #[test]
    fn infeasible_budget_reports_stealth_floor() {
        let r_w = vec![Complex64::new(0.1, 0.0); 3];
        let ch = toy(Complex64::new(1.0, 0.0), r_w.clone());
        let floor = optimal_residual_bound(ch.d_w, &r_w).powi(2);
        match design_covert(&ch, 0.5 * floor, ReflectionMode::UnitModulus, 200).unwrap_err() {
            Error::Infeasible { budget, bound } => {
                assert_eq!(budget, 0.5 * floor);
                assert!((bound - floor).abs() < 1e-12);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn default_geometry_design_respects_budget() {
        let ch = los();
        let free = ch.tx_power * (ch.d_w.norm() + ch.r_w.iter().map(|z| z.norm()).sum::<f64>()).powi(2);
        let floor = ch.tx_power * min_leak_power(ch.d_w, &ch.r_w, ReflectionMode::UnitModulus);
        for frac in [0.0, 0.01, 0.1, 0.5] {
            let eps = floor + frac * (free - floor);
            for mode in [ReflectionMode::UnitModulus, ReflectionMode::AmplitudeAdjustable] {
                let r = design_covert(&ch, eps, mode, 200).unwrap();
                // a zero budget can only be met up to rounding at the channel scale
                let scale = ch.r_w.iter().chain([&ch.d_w]).map(|z| z.norm()).fold(0.0, f64::max);
                let abs = ch.tx_power * (1e-12 * scale).powi(2);
                assert!(ch.willie_power(&r.pattern) <= eps * (1.0 + 1e-6) + abs, "{frac} {mode:?}");
                assert!((ch.bob_power(&r.pattern) - r.objective).abs() <= 1e-12 * r.objective);
            }
        }
    }

    #[test]
    fn rate_examples() {
        let z = Complex64::new(0.0, 0.0);
        let mut ch = toy(z, vec![z; 3]);
        ch.r_b = vec![z; 3];
        let p = ReflectionPattern::unit(vec![0.0; 3]);
        ch.d_b = z;
        assert_eq!(bob_rate(&ch, &p).unwrap(), 0.0);
        ch.d_b = Complex64::new(1.0, 0.0);
        assert!((bob_rate(&ch, &p).unwrap() - 1.0).abs() < 1e-15);
        ch.d_b = Complex64::new(15f64.sqrt(), 0.0);
        assert!((bob_rate(&ch, &p).unwrap() - 4.0).abs() < 1e-12);
    }

    fn detect_channels(p_w: f64) -> CovertChannels<f64> {
        CovertChannels {
            d_b: Complex64::new(1.0, 0.0),
            d_w: Complex64::new(p_w.sqrt(), 0.0),
            r_b: vec![Complex64::new(0.0, 0.0)],
            r_w: vec![Complex64::new(0.0, 0.0)],
            noise_b: 1.0,
            noise_w: 1.0,
            tx_power: 1.0,
        }
    }

    #[test]
    fn silent_transmitter_is_undetectable() {
        let ch = detect_channels(0.0);
        let p = ReflectionPattern::unit(vec![0.0]);
        let r = willie_min_error_prob(&ch, &p, 10, 10_000, 3).unwrap();
        assert_eq!(r.xi, 1.0);
        assert_eq!(r.gaussian_xi, 1.0);
    }

    // exact law: the energy average is Gamma(L, scale s/L)
    fn exact_xi(s0: f64, s1: f64, l: usize) -> f64 {
        let g0 = Gamma::new(l as f64, l as f64 / s0).unwrap();
        let g1 = Gamma::new(l as f64, l as f64 / s1).unwrap();
        // densities cross at τ* = ln(s1/s0)·s0·s1/(s1−s0)
        let tau = (s1 / s0).ln() * s0 * s1 / (s1 - s0);
        g0.sf(tau) + g1.cdf(tau)
    }

    #[test]
    fn monte_carlo_matches_exact_and_gaussian() {
        for (snr, l) in [(0.2, 100), (0.5, 30), (1.0, 10)] {
            let ch = detect_channels(snr);
            let p = ReflectionPattern::unit(vec![0.0]);
            let r = willie_min_error_prob(&ch, &p, l, 100_000, 4).unwrap();
            let exact = exact_xi(1.0, 1.0 + snr, l);
            assert!((r.xi - exact).abs() < 0.01, "snr {snr}: {} vs {exact}", r.xi);
            assert!((r.gaussian_xi - exact).abs() < 0.03, "snr {snr}: gaussian {} vs {exact}", r.gaussian_xi);
            assert!((r.p_fa + r.p_md - r.xi).abs() < 1e-15);
            assert!(r.p_fa >= 0.0 && r.p_md >= 0.0 && r.xi <= 1.0);
        }
    }

    #[test]
    fn xi_monotone_in_signal_power_and_samples() {
        let p = ReflectionPattern::unit(vec![0.0]);
        let mut last = 1.0;
        for snr in [0.0, 0.01, 0.05, 0.1, 0.3, 1.0] {
            let r = willie_min_error_prob(&detect_channels(snr), &p, 20, 20_000, 5).unwrap();
            assert!(r.xi <= last, "{snr}: {} > {last}", r.xi);
            last = r.xi;
        }
        let a = willie_min_error_prob(&detect_channels(0.2), &p, 25, 20_000, 6).unwrap();
        let b = willie_min_error_prob(&detect_channels(0.2), &p, 100, 20_000, 6).unwrap();
        assert!(b.xi <= a.xi);
    }

    #[test]
    fn detection_is_deterministic() {
        let p = ReflectionPattern::unit(vec![0.0]);
        let ch = detect_channels(0.3);
        let a = willie_min_error_prob(&ch, &p, 16, 9000, 8).unwrap();
        let b = willie_min_error_prob(&ch, &p, 16, 9000, 8).unwrap();
        assert_eq!(a, b);
    }
}
