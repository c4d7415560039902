//! Channel synthesis for the mono-static radar scenarios.
//!
//! Per radar `k` the radar receives
//!
//! ```text
//! e_k = g_k + Σ_n β_n·exp(jφ_n)·h_{k,n}
//! ```
//!
//! where `g_k` is the echo of the absorbing surface and `h_{k,n}` the
//! round-trip cascade through IRS element `n`. The radar's conjugate
//! beamforming gain is folded into both as the amplitude factor `M`.

use ndarray::{Array2, Array3};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Vec3};
use crate::scalar::{cis, dbm_to_mw, mw_to_dbm, wrap_phase, Scalar, C};
use crate::scenario::{ReflectionMode, Scenario, SurfaceMode};
use crate::seeding::{rng_from, uniform_phase};

/// Free-space amplitude factor `λ / (4π·d)`.
pub fn fspl_amplitude<T: Scalar>(d: T, wavelength: T) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::Singularity(format!("path length {d} must be positive")));
    }
    if !(wavelength > T::zero()) {
        return Err(Error::range("wavelength", wavelength.to_f64_lossy(), "> 0"));
    }
    Ok(wavelength / (T::of(4.0) * T::PI() * d))
}

/// All channel coefficients of one scenario realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    /// Surface echo per radar.
    pub g: Vec<C<T>>,
    /// Cascaded IRS channels, `N × K`.
    pub h: Array2<C<T>>,
    /// Decoy cascades through each scatterer, `N × K × S`.
    pub t: Array3<C<T>>,
    pub wavelength: T,
}

impl<T: Scalar> ChannelSet<T> {
    pub fn elements(&self) -> usize {
        self.h.nrows()
    }

    pub fn radars(&self) -> usize {
        self.g.len()
    }

    pub fn scatterers(&self) -> usize {
        self.t.dim().2
    }

    /// `h_k` as a vector over IRS elements.
    pub fn cascade(&self, k: usize) -> Vec<C<T>> {
        self.h.column(k).to_vec()
    }

    pub fn decoy(&self, k: usize, s: usize) -> Vec<C<T>> {
        (0..self.elements()).map(|n| self.t[[n, k, s]]).collect()
    }
}

/// IRS control word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ReflectionPattern<T> {
    pub amplitudes: Vec<T>,
    /// Radians in `[0, 2π)`.
    pub phases: Vec<T>,
    pub mode: ReflectionMode,
    /// Phase resolution when the pattern has been quantized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
}

impl<T: Scalar> ReflectionPattern<T> {
    pub fn unit(phases: Vec<T>) -> Self {
        let n = phases.len();
        Self {
            amplitudes: vec![T::one(); n],
            phases: phases.into_iter().map(wrap_phase).collect(),
            mode: ReflectionMode::UnitModulus,
            bits: None,
        }
    }

    /// Every element switched off (β = 0): the "no IRS" baseline.
    pub fn off(n: usize) -> Self {
        Self {
            amplitudes: vec![T::zero(); n],
            phases: vec![T::zero(); n],
            mode: ReflectionMode::AmplitudeAdjustable,
            bits: None,
        }
    }

    /// From reflection coefficients `θ_n = β_n·exp(jφ_n)`. Amplitudes are
    /// clipped to `[0, 1]`; in unit-modulus mode they are forced to 1.
    pub fn from_coefficients(theta: &[C<T>], mode: ReflectionMode) -> Self {
        let amplitudes = theta
            .iter()
            .map(|z| match mode {
                ReflectionMode::UnitModulus => T::one(),
                ReflectionMode::AmplitudeAdjustable => z.norm().min(T::one()),
            })
            .collect();
        let phases = theta
            .iter()
            .map(|z| if z.norm() > T::zero() { wrap_phase(z.arg()) } else { T::zero() })
            .collect();
        Self {
            amplitudes,
            phases,
            mode,
            bits: None,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn coefficients(&self) -> Vec<C<T>> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&b, &p)| cis(p) * b)
            .collect()
    }

    /// Passivity and mode constraints.
    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.len() != self.phases.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes vs {} phases",
                self.amplitudes.len(),
                self.phases.len()
            )));
        }
        for (n, &b) in self.amplitudes.iter().enumerate() {
            let ok = match self.mode {
                ReflectionMode::UnitModulus => b == T::one(),
                ReflectionMode::AmplitudeAdjustable => b >= T::zero() && b <= T::one(),
            };
            if !ok {
                return Err(Error::range(format!("amplitude[{n}]"), b.to_f64_lossy(), "passive"));
            }
        }
        Ok(())
    }
}

/// `g + Σ_n θ_n·h_n`
pub fn combine<T: Scalar>(g: C<T>, h: &[C<T>], theta: &[C<T>]) -> C<T> {
    h.iter().zip(theta).fold(g, |acc, (hn, tn)| acc + hn * tn)
}

/// Received echo at one radar and its power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoPower<T> {
    pub echo: C<T>,
    pub power_mw: T,
    /// −∞ for an exactly cancelled echo.
    pub power_dbm: T,
}

pub fn echo_and_power<T: Scalar>(
    channels: &ChannelSet<T>,
    pattern: &ReflectionPattern<T>,
    radar_index: usize,
    tx_power_dbm: T,
) -> Result<EchoPower<T>> {
    if radar_index >= channels.radars() {
        return Err(Error::Index {
            what: "radars",
            index: radar_index,
            len: channels.radars(),
        });
    }
    if pattern.len() != channels.elements() || pattern.amplitudes.len() != pattern.len() {
        return Err(Error::Dimension(format!(
            "pattern has {} elements, channels have {}",
            pattern.len(),
            channels.elements()
        )));
    }
    let theta = pattern.coefficients();
    let echo = channels
        .h
        .column(radar_index)
        .iter()
        .zip(&theta)
        .fold(channels.g[radar_index], |acc, (h, t)| acc + h * t);
    let power_mw = dbm_to_mw(tx_power_dbm) * echo.norm_sqr();
    Ok(EchoPower {
        echo,
        power_mw,
        power_dbm: mw_to_dbm(power_mw),
    })
}

fn radar<T: Scalar>(scenario: &Scenario<T>, k: usize) -> Result<&crate::scenario::Radar<T>> {
    scenario.radars.get(k).ok_or(Error::Index {
        what: "radars",
        index: k,
        len: scenario.radars.len(),
    })
}

/// Per-element scattering phases of the EWAM surface.
pub fn surface_phases<T: Scalar>(scenario: &Scenario<T>) -> Vec<T> {
    let n = scenario.target.surface.len();
    match scenario.target.surface_mode {
        SurfaceMode::Specular => vec![T::zero(); n],
        SurfaceMode::Rough => {
            let mut rng = rng_from(scenario.target.surface_seed);
            (0..n).map(|_| uniform_phase(&mut rng)).collect()
        }
    }
}

/// Mono-static round trip `ρ(d)²·exp(−j4πd/λ)`.
fn round_trip<T: Scalar>(from: Vec3<T>, to: Vec3<T>, wavelength: T) -> Result<C<T>> {
    let d = distance(from, to);
    let rho = fspl_amplitude(d, wavelength)?;
    Ok(cis(-T::of(4.0) * T::PI() * d / wavelength) * (rho * rho))
}

fn synth_surface_echo_with<T: Scalar>(scenario: &Scenario<T>, k: usize, psi: &[T]) -> Result<C<T>> {
    let r = radar(scenario, k)?;
    let lambda = scenario.wavelength();
    let amp = (T::one() - scenario.target.absorb_eff).max(T::zero()).sqrt();
    let m = T::of_usize(r.antennas());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (p, &ps) in scenario.surface_positions().into_iter().zip(psi) {
        let rt = round_trip(r.position, p, lambda)
            .map_err(|_| Error::Singularity(format!("radar {k} sits on the target surface")))?;
        acc += rt * cis(ps) * amp;
    }
    Ok(acc * m)
}

/// Direct echo `g_k` of the absorbing target surface.
pub fn synth_surface_echo<T: Scalar>(scenario: &Scenario<T>, radar_index: usize) -> Result<C<T>> {
    synth_surface_echo_with(scenario, radar_index, &surface_phases(scenario))
}

/// Cascaded radar → IRS element → radar channels `h_k`.
pub fn synth_cascaded_channels<T: Scalar>(scenario: &Scenario<T>, radar_index: usize) -> Result<Vec<C<T>>> {
    let r = radar(scenario, radar_index)?;
    let lambda = scenario.wavelength();
    let gain = T::of_usize(r.antennas()) * scenario.irs.element_amp_gain;
    scenario
        .irs_positions()
        .into_iter()
        .map(|p| {
            round_trip(r.position, p, lambda)
                .map(|rt| rt * gain)
                .map_err(|_| Error::Singularity(format!("radar {radar_index} coincides with an IRS element")))
        })
        .collect()
}

/// Radar → IRS element → scatterer → radar decoy cascade.
pub fn synth_decoy_channels<T: Scalar>(
    scenario: &Scenario<T>,
    radar_index: usize,
    scatterer_index: usize,
) -> Result<Vec<C<T>>> {
    let r = radar(scenario, radar_index)?;
    let sc = scenario.scatterers.get(scatterer_index).ok_or(Error::Index {
        what: "scatterers",
        index: scatterer_index,
        len: scenario.scatterers.len(),
    })?;
    let lambda = scenario.wavelength();
    let gain = T::of_usize(r.antennas()) * scenario.irs.element_amp_gain;
    let d_sk = distance(sc.position, r.position);
    let rho_sk = fspl_amplitude(d_sk, lambda)
        .map_err(|_| Error::Singularity(format!("scatterer {scatterer_index} coincides with radar {radar_index}")))?;
    scenario
        .irs_positions()
        .into_iter()
        .map(|p| {
            let d_kn = distance(r.position, p);
            let d_ns = distance(p, sc.position);
            let rho = fspl_amplitude(d_kn, lambda)? * fspl_amplitude(d_ns, lambda)? * rho_sk;
            let phase = -T::TAU() * (d_kn + d_ns + d_sk) / lambda;
            Ok(cis(phase) * sc.reflectivity * (gain * rho))
        })
        .collect()
}

/// Synthesize the full channel set of a validated scenario.
pub fn synthesize<T: Scalar>(scenario: &Scenario<T>) -> Result<ChannelSet<T>> {
    let n = scenario.irs_elements();
    let k_count = scenario.radars.len();
    let s_count = scenario.scatterers.len();
    let psi = surface_phases(scenario);
    let mut g = Vec::with_capacity(k_count);
    let mut h = Array2::zeros((n, k_count));
    let mut t = Array3::zeros((n, k_count, s_count));
    for k in 0..k_count {
        g.push(synth_surface_echo_with(scenario, k, &psi)?);
        for (i, v) in synth_cascaded_channels(scenario, k)?.into_iter().enumerate() {
            h[[i, k]] = v;
        }
        for s in 0..s_count {
            for (i, v) in synth_decoy_channels(scenario, k, s)?.into_iter().enumerate() {
                t[[i, k, s]] = v;
            }
        }
    }
    Ok(ChannelSet {
        g,
        h,
        t,
        wavelength: scenario.wavelength(),
    })
}
