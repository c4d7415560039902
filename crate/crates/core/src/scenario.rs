//! World description for the radar stealth/spoofing simulations.
//!
//! Arrays mounted on a platform are positioned relative to that platform:
//! the EWAM surface and the IRS panel relative to `target.position`, each
//! radar array relative to its radar position. The default scenario is the
//! single-radar case study: a 6 GHz, 15 dBm, 8×8-antenna mono-static radar on
//! the ground looking straight up at a target 2 km overhead that carries a
//! 200-element absorbing surface (η = 0.8) and an 8-element IRS.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{add, distance, norm, scale, sub, PlanarArray, Vec3};
use crate::scalar::{Scalar, C};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const DEFAULT_CARRIER_HZ: f64 = 6e9;
pub const DEFAULT_TX_POWER_DBM: f64 = 15.0;
pub const DEFAULT_ABSORB_EFF: f64 = 0.8;
pub const DEFAULT_RANGE_M: f64 = 2000.0;

/// Closer than this (meters) counts as coincident.
const COINCIDENT_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceMode {
    /// Independent uniform scattering phase per surface element.
    #[default]
    Rough,
    Specular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReflectionMode {
    /// Phase-only control, every amplitude is 1.
    #[default]
    UnitModulus,
    /// Amplitude in `[0, 1]` and phase both controllable.
    AmplitudeAdjustable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Radar<T> {
    pub position: Vec3<T>,
    /// Antenna array; its center is an offset from `position`. Validation
    /// orients it at the target.
    #[serde(default = "default_radar_array")]
    pub array: PlanarArray<T>,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Target<T> {
    #[serde(default = "default_target_position")]
    pub position: Vec3<T>,
    /// EWAM-coated surface; center is an offset from `position`.
    #[serde(default = "default_surface")]
    pub surface: PlanarArray<T>,
    #[serde(default = "default_absorb_eff")]
    pub absorb_eff: T,
    #[serde(default)]
    pub surface_mode: SurfaceMode,
    #[serde(default)]
    pub surface_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Irs<T> {
    /// Reflecting panel; center is an offset from the target position.
    #[serde(default = "default_irs_array")]
    pub array: PlanarArray<T>,
    #[serde(default = "T::one")]
    pub element_amp_gain: T,
    #[serde(default)]
    pub mode: ReflectionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Scatterer<T> {
    pub position: Vec3<T>,
    pub reflectivity: C<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Scenario<T> {
    #[serde(default = "default_carrier")]
    pub carrier_hz: T,
    #[serde(default = "default_radars")]
    pub radars: Vec<Radar<T>>,
    #[serde(default)]
    pub target: Target<T>,
    #[serde(default)]
    pub irs: Irs<T>,
    #[serde(default)]
    pub scatterers: Vec<Scatterer<T>>,
    #[serde(default)]
    pub seed: u64,
}

fn default_carrier<T: Scalar>() -> T {
    T::of(DEFAULT_CARRIER_HZ)
}

fn default_tx_power<T: Scalar>() -> T {
    T::of(DEFAULT_TX_POWER_DBM)
}

fn default_absorb_eff<T: Scalar>() -> T {
    T::of(DEFAULT_ABSORB_EFF)
}

fn down<T: Scalar>() -> Vec3<T> {
    [T::zero(), T::zero(), -T::one()]
}

fn default_target_position<T: Scalar>() -> Vec3<T> {
    [T::zero(), T::zero(), T::of(DEFAULT_RANGE_M)]
}

fn array<T: Scalar>(rows: usize, cols: usize, center: Vec3<T>, normal: Vec3<T>) -> PlanarArray<T> {
    PlanarArray {
        rows,
        cols,
        spacing: T::of(0.5),
        center,
        normal,
        axis: [T::one(), T::zero(), T::zero()],
    }
}

/// 8×8 = 64 transmit/receive antennas.
pub fn default_radar_array<T: Scalar>() -> PlanarArray<T> {
    array(8, 8, [T::zero(); 3], [T::zero(), T::zero(), T::one()])
}

/// 10×20 = 200 EWAM elements facing the ground.
pub fn default_surface<T: Scalar>() -> PlanarArray<T> {
    array(10, 20, [T::zero(); 3], down())
}

/// IRS panel with `rows × cols` elements placed beside the EWAM surface.
pub fn irs_panel<T: Scalar>(rows: usize, cols: usize) -> PlanarArray<T> {
    array(rows, cols, [T::zero(), T::of(0.3), T::zero()], down())
}

/// 2×4 = 8 elements.
pub fn default_irs_array<T: Scalar>() -> PlanarArray<T> {
    irs_panel(2, 4)
}

fn default_radars<T: Scalar>() -> Vec<Radar<T>> {
    vec![Radar {
        position: [T::zero(); 3],
        array: default_radar_array(),
        tx_power_dbm: default_tx_power(),
    }]
}

impl<T: Scalar> Default for Target<T> {
    fn default() -> Self {
        Self {
            position: default_target_position(),
            surface: default_surface(),
            absorb_eff: default_absorb_eff(),
            surface_mode: SurfaceMode::default(),
            surface_seed: 0,
        }
    }
}

impl<T: Scalar> Default for Irs<T> {
    fn default() -> Self {
        Self {
            array: default_irs_array(),
            element_amp_gain: T::one(),
            mode: ReflectionMode::default(),
        }
    }
}

impl<T: Scalar> Default for Scenario<T> {
    fn default() -> Self {
        Self {
            carrier_hz: default_carrier(),
            radars: default_radars(),
            target: Target::default(),
            irs: Irs::default(),
            scatterers: Vec::new(),
            seed: 0,
        }
    }
}

impl<T: Scalar> Radar<T> {
    pub fn at(position: Vec3<T>) -> Self {
        Self {
            position,
            array: default_radar_array(),
            tx_power_dbm: default_tx_power(),
        }
    }

    /// Number of antennas `M`.
    pub fn antennas(&self) -> usize {
        self.array.len()
    }
}

impl<T: Scalar> Scenario<T> {
    pub fn wavelength(&self) -> T {
        T::of(SPEED_OF_LIGHT) / self.carrier_hz
    }

    pub fn irs_elements(&self) -> usize {
        self.irs.array.len()
    }

    pub fn surface_positions(&self) -> Vec<Vec3<T>> {
        let mut s = self.target.surface.clone();
        s.center = add(self.target.position, s.center);
        s.positions(self.wavelength())
    }

    pub fn irs_positions(&self) -> Vec<Vec3<T>> {
        let mut a = self.irs.array.clone();
        a.center = add(self.target.position, a.center);
        a.positions(self.wavelength())
    }

    /// Bearing `deg` measured from the surface broadside in the plane of the
    /// surface's in-plane axis, at `range` meters from the target.
    pub fn bearing_position(&self, deg: T, range: T) -> Vec3<T> {
        let (a, _, n) = self.target.surface.frame();
        let (s, c) = deg.to_radians().sin_cos();
        add(self.target.position, scale(add(scale(a, s), scale(n, c)), range))
    }
}

/// Check a scenario and return its normalized form: unit vectors
/// renormalized, radar arrays steered at the target. Idempotent.
pub fn validate_scenario<T: Scalar>(raw: &Scenario<T>) -> Result<Scenario<T>> {
    let mut s = raw.clone();
    if !(s.carrier_hz > T::zero()) || !s.carrier_hz.is_finite() {
        return Err(Error::range("carrier_hz", s.carrier_hz.to_f64_lossy(), "> 0"));
    }
    if s.radars.is_empty() {
        return Err(Error::Shape("scenario needs at least one radar".into()));
    }
    let eta = s.target.absorb_eff;
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::range("absorb_eff", eta.to_f64_lossy(), "[0, 1]"));
    }
    let gain = s.irs.element_amp_gain;
    if !(gain > T::zero()) || !gain.is_finite() {
        return Err(Error::range("element_amp_gain", gain.to_f64_lossy(), "> 0"));
    }
    let finite3 = |v: &Vec3<T>| v.iter().all(|x| x.is_finite());
    if !finite3(&s.target.position) {
        return Err(Error::InvalidGeometry("target position must be finite".into()));
    }
    s.target.surface = s.target.surface.normalized()?;
    s.irs.array = s.irs.array.normalized()?;
    let tol = T::of(COINCIDENT_M);
    for (i, radar) in s.radars.iter_mut().enumerate() {
        if !finite3(&radar.position) {
            return Err(Error::InvalidGeometry(format!("radar {i} position must be finite")));
        }
        if !radar.tx_power_dbm.is_finite() {
            return Err(Error::range(
                format!("radars[{i}].tx_power_dbm"),
                radar.tx_power_dbm.to_f64_lossy(),
                "finite",
            ));
        }
        let los = sub(s.target.position, radar.position);
        if norm(los) <= tol {
            return Err(Error::Singularity(format!("radar {i} coincides with the target")));
        }
        radar.array.normal = los;
        radar.array.axis = [T::zero(); 3];
        radar.array = radar.array.normalized()?;
    }
    for (i, sc) in s.scatterers.iter().enumerate() {
        if !finite3(&sc.position) || !sc.reflectivity.re.is_finite() || !sc.reflectivity.im.is_finite() {
            return Err(Error::InvalidGeometry(format!("scatterer {i} must be finite")));
        }
        if distance(sc.position, s.target.position) <= tol {
            return Err(Error::Singularity(format!("scatterer {i} coincides with the target")));
        }
    }
    Ok(s)
}

/// Complex reflectivity helper for building scatterers.
pub fn reflectivity<T: Scalar>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_case_study() {
        let s = validate_scenario(&Scenario::<f64>::default()).unwrap();
        assert_eq!(s.carrier_hz, 6e9);
        assert_eq!(s.radars[0].tx_power_dbm, 15.0);
        assert_eq!(s.radars[0].antennas(), 64);
        assert_eq!(s.target.absorb_eff, 0.8);
        assert_eq!(s.target.surface.len(), 200);
        assert_eq!(s.irs_elements(), 8);
        assert_eq!(s.target.surface_mode, SurfaceMode::Rough);
    }

    #[test]
    fn absorb_eff_out_of_range() {
        let mut s = Scenario::<f64>::default();
        s.target.absorb_eff = 1.2;
        let e = validate_scenario(&s).unwrap_err();
        assert_eq!(e.category(), "range");
        assert!(e.to_string().contains("absorb_eff"));
    }

    #[test]
    fn empty_radars_and_coincident_positions() {
        let mut s = Scenario::<f64>::default();
        s.radars.clear();
        assert_eq!(validate_scenario(&s).unwrap_err().category(), "shape");
        let mut s = Scenario::<f64>::default();
        s.radars[0].position = s.target.position;
        assert_eq!(validate_scenario(&s).unwrap_err().category(), "singularity");
    }

    #[test]
    fn validation_is_idempotent() {
        let mut s = Scenario::<f64>::default();
        s.irs.array.normal = [0.1, 0.2, -3.0];
        s.radars.push(Radar::at([1500.0, 20.0, 13.0]));
        let once = validate_scenario(&s).unwrap();
        let twice = validate_scenario(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn bearing_zero_is_below_target() {
        let s = Scenario::<f64>::default();
        let p = s.bearing_position(0.0, 2000.0);
        assert!(distance(p, [0.0; 3]) < 1e-9);
        let q = s.bearing_position(30.0, 2000.0);
        assert!((distance(q, s.target.position) - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn target_arrays_do_not_overlap() {
        let s = Scenario::<f64>::default();
        let surf = s.surface_positions();
        for p in s.irs_positions() {
            for q in &surf {
                assert!(distance(p, *q) > 0.01);
            }
        }
    }
}
