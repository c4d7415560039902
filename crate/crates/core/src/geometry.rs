//! Array geometry, angle conventions and far-field steering vectors.
//!
//! Angles are measured from the array broadside: azimuth rotates the
//! normal towards the in-plane axis, elevation tilts it towards the
//! second in-plane axis `normal × axis`. Element `(r, c)` sits at
//!
//! ```text
//! center + ((c − (cols−1)/2)·axis + (r − (rows−1)/2)·(normal × axis))·spacing·λ
//! ```
//!
//! and is stored at flat index `r·cols + c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, Scalar, C};

pub type Vec3<T> = [T; 3];

pub fn add<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale<T: Scalar>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm<T: Scalar>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

pub fn distance<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    norm(sub(a, b))
}

fn normalize<T: Scalar>(a: Vec3<T>, what: &str) -> Result<Vec3<T>> {
    let n = norm(a);
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::InvalidGeometry(format!("{what} must be a nonzero finite vector")));
    }
    // already unit: leave bit-identical so normalization is idempotent
    if (n - T::one()).abs() <= T::of(64.0) * T::epsilon() {
        return Ok(a);
    }
    Ok(scale(a, n.recip()))
}

/// Regular `rows × cols` grid of elements lying in a plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct PlanarArray<T> {
    pub rows: usize,
    pub cols: usize,
    /// Element pitch in carrier wavelengths.
    #[serde(default = "half")]
    pub spacing: T,
    pub center: Vec3<T>,
    #[serde(default = "plus_z")]
    pub normal: Vec3<T>,
    /// In-plane axis along which the columns run. Zero means "derive
    /// from the normal".
    #[serde(default = "zero3")]
    pub axis: Vec3<T>,
}

fn half<T: Scalar>() -> T {
    T::of(0.5)
}

fn plus_z<T: Scalar>() -> Vec3<T> {
    [T::zero(), T::zero(), T::one()]
}

fn zero3<T: Scalar>() -> Vec3<T> {
    [T::zero(); 3]
}

/// Deterministic in-plane axis for a unit normal: global x projected onto
/// the plane, or global y when the normal is (nearly) along x.
fn default_axis<T: Scalar>(n: Vec3<T>) -> Vec3<T> {
    let ex = [T::one(), T::zero(), T::zero()];
    let ey = [T::zero(), T::one(), T::zero()];
    let seed = if dot(n, ex).abs() > T::of(0.9) { ey } else { ex };
    let p = sub(seed, scale(n, dot(seed, n)));
    scale(p, norm(p).recip())
}

/// Construct a validated planar array with a derived in-plane axis.
pub fn build_planar_array<T: Scalar>(
    rows: usize,
    cols: usize,
    spacing: T,
    center: Vec3<T>,
    normal: Vec3<T>,
) -> Result<PlanarArray<T>> {
    PlanarArray {
        rows,
        cols,
        spacing,
        center,
        normal,
        axis: zero3(),
    }
    .normalized()
}

impl<T: Scalar> PlanarArray<T> {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Check the invariants and return a copy with a unit normal and a unit
    /// in-plane axis orthogonal to it. Idempotent.
    pub fn normalized(&self) -> Result<Self> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidGeometry(format!(
                "array must have at least one row and column, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.spacing > T::zero()) || !self.spacing.is_finite() {
            return Err(Error::range("spacing", self.spacing.to_f64_lossy(), "> 0"));
        }
        if self.center.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("array center must be finite".into()));
        }
        let n = normalize(self.normal, "array normal")?;
        let axis = if norm(self.axis) > T::zero() {
            let along = dot(self.axis, n);
            let a = if along.abs() <= T::of(64.0) * T::epsilon() {
                self.axis
            } else {
                let once = sub(self.axis, scale(n, along));
                sub(once, scale(n, dot(once, n)))
            };
            if norm(a) <= T::of(1e-9) * norm(self.axis) {
                return Err(Error::InvalidGeometry("in-plane axis is parallel to the normal".into()));
            }
            normalize(a, "in-plane axis")?
        } else {
            default_axis(n)
        };
        Ok(Self {
            normal: n,
            axis,
            ..self.clone()
        })
    }

    /// Orthonormal frame `(axis, normal × axis, normal)`.
    pub fn frame(&self) -> (Vec3<T>, Vec3<T>, Vec3<T>) {
        let n = scale(self.normal, norm(self.normal).recip());
        let a = if norm(self.axis) > T::zero() {
            let p = sub(self.axis, scale(n, dot(self.axis, n)));
            scale(p, norm(p).recip())
        } else {
            default_axis(n)
        };
        (a, cross(n, a), n)
    }

    /// Element offsets from the center, in meters.
    pub fn offsets(&self, wavelength: T) -> Vec<Vec3<T>> {
        let (a, b, _) = self.frame();
        let pitch = self.spacing * wavelength;
        let half_r = T::of_usize(self.rows - 1) / T::of(2.0);
        let half_c = T::of_usize(self.cols - 1) / T::of(2.0);
        let mut out = Vec::with_capacity(self.len());
        for r in 0..self.rows {
            let dr = (T::of_usize(r) - half_r) * pitch;
            for c in 0..self.cols {
                let dc = (T::of_usize(c) - half_c) * pitch;
                out.push(add(scale(a, dc), scale(b, dr)));
            }
        }
        out
    }

    /// Absolute element positions, in meters.
    pub fn positions(&self, wavelength: T) -> Vec<Vec3<T>> {
        self.offsets(wavelength)
            .into_iter()
            .map(|o| add(self.center, o))
            .collect()
    }

    /// Unit vector for `dir` expressed in world coordinates.
    pub fn direction(&self, dir: &AngleSpec<T>) -> Vec3<T> {
        let (a, b, n) = self.frame();
        let az = dir.azimuth_deg.to_radians();
        let el = dir.elevation_deg.to_radians();
        let (sa, ca) = az.sin_cos();
        let (se, ce) = el.sin_cos();
        add(add(scale(a, ce * sa), scale(b, se)), scale(n, ce * ca))
    }
}

/// Direction relative to an array broadside, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AngleSpec<T> {
    pub azimuth_deg: T,
    #[serde(default)]
    pub elevation_deg: T,
}

impl<T: Scalar> AngleSpec<T> {
    pub fn azimuth(deg: T) -> Self {
        Self {
            azimuth_deg: deg,
            elevation_deg: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lim = T::of(90.0);
        for (name, v) in [("azimuth", self.azimuth_deg), ("elevation", self.elevation_deg)] {
            if !(v.abs() <= lim) {
                return Err(Error::range(name, v.to_f64_lossy(), "[-90, 90] degrees"));
            }
        }
        Ok(())
    }
}

/// Far-field steering vector `exp(j·2π/λ·⟨p_m − center, u⟩)` for a unit
/// direction `u` given in world coordinates.
pub fn steering_vector_toward<T: Scalar>(array: &PlanarArray<T>, u: Vec3<T>, wavelength: T) -> Vec<C<T>> {
    let k = T::TAU() / wavelength;
    array
        .offsets(wavelength)
        .into_iter()
        .map(|o| cis(k * dot(o, u)))
        .collect()
}

pub fn steering_vector<T: Scalar>(array: &PlanarArray<T>, direction: &AngleSpec<T>, wavelength: T) -> Vec<C<T>> {
    steering_vector_toward(array, array.direction(direction), wavelength)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ORIGIN: Vec3<f64> = [0.0, 0.0, 0.0];
    const Z: Vec3<f64> = [0.0, 0.0, 1.0];

    #[test]
    fn single_element_at_center() {
        let arr = build_planar_array(1, 1, 0.5, [1.0, 2.0, 3.0], Z).unwrap();
        assert_eq!(arr.positions(0.1), vec![[1.0, 2.0, 3.0]]);
    }

    #[test]
    fn two_elements_straddle_center() {
        let lambda = 0.05;
        let arr = build_planar_array(1, 2, 0.5, ORIGIN, Z).unwrap();
        let p = arr.positions(lambda);
        let (a, _, _) = arr.frame();
        assert!((dot(p[0], a) + 0.25 * lambda).abs() < 1e-15);
        assert!((dot(p[1], a) - 0.25 * lambda).abs() < 1e-15);
        assert!(dot(p[0], Z).abs() < 1e-15);
    }

    #[test]
    fn surface_centroid_is_center() {
        let c = [3.0, -1.0, 250.0];
        let arr = build_planar_array(10, 20, 0.5, c, [0.3, 0.1, -1.0]).unwrap();
        let p = arr.positions(299_792_458.0 / 6e9);
        assert_eq!(p.len(), 200);
        let mut sum = [0.0_f64; 3];
        for q in &p {
            for i in 0..3 {
                sum[i] += q[i];
            }
        }
        for i in 0..3 {
            assert!((sum[i] / 200.0 - c[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_normal_rejected() {
        let err = build_planar_array(2, 2, 0.5, ORIGIN, [0.0; 3]).unwrap_err();
        assert_eq!(err.category(), "invalid-geometry");
        assert!(build_planar_array(0, 2, 0.5, ORIGIN, Z).is_err());
        assert!(build_planar_array(2, 2, 0.0, ORIGIN, Z).is_err());
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let arr = build_planar_array(4, 5, 0.5, ORIGIN, Z).unwrap();
        let v = steering_vector(&arr, &AngleSpec::azimuth(0.0), 0.05);
        for z in v {
            assert!((z.re - 1.0).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn ula_phase_increment_at_30_degrees() {
        let arr = build_planar_array(1, 8, 0.5, ORIGIN, Z).unwrap();
        let v = steering_vector(&arr, &AngleSpec::azimuth(30.0), 0.05);
        for w in v.windows(2) {
            let step = (w[1] * w[0].conj()).arg();
            assert!((step - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn steering_self_inner_product_equals_length() {
        let arr = build_planar_array(1, 8, 0.5, ORIGIN, Z).unwrap();
        let v = steering_vector(&arr, &AngleSpec::azimuth(17.3), 0.05);
        let ip: num_complex::Complex64 = v.iter().map(|z| z.conj() * z).sum();
        assert!((ip.re - 8.0).abs() < 1e-12 && ip.im.abs() < 1e-12);
    }

    #[test]
    fn angle_range_checked() {
        assert!(AngleSpec::azimuth(90.0).validate().is_ok());
        assert!(AngleSpec::azimuth(90.5).validate().is_err());
        assert!(AngleSpec { azimuth_deg: 0.0, elevation_deg: -91.0 }.validate().is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let arr = build_planar_array(2, 3, 0.5_f32, [0.0; 3], [0.0, 0.0, 1.0]).unwrap();
        let v = steering_vector(&arr, &AngleSpec::azimuth(12.0_f32), 0.05);
        assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-6));
    }

    fn arb_normal() -> impl Strategy<Value = Vec3<f64>> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| [x, y, z])
    }

    proptest! {
        #[test]
        fn steering_entries_unit_modulus(
            rows in 1usize..6, cols in 1usize..6, n in arb_normal(),
            az in -90.0..90.0f64, el in -90.0..90.0f64,
        ) {
            let arr = build_planar_array(rows, cols, 0.5, [1.0, 2.0, 3.0], n).unwrap();
            let v = steering_vector(&arr, &AngleSpec { azimuth_deg: az, elevation_deg: el }, 0.05);
            for z in v {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn conjugate_is_reversed_direction(
            rows in 1usize..6, cols in 1usize..6, n in arb_normal(),
            az in -90.0..90.0f64, el in -90.0..90.0f64,
        ) {
            let arr = build_planar_array(rows, cols, 0.5, [0.0; 3], n).unwrap();
            let u = arr.direction(&AngleSpec { azimuth_deg: az, elevation_deg: el });
            let fwd = steering_vector_toward(&arr, u, 0.05);
            let back = steering_vector_toward(&arr, scale(u, -1.0), 0.05);
            for (f, b) in fwd.iter().zip(&back) {
                prop_assert!((f.conj() - b).norm() < 1e-12);
            }
        }

        #[test]
        fn grid_point_symmetric_under_relabeling(
            rows in 1usize..7, cols in 1usize..7, n in arb_normal(),
        ) {
            let c = [5.0, -2.0, 7.0];
            let arr = build_planar_array(rows, cols, 0.5, c, n).unwrap();
            let p = arr.positions(0.05);
            for r in 0..rows {
                for k in 0..cols {
                    let q = p[r * cols + k];
                    let mirrored = p[(rows - 1 - r) * cols + (cols - 1 - k)];
                    let reflected = sub(scale(c, 2.0), q);
                    prop_assert!(distance(mirrored, reflected) < 1e-9);
                }
            }
        }

        #[test]
        fn normalized_is_idempotent(n in arb_normal(), ax in arb_normal()) {
            let raw = PlanarArray { rows: 3, cols: 2, spacing: 0.5, center: [0.0; 3], normal: n, axis: ax };
            if let Ok(once) = raw.normalized() {
                let twice = once.normalized().unwrap();
                for i in 0..3 {
                    prop_assert!((once.normal[i] - twice.normal[i]).abs() < 1e-15);
                    prop_assert!((once.axis[i] - twice.axis[i]).abs() < 1e-15);
                }
                prop_assert!((norm(once.normal) - 1.0).abs() < 1e-12);
                prop_assert!((norm(once.axis) - 1.0).abs() < 1e-12);
                prop_assert!(dot(once.normal, once.axis).abs() < 1e-12);
            }
        }
    }
}
