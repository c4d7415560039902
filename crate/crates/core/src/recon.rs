//! Sensing mode: sensor-array snapshots, grid-search MUSIC and
//! least-squares path gains.
//!
//! Angles are azimuths in the sensor array's own frame (elevation 0). The
//! steering phases depend only on element spacing in wavelengths, so no
//! carrier is needed here.

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{steering_vector, AngleSpec, PlanarArray};
use crate::linalg::{hermitian_eigen, solve};
use crate::scalar::{Scalar, C};
use crate::seeding::{complex_gaussian, derive_seed, rng_from};

/// One impinging signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SourceSpec<T> {
    pub angle: AngleSpec<T>,
    pub gain: C<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock<T> {
    /// Sensors × snapshots.
    pub data: Array2<C<T>>,
    pub sensor_array: PlanarArray<T>,
    pub noise_power: T,
    /// Sources × snapshots, when the probing waveforms are known.
    pub sources: Option<Array2<C<T>>>,
}

impl<T: Scalar> SnapshotBlock<T> {
    pub fn sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.data.ncols()
    }
}

/// Uniform azimuth grid `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct AngleGrid<T> {
    pub start_deg: T,
    pub stop_deg: T,
    pub step_deg: T,
}

impl<T: Scalar> Default for AngleGrid<T> {
    fn default() -> Self {
        Self {
            start_deg: T::of(-90.0),
            stop_deg: T::of(90.0),
            step_deg: T::of(0.1),
        }
    }
}

impl<T: Scalar> AngleGrid<T> {
    /// Grid points, computed as `start + (stop − start)·i/count` so that
    /// round values such as 0° land exactly.
    pub fn points(&self) -> Result<Vec<T>> {
        if !(self.step_deg > T::zero()) || !self.step_deg.is_finite() {
            return Err(Error::range("step_deg", self.step_deg.to_f64_lossy(), "> 0"));
        }
        let lim = T::of(90.0);
        for (name, v) in [("start_deg", self.start_deg), ("stop_deg", self.stop_deg)] {
            if !(v.abs() <= lim) {
                return Err(Error::range(name, v.to_f64_lossy(), "[-90, 90] degrees"));
            }
        }
        if self.stop_deg < self.start_deg {
            return Err(Error::range("stop_deg", self.stop_deg.to_f64_lossy(), ">= start_deg"));
        }
        let span = self.stop_deg - self.start_deg;
        let count = (span / self.step_deg).round().to_usize().unwrap_or(0);
        if count == 0 {
            return Ok(vec![self.start_deg]);
        }
        Ok((0..=count)
            .map(|i| self.start_deg + span * T::of_usize(i) / T::of_usize(count))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AoAEstimate<T> {
    /// Ascending azimuth.
    pub angles: Vec<AngleSpec<T>>,
    pub gains: Vec<C<T>>,
    /// Mean squared model misfit per data entry.
    pub residual: T,
    pub grid_deg: Vec<T>,
    pub spectrum: Vec<T>,
}

/// `x(t) = Σ_i gain_i·s_i(t)·a(angle_i) + w(t)` with unit-power circular
/// Gaussian `s_i` and white noise `w` of power `noise_power`.
pub fn synth_snapshots<T: Scalar>(
    sensor_array: &PlanarArray<T>,
    sources: &[SourceSpec<T>],
    noise_power: T,
    snapshots: usize,
    seed: u64,
) -> Result<SnapshotBlock<T>> {
    if snapshots == 0 {
        return Err(Error::range("snapshots", 0.0, ">= 1"));
    }
    if !(noise_power >= T::zero()) || !noise_power.is_finite() {
        return Err(Error::range("noise_power", noise_power.to_f64_lossy(), ">= 0"));
    }
    let array = sensor_array.normalized()?;
    let m = array.len();
    let mut steering = Vec::with_capacity(sources.len());
    for s in sources {
        s.angle.validate()?;
        steering.push(steering_vector(&array, &s.angle, T::one()));
    }
    let mut src_rng = rng_from(derive_seed(seed, "recon/sources"));
    let waveforms = Array2::from_shape_fn((sources.len(), snapshots), |_| complex_gaussian::<T, _>(&mut src_rng, T::one()));
    let mut noise_rng = rng_from(derive_seed(seed, "recon/noise"));
    let mut data = Array2::from_shape_fn((m, snapshots), |_| complex_gaussian::<T, _>(&mut noise_rng, noise_power));
    for (i, (s, a)) in sources.iter().zip(&steering).enumerate() {
        for t in 0..snapshots {
            let amp = s.gain * waveforms[[i, t]];
            for r in 0..m {
                data[[r, t]] += amp * a[r];
            }
        }
    }
    Ok(SnapshotBlock {
        data,
        sensor_array: array,
        noise_power,
        sources: Some(waveforms),
    })
}

fn sample_covariance<T: Scalar>(data: &Array2<C<T>>) -> Array2<C<T>> {
    let (m, l) = data.dim();
    let inv_l = T::of_usize(l).recip();
    Array2::from_shape_fn((m, m), |(i, j)| {
        (0..l).map(|t| data[[i, t]] * data[[j, t]].conj()).sum::<C<T>>() * inv_l
    })
}

/// Grid-search MUSIC with `p(ϑ) = 1 / ‖E_nᴴ a(ϑ)‖²`.
///
/// Peaks are interior strict-left local maxima (`p[i−1] < p[i] ≥ p[i+1]`,
/// so a plateau reports its lowest angle). The `n_sources` largest are
/// returned, ties going to the lower angle. Gains come from
/// [`estimate_path_gains`].
pub fn estimate_aoa<T: Scalar>(block: &SnapshotBlock<T>, n_sources: usize, grid: &AngleGrid<T>) -> Result<AoAEstimate<T>> {
    let m = block.sensors();
    if n_sources >= m {
        return Err(Error::Subspace { sources: n_sources, sensors: m });
    }
    if n_sources == 0 {
        return Err(Error::range("n_sources", 0.0, ">= 1"));
    }
    if block.snapshots() < n_sources {
        return Err(Error::range("snapshots", block.snapshots() as f64, ">= n_sources"));
    }
    if block.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::range("snapshot data", f64::NAN, "finite"));
    }
    if block.sensor_array.len() != m {
        return Err(Error::Dimension(format!("{} data rows vs {} sensors", m, block.sensor_array.len())));
    }
    let points = grid.points()?;
    let eig = hermitian_eigen(&sample_covariance(&block.data))?;
    let noise_dim = m - n_sources;
    let en = eig.vectors.slice(ndarray::s![.., ..noise_dim]).to_owned();
    let array = &block.sensor_array;
    let spectrum: Vec<T> = points
        .par_iter()
        .map(|&deg| {
            let a = steering_vector(array, &AngleSpec::azimuth(deg), T::one());
            let den: T = (0..noise_dim)
                .map(|c| {
                    (0..m)
                        .map(|r| en[[r, c]].conj() * a[r])
                        .sum::<C<T>>()
                        .norm_sqr()
                })
                .sum();
            den.max(T::min_positive_value()).recip()
        })
        .collect();

    let mut peaks: Vec<usize> = (1..spectrum.len().saturating_sub(1))
        .filter(|&i| spectrum[i] > spectrum[i - 1] && spectrum[i] >= spectrum[i + 1])
        .collect();
    // stable sort keeps ascending-angle order among equal values
    peaks.sort_by(|&a, &b| spectrum[b].partial_cmp(&spectrum[a]).unwrap_or(std::cmp::Ordering::Equal));
    if peaks.len() < n_sources {
        return Err(Error::DegenerateSpectrum {
            wanted: n_sources,
            found: peaks.iter().map(|&i| points[i].to_f64_lossy()).collect(),
        });
    }
    let mut chosen: Vec<usize> = peaks[..n_sources].to_vec();
    chosen.sort_unstable();
    let angles: Vec<AngleSpec<T>> = chosen.iter().map(|&i| AngleSpec::azimuth(points[i])).collect();
    let (gains, residual) = fit_gains(block, &angles)?;
    Ok(AoAEstimate {
        angles,
        gains,
        residual,
        grid_deg: points,
        spectrum,
    })
}

/// Least-squares path gains for known arrival angles.
///
/// With known source waveforms `S` this minimizes `‖X − A·diag(g)·S‖²`.
/// Without them the waveforms are taken as all ones, which reduces to
/// fitting `A·g` to the coherent snapshot mean.
pub fn estimate_path_gains<T: Scalar>(block: &SnapshotBlock<T>, angles: &[AngleSpec<T>]) -> Result<Vec<C<T>>> {
    fit_gains(block, angles).map(|(g, _)| g)
}

fn fit_gains<T: Scalar>(block: &SnapshotBlock<T>, angles: &[AngleSpec<T>]) -> Result<(Vec<C<T>>, T)> {
    let (m, l) = block.data.dim();
    let n = angles.len();
    if n == 0 {
        return Ok((Vec::new(), mean_power(&block.data)));
    }
    let steer: Vec<Vec<C<T>>> = angles
        .iter()
        .map(|a| {
            a.validate()?;
            Ok(steering_vector(&block.sensor_array, a, T::one()))
        })
        .collect::<Result<_>>()?;
    let one = Complex::new(T::one(), T::zero());
    let ones;
    let s = match &block.sources {
        Some(s) => {
            if s.nrows() != n || s.ncols() != l {
                return Err(Error::Dimension(format!(
                    "{}x{} source matrix for {} angles and {} snapshots",
                    s.nrows(),
                    s.ncols(),
                    n,
                    l
                )));
            }
            s
        }
        None => {
            ones = Array2::from_elem((n, l), one);
            &ones
        }
    };
    let a_gram = Array2::from_shape_fn((n, n), |(i, j)| crate::linalg::inner(&steer[i], &steer[j]));
    check_rank(&a_gram)?;
    // normal equations: Σ_j (a_iᴴa_j)(Σ_t s_i* s_j) g_j = Σ_t s_i*·a_iᴴx_t
    let gram = Array2::from_shape_fn((n, n), |(i, j)| {
        a_gram[[i, j]] * (0..l).map(|t| s[[i, t]].conj() * s[[j, t]]).sum::<C<T>>()
    });
    let rhs: Vec<C<T>> = (0..n)
        .map(|i| {
            (0..l)
                .map(|t| {
                    let proj: C<T> = (0..m).map(|r| steer[i][r].conj() * block.data[[r, t]]).sum();
                    s[[i, t]].conj() * proj
                })
                .sum()
        })
        .collect();
    let gains = solve(&gram, &rhs, T::epsilon())?;
    let mut misfit = T::zero();
    for t in 0..l {
        for r in 0..m {
            let model: C<T> = (0..n).map(|i| gains[i] * s[[i, t]] * steer[i][r]).sum();
            misfit += (block.data[[r, t]] - model).norm_sqr();
        }
    }
    Ok((gains, misfit / T::of_usize(m * l)))
}

fn mean_power<T: Scalar>(data: &Array2<C<T>>) -> T {
    let count = data.len().max(1);
    data.iter().map(|z| z.norm_sqr()).sum::<T>() / T::of_usize(count)
}

/// Reject steering sets whose Gram matrix is numerically singular.
fn check_rank<T: Scalar>(gram: &Array2<C<T>>) -> Result<()> {
    let values = hermitian_eigen(gram)?.values;
    let lo = values.first().copied().unwrap_or(T::zero());
    let hi = values.last().copied().unwrap_or(T::zero());
    let limit = (T::of(1e4) * T::epsilon()).recip();
    if !(lo > T::zero()) || hi / lo > limit {
        let condition = if lo > T::zero() { (hi / lo).to_f64_lossy() } else { f64::INFINITY };
        return Err(Error::Conditioning { condition });
    }
    Ok(())
}
