//! Case-study sweeps and their result tables.
//!
//! Three strategies are compared at every sweep point: no IRS (β = 0), a
//! random-phase pattern, and an optimized design. Points are computed in
//! parallel and gathered by index, so thread count never changes output.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::{
    design_mmse_multi, design_null_zone, design_reverse_alignment, quantize_pattern, random_pattern, MAX_SWEEPS,
};
use crate::error::{Error, Result};
use crate::geometry::distance;
use crate::propagation::{combine, synth_cascaded_channels, synth_surface_echo, ReflectionPattern};
use crate::scalar::{dbm_to_mw, mw_to_dbm, Scalar, C};
use crate::scenario::{irs_panel, validate_scenario, Radar, Scenario, DEFAULT_RANGE_M};
use crate::seeding::{derive_indexed, derive_seed, rng_from};
use rand::Rng;

/// Written in place of −∞ and anything below it.
pub const DBM_FLOOR: f64 = -400.0;
/// Half-width of the multi-radar bearing window, degrees.
pub const RADAR_SPAN_DEG: f64 = 60.0;

pub const CSV_HEADER: &str = "axis,no_irs_dbm,random_dbm,optimized_dbm";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[default]
    ReverseAlignment,
    Mmse,
    NullZone,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ReverseAlignment => "reverse-alignment",
            Algorithm::Mmse => "mmse",
            Algorithm::NullZone => "null-zone",
        }
    }
}

/// Whether the random baseline keeps one pattern for the whole run or
/// draws a fresh one per sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomPolicy {
    #[default]
    FixedPerRun,
    PerPoint,
}

/// How the optimized strategy is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct Strategy<T> {
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub random_policy: RandomPolicy,
    /// Phase quantization applied to the optimized pattern.
    #[serde(default)]
    pub bits: Option<u32>,
    /// Null-zone bearings, degrees.
    #[serde(default = "zone_default")]
    pub zone_deg: (T, T),
    #[serde(default = "zone_step_default")]
    pub zone_step_deg: T,
}

fn zone_default<T: Scalar>() -> (T, T) {
    (T::of(-5.0), T::of(5.0))
}

fn zone_step_default<T: Scalar>() -> T {
    T::of(0.5)
}

impl<T: Scalar> Default for Strategy<T> {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::default(),
            random_policy: RandomPolicy::default(),
            bits: None,
            zone_deg: zone_default(),
            zone_step_deg: zone_step_default(),
        }
    }
}

impl<T: Scalar> Strategy<T> {
    pub fn with(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }
}

/// Everything needed to regenerate a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", tag = "kind", rename_all = "kebab-case")]
pub enum SweepSpec<T> {
    Angle {
        scenario: Scenario<T>,
        strategy: Strategy<T>,
        grid_deg: Vec<T>,
    },
    RadarCount {
        scenario: Scenario<T>,
        strategy: Strategy<T>,
        radar_counts: Vec<usize>,
        seeds: usize,
    },
}

impl<T: Scalar> SweepSpec<T> {
    pub fn run(&self) -> Result<SweepTable> {
        match self {
            SweepSpec::Angle { scenario, strategy, grid_deg } => angle_sweep(scenario, strategy, grid_deg),
            SweepSpec::RadarCount {
                scenario,
                strategy,
                radar_counts,
                seeds,
            } => radar_count_sweep(scenario, radar_counts, strategy, *seeds),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    /// SHA-256 of the canonical JSON of `spec`.
    pub digest: String,
    pub seed: u64,
    pub elements: usize,
    pub strategies: Vec<String>,
    pub algorithm: String,
    pub spec: serde_json::Value,
}

/// Power per strategy in dBm, floored at [`DBM_FLOOR`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis_label: String,
    pub axis: Vec<f64>,
    pub no_irs_dbm: Vec<f64>,
    pub random_dbm: Vec<f64>,
    pub optimized_dbm: Vec<f64>,
    pub metadata: SweepMetadata,
}

fn floor_dbm(v: f64) -> f64 {
    if v.is_nan() {
        v
    } else {
        v.max(DBM_FLOOR)
    }
}

impl SweepTable {
    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// CSV with header, '.' decimals and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?}\n",
                self.axis[i], self.no_irs_dbm[i], self.random_dbm[i], self.optimized_dbm[i]
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Shape(format!("table serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// Re-run the sweep described by the metadata.
    pub fn reproduce(&self) -> Result<SweepTable> {
        let spec: SweepSpec<f64> = serde_json::from_value(self.metadata.spec.clone())
            .map_err(|e| Error::Shape(format!("sweep metadata: {e}")))?;
        let again = spec.run()?;
        if again.metadata.digest != self.metadata.digest {
            return Err(Error::Shape("sweep metadata digest mismatch".into()));
        }
        Ok(again)
    }
}

/// SHA-256 hex digest of a value's JSON form.
pub fn digest_of<S: Serialize>(value: &S) -> Result<String> {
    let bytes = serde_json::to_vec(value).map_err(|e| Error::Shape(format!("digest serialization: {e}")))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn metadata<T: Scalar>(spec: &SweepSpec<T>, seed: u64, elements: usize, algorithm: Algorithm) -> Result<SweepMetadata> {
    let value = serde_json::to_value(spec).map_err(|e| Error::Shape(format!("sweep metadata: {e}")))?;
    Ok(SweepMetadata {
        digest: digest_of(&value)?,
        seed,
        elements,
        strategies: vec!["no-irs".into(), "random".into(), "optimized".into()],
        algorithm: algorithm.name().into(),
        spec: value,
    })
}

/// Scenario with its single radar moved to `deg` at `range` meters.
fn posed<T: Scalar>(base: &Scenario<T>, deg: T, range: T) -> Result<Scenario<T>> {
    let mut s = base.clone();
    s.radars[0].position = base.bearing_position(deg, range);
    validate_scenario(&s)
}

fn single_channels<T: Scalar>(s: &Scenario<T>) -> Result<(C<T>, Vec<C<T>>)> {
    Ok((synth_surface_echo(s, 0)?, synth_cascaded_channels(s, 0)?))
}

fn finish_pattern<T: Scalar>(pattern: ReflectionPattern<T>, strategy: &Strategy<T>) -> Result<ReflectionPattern<T>> {
    match strategy.bits {
        Some(b) => quantize_pattern(&pattern, b),
        None => Ok(pattern),
    }
}

/// Optimized pattern for `scenario` under `strategy`, quantized when the
/// strategy asks for it.
///
/// Reverse alignment and null-zone design need a single radar; the
/// null-zone bearings are taken at the radar's range. With several radars
/// MMSE minimizes the sum of received powers.
pub fn design_pattern<T: Scalar>(scenario: &Scenario<T>, strategy: &Strategy<T>) -> Result<ReflectionPattern<T>> {
    let base = validate_scenario(scenario)?;
    let k = base.radars.len();
    let mode = base.irs.mode;
    if k != 1 && strategy.algorithm != Algorithm::Mmse {
        return Err(Error::Shape(format!("{} design needs exactly one radar, got {k}", strategy.algorithm.name())));
    }
    let designed = match strategy.algorithm {
        Algorithm::ReverseAlignment => {
            let (g, h) = single_channels(&base)?;
            design_reverse_alignment(g, &h, mode)?.pattern
        }
        Algorithm::Mmse => {
            let (g, h) = folded_channels(&base)?;
            design_mmse_multi(&g, &h, mode, MAX_SWEEPS)?.pattern
        }
        Algorithm::NullZone => {
            let range = distance(base.radars[0].position, base.target.position);
            design_null_zone(|deg| single_channels(&posed(&base, deg, range)?), strategy.zone_deg, strategy.zone_step_deg, mode)?
                .pattern
        }
    };
    finish_pattern(designed, strategy)
}

/// Surface echoes and cascades of every radar with `√P_k` folded in, so
/// that squared residuals are received powers in mW.
fn folded_channels<T: Scalar>(s: &Scenario<T>) -> Result<(Vec<C<T>>, Array2<C<T>>)> {
    let k = s.radars.len();
    let mut g = Vec::with_capacity(k);
    let mut h = Array2::zeros((s.irs_elements(), k));
    for (j, radar) in s.radars.iter().enumerate() {
        let amp = dbm_to_mw(radar.tx_power_dbm).sqrt();
        g.push(synth_surface_echo(s, j)? * amp);
        for (i, v) in synth_cascaded_channels(s, j)?.into_iter().enumerate() {
            h[[i, j]] = v * amp;
        }
    }
    Ok((g, h))
}

/// Received power of each strategy versus radar bearing.
///
/// The optimized pattern is designed once, for the radar position given in
/// `scenario`, and then held fixed while the radar is moved to each bearing
/// of `grid_deg` at the same range.
pub fn angle_sweep<T: Scalar>(scenario: &Scenario<T>, strategy: &Strategy<T>, grid_deg: &[T]) -> Result<SweepTable> {
    let base = validate_scenario(scenario)?;
    if base.radars.len() != 1 {
        return Err(Error::Shape(format!("angle sweep needs exactly one radar, got {}", base.radars.len())));
    }
    if grid_deg.is_empty() {
        return Err(Error::Shape("angle grid is empty".into()));
    }
    if let Some(bad) = grid_deg.iter().find(|d| !(d.abs() <= T::of(90.0))) {
        return Err(Error::range("grid_deg", bad.to_f64_lossy(), "[-90, 90] degrees"));
    }
    let range = distance(base.radars[0].position, base.target.position);
    let mode = base.irs.mode;
    let n = base.irs_elements();
    let tx = dbm_to_mw(base.radars[0].tx_power_dbm);

    let optimized = design_pattern(&base, strategy)?;
    let fixed_random = random_pattern::<T>(n, derive_seed(base.seed, "random-pattern"), mode);

    let rows: Vec<[f64; 3]> = grid_deg
        .par_iter()
        .enumerate()
        .map(|(i, &deg)| {
            let s = posed(&base, deg, range)?;
            let (g, h) = single_channels(&s)?;
            let random = match strategy.random_policy {
                RandomPolicy::FixedPerRun => fixed_random.clone(),
                RandomPolicy::PerPoint => random_pattern(n, derive_indexed(base.seed, "random-pattern", i as u64), mode),
            };
            let power = |theta: &[C<T>]| mw_to_dbm(tx * combine(g, &h, theta).norm_sqr()).to_f64_lossy();
            Ok([
                mw_to_dbm(tx * g.norm_sqr()).to_f64_lossy(),
                power(&random.coefficients()),
                power(&optimized.coefficients()),
            ])
        })
        .collect::<Result<_>>()?;

    let spec = SweepSpec::Angle {
        scenario: scenario.clone(),
        strategy: strategy.clone(),
        grid_deg: grid_deg.to_vec(),
    };
    Ok(SweepTable {
        axis_label: "bearing_deg".into(),
        axis: grid_deg.iter().map(|d| d.to_f64_lossy()).collect(),
        no_irs_dbm: rows.iter().map(|r| floor_dbm(r[0])).collect(),
        random_dbm: rows.iter().map(|r| floor_dbm(r[1])).collect(),
        optimized_dbm: rows.iter().map(|r| floor_dbm(r[2])).collect(),
        metadata: metadata(&spec, base.seed, n, strategy.algorithm)?,
    })
}

/// Bearings of a `k`-radar placement: the first radar sits at 0°, the rest
/// are uniform in `[−60°, 60°]` drawn from `seed`. Placements for growing
/// `k` under one seed are nested.
pub fn radar_bearings<T: Scalar>(k: usize, seed: u64) -> Vec<T> {
    let mut rng = rng_from(seed);
    (0..k)
        .map(|i| match i {
            0 => T::zero(),
            _ => T::of(rng.random_range(-RADAR_SPAN_DEG..=RADAR_SPAN_DEG)),
        })
        .collect()
}

/// Template with `k` copies of its first radar placed by [`radar_bearings`]
/// at the default range, and the given surface seed.
pub fn place_radars<T: Scalar>(
    template: &Scenario<T>,
    k: usize,
    surface_seed: u64,
    bearing_seed: u64,
) -> Result<Scenario<T>> {
    let proto = template
        .radars
        .first()
        .cloned()
        .unwrap_or_else(|| Radar::at([T::zero(); 3]));
    let mut s = template.clone();
    s.target.surface_seed = surface_seed;
    s.radars = radar_bearings::<T>(k, bearing_seed)
        .into_iter()
        .map(|deg| Radar {
            position: template.bearing_position(deg, T::of(DEFAULT_RANGE_M)),
            ..proto.clone()
        })
        .collect();
    validate_scenario(&s)
}

/// `(no_irs, random, optimized)` sum powers in mW for one placement.
fn sum_powers<T: Scalar>(s: &Scenario<T>, strategy: &Strategy<T>, random_seed: u64) -> Result<[T; 3]> {
    let k = s.radars.len();
    let n = s.irs_elements();
    let (g, h) = folded_channels(s)?;
    let total = |theta: &[C<T>]| -> T {
        (0..k)
            .map(|j| h.column(j).iter().zip(theta).fold(g[j], |acc, (hn, t)| acc + hn * t).norm_sqr())
            .sum()
    };
    let random = random_pattern::<T>(n, random_seed, s.irs.mode);
    let designed = match strategy.algorithm {
        Algorithm::ReverseAlignment if k == 1 => design_reverse_alignment(g[0], &h.column(0).to_vec(), s.irs.mode)?.pattern,
        Algorithm::NullZone => {
            return Err(Error::Shape("null-zone design is only defined for a single radar".into()));
        }
        _ => design_mmse_multi(&g, &h, s.irs.mode, MAX_SWEEPS)?.pattern,
    };
    let optimized = finish_pattern(designed, strategy)?;
    Ok([
        g.iter().map(|z| z.norm_sqr()).sum(),
        total(&random.coefficients()),
        total(&optimized.coefficients()),
    ])
}

fn median<T: Scalar>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * T::of(0.5)
    }
}

/// Median over seeds of the sum received power versus radar count.
///
/// Seed `i` uses surface seed `derive_indexed(seed, "surface", i)`, bearing
/// seed `derive_indexed(seed, "bearings", i)` and random pattern seed
/// `derive_indexed(seed, "random-pattern", i)`, all shared across radar
/// counts.
pub fn radar_count_sweep<T: Scalar>(
    template: &Scenario<T>,
    radar_counts: &[usize],
    strategy: &Strategy<T>,
    seeds: usize,
) -> Result<SweepTable> {
    if radar_counts.is_empty() || seeds == 0 {
        return Err(Error::Shape("radar-count sweep needs radar counts and at least one seed".into()));
    }
    if radar_counts[0] == 0 || radar_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Shape("radar counts must be positive and strictly increasing".into()));
    }
    let master = template.seed;
    let jobs: Vec<(usize, usize)> = radar_counts
        .iter()
        .flat_map(|&k| (0..seeds).map(move |i| (k, i)))
        .collect();
    let results: Vec<[T; 3]> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let i = i as u64;
            let s = place_radars(
                template,
                k,
                derive_indexed(master, "surface", i),
                derive_indexed(master, "bearings", i),
            )?;
            sum_powers(&s, strategy, derive_indexed(master, "random-pattern", i))
        })
        .collect::<Result<_>>()?;

    let mut cols: [Vec<f64>; 3] = Default::default();
    for chunk in results.chunks(seeds) {
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(floor_dbm(mw_to_dbm(median(chunk.iter().map(|r| r[c]).collect())).to_f64_lossy()));
        }
    }
    let spec = SweepSpec::RadarCount {
        scenario: template.clone(),
        strategy: strategy.clone(),
        radar_counts: radar_counts.to_vec(),
        seeds,
    };
    let [no_irs_dbm, random_dbm, optimized_dbm] = cols;
    Ok(SweepTable {
        axis_label: "radars".into(),
        axis: radar_counts.iter().map(|&k| k as f64).collect(),
        no_irs_dbm,
        random_dbm,
        optimized_dbm,
        metadata: metadata(&spec, master, template.irs_elements(), strategy.algorithm)?,
    })
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Inputs of [`case_study_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct CaseStudyConfig<T> {
    #[serde(default)]
    pub seed: u64,
    /// Realizations behind every median.
    #[serde(default = "seeds_default")]
    pub seeds: usize,
    #[serde(default = "grid_default")]
    pub angle_grid_deg: Vec<T>,
    #[serde(default = "counts_default")]
    pub radar_counts: Vec<usize>,
    /// IRS `(rows, cols)` of the angle sweep.
    #[serde(default = "fig4_irs_default")]
    pub angle_irs: (usize, usize),
    /// IRS `(rows, cols)` of the radar-count sweep.
    #[serde(default = "fig5_irs_default")]
    pub count_irs: (usize, usize),
    #[serde(default)]
    pub scenario: Scenario<T>,
    #[serde(default)]
    pub angle_strategy: Strategy<T>,
    #[serde(default = "mmse_strategy")]
    pub count_strategy: Strategy<T>,
}

fn seeds_default() -> usize {
    20
}

fn grid_default<T: Scalar>() -> Vec<T> {
    (-90..=90).map(|d| T::of(f64::from(d))).collect()
}

fn counts_default() -> Vec<usize> {
    (1..=6).collect()
}

fn fig4_irs_default() -> (usize, usize) {
    (2, 4)
}

fn fig5_irs_default() -> (usize, usize) {
    (5, 10)
}

fn mmse_strategy<T: Scalar>() -> Strategy<T> {
    Strategy::with(Algorithm::Mmse)
}

impl<T: Scalar> Default for CaseStudyConfig<T> {
    fn default() -> Self {
        Self {
            seed: 0,
            seeds: seeds_default(),
            angle_grid_deg: grid_default(),
            radar_counts: counts_default(),
            angle_irs: fig4_irs_default(),
            count_irs: fig5_irs_default(),
            scenario: Scenario::default(),
            angle_strategy: Strategy::default(),
            count_strategy: mmse_strategy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSummary {
    pub file: String,
    pub elements: usize,
    pub algorithm: String,
    pub rows: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub no_irs: f64,
    pub random: f64,
    pub optimized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionStats {
    pub seeds: usize,
    pub median_db: f64,
    pub min_db: f64,
    pub max_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudySummary {
    pub config_digest: String,
    pub seed: u64,
    /// No-IRS minus optimized power at 0° in the angle-sweep realization.
    pub suppression_db_at_0deg: f64,
    /// The same quantity over all `seeds` surface realizations.
    pub suppression_over_seeds: SuppressionStats,
    pub slopes_db_per_radar: Slopes,
    pub fig4: FigureSummary,
    pub fig5: FigureSummary,
}

/// Tables and summary of a case-study run, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudy {
    pub fig4: SweepTable,
    pub fig5: SweepTable,
    pub summary: CaseStudySummary,
}

pub const FIG4_FILE: &str = "fig4_analog.csv";
pub const FIG5_FILE: &str = "fig5_analog.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Suppression (no-IRS minus optimized, dB) at the designed bearing for
/// one surface seed.
fn suppression_at_zero<T: Scalar>(scenario: &Scenario<T>, strategy: &Strategy<T>) -> Result<f64> {
    let t = angle_sweep(scenario, strategy, &[T::zero()])?;
    Ok(t.no_irs_dbm[0] - t.optimized_dbm[0])
}

/// Run both case studies in memory.
pub fn run_case_study<T: Scalar>(config: &CaseStudyConfig<T>) -> Result<CaseStudy> {
    if config.seeds == 0 {
        return Err(Error::range("seeds", 0.0, ">= 1"));
    }
    let mut angle_scn = config.scenario.clone();
    angle_scn.seed = config.seed;
    angle_scn.irs.array = irs_panel(config.angle_irs.0, config.angle_irs.1);
    angle_scn.radars = vec![config.scenario.radars.first().cloned().unwrap_or_else(|| Radar::at([T::zero(); 3]))];
    angle_scn.radars[0].position = angle_scn.bearing_position(T::zero(), T::of(DEFAULT_RANGE_M));
    angle_scn.target.surface_seed = derive_indexed(config.seed, "surface", 0);
    let fig4 = angle_sweep(&angle_scn, &config.angle_strategy, &config.angle_grid_deg)?;

    let per_seed: Vec<f64> = (0..config.seeds)
        .into_par_iter()
        .map(|i| {
            let mut s = angle_scn.clone();
            s.target.surface_seed = derive_indexed(config.seed, "surface", i as u64);
            suppression_at_zero(&s, &config.angle_strategy)
        })
        .collect::<Result<_>>()?;
    let suppression_db_at_0deg = per_seed[0];
    let sorted = {
        let mut v = per_seed.clone();
        v.sort_by(f64::total_cmp);
        v
    };

    let mut count_scn = config.scenario.clone();
    count_scn.seed = config.seed;
    count_scn.irs.array = irs_panel(config.count_irs.0, config.count_irs.1);
    let fig5 = radar_count_sweep(&count_scn, &config.radar_counts, &config.count_strategy, config.seeds)?;

    let summary = CaseStudySummary {
        config_digest: digest_of(config)?,
        seed: config.seed,
        suppression_db_at_0deg,
        suppression_over_seeds: SuppressionStats {
            seeds: config.seeds,
            median_db: median(sorted.clone()),
            min_db: sorted[0],
            max_db: sorted[sorted.len() - 1],
        },
        slopes_db_per_radar: Slopes {
            no_irs: slope(&fig5.axis, &fig5.no_irs_dbm),
            random: slope(&fig5.axis, &fig5.random_dbm),
            optimized: slope(&fig5.axis, &fig5.optimized_dbm),
        },
        fig4: FigureSummary {
            file: FIG4_FILE.into(),
            elements: fig4.metadata.elements,
            algorithm: fig4.metadata.algorithm.clone(),
            rows: fig4.len(),
            digest: fig4.metadata.digest.clone(),
        },
        fig5: FigureSummary {
            file: FIG5_FILE.into(),
            elements: fig5.metadata.elements,
            algorithm: fig5.metadata.algorithm.clone(),
            rows: fig5.len(),
            digest: fig5.metadata.digest.clone(),
        },
    };
    Ok(CaseStudy { fig4, fig5, summary })
}

/// Write `contents` to `path` through a temporary file in the same
/// directory and an atomic rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Run both case studies and write `fig4_analog.csv`, `fig5_analog.csv`
/// and `summary.json` into `out_dir`. Nothing is written unless every
/// computation succeeds.
pub fn case_study_report<T: Scalar>(config: &CaseStudyConfig<T>, out_dir: &Path) -> Result<CaseStudySummary> {
    let study = run_case_study(config)?;
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut summary = serde_json::to_string_pretty(&study.summary).map_err(|e| Error::Shape(e.to_string()))?;
    summary.push('\n');
    write_atomic(&out_dir.join(FIG4_FILE), study.fig4.to_csv().as_bytes())?;
    write_atomic(&out_dir.join(FIG5_FILE), study.fig5.to_csv().as_bytes())?;
    write_atomic(&out_dir.join(SUMMARY_FILE), summary.as_bytes())?;
    Ok(study.summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::optimal_residual_bound;

    fn base() -> Scenario<f64> {
        Scenario::default()
    }

    #[test]
    fn no_irs_column_is_direct_echo_power() {
        let s = base();
        let t = angle_sweep(&s, &Strategy::default(), &[-30.0, 0.0, 45.0]).unwrap();
        for (i, &deg) in [-30.0, 0.0, 45.0].iter().enumerate() {
            let p = posed(&validate_scenario(&s).unwrap(), deg, 2000.0).unwrap();
            let g = synth_surface_echo(&p, 0).unwrap();
            let expected = 10.0 * (dbm_to_mw(15.0) * g.norm_sqr()).log10();
            assert!((t.no_irs_dbm[i] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn optimized_reaches_bound_at_design_angle() {
        for seed in 0..10 {
            let mut s = base();
            s.target.surface_seed = seed;
            let t = angle_sweep(&s, &Strategy::default(), &[0.0]).unwrap();
            let (g, h) = single_channels(&validate_scenario(&s).unwrap()).unwrap();
            let bound = optimal_residual_bound(g, &h);
            let bound_dbm = floor_dbm(10.0 * (dbm_to_mw(15.0) * bound * bound).log10());
            if bound > 1e-9 * g.norm() {
                assert!((t.optimized_dbm[0] - bound_dbm).abs() < 1e-6, "{} vs {bound_dbm}", t.optimized_dbm[0]);
            } else {
                assert!(t.no_irs_dbm[0] - t.optimized_dbm[0] > 100.0);
            }
            assert!(t.optimized_dbm[0] <= t.random_dbm[0]);
        }
    }

    #[test]
    fn multi_radar_scenario_rejected_by_angle_sweep() {
        let s = place_radars(&base(), 2, 0, 0).unwrap();
        assert_eq!(angle_sweep(&s, &Strategy::default(), &[0.0]).unwrap_err().category(), "shape");
    }

    #[test]
    fn design_pattern_radar_count_rules() {
        let two = place_radars(&base(), 2, 0, 0).unwrap();
        for alg in [Algorithm::ReverseAlignment, Algorithm::NullZone] {
            assert_eq!(design_pattern(&two, &Strategy::with(alg)).unwrap_err().category(), "shape");
        }
        let p = design_pattern(&two, &Strategy::with(Algorithm::Mmse)).unwrap();
        assert_eq!(p.len(), two.irs_elements());
        let q = design_pattern(&base(), &Strategy { bits: Some(2), ..Strategy::default() }).unwrap();
        assert_eq!(q.bits, Some(2));
    }

    #[test]
    fn bearings_rule() {
        assert_eq!(radar_bearings::<f64>(1, 5), vec![0.0]);
        let six = radar_bearings::<f64>(6, 5);
        assert_eq!(radar_bearings::<f64>(3, 5), six[..3].to_vec());
        assert!(six.iter().all(|b| b.abs() <= RADAR_SPAN_DEG));
        assert_ne!(six, radar_bearings::<f64>(6, 6));
        let s = place_radars(&base(), 4, 1, 2).unwrap();
        for r in &s.radars {
            assert!((distance(r.position, s.target.position) - 2000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_radar_count_matches_angle_sweep() {
        let mut template = base();
        template.irs.array = irs_panel(5, 10);
        template.seed = 3;
        let strategy = Strategy::with(Algorithm::Mmse);
        let counts = radar_count_sweep(&template, &[1], &strategy, 1).unwrap();
        let mut single = template.clone();
        single.target.surface_seed = derive_indexed(3, "surface", 0);
        let angle = angle_sweep(&single, &Strategy::default(), &[0.0]).unwrap();
        assert!((counts.no_irs_dbm[0] - angle.no_irs_dbm[0]).abs() < 1e-9);
        // both reach the exact single-radar optimum, which may sit at rounding level
        let floor = (angle.no_irs_dbm[0] - 150.0).max(DBM_FLOOR);
        assert!(
            (counts.optimized_dbm[0] - angle.optimized_dbm[0]).abs() < 1e-6
                || (counts.optimized_dbm[0] < floor && angle.optimized_dbm[0] < floor)
        );
    }

    #[test]
    fn tables_reproduce_from_metadata() {
        let mut s = base();
        s.seed = 11;
        let t = angle_sweep(&s, &Strategy::default(), &[-10.0, 0.0, 10.0]).unwrap();
        assert_eq!(t.reproduce().unwrap(), t);
        let r = radar_count_sweep(&s, &[1, 2], &Strategy::with(Algorithm::Mmse), 2).unwrap();
        assert_eq!(r.reproduce().unwrap(), r);
    }

    #[test]
    fn csv_format() {
        let t = SweepTable {
            axis_label: "x".into(),
            axis: vec![0.0, 1.5],
            no_irs_dbm: vec![-80.25, DBM_FLOOR],
            random_dbm: vec![-81.0, -82.0],
            optimized_dbm: vec![floor_dbm(f64::NEG_INFINITY), -1e-3],
            metadata: SweepMetadata {
                digest: String::new(),
                seed: 0,
                elements: 1,
                strategies: vec![],
                algorithm: String::new(),
                spec: serde_json::Value::Null,
            },
        };
        assert_eq!(
            t.to_csv(),
            "axis,no_irs_dbm,random_dbm,optimized_dbm\n0.0,-80.25,-81.0,-400.0\n1.5,-400.0,-82.0,-0.001\n"
        );
    }

    #[test]
    fn slope_of_line() {
        assert!((slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn null_zone_lowers_worst_case_over_zone() {
        let strategy = Strategy { algorithm: Algorithm::NullZone, zone_deg: (-2.0, 2.0), zone_step_deg: 1.0, ..Strategy::default() };
        let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let t = angle_sweep(&base(), &strategy, &grid).unwrap();
        let worst = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(worst(&t.optimized_dbm) < worst(&t.no_irs_dbm));
        assert!(worst(&t.optimized_dbm) < worst(&t.random_dbm));
    }
}
