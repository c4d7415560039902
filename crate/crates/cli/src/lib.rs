//! Batch interface: scenario files in, tables and patterns out.

use std::fmt::Write as _;
use std::path::Path;

use em_shield::covert::{bob_rate, design_covert, synth_covert_channels, willie_min_error_prob, CovertChannels, DetectionReport};
use em_shield::design::{design_spoof, quantize_pattern, DesignResult};
use em_shield::geometry::{dot, norm, sub, AngleSpec, PlanarArray};
use em_shield::harness::{
    angle_sweep, case_study_report, design_pattern, radar_count_sweep, slope, write_atomic, CaseStudyConfig, Strategy,
    SweepTable, DBM_FLOOR,
};
use em_shield::propagation::{echo_and_power, synthesize, ReflectionPattern};
use em_shield::recon::{estimate_aoa, synth_snapshots, AngleGrid, AoAEstimate, SourceSpec};
use em_shield::scalar::{dbm_to_mw, mw_to_dbm, C};
use em_shield::scenario::Scenario;

pub mod config;

pub use config::{parse_config, parse_config_with, AlgorithmName, Command, Format, Overrides, RunSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {message}")]
    UnknownKey { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] em_shield::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Syntax { .. } => "syntax",
            CliError::UnknownKey { .. } => "unknown-key",
            CliError::Usage(_) => "usage",
            CliError::Domain(e) => e.category(),
        }
    }

    /// 2 for malformed invocations and files, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax { .. } | CliError::UnknownKey { .. } | CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One-line summary for standard output.
    pub summary: String,
}

fn dbm(mw: f64) -> f64 {
    mw_to_dbm(mw).max(DBM_FLOOR)
}

/// Pattern file body: per-element amplitude and phase (radians), 17
/// significant digits, plus the phase resolution.
pub fn pattern_text(pattern: &ReflectionPattern<f64>, format: Format) -> String {
    let bits = pattern.bits.map(|b| b.to_string());
    let mode = match pattern.mode {
        em_shield::scenario::ReflectionMode::UnitModulus => "unit-modulus",
        em_shield::scenario::ReflectionMode::AmplitudeAdjustable => "amplitude-adjustable",
    };
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("element,amplitude,phase_rad,bits\n");
            for (i, (a, p)) in pattern.amplitudes.iter().zip(&pattern.phases).enumerate() {
                let _ = writeln!(out, "{i},{a:.16e},{p:.16e},{}", bits.as_deref().unwrap_or(""));
            }
        }
        Format::Json => {
            let list = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(", ");
            let _ = write!(
                out,
                "{{\n  \"mode\": \"{mode}\",\n  \"bits\": {},\n  \"elements\": {},\n  \"amplitude\": [{}],\n  \"phase_rad\": [{}]\n}}\n",
                bits.as_deref().unwrap_or("null"),
                pattern.len(),
                list(&pattern.amplitudes),
                list(&pattern.phases)
            );
        }
    }
    out
}

fn table_text(table: &SweepTable, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json()?,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    }
    Ok(write_atomic(path, text.as_bytes())?)
}

/// Dispatch a parsed spec and write its artifacts.
pub fn run(spec: &RunSpec) -> Result<Outcome, CliError> {
    let summary = match spec.command {
        Command::Design => design(spec)?,
        Command::SweepAngle => sweep_angle(spec)?,
        Command::SweepRadars => sweep_radars(spec)?,
        Command::Recon => recon(spec)?,
        Command::Covert => covert(spec)?,
        Command::Detect => detect(spec)?,
        Command::CaseStudy => case_study(spec)?,
    };
    Ok(Outcome { summary })
}

fn scenario(spec: &RunSpec) -> Scenario<f64> {
    Scenario {
        seed: spec.seed(),
        ..spec.scenario.clone()
    }
}

fn design(spec: &RunSpec) -> Result<String, CliError> {
    let s = scenario(spec);
    let ch = synthesize(&s)?;
    let algorithm = spec.algorithm.unwrap_or(AlgorithmName::Mmse);
    let (pattern, decoy) = if algorithm == AlgorithmName::Spoof {
        if s.radars.len() != 1 || s.scatterers.is_empty() {
            return Err(CliError::Usage("spoof needs exactly one radar and at least one scatterer".into()));
        }
        let budget = spec
            .run
            .leak_budget_dbm
            .ok_or_else(|| CliError::Usage("spoof needs run.leak_budget_dbm".into()))?;
        let tx = dbm_to_mw(s.radars[0].tx_power_dbm);
        let DesignResult { pattern, objective, .. } = design_spoof(ch.g[0], &ch.cascade(0), &ch.decoy(0, 0), dbm_to_mw(budget) / tx)?;
        let pattern = match spec.run.bits {
            Some(b) => quantize_pattern(&pattern, b)?,
            None => pattern,
        };
        (pattern, Some(tx * objective))
    } else {
        (design_pattern(&s, &spec.strategy())?, None)
    };

    let mut total = 0.0;
    let mut direct = 0.0;
    let off = ReflectionPattern::off(ch.elements());
    for (k, radar) in s.radars.iter().enumerate() {
        total += echo_and_power(&ch, &pattern, k, radar.tx_power_dbm)?.power_mw;
        direct += echo_and_power(&ch, &off, k, radar.tx_power_dbm)?.power_mw;
    }
    write(&spec.artifact(), &pattern_text(&pattern, spec.format))?;
    let mut line = format!(
        "design: {} on {} elements, residual {:.2} dBm (no IRS {:.2} dBm, suppression {:.2} dB)",
        algorithm.name(),
        pattern.len(),
        dbm(total),
        dbm(direct),
        dbm(direct) - dbm(total)
    );
    if let Some(p) = decoy {
        let _ = write!(line, ", decoy {:.2} dBm", dbm(p));
    }
    let _ = write!(line, " -> {}", spec.artifact().display());
    Ok(line)
}

fn sweep_angle(spec: &RunSpec) -> Result<String, CliError> {
    let grid = spec.run.grid.points()?;
    let t = angle_sweep(&scenario(spec), &spec.strategy(), &grid)?;
    write(&spec.artifact(), &table_text(&t, spec.format)?)?;
    let worst = (0..t.len())
        .map(|i| t.no_irs_dbm[i] - t.optimized_dbm[i])
        .fold(f64::INFINITY, f64::min);
    let i0 = (0..t.len())
        .min_by(|&a, &b| t.axis[a].abs().total_cmp(&t.axis[b].abs()))
        .unwrap_or(0);
    Ok(format!(
        "sweep-angle: {} bearings, suppression {:.2} dB at {}°, worst {:.2} dB -> {}",
        t.len(),
        t.no_irs_dbm[i0] - t.optimized_dbm[i0],
        t.axis[i0],
        worst,
        spec.artifact().display()
    ))
}

fn sweep_radars(spec: &RunSpec) -> Result<String, CliError> {
    let t = radar_count_sweep(&scenario(spec), &spec.run.radar_counts, &spec.strategy(), spec.run.seeds)?;
    write(&spec.artifact(), &table_text(&t, spec.format)?)?;
    Ok(format!(
        "sweep-radars: {} counts x {} seeds, slopes dB/radar no-irs {:.3} random {:.3} optimized {:.3} -> {}",
        t.len(),
        spec.run.seeds,
        slope(&t.axis, &t.no_irs_dbm),
        slope(&t.axis, &t.random_dbm),
        slope(&t.axis, &t.optimized_dbm),
        spec.artifact().display()
    ))
}

/// Azimuth of each radar seen from the target, in the frame of the target
/// surface (the convention of `Scenario::bearing_position`).
pub fn radar_azimuths(s: &Scenario<f64>) -> Vec<f64> {
    let (a, _, n) = s.target.surface.frame();
    s.radars
        .iter()
        .map(|r| {
            let d = sub(r.position, s.target.position);
            let u = [d[0] / norm(d), d[1] / norm(d), d[2] / norm(d)];
            dot(u, a).atan2(dot(u, n)).to_degrees()
        })
        .collect()
}

fn recon_text(e: &AoAEstimate<f64>, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("azimuth_deg,spectrum\n");
            for (a, p) in e.grid_deg.iter().zip(&e.spectrum) {
                let _ = writeln!(out, "{a:?},{p:?}");
            }
            out
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(e).map_err(|e| CliError::Usage(e.to_string()))?;
            text.push('\n');
            text
        }
    })
}

fn recon(spec: &RunSpec) -> Result<String, CliError> {
    let s = &spec.scenario;
    let surface = &s.target.surface;
    let sensors = PlanarArray {
        rows: 1,
        cols: spec.run.sensors,
        spacing: 0.5,
        center: [0.0; 3],
        normal: surface.normal,
        axis: surface.axis,
    }
    .normalized()?;
    let truth = radar_azimuths(s);
    let sources: Vec<SourceSpec<f64>> = truth
        .iter()
        .map(|&deg| SourceSpec {
            angle: AngleSpec::azimuth(deg),
            gain: C::new(1.0, 0.0),
        })
        .collect();
    let block = synth_snapshots(&sensors, &sources, spec.run.noise_power, spec.run.snapshots, spec.seed())?;
    let grid = AngleGrid {
        step_deg: spec.run.music_step_deg,
        ..AngleGrid::default()
    };
    let e = estimate_aoa(&block, sources.len(), &grid)?;
    write(&spec.artifact(), &recon_text(&e, spec.format)?)?;
    let list = |v: &mut dyn Iterator<Item = f64>| v.map(|d| format!("{d:.2}")).collect::<Vec<_>>().join(", ");
    let mut sorted = truth.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(format!(
        "recon: {} sources at [{}] deg (true [{}]), residual {:.3e} -> {}",
        e.angles.len(),
        list(&mut e.angles.iter().map(|a| a.azimuth_deg)),
        list(&mut sorted.into_iter()),
        e.residual,
        spec.artifact().display()
    ))
}

fn covert_design(spec: &RunSpec) -> Result<(CovertChannels<f64>, DesignResult<f64>), CliError> {
    let c = &spec.covert;
    let ch = synth_covert_channels(&c.geometry(), spec.scenario.carrier_hz, c.fading, spec.seed())?;
    let eps = dbm_to_mw(c.epsilon_dbm);
    let mut r = design_covert(&ch, eps, spec.scenario.irs.mode, em_shield::design::MAX_SWEEPS)?;
    if let Some(b) = spec.run.bits {
        r.pattern = quantize_pattern(&r.pattern, b)?;
        r.objective = ch.bob_power(&r.pattern);
    }
    Ok((ch, r))
}

fn covert(spec: &RunSpec) -> Result<String, CliError> {
    let (ch, r) = covert_design(spec)?;
    write(&spec.artifact(), &pattern_text(&r.pattern, spec.format))?;
    Ok(format!(
        "covert: Bob {:.2} dBm ({:.3} bit/s/Hz), Willie {:.2} dBm (budget {:.2} dBm) -> {}",
        dbm(ch.bob_power(&r.pattern)),
        bob_rate(&ch, &r.pattern)?,
        dbm(ch.willie_power(&r.pattern)),
        spec.covert.epsilon_dbm.max(DBM_FLOOR),
        spec.artifact().display()
    ))
}

fn detection_text(d: &DetectionReport, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => format!(
            "p_fa,p_md,xi,threshold,trials,samples,signal_power_mw,gaussian_xi\n{:?},{:?},{:?},{:?},{},{},{:?},{:?}\n",
            d.p_fa, d.p_md, d.xi, d.threshold, d.trials, d.samples, d.signal_power, d.gaussian_xi
        ),
        Format::Json => {
            let mut text = serde_json::to_string_pretty(d).map_err(|e| CliError::Usage(e.to_string()))?;
            text.push('\n');
            text
        }
    })
}

fn detect(spec: &RunSpec) -> Result<String, CliError> {
    let (ch, r) = covert_design(spec)?;
    let d = willie_min_error_prob(&ch, &r.pattern, spec.covert.samples, spec.covert.trials, spec.seed())?;
    write(&spec.artifact(), &detection_text(&d, spec.format)?)?;
    Ok(format!(
        "detect: xi {:.5} (gaussian {:.5}), Willie signal {:.2} dBm, L={}, {} trials -> {}",
        d.xi,
        d.gaussian_xi,
        dbm(d.signal_power),
        d.samples,
        d.trials,
        spec.artifact().display()
    ))
}

fn case_study(spec: &RunSpec) -> Result<String, CliError> {
    let defaults = CaseStudyConfig::<f64>::default();
    let config = CaseStudyConfig {
        seed: spec.seed(),
        seeds: spec.run.seeds,
        angle_grid_deg: spec.run.grid.points()?,
        radar_counts: spec.run.radar_counts.clone(),
        angle_irs: (spec.run.case_angle_irs[0], spec.run.case_angle_irs[1]),
        count_irs: (spec.run.case_count_irs[0], spec.run.case_count_irs[1]),
        scenario: spec.scenario.clone(),
        angle_strategy: Strategy {
            algorithm: spec.strategy().algorithm,
            ..spec.strategy()
        },
        count_strategy: Strategy {
            bits: spec.run.bits,
            ..defaults.count_strategy
        },
    };
    let s = case_study_report(&config, &spec.output)?;
    Ok(format!(
        "case-study: suppression {:.2} dB at 0° (median over {} seeds {:.2} dB), slopes dB/radar no-irs {:.3} random {:.3} \
         optimized {:.3} -> {}",
        s.suppression_db_at_0deg,
        s.suppression_over_seeds.seeds,
        s.suppression_over_seeds.median_db,
        s.slopes_db_per_radar.no_irs,
        s.slopes_db_per_radar.random,
        s.slopes_db_per_radar.optimized,
        spec.artifact().display()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use em_shield::scenario::ReflectionMode;

    #[test]
    fn pattern_csv_has_seventeen_digits() {
        let p = ReflectionPattern {
            bits: Some(3),
            ..ReflectionPattern::unit(vec![std::f64::consts::PI, 0.1])
        };
        let text = pattern_text(&p, Format::Csv);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[2], "3.1415926535897931e0");
        assert_eq!(row[3], "3");
        assert_eq!(row[2].parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn pattern_json_parses() {
        let p = ReflectionPattern::from_coefficients(
            &[em_shield::scalar::C::new(0.5, 0.5), em_shield::scalar::C::new(0.0, -1.0)],
            ReflectionMode::AmplitudeAdjustable,
        );
        let v: serde_json::Value = serde_json::from_str(&pattern_text(&p, Format::Json)).unwrap();
        assert_eq!(v["bits"], serde_json::Value::Null);
        assert_eq!(v["mode"], "amplitude-adjustable");
        assert_eq!(v["phase_rad"][0].as_f64().unwrap(), p.phases[0]);
    }

    #[test]
    fn default_radar_is_broadside() {
        let spec = parse_config("").unwrap();
        assert_eq!(radar_azimuths(&spec.scenario), vec![0.0]);
        let s = &spec.scenario;
        let moved = Scenario {
            radars: vec![em_shield::scenario::Radar::at(s.bearing_position(25.0, 2000.0))],
            ..s.clone()
        };
        assert!((radar_azimuths(&moved)[0] - 25.0).abs() < 1e-9);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let e: CliError = em_shield::Error::Shape("x".into()).into();
        assert_eq!((e.exit_code(), e.category()), (1, "shape"));
    }
}
