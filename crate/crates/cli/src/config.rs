//! Scenario files.
//!
//! A scenario file is TOML with the sections `world`, `radars` (array of
//! tables), `target`, `irs`, `scatterers` (array of tables), `covert` and
//! `run`. Every section and key is optional; unknown keys are rejected.
//! See `docs/config.md` for the full grammar.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use em_shield::covert::{CovertGeometry, Fading};
use em_shield::harness::{Algorithm, RandomPolicy, Strategy};
use em_shield::geometry::{PlanarArray, Vec3};
use em_shield::recon::AngleGrid;
use em_shield::scenario::{validate_scenario, Irs, Radar, Scatterer, Scenario, Target, DEFAULT_CARRIER_HZ};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    Design,
    SweepAngle,
    SweepRadars,
    Recon,
    Covert,
    Detect,
    CaseStudy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Design => "design",
            Command::SweepAngle => "sweep-angle",
            Command::SweepRadars => "sweep-radars",
            Command::Recon => "recon",
            Command::Covert => "covert",
            Command::Detect => "detect",
            Command::CaseStudy => "case-study",
        }
    }

    /// File written inside the output directory; `None` for case-study,
    /// which writes its own fixed set of files.
    pub fn file_name(self, format: Format) -> Option<String> {
        let stem = match self {
            Command::Design => "pattern",
            Command::SweepAngle => "sweep_angle",
            Command::SweepRadars => "sweep_radars",
            Command::Recon => "recon",
            Command::Covert => "covert_pattern",
            Command::Detect => "detection",
            Command::CaseStudy => return None,
        };
        Some(format!("{stem}.{}", format.extension()))
    }

    fn algorithms(self) -> &'static [AlgorithmName] {
        use AlgorithmName::*;
        match self {
            Command::Design => &[ReverseAlignment, Mmse, NullZone, Spoof],
            Command::SweepAngle | Command::CaseStudy => &[ReverseAlignment, Mmse, NullZone],
            Command::SweepRadars => &[ReverseAlignment, Mmse],
            Command::Recon | Command::Covert | Command::Detect => &[],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmName {
    ReverseAlignment,
    Mmse,
    NullZone,
    /// Decoy design through the first scatterer under `run.leak_budget_dbm`.
    Spoof,
}

impl AlgorithmName {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmName::ReverseAlignment => "reverse-alignment",
            AlgorithmName::Mmse => "mmse",
            AlgorithmName::NullZone => "null-zone",
            AlgorithmName::Spoof => "spoof",
        }
    }

    /// Stealth algorithm of the sweeps; `None` for spoofing.
    pub fn stealth(self) -> Option<Algorithm> {
        match self {
            AlgorithmName::ReverseAlignment => Some(Algorithm::ReverseAlignment),
            AlgorithmName::Mmse => Some(Algorithm::Mmse),
            AlgorithmName::NullZone => Some(Algorithm::NullZone),
            AlgorithmName::Spoof => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct World {
    pub carrier_hz: f64,
    pub seed: u64,
}

impl Default for World {
    fn default() -> Self {
        Self {
            carrier_hz: DEFAULT_CARRIER_HZ,
            seed: 0,
        }
    }
}

/// `[covert]`: the Alice/Bob/Willie link and Willie's detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovertSection {
    pub alice: Vec3<f64>,
    pub bob: Vec3<f64>,
    pub willie: Vec3<f64>,
    pub irs: PlanarArray<f64>,
    pub element_amp_gain: f64,
    pub tx_power_dbm: f64,
    pub noise_b_dbm: f64,
    pub noise_w_dbm: f64,
    pub direct_blockage_db: f64,
    pub fading: Fading,
    /// Budget on Willie's received signal power; `-inf` allows none.
    pub epsilon_dbm: f64,
    /// Channel uses per detection decision.
    pub samples: usize,
    pub trials: usize,
}

impl CovertSection {
    pub fn geometry(&self) -> CovertGeometry<f64> {
        CovertGeometry {
            alice: self.alice,
            bob: self.bob,
            willie: self.willie,
            irs: self.irs.clone(),
            element_amp_gain: self.element_amp_gain,
            tx_power_dbm: self.tx_power_dbm,
            noise_b_dbm: self.noise_b_dbm,
            noise_w_dbm: self.noise_w_dbm,
            direct_blockage_db: self.direct_blockage_db,
        }
    }
}

impl Default for CovertSection {
    fn default() -> Self {
        let g = CovertGeometry::default();
        Self {
            alice: g.alice,
            bob: g.bob,
            willie: g.willie,
            irs: g.irs,
            element_amp_gain: g.element_amp_gain,
            tx_power_dbm: g.tx_power_dbm,
            noise_b_dbm: g.noise_b_dbm,
            noise_w_dbm: g.noise_w_dbm,
            direct_blockage_db: g.direct_blockage_db,
            fading: Fading::default(),
            epsilon_dbm: -100.0,
            samples: 100,
            trials: 100_000,
        }
    }
}

/// `[run]`: what to do and the knobs of each command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Overrides `world.seed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Phase quantization of designed patterns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    pub random_policy: RandomPolicy,
    pub zone_deg: [f64; 2],
    pub zone_step_deg: f64,
    /// Bearing grid of `sweep-angle` and of the case-study angle sweep.
    pub grid: AngleGrid<f64>,
    pub radar_counts: Vec<usize>,
    pub seeds: usize,
    /// Leak budget of the spoofing design, received power at the radar.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leak_budget_dbm: Option<f64>,
    pub sensors: usize,
    pub snapshots: usize,
    /// Per-sensor noise power relative to unit-power radar probes.
    pub noise_power: f64,
    pub music_step_deg: f64,
    pub case_angle_irs: [usize; 2],
    pub case_count_irs: [usize; 2],
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            command: None,
            algorithm: None,
            output: None,
            format: Format::Csv,
            seed: None,
            bits: None,
            random_policy: RandomPolicy::default(),
            zone_deg: [-5.0, 5.0],
            zone_step_deg: 0.5,
            grid: AngleGrid {
                start_deg: -90.0,
                stop_deg: 90.0,
                step_deg: 1.0,
            },
            radar_counts: (1..=6).collect(),
            seeds: 20,
            leak_budget_dbm: None,
            sensors: 8,
            snapshots: 64,
            noise_power: 0.01,
            music_step_deg: 0.1,
            case_angle_irs: [2, 4],
            case_count_irs: [5, 10],
        }
    }
}

/// On-disk layout of a scenario file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub world: World,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radars: Option<Vec<Radar<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Target<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irs: Option<Irs<f64>>,
    pub scatterers: Vec<Scatterer<f64>>,
    pub covert: CovertSection,
    pub run: RunSection,
}

/// A parsed and normalized scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    /// Validated; `scenario.seed` is `world.seed`.
    pub scenario: Scenario<f64>,
    pub covert: CovertSection,
    /// `None` for commands without a design choice.
    pub algorithm: Option<AlgorithmName>,
    pub output: PathBuf,
    pub format: Format,
    pub seed_override: Option<u64>,
    pub run: RunSection,
}

impl RunSpec {
    /// Path of the single artifact, or the output directory for case-study.
    pub fn artifact(&self) -> PathBuf {
        match self.command.file_name(self.format) {
            Some(name) => self.output.join(name),
            None => self.output.clone(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed_override.unwrap_or(self.scenario.seed)
    }

    /// Stealth strategy of the sweeps and of `design`.
    pub fn strategy(&self) -> Strategy<f64> {
        Strategy {
            algorithm: self.algorithm.and_then(AlgorithmName::stealth).unwrap_or_default(),
            random_policy: self.run.random_policy,
            bits: self.run.bits,
            zone_deg: (self.run.zone_deg[0], self.run.zone_deg[1]),
            zone_step_deg: self.run.zone_step_deg,
        }
    }

    /// Scenario-file text that parses back to this spec.
    pub fn to_config_string(&self) -> Result<String, CliError> {
        let s = &self.scenario;
        let file = ConfigFile {
            world: World {
                carrier_hz: s.carrier_hz,
                seed: s.seed,
            },
            radars: Some(s.radars.clone()),
            target: Some(s.target.clone()),
            irs: Some(s.irs.clone()),
            scatterers: s.scatterers.clone(),
            covert: self.covert.clone(),
            run: RunSection {
                command: Some(self.command),
                algorithm: self.algorithm,
                output: Some(self.output.clone()),
                format: self.format,
                seed: self.seed_override,
                ..self.run.clone()
            },
        };
        toml::to_string(&file).map_err(|e| CliError::Usage(format!("cannot serialize scenario: {e}")))
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub algorithm: Option<AlgorithmName>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn syntax_error(text: &str, e: toml::de::Error) -> CliError {
    let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
    let message = e.message().trim().to_string();
    if message.starts_with("unknown field") {
        CliError::UnknownKey { line, message }
    } else {
        CliError::Syntax { line, message }
    }
}

pub fn parse_config(text: &str) -> Result<RunSpec, CliError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunSpec, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| syntax_error(text, e))?;
    let defaults = Scenario::<f64>::default();
    let raw = Scenario {
        carrier_hz: file.world.carrier_hz,
        radars: file.radars.unwrap_or(defaults.radars),
        target: file.target.unwrap_or(defaults.target),
        irs: file.irs.unwrap_or(defaults.irs),
        scatterers: file.scatterers,
        seed: file.world.seed,
    };
    let scenario = validate_scenario(&raw)?;

    let command = overrides.command.or(file.run.command).unwrap_or_default();
    let format = overrides.format.unwrap_or(file.run.format);
    let algorithm = match overrides.algorithm.or(file.run.algorithm) {
        Some(a) if !command.algorithms().contains(&a) => {
            return Err(CliError::Usage(format!("algorithm {} is not available for {command}", a.name())));
        }
        Some(a) => Some(a),
        None => match command {
            Command::Design | Command::SweepAngle | Command::CaseStudy if scenario.radars.len() == 1 => {
                Some(AlgorithmName::ReverseAlignment)
            }
            Command::Design | Command::SweepAngle | Command::CaseStudy | Command::SweepRadars => Some(AlgorithmName::Mmse),
            Command::Recon | Command::Covert | Command::Detect => None,
        },
    };
    if command == Command::CaseStudy && format != Format::Csv {
        return Err(CliError::Usage("case-study writes CSV tables; use --format csv".into()));
    }
    let output = overrides
        .output
        .clone()
        .or(file.run.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(RunSpec {
        command,
        scenario,
        covert: file.covert,
        algorithm,
        output,
        format,
        seed_override: overrides.seed.or(file.run.seed),
        run: RunSection {
            command: None,
            algorithm: None,
            output: None,
            format: Format::Csv,
            seed: None,
            ..file.run
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let spec = parse_config("[[radars]]\nposition = [0.0, 0.0, 0.0]\n").unwrap();
        assert_eq!(spec.scenario.carrier_hz, 6e9);
        assert_eq!(spec.scenario.radars[0].tx_power_dbm, 15.0);
        assert_eq!(spec.scenario.target.absorb_eff, 0.8);
        assert_eq!(spec.command, Command::Design);
        assert_eq!(spec.algorithm, Some(AlgorithmName::ReverseAlignment));
        assert_eq!(spec.artifact(), PathBuf::from("./pattern.csv"));
    }

    #[test]
    fn empty_file_is_the_default_scenario() {
        let spec = parse_config("").unwrap();
        assert_eq!(spec.scenario, validate_scenario(&Scenario::default()).unwrap());
    }

    #[test]
    fn absorb_eff_out_of_range_names_the_key() {
        let e = parse_config("[target]\nabsorb_eff = 1.5\n").unwrap_err();
        assert_eq!(e.category(), "range");
        assert!(e.to_string().contains("absorb_eff"), "{e}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = parse_config("[world]\nseed = 3\n\n[irs]\nmode = \"unit-modulus\"\nflavour = 2\n").unwrap_err();
        match &e {
            CliError::UnknownKey { line, message } => {
                assert_eq!(*line, 6, "{message}");
                assert!(message.contains("flavour"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn syntax_error_reports_line() {
        let e = parse_config("[world]\ncarrier_hz = 6e9\nseed = = 1\n").unwrap_err();
        match e {
            CliError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn algorithm_must_fit_command() {
        let e = parse_config("[run]\ncommand = \"covert\"\nalgorithm = \"mmse\"\n").unwrap_err();
        assert_eq!(e.category(), "usage");
        let two = "[[radars]]\nposition = [0.0, 0.0, 0.0]\n[[radars]]\nposition = [100.0, 0.0, 0.0]\n";
        assert_eq!(parse_config(two).unwrap().algorithm, Some(AlgorithmName::Mmse));
    }

    #[test]
    fn overrides_win() {
        let text = "[world]\nseed = 4\n[run]\ncommand = \"sweep-angle\"\nseed = 5\nformat = \"json\"\n";
        let spec = parse_config(text).unwrap();
        assert_eq!((spec.seed(), spec.format, spec.command), (5, Format::Json, Command::SweepAngle));
        assert_eq!(spec.artifact(), PathBuf::from("./sweep_angle.json"));
        let o = Overrides {
            seed: Some(9),
            command: Some(Command::Detect),
            ..Overrides::default()
        };
        let spec = parse_config_with(text, &o).unwrap();
        assert_eq!((spec.seed(), spec.command, spec.algorithm), (9, Command::Detect, None));
    }

    #[test]
    fn round_trip() {
        let text = r#"
[world]
carrier_hz = 5.8e9
seed = 11

[[radars]]
position = [10.0, -20.0, 0.0]
tx_power_dbm = 20

[[radars]]
position = [-300.0, 0.0, 50.0]

[target]
absorb_eff = 0.9
surface_mode = "specular"

[irs]
mode = "amplitude-adjustable"
array = { rows = 3, cols = 3, center = [0.0, 0.4, 0.0], normal = [0.0, 0.0, -1.0] }

[[scatterers]]
position = [50.0, 50.0, 1500.0]
reflectivity = [0.5, -0.25]

[covert]
fading = "rayleigh"
epsilon_dbm = -inf
bob = [70.0, -5.0, 0.0]

[run]
command = "sweep-radars"
seeds = 4
radar_counts = [1, 3]
grid = { start_deg = -10.0, stop_deg = 10.0, step_deg = 0.5 }
bits = 3
"#;
        let spec = parse_config(text).unwrap();
        let again = parse_config(&spec.to_config_string().unwrap()).unwrap();
        assert_eq!(spec, again);
        let third = parse_config(&again.to_config_string().unwrap()).unwrap();
        assert_eq!(again.to_config_string().unwrap(), third.to_config_string().unwrap());
    }

    #[test]
    fn case_study_is_csv_only() {
        let e = parse_config("[run]\ncommand = \"case-study\"\nformat = \"json\"\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
