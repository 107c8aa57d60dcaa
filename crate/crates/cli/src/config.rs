//! Run configuration: command-line flags over a TOML config file over
//! built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bemest::table::Provenance;
use bemest::wcs::EmuStates;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Full,
    Wcs,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Wcs => "wcs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmuCoords {
    #[default]
    All,
    Zones,
}

impl From<EmuCoords> for EmuStates {
    fn from(c: EmuCoords) -> EmuStates {
        match c {
            EmuCoords::All => EmuStates::All,
            EmuCoords::Zones => EmuStates::Zones,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generated {
    #[default]
    Campus,
    FourZone,
}

/// Every setting, each optional so layers can be merged. Field names double
/// as config-file keys.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Building model (TOML).
    #[arg(long, global = true)]
    pub building: Option<PathBuf>,
    /// Hourly weather table.
    #[arg(long, global = true)]
    pub weather: Option<PathBuf>,
    /// Per-zone supply flow and temperature table.
    #[arg(long, global = true)]
    pub hvac: Option<PathBuf>,
    /// Internal-load and surface-gain profiles.
    #[arg(long, global = true)]
    pub loads: Option<PathBuf>,
    /// Zone measurements written by `simulate`.
    #[arg(long, global = true)]
    pub measurements: Option<PathBuf>,
    /// Truth trajectory written by `simulate`; enables RMSE reporting.
    #[arg(long, global = true)]
    pub truth: Option<PathBuf>,
    /// Partition written by `cluster`; clustered in-process when absent.
    #[arg(long, global = true)]
    pub partition: Option<PathBuf>,
    /// Integration step in seconds; must divide the data interval.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Use only the first this many input records.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Upper bound of the uniform draw for each sensor's noise variance, °C².
    #[arg(long, global = true)]
    pub max_noise_variance: Option<f64>,
    /// Process noise on load states, W² per data interval.
    #[arg(long, global = true)]
    pub process_noise: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Also write H, B and C at design flow as MatrixMarket files.
    #[arg(long, global = true)]
    #[serde(default)]
    pub dump_matrices: bool,
    /// Coordinates entering the divergence metric.
    #[arg(long, global = true, value_enum)]
    pub emu_states: Option<EmuCoords>,
    /// Records skipped before summarizing the divergence metric.
    #[arg(long, global = true)]
    pub burn_in: Option<usize>,
    /// Grid rows of the generated campus (`bench`, `generate`).
    #[arg(long, global = true)]
    pub rows: Option<usize>,
    /// Grid columns of the generated campus (`bench`, `generate`).
    #[arg(long, global = true)]
    pub cols: Option<usize>,
    /// Hours of generated inputs (`bench`, `generate`).
    #[arg(long, global = true)]
    pub hours: Option<usize>,
    /// Which building `generate` writes.
    #[arg(long, global = true, value_enum)]
    pub kind: Option<Generated>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),*) => {
        Settings {
            $($field: $top.$field.or($base.$field),)*
            dump_matrices: $top.dump_matrices || $base.dump_matrices,
        }
    };
}

impl Settings {
    /// Values from `self` win; missing ones come from `base`.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(
            self, base, building, weather, hvac, loads, measurements, truth, partition, dt, horizon,
            seed, max_noise_variance, process_noise, out, mode, emu_states, burn_in, rows, cols,
            hours, kind
        )
    }

    pub fn from_file(path: &Path) -> Result<Settings, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut s: Settings = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        // Relative paths in a config file are relative to the file.
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut s.building,
            &mut s.weather,
            &mut s.hvac,
            &mut s.loads,
            &mut s.measurements,
            &mut s.truth,
            &mut s.partition,
            &mut s.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(s)
    }
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_MAX_NOISE_VARIANCE: f64 = 0.5;
pub const DEFAULT_BURN_IN: usize = 31 * 24;

/// Fully resolved configuration for one command.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub building: Option<PathBuf>,
    pub weather: Option<PathBuf>,
    pub hvac: Option<PathBuf>,
    pub loads: Option<PathBuf>,
    pub measurements: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub partition: Option<PathBuf>,
    pub dt: Option<f64>,
    pub horizon: Option<usize>,
    pub seed: u64,
    pub max_noise_variance: f64,
    pub process_noise: f64,
    // Where results land does not change them, so it stays out of the hash.
    #[serde(skip)]
    pub out: PathBuf,
    pub mode: Mode,
    pub dump_matrices: bool,
    pub emu_states: EmuCoords,
    pub burn_in: usize,
    pub rows: usize,
    pub cols: usize,
    pub hours: usize,
    pub kind: Generated,
}

impl RunConfig {
    pub fn resolve(command: &str, s: Settings) -> RunConfig {
        RunConfig {
            command: command.into(),
            building: s.building,
            weather: s.weather,
            hvac: s.hvac,
            loads: s.loads,
            measurements: s.measurements,
            truth: s.truth,
            partition: s.partition,
            dt: s.dt,
            horizon: s.horizon,
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            max_noise_variance: s.max_noise_variance.unwrap_or(DEFAULT_MAX_NOISE_VARIANCE),
            process_noise: s
                .process_noise
                .unwrap_or(bemest::filtering::DEFAULT_LOAD_PROCESS_NOISE),
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
            mode: s.mode.unwrap_or_default(),
            dump_matrices: s.dump_matrices,
            emu_states: s.emu_states.unwrap_or_default(),
            burn_in: s.burn_in.unwrap_or(DEFAULT_BURN_IN),
            rows: s.rows.unwrap_or(6),
            cols: s.cols.unwrap_or(6),
            hours: s.hours.unwrap_or(7 * 24),
            kind: s.kind.unwrap_or_default(),
        }
    }

    /// First 16 hex digits of the SHA-256 of the resolved configuration.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::new(self.hash(), self.seed).with("command", &self.command)
    }

    /// A path the command cannot run without.
    pub fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, String> {
        path.as_deref()
            .ok_or_else(|| format!("`{}` needs --{flag} (or `{}` in the config file)", self.command, flag.replace('-', "_")))
    }
}
