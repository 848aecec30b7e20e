//! Experiment configuration: a TOML file whose omitted fields fall back to
//! the reference scenario.

use std::path::{Path, PathBuf};

use lrfhss_core::analytic::{AveragingConfig, CaptureSeriesConfig, DataRate, LinkBudget, TaggedLocation};
use lrfhss_core::channel::{Environment, ShadowedRiceParams};
use lrfhss_core::geometry::{ground_distance_from_slant, SatelliteGeometry};
use lrfhss_core::specfun::SeriesControl;
use lrfhss_core::{D2dSettings, Population, Scenario};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("in field `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Name of the offending field, when the error concerns one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Parse { field, .. } | ConfigError::Invalid { field, .. } => Some(field),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    Simulate,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Lrfhss,
    D2d,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Lrfhss => "lrfhss",
            Scheme::D2d => "d2d",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Full-scale-equivalent device count.
    NUsers,
    /// Devices per km^2.
    Density,
    TxPowerDbm,
    /// Slant distance from the tagged device to the satellite, km.
    DistanceKm,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::NUsers => "n_users",
            SweepVariable::Density => "density",
            SweepVariable::TxPowerDbm => "tx_power_dbm",
            SweepVariable::DistanceKm => "distance_km",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            variable: SweepVariable::NUsers,
            values: vec![1e5, 2e5, 5e5, 1e6, 2e6, 5e6, 1e7, 2e7],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct D2dParams {
    pub d_max_km: f64,
    pub p_lora_success: f64,
}

impl Default for D2dParams {
    fn default() -> Self {
        let d = D2dSettings::default();
        Self {
            d_max_km: d.d_max_km,
            p_lora_success: d.p_lora_success,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub data_rate: DataRate,
    pub environment: Environment,
    pub seed: u64,
    pub slot_s: f64,
    /// Population when the sweep is not over users or density.
    pub n_users: u64,
    /// Area shrink factor with density preserved; 1 is full scale.
    pub area_scale: f64,
    /// Interferer-location realizations of the analytic engine.
    pub realizations: usize,
    /// Minimum simulated slots per sweep point.
    pub trials: usize,
    /// More slots are run until this many packets are tracked.
    pub min_tracked_packets: u64,
    pub wall_time_cap_s: f64,
    /// Ten-term series with alpha = 3.9999 min(b0 g).
    pub paper_mode: bool,
    pub output_path: PathBuf,
    pub schemes: Vec<Scheme>,
    /// Overrides the environment preset when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fading: Option<ShadowedRiceParams>,
    pub geometry: SatelliteGeometry,
    pub link: LinkBudget,
    pub d2d: D2dParams,
    pub sweep: Sweep,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let scn = Scenario::table_iii(DataRate::DR5);
        Self {
            mode: Mode::Analytic,
            data_rate: scn.data_rate,
            environment: Environment::Average,
            seed: scn.seed,
            slot_s: scn.slot_s,
            n_users: scn.n_users(),
            area_scale: 0.01,
            realizations: 1000,
            trials: 4,
            min_tracked_packets: 10_000,
            wall_time_cap_s: 3600.0,
            paper_mode: false,
            output_path: PathBuf::from("out"),
            schemes: vec![Scheme::Lrfhss],
            fading: None,
            geometry: scn.geometry,
            link: scn.link,
            d2d: D2dParams::default(),
            sweep: Sweep::default(),
        }
    }
}

/// Parses configuration text; every omitted field keeps its default.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = toml::Deserializer::new(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
        field: e.path().to_string(),
        message: e.inner().message().trim().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn emit_config(cfg: &ExperimentConfig) -> String {
    toml::to_string_pretty(cfg).expect("configuration is always representable as TOML")
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::invalid("trials", "must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(ConfigError::invalid("realizations", "must be at least 1"));
        }
        if !(self.area_scale > 0.0 && self.area_scale <= 1.0) {
            return Err(ConfigError::invalid(
                "area_scale",
                format!("must lie in (0, 1], got {}", self.area_scale),
            ));
        }
        if !(self.wall_time_cap_s > 0.0) {
            return Err(ConfigError::invalid("wall_time_cap_s", "must be positive"));
        }
        if self.schemes.is_empty() {
            return Err(ConfigError::invalid("schemes", "at least one scheme is required"));
        }
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(ConfigError::invalid("sweep.values", "must not be empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ConfigError::invalid("sweep.values", format!("entry {i} is not finite")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(ConfigError::invalid(
                "sweep.values",
                format!("must be strictly increasing, found {} then {}", w[0], w[1]),
            ));
        }
        if self.sweep.variable != SweepVariable::TxPowerDbm && values[0] <= 0.0 {
            return Err(ConfigError::invalid(
                "sweep.values",
                format!("{} out of range for {}", values[0], self.sweep.variable.name()),
            ));
        }
        self.base_scenario()
            .validate()
            .map_err(|e| ConfigError::invalid(&core_field(&e), e.to_string()))?;
        if self.sweep.variable == SweepVariable::DistanceKm {
            for v in values {
                ground_distance_from_slant(*v, &self.geometry)
                    .map_err(|e| ConfigError::invalid("sweep.values", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn fading_params(&self) -> ShadowedRiceParams {
        self.fading
            .unwrap_or_else(|| ShadowedRiceParams::preset(self.environment))
    }

    /// Full-scale scenario at the configured population, cooperation off.
    pub fn base_scenario(&self) -> Scenario {
        Scenario {
            geometry: self.geometry,
            fading: self.fading_params(),
            link: self.link,
            data_rate: self.data_rate,
            slot_s: self.slot_s,
            population: Population::Users(self.n_users),
            d2d: D2dSettings {
                enabled: false,
                d_max_km: self.d2d.d_max_km,
                p_lora_success: self.d2d.p_lora_success,
            },
            seed: self.seed,
        }
    }

    pub fn averaging(&self) -> AveragingConfig {
        let mut cfg = AveragingConfig {
            realizations: self.realizations,
            ..AveragingConfig::default()
        };
        if self.paper_mode {
            cfg.capture = CaptureSeriesConfig::paper();
            cfg.disc_ctl = SeriesControl::paper();
        }
        cfg
    }

    /// Scenario and tagged location of one sweep point, shrunk by
    /// `area_scale` except for distance sweeps.
    pub fn point(&self, value: f64) -> lrfhss_core::Result<(Scenario, TaggedLocation)> {
        let mut scn = self.base_scenario();
        let tagged = TaggedLocation::Footprint;
        match self.sweep.variable {
            SweepVariable::NUsers => scn.population = Population::Users(value.round() as u64),
            SweepVariable::Density => scn.population = Population::Density(value),
            SweepVariable::TxPowerDbm => scn.link.tx_power_dbm = value,
            SweepVariable::DistanceKm => {
                // a fixed slant range only exists in the full-size footprint
                let d = ground_distance_from_slant(value, &scn.geometry)?;
                return Ok((scn, TaggedLocation::GroundDistance(d)));
            }
        }
        Ok((scn.scaled(self.area_scale)?, tagged))
    }
}

fn core_field(e: &lrfhss_core::Error) -> String {
    match e {
        lrfhss_core::Error::InvalidParameter { name, .. } => match *name {
            "tx_power_dbm" | "tx_gain_dbi" | "rx_gain_dbi" | "noise_figure_db" | "snr_threshold_db"
            | "sir_threshold_db" | "frequency_mhz" | "obw_hz" => format!("link.{name}"),
            "orbital_height_km" | "footprint_radius_km" | "ground_speed_km_s" | "earth_radius_km" => {
                format!("geometry.{name}")
            }
            "d_max_km" | "p_lora_success" => format!("d2d.{name}"),
            "b0" | "m" | "omega" => format!("fading.{name}"),
            other => other.to_string(),
        },
        lrfhss_core::Error::Domain { what, .. } => what.to_string(),
        lrfhss_core::Error::Series(_) => "series".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference_dr5() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.data_rate, DataRate::DR5);
        assert_eq!(cfg.base_scenario(), Scenario::table_iii(DataRate::DR5));
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig {
            fading: Some(ShadowedRiceParams::preset(Environment::Heavy)),
            schemes: vec![Scheme::Lrfhss, Scheme::D2d],
            ..ExperimentConfig::default()
        };
        cfg.sweep.values = vec![0.1, 0.2, 0.3];
        assert_eq!(parse_config_str(&emit_config(&cfg)).unwrap(), cfg);
    }
}
