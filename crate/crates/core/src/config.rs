//! Run configuration.
//!
//! A run is described by one TOML file with optional sections; every key
//! has a default matching the reference highway scenario, so the empty
//! file is a complete, runnable configuration. Unknown keys are hard
//! errors — a typo must never silently fall back to a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    ChannelModelKind, ChannelOptions, LosState, PropagationParams, ValidityPolicy,
};
use crate::kpi::GridSpacing;
use crate::mac::{NScope, TrafficConfig};
use crate::phy::{McsTable, PhyError, RadioConfig};
use crate::scenario::HighwayConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("mcs table: {0}")]
    McsTable(#[from] PhyError),
}

/// How a link's LOS/NLOS state is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosPolicy {
    /// Same-lane links are NLOS once a vehicle sits between the endpoints;
    /// cross-lane links are NLOS beyond a configurable cutoff distance.
    Geometric,
    /// Every link is LOS.
    AlwaysLos,
    /// Every link is NLOS.
    AlwaysNlos,
}

/// `[radio]` — transceiver front-end plus the MCS ladder source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub thermal_noise_dbm_hz: f64,
    pub rx_diversity_gain_db: f64,
    /// Optional text table replacing the built-in ladder; relative paths
    /// are resolved against the config file's directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcs_table_path: Option<PathBuf>,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioConfig::default();
        RadioSection {
            tx_power_dbm: r.tx_power_dbm,
            noise_figure_db: r.noise_figure_db,
            thermal_noise_dbm_hz: r.thermal_noise_dbm_hz,
            rx_diversity_gain_db: r.rx_diversity_gain_db,
            mcs_table_path: None,
        }
    }
}

impl RadioSection {
    /// Front-end parameters at one sweep bandwidth.
    pub fn radio_config(&self, bandwidth_hz: f64) -> RadioConfig {
        RadioConfig {
            bandwidth_hz,
            tx_power_dbm: self.tx_power_dbm,
            noise_figure_db: self.noise_figure_db,
            thermal_noise_dbm_hz: self.thermal_noise_dbm_hz,
            rx_diversity_gain_db: self.rx_diversity_gain_db,
        }
    }
}

/// `[channel]` — propagation model switches shared by every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub carrier_freq_hz: f64,
    /// Draw log-normal shadowing per link. Off by default: the headline
    /// sweep is a deterministic pathloss study and stays exactly
    /// reproducible drop to drop.
    pub shadowing: bool,
    /// Apply the per-vehicle blockage penalty (3GPP model only).
    pub blockage: bool,
    pub blockage_per_vehicle_db: f64,
    pub blockage_cap_db: f64,
    /// Shadowing spread for the two-ray model (no standard value exists).
    pub two_ray_shadowing_std_db: f64,
    pub winner_validity: ValidityPolicy,
    /// Add the standard +44.2 dB intercept to the WINNER II short-range
    /// LOS branch instead of the as-printed equation.
    pub winner_standard_intercept: bool,
    /// Use the distance-dependent 3GPP NLOS form instead of the printed
    /// distance-independent one.
    pub gpp3_nlos_corrected: bool,
    pub los_policy: LosPolicy,
    /// Cross-lane links longer than this are NLOS under the geometric
    /// policy, meters.
    pub cross_lane_nlos_cutoff_m: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            carrier_freq_hz: 5.9e9,
            shadowing: false,
            blockage: true,
            blockage_per_vehicle_db: 5.0,
            blockage_cap_db: 25.0,
            two_ray_shadowing_std_db: 0.0,
            winner_validity: ValidityPolicy::Clamp,
            winner_standard_intercept: false,
            gpp3_nlos_corrected: false,
            los_policy: LosPolicy::Geometric,
            cross_lane_nlos_cutoff_m: 200.0,
        }
    }
}

impl ChannelSection {
    pub fn channel_options(&self) -> ChannelOptions {
        ChannelOptions {
            two_ray_shadowing_std_db: self.two_ray_shadowing_std_db,
            winner_validity: self.winner_validity,
            winner_standard_intercept: self.winner_standard_intercept,
            gpp3_nlos_corrected: self.gpp3_nlos_corrected,
            blockage_per_vehicle_db: self.blockage_per_vehicle_db,
            blockage_cap_db: self.blockage_cap_db,
        }
    }

    /// Per-link propagation inputs for a vehicle-to-vehicle link in the
    /// given LOS state.
    pub fn v2v_params(&self, highway: &HighwayConfig, los_state: LosState) -> PropagationParams {
        PropagationParams {
            carrier_freq_hz: self.carrier_freq_hz,
            tx_height_m: highway.vehicle_height_m,
            rx_height_m: highway.vehicle_height_m,
            los_state,
            shadowing_enabled: self.shadowing,
            blockage_enabled: self.blockage,
        }
    }
}

/// `[allocation]` — how the scheduler load `n` is counted and whether
/// co-channel interference is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocationSection {
    pub n_scope: NScope,
    /// With orthogonal in-cell allocations the SINR denominator is noise
    /// only. Turning this off adds one co-channel interferer one reuse
    /// distance away.
    pub noise_limited: bool,
    /// Distance to the nearest co-channel transmitter when interference is
    /// on; defaults to the inter-site distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reuse_distance_m: Option<f64>,
}

impl Default for AllocationSection {
    fn default() -> Self {
        AllocationSection {
            n_scope: NScope::PerCell,
            noise_limited: true,
            reuse_distance_m: None,
        }
    }
}

/// `[sweep]` — the evaluation grid and Monte-Carlo controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub models: Vec<ChannelModelKind>,
    pub bandwidths_hz: Vec<f64>,
    pub ivds_m: Vec<f64>,
    pub n_drops: u32,
    pub seed: u64,
    /// Awareness range: only receivers within this distance count for PRR.
    pub range_m: f64,
    pub output_dir: PathBuf,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            models: vec![
                ChannelModelKind::TwoRay,
                ChannelModelKind::WinnerD1,
                ChannelModelKind::Gpp3Rel15,
            ],
            bandwidths_hz: vec![5e6, 6e6, 8e6, 10e6],
            ivds_m: vec![10.0, 15.0],
            n_drops: 100,
            seed: 1,
            range_m: 1000.0,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// `[cdf]` — pathloss distribution export. Each swept model yields one
/// dataset with shadowing and one without, over a common distance grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdfSection {
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub n_samples: usize,
    pub spacing: GridSpacing,
    /// Branch the WINNER II dataset is evaluated in. Defaults to NLOS: on
    /// a loaded highway nearly every link has an obstructed first Fresnel
    /// zone, so NLOS is the branch the simulation actually exercises.
    pub winner_state: LosState,
    /// Branch the 3GPP dataset is evaluated in. Defaults to LOS — the
    /// distance-dependent branch of that model.
    pub gpp3_state: LosState,
}

impl Default for CdfSection {
    fn default() -> Self {
        CdfSection {
            d_min_m: 1.0,
            d_max_m: 8000.0,
            n_samples: 100_000,
            spacing: GridSpacing::Linear,
            winner_state: LosState::Nlos,
            gpp3_state: LosState::Los,
        }
    }
}

impl CdfSection {
    /// LOS state the dataset for `model` is evaluated in (two-ray has no
    /// branching and nominally runs as LOS).
    pub fn state_for(&self, model: ChannelModelKind) -> LosState {
        match model {
            ChannelModelKind::TwoRay => LosState::Los,
            ChannelModelKind::WinnerD1 => self.winner_state,
            ChannelModelKind::Gpp3Rel15 => self.gpp3_state,
        }
    }
}

/// Complete run description. Every section falls back to its defaults, so
/// `SimConfig::default()` (== the empty TOML file) reproduces the
/// reference scenario.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub highway: HighwayConfig,
    pub radio: RadioSection,
    pub traffic: TrafficConfig,
    pub channel: ChannelSection,
    pub allocation: AllocationSection,
    pub sweep: SweepSection,
    pub cdf: CdfSection,
}

fn parse_error(text: &str, err: toml::de::Error) -> ConfigError {
    // toml's Display is a multi-line diagnostic; keep CLI errors on one
    // line but preserve the location.
    let msg = err.message().to_string();
    match err.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            ConfigError::Parse(format!("line {line}: {msg}"))
        }
        None => ConfigError::Parse(msg),
    }
}

impl SimConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses and validates a config file. A relative
    /// `radio.mcs_table_path` is rewritten to be relative to the file's
    /// directory, so later loads do not depend on the working directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(table) = &cfg.radio.mcs_table_path {
            if table.is_relative() {
                let dir = path.parent().unwrap_or_else(|| Path::new("."));
                cfg.radio.mcs_table_path = Some(dir.join(table));
            }
        }
        Ok(cfg)
    }

    /// The MCS ladder this run uses: the configured file, or the built-in
    /// default table.
    pub fn load_mcs_table(&self) -> Result<McsTable, ConfigError> {
        match &self.radio.mcs_table_path {
            Some(path) => Ok(McsTable::from_file(path)?),
            None => Ok(McsTable::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
            ConfigError::Invalid {
                field,
                reason: reason.into(),
            }
        }
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive, got {v}")))
            }
        }
        fn non_negative(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be non-negative, got {v}")))
            }
        }

        let h = &self.highway;
        positive("highway.length_m", h.length_m)?;
        if h.lanes == 0 {
            return Err(invalid("highway.lanes", "must be at least 1"));
        }
        positive("highway.lane_width_m", h.lane_width_m)?;
        positive("highway.ivd_m", h.ivd_m)?;
        positive("highway.isd_m", h.isd_m)?;
        positive("highway.bs_height_m", h.bs_height_m)?;
        positive("highway.vehicle_height_m", h.vehicle_height_m)?;
        non_negative("highway.bs_lateral_offset_m", h.bs_lateral_offset_m)?;

        if self.traffic.packet_size_bytes == 0 {
            return Err(invalid("traffic.packet_size_bytes", "must be at least 1"));
        }
        positive("traffic.rate_hz", self.traffic.rate_hz)?;

        positive("channel.carrier_freq_hz", self.channel.carrier_freq_hz)?;
        non_negative(
            "channel.blockage_per_vehicle_db",
            self.channel.blockage_per_vehicle_db,
        )?;
        non_negative("channel.blockage_cap_db", self.channel.blockage_cap_db)?;
        non_negative(
            "channel.two_ray_shadowing_std_db",
            self.channel.two_ray_shadowing_std_db,
        )?;
        non_negative(
            "channel.cross_lane_nlos_cutoff_m",
            self.channel.cross_lane_nlos_cutoff_m,
        )?;

        if let Some(d) = self.allocation.reuse_distance_m {
            positive("allocation.reuse_distance_m", d)?;
        }

        let s = &self.sweep;
        if s.models.is_empty() {
            return Err(invalid("sweep.models", "at least one model is required"));
        }
        if s.bandwidths_hz.is_empty() {
            return Err(invalid(
                "sweep.bandwidths_hz",
                "at least one bandwidth is required",
            ));
        }
        for &bw in &s.bandwidths_hz {
            positive("sweep.bandwidths_hz", bw)?;
        }
        if s.ivds_m.is_empty() {
            return Err(invalid("sweep.ivds_m", "at least one spacing is required"));
        }
        for &ivd in &s.ivds_m {
            positive("sweep.ivds_m", ivd)?;
        }
        if s.n_drops == 0 {
            return Err(invalid("sweep.n_drops", "must be at least 1"));
        }
        positive("sweep.range_m", s.range_m)?;

        let c = &self.cdf;
        positive("cdf.d_min_m", c.d_min_m)?;
        if !c.d_max_m.is_finite() || c.d_max_m < c.d_min_m {
            return Err(invalid(
                "cdf.d_max_m",
                format!("must be >= d_min_m, got {}", c.d_max_m),
            ));
        }
        if c.n_samples == 0 {
            return Err(invalid("cdf.n_samples", "must be at least 1"));
        }

        Ok(())
    }

    /// Co-channel reuse distance: configured value or the inter-site
    /// distance.
    pub fn reuse_distance_m(&self) -> f64 {
        self.allocation
            .reuse_distance_m
            .unwrap_or(self.highway.isd_m)
    }

    /// The fully resolved configuration as a TOML document (defaults
    /// included), suitable for archiving next to a run's results.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("a validated config always serializes")
    }
}
