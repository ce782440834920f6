//! Link-level abstraction: noise floor, SINR and the MCS table.
//!
//! Reception is modeled by a sharp threshold: a packet is decoded exactly
//! when the link SINR reaches the threshold of the MCS it was sent with,
//! which stands in for the usual 1% BLER operating point. The bundled
//! default table is an eight-entry, CQI-like ladder from very robust QPSK
//! coding up to dense 64-QAM; a custom ladder can be loaded from a small
//! CSV-style text file with columns `index,se_bps_hz,sinr_db`.

use serde::Serialize;
use std::path::Path;
use thiserror::Error;

use crate::channel::LinkLoss;

#[derive(Debug, Error)]
pub enum PhyError {
    #[error("mcs table io: {0}")]
    Io(#[from] std::io::Error),
    #[error("mcs table line {line}: {msg}")]
    TableParse { line: usize, msg: String },
    #[error("mcs table invalid: {0}")]
    TableInvalid(String),
}

/// Radio front-end parameters shared by every link of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    /// System bandwidth the allocation is dimensioned for, Hz.
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    /// Thermal noise density, dBm per Hz.
    pub thermal_noise_dbm_hz: f64,
    /// Combining gain of the receive antenna pair, dB.
    pub rx_diversity_gain_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            bandwidth_hz: 10e6,
            tx_power_dbm: 24.0,
            noise_figure_db: 9.0,
            thermal_noise_dbm_hz: -174.0,
            rx_diversity_gain_db: 3.0,
        }
    }
}

/// One modulation-and-coding operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McsEntry {
    pub index: u32,
    /// Spectral efficiency, bits per second per Hz.
    pub se_bps_hz: f64,
    /// SINR at which this entry decodes (1% BLER operating point), dB.
    pub sinr_threshold_db: f64,
}

/// Validated MCS ladder: spectral efficiency non-decreasing, thresholds
/// strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self, PhyError> {
        if entries.is_empty() {
            return Err(PhyError::TableInvalid("table has no entries".into()));
        }
        for e in &entries {
            if !e.se_bps_hz.is_finite() || e.se_bps_hz <= 0.0 {
                return Err(PhyError::TableInvalid(format!(
                    "entry {}: spectral efficiency must be positive, got {}",
                    e.index, e.se_bps_hz
                )));
            }
            if !e.sinr_threshold_db.is_finite() {
                return Err(PhyError::TableInvalid(format!(
                    "entry {}: sinr threshold must be finite",
                    e.index
                )));
            }
        }
        for pair in entries.windows(2) {
            if pair[1].se_bps_hz < pair[0].se_bps_hz {
                return Err(PhyError::TableInvalid(format!(
                    "spectral efficiency must be non-decreasing ({} after {})",
                    pair[1].se_bps_hz, pair[0].se_bps_hz
                )));
            }
            if pair[1].sinr_threshold_db <= pair[0].sinr_threshold_db {
                return Err(PhyError::TableInvalid(format!(
                    "sinr thresholds must be strictly increasing ({} after {})",
                    pair[1].sinr_threshold_db, pair[0].sinr_threshold_db
                )));
            }
        }
        Ok(McsTable { entries })
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn max_se(&self) -> f64 {
        self.entries.last().map(|e| e.se_bps_hz).unwrap_or(0.0)
    }

    /// Loads a ladder from a plain-text table. First non-empty line must be
    /// the header `index,se_bps_hz,sinr_db`; every following non-empty line
    /// is one comma-separated entry. Malformed rows are hard errors.
    pub fn from_file(path: &Path) -> Result<Self, PhyError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_table(&text)
    }

    pub fn from_str_table(text: &str) -> Result<Self, PhyError> {
        let mut entries = Vec::new();
        let mut saw_header = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols != ["index", "se_bps_hz", "sinr_db"] {
                    return Err(PhyError::TableParse {
                        line: i + 1,
                        msg: format!("expected header 'index,se_bps_hz,sinr_db', got '{line}'"),
                    });
                }
                saw_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(PhyError::TableParse {
                    line: i + 1,
                    msg: format!("expected 3 columns, got {}", cols.len()),
                });
            }
            let parse_f = |s: &str, what: &str, line_no: usize| {
                s.parse::<f64>().map_err(|e| PhyError::TableParse {
                    line: line_no,
                    msg: format!("bad {what} '{s}': {e}"),
                })
            };
            let index = cols[0].parse::<u32>().map_err(|e| PhyError::TableParse {
                line: i + 1,
                msg: format!("bad index '{}': {e}", cols[0]),
            })?;
            entries.push(McsEntry {
                index,
                se_bps_hz: parse_f(cols[1], "spectral efficiency", i + 1)?,
                sinr_threshold_db: parse_f(cols[2], "sinr threshold", i + 1)?,
            });
        }
        if !saw_header {
            return Err(PhyError::TableParse {
                line: 1,
                msg: "missing header 'index,se_bps_hz,sinr_db'".into(),
            });
        }
        Self::new(entries)
    }
}

impl Default for McsTable {
    /// Eight CQI-like operating points from robust QPSK (0.15 b/s/Hz at
    /// -6.7 dB) to dense 64-QAM (5.55 b/s/Hz at 19.8 dB). Interior
    /// thresholds follow a constant-gap Shannon fit between the endpoints.
    fn default() -> Self {
        let rows: [(u32, f64, f64); 8] = [
            (0, 0.15, -6.7),
            (1, 0.23, -4.5),
            (2, 0.38, -2.2),
            (3, 1.18, 4.0),
            (4, 2.41, 9.4),
            (5, 3.32, 12.6),
            (6, 3.90, 14.5),
            (7, 5.55, 19.8),
        ];
        McsTable::new(
            rows.iter()
                .map(|&(index, se_bps_hz, sinr_threshold_db)| McsEntry {
                    index,
                    se_bps_hz,
                    sinr_threshold_db,
                })
                .collect(),
        )
        .expect("default mcs table is valid")
    }
}

/// Integrated thermal noise power over the system bandwidth plus receiver
/// noise figure, dBm.
pub fn noise_power_dbm(radio: &RadioConfig) -> f64 {
    radio.thermal_noise_dbm_hz + 10.0 * radio.bandwidth_hz.log10() + radio.noise_figure_db
}

/// Outcome of one link evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkResult {
    pub rx_power_dbm: f64,
    pub sinr_db: f64,
    pub success: bool,
}

/// Decides one packet: received power is transmit power minus the composed
/// link loss plus diversity gain; SINR adds interference (if any) to the
/// noise floor in linear power; success means SINR meets the MCS threshold
/// (equality decodes).
pub fn evaluate_link(
    loss: &LinkLoss,
    radio: &RadioConfig,
    interference_dbm: Option<f64>,
    mcs: &McsEntry,
) -> LinkResult {
    let rx_power_dbm = radio.tx_power_dbm - loss.total_db + radio.rx_diversity_gain_db;
    let noise_dbm = noise_power_dbm(radio);
    let denom_dbm = match interference_dbm {
        None => noise_dbm,
        Some(intf) => {
            let lin = 10f64.powf(noise_dbm / 10.0) + 10f64.powf(intf / 10.0);
            10.0 * lin.log10()
        }
    };
    let sinr_db = rx_power_dbm - denom_dbm;
    LinkResult {
        rx_power_dbm,
        sinr_db,
        success: sinr_db >= mcs.sinr_threshold_db,
    }
}
