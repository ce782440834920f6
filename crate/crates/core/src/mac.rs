//! Network-scheduled resource allocation.
//!
//! In transmission mode 3 the network splits the sidelink pool among the
//! vehicles it serves, so the spectral efficiency a single packet stream
//! needs grows linearly with the number of co-scheduled vehicles:
//! `se = packet_bits * rate * n_ues / bandwidth`. The scheduler then picks
//! the least aggressive MCS that still carries that load; if even the top
//! entry cannot, the cell is capacity-infeasible at this bandwidth.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phy::{McsEntry, McsTable};
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum MacError {
    #[error("bandwidth must be positive, got {0} Hz")]
    NonPositiveBandwidth(f64),
    #[error("packet rate must be non-negative, got {0} Hz")]
    NegativeRate(f64),
    #[error(
        "capacity infeasible: required spectral efficiency {required_se:.4} b/s/Hz \
         exceeds table maximum {max_se:.4} (shortfall {shortfall:.4})"
    )]
    CapacityInfeasible {
        required_se: f64,
        max_se: f64,
        shortfall: f64,
    },
}

/// Periodic traffic generated by every vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub packet_size_bytes: u32,
    /// Packets per second.
    pub rate_hz: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            packet_size_bytes: 212,
            rate_hz: 10.0,
        }
    }
}

/// How many vehicles share one scheduling pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NScope {
    /// Dimension for the most loaded cell (vehicles per nearest site).
    PerCell,
    /// Dimension for every vehicle on the segment at once.
    Global,
}

/// Inputs of the allocation equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationContext {
    pub n_ues: u32,
    pub bandwidth_hz: f64,
}

/// Spectral efficiency needed to carry `n_ues` periodic streams in
/// `bandwidth_hz`: `packet_bits * rate * n / bandwidth` in b/s/Hz.
pub fn required_spectral_efficiency(
    traffic: &TrafficConfig,
    ctx: &AllocationContext,
) -> Result<f64, MacError> {
    if !ctx.bandwidth_hz.is_finite() || ctx.bandwidth_hz <= 0.0 {
        return Err(MacError::NonPositiveBandwidth(ctx.bandwidth_hz));
    }
    if !traffic.rate_hz.is_finite() || traffic.rate_hz < 0.0 {
        return Err(MacError::NegativeRate(traffic.rate_hz));
    }
    let bits = traffic.packet_size_bytes as f64 * 8.0;
    Ok(bits * traffic.rate_hz * ctx.n_ues as f64 / ctx.bandwidth_hz)
}

/// Picks the entry with the smallest spectral efficiency that still
/// satisfies `required_se`. With the table sorted ascending this is the
/// first admissible entry, and thanks to strictly increasing thresholds it
/// is also the most robust choice.
pub fn select_mcs<'t>(required_se: f64, table: &'t McsTable) -> Result<&'t McsEntry, MacError> {
    table
        .entries()
        .iter()
        .find(|e| e.se_bps_hz >= required_se)
        .ok_or(MacError::CapacityInfeasible {
            required_se,
            max_se: table.max_se(),
            shortfall: required_se - table.max_se(),
        })
}

/// Number of vehicles one allocation must serve. `PerCell` takes the worst
/// cell under nearest-site association; with no base stations in the
/// scenario it falls back to the global count.
pub fn ues_per_allocation(scenario: &Scenario, scope: NScope) -> u32 {
    match scope {
        NScope::Global => scenario.vehicles.len() as u32,
        NScope::PerCell => scenario
            .vehicles_per_cell()
            .into_iter()
            .max()
            .unwrap_or(scenario.vehicles.len()) as u32,
    }
}
