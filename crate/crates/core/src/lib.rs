//! System-level Monte-Carlo simulator for direct vehicle-to-vehicle
//! sidelink links on a highway.
//!
//! The crate evaluates, for a configurable highway drop, whether each
//! periodic broadcast packet survives the link budget of its
//! transmitter-receiver pair, and aggregates the outcomes into the packet
//! reception ratio (PRR). Three pathloss models are available (two-ray
//! ground interference, WINNER II rural, 3GPP Rel-15 highway), and the
//! main entry point sweeps model × bandwidth × vehicle density grids the
//! way a coverage study would.
//!
//! Module map:
//! - [`scenario`]: deterministic drop geometry (lanes, vehicles, sites);
//! - [`channel`]: pathloss models, shadowing, vehicle blockage;
//! - [`phy`]: link budget, noise, MCS table, decode decision;
//! - [`mac`]: network-scheduled allocation and MCS selection;
//! - [`kpi`]: PRR aggregation and pathloss distribution datasets;
//! - [`config`]: TOML run description with full defaults;
//! - [`sweep`]: the Monte-Carlo engine tying it all together;
//! - [`export`]: CSV writers for sweep results and CDF datasets;
//! - [`rng`]: counter-based random streams for reproducible parallelism.

pub mod channel;
pub mod config;
pub mod export;
pub mod kpi;
pub mod mac;
pub mod phy;
pub mod rng;
pub mod scenario;
pub mod sweep;

pub use channel::{ChannelModelKind, LosState};
pub use config::SimConfig;
pub use kpi::PrrReport;
pub use sweep::{run_sweep, SweepOutput};
