//! Highway drop geometry.
//!
//! A drop is a static snapshot of a straight multi-lane highway: equally
//! spaced vehicles in every lane plus roadside base stations at a fixed
//! inter-site distance. Geometry is fully determined by the configuration,
//! so two builds from the same config are identical; all randomness in the
//! simulator lives in the channel, never in placement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("node {0} is not part of the scenario")]
    UnknownNode(u32),
}

/// Static highway layout parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighwayConfig {
    /// Total segment length in meters.
    pub length_m: f64,
    /// Number of parallel lanes.
    pub lanes: u32,
    /// Lateral distance between adjacent lane centerlines, meters.
    pub lane_width_m: f64,
    /// Inter-vehicle distance within a lane, meters.
    pub ivd_m: f64,
    /// Inter-site distance between consecutive base stations, meters.
    pub isd_m: f64,
    /// Base-station antenna height, meters.
    pub bs_height_m: f64,
    /// Vehicle antenna height, meters.
    pub vehicle_height_m: f64,
    /// Lateral offset of the base-station row from the outermost lane, meters.
    pub bs_lateral_offset_m: f64,
    /// Longitudinal position of the first vehicle in every lane. When unset,
    /// vehicles are centered in their spacing slots (half the inter-vehicle
    /// distance).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_vehicle_offset_m: Option<f64>,
}

impl Default for HighwayConfig {
    fn default() -> Self {
        HighwayConfig {
            length_m: 20_000.0,
            lanes: 3,
            lane_width_m: 4.0,
            ivd_m: 10.0,
            isd_m: 6_000.0,
            bs_height_m: 35.0,
            vehicle_height_m: 1.5,
            bs_lateral_offset_m: 10.0,
            first_vehicle_offset_m: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vehicle,
    BaseStation,
}

/// A positioned radio node. Coordinates: `x` runs along the highway, `y`
/// across it, `z` is antenna height above ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: u32,
    pub kind: NodeKind,
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    /// Lane index for vehicles, `None` for base stations.
    pub lane: Option<u32>,
}

/// 3D Euclidean distance between two nodes, meters.
pub fn distance_3d(a: &Node, b: &Node) -> f64 {
    let dx = a.x_m - b.x_m;
    let dy = a.y_m - b.y_m;
    let dz = a.z_m - b.z_m;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// One built drop: vehicles sorted by `(lane, x)`, base stations after them.
/// Node ids are assigned in that order and double as indices.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: HighwayConfig,
    pub vehicles: Vec<Node>,
    pub base_stations: Vec<Node>,
    vehicles_per_lane: usize,
}

fn require(cond: bool, field: &'static str, reason: String) -> Result<(), ScenarioError> {
    if cond {
        Ok(())
    } else {
        Err(ScenarioError::InvalidConfig { field, reason })
    }
}

/// Builds the deterministic drop geometry for `config`.
///
/// Every lane holds `floor(length / ivd)` vehicles starting at the first
/// vehicle offset; base stations sit every `isd` meters starting at x = 0,
/// laterally offset from the outermost lane.
pub fn build_scenario(config: &HighwayConfig) -> Result<Scenario, ScenarioError> {
    let c = config;
    require(
        c.length_m.is_finite() && c.length_m > 0.0,
        "length_m",
        format!("must be positive, got {}", c.length_m),
    )?;
    require(
        c.lanes >= 1,
        "lanes",
        format!("must be at least 1, got {}", c.lanes),
    )?;
    require(
        c.lane_width_m.is_finite() && c.lane_width_m > 0.0,
        "lane_width_m",
        format!("must be positive, got {}", c.lane_width_m),
    )?;
    require(
        c.ivd_m.is_finite() && c.ivd_m > 0.0,
        "ivd_m",
        format!("must be positive, got {}", c.ivd_m),
    )?;
    require(
        c.isd_m.is_finite() && c.isd_m > 0.0,
        "isd_m",
        format!("must be positive, got {}", c.isd_m),
    )?;
    require(
        c.bs_height_m.is_finite() && c.bs_height_m > 0.0,
        "bs_height_m",
        format!("must be positive, got {}", c.bs_height_m),
    )?;
    require(
        c.vehicle_height_m.is_finite() && c.vehicle_height_m > 0.0,
        "vehicle_height_m",
        format!("must be positive, got {}", c.vehicle_height_m),
    )?;
    require(
        c.bs_lateral_offset_m.is_finite() && c.bs_lateral_offset_m >= 0.0,
        "bs_lateral_offset_m",
        format!("must be non-negative, got {}", c.bs_lateral_offset_m),
    )?;

    let per_lane = (c.length_m / c.ivd_m).floor() as usize;
    let offset = c.first_vehicle_offset_m.unwrap_or(c.ivd_m / 2.0);
    require(
        offset.is_finite() && offset >= 0.0,
        "first_vehicle_offset_m",
        format!("must be non-negative, got {offset}"),
    )?;
    if per_lane > 0 {
        let last = offset + (per_lane as f64 - 1.0) * c.ivd_m;
        require(
            last <= c.length_m,
            "first_vehicle_offset_m",
            format!(
                "last vehicle at {last} m exceeds segment length {} m",
                c.length_m
            ),
        )?;
    }

    let mut vehicles = Vec::with_capacity(per_lane * c.lanes as usize);
    let mut id = 0u32;
    for lane in 0..c.lanes {
        let y = lane as f64 * c.lane_width_m;
        for k in 0..per_lane {
            vehicles.push(Node {
                id,
                kind: NodeKind::Vehicle,
                x_m: offset + k as f64 * c.ivd_m,
                y_m: y,
                z_m: c.vehicle_height_m,
                lane: Some(lane),
            });
            id += 1;
        }
    }

    let n_bs = (c.length_m / c.isd_m).floor() as usize + 1;
    let bs_y = (c.lanes - 1) as f64 * c.lane_width_m + c.bs_lateral_offset_m;
    let mut base_stations = Vec::with_capacity(n_bs);
    for k in 0..n_bs {
        base_stations.push(Node {
            id,
            kind: NodeKind::BaseStation,
            x_m: k as f64 * c.isd_m,
            y_m: bs_y,
            z_m: c.bs_height_m,
            lane: None,
        });
        id += 1;
    }

    Ok(Scenario {
        config: *config,
        vehicles,
        base_stations,
        vehicles_per_lane: per_lane,
    })
}

impl Scenario {
    /// Vehicles in one lane, ascending in `x`. Lanes are contiguous runs of
    /// the sorted vehicle list, all of equal length.
    pub fn lane_slice(&self, lane: u32) -> &[Node] {
        let start = lane as usize * self.vehicles_per_lane;
        &self.vehicles[start..start + self.vehicles_per_lane]
    }

    fn contains(&self, node: &Node) -> bool {
        let idx = node.id as usize;
        if idx < self.vehicles.len() {
            self.vehicles[idx] == *node
        } else {
            let b = idx - self.vehicles.len();
            self.base_stations.get(b).is_some_and(|n| n == node)
        }
    }

    /// All vehicles other than `tx` within `range_m` (3D distance, inclusive).
    ///
    /// Errors if `tx` does not belong to this scenario.
    pub fn neighbors_in_range(&self, tx: &Node, range_m: f64) -> Result<Vec<&Node>, ScenarioError> {
        if !self.contains(tx) {
            return Err(ScenarioError::UnknownNode(tx.id));
        }
        if range_m < 0.0 {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for lane in 0..self.config.lanes {
            let slice = self.lane_slice(lane);
            // A 3D distance within range implies |dx| within range, so a
            // longitudinal window bounds the candidates in this lane.
            let lo = slice.partition_point(|n| n.x_m < tx.x_m - range_m);
            let hi = slice.partition_point(|n| n.x_m <= tx.x_m + range_m);
            for node in &slice[lo..hi] {
                if node.id != tx.id && distance_3d(node, tx) <= range_m {
                    out.push(node);
                }
            }
        }
        Ok(out)
    }

    /// Number of vehicles strictly between `a` and `b` along their common
    /// lane. Zero when the nodes are not vehicles in the same lane.
    pub fn blockers_between(&self, a: &Node, b: &Node) -> usize {
        let (Some(lane_a), Some(lane_b)) = (a.lane, b.lane) else {
            return 0;
        };
        if lane_a != lane_b {
            return 0;
        }
        let (lo, hi) = if a.x_m <= b.x_m {
            (a.x_m, b.x_m)
        } else {
            (b.x_m, a.x_m)
        };
        let slice = self.lane_slice(lane_a);
        let first = slice.partition_point(|n| n.x_m <= lo);
        let last = slice.partition_point(|n| n.x_m < hi);
        last.saturating_sub(first)
    }

    /// Vehicle count attached to each base station under nearest-site
    /// association (ties go to the lower-indexed site). Empty when the
    /// scenario has no base stations.
    pub fn vehicles_per_cell(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.base_stations.len()];
        if counts.is_empty() {
            return counts;
        }
        for v in &self.vehicles {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (i, bs) in self.base_stations.iter().enumerate() {
                let d = distance_3d(v, bs);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            counts[best] += 1;
        }
        counts
    }
}
