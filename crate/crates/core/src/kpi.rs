//! Key performance indicators: packet reception ratio and pathloss
//! distribution datasets.
//!
//! PRR is deliberately simple — received packets over expected packets,
//! restricted to receivers within an awareness range — so it can be
//! recomputed by hand from the raw link records. The CDF side samples a
//! pathloss model over a distance grid and turns the losses into an
//! empirical distribution suitable for plotting or quantile reading.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    link_loss, ChannelError, ChannelModelKind, ChannelOptions, LosState, PropagationParams,
    ValidityPolicy,
};
use crate::phy::McsEntry;
use crate::rng::SimRng;

/// Stream-separation word for CDF shadowing draws, so they can never
/// collide with the per-link draws of the main simulation.
const CDF_STREAM_DOMAIN: u64 = 0x4344_465f_5354_5231;

#[derive(Debug, Error)]
pub enum KpiError {
    #[error("invalid CDF request: {field}: {reason}")]
    InvalidCdfSpec { field: &'static str, reason: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

// ===== Packet reception ratio =====

/// Outcome of one transmitter/receiver pair in one drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRecord {
    pub tx_id: u32,
    pub distance_m: f64,
    pub success: bool,
}

/// Pooled packet reception ratio over all records with
/// `distance_m <= range_m`: successes divided by opportunities. `None`
/// when no record falls inside the range (the ratio is undefined, not
/// zero).
pub fn compute_prr(records: &[LinkRecord], range_m: f64) -> Option<f64> {
    let mut successes = 0u64;
    let mut total = 0u64;
    for r in records {
        if r.distance_m <= range_m {
            total += 1;
            successes += r.success as u64;
        }
    }
    if total == 0 {
        None
    } else {
        Some(successes as f64 / total as f64)
    }
}

/// Mean of the per-transmitter reception ratios (each transmitter weighted
/// equally, however many receivers it has in range). `None` when no
/// transmitter has any receiver in range.
pub fn per_tx_prr(records: &[LinkRecord], range_m: f64) -> Option<f64> {
    let mut per_tx: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for r in records {
        if r.distance_m <= range_m {
            let e = per_tx.entry(r.tx_id).or_insert((0, 0));
            e.0 += r.success as u64;
            e.1 += 1;
        }
    }
    if per_tx.is_empty() {
        return None;
    }
    let sum: f64 = per_tx.values().map(|&(s, t)| s as f64 / t as f64).sum();
    Some(sum / per_tx.len() as f64)
}

/// Result of one sweep cell (one model × bandwidth × density combination).
#[derive(Debug, Clone)]
pub struct PrrReport {
    pub model: ChannelModelKind,
    pub bandwidth_hz: f64,
    pub ivd_m: f64,
    /// Vehicles one allocation had to serve (the `n` of the load equation).
    pub n_ues: u32,
    /// Spectral efficiency the allocation demanded, b/s/Hz.
    pub required_se: f64,
    /// Selected operating point; `None` when the demand exceeded the table
    /// (capacity-infeasible cell, reported with PRR 0 rather than aborting
    /// the sweep).
    pub mcs: Option<McsEntry>,
    /// Pooled PRR over every link of every drop, `None` if no links.
    pub prr: Option<f64>,
    /// Mean of per-transmitter ratios, `None` if no links.
    pub per_tx_prr: Option<f64>,
    /// Pooled PRR of each drop separately (empty for infeasible cells).
    pub per_drop_prr: Vec<f64>,
    pub n_drops: u32,
    pub seed: u64,
    /// Links whose distance had to be clamped to a model validity bound.
    pub clamped_links: u64,
}

impl PrrReport {
    /// True when no MCS could carry the offered load at this bandwidth.
    pub fn infeasible(&self) -> bool {
        self.mcs.is_none()
    }
}

// ===== Pathloss CDFs =====

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Request for one pathloss distribution dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfSpec {
    pub model: ChannelModelKind,
    /// Link state the model is evaluated in (the WINNER II and 3GPP models
    /// have distinct LOS/NLOS branches; two-ray ignores this).
    pub los_state: LosState,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub n_samples: usize,
    pub spacing: GridSpacing,
    pub shadowing: bool,
    pub seed: u64,
}

/// One evaluated grid point, in sampling order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfSample {
    pub distance_m: f64,
    pub loss_db: f64,
}

/// One point of the empirical distribution: `probability` of the loss
/// being `<= loss_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub loss_db: f64,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct CdfDataset {
    pub spec: CdfSpec,
    /// Grid-order samples (distance, loss).
    pub samples: Vec<CdfSample>,
    /// Losses sorted ascending with probabilities `(i+1)/n`.
    pub points: Vec<CdfPoint>,
    /// Samples whose distance was clamped to a validity bound.
    pub clamped: u64,
}

impl CdfDataset {
    /// Empirical quantile: the smallest recorded loss whose cumulative
    /// probability reaches `p` (clamped to the observed range).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.points.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.points[idx].loss_db
    }
}

fn grid_distance(spec: &CdfSpec, i: usize) -> f64 {
    if spec.n_samples == 1 {
        return spec.d_min_m;
    }
    let t = i as f64 / (spec.n_samples - 1) as f64;
    match spec.spacing {
        GridSpacing::Linear => spec.d_min_m + (spec.d_max_m - spec.d_min_m) * t,
        GridSpacing::Log => (spec.d_min_m.ln() + (spec.d_max_m.ln() - spec.d_min_m.ln()) * t).exp(),
    }
}

/// Samples `model` pathloss over the requested distance grid and returns
/// both grid-order samples and the sorted empirical distribution.
///
/// Distances outside a model's validity range are clamped (and counted)
/// rather than rejected, so wide plotting ranges work for every model.
/// With `shadowing` on, each grid point gets an independent draw from a
/// dedicated stream keyed by (model, sample index); the dataset is fully
/// reproducible from the spec alone.
pub fn pathloss_cdf(
    spec: &CdfSpec,
    params: &PropagationParams,
    opts: &ChannelOptions,
) -> Result<CdfDataset, KpiError> {
    if !spec.d_min_m.is_finite() || spec.d_min_m <= 0.0 {
        return Err(KpiError::InvalidCdfSpec {
            field: "d_min_m",
            reason: format!("must be positive, got {}", spec.d_min_m),
        });
    }
    if !spec.d_max_m.is_finite() || spec.d_max_m < spec.d_min_m {
        return Err(KpiError::InvalidCdfSpec {
            field: "d_max_m",
            reason: format!("must be >= d_min_m, got {}", spec.d_max_m),
        });
    }
    if spec.n_samples == 0 {
        return Err(KpiError::InvalidCdfSpec {
            field: "n_samples",
            reason: "must be at least 1".into(),
        });
    }

    let eval_params = PropagationParams {
        los_state: spec.los_state,
        shadowing_enabled: spec.shadowing,
        // Pure distance sweep: no obstructing geometry exists here.
        blockage_enabled: false,
        ..*params
    };
    let eval_opts = ChannelOptions {
        winner_validity: ValidityPolicy::Clamp,
        ..*opts
    };

    let mut samples = Vec::with_capacity(spec.n_samples);
    let mut clamped = 0u64;
    for i in 0..spec.n_samples {
        let d = grid_distance(spec, i);
        let mut rng = SimRng::from_key(
            spec.seed,
            &[
                CDF_STREAM_DOMAIN,
                spec.model.stream_id(),
                spec.shadowing as u64,
                i as u64,
            ],
        );
        let loss = link_loss(spec.model, d, &eval_params, &eval_opts, 0, &mut rng)?;
        clamped += loss.clamped as u64;
        samples.push(CdfSample {
            distance_m: d,
            loss_db: loss.total_db,
        });
    }

    let mut losses: Vec<f64> = samples.iter().map(|s| s.loss_db).collect();
    losses.sort_by(|a, b| a.partial_cmp(b).expect("pathloss is never NaN"));
    let n = losses.len() as f64;
    let points = losses
        .into_iter()
        .enumerate()
        .map(|(i, loss_db)| CdfPoint {
            loss_db,
            probability: (i + 1) as f64 / n,
        })
        .collect();

    Ok(CdfDataset {
        spec: *spec,
        samples,
        points,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rec(tx_id: u32, distance_m: f64, success: bool) -> LinkRecord {
        LinkRecord {
            tx_id,
            distance_m,
            success,
        }
    }

    #[test]
    fn prr_counts_successes_over_opportunities() {
        let records = [
            rec(0, 50.0, true),
            rec(0, 120.0, true),
            rec(0, 300.0, false),
        ];
        assert_relative_eq!(compute_prr(&records, 1000.0).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn prr_respects_the_awareness_range() {
        let records = [
            rec(0, 50.0, true),
            rec(0, 1000.0, false), // on the boundary: still counted
            rec(0, 1000.1, false), // beyond: ignored
        ];
        assert_relative_eq!(compute_prr(&records, 1000.0).unwrap(), 0.5);
    }

    #[test]
    fn prr_is_undefined_without_in_range_links() {
        assert_eq!(compute_prr(&[], 1000.0), None);
        let far = [rec(0, 2000.0, true)];
        assert_eq!(compute_prr(&far, 1000.0), None);
    }

    #[test]
    fn per_tx_mean_weights_transmitters_equally() {
        let records = [
            rec(0, 10.0, true),
            rec(0, 20.0, false),
            rec(1, 10.0, true),
            rec(1, 20.0, true),
            rec(1, 30.0, true),
            rec(1, 40.0, true),
        ];
        // Pooled: 5/6. Per-tx: mean(1/2, 4/4) = 3/4.
        assert_relative_eq!(compute_prr(&records, 100.0).unwrap(), 5.0 / 6.0);
        assert_relative_eq!(per_tx_prr(&records, 100.0).unwrap(), 0.75);
        assert_eq!(per_tx_prr(&[], 100.0), None);
    }

    fn spec(model: ChannelModelKind, los: LosState, n: usize) -> CdfSpec {
        CdfSpec {
            model,
            los_state: los,
            d_min_m: 1.0,
            d_max_m: 8000.0,
            n_samples: n,
            spacing: GridSpacing::Linear,
            shadowing: false,
            seed: 7,
        }
    }

    #[test]
    fn linear_grid_hits_both_endpoints() {
        let s = spec(ChannelModelKind::Gpp3Rel15, LosState::Los, 5);
        let ds = pathloss_cdf(
            &s,
            &PropagationParams::default(),
            &ChannelOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(ds.samples[0].distance_m, 1.0);
        assert_relative_eq!(ds.samples[2].distance_m, 4000.5);
        assert_relative_eq!(ds.samples[4].distance_m, 8000.0);
    }

    #[test]
    fn log_grid_is_geometric() {
        let s = CdfSpec {
            spacing: GridSpacing::Log,
            d_min_m: 1.0,
            d_max_m: 10_000.0,
            n_samples: 5,
            ..spec(ChannelModelKind::Gpp3Rel15, LosState::Los, 5)
        };
        let ds = pathloss_cdf(
            &s,
            &PropagationParams::default(),
            &ChannelOptions::default(),
        )
        .unwrap();
        for (i, want) in [1.0, 10.0, 100.0, 1000.0, 10_000.0].iter().enumerate() {
            assert_relative_eq!(ds.samples[i].distance_m, *want, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_sample_grid_sits_at_d_min() {
        let s = spec(ChannelModelKind::TwoRay, LosState::Los, 1);
        let ds = pathloss_cdf(
            &s,
            &PropagationParams::default(),
            &ChannelOptions::default(),
        )
        .unwrap();
        assert_eq!(ds.samples.len(), 1);
        assert_relative_eq!(ds.samples[0].distance_m, 1.0);
        assert_relative_eq!(ds.points[0].probability, 1.0);
    }

    #[test]
    fn rejects_degenerate_specs() {
        let params = PropagationParams::default();
        let opts = ChannelOptions::default();
        let bad_min = CdfSpec {
            d_min_m: 0.0,
            ..spec(ChannelModelKind::TwoRay, LosState::Los, 10)
        };
        assert!(matches!(
            pathloss_cdf(&bad_min, &params, &opts),
            Err(KpiError::InvalidCdfSpec {
                field: "d_min_m",
                ..
            })
        ));
        let bad_max = CdfSpec {
            d_max_m: 0.5,
            ..spec(ChannelModelKind::TwoRay, LosState::Los, 10)
        };
        assert!(matches!(
            pathloss_cdf(&bad_max, &params, &opts),
            Err(KpiError::InvalidCdfSpec {
                field: "d_max_m",
                ..
            })
        ));
        let bad_n = CdfSpec {
            n_samples: 0,
            ..spec(ChannelModelKind::TwoRay, LosState::Los, 10)
        };
        assert!(matches!(
            pathloss_cdf(&bad_n, &params, &opts),
            Err(KpiError::InvalidCdfSpec {
                field: "n_samples",
                ..
            })
        ));
    }

    #[test]
    fn distribution_points_are_sorted_and_span_unit_probability() {
        let s = CdfSpec {
            shadowing: true,
            ..spec(ChannelModelKind::WinnerD1, LosState::Nlos, 400)
        };
        let ds = pathloss_cdf(
            &s,
            &PropagationParams::default(),
            &ChannelOptions::default(),
        )
        .unwrap();
        assert_eq!(ds.points.len(), 400);
        for pair in ds.points.windows(2) {
            assert!(pair[0].loss_db <= pair[1].loss_db);
            assert!(pair[0].probability < pair[1].probability);
        }
        assert_relative_eq!(ds.points[0].probability, 1.0 / 400.0);
        assert_relative_eq!(ds.points.last().unwrap().probability, 1.0);
    }

    #[test]
    fn wide_range_clamps_winner_instead_of_failing() {
        let s = spec(ChannelModelKind::WinnerD1, LosState::Nlos, 100);
        let ds = pathloss_cdf(
            &s,
            &PropagationParams::default(),
            &ChannelOptions::default(),
        )
        .unwrap();
        // Grid points below 50 m and above 5 km must have been clamped.
        assert!(ds.clamped > 0);
        // Clamped tails make the extreme losses plateaus, not outliers.
        let first = ds.samples.first().unwrap().loss_db;
        let at_50m = 25.1 * 50.0f64.log10() + 55.4
            - 0.13 * (1.5 - 25.0) * (50.0f64 / 100.0).log10()
            + 21.3 * (5.9f64 / 5.0).log10();
        assert_relative_eq!(first, at_50m, max_relative = 1e-12);
    }

    #[test]
    fn datasets_are_reproducible_from_the_spec() {
        let s = CdfSpec {
            shadowing: true,
            ..spec(ChannelModelKind::Gpp3Rel15, LosState::Los, 256)
        };
        let params = PropagationParams::default();
        let opts = ChannelOptions::default();
        let a = pathloss_cdf(&s, &params, &opts).unwrap();
        let b = pathloss_cdf(&s, &params, &opts).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.loss_db.to_bits(), y.loss_db.to_bits());
        }
        let other_seed = CdfSpec { seed: 8, ..s };
        let c = pathloss_cdf(&other_seed, &params, &opts).unwrap();
        let identical = a
            .samples
            .iter()
            .zip(&c.samples)
            .all(|(x, y)| x.loss_db.to_bits() == y.loss_db.to_bits());
        assert!(!identical, "different seeds must draw different shadowing");
    }

    #[test]
    fn shadowing_off_keeps_the_deterministic_curve() {
        let s = spec(ChannelModelKind::Gpp3Rel15, LosState::Los, 64);
        let ds = pathloss_cdf(
            &s,
            &PropagationParams::default(),
            &ChannelOptions::default(),
        )
        .unwrap();
        // LOS pathloss grows with distance, so grid order == sorted order.
        for pair in ds.samples.windows(2) {
            assert!(pair[0].loss_db < pair[1].loss_db);
        }
    }

    #[test]
    fn bounded_reflection_loss_stays_below_free_space_curve() {
        // Elementwise on a common grid over the comparison range: the 3GPP
        // LOS curve never exceeds the two-ray curve between 10 m and 1 km.
        let params = PropagationParams::default();
        let opts = ChannelOptions::default();
        let base = CdfSpec {
            d_min_m: 10.0,
            d_max_m: 1000.0,
            n_samples: 991,
            ..spec(ChannelModelKind::Gpp3Rel15, LosState::Los, 991)
        };
        let gpp3 = pathloss_cdf(&base, &params, &opts).unwrap();
        let two_ray = pathloss_cdf(
            &CdfSpec {
                model: ChannelModelKind::TwoRay,
                ..base
            },
            &params,
            &opts,
        )
        .unwrap();
        for (g, t) in gpp3.samples.iter().zip(&two_ray.samples) {
            assert!(
                g.loss_db <= t.loss_db + 1e-9,
                "at {} m: {} vs {}",
                g.distance_m,
                g.loss_db,
                t.loss_db
            );
        }
    }

    #[test]
    fn quantile_reads_the_sorted_tail() {
        let s = spec(ChannelModelKind::Gpp3Rel15, LosState::Los, 100);
        let ds = pathloss_cdf(
            &s,
            &PropagationParams::default(),
            &ChannelOptions::default(),
        )
        .unwrap();
        assert_eq!(ds.quantile(0.01), ds.points[0].loss_db);
        assert_eq!(ds.quantile(1.0), ds.points[99].loss_db);
        assert_eq!(ds.quantile(0.5), ds.points[49].loss_db);
    }
}
