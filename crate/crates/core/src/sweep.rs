//! The Monte-Carlo sweep engine.
//!
//! A sweep walks the configured model × bandwidth × density grid. For
//! each cell it dimensions the allocation (worst-cell vehicle count →
//! required spectral efficiency → MCS), then evaluates every
//! transmitter/receiver pair within the awareness range over `n_drops`
//! drops and pools the outcomes into one [`PrrReport`].
//!
//! Determinism is a hard requirement: every random draw comes from a
//! stream keyed by (model, drop, transmitter, receiver), never from
//! iteration order, so results are byte-identical for any thread count.
//! Vehicle placement is deterministic, which has a useful consequence:
//! with shadowing disabled nothing varies between drops, and the engine
//! evaluates a single drop and replicates it — exactly, not
//! approximately.

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    self, ChannelError, ChannelModelKind, ChannelOptions, LosState, PropagationParams,
};
use crate::config::{ConfigError, LosPolicy, SimConfig};
use crate::kpi::{self, CdfDataset, CdfSpec, KpiError, PrrReport};
use crate::mac::{self, AllocationContext, MacError};
use crate::phy::{self, McsEntry, McsTable, RadioConfig};
use crate::rng::SimRng;
use crate::scenario::{build_scenario, distance_3d, Node, Scenario, ScenarioError};

/// Stream-separation word for per-link shadowing draws.
const LINK_STREAM_DOMAIN: u64 = 0x4C4E_4B5F_5348_4431;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Mac(#[from] MacError),
    #[error(transparent)]
    Kpi(#[from] KpiError),
}

/// Everything one run produces: one report per sweep cell plus the CDF
/// datasets (two per model: without and with shadowing).
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub reports: Vec<PrrReport>,
    pub datasets: Vec<CdfDataset>,
}

/// LOS/NLOS decision for one vehicle pair. Under the geometric policy a
/// same-lane link turns NLOS as soon as any vehicle sits between the
/// endpoints, and a cross-lane link turns NLOS beyond the cutoff distance
/// (grazing incidence across lanes stops clearing the first Fresnel
/// zone).
pub fn los_state_for(
    policy: LosPolicy,
    cross_lane_nlos_cutoff_m: f64,
    scenario: &Scenario,
    tx: &Node,
    rx: &Node,
) -> LosState {
    match policy {
        LosPolicy::AlwaysLos => LosState::Los,
        LosPolicy::AlwaysNlos => LosState::Nlos,
        LosPolicy::Geometric => {
            if tx.lane.is_some() && tx.lane == rx.lane {
                if scenario.blockers_between(tx, rx) >= 1 {
                    LosState::Nlos
                } else {
                    LosState::Los
                }
            } else if distance_3d(tx, rx) > cross_lane_nlos_cutoff_m {
                LosState::Nlos
            } else {
                LosState::Los
            }
        }
    }
}

/// Drop-invariant description of one receiver as seen from a transmitter.
#[derive(Debug, Clone, Copy)]
struct LinkGeom {
    rx_id: u32,
    n_blockers: u32,
    los: LosState,
    distance_m: f64,
}

/// All in-range receivers of one transmitter.
#[derive(Debug, Clone)]
struct TxLinks {
    tx_id: u32,
    links: Vec<LinkGeom>,
}

/// Precomputes the link geometry of a drop: receivers within range, their
/// distances, blocker counts and LOS states. None of this changes between
/// drops (placement is deterministic), so it is computed once per density
/// and shared by every model, bandwidth and drop.
fn build_geometry(cfg: &SimConfig, scenario: &Scenario) -> Result<Vec<TxLinks>, SweepError> {
    scenario
        .vehicles
        .par_iter()
        .map(|tx| {
            let neighbors = scenario.neighbors_in_range(tx, cfg.sweep.range_m)?;
            let links = neighbors
                .into_iter()
                .map(|rx| LinkGeom {
                    rx_id: rx.id,
                    n_blockers: scenario.blockers_between(tx, rx) as u32,
                    los: los_state_for(
                        cfg.channel.los_policy,
                        cfg.channel.cross_lane_nlos_cutoff_m,
                        scenario,
                        tx,
                        rx,
                    ),
                    distance_m: distance_3d(tx, rx),
                })
                .collect();
            Ok(TxLinks {
                tx_id: tx.id,
                links,
            })
        })
        .collect()
}

/// Per-(drop, transmitter) tally: successes, opportunities, clamped links.
type Counts = (u64, u64, u64);

struct CellContext<'a> {
    cfg: &'a SimConfig,
    scenario: &'a Scenario,
    geometry: &'a [TxLinks],
    model: ChannelModelKind,
    opts: ChannelOptions,
    radio: RadioConfig,
    mcs: McsEntry,
    /// `Some(reuse distance)` when co-channel interference is modeled.
    interference_reuse_m: Option<f64>,
}

impl CellContext<'_> {
    /// Received interference power at `rx` from the nearest phantom
    /// co-channel transmitter, one reuse distance up or down the road from
    /// `tx`. Pathloss-only (deterministic) through the cell's own model in
    /// LOS; the receiver's diversity gain applies to interference like to
    /// any arriving signal.
    fn interference_dbm(&self, tx: &Node, rx: &Node, reuse_m: f64) -> Result<f64, SweepError> {
        let dy = rx.y_m - tx.y_m;
        let dz = rx.z_m - tx.z_m;
        let mut d = f64::INFINITY;
        for phantom_x in [tx.x_m - reuse_m, tx.x_m + reuse_m] {
            let dx = rx.x_m - phantom_x;
            d = d.min((dx * dx + dy * dy + dz * dz).sqrt());
        }
        // A phantom can coincide with the receiver under unusual configs;
        // keep a near-field floor instead of evaluating pathloss at zero.
        let d = d.max(1.0);
        let params = PropagationParams {
            carrier_freq_hz: self.cfg.channel.carrier_freq_hz,
            tx_height_m: self.scenario.config.vehicle_height_m,
            rx_height_m: self.scenario.config.vehicle_height_m,
            los_state: LosState::Los,
            shadowing_enabled: false,
            blockage_enabled: false,
        };
        let mut rng = SimRng::from_key(0, &[]);
        let loss = channel::link_loss(self.model, d, &params, &self.opts, 0, &mut rng)?;
        Ok(self.radio.tx_power_dbm - loss.total_db + self.radio.rx_diversity_gain_db)
    }

    /// Evaluates every link of one transmitter in one drop.
    fn eval_tx(&self, drop: u32, tx_links: &TxLinks) -> Result<Counts, SweepError> {
        // Vehicle ids are assigned 0..n in construction order, so they
        // double as indices into the vehicle list.
        let tx = &self.scenario.vehicles[tx_links.tx_id as usize];
        debug_assert_eq!(tx.id, tx_links.tx_id);
        let base = self
            .cfg
            .channel
            .v2v_params(&self.scenario.config, LosState::Los);
        // Consumed only when shadowing is on; re-keyed per link below.
        let mut rng = SimRng::from_key(0, &[]);
        let mut succ = 0u64;
        let mut tot = 0u64;
        let mut clamped = 0u64;
        for link in &tx_links.links {
            let params = PropagationParams {
                los_state: link.los,
                ..base
            };
            if params.shadowing_enabled {
                rng = SimRng::from_key(
                    self.cfg.sweep.seed,
                    &[
                        LINK_STREAM_DOMAIN,
                        self.model.stream_id(),
                        u64::from(drop),
                        u64::from(tx_links.tx_id),
                        u64::from(link.rx_id),
                    ],
                );
            }
            let loss = channel::link_loss(
                self.model,
                link.distance_m,
                &params,
                &self.opts,
                link.n_blockers as usize,
                &mut rng,
            )?;
            let interference = match self.interference_reuse_m {
                Some(reuse) => {
                    let rx = &self.scenario.vehicles[link.rx_id as usize];
                    Some(self.interference_dbm(tx, rx, reuse)?)
                }
                None => None,
            };
            let result = phy::evaluate_link(&loss, &self.radio, interference, &self.mcs);
            tot += 1;
            succ += u64::from(result.success);
            clamped += u64::from(loss.clamped);
        }
        Ok((succ, tot, clamped))
    }
}

/// Evaluates one sweep cell. A capacity-infeasible cell (no MCS can carry
/// the offered load) is reported with PRR 0 rather than failing the run.
fn evaluate_cell(
    cfg: &SimConfig,
    table: &McsTable,
    scenario: &Scenario,
    geometry: &[TxLinks],
    model: ChannelModelKind,
    bandwidth_hz: f64,
) -> Result<PrrReport, SweepError> {
    let n_ues = mac::ues_per_allocation(scenario, cfg.allocation.n_scope);
    let required_se = mac::required_spectral_efficiency(
        &cfg.traffic,
        &AllocationContext {
            n_ues,
            bandwidth_hz,
        },
    )?;
    let mcs = match mac::select_mcs(required_se, table) {
        Ok(e) => Some(*e),
        Err(MacError::CapacityInfeasible { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let mut report = PrrReport {
        model,
        bandwidth_hz,
        ivd_m: scenario.config.ivd_m,
        n_ues,
        required_se,
        mcs,
        // An infeasible cell delivers nothing: PRR 0 by definition.
        prr: Some(0.0),
        per_tx_prr: Some(0.0),
        per_drop_prr: Vec::new(),
        n_drops: cfg.sweep.n_drops,
        seed: cfg.sweep.seed,
        clamped_links: 0,
    };
    let Some(mcs) = mcs else {
        return Ok(report);
    };

    let ctx = CellContext {
        cfg,
        scenario,
        geometry,
        model,
        opts: cfg.channel.channel_options(),
        radio: cfg.radio.radio_config(bandwidth_hz),
        mcs,
        interference_reuse_m: (!cfg.allocation.noise_limited).then(|| cfg.reuse_distance_m()),
    };

    // With no stochastic term every drop is identical: evaluate one and
    // replicate the counts exactly.
    let stochastic = cfg.channel.shadowing;
    let eval_drops = if stochastic { cfg.sweep.n_drops } else { 1 };
    let n_tx = geometry.len();

    let counts: Vec<Counts> = (0..eval_drops as usize * n_tx)
        .into_par_iter()
        .map(|flat| {
            let drop = (flat / n_tx) as u32;
            let tx_links = &ctx.geometry[flat % n_tx];
            ctx.eval_tx(drop, tx_links)
        })
        .collect::<Result<_, _>>()?;

    let replication = if stochastic {
        1
    } else {
        u64::from(cfg.sweep.n_drops)
    };
    let mut tx_succ = vec![0u64; n_tx];
    let mut tx_tot = vec![0u64; n_tx];
    let mut cell_succ = 0u64;
    let mut cell_tot = 0u64;
    let mut cell_clamped = 0u64;
    let mut per_drop_prr = Vec::with_capacity(eval_drops as usize);
    for drop in 0..eval_drops as usize {
        let mut drop_succ = 0u64;
        let mut drop_tot = 0u64;
        for t in 0..n_tx {
            let (succ, tot, clamped) = counts[drop * n_tx + t];
            tx_succ[t] += succ;
            tx_tot[t] += tot;
            drop_succ += succ;
            drop_tot += tot;
            cell_clamped += clamped;
        }
        cell_succ += drop_succ;
        cell_tot += drop_tot;
        if drop_tot > 0 {
            per_drop_prr.push(drop_succ as f64 / drop_tot as f64);
        }
    }

    report.clamped_links = cell_clamped * replication;
    if cell_tot == 0 {
        // No receiver within range anywhere: the ratio is undefined.
        report.prr = None;
        report.per_tx_prr = None;
        return Ok(report);
    }
    report.prr = Some(cell_succ as f64 / cell_tot as f64);
    let (ratio_sum, tx_with_links) = tx_succ
        .iter()
        .zip(&tx_tot)
        .filter(|&(_, &tot)| tot > 0)
        .fold((0.0f64, 0u64), |(sum, n), (&succ, &tot)| {
            (sum + succ as f64 / tot as f64, n + 1)
        });
    report.per_tx_prr = Some(ratio_sum / tx_with_links as f64);
    if stochastic {
        report.per_drop_prr = per_drop_prr;
    } else {
        let value = per_drop_prr[0];
        report.per_drop_prr = vec![value; cfg.sweep.n_drops as usize];
    }
    Ok(report)
}

/// Runs the PRR sweep: every model × bandwidth × density cell of the
/// config, in that nesting order. Geometry is built once per density and
/// shared across cells.
pub fn prr_reports(cfg: &SimConfig, table: &McsTable) -> Result<Vec<PrrReport>, SweepError> {
    let mut scenarios = Vec::with_capacity(cfg.sweep.ivds_m.len());
    for &ivd in &cfg.sweep.ivds_m {
        let scenario = build_scenario(&crate::scenario::HighwayConfig {
            ivd_m: ivd,
            ..cfg.highway
        })?;
        let geometry = build_geometry(cfg, &scenario)?;
        scenarios.push((scenario, geometry));
    }

    let mut reports = Vec::with_capacity(
        cfg.sweep.models.len() * cfg.sweep.bandwidths_hz.len() * scenarios.len(),
    );
    for &model in &cfg.sweep.models {
        for &bandwidth_hz in &cfg.sweep.bandwidths_hz {
            for (scenario, geometry) in &scenarios {
                reports.push(evaluate_cell(
                    cfg,
                    table,
                    scenario,
                    geometry,
                    model,
                    bandwidth_hz,
                )?);
            }
        }
    }
    Ok(reports)
}

/// Builds the pathloss distribution datasets: for every swept model, one
/// dataset without shadowing and one with, over the configured grid. The
/// WINNER II and 3GPP datasets use their configured LOS branches.
pub fn cdf_datasets(cfg: &SimConfig) -> Result<Vec<CdfDataset>, SweepError> {
    let opts = cfg.channel.channel_options();
    let mut datasets = Vec::with_capacity(cfg.sweep.models.len() * 2);
    for &model in &cfg.sweep.models {
        for shadowing in [false, true] {
            let spec = CdfSpec {
                model,
                los_state: cfg.cdf.state_for(model),
                d_min_m: cfg.cdf.d_min_m,
                d_max_m: cfg.cdf.d_max_m,
                n_samples: cfg.cdf.n_samples,
                spacing: cfg.cdf.spacing,
                shadowing,
                seed: cfg.sweep.seed,
            };
            let params = cfg.channel.v2v_params(&cfg.highway, spec.los_state);
            datasets.push(kpi::pathloss_cdf(&spec, &params, &opts)?);
        }
    }
    Ok(datasets)
}

/// Full run: validates the config, loads the MCS table, runs the PRR
/// sweep and builds the CDF datasets. Writing files is the caller's
/// choice (see [`crate::export::write_all`]).
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepOutput, SweepError> {
    cfg.validate()?;
    let table = cfg.load_mcs_table()?;
    Ok(SweepOutput {
        reports: prr_reports(cfg, &table)?,
        datasets: cdf_datasets(cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kpi::LinkRecord;
    use approx::assert_relative_eq;

    /// Small but non-trivial scenario: 2 lanes x 10 vehicles, one site.
    fn small_config() -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.highway.length_m = 200.0;
        cfg.highway.lanes = 2;
        cfg.highway.ivd_m = 20.0;
        cfg.highway.isd_m = 300.0;
        cfg.sweep.models = vec![ChannelModelKind::TwoRay, ChannelModelKind::Gpp3Rel15];
        cfg.sweep.bandwidths_hz = vec![10e6];
        cfg.sweep.ivds_m = vec![20.0];
        cfg.sweep.n_drops = 3;
        cfg.sweep.range_m = 100.0;
        cfg
    }

    #[test]
    fn los_policy_follows_the_geometry() {
        let scenario = build_scenario(&SimConfig::default().highway).unwrap();
        let lane0 = scenario.lane_slice(0);
        let lane1 = scenario.lane_slice(1);
        let policy = LosPolicy::Geometric;
        // Adjacent same-lane: nothing in between.
        assert_eq!(
            los_state_for(policy, 200.0, &scenario, &lane0[0], &lane0[1]),
            LosState::Los
        );
        // One vehicle in between.
        assert_eq!(
            los_state_for(policy, 200.0, &scenario, &lane0[0], &lane0[2]),
            LosState::Nlos
        );
        // Cross-lane, short: LOS.
        assert_eq!(
            los_state_for(policy, 200.0, &scenario, &lane0[0], &lane1[0]),
            LosState::Los
        );
        // Cross-lane, beyond the cutoff: NLOS.
        assert_eq!(
            los_state_for(policy, 200.0, &scenario, &lane0[0], &lane1[30]),
            LosState::Nlos
        );
        // Fixed policies ignore geometry.
        assert_eq!(
            los_state_for(LosPolicy::AlwaysLos, 200.0, &scenario, &lane0[0], &lane0[2]),
            LosState::Los
        );
        assert_eq!(
            los_state_for(
                LosPolicy::AlwaysNlos,
                200.0,
                &scenario,
                &lane0[0],
                &lane0[1]
            ),
            LosState::Nlos
        );
    }

    #[test]
    fn cross_lane_cutoff_is_exclusive_at_the_boundary() {
        let scenario = build_scenario(&SimConfig::default().highway).unwrap();
        let lane0 = scenario.lane_slice(0);
        let lane1 = scenario.lane_slice(1);
        // Same index across lanes: distance is exactly one lane width.
        let d = distance_3d(&lane0[0], &lane1[0]);
        assert_relative_eq!(d, 4.0);
        assert_eq!(
            los_state_for(LosPolicy::Geometric, 4.0, &scenario, &lane0[0], &lane1[0]),
            LosState::Los,
            "exactly at the cutoff stays LOS"
        );
        assert_eq!(
            los_state_for(LosPolicy::Geometric, 3.9, &scenario, &lane0[0], &lane1[0]),
            LosState::Nlos
        );
    }

    #[test]
    fn sweep_covers_the_grid_in_nesting_order() {
        let mut cfg = small_config();
        cfg.sweep.bandwidths_hz = vec![5e6, 10e6];
        cfg.sweep.ivds_m = vec![20.0, 40.0];
        let out = run_sweep(&cfg).unwrap();
        let cells: Vec<(ChannelModelKind, f64, f64)> = out
            .reports
            .iter()
            .map(|r| (r.model, r.bandwidth_hz, r.ivd_m))
            .collect();
        assert_eq!(
            cells,
            vec![
                (ChannelModelKind::TwoRay, 5e6, 20.0),
                (ChannelModelKind::TwoRay, 5e6, 40.0),
                (ChannelModelKind::TwoRay, 10e6, 20.0),
                (ChannelModelKind::TwoRay, 10e6, 40.0),
                (ChannelModelKind::Gpp3Rel15, 5e6, 20.0),
                (ChannelModelKind::Gpp3Rel15, 5e6, 40.0),
                (ChannelModelKind::Gpp3Rel15, 10e6, 20.0),
                (ChannelModelKind::Gpp3Rel15, 10e6, 40.0),
            ]
        );
        assert_eq!(out.datasets.len(), 4, "two datasets per model");
        assert!(!out.datasets[0].spec.shadowing && out.datasets[1].spec.shadowing);
    }

    /// Rebuilds one cell's result from first principles — scenario,
    /// per-link loss, link budget — and checks the engine agrees exactly.
    #[test]
    fn cell_prr_matches_an_independent_recount() {
        let cfg = small_config();
        let out = run_sweep(&cfg).unwrap();
        let report = &out.reports[0]; // two-ray cell
        let mcs = report.mcs.unwrap();

        let scenario = build_scenario(&cfg.highway).unwrap();
        let radio = cfg.radio.radio_config(10e6);
        let opts = cfg.channel.channel_options();
        let mut records = Vec::new();
        for tx in &scenario.vehicles {
            for rx in &scenario.vehicles {
                if tx.id == rx.id {
                    continue;
                }
                let d = distance_3d(tx, rx);
                if d > cfg.sweep.range_m {
                    continue;
                }
                let los = los_state_for(
                    cfg.channel.los_policy,
                    cfg.channel.cross_lane_nlos_cutoff_m,
                    &scenario,
                    tx,
                    rx,
                );
                let params = crate::channel::PropagationParams {
                    los_state: los,
                    ..cfg.channel.v2v_params(&cfg.highway, los)
                };
                let mut rng = SimRng::from_key(0, &[]);
                let loss = channel::link_loss(
                    ChannelModelKind::TwoRay,
                    d,
                    &params,
                    &opts,
                    scenario.blockers_between(tx, rx),
                    &mut rng,
                )
                .unwrap();
                let result = phy::evaluate_link(&loss, &radio, None, &mcs);
                records.push(LinkRecord {
                    tx_id: tx.id,
                    distance_m: d,
                    success: result.success,
                });
            }
        }
        let expected = kpi::compute_prr(&records, cfg.sweep.range_m).unwrap();
        assert_eq!(report.prr.unwrap(), expected, "bit-exact agreement");
        let expected_per_tx = kpi::per_tx_prr(&records, cfg.sweep.range_m).unwrap();
        assert_relative_eq!(
            report.per_tx_prr.unwrap(),
            expected_per_tx,
            max_relative = 1e-12
        );
    }

    #[test]
    fn without_shadowing_every_drop_is_the_same() {
        let cfg = small_config();
        let out = run_sweep(&cfg).unwrap();
        for report in &out.reports {
            assert_eq!(report.per_drop_prr.len(), 3);
            for prr in &report.per_drop_prr {
                assert_eq!(*prr, report.per_drop_prr[0]);
            }
        }
        // And the result equals a single-drop run.
        let mut one = small_config();
        one.sweep.n_drops = 1;
        let out_one = run_sweep(&one).unwrap();
        for (a, b) in out.reports.iter().zip(&out_one.reports) {
            assert_eq!(a.prr, b.prr);
        }
    }

    #[test]
    fn shadowed_runs_are_reproducible_and_seed_sensitive() {
        let mut cfg = small_config();
        cfg.channel.shadowing = true;
        cfg.sweep.models = vec![ChannelModelKind::WinnerD1];
        // Operate right at the decode threshold so the 8 dB spread flips
        // plenty of links and drops genuinely differ.
        cfg.channel.los_policy = LosPolicy::AlwaysNlos;
        cfg.radio.tx_power_dbm = 2.4;
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(
            a.reports[0].prr.unwrap().to_bits(),
            b.reports[0].prr.unwrap().to_bits()
        );
        assert_eq!(a.reports[0].per_drop_prr, b.reports[0].per_drop_prr);
        // Drops differ from each other under shadowing...
        let drops = &a.reports[0].per_drop_prr;
        assert!(
            drops.iter().any(|p| p != &drops[0]),
            "shadowing should vary across drops: {drops:?}"
        );
        // ...and a different seed gives a different result.
        cfg.sweep.seed = 99;
        let c = run_sweep(&cfg).unwrap();
        assert_ne!(a.reports[0].per_drop_prr, c.reports[0].per_drop_prr);
    }

    #[test]
    fn overloaded_cell_is_reported_infeasible_not_fatal() {
        let mut cfg = small_config();
        cfg.sweep.bandwidths_hz = vec![1e4]; // 20 UEs need SE 33.9, table tops at 5.55
        let out = run_sweep(&cfg).unwrap();
        for report in &out.reports {
            assert!(report.infeasible());
            assert_eq!(report.mcs, None);
            assert_eq!(report.prr, Some(0.0));
            assert_eq!(report.per_tx_prr, Some(0.0));
            assert!(report.per_drop_prr.is_empty());
        }
    }

    #[test]
    fn interference_never_improves_reception() {
        let mut noise_only = small_config();
        noise_only.sweep.models = vec![ChannelModelKind::TwoRay];
        let baseline = run_sweep(&noise_only).unwrap().reports[0].prr.unwrap();

        // Reuse at 110 m: a same-lane link at distance d sees the phantom at
        // 110 - d, so links beyond ~75 m get a carrier-to-interference ratio
        // below the -6.7 dB threshold and must fail.
        let mut interfered = noise_only.clone();
        interfered.allocation.noise_limited = false;
        interfered.allocation.reuse_distance_m = Some(110.0);
        let with_interference = run_sweep(&interfered).unwrap().reports[0].prr.unwrap();
        assert!(
            with_interference <= baseline,
            "interference must not raise PRR: {with_interference} vs {baseline}"
        );
        // A close interferer on this small segment must actually bite.
        assert!(with_interference < baseline);
    }

    #[test]
    fn strict_winner_validity_fails_on_too_short_links() {
        let mut cfg = small_config();
        cfg.highway.ivd_m = 5.0; // adjacent links at 5 m violate the 10 m bound
        cfg.sweep.ivds_m = vec![5.0];
        cfg.sweep.models = vec![ChannelModelKind::WinnerD1];
        cfg.channel.winner_validity = crate::channel::ValidityPolicy::Strict;
        match run_sweep(&cfg) {
            Err(SweepError::Channel(ChannelError::OutOfValidity { .. })) => {}
            other => panic!("expected a validity error, got {other:?}"),
        }
        // The default clamping policy accepts the same configuration.
        cfg.channel.winner_validity = crate::channel::ValidityPolicy::Clamp;
        let out = run_sweep(&cfg).unwrap();
        assert!(out.reports[0].clamped_links > 0);
    }

    #[test]
    fn clamped_links_are_counted_per_evaluation() {
        let mut cfg = small_config();
        cfg.sweep.models = vec![ChannelModelKind::WinnerD1];
        cfg.channel.los_policy = LosPolicy::AlwaysNlos; // 20 m links < 50 m bound
        let out = run_sweep(&cfg).unwrap();
        let r = &out.reports[0];
        assert!(r.clamped_links > 0);
        // Deterministic run: the count replicates exactly across drops.
        assert_eq!(r.clamped_links % u64::from(r.n_drops), 0);
    }

    #[test]
    fn empty_road_reports_undefined_prr() {
        let mut cfg = small_config();
        cfg.highway.length_m = 10.0; // shorter than one spacing: no vehicles
        cfg.highway.ivd_m = 20.0;
        cfg.sweep.ivds_m = vec![20.0];
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.reports[0].prr, None);
        assert_eq!(out.reports[0].per_tx_prr, None);
        assert_eq!(out.reports[0].n_ues, 0);
    }
}
