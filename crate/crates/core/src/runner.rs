//! Replication driver: run one seeded replication and compute its responses.

use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::metrics::{compute_responses, ResponseVector};
use crate::trace::ReplicationTrace;
use crate::world::World;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("contract violation in run {run} replication {replication}: {message}")]
    ContractViolation {
        run: u64,
        replication: u64,
        message: String,
    },
}

/// Execute one replication. Pure in (config, run, replication): the same
/// inputs give a bit-identical trace and response vector.
pub fn run_replication(
    config: &ScenarioConfig,
    run_id: u64,
    replication: u64,
) -> Result<(ResponseVector, ReplicationTrace), SimError> {
    run_replication_with(config, run_id, replication, true)
}

/// As [`run_replication`], optionally skipping the per-event log (episode
/// and doctor tables are always collected).
pub fn run_replication_with(
    config: &ScenarioConfig,
    run_id: u64,
    replication: u64,
    record_events: bool,
) -> Result<(ResponseVector, ReplicationTrace), SimError> {
    let cfg = config.clone();
    let warmup = cfg.warmup_days;
    let result = std::panic::catch_unwind(move || {
        let mut world = World::new(cfg, run_id, replication);
        world.set_record_events(record_events);
        world.run()
    });
    match result {
        Ok(trace) => {
            let responses = compute_responses(&trace, warmup);
            Ok((responses, trace))
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            Err(SimError::ContractViolation {
                run: run_id,
                replication,
                message,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimMode;

    #[test]
    fn empty_reporting_window_yields_zero_counters() {
        let cfg = ScenarioConfig {
            horizon_days: 10.0,
            warmup_days: 10.0,
            ..ScenarioConfig::default()
        };
        let (r, _) = run_replication(&cfg, 0, 0).unwrap();
        assert!(r.empty);
        assert_eq!(r.early_dropout, 0);
        assert_eq!(r.recovered, 0);
        assert_eq!(r.avg_system_wait_days, 0.0);
    }

    #[test]
    fn short_run_completes_in_both_modes() {
        for mode in [SimMode::Hybrid, SimMode::DesOnly] {
            let cfg = ScenarioConfig {
                horizon_days: 40.0,
                warmup_days: 5.0,
                mode,
                master_seed: 11,
                ..ScenarioConfig::default()
            };
            let (r, trace) = run_replication(&cfg, 0, 0).unwrap();
            assert!(!trace.episodes.is_empty());
            assert!(!r.empty);
        }
    }
}
