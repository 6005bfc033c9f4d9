// Temporary calibration probe (removed before finalizing).
use hospsim_core::{run_replication, ScenarioConfig, SimMode};

#[test]
#[ignore]
fn probe_baseline() {
    for mode in [SimMode::Hybrid, SimMode::DesOnly] {
        let cfg = ScenarioConfig {
            horizon_days: 300.0,
            warmup_days: 10.0,
            mode,
            master_seed: 42,
            ..ScenarioConfig::default()
        };
        let t0 = std::time::Instant::now();
        let (r, trace) = run_replication(&cfg, 0, 0).unwrap();
        let dt = t0.elapsed();
        let c = hospsim_core::metrics::conservation_counts(&trace, 10.0);
        println!("=== mode {:?} ({} ms, {} events) ===", mode, dt.as_millis(), trace.events.len());
        println!("arrivals {} recovered {} dropped {} home {} insys {}", c.arrivals, c.recovered, c.dropped_out, c.in_home_treatment, c.in_system);
        println!("dropout {} emergency {} recovered {}", r.early_dropout, r.emergency_before_appointment, r.recovered);
        println!("waits: system {:.3} hosp {:.3} tourist {:.3}", r.avg_system_wait_days, r.avg_hospital_queue_wait_days, r.avg_tourist_hospital_queue_wait_days);
        println!("utilisation {:?}", r.utilisation_pct);
        let transfers = trace.events.iter().filter(|e| matches!(e, hospsim_core::trace::TraceEvent::Transfer { .. })).count();
        println!("transfers {}", transfers);
        // occupancy snapshot: admissions per section
        let mut adm = [0u32; 5];
        for e in &trace.events {
            if let hospsim_core::trace::TraceEvent::BedAdmit { section, .. } = e {
                adm[section - 1] += 1;
            }
        }
        println!("admissions by section {:?}", adm);
    }
}

#[test]
#[ignore]
fn probe_low_vs_high_beds() {
    for (label, beds) in [
        ("low", [32u32, 40, 56, 16, 48]),
        ("high", [52u32, 65, 91, 26, 78]),
    ] {
        let cfg = ScenarioConfig {
            beds,
            horizon_days: 120.0,
            warmup_days: 10.0,
            master_seed: 7,
            ..ScenarioConfig::default()
        };
        let (r, _) = run_replication(&cfg, 0, 0).unwrap();
        println!(
            "{label}: tourist {:.3} hosp {:.3} system {:.3} dropout {}",
            r.avg_tourist_hospital_queue_wait_days,
            r.avg_hospital_queue_wait_days,
            r.avg_system_wait_days,
            r.early_dropout
        );
    }
}

#[test]
#[ignore]
fn probe_final_settings() {
    // Final coded settings: beds high, specialists low, K high, L low,
    // online scheduling high (scheduled), rest low.
    for mode in [SimMode::Hybrid, SimMode::DesOnly] {
        let cfg = ScenarioConfig {
            beds: [52, 65, 91, 26, 78],
            specialists: [1, 4, 1, 1, 2],
            tourist_online_share_pct: 60.0,
            local_online_share_pct: 10.0,
            online_scheduling: "scheduled".into(),
            in_person_scheduling: "immediate".into(),
            queue_discipline: "fifo".into(),
            slot_interval_minutes: 2.0,
            horizon_days: 365.0,
            warmup_days: 10.0,
            mode,
            master_seed: 123,
            ..ScenarioConfig::default()
        };
        let (r, trace) = run_replication(&cfg, 0, 0).unwrap();
        let transfers = trace.events.iter().filter(|e| matches!(e, hospsim_core::trace::TraceEvent::Transfer { .. })).count();
        println!(
            "final/{:?}: dropout {} syswait {:.3} hospwait {:.3} tourist {:.3} emerg {} recov {} util {:?} transfers {}",
            mode,
            r.early_dropout,
            r.avg_system_wait_days,
            r.avg_hospital_queue_wait_days,
            r.avg_tourist_hospital_queue_wait_days,
            r.emergency_before_appointment,
            r.recovered,
            r.utilisation_pct,
            transfers,
        );
    }
}
