//! Response variables computed from replication traces.
//!
//! All counts and waits are restricted to the cohort of patients arriving
//! after the warm-up, which makes the flow-conservation identity exact:
//! arrivals = recovered + dropouts + in-system + still-in-home-treatment.

use crate::agents::patient::TreatmentState;
use crate::time::MINUTES_PER_DAY;
use crate::trace::{BedWaitOutcome, PatientEpisode, ReplicationTrace};

/// The six response variables plus the auxiliary overall hospital-queue wait.
/// Waits are in days; utilisation in percent and may exceed 100 (overtime).
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    pub early_dropout: u64,
    pub avg_system_wait_days: f64,
    pub avg_hospital_queue_wait_days: f64,
    pub avg_tourist_hospital_queue_wait_days: f64,
    pub emergency_before_appointment: u64,
    pub recovered: u64,
    pub utilisation_pct: [Option<f64>; 5],
    /// Set when no eligible patients were observed.
    pub empty: bool,
}

impl ResponseVector {
    pub fn zero() -> Self {
        ResponseVector {
            early_dropout: 0,
            avg_system_wait_days: 0.0,
            avg_hospital_queue_wait_days: 0.0,
            avg_tourist_hospital_queue_wait_days: 0.0,
            emergency_before_appointment: 0,
            recovered: 0,
            utilisation_pct: [None; 5],
            empty: true,
        }
    }

    /// Mean utilisation across sections with defined values; the scalar
    /// utilisation response used by the screening analysis.
    pub fn mean_utilisation_pct(&self) -> Option<f64> {
        let defined: Vec<f64> = self.utilisation_pct.iter().flatten().copied().collect();
        if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        }
    }
}

/// Conservation tally over the post-warm-up arrival cohort.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConservationCounts {
    pub arrivals: u64,
    pub recovered: u64,
    pub dropped_out: u64,
    pub in_home_treatment: u64,
    pub in_system: u64,
}

impl ConservationCounts {
    pub fn balanced(&self) -> bool {
        self.arrivals
            == self.recovered + self.dropped_out + self.in_home_treatment + self.in_system
    }
}

pub fn conservation_counts(trace: &ReplicationTrace, warmup_days: f64) -> ConservationCounts {
    let mut c = ConservationCounts {
        arrivals: 0,
        recovered: 0,
        dropped_out: 0,
        in_home_treatment: 0,
        in_system: 0,
    };
    for e in cohort(trace, warmup_days) {
        c.arrivals += 1;
        match e.end_state {
            TreatmentState::Recovered => c.recovered += 1,
            TreatmentState::DroppedOut => c.dropped_out += 1,
            TreatmentState::HomeTreatment => c.in_home_treatment += 1,
            _ => c.in_system += 1,
        }
    }
    c
}

fn cohort<'a>(
    trace: &'a ReplicationTrace,
    warmup_days: f64,
) -> impl Iterator<Item = &'a PatientEpisode> {
    let cut = warmup_days * MINUTES_PER_DAY;
    trace.episodes.iter().filter(move |e| e.arrival.minutes() >= cut)
}

/// Wait accrued by one bed span, clipped at the horizon for spans still
/// open when the run ended.
fn bed_wait_minutes(span_request: f64, outcome: BedWaitOutcome, horizon_min: f64) -> f64 {
    match outcome {
        BedWaitOutcome::Admitted(t) => t.minutes() - span_request,
        BedWaitOutcome::Left(t) => t.minutes() - span_request,
        BedWaitOutcome::Pending => (horizon_min - span_request).max(0.0),
    }
}

/// Compute the response vector from a trace. `warmup_days` must match the
/// warm-up the trace was produced with (doctor accumulators are clipped at
/// accrual time).
pub fn compute_responses(trace: &ReplicationTrace, warmup_days: f64) -> ResponseVector {
    assert!(
        (warmup_days - trace.meta.warmup_days).abs() < 1e-9,
        "trace was recorded with warm-up {} days",
        trace.meta.warmup_days
    );
    let horizon_min = trace.meta.horizon_days * MINUTES_PER_DAY;
    let mut out = ResponseVector::zero();

    let mut n_patients = 0u64;
    let mut system_wait_sum = 0.0;
    let mut admitted_waits: Vec<f64> = Vec::new();
    let mut tourist_admitted_waits: Vec<f64> = Vec::new();

    for e in cohort(trace, warmup_days) {
        n_patients += 1;
        match e.end_state {
            TreatmentState::DroppedOut => out.early_dropout += 1,
            TreatmentState::Recovered => out.recovered += 1,
            _ => {}
        }
        out.emergency_before_appointment += e.emergencies as u64;

        let mut total = e.physical_queue_minutes;
        for s in &e.bed_waits {
            total += bed_wait_minutes(s.request.minutes(), s.outcome, horizon_min);
            if let BedWaitOutcome::Admitted(t) = s.outcome {
                let w = t.minutes() - s.request.minutes();
                admitted_waits.push(w);
                if e.tourist {
                    tourist_admitted_waits.push(w);
                }
            }
        }
        system_wait_sum += total;
    }

    if n_patients > 0 {
        out.empty = false;
        out.avg_system_wait_days = system_wait_sum / n_patients as f64 / MINUTES_PER_DAY;
    }
    if !admitted_waits.is_empty() {
        out.avg_hospital_queue_wait_days =
            admitted_waits.iter().sum::<f64>() / admitted_waits.len() as f64 / MINUTES_PER_DAY;
    }
    if !tourist_admitted_waits.is_empty() {
        out.avg_tourist_hospital_queue_wait_days = tourist_admitted_waits.iter().sum::<f64>()
            / tourist_admitted_waits.len() as f64
            / MINUTES_PER_DAY;
    }

    let mut worked = [0.0f64; 5];
    let mut scheduled = [0.0f64; 5];
    for d in &trace.doctors {
        worked[d.section - 1] += d.worked_minutes;
        scheduled[d.section - 1] += d.scheduled_minutes;
    }
    for i in 0..5 {
        out.utilisation_pct[i] = specialist_utilisation(worked[i], scheduled[i]);
    }
    out
}

/// Percent utilisation; undefined (missing, not zero) without scheduled time.
pub fn specialist_utilisation(worked_minutes: f64, scheduled_minutes: f64) -> Option<f64> {
    if scheduled_minutes > 0.0 {
        Some(100.0 * worked_minutes / scheduled_minutes)
    } else {
        None
    }
}

/// Fixed results-file schema shared by every command that emits rows.
pub fn results_csv_header() -> String {
    let mut cols = vec![
        "run_id".to_string(),
        "replication".to_string(),
        "seed".to_string(),
    ];
    for f in FACTOR_LABELS {
        cols.push(f.to_string());
    }
    cols.extend(
        [
            "early_dropout",
            "avg_system_wait_days",
            "avg_hospital_queue_wait_days",
            "avg_tourist_queue_wait_days",
            "emergency_before_appointment",
            "recovered",
            "utilisation_mean_pct",
            "util_s1_pct",
            "util_s2_pct",
            "util_s3_pct",
            "util_s4_pct",
            "util_s5_pct",
        ]
        .map(String::from),
    );
    cols.join(",")
}

pub const FACTOR_LABELS: [&str; 16] = [
    "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N", "O", "P",
];

pub fn results_csv_row(
    run_id: u64,
    replication: u64,
    seed: u64,
    coded: &[i8; 16],
    response: &ResponseVector,
) -> String {
    let mut cols = vec![run_id.to_string(), replication.to_string(), seed.to_string()];
    for c in coded {
        cols.push(c.to_string());
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    cols.push(response.early_dropout.to_string());
    cols.push(response.avg_system_wait_days.to_string());
    cols.push(response.avg_hospital_queue_wait_days.to_string());
    cols.push(response.avg_tourist_hospital_queue_wait_days.to_string());
    cols.push(response.emergency_before_appointment.to_string());
    cols.push(response.recovered.to_string());
    cols.push(opt(response.mean_utilisation_pct()));
    for u in response.utilisation_pct {
        cols.push(opt(u));
    }
    cols.join(",")
}
