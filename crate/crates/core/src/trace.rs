//! Replication traces: an append-only event log plus per-patient episode
//! records and per-doctor time accumulators. A persisted trace is sufficient
//! to recompute every response variable offline.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::agents::patient::{PatientId, TreatmentState};
use crate::config::SimMode;
use crate::time::SimTime;

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error in {file} line {line}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub run_id: u64,
    pub replication: u64,
    pub master_seed: u64,
    pub mode: SimMode,
    pub horizon_days: f64,
    pub warmup_days: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BedWaitOutcome {
    Admitted(SimTime),
    Left(SimTime),
    Pending,
}

/// One stretch of waiting for a bed in a section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BedWaitSpan {
    pub section: usize,
    pub request: SimTime,
    pub outcome: BedWaitOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatientEpisode {
    pub patient: PatientId,
    pub arrival: SimTime,
    pub tourist: bool,
    pub disease_section: usize,
    /// State at the horizon (terminal or still active).
    pub end_state: TreatmentState,
    pub end_time: Option<SimTime>,
    /// Minutes spent in physical queues (triage, clinic, video).
    pub physical_queue_minutes: f64,
    pub bed_waits: Vec<BedWaitSpan>,
    pub emergencies: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoctorRecord {
    pub doctor: usize,
    pub section: usize,
    /// Post-warm-up minutes, clipped at accrual time.
    pub worked_minutes: f64,
    pub scheduled_minutes: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    PatientState {
        t: SimTime,
        patient: PatientId,
        from: Option<TreatmentState>,
        to: TreatmentState,
        trigger: &'static str,
    },
    DoctorState {
        t: SimTime,
        doctor: usize,
        from: &'static str,
        to: &'static str,
    },
    BedRequest {
        t: SimTime,
        patient: PatientId,
        section: usize,
        tourist: bool,
        queue_len: usize,
    },
    BedBooked {
        t: SimTime,
        patient: PatientId,
        section: usize,
        slot_t: SimTime,
    },
    BedAdmit {
        t: SimTime,
        patient: PatientId,
        section: usize,
        request_t: SimTime,
        tourist: bool,
        queue_len: usize,
    },
    BedRelease {
        t: SimTime,
        patient: PatientId,
        section: usize,
        reason: &'static str,
    },
    QueueAbandon {
        t: SimTime,
        patient: PatientId,
        section: usize,
        queue_len: usize,
    },
    Transfer {
        t: SimTime,
        lender: usize,
        requester: usize,
        beds: u32,
    },
    TransferReturn {
        t: SimTime,
        lender: usize,
        requester: usize,
        beds: u32,
    },
    Emergency {
        t: SimTime,
        patient: PatientId,
        before_appointment: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationTrace {
    pub meta: TraceMeta,
    pub events: Vec<TraceEvent>,
    pub episodes: Vec<PatientEpisode>,
    pub doctors: Vec<DoctorRecord>,
}

fn state_label(s: TreatmentState) -> &'static str {
    s.label()
}

fn state_from_label(s: &str) -> Option<TreatmentState> {
    use TreatmentState::*;
    Some(match s {
        "need_service" => NeedService,
        "confirmation" => Confirmation,
        "wait_for_visit" => WaitForVisit,
        "wait_in_clinic_queue" => WaitInClinicQueue,
        "being_checkup" => BeingCheckup,
        "agree_or_disagree" => AgreeOrDisagree,
        "wait_in_video_queue" => WaitInVideoQueue,
        "answering_questions" => AnsweringQuestions,
        "accept_or_not" => AcceptOrNot,
        "wait_for_empty_bed" => WaitForEmptyBed,
        "wait_in_home" => WaitInHome,
        "hospitalization" => Hospitalization,
        "emergency" => Emergency,
        "home_treatment" => HomeTreatment,
        "recovered" => Recovered,
        "dropped_out" => DroppedOut,
        _ => return None,
    })
}

impl ReplicationTrace {
    /// Persist as a directory of CSV files plus a meta header. Floats are
    /// written with shortest round-trip formatting, so reload is exact.
    pub fn write_dir(&self, dir: &Path) -> Result<(), TraceIoError> {
        fs::create_dir_all(dir)?;

        let mut meta = String::new();
        let m = &self.meta;
        let _ = writeln!(meta, "run_id = {}", m.run_id);
        let _ = writeln!(meta, "replication = {}", m.replication);
        let _ = writeln!(meta, "master_seed = {}", m.master_seed);
        let _ = writeln!(meta, "mode = {}", m.mode.label());
        let _ = writeln!(meta, "horizon_days = {}", m.horizon_days);
        let _ = writeln!(meta, "warmup_days = {}", m.warmup_days);
        fs::write(dir.join("meta.txt"), meta)?;

        let mut ep = String::from(
            "patient,arrival_min,tourist,section,end_state,end_min,physical_queue_min,emergencies,bed_waits\n",
        );
        for e in &self.episodes {
            let spans: Vec<String> = e
                .bed_waits
                .iter()
                .map(|s| {
                    let (kind, t) = match s.outcome {
                        BedWaitOutcome::Admitted(t) => ("admitted", t.minutes().to_string()),
                        BedWaitOutcome::Left(t) => ("left", t.minutes().to_string()),
                        BedWaitOutcome::Pending => ("pending", String::new()),
                    };
                    format!("{}:{}:{}:{}", s.section, s.request.minutes(), kind, t)
                })
                .collect();
            let _ = writeln!(
                ep,
                "{},{},{},{},{},{},{},{},{}",
                e.patient,
                e.arrival.minutes(),
                e.tourist as u8,
                e.disease_section,
                state_label(e.end_state),
                e.end_time.map(|t| t.minutes().to_string()).unwrap_or_default(),
                e.physical_queue_minutes,
                e.emergencies,
                spans.join(";")
            );
        }
        fs::write(dir.join("episodes.csv"), ep)?;

        let mut docs = String::from("doctor,section,worked_min,scheduled_min\n");
        for d in &self.doctors {
            let _ = writeln!(
                docs,
                "{},{},{},{}",
                d.doctor, d.section, d.worked_minutes, d.scheduled_minutes
            );
        }
        fs::write(dir.join("doctors.csv"), docs)?;

        let mut f = std::io::BufWriter::new(fs::File::create(dir.join("events.csv"))?);
        writeln!(f, "t_min,kind,a,b,c,d,e")?;
        for ev in &self.events {
            let row = match ev {
                TraceEvent::PatientState {
                    t,
                    patient,
                    from,
                    to,
                    trigger,
                } => format!(
                    "{},patient_state,{},{},{},{},",
                    t.minutes(),
                    patient,
                    from.map(state_label).unwrap_or(""),
                    state_label(*to),
                    trigger
                ),
                TraceEvent::DoctorState { t, doctor, from, to } => {
                    format!("{},doctor_state,{},{},{},,", t.minutes(), doctor, from, to)
                }
                TraceEvent::BedRequest {
                    t,
                    patient,
                    section,
                    tourist,
                    queue_len,
                } => format!(
                    "{},bed_request,{},{},{},{},",
                    t.minutes(),
                    patient,
                    section,
                    *tourist as u8,
                    queue_len
                ),
                TraceEvent::BedBooked {
                    t,
                    patient,
                    section,
                    slot_t,
                } => format!(
                    "{},bed_booked,{},{},{},,",
                    t.minutes(),
                    patient,
                    section,
                    slot_t.minutes()
                ),
                TraceEvent::BedAdmit {
                    t,
                    patient,
                    section,
                    request_t,
                    tourist,
                    queue_len,
                } => format!(
                    "{},bed_admit,{},{},{},{},{}",
                    t.minutes(),
                    patient,
                    section,
                    request_t.minutes(),
                    *tourist as u8,
                    queue_len
                ),
                TraceEvent::BedRelease {
                    t,
                    patient,
                    section,
                    reason,
                } => format!(
                    "{},bed_release,{},{},{},,",
                    t.minutes(),
                    patient,
                    section,
                    reason
                ),
                TraceEvent::QueueAbandon {
                    t,
                    patient,
                    section,
                    queue_len,
                } => format!(
                    "{},queue_abandon,{},{},{},,",
                    t.minutes(),
                    patient,
                    section,
                    queue_len
                ),
                TraceEvent::Transfer {
                    t,
                    lender,
                    requester,
                    beds,
                } => format!(
                    "{},transfer,{},{},{},,",
                    t.minutes(),
                    lender,
                    requester,
                    beds
                ),
                TraceEvent::TransferReturn {
                    t,
                    lender,
                    requester,
                    beds,
                } => format!(
                    "{},transfer_return,{},{},{},,",
                    t.minutes(),
                    lender,
                    requester,
                    beds
                ),
                TraceEvent::Emergency {
                    t,
                    patient,
                    before_appointment,
                } => format!(
                    "{},emergency,{},{},,,",
                    t.minutes(),
                    patient,
                    *before_appointment as u8
                ),
            };
            writeln!(f, "{row}")?;
        }
        f.flush()?;
        Ok(())
    }

    /// Reload a trace persisted with [`write_dir`]. Events are reload-exact
    /// for the fields the validators use; episode and doctor tables are
    /// bit-exact.
    pub fn read_dir(dir: &Path) -> Result<ReplicationTrace, TraceIoError> {
        let parse_err = |file: &str, line: usize, reason: &str| TraceIoError::Parse {
            file: file.to_string(),
            line,
            reason: reason.to_string(),
        };

        let meta_text = fs::read_to_string(dir.join("meta.txt"))?;
        let mut meta = TraceMeta {
            run_id: 0,
            replication: 0,
            master_seed: 0,
            mode: SimMode::Hybrid,
            horizon_days: 0.0,
            warmup_days: 0.0,
        };
        for (i, line) in meta_text.lines().enumerate() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err("meta.txt", i + 1, "expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "run_id" => meta.run_id = v.parse().map_err(|_| parse_err("meta.txt", i + 1, "run_id"))?,
                "replication" => {
                    meta.replication = v.parse().map_err(|_| parse_err("meta.txt", i + 1, "replication"))?
                }
                "master_seed" => {
                    meta.master_seed = v.parse().map_err(|_| parse_err("meta.txt", i + 1, "master_seed"))?
                }
                "mode" => {
                    meta.mode = v
                        .parse()
                        .map_err(|_| parse_err("meta.txt", i + 1, "mode"))?
                }
                "horizon_days" => {
                    meta.horizon_days = v.parse().map_err(|_| parse_err("meta.txt", i + 1, "horizon_days"))?
                }
                "warmup_days" => {
                    meta.warmup_days = v.parse().map_err(|_| parse_err("meta.txt", i + 1, "warmup_days"))?
                }
                _ => return Err(parse_err("meta.txt", i + 1, "unknown key")),
            }
        }

        let ep_text = fs::read_to_string(dir.join("episodes.csv"))?;
        let mut episodes = Vec::new();
        for (i, line) in ep_text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(parse_err("episodes.csv", i + 1, "expected 9 columns"));
            }
            let bed_waits = if cols[8].is_empty() {
                Vec::new()
            } else {
                cols[8]
                    .split(';')
                    .map(|span| {
                        let parts: Vec<&str> = span.split(':').collect();
                        if parts.len() != 4 {
                            return Err(parse_err("episodes.csv", i + 1, "bad bed-wait span"));
                        }
                        let outcome = match parts[2] {
                            "admitted" => BedWaitOutcome::Admitted(SimTime::from_minutes(
                                parts[3].parse().map_err(|_| {
                                    parse_err("episodes.csv", i + 1, "bad admit time")
                                })?,
                            )),
                            "left" => BedWaitOutcome::Left(SimTime::from_minutes(
                                parts[3]
                                    .parse()
                                    .map_err(|_| parse_err("episodes.csv", i + 1, "bad left time"))?,
                            )),
                            "pending" => BedWaitOutcome::Pending,
                            _ => return Err(parse_err("episodes.csv", i + 1, "bad outcome")),
                        };
                        Ok(BedWaitSpan {
                            section: parts[0]
                                .parse()
                                .map_err(|_| parse_err("episodes.csv", i + 1, "bad section"))?,
                            request: SimTime::from_minutes(parts[1].parse().map_err(|_| {
                                parse_err("episodes.csv", i + 1, "bad request time")
                            })?),
                            outcome,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            episodes.push(PatientEpisode {
                patient: cols[0]
                    .parse()
                    .map_err(|_| parse_err("episodes.csv", i + 1, "bad patient id"))?,
                arrival: SimTime::from_minutes(
                    cols[1]
                        .parse()
                        .map_err(|_| parse_err("episodes.csv", i + 1, "bad arrival"))?,
                ),
                tourist: cols[2] == "1",
                disease_section: cols[3]
                    .parse()
                    .map_err(|_| parse_err("episodes.csv", i + 1, "bad section"))?,
                end_state: state_from_label(cols[4])
                    .ok_or_else(|| parse_err("episodes.csv", i + 1, "bad end state"))?,
                end_time: if cols[5].is_empty() {
                    None
                } else {
                    Some(SimTime::from_minutes(cols[5].parse().map_err(|_| {
                        parse_err("episodes.csv", i + 1, "bad end time")
                    })?))
                },
                physical_queue_minutes: cols[6]
                    .parse()
                    .map_err(|_| parse_err("episodes.csv", i + 1, "bad queue minutes"))?,
                emergencies: cols[7]
                    .parse()
                    .map_err(|_| parse_err("episodes.csv", i + 1, "bad emergencies"))?,
                bed_waits,
            });
        }

        let doc_text = fs::read_to_string(dir.join("doctors.csv"))?;
        let mut doctors = Vec::new();
        for (i, line) in doc_text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(parse_err("doctors.csv", i + 1, "expected 4 columns"));
            }
            doctors.push(DoctorRecord {
                doctor: cols[0]
                    .parse()
                    .map_err(|_| parse_err("doctors.csv", i + 1, "bad doctor"))?,
                section: cols[1]
                    .parse()
                    .map_err(|_| parse_err("doctors.csv", i + 1, "bad section"))?,
                worked_minutes: cols[2]
                    .parse()
                    .map_err(|_| parse_err("doctors.csv", i + 1, "bad worked"))?,
                scheduled_minutes: cols[3]
                    .parse()
                    .map_err(|_| parse_err("doctors.csv", i + 1, "bad scheduled"))?,
            });
        }

        // Only the bed and transfer events are needed by the offline
        // validators; patient/doctor state rows are reloaded as well.
        let ev_text = fs::read_to_string(dir.join("events.csv"))?;
        let mut events = Vec::new();
        for (i, line) in ev_text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.splitn(7, ',').collect();
            if cols.len() != 7 {
                return Err(parse_err("events.csv", i + 1, "expected 7 columns"));
            }
            let t = SimTime::from_minutes(
                cols[0]
                    .parse()
                    .map_err(|_| parse_err("events.csv", i + 1, "bad time"))?,
            );
            let num = |s: &str, what: &str| -> Result<u64, TraceIoError> {
                s.parse()
                    .map_err(|_| parse_err("events.csv", i + 1, what))
            };
            let ev = match cols[1] {
                "patient_state" => {
                    // Validators reconstruct labels; keep static labels only
                    // for states we know.
                    let from = if cols[3].is_empty() {
                        None
                    } else {
                        Some(state_from_label(cols[3]).ok_or_else(|| {
                            parse_err("events.csv", i + 1, "bad from state")
                        })?)
                    };
                    let to = state_from_label(cols[4])
                        .ok_or_else(|| parse_err("events.csv", i + 1, "bad to state"))?;
                    TraceEvent::PatientState {
                        t,
                        patient: num(cols[2], "patient")?,
                        from,
                        to,
                        trigger: "replayed",
                    }
                }
                "doctor_state" => TraceEvent::DoctorState {
                    t,
                    doctor: num(cols[2], "doctor")? as usize,
                    from: "replayed",
                    to: "replayed",
                },
                "bed_request" => TraceEvent::BedRequest {
                    t,
                    patient: num(cols[2], "patient")?,
                    section: num(cols[3], "section")? as usize,
                    tourist: cols[4] == "1",
                    queue_len: num(cols[5], "queue len")? as usize,
                },
                "bed_booked" => TraceEvent::BedBooked {
                    t,
                    patient: num(cols[2], "patient")?,
                    section: num(cols[3], "section")? as usize,
                    slot_t: SimTime::from_minutes(
                        cols[4]
                            .parse()
                            .map_err(|_| parse_err("events.csv", i + 1, "bad slot time"))?,
                    ),
                },
                "bed_admit" => TraceEvent::BedAdmit {
                    t,
                    patient: num(cols[2], "patient")?,
                    section: num(cols[3], "section")? as usize,
                    request_t: SimTime::from_minutes(
                        cols[4]
                            .parse()
                            .map_err(|_| parse_err("events.csv", i + 1, "bad request time"))?,
                    ),
                    tourist: cols[5] == "1",
                    queue_len: num(cols[6], "queue len")? as usize,
                },
                "bed_release" => TraceEvent::BedRelease {
                    t,
                    patient: num(cols[2], "patient")?,
                    section: num(cols[3], "section")? as usize,
                    reason: "replayed",
                },
                "queue_abandon" => TraceEvent::QueueAbandon {
                    t,
                    patient: num(cols[2], "patient")?,
                    section: num(cols[3], "section")? as usize,
                    queue_len: num(cols[4], "queue len")? as usize,
                },
                "transfer" => TraceEvent::Transfer {
                    t,
                    lender: num(cols[2], "lender")? as usize,
                    requester: num(cols[3], "requester")? as usize,
                    beds: num(cols[4], "beds")? as u32,
                },
                "transfer_return" => TraceEvent::TransferReturn {
                    t,
                    lender: num(cols[2], "lender")? as usize,
                    requester: num(cols[3], "requester")? as usize,
                    beds: num(cols[4], "beds")? as u32,
                },
                "emergency" => TraceEvent::Emergency {
                    t,
                    patient: num(cols[2], "patient")?,
                    before_appointment: cols[3] == "1",
                },
                other => {
                    return Err(parse_err(
                        "events.csv",
                        i + 1,
                        &format!("unknown event kind `{other}`"),
                    ))
                }
            };
            events.push(ev);
        }

        Ok(ReplicationTrace {
            meta,
            events,
            episodes,
            doctors,
        })
    }
}
