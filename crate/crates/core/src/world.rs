//! The replication engine: a single-threaded event loop driving the process
//! layer (arrivals, triage, booking, visits, admission, discharge) and, in
//! hybrid mode, the behavioural layer (adherence, worry, reviews, doctor
//! switching, bed borrowing).

use std::collections::VecDeque;

use rand::Rng;

use crate::agents::adherence::drug_behavior_step;
use crate::agents::doctor::{
    update_popularity, Appointment, DoctorAgent, DoctorState, VisitOutcome,
};
use crate::agents::patient::{
    treatment_edge_allowed, AdherenceLevel, Gender, HealthStatus, PatientAgent, PatientId,
    PatientType, Temperament, TreatmentState,
};
use crate::agents::section::{
    capacity_rebalance, try_return_borrowed_beds, SectionAgent, WaitingPatient,
};
use crate::calendar::EventQueue;
use crate::config::{ScenarioConfig, SimMode};
use crate::dist::sample_interarrival;
use crate::policy::{AdmissionRoute, AdmissionScheduling, BedQueueDiscipline};
use crate::rng::{Purpose, RngStreams};
use crate::schedule::{Activity, BlockInstance};
use crate::specialty::{Channel, Specialty, VisitPhase};
use crate::time::{SimTime, MINUTES_PER_DAY, MINUTES_PER_HOUR};
use crate::trace::{
    BedWaitOutcome, BedWaitSpan, DoctorRecord, PatientEpisode, ReplicationTrace, TraceEvent,
    TraceMeta,
};

/// Visit-duration sample for a (doctor, patient) pairing: the base
/// specialty/channel distribution scaled by the behaviour factor for
/// anxious patients.
pub fn consultation_duration<R: Rng + ?Sized>(
    rng: &mut R,
    specialty: Specialty,
    channel: Channel,
    phase: VisitPhase,
    temperament: Temperament,
    anxious_factor: f64,
) -> f64 {
    let base = specialty.service_time(channel, phase).sample(rng);
    match temperament {
        Temperament::Anxious => base * anxious_factor,
        _ => base,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ServiceKind {
    Visit {
        patient: PatientId,
        channel: Channel,
        emergency: bool,
        recheck: bool,
    },
    FileReview {
        patient: PatientId,
    },
    WardRound {
        patient: PatientId,
    },
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    Arrival,
    TriageDone { patient: PatientId },
    ConfirmationElapsed { patient: PatientId, epoch: u64 },
    AppointmentDue { patient: PatientId, epoch: u64 },
    BlockStart { doctor: usize },
    BlockEnd { doctor: usize },
    ServiceDone { doctor: usize, kind: ServiceKind },
    AdherenceTick { patient: PatientId },
    ThreeDayReview { patient: PatientId },
    FiveDayReview { patient: PatientId },
    WorryThreshold { patient: PatientId, epoch: u64 },
    HomeCourseEnd { patient: PatientId, epoch: u64 },
    BedSlotDue { patient: PatientId, epoch: u64 },
}

/// Engine-side per-patient bookkeeping kept out of the agent record.
#[derive(Debug, Clone, Default)]
struct PatientRt {
    epoch: u64,
    appointment: Option<(usize, Appointment)>,
    /// Sampled stay for the pending/current admission, minutes.
    pending_stay_min: f64,
    stay_interval: Option<(f64, f64)>,
    /// Open bed-wait span index in the episode record.
    open_bed_span: Option<usize>,
    gp_join: Option<SimTime>,
    visit_queue_join: Option<SimTime>,
}

#[derive(Debug, Clone, Default)]
struct DoctorRt {
    current_block: Option<BlockInstance>,
    busy: bool,
    clinic_queue: VecDeque<PatientId>,
    video_queue: VecDeque<PatientId>,
    ward_queue: VecDeque<PatientId>,
}

pub struct World {
    pub cfg: ScenarioConfig,
    run_id: u64,
    replication: u64,
    hybrid: bool,
    calendar: EventQueue<Ev>,
    streams: RngStreams,
    patients: Vec<PatientAgent>,
    prt: Vec<PatientRt>,
    episodes: Vec<PatientEpisode>,
    doctors: Vec<DoctorAgent>,
    drt: Vec<DoctorRt>,
    by_specialty: Vec<Vec<usize>>,
    sections: Vec<SectionAgent>,
    discipline: Box<dyn BedQueueDiscipline>,
    online_scheduling: Box<dyn AdmissionScheduling>,
    in_person_scheduling: Box<dyn AdmissionScheduling>,
    gp_busy: usize,
    gp_queue: VecDeque<PatientId>,
    horizon: SimTime,
    warmup_min: f64,
    record_events: bool,
    events: Vec<TraceEvent>,
}

impl World {
    pub fn new(cfg: ScenarioConfig, run_id: u64, replication: u64) -> World {
        cfg.validate().expect("validated config");
        let horizon = SimTime::from_days(cfg.horizon_days);
        let mut doctors = Vec::new();
        let mut by_specialty = vec![Vec::new(); 5];
        for spec in Specialty::ALL {
            for _ in 0..cfg.specialists[spec.index()] {
                let id = doctors.len();
                doctors.push(DoctorAgent::new(id, spec));
                by_specialty[spec.index()].push(id);
            }
        }
        let sections = Specialty::ALL
            .iter()
            .map(|&s| SectionAgent::new(s, cfg.beds[s.index()]))
            .collect();
        let discipline =
            crate::policy::discipline_by_name(&cfg.queue_discipline).expect("validated");
        let online_scheduling =
            crate::policy::scheduling_by_name(&cfg.online_scheduling).expect("validated");
        let in_person_scheduling =
            crate::policy::scheduling_by_name(&cfg.in_person_scheduling).expect("validated");
        let drt = vec![DoctorRt::default(); doctors.len()];
        let hybrid = cfg.mode == SimMode::Hybrid;
        let streams = RngStreams::new(cfg.master_seed, run_id, replication);
        let warmup_min = cfg.warmup_days * MINUTES_PER_DAY;
        World {
            run_id,
            replication,
            hybrid,
            calendar: EventQueue::with_horizon(horizon),
            streams,
            patients: Vec::new(),
            prt: Vec::new(),
            episodes: Vec::new(),
            doctors,
            drt,
            by_specialty,
            sections,
            discipline,
            online_scheduling,
            in_person_scheduling,
            gp_busy: 0,
            gp_queue: VecDeque::new(),
            horizon,
            warmup_min,
            record_events: true,
            events: Vec::new(),
            cfg,
        }
    }

    pub fn set_record_events(&mut self, record: bool) {
        self.record_events = record;
    }

    pub fn clock(&self) -> SimTime {
        self.calendar.clock()
    }

    /// Execute the replication to the horizon and assemble the trace.
    pub fn run(mut self) -> ReplicationTrace {
        let first_gap = {
            let rate = self.cfg.arrival_rate_per_day;
            let rng = self.streams.stream(Purpose::Arrival, 0);
            sample_interarrival(rng, rate).expect("positive rate")
        };
        self.calendar
            .schedule(SimTime::from_minutes(first_gap), Ev::Arrival)
            .unwrap();
        for d in 0..self.doctors.len() {
            self.schedule_next_block(d, SimTime::ZERO);
        }
        while let Some((_, ev)) = self.calendar.pop() {
            self.handle(ev);
        }
        self.finalize()
    }

    fn log(&mut self, ev: TraceEvent) {
        if self.record_events {
            self.events.push(ev);
        }
    }

    fn now(&self) -> SimTime {
        self.calendar.clock()
    }

    // ------------------------------------------------------------------
    // Patient state transitions
    // ------------------------------------------------------------------

    /// Apply one treatment-state transition; the single choke point where
    /// edges are checked, wait spans are opened and closed and the worry
    /// timer is armed.
    fn set_patient_state(&mut self, pid: PatientId, to: TreatmentState, trigger: &'static str) {
        let now = self.now();
        let from = self.patients[pid as usize].state;
        if !treatment_edge_allowed(from, to) {
            panic!(
                "contract violation: treatment transition {} -> {} (trigger `{}`) for patient {} at {}",
                from.label(),
                to.label(),
                trigger,
                pid,
                now
            );
        }
        {
            let p = &mut self.patients[pid as usize];
            // Close the open queue-wait span.
            if from.is_queue_wait() {
                if let Some(start) = p.wait_span_start.take() {
                    p.queue_wait_minutes += now.minutes() - start.minutes();
                }
            }
            if to.is_queue_wait() {
                p.wait_span_start = Some(now);
            }
            // Worry accrues while waiting for the booked visit.
            if from == TreatmentState::WaitForVisit {
                if let Some(start) = p.worry_accrual_start.take() {
                    p.worry_counter +=
                        (now.minutes() - start.minutes()) / MINUTES_PER_HOUR
                            * self.cfg.behaviour.worry_rate_per_hour;
                }
            }
            p.state = to;
        }
        self.prt[pid as usize].epoch += 1;
        if to == TreatmentState::WaitForVisit && self.hybrid {
            self.arm_worry_timer(pid);
        }
        self.log(TraceEvent::PatientState {
            t: now,
            patient: pid,
            from: Some(from),
            to,
            trigger,
        });
    }

    fn arm_worry_timer(&mut self, pid: PatientId) {
        let now = self.now();
        let p = &mut self.patients[pid as usize];
        p.worry_accrual_start = Some(now);
        let b = &self.cfg.behaviour;
        if b.worry_rate_per_hour <= 0.0 {
            return;
        }
        let remaining_hours =
            (b.worry_threshold_hours - p.worry_counter).max(0.0) / b.worry_rate_per_hour;
        let fire = now.plus_minutes(remaining_hours * MINUTES_PER_HOUR);
        let epoch = self.prt[pid as usize].epoch;
        let _ = self
            .calendar
            .schedule(fire, Ev::WorryThreshold { patient: pid, epoch });
    }

    // ------------------------------------------------------------------
    // Arrivals and triage
    // ------------------------------------------------------------------

    /// Create one patient with sampled attributes and send them to triage.
    pub fn spawn_patient(&mut self) -> PatientId {
        let pid = self.patients.len() as PatientId;
        let now = self.now();
        let a = self.cfg.attributes.clone();
        let tourist_p = self.cfg.tourist_probability;
        let rng = self.streams.stream(Purpose::Attributes, pid);
        let tourist = rng.gen::<f64>() < tourist_p;
        let disease = Specialty::ALL[rng.gen_range(0..5)];
        let age = rng.gen_range(a.age_min..=a.age_max);
        let gender = if rng.gen::<f64>() < a.p_male {
            Gender::Male
        } else {
            Gender::Female
        };
        let u: f64 = rng.gen();
        let temperament = if u < a.p_relaxed {
            Temperament::Relaxed
        } else if u < a.p_relaxed + a.p_normal {
            Temperament::Normal
        } else {
            Temperament::Anxious
        };
        let online_pref = rng.gen::<f64>() < a.p_online_pref;
        let hosp_pref = rng.gen::<f64>() < a.p_hosp_pref;

        self.patients.push(PatientAgent {
            file_number: pid,
            disease,
            patient_type: if tourist {
                PatientType::Tourist
            } else {
                PatientType::Local
            },
            online_pref,
            hosp_pref,
            age,
            gender,
            temperament,
            state: TreatmentState::NeedService,
            adherence: AdherenceLevel::Good,
            health: HealthStatus::Stable,
            medication_available: true,
            emergency_flag: false,
            leave_flag: false,
            worry_counter: 0.0,
            worry_accrual_start: None,
            arrival_time: now,
            request_time: now,
            queue_wait_minutes: 0.0,
            wait_span_start: None,
            doctor: None,
            channel: Channel::InPerson,
            visits_completed: 0,
            rechecked_this_visit: false,
        });
        self.prt.push(PatientRt::default());
        self.episodes.push(PatientEpisode {
            patient: pid,
            arrival: now,
            tourist,
            disease_section: disease.section(),
            end_state: TreatmentState::NeedService,
            end_time: None,
            physical_queue_minutes: 0.0,
            bed_waits: Vec::new(),
            emergencies: 0,
        });
        self.log(TraceEvent::PatientState {
            t: now,
            patient: pid,
            from: None,
            to: TreatmentState::NeedService,
            trigger: "arrival",
        });
        if self.hybrid {
            let day = MINUTES_PER_DAY;
            let _ = self
                .calendar
                .schedule(now.plus_minutes(day), Ev::AdherenceTick { patient: pid });
            let _ = self
                .calendar
                .schedule(now.plus_minutes(3.0 * day), Ev::ThreeDayReview { patient: pid });
            let _ = self
                .calendar
                .schedule(now.plus_minutes(5.0 * day), Ev::FiveDayReview { patient: pid });
        }
        self.request_triage(pid);
        pid
    }

    fn request_triage(&mut self, pid: PatientId) {
        let now = self.now();
        self.patients[pid as usize].request_time = now;
        if self.gp_busy < self.cfg.gp_count {
            self.gp_busy += 1;
            self.start_triage(pid);
        } else {
            self.prt[pid as usize].gp_join = Some(now);
            self.gp_queue.push_back(pid);
        }
    }

    fn start_triage(&mut self, pid: PatientId) {
        let now = self.now();
        if let Some(join) = self.prt[pid as usize].gp_join.take() {
            self.episodes[pid as usize].physical_queue_minutes +=
                now.minutes() - join.minutes();
        }
        let tri = self.cfg.gp_triage_minutes;
        let dur = tri.sample(self.streams.stream(Purpose::Triage, pid));
        let _ = self
            .calendar
            .schedule(now.plus_minutes(dur), Ev::TriageDone { patient: pid });
    }

    /// Channel and doctor selection after GP review. The channel follows the
    /// configured online shares (shifted by the patient's preference in
    /// hybrid mode); the doctor draw weighs popularity against queue length.
    pub fn choose_channel_and_doctor(&mut self, pid: PatientId) -> (Channel, usize) {
        let p = &self.patients[pid as usize];
        let share = match p.patient_type {
            PatientType::Tourist => self.cfg.tourist_online_share_pct,
            PatientType::Local => self.cfg.local_online_share_pct,
        } / 100.0;
        let mut p_online = share;
        if self.hybrid {
            p_online += if p.online_pref { 0.10 } else { -0.10 };
        }
        let p_online = p_online.clamp(0.0, 1.0);
        let online = {
            let rng = self.streams.stream(Purpose::Channel, pid);
            rng.gen::<f64>() < p_online
        };
        let channel = if online { Channel::Online } else { Channel::InPerson };

        let candidates = &self.by_specialty[self.patients[pid as usize].disease.index()];
        assert!(
            !candidates.is_empty(),
            "configuration error: no doctor for specialty"
        );
        let weights: Vec<f64> = candidates
            .iter()
            .map(|&d| self.doctors[d].popularity / (1.0 + self.doctors[d].queue_len() as f64))
            .collect();
        let total: f64 = weights.iter().sum();
        let doctor = if candidates.len() == 1 || total <= 0.0 {
            candidates[0]
        } else {
            let u: f64 = self.streams.stream(Purpose::DoctorChoice, pid).gen();
            let mut acc = 0.0;
            let mut chosen = candidates[candidates.len() - 1];
            for (i, w) in weights.iter().enumerate() {
                acc += w / total;
                if u < acc {
                    chosen = candidates[i];
                    break;
                }
            }
            chosen
        };
        (channel, doctor)
    }

    fn handle_triage_done(&mut self, pid: PatientId) {
        // Free the GP for the next patient in line.
        if let Some(next) = self.gp_queue.pop_front() {
            self.start_triage(next);
        } else {
            self.gp_busy -= 1;
        }
        if self.patients[pid as usize].state != TreatmentState::NeedService {
            return;
        }
        let (proposed, doctor) = self.choose_channel_and_doctor(pid);
        // The patient has up to an hour to disagree with the proposed visit
        // type before the booking is finalized; a disagreement flips it.
        let final_channel = if self.hybrid {
            let p = &self.patients[pid as usize];
            let mismatch = (proposed == Channel::Online) != p.online_pref;
            let prob = if mismatch {
                self.cfg.behaviour.disagree_mismatch
            } else {
                self.cfg.behaviour.disagree_match
            };
            let disagree = self.streams.stream(Purpose::Agreement, pid).gen::<f64>() < prob;
            if disagree {
                match proposed {
                    Channel::Online => Channel::InPerson,
                    Channel::InPerson => Channel::Online,
                }
            } else {
                proposed
            }
        } else {
            proposed
        };
        self.patients[pid as usize].doctor = Some(doctor);
        self.patients[pid as usize].channel = final_channel;
        self.set_patient_state(pid, TreatmentState::Confirmation, "triage_done");
        let epoch = self.prt[pid as usize].epoch;
        let _ = self.calendar.schedule(
            self.now().plus_minutes(60.0),
            Ev::ConfirmationElapsed { patient: pid, epoch },
        );
    }

    fn handle_confirmation_elapsed(&mut self, pid: PatientId) {
        let doctor = self.patients[pid as usize].doctor.expect("chosen at triage");
        let channel = self.patients[pid as usize].channel;
        self.book_appointment(pid, doctor, channel);
        self.set_patient_state(pid, TreatmentState::WaitForVisit, "booking_finalized");
        let epoch = self.prt[pid as usize].epoch;
        let t = self.prt[pid as usize].appointment.expect("just booked").1.time;
        let _ = self
            .calendar
            .schedule(t, Ev::AppointmentDue { patient: pid, epoch });
        // New referral: the doctor reviews the file during an online window.
        self.doctors[doctor].pending_reviews.push_back(pid);
        self.try_dispatch(doctor);
    }

    fn book_appointment(&mut self, pid: PatientId, doctor: usize, channel: Channel) {
        let slot_interval = self.cfg.slot_interval_minutes;
        let now = self.now();
        let free = self.doctors[doctor].find_free_slot(now, channel, slot_interval);
        let appt = self.doctors[doctor].book_slot(free, pid);
        self.prt[pid as usize].appointment = Some((doctor, appt));
    }

    fn cancel_appointment(&mut self, pid: PatientId, outcome: Option<VisitOutcome>) {
        if let Some((doctor, appt)) = self.prt[pid as usize].appointment.take() {
            self.doctors[doctor].cancel_slot(appt.slot, pid);
            if self.hybrid {
                if let Some(o) = outcome {
                    let rule = self.cfg.behaviour.popularity;
                    let d = &mut self.doctors[doctor];
                    d.popularity = update_popularity(d.popularity, o, &rule);
                }
            }
        }
    }

    // ------------------------------------------------------------------
    // Doctor duty blocks and dispatching
    // ------------------------------------------------------------------

    fn schedule_next_block(&mut self, doctor: usize, from: SimTime) {
        let mut next: Option<BlockInstance> = None;
        for act in [Activity::Clinic, Activity::Hospital, Activity::Online] {
            if let Some(inst) = self.doctors[doctor].schedule.next_block_instance(from, act) {
                let better = match next {
                    None => true,
                    Some(cur) => inst.start.minutes() < cur.start.minutes(),
                };
                if better {
                    next = Some(inst);
                }
            }
        }
        if let Some(inst) = next {
            let _ = self
                .calendar
                .schedule(inst.start, Ev::BlockStart { doctor });
        }
    }

    /// Overlap of [a, b) with the post-warm-up reporting window, minutes.
    fn reporting_overlap(&self, a: f64, b: f64) -> f64 {
        let lo = a.max(self.warmup_min);
        let hi = b.min(self.horizon.minutes());
        (hi - lo).max(0.0)
    }

    fn set_doctor_state(&mut self, doctor: usize, to: DoctorState) {
        let from = self.doctors[doctor].state;
        if from == to {
            return;
        }
        debug_assert!(
            crate::agents::doctor::doctor_edge_allowed(from, to),
            "doctor transition {} -> {}",
            from.label(),
            to.label()
        );
        self.doctors[doctor].state = to;
        let t = self.now();
        self.log(TraceEvent::DoctorState {
            t,
            doctor,
            from: from.label(),
            to: to.label(),
        });
    }

    fn handle_block_start(&mut self, doctor: usize) {
        let now = self.now();
        let inst = self.doctors[doctor]
            .schedule
            .block_at(now)
            .expect("block start event lands inside a block");
        // On-duty block time counts as scheduled even when idle.
        let sched = self.reporting_overlap(inst.start.minutes(), inst.end.minutes());
        self.doctors[doctor].scheduled_minutes += sched;
        self.drt[doctor].current_block = Some(inst);
        let _ = self.calendar.schedule(inst.end, Ev::BlockEnd { doctor });

        if inst.activity == Activity::Hospital {
            let mut queue: VecDeque<PatientId> = VecDeque::new();
            for &p in &self.doctors[doctor].inpatients {
                queue.push_back(p);
            }
            self.drt[doctor].ward_queue = queue;
        }
        if !self.drt[doctor].busy {
            let base = match inst.activity {
                Activity::Clinic => DoctorState::Clinic,
                Activity::Hospital => DoctorState::Hospital,
                Activity::Online => DoctorState::Checking,
            };
            self.set_doctor_state(doctor, base);
            self.try_dispatch(doctor);
        }
    }

    fn handle_block_end(&mut self, doctor: usize) {
        let now = self.now();
        self.drt[doctor].current_block = None;
        self.schedule_next_block(doctor, now.plus_minutes(0.001));
        if !self.drt[doctor].busy {
            self.set_doctor_state(doctor, DoctorState::Home);
        }
    }

    /// Start the next piece of work for an idle doctor, if any is due.
    fn try_dispatch(&mut self, doctor: usize) {
        if self.drt[doctor].busy {
            return;
        }
        let Some(block) = self.drt[doctor].current_block else {
            return;
        };
        let now = self.now();
        match block.activity {
            Activity::Clinic => {
                if let Some(pid) = self.drt[doctor].clinic_queue.pop_front() {
                    self.start_visit(doctor, pid, Channel::InPerson, false);
                }
            }
            Activity::Online => {
                if let Some(pid) = self.doctors[doctor].emergency_queue.pop_front() {
                    self.start_visit(doctor, pid, Channel::Online, true);
                } else if let Some(pid) = self.drt[doctor].video_queue.pop_front() {
                    self.start_visit(doctor, pid, Channel::Online, false);
                } else if now.minutes() < block.end.minutes() {
                    if let Some(pid) = self.doctors[doctor].pending_reviews.pop_front() {
                        self.start_file_review(doctor, pid);
                    }
                }
            }
            Activity::Hospital => {
                if let Some(pid) = self.drt[doctor].ward_queue.pop_front() {
                    self.start_ward_round(doctor, pid);
                }
            }
        }
    }

    fn accrue_worked(&mut self, doctor: usize, start: f64, end: f64) {
        let worked = self.reporting_overlap(start, end);
        self.doctors[doctor].worked_minutes += worked;
    }

    fn start_visit(&mut self, doctor: usize, pid: PatientId, channel: Channel, emergency: bool) {
        let now = self.now();
        let p = &self.patients[pid as usize];
        assert_eq!(
            self.doctors[doctor].specialization, p.disease,
            "contract violation: specialty mismatch in visit dispatch"
        );
        // Service receipt: physical queue span closes, worry resets.
        if let Some(join) = self.prt[pid as usize].visit_queue_join.take() {
            self.episodes[pid as usize].physical_queue_minutes +=
                now.minutes() - join.minutes();
        }
        self.patients[pid as usize].worry_counter = 0.0;
        self.patients[pid as usize].rechecked_this_visit = false;

        let phase = if self.patients[pid as usize].visits_completed == 0 {
            VisitPhase::Initial
        } else {
            VisitPhase::Revisit
        };
        let factor = if self.hybrid {
            self.cfg.behaviour.anxious_duration_factor
        } else {
            1.0
        };
        let temperament = self.patients[pid as usize].temperament;
        let spec = self.patients[pid as usize].disease;
        let dur = consultation_duration(
            self.streams.stream(Purpose::Duration, pid),
            spec,
            channel,
            phase,
            temperament,
            factor,
        );

        let (visit_state, duty_state, doc_state) = match channel {
            Channel::InPerson => (
                TreatmentState::BeingCheckup,
                DoctorState::Clinic,
                DoctorState::InPersonVisit,
            ),
            Channel::Online => (
                TreatmentState::AnsweringQuestions,
                DoctorState::Checking,
                DoctorState::OnlineVisit,
            ),
        };
        self.set_patient_state(pid, visit_state, if emergency { "emergency_visit" } else { "visit_started" });
        self.set_doctor_state(doctor, duty_state);
        self.set_doctor_state(doctor, doc_state);
        self.drt[doctor].busy = true;
        self.accrue_worked(doctor, now.minutes(), now.minutes() + dur);
        let _ = self.calendar.schedule(
            now.plus_minutes(dur),
            Ev::ServiceDone {
                doctor,
                kind: ServiceKind::Visit {
                    patient: pid,
                    channel,
                    emergency,
                    recheck: false,
                },
            },
        );
    }

    fn start_file_review(&mut self, doctor: usize, pid: PatientId) {
        let now = self.now();
        let factor = if self.hybrid {
            self.cfg.behaviour.anxious_duration_factor
        } else {
            1.0
        };
        let spec = self.doctors[doctor].specialization;
        let temperament = self.patients[pid as usize].temperament;
        let dur = consultation_duration(
            self.streams.stream(Purpose::Duration, pid),
            spec,
            Channel::Online,
            VisitPhase::FileReview,
            temperament,
            factor,
        );
        self.set_doctor_state(doctor, DoctorState::Checking);
        self.drt[doctor].busy = true;
        self.accrue_worked(doctor, now.minutes(), now.minutes() + dur);
        let _ = self.calendar.schedule(
            now.plus_minutes(dur),
            Ev::ServiceDone {
                doctor,
                kind: ServiceKind::FileReview { patient: pid },
            },
        );
    }

    fn start_ward_round(&mut self, doctor: usize, pid: PatientId) {
        let now = self.now();
        let dur = self.cfg.behaviour.ward_round_minutes_per_patient;
        self.set_doctor_state(doctor, DoctorState::Hospital);
        self.set_doctor_state(doctor, DoctorState::Service);
        self.drt[doctor].busy = true;
        self.accrue_worked(doctor, now.minutes(), now.minutes() + dur);
        let _ = self.calendar.schedule(
            now.plus_minutes(dur),
            Ev::ServiceDone {
                doctor,
                kind: ServiceKind::WardRound { patient: pid },
            },
        );
    }

    fn handle_service_done(&mut self, doctor: usize, kind: ServiceKind) {
        self.drt[doctor].busy = false;
        match kind {
            ServiceKind::Visit {
                patient,
                channel,
                emergency,
                recheck,
            } => self.finish_visit(doctor, patient, channel, emergency, recheck),
            ServiceKind::FileReview { .. } => {}
            ServiceKind::WardRound { patient } => {
                // Daily review: discharge once the sampled stay is complete.
                if self.patients[patient as usize].state == TreatmentState::Hospitalization {
                    let due = self.prt[patient as usize]
                        .stay_interval
                        .map(|(_, end)| self.now().minutes() >= end)
                        .unwrap_or(false);
                    if due {
                        self.discharge(patient, "discharged");
                    }
                }
            }
        }
        // A contested-visit re-check restarts service synchronously.
        if self.drt[doctor].busy {
            return;
        }
        // Return to the base state of whatever block is current (or go home),
        // then pick up the next piece of work.
        let base = match self.drt[doctor].current_block {
            Some(b) => match b.activity {
                Activity::Clinic => DoctorState::Clinic,
                Activity::Hospital => DoctorState::Hospital,
                Activity::Online => DoctorState::Checking,
            },
            None => DoctorState::Home,
        };
        match (self.doctors[doctor].state, base) {
            (DoctorState::InPersonVisit, _) => self.set_doctor_state(doctor, DoctorState::Clinic),
            (DoctorState::OnlineVisit, _) => self.set_doctor_state(doctor, DoctorState::Checking),
            (DoctorState::Service, _) => self.set_doctor_state(doctor, DoctorState::Hospital),
            _ => {}
        }
        if self.doctors[doctor].state != base {
            self.set_doctor_state(doctor, base);
        }
        // Off duty with an empty plate: head home. Queued work continues as
        // overtime even past the block end.
        if self.drt[doctor].current_block.is_none() {
            let rt = &self.drt[doctor];
            let leftovers = !rt.clinic_queue.is_empty()
                || !rt.video_queue.is_empty()
                || !rt.ward_queue.is_empty()
                || !self.doctors[doctor].emergency_queue.is_empty();
            if leftovers {
                // Keep serving: reconstruct a pseudo-block until drained.
                self.drain_overtime(doctor);
                return;
            }
            self.set_doctor_state(doctor, DoctorState::Home);
            return;
        }
        self.try_dispatch(doctor);
    }

    /// After the block end, anyone already queued is still seen; the time
    /// counts as worked but not scheduled.
    fn drain_overtime(&mut self, doctor: usize) {
        if self.drt[doctor].busy {
            return;
        }
        if let Some(pid) = self.drt[doctor].ward_queue.pop_front() {
            self.start_ward_round(doctor, pid);
        } else if let Some(pid) = self.doctors[doctor].emergency_queue.pop_front() {
            self.start_visit(doctor, pid, Channel::Online, true);
        } else if let Some(pid) = self.drt[doctor].video_queue.pop_front() {
            self.start_visit(doctor, pid, Channel::Online, false);
        } else if let Some(pid) = self.drt[doctor].clinic_queue.pop_front() {
            self.start_visit(doctor, pid, Channel::InPerson, false);
        } else {
            self.set_doctor_state(doctor, DoctorState::Home);
        }
    }

    // ------------------------------------------------------------------
    // Visit outcome and routing
    // ------------------------------------------------------------------

    fn finish_visit(
        &mut self,
        doctor: usize,
        pid: PatientId,
        channel: Channel,
        emergency: bool,
        recheck: bool,
    ) {
        let decision_state = match channel {
            Channel::InPerson => TreatmentState::AgreeOrDisagree,
            Channel::Online => TreatmentState::AcceptOrNot,
        };
        self.set_patient_state(pid, decision_state, "decision_communicated");

        let probs = if emergency {
            self.cfg.behaviour.emergency_outcome
        } else {
            self.cfg.behaviour.visit_outcome
        };
        let u: f64 = self.streams.stream(Purpose::Outcome, pid).gen();
        #[derive(PartialEq, Clone, Copy)]
        enum Rec {
            Discharge,
            Home,
            Hospitalize,
        }
        let recommendation = if u < probs.discharge {
            Rec::Discharge
        } else if u < probs.discharge + probs.home_treatment {
            Rec::Home
        } else {
            Rec::Hospitalize
        };

        // A contested recommendation triggers exactly one re-check pass of
        // the same service-time distribution.
        if self.hybrid && !recheck && !self.patients[pid as usize].rechecked_this_visit {
            let p = &self.patients[pid as usize];
            let mismatch = (recommendation == Rec::Hospitalize) != p.hosp_pref;
            let prob = if mismatch {
                self.cfg.behaviour.disagree_mismatch
            } else {
                self.cfg.behaviour.disagree_match
            };
            let contested = self.streams.stream(Purpose::Agreement, pid).gen::<f64>() < prob;
            if contested {
                let rule = self.cfg.behaviour.popularity;
                let d = &mut self.doctors[doctor];
                d.popularity = update_popularity(d.popularity, VisitOutcome::Contested, &rule);
                self.patients[pid as usize].rechecked_this_visit = true;
                let back = match channel {
                    Channel::InPerson => TreatmentState::BeingCheckup,
                    Channel::Online => TreatmentState::AnsweringQuestions,
                };
                self.set_patient_state(pid, back, "recommendation_contested");
                let now = self.now();
                let phase = if self.patients[pid as usize].visits_completed == 0 {
                    VisitPhase::Initial
                } else {
                    VisitPhase::Revisit
                };
                let spec = self.patients[pid as usize].disease;
                let temperament = self.patients[pid as usize].temperament;
                let dur = consultation_duration(
                    self.streams.stream(Purpose::Duration, pid),
                    spec,
                    channel,
                    phase,
                    temperament,
                    self.cfg.behaviour.anxious_duration_factor,
                );
                self.drt[doctor].busy = true;
                let (duty_state, doc_state) = match channel {
                    Channel::InPerson => (DoctorState::Clinic, DoctorState::InPersonVisit),
                    Channel::Online => (DoctorState::Checking, DoctorState::OnlineVisit),
                };
                self.set_doctor_state(doctor, duty_state);
                self.set_doctor_state(doctor, doc_state);
                self.accrue_worked(doctor, now.minutes(), now.minutes() + dur);
                let _ = self.calendar.schedule(
                    now.plus_minutes(dur),
                    Ev::ServiceDone {
                        doctor,
                        kind: ServiceKind::Visit {
                            patient: pid,
                            channel,
                            emergency,
                            recheck: true,
                        },
                    },
                );
                return;
            }
        }

        if self.hybrid && !recheck {
            let rule = self.cfg.behaviour.popularity;
            let d = &mut self.doctors[doctor];
            d.popularity = update_popularity(d.popularity, VisitOutcome::Completed, &rule);
        }
        self.patients[pid as usize].visits_completed += 1;
        if emergency {
            // Unscheduled treatment settles the episode: condition stabilized.
            self.patients[pid as usize].health = HealthStatus::Stable;
            self.patients[pid as usize].emergency_flag = false;
        }

        match recommendation {
            Rec::Discharge => {
                self.finish_episode(pid, TreatmentState::Recovered, "discharged_after_visit");
            }
            Rec::Home => {
                self.set_patient_state(pid, TreatmentState::HomeTreatment, "home_treatment");
                let days = self
                    .cfg
                    .behaviour
                    .home_course_days
                    .sample(self.streams.stream(Purpose::HomeCourse, pid));
                let epoch = self.prt[pid as usize].epoch;
                let _ = self.calendar.schedule(
                    self.now().plus_days(days),
                    Ev::HomeCourseEnd { patient: pid, epoch },
                );
            }
            Rec::Hospitalize => {
                self.patients[pid as usize].channel = channel;
                self.enqueue_for_bed(pid);
            }
        }
    }

    // ------------------------------------------------------------------
    // Beds
    // ------------------------------------------------------------------

    fn scheduling_for(&self, channel: Channel) -> &dyn AdmissionScheduling {
        match channel {
            Channel::Online => self.online_scheduling.as_ref(),
            Channel::InPerson => self.in_person_scheduling.as_ref(),
        }
    }

    /// Route an accepted hospitalization: join the physical bed queue or
    /// book a projected free-bed date, per the pathway's policy.
    fn enqueue_for_bed(&mut self, pid: PatientId) {
        let now = self.now();
        let sec_idx = self.patients[pid as usize].disease.index();
        let stay_days = self.cfg.length_of_stay_days[sec_idx]
            .sample(self.streams.stream(Purpose::LengthOfStay, pid));
        let stay_min = stay_days * MINUTES_PER_DAY;
        self.prt[pid as usize].pending_stay_min = stay_min;

        let span_idx = self.episodes[pid as usize].bed_waits.len();
        self.episodes[pid as usize].bed_waits.push(BedWaitSpan {
            section: sec_idx + 1,
            request: now,
            outcome: BedWaitOutcome::Pending,
        });
        self.prt[pid as usize].open_bed_span = Some(span_idx);

        let channel = self.patients[pid as usize].channel;
        let route = self.scheduling_for(channel).route(&self.sections[sec_idx], now, stay_min);
        match route {
            AdmissionRoute::JoinQueue => self.join_bed_queue(pid, sec_idx, now),
            AdmissionRoute::BookSlot(slot) => {
                self.set_patient_state(pid, TreatmentState::WaitInHome, "admission_booked");
                self.sections[sec_idx].bed_schedule.push(
                    crate::agents::section::BedBooking {
                        patient: pid,
                        request_time: now,
                        start: slot,
                        projected_end: slot.plus_minutes(stay_min),
                    },
                );
                self.log(TraceEvent::BedBooked {
                    t: now,
                    patient: pid,
                    section: sec_idx + 1,
                    slot_t: slot,
                });
                let epoch = self.prt[pid as usize].epoch;
                let _ = self
                    .calendar
                    .schedule(slot, Ev::BedSlotDue { patient: pid, epoch });
            }
        }
    }

    fn join_bed_queue(&mut self, pid: PatientId, sec_idx: usize, request_time: SimTime) {
        let now = self.now();
        if self.patients[pid as usize].state != TreatmentState::WaitForEmptyBed {
            self.set_patient_state(pid, TreatmentState::WaitForEmptyBed, "bed_requested");
        }
        let tourist = self.patients[pid as usize].patient_type == PatientType::Tourist;
        self.sections[sec_idx].waiting.push(WaitingPatient {
            patient: pid,
            request_time,
            tourist,
        });
        let queue_len = self.sections[sec_idx].waiting.len();
        self.log(TraceEvent::BedRequest {
            t: now,
            patient: pid,
            section: sec_idx + 1,
            tourist,
            queue_len,
        });
        self.seat_waiting(sec_idx);
        self.maybe_rebalance(sec_idx);
    }

    fn maybe_rebalance(&mut self, sec_idx: usize) {
        if !self.hybrid {
            return;
        }
        let threshold = self.cfg.behaviour.shortage_threshold;
        if let Some(t) = capacity_rebalance(sec_idx, &mut self.sections, threshold) {
            let now = self.now();
            self.log(TraceEvent::Transfer {
                t: now,
                lender: t.lender + 1,
                requester: t.requester + 1,
                beds: t.beds,
            });
            self.seat_waiting(sec_idx);
        }
    }

    /// Seat waiting patients per the configured discipline while beds last.
    fn seat_waiting(&mut self, sec_idx: usize) {
        loop {
            if self.sections[sec_idx].free_beds() == 0 {
                break;
            }
            let Some(pos) = self.discipline.next_to_seat(&self.sections[sec_idx].waiting) else {
                break;
            };
            let entry = self.sections[sec_idx].waiting.remove(pos);
            self.admit(entry.patient, sec_idx, entry.request_time);
        }
        self.check_transfer_return(sec_idx);
    }

    fn check_transfer_return(&mut self, sec_idx: usize) {
        if let Some(t) = try_return_borrowed_beds(sec_idx, &mut self.sections) {
            let now = self.now();
            self.log(TraceEvent::TransferReturn {
                t: now,
                lender: t.lender + 1,
                requester: t.requester + 1,
                beds: t.beds,
            });
        }
    }

    fn admit(&mut self, pid: PatientId, sec_idx: usize, request_time: SimTime) {
        let now = self.now();
        self.set_patient_state(pid, TreatmentState::Hospitalization, "admitted");
        let stay = self.prt[pid as usize].pending_stay_min;
        let interval = (now.minutes(), now.minutes() + stay);
        self.prt[pid as usize].stay_interval = Some(interval);
        let section = &mut self.sections[sec_idx];
        section.occupied += 1;
        section.occupancy_projection.push(interval);
        debug_assert!(section.occupied <= section.total_beds, "bed overcommit");
        if let Some(span) = self.prt[pid as usize].open_bed_span.take() {
            self.episodes[pid as usize].bed_waits[span].outcome = BedWaitOutcome::Admitted(now);
        }
        let doctor = self.patients[pid as usize].doctor.expect("admitted via a doctor");
        self.doctors[doctor].inpatients.push(pid);
        self.patients[pid as usize].emergency_flag = false;
        self.patients[pid as usize].worry_counter = 0.0;
        let queue_len = self.sections[sec_idx].waiting.len();
        let tourist = self.patients[pid as usize].patient_type == PatientType::Tourist;
        self.log(TraceEvent::BedAdmit {
            t: now,
            patient: pid,
            section: sec_idx + 1,
            request_t: request_time,
            tourist,
            queue_len,
        });
    }

    fn release_bed(&mut self, pid: PatientId, reason: &'static str) {
        let now = self.now();
        let sec_idx = self.patients[pid as usize].disease.index();
        let section = &mut self.sections[sec_idx];
        section.occupied -= 1;
        if let Some(interval) = self.prt[pid as usize].stay_interval.take() {
            if let Some(pos) = section
                .occupancy_projection
                .iter()
                .position(|&iv| iv == interval)
            {
                section.occupancy_projection.remove(pos);
            }
        }
        let doctor = self.patients[pid as usize].doctor.expect("inpatient has a doctor");
        if let Some(pos) = self.doctors[doctor].inpatients.iter().position(|&p| p == pid) {
            self.doctors[doctor].inpatients.remove(pos);
        }
        self.log(TraceEvent::BedRelease {
            t: now,
            patient: pid,
            section: sec_idx + 1,
            reason,
        });
        self.seat_waiting(sec_idx);
    }

    fn discharge(&mut self, pid: PatientId, reason: &'static str) {
        self.release_bed(pid, reason);
        self.finish_episode(pid, TreatmentState::Recovered, reason);
    }

    fn handle_bed_slot_due(&mut self, pid: PatientId) {
        let sec_idx = self.patients[pid as usize].disease.index();
        // Drop the booking; the patient now shows up physically.
        if let Some(pos) = self.sections[sec_idx]
            .bed_schedule
            .iter()
            .position(|b| b.patient == pid)
        {
            let booking = self.sections[sec_idx].bed_schedule.remove(pos);
            self.join_bed_queue(pid, sec_idx, booking.request_time);
        }
    }

    // ------------------------------------------------------------------
    // Recurring behavioural events
    // ------------------------------------------------------------------

    fn handle_adherence_tick(&mut self, pid: PatientId) {
        if self.patients[pid as usize].state.is_terminal() {
            return;
        }
        if self.patients[pid as usize].state.adherence_evolves() {
            let params = self.cfg.adherence.clone();
            let rng = self.streams.stream(Purpose::Adherence, pid);
            drug_behavior_step(rng, &mut self.patients[pid as usize], &params);
        }
        let _ = self.calendar.schedule(
            self.now().plus_days(1.0),
            Ev::AdherenceTick { patient: pid },
        );
    }

    /// Three-day review: emergency escalation, the early-dropout-from-
    /// hospital check, and doctor switching.
    fn handle_three_day_review(&mut self, pid: PatientId) {
        let state = self.patients[pid as usize].state;
        if state.is_terminal() {
            return;
        }
        if state == TreatmentState::Hospitalization && self.patients[pid as usize].leave_flag {
            // Dissatisfied inpatient leaves against advice.
            self.release_bed(pid, "self_discharge");
            self.finish_episode(pid, TreatmentState::DroppedOut, "self_discharge");
            return;
        }
        if self.patients[pid as usize].emergency_flag
            && matches!(
                state,
                TreatmentState::HomeTreatment
                    | TreatmentState::WaitForVisit
                    | TreatmentState::WaitInHome
            )
        {
            self.escalate_emergency(pid);
        } else if state == TreatmentState::WaitForVisit {
            self.consider_doctor_change(pid);
        }
        let _ = self.calendar.schedule(
            self.now().plus_days(3.0),
            Ev::ThreeDayReview { patient: pid },
        );
    }

    fn escalate_emergency(&mut self, pid: PatientId) {
        let now = self.now();
        let state = self.patients[pid as usize].state;
        let before_appointment = matches!(
            state,
            TreatmentState::WaitForVisit | TreatmentState::WaitInHome
        );
        match state {
            TreatmentState::WaitForVisit => {
                self.cancel_appointment(pid, Some(VisitOutcome::Abandoned));
            }
            TreatmentState::WaitInHome => {
                let sec_idx = self.patients[pid as usize].disease.index();
                if let Some(pos) = self.sections[sec_idx]
                    .bed_schedule
                    .iter()
                    .position(|b| b.patient == pid)
                {
                    self.sections[sec_idx].bed_schedule.remove(pos);
                }
                if let Some(span) = self.prt[pid as usize].open_bed_span.take() {
                    self.episodes[pid as usize].bed_waits[span].outcome =
                        BedWaitOutcome::Left(now);
                }
            }
            _ => {}
        }
        self.set_patient_state(pid, TreatmentState::Emergency, "adherence_escalation");
        self.episodes[pid as usize].emergencies += 1;
        self.log(TraceEvent::Emergency {
            t: now,
            patient: pid,
            before_appointment,
        });
        // The hospital owes this patient an unscheduled online visit, served
        // ahead of regular bookings.
        let doctor = self.patients[pid as usize].doctor.expect("seen a doctor before");
        self.doctors[doctor].emergency_queue.push_back(pid);
        self.try_dispatch(doctor);
    }

    fn consider_doctor_change(&mut self, pid: PatientId) {
        let current = self.patients[pid as usize].doctor.expect("booked");
        let spec_idx = self.patients[pid as usize].disease.index();
        let candidates = &self.by_specialty[spec_idx];
        if candidates.len() < 2 {
            return;
        }
        let least_loaded = *candidates
            .iter()
            .min_by_key(|&&d| (self.doctors[d].queue_len(), d))
            .expect("non-empty");
        if least_loaded == current {
            return;
        }
        let gap = self.doctors[least_loaded].popularity - self.doctors[current].popularity;
        if gap <= 0.0 {
            return;
        }
        let prob = (gap * self.cfg.behaviour.doctor_change_coeff).min(1.0);
        let switch = self.streams.stream(Purpose::DoctorChange, pid).gen::<f64>() < prob;
        if !switch {
            return;
        }
        let channel = self.patients[pid as usize].channel;
        self.cancel_appointment(pid, Some(VisitOutcome::Abandoned));
        self.patients[pid as usize].doctor = Some(least_loaded);
        self.book_appointment(pid, least_loaded, channel);
        self.set_patient_state(pid, TreatmentState::WaitForVisit, "doctor_changed");
        let epoch = self.prt[pid as usize].epoch;
        let t = self.prt[pid as usize].appointment.expect("just booked").1.time;
        let _ = self
            .calendar
            .schedule(t, Ev::AppointmentDue { patient: pid, epoch });
    }

    /// Five-day review: excessive cumulative queue wait first flips the
    /// leave flag; the next review executes the exit.
    fn handle_five_day_review(&mut self, pid: PatientId) {
        let state = self.patients[pid as usize].state;
        if state.is_terminal() {
            return;
        }
        let leave_eligible = matches!(
            state,
            TreatmentState::WaitForVisit
                | TreatmentState::WaitForEmptyBed
                | TreatmentState::WaitInHome
        );
        if self.patients[pid as usize].leave_flag && leave_eligible {
            self.abandon_and_exit(pid, "dissatisfaction_exit");
            return;
        }
        let waited_days =
            self.patients[pid as usize].queue_wait_through(self.now()) / MINUTES_PER_DAY;
        if waited_days > self.cfg.behaviour.leave_threshold_days {
            self.patients[pid as usize].leave_flag = true;
        }
        let _ = self.calendar.schedule(
            self.now().plus_days(5.0),
            Ev::FiveDayReview { patient: pid },
        );
    }

    /// Leave the system on dissatisfaction grounds from a waiting state.
    fn abandon_and_exit(&mut self, pid: PatientId, trigger: &'static str) {
        let now = self.now();
        let state = self.patients[pid as usize].state;
        match state {
            TreatmentState::WaitForVisit => {
                self.cancel_appointment(pid, Some(VisitOutcome::Abandoned));
            }
            TreatmentState::WaitForEmptyBed => {
                let sec_idx = self.patients[pid as usize].disease.index();
                if let Some(pos) = self.sections[sec_idx]
                    .waiting
                    .iter()
                    .position(|w| w.patient == pid)
                {
                    self.sections[sec_idx].waiting.remove(pos);
                    let queue_len = self.sections[sec_idx].waiting.len();
                    self.log(TraceEvent::QueueAbandon {
                        t: now,
                        patient: pid,
                        section: sec_idx + 1,
                        queue_len,
                    });
                    self.check_transfer_return(sec_idx);
                }
                if let Some(span) = self.prt[pid as usize].open_bed_span.take() {
                    self.episodes[pid as usize].bed_waits[span].outcome =
                        BedWaitOutcome::Left(now);
                }
            }
            TreatmentState::WaitInHome => {
                let sec_idx = self.patients[pid as usize].disease.index();
                if let Some(pos) = self.sections[sec_idx]
                    .bed_schedule
                    .iter()
                    .position(|b| b.patient == pid)
                {
                    self.sections[sec_idx].bed_schedule.remove(pos);
                }
                if let Some(span) = self.prt[pid as usize].open_bed_span.take() {
                    self.episodes[pid as usize].bed_waits[span].outcome =
                        BedWaitOutcome::Left(now);
                }
            }
            _ => {}
        }
        self.finish_episode(pid, TreatmentState::DroppedOut, trigger);
    }

    fn handle_worry_threshold(&mut self, pid: PatientId) {
        // Epoch already validated; still waiting for the booked visit.
        if self.patients[pid as usize].state != TreatmentState::WaitForVisit {
            return;
        }
        self.cancel_appointment(pid, Some(VisitOutcome::Abandoned));
        self.patients[pid as usize].worry_counter = 0.0;
        self.patients[pid as usize].worry_accrual_start = None;
        self.set_patient_state(pid, TreatmentState::NeedService, "worry_threshold");
        self.request_triage(pid);
    }

    fn handle_home_course_end(&mut self, pid: PatientId) {
        if self.patients[pid as usize].state != TreatmentState::HomeTreatment {
            return;
        }
        let recovered = self.streams.stream(Purpose::HomeCourse, pid).gen::<f64>()
            < self.cfg.behaviour.home_recovery_prob;
        if recovered {
            self.finish_episode(pid, TreatmentState::Recovered, "home_course_completed");
        } else {
            self.set_patient_state(pid, TreatmentState::NeedService, "renewed_request");
            self.request_triage(pid);
        }
    }

    fn finish_episode(&mut self, pid: PatientId, terminal: TreatmentState, trigger: &'static str) {
        self.set_patient_state(pid, terminal, trigger);
        let now = self.now();
        self.episodes[pid as usize].end_state = terminal;
        self.episodes[pid as usize].end_time = Some(now);
    }

    // ------------------------------------------------------------------
    // Event dispatch and teardown
    // ------------------------------------------------------------------

    fn handle(&mut self, ev: Ev) {
        match ev {
            Ev::Arrival => {
                self.spawn_patient();
                let rate = self.cfg.arrival_rate_per_day;
                let gap = {
                    let rng = self.streams.stream(Purpose::Arrival, 0);
                    sample_interarrival(rng, rate).expect("positive rate")
                };
                let _ = self
                    .calendar
                    .schedule(self.now().plus_minutes(gap), Ev::Arrival);
            }
            Ev::TriageDone { patient } => self.handle_triage_done(patient),
            Ev::ConfirmationElapsed { patient, epoch } => {
                if self.prt[patient as usize].epoch == epoch {
                    self.handle_confirmation_elapsed(patient);
                }
            }
            Ev::AppointmentDue { patient, epoch } => {
                if self.prt[patient as usize].epoch == epoch {
                    self.handle_appointment_due(patient);
                }
            }
            Ev::BlockStart { doctor } => self.handle_block_start(doctor),
            Ev::BlockEnd { doctor } => self.handle_block_end(doctor),
            Ev::ServiceDone { doctor, kind } => self.handle_service_done(doctor, kind),
            Ev::AdherenceTick { patient } => self.handle_adherence_tick(patient),
            Ev::ThreeDayReview { patient } => self.handle_three_day_review(patient),
            Ev::FiveDayReview { patient } => self.handle_five_day_review(patient),
            Ev::WorryThreshold { patient, epoch } => {
                if self.prt[patient as usize].epoch == epoch {
                    self.handle_worry_threshold(patient);
                }
            }
            Ev::HomeCourseEnd { patient, epoch } => {
                if self.prt[patient as usize].epoch == epoch {
                    self.handle_home_course_end(patient);
                }
            }
            Ev::BedSlotDue { patient, epoch } => {
                if self.prt[patient as usize].epoch == epoch {
                    self.handle_bed_slot_due(patient);
                }
            }
        }
    }

    fn handle_appointment_due(&mut self, pid: PatientId) {
        if self.patients[pid as usize].state != TreatmentState::WaitForVisit {
            return;
        }
        let (doctor, appt) = self.prt[pid as usize].appointment.expect("booked");
        let now = self.now();
        self.prt[pid as usize].visit_queue_join = Some(now);
        match appt.channel {
            Channel::InPerson => {
                self.set_patient_state(pid, TreatmentState::WaitInClinicQueue, "appointment_due");
                self.drt[doctor].clinic_queue.push_back(pid);
            }
            Channel::Online => {
                self.set_patient_state(pid, TreatmentState::WaitInVideoQueue, "appointment_due");
                self.drt[doctor].video_queue.push_back(pid);
            }
        }
        // Slot consumed.
        self.doctors[doctor].cancel_slot(appt.slot, pid);
        self.prt[pid as usize].appointment = None;
        self.try_dispatch(doctor);
    }

    fn finalize(mut self) -> ReplicationTrace {
        let horizon = self.horizon;
        // Close open physical-queue spans at the horizon.
        for pid in 0..self.patients.len() {
            let ep = &mut self.episodes[pid];
            if let Some(join) = self.prt[pid].gp_join.take() {
                ep.physical_queue_minutes += horizon.minutes() - join.minutes();
            }
            if let Some(join) = self.prt[pid].visit_queue_join.take() {
                ep.physical_queue_minutes += horizon.minutes() - join.minutes();
            }
            if !self.patients[pid].state.is_terminal() {
                ep.end_state = self.patients[pid].state;
                ep.end_time = None;
            }
        }
        let doctors = self
            .doctors
            .iter()
            .map(|d| DoctorRecord {
                doctor: d.id,
                section: d.specialization.section(),
                worked_minutes: d.worked_minutes,
                scheduled_minutes: d.scheduled_minutes,
            })
            .collect();
        ReplicationTrace {
            meta: TraceMeta {
                run_id: self.run_id,
                replication: self.replication,
                master_seed: self.cfg.master_seed,
                mode: self.cfg.mode,
                horizon_days: self.cfg.horizon_days,
                warmup_days: self.cfg.warmup_days,
            },
            events: std::mem::take(&mut self.events),
            episodes: std::mem::take(&mut self.episodes),
            doctors,
        }
    }

    // Test access --------------------------------------------------------

    #[cfg(test)]
    pub(crate) fn patients(&self) -> &[PatientAgent] {
        &self.patients
    }

    #[cfg(test)]
    pub(crate) fn doctors(&self) -> &[DoctorAgent] {
        &self.doctors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    fn quiet_config() -> ScenarioConfig {
        // Effectively no arrivals; tests drive patients by hand.
        ScenarioConfig {
            arrival_rate_per_day: 1e-9,
            horizon_days: 30.0,
            warmup_days: 0.0,
            ..ScenarioConfig::default()
        }
    }

    /// Manually push a spawned patient into a given state for unit tests.
    fn force_state(w: &mut World, pid: PatientId, to: TreatmentState) {
        w.patients[pid as usize].state = to;
        w.prt[pid as usize].epoch += 1;
    }

    #[test]
    fn confirmation_without_disagreement_books_and_waits() {
        let mut cfg = quiet_config();
        cfg.behaviour.disagree_mismatch = 0.0;
        cfg.behaviour.disagree_match = 0.0;
        let mut w = World::new(cfg, 0, 0);
        let pid = w.spawn_patient();
        // Drive events until the patient is past confirmation.
        while w.patients[pid as usize].state != TreatmentState::WaitForVisit {
            let (_, ev) = w.calendar.pop().expect("events pending");
            w.handle(ev);
        }
        // Booking took exactly the triage service plus the one-hour window.
        assert!(w.prt[pid as usize].appointment.is_some());
        assert!(w.now().minutes() >= 60.0);
    }

    #[test]
    fn five_day_review_sets_leave_flag_then_exits_as_dropout() {
        let cfg = quiet_config();
        let mut w = World::new(cfg, 0, 0);
        let pid = w.spawn_patient();
        force_state(&mut w, pid, TreatmentState::WaitForEmptyBed);
        // Waited 8 days already, beyond the 7-day threshold.
        w.patients[pid as usize].queue_wait_minutes = 8.0 * MINUTES_PER_DAY;
        let sec = w.patients[pid as usize].disease.index();
        w.sections[sec].waiting.push(WaitingPatient {
            patient: pid,
            request_time: SimTime::ZERO,
            tourist: false,
        });
        w.sections[sec].occupied = w.sections[sec].total_beds;

        w.handle_five_day_review(pid);
        assert!(w.patients[pid as usize].leave_flag);
        assert_eq!(w.patients[pid as usize].state, TreatmentState::WaitForEmptyBed);

        w.handle_five_day_review(pid);
        assert_eq!(w.patients[pid as usize].state, TreatmentState::DroppedOut);
        assert!(w.sections[sec].waiting.is_empty());
    }

    #[test]
    fn emergency_flag_in_home_state_requests_unscheduled_visit() {
        let cfg = quiet_config();
        let mut w = World::new(cfg, 0, 0);
        let pid = w.spawn_patient();
        w.patients[pid as usize].doctor = Some(0);
        force_state(&mut w, pid, TreatmentState::HomeTreatment);
        w.patients[pid as usize].emergency_flag = true;
        let doctor = 0;
        assert!(w.doctors[doctor].emergency_queue.is_empty());

        w.handle_three_day_review(pid);
        assert_eq!(w.patients[pid as usize].state, TreatmentState::Emergency);
        assert_eq!(w.doctors[doctor].emergency_queue.front(), Some(&pid));
        assert_eq!(w.episodes[pid as usize].emergencies, 1);
    }

    #[test]
    fn self_discharge_check_exits_flagged_inpatient() {
        let cfg = quiet_config();
        let mut w = World::new(cfg, 0, 0);
        let pid = w.spawn_patient();
        w.patients[pid as usize].doctor = Some(0);
        force_state(&mut w, pid, TreatmentState::Hospitalization);
        let sec = w.patients[pid as usize].disease.index();
        w.sections[sec].occupied = 1;
        w.prt[pid as usize].stay_interval = Some((0.0, 10.0 * MINUTES_PER_DAY));
        w.sections[sec].occupancy_projection.push((0.0, 10.0 * MINUTES_PER_DAY));
        w.doctors[0].inpatients.push(pid);
        w.patients[pid as usize].leave_flag = true;

        w.handle_three_day_review(pid);
        assert_eq!(w.patients[pid as usize].state, TreatmentState::DroppedOut);
        assert_eq!(w.sections[sec].occupied, 0);
        assert!(w.doctors[0].inpatients.is_empty());
    }

    #[test]
    fn contract_violation_panics_with_diagnostic() {
        let cfg = quiet_config();
        let mut w = World::new(cfg, 0, 0);
        let pid = w.spawn_patient();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            w.set_patient_state(pid, TreatmentState::Hospitalization, "bogus");
        }));
        let err = result.unwrap_err();
        let msg = err.downcast_ref::<String>().expect("panic payload");
        assert!(msg.contains("contract violation"));
        assert!(msg.contains("need_service"));
    }

    #[test]
    fn anxious_patient_takes_exactly_the_factor_longer() {
        // Same stream key, same draw: only the temperament differs.
        let mut a = RngStreams::new(5, 0, 0).fresh(Purpose::Duration, 3);
        let mut b = RngStreams::new(5, 0, 0).fresh(Purpose::Duration, 3);
        let normal = consultation_duration(
            &mut a,
            Specialty::Cardiology,
            Channel::Online,
            VisitPhase::Initial,
            Temperament::Normal,
            1.25,
        );
        let anxious = consultation_duration(
            &mut b,
            Specialty::Cardiology,
            Channel::Online,
            VisitPhase::Initial,
            Temperament::Anxious,
            1.25,
        );
        assert!((anxious - normal * 1.25).abs() < 1e-12);
        assert!((10.0..=15.0).contains(&normal));
    }

    #[test]
    fn consultation_durations_stay_in_table_ranges() {
        let mut rng = RngStreams::new(8, 0, 0).fresh(Purpose::Duration, 0);
        for _ in 0..2000 {
            let d = consultation_duration(
                &mut rng,
                Specialty::Cardiology,
                Channel::Online,
                VisitPhase::Initial,
                Temperament::Normal,
                1.25,
            );
            assert!((10.0..=15.0).contains(&d));
            let d = consultation_duration(
                &mut rng,
                Specialty::BreastOncology,
                Channel::InPerson,
                VisitPhase::Initial,
                Temperament::Normal,
                1.25,
            );
            assert!((20.0..=25.0).contains(&d));
        }
    }

    #[test]
    fn tourist_share_converges_to_one_in_eleven() {
        let mut w = World::new(quiet_config(), 0, 0);
        let n = 100_000;
        let mut tourists = 0u32;
        for _ in 0..n {
            let pid = w.spawn_patient();
            if w.patients[pid as usize].patient_type == PatientType::Tourist {
                tourists += 1;
            }
        }
        let frac = tourists as f64 / n as f64;
        assert!(
            (frac - 1.0 / 11.0).abs() < 0.005,
            "tourist fraction {frac} vs {}",
            1.0 / 11.0
        );
    }

    #[test]
    fn disease_mix_is_uniform() {
        let mut w = World::new(quiet_config(), 0, 0);
        let n = 100_000;
        let mut counts = [0u32; 5];
        for _ in 0..n {
            let pid = w.spawn_patient();
            counts[w.patients[pid as usize].disease.index()] += 1;
        }
        for c in counts {
            let frac = c as f64 / n as f64;
            assert!((frac - 0.2).abs() < 0.01, "disease share {frac}");
        }
    }

    #[test]
    fn spawn_is_deterministic_per_seed() {
        let mut w1 = World::new(quiet_config(), 0, 0);
        let mut w2 = World::new(quiet_config(), 0, 0);
        for _ in 0..500 {
            let a = w1.spawn_patient();
            let b = w2.spawn_patient();
            let (pa, pb) = (&w1.patients[a as usize], &w2.patients[b as usize]);
            assert_eq!(pa.age, pb.age);
            assert_eq!(pa.temperament, pb.temperament);
            assert_eq!(pa.patient_type, pb.patient_type);
            assert_eq!(pa.disease, pb.disease);
        }
    }

    #[test]
    fn tourist_online_share_follows_configured_percentage() {
        let mut cfg = quiet_config();
        cfg.tourist_online_share_pct = 60.0;
        // Neutral preference population: half prefer online, half do not,
        // so the +/-10 point shifts cancel in expectation.
        let mut w = World::new(cfg, 0, 0);
        let n = 100_000;
        let mut online = 0u32;
        let mut tourists = 0u32;
        for _ in 0..n {
            let pid = w.spawn_patient();
            if w.patients[pid as usize].patient_type != PatientType::Tourist {
                continue;
            }
            tourists += 1;
            let (ch, _) = w.choose_channel_and_doctor(pid);
            if ch == Channel::Online {
                online += 1;
            }
        }
        let share = online as f64 / tourists as f64;
        assert!((share - 0.60).abs() < 0.01, "online share {share}");
    }

    #[test]
    fn single_doctor_specialty_always_chosen() {
        let mut w = World::new(quiet_config(), 0, 0);
        for _ in 0..2000 {
            let pid = w.spawn_patient();
            if w.patients[pid as usize].disease == Specialty::Cardiology {
                let (_, d) = w.choose_channel_and_doctor(pid);
                assert_eq!(w.doctors[d].specialization, Specialty::Cardiology);
                assert_eq!(w.by_specialty[0], vec![d]);
            }
        }
    }

    #[test]
    fn doctor_choice_odds_follow_queue_weights() {
        // Two paediatricians, equal popularity, queues 0 and 9: 10:1 odds.
        let mut cfg = quiet_config();
        cfg.specialists = [1, 1, 1, 2, 1];
        let mut w = World::new(cfg, 0, 0);
        let paeds = w.by_specialty[3].clone();
        assert_eq!(paeds.len(), 2);
        for _ in 0..9 {
            w.doctors[paeds[1]].register_booking(999_999, Channel::Online);
        }
        let mut picks = [0u32; 2];
        let mut tried = 0u32;
        for _ in 0..600_000 {
            let pid = w.spawn_patient();
            if w.patients[pid as usize].disease != Specialty::Paediatrics {
                continue;
            }
            tried += 1;
            let (_, d) = w.choose_channel_and_doctor(pid);
            if d == paeds[0] {
                picks[0] += 1;
            } else {
                picks[1] += 1;
            }
            if tried >= 100_000 {
                break;
            }
        }
        let share = picks[0] as f64 / tried as f64;
        // Weight 1 vs 1/10: idle doctor expected 10/11 of choices.
        assert!(
            (share - 10.0 / 11.0).abs() < 0.02,
            "idle-doctor share {share}"
        );
    }
}
