//! Doctor agent: duty states, appointment book, time accounting and the
//! popularity score that feeds patient choice.

use std::collections::{BTreeMap, VecDeque};

use crate::agents::patient::PatientId;
use crate::schedule::{Activity, WeeklySchedule};
use crate::specialty::{Channel, Specialty};
use crate::time::SimTime;

pub const POPULARITY_INITIAL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DoctorState {
    Home,
    Checking,
    Clinic,
    Hospital,
    InPersonVisit,
    OnlineVisit,
    Service,
}

impl DoctorState {
    pub fn label(self) -> &'static str {
        match self {
            DoctorState::Home => "home",
            DoctorState::Checking => "checking",
            DoctorState::Clinic => "clinic",
            DoctorState::Hospital => "hospital",
            DoctorState::InPersonVisit => "in_person_visit",
            DoctorState::OnlineVisit => "online_visit",
            DoctorState::Service => "service",
        }
    }
}

/// Edge check for the doctor state-chart, shared with the trace validator.
/// Duty states (home, clinic, hospital, checking) interconnect freely; each
/// service state is entered from and returns to its duty state.
pub fn doctor_edge_allowed(from: DoctorState, to: DoctorState) -> bool {
    use DoctorState::*;
    let duty = |s: DoctorState| matches!(s, Home | Clinic | Hospital | Checking);
    match (from, to) {
        (a, b) if duty(a) && duty(b) && a != b => true,
        (Clinic, InPersonVisit) | (InPersonVisit, Clinic) => true,
        (Checking, OnlineVisit) | (OnlineVisit, Checking) => true,
        (Hospital, Service) | (Service, Hospital) => true,
        _ => false,
    }
}

/// Outcome of a finished interaction, for the popularity update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitOutcome {
    Completed,
    Contested,
    Abandoned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityRule {
    pub completed_factor: f64,
    pub contested_factor: f64,
    pub abandoned_factor: f64,
    pub clamp_min: f64,
    pub clamp_max: f64,
}

impl Default for PopularityRule {
    fn default() -> Self {
        PopularityRule {
            completed_factor: 1.02,
            contested_factor: 0.99,
            abandoned_factor: 0.95,
            clamp_min: 0.1,
            clamp_max: 10.0,
        }
    }
}

/// Multiplicative popularity update, clamped to the configured band.
pub fn update_popularity(popularity: f64, outcome: VisitOutcome, rule: &PopularityRule) -> f64 {
    let factor = match outcome {
        VisitOutcome::Completed => rule.completed_factor,
        VisitOutcome::Contested => rule.contested_factor,
        VisitOutcome::Abandoned => rule.abandoned_factor,
    };
    (popularity * factor).clamp(rule.clamp_min, rule.clamp_max)
}

/// Key of one appointment slot: (day index, block start minute-of-day, slot).
pub type SlotKey = (u64, u32, u32);

/// A booked appointment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Appointment {
    pub patient: PatientId,
    pub channel: Channel,
    pub time: SimTime,
    pub slot: SlotKey,
}

#[derive(Debug, Clone)]
pub struct DoctorAgent {
    pub id: usize,
    pub specialization: Specialty,
    pub schedule: WeeklySchedule,
    pub state: DoctorState,
    pub popularity: f64,

    /// Booked patients in arrival order with the visit mode of each held at
    /// the matching position.
    pub patient_list: Vec<PatientId>,
    pub visit_mode_flags: Vec<bool>, // true = in-person, false = online

    /// Slot bookings; key order gives deterministic iteration.
    pub slot_book: BTreeMap<SlotKey, PatientId>,
    /// Unscheduled escalations served ahead of regular bookings.
    pub emergency_queue: VecDeque<PatientId>,
    /// Referral files awaiting review during online windows.
    pub pending_reviews: VecDeque<PatientId>,
    /// Admitted inpatients under this doctor, reviewed at ward rounds.
    pub inpatients: Vec<PatientId>,

    pub worked_minutes: f64,
    pub scheduled_minutes: f64,
}

impl DoctorAgent {
    pub fn new(id: usize, specialization: Specialty) -> Self {
        DoctorAgent {
            id,
            specialization,
            schedule: specialization.weekly_schedule(),
            state: DoctorState::Home,
            popularity: POPULARITY_INITIAL,
            patient_list: Vec::new(),
            visit_mode_flags: Vec::new(),
            slot_book: BTreeMap::new(),
            emergency_queue: VecDeque::new(),
            pending_reviews: VecDeque::new(),
            inpatients: Vec::new(),
            worked_minutes: 0.0,
            scheduled_minutes: 0.0,
        }
    }

    /// Outstanding bookings; the queue-pressure part of doctor choice.
    pub fn queue_len(&self) -> usize {
        self.patient_list.len()
    }

    pub fn register_booking(&mut self, patient: PatientId, channel: Channel) {
        self.patient_list.push(patient);
        self.visit_mode_flags.push(channel == Channel::InPerson);
        debug_assert_eq!(self.patient_list.len(), self.visit_mode_flags.len());
    }

    pub fn unregister_booking(&mut self, patient: PatientId) {
        if let Some(pos) = self.patient_list.iter().position(|&p| p == patient) {
            self.patient_list.remove(pos);
            self.visit_mode_flags.remove(pos);
        }
    }

    /// Earliest free appointment for `channel` at or after `now`, scanning
    /// block instances forward day by day. Slots sit `slot_interval` minutes
    /// apart from the block start, capped by the per-session slot count.
    pub fn find_free_slot(
        &self,
        now: SimTime,
        channel: Channel,
        slot_interval_minutes: f64,
    ) -> Appointment {
        let activity = match channel {
            Channel::InPerson => Activity::Clinic,
            Channel::Online => Activity::Online,
        };
        let slots = self.specialization.slots_per_session(channel) as u32;
        let mut probe = now;
        loop {
            let inst = self
                .schedule
                .next_block_instance(probe, activity)
                .expect("specialty schedules cover every activity");
            let day = inst.start.day_index();
            let block_start_minute = inst.start.minute_of_day() as u32;
            for k in 0..slots {
                let slot_time = inst.start.plus_minutes(k as f64 * slot_interval_minutes);
                if slot_time.minutes() < now.minutes() {
                    continue;
                }
                let key = (day, block_start_minute, k);
                if !self.slot_book.contains_key(&key) {
                    return Appointment {
                        patient: 0,
                        channel,
                        time: slot_time,
                        slot: key,
                    };
                }
            }
            probe = inst.end;
        }
    }

    pub fn book_slot(&mut self, mut appointment: Appointment, patient: PatientId) -> Appointment {
        appointment.patient = patient;
        let prev = self.slot_book.insert(appointment.slot, patient);
        debug_assert!(prev.is_none(), "slot double booked");
        self.register_booking(patient, appointment.channel);
        appointment
    }

    pub fn cancel_slot(&mut self, slot: SlotKey, patient: PatientId) {
        self.slot_book.remove(&slot);
        self.unregister_booking(patient);
    }
}
