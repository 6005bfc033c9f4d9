//! Interchangeable admission policies behind common traits.
//!
//! Each variant is registered under a stable name and resolved at runtime
//! from the scenario configuration, so policy combinations come straight
//! from the experiment coding without conditional logic in the engine.

use crate::agents::section::{SectionAgent, WaitingPatient};
use crate::time::SimTime;

/// Order in which waiting patients are seated when a bed frees up.
pub trait BedQueueDiscipline: Send + Sync {
    fn name(&self) -> &'static str;
    /// Index into the waiting list of the patient to seat next.
    fn next_to_seat(&self, waiting: &[WaitingPatient]) -> Option<usize>;
}

/// Single-class FIFO on the booking-request time.
pub struct GlobalFifo;

impl BedQueueDiscipline for GlobalFifo {
    fn name(&self) -> &'static str {
        "fifo"
    }

    fn next_to_seat(&self, waiting: &[WaitingPatient]) -> Option<usize> {
        waiting
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| {
                a.request_time
                    .total_cmp(&b.request_time)
                    .then(ia.cmp(ib))
            })
            .map(|(i, _)| i)
    }
}

/// Two-class non-preemptive priority: tourists first, FIFO within class.
pub struct TouristPriority;

impl BedQueueDiscipline for TouristPriority {
    fn name(&self) -> &'static str {
        "tourist-priority"
    }

    fn next_to_seat(&self, waiting: &[WaitingPatient]) -> Option<usize> {
        let class = |tourist: bool| {
            waiting
                .iter()
                .enumerate()
                .filter(|(_, w)| w.tourist == tourist)
                .min_by(|(ia, a), (ib, b)| {
                    a.request_time
                        .total_cmp(&b.request_time)
                        .then(ia.cmp(ib))
                })
                .map(|(i, _)| i)
        };
        class(true).or_else(|| class(false))
    }
}

/// Where a patient accepted for admission goes when no bed is free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdmissionRoute {
    /// Queue physically at the hospital.
    JoinQueue,
    /// Book the projected free-bed date and wait at home until then.
    BookSlot(SimTime),
}

/// How the hospitalization decision turns into queueing or booking.
pub trait AdmissionScheduling: Send + Sync {
    fn name(&self) -> &'static str;
    fn route(
        &self,
        section: &SectionAgent,
        now: SimTime,
        projected_stay_minutes: f64,
    ) -> AdmissionRoute;
}

/// Join the physical queue immediately.
pub struct ImmediateQueue;

impl AdmissionScheduling for ImmediateQueue {
    fn name(&self) -> &'static str {
        "immediate"
    }

    fn route(&self, _section: &SectionAgent, _now: SimTime, _stay: f64) -> AdmissionRoute {
        AdmissionRoute::JoinQueue
    }
}

/// Book the earliest projected free-bed date; the patient waits at home.
pub struct ScheduledBooking;

impl AdmissionScheduling for ScheduledBooking {
    fn name(&self) -> &'static str {
        "scheduled"
    }

    fn route(&self, section: &SectionAgent, now: SimTime, stay: f64) -> AdmissionRoute {
        if section.free_beds() > 0 && section.waiting.is_empty() {
            AdmissionRoute::JoinQueue
        } else {
            AdmissionRoute::BookSlot(section.projected_free_time(now, stay))
        }
    }
}

type DisciplineCtor = fn() -> Box<dyn BedQueueDiscipline>;
type SchedulingCtor = fn() -> Box<dyn AdmissionScheduling>;

pub const DISCIPLINES: &[(&str, DisciplineCtor)] = &[
    ("fifo", || Box::new(GlobalFifo)),
    ("tourist-priority", || Box::new(TouristPriority)),
];

pub const SCHEDULINGS: &[(&str, SchedulingCtor)] = &[
    ("immediate", || Box::new(ImmediateQueue)),
    ("scheduled", || Box::new(ScheduledBooking)),
];

pub fn discipline_by_name(name: &str) -> Option<Box<dyn BedQueueDiscipline>> {
    DISCIPLINES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ctor)| ctor())
}

pub fn scheduling_by_name(name: &str) -> Option<Box<dyn AdmissionScheduling>> {
    SCHEDULINGS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ctor)| ctor())
}

/// Coded policy bit -> registered strategy name (false = policy 0).
pub fn discipline_name_for_bit(high: bool) -> &'static str {
    if high {
        "tourist-priority"
    } else {
        "fifo"
    }
}

pub fn scheduling_name_for_bit(high: bool) -> &'static str {
    if high {
        "scheduled"
    } else {
        "immediate"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::patient::PatientId;

    fn entry(patient: PatientId, t: f64, tourist: bool) -> WaitingPatient {
        WaitingPatient {
            patient,
            request_time: SimTime::from_minutes(t),
            tourist,
        }
    }

    #[test]
    fn fifo_seats_earliest_request() {
        let q = vec![entry(1, 10.0, false), entry(2, 5.0, true), entry(3, 7.0, false)];
        let d = GlobalFifo;
        assert_eq!(d.next_to_seat(&q), Some(1));
    }

    #[test]
    fn tourist_priority_jumps_class_but_keeps_fifo_within() {
        let q = vec![
            entry(1, 1.0, false),
            entry(2, 2.0, false),
            entry(3, 3.0, true),
            entry(4, 2.5, true),
        ];
        let d = TouristPriority;
        // Earliest tourist first even though locals requested earlier.
        assert_eq!(d.next_to_seat(&q), Some(3));
        let q2 = vec![entry(1, 1.0, false), entry(2, 2.0, false)];
        assert_eq!(d.next_to_seat(&q2), Some(0));
    }

    #[test]
    fn empty_queue_seats_nobody() {
        assert_eq!(GlobalFifo.next_to_seat(&[]), None);
        assert_eq!(TouristPriority.next_to_seat(&[]), None);
    }

    #[test]
    fn registry_resolves_names() {
        for (name, _) in DISCIPLINES {
            assert_eq!(discipline_by_name(name).unwrap().name(), *name);
        }
        for (name, _) in SCHEDULINGS {
            assert_eq!(scheduling_by_name(name).unwrap().name(), *name);
        }
        assert!(discipline_by_name("nope").is_none());
    }

    #[test]
    fn policy_bits_map_to_names() {
        assert_eq!(discipline_name_for_bit(false), "fifo");
        assert_eq!(discipline_name_for_bit(true), "tourist-priority");
        assert_eq!(scheduling_name_for_bit(false), "immediate");
        assert_eq!(scheduling_name_for_bit(true), "scheduled");
    }
}
