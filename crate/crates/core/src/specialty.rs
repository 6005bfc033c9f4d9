//! The five hospital specialties with their case-specific consultation-time
//! distributions, appointment-slot counts and weekly duty patterns.

use crate::dist::Triangular;
use crate::schedule::{Activity, WeekdaySet, WeeklyBlock, WeeklySchedule};
use crate::time::Weekday::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Specialty {
    Cardiology,
    InternalMedicine,
    CosmeticSurgery,
    Paediatrics,
    BreastOncology,
}

/// Consultation channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Online,
    InPerson,
}

/// What kind of service the consultation time is drawn for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitPhase {
    Initial,
    Revisit,
    FileReview,
}

impl Specialty {
    pub const ALL: [Specialty; 5] = [
        Specialty::Cardiology,
        Specialty::InternalMedicine,
        Specialty::CosmeticSurgery,
        Specialty::Paediatrics,
        Specialty::BreastOncology,
    ];

    /// Section number 1..=5.
    pub fn section(self) -> usize {
        match self {
            Specialty::Cardiology => 1,
            Specialty::InternalMedicine => 2,
            Specialty::CosmeticSurgery => 3,
            Specialty::Paediatrics => 4,
            Specialty::BreastOncology => 5,
        }
    }

    pub fn from_section(section: usize) -> Option<Specialty> {
        Specialty::ALL.get(section.checked_sub(1)?).copied()
    }

    pub fn index(self) -> usize {
        self.section() - 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Specialty::Cardiology => "cardiology",
            Specialty::InternalMedicine => "internal_medicine",
            Specialty::CosmeticSurgery => "cosmetic_surgery",
            Specialty::Paediatrics => "paediatrics",
            Specialty::BreastOncology => "breast_oncology",
        }
    }

    /// Base consultation-time distribution in minutes. Initial and repeat
    /// visits share the per-channel distribution; file review has its own.
    pub fn service_time(self, channel: Channel, phase: VisitPhase) -> Triangular {
        let (a, b) = match (self, phase, channel) {
            (_, VisitPhase::FileReview, _) => match self {
                Specialty::Cardiology => (15.0, 20.0),
                Specialty::InternalMedicine => (10.0, 15.0),
                Specialty::CosmeticSurgery => (5.0, 10.0),
                Specialty::Paediatrics => (20.0, 25.0),
                Specialty::BreastOncology => (5.0, 10.0),
            },
            (_, _, Channel::Online) => match self {
                Specialty::Cardiology => (10.0, 15.0),
                Specialty::InternalMedicine => (10.0, 15.0),
                Specialty::CosmeticSurgery => (5.0, 7.0),
                Specialty::Paediatrics => (5.0, 7.0),
                Specialty::BreastOncology => (5.0, 10.0),
            },
            (_, _, Channel::InPerson) => match self {
                Specialty::Cardiology => (15.0, 25.0),
                Specialty::InternalMedicine => (10.0, 15.0),
                Specialty::CosmeticSurgery => (5.0, 10.0),
                Specialty::Paediatrics => (10.0, 15.0),
                Specialty::BreastOncology => (20.0, 25.0),
            },
        };
        Triangular::symmetric(a, b).expect("static table is well formed")
    }

    /// Appointment slots reserved per session for each channel.
    pub fn slots_per_session(self, channel: Channel) -> usize {
        match (self, channel) {
            (Specialty::Cardiology, Channel::InPerson) => 5,
            (Specialty::Cardiology, Channel::Online) => 5,
            (Specialty::InternalMedicine, Channel::InPerson) => 3,
            (Specialty::InternalMedicine, Channel::Online) => 5,
            (Specialty::CosmeticSurgery, Channel::InPerson) => 3,
            (Specialty::CosmeticSurgery, Channel::Online) => 5,
            (Specialty::Paediatrics, Channel::InPerson) => 5,
            (Specialty::Paediatrics, Channel::Online) => 3,
            (Specialty::BreastOncology, Channel::InPerson) => 3,
            (Specialty::BreastOncology, Channel::Online) => 4,
        }
    }

    /// Fixed weekly duty pattern of this specialty's doctors.
    pub fn weekly_schedule(self) -> WeeklySchedule {
        let m = |h: f64, min: f64| h * 60.0 + min;
        let online = |blocks: &mut Vec<WeeklyBlock>| {
            blocks.push(WeeklyBlock::new(
                Activity::Online,
                WeekdaySet::EVERY_DAY,
                m(8.0, 0.0),
                m(10.0, 0.0),
            ));
            blocks.push(WeeklyBlock::new(
                Activity::Online,
                WeekdaySet::EVERY_DAY,
                m(20.0, 0.0),
                m(22.0, 0.0),
            ));
        };
        let mut blocks = Vec::new();
        match self {
            Specialty::Cardiology => {
                blocks.push(WeeklyBlock::new(
                    Activity::Clinic,
                    WeekdaySet::of(&[Saturday, Sunday]),
                    m(10.0, 0.0),
                    m(13.0, 0.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Saturday, Sunday]),
                    m(13.0, 30.0),
                    m(14.0, 30.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Monday, Tuesday, Wednesday, Thursday, Friday]),
                    m(13.0, 0.0),
                    m(14.0, 0.0),
                ));
            }
            Specialty::InternalMedicine => {
                blocks.push(WeeklyBlock::new(
                    Activity::Clinic,
                    WeekdaySet::of(&[Saturday, Sunday, Monday, Tuesday, Friday]),
                    m(10.0, 0.0),
                    m(15.0, 0.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Saturday, Sunday, Monday, Tuesday, Friday]),
                    m(15.0, 30.0),
                    m(17.0, 0.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Wednesday, Thursday]),
                    m(13.0, 0.0),
                    m(14.0, 0.0),
                ));
            }
            Specialty::CosmeticSurgery => {
                blocks.push(WeeklyBlock::new(
                    Activity::Clinic,
                    WeekdaySet::of(&[Saturday, Sunday, Wednesday]),
                    m(10.0, 0.0),
                    m(14.0, 0.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Saturday, Sunday, Wednesday]),
                    m(14.0, 30.0),
                    m(16.0, 0.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Monday, Tuesday, Thursday, Friday]),
                    m(13.0, 0.0),
                    m(14.0, 0.0),
                ));
            }
            Specialty::Paediatrics => {
                blocks.push(WeeklyBlock::new(
                    Activity::Clinic,
                    WeekdaySet::of(&[Saturday]),
                    m(10.0, 0.0),
                    m(11.0, 0.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Saturday]),
                    m(12.0, 0.0),
                    m(13.0, 30.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Sunday, Monday, Tuesday, Wednesday, Thursday, Friday]),
                    m(13.0, 0.0),
                    m(14.0, 0.0),
                ));
            }
            Specialty::BreastOncology => {
                blocks.push(WeeklyBlock::new(
                    Activity::Clinic,
                    WeekdaySet::of(&[Saturday, Sunday, Wednesday, Thursday, Friday]),
                    m(10.0, 0.0),
                    m(16.0, 0.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Saturday, Sunday, Wednesday, Thursday, Friday]),
                    m(16.0, 30.0),
                    m(18.0, 30.0),
                ));
                blocks.push(WeeklyBlock::new(
                    Activity::Hospital,
                    WeekdaySet::of(&[Monday, Tuesday]),
                    m(13.0, 0.0),
                    m(14.0, 0.0),
                ));
            }
        }
        online(&mut blocks);
        WeeklySchedule::new(blocks)
    }
}

impl std::fmt::Display for Specialty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
