//! Patient agent: attributes, treatment states and transition edges.

use crate::specialty::{Channel, Specialty};
use crate::time::SimTime;

pub type PatientId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatientType {
    Local,
    Tourist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    Female,
    Male,
}

/// Personality trait; anxious patients take longer and contest more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Temperament {
    Relaxed,
    Normal,
    Anxious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdherenceLevel {
    Good,
    Partial,
    Poor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HealthStatus {
    Stable,
    Worsening,
    Critical,
}

/// Treatment states. Clinic and video-visit superstates are flattened into
/// their substates; exactly one state is active at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreatmentState {
    NeedService,
    Confirmation,
    WaitForVisit,
    WaitInClinicQueue,
    BeingCheckup,
    AgreeOrDisagree,
    WaitInVideoQueue,
    AnsweringQuestions,
    AcceptOrNot,
    WaitForEmptyBed,
    WaitInHome,
    Hospitalization,
    Emergency,
    HomeTreatment,
    Recovered,
    DroppedOut,
}

impl TreatmentState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TreatmentState::Recovered | TreatmentState::DroppedOut)
    }

    /// States in which the worry counter accrues while the patient sits
    /// unserved.
    pub fn accrues_worry(self) -> bool {
        matches!(
            self,
            TreatmentState::WaitForVisit
                | TreatmentState::WaitForEmptyBed
                | TreatmentState::WaitInHome
        )
    }

    /// States counted as queue waiting for the dissatisfaction check.
    pub fn is_queue_wait(self) -> bool {
        matches!(
            self,
            TreatmentState::WaitForVisit
                | TreatmentState::WaitInClinicQueue
                | TreatmentState::WaitInVideoQueue
                | TreatmentState::WaitForEmptyBed
                | TreatmentState::WaitInHome
        )
    }

    /// Medication behaviour only evolves while the patient is at home or
    /// waiting, never in a ward.
    pub fn adherence_evolves(self) -> bool {
        matches!(
            self,
            TreatmentState::HomeTreatment
                | TreatmentState::WaitForVisit
                | TreatmentState::WaitInHome
                | TreatmentState::WaitForEmptyBed
        )
    }

    pub fn from_label(label: &str) -> Option<TreatmentState> {
        use TreatmentState::*;
        Some(match label {
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

    pub fn label(self) -> &'static str {
        match self {
            TreatmentState::NeedService => "need_service",
            TreatmentState::Confirmation => "confirmation",
            TreatmentState::WaitForVisit => "wait_for_visit",
            TreatmentState::WaitInClinicQueue => "wait_in_clinic_queue",
            TreatmentState::BeingCheckup => "being_checkup",
            TreatmentState::AgreeOrDisagree => "agree_or_disagree",
            TreatmentState::WaitInVideoQueue => "wait_in_video_queue",
            TreatmentState::AnsweringQuestions => "answering_questions",
            TreatmentState::AcceptOrNot => "accept_or_not",
            TreatmentState::WaitForEmptyBed => "wait_for_empty_bed",
            TreatmentState::WaitInHome => "wait_in_home",
            TreatmentState::Hospitalization => "hospitalization",
            TreatmentState::Emergency => "emergency",
            TreatmentState::HomeTreatment => "home_treatment",
            TreatmentState::Recovered => "recovered",
            TreatmentState::DroppedOut => "dropped_out",
        }
    }
}

/// Edge check of the treatment state-chart, shared by the engine and the
/// trace validator. `true` when `to` is reachable from `from` in one step.
pub fn treatment_edge_allowed(from: TreatmentState, to: TreatmentState) -> bool {
    use TreatmentState::*;
    match (from, to) {
        (NeedService, Confirmation) => true,
        (Confirmation, WaitForVisit) => true,
        (WaitForVisit, WaitInClinicQueue) => true,
        (WaitForVisit, WaitInVideoQueue) => true,
        // worry re-entry and doctor change rebook from the waiting state
        (WaitForVisit, NeedService) => true,
        (WaitForVisit, WaitForVisit) => true,
        (WaitForVisit, Emergency) => true,
        (WaitForVisit, DroppedOut) => true,
        (WaitInClinicQueue, BeingCheckup) => true,
        (BeingCheckup, AgreeOrDisagree) => true,
        (AgreeOrDisagree, BeingCheckup) => true, // contested: one re-check pass
        (WaitInVideoQueue, AnsweringQuestions) => true,
        (AnsweringQuestions, AcceptOrNot) => true,
        (AcceptOrNot, AnsweringQuestions) => true,
        (AgreeOrDisagree | AcceptOrNot, Recovered) => true,
        (AgreeOrDisagree | AcceptOrNot, HomeTreatment) => true,
        (AgreeOrDisagree | AcceptOrNot, WaitForEmptyBed) => true,
        (AgreeOrDisagree | AcceptOrNot, WaitInHome) => true,
        (WaitForEmptyBed, Hospitalization) => true,
        (WaitForEmptyBed, DroppedOut) => true,
        (WaitInHome, WaitForEmptyBed) => true,
        (WaitInHome, Hospitalization) => true,
        (WaitInHome, Emergency) => true,
        (WaitInHome, DroppedOut) => true,
        (Hospitalization, Recovered) => true,
        (Hospitalization, DroppedOut) => true, // self-discharge
        (HomeTreatment, NeedService) => true,  // renewed request
        (HomeTreatment, Recovered) => true,
        (HomeTreatment, Emergency) => true,
        (HomeTreatment, DroppedOut) => true,
        (Emergency, AnsweringQuestions) => true, // unscheduled online visit
        _ => false,
    }
}

/// One patient. Mutated only by the event loop of its replication.
#[derive(Debug, Clone)]
pub struct PatientAgent {
    pub file_number: PatientId,
    pub disease: Specialty,
    pub patient_type: PatientType,
    pub online_pref: bool,
    pub hosp_pref: bool,
    pub age: u32,
    pub gender: Gender,
    pub temperament: Temperament,
    pub state: TreatmentState,

    pub adherence: AdherenceLevel,
    pub health: HealthStatus,
    pub medication_available: bool,
    pub emergency_flag: bool,
    pub leave_flag: bool,

    /// Accumulated worry in hours; resets whenever service is received.
    pub worry_counter: f64,
    pub worry_accrual_start: Option<SimTime>,

    pub arrival_time: SimTime,
    pub request_time: SimTime,
    pub queue_wait_minutes: f64,
    pub wait_span_start: Option<SimTime>,

    pub doctor: Option<usize>,
    pub channel: Channel,
    pub visits_completed: u32,
    pub rechecked_this_visit: bool,
}

impl PatientAgent {
    /// Total queue wait including the span still in progress.
    pub fn queue_wait_through(&self, now: SimTime) -> f64 {
        let open = self
            .wait_span_start
            .map(|s| now.minutes() - s.minutes())
            .unwrap_or(0.0);
        self.queue_wait_minutes + open
    }

    pub fn worry_through(&self, now: SimTime) -> f64 {
        let open = self
            .worry_accrual_start
            .map(|s| (now.minutes() - s.minutes()) / 60.0)
            .unwrap_or(0.0);
        self.worry_counter + open
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_states_have_no_outgoing_edges() {
        use TreatmentState::*;
        for to in [
            NeedService,
            Confirmation,
            WaitForVisit,
            Hospitalization,
            Recovered,
            DroppedOut,
        ] {
            assert!(!treatment_edge_allowed(Recovered, to));
            assert!(!treatment_edge_allowed(DroppedOut, to));
        }
    }

    #[test]
    fn visit_loop_edges() {
        use TreatmentState::*;
        assert!(treatment_edge_allowed(WaitInClinicQueue, BeingCheckup));
        assert!(treatment_edge_allowed(AgreeOrDisagree, BeingCheckup));
        assert!(!treatment_edge_allowed(BeingCheckup, WaitInClinicQueue));
        assert!(!treatment_edge_allowed(NeedService, WaitForVisit));
    }
}
