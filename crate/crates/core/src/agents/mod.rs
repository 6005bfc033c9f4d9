//! Agent layer: patients, doctors and hospital sections.

pub mod adherence;
pub mod doctor;
pub mod patient;
pub mod section;

pub use adherence::{drug_behavior_step, AdherenceParams, AgeBand, DrugStep};
pub use doctor::{
    doctor_edge_allowed, update_popularity, DoctorAgent, DoctorState, PopularityRule, VisitOutcome,
};
pub use patient::{
    treatment_edge_allowed, AdherenceLevel, Gender, HealthStatus, PatientAgent, PatientId,
    PatientType, Temperament, TreatmentState,
};
pub use section::{
    capacity_rebalance, try_return_borrowed_beds, BedTransfer, SectionAgent, SectionState,
    WaitingPatient,
};
