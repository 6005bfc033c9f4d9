//! Hybrid discrete-event / agent-based simulator of a multi-specialty
//! hospital serving local patients and medical tourists.
//!
//! The process layer (arrivals, triage, appointment booking, consultation,
//! admission, inpatient stay, discharge) advances on a deterministic event
//! calendar; the behavioural layer (medication adherence, worry and
//! dissatisfaction timers, doctor switching, compatible-section bed
//! borrowing) rides on top of it and can be removed wholesale to obtain the
//! process-only counterpart model.
//!
//! - `calendar`, `rng`, `dist`, `schedule`: deterministic kernel
//! - `agents`: patient / doctor / section state machines
//! - `policy`: interchangeable admission strategies, selected by name
//! - `world`, `runner`: the replication engine
//! - `metrics`, `trace`: response variables and replayable traces

pub mod agents;
pub mod calendar;
pub mod config;
pub mod dist;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod schedule;
pub mod specialty;
pub mod testing;
pub mod time;
pub mod trace;
pub mod world;

mod runner;

pub use config::{ScenarioConfig, SimMode};
pub use metrics::{compute_responses, ResponseVector};
pub use runner::{run_replication, run_replication_with, SimError};
pub use trace::ReplicationTrace;
pub use world::World;
