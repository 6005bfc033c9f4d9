//! Scenario configuration: decoded factor values, behaviour constants and
//! their documented defaults.

use thiserror::Error;

use crate::agents::adherence::AdherenceParams;
use crate::agents::doctor::PopularityRule;
use crate::dist::Triangular;
use crate::policy;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    /// Full model: behavioural layer plus process layer.
    Hybrid,
    /// Process layer only: no adherence, no bed sharing, no agent messaging,
    /// procedural visit durations.
    DesOnly,
}

impl SimMode {
    pub fn label(self) -> &'static str {
        match self {
            SimMode::Hybrid => "hybrid",
            SimMode::DesOnly => "des-only",
        }
    }
}

impl std::str::FromStr for SimMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hybrid" => Ok(SimMode::Hybrid),
            "des-only" | "des_only" | "des" => Ok(SimMode::DesOnly),
            other => Err(format!("unknown mode `{other}` (hybrid | des-only)")),
        }
    }
}

/// Distributions for sampled patient attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeDefaults {
    pub age_min: u32,
    pub age_max: u32,
    pub p_male: f64,
    pub p_relaxed: f64,
    pub p_normal: f64,
    pub p_online_pref: f64,
    pub p_hosp_pref: f64,
}

impl Default for AttributeDefaults {
    fn default() -> Self {
        AttributeDefaults {
            age_min: 1,
            age_max: 90,
            p_male: 0.5,
            p_relaxed: 0.3,
            p_normal: 0.5,
            p_online_pref: 0.5,
            p_hosp_pref: 0.5,
        }
    }
}

/// Probabilities of the consultation outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbs {
    pub discharge: f64,
    pub home_treatment: f64,
    pub hospitalize: f64,
}

impl OutcomeProbs {
    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        let sum = self.discharge + self.home_treatment + self.hospitalize;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid(field, format!("outcome probabilities sum to {sum}, expected 1")));
        }
        if self.discharge < 0.0 || self.home_treatment < 0.0 || self.hospitalize < 0.0 {
            return Err(invalid(field, "outcome probabilities must be non-negative"));
        }
        Ok(())
    }
}

/// Behavioural constants of the agent layer. All overridable from the
/// scenario file; the shipped values are the documented defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviourParams {
    /// Visit-duration multiplier for anxious patients.
    pub anxious_duration_factor: f64,
    /// Disagreement probability when the proposal contradicts the patient's
    /// preference, and when it matches it.
    pub disagree_mismatch: f64,
    pub disagree_match: f64,
    /// Worry accrues per waiting hour; crossing the threshold re-enters the
    /// request flow.
    pub worry_threshold_hours: f64,
    pub worry_rate_per_hour: f64,
    /// Cumulative queue wait beyond which the five-day review flips the
    /// leave flag.
    pub leave_threshold_days: f64,
    pub popularity: PopularityRule,
    /// Switch probability per unit popularity gap at the three-day review.
    pub doctor_change_coeff: f64,
    pub visit_outcome: OutcomeProbs,
    pub emergency_outcome: OutcomeProbs,
    /// Chance that a finished home-treatment course ends in recovery rather
    /// than a renewed request.
    pub home_recovery_prob: f64,
    /// Home-treatment course length, days.
    pub home_course_days: Triangular,
    pub ward_round_minutes_per_patient: f64,
    /// Waiting-list length that, with a full ward, declares a shortage.
    pub shortage_threshold: usize,
}

impl Default for BehaviourParams {
    fn default() -> Self {
        BehaviourParams {
            anxious_duration_factor: 1.25,
            disagree_mismatch: 0.5,
            disagree_match: 0.05,
            worry_threshold_hours: 100.0,
            worry_rate_per_hour: 1.0,
            leave_threshold_days: 7.0,
            popularity: PopularityRule::default(),
            doctor_change_coeff: 0.5,
            visit_outcome: OutcomeProbs {
                discharge: 0.15,
                home_treatment: 0.25,
                hospitalize: 0.60,
            },
            emergency_outcome: OutcomeProbs {
                discharge: 0.10,
                home_treatment: 0.60,
                hospitalize: 0.30,
            },
            home_recovery_prob: 0.5,
            home_course_days: Triangular::new(5.0, 10.0, 15.0).unwrap(),
            ward_round_minutes_per_patient: 3.0,
            shortage_threshold: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub beds: [u32; 5],
    pub specialists: [usize; 5],
    /// Percent of tourists routed to the online channel.
    pub tourist_online_share_pct: f64,
    /// Percent of locals routed to the online channel.
    pub local_online_share_pct: f64,
    /// Admission-scheduling strategy for the online pathway.
    pub online_scheduling: String,
    /// Admission-scheduling strategy for the in-person pathway.
    pub in_person_scheduling: String,
    /// Bed-queue discipline.
    pub queue_discipline: String,
    pub slot_interval_minutes: f64,

    pub horizon_days: f64,
    pub warmup_days: f64,
    pub mode: SimMode,
    pub replications: usize,
    pub master_seed: u64,

    pub arrival_rate_per_day: f64,
    /// Per-arrival tourist probability; 1/11 encodes the 1:10 mix.
    pub tourist_probability: f64,
    pub gp_count: usize,
    pub gp_triage_minutes: Triangular,
    /// Inpatient length of stay per section, days.
    pub length_of_stay_days: [Triangular; 5],

    pub attributes: AttributeDefaults,
    pub behaviour: BehaviourParams,
    pub adherence: AdherenceParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            beds: [40, 50, 70, 20, 60],
            specialists: [1, 6, 2, 2, 3],
            tourist_online_share_pct: 20.0,
            local_online_share_pct: 10.0,
            online_scheduling: policy::scheduling_name_for_bit(false).to_string(),
            in_person_scheduling: policy::scheduling_name_for_bit(false).to_string(),
            queue_discipline: policy::discipline_name_for_bit(false).to_string(),
            slot_interval_minutes: 5.0,
            horizon_days: 365.0,
            warmup_days: 10.0,
            mode: SimMode::Hybrid,
            replications: 1,
            master_seed: 0,
            arrival_rate_per_day: 10.0,
            tourist_probability: 1.0 / 11.0,
            gp_count: 3,
            gp_triage_minutes: Triangular::symmetric(5.0, 10.0).unwrap(),
            length_of_stay_days: [
                Triangular::new(22.0, 45.0, 68.0).unwrap(),
                Triangular::new(27.0, 55.0, 83.0).unwrap(),
                Triangular::new(35.0, 70.0, 105.0).unwrap(),
                Triangular::new(15.0, 30.0, 45.0).unwrap(),
                Triangular::new(31.0, 62.0, 93.0).unwrap(),
            ],
            attributes: AttributeDefaults::default(),
            behaviour: BehaviourParams::default(),
            adherence: AdherenceParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, &b) in self.beds.iter().enumerate() {
            if b == 0 {
                return Err(invalid(&format!("beds.section{}", i + 1), "must be at least 1"));
            }
        }
        for (i, &s) in self.specialists.iter().enumerate() {
            if s == 0 {
                return Err(invalid(
                    &format!("specialists.section{}", i + 1),
                    "every specialty needs at least one doctor",
                ));
            }
        }
        for (field, v) in [
            ("online_share.tourist", self.tourist_online_share_pct),
            ("online_share.local", self.local_online_share_pct),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(invalid(field, format!("percentage out of range: {v}")));
            }
        }
        if policy::scheduling_by_name(&self.online_scheduling).is_none() {
            return Err(invalid(
                "policy.online_scheduling",
                format!("unknown strategy `{}`", self.online_scheduling),
            ));
        }
        if policy::scheduling_by_name(&self.in_person_scheduling).is_none() {
            return Err(invalid(
                "policy.in_person_scheduling",
                format!("unknown strategy `{}`", self.in_person_scheduling),
            ));
        }
        if policy::discipline_by_name(&self.queue_discipline).is_none() {
            return Err(invalid(
                "policy.queue_discipline",
                format!("unknown strategy `{}`", self.queue_discipline),
            ));
        }
        if self.slot_interval_minutes <= 0.0 {
            return Err(invalid("slot_interval_minutes", "must be positive"));
        }
        if self.horizon_days < self.warmup_days {
            return Err(invalid("horizon_days", "horizon shorter than warm-up"));
        }
        if self.arrival_rate_per_day <= 0.0 {
            return Err(invalid("arrival_rate_per_day", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.tourist_probability) {
            return Err(invalid("tourist_probability", "must be a probability"));
        }
        if self.gp_count == 0 {
            return Err(invalid("gp.count", "at least one general practitioner"));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }
        let a = &self.attributes;
        if a.age_min > a.age_max {
            return Err(invalid("attributes.age", "age_min exceeds age_max"));
        }
        for (field, p) in [
            ("attributes.p_male", a.p_male),
            ("attributes.p_relaxed", a.p_relaxed),
            ("attributes.p_normal", a.p_normal),
            ("attributes.p_online_pref", a.p_online_pref),
            ("attributes.p_hosp_pref", a.p_hosp_pref),
            ("behaviour.disagree_mismatch", self.behaviour.disagree_mismatch),
            ("behaviour.disagree_match", self.behaviour.disagree_match),
            ("behaviour.home_recovery_prob", self.behaviour.home_recovery_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(field, format!("must be a probability, got {p}")));
            }
        }
        if a.p_relaxed + a.p_normal > 1.0 + 1e-12 {
            return Err(invalid(
                "attributes.p_relaxed",
                "temperament probabilities exceed 1",
            ));
        }
        self.behaviour.visit_outcome.validate("behaviour.visit_outcome")?;
        self.behaviour
            .emergency_outcome
            .validate("behaviour.emergency_outcome")?;
        self.adherence
            .validate()
            .map_err(|e| invalid("adherence", e.to_string()))?;
        Ok(())
    }

    /// Stable textual form of every semantic field; hashing this gives the
    /// config fingerprint recorded in run manifests.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let tri = |t: &Triangular| format!("{}/{}/{}", t.min(), t.mode(), t.max());
        s.push_str(&format!("beds={:?};specialists={:?};", self.beds, self.specialists));
        s.push_str(&format!(
            "k={};l={};m={};n={};o={};p={};",
            self.tourist_online_share_pct,
            self.local_online_share_pct,
            self.online_scheduling,
            self.in_person_scheduling,
            self.queue_discipline,
            self.slot_interval_minutes
        ));
        s.push_str(&format!(
            "horizon={};warmup={};mode={};reps={};seed={};",
            self.horizon_days,
            self.warmup_days,
            self.mode.label(),
            self.replications,
            self.master_seed
        ));
        s.push_str(&format!(
            "arrival={};tourist_p={};gp={};triage={};",
            self.arrival_rate_per_day,
            self.tourist_probability,
            self.gp_count,
            tri(&self.gp_triage_minutes)
        ));
        for t in &self.length_of_stay_days {
            s.push_str(&format!("los={};", tri(t)));
        }
        let a = &self.attributes;
        s.push_str(&format!(
            "age={}..{};male={};relaxed={};normal={};onpref={};hosppref={};",
            a.age_min, a.age_max, a.p_male, a.p_relaxed, a.p_normal, a.p_online_pref, a.p_hosp_pref
        ));
        let b = &self.behaviour;
        s.push_str(&format!(
            "anx={};dm={};dmm={};wt={};wr={};leave={};pop={}/{}/{}/{}/{};chg={};out={}/{}/{};eout={}/{}/{};homerec={};course={};round={};shortage={};",
            b.anxious_duration_factor,
            b.disagree_mismatch,
            b.disagree_match,
            b.worry_threshold_hours,
            b.worry_rate_per_hour,
            b.leave_threshold_days,
            b.popularity.completed_factor,
            b.popularity.contested_factor,
            b.popularity.abandoned_factor,
            b.popularity.clamp_min,
            b.popularity.clamp_max,
            b.doctor_change_coeff,
            b.visit_outcome.discharge,
            b.visit_outcome.home_treatment,
            b.visit_outcome.hospitalize,
            b.emergency_outcome.discharge,
            b.emergency_outcome.home_treatment,
            b.emergency_outcome.hospitalize,
            b.home_recovery_prob,
            tri(&b.home_course_days),
            b.ward_round_minutes_per_patient,
            b.shortage_threshold
        ));
        let ad = &self.adherence;
        s.push_str(&format!(
            "avail={:?};base={:?};tt={:?};ta={:?};tg={:?};tu={};health={:?};hta={:?};",
            ad.availability,
            ad.adherence_base,
            ad.tilt_temperament,
            ad.tilt_age,
            ad.tilt_gender,
            ad.tilt_unavailable,
            ad.health,
            ad.health_tilt_age
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_baseline() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(c.beds, [40, 50, 70, 20, 60]);
        assert_eq!(c.specialists, [1, 6, 2, 2, 3]);
        assert_eq!(c.slot_interval_minutes, 5.0);
        assert_eq!(c.arrival_rate_per_day, 10.0);
        assert!((c.tourist_probability - 1.0 / 11.0).abs() < 1e-12);
        assert_eq!(c.warmup_days, 10.0);
    }

    #[test]
    fn zero_beds_rejected_with_field_name() {
        let mut c = ScenarioConfig::default();
        c.beds[2] = 0;
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("beds.section3"));
    }

    #[test]
    fn unknown_strategy_rejected() {
        let mut c = ScenarioConfig::default();
        c.queue_discipline = "random".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn canonical_string_changes_with_semantics() {
        let a = ScenarioConfig::default();
        let mut b = ScenarioConfig::default();
        assert_eq!(a.canonical_string(), b.canonical_string());
        b.slot_interval_minutes = 2.0;
        assert_ne!(a.canonical_string(), b.canonical_string());
    }
}
