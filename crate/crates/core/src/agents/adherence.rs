//! Medication-adherence and health-status dynamics.
//!
//! Adherence evolves as a Markov chain over {Good, Partial, Poor}. The row
//! used for a step is the shipped base row pulled toward poor adherence by
//! additive tilts for temperament, age band, gender and medication
//! unavailability (negative tilts pull toward good adherence). Health status
//! then steps through a chain conditioned on the new adherence level. Poor
//! adherence combined with a worsening or critical status raises the
//! emergency trigger consumed by the treatment state-chart.

use rand::Rng;
use thiserror::Error;

use crate::agents::patient::{AdherenceLevel, Gender, HealthStatus, PatientAgent, Temperament};

pub type Row3 = [f64; 3];
pub type Matrix3 = [Row3; 3];
pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Error, PartialEq)]
pub enum AdherenceConfigError {
    #[error("{context}: row must be a probability vector summing to 1 (got sum {sum})")]
    BadRow { context: String, sum: f64 },
    #[error("{context}: negative probability {value}")]
    NegativeEntry { context: String, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgeBand {
    Child,
    Adult,
    Senior,
}

impl AgeBand {
    pub fn from_age(age: u32) -> Self {
        match age {
            0..=17 => AgeBand::Child,
            18..=64 => AgeBand::Adult,
            _ => AgeBand::Senior,
        }
    }

    fn index(self) -> usize {
        match self {
            AgeBand::Child => 0,
            AgeBand::Adult => 1,
            AgeBand::Senior => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdherenceParams {
    /// Medication-availability chain; rows from {Available, Unavailable}.
    pub availability: Matrix2,
    /// Adherence rows for the reference cell (adult, female, normal
    /// temperament, medication available).
    pub adherence_base: Matrix3,
    /// Additive poor-adherence tilt per temperament (relaxed, normal, anxious).
    pub tilt_temperament: [f64; 3],
    /// Tilt per age band (child, adult, senior).
    pub tilt_age: [f64; 3],
    /// Tilt per gender (female, male).
    pub tilt_gender: [f64; 2],
    /// Extra tilt applied while medication is unavailable.
    pub tilt_unavailable: f64,
    /// Health-status rows conditioned on adherence level.
    pub health: [Matrix3; 3],
    /// Extra pull toward critical per age band.
    pub health_tilt_age: [f64; 3],
}

impl Default for AdherenceParams {
    fn default() -> Self {
        AdherenceParams {
            availability: [[0.95, 0.05], [0.50, 0.50]],
            adherence_base: [
                [0.88, 0.09, 0.03],
                [0.25, 0.58, 0.17],
                [0.10, 0.30, 0.60],
            ],
            tilt_temperament: [-0.05, 0.0, 0.08],
            tilt_age: [0.02, 0.0, 0.05],
            tilt_gender: [0.0, 0.02],
            tilt_unavailable: 0.35,
            health: [
                [
                    [0.985, 0.013, 0.002],
                    [0.60, 0.36, 0.04],
                    [0.40, 0.45, 0.15],
                ],
                [
                    [0.960, 0.035, 0.005],
                    [0.40, 0.52, 0.08],
                    [0.25, 0.45, 0.30],
                ],
                [
                    [0.935, 0.055, 0.010],
                    [0.18, 0.64, 0.18],
                    [0.10, 0.40, 0.50],
                ],
            ],
            health_tilt_age: [0.0, 0.0, 0.05],
        }
    }
}

fn check_row(row: &[f64], context: &str) -> Result<(), AdherenceConfigError> {
    for &v in row {
        if v < 0.0 {
            return Err(AdherenceConfigError::NegativeEntry {
                context: context.to_string(),
                value: v,
            });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(AdherenceConfigError::BadRow {
            context: context.to_string(),
            sum,
        });
    }
    Ok(())
}

impl AdherenceParams {
    pub fn validate(&self) -> Result<(), AdherenceConfigError> {
        for (i, row) in self.availability.iter().enumerate() {
            check_row(row, &format!("availability row {i}"))?;
        }
        for (i, row) in self.adherence_base.iter().enumerate() {
            check_row(row, &format!("adherence row {i}"))?;
        }
        for (a, m) in self.health.iter().enumerate() {
            for (i, row) in m.iter().enumerate() {
                check_row(row, &format!("health[adherence {a}] row {i}"))?;
            }
        }
        Ok(())
    }

    /// Total poor-adherence tilt for a patient cell.
    pub fn tilt_for(
        &self,
        age: AgeBand,
        gender: Gender,
        temperament: Temperament,
        medication_available: bool,
    ) -> f64 {
        let g = match gender {
            Gender::Female => 0,
            Gender::Male => 1,
        };
        let t = match temperament {
            Temperament::Relaxed => 0,
            Temperament::Normal => 1,
            Temperament::Anxious => 2,
        };
        let mut tilt =
            self.tilt_temperament[t] + self.tilt_age[age.index()] + self.tilt_gender[g];
        if !medication_available {
            tilt += self.tilt_unavailable;
        }
        tilt.clamp(-1.0, 1.0)
    }

    /// Adherence row for one cell: the base row interpolated toward the
    /// poor-absorbing row (positive tilt) or the good-absorbing row
    /// (negative tilt). Interpolation keeps rows stochastic by construction.
    pub fn resolved_adherence_row(&self, from: AdherenceLevel, tilt: f64) -> Row3 {
        let base = self.adherence_base[adherence_index(from)];
        let target: Row3 = if tilt >= 0.0 {
            [0.0, 0.0, 1.0]
        } else {
            [1.0, 0.0, 0.0]
        };
        let t = tilt.abs();
        let mut row = [0.0; 3];
        for i in 0..3 {
            row[i] = (1.0 - t) * base[i] + t * target[i];
        }
        row
    }

    pub fn resolved_health_row(&self, adherence: AdherenceLevel, from: HealthStatus, age: AgeBand) -> Row3 {
        let base = self.health[adherence_index(adherence)][health_index(from)];
        let t = self.health_tilt_age[age.index()].clamp(0.0, 1.0);
        let mut row = [0.0; 3];
        for i in 0..3 {
            row[i] = (1.0 - t) * base[i] + t * [0.0, 0.0, 1.0][i];
        }
        row
    }
}

pub fn adherence_index(a: AdherenceLevel) -> usize {
    match a {
        AdherenceLevel::Good => 0,
        AdherenceLevel::Partial => 1,
        AdherenceLevel::Poor => 2,
    }
}

pub fn health_index(h: HealthStatus) -> usize {
    match h {
        HealthStatus::Stable => 0,
        HealthStatus::Worsening => 1,
        HealthStatus::Critical => 2,
    }
}

fn sample_row<R: Rng + ?Sized>(rng: &mut R, row: &Row3) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    2
}

const ADHERENCE_LEVELS: [AdherenceLevel; 3] = [
    AdherenceLevel::Good,
    AdherenceLevel::Partial,
    AdherenceLevel::Poor,
];
const HEALTH_LEVELS: [HealthStatus; 3] = [
    HealthStatus::Stable,
    HealthStatus::Worsening,
    HealthStatus::Critical,
];

/// Outcome of one daily medication-behaviour step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrugStep {
    pub adherence: AdherenceLevel,
    pub health: HealthStatus,
    pub emergency_raised: bool,
}

/// One Markov step of (availability, adherence, health). Mutates the patient
/// and raises the emergency flag when poor adherence coincides with a
/// worsening or critical status.
pub fn drug_behavior_step<R: Rng + ?Sized>(
    rng: &mut R,
    patient: &mut PatientAgent,
    params: &AdherenceParams,
) -> DrugStep {
    let avail_row = params.availability[if patient.medication_available { 0 } else { 1 }];
    let u: f64 = rng.gen();
    patient.medication_available = u < avail_row[0];

    let tilt = params.tilt_for(
        AgeBand::from_age(patient.age),
        patient.gender,
        patient.temperament,
        patient.medication_available,
    );
    let row = params.resolved_adherence_row(patient.adherence, tilt);
    patient.adherence = ADHERENCE_LEVELS[sample_row(rng, &row)];

    let hrow = params.resolved_health_row(
        patient.adherence,
        patient.health,
        AgeBand::from_age(patient.age),
    );
    patient.health = HEALTH_LEVELS[sample_row(rng, &hrow)];

    let emergency = patient.adherence == AdherenceLevel::Poor
        && matches!(patient.health, HealthStatus::Worsening | HealthStatus::Critical);
    if emergency {
        patient.emergency_flag = true;
    }
    DrugStep {
        adherence: patient.adherence,
        health: patient.health,
        emergency_raised: emergency,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, RngStreams};
    use crate::specialty::{Channel, Specialty};
    use crate::testing::stationary_distribution;
    use crate::time::SimTime;

    fn test_patient(age: u32, gender: Gender, temperament: Temperament) -> PatientAgent {
        PatientAgent {
            file_number: 0,
            disease: Specialty::Cardiology,
            patient_type: crate::agents::patient::PatientType::Local,
            online_pref: false,
            hosp_pref: false,
            age,
            gender,
            temperament,
            state: crate::agents::patient::TreatmentState::HomeTreatment,
            adherence: AdherenceLevel::Good,
            health: HealthStatus::Stable,
            medication_available: true,
            emergency_flag: false,
            leave_flag: false,
            worry_counter: 0.0,
            worry_accrual_start: None,
            arrival_time: SimTime::ZERO,
            request_time: SimTime::ZERO,
            queue_wait_minutes: 0.0,
            wait_span_start: None,
            doctor: None,
            channel: Channel::Online,
            visits_completed: 0,
            rechecked_this_visit: false,
        }
    }

    fn identity_params() -> AdherenceParams {
        AdherenceParams {
            availability: [[1.0, 0.0], [0.0, 1.0]],
            adherence_base: [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            tilt_temperament: [0.0; 3],
            tilt_age: [0.0; 3],
            tilt_gender: [0.0; 2],
            tilt_unavailable: 0.0,
            health: [[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]; 3],
            health_tilt_age: [0.0; 3],
        }
    }

    #[test]
    fn identity_rows_leave_state_unchanged() {
        let params = identity_params();
        params.validate().unwrap();
        let mut p = test_patient(40, Gender::Female, Temperament::Normal);
        p.adherence = AdherenceLevel::Partial;
        p.health = HealthStatus::Worsening;
        let mut rng = RngStreams::new(1, 0, 0).fresh(Purpose::Adherence, 0);
        for _ in 0..50 {
            let step = drug_behavior_step(&mut rng, &mut p, &params);
            assert_eq!(step.adherence, AdherenceLevel::Partial);
            assert_eq!(step.health, HealthStatus::Worsening);
            assert!(!step.emergency_raised);
        }
    }

    #[test]
    fn forced_poor_critical_raises_emergency_after_one_step() {
        let mut params = identity_params();
        params.adherence_base = [
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0],
        ];
        params.health = [[[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]; 3];
        params.validate().unwrap();
        let mut p = test_patient(40, Gender::Female, Temperament::Normal);
        let mut rng = RngStreams::new(2, 0, 0).fresh(Purpose::Adherence, 0);
        let step = drug_behavior_step(&mut rng, &mut p, &params);
        assert_eq!(step.adherence, AdherenceLevel::Poor);
        assert_eq!(step.health, HealthStatus::Critical);
        assert!(step.emergency_raised);
        assert!(p.emergency_flag);
    }

    #[test]
    fn long_run_poor_fraction_matches_stationary_oracle() {
        // Reference cell (adult, female, normal temperament) with medication
        // pinned available: the chain is exactly the shipped base matrix.
        let mut params = AdherenceParams::default();
        params.availability = [[1.0, 0.0], [1.0, 0.0]];
        params.validate().unwrap();

        let matrix: Vec<Vec<f64>> = params
            .adherence_base
            .iter()
            .map(|r| r.to_vec())
            .collect();
        let pi = stationary_distribution(&matrix);

        let mut p = test_patient(40, Gender::Female, Temperament::Normal);
        let mut rng = RngStreams::new(3, 0, 0).fresh(Purpose::Adherence, 0);
        let n = 100_000;
        let mut poor = 0usize;
        for _ in 0..n {
            let step = drug_behavior_step(&mut rng, &mut p, &params);
            if step.adherence == AdherenceLevel::Poor {
                poor += 1;
            }
        }
        let frac = poor as f64 / n as f64;
        assert!(
            (frac - pi[2]).abs() < 0.01,
            "long-run poor fraction {frac} vs stationary {}",
            pi[2]
        );
        // Shipped default sits near 0.15 poor mass.
        assert!((pi[2] - 0.15).abs() < 0.02, "stationary poor mass {}", pi[2]);
    }

    #[test]
    fn malformed_rows_rejected_at_load() {
        let mut params = AdherenceParams::default();
        params.adherence_base[1] = [0.5, 0.4, 0.2];
        let err = params.validate().unwrap_err();
        assert!(matches!(err, AdherenceConfigError::BadRow { .. }));

        let mut params = AdherenceParams::default();
        params.availability[0] = [1.2, -0.2];
        assert!(matches!(
            params.validate().unwrap_err(),
            AdherenceConfigError::NegativeEntry { .. }
        ));
    }

    #[test]
    fn tilted_rows_stay_stochastic() {
        let params = AdherenceParams::default();
        for tilt in [-0.8, -0.3, 0.0, 0.2, 0.9] {
            for level in ADHERENCE_LEVELS {
                let row = params.resolved_adherence_row(level, tilt);
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn anxious_senior_tilts_toward_poor() {
        let params = AdherenceParams::default();
        let neutral = params.tilt_for(AgeBand::Adult, Gender::Female, Temperament::Normal, true);
        let skewed = params.tilt_for(AgeBand::Senior, Gender::Male, Temperament::Anxious, false);
        assert_eq!(neutral, 0.0);
        assert!(skewed > 0.3);
    }
}
