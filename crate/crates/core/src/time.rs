//! Simulation clock in minutes with a Saturday-first hospital week.

pub const MINUTES_PER_HOUR: f64 = 60.0;
pub const MINUTES_PER_DAY: f64 = 1440.0;
pub const DAYS_PER_WEEK: u64 = 7;

/// Minutes since the start of the run. Day 0 is a Saturday.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);

    pub fn from_minutes(minutes: f64) -> Self {
        debug_assert!(minutes.is_finite() && minutes >= 0.0);
        SimTime(minutes)
    }

    pub fn from_days(days: f64) -> Self {
        Self::from_minutes(days * MINUTES_PER_DAY)
    }

    pub fn minutes(self) -> f64 {
        self.0
    }

    pub fn days(self) -> f64 {
        self.0 / MINUTES_PER_DAY
    }

    pub fn day_index(self) -> u64 {
        (self.0 / MINUTES_PER_DAY).floor() as u64
    }

    pub fn weekday(self) -> Weekday {
        Weekday::from_index((self.day_index() % DAYS_PER_WEEK) as u8)
    }

    /// Minute offset within the current day, in [0, 1440).
    pub fn minute_of_day(self) -> f64 {
        self.0 - self.day_index() as f64 * MINUTES_PER_DAY
    }

    pub fn plus_minutes(self, minutes: f64) -> Self {
        Self::from_minutes(self.0 + minutes)
    }

    pub fn plus_days(self, days: f64) -> Self {
        self.plus_minutes(days * MINUTES_PER_DAY)
    }

    /// Total order consistent with IEEE comparison; used for calendar keys.
    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl std::fmt::Display for SimTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d{}+{:06.1}m", self.day_index(), self.minute_of_day())
    }
}

/// Weekday with the week starting on Saturday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weekday {
    Saturday = 0,
    Sunday = 1,
    Monday = 2,
    Tuesday = 3,
    Wednesday = 4,
    Thursday = 5,
    Friday = 6,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Saturday,
        Weekday::Sunday,
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
    ];

    pub fn from_index(i: u8) -> Self {
        Self::ALL[(i % 7) as usize]
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn day_and_weekday_math() {
        let t = SimTime::from_minutes(0.0);
        assert_eq!(t.day_index(), 0);
        assert_eq!(t.weekday(), Weekday::Saturday);

        let t = SimTime::from_days(1.0);
        assert_eq!(t.weekday(), Weekday::Sunday);

        let t = SimTime::from_days(7.0);
        assert_eq!(t.weekday(), Weekday::Saturday);

        let t = SimTime::from_minutes(1440.0 * 2.0 + 613.0);
        assert_eq!(t.day_index(), 2);
        assert_eq!(t.weekday(), Weekday::Monday);
        assert!((t.minute_of_day() - 613.0).abs() < 1e-9);
    }

    #[test]
    fn day_conversion_round_trip() {
        let t = SimTime::from_days(12.5);
        assert!((t.days() - 12.5).abs() < 1e-12);
        assert_eq!(t.day_index(), 12);
    }
}
