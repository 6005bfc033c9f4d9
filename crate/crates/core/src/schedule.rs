//! Weekly duty schedules for specialists.

use crate::time::{SimTime, Weekday, DAYS_PER_WEEK, MINUTES_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activity {
    Clinic,
    Hospital,
    Online,
}

impl std::fmt::Display for Activity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Activity::Clinic => "clinic",
            Activity::Hospital => "hospital",
            Activity::Online => "online",
        };
        f.write_str(s)
    }
}

/// Set of weekdays encoded as a bitmask (bit 0 = Saturday).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeekdaySet(u8);

impl WeekdaySet {
    pub const EVERY_DAY: WeekdaySet = WeekdaySet(0x7F);

    pub fn of(days: &[Weekday]) -> Self {
        let mut mask = 0u8;
        for d in days {
            mask |= 1 << d.index();
        }
        WeekdaySet(mask)
    }

    pub fn contains(self, day: Weekday) -> bool {
        self.0 & (1 << day.index()) != 0
    }
}

/// One recurring duty block: an activity on a set of weekdays at fixed hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeeklyBlock {
    pub activity: Activity,
    pub days: WeekdaySet,
    pub start_minute: f64,
    pub end_minute: f64,
}

impl WeeklyBlock {
    pub fn new(activity: Activity, days: WeekdaySet, start_minute: f64, end_minute: f64) -> Self {
        assert!(
            start_minute < end_minute && end_minute <= MINUTES_PER_DAY,
            "block must lie within one day"
        );
        WeeklyBlock {
            activity,
            days,
            start_minute,
            end_minute,
        }
    }

    pub fn duration_minutes(&self) -> f64 {
        self.end_minute - self.start_minute
    }
}

/// A concrete occurrence of a block on a specific day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockInstance {
    pub activity: Activity,
    pub start: SimTime,
    pub end: SimTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeeklySchedule {
    blocks: Vec<WeeklyBlock>,
}

impl WeeklySchedule {
    /// Panics if two blocks of the schedule overlap on any day; a doctor
    /// cannot be in two places at once.
    pub fn new(blocks: Vec<WeeklyBlock>) -> Self {
        for day in Weekday::ALL {
            let mut todays: Vec<&WeeklyBlock> =
                blocks.iter().filter(|b| b.days.contains(day)).collect();
            todays.sort_by(|a, b| a.start_minute.total_cmp(&b.start_minute));
            for pair in todays.windows(2) {
                assert!(
                    pair[0].end_minute <= pair[1].start_minute,
                    "overlapping blocks on {day:?}"
                );
            }
        }
        WeeklySchedule { blocks }
    }

    pub fn blocks(&self) -> &[WeeklyBlock] {
        &self.blocks
    }

    pub fn has_activity(&self, activity: Activity) -> bool {
        self.blocks.iter().any(|b| b.activity == activity)
    }

    /// Earliest time >= `now` at which a block of `activity` is running or
    /// starts. Returns `now` itself when already inside such a block, `None`
    /// when the schedule has no block of that activity at all.
    pub fn next_block_start(&self, now: SimTime, activity: Activity) -> Option<SimTime> {
        self.next_block_instance(now, activity).map(|inst| {
            if inst.start.minutes() <= now.minutes() {
                now
            } else {
                inst.start
            }
        })
    }

    /// The block instance in progress at `now` (if any) or the next one to
    /// start, for the given activity.
    pub fn next_block_instance(&self, now: SimTime, activity: Activity) -> Option<BlockInstance> {
        if !self.has_activity(activity) {
            return None;
        }
        let today = now.day_index();
        for offset in 0..=DAYS_PER_WEEK {
            let day = today + offset;
            let weekday = Weekday::from_index((day % DAYS_PER_WEEK) as u8);
            let day_start = day as f64 * MINUTES_PER_DAY;
            let mut candidates: Vec<&WeeklyBlock> = self
                .blocks
                .iter()
                .filter(|b| b.activity == activity && b.days.contains(weekday))
                .collect();
            candidates.sort_by(|a, b| a.start_minute.total_cmp(&b.start_minute));
            for block in candidates {
                let end = day_start + block.end_minute;
                if end > now.minutes() {
                    return Some(BlockInstance {
                        activity,
                        start: SimTime::from_minutes(day_start + block.start_minute),
                        end: SimTime::from_minutes(end),
                    });
                }
            }
        }
        None
    }

    /// Block instance of any activity covering `now`.
    pub fn block_at(&self, now: SimTime) -> Option<BlockInstance> {
        let day_start = now.day_index() as f64 * MINUTES_PER_DAY;
        let weekday = now.weekday();
        let m = now.minute_of_day();
        self.blocks
            .iter()
            .find(|b| b.days.contains(weekday) && b.start_minute <= m && m < b.end_minute)
            .map(|b| BlockInstance {
                activity: b.activity,
                start: SimTime::from_minutes(day_start + b.start_minute),
                end: SimTime::from_minutes(day_start + b.end_minute),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialty::Specialty;

    fn minutes(h: f64, m: f64) -> f64 {
        h * 60.0 + m
    }

    #[test]
    fn cardiology_clinic_queried_saturday_morning() {
        let sched = Specialty::Cardiology.weekly_schedule();
        // Saturday 09:00 -> clinic opens Saturday 10:00.
        let now = SimTime::from_minutes(minutes(9.0, 0.0));
        let t = sched.next_block_start(now, Activity::Clinic).unwrap();
        assert_eq!(t.minutes(), minutes(10.0, 0.0));
    }

    #[test]
    fn query_inside_block_returns_now() {
        let sched = Specialty::Cardiology.weekly_schedule();
        let now = SimTime::from_minutes(minutes(11.0, 0.0)); // Saturday 11:00
        let t = sched.next_block_start(now, Activity::Clinic).unwrap();
        assert_eq!(t, now);
    }

    #[test]
    fn paediatrics_clinic_queried_sunday_waits_for_next_saturday() {
        let sched = Specialty::Paediatrics.weekly_schedule();
        // Sunday is day 1; the only clinic day is Saturday.
        let now = SimTime::from_minutes(MINUTES_PER_DAY + minutes(9.0, 0.0));
        let t = sched.next_block_start(now, Activity::Clinic).unwrap();
        assert_eq!(t.minutes(), 7.0 * MINUTES_PER_DAY + minutes(10.0, 0.0));
        assert_eq!(t.weekday(), Weekday::Saturday);
    }

    #[test]
    fn absent_activity_is_signalled() {
        let sched = WeeklySchedule::new(vec![WeeklyBlock::new(
            Activity::Online,
            WeekdaySet::EVERY_DAY,
            minutes(8.0, 0.0),
            minutes(10.0, 0.0),
        )]);
        assert!(sched.next_block_start(SimTime::ZERO, Activity::Clinic).is_none());
    }

    #[test]
    fn next_block_start_is_idempotent() {
        let sched = Specialty::BreastOncology.weekly_schedule();
        for start_min in [0.0, 540.0, 1000.0, 3500.0, 9000.0] {
            let now = SimTime::from_minutes(start_min);
            for act in [Activity::Clinic, Activity::Hospital, Activity::Online] {
                let t1 = sched.next_block_start(now, act).unwrap();
                let t2 = sched.next_block_start(t1, act).unwrap();
                assert_eq!(t1, t2, "idempotence broken at {start_min} for {act}");
            }
        }
    }

    #[test]
    #[should_panic(expected = "overlapping blocks")]
    fn overlapping_blocks_rejected() {
        WeeklySchedule::new(vec![
            WeeklyBlock::new(Activity::Clinic, WeekdaySet::EVERY_DAY, 600.0, 780.0),
            WeeklyBlock::new(Activity::Online, WeekdaySet::EVERY_DAY, 700.0, 800.0),
        ]);
    }

    #[test]
    fn all_specialty_schedules_are_valid_and_cover_daily_hospital_rounds() {
        for spec in Specialty::ALL {
            let sched = spec.weekly_schedule();
            for day in 0..7u64 {
                let morning = SimTime::from_minutes(day as f64 * MINUTES_PER_DAY);
                let next = sched
                    .next_block_instance(morning, Activity::Hospital)
                    .expect("hospital block exists");
                // A ward round happens within two days everywhere.
                assert!(next.start.minutes() - morning.minutes() <= 2.0 * MINUTES_PER_DAY);
            }
        }
    }
}
