//! Hospital-section agents: bed pools, waiting lists and the
//! compatible-section borrowing protocol.

use crate::agents::patient::PatientId;
use crate::specialty::Specialty;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectionState {
    NormalCapacity,
    /// Lending: surplus capacity has been handed to a section in shortage.
    Borrow,
    /// Borrowing: running on extra beds taken from a partner section.
    TakeOthers,
}

impl SectionState {
    pub fn label(self) -> &'static str {
        match self {
            SectionState::NormalCapacity => "normal_capacity",
            SectionState::Borrow => "borrow",
            SectionState::TakeOthers => "take_others",
        }
    }
}

/// Entry in a section's bed waiting list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitingPatient {
    pub patient: PatientId,
    pub request_time: SimTime,
    pub tourist: bool,
}

/// A booked future admission (scheduled-booking policy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BedBooking {
    pub patient: PatientId,
    pub request_time: SimTime,
    pub start: SimTime,
    pub projected_end: SimTime,
}

#[derive(Debug, Clone)]
pub struct SectionAgent {
    pub spec: Specialty,
    /// Configured bed count.
    pub beds: u32,
    /// Running bed count, shifted while lending or borrowing.
    pub total_beds: u32,
    pub occupied: u32,
    pub state: SectionState,
    /// Partner section index while lending/borrowing.
    pub partner: Option<usize>,
    /// Beds currently moved; zero exactly in the normal state.
    pub moved_beds: u32,

    pub waiting: Vec<WaitingPatient>,
    /// Future admissions booked through the scheduling policy, with the
    /// booking-request time of each patient kept alongside.
    pub bed_schedule: Vec<BedBooking>,
    /// Projected (start, end) occupancy intervals of current inpatients.
    pub occupancy_projection: Vec<(f64, f64)>,
}

impl SectionAgent {
    pub fn new(spec: Specialty, beds: u32) -> Self {
        SectionAgent {
            spec,
            beds,
            total_beds: beds,
            occupied: 0,
            state: SectionState::NormalCapacity,
            partner: None,
            moved_beds: 0,
            waiting: Vec::new(),
            bed_schedule: Vec::new(),
            occupancy_projection: Vec::new(),
        }
    }

    pub fn free_beds(&self) -> u32 {
        self.total_beds.saturating_sub(self.occupied)
    }

    /// Shortage condition: a waiting list at or beyond the threshold with
    /// every bed taken.
    pub fn needs_capacity(&self, shortage_threshold: usize) -> bool {
        self.occupied >= self.total_beds && self.waiting.len() >= shortage_threshold
    }

    /// Lender condition: more than half of the running capacity free.
    pub fn has_spare_capacity(&self) -> bool {
        self.free_beds() as f64 > self.total_beds as f64 / 2.0
    }

    /// Earliest projected time at or after `now` with a free bed, given the
    /// current inpatients' projected stays and already-booked admissions.
    pub fn projected_free_time(&self, now: SimTime, stay_minutes: f64) -> SimTime {
        let capacity = self.total_beds as usize;
        let mut intervals: Vec<(f64, f64)> = self.occupancy_projection.clone();
        intervals.extend(
            self.bed_schedule
                .iter()
                .map(|b| (b.start.minutes(), b.projected_end.minutes())),
        );
        let mut candidates: Vec<f64> = intervals
            .iter()
            .map(|&(_, end)| end)
            .filter(|&end| end > now.minutes())
            .collect();
        candidates.push(now.minutes());
        candidates.sort_by(|a, b| a.total_cmp(b));
        for start in candidates {
            let window = (start, start + stay_minutes);
            let load = intervals
                .iter()
                .filter(|&&(s, e)| s < window.1 && e > window.0)
                .count();
            if load < capacity {
                return SimTime::from_minutes(start);
            }
        }
        // All intervals overlap everywhere (cannot happen with finite stays).
        SimTime::from_minutes(
            intervals
                .iter()
                .map(|&(_, e)| e)
                .fold(now.minutes(), f64::max),
        )
    }
}

/// Record of one executed bed transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BedTransfer {
    pub lender: usize,
    pub requester: usize,
    pub beds: u32,
}

/// Move half of the best lender's free beds to a section in shortage.
///
/// The requesting section must be in shortage and must itself be eligible
/// (cardiology never participates). Among eligible lenders in the normal
/// state, the one with the most free beds lends `floor(free / 2)`. Returns
/// `None` when nothing can move.
pub fn capacity_rebalance(
    requester_idx: usize,
    sections: &mut [SectionAgent],
    shortage_threshold: usize,
) -> Option<BedTransfer> {
    let requester = &sections[requester_idx];
    if requester.spec == Specialty::Cardiology {
        return None;
    }
    if requester.state != SectionState::NormalCapacity
        || !requester.needs_capacity(shortage_threshold)
    {
        return None;
    }

    let mut best: Option<(usize, u32)> = None;
    for (i, s) in sections.iter().enumerate() {
        if i == requester_idx
            || s.spec == Specialty::Cardiology
            || s.state != SectionState::NormalCapacity
            || !s.has_spare_capacity()
        {
            continue;
        }
        let lendable = s.free_beds() / 2;
        if lendable == 0 {
            continue;
        }
        match best {
            Some((_, free)) if s.free_beds() <= free => {}
            _ => best = Some((i, s.free_beds())),
        }
    }
    let (lender_idx, _) = best?;
    let beds = sections[lender_idx].free_beds() / 2;

    let lender = &mut sections[lender_idx];
    lender.total_beds -= beds;
    lender.state = SectionState::Borrow;
    lender.partner = Some(requester_idx);
    lender.moved_beds = beds;

    let requester = &mut sections[requester_idx];
    requester.total_beds += beds;
    requester.state = SectionState::TakeOthers;
    requester.partner = Some(lender_idx);
    requester.moved_beds = beds;

    Some(BedTransfer {
        lender: lender_idx,
        requester: requester_idx,
        beds,
    })
}

/// Undo a transfer once the borrower's waiting list has cleared and the
/// borrowed beds are physically empty again.
pub fn try_return_borrowed_beds(
    requester_idx: usize,
    sections: &mut [SectionAgent],
) -> Option<BedTransfer> {
    let requester = &sections[requester_idx];
    if requester.state != SectionState::TakeOthers {
        return None;
    }
    let beds = requester.moved_beds;
    if !requester.waiting.is_empty() || requester.occupied + beds > requester.total_beds {
        return None;
    }
    let lender_idx = requester.partner.expect("borrowing section has a partner");

    let requester = &mut sections[requester_idx];
    requester.total_beds -= beds;
    requester.state = SectionState::NormalCapacity;
    requester.partner = None;
    requester.moved_beds = 0;

    let lender = &mut sections[lender_idx];
    lender.total_beds += beds;
    lender.state = SectionState::NormalCapacity;
    lender.partner = None;
    lender.moved_beds = 0;

    Some(BedTransfer {
        lender: lender_idx,
        requester: requester_idx,
        beds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_sections(beds: [u32; 5]) -> Vec<SectionAgent> {
        Specialty::ALL
            .iter()
            .zip(beds)
            .map(|(&s, b)| SectionAgent::new(s, b))
            .collect()
    }

    fn fill_waiting(section: &mut SectionAgent, n: usize) {
        for i in 0..n {
            section.waiting.push(WaitingPatient {
                patient: i as PatientId,
                request_time: SimTime::from_minutes(i as f64),
                tourist: false,
            });
        }
    }

    #[test]
    fn lender_with_ten_free_gives_five() {
        let mut sections = five_sections([40, 50, 12, 20, 60]);
        // Section 3 (index 2) in shortage; section 5 (index 4) has 10 of 60 free... make it spare.
        sections[2].occupied = 12;
        fill_waiting(&mut sections[2], 3);
        sections[4].occupied = 50; // 10 free but not > 50% of capacity
        sections[1].occupied = 40; // 10 free of 50, not > 50%
        sections[3].occupied = 10; // 10 free of 20, not strictly > 50%
        assert!(capacity_rebalance(2, &mut sections, 3).is_none());

        sections[3].occupied = 8; // 12 free of 20: spare
        sections[3].total_beds = 20;
        let t = capacity_rebalance(2, &mut sections, 3).unwrap();
        assert_eq!(t.lender, 3);
        assert_eq!(t.beds, 6);
        assert_eq!(sections[2].total_beds, 18);
        assert_eq!(sections[3].total_beds, 14);
        assert_eq!(sections[2].state, SectionState::TakeOthers);
        assert_eq!(sections[3].state, SectionState::Borrow);
    }

    #[test]
    fn most_free_beds_wins_and_lends_half() {
        let mut sections = five_sections([40, 50, 30, 20, 60]);
        sections[1].occupied = 20; // 30 free of 50: spare
        sections[4].occupied = 20; // 40 free of 60: spare, most free
        sections[2].occupied = 30;
        fill_waiting(&mut sections[2], 4);
        let t = capacity_rebalance(2, &mut sections, 3).unwrap();
        assert_eq!(t.lender, 4);
        assert_eq!(t.beds, 20);
    }

    #[test]
    fn cardiology_never_borrows_nor_lends() {
        let mut sections = five_sections([40, 50, 30, 20, 60]);
        sections[0].occupied = 40;
        fill_waiting(&mut sections[0], 5);
        sections[1].occupied = 10;
        assert!(capacity_rebalance(0, &mut sections, 3).is_none());

        // And an empty cardiology is never chosen as a lender.
        sections[0].occupied = 0;
        sections[1].occupied = 50;
        sections[2].occupied = 30;
        sections[3].occupied = 20;
        sections[4].occupied = 60;
        fill_waiting(&mut sections[2], 5);
        assert!(capacity_rebalance(2, &mut sections, 3).is_none());
        assert_eq!(sections[0].state, SectionState::NormalCapacity);
    }

    #[test]
    fn beds_conserved_through_transfer_and_return() {
        let mut sections = five_sections([40, 50, 30, 20, 60]);
        let baseline_total: u32 = sections.iter().map(|s| s.beds).sum();
        sections[2].occupied = 30;
        fill_waiting(&mut sections[2], 3);
        sections[4].occupied = 10;
        let t = capacity_rebalance(2, &mut sections, 3).unwrap();
        let running: u32 = sections.iter().map(|s| s.total_beds).sum();
        assert_eq!(running, baseline_total);

        // Not returnable while the borrowed beds are occupied.
        sections[2].waiting.clear();
        sections[2].occupied = sections[2].total_beds;
        assert!(try_return_borrowed_beds(2, &mut sections).is_none());

        sections[2].occupied = 20;
        let back = try_return_borrowed_beds(2, &mut sections).unwrap();
        assert_eq!(back.beds, t.beds);
        for s in &sections {
            assert_eq!(s.total_beds, s.beds);
            assert_eq!(s.state, SectionState::NormalCapacity);
            assert_eq!(s.moved_beds, 0);
        }
    }

    #[test]
    fn no_transfer_when_no_eligible_lender() {
        let mut sections = five_sections([40, 50, 30, 20, 60]);
        for s in sections.iter_mut().skip(1) {
            s.occupied = s.total_beds;
        }
        fill_waiting(&mut sections[2], 3);
        assert!(capacity_rebalance(2, &mut sections, 3).is_none());
    }

    #[test]
    fn projected_free_time_scans_interval_endpoints() {
        let mut s = SectionAgent::new(Specialty::InternalMedicine, 2);
        s.occupied = 2;
        s.occupancy_projection = vec![(0.0, 100.0), (0.0, 250.0)];
        let t = s.projected_free_time(SimTime::from_minutes(10.0), 50.0);
        assert_eq!(t.minutes(), 100.0);
        // A booked future admission occupies its window too.
        s.bed_schedule.push(BedBooking {
            patient: 9,
            request_time: SimTime::ZERO,
            start: SimTime::from_minutes(100.0),
            projected_end: SimTime::from_minutes(400.0),
        });
        let t = s.projected_free_time(SimTime::from_minutes(10.0), 50.0);
        assert_eq!(t.minutes(), 250.0);
    }
}
