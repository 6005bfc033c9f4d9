//! Future event list: a min-heap keyed on (fire time, sequence number).
//!
//! Ties on fire time are delivered in scheduling order, so replays with the
//! same seed produce the same trace. Cancelled events are tombstoned and
//! skipped on pop.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::time::SimTime;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("cannot schedule event at {requested} before current clock {clock}")]
    InPast { requested: f64, clock: f64 },
}

/// Opaque handle to a scheduled event; used for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Entry<P> {
    time: SimTime,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<P> Eq for Entry<P> {}

impl<P> Ord for Entry<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the earliest event on top.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct EventQueue<P> {
    heap: BinaryHeap<Entry<P>>,
    cancelled: HashSet<u64>,
    next_seq: u64,
    clock: SimTime,
    horizon: Option<SimTime>,
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            next_seq: 0,
            clock: SimTime::ZERO,
            horizon: None,
        }
    }

    /// Events strictly after the horizon are never delivered; the clock pins
    /// at the horizon once the calendar runs past it.
    pub fn with_horizon(horizon: SimTime) -> Self {
        let mut q = Self::new();
        q.horizon = Some(horizon);
        q
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn schedule(&mut self, t: SimTime, payload: P) -> Result<EventHandle, ScheduleError> {
        if t.total_cmp(&self.clock) == Ordering::Less {
            return Err(ScheduleError::InPast {
                requested: t.minutes(),
                clock: self.clock.minutes(),
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry {
            time: t,
            seq,
            payload,
        });
        Ok(EventHandle(seq))
    }

    pub fn cancel(&mut self, handle: EventHandle) {
        self.cancelled.insert(handle.0);
    }

    /// Pop the next live event, advancing the clock to its fire time.
    /// Returns `None` when the calendar is exhausted or only events beyond
    /// the horizon remain.
    pub fn pop(&mut self) -> Option<(SimTime, P)> {
        loop {
            let next_time = self.heap.peek()?.time;
            if let Some(h) = self.horizon {
                if next_time.total_cmp(&h) == Ordering::Greater {
                    self.clock = h;
                    return None;
                }
            }
            let entry = self.heap.pop().expect("peeked entry present");
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            self.clock = entry.time;
            return Some((entry.time, entry.payload));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.heap.len() <= self.cancelled.len()
    }
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}
