//! Time-ordered event queue.
//!
//! Ties at equal time are broken by a fixed kind rank (state changes first,
//! the probe last), then by entity id, then by insertion order, so a run is
//! fully determined by its seed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Arrival of the next failure from the failure process.
    FailureArrival,
    /// Flip one node's aliveness (recoveries and injected changes).
    Toggle(NodeId),
    PollTick(NodeId),
    MonitorSweep(u32),
    /// Tick of one hierarchy aggregator; leaves have the lowest ids.
    HierarchyExchange(u32),
    Probe,
}

impl EventKind {
    pub fn rank(self) -> u8 {
        match self {
            EventKind::FailureArrival | EventKind::Toggle(_) => 0,
            EventKind::PollTick(_) => 1,
            EventKind::MonitorSweep(_) => 2,
            EventKind::HierarchyExchange(_) => 3,
            EventKind::Probe => 4,
        }
    }

    fn entity(self) -> u32 {
        match self {
            EventKind::FailureArrival | EventKind::Probe => u32::MAX,
            EventKind::Toggle(id)
            | EventKind::PollTick(id)
            | EventKind::MonitorSweep(id)
            | EventKind::HierarchyExchange(id) => id,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug)]
struct Scheduled {
    event: Event,
    seq: u64,
}

impl Scheduled {
    fn key(&self) -> (f64, u8, u32, u64) {
        (
            self.event.time,
            self.event.kind.rank(),
            self.event.kind.entity(),
            self.seq,
        )
    }
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    now: f64,
    seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    /// Panics when `event.time` lies before the current time.
    pub fn schedule(&mut self, event: Event) {
        assert!(
            event.time >= self.now && event.time.is_finite(),
            "cannot schedule {:?} at {} (now {})",
            event.kind,
            event.time,
            self.now
        );
        self.heap.push(Scheduled { event, seq: self.seq });
        self.seq += 1;
    }

    pub fn schedule_at(&mut self, time: f64, kind: EventKind) {
        self.schedule(Event { time, kind });
    }

    pub fn pop(&mut self) -> Option<Event> {
        let s = self.heap.pop()?;
        self.now = s.event.time;
        Some(s.event)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|s| s.event.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
