//! Time-ordered event queue with insertion-order tie breaking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::netmodel::Time;

struct Scheduled<E> {
    time: Time,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    // Reversed so the max-heap pops the earliest (time, seq).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Pops events in `(time, seq)` order, where `seq` is assigned on insertion.
pub struct EventQueue<E> {
    heap: BinaryHeap<Scheduled<E>>,
    next_seq: u64,
    now: Time,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: 0.0,
        }
    }

    pub fn now(&self) -> Time {
        self.now
    }

    /// Enqueues `event` at `time`.
    ///
    /// # Panics
    ///
    /// If `time` lies before the current time or is NaN.
    pub fn schedule(&mut self, time: Time, event: E) {
        assert!(
            time >= self.now,
            "event scheduled into the past: t={time} < now={}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Scheduled { time, seq, event });
    }

    pub fn pop(&mut self) -> Option<(Time, E)> {
        let s = self.heap.pop()?;
        self.now = s.time;
        Some((s.time, s.event))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Remaining events, in no particular order.
    pub fn drain(&mut self) -> impl Iterator<Item = E> + '_ {
        self.heap.drain().map(|s| s.event)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_times_pop_in_insertion_order() {
        let mut q = EventQueue::new();
        q.schedule(1.0, "A");
        q.schedule(1.0, "B");
        assert_eq!(q.pop(), Some((1.0, "A")));
        assert_eq!(q.pop(), Some((1.0, "B")));
        assert!(q.pop().is_none());
    }

    #[test]
    fn earlier_time_pops_first() {
        let mut q = EventQueue::new();
        q.schedule(2.0, "late");
        q.schedule(1.0, "early");
        assert_eq!(q.pop().unwrap().1, "early");
        assert_eq!(q.now(), 1.0);
        assert_eq!(q.pop().unwrap().1, "late");
    }

    #[test]
    #[should_panic(expected = "into the past")]
    fn scheduling_into_the_past_aborts() {
        let mut q = EventQueue::new();
        q.schedule(2.0, ());
        q.pop();
        q.schedule(1.0, ());
    }

    #[test]
    fn interleaved_order_is_lexicographic() {
        let mut q = EventQueue::new();
        let times = [3.0, 1.0, 2.0, 1.0, 3.0, 0.5];
        for (i, t) in times.iter().enumerate() {
            q.schedule(*t, i);
        }
        let order: Vec<usize> = std::iter::from_fn(|| q.pop().map(|(_, e)| e)).collect();
        assert_eq!(order, vec![5, 1, 3, 2, 0, 4]);
    }
}
