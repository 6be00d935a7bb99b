//! Unit-disk radio with a per-node transmit queue.
//!
//! Each node sends at most `capacity_pps` packets per second. Offered packets
//! wait in a FIFO of at most `queue_limit` entries; a packet offered to a full
//! queue is dropped at the sender. A transmission reaches every node within
//! `range_m` (closed disk) of the sender at the moment it leaves the queue and
//! arrives `prop_delay_s` later.

use std::collections::VecDeque;

use crate::netmodel::Time;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pos {
    pub x: f64,
    pub y: f64,
}

impl Pos {
    pub fn new(x: f64, y: f64) -> Self {
        Pos { x, y }
    }

    pub fn distance(self, other: Pos) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub range_m: f64,
    pub prop_delay_s: f64,
    /// Packets per second a node can put on the air; `inf` disables queueing.
    pub capacity_pps: f64,
    pub queue_limit: usize,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            range_m: 250.0,
            prop_delay_s: 0.001,
            capacity_pps: 200.0,
            queue_limit: 50,
        }
    }
}

impl ChannelModel {
    pub fn in_range(&self, a: Pos, b: Pos) -> bool {
        a.distance(b) <= self.range_m
    }
}

/// Transmit queue of one node. Only departure times are tracked; the kernel
/// carries the packet itself in the transmit event.
#[derive(Debug, Clone)]
pub struct Transmitter {
    waiting: VecDeque<Time>,
    last_departure: Time,
}

impl Default for Transmitter {
    fn default() -> Self {
        Transmitter {
            waiting: VecDeque::new(),
            last_departure: f64::NEG_INFINITY,
        }
    }
}

impl Transmitter {
    /// Offers a packet at `now`. Returns its departure time, or `None` if the
    /// queue is full.
    pub fn offer(&mut self, now: Time, model: &ChannelModel) -> Option<Time> {
        if model.capacity_pps.is_infinite() {
            return Some(now);
        }
        while self.waiting.front().is_some_and(|&t| t <= now) {
            self.waiting.pop_front();
        }
        if self.waiting.len() >= model.queue_limit {
            return None;
        }
        let departure = now.max(self.last_departure + 1.0 / model.capacity_pps);
        self.last_departure = departure;
        self.waiting.push_back(departure);
        Some(departure)
    }

    /// Packets still waiting to depart after `now`.
    pub fn backlog(&self, now: Time) -> usize {
        self.waiting.iter().filter(|&&t| t > now).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_disk_membership() {
        let ch = ChannelModel::default();
        let center = Pos::new(0.0, 0.0);
        assert!(ch.in_range(center, Pos::new(250.0, 0.0)));
        assert!(ch.in_range(center, Pos::new(0.0, -250.0)));
        assert!(!ch.in_range(center, Pos::new(250.0, 0.001)));
        assert!(ch.in_range(center, Pos::new(150.0, 200.0)));
    }

    #[test]
    fn idle_transmitter_sends_immediately() {
        let ch = ChannelModel::default();
        let mut tx = Transmitter::default();
        assert_eq!(tx.offer(3.0, &ch), Some(3.0));
        assert_eq!(tx.offer(3.0, &ch), Some(3.005));
        assert_eq!(tx.backlog(3.0), 1);
    }

    /// Per-second drop counts from an independent fluid model: once the queue
    /// has filled, every second serves `capacity` packets and drops the rest.
    #[test]
    fn overload_drops_the_excess_each_second() {
        let ch = ChannelModel::default();
        let mut tx = Transmitter::default();
        let offered_pps = 500u32;
        let seconds = 6usize;
        let mut drops = vec![0u32; seconds];
        for i in 0..offered_pps as usize * seconds {
            let t = i as f64 / f64::from(offered_pps);
            if tx.offer(t, &ch).is_none() {
                drops[(t.floor()) as usize] += 1;
            }
        }
        // First second: 500 offered, about 200 served, 50 queued.
        let expected_first = offered_pps - 200 - ch.queue_limit as u32;
        assert!(drops[0].abs_diff(expected_first) <= 1, "{drops:?}");
        for (s, d) in drops.iter().enumerate().skip(1) {
            assert!(d.abs_diff(300) <= 1, "second {s}: {d} drops");
        }
        let steady: u32 = drops[1..].iter().sum();
        assert!(steady >= 300 * (seconds as u32 - 1) - 1, "{steady}");
    }

    #[test]
    fn unconstrained_channel_never_queues() {
        let ch = ChannelModel {
            capacity_pps: f64::INFINITY,
            ..Default::default()
        };
        let mut tx = Transmitter::default();
        for _ in 0..10_000 {
            assert_eq!(tx.offer(1.0, &ch), Some(1.0));
        }
    }
}
