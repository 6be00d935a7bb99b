//! Per-node route-request admission.
//!
//! Every RREQ a node hears is judged against the neighbor that transmitted it
//! before any routing work happens. Three policies are available:
//!
//! * [`PolicyKind::None`]: plain AODV, every request is admitted.
//! * [`PolicyKind::Naive`]: fixed per-neighbor limits. Up to `ral` requests per
//!   interval are accepted from each neighbor, the rest are dropped, and a
//!   neighbor that exceeds `rbl` in one interval is blacklisted.
//! * [`PolicyKind::Acrr`]: the node splits its own rate limit `R` across the
//!   neighbors that were active recently. Each neighbor may deliver at most
//!   `avg = k * R / N` requests per interval, where `N` is the number of active
//!   neighbors, and a neighbor exceeding the burst ceiling `peak = alpha * R`
//!   is blacklisted.
//!
//! A neighbor is *active* in an interval if it delivered at least one request
//! in either of the two preceding intervals. `N` is fixed when an interval
//! begins, so every verdict within one interval uses the same `avg`.
//!
//! Blacklisting lasts `bt_base * bt_factor^(offenses - 1)` seconds, capped at
//! `bt_cap`. Offense counts are kept for the whole run.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::netmodel::{NodeId, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    None,
    Naive,
    Acrr,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::None, PolicyKind::Naive, PolicyKind::Acrr];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::None => "none",
            PolicyKind::Naive => "naive",
            PolicyKind::Acrr => "acrr",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "aodv" | "aodv-none" => Ok(PolicyKind::None),
            "naive" => Ok(PolicyKind::Naive),
            "acrr" => Ok(PolicyKind::Acrr),
            other => Err(format!("unknown policy `{other}` (expected none, naive or acrr)")),
        }
    }
}

/// Tunables shared by the admission policies and the route-request budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    /// RREQ_RATELIMIT: requests a node may originate or forward per interval.
    pub rate_limit: u32,
    /// Overlap factor applied to the per-neighbor share. Every neighbor relays
    /// its own copy of each flood, so the share has to cover that overlap.
    pub k: f64,
    /// Largest fraction of `rate_limit` one neighbor may use before it is
    /// blacklisted.
    pub alpha: f64,
    pub interval_len: f64,
    pub bt_base: f64,
    pub bt_factor: f64,
    pub bt_cap: f64,
    /// Naive per-neighbor accept limit.
    pub ral: u32,
    /// Naive per-neighbor blacklist limit.
    pub rbl: u32,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            rate_limit: 10,
            k: 4.0,
            alpha: 0.8,
            interval_len: 1.0,
            bt_base: 5.0,
            bt_factor: 2.0,
            bt_cap: 80.0,
            ral: 3,
            rbl: 10,
        }
    }
}

impl PolicyParams {
    /// Checks the parameter invariants, returning the offending field name and
    /// a message on failure.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.rate_limit < 1 {
            return Err(("rate_limit", "must be at least 1".into()));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(("k", format!("must be a positive number, got {}", self.k)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.interval_len > 0.0 && self.interval_len.is_finite()) {
            return Err(("interval_s", format!("must be positive, got {}", self.interval_len)));
        }
        if !(self.bt_base > 0.0 && self.bt_base.is_finite()) {
            return Err(("bt_base_s", format!("must be positive, got {}", self.bt_base)));
        }
        if !(self.bt_factor >= 1.0 && self.bt_factor.is_finite()) {
            return Err(("bt_factor", format!("must be at least 1, got {}", self.bt_factor)));
        }
        if self.bt_cap.is_nan() || self.bt_cap < self.bt_base {
            return Err(("bt_cap_s", format!("must be at least bt_base_s, got {}", self.bt_cap)));
        }
        if self.ral > self.rbl {
            return Err(("ral", format!("ral ({}) must not exceed rbl ({})", self.ral, self.rbl)));
        }
        Ok(())
    }

    /// True when the burst ceiling is at least the per-neighbor share for
    /// `active_n` neighbors, which holds whenever `active_n >= k / alpha`.
    pub fn peak_dominates_avg(&self, active_n: usize) -> bool {
        current_peak(self) >= current_avg(self, active_n)
    }

    /// Index of the interval containing `t`. Times within a relative 1e-9 of a
    /// boundary are snapped onto it so that `k * interval_len` lands in
    /// interval `k` despite rounding.
    pub fn interval_index(&self, t: Time) -> u64 {
        let x = t / self.interval_len;
        let r = x.round();
        let idx = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.floor() };
        idx.max(0.0) as u64
    }
}

/// Per-neighbor share for the current interval: `k * R / max(N, 1)`.
pub fn current_avg(params: &PolicyParams, active_n: usize) -> f64 {
    params.k * f64::from(params.rate_limit) / active_n.max(1) as f64
}

/// Burst ceiling: `alpha * R`.
pub fn current_peak(params: &PolicyParams) -> f64 {
    params.alpha * f64::from(params.rate_limit)
}

/// Blacklist duration for the `offense_count`-th offense (1-based).
pub fn blacklist_timeout(offense_count: u32, params: &PolicyParams) -> f64 {
    debug_assert!(offense_count >= 1);
    let exp = offense_count.saturating_sub(1).min(i32::MAX as u32) as i32;
    (params.bt_base * params.bt_factor.powi(exp)).min(params.bt_cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    DropOverAvg,
    DropBlacklisted,
    BlacklistTriggered,
    DropNaiveOverRal,
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborRecord {
    /// Requests counted from this neighbor in the current interval.
    pub rreq_count: u32,
    /// Counts of the previous interval and the one before it.
    pub prev_counts: [u32; 2],
    pub ignoring_until_interval_end: bool,
    pub blacklisted_until: Option<Time>,
    pub offense_count: u32,
}

impl NeighborRecord {
    pub fn is_active(&self) -> bool {
        self.prev_counts.iter().any(|&c| c > 0)
    }

    pub fn is_blacklisted(&self, now: Time) -> bool {
        self.blacklisted_until.is_some_and(|until| now < until)
    }

    fn shift(&mut self) {
        self.prev_counts = [self.rreq_count, self.prev_counts[0]];
        self.rreq_count = 0;
        self.ignoring_until_interval_end = false;
    }

    fn blacklist(&mut self, params: &PolicyParams, now: Time) {
        self.offense_count += 1;
        self.blacklisted_until = Some(now + blacklist_timeout(self.offense_count, params));
        self.ignoring_until_interval_end = false;
    }
}

/// Admission state one node keeps about each of its neighbors.
#[derive(Debug, Clone, Default)]
pub struct NeighborLedger {
    records: BTreeMap<NodeId, NeighborRecord>,
    interval_index: u64,
    interval_start: Time,
    active_n: usize,
}

impl NeighborLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn interval_index(&self) -> u64 {
        self.interval_index
    }

    pub fn interval_start(&self) -> Time {
        self.interval_start
    }

    /// Active neighbor count `N` frozen at the start of the current interval.
    pub fn active_neighbors(&self) -> usize {
        self.active_n
    }

    pub fn record(&self, neighbor: NodeId) -> Option<&NeighborRecord> {
        self.records.get(&neighbor)
    }

    pub fn is_blacklisted(&self, neighbor: NodeId, now: Time) -> bool {
        self.records.get(&neighbor).is_some_and(|r| r.is_blacklisted(now))
    }

    /// Rolls the ledger forward over every interval boundary up to `now` and
    /// lifts blacklists that have run out.
    pub fn advance_interval(&mut self, params: &PolicyParams, now: Time) {
        let target = params.interval_index(now);
        if target > self.interval_index {
            // Two empty shifts clear all history, so at most three are needed.
            let shifts = (target - self.interval_index).min(3);
            for record in self.records.values_mut() {
                for _ in 0..shifts {
                    record.shift();
                }
            }
            self.interval_index = target;
            self.interval_start = target as f64 * params.interval_len;
            self.active_n = self.records.values().filter(|r| r.is_active()).count();
        }
        for record in self.records.values_mut() {
            if record.blacklisted_until.is_some_and(|until| until <= now) {
                record.blacklisted_until = None;
            }
        }
    }

    fn debug_check_interval(&self, params: &PolicyParams, now: Time) {
        debug_assert_eq!(
            params.interval_index(now),
            self.interval_index,
            "verdict requested at t={now} outside the current interval; advance_interval first"
        );
    }

    /// Judges one RREQ from `neighbor` under the ACRR rules.
    pub fn acrr_on_rreq(&mut self, params: &PolicyParams, neighbor: NodeId, now: Time) -> Verdict {
        self.debug_check_interval(params, now);
        let avg = current_avg(params, self.active_n);
        let peak = current_peak(params);
        let record = self.records.entry(neighbor).or_default();
        if record.is_blacklisted(now) {
            return Verdict::DropBlacklisted;
        }
        record.rreq_count += 1;
        let count = f64::from(record.rreq_count);
        if count > peak {
            record.blacklist(params, now);
            return Verdict::BlacklistTriggered;
        }
        if record.ignoring_until_interval_end || count > avg {
            record.ignoring_until_interval_end = true;
            return Verdict::DropOverAvg;
        }
        Verdict::Accept
    }

    /// Judges one RREQ from `neighbor` under the fixed-limit rules.
    pub fn naive_on_rreq(&mut self, params: &PolicyParams, neighbor: NodeId, now: Time) -> Verdict {
        self.debug_check_interval(params, now);
        let record = self.records.entry(neighbor).or_default();
        if record.is_blacklisted(now) {
            return Verdict::DropBlacklisted;
        }
        record.rreq_count += 1;
        if record.rreq_count > params.rbl {
            record.blacklist(params, now);
            return Verdict::BlacklistTriggered;
        }
        if record.rreq_count > params.ral {
            return Verdict::DropNaiveOverRal;
        }
        Verdict::Accept
    }

    /// Advances to `now` and judges the request under `kind`.
    pub fn admit(&mut self, kind: PolicyKind, params: &PolicyParams, neighbor: NodeId, now: Time) -> Verdict {
        match kind {
            PolicyKind::None => Verdict::Accept,
            PolicyKind::Naive => {
                self.advance_interval(params, now);
                self.naive_on_rreq(params, neighbor, now)
            }
            PolicyKind::Acrr => {
                self.advance_interval(params, now);
                self.acrr_on_rreq(params, neighbor, now)
            }
        }
    }
}
