//! Per-node AODV engine: rate-limited route discovery, request handling behind
//! the admission policy, reverse/forward route maintenance and replies.
//!
//! Handlers are synchronous and side-effect free outside the node they are
//! called on. They report what happened through outcome enums; the simulation
//! kernel turns those into transmissions and metrics.
//!
//! Only the destination answers a request. There are no HELLO messages, no
//! RERR and no local repair: a broken route shows up as a failed data delivery
//! and the source simply discovers again.

use std::collections::{BTreeMap, HashMap};

use crate::flood_control::{NeighborLedger, PolicyKind, PolicyParams, Verdict};
use crate::netmodel::{NodeId, RouteTable, RoutingTableEntry, RrepPacket, RreqPacket, Time};

#[derive(Debug, Clone, PartialEq)]
pub struct AodvParams {
    pub initial_ttl: u32,
    pub discovery_timeout: f64,
    pub rreq_retries: u32,
    pub seen_expiry: f64,
    pub route_lifetime: f64,
}

impl Default for AodvParams {
    fn default() -> Self {
        AodvParams {
            initial_ttl: 30,
            discovery_timeout: 1.0,
            rreq_retries: 2,
            seen_expiry: 5.0,
            route_lifetime: 10.0,
        }
    }
}

/// Everything a node needs to know about the protocol configuration.
#[derive(Debug, Clone, Copy)]
pub struct RoutingConfig<'a> {
    pub policy: PolicyKind,
    pub params: &'a PolicyParams,
    pub aodv: &'a AodvParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendingDiscovery {
    pub started_at: Time,
    /// Id of the most recent request actually sent, if any.
    pub rreq_id: Option<u32>,
    /// Attempts after the first, whether or not the budget let them out.
    /// Doubles as the token of the running timer.
    pub retries_used: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiscoveryStart {
    Sent(RreqPacket),
    Deferred,
    AlreadyPending,
    HaveRoute,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RreqOutcome {
    /// The admission policy refused the request.
    Rejected(Verdict),
    Duplicate,
    /// This node is the destination; `rrep` goes back to `next_hop`.
    Answered { rrep: RrepPacket, next_hop: NodeId },
    Forwarded(RreqPacket),
    BudgetExhausted,
    TtlExpired,
}

impl RreqOutcome {
    pub fn verdict(&self) -> Verdict {
        match self {
            RreqOutcome::Rejected(v) => *v,
            _ => Verdict::Accept,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RrepOutcome {
    /// The origin received the reply for a pending discovery.
    Completed { dest: NodeId, hops: u32, latency: f64 },
    /// The origin received a reply with nothing pending (already completed or failed).
    Late,
    Forward { rrep: RrepPacket, next_hop: NodeId },
    /// No reverse route to carry the reply further.
    Orphaned,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeoutOutcome {
    /// The discovery already finished or a newer attempt owns the timer.
    Stale,
    /// Attempt number `attempt` went out; its timer should be armed.
    Retry { rreq: RreqPacket, attempt: u32 },
    /// Attempt number `attempt` found the budget spent; its timer still runs.
    RetryDeferred { attempt: u32 },
    Failed,
}

/// Routing state of one node.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub seq_no: u32,
    rreq_id_counter: u32,
    pub route_table: RouteTable,
    seen_rreqs: HashMap<(NodeId, u32), Time>,
    pub ledger: NeighborLedger,
    budget_interval: u64,
    budget_used: u32,
    pending: BTreeMap<NodeId, PendingDiscovery>,
}

impl NodeState {
    pub fn new(id: NodeId) -> Self {
        NodeState {
            id,
            seq_no: 0,
            rreq_id_counter: 0,
            route_table: RouteTable::new(id),
            seen_rreqs: HashMap::new(),
            ledger: NeighborLedger::new(),
            budget_interval: 0,
            budget_used: 0,
            pending: BTreeMap::new(),
        }
    }

    pub fn pending(&self) -> &BTreeMap<NodeId, PendingDiscovery> {
        &self.pending
    }

    pub fn rreq_id_counter(&self) -> u32 {
        self.rreq_id_counter
    }

    /// RREQs originated or forwarded in the interval containing `now`.
    pub fn budget_used(&self, params: &PolicyParams, now: Time) -> u32 {
        if params.interval_index(now) == self.budget_interval {
            self.budget_used
        } else {
            0
        }
    }

    fn try_consume_budget(&mut self, params: &PolicyParams, now: Time) -> bool {
        let idx = params.interval_index(now);
        if idx != self.budget_interval {
            self.budget_interval = idx;
            self.budget_used = 0;
        }
        if self.budget_used < params.rate_limit {
            self.budget_used += 1;
            true
        } else {
            false
        }
    }

    fn mark_seen(&mut self, origin: NodeId, rreq_id: u32, now: Time, expiry: f64) {
        self.seen_rreqs.insert((origin, rreq_id), now + expiry);
    }

    fn next_rreq_id(&mut self) -> u32 {
        self.rreq_id_counter += 1;
        self.rreq_id_counter
    }

    /// Last sequence number known for `dest`, even from an expired entry.
    fn known_seq(&self, dest: NodeId) -> u32 {
        self.route_table
            .entries()
            .find(|e| e.dest == dest)
            .map_or(0, |e| e.dest_seq)
    }

    /// Builds and accounts a fresh request for `dest`, or returns `None` when
    /// this interval's request budget is spent.
    pub fn originate_discovery(&mut self, dest: NodeId, now: Time, cfg: &RoutingConfig<'_>) -> Option<RreqPacket> {
        if !self.try_consume_budget(cfg.params, now) {
            return None;
        }
        self.seq_no += 1;
        let rreq_id = self.next_rreq_id();
        self.mark_seen(self.id, rreq_id, now, cfg.aodv.seen_expiry);
        Some(RreqPacket {
            rreq_id,
            origin: self.id,
            origin_seq: self.seq_no,
            dest,
            dest_seq: self.known_seq(dest),
            hop_count: 0,
            ttl: cfg.aodv.initial_ttl,
            genuine: true,
        })
    }

    /// Builds a fabricated request that bypasses the budget. Only adversaries
    /// call this.
    pub fn fabricate_rreq(&mut self, dest: NodeId, now: Time, cfg: &RoutingConfig<'_>) -> RreqPacket {
        let rreq_id = self.next_rreq_id();
        self.mark_seen(self.id, rreq_id, now, cfg.aodv.seen_expiry);
        RreqPacket {
            rreq_id,
            origin: self.id,
            origin_seq: self.seq_no,
            dest,
            dest_seq: 0,
            hop_count: 0,
            ttl: cfg.aodv.initial_ttl,
            genuine: false,
        }
    }

    /// Opens a discovery for `dest` unless one is running or a route exists.
    pub fn begin_discovery(&mut self, dest: NodeId, now: Time, cfg: &RoutingConfig<'_>) -> DiscoveryStart {
        if self.route_table.lookup(dest, now).is_some() {
            return DiscoveryStart::HaveRoute;
        }
        if self.pending.contains_key(&dest) {
            return DiscoveryStart::AlreadyPending;
        }
        let sent = self.originate_discovery(dest, now, cfg);
        self.pending.insert(
            dest,
            PendingDiscovery {
                started_at: now,
                rreq_id: sent.as_ref().map(|p| p.rreq_id),
                retries_used: 0,
            },
        );
        match sent {
            Some(p) => DiscoveryStart::Sent(p),
            None => DiscoveryStart::Deferred,
        }
    }

    /// Fires when the timer of attempt `attempt` for `dest` runs out. A
    /// deferred attempt counts like a sent one, so a node whose budget stays
    /// spent gives up after the usual number of retries.
    pub fn discovery_timeout(&mut self, dest: NodeId, attempt: u32, now: Time, cfg: &RoutingConfig<'_>) -> TimeoutOutcome {
        let Some(p) = self.pending.get(&dest) else {
            return TimeoutOutcome::Stale;
        };
        if p.retries_used != attempt {
            return TimeoutOutcome::Stale;
        }
        if p.retries_used >= cfg.aodv.rreq_retries {
            self.pending.remove(&dest);
            return TimeoutOutcome::Failed;
        }
        let sent = self.originate_discovery(dest, now, cfg);
        let p = self.pending.get_mut(&dest).expect("pending discovery");
        p.retries_used += 1;
        let attempt = p.retries_used;
        match sent {
            Some(rreq) => {
                p.rreq_id = Some(rreq.rreq_id);
                TimeoutOutcome::Retry { rreq, attempt }
            }
            None => TimeoutOutcome::RetryDeferred { attempt },
        }
    }

    /// Processes a request heard from neighbor `from`.
    pub fn handle_rreq(&mut self, pkt: &RreqPacket, from: NodeId, now: Time, cfg: &RoutingConfig<'_>) -> RreqOutcome {
        let verdict = self.ledger.admit(cfg.policy, cfg.params, from, now);
        if !verdict.is_accept() {
            return RreqOutcome::Rejected(verdict);
        }

        let key = (pkt.origin, pkt.rreq_id);
        if self.seen_rreqs.get(&key).is_some_and(|&exp| now < exp) {
            return RreqOutcome::Duplicate;
        }
        self.mark_seen(pkt.origin, pkt.rreq_id, now, cfg.aodv.seen_expiry);

        self.route_table.update(
            RoutingTableEntry {
                dest: pkt.origin,
                next_hop: from,
                hop_count: pkt.hop_count + 1,
                dest_seq: pkt.origin_seq,
                expires_at: now + cfg.aodv.route_lifetime,
            },
            now,
        );

        if pkt.dest == self.id {
            self.seq_no = self.seq_no.max(pkt.dest_seq) + 1;
            return RreqOutcome::Answered {
                rrep: RrepPacket {
                    origin: pkt.origin,
                    dest: self.id,
                    dest_seq: self.seq_no,
                    hop_count: 0,
                },
                next_hop: from,
            };
        }
        if pkt.ttl <= 1 {
            return RreqOutcome::TtlExpired;
        }
        if !self.try_consume_budget(cfg.params, now) {
            return RreqOutcome::BudgetExhausted;
        }
        RreqOutcome::Forwarded(pkt.rebroadcast())
    }

    /// Processes a reply heard from neighbor `from`.
    pub fn handle_rrep(&mut self, pkt: &RrepPacket, from: NodeId, now: Time, cfg: &RoutingConfig<'_>) -> RrepOutcome {
        let hops = pkt.hop_count + 1;
        self.route_table.update(
            RoutingTableEntry {
                dest: pkt.dest,
                next_hop: from,
                hop_count: hops,
                dest_seq: pkt.dest_seq,
                expires_at: now + cfg.aodv.route_lifetime,
            },
            now,
        );

        if pkt.origin == self.id {
            return match self.pending.remove(&pkt.dest) {
                Some(p) => RrepOutcome::Completed {
                    dest: pkt.dest,
                    hops,
                    latency: now - p.started_at,
                },
                None => RrepOutcome::Late,
            };
        }

        let Some(reverse) = self.route_table.lookup(pkt.origin, now) else {
            return RrepOutcome::Orphaned;
        };
        let next_hop = reverse.next_hop;
        self.route_table
            .refresh(pkt.origin, now, now + cfg.aodv.route_lifetime);
        RrepOutcome::Forward {
            rrep: RrepPacket {
                hop_count: pkt.hop_count + 1,
                ..pkt.clone()
            },
            next_hop,
        }
    }

    /// Next hop for data toward `dst`, refreshing the route on use.
    pub fn next_hop_for_data(&mut self, dst: NodeId, now: Time, cfg: &RoutingConfig<'_>) -> Option<NodeId> {
        let next = self.route_table.lookup(dst, now)?.next_hop;
        self.route_table.refresh(dst, now, now + cfg.aodv.route_lifetime);
        Some(next)
    }

    /// Periodic cleanup of expired duplicate-cache and routing entries.
    pub fn housekeeping(&mut self, now: Time) {
        self.seen_rreqs.retain(|_, exp| now < *exp);
        self.route_table.purge_expired(now);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixture {
        params: PolicyParams,
        aodv: AodvParams,
    }

    impl Fixture {
        fn new() -> Self {
            Fixture {
                params: PolicyParams::default(),
                aodv: AodvParams::default(),
            }
        }

        fn cfg(&self, policy: PolicyKind) -> RoutingConfig<'_> {
            RoutingConfig {
                policy,
                params: &self.params,
                aodv: &self.aodv,
            }
        }
    }

    fn rreq(origin: u32, id: u32, dest: u32, hops: u32, ttl: u32) -> RreqPacket {
        RreqPacket {
            rreq_id: id,
            origin: NodeId(origin),
            origin_seq: 1,
            dest: NodeId(dest),
            dest_seq: 0,
            hop_count: hops,
            ttl,
            genuine: true,
        }
    }

    #[test]
    fn first_origination() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(0));
        let p = n.originate_discovery(NodeId(5), 0.0, &cfg).unwrap();
        assert_eq!((p.hop_count, p.origin_seq, p.rreq_id, p.ttl), (0, 1, 1, 30));
        assert!(p.genuine);
    }

    #[test]
    fn origination_respects_budget() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(0));
        for i in 0..10 {
            assert!(n.originate_discovery(NodeId(100 + i), 0.1, &cfg).is_some());
        }
        assert!(n.originate_discovery(NodeId(5), 0.2, &cfg).is_none());
        assert_eq!(n.rreq_id_counter(), 10, "deferred origination consumes no id");
        assert!(n.originate_discovery(NodeId(5), 1.0, &cfg).is_some(), "budget resets next interval");
    }

    #[test]
    fn repeat_discovery_gets_larger_id() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(0));
        let DiscoveryStart::Sent(first) = n.begin_discovery(NodeId(5), 0.0, &cfg) else {
            panic!("expected a request")
        };
        let TimeoutOutcome::Retry { rreq: second, .. } = n.discovery_timeout(NodeId(5), 0, 1.0, &cfg) else {
            panic!("expected a retry")
        };
        assert!(second.rreq_id > first.rreq_id);
        assert!(second.origin_seq > first.origin_seq);
    }

    #[test]
    fn retries_exhaust_into_failure() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(0));
        let DiscoveryStart::Sent(_) = n.begin_discovery(NodeId(5), 0.0, &cfg) else {
            panic!()
        };
        for attempt in 1..=2 {
            match n.discovery_timeout(NodeId(5), attempt - 1, attempt as f64, &cfg) {
                TimeoutOutcome::Retry { attempt: a, .. } => assert_eq!(a, attempt),
                other => panic!("attempt {attempt}: {other:?}"),
            }
        }
        assert_eq!(n.discovery_timeout(NodeId(5), 1, 3.0, &cfg), TimeoutOutcome::Stale);
        assert_eq!(n.discovery_timeout(NodeId(5), 2, 3.0, &cfg), TimeoutOutcome::Failed);
        assert!(n.pending().is_empty());
    }

    #[test]
    fn timeout_after_reply_is_noop() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(0));
        let DiscoveryStart::Sent(_) = n.begin_discovery(NodeId(5), 0.0, &cfg) else {
            panic!()
        };
        let rrep = RrepPacket {
            origin: NodeId(0),
            dest: NodeId(5),
            dest_seq: 1,
            hop_count: 1,
        };
        let out = n.handle_rrep(&rrep, NodeId(2), 0.4, &cfg);
        assert_eq!(
            out,
            RrepOutcome::Completed {
                dest: NodeId(5),
                hops: 2,
                latency: 0.4
            }
        );
        assert_eq!(n.discovery_timeout(NodeId(5), 0, 1.0, &cfg), TimeoutOutcome::Stale);
        assert_eq!(n.begin_discovery(NodeId(5), 1.0, &cfg), DiscoveryStart::HaveRoute);
    }

    #[test]
    fn destination_replies_without_rebroadcast() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(9));
        let out = n.handle_rreq(&rreq(0, 1, 9, 3, 27), NodeId(8), 0.0, &cfg);
        match out {
            RreqOutcome::Answered { rrep, next_hop } => {
                assert_eq!(next_hop, NodeId(8));
                assert_eq!(rrep.hop_count, 0);
                assert_eq!(rrep.origin, NodeId(0));
                assert!(rrep.dest_seq >= 1);
            }
            other => panic!("{other:?}"),
        }
        let rev = n.route_table.lookup(NodeId(0), 0.0).unwrap();
        assert_eq!((rev.next_hop, rev.hop_count), (NodeId(8), 4));
    }

    #[test]
    fn duplicates_are_dropped() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(4));
        let p = rreq(0, 1, 9, 1, 29);
        assert!(matches!(n.handle_rreq(&p, NodeId(1), 0.0, &cfg), RreqOutcome::Forwarded(_)));
        let before = n.route_table.clone();
        assert_eq!(n.handle_rreq(&p, NodeId(2), 0.001, &cfg), RreqOutcome::Duplicate);
        assert_eq!(
            before.lookup(NodeId(0), 0.0),
            n.route_table.lookup(NodeId(0), 0.0)
        );
    }

    #[test]
    fn forwarding_steps_header_and_respects_ttl() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(4));
        match n.handle_rreq(&rreq(0, 1, 9, 2, 5), NodeId(1), 0.0, &cfg) {
            RreqOutcome::Forwarded(q) => assert_eq!((q.hop_count, q.ttl), (3, 4)),
            other => panic!("{other:?}"),
        }
        assert_eq!(n.handle_rreq(&rreq(0, 2, 9, 2, 1), NodeId(1), 0.0, &cfg), RreqOutcome::TtlExpired);
    }

    #[test]
    fn forwarding_budget_is_shared_with_origination() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(4));
        for d in 0..6 {
            n.originate_discovery(NodeId(50 + d), 0.0, &cfg).unwrap();
        }
        let outcomes: Vec<_> = (0..6)
            .map(|i| n.handle_rreq(&rreq(1, i + 1, 9, 0, 30), NodeId(1), 0.1, &cfg))
            .collect();
        let forwarded = outcomes.iter().filter(|o| matches!(o, RreqOutcome::Forwarded(_))).count();
        assert_eq!(forwarded, 4);
        assert_eq!(outcomes[4], RreqOutcome::BudgetExhausted);
        assert_eq!(n.budget_used(&fx.params, 0.5), 10);
    }

    #[test]
    fn policy_verdict_precedes_duplicate_check() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::Acrr);
        let mut n = NodeState::new(NodeId(4));
        let mut verdicts = Vec::new();
        for i in 0..12 {
            verdicts.push(n.handle_rreq(&rreq(7, i + 1, 90, 0, 30), NodeId(7), 0.01 * i as f64, &cfg).verdict());
        }
        assert_eq!(verdicts[8], Verdict::BlacklistTriggered);
        assert!(verdicts[9..].iter().all(|v| *v == Verdict::DropBlacklisted));
    }

    #[test]
    fn intermediate_forwards_reply_and_installs_route() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(4));
        n.handle_rreq(&rreq(0, 1, 9, 1, 29), NodeId(1), 0.0, &cfg);
        let rrep = RrepPacket {
            origin: NodeId(0),
            dest: NodeId(9),
            dest_seq: 3,
            hop_count: 2,
        };
        match n.handle_rrep(&rrep, NodeId(6), 0.01, &cfg) {
            RrepOutcome::Forward { rrep, next_hop } => {
                assert_eq!(next_hop, NodeId(1));
                assert_eq!(rrep.hop_count, 3);
            }
            other => panic!("{other:?}"),
        }
        let fwd = n.route_table.lookup(NodeId(9), 0.01).unwrap();
        assert_eq!((fwd.next_hop, fwd.hop_count, fwd.dest_seq), (NodeId(6), 3, 3));
    }

    #[test]
    fn reply_without_reverse_route_is_orphaned() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(4));
        n.handle_rreq(&rreq(0, 1, 9, 1, 29), NodeId(1), 0.0, &cfg);
        let rrep = RrepPacket {
            origin: NodeId(0),
            dest: NodeId(9),
            dest_seq: 3,
            hop_count: 2,
        };
        // Reverse route installed at t=0 expires at t=10.
        assert_eq!(n.handle_rrep(&rrep, NodeId(6), 10.0, &cfg), RrepOutcome::Orphaned);
    }

    #[test]
    fn late_reply_installs_route_only() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(0));
        let rrep = RrepPacket {
            origin: NodeId(0),
            dest: NodeId(5),
            dest_seq: 1,
            hop_count: 0,
        };
        assert_eq!(n.handle_rrep(&rrep, NodeId(5), 0.0, &cfg), RrepOutcome::Late);
        assert!(n.route_table.lookup(NodeId(5), 0.0).is_some());
    }

    #[test]
    fn deferred_attempt_counts_toward_retries() {
        let fx = Fixture::new();
        let cfg = fx.cfg(PolicyKind::None);
        let mut n = NodeState::new(NodeId(0));
        for d in 0..10 {
            n.originate_discovery(NodeId(50 + d), 0.0, &cfg).unwrap();
        }
        assert_eq!(n.begin_discovery(NodeId(5), 0.5, &cfg), DiscoveryStart::Deferred);
        assert_eq!(n.pending()[&NodeId(5)].rreq_id, None);
        // Next interval: fresh budget, so the first retry goes out.
        let TimeoutOutcome::Retry { rreq, attempt: 1 } = n.discovery_timeout(NodeId(5), 0, 1.5, &cfg) else {
            panic!("expected a retry")
        };
        assert_eq!(n.pending()[&NodeId(5)].rreq_id, Some(rreq.rreq_id));
        assert_eq!(n.pending()[&NodeId(5)].started_at, 0.5);
        for d in 0..10 {
            n.originate_discovery(NodeId(70 + d), 2.0, &cfg).unwrap();
        }
        assert_eq!(n.discovery_timeout(NodeId(5), 1, 2.5, &cfg), TimeoutOutcome::RetryDeferred { attempt: 2 });
        assert_eq!(n.discovery_timeout(NodeId(5), 2, 3.5, &cfg), TimeoutOutcome::Failed);
    }
}
