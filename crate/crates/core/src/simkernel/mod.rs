//! Deterministic discrete-event engine.
//!
//! One [`Simulation`] owns every node, the event queue and the metrics of a
//! single run. Events execute in `(time, insertion order)` order and every
//! random draw comes from a ChaCha stream keyed by `(seed, stream, node)`, so
//! a `(config, seed)` pair always produces the same run.

pub mod channel;
pub mod mobility;
pub mod queue;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{adversary_tick, select_malicious, FloodState};
use crate::aodv::{DiscoveryStart, NodeState, RoutingConfig, RreqOutcome, RrepOutcome, TimeoutOutcome};
use crate::config::{ConfigError, ScenarioConfig};
use crate::flood_control::Verdict;
use crate::metrics::{BlacklistEvent, MetricsReport, RouteRecord};
use crate::netmodel::{DataPacket, NodeId, Packet, RreqPacket, Time};

use channel::{Pos, Transmitter};
use mobility::MobilityState;
use queue::EventQueue;

/// Independent random streams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Mobility = 2,
    Adversary = 3,
    Flows = 4,
    FloodTargets = 5,
}

/// Generator for `(seed, stream, index)`.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 32) | (index & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Broadcast,
    Unicast(NodeId),
}

#[derive(Debug, Clone)]
pub enum Event {
    PacketDelivery { to: NodeId, from: NodeId, packet: Packet },
    /// A queued packet leaves its sender.
    Transmit { node: NodeId, target: Target, packet: Packet },
    IntervalTick { index: u64 },
    DiscoveryTimeout { node: NodeId, dest: NodeId, attempt: u32 },
    DataTick { flow: usize },
    AdversaryTick { node: NodeId, index: u64 },
    /// Explicit route request without data traffic.
    RouteRequest { node: NodeId, dest: NodeId },
    SimulationEnd,
}

/// Optional fine-grained record of a run, for audits.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceRecord {
    /// A route request left `node`'s routing layer (budgeted unless fabricated).
    RreqEmitted { time: Time, node: NodeId, fabricated: bool },
    Verdict { time: Time, judge: NodeId, from: NodeId, verdict: Verdict },
    RouteFormed { time: Time, origin: NodeId, dest: NodeId, hops: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub src: NodeId,
    pub dst: NodeId,
    pub start: Time,
}

struct SimNode {
    state: NodeState,
    mobility: MobilityState,
    tx: Transmitter,
    flood: Option<FloodState>,
    target_rng: ChaCha8Rng,
}

/// Assembles a [`Simulation`], optionally overriding the seeded placement,
/// adversary choice and traffic.
pub struct SimulationBuilder {
    cfg: ScenarioConfig,
    seed: u64,
    positions: Option<Vec<Pos>>,
    malicious: Option<Vec<NodeId>>,
    flows: Option<Vec<Flow>>,
    requests: Vec<(Time, NodeId, NodeId)>,
    trace: bool,
}

impl SimulationBuilder {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Self {
        SimulationBuilder {
            cfg: cfg.clone(),
            seed,
            positions: None,
            malicious: None,
            flows: None,
            requests: Vec::new(),
            trace: false,
        }
    }

    /// Fixed initial positions, one per node.
    pub fn positions(mut self, positions: Vec<Pos>) -> Self {
        self.positions = Some(positions);
        self
    }

    pub fn malicious(mut self, nodes: Vec<NodeId>) -> Self {
        self.malicious = Some(nodes);
        self
    }

    pub fn flows(mut self, flows: Vec<Flow>) -> Self {
        self.flows = Some(flows);
        self
    }

    /// Schedules a bare route discovery from `origin` to `dest` at `time`.
    pub fn request_route(mut self, time: Time, origin: NodeId, dest: NodeId) -> Self {
        self.requests.push((time, origin, dest));
        self
    }

    pub fn trace(mut self, enabled: bool) -> Self {
        self.trace = enabled;
        self
    }

    pub fn build(self) -> Result<Simulation, ConfigError> {
        let cfg = self.cfg;
        cfg.validate()?;
        let n = cfg.node_count;
        let seed = self.seed;
        let bad = |path: &str, msg: String| ConfigError::Field {
            path: path.to_string(),
            message: msg,
        };

        let positions = match self.positions {
            Some(p) if p.len() != n => {
                return Err(bad("positions", format!("expected {n} positions, got {}", p.len())));
            }
            Some(p) => p,
            None => (0..n)
                .map(|i| cfg.arena.random_point(&mut stream_rng(seed, Stream::Placement, i as u64)))
                .collect(),
        };

        let malicious_ids = match self.malicious {
            Some(m) => {
                if let Some(id) = m.iter().find(|id| id.index() >= n) {
                    return Err(bad("malicious", format!("node {id} does not exist")));
                }
                let mut m = m;
                m.sort_unstable();
                m.dedup();
                m
            }
            None => select_malicious(&cfg.adversary, n, &mut stream_rng(seed, Stream::Adversary, 0)),
        };
        let mut malicious = vec![false; n];
        for id in &malicious_ids {
            malicious[id.index()] = true;
        }

        let flows = match self.flows {
            Some(f) => f,
            None => generate_flows(&cfg, &malicious, seed),
        };
        for f in &flows {
            if f.src.index() >= n || f.dst.index() >= n || f.src == f.dst {
                return Err(bad("flows", format!("invalid flow {} -> {}", f.src, f.dst)));
            }
        }

        let nodes = (0..n)
            .map(|i| SimNode {
                state: NodeState::new(NodeId(i as u32)),
                mobility: MobilityState::new(
                    positions[i],
                    &cfg.mobility,
                    &cfg.arena,
                    stream_rng(seed, Stream::Mobility, i as u64),
                ),
                tx: Transmitter::default(),
                flood: malicious[i].then(FloodState::default),
                target_rng: stream_rng(seed, Stream::FloodTargets, i as u64),
            })
            .collect();

        let mut queue = EventQueue::new();
        let end = cfg.sim_time_s;
        queue.schedule(end, Event::SimulationEnd);
        if cfg.params.interval_len < end {
            queue.schedule(cfg.params.interval_len, Event::IntervalTick { index: 1 });
        }
        for (i, f) in flows.iter().enumerate() {
            if f.start < end {
                queue.schedule(f.start, Event::DataTick { flow: i });
            }
        }
        for id in &malicious_ids {
            queue.schedule(0.0, Event::AdversaryTick { node: *id, index: 0 });
        }
        for &(t, origin, dest) in &self.requests {
            if origin.index() >= n {
                return Err(bad("requests", format!("node {origin} does not exist")));
            }
            if t < end {
                queue.schedule(t, Event::RouteRequest { node: origin, dest });
            }
        }

        let metrics = MetricsReport {
            policy: Some(cfg.policy),
            seed,
            malicious_nodes: malicious_ids,
            ..Default::default()
        };

        Ok(Simulation {
            cfg: Arc::new(cfg),
            queue,
            nodes,
            flows,
            malicious,
            positions,
            positions_at: f64::NAN,
            metrics,
            trace: self.trace.then(Vec::new),
            finished: false,
        })
    }
}

fn generate_flows(cfg: &ScenarioConfig, malicious: &[bool], seed: u64) -> Vec<Flow> {
    let honest: Vec<NodeId> = (0..cfg.node_count)
        .filter(|&i| !malicious[i])
        .map(|i| NodeId(i as u32))
        .collect();
    if honest.len() < 2 {
        return Vec::new();
    }
    let mut rng = stream_rng(seed, Stream::Flows, 0);
    (0..cfg.traffic.flow_count)
        .map(|_| {
            let src = honest[rng.random_range(0..honest.len())];
            let dst = loop {
                let d = honest[rng.random_range(0..honest.len())];
                if d != src {
                    break d;
                }
            };
            let start = if cfg.traffic.start_window_s > 0.0 {
                rng.random_range(0.0..cfg.traffic.start_window_s)
            } else {
                0.0
            };
            Flow { src, dst, start }
        })
        .collect()
}

/// One simulation run.
pub struct Simulation {
    cfg: Arc<ScenarioConfig>,
    queue: EventQueue<Event>,
    nodes: Vec<SimNode>,
    flows: Vec<Flow>,
    malicious: Vec<bool>,
    positions: Vec<Pos>,
    positions_at: Time,
    metrics: MetricsReport,
    trace: Option<Vec<TraceRecord>>,
    finished: bool,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self, ConfigError> {
        SimulationBuilder::new(cfg, seed).build()
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.index()].state
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn is_malicious(&self, id: NodeId) -> bool {
        self.malicious[id.index()]
    }

    /// Node positions as of the last transmission (initial positions before
    /// the run).
    pub fn positions(&self) -> &[Pos] {
        &self.positions
    }

    pub fn report(&self) -> &MetricsReport {
        &self.metrics
    }

    pub fn trace(&self) -> &[TraceRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Runs to `SimulationEnd` and returns the report.
    pub fn run(mut self) -> MetricsReport {
        self.run_to_end();
        self.metrics
    }

    /// Runs to `SimulationEnd`, keeping the simulation around for inspection.
    pub fn run_to_end(&mut self) {
        if self.finished {
            return;
        }
        while let Some((now, event)) = self.queue.pop() {
            if let Event::SimulationEnd = event {
                break;
            }
            self.handle(now, event);
        }
        for event in self.queue.drain() {
            match event {
                Event::Transmit { .. } => self.metrics.tx_queued_at_end += 1,
                Event::PacketDelivery { .. } => self.metrics.in_flight_at_end += 1,
                _ => {}
            }
        }
        self.finished = true;
    }

    fn record(&mut self, rec: TraceRecord) {
        if let Some(t) = self.trace.as_mut() {
            t.push(rec);
        }
    }

    fn handle(&mut self, now: Time, event: Event) {
        match event {
            Event::PacketDelivery { to, from, packet } => self.on_delivery(now, to, from, packet),
            Event::Transmit { node, target, packet } => self.on_transmit(now, node, target, packet),
            Event::IntervalTick { index } => self.on_interval(now, index),
            Event::DiscoveryTimeout { node, dest, attempt } => self.on_discovery_timeout(now, node, dest, attempt),
            Event::DataTick { flow } => self.on_data_tick(now, flow),
            Event::AdversaryTick { node, index } => self.on_adversary_tick(now, node, index),
            Event::RouteRequest { node, dest } => self.start_discovery(now, node, dest),
            Event::SimulationEnd => {}
        }
    }

    fn offer(&mut self, now: Time, node: NodeId, target: Target, packet: Packet) {
        self.metrics.tx_offered += 1;
        match self.nodes[node.index()].tx.offer(now, &self.cfg.channel) {
            Some(departure) => self.queue.schedule(departure, Event::Transmit { node, target, packet }),
            None => self.metrics.drop_capacity += 1,
        }
    }

    fn refresh_positions(&mut self, now: Time) {
        if self.positions_at == now || (self.cfg.mobility.is_static() && !self.positions_at.is_nan()) {
            return;
        }
        let cfg = &self.cfg;
        for (pos, node) in self.positions.iter_mut().zip(self.nodes.iter_mut()) {
            *pos = node.mobility.position_at(now, &cfg.mobility, &cfg.arena);
        }
        self.positions_at = now;
    }

    fn on_transmit(&mut self, now: Time, node: NodeId, target: Target, packet: Packet) {
        self.metrics.tx_sent += 1;
        if packet.is_routing() {
            self.metrics.routing_packets_sent += 1;
        } else {
            self.metrics.data_packets_sent += 1;
        }
        self.refresh_positions(now);
        let arrive = now + self.cfg.channel.prop_delay_s;
        let here = self.positions[node.index()];
        match target {
            Target::Broadcast => {
                for v in 0..self.nodes.len() {
                    if v != node.index() && self.cfg.channel.in_range(here, self.positions[v]) {
                        self.metrics.deliveries_scheduled += 1;
                        self.queue.schedule(
                            arrive,
                            Event::PacketDelivery {
                                to: NodeId(v as u32),
                                from: node,
                                packet: packet.clone(),
                            },
                        );
                    }
                }
            }
            Target::Unicast(next) => {
                let reachable = next.index() < self.nodes.len()
                    && next != node
                    && self.cfg.channel.in_range(here, self.positions[next.index()]);
                if reachable {
                    self.metrics.deliveries_scheduled += 1;
                    self.queue.schedule(arrive, Event::PacketDelivery { to: next, from: node, packet });
                } else {
                    self.metrics.link_failures += 1;
                    if let Packet::Data(d) = packet {
                        self.nodes[node.index()].state.route_table.invalidate(d.dst);
                        self.data_lost(&d);
                    }
                }
            }
        }
    }

    /// End-to-end loss signal: the source stops trusting its route so the
    /// next data tick rediscovers.
    fn data_lost(&mut self, d: &DataPacket) {
        self.nodes[d.src.index()].state.route_table.invalidate(d.dst);
    }

    fn on_delivery(&mut self, now: Time, to: NodeId, from: NodeId, packet: Packet) {
        self.metrics.deliveries_processed += 1;
        match packet {
            Packet::Rreq(p) => self.on_rreq(now, to, from, p),
            Packet::Rrep(p) => {
                self.metrics.rrep_received += 1;
                let cfg = Arc::clone(&self.cfg);
                let rc = routing_config(&cfg);
                match self.nodes[to.index()].state.handle_rrep(&p, from, now, &rc) {
                    RrepOutcome::Completed { dest, hops, latency } => {
                        self.metrics.rrep_completed += 1;
                        self.metrics.routes_formed += 1;
                        self.metrics.route_records.push(RouteRecord {
                            origin: to,
                            dest,
                            hops,
                            latency_s: latency,
                        });
                        self.record(TraceRecord::RouteFormed {
                            time: now,
                            origin: to,
                            dest,
                            hops,
                        });
                    }
                    RrepOutcome::Late => self.metrics.rrep_late += 1,
                    RrepOutcome::Forward { rrep, next_hop } => {
                        self.metrics.rrep_forwarded += 1;
                        self.offer(now, to, Target::Unicast(next_hop), Packet::Rrep(rrep));
                    }
                    RrepOutcome::Orphaned => self.metrics.rrep_orphaned += 1,
                }
            }
            Packet::Data(d) => {
                self.metrics.data_received += 1;
                if d.dst == to {
                    self.metrics.data_delivered += 1;
                    return;
                }
                let cfg = Arc::clone(&self.cfg);
                let rc = routing_config(&cfg);
                match self.nodes[to.index()].state.next_hop_for_data(d.dst, now, &rc) {
                    Some(next) => {
                        self.metrics.data_forwarded += 1;
                        self.offer(now, to, Target::Unicast(next), Packet::Data(d));
                    }
                    None => {
                        self.metrics.data_no_route += 1;
                        self.data_lost(&d);
                    }
                }
            }
        }
    }

    fn on_rreq(&mut self, now: Time, to: NodeId, from: NodeId, p: RreqPacket) {
        self.metrics.rreq_received += 1;
        let cfg = Arc::clone(&self.cfg);
        let rc = routing_config(&cfg);
        let outcome = self.nodes[to.index()].state.handle_rreq(&p, from, now, &rc);
        self.record(TraceRecord::Verdict {
            time: now,
            judge: to,
            from,
            verdict: outcome.verdict(),
        });
        let m = &mut self.metrics;
        match outcome {
            RreqOutcome::Rejected(v) => match v {
                Verdict::DropOverAvg => m.drop_policy_avg += 1,
                Verdict::DropBlacklisted => m.drop_policy_blacklist += 1,
                Verdict::DropNaiveOverRal => m.drop_policy_naive_ral += 1,
                Verdict::BlacklistTriggered => {
                    m.drop_policy_blacklist += 1;
                    m.blacklist_events.push(BlacklistEvent {
                        judge: to,
                        accused: from,
                        time: now,
                        accused_is_malicious: self.malicious[from.index()],
                    });
                }
                Verdict::Accept => unreachable!("accepted requests are never rejected"),
            },
            accepted => {
                m.rreq_accepted += 1;
                match accepted {
                    RreqOutcome::Duplicate => m.drop_duplicate += 1,
                    RreqOutcome::Answered { rrep, next_hop } => {
                        m.rreq_answered += 1;
                        self.offer(now, to, Target::Unicast(next_hop), Packet::Rrep(rrep));
                    }
                    RreqOutcome::Forwarded(q) => {
                        m.rreq_forwarded += 1;
                        if !q.genuine {
                            m.rreq_fake_forwarded += 1;
                            if p.hop_count >= 1 {
                                m.rreq_fake_forwarded_beyond_hop1 += 1;
                            }
                        }
                        self.record(TraceRecord::RreqEmitted {
                            time: now,
                            node: to,
                            fabricated: false,
                        });
                        self.offer(now, to, Target::Broadcast, Packet::Rreq(q));
                    }
                    RreqOutcome::BudgetExhausted => {
                        m.drop_budget += 1;
                        if !self.malicious[to.index()] {
                            m.drop_budget_honest += 1;
                        }
                    }
                    RreqOutcome::TtlExpired => m.drop_ttl += 1,
                    RreqOutcome::Rejected(_) => unreachable!(),
                }
            }
        }
    }

    fn send_originated(&mut self, now: Time, node: NodeId, p: RreqPacket) {
        self.metrics.rreq_originated_genuine += 1;
        self.record(TraceRecord::RreqEmitted {
            time: now,
            node,
            fabricated: false,
        });
        self.offer(now, node, Target::Broadcast, Packet::Rreq(p));
    }

    fn arm_discovery_timer(&mut self, now: Time, node: NodeId, dest: NodeId, attempt: u32) {
        self.queue.schedule(
            now + self.cfg.aodv.discovery_timeout,
            Event::DiscoveryTimeout { node, dest, attempt },
        );
    }

    fn start_discovery(&mut self, now: Time, node: NodeId, dest: NodeId) {
        let cfg = Arc::clone(&self.cfg);
        let rc = routing_config(&cfg);
        match self.nodes[node.index()].state.begin_discovery(dest, now, &rc) {
            DiscoveryStart::Sent(p) => {
                self.metrics.routes_requested += 1;
                self.arm_discovery_timer(now, node, dest, 0);
                self.send_originated(now, node, p);
            }
            DiscoveryStart::Deferred => {
                self.metrics.routes_requested += 1;
                self.arm_discovery_timer(now, node, dest, 0);
            }
            DiscoveryStart::AlreadyPending | DiscoveryStart::HaveRoute => {}
        }
    }

    fn on_discovery_timeout(&mut self, now: Time, node: NodeId, dest: NodeId, attempt: u32) {
        let cfg = Arc::clone(&self.cfg);
        let rc = routing_config(&cfg);
        match self.nodes[node.index()].state.discovery_timeout(dest, attempt, now, &rc) {
            TimeoutOutcome::Retry { rreq, attempt } => {
                self.arm_discovery_timer(now, node, dest, attempt);
                self.send_originated(now, node, rreq);
            }
            TimeoutOutcome::RetryDeferred { attempt } => self.arm_discovery_timer(now, node, dest, attempt),
            TimeoutOutcome::Failed => self.metrics.routes_failed += 1,
            TimeoutOutcome::Stale => {}
        }
    }

    fn on_interval(&mut self, now: Time, index: u64) {
        for node in &mut self.nodes {
            node.state.housekeeping(now);
            let entries = node.state.route_table.valid_len(now) as u64;
            self.metrics.peak_route_entries = self.metrics.peak_route_entries.max(entries);
        }
        let next = (index + 1) as f64 * self.cfg.params.interval_len;
        if next < self.cfg.sim_time_s {
            self.queue.schedule(next, Event::IntervalTick { index: index + 1 });
        }
    }

    fn on_data_tick(&mut self, now: Time, flow: usize) {
        let Flow { src, dst, .. } = self.flows[flow].clone();
        let cfg = Arc::clone(&self.cfg);
        let rc = routing_config(&cfg);
        match self.nodes[src.index()].state.next_hop_for_data(dst, now, &rc) {
            Some(next) => {
                self.metrics.data_generated += 1;
                let pkt = DataPacket {
                    flow_id: flow as u32,
                    src,
                    dst,
                    size_bytes: cfg.traffic.packet_bytes,
                };
                self.offer(now, src, Target::Unicast(next), Packet::Data(pkt));
            }
            None => self.start_discovery(now, src, dst),
        }
        let next = now + 1.0 / cfg.traffic.data_rate_pps;
        if next < cfg.sim_time_s {
            self.queue.schedule(next, Event::DataTick { flow });
        }
    }

    fn on_adversary_tick(&mut self, now: Time, node: NodeId, index: u64) {
        let cfg = Arc::clone(&self.cfg);
        let rc = routing_config(&cfg);
        let n = self.nodes.len();
        let SimNode {
            state,
            flood,
            target_rng,
            ..
        } = &mut self.nodes[node.index()];
        let Some(flood) = flood.as_mut() else {
            return;
        };
        let pkts = adversary_tick(state, &cfg.adversary, flood, n, target_rng, now, &rc);
        for p in pkts {
            self.metrics.rreq_originated_fake += 1;
            self.record(TraceRecord::RreqEmitted {
                time: now,
                node,
                fabricated: true,
            });
            self.offer(now, node, Target::Broadcast, Packet::Rreq(p));
        }
        let next = (index + 1) as f64 * cfg.adversary.tick_s;
        if next < cfg.sim_time_s {
            self.queue.schedule(next, Event::AdversaryTick { node, index: index + 1 });
        }
    }
}

fn routing_config(cfg: &ScenarioConfig) -> RoutingConfig<'_> {
    RoutingConfig {
        policy: cfg.policy,
        params: &cfg.params,
        aodv: &cfg.aodv,
    }
}

/// Runs `cfg` once with `seed`.
pub fn run(cfg: &ScenarioConfig, seed: u64) -> Result<MetricsReport, ConfigError> {
    Ok(Simulation::new(cfg, seed)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::desk();
        cfg.sim_time_s = 10.0;
        cfg
    }

    #[test]
    fn zero_duration_run_is_empty() {
        let mut cfg = small_cfg();
        cfg.sim_time_s = 0.0;
        cfg.adversary.malicious_fraction = 0.04;
        let r = run(&cfg, 3).unwrap();
        assert_eq!(r.tx_offered, 0);
        assert_eq!(r.routes_requested, 0);
        assert_eq!(r.rreq_originated_fake, 0);
        r.check_conservation().unwrap();
    }

    #[test]
    fn same_seed_same_report() {
        let mut cfg = small_cfg();
        cfg.adversary.malicious_fraction = 0.04;
        assert_eq!(run(&cfg, 9).unwrap(), run(&cfg, 9).unwrap());
        assert_ne!(run(&cfg, 9).unwrap(), run(&cfg, 10).unwrap());
    }

    #[test]
    fn invalid_config_is_rejected_before_running() {
        let mut cfg = small_cfg();
        cfg.params.alpha = 0.0;
        assert!(Simulation::new(&cfg, 1).is_err());
    }

    #[test]
    fn clean_run_forms_routes_and_conserves_packets() {
        let r = run(&small_cfg(), 4).unwrap();
        r.check_conservation().unwrap();
        assert!(r.routes_formed > 0);
        assert!(r.data_delivered > 0);
        assert_eq!(r.rreq_originated_fake, 0);
    }

    #[test]
    fn stream_rngs_are_distinct() {
        let a: u64 = stream_rng(1, Stream::Mobility, 0).random();
        let b: u64 = stream_rng(1, Stream::Mobility, 1).random();
        let c: u64 = stream_rng(1, Stream::Placement, 0).random();
        let d: u64 = stream_rng(2, Stream::Mobility, 0).random();
        assert!(a != b && a != c && a != d);
        assert_eq!(a, stream_rng(1, Stream::Mobility, 0).random::<u64>());
    }
}
