//! Flooding adversaries.
//!
//! A malicious node ignores the request rate limit and pushes fabricated
//! route requests at a fixed rate toward destinations that do not exist. In
//! every other respect it behaves like an honest node: it forwards other
//! nodes' requests within the normal budget, so only the volume it originates
//! gives it away.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::aodv::{NodeState, RoutingConfig};
use crate::netmodel::{NodeId, RreqPacket, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetMode {
    /// Destinations drawn uniformly from `[node_count, 2 * node_count)`.
    Unresolvable,
}

impl fmt::Display for TargetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetMode::Unresolvable => f.write_str("unresolvable"),
        }
    }
}

impl FromStr for TargetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unresolvable" => Ok(TargetMode::Unresolvable),
            other => Err(format!("unknown target mode `{other}` (expected unresolvable)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryConfig {
    pub malicious_fraction: f64,
    /// Fabricated requests originated per second by each malicious node.
    pub flood_rate_pps: f64,
    /// Spacing of adversary ticks.
    pub tick_s: f64,
    pub target_mode: TargetMode,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            malicious_fraction: 0.0,
            flood_rate_pps: 100.0,
            tick_s: 0.1,
            target_mode: TargetMode::Unresolvable,
        }
    }
}

/// `round(fraction * node_count)`, halves rounding away from zero.
pub fn malicious_count(fraction: f64, node_count: usize) -> usize {
    (fraction * node_count as f64).round() as usize
}

/// Picks the malicious nodes, returned in ascending id order.
pub fn select_malicious<R: Rng + ?Sized>(cfg: &AdversaryConfig, node_count: usize, rng: &mut R) -> Vec<NodeId> {
    let count = malicious_count(cfg.malicious_fraction, node_count).min(node_count);
    let mut ids: Vec<NodeId> = index::sample(rng, node_count, count)
        .into_iter()
        .map(|i| NodeId(i as u32))
        .collect();
    ids.sort_unstable();
    ids
}

pub fn fabricated_destination<R: Rng + ?Sized>(mode: TargetMode, node_count: usize, rng: &mut R) -> NodeId {
    match mode {
        TargetMode::Unresolvable => {
            let n = node_count as u32;
            NodeId(rng.random_range(n..2 * n.max(1)))
        }
    }
}

/// Fractional request carry between ticks, so non-integer `rate * tick`
/// products still average out to the configured rate.
#[derive(Debug, Clone, Default)]
pub struct FloodState {
    carry: f64,
}

impl FloodState {
    fn take(&mut self, cfg: &AdversaryConfig) -> usize {
        let total = self.carry + cfg.flood_rate_pps * cfg.tick_s;
        let whole = (total + 1e-9).floor().max(0.0);
        self.carry = (total - whole).max(0.0);
        whole as usize
    }
}

/// Fabricated requests a malicious node puts on the air in one tick. They
/// bypass the node's own request budget.
pub fn adversary_tick<R: Rng + ?Sized>(
    node: &mut NodeState,
    cfg: &AdversaryConfig,
    flood: &mut FloodState,
    node_count: usize,
    rng: &mut R,
    now: Time,
    routing: &RoutingConfig<'_>,
) -> Vec<RreqPacket> {
    (0..flood.take(cfg))
        .map(|_| {
            let dest = fabricated_destination(cfg.target_mode, node_count, rng);
            node.fabricate_rreq(dest, now, routing)
        })
        .collect()
}
