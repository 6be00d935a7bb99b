//! Shared domain types: node identifiers, control and data packets, and the
//! per-node routing table.

use std::collections::BTreeMap;
use std::fmt;

/// Simulation time in seconds.
pub type Time = f64;

/// Identifier of a simulated node.
///
/// Real nodes occupy `0..node_count`. Ids at or above `node_count` are never
/// bound to a node; attackers use them as fabricated destinations so their
/// requests can never be answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_resolvable(self, node_count: usize) -> bool {
        self.index() < node_count
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Route request, flooded hop by hop.
#[derive(Debug, Clone, PartialEq)]
pub struct RreqPacket {
    pub rreq_id: u32,
    pub origin: NodeId,
    pub origin_seq: u32,
    pub dest: NodeId,
    /// Last sequence number the origin knew for `dest`, 0 if unknown.
    pub dest_seq: u32,
    pub hop_count: u32,
    pub ttl: u32,
    /// Ground-truth label for accounting. Protocol logic never reads it.
    pub genuine: bool,
}

impl RreqPacket {
    /// The copy a forwarder puts back on the air: one hop further, one less TTL.
    pub fn rebroadcast(&self) -> RreqPacket {
        debug_assert!(self.ttl > 1, "rebroadcast of an RREQ with ttl {}", self.ttl);
        RreqPacket {
            hop_count: self.hop_count + 1,
            ttl: self.ttl - 1,
            ..self.clone()
        }
    }
}

/// Route reply, unicast back along reverse routes.
#[derive(Debug, Clone, PartialEq)]
pub struct RrepPacket {
    /// The node that asked for the route.
    pub origin: NodeId,
    /// The node the route leads to.
    pub dest: NodeId,
    pub dest_seq: u32,
    pub hop_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataPacket {
    pub flow_id: u32,
    pub src: NodeId,
    pub dst: NodeId,
    pub size_bytes: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Packet {
    Rreq(RreqPacket),
    Rrep(RrepPacket),
    Data(DataPacket),
}

impl Packet {
    pub fn is_routing(&self) -> bool {
        !matches!(self, Packet::Data(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTableEntry {
    pub dest: NodeId,
    pub next_hop: NodeId,
    pub hop_count: u32,
    pub dest_seq: u32,
    pub expires_at: Time,
}

impl RoutingTableEntry {
    /// Validity is the half-open interval `[installed, expires_at)`.
    pub fn is_valid_at(&self, now: Time) -> bool {
        now < self.expires_at
    }
}

/// Routing table owned by a single node.
#[derive(Debug, Clone)]
pub struct RouteTable {
    owner: NodeId,
    entries: BTreeMap<NodeId, RoutingTableEntry>,
}

impl RouteTable {
    pub fn new(owner: NodeId) -> Self {
        RouteTable {
            owner,
            entries: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    /// Installs `candidate` if it is fresher than the current valid entry for
    /// its destination: strictly greater sequence number, or the same sequence
    /// number over fewer hops. Expired entries count as absent.
    ///
    /// Returns whether the candidate was installed.
    pub fn update(&mut self, candidate: RoutingTableEntry, now: Time) -> bool {
        debug_assert!(candidate.hop_count >= 1);
        if candidate.next_hop == self.owner || candidate.dest == self.owner {
            return false;
        }
        let accept = match self.entries.get(&candidate.dest) {
            Some(existing) if existing.is_valid_at(now) => {
                candidate.dest_seq > existing.dest_seq
                    || (candidate.dest_seq == existing.dest_seq
                        && candidate.hop_count < existing.hop_count)
            }
            _ => true,
        };
        if accept {
            self.entries.insert(candidate.dest, candidate);
        }
        accept
    }

    /// The entry for `dest` if present and unexpired.
    pub fn lookup(&self, dest: NodeId, now: Time) -> Option<&RoutingTableEntry> {
        self.entries.get(&dest).filter(|e| e.is_valid_at(now))
    }

    /// Pushes the expiry of a valid entry out to at least `expires_at`.
    pub fn refresh(&mut self, dest: NodeId, now: Time, expires_at: Time) {
        if let Some(entry) = self.entries.get_mut(&dest) {
            if entry.is_valid_at(now) && entry.expires_at < expires_at {
                entry.expires_at = expires_at;
            }
        }
    }

    /// Removes the entry for `dest`, returning it if it existed.
    pub fn invalidate(&mut self, dest: NodeId) -> Option<RoutingTableEntry> {
        self.entries.remove(&dest)
    }

    /// Number of entries still valid at `now`.
    pub fn valid_len(&self, now: Time) -> usize {
        self.entries.values().filter(|e| e.is_valid_at(now)).count()
    }

    pub fn entries(&self) -> impl Iterator<Item = &RoutingTableEntry> {
        self.entries.values()
    }

    /// Drops entries that expired before `now`.
    pub fn purge_expired(&mut self, now: Time) {
        self.entries.retain(|_, e| e.is_valid_at(now));
    }
}

/// Stand-alone form of [`RouteTable::update`].
pub fn routing_table_update(table: &mut RouteTable, candidate: RoutingTableEntry, now: Time) -> bool {
    table.update(candidate, now)
}

/// Stand-alone form of [`RouteTable::lookup`].
pub fn route_lookup(table: &RouteTable, dest: NodeId, now: Time) -> Option<RoutingTableEntry> {
    table.lookup(dest, now).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(dest: u32, next: u32, hops: u32, seq: u32, exp: f64) -> RoutingTableEntry {
        RoutingTableEntry {
            dest: NodeId(dest),
            next_hop: NodeId(next),
            hop_count: hops,
            dest_seq: seq,
            expires_at: exp,
        }
    }

    #[test]
    fn insert_into_empty_table() {
        let mut t = RouteTable::new(NodeId(0));
        assert!(routing_table_update(&mut t, entry(3, 1, 2, 5, 10.0), 0.0));
        assert_eq!(t.lookup(NodeId(3), 0.0).unwrap().hop_count, 2);
    }

    #[test]
    fn equal_seq_longer_path_loses() {
        let mut t = RouteTable::new(NodeId(0));
        t.update(entry(3, 1, 2, 5, 10.0), 0.0);
        assert!(!t.update(entry(3, 2, 4, 5, 10.0), 0.0));
        assert_eq!(t.lookup(NodeId(3), 0.0).unwrap().next_hop, NodeId(1));
    }

    #[test]
    fn greater_seq_wins_even_if_longer() {
        let mut t = RouteTable::new(NodeId(0));
        t.update(entry(3, 1, 2, 5, 10.0), 0.0);
        assert!(t.update(entry(3, 2, 4, 6, 10.0), 0.0));
        assert_eq!(t.lookup(NodeId(3), 0.0).unwrap().hop_count, 4);
    }

    #[test]
    fn equal_seq_shorter_path_wins() {
        let mut t = RouteTable::new(NodeId(0));
        t.update(entry(3, 1, 4, 5, 10.0), 0.0);
        assert!(t.update(entry(3, 2, 2, 5, 10.0), 0.0));
    }

    #[test]
    fn expiry_boundary_is_exclusive() {
        let mut t = RouteTable::new(NodeId(0));
        t.update(entry(3, 1, 2, 5, 10.0), 0.0);
        assert!(route_lookup(&t, NodeId(3), 9.9).is_some());
        assert!(route_lookup(&t, NodeId(3), 10.0).is_none());
        assert!(route_lookup(&t, NodeId(7), 0.0).is_none());
    }

    #[test]
    fn expired_entry_does_not_block_stale_candidate() {
        let mut t = RouteTable::new(NodeId(0));
        t.update(entry(3, 1, 2, 9, 10.0), 0.0);
        assert!(t.update(entry(3, 2, 5, 1, 30.0), 12.0));
    }

    #[test]
    fn self_routes_are_rejected() {
        let mut t = RouteTable::new(NodeId(4));
        assert!(!t.update(entry(3, 4, 1, 1, 10.0), 0.0));
        assert!(!t.update(entry(4, 1, 1, 1, 10.0), 0.0));
        assert_eq!(t.valid_len(0.0), 0);
    }

    #[test]
    fn refresh_extends_only_valid_entries() {
        let mut t = RouteTable::new(NodeId(0));
        t.update(entry(3, 1, 2, 5, 10.0), 0.0);
        t.refresh(NodeId(3), 5.0, 15.0);
        assert_eq!(t.lookup(NodeId(3), 12.0).unwrap().expires_at, 15.0);
        t.refresh(NodeId(3), 16.0, 26.0);
        assert!(t.lookup(NodeId(3), 16.0).is_none());
    }

    #[test]
    fn rebroadcast_steps_hop_and_ttl() {
        let p = RreqPacket {
            rreq_id: 1,
            origin: NodeId(0),
            origin_seq: 1,
            dest: NodeId(9),
            dest_seq: 0,
            hop_count: 2,
            ttl: 5,
            genuine: true,
        };
        let q = p.rebroadcast();
        assert_eq!((q.hop_count, q.ttl), (3, 4));
        assert_eq!(q.rreq_id, p.rreq_id);
    }
}
