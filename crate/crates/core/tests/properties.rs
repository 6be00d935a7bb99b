use std::collections::HashMap;

use acrr::config::ScenarioConfig;
use acrr::flood_control::{NeighborLedger, PolicyKind, PolicyParams, Verdict};
use acrr::netmodel::NodeId;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = PolicyParams> {
    (1u32..20, 0.25f64..4.0, 0.05f64..=1.0, 0.2f64..6.0).prop_map(|(rate_limit, k, alpha, bt_base)| PolicyParams {
        rate_limit,
        k,
        alpha,
        bt_base,
        ..PolicyParams::default()
    })
}

/// Sorted arrivals `(time, neighbor)` over up to 20 one-second intervals.
fn arrivals() -> impl Strategy<Value = Vec<(f64, u32)>> {
    prop::collection::vec((0.0f64..20.0, 0u32..5), 0..400).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    })
}

proptest! {
    #[test]
    fn acrr_accepts_within_allowance(p in params(), arr in arrivals()) {
        let mut ledger = NeighborLedger::new();
        let mut accepted: HashMap<(u32, u64), u32> = HashMap::new();
        let peak = p.alpha * f64::from(p.rate_limit);
        let most = (p.k * f64::from(p.rate_limit)).max(peak);
        for (t, nb) in arr {
            let was_blacklisted = ledger.is_blacklisted(NodeId(nb), t);
            let v = ledger.admit(PolicyKind::Acrr, &p, NodeId(nb), t);
            if was_blacklisted {
                prop_assert_eq!(v, Verdict::DropBlacklisted);
            }
            if v == Verdict::Accept {
                let c = accepted.entry((nb, t.floor() as u64)).or_default();
                *c += 1;
                prop_assert!(f64::from(*c) <= peak.min(most));
            }
            if v == Verdict::BlacklistTriggered {
                prop_assert!(ledger.is_blacklisted(NodeId(nb), t));
            }
        }
    }

    #[test]
    fn none_policy_accepts_everything(arr in arrivals()) {
        let p = PolicyParams::default();
        let mut ledger = NeighborLedger::new();
        for (t, nb) in arr {
            prop_assert_eq!(ledger.admit(PolicyKind::None, &p, NodeId(nb), t), Verdict::Accept);
        }
    }

    #[test]
    fn config_text_round_trips(
        k in 0.1f64..10.0,
        alpha in 0.05f64..=1.0,
        fraction in 0.0f64..0.2,
        nodes in 2usize..500,
        speed in 0.0f64..30.0,
        seed in any::<u64>(),
        policy in prop::sample::select(vec!["none", "naive", "acrr"]),
    ) {
        let mut cfg = ScenarioConfig::desk();
        cfg.set("policy.k", &k.to_string()).unwrap();
        cfg.set("policy.alpha", &alpha.to_string()).unwrap();
        cfg.set("adversary.malicious_fraction", &fraction.to_string()).unwrap();
        cfg.set("nodes.count", &nodes.to_string()).unwrap();
        cfg.set("mobility.speed", &speed.to_string()).unwrap();
        cfg.set("sim.base_seed", &seed.to_string()).unwrap();
        cfg.set("policy.kind", policy).unwrap();
        let back = ScenarioConfig::from_text(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
