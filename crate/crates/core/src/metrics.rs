//! Per-run accounting and cross-replication aggregation.
//!
//! Overhead is counted in packets. Data packets all have the configured size,
//! so packet and byte ratios are proportional.

use std::collections::BTreeSet;

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::flood_control::PolicyKind;
use crate::netmodel::{NodeId, Time};

#[derive(Debug, Clone, PartialEq)]
pub struct RouteRecord {
    pub origin: NodeId,
    pub dest: NodeId,
    pub hops: u32,
    pub latency_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlacklistEvent {
    pub judge: NodeId,
    pub accused: NodeId,
    pub time: Time,
    pub accused_is_malicious: bool,
}

/// Counters collected over one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub policy: Option<PolicyKind>,
    pub seed: u64,
    pub malicious_nodes: Vec<NodeId>,

    pub routes_requested: u64,
    pub routes_formed: u64,
    pub routes_failed: u64,
    pub route_records: Vec<RouteRecord>,

    pub rreq_originated_genuine: u64,
    pub rreq_originated_fake: u64,
    pub rreq_forwarded: u64,
    pub rreq_fake_forwarded: u64,
    /// Fabricated requests forwarded by nodes that heard them at least one
    /// hop away from the flooder.
    pub rreq_fake_forwarded_beyond_hop1: u64,
    pub rreq_received: u64,
    pub rreq_accepted: u64,
    pub rreq_answered: u64,

    pub drop_policy_avg: u64,
    pub drop_policy_blacklist: u64,
    pub drop_policy_naive_ral: u64,
    pub drop_duplicate: u64,
    pub drop_budget: u64,
    /// Budget drops at honest nodes only.
    pub drop_budget_honest: u64,
    pub drop_capacity: u64,
    pub drop_ttl: u64,

    pub rrep_received: u64,
    pub rrep_forwarded: u64,
    pub rrep_completed: u64,
    pub rrep_late: u64,
    pub rrep_orphaned: u64,

    pub data_generated: u64,
    pub data_received: u64,
    pub data_forwarded: u64,
    pub data_delivered: u64,
    pub data_no_route: u64,

    pub tx_offered: u64,
    pub tx_sent: u64,
    pub tx_queued_at_end: u64,
    pub link_failures: u64,
    pub deliveries_scheduled: u64,
    pub deliveries_processed: u64,
    pub in_flight_at_end: u64,

    pub data_packets_sent: u64,
    pub routing_packets_sent: u64,
    pub peak_route_entries: u64,

    pub blacklist_events: Vec<BlacklistEvent>,
}

/// Data-to-routing transmission ratio. Zero without data; `+inf` when data
/// flowed with no routing traffic at all.
pub fn overhead_ratio(report: &MetricsReport) -> f64 {
    match (report.data_packets_sent, report.routing_packets_sent) {
        (0, _) => 0.0,
        (_, 0) => f64::INFINITY,
        (d, r) => d as f64 / r as f64,
    }
}

/// Mean hop count of formed routes, 0 if none formed.
pub fn mean_hops(report: &MetricsReport) -> f64 {
    if report.route_records.is_empty() {
        return 0.0;
    }
    let total: u64 = report.route_records.iter().map(|r| u64::from(r.hops)).sum();
    total as f64 / report.route_records.len() as f64
}

fn mean_latency(report: &MetricsReport) -> f64 {
    if report.route_records.is_empty() {
        return 0.0;
    }
    report.route_records.iter().map(|r| r.latency_s).sum::<f64>() / report.route_records.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlacklistQuality {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

/// Scores blacklist events against ground truth. Each (judge, accused) event
/// counts once; false negatives are malicious nodes nobody blacklisted.
pub fn blacklist_quality(report: &MetricsReport) -> BlacklistQuality {
    let mut q = BlacklistQuality::default();
    let mut accused = BTreeSet::new();
    for ev in &report.blacklist_events {
        if ev.accused_is_malicious {
            q.true_positives += 1;
        } else {
            q.false_positives += 1;
        }
        accused.insert(ev.accused);
    }
    q.false_negatives = report
        .malicious_nodes
        .iter()
        .filter(|m| !accused.contains(m))
        .count() as u64;
    q
}

impl MetricsReport {
    /// Scalar metrics in stable column order.
    pub fn scalars(&self) -> Vec<(&'static str, f64)> {
        let q = blacklist_quality(self);
        let c = |v: u64| v as f64;
        vec![
            ("routes_requested", c(self.routes_requested)),
            ("routes_formed", c(self.routes_formed)),
            ("routes_failed", c(self.routes_failed)),
            ("mean_hops", mean_hops(self)),
            ("mean_route_latency_s", mean_latency(self)),
            ("overhead_ratio", overhead_ratio(self)),
            ("data_packets_sent", c(self.data_packets_sent)),
            ("routing_packets_sent", c(self.routing_packets_sent)),
            ("data_delivered", c(self.data_delivered)),
            ("rreq_originated_genuine", c(self.rreq_originated_genuine)),
            ("rreq_originated_fake", c(self.rreq_originated_fake)),
            ("rreq_forwarded", c(self.rreq_forwarded)),
            ("rreq_fake_forwarded", c(self.rreq_fake_forwarded)),
            ("rreq_fake_forwarded_beyond_hop1", c(self.rreq_fake_forwarded_beyond_hop1)),
            ("drop_policy_avg", c(self.drop_policy_avg)),
            ("drop_policy_blacklist", c(self.drop_policy_blacklist)),
            ("drop_policy_naive_ral", c(self.drop_policy_naive_ral)),
            ("drop_duplicate", c(self.drop_duplicate)),
            ("drop_budget", c(self.drop_budget)),
            ("drop_capacity", c(self.drop_capacity)),
            ("drop_ttl", c(self.drop_ttl)),
            ("rrep_orphaned", c(self.rrep_orphaned)),
            ("link_failures", c(self.link_failures)),
            ("blacklist_events", c(self.blacklist_events.len() as u64)),
            ("blacklist_tp", c(q.true_positives)),
            ("blacklist_fp", c(q.false_positives)),
            ("blacklist_fn", c(q.false_negatives)),
            ("peak_route_entries", c(self.peak_route_entries)),
        ]
    }

    pub fn scalar_names() -> Vec<&'static str> {
        MetricsReport::default().scalars().into_iter().map(|(n, _)| n).collect()
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    /// Checks that every packet and every reception is accounted exactly once.
    pub fn check_conservation(&self) -> Result<(), String> {
        let checks: [(&str, u64, u64); 10] = [
            (
                "offered = sent + capacity drops + queued",
                self.tx_offered,
                self.tx_sent + self.drop_capacity + self.tx_queued_at_end,
            ),
            (
                "offered = originations + forwards",
                self.tx_offered,
                self.rreq_originated_genuine
                    + self.rreq_originated_fake
                    + self.rreq_forwarded
                    + self.rreq_answered
                    + self.rrep_forwarded
                    + self.data_generated
                    + self.data_forwarded,
            ),
            (
                "sent = routing + data",
                self.tx_sent,
                self.routing_packets_sent + self.data_packets_sent,
            ),
            (
                "scheduled = processed + in flight",
                self.deliveries_scheduled,
                self.deliveries_processed + self.in_flight_at_end,
            ),
            (
                "processed = rreq + rrep + data receptions",
                self.deliveries_processed,
                self.rreq_received + self.rrep_received + self.data_received,
            ),
            (
                "rreq received = accepted + policy drops",
                self.rreq_received,
                self.rreq_accepted + self.drop_policy_avg + self.drop_policy_blacklist + self.drop_policy_naive_ral,
            ),
            (
                "rreq accepted = dup + answered + forwarded + budget + ttl",
                self.rreq_accepted,
                self.drop_duplicate + self.rreq_answered + self.rreq_forwarded + self.drop_budget + self.drop_ttl,
            ),
            (
                "rrep received = completed + late + forwarded + orphaned",
                self.rrep_received,
                self.rrep_completed + self.rrep_late + self.rrep_forwarded + self.rrep_orphaned,
            ),
            (
                "data received = delivered + forwarded + no route",
                self.data_received,
                self.data_delivered + self.data_forwarded + self.data_no_route,
            ),
            (
                "routes formed = completed replies",
                self.routes_formed,
                self.rrep_completed,
            ),
        ];
        for (what, lhs, rhs) in checks {
            if lhs != rhs {
                return Err(format!("conservation violated: {what} ({lhs} != {rhs})"));
            }
        }
        if self.routes_formed + self.routes_failed > self.routes_requested {
            return Err(format!(
                "routes formed ({}) + failed ({}) exceed requested ({})",
                self.routes_formed, self.routes_failed, self.routes_requested
            ));
        }
        if self.route_records.len() as u64 != self.routes_formed {
            return Err("route records disagree with routes_formed".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error("aggregation needs at least 2 replications, got {0}")]
    TooFewReports(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub name: &'static str,
    pub mean: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub metrics: Vec<MetricSummary>,
}

impl Aggregate {
    pub fn get(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Two-sided 95% Student-t critical value for `df` degrees of freedom.
pub fn t_critical_95(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Sample mean and 95% confidence half-width.
pub fn mean_ci95(values: &[f64]) -> Result<(f64, f64), AggregateError> {
    let n = values.len();
    if n < 2 {
        return Err(AggregateError::TooFewReports(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if !mean.is_finite() {
        return Ok((mean, f64::NAN));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let half = if sd == 0.0 {
        0.0
    } else {
        t_critical_95(n - 1) * sd / (n as f64).sqrt()
    };
    Ok((mean, half))
}

pub fn aggregate(reports: &[MetricsReport]) -> Result<Aggregate, AggregateError> {
    if reports.len() < 2 {
        return Err(AggregateError::TooFewReports(reports.len()));
    }
    let rows: Vec<Vec<(&'static str, f64)>> = reports.iter().map(|r| r.scalars()).collect();
    let metrics = (0..rows[0].len())
        .map(|col| {
            let values: Vec<f64> = rows.iter().map(|r| r[col].1).collect();
            let (mean, ci95) = mean_ci95(&values).expect("length checked above");
            MetricSummary {
                name: rows[0][col].0,
                mean,
                ci95,
            }
        })
        .collect();
    Ok(Aggregate {
        n: reports.len(),
        metrics,
    })
}
