//! Scenario configuration and its flat `key = value` text form.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! section.key = value
//! ```
//!
//! Blank lines and everything after `#` are ignored. A `preset = <name>` line
//! resets every field to that preset; later lines override it. The same keys
//! are accepted by `--set key=value` on the command line.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::adversary::{AdversaryConfig, TargetMode};
use crate::aodv::AodvParams;
use crate::flood_control::{PolicyKind, PolicyParams};
use crate::simkernel::channel::ChannelModel;
use crate::simkernel::mobility::{Arena, MobilityConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown preset `{0}` (expected desk or table1)")]
    UnknownPreset(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn field(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Field {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub flow_count: usize,
    pub data_rate_pps: f64,
    pub packet_bytes: u32,
    /// Flows start at a uniformly drawn time in `[0, start_window_s)`.
    pub start_window_s: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            flow_count: 10,
            data_rate_pps: 10.0,
            packet_bytes: 1000,
            start_window_s: 5.0,
        }
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub arena: Arena,
    pub node_count: usize,
    pub sim_time_s: f64,
    pub replications: u32,
    pub base_seed: u64,
    pub policy: PolicyKind,
    pub params: PolicyParams,
    pub aodv: AodvParams,
    pub adversary: AdversaryConfig,
    pub mobility: MobilityConfig,
    pub traffic: TrafficConfig,
    pub channel: ChannelModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::desk()
    }
}

/// Every settable key, in echo order.
pub const KEYS: &[&str] = &[
    "name",
    "arena.width_m",
    "arena.height_m",
    "nodes.count",
    "sim.time_s",
    "sim.replications",
    "sim.base_seed",
    "policy.kind",
    "policy.rate_limit",
    "policy.k",
    "policy.alpha",
    "policy.interval_s",
    "policy.bt_base_s",
    "policy.bt_factor",
    "policy.bt_cap_s",
    "policy.ral",
    "policy.rbl",
    "aodv.initial_ttl",
    "aodv.discovery_timeout_s",
    "aodv.rreq_retries",
    "aodv.seen_expiry_s",
    "aodv.route_lifetime_s",
    "adversary.malicious_fraction",
    "adversary.flood_rate_pps",
    "adversary.tick_s",
    "adversary.target_mode",
    "mobility.v_min",
    "mobility.v_max",
    "mobility.pause_s",
    "traffic.flow_count",
    "traffic.data_rate_pps",
    "traffic.packet_bytes",
    "traffic.start_window_s",
    "channel.range_m",
    "channel.capacity_pps",
    "channel.prop_delay_s",
    "channel.queue_limit",
];

fn parse<T: FromStr>(path: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| ConfigError::field(path, format!("cannot parse `{value}`: {e}")))
}

impl ScenarioConfig {
    /// 1000 m x 1000 m, 50 nodes, 250 m range, 50 s, 10 replications.
    pub fn desk() -> Self {
        ScenarioConfig {
            name: "desk".into(),
            arena: Arena {
                width_m: 1000.0,
                height_m: 1000.0,
            },
            node_count: 50,
            sim_time_s: 50.0,
            replications: 10,
            base_seed: 1,
            policy: PolicyKind::Acrr,
            params: PolicyParams::default(),
            aodv: AodvParams::default(),
            adversary: AdversaryConfig::default(),
            mobility: MobilityConfig {
                v_min: 10.0,
                v_max: 10.0,
                pause_s: 2.0,
            },
            traffic: TrafficConfig::default(),
            channel: ChannelModel::default(),
        }
    }

    /// Full-size setup: 450 nodes on a 5000 m x 1000 m strip. Slow.
    pub fn table1() -> Self {
        ScenarioConfig {
            name: "table1".into(),
            arena: Arena {
                width_m: 5000.0,
                height_m: 1000.0,
            },
            node_count: 450,
            traffic: TrafficConfig {
                flow_count: 100,
                ..TrafficConfig::default()
            },
            ..ScenarioConfig::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match name {
            "desk" => Ok(Self::desk()),
            "table1" => Ok(Self::table1()),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }

    /// Sets one field by dotted path. `mobility.speed` is shorthand for
    /// setting `v_min` and `v_max` together.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "name" => self.name = value.to_string(),
            "preset" => *self = Self::preset(value)?,
            "arena.width_m" => self.arena.width_m = parse(key, value)?,
            "arena.height_m" => self.arena.height_m = parse(key, value)?,
            "nodes.count" => self.node_count = parse(key, value)?,
            "sim.time_s" => self.sim_time_s = parse(key, value)?,
            "sim.replications" => self.replications = parse(key, value)?,
            "sim.base_seed" => self.base_seed = parse(key, value)?,
            "policy.kind" => self.policy = parse(key, value)?,
            "policy.rate_limit" => self.params.rate_limit = parse(key, value)?,
            "policy.k" => self.params.k = parse(key, value)?,
            "policy.alpha" => self.params.alpha = parse(key, value)?,
            "policy.interval_s" => self.params.interval_len = parse(key, value)?,
            "policy.bt_base_s" => self.params.bt_base = parse(key, value)?,
            "policy.bt_factor" => self.params.bt_factor = parse(key, value)?,
            "policy.bt_cap_s" => self.params.bt_cap = parse(key, value)?,
            "policy.ral" => self.params.ral = parse(key, value)?,
            "policy.rbl" => self.params.rbl = parse(key, value)?,
            "aodv.initial_ttl" => self.aodv.initial_ttl = parse(key, value)?,
            "aodv.discovery_timeout_s" => self.aodv.discovery_timeout = parse(key, value)?,
            "aodv.rreq_retries" => self.aodv.rreq_retries = parse(key, value)?,
            "aodv.seen_expiry_s" => self.aodv.seen_expiry = parse(key, value)?,
            "aodv.route_lifetime_s" => self.aodv.route_lifetime = parse(key, value)?,
            "adversary.malicious_fraction" => self.adversary.malicious_fraction = parse(key, value)?,
            "adversary.flood_rate_pps" => self.adversary.flood_rate_pps = parse(key, value)?,
            "adversary.tick_s" => self.adversary.tick_s = parse(key, value)?,
            "adversary.target_mode" => self.adversary.target_mode = parse::<TargetMode>(key, value)?,
            "mobility.v_min" => self.mobility.v_min = parse(key, value)?,
            "mobility.v_max" => self.mobility.v_max = parse(key, value)?,
            "mobility.speed" => {
                let v = parse(key, value)?;
                self.mobility.v_min = v;
                self.mobility.v_max = v;
            }
            "mobility.pause_s" => self.mobility.pause_s = parse(key, value)?,
            "traffic.flow_count" => self.traffic.flow_count = parse(key, value)?,
            "traffic.data_rate_pps" => self.traffic.data_rate_pps = parse(key, value)?,
            "traffic.packet_bytes" => self.traffic.packet_bytes = parse(key, value)?,
            "traffic.start_window_s" => self.traffic.start_window_s = parse(key, value)?,
            "channel.range_m" => self.channel.range_m = parse(key, value)?,
            "channel.capacity_pps" => self.channel.capacity_pps = parse(key, value)?,
            "channel.prop_delay_s" => self.channel.prop_delay_s = parse(key, value)?,
            "channel.queue_limit" => self.channel.queue_limit = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Current value of `key` in its text form.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = match key {
            "name" => self.name.clone(),
            "arena.width_m" => self.arena.width_m.to_string(),
            "arena.height_m" => self.arena.height_m.to_string(),
            "nodes.count" => self.node_count.to_string(),
            "sim.time_s" => self.sim_time_s.to_string(),
            "sim.replications" => self.replications.to_string(),
            "sim.base_seed" => self.base_seed.to_string(),
            "policy.kind" => self.policy.to_string(),
            "policy.rate_limit" => self.params.rate_limit.to_string(),
            "policy.k" => self.params.k.to_string(),
            "policy.alpha" => self.params.alpha.to_string(),
            "policy.interval_s" => self.params.interval_len.to_string(),
            "policy.bt_base_s" => self.params.bt_base.to_string(),
            "policy.bt_factor" => self.params.bt_factor.to_string(),
            "policy.bt_cap_s" => self.params.bt_cap.to_string(),
            "policy.ral" => self.params.ral.to_string(),
            "policy.rbl" => self.params.rbl.to_string(),
            "aodv.initial_ttl" => self.aodv.initial_ttl.to_string(),
            "aodv.discovery_timeout_s" => self.aodv.discovery_timeout.to_string(),
            "aodv.rreq_retries" => self.aodv.rreq_retries.to_string(),
            "aodv.seen_expiry_s" => self.aodv.seen_expiry.to_string(),
            "aodv.route_lifetime_s" => self.aodv.route_lifetime.to_string(),
            "adversary.malicious_fraction" => self.adversary.malicious_fraction.to_string(),
            "adversary.flood_rate_pps" => self.adversary.flood_rate_pps.to_string(),
            "adversary.tick_s" => self.adversary.tick_s.to_string(),
            "adversary.target_mode" => self.adversary.target_mode.to_string(),
            "mobility.v_min" => self.mobility.v_min.to_string(),
            "mobility.v_max" => self.mobility.v_max.to_string(),
            "mobility.speed" if self.mobility.v_min == self.mobility.v_max => self.mobility.v_max.to_string(),
            "mobility.pause_s" => self.mobility.pause_s.to_string(),
            "traffic.flow_count" => self.traffic.flow_count.to_string(),
            "traffic.data_rate_pps" => self.traffic.data_rate_pps.to_string(),
            "traffic.packet_bytes" => self.traffic.packet_bytes.to_string(),
            "traffic.start_window_s" => self.traffic.start_window_s.to_string(),
            "channel.range_m" => self.channel.range_m.to_string(),
            "channel.capacity_pps" => self.channel.capacity_pps.to_string(),
            "channel.prop_delay_s" => self.channel.prop_delay_s.to_string(),
            "channel.queue_limit" => self.channel.queue_limit.to_string(),
            _ => return None,
        };
        Some(s)
    }

    /// Applies a config text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            self.set(key.trim(), value).map_err(|e| match e {
                ConfigError::UnknownKey(k) => ConfigError::Syntax {
                    line: i + 1,
                    message: format!("unknown key `{k}`"),
                },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Parses a config text over the desk preset. Does not validate.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::desk();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }

    /// Resolved config in the same grammar it is read from.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("every listed key has a value");
            writeln!(out, "{key} = {value}").unwrap();
        }
        out
    }

    /// Checks every field before any simulation event runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(ConfigError::field(path, format!("must be positive, got {v}")))
            }
        }
        fn finite_nonneg(path: &str, v: f64) -> Result<(), ConfigError> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::field(path, format!("must be a finite non-negative number, got {v}")))
            }
        }

        if self.name.is_empty() || self.name.contains([',', '"', '\n']) {
            return Err(ConfigError::field("name", "must be non-empty without commas or quotes"));
        }
        positive("arena.width_m", self.arena.width_m)?;
        positive("arena.height_m", self.arena.height_m)?;
        if !(self.arena.width_m.is_finite() && self.arena.height_m.is_finite()) {
            return Err(ConfigError::field("arena", "dimensions must be finite"));
        }
        if self.node_count == 0 || self.node_count > (u32::MAX / 2) as usize {
            return Err(ConfigError::field("nodes.count", "must be at least 1"));
        }
        finite_nonneg("sim.time_s", self.sim_time_s)?;
        if self.replications == 0 {
            return Err(ConfigError::field("sim.replications", "must be at least 1"));
        }
        self.params.validate().map_err(|(field, msg)| {
            let key = match field {
                "rate_limit" => "policy.rate_limit",
                "k" => "policy.k",
                "alpha" => "policy.alpha",
                "interval_s" => "policy.interval_s",
                "bt_base_s" => "policy.bt_base_s",
                "bt_factor" => "policy.bt_factor",
                "bt_cap_s" => "policy.bt_cap_s",
                _ => "policy.ral",
            };
            ConfigError::field(key, msg)
        })?;
        if self.aodv.initial_ttl == 0 {
            return Err(ConfigError::field("aodv.initial_ttl", "must be at least 1"));
        }
        positive("aodv.discovery_timeout_s", self.aodv.discovery_timeout)?;
        positive("aodv.seen_expiry_s", self.aodv.seen_expiry)?;
        positive("aodv.route_lifetime_s", self.aodv.route_lifetime)?;
        let frac = self.adversary.malicious_fraction;
        if !(0.0..=1.0).contains(&frac) {
            return Err(ConfigError::field(
                "adversary.malicious_fraction",
                format!("must lie in [0, 1], got {frac}"),
            ));
        }
        positive("adversary.tick_s", self.adversary.tick_s)?;
        finite_nonneg("adversary.flood_rate_pps", self.adversary.flood_rate_pps)?;
        if frac > 0.0 && self.adversary.flood_rate_pps <= f64::from(self.params.rate_limit) / self.params.interval_len {
            return Err(ConfigError::field(
                "adversary.flood_rate_pps",
                format!(
                    "must exceed the request rate limit ({} per {} s) for the node to be flooding",
                    self.params.rate_limit, self.params.interval_len
                ),
            ));
        }
        finite_nonneg("mobility.v_min", self.mobility.v_min)?;
        finite_nonneg("mobility.v_max", self.mobility.v_max)?;
        if self.mobility.v_min > self.mobility.v_max {
            return Err(ConfigError::field("mobility.v_min", "must not exceed mobility.v_max"));
        }
        finite_nonneg("mobility.pause_s", self.mobility.pause_s)?;
        positive("traffic.data_rate_pps", self.traffic.data_rate_pps)?;
        if self.traffic.packet_bytes == 0 {
            return Err(ConfigError::field("traffic.packet_bytes", "must be at least 1"));
        }
        finite_nonneg("traffic.start_window_s", self.traffic.start_window_s)?;
        positive("channel.range_m", self.channel.range_m)?;
        positive("channel.capacity_pps", self.channel.capacity_pps)?;
        finite_nonneg("channel.prop_delay_s", self.channel.prop_delay_s)?;
        if self.channel.queue_limit == 0 {
            return Err(ConfigError::field("channel.queue_limit", "must be at least 1"));
        }
        Ok(())
    }
}
