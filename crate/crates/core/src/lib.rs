//! Deterministic simulator for AODV route discovery in a mobile ad hoc
//! network, with per-neighbor admission control of route requests.
//!
//! A node that receives a route request first asks its admission policy
//! whether to process it:
//!
//! * `none` accepts everything (plain AODV with a per-node forwarding budget),
//! * `naive` drops a neighbor's requests past a fixed count and blacklists it
//!   past a higher one,
//! * `acrr` scales the per-neighbor allowance by the number of active
//!   neighbors and blacklists neighbors that exceed a peak rate.
//!
//! ```
//! use acrr::config::ScenarioConfig;
//! use acrr::simkernel;
//!
//! let mut cfg = ScenarioConfig::desk();
//! cfg.sim_time_s = 5.0;
//! let report = simkernel::run(&cfg, 7).unwrap();
//! report.check_conservation().unwrap();
//! ```

pub mod adversary;
pub mod aodv;
pub mod config;
pub mod flood_control;
pub mod harness;
pub mod metrics;
pub mod netmodel;
pub mod simkernel;

pub use config::ScenarioConfig;
pub use flood_control::{PolicyKind, PolicyParams, Verdict};
pub use metrics::MetricsReport;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/admission.md")]
    mod admission {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
