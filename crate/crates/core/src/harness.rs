//! Replication batches, parameter sweeps and CSV output.
//!
//! Every run in a batch gets seed `base_seed + i`. Runs may execute on
//! several threads but results are always written in (sweep value, policy,
//! seed) order, so output bytes never depend on scheduling.

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::flood_control::PolicyKind;
use crate::metrics::{aggregate, Aggregate, AggregateError, MetricsReport};
use crate::simkernel;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run with seed {seed} panicked: {message}")]
    RunPanicked { seed: u64, message: String },
    #[error("unknown sweep `{0}` (built-in: fig2, fig3, fig4, fig5, fig6, naive-vs-acrr; or field=v1,v2,...)")]
    UnknownSweep(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// One configuration of a sweep, run `replications` times.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub sweep_field: String,
    pub sweep_value: String,
    pub cfg: ScenarioConfig,
}

/// A field, its values, and the policies compared at each value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub name: String,
    pub field: String,
    pub values: Vec<String>,
    pub policies: Vec<PolicyKind>,
    /// Applied to the base config before the swept field.
    pub fixed: Vec<(String, String)>,
}

pub const BUILTIN_SWEEPS: &[&str] = &["fig2", "fig3", "fig4", "fig5", "fig6", "naive-vs-acrr"];

const FRACTIONS: &[&str] = &["0", "0.0125", "0.025", "0.05", "0.0625"];

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl SweepPlan {
    pub fn builtin(name: &str) -> Option<SweepPlan> {
        let two = vec![PolicyKind::None, PolicyKind::Acrr];
        let under_attack = || {
            vec![
                ("adversary.malicious_fraction".to_string(), "0.025".to_string()),
                ("mobility.speed".to_string(), "10".to_string()),
            ]
        };
        let plan = match name {
            "fig2" | "fig5" | "fig6" => SweepPlan {
                name: name.to_string(),
                field: "adversary.malicious_fraction".into(),
                values: strings(FRACTIONS),
                policies: two,
                fixed: Vec::new(),
            },
            "fig3" => SweepPlan {
                name: name.to_string(),
                field: "traffic.flow_count".into(),
                values: strings(&["4", "8", "12", "16", "20"]),
                policies: two,
                fixed: under_attack(),
            },
            "fig4" => {
                let mut fixed = under_attack();
                fixed.push(("traffic.flow_count".into(), "12".into()));
                SweepPlan {
                    name: name.to_string(),
                    field: "mobility.speed".into(),
                    values: strings(&["5", "10", "15", "20"]),
                    policies: two,
                    fixed,
                }
            }
            "naive-vs-acrr" => SweepPlan {
                name: name.to_string(),
                field: "adversary.malicious_fraction".into(),
                values: strings(FRACTIONS),
                policies: PolicyKind::ALL.to_vec(),
                fixed: Vec::new(),
            },
            _ => return None,
        };
        Some(plan)
    }

    /// A built-in name, or `field=v1,v2,...` optionally followed by
    /// `;policies=p1,p2` (default `none,acrr`).
    pub fn parse(text: &str) -> Result<SweepPlan, HarnessError> {
        if let Some(plan) = Self::builtin(text) {
            return Ok(plan);
        }
        let mut parts = text.split(';');
        let axis = parts.next().unwrap_or("");
        let Some((field, values)) = axis.split_once('=') else {
            return Err(HarnessError::UnknownSweep(text.to_string()));
        };
        let field = field.trim().to_string();
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if field.is_empty() || values.is_empty() {
            return Err(HarnessError::UnknownSweep(text.to_string()));
        }
        if field == "policy.kind" {
            return Err(ConfigError::Field {
                path: field,
                message: "policies are compared with `;policies=...`, not swept as a field".into(),
            }
            .into());
        }
        // Reject unknown paths before anything runs.
        let mut probe = ScenarioConfig::desk();
        if let Err(e) = probe.set(&field, &values[0]) {
            return Err(match e {
                ConfigError::UnknownKey(k) => ConfigError::Field {
                    path: k,
                    message: "unknown field".into(),
                }
                .into(),
                other => other.into(),
            });
        }
        let mut policies = vec![PolicyKind::None, PolicyKind::Acrr];
        for extra in parts {
            match extra.split_once('=') {
                Some(("policies", list)) => {
                    policies = list
                        .split(',')
                        .map(|p| {
                            p.trim().parse::<PolicyKind>().map_err(|e| ConfigError::Field {
                                path: "policies".into(),
                                message: e.to_string(),
                            })
                        })
                        .collect::<Result<_, _>>()?;
                }
                _ => return Err(HarnessError::UnknownSweep(text.to_string())),
            }
        }
        Ok(SweepPlan {
            name: "custom".into(),
            field,
            values,
            policies,
            fixed: Vec::new(),
        })
    }

    /// Every (value, policy) configuration, validated, in output order.
    pub fn points(&self, base: &ScenarioConfig) -> Result<Vec<Point>, HarnessError> {
        let mut out = Vec::with_capacity(self.values.len() * self.policies.len());
        for value in &self.values {
            for &policy in &self.policies {
                let mut cfg = base.clone();
                for (k, v) in &self.fixed {
                    cfg.set(k, v)?;
                }
                cfg.set(&self.field, value)?;
                cfg.policy = policy;
                cfg.validate()?;
                out.push(Point {
                    sweep_field: self.field.clone(),
                    sweep_value: value.clone(),
                    cfg,
                });
            }
        }
        Ok(out)
    }
}

/// Runs `cfg.replications` seeds on up to `jobs` threads, in seed order.
pub fn run_replications(cfg: &ScenarioConfig, jobs: usize) -> Result<Vec<MetricsReport>, HarnessError> {
    cfg.validate()?;
    let point = Point {
        sweep_field: String::new(),
        sweep_value: String::new(),
        cfg: cfg.clone(),
    };
    Ok(run_points(std::slice::from_ref(&point), jobs)?.remove(0))
}

fn run_points(points: &[Point], jobs: usize) -> Result<Vec<Vec<MetricsReport>>, HarnessError> {
    let tasks: Vec<(usize, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| (0..p.cfg.replications as u64).map(move |r| (i, p.cfg.base_seed + r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let results: Vec<Result<MetricsReport, HarnessError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, seed)| run_one(&points[i].cfg, seed))
            .collect()
    });
    let mut grouped: Vec<Vec<MetricsReport>> = points.iter().map(|_| Vec::new()).collect();
    for ((i, _), result) in tasks.iter().zip(results) {
        grouped[*i].push(result?);
    }
    Ok(grouped)
}

fn run_one(cfg: &ScenarioConfig, seed: u64) -> Result<MetricsReport, HarnessError> {
    match catch_unwind(AssertUnwindSafe(|| simkernel::run(cfg, seed))) {
        Ok(r) => Ok(r?),
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Err(HarnessError::RunPanicked { seed, message })
        }
    }
}

/// Formats floats for CSV: shortest round-trip form, `inf`, `-inf`, `nan`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        v.to_string()
    }
}

pub fn runs_header() -> Vec<String> {
    let mut h = strings(&["scenario", "sweep_field", "sweep_value", "policy", "seed"]);
    h.extend(MetricsReport::scalar_names().into_iter().map(String::from));
    h
}

pub fn aggregate_header() -> Vec<String> {
    let mut h = strings(&["scenario", "sweep_field", "sweep_value", "policy", "n"]);
    for m in MetricsReport::scalar_names() {
        h.push(format!("{m}_mean"));
        h.push(format!("{m}_ci95"));
    }
    h
}

fn run_row(p: &Point, r: &MetricsReport) -> Vec<String> {
    let mut row = vec![
        p.cfg.name.clone(),
        p.sweep_field.clone(),
        p.sweep_value.clone(),
        p.cfg.policy.to_string(),
        r.seed.to_string(),
    ];
    row.extend(r.scalars().into_iter().map(|(_, v)| format_f64(v)));
    row
}

fn aggregate_row(p: &Point, a: &Aggregate) -> Vec<String> {
    let mut row = vec![
        p.cfg.name.clone(),
        p.sweep_field.clone(),
        p.sweep_value.clone(),
        p.cfg.policy.to_string(),
        a.n.to_string(),
    ];
    for m in &a.metrics {
        row.push(format_f64(m.mean));
        row.push(format_f64(m.ci95));
    }
    row
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), HarnessError> {
    let err = |source| HarnessError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// What a batch or sweep produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub runs: usize,
    /// `None` when aggregation was refused (fewer than two replications).
    pub aggregates: Option<Vec<(Point, Aggregate)>>,
    pub files: Vec<PathBuf>,
}

impl Summary {
    pub fn refusal_message(&self) -> Option<&'static str> {
        self.aggregates
            .is_none()
            .then_some("aggregation skipped: a 95% confidence interval needs at least 2 replications")
    }
}

fn write_outputs(points: &[Point], reports: &[Vec<MetricsReport>], meta: &str, out: &Path, per_point: bool) -> Result<Summary, HarnessError> {
    create_dir(out)?;
    let mut files = Vec::new();

    let rows: Vec<Vec<String>> = points
        .iter()
        .zip(reports)
        .flat_map(|(p, rs)| rs.iter().map(move |r| run_row(p, r)))
        .collect();
    let runs_path = out.join("runs.csv");
    write_csv(&runs_path, &runs_header(), &rows)?;
    files.push(runs_path);

    let meta_path = out.join("meta.txt");
    write_text(&meta_path, meta)?;
    files.push(meta_path);

    let mut aggregates = Vec::new();
    for (p, rs) in points.iter().zip(reports) {
        match aggregate(rs) {
            Ok(a) => aggregates.push((p.clone(), a)),
            Err(AggregateError::TooFewReports(_)) => {
                return Ok(Summary {
                    runs: rows.len(),
                    aggregates: None,
                    files,
                });
            }
        }
    }
    let agg_rows: Vec<Vec<String>> = aggregates.iter().map(|(p, a)| aggregate_row(p, a)).collect();
    let agg_path = out.join("aggregate.csv");
    write_csv(&agg_path, &aggregate_header(), &agg_rows)?;
    files.push(agg_path);

    if per_point {
        let dir = out.join("points");
        create_dir(&dir)?;
        for ((p, _), row) in aggregates.iter().zip(&agg_rows) {
            let path = dir.join(format!("{}_{}.csv", p.cfg.policy, p.sweep_value));
            write_csv(&path, &aggregate_header(), std::slice::from_ref(row))?;
            files.push(path);
        }
    }

    Ok(Summary {
        runs: rows.len(),
        aggregates: Some(aggregates),
        files,
    })
}

/// Runs one scenario's replications and writes `runs.csv`, `meta.txt` and,
/// with at least two replications, `aggregate.csv` into `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path, jobs: usize) -> Result<Summary, HarnessError> {
    cfg.validate()?;
    let point = Point {
        sweep_field: String::new(),
        sweep_value: String::new(),
        cfg: cfg.clone(),
    };
    let reports = run_points(std::slice::from_ref(&point), jobs)?;
    write_outputs(&[point], &reports, &cfg.to_text(), out, false)
}

/// Runs every point of `plan` over `base` and writes the combined
/// `runs.csv`, `aggregate.csv`, `meta.txt` and one file per point under
/// `points/`.
pub fn run_sweep(plan: &SweepPlan, base: &ScenarioConfig, out: &Path, jobs: usize) -> Result<Summary, HarnessError> {
    base.validate()?;
    let points = plan.points(base)?;
    let reports = run_points(&points, jobs)?;
    let mut meta = base.to_text();
    writeln!(meta, "# sweep = {}", plan.name).unwrap();
    writeln!(meta, "# sweep.field = {}", plan.field).unwrap();
    writeln!(meta, "# sweep.values = {}", plan.values.join(",")).unwrap();
    let names: Vec<&str> = plan.policies.iter().map(|p| p.as_str()).collect();
    writeln!(meta, "# sweep.policies = {}", names.join(",")).unwrap();
    for (k, v) in &plan.fixed {
        writeln!(meta, "# sweep.fixed {k} = {v}").unwrap();
    }
    write_outputs(&points, &reports, &meta, out, true)
}
