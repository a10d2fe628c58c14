//! Machine-readable run reports.
//!
//! A single run serializes to
//!
//! ```json
//! {
//!   "verdict": "falsified",
//!   "counterexample": { "input": [..], "output": [..] },
//!   "stats": { "samples": 1, "iterations": 1, "restarts": 0,
//!              "time_s": 0.004, "seed": 0, "objective": "minimize o1" }
//! }
//! ```
//!
//! with `counterexample` set to `null` when nothing was found. Floats are
//! written with shortest round-trip precision, so a counterexample read back
//! from a report reproduces the exact input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::falsifier::{FalsificationOutcome, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub verdict: Verdict,
    pub counterexample: Option<CounterexampleReport>,
    pub stats: StatsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub samples: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub time_s: f64,
    pub seed: u64,
    pub objective: String,
}

impl From<&FalsificationOutcome> for RunReport {
    fn from(o: &FalsificationOutcome) -> Self {
        Self {
            verdict: o.verdict,
            counterexample: o.counterexample.as_ref().map(|c| CounterexampleReport {
                input: c.input.clone(),
                output: c.output.clone(),
            }),
            stats: StatsReport {
                samples: o.stats.total_samples,
                iterations: o.stats.iterations,
                restarts: o.stats.restarts,
                time_s: o.stats.wall_time.as_secs_f64(),
                seed: o.stats.seed,
                objective: o.stats.objective.to_string(),
            },
        }
    }
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunReport =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if (r.verdict == Verdict::Falsified) != r.counterexample.is_some() {
            return Err(Error::parse(
                0,
                "verdict and counterexample presence disagree",
            ));
        }
        Ok(r)
    }
}

/// One row of a batch CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub property: String,
    pub network: String,
    pub run: usize,
    /// `falsified`, `unknown`, or `error`.
    pub verdict: String,
    pub time_s: f64,
    pub samples: usize,
    pub seed: u64,
    /// Counterexample input for falsified runs, the message for errors.
    pub detail: Option<String>,
}

impl RunRecord {
    pub fn is_falsified(&self) -> bool {
        self.verdict == "falsified"
    }
}

/// Per (property, network) summary; means cover falsified runs only.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRecord {
    pub property: String,
    pub network: String,
    pub total_runs: usize,
    pub falsified: usize,
    pub mean_time_s: Option<f64>,
    pub mean_samples: Option<f64>,
}

/// Groups records by (property, network) in first-seen order.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRecord> {
    let mut out: Vec<AggregateRecord> = Vec::new();
    let mut sums: Vec<(f64, f64)> = Vec::new();
    for r in records {
        let idx = match out
            .iter()
            .position(|a| a.property == r.property && a.network == r.network)
        {
            Some(i) => i,
            None => {
                out.push(AggregateRecord {
                    property: r.property.clone(),
                    network: r.network.clone(),
                    total_runs: 0,
                    falsified: 0,
                    mean_time_s: None,
                    mean_samples: None,
                });
                sums.push((0.0, 0.0));
                out.len() - 1
            }
        };
        out[idx].total_runs += 1;
        if r.is_falsified() {
            out[idx].falsified += 1;
            sums[idx].0 += r.time_s;
            sums[idx].1 += r.samples as f64;
        }
    }
    for (a, (t, s)) in out.iter_mut().zip(sums) {
        if a.falsified > 0 {
            a.mean_time_s = Some(t / a.falsified as f64);
            a.mean_samples = Some(s / a.falsified as f64);
        }
    }
    out
}

/// `;`-separated, shortest round-trip formatting of a vector.
pub fn format_vector(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split([';', ','])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::parse(0, format!("invalid number `{t}` in vector")))
        })
        .collect()
}
