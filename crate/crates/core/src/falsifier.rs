//! Outer search loop: runs the shrinking search for one objective at a time,
//! restarting with a fresh random stream (and the next objective of the plan)
//! whenever the box collapses, until a counterexample is found or the time
//! budget is spent.
//!
//! A `Falsified` verdict is only produced after the counterexample has been
//! re-checked with a separate forward pass. An `Unknown` verdict says nothing
//! about whether the property holds.

use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::{Objective, ObjectivePlan};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::property::{DomainBox, Interval, SafetyProperty};
use crate::racos::{OptimizerParams, SearchState, StepOutcome};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq)]
pub struct FalsifierConfig {
    pub timeout: Duration,
    pub params: OptimizerParams,
    pub base_seed: u64,
    /// `None` keeps restarting until the timeout.
    pub max_restarts: Option<usize>,
    /// Stop at the first collapsed box instead of restarting.
    pub theta_terminates: bool,
}

impl FalsifierConfig {
    pub fn for_network(net: &Network) -> Self {
        Self {
            timeout: DEFAULT_TIMEOUT,
            params: OptimizerParams::for_input_dim(net.input_dim()),
            base_seed: 0,
            max_restarts: None,
            theta_terminates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::Config("timeout must be positive".into()));
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Falsified,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Falsified => "falsified",
            Verdict::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    /// The predicate with the offending output values.
    pub violated: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchStats {
    /// Network evaluations across all restarts.
    pub total_samples: usize,
    /// Sampling rounds across all restarts.
    pub iterations: usize,
    pub restarts: usize,
    pub wall_time: Duration,
    /// Objective active when the search stopped.
    pub objective: Objective,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalsificationOutcome {
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub stats: SearchStats,
}

impl FalsificationOutcome {
    pub fn is_falsified(&self) -> bool {
        self.verdict == Verdict::Falsified
    }
}

/// The finite box actually searched: the property's domain with unbounded
/// sides replaced by the network's declared input range.
pub fn search_domain(net: &Network, prop: &SafetyProperty) -> Result<DomainBox> {
    let bound = prop.bind(net)?;
    let declared = net.input_bounds();
    let mut intervals = Vec::with_capacity(bound.domain.dim());
    for (i, iv) in bound.domain.bounds().iter().enumerate() {
        let mut iv = *iv;
        if !iv.lower.is_finite() || !iv.upper.is_finite() {
            let Some((lo, hi)) = declared.map(|d| d[i]) else {
                return Err(Error::UnboundedDomain {
                    dim: i,
                    lower: iv.lower,
                    upper: iv.upper,
                });
            };
            if !iv.lower.is_finite() {
                iv.lower = lo;
            }
            if !iv.upper.is_finite() {
                iv.upper = hi;
            }
            if !(iv.lower <= iv.upper) {
                return Err(Error::Config(format!(
                    "input {} range [{}, {}] does not meet the network's declared range [{lo}, {hi}]",
                    i + 1,
                    iv.lower,
                    iv.upper
                )));
            }
        }
        intervals.push(Interval {
            lower: iv.lower,
            upper: iv.upper,
        });
    }
    let domain = DomainBox::new(intervals)?;
    domain.ensure_finite()?;
    Ok(domain)
}

/// True iff `x` lies in the property's domain and the network's output at
/// `x` violates the predicate.
pub fn verify_counterexample(net: &Network, prop: &SafetyProperty, x: &[f64]) -> Result<bool> {
    if x.len() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            actual: x.len(),
        });
    }
    let prop = prop.bind(net)?;
    if !prop.domain.contains(x) {
        return Ok(false);
    }
    let y = net.forward(x)?;
    Ok(!prop.predicate.eval(&y)?)
}

pub fn falsify(
    net: &Network,
    prop: &SafetyProperty,
    plan: &ObjectivePlan,
    cfg: &FalsifierConfig,
) -> Result<FalsificationOutcome> {
    let start = Instant::now();
    cfg.validate()?;
    let prop = prop.bind(net)?;
    let domain = search_domain(net, &prop)?;
    for o in plan.objectives() {
        if o.target >= net.output_dim() {
            return Err(Error::IndexOutOfRange {
                index: o.target,
                len: net.output_dim(),
            });
        }
    }

    let mut total_samples = 0;
    let mut iterations = 0;
    let mut restart = 0;
    let stats = |objective, total_samples, iterations, restarts| SearchStats {
        total_samples,
        iterations,
        restarts,
        wall_time: start.elapsed(),
        objective,
        seed: cfg.base_seed,
    };

    loop {
        let objective = plan.round_robin(restart);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed);
        rng.set_stream(restart as u64);
        let mut state = SearchState::new(domain.clone(), rng);

        loop {
            if start.elapsed() >= cfg.timeout {
                return Ok(FalsificationOutcome {
                    verdict: Verdict::Unknown,
                    counterexample: None,
                    stats: stats(objective, total_samples, iterations, restart),
                });
            }
            iterations += 1;
            match state.step(net, &prop, &objective, &cfg.params)? {
                StepOutcome::Falsified { sample, evaluated } => {
                    total_samples += evaluated;
                    if !verify_counterexample(net, &prop, &sample.input)? {
                        return Err(Error::Verification(format!(
                            "input {:?} does not violate {}",
                            sample.input, prop.predicate
                        )));
                    }
                    let output = net.forward(&sample.input)?;
                    let violated = prop.predicate.render_with_values(&output);
                    return Ok(FalsificationOutcome {
                        verdict: Verdict::Falsified,
                        counterexample: Some(Counterexample {
                            input: sample.input,
                            output,
                            violated,
                        }),
                        stats: stats(objective, total_samples, iterations, restart),
                    });
                }
                StepOutcome::Continue { evaluated } => total_samples += evaluated,
                StepOutcome::Converged { evaluated } => {
                    total_samples += evaluated;
                    break;
                }
            }
        }

        let exhausted = cfg.max_restarts.is_some_and(|m| restart >= m);
        if cfg.theta_terminates || exhausted {
            return Ok(FalsificationOutcome {
                verdict: Verdict::Unknown,
                counterexample: None,
                stats: stats(
                    plan.round_robin(restart),
                    total_samples,
                    iterations,
                    restart,
                ),
            });
        }
        restart += 1;
    }
}
