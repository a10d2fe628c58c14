//! Property-directed falsification of feed-forward neural networks.
//!
//! Given a network and a safety property (an input box plus a predicate over
//! the outputs), the search looks for a concrete input inside the box whose
//! output violates the predicate. It never evaluates gradients: inputs are
//! sampled uniformly from a box that is repeatedly shrunk around the samples
//! that push a chosen output towards the predicate's boundary.
//!
//! The result is either a counterexample, re-checked before it is reported,
//! or `Unknown`. `Unknown` is not a proof of safety.
//!
//! ```
//! use nnfalsify_core::{analyze_spec, falsify, parse_property, FalsifierConfig, Verdict};
//! use nnfalsify_core::network::{Activation, Layer, Network};
//!
//! let net = Network::new(vec![
//!     Layer::new(vec![vec![1.0]], vec![0.0], Activation::Linear).unwrap(),
//! ]).unwrap();
//! let prop = parse_property("x1 in [0, 1]\npredicate: o1 < 0.5").unwrap();
//! let plan = analyze_spec(&prop.predicate);
//! let out = falsify(&net, &prop, &plan, &FalsifierConfig::for_network(&net)).unwrap();
//! assert_eq!(out.verdict, Verdict::Falsified);
//! ```

// `!(a <= b)` is used on purpose so that NaN bounds are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyzer;
pub mod error;
pub mod falsifier;
pub mod io;
pub mod network;
pub mod property;
pub mod racos;

pub use analyzer::{analyze_spec, objective_value, Direction, Objective, ObjectivePlan};
pub use error::{Error, Result};
pub use falsifier::{
    falsify, search_domain, verify_counterexample, Counterexample, FalsificationOutcome,
    FalsifierConfig, SearchStats, Verdict,
};
pub use network::{Activation, Layer, Network};
pub use property::{
    parse_property, sample_uniform, DomainBox, Interval, Predicate, SafetyProperty,
};
pub use racos::{
    converged, make_samples_and_evaluate, select_positive, shrink_box, BatchOutcome,
    OptimizerParams, Sample,
};
