//! Feed-forward networks and exact forward evaluation.
//!
//! A network is an ordered list of dense layers. Each layer computes
//! `a = act(W x + b)` with one activation shared by all its neurons.
//! Networks loaded from NNet files also carry input normalization and output
//! denormalization constants; [`Network::forward`] applies them, so callers
//! always work in physical units.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "linear" | "identity" => Ok(Activation::Linear),
            _ => Err(Error::UnknownActivation(s.to_string())),
        }
    }
}

/// Dense layer. Weights are row-major with shape `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(rows: Vec<Vec<f64>>, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        let outputs = rows.len();
        if outputs == 0 {
            return Err(Error::Shape("layer has no neurons".into()));
        }
        if biases.len() != outputs {
            return Err(Error::Shape(format!(
                "weight matrix has {outputs} rows but {} biases",
                biases.len()
            )));
        }
        let inputs = rows[0].len();
        if inputs == 0 {
            return Err(Error::Shape("layer has no inputs".into()));
        }
        let mut weights = Vec::with_capacity(inputs * outputs);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != inputs {
                return Err(Error::Shape(format!(
                    "weight row {r} has {} columns, expected {inputs}",
                    row.len()
                )));
            }
            weights.extend(row);
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::Shape("layer contains non-finite parameters".into()));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            biases,
            activation,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn row(&self, neuron: usize) -> &[f64] {
        &self.weights[neuron * self.inputs..(neuron + 1) * self.inputs]
    }

    /// `act(W x + b)`. Panics if `input.len() != self.inputs()`.
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.outputs);
        self.apply_into(input, &mut out);
        out
    }

    fn apply_into(&self, input: &[f64], out: &mut Vec<f64>) {
        assert_eq!(input.len(), self.inputs);
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, &b)| {
                    let g = row.iter().zip(input).fold(b, |acc, (w, a)| acc + w * a);
                    self.activation.apply(g)
                }),
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputNormalization {
    pub means: Vec<f64>,
    pub ranges: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputDenormalization {
    pub mean: f64,
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    output_dim: usize,
    layers: Vec<Layer>,
    input_normalization: Option<InputNormalization>,
    output_denormalization: Option<OutputDenormalization>,
    /// Declared valid input range per dimension (NNet header mins/maxes).
    input_bounds: Option<Vec<(f64, f64)>>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::Shape("network has no layers".into()))?;
        let input_dim = first.inputs();
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].inputs() != pair[0].outputs() {
                return Err(Error::Shape(format!(
                    "layer {} expects {} inputs but layer {} produces {}",
                    i + 1,
                    pair[1].inputs(),
                    i,
                    pair[0].outputs()
                )));
            }
        }
        let output_dim = layers.last().map(Layer::outputs).unwrap_or_default();
        Ok(Self {
            input_dim,
            output_dim,
            layers,
            input_normalization: None,
            output_denormalization: None,
            input_bounds: None,
        })
    }

    pub fn with_input_normalization(mut self, norm: InputNormalization) -> Result<Self> {
        if norm.means.len() != self.input_dim || norm.ranges.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "normalization has {} means and {} ranges for {} inputs",
                norm.means.len(),
                norm.ranges.len(),
                self.input_dim
            )));
        }
        if norm.ranges.iter().any(|r| !(*r > 0.0) || !r.is_finite())
            || norm.means.iter().any(|m| !m.is_finite())
        {
            return Err(Error::Shape(
                "normalization ranges must be finite and strictly positive".into(),
            ));
        }
        self.input_normalization = Some(norm);
        Ok(self)
    }

    pub fn with_output_denormalization(mut self, denorm: OutputDenormalization) -> Result<Self> {
        if !denorm.mean.is_finite() || !denorm.range.is_finite() {
            return Err(Error::Shape("output denormalization must be finite".into()));
        }
        self.output_denormalization = Some(denorm);
        Ok(self)
    }

    pub fn with_input_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "{} input bounds for {} inputs",
                bounds.len(),
                self.input_dim
            )));
        }
        if bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::Shape("input bound with min > max".into()));
        }
        self.input_bounds = Some(bounds);
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_normalization(&self) -> Option<&InputNormalization> {
        self.input_normalization.as_ref()
    }

    pub fn output_denormalization(&self) -> Option<OutputDenormalization> {
        self.output_denormalization
    }

    pub fn input_bounds(&self) -> Option<&[(f64, f64)]> {
        self.input_bounds.as_deref()
    }

    /// Evaluates the network on a physical-unit input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index, value });
        }

        let mut current: Vec<f64> = match &self.input_normalization {
            Some(norm) => x
                .iter()
                .zip(norm.means.iter().zip(&norm.ranges))
                .map(|(v, (m, r))| (v - m) / r)
                .collect(),
            None => x.to_vec(),
        };
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.apply_into(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        if let Some(d) = self.output_denormalization {
            for o in &mut current {
                *o = *o * d.range + d.mean;
            }
        }
        Ok(current)
    }
}
