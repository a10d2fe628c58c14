//! JSON network description.
//!
//! ```json
//! {
//!   "input_dim": 2,
//!   "layers": [
//!     { "weights": [[1, -1], [2, 1]], "biases": [0, -1], "activation": "relu" },
//!     { "weights": [[3, -1]], "biases": [0.5], "activation": "linear" }
//!   ],
//!   "normalization": {
//!     "input_means": [0, 0], "input_ranges": [1, 1],
//!     "output_mean": 0, "output_range": 1
//!   },
//!   "input_bounds": [[0, 1], [0, 1]]
//! }
//! ```
//!
//! `normalization` and `input_bounds` are optional; activation names are
//! case-insensitive.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{InputNormalization, Layer, Network, OutputDenormalization};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NativeNetwork {
    pub input_dim: usize,
    pub layers: Vec<NativeLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NativeNormalization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_bounds: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NativeLayer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub activation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NativeNormalization {
    pub input_means: Vec<f64>,
    pub input_ranges: Vec<f64>,
    #[serde(default)]
    pub output_mean: f64,
    #[serde(default = "one")]
    pub output_range: f64,
}

fn one() -> f64 {
    1.0
}

impl NativeNetwork {
    pub fn into_network(self) -> Result<Network> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.into_iter().enumerate() {
            let activation = l.activation.parse()?;
            let layer = Layer::new(l.weights, l.biases, activation)
                .map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
            layers.push(layer);
        }
        let mut net = Network::new(layers)?;
        if net.input_dim() != self.input_dim {
            return Err(Error::Shape(format!(
                "input_dim is {} but the first layer takes {} inputs",
                self.input_dim,
                net.input_dim()
            )));
        }
        if let Some(norm) = self.normalization {
            net = net
                .with_input_normalization(InputNormalization {
                    means: norm.input_means,
                    ranges: norm.input_ranges,
                })?
                .with_output_denormalization(OutputDenormalization {
                    mean: norm.output_mean,
                    range: norm.output_range,
                })?;
        }
        if let Some(bounds) = self.input_bounds {
            net = net.with_input_bounds(bounds)?;
        }
        Ok(net)
    }

    pub fn from_network(net: &Network) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| NativeLayer {
                weights: (0..l.outputs()).map(|r| l.row(r).to_vec()).collect(),
                biases: l.biases().to_vec(),
                activation: l.activation().name().to_string(),
            })
            .collect();
        let normalization = match (net.input_normalization(), net.output_denormalization()) {
            (None, None) => None,
            (inp, out) => {
                let n = net.input_dim();
                let (input_means, input_ranges) = inp
                    .map(|i| (i.means.clone(), i.ranges.clone()))
                    .unwrap_or_else(|| (vec![0.0; n], vec![1.0; n]));
                let out = out.unwrap_or(OutputDenormalization {
                    mean: 0.0,
                    range: 1.0,
                });
                Some(NativeNormalization {
                    input_means,
                    input_ranges,
                    output_mean: out.mean,
                    output_range: out.range,
                })
            }
        };
        Self {
            input_dim: net.input_dim(),
            layers,
            normalization,
            input_bounds: net.input_bounds().map(<[_]>::to_vec),
        }
    }
}

pub fn parse_native(text: &str) -> Result<Network> {
    let doc: NativeNetwork =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    doc.into_network()
}

pub fn load_native(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_native(&text)
}

pub fn to_native_string(net: &Network) -> String {
    serde_json::to_string_pretty(&NativeNetwork::from_network(net))
        .expect("network description is always serializable")
}
