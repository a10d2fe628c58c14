//! Reader and writer for the NNet text format used by the ACAS Xu networks.
//!
//! Layout after any `//` comment lines:
//!
//! ```text
//! num_layers, input_dim, output_dim, max_layer_size,
//! size_0, size_1, ..., size_num_layers,
//! flag,                           (historical "symmetric" flag, ignored)
//! min_0, ..., min_{n-1},
//! max_0, ..., max_{n-1},
//! mean_0, ..., mean_{n-1}, mean_out,
//! range_0, ..., range_{n-1}, range_out,
//! ```
//!
//! followed, for each layer, by one line per neuron of weights and then one
//! line per neuron holding its bias. Hidden layers are ReLU, the last layer is
//! linear.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{Activation, InputNormalization, Layer, Network, OutputDenormalization};

#[derive(Debug, Clone, PartialEq)]
pub struct NNetHeader {
    pub num_layers: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub max_layer_size: usize,
    pub layer_sizes: Vec<usize>,
    pub input_mins: Vec<f64>,
    pub input_maxes: Vec<f64>,
    /// `input_dim + 1` entries; the last one belongs to the outputs.
    pub means: Vec<f64>,
    /// `input_dim + 1` entries; the last one belongs to the outputs.
    pub ranges: Vec<f64>,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-comment, non-blank line with its 1-based number.
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        self.inner.by_ref().find_map(|(i, l)| {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with("//")).then_some((i + 1, t))
        })
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_data()
            .ok_or_else(|| Error::Shape(format!("file ended before {what}")))
    }
}

fn fields(line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::parse(line_no, format!("invalid number `{f}`")))
        })
        .collect()
}

fn int_fields(line_no: usize, line: &str) -> Result<Vec<usize>> {
    line.split(',')
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("invalid integer `{f}`")))
        })
        .collect()
}

fn exactly(line_no: usize, values: Vec<f64>, n: usize, what: &str) -> Result<Vec<f64>> {
    if values.len() != n {
        return Err(Error::Shape(format!(
            "line {line_no}: expected {n} {what}, found {}",
            values.len()
        )));
    }
    Ok(values)
}

fn parse_header(lines: &mut Lines<'_>) -> Result<NNetHeader> {
    let (ln, l) = lines.expect("header")?;
    let dims = int_fields(ln, l)?;
    if dims.len() < 4 {
        return Err(Error::parse(
            ln,
            "header needs num_layers, inputs, outputs, max size",
        ));
    }
    let (num_layers, input_dim, output_dim, max_layer_size) = (dims[0], dims[1], dims[2], dims[3]);
    if num_layers == 0 || input_dim == 0 || output_dim == 0 {
        return Err(Error::Shape("header declares an empty network".into()));
    }

    let (ln, l) = lines.expect("layer sizes")?;
    let layer_sizes = int_fields(ln, l)?;
    if layer_sizes.len() != num_layers + 1 {
        return Err(Error::Shape(format!(
            "line {ln}: {} layer sizes for {num_layers} layers",
            layer_sizes.len()
        )));
    }
    if layer_sizes[0] != input_dim || layer_sizes[num_layers] != output_dim {
        return Err(Error::Shape(format!(
            "line {ln}: layer sizes do not start at {input_dim} and end at {output_dim}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Shape(format!("line {ln}: zero-sized layer")));
    }

    let (ln, l) = lines.expect("flag line")?;
    fields(ln, l)?;

    let (ln, l) = lines.expect("input minimums")?;
    let input_mins = exactly(ln, fields(ln, l)?, input_dim, "minimums")?;
    let (ln, l) = lines.expect("input maximums")?;
    let input_maxes = exactly(ln, fields(ln, l)?, input_dim, "maximums")?;
    if input_mins
        .iter()
        .zip(&input_maxes)
        .any(|(lo, hi)| !(lo <= hi))
    {
        return Err(Error::Shape(format!(
            "line {ln}: input minimum exceeds maximum"
        )));
    }
    let (ln, l) = lines.expect("means")?;
    let means = exactly(ln, fields(ln, l)?, input_dim + 1, "means")?;
    let (ln, l) = lines.expect("ranges")?;
    let ranges = exactly(ln, fields(ln, l)?, input_dim + 1, "ranges")?;

    Ok(NNetHeader {
        num_layers,
        input_dim,
        output_dim,
        max_layer_size,
        layer_sizes,
        input_mins,
        input_maxes,
        means,
        ranges,
    })
}

pub fn parse_nnet(text: &str) -> Result<Network> {
    let mut lines = Lines::new(text);
    let header = parse_header(&mut lines)?;

    let mut layers = Vec::with_capacity(header.num_layers);
    for (l, sizes) in header.layer_sizes.windows(2).enumerate() {
        let (inputs, outputs) = (sizes[0], sizes[1]);
        let mut rows = Vec::with_capacity(outputs);
        for r in 0..outputs {
            let (ln, line) = lines.expect(&format!("weights of layer {l} row {r}"))?;
            rows.push(exactly(ln, fields(ln, line)?, inputs, "weights")?);
        }
        let mut biases = Vec::with_capacity(outputs);
        for r in 0..outputs {
            let (ln, line) = lines.expect(&format!("bias of layer {l} neuron {r}"))?;
            biases.extend(exactly(ln, fields(ln, line)?, 1, "bias")?);
        }
        let activation = if l + 1 == header.num_layers {
            Activation::Linear
        } else {
            Activation::Relu
        };
        layers.push(Layer::new(rows, biases, activation)?);
    }
    if let Some((ln, _)) = lines.next_data() {
        return Err(Error::Shape(format!(
            "line {ln}: unexpected data after the last layer"
        )));
    }

    let n = header.input_dim;
    Network::new(layers)?
        .with_input_normalization(InputNormalization {
            means: header.means[..n].to_vec(),
            ranges: header.ranges[..n].to_vec(),
        })?
        .with_output_denormalization(OutputDenormalization {
            mean: header.means[n],
            range: header.ranges[n],
        })?
        .with_input_bounds(
            header
                .input_mins
                .iter()
                .copied()
                .zip(header.input_maxes.iter().copied())
                .collect(),
        )
}

pub fn load_nnet(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_nnet(&text)
}

/// Serializes a network in NNet form. Only networks whose hidden layers are
/// ReLU and whose last layer is linear can be written; missing normalization
/// is written as the identity and missing bounds as the widest finite range.
pub fn to_nnet_string(net: &Network) -> Result<String> {
    let layers = net.layers();
    let last = layers.len() - 1;
    for (i, layer) in layers.iter().enumerate() {
        let expected = if i == last {
            Activation::Linear
        } else {
            Activation::Relu
        };
        if layer.activation() != expected {
            return Err(Error::Config(format!(
                "layer {i} uses {} but NNet requires {expected}",
                layer.activation()
            )));
        }
    }

    let n = net.input_dim();
    let sizes: Vec<usize> = std::iter::once(n)
        .chain(layers.iter().map(|l| l.outputs()))
        .collect();
    let max_size = sizes.iter().copied().max().unwrap_or(n);
    let (mins, maxes): (Vec<f64>, Vec<f64>) = match net.input_bounds() {
        Some(b) => b.iter().copied().unzip(),
        None => (vec![f64::MIN; n], vec![f64::MAX; n]),
    };
    let (mut means, mut ranges) = match net.input_normalization() {
        Some(norm) => (norm.means.clone(), norm.ranges.clone()),
        None => (vec![0.0; n], vec![1.0; n]),
    };
    let out = net
        .output_denormalization()
        .unwrap_or(OutputDenormalization {
            mean: 0.0,
            range: 1.0,
        });
    means.push(out.mean);
    ranges.push(out.range);

    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?},")).collect::<String>();
    let mut s = String::new();
    let _ = writeln!(s, "// written by nnfalsify");
    let _ = writeln!(
        s,
        "{},{},{},{},",
        layers.len(),
        n,
        net.output_dim(),
        max_size
    );
    let _ = writeln!(
        s,
        "{}",
        sizes.iter().map(|x| format!("{x},")).collect::<String>()
    );
    let _ = writeln!(s, "0,");
    let _ = writeln!(s, "{}", join(&mins));
    let _ = writeln!(s, "{}", join(&maxes));
    let _ = writeln!(s, "{}", join(&means));
    let _ = writeln!(s, "{}", join(&ranges));
    for layer in layers {
        for r in 0..layer.outputs() {
            let _ = writeln!(s, "{}", join(layer.row(r)));
        }
        for b in layer.biases() {
            let _ = writeln!(s, "{b:?},");
        }
    }
    Ok(s)
}
