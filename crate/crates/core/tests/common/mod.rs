//! Reference implementations and generators shared by the integration tests.
//!
//! The reference forward pass and predicate evaluator are written from the
//! definitions, without calling the library's evaluation code, so they can be
//! used as oracles.

#![allow(dead_code)]

use nnfalsify_core::property::CmpOp;
use nnfalsify_core::{Activation, DomainBox, Interval, Layer, Network, Predicate, SafetyProperty};
use rand::Rng;

pub fn reference_forward(net: &Network, x: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = match net.input_normalization() {
        Some(n) => (0..x.len())
            .map(|i| (x[i] - n.means[i]) / n.ranges[i])
            .collect(),
        None => x.to_vec(),
    };
    for layer in net.layers() {
        let mut next = Vec::with_capacity(layer.outputs());
        for j in 0..layer.outputs() {
            let w = layer.row(j);
            let mut g = layer.biases()[j];
            for i in 0..a.len() {
                g += w[i] * a[i];
            }
            next.push(match layer.activation() {
                Activation::Relu => g.max(0.0),
                Activation::Sigmoid => 1.0 / (1.0 + (-g).exp()),
                Activation::Tanh => g.tanh(),
                Activation::Linear => g,
            });
        }
        a = next;
    }
    if let Some(d) = net.output_denormalization() {
        for v in &mut a {
            *v = *v * d.range + d.mean;
        }
    }
    a
}

fn reference_cmp(op: CmpOp, a: f64, b: f64) -> bool {
    match op {
        CmpOp::Le => a <= b,
        CmpOp::Ge => a >= b,
        CmpOp::Lt => a < b,
        CmpOp::Gt => a > b,
    }
}

pub fn reference_eval(p: &Predicate, y: &[f64]) -> bool {
    match p {
        Predicate::And(a, b) => reference_eval(a, y) && reference_eval(b, y),
        Predicate::Or(a, b) => reference_eval(a, y) || reference_eval(b, y),
        Predicate::VarVar { lhs, op, rhs } => reference_cmp(*op, y[*lhs], y[*rhs]),
        Predicate::VarConst { var, op, value } => reference_cmp(*op, y[*var], *value),
    }
}

/// Independent counterexample check: in the box and predicate false.
pub fn reference_violates(net: &Network, prop: &SafetyProperty, x: &[f64]) -> bool {
    let in_box = prop
        .domain
        .bounds()
        .iter()
        .zip(x)
        .all(|(iv, v)| iv.lower <= *v && *v <= iv.upper);
    in_box && !reference_eval(&prop.predicate, &reference_forward(net, x))
}

pub fn random_op<R: Rng>(rng: &mut R) -> CmpOp {
    [CmpOp::Le, CmpOp::Ge, CmpOp::Lt, CmpOp::Gt][rng.gen_range(0..4)]
}

pub fn random_activation<R: Rng>(rng: &mut R) -> Activation {
    [
        Activation::Relu,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Linear,
    ][rng.gen_range(0..4)]
}

/// Dense network with the given layer widths; hidden activations random,
/// output linear.
pub fn random_network<R: Rng>(rng: &mut R, widths: &[usize]) -> Network {
    let mut layers = Vec::new();
    for (k, w) in widths.windows(2).enumerate() {
        let rows = (0..w[1])
            .map(|_| (0..w[0]).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let biases = (0..w[1]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let act = if k + 2 == widths.len() {
            Activation::Linear
        } else {
            random_activation(rng)
        };
        layers.push(Layer::new(rows, biases, act).unwrap());
    }
    Network::new(layers).unwrap()
}

pub fn random_predicate<R: Rng>(rng: &mut R, outputs: usize, depth: usize) -> Predicate {
    if depth == 0 || rng.gen_bool(0.3) {
        let lhs = rng.gen_range(0..outputs);
        let op = random_op(rng);
        if outputs > 1 && rng.gen_bool(0.5) {
            Predicate::var_var(lhs, op, rng.gen_range(0..outputs))
        } else {
            // short decimals so the printed form parses back exactly
            let value = (rng.gen_range(-3000..3000) as f64) / 1000.0;
            Predicate::var_const(lhs, op, value)
        }
    } else {
        let a = random_predicate(rng, outputs, depth - 1);
        let b = random_predicate(rng, outputs, depth - 1);
        if rng.gen_bool(0.5) {
            Predicate::and(a, b)
        } else {
            Predicate::or(a, b)
        }
    }
}

pub fn random_box<R: Rng>(rng: &mut R, dim: usize) -> DomainBox {
    DomainBox::new(
        (0..dim)
            .map(|_| {
                let lo: f64 = rng.gen_range(-2.0..2.0);
                let w: f64 = rng.gen_range(0.0..2.0);
                Interval::new(lo, lo + w).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

pub fn point_in<R: Rng>(rng: &mut R, b: &DomainBox) -> Vec<f64> {
    b.bounds()
        .iter()
        .map(|iv| {
            if iv.lower == iv.upper {
                iv.lower
            } else {
                rng.gen_range(iv.lower..=iv.upper)
            }
        })
        .collect()
}

pub fn identity(dim: usize) -> Network {
    let rows = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    Network::new(vec![
        Layer::new(rows, vec![0.0; dim], Activation::Linear).unwrap()
    ])
    .unwrap()
}
