use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval; either side may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::Config(format!(
                "invalid interval [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn point(v: f64) -> Self {
        Self { lower: v, upper: v }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite() && self.width().is_finite()
    }
}

/// Axis-aligned box of closed intervals, one per network input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    bounds: Vec<Interval>,
}

impl DomainBox {
    pub fn new(bounds: Vec<Interval>) -> Result<Self> {
        for (i, b) in bounds.iter().enumerate() {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower > b.upper {
                return Err(Error::Config(format!(
                    "input {} has lower bound {} above upper bound {}",
                    i + 1,
                    b.lower,
                    b.upper
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(lower, upper)| Interval { lower, upper })
                .collect(),
        )
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            bounds: vec![Interval::UNBOUNDED; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn get(&self, i: usize) -> Interval {
        self.bounds[i]
    }

    pub(crate) fn set(&mut self, i: usize, iv: Interval) {
        debug_assert!(iv.lower <= iv.upper);
        self.bounds[i] = iv;
    }

    pub(crate) fn bounds_mut(&mut self) -> &mut Vec<Interval> {
        &mut self.bounds
    }

    pub fn is_finite(&self) -> bool {
        self.bounds.iter().all(Interval::is_finite)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.bounds.len() && self.bounds.iter().zip(x).all(|(b, &v)| b.contains(v))
    }

    /// True when every interval of `self` lies within the matching one of `outer`.
    pub fn is_subset_of(&self, outer: &DomainBox) -> bool {
        self.dim() == outer.dim()
            && self
                .bounds
                .iter()
                .zip(&outer.bounds)
                .all(|(a, b)| b.lower <= a.lower && a.upper <= b.upper)
    }

    pub fn max_width(&self) -> f64 {
        self.bounds.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.bounds.iter().position(|b| !b.is_finite()) {
            Some(dim) => Err(Error::UnboundedDomain {
                dim,
                lower: self.bounds[dim].lower,
                upper: self.bounds[dim].upper,
            }),
            None => Ok(()),
        }
    }
}

/// Uniform draw from the closed interval `[lo, hi]`; returns `lo` when they coincide.
pub fn uniform_closed<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if lo < hi {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Draws one point uniformly from `domain`, each coordinate independently.
pub fn sample_uniform<R: Rng + ?Sized>(domain: &DomainBox, rng: &mut R) -> Result<Vec<f64>> {
    domain.ensure_finite()?;
    Ok(domain
        .bounds
        .iter()
        .map(|b| uniform_closed(rng, b.lower, b.upper))
        .collect())
}
