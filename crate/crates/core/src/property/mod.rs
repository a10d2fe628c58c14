//! Safety properties: an input box plus a predicate over the outputs.

mod domain;
mod parse;
mod predicate;

use std::fmt::Write as _;
use std::path::Path;

pub use domain::{sample_uniform, uniform_closed, DomainBox, Interval};
pub use parse::parse_property;
pub use predicate::{CmpOp, Leaf, Predicate};

use crate::error::{Error, Result};
use crate::network::Network;
use predicate::fmt_number;

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyProperty {
    pub name: String,
    pub domain: DomainBox,
    pub predicate: Predicate,
    /// Output count declared in the file header, if any.
    pub outputs: Option<usize>,
    /// Whether the file fixed the input count with an `inputs:` header.
    pub inputs_declared: bool,
}

impl SafetyProperty {
    pub fn new(name: impl Into<String>, domain: DomainBox, predicate: Predicate) -> Self {
        Self {
            name: name.into(),
            domain,
            predicate,
            outputs: None,
            inputs_declared: true,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut prop = parse_property(&text)?;
        if prop.name.is_empty() {
            prop.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(prop)
    }

    /// Checks the property against a network and widens an undeclared input
    /// count with unbounded intervals so the domain covers every input.
    pub fn bind(&self, net: &Network) -> Result<SafetyProperty> {
        let n = net.input_dim();
        let m = net.output_dim();
        let mut bound = self.clone();
        match self.domain.dim() {
            d if d == n => {}
            d if d < n && !self.inputs_declared => {
                bound.domain.bounds_mut().resize(n, Interval::UNBOUNDED);
            }
            d => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: d,
                })
            }
        }
        if let Some(declared) = self.outputs {
            if declared != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: declared,
                });
            }
        }
        let max_var = self.predicate.max_var();
        if max_var >= m {
            return Err(Error::IndexOutOfRange {
                index: max_var,
                len: m,
            });
        }
        bound.inputs_declared = true;
        Ok(bound)
    }

    /// Renders the property in the text syntax accepted by [`parse_property`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(s, "name: {}", self.name);
        }
        if self.inputs_declared {
            let _ = writeln!(s, "inputs: {}", self.domain.dim());
        }
        if let Some(m) = self.outputs {
            let _ = writeln!(s, "outputs: {m}");
        }
        for (i, b) in self.domain.bounds().iter().enumerate() {
            let _ = writeln!(
                s,
                "x{} in [{}, {}]",
                i + 1,
                fmt_number(b.lower),
                fmt_number(b.upper)
            );
        }
        let _ = writeln!(s, "predicate: {}", self.predicate);
        s
    }
}
