//! Network ingestion (NNet and JSON) and run reports.

pub mod native;
pub mod nnet;
pub mod report;

use std::path::Path;

use crate::error::Result;
use crate::network::Network;

pub use native::{load_native, parse_native, to_native_string, NativeNetwork};
pub use nnet::{load_nnet, parse_nnet, to_nnet_string, NNetHeader};

/// Loads a network, choosing the format from the file extension:
/// `.json` is the native description, anything else is read as NNet.
pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => load_native(path),
        _ => load_nnet(path),
    }
}
