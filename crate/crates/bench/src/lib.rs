//! Shared fixtures for the benchmarks.

use std::path::Path;

use bugtriage_core::eval::{generate_synthetic, SynthSpec};
use bugtriage_core::Dataset;

/// The synthetic corpus generated from a bundled spec (`apache`, `eclipse`,
/// `gentoo` or `mozilla`).
pub fn corpus(name: &str) -> Dataset {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/resources/synth")
        .join(format!("{name}.toml"));
    let spec = SynthSpec::load(path).expect("bundled spec");
    generate_synthetic(&spec).expect("bundled spec generates")
}
