//! Shared helpers for the criterion benches under `benches/`.

use std::path::PathBuf;

/// Reads a file from the repository's `corpus/` directory.
pub fn corpus(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
