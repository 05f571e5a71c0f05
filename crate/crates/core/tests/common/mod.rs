#![allow(dead_code)]

use std::path::PathBuf;

use rsill_core::lang::Signature;
use rsill_core::parser::parse_program;

pub const CORPUS: [&str; 8] = ["counter", "stack", "queue", "fqueue", "clients", "list", "map", "fold"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.rsill"))
}

pub fn source(name: &str) -> String {
    let p = corpus_path(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn load(name: &str) -> Signature {
    parse_program(&source(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Processes that can start a run: no indices, no used channels.
pub fn closed_procs(sig: &Signature) -> Vec<String> {
    sig.proc_defs
        .values()
        .filter(|d| d.params.is_empty() && d.uses.is_empty())
        .map(|d| d.name.clone())
        .collect()
}
