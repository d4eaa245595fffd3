//! Trust-test harness for attribution methods: enumerable logic-circuit
//! datasets with exact reasoning ground truth, small from-scratch learners,
//! attribution methods, mask-and-retrain, and agreement metrics that expose
//! rankings which encode class information instead of ranking evidence.

pub mod attribution;
pub mod error;
pub mod experiment;
pub mod forest;
pub mod io;
pub mod logic;
pub mod mask;
pub mod masked;
pub mod metrics;
pub mod net;
pub mod oracle;
pub mod presets;
pub mod train;
pub mod value;

pub use error::{Error, Result};
pub use value::Value;

/// Derives a stable stream seed from a master seed and a role label, so
/// every training run, fold, and sampled method gets its own reproducible
/// stream (FNV-1a over the master bytes and the label).
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in master.to_le_bytes().into_iter().chain(label.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
