//! Run manifest: configuration echo, constants, timing and checksums.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub lambda_c_m: f64,
    pub c_mu: f64,
    pub c_q1: f64,
    pub margin: f64,
    pub spectral_exponent: i32,
    pub beam_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub experiment: String,
    pub preset: Option<String>,
    pub config: BTreeMap<String, serde_json::Value>,
    pub constants: Constants,
    pub seed: i64,
    pub workers: usize,
    pub wall_time_s: f64,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
    pub summary: BTreeMap<String, f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
