//! Instance persistence: the versioned JSON lift format and checksums.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use nae_sdp_core::error::{Error, Result};
use nae_sdp_core::graph::SignedMultigraph;
use nae_sdp_core::lift::LiftSpec;

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

/// On-disk instance format: base K_{d,c} plus the lift data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    c: usize,
    d: usize,
    n: usize,
    permutations: Vec<Vec<u32>>,
    signs: Vec<i8>,
    seed: u64,
}

/// Serializes a lift of K_{d,c} to canonical JSON; returns (json, sha256 hex).
pub fn instance_to_json(spec: &LiftSpec, c: usize, d: usize) -> Result<(String, String)> {
    let file = InstanceFile {
        version: INSTANCE_FORMAT_VERSION,
        c,
        d,
        n: spec.n,
        permutations: spec.permutations.clone(),
        signs: spec.signs.clone(),
        seed: spec.seed,
    };
    let json = serde_json::to_string(&file).map_err(|e| Error::Other(e.to_string()))?;
    let digest = Sha256::digest(json.as_bytes());
    Ok((json, format!("{digest:x}")))
}

pub fn save_instance(path: &Path, spec: &LiftSpec, c: usize, d: usize) -> Result<String> {
    let (json, checksum) = instance_to_json(spec, c, d)?;
    std::fs::write(path, json)?;
    Ok(checksum)
}

/// Parses and validates an instance file back into a LiftSpec.
pub fn load_instance(path: &Path) -> Result<(LiftSpec, usize, usize, String)> {
    let json = std::fs::read_to_string(path)?;
    let digest = format!("{:x}", Sha256::digest(json.as_bytes()));
    let file: InstanceFile = serde_json::from_str(&json)
        .map_err(|e| Error::InvalidParameter(format!("malformed instance file: {e}")))?;
    if file.version != INSTANCE_FORMAT_VERSION {
        return Err(Error::InvalidParameter(format!(
            "instance format version {} unsupported (expected {INSTANCE_FORMAT_VERSION})",
            file.version
        )));
    }
    let base = SignedMultigraph::kdc(file.d, file.c);
    if file.permutations.len() != base.edge_count() {
        return Err(Error::InvalidParameter(format!(
            "{} permutations for {} base edges",
            file.permutations.len(),
            base.edge_count()
        )));
    }
    if file.signs.len() != file.n * base.edge_count() {
        return Err(Error::InvalidParameter(format!(
            "sign array length {} != n·|E| = {}",
            file.signs.len(),
            file.n * base.edge_count()
        )));
    }
    if file.signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidParameter("signs must be ±1".into()));
    }
    let spec = LiftSpec {
        base,
        n: file.n,
        permutations: file.permutations,
        signs: file.signs,
        seed: file.seed,
    };
    // building validates the permutations
    spec.build()?;
    Ok((spec, file.c, file.d, digest))
}

/// A signed lift of K_{d,c} together with its spec, drawn from a seed.
pub fn generate_signed_lift(
    c: usize,
    d: usize,
    n: usize,
    seed: u64,
) -> Result<(SignedMultigraph, LiftSpec)> {
    let base = SignedMultigraph::kdc(d, c);
    let (lifted, mut spec) = nae_sdp_core::lift::random_lift(&base, n, seed)?;
    let signed =
        nae_sdp_core::lift::random_signing(&lifted, nae_sdp_core::lift::derive_seed(seed, 0x516e));
    spec.signs = signed.edges().iter().map(|e| e.sign).collect();
    Ok((signed, spec))
}
