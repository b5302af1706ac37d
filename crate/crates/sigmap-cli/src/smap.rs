//! SMAP sigma-map container: magic "SMAP", version byte 1, u32-LE width and
//! height, then width*height f32-LE values row-major.

use std::fs;
use std::path::Path;

use sigmap_core::SigmaMap;

use crate::{CliError, CliResult};

const MAGIC: &[u8; 4] = b"SMAP";
const VERSION: u8 = 1;

pub fn save_sigma_map(map: &SigmaMap, path: &Path) -> CliResult<()> {
    let mut bytes = Vec::with_capacity(13 + 4 * map.data().len());
    bytes.extend_from_slice(MAGIC);
    bytes.push(VERSION);
    bytes.extend_from_slice(&(map.width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(map.height() as u32).to_le_bytes());
    for &v in map.data() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_sigma_map(path: &Path) -> CliResult<SigmaMap> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |m: &str| CliError::Io(format!("{}: {m}", path.display()));
    if bytes.len() < 13 {
        return Err(bad("truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("bad magic (not an SMAP file)"));
    }
    if bytes[4] != VERSION {
        return Err(bad("unsupported SMAP version"));
    }
    let w = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let n = w.checked_mul(h).ok_or_else(|| bad("dimension overflow"))?;
    let body = &bytes[13..];
    if body.len() != 4 * n {
        return Err(bad("value count does not match the declared dimensions"));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    SigmaMap::from_vec(w, h, data).map_err(Into::into)
}
