//! SCKP checkpoint container for a [`TrainedEstimator`]: the network config,
//! iteration counter, named per-layer parameter layout, and the flat weight
//! vector together with both Adam moment vectors, all f64 little-endian.

use std::fs;
use std::path::Path;

use sigmap_core::estimator::{AdamHyper, AdamState, EstimatorConfig, Model, TrainedEstimator};

use crate::{CliError, CliResult};

const MAGIC: &[u8; 4] = b"SCKP";
const VERSION: u8 = 1;

pub fn save_checkpoint(est: &TrainedEstimator, path: &Path) -> CliResult<()> {
    let model = Model::new(est.config.clone())?;
    let mut b = Vec::new();
    b.extend_from_slice(MAGIC);
    b.push(VERSION);
    for v in [
        est.config.input_channels,
        est.config.channels[0],
        est.config.channels[1],
        est.config.channels[2],
        est.config.blocks_per_level,
    ] {
        b.extend_from_slice(&(v as u32).to_le_bytes());
    }
    b.extend_from_slice(&est.iteration.to_le_bytes());
    b.extend_from_slice(&est.adam.t.to_le_bytes());
    for v in [est.adam.hyper.beta1, est.adam.hyper.beta2, est.adam.hyper.epsilon] {
        b.extend_from_slice(&v.to_le_bytes());
    }
    let layout = model.layer_layout();
    b.extend_from_slice(&(layout.len() as u32).to_le_bytes());
    for (name, w_len, b_len) in &layout {
        b.extend_from_slice(&(name.len() as u16).to_le_bytes());
        b.extend_from_slice(name.as_bytes());
        b.extend_from_slice(&(*w_len as u64).to_le_bytes());
        b.extend_from_slice(&(*b_len as u64).to_le_bytes());
    }
    b.extend_from_slice(&(est.params.len() as u64).to_le_bytes());
    for vec in [&est.params, &est.adam.m, &est.adam.v] {
        for v in vec {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, b).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        let s = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| CliError::Io(format!("{}: truncated checkpoint", self.path.display())))?;
        self.pos += n;
        Ok(s)
    }
    fn u16(&mut self) -> CliResult<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64_vec(&mut self, n: usize) -> CliResult<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn load_checkpoint(path: &Path) -> CliResult<TrainedEstimator> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |m: &str| CliError::Io(format!("{}: {m}", path.display()));
    let mut r = Reader { bytes: &bytes, pos: 0, path };
    if r.take(4)? != MAGIC {
        return Err(bad("bad magic (not an SCKP file)"));
    }
    if r.take(1)?[0] != VERSION {
        return Err(bad("unsupported checkpoint version"));
    }
    let input_channels = r.u32()? as usize;
    let channels = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let blocks_per_level = r.u32()? as usize;
    let config = EstimatorConfig { channels, blocks_per_level, input_channels };
    let model = Model::new(config.clone()).map_err(|e| bad(&format!("invalid config: {e}")))?;

    let iteration = r.u64()?;
    let t = r.u64()?;
    let hyper = AdamHyper { beta1: r.f64()?, beta2: r.f64()?, epsilon: r.f64()? };

    let n_layers = r.u32()? as usize;
    let layout = model.layer_layout();
    if n_layers != layout.len() {
        return Err(bad("layer count does not match the config"));
    }
    for (name, w_len, b_len) in &layout {
        let len = r.u16()? as usize;
        let stored = std::str::from_utf8(r.take(len)?).map_err(|_| bad("bad layer name"))?;
        if stored != name || r.u64()? as usize != *w_len || r.u64()? as usize != *b_len {
            return Err(bad("layer layout does not match the config"));
        }
    }
    let n_params = r.u64()? as usize;
    if n_params != model.n_params() {
        return Err(bad("parameter count does not match the config"));
    }
    let params = r.f64_vec(n_params)?;
    let m = r.f64_vec(n_params)?;
    let v = r.f64_vec(n_params)?;
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes after checkpoint payload"));
    }
    Ok(TrainedEstimator { config, params, adam: AdamState { m, v, t, hyper }, iteration })
}
