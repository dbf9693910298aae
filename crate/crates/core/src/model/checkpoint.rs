//! Little-endian binary checkpoint.
//!
//! ```text
//! "TCNN" | u32 version | u32 config_len | config block
//!        | u64 tensor_count | (u64 len | len x f64)*
//! ```
//! Tensors follow [`TimeCnnParams::tensors`] order.

use std::path::Path;

use super::{ModelConfig, TimeCnnParams};
use crate::crosscnn::{KernelInit, MixerKind};
use crate::error::{Error, Result};
use crate::rng::RngState;

const MAGIC: &[u8; 4] = b"TCNN";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(params: &TimeCnnParams, cfg: &ModelConfig) -> Result<Vec<u8>> {
    params.validate(cfg)?;
    let mut out = Vec::with_capacity(64 + 8 * params.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let block = encode_config(cfg);
    out.extend_from_slice(&(block.len() as u32).to_le_bytes());
    out.extend_from_slice(&block);
    let tensors = params.tensors();
    out.extend_from_slice(&(tensors.len() as u64).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.len() as u64).to_le_bytes());
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<(TimeCnnParams, ModelConfig)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic, not a checkpoint".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let cfg_len = r.u32()? as usize;
    let cfg = decode_config(r.take(cfg_len)?)?;
    cfg.validate()
        .map_err(|e| Error::Format(format!("embedded config invalid: {e}")))?;

    let mut params = TimeCnnParams::init(&cfg, &mut RngState::new(0))?;
    let count = r.u64()? as usize;
    let mut tensors = params.tensors_mut();
    if count != tensors.len() {
        return Err(Error::Format(format!(
            "{count} tensors stored, config implies {}",
            tensors.len()
        )));
    }
    for (i, t) in tensors.iter_mut().enumerate() {
        let len = r.u64()? as usize;
        if len != t.len() {
            return Err(Error::Format(format!(
                "tensor {i} has {len} values, config implies {}",
                t.len()
            )));
        }
        for v in t.iter_mut() {
            *v = f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok((params, cfg))
}

pub fn save_checkpoint(params: &TimeCnnParams, cfg: &ModelConfig, path: &Path) -> Result<()> {
    let bytes = write_checkpoint(params, cfg)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(TimeCnnParams, ModelConfig)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&bytes)
}

fn encode_config(cfg: &ModelConfig) -> Vec<u8> {
    let mut b = Vec::new();
    for v in [
        cfg.lookback,
        cfg.horizon,
        cfg.num_variables,
        cfg.token_dim,
        cfg.hidden_dim,
        cfg.ffn_blocks,
    ] {
        b.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for v in [cfg.dropout, cfg.ln_eps, cfg.instance_norm_eps] {
        b.extend_from_slice(&v.to_le_bytes());
    }
    let (tag, side) = match cfg.mixer {
        MixerKind::CrossCnn => (0u8, 0u64),
        MixerKind::OneCnn => (1, 0),
        MixerKind::CrossLinear => (2, 0),
        MixerKind::TwoDCnn(k) => (3, k as u64),
        MixerKind::None => (4, 0),
    };
    b.push(tag);
    b.extend_from_slice(&side.to_le_bytes());
    b.push(cfg.use_instance_norm as u8);
    let (init_tag, noise) = match cfg.kernel_init {
        KernelInit::SmallUniform => (0u8, 0.0),
        KernelInit::NearIdentity { noise } => (1, noise),
        KernelInit::Zero => (2, 0.0),
    };
    b.push(init_tag);
    b.extend_from_slice(&noise.to_le_bytes());
    b
}

fn decode_config(block: &[u8]) -> Result<ModelConfig> {
    let mut r = Reader { bytes: block, pos: 0 };
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = r.u64()? as usize;
    }
    let dropout = r.f64()?;
    let ln_eps = r.f64()?;
    let instance_norm_eps = r.f64()?;
    let tag = r.u8()?;
    let side = r.u64()? as usize;
    let mixer = match tag {
        0 => MixerKind::CrossCnn,
        1 => MixerKind::OneCnn,
        2 => MixerKind::CrossLinear,
        3 => MixerKind::TwoDCnn(side),
        4 => MixerKind::None,
        t => return Err(Error::Format(format!("unknown mixer tag {t}"))),
    };
    let use_instance_norm = match r.u8()? {
        0 => false,
        1 => true,
        v => return Err(Error::Format(format!("bad instance-norm flag {v}"))),
    };
    let kernel_init = match (r.u8()?, r.f64()?) {
        (0, _) => KernelInit::SmallUniform,
        (1, noise) => KernelInit::NearIdentity { noise },
        (2, _) => KernelInit::Zero,
        (t, _) => return Err(Error::Format(format!("unknown init tag {t}"))),
    };
    if r.pos != block.len() {
        return Err(Error::Format("config block length mismatch".into()));
    }
    Ok(ModelConfig {
        lookback: dims[0],
        horizon: dims[1],
        num_variables: dims[2],
        token_dim: dims[3],
        hidden_dim: dims[4],
        ffn_blocks: dims[5],
        dropout,
        ln_eps,
        instance_norm_eps,
        mixer,
        use_instance_norm,
        kernel_init,
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Format(format!(
                    "truncated: need {n} bytes at offset {}, have {}",
                    self.pos,
                    self.bytes.len() - self.pos
                ))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
}
