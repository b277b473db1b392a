//! Binary parameter snapshots: magic, version, config fingerprint, network
//! shape, then little-endian `f64` parameters.

use std::io::{Read, Write};
use std::path::Path;

use pomem_core::RngStream;

use crate::error::{AgentError, Result};
use crate::model::{ActorCritic, NetConfig, TorsoKind};

const MAGIC: &[u8; 4] = b"PMCK";
const VERSION: u32 = 1;

pub fn save_checkpoint(model: &ActorCritic, fingerprint: &str, path: &Path) -> Result<()> {
    let cfg = model.config();
    let mut buf = Vec::with_capacity(64 + 8 * model.num_params());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(fingerprint.len() as u32).to_le_bytes());
    buf.extend_from_slice(fingerprint.as_bytes());
    let torso: u64 = match cfg.torso {
        TorsoKind::Memoryless => 0,
        TorsoKind::Recurrent => 1,
    };
    for v in [cfg.input_dim as u64, cfg.num_actions as u64, cfg.hidden as u64, torso, cfg.n_critics as u64, model.num_params() as u64] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for p in &model.params {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Load a snapshot, returning the model and the fingerprint it was saved with.
pub fn load_checkpoint(path: &Path) -> Result<(ActorCritic, String)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut r = Cursor { b: &bytes, at: 0 };
    if r.take(4)? != MAGIC {
        return Err(AgentError::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(AgentError::Checkpoint(format!("unsupported version {version}")));
    }
    let flen = r.u32()? as usize;
    let fingerprint = String::from_utf8(r.take(flen)?.to_vec()).map_err(|_| AgentError::Checkpoint("fingerprint is not utf-8".into()))?;
    let input_dim = r.u64()? as usize;
    let num_actions = r.u64()? as usize;
    let hidden = r.u64()? as usize;
    let torso = match r.u64()? {
        0 => TorsoKind::Memoryless,
        1 => TorsoKind::Recurrent,
        t => return Err(AgentError::Checkpoint(format!("unknown torso tag {t}"))),
    };
    let n_critics = r.u64()? as usize;
    let n_params = r.u64()? as usize;
    let cfg = NetConfig {
        input_dim,
        num_actions,
        hidden,
        torso,
        n_critics,
    };
    let mut model = ActorCritic::new(cfg, &mut RngStream::new(0, 0))?;
    if model.num_params() != n_params {
        return Err(AgentError::Checkpoint(format!(
            "parameter count {n_params} does not match the stored shape ({})",
            model.num_params()
        )));
    }
    for p in model.params.iter_mut() {
        *p = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
    }
    if r.at != bytes.len() {
        return Err(AgentError::Checkpoint("trailing bytes".into()));
    }
    Ok((model, fingerprint))
}

struct Cursor<'a> {
    b: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.b.len() {
            return Err(AgentError::Checkpoint("truncated file".into()));
        }
        let s = &self.b[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
