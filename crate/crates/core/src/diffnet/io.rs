//! Checkpoint format: `u64` little-endian header length, the [`NetSpec`] as
//! JSON, then every parameter as a little-endian `f64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{DiffNet, NetSpec};

pub fn write_net<T: Real, W: Write>(net: &DiffNet<T>, mut out: W) -> Result<()> {
    let header = serde_json::to_vec(net.spec()).map_err(|e| Error::Config(e.to_string()))?;
    out.write_all(&(header.len() as u64).to_le_bytes())?;
    out.write_all(&header)?;
    for p in net.params() {
        out.write_all(&p.as_f64().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_net<T: Real, R: Read>(mut input: R) -> Result<DiffNet<T>> {
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut header = vec![0u8; len];
    input.read_exact(&mut header)?;
    let spec: NetSpec = serde_json::from_slice(&header).map_err(|e| Error::Parse {
        line: 1,
        message: format!("bad network header: {e}"),
    })?;
    spec.validate()?;
    let n = spec.param_count();
    let mut params = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        input.read_exact(&mut buf)?;
        params.push(T::lit(f64::from_le_bytes(buf)));
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: format!("{} trailing bytes after parameters", rest.len()),
        });
    }
    DiffNet::from_params(spec, params)
}

pub fn save<T: Real>(net: &DiffNet<T>, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_net(net, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load<T: Real>(path: &std::path::Path) -> Result<DiffNet<T>> {
    let file = std::fs::File::open(path)?;
    read_net(std::io::BufReader::new(file))
}
