//! Flat binary checkpoint of a layer list.
//!
//! ```text
//! "AGOD" | version: u32 | layer count: u32
//! per layer: in: u32 | out: u32 | activation: u8 | weights (row-major) | biases
//! ```
//! Integers and reals are little-endian; reals are always written as `f64`.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::activation::Activation;
use super::layer::DenseLayer;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"AGOD";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode_layers<S: Scalar>(layers: &[DenseLayer<S>]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for l in layers {
        out.extend_from_slice(&(l.inputs() as u32).to_le_bytes());
        out.extend_from_slice(&(l.outputs() as u32).to_le_bytes());
        out.push(l.activation.tag());
        for &w in l.weights.iter() {
            out.extend_from_slice(&w.to_f64_lossy().to_le_bytes());
        }
        for &b in l.biases.iter() {
            out.extend_from_slice(&b.to_f64_lossy().to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_layers<S: Scalar>(buf: &[u8]) -> Result<Vec<DenseLayer<S>>> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = r.u32()? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let inputs = r.u32()? as usize;
        let outputs = r.u32()? as usize;
        let tag = r.take(1)?[0];
        let activation =
            Activation::from_tag(tag).ok_or_else(|| Error::Checkpoint(format!("unknown activation tag {tag}")))?;
        let weights = (0..inputs * outputs)
            .map(|_| r.f64().map(S::of))
            .collect::<Result<Vec<S>>>()?;
        let biases = (0..outputs).map(|_| r.f64().map(S::of)).collect::<Result<Vec<S>>>()?;
        layers.push(DenseLayer {
            weights: Array2::from_shape_vec((outputs, inputs), weights).expect("sized above"),
            biases: Array1::from_vec(biases),
            activation,
        });
    }
    if r.pos != buf.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok(layers)
}

pub fn save_layers<S: Scalar>(path: &Path, layers: &[DenseLayer<S>]) -> Result<()> {
    fs::write(path, encode_layers(layers)).map_err(|e| Error::io(path, e))
}

pub fn load_layers<S: Scalar>(path: &Path) -> Result<Vec<DenseLayer<S>>> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_layers(&buf)
}
