//! Binary model checkpoints.
//!
//! Byte layout (all integers and floats little-endian):
//!
//! ```text
//! offset 0   magic  "RDNN" (4 bytes)
//! offset 4   u16    format version (1)
//! offset 6   u32    layer count L
//! offset 10  u32*L  kernel counts per layer
//! then, per layer in order:
//!   f32 * (out*in*9)  conv weights, index order [out][in][ky][kx]
//!   f32 * out         biases
//!   if the layer carries batch norm (all but first and last):
//!     f32 * out       gamma
//!     f32 * out       beta
//!     f32 * out       running mean
//!     f32 * out       running variance
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::arch::ArchitectureSpec;
use super::model::Model;
use crate::error::{Result, RimError};

const MAGIC: &[u8; 4] = b"RDNN";
const VERSION: u16 = 1;

/// Write a checkpoint; the layout is documented at module level.
pub fn save(model: &Model<f32>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u16::<LittleEndian>(VERSION)?;
    let counts = model.arch().kernel_counts();
    w.write_u32::<LittleEndian>(counts.len() as u32)?;
    for &k in counts {
        w.write_u32::<LittleEndian>(k as u32)?;
    }
    for layer in &model.layers {
        for &v in layer.weight.iter() {
            w.write_f32::<LittleEndian>(v)?;
        }
        for &v in layer.bias.iter() {
            w.write_f32::<LittleEndian>(v)?;
        }
        if let Some(bn) = &layer.batch_norm {
            for arr in [&bn.gamma, &bn.beta, &bn.running_mean, &bn.running_var] {
                for &v in arr.iter() {
                    w.write_f32::<LittleEndian>(v)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn fail(&self, reason: impl Into<String>) -> RimError {
        RimError::Format {
            offset: self.offset,
            reason: reason.into(),
        }
    }

    fn bytes(&mut self, buf: &mut [u8]) -> Result<()> {
        let at = self.offset;
        self.inner.read_exact(buf).map_err(|e| RimError::Format {
            offset: at,
            reason: format!("unexpected end of file ({e})"),
        })?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn u16(&mut self) -> Result<u16> {
        let mut b = [0u8; 2];
        self.bytes(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }

    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.bytes(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn f32_into(&mut self, out: &mut [f32]) -> Result<()> {
        let at = self.offset;
        let mut raw = vec![0u8; out.len() * 4];
        self.inner.read_exact(&mut raw).map_err(|e| RimError::Format {
            offset: at,
            reason: format!("unexpected end of file ({e})"),
        })?;
        self.offset += raw.len() as u64;
        let mut rdr = &raw[..];
        rdr.read_f32_into::<LittleEndian>(out)
            .expect("sized buffer");
        Ok(())
    }
}

/// Load a checkpoint written by [`save`]; malformed files are rejected with
/// the byte offset of the problem.
pub fn load(path: &Path) -> Result<Model<f32>> {
    let mut r = Reader {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.bytes(&mut magic)?;
    if &magic != MAGIC {
        return Err(RimError::Format {
            offset: 0,
            reason: format!("bad magic {magic:?}, expected \"RDNN\""),
        });
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(r.fail(format!("unsupported version {version}")));
    }
    let layer_count = r.u32()? as usize;
    if layer_count < 2 || layer_count > 64 {
        return Err(r.fail(format!("implausible layer count {layer_count}")));
    }
    let mut counts = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        counts.push(r.u32()? as usize);
    }
    let arch = ArchitectureSpec::new(counts)
        .map_err(|e| r.fail(format!("invalid architecture: {e}")))?;

    let mut model = Model::<f32>::init(&arch, 0);
    for layer in &mut model.layers {
        r.f32_into(layer.weight.as_slice_mut().expect("contiguous"))?;
        r.f32_into(layer.bias.as_slice_mut().expect("contiguous"))?;
        if let Some(bn) = &mut layer.batch_norm {
            r.f32_into(bn.gamma.as_slice_mut().expect("contiguous"))?;
            r.f32_into(bn.beta.as_slice_mut().expect("contiguous"))?;
            r.f32_into(bn.running_mean.as_slice_mut().expect("contiguous"))?;
            r.f32_into(bn.running_var.as_slice_mut().expect("contiguous"))?;
            if bn.running_var.iter().any(|&v| v < 0.0) {
                return Err(r.fail("negative running variance"));
            }
        }
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(r.fail("trailing bytes after parameters"));
    }
    Ok(model)
}
