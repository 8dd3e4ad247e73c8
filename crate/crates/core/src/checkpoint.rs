//! Binary model checkpoints.
//!
//! Layout, all little-endian:
//!
//! | field   | type     |                                           |
//! |---------|----------|-------------------------------------------|
//! | magic   | 8 bytes  | `SQN2VCKP`                                |
//! | version | u32      | currently 1                               |
//! | model   | u8       | 1 = OS-ELM, 2 = SGD                       |
//! | mode    | u8       | 0 = tied, 1 = random alpha                |
//! | flags   | u16      | bit 0 literal denominator, bit 1 dataflow |
//! | d       | u64      |                                           |
//! | V       | u64      |                                           |
//! | mu      | f64      | learning rate for SGD                     |
//!
//! followed by f64 payloads. OS-ELM: `beta` row-major `d x V`, `P` row-major
//! `d x d`, then `alpha` row-major `V x d` in random-alpha mode. SGD: `w_in`
//! then `w_out`, both row-major `V x d`.

use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::experiment::Trainer;
use crate::io::write_atomic;
use crate::oselm::{Denominator, HiddenMode, OselmConfig, OselmError, OselmModel, UpdateMode};
use crate::scalar::Scalar;
use crate::sgd::{SgdError, SgdModel};

pub const MAGIC: &[u8; 8] = b"SQN2VCKP";
pub const VERSION: u32 = 1;
const TAG_OSELM: u8 = 1;
const TAG_SGD: u8 = 2;
const FLAG_LITERAL: u16 = 1;
const FLAG_DATAFLOW: u16 = 2;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("unknown {field} value {value}")]
    BadField { field: &'static str, value: u64 },
    #[error("trailing bytes after payload")]
    Trailing,
    #[error(transparent)]
    Oselm(#[from] OselmError),
    #[error(transparent)]
    Sgd(#[from] SgdError),
}

fn put_f64s<W: Write, T: Scalar>(out: &mut W, xs: impl IntoIterator<Item = T>) -> io::Result<()> {
    for x in xs {
        out.write_all(&x.as_f64().to_le_bytes())?;
    }
    Ok(())
}

pub fn write_checkpoint<W: Write, T: Scalar>(mut out: W, trainer: &Trainer<T>) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    match trainer {
        Trainer::Proposed { model, update } => {
            let (d, n) = (model.dims(), model.nodes());
            let mode = match model.mode() {
                HiddenMode::Tied => 0u8,
                HiddenMode::RandomAlpha => 1,
            };
            let mut flags = 0u16;
            if model.denominator() == Denominator::Literal {
                flags |= FLAG_LITERAL;
            }
            if *update == UpdateMode::Dataflow {
                flags |= FLAG_DATAFLOW;
            }
            write_header(&mut out, TAG_OSELM, mode, flags, d, n, model.mu().as_f64())?;
            let beta = model.beta();
            put_f64s(&mut out, (0..d).flat_map(|i| (0..n).map(move |v| beta[v * d + i])))?;
            put_f64s(&mut out, model.p().iter().copied())?;
            if let Some(alpha) = model.alpha() {
                put_f64s(&mut out, alpha.iter().copied())?;
            }
        }
        Trainer::Original(model) => {
            write_header(&mut out, TAG_SGD, 0, 0, model.dims(), model.nodes(), model.learning_rate().as_f64())?;
            put_f64s(&mut out, model.w_in().iter().copied())?;
            put_f64s(&mut out, model.w_out().iter().copied())?;
        }
    }
    Ok(())
}

fn write_header<W: Write>(out: &mut W, tag: u8, mode: u8, flags: u16, d: usize, n: usize, mu: f64) -> io::Result<()> {
    out.write_all(&[tag, mode])?;
    out.write_all(&flags.to_le_bytes())?;
    out.write_all(&(d as u64).to_le_bytes())?;
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&mu.to_le_bytes())
}

fn take<const N: usize, R: Read>(r: &mut R) -> io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_f64s<R: Read, T: Scalar>(r: &mut R, n: usize) -> io::Result<Vec<T>> {
    (0..n).map(|_| Ok(T::of(f64::from_le_bytes(take(r)?)))).collect()
}

pub fn read_checkpoint<R: Read, T: Scalar>(mut r: R) -> Result<Trainer<T>, CheckpointError> {
    if &take::<8, _>(&mut r)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let [tag, mode] = take::<2, _>(&mut r)?;
    let flags = u16::from_le_bytes(take(&mut r)?);
    let d = u64::from_le_bytes(take(&mut r)?) as usize;
    let n = u64::from_le_bytes(take(&mut r)?) as usize;
    let mu = f64::from_le_bytes(take(&mut r)?);
    if flags & !(FLAG_LITERAL | FLAG_DATAFLOW) != 0 {
        return Err(CheckpointError::BadField {
            field: "flags",
            value: flags.into(),
        });
    }
    let trainer = match tag {
        TAG_OSELM => {
            let mode = match mode {
                0 => HiddenMode::Tied,
                1 => HiddenMode::RandomAlpha,
                m => return Err(CheckpointError::BadField { field: "mode", value: m.into() }),
            };
            let cfg = OselmConfig {
                dims: d,
                mu,
                mode,
                p0_scale: 1.0,
                denominator: if flags & FLAG_LITERAL != 0 {
                    Denominator::Literal
                } else {
                    Denominator::Regularized
                },
            };
            let rows: Vec<T> = get_f64s(&mut r, d * n)?;
            let mut beta = vec![T::zero(); d * n];
            for i in 0..d {
                for v in 0..n {
                    beta[v * d + i] = rows[i * n + v];
                }
            }
            let p = get_f64s(&mut r, d * d)?;
            let alpha = match mode {
                HiddenMode::Tied => None,
                HiddenMode::RandomAlpha => Some(get_f64s(&mut r, n * d)?),
            };
            let update = if flags & FLAG_DATAFLOW != 0 {
                UpdateMode::Dataflow
            } else {
                UpdateMode::Sequential
            };
            Trainer::Proposed {
                model: OselmModel::from_parts(&cfg, n, beta, p, alpha)?,
                update,
            }
        }
        TAG_SGD => {
            let w_in = get_f64s(&mut r, d * n)?;
            let w_out = get_f64s(&mut r, d * n)?;
            Trainer::Original(SgdModel::from_parts(d, n, mu, w_in, w_out)?)
        }
        t => return Err(CheckpointError::BadField { field: "model", value: t.into() }),
    };
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(CheckpointError::Trailing);
    }
    Ok(trainer)
}

pub fn save_checkpoint<T: Scalar>(path: &Path, trainer: &Trainer<T>) -> io::Result<()> {
    write_atomic(path, |w| write_checkpoint(w, trainer))
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Trainer<T>, CheckpointError> {
    read_checkpoint(io::BufReader::new(std::fs::File::open(path)?))
}
