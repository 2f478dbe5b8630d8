//! Versioned, self-describing binary checkpoint files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic    8 bytes   "QTCKPT01"
//! version  u32       currently 1
//! step     u64       learner update count at save time
//! nets     6 ×       actor, critic1, critic2,
//!                    target_actor, target_critic1, target_critic2
//!   n_dims   u32
//!   dims     n_dims × u32
//!   hidden   u8      0 = relu, 1 = tanh
//!   output   u8      0 = bounded, 1 = linear
//!   layers   per layer: weights row-major f64, then bias f64
//! opts     3 ×       optimizer state for actor, critic1, critic2
//!   t        u64
//!   base_lr  f64
//!   lr_mult  f64
//!   beta1    f64
//!   beta2    f64
//!   eps      f64
//!   moments  first-moment then second-moment arrays, same layout
//!            as the corresponding net's parameters
//! ```
//!
//! Round-trip load is bit-identical.

use crate::nets::{HiddenActivation, Layer, MlpParams, OptState, OutputActivation};
use crate::{QuadError, Result};
use ndarray::{Array1, Array2};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"QTCKPT01";
const VERSION: u32 = 1;

/// Full training state: online and target networks plus optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub actor: MlpParams,
    pub critic1: MlpParams,
    pub critic2: MlpParams,
    pub target_actor: MlpParams,
    pub target_critic1: MlpParams,
    pub target_critic2: MlpParams,
    pub opt_actor: OptState,
    pub opt_critic1: OptState,
    pub opt_critic2: OptState,
}

fn write_f64s<W: Write>(w: &mut W, vals: impl Iterator<Item = f64>) -> Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn write_net<W: Write>(w: &mut W, net: &MlpParams) -> Result<()> {
    w.write_all(&(net.dims.len() as u32).to_le_bytes())?;
    for d in &net.dims {
        w.write_all(&(*d as u32).to_le_bytes())?;
    }
    w.write_all(&[match net.hidden {
        HiddenActivation::Relu => 0u8,
        HiddenActivation::Tanh => 1,
    }])?;
    w.write_all(&[match net.output {
        OutputActivation::Bounded => 0u8,
        OutputActivation::Linear => 1,
    }])?;
    for l in &net.layers {
        write_f64s(w, l.w.iter().copied())?;
        write_f64s(w, l.b.iter().copied())?;
    }
    Ok(())
}

fn write_layers<W: Write>(w: &mut W, layers: &[Layer]) -> Result<()> {
    for l in layers {
        write_f64s(w, l.w.iter().copied())?;
        write_f64s(w, l.b.iter().copied())?;
    }
    Ok(())
}

fn write_opt<W: Write>(w: &mut W, opt: &OptState) -> Result<()> {
    w.write_all(&opt.t.to_le_bytes())?;
    for v in [opt.base_lr, opt.lr_mult, opt.beta1, opt.beta2, opt.eps] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_layers(w, &opt.m)?;
    write_layers(w, &opt.v)?;
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact(r)?))
}

fn read_layer_shapes<R: Read>(r: &mut R, dims: &[usize]) -> Result<Vec<Layer>> {
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for pair in dims.windows(2) {
        let (n_in, n_out) = (pair[0], pair[1]);
        let mut w = Array2::zeros((n_out, n_in));
        for v in w.iter_mut() {
            *v = read_f64(r)?;
        }
        let mut b = Array1::zeros(n_out);
        for v in b.iter_mut() {
            *v = read_f64(r)?;
        }
        layers.push(Layer { w, b });
    }
    Ok(layers)
}

fn read_net<R: Read>(r: &mut R) -> Result<MlpParams> {
    let n_dims = read_u32(r)? as usize;
    if !(2..=16).contains(&n_dims) {
        return Err(QuadError::CheckpointFormat(format!(
            "implausible layer count {n_dims}"
        )));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        dims.push(read_u32(r)? as usize);
    }
    let hidden = match read_exact::<_, 1>(r)?[0] {
        0 => HiddenActivation::Relu,
        1 => HiddenActivation::Tanh,
        t => {
            return Err(QuadError::CheckpointFormat(format!(
                "unknown hidden activation tag {t}"
            )))
        }
    };
    let output = match read_exact::<_, 1>(r)?[0] {
        0 => OutputActivation::Bounded,
        1 => OutputActivation::Linear,
        t => {
            return Err(QuadError::CheckpointFormat(format!(
                "unknown output activation tag {t}"
            )))
        }
    };
    let layers = read_layer_shapes(r, &dims)?;
    Ok(MlpParams {
        layers,
        dims,
        hidden,
        output,
    })
}

fn read_opt<R: Read>(r: &mut R, shape: &MlpParams) -> Result<OptState> {
    let t = read_u64(r)?;
    let base_lr = read_f64(r)?;
    let lr_mult = read_f64(r)?;
    let beta1 = read_f64(r)?;
    let beta2 = read_f64(r)?;
    let eps = read_f64(r)?;
    let m = read_layer_shapes(r, &shape.dims)?;
    let v = read_layer_shapes(r, &shape.dims)?;
    Ok(OptState {
        m,
        v,
        t,
        base_lr,
        lr_mult,
        beta1,
        beta2,
        eps,
    })
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.step.to_le_bytes())?;
        for net in [
            &self.actor,
            &self.critic1,
            &self.critic2,
            &self.target_actor,
            &self.target_critic1,
            &self.target_critic2,
        ] {
            write_net(w, net)?;
        }
        for opt in [&self.opt_actor, &self.opt_critic1, &self.opt_critic2] {
            write_opt(w, opt)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Checkpoint> {
        let magic: [u8; 8] = read_exact(r)?;
        if &magic != MAGIC {
            return Err(QuadError::CheckpointFormat(
                "bad magic; not a checkpoint file".into(),
            ));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(QuadError::CheckpointFormat(format!(
                "format version {version} unsupported (expected {VERSION})"
            )));
        }
        let step = read_u64(r)?;
        let actor = read_net(r)?;
        let critic1 = read_net(r)?;
        let critic2 = read_net(r)?;
        let target_actor = read_net(r)?;
        let target_critic1 = read_net(r)?;
        let target_critic2 = read_net(r)?;
        let opt_actor = read_opt(r, &actor)?;
        let opt_critic1 = read_opt(r, &critic1)?;
        let opt_critic2 = read_opt(r, &critic2)?;
        Ok(Checkpoint {
            step,
            actor,
            critic1,
            critic2,
            target_actor,
            target_critic1,
            target_critic2,
            opt_actor,
            opt_critic1,
            opt_critic2,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}
