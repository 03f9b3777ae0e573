//! JSON checkpoints of named tensors.
//!
//! ```json
//! { "format": "netslice-checkpoint", "version": 1,
//!   "models": [ { "name": "actor",
//!                 "tensors": [ { "name": "enc.weight", "shape": [280, 106], "data": [ ... ] } ] } ] }
//! ```
//! Tensors are stored row-major as `f64` in layout order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::Parametric;

pub const FORMAT: &str = "netslice-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub name: String,
    pub tensors: Vec<TensorRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub models: Vec<ModelRecord>,
}

impl Default for Checkpoint {
    fn default() -> Self {
        Checkpoint { format: FORMAT.to_string(), version: VERSION, models: Vec::new() }
    }
}

impl Checkpoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<S: Scalar, M: Parametric<S> + ?Sized>(&mut self, name: &str, model: &M) {
        let p = model.params();
        let tensors = model
            .layout()
            .segments()
            .iter()
            .map(|seg| TensorRecord {
                name: seg.name.clone(),
                shape: seg.shape.clone(),
                data: p[seg.offset..seg.offset + seg.len()].iter().map(|v| v.to_f64_lossy()).collect(),
            })
            .collect();
        self.models.retain(|m| m.name != name);
        self.models.push(ModelRecord { name: name.to_string(), tensors });
    }

    pub fn contains(&self, name: &str) -> bool {
        self.models.iter().any(|m| m.name == name)
    }

    /// Copies the named model into `model`, checking every tensor name and shape.
    pub fn restore<S: Scalar, M: Parametric<S> + ?Sized>(&self, name: &str, model: &mut M) -> Result<()> {
        let rec = self
            .models
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::Checkpoint(format!("no model named {name:?}")))?;
        let layout = model.layout().clone();
        if rec.tensors.len() != layout.segments().len() {
            return Err(Error::Checkpoint(format!(
                "{name}: {} tensors stored, model has {}",
                rec.tensors.len(),
                layout.segments().len()
            )));
        }
        let params = model.params_mut();
        for (seg, t) in layout.segments().iter().zip(&rec.tensors) {
            if seg.name != t.name || seg.shape != t.shape || t.data.len() != seg.len() {
                return Err(Error::Checkpoint(format!(
                    "{name}: tensor {} {:?} does not match {} {:?}",
                    t.name, t.shape, seg.name, seg.shape
                )));
            }
            for (dst, src) in params[seg.offset..seg.offset + seg.len()].iter_mut().zip(&t.data) {
                *dst = S::lit(*src);
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported format {} v{}", self.format, self.version)));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(f, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let ck: Checkpoint = serde_json::from_reader(f)?;
        ck.validate()?;
        Ok(ck)
    }
}
