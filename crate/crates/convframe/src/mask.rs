//! Known/missing pixel masks for inpainting.
//!
//! A mask flags each sample of a signal as *known* (`true`) or *missing*
//! (`false`). Random masks are drawn without replacement from a seeded
//! generator, so a `(shape, rate, seed)` triple always yields the same mask.
//! On disk a mask is a graymap: 255 marks known samples, 0 missing ones.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::{Signal, SignalShape};

/// Per-sample known/missing flags tied to a signal shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    known: Vec<bool>,
    shape: SignalShape,
}

impl Mask {
    /// Wraps explicit flags; the flag count must match the shape's length.
    pub fn from_known(known: Vec<bool>, shape: SignalShape) -> Result<Self> {
        if known.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} flags for a shape of length {}",
                known.len(),
                shape.len()
            )));
        }
        Ok(Mask { known, shape })
    }

    /// Interprets a signal as a mask: values above 127 are known.
    pub fn from_signal(signal: &Signal) -> Self {
        Mask {
            known: signal.values().iter().map(|&v| v > 127.0).collect(),
            shape: signal.shape(),
        }
    }

    /// Renders the mask as a signal (255 = known, 0 = missing) for saving.
    pub fn to_signal(&self) -> Signal {
        let values = self
            .known
            .iter()
            .map(|&k| if k { 255.0 } else { 0.0 })
            .collect();
        Signal::from_flat(values, self.shape).expect("mask length matches its shape")
    }

    pub fn shape(&self) -> SignalShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    /// Whether sample `i` (flat index) is known.
    pub fn is_known(&self, i: usize) -> bool {
        self.known[i]
    }

    pub fn flags(&self) -> &[bool] {
        &self.known
    }

    pub fn known_count(&self) -> usize {
        self.known.iter().filter(|&&k| k).count()
    }
}

/// Draws a random mask with `round(rate · len)` known samples, chosen
/// uniformly without replacement. `rate` must lie in `(0, 1]`; the same
/// `(shape, rate, seed)` always produces the same mask.
pub fn gen_mask(shape: SignalShape, rate: f64, seed: u64) -> Result<Mask> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling rate must lie in (0, 1], got {rate}"
        )));
    }
    let n = shape.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty shape".into()));
    }
    let count = ((rate * n as f64).round() as usize).min(n);
    let mut known = vec![false; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for idx in rand::seq::index::sample(&mut rng, n, count) {
        known[idx] = true;
    }
    Ok(Mask { known, shape })
}
