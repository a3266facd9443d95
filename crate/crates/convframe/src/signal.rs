//! Signals on periodic domains: 1-D vectors and 2-D grayscale rasters.
//!
//! A [`Signal`] stores its samples as one flat vector; 2-D rasters are
//! flattened in row-major (raster) order. Every operation in this crate
//! treats the domain as periodic, so index arithmetic wraps.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Domain shape of a signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalShape {
    OneD { n: usize },
    TwoD { h: usize, w: usize },
}

impl SignalShape {
    /// Total number of samples N.
    pub fn len(&self) -> usize {
        match *self {
            SignalShape::OneD { n } => n,
            SignalShape::TwoD { h, w } => h * w,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A real-valued signal on a periodic domain. Values are finite f64;
/// image sources stay in [0, 255] after load but intermediate processing
/// is unconstrained.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    shape: SignalShape,
    values: Array1<f64>,
}

impl Signal {
    /// 1-D signal from a vector of samples.
    pub fn from_vec(values: Vec<f64>) -> Self {
        let values = Array1::from_vec(values);
        debug_assert!(values.iter().all(|v| v.is_finite()), "non-finite sample");
        Signal {
            shape: SignalShape::OneD { n: values.len() },
            values,
        }
    }

    /// 2-D signal from a raster matrix (row-major flattening).
    pub fn from_array2(raster: Array2<f64>) -> Self {
        let (h, w) = raster.dim();
        debug_assert!(raster.iter().all(|v| v.is_finite()), "non-finite sample");
        let values = Array1::from_iter(raster.iter().copied());
        Signal {
            shape: SignalShape::TwoD { h, w },
            values,
        }
    }

    /// Signal of zeros with the given shape.
    pub fn zeros(shape: SignalShape) -> Self {
        Signal {
            shape,
            values: Array1::zeros(shape.len()),
        }
    }

    /// Flat samples paired with an explicit shape; errors on length mismatch.
    pub fn from_flat(values: Vec<f64>, shape: SignalShape) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a domain of {} points",
                values.len(),
                shape.len()
            )));
        }
        debug_assert!(values.iter().all(|v| v.is_finite()), "non-finite sample");
        Ok(Signal {
            shape,
            values: Array1::from_vec(values),
        })
    }

    pub fn shape(&self) -> SignalShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array1<f64> {
        &mut self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice().expect("signal storage is contiguous")
    }

    /// Raster view of a 2-D signal; `None` for 1-D signals.
    pub fn to_array2(&self) -> Option<Array2<f64>> {
        match self.shape {
            SignalShape::OneD { .. } => None,
            SignalShape::TwoD { h, w } => Some(
                Array2::from_shape_vec((h, w), self.values.to_vec())
                    .expect("shape consistent by construction"),
            ),
        }
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.sum() / self.values.len() as f64
        }
    }

    /// Euclidean norm of the sample vector.
    pub fn norm(&self) -> f64 {
        self.values.dot(&self.values).sqrt()
    }

    /// Same-shape signal with `delta` added to every sample.
    pub fn shifted(&self, delta: f64) -> Signal {
        Signal {
            shape: self.shape,
            values: &self.values + delta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_flattening_is_row_major() {
        let raster =
            Array2::from_shape_vec((2, 3), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let s = Signal::from_array2(raster.clone());
        assert_eq!(s.shape(), SignalShape::TwoD { h: 2, w: 3 });
        assert_eq!(s.as_slice(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(s.to_array2().unwrap(), raster);
    }

    #[test]
    fn from_flat_rejects_length_mismatch() {
        let err = Signal::from_flat(vec![1.0; 5], SignalShape::TwoD { h: 2, w: 3 });
        assert!(err.is_err());
    }

    #[test]
    fn mean_and_shift() {
        let s = Signal::from_vec(vec![1.0, 3.0]);
        assert_eq!(s.mean(), 2.0);
        assert_eq!(s.shifted(-2.0).as_slice(), &[-1.0, 1.0]);
    }
}
