//! Patch matrices and circular-convolution primitives.
//!
//! The patch matrix F of a signal f collects every stride-1 patch of a fixed
//! shape as a row, with periodic wrap-around. In 1-D, F is circulant-Hankel:
//! `F[m][j] = f[(m+j) mod N]`. In 2-D the anchor runs over raster pixels and
//! the patch is linearized row-major: column `j` holds the pixel at offset
//! `(j / s2, j mod s2)` from the anchor, both coordinates wrapped.
//!
//! Averaging along anti-diagonals (the ℓ entries that copy a given pixel)
//! inverts the construction exactly, and remains the canonical map back to
//! pixel space for matrices that are *not* of patch form (frame expansions,
//! solver iterates).

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::signal::{Signal, SignalShape};

/// Patch shape: a run of ℓ samples in 1-D, an s1×s2 window in 2-D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchShape {
    OneD { l: usize },
    TwoD { s1: usize, s2: usize },
}

impl PatchShape {
    /// Patch length ℓ (product of the sides in 2-D).
    pub fn len(&self) -> usize {
        match *self {
            PatchShape::OneD { l } => l,
            PatchShape::TwoD { s1, s2 } => s1 * s2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Patch extraction parameters. Stride is fixed at 1 and the boundary is
/// always periodic, so the shape is the only degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchConfig {
    pub shape: PatchShape,
}

impl PatchConfig {
    pub fn one_d(l: usize) -> Self {
        PatchConfig {
            shape: PatchShape::OneD { l },
        }
    }

    pub fn two_d(s1: usize, s2: usize) -> Self {
        PatchConfig {
            shape: PatchShape::TwoD { s1, s2 },
        }
    }

    pub fn len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }

    /// Check the config against a signal shape: dimensions must match,
    /// 1 < ℓ < N, and 2-D patch sides must fit inside the raster.
    pub fn validate(&self, signal: SignalShape) -> Result<()> {
        let l = self.len();
        let n = signal.len();
        if l <= 1 || l >= n {
            return Err(Error::InvalidParameter(format!(
                "patch length {l} must satisfy 1 < l < N = {n}"
            )));
        }
        match (self.shape, signal) {
            (PatchShape::OneD { .. }, SignalShape::OneD { .. }) => Ok(()),
            (PatchShape::TwoD { s1, s2 }, SignalShape::TwoD { h, w }) => {
                if s1 == 0 || s2 == 0 || s1 > h || s2 > w {
                    Err(Error::DimensionMismatch(format!(
                        "{s1}x{s2} patch does not fit a {h}x{w} raster"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::DimensionMismatch(
                "patch and signal dimensionality differ".into(),
            )),
        }
    }
}

/// N×ℓ matrix whose rows are the signal's patches (when built by
/// [`build_patch_matrix`]) or any matrix living in the same index space
/// (frame expansions, solver outputs) awaiting anti-diagonal averaging.
#[derive(Clone, Debug)]
pub struct PatchMatrix {
    entries: Array2<f64>,
    signal_shape: SignalShape,
    patch_shape: PatchShape,
}

impl PatchMatrix {
    /// Wrap an existing N×ℓ matrix. The Hankel structure invariant is only
    /// guaranteed for matrices coming from [`build_patch_matrix`]; this
    /// constructor exists for matrices produced by frame synthesis or
    /// linear solvers that must be averaged back to pixel space.
    pub fn from_entries(
        entries: Array2<f64>,
        signal_shape: SignalShape,
        patch_shape: PatchShape,
    ) -> Result<Self> {
        if entries.nrows() != signal_shape.len() || entries.ncols() != patch_shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} entries for N={} and l={}",
                entries.nrows(),
                entries.ncols(),
                signal_shape.len(),
                patch_shape.len()
            )));
        }
        Ok(PatchMatrix {
            entries,
            signal_shape,
            patch_shape,
        })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Array2<f64> {
        &mut self.entries
    }

    /// Number of patches N (= number of pixels).
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Patch length ℓ.
    pub fn patch_len(&self) -> usize {
        self.entries.ncols()
    }

    pub fn signal_shape(&self) -> SignalShape {
        self.signal_shape
    }

    pub fn patch_shape(&self) -> PatchShape {
        self.patch_shape
    }

    /// Frobenius norm of the entries.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Build the patch matrix of `f`: row m is the patch anchored at sample m,
/// wrapped periodically.
pub fn build_patch_matrix(f: &Signal, cfg: &PatchConfig) -> Result<PatchMatrix> {
    cfg.validate(f.shape())?;
    let n = f.len();
    let l = cfg.len();
    let x = f.as_slice();
    let mut entries = Array2::zeros((n, l));
    match (cfg.shape, f.shape()) {
        (PatchShape::OneD { l }, SignalShape::OneD { .. }) => {
            for (m, mut row) in entries.outer_iter_mut().enumerate() {
                for j in 0..l {
                    row[j] = x[(m + j) % n];
                }
            }
        }
        (PatchShape::TwoD { s1, s2 }, SignalShape::TwoD { h, w }) => {
            for (m, mut row) in entries.outer_iter_mut().enumerate() {
                let (r, c) = (m / w, m % w);
                for dr in 0..s1 {
                    let rr = (r + dr) % h;
                    for dc in 0..s2 {
                        let cc = (c + dc) % w;
                        row[dr * s2 + dc] = x[rr * w + cc];
                    }
                }
            }
        }
        _ => unreachable!("validate() rejects mixed dimensionality"),
    }
    Ok(PatchMatrix {
        entries,
        signal_shape: f.shape(),
        patch_shape: cfg.shape,
    })
}

/// Average the ℓ entries of `fm` that copy each pixel. Exact left inverse of
/// [`build_patch_matrix`]; the canonical projection back to pixel space for
/// general matrices in patch-index space.
pub fn average_antidiagonals(fm: &PatchMatrix) -> Signal {
    let e = &fm.entries;
    let n = fm.n();
    let l = fm.patch_len() as f64;
    let mut out = Array1::zeros(n);
    match (fm.patch_shape, fm.signal_shape) {
        (PatchShape::OneD { l: pl }, SignalShape::OneD { .. }) => {
            // pixel p appears in row (p - j) mod N at column j
            for (p, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..pl {
                    acc += e[[(p + n - j) % n, j]];
                }
                *o = acc / l;
            }
        }
        (PatchShape::TwoD { s1, s2 }, SignalShape::TwoD { h, w }) => {
            for (p, o) in out.iter_mut().enumerate() {
                let (r, c) = (p / w, p % w);
                let mut acc = 0.0;
                for dr in 0..s1 {
                    let rr = (r + h - dr) % h;
                    for dc in 0..s2 {
                        let cc = (c + w - dc) % w;
                        acc += e[[rr * w + cc, dr * s2 + dc]];
                    }
                }
                *o = acc / l;
            }
        }
        _ => unreachable!("constructors enforce matching dimensionality"),
    }
    Signal::from_flat(out.to_vec(), fm.signal_shape).expect("shape consistent")
}

/// Circular convolution of zero-padded vectors:
/// `out[n] = Σ_m v0[(n-m) mod N] * w0[m]` where `v0`, `w0` are `v`, `w`
/// zero-padded to length `N`. Commutative; O(N·len(w)).
pub fn circular_convolve(v: &[f64], w: &[f64], n: usize) -> Result<Array1<f64>> {
    if v.len() > n || w.len() > n {
        return Err(Error::DimensionMismatch(format!(
            "convolution inputs of lengths {} and {} exceed N={n}",
            v.len(),
            w.len()
        )));
    }
    let mut out = Array1::zeros(n);
    for (m, &wm) in w.iter().enumerate() {
        if wm == 0.0 {
            continue;
        }
        for (k, &vk) in v.iter().enumerate() {
            out[(k + m) % n] += vk * wm;
        }
    }
    Ok(out)
}

/// Flip of `v` on the length-N circle: `out[n] = v0[(-n) mod N]`.
pub fn flip(v: &[f64], n: usize) -> Result<Array1<f64>> {
    if v.len() > n {
        return Err(Error::DimensionMismatch(format!(
            "flip input of length {} exceeds N={n}",
            v.len()
        )));
    }
    let mut out = Array1::zeros(n);
    for (k, &vk) in v.iter().enumerate() {
        out[(n - k) % n] = vk;
    }
    Ok(out)
}

/// 2-D circular convolution with the kernel zero-padded to the raster shape:
/// `out[r][c] = Σ_{i,j} a[(r-i) mod H][(c-j) mod W] * b[i][j]`.
pub fn circular_convolve_2d(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let (h, w) = a.dim();
    let (bh, bw) = b.dim();
    if bh > h || bw > w {
        return Err(Error::DimensionMismatch(format!(
            "kernel {bh}x{bw} exceeds raster {h}x{w}"
        )));
    }
    let mut out = Array2::zeros((h, w));
    for i in 0..bh {
        for j in 0..bw {
            let bij = b[[i, j]];
            if bij == 0.0 {
                continue;
            }
            for r in 0..h {
                let rr = (r + i) % h;
                for c in 0..w {
                    out[[rr, (c + j) % w]] += a[[r, c]] * bij;
                }
            }
        }
    }
    Ok(out)
}
