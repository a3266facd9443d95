//! Orthonormal bases for patch space (local) and signal space (nonlocal).
//!
//! Local bases live on ℝˡ (one patch): DCT-II, Haar wavelets, seeded random
//! orthonormal matrices, and the right singular vectors of a patch matrix.
//! For 2-D patches the DCT and Haar bases are Kronecker products of their
//! 1-D factors per side, with columns ordered coarse-to-fine by
//! `(j₁+j₂, j₁)` ascending.
//!
//! Nonlocal bases live on ℝᴺ (one coefficient per patch/pixel): low
//! eigenvectors of the normalized diffusion Laplacian of a patch graph, left
//! singular vectors of the patch matrix, or the identity. All bases use a
//! deterministic sign convention (largest-magnitude entry of each column is
//! positive).

use ndarray::{s, Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{smallest_eigenpairs, PatchGraph};
use crate::linalg::{canonicalize_column_signs, orthonormalize_columns, thin_svd};
use crate::patch::{PatchMatrix, PatchShape};

/// Which construction produced a local basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalBasisKind {
    Dct,
    Haar,
    Random,
    PatchSvd,
}

/// Orthonormal columns spanning (a subspace of) patch space ℝˡ.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    vectors: Array2<f64>,
    spectrum: Option<Array1<f64>>,
    kind: LocalBasisKind,
}

impl LocalBasis {
    /// Wraps precomputed columns, validating orthonormality to 1e-10.
    pub fn from_parts(
        vectors: Array2<f64>,
        spectrum: Option<Array1<f64>>,
        kind: LocalBasisKind,
    ) -> Result<Self> {
        let gram = vectors.t().dot(&vectors);
        let r = vectors.ncols();
        for i in 0..r {
            for j in 0..r {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[[i, j]] - want).abs() > 1e-10 {
                    return Err(Error::NotOrthonormal(format!(
                        "local basis gram deviation {} at ({i},{j})",
                        (gram[[i, j]] - want).abs()
                    )));
                }
            }
        }
        if let Some(sp) = &spectrum {
            if sp.len() != r {
                return Err(Error::DimensionMismatch(
                    "spectrum length must match column count".into(),
                ));
            }
        }
        Ok(LocalBasis {
            vectors,
            spectrum,
            kind,
        })
    }

    /// Patch dimension ℓ (rows).
    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    /// True when the basis has no columns.
    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    /// Number of columns r ≤ ℓ.
    pub fn r(&self) -> usize {
        self.vectors.ncols()
    }

    /// The basis matrix V (ℓ×r, orthonormal columns).
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    /// Singular values attached to the columns (present for [`LocalBasisKind::PatchSvd`]).
    pub fn spectrum(&self) -> Option<&Array1<f64>> {
        self.spectrum.as_ref()
    }

    /// Construction tag.
    pub fn kind(&self) -> LocalBasisKind {
        self.kind
    }

    /// The leading `r` columns as a new basis (spectrum truncated alongside).
    pub fn truncated(&self, r: usize) -> Result<LocalBasis> {
        if r == 0 || r > self.r() {
            return Err(Error::InvalidParameter(format!(
                "truncation rank {r} out of range 1..={}",
                self.r()
            )));
        }
        Ok(LocalBasis {
            vectors: self.vectors.slice(s![.., ..r]).to_owned(),
            spectrum: self.spectrum.as_ref().map(|sp| sp.slice(s![..r]).to_owned()),
            kind: self.kind,
        })
    }
}

/// Which construction produced a nonlocal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlocalSource {
    Laplacian,
    PatchSvdLeft,
    Identity,
}

/// Orthonormal columns spanning (a subspace of) signal space ℝᴺ.
#[derive(Debug, Clone)]
pub struct NonlocalBasis {
    vectors: Array2<f64>,
    eigenvalues: Option<Array1<f64>>,
    source: NonlocalSource,
}

impl NonlocalBasis {
    /// Wraps precomputed columns, validating orthonormality to 1e-8.
    pub fn from_parts(
        vectors: Array2<f64>,
        eigenvalues: Option<Array1<f64>>,
        source: NonlocalSource,
    ) -> Result<Self> {
        let gram = vectors.t().dot(&vectors);
        let p = vectors.ncols();
        for i in 0..p {
            for j in 0..p {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[[i, j]] - want).abs() > 1e-8 {
                    return Err(Error::NotOrthonormal(format!(
                        "nonlocal basis gram deviation {} at ({i},{j})",
                        (gram[[i, j]] - want).abs()
                    )));
                }
            }
        }
        if let Some(ev) = &eigenvalues {
            if ev.len() != p {
                return Err(Error::DimensionMismatch(
                    "eigenvalue count must match column count".into(),
                ));
            }
        }
        Ok(NonlocalBasis {
            vectors,
            eigenvalues,
            source,
        })
    }

    /// Full identity basis on ℝⁿ.
    pub fn identity(n: usize) -> Self {
        NonlocalBasis {
            vectors: Array2::eye(n),
            eigenvalues: None,
            source: NonlocalSource::Identity,
        }
    }

    /// Signal dimension N (rows).
    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    /// Number of columns p ≤ N.
    pub fn p(&self) -> usize {
        self.vectors.ncols()
    }

    /// The basis matrix Φ (N×p, orthonormal columns).
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    /// Laplacian eigenvalues attached to the columns, ascending (present for
    /// [`NonlocalSource::Laplacian`]).
    pub fn eigenvalues(&self) -> Option<&Array1<f64>> {
        self.eigenvalues.as_ref()
    }

    /// Construction tag.
    pub fn source(&self) -> NonlocalSource {
        self.source
    }
}

/// Orthogonal DCT-II basis on the given patch shape. For 2-D shapes this is
/// the Kronecker product of the per-side 1-D bases, columns ordered by
/// `(j₁+j₂, j₁)` ascending so low frequencies come first.
pub fn dct_basis(shape: PatchShape) -> LocalBasis {
    let vectors = match shape {
        PatchShape::OneD { l } => dct_matrix(l),
        PatchShape::TwoD { s1, s2 } => ordered_kron(&dct_matrix(s1), &dct_matrix(s2)),
    };
    LocalBasis {
        vectors,
        spectrum: None,
        kind: LocalBasisKind::Dct,
    }
}

fn dct_matrix(l: usize) -> Array2<f64> {
    assert!(l >= 1);
    let mut v = Array2::zeros((l, l));
    let scale = (2.0 / l as f64).sqrt();
    for j in 0..l {
        let cj = if j == 0 { (0.5f64).sqrt() } else { 1.0 };
        for k in 0..l {
            let angle = std::f64::consts::PI * (2.0 * k as f64 + 1.0) * j as f64 / (2.0 * l as f64);
            v[[k, j]] = scale * cj * angle.cos();
        }
    }
    v
}

/// Orthonormal Haar wavelet basis, coarse to fine. Requires the patch length
/// (each side for 2-D shapes) to be a power of two.
pub fn haar_basis(shape: PatchShape) -> Result<LocalBasis> {
    let vectors = match shape {
        PatchShape::OneD { l } => haar_matrix(l)?,
        PatchShape::TwoD { s1, s2 } => ordered_kron(&haar_matrix(s1)?, &haar_matrix(s2)?),
    };
    Ok(LocalBasis {
        vectors,
        spectrum: None,
        kind: LocalBasisKind::Haar,
    })
}

fn haar_matrix(l: usize) -> Result<Array2<f64>> {
    if l == 0 || !l.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "Haar basis needs a power-of-two length per side, got {l}"
        )));
    }
    // Recursive doubling: H_{2n} = [H_n ⊗ (1,1)ᵀ, I_n ⊗ (1,−1)ᵀ], columns
    // normalized. Yields the classic coarse-to-fine ordering starting with
    // the constant vector.
    let mut h = Array2::from_elem((1, 1), 1.0);
    let mut size = 1;
    while size < l {
        let next = 2 * size;
        let mut hn = Array2::zeros((next, next));
        let inv_sqrt2 = (0.5f64).sqrt();
        for col in 0..size {
            for row in 0..size {
                let val = h[[row, col]] * inv_sqrt2;
                hn[[2 * row, col]] = val;
                hn[[2 * row + 1, col]] = val;
            }
        }
        for col in 0..size {
            hn[[2 * col, size + col]] = inv_sqrt2;
            hn[[2 * col + 1, size + col]] = -inv_sqrt2;
        }
        h = hn;
        size = next;
    }
    Ok(h)
}

/// Kronecker product of two per-side bases, columns reordered by
/// `(j₁+j₂, j₁)` ascending. Column `(j₁, j₂)` evaluates the outer product
/// `a_{j₁}·b_{j₂}ᵀ` flattened row-major like the patch entries.
fn ordered_kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (s1, s2) = (a.nrows(), b.nrows());
    let l = s1 * s2;
    let mut pairs: Vec<(usize, usize)> = (0..a.ncols())
        .flat_map(|j1| (0..b.ncols()).map(move |j2| (j1, j2)))
        .collect();
    pairs.sort_by_key(|&(j1, j2)| (j1 + j2, j1));
    let mut v = Array2::zeros((l, pairs.len()));
    for (col, &(j1, j2)) in pairs.iter().enumerate() {
        for dr in 0..s1 {
            for dc in 0..s2 {
                v[[dr * s2 + dc, col]] = a[[dr, j1]] * b[[dc, j2]];
            }
        }
    }
    v
}

/// Seeded random orthonormal basis of ℝˡ: the Gram-Schmidt factor of a
/// ChaCha-generated Gaussian matrix. The same seed always yields the same
/// basis.
pub fn random_orthonormal_basis(shape: PatchShape, seed: u64) -> LocalBasis {
    let l = shape.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = loop {
        let raw = Array2::from_shape_fn((l, l), |_| StandardNormal.sample(&mut rng));
        // A Gaussian square matrix is singular with probability zero, but the
        // orthonormalization rejects near-dependence, so retry on the
        // residual stream if it ever trips.
        if let Ok(q) = orthonormalize_columns(&raw) {
            break q;
        }
    };
    LocalBasis {
        vectors,
        spectrum: None,
        kind: LocalBasisKind::Random,
    }
}

/// Top-`r` right singular vectors of the patch matrix with their singular
/// values; the sign of each column is fixed so its largest-magnitude entry is
/// positive.
pub fn svd_local_basis(f: &PatchMatrix, r: usize) -> Result<LocalBasis> {
    let l = f.patch_len();
    if r == 0 || r > l {
        return Err(Error::InvalidParameter(format!(
            "svd basis rank {r} out of range 1..={l}"
        )));
    }
    let svd = thin_svd(f.entries())?;
    let mut vectors = svd.v.slice(s![.., ..r]).to_owned();
    canonicalize_column_signs(&mut vectors);
    Ok(LocalBasis {
        vectors,
        spectrum: Some(svd.sigma.slice(s![..r]).to_owned()),
        kind: LocalBasisKind::PatchSvd,
    })
}

/// Top-`p` left singular vectors of the patch matrix as a nonlocal basis
/// (sign-canonicalized, no eigenvalues attached).
pub fn svd_nonlocal_basis(f: &PatchMatrix, p: usize) -> Result<NonlocalBasis> {
    let l = f.patch_len();
    if p == 0 || p > l {
        return Err(Error::InvalidParameter(format!(
            "left-singular basis size {p} out of range 1..={l} (rank is at most the patch length)"
        )));
    }
    let svd = thin_svd(f.entries())?;
    let mut vectors = svd.u.slice(s![.., ..p]).to_owned();
    canonicalize_column_signs(&mut vectors);
    NonlocalBasis::from_parts(vectors, None, NonlocalSource::PatchSvdLeft)
}

/// The `p` lowest eigenpairs of the graph's normalized diffusion Laplacian
/// as a nonlocal basis.
///
/// For asymmetric weights the Laplacian is replaced by its symmetric part
/// `(L+Lᵀ)/2` before the eigendecomposition. Symmetric-mode eigenvalues lie
/// in [0, 1]; rounding-scale negatives are clamped to zero. Asymmetric-mode
/// weights normalize by asymmetric row sums, so the symmetrized operator can
/// have genuinely negative low eigenvalues — those are kept as computed.
/// Vectors are orthonormal with the canonical sign convention.
///
/// Weakly connected graphs (small neighbor counts or bandwidth ranks) cluster
/// many eigenvalues near zero, and the iterative eigensolver used for large
/// graphs may then return [`Error::EigenNoConvergence`]; increasing the
/// neighbor count or bandwidth rank when building the graph resolves this.
pub fn laplacian_eigenbasis(g: &PatchGraph, p: usize) -> Result<NonlocalBasis> {
    let lap = g.normalized_laplacian();
    let lap = if lap.symmetry_gap() > 0.0 {
        lap.symmetrized()
    } else {
        lap
    };
    let (vals, mut vecs) = smallest_eigenpairs(&lap, p)?;
    let clamped = vals.mapv(clamp_rounding_negative);
    canonicalize_column_signs(&mut vecs);
    NonlocalBasis::from_parts(vecs, Some(clamped), NonlocalSource::Laplacian)
}

/// Zero out negatives that are mere rounding noise, keep real ones.
fn clamp_rounding_negative(v: f64) -> f64 {
    if (-1e-8..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}
