//! Tight-frame analysis and synthesis with convolution framelets.
//!
//! A frame atom is the circular convolution of a nonlocal basis column
//! (length N) with a zero-padded local basis column (length ℓ), scaled by
//! `1/√ℓ`. Analysis of a signal reduces to the matrix sandwich `C = ΦᵀFV`
//! over the patch matrix F, which is how it is computed here; the explicit
//! convolution path is reserved for test oracles. Synthesis applies the
//! transposed sandwich and averages the anti-diagonals, which for full
//! orthonormal Φ and V reconstructs the signal exactly (tight frame with
//! constant ℓ).

use ndarray::{s, Array2};

use crate::bases::{LocalBasis, LocalBasisKind, NonlocalBasis, NonlocalSource};
use crate::error::{Error, Result};
use crate::patch::{
    average_antidiagonals, build_patch_matrix, circular_convolve, circular_convolve_2d,
    PatchConfig, PatchMatrix, PatchShape,
};
use crate::signal::{Signal, SignalShape};

/// Coefficient matrix `C_ij = φ_iᵀ F v_j` of a signal against a basis pair.
///
/// For full orthonormal bases `‖C‖_F = ‖F‖_F` (orthogonal invariance); for
/// truncated bases the entries cover only the selected sub-system, which is
/// why the total patch-matrix energy is carried alongside: concentration
/// ratios stay meaningful when `p ≪ N`.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    entries: Array2<f64>,
    total_energy: f64,
    phi_meta: String,
    v_meta: String,
}

impl CoeffMatrix {
    /// Wraps raw coefficients. `total_energy` is `‖F‖²_F` of the patch
    /// matrix the coefficients were computed from.
    pub fn new(
        entries: Array2<f64>,
        total_energy: f64,
        phi_meta: impl Into<String>,
        v_meta: impl Into<String>,
    ) -> Self {
        CoeffMatrix {
            entries,
            total_energy,
            phi_meta: phi_meta.into(),
            v_meta: v_meta.into(),
        }
    }

    /// The coefficient entries (rows indexed by nonlocal columns, columns by
    /// local columns).
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Mutable access (used by n-term truncation).
    pub fn entries_mut(&mut self) -> &mut Array2<f64> {
        &mut self.entries
    }

    /// `‖F‖²_F` of the analyzed patch matrix.
    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// Identifier of the nonlocal basis that produced the rows.
    pub fn phi_meta(&self) -> &str {
        &self.phi_meta
    }

    /// Identifier of the local basis that produced the columns.
    pub fn v_meta(&self) -> &str {
        &self.v_meta
    }

    /// Frobenius norm of the coefficients.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&v| v * v).sum::<f64>().sqrt()
    }
}

fn describe_local(v: &LocalBasis) -> String {
    let kind = match v.kind() {
        LocalBasisKind::Dct => "dct",
        LocalBasisKind::Haar => "haar",
        LocalBasisKind::Random => "random",
        LocalBasisKind::PatchSvd => "patch-svd",
    };
    format!("{kind}(l={},r={})", v.len(), v.r())
}

fn describe_nonlocal(phi: &NonlocalBasis) -> String {
    let source = match phi.source() {
        NonlocalSource::Laplacian => "laplacian",
        NonlocalSource::PatchSvdLeft => "patch-svd-left",
        NonlocalSource::Identity => "identity",
    };
    format!("{source}(n={},p={})", phi.n(), phi.p())
}

fn check_pair(phi: &NonlocalBasis, v: &LocalBasis, n: usize, l: usize) -> Result<()> {
    if phi.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "nonlocal basis has {} rows, signal has {} samples",
            phi.n(),
            n
        )));
    }
    if v.len() != l {
        return Err(Error::DimensionMismatch(format!(
            "local basis has {} rows, patches have {} entries",
            v.len(),
            l
        )));
    }
    Ok(())
}

/// Coefficients of a signal: builds the patch matrix and computes `ΦᵀFV`.
pub fn analyze(
    f: &Signal,
    phi: &NonlocalBasis,
    v: &LocalBasis,
    cfg: &PatchConfig,
) -> Result<CoeffMatrix> {
    let fm = build_patch_matrix(f, cfg)?;
    analyze_patch_matrix(&fm, phi, v)
}

/// Coefficients of an existing patch matrix: `C = ΦᵀFV`.
pub fn analyze_patch_matrix(
    fm: &PatchMatrix,
    phi: &NonlocalBasis,
    v: &LocalBasis,
) -> Result<CoeffMatrix> {
    check_pair(phi, v, fm.n(), fm.patch_len())?;
    let fv = fm.entries().dot(v.vectors());
    let entries = phi.vectors().t().dot(&fv);
    let total = fm.norm();
    Ok(CoeffMatrix::new(
        entries,
        total * total,
        describe_nonlocal(phi),
        describe_local(v),
    ))
}

/// Signal synthesis: forms `Φ C Vᵀ` and averages its anti-diagonals.
///
/// With full orthonormal bases this inverts [`analyze`] exactly; with
/// truncated bases it returns the corresponding partial expansion.
pub fn synthesize(
    c: &CoeffMatrix,
    phi: &NonlocalBasis,
    v: &LocalBasis,
    cfg: &PatchConfig,
    shape: SignalShape,
) -> Result<Signal> {
    cfg.validate(shape)?;
    check_pair(phi, v, shape.len(), cfg.len())?;
    if c.entries.nrows() != phi.p() || c.entries.ncols() != v.r() {
        return Err(Error::DimensionMismatch(format!(
            "coefficients are {}x{}, bases give {}x{}",
            c.entries.nrows(),
            c.entries.ncols(),
            phi.p(),
            v.r()
        )));
    }
    let cv = c.entries.dot(&v.vectors().t());
    let entries = phi.vectors().dot(&cv);
    let fm = PatchMatrix::from_entries(entries, shape, cfg.shape)?;
    Ok(average_antidiagonals(&fm))
}

/// The frame atom `ψ_ij = (1/√ℓ)·φ_i * v_j` as a signal, where `v_j` is
/// zero-padded to the signal length before the circular convolution. For 2-D
/// shapes the convolution is the doubly periodic one of the rastered patch.
///
/// Consistency with [`analyze`]: `⟨f, ψ_ij⟩·√ℓ = C_ij`.
pub fn framelet_atom(
    phi: &NonlocalBasis,
    v: &LocalBasis,
    i: usize,
    j: usize,
    cfg: &PatchConfig,
    shape: SignalShape,
) -> Result<Signal> {
    cfg.validate(shape)?;
    check_pair(phi, v, shape.len(), cfg.len())?;
    if i >= phi.p() || j >= v.r() {
        return Err(Error::InvalidParameter(format!(
            "atom index ({i},{j}) out of range {}x{}",
            phi.p(),
            v.r()
        )));
    }
    let scale = 1.0 / (cfg.len() as f64).sqrt();
    let phi_col = phi.vectors().column(i).to_owned();
    let v_col = v.vectors().column(j).to_owned();
    match (shape, cfg.shape) {
        (SignalShape::OneD { n }, PatchShape::OneD { .. }) => {
            let conv = circular_convolve(
                phi_col.as_slice().expect("contiguous"),
                v_col.as_slice().expect("contiguous"),
                n,
            )?;
            Ok(Signal::from_vec(conv.iter().map(|&x| x * scale).collect()))
        }
        (SignalShape::TwoD { h, w }, PatchShape::TwoD { s1, s2 }) => {
            let phi_raster =
                Array2::from_shape_vec((h, w), phi_col.to_vec()).expect("shape checked");
            let v_raster = Array2::from_shape_vec((s1, s2), v_col.to_vec()).expect("shape checked");
            let conv = circular_convolve_2d(&phi_raster, &v_raster)?;
            Ok(Signal::from_array2(conv.mapv(|x| x * scale)))
        }
        _ => Err(Error::DimensionMismatch(
            "signal and patch dimensionality disagree".into(),
        )),
    }
}

/// Brute-force verification of the tight-frame constant.
///
/// Takes a long factor `VL` (n×n′ with `VL·VLᵀ = I_n`) and a short factor
/// `VS` (m×m′ with `VS·VSᵀ = I_m`, m ≤ n), accumulates the frame operator
/// `S = Σ_ij (v^L_j * v^S_i)(v^L_j * v^S_i)ᵀ` over ℝⁿ by explicit circular
/// convolutions, and returns `max_ij |S_ij − m·δ_ij|` — the deviation from
/// the predicted frame constant m.
pub fn verify_frame_constant(vl: &Array2<f64>, vs: &Array2<f64>) -> Result<f64> {
    let n = vl.nrows();
    let m = vs.nrows();
    if m > n {
        return Err(Error::InvalidParameter(format!(
            "short factor has {m} rows, may not exceed the long factor's {n}"
        )));
    }
    for (name, mat) in [("long", vl), ("short", vs)] {
        let gram = mat.dot(&mat.t());
        let rows = mat.nrows();
        for i in 0..rows {
            for j in 0..rows {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[[i, j]] - want).abs() > 1e-8 {
                    return Err(Error::NotOrthonormal(format!(
                        "{name} factor rows not orthonormal: deviation {} at ({i},{j})",
                        (gram[[i, j]] - want).abs()
                    )));
                }
            }
        }
    }

    let mut s = Array2::<f64>::zeros((n, n));
    for j in 0..vl.ncols() {
        let long_col = vl.column(j).to_owned();
        let long = long_col.as_slice().expect("contiguous");
        for i in 0..vs.ncols() {
            let short_col = vs.column(i).to_owned();
            let atom = circular_convolve(long, short_col.as_slice().expect("contiguous"), n)?;
            for a in 0..n {
                for b in 0..n {
                    s[[a, b]] += atom[a] * atom[b];
                }
            }
        }
    }
    let mut dev = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let want = if a == b { m as f64 } else { 0.0 };
            dev = dev.max((s[[a, b]] - want).abs());
        }
    }
    Ok(dev)
}

/// Fraction of the total patch-matrix energy captured by the upper-left
/// `p×r` coefficient block: `(Σ_{i<p, j<r} C_ij²) / ‖F‖²_F`.
///
/// For full orthonormal bases the denominator equals `‖C‖²_F`; for truncated
/// systems it still refers to the whole signal, so ratios of competing bases
/// remain comparable.
pub fn energy_concentration(c: &CoeffMatrix, p: usize, r: usize) -> Result<f64> {
    let (rows, cols) = c.entries.dim();
    if p == 0 || r == 0 || p > rows || r > cols {
        return Err(Error::InvalidParameter(format!(
            "block {p}x{r} invalid for a {rows}x{cols} coefficient matrix"
        )));
    }
    let block = c
        .entries
        .slice(s![..p, ..r])
        .iter()
        .map(|&v| v * v)
        .sum::<f64>();
    if c.total_energy <= 0.0 {
        return Ok(0.0);
    }
    Ok(block / c.total_energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{
        dct_basis, haar_basis, laplacian_eigenbasis, random_orthonormal_basis, svd_local_basis,
    };
    use crate::graph::{build_patch_graph, BandwidthMode};
    use crate::linalg::{complete_orthonormal, orthonormalize_columns, thin_svd};
    use crate::signal::SignalShape;
    use ndarray::Array1;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_signal_1d(n: usize, seed: u64) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Signal::from_vec((0..n).map(|_| rng.sample(StandardNormal)).collect())
    }

    fn random_signal_2d(h: usize, w: usize, seed: u64) -> Signal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Signal::from_array2(Array2::from_shape_fn((h, w), |_| rng.sample(StandardNormal)))
    }

    fn identity_local(l: usize) -> LocalBasis {
        LocalBasis::from_parts(Array2::eye(l), None, LocalBasisKind::Random).unwrap()
    }

    fn random_orthogonal(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = Array2::from_shape_fn((n, n), |_| rng.sample(StandardNormal));
        orthonormalize_columns(&raw).unwrap()
    }

    #[test]
    fn identity_bases_reproduce_patch_matrix() {
        let f = random_signal_1d(10, 4);
        let cfg = PatchConfig::one_d(3);
        let phi = NonlocalBasis::identity(10);
        let v = identity_local(3);
        let c = analyze(&f, &phi, &v, &cfg).unwrap();
        let fm = build_patch_matrix(&f, &cfg).unwrap();
        assert_eq!(c.entries(), fm.entries());
        assert!((c.total_energy() - fm.norm() * fm.norm()).abs() < 1e-12);
    }

    #[test]
    fn full_svd_bases_diagonalize_coefficients() {
        let f = random_signal_1d(12, 8);
        let cfg = PatchConfig::one_d(4);
        let fm = build_patch_matrix(&f, &cfg).unwrap();
        let svd = thin_svd(fm.entries()).unwrap();
        let phi_full = complete_orthonormal(&svd.u).unwrap();
        let phi = NonlocalBasis::from_parts(phi_full, None, NonlocalSource::PatchSvdLeft).unwrap();
        let v = LocalBasis::from_parts(svd.v.clone(), None, LocalBasisKind::PatchSvd).unwrap();
        let c = analyze(&f, &phi, &v, &cfg).unwrap();
        let entries = c.entries();
        for i in 0..12 {
            for j in 0..4 {
                let want = if i == j { svd.sigma[i] } else { 0.0 };
                assert!(
                    (entries[[i, j]] - want).abs() < 1e-8,
                    "C[{i},{j}] = {} want {want}",
                    entries[[i, j]]
                );
            }
        }
    }

    #[test]
    fn coefficients_match_convolution_inner_products() {
        let n = 16;
        let l = 4;
        let f = random_signal_1d(n, 21);
        let cfg = PatchConfig::one_d(l);
        let phi =
            NonlocalBasis::from_parts(random_orthogonal(n, 1), None, NonlocalSource::Identity)
                .unwrap();
        let v = random_orthonormal_basis(PatchShape::OneD { l }, 2);
        let c = analyze(&f, &phi, &v, &cfg).unwrap();
        for i in 0..n {
            for j in 0..l {
                let phi_col = phi.vectors().column(i).to_owned();
                let v_col = v.vectors().column(j).to_owned();
                let conv = circular_convolve(
                    phi_col.as_slice().unwrap(),
                    v_col.as_slice().unwrap(),
                    n,
                )
                .unwrap();
                let direct: f64 = f.values().iter().zip(conv.iter()).map(|(a, b)| a * b).sum();
                assert!(
                    (c.entries()[[i, j]] - direct).abs() < 1e-10,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn round_trip_is_exact_for_every_local_basis_kind() {
        // 1-D: N=32, l=8, Laplacian nonlocal at full p.
        let f = random_signal_1d(32, 3);
        let cfg = PatchConfig::one_d(8);
        let fm = build_patch_matrix(&f, &cfg).unwrap();
        let g = build_patch_graph(&fm, 6, BandwidthMode::SelfTuningSymmetric, 3).unwrap();
        let phi = laplacian_eigenbasis(&g, 32).unwrap();
        let locals = [
            dct_basis(PatchShape::OneD { l: 8 }),
            haar_basis(PatchShape::OneD { l: 8 }).unwrap(),
            random_orthonormal_basis(PatchShape::OneD { l: 8 }, 5),
            svd_local_basis(&fm, 8).unwrap(),
        ];
        for v in &locals {
            let c = analyze(&f, &phi, v, &cfg).unwrap();
            let back = synthesize(&c, &phi, v, &cfg, f.shape()).unwrap();
            let err = f
                .values()
                .iter()
                .zip(back.values().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(err < 1e-10, "{} round trip error {err}", c.v_meta());
        }

        // 2-D: 6x4 image, 2x2 patches, identity nonlocal.
        let img = random_signal_2d(6, 4, 9);
        let cfg2 = PatchConfig::two_d(2, 2);
        let fm2 = build_patch_matrix(&img, &cfg2).unwrap();
        let phi2 = NonlocalBasis::identity(24);
        let locals2 = [
            dct_basis(PatchShape::TwoD { s1: 2, s2: 2 }),
            haar_basis(PatchShape::TwoD { s1: 2, s2: 2 }).unwrap(),
            random_orthonormal_basis(PatchShape::TwoD { s1: 2, s2: 2 }, 6),
            svd_local_basis(&fm2, 4).unwrap(),
        ];
        for v in &locals2 {
            let c = analyze(&img, &phi2, v, &cfg2).unwrap();
            let back = synthesize(&c, &phi2, v, &cfg2, img.shape()).unwrap();
            let err = img
                .values()
                .iter()
                .zip(back.values().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(err < 1e-10, "{} 2-D round trip error {err}", c.v_meta());
        }
    }

    #[test]
    fn zero_coefficients_synthesize_to_zero() {
        let cfg = PatchConfig::one_d(3);
        let phi = NonlocalBasis::identity(9);
        let v = identity_local(3);
        let c = CoeffMatrix::new(Array2::zeros((9, 3)), 0.0, "", "");
        let out = synthesize(&c, &phi, &v, &cfg, SignalShape::OneD { n: 9 }).unwrap();
        assert!(out.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn truncated_svd_block_recovers_low_rank_signal() {
        // A sinusoid's patch matrix has rank 2, so the top 2x2 SVD system
        // reconstructs the signal exactly.
        let n = 24;
        let f = Signal::from_vec(
            (0..n)
                .map(|k| (2.0 * std::f64::consts::PI * k as f64 / n as f64).sin())
                .collect(),
        );
        let cfg = PatchConfig::one_d(6);
        let fm = build_patch_matrix(&f, &cfg).unwrap();
        let svd = thin_svd(fm.entries()).unwrap();
        assert!(svd.sigma[2] < 1e-10 * svd.sigma[0], "rank should be 2");
        let phi = NonlocalBasis::from_parts(
            svd.u.slice(s![.., ..2]).to_owned(),
            None,
            NonlocalSource::PatchSvdLeft,
        )
        .unwrap();
        let v = LocalBasis::from_parts(
            svd.v.slice(s![.., ..2]).to_owned(),
            None,
            LocalBasisKind::PatchSvd,
        )
        .unwrap();
        let c = analyze(&f, &phi, &v, &cfg).unwrap();
        let back = synthesize(&c, &phi, &v, &cfg, f.shape()).unwrap();
        let err = f
            .values()
            .iter()
            .zip(back.values().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-9, "low-rank recovery error {err}");
    }

    #[test]
    fn delta_atom_is_scaled_delta() {
        let cfg = PatchConfig::one_d(4);
        let phi = NonlocalBasis::identity(8);
        let v = identity_local(4);
        let atom = framelet_atom(&phi, &v, 0, 0, &cfg, SignalShape::OneD { n: 8 }).unwrap();
        assert!((atom.values()[0] - 0.5).abs() < 1e-15);
        assert!(atom.values().iter().skip(1).all(|&x| x == 0.0));
    }

    #[test]
    fn atom_norm_is_bounded_and_consistent_with_analyze() {
        let n = 12;
        let l = 3;
        let f = random_signal_1d(n, 30);
        let cfg = PatchConfig::one_d(l);
        let phi =
            NonlocalBasis::from_parts(random_orthogonal(n, 40), None, NonlocalSource::Identity)
                .unwrap();
        let v = random_orthonormal_basis(PatchShape::OneD { l }, 41);
        let c = analyze(&f, &phi, &v, &cfg).unwrap();
        let sqrt_l = (l as f64).sqrt();
        for i in 0..n {
            for j in 0..l {
                let atom = framelet_atom(&phi, &v, i, j, &cfg, f.shape()).unwrap();
                assert!(atom.norm() <= 1.0 + 1e-12, "atom norm {}", atom.norm());
                let inner: f64 = f
                    .values()
                    .iter()
                    .zip(atom.values().iter())
                    .map(|(a, b)| a * b)
                    .sum();
                assert!(
                    (inner * sqrt_l - c.entries()[[i, j]]).abs() < 1e-10,
                    "atom ({i},{j}) inconsistent with coefficients"
                );
            }
        }
        assert!(framelet_atom(&phi, &v, n, 0, &cfg, f.shape()).is_err());
    }

    #[test]
    fn explicit_atom_sum_reconstructs_signal() {
        let n = 12;
        let l = 3;
        let f = random_signal_1d(n, 50);
        let cfg = PatchConfig::one_d(l);
        let phi =
            NonlocalBasis::from_parts(random_orthogonal(n, 51), None, NonlocalSource::Identity)
                .unwrap();
        let v = random_orthonormal_basis(PatchShape::OneD { l }, 52);
        let mut acc = Array1::<f64>::zeros(n);
        for i in 0..n {
            for j in 0..l {
                let atom = framelet_atom(&phi, &v, i, j, &cfg, f.shape()).unwrap();
                let inner: f64 = f
                    .values()
                    .iter()
                    .zip(atom.values().iter())
                    .map(|(a, b)| a * b)
                    .sum();
                acc.scaled_add(inner, atom.values());
            }
        }
        let err = f
            .values()
            .iter()
            .zip(acc.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-9, "frame operator deviation {err}");
    }

    #[test]
    fn frame_constant_identity_cases() {
        let dev = verify_frame_constant(&Array2::eye(4), &Array2::eye(2)).unwrap();
        assert!(dev < 1e-12, "I4/I2 deviation {dev}");
        let dev = verify_frame_constant(&Array2::eye(4), &Array2::eye(1)).unwrap();
        assert!(dev < 1e-12, "I4/I1 deviation {dev}");
    }

    #[test]
    fn frame_constant_random_row_orthonormal_factors() {
        // Row-orthonormal rectangles: transposes of column-orthonormal ones.
        let long = random_orthogonal(6, 61).slice(s![.., ..4]).to_owned();
        let short = random_orthogonal(3, 62).slice(s![.., ..2]).to_owned();
        let vl = long.t().to_owned(); // 4x6, VL·VLᵀ = I_4
        let vs = short.t().to_owned(); // 2x3, VS·VSᵀ = I_2
        let dev = verify_frame_constant(&vl, &vs).unwrap();
        assert!(dev < 1e-10, "random factors deviation {dev}");
    }

    #[test]
    fn frame_constant_rejects_non_orthonormal_rows() {
        let bad = Array2::from_elem((2, 3), 0.4);
        assert!(verify_frame_constant(&Array2::eye(4), &bad).is_err());
        assert!(verify_frame_constant(&bad, &Array2::eye(2)).is_err());
    }

    #[test]
    fn parseval_scaling_of_coefficients() {
        let n = 20;
        let l = 4;
        let f = random_signal_1d(n, 70);
        // Identity nonlocal basis is a full orthonormal system, so the
        // coefficient norm equals the patch-matrix norm = √l·‖f‖.
        let cfg = PatchConfig::one_d(l);
        let phi = NonlocalBasis::identity(n);
        for v in [
            dct_basis(PatchShape::OneD { l }),
            random_orthonormal_basis(PatchShape::OneD { l }, 71),
        ] {
            let c = analyze(&f, &phi, &v, &cfg).unwrap();
            let want = (l as f64).sqrt() * f.norm();
            assert!(
                (c.norm() - want).abs() < 1e-8 * want,
                "coefficient norm {} vs {want}",
                c.norm()
            );
        }
    }

    #[test]
    fn concentration_ratios() {
        // All energy in the leading block.
        let mut entries = Array2::zeros((4, 4));
        entries[[0, 0]] = 3.0;
        entries[[1, 1]] = 4.0;
        let c = CoeffMatrix::new(entries.clone(), 25.0, "", "");
        assert!((energy_concentration(&c, 2, 2).unwrap() - 1.0).abs() < 1e-12);
        // Single coefficient outside the block.
        let mut outside = Array2::zeros((4, 4));
        outside[[2, 0]] = 5.0;
        let c = CoeffMatrix::new(outside, 25.0, "", "");
        assert_eq!(energy_concentration(&c, 2, 2).unwrap(), 0.0);
        // Truncated system: denominator is the full signal energy.
        let mut block = Array2::zeros((2, 2));
        block[[0, 0]] = 5.0;
        let c = CoeffMatrix::new(block, 100.0, "", "");
        assert!((energy_concentration(&c, 2, 2).unwrap() - 0.25).abs() < 1e-12);
        // Degenerate block errors.
        assert!(energy_concentration(&c, 0, 1).is_err());
        assert!(energy_concentration(&c, 3, 1).is_err());
    }
}
