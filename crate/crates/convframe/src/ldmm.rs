//! Low-dimensional-manifold-model (LDMM) inpainting and its reweighted
//! variant.
//!
//! Both algorithms alternate between a graph built from the current patch
//! matrix and a split-Bregman update. One outer iteration:
//!
//! 1. build the k-NN Gaussian patch graph `(W, D)` from the current `F`;
//! 2. form the split target `E = F − d`;
//! 3. solve graph linear systems for a smoothed patch matrix:
//!    - plain: `(D − W + μW) G = μ W E` column by column, `F̃ = G + d`;
//!    - reweighted: pick `r` local directions `V_r` (top right singular
//!      vectors of `F`, or the first `r` DCT vectors), weight each by
//!      `γ_j = 1 − s_j/s₁`, solve `(γ_j(D−W) + μW) H^j = μW (E V_r)^j`
//!      per direction plus one unweighted block system for the complement
//!      `E (I − V_r V_rᵀ)`, and recombine `F̃ = H V_rᵀ + U + d`;
//! 4. average `F̃`'s anti-diagonals back to a signal, reset the known
//!    samples to their measured values, rebuild `F`, and update the
//!    Bregman variable `d ← F̃ − F`.
//!
//! Weighting a direction by `γ_j < 1` relaxes the manifold-smoothness
//! penalty along it, so dominant patch-space directions — the ones that
//! carry texture — are smoothed less aggressively than in the plain model.
//!
//! Missing samples start as Gaussian noise matching the known samples'
//! mean and variance, drawn from a seeded generator: runs are fully
//! deterministic for fixed inputs.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bases::dct_basis;
use crate::error::{Error, Result};
use crate::graph::{build_patch_graph, BandwidthMode, CsrMatrix};
use crate::linalg::{lu_solve, thin_svd};
use crate::mask::Mask;
use crate::nterm::{energy_filtered, psnr, PeakMode};
use crate::patch::{average_antidiagonals, build_patch_matrix, PatchConfig, PatchMatrix};
use crate::signal::Signal;
use crate::solver::{bicgstab, conjugate_gradient};

/// Which local basis supplies the reweighted directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdmmLocalKind {
    /// Plain LDMM: no reweighting.
    None,
    /// Top right singular vectors of the current patch matrix; weights
    /// from the singular values.
    Svd,
    /// First `r` DCT vectors; weights from the energies `‖F v_j‖²`.
    Dct,
}

/// Functional form of the reweighting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaForm {
    /// `γ_j = 1 − s_j/s₁`, clamped to `[0, 1]` (the default).
    OneMinusRatio,
    /// `γ_j = s₁/s_j − 1`, capped at [`ALT_GAMMA_CAP`]; tends to
    /// over-smooth and is kept only for experimentation.
    RatioMinusOne,
}

/// Cap on [`GammaForm::RatioMinusOne`] weights so a vanishing `s_j` cannot
/// produce an unbounded system.
pub const ALT_GAMMA_CAP: f64 = 1e6;

/// Parameters shared by [`ldmm_inpaint`] and [`rw_ldmm_inpaint`].
#[derive(Clone, Debug)]
pub struct LdmmParams {
    /// Penalty weight μ > 0 on the data-fit term.
    pub mu: f64,
    /// Outer iterations.
    pub iters: usize,
    /// Neighbors per node in the patch graph.
    pub knn: usize,
    /// Rank of the neighbor whose distance sets each node's kernel scale.
    pub nn_rank: usize,
    /// Kernel symmetrization of the patch graph.
    pub bandwidth_mode: BandwidthMode,
    /// Patch geometry.
    pub patch: PatchConfig,
    /// Reweighted-direction source ([`LdmmLocalKind::None`] = plain LDMM).
    pub local_kind: LdmmLocalKind,
    /// Reweighted direction count; `None` means `⌈0.2 ℓ⌉`.
    pub r: Option<usize>,
    /// Relative residual target of the inner linear solves.
    pub solver_tol: f64,
    /// Iteration cap of the inner linear solves.
    pub solver_max_iters: usize,
    /// Seed for the Gaussian fill of missing samples.
    pub seed: u64,
    /// Reweighting formula.
    pub gamma_form: GammaForm,
}

impl LdmmParams {
    /// Defaults: μ = 0.5, 100 iterations, 50-NN graph with scale from the
    /// 25th neighbor, asymmetric kernel, plain LDMM, solver tolerance 1e-6
    /// capped at 2000 iterations, seed 0.
    pub fn new(patch: PatchConfig) -> Self {
        LdmmParams {
            mu: 0.5,
            iters: 100,
            knn: 50,
            nn_rank: 25,
            bandwidth_mode: BandwidthMode::SelfTuningAsymmetric,
            patch,
            local_kind: LdmmLocalKind::None,
            r: None,
            solver_tol: 1e-6,
            solver_max_iters: 2000,
            seed: 0,
            gamma_form: GammaForm::OneMinusRatio,
        }
    }

    /// The reweighted direction count: the override if set, else `⌈0.2 ℓ⌉`.
    pub fn effective_r(&self) -> usize {
        let l = self.patch.len();
        self.r.unwrap_or_else(|| (0.2 * l as f64).ceil() as usize)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu must be positive and finite, got {}",
                self.mu
            )));
        }
        if self.iters == 0 {
            return Err(Error::InvalidParameter("iters must be at least 1".into()));
        }
        let l = self.patch.len();
        let r = self.effective_r();
        if r == 0 || r > l {
            return Err(Error::InvalidParameter(format!(
                "reweighted direction count r = {r} must satisfy 1 <= r <= {l}"
            )));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "solver tolerance must be positive, got {}",
                self.solver_tol
            )));
        }
        Ok(())
    }
}

/// Inpainting result: the reconstructed signal and, when ground truth was
/// supplied, the PSNR after each outer iteration.
#[derive(Clone, Debug)]
pub struct InpaintOutcome {
    pub signal: Signal,
    pub psnr_trace: Vec<f64>,
}

/// Reweighting weights from a nonincreasing score vector `s₁ ≥ … ≥ s_r`.
///
/// The default form is `γ_j = 1 − s_j/s₁`, clamped to `[0, 1]`, so the
/// strongest direction gets `γ₁ = 0` (no smoothing) and negligible ones
/// approach 1 (full smoothing). All weights are 0 when `s₁ ≤ 0` — with no
/// signal there is nothing to reweight.
pub fn gamma_weights(s: &[f64], form: GammaForm) -> Vec<f64> {
    let Some(&s1) = s.first() else {
        return Vec::new();
    };
    if s1.is_nan() || s1 <= 0.0 {
        return vec![0.0; s.len()];
    }
    match form {
        GammaForm::OneMinusRatio => s.iter().map(|&sj| (1.0 - sj / s1).clamp(0.0, 1.0)).collect(),
        GammaForm::RatioMinusOne => s
            .iter()
            .map(|&sj| {
                if sj <= 0.0 {
                    ALT_GAMMA_CAP
                } else {
                    (s1 / sj - 1.0).clamp(0.0, ALT_GAMMA_CAP)
                }
            })
            .collect(),
    }
}

/// Manifold-smoothness quadratic form `Σ_j (F^j)ᵀ R_L F^j` of a dense
/// weight matrix `W` with degree vector `D`, where
/// `R_L = D^{1/2}((I − L)^{-1} − I) D^{1/2}` and `L` is the normalized
/// diffusion Laplacian. Equals `tr(Fᵀ D W^{-1} (D − W) F)`. Dense,
/// diagnostic-scale only; errors when `W` is singular.
pub fn rl_quadratic(f: &Array2<f64>, w: &Array2<f64>, degrees: &Array1<f64>) -> Result<f64> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "weight matrix must be square, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if degrees.len() != n || f.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "rows {} / degrees {} / n {} mismatch",
            f.nrows(),
            degrees.len(),
            n
        )));
    }
    if degrees.iter().any(|&d| d <= 0.0) {
        return Err(Error::InvalidParameter("degrees must be positive".into()));
    }
    let sqrt_d = degrees.mapv(f64::sqrt);
    // I − L = D^{-1/2} W D^{-1/2}
    let mut i_minus_l = w.clone();
    for ((i, j), v) in i_minus_l.indexed_iter_mut() {
        *v /= sqrt_d[i] * sqrt_d[j];
    }
    // Z = (I − L)^{-1} (D^{1/2} F)
    let mut scaled_f = f.clone();
    for (i, mut row) in scaled_f.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v * sqrt_d[i]);
    }
    let z = lu_solve(&i_minus_l, &scaled_f)?;
    // Σ entries of (D^{1/2}F) ∘ (Z − D^{1/2}F)
    let mut total = 0.0;
    for ((i, j), &sf) in scaled_f.indexed_iter() {
        total += sf * (z[[i, j]] - sf);
    }
    Ok(total)
}

/// Solves the graph system `(γ(D − W) + μW) X = μ W B` column by column
/// for a raw target `B` (the right-hand side `μWB` is formed internally).
///
/// Symmetric `W` gets conjugate gradients with a BiCGStab fallback when
/// the operator turns out indefinite; asymmetric `W` goes straight to
/// BiCGStab. Every solve warm-starts at the target column, so the `γ = 0`
/// case (solution `X = B`) exits immediately. Columns are independent and
/// may be solved in parallel; results do not depend on thread count.
#[allow(clippy::too_many_arguments)]
pub fn solve_graph_system(
    w: &CsrMatrix,
    degrees: &Array1<f64>,
    gamma: f64,
    mu: f64,
    target: &Array2<f64>,
    symmetric: bool,
    tol: f64,
    max_iters: usize,
) -> Result<Array2<f64>> {
    let n = w.n();
    if degrees.len() != n || target.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "graph size {} / degrees {} / target rows {} mismatch",
            n,
            degrees.len(),
            target.nrows()
        )));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) || !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need gamma >= 0 and mu > 0, got gamma {gamma}, mu {mu}"
        )));
    }
    let cols: Vec<usize> = (0..target.ncols()).collect();
    let solved: Result<Vec<Array1<f64>>> = cols
        .par_iter()
        .map(|&j| {
            let b = target.column(j).to_owned();
            let mut rhs = Array1::zeros(n);
            w.matvec(&b, &mut rhs);
            rhs.mapv_inplace(|v| v * mu);
            // y = γ D x + (μ − γ) W x, one sparse product per application
            let mut wx = Array1::zeros(n);
            let apply = |x: &Array1<f64>, y: &mut Array1<f64>| {
                w.matvec(x, &mut wx);
                for i in 0..n {
                    y[i] = gamma * degrees[i] * x[i] + (mu - gamma) * wx[i];
                }
            };
            if symmetric {
                let mut wx2 = Array1::zeros(n);
                let apply2 = |x: &Array1<f64>, y: &mut Array1<f64>| {
                    w.matvec(x, &mut wx2);
                    for i in 0..n {
                        y[i] = gamma * degrees[i] * x[i] + (mu - gamma) * wx2[i];
                    }
                };
                match conjugate_gradient(apply2, &rhs, Some(&b), tol, max_iters, "graph system") {
                    Ok(sol) => Ok(sol.x),
                    // kNN truncation can push the operator off positive
                    // definite; BiCGStab does not need definiteness.
                    Err(_) => {
                        bicgstab(apply, &rhs, Some(&b), tol, max_iters, "graph system")
                            .map(|sol| sol.x)
                    }
                }
            } else {
                bicgstab(apply, &rhs, Some(&b), tol, max_iters, "graph system").map(|sol| sol.x)
            }
        })
        .collect();
    let solved = solved?;
    let mut out = Array2::zeros((n, target.ncols()));
    for (j, col) in solved.into_iter().enumerate() {
        out.column_mut(j).assign(&col);
    }
    Ok(out)
}

/// Fills missing samples with Gaussian noise matching the known samples'
/// mean and standard deviation (seeded), leaving known samples untouched.
fn noise_fill(f0: &Signal, mask: &Mask, seed: u64) -> Result<Signal> {
    if mask.shape() != f0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "mask shape {:?} does not match signal shape {:?}",
            mask.shape(),
            f0.shape()
        )));
    }
    let known: Vec<f64> = f0
        .values()
        .iter()
        .zip(mask.flags())
        .filter_map(|(&v, &k)| k.then_some(v))
        .collect();
    if known.is_empty() {
        return Err(Error::InvalidParameter(
            "mask marks no known samples — nothing to inpaint from".into(),
        ));
    }
    let mean = known.iter().sum::<f64>() / known.len() as f64;
    let var = known.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / known.len() as f64;
    let std = var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = f0
        .values()
        .iter()
        .zip(mask.flags())
        .map(|(&v, &k)| {
            if k {
                v
            } else {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + std * z
            }
        })
        .collect();
    Signal::from_flat(values, f0.shape())
}

/// The `r` reweighted directions and their weights for the current patch
/// matrix.
fn reweighted_directions(
    fm: &PatchMatrix,
    kind: LdmmLocalKind,
    r: usize,
    form: GammaForm,
) -> Result<(Array2<f64>, Vec<f64>)> {
    match kind {
        LdmmLocalKind::None => Err(Error::InvalidParameter(
            "reweighted inpainting needs local_kind svd or dct".into(),
        )),
        LdmmLocalKind::Svd => {
            let svd = thin_svd(fm.entries())?;
            let v_r = svd.v.slice(ndarray::s![.., ..r]).to_owned();
            let gammas = gamma_weights(&svd.sigma.as_slice().expect("contiguous")[..r], form);
            Ok((v_r, gammas))
        }
        LdmmLocalKind::Dct => {
            let dct = dct_basis(fm.patch_shape());
            let v_r = dct.vectors().slice(ndarray::s![.., ..r]).to_owned();
            let energies: Vec<f64> = v_r
                .columns()
                .into_iter()
                .map(|col| energy_filtered(fm, col))
                .collect();
            Ok((v_r, gamma_weights(&energies, form)))
        }
    }
}

fn run_inpaint(
    f0: &Signal,
    mask: &Mask,
    p: &LdmmParams,
    truth: Option<&Signal>,
    reweighted: bool,
) -> Result<InpaintOutcome> {
    p.validate()?;
    p.patch.validate(f0.shape())?;
    if let Some(t) = truth {
        if t.shape() != f0.shape() {
            return Err(Error::DimensionMismatch(format!(
                "truth shape {:?} does not match signal shape {:?}",
                t.shape(),
                f0.shape()
            )));
        }
    }
    let n = f0.len();
    let l = p.patch.len();
    let r = p.effective_r();
    let symmetric = matches!(p.bandwidth_mode, BandwidthMode::SelfTuningSymmetric);

    let mut current = noise_fill(f0, mask, p.seed)?;
    let mut fm = build_patch_matrix(&current, &p.patch)?;
    let mut d: Array2<f64> = Array2::zeros((n, l));
    let mut trace = Vec::new();

    for _ in 0..p.iters {
        let graph = build_patch_graph(&fm, p.knn, p.bandwidth_mode, p.nn_rank)?;
        let w = graph.weights();
        let degrees = graph.degrees();
        let e = fm.entries() - &d;

        let f_tilde = if reweighted {
            let (v_r, gammas) = reweighted_directions(&fm, p.local_kind, r, p.gamma_form)?;
            let ev = e.dot(&v_r);
            let mut h = Array2::zeros((n, r));
            for (j, &gamma) in gammas.iter().enumerate() {
                let target = ev.column(j).to_owned().insert_axis(ndarray::Axis(1));
                let sol = solve_graph_system(
                    w,
                    degrees,
                    gamma,
                    p.mu,
                    &target,
                    symmetric,
                    p.solver_tol,
                    p.solver_max_iters,
                )?;
                h.column_mut(j).assign(&sol.column(0));
            }
            let complement = &e - &ev.dot(&v_r.t());
            let u = solve_graph_system(
                w,
                degrees,
                1.0,
                p.mu,
                &complement,
                symmetric,
                p.solver_tol,
                p.solver_max_iters,
            )?;
            h.dot(&v_r.t()) + u + &d
        } else {
            let g = solve_graph_system(
                w,
                degrees,
                1.0,
                p.mu,
                &e,
                symmetric,
                p.solver_tol,
                p.solver_max_iters,
            )?;
            g + &d
        };

        let smoothed = PatchMatrix::from_entries(f_tilde.clone(), f0.shape(), p.patch.shape)?;
        let mut next = average_antidiagonals(&smoothed);
        for (value, (&measured, &known)) in next
            .values_mut()
            .iter_mut()
            .zip(f0.values().iter().zip(mask.flags()))
        {
            if known {
                *value = measured;
            }
        }
        fm = build_patch_matrix(&next, &p.patch)?;
        d = &f_tilde - fm.entries();
        if let Some(t) = truth {
            trace.push(psnr(t, &next, PeakMode::EightBit)?);
        }
        current = next;
    }

    Ok(InpaintOutcome {
        signal: current,
        psnr_trace: trace,
    })
}

/// Plain LDMM inpainting. Known samples (per `mask`) are kept exactly;
/// missing ones start as seeded Gaussian noise and are driven toward the
/// low-dimensional patch manifold over `p.iters` iterations. When `truth`
/// is given, the PSNR after each iteration is recorded.
pub fn ldmm_inpaint(
    f0: &Signal,
    mask: &Mask,
    p: &LdmmParams,
    truth: Option<&Signal>,
) -> Result<InpaintOutcome> {
    run_inpaint(f0, mask, p, truth, false)
}

/// Reweighted LDMM inpainting: per iteration the `r` dominant local
/// directions (`p.local_kind`: SVD or DCT) are smoothed with reduced
/// weights `γ_j`, the complement with full weight. Otherwise identical to
/// [`ldmm_inpaint`].
pub fn rw_ldmm_inpaint(
    f0: &Signal,
    mask: &Mask,
    p: &LdmmParams,
    truth: Option<&Signal>,
) -> Result<InpaintOutcome> {
    if p.local_kind == LdmmLocalKind::None {
        return Err(Error::InvalidParameter(
            "reweighted inpainting needs local_kind svd or dct".into(),
        ));
    }
    run_inpaint(f0, mask, p, truth, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen_mask;
    use crate::signal::SignalShape;
    use crate::synth::{rolling_texture, striped_texture};
    use ndarray::{array, s, Axis};

    /// Dense Gaussian-kernel weight matrix over random points: symmetric,
    /// positive definite, all entries positive — plus its degree vector.
    fn dense_kernel_graph(n: usize, dim: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Array2<f64> = Array2::from_shape_fn((n, dim), |_| rng.random_range(-1.0..1.0));
        let mut w = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let diff = &pts.row(i) - &pts.row(j);
                w[[i, j]] = (-diff.dot(&diff)).exp();
            }
        }
        let degrees = w.sum_axis(Axis(1));
        (w, degrees)
    }

    fn dense_to_csr(w: &Array2<f64>) -> CsrMatrix {
        let rows = w
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| (j as u32, v))
                    .collect()
            })
            .collect();
        CsrMatrix::from_rows(w.nrows(), rows)
    }

    /// R_L = D W^{-1} (D − W), dense.
    fn rl_dense(w: &Array2<f64>, degrees: &Array1<f64>) -> Array2<f64> {
        let n = w.nrows();
        let mut d_minus_w = -w.clone();
        for i in 0..n {
            d_minus_w[[i, i]] += degrees[i];
        }
        let x = lu_solve(w, &d_minus_w).unwrap(); // W^{-1}(D−W)
        let mut out = x;
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            row.mapv_inplace(|v| v * degrees[i]);
        }
        out
    }

    #[test]
    fn gamma_weights_follow_the_formula() {
        assert_eq!(
            gamma_weights(&[4.0, 2.0, 0.0], GammaForm::OneMinusRatio),
            vec![0.0, 0.5, 1.0]
        );
        assert_eq!(
            gamma_weights(&[3.0, 3.0, 3.0], GammaForm::OneMinusRatio),
            vec![0.0, 0.0, 0.0]
        );
        assert_eq!(
            gamma_weights(&[0.0, 0.0], GammaForm::OneMinusRatio),
            vec![0.0, 0.0]
        );
        assert!(gamma_weights(&[], GammaForm::OneMinusRatio).is_empty());
        assert_eq!(
            gamma_weights(&[4.0, 2.0, 1.0], GammaForm::RatioMinusOne),
            vec![0.0, 1.0, 3.0]
        );
        assert_eq!(
            gamma_weights(&[4.0, 0.0], GammaForm::RatioMinusOne),
            vec![0.0, ALT_GAMMA_CAP]
        );
    }

    #[test]
    fn gamma_weights_match_svd_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = Array2::from_shape_fn((40, 8), |_| rng.random_range(-1.0..1.0));
        let svd = thin_svd(&m).unwrap();
        let s = svd.sigma.as_slice().unwrap();
        let gammas = gamma_weights(s, GammaForm::OneMinusRatio);
        for (j, &g) in gammas.iter().enumerate() {
            assert!((g - (1.0 - s[j] / s[0])).abs() < 1e-10);
        }
        assert_eq!(gammas[0], 0.0);
        for pair in gammas.windows(2) {
            assert!(pair[0] <= pair[1] + 1e-12, "weights must be nondecreasing");
        }
    }

    #[test]
    fn quadratic_form_vanishes_when_w_equals_d() {
        // Diagonal W has degree vector equal to its diagonal, so D = W and
        // R_L = D W^{-1}(D − W) = 0.
        let w = Array2::from_diag(&array![2.0, 3.0, 5.0]);
        let degrees = array![2.0, 3.0, 5.0];
        let f = array![[1.0, -2.0], [0.5, 4.0], [3.0, 0.0]];
        let q = rl_quadratic(&f, &w, &degrees).unwrap();
        assert!(q.abs() < 1e-12, "expected 0, got {q}");
    }

    #[test]
    fn two_node_operator_identities_agree() {
        let a = 0.6;
        let w = array![[1.0, a], [a, 1.0]];
        let degrees = array![1.0 + a, 1.0 + a];
        // Form 1: D W^{-1} (D − W)
        let form1 = rl_dense(&w, &degrees);
        // Form 2: D^{1/2}((I − L)^{-1} − I) D^{1/2}
        let sqrt_d = degrees.mapv(f64::sqrt);
        let mut i_minus_l = w.clone();
        for ((i, j), v) in i_minus_l.indexed_iter_mut() {
            *v /= sqrt_d[i] * sqrt_d[j];
        }
        let inv = lu_solve(&i_minus_l, &Array2::eye(2)).unwrap();
        let mut form2 = inv - Array2::<f64>::eye(2);
        for ((i, j), v) in form2.indexed_iter_mut() {
            *v *= sqrt_d[i] * sqrt_d[j];
        }
        let diff = (&form1 - &form2).mapv(f64::abs).sum();
        assert!(diff < 1e-10, "operator forms differ by {diff}");
    }

    #[test]
    fn operator_identity_holds_on_dense_kernel_graphs() {
        for (n, seed) in [(10, 1), (30, 2), (50, 3)] {
            let (w, degrees) = dense_kernel_graph(n, 4, seed);
            let form1 = rl_dense(&w, &degrees);
            let sqrt_d = degrees.mapv(f64::sqrt);
            let mut i_minus_l = w.clone();
            for ((i, j), v) in i_minus_l.indexed_iter_mut() {
                *v /= sqrt_d[i] * sqrt_d[j];
            }
            let inv = lu_solve(&i_minus_l, &Array2::eye(n)).unwrap();
            let mut form2 = inv - Array2::<f64>::eye(n);
            for ((i, j), v) in form2.indexed_iter_mut() {
                *v *= sqrt_d[i] * sqrt_d[j];
            }
            let scale = form1.mapv(f64::abs).sum().max(1.0) / (n * n) as f64;
            let diff = (&form1 - &form2)
                .mapv(f64::abs)
                .iter()
                .cloned()
                .fold(0.0, f64::max);
            assert!(diff < 1e-8 * scale.max(1.0), "n={n}: max diff {diff}");
        }
    }

    #[test]
    fn quadratic_matches_eigenvalue_expansion() {
        // Σ_i λ̃_i Σ_j C̃_ij² with λ̃ = λ/(1−λ) and C̃ = Φᵀ D^{1/2} F,
        // where (λ, Φ) eigendecompose the normalized Laplacian.
        let (w, degrees) = dense_kernel_graph(8, 3, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let f = Array2::from_shape_fn((8, 5), |_| rng.random_range(-2.0..2.0));
        let got = rl_quadratic(&f, &w, &degrees).unwrap();

        let sqrt_d = degrees.mapv(f64::sqrt);
        let mut lap = Array2::eye(8);
        for ((i, j), v) in lap.indexed_iter_mut() {
            *v -= w[[i, j]] / (sqrt_d[i] * sqrt_d[j]);
        }
        let (lambdas, phi) = crate::linalg::symmetric_eigen(&lap).unwrap();
        let mut scaled_f = f.clone();
        for (i, mut row) in scaled_f.rows_mut().into_iter().enumerate() {
            row.mapv_inplace(|v| v * sqrt_d[i]);
        }
        let c = phi.t().dot(&scaled_f);
        let mut expected = 0.0;
        for i in 0..8 {
            let tilde = lambdas[i] / (1.0 - lambdas[i]);
            expected += tilde * c.row(i).dot(&c.row(i));
        }
        assert!(
            (got - expected).abs() < 1e-8 * expected.abs().max(1.0),
            "quadratic {got} vs eigen expansion {expected}"
        );
    }

    #[test]
    fn quadratic_is_invariant_under_orthonormal_right_rotation() {
        let (w, degrees) = dense_kernel_graph(12, 3, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let f = Array2::from_shape_fn((12, 6), |_| rng.random_range(-1.0..1.0));
        let m = Array2::from_shape_fn((6, 6), |_| rng.random_range(-1.0..1.0));
        let v = crate::linalg::orthogonal_factor(&m).unwrap();
        let base = rl_quadratic(&f, &w, &degrees).unwrap();
        let rotated = rl_quadratic(&f.dot(&v), &w, &degrees).unwrap();
        assert!(
            (base - rotated).abs() < 1e-9 * base.abs().max(1.0),
            "{base} vs {rotated}"
        );
    }

    #[test]
    fn rl_quadratic_rejects_bad_inputs() {
        let f = Array2::zeros((3, 2));
        let w = Array2::zeros((3, 4));
        assert!(rl_quadratic(&f, &w, &array![1.0, 1.0, 1.0]).is_err());
        let w = Array2::eye(3);
        assert!(rl_quadratic(&f, &w, &array![1.0, 1.0]).is_err());
        assert!(rl_quadratic(&f, &w, &array![1.0, 0.0, 1.0]).is_err());
        // singular W
        let w_sing = Array2::zeros((2, 2));
        assert!(rl_quadratic(&Array2::zeros((2, 2)), &w_sing, &array![1.0, 1.0]).is_err());
    }

    #[test]
    fn zero_gamma_returns_the_target() {
        let (w, degrees) = dense_kernel_graph(15, 3, 41);
        let csr = dense_to_csr(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let b = Array2::from_shape_fn((15, 3), |_| rng.random_range(-1.0..1.0));
        let x = solve_graph_system(&csr, &degrees, 0.0, 0.5, &b, true, 1e-8, 500).unwrap();
        let diff = (&x - &b).mapv(f64::abs).iter().cloned().fold(0.0, f64::max);
        assert!(diff < 1e-8, "gamma=0 should return the target, diff {diff}");
    }

    #[test]
    fn single_node_system_is_exact() {
        let csr = CsrMatrix::from_rows(1, vec![vec![(0, 1.0)]]);
        let degrees = array![1.0];
        let b = array![[3.5]];
        let x = solve_graph_system(&csr, &degrees, 1.0, 0.5, &b, true, 1e-12, 10).unwrap();
        // (γ(d−w) + μw)x = μ w b with d = w = 1 → x = b
        assert!((x[[0, 0]] - 3.5).abs() < 1e-12);
    }

    #[test]
    fn graph_solutions_match_dense_lu_oracle() {
        let striped = striped_texture(10, 10);
        let cfg = PatchConfig::two_d(2, 2);
        let fm = build_patch_matrix(&striped, &cfg).unwrap();
        for (mode, symmetric) in [
            (BandwidthMode::SelfTuningSymmetric, true),
            (BandwidthMode::SelfTuningAsymmetric, false),
        ] {
            let graph = build_patch_graph(&fm, 10, mode, 5).unwrap();
            let n = graph.n();
            let w = graph.weights();
            let degrees = graph.degrees();
            let mut rng = ChaCha8Rng::seed_from_u64(51);
            let b = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
            for gamma in [0.3, 1.0] {
                let mu = 0.5;
                let x =
                    solve_graph_system(w, degrees, gamma, mu, &b, symmetric, 1e-10, 4000).unwrap();
                // dense A = γ(D − W) + μW and RHS μWB
                let mut dense_w = Array2::zeros((n, n));
                for i in 0..n {
                    let (cols, vals) = w.row(i);
                    for (&c, &v) in cols.iter().zip(vals) {
                        dense_w[[i, c as usize]] = v;
                    }
                }
                let mut a = dense_w.mapv(|v| (mu - gamma) * v);
                for i in 0..n {
                    a[[i, i]] += gamma * degrees[i];
                }
                let oracle = lu_solve(&a, &dense_w.dot(&b).mapv(|v| mu * v)).unwrap();
                let num = (&x - &oracle).mapv(|v| v * v).sum().sqrt();
                let den = oracle.mapv(|v| v * v).sum().sqrt().max(1e-12);
                assert!(
                    num / den < 1e-6,
                    "{mode:?} gamma {gamma}: relative diff {}",
                    num / den
                );
            }
        }
    }

    #[test]
    fn solver_failure_carries_an_error() {
        let (w, degrees) = dense_kernel_graph(20, 3, 61);
        let csr = dense_to_csr(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let b = Array2::from_shape_fn((20, 1), |_| rng.random_range(-1.0..1.0));
        // One iteration cannot reach 1e-14 on a gamma=1 system.
        let res = solve_graph_system(&csr, &degrees, 1.0, 0.5, &b, true, 1e-14, 1);
        assert!(res.is_err());
    }

    #[test]
    fn per_column_solution_minimizes_the_data_fit_objective() {
        // J(x) = xᵀ R_L x + μ (x−e)ᵀ D (x−e) has minimizer
        // (R_L + μD) x = μ D e, which the graph system must reproduce.
        let (w, degrees) = dense_kernel_graph(25, 4, 71);
        let csr = dense_to_csr(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let e = Array2::from_shape_fn((25, 1), |_| rng.random_range(-1.0..1.0));
        let mu = 0.5;
        let x = solve_graph_system(&csr, &degrees, 1.0, mu, &e, true, 1e-10, 4000).unwrap();

        let rl = rl_dense(&w, &degrees);
        let mut a = rl;
        for i in 0..25 {
            a[[i, i]] += mu * degrees[i];
        }
        let rhs = e.mapv(|v| mu * v);
        let rhs = Array2::from_shape_fn((25, 1), |(i, j)| degrees[i] * rhs[[i, j]]);
        let oracle = lu_solve(&a, &rhs).unwrap();
        let num = (&x - &oracle).mapv(|v| v * v).sum().sqrt();
        let den = oracle.mapv(|v| v * v).sum().sqrt();
        assert!(num / den < 1e-6, "relative diff {}", num / den);
    }

    #[test]
    fn reweighted_solution_is_stationary_for_the_weighted_objective() {
        // J(F) = Σ_j γ_j (Fv_j)ᵀ R_L (Fv_j) + μ tr((F−E)ᵀ D (F−E)) over a
        // full orthonormal V, with γ_j = 1 beyond the reweighted block.
        // Central differences on a quadratic are exact, so the directional
        // derivative at the solver's combined solution must vanish.
        let n = 18;
        let l = 4;
        let (w, degrees) = dense_kernel_graph(n, 3, 81);
        let csr = dense_to_csr(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let e = Array2::from_shape_fn((n, l), |_| rng.random_range(-1.0..1.0));
        let m = Array2::from_shape_fn((l, l), |_| rng.random_range(-1.0..1.0));
        let v = crate::linalg::orthogonal_factor(&m).unwrap();
        let r = 2;
        let gammas = [0.25, 0.7];
        let mu = 0.5;

        let v_r = v.slice(s![.., ..r]).to_owned();
        let ev = e.dot(&v_r);
        let mut f_hat = Array2::zeros((n, l));
        let mut h = Array2::zeros((n, r));
        for (j, &gamma) in gammas.iter().enumerate() {
            let target = ev.column(j).to_owned().insert_axis(Axis(1));
            let sol =
                solve_graph_system(&csr, &degrees, gamma, mu, &target, true, 1e-12, 8000).unwrap();
            h.column_mut(j).assign(&sol.column(0));
        }
        let complement = &e - &ev.dot(&v_r.t());
        let u = solve_graph_system(&csr, &degrees, 1.0, mu, &complement, true, 1e-12, 8000).unwrap();
        f_hat += &h.dot(&v_r.t());
        f_hat += &u;

        let rl = rl_dense(&w, &degrees);
        let full_gammas: Vec<f64> = (0..l).map(|j| if j < r { gammas[j] } else { 1.0 }).collect();
        let objective = |f: &Array2<f64>| -> f64 {
            let mut total = 0.0;
            for (j, &gamma) in full_gammas.iter().enumerate() {
                let fv = f.dot(&v.column(j).to_owned());
                total += gamma * fv.dot(&rl.dot(&fv));
            }
            let diff = f - &e;
            for i in 0..n {
                total += mu * degrees[i] * diff.row(i).dot(&diff.row(i));
            }
            total
        };
        let j0 = objective(&f_hat).abs().max(1.0);
        let hstep = 1e-4;
        for probe in 0..5 {
            let mut dir_rng = ChaCha8Rng::seed_from_u64(90 + probe);
            let delta = Array2::from_shape_fn((n, l), |_| dir_rng.random_range(-1.0..1.0));
            let plus = objective(&(&f_hat + &delta.mapv(|v| v * hstep)));
            let minus = objective(&(&f_hat - &delta.mapv(|v| v * hstep)));
            let deriv = (plus - minus) / (2.0 * hstep);
            assert!(
                deriv.abs() < 1e-6 * j0,
                "probe {probe}: directional derivative {deriv} (J = {j0})"
            );
        }
    }

    fn small_params(patch: PatchConfig) -> LdmmParams {
        let mut p = LdmmParams::new(patch);
        p.knn = 8;
        p.nn_rank = 4;
        p.iters = 5;
        p
    }

    #[test]
    fn all_known_mask_returns_the_input_exactly() {
        let img = rolling_texture(12, 12);
        let mask = gen_mask(img.shape(), 1.0, 0).unwrap();
        let mut p = small_params(PatchConfig::two_d(2, 2));
        p.iters = 2;
        let out = ldmm_inpaint(&img, &mask, &p, None).unwrap();
        assert_eq!(out.signal.values(), img.values());
        assert!(out.psnr_trace.is_empty());
    }

    #[test]
    fn constant_image_is_recovered_from_half_the_samples() {
        let img = Signal::from_flat(vec![100.0; 256], SignalShape::TwoD { h: 16, w: 16 }).unwrap();
        let mask = gen_mask(img.shape(), 0.5, 3).unwrap();
        let mut p = small_params(PatchConfig::two_d(2, 2));
        p.iters = 10;
        let out = ldmm_inpaint(&img, &mask, &p, None).unwrap();
        let worst = out
            .signal
            .values()
            .iter()
            .map(|v| (v - 100.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.5, "worst deviation {worst} gray levels");
    }

    #[test]
    fn known_samples_are_preserved_exactly() {
        let img = striped_texture(14, 14);
        let mask = gen_mask(img.shape(), 0.4, 9).unwrap();
        let p = small_params(PatchConfig::two_d(2, 2));
        let plain = ldmm_inpaint(&img, &mask, &p, None).unwrap();
        let mut prw = p.clone();
        prw.local_kind = LdmmLocalKind::Svd;
        let rw = rw_ldmm_inpaint(&img, &mask, &prw, None).unwrap();
        for i in 0..img.len() {
            if mask.is_known(i) {
                assert_eq!(plain.signal.values()[i], img.values()[i]);
                assert_eq!(rw.signal.values()[i], img.values()[i]);
            }
        }
    }

    #[test]
    fn psnr_trace_has_one_entry_per_iteration_and_improves() {
        let img = striped_texture(20, 20);
        let mask = gen_mask(img.shape(), 0.4, 5).unwrap();
        let mut p = small_params(PatchConfig::two_d(2, 2));
        p.iters = 20;
        let out = ldmm_inpaint(&img, &mask, &p, Some(&img)).unwrap();
        assert_eq!(out.psnr_trace.len(), 20);
        assert!(out.psnr_trace.iter().all(|v| v.is_finite()));
        assert!(
            out.psnr_trace[19] > out.psnr_trace[0],
            "PSNR should improve: {:?}",
            out.psnr_trace
        );
    }

    #[test]
    fn reweighted_variants_run_and_record_traces() {
        let img = rolling_texture(16, 16);
        let mask = gen_mask(img.shape(), 0.5, 6).unwrap();
        for kind in [LdmmLocalKind::Svd, LdmmLocalKind::Dct] {
            let mut p = small_params(PatchConfig::two_d(2, 2));
            p.local_kind = kind;
            p.iters = 8;
            let out = rw_ldmm_inpaint(&img, &mask, &p, Some(&img)).unwrap();
            assert_eq!(out.psnr_trace.len(), 8);
            assert!(out.psnr_trace.iter().all(|v| v.is_finite()), "{kind:?}");
        }
    }

    #[test]
    fn full_direction_count_is_accepted() {
        let img = rolling_texture(12, 12);
        let mask = gen_mask(img.shape(), 0.6, 7).unwrap();
        let mut p = small_params(PatchConfig::two_d(2, 2));
        p.local_kind = LdmmLocalKind::Svd;
        p.r = Some(4); // r = ℓ
        p.iters = 3;
        let out = rw_ldmm_inpaint(&img, &mask, &p, None).unwrap();
        assert_eq!(out.signal.shape(), img.shape());
    }

    #[test]
    fn parameter_validation_rejects_bad_values() {
        let img = rolling_texture(12, 12);
        let mask = gen_mask(img.shape(), 0.5, 0).unwrap();
        let base = small_params(PatchConfig::two_d(2, 2));
        let mut p = base.clone();
        p.mu = 0.0;
        assert!(ldmm_inpaint(&img, &mask, &p, None).is_err());
        let mut p = base.clone();
        p.r = Some(5); // > ℓ = 4
        p.local_kind = LdmmLocalKind::Svd;
        assert!(rw_ldmm_inpaint(&img, &mask, &p, None).is_err());
        let mut p = base.clone();
        p.iters = 0;
        assert!(ldmm_inpaint(&img, &mask, &p, None).is_err());
        // reweighted call without a local basis
        assert!(rw_ldmm_inpaint(&img, &mask, &base, None).is_err());
    }

    #[test]
    fn empty_mask_is_rejected() {
        let img = rolling_texture(12, 12);
        let mask = Mask::from_known(vec![false; 144], img.shape()).unwrap();
        let p = small_params(PatchConfig::two_d(2, 2));
        assert!(ldmm_inpaint(&img, &mask, &p, None).is_err());
    }

    #[test]
    fn default_direction_count_is_a_fifth_of_the_patch_length() {
        let p = LdmmParams::new(PatchConfig::two_d(10, 10));
        assert_eq!(p.effective_r(), 20);
        let p = LdmmParams::new(PatchConfig::two_d(4, 4));
        assert_eq!(p.effective_r(), 4); // ⌈3.2⌉
        let mut p = LdmmParams::new(PatchConfig::two_d(4, 4));
        p.r = Some(7);
        assert_eq!(p.effective_r(), 7);
    }

    #[test]
    fn runs_are_bit_identical_for_identical_inputs() {
        let img = striped_texture(16, 16);
        let mask = gen_mask(img.shape(), 0.3, 13).unwrap();
        let mut p = small_params(PatchConfig::two_d(2, 2));
        p.local_kind = LdmmLocalKind::Svd;
        p.iters = 4;
        let a = rw_ldmm_inpaint(&img, &mask, &p, Some(&img)).unwrap();
        let b = rw_ldmm_inpaint(&img, &mask, &p, Some(&img)).unwrap();
        assert_eq!(a.signal.values(), b.signal.values());
        assert_eq!(a.psnr_trace, b.psnr_trace);
    }
}
