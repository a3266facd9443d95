//! Convolution framelets: tight frames built by circularly convolving
//! nonlocal basis vectors (functions on the whole signal, typically low
//! eigenvectors of a patch-graph Laplacian) with local basis vectors
//! (orthonormal bases of patch space such as DCT, Haar, or the patch
//! matrix's right singular vectors).
//!
//! The crate provides:
//!
//! - patch-matrix construction and anti-diagonal reconstruction ([`patch`]);
//! - local and nonlocal basis builders, including the k-NN Gaussian patch
//!   graph and its normalized diffusion Laplacian ([`bases`], [`graph`]);
//! - tight-frame analysis/synthesis and frame diagnostics ([`framelets`]);
//! - the linear-reconstruction framework for embedding-adapted local bases
//!   ([`embedding`]);
//! - LDMM and reweighted-LDMM image inpainting ([`ldmm`]);
//! - N-term linear/nonlinear approximation and PSNR ([`nterm`]);
//! - PGM image I/O, mask generation, and synthetic test signals
//!   ([`pgm`], [`mask`], [`synth`]).
//!
//! Everything is deterministic: randomized constructions take explicit
//! seeds, and parallel sections are structured so results do not depend on
//! thread count.

pub mod bases;
pub mod embedding;
pub mod error;
pub mod framelets;
pub mod graph;
pub mod ldmm;
pub mod linalg;
pub mod mask;
pub mod nterm;
pub mod patch;
pub mod pgm;
pub mod signal;
pub mod solver;
pub mod synth;

pub use bases::{
    dct_basis, haar_basis, laplacian_eigenbasis, random_orthonormal_basis, svd_local_basis,
    svd_nonlocal_basis, LocalBasis, LocalBasisKind, NonlocalBasis, NonlocalSource,
};
pub use embedding::{
    mds_embedding, optimal_local_basis, orthogonal_normalization, reconstruct,
    upper_triangle_energy, EmbeddedData, OrthogonalFactors, ReconstructionBasis,
};
pub use error::{Error, Result};
pub use framelets::{
    analyze, analyze_patch_matrix, energy_concentration, framelet_atom, synthesize,
    verify_frame_constant, CoeffMatrix,
};
pub use graph::{
    build_patch_graph, smallest_eigenpairs, BandwidthMode, CsrMatrix, PatchGraph,
    DENSE_EIGEN_LIMIT,
};
pub use ldmm::{
    gamma_weights, ldmm_inpaint, rl_quadratic, rw_ldmm_inpaint, solve_graph_system, GammaForm,
    InpaintOutcome, LdmmLocalKind, LdmmParams, ALT_GAMMA_CAP,
};
pub use mask::{gen_mask, Mask};
pub use nterm::{energy_filtered, nterm_approx, psnr, ApproxMode, ApproxPlan, PeakMode};
pub use patch::{
    average_antidiagonals, build_patch_matrix, circular_convolve, circular_convolve_2d, flip,
    PatchConfig, PatchMatrix, PatchShape,
};
pub use pgm::{load_pgm, save_pgm};
pub use signal::{Signal, SignalShape};
pub use solver::{bicgstab, conjugate_gradient, Solution};
pub use synth::{edge_blobs, piecewise_smooth_1d, rolling_texture, striped_texture};
