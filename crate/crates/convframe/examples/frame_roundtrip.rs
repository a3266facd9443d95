//! Tight-frame mechanics on a 1-D signal: verify the frame constant by
//! brute force, decompose a piecewise-smooth signal, check the energy
//! identity, inspect a single frame atom, and reconstruct exactly.
//!
//! Run with `cargo run --release --example frame_roundtrip`.

use convframe::{
    analyze, framelet_atom, piecewise_smooth_1d, random_orthonormal_basis, synthesize,
    verify_frame_constant, NonlocalBasis, PatchConfig, PatchShape, Result,
};

fn main() -> Result<()> {
    // Brute-force frame verification: accumulate the frame operator from
    // every convolution atom of a random orthonormal pair and measure its
    // deviation from the predicted constant.
    let long = random_orthonormal_basis(PatchShape::OneD { l: 12 }, 1);
    let short = random_orthonormal_basis(PatchShape::OneD { l: 6 }, 2);
    let deviation = verify_frame_constant(long.vectors(), short.vectors())?;
    println!("frame-operator deviation for a random 12/6 pair: {deviation:.3e}");

    // Decompose a piecewise-smooth signal against the identity nonlocal
    // basis and a shifted-impulse-free local DCT.
    let signal = piecewise_smooth_1d(200);
    let cfg = PatchConfig::one_d(10);
    let v = convframe::dct_basis(cfg.shape);
    let phi = NonlocalBasis::identity(signal.len());
    let coeffs = analyze(&signal, &phi, &v, &cfg)?;

    // Energy identity: every sample appears in l patches, so the coefficient
    // energy is exactly l times the signal energy.
    let coeff_energy: f64 = coeffs.entries().iter().map(|&c| c * c).sum();
    let signal_energy: f64 = signal.values().iter().map(|&x| x * x).sum();
    println!(
        "coefficient energy / signal energy = {:.12} (patch length {})",
        coeff_energy / signal_energy,
        cfg.len()
    );

    // A single frame atom, and its consistency with the analysis map:
    // the inner product <f, psi_ij> * sqrt(l) reproduces C_ij.
    let (i, j) = (17, 3);
    let atom = framelet_atom(&phi, &v, i, j, &cfg, signal.shape())?;
    let inner: f64 = signal
        .values()
        .iter()
        .zip(atom.values().iter())
        .map(|(a, b)| a * b)
        .sum();
    let predicted = inner * (cfg.len() as f64).sqrt();
    println!(
        "atom ({i},{j}): <f, atom>*sqrt(l) = {predicted:.6}, C[{i},{j}] = {:.6}",
        coeffs.entries()[[i, j]]
    );

    // Perfect reconstruction.
    let back = synthesize(&coeffs, &phi, &v, &cfg, signal.shape())?;
    let err = signal
        .values()
        .iter()
        .zip(back.values().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("round-trip max error: {err:.3e}");
    Ok(())
}
