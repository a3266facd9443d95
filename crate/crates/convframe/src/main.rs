//! Command-line front end: framelet decomposition, N-term approximation,
//! LDMM/reweighted-LDMM inpainting, and patch-graph spectra over PGM
//! images, with CSV outputs for coefficients, curves, and traces.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use convframe::{
    analyze, build_patch_graph, build_patch_matrix, dct_basis, gen_mask, haar_basis,
    laplacian_eigenbasis, ldmm_inpaint, load_pgm, nterm_approx, psnr, random_orthonormal_basis,
    rw_ldmm_inpaint, save_pgm, svd_local_basis, svd_nonlocal_basis, ApproxMode, ApproxPlan,
    BandwidthMode, Error, LdmmLocalKind, LdmmParams, LocalBasis, Mask, NonlocalBasis, PatchConfig,
    PatchShape, PeakMode, Result, Signal,
};

#[derive(Parser)]
#[command(
    name = "convframe",
    version,
    about = "Convolution-framelet decomposition, N-term approximation, and LDMM inpainting for PGM images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the framelet coefficient matrix of an image as CSV.
    Decompose(DecomposeArgs),
    /// Reconstruct an image from its largest framelet terms.
    Approx(ApproxArgs),
    /// Fill in missing pixels with LDMM or reweighted LDMM.
    Inpaint(InpaintArgs),
    /// Write the low end of the patch-graph Laplacian spectrum as CSV.
    Graph(GraphArgs),
}

/// `s1xs2` (e.g. `4x4`) or a single number for square patches.
fn parse_patch(s: &str) -> std::result::Result<PatchShape, String> {
    let parse_dim = |d: &str| {
        d.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| format!("invalid patch dimension '{d}'"))
    };
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok(PatchShape::TwoD {
            s1: parse_dim(a)?,
            s2: parse_dim(b)?,
        }),
        None => {
            let side = parse_dim(s)?;
            Ok(PatchShape::TwoD { s1: side, s2: side })
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalKind {
    Svd,
    Dct,
    Haar,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum NonlocalKind {
    /// Laplacian eigenvectors of the patch graph.
    Le,
    /// Left singular vectors of the patch matrix.
    Svd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Linear,
    Nonlinear,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ldmm,
    RwldmmSvd,
    RwldmmDct,
}

/// Flags shared by every basis-building subcommand.
#[derive(Args)]
struct BasisArgs {
    /// Patch size as s1xs2 (or one number for square patches).
    #[arg(long, value_parser = parse_patch)]
    patch: PatchShape,
    /// Local (patch-space) basis.
    #[arg(long, value_enum, default_value = "dct")]
    local: LocalKind,
    /// Nonlocal (signal-space) basis.
    #[arg(long, value_enum, default_value = "le")]
    nonlocal: NonlocalKind,
    /// Number of nonlocal basis vectors.
    #[arg(long, default_value_t = 16)]
    p: usize,
    /// Neighbors per node in the patch graph.
    #[arg(long, default_value_t = 50)]
    knn: usize,
    /// 1 = symmetrized Gaussian kernel, 0 = per-node bandwidths (asymmetric).
    #[arg(long = "sym-laplacian", default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    sym_laplacian: u8,
    /// Seed for the random local basis.
    #[arg(long, default_value_t = 0)]
    basis_seed: u64,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input image (PGM, maxval <= 255).
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    basis: BasisArgs,
    /// Output CSV of coefficients (columns i,j,value).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ApproxArgs {
    /// Input image (PGM, maxval <= 255).
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    basis: BasisArgs,
    /// Number of framelet terms to keep.
    #[arg(long)]
    terms: usize,
    /// Term selection: fixed spectral ordering or greedy by magnitude.
    #[arg(long, value_enum)]
    mode: Mode,
    /// Output image (PGM).
    #[arg(long)]
    out: PathBuf,
    /// Optional PSNR curve CSV (columns n,psnr_linear,psnr_nonlinear).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct InpaintArgs {
    /// Input image (PGM); unknown pixels may hold any value.
    #[arg(long)]
    image: PathBuf,
    /// Mask image (PGM, 255 = known, 0 = missing).
    #[arg(long, conflicts_with_all = ["rate", "seed"])]
    mask: Option<PathBuf>,
    /// Fraction of pixels to keep in a generated mask (0, 1].
    #[arg(long, requires = "seed")]
    rate: Option<f64>,
    /// Seed for the generated mask and the noise fill.
    #[arg(long, requires = "rate")]
    seed: Option<u64>,
    /// Inpainting algorithm.
    #[arg(long, value_enum)]
    method: Method,
    /// Outer iterations.
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Data-fit penalty.
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    /// Patch size as s1xs2 (or one number for square patches).
    #[arg(long, value_parser = parse_patch, default_value = "10x10")]
    patch: PatchShape,
    /// Neighbors per node in the patch graph.
    #[arg(long, default_value_t = 50)]
    knn: usize,
    /// 1 = symmetrized Gaussian kernel, 0 = per-node bandwidths (asymmetric).
    #[arg(long = "sym-laplacian", default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    sym_laplacian: u8,
    /// Reweighted fraction of patch directions (reweighted methods only).
    #[arg(long = "r-frac", default_value_t = 0.2)]
    r_frac: f64,
    /// Output image (PGM).
    #[arg(long)]
    out: PathBuf,
    /// Optional per-iteration trace CSV (iter[,psnr]).
    #[arg(long = "psnr-log")]
    psnr_log: Option<PathBuf>,
    /// Ground-truth image for PSNR logging.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    /// Input image (PGM, maxval <= 255).
    #[arg(long)]
    image: PathBuf,
    /// Patch size as s1xs2 (or one number for square patches).
    #[arg(long, value_parser = parse_patch)]
    patch: PatchShape,
    /// Neighbors per node in the patch graph.
    #[arg(long, default_value_t = 50)]
    knn: usize,
    /// 1 = symmetrized Gaussian kernel, 0 = per-node bandwidths (asymmetric).
    #[arg(long = "sym-laplacian", default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    sym_laplacian: u8,
    /// Number of smallest eigenvalues to compute.
    #[arg(long)]
    eigs: usize,
    /// Output CSV (columns index,lambda).
    #[arg(long)]
    out: PathBuf,
}

fn bandwidth_mode(sym: u8) -> BandwidthMode {
    if sym == 1 {
        BandwidthMode::SelfTuningSymmetric
    } else {
        BandwidthMode::SelfTuningAsymmetric
    }
}

/// Bandwidth neighbor rank used whenever only `--knn` is exposed.
fn nn_rank_for(knn: usize) -> usize {
    (knn / 2).max(1)
}

fn write_csv<R: Display>(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = R>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

/// Builds the requested local/nonlocal basis pair from an image's patches.
fn build_bases(f: &Signal, args: &BasisArgs) -> Result<(NonlocalBasis, LocalBasis, PatchConfig)> {
    let cfg = PatchConfig { shape: args.patch };
    let fm = build_patch_matrix(f, &cfg)?;
    let local = match args.local {
        LocalKind::Dct => dct_basis(args.patch),
        LocalKind::Haar => haar_basis(args.patch)?,
        LocalKind::Random => random_orthonormal_basis(args.patch, args.basis_seed),
        LocalKind::Svd => svd_local_basis(&fm, cfg.len())?,
    };
    let nonlocal = match args.nonlocal {
        NonlocalKind::Le => {
            let graph = build_patch_graph(
                &fm,
                args.knn,
                bandwidth_mode(args.sym_laplacian),
                nn_rank_for(args.knn),
            )?;
            laplacian_eigenbasis(&graph, args.p)?
        }
        NonlocalKind::Svd => svd_nonlocal_basis(&fm, args.p)?,
    };
    Ok((nonlocal, local, cfg))
}

fn run_decompose(args: &DecomposeArgs) -> Result<()> {
    let image = load_pgm(&args.image)?;
    let (phi, v, cfg) = build_bases(&image, &args.basis)?;
    let coeffs = analyze(&image, &phi, &v, &cfg)?;
    let entries = coeffs.entries();
    write_csv(
        &args.out,
        "i,j,value",
        entries
            .indexed_iter()
            .map(|((i, j), value)| format!("{i},{j},{value}")),
    )?;
    println!(
        "wrote {}x{} coefficients ({} x {}) to {}",
        entries.nrows(),
        entries.ncols(),
        coeffs.phi_meta(),
        coeffs.v_meta(),
        args.out.display()
    );
    Ok(())
}

fn run_approx(args: &ApproxArgs) -> Result<()> {
    let image = load_pgm(&args.image)?;
    let mean = image.values().mean().unwrap_or(0.0);
    let centered = Signal::from_flat(
        image.values().mapv(|v| v - mean).to_vec(),
        image.shape(),
    )?;
    let (phi, v, cfg) = build_bases(&centered, &args.basis)?;

    let approximate = |mode: ApproxMode, terms: usize| -> Result<Signal> {
        let plan = ApproxPlan { mode, terms };
        let out = nterm_approx(&centered, &phi, &v, &plan, &cfg)?;
        Signal::from_flat(out.values().mapv(|x| x + mean).to_vec(), out.shape())
    };

    let mode = match args.mode {
        Mode::Linear => ApproxMode::Linear,
        Mode::Nonlinear => ApproxMode::Nonlinear,
    };
    let reconstruction = approximate(mode, args.terms)?;
    let quality = psnr(&image, &reconstruction, PeakMode::EightBit)?;
    save_pgm(&args.out, &reconstruction)?;
    let mode_name = match args.mode {
        Mode::Linear => "linear",
        Mode::Nonlinear => "nonlinear",
    };
    println!(
        "{}-term {mode_name} approximation: PSNR {quality:.4} dB, saved to {}",
        args.terms,
        args.out.display()
    );

    if let Some(csv) = &args.csv {
        let mut rows = Vec::with_capacity(args.terms);
        for n in 1..=args.terms {
            let lin = psnr(&image, &approximate(ApproxMode::Linear, n)?, PeakMode::EightBit)?;
            let non = psnr(
                &image,
                &approximate(ApproxMode::Nonlinear, n)?,
                PeakMode::EightBit,
            )?;
            rows.push(format!("{n},{lin},{non}"));
        }
        write_csv(csv, "n,psnr_linear,psnr_nonlinear", rows.into_iter())?;
        println!("wrote PSNR curve (1..={}) to {}", args.terms, csv.display());
    }
    Ok(())
}

fn run_inpaint(args: &InpaintArgs) -> Result<()> {
    let image = load_pgm(&args.image)?;
    let mask = match (&args.mask, args.rate) {
        (Some(path), None) => {
            let mask_img = load_pgm(path)?;
            if mask_img.shape() != image.shape() {
                return Err(Error::DimensionMismatch(format!(
                    "mask shape {:?} does not match image shape {:?}",
                    mask_img.shape(),
                    image.shape()
                )));
            }
            Mask::from_signal(&mask_img)
        }
        (None, Some(rate)) => gen_mask(image.shape(), rate, args.seed.unwrap_or(0))?,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "either --mask or --rate with --seed is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --mask with --rate"),
    };
    let truth = args.truth.as_ref().map(load_pgm).transpose()?;

    let mut params = LdmmParams::new(PatchConfig { shape: args.patch });
    params.iters = args.iters;
    params.mu = args.mu;
    params.knn = args.knn;
    params.nn_rank = nn_rank_for(args.knn);
    params.bandwidth_mode = bandwidth_mode(args.sym_laplacian);
    params.seed = args.seed.unwrap_or(0);
    let l = params.patch.len();
    if !(args.r_frac > 0.0 && args.r_frac <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "--r-frac must lie in (0, 1], got {}",
            args.r_frac
        )));
    }
    params.r = Some(((args.r_frac * l as f64).ceil() as usize).clamp(1, l));

    let outcome = match args.method {
        Method::Ldmm => ldmm_inpaint(&image, &mask, &params, truth.as_ref())?,
        Method::RwldmmSvd => {
            params.local_kind = LdmmLocalKind::Svd;
            rw_ldmm_inpaint(&image, &mask, &params, truth.as_ref())?
        }
        Method::RwldmmDct => {
            params.local_kind = LdmmLocalKind::Dct;
            rw_ldmm_inpaint(&image, &mask, &params, truth.as_ref())?
        }
    };

    save_pgm(&args.out, &outcome.signal)?;
    println!(
        "filled {} missing pixels of {} ({} known) over {} iterations, saved to {}",
        mask.len() - mask.known_count(),
        mask.len(),
        mask.known_count(),
        args.iters,
        args.out.display()
    );
    if let Some(final_psnr) = outcome.psnr_trace.last() {
        println!("final PSNR vs truth: {final_psnr:.4} dB");
    }

    if let Some(log) = &args.psnr_log {
        if outcome.psnr_trace.is_empty() {
            write_csv(log, "iter", (1..=args.iters).map(|i| i.to_string()))?;
        } else {
            write_csv(
                log,
                "iter,psnr",
                outcome
                    .psnr_trace
                    .iter()
                    .enumerate()
                    .map(|(i, p)| format!("{},{p}", i + 1)),
            )?;
        }
        println!("wrote per-iteration trace to {}", log.display());
    }
    Ok(())
}

fn run_graph(args: &GraphArgs) -> Result<()> {
    let image = load_pgm(&args.image)?;
    let cfg = PatchConfig { shape: args.patch };
    let fm = build_patch_matrix(&image, &cfg)?;
    let graph = build_patch_graph(
        &fm,
        args.knn,
        bandwidth_mode(args.sym_laplacian),
        nn_rank_for(args.knn),
    )?;
    let basis = laplacian_eigenbasis(&graph, args.eigs)?;
    let lambdas = basis
        .eigenvalues()
        .expect("Laplacian basis always carries eigenvalues");
    write_csv(
        &args.out,
        "index,lambda",
        lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{i},{l}")),
    )?;
    println!(
        "wrote {} smallest Laplacian eigenvalues to {}",
        lambdas.len(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Render clap's message (help/version go to stdout, real errors
            // to stderr) but always map failure to exit code 1.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::FAILURE;
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match &cli.command {
        Command::Decompose(args) => run_decompose(args),
        Command::Approx(args) => run_approx(args),
        Command::Inpaint(args) => run_inpaint(args),
        Command::Graph(args) => run_graph(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
