//! Thin command-line surface over the `ecis` library: one subcommand per
//! role plus the analyzer and the timing harness.
//!
//! Exit codes: 0 ok, 2 usage, 3 format error, 4 numeric failure.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ecis::bench::{run_bench, BenchConfig};
use ecis::cipher::DEFAULT_ALPHA_MIN;
use ecis::container::{read_pgm, write_pgm, CoefficientFile, EcisContainer, EcisKeyFile, RoiMask};
use ecis::error::EcisError;
use ecis::recovery::{default_t_max, naive_reconstruct, omp, user_recover, DEFAULT_TOL};
use ecis::security::{default_beta, security_report, SecurityReport};
use ecis::sensing::{effective_dictionary, encode_block};
use ecis::signal::{CoefficientVector, DenseVector};
use ecis::transform::{merge_blocks, split_blocks, BlockGrid};
use ecis::Result;

#[derive(Parser)]
#[command(
    name = "ecis",
    about = "Encrypressive cloud-assisted image service: compress and encrypt \
             image blocks at the sampler, outsource sparse recovery to an \
             untrusted cloud, decrypt cheaply at the end user."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a key file and print its security report.
    Keygen(KeygenArgs),
    /// Compress-and-encrypt a PGM image into an .ecis container.
    Encode(EncodeArgs),
    /// Cloud role: recover coefficient vectors from a container (no key).
    CloudDecode(CloudDecodeArgs),
    /// End-user role: decrypt and reconstruct the image.
    Recover(RecoverArgs),
    /// Evaluate the security calculus at a parameter point.
    Analyze(AnalyzeArgs),
    /// Time the three schemes per block size (CSV output).
    Bench(BenchArgs),
}

#[derive(Args)]
struct KeygenArgs {
    /// Output key file (.ekey).
    #[arg(long)]
    out: PathBuf,
    /// Block size the key will be used with, e.g. 24x24.
    #[arg(long, default_value = "24x24")]
    block: String,
    /// Security level: an integer, or a fraction of n such as n, n/2, n/3.
    #[arg(long, default_value = "n")]
    k: String,
    /// Index selection strategy: uniform or weighted.
    #[arg(long, default_value = "uniform")]
    strategy: String,
    /// Enable per-block amplitude randomization.
    #[arg(long)]
    amplitude: bool,
    /// Amplitude floor in (0, 1).
    #[arg(long, default_value_t = DEFAULT_ALPHA_MIN)]
    alpha_min: f64,
    /// Key seed (the shared secret).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Region of interest: all, none, or X,Y,WxH in block units.
    #[arg(long, default_value = "all")]
    roi: String,
    /// Block grid as COLSxROWS; required for none / rectangular ROIs.
    #[arg(long)]
    grid: Option<String>,
    /// Sparsity estimate for the report (defaults to n/8).
    #[arg(long)]
    t: Option<usize>,
    /// Recovery-probability target, e.g. 1e-5 or e^-10.
    #[arg(long)]
    beta: Option<String>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Input image (binary PGM, maxval 255).
    #[arg(long)]
    image: PathBuf,
    /// Key file from `keygen`.
    #[arg(long)]
    key: PathBuf,
    /// Output container (.ecis).
    #[arg(long)]
    out: PathBuf,
    /// Block size, e.g. 24x24.
    #[arg(long, default_value = "24x24")]
    block: String,
    /// Measurement ratio m/n in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// Seed of the (public) measurement matrix.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads across blocks.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct CloudDecodeArgs {
    /// Input container (.ecis).
    #[arg(long)]
    container: PathBuf,
    /// Output coefficient file (.ecof).
    #[arg(long)]
    out: PathBuf,
    /// Also write the keyless reconstruction (what an attacker sees).
    #[arg(long)]
    emit_naive_view: Option<PathBuf>,
    /// Pursuit sparsity budget (defaults to m/4).
    #[arg(long)]
    t_max: Option<usize>,
    /// Residual tolerance relative to the measurement norm.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Worker threads across blocks.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// The cloud never takes key material; passing one is refused.
    #[arg(long, hide = true)]
    key: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Coefficient file from `cloud-decode`.
    #[arg(long)]
    coeffs: PathBuf,
    /// Key file matching the one used at encode time.
    #[arg(long)]
    key: PathBuf,
    /// Output image (PGM).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Sparsity of the signal under analysis.
    #[arg(long)]
    t: usize,
    /// Recovery-probability target, e.g. 1e-5 or e^-10.
    #[arg(long)]
    beta: Option<String>,
    /// Nonzero distribution as comma-separated probabilities.
    #[arg(long)]
    p: Option<String>,
    /// Also write the report as one CSV row.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Input image (binary PGM).
    #[arg(long)]
    image: PathBuf,
    /// Comma-separated block sizes, e.g. 24x24,32x32,48x48.
    #[arg(long, default_value = "24x24,32x32,48x48")]
    blocks: String,
    /// Trials per block size (one extra warmup run is discarded).
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Measurement ratio m/n.
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(args) => cmd_keygen(args),
        Command::Encode(args) => cmd_encode(args),
        Command::CloudDecode(args) => cmd_cloud_decode(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bench(args) => cmd_bench(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(match e {
            EcisError::BadMagic { .. }
            | EcisError::UnknownVersion(_)
            | EcisError::CrcMismatch { .. }
            | EcisError::Truncated(_)
            | EcisError::UnsupportedFormat(_)
            | EcisError::Io(_) => 3,
            EcisError::Numeric(_) => 4,
            _ => 2,
        });
    }
}

// ---------------------------------------------------------------------
// argument parsing helpers

fn parse_block(spec: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split('x').collect();
    let err = || EcisError::InvalidInput(format!("bad block size '{spec}', expected WxH"));
    match parts.as_slice() {
        [s] => {
            let v: usize = s.trim().parse().map_err(|_| err())?;
            Ok((v, v))
        }
        [w, h] => Ok((
            w.trim().parse().map_err(|_| err())?,
            h.trim().parse().map_err(|_| err())?,
        )),
        _ => Err(err()),
    }
}

/// Security levels accept plain integers and the paper-style fractions
/// of n ("n", "n/2", "n/3").
fn parse_k(spec: &str, n: usize) -> Result<usize> {
    let spec = spec.trim();
    let k = if let Ok(v) = spec.parse::<usize>() {
        v
    } else if spec == "n" {
        n
    } else if let Some(d) = spec.strip_prefix("n/") {
        let d: f64 = d
            .parse()
            .map_err(|_| EcisError::InvalidInput(format!("bad k fraction '{spec}'")))?;
        if d <= 0.0 {
            return Err(EcisError::InvalidInput(format!("bad k fraction '{spec}'")));
        }
        (n as f64 / d).round() as usize
    } else {
        return Err(EcisError::InvalidInput(format!(
            "bad k '{spec}': expected an integer, n, or n/<d>"
        )));
    };
    if k == 1 {
        return Err(EcisError::InvalidInput(
            "k = 1 is not a valid security level (no derangement exists); use k = 2".into(),
        ));
    }
    if k > n {
        return Err(EcisError::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    Ok(k)
}

/// Beta accepts plain floats and the e^x notation used in the analysis.
fn parse_beta(spec: Option<&str>) -> Result<f64> {
    let Some(spec) = spec else {
        return Ok(default_beta());
    };
    let spec = spec.trim();
    if let Ok(v) = spec.parse::<f64>() {
        return Ok(v);
    }
    if let Some(exp) = spec.strip_prefix("e^") {
        let x: f64 = exp
            .parse()
            .map_err(|_| EcisError::InvalidInput(format!("bad beta '{spec}'")))?;
        return Ok(x.exp());
    }
    Err(EcisError::InvalidInput(format!(
        "bad beta '{spec}': expected a float or e^<x>"
    )))
}

fn parse_roi(spec: &str, grid: Option<&str>) -> Result<RoiMask> {
    let grid_dims = match grid {
        Some(g) => {
            let (c, r) = parse_block(g)?;
            Some((c, r))
        }
        None => None,
    };
    match spec.trim() {
        "all" => Ok(RoiMask::all_blocks()),
        "none" => {
            let (c, r) = grid_dims.ok_or_else(|| {
                EcisError::InvalidInput("--roi none requires --grid COLSxROWS".into())
            })?;
            Ok(RoiMask::none((c * r) as u32))
        }
        rect => {
            let (c, r) = grid_dims.ok_or_else(|| {
                EcisError::InvalidInput("rectangular --roi requires --grid COLSxROWS".into())
            })?;
            let parts: Vec<&str> = rect.split(',').collect();
            let err = || EcisError::InvalidInput(format!("bad ROI '{rect}', expected X,Y,WxH"));
            let [x, y, wh] = parts.as_slice() else {
                return Err(err());
            };
            let x: usize = x.trim().parse().map_err(|_| err())?;
            let y: usize = y.trim().parse().map_err(|_| err())?;
            let (w, h) = parse_block(wh)?;
            if x + w > c || y + h > r {
                return Err(EcisError::InvalidInput(format!(
                    "ROI {x},{y},{w}x{h} outside the {c}x{r} grid"
                )));
            }
            let mut indices = Vec::new();
            for by in y..y + h {
                for bx in x..x + w {
                    indices.push(by * c + bx);
                }
            }
            RoiMask::from_indices((c * r) as u32, &indices)
        }
    }
}

// ---------------------------------------------------------------------
// subcommands

fn cmd_keygen(args: KeygenArgs) -> Result<()> {
    let (bw, bh) = parse_block(&args.block)?;
    let n = bw * bh;
    let k = parse_k(&args.k, n)?;
    let weighted = match args.strategy.as_str() {
        "uniform" => false,
        "weighted" => true,
        other => {
            return Err(EcisError::InvalidInput(format!(
                "unknown strategy '{other}', expected uniform or weighted"
            )))
        }
    };
    let roi = parse_roi(&args.roi, args.grid.as_deref())?;
    let key = EcisKeyFile::new(
        args.seed,
        k as u32,
        weighted,
        args.amplitude,
        args.alpha_min,
        roi,
    )?;
    // Constructing the in-memory key validates the full combination.
    key.to_key(n, bw)?;
    key.write_file(&args.out)?;

    let t = args.t.unwrap_or((n / 8).max(1));
    let beta = parse_beta(args.beta.as_deref())?;
    let report = security_report(n, k, t, beta, None)?;
    println!(
        "wrote {} (seed {}, k = {k}, n = {n})",
        args.out.display(),
        args.seed
    );
    println!("{report}");
    Ok(())
}

/// Run `f` over 0..count on `workers` threads, preserving index order.
fn parallel_blocks<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = workers.max(1).min(count.max(1));
    if workers <= 1 {
        return (0..count).map(&f).collect();
    }
    let chunk = count.div_ceil(workers);
    let mut out: Vec<Option<T>> = Vec::new();
    out.resize_with(count, || None);
    let mut slots: Vec<&mut [Option<T>]> = out.chunks_mut(chunk).collect();
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (w, slot) in slots.drain(..).enumerate() {
            let f = &f;
            handles.push(scope.spawn(move || -> Result<()> {
                for (off, cell) in slot.iter_mut().enumerate() {
                    *cell = Some(f(w * chunk + off)?);
                }
                Ok(())
            }));
        }
        for h in handles {
            h.join().expect("worker panicked")?;
        }
        Ok(())
    })?;
    Ok(out
        .into_iter()
        .map(|v| v.expect("all slots filled"))
        .collect())
}

fn cmd_encode(args: EncodeArgs) -> Result<()> {
    let (bw, bh) = parse_block(&args.block)?;
    if !(args.ratio > 0.0 && args.ratio < 1.0) {
        return Err(EcisError::InvalidInput(format!(
            "ratio must lie in (0, 1), got {}",
            args.ratio
        )));
    }
    let image = read_pgm(&args.image)?;
    let key_file = EcisKeyFile::read_file(&args.key)?;
    let grid = split_blocks(&image, bw, bh)?;
    let n = grid.n();
    let m = ((args.ratio * n as f64).round() as usize).clamp(1, n - 1);

    if key_file.roi.is_explicit() && key_file.roi.block_count() as usize != grid.block_count() {
        return Err(EcisError::InvalidInput(format!(
            "key ROI mask covers {} blocks but the image splits into {}",
            key_file.roi.block_count(),
            grid.block_count()
        )));
    }
    key_file.to_key(n, bw)?; // validate k against this block size up front

    let phi = ecis::gaussian_matrix(args.seed, m, n)?;
    let start = Instant::now();
    let measurements = parallel_blocks(args.workers, grid.block_count(), |b| {
        let block_key = key_file.key_for_block(b, n, bw)?;
        encode_block(grid.block(b), &phi, &block_key, b)
    })?;
    let t_sd = start.elapsed().as_secs_f64();

    let container = EcisContainer::new(
        image.width() as u32,
        image.height() as u32,
        bw as u16,
        bh as u16,
        m as u32,
        args.seed,
        key_file.amplitude,
        measurements,
    )?;
    container.write_file(&args.out)?;
    println!(
        "wrote {}: {} blocks x {} measurements (n = {n}), t_sd_seconds={t_sd:.6}",
        args.out.display(),
        container.block_count(),
        m
    );
    Ok(())
}

fn cmd_cloud_decode(args: CloudDecodeArgs) -> Result<()> {
    if args.key.is_some() {
        return Err(EcisError::InvalidInput(
            "cloud-decode takes no key: the cloud operates on public data only".into(),
        ));
    }
    let container = EcisContainer::read_file(&args.container)?;
    let n = container.n();
    let m = container.m as usize;
    let phi = ecis::gaussian_matrix(container.phi_seed, m, n)?;
    let dict = effective_dictionary(&phi, n)?;
    let t_max = args.t_max.unwrap_or_else(|| default_t_max(m));

    let start = Instant::now();
    let solutions = parallel_blocks(args.workers, container.block_count(), |b| {
        omp(&dict, &container.measurements()[b], t_max, args.tol)
    })?;
    let t_cloud = start.elapsed().as_secs_f64();

    let coefficients: Vec<CoefficientVector> =
        solutions.iter().map(|s| s.coefficients.clone()).collect();
    let rank_flags = solutions.iter().filter(|s| s.rank_deficient).count();

    let coeff_file = CoefficientFile::new(
        container.orig_w,
        container.orig_h,
        container.block_w,
        container.block_h,
        coefficients,
    )?;
    coeff_file.write_file(&args.out)?;

    if let Some(view_path) = &args.emit_naive_view {
        let blocks: Vec<DenseVector> = coeff_file
            .coefficients()
            .iter()
            .map(naive_reconstruct)
            .collect::<Result<_>>()?;
        let grid = BlockGrid::new(
            container.block_w as usize,
            container.block_h as usize,
            (container.orig_w as usize).div_ceil(container.block_w as usize),
            (container.orig_h as usize).div_ceil(container.block_h as usize),
            container.orig_w as usize,
            container.orig_h as usize,
            blocks,
        )?;
        write_pgm(&merge_blocks(&grid)?, view_path)?;
        println!("wrote naive view {}", view_path.display());
    }

    println!(
        "wrote {}: {} blocks, t_max = {t_max}, t_cloud_seconds={t_cloud:.6}{}",
        args.out.display(),
        coeff_file.block_count(),
        if rank_flags > 0 {
            format!(", rank-deficient stops: {rank_flags}")
        } else {
            String::new()
        }
    );
    Ok(())
}

fn cmd_recover(args: RecoverArgs) -> Result<()> {
    let coeff_file = CoefficientFile::read_file(&args.coeffs)?;
    let key_file = EcisKeyFile::read_file(&args.key)?;
    let n = coeff_file.n();
    let bw = coeff_file.block_w as usize;

    if key_file.roi.is_explicit() && key_file.roi.block_count() as usize != coeff_file.block_count()
    {
        return Err(EcisError::InvalidInput(format!(
            "key ROI mask covers {} blocks but the coefficient file holds {}",
            key_file.roi.block_count(),
            coeff_file.block_count()
        )));
    }

    let start = Instant::now();
    let blocks: Vec<DenseVector> = coeff_file
        .coefficients()
        .iter()
        .enumerate()
        .map(|(b, s)| user_recover(s, &key_file.key_for_block(b, n, bw)?, b))
        .collect::<Result<_>>()?;
    let t_eu = start.elapsed().as_secs_f64();

    let grid = BlockGrid::new(
        bw,
        coeff_file.block_h as usize,
        (coeff_file.orig_w as usize).div_ceil(bw),
        (coeff_file.orig_h as usize).div_ceil(coeff_file.block_h as usize),
        coeff_file.orig_w as usize,
        coeff_file.orig_h as usize,
        blocks,
    )?;
    write_pgm(&merge_blocks(&grid)?, &args.out)?;
    println!(
        "wrote {}: {} blocks, t_eu_seconds={t_eu:.6}",
        args.out.display(),
        coeff_file.block_count()
    );
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let beta = parse_beta(args.beta.as_deref())?;
    let p: Option<Vec<f64>> = match &args.p {
        Some(list) => Some(
            list.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| EcisError::InvalidInput(format!("bad probability '{s}'")))
                })
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let report = security_report(args.n, args.k, args.t, beta, p.as_deref())?;
    println!("{report}");
    if let Some(path) = args.csv {
        std::fs::write(&path, report_csv(&report))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn report_csv(r: &SecurityReport) -> String {
    let mut out = String::from(
        "n,k,t,beta,arrangement_count_paper,exact_perm_count,effective_l,\
         p_suc_bound,p_suc_dense,p_suc_nonuniform,min_k_uniform,min_k_blind,\
         brute_force_agrees\n",
    );
    out.push_str(&format!(
        "{},{},{},{:.9e},{},{},{:.9},{:.9e},{:.9e},{},{},{},{}\n",
        r.n,
        r.k,
        r.t,
        r.beta,
        r.arrangement_count_paper,
        r.exact_perm_count,
        r.effective_l,
        r.p_suc_bound,
        r.p_suc_dense,
        r.p_suc_nonuniform
            .map(|v| format!("{v:.9e}"))
            .unwrap_or_default(),
        r.min_k.k,
        r.min_k_blind.k,
        r.brute_force_agrees
            .map(|b| b.to_string())
            .unwrap_or_default(),
    ));
    out
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let image = read_pgm(&args.image)?;
    let block_sizes = args
        .blocks
        .split(',')
        .map(parse_block)
        .collect::<Result<Vec<_>>>()?;
    let cfg = BenchConfig {
        block_sizes,
        trials: args.trials,
        ratio: args.ratio,
        seed: args.seed,
        tol: DEFAULT_TOL,
    };
    let name = args
        .image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    let report = run_bench(&image, &name, &cfg)?;
    let csv = report.to_csv();
    match args.csv {
        Some(path) => {
            std::fs::write(&path, csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
