//! Amplitude randomization on top of the permutation.
//!
//! With amplitude mode on, every block's encrypted coefficients are also
//! multiplied by a secret per-block factor drawn from [alpha_min, 1).
//! The permutation alone preserves each block's total energy, so block
//! brightness contours can survive in the cloud view; the random
//! amplitude perturbs those too. Decryption divides the factor back out,
//! so the key holder loses nothing.
//!
//! Run: `cargo run --example amplitude_encryption`

use ecis::cipher::{derive_permutation, AmplitudeMode, EncryptionKey, SelectionStrategy};
use ecis::psnr;
use ecis::recovery::{default_t_max, naive_reconstruct, omp, user_recover, DEFAULT_TOL};
use ecis::sensing::{effective_dictionary, encode_block};
use ecis::signal::gaussian_matrix;
use ecis::synthetic::natural_image;
use ecis::transform::{merge_blocks, split_blocks};

fn main() -> ecis::Result<()> {
    let image = natural_image(96, 96, 42);
    let block = 24;
    let grid = split_blocks(&image, block, block)?;
    let n = grid.n();
    let m = n / 2;
    let phi = gaussian_matrix(9, m, n)?;
    let dict = effective_dictionary(&phi, n)?;

    println!("96x96 image, {block}x{block} blocks, k = n/2, ratio 0.5\n");
    for (label, amplitude) in [
        ("permutation only", AmplitudeMode::Off),
        (
            "permutation + amplitude",
            AmplitudeMode::On { alpha_min: 0.2 },
        ),
    ] {
        let key = EncryptionKey::new(33, n / 2, SelectionStrategy::Uniform, amplitude)?;
        let mut naive_blocks = Vec::new();
        let mut user_blocks = Vec::new();
        for b in 0..grid.block_count() {
            let y = encode_block(grid.block(b), &phi, &key, b)?;
            let sol = omp(&dict, &y, default_t_max(m), DEFAULT_TOL)?;
            naive_blocks.push(naive_reconstruct(&sol.coefficients)?);
            user_blocks.push(user_recover(&sol.coefficients, &key, b)?);
        }
        let naive = merge_blocks(&grid.with_blocks(naive_blocks)?)?;
        let user = merge_blocks(&grid.with_blocks(user_blocks)?)?;
        println!(
            "{label:>24}: cloud view {:>6.2} dB, key holder {:>6.2} dB",
            psnr(&image, &naive)?,
            psnr(&image, &user)?,
        );
    }

    // The per-block factors themselves, for one key.
    let key = EncryptionKey::new(
        33,
        n / 2,
        SelectionStrategy::Uniform,
        AmplitudeMode::On { alpha_min: 0.2 },
    )?;
    let alphas: Vec<String> = (0..4)
        .map(|b| format!("{:.3}", derive_permutation(&key, b, n).unwrap().alpha()))
        .collect();
    println!("\nfirst block amplitude factors: {}", alphas.join(", "));
    Ok(())
}
