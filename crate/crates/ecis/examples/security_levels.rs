//! Adaptive security levels: what the cloud sees at k = n, n/2, n/3.
//!
//! The fewer coefficient positions the key moves, the more structure the
//! keyless reconstruction keeps. This sweeps the security level on one
//! image and reports the cloud-view PSNR per level; the end-user PSNR is
//! unaffected by k.
//!
//! Run: `cargo run --example security_levels`

use ecis::cipher::{AmplitudeMode, EncryptionKey, SelectionStrategy};
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
    let phi = gaussian_matrix(3, m, n)?;
    let dict = effective_dictionary(&phi, n)?;

    println!("96x96 synthetic photo, {block}x{block} blocks (n = {n}), ratio 0.5\n");
    println!(
        "{:>8} {:>6} {:>12} {:>12}",
        "level", "k", "PSNR cloud", "PSNR user"
    );
    for (label, k) in [("n", n), ("n/2", n / 2), ("n/3", n / 3)] {
        let key = EncryptionKey::new(77, k, SelectionStrategy::Uniform, AmplitudeMode::Off)?;
        let mut user_blocks = Vec::new();
        let mut naive_blocks = Vec::new();
        for b in 0..grid.block_count() {
            let y = encode_block(grid.block(b), &phi, &key, b)?;
            let sol = omp(&dict, &y, default_t_max(m), DEFAULT_TOL)?;
            user_blocks.push(user_recover(&sol.coefficients, &key, b)?);
            naive_blocks.push(naive_reconstruct(&sol.coefficients)?);
        }
        let user = merge_blocks(&grid.with_blocks(user_blocks)?)?;
        let naive = merge_blocks(&grid.with_blocks(naive_blocks)?)?;
        println!(
            "{:>8} {:>6} {:>9.2} dB {:>9.2} dB",
            label,
            k,
            psnr(&image, &naive)?,
            psnr(&image, &user)?
        );
    }
    println!("\nMore moved coefficients (larger k) leave the attacker less.");
    Ok(())
}
