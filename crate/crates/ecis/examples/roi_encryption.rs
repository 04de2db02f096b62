//! Region-of-interest encryption: scramble only the blocks that matter.
//!
//! A key file carries a per-block ROI mask; blocks outside the region are
//! encoded with the identity key and stay readable in the cloud view,
//! blocks inside are protected. This selects the center 2x2 blocks of a
//! 96x96 image and compares cloud-view quality inside and outside the
//! region.
//!
//! Run: `cargo run --example roi_encryption`

use ecis::container::{EcisKeyFile, RoiMask};
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
    let (cols, rows) = (grid.grid_cols, grid.grid_rows);

    // Center 2x2 block rectangle.
    let mut roi_indices = Vec::new();
    for by in 1..3 {
        for bx in 1..3 {
            roi_indices.push(by * cols + bx);
        }
    }
    let roi = RoiMask::from_indices((cols * rows) as u32, &roi_indices)?;
    let key_file = EcisKeyFile::new(21, n as u32, false, false, 0.2, roi)?;

    let phi = gaussian_matrix(5, m, n)?;
    let dict = effective_dictionary(&phi, n)?;

    let mut naive_blocks = Vec::new();
    let mut user_blocks = Vec::new();
    for b in 0..grid.block_count() {
        let key = key_file.key_for_block(b, n, block)?;
        let y = encode_block(grid.block(b), &phi, &key, b)?;
        let sol = omp(&dict, &y, default_t_max(m), DEFAULT_TOL)?;
        naive_blocks.push(naive_reconstruct(&sol.coefficients)?);
        user_blocks.push(user_recover(&sol.coefficients, &key, b)?);
    }

    // Split the PSNR accounting into inside-ROI and outside-ROI pixels by
    // comparing block-by-block before merging.
    let psnr_of = |blocks: &[ecis::signal::DenseVector], inside: bool| -> ecis::Result<f64> {
        let mut se = 0.0;
        let mut count = 0usize;
        for (b, rec) in blocks.iter().enumerate() {
            if key_file.roi.is_encrypted(b) != inside {
                continue;
            }
            for (a, v) in grid.block(b).as_slice().iter().zip(rec.as_slice()) {
                let d = a - v.round().clamp(0.0, 255.0);
                se += d * d;
                count += 1;
            }
        }
        Ok(10.0 * (255.0f64 * 255.0 / (se / count as f64)).log10())
    };

    println!("96x96 image, {block}x{block} blocks, ROI = center 2x2 blocks, k = n there\n");
    println!(
        "cloud view PSNR inside ROI  : {:>7.2} dB",
        psnr_of(&naive_blocks, true)?
    );
    println!(
        "cloud view PSNR outside ROI : {:>7.2} dB",
        psnr_of(&naive_blocks, false)?
    );
    println!(
        "key holder PSNR inside ROI  : {:>7.2} dB",
        psnr_of(&user_blocks, true)?
    );
    println!(
        "key holder PSNR outside ROI : {:>7.2} dB",
        psnr_of(&user_blocks, false)?
    );

    let user = merge_blocks(&grid.with_blocks(user_blocks)?)?;
    println!(
        "\nwhole-image PSNR with key   : {:>7.2} dB",
        psnr(&image, &user)?
    );
    println!("(outside the ROI the cloud view is as good as the key holder's)");
    Ok(())
}
