//! Procedural test imagery.
//!
//! The examples and the acceptance suite need grayscale material with the
//! statistics of natural photographs (DCT energy concentrated in few low
//! frequencies) and exactly-sparse signals with known ground truth. Both
//! are generated here deterministically from a seed, so no image corpus
//! ships with the crate.

use crate::signal::{CoefficientVector, PixelImage, RngStream};
use crate::transform::{dct_inverse, BlockGrid};

/// A smooth, photo-like grayscale image: layered low-frequency cosines,
/// a bright blob, a soft diagonal edge, and faint seeded texture. Its
/// block DCTs decay like natural image spectra.
pub fn natural_image(width: usize, height: usize, seed: u64) -> PixelImage {
    let mut rng = RngStream::new(seed);
    // A handful of random smooth modes on top of the fixed scene.
    let modes: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.next_uniform() * 3.0 + 0.5,             // x frequency
                rng.next_uniform() * 3.0 + 0.5,             // y frequency
                rng.next_uniform() * std::f64::consts::TAU, // phase
                rng.next_uniform() * 14.0 + 4.0,            // amplitude
            )
        })
        .collect();
    let (wf, hf) = (width as f64, height as f64);
    let (cx, cy) = (wf * 0.62, hf * 0.38);
    let sigma = 0.18 * wf.min(hf);

    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = 118.0;
            v += 46.0
                * (std::f64::consts::PI * xf / wf * 1.35 + 0.7).sin()
                * (std::f64::consts::PI * yf / hf * 1.1).cos();
            // Bright blob.
            let d2 = (xf - cx) * (xf - cx) + (yf - cy) * (yf - cy);
            v += 52.0 * (-d2 / (2.0 * sigma * sigma)).exp();
            // Soft diagonal edge.
            v += 24.0 / (1.0 + (-(xf + yf - 0.9 * wf) / 6.0).exp());
            for &(fx, fy, phase, amp) in &modes {
                v += amp * (std::f64::consts::PI * (fx * xf / wf + fy * yf / hf) + phase).cos();
            }
            // Faint texture, too small to dominate any DCT coefficient.
            v += rng.next_uniform() * 2.0 - 1.0;
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    PixelImage::new(width, height, pixels).expect("dimensions are positive")
}

/// Coefficient vector with exactly `t` nonzeros: a dominant positive DC
/// term plus `t - 1` signed entries of comparable magnitude at random
/// positions.
pub fn sparse_coefficients(n: usize, t: usize, rng: &mut RngStream) -> CoefficientVector {
    assert!(t >= 1 && t <= n);
    let mut values = vec![0.0; n];
    values[0] = 400.0 + rng.next_uniform() * 1200.0;
    let mut placed = 1;
    while placed < t {
        let i = rng.next_index(n);
        if values[i] == 0.0 {
            let sign = if rng.next_uniform() < 0.5 { -1.0 } else { 1.0 };
            values[i] = sign * (40.0 + rng.next_uniform() * 160.0);
            placed += 1;
        }
    }
    CoefficientVector::new(values).expect("finite by construction")
}

/// A block grid whose every block is exactly `t`-sparse under the DCT,
/// with the ground-truth blocks returned alongside the coefficients.
pub fn sparse_block_grid(
    grid_cols: usize,
    grid_rows: usize,
    block_w: usize,
    block_h: usize,
    t: usize,
    seed: u64,
) -> (BlockGrid, Vec<CoefficientVector>) {
    let n = block_w * block_h;
    let mut rng = RngStream::new(seed);
    let mut blocks = Vec::with_capacity(grid_cols * grid_rows);
    let mut truth = Vec::with_capacity(grid_cols * grid_rows);
    for _ in 0..grid_cols * grid_rows {
        let coeffs = sparse_coefficients(n, t, &mut rng);
        blocks.push(dct_inverse(&coeffs).expect("valid length"));
        truth.push(coeffs);
    }
    let grid = BlockGrid::new(
        block_w,
        block_h,
        grid_cols,
        grid_rows,
        grid_cols * block_w,
        grid_rows * block_h,
        blocks,
    )
    .expect("consistent by construction");
    (grid, truth)
}

/// An image of constant-valued blocks (each exactly 1-sparse in DCT),
/// for pipelines that must recover pixel-exactly through PGM files.
pub fn constant_block_image(
    grid_cols: usize,
    grid_rows: usize,
    block_w: usize,
    block_h: usize,
    seed: u64,
) -> PixelImage {
    let mut rng = RngStream::new(seed);
    let levels: Vec<u8> = (0..grid_cols * grid_rows)
        .map(|_| (20 + rng.next_index(216)) as u8)
        .collect();
    let width = grid_cols * block_w;
    let height = grid_rows * block_h;
    let mut pixels = vec![0u8; width * height];
    for (b, &level) in levels.iter().enumerate() {
        let bc = b % grid_cols;
        let br = b / grid_cols;
        for dy in 0..block_h {
            for dx in 0..block_w {
                pixels[(br * block_h + dy) * width + bc * block_w + dx] = level;
            }
        }
    }
    PixelImage::new(width, height, pixels).expect("dimensions are positive")
}
