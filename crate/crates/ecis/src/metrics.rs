//! Image quality metrics.

use crate::error::{EcisError, Result};
use crate::signal::PixelImage;

/// Peak signal-to-noise ratio in dB over 8-bit grayscale:
/// `10 log10(255^2 / MSE)`. Identical images return `f64::INFINITY`.
pub fn psnr(a: &PixelImage, b: &PixelImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(EcisError::InvalidDimensions(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let mse = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        / a.pixels().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}
