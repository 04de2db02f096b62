//! Three-scheme timing harness.
//!
//! Compares, per block size, the wall-clock cost at the sampling device
//! (`t_sd`), the cloud (`t_cloud`), and the end user (`t_eu`) for:
//!
//! - `Original_CS`: no cloud; the user solves the l1 problem itself.
//! - `Cloud_Non_encryption`: recovery outsourced, no protection.
//! - `eCIS`: encrypt-and-compress, outsourced recovery, cheap decrypt.
//!
//! Each trial times one randomly selected block (one warmup pass per
//! block size is discarded). Speedup ratios follow the usual convention:
//! `speedup_t_eu = original / ecis`, `slowdown_t_sd = ecis / original`,
//! and the total excludes cloud time.

use std::time::Instant;

use crate::cipher::{AmplitudeMode, EncryptionKey, SelectionStrategy};
use crate::error::{EcisError, Result};
use crate::recovery::{default_t_max, omp, user_recover, DEFAULT_TOL};
use crate::sensing::{effective_dictionary, encode_block, plain_encode};
use crate::signal::{gaussian_matrix, mix_seed, PixelImage, RngStream};
use crate::transform::{dct_inverse, split_blocks};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub block_sizes: Vec<(usize, usize)>,
    pub trials: usize,
    /// Measurement ratio m/n.
    pub ratio: f64,
    pub seed: u64,
    pub tol: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            block_sizes: vec![(24, 24), (32, 32), (48, 48)],
            trials: 50,
            ratio: 0.5,
            seed: 1,
            tol: DEFAULT_TOL,
        }
    }
}

/// Mean and median of one timing column, in seconds.
#[derive(Debug, Clone, Copy)]
pub struct TimingSummary {
    pub mean: f64,
    pub median: f64,
}

impl TimingSummary {
    fn from_samples(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
        let mean = sorted.iter().sum::<f64>() / sorted.len().max(1) as f64;
        let median = if sorted.is_empty() {
            0.0
        } else {
            sorted[sorted.len() / 2]
        };
        TimingSummary { mean, median }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SchemeTiming {
    pub t_sd: TimingSummary,
    pub t_cloud: TimingSummary,
    pub t_eu: TimingSummary,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub block_w: usize,
    pub block_h: usize,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub original_cs: SchemeTiming,
    pub cloud_non_encryption: SchemeTiming,
    pub ecis: SchemeTiming,
}

impl BenchRow {
    /// eCIS sampler cost relative to the plain CS sampler (means).
    pub fn slowdown_t_sd(&self) -> f64 {
        self.ecis.t_sd.mean / self.original_cs.t_sd.mean
    }

    /// End-user speedup of eCIS over solving the l1 problem locally.
    pub fn speedup_t_eu(&self) -> f64 {
        self.original_cs.t_eu.mean / self.ecis.t_eu.mean
    }

    /// Total speedup, cloud time excluded on both sides.
    pub fn speedup_t_total(&self) -> f64 {
        (self.original_cs.t_sd.mean + self.original_cs.t_eu.mean)
            / (self.ecis.t_sd.mean + self.ecis.t_eu.mean)
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub image_name: String,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "image,block_w,block_h,n,m,trials,\
             orig_t_sd_mean,orig_t_eu_mean,\
             cne_t_sd_mean,cne_t_cloud_mean,cne_t_eu_mean,\
             ecis_t_sd_mean,ecis_t_cloud_mean,ecis_t_eu_mean,\
             orig_t_sd_median,orig_t_eu_median,\
             cne_t_cloud_median,ecis_t_cloud_median,\
             ecis_t_sd_median,ecis_t_eu_median,\
             slowdown_t_sd,speedup_t_eu,speedup_t_total\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.3},{:.3},{:.3}\n",
                self.image_name,
                r.block_w,
                r.block_h,
                r.n,
                r.m,
                r.trials,
                r.original_cs.t_sd.mean,
                r.original_cs.t_eu.mean,
                r.cloud_non_encryption.t_sd.mean,
                r.cloud_non_encryption.t_cloud.mean,
                r.cloud_non_encryption.t_eu.mean,
                r.ecis.t_sd.mean,
                r.ecis.t_cloud.mean,
                r.ecis.t_eu.mean,
                r.original_cs.t_sd.median,
                r.original_cs.t_eu.median,
                r.cloud_non_encryption.t_cloud.median,
                r.ecis.t_cloud.median,
                r.ecis.t_sd.median,
                r.ecis.t_eu.median,
                r.slowdown_t_sd(),
                r.speedup_t_eu(),
                r.speedup_t_total(),
            ));
        }
        out
    }
}

fn time<T>(f: impl FnOnce() -> T) -> (f64, T) {
    let start = Instant::now();
    let out = f();
    (start.elapsed().as_secs_f64(), out)
}

/// Run the harness. Single-threaded on purpose: the timings are the
/// measurement.
pub fn run_bench(image: &PixelImage, image_name: &str, cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.trials == 0 {
        return Err(EcisError::InvalidInput("need at least one trial".into()));
    }
    if !(cfg.ratio > 0.0 && cfg.ratio < 1.0) {
        return Err(EcisError::InvalidInput(format!(
            "ratio must lie in (0, 1), got {}",
            cfg.ratio
        )));
    }
    let mut rows = Vec::new();
    let mut rng = RngStream::new(cfg.seed);

    for (size_idx, &(bw, bh)) in cfg.block_sizes.iter().enumerate() {
        if bw > image.width() || bh > image.height() {
            return Err(EcisError::InvalidInput(format!(
                "block {bw}x{bh} exceeds the {}x{} image",
                image.width(),
                image.height()
            )));
        }
        let grid = split_blocks(image, bw, bh)?;
        let n = grid.n();
        let m = ((cfg.ratio * n as f64).round() as usize).clamp(1, n - 1);
        let t_max = default_t_max(m);

        let phi = gaussian_matrix(mix_seed(cfg.seed, size_idx as u64), m, n)?;
        let dict = effective_dictionary(&phi, n)?;
        // Table-1 protocol: uniformly random perturbation at the highest
        // security level.
        let key = EncryptionKey::new(
            mix_seed(cfg.seed, 0xEC15 + size_idx as u64),
            n,
            SelectionStrategy::Uniform,
            AmplitudeMode::Off,
        )?;

        let mut samples = [
            [Vec::new(), Vec::new(), Vec::new()],
            [Vec::new(), Vec::new(), Vec::new()],
            [Vec::new(), Vec::new(), Vec::new()],
        ];

        // Trial 0 is a discarded warmup.
        for trial in 0..=cfg.trials {
            let block_idx = rng.next_index(grid.block_count());
            let block = grid.block(block_idx);

            // Original_CS: encode at the device, solve + synthesize at
            // the user. No cloud.
            let (sd_orig, y) = time(|| plain_encode(block, &phi));
            let y = y?;
            let (eu_orig, _) = time(|| -> Result<()> {
                let sol = omp(&dict, &y, t_max, cfg.tol)?;
                dct_inverse(&sol.coefficients)?;
                Ok(())
            });

            // Cloud_Non_encryption: same encoding, recovery outsourced.
            let (sd_cne, y) = time(|| plain_encode(block, &phi));
            let y = y?;
            let (cloud_cne, sol) = time(|| omp(&dict, &y, t_max, cfg.tol));
            let sol = sol?;
            let (eu_cne, _) = time(|| dct_inverse(&sol.coefficients));

            // eCIS: encrypt-and-compress, outsourced recovery, decrypt.
            let (sd_ecis, y_enc) = time(|| encode_block(block, &phi, &key, block_idx));
            let y_enc = y_enc?;
            let (cloud_ecis, sol) = time(|| omp(&dict, &y_enc, t_max, cfg.tol));
            let sol = sol?;
            let (eu_ecis, _) = time(|| user_recover(&sol.coefficients, &key, block_idx));

            if trial == 0 {
                continue;
            }
            samples[0][0].push(sd_orig);
            samples[0][2].push(eu_orig);
            samples[1][0].push(sd_cne);
            samples[1][1].push(cloud_cne);
            samples[1][2].push(eu_cne);
            samples[2][0].push(sd_ecis);
            samples[2][1].push(cloud_ecis);
            samples[2][2].push(eu_ecis);
        }

        let summarize = |scheme: &[Vec<f64>]| SchemeTiming {
            t_sd: TimingSummary::from_samples(&scheme[0]),
            t_cloud: TimingSummary::from_samples(&scheme[1]),
            t_eu: TimingSummary::from_samples(&scheme[2]),
        };
        rows.push(BenchRow {
            block_w: bw,
            block_h: bh,
            n,
            m,
            trials: cfg.trials,
            original_cs: summarize(&samples[0]),
            cloud_non_encryption: summarize(&samples[1]),
            ecis: summarize(&samples[2]),
        });
    }

    Ok(BenchReport {
        image_name: image_name.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::natural_image;

    #[test]
    fn bench_smoke() {
        let img = natural_image(48, 48, 2);
        let cfg = BenchConfig {
            block_sizes: vec![(16, 16)],
            trials: 3,
            ..BenchConfig::default()
        };
        let report = run_bench(&img, "synthetic", &cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!((row.n, row.m), (256, 128));
        assert!(row.original_cs.t_eu.median > 0.0);
        assert!(row.ecis.t_eu.median > 0.0);
        assert!(row.speedup_t_eu() > 1.0, "outsourcing must beat local l1");

        let csv = report.to_csv();
        let header_cols = csv.lines().next().unwrap().split(',').count();
        let row_cols = csv.lines().nth(1).unwrap().split(',').count();
        assert_eq!(header_cols, row_cols);
    }

    #[test]
    fn bench_rejects_oversized_blocks() {
        let img = natural_image(32, 32, 2);
        let cfg = BenchConfig {
            block_sizes: vec![(48, 48)],
            trials: 2,
            ..BenchConfig::default()
        };
        assert!(run_bench(&img, "synthetic", &cfg).is_err());
    }
}
