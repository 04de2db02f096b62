//! Three-scheme timing comparison (CSV).
//!
//! Times the sampler, cloud, and end-user roles per block size for plain
//! CS without a cloud, outsourced CS without encryption, and the
//! encrypted pipeline. Ten trials here to stay quick; pass `--trials 50`
//! to the `ecis bench` subcommand for the full protocol.
//!
//! Run: `cargo run --release --example benchmark`

use ecis::bench::{run_bench, BenchConfig};
use ecis::synthetic::natural_image;

fn main() -> ecis::Result<()> {
    let image = natural_image(96, 96, 42);
    let cfg = BenchConfig {
        block_sizes: vec![(16, 16), (24, 24), (32, 32)],
        trials: 10,
        ..BenchConfig::default()
    };
    let report = run_bench(&image, "synthetic-96", &cfg)?;
    print!("{}", report.to_csv());

    eprintln!();
    for row in &report.rows {
        eprintln!(
            "{}x{}: sampler slowdown {:.2}x, end-user speedup {:.1}x, total speedup {:.1}x",
            row.block_w,
            row.block_h,
            row.slowdown_t_sd(),
            row.speedup_t_eu(),
            row.speedup_t_total()
        );
    }
    Ok(())
}
