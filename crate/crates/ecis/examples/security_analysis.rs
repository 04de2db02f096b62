//! The security calculus in action.
//!
//! Prints the attack-space counts (the published counting model next to
//! the exact k-moved permutation count, with the brute-force check at
//! small n), the success-probability bounds, and the minimum security
//! levels for a range of recovery-probability targets.
//!
//! Run: `cargo run --example security_analysis`

use ecis::security::{
    arrangement_count_paper, brute_force_perm_count, exact_perm_count, format_count, min_k_blind,
    min_k_uniform, p_suc_bound, security_report,
};

fn main() -> ecis::Result<()> {
    println!("== counting models at n = 4 ==");
    println!(
        "{:>3} {:>24} {:>24} {:>12}",
        "k", "paper model", "exact k-moved", "brute force"
    );
    for k in 0..=4 {
        println!(
            "{:>3} {:>24} {:>24} {:>12}",
            k,
            arrangement_count_paper(4, k).to_string(),
            exact_perm_count(4, k).to_string(),
            brute_force_perm_count(4, k)?.to_string()
        );
    }
    println!("(the two models disagree by design: the paper counts ordered row");
    println!(" placements, the exact count requires every selected row to move)\n");

    println!("== success-probability bound e^(-(k ln n + k + 1)) at n = 256 ==");
    for k in [0usize, 2, 8, 32, 128] {
        println!("  k = {k:>3}: P_suc <= {:.3e}", p_suc_bound(256, k)?);
    }
    println!();

    println!("== full report at (n, k, t) = (256, 100, 16), beta = e^-10 ==");
    let beta = (-10.0f64).exp();
    println!("{}\n", security_report(256, 100, 16, beta, None)?);

    println!("== minimum k per target beta, n = 256, t = 16 ==");
    println!(
        "{:>10} {:>14} {:>12}",
        "beta", "uniform min k", "blind min k"
    );
    for exp in [2.0f64, 5.0, 10.0, 20.0] {
        let beta = (-exp).exp();
        let u = min_k_uniform(256, 16, beta)?;
        let b = min_k_blind(256, beta)?;
        println!("{:>10} {:>14} {:>12}", format!("e^-{exp}"), u.k, b.k);
    }

    println!("\n== a key file's attack space at desk scale (n = 576, k = 576) ==");
    println!(
        "  paper model: {} candidate arrangements",
        format_count(&arrangement_count_paper(576, 576))
    );
    println!(
        "  exact count: {} k-moved permutations",
        format_count(&exact_perm_count(576, 576))
    );
    Ok(())
}
