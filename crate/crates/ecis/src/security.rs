//! Security calculus: attack-space counting, success-probability bounds,
//! minimum security levels, and an empirical mutual-information estimator.
//!
//! Two counts are exposed side by side. `arrangement_count_paper` is the
//! published counting model `C(n,k) * n!/(n-k)!`, which enumerates ordered
//! row placements; `exact_perm_count` is the combinatorially exact number
//! of permutations with exactly k non-fixed points, `C(n,k) * D_k` with
//! `D_k` the derangement number. They disagree (72 vs 6 at n = 4, k = 2)
//! and the reporting keeps both, labeled.
//!
//! All probability bounds use the natural logarithm; mutual information
//! is reported in bits.

use num_bigint::BigUint;

use crate::error::{EcisError, Result};

/// Default recovery-probability target for reports.
pub fn default_beta() -> f64 {
    (-10.0f64).exp()
}

/// Default histogram resolution for the mutual-information estimator.
pub const DEFAULT_MI_BINS: usize = 16;

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn falling_factorial(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
    }
    acc
}

/// Number of permutations of k elements with no fixed point.
fn derangement_number(k: usize) -> BigUint {
    match k {
        0 => BigUint::from(1u32),
        1 => BigUint::from(0u32),
        _ => {
            let mut prev2 = BigUint::from(1u32); // D_0
            let mut prev1 = BigUint::from(0u32); // D_1
            for i in 2..=k {
                let next = BigUint::from(i - 1) * (&prev1 + &prev2);
                prev2 = prev1;
                prev1 = next;
            }
            prev1
        }
    }
}

/// The paper's attack-space count: `C(n,k) * n! / (n-k)!` ordered
/// placements of the k permuted rows.
pub fn arrangement_count_paper(n: usize, k: usize) -> BigUint {
    binomial(n, k) * falling_factorial(n, k)
}

/// Exact number of n-permutations moving exactly k indices:
/// `C(n,k) * D_k`. Zero for k = 1, where no derangement exists.
pub fn exact_perm_count(n: usize, k: usize) -> BigUint {
    binomial(n, k) * derangement_number(k)
}

/// Brute-force oracle: enumerate all n! permutations and count those with
/// exactly k non-fixed points. Capped at n <= 12.
pub fn brute_force_perm_count(n: usize, k: usize) -> Result<BigUint> {
    if n > 12 {
        return Err(EcisError::InvalidInput(format!(
            "enumeration capped at n = 12, got {n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count: u64 = 0;
    loop {
        let moved = perm.iter().enumerate().filter(|(i, &p)| *i != p).count();
        if moved == k {
            count += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(BigUint::from(count))
}

/// Lexicographic successor in place; false once the order wraps.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Upper bound on the attacker's success probability against a k-secure
/// key on a dense signal: `e^{-(k ln n + k + 1)}`.
pub fn p_suc_bound(n: usize, k: usize) -> Result<f64> {
    if n < 2 {
        return Err(EcisError::InvalidInput(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let kf = k as f64;
    Ok((-(kf * nf.ln() + kf + 1.0)).exp())
}

/// Same bound driven by a real-valued count `l` of attacker-relevant
/// perturbed elements: `e^{-(l ln n + l + 1)}`.
pub fn p_suc_bound_perturbed(n: usize, l: f64) -> Result<f64> {
    if n < 2 {
        return Err(EcisError::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if !(l >= 0.0) {
        return Err(EcisError::InvalidInput(format!("negative l = {l}")));
    }
    let nf = n as f64;
    Ok((-(l * nf.ln() + l + 1.0)).exp())
}

/// Expected number of perturbed elements the attacker must actually
/// consider when nonzeros are uniform: `l = k t (2n - t - 1) / (n (n-1))`.
/// Zero-zero exchanges are free for the attacker and drop out.
pub fn effective_l_uniform(n: usize, t: usize, k: usize) -> Result<f64> {
    if n < 2 {
        return Err(EcisError::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if t > n {
        return Err(EcisError::InvalidInput(format!("t = {t} exceeds n = {n}")));
    }
    let (nf, tf, kf) = (n as f64, t as f64, k as f64);
    Ok(kf * tf * (2.0 * nf - tf - 1.0) / (nf * (nf - 1.0)))
}

/// How a minimum-k result was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinKClamp {
    /// The formula's ceiling landed inside [2, n].
    Exact,
    /// The bound asked for k < 2 (beta is already met); floored to 2.
    FlooredToTwo,
    /// The bound asked for k > n: unachievable at this n; capped.
    CappedAtN,
}

/// A minimum security level together with its clamp status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinK {
    pub k: usize,
    pub clamp: MinKClamp,
}

impl MinK {
    fn from_raw(raw: f64, n: usize) -> MinK {
        let ceil = raw.ceil();
        if !(ceil >= 2.0) {
            MinK {
                k: 2,
                clamp: MinKClamp::FlooredToTwo,
            }
        } else if ceil > n as f64 {
            MinK {
                k: n,
                clamp: MinKClamp::CappedAtN,
            }
        } else {
            MinK {
                k: ceil as usize,
                clamp: MinKClamp::Exact,
            }
        }
    }
}

/// Smallest k keeping the uniform-selection success bound below `beta`
/// for a t-sparse signal:
/// `k >= ceil( n(n-1)(-ln beta - 1) / (t(2n-t-1)(ln n + 1)) )`,
/// clamped to [2, n] (k = 1 is not a valid level).
pub fn min_k_uniform(n: usize, t: usize, beta: f64) -> Result<MinK> {
    if n < 2 {
        return Err(EcisError::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if t < 1 || t > n {
        return Err(EcisError::InvalidInput(format!(
            "t = {t} outside [1, n = {n}]"
        )));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(EcisError::InvalidInput(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let (nf, tf) = (n as f64, t as f64);
    let raw = nf * (nf - 1.0) * (-beta.ln() - 1.0) / (tf * (2.0 * nf - tf - 1.0) * (nf.ln() + 1.0));
    Ok(MinK::from_raw(raw, n))
}

/// Success bound when the k indices are drawn to match a known nonzero
/// distribution `p`: `e^{-((1 - (1 - sum p_i^2)^2) k (ln n + 1) + 1)}`.
/// With uniform p = 1/n this reduces to the blind-selection exponent
/// `(2n-1)/n^2 * k (ln n + 1) + 1`.
pub fn p_suc_nonuniform(n: usize, k: usize, p: &[f64]) -> Result<f64> {
    if n < 2 {
        return Err(EcisError::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if p.is_empty() {
        return Err(EcisError::InvalidInput("empty probability vector".into()));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(EcisError::InvalidInput(
            "probabilities must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(EcisError::InvalidInput(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    let sum_sq: f64 = p.iter().map(|v| v * v).sum();
    let hit = 1.0 - (1.0 - sum_sq) * (1.0 - sum_sq);
    let nf = n as f64;
    Ok((-(hit * k as f64 * (nf.ln() + 1.0) + 1.0)).exp())
}

/// Smallest k for the blind case (nonzero distribution unknown, uniform
/// random selection): `k >= ceil( (-n^2 ln beta - 1) / ((2n-1) ln n + 1) )`,
/// clamped to [2, n]. A capped result means the target beta is
/// unachievable at this n.
pub fn min_k_blind(n: usize, beta: f64) -> Result<MinK> {
    if n < 2 {
        return Err(EcisError::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(EcisError::InvalidInput(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let nf = n as f64;
    let raw = (-nf * nf * beta.ln() - 1.0) / ((2.0 * nf - 1.0) * nf.ln() + 1.0);
    Ok(MinK::from_raw(raw, n))
}

/// Plug-in mutual information estimate in bits from equal-width joint
/// quantization of two paired sample sequences. Clamped at zero against
/// negative floating-point noise.
pub fn mutual_information_plugin(xs: &[f64], ys: &[f64], bins: usize) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(EcisError::InvalidInput("empty sample sequence".into()));
    }
    if xs.len() != ys.len() {
        return Err(EcisError::InvalidInput(format!(
            "sample lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if bins < 2 {
        return Err(EcisError::InvalidInput(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(EcisError::InvalidInput("non-finite sample".into()));
    }

    let quantize = |vals: &[f64]| -> Vec<usize> {
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = max - min;
        vals.iter()
            .map(|&v| {
                if width == 0.0 {
                    0
                } else {
                    (((v - min) / width * bins as f64) as usize).min(bins - 1)
                }
            })
            .collect()
    };

    let qx = quantize(xs);
    let qy = quantize(ys);
    let mut joint = vec![0u64; bins * bins];
    let mut px = vec![0u64; bins];
    let mut py = vec![0u64; bins];
    for (&a, &b) in qx.iter().zip(&qy) {
        joint[a * bins + b] += 1;
        px[a] += 1;
        py[b] += 1;
    }
    let total = xs.len() as f64;
    let mut info = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c == 0 {
                continue;
            }
            let p_ab = c as f64 / total;
            let p_a = px[a] as f64 / total;
            let p_b = py[b] as f64 / total;
            info += p_ab * (p_ab / (p_a * p_b)).log2();
        }
    }
    Ok(info.max(0.0))
}

/// One-stop evaluation of the counting formulas and bounds for a
/// parameter point, as printed by `ecis analyze`.
#[derive(Debug, Clone)]
pub struct SecurityReport {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub beta: f64,
    /// The published counting model (ordered placements).
    pub arrangement_count_paper: BigUint,
    /// Exact permutations with exactly k moved indices.
    pub exact_perm_count: BigUint,
    /// Attacker-relevant perturbed elements under uniform nonzeros.
    pub effective_l: f64,
    /// Success bound through `effective_l` (equals the dense bound at t = n).
    pub p_suc_bound: f64,
    /// Dense-signal bound ignoring sparsity.
    pub p_suc_dense: f64,
    /// Bound for distribution-matched selection, when p was supplied.
    pub p_suc_nonuniform: Option<f64>,
    /// Minimum k for the uniform case at `beta`.
    pub min_k: MinK,
    /// Minimum k when the nonzero distribution is unknown.
    pub min_k_blind: MinK,
    /// Brute-force verification of `exact_perm_count` (run when n <= 7).
    pub brute_force_agrees: Option<bool>,
}

pub fn security_report(
    n: usize,
    k: usize,
    t: usize,
    beta: f64,
    p: Option<&[f64]>,
) -> Result<SecurityReport> {
    if k > n {
        return Err(EcisError::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    let effective_l = effective_l_uniform(n, t, k)?;
    let report = SecurityReport {
        n,
        k,
        t,
        beta,
        arrangement_count_paper: arrangement_count_paper(n, k),
        exact_perm_count: exact_perm_count(n, k),
        effective_l,
        p_suc_bound: p_suc_bound_perturbed(n, effective_l)?,
        p_suc_dense: p_suc_bound(n, k)?,
        p_suc_nonuniform: match p {
            Some(p) => Some(p_suc_nonuniform(n, k, p)?),
            None => None,
        },
        min_k: min_k_uniform(n, t, beta)?,
        min_k_blind: min_k_blind(n, beta)?,
        brute_force_agrees: if n <= 7 {
            Some(brute_force_perm_count(n, k)? == exact_perm_count(n, k))
        } else {
            None
        },
    };
    Ok(report)
}

/// Render a big count as its decimal digits when short, otherwise as
/// `mantissa x 10^exponent`.
pub fn format_count(v: &BigUint) -> String {
    let digits = v.to_string();
    if digits.len() <= 24 {
        return digits;
    }
    let mantissa = format!("{}.{}", &digits[..1], &digits[1..4]);
    format!("{mantissa}e{}", digits.len() - 1)
}

impl std::fmt::Display for SecurityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "security report: n = {}, k = {}, t = {}, beta = {:.6e}",
            self.n, self.k, self.t, self.beta
        )?;
        writeln!(
            f,
            "  arrangement count (paper model) : {}",
            format_count(&self.arrangement_count_paper)
        )?;
        writeln!(
            f,
            "  exact k-moved permutations      : {}",
            format_count(&self.exact_perm_count)
        )?;
        if let Some(ok) = self.brute_force_agrees {
            writeln!(
                f,
                "  brute-force check (n <= 7)      : {}",
                if ok { "agrees" } else { "DISAGREES" }
            )?;
        }
        writeln!(
            f,
            "  effective perturbed l (uniform) : {:.6}",
            self.effective_l
        )?;
        writeln!(
            f,
            "  P_suc bound via l               : {:.6e}",
            self.p_suc_bound
        )?;
        writeln!(
            f,
            "  P_suc bound (dense signal)      : {:.6e}",
            self.p_suc_dense
        )?;
        if let Some(p) = self.p_suc_nonuniform {
            writeln!(f, "  P_suc bound (matched selection) : {p:.6e}")?;
        }
        writeln!(
            f,
            "  min k (uniform, t-sparse)       : {}{}",
            self.min_k.k,
            clamp_note(self.min_k.clamp)
        )?;
        write!(
            f,
            "  min k (blind selection)         : {}{}",
            self.min_k_blind.k,
            clamp_note(self.min_k_blind.clamp)
        )
    }
}

fn clamp_note(c: MinKClamp) -> &'static str {
    match c {
        MinKClamp::Exact => "",
        MinKClamp::FlooredToTwo => " (bound already met; floored to 2)",
        MinKClamp::CappedAtN => " (unachievable at this n; capped)",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_count_examples() {
        assert_eq!(arrangement_count_paper(4, 0), BigUint::from(1u32));
        assert_eq!(arrangement_count_paper(4, 2), BigUint::from(72u32));
        // C(3,3) * 3!/0! = 1 * 6.
        assert_eq!(arrangement_count_paper(3, 3), BigUint::from(6u32));
    }

    #[test]
    fn exact_count_examples() {
        assert_eq!(exact_perm_count(4, 2), BigUint::from(6u32));
        assert_eq!(exact_perm_count(4, 1), BigUint::from(0u32));
        let total: BigUint = (0..=4).map(|k| exact_perm_count(4, k)).sum();
        assert_eq!(total, BigUint::from(24u32));
    }

    #[test]
    fn brute_force_agrees_with_closed_form() {
        for n in 2..=7 {
            let mut total = BigUint::from(0u32);
            for k in 0..=n {
                let brute = brute_force_perm_count(n, k).unwrap();
                assert_eq!(brute, exact_perm_count(n, k), "n = {n}, k = {k}");
                total += brute;
            }
            let fact = (1..=n).map(BigUint::from).product::<BigUint>();
            assert_eq!(total, fact, "completeness at n = {n}");
        }
        assert!(brute_force_perm_count(13, 0).is_err());
    }

    #[test]
    fn paper_and_exact_counts_diverge() {
        // Documented, expected inequality: the paper's model counts
        // ordered placements and overcounts true k-moved permutations.
        assert_ne!(arrangement_count_paper(4, 2), exact_perm_count(4, 2));
    }

    #[test]
    fn p_suc_examples() {
        let e1 = p_suc_bound(256, 0).unwrap();
        assert!((e1 - (-1.0f64).exp()).abs() < 1e-15);

        let v = p_suc_bound(256, 8).unwrap();
        let expect = (-(8.0 * 256f64.ln() + 9.0)).exp();
        assert!((v - expect).abs() <= 1e-12 * expect);
        assert!((v - 6.69e-24).abs() < 0.01e-24 * 10.0, "v = {v:e}");

        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let b = p_suc_bound(64, k).unwrap();
            assert!(b > 0.0 && b <= 1.0);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn effective_l_examples() {
        assert_eq!(effective_l_uniform(256, 256, 17).unwrap(), 17.0);
        assert_eq!(effective_l_uniform(256, 0, 100).unwrap(), 0.0);
        let l = effective_l_uniform(256, 16, 100).unwrap();
        assert!((l - 12.132352941176471).abs() < 1e-9, "l = {l}");
    }

    #[test]
    fn min_k_uniform_examples() {
        // Dense signal: ceil(9 / (ln 256 + 1)) = 2.
        let mk = min_k_uniform(256, 256, (-10.0f64).exp()).unwrap();
        assert_eq!(mk.k, 2);
        assert_eq!(mk.clamp, MinKClamp::Exact);

        // Self-consistency: the bound at the returned k stays below beta.
        for &(n, t) in &[(256usize, 16usize), (128, 8), (64, 64)] {
            let beta = (-10.0f64).exp();
            let mk = min_k_uniform(n, t, beta).unwrap();
            if mk.clamp == MinKClamp::Exact {
                let l = effective_l_uniform(n, t, mk.k).unwrap();
                assert!(p_suc_bound_perturbed(n, l).unwrap() <= beta);
            }
        }

        // Antitone in beta.
        let loose = min_k_uniform(256, 16, 0.9).unwrap();
        let tight = min_k_uniform(256, 16, 1e-9).unwrap();
        assert!(loose.k <= tight.k);
        assert_eq!(loose.clamp, MinKClamp::FlooredToTwo);
    }

    #[test]
    fn p_suc_nonuniform_examples() {
        // Concentrated distribution: reduces to the dense bound.
        let mut p = vec![0.0; 8];
        p[0] = 1.0;
        let v = p_suc_nonuniform(8, 3, &p).unwrap();
        assert!((v - p_suc_bound(8, 3).unwrap()).abs() < 1e-15);

        // Uniform p at n = 2, k = 2.
        let v = p_suc_nonuniform(2, 2, &[0.5, 0.5]).unwrap();
        let expect = (-(0.75 * 2.0 * (2f64.ln() + 1.0) + 1.0)).exp();
        assert!((v - expect).abs() <= 1e-15);

        // Larger sum of squares tightens the bound.
        let spread = p_suc_nonuniform(4, 3, &[0.25; 4]).unwrap();
        let peaked = p_suc_nonuniform(4, 3, &[0.7, 0.1, 0.1, 0.1]).unwrap();
        assert!(peaked < spread);

        assert!(p_suc_nonuniform(4, 1, &[0.9, 0.3]).is_err());
    }

    #[test]
    fn min_k_blind_examples() {
        let mk = min_k_blind(256, (-10.0f64).exp()).unwrap();
        assert_eq!(mk.k, 232);
        assert_eq!(mk.clamp, MinKClamp::Exact);

        let loose = min_k_blind(256, 0.999).unwrap();
        assert_eq!(loose.k, 2);
        assert_eq!(loose.clamp, MinKClamp::FlooredToTwo);

        // n = 128 cannot reach beta = e^-10 at all: raw bound is 133 > n.
        let capped = min_k_blind(128, (-10.0f64).exp()).unwrap();
        assert_eq!(capped.k, 128);
        assert_eq!(capped.clamp, MinKClamp::CappedAtN);
        assert!(capped.k < mk.k);
    }

    #[test]
    fn mutual_information_channels() {
        let mut rng = crate::signal::RngStream::new(6);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| if rng.next_uniform() < 0.5 { 0.0 } else { 1.0 })
            .collect();

        // Identity channel: I(X;X) = H(X) = 1 bit for uniform binary X.
        let i_xx = mutual_information_plugin(&xs, &xs, 8).unwrap();
        assert!((i_xx - 1.0).abs() <= 0.02, "I(X;X) = {i_xx}");

        // Independent uniforms.
        let ys: Vec<f64> = (0..100_000).map(|_| rng.next_uniform()).collect();
        let i_ind = mutual_information_plugin(&xs, &ys, 8).unwrap();
        assert!(i_ind <= 0.02, "independent MI = {i_ind}");

        // Noisy channel sits strictly between.
        let xs_c: Vec<f64> = (0..100_000).map(|_| rng.next_uniform()).collect();
        let noisy: Vec<f64> = xs_c.iter().map(|x| x + rng.next_uniform()).collect();
        let i_noisy = mutual_information_plugin(&xs_c, &noisy, 8).unwrap();
        assert!(
            i_noisy > i_ind + 0.1 && i_noisy < 2.9,
            "noisy MI = {i_noisy}"
        );
    }

    #[test]
    fn mutual_information_validation() {
        assert!(mutual_information_plugin(&[], &[], 8).is_err());
        assert!(mutual_information_plugin(&[1.0], &[1.0, 2.0], 8).is_err());
        assert!(mutual_information_plugin(&[1.0], &[1.0], 1).is_err());
        // Constant sequences carry no information but are valid input.
        let c = vec![3.0; 100];
        assert_eq!(mutual_information_plugin(&c, &c, 8).unwrap(), 0.0);
    }

    #[test]
    fn report_assembles_and_prints() {
        let rep = security_report(256, 100, 16, default_beta(), None).unwrap();
        assert!((rep.effective_l - 12.132352941176471).abs() < 1e-9);
        assert_eq!(rep.min_k_blind.k, 232);
        assert!(rep.p_suc_bound > 0.0 && rep.p_suc_bound <= 1.0);
        let text = rep.to_string();
        assert!(text.contains("232"));

        let small = security_report(4, 2, 2, default_beta(), None).unwrap();
        assert_eq!(small.arrangement_count_paper, BigUint::from(72u32));
        assert_eq!(small.exact_perm_count, BigUint::from(6u32));
        assert_eq!(small.brute_force_agrees, Some(true));
        let text = small.to_string();
        assert!(text.contains("72") && text.contains('6'));
    }

    #[test]
    fn count_formatting() {
        assert_eq!(format_count(&BigUint::from(72u32)), "72");
        let big = (1..=30u32).map(BigUint::from).product::<BigUint>();
        let s = format_count(&big);
        assert!(s.contains('e'), "30! formatted as {s}");
    }
}
