//! The encryption operator: k-secure permutations of the coefficient
//! vector with optional amplitude randomization.
//!
//! A key derives, per block, a bijection on coefficient positions that
//! moves *exactly* k indices (a derangement on the selected set — a
//! selected index that stays put would not count as a permuted row) and
//! an amplitude factor `alpha`. Encryption writes `alpha * s[i]` to
//! position `mapping(i)`; decryption inverts both steps exactly.
//!
//! The permutation acts in the coefficient domain, so it never changes
//! the number of nonzero coefficients and the measurement count is
//! unaffected: encryption is free in transmission cost.

use crate::error::{EcisError, Result};
use crate::signal::{mix_seed, CoefficientVector, RngStream};

/// Default floor for the amplitude factor when amplitude mode is on.
pub const DEFAULT_ALPHA_MIN: f64 = 0.2;

/// How the k moved indices are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionStrategy {
    /// Uniformly without replacement over all n positions.
    Uniform,
    /// Weighted without replacement; weights are a probability vector
    /// over coefficient positions (see [`dct_energy_weights`]).
    Weighted(Vec<f64>),
}

/// Whether encrypted coefficients are additionally scaled by a secret
/// per-block amplitude in `[alpha_min, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeMode {
    Off,
    On { alpha_min: f64 },
}

/// The shared secret: seed, security level k, selection strategy, and
/// amplitude mode. k = 0 means no encryption; k = 1 is rejected because a
/// single moved index cannot be deranged.
#[derive(Debug, Clone, PartialEq)]
pub struct EncryptionKey {
    seed: u64,
    k: usize,
    strategy: SelectionStrategy,
    amplitude: AmplitudeMode,
}

impl EncryptionKey {
    pub fn new(
        seed: u64,
        k: usize,
        strategy: SelectionStrategy,
        amplitude: AmplitudeMode,
    ) -> Result<Self> {
        if k == 1 {
            return Err(EcisError::NoDerangement);
        }
        if let SelectionStrategy::Weighted(w) = &strategy {
            if w.is_empty() {
                return Err(EcisError::InvalidKey(
                    "weighted strategy requires a weight vector".into(),
                ));
            }
            if w.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(EcisError::InvalidKey(
                    "weights must be finite and nonnegative".into(),
                ));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(EcisError::InvalidKey(format!(
                    "weights sum to {total}, expected 1"
                )));
            }
        }
        if let AmplitudeMode::On { alpha_min } = amplitude {
            if !(alpha_min > 0.0 && alpha_min < 1.0) {
                return Err(EcisError::InvalidKey(format!(
                    "alpha_min must lie in (0, 1), got {alpha_min}"
                )));
            }
        }
        Ok(EncryptionKey {
            seed,
            k,
            strategy,
            amplitude,
        })
    }

    /// The k = 0 key: every block passes through untouched.
    pub fn identity(seed: u64) -> Self {
        EncryptionKey {
            seed,
            k: 0,
            strategy: SelectionStrategy::Uniform,
            amplitude: AmplitudeMode::Off,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn strategy(&self) -> &SelectionStrategy {
        &self.strategy
    }

    pub fn amplitude(&self) -> AmplitudeMode {
        self.amplitude
    }
}

/// A derived per-block permutation: a bijection on `{0..n-1}` moving
/// exactly `moved.len()` indices, plus the block's amplitude factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPermutation {
    block_index: usize,
    mapping: Vec<usize>,
    moved: Vec<usize>,
    alpha: f64,
}

impl BlockPermutation {
    /// Build from an explicit mapping; validates the bijection, that every
    /// non-fixed index really moves, and that alpha is positive.
    pub fn new(block_index: usize, mapping: Vec<usize>, alpha: f64) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &t in &mapping {
            if t >= n || seen[t] {
                return Err(EcisError::InvalidInput("mapping is not a bijection".into()));
            }
            seen[t] = true;
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(EcisError::CorruptKey(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        let moved: Vec<usize> = (0..n).filter(|&i| mapping[i] != i).collect();
        if moved.len() == 1 {
            return Err(EcisError::NoDerangement);
        }
        Ok(BlockPermutation {
            block_index,
            mapping,
            moved,
            alpha,
        })
    }

    pub fn block_index(&self) -> usize {
        self.block_index
    }

    pub fn n(&self) -> usize {
        self.mapping.len()
    }

    /// Destination of coefficient position `i`.
    #[inline]
    pub fn map(&self, i: usize) -> usize {
        self.mapping[i]
    }

    /// Indices with `map(i) != i`, ascending.
    pub fn moved(&self) -> &[usize] {
        &self.moved
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_identity(&self) -> bool {
        self.moved.is_empty() && self.alpha == 1.0
    }
}

/// Derive the block's permutation and amplitude from the key.
/// Deterministic in `(key.seed, block_index, n)`: selection, derangement,
/// and the amplitude draw all come from one per-block SplitMix64 stream.
pub fn derive_permutation(
    key: &EncryptionKey,
    block_index: usize,
    n: usize,
) -> Result<BlockPermutation> {
    if n < 2 {
        return Err(EcisError::InvalidInput(format!(
            "block length must be at least 2, got {n}"
        )));
    }
    let k = key.k;
    if k == 1 {
        return Err(EcisError::NoDerangement);
    }
    if k > n {
        return Err(EcisError::InvalidKey(format!(
            "security level k = {k} exceeds block length n = {n}"
        )));
    }
    if let SelectionStrategy::Weighted(w) = &key.strategy {
        if w.len() != n {
            return Err(EcisError::InvalidKey(format!(
                "weight vector has {} entries for n = {n}",
                w.len()
            )));
        }
    }

    let mut rng = RngStream::new(mix_seed(key.seed, block_index as u64));
    let mut mapping: Vec<usize> = (0..n).collect();
    let mut moved = Vec::new();

    if k >= 2 {
        let mut selected = match &key.strategy {
            SelectionStrategy::Uniform => select_uniform(&mut rng, n, k),
            SelectionStrategy::Weighted(w) => select_weighted(&mut rng, w, k),
        };
        selected.sort_unstable();
        // Derangement on the selected set: rejection-sample a Fisher-Yates
        // shuffle until no selected index stays in place (about e tries).
        let mut targets: Vec<usize> = (0..k).collect();
        loop {
            for i in (1..k).rev() {
                let j = rng.next_index(i + 1);
                targets.swap(i, j);
            }
            if targets.iter().enumerate().all(|(i, &t)| i != t) {
                break;
            }
        }
        for (i, &t) in targets.iter().enumerate() {
            mapping[selected[i]] = selected[t];
        }
        moved = selected;
    }

    let alpha = match key.amplitude {
        AmplitudeMode::Off => 1.0,
        AmplitudeMode::On { alpha_min } => alpha_min + rng.next_uniform() * (1.0 - alpha_min),
    };

    Ok(BlockPermutation {
        block_index,
        mapping,
        moved,
        alpha,
    })
}

/// First k entries of a Fisher-Yates pass: uniform without replacement.
fn select_uniform(rng: &mut RngStream, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.next_index(n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// Sequential weighted sampling without replacement.
fn select_weighted(rng: &mut RngStream, weights: &[f64], k: usize) -> Vec<usize> {
    let n = weights.len();
    let mut remaining: Vec<f64> = weights.to_vec();
    let mut total: f64 = remaining.iter().sum();
    let mut selected = Vec::with_capacity(k);
    for _ in 0..k {
        let mut u = rng.next_uniform() * total;
        let mut pick = None;
        for (i, &w) in remaining.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            if u < w {
                pick = Some(i);
                break;
            }
            u -= w;
        }
        // Fall back to the last positive-weight index if rounding walked
        // past the end of the cumulative sum.
        let i = pick.unwrap_or_else(|| {
            remaining
                .iter()
                .rposition(|&w| w > 0.0)
                .expect("k <= count of positive weights")
        });
        selected.push(i);
        total -= remaining[i];
        remaining[i] = 0.0;
        if total <= 0.0 {
            // Remaining mass exhausted (more selections than positive
            // weights): finish uniformly over the unselected rest.
            let mut rest: Vec<usize> = (0..n).filter(|i| !selected.contains(i)).collect();
            while selected.len() < k {
                let j = rng.next_index(rest.len());
                selected.push(rest.swap_remove(j));
            }
            break;
        }
    }
    selected
}

/// Apply the permutation in the coefficient domain:
/// `out[map(i)] = alpha * s[i]`.
pub fn encrypt_coeffs(s: &CoefficientVector, perm: &BlockPermutation) -> Result<CoefficientVector> {
    if s.len() != perm.n() {
        return Err(EcisError::InvalidInput(format!(
            "coefficient length {} vs permutation length {}",
            s.len(),
            perm.n()
        )));
    }
    let mut out = vec![0.0; s.len()];
    for (i, &v) in s.as_slice().iter().enumerate() {
        out[perm.map(i)] = perm.alpha() * v;
    }
    Ok(CoefficientVector::from_computed(out))
}

/// Exact inverse of [`encrypt_coeffs`].
pub fn decrypt_coeffs(
    s_prime: &CoefficientVector,
    perm: &BlockPermutation,
) -> Result<CoefficientVector> {
    if s_prime.len() != perm.n() {
        return Err(EcisError::InvalidInput(format!(
            "coefficient length {} vs permutation length {}",
            s_prime.len(),
            perm.n()
        )));
    }
    if perm.alpha() == 0.0 {
        return Err(EcisError::CorruptKey("alpha is zero".into()));
    }
    let inv_alpha = 1.0 / perm.alpha();
    let mut out = vec![0.0; s_prime.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = s_prime.as_slice()[perm.map(i)] * inv_alpha;
    }
    Ok(CoefficientVector::from_computed(out))
}

/// Normalized weights proportional to `1 / (1 + rank)`.
pub fn weights_from_ranks(ranks: &[usize]) -> Vec<f64> {
    let raw: Vec<f64> = ranks.iter().map(|&r| 1.0 / (1.0 + r as f64)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Default selection weights for the weighted strategy: a fixed proxy for
/// the empirical distribution of nonzero DCT coefficients, decaying as
/// `1 / (1 + zigzag_rank)`. When `n` is a multiple of `block_w` the rank
/// follows the zigzag walk of the `(n / block_w) x block_w` grid cell the
/// flattened index lands in; otherwise the rank is the index itself.
pub fn dct_energy_weights(n: usize, block_w: usize) -> Vec<f64> {
    let ranks: Vec<usize> = if block_w >= 1 && n % block_w == 0 && n >= block_w {
        let h = n / block_w;
        let zz = zigzag_ranks(h, block_w);
        (0..n).map(|i| zz[i]).collect()
    } else {
        (0..n).collect()
    };
    weights_from_ranks(&ranks)
}

/// Rank of each cell of an `h x w` grid along the JPEG-style zigzag walk,
/// returned in row-major cell order.
fn zigzag_ranks(h: usize, w: usize) -> Vec<usize> {
    let mut ranks = vec![0usize; h * w];
    let mut rank = 0;
    for d in 0..(h + w - 1) {
        // Cells on anti-diagonal d, alternating walk direction.
        let cells: Vec<(usize, usize)> = (0..=d.min(h - 1))
            .filter_map(|r| {
                let c = d - r;
                (c < w).then_some((r, c))
            })
            .collect();
        let iter: Box<dyn Iterator<Item = &(usize, usize)>> = if d % 2 == 0 {
            Box::new(cells.iter().rev())
        } else {
            Box::new(cells.iter())
        };
        for &(r, c) in iter {
            ranks[r * w + c] = rank;
            rank += 1;
        }
    }
    ranks
}
