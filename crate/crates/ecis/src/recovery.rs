//! Sparse recovery (the cloud role) and final reconstruction (the end
//! user role).
//!
//! The cloud solves the l1 problem greedily with orthogonal matching
//! pursuit against `D = Phi Psi`; it needs measurements and the public
//! matrix seed, never key material — that is the trust boundary, and the
//! function signatures enforce it. The end user inverts the permutation
//! and applies one inverse DCT; no l1 solve happens on the user side.

use crate::cipher::{decrypt_coeffs, derive_permutation, EncryptionKey};
use crate::error::{EcisError, Result};
use crate::sensing::{effective_dictionary, EffectiveDictionary};
use crate::signal::{dot, CoefficientVector, DenseVector, SensingMatrix};
use crate::transform::DctBasis;

/// Default residual tolerance, relative to the measurement norm.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Default sparsity budget: a quarter of the measurement count.
pub fn default_t_max(m: usize) -> usize {
    (m / 4).max(1)
}

/// Result of one pursuit: the dense coefficient estimate plus
/// diagnostics about how the iteration stopped.
#[derive(Debug, Clone)]
pub struct OmpSolution {
    pub coefficients: CoefficientVector,
    /// Atom indices in selection order.
    pub support: Vec<usize>,
    /// Residual 2-norm after each iteration (non-increasing).
    pub residual_history: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Set when an atom made the support system rank-deficient; the atom
    /// is dropped and the pursuit stops with the previous support.
    pub rank_deficient: bool,
}

/// Orthogonal matching pursuit: greedy support selection by maximum
/// absolute correlation of the residual with normalized dictionary
/// columns, least-squares refit on the support each iteration (QR with
/// column updates), stopping at `t_max` atoms or when the residual drops
/// to `tol * ||y||`.
pub fn omp(
    dict: &EffectiveDictionary,
    y: &DenseVector,
    t_max: usize,
    tol: f64,
) -> Result<OmpSolution> {
    let m = dict.m();
    let n = dict.n();
    if m < 1 {
        return Err(EcisError::InvalidInput("empty measurement vector".into()));
    }
    if y.len() != m {
        return Err(EcisError::InvalidDimensions(format!(
            "dictionary has {} rows, measurements have {}",
            m,
            y.len()
        )));
    }
    if t_max < 1 || t_max > m {
        return Err(EcisError::InvalidInput(format!(
            "t_max = {t_max} outside [1, m = {m}]"
        )));
    }
    if !(tol >= 0.0) {
        return Err(EcisError::InvalidInput(format!("negative tolerance {tol}")));
    }

    let y_norm = y.norm2();
    let threshold = tol * y_norm;
    let mut solution = OmpSolution {
        coefficients: CoefficientVector::zeros(n),
        support: Vec::new(),
        residual_history: Vec::new(),
        residual_norm: y_norm,
        iterations: 0,
        rank_deficient: false,
    };
    if y_norm == 0.0 {
        return Ok(solution);
    }

    let inv_norms: Vec<f64> = (0..n)
        .map(|j| {
            let norm = dot(dict.col(j), dict.col(j)).sqrt();
            if norm > 0.0 {
                1.0 / norm
            } else {
                0.0
            }
        })
        .collect();

    let mut residual: Vec<f64> = y.as_slice().to_vec();
    let mut in_support = vec![false; n];
    // Thin QR of the support columns: q holds orthonormal m-vectors,
    // r is upper triangular (row-major over the support size), and
    // qty accumulates Q^T y for the final back substitution.
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r: Vec<Vec<f64>> = Vec::new();
    let mut qty: Vec<f64> = Vec::new();

    while solution.iterations < t_max {
        let mut best = 0usize;
        let mut best_corr = 0.0f64;
        for j in 0..n {
            if in_support[j] || inv_norms[j] == 0.0 {
                continue;
            }
            let corr = dot(dict.col(j), &residual).abs() * inv_norms[j];
            if corr > best_corr {
                best_corr = corr;
                best = j;
            }
        }
        if best_corr == 0.0 {
            break; // residual orthogonal to every remaining atom
        }

        // Orthogonalize the new column against the current Q basis (two
        // Gram-Schmidt passes keep it orthogonal at large supports).
        let mut v: Vec<f64> = dict.col(best).to_vec();
        let mut rcol = vec![0.0; q.len()];
        for _ in 0..2 {
            for (idx, qi) in q.iter().enumerate() {
                let c = dot(qi, &v);
                rcol[idx] += c;
                for (ve, qe) in v.iter_mut().zip(qi) {
                    *ve -= c * qe;
                }
            }
        }
        let vnorm = dot(&v, &v).sqrt();
        if vnorm <= 1e-10 / inv_norms[best].max(1e-300) {
            // New atom is numerically dependent on the support: drop it
            // and stop with what we have.
            solution.rank_deficient = true;
            break;
        }
        let inv_vnorm = 1.0 / vnorm;
        for ve in v.iter_mut() {
            *ve *= inv_vnorm;
        }
        rcol.push(vnorm);

        let qy = dot(&v, y.as_slice());
        // Adding an orthonormal direction removes exactly its component
        // from the residual, so the residual norm never increases.
        let qr = dot(&v, &residual);
        for (re, qe) in residual.iter_mut().zip(&v) {
            *re -= qr * qe;
        }

        q.push(v);
        r.push(rcol);
        qty.push(qy);
        in_support[best] = true;
        solution.support.push(best);
        solution.iterations += 1;
        solution.residual_norm = dot(&residual, &residual).sqrt();
        solution.residual_history.push(solution.residual_norm);

        if solution.residual_norm <= threshold {
            break;
        }
    }

    // Back substitution: R x = Q^T y over the selected support.
    let k = solution.support.len();
    if k > 0 {
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = qty[i];
            for j in (i + 1)..k {
                acc -= r[j][i] * x[j];
            }
            x[i] = acc / r[i][i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(EcisError::Numeric(
                "pursuit solution overflowed on an ill-conditioned support".into(),
            ));
        }
        let mut coeffs = vec![0.0; n];
        for (idx, &atom) in solution.support.iter().enumerate() {
            coeffs[atom] = x[idx];
        }
        solution.coefficients = CoefficientVector::from_computed(coeffs);
    }
    Ok(solution)
}

/// The cloud role: recover the (still encrypted) coefficient vector from
/// one block's measurements. Builds `Phi Psi` internally — batch callers
/// should build the dictionary once with [`effective_dictionary`] and
/// call [`omp`] per block. Takes no key material by design.
pub fn cloud_decode(
    y_prime: &DenseVector,
    phi: &SensingMatrix,
    t_max: usize,
    tol: f64,
) -> Result<OmpSolution> {
    let dict = effective_dictionary(phi, phi.n())?;
    omp(&dict, y_prime, t_max, tol)
}

/// What the cloud (or any attacker holding the public basis) can render
/// without the key: `Psi s'`, the scrambled block.
pub fn naive_reconstruct(s_prime: &CoefficientVector) -> Result<DenseVector> {
    DctBasis::new(s_prime.len())?.inverse(s_prime)
}

/// The end-user role: invert the permutation and synthesize the block.
/// One inverse permutation plus one inverse DCT; no l1 solve. A wrong key
/// of the right length is *not* detectable — it yields garbage pixels.
pub fn user_recover(
    s_prime: &CoefficientVector,
    key: &EncryptionKey,
    block_index: usize,
) -> Result<DenseVector> {
    let n = s_prime.len();
    let perm = derive_permutation(key, block_index, n)?;
    let coeffs = decrypt_coeffs(s_prime, &perm)?;
    DctBasis::new(n)?.inverse(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{AmplitudeMode, SelectionStrategy};
    use crate::sensing::encode_block;
    use crate::signal::{gaussian_matrix, RngStream};
    use crate::transform::{dct_forward, dct_inverse};

    fn sparse_coeffs(n: usize, t: usize, rng: &mut RngStream) -> CoefficientVector {
        let mut values = vec![0.0; n];
        let mut placed = 0;
        while placed < t {
            let i = rng.next_index(n);
            if values[i] == 0.0 {
                values[i] = if rng.next_uniform() < 0.5 { 1.0 } else { -1.0 };
                placed += 1;
            }
        }
        CoefficientVector::new(values).unwrap()
    }

    #[test]
    fn zero_measurements_recover_zero() {
        let phi = gaussian_matrix(1, 8, 16).unwrap();
        let dict = effective_dictionary(&phi, 16).unwrap();
        let sol = omp(&dict, &DenseVector::zeros(8), 4, DEFAULT_TOL).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.coefficients.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn one_sparse_recovery_matches_least_squares_oracle() {
        let n = 8;
        let phi = gaussian_matrix(3, 6, n).unwrap();
        let dict = effective_dictionary(&phi, n).unwrap();
        let mut s = vec![0.0; n];
        s[3] = 4.0;
        let y = DenseVector::new(dict.apply(&s).unwrap()).unwrap();
        let sol = omp(&dict, &y, 3, DEFAULT_TOL).unwrap();

        // Independent oracle: least squares on the true one-atom support
        // is just a projection onto column 3.
        let col = dict.col(3);
        let oracle = dot(col, y.as_slice()) / dot(col, col);
        assert!((sol.coefficients[3] - oracle).abs() <= 1e-9 * oracle.abs());
        assert!((sol.coefficients[3] - 4.0).abs() <= 1e-9 * 4.0);
        for j in 0..n {
            if j != 3 {
                assert!(sol.coefficients[j].abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn exact_support_recovery_rate() {
        let n = 256;
        let m = 128;
        let t = 8;
        let mut rng = RngStream::new(2024);
        let mut exact = 0;
        for trial in 0..100u64 {
            let phi = gaussian_matrix(5000 + trial, m, n).unwrap();
            let dict = effective_dictionary(&phi, n).unwrap();
            let s = sparse_coeffs(n, t, &mut rng);
            let y = DenseVector::new(dict.apply(s.as_slice()).unwrap()).unwrap();
            let sol = omp(&dict, &y, t, DEFAULT_TOL).unwrap();
            let mut want: Vec<usize> = (0..n).filter(|&j| s[j] != 0.0).collect();
            let mut got = sol.support.clone();
            want.sort_unstable();
            got.sort_unstable();
            if want == got {
                exact += 1;
            }
        }
        assert!(exact >= 99, "exact support recovered in {exact}/100 trials");
    }

    #[test]
    fn residual_is_monotone_nonincreasing() {
        let n = 64;
        let phi = gaussian_matrix(31, 32, n).unwrap();
        let dict = effective_dictionary(&phi, n).unwrap();
        let mut rng = RngStream::new(8);
        let y = DenseVector::new((0..32).map(|_| rng.next_uniform() - 0.5).collect()).unwrap();
        let sol = omp(&dict, &y, 32, 0.0).unwrap();
        let mut prev = y.norm2();
        for &r in &sol.residual_history {
            assert!(r <= prev + 1e-12, "residual rose from {prev} to {r}");
            prev = r;
        }
    }

    #[test]
    fn omp_validates_inputs() {
        let phi = gaussian_matrix(1, 8, 16).unwrap();
        let dict = effective_dictionary(&phi, 16).unwrap();
        let y = DenseVector::zeros(8);
        assert!(omp(&dict, &y, 0, DEFAULT_TOL).is_err());
        assert!(omp(&dict, &y, 9, DEFAULT_TOL).is_err());
        assert!(omp(&dict, &DenseVector::zeros(7), 2, DEFAULT_TOL).is_err());
    }

    #[test]
    fn rank_deficient_dictionary_flags_and_stops() {
        // Two identical columns: after the first is taken, re-selecting
        // its twin must trip the dependence guard, not crash.
        let m = 4;
        let col = vec![1.0, 2.0, -1.0, 0.5];
        let mut cols = col.clone();
        cols.extend_from_slice(&col);
        let dict = EffectiveDictionary::from_columns(m, 2, cols).unwrap();
        let y = DenseVector::new(col.clone()).unwrap();
        // tol = 0 forces a second iteration attempt.
        let sol = omp(&dict, &y, 2, 0.0).unwrap();
        assert_eq!(sol.support.len(), 1);
        assert!(sol.rank_deficient || sol.residual_norm <= 1e-12);
    }

    #[test]
    fn cloud_decode_inverts_encrypted_encoding() {
        let n = 64;
        let m = 32;
        let mut rng = RngStream::new(55);
        for trial in 0..20u64 {
            let phi = gaussian_matrix(900 + trial, m, n).unwrap();
            let key = EncryptionKey::new(
                trial,
                n,
                SelectionStrategy::Uniform,
                AmplitudeMode::On { alpha_min: 0.3 },
            )
            .unwrap();
            let s = sparse_coeffs(n, 4, &mut rng);
            let f = dct_inverse(&s).unwrap();
            let y = encode_block(&f, &phi, &key, 0).unwrap();
            let sol = cloud_decode(&y, &phi, default_t_max(m), DEFAULT_TOL).unwrap();

            // The cloud sees the *encrypted* coefficients.
            let perm = derive_permutation(&key, 0, n).unwrap();
            let expected = crate::cipher::encrypt_coeffs(&s, &perm).unwrap();
            let scale = expected.norm2();
            for j in 0..n {
                assert!(
                    (sol.coefficients[j] - expected[j]).abs() <= 1e-6 * scale,
                    "trial {trial} coeff {j}"
                );
            }

            // And the user undoes it exactly.
            let f_hat = user_recover(&sol.coefficients, &key, 0).unwrap();
            let fscale = f.norm2();
            for i in 0..n {
                assert!((f_hat[i] - f[i]).abs() <= 1e-6 * fscale);
            }
        }
    }

    #[test]
    fn identity_key_pipeline_matches_plain_coefficients() {
        let n = 64;
        let m = 32;
        let phi = gaussian_matrix(70, m, n).unwrap();
        let mut rng = RngStream::new(4);
        let s = sparse_coeffs(n, 5, &mut rng);
        let f = dct_inverse(&s).unwrap();
        let y = encode_block(&f, &phi, &EncryptionKey::identity(0), 0).unwrap();
        let sol = cloud_decode(&y, &phi, default_t_max(m), DEFAULT_TOL).unwrap();
        let plain = dct_forward(&f).unwrap();
        let scale = plain.norm2();
        for j in 0..n {
            assert!((sol.coefficients[j] - plain[j]).abs() <= 1e-6 * scale);
        }
        // With the identity key the user view *is* the naive view.
        let user = user_recover(&sol.coefficients, &EncryptionKey::identity(0), 0).unwrap();
        let naive = naive_reconstruct(&sol.coefficients).unwrap();
        assert_eq!(user, naive);
    }

    #[test]
    fn naive_reconstruct_edges() {
        let z = naive_reconstruct(&CoefficientVector::zeros(16)).unwrap();
        assert!(z.as_slice().iter().all(|v| *v == 0.0));

        let mut rng = RngStream::new(91);
        let f = DenseVector::new((0..16).map(|_| rng.next_uniform()).collect()).unwrap();
        let s = dct_forward(&f).unwrap();
        let back = naive_reconstruct(&s).unwrap();
        for i in 0..16 {
            assert!((back[i] - f[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn user_recover_rejects_oversized_k() {
        let key =
            EncryptionKey::new(3, 32, SelectionStrategy::Uniform, AmplitudeMode::Off).unwrap();
        let s = CoefficientVector::zeros(16);
        assert!(user_recover(&s, &key, 0).is_err());
    }
}
