//! The sampler role: compress-and-encrypt a block into m measurements.
//!
//! Encrypted encoding computes `y' = Phi * idct(encrypt(dct(f)))`, which
//! equals `(Phi Psi) s'` up to floating-point association; with the
//! identity key it reduces to the plain CS encoding `y = Phi f`. Both
//! encoders emit exactly m numbers, so encryption adds no transmission
//! cost.

use crate::cipher::{derive_permutation, encrypt_coeffs, EncryptionKey};
use crate::error::{EcisError, Result};
use crate::signal::{dot, DenseVector, SensingMatrix};
use crate::transform::DctBasis;

/// The m x n product `D = Phi Psi` the cloud decodes against, stored
/// column-major for the correlation-heavy pursuit loop.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDictionary {
    m: usize,
    n: usize,
    cols: Vec<f64>,
}

impl EffectiveDictionary {
    /// Build from explicit column-major entries (`cols[j * m + i]`).
    pub fn from_columns(m: usize, n: usize, cols: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 || cols.len() != m * n {
            return Err(EcisError::InvalidDimensions(format!(
                "{} entries for an {m}x{n} dictionary",
                cols.len()
            )));
        }
        if cols.iter().any(|v| !v.is_finite()) {
            return Err(EcisError::InvalidInput(
                "dictionary contains a non-finite entry".into(),
            ));
        }
        Ok(EffectiveDictionary { m, n, cols })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Column `j` as a contiguous slice of length m.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.cols[j * self.m + i]
    }

    /// y = D s.
    pub fn apply(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.len() != self.n {
            return Err(EcisError::InvalidDimensions(format!(
                "dictionary has {} columns, input has {}",
                self.n,
                s.len()
            )));
        }
        let mut y = vec![0.0; self.m];
        for (j, &c) in s.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (yi, dij) in y.iter_mut().zip(self.col(j)) {
                *yi += dij * c;
            }
        }
        Ok(y)
    }
}

/// Build `D = Phi Psi` with Psi the orthonormal DCT-II synthesis matrix.
/// Row i of D is the forward DCT of row i of Phi, so the same seed always
/// reproduces the same dictionary bit for bit.
pub fn effective_dictionary(phi: &SensingMatrix, n: usize) -> Result<EffectiveDictionary> {
    if phi.n() != n {
        return Err(EcisError::InvalidDimensions(format!(
            "matrix has {} columns, requested n = {}",
            phi.n(),
            n
        )));
    }
    let basis = DctBasis::new(n)?;
    let m = phi.m();
    let mut cols = vec![0.0; m * n];
    for i in 0..m {
        let row = basis.forward_slice(phi.row(i));
        for (j, v) in row.into_iter().enumerate() {
            cols[j * m + i] = v;
        }
    }
    Ok(EffectiveDictionary { m, n, cols })
}

/// Encrypt-and-compress one block: forward DCT, coefficient permutation,
/// then measurement. Propagates cipher errors (bad k, missing weights).
pub fn encode_block(
    f_block: &DenseVector,
    phi: &SensingMatrix,
    key: &EncryptionKey,
    block_index: usize,
) -> Result<DenseVector> {
    let n = f_block.len();
    if phi.n() != n {
        return Err(EcisError::InvalidDimensions(format!(
            "block length {} vs matrix columns {}",
            n,
            phi.n()
        )));
    }
    let basis = DctBasis::new(n)?;
    let coeffs = basis.forward(f_block)?;
    let perm = derive_permutation(key, block_index, n)?;
    let encrypted = encrypt_coeffs(&coeffs, &perm)?;
    let scrambled_block = basis.inverse(&encrypted)?;
    Ok(DenseVector::from_computed(
        phi.apply(scrambled_block.as_slice())?,
    ))
}

/// Plain CS encoding `y = Phi f`, the unencrypted baseline.
pub fn plain_encode(f_block: &DenseVector, phi: &SensingMatrix) -> Result<DenseVector> {
    if phi.n() != f_block.len() {
        return Err(EcisError::InvalidDimensions(format!(
            "block length {} vs matrix columns {}",
            f_block.len(),
            phi.n()
        )));
    }
    Ok(DenseVector::from_computed(
        (0..phi.m())
            .map(|i| dot(phi.row(i), f_block.as_slice()))
            .collect(),
    ))
}
