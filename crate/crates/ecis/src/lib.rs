//! eCIS: encrypressive cloud-assisted image service.
//!
//! Joint image compression and encryption via compressive sensing. A
//! low-power *sampler* turns each image block into `m < n` Gaussian
//! measurements of a permutation-encrypted DCT coefficient vector, an
//! untrusted *cloud* runs the expensive sparse recovery without ever
//! holding key material, and the *end user* finishes with a cheap inverse
//! permutation plus inverse DCT.
//!
//! The crate is organized around those roles:
//!
//! - [`signal`] — deterministic randomness, images, vectors, the seeded
//!   Gaussian measurement matrix.
//! - [`transform`] — block decomposition and the orthonormal DCT-II basis.
//! - [`cipher`] — k-secure permutation keys, amplitude randomization, and
//!   coefficient-domain encryption.
//! - [`sensing`] — the sampler role: `encode_block` and the unencrypted
//!   baseline `plain_encode`.
//! - [`recovery`] — the cloud role (OMP) and the end-user role
//!   (`user_recover`), plus the attacker's `naive_reconstruct` view.
//! - [`security`] — counting formulas, success-probability bounds,
//!   minimum security levels, and a plug-in mutual-information estimator.
//! - [`container`] — bit-exact `.ecis` / `.ekey` / coefficient file
//!   formats and binary PGM image I/O.
//! - [`metrics`], [`bench`] — PSNR and the three-scheme timing harness.
//! - [`synthetic`] — procedural test imagery for the examples and tests.
//!
//! Start with the runnable examples, one per capability:
//!
//! ```bash
//! cargo run --example pipeline_roundtrip
//! cargo run --example block_size_study
//! cargo run --example security_levels
//! cargo run --example roi_encryption
//! cargo run --example amplitude_encryption
//! cargo run --example security_analysis
//! cargo run --example mutual_information
//! cargo run --example benchmark
//! ```
//!
//! The same operations are scriptable through the thin `ecis` binary
//! (`keygen`, `encode`, `cloud-decode`, `recover`, `analyze`, `bench`).

pub mod bench;
pub mod cipher;
pub mod container;
pub mod error;
pub mod metrics;
pub mod recovery;
pub mod security;
pub mod sensing;
pub mod signal;
pub mod synthetic;
pub mod transform;

pub use cipher::{
    decrypt_coeffs, derive_permutation, encrypt_coeffs, AmplitudeMode, BlockPermutation,
    EncryptionKey, SelectionStrategy,
};
pub use container::{EcisContainer, EcisKeyFile, RoiMask};
pub use error::{EcisError, Result};
pub use metrics::psnr;
pub use recovery::{cloud_decode, naive_reconstruct, omp, user_recover, OmpSolution};
pub use sensing::{effective_dictionary, encode_block, plain_encode, EffectiveDictionary};
pub use signal::{
    gaussian_matrix, CoefficientVector, DenseVector, PixelImage, RngStream, SensingMatrix,
};
pub use transform::{dct_forward, dct_inverse, merge_blocks, split_blocks, BlockGrid, DctBasis};
