//! Bit-exact file formats so the three roles can run as separate
//! processes.
//!
//! All multi-byte integers are little-endian, measurements and
//! coefficients are IEEE-754 f64, and payloads carry a trailing CRC-32.
//!
//! `.ecis` (measurements, public):
//! `"ECIS" | u16 version | u32 orig_w | u32 orig_h | u16 block_w |
//!  u16 block_h | u32 m | u64 phi_seed | u8 flags (bit0 amplitude-on) |
//!  u32 block_count | block_count * m * f64 | u32 crc32(payload)`
//!
//! `.ekey` (the shared secret):
//! `"EKEY" | u16 version | u64 seed | u32 k | u8 strategy | u8 amplitude |
//!  f64 alpha_min | u32 roi_block_count | ceil(count/8) mask bytes`
//!
//! `.ecof` (cloud output, recovered coefficient vectors):
//! `"ECOF" | u16 version | u32 orig_w | u32 orig_h | u16 block_w |
//!  u16 block_h | u32 block_count | block_count * n * f64 | u32 crc32`
//!
//! The measurement container deliberately has no key fields: everything
//! the cloud needs is public, and nothing it must not have is present.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::cipher::{AmplitudeMode, EncryptionKey, SelectionStrategy, DEFAULT_ALPHA_MIN};
use crate::error::{EcisError, Result};
use crate::signal::{CoefficientVector, DenseVector, PixelImage};

pub const CONTAINER_VERSION: u16 = 1;
pub const KEY_VERSION: u16 = 1;
pub const COEFF_VERSION: u16 = 1;

const ECIS_MAGIC: &[u8; 4] = b"ECIS";
const EKEY_MAGIC: &[u8; 4] = b"EKEY";
const ECOF_MAGIC: &[u8; 4] = b"ECOF";

// ---------------------------------------------------------------------
// byte-level helpers

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Cursor { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(EcisError::Truncated(format!(
                "{what}: need {n} bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn expect_magic(cur: &mut Cursor, magic: &'static [u8; 4], name: &'static str) -> Result<()> {
    // A short or empty file is a magic failure, not a truncation: there
    // is no container to be truncated yet.
    let got = cur
        .take(4, "magic")
        .map_err(|_| EcisError::BadMagic { expected: name })?;
    if got != magic {
        return Err(EcisError::BadMagic { expected: name });
    }
    Ok(())
}

// ---------------------------------------------------------------------
// ROI mask

/// Which blocks are in the encryption region of interest. An empty mask
/// means every block is encrypted; a sized mask must match the
/// container's block count exactly, bit 1 = encrypted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiMask {
    block_count: u32,
    bits: Vec<u8>,
}

impl RoiMask {
    /// Encrypt every block (no explicit mask stored).
    pub fn all_blocks() -> Self {
        RoiMask {
            block_count: 0,
            bits: Vec::new(),
        }
    }

    /// Mask of `block_count` zeros: nothing encrypted.
    pub fn none(block_count: u32) -> Self {
        RoiMask {
            block_count,
            bits: vec![0; (block_count as usize).div_ceil(8)],
        }
    }

    /// Mask with exactly the given block indices encrypted.
    pub fn from_indices(block_count: u32, indices: &[usize]) -> Result<Self> {
        let mut mask = RoiMask::none(block_count);
        for &i in indices {
            if i >= block_count as usize {
                return Err(EcisError::InvalidInput(format!(
                    "ROI block {i} outside the {block_count}-block grid"
                )));
            }
            mask.bits[i / 8] |= 1 << (i % 8);
        }
        Ok(mask)
    }

    /// True when the mask constrains specific blocks (non-empty).
    pub fn is_explicit(&self) -> bool {
        self.block_count != 0
    }

    pub fn block_count(&self) -> u32 {
        self.block_count
    }

    pub fn is_encrypted(&self, block_index: usize) -> bool {
        if !self.is_explicit() {
            return true;
        }
        if block_index >= self.block_count as usize {
            return false;
        }
        self.bits[block_index / 8] & (1 << (block_index % 8)) != 0
    }

    pub fn encrypted_count(&self) -> u32 {
        if !self.is_explicit() {
            return 0; // wildcard: count depends on the grid
        }
        (0..self.block_count as usize)
            .filter(|&i| self.is_encrypted(i))
            .count() as u32
    }
}

// ---------------------------------------------------------------------
// measurement container

/// Serialized per-block measurement vectors with all public decoding
/// metadata. Carries no key material.
#[derive(Debug, Clone, PartialEq)]
pub struct EcisContainer {
    pub orig_w: u32,
    pub orig_h: u32,
    pub block_w: u16,
    pub block_h: u16,
    pub m: u32,
    pub phi_seed: u64,
    pub amplitude_on: bool,
    measurements: Vec<DenseVector>,
}

impl EcisContainer {
    pub fn new(
        orig_w: u32,
        orig_h: u32,
        block_w: u16,
        block_h: u16,
        m: u32,
        phi_seed: u64,
        amplitude_on: bool,
        measurements: Vec<DenseVector>,
    ) -> Result<Self> {
        if orig_w == 0 || orig_h == 0 || block_w == 0 || block_h == 0 || m == 0 {
            return Err(EcisError::InvalidInput(
                "container dimensions must be positive".into(),
            ));
        }
        let expect = expected_block_count(orig_w, orig_h, block_w, block_h);
        if measurements.len() != expect {
            return Err(EcisError::InvalidInput(format!(
                "{} measurement vectors for a {}-block grid",
                measurements.len(),
                expect
            )));
        }
        if let Some(bad) = measurements.iter().find(|v| v.len() != m as usize) {
            return Err(EcisError::InvalidInput(format!(
                "measurement vector of length {} in a container with m = {m}",
                bad.len()
            )));
        }
        Ok(EcisContainer {
            orig_w,
            orig_h,
            block_w,
            block_h,
            m,
            phi_seed,
            amplitude_on,
            measurements,
        })
    }

    pub fn block_count(&self) -> usize {
        self.measurements.len()
    }

    pub fn n(&self) -> usize {
        self.block_w as usize * self.block_h as usize
    }

    pub fn measurements(&self) -> &[DenseVector] {
        &self.measurements
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut payload = Vec::with_capacity(self.measurements.len() * self.m as usize * 8);
        for block in &self.measurements {
            for v in block.as_slice() {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&payload);

        let mut out = Vec::with_capacity(payload.len() + 64);
        out.extend_from_slice(ECIS_MAGIC);
        out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
        out.extend_from_slice(&self.orig_w.to_le_bytes());
        out.extend_from_slice(&self.orig_h.to_le_bytes());
        out.extend_from_slice(&self.block_w.to_le_bytes());
        out.extend_from_slice(&self.block_h.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.phi_seed.to_le_bytes());
        out.push(u8::from(self.amplitude_on));
        out.extend_from_slice(&(self.measurements.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        expect_magic(&mut cur, ECIS_MAGIC, "ECIS")?;
        let version = cur.u16("version")?;
        if version != CONTAINER_VERSION {
            return Err(EcisError::UnknownVersion(version));
        }
        let orig_w = cur.u32("orig_w")?;
        let orig_h = cur.u32("orig_h")?;
        let block_w = cur.u16("block_w")?;
        let block_h = cur.u16("block_h")?;
        let m = cur.u32("m")?;
        let phi_seed = cur.u64("phi_seed")?;
        let flags = cur.u8("flags")?;
        let block_count = cur.u32("block_count")? as usize;

        let payload_len = block_count
            .checked_mul(m as usize)
            .and_then(|v| v.checked_mul(8))
            .ok_or_else(|| EcisError::Truncated("payload size overflow".into()))?;
        let payload = cur.take(payload_len, "measurement payload")?;
        let stored = cur.u32("crc")?;
        let computed = crc32fast::hash(payload);
        if stored != computed {
            return Err(EcisError::CrcMismatch { stored, computed });
        }
        if !cur.done() {
            return Err(EcisError::UnsupportedFormat(
                "trailing bytes after container".into(),
            ));
        }

        let mut measurements = Vec::with_capacity(block_count);
        let mut p = Cursor::new(payload);
        for _ in 0..block_count {
            let mut block = Vec::with_capacity(m as usize);
            for _ in 0..m {
                block.push(p.f64("measurement")?);
            }
            measurements.push(DenseVector::new(block)?);
        }
        EcisContainer::new(
            orig_w,
            orig_h,
            block_w,
            block_h,
            m,
            phi_seed,
            flags & 1 != 0,
            measurements,
        )
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_bytes())?)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

pub fn expected_block_count(orig_w: u32, orig_h: u32, block_w: u16, block_h: u16) -> usize {
    (orig_w as usize).div_ceil(block_w as usize) * (orig_h as usize).div_ceil(block_h as usize)
}

// ---------------------------------------------------------------------
// key file

/// On-disk form of the shared secret, plus the ROI mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EcisKeyFile {
    pub seed: u64,
    pub k: u32,
    pub weighted: bool,
    pub amplitude: bool,
    pub alpha_min: f64,
    pub roi: RoiMask,
}

impl EcisKeyFile {
    pub fn new(
        seed: u64,
        k: u32,
        weighted: bool,
        amplitude: bool,
        alpha_min: f64,
        roi: RoiMask,
    ) -> Result<Self> {
        if k == 1 {
            return Err(EcisError::InvalidKey(
                "k = 1 is not a valid security level".into(),
            ));
        }
        if !(alpha_min > 0.0 && alpha_min < 1.0) {
            return Err(EcisError::InvalidKey(format!(
                "alpha_min must lie in (0, 1), got {alpha_min}"
            )));
        }
        Ok(EcisKeyFile {
            seed,
            k,
            weighted,
            amplitude,
            alpha_min,
            roi,
        })
    }

    /// Materialize the in-memory key for blocks of length `n` (weighted
    /// keys derive their default weight vector from the block geometry).
    pub fn to_key(&self, n: usize, block_w: usize) -> Result<EncryptionKey> {
        let strategy = if self.weighted {
            SelectionStrategy::Weighted(crate::cipher::dct_energy_weights(n, block_w))
        } else {
            SelectionStrategy::Uniform
        };
        let amplitude = if self.amplitude {
            AmplitudeMode::On {
                alpha_min: self.alpha_min,
            }
        } else {
            AmplitudeMode::Off
        };
        EncryptionKey::new(self.seed, self.k as usize, strategy, amplitude)
    }

    /// Key applied to one block: the real key inside the ROI, the
    /// identity key outside it.
    pub fn key_for_block(
        &self,
        block_index: usize,
        n: usize,
        block_w: usize,
    ) -> Result<EncryptionKey> {
        if self.roi.is_encrypted(block_index) {
            self.to_key(n, block_w)
        } else {
            Ok(EncryptionKey::identity(self.seed))
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + self.roi.bits.len());
        out.extend_from_slice(EKEY_MAGIC);
        out.extend_from_slice(&KEY_VERSION.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.k.to_le_bytes());
        out.push(u8::from(self.weighted));
        out.push(u8::from(self.amplitude));
        out.extend_from_slice(&self.alpha_min.to_le_bytes());
        out.extend_from_slice(&self.roi.block_count.to_le_bytes());
        out.extend_from_slice(&self.roi.bits);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        expect_magic(&mut cur, EKEY_MAGIC, "EKEY")?;
        let version = cur.u16("version")?;
        if version != KEY_VERSION {
            return Err(EcisError::UnknownVersion(version));
        }
        let seed = cur.u64("seed")?;
        let k = cur.u32("k")?;
        let strategy = cur.u8("strategy")?;
        if strategy > 1 {
            return Err(EcisError::UnsupportedFormat(format!(
                "unknown selection strategy {strategy}"
            )));
        }
        let amplitude = cur.u8("amplitude")?;
        if amplitude > 1 {
            return Err(EcisError::UnsupportedFormat(format!(
                "unknown amplitude mode {amplitude}"
            )));
        }
        let alpha_min = cur.f64("alpha_min")?;
        let block_count = cur.u32("roi block count")?;
        let mask_len = (block_count as usize).div_ceil(8);
        let bits = cur.take(mask_len, "roi mask")?.to_vec();
        if !cur.done() {
            return Err(EcisError::UnsupportedFormat(
                "trailing bytes after key file".into(),
            ));
        }
        EcisKeyFile::new(
            seed,
            k,
            strategy == 1,
            amplitude == 1,
            alpha_min,
            RoiMask { block_count, bits },
        )
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_bytes())?)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

impl Default for EcisKeyFile {
    fn default() -> Self {
        EcisKeyFile {
            seed: 0,
            k: 0,
            weighted: false,
            amplitude: false,
            alpha_min: DEFAULT_ALPHA_MIN,
            roi: RoiMask::all_blocks(),
        }
    }
}

// ---------------------------------------------------------------------
// coefficient file (cloud output)

/// Per-block recovered coefficient vectors, as shipped from the cloud to
/// the end user.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFile {
    pub orig_w: u32,
    pub orig_h: u32,
    pub block_w: u16,
    pub block_h: u16,
    coefficients: Vec<CoefficientVector>,
}

impl CoefficientFile {
    pub fn new(
        orig_w: u32,
        orig_h: u32,
        block_w: u16,
        block_h: u16,
        coefficients: Vec<CoefficientVector>,
    ) -> Result<Self> {
        if orig_w == 0 || orig_h == 0 || block_w == 0 || block_h == 0 {
            return Err(EcisError::InvalidInput(
                "coefficient file dimensions must be positive".into(),
            ));
        }
        let expect = expected_block_count(orig_w, orig_h, block_w, block_h);
        if coefficients.len() != expect {
            return Err(EcisError::InvalidInput(format!(
                "{} coefficient vectors for a {}-block grid",
                coefficients.len(),
                expect
            )));
        }
        let n = block_w as usize * block_h as usize;
        if let Some(bad) = coefficients.iter().find(|v| v.len() != n) {
            return Err(EcisError::InvalidInput(format!(
                "coefficient vector of length {} in a grid with n = {n}",
                bad.len()
            )));
        }
        Ok(CoefficientFile {
            orig_w,
            orig_h,
            block_w,
            block_h,
            coefficients,
        })
    }

    pub fn n(&self) -> usize {
        self.block_w as usize * self.block_h as usize
    }

    pub fn block_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[CoefficientVector] {
        &self.coefficients
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.n();
        let mut payload = Vec::with_capacity(self.coefficients.len() * n * 8);
        for block in &self.coefficients {
            for v in block.as_slice() {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&payload);

        let mut out = Vec::with_capacity(payload.len() + 32);
        out.extend_from_slice(ECOF_MAGIC);
        out.extend_from_slice(&COEFF_VERSION.to_le_bytes());
        out.extend_from_slice(&self.orig_w.to_le_bytes());
        out.extend_from_slice(&self.orig_h.to_le_bytes());
        out.extend_from_slice(&self.block_w.to_le_bytes());
        out.extend_from_slice(&self.block_h.to_le_bytes());
        out.extend_from_slice(&(self.coefficients.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        expect_magic(&mut cur, ECOF_MAGIC, "ECOF")?;
        let version = cur.u16("version")?;
        if version != COEFF_VERSION {
            return Err(EcisError::UnknownVersion(version));
        }
        let orig_w = cur.u32("orig_w")?;
        let orig_h = cur.u32("orig_h")?;
        let block_w = cur.u16("block_w")?;
        let block_h = cur.u16("block_h")?;
        let block_count = cur.u32("block_count")? as usize;
        let n = block_w as usize * block_h as usize;
        let payload_len = block_count
            .checked_mul(n)
            .and_then(|v| v.checked_mul(8))
            .ok_or_else(|| EcisError::Truncated("payload size overflow".into()))?;
        let payload = cur.take(payload_len, "coefficient payload")?;
        let stored = cur.u32("crc")?;
        let computed = crc32fast::hash(payload);
        if stored != computed {
            return Err(EcisError::CrcMismatch { stored, computed });
        }
        if !cur.done() {
            return Err(EcisError::UnsupportedFormat(
                "trailing bytes after coefficient file".into(),
            ));
        }

        let mut coefficients = Vec::with_capacity(block_count);
        let mut p = Cursor::new(payload);
        for _ in 0..block_count {
            let mut block = Vec::with_capacity(n);
            for _ in 0..n {
                block.push(p.f64("coefficient")?);
            }
            coefficients.push(CoefficientVector::new(block)?);
        }
        CoefficientFile::new(orig_w, orig_h, block_w, block_h, coefficients)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_bytes())?)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

// ---------------------------------------------------------------------
// binary PGM (P5, maxval 255)

/// Read an 8-bit binary PGM. ASCII (P2) and color (P6) files are
/// rejected, as is any maxval other than 255.
pub fn read_pgm(path: &Path) -> Result<PixelImage> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    parse_pgm(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<PixelImage> {
    if bytes.len() < 2 {
        return Err(EcisError::BadMagic { expected: "P5" });
    }
    match &bytes[..2] {
        b"P5" => {}
        b"P2" => {
            return Err(EcisError::UnsupportedFormat(
                "ASCII PGM (P2); only binary P5 is supported".into(),
            ))
        }
        b"P6" => {
            return Err(EcisError::UnsupportedFormat(
                "color PPM (P6); only 8-bit grayscale P5 is supported".into(),
            ))
        }
        _ => return Err(EcisError::BadMagic { expected: "P5" }),
    }

    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and '#' comment lines between header tokens.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(EcisError::Truncated("PGM header".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| EcisError::UnsupportedFormat("non-ASCII PGM header".into()))?;
        *field = text
            .parse()
            .map_err(|_| EcisError::UnsupportedFormat("bad PGM header number".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(EcisError::UnsupportedFormat(format!(
            "PGM maxval {maxval}; only 255 is supported"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(EcisError::Truncated("PGM raster separator".into()));
    }
    pos += 1;
    let need = width * height;
    if bytes.len() < pos + need {
        return Err(EcisError::Truncated(format!(
            "PGM raster: need {need} bytes, have {}",
            bytes.len() - pos
        )));
    }
    PixelImage::new(width, height, bytes[pos..pos + need].to_vec())
}

/// Write a canonical binary PGM: `P5\n<w> <h>\n255\n` then the raster.
pub fn write_pgm(image: &PixelImage, path: &Path) -> Result<()> {
    Ok(fs::write(path, pgm_bytes(image))?)
}

pub fn pgm_bytes(image: &PixelImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(image.pixels());
    out
}
