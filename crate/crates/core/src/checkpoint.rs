//! Binary checkpoints.
//!
//! Layout, all little-endian: magic `EHDS`, `u32` format version, `u32` n,
//! `f64` t, `u64` step index, then the samples of `u.x`, `u.y`, `u.z`, `v`,
//! `w` as `f64` in x-fastest order, followed by a `u32` CRC-32 of every
//! preceding byte.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::solver::State;
use crate::spectral::{Grid, RealField, SpectralError, VectorField};

pub const MAGIC: &[u8; 4] = b"EHDS";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint truncated or oversized: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Crc { stored: u32, computed: u32 },
    #[error("non-finite sample in checkpoint field {field}")]
    NonFinite { field: &'static str },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn payload<T: Scalar>(state: &State<T>) -> Vec<u8> {
    let n = state.grid().n();
    let mut out = Vec::with_capacity(HEADER_LEN + 5 * 8 * n * n * n + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&state.t.as_f64().to_le_bytes());
    out.extend_from_slice(&state.step_index.to_le_bytes());
    for f in [&state.u.x, &state.u.y, &state.u.z, &state.v, &state.w] {
        for &x in f.samples() {
            out.extend_from_slice(&x.as_f64().to_le_bytes());
        }
    }
    out
}

/// CRC-32 of the checkpoint payload of `state`.
pub fn state_checksum<T: Scalar>(state: &State<T>) -> u32 {
    crc32fast::hash(&payload(state))
}

pub fn encode<T: Scalar>(state: &State<T>) -> Vec<u8> {
    let mut out = payload(state);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> [u8; N] {
    let out = bytes[*at..*at + N].try_into().expect("length checked");
    *at += N;
    out
}

pub fn decode<T: Scalar>(bytes: &[u8]) -> Result<State<T>, CheckpointError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(CheckpointError::Length {
            expected: HEADER_LEN + 4,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut at = 4;
    let version = u32::from_le_bytes(take(bytes, &mut at));
    if version != FORMAT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let n = u32::from_le_bytes(take(bytes, &mut at)) as usize;
    let grid = Grid::<T>::new(n)?;
    let expected = HEADER_LEN + 5 * 8 * grid.len() + 4;
    if bytes.len() != expected {
        return Err(CheckpointError::Length {
            expected,
            found: bytes.len(),
        });
    }
    let body = &bytes[..expected - 4];
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(CheckpointError::Crc { stored, computed });
    }
    let t = f64::from_le_bytes(take(bytes, &mut at));
    let step_index = u64::from_le_bytes(take(bytes, &mut at));
    let mut fields = Vec::with_capacity(5);
    for name in ["u.x", "u.y", "u.z", "v", "w"] {
        let samples: Vec<T> = (0..grid.len())
            .map(|_| T::from_f64(f64::from_le_bytes(take(bytes, &mut at))).unwrap_or_else(T::nan))
            .collect();
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(CheckpointError::NonFinite { field: name });
        }
        fields.push(RealField::from_samples(&grid, samples)?);
    }
    if !t.is_finite() {
        return Err(CheckpointError::NonFinite { field: "t" });
    }
    let w = fields.pop().expect("five fields");
    let v = fields.pop().expect("five fields");
    let z = fields.pop().expect("five fields");
    let y = fields.pop().expect("five fields");
    let x = fields.pop().expect("five fields");
    let mut state = State::new(VectorField::new(x, y, z), v, w)?;
    state.t = T::lit(t);
    state.step_index = step_index;
    Ok(state)
}

pub fn save<T: Scalar>(state: &State<T>, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, encode(state))?;
    Ok(())
}

pub fn load<T: Scalar>(path: &Path) -> Result<State<T>, CheckpointError> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    fn sample_state(seed: u64) -> State<f64> {
        let g = Grid::<f64>::new(8).unwrap();
        let mut s = presets::random_smooth(&g, seed, 1.3, 2.0).unwrap();
        s.t = 0.125 + seed as f64 * 1e-3;
        s.step_index = seed;
        s
    }

    fn bits(s: &State<f64>) -> Vec<u64> {
        [&s.u.x, &s.u.y, &s.u.z, &s.v, &s.w]
            .iter()
            .flat_map(|f| f.samples().iter().map(|x| x.to_bits()))
            .collect()
    }

    #[test]
    fn header_layout() {
        let s = sample_state(3);
        let b = encode(&s);
        assert_eq!(&b[..4], b"EHDS");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 8);
        assert_eq!(b.len(), HEADER_LEN + 5 * 8 * 512 + 4);
        assert_eq!(crc32fast::hash(&b[..b.len() - 4]), state_checksum(&s));
    }

    #[test]
    fn corruption_is_detected() {
        let mut b = encode(&sample_state(4));
        let mid = b.len() / 2;
        b[mid] ^= 0x40;
        assert!(matches!(decode::<f64>(&b), Err(CheckpointError::Crc { .. })));
        let b = encode(&sample_state(4));
        assert!(matches!(
            decode::<f64>(&b[..b.len() - 1]),
            Err(CheckpointError::Length { .. })
        ));
        let mut c = b.clone();
        c[0] = b'X';
        assert!(matches!(decode::<f64>(&c), Err(CheckpointError::BadMagic)));
        let mut c = b.clone();
        c[4] = 2;
        assert!(matches!(decode::<f64>(&c), Err(CheckpointError::UnsupportedVersion(2))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.ckpt");
        let s = sample_state(5);
        save(&s, &path).unwrap();
        let r: State<f64> = load(&path).unwrap();
        assert_eq!(bits(&s), bits(&r));
        assert_eq!(r.t.to_bits(), s.t.to_bits());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), t in -1e6f64..1e6) {
            let mut s = sample_state(seed % 1000);
            s.t = t;
            s.step_index = seed;
            let r: State<f64> = decode(&encode(&s)).unwrap();
            prop_assert_eq!(bits(&s), bits(&r));
            prop_assert_eq!(r.t.to_bits(), t.to_bits());
            prop_assert_eq!(r.step_index, seed);
        }
    }
}
