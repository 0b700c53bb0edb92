//! SNE1 binary embedding files.
//!
//! Layout: magic `SNE1`, version (u32 LE, = 1), dim (u32 LE), count (u64 LE),
//! then `count * dim` f32 LE values, row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::novelty::EmbeddingSequence;

pub const SNE_MAGIC: [u8; 4] = *b"SNE1";
pub const SNE_VERSION: u32 = 1;
pub const SNE_EXTENSION: &str = "sne1";
const HEADER_LEN: usize = 20;

pub fn encode_embeddings(seq: &EmbeddingSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + seq.as_flat().len() * 4);
    out.extend_from_slice(&SNE_MAGIC);
    out.extend_from_slice(&SNE_VERSION.to_le_bytes());
    out.extend_from_slice(&(seq.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(seq.len() as u64).to_le_bytes());
    for &x in seq.as_flat() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    out
}

pub fn decode_embeddings(book_id: impl Into<String>, bytes: &[u8]) -> Result<EmbeddingSequence> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != SNE_MAGIC {
            return Err(Error::BadMagic {
                found: bytes[..4].try_into().expect("4 bytes"),
            });
        }
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != SNE_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != SNE_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let dim = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as u64;
    let count = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    let expected = count
        .checked_mul(dim)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| {
            Error::InvalidRecord(format!("header overflow: dim {dim}, count {count}"))
        })?;
    if (payload.len() as u64) < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len() as u64,
        });
    }
    let data: Vec<f64> = payload[..expected as usize]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    EmbeddingSequence::new(book_id, dim as usize, data)
}

pub fn write_embeddings(seq: &EmbeddingSequence, path: &Path) -> Result<()> {
    let wrap = |source| Error::WriteFailure {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    w.write_all(&encode_embeddings(seq)).map_err(wrap)?;
    w.flush().map_err(wrap)
}

/// Reads an SNE1 file; the book id is taken from the file stem.
pub fn read_embeddings(path: &Path) -> Result<EmbeddingSequence> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_embeddings(id, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> EmbeddingSequence {
        EmbeddingSequence::from_rows("7", &[vec![0.1, -0.2, 0.3], vec![1.0, 0.0, -1.5]]).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode_embeddings(&sample());
        assert_eq!(&bytes[..4], b"SNE1");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[3, 0, 0, 0]);
        assert_eq!(&bytes[12..20], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(bytes.len(), 20 + 6 * 4);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_embeddings(&sample());
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(
            matches!(decode_embeddings("x", &bytes), Err(Error::BadMagic { found }) if &found == b"XXXX")
        );
    }

    #[test]
    fn bad_version() {
        let mut bytes = encode_embeddings(&sample());
        bytes[4] = 2;
        assert!(matches!(
            decode_embeddings("x", &bytes),
            Err(Error::VersionUnsupported(2))
        ));
    }

    #[test]
    fn truncated_rows() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 1.0]).collect();
        let seq = EmbeddingSequence::from_rows("t", &rows).unwrap();
        let bytes = encode_embeddings(&seq);
        let cut = &bytes[..bytes.len() - 2 * 4];
        assert!(matches!(
            decode_embeddings("t", cut),
            Err(Error::Truncated {
                expected: 80,
                found: 72
            })
        ));
        assert!(matches!(
            decode_embeddings("t", &bytes[..10]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("123.sne1");
        write_embeddings(&sample(), &path).unwrap();
        let back = read_embeddings(&path).unwrap();
        assert_eq!(back.book_id(), "123");
        assert_eq!(back.dim(), 3);
        assert_eq!(back.len(), 2);
    }

    proptest! {
        #[test]
        fn round_trip_to_f32(dim in 1usize..12, rows in 0usize..20, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f64> = (0..dim * rows).map(|_| rng.random_range(-10.0..10.0)).collect();
            let seq = EmbeddingSequence::new("p", dim, data.clone()).unwrap();
            let back = decode_embeddings("p", &encode_embeddings(&seq)).unwrap();
            prop_assert_eq!(back.len(), rows);
            for (a, b) in data.iter().zip(back.as_flat()) {
                prop_assert_eq!(*b, f64::from(*a as f32));
            }
        }
    }
}
