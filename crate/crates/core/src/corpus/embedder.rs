//! Deterministic bag-of-tokens hashing embedder for offline runs and tests.

pub const DEFAULT_HASH_DIM: usize = 64;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded FNV-1a followed by a splitmix64 finalizer.
pub fn token_hash(token: &str, seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ splitmix64(seed);
    for b in token.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h)
}

pub fn tokenize(paragraph: &str) -> impl Iterator<Item = String> + '_ {
    paragraph
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Signed feature hashing of lower-cased alphanumeric tokens, L2-normalized.
/// Paragraphs without tokens (or whose counts cancel) map to `e0`.
pub fn hash_embedder(paragraph: &str, dim: usize, seed: u64) -> Vec<f64> {
    let dim = dim.max(2);
    let mut v = vec![0.0; dim];
    for token in tokenize(paragraph) {
        let h = token_hash(&token, seed);
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[(h % dim as u64) as usize] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        v[0] = 1.0;
        return v;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    v
}
