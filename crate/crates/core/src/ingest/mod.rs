//! Loading external data into instances.

pub mod edges;
pub mod movielens;

pub use edges::{load_edge_graph, parse_edge_list, weighted_cascade_graph, EdgeList, EdgeListOptions};
pub use movielens::{build_movielens_instance, MovielensInstance, MovielensParams, NoiseScale, RatingsTable, GENRES};

use sha2::{Digest, Sha256};

/// Hex SHA-256 of the given byte chunks, in order.
pub fn fingerprint<'a>(chunks: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for c in chunks {
        h.update((c.len() as u64).to_le_bytes());
        h.update(c);
    }
    hex::encode(h.finalize())
}

/// Fingerprint of a float vector, exact to the bit.
pub fn fingerprint_f64(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_bits().to_le_bytes()).collect();
    fingerprint([bytes.as_slice()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprints_separate_chunk_boundaries() {
        assert_ne!(fingerprint([b"ab".as_slice(), b"c"]), fingerprint([b"a".as_slice(), b"bc"]));
        assert_eq!(fingerprint_f64(&[0.5]), fingerprint_f64(&[0.5]));
        assert_ne!(fingerprint_f64(&[0.0]), fingerprint_f64(&[-0.0]));
    }
}
