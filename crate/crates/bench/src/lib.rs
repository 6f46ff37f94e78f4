//! Deterministic input generators shared by the benchmark targets.

use augeval_core::hashing::SplitMix64;
use augeval_core::imageops::Raster;
use augeval_core::metrics::TokenSeq;

/// Seeded raster of the given dimensions.
pub fn bench_raster(seed: u64, width: u32, height: u32) -> Raster {
    let mut rng = SplitMix64::new(seed);
    let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
    while pixels.len() < width as usize * height as usize * 3 {
        pixels.extend_from_slice(&rng.next_u64().to_le_bytes());
    }
    pixels.truncate(width as usize * height as usize * 3);
    Raster::new(width, height, pixels).expect("bench raster is well-formed")
}

/// Synthetic candidate/reference corpus with overlapping vocabulary,
/// `pairs` pairs of roughly `len` tokens each.
pub fn bench_corpus(seed: u64, pairs: usize, len: usize) -> Vec<(TokenSeq, TokenSeq)> {
    const WORDS: [&str; 16] = [
        "the", "chest", "holds", "golden", "coins", "behind", "waterfall", "guard", "bridge",
        "boss", "drops", "rare", "amulet", "door", "lever", "key",
    ];
    let mut rng = SplitMix64::new(seed);
    let mut word = move || WORDS[(rng.next_u64() % WORDS.len() as u64) as usize];
    (0..pairs)
        .map(|_| {
            let reference: Vec<&str> = (0..len).map(|_| word()).collect();
            // Candidate shares a prefix with the reference and diverges after.
            let mut candidate = reference[..len / 2].to_vec();
            candidate.extend((0..len / 2).map(|_| word()));
            (
                TokenSeq::from_tokens(candidate.iter().copied()),
                TokenSeq::from_tokens(reference.iter().copied()),
            )
        })
        .collect()
}
