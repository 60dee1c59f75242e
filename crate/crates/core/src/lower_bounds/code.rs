//! Binary codes with large pairwise Hamming distance (Varshamov–Gilbert).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::LowerBoundError;

/// Words of length `m ≤ 64`, bit `i` of each `u64` being coordinate `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinaryCode {
    pub m: usize,
    pub words: Vec<u64>,
    /// Smallest pairwise Hamming distance (`m + 1` for a single word).
    pub min_distance: usize,
}

impl BinaryCode {
    /// Required size `1 + 2^{m/8}`.
    pub fn size_target(m: usize) -> f64 {
        1.0 + 2f64.powf(m as f64 / 8.0)
    }

    /// Required distance `⌈m/8⌉`.
    pub fn distance_target(m: usize) -> usize {
        m.div_ceil(8)
    }

    /// Bit `i` of word `k`.
    pub fn bit(&self, k: usize, i: usize) -> bool {
        self.words[k] >> i & 1 == 1
    }

    /// Exhaustive pairwise scan: recomputes the minimum distance and checks
    /// both size and distance requirements.
    pub fn certify(&self) -> bool {
        let mut min = self.m + 1;
        for (i, a) in self.words.iter().enumerate() {
            for b in &self.words[i + 1..] {
                min = min.min((a ^ b).count_ones() as usize);
            }
        }
        let fits = self.m == 64 || self.words.iter().all(|w| w >> self.m == 0);
        fits && min == self.min_distance && self.words.len() as f64 >= Self::size_target(self.m) && min >= Self::distance_target(self.m)
    }
}

fn min_pairwise(words: &[u64], m: usize) -> usize {
    let mut min = m + 1;
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            min = min.min((a ^ b).count_ones() as usize);
        }
    }
    min
}

/// Largest `m` scanned in lexicographic order; longer words use seeded
/// random candidates.
const LEXICOGRAPHIC_LIMIT: usize = 24;

/// Candidate budget for the random greedy pass.
const RANDOM_CANDIDATES: usize = 1 << 20;

/// A code of length `m` with at least `1 + 2^{m/8}` words at pairwise
/// distance at least `⌈m/8⌉`. For `m ≤ 8` this is all of `{0,1}^m`; longer
/// codes are built greedily, accepting each candidate that keeps the
/// distance, until the size is reached.
pub fn vg_code(m: usize) -> Result<BinaryCode, LowerBoundError> {
    if !(2..=64).contains(&m) {
        return Err(LowerBoundError::InvalidParameter(format!("vg_code supports 2 <= m <= 64, got {m}")));
    }
    if m <= 8 {
        let words: Vec<u64> = (0..1u64 << m).collect();
        return Ok(BinaryCode { m, min_distance: 1, words });
    }
    let need = BinaryCode::size_target(m).ceil() as usize;
    let dist = BinaryCode::distance_target(m);
    let mut words: Vec<u64> = Vec::with_capacity(need);
    let offer = |w: u64, words: &mut Vec<u64>| {
        if words.iter().all(|v| ((v ^ w).count_ones() as usize) >= dist) {
            words.push(w);
        }
        words.len() >= need
    };
    let mut done = false;
    if m <= LEXICOGRAPHIC_LIMIT {
        for w in 0..1u64 << m {
            if offer(w, &mut words) {
                done = true;
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
        let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        for _ in 0..RANDOM_CANDIDATES {
            if offer(rng.gen::<u64>() & mask, &mut words) {
                done = true;
                break;
            }
        }
    }
    // A counting argument guarantees success for every m ≤ 64.
    assert!(done, "greedy code construction stalled at {} of {need} words for m = {m}", words.len());
    let min_distance = min_pairwise(&words, m);
    Ok(BinaryCode { m, words, min_distance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lengths_use_the_full_cube() {
        assert_eq!(vg_code(2).unwrap().words.len(), 4);
        let c = vg_code(8).unwrap();
        assert_eq!(c.words.len(), 256);
        assert!(c.min_distance >= 1 && c.certify());
    }

    #[test]
    fn length_sixteen() {
        let c = vg_code(16).unwrap();
        assert!(c.words.len() >= 5);
        // Independent brute-force distance check over bit vectors.
        for i in 0..c.words.len() {
            for j in i + 1..c.words.len() {
                let diff = (0..16).filter(|&b| c.bit(i, b) != c.bit(j, b)).count();
                assert!(diff >= 2);
            }
        }
        assert!(c.certify());
    }

    #[test]
    fn all_supported_lengths_certify() {
        for m in 2..=64 {
            let c = vg_code(m).unwrap();
            assert!(c.certify(), "m = {m}");
        }
        assert!(vg_code(1).is_err());
        assert!(vg_code(65).is_err());
    }

    #[test]
    fn certify_rejects_tampered_codes() {
        let mut c = vg_code(16).unwrap();
        c.words[1] = c.words[0] ^ 1;
        assert!(!c.certify());
    }
}
