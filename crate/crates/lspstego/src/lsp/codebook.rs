//! Split vector-quantization codebooks: three sub-codebooks of 256 entries
//! with dimensions 3, 3 and 4.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::{CODEBOOK_SIZE, SUB_DIMS};

/// Residual interval covered by the synthetic codebooks, in radians.
pub const SYNTHETIC_INTERVAL: (f64, f64) = (-0.6, 0.6);

/// One 256-entry sub-codebook of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SubCodebook {
    dim: usize,
    /// 256 * dim values, entry-major.
    values: Vec<f64>,
}

impl SubCodebook {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self, String> {
        if values.len() != CODEBOOK_SIZE * dim {
            return Err(format!(
                "sub-codebook of dimension {dim} needs {} values, got {}",
                CODEBOOK_SIZE * dim,
                values.len()
            ));
        }
        Ok(Self { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, index: usize) -> &[f64] {
        &self.values[index * self.dim..(index + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The full (3, 3, 4) split codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    subs: [SubCodebook; 3],
}

impl Codebook {
    pub fn new(subs: [SubCodebook; 3]) -> Result<Self, String> {
        for (m, sub) in subs.iter().enumerate() {
            if sub.dim() != SUB_DIMS[m] {
                return Err(format!(
                    "sub-codebook {m} has dimension {}, expected {}",
                    sub.dim(),
                    SUB_DIMS[m]
                ));
            }
        }
        Ok(Self { subs })
    }

    pub fn sub(&self, m: usize) -> &SubCodebook {
        &self.subs[m]
    }

    /// Concatenate the three codewords selected by an index triple into one
    /// 10-dimensional vector.
    pub fn concat(&self, indices: [u8; 3]) -> [f64; 10] {
        let mut out = [0.0f64; 10];
        let mut offset = 0;
        for (m, &idx) in indices.iter().enumerate() {
            let e = self.subs[m].entry(idx as usize);
            out[offset..offset + e.len()].copy_from_slice(e);
            offset += e.len();
        }
        out
    }
}

/// Deterministic codebook generator for desk-scale experiments.
///
/// Entries follow smooth curves of the entry index: the first component is
/// a monotone grid over the interval and the remaining components are
/// low-frequency sinusoids with a small seeded dither. Neighboring indices
/// therefore hold similar codewords, mimicking the monotone/continuous
/// layout of real LSP codebooks that makes a near-index swap cheap.
pub fn make_synthetic_codebook(seed: u64) -> Codebook {
    let (lo, hi) = SYNTHETIC_INTERVAL;
    let span = hi - lo;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x15bc_0def_a017_u64);

    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;

    let subs = SUB_DIMS.map(|dim| {
        // Per-dimension curve parameters.
        let mut freq = vec![0.0f64; dim];
        let mut phase = vec![0.0f64; dim];
        for j in 1..dim {
            freq[j] = 0.5 + uniform();
            phase[j] = uniform();
        }
        let mut values = Vec::with_capacity(CODEBOOK_SIZE * dim);
        for l in 0..CODEBOOK_SIZE {
            let t = l as f64 / (CODEBOOK_SIZE - 1) as f64;
            for j in 0..dim {
                let v = if j == 0 {
                    lo + span * t
                } else {
                    let wave =
                        0.5 + 0.45 * (2.0 * std::f64::consts::PI * (freq[j] * t + phase[j])).sin();
                    let dither = (uniform() - 0.5) * 0.01;
                    (lo + span * wave + dither).clamp(lo, hi)
                };
                values.push(v);
            }
        }
        SubCodebook::new(dim, values).expect("constructed with correct size")
    });

    Codebook::new(subs).expect("dims match SUB_DIMS")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_codebook() {
        assert_eq!(make_synthetic_codebook(5), make_synthetic_codebook(5));
        assert_ne!(make_synthetic_codebook(5), make_synthetic_codebook(6));
    }

    #[test]
    fn first_components_non_decreasing() {
        let cb = make_synthetic_codebook(0);
        for m in 0..3 {
            let sub = cb.sub(m);
            let mut prev = f64::NEG_INFINITY;
            for l in 0..CODEBOOK_SIZE {
                let first = sub.entry(l)[0];
                assert!(first >= prev, "sub {m} entry {l}");
                prev = first;
            }
        }
    }

    #[test]
    fn entries_within_interval() {
        let (lo, hi) = SYNTHETIC_INTERVAL;
        let cb = make_synthetic_codebook(123);
        for m in 0..3 {
            for v in cb.sub(m).values() {
                assert!(*v >= lo && *v <= hi);
            }
        }
    }

    #[test]
    fn rejects_wrong_dimensions() {
        let bad = SubCodebook::new(3, vec![0.0; 3 * CODEBOOK_SIZE]).unwrap();
        let good3 = bad.clone();
        let good4 = SubCodebook::new(4, vec![0.0; 4 * CODEBOOK_SIZE]).unwrap();
        assert!(Codebook::new([good3.clone(), bad, good4.clone()]).is_ok());
        // dim-4 sub-codebook in a dim-3 slot
        let wrong = SubCodebook::new(4, vec![0.0; 4 * CODEBOOK_SIZE]).unwrap();
        assert!(Codebook::new([wrong, good3, good4]).is_err());
        assert!(SubCodebook::new(3, vec![0.0; 7]).is_err());
    }

    #[test]
    fn concat_lays_out_sub_vectors() {
        let cb = make_synthetic_codebook(1);
        let v = cb.concat([3, 7, 250]);
        assert_eq!(&v[0..3], cb.sub(0).entry(3));
        assert_eq!(&v[3..6], cb.sub(1).entry(7));
        assert_eq!(&v[6..10], cb.sub(2).entry(250));
    }
}
