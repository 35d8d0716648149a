//! Quality metrics: SNR, residual-excited resynthesis, per-scheme
//! comparison reports, and the deterministic synthetic corpus.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::lsp::{
    lpc_analyze, lpc_to_lsp, lsp_to_lpc, Codebook, LspVector, QuantConfig, SpeechFrame,
};
use crate::magic_matrix::MagicMatrix;
use crate::stego::{embed_lsp_stream, analyze_cover, EmbedOutcome, Scheme, SecretPayload, StegoError};
use crate::{FRAME_SIZE, LPC_ORDER};

/// SNR values are capped here so zero-noise comparisons stay finite.
pub const SNR_CAP_DB: f64 = 300.0;

/// Squared displacements above 27 (possible only for the parity baseline)
/// land in this extra bucket.
pub const HIST_OVERFLOW: usize = 28;

/// Number of histogram buckets: sq_distance 0..=27 plus overflow.
pub const HIST_BUCKETS: usize = 29;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("reference signal has zero power")]
    ZeroReference,
    #[error("{0} decoded vectors for {1} frames")]
    FrameCountMismatch(usize, usize),
    #[error(transparent)]
    Stego(#[from] StegoError),
    #[error(transparent)]
    Pipeline(#[from] crate::lsp::LspError),
}

/// Signal-to-noise ratio in dB: 10*log10(sum ref^2 / sum (ref-test)^2),
/// capped at [`SNR_CAP_DB`]. Identical sequences hit the cap exactly.
pub fn snr(reference: &[f64], test: &[f64]) -> Result<f64, MetricsError> {
    if reference.len() != test.len() {
        return Err(MetricsError::LengthMismatch(reference.len(), test.len()));
    }
    let signal: f64 = reference.iter().map(|v| v * v).sum();
    if signal <= 0.0 || signal.is_nan() {
        return Err(MetricsError::ZeroReference);
    }
    let noise: f64 = reference
        .iter()
        .zip(test.iter())
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}

/// Per-frame LPC residual of the original signal, analysis-filter memory
/// carried across frame boundaries. The analysis filter of each frame comes
/// from the frame's own unquantized LSP vector, i.e. the same canonical
/// representation the quantizer consumes.
pub fn analysis_residuals(frames: &[SpeechFrame]) -> Result<Vec<f64>, MetricsError> {
    let mut residuals = Vec::with_capacity(frames.len() * FRAME_SIZE);
    let mut src_hist = [0.0f64; LPC_ORDER]; // src_hist[j] = s[n-1-j]

    for frame in frames {
        let analysis = lsp_to_lpc(&lpc_to_lsp(&lpc_analyze(frame))?)?;
        for &s_raw in frame.samples.iter() {
            let s = f64::from(s_raw);
            let mut r = s;
            for j in 0..LPC_ORDER {
                r -= analysis.a[j] * src_hist[j];
            }
            for j in (1..LPC_ORDER).rev() {
                src_hist[j] = src_hist[j - 1];
            }
            src_hist[0] = s;
            residuals.push(r);
        }
    }
    Ok(residuals)
}

/// Push precomputed residuals through per-frame synthesis filters built
/// from decoded LSP vectors, output memory carried across frames.
pub fn synthesize_from_residuals(
    residuals: &[f64],
    decoded: &[LspVector],
) -> Result<Vec<f64>, MetricsError> {
    if residuals.len() != decoded.len() * FRAME_SIZE {
        return Err(MetricsError::FrameCountMismatch(
            decoded.len(),
            residuals.len() / FRAME_SIZE,
        ));
    }
    let mut out = Vec::with_capacity(residuals.len());
    let mut out_hist = [0.0f64; LPC_ORDER];

    for (f, dec) in decoded.iter().enumerate() {
        let synthesis = lsp_to_lpc(dec)?;
        for &r in &residuals[f * FRAME_SIZE..(f + 1) * FRAME_SIZE] {
            let mut y = r;
            for j in 0..LPC_ORDER {
                y += synthesis.a[j] * out_hist[j];
            }
            for j in (1..LPC_ORDER).rev() {
                out_hist[j] = out_hist[j - 1];
            }
            out_hist[0] = y;
            out.push(y);
        }
    }
    Ok(out)
}

/// Residual-excited resynthesis.
///
/// Each frame's residual is formed with the analysis filter from the
/// frame's own unquantized LSP vector, then pushed through the synthesis
/// filter built from the supplied decoded vector; filter memories carry
/// across frame boundaries (original samples on the analysis side, output
/// samples on the synthesis side). Feeding back the unquantized vectors
/// reproduces the input.
pub fn resynthesize(
    frames: &[SpeechFrame],
    decoded: &[LspVector],
) -> Result<Vec<f64>, MetricsError> {
    if frames.len() != decoded.len() {
        return Err(MetricsError::FrameCountMismatch(decoded.len(), frames.len()));
    }
    synthesize_from_residuals(&analysis_residuals(frames)?, decoded)
}

/// Quality figures for one scheme over one cover.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub mean_weighted_error_clean: f64,
    pub mean_weighted_error_stego: f64,
    /// (stego - clean) / clean mean weighted error.
    pub relative_error_increase: f64,
    /// Counts indexed by squared displacement 0..=27, plus one overflow
    /// bucket; sums to the number of bit-carrying frames.
    pub displacement_histogram: [u64; HIST_BUCKETS],
    pub capacity_bps: f64,
    pub carrying_frames: usize,
    pub mean_sq_distance: f64,
    pub payload_bytes: usize,
}

/// Run every scheme over the same cover and payload prefix and report the
/// damage each causes relative to clean quantization.
pub fn compare_schemes(
    frames: &[SpeechFrame],
    payload: &SecretPayload,
    matrix: &MagicMatrix,
    cb: &Codebook,
    config: &QuantConfig,
) -> Result<Vec<QualityReport>, MetricsError> {
    let cover = analyze_cover(frames)?;
    let usable = cover.embeddable.iter().filter(|&&e| e).count();
    let residuals = analysis_residuals(frames)?;

    let clean = embed_lsp_stream(&cover, &SecretPayload::empty(), Scheme::None, None, cb, config)?;
    let clean_mean = mean_frame_error(&clean);
    let clean_resynth = synthesize_from_residuals(&residuals, &clean.decoded)?;

    let mut reports = Vec::new();
    for scheme in [Scheme::None, Scheme::Magic3d, Scheme::Lsb2, Scheme::ParityQim] {
        let outcome = if scheme == Scheme::None {
            clean.clone()
        } else {
            let truncated = truncate_payload(payload, scheme, usable);
            embed_lsp_stream(&cover, &truncated, scheme, Some(matrix), cb, config)?
        };

        let stego_mean = mean_frame_error(&outcome);
        let snr_db = if scheme == Scheme::None {
            SNR_CAP_DB
        } else {
            let stego_resynth = synthesize_from_residuals(&residuals, &outcome.decoded)?;
            snr(&clean_resynth, &stego_resynth)?
        };

        let mut hist = [0u64; HIST_BUCKETS];
        let mut sq_sum = 0u64;
        for d in outcome.sq_distances.iter().flatten() {
            let bucket = (*d as usize).min(HIST_OVERFLOW);
            hist[bucket] += 1;
            sq_sum += u64::from(*d);
        }
        let carrying = outcome.carrying_frames();

        reports.push(QualityReport {
            scheme,
            snr_db,
            mean_weighted_error_clean: clean_mean,
            mean_weighted_error_stego: stego_mean,
            relative_error_increase: if clean_mean > 0.0 {
                (stego_mean - clean_mean) / clean_mean
            } else {
                0.0
            },
            displacement_histogram: hist,
            capacity_bps: scheme.capacity_bps(),
            carrying_frames: carrying,
            mean_sq_distance: if carrying > 0 { sq_sum as f64 / carrying as f64 } else { 0.0 },
            payload_bytes: outcome.payload_bytes,
        });
    }
    Ok(reports)
}

/// One point of the SNR-versus-embedding-rate curve.
#[derive(Debug, Clone, Copy)]
pub struct RatePoint {
    pub scheme: Scheme,
    /// Nominal hidden rate in bit/s for this point.
    pub rate_bps: f64,
    pub snr_db: f64,
}

/// Sweep each scheme over fractions of its full rate (filling the leading
/// fraction of frames, the rest untouched) and report SNR against the
/// clean-quantized reference at each point.
pub fn snr_vs_rate(
    frames: &[SpeechFrame],
    payload: &SecretPayload,
    matrix: &MagicMatrix,
    cb: &Codebook,
    config: &QuantConfig,
    fractions: &[f64],
) -> Result<Vec<RatePoint>, MetricsError> {
    let cover = analyze_cover(frames)?;
    let usable = cover.embeddable.iter().filter(|&&e| e).count();
    let residuals = analysis_residuals(frames)?;

    let clean = embed_lsp_stream(&cover, &SecretPayload::empty(), Scheme::None, None, cb, config)?;
    let clean_resynth = synthesize_from_residuals(&residuals, &clean.decoded)?;

    let mut points = Vec::new();
    for scheme in [Scheme::Magic3d, Scheme::Lsb2, Scheme::ParityQim] {
        let full = crate::stego::max_payload_bytes(scheme, usable);
        for &f in fractions {
            let bytes = ((full as f64) * f).floor() as usize;
            let truncated = truncate_payload(payload, scheme, usable);
            let part = SecretPayload::new(
                truncated.bytes()[..bytes.min(truncated.len_bytes())].to_vec(),
            );
            let outcome = embed_lsp_stream(&cover, &part, scheme, Some(matrix), cb, config)?;
            let stego_resynth = synthesize_from_residuals(&residuals, &outcome.decoded)?;
            points.push(RatePoint {
                scheme,
                rate_bps: scheme.capacity_bps() * f,
                snr_db: snr(&clean_resynth, &stego_resynth)?,
            });
        }
    }
    Ok(points)
}

/// Clip the payload to what `scheme` can carry in `usable` frames.
pub fn truncate_payload(payload: &SecretPayload, scheme: Scheme, usable: usize) -> SecretPayload {
    let max = crate::stego::max_payload_bytes(scheme, usable);
    if payload.len_bytes() <= max {
        payload.clone()
    } else {
        SecretPayload::new(payload.bytes()[..max].to_vec())
    }
}

fn mean_frame_error(outcome: &EmbedOutcome) -> f64 {
    if outcome.frame_errors.is_empty() {
        return 0.0;
    }
    let total: f64 = outcome
        .frame_errors
        .iter()
        .map(|errs| errs.iter().sum::<f64>())
        .sum();
    total / outcome.frame_errors.len() as f64
}

/// Deterministic speech-like test signal: voiced/unvoiced segments of
/// AR(10)-filtered excitation (pulse train or white noise) with a slowly
/// varying envelope. `n_frames` frames of 240 samples at 8 kHz.
pub fn synthetic_utterance(seed: u64, n_frames: usize) -> Vec<i16> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xC0FFEE);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;

    let total = n_frames * FRAME_SIZE;
    let mut samples = vec![0.0f64; total];
    let mut filter_state = [0.0f64; LPC_ORDER];

    // Segment structure: every ~20 frames switch voicing and vocal-tract
    // shape.
    let seg_len = 20 * FRAME_SIZE;
    let mut pos = 0usize;
    while pos < total {
        let voiced = uniform() < 0.6;
        let pitch = 32 + (uniform() * 68.0) as usize; // 80..250 Hz
        let amplitude = 1200.0 + uniform() * 2400.0;

        // Mildly resonant random vocal tract.
        let mut k = [0.0f64; LPC_ORDER];
        for v in k.iter_mut() {
            *v = (uniform() - 0.5) * 1.4;
        }
        let mut a = [0.0f64; LPC_ORDER];
        for m in 1..=LPC_ORDER {
            let km = k[m - 1];
            let mut next = a;
            next[m - 1] = km;
            for j in 1..m {
                next[j - 1] = a[j - 1] - km * a[m - j - 1];
            }
            a = next;
        }

        let end = (pos + seg_len).min(total);
        for (offset, slot) in (pos..end).enumerate() {
            let excitation = if voiced {
                if offset % pitch == 0 {
                    amplitude
                } else {
                    0.0
                }
            } else {
                (uniform() - 0.5) * amplitude * 0.25
            };
            let mut v = excitation;
            for (j, &aj) in a.iter().enumerate() {
                v += aj * filter_state[j];
            }
            for j in (1..LPC_ORDER).rev() {
                filter_state[j] = filter_state[j - 1];
            }
            filter_state[0] = v;
            samples[slot] = v;
        }
        pos = end;
    }

    samples
        .into_iter()
        .map(|v| v.clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16)
        .collect()
}

/// The deterministic synthetic corpus: `utterances` signals of
/// `frames_each` frames, seeded from `base_seed`.
pub fn synthetic_corpus(base_seed: u64, utterances: usize, frames_each: usize) -> Vec<Vec<i16>> {
    (0..utterances)
        .map(|u| synthetic_utterance(base_seed ^ (u as u64 + 1), frames_each))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::frame_split;
    use crate::lsp::make_synthetic_codebook;

    #[test]
    fn snr_hand_computed_example() {
        let reference = [2.0, 2.0, 2.0, 2.0];
        let test = [2.0, 2.0, 2.0, 0.0];
        let v = snr(&reference, &test).unwrap();
        assert!((v - 6.0206).abs() < 1e-3, "got {v}");
    }

    #[test]
    fn snr_identical_sequences_hit_cap() {
        let x = [1.0, -2.0, 3.0];
        assert_eq!(snr(&x, &x).unwrap(), SNR_CAP_DB);
    }

    #[test]
    fn snr_equal_power_noise_is_zero_db() {
        let reference = [1.0, 1.0, 1.0, 1.0];
        let test = [2.0, 2.0, 0.0, 0.0];
        let v = snr(&reference, &test).unwrap();
        assert!(v.abs() < 1e-9, "got {v}");
    }

    #[test]
    fn snr_rejects_bad_input() {
        assert!(matches!(
            snr(&[1.0], &[1.0, 2.0]),
            Err(MetricsError::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            snr(&[0.0, 0.0], &[0.0, 0.0]),
            Err(MetricsError::ZeroReference)
        ));
    }

    #[test]
    fn snr_is_scale_invariant() {
        let reference = [3.0, -1.0, 2.0, 0.5];
        let test = [2.5, -1.5, 2.2, 0.1];
        let base = snr(&reference, &test).unwrap();
        for c in [0.1, 7.0, -3.0] {
            let r: Vec<f64> = reference.iter().map(|v| v * c).collect();
            let t: Vec<f64> = test.iter().map(|v| v * c).collect();
            assert!((snr(&r, &t).unwrap() - base).abs() < 1e-9);
        }
    }

    #[test]
    fn synthetic_corpus_is_deterministic() {
        let a = synthetic_utterance(3, 10);
        let b = synthetic_utterance(3, 10);
        assert_eq!(a, b);
        assert_ne!(a, synthetic_utterance(4, 10));
        assert_eq!(a.len(), 10 * FRAME_SIZE);
        // Not silent.
        assert!(a.iter().any(|&s| s != 0));
    }

    #[test]
    fn resynthesis_inverts_analysis_when_unperturbed() {
        let samples = synthetic_utterance(1, 20);
        let frames = frame_split(&samples);
        let unquantized: Vec<LspVector> = frames
            .iter()
            .map(|f| lpc_to_lsp(&lpc_analyze(f)).unwrap())
            .collect();
        let out = resynthesize(&frames, &unquantized).unwrap();

        let input: Vec<f64> = frames
            .iter()
            .flat_map(|f| f.samples.iter().map(|&s| f64::from(s)))
            .collect();
        let rms_in = (input.iter().map(|v| v * v).sum::<f64>() / input.len() as f64).sqrt();
        let rms_err = (input
            .iter()
            .zip(out.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / input.len() as f64)
            .sqrt();
        assert!(
            rms_err / rms_in < 1e-6,
            "relative RMS error {}",
            rms_err / rms_in
        );
    }

    #[test]
    fn resynthesis_of_silence_is_silence() {
        let frames = vec![SpeechFrame::new([0; FRAME_SIZE]); 4];
        let decoded = vec![LspVector::uniform(); 4];
        let out = resynthesize(&frames, &decoded).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn resynthesis_rejects_count_mismatch() {
        let frames = vec![SpeechFrame::new([0; FRAME_SIZE]); 3];
        let decoded = vec![LspVector::uniform(); 2];
        assert!(matches!(
            resynthesize(&frames, &decoded),
            Err(MetricsError::FrameCountMismatch(2, 3))
        ));
    }

    #[test]
    fn compare_none_scheme_is_self_identical() {
        let samples = synthetic_utterance(7, 30);
        let frames = frame_split(&samples);
        let m = MagicMatrix::generate(0);
        let cb = make_synthetic_codebook(0);
        let payload = SecretPayload::new(vec![0xAB; 16]);
        let reports =
            compare_schemes(&frames, &payload, &m, &cb, &QuantConfig::default()).unwrap();

        let none = reports.iter().find(|r| r.scheme == Scheme::None).unwrap();
        assert_eq!(none.snr_db, SNR_CAP_DB);
        assert_eq!(none.relative_error_increase, 0.0);
        assert_eq!(none.carrying_frames, 0);

        for r in &reports {
            let total: u64 = r.displacement_histogram.iter().sum();
            assert_eq!(total, r.carrying_frames as u64, "{}", r.scheme.name());
        }
        let caps: Vec<f64> = reports.iter().map(|r| r.capacity_bps).collect();
        assert_eq!(caps, vec![0.0, 200.0, 200.0, 100.0]);
    }

    #[test]
    fn stego_resynthesis_snr_is_finite_and_positive() {
        let samples = synthetic_utterance(9, 40);
        let frames = frame_split(&samples);
        let m = MagicMatrix::generate(1);
        let cb = make_synthetic_codebook(0);
        let payload = SecretPayload::new(vec![0x5A; 24]);
        let reports =
            compare_schemes(&frames, &payload, &m, &cb, &QuantConfig::default()).unwrap();
        let magic = reports.iter().find(|r| r.scheme == Scheme::Magic3d).unwrap();
        assert!(magic.snr_db.is_finite());
        assert!(magic.snr_db > 0.0);
        assert!(magic.carrying_frames > 0);
    }

    #[test]
    fn zero_displacement_mass_counts_preencoded_keys() {
        let samples = synthetic_utterance(15, 50);
        let frames = frame_split(&samples);
        let m = MagicMatrix::generate(2);
        let cb = make_synthetic_codebook(0);
        let payload = SecretPayload::new(vec![0xC3; 30]);
        let reports =
            compare_schemes(&frames, &payload, &m, &cb, &QuantConfig::default()).unwrap();
        let magic = reports.iter().find(|r| r.scheme == Scheme::Magic3d).unwrap();

        // Recompute: a frame lands in bucket 0 iff its best triple already
        // expanded to the key, which is exactly sq_distance == 0.
        let zero_count = magic.displacement_histogram[0];
        let recount = {
            let cover = analyze_cover(&frames).unwrap();
            let truncated = truncate_payload(&payload, Scheme::Magic3d, cover.lsps.len());
            let out = embed_lsp_stream(
                &cover,
                &truncated,
                Scheme::Magic3d,
                Some(&m),
                &cb,
                &QuantConfig::default(),
            )
            .unwrap();
            out.records.iter().filter(|r| r.chosen == r.original).count() as u64
        };
        assert_eq!(zero_count, recount);
    }
}
