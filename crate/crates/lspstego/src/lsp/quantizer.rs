//! Predictive split vector quantizer.
//!
//! Per frame: remove the long-term DC component, predict with a first-order
//! fixed predictor from the previously decoded vector, quantize the residual
//! as (3, 3, 4) sub-vectors against 256-entry codebooks under inverse-gap
//! weighting, and reconstruct the decoded vector with monotonicity repair.
//! Encoder and decoder share the reconstruction path bit for bit, so given
//! the same index stream and initial state they stay in lockstep.

use super::{Codebook, IndexTriple, LspError, LspVector, QuantConfig, WeightMatrix, LSP_MIN_GAP};
use crate::{CODEBOOK_SIZE, LPC_ORDER, SUB_DIMS};

/// Per-stream quantizer state: the previously decoded LSP vector plus the
/// configured DC component and predictor constant.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantState {
    pub prev_decoded: LspVector,
    pub dc: [f64; LPC_ORDER],
    pub b: f64,
}

impl QuantState {
    /// Fresh state: the previous decoded vector starts at the DC component,
    /// which makes the first frame's prediction exactly zero.
    pub fn new(config: &QuantConfig) -> Self {
        Self {
            prev_decoded: LspVector::new(config.p_dc),
            dc: config.p_dc,
            b: config.predictor_b,
        }
    }
}

impl Default for QuantState {
    fn default() -> Self {
        Self::new(&QuantConfig::default())
    }
}

/// Everything the index selection needs about one frame: the DC-removed
/// prediction, the residual to quantize, and the weights.
#[derive(Debug, Clone, Copy)]
pub struct FrameContext {
    pub predicted: [f64; LPC_ORDER],
    pub residual: [f64; LPC_ORDER],
    pub weights: WeightMatrix,
}

/// Inverse-gap weights from the unquantized LSP vector: boundary weights
/// use the single adjacent gap, interior ones the smaller of the two.
pub fn weight_matrix(p_prime: &LspVector) -> Result<WeightMatrix, LspError> {
    let p = &p_prime.p;
    for i in 1..LPC_ORDER {
        if p[i] <= p[i - 1] {
            return Err(LspError::NotIncreasing(i));
        }
    }
    let mut w = [0.0f64; LPC_ORDER];
    w[0] = 1.0 / (p[1] - p[0]);
    w[LPC_ORDER - 1] = 1.0 / (p[LPC_ORDER - 1] - p[LPC_ORDER - 2]);
    for j in 1..LPC_ORDER - 1 {
        w[j] = 1.0 / (p[j] - p[j - 1]).min(p[j + 1] - p[j]);
    }
    Ok(WeightMatrix { w })
}

/// DC removal, prediction and residual formation for one frame.
pub fn prepare_frame(p_prime: &LspVector, state: &QuantState) -> Result<FrameContext, LspError> {
    let weights = weight_matrix(p_prime)?;
    let mut predicted = [0.0f64; LPC_ORDER];
    let mut residual = [0.0f64; LPC_ORDER];
    for j in 0..LPC_ORDER {
        let dc_removed = p_prime.p[j] - state.dc[j];
        predicted[j] = state.b * (state.prev_decoded.p[j] - state.dc[j]);
        residual[j] = dc_removed - predicted[j];
    }
    Ok(FrameContext { predicted, residual, weights })
}

/// Weighted squared error of codeword `index` of sub-vector `m` against the
/// residual in `ctx`.
fn sub_error(ctx: &FrameContext, cb: &Codebook, m: usize, index: usize) -> f64 {
    let offset: usize = SUB_DIMS[..m].iter().sum();
    let entry = cb.sub(m).entry(index);
    let mut e = 0.0;
    for (j, &c) in entry.iter().enumerate() {
        let d = ctx.residual[offset + j] - c;
        e += ctx.weights.w[offset + j] * d * d;
    }
    e
}

/// Unconstrained per-sub-vector argmin; lowest index wins ties.
pub fn best_indices(ctx: &FrameContext, cb: &Codebook) -> (IndexTriple, [f64; 3]) {
    let mut idx = [0u8; 3];
    let mut errs = [0.0f64; 3];
    for m in 0..3 {
        let mut best = 0usize;
        let mut best_e = sub_error(ctx, cb, m, 0);
        for l in 1..CODEBOOK_SIZE {
            let e = sub_error(ctx, cb, m, l);
            if e < best_e {
                best_e = e;
                best = l;
            }
        }
        idx[m] = best as u8;
        errs[m] = best_e;
    }
    (IndexTriple::new(idx[0], idx[1], idx[2]), errs)
}

/// Argmin restricted to indices of the requested parity (one bit per
/// sub-vector). Both parities exist in 0..=255, so this always succeeds.
pub fn best_indices_with_parity(
    ctx: &FrameContext,
    cb: &Codebook,
    parities: [u8; 3],
) -> (IndexTriple, [f64; 3]) {
    let mut idx = [0u8; 3];
    let mut errs = [0.0f64; 3];
    for m in 0..3 {
        let start = (parities[m] & 1) as usize;
        let mut best = start;
        let mut best_e = sub_error(ctx, cb, m, start);
        let mut l = start + 2;
        while l < CODEBOOK_SIZE {
            let e = sub_error(ctx, cb, m, l);
            if e < best_e {
                best_e = e;
                best = l;
            }
            l += 2;
        }
        idx[m] = best as u8;
        errs[m] = best_e;
    }
    (IndexTriple::new(idx[0], idx[1], idx[2]), errs)
}

/// Weighted errors of an arbitrary (possibly stego-forced) triple.
pub fn sub_errors_for(ctx: &FrameContext, cb: &Codebook, t: IndexTriple) -> [f64; 3] {
    [
        sub_error(ctx, cb, 0, t.ix as usize),
        sub_error(ctx, cb, 1, t.iy as usize),
        sub_error(ctx, cb, 2, t.iz as usize),
    ]
}

/// Sort, then sweep both ways enforcing the minimum gap so the result is a
/// valid LSP vector whatever the quantizer produced.
pub fn repair_monotonicity(p: &mut [f64; LPC_ORDER]) {
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if p[0] < LSP_MIN_GAP {
        p[0] = LSP_MIN_GAP;
    }
    for i in 1..LPC_ORDER {
        if p[i] < p[i - 1] + LSP_MIN_GAP {
            p[i] = p[i - 1] + LSP_MIN_GAP;
        }
    }
    let top = std::f64::consts::PI - LSP_MIN_GAP;
    if p[LPC_ORDER - 1] > top {
        p[LPC_ORDER - 1] = top;
    }
    for i in (0..LPC_ORDER - 1).rev() {
        if p[i] > p[i + 1] - LSP_MIN_GAP {
            p[i] = p[i + 1] - LSP_MIN_GAP;
        }
    }
}

/// Decoded vector for a selected triple: prediction + codewords + DC, then
/// monotonicity repair. Shared verbatim by encoder and decoder.
pub fn reconstruct(ctx_predicted: &[f64; LPC_ORDER], state: &QuantState, cb: &Codebook, t: IndexTriple) -> LspVector {
    let code = cb.concat([t.ix, t.iy, t.iz]);
    let mut p = [0.0f64; LPC_ORDER];
    for j in 0..LPC_ORDER {
        p[j] = ctx_predicted[j] + code[j] + state.dc[j];
    }
    repair_monotonicity(&mut p);
    LspVector::new(p)
}

/// Quantize one frame: returns the best index triple, the decoded vector,
/// and the three minimized weighted errors. Advances the state to the
/// decoded vector.
pub fn quantize(
    p_prime: &LspVector,
    state: &mut QuantState,
    cb: &Codebook,
) -> Result<(IndexTriple, LspVector, [f64; 3]), LspError> {
    let ctx = prepare_frame(p_prime, state)?;
    let (triple, errs) = best_indices(&ctx, cb);
    let decoded = reconstruct(&ctx.predicted, state, cb, triple);
    state.prev_decoded = decoded;
    Ok((triple, decoded, errs))
}

/// Decoder-side reconstruction from a received triple. Advances the state.
pub fn dequantize(t: IndexTriple, state: &mut QuantState, cb: &Codebook) -> LspVector {
    let mut predicted = [0.0f64; LPC_ORDER];
    for j in 0..LPC_ORDER {
        predicted[j] = state.b * (state.prev_decoded.p[j] - state.dc[j]);
    }
    let decoded = reconstruct(&predicted, state, cb, t);
    state.prev_decoded = decoded;
    decoded
}

#[cfg(test)]
mod tests {
    use super::super::SubCodebook;
    use super::*;
    use crate::lsp::make_synthetic_codebook;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn uniform(rng: &mut ChaCha20Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Random valid LSP vector with healthy gaps.
    pub(crate) fn random_lsp(rng: &mut ChaCha20Rng) -> LspVector {
        let mut gaps = [0.0f64; LPC_ORDER + 1];
        let mut total = 0.0;
        for g in gaps.iter_mut() {
            *g = 0.05 + uniform(rng);
            total += *g;
        }
        let scale = std::f64::consts::PI / total;
        let mut p = [0.0f64; LPC_ORDER];
        let mut acc = 0.0;
        for (j, v) in p.iter_mut().enumerate() {
            acc += gaps[j] * scale;
            *v = acc;
        }
        LspVector::new(p)
    }

    /// Naive 256-entry exhaustive scan, written independently of the
    /// implementation path: explicit index loops, same tie rule.
    fn naive_argmin(ctx: &FrameContext, cb: &Codebook) -> (IndexTriple, [f64; 3]) {
        let mut best_idx = [0u8; 3];
        let mut best_err = [f64::INFINITY; 3];
        for m in 0..3 {
            let offset: usize = SUB_DIMS[..m].iter().sum();
            for l in 0..CODEBOOK_SIZE {
                let entry = cb.sub(m).entry(l);
                let mut e = 0.0;
                for j in 0..entry.len() {
                    let d = ctx.residual[offset + j] - entry[j];
                    e += ctx.weights.w[offset + j] * d * d;
                }
                if e < best_err[m] {
                    best_err[m] = e;
                    best_idx[m] = l as u8;
                }
            }
        }
        (IndexTriple::new(best_idx[0], best_idx[1], best_idx[2]), best_err)
    }

    #[test]
    fn uniform_lsp_gives_equal_weights() {
        let w = weight_matrix(&LspVector::uniform()).unwrap();
        let expect = 11.0 / std::f64::consts::PI;
        for &v in &w.w {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_weight_uses_smaller_gap() {
        let p = [0.1, 0.2, 0.4, 0.7, 1.1, 1.6, 2.0, 2.3, 2.5, 2.6];
        let w = weight_matrix(&LspVector::new(p)).unwrap();
        assert!((w.w[1] - 10.0).abs() < 1e-12, "w_2 = 1/min(0.1, 0.2) = 10");
        assert!((w.w[0] - 10.0).abs() < 1e-12);
        assert!((w.w[9] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn weight_matrix_rejects_repeated_values() {
        let mut p = LspVector::uniform().p;
        p[6] = p[5];
        assert!(weight_matrix(&LspVector::new(p)).is_err());
    }

    #[test]
    fn weights_positive_for_valid_input() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..100 {
            let w = weight_matrix(&random_lsp(&mut rng)).unwrap();
            assert!(w.w.iter().all(|&v| v > 0.0 && v.is_finite()));
        }
    }

    #[test]
    fn exact_codeword_residual_quantizes_to_it_with_zero_error() {
        let cb = make_synthetic_codebook(4);
        let ctx = FrameContext {
            predicted: [0.0; LPC_ORDER],
            residual: cb.concat([77, 77, 77]),
            weights: weight_matrix(&LspVector::uniform()).unwrap(),
        };
        let (triple, errs) = best_indices(&ctx, &cb);
        assert_eq!(triple, IndexTriple::new(77, 77, 77));
        assert_eq!(errs, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn argmin_matches_naive_scan() {
        let cb = make_synthetic_codebook(0);
        let mut rng = ChaCha20Rng::seed_from_u64(40);
        let mut state = QuantState::default();
        for _ in 0..100 {
            let p = random_lsp(&mut rng);
            let ctx = prepare_frame(&p, &state).unwrap();
            let (fast, fast_err) = best_indices(&ctx, &cb);
            let (naive, naive_err) = naive_argmin(&ctx, &cb);
            assert_eq!(fast, naive);
            for (a, b) in fast_err.iter().zip(naive_err.iter()) {
                assert_eq!(a.to_bits(), b.to_bits(), "weighted errors must match bit-exactly");
            }
            // Evolve the state like a real stream.
            let _ = quantize(&p, &mut state, &cb).unwrap();
        }
    }

    #[test]
    fn decoded_lsp_is_always_valid() {
        let cb = make_synthetic_codebook(9);
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let mut state = QuantState::default();
        for _ in 0..200 {
            let p = random_lsp(&mut rng);
            let (_, decoded, _) = quantize(&p, &mut state, &cb).unwrap();
            decoded.check_valid().unwrap();
        }
    }

    #[test]
    fn encoder_and_decoder_reconstructions_are_bit_identical() {
        let cb = make_synthetic_codebook(2);
        let cfg = QuantConfig::default();
        let mut enc = QuantState::new(&cfg);
        let mut dec = QuantState::new(&cfg);
        let mut rng = ChaCha20Rng::seed_from_u64(50);
        for _ in 0..100 {
            let p = random_lsp(&mut rng);
            let (triple, enc_decoded, _) = quantize(&p, &mut enc, &cb).unwrap();
            let dec_decoded = dequantize(triple, &mut dec, &cb);
            for (a, b) in enc_decoded.p.iter().zip(dec_decoded.p.iter()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn repeated_input_converges_to_predictor_fixed_point() {
        let cb = make_synthetic_codebook(6);
        let mut state = QuantState::default();
        let triple = IndexTriple::new(100, 40, 200);
        let mut prev = dequantize(triple, &mut state, &cb);
        let mut converged = false;
        for _ in 0..200 {
            let cur = dequantize(triple, &mut state, &cb);
            let delta = cur
                .p
                .iter()
                .zip(prev.p.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if delta < 1e-9 {
                converged = true;
                break;
            }
            prev = cur;
        }
        assert!(converged, "first-order predictor must reach its fixed point");
    }

    #[test]
    fn zero_codewords_and_dc_state_decode_to_dc() {
        let zero_subs = [
            SubCodebook::new(3, vec![0.0; 3 * CODEBOOK_SIZE]).unwrap(),
            SubCodebook::new(3, vec![0.0; 3 * CODEBOOK_SIZE]).unwrap(),
            SubCodebook::new(4, vec![0.0; 4 * CODEBOOK_SIZE]).unwrap(),
        ];
        let cb = Codebook::new(zero_subs).unwrap();
        let cfg = QuantConfig::default();
        let mut state = QuantState::new(&cfg);
        let decoded = dequantize(IndexTriple::new(0, 0, 0), &mut state, &cb);
        for (d, dc) in decoded.p.iter().zip(cfg.p_dc.iter()) {
            assert!((d - dc).abs() < 1e-15);
        }
    }

    #[test]
    fn parity_restricted_argmin_honors_parity() {
        let cb = make_synthetic_codebook(13);
        let mut rng = ChaCha20Rng::seed_from_u64(60);
        let state = QuantState::default();
        for _ in 0..50 {
            let p = random_lsp(&mut rng);
            let ctx = prepare_frame(&p, &state).unwrap();
            for bits in 0..8u8 {
                let parities = [(bits >> 2) & 1, (bits >> 1) & 1, bits & 1];
                let (t, errs) = best_indices_with_parity(&ctx, &cb, parities);
                assert_eq!(t.ix & 1, parities[0]);
                assert_eq!(t.iy & 1, parities[1]);
                assert_eq!(t.iz & 1, parities[2]);
                // Restricted minimum can never beat the unrestricted one.
                let (_, free) = best_indices(&ctx, &cb);
                for (r, f) in errs.iter().zip(free.iter()) {
                    assert!(r >= f);
                }
            }
        }
    }
}
