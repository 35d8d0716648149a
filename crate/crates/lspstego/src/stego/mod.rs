//! Embedding and extraction: steer the quantizer's index triples so their
//! magic-cube value spells out the secret, plus the two comparison
//! baselines (2-LSB substitution and parity QIM).

mod payload;

pub use payload::{
    collect_bytes, header_bits, pack_groups, parse_header, unpack_groups, SecretPayload,
    HEADER_BITS,
};

use crate::lsp::{
    best_indices, best_indices_with_parity, lpc_analyze, lpc_to_lsp, prepare_frame, reconstruct,
    sub_errors_for, Codebook, IndexTriple, LspError, LspVector, QuantConfig, QuantState,
    SpeechFrame,
};
use crate::magic_matrix::{Coord3, MagicMatrix};

/// Which embedding scheme drives index selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// No embedding: the cover passes through the quantizer untouched.
    None,
    /// Proposed scheme: 6 bits/frame via magic-cube pattern search.
    Magic3d,
    /// Baseline: replace the 2 LSBs of each of the 3 indices (6 bits/frame).
    Lsb2,
    /// Baseline: parity-restricted quantization, 1 bit per sub-vector.
    ParityQim,
}

impl Scheme {
    pub fn bits_per_frame(self) -> usize {
        match self {
            Scheme::None => 0,
            Scheme::Magic3d | Scheme::Lsb2 => 6,
            Scheme::ParityQim => 3,
        }
    }

    /// Hidden-channel rate at 30 ms frames, in bit/s.
    pub fn capacity_bps(self) -> f64 {
        self.bits_per_frame() as f64 / 0.03
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Magic3d => "magic3d",
            Scheme::Lsb2 => "lsb2",
            Scheme::ParityQim => "parity_qim",
        }
    }

    /// Frames occupied by the 36-bit length header.
    pub fn header_frames(self) -> usize {
        match self.bits_per_frame() {
            0 => 0,
            b => HEADER_BITS.div_ceil(b),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Scheme::None),
            "magic3d" => Ok(Scheme::Magic3d),
            "lsb2" => Ok(Scheme::Lsb2),
            "parity_qim" => Ok(Scheme::ParityQim),
            other => Err(format!(
                "unknown scheme `{other}` (expected none, magic3d, lsb2 or parity_qim)"
            )),
        }
    }
}

/// Stego-layer errors.
#[derive(Debug, thiserror::Error)]
pub enum StegoError {
    #[error(
        "payload needs {required_bits} bits ({required_frames} frames) but the cover offers \
         {available_bits} bits ({available_frames} frames)"
    )]
    CapacityExceeded {
        required_bits: usize,
        available_bits: usize,
        required_frames: usize,
        available_frames: usize,
    },
    #[error(
        "stream truncated: header declares {declared_bytes} bytes needing {required_frames} \
         frames, stream has {available_frames}"
    )]
    TruncatedStream {
        declared_bytes: u64,
        required_frames: usize,
        available_frames: usize,
    },
    #[error("scheme {0} does not define extraction")]
    ExtractUnsupported(&'static str),
    #[error(transparent)]
    Pipeline(#[from] LspError),
}

/// Outcome of steering one frame's triple to carry a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedRecord {
    pub frame_no: usize,
    pub original: IndexTriple,
    pub chosen: IndexTriple,
    pub key: u8,
    pub pattern_id: u8,
    pub sq_distance: u32,
}

/// Replace a frame's best triple with the nearest coordinate whose expanded
/// cube value equals `key`.
///
/// Runs the four search patterns at the original coordinate and keeps the
/// match with minimal squared Euclidean displacement; ties go to the lowest
/// pattern id. The winning displacement never exceeds 27 (pattern 4 is
/// bounded by 3 per axis).
///
/// # Panics
/// Panics if `key > 63`.
pub fn embed_frame(original: IndexTriple, key: u8, m: &MagicMatrix) -> EmbedRecord {
    let matches = m
        .search_patterns(Coord3::from(original), key)
        .expect("key must be in 0..=63");
    let best = matches
        .iter()
        .min_by_key(|pm| (pm.sq_distance, pm.pattern_id))
        .expect("four patterns");
    EmbedRecord {
        frame_no: 0,
        original,
        chosen: IndexTriple::from(best.coord),
        key,
        pattern_id: best.pattern_id,
        sq_distance: best.sq_distance,
    }
}

/// Read the key a triple carries: the expanded cube value at its coordinate.
pub fn extract_frame(t: IndexTriple, m: &MagicMatrix) -> u8 {
    m.expand(Coord3::from(t))
}

/// 2-LSB baseline: overwrite the two low bits of each index with two
/// payload bits each (`bits` holds 6, MSB-first: ix gets the top pair).
pub fn embed_lsb2_baseline(original: IndexTriple, bits: u8) -> IndexTriple {
    debug_assert!(bits < 64);
    IndexTriple::new(
        (original.ix & !3) | ((bits >> 4) & 3),
        (original.iy & !3) | ((bits >> 2) & 3),
        (original.iz & !3) | (bits & 3),
    )
}

/// Inverse of [`embed_lsb2_baseline`].
pub fn extract_lsb2(t: IndexTriple) -> u8 {
    ((t.ix & 3) << 4) | ((t.iy & 3) << 2) | (t.iz & 3)
}

/// Parity-QIM baseline: per sub-vector, restrict the weighted argmin to
/// indices whose parity equals the payload bit (`bits` holds 3, MSB-first:
/// ix parity first). Returns the triple and its weighted errors.
pub fn embed_parity_qim_baseline(
    ctx: &crate::lsp::FrameContext,
    cb: &Codebook,
    bits: u8,
) -> (IndexTriple, [f64; 3]) {
    debug_assert!(bits < 8);
    best_indices_with_parity(ctx, cb, [(bits >> 2) & 1, (bits >> 1) & 1, bits & 1])
}

/// Parity bits carried by a triple.
pub fn extract_parity(t: IndexTriple) -> u8 {
    ((t.ix & 1) << 2) | ((t.iy & 1) << 1) | (t.iz & 1)
}

/// A cover reduced to per-frame LSP vectors plus the embeddability flags
/// (a zero-padded trailing frame never carries bits).
#[derive(Debug, Clone)]
pub struct CoverLsps {
    pub lsps: Vec<LspVector>,
    pub embeddable: Vec<bool>,
}

/// LPC analysis + LSP conversion for every frame of a cover.
pub fn analyze_cover(frames: &[SpeechFrame]) -> Result<CoverLsps, StegoError> {
    let mut lsps = Vec::with_capacity(frames.len());
    let mut embeddable = Vec::with_capacity(frames.len());
    for frame in frames {
        lsps.push(lpc_to_lsp(&lpc_analyze(frame))?);
        embeddable.push(!frame.padded);
    }
    Ok(CoverLsps { lsps, embeddable })
}

/// Everything an embedding pass produces.
#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    /// The emitted (stego) index triple of every frame.
    pub indices: Vec<IndexTriple>,
    /// One record per key-carrying frame (magic3d only).
    pub records: Vec<EmbedRecord>,
    /// Stego-path decoded LSP vector of every frame.
    pub decoded: Vec<LspVector>,
    /// Weighted quantization errors of every emitted triple.
    pub frame_errors: Vec<[f64; 3]>,
    /// Index-space squared displacement per frame; `Some` iff the frame
    /// carried bits.
    pub sq_distances: Vec<Option<u32>>,
    /// Payload bytes actually embedded (after any truncation by caller).
    pub payload_bytes: usize,
}

impl EmbedOutcome {
    /// Frames that carried hidden bits (header + payload).
    pub fn carrying_frames(&self) -> usize {
        self.sq_distances.iter().filter(|d| d.is_some()).count()
    }
}

/// Greatest payload size (bytes) a cover with `usable` embeddable frames
/// can hold under `scheme`, given the 36-bit header.
pub fn max_payload_bytes(scheme: Scheme, usable: usize) -> usize {
    let bpf = scheme.bits_per_frame();
    if bpf == 0 || usable <= scheme.header_frames() {
        return 0;
    }
    (usable - scheme.header_frames()) * bpf / 8
}

/// Embed a payload into per-frame LSP vectors, producing the stego index
/// stream.
///
/// The group stream is the 36-bit header followed by the payload bits, each
/// chunked to the scheme's per-frame width; one group rides in each
/// embeddable frame, frames beyond the payload keep their best indices.
/// The quantizer state always advances with the *chosen* decoded vector so
/// the decoder's predictor stays synchronized.
pub fn embed_lsp_stream(
    cover: &CoverLsps,
    secret: &SecretPayload,
    scheme: Scheme,
    matrix: Option<&MagicMatrix>,
    cb: &Codebook,
    config: &QuantConfig,
) -> Result<EmbedOutcome, StegoError> {
    let n = cover.lsps.len();
    let usable = cover.embeddable.iter().filter(|&&e| e).count();
    let bpf = scheme.bits_per_frame();

    let groups: Vec<u8> = if bpf == 0 {
        Vec::new()
    } else {
        let mut g = pack_groups(header_bits(secret.len_bytes() as u32), bpf);
        g.extend(pack_groups(secret.bits(), bpf));
        g
    };

    if groups.len() > usable {
        return Err(StegoError::CapacityExceeded {
            required_bits: HEADER_BITS + secret.len_bytes() * 8,
            available_bits: usable * bpf,
            required_frames: groups.len(),
            available_frames: usable,
        });
    }

    let matrix = match scheme {
        Scheme::Magic3d => Some(matrix.expect("magic3d requires a matrix")),
        _ => None,
    };

    let mut state = QuantState::new(config);
    let mut out = EmbedOutcome {
        indices: Vec::with_capacity(n),
        records: Vec::new(),
        decoded: Vec::with_capacity(n),
        frame_errors: Vec::with_capacity(n),
        sq_distances: vec![None; n],
        payload_bytes: secret.len_bytes(),
    };

    let mut next_group = 0usize;
    for i in 0..n {
        let ctx = prepare_frame(&cover.lsps[i], &state)?;
        let group = if cover.embeddable[i] && next_group < groups.len() {
            let g = groups[next_group];
            next_group += 1;
            Some(g)
        } else {
            None
        };

        let (triple, errs) = match (scheme, group) {
            (_, None) | (Scheme::None, _) => best_indices(&ctx, cb),
            (Scheme::Magic3d, Some(key)) => {
                let (best, _) = best_indices(&ctx, cb);
                let mut rec = embed_frame(best, key, matrix.unwrap());
                rec.frame_no = i;
                out.sq_distances[i] = Some(rec.sq_distance);
                let triple = rec.chosen;
                out.records.push(rec);
                (triple, sub_errors_for(&ctx, cb, triple))
            }
            (Scheme::Lsb2, Some(bits)) => {
                let (best, _) = best_indices(&ctx, cb);
                let triple = embed_lsb2_baseline(best, bits);
                out.sq_distances[i] =
                    Some(Coord3::from(triple).sq_distance(&Coord3::from(best)));
                (triple, sub_errors_for(&ctx, cb, triple))
            }
            (Scheme::ParityQim, Some(bits)) => {
                let (best, _) = best_indices(&ctx, cb);
                let (triple, errs) = embed_parity_qim_baseline(&ctx, cb, bits);
                out.sq_distances[i] =
                    Some(Coord3::from(triple).sq_distance(&Coord3::from(best)));
                (triple, errs)
            }
        };

        let decoded = reconstruct(&ctx.predicted, &state, cb, triple);
        state.prev_decoded = decoded;
        out.indices.push(triple);
        out.decoded.push(decoded);
        out.frame_errors.push(errs);
    }

    Ok(out)
}

/// Full-pipeline embedding over raw speech frames with the proposed scheme.
pub fn embed_stream(
    frames: &[SpeechFrame],
    secret: &SecretPayload,
    matrix: &MagicMatrix,
    cb: &Codebook,
    config: &QuantConfig,
) -> Result<EmbedOutcome, StegoError> {
    let cover = analyze_cover(frames)?;
    embed_lsp_stream(&cover, secret, Scheme::Magic3d, Some(matrix), cb, config)
}

/// Recover the payload from a stego index stream.
pub fn extract_stream_scheme(
    indices: &[IndexTriple],
    scheme: Scheme,
    matrix: Option<&MagicMatrix>,
) -> Result<SecretPayload, StegoError> {
    let bpf = scheme.bits_per_frame();
    if bpf == 0 {
        return Err(StegoError::ExtractUnsupported(scheme.name()));
    }
    let matrix = match scheme {
        Scheme::Magic3d => Some(matrix.expect("magic3d requires a matrix")),
        _ => None,
    };

    let groups: Vec<u8> = indices
        .iter()
        .map(|&t| match scheme {
            Scheme::Magic3d => extract_frame(t, matrix.unwrap()),
            Scheme::Lsb2 => extract_lsb2(t),
            Scheme::ParityQim => extract_parity(t),
            Scheme::None => unreachable!(),
        })
        .collect();

    let header_frames = scheme.header_frames();
    if indices.len() < header_frames {
        return Err(StegoError::TruncatedStream {
            declared_bytes: 0,
            required_frames: header_frames,
            available_frames: indices.len(),
        });
    }

    let mut bits = unpack_groups(&groups, bpf);
    let len = parse_header(&mut bits).expect("header length checked") as u64;

    let payload_frames = (len as usize * 8).div_ceil(bpf);
    let required = header_frames + payload_frames;
    if indices.len() < required {
        return Err(StegoError::TruncatedStream {
            declared_bytes: len,
            required_frames: required,
            available_frames: indices.len(),
        });
    }

    // Re-seek: payload bits start at the first frame after the header
    // (header padding within its last group, if any, is skipped).
    let mut payload_bits = unpack_groups(&groups[header_frames..], bpf);
    let bytes = collect_bytes(&mut payload_bits, len as usize).expect("capacity checked");
    Ok(SecretPayload::new(bytes))
}

/// Recover the payload with the proposed scheme.
pub fn extract_stream(
    indices: &[IndexTriple],
    matrix: &MagicMatrix,
) -> Result<SecretPayload, StegoError> {
    extract_stream_scheme(indices, Scheme::Magic3d, Some(matrix))
}
