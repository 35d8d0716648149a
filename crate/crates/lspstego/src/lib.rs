//! Speech steganography over LSP vector-quantization indices.
//!
//! A 30 ms speech frame is reduced to ten line-spectral-pair angles, split
//! into (3, 3, 4)-dimensional sub-vectors and quantized against three
//! 256-entry codebooks. The resulting index triple is a point in a
//! 256x256x256 space. An 8x8x8 magic cube — every axis-aligned 8x8 plane and
//! every aligned 4x4x4 sub-cube a permutation of 0..=63 — tiles that space
//! periodically, so any index triple can be nudged to a nearby triple whose
//! cube value equals an arbitrary 6-bit secret, with per-axis displacement
//! at most 4. That yields 6 hidden bits per frame (200 bit/s) with bounded
//! quantization damage.
//!
//! Modules follow the processing chain:
//!
//! - [`magic_matrix`]: cube construction, validation, periodic expansion,
//!   and the four bounded search patterns.
//! - [`lsp`]: LPC analysis, LPC<->LSP conversion, and the predictive split
//!   vector quantizer.
//! - [`stego`]: payload framing, per-frame embed/extract, stream protocol,
//!   and the two comparison baselines (2-LSB, parity QIM).
//! - [`metrics`]: SNR, residual-excited resynthesis, scheme comparison and
//!   the deterministic synthetic corpus.
//! - [`io`]: WAV plus the LSPI/M3DM/LSPC container formats and frame
//!   segmentation.
//! - [`cli`]: command-line workflows wiring the above together.

pub mod cli;
pub mod io;
pub mod lsp;
pub mod magic_matrix;
pub mod metrics;
pub mod stego;

/// Samples per frame: 30 ms at 8 kHz.
pub const FRAME_SIZE: usize = 240;

/// Expected cover sample rate in Hz.
pub const SAMPLE_RATE: u32 = 8000;

/// Order of the linear predictor.
pub const LPC_ORDER: usize = 10;

/// Split of the 10-dimensional residual into sub-vectors.
pub const SUB_DIMS: [usize; 3] = [3, 3, 4];

/// Entries per sub-codebook (8-bit indices).
pub const CODEBOOK_SIZE: usize = 256;
