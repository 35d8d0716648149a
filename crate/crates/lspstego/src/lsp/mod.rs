//! Per-frame LPC analysis, LPC<->LSP conversion, and the predictive split
//! vector quantizer that produces and consumes index triples.

mod codebook;
mod conversion;
mod lpc;
mod quantizer;

pub use codebook::{make_synthetic_codebook, Codebook, SubCodebook};
pub use conversion::{lpc_to_lsp, lsp_to_lpc};
pub use lpc::{autocorrelation, hamming_window, levinson_durbin, lpc_analyze};
pub use quantizer::{
    best_indices, best_indices_with_parity, dequantize, prepare_frame, quantize, reconstruct,
    repair_monotonicity, sub_errors_for, weight_matrix, FrameContext, QuantState,
};

use std::f64::consts::PI;

use crate::{FRAME_SIZE, LPC_ORDER};

/// Minimum gap enforced between adjacent decoded LSP values, in radians.
pub const LSP_MIN_GAP: f64 = 1e-3;

/// Errors across the analysis/quantization pipeline.
#[derive(Debug, thiserror::Error)]
pub enum LspError {
    #[error("LSP conversion failed: {0}")]
    Conversion(String),
    #[error("LSP vector not strictly increasing in (0, pi) at position {0}")]
    NotIncreasing(usize),
    #[error("config: {0}")]
    Config(String),
}

/// One 30 ms frame of 8 kHz PCM speech.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeechFrame {
    pub samples: [i16; FRAME_SIZE],
    /// True when the frame was completed with trailing zeros by the
    /// splitter; such a frame never carries hidden bits.
    pub padded: bool,
}

impl SpeechFrame {
    pub fn new(samples: [i16; FRAME_SIZE]) -> Self {
        Self { samples, padded: false }
    }
}

/// Direct-form coefficients a_1..=a_10 of the 10th-order predictor
/// 1 - sum a_j z^-j, plus a stability flag from the reflection
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpcCoeffs {
    pub a: [f64; LPC_ORDER],
    pub stable: bool,
}

impl LpcCoeffs {
    pub fn zero() -> Self {
        Self { a: [0.0; LPC_ORDER], stable: true }
    }
}

/// Ten line-spectral angles in radians.
///
/// A well-formed vector is strictly increasing inside (0, pi); conversions
/// and the quantizer's monotonicity repair only ever produce well-formed
/// vectors, and consumers that require the invariant check it explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LspVector {
    pub p: [f64; LPC_ORDER],
}

impl LspVector {
    pub fn new(p: [f64; LPC_ORDER]) -> Self {
        Self { p }
    }

    /// Uniformly spaced angles k*pi/11: the flat-spectrum vector and the
    /// default long-term DC component.
    pub fn uniform() -> Self {
        let mut p = [0.0; LPC_ORDER];
        for (k, v) in p.iter_mut().enumerate() {
            *v = (k as f64 + 1.0) * PI / 11.0;
        }
        Self { p }
    }

    /// Index of the first position violating strict increase in (0, pi),
    /// if any.
    pub fn check_valid(&self) -> Result<(), LspError> {
        let mut prev = 0.0;
        for (i, &v) in self.p.iter().enumerate() {
            if !(v > prev && v.is_finite()) {
                return Err(LspError::NotIncreasing(i));
            }
            prev = v;
        }
        if prev >= PI {
            return Err(LspError::NotIncreasing(LPC_ORDER - 1));
        }
        Ok(())
    }
}

/// Eq.-(10)-style inverse-gap weights, one per LSP dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightMatrix {
    pub w: [f64; LPC_ORDER],
}

/// The three 8-bit quantization indices of one frame; also the cover symbol
/// seen by the stego layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexTriple {
    pub ix: u8,
    pub iy: u8,
    pub iz: u8,
}

impl IndexTriple {
    pub fn new(ix: u8, iy: u8, iz: u8) -> Self {
        Self { ix, iy, iz }
    }
}

impl From<IndexTriple> for crate::magic_matrix::Coord3 {
    fn from(t: IndexTriple) -> Self {
        Self { x: t.ix, y: t.iy, z: t.iz }
    }
}

impl From<crate::magic_matrix::Coord3> for IndexTriple {
    fn from(c: crate::magic_matrix::Coord3) -> Self {
        Self { ix: c.x, iy: c.y, iz: c.z }
    }
}

/// Quantizer configuration: the long-term DC vector and the first-order
/// predictor constant b = 12/32.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantConfig {
    pub p_dc: [f64; LPC_ORDER],
    pub predictor_b: f64,
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self { p_dc: LspVector::uniform().p, predictor_b: 12.0 / 32.0 }
    }
}

impl QuantConfig {
    /// Parse the plain key=value config format.
    ///
    /// Recognized keys: `p_dc` (10 comma-separated radians, strictly
    /// increasing in (0, pi)) and `predictor_b` (in [0, 1)). Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, LspError> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LspError::Config(format!("line {}: expected key=value", lineno + 1)))?;
            match key.trim() {
                "p_dc" => {
                    let vals: Result<Vec<f64>, _> =
                        value.split(',').map(|s| s.trim().parse::<f64>()).collect();
                    let vals = vals
                        .map_err(|e| LspError::Config(format!("p_dc: bad number: {e}")))?;
                    if vals.len() != LPC_ORDER {
                        return Err(LspError::Config(format!(
                            "p_dc: expected {} values, got {}",
                            LPC_ORDER,
                            vals.len()
                        )));
                    }
                    let mut p = [0.0; LPC_ORDER];
                    p.copy_from_slice(&vals);
                    LspVector::new(p)
                        .check_valid()
                        .map_err(|e| LspError::Config(format!("p_dc: {e}")))?;
                    cfg.p_dc = p;
                }
                "predictor_b" => {
                    let b: f64 = value
                        .trim()
                        .parse()
                        .map_err(|e| LspError::Config(format!("predictor_b: bad number: {e}")))?;
                    if !(0.0..1.0).contains(&b) {
                        return Err(LspError::Config(format!(
                            "predictor_b: {b} outside [0, 1)"
                        )));
                    }
                    cfg.predictor_b = b;
                }
                other => {
                    return Err(LspError::Config(format!("unknown key `{other}`")));
                }
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_lsp_is_valid() {
        LspVector::uniform().check_valid().unwrap();
    }

    #[test]
    fn non_increasing_lsp_is_rejected() {
        let mut p = LspVector::uniform().p;
        p[4] = p[3];
        assert!(LspVector::new(p).check_valid().is_err());
    }

    #[test]
    fn default_config_has_exact_predictor_constant() {
        let cfg = QuantConfig::default();
        assert_eq!(cfg.predictor_b, 0.375);
        assert_eq!(cfg.p_dc, LspVector::uniform().p);
    }

    #[test]
    fn config_parses_overrides() {
        let text = "# comment\n\npredictor_b = 0.5\np_dc = 0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0\n";
        let cfg = QuantConfig::parse(text).unwrap();
        assert_eq!(cfg.predictor_b, 0.5);
        assert_eq!(cfg.p_dc[0], 0.1);
        assert_eq!(cfg.p_dc[9], 1.0);
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(QuantConfig::parse("predictor_b = 1.5").is_err());
        assert!(QuantConfig::parse("p_dc = 1,2,3").is_err());
        assert!(QuantConfig::parse("p_dc = 1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1").is_err());
        assert!(QuantConfig::parse("nonsense = 3").is_err());
        assert!(QuantConfig::parse("no_equals_sign").is_err());
    }
}
