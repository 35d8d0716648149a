//! Container I/O: WAV cover speech, LSPI index streams, M3DM matrices,
//! LSPC codebooks, and frame segmentation.
//!
//! All multi-byte integers are little-endian. Each container rejects a
//! wrong magic string with an error naming the format.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::lsp::{Codebook, IndexTriple, SpeechFrame, SubCodebook};
use crate::magic_matrix::{MagicMatrix, CUBE_DIM};
use crate::{CODEBOOK_SIZE, FRAME_SIZE, SAMPLE_RATE, SUB_DIMS};

const WAV_FORMAT_PCM: u16 = 1;
const LSPI_MAGIC: &[u8; 8] = b"LSPIDX01";
const M3DM_MAGIC: &[u8; 8] = b"M3DMAGIC";
const M3DM_VERSION: u8 = 0x01;
const LSPC_MAGIC: &[u8; 8] = b"LSPCBK01";

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("malformed WAV: {0}")]
    WavParse(String),
    #[error("unsupported WAV {parameter}: {value} (need {expected})")]
    WavFormat {
        parameter: &'static str,
        value: u32,
        expected: &'static str,
    },
    #[error("not a {format} file: bad magic")]
    BadMagic { format: &'static str },
    #[error("{format} file truncated: need {need} bytes, have {have}")]
    Truncated {
        format: &'static str,
        need: usize,
        have: usize,
    },
    #[error("{format} file malformed: {detail}")]
    Malformed {
        format: &'static str,
        detail: String,
    },
    #[error("matrix file fails validation: {0}")]
    InvalidMatrix(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn read_file(path: &Path) -> Result<Vec<u8>, ContainerError> {
    fs::read(path).map_err(|source| ContainerError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ContainerError> {
    let mut f = fs::File::create(path).map_err(|source| ContainerError::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(bytes).map_err(|source| ContainerError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn le_u16(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// An 8 kHz mono 16-bit PCM clip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavClip {
    pub sample_rate: u32,
    pub channels: u16,
    pub samples: Vec<i16>,
}

impl WavClip {
    /// A clip in the only accepted format: 8 kHz, mono.
    pub fn mono_8k(samples: Vec<i16>) -> Self {
        Self { sample_rate: SAMPLE_RATE, channels: 1, samples }
    }
}

/// Parse a RIFF/WAVE file and validate it is 8 kHz mono 16-bit PCM.
pub fn read_wav(path: &Path) -> Result<WavClip, ContainerError> {
    decode_wav(&read_file(path)?)
}

/// Parse WAV data from memory; see [`read_wav`].
pub fn decode_wav(bytes: &[u8]) -> Result<WavClip, ContainerError> {
    let parse = |msg: &str| ContainerError::WavParse(msg.to_string());

    if bytes.len() < 12 {
        return Err(parse("file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(parse("missing RIFF tag"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(parse("missing WAVE tag"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = le_u32(&bytes[pos + 4..pos + 8]) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or_else(|| parse("chunk size overflows"))?;
        if body_end > bytes.len() {
            return Err(parse(&format!(
                "chunk `{}` declares {size} bytes but only {} remain",
                String::from_utf8_lossy(id),
                bytes.len() - body_start
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(parse("fmt chunk shorter than 16 bytes"));
                }
                fmt = Some((
                    le_u16(&body[0..2]),
                    le_u16(&body[2..4]),
                    le_u32(&body[4..8]),
                    le_u16(&body[14..16]),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes are padded with one byte.
        pos = body_end + (size & 1);
    }

    let (format, channels, rate, bits) = fmt.ok_or_else(|| parse("missing fmt chunk"))?;
    if format != WAV_FORMAT_PCM {
        return Err(ContainerError::WavFormat {
            parameter: "audio format",
            value: u32::from(format),
            expected: "PCM (1)",
        });
    }
    if rate != SAMPLE_RATE {
        return Err(ContainerError::WavFormat {
            parameter: "sample rate",
            value: rate,
            expected: "8000 Hz",
        });
    }
    if channels != 1 {
        return Err(ContainerError::WavFormat {
            parameter: "channels",
            value: u32::from(channels),
            expected: "1 (mono)",
        });
    }
    if bits != 16 {
        return Err(ContainerError::WavFormat {
            parameter: "bit depth",
            value: u32::from(bits),
            expected: "16",
        });
    }

    let data = data.ok_or_else(|| parse("missing data chunk"))?;
    if data.len() % 2 != 0 {
        return Err(parse("data chunk has odd byte length"));
    }
    let samples = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    Ok(WavClip { sample_rate: rate, channels, samples })
}

/// Serialize a clip as a canonical 16-bit PCM WAV file.
pub fn encode_wav(clip: &WavClip) -> Vec<u8> {
    let data_len = clip.samples.len() * 2;
    let byte_rate = clip.sample_rate * u32::from(clip.channels) * 2;
    let block_align = clip.channels * 2;

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&WAV_FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&clip.channels.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for s in &clip.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn write_wav(clip: &WavClip, path: &Path) -> Result<(), ContainerError> {
    write_file(path, &encode_wav(clip))
}

/// Split samples into consecutive 240-sample frames; a trailing remainder
/// is zero-padded into a final frame flagged as padded.
pub fn frame_split(samples: &[i16]) -> Vec<SpeechFrame> {
    let mut frames = Vec::with_capacity(samples.len().div_ceil(FRAME_SIZE));
    let mut chunks = samples.chunks_exact(FRAME_SIZE);
    for chunk in chunks.by_ref() {
        let mut buf = [0i16; FRAME_SIZE];
        buf.copy_from_slice(chunk);
        frames.push(SpeechFrame::new(buf));
    }
    let tail = chunks.remainder();
    if !tail.is_empty() {
        let mut buf = [0i16; FRAME_SIZE];
        buf[..tail.len()].copy_from_slice(tail);
        frames.push(SpeechFrame { samples: buf, padded: true });
    }
    frames
}

/// Serialize an index stream: magic, frame count, 3 bytes per frame.
pub fn encode_lspi(indices: &[IndexTriple]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + indices.len() * 3);
    out.extend_from_slice(LSPI_MAGIC);
    out.extend_from_slice(&(indices.len() as u32).to_le_bytes());
    for t in indices {
        out.extend_from_slice(&[t.ix, t.iy, t.iz]);
    }
    out
}

pub fn decode_lspi(bytes: &[u8]) -> Result<Vec<IndexTriple>, ContainerError> {
    if bytes.len() < 8 || &bytes[0..8] != LSPI_MAGIC {
        return Err(ContainerError::BadMagic { format: "LSPI" });
    }
    if bytes.len() < 12 {
        return Err(ContainerError::Truncated { format: "LSPI", need: 12, have: bytes.len() });
    }
    let count = le_u32(&bytes[8..12]) as usize;
    let need = 12 + count * 3;
    if bytes.len() < need {
        return Err(ContainerError::Truncated { format: "LSPI", need, have: bytes.len() });
    }
    Ok(bytes[12..need]
        .chunks_exact(3)
        .map(|c| IndexTriple::new(c[0], c[1], c[2]))
        .collect())
}

pub fn write_lspi(indices: &[IndexTriple], path: &Path) -> Result<(), ContainerError> {
    write_file(path, &encode_lspi(indices))
}

pub fn read_lspi(path: &Path) -> Result<Vec<IndexTriple>, ContainerError> {
    decode_lspi(&read_file(path)?)
}

/// Serialize a matrix: magic, version, seed, then 512 cells in x-major
/// (then y, then z) order.
pub fn encode_matrix(m: &MagicMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 1 + 8 + 512);
    out.extend_from_slice(M3DM_MAGIC);
    out.push(M3DM_VERSION);
    out.extend_from_slice(&m.seed().to_le_bytes());
    for x in 0..CUBE_DIM {
        for y in 0..CUBE_DIM {
            for z in 0..CUBE_DIM {
                out.push(m.cell(x, y, z));
            }
        }
    }
    out
}

/// Parse a matrix file without checking the cube constraints.
pub fn decode_matrix_unvalidated(bytes: &[u8]) -> Result<MagicMatrix, ContainerError> {
    if bytes.len() < 8 || &bytes[0..8] != M3DM_MAGIC {
        return Err(ContainerError::BadMagic { format: "M3DM" });
    }
    let need = 8 + 1 + 8 + 512;
    if bytes.len() < need {
        return Err(ContainerError::Truncated { format: "M3DM", need, have: bytes.len() });
    }
    if bytes[8] != M3DM_VERSION {
        return Err(ContainerError::Malformed {
            format: "M3DM",
            detail: format!("unsupported version {}", bytes[8]),
        });
    }
    let seed = u64::from_le_bytes(bytes[9..17].try_into().expect("8 bytes"));
    let mut cells = [[[0u8; CUBE_DIM]; CUBE_DIM]; CUBE_DIM];
    let mut i = 17;
    for plane in cells.iter_mut() {
        for row in plane.iter_mut() {
            for cell in row.iter_mut() {
                *cell = bytes[i];
                i += 1;
            }
        }
    }
    Ok(MagicMatrix::from_parts(cells, seed))
}

/// Parse a matrix file and re-validate all 32 constraints.
pub fn decode_matrix(bytes: &[u8]) -> Result<MagicMatrix, ContainerError> {
    let m = decode_matrix_unvalidated(bytes)?;
    let report = m.validate();
    if !report.passed() {
        return Err(ContainerError::InvalidMatrix(report.to_string()));
    }
    Ok(m)
}

pub fn write_matrix(m: &MagicMatrix, path: &Path) -> Result<(), ContainerError> {
    write_file(path, &encode_matrix(m))
}

pub fn read_matrix(path: &Path) -> Result<MagicMatrix, ContainerError> {
    decode_matrix(&read_file(path)?)
}

pub fn read_matrix_unvalidated(path: &Path) -> Result<MagicMatrix, ContainerError> {
    decode_matrix_unvalidated(&read_file(path)?)
}

/// Serialize a codebook: magic, then each sub-codebook as 256 x dim
/// little-endian f64, in sub order (3, 3, 4).
pub fn encode_codebook(cb: &Codebook) -> Vec<u8> {
    let total: usize = SUB_DIMS.iter().sum::<usize>() * CODEBOOK_SIZE * 8;
    let mut out = Vec::with_capacity(8 + total);
    out.extend_from_slice(LSPC_MAGIC);
    for m in 0..3 {
        for v in cb.sub(m).values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_codebook(bytes: &[u8]) -> Result<Codebook, ContainerError> {
    if bytes.len() < 8 || &bytes[0..8] != LSPC_MAGIC {
        return Err(ContainerError::BadMagic { format: "LSPC" });
    }
    let need = 8 + SUB_DIMS.iter().sum::<usize>() * CODEBOOK_SIZE * 8;
    if bytes.len() < need {
        return Err(ContainerError::Truncated { format: "LSPC", need, have: bytes.len() });
    }
    let mut pos = 8usize;
    let mut subs = Vec::with_capacity(3);
    for dim in SUB_DIMS {
        let n = CODEBOOK_SIZE * dim;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_le_bytes(bytes[pos..pos + 8].try_into().expect("8 bytes")));
            pos += 8;
        }
        subs.push(SubCodebook::new(dim, values).expect("sized above"));
    }
    let subs: [SubCodebook; 3] = subs.try_into().expect("three sub-codebooks");
    Codebook::new(subs).map_err(|detail| ContainerError::Malformed { format: "LSPC", detail })
}

pub fn write_codebook(cb: &Codebook, path: &Path) -> Result<(), ContainerError> {
    write_file(path, &encode_codebook(cb))
}

pub fn read_codebook(path: &Path) -> Result<Codebook, ContainerError> {
    decode_codebook(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsp::make_synthetic_codebook;
    use proptest::prelude::*;

    #[test]
    fn minimal_wav_round_trip() {
        let clip = WavClip::mono_8k((0..240).map(|i| (i * 37 % 251) as i16 - 100).collect());
        let decoded = decode_wav(&encode_wav(&clip)).unwrap();
        assert_eq!(decoded, clip);
        assert_eq!(decoded.samples.len(), 240);
    }

    #[test]
    fn empty_clip_round_trips() {
        let clip = WavClip::mono_8k(Vec::new());
        let bytes = encode_wav(&clip);
        assert_eq!(decode_wav(&bytes).unwrap(), clip);
    }

    #[test]
    fn rejects_wrong_sample_rate_naming_it() {
        let mut clip = WavClip::mono_8k(vec![0; 10]);
        clip.sample_rate = 44_100;
        let err = decode_wav(&encode_wav(&clip)).unwrap_err();
        match err {
            ContainerError::WavFormat { parameter, value, .. } => {
                assert_eq!(parameter, "sample rate");
                assert_eq!(value, 44_100);
            }
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn rejects_stereo_naming_channels() {
        let mut clip = WavClip::mono_8k(vec![0; 10]);
        clip.channels = 2;
        let err = decode_wav(&encode_wav(&clip)).unwrap_err();
        match err {
            ContainerError::WavFormat { parameter, .. } => assert_eq!(parameter, "channels"),
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn rejects_truncated_data_chunk() {
        let clip = WavClip::mono_8k(vec![1; 100]);
        let mut bytes = encode_wav(&clip);
        bytes.truncate(bytes.len() - 50);
        assert!(matches!(decode_wav(&bytes), Err(ContainerError::WavParse(_))));
    }

    #[test]
    fn rejects_non_riff() {
        assert!(matches!(
            decode_wav(b"OGGS0000WAVE"),
            Err(ContainerError::WavParse(_))
        ));
    }

    #[test]
    fn frame_split_examples() {
        assert_eq!(frame_split(&vec![1; 480]).len(), 2);
        assert!(frame_split(&vec![1; 480]).iter().all(|f| !f.padded));

        let frames = frame_split(&vec![7; 250]);
        assert_eq!(frames.len(), 2);
        assert!(!frames[0].padded);
        assert!(frames[1].padded);
        assert_eq!(frames[1].samples[9], 7);
        assert!(frames[1].samples[10..].iter().all(|&s| s == 0));

        assert!(frame_split(&[]).is_empty());
    }

    #[test]
    fn lspi_round_trip_and_magic() {
        let indices: Vec<IndexTriple> =
            (0..300u32).map(|i| IndexTriple::new(i as u8, (i / 2) as u8, (i * 7) as u8)).collect();
        let bytes = encode_lspi(&indices);
        assert_eq!(decode_lspi(&bytes).unwrap(), indices);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            decode_lspi(&bad),
            Err(ContainerError::BadMagic { format: "LSPI" })
        ));

        let mut short = bytes;
        short.truncate(40);
        assert!(matches!(decode_lspi(&short), Err(ContainerError::Truncated { .. })));
    }

    #[test]
    fn matrix_round_trip_validates_on_read() {
        let m = MagicMatrix::generate(99);
        let bytes = encode_matrix(&m);
        assert_eq!(bytes.len(), 529);
        let back = decode_matrix(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.seed(), 99);

        let mut bad_magic = bytes.clone();
        bad_magic[3] = b'z';
        assert!(matches!(
            decode_matrix(&bad_magic),
            Err(ContainerError::BadMagic { format: "M3DM" })
        ));

        // Corrupt one cell: strict reader must refuse, unvalidated must not.
        let mut corrupt = bytes.clone();
        corrupt[17] ^= 0x3F;
        assert!(matches!(decode_matrix(&corrupt), Err(ContainerError::InvalidMatrix(_))));
        assert!(decode_matrix_unvalidated(&corrupt).is_ok());

        let mut bad_version = bytes;
        bad_version[8] = 9;
        assert!(matches!(
            decode_matrix(&bad_version),
            Err(ContainerError::Malformed { format: "M3DM", .. })
        ));
    }

    #[test]
    fn codebook_round_trip_and_magic() {
        let cb = make_synthetic_codebook(7);
        let bytes = encode_codebook(&cb);
        assert_eq!(bytes.len(), 8 + 2560 * 8);
        assert_eq!(decode_codebook(&bytes).unwrap(), cb);

        let mut bad = bytes.clone();
        bad[7] = b'9';
        assert!(matches!(
            decode_codebook(&bad),
            Err(ContainerError::BadMagic { format: "LSPC" })
        ));

        let mut short = bytes;
        short.truncate(1000);
        assert!(matches!(decode_codebook(&short), Err(ContainerError::Truncated { .. })));
    }

    #[test]
    fn file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let clip = WavClip::mono_8k(crate::metrics::synthetic_utterance(5, 3));
        let wav_path = dir.path().join("cover.wav");
        write_wav(&clip, &wav_path).unwrap();
        assert_eq!(read_wav(&wav_path).unwrap(), clip);

        let m = MagicMatrix::generate(5);
        let m_path = dir.path().join("cube.m3dm");
        write_matrix(&m, &m_path).unwrap();
        assert_eq!(read_matrix(&m_path).unwrap(), m);

        let cb = make_synthetic_codebook(5);
        let cb_path = dir.path().join("book.lspc");
        write_codebook(&cb, &cb_path).unwrap();
        assert_eq!(read_codebook(&cb_path).unwrap(), cb);

        let idx = vec![IndexTriple::new(1, 2, 3); 10];
        let idx_path = dir.path().join("stream.lspi");
        write_lspi(&idx, &idx_path).unwrap();
        assert_eq!(read_lspi(&idx_path).unwrap(), idx);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn wav_round_trip_is_bit_exact(samples in proptest::collection::vec(any::<i16>(), 0..2000)) {
            let clip = WavClip::mono_8k(samples);
            prop_assert_eq!(decode_wav(&encode_wav(&clip)).unwrap(), clip);
        }

        #[test]
        fn lspi_round_trip_is_bit_exact(
            triples in proptest::collection::vec(any::<(u8, u8, u8)>(), 0..500)
        ) {
            let indices: Vec<IndexTriple> =
                triples.into_iter().map(|(a, b, c)| IndexTriple::new(a, b, c)).collect();
            prop_assert_eq!(decode_lspi(&encode_lspi(&indices)).unwrap(), indices);
        }
    }
}
