//! Command-line workflows: matrix generation/validation, embed, extract,
//! scheme analysis, and capacity accounting.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::io;
use crate::lsp::{make_synthetic_codebook, Codebook, QuantConfig};
use crate::magic_matrix::MagicMatrix;
use crate::metrics::{self, QualityReport};
use crate::stego::{self, Scheme, SecretPayload};

/// Default seed for the synthetic codebook when no LSPC file is supplied.
/// Embedder and analyzer must agree on it; extraction never needs the
/// codebook.
pub const DEFAULT_CODEBOOK_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(
    name = "lspstego",
    about = "Hide data in the LSP quantization indices of 8 kHz speech",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct KeySource {
    /// Stego key: seed for the shared magic cube.
    #[arg(long)]
    seed: Option<u64>,
    /// Load the shared cube from an M3DM file instead of a seed.
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
}

impl KeySource {
    /// Resolve the cube for schemes that need one.
    fn resolve(&self, required: bool) -> Result<Option<MagicMatrix>, String> {
        match (self.seed, &self.matrix) {
            (_, Some(path)) => {
                let m = io::read_matrix(path).map_err(|e| e.to_string())?;
                Ok(Some(m))
            }
            (Some(seed), None) => Ok(Some(MagicMatrix::generate(seed))),
            (None, None) if required => {
                Err("the magic3d scheme needs --seed or --matrix".to_string())
            }
            (None, None) => Ok(None),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a magic cube, validate it, and write an M3DM file.
    GenMatrix {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Check all 32 permutation constraints of an M3DM file.
    ValidateMatrix {
        #[arg(long, value_name = "FILE")]
        matrix: PathBuf,
    },
    /// Embed a secret file into a WAV cover, writing the stego index stream.
    Embed {
        /// 8 kHz mono 16-bit PCM cover.
        cover: PathBuf,
        /// Secret payload file (raw bytes).
        secret: PathBuf,
        #[command(flatten)]
        key: KeySource,
        /// Output LSPI index stream.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Embedding scheme.
        #[arg(long, default_value = "magic3d")]
        scheme: Scheme,
        /// LSPC codebook file (default: built-in synthetic codebook).
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
        /// key=value quantizer config (p_dc, predictor_b).
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Also write the resynthesized stego speech to this WAV file.
        #[arg(long, value_name = "FILE")]
        stego_wav: Option<PathBuf>,
    },
    /// Recover the secret payload from a stego index stream.
    Extract {
        /// Stego LSPI index stream.
        input: PathBuf,
        #[command(flatten)]
        key: KeySource,
        /// Output file for the recovered payload.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value = "magic3d")]
        scheme: Scheme,
    },
    /// Compare schemes over a cover (or the synthetic corpus); write CSV
    /// and gnuplot data.
    Analyze {
        /// Optional WAV cover; without it the deterministic synthetic
        /// corpus is used.
        cover: Option<PathBuf>,
        /// CSV report target; plot data lands next to it.
        #[arg(long, value_name = "FILE")]
        csv: PathBuf,
        /// Payload file; default is a seeded random payload at capacity.
        #[arg(long, value_name = "FILE")]
        secret: Option<PathBuf>,
        /// Seed for the cube, corpus and default payload.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Synthetic corpus size.
        #[arg(long, default_value_t = 20)]
        utterances: usize,
        /// Frames per synthetic utterance.
        #[arg(long, default_value_t = 100)]
        frames: usize,
    },
    /// Print how much payload a cover can hold under each scheme.
    Capacity {
        /// WAV cover to measure.
        cover: Option<PathBuf>,
        /// Instead of a file, assume this many frames.
        #[arg(long)]
        frames: Option<usize>,
    },
}

impl clap::builder::ValueParserFactory for Scheme {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Scheme>())
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), String> {
    match cmd {
        Command::GenMatrix { seed, out } => cmd_gen_matrix(seed, &out),
        Command::ValidateMatrix { matrix } => cmd_validate_matrix(&matrix),
        Command::Embed { cover, secret, key, out, scheme, codebook, config, stego_wav } => {
            cmd_embed(&cover, &secret, &key, &out, scheme, codebook, config, stego_wav)
        }
        Command::Extract { input, key, out, scheme } => cmd_extract(&input, &key, &out, scheme),
        Command::Analyze {
            cover,
            csv,
            secret,
            seed,
            codebook,
            config,
            utterances,
            frames,
        } => cmd_analyze(cover, &csv, secret, seed, codebook, config, utterances, frames),
        Command::Capacity { cover, frames } => cmd_capacity(cover, frames),
    }
}

fn load_codebook(path: &Option<PathBuf>) -> Result<Codebook, String> {
    match path {
        Some(p) => io::read_codebook(p).map_err(|e| e.to_string()),
        None => Ok(make_synthetic_codebook(DEFAULT_CODEBOOK_SEED)),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<QuantConfig, String> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            QuantConfig::parse(&text).map_err(|e| e.to_string())
        }
        None => Ok(QuantConfig::default()),
    }
}

fn cmd_gen_matrix(seed: u64, out: &Path) -> Result<(), String> {
    let m = MagicMatrix::generate(seed);
    let report = m.validate();
    if !report.passed() {
        return Err(format!("generated matrix failed validation: {report}"));
    }
    io::write_matrix(&m, out).map_err(|e| e.to_string())?;
    println!("wrote {} (seed {seed}): {report}", out.display());
    Ok(())
}

fn cmd_validate_matrix(path: &Path) -> Result<(), String> {
    let m = io::read_matrix_unvalidated(path).map_err(|e| e.to_string())?;
    let report = m.validate();
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(format!("{} of 32 constraints violated", report.violations.len()))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_embed(
    cover: &Path,
    secret: &Path,
    key: &KeySource,
    out: &Path,
    scheme: Scheme,
    codebook: Option<PathBuf>,
    config: Option<PathBuf>,
    stego_wav: Option<PathBuf>,
) -> Result<(), String> {
    if scheme == Scheme::None {
        return Err("scheme `none` embeds nothing; pick magic3d, lsb2 or parity_qim".into());
    }
    let clip = io::read_wav(cover).map_err(|e| e.to_string())?;
    let frames = io::frame_split(&clip.samples);
    let payload = SecretPayload::new(
        fs::read(secret).map_err(|e| format!("cannot read secret {}: {e}", secret.display()))?,
    );
    let matrix = key.resolve(scheme == Scheme::Magic3d)?;
    let cb = load_codebook(&codebook)?;
    let qcfg = load_config(&config)?;

    let cover_lsps = stego::analyze_cover(&frames).map_err(|e| e.to_string())?;
    let outcome =
        stego::embed_lsp_stream(&cover_lsps, &payload, scheme, matrix.as_ref(), &cb, &qcfg)
            .map_err(|e| e.to_string())?;

    io::write_lspi(&outcome.indices, out).map_err(|e| e.to_string())?;

    // Quality against the clean-quantized reference.
    let residuals = metrics::analysis_residuals(&frames).map_err(|e| e.to_string())?;
    let clean = stego::embed_lsp_stream(
        &cover_lsps,
        &SecretPayload::empty(),
        Scheme::None,
        None,
        &cb,
        &qcfg,
    )
    .map_err(|e| e.to_string())?;
    let clean_resynth =
        metrics::synthesize_from_residuals(&residuals, &clean.decoded).map_err(|e| e.to_string())?;
    let stego_resynth = metrics::synthesize_from_residuals(&residuals, &outcome.decoded)
        .map_err(|e| e.to_string())?;
    let snr_db = metrics::snr(&clean_resynth, &stego_resynth).map_err(|e| e.to_string())?;

    let carrying = outcome.carrying_frames();
    let used_bits = stego::HEADER_BITS + payload.len_bytes() * 8;
    let capacity_bits = frames.iter().filter(|f| !f.padded).count() * scheme.bits_per_frame();
    let mean_sq: f64 = if carrying > 0 {
        outcome.sq_distances.iter().flatten().map(|&d| f64::from(d)).sum::<f64>()
            / carrying as f64
    } else {
        0.0
    };

    println!(
        "embedded {} payload bytes with {} into {} of {} frames",
        payload.len_bytes(),
        scheme.name(),
        carrying,
        frames.len()
    );
    println!(
        "capacity used: {used_bits}/{capacity_bits} bits ({:.1}%), channel rate {} bit/s",
        100.0 * used_bits as f64 / capacity_bits as f64,
        scheme.capacity_bps()
    );
    println!("mean squared index displacement: {mean_sq:.3}");
    println!("SNR vs clean-quantized speech: {snr_db:.2} dB");

    if let Some(wav_path) = stego_wav {
        let samples: Vec<i16> = stego_resynth
            .iter()
            .map(|&v| v.clamp(f64::from(i16::MIN), f64::from(i16::MAX)).round() as i16)
            .collect();
        io::write_wav(&io::WavClip::mono_8k(samples), &wav_path).map_err(|e| e.to_string())?;
        println!("wrote stego speech to {}", wav_path.display());
    }
    Ok(())
}

fn cmd_extract(input: &Path, key: &KeySource, out: &Path, scheme: Scheme) -> Result<(), String> {
    let indices = io::read_lspi(input).map_err(|e| e.to_string())?;
    let matrix = key.resolve(scheme == Scheme::Magic3d)?;
    let payload = stego::extract_stream_scheme(&indices, scheme, matrix.as_ref())
        .map_err(|e| e.to_string())?;
    fs::write(out, payload.bytes())
        .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    println!(
        "recovered {} bytes from {} frames into {}",
        payload.len_bytes(),
        indices.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    cover: Option<PathBuf>,
    csv: &Path,
    secret: Option<PathBuf>,
    seed: u64,
    codebook: Option<PathBuf>,
    config: Option<PathBuf>,
    utterances: usize,
    frames_each: usize,
) -> Result<(), String> {
    let cb = load_codebook(&codebook)?;
    let qcfg = load_config(&config)?;
    let matrix = MagicMatrix::generate(seed);

    let covers: Vec<Vec<i16>> = match cover {
        Some(path) => vec![io::read_wav(&path).map_err(|e| e.to_string())?.samples],
        None => metrics::synthetic_corpus(seed, utterances, frames_each),
    };

    let payload = match secret {
        Some(path) => SecretPayload::new(
            fs::read(&path).map_err(|e| format!("cannot read secret {}: {e}", path.display()))?,
        ),
        None => {
            // Enough seeded random bytes to saturate the highest-capacity
            // scheme on the largest cover.
            let max_frames = covers
                .iter()
                .map(|c| c.len().div_ceil(crate::FRAME_SIZE))
                .max()
                .unwrap_or(0);
            let bytes = stego::max_payload_bytes(Scheme::Magic3d, max_frames);
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5EC2E7);
            SecretPayload::new((0..bytes).map(|_| (rng.next_u64() & 0xFF) as u8).collect())
        }
    };

    let mut rows: Vec<(usize, QualityReport)> = Vec::new();
    let mut rate_points = Vec::new();
    for (u, samples) in covers.iter().enumerate() {
        let frames = io::frame_split(samples);
        let reports = metrics::compare_schemes(&frames, &payload, &matrix, &cb, &qcfg)
            .map_err(|e| e.to_string())?;
        for r in reports {
            rows.push((u, r));
        }
        let points = metrics::snr_vs_rate(
            &frames,
            &payload,
            &matrix,
            &cb,
            &qcfg,
            &[0.25, 0.5, 0.75, 1.0],
        )
        .map_err(|e| e.to_string())?;
        rate_points.push(points);
    }

    write_csv(csv, &rows)?;
    write_plot_data(csv, &rows, &rate_points)?;
    print_summary(&rows);
    Ok(())
}

fn write_csv(path: &Path, rows: &[(usize, QualityReport)]) -> Result<(), String> {
    let mut out = String::from(
        "utterance,scheme,capacity_bps,payload_bytes,carrying_frames,snr_db,\
         mean_weighted_error_clean,mean_weighted_error_stego,relative_error_increase,\
         mean_sq_distance\n",
    );
    for (u, r) in rows {
        out.push_str(&format!(
            "{u},{},{},{},{},{:.6},{:.9},{:.9},{:.9},{:.4}\n",
            r.scheme.name(),
            r.capacity_bps,
            r.payload_bytes,
            r.carrying_frames,
            r.snr_db,
            r.mean_weighted_error_clean,
            r.mean_weighted_error_stego,
            r.relative_error_increase,
            r.mean_sq_distance
        ));
    }
    fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Histogram and rate-curve data next to the CSV, gnuplot `index` blocks
/// separated by blank lines.
fn write_plot_data(
    csv: &Path,
    rows: &[(usize, QualityReport)],
    rate_points: &[Vec<metrics::RatePoint>],
) -> Result<(), String> {
    let stem = csv.with_extension("");
    let hist_path = PathBuf::from(format!("{}_hist.dat", stem.display()));
    let rate_path = PathBuf::from(format!("{}_snr_rate.dat", stem.display()));

    let mut hist = String::from("# displacement histograms, one block per scheme\n");
    for scheme in [Scheme::Magic3d, Scheme::Lsb2, Scheme::ParityQim] {
        hist.push_str(&format!("# scheme: {}\n# sq_distance count\n", scheme.name()));
        let mut totals = [0u64; metrics::HIST_BUCKETS];
        for (_, r) in rows.iter().filter(|(_, r)| r.scheme == scheme) {
            for (b, c) in r.displacement_histogram.iter().enumerate() {
                totals[b] += c;
            }
        }
        for (b, c) in totals.iter().enumerate() {
            if b == metrics::HIST_OVERFLOW {
                hist.push_str(&format!("# >27 {c}\n"));
            } else {
                hist.push_str(&format!("{b} {c}\n"));
            }
        }
        hist.push_str("\n\n");
    }
    fs::write(&hist_path, hist)
        .map_err(|e| format!("cannot write {}: {e}", hist_path.display()))?;

    let mut rate = String::from("# mean SNR vs embedding rate, one block per scheme\n");
    for scheme in [Scheme::Magic3d, Scheme::Lsb2, Scheme::ParityQim] {
        rate.push_str(&format!("# scheme: {}\n# rate_bps snr_db\n", scheme.name()));
        let mut by_rate: Vec<(f64, f64, usize)> = Vec::new();
        for points in rate_points {
            for p in points.iter().filter(|p| p.scheme == scheme) {
                match by_rate.iter_mut().find(|(r, _, _)| (*r - p.rate_bps).abs() < 1e-9) {
                    Some((_, sum, n)) => {
                        *sum += p.snr_db;
                        *n += 1;
                    }
                    None => by_rate.push((p.rate_bps, p.snr_db, 1)),
                }
            }
        }
        by_rate.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (r, sum, n) in by_rate {
            rate.push_str(&format!("{r} {:.4}\n", sum / n as f64));
        }
        rate.push_str("\n\n");
    }
    fs::write(&rate_path, rate)
        .map_err(|e| format!("cannot write {}: {e}", rate_path.display()))?;

    println!("wrote {} and {}", hist_path.display(), rate_path.display());
    Ok(())
}

fn print_summary(rows: &[(usize, QualityReport)]) {
    println!("\nscheme      capacity  mean SNR (dB)  mean error increase");
    for scheme in [Scheme::None, Scheme::Magic3d, Scheme::Lsb2, Scheme::ParityQim] {
        let selected: Vec<&QualityReport> =
            rows.iter().filter(|(_, r)| r.scheme == scheme).map(|(_, r)| r).collect();
        if selected.is_empty() {
            continue;
        }
        let n = selected.len() as f64;
        let snr = selected.iter().map(|r| r.snr_db).sum::<f64>() / n;
        let inc = selected.iter().map(|r| r.relative_error_increase).sum::<f64>() / n;
        println!(
            "{:<11} {:>4} b/s {:>13.2} {:>20.4}%",
            scheme.name(),
            scheme.capacity_bps(),
            snr,
            inc * 100.0
        );
    }
}

fn cmd_capacity(cover: Option<PathBuf>, frames: Option<usize>) -> Result<(), String> {
    let (n_frames, usable) = match (cover, frames) {
        (Some(path), _) => {
            let clip = io::read_wav(&path).map_err(|e| e.to_string())?;
            let fr = io::frame_split(&clip.samples);
            let usable = fr.iter().filter(|f| !f.padded).count();
            (fr.len(), usable)
        }
        (None, Some(n)) => (n, n),
        (None, None) => return Err("supply a cover file or --frames".into()),
    };

    println!(
        "{n_frames} frames ({:.2} s), {usable} usable for embedding",
        n_frames as f64 * 0.03
    );
    println!("scheme      rate      header  max payload");
    for scheme in [Scheme::Magic3d, Scheme::Lsb2, Scheme::ParityQim] {
        println!(
            "{:<11} {:>3} bit/s {:>6}  {} bytes",
            scheme.name(),
            scheme.capacity_bps(),
            scheme.header_frames(),
            stego::max_payload_bytes(scheme, usable)
        );
    }
    Ok(())
}
