use lspstego::io::frame_split;
use lspstego::lsp::{make_synthetic_codebook, QuantConfig};
use lspstego::magic_matrix::MagicMatrix;
use lspstego::metrics::{compare_schemes, synthetic_corpus};
use lspstego::stego::{Scheme, SecretPayload};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() {
    let m = MagicMatrix::generate(0);
    let cb = make_synthetic_codebook(0);
    let cfg = QuantConfig::default();
    let corpus = synthetic_corpus(0, 20, 100);
    let mut rng = ChaCha20Rng::seed_from_u64(0x5EC2E7);
    let payload = SecretPayload::new((0..80).map(|_| (rng.next_u64() & 0xFF) as u8).collect());

    let mut sums: Vec<(f64, f64, f64)> = vec![(0.0, 0.0, 0.0); 4]; // snr, err_inc, clean_err
    for samples in &corpus {
        let frames = frame_split(samples);
        let reports = compare_schemes(&frames, &payload, &m, &cb, &cfg).unwrap();
        for (i, r) in reports.iter().enumerate() {
            sums[i].0 += r.snr_db;
            sums[i].1 += r.relative_error_increase;
            sums[i].2 += r.mean_weighted_error_clean;
        }
    }
    for (i, scheme) in [Scheme::None, Scheme::Magic3d, Scheme::Lsb2, Scheme::ParityQim].iter().enumerate() {
        println!(
            "{:<11} mean SNR {:>9.3} dB   mean rel err increase {:>9.4}%  (clean err {:.5})",
            scheme.name(),
            sums[i].0 / 20.0,
            sums[i].1 / 20.0 * 100.0,
            sums[i].2 / 20.0
        );
    }
}
