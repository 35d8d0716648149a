//! Windowed autocorrelation and the Levinson-Durbin recursion.

use std::f64::consts::PI;

use super::{LpcCoeffs, SpeechFrame};
use crate::{FRAME_SIZE, LPC_ORDER};

/// Relative white-noise floor applied to autocorrelation lag 0.
const NOISE_FLOOR: f64 = 1e-5;

/// Hamming window of length `n`.
pub fn hamming_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n as f64 - 1.0)).cos())
        .collect()
}

/// Autocorrelation of `samples` at lags 0..=order.
pub fn autocorrelation(samples: &[f64], order: usize) -> Vec<f64> {
    (0..=order)
        .map(|lag| {
            samples[lag..]
                .iter()
                .zip(samples.iter())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Solve the Toeplitz normal equations for prediction coefficients.
///
/// `r` holds autocorrelation lags 0..=p; returns the coefficients a_1..=a_p
/// of the predictor s[n] ~ sum a_j s[n-j] and the stability verdict from
/// the reflection coefficients (all |k| < 1).
pub fn levinson_durbin(r: &[f64]) -> LpcCoeffs {
    let p = r.len() - 1;
    debug_assert_eq!(p, LPC_ORDER);
    if r[0] <= 0.0 {
        return LpcCoeffs::zero();
    }

    let mut a = [0.0f64; LPC_ORDER];
    let mut err = r[0];
    let mut stable = true;

    for m in 1..=p {
        let mut acc = r[m];
        for j in 1..m {
            acc -= a[j - 1] * r[m - j];
        }
        if err <= 0.0 {
            stable = false;
            break;
        }
        let k = acc / err;
        if k.abs() >= 1.0 {
            stable = false;
        }

        let mut next = a;
        next[m - 1] = k;
        for j in 1..m {
            next[j - 1] = a[j - 1] - k * a[m - j - 1];
        }
        a = next;
        err *= 1.0 - k * k;
    }

    LpcCoeffs { a, stable }
}

/// LPC analysis of one frame: Hamming window, autocorrelation with a
/// relative noise floor on lag 0, then Levinson-Durbin.
pub fn lpc_analyze(frame: &SpeechFrame) -> LpcCoeffs {
    let window = hamming_window(FRAME_SIZE);
    let windowed: Vec<f64> = frame
        .samples
        .iter()
        .zip(window.iter())
        .map(|(&s, &w)| f64::from(s) * w)
        .collect();

    let mut r = autocorrelation(&windowed, LPC_ORDER);
    r[0] *= 1.0 + NOISE_FLOOR;
    levinson_durbin(&r)
}
