//! LPC <-> LSP conversion via the symmetric/antisymmetric polynomial pair.
//!
//! From A(z) = 1 - sum a_j z^-j form P(z) = A(z) + z^-11 A(1/z) and
//! Q(z) = A(z) - z^-11 A(1/z). Dividing out the trivial roots at z = -1 and
//! z = +1 leaves two symmetric degree-10 polynomials whose roots all sit on
//! the unit circle; their angles, interleaved, are the ten LSP values.

use std::f64::consts::PI;

use super::{LpcCoeffs, LspError, LspVector};
use crate::LPC_ORDER;

const HALF: usize = LPC_ORDER / 2;

/// Chebyshev-basis coefficients of a symmetric degree-10 polynomial:
/// on the unit circle it reduces to c[0] + sum 2*c[k] T_k(cos w) after
/// factoring out e^{-j5w}.
#[derive(Debug, Clone, Copy)]
struct ChebPoly {
    b: [f64; HALF + 1],
}

impl ChebPoly {
    /// `f` are the 11 polynomial coefficients, f[i] == f[10-i].
    fn from_symmetric(f: &[f64; LPC_ORDER + 1]) -> Self {
        let mut b = [0.0; HALF + 1];
        b[0] = f[HALF];
        for k in 1..=HALF {
            b[k] = 2.0 * f[HALF - k];
        }
        Self { b }
    }

    /// Evaluate at x = cos(omega) by Clenshaw recurrence.
    fn eval(&self, x: f64) -> f64 {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for k in (1..=HALF).rev() {
            let d = 2.0 * x * d1 - d2 + self.b[k];
            d2 = d1;
            d1 = d;
        }
        x * d1 - d2 + self.b[0]
    }
}

/// Split A(z) into the deflated symmetric pair (P', Q'), each 11 coefficients.
fn sum_difference_polys(a: &[f64; LPC_ORDER]) -> ([f64; LPC_ORDER + 1], [f64; LPC_ORDER + 1]) {
    // alpha_0 = 1, alpha_j = -a_j
    let mut alpha = [0.0f64; LPC_ORDER + 2];
    alpha[0] = 1.0;
    for (j, &aj) in a.iter().enumerate() {
        alpha[j + 1] = -aj;
    }

    // P_i = alpha_i + alpha_{11-i}, Q_i = alpha_i - alpha_{11-i}, i = 0..=11
    let mut p = [0.0f64; LPC_ORDER + 2];
    let mut q = [0.0f64; LPC_ORDER + 2];
    for i in 0..=LPC_ORDER + 1 {
        p[i] = alpha[i] + alpha[LPC_ORDER + 1 - i];
        q[i] = alpha[i] - alpha[LPC_ORDER + 1 - i];
    }

    // Deflate P by (1 + z^-1), Q by (1 - z^-1).
    let mut ps = [0.0f64; LPC_ORDER + 1];
    let mut qs = [0.0f64; LPC_ORDER + 1];
    ps[0] = p[0];
    qs[0] = q[0];
    for i in 1..=LPC_ORDER {
        ps[i] = p[i] - ps[i - 1];
        qs[i] = q[i] + qs[i - 1];
    }
    (ps, qs)
}

/// Find the `need` roots of `poly` (as angles in (0, pi)) by sign-change
/// scanning on a uniform angle grid, refined by bisection. Returns None if
/// the grid missed a pair.
fn roots_on_circle(poly: &ChebPoly, need: usize, grid: usize) -> Option<Vec<f64>> {
    let mut roots = Vec::with_capacity(need);
    let step = PI / grid as f64;
    let mut w_prev = 0.0f64;
    let mut v_prev = poly.eval(1.0); // cos(0)

    for i in 1..=grid {
        let w = step * i as f64;
        let v = poly.eval(w.cos());
        if v == 0.0 {
            roots.push(w);
        } else if v_prev * v < 0.0 {
            // Bisect on the angle.
            let (mut lo, mut hi) = (w_prev, w);
            let (mut vlo, _) = (v_prev, v);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                let vm = poly.eval(mid.cos());
                if vm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if vlo * vm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    vlo = vm;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        if roots.len() == need {
            return Some(roots);
        }
        w_prev = w;
        v_prev = v;
    }
    None
}

/// Convert predictor coefficients to ten strictly increasing LSP angles.
pub fn lpc_to_lsp(c: &LpcCoeffs) -> Result<LspVector, LspError> {
    let (ps, qs) = sum_difference_polys(&c.a);
    let p_poly = ChebPoly::from_symmetric(&ps);
    let q_poly = ChebPoly::from_symmetric(&qs);

    // Close roots can hide from a coarse grid; retry finer before giving up.
    let mut found = None;
    for grid in [512usize, 2048, 8192, 32768, 131072] {
        match (
            roots_on_circle(&p_poly, HALF, grid),
            roots_on_circle(&q_poly, HALF, grid),
        ) {
            (Some(pr), Some(qr)) => {
                found = Some((pr, qr));
                break;
            }
            _ => continue,
        }
    }
    let (pr, qr) = found.ok_or_else(|| {
        LspError::Conversion("failed to bracket 10 roots on the unit circle".into())
    })?;

    let mut p = [0.0f64; LPC_ORDER];
    for (k, (a, b)) in pr.iter().zip(qr.iter()).enumerate() {
        p[2 * k] = *a;
        p[2 * k + 1] = *b;
    }
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let lsp = LspVector::new(p);
    lsp.check_valid()
        .map_err(|_| LspError::Conversion("roots not strictly increasing in (0, pi)".into()))?;
    Ok(lsp)
}

/// Multiply the running polynomial by (1 - 2 cos(w) z^-1 + z^-2).
fn mul_quadratic(coeffs: &mut Vec<f64>, w: f64) {
    let c = -2.0 * w.cos();
    let n = coeffs.len();
    coeffs.push(0.0);
    coeffs.push(0.0);
    for i in (0..n).rev() {
        let v = coeffs[i];
        coeffs[i + 2] += v;
        coeffs[i + 1] += c * v;
    }
}

/// Rebuild predictor coefficients from LSP angles.
///
/// Alternating angles rebuild the two symmetric polynomials; restoring the
/// trivial roots and averaging recovers A(z). Valid (strictly increasing,
/// in-range) input always yields a minimum-phase predictor.
pub fn lsp_to_lpc(lsp: &LspVector) -> Result<LpcCoeffs, LspError> {
    lsp.check_valid()?;

    let mut p_coeffs = vec![1.0f64];
    let mut q_coeffs = vec![1.0f64];
    for k in 0..HALF {
        mul_quadratic(&mut p_coeffs, lsp.p[2 * k]);
        mul_quadratic(&mut q_coeffs, lsp.p[2 * k + 1]);
    }

    // P = P' * (1 + z^-1), Q = Q' * (1 - z^-1), both degree 11.
    let mut p_full = [0.0f64; LPC_ORDER + 2];
    let mut q_full = [0.0f64; LPC_ORDER + 2];
    for i in 0..=LPC_ORDER {
        p_full[i] += p_coeffs[i];
        p_full[i + 1] += p_coeffs[i];
        q_full[i] += q_coeffs[i];
        q_full[i + 1] -= q_coeffs[i];
    }

    // A = (P + Q) / 2; alpha_0 == 1 and alpha_11 == 0 by construction.
    let mut a = [0.0f64; LPC_ORDER];
    for (j, v) in a.iter_mut().enumerate() {
        *v = -0.5 * (p_full[j + 1] + q_full[j + 1]);
    }
    Ok(LpcCoeffs { a, stable: true })
}
