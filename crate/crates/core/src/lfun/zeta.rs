//! Riemann zeta by Euler-Maclaurin summation, with the functional equation on the left.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::gamma::gamma;
use crate::error::{Error, Result};

/// `B_{2k} / (2k)!` for `k = 1..=40`, via `(-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}`.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=40)
            .map(|k| {
                let e = 2 * k;
                let z2k = match k {
                    1 => PI.powi(2) / 6.0,
                    2 => PI.powi(4) / 90.0,
                    3 => PI.powi(6) / 945.0,
                    _ => (1..=200).rev().map(|n: i32| (n as f64).powi(-e)).sum::<f64>(),
                };
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * z2k / (2.0 * PI).powi(e)
            })
            .collect()
    })
}

/// `zeta(s)` for `s != 1`, accurate to roughly `tol` relative.
pub fn zeta(s: Complex64, tol: f64) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole { op: "zeta", at: "1".into() });
    }
    if s.re < 0.0 {
        let one_minus = 1.0 - s;
        let g = gamma(one_minus)?;
        let z = euler_maclaurin(one_minus, tol)?;
        return Ok(Complex64::new(2.0, 0.0).powc(s)
            * Complex64::new(PI, 0.0).powc(s - 1.0)
            * (PI * s / 2.0).sin()
            * g
            * z);
    }
    euler_maclaurin(s, tol)
}

fn euler_maclaurin(s: Complex64, tol: f64) -> Result<Complex64> {
    let tol = tol.max(1e-16);
    let big_n = 12 + s.norm().ceil() as usize;
    let nf = big_n as f64;
    let mut acc = crate::numeric::ComplexSum::new();
    for n in (1..big_n).rev() {
        acc.add((-s * (n as f64).ln()).exp());
    }
    let n_s = (-s * nf.ln()).exp();
    acc.add(n_s * nf / (s - 1.0));
    acc.add(n_s * 0.5);
    // Correction terms b_k (s)_{2k-1} N^{-s-2k+1}.
    let mut rising = s; // (s)_{2k-1}
    let mut pow = n_s / nf; // N^{-s-2k+1}
    let scale = acc.value().norm().max(1.0);
    for (k, &b) in bernoulli_ratios().iter().enumerate() {
        let term = rising * pow * b;
        acc.add(term);
        if term.norm() < tol * 1e-2 * scale {
            return Ok(acc.value());
        }
        let k2 = 2.0 * (k + 1) as f64;
        rising *= (s + k2 - 1.0) * (s + k2);
        pow /= nf * nf;
    }
    Err(Error::NoConvergence { op: "zeta", reason: format!("Euler-Maclaurin at s = {s}") })
}

/// `zeta^{(2)}(s) = (1 - 2^{-s}) zeta(s)`.
pub fn zeta_without_two(s: Complex64, tol: f64) -> Result<Complex64> {
    Ok((1.0 - Complex64::new(2.0, 0.0).powc(-s)) * zeta(s, tol)?)
}
