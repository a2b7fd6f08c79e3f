#![allow(dead_code)]

use std::sync::Arc;

use twistratios::arith::kronecker;
use twistratios::modform::{shared_delta_form, HeckeEigenform};
use twistratios::Complex64;

pub const TABLE_SIZE: usize = 1_000_000;

pub fn delta() -> Arc<HeckeEigenform> {
    shared_delta_form(TABLE_SIZE).expect("Delta coefficient table")
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `sum_{n <= m_max} a(n) chi(n) n^{-s}`, straight from the Dirichlet series.
pub fn direct_series(a: impl Fn(u64) -> f64, d: i64, s: Complex64, m_max: u64, skip_even: bool) -> Complex64 {
    let period = d.unsigned_abs().max(1);
    let chars: Vec<f64> = (0..period).map(|r| kronecker(d, r as i64).unwrap() as f64).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (1..=m_max).rev() {
        if skip_even && n % 2 == 0 {
            continue;
        }
        let ch = if period == 1 { 1.0 } else { chars[(n % period) as usize] };
        if ch != 0.0 {
            acc += (-s * (n as f64).ln()).exp() * (a(n) * ch);
        }
    }
    acc
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
