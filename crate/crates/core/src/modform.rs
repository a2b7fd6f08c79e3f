//! Hecke eigenform coefficient tables.
//!
//! The built-in form is Ramanujan's Delta, whose coefficients come from expanding
//! `q * prod (1 - q^n)^24`. Tables are cached on disk (see [`cache`]) because the
//! expansion to a million terms takes several seconds.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{factorize, smallest_prime_factors};
use crate::error::{invalid, precondition, Error, Result};

pub mod cache;

/// Largest table built. The expansion runs in wrapping `i128` arithmetic; up to this
/// size every intermediate coefficient stays far below `2^127`, and the finished table
/// is checked against Hecke relations before use.
pub const MAX_TABLE: usize = 1_000_000;

/// Environment variable naming the coefficient cache directory.
pub const CACHE_DIR_ENV: &str = "TWISTRATIOS_CACHE_DIR";

/// A normalized holomorphic Hecke eigenform of level one.
#[derive(Debug, Clone)]
pub struct HeckeEigenform {
    label: String,
    weight: u32,
    integer: Option<Vec<i128>>,
    lambda: Vec<f64>,
}

/// Satake parameters at a prime, `alpha1` having nonnegative imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatakePair {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
}

impl HeckeEigenform {
    /// Form from integer Fourier coefficients `a(0..=N)` (entry 0 ignored, `a(1) = 1`).
    pub fn from_integer_coefficients(label: impl Into<String>, weight: u32, coeffs: Vec<i128>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs[1] != 1 {
            return Err(invalid("from_integer_coefficients", "need a(1) = 1"));
        }
        if !weight.is_multiple_of(2) || weight < 2 {
            return Err(invalid("from_integer_coefficients", format!("weight {weight}")));
        }
        let half = (weight as f64 - 1.0) / 2.0;
        let lambda = coeffs
            .iter()
            .enumerate()
            .map(|(n, &a)| if n == 0 { 0.0 } else { a as f64 / (n as f64).powf(half) })
            .collect();
        Ok(Self { label: label.into(), weight, integer: Some(coeffs), lambda })
    }

    /// Form from normalized coefficients `lambda(0..=N)` (entry 0 ignored).
    /// Useful for synthetic stand-ins in tests.
    pub fn from_normalized(label: impl Into<String>, weight: u32, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() < 2 || lambda[1] != 1.0 {
            return Err(invalid("from_normalized", "need lambda(1) = 1"));
        }
        Ok(Self { label: label.into(), weight, integer: None, lambda })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Largest `n` stored in the table.
    pub fn n_max(&self) -> u64 {
        (self.lambda.len() - 1) as u64
    }

    /// Normalized coefficients indexed by `n` (entry 0 is 0).
    pub fn lambda_table(&self) -> &[f64] {
        &self.lambda
    }

    /// Integer coefficients indexed by `n`, when the form was built from them.
    pub fn integer_table(&self) -> Option<&[i128]> {
        self.integer.as_deref()
    }

    fn lambda_prime(&self, p: u64) -> Result<f64> {
        if p > self.n_max() {
            return Err(Error::TableExhausted { prime: p, n_max: self.n_max() });
        }
        Ok(self.lambda[p as usize])
    }

    /// `lambda(p^e)` from the Hecke recursion in `lambda(p)`.
    pub fn lambda_prime_power(&self, p: u64, e: u32) -> Result<f64> {
        if let Some(n) = p.checked_pow(e) {
            if n <= self.n_max() {
                return Ok(self.lambda[n as usize]);
            }
        }
        let lp = self.lambda_prime(p)?;
        Ok(hecke_power(lp, e))
    }

    /// `lambda_f(n)`; beyond the table, multiplicativity and the Hecke recursion are used.
    pub fn lambda_at(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(invalid("lambda_at", "n must be positive"));
        }
        if n <= self.n_max() {
            return Ok(self.lambda[n as usize]);
        }
        let mut v = 1.0;
        for &(p, e) in factorize(n)?.factors() {
            v *= self.lambda_prime_power(p, e)?;
        }
        Ok(v)
    }

    /// Coefficients of `1 / L(s, f)`: `c(p) = -lambda(p)`, `c(p^2) = 1`, zero beyond.
    pub fn c_at(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(invalid("c_at", "n must be positive"));
        }
        let mut v = 1.0;
        for &(p, e) in factorize(n)?.factors() {
            match e {
                1 => v *= -self.lambda_prime(p)?,
                2 => {}
                _ => return Ok(0.0),
            }
        }
        Ok(v)
    }

    /// `r(l, t) = sum_{mk = l} lambda(m) c(k) k^{-t}`.
    pub fn r_coeff(&self, l: u64, t: Complex64) -> Result<Complex64> {
        if l == 0 {
            return Err(invalid("r_coeff", "l must be positive"));
        }
        let mut v = Complex64::new(1.0, 0.0);
        for &(p, e) in factorize(l)?.factors() {
            v *= self.r_prime_power(p, e, t)?;
        }
        Ok(v)
    }

    /// `r(p^e, t)`.
    pub fn r_prime_power(&self, p: u64, e: u32, t: Complex64) -> Result<Complex64> {
        if e == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let lp = self.lambda_prime(p)?;
        let x = Complex64::new(p as f64, 0.0).powc(-t);
        let mut r = Complex64::new(hecke_power(lp, e), 0.0) - x * (hecke_power(lp, e - 1) * lp);
        if e >= 2 {
            r += x * x * hecke_power(lp, e - 2);
        }
        Ok(r)
    }

    pub fn satake_at(&self, p: u64) -> Result<SatakePair> {
        Ok(satake_from_lambda(self.lambda_prime(p)?))
    }

    /// `sum_{i >= 0} lambda(p^{2i}) p^{-iu}` in closed form.
    pub fn lambda_even_powersum(&self, p: u64, u: Complex64) -> Result<Complex64> {
        let x = power_sum_base(p, u, "lambda_even_powersum")?;
        let lp = self.lambda_prime(p)?;
        Ok((1.0 + x) / quadratic_denominator(lp, x))
    }

    /// `sum_{i >= 0} lambda(p^{2i+1}) p^{-(i+1)u}` in closed form.
    pub fn lambda_odd_powersum(&self, p: u64, u: Complex64) -> Result<Complex64> {
        let x = power_sum_base(p, u, "lambda_odd_powersum")?;
        let lp = self.lambda_prime(p)?;
        Ok(x * lp / quadratic_denominator(lp, x))
    }

    /// `sum_{d^2 m = n} lambda(m^2)`, the coefficients of `L(s, sym^2 f)`.
    pub fn sym2_coeff(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(invalid("sym2_coeff", "n must be positive"));
        }
        // Multiplicative: at p^e it is sum_{j <= e/2} lambda(p^{2(e-2j)}).
        let mut v = 1.0;
        for &(p, e) in factorize(n)?.factors() {
            let lp = self.lambda_prime(p)?;
            let mut local = 0.0;
            let mut j = 0;
            while 2 * j <= e {
                local += hecke_power(lp, 2 * (e - 2 * j));
                j += 1;
            }
            v *= local;
        }
        Ok(v)
    }

    /// `sym2_coeff(n)` for all `n <= n_max`, via a sieve.
    pub fn sym2_coefficients(&self, n_max: u64) -> Result<Vec<f64>> {
        let spf = smallest_prime_factors(n_max as usize);
        let mut out = vec![0.0; n_max as usize + 1];
        if n_max >= 1 {
            out[1] = 1.0;
        }
        for n in 2..=n_max as usize {
            let p = spf[n] as usize;
            let mut m = n;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            let lp = self.lambda_prime(p as u64)?;
            let mut local = 0.0;
            let mut j = 0;
            while 2 * j <= e {
                local += hecke_power(lp, 2 * (e - 2 * j));
                j += 1;
            }
            out[n] = out[m] * local;
        }
        Ok(out)
    }
}

fn power_sum_base(p: u64, u: Complex64, op: &'static str) -> Result<Complex64> {
    if u.re <= 0.0 {
        return Err(precondition(op, format!("Re(u) = {} must be positive", u.re)));
    }
    Ok(Complex64::new(p as f64, 0.0).powc(-u))
}

/// `(1 - alpha1^2 x)(1 - alpha2^2 x) = 1 - (lambda^2 - 2) x + x^2`.
fn quadratic_denominator(lp: f64, x: Complex64) -> Complex64 {
    1.0 - (lp * lp - 2.0) * x + x * x
}

/// `lambda(p^e)` as the Chebyshev-type recursion in `lambda(p)`.
pub fn hecke_power(lp: f64, e: u32) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..e {
        let next = lp * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn satake_from_lambda(lp: f64) -> SatakePair {
    let disc = (4.0 - lp * lp).max(0.0).sqrt();
    SatakePair { alpha1: Complex64::new(lp / 2.0, disc / 2.0), alpha2: Complex64::new(lp / 2.0, -disc / 2.0) }
}

/// `tau(n)` for `1 <= n <= n_max` (index 0 holds 0) from the eta-product expansion.
///
/// `prod (1 - q^n)^3 = sum_k (-1)^k (2k + 1) q^{k(k+1)/2}` is sparse; its eighth power is
/// built by repeated sparse multiplication in exact `i128` arithmetic.
pub fn delta_coefficients(n_max: usize) -> Result<Vec<i128>> {
    if n_max == 0 {
        return Err(invalid("delta_coefficients", "n_max must be positive"));
    }
    if n_max > MAX_TABLE {
        return Err(invalid(
            "delta_coefficients",
            format!("n_max = {n_max} exceeds the exact-integer limit {MAX_TABLE}"),
        ));
    }
    let len = n_max; // coefficients of q^0 .. q^{n_max - 1}
    let mut sparse: Vec<(usize, i64)> = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let c = (2 * k + 1) as i64;
        sparse.push((k * (k + 1) / 2, if k.is_multiple_of(2) { c } else { -c }));
        k += 1;
    }
    let mut dense = vec![0i128; len];
    for &(e, c) in &sparse {
        dense[e] = c as i128;
    }
    for _ in 1..8 {
        dense = multiply_sparse(&dense, &sparse);
    }
    let mut tau = vec![0i128; n_max + 1];
    tau[1..].copy_from_slice(&dense);
    check_hecke_relations(&tau)?;
    Ok(tau)
}

/// `tau(p^2) = tau(p)^2 - p^11` and `tau(mn) = tau(m) tau(n)` near the top of the table.
fn check_hecke_relations(tau: &[i128]) -> Result<()> {
    let n_max = tau.len() - 1;
    let fail = |what: String| Err(Error::NoConvergence { op: "delta_coefficients", reason: what });
    let root = (n_max as f64).sqrt() as u64;
    if let Some(&p) = crate::arith::primes_up_to(root).last() {
        let p_big = p as i128;
        let lhs = tau[(p * p) as usize];
        if lhs != tau[p as usize] * tau[p as usize] - p_big.pow(11) {
            return fail(format!("Hecke relation fails at p = {p}"));
        }
    }
    let (m, n) = (2u64, ((n_max as u64 - 1) / 2) | 1);
    if n > 1 && tau[(m * n) as usize] != tau[m as usize] * tau[n as usize] {
        return fail(format!("multiplicativity fails at {m} * {n}"));
    }
    Ok(())
}

fn multiply_sparse(dense: &[i128], sparse: &[(usize, i64)]) -> Vec<i128> {
    let len = dense.len();
    let mut out = vec![0i128; len];
    out.par_chunks_mut(4096).enumerate().for_each(|(chunk, slot)| {
        let base = chunk * 4096;
        for (i, o) in slot.iter_mut().enumerate() {
            let n = base + i;
            let mut acc = 0i128;
            for &(e, c) in sparse {
                if e > n {
                    break;
                }
                acc = acc.wrapping_add(dense[n - e].wrapping_mul(c as i128));
            }
            *o = acc;
        }
    });
    out
}

/// Default on-disk location for coefficient caches.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("twistratios-cache"))
}

/// Ramanujan's Delta with coefficients up to `n_max`, using the default cache directory.
pub fn build_delta_form(n_max: usize) -> Result<HeckeEigenform> {
    build_delta_form_cached(n_max, Some(&default_cache_dir()))
}

/// As [`build_delta_form`] with an explicit cache directory (`None` disables caching).
/// A corrupt or mismatched cache file is rebuilt and rewritten.
pub fn build_delta_form_cached(n_max: usize, dir: Option<&Path>) -> Result<HeckeEigenform> {
    let tau = match dir {
        Some(dir) => {
            let path = cache::cache_path(dir, n_max);
            match cache::load(&path, n_max) {
                Ok(Some(t)) => t,
                other => {
                    if let Err(e) = other {
                        log::warn!("discarding coefficient cache {}: {e}", path.display());
                    }
                    let t = delta_coefficients(n_max)?;
                    if let Err(e) = cache::store(&path, &t) {
                        log::warn!("could not write coefficient cache {}: {e}", path.display());
                    }
                    t
                }
            }
        }
        None => delta_coefficients(n_max)?,
    };
    HeckeEigenform::from_integer_coefficients("1.12.a.a", 12, tau)
}

/// Process-wide shared Delta table of at least `n_max` coefficients.
pub fn shared_delta_form(n_max: usize) -> Result<Arc<HeckeEigenform>> {
    static SHARED: OnceLock<Mutex<Option<Arc<HeckeEigenform>>>> = OnceLock::new();
    let slot = SHARED.get_or_init(|| Mutex::new(None));
    let mut guard = slot.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(f) = guard.as_ref() {
        if f.n_max() >= n_max as u64 {
            return Ok(Arc::clone(f));
        }
    }
    let f = Arc::new(build_delta_form(n_max)?);
    *guard = Some(Arc::clone(&f));
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_tau_values() {
        let t = delta_coefficients(12).unwrap();
        assert_eq!(&t[1..], &[1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944]);
    }

    #[test]
    fn hecke_recursion_matches_table() {
        let f = HeckeEigenform::from_integer_coefficients("delta", 12, delta_coefficients(2000).unwrap()).unwrap();
        for p in [2u64, 3, 5, 7] {
            for e in 1..4 {
                let n = p.pow(e);
                if n <= 2000 {
                    let lp = f.lambda_table()[p as usize];
                    assert!((hecke_power(lp, e) - f.lambda_table()[n as usize]).abs() < 1e-12);
                }
            }
        }
        assert!(matches!(f.lambda_at(2003), Err(Error::TableExhausted { prime: 2003, .. })));
        let big = 3u64.pow(8);
        assert!((f.lambda_at(big).unwrap() - hecke_power(f.lambda_table()[3], 8)).abs() < 1e-12);
    }

    #[test]
    fn c_and_r_coefficients() {
        let f = HeckeEigenform::from_integer_coefficients("delta", 12, delta_coefficients(100).unwrap()).unwrap();
        let l2 = f.lambda_table()[2];
        assert_eq!(f.c_at(8).unwrap(), 0.0);
        assert_eq!(f.c_at(4).unwrap(), 1.0);
        assert!((f.c_at(6).unwrap() - l2 * f.lambda_table()[3]).abs() < 1e-15);
        let t = Complex64::new(0.0, 0.0);
        // At t = 0 the Dirichlet convolution of lambda with its inverse is the identity.
        for l in 2..60 {
            assert!(f.r_coeff(l, t).unwrap().norm() < 1e-12, "l = {l}");
        }
        assert!((f.r_coeff(1, t).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn satake_parameters_are_unitary() {
        let f = HeckeEigenform::from_integer_coefficients("delta", 12, delta_coefficients(100).unwrap()).unwrap();
        for p in [2u64, 3, 5, 7, 11, 97] {
            let s = f.satake_at(p).unwrap();
            assert!((s.alpha1.norm() - 1.0).abs() < 1e-12);
            assert!((s.alpha1 * s.alpha2 - 1.0).norm() < 1e-12);
            assert!(s.alpha1.im >= 0.0);
        }
    }
}
