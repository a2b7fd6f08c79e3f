//! Quadratic Gauss sums `tau(chi, q)`, the normalized sums `G(chi_n, q)` and the series
//! `K(s, chi) = sum_q tau(chi, q) q^{-s}`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::arith::{factorize, kronecker_period, kronecker_unchecked, Factorization};
use crate::error::{invalid, precondition, Result};
use crate::numeric::ComplexSum;

/// A quadratic (or principal) Dirichlet character given by a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Character {
    /// `a -> (m / a)`, Kronecker symbol with fixed top entry.
    Kronecker(i64),
    /// `a -> (a / n)`, Jacobi symbol with fixed odd bottom entry.
    Jacobi(u64),
    /// The character modulo 1.
    Trivial,
}

impl Character {
    /// The characters of conductor dividing 8: `psi_0` trivial, `psi_j = chi^{(4j)}` for
    /// `j` in `{1, -1, 2, -2}`.
    pub fn auxiliary(j: i64) -> Result<Self> {
        match j {
            0 => Ok(Character::Trivial),
            1 | -1 | 2 | -2 => Ok(Character::Kronecker(4 * j)),
            _ => Err(invalid("auxiliary", format!("index {j} not in {{0, +-1, +-2}}"))),
        }
    }

    pub fn modulus(&self) -> u64 {
        match *self {
            Character::Kronecker(m) => kronecker_period(m),
            Character::Jacobi(n) => n,
            Character::Trivial => 1,
        }
    }

    pub fn eval(&self, a: i64) -> i8 {
        match *self {
            Character::Kronecker(m) => kronecker_unchecked(m, a),
            Character::Jacobi(n) => kronecker_unchecked(a, n as i64),
            Character::Trivial => 1,
        }
    }

    fn validate(&self, op: &'static str) -> Result<()> {
        match *self {
            Character::Kronecker(0) => Err(invalid(op, "Kronecker character with top 0")),
            Character::Jacobi(n) if n == 0 || n % 2 == 0 => Err(invalid(op, format!("Jacobi modulus {n} must be odd"))),
            _ => Ok(()),
        }
    }
}

/// `e(num / den)` with the fraction reduced mod 1 before exponentiation.
pub fn unit_root(num: i128, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i128) as f64;
    let (s, c) = (TAU * r / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// `tau(chi, q) = sum_{j mod n} chi(j) e(jq/n)` by direct summation.
pub fn tau_sum(chi: Character, q: i64) -> Result<Complex64> {
    chi.validate("tau_sum")?;
    let n = chi.modulus();
    let mut acc = ComplexSum::new();
    for j in 0..n {
        let c = chi.eval(j as i64);
        if c != 0 {
            acc.add(unit_root(j as i128 * q as i128, n) * c as f64);
        }
    }
    Ok(acc.value())
}

/// `epsilon_n` with `G(chi_n, q) = epsilon_n tau(chi_n, q)`: 1 if `n = 1 (mod 4)`, `-i` otherwise.
pub fn epsilon(n: u64) -> Complex64 {
    if n % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, -1.0)
    }
}

fn check_odd(op: &'static str, n: u64) -> Result<()> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(invalid(op, format!("n = {n} must be odd and positive")));
    }
    Ok(())
}

/// `G(chi_n, q)` from its definition through [`tau_sum`].
pub fn g_def(n: u64, q: i64) -> Result<Complex64> {
    check_odd("g_def", n)?;
    Ok(epsilon(n) * tau_sum(Character::Jacobi(n), q)?)
}

/// `G(chi_{p^k}, q)` where `a = v_p(q)` (`None` for `q = 0`) and `unit_symbol` is the
/// Legendre symbol of `q p^{-a}` modulo `p` (ignored when `q = 0`).
pub fn g_prime_power(p: u64, k: u32, a: Option<u32>, unit_symbol: i8) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let pf = p as f64;
    let within = a.is_none_or(|a| k <= a);
    if within {
        return if k % 2 == 1 { 0.0 } else { (pf - 1.0) * pf.powi(k as i32 - 1) };
    }
    let a = a.unwrap();
    if k == a + 1 {
        if k.is_multiple_of(2) {
            -pf.powi(a as i32)
        } else {
            unit_symbol as f64 * pf.powi(a as i32) * pf.sqrt()
        }
    } else {
        0.0
    }
}

/// `G(chi_n, q)` through multiplicativity in `n` and the prime-power evaluation.
pub fn g_fast(n: u64, q: i64) -> Result<Complex64> {
    check_odd("g_fast", n)?;
    Ok(Complex64::new(g_factored(&factorize(n)?, q), 0.0))
}

/// `G(chi_n, q)` for odd `n` given by its factorization. The value is always real.
pub fn g_factored(n: &Factorization, q: i64) -> f64 {
    let mut v = 1.0;
    for &(p, k) in n.factors() {
        let (a, unit) = split_valuation(q, p);
        v *= g_prime_power(p, k, a, unit);
        if v == 0.0 {
            break;
        }
    }
    v
}

pub(crate) fn split_valuation(q: i64, p: u64) -> (Option<u32>, i8) {
    if q == 0 {
        return (None, 0);
    }
    let mut m = q.unsigned_abs();
    let mut a = 0;
    while m.is_multiple_of(p) {
        m /= p;
        a += 1;
    }
    let unit = if q < 0 { -(m as i128) } else { m as i128 };
    (Some(a), kronecker_unchecked(unit.rem_euclid(p as i128) as i64, p as i64))
}

/// `tau(chi^{(4l)}, q)` for odd `l` from `tau(chi_l, q)`.
pub fn tau_4l_from_tau_l(l: u64, q: i64) -> Result<Complex64> {
    check_odd("tau_4l_from_tau_l", l)?;
    let tau_l = g_fast(l, q)? / epsilon(l);
    let i = Complex64::new(0.0, 1.0);
    let q4 = q.rem_euclid(4);
    Ok(if l % 4 == 1 {
        match q4 {
            2 => -2.0 * tau_l,
            0 => 2.0 * tau_l,
            _ => Complex64::new(0.0, 0.0),
        }
    } else {
        match q4 {
            1 => -2.0 * i * tau_l,
            3 => 2.0 * i * tau_l,
            _ => Complex64::new(0.0, 0.0),
        }
    })
}

/// Truncated `K(s, chi)` with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSeries {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `sum_{q <= q_max} tau(chi, q) q^{-s}` for an even character of non-square modulus.
pub fn k_series(s: Complex64, chi: Character, q_max: u64) -> Result<KSeries> {
    chi.validate("k_series")?;
    let n = chi.modulus();
    let root = (n as f64).sqrt().round() as u64;
    if root * root == n {
        return Err(precondition("k_series", format!("modulus {n} is a perfect square")));
    }
    if chi.eval(-1) != 1 {
        return Err(precondition("k_series", "character is odd"));
    }
    if s.re <= 1.5 {
        return Err(precondition("k_series", format!("Re(s) = {} must exceed 3/2", s.re)));
    }
    // tau(chi, q) only depends on q mod n.
    let taus: Vec<Complex64> = (0..n).map(|r| tau_sum(chi, r as i64)).collect::<Result<_>>()?;
    let mut acc = ComplexSum::new();
    for q in 1..=q_max {
        let t = taus[(q % n) as usize];
        if t.norm() > 0.0 {
            acc.add(t * (-s * (q as f64).ln()).exp());
        }
    }
    let tail_bound = n as f64 * (q_max as f64).powf(1.0 - s.re) / (s.re - 1.0);
    Ok(KSeries { value: acc.value(), tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_gauss_sums() {
        let t = tau_sum(Character::Jacobi(3), 1).unwrap();
        assert!((t - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-14);
        let g = g_def(3, 1).unwrap();
        assert!((g - Complex64::new(3f64.sqrt(), 0.0)).norm() < 1e-14);
        let t = tau_sum(Character::Jacobi(5), 1).unwrap();
        assert!((t - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn fast_matches_definition_on_small_grid() {
        for n in (1..200u64).step_by(2) {
            for q in -5..40i64 {
                let a = g_fast(n, q).unwrap();
                let b = g_def(n, q).unwrap();
                assert!((a - b).norm() < 1e-9, "n = {n}, q = {q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tau_4l_case_table() {
        for l in (1..120u64).step_by(2) {
            for q in 0..60i64 {
                let direct = tau_sum(Character::Kronecker(4 * l as i64), q).unwrap();
                let pred = tau_4l_from_tau_l(l, q).unwrap();
                assert!((direct - pred).norm() < 1e-9, "l = {l}, q = {q}");
            }
        }
    }

    #[test]
    fn k_series_preconditions() {
        let s = Complex64::new(2.5, 0.0);
        assert!(k_series(s, Character::Trivial, 10).is_err());
        assert!(k_series(s, Character::Kronecker(-4), 10).is_err());
        assert!(k_series(Complex64::new(1.2, 0.0), Character::Kronecker(12), 10).is_err());
        let k = k_series(s, Character::Kronecker(12), 10_000).unwrap();
        assert!(k.tail_bound < 1e-2);
        assert!(k.value.norm().is_finite());
    }
}
