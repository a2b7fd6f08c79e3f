//! Exact integer arithmetic: factorization, quadratic symbols, square-free parts and
//! the discriminant attached to an odd modulus.

use std::sync::OnceLock;

use crate::error::{invalid, Result};

const SIEVE_LIMIT: u64 = 1_000_000;

fn sieve_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(SIEVE_LIMIT))
}

/// All primes `p <= limit`, in increasing order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(n / 10 + 16);
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table on `0..=limit` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Prime factorization of a positive integer, primes increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Exponent of `p` in the factorization (0 if absent).
    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factor `n >= 1` by trial division over the cached sieve; large cofactors are
/// settled by a primality test and, failing that, continued trial division.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(invalid("factorize", "n must be positive"));
    }
    let mut m = n;
    let mut factors = Vec::new();
    for &p in sieve_primes() {
        if p * p > m {
            break;
        }
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if m > 1 {
        if m <= SIEVE_LIMIT * SIEVE_LIMIT || is_prime(m) {
            factors.push((m, 1));
        } else {
            let mut p = SIEVE_LIMIT + 1;
            while (p as u128) * (p as u128) <= m as u128 {
                if m.is_multiple_of(p) {
                    let mut e = 0;
                    while m.is_multiple_of(p) {
                        m /= p;
                        e += 1;
                    }
                    factors.push((p, e));
                }
                p += 2;
            }
            if m > 1 {
                factors.push((m, 1));
            }
        }
    }
    Ok(Factorization { value: n, factors })
}

/// Kronecker symbol `(m / n)`.
pub fn kronecker(m: i64, n: i64) -> Result<i8> {
    if m == 0 && n == 0 {
        return Err(invalid("kronecker", "(0/0) is undefined"));
    }
    Ok(kronecker_unchecked(m, n))
}

const KRONECKER_TWO: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

pub(crate) fn kronecker_unchecked(m: i64, n: i64) -> i8 {
    let mut a = m as i128;
    let mut b = n as i128;
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut k: i8 = 1;
    let v = b.trailing_zeros();
    b >>= v;
    if v % 2 == 1 {
        k = KRONECKER_TWO[(a & 7) as usize];
    }
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    // b is odd and positive from here on: plain Jacobi symbol.
    if a < 0 {
        a = -a;
        if b & 3 == 3 {
            k = -k;
        }
    }
    let mut a = a as u128;
    let mut b = b as u128;
    a %= b;
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 && (b & 7 == 3 || b & 7 == 5) {
            k = -k;
        }
        if a & 3 == 3 && b & 3 == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut b);
        a %= b;
    }
    if b == 1 {
        k
    } else {
        0
    }
}

/// Jacobi symbol `chi_n(m) = (m / n)` for odd `n >= 1`.
pub fn chi_bottom(n: u64, m: i64) -> Result<i8> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(invalid("chi_bottom", format!("modulus {n} must be odd and positive")));
    }
    Ok(kronecker_unchecked(m, n as i64))
}

/// `n = core * root^2` with `core` square-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarefreeDecomposition {
    pub core: u64,
    pub root: u64,
}

pub fn squarefree_decompose(n: u64) -> Result<SquarefreeDecomposition> {
    if n == 0 {
        return Err(invalid("squarefree_decompose", "n must be positive"));
    }
    let f = factorize(n)?;
    let mut core = 1;
    let mut root = 1;
    for &(p, e) in f.factors() {
        if e % 2 == 1 {
            core *= p;
        }
        root *= p.pow(e / 2);
    }
    Ok(SquarefreeDecomposition { core, root })
}

/// The discriminant `d` whose Kronecker character induces `chi^{(-4n)}` for odd `n`,
/// together with the primes where `chi^{(d)}` and the character attached to `n` differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducingData {
    pub discriminant: i64,
    pub core: u64,
    pub root: u64,
    /// 2 together with every prime dividing `root` but not `core`.
    pub degenerate_primes: Vec<u64>,
}

/// For odd `n = n0 h^2` returns `d = n0` if `n0 = 1 (mod 4)` and `d = -n0` otherwise.
pub fn inducing_discriminant(n: u64) -> Result<InducingData> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(invalid("inducing_discriminant", format!("n = {n} must be odd and positive")));
    }
    let SquarefreeDecomposition { core, root } = squarefree_decompose(n)?;
    let discriminant = if core % 4 == 1 { core as i64 } else { -(core as i64) };
    let mut degenerate_primes = vec![2];
    if root > 1 {
        for p in factorize(root)?.primes() {
            if core % p != 0 {
                degenerate_primes.push(p);
            }
        }
    }
    Ok(InducingData { discriminant, core, root, degenerate_primes })
}

/// Whether `d` is 1 or a fundamental discriminant.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    let r = d.rem_euclid(4);
    let a = d.unsigned_abs();
    match r {
        1 => squarefree_decompose(a).map(|s| s.root == 1).unwrap_or(false),
        0 => {
            let m = d / 4;
            let mr = m.rem_euclid(4);
            (mr == 2 || mr == 3) && squarefree_decompose(m.unsigned_abs()).map(|s| s.root == 1).unwrap_or(false)
        }
        _ => false,
    }
}

/// Fundamental discriminant `D` with `m = D f^2` for `m = 0, 1 (mod 4)`, returned with `f`.
pub fn fundamental_discriminant_of(m: i64) -> Result<(i64, u64)> {
    if m == 0 || !matches!(m.rem_euclid(4), 0 | 1) {
        return Err(invalid("fundamental_discriminant_of", format!("{m} is not a discriminant")));
    }
    let SquarefreeDecomposition { core, root } = squarefree_decompose(m.unsigned_abs())?;
    let signed = if m < 0 { -(core as i64) } else { core as i64 };
    if signed.rem_euclid(4) == 1 {
        Ok((signed, root))
    } else {
        Ok((4 * signed, root / 2))
    }
}

pub fn mobius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    if !f.is_squarefree() {
        return Ok(0);
    }
    Ok(if f.factors().len() % 2 == 0 { 1 } else { -1 })
}

pub fn euler_phi(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    Ok(f.factors().iter().fold(1, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1)))
}

/// Number of distinct prime divisors.
pub fn omega(n: u64) -> Result<u32> {
    Ok(factorize(n)?.factors().len() as u32)
}

/// Values `chi^{(d)}(k)` for `k` in `0..period` where the character is periodic mod
/// `period` (`|d|` when `d = 0, 1 (mod 4)`, `4|d|` otherwise).
pub fn kronecker_table(d: i64) -> Result<Vec<i8>> {
    if d == 0 {
        return Err(invalid("kronecker_table", "d must be nonzero"));
    }
    let period = kronecker_period(d);
    Ok((0..period).map(|k| kronecker_unchecked(d, k as i64)).collect())
}

pub fn kronecker_period(d: i64) -> u64 {
    let a = d.unsigned_abs();
    if matches!(d.rem_euclid(4), 0 | 1) {
        a
    } else {
        4 * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorizations() {
        assert_eq!(factorize(1).unwrap().factors(), &[]);
        assert_eq!(factorize(360).unwrap().factors(), &[(2, 3), (3, 2), (5, 1)]);
        let big = 1_000_003u64 * 1_000_033;
        assert_eq!(factorize(big).unwrap().factors(), &[(1_000_003, 1), (1_000_033, 1)]);
        let p = 9_223_372_036_854_775_783u64;
        assert_eq!(factorize(p).unwrap().factors(), &[(p, 1)]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(5, 3).unwrap(), -1);
        assert_eq!(kronecker(-4, 3).unwrap(), -1);
        assert_eq!(kronecker(2, 7).unwrap(), 1);
        assert_eq!(kronecker(12, 5).unwrap(), -1);
        assert_eq!(kronecker(-3, -1).unwrap(), -1);
        assert_eq!(kronecker(3, -1).unwrap(), 1);
        assert_eq!(kronecker(5, 2).unwrap(), -1);
        assert_eq!(kronecker(1, 0).unwrap(), 1);
        assert_eq!(kronecker(2, 0).unwrap(), 0);
        assert!(kronecker(0, 0).is_err());
        assert_eq!(kronecker(i64::MIN, 3).unwrap(), kronecker(i64::MIN % 3, 3).unwrap());
    }

    #[test]
    fn decomposition_and_discriminants() {
        let d = inducing_discriminant(45).unwrap();
        assert_eq!((d.core, d.root, d.discriminant), (5, 3, 5));
        assert_eq!(d.degenerate_primes, vec![2, 3]);
        assert_eq!(inducing_discriminant(7).unwrap().discriminant, -7);
        assert_eq!(inducing_discriminant(9).unwrap().discriminant, 1);
        assert!(inducing_discriminant(4).is_err());
        assert_eq!(fundamental_discriminant_of(4 * 3).unwrap(), (12, 1));
        assert_eq!(fundamental_discriminant_of(4 * 5).unwrap(), (5, 2));
        assert_eq!(fundamental_discriminant_of(4 * 45).unwrap(), (5, 6));
        assert!(is_fundamental_discriminant(-4));
        assert!(is_fundamental_discriminant(8));
        assert!(!is_fundamental_discriminant(20));
        assert_eq!(mobius(30).unwrap(), -1);
        assert_eq!(euler_phi(36).unwrap(), 12);
        assert_eq!(omega(360).unwrap(), 3);
    }
}
