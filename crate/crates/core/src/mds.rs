//! The multiple Dirichlet series `A(s, w, z; f)` built from ratios of twisted L-functions.
//!
//! Implemented here:
//! * both series representations of `A` (over `n`, and over `(m, k)` split into the square
//!   part `A_1` and the rest `A_2`);
//! * the closed form `A_1 = zeta(s) L^{(2)}(2w, sym^2 f) P(s, w, z)` and the Euler product `P`;
//! * the Gauss-sum series `C(s, w, z)` together with its twisted decomposition;
//! * the local factors of the `D_1` series.
//!
//! Convergence regions are only used as preconditions. Nothing here continues a series
//! analytically: identities are compared where both sides converge.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, fundamental_discriminant_of, kronecker_unchecked, primes_up_to, Factorization};
use crate::error::{invalid, precondition, Error, Result};
use crate::gauss::{g_factored, g_prime_power, split_valuation, Character};
use crate::lfun::{quad_dirichlet_l, sym2_l, zeta, zeta_without_two, TruncationPolicy, TwistFamily};
use crate::modform::HeckeEigenform;
use crate::numeric::ComplexSum;

/// Slack required in every defining inequality of a region.
pub const REGION_MARGIN: f64 = 0.01;

/// Accelerating L-factors are only divided out when their argument has real part below
/// this; further right the local factors already converge fast.
const ACCEL_LIMIT: f64 = 3.0;

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn p_pow(p: u64, e: Complex64) -> Complex64 {
    (-e * (p as f64).ln()).exp()
}

/// A point `(s, w, z)` of the three complex variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftTriple {
    pub s: Complex64,
    pub w: Complex64,
    pub z: Complex64,
}

impl ShiftTriple {
    pub fn new(s: Complex64, w: Complex64, z: Complex64) -> Self {
        Self { s, w, z }
    }

    pub fn real(s: f64, w: f64, z: f64) -> Self {
        Self::new(cx(s), cx(w), cx(z))
    }

    fn violations(checks: &[(&str, f64, f64)], margin: f64) -> Vec<String> {
        checks
            .iter()
            .filter(|(_, value, bound)| (value - bound).is_nan() || value - bound < margin)
            .map(|(name, value, bound)| format!("{name} = {value} must exceed {bound} by {margin}"))
            .collect()
    }

    /// Violated inequalities of the first region of absolute convergence of `A`:
    /// `Re s > 1`, `Re(s + 2w) > 2`, `Re z > 1/2`.
    pub fn s0_violations(&self, margin: f64) -> Vec<String> {
        let (s, w, z) = (self.s.re, self.w.re, self.z.re);
        Self::violations(&[("Re(s)", s, 1.0), ("Re(s+2w)", s + 2.0 * w, 2.0), ("Re(z)", z, 0.5)], margin)
    }

    pub fn in_s0(&self, margin: f64) -> bool {
        self.s0_violations(margin).is_empty()
    }

    /// Violated inequalities of the region where `P(s, w, z)` converges:
    /// `Re 2z`, `Re(s+2z)`, `Re(s+2w)`, `Re(w+z)`, `Re 4w`, `Re(s+w+z)` all above 1.
    pub fn s3_violations(&self, margin: f64) -> Vec<String> {
        let (s, w, z) = (self.s.re, self.w.re, self.z.re);
        Self::violations(
            &[
                ("Re(2z)", 2.0 * z, 1.0),
                ("Re(s+2z)", s + 2.0 * z, 1.0),
                ("Re(s+2w)", s + 2.0 * w, 1.0),
                ("Re(w+z)", w + z, 1.0),
                ("Re(4w)", 4.0 * w, 1.0),
                ("Re(s+w+z)", s + w + z, 1.0),
            ],
            margin,
        )
    }

    pub fn in_s3(&self, margin: f64) -> bool {
        self.s3_violations(margin).is_empty()
    }

    fn require(&self, op: &'static str, v: Vec<String>, region: &str) -> Result<()> {
        if v.is_empty() {
            Ok(())
        } else {
            Err(precondition(op, format!("({}, {}, {}) outside {region}: {}", self.s, self.w, self.z, v.join("; "))))
        }
    }
}

/// A truncated Euler product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerProductResult {
    pub value: Complex64,
    pub primes_used: u64,
    /// Heuristic size of the omitted primes' contribution (plus the error of any L-values
    /// used for acceleration).
    pub tail_estimate: f64,
}

/// A truncated series with the numerical error of its terms and an estimate of the omitted
/// tail, both heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub error_estimate: f64,
    pub tail_estimate: f64,
}

impl Estimate {
    pub fn total_uncertainty(&self) -> f64 {
        self.error_estimate + self.tail_estimate
    }
}

/// `sum_{p > x} c p^{-sigma}`, bounded by `c x^{1 - sigma} / ((sigma - 1) log x)`.
fn prime_tail(c: f64, sigma: f64, x: f64) -> f64 {
    if sigma <= 1.0 {
        return f64::INFINITY;
    }
    c * x.powf(1.0 - sigma) / ((sigma - 1.0) * x.ln())
}

/// `sum_{n > x} c n^{-sigma}` over integers in a fixed residue class of density `density`.
fn integer_tail(c: f64, sigma: f64, x: f64, density: f64) -> f64 {
    if sigma <= 1.0 {
        return f64::INFINITY;
    }
    density * c * x.powf(1.0 - sigma) / (sigma - 1.0)
}

/// The local factor of `P(s, w, z)` at an odd prime, exactly as printed, from `lambda(p)`.
pub fn p_local_factor(lambda_p: f64, p: u64, t: &ShiftTriple) -> Complex64 {
    let u = p_pow(p, t.s);
    let x = p_pow(p, 2.0 * t.w);
    let y = p_pow(p, 2.0 * t.z);
    let v = p_pow(p, t.z + t.w);
    let l2 = lambda_p * lambda_p;
    1.0 + y * (1.0 - u) * (1.0 + x) + (1.0 - u) * x - (l2 - 2.0) * x * u + x * x * u - (1.0 - u) * l2 * v
}

// The printed factor times (1 - p^{-2w}), which absorbs the prefactor 1 / zeta^{(2)}(2w)
// into the product and makes it converge on the whole region.
fn folded_factor(lambda_p: f64, p: u64, t: &ShiftTriple) -> Complex64 {
    (1.0 - p_pow(p, 2.0 * t.w)) * p_local_factor(lambda_p, p, t)
}

// Exponents of the first-order terms of the folded factor; these are exactly the
// inequalities of the convergence region.
fn first_order_exponent(t: &ShiftTriple) -> f64 {
    let (s, w, z) = (t.s.re, t.w.re, t.z.re);
    [2.0 * z, s + 2.0 * z, s + 2.0 * w, w + z, 4.0 * w, s + w + z].into_iter().fold(f64::INFINITY, f64::min)
}

fn check_cutoff(op: &'static str, f: &HeckeEigenform, cutoff: u64) -> Result<()> {
    if cutoff < 3 {
        return Err(invalid(op, format!("prime cutoff {cutoff} must be at least 3")));
    }
    if cutoff > f.n_max() {
        return Err(Error::TableExhausted { prime: cutoff, n_max: f.n_max() });
    }
    Ok(())
}

// max over primes in (cutoff / 2, cutoff] of |factor - 1| p^sigma.
struct TailProbe {
    half: u64,
    sigma: f64,
    c: f64,
}

impl TailProbe {
    fn new(cutoff: u64, sigma: f64) -> Self {
        Self { half: cutoff / 2, sigma, c: 0.0 }
    }

    fn observe(&mut self, p: u64, factor: Complex64) {
        if p > self.half {
            self.c = self.c.max((factor - 1.0).norm() * (p as f64).powf(self.sigma));
        }
    }

    fn tail(&self, cutoff: u64) -> f64 {
        prime_tail(self.c, self.sigma, cutoff as f64)
    }
}

/// `P(s, w, z; f)` as a plain truncated Euler product over `2 < p <= cutoff`.
///
/// The factor `1 / zeta^{(2)}(2w)` is distributed over the primes; in the limit this is the
/// printed product and it converges wherever `P` does.
pub fn p_product(t: &ShiftTriple, f: &HeckeEigenform, cutoff: u64) -> Result<EulerProductResult> {
    const OP: &str = "p_product";
    t.require(OP, t.s3_violations(REGION_MARGIN), "the convergence region of P")?;
    check_cutoff(OP, f, cutoff)?;
    let mut probe = TailProbe::new(cutoff, first_order_exponent(t));
    let mut prod = Complex64::new(1.0, 0.0);
    let primes = primes_up_to(cutoff);
    for &p in primes.iter().skip(1) {
        let g = folded_factor(f.lambda_at(p)?, p, t);
        probe.observe(p, g);
        prod *= g;
    }
    let value = (1.0 - p_pow(2, t.s)) * prod;
    Ok(EulerProductResult {
        value,
        primes_used: primes.len() as u64 - 1,
        tail_estimate: value.norm() * probe.tail(cutoff),
    })
}

#[derive(Clone, Copy)]
enum AccelKind {
    Zeta,
    Sym2,
}

// One L-factor of the accelerator: kind, argument and whether it sits in the numerator.
struct AccelFactor {
    kind: AccelKind,
    arg: Complex64,
    numerator: bool,
}

fn accelerator(t: &ShiftTriple) -> Vec<AccelFactor> {
    let (s, w, z) = (t.s, t.w, t.z);
    let all = [
        (AccelKind::Zeta, 2.0 * z, true),
        (AccelKind::Zeta, s + w + z, true),
        (AccelKind::Sym2, s + w + z, true),
        (AccelKind::Zeta, s + 2.0 * z, false),
        (AccelKind::Sym2, s + 2.0 * w, false),
        (AccelKind::Zeta, w + z, false),
        (AccelKind::Sym2, w + z, false),
        (AccelKind::Zeta, 4.0 * w, false),
    ];
    all.into_iter()
        .filter(|(_, arg, _)| arg.re < ACCEL_LIMIT)
        .map(|(kind, arg, numerator)| AccelFactor { kind, arg, numerator })
        .collect()
}

impl AccelFactor {
    // Local Euler factor at p, i.e. (1 - p^{-u})^{-1} or the sym^2 factor.
    fn local(&self, lambda_p: f64, p: u64) -> Complex64 {
        let x = p_pow(p, self.arg);
        let inv = match self.kind {
            AccelKind::Zeta => 1.0 - x,
            AccelKind::Sym2 => {
                let l2 = lambda_p * lambda_p - 1.0;
                1.0 - l2 * x + l2 * x * x - x * x * x
            }
        };
        1.0 / inv
    }

    // The L-value without its factor at 2, with a relative error estimate.
    fn value(&self, f: &HeckeEigenform, pol: &TruncationPolicy) -> Result<(Complex64, f64)> {
        match self.kind {
            AccelKind::Zeta => {
                let v = zeta_without_two(self.arg, pol.tolerance)?;
                Ok((v, pol.tolerance))
            }
            AccelKind::Sym2 => {
                let l = sym2_l(self.arg, f, pol)?;
                let l4 = hecke_square(f.lambda_at(2)?);
                let x = p_pow(2, self.arg);
                let v = l.value * (1.0 - l4 * x + l4 * x * x - x * x * x);
                Ok((v, l.error_estimate / l.value.norm().max(1e-300) + 1e-15))
            }
        }
    }
}

fn hecke_square(lp: f64) -> f64 {
    lp * lp - 1.0
}

/// `P(s, w, z; f)` with its slowly converging part expressed through zeta and
/// `L(., sym^2 f)` values.
///
/// The first-order terms of each local factor match those of
/// `zeta(2z) zeta(s+w+z) L(s+w+z, sym^2 f) / (zeta(s+2z) L(s+2w, sym^2 f) zeta(w+z) L(w+z, sym^2 f) zeta(4w))`
/// (factors at 2 removed), so after dividing by that quotient the remaining product
/// converges like `sum_p p^{-2 sigma}` instead of `sum_p p^{-sigma}`.
pub fn p_product_accelerated(
    t: &ShiftTriple,
    f: &HeckeEigenform,
    cutoff: u64,
    pol: &TruncationPolicy,
) -> Result<EulerProductResult> {
    const OP: &str = "p_product_accelerated";
    t.require(OP, t.s3_violations(REGION_MARGIN), "the convergence region of P")?;
    check_cutoff(OP, f, cutoff)?;
    let factors = accelerator(t);
    let mut global = Complex64::new(1.0, 0.0);
    let mut rel_err = 0.0;
    for a in &factors {
        let (v, e) = a.value(f, pol)?;
        if a.numerator {
            global *= v;
        } else {
            global /= v;
        }
        rel_err += e;
    }
    // Remainder exponent: twice the first-order one, or the smallest skipped argument,
    // or the s + 4w term left in the remainder.
    let sigma1 = first_order_exponent(t);
    let mut sigma = (2.0 * sigma1).min((t.s + 4.0 * t.w).re);
    if factors.len() < 8 {
        sigma = sigma.min(ACCEL_LIMIT);
    }
    let mut probe = TailProbe::new(cutoff, sigma);
    let mut prod = Complex64::new(1.0, 0.0);
    let primes = primes_up_to(cutoff);
    for &p in primes.iter().skip(1) {
        let lp = f.lambda_at(p)?;
        let mut g = folded_factor(lp, p, t);
        for a in &factors {
            let loc = a.local(lp, p);
            if a.numerator {
                g /= loc;
            } else {
                g *= loc;
            }
        }
        probe.observe(p, g);
        prod *= g;
    }
    let value = (1.0 - p_pow(2, t.s)) * global * prod;
    Ok(EulerProductResult {
        value,
        primes_used: primes.len() as u64 - 1,
        tail_estimate: value.norm() * (probe.tail(cutoff) + rel_err),
    })
}

/// `L^{(2)}(u, sym^2 f)` with an absolute error estimate.
pub fn sym2_without_two(u: Complex64, f: &HeckeEigenform, pol: &TruncationPolicy) -> Result<(Complex64, f64)> {
    let a = AccelFactor { kind: AccelKind::Sym2, arg: u, numerator: true };
    let (v, rel) = a.value(f, pol)?;
    Ok((v, rel * v.norm()))
}

/// `Res_{s=1} A_1(s, w, z) = L^{(2)}(2w, sym^2 f) P(1, w, z)`.
pub fn a1_residue(
    w: Complex64,
    z: Complex64,
    f: &HeckeEigenform,
    cutoff: u64,
    pol: &TruncationPolicy,
) -> Result<Estimate> {
    let t = ShiftTriple::new(cx(1.0), w, z);
    let p = p_product_accelerated(&t, f, cutoff, pol)?;
    let (l, l_err) = sym2_without_two(2.0 * w, f, pol)?;
    Ok(Estimate {
        value: l * p.value,
        error_estimate: l_err * p.value.norm(),
        tail_estimate: l.norm() * p.tail_estimate,
    })
}

/// `A_1(s, w, z) = zeta(s) L^{(2)}(2w, sym^2 f) P(s, w, z)`.
///
/// At `s = 1` a [`Error::Pole`] is returned whose text carries the residue
/// (see also [`a1_residue`]).
pub fn a1_closed(t: &ShiftTriple, f: &HeckeEigenform, cutoff: u64, pol: &TruncationPolicy) -> Result<Estimate> {
    const OP: &str = "a1_closed";
    if (t.s - 1.0).norm() < 1e-12 {
        let r = a1_residue(t.w, t.z, f, cutoff, pol)?;
        return Err(Error::Pole { op: OP, at: format!("s = 1 with residue {}", r.value) });
    }
    let p = p_product_accelerated(t, f, cutoff, pol)?;
    let (l, l_err) = sym2_without_two(2.0 * t.w, f, pol)?;
    let zs = zeta(t.s, pol.tolerance)?;
    let value = zs * l * p.value;
    Ok(Estimate {
        value,
        error_estimate: (zs * p.value).norm() * l_err + value.norm() * pol.tolerance,
        tail_estimate: (zs * l).norm() * p.tail_estimate,
    })
}

// a_s(n) = prod_{p | n} (1 - p^{-s}).
fn a_mult(fac: &Factorization, s: Complex64) -> Complex64 {
    fac.primes().fold(cx(1.0), |acc, p| acc * (1.0 - p_pow(p, s)))
}

// All divisors of n from its factorization, unordered.
fn divisors(fac: &Factorization) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in fac.factors() {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out
}

/// `A_1` by brute force: `zeta^{(2)}(s) sum lambda(m) c(k) a_s(mk) m^{-w} k^{-z}` over odd
/// `m, k` with `mk` a square `<= m_max`.
pub fn a1_brute(t: &ShiftTriple, f: &HeckeEigenform, m_max: u64) -> Result<Estimate> {
    const OP: &str = "a1_brute";
    if t.w.re <= 1.1 || t.z.re <= 1.1 {
        return Err(precondition(OP, format!("Re(w) = {}, Re(z) = {} must exceed 1.1", t.w.re, t.z.re)));
    }
    if m_max == 0 {
        return Err(invalid(OP, "cutoff must be positive"));
    }
    let z2 = zeta_without_two(t.s, 1e-15)?;
    let mut acc = ComplexSum::new();
    let mut j = 1u64;
    let root_max = (m_max as f64).sqrt().floor() as u64;
    let half = (root_max / 2).max(1);
    let sigma = 2.0 * t.w.re.min(t.z.re);
    let mut c_tail = 0.0f64;
    while j * j <= m_max {
        let l = j * j;
        let fac = factorize(l)?;
        let a = a_mult(&fac, t.s);
        let mut inner = Complex64::new(0.0, 0.0);
        for k in divisors(&fac) {
            let ck = f.c_at(k)?;
            if ck == 0.0 {
                continue;
            }
            let m = l / k;
            inner += f.lambda_at(m)? * ck * p_pow(m, t.w) * p_pow(k, t.z);
        }
        let term = a * inner;
        if j > half {
            c_tail = c_tail.max(term.norm() * (j as f64).powf(sigma));
        }
        acc.add(term);
        j += 2;
    }
    let value = z2 * acc.value();
    Ok(Estimate {
        value,
        error_estimate: 1e-15 * value.norm(),
        tail_estimate: z2.norm() * integer_tail(c_tail, sigma, root_max as f64, 0.5),
    })
}

/// Growth exponent of `|L(s, chi)|` in the conductor from the convexity bound.
pub fn convexity_exponent(sigma: f64) -> f64 {
    if sigma >= 1.0 {
        0.0
    } else if sigma >= 0.0 {
        (1.0 - sigma) / 2.0
    } else {
        0.5 - sigma
    }
}

/// `A(s, w, z) = sum_{odd n <= n_max} L^{(2)}(w, f x chi_n) / L^{(2)}(z, f x chi_n) n^{-s}`.
pub fn a_direct(t: &ShiftTriple, f: &HeckeEigenform, n_max: u64, pol: &TruncationPolicy) -> Result<Estimate> {
    const OP: &str = "a_direct";
    t.require(OP, t.s0_violations(REGION_MARGIN), "the region of absolute convergence")?;
    if n_max == 0 {
        return Err(invalid(OP, "cutoff must be positive"));
    }
    let num = TwistFamily::new(f, t.w, n_max, pol)?;
    let den = if t.z == t.w { None } else { Some(TwistFamily::new(f, t.z, n_max, pol)?) };
    let mut acc = ComplexSum::new();
    let mut err = 0.0;
    let mut ratio_max = 0.0f64;
    for n in (1..=n_max).step_by(2) {
        let a = num.l2_twist(n)?;
        let ratio = match &den {
            None => {
                if a.value.norm() < 1e-10 {
                    return Err(Error::Singularity { op: OP, n, magnitude: a.value.norm() });
                }
                err += 2.0 * a.error_estimate / a.value.norm() * (n as f64).powf(-t.s.re);
                cx(1.0)
            }
            Some(den) => {
                let b = den.l2_twist(n)?;
                if b.value.norm() < 1e-10 {
                    return Err(Error::Singularity { op: OP, n, magnitude: b.value.norm() });
                }
                let r = a.value / b.value;
                err += r.norm()
                    * (a.error_estimate / a.value.norm().max(1e-300) + b.error_estimate / b.value.norm())
                    * (n as f64).powf(-t.s.re);
                r
            }
        };
        if 2 * n > n_max {
            ratio_max = ratio_max.max(ratio.norm());
        }
        acc.add(ratio * p_pow(n, t.s));
    }
    Ok(Estimate {
        value: acc.value(),
        error_estimate: err,
        tail_estimate: integer_tail(ratio_max.max(1.0), t.s.re, n_max as f64, 0.5),
    })
}

/// `L(s, chi^{(4l)})` for odd `l`, through the fundamental discriminant `D` with
/// `4l = D f^2` and the Euler factors at primes dividing `f`.
pub fn dirichlet_4l(s: Complex64, l: u64, pol: &TruncationPolicy) -> Result<(Complex64, f64)> {
    if l == 0 || l.is_multiple_of(2) {
        return Err(invalid("dirichlet_4l", format!("l = {l} must be odd")));
    }
    let (d, cond) = fundamental_discriminant_of(4 * l as i64)?;
    let base = quad_dirichlet_l(s, d, pol)?;
    let corr = imprimitive_correction(s, d, cond)?;
    Ok((base.value * corr, base.error_estimate * corr.norm()))
}

fn imprimitive_correction(s: Complex64, d: i64, cond: u64) -> Result<Complex64> {
    let mut corr = cx(1.0);
    if cond > 1 {
        for p in factorize(cond)?.primes() {
            corr *= 1.0 - kronecker_unchecked(d, p as i64) as f64 * p_pow(p, s);
        }
    }
    Ok(corr)
}

/// Smallest admissible `min(Re w, Re z)` for the `(m, k)` series of `A_2` at a given `Re s`.
pub fn a2_threshold(sigma: f64) -> f64 {
    1.0 + convexity_exponent(sigma)
}

/// `A_2(s, w, z) = sum lambda(m) c(k) L(s, chi^{(4mk)}) m^{-w} k^{-z}` over odd `m, k` with
/// `mk <= m_max` not a square, grouped by `l = mk` as `sum_l r(l, z - w) L(s, chi^{(4l)}) l^{-w}`.
pub fn a2_direct(t: &ShiftTriple, f: &HeckeEigenform, m_max: u64, pol: &TruncationPolicy) -> Result<Estimate> {
    const OP: &str = "a2_direct";
    let need = a2_threshold(t.s.re) + REGION_MARGIN;
    if t.w.re < need || t.z.re < need {
        return Err(precondition(
            OP,
            format!("Re(w) = {}, Re(z) = {} must be at least {need} at Re(s) = {}", t.w.re, t.z.re, t.s.re),
        ));
    }
    let mut by_disc: HashMap<i64, (Complex64, f64)> = HashMap::new();
    let sigma = t.w.re.min(t.z.re) - convexity_exponent(t.s.re);
    let mut acc = ComplexSum::new();
    let mut err = 0.0;
    let mut c_tail = 0.0f64;
    for l in (3..=m_max).step_by(2) {
        let fac = factorize(l)?;
        if fac.factors().iter().all(|&(_, e)| e % 2 == 0) {
            continue;
        }
        let r = f.r_coeff(l, t.z - t.w)?;
        if r == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (d, cond) = fundamental_discriminant_of(4 * l as i64)?;
        let (base, base_err) = match by_disc.get(&d) {
            Some(&v) => v,
            None => {
                let v = quad_dirichlet_l(t.s, d, pol)?;
                by_disc.insert(d, (v.value, v.error_estimate));
                (v.value, v.error_estimate)
            }
        };
        let corr = imprimitive_correction(t.s, d, cond)?;
        let scale = r * corr * p_pow(l, t.w);
        let term = base * scale;
        err += base_err * scale.norm();
        if 2 * l > m_max {
            c_tail = c_tail.max(term.norm() * (l as f64).powf(sigma));
        }
        acc.add(term);
    }
    Ok(Estimate {
        value: acc.value(),
        error_estimate: err,
        tail_estimate: integer_tail(c_tail, sigma, m_max as f64, 0.5),
    })
}

// Odd l <= l_max with r(l, z - w) l^{-w} and the factorization.
struct LTerm {
    l: u64,
    fac: Factorization,
    weight: Complex64,
}

fn l_terms(
    t: &ShiftTriple,
    f: &HeckeEigenform,
    l_max: u64,
    keep: impl Fn(&Factorization) -> bool,
) -> Result<Vec<LTerm>> {
    let mut out = Vec::new();
    for l in (1..=l_max).step_by(2) {
        let fac = factorize(l)?;
        if !keep(&fac) {
            continue;
        }
        let weight = f.r_coeff(l, t.z - t.w)? * p_pow(l, t.w);
        if weight != Complex64::new(0.0, 0.0) {
            out.push(LTerm { l, fac, weight });
        }
    }
    Ok(out)
}

fn is_square(fac: &Factorization) -> bool {
    fac.factors().iter().all(|&(_, e)| e % 2 == 0)
}

/// `tau(chi^{(4l)}, q)` for odd `l` given by its factorization.
pub fn tau_4l_factored(l: &Factorization, q: i64) -> Complex64 {
    let lv = l.value();
    let q4 = q.rem_euclid(4);
    let g = g_factored(l, q);
    if g == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // tau(chi_l, q) = G / epsilon_l with epsilon_l = 1 or -i.
    if lv % 4 == 1 {
        match q4 {
            2 => cx(-2.0 * g),
            0 => cx(2.0 * g),
            _ => Complex64::new(0.0, 0.0),
        }
    } else {
        // -2i tau = -2i (i G) = 2G for q = 1, and -2G for q = 3 (mod 4).
        match q4 {
            1 => cx(2.0 * g),
            3 => cx(-2.0 * g),
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

fn require_c_region(op: &'static str, t: &ShiftTriple) -> Result<()> {
    if t.s.re < 2.0 || t.w.re < 2.0 || t.z.re < 2.0 {
        return Err(precondition(op, format!("real parts of ({}, {}, {}) must be at least 2", t.s, t.w, t.z)));
    }
    Ok(())
}

/// `C(s, w, z) = sum_{q <= q_max} sum_{odd l <= l_max, l not a square}
/// tau(chi^{(4l)}, q) r(l, z - w) q^{-s} l^{-w}`.
pub fn c_direct(t: &ShiftTriple, f: &HeckeEigenform, q_max: u64, l_max: u64) -> Result<Estimate> {
    const OP: &str = "c_direct";
    require_c_region(OP, t)?;
    let terms = l_terms(t, f, l_max, |fac| !is_square(fac))?;
    let q_pows: Vec<Complex64> = (0..=q_max).map(|q| if q == 0 { cx(0.0) } else { p_pow(q, t.s) }).collect();
    let mut acc = ComplexSum::new();
    let mut abs_l = 0.0;
    let mut r_max = 0.0f64;
    for term in &terms {
        let mut inner = ComplexSum::new();
        for q in 1..=q_max {
            let tau = tau_4l_factored(&term.fac, q as i64);
            if tau.re != 0.0 {
                inner.add(tau * q_pows[q as usize]);
            }
        }
        acc.add(term.weight * inner.value());
        let scaled = term.weight.norm() * (term.l as f64).powf(t.w.re);
        abs_l += 2.0 * (term.l as f64).sqrt() * term.weight.norm();
        if 2 * term.l > l_max {
            r_max = r_max.max(scaled);
        }
    }
    // |tau(chi^{(4l)}, q)| is at most 2 sqrt(l) away from common factors of l and q.
    let sigma_s = t.s.re;
    let sigma_w = t.w.re.min(t.z.re);
    let zeta_s = zeta(cx(sigma_s), 1e-12)?.re;
    let tail_l = 2.0 * zeta_s * integer_tail(r_max.max(1.0), sigma_w - 0.5, l_max as f64, 0.5);
    let tail_q = abs_l * integer_tail(1.0, sigma_s, q_max as f64, 1.0);
    Ok(Estimate { value: acc.value(), error_estimate: 1e-15 * abs_l * zeta_s, tail_estimate: tail_l + tail_q })
}

fn require_nonprincipal(op: &'static str, psi: Character) -> Result<()> {
    if !psi.modulus().is_multiple_of(4) {
        return Err(invalid(op, "the l-character must be one of psi_{+-1}, psi_{+-2}"));
    }
    Ok(())
}

/// `C_1(s, w, z; psi, psi') = sum_{l <= l_max, q <= q_max} G(chi_l, q) psi(l) psi'(q) r(l, z - w) l^{-w} q^{-s}`.
pub fn c1_twisted(
    t: &ShiftTriple,
    f: &HeckeEigenform,
    psi: Character,
    psi_prime: Character,
    q_max: u64,
    l_max: u64,
) -> Result<Complex64> {
    const OP: &str = "c1_twisted";
    require_nonprincipal(OP, psi)?;
    let terms = l_terms(t, f, l_max, |_| true)?;
    Ok(twisted_sum(t, &terms, psi_prime, q_max, |term| psi.eval(term.l as i64)))
}

/// `C_2(s, w, z; psi, psi') = sum_{l^2 <= l_max, q <= q_max} G(chi_{l^2}, q) psi(l) psi'(q) r(l^2, z - w) l^{-2w} q^{-s}`.
pub fn c2_twisted(
    t: &ShiftTriple,
    f: &HeckeEigenform,
    psi: Character,
    psi_prime: Character,
    q_max: u64,
    l_max: u64,
) -> Result<Complex64> {
    const OP: &str = "c2_twisted";
    require_nonprincipal(OP, psi)?;
    let terms = l_terms(t, f, l_max, is_square)?;
    Ok(twisted_sum(t, &terms, psi_prime, q_max, |term| {
        let root = (term.l as f64).sqrt().round() as i64;
        psi.eval(root)
    }))
}

fn twisted_sum(
    t: &ShiftTriple,
    terms: &[LTerm],
    psi_prime: Character,
    q_max: u64,
    psi_l: impl Fn(&LTerm) -> i8,
) -> Complex64 {
    let mut acc = ComplexSum::new();
    for term in terms {
        let chi = psi_l(term);
        if chi == 0 {
            continue;
        }
        let mut inner = ComplexSum::new();
        for q in 1..=q_max {
            let c = psi_prime.eval(q as i64);
            if c == 0 {
                continue;
            }
            let g = g_factored(&term.fac, q as i64);
            if g != 0.0 {
                inner.add(p_pow(q, t.s) * (g * c as f64));
            }
        }
        acc.add(term.weight * inner.value() * chi as f64);
    }
    acc.value()
}

/// `C` assembled from the twisted series: the six-term combination for `C_1` minus the
/// two-term combination for `C_2`, each with the `q`-cutoff matched to `q_max`.
/// Up to rounding this rearranges exactly the terms of [`c_direct`] with the same cutoffs.
pub fn c_decomposed(t: &ShiftTriple, f: &HeckeEigenform, q_max: u64, l_max: u64) -> Result<Complex64> {
    const OP: &str = "c_decomposed";
    require_c_region(OP, t)?;
    let psi = |j| Character::auxiliary(j);
    let s = t.s;
    let two_s = p_pow(2, s);
    let four_s = p_pow(4, s);
    let c1 = |a: i64, b: i64, q: u64| c1_twisted(t, f, psi(a)?, psi(b)?, q, l_max);
    let c2 = |a: i64, b: i64, q: u64| c2_twisted(t, f, psi(a)?, psi(b)?, q, l_max);
    let first = -two_s * (c1(2, 1, q_max / 2)? + c1(-2, 1, q_max / 2)?)
        + four_s * (c1(1, 0, q_max / 4)? + c1(-1, 0, q_max / 4)?)
        + c1(1, -1, q_max)?
        - c1(-1, -1, q_max)?;
    let second = -2.0 * two_s * c2(1, 1, q_max / 2)? + 2.0 * four_s * c2(1, 0, q_max / 4)?;
    Ok(first - second)
}

/// The finite `l`-sum `sum_l psi(p^l) G(chi_{p^l}, q1) r(p^l, t) p^{-lw}` at an odd prime,
/// summed by brute force well past the point where `G` vanishes.
pub fn d1_local_lsum(
    f: &HeckeEigenform,
    p: u64,
    q1: u64,
    psi: Character,
    w: Complex64,
    t: Complex64,
) -> Result<Complex64> {
    const OP: &str = "d1_local_lsum";
    check_local_args(OP, p, q1)?;
    let a = factorize(q1)?.valuation(p);
    let mut acc = ComplexSum::new();
    for l in 0..=a + 4 {
        let pl = p.pow(l);
        let g = g_factored(&factorize(pl)?, q1 as i64);
        if g == 0.0 {
            continue;
        }
        let chi = psi.eval(pl as i64);
        acc.add(f.r_prime_power(p, l, t)? * p_pow(pl, w) * (g * chi as f64));
    }
    Ok(acc.value())
}

/// Closed form of [`d1_local_lsum`]: for `p` not dividing `q1`,
/// `1 + psi(p) (q1/p) lambda(p) (1 - p^{-t}) p^{1/2 - w}`; for `p | q1`,
/// `1 - psi(p^2) p^{1 - 2w} (lambda(p^2) - lambda(p)^2 p^{-t} + p^{-2t})`.
pub fn d1_local_closed(
    f: &HeckeEigenform,
    p: u64,
    q1: u64,
    psi: Character,
    w: Complex64,
    t: Complex64,
) -> Result<Complex64> {
    const OP: &str = "d1_local_closed";
    check_local_args(OP, p, q1)?;
    let lp = f.lambda_at(p)?;
    if !q1.is_multiple_of(p) {
        let chi = psi.eval(p as i64) as f64 * kronecker_unchecked(q1 as i64, p as i64) as f64;
        Ok(1.0 + chi * lp * (1.0 - p_pow(p, t)) * p_pow(p, w - 0.5))
    } else {
        let chi = psi.eval((p * p) as i64) as f64;
        Ok(1.0 - chi * p_pow(p, 2.0 * w - 1.0) * (hecke_square(lp) - lp * lp * p_pow(p, t) + p_pow(p, 2.0 * t)))
    }
}

fn check_local_args(op: &'static str, p: u64, q1: u64) -> Result<()> {
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(invalid(op, format!("p = {p} must be an odd prime")));
    }
    if q1 == 0 || !factorize(q1)?.is_squarefree() {
        return Err(invalid(op, format!("q1 = {q1} must be positive and square-free")));
    }
    Ok(())
}

/// The local factor `D_{1,p}(s, w, t; q1, psi, psi')` as the double sum over `l >= 0` and
/// `0 <= k <= k_max`, with a geometric bound on the omitted `k`.
#[allow(clippy::too_many_arguments)]
pub fn d1_full_local(
    f: &HeckeEigenform,
    p: u64,
    q1: u64,
    psi: Character,
    psi_prime: Character,
    s: Complex64,
    w: Complex64,
    t: Complex64,
    k_max: u32,
) -> Result<Estimate> {
    const OP: &str = "d1_full_local";
    if s.re <= 0.5 || w.re <= 1.0 || (w + t).re <= 1.0 {
        return Err(precondition(OP, format!("need Re(s) > 1/2, Re(w) > 1, Re(w+t) > 1 at ({s}, {w}, {t})")));
    }
    if q1 == 0 || !factorize(q1)?.is_squarefree() {
        return Err(invalid(OP, format!("q1 = {q1} must be positive and square-free")));
    }
    let y = (p as f64).powf(-2.0 * s.re);
    if p == 2 {
        let c = psi_prime.eval(4);
        let mut acc = ComplexSum::new();
        for k in 0..=k_max {
            acc.add(p_pow(4, k as f64 * s) * (c as f64).powi(k as i32));
        }
        let tail = if c == 0 { 0.0 } else { y.powi(k_max as i32 + 1) / (1.0 - y) };
        return Ok(Estimate { value: acc.value(), error_estimate: 1e-16, tail_estimate: tail });
    }
    if !crate::arith::is_prime(p) {
        return Err(invalid(OP, format!("p = {p} must be prime")));
    }
    let (v, unit) = split_valuation(q1 as i64, p);
    let v = v.unwrap_or(0);
    let psi_p = psi.eval(p as i64) as f64;
    let psi2_p = psi_prime.eval(p as i64) as f64;
    let mut acc = ComplexSum::new();
    for k in 0..=k_max {
        let a = v + 2 * k;
        let qk = psi2_p.powi(2 * k as i32) * p_pow(p, 2.0 * k as f64 * s);
        for l in 0..=a + 1 {
            let g = g_prime_power(p, l, Some(a), unit);
            if g == 0.0 {
                continue;
            }
            let term = f.r_prime_power(p, l, t)? * p_pow(p, l as f64 * w) * (g * psi_p.powi(l as i32));
            acc.add(qk * term);
        }
    }
    // |G(chi_{p^l}, .)| <= p^l and |r(p^l, t)| <= (l + 1)(1 + p^{-Re t})^2, so each k
    // contributes at most y^k sum_l (l + 1) x^l (1 + p^{-Re t})^2.
    let x = (p as f64).powf(1.0 - w.re);
    let rt = 1.0 + (p as f64).powf(-t.re);
    let bound = rt * rt / ((1.0 - x) * (1.0 - x));
    let tail = bound * y.powi(k_max as i32 + 1) / (1.0 - y);
    Ok(Estimate { value: acc.value(), error_estimate: 1e-15 * acc.value().norm().max(1.0), tail_estimate: tail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions() {
        assert!(ShiftTriple::real(2.0, 1.0, 1.0).in_s0(0.01));
        assert!(!ShiftTriple::real(1.0, 1.0, 1.0).in_s0(0.01));
        assert!(ShiftTriple::real(1.0, 0.8, 0.85).in_s3(0.01));
        assert_eq!(ShiftTriple::real(1.0, 0.2, 0.85).s3_violations(0.01).len(), 1);
    }

    #[test]
    fn divisor_enumeration() {
        let mut d = divisors(&factorize(36).unwrap());
        d.sort_unstable();
        assert_eq!(d, vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
    }

    #[test]
    fn tau_4l_matches_direct_sum() {
        for l in (1..60u64).step_by(2) {
            let fac = factorize(l).unwrap();
            for q in 0..30i64 {
                let direct = crate::gauss::tau_sum(Character::Kronecker(4 * l as i64), q).unwrap();
                assert!((tau_4l_factored(&fac, q) - direct).norm() < 1e-9, "l = {l}, q = {q}");
            }
        }
    }
}
