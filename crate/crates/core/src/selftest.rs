//! Property suites run by `selftest`: each checks one family of exact or numerically
//! testable identities and reports the worst deviation seen.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_fundamental_discriminant, kronecker};
use crate::error::Result;
use crate::gauss::{g_def, g_fast, tau_4l_from_tau_l, tau_sum, Character};
use crate::lfun::{
    modular_twist_l, quad_dirichlet_l, sym2_l, zeta_without_two, LDescription, LValue, TruncationPolicy,
};
use crate::mds::{a1_brute, a1_closed, d1_local_closed, d1_local_lsum, ShiftTriple};
use crate::modform::HeckeEigenform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestOptions {
    /// Smaller grids; every suite still runs.
    pub fast: bool,
    /// Seed for the sampled points of the functional-equation suite.
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { fast: false, seed: 20_240_601 }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    /// The invariant being checked, named in failure output.
    pub invariant: String,
    pub passed: bool,
    pub checks: u64,
    pub worst: f64,
    pub tolerance: f64,
    pub seconds: f64,
    /// Where the worst deviation occurred, or the error that stopped the suite.
    pub detail: String,
}

struct Tally {
    checks: u64,
    worst: f64,
    at: String,
}

impl Tally {
    fn new() -> Self {
        Self { checks: 0, worst: 0.0, at: String::new() }
    }

    fn record(&mut self, dev: f64, at: impl FnOnce() -> String) {
        self.checks += 1;
        // NaN counts as the worst possible deviation
        if dev.is_nan() || dev > self.worst {
            self.worst = if dev.is_nan() { f64::INFINITY } else { dev };
            self.at = at();
        }
    }
}

fn finish(suite: &str, invariant: &str, tolerance: f64, start: Instant, tally: Result<Tally>) -> SuiteResult {
    let seconds = start.elapsed().as_secs_f64();
    match tally {
        Ok(t) => SuiteResult {
            suite: suite.into(),
            invariant: invariant.into(),
            passed: t.worst < tolerance,
            checks: t.checks,
            worst: t.worst,
            tolerance,
            seconds,
            detail: t.at,
        },
        Err(e) => SuiteResult {
            suite: suite.into(),
            invariant: invariant.into(),
            passed: false,
            checks: 0,
            worst: f64::INFINITY,
            tolerance,
            seconds,
            detail: e.to_string(),
        },
    }
}

/// Runs every suite in a fixed order.
pub fn run_all(f: &HeckeEigenform, opts: &SelftestOptions) -> Vec<SuiteResult> {
    vec![
        reciprocity(opts),
        gauss_laws(opts),
        coefficient_algebra(f, opts),
        functional_equation(f, opts),
        a1_agreement(f, opts),
        d_local(f),
    ]
}

pub fn all_passed(results: &[SuiteResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Plain-text table, one line per suite.
pub fn render_table(results: &[SuiteResult]) -> String {
    let mut out =
        format!("{:<22} {:<6} {:>8} {:>12} {:>10} {:>8}\n", "suite", "status", "checks", "worst", "tol", "secs");
    for r in results {
        out += &format!(
            "{:<22} {:<6} {:>8} {:>12.3e} {:>10.1e} {:>8.2}\n",
            r.suite,
            if r.passed { "PASS" } else { "FAIL" },
            r.checks,
            r.worst,
            r.tolerance,
            r.seconds
        );
        if !r.passed {
            out += &format!("    invariant: {}\n    at: {}\n", r.invariant, r.detail);
        }
    }
    out
}

/// Quadratic reciprocity and both supplementary laws for odd coprime `m, n`.
pub fn reciprocity(opts: &SelftestOptions) -> SuiteResult {
    let start = Instant::now();
    let limit: i64 = if opts.fast { 101 } else { 401 };
    let run = || -> Result<Tally> {
        let mut t = Tally::new();
        for n in (3..=limit).step_by(2) {
            let sign_m1 = if n % 4 == 1 { 1 } else { -1 };
            let sign_2 = if n % 8 == 1 || n % 8 == 7 { 1 } else { -1 };
            t.record((kronecker(-1, n)? - sign_m1).abs() as f64, || format!("(-1/{n})"));
            t.record((kronecker(2, n)? - sign_2).abs() as f64, || format!("(2/{n})"));
            for m in (3..n).step_by(2) {
                let (a, b) = (kronecker(m, n)?, kronecker(n, m)?);
                if a == 0 {
                    continue;
                }
                let expect = if m % 4 == 3 && n % 4 == 3 { -1 } else { 1 };
                t.record((a * b - expect).abs() as f64, || format!("m = {m}, n = {n}"));
            }
        }
        Ok(t)
    };
    finish("arith reciprocity", "(m/n)(n/m) = (-1)^((m-1)(n-1)/4)", 0.5, start, run())
}

/// The `tau(chi^{(4l)}, q)` case table against direct summation and the multiplicative
/// `G` against its definition.
pub fn gauss_laws(opts: &SelftestOptions) -> SuiteResult {
    let start = Instant::now();
    let (l_max, q_max, n_max, q_grid) = if opts.fast { (61, 60, 201, 97) } else { (301, 300, 1001, 1000) };
    let run = || -> Result<Tally> {
        let mut t = Tally::new();
        for l in (1..=l_max).step_by(2) {
            let chi = Character::Kronecker(4 * l as i64);
            for q in 0..=q_max {
                let dev = (tau_4l_from_tau_l(l, q)? - tau_sum(chi, q)?).norm();
                t.record(dev / 1e-9, || format!("tau(chi^(4l), q) at l = {l}, q = {q}: {dev:e}"));
            }
        }
        for n in (1..=n_max).step_by(2) {
            let scale = 1e-6 * (n as f64).sqrt();
            for q in 1..=q_grid {
                let dev = (g_fast(n, q)? - g_def(n, q)?).norm();
                t.record(dev / scale, || format!("G(chi_n, q) at n = {n}, q = {q}: {dev:e}"));
            }
        }
        Ok(t)
    };
    finish("gauss sums", "tau(chi^(4l), q) case table; G_fast = G_def (deviation / tolerance)", 1.0, start, run())
}

/// `sum_{k | l} lambda(l/k) c(k) = [l = 1]`, the Deligne bound, `|lambda(p^e)| <= e + 1`,
/// and integer multiplicativity of the coefficients.
pub fn coefficient_algebra(f: &HeckeEigenform, opts: &SelftestOptions) -> SuiteResult {
    let start = Instant::now();
    let limit: u64 = (if opts.fast { 2_000 } else { 10_000 }).min(f.n_max());
    let run = || -> Result<Tally> {
        let mut t = Tally::new();
        for l in 1..=limit {
            let mut acc = 0.0;
            let fac = factorize(l)?;
            for k in divisors(&fac) {
                acc += f.lambda_at(l / k)? * f.c_at(k)?;
            }
            let expect = if l == 1 { 1.0 } else { 0.0 };
            let dev = (acc - expect).abs();
            t.record(dev / 1e-12, || format!("convolution at l = {l}: {dev:e}"));
        }
        for p in crate::arith::primes_up_to(limit) {
            for e in 1..=10u32 {
                let v = f.lambda_prime_power(p, e)?;
                let excess = (v.abs() - (e + 1) as f64 - 1e-9).max(0.0);
                t.record(excess, || format!("|lambda({p}^{e})| = {v}"));
            }
        }
        if let Some(tab) = f.integer_table() {
            let lim = limit.min(tab.len() as u64 - 1);
            for m in 2..=lim {
                for n in m + 1..=lim / m {
                    if gcd(m, n) == 1 {
                        let ok = tab[(m * n) as usize] == tab[m as usize].wrapping_mul(tab[n as usize]);
                        t.record(if ok { 0.0 } else { f64::INFINITY }, || format!("tau({m} * {n})"));
                    }
                }
            }
        }
        Ok(t)
    };
    finish(
        "coefficient algebra",
        "Dirichlet convolution, Deligne bound, multiplicativity (deviation / tolerance)",
        1.0,
        start,
        run(),
    )
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn divisors(fac: &crate::arith::Factorization) -> Vec<u64> {
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

/// Fundamental discriminants `d` with `|d| <= bound`, ordered by `|d|` then sign.
pub fn fundamental_discriminants(bound: u64) -> Vec<i64> {
    let mut out = Vec::new();
    for m in 3..=bound as i64 {
        for d in [-m, m] {
            if is_fundamental_discriminant(d) {
                out.push(d);
            }
        }
    }
    out
}

/// Relative mismatch `|Lambda(s) - omega Lambda(1 - s)|` with the two sides evaluated at
/// different split scales, so agreement is not a property of the AFE's symmetry alone.
pub fn fe_mismatch(
    desc: &LDescription,
    eval: impl Fn(Complex64, &TruncationPolicy) -> Result<LValue>,
    s: Complex64,
    pol: &TruncationPolicy,
) -> Result<f64> {
    let left = desc.completion_factor(s)? * eval(s, pol)?.value;
    let s1 = Complex64::new(1.0, 0.0) - s;
    let right = desc.root_number * desc.completion_factor(s1)? * eval(s1, &pol.with_smoothing(1.37))?.value;
    Ok((left - right).norm() / left.norm().max(right.norm()).max(1e-300))
}

/// AFE self-consistency at sampled critical-line points for Dirichlet, twisted modular
/// and symmetric-square L-functions.
pub fn functional_equation(f: &HeckeEigenform, opts: &SelftestOptions) -> SuiteResult {
    let start = Instant::now();
    let (n_disc, n_pts) = if opts.fast { (6, 4) } else { (30, 20) };
    let run = || -> Result<Tally> {
        let pol = TruncationPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let all = fundamental_discriminants(500);
        let step = all.len() / n_disc;
        let discs: Vec<i64> = (0..n_disc).map(|i| all[i * step + rng.gen_range(0..step)]).collect();
        let pts: Vec<Complex64> = (0..n_pts).map(|_| Complex64::new(0.5, rng.gen_range(0.5..10.0))).collect();
        let mut t = Tally::new();
        for &s in &pts {
            for &d in &discs {
                let dev =
                    fe_mismatch(&LDescription::quadratic_dirichlet(d), |s, p| quad_dirichlet_l(s, d, p), s, &pol)?;
                t.record(dev / 1e-7, || format!("Dirichlet d = {d}, s = {s}: {dev:e}"));
                let dev = fe_mismatch(
                    &LDescription::modular_twist(f.weight(), d),
                    |s, p| modular_twist_l(s, f, d, p),
                    s,
                    &pol,
                )?;
                t.record(dev / 1e-7, || format!("twist d = {d}, s = {s}: {dev:e}"));
            }
            let dev = fe_mismatch(&LDescription::symmetric_square(f.weight()), |s, p| sym2_l(s, f, p), s, &pol)?;
            t.record(dev / 1e-7, || format!("sym2, s = {s}: {dev:e}"));
        }
        Ok(t)
    };
    finish("functional equation", "|Lambda(s) - omega Lambda(1-s)| / |Lambda| (deviation / 1e-7)", 1.0, start, run())
}

/// Closed form of `A_1` against its brute-force double sum, and the collapse
/// `A_1(s, w, w) = zeta^{(2)}(s)`.
pub fn a1_agreement(f: &HeckeEigenform, opts: &SelftestOptions) -> SuiteResult {
    let start = Instant::now();
    let (ss, ws): (&[f64], &[f64]) =
        if opts.fast { (&[1.8, 2.4], &[1.6, 2.0]) } else { (&[1.8, 2.0, 2.4], &[1.6, 1.8, 2.0]) };
    let run = || -> Result<Tally> {
        let pol = TruncationPolicy::default();
        let cutoff = 100_000.min(f.n_max());
        let mut t = Tally::new();
        for &s in ss {
            for &w in ws {
                for &z in ws {
                    let p = ShiftTriple::real(s, w, z);
                    let dev = (a1_closed(&p, f, cutoff, &pol)?.value - a1_brute(&p, f, 10_000)?.value).norm();
                    t.record(dev / 1e-3, || format!("closed vs brute at ({s}, {w}, {z}): {dev:e}"));
                }
                let p = ShiftTriple::real(s, w, w);
                let z2 = zeta_without_two(Complex64::new(s, 0.0), 1e-15)?;
                let dev = (a1_closed(&p, f, cutoff, &pol)?.value - z2).norm();
                t.record(dev / 1e-8, || format!("collapse at ({s}, {w}, {w}): {dev:e}"));
            }
        }
        Ok(t)
    };
    finish(
        "A1 agreement",
        "A1 closed form vs brute sum (1e-3) and collapse (1e-8), deviation / tolerance",
        1.0,
        start,
        run(),
    )
}

/// Brute finite `l`-sums of the `D_1` local factor against both closed forms.
pub fn d_local(f: &HeckeEigenform) -> SuiteResult {
    let start = Instant::now();
    let run = || -> Result<Tally> {
        let mut t = Tally::new();
        let psis = [Character::auxiliary(1)?, Character::auxiliary(-1)?];
        let wts = [(1.4, 0.3), (2.0, -0.2)];
        for p in [3u64, 5, 7, 11] {
            for q1 in [1, p, 15] {
                for psi in psis {
                    for (w, tt) in wts {
                        let (w, tt) = (Complex64::new(w, 0.0), Complex64::new(tt, 0.0));
                        let brute = d1_local_lsum(f, p, q1, psi, w, tt)?;
                        let closed = d1_local_closed(f, p, q1, psi, w, tt)?;
                        let dev = (brute - closed).norm();
                        t.record(dev, || format!("p = {p}, q1 = {q1}, {psi:?}, w = {w}, t = {tt}"));
                    }
                }
            }
        }
        Ok(t)
    };
    finish("D local identities", "brute l-sum = closed form (generic and ramified)", 1e-12, start, run())
}
