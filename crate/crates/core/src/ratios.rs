//! The smoothed sum of ratios `L^{(2)}(1/2 + alpha, f x chi_n) / L^{(2)}(1/2 + beta, f x chi_n)`
//! over odd `n`, its predicted main term, and the regression of the deviation against `X`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{inducing_discriminant, kronecker_table};
use crate::error::{invalid, precondition, Error, Result};
use crate::lfun::{TruncationPolicy, TwistFamily};
use crate::mds::{p_product_accelerated, sym2_without_two, EulerProductResult, ShiftTriple};
use crate::modform::HeckeEigenform;
use crate::numeric::{integrate, least_squares_slope, ComplexSum};

/// Odd `n` handled by one parallel work unit. Partial sums are reduced in chunk order, so
/// results do not depend on the number of workers.
const CHUNK: usize = 32;

/// Target for the relative tail of `P` in the main term.
const MAIN_TERM_TAIL: f64 = 1e-8;

/// Serializable description of a weight function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `exp(-1 / (1 - u^2))` with `u` the affine image of `t` in `(-1, 1)`.
    Bump { lo: f64, hi: f64 },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Bump { lo: 1.0, hi: 2.0 }
    }
}

/// A smooth non-negative weight supported in `[lo, hi]` with `0 < lo < hi`.
#[derive(Clone)]
pub struct SmoothWeight {
    name: String,
    lo: f64,
    hi: f64,
    panels: usize,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for SmoothWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothWeight").field("name", &self.name).field("support", &(self.lo, self.hi)).finish()
    }
}

impl Default for SmoothWeight {
    fn default() -> Self {
        Self::bump(1.0, 2.0).expect("default support is valid")
    }
}

impl SmoothWeight {
    /// The bump `exp(-1 / (1 - u^2))`, `u = (2t - lo - hi) / (hi - lo)`, zero outside `(lo, hi)`.
    pub fn bump(lo: f64, hi: f64) -> Result<Self> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        Self::custom(format!("bump[{lo}, {hi}]"), lo, hi, move |t| {
            let u = (t - mid) / half;
            if u.abs() >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - u * u)).exp()
            }
        })
    }

    /// A caller-supplied weight. It must vanish outside `[lo, hi]`; values are clamped
    /// to zero there regardless.
    pub fn custom(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid("SmoothWeight", format!("support [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        Ok(Self { name: name.into(), lo, hi, panels: 8, func: Arc::new(func) })
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        match *spec {
            WeightSpec::Bump { lo, hi } => Self::bump(lo, hi),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            0.0
        } else {
            (self.func)(t)
        }
    }
}

/// Mellin transform `int_0^oo w(t) t^{s-1} dt` by adaptive quadrature, absolute error below
/// `1e-10`.
pub fn mellin_hat(w: &SmoothWeight, s: Complex64) -> Result<Complex64> {
    let width = (w.hi - w.lo) / w.panels as f64;
    let mut acc = ComplexSum::new();
    for i in 0..w.panels {
        let a = w.lo + i as f64 * width;
        let b = if i + 1 == w.panels { w.hi } else { a + width };
        let (v, _) = integrate(|t| (s - 1.0).scale(t.ln()).exp() * w.eval(t), a, b, 1e-12 / w.panels as f64)?;
        acc.add(v);
    }
    Ok(acc.value())
}

/// The shifts `alpha` (numerator) and `beta` (denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPair {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl ShiftPair {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// Every violated hypothesis: `0 < Re alpha < 1/2`, `Re beta > 0`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.alpha.re > 0.0 && self.alpha.re < 0.5) {
            out.push(format!("Re(alpha) = {} must lie in (0, 1/2)", self.alpha.re));
        }
        if self.beta.re.is_nan() || self.beta.re <= 0.0 {
            out.push(format!("Re(beta) = {} must be positive", self.beta.re));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            out.push("shifts must be finite".into());
        }
        out
    }

    pub fn validate(&self, op: &'static str) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(precondition(op, v.join("; ")))
        }
    }

    /// `N(alpha, beta) = max(1 - 2 Re alpha, 1 - 2 Re beta)`.
    pub fn error_exponent(&self) -> f64 {
        (1.0 - 2.0 * self.alpha.re).max(1.0 - 2.0 * self.beta.re)
    }

    pub fn has_imaginary_part(&self) -> bool {
        self.alpha.im != 0.0 || self.beta.im != 0.0
    }
}

/// Value of the left-hand sum at one `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhsSum {
    pub value: Complex64,
    /// Propagated AFE error estimates of all ratios.
    pub error_estimate: f64,
    /// Number of odd `n` with `n / X` inside the support.
    pub terms: u64,
    /// `sum w(n / X)` over the same `n`.
    pub weight_sum: f64,
}

struct Partial {
    sum: Complex64,
    err: f64,
    weights: f64,
}

/// `sum_{n odd} L^{(2)}(1/2 + alpha, f x chi_n) / L^{(2)}(1/2 + beta, f x chi_n) w(n / X)`.
pub fn lhs_sum(
    x: f64,
    shifts: &ShiftPair,
    f: &HeckeEigenform,
    w: &SmoothWeight,
    pol: &TruncationPolicy,
) -> Result<LhsSum> {
    const OP: &str = "lhs_sum";
    shifts.validate(OP)?;
    if !(x >= 10.0 && x.is_finite()) {
        return Err(precondition(OP, format!("X = {x} must be at least 10")));
    }
    let (lo, hi) = w.support();
    let n_lo = ((lo * x).floor() as u64 + 1) | 1;
    let n_hi = (hi * x).ceil() as u64 - 1;
    let ns: Vec<u64> = (n_lo..=n_hi).step_by(2).filter(|&n| w.eval(n as f64 / x) > 0.0).collect();
    if ns.is_empty() {
        return Ok(LhsSum { value: Complex64::new(0.0, 0.0), error_estimate: 0.0, terms: 0, weight_sum: 0.0 });
    }
    let max_d = *ns.last().unwrap();
    let half = Complex64::new(0.5, 0.0);
    let num = TwistFamily::new(f, half + shifts.alpha, max_d, pol)?;
    let den =
        if shifts.alpha == shifts.beta { None } else { Some(TwistFamily::new(f, half + shifts.beta, max_d, pol)?) };

    let partials: Vec<Result<Partial>> = ns
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sum = ComplexSum::new();
            let mut err = 0.0;
            let mut weights = 0.0;
            for &n in chunk {
                let wt = w.eval(n as f64 / x);
                let data = inducing_discriminant(n)?;
                let chars = kronecker_table(data.discriminant)?;
                let a = num.l2_twist_with_chars(data.discriminant, &data.degenerate_primes, &chars)?;
                let ratio = match &den {
                    None => {
                        check_denominator(OP, n, a.value)?;
                        Complex64::new(1.0, 0.0)
                    }
                    Some(den) => {
                        let b = den.l2_twist_with_chars(data.discriminant, &data.degenerate_primes, &chars)?;
                        check_denominator(OP, n, b.value)?;
                        let r = a.value / b.value;
                        err += wt
                            * r.norm()
                            * (a.error_estimate / a.value.norm().max(1e-300) + b.error_estimate / b.value.norm());
                        r
                    }
                };
                sum.add(ratio * wt);
                weights += wt;
            }
            Ok(Partial { sum: sum.value(), err, weights })
        })
        .collect();

    let mut total = ComplexSum::new();
    let mut err = 0.0;
    let mut weights = crate::numeric::CompensatedSum::new();
    for p in partials {
        let p = p?;
        total.add(p.sum);
        err += p.err;
        weights.add(p.weights);
    }
    Ok(LhsSum { value: total.value(), error_estimate: err, terms: ns.len() as u64, weight_sum: weights.value() })
}

fn check_denominator(op: &'static str, n: u64, v: Complex64) -> Result<()> {
    let m = v.norm();
    if m.is_nan() || m < 1e-10 {
        return Err(Error::Singularity { op, n, magnitude: m });
    }
    Ok(())
}

/// `w_hat(1) L^{(2)}(1 + 2 alpha, sym^2 f) P(1, 1/2 + alpha, 1/2 + beta)`, the coefficient of
/// `X` in the main term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTermConstant {
    pub w_hat_1: f64,
    pub sym2: Complex64,
    pub p: EulerProductResult,
    pub value: Complex64,
    pub uncertainty: f64,
}

pub fn main_term_constant(
    shifts: &ShiftPair,
    f: &HeckeEigenform,
    w: &SmoothWeight,
    pol: &TruncationPolicy,
) -> Result<MainTermConstant> {
    const OP: &str = "main_term";
    shifts.validate(OP)?;
    let half = Complex64::new(0.5, 0.0);
    let t = ShiftTriple::new(Complex64::new(1.0, 0.0), half + shifts.alpha, half + shifts.beta);
    debug_assert!(t.in_s3(crate::mds::REGION_MARGIN) || shifts.alpha.re < 0.005);
    let w_hat_1 = mellin_hat(w, Complex64::new(1.0, 0.0))?.re;
    let (sym2, sym2_err) = sym2_without_two(1.0 + 2.0 * shifts.alpha, f, pol)?;
    let mut cutoff = 20_000.min(f.n_max());
    let p = loop {
        let p = p_product_accelerated(&t, f, cutoff, pol)?;
        if p.tail_estimate <= MAIN_TERM_TAIL * p.value.norm() || cutoff == f.n_max() {
            if p.tail_estimate > MAIN_TERM_TAIL * p.value.norm() {
                log::warn!("P tail {:e} above target with all {} primes", p.tail_estimate, p.primes_used);
            }
            break p;
        }
        cutoff = (cutoff * 4).min(f.n_max());
    };
    let value = sym2 * p.value * w_hat_1;
    let uncertainty = w_hat_1 * (sym2_err * p.value.norm() + sym2.norm() * p.tail_estimate) + 1e-12 * value.norm();
    Ok(MainTermConstant { w_hat_1, sym2, p, value, uncertainty })
}

/// `X w_hat(1) L^{(2)}(1 + 2 alpha, sym^2 f) P(1, 1/2 + alpha, 1/2 + beta)`.
pub fn main_term(
    x: f64,
    shifts: &ShiftPair,
    f: &HeckeEigenform,
    w: &SmoothWeight,
    pol: &TruncationPolicy,
) -> Result<Complex64> {
    Ok(main_term_constant(shifts, f, w, pol)?.value * x)
}

/// One row of a [`RatiosReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatiosRecord {
    pub x: f64,
    pub lhs: Complex64,
    pub main: Complex64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub lhs_error: f64,
    pub terms: u64,
    pub seconds: f64,
}

/// Result of [`run_verification`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatiosReport {
    pub form: String,
    pub weight: String,
    pub shifts: ShiftPair,
    pub imaginary_shifts: bool,
    pub policy: TruncationPolicy,
    pub main_constant: MainTermConstant,
    pub records: Vec<RatiosRecord>,
    /// Least-squares slope of `log |lhs - main|` against `log X`.
    pub fitted_slope: Option<f64>,
    /// `N(alpha, beta)`: the proven exponent (plus any epsilon) for the absolute deviation.
    pub predicted_abs_exponent: f64,
    /// `N(alpha, beta) - 1`, the matching exponent for the relative deviation.
    pub predicted_rel_exponent: f64,
    pub bound: String,
    pub runtime_seconds: f64,
}

pub const CSV_HEADER: [&str; 7] = ["X", "re_lhs", "im_lhs", "re_main", "im_main", "abs_dev", "rel_dev"];

impl RatiosReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        wtr.write_record(CSV_HEADER).map_err(ser)?;
        for r in &self.records {
            let row = [r.x, r.lhs.re, r.lhs.im, r.main.re, r.main.im, r.abs_dev, r.rel_dev].map(|v| v.to_string());
            wtr.write_record(&row).map_err(ser)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()?)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv()?)?;
        Ok(())
    }

    /// Whether the relative deviation decreases from the first to the last `X`.
    pub fn rel_dev_decreasing(&self) -> bool {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) if self.records.len() >= 2 => b.rel_dev < a.rel_dev,
            _ => false,
        }
    }
}

/// Evaluates both sides on every `X` of the grid (sorted internally) and fits the decay
/// of the absolute deviation.
pub fn run_verification(
    grid: &[f64],
    shifts: &ShiftPair,
    f: &HeckeEigenform,
    w: &SmoothWeight,
    pol: &TruncationPolicy,
) -> Result<RatiosReport> {
    const OP: &str = "run_verification";
    let start = Instant::now();
    let mut xs: Vec<f64> = grid.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    if xs.len() < 3 {
        return Err(precondition(OP, format!("need at least 3 distinct X values, got {}", xs.len())));
    }
    shifts.validate(OP)?;
    let constant = main_term_constant(shifts, f, w, pol)?;
    let mut records = Vec::with_capacity(xs.len());
    for &x in &xs {
        let t0 = Instant::now();
        let lhs = lhs_sum(x, shifts, f, w, pol)?;
        let main = constant.value * x;
        let abs_dev = (lhs.value - main).norm();
        let rel_dev = abs_dev / main.norm();
        log::info!("X = {x}: lhs {} main {} rel_dev {rel_dev:e}", lhs.value, main);
        records.push(RatiosRecord {
            x,
            lhs: lhs.value,
            main,
            abs_dev,
            rel_dev,
            lhs_error: lhs.error_estimate,
            terms: lhs.terms,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        records.iter().filter(|r| r.abs_dev > 0.0).map(|r| (r.x.ln(), r.abs_dev.ln())).unzip();
    let fitted_slope = if lx.len() >= 3 { least_squares_slope(&lx, &ly) } else { None };
    let n_ab = shifts.error_exponent();
    Ok(RatiosReport {
        form: f.label().to_string(),
        weight: w.name().to_string(),
        shifts: *shifts,
        imaginary_shifts: shifts.has_imaginary_part(),
        policy: *pol,
        main_constant: constant,
        records,
        fitted_slope,
        predicted_abs_exponent: n_ab,
        predicted_rel_exponent: n_ab - 1.0,
        bound: format!(
            "|lhs - main| = O(X^(N + eps)) with N = max(1 - 2 Re alpha, 1 - 2 Re beta) = {n_ab}, conditional on GRH; \
             trend thresholds used to judge this report are engineering choices"
        ),
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_mellin_basics() {
        let w = SmoothWeight::default();
        let one = mellin_hat(&w, Complex64::new(1.0, 0.0)).unwrap();
        let zero = mellin_hat(&w, Complex64::new(0.0, 0.0)).unwrap();
        assert!(one.re > 0.0 && one.re <= 1.0);
        assert!(zero.re >= one.re / 2.0 && zero.re <= one.re);
        let far = mellin_hat(&w, Complex64::new(1.0, 10.0)).unwrap();
        assert!(far.norm() < one.re);
    }

    #[test]
    fn shift_validation() {
        assert!(ShiftPair::real(0.3, 0.35).violations().is_empty());
        assert_eq!(ShiftPair::real(0.6, 0.35).violations().len(), 1);
        assert_eq!(ShiftPair::real(0.0, -0.1).violations().len(), 2);
        assert!((ShiftPair::real(0.3, 0.35).error_exponent() - 0.4).abs() < 1e-15);
    }
}
