//! Gamma, zeta and completed L-functions `Lambda(s) = Q^s prod Gamma(a_j s + b_j) L(s)`
//! with `Lambda(s) = omega Lambda(1 - s)`, evaluated through the approximate functional
//! equation
//!
//! ```text
//! L(s) = sum a(n) n^{-s} W_s(n / (Q mu))
//!      + omega Q^{1-2s} gamma(1-s)/gamma(s) sum a(n) n^{s-1} W_{1-s}(n mu / Q)
//! ```
//!
//! where `mu` is the split scale [`TruncationPolicy::smoothing`]; the value does not
//! depend on it, which is what the functional-equation checks exploit.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{inducing_discriminant, is_fundamental_discriminant, kronecker_table};
use crate::error::{invalid, precondition, Error, Result};
use crate::modform::HeckeEigenform;
use crate::numeric::ComplexSum;

mod family;
pub mod gamma;
pub mod weight;
pub mod zeta;

pub use family::TwistFamily;
pub use gamma::{gamma, ln_gamma};
pub use weight::{ln_gamma_product, GammaFactor};
pub use zeta::{zeta, zeta_without_two};

use weight::{weight_entry, WeightEntry, WeightTable};

/// Truncation and accuracy controls for approximate-functional-equation sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Terms whose weighted density falls below this are dropped.
    pub tolerance: f64,
    /// Hard cap on the length of either sum.
    pub max_terms: u64,
    /// Split scale between the two sums; any positive value gives the same `L(s)`.
    pub smoothing: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_terms: 5_000_000, smoothing: 1.0 }
    }
}

impl TruncationPolicy {
    pub fn with_smoothing(self, smoothing: f64) -> Self {
        Self { smoothing, ..self }
    }

    pub fn with_tolerance(self, tolerance: f64) -> Self {
        Self { tolerance, ..self }
    }

    pub fn validate(&self, op: &'static str) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(invalid(op, format!("tolerance {} outside (0, 1)", self.tolerance)));
        }
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return Err(invalid(op, format!("smoothing {} must be positive", self.smoothing)));
        }
        if self.max_terms == 0 {
            return Err(invalid(op, "max_terms must be positive"));
        }
        Ok(())
    }
}

/// Gamma factors, conductor and root number of a completed L-function.
#[derive(Debug, Clone, PartialEq)]
pub struct LDescription {
    pub gamma: Vec<GammaFactor>,
    /// `Q` in `Q^s`.
    pub conductor: f64,
    pub root_number: Complex64,
    /// Real coefficients make the dual equal to the function itself; only that case is
    /// supported.
    pub self_dual: bool,
}

impl LDescription {
    pub fn quadratic_dirichlet(d: i64) -> Self {
        let a = if d < 0 { 1.0 } else { 0.0 };
        Self {
            gamma: vec![GammaFactor::new(0.5, a / 2.0)],
            conductor: (d.unsigned_abs() as f64 / PI).sqrt(),
            root_number: Complex64::new(1.0, 0.0),
            self_dual: true,
        }
    }

    pub fn modular_twist(weight: u32, d: i64) -> Self {
        let i_k = if weight.is_multiple_of(4) { 1.0 } else { -1.0 };
        let eps = if d < 0 { -1.0 } else { 1.0 };
        Self {
            gamma: vec![GammaFactor::new(1.0, (weight as f64 - 1.0) / 2.0)],
            conductor: d.unsigned_abs() as f64 / (2.0 * PI),
            root_number: Complex64::new(i_k * eps, 0.0),
            self_dual: true,
        }
    }

    pub fn symmetric_square(weight: u32) -> Self {
        let k = weight as f64;
        Self {
            gamma: vec![
                GammaFactor::new(0.5, 0.5),
                GammaFactor::new(0.5, (k - 1.0) / 2.0),
                GammaFactor::new(0.5, k / 2.0),
            ],
            conductor: PI.powf(-1.5),
            root_number: Complex64::new(1.0, 0.0),
            self_dual: true,
        }
    }

    /// `Lambda(s) / L(s) = Q^s prod Gamma(a_j s + b_j)`.
    pub fn completion_factor(&self, s: Complex64) -> Result<Complex64> {
        Ok((s * self.conductor.ln() + ln_gamma_product(&self.gamma, s)?).exp())
    }
}

/// An L-value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LValue {
    pub value: Complex64,
    pub error_estimate: f64,
    /// Total number of Dirichlet coefficients used.
    pub terms: u64,
}

impl LValue {
    fn scaled(self, factor: Complex64) -> Self {
        Self { value: self.value * factor, error_estimate: self.error_estimate * factor.norm(), terms: self.terms }
    }
}

const STRIP: (f64, f64) = (-3.0, 4.0);
const DIRECT_LIMIT: u64 = 600;
// Relative accuracy of the tabulated weight, from quadrature and interpolation.
pub(crate) const WEIGHT_FLOOR: f64 = 1e-13;

pub(crate) enum WeightEval {
    Direct(Arc<WeightEntry>),
    Table(Arc<WeightTable>),
}

impl WeightEval {
    #[inline]
    pub(crate) fn eval(&self, v: f64) -> Complex64 {
        match self {
            WeightEval::Direct(e) => e.func.eval_direct(v),
            WeightEval::Table(t) => t.eval(v),
        }
    }
}

/// Everything about an AFE evaluation that does not depend on the coefficients.
pub(crate) struct AfePlan {
    pub s: Complex64,
    pub front: WeightEval,
    pub back: WeightEval,
    pub q_front: f64,
    pub q_back: f64,
    pub n_front: u64,
    pub n_back: u64,
    pub prefactor: Complex64,
    pub tolerance: f64,
}

pub(crate) fn check_strip(op: &'static str, s: Complex64) -> Result<()> {
    if s.re < STRIP.0 || s.re > STRIP.1 || !s.re.is_finite() || !s.im.is_finite() {
        return Err(precondition(op, format!("Re(s) = {} outside [{}, {}]", s.re, STRIP.0, STRIP.1)));
    }
    Ok(())
}

pub(crate) fn afe_plan(op: &'static str, desc: &LDescription, s: Complex64, pol: &TruncationPolicy) -> Result<AfePlan> {
    pol.validate(op)?;
    check_strip(op, s)?;
    if !desc.self_dual {
        return Err(invalid(op, "only self-dual descriptions are supported"));
    }
    if desc.conductor.is_nan() || desc.conductor <= 0.0 {
        return Err(invalid(op, "conductor must be positive"));
    }
    let pole = |e: Error| match e {
        Error::Pole { .. } => Error::Pole { op, at: format!("gamma factor at s = {s}") },
        other => other,
    };
    let ln_gs = ln_gamma_product(&desc.gamma, s).map_err(pole)?;
    let ln_q = desc.conductor.ln();
    // When gamma(1 - s) is infinite the back weight absorbs the gamma ratio.
    let (back_norm, prefactor) = match ln_gamma_product(&desc.gamma, 1.0 - s) {
        Ok(ln_g1s) => (ln_g1s, desc.root_number * ((1.0 - 2.0 * s) * ln_q + ln_g1s - ln_gs).exp()),
        Err(Error::Pole { .. }) => (ln_gs, desc.root_number * ((1.0 - 2.0 * s) * ln_q).exp()),
        Err(e) => return Err(e),
    };
    let q_front = desc.conductor * pol.smoothing;
    let q_back = desc.conductor / pol.smoothing;
    let e_front = weight_entry(&desc.gamma, s, ln_gs)?;
    let e_back = weight_entry(&desc.gamma, 1.0 - s, back_norm)?;
    let n_front = e_front.func.term_count(q_front, pol.tolerance);
    let n_back = e_back.func.term_count(q_back, pol.tolerance / prefactor.norm().max(1e-300));
    let needed = n_front.max(n_back);
    if needed > pol.max_terms {
        return Err(Error::CoefficientsExhausted { op, required: needed });
    }
    let choose = |e: Arc<WeightEntry>, q: f64, n: u64| {
        if n <= DIRECT_LIMIT {
            WeightEval::Direct(e)
        } else {
            WeightEval::Table(e.table(-q.ln()))
        }
    };
    Ok(AfePlan {
        s,
        front: choose(e_front, q_front, n_front),
        back: choose(e_back, q_back, n_back),
        q_front,
        q_back,
        n_front,
        n_back,
        prefactor,
        tolerance: pol.tolerance,
    })
}

impl AfePlan {
    pub(crate) fn run(&self, op: &'static str, coeff: &dyn Fn(u64) -> Option<f64>) -> Result<LValue> {
        let (front, front_abs) = weighted_sum(op, &self.front, coeff, self.s, self.q_front, self.n_front)?;
        let (back, back_abs) = weighted_sum(op, &self.back, coeff, 1.0 - self.s, self.q_back, self.n_back)?;
        let pn = self.prefactor.norm();
        Ok(LValue {
            value: front + self.prefactor * back,
            error_estimate: self.tolerance * (1.0 + pn) + WEIGHT_FLOOR * (front_abs + pn * back_abs),
            terms: self.n_front + self.n_back,
        })
    }
}

fn weighted_sum(
    op: &'static str,
    weight: &WeightEval,
    coeff: &dyn Fn(u64) -> Option<f64>,
    s: Complex64,
    q: f64,
    n_terms: u64,
) -> Result<(Complex64, f64)> {
    let lq = q.ln();
    let mut acc = ComplexSum::new();
    let mut abs = 0.0;
    for n in 1..=n_terms {
        let a = coeff(n).ok_or(Error::CoefficientsExhausted { op, required: n_terms })?;
        if a == 0.0 {
            continue;
        }
        let ln_n = (n as f64).ln();
        let term = (-s * ln_n).exp() * weight.eval(ln_n - lq) * a;
        abs += term.norm();
        acc.add(term);
    }
    Ok((acc.value(), abs))
}

/// `L(s)` for a self-dual description with real coefficients `coeff(n)` (`None` once the
/// source is exhausted).
pub fn afe_value(
    desc: &LDescription,
    coeff: &dyn Fn(u64) -> Option<f64>,
    s: Complex64,
    pol: &TruncationPolicy,
) -> Result<LValue> {
    afe_plan("afe_value", desc, s, pol)?.run("afe_value", coeff)
}

/// Lengths of the two AFE sums for `desc` at `s`.
pub fn afe_term_counts(desc: &LDescription, s: Complex64, pol: &TruncationPolicy) -> Result<(u64, u64)> {
    let plan = afe_plan("afe_term_counts", desc, s, pol)?;
    Ok((plan.n_front, plan.n_back))
}

fn require_discriminant(op: &'static str, d: i64) -> Result<()> {
    if !is_fundamental_discriminant(d) {
        return Err(precondition(op, format!("{d} is neither 1 nor a fundamental discriminant")));
    }
    Ok(())
}

/// `L(s, chi^{(d)})`; `d = 1` is the Riemann zeta function.
pub fn quad_dirichlet_l(s: Complex64, d: i64, pol: &TruncationPolicy) -> Result<LValue> {
    const OP: &str = "quad_dirichlet_l";
    require_discriminant(OP, d)?;
    if d == 1 {
        check_strip(OP, s)?;
        let z = zeta(s, pol.tolerance)?;
        return Ok(LValue { value: z, error_estimate: pol.tolerance * z.norm().max(1.0), terms: 0 });
    }
    let chars = kronecker_table(d)?;
    let period = chars.len() as u64;
    let coeff = move |n: u64| Some(chars[(n % period) as usize] as f64);
    afe_plan(OP, &LDescription::quadratic_dirichlet(d), s, pol)?.run(OP, &coeff)
}

/// `L(s, f x chi^{(d)})` for `d` fundamental or 1.
pub fn modular_twist_l(s: Complex64, f: &HeckeEigenform, d: i64, pol: &TruncationPolicy) -> Result<LValue> {
    const OP: &str = "modular_twist_l";
    require_discriminant(OP, d)?;
    let chars = kronecker_table(d)?;
    let period = chars.len() as u64;
    let lambda = f.lambda_table();
    let coeff = move |n: u64| {
        let a = *lambda.get(n as usize)?;
        Some(a * chars[(n % period) as usize] as f64)
    };
    afe_plan(OP, &LDescription::modular_twist(f.weight(), d), s, pol)?.run(OP, &coeff)
}

/// `L(s, sym^2 f)`.
pub fn sym2_l(s: Complex64, f: &HeckeEigenform, pol: &TruncationPolicy) -> Result<LValue> {
    const OP: &str = "sym2_l";
    if s.re > STRIP.1 && s.re.is_finite() && s.im.is_finite() {
        return sym2_euler_product(s, f, pol);
    }
    let plan = afe_plan(OP, &LDescription::symmetric_square(f.weight()), s, pol)?;
    let needed = plan.n_front.max(plan.n_back);
    let coeffs = f.sym2_coefficients(needed).map_err(|e| match e {
        Error::TableExhausted { .. } => Error::CoefficientsExhausted { op: OP, required: needed },
        other => other,
    })?;
    plan.run(OP, &|n| coeffs.get(n as usize).copied())
}

// Right of the strip the Euler product converges fast: each omitted prime changes the
// value by at most about 3 p^{-Re s}.
fn sym2_euler_product(s: Complex64, f: &HeckeEigenform, pol: &TruncationPolicy) -> Result<LValue> {
    pol.validate("sym2_l")?;
    let sigma = s.re;
    // sum_{p > P} 3 p^{-sigma} <= 3 P^{1 - sigma} / (sigma - 1)
    let p_max = ((3.0 / (pol.tolerance * (sigma - 1.0))).ln() / (sigma - 1.0)).exp().ceil().max(3.0) as u64;
    let p_max = p_max.min(f.n_max());
    let mut v = Complex64::new(1.0, 0.0);
    for p in crate::arith::primes_up_to(p_max) {
        let l2 = f.lambda_prime_power(p, 2)?;
        let x = Complex64::new(p as f64, 0.0).powc(-s);
        v /= 1.0 - l2 * x + l2 * x * x - x * x * x;
    }
    let tail = 3.0 * (p_max as f64).powf(1.0 - sigma) / (sigma - 1.0);
    Ok(LValue { value: v, error_estimate: tail * v.norm() + f64::EPSILON * v.norm(), terms: p_max })
}

/// `L^{(2)}(s, sym^2 f)`: the Euler factor at 2 removed.
pub fn sym2_l_without_two(s: Complex64, f: &HeckeEigenform, pol: &TruncationPolicy) -> Result<LValue> {
    let l = sym2_l(s, f, pol)?;
    let l4 = f.lambda_at(4)?;
    let x = Complex64::new(2.0, 0.0).powc(-s);
    Ok(l.scaled(1.0 - l4 * x + l4 * x * x - x * x * x))
}

/// `1 - lambda(p) chi(p) p^{-s} + chi(p)^2 p^{-2s}`, the inverse local factor of
/// `L(s, f x chi)` at `p`.
pub fn euler_factor_inverse(f: &HeckeEigenform, p: u64, chi_p: i8, s: Complex64) -> Result<Complex64> {
    let lp = f.lambda_at(p)?;
    let x = Complex64::new(p as f64, 0.0).powc(-s) * chi_p as f64;
    Ok(1.0 - lp * x + x * x)
}

/// The local factor `(1 - lambda(p) chi(p) p^{-s} + chi(p)^2 p^{-2s})^{-1}`.
pub fn euler_factor_modular(f: &HeckeEigenform, p: u64, chi_p: i8, s: Complex64) -> Result<Complex64> {
    let inv = euler_factor_inverse(f, p, chi_p, s)?;
    if inv.norm() < 1e-14 {
        return Err(Error::Singularity { op: "euler_factor_modular", n: p, magnitude: inv.norm() });
    }
    Ok(1.0 / inv)
}

/// `L^{(2)}(s, f x chi_n)` for odd `n`, through the primitive character inducing `chi_n`.
pub fn l2_twist(s: Complex64, f: &HeckeEigenform, n: u64, pol: &TruncationPolicy) -> Result<LValue> {
    let data = inducing_discriminant(n)?;
    let base = modular_twist_l(s, f, data.discriminant, pol)?;
    let mut corr = Complex64::new(1.0, 0.0);
    for &p in &data.degenerate_primes {
        let chi = crate::arith::kronecker(data.discriminant, p as i64)?;
        corr *= euler_factor_inverse(f, p, chi, s)?;
    }
    Ok(base.scaled(corr))
}
