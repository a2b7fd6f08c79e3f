//! Fast evaluation of `L(s, f x chi^{(d)})` for many discriminants at a fixed `s`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::weight::{ln_gamma_product, weight_entry, GammaFactor, WeightTable};
use super::{check_strip, euler_factor_inverse, LValue, TruncationPolicy, WEIGHT_FLOOR};
use crate::arith::{inducing_discriminant, kronecker_table, kronecker_unchecked};
use crate::error::{precondition, Error, Result};
use crate::modform::HeckeEigenform;
use crate::numeric::ComplexSum;

/// Shares weight tables and `lambda(n) n^{-s}` across all twists with `|d| <= max_abs_d`.
pub struct TwistFamily<'f> {
    form: &'f HeckeEigenform,
    s: Complex64,
    front: Arc<WeightTable>,
    back: Arc<WeightTable>,
    front_weight: Arc<super::weight::WeightEntry>,
    back_weight: Arc<super::weight::WeightEntry>,
    front_coef: Vec<Complex64>,
    back_coef: Vec<Complex64>,
    ln_n: Vec<f64>,
    ln_gamma_ratio: Complex64,
    max_abs_d: u64,
    pol: TruncationPolicy,
}

impl<'f> TwistFamily<'f> {
    pub fn new(form: &'f HeckeEigenform, s: Complex64, max_abs_d: u64, pol: &TruncationPolicy) -> Result<Self> {
        const OP: &str = "TwistFamily::new";
        pol.validate(OP)?;
        check_strip(OP, s)?;
        if max_abs_d == 0 {
            return Err(precondition(OP, "max_abs_d must be positive"));
        }
        let gamma = [GammaFactor::new(1.0, (form.weight() as f64 - 1.0) / 2.0)];
        let ln_gs = ln_gamma_product(&gamma, s)?;
        let ln_g1s = ln_gamma_product(&gamma, 1.0 - s)?;
        let q_max = max_abs_d as f64 / (2.0 * PI);
        let front_weight = weight_entry(&gamma, s, ln_gs)?;
        let back_weight = weight_entry(&gamma, 1.0 - s, ln_g1s)?;
        let q_min = 1.0 / (2.0 * PI);
        let front = front_weight.table(-(q_max * pol.smoothing).ln());
        let back = back_weight.table(-(q_max / pol.smoothing).ln());
        let expo = 1.0 - 2.0 * s.re;
        let ratio_bound = (expo * q_min.ln()).exp().max((expo * q_max.ln()).exp()) * (ln_g1s - ln_gs).exp().norm();
        let n_front = front_weight.func.term_count(q_max * pol.smoothing, pol.tolerance);
        let n_back = back_weight.func.term_count(q_max / pol.smoothing, pol.tolerance / ratio_bound.max(1e-300));
        let n_cap = n_front.max(n_back);
        if n_cap > pol.max_terms || n_cap > form.n_max() {
            return Err(Error::CoefficientsExhausted { op: OP, required: n_cap });
        }
        let lambda = form.lambda_table();
        let ln_n: Vec<f64> = (0..=n_cap).map(|n| if n == 0 { 0.0 } else { (n as f64).ln() }).collect();
        let coef = |s: Complex64| -> Vec<Complex64> {
            (0..=n_cap as usize)
                .map(|n| if n == 0 { Complex64::new(0.0, 0.0) } else { (-s * ln_n[n]).exp() * lambda[n] })
                .collect()
        };
        Ok(Self {
            form,
            s,
            front,
            back,
            front_weight,
            back_weight,
            front_coef: coef(s),
            back_coef: coef(1.0 - s),
            ln_n,
            ln_gamma_ratio: ln_g1s - ln_gs,
            max_abs_d,
            pol: *pol,
        })
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn form(&self) -> &HeckeEigenform {
        self.form
    }

    /// `L(s, f x chi^{(d)})` given the values of `chi^{(d)}` on one period.
    pub fn value_with_chars(&self, d: i64, chars: &[i8]) -> Result<LValue> {
        const OP: &str = "TwistFamily::value";
        let a = d.unsigned_abs();
        if a > self.max_abs_d {
            return Err(precondition(OP, format!("|d| = {a} exceeds the family bound {}", self.max_abs_d)));
        }
        let q = a as f64 / (2.0 * PI);
        let i_k = if self.form.weight().is_multiple_of(4) { 1.0 } else { -1.0 };
        let omega = if d < 0 { -i_k } else { i_k };
        let prefactor = omega * ((1.0 - 2.0 * self.s) * q.ln() + self.ln_gamma_ratio).exp();
        let q_front = q * self.pol.smoothing;
        let q_back = q / self.pol.smoothing;
        let n_front = self.front_weight.func.term_count(q_front, self.pol.tolerance);
        let n_back = self.back_weight.func.term_count(q_back, self.pol.tolerance / prefactor.norm().max(1e-300));
        let (front, front_abs) = self.sum(&self.front, &self.front_coef, chars, q_front, n_front)?;
        let (back, back_abs) = self.sum(&self.back, &self.back_coef, chars, q_back, n_back)?;
        let pn = prefactor.norm();
        Ok(LValue {
            value: front + prefactor * back,
            error_estimate: self.pol.tolerance * (1.0 + pn) + WEIGHT_FLOOR * (front_abs + pn * back_abs),
            terms: n_front + n_back,
        })
    }

    fn sum(&self, table: &WeightTable, coef: &[Complex64], chars: &[i8], q: f64, n: u64) -> Result<(Complex64, f64)> {
        if n as usize >= coef.len() {
            return Err(Error::CoefficientsExhausted { op: "TwistFamily::value", required: n });
        }
        let lq = q.ln();
        let period = chars.len();
        let mut acc = ComplexSum::new();
        let mut abs = 0.0;
        let mut r = 0usize;
        for (&cf, &ln) in coef.iter().zip(&self.ln_n).skip(1).take(n as usize) {
            r += 1;
            if r == period {
                r = 0;
            }
            let c = chars[r];
            if c == 0 {
                continue;
            }
            let term = cf * table.eval(ln - lq);
            let term = if c < 0 { -term } else { term };
            abs += term.norm();
            acc.add(term);
        }
        Ok((acc.value(), abs))
    }

    /// `L(s, f x chi^{(d)})` for `d` fundamental or 1.
    pub fn value(&self, d: i64) -> Result<LValue> {
        self.value_with_chars(d, &kronecker_table(d)?)
    }

    /// `L^{(2)}(s, f x chi_n)` for odd `n`.
    pub fn l2_twist(&self, n: u64) -> Result<LValue> {
        let data = inducing_discriminant(n)?;
        let chars = kronecker_table(data.discriminant)?;
        self.l2_twist_with_chars(data.discriminant, &data.degenerate_primes, &chars)
    }

    /// As [`TwistFamily::l2_twist`] with the inducing data supplied by the caller.
    pub fn l2_twist_with_chars(&self, d: i64, degenerate: &[u64], chars: &[i8]) -> Result<LValue> {
        let base = self.value_with_chars(d, chars)?;
        let mut corr = Complex64::new(1.0, 0.0);
        for &p in degenerate {
            corr *= euler_factor_inverse(self.form, p, kronecker_unchecked(d, p as i64), self.s)?;
        }
        Ok(LValue { value: base.value * corr, error_estimate: base.error_estimate * corr.norm(), terms: base.terms })
    }
}
