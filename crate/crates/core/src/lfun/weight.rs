//! The approximate-functional-equation weight
//!
//! ```text
//! W_s(y) = 1/(2 pi i) \int_{(c)} gamma(s + u) / gamma(s) y^{-u} du / u
//! ```
//!
//! (or with another finite normalizing constant in place of `gamma(s)` when `s` sits on
//! a pole of `gamma`),
//! evaluated by the trapezoid rule on vertical lines to the right of every pole, with
//! an extra line between 0 and the first gamma pole when that pole is far enough left.
//! Values are tabulated on a uniform grid in `v = log y` and interpolated.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use super::gamma::ln_gamma;
use crate::error::{invalid, Result};

/// `Gamma(scale * s + shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactor {
    pub scale: f64,
    pub shift: f64,
}

impl GammaFactor {
    pub const fn new(scale: f64, shift: f64) -> Self {
        Self { scale, shift }
    }
}

/// `sum_j log Gamma(a_j s + b_j)`.
pub fn ln_gamma_product(factors: &[GammaFactor], s: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for g in factors {
        acc += ln_gamma(s * g.scale + g.shift)?;
    }
    Ok(acc)
}

const NODE_STEP: f64 = 0.05;
const GRID_STEP: f64 = 1.0 / 512.0;
const PROFILE_STEP: f64 = 1.0 / 32.0;
const NODE_CUTOFF: f64 = 1e-19;
const NEGLIGIBLE: f64 = 1e-24;

#[derive(Debug)]
struct Contour {
    c: f64,
    first: i64,
    coef: Vec<Complex64>,
    /// Sum of `|coef|`; bounds the integral at `v = 0` up to `exp(-c v)`.
    mass: f64,
    /// Residue picked up at `u = 0` when the line lies left of it.
    residue: Complex64,
}

impl Contour {
    fn build(factors: &[GammaFactor], s: Complex64, ln_norm: Complex64, c: f64, residue: Complex64) -> Result<Self> {
        let node = |j: i64| -> Result<Complex64> {
            let u = Complex64::new(c, j as f64 * NODE_STEP);
            let g = (ln_gamma_product(factors, s + u)? - ln_norm).exp();
            Ok(g / u * (NODE_STEP / TAU))
        };
        let peak_t = -s.im;
        let mut up = Vec::new();
        let mut peak: f64 = 0.0;
        let mut j = 0i64;
        loop {
            let v = node(j)?;
            peak = peak.max(v.norm());
            up.push(v);
            let t = j as f64 * NODE_STEP;
            if t > peak_t + 1.0 && v.norm() < NODE_CUTOFF * peak {
                break;
            }
            j += 1;
            if j > 400_000 {
                return Err(invalid("weight", "gamma ratio decays too slowly"));
            }
        }
        let mut down = Vec::new();
        let mut j = -1i64;
        loop {
            let v = node(j)?;
            peak = peak.max(v.norm());
            down.push(v);
            let t = j as f64 * NODE_STEP;
            if t < peak_t - 1.0 && v.norm() < NODE_CUTOFF * peak {
                break;
            }
            j -= 1;
            if j < -400_000 {
                return Err(invalid("weight", "gamma ratio decays too slowly"));
            }
        }
        let first = -(down.len() as i64);
        down.reverse();
        down.extend(up);
        let mass = down.iter().map(|z| z.norm()).sum();
        Ok(Self { c, first, coef: down, mass, residue })
    }

    fn bound(&self, v: f64) -> f64 {
        self.mass * (-self.c * v).exp()
    }

    fn eval(&self, v: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, -NODE_STEP * v);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut z = Complex64::from_polar(1.0, -(self.first as f64) * NODE_STEP * v);
        for (k, &a) in self.coef.iter().enumerate() {
            if k % 64 == 0 {
                let j = self.first + k as i64;
                z = Complex64::from_polar(1.0, -(j as f64) * NODE_STEP * v);
            }
            acc += a * z;
            z *= rot;
        }
        self.residue + acc * (-self.c * v).exp()
    }
}

/// `W_s` for one gamma signature and one `s`.
#[derive(Debug)]
pub struct WeightFunction {
    sigma: f64,
    contours: Vec<Contour>,
    v_hi: f64,
    profile_lo: f64,
    /// `suffix[k] = max_{j >= k} |W(v_j)| exp((1 - sigma) v_j)` on the profile grid.
    suffix: Vec<f64>,
}

impl WeightFunction {
    /// `W_s` normalized by `gamma(s)`.
    pub fn new(factors: &[GammaFactor], s: Complex64) -> Result<Self> {
        let ln_gs = ln_gamma_product(factors, s)?;
        Self::with_norm(factors, s, ln_gs)
    }

    /// The weight with `exp(ln_norm)` in place of `gamma(s)`.
    pub fn with_norm(factors: &[GammaFactor], s: Complex64, ln_norm: Complex64) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|g| g.scale <= 0.0) {
            return Err(invalid("weight", "gamma factors need positive scales"));
        }
        // Poles of Gamma(a(s + u) + b) sit at u = -s - (b + k)/a.
        let pole = factors.iter().map(|g| -s.re - g.shift / g.scale).fold(f64::NEG_INFINITY, f64::max);
        let c_right = pole.max(0.0) + 1.0;
        let mut contours = Vec::new();
        if pole <= -1.0 {
            let residue = (ln_gamma_product(factors, s)? - ln_norm).exp();
            contours.push(Contour::build(factors, s, ln_norm, pole / 2.0, residue)?);
        }
        for extra in [0.0, 3.0, 8.0] {
            contours.push(Contour::build(factors, s, ln_norm, c_right + extra, Complex64::new(0.0, 0.0))?);
        }
        let mut w = Self { sigma: s.re, contours, v_hi: 0.0, profile_lo: -1.0, suffix: Vec::new() };
        w.locate_tail();
        Ok(w)
    }

    fn scaled(&self, v: f64) -> f64 {
        self.eval_direct(v).norm() * ((1.0 - self.sigma) * v).exp()
    }

    fn locate_tail(&mut self) {
        let mut v = 0.0;
        let mut quiet = 0;
        while v < 9.0 {
            if self.scaled(v) < NEGLIGIBLE {
                quiet += 1;
                if quiet == 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
            v += 0.25;
        }
        self.v_hi = v.min(9.0);
        let count = ((self.v_hi - self.profile_lo) / PROFILE_STEP).ceil() as usize + 1;
        let mut suffix: Vec<f64> = (0..count).map(|k| self.scaled(self.profile_lo + k as f64 * PROFILE_STEP)).collect();
        for k in (0..count.saturating_sub(1)).rev() {
            suffix[k] = suffix[k].max(suffix[k + 1]);
        }
        self.suffix = suffix;
    }

    /// Direct quadrature at `v = log y`, on the line with the least cancellation.
    pub fn eval_direct(&self, v: f64) -> Complex64 {
        let best = self.contours.iter().min_by(|a, b| a.bound(v).total_cmp(&b.bound(v))).expect("at least one contour");
        best.eval(v)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Upper end of the range where the weight is not negligible.
    pub fn v_hi(&self) -> f64 {
        self.v_hi
    }

    /// Number of terms `n <= N` needed in `sum a(n) n^{-s} W(n / q)` so that the
    /// omitted terms have density below `tol` (coefficients taken as bounded).
    pub fn term_count(&self, q: f64, tol: f64) -> u64 {
        let scale = q.powf(1.0 - self.sigma);
        let k = self.suffix.partition_point(|&m| m * scale >= tol);
        let v = (self.profile_lo + (k as f64 + 1.0) * PROFILE_STEP).min(self.v_hi + PROFILE_STEP);
        (q * v.exp()).floor().max(1.0) as u64
    }
}

/// Tabulated `W_s(e^v)` on `[v_lo, v_hi]`.
#[derive(Debug)]
pub struct WeightTable {
    v_lo: f64,
    values: Vec<Complex64>,
}

impl WeightTable {
    fn build(func: &WeightFunction, v_lo: f64) -> Self {
        let count = ((func.v_hi - v_lo) / GRID_STEP).ceil() as usize + 8;
        let values = (0..count).map(|k| func.eval_direct(v_lo + k as f64 * GRID_STEP)).collect();
        Self { v_lo, values }
    }

    pub fn v_lo(&self) -> f64 {
        self.v_lo
    }

    /// Six-point Lagrange interpolation; zero beyond the tabulated range.
    #[inline]
    pub fn eval(&self, v: f64) -> Complex64 {
        let pos = (v - self.v_lo) / GRID_STEP;
        let last = self.values.len() - 6;
        if pos >= (last + 2) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i0 = (pos.floor() as isize - 2).clamp(0, last as isize) as usize;
        let w = crate::numeric::lagrange_weights::<6>(pos - i0 as f64);
        let vals = &self.values[i0..i0 + 6];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..6 {
            acc += vals[j] * w[j];
        }
        acc
    }
}

/// A cached weight function together with its (lazily grown) table.
#[derive(Debug)]
pub struct WeightEntry {
    pub func: WeightFunction,
    table: RwLock<Option<Arc<WeightTable>>>,
}

impl WeightEntry {
    /// A table reaching down to at least `v_lo`.
    pub fn table(&self, v_lo: f64) -> Arc<WeightTable> {
        let want = (v_lo - 0.5).floor();
        {
            let guard = self.table.read().unwrap_or_else(|e| e.into_inner());
            if let Some(t) = guard.as_ref() {
                if t.v_lo <= want {
                    return Arc::clone(t);
                }
            }
        }
        let mut guard = self.table.write().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = guard.as_ref() {
            if t.v_lo <= want {
                return Arc::clone(t);
            }
        }
        let t = Arc::new(WeightTable::build(&self.func, want));
        *guard = Some(Arc::clone(&t));
        t
    }
}

type Key = (Vec<(u64, u64)>, [u64; 4]);

fn key(factors: &[GammaFactor], s: Complex64, ln_norm: Complex64) -> Key {
    (
        factors.iter().map(|g| (g.scale.to_bits(), g.shift.to_bits())).collect(),
        [s.re.to_bits(), s.im.to_bits(), ln_norm.re.to_bits(), ln_norm.im.to_bits()],
    )
}

const CACHE_CAPACITY: usize = 512;

/// Shared weight cache keyed by gamma signature, `s` and normalization; lookups take a
/// read lock, insertions a write lock.
pub fn weight_entry(factors: &[GammaFactor], s: Complex64, ln_norm: Complex64) -> Result<Arc<WeightEntry>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<WeightEntry>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let k = key(factors, s, ln_norm);
    if let Some(e) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&k) {
        return Ok(Arc::clone(e));
    }
    let entry =
        Arc::new(WeightEntry { func: WeightFunction::with_norm(factors, s, ln_norm)?, table: RwLock::new(None) });
    let mut guard = cache.write().unwrap_or_else(|e| e.into_inner());
    if guard.len() >= CACHE_CAPACITY {
        guard.clear();
    }
    Ok(Arc::clone(guard.entry(k).or_insert(entry)))
}
