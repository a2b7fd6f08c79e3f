//! Small numerical helpers shared by the analytic modules.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Complex version of [`CompensatedSum`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = ComplexSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * K_WEIGHTS[7];
    let mut gauss = fc * G_WEIGHTS[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let pair = f(c - x) + f(c + x);
        kron += pair * K_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += pair * G_WEIGHTS[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss-Kronrod quadrature of a complex-valued integrand on `[a, b]`.
/// Returns the integral and an error estimate.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<(Complex64, f64)> {
    let mut stack = vec![(a, b, 0u32)];
    let mut total = ComplexSum::new();
    let mut err = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(&f, lo, hi);
        let share = abs_tol * (hi - lo) / (b - a);
        if e <= share.max(1e-300) || depth >= 40 {
            if depth >= 40 && e > share {
                return Err(Error::NoConvergence {
                    op: "integrate",
                    reason: format!("interval [{lo}, {hi}] error {e:e}"),
                });
            }
            total.add(v);
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok((total.value(), err))
}

/// Barycentric weights for Lagrange interpolation at equispaced nodes `0..m`,
/// evaluated at offset `x` (in units of the node spacing).
#[inline]
pub(crate) fn lagrange_weights<const M: usize>(x: f64) -> [f64; M] {
    let mut w = [0.0; M];
    for (j, wj) in w.iter_mut().enumerate() {
        let d = x - j as f64;
        if d == 0.0 {
            let mut exact = [0.0; M];
            exact[j] = 1.0;
            return exact;
        }
        *wj = BINOMIAL_SIGNS[M][j] / d;
    }
    let total: f64 = w.iter().sum();
    for wj in w.iter_mut() {
        *wj /= total;
    }
    w
}

// (-1)^j C(M-1, j) for the barycentric formula.
const BINOMIAL_SIGNS: [[f64; 8]; 9] = [
    [0.0; 8],
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, -2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, -3.0, 3.0, -1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, -4.0, 6.0, -4.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, -5.0, 10.0, -10.0, 5.0, -1.0, 0.0, 0.0],
    [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0, 0.0],
    [1.0, -7.0, 21.0, -35.0, 35.0, -21.0, 7.0, -1.0],
];

/// Ordinary least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
