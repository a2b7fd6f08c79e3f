//! Complex log-gamma via the Lanczos approximation (g = 607/128, 15 terms).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162_5e-6,
];

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let x = z - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// A branch of `log Gamma(z)`; only its exponential is meaningful for `Re z < 1/2`.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::Pole { op: "gamma", at: format!("{z}") });
    }
    if z.re < 0.5 {
        let s = (PI * z).sin();
        Ok(PI.ln() - s.ln() - lanczos_ln_gamma(1.0 - z))
    } else {
        Ok(lanczos_ln_gamma(z))
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re > 0.0 && z.re == z.re.round() && z.re <= 20.0 {
        let mut f = 1.0;
        for k in 2..z.re as u32 {
            f *= k as f64;
        }
        return Ok(Complex64::new(f, 0.0));
    }
    Ok(ln_gamma(z)?.exp())
}
