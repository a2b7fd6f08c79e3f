mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistratios::arith::{is_fundamental_discriminant, kronecker};
use twistratios::lfun::*;
use twistratios::selftest::{fe_mismatch, fundamental_discriminants};
use twistratios::Complex64;

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

#[test]
fn gamma_examples() {
    assert!((gamma(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
    assert!((gamma(c(0.5, 0.0)).unwrap() - PI.sqrt()).norm() < 1e-14);
    // Gamma(6.5) and Gamma(7.5) from Gamma(1/2) by the recurrence; 1871.2543 is the latter
    let mut g = PI.sqrt();
    for k in 0..6 {
        g *= 0.5 + k as f64;
    }
    assert!((g - 287.8852778).abs() < 1e-6);
    assert!((gamma(c(6.5, 0.0)).unwrap().re - g).abs() < 1e-12 * g);
    assert!((gamma(c(7.5, 0.0)).unwrap().re - 1871.2543).abs() < 1e-4);
    assert!(gamma(c(0.0, 0.0)).is_err());
    assert!(gamma(c(-3.0, 0.0)).is_err());
}

#[test]
fn zeta_examples() {
    let tol = 1e-13;
    assert!((zeta(c(2.0, 0.0), tol).unwrap() - PI * PI / 6.0).norm() < 1e-13);
    assert!((zeta(c(-1.0, 0.0), tol).unwrap() + 1.0 / 12.0).norm() < 1e-13);
    assert!(zeta(c(1.0, 0.0), tol).is_err());
    // direct sum to N plus the first Euler-Maclaurin corrections
    let s = c(1.5, 2.0);
    let n = 1_000_000u64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..n).rev() {
        acc += (-s * (k as f64).ln()).exp();
    }
    let nf = n as f64;
    let ns = (-s * nf.ln()).exp();
    acc += ns * nf / (s - 1.0) + ns * 0.5 + s * ns / nf / 12.0;
    assert!((zeta(s, tol).unwrap() - acc).norm() < 1e-10);
    let z2 = zeta_without_two(c(3.0, 0.0), tol).unwrap();
    assert!((z2 - zeta(c(3.0, 0.0), tol).unwrap() * (1.0 - 0.125)).norm() < 1e-14);
}

#[test]
fn dirichlet_examples() {
    let s = c(2.0, 0.0);
    assert!((quad_dirichlet_l(s, 1, &pol()).unwrap().value - PI * PI / 6.0).norm() < 1e-12);
    let direct = direct_series(|_| 1.0, 5, s, 1_000_000, false);
    assert!(rel_err(quad_dirichlet_l(s, 5, &pol()).unwrap().value, direct) < 1e-10);
    assert!(quad_dirichlet_l(s, 9, &pol()).is_err());
    assert!(quad_dirichlet_l(s, -4 * 4, &pol()).is_err());
}

#[test]
fn twist_examples() {
    let f = delta();
    let s = c(2.0, 0.0);
    let direct = direct_series(|n| f.lambda_at(n).unwrap(), 5, s, 1_000_000, false);
    let afe = modular_twist_l(s, &f, 5, &pol()).unwrap();
    assert!(rel_err(afe.value, direct) < 1e-8, "{} vs {direct}", afe.value);
    // s = 0.8 against the rearranged functional equation
    let k = f.weight() as f64;
    let s = c(0.8, 0.0);
    let lhs = modular_twist_l(s, &f, 5, &pol()).unwrap().value;
    let other = modular_twist_l(c(0.2, 0.0), &f, 5, &pol()).unwrap().value;
    let factor = (5.0 / (2.0 * PI)).powf(1.0 - 2.0 * 0.8) * gamma(c(0.2 + (k - 1.0) / 2.0, 0.0)).unwrap()
        / gamma(c(0.8 + (k - 1.0) / 2.0, 0.0)).unwrap();
    assert!(rel_err(lhs, factor * other) < 1e-8);
    // d = 1 is L(s, f) with root number i^12 = 1
    assert_eq!(LDescription::modular_twist(12, 1).root_number, c(1.0, 0.0));
}

#[test]
fn fe_examples() {
    let f = delta();
    let s = c(0.8, 1.7);
    let d = 13;
    let desc = LDescription::modular_twist(f.weight(), d);
    let a = desc.completion_factor(s).unwrap() * modular_twist_l(s, &f, d, &pol()).unwrap().value;
    let b = desc.completion_factor(1.0 - s).unwrap() * modular_twist_l(1.0 - s, &f, d, &pol()).unwrap().value;
    assert!((a - desc.root_number * b).norm() / a.norm() < 1e-8);
    // odd sign for d < 0 forces a central zero
    let z = modular_twist_l(c(0.5, 0.0), &f, -3, &pol()).unwrap();
    assert!(z.value.norm() <= 1e-6);
}

#[test]
fn central_zeros_for_negative_discriminants() {
    let f = delta();
    let negs: Vec<i64> = fundamental_discriminants(200).into_iter().filter(|d| *d < 0).take(10).collect();
    assert_eq!(negs.len(), 10);
    for d in negs {
        assert_eq!(LDescription::modular_twist(12, d).root_number, c(-1.0, 0.0));
        let v = modular_twist_l(c(0.5, 0.0), &f, d, &pol()).unwrap().value;
        assert!(v.norm() < 1e-6, "d = {d}: {v}");
    }
}

#[test]
fn fe_consistency_random_points() {
    let f = delta();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let discs = fundamental_discriminants(500);
    let p = pol();
    for _ in 0..20 {
        let s = c(0.5, rng.gen_range(-10.0..10.0));
        let d = discs[rng.gen_range(0..discs.len())];
        let dev = fe_mismatch(&LDescription::quadratic_dirichlet(d), |s, p| quad_dirichlet_l(s, d, p), s, &p).unwrap();
        assert!(dev < 1e-7, "dirichlet d={d} s={s}: {dev:e}");
        let dev = fe_mismatch(&LDescription::modular_twist(12, d), |s, p| modular_twist_l(s, &f, d, p), s, &p).unwrap();
        assert!(dev < 1e-7, "twist d={d} s={s}: {dev:e}");
        let dev = fe_mismatch(&LDescription::symmetric_square(12), |s, p| sym2_l(s, &f, p), s, &p).unwrap();
        assert!(dev < 1e-7, "sym2 s={s}: {dev:e}");
    }
}

#[test]
fn afe_against_direct_series_thirty_discriminants() {
    let f = delta();
    let discs = fundamental_discriminants(500);
    let step = discs.len() / 30;
    let s = c(2.0, 0.3);
    for i in 0..30 {
        let d = discs[i * step];
        let direct = direct_series(|_| 1.0, d, s, 1_000_000, false);
        assert!(rel_err(quad_dirichlet_l(s, d, &pol()).unwrap().value, direct) < 1e-8, "dirichlet d={d}");
        let direct = direct_series(|n| f.lambda_at(n).unwrap(), d, s, 1_000_000, false);
        assert!(rel_err(modular_twist_l(s, &f, d, &pol()).unwrap().value, direct) < 1e-8, "twist d={d}");
    }
}

#[test]
fn sym2_examples() {
    let f = delta();
    let tol = 1e-14;
    let s = c(3.0, 0.0);
    let mut acc = 0.0;
    for n in (1..=10_000u64).rev() {
        acc += f.lambda_at(n * n).unwrap() * (n as f64).powi(-3);
    }
    let expect = zeta(c(6.0, 0.0), tol).unwrap() * acc;
    assert!(rel_err(sym2_l(s, &f, &pol()).unwrap().value, expect) < 1e-8);
    // Euler product over p <= 10^4 at s = 2.5
    let s = c(2.5, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    for p in twistratios::arith::primes_up_to(10_000) {
        let sat = f.satake_at(p).unwrap();
        let x = Complex64::new(p as f64, 0.0).powc(-s);
        prod /= (1.0 - sat.alpha1 * sat.alpha1 * x) * (1.0 - x) * (1.0 - sat.alpha2 * sat.alpha2 * x);
    }
    assert!(rel_err(sym2_l(s, &f, &pol()).unwrap().value, prod) < 1e-6);
}

#[test]
fn euler_factor_examples() {
    let f = delta();
    let s = c(2.0, 0.0);
    assert_eq!(euler_factor_modular(&f, 7, 0, s).unwrap(), c(1.0, 0.0));
    let l2 = f.lambda_at(2).unwrap();
    let expect = 1.0 / (1.0 - l2 / 4.0 + 1.0 / 16.0);
    assert!((euler_factor_modular(&f, 2, 1, s).unwrap() - expect).norm() < 1e-15);
    assert!((1.0 + 0.530330 / 4.0 + 1.0 / 16.0 - 1.0 / expect).abs() < 1e-6);
    for p in [2u64, 3, 5, 101] {
        for chi in [-1i8, 0, 1] {
            let z = c(0.7, 3.0);
            let prod = euler_factor_modular(&f, p, chi, z).unwrap() * euler_factor_inverse(&f, p, chi, z).unwrap();
            assert!((prod - 1.0).norm() < 1e-14);
        }
    }
}

#[test]
fn l2_twist_examples() {
    let f = delta();
    let s = c(2.0, 0.0);
    let p = pol();
    let l5 = l2_twist(s, &f, 5, &p).unwrap().value;
    let chi2 = kronecker(5, 2).unwrap() as f64;
    let expect =
        modular_twist_l(s, &f, 5, &p).unwrap().value * (1.0 - f.lambda_at(2).unwrap() * chi2 / 4.0 + 1.0 / 16.0);
    assert!(rel_err(l5, expect) < 1e-13);
    let l9 = l2_twist(s, &f, 9, &p).unwrap().value;
    let expect = modular_twist_l(s, &f, 1, &p).unwrap().value
        * euler_factor_inverse(&f, 2, 1, s).unwrap()
        * euler_factor_inverse(&f, 3, 1, s).unwrap();
    assert!(rel_err(l9, expect) < 1e-13);
    let l45 = l2_twist(s, &f, 45, &p).unwrap().value;
    let chi3 = kronecker(5, 3).unwrap() as f64;
    let expect = l5 * (1.0 - f.lambda_at(3).unwrap() * chi3 / 9.0 + 1.0 / 81.0);
    assert!(rel_err(l45, expect) < 1e-13);
    assert!(rel_err(l45, jacobi_series(&f, 45, s, 100_000)) < 1e-6);
    assert!(l2_twist(s, &f, 4, &p).is_err());
}

// sum over odd m <= m_max of lambda(m) (m / n) m^{-s}
fn jacobi_series(f: &twistratios::modform::HeckeEigenform, n: u64, s: Complex64, m_max: u64) -> Complex64 {
    let chars: Vec<f64> = (0..n).map(|r| kronecker(r as i64, n as i64).unwrap() as f64).collect();
    let lam = f.lambda_table();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in (1..=m_max).rev().filter(|m| m % 2 == 1) {
        let ch = chars[(m % n) as usize];
        if ch != 0.0 {
            acc += (-s * (m as f64).ln()).exp() * (lam[m as usize] * ch);
        }
    }
    acc
}

#[test]
fn l2_twist_against_direct_series_fifty_random_n() {
    let f = delta();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = c(2.0, 0.0);
    for _ in 0..50 {
        let n = 2 * rng.gen_range(0..5000u64) + 1;
        let afe = l2_twist(s, &f, n, &pol()).unwrap().value;
        let direct = jacobi_series(&f, n, s, 1_000_000);
        assert!((afe - direct).norm() < 1e-6, "n = {n}: {afe} vs {direct}");
    }
}

#[test]
fn twist_family_matches_single_evaluations() {
    let f = delta();
    let s = c(0.8, 0.0);
    let fam = TwistFamily::new(&f, s, 4000, &pol()).unwrap();
    for n in [1u64, 3, 5, 9, 45, 105, 1001, 3999] {
        let a = fam.l2_twist(n).unwrap();
        let b = l2_twist(s, &f, n, &pol()).unwrap();
        assert!(rel_err(a.value, b.value) < 1e-9, "n = {n}");
    }
    for d in [5i64, -3, 8, -4, 1] {
        assert!(is_fundamental_discriminant(d) || d == 1);
        assert!(rel_err(fam.value(d).unwrap().value, modular_twist_l(s, &f, d, &pol()).unwrap().value) < 1e-9);
    }
}

#[test]
fn smoothing_refinement() {
    // a different split scale and a tighter tolerance leave the value in place
    let f = delta();
    let s = c(0.8, 2.0);
    let a = modular_twist_l(s, &f, -20, &pol()).unwrap();
    let b = modular_twist_l(s, &f, -20, &pol().with_smoothing(0.6).with_tolerance(1e-14)).unwrap();
    assert!((a.value - b.value).norm() <= (a.error_estimate + b.error_estimate).max(1e-12));
}

proptest! {
    #[test]
    fn gamma_recurrence(re in -8.0f64..20.0, im in -20.0f64..20.0) {
        let z = c(re, im);
        prop_assume!((z - z.re.round()).norm() > 1e-3 || z.re > 0.5);
        let lhs = gamma(z + 1.0).unwrap();
        let rhs = z * gamma(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(1e-300));
    }

    #[test]
    fn gamma_reflection(re in -4.0f64..4.0, im in 0.1f64..10.0) {
        let z = c(re, im);
        let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = PI / (z * PI).sin();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm());
    }

    #[test]
    fn zeta_conjugate_symmetry(re in -4.0f64..4.0, im in 0.5f64..50.0) {
        let s = c(re, im);
        let a = zeta(s, 1e-13).unwrap();
        let b = zeta(s.conj(), 1e-13).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
    }
}
