mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use twistratios::gauss::Character;
use twistratios::lfun::*;
use twistratios::mds::*;
use twistratios::Complex64;

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn pw(p: f64, e: Complex64) -> Complex64 {
    Complex64::new(p, 0.0).powc(-e)
}

#[test]
fn regions() {
    assert!(ShiftTriple::real(2.0, 1.0, 1.0).in_s0(REGION_MARGIN));
    assert!(!ShiftTriple::real(1.0, 1.0, 1.0).in_s0(REGION_MARGIN));
    assert_eq!(ShiftTriple::real(0.5, 0.2, 0.4).s0_violations(0.01).len(), 3);
    assert!(ShiftTriple::real(1.0, 0.8, 0.85).in_s3(REGION_MARGIN));
    assert!(!ShiftTriple::real(1.0, 0.8, 0.5).in_s3(REGION_MARGIN));
    assert!(p_product(&ShiftTriple::real(1.0, 0.2, 0.85), &delta(), 1000).is_err());
}

#[test]
fn local_factor_with_vanishing_eigenvalue() {
    let t = ShiftTriple::new(c(1.2, 0.5), c(0.9, -1.0), c(0.7, 2.0));
    for p in [3u64, 5, 101] {
        let pf = p as f64;
        let u = pw(pf, t.s);
        let x = pw(pf, 2.0 * t.w);
        let y = pw(pf, 2.0 * t.z);
        let expect = 1.0 + y * (1.0 - u) * (1.0 + x) + (1.0 - u) * x + 2.0 * x * u + x * x * u;
        assert!((p_local_factor(0.0, p, &t) - expect).norm() < 1e-15);
    }
}

#[test]
fn p_self_refinement() {
    let f = delta();
    let t = ShiftTriple::real(1.0, 0.8, 0.85);
    let a = p_product(&t, &f, 10_000).unwrap();
    let b = p_product(&t, &f, 100_000).unwrap();
    assert!((a.value - b.value).norm() < a.tail_estimate);
    assert!(b.tail_estimate < a.tail_estimate && b.primes_used > a.primes_used);
    let acc = p_product_accelerated(&t, &f, 100_000, &pol()).unwrap();
    assert!((acc.value - b.value).norm() < b.tail_estimate + acc.tail_estimate);
}

#[test]
fn collapse_identity() {
    let f = delta();
    for alpha in [0.1, 0.25, 0.4] {
        let t = ShiftTriple::real(1.0, 0.5 + alpha, 0.5 + alpha);
        let p = p_product_accelerated(&t, &f, 100_000, &pol()).unwrap();
        let (l, _) = sym2_without_two(c(1.0 + 2.0 * alpha, 0.0), &f, &pol()).unwrap();
        assert!((l * p.value - 0.5).norm() < 1e-6, "alpha = {alpha}: {}", l * p.value);
    }
}

#[test]
fn a1_collapse_and_residue() {
    let f = delta();
    let t = ShiftTriple::real(2.0, 1.3, 1.3);
    let z2 = zeta_without_two(c(2.0, 0.0), 1e-15).unwrap();
    assert!((a1_closed(&t, &f, 100_000, &pol()).unwrap().value - z2).norm() < 1e-8);
    let t = ShiftTriple::real(1.0, 1.6, 1.7);
    let res = a1_residue(t.w, t.z, &f, 100_000, &pol()).unwrap();
    let (l, _) = sym2_without_two(c(3.2, 0.0), &f, &pol()).unwrap();
    let p = p_product_accelerated(&t, &f, 100_000, &pol()).unwrap();
    assert!((res.value - l * p.value).norm() < 1e-14);
    match a1_closed(&t, &f, 100_000, &pol()) {
        Err(twistratios::Error::Pole { at, .. }) => assert!(at.contains("residue")),
        other => panic!("expected a pole, got {other:?}"),
    }
}

#[test]
fn a1_closed_against_brute() {
    let f = delta();
    let t = ShiftTriple::real(2.0, 1.6, 1.7);
    let a = a1_closed(&t, &f, 100_000, &pol()).unwrap();
    let b = a1_brute(&t, &f, 10_000).unwrap();
    assert!((a.value - b.value).norm() < 1e-4);
    let mut worst: f64 = 0.0;
    for s in [1.8, 2.0, 2.4] {
        for w in [1.6, 1.8, 2.0] {
            for z in [1.6, 1.8, 2.0] {
                let t = ShiftTriple::real(s, w, z);
                let d = (a1_closed(&t, &f, 100_000, &pol()).unwrap().value - a1_brute(&t, &f, 10_000).unwrap().value)
                    .norm();
                worst = worst.max(d);
            }
            let t = ShiftTriple::real(s, w, w);
            let z2 = zeta_without_two(c(s, 0.0), 1e-15).unwrap();
            assert!((a1_closed(&t, &f, 100_000, &pol()).unwrap().value - z2).norm() < 1e-8);
        }
    }
    assert!(worst < 1e-3, "worst {worst:e}");
}

#[test]
fn a1_brute_small_cutoffs() {
    let f = delta();
    let t = ShiftTriple::new(c(2.0, 0.5), c(1.6, 0.0), c(1.7, -0.3));
    let z2 = zeta_without_two(t.s, 1e-15).unwrap();
    assert!((a1_brute(&t, &f, 1).unwrap().value - z2).norm() < 1e-14);
    // M = 9 adds (m, k) in {(9, 1), (3, 3), (1, 9)}
    let a9 = 1.0 - pw(3.0, t.s);
    let inner = f.lambda_at(9).unwrap() * pw(9.0, t.w)
        + f.lambda_at(3).unwrap() * f.c_at(3).unwrap() * pw(3.0, t.w + t.z)
        + f.c_at(9).unwrap() * pw(9.0, t.z);
    let expect = z2 * (1.0 + a9 * inner);
    assert!((a1_brute(&t, &f, 9).unwrap().value - expect).norm() < 1e-14);
    assert!(a1_brute(&ShiftTriple::real(2.0, 1.05, 1.6), &f, 100).is_err());
}

#[test]
fn a_direct_examples() {
    let f = delta();
    // N = 1: one ratio of 2-deprived L-values
    let t = ShiftTriple::real(2.5, 1.5, 1.6);
    let one = a_direct(&t, &f, 1, &pol()).unwrap().value;
    let ratio = l2_twist(t.w, &f, 1, &pol()).unwrap().value / l2_twist(t.z, &f, 1, &pol()).unwrap().value;
    assert!((one - ratio).norm() < 1e-12);
    // doubling N stays inside the reported tail
    for t in [ShiftTriple::real(2.5, 1.5, 1.5), ShiftTriple::real(2.5, 1.5, 1.6)] {
        let a = a_direct(&t, &f, 1000, &pol()).unwrap();
        let b = a_direct(&t, &f, 2000, &pol()).unwrap();
        assert!((a.value - b.value).norm() < a.total_uncertainty(), "{t:?}");
    }
    assert!(a_direct(&ShiftTriple::real(1.0, 1.5, 1.5), &f, 10, &pol()).is_err());
}

#[test]
fn a_equals_a1_plus_a2() {
    let f = delta();
    // with w = z the ratio is 1, A2 vanishes and A1 is zeta^{(2)}(s)
    let t = ShiftTriple::real(2.5, 1.8, 1.8);
    let a = a_direct(&t, &f, 4000, &pol()).unwrap();
    let a1 = a1_brute(&t, &f, 1_000_000).unwrap();
    let a2 = a2_direct(&t, &f, 4000, &pol()).unwrap();
    assert_eq!(a2.value, c(0.0, 0.0));
    assert!((a.value - a1.value).norm() < a.total_uncertainty() + a1.total_uncertainty() + 1e-12);
    let t = ShiftTriple::real(2.5, 1.8, 2.0);
    let a = a_direct(&t, &f, 4000, &pol()).unwrap();
    let a1 = a1_brute(&t, &f, 1_000_000).unwrap();
    let a2 = a2_direct(&t, &f, 4000, &pol()).unwrap();
    let budget = a.total_uncertainty() + a1.total_uncertainty() + a2.total_uncertainty();
    assert!((a.value - a1.value - a2.value).norm() < budget, "budget {budget:e}");
}

#[test]
fn a2_direct_examples() {
    let f = delta();
    let t = ShiftTriple::real(2.0, 3.0, 3.5);
    assert_eq!(a2_direct(&t, &f, 1, &pol()).unwrap().value, c(0.0, 0.0));
    let a = a2_direct(&t, &f, 400, &pol()).unwrap().value;
    let b = a2_direct(&t, &f, 800, &pol()).unwrap().value;
    assert!((a - b).norm() < 1e-4);
    assert!(a2_direct(&ShiftTriple::real(-1.0, 1.5, 3.0), &f, 100, &pol()).is_err());
}

#[test]
fn dirichlet_4l_matches_series() {
    let s = c(2.0, 0.5);
    for l in [1u64, 3, 5, 7, 9, 15, 45, 99] {
        let (v, _) = dirichlet_4l(s, l, &pol()).unwrap();
        let m = 400_000u64;
        let mut direct = direct_series(|_| 1.0, 4 * l as i64, s, m, false);
        let root = (l as f64).sqrt().round() as u64;
        if root * root == l {
            // principal up to finitely many Euler factors: add the integral tail
            let coprime = twistratios::arith::euler_phi(4 * l).unwrap() as f64 / (4 * l) as f64;
            direct += coprime * c(m as f64 + 0.5, 0.0).powc(1.0 - s) / (s - 1.0);
        }
        assert!(rel_err(v, direct) < 1e-8, "l = {l}: {} vs {direct}", v);
    }
}

// pi^{s - 1/2} 4^{-s} Gamma((1 - s)/2) / Gamma(s/2) C(1 - s, s + w, s + z)
fn a2_from_c(s: f64, w: f64, z: f64, m: u64) -> (Complex64, Complex64) {
    let f = delta();
    let a2 = a2_direct(&ShiftTriple::real(s, w, z), &f, m, &pol()).unwrap().value;
    let cc = c_direct(&ShiftTriple::real(1.0 - s, s + w, s + z), &f, m, m).unwrap().value;
    let g = gamma(c((1.0 - s) / 2.0, 0.0)).unwrap() / gamma(c(s / 2.0, 0.0)).unwrap();
    (a2, PI.powf(s - 0.5) * 4f64.powf(-s) * g * cc)
}

#[test]
fn a2_functional_equation() {
    // degenerate: both sides vanish identically
    let (a, b) = a2_from_c(-1.0, 3.0, 3.0, 500);
    assert_eq!(a, c(0.0, 0.0));
    assert!(b.norm() < 1e-15);
    for (w, z) in [(3.0, 3.5), (3.5, 3.0)] {
        let (a, b) = a2_from_c(-1.0, w, z, 2000);
        assert!((a - b).norm() < 0.05 * b.norm(), "w={w} z={z}: {a} vs {b}");
    }
}

#[test]
fn c_series_examples() {
    let f = delta();
    let t = ShiftTriple::real(2.5, 2.5, 3.0);
    let a = c_direct(&t, &f, 400, 400).unwrap().value;
    let b = c_direct(&t, &f, 800, 800).unwrap().value;
    assert!((a - b).norm() < 1e-3);
    let d = c_decomposed(&t, &f, 400, 400).unwrap();
    assert!((a - d).norm() < 1e-8);
    let t = ShiftTriple::new(c(2.2, 1.0), c(2.5, -0.5), c(2.1, 0.3));
    assert!((c_direct(&t, &f, 300, 300).unwrap().value - c_decomposed(&t, &f, 300, 300).unwrap()).norm() < 1e-8);
    assert!(c_direct(&ShiftTriple::real(1.5, 2.5, 2.5), &f, 10, 10).is_err());
}

#[test]
fn tau_4l_vanishes_for_odd_q_when_l_is_1_mod_4() {
    for l in [1u64, 5, 9, 13, 21, 45] {
        let fac = twistratios::arith::factorize(l).unwrap();
        for q in [1i64, 3, 5, 7, 99] {
            assert_eq!(tau_4l_factored(&fac, q), c(0.0, 0.0));
        }
    }
}

#[test]
fn d1_local_examples() {
    let f = delta();
    let psi1 = Character::auxiliary(1).unwrap();
    let (w, t) = (c(1.4, 0.0), c(0.3, 0.0));
    // generic branch
    let brute = d1_local_lsum(&f, 5, 1, psi1, w, t).unwrap();
    let lp = f.lambda_at(5).unwrap();
    let expect = 1.0 + psi1.eval(5) as f64 * lp * (1.0 - pw(5.0, t)) * pw(5.0, w - 0.5);
    assert!((brute - expect).norm() < 1e-12);
    assert!((d1_local_closed(&f, 5, 1, psi1, w, t).unwrap() - expect).norm() < 1e-12);
    // ramified branch, G(chi_9, 3) = -3
    let brute = d1_local_lsum(&f, 3, 3, psi1, w, t).unwrap();
    let l3 = f.lambda_at(3).unwrap();
    let expect = 1.0
        - psi1.eval(9) as f64
            * pw(3.0, 2.0 * w - 1.0)
            * (f.lambda_at(9).unwrap() - l3 * l3 * pw(3.0, t) + pw(3.0, 2.0 * t));
    assert!((brute - expect).norm() < 1e-12);
    let psi2 = Character::auxiliary(2).unwrap();
    assert!(
        (d1_local_closed(&f, 3, 1, psi2, w, t).unwrap() - d1_local_lsum(&f, 3, 1, psi2, w, t).unwrap()).norm() < 1e-12
    );
}

#[test]
fn d1_local_identity_grid() {
    let f = delta();
    for p in [3u64, 5, 7, 11] {
        for q1 in [1, p, 15] {
            for psi in [Character::auxiliary(1).unwrap(), Character::auxiliary(-1).unwrap()] {
                for (w, t) in [(1.4, 0.3), (2.0, -0.2)] {
                    let (w, t) = (c(w, 0.0), c(t, 0.0));
                    let a = d1_local_lsum(&f, p, q1, psi, w, t).unwrap();
                    let b = d1_local_closed(&f, p, q1, psi, w, t).unwrap();
                    assert!((a - b).norm() < 1e-12, "p={p} q1={q1} {psi:?}");
                }
            }
        }
    }
}

#[test]
fn d1_full_local_examples() {
    let f = delta();
    let psi1 = Character::auxiliary(1).unwrap();
    let triv = Character::Trivial;
    let (s, w, t) = (c(1.5, 0.0), c(1.4, 0.0), c(0.3, 0.0));
    let two = d1_full_local(&f, 2, 1, psi1, triv, s, w, t, 60).unwrap();
    assert!((two.value - 1.0 / (1.0 - pw(4.0, s))).norm() < 1e-14);
    for q1 in [1u64, 3, 15] {
        let k0 = d1_full_local(&f, 3, q1, psi1, triv, s, w, t, 0).unwrap().value;
        assert!((k0 - d1_local_lsum(&f, 3, q1, psi1, w, t).unwrap()).norm() < 1e-13);
    }
    let a = d1_full_local(&f, 3, 1, psi1, triv, s, w, t, 30).unwrap();
    let b = d1_full_local(&f, 3, 1, psi1, triv, s, w, t, 60).unwrap();
    assert!((a.value - b.value).norm() < 1e-10);
    assert!((a.value - b.value).norm() <= a.tail_estimate + 1e-15);
    assert!(d1_full_local(&f, 3, 1, psi1, triv, c(0.4, 0.0), w, t, 10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn p_tail_shrinks_with_cutoff(w in 0.7f64..1.2, z in 0.7f64..1.2) {
        let f = delta();
        let t = ShiftTriple::real(1.0, w, z);
        let a = p_product(&t, &f, 5_000).unwrap();
        let b = p_product(&t, &f, 50_000).unwrap();
        prop_assert!(b.tail_estimate < a.tail_estimate);
        prop_assert!((a.value - b.value).norm() < a.tail_estimate);
    }

    #[test]
    fn a1_collapse_anywhere(s in 1.3f64..3.0, w in 0.8f64..2.0) {
        let f = delta();
        let t = ShiftTriple::real(s, w, w);
        let z2 = zeta_without_two(c(s, 0.0), 1e-15).unwrap();
        let a = a1_closed(&t, &f, 100_000, &pol()).unwrap();
        prop_assert!((a.value - z2).norm() < 1e-7 + a.total_uncertainty());
    }

    #[test]
    fn local_factor_conjugation(lp in -2.0f64..2.0, si in -3.0f64..3.0, wi in -3.0f64..3.0) {
        let t = ShiftTriple::new(c(1.0, si), c(0.8, wi), c(0.9, -wi));
        let tc = ShiftTriple::new(t.s.conj(), t.w.conj(), t.z.conj());
        prop_assert!((p_local_factor(lp, 7, &t).conj() - p_local_factor(lp, 7, &tc)).norm() < 1e-14);
    }
}
