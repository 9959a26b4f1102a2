//! Exact Chebyshev polynomial arithmetic, zeros and the polynomial identities
//! the fast algorithms rest on.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::ToPrimitive;
use proptest::prelude::*;

use dttkit::chebyshev::{
    cheb, cheb_zeros, check_identity, cos_pi, identity_tags, skew_factorization_error, skew_zeros,
    ChebError, ChebKind, ExactPoly, IdentityParams,
};

const KINDS: [ChebKind; 4] = [ChebKind::T, ChebKind::U, ChebKind::V, ChebKind::W];

fn q(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

fn big(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

#[test]
fn cheb_examples() {
    assert_eq!(cheb(ChebKind::T, 3), ExactPoly::from_ints(&[0, -3, 0, 4]));
    assert!(cheb(ChebKind::U, -1).is_zero());
    assert_eq!(cheb(ChebKind::V, 1), ExactPoly::from_ints(&[-1, 2]));
    assert_eq!(cheb(ChebKind::W, 1), ExactPoly::from_ints(&[1, 2]));
    assert_eq!(cheb(ChebKind::T, 0), ExactPoly::from_ints(&[1]));
}

#[test]
fn three_term_recurrence_all_kinds() {
    let two_x = ExactPoly::from_ints(&[0, 2]);
    for kind in KINDS {
        for n in -10i64..=64 {
            let lhs = cheb(kind, n + 1);
            let rhs = &(&two_x * &cheb(kind, n)) - &cheb(kind, n - 1);
            assert_eq!(lhs, rhs, "{kind} at n = {n}");
        }
    }
}

#[test]
fn zeros_examples() {
    let close = |a: &[f64], b: &[f64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    };
    let pi = std::f64::consts::PI;
    assert!(close(
        &cheb_zeros(ChebKind::T, 2).unwrap(),
        &[(pi / 4.0).cos(), (3.0 * pi / 4.0).cos()]
    ));
    assert!(close(&cheb_zeros(ChebKind::U, 1).unwrap(), &[0.0]));
    assert!(close(&cheb_zeros(ChebKind::W, 1).unwrap(), &[-0.5]));
    assert!(cheb_zeros(ChebKind::T, 0).is_err());
}

#[test]
fn zeros_are_roots() {
    for kind in KINDS {
        for n in 1..=64usize {
            let p = cheb(kind, n as i64);
            let zeros = cheb_zeros(kind, n).unwrap();
            assert_eq!(zeros.len(), n);
            for w in zeros.windows(2) {
                assert!(w[0] > w[1], "{kind}_{n} zeros not descending in x");
            }
            for z in zeros {
                // Rational zeros evaluate to exactly zero.
                for r in [0.0, 0.5, -0.5, 1.0, -1.0] {
                    if (z - r).abs() < 1e-14 {
                        assert!(
                            p.eval(&big((2.0 * r) as i64, 2))
                                == BigRational::from_integer(0.into())
                        );
                    }
                }
                let scale = 2f64.powi(n as i32);
                assert!(p.eval_f64(z).abs() <= 1e-10 * scale, "{kind}_{n}({z})");
            }
        }
    }
}

#[test]
fn skew_zero_examples() {
    assert_eq!(skew_zeros(2, q(1, 2)).unwrap(), vec![q(1, 4), q(3, 4)]);
    assert_eq!(
        skew_zeros(3, q(1, 2)).unwrap(),
        vec![q(1, 6), q(1, 2), q(5, 6)]
    );
    assert_eq!(
        skew_zeros(3, q(1, 3)).unwrap(),
        vec![q(1, 9), q(5, 9), q(7, 9)]
    );
    assert_eq!(
        skew_zeros(3, q(3, 2)),
        Err(ChebError::SkewOutOfRange(q(3, 2)))
    );
}

#[test]
fn skew_zeros_are_ordered_and_reduce_to_plain() {
    for n in 1..=32usize {
        let half = skew_zeros(n, q(1, 2)).unwrap();
        let want: Vec<Rational64> = (0..n).map(|l| q(2 * l as i64 + 1, 2 * n as i64)).collect();
        assert_eq!(half, want);
        for r in [q(1, 3), q(2, 3), q(1, 5), q(7, 19)] {
            let z = skew_zeros(n, r).unwrap();
            assert!(z.windows(2).all(|w| w[0] < w[1]), "n = {n}, r = {r}");
            assert!(z.iter().all(|v| *v >= q(0, 1) && *v <= q(1, 1)));
            // Each cos(r_l π) is a root of T_n − cos(rπ).
            for v in z {
                let err = ChebKind::T.eval(n, cos_pi(v)) - cos_pi(r);
                assert!(err.abs() < 1e-9, "n = {n}, r = {r}: residual {err}");
            }
        }
    }
}

#[test]
fn poly_arith_examples() {
    let t2 = cheb(ChebKind::T, 2);
    assert_eq!(t2.compose(&t2), cheb(ChebKind::T, 4));
    assert_eq!(
        &cheb(ChebKind::V, 1) * &cheb(ChebKind::W, 1),
        cheb(ChebKind::U, 2)
    );
    assert_eq!(cheb(ChebKind::T, 3).eval(&big(1, 2)), big(-1, 1));
    let p = ExactPoly::from_ints(&[1, 2, 3]);
    assert!((&p - &p).is_zero());
    assert_eq!((&p + &p), p.scale(&big(2, 1)));
    assert_eq!(p.degree(), Some(2));
    assert_eq!(ExactPoly::zero().degree(), None);
}

#[test]
fn large_degree_is_exact() {
    // Leading coefficient of T_64 is 2^63, beyond what f64 holds exactly
    // once combined with the lower coefficients.
    let t64 = cheb(ChebKind::T, 64);
    assert_eq!(
        t64.coeffs()[64],
        BigRational::from_integer(BigInt::from(1u64 << 63))
    );
    assert_eq!(t64.eval(&big(1, 1)), big(1, 1));
    assert_eq!(t64.eval(&big(-1, 1)), big(1, 1));
}

#[test]
fn identity_examples() {
    assert!(check_identity("factor.U2n-1", IdentityParams::n(4)).unwrap());
    assert!(check_identity("compose.T-half", IdentityParams::km(1, 2)).unwrap());
    assert!(check_identity("product.U", IdentityParams::kn(2, 5)).unwrap());
    assert!(check_identity("factor.T3", IdentityParams::default()).unwrap());
    assert!(matches!(
        check_identity("no-such-identity", IdentityParams::n(2)),
        Err(ChebError::UnknownTag(_))
    ));
    assert!(matches!(
        check_identity("factor.U2n", IdentityParams::default()),
        Err(ChebError::MissingParams { .. })
    ));
}

#[test]
fn every_identity_holds_for_small_sizes() {
    for tag in identity_tags() {
        for a in 1..=16i64 {
            for b in 1..=16i64 {
                let p = if tag.starts_with("compose.") {
                    IdentityParams::km(a, b)
                } else if tag.starts_with("product.") {
                    if a > b {
                        continue;
                    }
                    IdentityParams::kn(a, b)
                } else if b == 1 {
                    IdentityParams::n(a + 1)
                } else {
                    continue;
                };
                if matches!(tag.as_str(), "compose.V" | "compose.W") && a % 2 == 0 {
                    continue;
                }
                if tag.ends_with("-half") && b % 2 != 0 {
                    continue;
                }
                assert!(check_identity(&tag, p).unwrap(), "{tag} at {p:?}");
            }
        }
    }
}

#[test]
fn wrong_identities_are_rejected() {
    // The V/W decompositions need odd k; with even k they do not hold.
    assert!(!check_identity("compose.V", IdentityParams::km(2, 3)).unwrap());
}

#[test]
fn skew_factorization_matches_product_form() {
    for n in 1..=16 {
        for r in [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0] {
            let err = skew_factorization_error(n, r);
            assert!(err <= 1e-9, "n = {n}, r = {r}: {err}");
        }
    }
}

proptest! {
    #[test]
    fn composition_of_t(k in 1i64..=8, m in 1i64..=8) {
        prop_assert_eq!(cheb(ChebKind::T, k * m), cheb(ChebKind::T, k).compose(&cheb(ChebKind::T, m)));
    }

    #[test]
    fn eval_agrees_with_float(n in 0i64..=20, num in -8i64..=8) {
        for kind in KINDS {
            let p = cheb(kind, n);
            let x = big(num, 8);
            let exact = p.eval(&x);
            let approx = p.eval_f64(num as f64 / 8.0);
            let e = exact.to_f64().unwrap();
            prop_assert!((e - approx).abs() <= 1e-9 * (1.0 + e.abs()));
        }
    }
}
