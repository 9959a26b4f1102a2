//! Reference matrices of the trigonometric transforms and DFTs: the
//! oracle every algorithm is checked against.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

use dttkit::chebyshev::cos_pi;
use dttkit::reference::{
    complex_matrix, dft_matrix, dtt_matrix, dual, inverse_skew_dtt, matrix_to_csv, parse_rational,
    poly_dtt_matrix, real_matrix, rel_error, scaling_diag, skew_dtt_matrix, Family, GroupTag,
    TransformId,
};

fn q(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

fn rows(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    a.shape() == b.shape() && (a - b).amax() <= tol
}

fn base(family: Family, ty: u8, n: usize) -> TransformId {
    match family {
        Family::Dct => TransformId::dct(ty, n),
        _ => TransformId::dst(ty, n),
    }
}

fn all_dtts(n: usize) -> impl Iterator<Item = TransformId> {
    [Family::Dct, Family::Dst]
        .into_iter()
        .flat_map(move |f| (1..=8).map(move |ty| base(f, ty, n)))
        .filter(|t| t.validate().is_ok())
}

const T_GROUP: [(Family, u8); 4] = [
    (Family::Dct, 3),
    (Family::Dst, 3),
    (Family::Dct, 4),
    (Family::Dst, 4),
];

#[test]
fn dtt_examples() {
    assert_eq!(
        rows(&dtt_matrix(&TransformId::dct(1, 2)).unwrap()),
        vec![1.0, 1.0, 1.0, -1.0]
    );
    let c = cos_pi(q(1, 4));
    let m = dtt_matrix(&TransformId::dct(2, 2)).unwrap();
    assert!(close(
        &m,
        &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, c, -c]),
        1e-15
    ));
    assert_eq!(
        rows(&dtt_matrix(&TransformId::dst(1, 1)).unwrap()),
        vec![1.0]
    );
}

#[test]
fn scaling_examples() {
    for n in 1..=8 {
        assert!(scaling_diag(&TransformId::dct(3, n))
            .unwrap()
            .iter()
            .all(|&v| v == 1.0));
    }
    let poly = poly_dtt_matrix(&TransformId::dct(2, 2)).unwrap();
    assert!(close(
        &poly,
        &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]),
        1e-15
    ));
    let s = scaling_diag(&TransformId::dst(3, 2)).unwrap();
    assert!((s[0] - cos_pi(q(1, 4))).abs() < 1e-15 && (s[1] - cos_pi(q(1, 4))).abs() < 1e-15);
}

#[test]
fn poly_examples() {
    for n in 1..=12 {
        let t = TransformId::dct(3, n);
        assert!(close(
            &poly_dtt_matrix(&t).unwrap(),
            &dtt_matrix(&t).unwrap(),
            1e-14
        ));
    }
    // DCT-2_3 = diag(1, √3/2, 1/2) · poly DCT-2_3.
    let t = TransformId::dct(2, 3);
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.75f64.sqrt(), 0.5]));
    assert!(close(
        &(d * poly_dtt_matrix(&t).unwrap()),
        &dtt_matrix(&t).unwrap(),
        1e-14
    ));
    // Poly DST-3_2 evaluates U_0, U_1 at the zeros of T_2.
    let a = cos_pi(q(1, 4));
    let want = DMatrix::from_row_slice(2, 2, &[1.0, 2.0 * a, 1.0, -2.0 * a]);
    assert!(close(
        &poly_dtt_matrix(&TransformId::dst(3, 2)).unwrap(),
        &want,
        1e-15
    ));
}

#[test]
fn scaling_times_poly_is_the_transform() {
    for n in 1..=16 {
        for t in all_dtts(n) {
            let d = DMatrix::from_diagonal(&DVector::from_vec(scaling_diag(&t).unwrap()));
            let lhs = d * poly_dtt_matrix(&t).unwrap();
            assert!(close(&lhs, &dtt_matrix(&t).unwrap(), 1e-12), "{t}");
        }
    }
}

#[test]
fn symmetry_and_transposition() {
    for n in 1..=16 {
        for t in all_dtts(n) {
            let m = dtt_matrix(&t).unwrap();
            if matches!(t.ty, 1 | 4 | 5 | 8) {
                assert!(close(&m, &m.transpose(), 1e-12), "{t} symmetric");
            }
            let partner = match t.ty {
                2 => Some(3),
                3 => Some(2),
                6 => Some(7),
                7 => Some(6),
                _ => None,
            };
            if let Some(ty) = partner {
                let p = dtt_matrix(&base(t.family, ty, n)).unwrap();
                assert!(close(&m, &p.transpose(), 1e-12), "{t} vs type {ty}");
            }
            assert!(close(
                &real_matrix(&t.transposed()).unwrap(),
                &m.transpose(),
                0.0
            ));
        }
    }
}

#[test]
fn duality_pairs() {
    for n in 1..=16 {
        for t in all_dtts(n) {
            let partner = dual(&t).unwrap_or_else(|| {
                assert_eq!(t.group(), Some(GroupTag::U), "{t} lacks a dual");
                t.clone()
            });
            let m = dtt_matrix(&t).unwrap();
            let flipped = DMatrix::from_fn(
                n,
                n,
                |k, l| if k % 2 == 0 { 1.0 } else { -1.0 } * m[(k, n - 1 - l)],
            );
            assert!(
                close(&flipped, &dtt_matrix(&partner).unwrap(), 1e-12),
                "{t} -> {partner}"
            );
        }
    }
}

#[test]
fn skew_examples() {
    for r in [q(1, 3), q(1, 2), q(2, 3)] {
        let m = skew_dtt_matrix(Family::Dct, 3, 2, r, false).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0])
            * DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, cos_pi(r / 2)]));
        assert!(close(&m, &want, 1e-15), "r = {r}");
    }
    assert_eq!(
        skew_dtt_matrix(Family::Dst, 3, 2, q(1, 2), false).unwrap(),
        dtt_matrix(&TransformId::dst(3, 2)).unwrap()
    );
    // DCT-4_3(1/3): entries cos((ℓ + 1/2) r_k π) over the skew zeros.
    let z = dttkit::chebyshev::skew_zeros(3, q(1, 3)).unwrap();
    let want = DMatrix::from_fn(3, 3, |k, l| {
        cos_pi(z[k] * Rational64::new(2 * l as i64 + 1, 2))
    });
    let m = skew_dtt_matrix(Family::Dct, 4, 3, q(1, 3), false).unwrap();
    assert!(close(&m, &want, 1e-15));
    assert!(skew_dtt_matrix(Family::Dct, 2, 3, q(1, 3), false).is_err());
}

#[test]
fn skew_at_one_half_is_plain() {
    for n in 1..=16 {
        for (f, ty) in T_GROUP {
            for poly in [false, true] {
                let skew = skew_dtt_matrix(f, ty, n, q(1, 2), poly).unwrap();
                let plain = real_matrix(&base(f, ty, n).with_poly(poly)).unwrap();
                assert!(close(&skew, &plain, 1e-12));
            }
        }
    }
}

#[test]
fn inverse_examples() {
    for r in [q(1, 3), q(1, 2), q(2, 3)] {
        let inv = inverse_skew_dtt(Family::Dct, 3, 2, r).unwrap();
        let want =
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0 / (2.0 * cos_pi(r / 2))]))
                * DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        assert!(close(&inv, &want, 1e-14), "r = {r}");
    }
    for n in 1..=16 {
        let t = TransformId::dct(3, n);
        let prod = real_matrix(&t.clone().inv()).unwrap() * dtt_matrix(&t).unwrap();
        let norm = DMatrix::from_diagonal(&DVector::from_vec(
            dttkit::reference::inverse_normalizer(&t).unwrap(),
        ));
        assert!(close(&prod, &norm, 1e-10), "n = {n}");
    }
    let s = TransformId::dst(3, 2);
    let numeric = dtt_matrix(&s).unwrap().try_inverse().unwrap();
    let norm = DMatrix::from_diagonal(&DVector::from_vec(
        dttkit::reference::inverse_normalizer(&s).unwrap(),
    ));
    assert!(close(
        &real_matrix(&s.inv()).unwrap(),
        &(norm * numeric),
        1e-12
    ));
}

#[test]
fn skew_inverse_matches_numeric_inverse() {
    for n in 1..=12 {
        for (f, ty) in T_GROUP {
            for r in [q(1, 3), q(2, 3), q(1, 5)] {
                let fwd = skew_dtt_matrix(f, ty, n, r, false).unwrap();
                let inv = inverse_skew_dtt(f, ty, n, r).unwrap();
                // Normalized so that the product is the r-independent diagonal N.
                let prod = &inv * &fwd;
                let off = prod.clone() - DMatrix::from_diagonal(&prod.diagonal());
                assert!(off.amax() < 1e-9, "{f:?}-{ty} n = {n} r = {r}");
            }
        }
    }
}

#[test]
fn dft_examples() {
    let f4 = dft_matrix(&TransformId::dft(1, 4)).unwrap();
    let y = &f4 * DVector::from_element(4, Complex64::new(1.0, 0.0));
    let want = [4.0, 0.0, 0.0, 0.0];
    assert!(y
        .iter()
        .zip(want)
        .all(|(a, b)| (a - Complex64::new(b, 0.0)).norm() < 1e-14));

    let f2 = dft_matrix(&TransformId::dft(1, 2)).unwrap();
    let w4 = Complex64::new(0.0, -1.0);
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.0, 0.0), w4]));
    let dft3 = dft_matrix(&TransformId::dft(3, 2)).unwrap();
    assert!(rel_error(&dft3, &(f2 * d)) < 1e-15);

    for n in 1..=12 {
        let plain = dft_matrix(&TransformId::dft(1, n)).unwrap();
        let a1 = dft_matrix(&TransformId::dfta(q(1, 1), n)).unwrap();
        assert!(rel_error(&a1, &plain) < 1e-14);
    }
    assert!(dft_matrix(&TransformId::dfta(q(0, 1), 4)).is_err());
}

#[test]
fn dft_variants_are_unitary_up_to_scale() {
    for n in 1..=16 {
        for t in (1..=4)
            .map(|ty| TransformId::dft(ty, n))
            .chain([TransformId::dfta(q(-1, 1), n)])
        {
            let m = complex_matrix(&t).unwrap();
            let g = m.adjoint() * &m;
            let want = DMatrix::<Complex64>::identity(n, n) * Complex64::new(n as f64, 0.0);
            assert!(rel_error(&g, &want) < 1e-12, "{t}");
        }
    }
}

#[test]
fn identifiers_validate() {
    assert!(TransformId::dct(3, 4).with_skew(q(1, 3)).validate().is_ok());
    assert!(TransformId::dct(2, 4)
        .with_skew(q(1, 3))
        .validate()
        .is_err());
    assert!(TransformId::dct(3, 4)
        .with_skew(q(3, 2))
        .validate()
        .is_err());
    assert!(TransformId::dct(1, 1).validate().is_err());
    assert!(TransformId::dst(1, 1).validate().is_ok());
    assert!(TransformId::dct(5, 4).inv().validate().is_err());
    assert!(TransformId::dct(9, 4).validate().is_err());
    assert!(TransformId::dct(3, 0).validate().is_err());
    assert!(TransformId::dft(5, 4).validate().is_err());
    assert!(TransformId::dft(1, 4).polynomial().validate().is_err());
    assert_eq!(
        TransformId::dct(3, 4).with_skew(q(1, 2)),
        TransformId::dct(3, 4)
    );
}

#[test]
fn spec_grammar() {
    let p = |s: &str| TransformId::parse_spec(s, 8);
    assert_eq!(p("dct3").unwrap(), TransformId::dct(3, 8));
    assert_eq!(p("idct4").unwrap(), TransformId::dct(4, 8).inv());
    assert_eq!(p("dct4:inv").unwrap(), TransformId::dct(4, 8).inv());
    assert_eq!(
        p("dst2:poly:t").unwrap(),
        TransformId::dst(2, 8).polynomial().transposed()
    );
    assert_eq!(p("dft").unwrap(), TransformId::dft(1, 8));
    assert_eq!(p("dft3").unwrap(), TransformId::dft(3, 8));
    assert_eq!(p("dfta=-1/2").unwrap(), TransformId::dfta(q(-1, 2), 8));
    for bad in ["", "dct", "dctx", "fft", "dct3:fast", "dfta=1/0"] {
        assert!(p(bad).is_err(), "{bad:?}");
    }
    for t in [
        TransformId::dct(7, 8).polynomial(),
        TransformId::dst(4, 8).inv().transposed(),
        TransformId::dfta(q(3, 4), 8),
    ] {
        assert_eq!(TransformId::parse_spec(&t.spec_name(), 8).unwrap(), t);
    }
}

#[test]
fn rationals_parse_exactly() {
    assert_eq!(parse_rational("1/3"), Some(q(1, 3)));
    assert_eq!(parse_rational("-2/4"), Some(q(-1, 2)));
    assert_eq!(parse_rational("0.25"), Some(q(1, 4)));
    assert_eq!(parse_rational("3"), Some(q(3, 1)));
    assert_eq!(parse_rational("1/0"), None);
    assert_eq!(parse_rational("abc"), None);
}

#[test]
fn csv_has_seventeen_significant_digits() {
    let m = dtt_matrix(&TransformId::dct(2, 3)).unwrap();
    let csv = matrix_to_csv(&m);
    let cells: Vec<&str> = csv.lines().flat_map(|l| l.split(',')).collect();
    assert_eq!(cells.len(), 9);
    let back: Vec<f64> = cells.iter().map(|c| c.parse().unwrap()).collect();
    assert_eq!(back, rows(&m));
}

proptest! {
    #[test]
    fn skew_rows_are_basis_at_skew_zeros(n in 1usize..=12, num in 1i64..=9) {
        let r = q(num, 10);
        let z = dttkit::chebyshev::skew_zeros(n, r).unwrap();
        let m = skew_dtt_matrix(Family::Dct, 3, n, r, false).unwrap();
        for k in 0..n {
            for l in 0..n {
                prop_assert!((m[(k, l)] - cos_pi(z[k] * l as i64)).abs() < 1e-12);
            }
        }
    }
}
