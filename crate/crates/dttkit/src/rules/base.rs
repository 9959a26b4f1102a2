//! Hand-written base cases for small sizes.

use num_rational::Rational64;

use super::sparse::{diagonal_formula, Sparse};
use crate::chebyshev::{cos_pi, sin_pi};
use crate::formula::Formula;
use crate::reference::{real_matrix, Family, TransformId};

fn q(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

fn dense(rows: usize, data: &[f64]) -> Formula<f64> {
    Sparse::from_rows(rows, data.len() / rows, data).to_formula()
}

fn compose(f: Vec<Formula<f64>>) -> Formula<f64> {
    Formula::Compose(f)
}

fn diag(d: &[f64]) -> Formula<f64> {
    diagonal_formula(d.to_vec())
}

/// Base case for `t`, if one is registered.
pub fn base_case(t: &TransformId) -> Option<Formula<f64>> {
    if t.validate().is_err() || !t.is_dtt() || t.transposed {
        return None;
    }
    if t.n == 1 {
        return size_one(t);
    }
    if t.is_t_group() {
        return match t.n {
            2 => t_group_2(t),
            3 => t_group_3(t),
            5 => dct3_5(t),
            _ => None,
        };
    }
    if t.n == 2 && !t.inverse {
        return w_group_2(t);
    }
    None
}

fn size_one(t: &TransformId) -> Option<Formula<f64>> {
    let v = real_matrix(t).ok()?[(0, 0)];
    Some(diag(&[v]))
}

/// Size-2 T-group transforms, normal and skew, including the inverses.
fn t_group_2(t: &TransformId) -> Option<Formula<f64>> {
    let r = t.skew();
    let c = cos_pi(r / 2);
    let f2 = Formula::Butterfly;
    let upper = |sign: f64| dense(2, &[1.0, sign, 0.0, 2.0 * c]);
    Some(match (t.short().as_str(), t.poly, t.inverse) {
        ("C3", _, false) => compose(vec![f2, diag(&[1.0, c])]),
        ("S3", true, false) => compose(vec![f2, diag(&[1.0, 2.0 * c])]),
        ("S3", false, false) => compose(vec![f2, diag(&[sin_pi(r / 2), sin_pi(r)])]),
        ("C4", true, false) => compose(vec![f2, upper(-1.0)]),
        ("S4", true, false) => compose(vec![f2, upper(1.0)]),
        ("C4", false, false) => {
            compose(vec![diag(&[cos_pi(r / 4), sin_pi(r / 4)]), f2, upper(-1.0)])
        }
        ("S4", false, false) => {
            compose(vec![diag(&[sin_pi(r / 4), cos_pi(r / 4)]), f2, upper(1.0)])
        }
        ("C3", _, true) => compose(vec![diag(&[1.0, 1.0 / (2.0 * c)]), f2]),
        ("S3", _, true) => compose(vec![
            diag(&[1.0 / (2.0 * sin_pi(r / 2)), 1.0 / sin_pi(r)]),
            f2,
        ]),
        ("C4", _, true) => compose(vec![
            dense(2, &[1.0, 1.0, 0.0, 1.0]),
            diag(&[1.0, 1.0 / (2.0 * c)]),
            f2,
            diag(&[0.5 / cos_pi(r / 4), 0.5 / sin_pi(r / 4)]),
        ]),
        ("S4", _, true) => compose(vec![
            dense(2, &[1.0, -1.0, 0.0, 1.0]),
            diag(&[1.0, 1.0 / (2.0 * c)]),
            f2,
            diag(&[0.5 / sin_pi(r / 4), 0.5 / cos_pi(r / 4)]),
        ]),
        _ => return None,
    })
}

/// Size-3 T-group transforms.
fn t_group_3(t: &TransformId) -> Option<Formula<f64>> {
    if t.inverse {
        return None;
    }
    let s3 = 3f64.sqrt();
    let crossed = || dense(3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0]);
    if t.is_skew() {
        let r = t.skew();
        let one = Rational64::from_integer(1);
        let block = |scale: f64| {
            let m = [
                cos_pi((one + r) / 3),
                cos_pi((one - r * 2) / 3),
                cos_pi((one - r) / 3),
                cos_pi((one + r * 2) / 3),
            ];
            Formula::DirectSum(vec![Formula::Identity(1), dense(2, &m.map(|v| scale * v))])
        };
        let sum = || dense(3, &[1.0, 1.0, 1.0, 1.0, -1.0, 0.0, 1.0, 0.0, -1.0]);
        let shift = || dense(3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        return match (t.short().as_str(), t.poly) {
            ("C3", _) => Some(compose(vec![sum(), block(1.0)])),
            ("S3", true) => Some(compose(vec![sum(), block(2.0), shift()])),
            ("S3", false) => {
                let z = [r / 3, (one * 2 - r) / 3, (one * 2 + r) / 3];
                Some(compose(vec![
                    diag(&z.map(sin_pi)),
                    sum(),
                    block(2.0),
                    shift(),
                ]))
            }
            _ => None,
        };
    }
    Some(match (t.short().as_str(), t.poly) {
        ("C3", _) => compose(vec![
            crossed(),
            dense(3, &[1.0, 0.0, 0.5, 1.0, 0.0, -1.0, 0.0, s3 / 2.0, 0.0]),
        ]),
        ("S3", true) => compose(vec![
            dense(3, &[0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, -1.0]),
            dense(3, &[1.0, 0.0, -1.0, 1.0, 0.0, 2.0, 0.0, s3, 0.0]),
        ]),
        ("S3", false) => compose(vec![
            crossed(),
            dense(3, &[0.5, 0.0, 1.0, 1.0, 0.0, -1.0, 0.0, s3 / 2.0, 0.0]),
        ]),
        ("C4", true) => compose(vec![
            dense(3, &[0.0, 1.0, s3 - 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, -s3 - 1.0]),
            dense(3, &[1.0, -1.0, -1.0, 1.0, 0.0, 1.0, 0.0, 1.0, -1.0]),
        ]),
        ("S4", true) => compose(vec![
            dense(3, &[0.0, 1.0, s3 + 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, -s3 + 1.0]),
            dense(3, &[1.0, 1.0, -1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0]),
        ]),
        ("C4", false) => compose(vec![
            dense(3, &[1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]),
            dense(3, &[1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, -2.0, -1.0]),
            diag(&[(0.375f64).sqrt(), (0.125f64).sqrt(), (0.5f64).sqrt()]),
            dense(3, &[1.0, 0.0, 1.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
        ]),
        ("S4", false) => compose(vec![
            dense(3, &[1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]),
            dense(3, &[1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 2.0, 1.0]),
            diag(&[(0.375f64).sqrt(), (0.125f64).sqrt(), (0.5f64).sqrt()]),
            dense(3, &[1.0, 0.0, 1.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
        ]),
        _ => return None,
    })
}

/// The size-5 DCT-3 kernel with cost (12, 6, 1).
fn dct3_5(t: &TransformId) -> Option<Formula<f64>> {
    if t.family != Family::Dct || t.ty != 3 || t.is_skew() || t.inverse {
        return None;
    }
    // Skew zeros of the two quadratic factors, and the reduction constants.
    let (c1, c3) = (cos_pi(q(1, 10)), cos_pi(q(3, 10)));
    let (m1, m2) = (cos_pi(q(2, 5)), cos_pi(q(4, 5)));
    let p = dense(
        5,
        &[
            0., 1., 0., 0., 0., //
            0., 0., 0., 1., 0., //
            1., 0., 0., 0., 0., //
            0., 0., 0., 0., 1., //
            0., 0., 1., 0., 0.,
        ],
    );
    let skews = Formula::DirectSum(vec![
        Formula::Identity(1),
        compose(vec![Formula::Butterfly, diag(&[1.0, c1])]),
        compose(vec![Formula::Butterfly, diag(&[1.0, c3])]),
    ]);
    let middle = Formula::DirectSum(vec![
        Formula::Identity(1),
        dense(
            4,
            &[
                1.,
                0.,
                m1,
                0., //
                0.,
                1.,
                0.,
                2. * m1, //
                1.,
                0.,
                m2,
                0., //
                0.,
                1.,
                0.,
                2. * m2,
            ],
        ),
    ]);
    let b = dense(
        5,
        &[
            1., 0., -1., 0., 1., //
            1., 0., 0.5, 0., 0., //
            0., 1., 0., 0., 0., //
            0., 0., 1., 0., 1., //
            0., 0., 0., 1., 0.,
        ],
    );
    Some(compose(vec![p, skews, middle, b]))
}

/// W-group base cases of size 2.
fn w_group_2(t: &TransformId) -> Option<Formula<f64>> {
    match (t.short().as_str(), t.poly) {
        ("C5", _) => Some(dense(2, &[1.0, 1.0, 1.0, -0.5])),
        ("C6", false) => Some(dense(2, &[1.0, 1.0, 0.5, -1.0])),
        ("C6", true) => Some(dense(2, &[1.0, 1.0, 1.0, -2.0])),
        _ => None,
    }
}
