//! Structured-matrix formulas: evaluation, densification, transposition,
//! cost counting and the text serialization.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dttkit::formula::{CostTriple, Formula, FormulaError};
use dttkit::reference::TransformId;
use dttkit::rules::base_case;

fn dense_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn approx(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn apply_examples() {
    assert_eq!(
        Formula::<f64>::Butterfly.apply(&[1.0, 1.0]).unwrap(),
        vec![2.0, 0.0]
    );
    let stride = Formula::<f64>::stride(4, 2).unwrap();
    assert_eq!(
        stride.apply(&[0.0, 1.0, 2.0, 3.0]).unwrap(),
        vec![0.0, 2.0, 1.0, 3.0]
    );
    let dct3_col = Formula::compose(vec![
        Formula::Butterfly,
        Formula::diag(vec![1.0, std::f64::consts::FRAC_1_SQRT_2]),
    ])
    .unwrap();
    assert_eq!(dct3_col.apply(&[1.0, 0.0]).unwrap(), vec![1.0, 1.0]);
}

#[test]
fn permutation_reads_input_at_map() {
    let p = Formula::<f64>::perm(vec![2, 0, 1]).unwrap();
    assert_eq!(
        p.apply(&[10.0, 20.0, 30.0]).unwrap(),
        vec![30.0, 10.0, 20.0]
    );
}

#[test]
fn densify_examples() {
    let j = Formula::<f64>::OppIdentity(2).densify().unwrap();
    assert_eq!(dense_rows(&j), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);

    let ds = Formula::<f64>::direct_sum(vec![Formula::Identity(1), Formula::Butterfly])
        .unwrap()
        .densify()
        .unwrap();
    assert_eq!(
        dense_rows(&ds),
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 1.0, -1.0]
        ]
    );

    let k = Formula::<f64>::kron_left(Formula::Butterfly, 2)
        .densify()
        .unwrap();
    assert_eq!(
        dense_rows(&k),
        vec![
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![1.0, 0.0, -1.0, 0.0],
            vec![0.0, 1.0, 0.0, -1.0],
        ]
    );

    let r = Formula::<f64>::kron_right(2, Formula::Butterfly)
        .densify()
        .unwrap();
    assert_eq!(
        dense_rows(&r),
        vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![0.0, 0.0, 1.0, -1.0],
        ]
    );
}

#[test]
fn transpose_examples() {
    let s = Formula::<f64>::stride(6, 2).unwrap();
    let t = s.transpose();
    assert_eq!(
        t.densify().unwrap(),
        Formula::<f64>::stride(6, 3).unwrap().densify().unwrap()
    );

    let d = Formula::<f64>::diag(vec![1.0, 2.0, 3.0]);
    assert_eq!(d.transpose(), d);

    let a = Formula::<f64>::dense_real(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
    let b = Formula::<f64>::dense_real(3, 2, &[1., 0., 0., 1., 1., 1.]).unwrap();
    let ab = Formula::compose(vec![a.clone(), b.clone()]).unwrap();
    assert_eq!(
        ab.transpose(),
        Formula::compose(vec![b.transpose(), a.transpose()]).unwrap()
    );
}

#[test]
fn structural_transpose_is_exact() {
    let f = Formula::<f64>::compose(vec![
        Formula::stride(6, 2).unwrap(),
        Formula::direct_sum(vec![
            Formula::OppIdentity(3),
            Formula::diag(vec![0.3, 0.7, 1.1]),
        ])
        .unwrap(),
        Formula::kron_left(Formula::Butterfly, 3),
    ])
    .unwrap();
    assert_eq!(
        f.transpose().densify().unwrap(),
        f.densify().unwrap().transpose()
    );
}

#[test]
fn cost_examples() {
    assert_eq!(Formula::<f64>::Butterfly.cost(), CostTriple::new(2, 0, 0));
    assert_eq!(
        Formula::diag(vec![1.0, 2f64.sqrt()]).cost(),
        CostTriple::new(0, 1, 0)
    );
    assert_eq!(
        Formula::diag(vec![1.0, 2.0]).cost(),
        CostTriple::new(0, 0, 1)
    );
    assert_eq!(
        Formula::diag(vec![-1.0, 0.25]).cost(),
        CostTriple::new(0, 0, 1)
    );
    for p in [
        Formula::<f64>::Identity(5),
        Formula::OppIdentity(5),
        Formula::stride(6, 2).unwrap(),
    ] {
        assert_eq!(p.cost(), CostTriple::ZERO);
    }
    let dct4 = base_case(&TransformId::dct(4, 2)).expect("size-2 DCT-4 base case");
    assert_eq!(dct4.cost(), CostTriple::new(3, 3, 0));
}

#[test]
fn dense_block_costs_per_row() {
    // Row 0: three nonzeros, one general constant -> 2 adds, 1 mult.
    // Row 1: one entry -1 -> free.  Row 2: all zero -> nothing.
    let b =
        Formula::<f64>::dense_real(3, 3, &[1.0, 0.3, -1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(b.cost(), CostTriple::new(2, 1, 0));
}

#[test]
fn invariants_are_enforced() {
    assert!(matches!(
        Formula::<f64>::stride(6, 4),
        Err(FormulaError::BadStride { .. })
    ));
    assert!(matches!(
        Formula::<f64>::odd_stride(6, 2),
        Err(FormulaError::BadOddStride { .. })
    ));
    assert!(matches!(
        Formula::<f64>::perm(vec![0, 0, 1]),
        Err(FormulaError::NotBijection(3))
    ));
    assert!(matches!(
        Formula::<f64>::dense_real(2, 2, &[1.0, 2.0, 3.0]),
        Err(FormulaError::BadDense { .. })
    ));
    let bad = Formula::<f64>::compose(vec![Formula::Identity(2), Formula::Identity(3)]);
    assert!(matches!(bad, Err(FormulaError::DimMismatch { .. })));
    assert!(Formula::<f64>::Butterfly.apply(&[1.0]).is_err());
}

#[test]
fn sexpr_example_parses() {
    let f = Formula::<f64>::parse_sexpr("(compose (stride 4 2) (dsum (I 2) (F2)))").unwrap();
    assert_eq!((f.rows(), f.cols()), (4, 4));
    assert_eq!(f.to_sexpr(), "(compose (stride 4 2) (dsum (I 2) (F2)))");
    assert!(Formula::<f64>::parse_sexpr("(compose (I 2) (I 3))").is_err());
    assert!(Formula::<f64>::parse_sexpr("(F2) (F2)").is_err());
}

#[test]
fn leaves_serialize_with_flags() {
    let id = TransformId::dct(3, 4).with_skew(num_rational::Rational64::new(1, 3));
    let f = Formula::<f64>::compose(vec![Formula::leaf(id.clone()), Formula::Identity(4)]).unwrap();
    let back = Formula::<f64>::parse_sexpr(&f.to_sexpr()).unwrap();
    assert_eq!(back, f);
    assert_eq!(back.leaves()[0].id, id);
}

// ---------------------------------------------------------------------------
// Random well-formed formulas.

fn divisors(n: usize) -> Vec<usize> {
    (2..n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn random_entries(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| match rng.random_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            2 => -1.0,
            3 => 0.5,
            _ => rng.random_range(-1.0..1.0) * scale,
        })
        .collect()
}

/// A random square `n × n` formula of bounded depth.
fn random_formula(rng: &mut ChaCha8Rng, n: usize, depth: u32) -> Formula<f64> {
    let composite = depth > 0 && rng.random_bool(0.6);
    if composite {
        match rng.random_range(0..4) {
            0 => {
                let k = rng.random_range(2..=3);
                Formula::compose((0..k).map(|_| random_formula(rng, n, depth - 1)).collect())
                    .unwrap()
            }
            1 if n >= 2 => {
                let a = rng.random_range(1..n);
                Formula::direct_sum(vec![
                    random_formula(rng, a, depth - 1),
                    random_formula(rng, n - a, depth - 1),
                ])
                .unwrap()
            }
            2 if !divisors(n).is_empty() => {
                let ds = divisors(n);
                let d = ds[rng.random_range(0..ds.len())];
                Formula::kron_left(random_formula(rng, d, depth - 1), n / d)
            }
            3 if !divisors(n).is_empty() => {
                let ds = divisors(n);
                let d = ds[rng.random_range(0..ds.len())];
                Formula::kron_right(n / d, random_formula(rng, d, depth - 1))
            }
            _ => random_formula(rng, n, 0),
        }
    } else {
        match rng.random_range(0..7) {
            0 => Formula::Identity(n),
            1 => Formula::OppIdentity(n),
            2 => Formula::diag(random_entries(rng, n, 2.0)),
            3 => {
                let mut map: Vec<usize> = (0..n).collect();
                map.shuffle(rng);
                Formula::perm(map).unwrap()
            }
            4 if !divisors(n).is_empty() => {
                let ds = divisors(n);
                Formula::stride(n, ds[rng.random_range(0..ds.len())]).unwrap()
            }
            5 if n == 2 => Formula::Butterfly,
            _ => Formula::dense_real(n, n, &random_entries(rng, n * n, 1.0 / n as f64)).unwrap(),
        }
    }
}

fn case(seed: u64, n: usize) -> (Formula<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_formula(&mut rng, n, 3);
    let x = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (f, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn apply_matches_densify(seed in any::<u64>(), n in 1usize..=64) {
        let (f, x) = case(seed, n);
        f.validate().unwrap();
        let y = f.apply(&x).unwrap();
        let want = f.densify().unwrap() * nalgebra::DVector::from_vec(x.clone());
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ymax = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * n as f64 * xmax.max(1e-300) * ymax;
        prop_assert!(approx(&y, want.as_slice(), tol), "{}", f.to_sexpr());
    }

    #[test]
    fn transpose_densifies_to_transpose(seed in any::<u64>(), n in 1usize..=32) {
        let (f, _) = case(seed, n);
        // Products of general blocks re-associate under transposition, so
        // agreement is to rounding; structure alone transposes exactly.
        let t = f.transpose();
        t.validate().unwrap();
        let (dt, d) = (t.densify().unwrap(), f.densify().unwrap());
        let scale = d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!((dt - d.transpose()).amax() <= 1e-13 * scale);
        prop_assert_eq!(t.transpose(), f.clone());
    }

    #[test]
    fn cost_is_structural(seed in any::<u64>(), n in 2usize..=24, m in 1usize..=4) {
        let (a, _) = case(seed, n);
        let (b, _) = case(seed.wrapping_add(1), n);
        let composed = Formula::compose(vec![a.clone(), b.clone()]).unwrap();
        prop_assert_eq!(composed.cost(), a.cost() + b.cost());
        let summed = Formula::direct_sum(vec![a.clone(), b.clone()]).unwrap();
        prop_assert_eq!(summed.cost(), a.cost() + b.cost());
        prop_assert_eq!(Formula::kron_left(a.clone(), m).cost(), a.cost() * m as u64);
        prop_assert_eq!(Formula::kron_right(m, a.clone()).cost(), a.cost() * m as u64);
    }

    #[test]
    fn sexpr_round_trips(seed in any::<u64>(), n in 1usize..=32) {
        let (f, x) = case(seed, n);
        let text = f.to_sexpr();
        let back = Formula::<f64>::parse_sexpr(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.apply(&x).unwrap(), f.apply(&x).unwrap());
    }

    #[test]
    fn strides_invert(n in 2usize..=64, pick in any::<prop::sample::Index>()) {
        let ds: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
        let m = ds[pick.index(ds.len())];
        let f = Formula::<f64>::compose(vec![
            Formula::stride(n, m).unwrap(),
            Formula::stride(n, n / m).unwrap(),
        ]).unwrap();
        prop_assert_eq!(f.densify().unwrap(), DMatrix::identity(n, n));

        let os: Vec<usize> = (1..=n + 1).filter(|d| (n + 1) % d == 0).collect();
        let m = os[pick.index(os.len())];
        let g = Formula::<f64>::compose(vec![
            Formula::odd_stride(n, m).unwrap(),
            Formula::odd_stride(n, (n + 1) / m).unwrap(),
        ]).unwrap();
        prop_assert_eq!(g.densify().unwrap(), DMatrix::identity(n, n));
    }
}
