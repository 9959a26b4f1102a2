//! Cooley–Tukey algorithms for the DFT and the twiddle relations that
//! reduce the DFT variants to the plain DFT.

use num_complex::Complex64;
use num_rational::Rational64;

use super::RuleError;
use crate::chebyshev::{cos_pi, sin_pi};
use crate::formula::{Formula, Scalar};
use crate::reference::{Family, TransformId};

/// `ω_n^e = exp(−2πj·e/n)` for a rational exponent.
pub fn omega(n: usize, e: Rational64) -> Complex64 {
    let q = -e * 2 / n as i64;
    Complex64::new(cos_pi(q), sin_pi(q))
}

fn embed<S: Scalar>(c: Complex64) -> Result<S, RuleError> {
    S::of_complex(c).ok_or_else(|| RuleError::Inapplicable("needs complex scalars".into()))
}

fn diag<S: Scalar>(d: Vec<Complex64>) -> Result<Formula<S>, RuleError> {
    if d.iter()
        .all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-15)
    {
        return Ok(Formula::Identity(d.len()));
    }
    Ok(Formula::Diagonal(
        d.into_iter().map(embed::<S>).collect::<Result<_, _>>()?,
    ))
}

fn check_plain(t: &TransformId) -> Result<(), RuleError> {
    if t.family != Family::Dft || t.ty != 1 || t.transposed {
        return Err(RuleError::Inapplicable(format!("{t}: needs a plain DFT")));
    }
    Ok(())
}

/// `DFT_n = L_m^n (I_2 ⊗ DFT_m)(I_m ⊕ D_m)(DFT_2 ⊗ I_m)`, `n = 2m`, with the
/// twiddle factors `D_m = diag(ω_n^i)`.
pub fn radix2<S: Scalar>(t: &TransformId) -> Result<Formula<S>, RuleError> {
    check_plain(t)?;
    let n = t.n;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(RuleError::Inapplicable(format!(
            "{t}: radix 2 needs even n"
        )));
    }
    let m = n / 2;
    let mut tw = vec![Complex64::new(1.0, 0.0); m];
    tw.extend((0..m).map(|i| omega(n, Rational64::from_integer(i as i64))));
    Ok(Formula::Compose(vec![
        Formula::Stride { n, m },
        Formula::KronRight(2, Box::new(Formula::leaf(TransformId::dft(1, m)))),
        diag(tw)?,
        Formula::KronLeft(Box::new(Formula::Butterfly), m),
    ]))
}

/// The twiddle diagonal `T_m^n` with entry `ω_n^{i·j}` at `i·m + j`.
pub fn twiddles(k: usize, m: usize) -> Vec<Complex64> {
    let n = k * m;
    (0..n)
        .map(|c| omega(n, Rational64::from_integer(((c / m) * (c % m)) as i64)))
        .collect()
}

/// Decimation-in-frequency Cooley–Tukey with radix `k`:
/// `DFT_n = L_k^n (I_m ⊗ DFT_k) T_m^n (DFT_m ⊗ I_k)`, `n = k·m`.
pub fn cooley_tukey<S: Scalar>(t: &TransformId, k: usize) -> Result<Formula<S>, RuleError> {
    check_plain(t)?;
    let n = t.n;
    if k < 2 || k >= n || !n.is_multiple_of(k) {
        return Err(RuleError::Inapplicable(format!(
            "{t}: radix {k} does not divide {n}"
        )));
    }
    let m = n / k;
    let tw: Vec<Complex64> = (0..n)
        .map(|c| omega(n, Rational64::from_integer(((c / k) * (c % k)) as i64)))
        .collect();
    Ok(Formula::Compose(vec![
        Formula::Stride { n, m: k },
        Formula::KronRight(m, Box::new(Formula::leaf(TransformId::dft(1, k)))),
        diag(tw)?,
        Formula::KronLeft(Box::new(Formula::leaf(TransformId::dft(1, m))), k),
    ]))
}

/// DFT variants as the plain DFT between twiddle diagonals.
pub fn twiddle_variant<S: Scalar>(t: &TransformId) -> Result<Formula<S>, RuleError> {
    if !t.is_dft() || t.transposed || (t.family == Family::Dft && t.ty == 1) {
        return Err(RuleError::Inapplicable(format!("{t}: needs a DFT variant")));
    }
    let n = t.n;
    let half = |i: usize| omega(2 * n, Rational64::from_integer(i as i64));
    let plain = Formula::leaf(TransformId::dft(1, n));
    let ones = || vec![Complex64::new(1.0, 0.0); n];
    let (left, right) = match (t.family, t.ty) {
        (Family::Dft, 2) => ((0..n).map(half).collect(), ones()),
        (Family::Dft, 3) => (ones(), (0..n).map(half).collect()),
        (Family::Dft, 4) => {
            let quarter = omega(4 * n, Rational64::from_integer(1));
            (
                (0..n).map(|k| half(k) * quarter).collect(),
                (0..n).map(half).collect(),
            )
        }
        _ => {
            let a = t.a.expect("DFT(a) carries a");
            let mag = (*a.numer() as f64 / *a.denom() as f64).abs();
            let angle = if *a.numer() < 0 {
                std::f64::consts::PI / n as f64
            } else {
                0.0
            };
            let root = Complex64::from_polar(mag.powf(1.0 / n as f64), angle);
            (ones(), (0..n).map(|l| root.powu(l as u32)).collect())
        }
    };
    let mut f = Vec::new();
    let l: Formula<S> = diag(left)?;
    if !matches!(l, Formula::Identity(_)) {
        f.push(l);
    }
    f.push(plain);
    let r: Formula<S> = diag(right)?;
    if !matches!(r, Formula::Identity(_)) {
        f.push(r);
    }
    Ok(if f.len() == 1 {
        f.pop().expect("one factor")
    } else {
        Formula::Compose(f)
    })
}
