//! Exact Chebyshev polynomials of the four kinds, their zeros, the ordered
//! zeros of `T_n − cos rπ`, and machine checks of the polynomial identities
//! the fast algorithms rely on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChebError {
    #[error("skew parameter r = {0} outside [0, 1]")]
    SkewOutOfRange(Rational64),
    #[error("size must be positive")]
    ZeroSize,
    #[error("unknown identity tag '{0}'")]
    UnknownTag(String),
    #[error("identity {tag} needs parameters {needs}")]
    MissingParams { tag: String, needs: &'static str },
}

/// The four Chebyshev kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChebKind {
    T,
    U,
    V,
    W,
}

impl ChebKind {
    pub const ALL: [ChebKind; 4] = [ChebKind::T, ChebKind::U, ChebKind::V, ChebKind::W];

    /// Coefficients `(c0, c1)` of `C_1 = c1·x + c0`.
    fn first(self) -> (i64, i64) {
        match self {
            ChebKind::T => (0, 1),
            ChebKind::U => (0, 2),
            ChebKind::V => (-1, 2),
            ChebKind::W => (1, 2),
        }
    }

    /// Express `C_{-n}` (n ≥ 1) as `sign · C_j` with `j ≥ 0`, or zero.
    pub fn reflect(self, n: i64) -> Option<(i64, usize)> {
        debug_assert!(n >= 1);
        match self {
            ChebKind::T => Some((1, n as usize)),
            ChebKind::U => {
                if n == 1 {
                    None
                } else {
                    Some((-1, (n - 2) as usize))
                }
            }
            ChebKind::V => Some((1, (n - 1) as usize)),
            ChebKind::W => Some((-1, (n - 1) as usize)),
        }
    }

    /// Evaluate `C_n(x)` numerically by the three-term recurrence (n ≥ 0).
    pub fn eval(self, n: usize, x: f64) -> f64 {
        let (c0, c1) = self.first();
        let mut a = 1.0;
        if n == 0 {
            return a;
        }
        let mut b = c1 as f64 * x + c0 as f64;
        for _ in 1..n {
            let c = 2.0 * x * b - a;
            a = b;
            b = c;
        }
        b
    }

    /// Scaled basis value `f(θ)·C_ℓ(cos θ)` in trigonometric closed form.
    pub fn scaled(self, l: usize, theta: f64) -> f64 {
        let l = l as f64;
        match self {
            ChebKind::T => (l * theta).cos(),
            ChebKind::U => ((l + 1.0) * theta).sin(),
            ChebKind::V => ((l + 0.5) * theta).cos(),
            ChebKind::W => ((l + 0.5) * theta).sin(),
        }
    }

    /// The scaling function `f(θ)` attached to this basis.
    pub fn scaling(self, theta: f64) -> f64 {
        match self {
            ChebKind::T => 1.0,
            ChebKind::U => theta.sin(),
            ChebKind::V => (theta / 2.0).cos(),
            ChebKind::W => (theta / 2.0).sin(),
        }
    }
}

impl fmt::Display for ChebKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// Polynomial with exact rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPoly {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Convert a small rational to an arbitrary-precision one.
pub fn big(q: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

impl ExactPoly {
    pub fn zero() -> Self {
        ExactPoly { coeffs: vec![] }
    }

    pub fn constant(c: BigRational) -> Self {
        ExactPoly::new(vec![c])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        ExactPoly::new(c.iter().map(|&v| rat(v)).collect())
    }

    /// `x`.
    pub fn x() -> Self {
        ExactPoly::from_ints(&[0, 1])
    }

    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ExactPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        ExactPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// `self(q(x))`.
    pub fn compose(&self, q: &ExactPoly) -> ExactPoly {
        let mut acc = ExactPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * q) + &ExactPoly::constant(c.clone());
        }
        acc
    }

    /// Coefficients as `f64`.
    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

impl fmt::Display for ExactPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{}", a)?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a ExactPoly> for &'a ExactPoly {
    type Output = ExactPoly;
    fn add(self, o: &ExactPoly) -> ExactPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigRational::zero();
        ExactPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl<'a> Sub<&'a ExactPoly> for &'a ExactPoly {
    type Output = ExactPoly;
    fn sub(self, o: &ExactPoly) -> ExactPoly {
        self + &(-o)
    }
}

impl Neg for &ExactPoly {
    type Output = ExactPoly;
    fn neg(self) -> ExactPoly {
        ExactPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl<'a> Mul<&'a ExactPoly> for &'a ExactPoly {
    type Output = ExactPoly;
    fn mul(self, o: &ExactPoly) -> ExactPoly {
        if self.is_zero() || o.is_zero() {
            return ExactPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        ExactPoly::new(c)
    }
}

/// `C_n` for any integer `n` (negative indices via the symmetry relations).
pub fn cheb(kind: ChebKind, n: i64) -> ExactPoly {
    if n < 0 {
        return match kind.reflect(-n) {
            None => ExactPoly::zero(),
            Some((s, j)) => cheb(kind, j as i64).scale(&rat(s)),
        };
    }
    let (c0, c1) = kind.first();
    let mut a = ExactPoly::from_ints(&[1]);
    if n == 0 {
        return a;
    }
    let mut b = ExactPoly::from_ints(&[c0, c1]);
    let two_x = ExactPoly::from_ints(&[0, 2]);
    for _ in 1..n {
        let c = &(&two_x * &b) - &a;
        a = b;
        b = c;
    }
    b
}

/// Zeros of `C_n` as fractions `ρ` with zero `cos ρπ`, `k` ascending.
pub fn zero_angles(kind: ChebKind, n: usize) -> Vec<Rational64> {
    let n = n as i64;
    (0..n)
        .map(|k| match kind {
            ChebKind::T => Rational64::new(2 * k + 1, 2 * n),
            ChebKind::U => Rational64::new(k + 1, n + 1),
            ChebKind::V => Rational64::new(2 * k + 1, 2 * n + 1),
            ChebKind::W => Rational64::new(2 * k + 2, 2 * n + 1),
        })
        .collect()
}

/// Numeric zeros of `C_n`, `k` ascending.
pub fn cheb_zeros(kind: ChebKind, n: usize) -> Result<Vec<f64>, ChebError> {
    if n == 0 {
        return Err(ChebError::ZeroSize);
    }
    Ok(zero_angles(kind, n).into_iter().map(cos_pi).collect())
}

/// `cos(qπ)` for a rational `q`, exact at the rational special values.
pub fn cos_pi(q: Rational64) -> f64 {
    // Reduce to [0, 2).
    let two = Rational64::from_integer(2);
    let mut q = q % two;
    if q < Rational64::zero() {
        q += two;
    }
    let special = [
        (Rational64::new(0, 1), 1.0),
        (Rational64::new(1, 3), 0.5),
        (Rational64::new(1, 2), 0.0),
        (Rational64::new(2, 3), -0.5),
        (Rational64::new(1, 1), -1.0),
        (Rational64::new(4, 3), -0.5),
        (Rational64::new(3, 2), 0.0),
        (Rational64::new(5, 3), 0.5),
    ];
    for (s, v) in special {
        if q == s {
            return v;
        }
    }
    (to_f64(q) * std::f64::consts::PI).cos()
}

/// `sin(qπ)` for a rational `q`.
pub fn sin_pi(q: Rational64) -> f64 {
    cos_pi(Rational64::new(1, 2) - q)
}

pub fn to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Ordered zeros `(r_0, …, r_{n−1})` of `T_n − cos rπ`, as fractions of π.
pub fn skew_zeros(n: usize, r: Rational64) -> Result<Vec<Rational64>, ChebError> {
    if n == 0 {
        return Err(ChebError::ZeroSize);
    }
    if r < Rational64::zero() || r > Rational64::one() {
        return Err(ChebError::SkewOutOfRange(r));
    }
    let nn = Rational64::from_integer(n as i64);
    let two = Rational64::from_integer(2);
    let mut out = Vec::with_capacity(n);
    for i in 0..n / 2 {
        let i = Rational64::from_integer(i as i64);
        out.push((r + two * i) / nn);
        out.push((two - r + two * i) / nn);
    }
    if n % 2 == 1 {
        out.push((r + nn - Rational64::one()) / nn);
    }
    Ok(out)
}

/// Numeric variant of [`skew_zeros`] for arbitrary real `r`.
pub fn skew_zeros_f64(n: usize, r: f64) -> Result<Vec<f64>, ChebError> {
    if n == 0 {
        return Err(ChebError::ZeroSize);
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(ChebError::SkewOutOfRange(Rational64::zero()));
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n / 2 {
        let i = i as f64;
        out.push((r + 2.0 * i) / nf);
        out.push((2.0 - r + 2.0 * i) / nf);
    }
    if n % 2 == 1 {
        out.push((r + nf - 1.0) / nf);
    }
    Ok(out)
}

/// Coefficients of `2^{n−1} ∏_i (x − cos((r+2i)π/n))`, computed in floating point.
pub fn skew_product_coeffs(n: usize, r: f64) -> Vec<f64> {
    let mut c = vec![1.0];
    for i in 0..n {
        let z = ((r + 2.0 * i as f64) / n as f64 * std::f64::consts::PI).cos();
        let mut next = vec![0.0; c.len() + 1];
        for (j, &a) in c.iter().enumerate() {
            next[j + 1] += a;
            next[j] -= a * z;
        }
        c = next;
    }
    let s = 2f64.powi(n as i32 - 1);
    c.iter().map(|v| v * s).collect()
}

/// Parameters for [`check_identity`].
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityParams {
    pub n: Option<i64>,
    pub k: Option<i64>,
    pub m: Option<i64>,
}

impl IdentityParams {
    pub fn n(n: i64) -> Self {
        IdentityParams {
            n: Some(n),
            ..Default::default()
        }
    }
    pub fn km(k: i64, m: i64) -> Self {
        IdentityParams {
            k: Some(k),
            m: Some(m),
            ..Default::default()
        }
    }
    pub fn kn(k: i64, n: i64) -> Self {
        IdentityParams {
            k: Some(k),
            n: Some(n),
            m: None,
        }
    }
}

/// Every identity tag understood by [`check_identity`].
pub fn identity_tags() -> Vec<String> {
    let mut v: Vec<String> = [
        "factor.T3",
        "factor.U2n-1",
        "factor.U2n",
        "factor.V3n+1",
        "factor.W3n+1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for s in [
        "compose.T",
        "compose.U",
        "compose.V",
        "compose.W",
        "compose.T-half",
        "compose.U-half",
    ] {
        v.push(s.to_string());
    }
    for e in ["recurrence", "product"] {
        for k in ChebKind::ALL {
            v.push(format!("{e}.{k}"));
        }
    }
    for k in ChebKind::ALL {
        for col in ["minus2", "minus1", "plus1"] {
            v.push(format!("base-change.{k}.{col}"));
        }
    }
    v
}

fn c(kind: ChebKind, n: i64) -> ExactPoly {
    cheb(kind, n)
}

fn need(p: Option<i64>, tag: &str, needs: &'static str) -> Result<i64, ChebError> {
    p.ok_or(ChebError::MissingParams {
        tag: tag.to_string(),
        needs,
    })
}

fn parse_kind(s: &str) -> Option<ChebKind> {
    match s {
        "T" => Some(ChebKind::T),
        "U" => Some(ChebKind::U),
        "V" => Some(ChebKind::V),
        "W" => Some(ChebKind::W),
        _ => None,
    }
}

/// Check a tagged polynomial identity exactly at the given sizes.
///
/// Tags:
/// * `factor.T3`, `factor.U2n-1`, `factor.U2n`, `factor.V3n+1`,
///   `factor.W3n+1`: product factorizations (parameter `n`);
/// * `compose.T`, `compose.U`, `compose.V`, `compose.W`, `compose.T-half`,
///   `compose.U-half`: decompositions through `T_m` (parameters `k`, `m`;
///   `compose.V`/`compose.W` need odd `k`, the `-half` forms even `m`);
/// * `recurrence.C`: `C_n` through `U_{n−1}`, `U_{n−2}` (parameter `n`);
/// * `product.C`: `2 T_k C_n = C_{n−k} + C_{n+k}` (parameters `k`, `n`);
/// * `base-change.C.{minus2,minus1,plus1}`: `C_n ∓ C_{n−j}` in another
///   basis (parameter `n`).
pub fn check_identity(tag: &str, p: IdentityParams) -> Result<bool, ChebError> {
    use ChebKind::*;
    let x = ExactPoly::x();
    let two = ExactPoly::from_ints(&[2]);
    let unknown = || ChebError::UnknownTag(tag.to_string());
    let res = match tag {
        "factor.T3" => c(T, 3) == &x * &ExactPoly::from_ints(&[-3, 0, 4]),
        "factor.U2n-1" => {
            let n = need(p.n, tag, "n")?;
            c(U, 2 * n - 1) == &(&two * &c(U, n - 1)) * &c(T, n)
        }
        "factor.U2n" => {
            let n = need(p.n, tag, "n")?;
            c(U, 2 * n) == &c(V, n) * &c(W, n)
        }
        "factor.V3n+1" => {
            let n = need(p.n, tag, "n")?;
            let half = ExactPoly::constant(BigRational::new(1.into(), 2.into()));
            c(V, 3 * n + 1) == &(&two * &c(V, n)) * &(&c(T, 2 * n + 1) - &half)
        }
        "factor.W3n+1" => {
            let n = need(p.n, tag, "n")?;
            let half = ExactPoly::constant(BigRational::new(1.into(), 2.into()));
            c(W, 3 * n + 1) == &(&two * &c(W, n)) * &(&c(T, 2 * n + 1) + &half)
        }
        "compose.T" => {
            let k = need(p.k, tag, "k, m")?;
            let m = need(p.m, tag, "k, m")?;
            c(T, k * m) == c(T, k).compose(&c(T, m))
        }
        "compose.U" => {
            let k = need(p.k, tag, "k, m")?;
            let m = need(p.m, tag, "k, m")?;
            c(U, k * m - 1) == &c(U, m - 1) * &c(U, k - 1).compose(&c(T, m))
        }
        "compose.V" | "compose.W" => {
            let k = need(p.k, tag, "k, m")?;
            let m = need(p.m, tag, "k, m")?;
            if k % 2 == 0 {
                return Ok(false);
            }
            let kind = if tag == "compose.V" { V } else { W };
            c(kind, (k - 1) / 2 + k * m)
                == &c(kind, m) * &c(kind, (k - 1) / 2).compose(&c(T, 2 * m + 1))
        }
        "compose.T-half" => {
            let k = need(p.k, tag, "k, m")?;
            let m = need(p.m, tag, "k, m")?;
            if m % 2 != 0 {
                return Ok(false);
            }
            c(T, k * m + m / 2) == &c(T, m / 2) * &c(V, k).compose(&c(T, m))
        }
        "compose.U-half" => {
            let k = need(p.k, tag, "k, m")?;
            let m = need(p.m, tag, "k, m")?;
            if m % 2 != 0 {
                return Ok(false);
            }
            c(U, k * m + m / 2 - 1) == &c(U, m / 2 - 1) * &c(W, k).compose(&c(T, m))
        }
        _ => {
            let parts: Vec<&str> = tag.split('.').collect();
            match parts.as_slice() {
                ["recurrence", kk] => {
                    let kind = parse_kind(kk).ok_or_else(unknown)?;
                    let n = need(p.n, tag, "n")?;
                    c(kind, n) == &(&c(kind, 1) * &c(U, n - 1)) - &(&c(kind, 0) * &c(U, n - 2))
                }
                ["product", kk] => {
                    let kind = parse_kind(kk).ok_or_else(unknown)?;
                    let k = need(p.k, tag, "k, n")?;
                    let n = need(p.n, tag, "k, n")?;
                    &two * &(&c(T, k) * &c(kind, n)) == &c(kind, n - k) + &c(kind, n + k)
                }
                ["base-change", kk, col] => {
                    let kind = parse_kind(kk).ok_or_else(unknown)?;
                    let n = need(p.n, tag, "n")?;
                    let xm1 = ExactPoly::from_ints(&[-1, 1]);
                    let xp1 = ExactPoly::from_ints(&[1, 1]);
                    let x2m1 = ExactPoly::from_ints(&[-1, 0, 1]);
                    let lhs = match *col {
                        "minus2" => &c(kind, n) - &c(kind, n - 2),
                        "minus1" => &c(kind, n) - &c(kind, n - 1),
                        "plus1" => &c(kind, n) + &c(kind, n - 1),
                        _ => return Err(unknown()),
                    };
                    let rhs = match (kind, *col) {
                        (T, "minus2") => &(&two * &x2m1) * &c(U, n - 2),
                        (T, "minus1") => &xm1 * &c(W, n - 1),
                        (T, "plus1") => &xp1 * &c(V, n - 1),
                        (U, "minus2") => &two * &c(T, n),
                        (U, "minus1") => c(V, n),
                        (U, "plus1") => c(W, n),
                        (V, "minus2") => &(&two * &xm1) * &c(W, n - 1),
                        (V, "minus1") => &(&two * &xm1) * &c(U, n - 1),
                        (V, "plus1") => &two * &c(T, n),
                        (W, "minus2") => &(&two * &xp1) * &c(V, n - 1),
                        (W, "minus1") => &two * &c(T, n),
                        (W, "plus1") => &(&two * &xp1) * &c(U, n - 1),
                        _ => return Err(unknown()),
                    };
                    lhs == rhs
                }
                _ => return Err(unknown()),
            }
        }
    };
    Ok(res)
}

/// Numerical check of `T_{km} − cos rπ = T_k(T_m) − cos rπ` at a sample `r`,
/// together with the product form of `T_n − cos rπ`; returns the maximal
/// coefficient deviation.
pub fn skew_factorization_error(n: usize, r: f64) -> f64 {
    let t = cheb(ChebKind::T, n as i64).to_f64();
    let mut lhs = t.clone();
    lhs[0] -= (r * std::f64::consts::PI).cos();
    let rhs = skew_product_coeffs(n, r);
    lhs.iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t3_closed_form() {
        assert_eq!(cheb(ChebKind::T, 3), ExactPoly::from_ints(&[0, -3, 0, 4]));
    }

    #[test]
    fn u_minus_one_is_zero() {
        assert!(cheb(ChebKind::U, -1).is_zero());
    }

    #[test]
    fn v1() {
        assert_eq!(cheb(ChebKind::V, 1), ExactPoly::from_ints(&[-1, 2]));
    }

    #[test]
    fn w_zero_at_n1() {
        let z = cheb_zeros(ChebKind::W, 1).unwrap();
        assert_eq!(z, vec![-0.5]);
    }

    #[test]
    fn skew_zero_examples() {
        let q = |a, b| Rational64::new(a, b);
        assert_eq!(skew_zeros(2, q(1, 2)).unwrap(), vec![q(1, 4), q(3, 4)]);
        assert_eq!(
            skew_zeros(3, q(1, 2)).unwrap(),
            vec![q(1, 6), q(1, 2), q(5, 6)]
        );
        assert_eq!(
            skew_zeros(3, q(1, 3)).unwrap(),
            vec![q(1, 9), q(5, 9), q(7, 9)]
        );
        assert!(skew_zeros(3, q(3, 2)).is_err());
    }

    #[test]
    fn poly_ops() {
        let t2 = cheb(ChebKind::T, 2);
        assert_eq!(t2.compose(&t2), cheb(ChebKind::T, 4));
        assert_eq!(
            &cheb(ChebKind::V, 1) * &cheb(ChebKind::W, 1),
            cheb(ChebKind::U, 2)
        );
        let h = BigRational::new(1.into(), 2.into());
        assert_eq!(cheb(ChebKind::T, 3).eval(&h), rat(-1));
    }

    #[test]
    fn display() {
        assert_eq!(cheb(ChebKind::T, 3).to_string(), "4x^3 - 3x");
    }
}
