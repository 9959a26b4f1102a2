//! Naive dense constructions of every transform in the catalog. These are the
//! ground-truth oracles against which every fast algorithm is checked.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::chebyshev::{cos_pi, sin_pi, skew_zeros, to_f64, ChebKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("invalid transform {0}: {1}")]
    Invalid(String, String),
    #[error("matrix of {0} is singular")]
    Singular(String),
    #[error("{0} is complex-valued; request the complex matrix")]
    ComplexOnly(String),
    #[error("cannot parse transform spec '{0}'")]
    BadSpec(String),
}

/// Transform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Dct,
    Dst,
    Dft,
    /// The generalized DFT(a) over `x^n − a`.
    DftA,
}

/// The four groups of trigonometric transforms, by the modulus of their algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupTag {
    T,
    U,
    V,
    W,
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}-group", self)
    }
}

/// Identifies one transform instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransformId {
    pub family: Family,
    /// 1–8 for DCT/DST, 1–4 for DFT, unused (0) for DFT(a).
    pub ty: u8,
    pub n: usize,
    /// Skew parameter; `None` means the plain transform (r = 1/2).
    pub r: Option<Rational64>,
    /// Parameter of DFT(a).
    pub a: Option<Rational64>,
    pub poly: bool,
    pub inverse: bool,
    pub transposed: bool,
}

impl TransformId {
    fn base(family: Family, ty: u8, n: usize) -> Self {
        TransformId {
            family,
            ty,
            n,
            r: None,
            a: None,
            poly: false,
            inverse: false,
            transposed: false,
        }
    }

    pub fn dct(ty: u8, n: usize) -> Self {
        Self::base(Family::Dct, ty, n)
    }

    pub fn dst(ty: u8, n: usize) -> Self {
        Self::base(Family::Dst, ty, n)
    }

    pub fn dft(ty: u8, n: usize) -> Self {
        Self::base(Family::Dft, ty, n)
    }

    pub fn dfta(a: Rational64, n: usize) -> Self {
        let mut t = Self::base(Family::DftA, 0, n);
        t.a = Some(a);
        t
    }

    /// Set the skew parameter; `r = 1/2` is stored as the plain transform.
    pub fn with_skew(mut self, r: Rational64) -> Self {
        self.r = if r == Rational64::new(1, 2) {
            None
        } else {
            Some(r)
        };
        self
    }

    pub fn with_r(self, r: Option<Rational64>) -> Self {
        match r {
            Some(r) => self.with_skew(r),
            None => TransformId { r: None, ..self },
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn polynomial(mut self) -> Self {
        self.poly = true;
        self
    }

    pub fn with_poly(mut self, poly: bool) -> Self {
        self.poly = poly;
        self
    }

    pub fn inv(mut self) -> Self {
        self.inverse = true;
        self
    }

    /// Toggle the transposed flag.
    pub fn transposed(&self) -> Self {
        let mut t = self.clone();
        t.transposed = !t.transposed;
        t
    }

    /// The same transform without the transposed flag.
    pub fn untransposed(&self) -> Self {
        let mut t = self.clone();
        t.transposed = false;
        t
    }

    pub fn is_dtt(&self) -> bool {
        matches!(self.family, Family::Dct | Family::Dst)
    }

    pub fn is_dft(&self) -> bool {
        matches!(self.family, Family::Dft | Family::DftA)
    }

    pub fn is_skew(&self) -> bool {
        self.r.is_some()
    }

    /// Skew parameter with the plain transform read as r = 1/2.
    pub fn skew(&self) -> Rational64 {
        self.r.unwrap_or(Rational64::new(1, 2))
    }

    pub fn is_t_group(&self) -> bool {
        self.group() == Some(GroupTag::T)
    }

    pub fn group(&self) -> Option<GroupTag> {
        if !self.is_dtt() {
            return None;
        }
        Some(match self.ty {
            3 | 4 => GroupTag::T,
            1 | 2 => GroupTag::U,
            7 | 8 => GroupTag::V,
            _ => GroupTag::W,
        })
    }

    /// Chebyshev kind of the basis polynomials.
    pub fn basis(&self) -> Option<ChebKind> {
        if !self.is_dtt() {
            return None;
        }
        let odd = self.ty % 2 == 1;
        Some(match (self.family, odd) {
            (Family::Dct, true) => ChebKind::T,
            (Family::Dct, false) => ChebKind::V,
            (Family::Dst, true) => ChebKind::U,
            _ => ChebKind::W,
        })
    }

    /// Short label such as `C3` or `S7`.
    pub fn short(&self) -> String {
        match self.family {
            Family::Dct => format!("C{}", self.ty),
            Family::Dst => format!("S{}", self.ty),
            Family::Dft => format!("F{}", self.ty),
            Family::DftA => "FA".to_string(),
        }
    }

    /// Check the structural invariants of the identifier.
    pub fn validate(&self) -> Result<(), ReferenceError> {
        let bad = |why: &str| Err(ReferenceError::Invalid(self.to_string(), why.to_string()));
        if self.n == 0 {
            return bad("size must be positive");
        }
        match self.family {
            Family::Dct | Family::Dst => {
                if !(1..=8).contains(&self.ty) {
                    return bad("type must be 1..8");
                }
                if self.family == Family::Dct && self.ty == 1 && self.n < 2 {
                    return bad("DCT-1 needs n >= 2");
                }
                if let Some(r) = self.r {
                    if !(3..=4).contains(&self.ty) {
                        return bad("skew parameter only for types 3 and 4");
                    }
                    if r < Rational64::zero() || r > Rational64::one() {
                        return bad("skew parameter outside [0, 1]");
                    }
                }
                if self.inverse && !self.is_t_group() {
                    return bad("inverse only defined for types 3 and 4");
                }
                if self.inverse && self.poly {
                    return bad("inverse of the polynomial variant is not defined");
                }
                if self.a.is_some() {
                    return bad("parameter a only for DFT(a)");
                }
            }
            Family::Dft | Family::DftA => {
                if self.family == Family::Dft && !(1..=4).contains(&self.ty) {
                    return bad("DFT type must be 1..4");
                }
                if self.family == Family::DftA && self.a.is_none_or(|a| a.is_zero()) {
                    return bad("DFT(a) needs a nonzero a");
                }
                if self.r.is_some() || self.poly || self.inverse {
                    return bad("skew/poly/inverse flags only for DCT/DST");
                }
            }
        }
        Ok(())
    }

    /// Zero angles `ρ_k` (zero `cos ρ_k π`) of the row points, in row order.
    pub fn zero_angles(&self) -> Result<Vec<Rational64>, ReferenceError> {
        self.validate()?;
        if !self.is_dtt() {
            return Err(ReferenceError::Invalid(
                self.to_string(),
                "zeros only for DCT/DST".into(),
            ));
        }
        let n = self.n as i64;
        let q = |a: i64, b: i64| Rational64::new(a, b);
        let s = self.short();
        let v: Vec<Rational64> = match s.as_str() {
            "C3" | "S3" | "C4" | "S4" => {
                return skew_zeros(self.n, self.skew())
                    .map_err(|e| ReferenceError::Invalid(self.to_string(), e.to_string()))
            }
            "C1" => (0..n).map(|k| q(k, n - 1)).collect(),
            "S1" => (0..n).map(|k| q(k + 1, n + 1)).collect(),
            "C2" => (0..n).map(|k| q(k, n)).collect(),
            "S2" => (0..n).map(|k| q(k + 1, n)).collect(),
            "C5" | "C6" => (0..n).map(|k| q(2 * k, 2 * n - 1)).collect(),
            "S5" | "S6" => (0..n).map(|k| q(2 * k + 2, 2 * n + 1)).collect(),
            "C7" | "S8" => (0..n).map(|k| q(2 * k + 1, 2 * n - 1)).collect(),
            _ => (0..n).map(|k| q(2 * k + 1, 2 * n + 1)).collect(),
        };
        Ok(v)
    }

    /// Name in the transform spec grammar, without the size.
    pub fn spec_name(&self) -> String {
        let mut s = match self.family {
            Family::Dct => format!("dct{}", self.ty),
            Family::Dst => format!("dst{}", self.ty),
            Family::Dft if self.ty == 1 => "dft".to_string(),
            Family::Dft => format!("dft{}", self.ty),
            Family::DftA => format!("dfta={}", fmt_rational(self.a.unwrap_or_default())),
        };
        if self.poly {
            s.push_str(":poly");
        }
        if self.inverse {
            s.push_str(":inv");
        }
        if self.transposed {
            s.push_str(":t");
        }
        s
    }

    /// Parse `<name>[:poly][:inv][:t]`; a leading `i` on a DTT name (`idct3`)
    /// also selects the inverse.
    pub fn parse_spec(spec: &str, n: usize) -> Result<TransformId, ReferenceError> {
        let err = || ReferenceError::BadSpec(spec.to_string());
        let mut parts = spec.trim().split(':');
        let name = parts.next().ok_or_else(err)?.to_ascii_lowercase();
        let (name, mut inverse) = match name.strip_prefix('i') {
            Some(rest) if rest.starts_with("dct") || rest.starts_with("dst") => {
                (rest.to_string(), true)
            }
            _ => (name, false),
        };
        let mut id = if let Some(a) = name.strip_prefix("dfta=") {
            TransformId::dfta(parse_rational(a).ok_or_else(err)?, n)
        } else if name == "dft" {
            TransformId::dft(1, n)
        } else if let Some(t) = name.strip_prefix("dft") {
            TransformId::dft(t.parse().map_err(|_| err())?, n)
        } else if let Some(t) = name.strip_prefix("dct") {
            TransformId::dct(t.parse().map_err(|_| err())?, n)
        } else if let Some(t) = name.strip_prefix("dst") {
            TransformId::dst(t.parse().map_err(|_| err())?, n)
        } else {
            return Err(err());
        };
        for flag in parts {
            match flag {
                "poly" => id.poly = true,
                "inv" => inverse = true,
                "t" => id.transposed = true,
                _ => return Err(err()),
            }
        }
        id.inverse = inverse;
        Ok(id)
    }
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly {
            write!(f, "poly-")?;
        }
        if self.inverse {
            write!(f, "i")?;
        }
        match self.family {
            Family::Dct => write!(f, "DCT-{}_{}", self.ty, self.n)?,
            Family::Dst => write!(f, "DST-{}_{}", self.ty, self.n)?,
            Family::Dft if self.ty == 1 => write!(f, "DFT_{}", self.n)?,
            Family::Dft => write!(f, "DFT-{}_{}", self.ty, self.n)?,
            Family::DftA => write!(
                f,
                "DFT_{}({})",
                self.n,
                fmt_rational(self.a.unwrap_or_default())
            )?,
        }
        if let Some(r) = self.r {
            write!(f, "({})", fmt_rational(r))?;
        }
        if self.transposed {
            write!(f, "^T")?;
        }
        Ok(())
    }
}

/// Format a rational as `p` or `p/q`.
pub fn fmt_rational(q: Rational64) -> String {
    if q.is_integer() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse `p/q`, an integer, or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational64::new(p, q));
    }
    if let Ok(v) = s.parse::<i64>() {
        return Some(Rational64::from_integer(v));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (ip, fp) = body.split_once('.')?;
    if fp.is_empty() || fp.len() > 15 || !fp.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let ip: i64 = if ip.is_empty() { 0 } else { ip.parse().ok()? };
    let den = 10i64.checked_pow(fp.len() as u32)?;
    let num = ip.checked_mul(den)?.checked_add(fp.parse::<i64>().ok()?)?;
    let q = Rational64::new(num, den);
    Some(if neg { -q } else { q })
}

/// Closed-form entry of the (unscaled by anything) trigonometric transform at
/// row angle `θ = ρπ`, column `ℓ`.
fn dtt_entry(kind: ChebKind, l: usize, rho: Rational64) -> f64 {
    let l = l as i64;
    // Multiples of the angle are kept rational to hit the exact special values.
    match kind {
        ChebKind::T => cos_pi(rho * l),
        ChebKind::U => sin_pi(rho * (l + 1)),
        ChebKind::V => cos_pi(rho * Rational64::new(2 * l + 1, 2)),
        ChebKind::W => sin_pi(rho * Rational64::new(2 * l + 1, 2)),
    }
}

fn scaling_value(kind: ChebKind, rho: Rational64) -> f64 {
    match kind {
        ChebKind::T => 1.0,
        ChebKind::U => sin_pi(rho),
        ChebKind::V => cos_pi(rho / 2),
        ChebKind::W => sin_pi(rho / 2),
    }
}

fn check_dtt(t: &TransformId) -> Result<ChebKind, ReferenceError> {
    t.validate()?;
    t.basis()
        .ok_or_else(|| ReferenceError::ComplexOnly(t.to_string()))
}

/// The plain (possibly skew) DCT/DST matrix, ignoring the poly/inverse/transposed flags.
pub fn dtt_matrix(t: &TransformId) -> Result<DMatrix<f64>, ReferenceError> {
    let kind = check_dtt(t)?;
    let rho = t.zero_angles()?;
    Ok(DMatrix::from_fn(t.n, t.n, |k, l| {
        dtt_entry(kind, l, rho[k])
    }))
}

/// The diagonal `f(θ_k)` relating the transform to its polynomial variant.
pub fn scaling_diag(t: &TransformId) -> Result<Vec<f64>, ReferenceError> {
    let kind = check_dtt(t)?;
    Ok(t.zero_angles()?
        .into_iter()
        .map(|rho| scaling_value(kind, rho))
        .collect())
}

/// The polynomial transform `[p_ℓ(α_k)]`, evaluated by the basis recurrence.
pub fn poly_dtt_matrix(t: &TransformId) -> Result<DMatrix<f64>, ReferenceError> {
    let kind = check_dtt(t)?;
    let rho = t.zero_angles()?;
    Ok(DMatrix::from_fn(t.n, t.n, |k, l| {
        kind.eval(l, cos_pi(rho[k]))
    }))
}

/// The skew transform of a T-group kind at parameter `r`.
pub fn skew_dtt_matrix(
    family: Family,
    ty: u8,
    n: usize,
    r: Rational64,
    poly: bool,
) -> Result<DMatrix<f64>, ReferenceError> {
    let t = base_of(family, ty, n).with_skew(r).with_poly(poly);
    if !t.is_t_group() {
        return Err(ReferenceError::Invalid(
            t.to_string(),
            "skew transforms are types 3 and 4".into(),
        ));
    }
    real_matrix(&t)
}

fn base_of(family: Family, ty: u8, n: usize) -> TransformId {
    TransformId::base(family, ty, n)
}

/// The diagonal normalizer `N = DTTᵀ·DTT` of a plain T-group transform.
pub fn inverse_normalizer(t: &TransformId) -> Result<Vec<f64>, ReferenceError> {
    if !t.is_t_group() {
        return Err(ReferenceError::Invalid(
            t.to_string(),
            "normalizer only for types 3 and 4".into(),
        ));
    }
    let n = t.n;
    let h = n as f64 / 2.0;
    let mut d = vec![h; n];
    match t.short().as_str() {
        "C3" => d[0] = n as f64,
        "S3" => d[n - 1] = n as f64,
        _ => {}
    }
    Ok(d)
}

/// Inverse of a (skew) T-group transform, normalized so that
/// `iDTT(r) = N·DTT(r)⁻¹` with `N = DTTᵀ·DTT` independent of `r`.
pub fn inverse_skew_dtt(
    family: Family,
    ty: u8,
    n: usize,
    r: Rational64,
) -> Result<DMatrix<f64>, ReferenceError> {
    real_matrix(&base_of(family, ty, n).with_skew(r).inv())
}

/// Dense real matrix of any DCT/DST identifier, honoring all flags.
pub fn real_matrix(t: &TransformId) -> Result<DMatrix<f64>, ReferenceError> {
    if t.is_dft() {
        t.validate()?;
        return Err(ReferenceError::ComplexOnly(t.to_string()));
    }
    let mut m = if t.poly {
        poly_dtt_matrix(t)?
    } else {
        dtt_matrix(t)?
    };
    if t.inverse {
        let inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| ReferenceError::Singular(t.to_string()))?;
        let norm = inverse_normalizer(t)?;
        m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(norm)) * inv;
    }
    if t.transposed {
        m = m.transpose();
    }
    Ok(m)
}

/// `ω_n^e = exp(−2πj·e/n)` for rational exponent `e`.
fn omega(n: usize, e: Rational64) -> Complex64 {
    let q = -e * 2 / n as i64;
    Complex64::new(cos_pi(q), sin_pi(q))
}

/// Dense DFT matrix of types 1–4 or DFT(a).
pub fn dft_matrix(t: &TransformId) -> Result<DMatrix<Complex64>, ReferenceError> {
    t.validate()?;
    let n = t.n;
    let half = Rational64::new(1, 2);
    let zero = Rational64::zero();
    let m = match t.family {
        Family::Dft => {
            let (sk, sl) = match t.ty {
                1 => (zero, zero),
                2 => (zero, half),
                3 => (half, zero),
                _ => (half, half),
            };
            DMatrix::from_fn(n, n, |k, l| {
                omega(
                    n,
                    (Rational64::from_integer(k as i64) + sk)
                        * (Rational64::from_integer(l as i64) + sl),
                )
            })
        }
        Family::DftA => {
            let a = t.a.unwrap_or_else(Rational64::one);
            let nu = if a.is_negative() { 1.0 } else { 0.0 };
            let root = Complex64::from_polar(
                to_f64(a.abs()).powf(1.0 / n as f64),
                nu * std::f64::consts::PI / n as f64,
            );
            DMatrix::from_fn(n, n, |k, l| {
                omega(n, Rational64::from_integer((k * l % n) as i64)) * root.powu(l as u32)
            })
        }
        _ => return Err(ReferenceError::Invalid(t.to_string(), "not a DFT".into())),
    };
    Ok(if t.transposed { m.transpose() } else { m })
}

/// Dense complex matrix of any identifier.
pub fn complex_matrix(t: &TransformId) -> Result<DMatrix<Complex64>, ReferenceError> {
    if t.is_dft() {
        dft_matrix(t)
    } else {
        Ok(real_matrix(t)?.map(|v| Complex64::new(v, 0.0)))
    }
}

/// Export a matrix as CSV, row-major, 17 significant digits.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e}", m[(i, j)]))
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Export a complex matrix as CSV with `re:im` cells.
pub fn complex_matrix_to_csv(m: &DMatrix<Complex64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e}:{:.16e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Relative Frobenius distance `‖a − b‖ / ‖b‖` (absolute if `b = 0`).
pub fn rel_error<S: nalgebra::ComplexField<RealField = f64>>(
    a: &DMatrix<S>,
    b: &DMatrix<S>,
) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let d = (a - b).norm();
    let nb = b.norm();
    if nb == 0.0 {
        d
    } else {
        d / nb
    }
}

/// The dual of a DCT/DST under sign alternation and column reversal:
/// `diag((−1)^k)·DTT·J = DTT′`.
pub fn dual(t: &TransformId) -> Option<TransformId> {
    if !t.is_dtt() {
        return None;
    }
    let (family, ty) = match (t.family, t.ty) {
        (Family::Dct, 3) => (Family::Dst, 3),
        (Family::Dst, 3) => (Family::Dct, 3),
        (Family::Dct, 4) => (Family::Dst, 4),
        (Family::Dst, 4) => (Family::Dct, 4),
        (Family::Dct, 7) => (Family::Dst, 8),
        (Family::Dst, 8) => (Family::Dct, 7),
        (Family::Dst, 7) => (Family::Dct, 8),
        (Family::Dct, 8) => (Family::Dst, 7),
        (Family::Dct, 5) => (Family::Dct, 6),
        (Family::Dct, 6) => (Family::Dct, 5),
        (Family::Dst, 5) => (Family::Dst, 6),
        (Family::Dst, 6) => (Family::Dst, 5),
        _ => return None,
    };
    Some(TransformId {
        family,
        ty,
        ..t.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &[f64]) -> bool {
        a.iter().count() == b.len()
            && a.transpose()
                .iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn small_matrices() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(
            &dtt_matrix(&TransformId::dct(1, 2)).unwrap(),
            &[1., 1., 1., -1.]
        ));
        assert!(close(
            &dtt_matrix(&TransformId::dct(2, 2)).unwrap(),
            &[1., 1., s, -s]
        ));
        assert!(close(&dtt_matrix(&TransformId::dst(1, 1)).unwrap(), &[1.]));
        assert!(dtt_matrix(&TransformId::dct(1, 1)).is_err());
    }

    #[test]
    fn poly_dct2_2() {
        let p = real_matrix(&TransformId::dct(2, 2).polynomial()).unwrap();
        assert!(close(&p, &[1., 1., 1., -1.]));
    }

    #[test]
    fn spec_round_trip() {
        for s in [
            "dct3",
            "dst7:poly",
            "dct4:inv:t",
            "dft3",
            "dfta=-1/2",
            "dft",
        ] {
            let id = TransformId::parse_spec(s, 4).unwrap();
            assert_eq!(id.spec_name(), s);
        }
        assert!(TransformId::parse_spec("idct3", 4).unwrap().inverse);
        assert!(TransformId::parse_spec("foo", 4).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/3"), Some(Rational64::new(1, 3)));
        assert_eq!(parse_rational("0.25"), Some(Rational64::new(1, 4)));
        assert_eq!(parse_rational("-2"), Some(Rational64::from_integer(-2)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn dft3_2() {
        let m = dft_matrix(&TransformId::dft(3, 2)).unwrap();
        let w4 = Complex64::new(0.0, -1.0);
        assert!((m[(0, 1)] - w4).norm() < 1e-15);
        assert!((m[(1, 1)] + w4).norm() < 1e-15);
    }
}
