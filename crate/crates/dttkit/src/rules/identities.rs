//! Rewrite identities between transforms: duality, skew-to-plain
//! translation, base changes and transposition/inversion relations.

use num_rational::Rational64;

use super::blocks::{d_diag, s_matrix, x_inverse, x_matrix};
use super::sparse::diagonal_formula;
use super::RuleError;
use crate::formula::Formula;
use crate::reference::{dual, Family, TransformId};

fn inapplicable(t: &TransformId, why: &str) -> RuleError {
    RuleError::Inapplicable(format!("{t}: {why}"))
}

fn leaf(t: TransformId) -> Formula<f64> {
    Formula::leaf(t)
}

fn alternating(n: usize) -> Formula<f64> {
    diagonal_formula(
        (0..n)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect(),
    )
}

/// Operation-free translation to the dual transform:
/// `DTT = diag((−1)^k) · DTT′ · J`, and for inverses `iDTT = J · iDTT′ · diag((−1)^k)`.
pub fn duality(t: &TransformId) -> Result<Formula<f64>, RuleError> {
    if t.is_skew() {
        return Err(inapplicable(t, "duality holds only for plain transforms"));
    }
    if t.transposed {
        return Err(inapplicable(t, "apply duality before transposition"));
    }
    let d = dual(t).ok_or_else(|| inapplicable(t, "no dual transform"))?;
    let n = t.n;
    Ok(if t.inverse {
        Formula::Compose(vec![Formula::OppIdentity(n), leaf(d), alternating(n)])
    } else {
        Formula::Compose(vec![alternating(n), leaf(d), Formula::OppIdentity(n)])
    })
}

/// Translation of a skew T-group transform to the plain one through the
/// x-shaped matrix: `DTT(r) = DTT · X(r)` and `iDTT(r) = X(r)⁻¹ · DTTᵀ`.
pub fn skew_translate(t: &TransformId) -> Result<Formula<f64>, RuleError> {
    if !t.is_t_group() || !t.is_skew() || t.transposed {
        return Err(inapplicable(t, "needs a skew T-group transform"));
    }
    let x = x_matrix(t)?;
    let plain = t.clone().with_r(None);
    if t.inverse {
        let mut fwd = plain.clone();
        fwd.inverse = false;
        Ok(Formula::Compose(vec![
            x_inverse(&x)?.to_formula(),
            leaf(fwd.transposed()),
        ]))
    } else {
        Ok(Formula::Compose(vec![leaf(plain), x.to_formula()]))
    }
}

/// `DCT-4 = S · DCT-2 · ½D(1/2)⁻¹` and `iDCT-4(r) = S · iDCT-3(r) · ½D(r)⁻¹`.
pub fn base_change(t: &TransformId) -> Result<Formula<f64>, RuleError> {
    if t.family != Family::Dct || t.ty != 4 || t.poly || t.transposed {
        return Err(inapplicable(t, "base change relates DCT-4 to DCT-2/iDCT-3"));
    }
    let n = t.n;
    let (middle, r) = if t.inverse {
        (TransformId::dct(3, n).with_r(t.r).inv(), t.skew())
    } else if t.is_skew() {
        return Err(inapplicable(
            t,
            "use the combined base change for skew DCT-4",
        ));
    } else {
        (TransformId::dct(2, n), Rational64::new(1, 2))
    };
    let d: Vec<f64> = d_diag(n, r)?.into_iter().map(|v| 0.5 / v).collect();
    Ok(Formula::Compose(vec![
        s_matrix(n).to_formula(),
        leaf(middle),
        diagonal_formula(d),
    ]))
}

/// `DCT-4(r) = S · DCT-2 · ½D(1/2)⁻¹ · X(r)` with the diagonal fused into
/// the x-shaped matrix.
pub fn base_change_skew(t: &TransformId) -> Result<Formula<f64>, RuleError> {
    if t.family != Family::Dct || t.ty != 4 || t.poly || t.inverse || t.transposed || !t.is_skew() {
        return Err(inapplicable(t, "needs a skew DCT-4"));
    }
    let n = t.n;
    let d: Vec<f64> = d_diag(n, Rational64::new(1, 2))?
        .into_iter()
        .map(|v| 0.5 / v)
        .collect();
    let fused = x_matrix(t)?.scale_rows(&d);
    Ok(Formula::Compose(vec![
        s_matrix(n).to_formula(),
        leaf(TransformId::dct(2, n)),
        fused.to_formula(),
    ]))
}

/// The transposed partner of a transform: `DCT-2 = DCT-3ᵀ`, `DST-2 = DST-3ᵀ`,
/// `DCT-6 = DCT-7ᵀ`, `DST-6 = DST-7ᵀ` and the reverse directions.
pub fn transpose_partner(t: &TransformId) -> Option<TransformId> {
    if !t.is_dtt() || t.is_skew() || t.inverse || t.transposed || t.poly {
        return None;
    }
    let ty = match t.ty {
        2 => 3,
        3 => 2,
        6 => 7,
        7 => 6,
        _ => return None,
    };
    let mut p = t.clone();
    p.ty = ty;
    Some(p)
}

pub fn transpose_pair(t: &TransformId) -> Result<Formula<f64>, RuleError> {
    let p = transpose_partner(t).ok_or_else(|| inapplicable(t, "no transposed partner"))?;
    Ok(leaf(p.transposed()))
}

/// Plain transforms equal to their own transpose.
pub fn is_symmetric(t: &TransformId) -> bool {
    if t.is_skew() || t.inverse || t.poly {
        return false;
    }
    match t.family {
        Family::Dct | Family::Dst => matches!(t.ty, 1 | 4 | 5 | 8),
        Family::Dft => matches!(t.ty, 1 | 4),
        Family::DftA => false,
    }
}

/// Relations between plain transforms and the normalized inverses:
/// `iDTT = DTTᵀ` for plain T-group types, and `DCT-2 = iDCT-3`,
/// `DST-2 = iDST-3`.
pub fn inverse_identity(t: &TransformId) -> Result<Formula<f64>, RuleError> {
    if t.is_skew() || t.poly || t.transposed {
        return Err(inapplicable(t, "needs a plain non-polynomial transform"));
    }
    if t.inverse {
        let mut fwd = t.clone();
        fwd.inverse = false;
        return Ok(leaf(fwd.transposed()));
    }
    if t.is_dtt() && t.ty == 2 {
        let mut i = t.clone();
        i.ty = 3;
        return Ok(leaf(i.inv()));
    }
    Err(inapplicable(t, "no inverse identity"))
}
