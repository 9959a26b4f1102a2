//! The rule catalog: every algorithm maps a transform (plus an optional
//! split parameter) to a one-level formula whose leaves are smaller
//! transforms.  Base cases and rewrite identities live alongside.

pub mod base;
pub mod blocks;
pub mod derive;
pub mod dft;
pub mod identities;
pub mod sparse;

use num_rational::Rational64;
use thiserror::Error;

use crate::chebyshev::ChebKind;
use crate::formula::{Formula, FormulaError, Leaf, Scalar};
use crate::reference::{Family, GroupTag, ReferenceError, TransformId};
use derive::{back_substitution, factorize, t_decomposition, Part, TDecomposition, DENSE_CAP};
use sparse::{diagonal_formula, permutation_formula, Sparse};

pub use base::base_case;

/// Errors raised by rule expansion.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("rule not applicable: {0}")]
    Inapplicable(String),
    #[error("unknown rule tag {0:?}")]
    UnknownTag(String),
    #[error("derivation failed: {0}")]
    Derivation(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
}

/// Stable rule tags, in catalog order.
pub const TAGS: &[&str] = &[
    "base",
    "definition",
    "fact-U2n-1",
    "fact-U2n",
    "fact-V",
    "fact-W",
    "via-T-basis",
    "via-T-basis-fused",
    "via-U-basis",
    "inverted",
    "twiddle",
    "u-group-decomp",
    "v-group-decomp",
    "w-group-decomp",
    "duality",
    "skew-translate",
    "base-change",
    "base-change-skew",
    "transpose",
    "transpose-pair",
    "symmetric",
    "inverse-identity",
    "dft-radix2",
    "dft-ct",
    "dft-twiddle",
];

/// Largest size for which `definition` is offered as a regular candidate.
/// Up to [`DENSE_CAP`] the planner still uses it as a last resort when no
/// structured algorithm exists.
pub const DEFINITION_MAX: usize = 3;

/// One admissible expansion of a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub tag: &'static str,
    pub k: Option<usize>,
}

impl Candidate {
    fn new(tag: &'static str) -> Self {
        Candidate { tag, k: None }
    }
    fn split(tag: &'static str, k: usize) -> Self {
        Candidate { tag, k: Some(k) }
    }
}

impl std::fmt::Display for Candidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.k {
            Some(k) => write!(f, "{}[k={}]", self.tag, k),
            None => f.write_str(self.tag),
        }
    }
}

fn divisors(n: usize) -> impl Iterator<Item = usize> {
    (2..n).filter(move |k| n.is_multiple_of(*k))
}

fn skew_in_open_unit(t: &TransformId) -> bool {
    let r = t.skew();
    r > Rational64::from_integer(0) && r < Rational64::from_integer(1)
}

/// Sizes `(plain part, M)` of a V/W-group decomposition with odd `k`, or
/// `None` when `n` is not of the required form.
fn vw_shape(t: &TransformId, k: usize) -> Option<(usize, usize)> {
    if k < 3 || k.is_multiple_of(2) {
        return None;
    }
    // DCT-7, DST-8, DCT-5, DCT-6 have size km + (k+1)/2 and a plain part of
    // size m+1; the others have size km + (k−1)/2 and a plain part of size m.
    let larger = matches!(t.short().as_str(), "C7" | "S8" | "C5" | "C6");
    let off = if larger { k.div_ceil(2) } else { (k - 1) / 2 };
    let rest = t.n.checked_sub(off)?;
    if rest == 0 || rest % k != 0 {
        return None;
    }
    let m = rest / k;
    Some((if larger { m + 1 } else { m }, m))
}

/// Admissible expansions of `t`, in catalog order.
pub fn candidates(t: &TransformId) -> Vec<Candidate> {
    let mut out = Vec::new();
    if t.validate().is_err() {
        return out;
    }
    let n = t.n;
    if t.transposed {
        out.push(Candidate::new("transpose"));
        return out;
    }
    if t.is_dft() {
        if t.family == Family::Dft && t.ty == 1 {
            if n <= 2 {
                out.push(Candidate::new("base"));
            }
            if n > 2 && n.is_multiple_of(2) {
                out.push(Candidate::new("dft-radix2"));
            }
            out.extend(divisors(n).map(|k| Candidate::split("dft-ct", k)));
        } else {
            out.push(Candidate::new("dft-twiddle"));
        }
        if n <= DEFINITION_MAX {
            out.push(Candidate::new("definition"));
        }
        if identities::is_symmetric(t) {
            out.push(Candidate::new("symmetric"));
        }
        return out;
    }
    if base_case(t).is_some() {
        out.push(Candidate::new("base"));
    }
    if n <= DEFINITION_MAX {
        out.push(Candidate::new("definition"));
    }
    let group = t.group().expect("DTT has a group");
    let plain = !t.is_skew();
    match group {
        GroupTag::T => {
            if t.inverse {
                if skew_in_open_unit(t) {
                    out.extend(divisors(n).map(|k| Candidate::split("inverted", k)));
                }
            } else if skew_in_open_unit(t) {
                out.extend(divisors(n).map(|k| Candidate::split("via-T-basis", k)));
                out.extend(
                    divisors(n)
                        .filter(|&k| k <= 3)
                        .map(|k| Candidate::split("via-T-basis-fused", k)),
                );
                out.extend(divisors(n).map(|k| Candidate::split("via-U-basis", k)));
                if !t.poly {
                    out.extend(divisors(n).map(|k| Candidate::split("twiddle", k)));
                }
            }
        }
        GroupTag::U => {
            if fact_u_parts(t, false).is_some() {
                out.push(Candidate::new("fact-U2n-1"));
            }
            if fact_u_parts(t, true).is_some() {
                out.push(Candidate::new("fact-U2n"));
            }
            if n <= DENSE_CAP {
                out.extend(
                    (2..=n)
                        .filter(|&k| u_decomp_parts(t, k).is_some())
                        .map(|k| Candidate::split("u-group-decomp", k)),
                );
            }
        }
        GroupTag::V | GroupTag::W => {
            let (fact, decomp) = if group == GroupTag::V {
                ("fact-V", "v-group-decomp")
            } else {
                ("fact-W", "w-group-decomp")
            };
            if n <= DENSE_CAP {
                if vw_fact_parts(t).is_some() {
                    out.push(Candidate::new(fact));
                }
                out.extend(
                    (3..=n)
                        .filter(|&k| vw_decomp_parts(t, k).is_some())
                        .map(|k| Candidate::split(decomp, k)),
                );
            }
        }
    }
    if plain && !t.poly && reference_dual(t) {
        out.push(Candidate::new("duality"));
    }
    if t.is_t_group() && t.is_skew() && !t.poly {
        out.push(Candidate::new("skew-translate"));
    }
    if t.family == Family::Dct && t.ty == 4 && !t.poly {
        if t.inverse || !t.is_skew() {
            out.push(Candidate::new("base-change"));
        } else {
            out.push(Candidate::new("base-change-skew"));
        }
    }
    if identities::transpose_partner(t).is_some() {
        out.push(Candidate::new("transpose-pair"));
    }
    if identities::is_symmetric(t) {
        out.push(Candidate::new("symmetric"));
    }
    if plain && !t.poly && (t.inverse || t.ty == 2) {
        out.push(Candidate::new("inverse-identity"));
    }
    out
}

fn reference_dual(t: &TransformId) -> bool {
    crate::reference::dual(t).is_some()
}

/// Expand `t` by the rule `tag` (with split `k` where the rule takes one).
pub fn expand<S: Scalar>(
    tag: &str,
    t: &TransformId,
    k: Option<usize>,
) -> Result<Formula<S>, RuleError> {
    t.validate()?;
    let need_k = || k.ok_or_else(|| RuleError::Inapplicable(format!("{tag} needs a split k")));
    let real = |f: Result<Formula<f64>, RuleError>| f.map(|f| f.lift::<S>());
    match tag {
        "base" => {
            if t.is_dft() {
                return dft_base(t);
            }
            base_case(t)
                .map(|f| f.lift::<S>())
                .ok_or_else(|| RuleError::Inapplicable(format!("no base case for {t}")))
        }
        "definition" => {
            if t.n > DENSE_CAP {
                return Err(RuleError::Inapplicable(format!(
                    "{t} too large for a dense block"
                )));
            }
            S::leaf_matrix(t)
                .map(|m| Formula::from_matrix(&m))
                .map_err(RuleError::Inapplicable)
        }
        "fact-U2n-1" => real(fact_u(t, false)),
        "fact-U2n" => real(fact_u(t, true)),
        "fact-V" | "fact-W" => {
            check_group(
                t,
                if tag == "fact-V" {
                    GroupTag::V
                } else {
                    GroupTag::W
                },
            )?;
            let parts = vw_fact_parts(t)
                .ok_or_else(|| RuleError::Inapplicable(format!("{t} has no {tag} form")))?;
            real(part_rule(t, parts))
        }
        "via-T-basis" => real(t_group(t, need_k()?, TForm::Unfused)),
        "via-T-basis-fused" => {
            let k = need_k()?;
            if k > 3 {
                return Err(RuleError::Inapplicable("fused form only for k <= 3".into()));
            }
            real(t_group(t, k, TForm::Fused))
        }
        "via-U-basis" => real(t_group(t, need_k()?, TForm::UBasis)),
        "twiddle" => real(t_group(t, need_k()?, TForm::Twiddle)),
        "inverted" => real(inverted(t, need_k()?)),
        "u-group-decomp" => {
            let parts = u_decomp_parts(t, need_k()?)
                .ok_or_else(|| RuleError::Inapplicable(format!("{t} has no U-group split")))?;
            real(part_rule(t, parts))
        }
        "v-group-decomp" | "w-group-decomp" => {
            check_group(
                t,
                if tag == "v-group-decomp" {
                    GroupTag::V
                } else {
                    GroupTag::W
                },
            )?;
            let parts = vw_decomp_parts(t, need_k()?)
                .ok_or_else(|| RuleError::Inapplicable(format!("{t} has no split {k:?}")))?;
            real(part_rule(t, parts))
        }
        "duality" => real(identities::duality(t)),
        "skew-translate" => real(identities::skew_translate(t)),
        "base-change" => real(identities::base_change(t)),
        "base-change-skew" => real(identities::base_change_skew(t)),
        "transpose" => {
            if !t.transposed {
                return Err(RuleError::Inapplicable(format!("{t} is not transposed")));
            }
            Ok(Formula::<S>::leaf(t.untransposed()).transpose())
        }
        "transpose-pair" => real(identities::transpose_pair(t)),
        "symmetric" => {
            if !identities::is_symmetric(t) {
                return Err(RuleError::Inapplicable(format!("{t} is not symmetric")));
            }
            Ok(Formula::leaf(t.transposed()))
        }
        "inverse-identity" => real(identities::inverse_identity(t)),
        "dft-radix2" => dft::radix2(t),
        "dft-ct" => dft::cooley_tukey(t, need_k()?),
        "dft-twiddle" => dft::twiddle_variant(t),
        other => Err(RuleError::UnknownTag(other.to_string())),
    }
}

fn dft_base<S: Scalar>(t: &TransformId) -> Result<Formula<S>, RuleError> {
    match (t.family, t.ty, t.n) {
        (Family::Dft, 1, 1) => Ok(Formula::Identity(1)),
        (Family::Dft, 1, 2) => Ok(Formula::Butterfly),
        _ => Err(RuleError::Inapplicable(format!("no base case for {t}"))),
    }
}

fn check_group(t: &TransformId, g: GroupTag) -> Result<(), RuleError> {
    if t.group() != Some(g) || t.inverse || t.transposed {
        return Err(RuleError::Inapplicable(format!("{t} is not in the {g}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// T-group decompositions.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TForm {
    Unfused,
    Fused,
    UBasis,
    Twiddle,
}

fn leaf_of(id: TransformId) -> Formula<f64> {
    Formula::leaf(id)
}

fn scaled_leaf(id: TransformId, scale: Vec<f64>) -> Formula<f64> {
    if scale.iter().all(|&v| v == 1.0) {
        Formula::leaf(id)
    } else {
        Formula::Leaf(Leaf {
            id,
            scale: Some(scale),
        })
    }
}

/// The row permutation, shown as the named `K_m^n` when it matches.
fn row_permutation(perm: Vec<usize>, n: usize, m: usize) -> Formula<f64> {
    if blocks::k_map(n, m).ok().as_ref() == Some(&perm) {
        if let Ok(f) = blocks::k_perm(n, m) {
            return f;
        }
    }
    permutation_formula(perm)
}

fn compose(factors: Vec<Formula<f64>>) -> Formula<f64> {
    let mut out: Vec<Formula<f64>> = Vec::with_capacity(factors.len());
    for f in factors {
        match f {
            Formula::Identity(_) if !out.is_empty() => {}
            Formula::Compose(inner) => out.extend(inner),
            f => out.push(f),
        }
    }
    if out.len() > 1 {
        out.retain(|f| !matches!(f, Formula::Identity(_)));
    }
    if out.len() == 1 {
        out.pop().expect("one factor")
    } else {
        Formula::Compose(out)
    }
}

fn direct_sum(parts: Vec<Formula<f64>>) -> Formula<f64> {
    if parts.len() == 1 {
        parts.into_iter().next().expect("one part")
    } else {
        Formula::DirectSum(parts)
    }
}

fn t_group(t: &TransformId, k: usize, form: TForm) -> Result<Formula<f64>, RuleError> {
    if t.inverse || t.transposed || !t.is_t_group() {
        return Err(RuleError::Inapplicable(format!(
            "{t} is not a forward T-group transform"
        )));
    }
    if form == TForm::Twiddle && t.poly {
        return Err(RuleError::Inapplicable(
            "twiddle form only for non-polynomial transforms".into(),
        ));
    }
    let kind = if form == TForm::UBasis {
        ChebKind::U
    } else {
        ChebKind::T
    };
    let d: TDecomposition = t_decomposition(t, k, kind)?;
    let (n, m) = (t.n, d.m);
    let perm = row_permutation(d.perm.clone(), n, m);
    let (dinv, levels) = back_substitution(&d.a)?;
    let mut fine_parts = Vec::with_capacity(k);
    let mut twiddle_parts = Vec::new();
    for f in &d.fine {
        if form == TForm::Twiddle {
            let x = blocks::x_matrix(f)?;
            fine_parts.push(leaf_of(f.clone().with_r(None)));
            twiddle_parts.push(x.to_formula());
        } else {
            fine_parts.push(leaf_of(f.clone()));
        }
    }
    let mut factors = vec![perm, direct_sum(fine_parts)];
    if form == TForm::Twiddle {
        factors.push(direct_sum(twiddle_parts));
    }
    if form == TForm::Fused {
        let blocks_j = (0..m)
            .map(|j| scaled_leaf(d.coarse.clone(), (0..k).map(|i| dinv[i * m + j]).collect()))
            .collect();
        factors.push(Formula::Stride { n, m: k });
        factors.push(direct_sum(blocks_j));
        factors.push(Formula::Stride { n, m });
    } else {
        factors.push(Formula::KronLeft(Box::new(leaf_of(d.coarse.clone())), m));
        factors.push(diagonal_formula(dinv));
    }
    factors.extend(levels.iter().map(Sparse::to_formula));
    Ok(compose(factors))
}

/// Inverse T-group transforms:
/// `iDTT_n(r) = C⁻¹ · (iDCT-3_k(r) ⊗ I_m) · (⊕ iDTT_m(r_i)) · Pᵀ`.
fn inverted(t: &TransformId, k: usize) -> Result<Formula<f64>, RuleError> {
    if !t.inverse || t.transposed || !t.is_t_group() {
        return Err(RuleError::Inapplicable(format!(
            "{t} is not an inverse T-group transform"
        )));
    }
    let mut fwd = t.clone();
    fwd.inverse = false;
    let d = t_decomposition(&fwd, k, ChebKind::T)?;
    let n = t.n;
    let m = d.m;
    let nn = crate::reference::inverse_normalizer(&fwd.clone().with_r(None))?;
    let nk = crate::reference::inverse_normalizer(&TransformId::dct(3, k))?;
    let nm = crate::reference::inverse_normalizer(&fwd.clone().with_r(None).with_n(m))?;
    let col: Vec<f64> = (0..n).map(|c| 1.0 / (nk[c / m] * nm[c % m])).collect();
    let c_inv = d.a.scale_rows(&nn).scale_cols(&col);
    let fine: Vec<Formula<f64>> = d.fine.iter().map(|f| leaf_of(f.clone().inv())).collect();
    let perm_t = crate::formula::invert_map(&d.perm);
    let perm_f = if blocks::k_map(n, m).ok().as_ref() == Some(&d.perm) {
        blocks::m_perm(n, k)?
    } else {
        permutation_formula(perm_t)
    };
    Ok(compose(vec![
        c_inv.to_formula(),
        Formula::KronLeft(Box::new(leaf_of(d.coarse.clone().inv())), m),
        direct_sum(fine),
        perm_f,
    ]))
}

// ---------------------------------------------------------------------------
// Factorization and decomposition rules of the U, V and W groups.

fn dtt(family: Family, ty: u8, n: usize, poly: bool) -> TransformId {
    match family {
        Family::Dct => TransformId::dct(ty, n),
        _ => TransformId::dst(ty, n),
    }
    .with_poly(poly)
}

/// Parts of the two U-group factorizations (`U_{2n−1} = 2U_{n−1}T_n` when
/// `even_u` is false, `U_{2n} = V_nW_n` when true).
fn fact_u_parts(t: &TransformId, even_u: bool) -> Option<Vec<Part>> {
    if t.group() != Some(GroupTag::U) || t.inverse || t.transposed {
        return None;
    }
    let n = t.n;
    let p = t.poly;
    let (c, s) = (Family::Dct, Family::Dst);
    let parts = match (t.short().as_str(), even_u) {
        ("C1", false) if n % 2 == 1 && n >= 3 => {
            let m = (n - 1) / 2;
            vec![dtt(c, 1, m + 1, p), dtt(c, 3, m, p)]
        }
        ("S1", false) if n % 2 == 1 && n >= 3 => {
            let m = n.div_ceil(2);
            vec![dtt(s, 3, m, p), dtt(s, 1, m - 1, p)]
        }
        ("C2", false) if n.is_multiple_of(2) => vec![dtt(c, 2, n / 2, p), dtt(c, 4, n / 2, p)],
        ("S2", false) if n.is_multiple_of(2) => vec![dtt(s, 4, n / 2, p), dtt(s, 2, n / 2, p)],
        ("C1", true) if n.is_multiple_of(2) => vec![dtt(c, 5, n / 2, p), dtt(c, 7, n / 2, p)],
        ("S1", true) if n.is_multiple_of(2) => vec![dtt(s, 7, n / 2, p), dtt(s, 5, n / 2, p)],
        ("C2", true) if n % 2 == 1 && n >= 3 => {
            let m = n / 2;
            vec![dtt(c, 6, m + 1, p), dtt(c, 8, m, p)]
        }
        ("S2", true) if n % 2 == 1 && n >= 3 => {
            let m = n / 2;
            vec![dtt(s, 8, m + 1, p), dtt(s, 6, m, p)]
        }
        _ => return None,
    };
    Some(parts.into_iter().map(Part::Plain).collect())
}

/// `B_{2m}` or `B_{2m+1}` for the factorization of a size-`n` transform.
fn fact_u_base_change(n: usize) -> Result<Formula<f64>, RuleError> {
    if n.is_multiple_of(2) {
        blocks::b_2m(n / 2)
    } else {
        Ok(blocks::b_2m1(n / 2))
    }
}

fn fact_u(t: &TransformId, even_u: bool) -> Result<Formula<f64>, RuleError> {
    let parts = fact_u_parts(t, even_u)
        .ok_or_else(|| RuleError::Inapplicable(format!("{t} has no such factorization")))?;
    let perm = derive::part_permutation(t, &parts)?;
    let sum = direct_sum(parts.iter().filter_map(part_formula_plain).collect());
    Ok(compose(vec![
        permutation_formula(perm),
        sum,
        fact_u_base_change(t.n)?,
    ]))
}

fn part_formula_plain(p: &Part) -> Option<Formula<f64>> {
    match p {
        Part::Plain(id) if id.n > 0 => Some(leaf_of(id.clone())),
        _ => None,
    }
}

/// U-group decomposition through `U_{km−1} = U_{k−1}(T_m)·U_{m−1}`.
fn u_decomp_parts(t: &TransformId, k: usize) -> Option<Vec<Part>> {
    if t.group() != Some(GroupTag::U) || t.inverse || t.transposed || k < 2 {
        return None;
    }
    let n = match t.short().as_str() {
        "C1" => t.n - 1,
        "S1" => t.n + 1,
        _ => t.n,
    };
    if n % k != 0 || n / k < 2 {
        return None;
    }
    let m = n / k;
    let m_prime = match t.short().as_str() {
        "C1" => m + 1,
        "S1" => m - 1,
        _ => m,
    };
    let kind = t.basis()?;
    let mut parts = Vec::new();
    if m_prime > 0 {
        parts.push(Part::Plain(t.clone().with_n(m_prime)));
    }
    parts.push(Part::Decomp {
        coarse: TransformId::dst(1, k - 1).polynomial(),
        kind,
        m,
        poly: t.poly,
    });
    Some(parts)
}

/// The factorization with `T_{2m+1} ∓ 1/2`: one skew T-group part at
/// `r = 1/3` (V-group) or `r = 2/3` (W-group) plus a smaller transform.
fn vw_fact_parts(t: &TransformId) -> Option<Vec<Part>> {
    if !matches!(t.group(), Some(GroupTag::V | GroupTag::W)) || t.inverse || t.transposed {
        return None;
    }
    let (plain, m) = vw_shape(t, 3)?;
    let kind = t.basis()?;
    let (fam, ty) = derive::fine_kind(kind);
    let r = if t.group() == Some(GroupTag::V) {
        Rational64::new(1, 3)
    } else {
        Rational64::new(2, 3)
    };
    let skew = Part::Plain(dtt(fam, ty, 2 * m + 1, t.poly).with_skew(r));
    let rest = Part::Plain(t.clone().with_n(plain));
    let mut parts = if t.group() == Some(GroupTag::V) {
        vec![skew, rest]
    } else {
        vec![rest, skew]
    };
    parts.retain(|p| p.size() > 0);
    if plain == 0 {
        return None;
    }
    Some(parts)
}

/// V/W-group decomposition with odd `k` through a coarse polynomial
/// DST-7 (V-group) or DST-5 (W-group) of size `(k−1)/2`.
fn vw_decomp_parts(t: &TransformId, k: usize) -> Option<Vec<Part>> {
    if !matches!(t.group(), Some(GroupTag::V | GroupTag::W)) || t.inverse || t.transposed {
        return None;
    }
    let (plain, m) = vw_shape(t, k)?;
    if m == 0 || plain == 0 {
        return None;
    }
    let coarse_ty = if t.group() == Some(GroupTag::V) { 7 } else { 5 };
    Some(vec![
        Part::Plain(t.clone().with_n(plain)),
        Part::Decomp {
            coarse: TransformId::dst(coarse_ty, (k - 1) / 2).polynomial(),
            kind: t.basis()?,
            m: 2 * m + 1,
            poly: t.poly,
        },
    ])
}

/// Formula of a single part with leaves carrying the parent's poly flag.
fn part_formula(p: &Part) -> Result<Formula<f64>, RuleError> {
    match p {
        Part::Plain(id) => Ok(leaf_of(id.clone())),
        Part::Decomp { coarse, m, .. } => {
            let fine: Vec<Formula<f64>> = p.fine()?.into_iter().map(leaf_of).collect();
            Ok(compose(vec![
                direct_sum(fine),
                Formula::KronLeft(Box::new(leaf_of(coarse.clone())), *m),
            ]))
        }
    }
}

fn part_rule(t: &TransformId, parts: Vec<Part>) -> Result<Formula<f64>, RuleError> {
    let poly_parts: Vec<Part> = parts
        .iter()
        .map(|p| match p {
            Part::Plain(id) => Part::Plain(id.clone().with_poly(true)),
            Part::Decomp {
                coarse, kind, m, ..
            } => Part::Decomp {
                coarse: coarse.clone(),
                kind: *kind,
                m: *m,
                poly: true,
            },
        })
        .collect();
    if !t.poly {
        // The scaling diagonal passes through only when every part has the
        // parent's basis kind.
        let kind = t.basis();
        let same = parts.iter().all(|p| match p {
            Part::Plain(id) => id.basis() == kind,
            Part::Decomp { kind: k, .. } => Some(*k) == kind,
        });
        if !same {
            return Err(RuleError::Inapplicable(format!(
                "{t}: parts have a different basis; only the polynomial version applies"
            )));
        }
    }
    let fact = factorize(t, poly_parts)?;
    let sum = direct_sum(parts.iter().map(part_formula).collect::<Result<_, _>>()?);
    Ok(compose(vec![
        permutation_formula(fact.perm.clone()),
        sum,
        fact.b.to_formula(),
    ]))
}
