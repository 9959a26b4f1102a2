//! Derivation of permutations and base-change matrices.
//!
//! Two engines are provided:
//!
//! * an exact sparse engine for the T-group decompositions
//!   `p = q(T_m)`: the induction basis `b' = (C_j · c_i(T_m))` is expanded
//!   in the parent basis with the product rule `T_s·C_j = ½(C_{j+s} + C_{j−s})`,
//!   which needs no dense linear algebra and scales to large sizes;
//! * a dense numeric engine for the remaining decompositions: the
//!   permutation is found by matching zeros exactly and the base change is
//!   solved for, snapped to small rationals and checked.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_rational::Rational64;

use super::sparse::{snap_rational, Sparse};
use super::RuleError;
use crate::chebyshev::ChebKind;
use crate::reference::{poly_dtt_matrix, rel_error, Family, TransformId};

/// Largest size handled by the dense engine.
pub const DENSE_CAP: usize = 256;

/// The T-group member whose skew variant decomposes a module with the
/// given basis kind: T → DCT-3, U → DST-3, V → DCT-4, W → DST-4.
pub fn fine_kind(kind: ChebKind) -> (Family, u8) {
    match kind {
        ChebKind::T => (Family::Dct, 3),
        ChebKind::U => (Family::Dst, 3),
        ChebKind::V => (Family::Dct, 4),
        ChebKind::W => (Family::Dst, 4),
    }
}

fn skew_id(family: Family, ty: u8, n: usize, r: Rational64, poly: bool) -> TransformId {
    let base = match family {
        Family::Dct => TransformId::dct(ty, n),
        _ => TransformId::dst(ty, n),
    };
    base.with_skew(r).with_poly(poly)
}

/// Map each parent zero to its position in the concatenated child zeros:
/// the row permutation `P` with `out_i = y[map[i]]`.
pub fn match_zeros(parent: &[Rational64], parts: &[Rational64]) -> Result<Vec<usize>, RuleError> {
    if parent.len() != parts.len() {
        return Err(RuleError::Derivation(format!(
            "zero count mismatch: {} vs {}",
            parent.len(),
            parts.len()
        )));
    }
    let mut pos: HashMap<Rational64, usize> = HashMap::with_capacity(parts.len());
    for (i, z) in parts.iter().enumerate() {
        if pos.insert(*z, i).is_some() {
            return Err(RuleError::Derivation("repeated zero".into()));
        }
    }
    parent
        .iter()
        .map(|z| {
            pos.get(z)
                .copied()
                .ok_or_else(|| RuleError::Derivation(format!("unmatched zero {z}")))
        })
        .collect()
}

/// Result of the exact T-group decomposition.
#[derive(Debug, Clone)]
pub struct TDecomposition {
    pub k: usize,
    pub m: usize,
    /// Coarse transform: `DCT-3_k(r)` (T-basis) or poly `DST-3_k(r)` (U-basis).
    pub coarse: TransformId,
    /// Skew children `DTT_m(ρ_i)` of the parent's type, one per coarse zero.
    pub fine: Vec<TransformId>,
    /// Row permutation.
    pub perm: Vec<usize>,
    /// The induction basis expressed in the parent basis (columns); upper
    /// triangular.  The base change is its inverse.
    pub a: Sparse,
}

/// Expansion of the coarse basis polynomial `c_i` in the T basis.
fn coarse_expansion(kind: ChebKind, i: usize) -> Vec<(usize, f64)> {
    match kind {
        ChebKind::T => vec![(i, 1.0)],
        _ => (i % 2..=i)
            .step_by(2)
            .map(|s| (s, if s == 0 { 1.0 } else { 2.0 }))
            .collect(),
    }
}

/// `T_s · C_j` expanded in the `C` basis.
fn t_times(kind: ChebKind, s: usize, j: usize) -> Vec<(usize, f64)> {
    if s == 0 {
        return vec![(j, 1.0)];
    }
    let mut out = vec![(j + s, 0.5)];
    let low = j as i64 - s as i64;
    if low >= 0 {
        out.push((low as usize, 0.5));
    } else if let Some((sign, idx)) = kind.reflect(-low) {
        out.push((idx, 0.5 * sign as f64));
    }
    out
}

/// Decompose a T-group transform of size `n = k·m` through `T_n = T_k(T_m)`
/// with the given coarse basis (T or U).
pub fn t_decomposition(
    t: &TransformId,
    k: usize,
    coarse_kind: ChebKind,
) -> Result<TDecomposition, RuleError> {
    let n = t.n;
    if !t.is_t_group() || t.inverse || t.transposed {
        return Err(RuleError::Inapplicable("needs a T-group transform".into()));
    }
    if k < 2 || k >= n || !n.is_multiple_of(k) {
        return Err(RuleError::Inapplicable(format!(
            "split {k} does not divide {n} properly"
        )));
    }
    let r = t.skew();
    if r <= Rational64::from_integer(0) || r >= Rational64::from_integer(1) {
        return Err(RuleError::Inapplicable(
            "skew parameter must lie in (0, 1)".into(),
        ));
    }
    let m = n / k;
    let kind = t.basis().expect("T-group has a basis");
    let coarse = match coarse_kind {
        ChebKind::T => TransformId::dct(3, k).with_skew(r),
        ChebKind::U => TransformId::dst(3, k).with_skew(r).polynomial(),
        _ => {
            return Err(RuleError::Inapplicable(
                "coarse basis must be T or U".into(),
            ))
        }
    };
    let rho = coarse.zero_angles()?;
    let fine: Vec<TransformId> = rho
        .iter()
        .map(|&q| skew_id(t.family, t.ty, m, q, t.poly))
        .collect();
    let mut child_zeros = Vec::with_capacity(n);
    for f in &fine {
        child_zeros.extend(f.zero_angles()?);
    }
    let perm = match_zeros(&t.zero_angles()?, &child_zeros)?;

    let mut a = Sparse::zeros(n, n);
    for i in 0..k {
        for j in 0..m {
            let col = i * m + j;
            for (s, w) in coarse_expansion(coarse_kind, i) {
                for (row, v) in t_times(kind, s * m, j) {
                    a.add(row, col, w * v);
                }
            }
        }
    }
    debug_assert!(a.is_upper_triangular());
    Ok(TDecomposition {
        k,
        m,
        coarse,
        fine,
        perm,
        a,
    })
}

/// Split `A = U·D` (`D = diag(A)`, `U` unit upper triangular) and return
/// `D⁻¹` together with the back-substitution factors of `U⁻¹`, rightmost
/// (applied first) last.
pub fn back_substitution(a: &Sparse) -> Result<(Vec<f64>, Vec<Sparse>), RuleError> {
    let n = a.rows;
    let d = a.diagonal();
    if d.contains(&0.0) {
        return Err(RuleError::Derivation("singular base change".into()));
    }
    let dinv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let u = a.scale_cols(&dinv);
    let mut level = vec![0usize; n];
    for i in (0..n).rev() {
        level[i] = u
            .row(i)
            .iter()
            .filter(|&&(j, _)| j != i)
            .map(|&(j, _)| level[j] + 1)
            .max()
            .unwrap_or(0);
    }
    let depth = level.iter().copied().max().unwrap_or(0);
    let mut factors = Vec::with_capacity(depth);
    for l in (1..=depth).rev() {
        let mut e = Sparse::identity(n);
        for i in (0..n).filter(|&i| level[i] == l) {
            for (j, v) in u.row(i) {
                if j != i {
                    e.set(i, j, -v);
                }
            }
        }
        factors.push(e);
    }
    Ok((dinv, factors))
}

/// One summand of a factorization-type or decomposition-type rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Part {
    /// A single smaller transform.
    Plain(TransformId),
    /// `(⊕_i DTT_M(ρ_i)) · (coarse ⊗ I_M)` over the zeros `ρ_i` of the
    /// polynomial coarse transform; the fine type is fixed by the basis kind.
    Decomp {
        coarse: TransformId,
        kind: ChebKind,
        m: usize,
        poly: bool,
    },
}

impl Part {
    pub fn size(&self) -> usize {
        match self {
            Part::Plain(t) => t.n,
            Part::Decomp { coarse, m, .. } => coarse.n * m,
        }
    }

    /// The fine skew transforms of a decomposition part.
    pub fn fine(&self) -> Result<Vec<TransformId>, RuleError> {
        match self {
            Part::Plain(_) => Ok(Vec::new()),
            Part::Decomp {
                coarse,
                kind,
                m,
                poly,
            } => {
                let (fam, ty) = fine_kind(*kind);
                Ok(coarse
                    .zero_angles()?
                    .into_iter()
                    .map(|q| skew_id(fam, ty, *m, q, *poly))
                    .collect())
            }
        }
    }

    fn zeros(&self) -> Result<Vec<Rational64>, RuleError> {
        match self {
            Part::Plain(t) => Ok(t.zero_angles()?),
            Part::Decomp { .. } => {
                let mut z = Vec::new();
                for f in self.fine()? {
                    z.extend(f.zero_angles()?);
                }
                Ok(z)
            }
        }
    }

    /// Dense matrix of the polynomial version of this part.
    fn poly_matrix(&self) -> Result<DMatrix<f64>, RuleError> {
        match self {
            Part::Plain(t) => Ok(poly_dtt_matrix(&t.clone().with_poly(true))?),
            Part::Decomp { coarse, m, .. } => {
                let c = poly_dtt_matrix(coarse)?;
                let fine = self.fine()?;
                let k = c.nrows();
                let n = k * m;
                let mut kron = DMatrix::zeros(n, n);
                for a in 0..k {
                    for b in 0..k {
                        for j in 0..*m {
                            kron[(a * m + j, b * m + j)] = c[(a, b)];
                        }
                    }
                }
                let mut fsum = DMatrix::zeros(n, n);
                for (i, f) in fine.iter().enumerate() {
                    let fm = poly_dtt_matrix(&f.clone().with_poly(true))?;
                    fsum.view_mut((i * m, i * m), (*m, *m)).copy_from(&fm);
                }
                Ok(fsum * kron)
            }
        }
    }
}

/// A derived factorization `poly DTT = P · (⊕ parts) · B`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub parts: Vec<Part>,
    pub perm: Vec<usize>,
    pub b: Sparse,
}

/// Row permutation of `P · (⊕ parts)` found by zero matching.
pub fn part_permutation(t: &TransformId, parts: &[Part]) -> Result<Vec<usize>, RuleError> {
    let mut z = Vec::with_capacity(t.n);
    for p in parts {
        z.extend(p.zeros()?);
    }
    match_zeros(&t.zero_angles()?, &z)
}

type CacheKey = (TransformId, Vec<Part>);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<Factorization>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Factorization>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Solve for the base change of a factorization of the polynomial version
/// of `t` into the given parts.  Results are cached.
pub fn factorize(t: &TransformId, parts: Vec<Part>) -> Result<Arc<Factorization>, RuleError> {
    let t = t.clone().with_poly(true);
    if t.n > DENSE_CAP {
        return Err(RuleError::Inapplicable(format!(
            "dense derivation limited to n <= {DENSE_CAP}"
        )));
    }
    let key = (t.clone(), parts.clone());
    if let Some(f) = cache().lock().expect("cache lock").get(&key) {
        return Ok(f.clone());
    }
    let total: usize = parts.iter().map(Part::size).sum();
    if total != t.n {
        return Err(RuleError::Derivation(format!(
            "part sizes sum to {total}, expected {}",
            t.n
        )));
    }
    let perm = part_permutation(&t, &parts)?;
    let parent = poly_dtt_matrix(&t)?;
    let inv_perm = crate::formula::invert_map(&perm);
    let rhs = DMatrix::from_fn(t.n, t.n, |c, j| parent[(inv_perm[c], j)]);
    let mut q = DMatrix::zeros(t.n, t.n);
    let mut off = 0;
    for p in &parts {
        let pm = p.poly_matrix()?;
        let s = pm.nrows();
        q.view_mut((off, off), (s, s)).copy_from(&pm);
        off += s;
    }
    let b = q
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| RuleError::Derivation("singular part matrix".into()))?;
    let snapped = b.map(|v| snap_rational(v, 64, 1e-9).unwrap_or(v));
    let check = &q * &snapped;
    if rel_error(&check, &rhs) > 1e-10 {
        return Err(RuleError::Derivation(
            "base change failed verification".into(),
        ));
    }
    let fact = Arc::new(Factorization {
        parts,
        perm,
        b: Sparse::from_dense(&snapped),
    });
    cache()
        .lock()
        .expect("cache lock")
        .insert(key, fact.clone());
    Ok(fact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_decomposition_dct3_4() {
        let d = t_decomposition(&TransformId::dct(3, 4), 2, ChebKind::T).unwrap();
        assert_eq!(d.fine[0].r, Some(Rational64::new(1, 4)));
        assert_eq!(d.fine[1].r, Some(Rational64::new(3, 4)));
        assert!(d.a.is_upper_triangular());
        let (dinv, levels) = back_substitution(&d.a).unwrap();
        // Only T_1·T_2 = (T_3 + T_1)/2 has a non-unit leading coefficient.
        assert_eq!(dinv, vec![1.0, 1.0, 1.0, 2.0]);
        assert_eq!(levels.len(), 1);
    }

    #[test]
    fn zero_matching_rejects_repeats() {
        let z = vec![Rational64::new(1, 2), Rational64::new(1, 2)];
        assert!(match_zeros(&z, &z).is_err());
    }
}
