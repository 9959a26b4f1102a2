//! Named structured blocks: the permutations, base-change matrices and
//! translation matrices that the algorithms are assembled from.

use nalgebra::DMatrix;
use num_rational::Rational64;

use super::sparse::{permutation_formula, Sparse};
use super::RuleError;
use crate::chebyshev::{cos_pi, sin_pi, skew_zeros};
use crate::formula::Formula;
use crate::reference::{Family, TransformId};

fn bad(what: &str) -> RuleError {
    RuleError::Inapplicable(what.to_string())
}

/// Index map of `K_m^n = (I_k ⊕ J_k ⊕ I_k ⊕ …)·L_m^n`, `n = k·m`.
pub fn k_map(n: usize, m: usize) -> Result<Vec<usize>, RuleError> {
    if m == 0 || !n.is_multiple_of(m) {
        return Err(bad("K_m^n needs m | n"));
    }
    let k = n / m;
    let stride = crate::formula::stride_map(n, m);
    // Block b (of size k) is reversed for odd b.
    let flip: Vec<usize> = (0..n)
        .map(|i| {
            let (b, o) = (i / k, i % k);
            if b % 2 == 1 {
                b * k + (k - 1 - o)
            } else {
                i
            }
        })
        .collect();
    Ok(flip.iter().map(|&i| stride[i]).collect())
}

/// `K_m^n` as a structured formula.
pub fn k_perm(n: usize, m: usize) -> Result<Formula<f64>, RuleError> {
    k_map(n, m)?;
    let k = n / m;
    let blocks: Vec<Formula<f64>> = (0..m)
        .map(|b| {
            if b % 2 == 0 {
                Formula::Identity(k)
            } else {
                Formula::OppIdentity(k)
            }
        })
        .collect();
    let flips = if m == 1 {
        Formula::Identity(k)
    } else {
        Formula::DirectSum(blocks)
    };
    Ok(Formula::Compose(vec![flips, Formula::Stride { n, m }]))
}

/// `M_k^n = (K_{n/k}^n)^{-1} = L_k^n (I_k ⊕ J_k ⊕ …)`.
pub fn m_perm(n: usize, k: usize) -> Result<Formula<f64>, RuleError> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(bad("M_k^n needs k | n"));
    }
    Ok(k_perm(n, n / k)?.transpose())
}

/// `B_{2m} = (F_2 ⊗ I_m)(I_m ⊕ J_m)`.
pub fn b_2m(m: usize) -> Result<Formula<f64>, RuleError> {
    if m == 0 {
        return Err(bad("B_2m needs m >= 1"));
    }
    let flip = if m == 1 {
        Formula::Identity(2)
    } else {
        Formula::DirectSum(vec![Formula::Identity(m), Formula::OppIdentity(m)])
    };
    Ok(Formula::Compose(vec![
        Formula::KronLeft(Box::new(Formula::Butterfly), m),
        flip,
    ]))
}

/// `B_{2m+1} = [[I_m, 0, J_m], [0, 1, 0], [I_m, 0, −J_m]]` as a sparse matrix.
pub fn b_2m1_matrix(m: usize) -> Sparse {
    let n = 2 * m + 1;
    let mut s = Sparse::zeros(n, n);
    for i in 0..m {
        s.set(i, i, 1.0);
        s.set(i, n - 1 - i, 1.0);
        s.set(m + 1 + i, i, 1.0);
        s.set(m + 1 + i, 2 * m - i, -1.0);
    }
    s.set(m, m, 1.0);
    s
}

/// `B_{2m+1}` as a formula: `m` butterflies around the fixed middle point.
pub fn b_2m1(m: usize) -> Formula<f64> {
    b_2m1_matrix(m).to_formula()
}

fn radix3_map(total: usize, f: impl Fn(usize, usize) -> usize) -> Vec<usize> {
    (0..total).map(|i| f(i % 3, i / 3)).collect()
}

/// Index map of `P_m^{3m+2}`: row `i = i1 + 3·i2` selects column `f(i)`.
pub fn p_map(m: usize) -> Vec<usize> {
    radix3_map(3 * m + 2, |i1, i2| match i1 {
        0 => 2 * i2,
        1 => i2 + 2 * m + 1,
        _ => 2 * i2 + 1,
    })
}

/// `P̂_m^{3m+1}`: the restriction of `P_m^{3m+2}` to `{0, …, 3m}`.
pub fn p_hat_map(m: usize) -> Vec<usize> {
    let mut p = p_map(m);
    p.pop();
    p
}

/// Index map of `Q_m^{3m+2}`.
pub fn q_map(m: usize) -> Vec<usize> {
    radix3_map(3 * m + 2, |i1, i2| match i1 {
        0 => i2,
        1 => 2 * i2 + m + 1,
        _ => 2 * i2 + m + 2,
    })
}

/// `Q̂_m^{3m+1}`: `Q_m^{3m+2}` restricted to the points `1 … 3m+1`, renumbered.
pub fn q_hat_map(m: usize) -> Vec<usize> {
    radix3_map(3 * m + 1, |i1, i2| match i1 {
        0 => 2 * i2 + m,
        1 => 2 * i2 + m + 1,
        _ => i2,
    })
}

pub fn perm_formula(map: Vec<usize>) -> Formula<f64> {
    permutation_formula(map)
}

/// `S_n`: ones on the diagonal and the first superdiagonal.
pub fn s_matrix(n: usize) -> Sparse {
    let mut s = Sparse::identity(n);
    for i in 0..n.saturating_sub(1) {
        s.set(i, i + 1, 1.0);
    }
    s
}

/// `Z_m`: ones at `(i, m − i)` for `0 < i < m`.
pub fn z_matrix(m: usize) -> Sparse {
    let mut s = Sparse::zeros(m, m);
    for i in 1..m {
        s.set(i, m - i, 1.0);
    }
    s
}

/// `D_n(r) = diag(cos(r_k π/2))` over the ordered skew zeros.
pub fn d_diag(n: usize, r: Rational64) -> Result<Vec<f64>, RuleError> {
    let z = skew_zeros(n, r).map_err(|e| bad(&e.to_string()))?;
    Ok(z.into_iter().map(|rk| cos_pi(rk / 2)).collect())
}

/// `E_{2,m}(r) = [[I_m, −Z_m], [0, cos(rπ/2)(I_1 ⊕ 2 I_{m−1})]]`.
pub fn e2_matrix(m: usize, r: Rational64) -> Sparse {
    let c = cos_pi(r / 2);
    let mut s = Sparse::zeros(2 * m, 2 * m);
    for i in 0..m {
        s.set(i, i, 1.0);
        s.set(m + i, m + i, if i == 0 { c } else { 2.0 * c });
    }
    for i in 1..m {
        s.set(i, m + m - i, -1.0);
    }
    s
}

/// The x-shaped matrix with `DTT_n(r) = DTT_n · X_n(r)` for a T-group type.
pub fn x_matrix(id: &TransformId) -> Result<Sparse, RuleError> {
    if !id.is_t_group() {
        return Err(bad("X(r) only for types 3 and 4"));
    }
    let n = id.n;
    let nn = n as i64;
    let half = Rational64::new(1, 2);
    let d = half - id.skew();
    let c = |l: i64| cos_pi(d * l / nn);
    let s = |l: i64| sin_pi(d * l / nn);
    let cp = |l: i64| cos_pi(d * (2 * l + 1) / (2 * nn));
    let sp = |l: i64| sin_pi(d * (2 * l + 1) / (2 * nn));
    let mut x = Sparse::zeros(n, n);
    match (id.family, id.ty) {
        (Family::Dct, 3) => {
            x.add(0, 0, 1.0);
            for l in 1..n {
                x.add(l, l, c(l as i64));
                x.add(n - l, l, s(l as i64));
            }
        }
        (Family::Dst, 3) => {
            for l in 1..n {
                x.add(l - 1, l - 1, c(l as i64));
                x.add(n - 1 - l, l - 1, -s(l as i64));
            }
            x.add(n - 1, n - 1, c(nn));
        }
        (fam, _) => {
            let sign = if fam == Family::Dct { 1.0 } else { -1.0 };
            for l in 0..n {
                x.add(l, l, cp(l as i64));
                x.add(n - 1 - l, l, sign * sp(l as i64));
            }
        }
    }
    Ok(x)
}

/// Inverse of an x-shaped matrix, computed block by block (its connected
/// blocks have size at most two).
pub fn x_inverse(x: &Sparse) -> Result<Sparse, RuleError> {
    let n = x.rows;
    let mut out = Sparse::zeros(n, n);
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let mut idx: Vec<usize> = vec![i];
        for j in x
            .row(i)
            .into_iter()
            .map(|(j, _)| j)
            .chain((0..n).filter(|&r| r != i && x.get(r, i) != 0.0))
        {
            if j != i {
                idx.push(j);
            }
        }
        idx.sort_unstable();
        idx.dedup();
        let k = idx.len();
        let block = DMatrix::from_fn(k, k, |a, b| x.get(idx[a], idx[b]));
        let inv = block
            .try_inverse()
            .ok_or_else(|| RuleError::Derivation("singular X block".into()))?;
        for a in 0..k {
            done[idx[a]] = true;
            for b in 0..k {
                out.set(idx[a], idx[b], inv[(a, b)]);
            }
        }
    }
    // Guard against a missed coupling.
    let check = x.mul(&out);
    if check.max_abs_diff(&Sparse::identity(n)) > 1e-10 {
        return Err(RuleError::Derivation("X block inversion failed".into()));
    }
    Ok(out)
}
