//! A small coordinate-format sparse matrix used while deriving base-change
//! matrices, and its compiler into structured formulas.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::formula::{Formula, ZERO_TOL};

/// Real sparse matrix keyed by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparse {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl Sparse {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Sparse {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut s = Sparse::zeros(n, n);
        for i in 0..n {
            s.set(i, i, 1.0);
        }
        s
    }

    /// Sparse copy of a dense matrix, dropping entries below the zero tolerance.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut s = Sparse::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                s.set(i, j, m[(i, j)]);
            }
        }
        s
    }

    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::from_dense(&DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Set an entry; values below the zero tolerance remove it.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        if v.abs() < ZERO_TOL {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Nonzeros of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        self.entries
            .range((i, 0)..(i + 1, 0))
            .map(|(&(_, j), &v)| (j, v))
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for ((i, j), v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn transpose(&self) -> Sparse {
        let mut t = Sparse::zeros(self.cols, self.rows);
        for ((i, j), v) in self.iter() {
            t.entries.insert((j, i), v);
        }
        t
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &Sparse) -> Sparse {
        assert_eq!(self.cols, other.rows, "sparse product dimension mismatch");
        let mut out = Sparse::zeros(self.rows, other.cols);
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); other.rows];
        for ((i, j), v) in other.iter() {
            by_row[i].push((j, v));
        }
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for ((i, t), a) in self.iter() {
            for &(j, b) in &by_row[t] {
                *acc.entry((i, j)).or_insert(0.0) += a * b;
            }
        }
        for ((i, j), v) in acc {
            out.set(i, j, v);
        }
        out
    }

    /// Multiply row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[f64]) -> Sparse {
        let mut out = Sparse::zeros(self.rows, self.cols);
        for ((i, j), v) in self.iter() {
            out.set(i, j, v * d[i]);
        }
        out
    }

    /// Multiply column `j` by `d[j]`.
    pub fn scale_cols(&self, d: &[f64]) -> Sparse {
        let mut out = Sparse::zeros(self.rows, self.cols);
        for ((i, j), v) in self.iter() {
            out.set(i, j, v * d[j]);
        }
        out
    }

    /// Rows reordered: row `i` of the result is row `map[i]` of `self`.
    pub fn permute_rows(&self, map: &[usize]) -> Sparse {
        let inv = crate::formula::invert_map(map);
        let mut out = Sparse::zeros(self.rows, self.cols);
        for ((i, j), v) in self.iter() {
            out.entries.insert((inv[i], j), v);
        }
        out
    }

    /// Diagonal entries (zero where absent).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.iter().all(|((i, j), _)| i <= j)
    }

    pub fn max_abs_diff(&self, other: &Sparse) -> f64 {
        let mut d: f64 = 0.0;
        for ((i, j), v) in self.iter() {
            d = d.max((v - other.get(i, j)).abs());
        }
        for ((i, j), v) in other.iter() {
            d = d.max((v - self.get(i, j)).abs());
        }
        d
    }

    /// Map of a 0/1 permutation matrix (`out[i] = x[map[i]]`), if it is one.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        if self.rows != self.cols || self.nnz() != self.rows {
            return None;
        }
        let mut map = vec![usize::MAX; self.rows];
        let mut seen = vec![false; self.cols];
        for ((i, j), v) in self.iter() {
            if (v - 1.0).abs() > ZERO_TOL || map[i] != usize::MAX || seen[j] {
                return None;
            }
            map[i] = j;
            seen[j] = true;
        }
        Some(map)
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols && self.iter().all(|((i, j), _)| i == j)
    }

    /// Compile into a structured formula: permutations and diagonals become
    /// their dedicated nodes; otherwise the matrix is split into connected
    /// blocks, `P_out · (⊕ blocks) · P_in`, with `F_2` recognized.
    pub fn to_formula(&self) -> Formula<f64> {
        let n = self.rows;
        if let Some(map) = self.as_permutation() {
            return permutation_formula(map);
        }
        if self.is_diagonal() && (0..n).all(|i| self.get(i, i) != 0.0) {
            return diagonal_formula((0..n).map(|i| self.get(i, i)).collect());
        }
        match self.components() {
            Some(blocks) if blocks.len() > 1 => self.block_formula(blocks),
            _ => self.small_formula(),
        }
    }

    /// Dense-or-butterfly formula for a single connected block.
    fn small_formula(&self) -> Formula<f64> {
        if self.rows == 2 && self.cols == 2 {
            let f2 = [1.0, 1.0, 1.0, -1.0];
            let v = [
                self.get(0, 0),
                self.get(0, 1),
                self.get(1, 0),
                self.get(1, 1),
            ];
            if v.iter().zip(f2).all(|(a, b)| (a - b).abs() < ZERO_TOL) {
                return Formula::Butterfly;
            }
        }
        Formula::Dense(crate::formula::DenseBlock::from_matrix(&self.to_dense()))
    }

    /// Connected components of the row/column bipartite graph, as
    /// `(rows, cols)` with equal counts; `None` if any row or column is empty
    /// or a component is not square.
    fn components(&self) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
        let (r, c) = (self.rows, self.cols);
        if r != c {
            return None;
        }
        let mut parent: Vec<usize> = (0..r + c).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut row_used = vec![false; r];
        let mut col_used = vec![false; c];
        for ((i, j), _) in self.iter() {
            row_used[i] = true;
            col_used[j] = true;
            let a = find(&mut parent, i);
            let b = find(&mut parent, r + j);
            if a != b {
                parent[a] = b;
            }
        }
        if row_used.iter().chain(&col_used).any(|u| !u) {
            return None;
        }
        let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        let mut order: Vec<usize> = Vec::new();
        for i in 0..r {
            let g = find(&mut parent, i);
            if !groups.contains_key(&g) {
                order.push(g);
            }
            groups.entry(g).or_default().0.push(i);
        }
        for j in 0..c {
            let g = find(&mut parent, r + j);
            groups.entry(g).or_default().1.push(j);
        }
        let mut out = Vec::with_capacity(order.len());
        for g in order {
            let (rs, cs) = groups.remove(&g)?;
            if rs.len() != cs.len() {
                return None;
            }
            out.push((rs, cs));
        }
        Some(out)
    }

    fn block_formula(&self, blocks: Vec<(Vec<usize>, Vec<usize>)>) -> Formula<f64> {
        let n = self.rows;
        // Output permutation: row i of the result is row pos[i] of the sum.
        let mut out_map = vec![0; n];
        let mut in_map = Vec::with_capacity(n);
        let mut pos = 0;
        let mut parts: Vec<Formula<f64>> = Vec::new();
        let mut pending_diag: Vec<f64> = Vec::new();
        let flush = |pending: &mut Vec<f64>, parts: &mut Vec<Formula<f64>>| {
            if !pending.is_empty() {
                parts.push(diagonal_formula(std::mem::take(pending)));
            }
        };
        for (rs, cs) in &blocks {
            for &i in rs {
                out_map[i] = pos;
                pos += 1;
            }
            in_map.extend_from_slice(cs);
            if rs.len() == 1 {
                pending_diag.push(self.get(rs[0], cs[0]));
                continue;
            }
            flush(&mut pending_diag, &mut parts);
            let mut sub = Sparse::zeros(rs.len(), cs.len());
            for (a, &i) in rs.iter().enumerate() {
                for (b, &j) in cs.iter().enumerate() {
                    sub.set(a, b, self.get(i, j));
                }
            }
            parts.push(sub.small_formula());
        }
        flush(&mut pending_diag, &mut parts);
        let mut factors = Vec::new();
        if !is_identity_map(&out_map) {
            factors.push(Formula::Permutation(out_map));
        }
        factors.push(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Formula::DirectSum(parts)
        });
        if !is_identity_map(&in_map) {
            factors.push(Formula::Permutation(in_map));
        }
        if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            Formula::Compose(factors)
        }
    }
}

pub fn is_identity_map(map: &[usize]) -> bool {
    map.iter().enumerate().all(|(i, &j)| i == j)
}

/// `Identity`, `OppIdentity` or `Permutation` for an index map.
pub fn permutation_formula(map: Vec<usize>) -> Formula<f64> {
    let n = map.len();
    if is_identity_map(&map) {
        Formula::Identity(n)
    } else if map.iter().enumerate().all(|(i, &j)| j == n - 1 - i) {
        Formula::OppIdentity(n)
    } else {
        Formula::Permutation(map)
    }
}

/// `Identity` when all entries are one, else `Diagonal`.
pub fn diagonal_formula(d: Vec<f64>) -> Formula<f64> {
    if d.iter().all(|&v| v == 1.0) {
        Formula::Identity(d.len())
    } else {
        Formula::Diagonal(d)
    }
}

/// Snap `v` to a nearby rational with denominator at most `max_den`.
pub fn snap_rational(v: f64, max_den: i64, tol: f64) -> Option<f64> {
    for q in 1..=max_den {
        let p = (v * q as f64).round();
        if (p / q as f64 - v).abs() < tol {
            return Some(p / q as f64);
        }
    }
    None
}
