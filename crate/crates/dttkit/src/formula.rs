//! Structured sparse-matrix formulas and their four interpreters:
//! apply-to-vector, densify, transpose and arithmetic-cost counting.
//!
//! A [`Formula`] is an immutable expression tree.  Matrix products are
//! written left to right as in mathematics and evaluated right to left.
//! Permutations follow the row convention "row `i` has its single one at
//! column `f(i)`", so applying a permutation yields `out[i] = x[f(i)]`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use thiserror::Error;

use crate::reference::{self, TransformId};

/// Magnitudes below this are treated as structural zeros by the cost model
/// and the sparse-matrix compiler.
pub const ZERO_TOL: f64 = 1e-13;
const PRICE_TOL: f64 = 1e-12;

/// Errors raised while building, checking or evaluating formulas.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulaError {
    #[error("dimension mismatch in {node}: expected {expected}, found {found}")]
    DimMismatch {
        node: String,
        expected: usize,
        found: usize,
    },
    #[error("permutation map is not a bijection on 0..{0}")]
    NotBijection(usize),
    #[error("stride L({n},{m}) requires {m} | {n}")]
    BadStride { n: usize, m: usize },
    #[error("odd stride L^({n},{m}) requires {m} | {n}+1")]
    BadOddStride { n: usize, m: usize },
    #[error("dense block {rows}x{cols} given {len} entries")]
    BadDense {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("zero-sized {0}")]
    ZeroSize(&'static str),
    #[error("transform leaf {0} cannot be evaluated: {1}")]
    Leaf(String, String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// How a single constant is priced by the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Price {
    /// Structural zero: no operation.
    Zero,
    /// Multiplication by ±1 (or ±j): absorbed into an addition/subtraction.
    Free,
    /// Multiplication by a nontrivial power of two.
    TwoPower,
    /// A general multiplication.
    General,
}

fn price_real(v: f64) -> Price {
    let a = v.abs();
    if a < ZERO_TOL {
        return Price::Zero;
    }
    if (a - 1.0).abs() < PRICE_TOL {
        return Price::Free;
    }
    let l = a.log2();
    if (l - l.round()).abs() < PRICE_TOL {
        Price::TwoPower
    } else {
        Price::General
    }
}

/// Scalar field of a formula: `f64` for the trigonometric transforms and
/// `Complex64` for the DFT family.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + fmt::Debug + PartialEq + Send + Sync + 'static
{
    fn of_real(v: f64) -> Self;
    /// Embed a complex constant; `None` if this field cannot hold it.
    fn of_complex(c: Complex64) -> Option<Self>;
    fn price(self) -> Price;
    /// Text form with 17 significant digits (lossless for `f64`).
    fn to_text(self) -> String;
    fn from_text(tok: &str) -> Option<Self>;
    /// Reference matrix of a transform leaf in this scalar field.
    fn leaf_matrix(id: &TransformId) -> Result<DMatrix<Self>, String>;
}

fn real_text(v: f64) -> String {
    format!("{:.16e}", v)
}

impl Scalar for f64 {
    fn of_real(v: f64) -> Self {
        v
    }
    fn of_complex(c: Complex64) -> Option<Self> {
        (c.im.abs() < ZERO_TOL).then_some(c.re)
    }
    fn price(self) -> Price {
        price_real(self)
    }
    fn to_text(self) -> String {
        real_text(self)
    }
    fn from_text(tok: &str) -> Option<Self> {
        tok.parse().ok()
    }
    fn leaf_matrix(id: &TransformId) -> Result<DMatrix<Self>, String> {
        reference::real_matrix(id).map_err(|e| e.to_string())
    }
}

impl Scalar for Complex64 {
    fn of_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn of_complex(c: Complex64) -> Option<Self> {
        Some(c)
    }
    fn price(self) -> Price {
        if self.im.abs() < ZERO_TOL {
            price_real(self.re)
        } else if self.re.abs() < ZERO_TOL {
            price_real(self.im)
        } else {
            Price::General
        }
    }
    fn to_text(self) -> String {
        format!("{}:{}", real_text(self.re), real_text(self.im))
    }
    fn from_text(tok: &str) -> Option<Self> {
        match tok.split_once(':') {
            Some((re, im)) => Some(Complex64::new(re.parse().ok()?, im.parse().ok()?)),
            None => Some(Complex64::new(tok.parse().ok()?, 0.0)),
        }
    }
    fn leaf_matrix(id: &TransformId) -> Result<DMatrix<Self>, String> {
        reference::complex_matrix(id).map_err(|e| e.to_string())
    }
}

/// Arithmetic cost `(adds, mults, two-power mults)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CostTriple {
    pub adds: u64,
    pub mults: u64,
    pub two_power_mults: u64,
}

impl CostTriple {
    pub const ZERO: CostTriple = CostTriple {
        adds: 0,
        mults: 0,
        two_power_mults: 0,
    };

    pub fn new(adds: u64, mults: u64, two_power_mults: u64) -> Self {
        CostTriple {
            adds,
            mults,
            two_power_mults,
        }
    }

    pub fn total(&self) -> u64 {
        self.adds + self.mults + self.two_power_mults
    }

    fn charge(&mut self, p: Price) {
        match p {
            Price::Zero | Price::Free => {}
            Price::TwoPower => self.two_power_mults += 1,
            Price::General => self.mults += 1,
        }
    }
}

impl Add for CostTriple {
    type Output = CostTriple;
    fn add(self, o: CostTriple) -> CostTriple {
        CostTriple::new(
            self.adds + o.adds,
            self.mults + o.mults,
            self.two_power_mults + o.two_power_mults,
        )
    }
}

impl AddAssign for CostTriple {
    fn add_assign(&mut self, o: CostTriple) {
        *self = *self + o;
    }
}

impl Mul<u64> for CostTriple {
    type Output = CostTriple;
    fn mul(self, k: u64) -> CostTriple {
        CostTriple::new(self.adds * k, self.mults * k, self.two_power_mults * k)
    }
}

impl fmt::Display for CostTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.adds, self.mults, self.two_power_mults
        )
    }
}

/// A transform leaf: a smaller transform still to be expanded, optionally
/// followed (on its right) by a diagonal column scaling that the planner
/// fuses into the leaf's own rightmost factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub id: TransformId,
    pub scale: Option<Vec<f64>>,
}

impl Leaf {
    pub fn new(id: TransformId) -> Self {
        Leaf { id, scale: None }
    }
}

/// A dense `rows × cols` block stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock<S> {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<S>,
}

impl<S: Scalar> DenseBlock<S> {
    pub fn new(rows: usize, cols: usize, entries: Vec<S>) -> Result<Self, FormulaError> {
        if entries.len() != rows * cols {
            return Err(FormulaError::BadDense {
                rows,
                cols,
                len: entries.len(),
            });
        }
        Ok(DenseBlock {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_matrix(m: &DMatrix<S>) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(m[(i, j)]);
            }
        }
        DenseBlock {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.entries[i * self.cols + j]
    }
}

/// Structured matrix expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula<S = f64> {
    Identity(usize),
    OppIdentity(usize),
    Butterfly,
    Diagonal(Vec<S>),
    Permutation(Vec<usize>),
    Stride { n: usize, m: usize },
    OddStride { n: usize, m: usize },
    Dense(DenseBlock<S>),
    Compose(Vec<Formula<S>>),
    DirectSum(Vec<Formula<S>>),
    KronLeft(Box<Formula<S>>, usize),
    KronRight(usize, Box<Formula<S>>),
    Leaf(Leaf),
}

/// Index map of `L_m^n`: `out[i] = x[map[i]]`.
pub fn stride_map(n: usize, m: usize) -> Vec<usize> {
    let q = n / m;
    let mut map = vec![0; n];
    for i1 in 0..m {
        for i2 in 0..q {
            map[i1 * q + i2] = i2 * m + i1;
        }
    }
    map
}

/// Index map of the odd stride permutation: `i ↦ i·m mod n`.
pub fn odd_stride_map(n: usize, m: usize) -> Vec<usize> {
    (0..n).map(|i| (i * m) % n).collect()
}

fn check_bijection(map: &[usize]) -> Result<(), FormulaError> {
    let n = map.len();
    let mut seen = vec![false; n];
    for &v in map {
        if v >= n || seen[v] {
            return Err(FormulaError::NotBijection(n));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Inverse of a permutation map.
pub fn invert_map(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; map.len()];
    for (i, &v) in map.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

impl<S: Scalar> Formula<S> {
    // ---- checked constructors -------------------------------------------

    pub fn identity(n: usize) -> Self {
        Formula::Identity(n)
    }

    pub fn diag(entries: Vec<S>) -> Self {
        Formula::Diagonal(entries)
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Formula::Diagonal(entries.iter().map(|&v| S::of_real(v)).collect())
    }

    pub fn perm(map: Vec<usize>) -> Result<Self, FormulaError> {
        check_bijection(&map)?;
        Ok(Formula::Permutation(map))
    }

    pub fn stride(n: usize, m: usize) -> Result<Self, FormulaError> {
        if m == 0 || n == 0 || !n.is_multiple_of(m) {
            return Err(FormulaError::BadStride { n, m });
        }
        Ok(Formula::Stride { n, m })
    }

    pub fn odd_stride(n: usize, m: usize) -> Result<Self, FormulaError> {
        if m == 0 || n == 0 || !(n + 1).is_multiple_of(m) {
            return Err(FormulaError::BadOddStride { n, m });
        }
        Ok(Formula::OddStride { n, m })
    }

    pub fn dense(rows: usize, cols: usize, entries: Vec<S>) -> Result<Self, FormulaError> {
        Ok(Formula::Dense(DenseBlock::new(rows, cols, entries)?))
    }

    pub fn dense_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, FormulaError> {
        Self::dense(rows, cols, entries.iter().map(|&v| S::of_real(v)).collect())
    }

    pub fn from_matrix(m: &DMatrix<S>) -> Self {
        Formula::Dense(DenseBlock::from_matrix(m))
    }

    pub fn compose(factors: Vec<Formula<S>>) -> Result<Self, FormulaError> {
        let f = Formula::Compose(factors);
        f.validate()?;
        Ok(f)
    }

    pub fn direct_sum(blocks: Vec<Formula<S>>) -> Result<Self, FormulaError> {
        let f = Formula::DirectSum(blocks);
        f.validate()?;
        Ok(f)
    }

    pub fn kron_left(a: Formula<S>, m: usize) -> Self {
        Formula::KronLeft(Box::new(a), m)
    }

    pub fn kron_right(k: usize, b: Formula<S>) -> Self {
        Formula::KronRight(k, Box::new(b))
    }

    pub fn leaf(id: TransformId) -> Self {
        Formula::Leaf(Leaf::new(id))
    }

    // ---- shape ----------------------------------------------------------

    pub fn rows(&self) -> usize {
        match self {
            Formula::Identity(n) | Formula::OppIdentity(n) => *n,
            Formula::Butterfly => 2,
            Formula::Diagonal(d) => d.len(),
            Formula::Permutation(p) => p.len(),
            Formula::Stride { n, .. } | Formula::OddStride { n, .. } => *n,
            Formula::Dense(b) => b.rows,
            Formula::Compose(fs) => fs.first().map_or(0, |f| f.rows()),
            Formula::DirectSum(bs) => bs.iter().map(|b| b.rows()).sum(),
            Formula::KronLeft(a, m) => a.rows() * m,
            Formula::KronRight(k, b) => b.rows() * k,
            Formula::Leaf(l) => l.id.n,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Formula::Identity(n) | Formula::OppIdentity(n) => *n,
            Formula::Butterfly => 2,
            Formula::Diagonal(d) => d.len(),
            Formula::Permutation(p) => p.len(),
            Formula::Stride { n, .. } | Formula::OddStride { n, .. } => *n,
            Formula::Dense(b) => b.cols,
            Formula::Compose(fs) => fs.last().map_or(0, |f| f.cols()),
            Formula::DirectSum(bs) => bs.iter().map(|b| b.cols()).sum(),
            Formula::KronLeft(a, m) => a.cols() * m,
            Formula::KronRight(k, b) => b.cols() * k,
            Formula::Leaf(l) => l.id.n,
        }
    }

    /// Short node label used in error messages.
    pub fn label(&self) -> String {
        match self {
            Formula::Identity(n) => format!("I_{n}"),
            Formula::OppIdentity(n) => format!("J_{n}"),
            Formula::Butterfly => "F2".into(),
            Formula::Diagonal(d) => format!("diag[{}]", d.len()),
            Formula::Permutation(p) => format!("perm[{}]", p.len()),
            Formula::Stride { n, m } => format!("L({n},{m})"),
            Formula::OddStride { n, m } => format!("L^({n},{m})"),
            Formula::Dense(b) => format!("dense[{}x{}]", b.rows, b.cols),
            Formula::Compose(fs) => format!("compose[{}]", fs.len()),
            Formula::DirectSum(bs) => format!("dsum[{}]", bs.len()),
            Formula::KronLeft(a, m) => format!("({}) x I_{m}", a.label()),
            Formula::KronRight(k, b) => format!("I_{k} x ({})", b.label()),
            Formula::Leaf(l) => format!("leaf {}", l.id),
        }
    }

    /// Check all structural invariants recursively.
    pub fn validate(&self) -> Result<(), FormulaError> {
        match self {
            Formula::Identity(n) | Formula::OppIdentity(n) => {
                if *n == 0 {
                    return Err(FormulaError::ZeroSize("identity"));
                }
            }
            Formula::Butterfly => {}
            Formula::Diagonal(d) => {
                if d.is_empty() {
                    return Err(FormulaError::ZeroSize("diagonal"));
                }
            }
            Formula::Permutation(p) => {
                if p.is_empty() {
                    return Err(FormulaError::ZeroSize("permutation"));
                }
                check_bijection(p)?
            }
            Formula::Stride { n, m } => {
                Self::stride(*n, *m)?;
            }
            Formula::OddStride { n, m } => {
                Self::odd_stride(*n, *m)?;
            }
            Formula::Dense(b) => {
                if b.entries.len() != b.rows * b.cols {
                    return Err(FormulaError::BadDense {
                        rows: b.rows,
                        cols: b.cols,
                        len: b.entries.len(),
                    });
                }
            }
            Formula::Compose(fs) => {
                if fs.is_empty() {
                    return Err(FormulaError::Empty("compose"));
                }
                for f in fs {
                    f.validate()?;
                }
                for w in fs.windows(2) {
                    if w[0].cols() != w[1].rows() {
                        return Err(FormulaError::DimMismatch {
                            node: format!("compose at {} * {}", w[0].label(), w[1].label()),
                            expected: w[0].cols(),
                            found: w[1].rows(),
                        });
                    }
                }
            }
            Formula::DirectSum(bs) => {
                if bs.is_empty() {
                    return Err(FormulaError::Empty("direct sum"));
                }
                for b in bs {
                    b.validate()?;
                }
            }
            Formula::KronLeft(a, m) => {
                if *m == 0 {
                    return Err(FormulaError::ZeroSize("kron"));
                }
                a.validate()?
            }
            Formula::KronRight(k, b) => {
                if *k == 0 {
                    return Err(FormulaError::ZeroSize("kron"));
                }
                b.validate()?
            }
            Formula::Leaf(l) => {
                if let Some(s) = &l.scale {
                    if s.len() != l.id.n {
                        return Err(FormulaError::DimMismatch {
                            node: format!("leaf {} scaling", l.id),
                            expected: l.id.n,
                            found: s.len(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Index map if this node is a permutation-like matrix.
    pub fn permutation_map(&self) -> Option<Vec<usize>> {
        match self {
            Formula::Identity(n) => Some((0..*n).collect()),
            Formula::OppIdentity(n) => Some((0..*n).rev().collect()),
            Formula::Permutation(p) => Some(p.clone()),
            Formula::Stride { n, m } => Some(stride_map(*n, *m)),
            Formula::OddStride { n, m } => Some(odd_stride_map(*n, *m)),
            _ => None,
        }
    }

    /// Whether any transform leaf remains.
    pub fn has_leaves(&self) -> bool {
        match self {
            Formula::Leaf(_) => true,
            Formula::Compose(fs) | Formula::DirectSum(fs) => fs.iter().any(|f| f.has_leaves()),
            Formula::KronLeft(a, _) | Formula::KronRight(_, a) => a.has_leaves(),
            _ => false,
        }
    }

    /// All transform leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            Formula::Leaf(l) => out.push(l),
            Formula::Compose(fs) | Formula::DirectSum(fs) => {
                for f in fs {
                    f.collect_leaves(out)
                }
            }
            Formula::KronLeft(a, _) | Formula::KronRight(_, a) => a.collect_leaves(out),
            _ => {}
        }
    }

    /// Replace every leaf using `f`, which receives the leaf and returns its
    /// substitute formula.
    pub fn map_leaves<E>(
        &self,
        f: &mut dyn FnMut(&Leaf) -> Result<Formula<S>, E>,
    ) -> Result<Formula<S>, E> {
        Ok(match self {
            Formula::Leaf(l) => f(l)?,
            Formula::Compose(fs) => Formula::Compose(
                fs.iter()
                    .map(|x| x.map_leaves(f))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::DirectSum(fs) => Formula::DirectSum(
                fs.iter()
                    .map(|x| x.map_leaves(f))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::KronLeft(a, m) => Formula::KronLeft(Box::new(a.map_leaves(f)?), *m),
            Formula::KronRight(k, b) => Formula::KronRight(*k, Box::new(b.map_leaves(f)?)),
            other => other.clone(),
        })
    }

    // ---- apply ----------------------------------------------------------

    /// Matrix-vector product `f · x`.
    pub fn apply(&self, x: &[S]) -> Result<Vec<S>, FormulaError> {
        if x.len() != self.cols() {
            return Err(FormulaError::DimMismatch {
                node: self.label(),
                expected: self.cols(),
                found: x.len(),
            });
        }
        self.validate()?;
        self.apply_unchecked(x)
    }

    fn apply_unchecked(&self, x: &[S]) -> Result<Vec<S>, FormulaError> {
        Ok(match self {
            Formula::Identity(_) => x.to_vec(),
            Formula::OppIdentity(_) => x.iter().rev().copied().collect(),
            Formula::Butterfly => vec![x[0] + x[1], x[0] - x[1]],
            Formula::Diagonal(d) => d.iter().zip(x).map(|(&a, &b)| a * b).collect(),
            Formula::Permutation(_) | Formula::Stride { .. } | Formula::OddStride { .. } => {
                let map = self.permutation_map().expect("permutation node");
                map.iter().map(|&j| x[j]).collect()
            }
            Formula::Dense(b) => (0..b.rows)
                .map(|i| {
                    let mut acc = S::zero();
                    for (j, &xj) in x.iter().enumerate().take(b.cols) {
                        acc += b.get(i, j) * xj;
                    }
                    acc
                })
                .collect(),
            Formula::Compose(fs) => {
                let mut v = x.to_vec();
                for f in fs.iter().rev() {
                    if v.len() != f.cols() {
                        return Err(FormulaError::DimMismatch {
                            node: f.label(),
                            expected: f.cols(),
                            found: v.len(),
                        });
                    }
                    v = f.apply_unchecked(&v)?;
                }
                v
            }
            Formula::DirectSum(bs) => {
                let mut out = Vec::with_capacity(self.rows());
                let mut off = 0;
                for b in bs {
                    let c = b.cols();
                    out.extend(b.apply_unchecked(&x[off..off + c])?);
                    off += c;
                }
                out
            }
            Formula::KronLeft(a, m) => {
                let (ra, ca) = (a.rows(), a.cols());
                let mut out = vec![S::zero(); ra * m];
                let mut col = vec![S::zero(); ca];
                for j in 0..*m {
                    for i in 0..ca {
                        col[i] = x[i * m + j];
                    }
                    let y = a.apply_unchecked(&col)?;
                    for i in 0..ra {
                        out[i * m + j] = y[i];
                    }
                }
                out
            }
            Formula::KronRight(k, b) => {
                let c = b.cols();
                let mut out = Vec::with_capacity(b.rows() * k);
                for t in 0..*k {
                    out.extend(b.apply_unchecked(&x[t * c..(t + 1) * c])?);
                }
                out
            }
            Formula::Leaf(l) => {
                let m =
                    S::leaf_matrix(&l.id).map_err(|e| FormulaError::Leaf(l.id.to_string(), e))?;
                let mut xs = x.to_vec();
                if let Some(s) = &l.scale {
                    for (v, &c) in xs.iter_mut().zip(s) {
                        *v *= S::of_real(c);
                    }
                }
                let v = nalgebra::DVector::from_vec(xs);
                (m * v).iter().copied().collect()
            }
        })
    }

    // ---- densify --------------------------------------------------------

    /// Dense matrix of the formula.
    pub fn densify(&self) -> Result<DMatrix<S>, FormulaError> {
        self.validate()?;
        self.densify_unchecked()
    }

    fn densify_unchecked(&self) -> Result<DMatrix<S>, FormulaError> {
        let (r, c) = (self.rows(), self.cols());
        Ok(match self {
            Formula::Identity(n) => DMatrix::identity(*n, *n),
            Formula::Butterfly => {
                DMatrix::from_row_slice(2, 2, &[S::one(), S::one(), S::one(), -S::one()])
            }
            Formula::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())),
            Formula::OppIdentity(_)
            | Formula::Permutation(_)
            | Formula::Stride { .. }
            | Formula::OddStride { .. } => {
                let map = self.permutation_map().expect("permutation node");
                let mut m = DMatrix::zeros(r, c);
                for (i, &j) in map.iter().enumerate() {
                    m[(i, j)] = S::one();
                }
                m
            }
            Formula::Dense(b) => DMatrix::from_row_slice(b.rows, b.cols, &b.entries),
            Formula::Compose(fs) => {
                let mut acc = fs[0].densify_unchecked()?;
                for f in &fs[1..] {
                    acc *= f.densify_unchecked()?;
                }
                acc
            }
            Formula::DirectSum(bs) => {
                let mut m = DMatrix::zeros(r, c);
                let (mut ro, mut co) = (0, 0);
                for b in bs {
                    let d = b.densify_unchecked()?;
                    m.view_mut((ro, co), (d.nrows(), d.ncols())).copy_from(&d);
                    ro += d.nrows();
                    co += d.ncols();
                }
                m
            }
            Formula::KronLeft(a, mm) => {
                let d = a.densify_unchecked()?;
                d.kronecker(&DMatrix::<S>::identity(*mm, *mm))
            }
            Formula::KronRight(k, b) => {
                let d = b.densify_unchecked()?;
                DMatrix::<S>::identity(*k, *k).kronecker(&d)
            }
            Formula::Leaf(l) => {
                let mut m =
                    S::leaf_matrix(&l.id).map_err(|e| FormulaError::Leaf(l.id.to_string(), e))?;
                if let Some(s) = &l.scale {
                    for (j, &c) in s.iter().enumerate() {
                        let cc = S::of_real(c);
                        m.column_mut(j).iter_mut().for_each(|v| *v *= cc);
                    }
                }
                m
            }
        })
    }

    // ---- transpose ------------------------------------------------------

    /// Structural transpose.
    pub fn transpose(&self) -> Formula<S> {
        match self {
            Formula::Identity(_) | Formula::OppIdentity(_) | Formula::Butterfly => self.clone(),
            Formula::Diagonal(_) => self.clone(),
            Formula::Permutation(p) => Formula::Permutation(invert_map(p)),
            Formula::Stride { n, m } => Formula::Stride { n: *n, m: n / m },
            Formula::OddStride { n, m } => Formula::OddStride {
                n: *n,
                m: (n + 1) / m,
            },
            Formula::Dense(b) => {
                let mut e = Vec::with_capacity(b.entries.len());
                for j in 0..b.cols {
                    for i in 0..b.rows {
                        e.push(b.get(i, j));
                    }
                }
                Formula::Dense(DenseBlock {
                    rows: b.cols,
                    cols: b.rows,
                    entries: e,
                })
            }
            Formula::Compose(fs) => {
                Formula::Compose(fs.iter().rev().map(|f| f.transpose()).collect())
            }
            Formula::DirectSum(bs) => {
                Formula::DirectSum(bs.iter().map(|f| f.transpose()).collect())
            }
            Formula::KronLeft(a, m) => Formula::KronLeft(Box::new(a.transpose()), *m),
            Formula::KronRight(k, b) => Formula::KronRight(*k, Box::new(b.transpose())),
            Formula::Leaf(l) => {
                let t = Formula::Leaf(Leaf::new(l.id.transposed()));
                match &l.scale {
                    None => t,
                    Some(s) => Formula::Compose(vec![Self::diag_real(s), t]),
                }
            }
        }
    }

    // ---- cost -----------------------------------------------------------

    /// Arithmetic cost; transform leaves contribute nothing (see
    /// [`Formula::cost_with`]).
    pub fn cost(&self) -> CostTriple {
        self.cost_with(&mut |_| CostTriple::ZERO)
    }

    /// Arithmetic cost with a caller-supplied price for each leaf.
    pub fn cost_with(&self, leaf_cost: &mut dyn FnMut(&Leaf) -> CostTriple) -> CostTriple {
        match self {
            Formula::Identity(_)
            | Formula::OppIdentity(_)
            | Formula::Permutation(_)
            | Formula::Stride { .. }
            | Formula::OddStride { .. } => CostTriple::ZERO,
            Formula::Butterfly => CostTriple::new(2, 0, 0),
            Formula::Diagonal(d) => {
                let mut c = CostTriple::ZERO;
                for &e in d {
                    c.charge(e.price());
                }
                c
            }
            Formula::Dense(b) => {
                let mut c = CostTriple::ZERO;
                for i in 0..b.rows {
                    let mut z = 0;
                    for j in 0..b.cols {
                        let p = b.get(i, j).price();
                        if p != Price::Zero {
                            z += 1;
                            c.charge(p);
                        }
                    }
                    if z > 0 {
                        c.adds += z - 1;
                    }
                }
                c
            }
            Formula::Compose(fs) | Formula::DirectSum(fs) => {
                let mut c = CostTriple::ZERO;
                for f in fs {
                    c += f.cost_with(leaf_cost);
                }
                c
            }
            Formula::KronLeft(a, m) => a.cost_with(leaf_cost) * (*m as u64),
            Formula::KronRight(k, b) => b.cost_with(leaf_cost) * (*k as u64),
            Formula::Leaf(l) => leaf_cost(l),
        }
    }

    // ---- serialization --------------------------------------------------

    /// Parenthesized prefix text form.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s);
        s
    }

    fn write_sexpr(&self, s: &mut String) {
        use std::fmt::Write;
        match self {
            Formula::Identity(n) => write!(s, "(I {n})").unwrap(),
            Formula::OppIdentity(n) => write!(s, "(J {n})").unwrap(),
            Formula::Butterfly => s.push_str("(F2)"),
            Formula::Diagonal(d) => {
                s.push_str("(diag");
                for e in d {
                    s.push(' ');
                    s.push_str(&e.to_text());
                }
                s.push(')');
            }
            Formula::Permutation(p) => {
                s.push_str("(perm");
                for i in p {
                    write!(s, " {i}").unwrap();
                }
                s.push(')');
            }
            Formula::Stride { n, m } => write!(s, "(stride {n} {m})").unwrap(),
            Formula::OddStride { n, m } => write!(s, "(ostride {n} {m})").unwrap(),
            Formula::Dense(b) => {
                write!(s, "(dense {} {}", b.rows, b.cols).unwrap();
                for e in &b.entries {
                    s.push(' ');
                    s.push_str(&e.to_text());
                }
                s.push(')');
            }
            Formula::Compose(fs) | Formula::DirectSum(fs) => {
                s.push_str(if matches!(self, Formula::Compose(_)) {
                    "(compose"
                } else {
                    "(dsum"
                });
                for f in fs {
                    s.push(' ');
                    f.write_sexpr(s);
                }
                s.push(')');
            }
            Formula::KronLeft(a, m) => {
                s.push_str("(kronl ");
                a.write_sexpr(s);
                write!(s, " {m})").unwrap();
            }
            Formula::KronRight(k, b) => {
                write!(s, "(kronr {k} ").unwrap();
                b.write_sexpr(s);
                s.push(')');
            }
            Formula::Leaf(l) => {
                write!(s, "(leaf {} {}", l.id.spec_name(), l.id.n).unwrap();
                if let Some(r) = l.id.r {
                    write!(s, " (r {r})").unwrap();
                }
                if let Some(a) = l.id.a {
                    write!(s, " (a {a})").unwrap();
                }
                if let Some(sc) = &l.scale {
                    s.push_str(" (scale");
                    for &e in sc {
                        s.push(' ');
                        s.push_str(&real_text(e));
                    }
                    s.push(')');
                }
                s.push(')');
            }
        }
    }

    /// Parse the text form produced by [`Formula::to_sexpr`].
    pub fn parse_sexpr(text: &str) -> Result<Formula<S>, FormulaError> {
        let toks = tokenize(text);
        let mut pos = 0;
        let f = parse_node::<S>(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(FormulaError::Parse(format!(
                "trailing input at token {pos}"
            )));
        }
        f.validate()?;
        Ok(f)
    }
}

impl Formula<f64> {
    /// The same real formula over another scalar field.
    pub fn lift<S: Scalar>(&self) -> Formula<S> {
        let dense = |b: &DenseBlock<f64>| DenseBlock {
            rows: b.rows,
            cols: b.cols,
            entries: b.entries.iter().map(|&v| S::of_real(v)).collect(),
        };
        match self {
            Formula::Identity(n) => Formula::Identity(*n),
            Formula::OppIdentity(n) => Formula::OppIdentity(*n),
            Formula::Butterfly => Formula::Butterfly,
            Formula::Diagonal(d) => Formula::Diagonal(d.iter().map(|&v| S::of_real(v)).collect()),
            Formula::Permutation(p) => Formula::Permutation(p.clone()),
            Formula::Stride { n, m } => Formula::Stride { n: *n, m: *m },
            Formula::OddStride { n, m } => Formula::OddStride { n: *n, m: *m },
            Formula::Dense(b) => Formula::Dense(dense(b)),
            Formula::Compose(fs) => Formula::Compose(fs.iter().map(|f| f.lift()).collect()),
            Formula::DirectSum(fs) => Formula::DirectSum(fs.iter().map(|f| f.lift()).collect()),
            Formula::KronLeft(a, m) => Formula::KronLeft(Box::new(a.lift()), *m),
            Formula::KronRight(k, b) => Formula::KronRight(*k, Box::new(b.lift())),
            Formula::Leaf(l) => Formula::Leaf(l.clone()),
        }
    }
}

impl<S: Scalar> fmt::Display for Formula<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

fn tokenize(text: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    toks
}

fn perr(msg: impl Into<String>) -> FormulaError {
    FormulaError::Parse(msg.into())
}

fn expect(toks: &[String], pos: &mut usize, what: &str) -> Result<(), FormulaError> {
    if toks.get(*pos).map(String::as_str) == Some(what) {
        *pos += 1;
        Ok(())
    } else {
        Err(perr(format!("expected '{what}' at token {}", *pos)))
    }
}

fn atom<'a>(toks: &'a [String], pos: &mut usize) -> Result<&'a str, FormulaError> {
    match toks.get(*pos) {
        Some(t) if t != "(" && t != ")" => {
            *pos += 1;
            Ok(t)
        }
        _ => Err(perr(format!("expected atom at token {}", *pos))),
    }
}

fn usize_atom(toks: &[String], pos: &mut usize) -> Result<usize, FormulaError> {
    let a = atom(toks, pos)?;
    a.parse().map_err(|_| perr(format!("bad integer '{a}'")))
}

fn atoms_until_close<'a>(
    toks: &'a [String],
    pos: &mut usize,
) -> Result<Vec<&'a str>, FormulaError> {
    let mut out = Vec::new();
    while toks.get(*pos).map(String::as_str) != Some(")") {
        out.push(atom(toks, pos)?);
    }
    *pos += 1;
    Ok(out)
}

fn scalars<S: Scalar>(xs: &[&str]) -> Result<Vec<S>, FormulaError> {
    xs.iter()
        .map(|t| S::from_text(t).ok_or_else(|| perr(format!("bad number '{t}'"))))
        .collect()
}

fn parse_node<S: Scalar>(toks: &[String], pos: &mut usize) -> Result<Formula<S>, FormulaError> {
    expect(toks, pos, "(")?;
    let head = atom(toks, pos)?.to_string();
    let node = match head.as_str() {
        "I" => {
            let n = usize_atom(toks, pos)?;
            expect(toks, pos, ")")?;
            Formula::Identity(n)
        }
        "J" => {
            let n = usize_atom(toks, pos)?;
            expect(toks, pos, ")")?;
            Formula::OppIdentity(n)
        }
        "F2" => {
            expect(toks, pos, ")")?;
            Formula::Butterfly
        }
        "diag" => Formula::Diagonal(scalars(&atoms_until_close(toks, pos)?)?),
        "perm" => {
            let xs = atoms_until_close(toks, pos)?;
            let map = xs
                .iter()
                .map(|t| t.parse().map_err(|_| perr(format!("bad index '{t}'"))))
                .collect::<Result<Vec<usize>, _>>()?;
            Formula::perm(map)?
        }
        "stride" | "ostride" => {
            let n = usize_atom(toks, pos)?;
            let m = usize_atom(toks, pos)?;
            expect(toks, pos, ")")?;
            if head == "stride" {
                Formula::stride(n, m)?
            } else {
                Formula::odd_stride(n, m)?
            }
        }
        "dense" => {
            let r = usize_atom(toks, pos)?;
            let c = usize_atom(toks, pos)?;
            let xs = atoms_until_close(toks, pos)?;
            Formula::dense(r, c, scalars(&xs)?)?
        }
        "compose" | "dsum" => {
            let mut fs = Vec::new();
            while toks.get(*pos).map(String::as_str) == Some("(") {
                fs.push(parse_node(toks, pos)?);
            }
            expect(toks, pos, ")")?;
            if head == "compose" {
                Formula::Compose(fs)
            } else {
                Formula::DirectSum(fs)
            }
        }
        "kronl" => {
            let a = parse_node(toks, pos)?;
            let m = usize_atom(toks, pos)?;
            expect(toks, pos, ")")?;
            Formula::KronLeft(Box::new(a), m)
        }
        "kronr" => {
            let k = usize_atom(toks, pos)?;
            let b = parse_node(toks, pos)?;
            expect(toks, pos, ")")?;
            Formula::KronRight(k, Box::new(b))
        }
        "leaf" => {
            let name = atom(toks, pos)?.to_string();
            let n = usize_atom(toks, pos)?;
            let mut r = None;
            let mut a = None;
            let mut scale = None;
            while toks.get(*pos).map(String::as_str) == Some("(") {
                *pos += 1;
                let key = atom(toks, pos)?.to_string();
                let xs = atoms_until_close(toks, pos)?;
                match key.as_str() {
                    "r" | "a" => {
                        let q = xs
                            .first()
                            .and_then(|t| reference::parse_rational(t))
                            .ok_or_else(|| perr("bad rational in leaf"))?;
                        if key == "r" {
                            r = Some(q)
                        } else {
                            a = Some(q)
                        }
                    }
                    "scale" => scale = Some(scalars::<f64>(&xs)?),
                    _ => return Err(perr(format!("unknown leaf attribute '{key}'"))),
                }
            }
            expect(toks, pos, ")")?;
            let mut id = TransformId::parse_spec(&name, n)
                .map_err(|e| perr(format!("bad leaf spec '{name}': {e}")))?;
            if let Some(q) = a {
                id.a = Some(q);
            }
            if let Some(q) = r {
                id = id.with_skew(q);
            }
            Formula::Leaf(Leaf { id, scale })
        }
        other => return Err(perr(format!("unknown constructor '{other}'"))),
    };
    Ok(node)
}
