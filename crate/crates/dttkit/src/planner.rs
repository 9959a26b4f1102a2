//! Recursive planning: choose a rule for every transform leaf until only
//! base cases remain, price the result, verify it against the reference
//! matrices and compare it with the closed-form cost tables.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{CostTriple, DenseBlock, Formula, FormulaError, Leaf, Scalar};
use crate::reference::{fmt_rational, Family, TransformId};
use crate::rules::derive::DENSE_CAP;
use crate::rules::{candidates, expand, Candidate, RuleError, DEFINITION_MAX, TAGS};

/// Largest transform size the planner accepts.
pub const MAX_N: usize = 4096;
/// Largest size verified by full densification; larger plans are checked
/// by applying them to random vectors only.
pub const DENSE_VERIFY_MAX: usize = 256;
/// Number of random vectors used by the apply spot-check.
pub const SPOT_CHECKS: usize = 10;
/// Verification tolerance (relative Frobenius / Euclidean error).
pub const TOLERANCE: f64 = 1e-10;

/// Representative skew parameter used to price skew transforms, so that
/// costs never depend on constants that happen to be trivial for one `r`.
pub fn surrogate_r() -> Rational64 {
    Rational64::new(7, 19)
}

/// Errors raised by planning and verification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("{0} exceeds the maximum supported size {MAX_N}")]
    TooLarge(String),
    #[error("no plan for {0}: {1}")]
    Unreachable(String, String),
    #[error("unknown strategy {0:?}")]
    BadStrategy(String),
    #[error("no closed-form cost for {0}")]
    NoClosedForm(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("reference unavailable for {0}: {1}")]
    Reference(String, String),
}

/// How the planner picks among the admissible rules of each transform.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Exhaustive search for the cheapest plan.
    MinCost,
    /// Split with radix `k` wherever a rule takes that split.
    Radix(usize),
    /// Radix 2 for even sizes, cheapest choice otherwise.
    Radix2WherePossible,
    /// The split closest to `√n`.
    Balanced,
    /// Prefer the U/V/W-group factorizations.
    Fact,
    /// Use the named rule wherever it applies.
    Rule(String),
}

impl Strategy {
    /// The candidates this strategy prefers; an empty result (or one where
    /// nothing succeeds) falls back to the full candidate list.
    fn preferred(&self, t: &TransformId, all: &[Candidate]) -> Vec<Candidate> {
        let with_k = |k: usize| all.iter().copied().filter(|c| c.k == Some(k)).collect();
        match self {
            Strategy::MinCost => all.to_vec(),
            Strategy::Radix(k) => with_k(*k),
            Strategy::Radix2WherePossible => with_k(2),
            Strategy::Balanced => {
                let root = (t.n as f64).sqrt();
                let best = all.iter().filter_map(|c| c.k).min_by(|a, b| {
                    let da = (*a as f64 - root).abs();
                    let db = (*b as f64 - root).abs();
                    da.total_cmp(&db).then(a.cmp(b))
                });
                best.map(with_k).unwrap_or_default()
            }
            Strategy::Fact => all
                .iter()
                .copied()
                .filter(|c| c.tag.starts_with("fact-"))
                .collect(),
            Strategy::Rule(tag) => all.iter().copied().filter(|c| c.tag == tag).collect(),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::MinCost => f.write_str("min-cost"),
            Strategy::Radix(k) => write!(f, "radix{k}"),
            Strategy::Radix2WherePossible => f.write_str("radix2-where-possible"),
            Strategy::Balanced => f.write_str("balanced"),
            Strategy::Fact => f.write_str("fact"),
            Strategy::Rule(tag) => write!(f, "rule:{tag}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = PlanError;
    fn from_str(s: &str) -> Result<Self, PlanError> {
        let bad = || PlanError::BadStrategy(s.to_string());
        Ok(match s {
            "min-cost" => Strategy::MinCost,
            "radix2-where-possible" => Strategy::Radix2WherePossible,
            "balanced" => Strategy::Balanced,
            "fact" => Strategy::Fact,
            _ => {
                if let Some(tag) = s.strip_prefix("rule:") {
                    if !TAGS.contains(&tag) {
                        return Err(bad());
                    }
                    Strategy::Rule(tag.to_string())
                } else if let Some(k) = s.strip_prefix("radix") {
                    let k: usize = k.parse().map_err(|_| bad())?;
                    if k < 2 {
                        return Err(bad());
                    }
                    Strategy::Radix(k)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

/// A fully expanded algorithm: the rule applied at the root and one child
/// plan per transform leaf of the rule's formula, in leaf order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub id: TransformId,
    pub rule: Candidate,
    pub children: Vec<Plan>,
    /// Cost under generic pricing of skew constants.
    pub cost: CostTriple,
}

impl Plan {
    /// Compact one-line rule trace, e.g. `via-T-basis-fused[k=2](base, base×2)`.
    pub fn trace(&self) -> String {
        let mut s = self.rule.to_string();
        if self.children.is_empty() {
            return s;
        }
        let kids: Vec<String> = self.children.iter().map(Plan::trace).collect();
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < kids.len() {
            let mut j = i + 1;
            while j < kids.len() && kids[j] == kids[i] {
                j += 1;
            }
            if j - i > 1 {
                parts.push(format!("{}×{}", kids[i], j - i));
            } else {
                parts.push(kids[i].clone());
            }
            i = j;
        }
        s.push('(');
        s.push_str(&parts.join(", "));
        s.push(')');
        s
    }

    /// Multi-line tree rendering with the transform, rule and cost per node.
    pub fn tree(&self) -> String {
        let mut out = String::new();
        self.write_tree(&mut out, "", "");
        out
    }

    fn write_tree(&self, out: &mut String, head: &str, tail: &str) {
        out.push_str(&format!(
            "{head}{}  {}  {}\n",
            self.id, self.rule, self.cost
        ));
        let n = self.children.len();
        for (i, c) in self.children.iter().enumerate() {
            let last = i + 1 == n;
            let (h, t) = if last {
                ("└─ ", "   ")
            } else {
                ("├─ ", "│  ")
            };
            c.write_tree(out, &format!("{tail}{h}"), &format!("{tail}{t}"));
        }
    }

    /// Number of nodes in the plan tree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Plan::size).sum::<usize>()
    }

    /// Every rule tag used anywhere in the plan.
    pub fn tags(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule.tag];
        for c in &self.children {
            out.extend(c.tags());
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Arithmetic cost of a plan (generic pricing of skew constants).
pub fn plan_cost(p: &Plan) -> CostTriple {
    p.cost
}

/// The shape of a plan, computed for the memo key of a transform and
/// instantiated for the actual transform by [`Planner::plan`].
#[derive(Debug)]
struct Skeleton {
    rule: Candidate,
    cost: CostTriple,
    children: Vec<Rc<Skeleton>>,
}

type Outcome = Result<Rc<Skeleton>, String>;

/// A planning session: a strategy and its memo table.
pub struct Planner {
    strategy: Strategy,
    memo: HashMap<TransformId, Outcome>,
    /// Answers that depend on an unfinished ancestor (at the stored depth);
    /// valid only until that ancestor finishes.
    provisional: HashMap<TransformId, (Outcome, usize)>,
    stack: Vec<TransformId>,
}

/// Memo key: the transform with any skew parameter in `(0, 1)` replaced by
/// the pricing surrogate.
fn memo_key(t: &TransformId) -> TransformId {
    match t.r {
        Some(r) if r > Rational64::from_integer(0) && r < Rational64::from_integer(1) => {
            t.clone().with_skew(surrogate_r())
        }
        _ => t.clone(),
    }
}

/// Ordering of equally cheap alternatives: total, then general mults, then
/// the rule's position in the catalog (structured algorithms before
/// rewrites, duality first among the rewrites), then the split.
fn rank(rule: &Candidate, cost: &CostTriple) -> (u64, u64, usize, Option<usize>) {
    let tag = TAGS
        .iter()
        .position(|t| *t == rule.tag)
        .unwrap_or(TAGS.len());
    (cost.total(), cost.mults, tag, rule.k)
}

impl Planner {
    pub fn new(strategy: Strategy) -> Self {
        Planner {
            strategy,
            memo: HashMap::new(),
            provisional: HashMap::new(),
            stack: Vec::new(),
        }
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    /// Plan `t` under this planner's strategy.
    pub fn plan(&mut self, t: &TransformId) -> Result<Plan, PlanError> {
        if t.n > MAX_N {
            return Err(PlanError::TooLarge(t.to_string()));
        }
        t.validate().map_err(RuleError::from)?;
        let skel = self.solve(t).0.map_err(|why| {
            PlanError::Unreachable(t.to_string(), format!("{} ({why})", blocking_constraint(t)))
        })?;
        instantiate(t, &skel)
    }

    /// Best plan shape for `t`; the second value is the lowest stack depth
    /// of an unfinished ancestor the answer depends on (`usize::MAX` if none).
    fn solve(&mut self, t: &TransformId) -> (Outcome, usize) {
        let key = memo_key(t);
        if let Some(o) = self.memo.get(&key) {
            return (o.clone(), usize::MAX);
        }
        if let Some((o, low)) = self.provisional.get(&key) {
            return (o.clone(), *low);
        }
        if let Some(pos) = self.stack.iter().position(|s| *s == key) {
            return (Err(format!("rewrite cycle through {key}")), pos);
        }
        let depth = self.stack.len();
        self.stack.push(key.clone());
        let all = candidates(&key);
        let preferred = self.strategy.preferred(&key, &all);
        let (mut best, mut low) = self.search(&key, &preferred);
        if best.is_err() && preferred.len() != all.len() {
            let (b, l) = self.search(&key, &all);
            best = b;
            low = low.min(l);
        }
        if best.is_err() && key.n > DEFINITION_MAX && key.n <= DENSE_CAP {
            // Last resort: the transform's own definition as a dense block.
            let dense = Candidate {
                tag: "definition",
                k: None,
            };
            if let (Ok(sk), _) = self.node(&key, dense) {
                best = Ok(Rc::new(sk));
            }
        }
        self.stack.pop();
        self.provisional.retain(|_, (_, l)| *l < depth);
        if low >= depth {
            self.memo.insert(key, best.clone());
            low = usize::MAX;
        } else {
            self.provisional.insert(key, (best.clone(), low));
        }
        (best, low)
    }

    fn search(&mut self, key: &TransformId, cands: &[Candidate]) -> (Outcome, usize) {
        if cands.is_empty() {
            return (Err(blocking_constraint(key)), usize::MAX);
        }
        let mut low = usize::MAX;
        let mut best: Option<Skeleton> = None;
        let mut first_err = None;
        for &c in cands {
            let (res, l) = self.node(key, c);
            low = low.min(l);
            match res {
                Ok(sk) => {
                    if best
                        .as_ref()
                        .is_none_or(|b| rank(&sk.rule, &sk.cost) < rank(&b.rule, &b.cost))
                    {
                        best = Some(sk);
                    }
                }
                Err(e) => {
                    first_err.get_or_insert(format!("{c}: {e}"));
                }
            }
        }
        match best {
            Some(sk) => (Ok(Rc::new(sk)), low),
            None => (Err(first_err.unwrap_or_default()), low),
        }
    }

    fn node(&mut self, t: &TransformId, c: Candidate) -> (Result<Skeleton, String>, usize) {
        if c.tag == "transpose" {
            let (o, l) = self.solve(&t.untransposed());
            return (
                o.map(|child| Skeleton {
                    rule: c,
                    cost: child.cost,
                    children: vec![child],
                }),
                l,
            );
        }
        if t.is_dft() {
            self.node_in::<Complex64>(t, c)
        } else {
            self.node_in::<f64>(t, c)
        }
    }

    fn node_in<S: Scalar>(
        &mut self,
        t: &TransformId,
        c: Candidate,
    ) -> (Result<Skeleton, String>, usize) {
        let f = match expand::<S>(c.tag, t, c.k) {
            Ok(f) => f,
            Err(e) => return (Err(e.to_string()), usize::MAX),
        };
        let leaves: Vec<Leaf> = f.leaves().into_iter().cloned().collect();
        let mut low = usize::MAX;
        let mut costs = Vec::with_capacity(leaves.len());
        let mut children = Vec::with_capacity(leaves.len());
        for leaf in &leaves {
            let (o, l) = self.solve(&leaf.id);
            low = low.min(l);
            let child = match o {
                Ok(sk) => sk,
                Err(e) => return (Err(format!("{}: {e}", leaf.id)), low),
            };
            let cost = match &leaf.scale {
                None => child.cost,
                Some(s) => match instantiate(&leaf.id, &child).and_then(|p| resolve::<S>(&p)) {
                    Ok(g) => fuse_scale(g, s).cost(),
                    Err(e) => return (Err(e.to_string()), low),
                },
            };
            costs.push(cost);
            children.push(child);
        }
        let mut i = 0;
        let cost = f.cost_with(&mut |_| {
            i += 1;
            costs[i - 1]
        });
        (
            Ok(Skeleton {
                rule: c,
                cost,
                children,
            }),
            low,
        )
    }
}

/// Build the plan of `t` following a plan shape computed for its memo key.
fn instantiate(t: &TransformId, skel: &Skeleton) -> Result<Plan, PlanError> {
    let ids = if skel.rule.tag == "transpose" {
        vec![t.untransposed()]
    } else {
        expand_node(t, skel.rule)?.leaf_ids()
    };
    if ids.len() != skel.children.len() {
        return Err(PlanError::Unreachable(
            t.to_string(),
            format!("{} changes shape with the skew parameter", skel.rule),
        ));
    }
    let children = ids
        .iter()
        .zip(&skel.children)
        .map(|(id, c)| instantiate(id, c))
        .collect::<Result<_, _>>()?;
    Ok(Plan {
        id: t.clone(),
        rule: skel.rule,
        children,
        cost: skel.cost,
    })
}

/// Why no rule applies to `t`, phrased as the violated size constraint.
fn blocking_constraint(t: &TransformId) -> String {
    let name = t.to_string();
    match t.group() {
        Some(g) => format!(
            "no admissible rule for {name} in the {g}: the factorization and decomposition rules \
             need sizes of the form they split (e.g. n = km + (k±1)/2 for the V/W groups), \
             n ≤ {DENSE_CAP} for the dense-derived rules, or a skew parameter in (0, 1)"
        ),
        None => format!("no admissible rule for {name}"),
    }
}

trait LeafIds {
    fn leaf_ids(&self) -> Vec<TransformId>;
}

impl<S: Scalar> LeafIds for Formula<S> {
    fn leaf_ids(&self) -> Vec<TransformId> {
        self.leaves().into_iter().map(|l| l.id.clone()).collect()
    }
}

enum Node {
    Real(Formula<f64>),
    Complex(Formula<Complex64>),
}

impl Node {
    fn leaf_ids(&self) -> Vec<TransformId> {
        match self {
            Node::Real(f) => f.leaf_ids(),
            Node::Complex(f) => f.leaf_ids(),
        }
    }
}

fn expand_node(t: &TransformId, c: Candidate) -> Result<Node, RuleError> {
    Ok(if t.is_dft() {
        Node::Complex(expand::<Complex64>(c.tag, t, c.k)?)
    } else {
        Node::Real(expand::<f64>(c.tag, t, c.k)?)
    })
}

/// Plan `t` with a fresh planner.
pub fn plan(t: &TransformId, s: &Strategy) -> Result<Plan, PlanError> {
    Planner::new(s.clone()).plan(t)
}

/// The fully concrete formula of a plan: every leaf is replaced by the
/// resolution of its child plan, with leaf scalings fused into the child.
pub fn resolve<S: Scalar>(p: &Plan) -> Result<Formula<S>, PlanError> {
    if p.rule.tag == "transpose" {
        let child = p.children.first().ok_or_else(|| {
            PlanError::Unreachable(p.id.to_string(), "transpose without child".into())
        })?;
        return Ok(resolve::<S>(child)?.transpose());
    }
    let f = expand::<S>(p.rule.tag, &p.id, p.rule.k)?;
    let mut i = 0;
    let out = f.map_leaves(&mut |leaf: &Leaf| -> Result<Formula<S>, PlanError> {
        let child = p.children.get(i).ok_or_else(|| {
            PlanError::Unreachable(p.id.to_string(), format!("missing child for {}", leaf.id))
        })?;
        i += 1;
        let r = resolve::<S>(child)?;
        Ok(match &leaf.scale {
            Some(s) => fuse_scale(r, s),
            None => r,
        })
    })?;
    Ok(simplify(out))
}

/// Flatten nested compositions.
fn simplify<S: Scalar>(f: Formula<S>) -> Formula<S> {
    match f {
        Formula::Compose(fs) => {
            let mut out = Vec::with_capacity(fs.len());
            for g in fs {
                match simplify(g) {
                    Formula::Compose(inner) => out.extend(inner),
                    g => out.push(g),
                }
            }
            if out.len() == 1 {
                out.pop().expect("one factor")
            } else {
                Formula::Compose(out)
            }
        }
        Formula::DirectSum(fs) => Formula::DirectSum(fs.into_iter().map(simplify).collect()),
        Formula::KronLeft(a, m) => Formula::KronLeft(Box::new(simplify(*a)), m),
        Formula::KronRight(k, b) => Formula::KronRight(k, Box::new(simplify(*b))),
        other => other,
    }
}

/// `f · diag(scale)`, with the scaling merged into the rightmost factor
/// that can absorb it (pushed through permutations and split over direct
/// sums).
pub fn fuse_scale<S: Scalar>(f: Formula<S>, scale: &[f64]) -> Formula<S> {
    if scale.iter().all(|&v| v == 1.0) {
        return f;
    }
    let s = |v: f64| S::of_real(v);
    match f {
        Formula::Identity(_) => Formula::Diagonal(scale.iter().map(|&v| s(v)).collect()),
        Formula::Diagonal(d) => {
            Formula::Diagonal(d.into_iter().zip(scale).map(|(a, &b)| a * s(b)).collect())
        }
        Formula::Butterfly => Formula::Dense(DenseBlock {
            rows: 2,
            cols: 2,
            entries: vec![s(scale[0]), s(scale[1]), s(scale[0]), s(-scale[1])],
        }),
        Formula::Dense(mut b) => {
            let cols = b.cols;
            for row in b.entries.chunks_mut(cols) {
                for (e, &d) in row.iter_mut().zip(scale) {
                    *e *= s(d);
                }
            }
            Formula::Dense(b)
        }
        Formula::Leaf(mut l) => {
            let merged = match l.scale.take() {
                Some(old) => old.iter().zip(scale).map(|(a, b)| a * b).collect(),
                None => scale.to_vec(),
            };
            l.scale = Some(merged);
            Formula::Leaf(l)
        }
        Formula::Compose(mut fs) => {
            // Push the scaling leftwards through trailing permutations.
            let mut carried = scale.to_vec();
            let mut tail = Vec::new();
            while let Some(last) = fs.pop() {
                match last.permutation_map() {
                    Some(map) => {
                        carried = map.iter().map(|&j| carried[j]).collect();
                        tail.push(last);
                    }
                    None => {
                        fs.push(fuse_scale(last, &carried));
                        break;
                    }
                }
            }
            if fs.is_empty() {
                fs.push(Formula::Diagonal(carried.iter().map(|&v| s(v)).collect()));
            }
            fs.extend(tail.into_iter().rev());
            Formula::Compose(fs)
        }
        Formula::DirectSum(bs) => {
            let mut off = 0;
            Formula::DirectSum(
                bs.into_iter()
                    .map(|b| {
                        let c = b.cols();
                        let r = fuse_scale(b, &scale[off..off + c]);
                        off += c;
                        r
                    })
                    .collect(),
            )
        }
        Formula::KronRight(k, b) => {
            let c = b.cols();
            Formula::DirectSum(
                (0..k)
                    .map(|t| fuse_scale((*b).clone(), &scale[t * c..(t + 1) * c]))
                    .collect(),
            )
        }
        other => {
            if let Some(map) = other.permutation_map() {
                let carried: Vec<S> = map.iter().map(|&j| s(scale[j])).collect();
                Formula::Compose(vec![Formula::Diagonal(carried), other])
            } else {
                Formula::Compose(vec![
                    other,
                    Formula::Diagonal(scale.iter().map(|&v| s(v)).collect()),
                ])
            }
        }
    }
}

/// Result of checking a plan against its reference matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    /// Relative Frobenius error of the densified plan (sizes ≤ 256).
    pub dense_error: Option<f64>,
    /// Largest relative error over the random apply spot-checks.
    pub apply_error: f64,
}

impl Verification {
    pub fn max_error(&self) -> f64 {
        self.dense_error.unwrap_or(0.0).max(self.apply_error)
    }

    pub fn passed(&self) -> bool {
        self.max_error() <= TOLERANCE
    }
}

/// Verify a plan: densify (up to [`DENSE_VERIFY_MAX`]) and apply it to
/// [`SPOT_CHECKS`] random vectors drawn from `seed`.
pub fn verify_plan(p: &Plan, seed: u64) -> Result<Verification, PlanError> {
    if p.id.is_dft() {
        verify_in::<Complex64>(p, seed)
    } else {
        verify_in::<f64>(p, seed)
    }
}

fn random_vector<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<S> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            S::of_complex(Complex64::new(re, im)).unwrap_or_else(|| S::of_real(re))
        })
        .collect()
}

fn verify_in<S: Scalar>(p: &Plan, seed: u64) -> Result<Verification, PlanError> {
    let f: Formula<S> = resolve(p)?;
    let reference = S::leaf_matrix(&p.id).map_err(|e| PlanError::Reference(p.id.to_string(), e))?;
    let n = p.id.n;
    let dense_error = if n <= DENSE_VERIFY_MAX {
        Some(crate::reference::rel_error(&f.densify()?, &reference))
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut apply_error: f64 = 0.0;
    for _ in 0..SPOT_CHECKS {
        let x = random_vector::<S>(&mut rng, n);
        let y = f.apply(&x)?;
        let want = &reference * nalgebra::DVector::from_vec(x);
        let diff: f64 = y
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (*a - *b).modulus_squared())
            .sum();
        let norm: f64 = want.iter().map(|b| b.modulus_squared()).sum();
        let err = if norm > 0.0 {
            (diff / norm).sqrt()
        } else {
            diff.sqrt()
        };
        apply_error = apply_error.max(err);
    }
    Ok(Verification {
        dense_error,
        apply_error,
    })
}

// ---------------------------------------------------------------------------
// Closed-form costs.

/// `Some(t)` with `n = b^t`.
fn exact_log(n: usize, b: usize) -> Option<i64> {
    if n == 0 {
        return None;
    }
    let (mut m, mut t) = (n, 0);
    while m % b == 0 {
        m /= b;
        t += 1;
    }
    (m == 1).then_some(t)
}

fn triple(adds: Rational64, mults: Rational64, m2: Rational64) -> Option<CostTriple> {
    let int = |q: Rational64| {
        (q.is_integer() && q >= Rational64::from_integer(0)).then(|| q.to_integer() as u64)
    };
    Some(CostTriple::new(int(adds)?, int(mults)?, int(m2)?))
}

/// Closed-form cost of a T-group transform of 2-power or 3-power size, as
/// achieved by the algorithms of the rule catalog.  Transposed transforms
/// and the transposed partners (DCT-2, DST-2) cost the same as the
/// originals.
pub fn closed_form_cost(t: &TransformId) -> Result<CostTriple, PlanError> {
    let none = || PlanError::NoClosedForm(t.to_string());
    if t.inverse || !t.is_dtt() {
        return Err(none());
    }
    let ty = match t.ty {
        2 if !t.is_skew() && !t.poly => 3,
        ty => ty,
    };
    if !matches!(ty, 3 | 4) {
        return Err(none());
    }
    let n = t.n as i64;
    let q = |a: i64, b: i64| Rational64::new(a, b);
    let nn = q(n, 1);
    let skew = t.is_skew();
    let dct = t.family == Family::Dct;
    if let Some(l) = exact_log(t.n, 2) {
        let nl = nn * l;
        let (adds, mut mults) = match (ty, dct, skew) {
            (3, true, _) | (3, false, false) => (nl * q(3, 2) - nn + 1, nl / 2),
            (3, false, true) => (nl * q(3, 2) - nn + 1, nl / 2 + nn / 2),
            _ => (nl * q(3, 2), nl / 2 + nn),
        };
        if t.poly {
            match (ty, dct, skew) {
                (3, true, _) | (3, false, false) => {}
                (3, false, true) => mults -= nn / 2,
                _ => mults -= nn,
            }
        }
        return triple(adds, mults, q(0, 1)).ok_or_else(none);
    }
    if let Some(l) = exact_log(t.n, 3) {
        if t.poly {
            return Err(none());
        }
        let nl = nn * l;
        let (a, b) = (q(8, 3), q(4, 3));
        let half = nn / 2 - q(1, 2);
        let (adds, mults, m2) = match (ty, dct, skew) {
            (3, _, false) => (a * nl - nn * 2 + 2, b * nl - nn * q(3, 2) + q(3, 2), half),
            (3, true, true) => (a * nl - nn + 1, b * nl, q(0, 1)),
            (3, false, true) => (a * nl - nn + 1, b * nl + nn / 2 + q(1, 2), half),
            (4, _, false) => (a * nl - nn + 1, b * nl - nn / 2 + q(3, 2), half),
            _ => (a * nl, b * nl + nn / 2 + q(1, 2), half),
        };
        return triple(adds, mults, m2).ok_or_else(none);
    }
    Err(none())
}

// ---------------------------------------------------------------------------
// Cost report.

/// One row of the cost report.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub transform: String,
    pub n: usize,
    pub trace: String,
    pub cost: CostTriple,
    pub closed_form: Option<CostTriple>,
}

impl CostRow {
    pub fn from_plan(p: &Plan) -> Self {
        CostRow {
            transform: transform_label(&p.id),
            n: p.id.n,
            trace: p.trace(),
            cost: p.cost,
            closed_form: closed_form_cost(&p.id).ok(),
        }
    }

    /// Plan total minus closed-form total.
    pub fn delta(&self) -> Option<i64> {
        self.closed_form
            .map(|c| self.cost.total() as i64 - c.total() as i64)
    }
}

fn transform_label(t: &TransformId) -> String {
    let mut s = t.spec_name();
    if let Some(r) = t.r {
        s.push_str(&format!("(r={})", fmt_rational(r)));
    }
    s
}

const HEADER: [&str; 9] = [
    "transform",
    "n",
    "rule-trace",
    "adds",
    "mults",
    "m2",
    "total",
    "closed-form total",
    "delta",
];

fn row_cells(r: &CostRow) -> [String; 9] {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".to_string());
    [
        r.transform.clone(),
        r.n.to_string(),
        r.trace.clone(),
        r.cost.adds.to_string(),
        r.cost.mults.to_string(),
        r.cost.two_power_mults.to_string(),
        r.cost.total().to_string(),
        opt(r.closed_form.map(|c| c.total().to_string())),
        opt(r.delta().map(|d| format!("{d:+}"))),
    ]
}

/// Width at which the text table shortens rule traces (the CSV keeps them whole).
pub const TRACE_WIDTH: usize = 60;

fn shorten(s: &str) -> String {
    if s.chars().count() <= TRACE_WIDTH {
        s.to_string()
    } else {
        let head: String = s.chars().take(TRACE_WIDTH - 1).collect();
        format!("{head}…")
    }
}

/// Aligned text table.
pub fn cost_report_text(rows: &[CostRow]) -> String {
    let cells: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            let mut c = row_cells(r);
            c[2] = shorten(&c[2]);
            c
        })
        .collect();
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.chars().count()).collect();
    for c in &cells {
        for (w, s) in width.iter_mut().zip(c) {
            *w = (*w).max(s.chars().count());
        }
    }
    let line = |c: &[String]| {
        let parts: Vec<String> = c
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (s, &w))| {
                let pad = " ".repeat(w - s.chars().count());
                // Text columns left-aligned, numbers right-aligned.
                if i == 0 || i == 2 {
                    format!("{s}{pad}")
                } else {
                    format!("{pad}{s}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(&HEADER.map(String::from));
    out.push('\n');
    for c in &cells {
        out.push_str(&line(c));
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV with a header row.
pub fn cost_report_csv(rows: &[CostRow]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in rows {
        let c = row_cells(r);
        out.push_str(&c.iter().map(|s| csv_field(s)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}
