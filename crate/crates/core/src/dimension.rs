//! Singular value function, pressure and affinity dimension, checks on the
//! semigroup generated by `D1 = A`, `D2(n) = C_A B^n C_B`, `D3 = C_A C_B`,
//! and box counting.

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::Matrix3;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::cocycle::{product, trial_rng, Word};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mat3::{
    big_vec, cross, fmul, ftranspose, iadjugate, imul, ln_abs, ln_norm2, to_fmat, BigVec3, FMat,
    IMat, Mat3,
};
use crate::rational::{q, Q};
use crate::renorm::{inverse_i64, letter_i64, Letter, Perm};
use crate::spectrum::KahanSum;

/// Largest word length for exhaustive enumeration (2^n words).
pub const DEPTH_BUDGET: usize = 22;

const ID: IMat = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

/// Singular values `α1 ≥ α2 ≥ α3`, stored as natural logs so that deep
/// products neither overflow nor underflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularTriple {
    ln: [f64; 3],
}

impl SingularTriple {
    pub fn from_logs(ln: [f64; 3]) -> Self {
        SingularTriple { ln }
    }

    pub fn logs(&self) -> [f64; 3] {
        self.ln
    }

    pub fn values(&self) -> [f64; 3] {
        self.ln.map(f64::exp)
    }

    /// `ln(α1 α2 α3) = ln |det|`.
    pub fn ln_product(&self) -> f64 {
        self.ln.iter().sum()
    }
}

fn lambda_max(s: &FMat) -> Result<f64> {
    let sts = fmul(&ftranspose(s), s);
    let ev = Matrix3::from_fn(|i, j| sts[i][j]).symmetric_eigenvalues();
    let top = ev.max();
    if top.is_finite() && top > 0.0 {
        Ok(top)
    } else {
        Err(Error::Numerical(format!(
            "eigenvalue solver returned {top}"
        )))
    }
}

fn ln_sigma_max(m: &Mat3) -> Result<f64> {
    let (s, shift) = m.to_scaled_f64();
    Ok(0.5 * lambda_max(&s)?.ln() + shift as f64 * LN_2)
}

/// Singular values of an invertible integer matrix. `α1` is the top singular
/// value of `M`, `α1 α2` the top singular value of `adj M`, and `α3` follows
/// from `|det M|`.
pub fn singular_values(m: &Mat3) -> Result<SingularTriple> {
    let det = m.det();
    if det.is_zero() {
        return Err(Error::Domain("singular matrix".into()));
    }
    let l1 = ln_sigma_max(m)?;
    let l12 = ln_sigma_max(&m.adjugate())?;
    let l2 = (l12 - l1).min(l1);
    let l3 = (ln_abs(&det) - l12).min(l2);
    Ok(SingularTriple { ln: [l1, l2, l3] })
}

/// Fast path for determinant-one products with a known inverse; every entry
/// must be exactly representable as a float.
fn triple_unimodular(m: &IMat, inv: &IMat) -> [f64; 3] {
    let l1 = 0.5 * lambda_max(&to_fmat(m)).map_or(f64::NAN, f64::ln);
    let l3 = -0.5 * lambda_max(&to_fmat(inv)).map_or(f64::NAN, f64::ln);
    [l1, -(l1 + l3), l3]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhiBranch {
    /// `0 ≤ s ≤ 1`
    Low,
    /// `1 ≤ s ≤ 2`
    Mid,
    /// `s ≥ 2`
    High,
}

impl PhiBranch {
    pub fn of(s: f64) -> Self {
        if s <= 1.0 {
            PhiBranch::Low
        } else if s <= 2.0 {
            PhiBranch::Mid
        } else {
            PhiBranch::High
        }
    }
}

/// `ln φ^s` evaluated with the formula of a fixed branch, regardless of `s`.
pub fn ln_phi_branch(t: &SingularTriple, s: f64, branch: PhiBranch) -> f64 {
    let [l1, l2, l3] = t.ln;
    match branch {
        PhiBranch::Low => s * (l2 - l1),
        PhiBranch::Mid => (l2 - l1) + (s - 1.0) * (l3 - l1),
        PhiBranch::High => (s - 1.0) * (l2 + l3 - 2.0 * l1),
    }
}

pub fn ln_phi(t: &SingularTriple, s: f64) -> f64 {
    ln_phi_branch(t, s, PhiBranch::of(s))
}

/// Singular value function `φ^s(M)`.
pub fn phi_s(m: &Mat3, s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::InvalidParams(format!(
            "s must be nonnegative, got {s}"
        )));
    }
    Ok(ln_phi(&singular_values(m)?, s).exp())
}

#[derive(Clone, Copy)]
struct Node {
    perm: Perm,
    m: IMat,
    inv: IMat,
}

impl Node {
    fn root() -> Self {
        Node {
            perm: Perm::P123,
            m: ID,
            inv: ID,
        }
    }

    fn child(&self, cross: bool) -> Node {
        let l = Letter::out_of(self.perm)[cross as usize];
        Node {
            perm: l.target(),
            m: imul(&self.m, &letter_i64(l)),
            inv: imul(&inverse_i64(l), &self.inv),
        }
    }

    fn triple(&self) -> SingularTriple {
        SingularTriple {
            ln: triple_unimodular(&self.m, &self.inv),
        }
    }
}

/// The word of length `len` whose stay/cross choices are the bits of
/// `index`, most significant first.
fn prefix_node(index: usize, len: usize) -> Node {
    (0..len)
        .rev()
        .fold(Node::root(), |n, j| n.child((index >> j) & 1 == 1))
}

fn descend(
    node: &Node,
    depth: usize,
    max_depth: usize,
    base: usize,
    out: &mut [Vec<SingularTriple>],
) {
    if depth == max_depth {
        return;
    }
    for c in [false, true] {
        let child = node.child(c);
        out[depth - base].push(child.triple());
        descend(&child, depth + 1, max_depth, base, out);
    }
}

const SHARD_DEPTH: usize = 10;

/// Singular values of every admissible product of length `1..=depth`
/// starting from `P123`, in lexicographic word order.
#[derive(Clone, Debug)]
pub struct PartitionTable {
    levels: Vec<Vec<SingularTriple>>,
}

impl PartitionTable {
    pub fn build(depth: usize, exec: Execution) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParams("depth must be at least 1".into()));
        }
        if depth > DEPTH_BUDGET {
            return Err(Error::Budget(format!(
                "depth {depth} exceeds the budget {DEPTH_BUDGET}"
            )));
        }
        let k = depth.min(SHARD_DEPTH);
        let mut levels: Vec<Vec<SingularTriple>> = (1..=k)
            .map(|d| exec.map_indices(1 << d, |i| prefix_node(i, d).triple()))
            .collect();
        if depth > k {
            let shards = exec.map_indices(1 << k, |i| {
                let mut out = vec![Vec::new(); depth - k];
                descend(&prefix_node(i, k), k, depth, k, &mut out);
                out
            });
            for j in 0..depth - k {
                levels.push(shards.iter().flat_map(|s| s[j].iter().copied()).collect());
            }
        }
        if levels
            .iter()
            .flatten()
            .any(|t| t.ln.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Numerical(
                "non-finite singular value in partition table".into(),
            ));
        }
        Ok(PartitionTable { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Result<&[SingularTriple]> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::Budget(format!(
                "depth {n} not in table of depth {}",
                self.levels.len()
            )));
        }
        Ok(&self.levels[n - 1])
    }

    /// `ln Σ_{|w| = n} φ^s(w)`.
    pub fn ln_partition_sum(&self, n: usize, s: f64) -> Result<f64> {
        let level = self.level(n)?;
        let terms: Vec<f64> = level.iter().map(|t| ln_phi(t, s)).collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = KahanSum::default();
        for t in &terms {
            acc.add((t - top).exp());
        }
        Ok(top + acc.value().ln())
    }

    pub fn pressure(&self, n: usize, s: f64) -> Result<f64> {
        Ok(self.ln_partition_sum(n, s)? / n as f64)
    }
}

/// `(1/n) ln Σ φ^s` over the `2^n` admissible words of length `n` from `P123`.
pub fn pressure(n: usize, s: f64, exec: Execution) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::InvalidParams(format!(
            "s must be nonnegative, got {s}"
        )));
    }
    PartitionTable::build(n, exec)?.pressure(n, s)
}

/// Bisection for a sign change of `f` on `[lo, hi]`; returns the midpoint of
/// the final bracket and the number of halvings.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok((lo, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0));
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoSignChange(format!(
            "f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        iterations += 1;
        if fm == 0.0 {
            return Ok((mid, iterations));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iterations))
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthRoot {
    pub depth: usize,
    pub root: f64,
    pub iterations: usize,
    pub pressure_at_1: f64,
    pub pressure_at_2: f64,
    /// Root of `ln Z_n(s) - ln Z_{n-1}(s)`, a faster-converging diagnostic.
    pub ratio_root: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AffinityEstimate {
    pub s_star: f64,
    pub tol: f64,
    pub roots: Vec<DepthRoot>,
}

impl AffinityEstimate {
    /// Spread `max - min` of the roots at depths `from..=to`.
    pub fn variation(&self, from: usize, to: usize) -> Option<f64> {
        let r: Vec<f64> = self
            .roots
            .iter()
            .filter(|d| d.depth >= from && d.depth <= to)
            .map(|d| d.root)
            .collect();
        if r.is_empty() {
            return None;
        }
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        Some(hi - lo)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("depth,root,iterations,pressure_at_1,pressure_at_2,ratio_root\n");
        for d in &self.roots {
            let ratio = d.ratio_root.map(|r| format!("{r:.10}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.10},{},{:.10},{:.10},{}\n",
                d.depth, d.root, d.iterations, d.pressure_at_1, d.pressure_at_2, ratio
            ));
        }
        out
    }
}

/// Zero of the depth-`n` pressure on `[1, 2]` for every `n ≤ n_max`.
pub fn affinity_dimension_estimate(
    n_max: usize,
    tol: f64,
    exec: Execution,
) -> Result<AffinityEstimate> {
    if n_max < 8 {
        return Err(Error::InvalidParams(format!(
            "depth must be at least 8, got {n_max}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let table = PartitionTable::build(n_max, exec)?;
    let mut roots = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (root, iterations) =
            bisect(|s| table.pressure(n, s), 1.0, 2.0, tol).map_err(|e| match e {
                Error::NoSignChange(m) => Error::NoSignChange(format!("depth {n}: {m}")),
                other => other,
            })?;
        let ratio_root = if n >= 2 {
            bisect(
                |s| Ok(table.ln_partition_sum(n, s)? - table.ln_partition_sum(n - 1, s)?),
                1.0,
                2.0,
                tol,
            )
            .ok()
            .map(|r| r.0)
        } else {
            None
        };
        roots.push(DepthRoot {
            depth: n,
            root,
            iterations,
            pressure_at_1: table.pressure(n, 1.0)?,
            pressure_at_2: table.pressure(n, 2.0)?,
            ratio_root,
        });
    }
    Ok(AffinityEstimate {
        s_star: roots[n_max - 1].root,
        tol,
        roots,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Generator {
    D1,
    D2(u32),
    D3,
}

impl Generator {
    pub fn kind(self) -> u8 {
        match self {
            Generator::D1 => 1,
            Generator::D2(_) => 2,
            Generator::D3 => 3,
        }
    }

    pub fn letters(self) -> Vec<Letter> {
        match self {
            Generator::D1 => vec![Letter::A],
            Generator::D2(n) => {
                let mut v = vec![Letter::CA];
                v.extend(std::iter::repeat_n(Letter::B, n as usize));
                v.push(Letter::CB);
                v
            }
            Generator::D3 => vec![Letter::CA, Letter::CB],
        }
    }

    pub fn matrix(self) -> Mat3 {
        product(&Word::from_letters(self.letters()))
            .expect("generators are paths")
            .matrix
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::D1 => write!(f, "D1"),
            Generator::D2(n) => write!(f, "D2({n})"),
            Generator::D3 => write!(f, "D3"),
        }
    }
}

/// Product `γ1 γ2 ⋯ γk` of generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GammaWord(Vec<Generator>);

impl GammaWord {
    pub fn new(gens: Vec<Generator>) -> Result<Self> {
        if gens.contains(&Generator::D2(0)) {
            return Err(Error::InvalidParams("D2(n) requires n ≥ 1".into()));
        }
        Ok(GammaWord(gens))
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word::from_letters(self.0.iter().flat_map(|g| g.letters()).collect())
    }

    pub fn matrix(&self) -> Mat3 {
        self.0
            .iter()
            .fold(Mat3::identity(), |m, g| &m * &g.matrix())
    }

    /// Product of the last `m` generators.
    pub fn tail_matrix(&self, m: usize) -> Mat3 {
        let start = self.0.len().saturating_sub(m);
        self.0[start..]
            .iter()
            .fold(Mat3::identity(), |acc, g| &acc * &g.matrix())
    }

    /// Whether the last `m` generators are not all of the same kind.
    pub fn tail_mixed(&self, m: usize) -> bool {
        let start = self.0.len().saturating_sub(m);
        let tail = &self.0[start..];
        tail.iter().any(|g| g.kind() != tail[0].kind())
    }
}

impl fmt::Display for GammaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Closed sub-simplex spanned by `(0:1:1), (1:0:1), (1:1:0)`.
pub fn in_closed_delta_prime(v: &BigVec3) -> bool {
    v.iter().all(|x| !x.is_negative())
        && v.iter().any(|x| x.is_positive())
        && (0..3).all(|i| v[i] <= &v[(i + 1) % 3] + &v[(i + 2) % 3])
}

pub fn in_open_delta_prime(v: &BigVec3) -> bool {
    (0..3).all(|i| v[i] < &v[(i + 1) % 3] + &v[(i + 2) % 3])
}

/// Whether `v` lies in the closed cone spanned by the columns of `p`.
fn in_column_cone(p: &Mat3, v: &BigVec3) -> bool {
    let det = p.det();
    let coeffs = p.adjugate().mul_vec(v);
    coeffs
        .iter()
        .all(|c| c.is_zero() || c.is_positive() == det.is_positive())
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub ok: bool,
    /// Whether the downstream argument depends on this check. Optional
    /// checks test stated intermediate claims that are stronger than needed.
    pub required: bool,
    pub detail: String,
}

impl LemmaCheck {
    fn new(name: impl Into<String>, ok: bool, required: bool, detail: impl Into<String>) -> Self {
        LemmaCheck {
            name: name.into(),
            ok,
            required,
            detail: detail.into(),
        }
    }
}

/// Transposed two-letter products with their reference values and the columns
/// claimed to lie in the sub-simplex.
fn reference_products(n: i64) -> Vec<(String, Mat3, IMat, &'static [usize])> {
    let t1 = Generator::D1.matrix().transpose();
    let t2 = Generator::D2(n as u32).matrix().transpose();
    let t3 = Generator::D3.matrix().transpose();
    vec![
        (
            format!("D2({n})^T D1^T"),
            &t2 * &t1,
            [[n + 2, n, 1], [n + 2, n + 1, 1], [n + 1, n, 1]],
            &[0, 1, 2],
        ),
        (
            format!("D1^T D2({n})^T"),
            &t1 * &t2,
            [[1, n, 1], [1, 2 * n + 1, 2], [1, 2 * n, 2]],
            &[0, 1, 2],
        ),
        (
            format!("D3^T D2({n})^T"),
            &t3 * &t2,
            [[1, 2 * n, 2], [0, 2 * n + 1, 2], [0, n, 1]],
            &[1, 2],
        ),
        (
            format!("D2({n})^T D3^T"),
            &t2 * &t3,
            [[1, n, n + 2], [0, n + 1, n + 2], [0, n, n + 1]],
            &[1, 2],
        ),
    ]
}

/// Exact vertex checks on the generators for `n = 1..=max_power`.
pub fn generator_checks(max_power: u32) -> Vec<LemmaCheck> {
    let mut gens = vec![Generator::D1, Generator::D3];
    gens.extend((1..=max_power).map(Generator::D2));
    let vertices = [big_vec([0, 1, 1]), big_vec([1, 0, 1]), big_vec([1, 1, 0])];
    let centre = big_vec([1, 1, 1]);
    let e = |i: usize| big_vec(std::array::from_fn(|k| (k == i) as i64));
    let mut checks = Vec::new();

    let bad: Vec<String> = gens
        .iter()
        .filter(|g| {
            let m = g.matrix();
            !(m.is_nonnegative() && m.det() == BigInt::from(1))
        })
        .map(|g| g.to_string())
        .collect();
    checks.push(LemmaCheck::new(
        "generators and transposes preserve the simplex",
        bad.is_empty(),
        true,
        bad.join(", "),
    ));

    let bad: Vec<String> = gens
        .iter()
        .filter(|g| {
            let t = g.matrix().transpose();
            let closed = vertices
                .iter()
                .all(|v| in_closed_delta_prime(&t.mul_vec(v)));
            !(closed && in_open_delta_prime(&t.mul_vec(&centre)))
        })
        .map(|g| format!("{g}^T"))
        .collect();
    checks.push(LemmaCheck::new(
        "transposes preserve the sub-simplex",
        bad.is_empty(),
        true,
        bad.join(", "),
    ));

    let ones = big_vec([1, 1, 1]);
    let t1e1 = Generator::D1.matrix().transpose().mul_vec(&e(0));
    let t3e3 = Generator::D3.matrix().transpose().mul_vec(&e(2));
    checks.push(LemmaCheck::new(
        "D1^T E1 = D3^T E3 = (1:1:1)",
        t1e1 == ones && t3e3 == ones,
        true,
        format!("{t1e1:?} {t3e3:?}"),
    ));

    let images: Vec<(i64, BigVec3)> = (1..=max_power as i64)
        .map(|n| {
            (
                n,
                Generator::D2(n as u32).matrix().transpose().mul_vec(&e(1)),
            )
        })
        .collect();
    let bad: Vec<String> = images
        .iter()
        .filter(|(n, v)| *v != big_vec([*n, n + 1, *n]) || !in_closed_delta_prime(v))
        .map(|(n, v)| format!("n={n}: {v:?}"))
        .collect();
    checks.push(LemmaCheck::new(
        "D2(n)^T E2 = (n : n+1 : n) in the closed sub-simplex",
        bad.is_empty(),
        true,
        bad.join("; "),
    ));

    let mut bad = Vec::new();
    let mut not_closed = Vec::new();
    let mut not_open: Vec<String> = images
        .iter()
        .filter(|(_, v)| !in_open_delta_prime(v))
        .map(|(n, v)| format!("D2({n})^T E2 = {v:?}"))
        .collect();
    for n in 1..=max_power as i64 {
        for (name, got, want, cols) in reference_products(n) {
            if got != Mat3::from_i64(want) {
                bad.push(format!("{name} = {got}"));
            }
            for &j in cols {
                let c = got.column(j);
                if !in_closed_delta_prime(&c) {
                    not_closed.push(format!("{name} column {}", j + 1));
                }
                if !in_open_delta_prime(&c) {
                    not_open.push(format!("{name} column {} = {c:?}", j + 1));
                }
            }
        }
    }
    checks.push(LemmaCheck::new(
        "two-letter transposed products match their reference values",
        bad.is_empty(),
        true,
        bad.join("; "),
    ));
    checks.push(LemmaCheck::new(
        "claimed columns lie in the closed sub-simplex",
        not_closed.is_empty(),
        true,
        not_closed.join("; "),
    ));
    checks.push(LemmaCheck::new(
        "claimed points lie in the open sub-simplex",
        not_open.is_empty(),
        false,
        if not_open.is_empty() {
            String::new()
        } else {
            format!("on the boundary: {}", not_open.join("; "))
        },
    ));
    checks
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GammaConfig {
    pub sample_size: usize,
    pub max_len: usize,
    pub max_power: u32,
    pub seed: u64,
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig {
            sample_size: 10_000,
            max_len: 40,
            max_power: 8,
            seed: 0,
        }
    }
}

fn random_generator<R: Rng + ?Sized>(rng: &mut R, max_power: u32) -> Generator {
    match rng.random_range(0..3) {
        0 => Generator::D1,
        1 => Generator::D2(rng.random_range(1..=max_power)),
        _ => Generator::D3,
    }
}

/// Random word of the given length whose last two generators differ in kind.
pub fn random_gamma_word<R: Rng + ?Sized>(rng: &mut R, len: usize, max_power: u32) -> GammaWord {
    let mut gens: Vec<Generator> = (0..len).map(|_| random_generator(rng, max_power)).collect();
    if len >= 2 {
        while gens[len - 1].kind() == gens[len - 2].kind() {
            gens[len - 1] = random_generator(rng, max_power);
        }
    }
    GammaWord(gens)
}

struct Sample {
    word: GammaWord,
    tail: usize,
    inclusion_ok: bool,
    ln_eps: f64,
    ln_diam: f64,
    ln_area: f64,
}

fn analyse_sample(word: GammaWord, tail: usize) -> Result<Sample> {
    let g = word.matrix();
    let gt = g.transpose();
    let tt = word.tail_matrix(tail).transpose();
    let p = &gt * &g;
    let inclusion_ok = (0..3).all(|j| {
        let c = p.column(j);
        in_closed_delta_prime(&c) && in_column_cone(&tt, &c)
    });
    let [l1, l2, _] = singular_values(&g)?.logs();
    let cols: Vec<BigVec3> = (0..3).map(|j| g.column(j)).collect();
    let norms: Vec<f64> = cols.iter().map(ln_norm2).collect();
    let ln_eps = norms.iter().copied().fold(f64::INFINITY, f64::min) - l1;
    let mut diam = f64::NEG_INFINITY;
    for i in 0..3 {
        for j in i + 1..3 {
            diam = diam.max(ln_norm2(&cross(&cols[i], &cols[j])) - norms[i] - norms[j]);
        }
    }
    let l1_norms: f64 = cols.iter().map(|c| ln_abs(&(&c[0] + &c[1] + &c[2]))).sum();
    let ln_area = (3f64.sqrt() / 2.0).ln() - l1_norms;
    Ok(Sample {
        word,
        tail,
        inclusion_ok,
        ln_eps,
        ln_diam: diam - (l2 - l1),
        ln_area: ln_area + 3.0 * l1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaReport {
    pub generator_checks: Vec<LemmaCheck>,
    pub samples: usize,
    pub inclusion_failures: usize,
    pub first_failure: Option<String>,
    /// Minimum of `‖γ e_i‖ / α1(γ)` over samples.
    pub epsilon2: f64,
    pub epsilon2_witness: String,
    /// Maximum of `diam(γΔ) α1 / α2`.
    pub c_diam: f64,
    /// Maximum of `area(γΔ) α1^3`.
    pub c_area: f64,
    pub ok: bool,
}

/// Random-sample checks of the sub-simplex inclusion, the lower bound on
/// column norms and the distortion constants, plus the exact generator checks.
pub fn verify_gamma_lemmas(cfg: &GammaConfig, exec: Execution) -> Result<GammaReport> {
    if cfg.max_len < 2 || cfg.max_power < 1 {
        return Err(Error::InvalidParams(
            "need max_len ≥ 2 and max_power ≥ 1".into(),
        ));
    }
    let generator_checks = generator_checks(10.max(cfg.max_power));
    let samples: Vec<Result<Sample>> = exec.map_indices(cfg.sample_size, |i| {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let len = rng.random_range(2..=cfg.max_len);
        let tail = rng.random_range(2..=len);
        analyse_sample(random_gamma_word(&mut rng, len, cfg.max_power), tail)
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let mut failures = samples.iter().filter(|s| !s.inclusion_ok);
    let first_failure = failures
        .next()
        .map(|s| format!("{} (tail {})", s.word, s.tail));
    let inclusion_failures = samples.iter().filter(|s| !s.inclusion_ok).count();
    let (mut eps, mut witness) = (f64::INFINITY, String::new());
    let (mut diam, mut area) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in &samples {
        if s.ln_eps < eps {
            eps = s.ln_eps;
            witness = s.word.to_string();
        }
        diam = diam.max(s.ln_diam);
        area = area.max(s.ln_area);
    }
    let (epsilon2, c_diam, c_area) = (eps.exp(), diam.exp(), area.exp());
    let ok = generator_checks.iter().all(|c| c.ok || !c.required)
        && inclusion_failures == 0
        && epsilon2 > 0.0
        && c_diam.is_finite()
        && c_area.is_finite();
    Ok(GammaReport {
        generator_checks,
        samples: samples.len(),
        inclusion_failures,
        first_failure,
        epsilon2,
        epsilon2_witness: witness,
        c_diam,
        c_area,
        ok,
    })
}

/// Reference values of the Lie algebra elements `X1..X8`.
pub const REFERENCE_X: [IMat; 8] = [
    [[1, 2, 1], [0, 0, 0], [-1, -2, -1]],
    [[0, 0, 0], [1, 1, 1], [-1, -1, -1]],
    [[0, 0, 0], [0, 0, 0], [1, 1, 0]],
    [[1, 1, 1], [0, 0, 0], [-1, -1, -1]],
    [[1, 1, 0], [0, 0, 0], [-2, -3, -1]],
    [[0, 0, 0], [1, 1, 0], [-2, -2, -1]],
    [[-1, -1, 0], [0, 0, 0], [-2, -2, 1]],
    [[-1, -1, -1], [-1, -2, 0], [4, 5, 3]],
];

fn ipow(m: &IMat, n: usize) -> IMat {
    (0..n).fold(ID, |acc, _| imul(&acc, m))
}

fn word_i64(letters: &[Letter]) -> IMat {
    letters
        .iter()
        .fold(ID, |acc, l| imul(&acc, &letter_i64(*l)))
}

fn isub(a: &IMat, b: &IMat) -> IMat {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

fn commutator(a: &IMat, b: &IMat) -> IMat {
    isub(&imul(a, b), &imul(b, a))
}

/// The three integer curves through which `X1, X2, X3` are obtained.
fn curve(i: usize, n: usize) -> IMat {
    let a = letter_i64(Letter::A);
    let b = letter_i64(Letter::B);
    let d3 = word_i64(&[Letter::CA, Letter::CB]);
    match i {
        0 => imul(&ipow(&a, n), &d3),
        1 => imul(
            &imul(&letter_i64(Letter::CA), &ipow(&b, n)),
            &letter_i64(Letter::CB),
        ),
        _ => ipow(&d3, n),
    }
}

fn rank_q(rows: &[Vec<Q>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for k in c..cols {
                    let d = &f * &m[rank][k];
                    m[r][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, Serialize)]
pub struct ZariskiReport {
    pub matrices: Vec<IMat>,
    /// Agreement of each computed `X_i` with its reference value.
    pub reference_match: Vec<bool>,
    /// Each curve `F(n)` satisfies `F(0)^{-1} F(n) = I + n X` exactly.
    pub curves_linear: bool,
    pub traceless: bool,
    pub rank: usize,
    pub ok: bool,
}

pub fn zariski_report() -> ZariskiReport {
    let mut xs: Vec<IMat> = Vec::with_capacity(8);
    let mut curves_linear = true;
    for i in 0..3 {
        let base_inv = iadjugate(&curve(i, 0));
        let x = isub(&imul(&base_inv, &curve(i, 1)), &ID);
        for n in 0..=6 {
            let lhs = imul(&base_inv, &curve(i, n));
            let rhs: IMat =
                std::array::from_fn(|r| std::array::from_fn(|c| ID[r][c] + n as i64 * x[r][c]));
            curves_linear &= lhs == rhs;
        }
        xs.push(x);
    }
    for (a, b) in [(0, 1), (0, 2), (1, 2), (2, 3), (1, 4)] {
        let c = commutator(&xs[a], &xs[b]);
        xs.push(c);
    }
    let reference_match: Vec<bool> = xs
        .iter()
        .zip(REFERENCE_X.iter())
        .map(|(a, b)| a == b)
        .collect();
    let traceless = xs.iter().all(|x| x[0][0] + x[1][1] + x[2][2] == 0);
    let rows: Vec<Vec<Q>> = xs
        .iter()
        .map(|x| x.iter().flatten().map(|&v| q(v, 1)).collect())
        .collect();
    let rank = rank_q(&rows);
    let ok = curves_linear && traceless && rank == 8;
    ZariskiReport {
        matrices: xs,
        reference_match,
        curves_linear,
        traceless,
        rank,
        ok,
    }
}

pub fn zariski_rank_check() -> bool {
    zariski_report().ok
}

#[derive(Clone, Debug, Serialize)]
pub struct Gamma0Row {
    pub length: usize,
    /// Words with distinct last two letters.
    pub words: usize,
    /// `Σ φ^{3/2}` over those words.
    pub s_sum: f64,
    /// `Σ |γI|` over those words.
    pub arc_sum: f64,
    pub min_alpha2: f64,
    /// Minimum of `‖γe1‖ ‖γe3‖ / α1²`.
    pub min_arc_ratio: f64,
    /// Whether the arcs of all `2^ℓ` words tile `I`; checked for short lengths.
    pub tiles: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Gamma0Series {
    pub rows: Vec<Gamma0Row>,
}

impl Gamma0Series {
    fn range(&self, from: usize, to: usize) -> impl Iterator<Item = &Gamma0Row> {
        self.rows
            .iter()
            .filter(move |r| r.length >= from && r.length <= to)
    }

    pub fn s_min(&self, from: usize, to: usize) -> Option<f64> {
        self.range(from, to).map(|r| r.s_sum).reduce(f64::min)
    }

    /// Least-squares slope of `ln S_ℓ` against `ℓ`.
    pub fn log_slope(&self, from: usize, to: usize) -> Result<LinearFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .range(from, to)
            .map(|r| (r.length as f64, r.s_sum.ln()))
            .unzip();
        linear_fit(&xs, &ys)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("length,words,s_sum,arc_sum,min_alpha2,min_arc_ratio,tiles\n");
        for r in &self.rows {
            let tiles = r.tiles.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
                r.length, r.words, r.s_sum, r.arc_sum, r.min_alpha2, r.min_arc_ratio, tiles
            ));
        }
        out
    }
}

const TILING_CHECK_MAX: usize = 10;
const CHUNK: usize = 4096;

fn gamma0_product(index: usize, len: usize) -> (IMat, IMat) {
    let d1 = letter_i64(Letter::A);
    let d3 = word_i64(&[Letter::CA, Letter::CB]);
    let (d1i, d3i) = (iadjugate(&d1), iadjugate(&d3));
    let mut m = ID;
    let mut inv = ID;
    for j in (0..len).rev() {
        let (g, gi) = if (index >> j) & 1 == 0 {
            (&d1, &d1i)
        } else {
            (&d3, &d3i)
        };
        m = imul(&m, g);
        inv = imul(gi, &inv);
    }
    (m, inv)
}

#[derive(Clone, Copy)]
struct Gamma0Acc {
    s: KahanSum,
    arc: KahanSum,
    min_alpha2: f64,
    min_arc_ratio: f64,
    words: usize,
}

fn gamma0_chunk(len: usize, start: usize, end: usize) -> Gamma0Acc {
    let mut acc = Gamma0Acc {
        s: KahanSum::default(),
        arc: KahanSum::default(),
        min_alpha2: f64::INFINITY,
        min_arc_ratio: f64::INFINITY,
        words: 0,
    };
    for index in start..end {
        if (index & 1) == ((index >> 1) & 1) {
            continue;
        }
        let (m, inv) = gamma0_product(index, len);
        let t = SingularTriple {
            ln: triple_unimodular(&m, &inv),
        };
        let [l1, l2, _] = t.ln;
        let ln_e1 = 0.5 * ((m[0][0] * m[0][0] + m[2][0] * m[2][0]) as f64).ln();
        let ln_e3 = 0.5 * ((m[0][2] * m[0][2] + m[2][2] * m[2][2]) as f64).ln();
        acc.s.add(ln_phi(&t, 1.5).exp());
        acc.arc.add((-ln_e1 - ln_e3).exp());
        acc.min_alpha2 = acc.min_alpha2.min(l2.exp());
        acc.min_arc_ratio = acc.min_arc_ratio.min((ln_e1 + ln_e3 - 2.0 * l1).exp());
        acc.words += 1;
    }
    acc
}

/// Exact check that the arcs `γI`, `|γ| = len`, tile `I`, parametrised by
/// `x3 / (x1 + x3)`.
pub fn gamma0_arcs_tile(len: usize) -> bool {
    let t = |x1: i64, x3: i64| q(x3, x1 + x3);
    let mut arcs: Vec<(Q, Q)> = (0..1usize << len)
        .map(|i| {
            let (m, _) = gamma0_product(i, len);
            (t(m[0][0], m[2][0]), t(m[0][2], m[2][2]))
        })
        .collect();
    arcs.sort();
    let mut cursor = q(0, 1);
    for (lo, hi) in arcs {
        if lo != cursor || hi <= lo {
            return false;
        }
        cursor = hi;
    }
    cursor == q(1, 1)
}

/// `S_ℓ = Σ φ^{3/2}(γ)` over words in `{D1, D3}^ℓ` with distinct last two
/// letters, for `ℓ = 2..=ell_max`.
pub fn gamma0_series(ell_max: usize, exec: Execution) -> Result<Gamma0Series> {
    if ell_max < 2 {
        return Err(Error::InvalidParams("length must be at least 2".into()));
    }
    if ell_max > DEPTH_BUDGET {
        return Err(Error::Budget(format!(
            "length {ell_max} exceeds the budget {DEPTH_BUDGET}"
        )));
    }
    let mut rows = Vec::with_capacity(ell_max - 1);
    for len in 2..=ell_max {
        let total = 1usize << len;
        let chunks = total.div_ceil(CHUNK);
        let parts = exec.map_indices(chunks, |c| {
            gamma0_chunk(len, c * CHUNK, ((c + 1) * CHUNK).min(total))
        });
        let (mut s, mut arc) = (KahanSum::default(), KahanSum::default());
        let (mut min_alpha2, mut min_arc_ratio, mut words) = (f64::INFINITY, f64::INFINITY, 0);
        for p in &parts {
            s.add(p.s.value());
            arc.add(p.arc.value());
            min_alpha2 = min_alpha2.min(p.min_alpha2);
            min_arc_ratio = min_arc_ratio.min(p.min_arc_ratio);
            words += p.words;
        }
        rows.push(Gamma0Row {
            length: len,
            words,
            s_sum: s.value(),
            arc_sum: arc.value(),
            min_alpha2,
            min_arc_ratio,
            tiles: (len <= TILING_CHECK_MAX).then(|| gamma0_arcs_tile(len)),
        });
    }
    Ok(Gamma0Series { rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// Ordinary least squares `y = slope x + intercept` with the standard error
/// of the slope.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 paired points, got {}",
            xs.len().min(ys.len())
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite regression input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        stderr,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxCount {
    pub dimension: f64,
    pub stderr: f64,
    /// `(ε, N(ε))` pairs.
    pub counts: Vec<(f64, usize)>,
}

fn fit_counts(counts: Vec<(f64, usize)>) -> Result<BoxCount> {
    if counts.len() < 4 {
        return Err(Error::InvalidParams(format!(
            "need at least 4 scales, got {}",
            counts.len()
        )));
    }
    if counts.iter().any(|&(_, n)| n == 0) {
        return Err(Error::Degenerate("empty set at some scale".into()));
    }
    let xs: Vec<f64> = counts.iter().map(|(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, n)| (n as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(BoxCount {
        dimension: fit.slope,
        stderr: fit.stderr,
        counts,
    })
}

/// Box-counting slope of a planar point cloud over the given box sizes.
pub fn box_counting_points(points: &[[f64; 2]], scales: &[f64]) -> Result<BoxCount> {
    if scales.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParams("scales must be positive".into()));
    }
    let counts = scales
        .iter()
        .map(|&eps| {
            let mut boxes: Vec<(i64, i64)> = points
                .iter()
                .map(|p| ((p[0] / eps).floor() as i64, (p[1] / eps).floor() as i64))
                .collect();
            boxes.sort_unstable();
            boxes.dedup();
            (eps, boxes.len())
        })
        .collect();
    fit_counts(counts)
}

/// Box-counting slope of a `width × height` pixel mask; box sizes are in
/// pixels and `ε = size / width`.
pub fn box_counting_grid<F>(
    width: usize,
    height: usize,
    occupied: F,
    sizes: &[usize],
) -> Result<BoxCount>
where
    F: Fn(usize, usize) -> bool,
{
    if sizes.contains(&0) || width == 0 || height == 0 {
        return Err(Error::InvalidParams(
            "box sizes and dimensions must be positive".into(),
        ));
    }
    let counts = sizes
        .iter()
        .map(|&s| {
            let (bw, bh) = (width.div_ceil(s), height.div_ceil(s));
            let mut hit = vec![false; bw * bh];
            for y in 0..height {
                for x in 0..width {
                    if occupied(x, y) {
                        hit[(y / s) * bw + x / s] = true;
                    }
                }
            }
            (s as f64 / width as f64, hit.iter().filter(|&&h| h).count())
        })
        .collect();
    fit_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: IMat) -> Mat3 {
        Mat3::from_i64(rows)
    }

    #[test]
    fn singular_values_of_a() {
        let t = singular_values(&m(letter_i64(Letter::A))).unwrap().values();
        let r = 3f64.sqrt();
        assert!((t[0] - (2.0 + r).sqrt()).abs() < 1e-12);
        assert!((t[1] - 1.0).abs() < 1e-12);
        assert!((t[2] - (2.0 - r).sqrt()).abs() < 1e-12);
        let id = singular_values(&Mat3::identity()).unwrap().values();
        assert!(id.iter().all(|x| (x - 1.0).abs() < 1e-14));
        assert!(singular_values(&m([[1, 1, 0], [1, 1, 0], [0, 0, 1]])).is_err());
    }

    #[test]
    fn phi_at_three_halves() {
        let v = phi_s(&m(letter_i64(Letter::A)), 1.5).unwrap();
        assert!((v - 1.0 / (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((phi_s(&Mat3::identity(), 0.7).unwrap() - 1.0).abs() < 1e-14);
        assert!(phi_s(&Mat3::identity(), -0.1).is_err());
    }

    #[test]
    fn unimodular_fast_path_agrees() {
        let w: Word = "AaBBbAAa".parse().unwrap();
        let mm = product(&w).unwrap().matrix;
        let exact = singular_values(&mm).unwrap().logs();
        let im = mm.to_i64().unwrap();
        let fast = triple_unimodular(&im, &iadjugate(&im));
        for k in 0..3 {
            assert!((exact[k] - fast[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn pressure_depth_one() {
        let a = phi_s(&m(letter_i64(Letter::A)), 1.3).unwrap();
        let c = phi_s(&m(letter_i64(Letter::CA)), 1.3).unwrap();
        let p = pressure(1, 1.3, Execution::Sequential).unwrap();
        assert!((p - (a + c).ln()).abs() < 1e-12);
        assert!(pressure(DEPTH_BUDGET + 1, 1.0, Execution::Sequential).is_err());
    }

    #[test]
    fn table_is_execution_independent() {
        let a = PartitionTable::build(12, Execution::Sequential).unwrap();
        let b = PartitionTable::build(12, Execution::Parallel).unwrap();
        assert_eq!(a.level(12).unwrap().len(), 4096);
        assert_eq!(a.pressure(12, 1.5).unwrap(), b.pressure(12, 1.5).unwrap());
    }

    #[test]
    fn table_levels_match_direct_products() {
        let t = PartitionTable::build(11, Execution::Sequential).unwrap();
        for s in ["AaB", "AAaBBbAAaBb", "aBBBBBBBBBB"] {
            let w: Word = s.parse().unwrap();
            let idx = w
                .letters()
                .iter()
                .fold(0, |acc, l| 2 * acc + l.is_crossing() as usize);
            let exact = singular_values(&product(&w).unwrap().matrix)
                .unwrap()
                .logs();
            let got = t.level(w.len()).unwrap()[idx].logs();
            for k in 0..3 {
                assert!((exact[k] - got[k]).abs() < 1e-10, "{s}");
            }
        }
    }

    #[test]
    fn bisection_counts() {
        let (r, it) = bisect(|s| Ok(1.6 - s), 1.0, 2.0, 1e-4).unwrap();
        assert!((r - 1.6).abs() < 1e-4);
        assert!(it <= 14);
        assert!(bisect(Ok, 1.0, 2.0, 1e-4).is_err());
    }

    #[test]
    fn gamma_generators() {
        assert_eq!(
            Generator::D2(3).matrix(),
            m([[1, 0, 0], [3, 4, 3], [1, 1, 1]])
        );
        assert_eq!(Generator::D3.matrix(), m([[1, 0, 0], [0, 1, 0], [1, 1, 1]]));
        let checks = generator_checks(10);
        assert!(
            checks.iter().filter(|c| c.required).all(|c| c.ok),
            "{checks:?}"
        );
        // (1:2:1) sits on the boundary of the sub-simplex, so the strict claim fails only at n = 1.
        let open = checks.iter().find(|c| !c.required).unwrap();
        assert!(!open.ok);
        assert!(open.detail.contains("D2(1)^T E2") && !open.detail.contains("D2(2)"));
        assert!(GammaWord::new(vec![Generator::D2(0)]).is_err());
        let g = GammaWord::new(vec![Generator::D1, Generator::D2(2), Generator::D3]).unwrap();
        assert!(g.to_word().is_admissible(Perm::P123));
        assert_eq!(product(&g.to_word()).unwrap().matrix, g.matrix());
        assert!(g.tail_mixed(2));
        assert!(!GammaWord::new(vec![Generator::D2(1), Generator::D2(4)])
            .unwrap()
            .tail_mixed(2));
    }

    #[test]
    fn zariski() {
        let r = zariski_report();
        assert!(r.curves_linear && r.traceless);
        assert_eq!(r.rank, 8);
        assert!(r.ok && zariski_rank_check());
        // The reference X7 and X8 disagree with the commutators they name.
        assert_eq!(
            r.reference_match,
            [true, true, true, true, true, true, false, false]
        );
        assert_eq!(r.matrices[6], [[-1, -1, 0], [0, 0, 0], [2, 2, 1]]);
        assert_eq!(r.matrices[7], [[-1, -1, -1], [-1, -2, -1], [3, 4, 3]]);
        let reference: Vec<Vec<Q>> = REFERENCE_X
            .iter()
            .map(|x| x.iter().flatten().map(|&v| q(v, 1)).collect())
            .collect();
        assert_eq!(rank_q(&reference), 8);
    }

    #[test]
    fn gamma0_small() {
        let s = gamma0_series(6, Execution::Sequential).unwrap();
        assert_eq!(s.rows[0].words, 2);
        assert!(s.rows.iter().all(|r| r.words == 1 << (r.length - 1)));
        assert!(s.rows.iter().all(|r| r.tiles == Some(true)));
        // D1 D3 and D3 D1 share singular values (transposes up to relabelling).
        let d1d3 = &Generator::D1.matrix() * &Generator::D3.matrix();
        let d3d1 = &Generator::D3.matrix() * &Generator::D1.matrix();
        let want = phi_s(&d1d3, 1.5).unwrap() + phi_s(&d3d1, 1.5).unwrap();
        assert!((s.rows[0].s_sum - want).abs() < 1e-12);
        assert!(gamma0_series(DEPTH_BUDGET + 1, Execution::Sequential).is_err());
    }

    #[test]
    fn regression_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!(
            (f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12 && f.stderr < 1e-12
        );
        assert!(linear_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn box_counting_square_and_segment() {
        let n = 400;
        let square: Vec<[f64; 2]> = (0..n * n)
            .map(|k| [(k % n) as f64 / n as f64, (k / n) as f64 / n as f64])
            .collect();
        let scales = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let d = box_counting_points(&square, &scales).unwrap();
        assert!((d.dimension - 2.0).abs() < 0.05, "{d:?}");
        let seg: Vec<[f64; 2]> = (0..10_000).map(|k| [k as f64 / 10_000.0, 0.3]).collect();
        let d = box_counting_points(&seg, &scales).unwrap();
        assert!((d.dimension - 1.0).abs() < 0.05, "{d:?}");
        assert!(box_counting_points(&seg, &scales[..3]).is_err());
        let g = box_counting_grid(256, 256, |x, y| x == y, &[2, 4, 8, 16]).unwrap();
        assert!((g.dimension - 1.0).abs() < 1e-9);
    }
}
