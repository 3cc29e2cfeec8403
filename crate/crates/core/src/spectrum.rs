//! Operator norms for transposed cocycle matrices, the hyperplane
//! enumeration for cone-restricted suprema, Lyapunov exponents, and the
//! contraction certificate for long words.

use std::fmt;
use std::ops::Sub;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::cocycle::{next_letter, product, trial_rng, Word, WordPolicy};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mat3::{big_vec, cross, BigVec3, FMat, Mat3, QVec3};
use crate::rational::{fmt_q, ln_abs_q, q, Q};
use crate::renorm::{letter_i64, Letter, Perm};

/// `max v - min v`: a seminorm vanishing exactly on constant vectors.
pub fn d_seminorm<T: Clone + PartialOrd + Sub<Output = T>>(v: &[T; 3]) -> T {
    let mut lo = &v[0];
    let mut hi = &v[0];
    for x in &v[1..] {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    hi.clone() - lo.clone()
}

/// Spanning vectors whose orthogonal planes generate the cell structure of
/// the sup problem. Indices are 0-based.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SpanVector {
    /// `M e_i`
    Me(usize),
    /// `e_i - e_j`
    Diff(usize, usize),
    /// `M (e_i - e_j)`
    MDiff(usize, usize),
}

/// Enumeration order; pairs are taken with the first element earlier.
pub const SPAN_ORDER: [SpanVector; 9] = [
    SpanVector::Me(0),
    SpanVector::Me(1),
    SpanVector::Me(2),
    SpanVector::Diff(0, 2),
    SpanVector::Diff(0, 1),
    SpanVector::Diff(1, 2),
    SpanVector::MDiff(0, 1),
    SpanVector::MDiff(1, 2),
    SpanVector::MDiff(0, 2),
];

impl fmt::Display for SpanVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpanVector::Me(i) => write!(f, "Me{}", i + 1),
            SpanVector::Diff(i, j) => write!(f, "e{}-e{}", i + 1, j + 1),
            SpanVector::MDiff(i, j) => write!(f, "M(e{}-e{})", i + 1, j + 1),
        }
    }
}

impl Serialize for SpanVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn unit(i: usize) -> BigVec3 {
    std::array::from_fn(|k| BigInt::from((k == i) as i64))
}

fn sub3(u: &BigVec3, v: &BigVec3) -> BigVec3 {
    std::array::from_fn(|k| &u[k] - &v[k])
}

pub fn span_value(m: &Mat3, s: SpanVector) -> BigVec3 {
    match s {
        SpanVector::Me(i) => m.column(i),
        SpanVector::Diff(i, j) => sub3(&unit(i), &unit(j)),
        SpanVector::MDiff(i, j) => sub3(&m.column(i), &m.column(j)),
    }
}

fn strictly_one_signed(v: &BigVec3) -> bool {
    v.iter().all(|x| x.is_positive()) || v.iter().all(|x| x.is_negative())
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub u: SpanVector,
    pub v: SpanVector,
    #[serde(serialize_with = "ser_bigvec")]
    pub z: BigVec3,
    #[serde(serialize_with = "ser_bigvec")]
    pub mtz: BigVec3,
    #[serde(serialize_with = "ser_big")]
    pub z_d: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub mtz_d: BigInt,
}

impl Candidate {
    pub fn ratio(&self) -> Q {
        Q::new(self.mtz_d.clone(), self.z_d.clone())
    }
}

fn ser_big<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_bigvec<S: Serializer>(v: &BigVec3, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .serialize(s)
}

fn ser_q<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

/// Surviving candidates `z = u ∧ v`, in enumeration order, with `u` drawn
/// from `first` and `v` from later entries.
fn candidates(m: &Mat3, first: &[SpanVector]) -> Vec<Candidate> {
    let mt = m.transpose();
    let vals: Vec<BigVec3> = SPAN_ORDER.iter().map(|&s| span_value(m, s)).collect();
    let mut out = Vec::new();
    for (i, &u) in SPAN_ORDER.iter().enumerate() {
        if !first.contains(&u) {
            continue;
        }
        for (j, &v) in SPAN_ORDER.iter().enumerate().skip(i + 1) {
            let z = cross(&vals[i], &vals[j]);
            if z.iter().all(|x| x.is_zero()) {
                continue;
            }
            let mtz = mt.mul_vec(&z);
            if strictly_one_signed(&mtz) {
                continue;
            }
            let z_d = d_seminorm(&z);
            if z_d.is_zero() {
                continue;
            }
            let mtz_d = d_seminorm(&mtz);
            out.push(Candidate {
                u,
                v,
                z,
                mtz,
                z_d,
                mtz_d,
            });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeNormResult {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    pub witness: Candidate,
    pub candidates: usize,
}

/// `sup_{f ∈ M R³_{≥0}} ‖Mᵀ|_{f⊥}‖_D`, exactly, by enumerating the lines cut
/// out by pairs of planes orthogonal to `ME ∪ (E-E) ∪ M(E-E)`. The sup is a
/// max of a ratio of piecewise linear functions over finitely many cells, so
/// it is attained on one of these lines.
pub fn cone_sup_dnorm(m: &Mat3) -> Result<ConeNormResult> {
    if m.det().is_zero() {
        return Err(Error::InvalidParams("matrix is singular".into()));
    }
    let cands = candidates(m, &SPAN_ORDER);
    let n = cands.len();
    let best = cands
        .into_iter()
        .reduce(|best, c| if c.ratio() > best.ratio() { c } else { best })
        .ok_or_else(|| Error::Degenerate("every candidate direction is degenerate".into()))?;
    Ok(ConeNormResult {
        value: best.ratio(),
        witness: best,
        candidates: n,
    })
}

/// The 21 rows for `M = A CA B CB` with `u ∈ {Me1, Me2, Me3}`.
pub fn table1_reproduce() -> Vec<Candidate> {
    let m = product(&"AaBb".parse().expect("static word"))
        .expect("admissible")
        .matrix;
    candidates(&m, &SPAN_ORDER[..3])
}

pub type ReferenceRow = (&'static str, &'static str, [i64; 3], [i64; 3], i64, i64);

/// Reference `(u, v, z, Mᵀz, ‖z‖_D, ‖Mᵀz‖_D)` rows. Two cells contradict
/// their own row: row 2 has `z = (0,-1,-1)` where `(3,1,1) ∧ (2,1,1) = (0,-1,1)`,
/// and row 10 has `Mᵀz = (-4,0,2)` where the product is `(-4,0,-2)`. Both
/// rows carry the correct norms.
pub const REFERENCE_TABLE: [ReferenceRow; 21] = [
    ("Me1", "Me2", [-1, 0, 3], [0, 0, 1], 4, 1),
    ("Me1", "Me3", [0, -1, -1], [0, -1, 0], 2, 1),
    ("Me1", "e1-e3", [-1, 4, -1], [0, 4, 1], 5, 4),
    ("Me1", "e1-e2", [1, 1, -4], [0, 1, -1], 5, 2),
    ("Me1", "e2-e3", [-2, 3, 3], [0, 3, 2], 5, 3),
    ("Me1", "M(e1-e2)", [1, 0, -3], [0, 0, -1], 4, 1),
    ("Me1", "M(e2-e3)", [-1, 1, 2], [0, 1, 1], 3, 1),
    ("Me1", "M(e1-e3)", [0, 1, -1], [0, 1, 0], 2, 1),
    ("Me2", "Me3", [1, -1, -1], [1, 0, 0], 2, 1),
    ("Me2", "e1-e3", [-2, 4, -2], [-4, 0, 2], 6, 4),
    ("Me2", "e1-e2", [1, 1, -5], [-1, 0, -2], 6, 2),
    ("Me2", "e2-e3", [-3, 3, 3], [-3, 0, 0], 6, 3),
    ("Me2", "M(e1-e2)", [1, 0, -3], [0, 0, -1], 4, 1),
    ("Me2", "M(e2-e3)", [-1, 1, 1], [-1, 0, 0], 2, 1),
    ("Me2", "M(e1-e3)", [0, 1, -2], [-1, 0, -1], 3, 1),
    ("Me3", "e1-e3", [-1, 3, -1], [-1, 2, 0], 4, 3),
    ("Me3", "e1-e2", [1, 1, -3], [1, 2, 0], 4, 2),
    ("Me3", "e2-e3", [-2, 2, 2], [-2, 0, 0], 4, 2),
    ("Me3", "M(e1-e2)", [1, 0, -2], [1, 1, 0], 3, 1),
    ("Me3", "M(e2-e3)", [-1, 1, 1], [-1, 0, 0], 2, 1),
    ("Me3", "M(e1-e3)", [0, 1, -1], [0, 1, 0], 2, 1),
];

#[derive(Clone, Debug, Serialize)]
pub struct RowComparison {
    pub row: usize,
    pub pair_matches: bool,
    pub z_matches: bool,
    pub mtz_matches: bool,
    pub norms_match: bool,
    /// The reference `z` differs from `u ∧ v` of its own `u` and `v`.
    pub reference_z_inconsistent: bool,
    /// The reference `Mᵀz` differs from `Mᵀ` applied to the reference `z`.
    pub reference_mtz_inconsistent: bool,
}

impl RowComparison {
    pub fn verbatim(&self) -> bool {
        self.pair_matches && self.z_matches && self.mtz_matches && self.norms_match
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableComparison {
    pub computed_rows: usize,
    pub reference_rows: usize,
    pub verbatim_rows: usize,
    pub rows: Vec<RowComparison>,
    #[serde(serialize_with = "ser_q")]
    pub max_ratio: Q,
}

pub fn table1_compare() -> TableComparison {
    let rows = table1_reproduce();
    let m = product(&"AaBb".parse().expect("static word"))
        .expect("admissible")
        .matrix;
    let mt = m.transpose();
    let label = |s: &str| {
        SPAN_ORDER
            .iter()
            .position(|x| x.to_string() == s)
            .expect("known label")
    };
    let mut cmp = Vec::new();
    for (i, (r, refrow)) in rows.iter().zip(REFERENCE_TABLE.iter()).enumerate() {
        let (ru, rv, rz, rmtz, rzd, rmtzd) = *refrow;
        let rz = big_vec(rz);
        let rmtz = big_vec(rmtz);
        let own_z = cross(
            &span_value(&m, SPAN_ORDER[label(ru)]),
            &span_value(&m, SPAN_ORDER[label(rv)]),
        );
        cmp.push(RowComparison {
            row: i + 1,
            pair_matches: r.u.to_string() == ru && r.v.to_string() == rv,
            z_matches: r.z == rz,
            mtz_matches: r.mtz == rmtz,
            norms_match: r.z_d == BigInt::from(rzd) && r.mtz_d == BigInt::from(rmtzd),
            reference_z_inconsistent: own_z != rz,
            reference_mtz_inconsistent: mt.mul_vec(&rz) != rmtz,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio()).max().unwrap_or_else(Q::zero);
    TableComparison {
        computed_rows: rows.len(),
        reference_rows: REFERENCE_TABLE.len(),
        verbatim_rows: cmp.iter().filter(|c| c.verbatim()).count(),
        rows: cmp,
        max_ratio,
    }
}

pub fn table1_csv(rows: &[Candidate]) -> String {
    let v = |x: &BigVec3| format!("\"({},{},{})\"", x[0], x[1], x[2]);
    let mut out = String::from("u,v,z,MTz,z_D,MTz_D\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.u,
            r.v,
            v(&r.z),
            v(&r.mtz),
            r.z_d,
            r.mtz_d
        ));
    }
    out
}

/// Direct check of the claimed identity `sup_{f ≥ 0} ‖(X^k CX)ᵀ|_{f⊥}‖_D = 1`
/// for `X ∈ {A, B}`, following the hand argument step by step: the
/// transpose reduces modulo constants to `v ↦ (v1, v2 - v3, 0)` (mirrored
/// for `B`), and then a min/max squeeze is claimed. The squeeze is tested on
/// the vertices of `{‖v‖_D ≤ 1} ∩ f⊥` for the coordinate directions `f`.
#[derive(Clone, Debug, Serialize)]
pub struct NormOneCheck {
    pub k: usize,
    pub letter: Letter,
    /// The transpose minus the reduced map is constant on each basis vector.
    pub reduction_holds: bool,
    /// `v = (a, -b, 0)`-type vectors realise ratio 1.
    pub equality_witness_holds: bool,
    /// `min v ≤ min v' ≤ 0 ≤ max v' ≤ max v` on every tested vertex.
    pub squeeze_holds: bool,
    #[serde(serialize_with = "ser_opt_qvec")]
    pub squeeze_counterexample: Option<QVec3>,
    #[serde(serialize_with = "ser_q")]
    pub cone_sup: Q,
}

fn ser_opt_qvec<S: Serializer>(v: &Option<QVec3>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref()
        .map(|x| x.iter().map(fmt_q).collect::<Vec<_>>())
        .serialize(s)
}

pub fn norm_one_direct(k: usize, crossing: Letter) -> Result<NormOneCheck> {
    let stay = match crossing {
        Letter::CA => Letter::A,
        Letter::CB => Letter::B,
        _ => return Err(Error::InvalidParams("expected a crossing letter".into())),
    };
    let word = Word::from_letters([vec![stay; k], vec![crossing]].concat());
    let m = product(&word)?.matrix;
    let mt = m.transpose();
    // (v1, v2 - v3, 0) for A^k CA and (v1 - v3, v2, 0) for B^k CB.
    let reduced = |v: &QVec3| -> QVec3 {
        match crossing {
            Letter::CA => [v[0].clone(), &v[1] - &v[2], Q::zero()],
            _ => [&v[0] - &v[2], v[1].clone(), Q::zero()],
        }
    };
    let reduction_holds = (0..3).all(|i| {
        let e: QVec3 = std::array::from_fn(|k| q((k == i) as i64, 1));
        let lhs = mt.mul_qvec(&e);
        let r = reduced(&e);
        let d: QVec3 = std::array::from_fn(|k| &lhs[k] - &r[k]);
        d[0] == d[1] && d[1] == d[2]
    });
    let ratio = |v: &QVec3| d_seminorm(&mt.mul_qvec(v)) / d_seminorm(v);
    let witness: QVec3 = match crossing {
        Letter::CA => [q(2, 1), q(-3, 1), Q::zero()],
        _ => [q(-3, 1), q(2, 1), Q::zero()],
    };
    let equality_witness_holds = ratio(&witness).is_one();
    let mut counterexample = None;
    'outer: for i in 0..3 {
        let f: QVec3 = std::array::from_fn(|k| q((k == i) as i64, 1));
        for v in d_ball_vertices(&f) {
            let w = reduced(&v);
            let (vmin, vmax) = (min3(&v), max3(&v));
            let (wmin, wmax) = (min3(&w), max3(&w));
            let ok = vmin <= wmin && wmin <= Q::zero() && Q::zero() <= wmax && wmax <= vmax;
            if !ok {
                counterexample = Some(v);
                break 'outer;
            }
        }
    }
    Ok(NormOneCheck {
        k,
        letter: crossing,
        reduction_holds,
        equality_witness_holds,
        squeeze_holds: counterexample.is_none(),
        squeeze_counterexample: counterexample,
        cone_sup: cone_sup_dnorm(&m)?.value,
    })
}

fn min3(v: &QVec3) -> Q {
    v.iter().min().expect("three entries").clone()
}

fn max3(v: &QVec3) -> Q {
    v.iter().max().expect("three entries").clone()
}

/// Solves a 3×3 rational system by Cramer's rule.
fn solve3(a: &[QVec3; 3], b: &QVec3) -> Option<QVec3> {
    let det = |m: &[QVec3; 3]| {
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    };
    let d = det(a);
    if d.is_zero() {
        return None;
    }
    Some(std::array::from_fn(|c| {
        let mut m = a.clone();
        for r in 0..3 {
            m[r][c] = b[r].clone();
        }
        det(&m) / &d
    }))
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
const SIGNS: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Vertices of the polygon `{‖v‖_D ≤ 1} ∩ f⊥` for nonnegative nonzero `f`.
pub fn d_ball_vertices(f: &QVec3) -> Vec<QVec3> {
    let mut out: Vec<QVec3> = Vec::new();
    for (pi, &(i, j)) in PAIRS.iter().enumerate() {
        for &(k, l) in &PAIRS[pi + 1..] {
            for (s1, s2) in SIGNS {
                let row = |a: usize, b: usize| -> QVec3 {
                    std::array::from_fn(|t| q((t == a) as i64 - (t == b) as i64, 1))
                };
                let sys = [f.clone(), row(i, j), row(k, l)];
                if let Some(v) = solve3(&sys, &[Q::zero(), q(s1, 1), q(s2, 1)]) {
                    if d_seminorm(&v) <= Q::one() && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

/// Vertices of the polygon `{‖v‖_∞ ≤ 1} ∩ f⊥`.
pub fn inf_ball_vertices(f: &QVec3) -> Vec<QVec3> {
    let mut out: Vec<QVec3> = Vec::new();
    let mut push = |v: QVec3| {
        if !out.contains(&v) {
            out.push(v);
        }
    };
    for &(i, j) in &PAIRS {
        let k = 3 - i - j;
        for (s1, s2) in SIGNS {
            if f[k].is_zero() {
                continue;
            }
            let mut v: QVec3 = [Q::zero(), Q::zero(), Q::zero()];
            v[i] = q(s1, 1);
            v[j] = q(s2, 1);
            v[k] = -(&f[i] * &v[i] + &f[j] * &v[j]) / &f[k];
            if v[k].abs() <= Q::one() {
                push(v);
            }
        }
    }
    for mask in 0..8 {
        let v: QVec3 = std::array::from_fn(|t| q(if mask & (1 << t) != 0 { 1 } else { -1 }, 1));
        if (0..3).map(|t| &f[t] * &v[t]).sum::<Q>().is_zero() {
            push(v);
        }
    }
    out
}

fn check_direction(f: &QVec3) -> Result<()> {
    if f.iter().any(|x| x.is_negative()) || f.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidParams(
            "f must be nonzero and nonnegative".into(),
        ));
    }
    Ok(())
}

fn inf_norm(v: &QVec3) -> Q {
    v.iter().map(|x| x.abs()).max().expect("three entries")
}

/// `‖Mᵀ|_{f⊥}‖` with the D-norm on domain and codomain, exactly.
pub fn restricted_dnorm(m: &Mat3, f: &QVec3) -> Result<Q> {
    check_direction(f)?;
    let mt = m.transpose();
    Ok(d_ball_vertices(f)
        .iter()
        .map(|v| d_seminorm(&mt.mul_qvec(v)))
        .max()
        .unwrap_or_else(Q::zero))
}

/// `‖Mᵀ|_{f⊥}‖` with the sup norm on domain and codomain, exactly.
pub fn restricted_inf_norm(m: &Mat3, f: &QVec3) -> Result<Q> {
    check_direction(f)?;
    let mt = m.transpose();
    Ok(inf_ball_vertices(f)
        .iter()
        .map(|v| inf_norm(&mt.mul_qvec(v)))
        .max()
        .unwrap_or_else(Q::zero))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LyapunovConfig {
    pub policy: WordPolicy,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    /// Steps between re-orthonormalizations.
    pub cadence: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            policy: WordPolicy::UniformEdges,
            steps: 100_000,
            trials: 8,
            seed: 0,
            cadence: 20,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    /// `(λ1, λ2, λ3)` with `λ3 = -(λ1 + λ2)`.
    pub exponents: [f64; 3],
    pub stderr: [f64; 3],
    /// `λ3` from its own column rather than from the trace identity.
    pub lambda3_direct: f64,
    /// `λ1 + λ2 + λ3` with the direct `λ3`; zero up to rounding.
    pub sum_direct: f64,
    pub per_trial: Vec<[f64; 3]>,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default, Debug)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Modified Gram-Schmidt on the columns; returns `log |R_ii|`.
fn reorthonormalize(q: &mut FMat) -> [f64; 3] {
    let mut logs = [0.0; 3];
    for j in 0..3 {
        for p in 0..j {
            let d: f64 = (0..3).map(|i| q[i][j] * q[i][p]).sum();
            for i in 0..3 {
                q[i][j] -= d * q[i][p];
            }
        }
        let n = (0..3).map(|i| q[i][j] * q[i][j]).sum::<f64>().sqrt();
        logs[j] = n.ln();
        for i in 0..3 {
            q[i][j] /= n;
        }
    }
    logs
}

/// `Q ← Mᵀ Q` for a letter matrix.
fn left_mul_transpose(letter: Letter, q: &mut FMat) {
    let m = letter_i64(letter);
    let old = *q;
    for i in 0..3 {
        for j in 0..3 {
            q[i][j] = (0..3).map(|k| m[k][i] as f64 * old[k][j]).sum();
        }
    }
}

/// Exponents of the transposed cocycle along one stream of letters.
pub fn lyapunov_along<I: Iterator<Item = Letter>>(letters: I, cadence: usize) -> ([f64; 3], usize) {
    let cadence = cadence.max(1);
    let mut q: FMat = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut acc = [KahanSum::default(); 3];
    let mut n = 0;
    let mut since = 0;
    for l in letters {
        left_mul_transpose(l, &mut q);
        n += 1;
        since += 1;
        if since == cadence {
            for (a, x) in acc.iter_mut().zip(reorthonormalize(&mut q)) {
                a.add(x);
            }
            since = 0;
        }
    }
    if since > 0 {
        for (a, x) in acc.iter_mut().zip(reorthonormalize(&mut q)) {
            a.add(x);
        }
    }
    let nf = n.max(1) as f64;
    (acc.map(|a| a.value() / nf), n)
}

pub fn lyapunov_of_periodic_word(
    word: &Word,
    repetitions: usize,
    cadence: usize,
) -> Result<[f64; 3]> {
    if word.is_empty() || !word.repeat(2).is_path() {
        return Err(Error::Inadmissible(
            "period must close up into a loop".into(),
        ));
    }
    let letters = word
        .letters()
        .iter()
        .copied()
        .cycle()
        .take(word.len() * repetitions);
    Ok(lyapunov_along(letters, cadence).0)
}

pub fn lyapunov_estimate(cfg: &LyapunovConfig, exec: Execution) -> Result<LyapunovEstimate> {
    if cfg.steps < 1000 {
        return Err(Error::InvalidParams("need at least 1000 steps".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParams("need at least one trial".into()));
    }
    cfg.policy.validate()?;
    if cfg.policy.is_degenerate() {
        return Err(Error::Degenerate(
            "policy never produces a positive product".into(),
        ));
    }
    let runs = exec.map_indices(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let mut state = Perm::P123;
        let letters = std::iter::from_fn(|| {
            let l = next_letter(&mut rng, state, &cfg.policy);
            state = l.target();
            Some(l)
        })
        .take(cfg.steps);
        lyapunov_along(letters, cfg.cadence).0
    });
    let per_trial: Vec<[f64; 3]> = runs.iter().map(|r| [r[0], r[1], -(r[0] + r[1])]).collect();
    let mean_sd = |k: usize, src: &[[f64; 3]]| {
        let n = src.len() as f64;
        let mean = src.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = if src.len() > 1 {
            src.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            f64::NAN
        };
        (mean, (var / n).sqrt())
    };
    let mut exponents = [0.0; 3];
    let mut stderr = [0.0; 3];
    for k in 0..3 {
        let (m, s) = mean_sd(k, &per_trial);
        exponents[k] = m;
        stderr[k] = s;
    }
    let lambda3_direct = mean_sd(2, &runs).0;
    Ok(LyapunovEstimate {
        exponents,
        stderr,
        lambda3_direct,
        sum_direct: exponents[0] + exponents[1] + lambda3_direct,
        per_trial,
    })
}

/// Perron root of a positive matrix: largest real root of the characteristic
/// polynomial, by bisection.
pub fn perron_root(m: &Mat3) -> f64 {
    let a = m.to_f64();
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = crate::rational::to_f64(&Q::from_integer(m.det()));
    let p = |x: f64| x * x * x - tr * x * x + minors * x - det;
    // Walk down from a bound on the spectral radius to the largest sign
    // change, then bisect.
    let top = a
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let step = top / 4096.0;
    let mut hi = top;
    while hi > step && p(hi - step) > 0.0 {
        hi -= step;
    }
    let mut lo = hi - step;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The letter pattern whose occurrences are counted by the certificate.
pub const CERTIFICATE_PATTERN: [Letter; 8] = [
    Letter::A,
    Letter::CA,
    Letter::B,
    Letter::CB,
    Letter::A,
    Letter::CA,
    Letter::B,
    Letter::CB,
];

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub n: usize,
    /// End of the last complete block.
    pub complete_prefix: usize,
    pub occurrences: usize,
    pub separated: usize,
    #[serde(serialize_with = "ser_q_short")]
    pub measured: Q,
    #[serde(serialize_with = "ser_q_short")]
    pub bound: Q,
    pub log10_measured: f64,
    pub log10_bound: f64,
    pub ok: bool,
}

fn ser_q_short<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.numer().bits() + x.denom().bits() <= 256 {
        s.serialize_str(&fmt_q(x))
    } else {
        s.serialize_str(&format!("~1e{:.3}", ln_abs_q(x) / std::f64::consts::LN_10))
    }
}

/// Occurrence starts of the certificate pattern inside `0..=limit-8`, and a
/// greedy left-to-right 8-separated subfamily.
pub fn pattern_occurrences(word: &Word, limit: usize) -> (Vec<usize>, Vec<usize>) {
    let l = word.letters();
    let occ: Vec<usize> = (0..=limit.saturating_sub(8))
        .filter(|&j| limit >= 8 && l.get(j..j + 8) == Some(&CERTIFICATE_PATTERN[..]))
        .collect();
    let mut sep: Vec<usize> = Vec::new();
    for &j in &occ {
        if sep.last().is_none_or(|&p| j >= p + 8) {
            sep.push(j);
        }
    }
    (occ, sep)
}

/// Exact check of `‖Mᵀ|_{f⊥}‖_∞ ≤ 2(n+1)(4/5)^{#I}` for the product `M` of an
/// admissible word from `P123`, with `f = M·(1,1,1)` in the image cone.
pub fn contraction_certificate(word: &Word) -> Result<Certificate> {
    if word.is_empty() {
        return Err(Error::NotContracted("empty word".into()));
    }
    if !word.is_admissible(Perm::P123) {
        return Err(Error::Inadmissible(word.to_string()));
    }
    let m = product(word)?.matrix;
    let ones = big_vec([1, 1, 1]);
    let f: QVec3 = m.mul_vec(&ones).map(Q::from_integer);
    let measured = restricted_inf_norm(&m, &f)?;
    let complete_prefix = word
        .letters()
        .iter()
        .rposition(|l| l.is_crossing())
        .map_or(0, |i| i + 1);
    let (occ, sep) = pattern_occurrences(word, complete_prefix);
    let n = word.len();
    let bound = Q::from_integer(BigInt::from(2 * (n + 1))) * q(4, 5).pow(sep.len() as i32);
    let log10 = |x: &Q| {
        if x.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_abs_q(x) / std::f64::consts::LN_10
        }
    };
    Ok(Certificate {
        n,
        complete_prefix,
        occurrences: occ.len(),
        separated: sep.len(),
        log10_measured: log10(&measured),
        log10_bound: log10(&bound),
        ok: measured <= bound,
        measured,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::matrix_of;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn qv(v: [i64; 3]) -> QVec3 {
        v.map(|x| q(x, 1))
    }

    #[test]
    fn seminorm_examples() {
        assert_eq!(d_seminorm(&[1, -1, 0]), 2);
        assert_eq!(d_seminorm(&[5, 5, 5]), 0);
        assert_eq!(d_seminorm(&[3, 1, 1]), 2);
        assert_eq!(d_seminorm(&[0.5, -0.25, 0.0]), 0.75);
    }

    #[test]
    fn period_matrix_cone_norm_is_four_fifths() {
        let r = cone_sup_dnorm(&product(&w("AaBb")).unwrap().matrix).unwrap();
        assert_eq!(r.value, q(4, 5));
        assert_eq!(r.witness.z, big_vec([-1, 4, -1]));
        assert_eq!(
            (r.witness.u, r.witness.v),
            (SpanVector::Me(0), SpanVector::Diff(0, 2))
        );
        let r = cone_sup_dnorm(&product(&w("BbAa")).unwrap().matrix).unwrap();
        assert_eq!(r.value, q(4, 5));
    }

    #[test]
    fn single_blocks_exceed_one() {
        for k in 0..=10usize {
            for (x, c) in [("A", "a"), ("B", "b")] {
                let m = product(&w(&format!("{}{}", x.repeat(k), c)))
                    .unwrap()
                    .matrix;
                let r = cone_sup_dnorm(&m).unwrap();
                assert_eq!(r.value, q(k as i64 + 2, k as i64 + 1), "k={k} {x}");
            }
        }
    }

    #[test]
    fn norm_one_direct_argument() {
        for k in 0..=10 {
            for c in [Letter::CA, Letter::CB] {
                let r = norm_one_direct(k, c).unwrap();
                assert!(r.reduction_holds && r.equality_witness_holds);
                assert!(!r.squeeze_holds);
                let v = r.squeeze_counterexample.unwrap();
                let w = match c {
                    Letter::CA => [v[0].clone(), &v[1] - &v[2], Q::zero()],
                    _ => [&v[0] - &v[2], v[1].clone(), Q::zero()],
                };
                assert!(min3(&w) < min3(&v) || max3(&w) > max3(&v));
                assert_eq!(r.cone_sup, q(k as i64 + 2, k as i64 + 1));
            }
        }
    }

    #[test]
    fn table_rows() {
        let rows = table1_reproduce();
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[0].z, big_vec([-1, 0, 3]));
        assert_eq!(rows[0].mtz, big_vec([0, 0, 1]));
        assert_eq!(rows[20].z, big_vec([0, 1, -1]));
        assert_eq!(rows[20].mtz, big_vec([0, 1, 0]));
        let cmp = table1_compare();
        assert_eq!(cmp.max_ratio, q(4, 5));
        assert_eq!(cmp.verbatim_rows, 19);
        let off: Vec<usize> = cmp
            .rows
            .iter()
            .filter(|r| !r.verbatim())
            .map(|r| r.row)
            .collect();
        assert_eq!(off, vec![2, 10]);
        assert!(
            cmp.rows[1].reference_z_inconsistent
                && !cmp.rows[1].z_matches
                && cmp.rows[1].mtz_matches
        );
        assert!(
            cmp.rows[9].reference_mtz_inconsistent
                && !cmp.rows[9].mtz_matches
                && cmp.rows[9].z_matches
        );
        assert!(cmp.rows.iter().all(|r| r.pair_matches && r.norms_match));
        let csv = table1_csv(&rows);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("Me1,Me2,\"(-1,0,3)\",\"(0,0,1)\",4,1"));
    }

    #[test]
    fn restricted_norms_basic() {
        let id = Mat3::identity();
        for f in [qv([1, 1, 1]), qv([1, 0, 0]), qv([2, 3, 0])] {
            assert_eq!(restricted_dnorm(&id, &f).unwrap(), q(1, 1));
            assert_eq!(restricted_inf_norm(&id, &f).unwrap(), q(1, 1));
        }
        assert!(restricted_dnorm(&id, &qv([0, 0, 0])).is_err());
        assert!(restricted_dnorm(&id, &qv([1, -1, 0])).is_err());
        // (a, -b, 0) realises ratio 1 for A^k CA at f = (1,1,1).
        let m = product(&w("AAAa")).unwrap().matrix;
        let v = qv([1, -1, 0]);
        assert_eq!(d_seminorm(&m.transpose().mul_qvec(&v)), d_seminorm(&v));
        assert!(restricted_dnorm(&m, &qv([1, 1, 1])).unwrap() >= q(1, 1));
    }

    #[test]
    fn ball_vertices_have_unit_norm() {
        for f in [qv([1, 2, 3]), qv([0, 0, 1]), qv([1, 1, 0])] {
            let dv = d_ball_vertices(&f);
            assert!(dv.len() >= 4);
            assert!(dv.iter().all(|v| d_seminorm(v) == q(1, 1)));
            let iv = inf_ball_vertices(&f);
            assert!(iv.len() >= 4);
            assert!(iv.iter().all(|v| inf_norm(v) == q(1, 1)));
        }
    }

    #[test]
    fn periodic_lyapunov_matches_perron_root() {
        let m = product(&w("AaBb")).unwrap().matrix;
        let rho = perron_root(&m);
        // Power iteration as a second route.
        let a = m.to_f64();
        let mut v = [1.0f64; 3];
        let mut r = 0.0;
        for _ in 0..500 {
            let u: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| a[i][j] * v[j]).sum());
            r = u.iter().sum::<f64>() / v.iter().sum::<f64>();
            v = u.map(|x| x / r);
        }
        assert!((rho - r).abs() < 1e-12);
        let ex = lyapunov_of_periodic_word(&w("AaBb"), 5000, 20).unwrap();
        assert!(
            (4.0 * ex[0] - rho.ln()).abs() < 1e-3,
            "{} vs {}",
            4.0 * ex[0],
            rho.ln()
        );
        assert!(ex.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn lyapunov_cadence_invariance_and_errors() {
        let base = LyapunovConfig {
            steps: 20_000,
            trials: 2,
            ..Default::default()
        };
        let a = lyapunov_estimate(&base, Execution::Sequential).unwrap();
        let b =
            lyapunov_estimate(&LyapunovConfig { cadence: 7, ..base }, Execution::Parallel).unwrap();
        for k in 0..3 {
            assert!((a.exponents[k] - b.exponents[k]).abs() < 1e-9);
        }
        assert!(a.sum_direct.abs() < 1e-9);
        assert!(
            lyapunov_estimate(&LyapunovConfig { steps: 10, ..base }, Execution::Sequential)
                .is_err()
        );
        let stuck = LyapunovConfig {
            policy: WordPolicy::Weighted { p_a: 1.0, p_b: 0.5 },
            ..base
        };
        assert!(matches!(
            lyapunov_estimate(&stuck, Execution::Sequential),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn certificate_examples() {
        let c = contraction_certificate(&w("AaBbAaBb")).unwrap();
        assert!(c.measured <= q(32, 25), "{}", fmt_q(&c.measured));
        assert_eq!(c.occurrences, 1);
        assert!(c.ok);
        for k in 0..8 {
            let c = contraction_certificate(&w(&format!("{}a", "A".repeat(k)))).unwrap();
            assert!(
                c.measured <= q(2 * (k as i64 + 1), 1),
                "k={k}: {}",
                fmt_q(&c.measured)
            );
            assert!(c.ok);
        }
        assert!(contraction_certificate(&Word::default()).is_err());
    }

    #[test]
    fn letter_matrix_transpose_step() {
        let mut qm: FMat = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        left_mul_transpose(Letter::A, &mut qm);
        let at = matrix_of(Letter::A).transpose().to_f64();
        assert_eq!(qm, at);
    }
}
