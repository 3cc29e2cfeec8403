//! Admissible words on the two-state Rauzy graph, their big-integer matrix
//! products, cylinders in the simplex, and seeded random words.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::itm::LengthVector;
use crate::mat3::{fmul, ftranspose, Mat3};
use crate::rational::Q;
use crate::renorm::{matrix_of, Letter, Perm};

/// Allowed successor pairs in letter order `A, CA, B, CB`.
pub const TRANSITIONS: [[u8; 4]; 4] = [[1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1], [1, 1, 0, 0]];

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        self.letters.push(l);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word::from_letters(self.letters[..n.min(self.len())].to_vec())
    }

    pub fn repeat(&self, k: usize) -> Word {
        Word::from_letters(self.letters.repeat(k))
    }

    /// Consecutive letters are allowed by the transition matrix.
    pub fn is_path(&self) -> bool {
        self.letters
            .windows(2)
            .all(|w| TRANSITIONS[w[0].index()][w[1].index()] == 1)
    }

    pub fn is_admissible(&self, start: Perm) -> bool {
        self.letters.first().is_none_or(|l| l.source() == start) && self.is_path()
    }

    /// State reached after reading the word from `start`.
    pub fn end_state(&self, start: Perm) -> Perm {
        self.letters.last().map_or(start, |l| l.target())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.letters.iter().map(|l| l.to_char()).collect();
        f.write_str(&s)
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                Letter::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("bad letter {c:?} in word")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word::from_letters)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn is_admissible(word: &Word, start: Perm) -> bool {
    word.is_admissible(start)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CocycleProduct {
    pub matrix: Mat3,
    pub length: usize,
}

/// Right multiplication by a letter matrix, done as column additions.
pub fn right_mul_letter(m: &mut Mat3, letter: Letter) {
    match letter {
        Letter::A => {
            m.add_column(1, 0);
            m.add_column(2, 0);
        }
        Letter::CA => m.add_column(0, 2),
        Letter::B => {
            m.add_column(0, 1);
            m.add_column(2, 1);
        }
        Letter::CB => m.add_column(1, 2),
    }
}

pub fn product(word: &Word) -> Result<CocycleProduct> {
    if !word.is_path() {
        return Err(Error::Inadmissible(word.to_string()));
    }
    let mut m = Mat3::identity();
    for &l in word.letters() {
        right_mul_letter(&mut m, l);
    }
    Ok(CocycleProduct {
        matrix: m,
        length: word.len(),
    })
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub enum WordPolicy {
    /// Each of the two out-edges with probability 1/2.
    UniformEdges,
    /// Stay with probability `p_a` at `P123` (letter `A`) and `p_b` at `P213`
    /// (letter `B`).
    Weighted { p_a: f64, p_b: f64 },
}

impl WordPolicy {
    pub fn validate(&self) -> Result<()> {
        if let WordPolicy::Weighted { p_a, p_b } = *self {
            for p in [p_a, p_b] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParams(format!("weight {p} not in [0,1]")));
                }
            }
        }
        Ok(())
    }

    /// Stay probability at a state.
    pub fn stay(&self, p: Perm) -> f64 {
        match (*self, p) {
            (WordPolicy::UniformEdges, _) => 0.5,
            (WordPolicy::Weighted { p_a, .. }, Perm::P123) => p_a,
            (WordPolicy::Weighted { p_b, .. }, Perm::P213) => p_b,
        }
    }

    /// A policy with a deterministic choice somewhere never sees all four
    /// letters, so its products never become positive.
    pub fn is_degenerate(&self) -> bool {
        [Perm::P123, Perm::P213]
            .iter()
            .any(|&p| matches!(self.stay(p), x if x == 0.0 || x == 1.0))
    }
}

/// Generator for trial `stream` of a run seeded with `seed`. Streams are
/// independent, so trials can be spread over threads in any order.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn next_letter<R: Rng + ?Sized>(rng: &mut R, state: Perm, policy: &WordPolicy) -> Letter {
    let [stay, cross] = Letter::out_of(state);
    if rng.random::<f64>() < policy.stay(state) {
        stay
    } else {
        cross
    }
}

pub fn random_word_with<R: Rng + ?Sized>(
    rng: &mut R,
    start: Perm,
    length: usize,
    policy: &WordPolicy,
) -> Result<Word> {
    policy.validate()?;
    let mut state = start;
    let mut letters = Vec::with_capacity(length);
    for _ in 0..length {
        let l = next_letter(rng, state, policy);
        letters.push(l);
        state = l.target();
    }
    Ok(Word::from_letters(letters))
}

/// A word from `P123`, reproducible from `seed`.
pub fn random_word(seed: u64, length: usize, policy: &WordPolicy) -> Result<Word> {
    random_word_with(&mut trial_rng(seed, 0), Perm::P123, length, policy)
}

/// Top left singular vector of the product, nonnegative and of unit length.
pub fn limit_direction(word: &Word) -> Result<[f64; 3]> {
    let p = product(word)?;
    if !p.matrix.is_positive() {
        return Err(Error::NotContracted(format!(
            "product of {:?}… is not positive",
            word.prefix(16).to_string()
        )));
    }
    top_left_singular_vector(&p.matrix)
}

pub fn top_left_singular_vector(m: &Mat3) -> Result<[f64; 3]> {
    let (s, _) = m.to_scaled_f64();
    let sst = fmul(&s, &ftranspose(&s));
    let eig = SymmetricEigen::new(Matrix3::from_fn(|i, j| sst[i][j]));
    let k = eig.eigenvalues.imax();
    let col = eig.eigenvectors.column(k);
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let mut v = [col[0] * sign, col[1] * sign, col[2] * sign];
    if v.iter().any(|x| !x.is_finite() || *x < -1e-12) {
        return Err(Error::Numerical(
            "leading direction left the positive cone".into(),
        ));
    }
    for x in v.iter_mut() {
        *x = x.max(0.0);
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(v.map(|x| x / n))
}

fn column_point(m: &Mat3, j: usize) -> LengthVector {
    let c = m.column(j).map(Q::from_integer);
    LengthVector::from_array(c).expect("nonnegative invertible matrix has nonzero columns")
}

/// Projective image of the simplex: normalized columns of the product.
pub fn cylinder(word: &Word) -> Result<[LengthVector; 3]> {
    if !word.is_admissible(Perm::P123) {
        return Err(Error::Inadmissible(word.to_string()));
    }
    let m = product(word)?.matrix;
    Ok(std::array::from_fn(|j| column_point(&m, j)))
}

/// Columns spanning the hole cone at a state.
pub fn hole_matrix(p: Perm) -> Mat3 {
    match p {
        Perm::P123 => Mat3::from_i64([[0, 1, 1], [1, 1, 0], [0, 0, 1]]),
        Perm::P213 => Mat3::from_i64([[1, 1, 0], [0, 1, 1], [0, 0, 1]]),
    }
}

pub fn hole_triangle(p: Perm) -> [LengthVector; 3] {
    let m = hole_matrix(p);
    std::array::from_fn(|j| column_point(&m, j))
}

/// Triangles at a state: the two child cylinders and the hole.
pub fn state_partition(p: Perm) -> [[LengthVector; 3]; 3] {
    let [stay, cross] = Letter::out_of(p);
    let tri = |m: Mat3| std::array::from_fn(|j| column_point(&m, j));
    [
        tri(matrix_of(stay)),
        tri(matrix_of(cross)),
        hole_triangle(p),
    ]
}

type P2 = [Q; 2];

fn chart(p: &LengthVector) -> P2 {
    [p.b().clone(), p.c().clone()]
}

fn signed_area2(t: &[P2; 3]) -> Q {
    (&t[1][0] - &t[0][0]) * (&t[2][1] - &t[0][1]) - (&t[2][0] - &t[0][0]) * (&t[1][1] - &t[0][1])
}

/// Separating-axis test for closed triangles whose interiors must not meet.
fn interiors_disjoint(s: &[P2; 3], t: &[P2; 3]) -> bool {
    for tri in [s, t] {
        for i in 0..3 {
            let p = &tri[i];
            let q = &tri[(i + 1) % 3];
            let n = [&q[1] - &p[1], &p[0] - &q[0]];
            let proj = |x: &P2| &n[0] * &x[0] + &n[1] * &x[1];
            let (smin, smax) = min_max(s.iter().map(proj));
            let (tmin, tmax) = min_max(t.iter().map(proj));
            if smax <= tmin || tmax <= smin {
                return true;
            }
        }
    }
    false
}

fn min_max(it: impl Iterator<Item = Q>) -> (Q, Q) {
    let v: Vec<Q> = it.collect();
    let lo = v.iter().min().unwrap().clone();
    let hi = v.iter().max().unwrap().clone();
    (lo, hi)
}

/// Exact check that closed triangles inside the simplex tile it: pairwise
/// disjoint interiors and areas summing to the area of the simplex.
pub fn triangles_tile_simplex(tris: &[[LengthVector; 3]]) -> bool {
    let charts: Vec<[P2; 3]> = tris
        .iter()
        .map(|t| [chart(&t[0]), chart(&t[1]), chart(&t[2])])
        .collect();
    let total: Q = charts.iter().map(|t| signed_area2(t).abs()).sum();
    if total != Q::one() {
        return false;
    }
    for i in 0..charts.len() {
        if signed_area2(&charts[i]).is_zero() {
            return false;
        }
        for j in i + 1..charts.len() {
            if !interiors_disjoint(&charts[i], &charts[j]) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Block {
    pub stay: Letter,
    pub power: usize,
    pub cross: Letter,
}

/// Splits a path into blocks `A^k CA` / `B^k CB` by cutting after every
/// crossing letter. Returns the blocks and the unfinished tail.
pub fn block_decomposition(word: &Word) -> Result<(Vec<Block>, Word)> {
    if !word.is_path() {
        return Err(Error::Inadmissible(word.to_string()));
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    for (i, &l) in word.letters().iter().enumerate() {
        if l.is_crossing() {
            let [stay, cross] = Letter::out_of(l.source());
            debug_assert!(word.letters()[start..i].iter().all(|&x| x == stay));
            blocks.push(Block {
                stay,
                power: i - start,
                cross,
            });
            start = i + 1;
        }
    }
    Ok((blocks, Word::from_letters(word.letters()[start..].to_vec())))
}

pub fn blocks_to_word(blocks: &[Block], tail: &Word) -> Word {
    let mut letters = Vec::new();
    for b in blocks {
        letters.extend(std::iter::repeat_n(b.stay, b.power));
        letters.push(b.cross);
    }
    letters.extend_from_slice(tail.letters());
    Word::from_letters(letters)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum IfsConvention {
    /// Projective action of the induction matrices.
    MatrixAction,
    /// Branch maps acting by the transposes on the crossing letters.
    TransposedCrossing,
}

pub fn ifs_map(letter: Letter, p: &LengthVector, conv: IfsConvention) -> LengthVector {
    let m = matrix_of(letter);
    let m = match (conv, letter.is_crossing()) {
        (IfsConvention::TransposedCrossing, true) => m.transpose(),
        _ => m,
    };
    LengthVector::from_array(m.mul_qvec(&p.to_array())).expect("nonnegative image")
}

/// `n·v` for an integer vector, as a rational length vector.
pub fn integer_point(v: [BigInt; 3]) -> Result<LengthVector> {
    if v.iter().any(|x| x.is_negative()) || v.iter().all(|x| x.is_zero()) {
        return Err(Error::InvalidParams(
            "not a nonzero nonnegative vector".into(),
        ));
    }
    LengthVector::from_array(v.map(Q::from_integer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn lv(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> LengthVector {
        LengthVector::new(q(a.0, a.1), q(b.0, b.1), q(c.0, c.1)).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(w("AaBb").is_admissible(Perm::P123));
        assert!(!w("AB").is_admissible(Perm::P123));
        assert!(!w("Bb").is_admissible(Perm::P123));
        assert!(Word::default().is_admissible(Perm::P213));
        assert_eq!(w("Aa").end_state(Perm::P123), Perm::P213);
    }

    #[test]
    fn products() {
        let m = product(&w("AaBb")).unwrap().matrix;
        assert_eq!(m, Mat3::from_i64([[3, 3, 2], [1, 2, 1], [1, 1, 1]]));
        assert_eq!(
            m.inverse_unimodular().unwrap(),
            Mat3::from_i64([[1, -1, -1], [0, 1, -1], [-1, 0, 3]])
        );
        assert_eq!(product(&Word::default()).unwrap().matrix, Mat3::identity());
        let slow = w("AaBbAAa")
            .letters()
            .iter()
            .fold(Mat3::identity(), |m, &l| &m * &matrix_of(l));
        assert_eq!(product(&w("AaBbAAa")).unwrap().matrix, slow);
    }

    #[test]
    fn cylinders() {
        let c = cylinder(&w("A")).unwrap();
        assert_eq!(
            c,
            [
                lv((1, 1), (0, 1), (0, 1)),
                lv((1, 2), (1, 2), (0, 1)),
                lv((1, 2), (0, 1), (1, 2))
            ]
        );
        let c = cylinder(&w("a")).unwrap();
        assert_eq!(
            c,
            [
                lv((1, 2), (0, 1), (1, 2)),
                lv((0, 1), (1, 1), (0, 1)),
                lv((0, 1), (0, 1), (1, 1))
            ]
        );
        let d = cylinder(&Word::default()).unwrap();
        assert_eq!(d[0], lv((1, 1), (0, 1), (0, 1)));
        assert!(cylinder(&w("B")).is_err());
    }

    #[test]
    fn holes_and_partition() {
        assert_eq!(
            hole_triangle(Perm::P123),
            [
                lv((0, 1), (1, 1), (0, 1)),
                lv((1, 2), (1, 2), (0, 1)),
                lv((1, 2), (0, 1), (1, 2))
            ]
        );
        for p in [Perm::P123, Perm::P213] {
            assert!(triangles_tile_simplex(&state_partition(p)));
        }
        // Transposed crossing maps do not tile.
        let t = |l: Letter, conv| {
            let d = cylinder(&Word::default()).unwrap();
            [
                ifs_map(l, &d[0], conv),
                ifs_map(l, &d[1], conv),
                ifs_map(l, &d[2], conv),
            ]
        };
        let transposed = [
            t(Letter::A, IfsConvention::TransposedCrossing),
            t(Letter::CA, IfsConvention::TransposedCrossing),
            hole_triangle(Perm::P123),
        ];
        assert!(!triangles_tile_simplex(&transposed));
        let matrix = [
            t(Letter::A, IfsConvention::MatrixAction),
            t(Letter::CA, IfsConvention::MatrixAction),
            hole_triangle(Perm::P123),
        ];
        assert!(triangles_tile_simplex(&matrix));
    }

    #[test]
    fn random_words_are_reproducible_and_admissible() {
        let p = WordPolicy::UniformEdges;
        let x = random_word(7, 500, &p).unwrap();
        assert_eq!(x, random_word(7, 500, &p).unwrap());
        assert_ne!(x, random_word(8, 500, &p).unwrap());
        assert!(x.is_admissible(Perm::P123));
        assert!(random_word(1, 0, &p).unwrap().is_empty());
        let stuck = WordPolicy::Weighted { p_a: 1.0, p_b: 0.5 };
        assert_eq!(random_word(3, 20, &stuck).unwrap(), w(&"A".repeat(20)));
        assert!(stuck.is_degenerate());
        assert!(WordPolicy::Weighted { p_a: 1.5, p_b: 0.5 }
            .validate()
            .is_err());
        assert!(random_word(
            3,
            5,
            &WordPolicy::Weighted {
                p_a: -0.1,
                p_b: 0.5
            }
        )
        .is_err());
        assert!(random_word(
            3,
            5,
            &WordPolicy::Weighted {
                p_a: f64::NAN,
                p_b: 0.5
            }
        )
        .is_err());
    }

    #[test]
    fn limit_direction_of_periodic_word() {
        assert!(limit_direction(&Word::default()).is_err());
        let f = limit_direction(&w("AaBb").repeat(30)).unwrap();
        // Perron vector of the period matrix by power iteration.
        let m = [[3.0, 3.0, 2.0], [1.0, 2.0, 1.0], [1.0, 1.0, 1.0]];
        let mut v = [1.0f64; 3];
        for _ in 0..200 {
            let u: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| m[i][j] * v[j]).sum());
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = u.map(|x| x / n);
        }
        for i in 0..3 {
            assert!((f[i] - v[i]).abs() < 1e-9, "{f:?} vs {v:?}");
        }
    }

    #[test]
    fn blocks() {
        let word = w("AAaBbAaBBBbA");
        let (blocks, tail) = block_decomposition(&word).unwrap();
        assert_eq!(blocks.len(), 4);
        assert_eq!(
            blocks[0],
            Block {
                stay: Letter::A,
                power: 2,
                cross: Letter::CA
            }
        );
        assert_eq!(blocks[3].power, 3);
        assert_eq!(tail, w("A"));
        assert_eq!(blocks_to_word(&blocks, &tail), word);
    }

    #[test]
    fn word_strings() {
        assert_eq!(w("A a B b").to_string(), "AaBb");
        assert!("AxB".parse::<Word>().is_err());
        assert_eq!(serde_json::to_string(&w("Aa")).unwrap(), "\"Aa\"");
    }
}
