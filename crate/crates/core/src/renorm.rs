//! The Rauzy-type induction on the BT family.
//!
//! From `P123` the induction compares `a` against `b + c` and `c`:
//! `a > b+c` cuts `b+c` off `a` (letter `A`, stay); `a < c` cuts `a` off `c`
//! (letter `CA`, move to `P213`); `c < a < b+c` is the hole, where the map
//! reduces to two intervals. `P213` is the mirror image with `a` and `b`
//! exchanged. Each letter carries a unimodular matrix with `λ = M λ'`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cocycle::Word;
use crate::error::{Error, Result};
use crate::itm::LengthVector;
use crate::mat3::Mat3;
use crate::rational::{fmt_q, Q};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum Perm {
    P123,
    P213,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, PartialOrd, Ord)]
pub enum Letter {
    A,
    CA,
    B,
    CB,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::CA, Letter::B, Letter::CB];

    /// Position in the order `A, CA, B, CB`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn source(self) -> Perm {
        match self {
            Letter::A | Letter::CA => Perm::P123,
            Letter::B | Letter::CB => Perm::P213,
        }
    }

    pub fn target(self) -> Perm {
        match self {
            Letter::A | Letter::CB => Perm::P123,
            Letter::B | Letter::CA => Perm::P213,
        }
    }

    pub fn is_crossing(self) -> bool {
        matches!(self, Letter::CA | Letter::CB)
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::CA => 'a',
            Letter::B => 'B',
            Letter::CB => 'b',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'A' => Some(Letter::A),
            'a' => Some(Letter::CA),
            'B' => Some(Letter::B),
            'b' => Some(Letter::CB),
            _ => None,
        }
    }

    /// The two letters available at a state: (stay, cross).
    pub fn out_of(p: Perm) -> [Letter; 2] {
        match p {
            Perm::P123 => [Letter::A, Letter::CA],
            Perm::P213 => [Letter::B, Letter::CB],
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Letter::A => "A",
            Letter::CA => "CA",
            Letter::B => "B",
            Letter::CB => "CB",
        };
        f.write_str(s)
    }
}

pub fn matrix_of(letter: Letter) -> Mat3 {
    Mat3::from_i64(letter_i64(letter))
}

pub fn letter_i64(letter: Letter) -> [[i64; 3]; 3] {
    match letter {
        Letter::A => [[1, 1, 1], [0, 1, 0], [0, 0, 1]],
        Letter::CA => [[1, 0, 0], [0, 1, 0], [1, 0, 1]],
        Letter::B => [[1, 0, 0], [1, 1, 1], [0, 0, 1]],
        Letter::CB => [[1, 0, 0], [0, 1, 0], [0, 1, 1]],
    }
}

pub fn inverse_i64(letter: Letter) -> [[i64; 3]; 3] {
    match letter {
        Letter::A => [[1, -1, -1], [0, 1, 0], [0, 0, 1]],
        Letter::CA => [[1, 0, 0], [0, 1, 0], [-1, 0, 1]],
        Letter::B => [[1, 0, 0], [-1, 1, -1], [0, 0, 1]],
        Letter::CB => [[1, 0, 0], [0, 1, 0], [0, -1, 1]],
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct InductionState {
    pub perm: Perm,
    pub lengths: LengthVector,
}

impl InductionState {
    pub fn new(perm: Perm, lengths: LengthVector) -> Self {
        Self { perm, lengths }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepOutcome {
    Step {
        next: InductionState,
        letter: Letter,
    },
    Hole,
    Degenerate,
}

/// Which letter the comparisons select, without touching the lengths.
pub fn dispatch(perm: Perm, l: &LengthVector) -> StepOutcome {
    let (a, b, c) = (l.a(), l.b(), l.c());
    // `x` is the interval that can win against the other two.
    let (x, y) = match perm {
        Perm::P123 => (a, b),
        Perm::P213 => (b, a),
    };
    let yc = y + c;
    if *x == yc || x == c {
        return StepOutcome::Degenerate;
    }
    let [stay, cross] = Letter::out_of(perm);
    let letter = if *x > yc {
        stay
    } else if x < c {
        cross
    } else {
        return StepOutcome::Hole;
    };
    let next = apply_inverse(letter, l).expect("dispatch guarantees nonnegative lengths");
    StepOutcome::Step {
        next: InductionState::new(letter.target(), next),
        letter,
    }
}

/// `normalize(M_letter^{-1} λ)`, or `None` if a coordinate would go negative or
/// the vector would vanish.
pub fn apply_inverse(letter: Letter, l: &LengthVector) -> Option<LengthVector> {
    let v = l.to_array();
    let inv = inverse_i64(letter);
    let w: [Q; 3] = std::array::from_fn(|i| {
        (0..3).fold(Q::zero(), |acc, j| {
            acc + Q::from_integer(inv[i][j].into()) * &v[j]
        })
    });
    if w.iter().any(|x| x.is_negative()) {
        return None;
    }
    LengthVector::from_array(w).ok()
}

pub fn induction_step(state: &InductionState) -> StepOutcome {
    dispatch(state.perm, &state.lengths)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum RunOutcome {
    Hole(usize),
    Survived,
    Degenerate(usize),
}

#[derive(Clone, Debug)]
pub struct InductionRun {
    pub word: Word,
    pub outcome: RunOutcome,
    pub final_state: InductionState,
}

pub fn run_induction(state: &InductionState, max_steps: usize) -> InductionRun {
    let mut letters = Vec::new();
    let mut cur = state.clone();
    let mut outcome = RunOutcome::Survived;
    for k in 0..max_steps {
        match induction_step(&cur) {
            StepOutcome::Step { next, letter } => {
                letters.push(letter);
                cur = next;
            }
            StepOutcome::Hole => {
                outcome = RunOutcome::Hole(k);
                break;
            }
            StepOutcome::Degenerate => {
                outcome = RunOutcome::Degenerate(k);
                break;
            }
        }
    }
    InductionRun {
        word: Word::from_letters(letters),
        outcome,
        final_state: cur,
    }
}

/// `normalize(M_{w_1} ⋯ M_{w_n} λ')`.
pub fn reconstruct(word: &Word, final_lengths: &LengthVector) -> Result<LengthVector> {
    if !word.is_path() {
        return Err(Error::Inadmissible(word.to_string()));
    }
    // Work on the integer vector `den · λ'`; the letter matrices are 0/1.
    let l = final_lengths.to_array();
    let den = l.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut v: [BigInt; 3] = std::array::from_fn(|i| l[i].numer() * (&den / l[i].denom()));
    for &letter in word.letters().iter().rev() {
        let m = letter_i64(letter);
        v = std::array::from_fn(|i| (0..3).filter(|&j| m[i][j] == 1).map(|j| &v[j]).sum());
    }
    LengthVector::from_array(v.map(Q::from_integer))
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub step: usize,
    /// 1 for a stay step, 3 for a crossing step, 2 for the hole, 0 for a tie.
    pub case: u8,
    pub letter: Option<Letter>,
    pub lengths: LengthVector,
}

/// The induction step by step, one row per emitted letter plus a terminal row
/// when the run ends in the hole or on a tie.
pub fn induction_trace(state: &InductionState, max_steps: usize) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    let mut cur = state.clone();
    for k in 0..max_steps {
        match induction_step(&cur) {
            StepOutcome::Step { next, letter } => {
                let case = if letter.is_crossing() { 3 } else { 1 };
                rows.push(TraceRow {
                    step: k,
                    case,
                    letter: Some(letter),
                    lengths: next.lengths.clone(),
                });
                cur = next;
            }
            StepOutcome::Hole | StepOutcome::Degenerate => {
                let case = if induction_step(&cur) == StepOutcome::Hole {
                    2
                } else {
                    0
                };
                rows.push(TraceRow {
                    step: k,
                    case,
                    letter: None,
                    lengths: cur.lengths.clone(),
                });
                break;
            }
        }
    }
    rows
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("step,case,letter,a,b,c\n");
    for r in rows {
        let letter = r
            .letter
            .map(|l| l.to_char().to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.step,
            r.case,
            letter,
            fmt_q(r.lengths.a()),
            fmt_q(r.lengths.b()),
            fmt_q(r.lengths.c())
        ));
    }
    out
}

fn check_gauss_domain(alpha: &Q, beta: &Q) -> Result<()> {
    if alpha.is_zero() {
        return Err(Error::Domain("alpha = 0".into()));
    }
    if !alpha.is_positive() || *alpha >= Q::one() || !beta.is_positive() || beta >= alpha {
        return Err(Error::Domain(format!(
            "need 0 < beta < alpha < 1, got ({}, {})",
            fmt_q(alpha),
            fmt_q(beta)
        )));
    }
    Ok(())
}

/// `(β/α, (β-1)/α + ⌊1/α⌋)`.
pub fn gauss_step(alpha: &Q, beta: &Q) -> Result<(Q, Q)> {
    check_gauss_domain(alpha, beta)?;
    let n = (Q::one() / alpha).floor();
    Ok((beta / alpha, (beta - Q::one()) / alpha + n))
}

/// The Gauss map computed by running the induction itself: stay steps while
/// `a ≥ b + c`, then one crossing step, then back to `(α, β)` coordinates.
/// Equalities are allowed here because the acceleration is a fixed matrix
/// composite; the count of stay steps is whatever the loop produces.
pub fn gauss_via_induction(alpha: &Q, beta: &Q) -> Result<(Q, Q)> {
    check_gauss_domain(alpha, beta)?;
    let mut a = Q::one() - alpha;
    let b = alpha - beta;
    let mut c = beta.clone();
    let mut steps = 0usize;
    while a >= &b + &c {
        a -= &b + &c;
        steps += 1;
    }
    debug_assert_eq!(
        Q::from_integer(steps.into()),
        (Q::one() / alpha).floor() - Q::one()
    );
    if a > c {
        return Err(Error::NotApplicable(format!(
            "after {steps} stay steps a = {} exceeds c = {}",
            fmt_q(&a),
            fmt_q(&c)
        )));
    }
    c -= &a;
    let support = &a + &b + &c;
    Ok(((&a + &c) / &support, c / support))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn lv(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> LengthVector {
        LengthVector::new(q(a.0, a.1), q(b.0, b.1), q(c.0, c.1)).unwrap()
    }

    #[test]
    fn step_examples() {
        let s = InductionState::new(Perm::P123, lv((3, 5), (3, 10), (1, 10)));
        match induction_step(&s) {
            StepOutcome::Step { next, letter } => {
                assert_eq!(letter, Letter::A);
                assert_eq!(next.perm, Perm::P123);
                assert_eq!(next.lengths, lv((1, 3), (1, 2), (1, 6)));
            }
            o => panic!("{o:?}"),
        }
        let s = InductionState::new(Perm::P123, lv((1, 10), (3, 10), (3, 5)));
        match induction_step(&s) {
            StepOutcome::Step { next, letter } => {
                assert_eq!(letter, Letter::CA);
                assert_eq!(next.perm, Perm::P213);
                assert_eq!(next.lengths, lv((1, 9), (1, 3), (5, 9)));
            }
            o => panic!("{o:?}"),
        }
        let hole = InductionState::new(Perm::P123, lv((3, 10), (5, 10), (2, 10)));
        assert_eq!(induction_step(&hole), StepOutcome::Hole);
        let tie = InductionState::new(Perm::P123, lv((1, 2), (3, 10), (1, 5)));
        assert_eq!(induction_step(&tie), StepOutcome::Degenerate);
    }

    #[test]
    fn mirrored_steps() {
        let s = InductionState::new(Perm::P213, lv((3, 10), (3, 5), (1, 10)));
        match induction_step(&s) {
            StepOutcome::Step { next, letter } => {
                assert_eq!(letter, Letter::B);
                assert_eq!(next.lengths, lv((1, 2), (1, 3), (1, 6)));
            }
            o => panic!("{o:?}"),
        }
        let s = InductionState::new(Perm::P213, lv((3, 10), (1, 10), (3, 5)));
        match induction_step(&s) {
            StepOutcome::Step { next, letter } => {
                assert_eq!(letter, Letter::CB);
                assert_eq!(next.perm, Perm::P123);
                assert_eq!(next.lengths, lv((3, 9), (1, 9), (5, 9)));
            }
            o => panic!("{o:?}"),
        }
        let hole = InductionState::new(Perm::P213, lv((5, 10), (3, 10), (2, 10)));
        assert_eq!(induction_step(&hole), StepOutcome::Hole);
    }

    #[test]
    fn matrices() {
        assert_eq!(
            matrix_of(Letter::A),
            Mat3::from_i64([[1, 1, 1], [0, 1, 0], [0, 0, 1]])
        );
        assert_eq!(
            matrix_of(Letter::CB),
            Mat3::from_i64([[1, 0, 0], [0, 1, 0], [0, 1, 1]])
        );
        for l in Letter::ALL {
            let m = matrix_of(l);
            assert!(m.det().is_one());
            assert_eq!(
                m.inverse_unimodular().unwrap(),
                Mat3::from_i64(inverse_i64(l))
            );
        }
    }

    #[test]
    fn run_examples() {
        let hole = InductionState::new(Perm::P123, lv((3, 10), (5, 10), (2, 10)));
        let r = run_induction(&hole, 10);
        assert_eq!(r.outcome, RunOutcome::Hole(0));
        assert!(r.word.is_empty());
        let s = InductionState::new(Perm::P123, lv((3, 5), (3, 10), (1, 10)));
        let r = run_induction(&s, 0);
        assert_eq!(r.outcome, RunOutcome::Survived);
        assert_eq!(r.final_state, s);
        let r = run_induction(&s, 1);
        assert_eq!(r.word.to_string(), "A");
    }

    #[test]
    fn reconstruct_examples() {
        let w: Word = "A".parse().unwrap();
        assert_eq!(
            reconstruct(&w, &lv((1, 3), (1, 2), (1, 6))).unwrap(),
            lv((3, 5), (3, 10), (1, 10))
        );
        let w: Word = "a".parse().unwrap();
        assert_eq!(
            reconstruct(&w, &lv((1, 9), (1, 3), (5, 9))).unwrap(),
            lv((1, 10), (3, 10), (3, 5))
        );
        let id = lv((1, 7), (2, 7), (4, 7));
        assert_eq!(reconstruct(&Word::default(), &id).unwrap(), id);
        let bad: Word = "AB".parse().unwrap();
        assert!(reconstruct(&bad, &id).is_err());
    }

    #[test]
    fn gauss_examples() {
        assert_eq!(gauss_step(&q(9, 10), &q(1, 2)).unwrap(), (q(5, 9), q(4, 9)));
        assert_eq!(
            gauss_step(&q(8, 10), &q(7, 10)).unwrap(),
            (q(7, 8), q(5, 8))
        );
        assert_eq!(
            gauss_via_induction(&q(9, 10), &q(1, 2)).unwrap(),
            (q(5, 9), q(4, 9))
        );
        assert_eq!(
            gauss_via_induction(&q(8, 10), &q(7, 10)).unwrap(),
            (q(7, 8), q(5, 8))
        );
        assert!(gauss_step(&q(0, 1), &q(0, 1)).is_err());
        // (1-α) - (⌊1/α⌋-1)α ≥ β: α = 3/10, β = 1/20 leaves a' = 1/10 > c.
        let e = gauss_via_induction(&q(3, 10), &q(1, 20)).unwrap_err();
        assert!(matches!(e, Error::NotApplicable(_)));
        assert!(gauss_step(&q(3, 10), &q(1, 20)).unwrap().1.is_negative());
    }

    #[test]
    fn letters_round_trip() {
        for l in Letter::ALL {
            assert_eq!(Letter::from_char(l.to_char()), Some(l));
            assert!(Letter::out_of(l.source()).contains(&l));
        }
        assert_eq!(Letter::from_char('x'), None);
    }

    #[test]
    fn trace_rows() {
        let s = InductionState::new(Perm::P123, lv((1, 10), (3, 10), (3, 5)));
        let rows = induction_trace(&s, 50);
        let csv = trace_csv(&rows);
        assert!(csv.starts_with("step,case,letter,a,b,c\n0,3,a,1/9,1/3,5/9\n"));
    }
}
