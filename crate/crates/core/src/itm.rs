//! The Bruin-Troubetzkoy family of 3-interval translation maps
//!
//! ```text
//! T(x) = x + α      on [0, 1-α)
//!        x + β      on [1-α, 1-β)
//!        x + β - 1  on [1-β, 1)
//! ```
//!
//! with the length coordinates `a = 1-α`, `b = α-β`, `c = β`. All arithmetic
//! is exact: stabilization of the attractor iterates is an equality test.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_rational, q, Q};
use crate::renorm::{run_induction, InductionState, Perm, RunOutcome};

/// A point of the standard 2-simplex: interval lengths summing to one.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LengthVector {
    a: Q,
    b: Q,
    c: Q,
}

impl LengthVector {
    pub fn new(a: Q, b: Q, c: Q) -> Result<Self> {
        if a.is_negative() || b.is_negative() || c.is_negative() {
            return Err(Error::InvalidParams("negative length".into()));
        }
        if &a + &b + &c != Q::one() {
            return Err(Error::InvalidParams("lengths do not sum to 1".into()));
        }
        Ok(Self { a, b, c })
    }

    /// Scales a nonnegative triple with positive sum onto the simplex.
    pub fn normalized(a: Q, b: Q, c: Q) -> Result<Self> {
        if a.is_negative() || b.is_negative() || c.is_negative() {
            return Err(Error::InvalidParams("negative length".into()));
        }
        let s = &a + &b + &c;
        if s.is_zero() {
            return Err(Error::InvalidParams("zero vector".into()));
        }
        Ok(Self {
            a: a / &s,
            b: b / &s,
            c: c / s,
        })
    }

    pub fn from_array(v: [Q; 3]) -> Result<Self> {
        let [a, b, c] = v;
        Self::normalized(a, b, c)
    }

    /// Random positive lengths `(i, j, k)/d` with `d ≤ max_den`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_den: i64) -> Self {
        let d = rng.random_range(3..=max_den.max(3));
        let a = rng.random_range(1..=d - 2);
        let b = rng.random_range(1..=d - 1 - a);
        LengthVector {
            a: q(a, d),
            b: q(b, d),
            c: q(d - a - b, d),
        }
    }

    pub fn a(&self) -> &Q {
        &self.a
    }
    pub fn b(&self) -> &Q {
        &self.b
    }
    pub fn c(&self) -> &Q {
        &self.c
    }

    pub fn to_array(&self) -> [Q; 3] {
        [self.a.clone(), self.b.clone(), self.c.clone()]
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.to_array().map(|x| crate::rational::to_f64(&x))
    }
}

impl fmt::Display for LengthVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            fmt_q(&self.a),
            fmt_q(&self.b),
            fmt_q(&self.c)
        )
    }
}

impl Serialize for LengthVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [fmt_q(&self.a), fmt_q(&self.b), fmt_q(&self.c)].serialize(s)
    }
}

/// Parameters `(α, β)` in the region `0 ≤ β ≤ α`, `0 < α < 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BtParams {
    alpha: Q,
    beta: Q,
}

impl BtParams {
    pub fn new(alpha: Q, beta: Q) -> Result<Self> {
        if !alpha.is_positive() || alpha >= Q::one() {
            return Err(Error::InvalidParams(format!(
                "alpha = {} not in (0,1)",
                fmt_q(&alpha)
            )));
        }
        if beta.is_negative() || beta > alpha {
            return Err(Error::InvalidParams(format!(
                "beta = {} not in [0, alpha]",
                fmt_q(&beta)
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_lengths(l: &LengthVector) -> Result<Self> {
        Self::new(l.b() + l.c(), l.c().clone())
    }

    pub fn alpha(&self) -> &Q {
        &self.alpha
    }
    pub fn beta(&self) -> &Q {
        &self.beta
    }

    pub fn lengths(&self) -> LengthVector {
        LengthVector {
            a: Q::one() - &self.alpha,
            b: &self.alpha - &self.beta,
            c: self.beta.clone(),
        }
    }

    /// The two discontinuities `1-α ≤ 1-β`.
    fn cuts(&self) -> (Q, Q) {
        (Q::one() - &self.alpha, Q::one() - &self.beta)
    }
}

pub fn bt_apply(params: &BtParams, x: &Q) -> Result<Q> {
    if x.is_negative() || *x >= Q::one() {
        return Err(Error::Domain(format!("x = {} not in [0,1)", fmt_q(x))));
    }
    let (c1, c2) = params.cuts();
    Ok(if *x < c1 {
        x + &params.alpha
    } else if *x < c2 {
        x + &params.beta
    } else {
        x + &params.beta - Q::one()
    })
}

/// A finite union of half-open intervals `[lo, hi)` inside `[0, 1]`, kept
/// sorted with touching pieces merged.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct IntervalSet {
    intervals: Vec<(Q, Q)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self {
            intervals: vec![(Q::zero(), Q::one())],
        }
    }

    /// Builds a normalized set from arbitrary pieces; empty pieces vanish and
    /// overlapping or touching ones merge.
    pub fn from_pieces(mut pieces: Vec<(Q, Q)>) -> Result<Self> {
        for (lo, hi) in &pieces {
            if lo.is_negative() || *hi > Q::one() {
                return Err(Error::Domain("interval outside [0,1]".into()));
            }
        }
        pieces.retain(|(lo, hi)| lo < hi);
        pieces.sort_by(|x, y| x.0.cmp(&y.0));
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        Ok(Self { intervals: out })
    }

    pub fn intervals(&self) -> &[(Q, Q)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Q {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.intervals.iter().any(|(lo, hi)| lo <= x && x < hi)
    }

    /// Every piece of `self` lies inside a single piece of `other`, which is
    /// exactly set inclusion for normalized sets.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals
            .iter()
            .all(|(lo, hi)| other.intervals.iter().any(|(l2, h2)| l2 <= lo && hi <= h2))
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[String; 2]> = self
            .intervals
            .iter()
            .map(|(lo, hi)| [fmt_q(lo), fmt_q(hi)])
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<[String; 2]> = Vec::deserialize(d)?;
        let mut pieces = Vec::with_capacity(raw.len());
        for [lo, hi] in raw {
            let lo = parse_rational(&lo).map_err(serde::de::Error::custom)?;
            let hi = parse_rational(&hi).map_err(serde::de::Error::custom)?;
            pieces.push((lo, hi));
        }
        IntervalSet::from_pieces(pieces).map_err(serde::de::Error::custom)
    }
}

/// `T(S)`: split at the discontinuities, translate each piece, merge.
pub fn image_of_set(params: &BtParams, s: &IntervalSet) -> IntervalSet {
    let (c1, c2) = params.cuts();
    let branches = [
        (Q::zero(), c1.clone(), params.alpha.clone()),
        (c1, c2.clone(), params.beta.clone()),
        (c2, Q::one(), &params.beta - Q::one()),
    ];
    let mut pieces = Vec::new();
    for (lo, hi) in &s.intervals {
        for (bl, bh, shift) in &branches {
            let l = lo.max(bl);
            let h = hi.min(bh);
            if l < h {
                pieces.push((l + shift, h + shift));
            }
        }
    }
    IntervalSet::from_pieces(pieces).expect("T maps [0,1) into itself")
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum AttractorOutcome {
    /// First `k` with `X_k = X_{k+1}`.
    Stabilized(usize),
    NotStabilized,
}

#[derive(Clone, Debug)]
pub struct AttractorRun {
    /// `X_0 = [0,1), X_1, …` up to the stabilization index or `max_n`.
    pub iterates: Vec<IntervalSet>,
    pub outcome: AttractorOutcome,
}

/// Iterates `X_{n+1} = T(X_n)` from `X_0 = [0,1)`. Because `T(I) ⊆ I` the
/// chain is nested, so `X_n` is also the n-th attractor approximation.
pub fn attractor_iterates(params: &BtParams, max_n: usize) -> Result<AttractorRun> {
    if max_n == 0 {
        return Err(Error::Domain("max_n must be at least 1".into()));
    }
    let mut iterates = vec![IntervalSet::unit()];
    for k in 0..max_n {
        let next = image_of_set(params, &iterates[k]);
        debug_assert!(next.is_subset_of(&iterates[k]));
        if next == iterates[k] {
            return Ok(AttractorRun {
                iterates,
                outcome: AttractorOutcome::Stabilized(k),
            });
        }
        iterates.push(next);
    }
    Ok(AttractorRun {
        iterates,
        outcome: AttractorOutcome::NotStabilized,
    })
}

/// Same outcome as [`attractor_iterates`] without keeping the history.
pub fn attractor_outcome(params: &BtParams, max_n: usize) -> Result<AttractorOutcome> {
    if max_n == 0 {
        return Err(Error::Domain("max_n must be at least 1".into()));
    }
    let mut x = IntervalSet::unit();
    for k in 0..max_n {
        let next = image_of_set(params, &x);
        if next == x {
            return Ok(AttractorOutcome::Stabilized(k));
        }
        x = next;
    }
    Ok(AttractorOutcome::NotStabilized)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Classification {
    /// The induction entered the hole at this step.
    FiniteType(usize),
    InfiniteUpTo(usize),
    /// A tie in a case comparison at this step.
    Degenerate(usize),
}

pub fn classify(params: &BtParams, max_steps: usize) -> Classification {
    let state = InductionState::new(Perm::P123, params.lengths());
    match run_induction(&state, max_steps).outcome {
        RunOutcome::Hole(k) => Classification::FiniteType(k),
        RunOutcome::Degenerate(k) => Classification::Degenerate(k),
        RunOutcome::Survived => Classification::InfiniteUpTo(max_steps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn p(a: (i64, i64), b: (i64, i64)) -> BtParams {
        BtParams::new(q(a.0, a.1), q(b.0, b.1)).unwrap()
    }

    #[test]
    fn apply_branches() {
        let t = p((7, 10), (1, 5));
        assert_eq!(bt_apply(&t, &q(1, 10)).unwrap(), q(8, 10));
        assert_eq!(bt_apply(&t, &q(9, 10)).unwrap(), q(1, 10));
        assert_eq!(bt_apply(&t, &q(0, 1)).unwrap(), q(7, 10));
        assert_eq!(bt_apply(&t, &q(1, 2)).unwrap(), q(7, 10));
        assert!(bt_apply(&t, &q(1, 1)).is_err());
        assert!(bt_apply(&t, &q(-1, 3)).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(BtParams::new(q(0, 1), q(0, 1)).is_err());
        assert!(BtParams::new(q(1, 1), q(1, 2)).is_err());
        assert!(BtParams::new(q(1, 2), q(3, 4)).is_err());
        assert!(BtParams::new(q(1, 2), q(-1, 4)).is_err());
        let l = p((7, 10), (1, 5)).lengths();
        assert_eq!(l, LengthVector::new(q(3, 10), q(5, 10), q(2, 10)).unwrap());
        assert_eq!(BtParams::from_lengths(&l).unwrap(), p((7, 10), (1, 5)));
    }

    #[test]
    fn image_of_unit_interval() {
        let t = p((7, 10), (1, 5));
        let img = image_of_set(&t, &IntervalSet::unit());
        assert_eq!(
            img,
            IntervalSet::from_pieces(vec![(q(0, 1), q(2, 10)), (q(5, 10), q(1, 1))]).unwrap()
        );
        assert!(image_of_set(&t, &IntervalSet::empty()).is_empty());
        let inside = IntervalSet::from_pieces(vec![(q(1, 10), q(2, 10))]).unwrap();
        let moved = image_of_set(&t, &inside);
        assert_eq!(moved.intervals(), &[(q(8, 10), q(9, 10))]);
    }

    #[test]
    fn finite_type_stabilizes() {
        let t = p((7, 10), (1, 5));
        let run = attractor_iterates(&t, 100).unwrap();
        assert_eq!(run.outcome, AttractorOutcome::Stabilized(2));
        assert_eq!(
            run.iterates[2],
            IntervalSet::from_pieces(vec![(q(0, 1), q(2, 10)), (q(7, 10), q(1, 1))]).unwrap()
        );
        assert_eq!(attractor_outcome(&t, 100).unwrap(), run.outcome);
        assert!(attractor_iterates(&t, 0).is_err());
        assert_eq!(classify(&t, 10), Classification::FiniteType(0));
    }

    #[test]
    fn tie_is_degenerate() {
        let t = BtParams::from_lengths(&LengthVector::new(q(1, 2), q(3, 10), q(1, 5)).unwrap())
            .unwrap();
        assert_eq!(classify(&t, 10), Classification::Degenerate(0));
    }

    #[test]
    fn normalization_merges_touching_pieces() {
        let s = IntervalSet::from_pieces(vec![
            (q(1, 2), q(3, 4)),
            (q(0, 1), q(1, 4)),
            (q(1, 4), q(1, 2)),
            (q(1, 3), q(1, 3)),
        ])
        .unwrap();
        assert_eq!(s.intervals(), &[(q(0, 1), q(3, 4))]);
        assert_eq!(s.measure(), q(3, 4));
    }

    #[test]
    fn json_round_trip() {
        let s = IntervalSet::from_pieces(vec![(q(0, 1), q(1, 5)), (q(7, 10), q(1, 1))]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"[["0","1/5"],["7/10","1"]]"#);
        let back: IntervalSet = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
