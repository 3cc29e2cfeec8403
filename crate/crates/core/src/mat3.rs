//! 3×3 integer matrices: arbitrary precision for cocycle products, plus a
//! fixed-width variant for the hot enumeration loops where entries are known
//! to stay small.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

pub type BigVec3 = [BigInt; 3];
pub type QVec3 = [BigRational; 3];
pub type IMat = [[i64; 3]; 3];
pub type FMat = [[f64; 3]; 3];

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat3 {
    rows: [[BigInt; 3]; 3],
}

impl Mat3 {
    pub fn identity() -> Self {
        Self::from_i64([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn from_i64(rows: IMat) -> Self {
        Self {
            rows: rows.map(|r| r.map(BigInt::from)),
        }
    }

    pub fn from_rows(rows: [[BigInt; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[[BigInt; 3]; 3] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> BigVec3 {
        [
            self.rows[0][j].clone(),
            self.rows[1][j].clone(),
            self.rows[2][j].clone(),
        ]
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self {
            rows: std::array::from_fn(|i| std::array::from_fn(|j| r[j][i].clone())),
        }
    }

    pub fn det(&self) -> BigInt {
        let m = &self.rows;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    /// Classical adjugate, so that `self * adj = det * I`.
    pub fn adjugate(&self) -> Self {
        let m = &self.rows;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
        };
        Self {
            rows: [
                [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
                [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
                [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
            ],
        }
    }

    /// Integer inverse when the determinant is ±1.
    pub fn inverse_unimodular(&self) -> Option<Self> {
        let d = self.det();
        if d.is_one() {
            Some(self.adjugate())
        } else if (-&d).is_one() {
            Some(self.adjugate().scale(&BigInt::from(-1)))
        } else {
            None
        }
    }

    /// `column[dst] += column[src]`, i.e. right multiplication by `I + E_{src,dst}`.
    pub fn add_column(&mut self, dst: usize, src: usize) {
        for r in self.rows.iter_mut() {
            let v = r[src].clone();
            r[dst] += v;
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self {
            rows: self.rows.clone().map(|r| r.map(|x| x * k)),
        }
    }

    pub fn mul_vec(&self, v: &BigVec3) -> BigVec3 {
        std::array::from_fn(|i| {
            &self.rows[i][0] * &v[0] + &self.rows[i][1] * &v[1] + &self.rows[i][2] * &v[2]
        })
    }

    pub fn mul_qvec(&self, v: &QVec3) -> QVec3 {
        std::array::from_fn(|i| {
            (0..3).fold(BigRational::zero(), |acc, j| {
                acc + BigRational::from_integer(self.rows[i][j].clone()) * &v[j]
            })
        })
    }

    pub fn is_positive(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_positive())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.rows.iter().flatten().all(|x| !x.is_negative())
    }

    pub fn max_bits(&self) -> u64 {
        self.rows
            .iter()
            .flatten()
            .map(|x| x.bits())
            .max()
            .unwrap_or(0)
    }

    /// Entries scaled by `2^-shift` as floats, where `shift` keeps the largest
    /// entry in `[0.5, 1)`. Returns the matrix and the shift.
    pub fn to_scaled_f64(&self) -> (FMat, i64) {
        let shift = self.max_bits() as i64;
        let m = self
            .rows
            .clone()
            .map(|r| r.map(|x| scaled_to_f64(&x, shift)));
        (m, shift)
    }

    pub fn to_f64(&self) -> FMat {
        self.rows
            .clone()
            .map(|r| r.map(|x| x.to_f64().unwrap_or(f64::NAN)))
    }

    pub fn to_i64(&self) -> Option<IMat> {
        let mut out = [[0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.rows[i][j].to_i64()?;
            }
        }
        Some(out)
    }
}

impl Mul for &Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: &Mat3) -> Mat3 {
        let a = &self.rows;
        let b = &rhs.rows;
        Mat3 {
            rows: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j] + &a[i][2] * &b[2][j]
                })
            }),
        }
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        &self * &rhs
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[{},{},{}]", r[0], r[1], r[2])?;
        }
        write!(f, "]")
    }
}

impl Serialize for Mat3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

/// `x · 2^-shift` as a float without overflowing on huge `x`.
pub fn scaled_to_f64(x: &BigInt, shift: i64) -> f64 {
    let bits = x.bits() as i64;
    if bits <= 60 {
        return x.to_f64().unwrap_or(0.0) * (2f64).powi(-(shift as i32));
    }
    let drop = bits - 60;
    let top: BigInt = x >> (drop as usize);
    top.to_f64().unwrap_or(0.0) * (2f64).powf((drop - shift) as f64)
}

/// Natural log of |x| for a nonzero big integer.
pub fn ln_abs(x: &BigInt) -> f64 {
    let bits = x.bits() as i64;
    if bits <= 60 {
        return x.abs().to_f64().unwrap_or(0.0).ln();
    }
    let drop = bits - 60;
    let top: BigInt = x.abs() >> (drop as usize);
    top.to_f64().unwrap_or(0.0).ln() + drop as f64 * std::f64::consts::LN_2
}

/// Natural log of the Euclidean norm of a big integer vector.
pub fn ln_norm2(v: &BigVec3) -> f64 {
    let shift = v.iter().map(|x| x.bits()).max().unwrap_or(0) as i64;
    let s: f64 = v.iter().map(|x| scaled_to_f64(x, shift).powi(2)).sum();
    0.5 * s.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn cross(u: &BigVec3, v: &BigVec3) -> BigVec3 {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

pub fn dot(u: &BigVec3, v: &BigVec3) -> BigInt {
    &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2]
}

pub fn big_vec(v: [i64; 3]) -> BigVec3 {
    v.map(BigInt::from)
}

pub fn imul(a: &IMat, b: &IMat) -> IMat {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j])
    })
}

pub fn itranspose(a: &IMat) -> IMat {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn fmul(a: &FMat, b: &FMat) -> FMat {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j])
    })
}

pub fn ftranspose(a: &FMat) -> FMat {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn iadjugate(m: &IMat) -> IMat {
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ]
}

pub fn to_fmat(m: &IMat) -> FMat {
    m.map(|r| r.map(|x| x as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_inverts() {
        let m = Mat3::from_i64([[3, 3, 2], [1, 2, 1], [1, 1, 1]]);
        assert_eq!(m.det(), BigInt::from(1));
        let inv = m.inverse_unimodular().unwrap();
        assert_eq!(inv, Mat3::from_i64([[1, -1, -1], [0, 1, -1], [-1, 0, 3]]));
        assert_eq!(&m * &inv, Mat3::identity());
        assert_eq!(iadjugate(&m.to_i64().unwrap()), inv.to_i64().unwrap());
    }

    #[test]
    fn singular_matrix_has_no_integer_inverse() {
        let m = Mat3::from_i64([[1, 0, 0], [0, 1, 1], [1, 1, 1]]);
        assert!(m.inverse_unimodular().is_none());
    }

    #[test]
    fn scaled_conversion_handles_huge_entries() {
        let x = BigInt::from(3).pow(400u32);
        let ln = ln_abs(&x);
        assert!((ln - 400.0 * 3f64.ln()).abs() < 1e-9);
        let shift = x.bits() as i64;
        let s = scaled_to_f64(&x, shift);
        assert!((0.5..1.0).contains(&s));
    }

    #[test]
    fn cross_is_orthogonal() {
        let u = big_vec([3, 1, 1]);
        let v = big_vec([2, 1, 1]);
        let z = cross(&u, &v);
        assert!(dot(&z, &u).is_zero() && dot(&z, &v).is_zero());
    }
}
