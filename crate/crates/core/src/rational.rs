//! Exact rational scalars, vectors, and small dense matrices.
//!
//! All lattice identities (dual membership, coset equality, promise stamps)
//! go through these; floating point only enters via explicit conversion.

use crate::error::Error;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Canonical string form: `p` when the denominator is one, else `p/q`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, Error> {
        t.parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad integer {t:?}: {e}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(parse_int(p)?, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub fn norm_sq(a: &[Rat]) -> Rat {
    dot(a, a)
}

pub fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rat], c: &Rat) -> Vec<Rat> {
    a.iter().map(|x| x * c).collect()
}

pub fn to_f64_vec(a: &[Rat]) -> Vec<f64> {
    a.iter().map(rat_to_f64).collect()
}

pub fn from_f64_vec(a: &[f64]) -> Vec<Rat> {
    a.iter().copied().map(rat_from_f64).collect()
}

/// Largest integer k with k^2 <= r. Requires r >= 0.
pub fn floor_sqrt(r: &Rat) -> BigInt {
    assert!(!r.is_negative(), "floor_sqrt of negative rational");
    if r.is_zero() {
        return BigInt::zero();
    }
    // Guess from f64, then fix up with exact comparisons.
    let mut k = BigInt::from(rat_to_f64(r).sqrt().floor().max(0.0) as i64);
    if k.sign() == Sign::Minus {
        k = BigInt::zero();
    }
    let sq = |x: &BigInt| Rat::from_integer(x * x);
    while sq(&k) > *r {
        k -= 1;
    }
    loop {
        let next = &k + 1;
        if sq(&next) <= *r {
            k = next;
        } else {
            break;
        }
    }
    k
}

/// Dense square rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub n: usize,
    data: Vec<Rat>,
}

impl Mat {
    pub fn zero(n: usize) -> Self {
        Mat {
            n,
            data: vec![Rat::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Rat>]) -> Self {
        let n = cols.len();
        let mut m = Mat::zero(n);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n);
            for i in 0..n {
                m[(i, j)] = col[i].clone();
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.n).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rat>> {
        (0..self.n).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.n {
                    acc += &self[(i, j)] * &v[j];
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zero(n);
        for i in 0..n {
            for k in 0..n {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    /// Determinant by exact Gaussian elimination.
    pub fn det(&self) -> Rat {
        let n = self.n;
        let mut a = self.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Rat::zero();
            };
            if p != col {
                for j in 0..n {
                    let tmp = a[(p, j)].clone();
                    a[(p, j)] = a[(col, j)].clone();
                    a[(col, j)] = tmp;
                }
                det = -det;
            }
            det *= a[(col, col)].clone();
            let inv = a[(col, col)].recip();
            for r in (col + 1)..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = &a[(r, col)] * &inv;
                for j in col..n {
                    let sub = &factor * &a[(col, j)];
                    a[(r, j)] -= sub;
                }
            }
        }
        det
    }

    /// Exact inverse via Gauss-Jordan; `SingularBasis` when det = 0.
    pub fn inverse(&self) -> Result<Mat, Error> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Err(Error::SingularBasis);
            };
            if p != col {
                for j in 0..n {
                    let tmp = a[(p, j)].clone();
                    a[(p, j)] = a[(col, j)].clone();
                    a[(col, j)] = tmp;
                    let tmp = inv[(p, j)].clone();
                    inv[(p, j)] = inv[(col, j)].clone();
                    inv[(col, j)] = tmp;
                }
            }
            let piv_inv = a[(col, col)].recip();
            for j in 0..n {
                a[(col, j)] *= piv_inv.clone();
                inv[(col, j)] *= piv_inv.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for j in 0..n {
                    let s = &factor * &a[(col, j)];
                    a[(r, j)] -= s;
                    let s = &factor * &inv[(col, j)];
                    inv[(r, j)] -= s;
                }
            }
        }
        Ok(inv)
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|x| x.denom().is_one())
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.n + j]
    }
}

/// Floor of a rational (largest integer <= r).
pub fn floor_rat(r: &Rat) -> BigInt {
    r.numer().div_floor(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_format_round_trip() {
        for s in ["3/4", "-7/2", "5", "0", "-12"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        // Non-canonical input normalizes.
        assert_eq!(format_rat(&parse_rat("6/8").unwrap()), "3/4");
        assert_eq!(format_rat(&parse_rat("4/-2").unwrap()), "-2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let m = Mat::from_columns(&[
            vec![rat(2, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 3), rat(5, 1), rat(1, 1)],
            vec![rat(0, 1), rat(-2, 1), rat(7, 2)],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(3));
        assert_eq!(inv.mul(&m), Mat::identity(3));
    }

    #[test]
    fn singular_rejected() {
        let m = Mat::from_columns(&[vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]]);
        assert!(m.det().is_zero());
        assert!(matches!(m.inverse(), Err(Error::SingularBasis)));
    }

    #[test]
    fn floor_sqrt_exact() {
        assert_eq!(floor_sqrt(&rat(25, 1)), BigInt::from(5));
        assert_eq!(floor_sqrt(&rat(24, 1)), BigInt::from(4));
        assert_eq!(floor_sqrt(&rat(1, 2)), BigInt::from(0));
        assert_eq!(floor_sqrt(&rat(9, 4)), BigInt::from(1));
    }
}
