//! Exact lattice arithmetic: bases, lattice vectors, targets, duals, and
//! reduction modulo the fundamental parallelepiped.
//!
//! A `Basis` is the single source of truth for a lattice. Ambient dimension
//! equals rank throughout.

use crate::error::Error;
use crate::rational::{self, rat_to_f64, Mat, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::sync::Arc;

/// Exact-rational n x n full-rank basis; columns generate the lattice.
#[derive(Clone, Debug)]
pub struct Basis {
    cols: Vec<Vec<Rat>>,
    inv: Arc<Mat>,
    det: Rat,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.cols == other.cols
    }
}

impl Basis {
    /// Builds a basis, rejecting non-square or singular input.
    pub fn new(cols: Vec<Vec<Rat>>) -> Result<Self, Error> {
        let n = cols.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty basis".into()));
        }
        for c in &cols {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
        }
        let m = Mat::from_columns(&cols);
        let det = m.det();
        if det.is_zero() {
            return Err(Error::SingularBasis);
        }
        let inv = m.inverse()?;
        Ok(Basis {
            cols,
            inv: Arc::new(inv),
            det,
        })
    }

    pub fn from_i64(cols: &[&[i64]]) -> Result<Self, Error> {
        Basis::new(
            cols.iter()
                .map(|c| c.iter().map(|&x| rational::rat_int(x)).collect())
                .collect(),
        )
    }

    /// Identity basis of Z^n.
    pub fn integer_lattice(n: usize) -> Self {
        let cols = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| if i == j { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        Basis::new(cols).expect("identity is nonsingular")
    }

    pub fn diagonal(entries: &[Rat]) -> Result<Self, Error> {
        let n = entries.len();
        let cols = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| if i == j { entries[j].clone() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        Basis::new(cols)
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[Rat] {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[Vec<Rat>] {
        &self.cols
    }

    pub fn det(&self) -> &Rat {
        &self.det
    }

    /// B z for integer coordinates z.
    pub fn embed(&self, coords: &[BigInt]) -> Vec<Rat> {
        assert_eq!(coords.len(), self.n());
        let mut out = vec![Rat::zero(); self.n()];
        for (j, z) in coords.iter().enumerate() {
            if z.is_zero() {
                continue;
            }
            let zr = Rat::from_integer(z.clone());
            for i in 0..self.n() {
                out[i] += &self.cols[j][i] * &zr;
            }
        }
        out
    }

    /// B x for rational x.
    pub fn embed_rat(&self, x: &[Rat]) -> Vec<Rat> {
        assert_eq!(x.len(), self.n());
        let mut out = vec![Rat::zero(); self.n()];
        for (j, c) in x.iter().enumerate() {
            for i in 0..self.n() {
                out[i] += &self.cols[j][i] * c;
            }
        }
        out
    }

    /// B^{-1} v: exact coordinates of an ambient point.
    pub fn coords_of(&self, v: &[Rat]) -> Vec<Rat> {
        self.inv.mul_vec(v)
    }

    /// Integer coordinates of a lattice point; None if v is not in L.
    pub fn lattice_coords(&self, v: &[Rat]) -> Option<Vec<BigInt>> {
        let x = self.coords_of(v);
        let mut out = Vec::with_capacity(x.len());
        for c in x {
            if c.denom().is_one() {
                out.push(c.numer().clone());
            } else {
                return None;
            }
        }
        Some(out)
    }

    pub fn lattice_vector(&self, coords: Vec<BigInt>) -> LatticeVector {
        let embedding = self.embed(&coords);
        LatticeVector { coords, embedding }
    }

    /// Dual basis D = (B^{-1})^T, so D^T B = I exactly.
    pub fn dual(&self) -> Basis {
        let d = self.inv.transpose();
        Basis::new(d.columns()).expect("dual of nonsingular is nonsingular")
    }

    pub fn scale(&self, c: &Rat) -> Result<Basis, Error> {
        if c.is_zero() {
            return Err(Error::InvalidParameter("zero scale".into()));
        }
        Basis::new(
            self.cols
                .iter()
                .map(|col| col.iter().map(|x| x * c).collect())
                .collect(),
        )
    }

    /// Exact Gram-Schmidt data of the basis columns.
    pub fn gram_schmidt(&self) -> GramSchmidt {
        let n = self.n();
        let mut b_star: Vec<Vec<Rat>> = Vec::with_capacity(n);
        let mut mu = vec![vec![Rat::zero(); n]; n];
        let mut norms = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = self.cols[j].clone();
            for i in 0..j {
                let m = rational::dot(&self.cols[j], &b_star[i]) / &norms[i];
                let shift = rational::scale(&b_star[i], &m);
                v = rational::sub(&v, &shift);
                mu[j][i] = m;
            }
            let norm = rational::norm_sq(&v);
            b_star.push(v);
            norms.push(norm);
        }
        GramSchmidt {
            b_star,
            mu,
            norms_sq: norms,
        }
    }

    pub fn to_float(&self) -> FloatLattice {
        FloatLattice::from_basis(self)
    }

    /// Min squared column norm; an upper bound for lambda_1^2.
    pub fn min_col_norm_sq(&self) -> Rat {
        self.cols
            .iter()
            .map(|c| rational::norm_sq(c))
            .min()
            .expect("n >= 1")
    }
}

/// Exact Gram-Schmidt orthogonalization: b_j = b*_j + sum_{i<j} mu_{ji} b*_i.
#[derive(Clone, Debug)]
pub struct GramSchmidt {
    pub b_star: Vec<Vec<Rat>>,
    /// mu[j][i] for i < j.
    pub mu: Vec<Vec<Rat>>,
    pub norms_sq: Vec<Rat>,
}

impl GramSchmidt {
    /// max_i ||b*_i||^2.
    pub fn max_norm_sq(&self) -> &Rat {
        self.norms_sq.iter().max().expect("n >= 1")
    }
}

/// Integer coordinate vector paired with its exact embedding B z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeVector {
    pub coords: Vec<BigInt>,
    pub embedding: Vec<Rat>,
}

impl LatticeVector {
    pub fn zero(n: usize) -> Self {
        LatticeVector {
            coords: vec![BigInt::zero(); n],
            embedding: vec![Rat::zero(); n],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|z| z.is_zero())
    }

    pub fn norm_sq(&self) -> Rat {
        rational::norm_sq(&self.embedding)
    }

    pub fn embedding_f64(&self) -> Vec<f64> {
        rational::to_f64_vec(&self.embedding)
    }
}

/// Exact rational target point in ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub coords: Vec<Rat>,
}

impl Target {
    pub fn new(coords: Vec<Rat>) -> Self {
        Target { coords }
    }

    pub fn from_f64(coords: &[f64]) -> Self {
        Target {
            coords: rational::from_f64_vec(coords),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        rational::to_f64_vec(&self.coords)
    }
}

/// True iff B^T w is an all-integer vector (exact arithmetic), i.e. w lies in
/// the dual lattice.
pub fn is_dual_member(basis: &Basis, w: &[Rat]) -> bool {
    if w.len() != basis.n() {
        return false;
    }
    basis
        .columns()
        .iter()
        .all(|col| rational::dot(col, w).denom().is_one())
}

/// The unique t' in P(B) with t - t' in L: t' = B(x - floor(x)) for t = B x.
pub fn reduce_mod_parallelepiped(basis: &Basis, t: &Target) -> Target {
    assert_eq!(t.dim(), basis.n());
    let x = basis.coords_of(&t.coords);
    let frac: Vec<Rat> = x
        .iter()
        .map(|c| c - Rat::from_integer(rational::floor_rat(c)))
        .collect();
    Target::new(basis.embed_rat(&frac))
}

/// The lattice vector t - (t mod P(B)); together with the reduction this
/// splits t into lattice part plus parallelepiped part.
pub fn lattice_part(basis: &Basis, t: &Target) -> LatticeVector {
    let x = basis.coords_of(&t.coords);
    let coords: Vec<BigInt> = x.iter().map(rational::floor_rat).collect();
    basis.lattice_vector(coords)
}

/// Exact unimodular-equivalence check: A and B generate the same lattice iff
/// A^{-1} B is integer with determinant +-1.
pub fn same_lattice(a: &Basis, b: &Basis) -> bool {
    if a.n() != b.n() {
        return false;
    }
    let m = Mat::from_columns(b.columns());
    let ainv = Mat::from_columns(a.columns())
        .inverse()
        .expect("basis invariant");
    let u = ainv.mul(&m);
    if !u.is_integer() {
        return false;
    }
    let d = u.det();
    d == Rat::one() || d == -Rat::one()
}

/// f64 view of a basis with float Gram-Schmidt data, for Gaussian sums and
/// Monte Carlo. Exactness-critical identities must not go through this.
#[derive(Clone, Debug)]
pub struct FloatLattice {
    pub n: usize,
    pub cols: Vec<Vec<f64>>,
    pub b_star: Vec<Vec<f64>>,
    /// mu[j][i] for i < j.
    pub mu: Vec<Vec<f64>>,
    pub norms_sq: Vec<f64>,
    pub inv: Vec<Vec<f64>>,
    pub det_abs: f64,
}

impl FloatLattice {
    pub fn from_basis(basis: &Basis) -> Self {
        let n = basis.n();
        let cols: Vec<Vec<f64>> = basis
            .columns()
            .iter()
            .map(|c| rational::to_f64_vec(c))
            .collect();
        let gs = basis.gram_schmidt();
        let b_star = gs.b_star.iter().map(|v| rational::to_f64_vec(v)).collect();
        let mu = gs.mu.iter().map(|v| rational::to_f64_vec(v)).collect();
        let norms_sq = gs.norms_sq.iter().map(rat_to_f64).collect();
        let inv: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| rat_to_f64(&basis.inv[(i, j)])).collect())
            .collect();
        FloatLattice {
            n,
            cols,
            b_star,
            mu,
            norms_sq,
            inv,
            det_abs: rat_to_f64(basis.det()).abs(),
        }
    }

    pub fn embed(&self, coords: &[i64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (j, &z) in coords.iter().enumerate() {
            if z == 0 {
                continue;
            }
            let zf = z as f64;
            for i in 0..self.n {
                out[i] += self.cols[j][i] * zf;
            }
        }
        out
    }

    /// Max Gram-Schmidt norm ||B~|| (used by Klein's sampler and the
    /// basis-improvement loop).
    pub fn max_gs_norm(&self) -> f64 {
        self.norms_sq
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn dual_identity_is_self_dual() {
        let b = Basis::integer_lattice(3);
        let d = b.dual();
        assert_eq!(d.columns(), b.columns());
    }

    #[test]
    fn dual_diagonal_inverts() {
        let b = Basis::diagonal(&[rat(2, 1), rat(3, 1)]).unwrap();
        let d = b.dual();
        assert_eq!(d.column(0), &[rat(1, 2), rat(0, 1)]);
        assert_eq!(d.column(1), &[rat(0, 1), rat(1, 3)]);
    }

    #[test]
    fn dual_transpose_product_is_identity() {
        // Random-ish rational 3x3 basis: D^T B = I exactly.
        let b = Basis::new(vec![
            vec![rat(2, 1), rat(1, 3), rat(0, 1)],
            vec![rat(-1, 2), rat(5, 1), rat(1, 1)],
            vec![rat(0, 1), rat(7, 4), rat(3, 1)],
        ])
        .unwrap();
        let d = b.dual();
        let prod = Mat::from_columns(d.columns())
            .transpose()
            .mul(&Mat::from_columns(b.columns()));
        assert_eq!(prod, Mat::identity(3));
    }

    #[test]
    fn dual_membership_examples() {
        let b = Basis::integer_lattice(2);
        assert!(is_dual_member(&b, &[rat(1, 1), rat(-2, 1)]));
        let b = Basis::diagonal(&[rat(2, 1), rat(1, 1)]).unwrap();
        assert!(is_dual_member(&b, &[rat(1, 2), rat(0, 1)]));
        assert!(!is_dual_member(&b, &[rat(1, 3), rat(0, 1)]));
    }

    #[test]
    fn mod_parallelepiped_examples() {
        let b = Basis::integer_lattice(2);
        let t = Target::new(vec![rat(5, 2), rat(-1, 4)]);
        let r = reduce_mod_parallelepiped(&b, &t);
        assert_eq!(r.coords, vec![rat(1, 2), rat(3, 4)]);
        // Idempotence.
        let r2 = reduce_mod_parallelepiped(&b, &r);
        assert_eq!(r2.coords, r.coords);
        // Difference is a lattice vector (exact coords).
        let diff: Vec<Rat> = t
            .coords
            .iter()
            .zip(&r.coords)
            .map(|(a, b)| a - b)
            .collect();
        assert!(b.lattice_coords(&diff).is_some());
    }

    #[test]
    fn singular_basis_rejected() {
        let err = Basis::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(matches!(err, Err(Error::SingularBasis)));
    }

    #[test]
    fn same_lattice_under_unimodular_change() {
        let b = Basis::from_i64(&[&[2, 0], &[0, 3]]).unwrap();
        // Add first column to second: unimodular.
        let c = Basis::from_i64(&[&[2, 0], &[2, 3]]).unwrap();
        assert!(same_lattice(&b, &c));
        let d = Basis::from_i64(&[&[4, 0], &[0, 3]]).unwrap();
        assert!(!same_lattice(&b, &d));
    }
}
