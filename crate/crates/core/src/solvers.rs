//! Brute-force ground-truth solvers: exact SVP, CVP, and a BDD oracle with
//! configurable adversarial behavior outside the promise.
//!
//! Enumeration runs over an LLL-reduced copy of the input basis for speed;
//! results are mapped back to coordinates in the original basis, and ties are
//! broken lexicographically on those original coordinates.

use crate::enumerate::ExactEnum;
use crate::error::Error;
use crate::lattice::{Basis, LatticeVector, Target};
use crate::lll::lll_reduce;
use crate::rational::{self, Mat, Rat};
use num_bigint::BigInt;
use num_traits::Zero;

/// Explicit enumeration limits; exceeding them is an error, never a silent
/// fallback.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationCaps {
    pub max_dim: usize,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps { max_dim: 12 }
    }
}

impl EnumerationCaps {
    pub fn check(&self, n: usize) -> Result<(), Error> {
        if n > self.max_dim {
            Err(Error::DimensionCap {
                n,
                cap: self.max_dim,
            })
        } else {
            Ok(())
        }
    }
}

/// Shortest nonzero vector with exact squared length.
#[derive(Clone, Debug)]
pub struct ShortestVector {
    pub lambda1_sq: Rat,
    pub witness: LatticeVector,
}

impl ShortestVector {
    pub fn lambda1(&self) -> f64 {
        rational::rat_to_f64(&self.lambda1_sq).sqrt()
    }
}

/// Closest lattice vector with exact squared distance.
#[derive(Clone, Debug)]
pub struct ClosestVector {
    pub dist_sq: Rat,
    pub closest: LatticeVector,
}

impl ClosestVector {
    pub fn dist(&self) -> f64 {
        rational::rat_to_f64(&self.dist_sq).sqrt()
    }
}

/// Reduced copy of a basis plus the change of coordinates back to the input.
struct ReducedView {
    reduced: Basis,
    /// z_original = u * z_reduced.
    u: Mat,
}

fn reduced_view(basis: &Basis) -> ReducedView {
    let reduced = lll_reduce(basis);
    let u = Mat::from_columns(basis.columns())
        .inverse()
        .expect("basis invariant")
        .mul(&Mat::from_columns(reduced.columns()));
    debug_assert!(u.is_integer());
    ReducedView { reduced, u }
}

impl ReducedView {
    fn original_coords(&self, z_red: &[BigInt]) -> Vec<BigInt> {
        let zr: Vec<Rat> = z_red.iter().map(|c| Rat::from_integer(c.clone())).collect();
        self.u
            .mul_vec(&zr)
            .into_iter()
            .map(|c| {
                debug_assert!(c.denom() == &BigInt::from(1));
                c.numer().clone()
            })
            .collect()
    }
}

/// Exact shortest nonzero vector by coefficient enumeration inside a
/// provably sufficient Gram-Schmidt box. `bound_hint` optionally tightens the
/// initial search radius (it must still be >= lambda_1 to be useful; the
/// shortest basis column is used as the fallback bound).
pub fn svp_exact(
    basis: &Basis,
    bound_hint: Option<&Rat>,
    caps: EnumerationCaps,
) -> Result<ShortestVector, Error> {
    caps.check(basis.n())?;
    let view = reduced_view(basis);
    let fallback_sq = view.reduced.min_col_norm_sq();
    let mut radius_sq = fallback_sq.clone();
    if let Some(hint) = bound_hint {
        let hint_sq = hint * hint;
        if hint_sq < radius_sq {
            radius_sq = hint_sq;
        }
    }
    let gs = view.reduced.gram_schmidt();
    let zero = vec![Rat::zero(); basis.n()];
    let en = ExactEnum::new(&gs, &zero);
    // A hint below lambda_1 finds nothing; fall back to the provably
    // sufficient column bound.
    let (z_red, d) = match en.closest(&radius_sq, true) {
        Some(found) => found,
        None => en
            .closest(&fallback_sq, true)
            .expect("radius covers a basis column"),
    };
    let coords = view.original_coords(&z_red);
    // Re-break ties lexicographically in original coordinates: +-v have equal
    // length; prefer the lex-smaller representative.
    let neg: Vec<BigInt> = coords.iter().map(|c| -c).collect();
    let coords = if lex_less(&neg, &coords) { neg } else { coords };
    Ok(ShortestVector {
        lambda1_sq: d,
        witness: basis.lattice_vector(coords),
    })
}

fn lex_less(a: &[BigInt], b: &[BigInt]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Exact closest vector via branch-and-bound around the Babai point.
pub fn cvp_exact(basis: &Basis, t: &Target, caps: EnumerationCaps) -> Result<ClosestVector, Error> {
    caps.check(basis.n())?;
    if t.dim() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: basis.n(),
            got: t.dim(),
        });
    }
    let view = reduced_view(basis);
    let gs = view.reduced.gram_schmidt();
    // Initial radius: distance of the Babai rounding in the reduced basis.
    let x = view.reduced.coords_of(&t.coords);
    let rounded: Vec<BigInt> = x
        .iter()
        .map(|c| rational::floor_rat(&(c + rational::rat(1, 2))))
        .collect();
    let babai = view.reduced.embed(&rounded);
    let radius_sq = rational::norm_sq(&rational::sub(&babai, &t.coords));
    let en = ExactEnum::new(&gs, &t.coords);
    let (z_red, d) = en
        .closest(&radius_sq, false)
        .expect("radius covers the Babai point");
    Ok(ClosestVector {
        dist_sq: d,
        closest: basis.lattice_vector(view.original_coords(&z_red)),
    })
}

/// What the BDD oracle does when the promise dist(t, L) <= alpha * lambda_1
/// does not hold. The contract only constrains it inside the promise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BddMode {
    /// Return the true closest vector anyway.
    ClosestAnyway,
    /// Return a wrong lattice vector (closest plus the SVP witness).
    Garbage,
    /// Return nothing.
    Abstain,
}

/// One BDD oracle answer with the promise flag surfaced for diagnostics.
#[derive(Clone, Debug)]
pub struct BddAnswer {
    pub vector: Option<LatticeVector>,
    pub promise_held: bool,
}

/// Exact alpha-BDD oracle. Inside the promise it returns the closest vector
/// (unique when alpha < 1/2); outside it follows `mode`.
pub struct BddOracleExact {
    basis: Basis,
    alpha_sq: Rat,
    mode: BddMode,
    caps: EnumerationCaps,
    lambda1_sq: Rat,
    shortest: LatticeVector,
}

impl BddOracleExact {
    pub fn new(basis: &Basis, alpha: &Rat, mode: BddMode, caps: EnumerationCaps) -> Result<Self, Error> {
        let sv = svp_exact(basis, None, caps)?;
        Ok(BddOracleExact {
            basis: basis.clone(),
            alpha_sq: alpha * alpha,
            mode,
            caps,
            lambda1_sq: sv.lambda1_sq,
            shortest: sv.witness,
        })
    }

    pub fn decode(&self, t: &Target) -> Result<BddAnswer, Error> {
        let cv = cvp_exact(&self.basis, t, self.caps)?;
        let promise_held = cv.dist_sq <= &self.alpha_sq * &self.lambda1_sq;
        if promise_held {
            return Ok(BddAnswer {
                vector: Some(cv.closest),
                promise_held,
            });
        }
        let vector = match self.mode {
            BddMode::ClosestAnyway => Some(cv.closest),
            BddMode::Garbage => {
                let coords: Vec<BigInt> = cv
                    .closest
                    .coords
                    .iter()
                    .zip(&self.shortest.coords)
                    .map(|(a, b)| a + b)
                    .collect();
                Some(self.basis.lattice_vector(coords))
            }
            BddMode::Abstain => None,
        };
        Ok(BddAnswer {
            vector,
            promise_held,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::brute_force_box_scan;
    use crate::rational::{rat, rat_int};

    #[test]
    fn svp_z2() {
        let b = Basis::integer_lattice(2);
        let sv = svp_exact(&b, None, EnumerationCaps::default()).unwrap();
        assert_eq!(sv.lambda1_sq, rat_int(1));
    }

    #[test]
    fn svp_diagonal() {
        let b = Basis::diagonal(&[rat_int(3), rat_int(5)]).unwrap();
        let sv = svp_exact(&b, None, EnumerationCaps::default()).unwrap();
        assert_eq!(sv.lambda1_sq, rat_int(9));
        let coords: Vec<i64> = sv.witness.coords.iter().map(|c| c.try_into().unwrap()).collect();
        assert!(coords == vec![1, 0] || coords == vec![-1, 0]);
    }

    #[test]
    fn svp_cap_enforced() {
        let b = Basis::integer_lattice(3);
        let caps = EnumerationCaps { max_dim: 2 };
        assert!(matches!(
            svp_exact(&b, None, caps),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn cvp_examples() {
        let b = Basis::integer_lattice(2);
        let t = Target::new(vec![rat(2, 5), rat(2, 5)]);
        let cv = cvp_exact(&b, &t, EnumerationCaps::default()).unwrap();
        assert_eq!(cv.dist_sq, rat(8, 25)); // 0.32 = dist^2 to the origin
        assert!(cv.closest.is_zero());

        // Targets on the lattice have distance zero.
        let t = Target::new(vec![rat_int(3), rat_int(-2)]);
        let cv = cvp_exact(&b, &t, EnumerationCaps::default()).unwrap();
        assert!(cv.dist_sq.is_zero());
    }

    #[test]
    fn cvp_matches_independent_box_scan() {
        // Random-ish 3-dim instances against the no-pruning oracle.
        let b = Basis::new(vec![
            vec![rat(2, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(-3, 1), rat(1, 2)],
            vec![rat(0, 1), rat(1, 1), rat(2, 1)],
        ])
        .unwrap();
        for t in [
            Target::new(vec![rat(1, 3), rat(5, 7), rat(-2, 5)]),
            Target::new(vec![rat(9, 4), rat(-1, 2), rat(3, 2)]),
        ] {
            let cv = cvp_exact(&b, &t, EnumerationCaps::default()).unwrap();
            let r2 = &cv.dist_sq + rat_int(1);
            let (_, d) = brute_force_box_scan(&b, &t.coords, &r2, false).unwrap();
            assert_eq!(cv.dist_sq, d);
        }
    }

    #[test]
    fn bdd_inside_promise_returns_closest() {
        let b = Basis::integer_lattice(2);
        let oracle =
            BddOracleExact::new(&b, &rat(3, 10), BddMode::Garbage, EnumerationCaps::default())
                .unwrap();
        let ans = oracle
            .decode(&Target::new(vec![rat(1, 10), rat_int(0)]))
            .unwrap();
        assert!(ans.promise_held);
        assert!(ans.vector.unwrap().is_zero());
    }

    #[test]
    fn bdd_modes_outside_promise() {
        let b = Basis::integer_lattice(2);
        let t = Target::new(vec![rat(1, 2), rat(1, 2)]); // dist ~ 0.707 > 0.3
        for (mode, expect_some) in [
            (BddMode::ClosestAnyway, true),
            (BddMode::Garbage, true),
            (BddMode::Abstain, false),
        ] {
            let oracle =
                BddOracleExact::new(&b, &rat(3, 10), mode, EnumerationCaps::default()).unwrap();
            let ans = oracle.decode(&t).unwrap();
            assert!(!ans.promise_held);
            assert_eq!(ans.vector.is_some(), expect_some);
            if mode == BddMode::Garbage {
                // Garbage is still a lattice vector, just not the closest.
                let v = ans.vector.unwrap();
                assert!(b.lattice_coords(&v.embedding).is_some());
            }
        }
    }
}
