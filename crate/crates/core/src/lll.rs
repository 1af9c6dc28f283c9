//! Textbook LLL basis reduction with delta = 3/4, in exact rational
//! arithmetic. Output generates the same lattice (unimodular change of
//! basis), is size-reduced, and satisfies the Lovasz condition.

use crate::lattice::{Basis, GramSchmidt};
use crate::rational::{self, floor_rat, Rat};
use num_traits::{Signed, Zero};

const DELTA_NUM: i64 = 3;
const DELTA_DEN: i64 = 4;

struct LllState {
    cols: Vec<Vec<Rat>>,
    gs: GramSchmidt,
}

impl LllState {
    fn recompute(&mut self) {
        // Deliberately recomputed from scratch after each swap; desk-scale
        // dimensions make the O(n^3) refresh irrelevant.
        self.gs = Basis::new(self.cols.clone()).expect("LLL preserves rank").gram_schmidt();
    }

    fn size_reduce(&mut self, k: usize, j: usize) {
        let mu = self.gs.mu[k][j].clone();
        let r = floor_rat(&(&mu + rational::rat(1, 2)));
        if r.is_zero() {
            return;
        }
        let rr = Rat::from_integer(r);
        for i in 0..self.cols.len() {
            let shift = &rr * &self.cols[j][i];
            self.cols[k][i] -= shift;
        }
        self.recompute();
    }
}

/// LLL-reduce; the input basis is unchanged, the returned one spans the same
/// lattice.
pub fn lll_reduce(basis: &Basis) -> Basis {
    let n = basis.n();
    let mut st = LllState {
        cols: basis.columns().to_vec(),
        gs: basis.gram_schmidt(),
    };
    let delta = rational::rat(DELTA_NUM, DELTA_DEN);
    let mut k = 1usize;
    while k < n {
        for j in (0..k).rev() {
            st.size_reduce(k, j);
        }
        let mu = st.gs.mu[k][k - 1].clone();
        let lhs = st.gs.norms_sq[k].clone();
        let rhs = (&delta - &mu * &mu) * &st.gs.norms_sq[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            st.cols.swap(k, k - 1);
            st.recompute();
            k = k.max(2) - 1;
        }
    }
    Basis::new(st.cols).expect("LLL preserves rank")
}

/// Lovasz condition and size-reduction check, for tests.
pub fn is_lll_reduced(basis: &Basis) -> bool {
    let gs = basis.gram_schmidt();
    let n = basis.n();
    let half = rational::rat(1, 2);
    let delta = rational::rat(DELTA_NUM, DELTA_DEN);
    for k in 1..n {
        for j in 0..k {
            if gs.mu[k][j].abs() > half {
                return false;
            }
        }
        let lhs = gs.norms_sq[k].clone();
        let rhs = (&delta - &gs.mu[k][k - 1] * &gs.mu[k][k - 1]) * &gs.norms_sq[k - 1];
        if lhs < rhs {
            return false;
        }
    }
    true
}
