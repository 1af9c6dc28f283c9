//! Shared fixtures for the criterion benchmarks.

use latlab::lattice::Basis;
use latlab::rational::rat_int;

/// A mildly skewed full-rank integer basis of the given rank.
pub fn skewed_basis(n: usize) -> Basis {
    let cols: Vec<Vec<_>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    if i == j {
                        rat_int(2 + (j % 3) as i64)
                    } else if i + 1 == j {
                        rat_int(1)
                    } else {
                        rat_int(0)
                    }
                })
                .collect()
        })
        .collect();
    Basis::new(cols).expect("triangular basis is full rank")
}
