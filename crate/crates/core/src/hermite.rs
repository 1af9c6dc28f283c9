//! Multivariate Hermite polynomials in the normalization that makes the
//! lattice/dual moment identity hold:
//!
//!   H_a(x) = (2 pi i)^{-(a_1+...+a_n)} e^{pi ||x||^2} d^a e^{-pi ||x||^2}.
//!
//! Coefficients are stored exactly. With k = |a| and u = 1/(2 pi), every
//! coefficient of x^b has the form i^k * q * u^((k - |b|)/2) with q an
//! integer, so a sparse map b -> q captures the polynomial exactly. The sign
//! convention is fixed by requiring H_a(0) = V_{a_1} ... V_{a_n}; direct
//! differentiation agrees with that convention (e.g. H_2(x) = -x^2 + u), and
//! the recurrence below reproduces it.

use crate::error::Error;
use crate::gaussian::{rho_scalar_sq, TruncationPolicy};
use crate::lattice::{Basis, FloatLattice};
use crate::moments::{v_moment_scaled, MultiIndex};
use crate::rational::Rat;
use crate::stats::Kahan;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Sparse exact Hermite polynomial: monomial exponents mapped to the integer
/// part q of the coefficient i^k q u^((k-|b|)/2), u = 1/(2 pi).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitePolynomial {
    pub index: MultiIndex,
    pub degree: u32,
    coeffs: BTreeMap<MultiIndex, BigInt>,
}

impl HermitePolynomial {
    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, BigInt> {
        &self.coeffs
    }

    /// Complex magnitude sum of all coefficients; bounded by (k+1)!.
    pub fn coeff_abs_sum(&self) -> f64 {
        let u = 1.0 / (2.0 * PI);
        self.coeffs
            .iter()
            .map(|(b, q)| {
                let pow = (self.degree - b.degree()) / 2;
                q.magnitude().to_f64().unwrap() * u.powi(pow as i32)
            })
            .sum()
    }

    /// Constant term as an exact pair (q, u-power); empty polynomial slot is
    /// zero.
    pub fn constant_term_scaled(&self) -> (BigInt, u32) {
        let b0 = MultiIndex::zero(self.index.dim());
        let q = self.coeffs.get(&b0).cloned().unwrap_or_else(BigInt::zero);
        (q, self.degree / 2)
    }

    /// Evaluates the real-valued identity side i^k H-part at a point. Only
    /// meaningful for even total degree (odd-degree Hermite polynomials are
    /// purely imaginary; both sides of the moment identity vanish there by
    /// lattice symmetry).
    pub fn eval_identity(&self, x: &[f64]) -> f64 {
        let u = 1.0 / (2.0 * PI);
        let sign = if self.degree % 4 == 0 { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for (b, q) in &self.coeffs {
            let pow = (self.degree - b.degree()) / 2;
            let mut term = q.to_f64().unwrap() * u.powi(pow as i32);
            for (j, &e) in b.0.iter().enumerate() {
                for _ in 0..e {
                    term *= x[j];
                }
            }
            acc += term;
        }
        if self.degree % 2 == 0 {
            sign * acc
        } else {
            // i^k is imaginary; return the scaled real carrier (callers use
            // the even case for identities).
            acc
        }
    }
}

/// Builds H_a by the coefficient recurrence
/// q_{a,b} = q_{a-,b-} - (b_i + 1) q_{a-,b+}, reducing one unit of the first
/// nonzero exponent of a per step, from H_0 = 1.
pub fn hermite_build(a: &MultiIndex, degree_cap: u32) -> Result<HermitePolynomial, Error> {
    let k = a.degree();
    if k > degree_cap {
        return Err(Error::InvalidParameter(format!(
            "hermite degree {k} exceeds cap {degree_cap}"
        )));
    }
    let n = a.dim();
    let mut coeffs: BTreeMap<MultiIndex, BigInt> = BTreeMap::new();
    coeffs.insert(MultiIndex::zero(n), BigInt::one());
    let mut current = MultiIndex::zero(n);
    while current != *a {
        // First coordinate still below its target exponent.
        let i = (0..n).find(|&j| current.0[j] < a.0[j]).expect("not yet equal");
        let mut next: BTreeMap<MultiIndex, BigInt> = BTreeMap::new();
        for (b, q) in &coeffs {
            // d/dx_i route: b -> b+ e_i with weight 1 (the "-2 pi c_{a-,b-}"
            // term lands on exponent b+1 after scaling).
            let mut up = b.clone();
            up.0[i] += 1;
            *next.entry(up).or_insert_with(BigInt::zero) += q;
            // Multiplication route: b -> b - e_i with weight -(b_i).
            if b.0[i] > 0 {
                let mut down = b.clone();
                down.0[i] -= 1;
                *next.entry(down).or_insert_with(BigInt::zero) -= q * BigInt::from(b.0[i]);
            }
        }
        next.retain(|_, q| !q.is_zero());
        coeffs = next;
        current.0[i] += 1;
    }
    Ok(HermitePolynomial {
        index: a.clone(),
        degree: k,
        coeffs,
    })
}

/// Exact check that the constant term equals V_{a_1} ... V_{a_n}.
pub fn constant_term_matches_v_product(h: &HermitePolynomial) -> bool {
    let (q, upow) = h.constant_term_scaled();
    if h.degree % 2 == 1 {
        return q.is_zero();
    }
    // Product of scaled V moments: integer R with V-product = R u^{k/2}.
    let mut r = Rat::one();
    for &e in &h.index.0 {
        r *= v_moment_scaled(e);
    }
    let signed_q = if h.degree % 4 == 0 { q } else { -q };
    Rat::from_integer(signed_q) == r && upow == h.degree / 2
}

/// |E_{x ~ D_L}[x^a] - E_{w ~ D_{L*}}[H_a(w)]| with both sides as truncated
/// exact sums (width 1 on each side). Polynomially-weighted tails get extra
/// radius headroom.
pub fn hermite_identity_residual(
    basis: &Basis,
    a: &MultiIndex,
    policy: TruncationPolicy,
    degree_cap: u32,
) -> Result<f64, Error> {
    let h = hermite_build(a, degree_cap)?;
    let lhs = lattice_monomial_expectation(&basis.to_float(), 1.0, a, policy)?;
    let dual = basis.dual();
    let dual_fl = dual.to_float();
    let rhs = lattice_weighted_expectation(&dual_fl, 1.0, policy, |w| h.eval_identity(w))?;
    Ok((lhs - rhs).abs())
}

/// E_{x ~ D_{L,s}}[x^a] by truncated enumeration.
pub fn lattice_monomial_expectation(
    fl: &FloatLattice,
    s: f64,
    a: &MultiIndex,
    policy: TruncationPolicy,
) -> Result<f64, Error> {
    lattice_weighted_expectation(fl, s, policy, |x| {
        let mut prod = 1.0;
        for (j, &e) in a.0.iter().enumerate() {
            for _ in 0..e {
                prod *= x[j];
            }
        }
        prod
    })
}

/// Generic truncated expectation E_{x ~ D_{L,s}}[g(x)]. The truncation
/// radius carries extra headroom over the mass tail cut so that polynomial
/// integrands of modest degree stay inside the target accuracy.
pub fn lattice_weighted_expectation(
    fl: &FloatLattice,
    s: f64,
    policy: TruncationPolicy,
    g: impl Fn(&[f64]) -> f64,
) -> Result<f64, Error> {
    let tail_x = policy.initial_tail_x() + 2.5;
    let radius = policy.radius(fl.n, s, tail_x);
    let center = vec![0.0; fl.n];
    let mut num = Kahan::new();
    let mut den = Kahan::new();
    crate::enumerate::FloatEnum::new(fl, &center).visit(radius, |z, dist_sq| {
        let x = fl.embed(z);
        let w = rho_scalar_sq(s, dist_sq);
        num.add(w * g(&x));
        den.add(w);
    });
    if den.value() <= 0.0 {
        return Err(Error::InvalidParameter("vanishing lattice mass".into()));
    }
    Ok(num.value() / den.value())
}
