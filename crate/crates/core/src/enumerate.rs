//! Lattice point enumeration (Fincke-Pohst style, recursing over
//! Gram-Schmidt levels).
//!
//! Two variants: an exact-rational branch-and-bound used by the ground-truth
//! solvers (deterministic minimizers, lexicographic tie-breaks) and a plain
//! f64 fixed-radius visitor used by Gaussian mass sums and samplers.

use crate::lattice::{Basis, FloatLattice, GramSchmidt};
use crate::rational::{self, floor_rat, floor_sqrt, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact enumeration context for one basis and one center.
pub struct ExactEnum<'a> {
    gs: &'a GramSchmidt,
    /// Center coordinates along the Gram-Schmidt directions.
    gamma: Vec<Rat>,
    n: usize,
}

impl<'a> ExactEnum<'a> {
    pub fn new(gs: &'a GramSchmidt, center: &[Rat]) -> Self {
        let n = gs.b_star.len();
        assert_eq!(center.len(), n);
        let gamma = (0..n)
            .map(|i| rational::dot(center, &gs.b_star[i]) / &gs.norms_sq[i])
            .collect();
        ExactEnum { gs, gamma, n }
    }

    /// Visits every coordinate vector z with ||B z - center||^2 <= radius_sq.
    pub fn visit_all(&self, radius_sq: &Rat, mut f: impl FnMut(&[BigInt], &Rat)) {
        let mut z = vec![BigInt::zero(); self.n];
        self.visit_level(self.n, &Rat::zero(), radius_sq, &mut z, &mut f);
    }

    fn visit_level(
        &self,
        level: usize,
        partial: &Rat,
        radius_sq: &Rat,
        z: &mut Vec<BigInt>,
        f: &mut impl FnMut(&[BigInt], &Rat),
    ) {
        if level == 0 {
            f(z, partial);
            return;
        }
        let i = level - 1;
        let offset = self.offset_at(i, z);
        let budget = radius_sq - partial;
        let Some((lo, hi)) = integer_interval(&offset, &budget, &self.gs.norms_sq[i]) else {
            return;
        };
        let mut zi = lo;
        while zi <= hi {
            let c = Rat::from_integer(zi.clone()) + &offset;
            let contrib = &c * &c * &self.gs.norms_sq[i];
            let next = partial + &contrib;
            if next <= *radius_sq {
                z[i] = zi.clone();
                self.visit_level(level - 1, &next, radius_sq, z, f);
            }
            zi += 1;
        }
        z[i] = BigInt::zero();
    }

    /// Closest coordinate vector to the center within sqrt(radius_sq),
    /// optionally excluding zero. Ties broken lexicographically smallest on
    /// coords. Returns (coords, dist_sq).
    pub fn closest(&self, radius_sq: &Rat, exclude_zero: bool) -> Option<(Vec<BigInt>, Rat)> {
        let mut best: Option<(Vec<BigInt>, Rat)> = None;
        let mut z = vec![BigInt::zero(); self.n];
        self.closest_level(self.n, &Rat::zero(), radius_sq, exclude_zero, &mut z, &mut best);
        best
    }

    fn closest_level(
        &self,
        level: usize,
        partial: &Rat,
        radius_sq: &Rat,
        exclude_zero: bool,
        z: &mut Vec<BigInt>,
        best: &mut Option<(Vec<BigInt>, Rat)>,
    ) {
        if level == 0 {
            if exclude_zero && z.iter().all(|c| c.is_zero()) {
                return;
            }
            let dist = partial.clone();
            match best {
                Some((bz, bd)) => {
                    if dist < *bd || (dist == *bd && lex_less(z, bz)) {
                        *best = Some((z.clone(), dist));
                    }
                }
                None => *best = Some((z.clone(), dist)),
            }
            return;
        }
        let i = level - 1;
        let offset = self.offset_at(i, z);
        // Shrink against the incumbent (keep equality to collect lex ties).
        let bound = match best {
            Some((_, bd)) if *bd < *radius_sq => bd.clone(),
            _ => radius_sq.clone(),
        };
        let budget = &bound - partial;
        if budget.is_negative() {
            return;
        }
        let Some((lo, hi)) = integer_interval(&offset, &budget, &self.gs.norms_sq[i]) else {
            return;
        };
        // Zig-zag outward from the continuous minimizer for fast shrinking.
        let center = -&offset;
        let start = round_rat(&center).max(lo.clone()).min(hi.clone());
        let mut order: Vec<BigInt> = Vec::new();
        let mut lo_c = start.clone();
        let mut hi_c: BigInt = start.clone() + 1;
        loop {
            let mut pushed = false;
            if lo_c >= lo {
                order.push(lo_c.clone());
                lo_c -= 1;
                pushed = true;
            }
            if hi_c <= hi {
                order.push(hi_c.clone());
                hi_c += 1;
                pushed = true;
            }
            if !pushed {
                break;
            }
        }
        for zi in order {
            let c = Rat::from_integer(zi.clone()) + &offset;
            let contrib = &c * &c * &self.gs.norms_sq[i];
            let next = partial + &contrib;
            // Re-check against the (possibly tightened) incumbent.
            let bound = match best {
                Some((_, bd)) if *bd < *radius_sq => bd.clone(),
                _ => radius_sq.clone(),
            };
            if next > bound {
                continue;
            }
            z[i] = zi;
            self.closest_level(level - 1, &next, radius_sq, exclude_zero, z, best);
        }
        z[i] = BigInt::zero();
    }

    fn offset_at(&self, i: usize, z: &[BigInt]) -> Rat {
        // Component of (sum_j z_j b_j - center) along b*_i given z_{i+1..n}.
        let mut off = -self.gamma[i].clone();
        for j in (i + 1)..self.n {
            if z[j].is_zero() {
                continue;
            }
            off += &self.gs.mu[j][i] * Rat::from_integer(z[j].clone());
        }
        off
    }
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

fn round_rat(r: &Rat) -> BigInt {
    floor_rat(&(r + Rat::new(BigInt::from(1), BigInt::from(2))))
}

/// Integers z with (z + offset)^2 * norm_sq <= budget, i.e.
/// z in [-offset - sqrt(budget/norm_sq), -offset + sqrt(budget/norm_sq)].
/// Exact endpoints via integer square roots on scaled numerators.
fn integer_interval(offset: &Rat, budget: &Rat, norm_sq: &Rat) -> Option<(BigInt, BigInt)> {
    if budget.is_negative() {
        return None;
    }
    let t2 = budget / norm_sq;
    // hi = floor(-offset + sqrt(t2)): largest z with (z + offset)^2 <= t2 and
    // z + offset >= 0 allowed to exceed... handled by exact predicate walk.
    let c = -offset;
    let approx_r = rational::rat_to_f64(&t2).max(0.0).sqrt();
    let c_f = rational::rat_to_f64(&c);
    let sat = |z: &BigInt| -> bool {
        let d = Rat::from_integer(z.clone()) - &c;
        &d * &d <= t2
    };
    // Upper endpoint.
    let mut hi = BigInt::from((c_f + approx_r).floor() as i64);
    // Walk up while the next integer still satisfies, then down until sat.
    while sat(&(&hi + 1)) {
        hi += 1;
    }
    while !sat(&hi) {
        hi -= 1;
        // Interval can be empty.
        let lo_guess = BigInt::from((c_f - approx_r).ceil() as i64);
        if hi < lo_guess - 2 {
            break;
        }
    }
    // Lower endpoint.
    let mut lo = BigInt::from((c_f - approx_r).ceil() as i64);
    while sat(&(&lo - 1)) {
        lo -= 1;
    }
    while !sat(&lo) && lo <= hi {
        lo += 1;
    }
    if lo > hi || !sat(&lo) || !sat(&hi) {
        return None;
    }
    Some((lo, hi))
}

/// Exact point listing used by preimage counting in the protocols.
pub fn points_within(gs: &GramSchmidt, center: &[Rat], radius_sq: &Rat) -> Vec<Vec<BigInt>> {
    let en = ExactEnum::new(gs, center);
    let mut out = Vec::new();
    en.visit_all(radius_sq, |z, _| out.push(z.to_vec()));
    out
}

/// f64 enumeration: visits (coords, dist_sq) for every lattice point with
/// ||B z - center|| <= radius (small slack added against rounding).
pub struct FloatEnum<'a> {
    fl: &'a FloatLattice,
    gamma: Vec<f64>,
}

impl<'a> FloatEnum<'a> {
    pub fn new(fl: &'a FloatLattice, center: &[f64]) -> Self {
        assert_eq!(center.len(), fl.n);
        let gamma = (0..fl.n)
            .map(|i| {
                let dot: f64 = center
                    .iter()
                    .zip(&fl.b_star[i])
                    .map(|(a, b)| a * b)
                    .sum();
                dot / fl.norms_sq[i]
            })
            .collect();
        FloatEnum { fl, gamma }
    }

    pub fn visit(&self, radius: f64, mut f: impl FnMut(&[i64], f64)) {
        let r2 = radius * radius * (1.0 + 1e-12) + 1e-300;
        let mut z = vec![0i64; self.fl.n];
        self.level(self.fl.n, 0.0, r2, &mut z, &mut f);
    }

    fn level(&self, level: usize, partial: f64, r2: f64, z: &mut Vec<i64>, f: &mut impl FnMut(&[i64], f64)) {
        if level == 0 {
            f(z, partial);
            return;
        }
        let i = level - 1;
        let mut off = -self.gamma[i];
        for j in (i + 1)..self.fl.n {
            if z[j] != 0 {
                off += self.fl.mu[j][i] * z[j] as f64;
            }
        }
        let budget = r2 - partial;
        if budget < 0.0 {
            return;
        }
        let t = (budget / self.fl.norms_sq[i]).sqrt();
        let lo = (-off - t).ceil() as i64;
        let hi = (-off + t).floor() as i64;
        for zi in lo..=hi {
            let c = zi as f64 + off;
            let next = partial + c * c * self.fl.norms_sq[i];
            if next <= r2 {
                z[i] = zi;
                self.level(level - 1, next, r2, z, f);
            }
        }
        z[i] = 0;
    }
}

/// Independent oracle for tests: brute double-loop box scan with no
/// Gram-Schmidt pruning. The coefficient box is provably sufficient: for
/// ||B z|| <= R, each |z_i| = |<B z, d_i>| <= R ||d_i|| with d_i the dual
/// columns.
pub fn brute_force_box_scan(
    basis: &Basis,
    center: &[Rat],
    radius_sq: &Rat,
    exclude_zero: bool,
) -> Option<(Vec<BigInt>, Rat)> {
    let n = basis.n();
    let dual = basis.dual();
    let center_norm = floor_sqrt(&rational::norm_sq(center)) + 1;
    let r_int = floor_sqrt(radius_sq) + 1;
    let mut bounds = Vec::with_capacity(n);
    for i in 0..n {
        let dn = floor_sqrt(&rational::norm_sq(dual.column(i))) + 1;
        let b: BigInt = (&r_int + &center_norm) * dn + 1;
        bounds.push(b.to_i64().expect("desk-scale bound"));
    }
    let mut best: Option<(Vec<BigInt>, Rat)> = None;
    let mut z = vec![0i64; n];
    fn rec(
        basis: &Basis,
        center: &[Rat],
        radius_sq: &Rat,
        exclude_zero: bool,
        bounds: &[i64],
        z: &mut Vec<i64>,
        i: usize,
        best: &mut Option<(Vec<BigInt>, Rat)>,
    ) {
        if i == z.len() {
            if exclude_zero && z.iter().all(|&c| c == 0) {
                return;
            }
            let coords: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
            let emb = basis.embed(&coords);
            let d = rational::norm_sq(&rational::sub(&emb, center));
            if d <= *radius_sq {
                match best {
                    Some((bz, bd)) => {
                        if d < *bd || (d == *bd && lex_less(&coords, bz)) {
                            *best = Some((coords, d));
                        }
                    }
                    None => *best = Some((coords, d)),
                }
            }
            return;
        }
        for v in -bounds[i]..=bounds[i] {
            z[i] = v;
            rec(basis, center, radius_sq, exclude_zero, bounds, z, i + 1, best);
        }
    }
    rec(
        basis,
        center,
        radius_sq,
        exclude_zero,
        &bounds,
        &mut z,
        0,
        &mut best,
    );
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn visit_all_counts_z2_ball() {
        let b = Basis::integer_lattice(2);
        let gs = b.gram_schmidt();
        let en = ExactEnum::new(&gs, &[rat_int(0), rat_int(0)]);
        let mut count = 0;
        en.visit_all(&rat_int(4), |_, _| count += 1);
        // |z|^2 <= 4 in Z^2: 13 points.
        assert_eq!(count, 13);
    }

    #[test]
    fn closest_matches_brute_force() {
        let b = Basis::new(vec![
            vec![rat(2, 1), rat(1, 1)],
            vec![rat(1, 2), rat(3, 1)],
        ])
        .unwrap();
        let gs = b.gram_schmidt();
        let center = vec![rat(7, 10), rat(-3, 5)];
        let en = ExactEnum::new(&gs, &center);
        let got = en.closest(&rat_int(50), false).unwrap();
        let want = brute_force_box_scan(&b, &center, &rat_int(50), false).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn closest_excludes_zero() {
        let b = Basis::integer_lattice(2);
        let gs = b.gram_schmidt();
        let en = ExactEnum::new(&gs, &[rat_int(0), rat_int(0)]);
        let (z, d) = en.closest(&rat_int(9), true).unwrap();
        assert_eq!(d, rat_int(1));
        assert!(!z.iter().all(|c| c.is_zero()));
        // Lex smallest among the four unit vectors: (-1, 0).
        assert_eq!(z, vec![BigInt::from(-1), BigInt::from(0)]);
    }

    #[test]
    fn float_enum_agrees_on_counts() {
        let b = Basis::from_i64(&[&[3, 1], &[1, 2]]).unwrap();
        let fl = b.to_float();
        let gs = b.gram_schmidt();
        for r in [1.0f64, 2.5, 4.0] {
            let mut float_count = 0;
            FloatEnum::new(&fl, &[0.3, 0.7]).visit(r, |_, _| float_count += 1);
            let en = ExactEnum::new(&gs, &[rat(3, 10), rat(7, 10)]);
            let mut exact_count = 0;
            en.visit_all(&rational::rat_from_f64(r * r), |_, _| exact_count += 1);
            assert_eq!(float_count, exact_count, "radius {r}");
        }
    }
}
