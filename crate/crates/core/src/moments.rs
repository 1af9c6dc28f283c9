//! Moment machinery for the verifiers: continuous Gaussian moments V_a,
//! multi-index enumeration, compensated sample moments over witnesses, the
//! f_W cosine statistic, Taylor truncations of cosine, and the closed-form
//! lower bound on f_W near the lattice.

use crate::error::Error;
use crate::lattice::Target;
use crate::rational::{self, Rat};
use crate::stats::Kahan;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Vector of non-negative exponents with bounded total degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }
}

/// All multi-indices over n coordinates with total degree <= max_degree, in
/// graded lexicographic order. The count is checked against the closed form
/// C(n + max_degree, max_degree) before any moment pass uses the list.
pub fn multi_indices_up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut current = vec![0u32; n];
        compositions(n, d, 0, &mut current, &mut out);
    }
    let expected = binomial(n as u64 + max_degree as u64, max_degree as u64);
    assert_eq!(
        out.len() as u64,
        expected,
        "multi-index count mismatch vs C(n+2k, 2k)"
    );
    out
}

fn compositions(n: usize, remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        current[pos] = 0;
        return;
    }
    // Lexicographic within the degree block: larger leading exponent first
    // would be reverse-lex; plain ascending on the first coordinate keeps
    // graded-lex order on the exponent tuples.
    for v in (0..=remaining).rev() {
        current[pos] = v;
        compositions(n, remaining - v, pos + 1, current, out);
        current[pos] = 0;
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    let q = num / den;
    u64::try_from(q).expect("binomial fits u64 at desk scale")
}

/// V_a = integral of x^a exp(-pi x^2): zero for odd a,
/// (2a)! / ((4 pi)^a a!) for even exponents 2a.
pub fn gaussian_moment_v(a: u32) -> f64 {
    if a % 2 == 1 {
        return 0.0;
    }
    let half = a / 2;
    rational::rat_to_f64(&v_moment_scaled(a)) * (2.0 * PI).powi(-(half as i32))
}

/// Exact scaled form: V_{2a} = r * (2 pi)^{-a} with r = (2a)!/(2^a a!).
/// Returns r for even input, zero for odd.
pub fn v_moment_scaled(a: u32) -> Rat {
    if a % 2 == 1 {
        return Rat::zero();
    }
    let half = a / 2;
    let mut num = BigInt::one();
    for i in 1..=a {
        num *= BigInt::from(i);
    }
    let mut den = BigInt::one();
    for i in 1..=half {
        den *= BigInt::from(2u32) * BigInt::from(i);
    }
    Rat::new(num, den)
}

/// Product V_{a_1} ... V_{a_n} for a multi-index.
pub fn v_product(a: &MultiIndex) -> f64 {
    if a.0.iter().any(|&e| e % 2 == 1) {
        return 0.0;
    }
    let mut scaled = Rat::one();
    let mut pow = 0u32;
    for &e in &a.0 {
        scaled *= v_moment_scaled(e);
        pow += e / 2;
    }
    rational::rat_to_f64(&scaled) * (2.0 * PI).powi(-(pow as i32))
}

/// Sample moment (1/N) sum_i prod_j w_{i,j}^{a_j} with compensated
/// summation; parallel over witness index with a deterministic chunked
/// reduction.
pub fn sample_moment(float_vectors: &[Vec<f64>], a: &MultiIndex) -> f64 {
    let idx = [a.clone()];
    sample_moments_batch(float_vectors, &idx)[0]
}

/// One pass over the witness computing every requested moment.
pub fn sample_moments_batch(float_vectors: &[Vec<f64>], indices: &[MultiIndex]) -> Vec<f64> {
    if float_vectors.is_empty() {
        return vec![0.0; indices.len()];
    }
    let n = float_vectors[0].len();
    let max_deg = indices.iter().map(|a| a.degree()).max().unwrap_or(0) as usize;
    const CHUNK: usize = 4096;
    let partials: Vec<Vec<Kahan>> = float_vectors
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut accs = vec![Kahan::new(); indices.len()];
            let mut powers = vec![vec![1.0f64; max_deg + 1]; n];
            for w in chunk {
                for j in 0..n {
                    let mut p = 1.0;
                    for e in 1..=max_deg {
                        p *= w[j];
                        powers[j][e] = p;
                    }
                }
                for (k, a) in indices.iter().enumerate() {
                    let mut prod = 1.0;
                    for (j, &e) in a.0.iter().enumerate() {
                        if e > 0 {
                            prod *= powers[j][e as usize];
                        }
                    }
                    accs[k].add(prod);
                }
            }
            accs
        })
        .collect();
    // Chunk partials merged in chunk order: deterministic regardless of the
    // rayon schedule.
    let inv_n = 1.0 / float_vectors.len() as f64;
    (0..indices.len())
        .map(|k| {
            let mut total = Kahan::new();
            for p in &partials {
                total.merge(p[k]);
            }
            total.value() * inv_n
        })
        .collect()
}

/// f_W(t) = (1/N) sum_i cos(2 pi <w_i, t>) with the phases reduced mod 1 in
/// exact rational arithmetic before the cosine. For witnesses of dual
/// vectors this makes lattice periodicity hold exactly, not just up to
/// rounding of large integer phases.
pub fn f_w(rational_vectors: &[Vec<Rat>], t: &Target) -> f64 {
    f_w_offset(rational_vectors, t, None)
}

/// f_W(t + offset) with a float offset (used by the randomized verifier
/// where the shift is a sampled ball point).
pub fn f_w_offset(rational_vectors: &[Vec<Rat>], t: &Target, offset: Option<&[f64]>) -> f64 {
    const CHUNK: usize = 2048;
    let partials: Vec<(Kahan, usize)> = rational_vectors
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Kahan::new();
            for w in chunk {
                let phase_exact = rational::dot(w, &t.coords);
                let frac = &phase_exact
                    - Rat::from_integer(rational::floor_rat(&phase_exact));
                let mut phase = rational::rat_to_f64(&frac);
                if let Some(off) = offset {
                    let wf: f64 = w
                        .iter()
                        .zip(off)
                        .map(|(a, b)| rational::rat_to_f64(a) * b)
                        .sum();
                    phase += wf;
                }
                acc.add((2.0 * PI * phase).cos());
            }
            (acc, chunk.len())
        })
        .collect();
    let mut total = Kahan::new();
    let mut count = 0usize;
    for (p, c) in partials {
        total.merge(p);
        count += c;
    }
    total.value() / count as f64
}

/// C_k(x) = sum_{i=0}^k (-x^2)^i / (2i)!, the 2k-th Taylor truncation of
/// cosine. Brackets: C_{2k+1} <= cos <= C_{2k} pointwise.
pub fn cos_truncation(k: u32, x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0f64;
    let mut acc = Kahan::new();
    acc.add(1.0);
    for i in 1..=k {
        term *= -x2 / ((2 * i - 1) as f64 * (2 * i) as f64);
        acc.add(term);
    }
    acc.value()
}

/// Closed-form lower bound on f_W(u) for ||u|| <= r when all moment checks
/// pass at tolerance eps:
/// exp(-pi r^2) - (10 r^2 / k_max)^(k_max + 1) - eps n^(2 k_max) exp(2 pi r).
pub fn fw_lower_bound(r: f64, k_max: u32, eps: f64, n: usize) -> Result<f64, Error> {
    if k_max == 0 || k_max % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "k_max must be odd positive, got {k_max}"
        )));
    }
    let main = (-PI * r * r).exp();
    let taylor = (10.0 * r * r / k_max as f64).powi(k_max as i32 + 1);
    let moment = eps * (n as f64).powi(2 * k_max as i32) * (2.0 * PI * r).exp();
    Ok(main - taylor - moment)
}

/// Both sides of the tensor-moment inequality: the gap
/// |V_{2k} ||t||^{2k} - (1/m) sum <t, w_i>^{2k}| on the left, and
/// ||t||^{2k} times the summed per-multi-index deviations on the right.
/// The left never exceeds the right (up to rounding; asserted with a
/// relative guard).
pub fn tensor_moment_gap(float_vectors: &[Vec<f64>], t: &[f64], k: u32) -> (f64, f64) {
    let n = t.len();
    let t_norm_sq: f64 = t.iter().map(|x| x * x).sum();
    let t_pow = t_norm_sq.powi(k as i32);
    let mut inner = Kahan::new();
    for w in float_vectors {
        let dot: f64 = w.iter().zip(t).map(|(a, b)| a * b).sum();
        inner.add(dot.powi(2 * k as i32));
    }
    let lhs = (gaussian_moment_v(2 * k) * t_pow - inner.value() / float_vectors.len() as f64).abs();

    let indices: Vec<MultiIndex> = multi_indices_up_to(n, 2 * k)
        .into_iter()
        .filter(|a| a.degree() == 2 * k)
        .collect();
    let moments = sample_moments_batch(float_vectors, &indices);
    let mut dev = Kahan::new();
    for (a, m) in indices.iter().zip(&moments) {
        dev.add((v_product(a) - m).abs());
    }
    let rhs = t_pow * dev.value();
    debug_assert!(
        lhs <= rhs * (1.0 + 1e-9) + 1e-12,
        "tensor inequality violated: {lhs} > {rhs}"
    );
    (lhs, rhs)
}

/// Chernoff-Hoeffding tail: 2 exp(-delta^2 N / (2 r^2)) for N iid samples
/// bounded by r.
pub fn chernoff_bound(delta: f64, n_samples: u64, r: f64) -> Result<f64, Error> {
    if r <= 0.0 || n_samples == 0 {
        return Err(Error::InvalidParameter(
            "chernoff_bound needs r > 0 and N >= 1".into(),
        ));
    }
    Ok(2.0 * (-delta * delta * n_samples as f64 / (2.0 * r * r)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn v_moments_closed_form() {
        assert_eq!(gaussian_moment_v(0), 1.0);
        assert!((gaussian_moment_v(2) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!((gaussian_moment_v(4) - 3.0 / (4.0 * PI * PI)).abs() < 1e-16);
        assert_eq!(gaussian_moment_v(1), 0.0);
        assert_eq!(gaussian_moment_v(7), 0.0);
        // Scaled forms: V_2 = 1 * u, V_4 = 3 u^2, V_6 = 15 u^3.
        assert_eq!(v_moment_scaled(2), rat_int(1));
        assert_eq!(v_moment_scaled(4), rat_int(3));
        assert_eq!(v_moment_scaled(6), rat_int(15));
    }

    #[test]
    fn multi_index_count_and_order() {
        let idx = multi_indices_up_to(3, 4);
        assert_eq!(idx.len() as u64, binomial(7, 4)); // C(3+4, 4) = 35
        // Graded: degrees non-decreasing.
        let degs: Vec<u32> = idx.iter().map(|a| a.degree()).collect();
        assert!(degs.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(idx[0], MultiIndex::zero(3));
    }

    #[test]
    fn sample_moment_edge_cases() {
        let zeros = vec![vec![0.0, 0.0]; 10];
        let a = MultiIndex(vec![2, 0]);
        assert_eq!(sample_moment(&zeros, &a), 0.0);
        // a = 0 gives 1 regardless of W.
        let w = vec![vec![1.5, -2.0], vec![0.3, 0.9]];
        assert_eq!(sample_moment(&w, &MultiIndex::zero(2)), 1.0);
    }

    #[test]
    fn f_w_basics() {
        let w = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat(1, 2), rat(1, 2)],
        ];
        let t0 = Target::new(vec![rat_int(0), rat_int(0)]);
        assert_eq!(f_w(&w, &t0), 1.0);
        let t = Target::new(vec![rat(1, 3), rat(1, 7)]);
        let val = f_w(&w, &t);
        assert!((-1.0..=1.0).contains(&val));
    }

    #[test]
    fn f_w_periodic_under_dual_witness_exactly() {
        // Witness of integer vectors = dual members of Z^2: shifting t by a
        // lattice vector leaves f_W bit-identical (phases reduced mod 1
        // exactly).
        let w = vec![
            vec![rat_int(3), rat_int(-2)],
            vec![rat_int(1), rat_int(5)],
            vec![rat_int(-4), rat_int(7)],
        ];
        let t = Target::new(vec![rat(2, 7), rat(-5, 11)]);
        let shifted = Target::new(vec![rat(2, 7) + rat_int(1234), rat(-5, 11) - rat_int(987)]);
        assert_eq!(f_w(&w, &t), f_w(&w, &shifted));
    }

    #[test]
    fn cos_truncation_brackets() {
        // C_0 = 1 >= cos; C_k(0) = 1; grid sweep k <= 6 at 1e-12 tolerance.
        assert_eq!(cos_truncation(0, 2.0), 1.0);
        for k in 0..=6u32 {
            assert_eq!(cos_truncation(k, 0.0), 1.0);
        }
        let mut x = -10.0f64;
        while x <= 10.0 {
            let c = x.cos();
            for k in 0..=6u32 {
                let even = cos_truncation(2 * k, x);
                let odd = cos_truncation(2 * k + 1, x);
                assert!(even >= c - 1e-12, "C_{{2k}} at x={x} k={k}");
                assert!(odd <= c + 1e-12, "C_{{2k+1}} at x={x} k={k}");
            }
            x += 0.037;
        }
    }

    #[test]
    fn fw_lower_bound_edges() {
        // eps = 0, r = 0: bound is exactly 1.
        assert_eq!(fw_lower_bound(0.0, 1, 0.0, 4).unwrap(), 1.0);
        assert!(fw_lower_bound(1.0, 2, 0.0, 4).is_err());
        assert!(fw_lower_bound(1.0, 0, 0.0, 4).is_err());
    }

    #[test]
    fn soundness_margin_at_paper_ratio() {
        // (10 r^2 / k)^(k+1) < exp(-pi r^2) / 4 at r = sqrt(k)/4 for odd
        // k >= 5 (the margin the soundness analysis relies on).
        for k in [5u32, 7, 9, 99] {
            let r = (k as f64).sqrt() / 4.0;
            let taylor = (10.0 * r * r / k as f64).powi(k as i32 + 1);
            assert!(
                taylor < (-PI * r * r).exp() / 4.0,
                "margin fails at k = {k}"
            );
        }
    }

    #[test]
    fn tensor_gap_examples() {
        // All-zero witness, unit t, k = 1: LHS = V_2, RHS = n V_2 >= V_2.
        let w = vec![vec![0.0, 0.0, 0.0]; 5];
        let t = [1.0, 0.0, 0.0];
        let (lhs, rhs) = tensor_moment_gap(&w, &t, 1);
        assert!((lhs - gaussian_moment_v(2)).abs() < 1e-15);
        assert!(rhs >= lhs);
        // t = 0: both sides zero.
        let (lhs, rhs) = tensor_moment_gap(&w, &[0.0, 0.0, 0.0], 1);
        assert_eq!((lhs, rhs), (0.0, 0.0));
        // Random-ish witness, k = 2, n = 3: inequality holds.
        let w: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let x = (i as f64 * 0.7).sin();
                let y = (i as f64 * 1.3).cos();
                let z = ((i * i) as f64 * 0.1).sin();
                vec![x, y, z]
            })
            .collect();
        let (lhs, rhs) = tensor_moment_gap(&w, &[0.4, -1.2, 0.7], 2);
        assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn chernoff_edges() {
        assert_eq!(chernoff_bound(0.0, 10, 1.0).unwrap(), 2.0);
        let b1 = chernoff_bound(0.1, 100, 1.0).unwrap();
        let b2 = chernoff_bound(0.1, 10_000, 1.0).unwrap();
        assert!(b2 < b1);
        assert!(chernoff_bound(0.1, 0, 1.0).is_err());
        assert!(chernoff_bound(0.1, 10, 0.0).is_err());
    }

    #[test]
    fn chernoff_empirical_bounded_coins() {
        // Deviation frequency of fair-coin means over 10^4 repetitions stays
        // below the bound plus 3 sigma.
        use rand::Rng;
        let mut rng = crate::rng::SeedTree::new(3).rng();
        let reps = 10_000;
        let n = 64;
        let delta = 0.15;
        let mut exceed = 0u64;
        for _ in 0..reps {
            let mut acc = 0.0;
            for _ in 0..n {
                acc += if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
            if (acc / n as f64).abs() >= delta {
                exceed += 1;
            }
        }
        let bound = chernoff_bound(delta, n, 1.0).unwrap();
        let rate = exceed as f64 / reps as f64;
        let sigma = (bound.min(1.0) * (1.0 - bound.min(1.0)) / reps as f64)
            .sqrt()
            .max(1e-4);
        assert!(rate <= bound + 3.0 * sigma, "rate {rate} bound {bound}");
    }
}
