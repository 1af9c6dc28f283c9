//! Independent high-precision oracle for the formula-fidelity criterion.
//!
//! Deliberately a second implementation, not a re-export of the production
//! path: 55-digit fixed point (vs 60), natural-log-first evaluation order,
//! logarithms via repeated square roots plus the ln(1+u) series (production
//! normalizes by powers of two and uses the atanh series), and pi from
//! Euler's atan(1/2) + atan(1/3) (production uses Machin's 16 atan(1/5) -
//! 4 atan(1/239)). Agreement to ~45 digits makes the final f64 roundings
//! identical unless one of the engines is wrong.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::sync::OnceLock;

const DIGITS: u32 = 55;

fn scale() -> &'static BigInt {
    static S: OnceLock<BigInt> = OnceLock::new();
    S.get_or_init(|| BigInt::from(10u32).pow(DIGITS))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct P2(BigInt);

impl P2 {
    fn from_u64(v: u64) -> P2 {
        P2(BigInt::from(v) * scale())
    }

    fn from_ratio(p: i64, q: i64) -> P2 {
        P2(BigInt::from(p) * scale() / BigInt::from(q))
    }

    fn add(&self, o: &P2) -> P2 {
        P2(&self.0 + &o.0)
    }

    fn sub(&self, o: &P2) -> P2 {
        P2(&self.0 - &o.0)
    }

    fn mul(&self, o: &P2) -> P2 {
        P2(&self.0 * &o.0 / scale())
    }

    fn div(&self, o: &P2) -> P2 {
        P2(&self.0 * scale() / &o.0)
    }

    fn mul_i(&self, k: i64) -> P2 {
        P2(&self.0 * BigInt::from(k))
    }

    fn div_i(&self, k: i64) -> P2 {
        P2(&self.0 / BigInt::from(k))
    }

    fn neg(&self) -> P2 {
        P2(-&self.0)
    }

    fn to_f64(&self) -> f64 {
        let neg = self.0.is_negative();
        let mag = self.0.magnitude().to_string();
        let d = DIGITS as usize;
        let s = if mag.len() <= d {
            format!("0.{}{}", "0".repeat(d - mag.len()), mag)
        } else {
            let (i, f) = mag.split_at(mag.len() - d);
            format!("{i}.{f}")
        };
        let s = if neg { format!("-{s}") } else { s };
        s.parse::<f64>().expect("decimal parse")
    }

    /// Integer-seeded Newton square root on the scaled value.
    fn sqrt(&self) -> P2 {
        assert!(!self.0.is_negative());
        if self.0.is_zero() {
            return P2(BigInt::zero());
        }
        let target = &self.0 * scale();
        let mut x: BigInt = BigInt::from(1u8) << (target.bits() / 2 + 1);
        loop {
            let next: BigInt = (&x + &target / &x) / 2;
            if (&next - &x).magnitude() <= &num_bigint::BigUint::from(1u32) {
                return P2(next);
            }
            x = next;
        }
    }

    /// ln via repeated square roots: take roots until the argument is
    /// within 1e-7 of 1, apply the alternating ln(1+u) series, multiply
    /// back by 2^j.
    fn ln(&self) -> P2 {
        assert!(self.0.is_positive());
        let one = P2::from_u64(1);
        let band = P2::from_ratio(1, 10_000_000);
        let mut y = self.clone();
        let mut j = 0u32;
        while {
            let diff = y.sub(&one);
            diff.0.magnitude() > band.0.magnitude()
        } {
            y = y.sqrt();
            j += 1;
            assert!(j < 200, "ln reduction diverged");
        }
        let u = y.sub(&one);
        // ln(1 + u) = u - u^2/2 + u^3/3 - ...
        let mut term = u.clone();
        let mut acc = term.clone();
        let mut i = 1i64;
        loop {
            term = term.mul(&u);
            let contrib = term.div_i(i + 1);
            if contrib.0.is_zero() {
                break;
            }
            if i % 2 == 1 {
                acc = acc.sub(&contrib);
            } else {
                acc = acc.add(&contrib);
            }
            i += 1;
        }
        P2(acc.0 << j)
    }
}

fn ln2() -> &'static P2 {
    static V: OnceLock<P2> = OnceLock::new();
    V.get_or_init(|| P2::from_u64(2).ln())
}

/// pi = 4 (atan(1/2) + atan(1/3)).
fn pi() -> &'static P2 {
    static V: OnceLock<P2> = OnceLock::new();
    V.get_or_init(|| atan_inv(2).add(&atan_inv(3)).mul_i(4))
}

fn atan_inv(x: i64) -> P2 {
    let mut term = P2::from_ratio(1, x);
    let inv2 = P2::from_ratio(1, x * x);
    let mut acc = term.clone();
    let mut i = 1i64;
    loop {
        term = term.mul(&inv2);
        let contrib = term.div_i(2 * i + 1);
        if contrib.0.is_zero() {
            break;
        }
        if i % 2 == 1 {
            acc = acc.sub(&contrib);
        } else {
            acc = acc.add(&contrib);
        }
        i += 1;
    }
    acc
}

pub struct OracleCell {
    pub gg_general: f64,
    pub gg_l2: f64,
    pub conp_witness: f64,
    pub conp_eps: f64,
    pub conp_threshold: f64,
    pub conp_time_2k: f64,
    pub conp_time_base: f64,
    pub coma_witness: f64,
    pub coma_trials: f64,
    pub coma_threshold: f64,
}

/// Evaluates every table formula for one (n, gamma) cell at 55 digits.
/// gamma = p/q > 1; k is the (shared, integer-logic) Taylor order mapping.
pub fn evaluate_cell(n: u64, gamma: (i64, i64), k: u32) -> OracleCell {
    let (p, q) = gamma;
    let n_i = n as i64;
    let nf = P2::from_u64(n);
    let ln_n = nf.ln();

    // GG general: ln(10 n (p/(p-q))^n) / ln 2.
    let ln_10n = P2::from_u64(10 * n).ln();
    let ln_shrink = P2::from_ratio(p - q, p).ln();
    let gg_general = ln_10n.sub(&ln_shrink.mul_i(n_i)).div(ln2());

    // GG l2: (ln 10 + 1.5 ln n - ((n+1)/2) ln((p^2-q^2)/p^2)) / ln 2.
    let ln_10 = P2::from_u64(10).ln();
    let ln_shrink2 = P2::from_ratio(p * p - q * q, p * p).ln();
    let gg_l2 = ln_10
        .add(&ln_n.mul_i(3).div_i(2))
        .sub(&ln_shrink2.mul_i(n_i + 1).div_i(2))
        .div(ln2());

    // conp: base = 20 k^2 n^2 ln n; ln N = (2k+1) ln base.
    let k_i = k as i64;
    let base = P2::from_u64(20)
        .mul_i(k_i)
        .mul_i(k_i)
        .mul(&nf)
        .mul(&nf)
        .mul(&ln_n);
    let ln_base = base.ln();
    let ln_witness = ln_base.mul_i(2 * k_i + 1);
    let conp_witness = ln_witness.div(ln2());

    let ln_20 = P2::from_u64(20).ln();
    let ln_2nn = P2::from_u64(2 * n).ln().add(&ln_witness);
    let conp_eps = ln_20
        .add(&ln_2nn.ln().mul_i(k_i))
        .add(
            &P2::from_u64(k as u64)
                .ln()
                .add(&ln_n.ln())
                .sub(&ln_witness)
                .div_i(2),
        )
        .div(ln2());
    let conp_threshold = ln_20
        .add(&ln_witness.ln().sub(&ln_witness).div_i(2))
        .div(ln2());

    let time_base = P2::from_u64(100)
        .mul_i(k_i)
        .mul(&nf)
        .mul(&nf)
        .mul(&nf)
        .mul(&ln_n);
    let ln_time_base = time_base.ln();
    let conp_time_base = ln_time_base.div(ln2());
    let conp_time_2k = ln_time_base.mul_i(2 * k_i).div(ln2());

    // coma with alpha^2 = beta^2 = 2/gamma = 2q/p:
    // log2 N = 10 alpha^2 n and log2 trials = 2 alpha^2 n are exact
    // rationals; threshold log2 = -pi alpha^2 n / ln 2 - 1.
    let a2 = P2::from_ratio(2 * q, p);
    let coma_witness = a2.mul(&nf).mul_i(10);
    let coma_trials = a2.mul(&nf).mul_i(2);
    let coma_threshold = pi()
        .mul(&a2)
        .mul(&nf)
        .div(ln2())
        .neg()
        .sub(&P2::from_u64(1));

    OracleCell {
        gg_general: gg_general.to_f64(),
        gg_l2: gg_l2.to_f64(),
        conp_witness: conp_witness.to_f64(),
        conp_eps: conp_eps.to_f64(),
        conp_threshold: conp_threshold.to_f64(),
        conp_time_2k: conp_time_2k.to_f64(),
        conp_time_base: conp_time_base.to_f64(),
        coma_witness: coma_witness.to_f64(),
        coma_trials: coma_trials.to_f64(),
        coma_threshold: coma_threshold.to_f64(),
    }
}
