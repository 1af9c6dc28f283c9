//! Fixed-point high-precision arithmetic (60 decimal digits) for the cost
//! formulas in the tradeoff tables. Parameter formulas like
//! (20 k^2 n^2 log n)^(2k+1) overflow f64 and accumulate ulp error when
//! evaluated naively; the tables instead compute in this representation and
//! round once at the end, so emitted values are reproducible bit-for-bit.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::sync::OnceLock;

/// Decimal digits carried by every `Px` value.
pub const DIGITS: u32 = 60;

/// Fixed-point number: value = mantissa * 10^-DIGITS.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Px(BigInt);

fn scale() -> &'static BigInt {
    static SCALE: OnceLock<BigInt> = OnceLock::new();
    SCALE.get_or_init(|| BigInt::from(10u32).pow(DIGITS))
}

impl Px {
    pub fn from_u64(v: u64) -> Px {
        Px(BigInt::from(v) * scale())
    }

    pub fn from_i64(v: i64) -> Px {
        Px(BigInt::from(v) * scale())
    }

    /// Exact ratio p/q.
    pub fn from_ratio(p: i64, q: i64) -> Px {
        assert!(q != 0);
        Px(BigInt::from(p) * scale() / BigInt::from(q))
    }

    pub fn zero() -> Px {
        Px(BigInt::zero())
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn add(&self, o: &Px) -> Px {
        Px(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Px) -> Px {
        Px(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Px) -> Px {
        Px(&self.0 * &o.0 / scale())
    }

    pub fn div(&self, o: &Px) -> Px {
        assert!(!o.0.is_zero());
        Px(&self.0 * scale() / &o.0)
    }

    pub fn mul_int(&self, k: i64) -> Px {
        Px(&self.0 * BigInt::from(k))
    }

    pub fn div_int(&self, k: i64) -> Px {
        Px(&self.0 / BigInt::from(k))
    }

    pub fn neg(&self) -> Px {
        Px(-&self.0)
    }

    /// Correctly rounded f64 via the decimal string (Rust float parsing is
    /// correctly rounded).
    pub fn to_f64(&self) -> f64 {
        self.to_decimal_string().parse::<f64>().expect("decimal parse")
    }

    pub fn to_decimal_string(&self) -> String {
        let neg = self.0.is_negative();
        let mag = self.0.magnitude().to_string();
        let digits = DIGITS as usize;
        let padded = if mag.len() <= digits {
            format!("0.{}{}", "0".repeat(digits - mag.len()), mag)
        } else {
            let (int_part, frac_part) = mag.split_at(mag.len() - digits);
            format!("{int_part}.{frac_part}")
        };
        if neg {
            format!("-{padded}")
        } else {
            padded
        }
    }

    /// Natural logarithm. Argument is normalized to m * 2^e with m in [1, 2)
    /// and ln m evaluated through the atanh series
    /// ln m = 2 atanh((m-1)/(m+1)), whose ratio is at most 1/3.
    pub fn ln(&self) -> Px {
        assert!(self.is_positive(), "ln of non-positive value");
        let two = Px::from_u64(2);
        let one = Px::from_u64(1);
        let mut m = self.clone();
        let mut e: i64 = 0;
        while m >= two {
            m = m.div_int(2);
            e += 1;
        }
        while m < one {
            m = m.mul_int(2);
            e -= 1;
        }
        let z = m.sub(&one).div(&m.add(&one));
        let mut term = z.clone(); // z^(2i+1)
        let z2 = z.mul(&z);
        let mut acc = term.clone();
        let mut i = 1i64;
        loop {
            term = term.mul(&z2);
            let contrib = term.div_int(2 * i + 1);
            if contrib.0.is_zero() {
                break;
            }
            acc = acc.add(&contrib);
            i += 1;
            assert!(i < 10_000, "ln series did not converge");
        }
        let ln_m = acc.mul_int(2);
        ln_m.add(&ln2().mul_int(e))
    }

    pub fn log2(&self) -> Px {
        self.ln().div(ln2())
    }

    /// Square root by Newton iteration on the scaled integer, seeded above
    /// the root so the iteration is monotone decreasing.
    pub fn sqrt(&self) -> Px {
        assert!(!self.0.is_negative());
        if self.0.is_zero() {
            return Px::zero();
        }
        let target = &self.0 * scale();
        let mut x: BigInt = BigInt::from(1u32) << (target.bits() / 2 + 1);
        for _ in 0..2_000 {
            let next: BigInt = (&x + &target / &x) / 2;
            if *(&next - &x).magnitude() <= num_bigint::BigUint::from(1u32) {
                return Px(next);
            }
            x = next;
        }
        Px(x)
    }
}

/// ln 2 = 2 atanh(1/3), memoized.
pub fn ln2() -> &'static Px {
    static LN2: OnceLock<Px> = OnceLock::new();
    LN2.get_or_init(|| {
        let z = Px::from_ratio(1, 3);
        let z2 = z.mul(&z);
        let mut term = z.clone();
        let mut acc = term.clone();
        let mut i = 1i64;
        loop {
            term = term.mul(&z2);
            let contrib = term.div_int(2 * i + 1);
            if contrib.0.is_zero() {
                break;
            }
            acc = acc.add(&contrib);
            i += 1;
        }
        acc.mul_int(2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_against_f64() {
        assert!((ln2().to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn ln_and_log2_spot_values() {
        let e20 = Px::from_u64(20);
        assert!((e20.ln().to_f64() - 20f64.ln()).abs() < 1e-14);
        assert!((e20.log2().to_f64() - 20f64.log2()).abs() < 1e-14);
        let half = Px::from_ratio(1, 2);
        assert!((half.ln().to_f64() + std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn known_digit_string() {
        // ln 10 to 30 digits: 2.302585092994045684017991454684...
        let ln10 = Px::from_u64(10).ln().to_decimal_string();
        assert!(ln10.starts_with("2.30258509299404568401799145468"));
    }

    #[test]
    fn sqrt_spot() {
        let two = Px::from_u64(2);
        let s = two.sqrt();
        assert!((s.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let back = s.mul(&s);
        assert!((back.to_f64() - 2.0).abs() < 1e-50_f64.max(1e-15));
    }

    #[test]
    fn round_trip_f64() {
        let x = Px::from_ratio(355, 113);
        let f = x.to_f64();
        assert!((f - 355.0 / 113.0).abs() < 1e-15);
    }
}
