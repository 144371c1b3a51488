//! Binary floating point with an arbitrary-precision mantissa.
//!
//! A value is `mant * 2^exp` with `|mant| < 2^prec`. Rounding is to nearest
//! on every operation. Only the handful of operations the witness builders
//! need are provided.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use super::rat::Rat;

pub const DEFAULT_PREC: u32 = 256;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

fn bitlen(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// Shift right with round-half-away-from-zero.
fn shr_round(x: &BigInt, k: u64) -> BigInt {
    if k == 0 {
        return x.clone();
    }
    let neg = x.is_negative();
    let a = x.abs();
    let half = BigInt::from(1) << (k - 1);
    let r = (a + half) >> k;
    if neg {
        -r
    } else {
        r
    }
}

impl BigFloat {
    pub fn zero(prec: u32) -> BigFloat {
        BigFloat { mant: BigInt::zero(), exp: 0, prec }
    }

    fn normalized(mant: BigInt, exp: i64, prec: u32) -> BigFloat {
        if mant.is_zero() {
            return BigFloat::zero(prec);
        }
        let excess = bitlen(&mant) - prec as i64;
        let (mut m, mut e) = if excess > 0 {
            (shr_round(&mant, excess as u64), exp + excess)
        } else {
            (mant, exp)
        };
        if bitlen(&m) > prec as i64 {
            m >>= 1u32;
            e += 1;
        }
        let tz = m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            m >>= tz;
            e += tz as i64;
        }
        BigFloat { mant: m, exp: e, prec }
    }

    pub fn from_rat(r: &Rat, prec: u32) -> BigFloat {
        let n = r.numer();
        let d = r.denom();
        if n.is_zero() {
            return BigFloat::zero(prec);
        }
        let shift = prec as i64 + 2 + bitlen(&d) - bitlen(&n);
        let shift = shift.max(0);
        let q = (n << shift as u64) / d;
        BigFloat::normalized(q, -shift, prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> BigFloat {
        if x == 0.0 {
            return BigFloat::zero(prec);
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & 0xfffffffffffff;
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1 << 52), e - 1075) };
        BigFloat::normalized(BigInt::from(sign) * BigInt::from(m), ex, prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> BigFloat {
        BigFloat::normalized(self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn neg(&self) -> BigFloat {
        BigFloat { mant: -self.mant.clone(), exp: self.exp, prec: self.prec }
    }

    pub fn abs(&self) -> BigFloat {
        BigFloat { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    /// Position of the leading bit: the value lies in `[2^(m-1), 2^m)`.
    fn magnitude(&self) -> i64 {
        bitlen(&self.mant) + self.exp
    }

    pub fn add(&self, o: &BigFloat) -> BigFloat {
        let prec = self.prec.max(o.prec);
        if self.is_zero() {
            return o.with_prec(prec);
        }
        if o.is_zero() {
            return self.with_prec(prec);
        }
        let gap = self.magnitude() - o.magnitude();
        if gap > prec as i64 + 4 {
            return self.with_prec(prec);
        }
        if -gap > prec as i64 + 4 {
            return o.with_prec(prec);
        }
        let e = self.exp.min(o.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &o.mant << (o.exp - e) as u64;
        BigFloat::normalized(a + b, e, prec)
    }

    pub fn sub(&self, o: &BigFloat) -> BigFloat {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BigFloat) -> BigFloat {
        let prec = self.prec.max(o.prec);
        BigFloat::normalized(&self.mant * &o.mant, self.exp + o.exp, prec)
    }

    pub fn div(&self, o: &BigFloat) -> BigFloat {
        assert!(!o.is_zero(), "float division by zero");
        let prec = self.prec.max(o.prec);
        if self.is_zero() {
            return BigFloat::zero(prec);
        }
        let shift = (prec as i64 + 2 + bitlen(&o.mant) - bitlen(&self.mant)).max(0);
        let q = (&self.mant << shift as u64) / &o.mant;
        BigFloat::normalized(q, self.exp - shift - o.exp, prec)
    }

    pub fn sqrt(&self) -> BigFloat {
        assert!(self.signum() >= 0, "sqrt of negative float");
        self.root(2)
    }

    pub fn cbrt(&self) -> BigFloat {
        self.root(3)
    }

    fn root(&self, n: u32) -> BigFloat {
        if self.is_zero() {
            return self.clone();
        }
        let n64 = n as i64;
        let want = n64 * (self.prec as i64 + 2);
        let mut shift = (want - bitlen(&self.mant)).max(0);
        while (self.exp - shift).rem_euclid(n64) != 0 {
            shift += 1;
        }
        let m = &self.mant << shift as u64;
        let r = m.nth_root(n);
        BigFloat::normalized(r, (self.exp - shift) / n64, self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let drop = (bitlen(&self.mant) - 60).max(0);
        let m = shr_round(&self.mant, drop as u64).to_f64().unwrap_or(f64::NAN);
        let e = self.exp + drop;
        if e > 2000 {
            return m * f64::INFINITY;
        }
        if e < -2000 {
            return 0.0;
        }
        m * 2f64.powi(e as i32)
    }

    /// Base-2 logarithm of the magnitude, approximate; `None` for zero.
    pub fn log2_abs(&self) -> Option<f64> {
        if self.is_zero() {
            return None;
        }
        let drop = (bitlen(&self.mant) - 60).max(0);
        let m = shr_round(&self.mant.abs(), drop as u64).to_f64().unwrap_or(1.0);
        Some(m.log2() + (self.exp + drop) as f64)
    }

    /// Exact rational value of this float.
    pub fn to_rat(&self) -> Rat {
        use num_rational::BigRational;
        if self.exp >= 0 {
            Rat::from_big(BigRational::from_integer(&self.mant << self.exp as u64))
        } else {
            Rat::from_big(BigRational::new(
                self.mant.clone(),
                BigInt::from(1) << (-self.exp) as u64,
            ))
        }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.sub(other).signum().cmp(&0))
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
