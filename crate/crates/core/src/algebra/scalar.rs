//! The coefficient field: exact Gaussian rationals or high-precision complex floats.

use std::fmt;

use super::bigfloat::{BigFloat, DEFAULT_PREC};
use super::rat::Rat;
use super::AlgebraError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Exact { re: Rat, im: Rat },
    Float { re: BigFloat, im: BigFloat },
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Exact { re: Rat::ZERO, im: Rat::ZERO }
    }

    pub fn one() -> Scalar {
        Scalar::from_int(1)
    }

    pub fn i() -> Scalar {
        Scalar::Exact { re: Rat::ZERO, im: Rat::ONE }
    }

    pub fn from_int(n: i64) -> Scalar {
        Scalar::Exact { re: Rat::from_int(n), im: Rat::ZERO }
    }

    pub fn from_rat(r: Rat) -> Scalar {
        Scalar::Exact { re: r, im: Rat::ZERO }
    }

    pub fn exact(re: Rat, im: Rat) -> Scalar {
        Scalar::Exact { re, im }
    }

    /// Gaussian integer `a + b i`.
    pub fn gauss(a: i64, b: i64) -> Scalar {
        Scalar::Exact { re: Rat::from_int(a), im: Rat::from_int(b) }
    }

    /// `p/q + (r/t) i`.
    pub fn frac(p: i64, q: i64, r: i64, t: i64) -> Scalar {
        Scalar::Exact { re: Rat::new(p, q), im: Rat::new(r, t) }
    }

    pub fn float(re: BigFloat, im: BigFloat) -> Scalar {
        let p = re.prec().max(im.prec());
        Scalar::Float { re: re.with_prec(p), im: im.with_prec(p) }
    }

    pub fn from_f64(re: f64, im: f64) -> Scalar {
        Scalar::float(BigFloat::from_f64(re, DEFAULT_PREC), BigFloat::from_f64(im, DEFAULT_PREC))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact { .. })
    }

    pub fn precision(&self) -> Option<u32> {
        match self {
            Scalar::Exact { .. } => None,
            Scalar::Float { re, .. } => Some(re.prec()),
        }
    }

    /// Converts to the float backend at the given precision.
    pub fn to_float(&self, prec: u32) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Float {
                re: BigFloat::from_rat(re, prec),
                im: BigFloat::from_rat(im, prec),
            },
            Scalar::Float { re, im } => Scalar::Float { re: re.with_prec(prec), im: im.with_prec(prec) },
        }
    }

    fn float_parts(&self, prec: u32) -> (BigFloat, BigFloat) {
        match self.to_float(prec) {
            Scalar::Float { re, im } => (re, im),
            Scalar::Exact { .. } => unreachable!(),
        }
    }

    fn joint_prec(&self, o: &Scalar) -> u32 {
        match (self.precision(), o.precision()) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => DEFAULT_PREC,
        }
    }

    /// Exact zero on the exact backend, bitwise zero on the float backend.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => re.is_zero() && im.is_zero(),
            Scalar::Float { re, im } => re.is_zero() && im.is_zero(),
        }
    }

    /// Scale-relative zero test: exact on the exact backend, otherwise
    /// `|x| < 1e-30 * (1 + scale)`.
    pub fn is_negligible(&self, scale: f64) -> bool {
        match self {
            Scalar::Exact { .. } => self.is_zero(),
            Scalar::Float { .. } => self.abs_f64() < 1e-30 * (1.0 + scale),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => re.is_one() && im.is_zero(),
            Scalar::Float { .. } => false,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Exact { im, .. } => im.is_zero(),
            Scalar::Float { im, .. } => im.is_zero(),
        }
    }

    pub fn re(&self) -> Scalar {
        match self {
            Scalar::Exact { re, .. } => Scalar::from_rat(re.clone()),
            Scalar::Float { re, im } => Scalar::Float { re: re.clone(), im: BigFloat::zero(im.prec()) },
        }
    }

    pub fn im(&self) -> Scalar {
        match self {
            Scalar::Exact { im, .. } => Scalar::from_rat(im.clone()),
            Scalar::Float { re, im } => Scalar::Float { re: im.clone(), im: BigFloat::zero(re.prec()) },
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Exact { re: re.clone(), im: im.neg() },
            Scalar::Float { re, im } => Scalar::Float { re: re.clone(), im: im.neg() },
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Exact { re: re.neg(), im: im.neg() },
            Scalar::Float { re, im } => Scalar::Float { re: re.neg(), im: im.neg() },
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) => {
                Scalar::Exact { re: a.add(c), im: b.add(d) }
            }
            _ => {
                let p = self.joint_prec(o);
                let (a, b) = self.float_parts(p);
                let (c, d) = o.float_parts(p);
                Scalar::Float { re: a.add(&c), im: b.add(&d) }
            }
        }
    }

    pub fn add_assign(&mut self, o: &Scalar) {
        if let (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) = (&mut *self, o) {
            if !c.is_zero() {
                *a = a.add(c);
            }
            if !d.is_zero() {
                *b = b.add(d);
            }
            return;
        }
        *self = self.add(o);
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact { re: a, im: b }, Scalar::Exact { re: c, im: d }) => {
                if b.is_zero() && d.is_zero() {
                    return Scalar::Exact { re: a.mul(c), im: Rat::ZERO };
                }
                if b.is_zero() {
                    return Scalar::Exact { re: a.mul(c), im: a.mul(d) };
                }
                if d.is_zero() {
                    return Scalar::Exact { re: a.mul(c), im: b.mul(c) };
                }
                if a.is_zero() && c.is_zero() {
                    return Scalar::Exact { re: b.mul(d).neg(), im: Rat::ZERO };
                }
                Scalar::Exact { re: a.mul(c).sub(&b.mul(d)), im: a.mul(d).add(&b.mul(c)) }
            }
            _ => {
                let p = self.joint_prec(o);
                let (a, b) = self.float_parts(p);
                let (c, d) = o.float_parts(p);
                Scalar::Float { re: a.mul(&c).sub(&b.mul(&d)), im: a.mul(&d).add(&b.mul(&c)) }
            }
        }
    }

    pub fn scale_int(&self, k: i64) -> Scalar {
        self.mul(&Scalar::from_int(k))
    }

    /// `|x|^2`, real.
    pub fn norm_sqr(&self) -> Scalar {
        self.mul(&self.conj()).re()
    }

    pub fn inv(&self) -> Result<Scalar, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        match self {
            Scalar::Exact { re, im } => {
                let n = re.mul(re).add(&im.mul(im));
                Ok(Scalar::Exact { re: re.div(&n), im: im.neg().div(&n) })
            }
            Scalar::Float { re, im } => {
                let n = re.mul(re).add(&im.mul(im));
                Ok(Scalar::Float { re: re.div(&n), im: im.neg().div(&n) })
            }
        }
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar, AlgebraError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, k: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn re_f64(&self) -> f64 {
        match self {
            Scalar::Exact { re, .. } => re.to_f64(),
            Scalar::Float { re, .. } => re.to_f64(),
        }
    }

    pub fn im_f64(&self) -> f64 {
        match self {
            Scalar::Exact { im, .. } => im.to_f64(),
            Scalar::Float { im, .. } => im.to_f64(),
        }
    }

    pub fn abs_f64(&self) -> f64 {
        self.re_f64().hypot(self.im_f64())
    }

    /// Real part as an exact rational, when exact.
    pub fn re_rat(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact { re, .. } => Some(re),
            Scalar::Float { .. } => None,
        }
    }

    pub fn im_rat(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact { im, .. } => Some(im),
            Scalar::Float { .. } => None,
        }
    }

    /// Sign of a real scalar: exact for exact values, tolerance-based otherwise.
    pub fn real_sign(&self, scale: f64) -> i32 {
        match self {
            Scalar::Exact { re, .. } => re.signum(),
            Scalar::Float { re, .. } => {
                if re.to_f64().abs() < 1e-30 * (1.0 + scale) {
                    0
                } else {
                    re.signum()
                }
            }
        }
    }

    /// Square root of a non-negative real scalar; exact when the value is a
    /// rational square.
    pub fn sqrt_real(&self) -> Scalar {
        match self {
            Scalar::Exact { re, im } if im.is_zero() => match re.sqrt_exact() {
                Some(r) => Scalar::from_rat(r),
                None => Scalar::from_rat(re.clone()).to_float(DEFAULT_PREC).sqrt_real(),
            },
            _ => {
                let p = self.precision().unwrap_or(DEFAULT_PREC);
                let (re, _) = self.float_parts(p);
                let re = if re.signum() < 0 { BigFloat::zero(p) } else { re };
                Scalar::Float { re: re.sqrt(), im: BigFloat::zero(p) }
            }
        }
    }

    /// Real cube root of a real scalar; exact when possible.
    pub fn cbrt_real(&self) -> Scalar {
        match self {
            Scalar::Exact { re, im } if im.is_zero() => match re.root_exact(3) {
                Some(r) => Scalar::from_rat(r),
                None => Scalar::from_rat(re.clone()).to_float(DEFAULT_PREC).cbrt_real(),
            },
            _ => {
                let p = self.precision().unwrap_or(DEFAULT_PREC);
                let (re, _) = self.float_parts(p);
                Scalar::Float { re: re.cbrt(), im: BigFloat::zero(p) }
            }
        }
    }

    /// `|x|`, exact when `|x|^2` is a rational square.
    pub fn abs(&self) -> Scalar {
        self.norm_sqr().sqrt_real()
    }

    /// Principal complex square root (non-negative real part; on the cut, the
    /// root with non-negative imaginary part). Exact when one exists among
    /// Gaussian rationals.
    pub fn sqrt(&self) -> Scalar {
        if self.is_zero() {
            return self.clone();
        }
        let r = self.abs();
        let half = Scalar::from_rat(Rat::new(1, 2));
        let a = r.add(&self.re()).mul(&half).sqrt_real();
        let b = r.sub(&self.re()).mul(&half).sqrt_real();
        let sign = match self {
            Scalar::Exact { im, .. } => im.signum(),
            Scalar::Float { im, .. } => im.signum(),
        };
        let b = if sign < 0 { b.neg() } else { b };
        a.add(&b.mul(&Scalar::i()))
    }

    /// The three complex cube roots, exact when the principal one is. The
    /// principal root is computed in polar form on the float backend.
    pub fn cube_roots(&self) -> [Scalar; 3] {
        let half = Scalar::from_rat(Rat::new(1, 2));
        let omega = half.neg().add(&Scalar::i().mul(&Scalar::from_int(3).sqrt_real()).mul(&half));
        let principal = self.principal_cbrt();
        let r1 = principal.mul(&omega);
        let r2 = r1.mul(&omega);
        [principal, r1, r2]
    }

    fn principal_cbrt(&self) -> Scalar {
        if self.is_real() {
            return self.cbrt_real();
        }
        // Newton iteration in high precision seeded from f64.
        let (x, y) = (self.re_f64(), self.im_f64());
        let r = x.hypot(y).cbrt();
        let t = y.atan2(x) / 3.0;
        let mut z = Scalar::from_f64(r * t.cos(), r * t.sin());
        let target = self.to_float(DEFAULT_PREC);
        let three = Scalar::from_int(3);
        for _ in 0..12 {
            let z2 = z.mul(&z);
            let num = z2.mul(&z).sub(&target);
            let den = z2.mul(&three);
            z = z.sub(&num.div(&den).expect("nonzero derivative"));
        }
        z
    }

    /// Argument in `[0, 2π)` as f64; used only for ordering.
    pub fn arg_f64(&self) -> f64 {
        let a = self.im_f64().atan2(self.re_f64());
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    /// True when `self` and `o` agree exactly, or within relative tolerance
    /// `rel` when either is a float.
    pub fn approx_eq(&self, o: &Scalar, rel: f64) -> bool {
        if self.is_exact() && o.is_exact() {
            return self == o;
        }
        let d = self.sub(o).abs_f64();
        d <= rel * (1.0 + self.abs_f64().max(o.abs_f64()))
    }

    /// Snaps a float to the nearest Gaussian rational with small denominator
    /// when that value is within `rel` of it. Exact scalars are returned as is.
    pub fn snap(&self, rel: f64) -> Scalar {
        if self.is_exact() {
            return self.clone();
        }
        let part = |v: f64| -> Option<Rat> {
            for d in 1..=64i64 {
                let n = (v * d as f64).round();
                if n.abs() < 1e15 && (n / d as f64 - v).abs() <= rel * (1.0 + v.abs()) {
                    return Some(Rat::new(n as i64, d));
                }
            }
            None
        };
        match (part(self.re_f64()), part(self.im_f64())) {
            (Some(a), Some(b)) => {
                let cand = Scalar::exact(a, b);
                if cand.approx_eq(self, rel) {
                    cand
                } else {
                    self.clone()
                }
            }
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact { re, im } => {
                if im.signum() < 0 {
                    write!(f, "({re}-{}*i)", im.neg())
                } else {
                    write!(f, "({re}+{im}*i)")
                }
            }
            Scalar::Float { re, im } => {
                let (a, b) = (re.to_f64(), im.to_f64());
                if b < 0.0 {
                    write!(f, "({a:e}-{:e}*i)", -b)
                } else {
                    write!(f, "({a:e}+{b:e}*i)")
                }
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
