use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::field::Field;
use super::ratfn::RatFn;
use crate::error::{Error, Result};

/// An exact field element.
///
/// The operator impls panic on descriptor mismatch or division by zero; the
/// `checked_*` methods report those as errors instead.
#[derive(Clone, Debug)]
pub enum Scalar {
    Q(BigRational),
    Fp { v: u64, p: u64 },
    Ff(Box<RatFn>),
}

impl PartialEq for Scalar {
    fn eq(&self, o: &Scalar) -> bool {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => a == b,
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, p: q }) => a == b && p == q,
            (Scalar::Ff(a), Scalar::Ff(b)) => a.same_value(b),
            _ => false,
        }
    }
}

impl Eq for Scalar {}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

impl Scalar {
    pub fn fp(v: u64, p: u64) -> Scalar {
        Scalar::Fp { v: v % p, p }
    }

    pub fn rational(n: i64, d: i64) -> Scalar {
        assert!(d != 0, "zero denominator");
        Scalar::Q(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Integer `n` in the field `f`.
    pub fn from_i64(n: i64, f: &Field) -> Scalar {
        f.from_i64(n)
    }

    pub fn field(&self) -> Field {
        match self {
            Scalar::Q(_) => Field::Q,
            Scalar::Fp { p, .. } => Field::Fp(*p),
            Scalar::Ff(r) => Field::Ff(r.ring.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(a) => a.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
            Scalar::Ff(r) => r.num.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(a) => a.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
            Scalar::Ff(r) => r.is_one(),
        }
    }

    pub fn zero_like(&self) -> Scalar {
        self.field().zero()
    }

    pub fn one_like(&self) -> Scalar {
        self.field().one()
    }

    /// Residue for prime-field elements.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Fp { v, .. } => Some(*v),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Q(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_ratfn(&self) -> Option<&RatFn> {
        match self {
            Scalar::Ff(r) => Some(r),
            _ => None,
        }
    }

    /// Small integer value, when the element is one.
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Scalar::Q(a) if a.is_integer() => a.numer().to_i64(),
            Scalar::Fp { v, .. } => i64::try_from(*v).ok(),
            Scalar::Ff(r) => r.as_constant().and_then(|c| c.to_i64()),
            _ => None,
        }
    }

    /// Positivity for rationals; `None` elsewhere.
    pub fn is_positive(&self) -> Option<bool> {
        match self {
            Scalar::Q(a) => Some(a.is_positive()),
            _ => None,
        }
    }

    fn mismatch(&self, o: &Scalar) -> Error {
        Error::DescriptorMismatch(format!("{} vs {}", self.field(), o.field()))
    }

    pub fn checked_add(&self, o: &Scalar) -> Result<Scalar> {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Ok(Scalar::Q(a + b)),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, p: q }) if p == q => {
                let s = a + b;
                Ok(Scalar::Fp { v: if s >= *p { s - p } else { s }, p: *p })
            }
            (Scalar::Ff(a), Scalar::Ff(b)) if a.ring == b.ring => Ok(Scalar::Ff(Box::new(a.add(b)))),
            _ => Err(self.mismatch(o)),
        }
    }

    pub fn checked_sub(&self, o: &Scalar) -> Result<Scalar> {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Ok(Scalar::Q(a - b)),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, p: q }) if p == q => {
                Ok(Scalar::Fp { v: if a >= b { a - b } else { a + p - b }, p: *p })
            }
            (Scalar::Ff(a), Scalar::Ff(b)) if a.ring == b.ring => Ok(Scalar::Ff(Box::new(a.sub(b)))),
            _ => Err(self.mismatch(o)),
        }
    }

    pub fn checked_mul(&self, o: &Scalar) -> Result<Scalar> {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Ok(Scalar::Q(a * b)),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, p: q }) if p == q => Ok(Scalar::Fp { v: mulmod(*a, *b, *p), p: *p }),
            (Scalar::Ff(a), Scalar::Ff(b)) if a.ring == b.ring => Ok(Scalar::Ff(Box::new(a.mul(b)))),
            _ => Err(self.mismatch(o)),
        }
    }

    pub fn checked_inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Q(a) => Scalar::Q(a.recip()),
            Scalar::Fp { v, p } => Scalar::Fp { v: powmod(*v, p - 2, *p), p: *p },
            Scalar::Ff(r) => Scalar::Ff(Box::new(r.inv())),
        })
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match (self, o) {
            (Scalar::Ff(a), Scalar::Ff(b)) if a.ring == b.ring => Ok(Scalar::Ff(Box::new(a.div(b)))),
            _ => self.checked_mul(&o.checked_inv()?),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { v, p } => Scalar::Fp { v: if *v == 0 { 0 } else { p - v }, p: *p },
            Scalar::Ff(r) => Scalar::Ff(Box::new(r.neg())),
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        self.checked_add(o).expect("scalar add")
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.checked_sub(o).expect("scalar sub")
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        self.checked_mul(o).expect("scalar mul")
    }

    pub fn div(&self, o: &Scalar) -> Scalar {
        self.checked_div(o).expect("scalar div")
    }

    pub fn inv(&self) -> Scalar {
        self.checked_inv().expect("scalar inverse")
    }

    pub fn pow(&self, k: u32) -> Scalar {
        let mut r = self.one_like();
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Numerator total degree for function-field values, 0 otherwise.
    pub fn degree(&self) -> usize {
        match self {
            Scalar::Ff(r) => r.num.total_degree().max(r.den.total_degree()),
            _ => 0,
        }
    }

    /// Rough size used for pivot selection.
    pub fn weight(&self) -> usize {
        match self {
            Scalar::Q(a) => (a.numer().bits() + a.denom().bits()) as usize,
            Scalar::Fp { .. } => 1,
            Scalar::Ff(r) => 64 * (r.num.total_degree() + r.den.total_degree()) + r.num.len() + r.den.len(),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                Scalar::$f(self, o)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                Scalar::$f(&self, &o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                Scalar::$f(&self, o)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(&self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(a) => {
                if a.is_integer() {
                    write!(f, "{}", a.numer())
                } else {
                    write!(f, "{}/{}", a.numer(), a.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
            Scalar::Ff(r) => write!(f, "{r}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_ops() {
        let f = Field::Fp(7);
        let a = f.from_i64(3);
        let b = f.from_i64(5);
        assert_eq!(&a * &b, f.one());
        assert_eq!((&a / &b) * &b, a);
        assert_eq!((-&a) + a.clone(), f.zero());
    }

    #[test]
    fn rational_ops() {
        let a = Scalar::rational(2, 3);
        let b = Scalar::rational(1, 6);
        assert_eq!(a + b, Scalar::rational(5, 6));
    }

    #[test]
    fn errors() {
        let z = Field::Q.zero();
        assert_eq!(Field::Q.one().checked_div(&z), Err(Error::DivisionByZero));
        assert!(matches!(Field::Q.one().checked_add(&Field::Fp(3).one()), Err(Error::DescriptorMismatch(_))));
    }
}
