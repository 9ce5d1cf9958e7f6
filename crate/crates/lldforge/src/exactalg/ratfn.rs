use std::fmt;
use std::sync::Arc;

use super::field::{BaseField, FunctionField};
use super::poly::Poly;
use super::scalar::Scalar;

/// Element of a rational function field, `num / den` with `den ≠ 0`.
///
/// Only monomial factors, constant denominators and exact quotients are
/// cancelled; two values are compared by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RatFn {
    pub ring: Arc<FunctionField>,
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    pub fn from_poly(ring: Arc<FunctionField>, num: Poly) -> RatFn {
        let den = Poly::one(&ring.base);
        RatFn { ring, num, den }
    }

    pub fn new(ring: Arc<FunctionField>, num: Poly, den: Poly) -> RatFn {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFn { ring, num, den };
        r.normalize();
        r
    }

    pub fn base(&self) -> &BaseField {
        &self.ring.base
    }

    pub fn with_ring(&self, ring: Arc<FunctionField>) -> RatFn {
        RatFn { ring, num: self.num.clone(), den: self.den.clone() }
    }

    fn normalize(&mut self) {
        let base = self.ring.base.clone();
        if self.num.is_zero() {
            self.den = Poly::one(&base);
            return;
        }
        if let Some(c) = self.den.as_constant() {
            if !c.is_one() {
                self.num = self.num.scale(&c.inv());
                self.den = Poly::one(&base);
            }
            return;
        }
        let g = self.num.monomial_content().gcd(&self.den.monomial_content());
        if !g.is_one() {
            self.num = self.num.div_mono(&g);
            self.den = self.den.div_mono(&g);
        }
        if let Some(c) = self.den.as_constant() {
            self.num = self.num.scale(&c.inv());
            self.den = Poly::one(&base);
            return;
        }
        if let Some(q) = self.num.div_exact(&self.den) {
            self.num = q;
            self.den = Poly::one(&base);
            return;
        }
        if !self.num.is_constant() {
            if let Some(q) = self.den.div_exact(&self.num) {
                self.num = Poly::one(&base);
                self.den = q;
            }
        }
        let lc = self.den.leading().unwrap().1.clone();
        if !lc.is_one() {
            let inv = lc.inv();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num == self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.num.is_zero() {
            return Some(self.ring.base.zero());
        }
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n.div(&d))
    }

    pub fn same_value(&self, o: &RatFn) -> bool {
        if self.ring != o.ring {
            return false;
        }
        if self.den == o.den {
            return self.num == o.num;
        }
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(self.ring.clone(), self.num.add(&o.num), self.den.clone());
        }
        RatFn::new(
            self.ring.clone(),
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFn {
        RatFn { ring: self.ring.clone(), num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        if self.den.is_constant() && o.den.is_constant() {
            return RatFn::from_poly(self.ring.clone(), self.num.mul(&o.num));
        }
        RatFn::new(self.ring.clone(), self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn inv(&self) -> RatFn {
        RatFn::new(self.ring.clone(), self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RatFn) -> RatFn {
        RatFn::new(self.ring.clone(), self.num.mul(&o.den), self.den.mul(&o.num))
    }
}

fn fmt_poly(p: &Poly, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (k, (m, c)) in p.terms().iter().enumerate() {
        let mut cs = format!("{c}");
        let neg = cs.starts_with('-');
        if neg {
            cs.remove(0);
        }
        if k == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { "-" } else { "+" })?;
        }
        let mut parts: Vec<String> = Vec::new();
        if m.is_one() || cs != "1" {
            if cs.contains('/') && !m.is_one() {
                parts.push(format!("({cs})"));
            } else {
                parts.push(cs);
            }
        }
        for (i, v) in vars.iter().enumerate() {
            match m.exp(i) {
                0 => {}
                1 => parts.push(v.clone()),
                e => parts.push(format!("{v}^{e}")),
            }
        }
        write!(f, "{}", parts.join("*"))?;
    }
    Ok(())
}

/// Polynomial rendered with the given variable names.
pub fn poly_to_string(p: &Poly, vars: &[String]) -> String {
    struct D<'a>(&'a Poly, &'a [String]);
    impl fmt::Display for D<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_poly(self.0, self.1, f)
        }
    }
    D(p, vars).to_string()
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = &self.ring.vars;
        if self.den.is_constant() {
            if self.num.len() > 1 {
                write!(f, "(")?;
                fmt_poly(&self.num, vars, f)?;
                write!(f, ")")
            } else {
                fmt_poly(&self.num, vars, f)
            }
        } else {
            write!(f, "(")?;
            fmt_poly(&self.num, vars, f)?;
            write!(f, ")/(")?;
            fmt_poly(&self.den, vars, f)?;
            write!(f, ")")
        }
    }
}
