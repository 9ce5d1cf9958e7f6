use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::mono::MAX_VARS;
use super::poly::Poly;
use super::ratfn::RatFn;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Coefficient field of a function field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BaseField {
    Q,
    Fp(u64),
}

impl BaseField {
    pub fn field(&self) -> Field {
        match self {
            BaseField::Q => Field::Q,
            BaseField::Fp(p) => Field::Fp(*p),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.field().zero()
    }

    pub fn one(&self) -> Scalar {
        self.field().one()
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            BaseField::Q => 0,
            BaseField::Fp(p) => *p,
        }
    }
}

/// `base(vars…)`; variables are indexed by position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionField {
    pub base: BaseField,
    pub vars: Vec<String>,
}

/// A field descriptor.
#[derive(Clone, Debug)]
pub enum Field {
    Q,
    Fp(u64),
    Ff(Arc<FunctionField>),
}

impl PartialEq for Field {
    fn eq(&self, o: &Field) -> bool {
        match (self, o) {
            (Field::Q, Field::Q) => true,
            (Field::Fp(a), Field::Fp(b)) => a == b,
            (Field::Ff(a), Field::Ff(b)) => Arc::ptr_eq(a, b) || **a == **b,
            _ => false,
        }
    }
}

impl Eq for Field {}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => write!(f, "Q"),
            Field::Fp(p) => write!(f, "Fp {p}"),
            Field::Ff(ff) => {
                match ff.base {
                    BaseField::Q => write!(f, "FF Q vars")?,
                    BaseField::Fp(p) => write!(f, "FF Fp {p} vars")?,
                }
                for v in &ff.vars {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl Field {
    /// Prime field; rejects composite or word-overflowing moduli.
    pub fn prime(p: u64) -> Result<Field> {
        if !super::is_prime(p) || p >= (1u64 << 62) {
            return Err(Error::PreconditionFailed(format!("{p} is not a supported prime")));
        }
        Ok(Field::Fp(p))
    }

    pub fn function_field(base: BaseField, vars: &[&str]) -> Result<Field> {
        Field::function_field_owned(base, vars.iter().map(|s| s.to_string()).collect())
    }

    pub fn function_field_owned(base: BaseField, vars: Vec<String>) -> Result<Field> {
        if let BaseField::Fp(p) = base {
            Field::prime(p)?;
        }
        if vars.len() > MAX_VARS {
            return Err(Error::TooManyVariables(vars.len()));
        }
        for (i, v) in vars.iter().enumerate() {
            if v.is_empty() || !v.chars().all(|c| c.is_alphanumeric() || c == '_') || v.chars().next().unwrap().is_ascii_digit() {
                return Err(Error::PreconditionFailed(format!("bad variable name {v:?}")));
            }
            if vars[..i].contains(v) {
                return Err(Error::PreconditionFailed(format!("duplicate variable {v}")));
            }
        }
        Ok(Field::Ff(Arc::new(FunctionField { base, vars })))
    }

    /// Rational function field over `self` with extra variables appended.
    pub fn extend(&self, new_vars: &[String]) -> Result<Field> {
        match self {
            Field::Q => Field::function_field_owned(BaseField::Q, new_vars.to_vec()),
            Field::Fp(p) => Field::function_field_owned(BaseField::Fp(*p), new_vars.to_vec()),
            Field::Ff(ff) => {
                let mut v = ff.vars.clone();
                v.extend(new_vars.iter().cloned());
                Field::function_field_owned(ff.base.clone(), v)
            }
        }
    }

    /// Fresh variable names `prefix1, prefix2, …` avoiding collisions.
    pub fn fresh_vars(&self, prefix: &str, count: usize) -> Vec<String> {
        let taken: Vec<String> = match self {
            Field::Ff(ff) => ff.vars.clone(),
            _ => Vec::new(),
        };
        let mut p = prefix.to_string();
        loop {
            let names: Vec<String> = (1..=count).map(|i| format!("{p}{i}")).collect();
            if names.iter().all(|n| !taken.contains(n)) {
                return names;
            }
            p.push('_');
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Q => 0,
            Field::Fp(p) => *p,
            Field::Ff(ff) => ff.base.characteristic(),
        }
    }

    /// Number of elements, `None` for infinite fields.
    pub fn order(&self) -> Option<u64> {
        match self {
            Field::Fp(p) => Some(*p),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    /// `#K > n`.
    pub fn larger_than(&self, n: usize) -> bool {
        match self.order() {
            Some(q) => q > n as u64,
            None => true,
        }
    }

    pub fn base(&self) -> BaseField {
        match self {
            Field::Q => BaseField::Q,
            Field::Fp(p) => BaseField::Fp(*p),
            Field::Ff(ff) => ff.base.clone(),
        }
    }

    pub fn vars(&self) -> &[String] {
        match self {
            Field::Ff(ff) => &ff.vars,
            _ => &[],
        }
    }

    pub fn nvars(&self) -> usize {
        self.vars().len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars().iter().position(|v| v == name)
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::from_integer(BigInt::from(n))),
            Field::Fp(p) => Scalar::fp(n.rem_euclid(*p as i64) as u64, *p),
            Field::Ff(ff) => Scalar::Ff(Box::new(RatFn::from_poly(ff.clone(), Poly::constant(ff.base.field().from_i64(n))))),
        }
    }

    pub fn from_ratio(&self, n: i64, d: i64) -> Result<Scalar> {
        self.from_i64(n).checked_div(&self.from_i64(d))
    }

    /// The `i`-th indeterminate.
    pub fn var(&self, i: usize) -> Scalar {
        match self {
            Field::Ff(ff) => {
                assert!(i < ff.vars.len(), "variable index out of range");
                Scalar::Ff(Box::new(RatFn::from_poly(ff.clone(), Poly::var(i, &ff.base))))
            }
            _ => panic!("field has no indeterminates"),
        }
    }

    pub fn ff(&self) -> Option<&Arc<FunctionField>> {
        match self {
            Field::Ff(ff) => Some(ff),
            _ => None,
        }
    }

    /// Every element of a finite field, in residue order.
    pub fn elements(&self) -> Option<Vec<Scalar>> {
        match self {
            Field::Fp(p) if *p <= 1 << 20 => Some((0..*p).map(|v| Scalar::fp(v, *p)).collect()),
            _ => None,
        }
    }

    /// Casts `s` (from this field or a subfield) into this field.
    pub fn embed(&self, s: &Scalar) -> Result<Scalar> {
        match (self, s) {
            (Field::Q, Scalar::Q(_)) => Ok(s.clone()),
            (Field::Fp(p), Scalar::Fp { p: q, .. }) if p == q => Ok(s.clone()),
            (Field::Fp(p), Scalar::Q(r)) => {
                let n = Scalar::fp(bigint_mod(r.numer(), *p), *p);
                let d = Scalar::fp(bigint_mod(r.denom(), *p), *p);
                n.checked_div(&d)
            }
            (Field::Ff(ff), Scalar::Q(_)) | (Field::Ff(ff), Scalar::Fp { .. }) => {
                let c = ff.base.field().embed(s)?;
                Ok(Scalar::Ff(Box::new(RatFn::from_poly(ff.clone(), Poly::constant(c)))))
            }
            (Field::Ff(ff), Scalar::Ff(r)) => {
                let src = &r.ring;
                if src.base == ff.base && src.vars.len() <= ff.vars.len() && ff.vars[..src.vars.len()] == src.vars[..] {
                    Ok(Scalar::Ff(Box::new(r.with_ring(ff.clone()))))
                } else {
                    Err(Error::DescriptorMismatch(format!("cannot embed {} into {}", s.field(), self)))
                }
            }
            _ => Err(Error::DescriptorMismatch(format!("cannot embed {} into {}", s.field(), self))),
        }
    }

    /// The subfield generated by the first `k` variables (the base field when `k = 0`).
    pub fn prefix(&self, k: usize) -> Field {
        match self {
            Field::Ff(ff) if k > 0 => {
                if k == ff.vars.len() {
                    self.clone()
                } else {
                    Field::Ff(Arc::new(FunctionField { base: ff.base.clone(), vars: ff.vars[..k].to_vec() }))
                }
            }
            Field::Ff(ff) => ff.base.field(),
            _ => self.clone(),
        }
    }
}

pub(crate) fn bigint_mod(n: &BigInt, p: u64) -> u64 {
    let r = n % BigInt::from(p);
    let r = if r < BigInt::from(0) { r + BigInt::from(p) } else { r };
    u64::try_from(r).expect("residue fits")
}
