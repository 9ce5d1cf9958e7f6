use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};

use super::field::BaseField;
use super::mono::Mono;
use super::scalar::Scalar;

/// Sparse multivariate polynomial over ℚ or F_p.
///
/// Terms are kept sorted in decreasing grlex order with no zero coefficients.
/// Coefficients are `Scalar::Q` or `Scalar::Fp`, never function-field values.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: Vec<(Mono, Scalar)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn constant(c: Scalar) -> Poly {
        debug_assert!(!matches!(c, Scalar::Ff(_)));
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Mono::one(), c)] }
        }
    }

    pub fn one(base: &BaseField) -> Poly {
        Poly::constant(base.one())
    }

    pub fn monomial(m: Mono, c: Scalar) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    pub fn var(i: usize, base: &BaseField) -> Poly {
        Poly::monomial(Mono::var(i), base.one())
    }

    /// Builds from arbitrary terms, merging duplicates and dropping zeros.
    pub fn from_terms(terms: Vec<(Mono, Scalar)>) -> Poly {
        let mut acc: HashMap<Mono, Scalar> = HashMap::new();
        for (m, c) in terms {
            match acc.get_mut(&m) {
                Some(v) => *v = v.add(&c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let mut t: Vec<(Mono, Scalar)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        t.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms: t }
    }

    pub fn terms(&self) -> &[(Mono, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Returns the constant if the polynomial has degree ≤ 0.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.as_slice() {
            [] => None,
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn leading(&self) -> Option<&(Mono, Scalar)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> usize {
        self.terms.first().map_or(0, |(m, _)| m.degree())
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some((m, _)) => self.terms.iter().all(|(n, _)| n.degree() == m.degree()),
        }
    }

    /// Coefficient of a given monomial (zero if absent; needs the base for zero).
    pub fn coeff(&self, m: &Mono) -> Option<&Scalar> {
        self.terms
            .binary_search_by(|(n, _)| m.cmp(n))
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect() }
    }

    pub fn scale(&self, k: &Scalar) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.mul(k))).collect() }
    }

    pub fn mul_mono(&self, mono: &Mono) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.mul(mono), c.clone())).collect() }
    }

    fn merge(&self, o: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &o.terms[j];
            match ma.cmp(mb) {
                std::cmp::Ordering::Greater => {
                    out.push((*ma, ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push((*mb, if negate { cb.neg() } else { cb.clone() }));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { ca.sub(cb) } else { ca.add(cb) };
                    if !c.is_zero() {
                        out.push((*ma, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        for (m, c) in &o.terms[j..] {
            out.push((*m, if negate { c.neg() } else { c.clone() }));
        }
        Poly { terms: out }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.merge(o, false)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.merge(o, true)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return Poly {
                terms: o.terms.iter().map(|(n, d)| (m.mul(n), c.mul(d))).filter(|(_, d)| !d.is_zero()).collect(),
            };
        }
        if o.terms.len() == 1 {
            return o.mul(self);
        }
        let mut acc: HashMap<Mono, Scalar> = HashMap::with_capacity(self.terms.len() * o.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = ma.mul(mb);
                let p = ca.mul(cb);
                match acc.get_mut(&m) {
                    Some(v) => *v = v.add(&p),
                    None => {
                        acc.insert(m, p);
                    }
                }
            }
        }
        let mut t: Vec<(Mono, Scalar)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        t.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { terms: t }
    }

    pub fn pow(&self, k: u32, base: &BaseField) -> Poly {
        let mut r = Poly::one(base);
        let mut b = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.terms.len() == 1 {
            let inv = dc.inv();
            let mut out = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                if !dm.divides(m) {
                    return None;
                }
                out.push((dm.div_of(m), c.mul(&inv)));
            }
            return Some(Poly { terms: out });
        }
        let inv = dc.inv();
        let mut r: BTreeMap<Mono, Scalar> = self.terms.iter().cloned().collect();
        let mut q: Vec<(Mono, Scalar)> = Vec::new();
        while let Some((rm, rc)) = r.pop_last() {
            if !dm.divides(&rm) || rm.degree() < dm.degree() {
                return None;
            }
            let m = dm.div_of(&rm);
            let c = rc.mul(&inv);
            for (tm, tc) in &d.terms[1..] {
                let key = tm.mul(&m);
                let delta = tc.mul(&c);
                match r.entry(key) {
                    Entry::Occupied(mut e) => {
                        let v = e.get().sub(&delta);
                        if v.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = v;
                        }
                    }
                    Entry::Vacant(e) => {
                        e.insert(delta.neg());
                    }
                }
            }
            q.push((m, c));
        }
        Some(Poly { terms: q })
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.iter();
        match it.next() {
            None => Mono::one(),
            Some((m, _)) => it.fold(*m, |g, (n, _)| g.gcd(n)),
        }
    }

    /// Divides every term by a monomial that divides all of them.
    pub fn div_mono(&self, g: &Mono) -> Poly {
        if g.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (g.div_of(m), c.clone())).collect() }
    }

    /// Number of variables actually appearing.
    pub fn support_len(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.support_len()).max().unwrap_or(0)
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(i)).max().unwrap_or(0)
    }

    /// True when every term has even exponent in variable `i`.
    pub fn even_in(&self, i: usize) -> bool {
        self.terms.iter().all(|(m, _)| m.exp(i) % 2 == 0)
    }

    /// Substitutes polynomials for the variables `k..`, keeping `0..k`.
    pub fn substitute_tail(&self, k: usize, vals: &[Poly], base: &BaseField) -> Poly {
        let mut cache: HashMap<(usize, u32), Poly> = HashMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::monomial(m.truncate(k), c.clone());
            for (j, v) in vals.iter().enumerate() {
                let e = m.exp(k + j);
                if e > 0 {
                    let pw = cache.entry((j, e)).or_insert_with(|| v.pow(e, base)).clone();
                    t = t.mul(&pw);
                }
            }
            out = out.add(&t);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::from_i64(n, &super::super::Field::Q)
    }

    #[test]
    fn expand_square() {
        let b = BaseField::Q;
        let x = Poly::var(0, &b);
        let y = Poly::var(1, &b);
        let s = x.add(&y);
        let sq = s.mul(&s);
        let expect = x.mul(&x).add(&x.mul(&y).scale(&q(2))).add(&y.mul(&y));
        assert_eq!(sq, expect);
        assert!(sq.is_homogeneous());
        assert_eq!(sq.total_degree(), 2);
    }

    #[test]
    fn exact_division() {
        let b = BaseField::Fp(5);
        let x = Poly::var(0, &b);
        let y = Poly::var(1, &b);
        let a = x.add(&y);
        let c = x.sub(&y).add(&Poly::one(&b));
        let prod = a.mul(&c);
        assert_eq!(prod.div_exact(&a), Some(c.clone()));
        assert_eq!(prod.div_exact(&c), Some(a.clone()));
        assert_eq!(prod.add(&Poly::one(&b)).div_exact(&a), None);
    }
}
