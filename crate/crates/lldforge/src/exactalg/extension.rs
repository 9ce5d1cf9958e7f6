//! Finite simple extensions `L = K[t]/(μ)` realised by structure constants.

use super::field::Field;
use super::mat::{Mat, Vector};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// `K[t]/(μ)` with `μ` monic irreducible of degree `d`, elements as
/// coefficient vectors on `1, t, …, t^{d-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleExtension {
    base: Field,
    /// Coefficients of `μ`, constant term first, leading 1 included.
    modulus: Vec<Scalar>,
}

impl SimpleExtension {
    /// Checks monicity and, over a finite base, irreducibility.
    pub fn new(base: &Field, modulus: Vec<Scalar>) -> Result<SimpleExtension> {
        if modulus.len() < 2 || !modulus.last().unwrap().is_one() {
            return Err(Error::PreconditionFailed("modulus must be monic of degree at least 1".into()));
        }
        let e = SimpleExtension { base: base.clone(), modulus };
        if base.is_finite() && !e.modulus_is_irreducible()? {
            return Err(Error::ReducibilityDetected("modulus has a proper factor".into()));
        }
        Ok(e)
    }

    /// First monic irreducible of degree `d` over `F_p` in lexicographic
    /// order of its low coefficients.
    pub fn find(p: u64, d: usize) -> Result<SimpleExtension> {
        let f = Field::prime(p)?;
        let total = crate::fpfast::pow_u128(p, d);
        for idx in 0..total.min(1 << 20) as u64 {
            let mut c: Vec<Scalar> = crate::fpfast::digits(idx, p, d).into_iter().map(|v| Scalar::fp(v, p)).collect();
            c.push(f.one());
            if let Ok(e) = SimpleExtension::new(&f, c) {
                return Ok(e);
            }
        }
        Err(Error::NoWitnessFound(format!("no irreducible of degree {d} over F_{p}")))
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[Scalar] {
        &self.modulus
    }

    /// Matrix of multiplication by `t`.
    pub fn companion(&self) -> Mat {
        let d = self.degree();
        let mut c = Mat::zeros(&self.base, d, d);
        for i in 1..d {
            c.set(i, i - 1, self.base.one());
        }
        for i in 0..d {
            c.set(i, d - 1, self.modulus[i].neg());
        }
        c
    }

    /// Matrix of multiplication by `λ`.
    pub fn mult_matrix(&self, lambda: &[Scalar]) -> Mat {
        let d = self.degree();
        let c = self.companion();
        let mut pw = Mat::identity(&self.base, d);
        let mut acc = Mat::zeros(&self.base, d, d);
        for a in lambda.iter().take(d) {
            if !a.is_zero() {
                acc = acc.add(&pw.scale(a));
            }
            pw = pw.mul(&c);
        }
        acc
    }

    pub fn mul(&self, a: &[Scalar], b: &[Scalar]) -> Vector {
        self.mult_matrix(a).mul_vec(b)
    }

    pub fn one(&self) -> Vector {
        let mut v = vec![self.base.zero(); self.degree()];
        v[0] = self.base.one();
        v
    }

    /// Multiplication by `λ` on `L^k` in the coordinates `(λ_1 coeffs, …, λ_k coeffs)`.
    pub fn action_on_power(&self, lambda: &[Scalar], k: usize) -> Mat {
        let m = self.mult_matrix(lambda);
        let parts: Vec<&Mat> = (0..k).map(|_| &m).collect();
        Mat::block_diag(&parts)
    }

    /// Irreducibility by exhaustive trial division with monic polynomials of
    /// degree at most `d/2`.
    fn modulus_is_irreducible(&self) -> Result<bool> {
        let p = match self.base {
            Field::Fp(p) => p,
            _ => return Err(Error::PreconditionFailed("trial division needs a prime field".into())),
        };
        let d = self.degree();
        let m: Vec<u64> = self.modulus.iter().map(|s| s.residue().unwrap()).collect();
        for k in 1..=d / 2 {
            let count = crate::fpfast::pow_u128(p, k);
            if count > crate::fpfast::ENUMERATION_CAP {
                return Err(Error::EnumerationTooLarge(count));
            }
            for idx in 0..count as u64 {
                let mut g = crate::fpfast::digits(idx, p, k);
                g.push(1);
                if poly_rem_mod(&m, &g, p).iter().all(|&x| x == 0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Remainder of `a` by monic `g` over F_p, coefficients constant term first.
fn poly_rem_mod(a: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (i, &gi) in g.iter().enumerate() {
                let t = (lead as u128 * gi as u128 % p as u128) as u64;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
        }
        r.pop();
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_over_f2() {
        let e = SimpleExtension::find(2, 2).unwrap();
        // t^2 + t + 1 is the only irreducible quadratic over F_2
        assert_eq!(e.modulus().iter().map(|s| s.residue().unwrap()).collect::<Vec<_>>(), vec![1, 1, 1]);
        let t = vec![Scalar::fp(0, 2), Scalar::fp(1, 2)];
        let t3 = e.mul(&t, &e.mul(&t, &t));
        assert_eq!(t3, e.one());
    }

    #[test]
    fn reducible_rejected() {
        let f = Field::Fp(3);
        let m = vec![f.from_i64(-1), f.zero(), f.one()];
        assert!(matches!(SimpleExtension::new(&f, m), Err(Error::ReducibilityDetected(_))));
    }
}
