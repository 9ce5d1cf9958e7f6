//! Exhaustive enumeration of matrix spaces over prime fields on raw residues.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactalg::modular::{mulmod, rank_mod};
use crate::exactalg::{Field, Mat, Scalar};

/// Cap on the number of enumerated points.
pub const ENUMERATION_CAP: u128 = 1 << 20;

/// A basis over F_p as flat residue arrays.
#[derive(Clone, Debug)]
pub struct FpBasis {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub basis: Vec<Vec<u64>>,
}

/// `p^s` with overflow reported as a huge number.
pub fn pow_u128(p: u64, s: usize) -> u128 {
    let mut r: u128 = 1;
    for _ in 0..s {
        r = r.saturating_mul(p as u128);
    }
    r
}

/// Base-`p` digits of `idx`, least significant first.
pub fn digits(mut idx: u64, p: u64, s: usize) -> Vec<u64> {
    let mut c = vec![0u64; s];
    for d in c.iter_mut() {
        *d = idx % p;
        idx /= p;
    }
    c
}

/// Number of projective points of `F_p^s`.
pub fn projective_count(p: u64, s: usize) -> u128 {
    if s == 0 {
        return 0;
    }
    (pow_u128(p, s) - 1) / (p as u128 - 1)
}

/// The `idx`-th projective point: leading nonzero coordinate equal to one.
pub fn projective_point(mut idx: u64, p: u64, s: usize) -> Vec<u64> {
    for lead in 0..s {
        let block = pow_u128(p, s - lead - 1) as u64;
        if idx < block {
            let mut c = vec![0u64; s];
            c[lead] = 1;
            let tail = digits(idx, p, s - lead - 1);
            c[lead + 1..].copy_from_slice(&tail);
            return c;
        }
        idx -= block;
    }
    panic!("projective index out of range");
}

impl FpBasis {
    pub fn new(p: u64, rows: usize, cols: usize, basis: &[Mat]) -> FpBasis {
        let basis = basis.iter().map(|m| m.entries().iter().map(|x| x.residue().expect("prime field entry")).collect()).collect();
        FpBasis { p, rows, cols, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn combine(&self, coeffs: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.rows * self.cols];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c == 0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(b) {
                *o = (*o + mulmod(*c, *x, self.p)) % self.p;
            }
        }
        out
    }

    pub fn rank_of(&self, coeffs: &[u64]) -> usize {
        let mut m = self.combine(coeffs);
        rank_mod(&mut m, self.rows, self.cols, self.p)
    }

    pub fn to_mat(&self, v: &[u64]) -> Mat {
        let f = Field::Fp(self.p);
        Mat::from_entries(&f, self.rows, self.cols, v.iter().map(|&x| Scalar::fp(x, self.p)).collect())
    }

    fn check_cap(&self, n: u128) -> Result<()> {
        if n > ENUMERATION_CAP {
            Err(Error::EnumerationTooLarge(n))
        } else {
            Ok(())
        }
    }

    /// Largest rank over all elements, with the first coefficient vector attaining it.
    pub fn max_rank(&self) -> Result<(usize, Vec<u64>)> {
        let n = projective_count(self.p, self.dim());
        self.check_cap(n)?;
        if n == 0 {
            return Ok((0, vec![]));
        }
        let (r, idx) = (0..n as u64)
            .into_par_iter()
            .map(|i| (self.rank_of(&projective_point(i, self.p, self.dim())), i))
            .reduce(|| (0, u64::MAX), |a, b| if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) { a } else { b });
        Ok((r, projective_point(idx, self.p, self.dim())))
    }

    /// Smallest rank among nonzero elements.
    pub fn min_rank(&self) -> Result<Option<(usize, Vec<u64>)>> {
        let n = projective_count(self.p, self.dim());
        self.check_cap(n)?;
        if n == 0 {
            return Ok(None);
        }
        let (r, idx) = (0..n as u64)
            .into_par_iter()
            .map(|i| (self.rank_of(&projective_point(i, self.p, self.dim())), i))
            .reduce(|| (usize::MAX, u64::MAX), |a, b| if a < b { a } else { b });
        Ok(Some((r, projective_point(idx, self.p, self.dim()))))
    }

    /// Number of elements (zero included) of each rank.
    pub fn rank_histogram(&self) -> Result<Vec<u64>> {
        let n = pow_u128(self.p, self.dim());
        self.check_cap(n)?;
        let top = self.rows.min(self.cols);
        let hist = (0..n as u64)
            .into_par_iter()
            .fold(
                || vec![0u64; top + 1],
                |mut h, i| {
                    h[self.rank_of(&digits(i, self.p, self.dim()))] += 1;
                    h
                },
            )
            .reduce(
                || vec![0u64; top + 1],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        Ok(hist)
    }
}

/// All vectors of `F_p^n` (zero first) as residues.
pub fn all_vectors(p: u64, n: usize) -> Result<Vec<Vec<u64>>> {
    let count = pow_u128(p, n);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge(count));
    }
    Ok((0..count as u64).map(|i| digits(i, p, n)).collect())
}

/// Projective representatives of `F_p^n \ {0}`.
pub fn projective_vectors(p: u64, n: usize) -> Result<Vec<Vec<u64>>> {
    let count = projective_count(p, n);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge(count));
    }
    Ok((0..count as u64).map(|i| projective_point(i, p, n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_points_are_distinct_and_normalized() {
        let pts = projective_vectors(3, 3).unwrap();
        assert_eq!(pts.len(), 13);
        for (i, a) in pts.iter().enumerate() {
            let lead = a.iter().position(|&x| x != 0).unwrap();
            assert_eq!(a[lead], 1);
            for b in &pts[..i] {
                assert_ne!(a, b);
            }
        }
    }
}
