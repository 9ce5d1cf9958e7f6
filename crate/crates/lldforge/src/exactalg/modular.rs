//! Word-sized modular arithmetic: fast prime-field elimination and
//! homomorphic images used as exact rank lower bounds.

use super::field::{bigint_mod, BaseField, Field};
use super::mat::Mat;
use super::poly::Poly;
use super::scalar::Scalar;

/// Prime used for images of ℚ-valued data.
pub const BIG_PRIME: u64 = (1u64 << 61) - 1;

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

/// Rank of a row-major `rows × cols` matrix over F_p; destroys the input.
pub fn rank_mod(a: &mut [u64], rows: usize, cols: usize, p: u64) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| a[r * cols + c] != 0) else { continue };
        if piv != rank {
            for j in 0..cols {
                a.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = invmod(a[rank * cols + c], p);
        for r in rank + 1..rows {
            let f = a[r * cols + c];
            if f == 0 {
                continue;
            }
            let f = mulmod(f, inv, p);
            for j in c..cols {
                let t = mulmod(f, a[rank * cols + j], p);
                let x = a[r * cols + j];
                a[r * cols + j] = if x >= t { x - t } else { x + p - t };
            }
        }
        rank += 1;
    }
    rank
}

/// Reduced row echelon form over F_p in place; returns pivot columns.
pub fn rref_mod(a: &mut [u64], rows: usize, cols: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r0 = 0;
    for c in 0..cols {
        if r0 == rows {
            break;
        }
        let Some(piv) = (r0..rows).find(|&r| a[r * cols + c] != 0) else { continue };
        if piv != r0 {
            for j in 0..cols {
                a.swap(piv * cols + j, r0 * cols + j);
            }
        }
        let inv = invmod(a[r0 * cols + c], p);
        for j in 0..cols {
            a[r0 * cols + j] = mulmod(a[r0 * cols + j], inv, p);
        }
        for r in 0..rows {
            if r == r0 {
                continue;
            }
            let f = a[r * cols + c];
            if f == 0 {
                continue;
            }
            for j in 0..cols {
                let t = mulmod(f, a[r0 * cols + j], p);
                let x = a[r * cols + j];
                a[r * cols + j] = if x >= t { x - t } else { x + p - t };
            }
        }
        pivots.push(c);
        r0 += 1;
    }
    pivots
}

/// Residue of a rational, `None` when `p` divides the denominator.
pub fn rational_mod(r: &num_rational::BigRational, p: u64) -> Option<u64> {
    let d = bigint_mod(r.denom(), p);
    if d == 0 {
        return None;
    }
    Some(mulmod(bigint_mod(r.numer(), p), invmod(d, p), p))
}

fn coeff_mod(c: &Scalar, p: u64) -> Option<u64> {
    match c {
        Scalar::Q(r) => rational_mod(r, p),
        Scalar::Fp { v, .. } => Some(*v % p),
        Scalar::Ff(_) => None,
    }
}

fn eval_poly_mod(poly: &Poly, point: &[u64], p: u64) -> Option<u64> {
    let mut acc = 0u64;
    for (m, c) in poly.terms() {
        let mut t = coeff_mod(c, p)?;
        for (i, &x) in point.iter().enumerate() {
            let e = m.exp(i);
            if e > 0 {
                t = mulmod(t, powmod(x, e as u64, p), p);
            }
        }
        acc = (acc + t) % p;
    }
    Some(acc)
}

/// Modulus used for images of a field: `BIG_PRIME` for characteristic 0.
pub fn image_prime(f: &Field) -> u64 {
    match f.base() {
        BaseField::Q => BIG_PRIME,
        BaseField::Fp(p) => p,
    }
}

/// Image of an entry under reduction mod `p` and evaluation at `point`.
pub fn scalar_image(s: &Scalar, point: &[u64], p: u64) -> Option<u64> {
    match s {
        Scalar::Ff(r) => {
            let d = eval_poly_mod(&r.den, point, p)?;
            if d == 0 {
                return None;
            }
            let n = eval_poly_mod(&r.num, point, p)?;
            Some(mulmod(n, invmod(d, p), p))
        }
        _ => coeff_mod(s, p),
    }
}

/// Row-major image of a matrix, `None` if some entry is not defined there.
pub fn mat_image(m: &Mat, point: &[u64], p: u64) -> Option<Vec<u64>> {
    m.entries().iter().map(|s| scalar_image(s, point, p)).collect()
}

/// Deterministic evaluation points for `nvars` indeterminates.
pub fn sample_point(nvars: usize, round: u64, p: u64) -> Vec<u64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ round.wrapping_mul(0xD1B5_4A32_D192_ED03);
    (0..nvars)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % p
        })
        .collect()
}

/// Lower bound on the rank from a few homomorphic images.
pub fn rank_lower_bound(m: &Mat, tries: u64) -> usize {
    let p = image_prime(m.field());
    let nv = m.field().nvars();
    let target = m.rows().min(m.cols());
    let mut best = 0;
    for t in 0..tries {
        let pt = sample_point(nv, t, p);
        if let Some(mut img) = mat_image(m, &pt, p) {
            best = best.max(rank_mod(&mut img, m.rows(), m.cols(), p));
            if best == target {
                break;
            }
        }
        if nv == 0 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranks() {
        let mut a = vec![1, 2, 3, 2, 4, 6, 1, 0, 1];
        assert_eq!(rank_mod(&mut a, 3, 3, 7), 2);
        let mut b = vec![1, 0, 0, 1];
        assert_eq!(rank_mod(&mut b, 2, 2, 2), 2);
    }

    #[test]
    fn rref_pivots() {
        let mut a = vec![0, 1, 1, 0, 2, 2];
        let piv = rref_mod(&mut a, 2, 3, 5);
        assert_eq!(piv, vec![1]);
        assert_eq!(&a[..3], &[0, 1, 1]);
    }
}
