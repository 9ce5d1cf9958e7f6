//! Linear subspaces of `Mat_{m,n}(K)` viewed as operator spaces `K^n → K^m`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactalg::modular::{self, mulmod, rank_mod};
use crate::exactalg::{vecops, Field, Mat, Scalar, Vector};
use crate::fpfast::{self, FpBasis};

/// A space of `m × n` matrices given by an independent basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatSpace {
    field: Field,
    m: usize,
    n: usize,
    basis: Vec<Mat>,
}

/// `x_1 A_1 + … + x_s A_s` over `K(x_1, …, x_s)`.
#[derive(Clone, Debug)]
pub struct GenericMat {
    pub space: MatSpace,
    pub mat: Mat,
    pub vars: Vec<String>,
}

/// Upper bound on the minimal rank with a witness.
#[derive(Clone, Debug)]
pub struct MinRank {
    pub mrk_upper: usize,
    pub witness: Mat,
    pub coeffs: Vector,
    pub exact: bool,
}

/// Block decomposition of a tested matrix against `J_r`.
#[derive(Clone, Debug)]
pub struct FlandersWitness {
    pub r: usize,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub violation: Option<FlandersViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlandersViolation {
    DNonzero,
    BAkCNonzero(u32),
}

/// The reduced space attached to `S` and the two basis changes realising it.
#[derive(Clone, Debug)]
pub struct ReducedDecomposition {
    pub kernel_basis: Vec<Vector>,
    pub essential_range_basis: Vec<Vector>,
    pub reduced_space: MatSpace,
    /// `P S Q` has the reduced space in its top-left block and zeros elsewhere.
    pub p: Mat,
    pub q: Mat,
}

impl FlandersWitness {
    pub fn new(m: &Mat, r: usize) -> FlandersWitness {
        let (rows, cols) = m.shape();
        FlandersWitness {
            r,
            a: m.block(0, r, 0, r),
            c: m.block(0, r, r, cols),
            b: m.block(r, rows, 0, r),
            d: m.block(r, rows, r, cols),
            violation: None,
        }
    }

    /// Reassembles `[[A, C], [B, D]]`.
    pub fn reassemble(&self) -> Mat {
        let top = Mat::hstack(&[&self.a, &self.c]);
        let bottom = Mat::hstack(&[&self.b, &self.d]);
        Mat::vstack(&[&top, &bottom])
    }

    /// Checks `D = 0` and `B A^k C = 0` for `k < r`.
    pub fn check(&mut self) {
        self.violation = None;
        if !self.d.is_zero() {
            self.violation = Some(FlandersViolation::DNonzero);
            return;
        }
        if self.b.rows() == 0 || self.c.cols() == 0 {
            return;
        }
        let mut bak = self.b.clone();
        for k in 0..self.r as u32 {
            if !bak.mul(&self.c).is_zero() {
                self.violation = Some(FlandersViolation::BAkCNonzero(k));
                return;
            }
            bak = bak.mul(&self.a);
        }
    }
}

impl MatSpace {
    /// Space with the given basis; the basis must be independent.
    pub fn new(field: &Field, m: usize, n: usize, basis: Vec<Mat>) -> Result<MatSpace> {
        for b in &basis {
            if b.shape() != (m, n) {
                return Err(Error::DimensionMismatch(format!("basis matrix {:?}, expected {:?}", b.shape(), (m, n))));
            }
            if b.field() != field {
                return Err(Error::DescriptorMismatch(format!("{} vs {}", b.field(), field)));
            }
        }
        let s = MatSpace { field: field.clone(), m, n, basis };
        if s.flat_rank() != s.basis.len() {
            return Err(Error::PreconditionFailed("basis matrices are linearly dependent".into()));
        }
        Ok(s)
    }

    /// Space spanned by arbitrary generators (an independent subfamily is kept).
    pub fn spanned_by(field: &Field, m: usize, n: usize, gens: &[Mat]) -> MatSpace {
        let mut basis: Vec<Mat> = Vec::new();
        let mut rows: Vec<Vector> = Vec::new();
        for g in gens {
            assert_eq!(g.shape(), (m, n), "generator shape");
            if g.is_zero() {
                continue;
            }
            rows.push(g.flatten());
            if vecops::rank(field, &rows) == rows.len() {
                basis.push(g.clone());
            } else {
                rows.pop();
            }
        }
        MatSpace { field: field.clone(), m, n, basis }
    }

    /// Space spanned by `gens`, with a canonical (reduced echelon) basis.
    pub fn echelon_span(field: &Field, m: usize, n: usize, gens: &[Mat]) -> MatSpace {
        if gens.is_empty() {
            return MatSpace { field: field.clone(), m, n, basis: vec![] };
        }
        let flat = Mat::from_rows(field, gens.iter().map(|g| g.flatten()).collect());
        let rows = flat.row_space_basis();
        let basis = rows.into_iter().map(|r| Mat::from_entries(field, m, n, r)).collect();
        MatSpace { field: field.clone(), m, n, basis }
    }

    pub fn zero(field: &Field, m: usize, n: usize) -> MatSpace {
        MatSpace { field: field.clone(), m, n, basis: vec![] }
    }

    /// All of `Mat_{m,n}(K)`.
    pub fn full(field: &Field, m: usize, n: usize) -> MatSpace {
        let mut basis = Vec::new();
        for i in 0..m {
            for j in 0..n {
                basis.push(Mat::unit(field, m, n, i, j));
            }
        }
        MatSpace { field: field.clone(), m, n, basis }
    }

    /// The alternating matrices `Mata_n(K)`, basis `E_ij − E_ji` for `i < j`.
    pub fn alternating(field: &Field, n: usize) -> MatSpace {
        let mut basis = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut m = Mat::zeros(field, n, n);
                m.set(i, j, field.one());
                m.set(j, i, field.one().neg());
                basis.push(m);
            }
        }
        MatSpace { field: field.clone(), m: n, n, basis }
    }

    fn flat_rank(&self) -> usize {
        vecops::rank(&self.field, &self.basis.iter().map(|b| b.flatten()).collect::<Vec<_>>())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn element(&self, coeffs: &[Scalar]) -> Mat {
        assert_eq!(coeffs.len(), self.dim(), "coefficient count");
        let mut acc = Mat::zeros(&self.field, self.m, self.n);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if !c.is_zero() {
                acc = acc.add(&b.scale(c));
            }
        }
        acc
    }

    /// Coordinates of `mat` in the basis, if it lies in the space.
    pub fn coordinates(&self, mat: &Mat) -> Option<Vector> {
        if mat.shape() != (self.m, self.n) {
            return None;
        }
        if self.basis.is_empty() {
            return if mat.is_zero() { Some(vec![]) } else { None };
        }
        let cols: Vec<Vector> = self.basis.iter().map(|b| b.flatten()).collect();
        let a = Mat::from_rows(&self.field, cols).transpose();
        a.solve(&mat.flatten())
    }

    pub fn contains(&self, mat: &Mat) -> bool {
        self.coordinates(mat).is_some()
    }

    /// True when both spaces are equal as subspaces.
    pub fn same_span(&self, o: &MatSpace) -> bool {
        self.dim() == o.dim() && (self.m, self.n) == (o.m, o.n) && self.basis.iter().all(|b| o.contains(b))
    }

    pub fn contains_space(&self, o: &MatSpace) -> bool {
        o.basis.iter().all(|b| self.contains(b))
    }

    /// Basis of the image space `S x = {f(x) : f ∈ S}`.
    pub fn image_at(&self, x: &[Scalar]) -> Vec<Vector> {
        let imgs: Vec<Vector> = self.basis.iter().map(|b| b.mul_vec(x)).collect();
        if imgs.is_empty() {
            return imgs;
        }
        Mat::from_rows(&self.field, imgs).row_space_basis()
    }

    /// Evaluation operator `f ↦ f(x)` as an `m × s` matrix.
    pub fn evaluation_matrix(&self, x: &[Scalar]) -> Mat {
        let cols: Vec<Vector> = self.basis.iter().map(|b| b.mul_vec(x)).collect();
        if cols.is_empty() {
            return Mat::zeros(&self.field, self.m, 0);
        }
        Mat::from_rows(&self.field, cols).transpose()
    }

    /// Same space over a larger field.
    pub fn extend_scalars(&self, field: &Field) -> Result<MatSpace> {
        let basis = self.basis.iter().map(|b| b.embed(field)).collect::<Result<Vec<_>>>()?;
        Ok(MatSpace { field: field.clone(), m: self.m, n: self.n, basis })
    }

    pub fn generic_matrix(&self) -> Result<GenericMat> {
        if self.basis.is_empty() {
            return Err(Error::EmptyBasis);
        }
        let vars = self.field.fresh_vars("x", self.dim());
        let ext = self.field.extend(&vars)?;
        let k = self.field.nvars();
        let mut acc = Mat::zeros(&ext, self.m, self.n);
        for (i, b) in self.basis.iter().enumerate() {
            let x = ext.var(k + i);
            acc = acc.add(&b.embed(&ext)?.scale(&x));
        }
        Ok(GenericMat { space: self.clone(), mat: acc, vars })
    }

    pub fn fp_basis(&self) -> Option<FpBasis> {
        match self.field {
            Field::Fp(p) => Some(FpBasis::new(p, self.m, self.n, &self.basis)),
            _ => None,
        }
    }

    /// Exact upper rank.
    pub fn upper_rank(&self) -> Result<usize> {
        if self.basis.is_empty() {
            return Ok(0);
        }
        let g = self.generic_matrix()?;
        let r = g.mat.try_rank()?;
        if self.field.larger_than(r) {
            return Ok(r);
        }
        let fb = self.fp_basis().expect("small fields are prime fields");
        Ok(fb.max_rank()?.0)
    }

    /// Minimal rank: exact over finite fields, an integer-grid search otherwise.
    pub fn min_rank(&self, height_cap: u32) -> Result<MinRank> {
        if self.basis.is_empty() {
            return Err(Error::PreconditionFailed("zero space has no minimal rank".into()));
        }
        if let Some(fb) = self.fp_basis() {
            let (r, c) = fb.min_rank()?.expect("nonzero space");
            let coeffs: Vector = c.iter().map(|&v| Scalar::fp(v, fb.p)).collect();
            return Ok(MinRank { mrk_upper: r, witness: self.element(&coeffs), coeffs, exact: true });
        }
        let (r, coeffs) = self.height_search(height_cap)?;
        let witness = self.element(&coeffs);
        Ok(MinRank { mrk_upper: r, witness, coeffs, exact: r == 1 })
    }

    /// Smallest rank over primitive integer coefficient vectors of height ≤ `h`.
    /// In characteristic `p` the integers collapse to `F_p`, so the grid is
    /// `F_p^s` up to scaling whatever `h` is.
    pub fn height_search(&self, h: u32) -> Result<(usize, Vector)> {
        let s = self.dim();
        let p_char = self.field.characteristic();
        let (side, h) = if p_char > 0 { (p_char as u128, 0u32) } else { (2 * h as u128 + 1, h) };
        let total = fpfast::pow_u128(side as u64, s);
        if total > HEIGHT_SEARCH_CAP {
            return Err(Error::EnumerationTooLarge(total));
        }
        let p = modular::image_prime(&self.field);
        let nv = self.field.nvars();
        let point = modular::sample_point(nv, 7, p);
        let imgs: Option<Vec<Vec<u64>>> = self.basis.iter().map(|b| modular::mat_image(b, &point, p)).collect();
        let field = self.field.clone();
        let to_scalar = |c: &[i64]| -> Vector { c.iter().map(|&v| field.from_i64(v)).collect() };
        let exact_rank = |c: &[i64]| -> usize { self.element(&to_scalar(c)).rank() };
        let decode = |idx: u64| -> Vec<i64> {
            let mut c = vec![0i64; s];
            let mut i = idx;
            for v in c.iter_mut() {
                *v = (i % side as u64) as i64 - h as i64;
                i /= side as u64;
            }
            c
        };
        let primitive = |c: &[i64]| -> bool {
            match c.iter().rev().find(|&&v| v != 0) {
                None => false,
                Some(&v) if p_char > 0 => v == 1,
                Some(&v) => v > 0 && c.iter().fold(0i64, |g, &x| num_integer::gcd(g, x)) == 1,
            }
        };
        let (m, n) = (self.m, self.n);
        let best = (0..total as u64)
            .into_par_iter()
            .filter_map(|idx| {
                let c = decode(idx);
                if !primitive(&c) {
                    return None;
                }
                let lower = match &imgs {
                    Some(imgs) => {
                        let mut acc = vec![0u64; m * n];
                        for (ci, img) in c.iter().zip(imgs) {
                            if *ci == 0 {
                                continue;
                            }
                            let cm = ci.rem_euclid(p as i64) as u64;
                            for (a, x) in acc.iter_mut().zip(img) {
                                *a = (*a + mulmod(cm, *x, p)) % p;
                            }
                        }
                        rank_mod(&mut acc, m, n, p)
                    }
                    None => 0,
                };
                Some((lower, idx, c))
            })
            .map(|(lower, idx, c)| {
                let full = m.min(n);
                let r = if lower == full { full } else { exact_rank(&c) };
                (r, idx)
            })
            .reduce(|| (usize::MAX, u64::MAX), |a, b| if a < b { a } else { b });
        if best.0 == usize::MAX {
            return Err(Error::NoWitnessFound("empty search grid".into()));
        }
        Ok((best.0, to_scalar(&decode(best.1))))
    }

    /// The dual space `Ŝ ⊂ Mat_{m,s}(K)` spanned by `f ↦ f(e_j)`.
    pub fn dual_space(&self) -> MatSpace {
        let s = self.dim();
        let gens: Vec<Mat> = (0..self.n).map(|j| self.evaluation_matrix(&vecops::unit(&self.field, self.n, j))).collect();
        MatSpace::spanned_by(&self.field, self.m, s, &gens)
    }

    /// Common kernel `{x : f(x) = 0 ∀ f ∈ S}`.
    pub fn common_kernel(&self) -> Vec<Vector> {
        if self.basis.is_empty() {
            return (0..self.n).map(|j| vecops::unit(&self.field, self.n, j)).collect();
        }
        let refs: Vec<&Mat> = self.basis.iter().collect();
        Mat::vstack(&refs).kernel_basis()
    }

    /// Basis of `Σ_f im f`.
    pub fn essential_range(&self) -> Vec<Vector> {
        if self.basis.is_empty() {
            return vec![];
        }
        let refs: Vec<&Mat> = self.basis.iter().collect();
        Mat::hstack(&refs).column_space_basis()
    }

    pub fn is_reduced(&self) -> bool {
        self.common_kernel().is_empty() && self.essential_range().len() == self.m
    }

    pub fn reduce(&self) -> ReducedDecomposition {
        let f = &self.field;
        let kernel = self.common_kernel();
        let range = self.essential_range();
        let q = complete_basis(f, self.n, &kernel, true);
        let bv = complete_basis(f, self.m, &range, false);
        let p = bv.inverse().expect("completed basis is invertible");
        let (r, c) = (range.len(), self.n - kernel.len());
        let red: Vec<Mat> = self.basis.iter().map(|b| p.mul(b).mul(&q).block(0, r, 0, c)).collect();
        ReducedDecomposition {
            kernel_basis: kernel,
            essential_range_basis: range,
            reduced_space: MatSpace { field: f.clone(), m: r, n: c, basis: red },
            p,
            q,
        }
    }

    /// Verifies the Flanders-Atkinson identities for a space containing `J_r`.
    pub fn flanders_check(&self, r: usize) -> Result<Vec<FlandersWitness>> {
        if r == 0 || r > self.m.min(self.n) {
            return Err(Error::PreconditionFailed(format!("r = {r} out of range")));
        }
        if !self.field.larger_than(r) {
            return Err(Error::PreconditionFailed(format!("#K > r fails: the field has {} elements", self.field.order().unwrap())));
        }
        if !self.contains(&Mat::j_r(&self.field, self.m, self.n, r)) {
            return Err(Error::PreconditionFailed("J_r does not belong to the space".into()));
        }
        let u = self.upper_rank()?;
        if u > r {
            return Err(Error::PreconditionFailed(format!("urk = {u} exceeds r = {r}")));
        }
        let mut bad = Vec::new();
        for b in &self.basis {
            let mut w = FlandersWitness::new(b, r);
            w.check();
            if w.violation.is_some() {
                bad.push(w);
            }
        }
        let g = self.generic_matrix()?;
        let mut w = FlandersWitness::new(&g.mat, r);
        w.check();
        if w.violation.is_some() {
            bad.push(w);
        }
        Ok(bad)
    }

    /// `P S Q`.
    pub fn apply_equivalence(&self, p: &Mat, q: &Mat) -> Result<MatSpace> {
        if p.shape() != (self.m, self.m) || q.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch("transform shapes".into()));
        }
        if p.try_rank()? < self.m || q.try_rank()? < self.n {
            return Err(Error::SingularTransform);
        }
        let basis = self.basis.iter().map(|b| p.mul(b).mul(q)).collect();
        Ok(MatSpace { field: self.field.clone(), m: self.m, n: self.n, basis })
    }

    /// Image under `f ↦ f'` applied to each basis matrix (no independence check).
    pub fn map_basis(&self, m: usize, n: usize, f: impl Fn(&Mat) -> Mat) -> MatSpace {
        let gens: Vec<Mat> = self.basis.iter().map(f).collect();
        MatSpace::spanned_by(&self.field, m, n, &gens)
    }

    /// Checks the decomposition inequality for the `(r, s)` zero-block pattern.
    pub fn decomposition_bound_check(&self, r: usize, s: usize) -> Result<bool> {
        if r == 0 || r > self.m || s == 0 || s > self.n {
            return Err(Error::PatternViolation(format!("(r, s) = ({r}, {s}) out of range")));
        }
        for b in &self.basis {
            if !b.block(r, self.m, s, self.n).is_zero() {
                return Err(Error::PatternViolation("lower-right block is not zero".into()));
            }
        }
        if self.basis.is_empty() {
            return Ok(true);
        }
        let u = self.upper_rank()?;
        if !self.field.larger_than(u) {
            return Err(Error::PreconditionFailed("#K > urk fails".into()));
        }
        let g = self.generic_matrix()?;
        let gb = g.mat.block(r, self.m, 0, s).try_rank()?;
        let gc = g.mat.block(0, r, s, self.n).try_rank()?;
        let bs = self.map_basis(self.m - r, s, |m| m.block(r, self.m, 0, s));
        let cs = self.map_basis(r, self.n - s, |m| m.block(0, r, s, self.n));
        let ub = bs.upper_rank_by_enumeration_or_generic()?;
        let uc = cs.upper_rank_by_enumeration_or_generic()?;
        Ok(gb == ub && gc == uc && u >= ub + uc)
    }

    /// Upper rank computed independently of the big generic matrix: by
    /// enumeration when the field is finite and small, by the space's own
    /// generic matrix otherwise.
    fn upper_rank_by_enumeration_or_generic(&self) -> Result<usize> {
        if let Some(fb) = self.fp_basis() {
            if fpfast::projective_count(fb.p, fb.dim()) <= fpfast::ENUMERATION_CAP {
                return Ok(fb.max_rank()?.0);
            }
        }
        self.upper_rank()
    }

    /// All elements of a space over a prime field (zero included).
    pub fn elements(&self) -> Result<Vec<Mat>> {
        let fb = self.fp_basis().ok_or_else(|| Error::PreconditionFailed("finite field required".into()))?;
        let pts = fpfast::all_vectors(fb.p, fb.dim())?;
        Ok(pts.iter().map(|c| fb.to_mat(&fb.combine(c))).collect())
    }

    /// Rank histogram over all elements of a space over a prime field.
    pub fn rank_histogram(&self) -> Result<Vec<u64>> {
        let fb = self.fp_basis().ok_or_else(|| Error::PreconditionFailed("finite field required".into()))?;
        fb.rank_histogram()
    }

    /// Transposed space.
    pub fn transpose(&self) -> MatSpace {
        MatSpace { field: self.field.clone(), m: self.n, n: self.m, basis: self.basis.iter().map(|b| b.transpose()).collect() }
    }
}

/// Cap on integer-grid searches over infinite fields.
pub const HEIGHT_SEARCH_CAP: u128 = 1 << 23;

/// Extends independent vectors to a basis of `K^n` with unit vectors; the
/// given vectors come last when `given_last`, first otherwise. Returns the
/// basis as the columns of a matrix.
pub fn complete_basis(field: &Field, n: usize, given: &[Vector], given_last: bool) -> Mat {
    let mut chosen: Vec<Vector> = given.to_vec();
    let mut extra: Vec<Vector> = Vec::new();
    for j in 0..n {
        let u = vecops::unit(field, n, j);
        let mut trial = chosen.clone();
        trial.extend(extra.iter().cloned());
        trial.push(u.clone());
        if vecops::rank(field, &trial) == trial.len() {
            extra.push(u);
        }
    }
    let cols: Vec<Vector> = if given_last {
        extra.into_iter().chain(chosen.drain(..)).collect()
    } else {
        chosen.into_iter().chain(extra).collect()
    };
    if cols.is_empty() {
        return Mat::zeros(field, n, 0);
    }
    Mat::from_rows(field, cols).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_of_diagonal_span() {
        let f = Field::Q;
        let s = MatSpace::new(&f, 2, 2, vec![Mat::unit(&f, 2, 2, 0, 0), Mat::unit(&f, 2, 2, 1, 1)]).unwrap();
        let g = s.generic_matrix().unwrap();
        let e = g.mat.field().clone();
        assert_eq!(g.mat.get(0, 0), &e.var(0));
        assert_eq!(g.mat.get(1, 1), &e.var(1));
        assert!(g.mat.get(0, 1).is_zero());
    }

    #[test]
    fn urk_of_j2() {
        let f = Field::Q;
        let s = MatSpace::new(&f, 3, 3, vec![Mat::j_r(&f, 3, 3, 2)]).unwrap();
        assert_eq!(s.upper_rank().unwrap(), 2);
    }

    #[test]
    fn dependent_basis_rejected() {
        let f = Field::Q;
        let a = Mat::unit(&f, 2, 2, 0, 0);
        assert!(MatSpace::new(&f, 2, 2, vec![a.clone(), a.scale(&f.from_i64(2))]).is_err());
    }

    #[test]
    fn reduce_e11_e12_in_mat3() {
        let f = Field::Q;
        let s = MatSpace::new(&f, 3, 3, vec![Mat::unit(&f, 3, 3, 0, 0), Mat::unit(&f, 3, 3, 0, 1)]).unwrap();
        let r = s.reduce();
        assert_eq!(r.kernel_basis, vec![vecops::unit(&f, 3, 2)]);
        assert_eq!(r.essential_range_basis, vec![vecops::unit(&f, 3, 0)]);
        assert_eq!(r.reduced_space.rows(), 1);
        assert_eq!(r.reduced_space.cols(), 2);
        assert!(r.reduced_space.is_reduced());
    }
}
