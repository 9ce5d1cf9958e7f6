use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::field::{BaseField, Field};
use super::modular;
use super::poly::Poly;
use super::ratfn::RatFn;
use super::scalar::Scalar;
use super::DEGREE_CAP;
use crate::error::{Error, Result};

/// Column vector.
pub type Vector = Vec<Scalar>;

/// Dense matrix over one field, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Mat {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Mat {
        Mat { field: field.clone(), rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    /// `J_r` padded to `rows × cols`.
    pub fn j_r(field: &Field, rows: usize, cols: usize, r: usize) -> Mat {
        let mut m = Mat::zeros(field, rows, cols);
        for i in 0..r.min(rows).min(cols) {
            m.data[i * cols + i] = field.one();
        }
        m
    }

    /// Elementary matrix with a one at `(i, j)`.
    pub fn unit(field: &Field, rows: usize, cols: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(field, rows, cols);
        m.data[i * cols + j] = field.one();
        m
    }

    pub fn from_fn(field: &Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { field: field.clone(), rows, cols, data }
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<Scalar>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { field: field.clone(), rows: r, cols: c, data }
    }

    /// Integer matrix embedded in `field`.
    pub fn from_i64(field: &Field, rows: &[&[i64]]) -> Mat {
        Mat::from_rows(field, rows.iter().map(|r| r.iter().map(|&x| field.from_i64(x)).collect()).collect())
    }

    pub fn from_entries(field: &Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Mat {
        assert_eq!(data.len(), rows * cols, "entry count");
        Mat { field: field.clone(), rows, cols, data }
    }

    pub fn column(field: &Field, v: &[Scalar]) -> Mat {
        Mat { field: field.clone(), rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn diag(field: &Field, d: &[Scalar]) -> Mat {
        let n = d.len();
        let mut m = Mat::zeros(field, n, n);
        for (i, x) in d.iter().enumerate() {
            m.data[i * n + i] = x.clone();
        }
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Skew-symmetric with zero diagonal; valid in every characteristic.
    pub fn is_alternating(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.get(i, i).is_zero() && (0..i).all(|j| (self.get(i, j) + self.get(j, i)).is_zero())
            })
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Mat {
        Mat { field: self.field.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn map_into(&self, field: &Field, f: impl Fn(&Scalar) -> Scalar) -> Mat {
        Mat { field: field.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map_into(&self, field: &Field, f: impl Fn(&Scalar) -> Result<Scalar>) -> Result<Mat> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Mat { field: field.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn checked_add(&self, o: &Mat) -> Result<Mat> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.checked_add(b)).collect::<Result<Vec<_>>>()?;
        Ok(Mat { field: self.field.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn checked_sub(&self, o: &Mat) -> Result<Mat> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.checked_sub(b)).collect::<Result<Vec<_>>>()?;
        Ok(Mat { field: self.field.clone(), rows: self.rows, cols: self.cols, data })
    }

    fn same_shape(&self, o: &Mat) -> Result<()> {
        if self.shape() != o.shape() {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.shape(), o.shape())));
        }
        if self.field != o.field {
            return Err(Error::DescriptorMismatch(format!("{} vs {}", self.field, o.field)));
        }
        Ok(())
    }

    pub fn checked_mul(&self, o: &Mat) -> Result<Mat> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!("{:?} * {:?}", self.shape(), o.shape())));
        }
        if self.field != o.field {
            return Err(Error::DescriptorMismatch(format!("{} vs {}", self.field, o.field)));
        }
        let mut out = Mat::zeros(&self.field, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Mat) -> Mat {
        self.checked_add(o).expect("matrix add")
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        self.checked_sub(o).expect("matrix sub")
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        self.checked_mul(o).expect("matrix mul")
    }

    pub fn scale(&self, k: &Scalar) -> Mat {
        self.map(|x| x.mul(k))
    }

    pub fn neg(&self) -> Mat {
        self.map(|x| x.neg())
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add(&a.mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Mat {
        let mut r = Mat::identity(&self.field, self.rows);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        Mat::from_fn(&self.field, r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn hstack(parts: &[&Mat]) -> Mat {
        let f = parts[0].field.clone();
        let rows = parts[0].rows;
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut m = Mat::zeros(&f, rows, cols);
        let mut c = 0;
        for p in parts {
            assert_eq!(p.rows, rows, "hstack row mismatch");
            m.set_block(0, c, p);
            c += p.cols;
        }
        m
    }

    pub fn vstack(parts: &[&Mat]) -> Mat {
        let f = parts[0].field.clone();
        let cols = parts[0].cols;
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut m = Mat::zeros(&f, rows, cols);
        let mut r = 0;
        for p in parts {
            assert_eq!(p.cols, cols, "vstack column mismatch");
            m.set_block(r, 0, p);
            r += p.rows;
        }
        m
    }

    pub fn block_diag(parts: &[&Mat]) -> Mat {
        let f = parts[0].field.clone();
        let rows = parts.iter().map(|p| p.rows).sum();
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut m = Mat::zeros(&f, rows, cols);
        let (mut r, mut c) = (0, 0);
        for p in parts {
            m.set_block(r, c, p);
            r += p.rows;
            c += p.cols;
        }
        m
    }

    /// Entries read row by row as one vector.
    pub fn flatten(&self) -> Vector {
        self.data.clone()
    }

    /// Largest numerator degree among function-field entries.
    pub fn max_degree(&self) -> usize {
        self.data.iter().map(|x| x.degree()).max().unwrap_or(0)
    }

    fn check_cap(&self) -> Result<()> {
        let d = self.max_degree();
        if d > DEGREE_CAP {
            return Err(Error::DegreeCapExceeded(d));
        }
        Ok(())
    }

    // ----- elimination -----

    /// Exact rank.
    pub fn rank(&self) -> usize {
        self.try_rank().expect("rank")
    }

    pub fn try_rank(&self) -> Result<usize> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(0);
        }
        match &self.field {
            Field::Fp(p) => {
                let mut a: Vec<u64> = self.data.iter().map(|x| x.residue().unwrap()).collect();
                Ok(modular::rank_mod(&mut a, self.rows, self.cols, *p))
            }
            Field::Q => {
                let full = self.rows.min(self.cols);
                if modular::rank_lower_bound(self, 1) == full {
                    return Ok(full);
                }
                let mut a = self.integer_rows();
                Ok(bareiss(&mut a, self.rows, self.cols)?.rank)
            }
            Field::Ff(_) => {
                self.check_cap()?;
                let full = self.rows.min(self.cols);
                if modular::rank_lower_bound(self, 3) == full {
                    return Ok(full);
                }
                let lower = modular::rank_lower_bound(self, 3);
                let (mut a, _) = self.polynomial_rows();
                if self.field.characteristic() == 0 {
                    return multimodular_rank(&a, self.rows, self.cols, lower);
                }
                Ok(bareiss(&mut a, self.rows, self.cols)?.rank)
            }
        }
    }

    /// Rows scaled to integers (ℚ only), with the scaling factors.
    fn integer_rows(&self) -> Vec<BigInt> {
        self.integer_rows_with_scale().0
    }

    fn integer_rows_with_scale(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let mut out = Vec::with_capacity(self.data.len());
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut l = BigInt::one();
            for j in 0..self.cols {
                if let Scalar::Q(r) = self.get(i, j) {
                    l = l.lcm(r.denom());
                }
            }
            for j in 0..self.cols {
                let r = self.get(i, j).as_rational().unwrap();
                out.push(r.numer() * (&l / r.denom()));
            }
            scales.push(l);
        }
        (out, scales)
    }

    /// Rows scaled to polynomials (function fields only), with the scaling denominators.
    fn polynomial_rows(&self) -> (Vec<PolyElt>, Vec<Poly>) {
        let base = self.field.base();
        let mut out = Vec::with_capacity(self.data.len());
        let mut scales = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut dens: Vec<Poly> = Vec::new();
            for j in 0..self.cols {
                let r = self.get(i, j).as_ratfn().unwrap();
                if !r.den.is_constant() && !dens.contains(&r.den) {
                    dens.push(r.den.clone());
                }
            }
            let mut l = Poly::one(&base);
            for d in &dens {
                l = l.mul(d);
            }
            for j in 0..self.cols {
                let r = self.get(i, j).as_ratfn().unwrap();
                let f = if r.den.is_constant() {
                    l.scale(&r.den.as_constant().unwrap().inv())
                } else {
                    l.div_exact(&r.den).expect("denominator divides the row multiplier")
                };
                out.push(PolyElt(r.num.mul(&f)));
            }
            scales.push(l);
        }
        (out, scales)
    }

    pub fn det(&self) -> Scalar {
        self.try_det().expect("det")
    }

    pub fn try_det(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::NotSquare);
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.field.one());
        }
        match &self.field {
            Field::Fp(_) => {
                let (_, _, d) = self.gauss()?;
                Ok(d)
            }
            Field::Q => {
                let (mut a, scales) = self.integer_rows_with_scale();
                let b = bareiss(&mut a, n, n)?;
                if b.rank < n {
                    return Ok(self.field.zero());
                }
                let mut d = a[(n - 1) * n + (n - 1)].clone();
                if b.negate {
                    d = -d;
                }
                let s: BigInt = scales.iter().product();
                Ok(Scalar::Q(BigRational::new(d, s)))
            }
            Field::Ff(ff) => {
                self.check_cap()?;
                let (mut a, scales) = self.polynomial_rows();
                let b = bareiss(&mut a, n, n)?;
                if b.rank < n {
                    return Ok(self.field.zero());
                }
                let mut d = a[(n - 1) * n + (n - 1)].0.clone();
                if b.negate {
                    d = d.neg();
                }
                let mut s = Poly::one(&ff.base);
                for x in &scales {
                    s = s.mul(x);
                }
                Ok(Scalar::Ff(Box::new(RatFn::new(ff.clone(), d, s))))
            }
        }
    }

    /// Forward elimination over the field; returns (echelon, pivots, det-or-zero).
    fn gauss(&self) -> Result<(Mat, Vec<usize>, Scalar)> {
        let mut a = self.clone();
        let mut det = self.field.one();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let mut best: Option<(usize, usize)> = None;
            for i in r..a.rows {
                let x = a.get(i, c);
                if !x.is_zero() {
                    let w = x.weight();
                    if best.map_or(true, |(_, bw)| w < bw) {
                        best = Some((i, w));
                    }
                }
            }
            let Some((piv, _)) = best else { continue };
            if piv != r {
                a.swap_rows(piv, r);
                det = det.neg();
            }
            let pv = a.get(r, c).clone();
            det = det.mul(&pv);
            let inv = pv.checked_inv()?;
            for i in r + 1..a.rows {
                let f = a.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                let f = f.mul(&inv);
                for j in c..a.cols {
                    let t = a.get(r, j);
                    if t.is_zero() {
                        continue;
                    }
                    let v = a.get(i, j).sub(&f.mul(t));
                    a.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        if !self.is_square() || pivots.len() < self.rows {
            det = self.field.zero();
        }
        Ok((a, pivots, det))
    }

    pub fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(i * self.cols + j, k * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + k);
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        self.try_rref().expect("rref")
    }

    pub fn try_rref(&self) -> Result<(Mat, Vec<usize>)> {
        if let Field::Fp(p) = self.field {
            let mut a: Vec<u64> = self.data.iter().map(|x| x.residue().unwrap()).collect();
            let piv = modular::rref_mod(&mut a, self.rows, self.cols, p);
            let data = a.into_iter().map(|v| Scalar::fp(v, p)).collect();
            return Ok((Mat { field: self.field.clone(), rows: self.rows, cols: self.cols, data }, piv));
        }
        if let Field::Ff(_) = self.field {
            self.check_cap()?;
        }
        let (mut a, pivots, _) = self.gauss()?;
        for (k, &c) in pivots.iter().enumerate().rev() {
            let inv = a.get(k, c).checked_inv()?;
            for j in c..a.cols {
                let v = a.get(k, j).mul(&inv);
                a.set(k, j, v);
            }
            for i in 0..k {
                let f = a.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..a.cols {
                    let t = a.get(k, j);
                    if t.is_zero() {
                        continue;
                    }
                    let v = a.get(i, j).sub(&f.mul(t));
                    a.set(i, j, v);
                }
            }
        }
        if let Field::Ff(_) = self.field {
            a.check_cap()?;
        }
        Ok((a, pivots))
    }

    /// Basis of the right kernel `{v : M v = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        self.try_kernel_basis().expect("kernel")
    }

    pub fn try_kernel_basis(&self) -> Result<Vec<Vector>> {
        let (r, pivots) = self.try_rref()?;
        let mut out = Vec::new();
        let mut is_piv = vec![None; self.cols];
        for (k, &c) in pivots.iter().enumerate() {
            is_piv[c] = Some(k);
        }
        for free in 0..self.cols {
            if is_piv[free].is_some() {
                continue;
            }
            let mut v = vec![self.field.zero(); self.cols];
            v[free] = self.field.one();
            for (k, &c) in pivots.iter().enumerate() {
                v[c] = r.get(k, free).neg();
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Basis of the row space (nonzero rows of the reduced echelon form).
    pub fn row_space_basis(&self) -> Vec<Vector> {
        let (r, piv) = self.rref();
        (0..piv.len()).map(|i| r.row(i)).collect()
    }

    /// Basis of the column space, chosen among the original columns.
    pub fn column_space_basis(&self) -> Vec<Vector> {
        let (_, piv) = self.rref();
        piv.iter().map(|&c| self.col(c)).collect()
    }

    pub fn inverse(&self) -> Option<Mat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Mat::hstack(&[self, &Mat::identity(&self.field, n)]);
        let (r, piv) = aug.try_rref().ok()?;
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        Some(r.block(0, n, n, 2 * n))
    }

    /// One solution of `M x = b`, if any.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows, "rhs length");
        let aug = Mat::hstack(&[self, &Mat::column(&self.field, b)]);
        let (r, piv) = aug.rref();
        if piv.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (k, &c) in piv.iter().enumerate() {
            x[c] = r.get(k, self.cols).clone();
        }
        Some(x)
    }

    /// Pfaffian by expansion along the first row.
    pub fn pfaffian(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::NotSquare);
        }
        if !self.is_alternating() || self.rows % 2 == 1 {
            return Err(Error::NotAlternating);
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.pf_rec(&idx))
    }

    fn pf_rec(&self, idx: &[usize]) -> Scalar {
        if idx.is_empty() {
            return self.field.one();
        }
        let i0 = idx[0];
        let mut acc = self.field.zero();
        for k in 1..idx.len() {
            let a = self.get(i0, idx[k]);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[k]).collect();
            let t = a.mul(&self.pf_rec(&rest));
            acc = if k % 2 == 1 { acc.add(&t) } else { acc.sub(&t) };
        }
        acc
    }

    /// Moves every entry into `field` (a superfield of the current one).
    pub fn embed(&self, field: &Field) -> Result<Mat> {
        self.try_map_into(field, |x| field.embed(x))
    }

    /// Evaluates all indeterminates at `point`, landing in the base field.
    pub fn specialize(&self, point: &[Scalar]) -> Result<Mat> {
        let k = 0;
        self.specialize_tail(k, point)
    }

    /// Evaluates the variables `k..` at `vals`, keeping the first `k`.
    pub fn specialize_tail(&self, k: usize, vals: &[Scalar]) -> Result<Mat> {
        let Field::Ff(ff) = &self.field else {
            return Err(Error::DescriptorMismatch("specialize needs a function field".into()));
        };
        if k + vals.len() != ff.vars.len() {
            return Err(Error::DimensionMismatch(format!("{} values for {} variables", vals.len(), ff.vars.len() - k)));
        }
        let target = self.field.prefix(k);
        let vals: Vec<Scalar> = vals.iter().map(|v| target.embed(v)).collect::<Result<_>>()?;
        let mut ev = Evaluator::new(&target, k, &vals, &ff.base);
        let data = self.data.iter().map(|x| ev.eval_scalar(x)).collect::<Result<Vec<_>>>()?;
        Ok(Mat { field: target, rows: self.rows, cols: self.cols, data })
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> Scalar {
        let mut t = self.field.zero();
        for i in 0..self.rows.min(self.cols) {
            t = t.add(self.get(i, i));
        }
        t
    }
}

/// Evaluates polynomials at a partial point, caching powers.
pub(crate) struct Evaluator<'a> {
    target: &'a Field,
    k: usize,
    vals: &'a [Scalar],
    base: &'a BaseField,
    pow_cache: HashMap<(usize, u32), Scalar>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(target: &'a Field, k: usize, vals: &'a [Scalar], base: &'a BaseField) -> Self {
        Evaluator { target, k, vals, base, pow_cache: HashMap::new() }
    }

    fn pow(&mut self, j: usize, e: u32) -> Scalar {
        if let Some(v) = self.pow_cache.get(&(j, e)) {
            return v.clone();
        }
        let v = self.vals[j].pow(e);
        self.pow_cache.insert((j, e), v.clone());
        v
    }

    pub(crate) fn eval_poly(&mut self, p: &Poly) -> Scalar {
        let mut acc = self.target.zero();
        let ff = self.target.ff().cloned();
        for (m, c) in p.terms() {
            let mut t = match &ff {
                Some(ring) => Scalar::Ff(Box::new(RatFn::from_poly(ring.clone(), Poly::monomial(m.truncate(self.k), c.clone())))),
                None => c.clone(),
            };
            for j in 0..self.vals.len() {
                let e = m.exp(self.k + j);
                if e > 0 {
                    t = t.mul(&self.pow(j, e));
                }
            }
            acc = acc.add(&t);
        }
        let _ = self.base;
        acc
    }

    pub(crate) fn eval_scalar(&mut self, x: &Scalar) -> Result<Scalar> {
        match x {
            Scalar::Ff(r) => {
                let d = self.eval_poly(&r.den);
                if d.is_zero() {
                    return Err(Error::PoleAtPoint);
                }
                let n = self.eval_poly(&r.num);
                n.checked_div(&d)
            }
            other => self.target.embed(other),
        }
    }
}

/// Polynomial wrapper for the fraction-free elimination.
#[derive(Clone, Debug)]
pub(crate) struct PolyElt(Poly);

pub(crate) trait Domain: Clone {
    fn is_zero(&self) -> bool;
    fn mul(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn weight(&self) -> usize;
    fn degree(&self) -> usize;
}

impl Domain for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn weight(&self) -> usize {
        self.abs().bits() as usize
    }
    fn degree(&self) -> usize {
        0
    }
}

impl Domain for PolyElt {
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn mul(&self, o: &Self) -> Self {
        PolyElt(self.0.mul(&o.0))
    }
    fn sub(&self, o: &Self) -> Self {
        PolyElt(self.0.sub(&o.0))
    }
    fn div_exact(&self, o: &Self) -> Self {
        PolyElt(self.0.div_exact(&o.0).expect("Bareiss division is exact"))
    }
    fn weight(&self) -> usize {
        self.0.total_degree() * 1024 + self.0.len()
    }
    fn degree(&self) -> usize {
        self.0.total_degree()
    }
}

/// Exact rank of an integer-polynomial-row matrix over ℚ(x), from Bareiss
/// over F_p[x] for primes whose product exceeds a coefficient bound on the
/// `(r+1)`-minors: each prime gives `rank_p ≤ rank`, and all `(r+1)`-minors
/// vanish once `rank_p ≤ r` for enough primes.
fn multimodular_rank(rows_q: &[PolyElt], rows: usize, cols: usize, lower: usize) -> Result<usize> {
    let full = rows.min(cols);
    // clear coefficient denominators row by row
    let mut ints: Vec<Vec<Vec<(super::mono::Mono, BigInt)>>> = Vec::with_capacity(rows);
    let mut norms: Vec<BigInt> = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut l = BigInt::one();
        for j in 0..cols {
            for (_, c) in rows_q[i * cols + j].0.terms() {
                l = l.lcm(c.as_rational().expect("ℚ coefficients").denom());
            }
        }
        let mut row = Vec::with_capacity(cols);
        let mut norm = BigInt::zero();
        for j in 0..cols {
            let e: Vec<(super::mono::Mono, BigInt)> = rows_q[i * cols + j]
                .0
                .terms()
                .iter()
                .map(|(m, c)| {
                    let r = c.as_rational().unwrap();
                    let v = r.numer() * (&l / r.denom());
                    norm += v.abs();
                    (*m, v)
                })
                .collect();
            row.push(e);
        }
        ints.push(row);
        norms.push(norm);
    }
    norms.sort_by(|a, b| b.cmp(a));
    let mut r = lower;
    let mut p = (1u64 << 61) - 1;
    let mut product = BigInt::one();
    loop {
        if r >= full {
            return Ok(full);
        }
        let bound: BigInt = norms.iter().take(r + 1).product();
        if product > bound {
            return Ok(r);
        }
        while !super::is_prime(p) {
            p -= 2;
        }
        let pb = BigInt::from(p);
        let mut a: Vec<PolyElt> = Vec::with_capacity(rows * cols);
        for row in &ints {
            for e in row {
                let terms = e
                    .iter()
                    .map(|(m, c)| {
                        let v: BigInt = c.mod_floor(&pb);
                        (*m, Scalar::fp(u64::try_from(v).expect("reduced below p"), p))
                    })
                    .collect();
                a.push(PolyElt(Poly::from_terms(terms)));
            }
        }
        let rp = bareiss(&mut a, rows, cols)?.rank;
        if rp > r {
            r = rp;
            product = BigInt::one();
        } else {
            product *= &pb;
        }
        p -= 2;
    }
}

pub(crate) struct BareissOut {
    pub rank: usize,
    pub negate: bool,
}

/// Two-step-free Bareiss elimination with full pivoting on lowest weight.
/// After return the leading `rank × rank` block is upper triangular and the
/// last pivot equals the determinant up to sign when full rank.
pub(crate) fn bareiss<R: Domain>(a: &mut [R], rows: usize, cols: usize) -> Result<BareissOut> {
    let mut negate = false;
    let mut prev: Option<R> = None;
    let mut k = 0;
    while k < rows.min(cols) {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                let x = &a[i * cols + j];
                if !x.is_zero() {
                    let w = x.weight();
                    if best.map_or(true, |(_, _, bw)| w < bw) {
                        best = Some((i, j, w));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        if pi != k {
            for j in 0..cols {
                a.swap(pi * cols + j, k * cols + j);
            }
            negate = !negate;
        }
        if pj != k {
            for i in 0..rows {
                a.swap(i * cols + pj, i * cols + k);
            }
            negate = !negate;
        }
        let piv = a[k * cols + k].clone();
        for i in k + 1..rows {
            let aik = a[i * cols + k].clone();
            for j in k + 1..cols {
                let akj = &a[k * cols + j];
                let mut v = piv.mul(&a[i * cols + j]);
                if !aik.is_zero() && !akj.is_zero() {
                    v = v.sub(&aik.mul(akj));
                }
                if let Some(p) = &prev {
                    v = v.div_exact(p);
                }
                if v.degree() > DEGREE_CAP {
                    return Err(Error::DegreeCapExceeded(v.degree()));
                }
                a[i * cols + j] = v;
            }
        }
        for i in k + 1..rows {
            a[i * cols + k] = zero_like(&a[k * cols + k]);
        }
        prev = Some(piv);
        k += 1;
    }
    Ok(BareissOut { rank: k, negate })
}

fn zero_like<R: Domain>(x: &R) -> R {
    x.sub(x)
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Vector helpers.
pub mod vecops {
    use super::*;

    pub fn zero(field: &Field, n: usize) -> Vector {
        vec![field.zero(); n]
    }

    pub fn unit(field: &Field, n: usize, i: usize) -> Vector {
        let mut v = zero(field, n);
        v[i] = field.one();
        v
    }

    pub fn add(a: &[Scalar], b: &[Scalar]) -> Vector {
        a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
    }

    pub fn sub(a: &[Scalar], b: &[Scalar]) -> Vector {
        a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
    }

    pub fn scale(a: &[Scalar], k: &Scalar) -> Vector {
        a.iter().map(|x| x.mul(k)).collect()
    }

    pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
        let mut acc = a[0].zero_like();
        for (x, y) in a.iter().zip(b) {
            if !x.is_zero() && !y.is_zero() {
                acc = acc.add(&x.mul(y));
            }
        }
        acc
    }

    pub fn is_zero(a: &[Scalar]) -> bool {
        a.iter().all(|x| x.is_zero())
    }

    /// Linear combination `Σ c_i v_i`.
    pub fn combo(field: &Field, coeffs: &[Scalar], vs: &[Vector]) -> Vector {
        let n = vs.first().map_or(0, |v| v.len());
        let mut acc = zero(field, n);
        for (c, v) in coeffs.iter().zip(vs) {
            if !c.is_zero() {
                acc = add(&acc, &scale(v, c));
            }
        }
        acc
    }

    /// Rank of a family of vectors.
    pub fn rank(field: &Field, vs: &[Vector]) -> usize {
        if vs.is_empty() {
            return 0;
        }
        Mat::from_rows(field, vs.to_vec()).rank()
    }

    pub fn concat(a: &[Scalar], b: &[Scalar]) -> Vector {
        a.iter().chain(b).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_padded_identity() {
        let m = Mat::j_r(&Field::Q, 3, 3, 2);
        assert_eq!(m.rank(), 2);
        assert_eq!(Mat::zeros(&Field::Q, 3, 4).rank(), 0);
    }

    #[test]
    fn kernel_of_j1() {
        let f = Field::Q;
        let m = Mat::j_r(&f, 2, 2, 1);
        let k = m.kernel_basis();
        assert_eq!(k, vec![vec![f.zero(), f.one()]]);
    }

    #[test]
    fn determinant_rational() {
        let f = Field::Q;
        let m = Mat::from_i64(&f, &[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.det(), f.from_i64(18));
        let h = m.map(|x| x.div(&f.from_i64(2)));
        assert_eq!(h.det(), Scalar::rational(18, 8));
    }

    #[test]
    fn inverse_roundtrip_fp() {
        let f = Field::Fp(7);
        let m = Mat::from_i64(&f, &[&[1, 2], &[3, 5]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(&f, 2));
    }
}
