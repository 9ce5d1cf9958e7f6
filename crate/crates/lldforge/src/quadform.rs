//! Quadratic forms given by upper-triangular Gram matrices.
//!
//! Nothing here divides by 2, so characteristic 2 is handled uniformly;
//! the few places that need char ≠ 2 say so and fail with `Undecided`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::exactalg::{vecops, Field, Mat, Mono, Poly, RatFn, Scalar, Vector, MAX_VARS};
use crate::fpfast;

/// `q(x) = xᵀ·G·x` with `G` upper triangular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm {
    gram: Mat,
}

/// Why a form has no nonzero zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonisotropyReason {
    ExhaustiveEnumeration,
    PositiveDefiniteDiagonalization,
    Char2SquareInjectivity,
    DegreeParity,
    /// No primitive integral zero modulo `p^k` after clearing denominators.
    LocalObstruction { p: u64, k: u32 },
}

impl std::fmt::Display for NonisotropyReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NonisotropyReason::ExhaustiveEnumeration => f.write_str("exhaustive"),
            NonisotropyReason::PositiveDefiniteDiagonalization => f.write_str("positive-definite"),
            NonisotropyReason::Char2SquareInjectivity => f.write_str("char2-square-injectivity"),
            NonisotropyReason::DegreeParity => f.write_str("degree-parity"),
            NonisotropyReason::LocalObstruction { p, k } => write!(f, "local-obstruction-{p}^{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsotropyCertificate {
    Isotropic(Vector),
    Nonisotropic(NonisotropyReason),
}

impl IsotropyCertificate {
    pub fn is_isotropic(&self) -> bool {
        matches!(self, IsotropyCertificate::Isotropic(_))
    }
}

/// Answer to "is `α` a value of `q`".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Representation {
    Represented(Vector),
    NotRepresented(NonisotropyReason),
}

/// An isometry together with reflection axes `a_1..a_k` such that the map
/// equals `s_{a_1} ∘ ⋯ ∘ s_{a_k}`.
#[derive(Clone, Debug)]
pub struct ReflectionProduct {
    pub map: Mat,
    pub axes: Vec<Vector>,
}

fn fold_upper(m: &Mat) -> Mat {
    let n = m.rows();
    Mat::from_fn(m.field(), n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => m.get(i, j).add(m.get(j, i)),
        std::cmp::Ordering::Equal => m.get(i, i).clone(),
        std::cmp::Ordering::Greater => m.field().zero(),
    })
}

impl QuadForm {
    /// Any square matrix `M` defines `x ↦ xᵀMx`; it is folded to upper triangular form.
    pub fn new(m: &Mat) -> Result<QuadForm> {
        if !m.is_square() {
            return Err(Error::NotSquare);
        }
        Ok(QuadForm { gram: fold_upper(m) })
    }

    pub fn diag(field: &Field, coeffs: &[Scalar]) -> QuadForm {
        QuadForm { gram: Mat::diag(field, coeffs) }
    }

    /// `[a,b] : (x,y) ↦ ax² + xy + by²`, characteristic 2 only.
    pub fn binary_char2(field: &Field, a: &Scalar, b: &Scalar) -> Result<QuadForm> {
        if field.characteristic() != 2 {
            return Err(Error::CharMismatch(format!("[a,b] needs characteristic 2, got {field}")));
        }
        let mut g = Mat::diag(field, &[a.clone(), b.clone()]);
        g.set(0, 1, field.one());
        Ok(QuadForm { gram: g })
    }

    pub fn orth_sum(&self, o: &QuadForm) -> Result<QuadForm> {
        if self.field() != o.field() {
            return Err(Error::DescriptorMismatch("orthogonal sum of forms over different fields".into()));
        }
        Ok(QuadForm { gram: Mat::block_diag(&[&self.gram, &o.gram]) })
    }

    /// `⟨a_1,…,a_n⟩ ⊗ q = a_1 q ⊥ ⋯ ⊥ a_n q`.
    pub fn tensor_diag(coeffs: &[Scalar], q: &QuadForm) -> QuadForm {
        let parts: Vec<Mat> = coeffs.iter().map(|a| q.gram.scale(a)).collect();
        let refs: Vec<&Mat> = parts.iter().collect();
        QuadForm { gram: Mat::block_diag(&refs) }
    }

    pub fn scale(&self, a: &Scalar) -> QuadForm {
        QuadForm { gram: self.gram.scale(a) }
    }

    pub fn field(&self) -> &Field {
        self.gram.field()
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    fn check_len(&self, x: &[Scalar]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} for a form of dimension {}", x.len(), self.dim())));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[Scalar]) -> Result<Scalar> {
        self.check_len(x)?;
        let mut acc = self.field().zero();
        for i in 0..self.dim() {
            if x[i].is_zero() {
                continue;
            }
            for j in i..self.dim() {
                let g = self.gram.get(i, j);
                if !g.is_zero() && !x[j].is_zero() {
                    acc = acc.add(&g.mul(&x[i]).mul(&x[j]));
                }
            }
        }
        Ok(acc)
    }

    /// Matrix of `b_q(x,y) = q(x+y) − q(x) − q(y)`, i.e. `G + Gᵀ`.
    pub fn polar(&self) -> Mat {
        self.gram.add(&self.gram.transpose())
    }

    pub fn bilinear(&self, x: &[Scalar], y: &[Scalar]) -> Result<Scalar> {
        self.check_len(x)?;
        self.check_len(y)?;
        if x.is_empty() {
            return Ok(self.field().zero());
        }
        Ok(vecops::dot(x, &self.polar().mul_vec(y)))
    }

    /// `u` preserves `q` iff `uᵀGu` folds back to `G`.
    pub fn is_isometry(&self, u: &Mat) -> bool {
        u.shape() == (self.dim(), self.dim()) && fold_upper(&u.transpose().mul(&self.gram).mul(u)) == self.gram
    }

    /// Whether the polar form is nondegenerate.
    pub fn is_regular(&self) -> bool {
        self.polar().rank() == self.dim()
    }

    pub fn is_isotropic(&self) -> Result<IsotropyCertificate> {
        let n = self.dim();
        if n == 0 {
            return Ok(IsotropyCertificate::Nonisotropic(NonisotropyReason::ExhaustiveEnumeration));
        }
        for i in 0..n {
            if self.gram.get(i, i).is_zero() {
                return Ok(IsotropyCertificate::Isotropic(vecops::unit(self.field(), n, i)));
            }
        }
        match self.field().clone() {
            Field::Fp(p) => self.isotropy_exhaustive(p),
            Field::Q => {
                if self.is_definite_q() {
                    return Ok(IsotropyCertificate::Nonisotropic(NonisotropyReason::PositiveDefiniteDiagonalization));
                }
                if let Some(w) = self.small_zero_q() {
                    return Ok(IsotropyCertificate::Isotropic(w));
                }
                if let Some((p, k)) = self.local_obstruction() {
                    return Ok(IsotropyCertificate::Nonisotropic(NonisotropyReason::LocalObstruction { p, k }));
                }
                Err(Error::Undecided("no isotropy certificate applies to this form over Q".into()))
            }
            Field::Ff(_) => {
                if self.field().characteristic() == 2 && self.polar().is_zero() {
                    let coeffs: Vec<Scalar> = (0..n).map(|i| self.gram.get(i, i).clone()).collect();
                    return match char2_square_dependency(self.field(), &coeffs)? {
                        None => Ok(IsotropyCertificate::Nonisotropic(NonisotropyReason::Char2SquareInjectivity)),
                        Some(w) => Ok(IsotropyCertificate::Isotropic(w)),
                    };
                }
                Err(Error::Undecided("no isotropy certificate applies to this form over a function field".into()))
            }
        }
    }

    /// Decides whether `α ≠ 0` is a value of the non-isotropic form `q`, by
    /// certifying `q ⊥ ⟨−α⟩`.
    pub fn represents(&self, alpha: &Scalar) -> Result<Representation> {
        if alpha.is_zero() {
            return Err(Error::PreconditionFailed("alpha must be nonzero".into()));
        }
        let ext = self.orth_sum(&QuadForm::diag(self.field(), &[alpha.neg()]))?;
        match ext.is_isotropic()? {
            IsotropyCertificate::Isotropic(w) => {
                let last = w[self.dim()].clone();
                if last.is_zero() {
                    return Err(Error::PreconditionFailed("q itself is isotropic".into()));
                }
                let inv = last.inv();
                Ok(Representation::Represented(w[..self.dim()].iter().map(|c| c.mul(&inv)).collect()))
            }
            IsotropyCertificate::Nonisotropic(NonisotropyReason::Char2SquareInjectivity) => {
                Ok(Representation::NotRepresented(NonisotropyReason::DegreeParity))
            }
            IsotropyCertificate::Nonisotropic(r) => Ok(Representation::NotRepresented(r)),
        }
    }

    fn residue_gram(&self) -> Vec<u64> {
        self.gram.entries().iter().map(|s| s.residue().unwrap()).collect()
    }

    fn eval_mod(g: &[u64], n: usize, x: &[u64], p: u64) -> u64 {
        let mut acc: u128 = 0;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in i..n {
                let t = g[i * n + j] as u128 * x[i] as u128 % p as u128 * x[j] as u128 % p as u128;
                acc = (acc + t) % p as u128;
            }
        }
        acc as u64
    }

    fn isotropy_exhaustive(&self, p: u64) -> Result<IsotropyCertificate> {
        let n = self.dim();
        let g = self.residue_gram();
        for v in fpfast::projective_vectors(p, n)? {
            if Self::eval_mod(&g, n, &v, p) == 0 {
                return Ok(IsotropyCertificate::Isotropic(v.iter().map(|&c| Scalar::fp(c, p)).collect()));
            }
        }
        Ok(IsotropyCertificate::Nonisotropic(NonisotropyReason::ExhaustiveEnumeration))
    }

    /// Exact image of `q` over a prime field, sorted by residue.
    pub fn value_range(&self) -> Result<Vec<Scalar>> {
        let p = match self.field() {
            Field::Fp(p) => *p,
            f => return Err(Error::PreconditionFailed(format!("value_range needs a finite field, got {f}"))),
        };
        let n = self.dim();
        let g = self.residue_gram();
        let mut seen = BTreeSet::new();
        for v in fpfast::all_vectors(p, n)? {
            seen.insert(Self::eval_mod(&g, n, &v, p));
            if seen.len() as u64 == p {
                break;
            }
        }
        Ok(seen.into_iter().map(|v| Scalar::fp(v, p)).collect())
    }

    /// Sylvester's criterion on the polar matrix, for both signs.
    fn is_definite_q(&self) -> bool {
        let b = self.polar();
        let n = self.dim();
        let signs: Vec<Option<bool>> = (1..=n).map(|k| b.block(0, k, 0, k).det().is_positive()).collect();
        let pos = signs.iter().all(|s| *s == Some(true));
        let neg = signs.iter().enumerate().all(|(k, s)| *s == Some(k % 2 == 1));
        pos || neg
    }

    /// Smallest-height integral zero on a bounded grid.
    fn small_zero_q(&self) -> Option<Vector> {
        let n = self.dim();
        let mut h = 1i64;
        while h < 10 && ((2 * h + 3) as u128).pow(n as u32) <= 20_000 {
            h += 1;
        }
        if ((2 * h + 1) as u128).pow(n as u32) > 20_000 {
            return None;
        }
        let vals: Vec<i64> = std::iter::once(0).chain((1..=h).flat_map(|k| [k, -k])).collect();
        let base = vals.len() as u64;
        let total = base.pow(n as u32);
        let mut best: Option<(i64, u64)> = None;
        for idx in 1..total {
            let x: Vec<i64> = fpfast::digits(idx, base, n).iter().rev().map(|&d| vals[d as usize]).collect();
            match x.iter().find(|c| **c != 0) {
                Some(c) if *c > 0 => {}
                _ => continue,
            }
            let height = x.iter().map(|c| c.abs()).max().unwrap();
            if best.is_some_and(|(bh, _)| bh <= height) {
                continue;
            }
            let xs: Vector = x.iter().map(|&c| Field::Q.from_i64(c)).collect();
            if self.evaluate(&xs).unwrap().is_zero() {
                best = Some((height, idx));
            }
        }
        best.map(|(_, idx)| fpfast::digits(idx, base, n).iter().rev().map(|&d| Field::Q.from_i64(vals[d as usize])).collect())
    }

    /// Integral Gram matrix after clearing denominators.
    fn integral_gram(&self) -> Option<Vec<i128>> {
        let mut l = BigInt::one();
        for s in self.gram.entries() {
            l = l.lcm(s.as_rational()?.denom());
        }
        self.gram
            .entries()
            .iter()
            .map(|s| {
                let r = s.as_rational().unwrap();
                (r.numer() * (&l / r.denom())).to_i128()
            })
            .collect()
    }

    /// Searches `p^k` (small `p`, `k ≤ 3`) with no primitive zero modulo `p^k`.
    fn local_obstruction(&self) -> Option<(u64, u32)> {
        let n = self.dim();
        let g = self.integral_gram()?;
        for p in [2u64, 3, 5, 7, 11, 13] {
            for k in 1..=3u32 {
                let m = p.pow(k);
                let count = fpfast::pow_u128(m, n);
                if count > 1 << 18 {
                    break;
                }
                let gm: Vec<u64> = g.iter().map(|&c| c.rem_euclid(m as i128) as u64).collect();
                let has_zero = (1..count as u64).any(|idx| {
                    let x = fpfast::digits(idx, m, n);
                    x.iter().any(|c| c % p != 0) && Self::eval_mod(&gm, n, &x, m) == 0
                });
                if !has_zero {
                    return Some((p, k));
                }
            }
        }
        None
    }

    /// `s_a(x) = x − (b_q(x,a)/q(a))·a`.
    pub fn reflection(&self, a: &[Scalar]) -> Result<Mat> {
        let qa = self.evaluate(a)?;
        if qa.is_zero() {
            return Err(Error::IsotropicAxis);
        }
        let ba = self.polar().mul_vec(a);
        let inv = qa.inv();
        let n = self.dim();
        let f = self.field();
        Ok(Mat::identity(f, n).sub(&Mat::from_fn(f, n, n, |i, j| a[i].mul(&ba[j]).mul(&inv))))
    }

    /// `x ↦ s_a(x)` without forming the matrix.
    fn reflect(&self, a: &[Scalar], x: &[Scalar]) -> Result<Vector> {
        let qa = self.evaluate(a)?;
        if qa.is_zero() {
            return Err(Error::IsotropicAxis);
        }
        let c = self.bilinear(x, a)?.div(&qa);
        Ok(vecops::sub(x, &vecops::scale(a, &c)))
    }

    /// Product `s_{a_1} ∘ ⋯ ∘ s_{a_k}`.
    pub fn reflection_product(&self, axes: &[Vector]) -> Result<Mat> {
        let mut m = Mat::identity(self.field(), self.dim());
        for a in axes {
            m = m.mul(&self.reflection(a)?);
        }
        Ok(m)
    }

    /// An orthogonal basis of anisotropic vectors (char ≠ 2, regular form).
    pub fn orthogonal_basis(&self) -> Result<Vec<Vector>> {
        if self.field().characteristic() == 2 {
            return Err(Error::Undecided("orthogonal bases need characteristic ≠ 2".into()));
        }
        if !self.is_regular() {
            return Err(Error::PreconditionFailed("form is degenerate".into()));
        }
        let f = self.field();
        let n = self.dim();
        let mut rest: Vec<Vector> = (0..n).map(|i| vecops::unit(f, n, i)).collect();
        let mut out = Vec::with_capacity(n);
        while !rest.is_empty() {
            let pick = rest.iter().position(|v| !self.evaluate(v).unwrap().is_zero());
            let w = match pick {
                Some(i) => rest.remove(i),
                None => {
                    // all remaining vectors isotropic: some pair sum is not
                    let (i, j) = (0..rest.len())
                        .flat_map(|i| (i + 1..rest.len()).map(move |j| (i, j)))
                        .find(|&(i, j)| !self.bilinear(&rest[i], &rest[j]).unwrap().is_zero())
                        .ok_or_else(|| Error::PreconditionFailed("form is degenerate".into()))?;
                    let w = vecops::add(&rest[i], &rest[j]);
                    rest.remove(j);
                    w
                }
            };
            let bw = self.bilinear(&w, &w)?;
            rest = rest
                .into_iter()
                .map(|v| {
                    let c = self.bilinear(&v, &w).unwrap().div(&bw);
                    vecops::sub(&v, &vecops::scale(&w, &c))
                })
                .collect();
            out.push(w);
        }
        Ok(out)
    }

    /// Writes the isometry `u` as a product of reflections, none of whose
    /// axes lies in the coordinate subspace spanned by `avoid`.
    ///
    /// Needs characteristic ≠ 2 and a regular form; F_2-type edge cases of
    /// the generation statement are not covered.
    pub fn decompose_into_reflections(&self, u: &Mat, avoid: &[usize]) -> Result<Vec<Vector>> {
        if !self.is_isometry(u) {
            return Err(Error::NotAnIsometry);
        }
        let f = self.field();
        let n = self.dim();
        if *u == Mat::identity(f, n) {
            return Ok(vec![]);
        }
        let basis = self.orthogonal_basis()?;
        let mut w = u.clone();
        let mut axes: Vec<Vector> = Vec::new();
        let mut rest: Vec<Vector> = basis;
        loop {
            rest.retain(|e| w.mul_vec(e) != *e);
            if rest.is_empty() {
                break;
            }
            let single = rest.iter().position(|e| {
                let d = vecops::sub(&w.mul_vec(e), e);
                !self.evaluate(&d).unwrap().is_zero()
            });
            match single {
                Some(i) => {
                    let d = vecops::sub(&w.mul_vec(&rest[i]), &rest[i]);
                    w = self.reflection(&d)?.mul(&w);
                    axes.push(d);
                }
                None => {
                    let e = rest[0].clone();
                    let d = vecops::add(&w.mul_vec(&e), &e);
                    w = self.reflection(&e)?.mul(&self.reflection(&d)?).mul(&w);
                    axes.push(d);
                    axes.push(e);
                }
            }
        }
        self.avoid_axes(&axes, avoid)
    }

    /// Replaces each axis inside the coordinate subspace `avoid` by the
    /// conjugate triple `b, s_b(a), b`; the product is unchanged.
    pub fn avoid_axes(&self, axes: &[Vector], avoid: &[usize]) -> Result<Vec<Vector>> {
        let mut out = Vec::with_capacity(axes.len());
        for a in axes.iter().cloned() {
            if inside(&a, avoid) {
                let b = self.conjugator(&a, avoid)?;
                let sa = self.reflect(&b, &a)?;
                out.push(b.clone());
                out.push(sa);
                out.push(b);
            } else {
                out.push(a);
            }
        }
        Ok(out)
    }

    /// `b` with `s_a = s_b ∘ s_{s_b(a)} ∘ s_b` and neither `b` nor `s_b(a)` inside `avoid`.
    fn conjugator(&self, a: &[Scalar], avoid: &[usize]) -> Result<Vector> {
        let f = self.field();
        let n = self.dim();
        let outside: Vec<usize> = (0..n).filter(|i| !avoid.contains(i)).collect();
        let mut cands: Vec<Vector> = Vec::new();
        for &j in &outside {
            for &s in avoid {
                cands.push(vecops::add(&vecops::unit(f, n, j), &vecops::unit(f, n, s)));
            }
            cands.push(vecops::unit(f, n, j));
        }
        for b in cands {
            if self.evaluate(&b)?.is_zero() || self.bilinear(&a.to_vec(), &b)?.is_zero() {
                continue;
            }
            let sa = self.reflect(&b, a)?;
            if !inside(&sa, avoid) {
                return Ok(b);
            }
        }
        Err(Error::AxisInsideK2)
    }

    /// Isometry with `x ↦ x′` and `y ↦ y′`, from at most four reflections.
    pub fn witt_extend(&self, x: &[Scalar], y: &[Scalar], x2: &[Scalar], y2: &[Scalar]) -> Result<ReflectionProduct> {
        let vals = [
            (self.evaluate(x)?, self.evaluate(x2)?),
            (self.evaluate(y)?, self.evaluate(y2)?),
            (self.bilinear(x, y)?, self.bilinear(x2, y2)?),
        ];
        if vals.iter().any(|(a, b)| a != b) {
            return Err(Error::IncompatibleValues("q(x), q(y) and b(x,y) must match their images".into()));
        }
        let det = self.plane_det(x, y)?;
        if det.is_zero() || self.plane_det(x2, y2)?.is_zero() {
            return Err(Error::DegeneratePlane);
        }
        if let Some(axes) = self.witt_direct(x, y, x2, y2)? {
            return self.product(axes);
        }
        if self.field().characteristic() == 2 {
            return Err(Error::Undecided("char-2 Witt step outside the two-reflection shape".into()));
        }
        // pass to an orthogonal anisotropic basis of the plane
        let f = self.field();
        let combos: Vec<(Scalar, Scalar)> = [(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1)]
            .iter()
            .map(|&(a, b)| (f.from_i64(a), f.from_i64(b)))
            .collect();
        let lin = |a: &Scalar, b: &Scalar, u: &[Scalar], v: &[Scalar]| vecops::add(&vecops::scale(u, a), &vecops::scale(v, b));
        let (a1, b1) = combos
            .iter()
            .find(|(a, b)| !self.evaluate(&lin(a, b, x, y)).unwrap().is_zero())
            .cloned()
            .ok_or(Error::DegeneratePlane)?;
        let v1 = lin(&a1, &b1, x, y);
        let v1p = lin(&a1, &b1, x2, y2);
        let (w, wp) = if b1.is_zero() { (y.to_vec(), y2.to_vec()) } else { (x.to_vec(), x2.to_vec()) };
        let c = self.bilinear(&w, &v1)?.div(&self.bilinear(&v1, &v1)?);
        let v2 = vecops::sub(&w, &vecops::scale(&v1, &c));
        let v2p = vecops::sub(&wp, &vecops::scale(&v1p, &c));
        let mut axes = self.line_step(&v1, &v1p)?;
        let m = self.reflection_product(&axes)?;
        let moved = m.mul_vec(&v2);
        // every axis below is orthogonal to v1′
        axes = [self.line_step(&moved, &v2p)?, axes].concat();
        self.product(axes)
    }

    /// `s_{x−x′}` then `s_{y₁−y′}` when both axes are anisotropic.
    fn witt_direct(&self, x: &[Scalar], y: &[Scalar], x2: &[Scalar], y2: &[Scalar]) -> Result<Option<Vec<Vector>>> {
        let mut axes = Vec::new();
        let mut y1 = y.to_vec();
        if x != x2 {
            let d = vecops::sub(x, x2);
            if self.evaluate(&d)?.is_zero() {
                return Ok(None);
            }
            y1 = self.reflect(&d, y)?;
            axes.push(d);
        }
        if y1 != y2 {
            let d = vecops::sub(&y1, y2);
            if self.evaluate(&d)?.is_zero() {
                return Ok(None);
            }
            axes.insert(0, d);
        }
        Ok(Some(axes))
    }

    /// Axes (outermost first) of an isometry sending the anisotropic `v` to `v′`.
    pub fn line_step(&self, v: &[Scalar], v2: &[Scalar]) -> Result<Vec<Vector>> {
        let qv = self.evaluate(v)?;
        if qv.is_zero() {
            return Err(Error::IsotropicAxis);
        }
        if qv != self.evaluate(v2)? {
            return Err(Error::IncompatibleValues("q(v) ≠ q(v′)".into()));
        }
        if v == v2 {
            return Ok(vec![]);
        }
        let d = vecops::sub(v, v2);
        if !self.evaluate(&d)?.is_zero() {
            return Ok(vec![d]);
        }
        if self.field().characteristic() == 2 {
            return Err(Error::Undecided("q(v − v′) = 0 in characteristic 2".into()));
        }
        // s_{v+v′}(v) = −v′, then s_{v′}
        Ok(vec![v2.to_vec(), vecops::add(v, v2)])
    }

    fn product(&self, axes: Vec<Vector>) -> Result<ReflectionProduct> {
        Ok(ReflectionProduct { map: self.reflection_product(&axes)?, axes })
    }

    fn plane_det(&self, x: &[Scalar], y: &[Scalar]) -> Result<Scalar> {
        let bxx = self.bilinear(x, x)?;
        let byy = self.bilinear(y, y)?;
        let bxy = self.bilinear(x, y)?;
        Ok(bxx.mul(&byy).sub(&bxy.mul(&bxy)))
    }
}

fn inside(a: &[Scalar], avoid: &[usize]) -> bool {
    a.iter().enumerate().all(|(i, c)| c.is_zero() || avoid.contains(&i))
}

/// Parity class of a monomial as a bit mask.
fn parity(m: &Mono) -> u32 {
    m.exponents().iter().enumerate().fold(0, |acc, (i, e)| acc | (((*e & 1) as u32) << i))
}

fn parity_mono(mask: u32) -> Mono {
    let e: Vec<u32> = (0..MAX_VARS).map(|i| (mask >> i) & 1).collect();
    Mono::from_exponents(&e)
}

/// Square root of a polynomial over F_2 all of whose exponents are even.
fn sqrt_poly_f2(p: &Poly) -> Option<Poly> {
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p.terms() {
        if parity(m) != 0 {
            return None;
        }
        let e: Vec<u32> = m.exponents().iter().map(|x| *x as u32 / 2).collect();
        terms.push((Mono::from_exponents(&e), c.clone()));
    }
    Some(Poly::from_terms(terms))
}

/// For `q = Σ a_i x_i²` over `F_2(v…)`: a zero of `q` if the `a_i` are
/// dependent over the subfield of squares, `None` if they are independent.
///
/// After scaling each `a_i` by its squared denominator, splitting by
/// exponent parity writes `a_i = Σ_ε m^ε c_{i,ε}` with `c_{i,ε}` squares;
/// the rank of `(c_{i,ε})` decides dependence.
fn char2_square_dependency(field: &Field, coeffs: &[Scalar]) -> Result<Option<Vector>> {
    let ff = field.ff().ok_or_else(|| Error::Undecided("not a function field".into()))?.clone();
    if ff.base.characteristic() != 2 || field.order().is_some() {
        return Err(Error::Undecided("square-class certificate needs base F_2".into()));
    }
    let n = coeffs.len();
    let mut dens = Vec::with_capacity(n);
    let mut parts: Vec<BTreeMap<u32, Vec<(Mono, Scalar)>>> = Vec::with_capacity(n);
    for a in coeffs {
        let r = match a.as_ratfn() {
            Some(r) => r.clone(),
            None => RatFn::from_poly(ff.clone(), Poly::constant(a.clone())),
        };
        let scaled = r.num.mul(&r.den);
        let mut by_class: BTreeMap<u32, Vec<(Mono, Scalar)>> = BTreeMap::new();
        for (m, c) in scaled.terms() {
            let mask = parity(m);
            by_class.entry(mask).or_default().push((m.div_of(&parity_mono(mask)), c.clone()));
        }
        parts.push(by_class);
        dens.push(r.den.clone());
    }
    let classes: BTreeSet<u32> = parts.iter().flat_map(|p| p.keys().copied()).collect();
    let classes: Vec<u32> = classes.into_iter().collect();
    let mat = Mat::from_fn(field, n, classes.len(), |i, j| match parts[i].get(&classes[j]) {
        Some(t) => Scalar::Ff(Box::new(RatFn::from_poly(ff.clone(), Poly::from_terms(t.clone())))),
        None => field.zero(),
    });
    let dep = mat.transpose().try_kernel_basis()?;
    let Some(mu) = dep.into_iter().next() else {
        return Ok(None);
    };
    // μ_i are squares; x_i = √μ_i · d_i undoes the denominator scaling
    let mut w = Vec::with_capacity(n);
    for (m, d) in mu.iter().zip(&dens) {
        let r = m.as_ratfn().cloned().unwrap_or_else(|| RatFn::from_poly(ff.clone(), Poly::constant(m.clone())));
        let (Some(sn), Some(sd)) = (sqrt_poly_f2(&r.num.mul(&r.den)), Some(r.den.clone())) else {
            return Err(Error::Undecided("square root of a dependency coefficient".into()));
        };
        // √(n/d) = √(n·d)/d
        w.push(Scalar::Ff(Box::new(RatFn::new(ff.clone(), sn.mul(d), sd))));
    }
    Ok(Some(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(ns: &[i64]) -> Vector {
        ns.iter().map(|&n| Field::Q.from_i64(n)).collect()
    }

    #[test]
    fn sum_of_squares() {
        let f = Field::Q;
        let form = QuadForm::diag(&f, &q(&[1, 1]));
        assert_eq!(form.evaluate(&q(&[3, 4])).unwrap(), f.from_i64(25));
    }

    #[test]
    fn binary_char2_value() {
        let f = Field::function_field(crate::exactalg::BaseField::Fp(2), &["a", "b"]).unwrap();
        let form = QuadForm::binary_char2(&f, &f.var(0), &f.var(1)).unwrap();
        let v = form.evaluate(&[f.one(), f.one()]).unwrap();
        assert_eq!(v, f.var(0).add(&f.one()).add(&f.var(1)));
        assert!(QuadForm::binary_char2(&Field::Q, &Field::Q.one(), &Field::Q.one()).is_err());
    }

    #[test]
    fn f3_sum_of_two_squares_anisotropic() {
        let f = Field::Fp(3);
        let form = QuadForm::diag(&f, &[f.one(), f.one()]);
        assert_eq!(form.is_isotropic().unwrap(), IsotropyCertificate::Nonisotropic(NonisotropyReason::ExhaustiveEnumeration));
    }

    #[test]
    fn hyperbolic_over_q() {
        let form = QuadForm::diag(&Field::Q, &q(&[1, -1]));
        assert_eq!(form.is_isotropic().unwrap(), IsotropyCertificate::Isotropic(q(&[1, 1])));
    }

    #[test]
    fn squares_mod_5() {
        let f = Field::Fp(5);
        let r = QuadForm::diag(&f, &[f.one()]).value_range().unwrap();
        assert_eq!(r, vec![Scalar::fp(0, 5), Scalar::fp(1, 5), Scalar::fp(4, 5)]);
    }

    #[test]
    fn gaussian_norm_misses_three() {
        // x² + y² − 3z² ≡ x² + y² + z² has no primitive zero mod 4
        let form = QuadForm::diag(&Field::Q, &q(&[1, 1]));
        assert_eq!(
            form.represents(&Field::Q.from_i64(3)).unwrap(),
            Representation::NotRepresented(NonisotropyReason::LocalObstruction { p: 2, k: 2 })
        );
        assert!(matches!(form.represents(&Field::Q.from_i64(5)).unwrap(), Representation::Represented(_)));
    }

    #[test]
    fn reflection_basics() {
        let f = Field::Q;
        let form = QuadForm::diag(&f, &q(&[1, 1]));
        let s = form.reflection(&q(&[1, 0])).unwrap();
        assert_eq!(s, Mat::from_i64(&f, &[&[-1, 0], &[0, 1]]));
        assert!(form.is_isometry(&s));
    }

    #[test]
    fn swap_by_witt() {
        let f = Field::Q;
        let form = QuadForm::diag(&f, &q(&[1, 1]));
        let w = form.witt_extend(&q(&[1, 0]), &q(&[0, 1]), &q(&[0, 1]), &q(&[1, 0])).unwrap();
        assert_eq!(w.map, Mat::from_i64(&f, &[&[0, 1], &[1, 0]]));
    }
}
