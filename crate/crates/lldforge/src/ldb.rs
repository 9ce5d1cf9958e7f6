//! LDB division algebras: a regular bilinear product `⋆` with a bilinear
//! quasi-left-inversion `•`, i.e. `x ⋆ (x • y) = q(x)·y`.

use crate::error::{Error, Result};
use crate::exactalg::{vecops, Field, Mat, Scalar, Vector};
use crate::matspace::MatSpace;
use crate::quadform::{IsotropyCertificate, NonisotropyReason, QuadForm};

/// Largest dimension accepted for the characteristic-2 tower.
pub const TOWER_DIM_CAP: usize = 4;

/// `x ⋆ y = L(x)·y` with `L` given on the standard basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearPairing {
    mats: Vec<Mat>,
}

impl BilinearPairing {
    pub fn new(mats: Vec<Mat>) -> Result<BilinearPairing> {
        let n = mats.len();
        if n == 0 {
            return Err(Error::EmptyBasis);
        }
        if mats.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::DimensionMismatch(format!("a pairing on K^{n} needs {n} matrices of size {n}×{n}")));
        }
        Ok(BilinearPairing { mats })
    }

    /// Pairing from a bilinear product on coordinate vectors.
    pub fn from_product(field: &Field, n: usize, mul: impl Fn(&[Scalar], &[Scalar]) -> Vector) -> BilinearPairing {
        let mats = (0..n)
            .map(|i| {
                let ei = vecops::unit(field, n, i);
                let cols: Vec<Vector> = (0..n).map(|j| mul(&ei, &vecops::unit(field, n, j))).collect();
                Mat::from_rows(field, cols).transpose()
            })
            .collect();
        BilinearPairing { mats }
    }

    pub fn field(&self) -> &Field {
        self.mats[0].field()
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    /// `L(x)`.
    pub fn left(&self, x: &[Scalar]) -> Mat {
        let mut acc = Mat::zeros(self.field(), self.dim(), self.dim());
        for (c, m) in x.iter().zip(&self.mats) {
            if !c.is_zero() {
                acc = acc.add(&m.scale(c));
            }
        }
        acc
    }

    pub fn apply(&self, x: &[Scalar], y: &[Scalar]) -> Vector {
        self.left(x).mul_vec(y)
    }

    /// `L(x)` with the coordinates of `x` as fresh indeterminates.
    pub fn generic_left(&self, prefix: &str) -> Result<Mat> {
        let f = self.field();
        let names = f.fresh_vars(prefix, self.dim());
        let g = f.extend(&names)?;
        let base = f.nvars();
        let mut acc = Mat::zeros(&g, self.dim(), self.dim());
        for (i, m) in self.mats.iter().enumerate() {
            acc = acc.add(&m.embed(&g)?.scale(&g.var(base + i)));
        }
        Ok(acc)
    }

    /// `(x,y) ↦ λ·(x ⋆ y)`.
    pub fn scale(&self, k: &Scalar) -> BilinearPairing {
        BilinearPairing { mats: self.mats.iter().map(|m| m.scale(k)).collect() }
    }
}

/// How regularity of `⋆` was established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegularityCertificate {
    FiniteEnumeration,
    ConstructionProof(String),
    GenericDetPlusSamples,
}

/// `L_⋆(x)·L_•(x) = q(x)·I` as a polynomial identity; `q` from the
/// coefficients of the quadratic expansion.
pub fn attached_form(star: &BilinearPairing, bullet: &BilinearPairing) -> Result<QuadForm> {
    let n = star.dim();
    if bullet.dim() != n || star.field() != bullet.field() {
        return Err(Error::DimensionMismatch("pairings of different shapes".into()));
    }
    let f = star.field();
    let mut gram = Mat::zeros(f, n, n);
    for i in 0..n {
        for j in i..n {
            let mut c = star.mats[i].mul(&bullet.mats[j]);
            if i != j {
                c = c.add(&star.mats[j].mul(&bullet.mats[i]));
            }
            let s = c.get(0, 0).clone();
            if c != Mat::identity(f, n).scale(&s) {
                return Err(Error::NotScalarComposite(format!("coefficient of x_{i}·x_{j} is not a scalar matrix")));
            }
            gram.set(i, j, s);
        }
    }
    QuadForm::new(&gram)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdbAlgebra {
    pub name: String,
    pub star: BilinearPairing,
    pub bullet: BilinearPairing,
    pub q: QuadForm,
    pub regularity: RegularityCertificate,
    /// Present when `q` carries an exact non-isotropy certificate.
    pub q_certificate: Option<NonisotropyReason>,
}

impl LdbAlgebra {
    /// Verifies the identity and certifies `q`. `proof` names a
    /// construction-level regularity argument used when no exact certificate
    /// applies; without it the fallback is a generic determinant plus samples.
    pub fn new(name: &str, star: BilinearPairing, bullet: BilinearPairing, proof: Option<&str>) -> Result<LdbAlgebra> {
        let q = attached_form(&star, &bullet)?;
        let (regularity, q_certificate) = match q.is_isotropic() {
            Ok(IsotropyCertificate::Isotropic(w)) => {
                return Err(Error::IsotropicNorm(format!("q vanishes at {}", fmt_vec(&w))));
            }
            Ok(IsotropyCertificate::Nonisotropic(r)) => {
                let reg = match (&r, proof) {
                    (NonisotropyReason::ExhaustiveEnumeration, _) => RegularityCertificate::FiniteEnumeration,
                    (_, Some(p)) => RegularityCertificate::ConstructionProof(p.to_string()),
                    (r, None) => RegularityCertificate::ConstructionProof(format!("{r:?}")),
                };
                (reg, Some(r))
            }
            Err(Error::Undecided(_)) => match proof {
                Some(p) => (RegularityCertificate::ConstructionProof(p.to_string()), None),
                None => {
                    generic_regularity_check(&star)?;
                    (RegularityCertificate::GenericDetPlusSamples, None)
                }
            },
            Err(e) => return Err(e),
        };
        Ok(LdbAlgebra { name: name.to_string(), star, bullet, q, regularity, q_certificate })
    }

    pub fn field(&self) -> &Field {
        self.star.field()
    }

    pub fn dim(&self) -> usize {
        self.star.dim()
    }

    pub fn check_identity(&self) -> Result<()> {
        let q = attached_form(&self.star, &self.bullet)?;
        if q != self.q {
            return Err(Error::IdentityViolated("stored form differs from the attached form".into()));
        }
        Ok(())
    }
}

fn fmt_vec(v: &[Scalar]) -> String {
    let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// `det L(x) ≠ 0` symbolically and at unit and small integral points.
fn generic_regularity_check(star: &BilinearPairing) -> Result<()> {
    let g = star.generic_left("x")?;
    if g.try_det()?.is_zero() {
        return Err(Error::IsotropicNorm("generic left multiplication is singular".into()));
    }
    let f = star.field();
    let n = star.dim();
    for i in 0..n {
        for k in 1..=3 {
            let mut x = vecops::unit(f, n, i);
            for (j, c) in x.iter_mut().enumerate() {
                if j != i {
                    *c = f.from_i64(((j * k) % 5) as i64);
                }
            }
            if star.left(&x).det().is_zero() {
                return Err(Error::IsotropicNorm(format!("L(x) singular at {}", fmt_vec(&x))));
            }
        }
    }
    Ok(())
}

/// The three kinds of 2-dimensional extension.
#[derive(Clone, Debug)]
pub enum QuadraticKind {
    /// `K[t]/(t² − d)`, char ≠ 2.
    Kummer(Scalar),
    /// `K[t]/(t² + t + d)`, char 2.
    ArtinSchreier(Scalar),
    /// `K[t]/(t² − s)` with `s` a non-square, char 2; `⋆ = •`.
    Inseparable(Scalar),
}

pub fn make_quadratic_ext(field: &Field, kind: QuadraticKind) -> Result<LdbAlgebra> {
    let one = field.one();
    let zero = field.zero();
    let id = Mat::identity(field, 2);
    let char2 = field.characteristic() == 2;
    let (lt, bullet_t, name) = match &kind {
        QuadraticKind::Kummer(d) => {
            if char2 {
                return Err(Error::CharMismatch("Kummer extensions need characteristic ≠ 2".into()));
            }
            let lt = Mat::from_rows(field, vec![vec![zero.clone(), d.clone()], vec![one.clone(), zero.clone()]]);
            (lt.clone(), lt.neg(), format!("K(√{d})"))
        }
        QuadraticKind::ArtinSchreier(d) => {
            if !char2 {
                return Err(Error::CharMismatch("Artin–Schreier extensions need characteristic 2".into()));
            }
            // t² = t + d, σ(t) = t + 1
            let lt = Mat::from_rows(field, vec![vec![zero.clone(), d.clone()], vec![one.clone(), one.clone()]]);
            (lt.clone(), id.add(&lt), format!("K[t]/(t²+t+{d})"))
        }
        QuadraticKind::Inseparable(s) => {
            if !char2 {
                return Err(Error::CharMismatch("inseparable quadratic extensions need characteristic 2".into()));
            }
            let lt = Mat::from_rows(field, vec![vec![zero.clone(), s.clone()], vec![one.clone(), zero.clone()]]);
            (lt.clone(), lt, format!("K(√{s})"))
        }
    };
    let star = BilinearPairing::new(vec![id.clone(), lt])?;
    let bullet = BilinearPairing::new(vec![id, bullet_t])?;
    match LdbAlgebra::new(&name, star, bullet, None) {
        Err(Error::IsotropicNorm(m)) => Err(Error::ReducibilityDetected(format!("t² polynomial has a root ({m})"))),
        r => r,
    }
}

/// Product in the quaternion algebra `(a,b)` on coordinates `(1,i,j,ij)`.
pub fn quat_mul(a: &Scalar, b: &Scalar, x: &[Scalar], y: &[Scalar]) -> Vector {
    let ab = a.mul(b);
    let t = |u: &Scalar, v: &Scalar| u.mul(v);
    vec![
        t(&x[0], &y[0]).add(&a.mul(&t(&x[1], &y[1]))).add(&b.mul(&t(&x[2], &y[2]))).sub(&ab.mul(&t(&x[3], &y[3]))),
        t(&x[0], &y[1]).add(&t(&x[1], &y[0])).sub(&b.mul(&t(&x[2], &y[3]))).add(&b.mul(&t(&x[3], &y[2]))),
        t(&x[0], &y[2]).add(&t(&x[2], &y[0])).add(&a.mul(&t(&x[1], &y[3]))).sub(&a.mul(&t(&x[3], &y[1]))),
        t(&x[0], &y[3]).add(&t(&x[3], &y[0])).add(&t(&x[1], &y[2])).sub(&t(&x[2], &y[1])),
    ]
}

/// Quaternion conjugation.
pub fn quat_conj(x: &[Scalar]) -> Vector {
    vec![x[0].clone(), x[1].neg(), x[2].neg(), x[3].neg()]
}

pub fn make_quaternion(field: &Field, a: &Scalar, b: &Scalar) -> Result<LdbAlgebra> {
    if field.characteristic() == 2 {
        return Err(Error::CharMismatch("quaternion constructor needs characteristic ≠ 2".into()));
    }
    let star = BilinearPairing::from_product(field, 4, |x, y| quat_mul(a, b, x, y));
    let bullet = BilinearPairing::from_product(field, 4, |x, y| quat_mul(a, b, &quat_conj(x), y));
    let alg = LdbAlgebra::new(&format!("({a},{b})_K"), star, bullet, None)?;
    require_certificate(alg)
}

/// Components of the Cayley–Dickson double of `(a,b)` with parameter `ε`.
pub fn octonion_mul(a: &Scalar, b: &Scalar, eps: &Scalar, x: &[Scalar], y: &[Scalar]) -> Vector {
    let m = |u: &[Scalar], v: &[Scalar]| quat_mul(a, b, u, v);
    let (p, r) = x.split_at(4);
    let (c, d) = y.split_at(4);
    // (p,r)*(c,d) = (pc − d r*, p* d − ε c r)
    let first = vecops::sub(&m(p, c), &m(d, &quat_conj(r)));
    let second = vecops::sub(&m(&quat_conj(p), d), &vecops::scale(&m(c, r), eps));
    vecops::concat(&first, &second)
}

pub fn octonion_bullet(a: &Scalar, b: &Scalar, eps: &Scalar, x: &[Scalar], y: &[Scalar]) -> Vector {
    let m = |u: &[Scalar], v: &[Scalar]| quat_mul(a, b, u, v);
    let (p, r) = x.split_at(4);
    let (c, d) = y.split_at(4);
    // (p,r)•(c,d) = (p* c + d r*, p d + ε c r)
    let first = vecops::add(&m(&quat_conj(p), c), &m(d, &quat_conj(r)));
    let second = vecops::add(&m(p, d), &vecops::scale(&m(c, r), eps));
    vecops::concat(&first, &second)
}

pub fn make_octonion(field: &Field, a: &Scalar, b: &Scalar, eps: &Scalar) -> Result<LdbAlgebra> {
    if field.characteristic() == 2 {
        return Err(Error::CharMismatch("octonion constructor needs characteristic ≠ 2".into()));
    }
    let star = BilinearPairing::from_product(field, 8, |x, y| octonion_mul(a, b, eps, x, y));
    let bullet = BilinearPairing::from_product(field, 8, |x, y| octonion_bullet(a, b, eps, x, y));
    let alg = LdbAlgebra::new(&format!("({a},{b},{eps})_K"), star, bullet, None)?;
    require_certificate(alg)
}

fn require_certificate(alg: LdbAlgebra) -> Result<LdbAlgebra> {
    if alg.q_certificate.is_none() {
        return Err(Error::CertificateMissing(format!("no non-isotropy certificate for the norm of {}", alg.name)));
    }
    Ok(alg)
}

/// `L = F_2(t_1,…,t_{n+1})` over `K = F_2(t_1²,…,t_n²,t_{n+1})`; `K` uses
/// variables `s1..sn` for `t_i²` and `t{n+1}`.
pub fn make_char2_tower(n: usize) -> Result<LdbAlgebra> {
    make_char2_tower_capped(n, TOWER_DIM_CAP)
}

pub fn make_char2_tower_capped(n: usize, cap: usize) -> Result<LdbAlgebra> {
    if n == 0 {
        return Err(Error::PreconditionFailed("tower needs n ≥ 1".into()));
    }
    if n >= usize::BITS as usize - 1 || (1usize << n) > cap {
        return Err(Error::CapExceeded(format!("2^{n} exceeds the dimension cap {cap}")));
    }
    let mut names: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    names.push(format!("t{}", n + 1));
    let f = Field::function_field_owned(crate::exactalg::BaseField::Fp(2), names)?;
    let dim = 1usize << n;
    // t^S · t^T = t^{S△T} · Π_{i∈S∩T} s_i
    let mats: Vec<Mat> = (0..dim)
        .map(|s| {
            let mut m = Mat::zeros(&f, dim, dim);
            for t in 0..dim {
                let mut c = f.one();
                for i in 0..n {
                    if (s & t) >> i & 1 == 1 {
                        c = c.mul(&f.var(i));
                    }
                }
                m.set(s ^ t, t, c);
            }
            m
        })
        .collect();
    let star = BilinearPairing::new(mats)?;
    let alg = LdbAlgebra::new(&format!("char-2 tower n={n}"), star.clone(), star, None)?;
    require_certificate(alg)
}

/// `(A, •, ⋆)`.
pub fn swap_laws(a: &LdbAlgebra) -> Result<LdbAlgebra> {
    let q = attached_form(&a.bullet, &a.star)?;
    if q != a.q {
        return Err(Error::IdentityViolated("x • (x ⋆ y) ≠ q(x)·y".into()));
    }
    Ok(LdbAlgebra {
        name: format!("{} (swapped)", a.name),
        star: a.bullet.clone(),
        bullet: a.star.clone(),
        q,
        regularity: a.regularity.clone(),
        q_certificate: a.q_certificate.clone(),
    })
}

/// `x ⋆′ y = h(f(x) ⋆ g(y))`, `x •′ y = g⁻¹(f(x) • h⁻¹(y))`; attached form `q∘f`.
pub fn weak_equivalence_transport(a: &LdbAlgebra, f: &Mat, g: &Mat, h: &Mat) -> Result<LdbAlgebra> {
    let n = a.dim();
    for m in [f, g, h] {
        if m.shape() != (n, n) {
            return Err(Error::DimensionMismatch("transport maps must be n×n".into()));
        }
    }
    let gi = g.inverse().ok_or(Error::SingularTransform)?;
    let hi = h.inverse().ok_or(Error::SingularTransform)?;
    f.inverse().ok_or(Error::SingularTransform)?;
    let mut sm = Vec::with_capacity(n);
    let mut bm = Vec::with_capacity(n);
    for i in 0..n {
        let fx = f.col(i);
        sm.push(h.mul(&a.star.left(&fx)).mul(g));
        bm.push(gi.mul(&a.bullet.left(&fx)).mul(&hi));
    }
    let star = BilinearPairing::new(sm)?;
    let bullet = BilinearPairing::new(bm)?;
    let q = attached_form(&star, &bullet)?;
    let expected = QuadForm::new(&f.transpose().mul(a.q.gram()).mul(f))?;
    if q != expected {
        return Err(Error::IdentityViolated("transported form is not q∘f".into()));
    }
    Ok(LdbAlgebra {
        name: format!("{} (transported)", a.name),
        star,
        bullet,
        q,
        regularity: RegularityCertificate::ConstructionProof(format!("weak equivalence with {}", a.name)),
        q_certificate: a.q_certificate.clone(),
    })
}

/// The matrices `A_k` with `A(X)` having rows `Xᵀ A_k`.
pub fn row_matrices(p: &BilinearPairing) -> Vec<Mat> {
    let n = p.dim();
    (0..n).map(|k| Mat::from_fn(p.field(), n, n, |i, j| p.mats[i].get(k, j).clone())).collect()
}

/// The matrices `B_j` with `B(X)` having columns `B_j X`.
pub fn column_matrices(p: &BilinearPairing) -> Vec<Mat> {
    let n = p.dim();
    (0..n).map(|j| Mat::from_fn(p.field(), n, n, |k, i| p.mats[i].get(k, j).clone())).collect()
}

/// `A_1·Vect(B_2,…,B_n)`: an (n−1)-dimensional alternating space whose
/// nonzero elements are invertible.
pub fn alternating_from_ldb(a: &LdbAlgebra) -> Result<MatSpace> {
    let n = a.dim();
    if n < 2 {
        return Err(Error::PreconditionFailed("needs dim A ≥ 2".into()));
    }
    if n % 2 == 1 {
        return Err(Error::PreconditionFailed(format!("LDB algebras have even dimension, got {n}")));
    }
    let am = row_matrices(&a.star);
    let bm = column_matrices(&a.bullet);
    let basis: Vec<Mat> = bm[1..].iter().map(|b| am[0].mul(b)).collect();
    if basis.iter().any(|m| !m.is_alternating()) {
        return Err(Error::NotAlternating);
    }
    let space = MatSpace::new(a.field(), n, n, basis)?;
    if space.generic_matrix()?.mat.try_det()?.is_zero() {
        return Err(Error::IdentityViolated("generic element of A_1·Vect(B_i) is singular".into()));
    }
    Ok(space)
}

/// Basis of all bilinear `∘` with `L_⋆(x)·L_∘(x)` scalar for every `x`.
pub fn quasi_inversions(star: &BilinearPairing) -> Result<Vec<BilinearPairing>> {
    let n = star.dim();
    let f = star.field();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let nz = n * n * n;
    let unknowns = nz + pairs.len();
    // unknown index of Z_j[(r,c)]
    let zi = |j: usize, r: usize, c: usize| j * n * n + r * n + c;
    let mut rows: Vec<Vector> = Vec::new();
    for (pi, &(i, j)) in pairs.iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                let mut row = vecops::zero(f, unknowns);
                // (L_i Z_j + L_j Z_i)[r,c] − δ_{rc}·c_{ij}
                let mut push = |a: usize, b: usize| {
                    for k in 0..n {
                        let l = star.mats[a].get(r, k);
                        if !l.is_zero() {
                            let idx = zi(b, k, c);
                            row[idx] = row[idx].add(l);
                        }
                    }
                };
                push(i, j);
                if i != j {
                    push(j, i);
                }
                if r == c {
                    row[nz + pi] = f.one().neg();
                }
                rows.push(row);
            }
        }
    }
    let sys = Mat::from_rows(f, rows);
    let ker = sys.try_kernel_basis()?;
    ker.into_iter()
        .map(|v| {
            let mats = (0..n).map(|j| Mat::from_fn(f, n, n, |r, c| v[zi(j, r, c)].clone())).collect();
            BilinearPairing::new(mats)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integers() {
        let f = Field::Q;
        let a = make_quadratic_ext(&f, QuadraticKind::Kummer(f.from_i64(-1))).unwrap();
        assert_eq!(a.q, QuadForm::diag(&f, &[f.one(), f.one()]));
        assert!(make_quadratic_ext(&f, QuadraticKind::Kummer(f.from_i64(4))).is_err());
    }

    #[test]
    fn hand_multiplied_quaternion() {
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        let h = make_quaternion(&f, &m1, &m1).unwrap();
        let x = vec![f.one(), f.one(), f.zero(), f.zero()];
        let y = vec![f.zero(), f.zero(), f.one(), f.zero()];
        let r = h.star.apply(&x, &h.bullet.apply(&x, &y));
        assert_eq!(r, vec![f.zero(), f.zero(), f.from_i64(2), f.zero()]);
        assert_eq!(h.q.evaluate(&x).unwrap(), f.from_i64(2));
    }

    #[test]
    fn one_dimensional_inversion_space() {
        let f = Field::Q;
        let a = make_quadratic_ext(&f, QuadraticKind::Kummer(f.from_i64(-1))).unwrap();
        let sols = quasi_inversions(&a.star).unwrap();
        assert_eq!(sols.len(), 1);
    }

    #[test]
    fn octonions_positive_definite() {
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        let o = make_octonion(&f, &m1, &m1, &m1).unwrap();
        assert_eq!(o.q, QuadForm::diag(&f, &vec![f.one(); 8]));
        let mut e0 = vecops::zero(&f, 8);
        e0[0] = f.one();
        assert_eq!(o.star.left(&e0), Mat::identity(&f, 8));
        assert_eq!(alternating_from_ldb(&o).unwrap().dim(), 7);
    }

    #[test]
    fn tower_is_totally_degenerate() {
        let t = make_char2_tower(2).unwrap();
        assert_eq!(t.dim(), 4);
        assert!(t.q.polar().is_zero());
        assert_eq!(t.q_certificate, Some(NonisotropyReason::Char2SquareInjectivity));
        let alpha = t.field().var(2);
        assert_eq!(t.q.represents(&alpha).unwrap(), crate::quadform::Representation::NotRepresented(NonisotropyReason::DegreeParity));
        assert!(matches!(make_char2_tower(3), Err(Error::CapExceeded(_))));
    }
}
