//! The twisted operator space `T_A = {Γ_A(x+(λ,μ),−)}` of an LDB division
//! algebra, with `Γ_A(x+(λ,μ),(y,z)) = (x⋆z + λy, x•y + μz)`.
//!
//! Vectors of `A ⊕ K²` are coordinate vectors `(x_1,…,x_d, λ, μ)`; vectors
//! of `A²` are `(y_1,…,y_d, z_1,…,z_d)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactalg::modular;
use crate::exactalg::{vecops, Field, Mat, Scalar, Vector};
use crate::fpfast;
use crate::ldb::{weak_equivalence_transport, LdbAlgebra, RegularityCertificate};
use crate::matspace::MatSpace;
use crate::quadform::{NonisotropyReason, QuadForm, Representation};

#[derive(Clone, Debug)]
pub struct TwistedSpace {
    pub algebra: LdbAlgebra,
    pub space: MatSpace,
    pub qtilde: QuadForm,
}

/// `Γ_A(v,−)` as a `2d × 2d` matrix.
pub fn gamma_of(alg: &LdbAlgebra, v: &[Scalar]) -> Mat {
    let d = alg.dim();
    let f = alg.field();
    let x = &v[..d];
    let id = Mat::identity(f, d);
    let mut m = Mat::zeros(f, 2 * d, 2 * d);
    m.set_block(0, 0, &id.scale(&v[d]));
    m.set_block(0, d, &alg.star.left(x));
    m.set_block(d, 0, &alg.bullet.left(x));
    m.set_block(d, d, &id.scale(&v[d + 1]));
    m
}

/// `q̃ = q ⊥ (−λμ)`.
pub fn qtilde_of(q: &QuadForm) -> QuadForm {
    let f = q.field();
    let mut hyp = Mat::zeros(f, 2, 2);
    hyp.set(0, 1, f.one().neg());
    q.orth_sum(&QuadForm::new(&hyp).expect("square")).expect("same field")
}

pub fn build_twisted(alg: &LdbAlgebra) -> Result<TwistedSpace> {
    alg.check_identity()?;
    let d = alg.dim();
    let f = alg.field().clone();
    let basis: Vec<Mat> = (0..d + 2).map(|k| gamma_of(alg, &vecops::unit(&f, d + 2, k))).collect();
    let space = MatSpace::new(&f, 2 * d, 2 * d, basis).map_err(|_| Error::IdentityViolated("Γ is not left-regular".into()))?;
    let t = TwistedSpace { algebra: alg.clone(), space, qtilde: qtilde_of(&alg.q) };
    if t.gamma(&t.lambda_mu(&f.one(), &f.one())) != Mat::identity(&f, 2 * d) {
        return Err(Error::IdentityViolated("Γ((1,1),−) ≠ id".into()));
    }
    if !t.space.is_reduced() {
        return Err(Error::IdentityViolated("T_A is not reduced".into()));
    }
    Ok(t)
}

impl TwistedSpace {
    pub fn field(&self) -> &Field {
        self.algebra.field()
    }

    /// `d = dim A`.
    pub fn d(&self) -> usize {
        self.algebra.dim()
    }

    pub fn gamma(&self, v: &[Scalar]) -> Mat {
        gamma_of(&self.algebra, v)
    }

    /// `x + (λ,μ)`.
    pub fn vector(&self, x: &[Scalar], lambda: &Scalar, mu: &Scalar) -> Vector {
        let mut v = x.to_vec();
        v.push(lambda.clone());
        v.push(mu.clone());
        v
    }

    /// `0 + (λ,μ)`.
    pub fn lambda_mu(&self, lambda: &Scalar, mu: &Scalar) -> Vector {
        self.vector(&vecops::zero(self.field(), self.d()), lambda, mu)
    }

    /// Indices of the `K²` coordinates.
    pub fn k2(&self) -> [usize; 2] {
        [self.d(), self.d() + 1]
    }

    fn has_regularity(&self) -> bool {
        !matches!(self.algebra.regularity, RegularityCertificate::GenericDetPlusSamples) || self.algebra.q_certificate.is_some()
    }
}

/// Outcome of the kernel-dimension check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelCheck {
    /// Every nonzero `(y,z)` up to scaling was tested.
    Exhaustive { points: u64 },
    /// The three strata `z = 0`, `y = 0` and `y = x0 ⋆ z` were verified symbolically.
    Strata,
}

/// `dim{f ∈ T_A : f(y,z) = 0} = 1` for every `(y,z) ≠ 0`.
pub fn lld_kernel_dim_check(t: &TwistedSpace) -> Result<KernelCheck> {
    let d = t.d();
    let f = t.field().clone();
    if let Field::Fp(p) = f {
        let pts = fpfast::projective_vectors(p, 2 * d)?;
        let bad = pts.par_iter().find_any(|w| {
            let w: Vector = w.iter().map(|&c| Scalar::fp(c, p)).collect();
            t.space.evaluation_matrix(&w).rank() != d + 1
        });
        if let Some(w) = bad {
            return Err(Error::StrataCheckFailed(format!("kernel at {w:?} is not 1-dimensional")));
        }
        return Ok(KernelCheck::Exhaustive { points: pts.len() as u64 });
    }
    if !t.has_regularity() {
        return Err(Error::Undecided("strata argument needs a regularity certificate".into()));
    }
    // symbolic parameters: x0 = first d, z = next d
    let names = f.fresh_vars("w", 2 * d);
    let g = f.extend(&names)?;
    let k = f.nvars();
    let x0: Vector = (0..d).map(|i| g.var(k + i)).collect();
    let z: Vector = (0..d).map(|i| g.var(k + d + i)).collect();
    let zero = vecops::zero(&g, d);
    let sp = t.space.extend_scalars(&g)?;
    let alg = crate::ldb::LdbAlgebra {
        name: t.algebra.name.clone(),
        star: embed_pairing(&t.algebra.star, &g)?,
        bullet: embed_pairing(&t.algebra.bullet, &g)?,
        q: QuadForm::new(&t.algebra.q.gram().embed(&g)?)?,
        regularity: t.algebra.regularity.clone(),
        q_certificate: t.algebra.q_certificate.clone(),
    };
    let y = alg.star.apply(&x0, &z);
    let qx0 = alg.q.evaluate(&x0)?;
    let strata: [(&str, Vector, Vector); 3] = [
        ("z = 0", vecops::concat(&x0, &zero), vecops::unit(&g, d + 2, d + 1)),
        ("y = 0", vecops::concat(&zero, &z), vecops::unit(&g, d + 2, d)),
        ("y = x0 ⋆ z", vecops::concat(&y, &z), {
            let mut v: Vector = x0.iter().map(|c| c.neg()).collect();
            v.push(g.one());
            v.push(qx0);
            v
        }),
    ];
    for (name, w, kv) in strata {
        let e = sp.evaluation_matrix(&w);
        if !vecops::is_zero(&e.mul_vec(&kv)) {
            return Err(Error::StrataCheckFailed(format!("predicted kernel vector fails on stratum {name}")));
        }
        // rank ≤ d+1 by the kernel vector; an image gives rank ≥ d+1
        if modular::rank_lower_bound(&e, 3) < d + 1 {
            return Err(Error::StrataCheckFailed(format!("kernel on stratum {name} is larger than predicted")));
        }
    }
    Ok(KernelCheck::Strata)
}

fn embed_pairing(p: &crate::ldb::BilinearPairing, g: &Field) -> Result<crate::ldb::BilinearPairing> {
    crate::ldb::BilinearPairing::new(p.mats().iter().map(|m| m.embed(g)).collect::<Result<Vec<_>>>()?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DichotomyStats {
    pub tested: usize,
    pub isotropic: usize,
    pub exhaustive: bool,
}

/// Predicted kernel of `Γ(v,−)` for isotropic `v ≠ 0`: `{(x⋆t, −λt)}`, or
/// `{(−μt, x•t)}` when `x = 0 = λ`.
pub fn isotropic_kernel(t: &TwistedSpace, v: &[Scalar]) -> Mat {
    let d = t.d();
    let f = t.field();
    let x = &v[..d];
    let (lambda, mu) = (&v[d], &v[d + 1]);
    let id = Mat::identity(f, d);
    let (top, bottom) = if !vecops::is_zero(x) || !lambda.is_zero() {
        (t.algebra.star.left(x), id.scale(&lambda.neg()))
    } else {
        (id.scale(&mu.neg()), t.algebra.bullet.left(x))
    };
    Mat::vstack(&[&top, &bottom])
}

fn dichotomy_at(t: &TwistedSpace, v: &[Scalar]) -> Result<bool> {
    let d = t.d();
    let g = t.gamma(v);
    let iso = t.qtilde.evaluate(v)?.is_zero();
    let r = g.try_rank()?;
    if !iso {
        if r != 2 * d {
            return Err(Error::DichotomyViolated(format!("q̃ ≠ 0 but rank {r} at {v:?}")));
        }
        return Ok(false);
    }
    if r != d {
        return Err(Error::DichotomyViolated(format!("q̃ = 0 but rank {r} at {v:?}")));
    }
    let pk = isotropic_kernel(t, v);
    if !g.mul(&pk).is_zero() || pk.try_rank()? != d {
        return Err(Error::DichotomyViolated(format!("isotropic kernel formula fails at {v:?}")));
    }
    let ker = g.try_kernel_basis()?;
    let km = Mat::from_rows(t.field(), ker).transpose();
    if Mat::hstack(&[&km, &pk]).try_rank()? != d {
        return Err(Error::DichotomyViolated(format!("kernel_basis differs from the closed form at {v:?}")));
    }
    Ok(true)
}

/// Deterministic test vectors for infinite fields, isotropic strata included.
pub fn dichotomy_test_set(t: &TwistedSpace) -> Vec<Vector> {
    let d = t.d();
    let f = t.field();
    let n = d + 2;
    let mut out: Vec<Vector> = (0..n).map(|i| vecops::unit(f, n, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            out.push(vecops::add(&vecops::unit(f, n, i), &vecops::unit(f, n, j)));
        }
    }
    for k in 0..12u64 {
        out.push((0..n).map(|i| f.from_i64(((k * 7 + i as u64 * 3 + k * i as u64) % 7) as i64 - 3)).collect());
    }
    let mut x0s: Vec<Vector> = (0..d).map(|i| vecops::unit(f, d, i)).collect();
    if d > 1 {
        x0s.push(vecops::add(&x0s[0], &x0s[1]));
    }
    x0s.push((0..d).map(|i| f.from_i64(i as i64 + 1)).collect());
    for x0 in x0s {
        let q0 = t.algebra.q.evaluate(&x0).unwrap();
        out.push(t.vector(&x0, &q0, &f.one()));
        out.push(t.vector(&x0, &f.one(), &q0));
        let two = f.from_i64(2);
        if let Ok(h) = q0.checked_div(&two) {
            out.push(t.vector(&x0, &two, &h));
        }
    }
    out.retain(|v| !vecops::is_zero(v));
    out
}

/// Rank `d` on isotropic vectors (with the closed-form kernel) and `2d` elsewhere.
pub fn rank_dichotomy_check(t: &TwistedSpace) -> Result<DichotomyStats> {
    let (vs, exhaustive) = match t.field() {
        Field::Fp(p) => {
            let p = *p;
            (fpfast::projective_vectors(p, t.d() + 2)?.into_iter().map(|v| v.into_iter().map(|c| Scalar::fp(c, p)).collect()).collect(), true)
        }
        _ => (dichotomy_test_set(t), false),
    };
    let results: Vec<Result<bool>> = vs.par_iter().map(|v| dichotomy_at(t, v)).collect();
    let mut iso = 0;
    for r in results {
        if r? {
            iso += 1;
        }
    }
    Ok(DichotomyStats { tested: vs.len(), isotropic: iso, exhaustive })
}

/// A hyperplane of `A ⊕ K²`, seen through `Γ` as a hyperplane of `T_A`.
#[derive(Clone, Debug)]
pub struct Hyperplane {
    pub basis: Vec<Vector>,
    /// Set for `A ⊕ K(α,1)`.
    pub alpha: Option<Scalar>,
    pub certificate: Option<NonisotropyReason>,
}

/// `A ⊕ K(α,1)`, with `q̃|H ≅ q ⊥ ⟨−α⟩` certified non-isotropic.
pub fn nonisotropic_hyperplane(t: &TwistedSpace, alpha: &Scalar) -> Result<Hyperplane> {
    let d = t.d();
    let f = t.field();
    let cert = match t.algebra.q.represents(alpha) {
        Ok(Representation::NotRepresented(r)) => r,
        Ok(Representation::Represented(x)) => return Err(Error::AlphaInRange(format!("q({}) = {alpha}", fmt(&x)))),
        Err(Error::Undecided(m)) => return Err(Error::CertificateMissing(m)),
        Err(e) => return Err(e),
    };
    let mut basis: Vec<Vector> = (0..d).map(|i| vecops::unit(f, d + 2, i)).collect();
    basis.push(t.lambda_mu(alpha, &f.one()));
    Ok(Hyperplane { basis, alpha: Some(alpha.clone()), certificate: Some(cert) })
}

fn fmt(v: &[Scalar]) -> String {
    let p: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    format!("({})", p.join(", "))
}

pub fn hyperplane_space(t: &TwistedSpace, h: &Hyperplane) -> Result<MatSpace> {
    let d = t.d();
    MatSpace::new(t.field(), 2 * d, 2 * d, h.basis.iter().map(|v| t.gamma(v)).collect())
}

#[derive(Clone, Debug)]
pub struct HyperplaneMinRank {
    pub mrk: usize,
    pub certificate: NonisotropyReason,
    /// Smallest rank found by the bounded-height search, when run.
    pub search_min: Option<usize>,
    pub search_height: u32,
}

/// Every nonzero element of `H` is invertible: the certificate makes `q̃|H`
/// non-isotropic and the dichotomy gives rank `2d`; cross-checked by a
/// bounded-height search (skipped when `height = 0`).
pub fn verify_hyperplane_minrank(t: &TwistedSpace, h: &Hyperplane, height: u32) -> Result<HyperplaneMinRank> {
    let cert = h.certificate.clone().ok_or_else(|| Error::CertificateMissing("hyperplane has no non-isotropy certificate".into()))?;
    let d = t.d();
    let space = hyperplane_space(t, h)?;
    let search_min = if height > 0 {
        let r = space.min_rank(height)?.mrk_upper;
        if r < 2 * d {
            return Err(Error::DichotomyViolated(format!("element of rank {r} < {} in a certified hyperplane", 2 * d)));
        }
        Some(r)
    } else {
        None
    };
    Ok(HyperplaneMinRank { mrk: 2 * d, certificate: cert, search_min, search_height: height })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureMode {
    Exact,
    /// Points per round of the deterministic grid.
    Sampled(usize),
}

#[derive(Clone, Debug)]
pub struct ReflexiveClosure {
    pub space: MatSpace,
    /// False for the sampled upper approximation.
    pub exact: bool,
    pub rounds: usize,
    pub dims: Vec<usize>,
}

/// Rounds tried by the sampled closure.
pub const CLOSURE_MAX_ROUNDS: usize = 3;

/// Rows `a_i x_j` of the constraints `f(x) ∈ Sx` on the entries of `f`.
fn closure_constraints(s: &MatSpace, x: &[Scalar]) -> Result<Vec<Vector>> {
    let (m, n) = (s.rows(), s.cols());
    let e = s.evaluation_matrix(x);
    let ann = e.transpose().try_kernel_basis()?;
    Ok(ann
        .into_iter()
        .map(|a| {
            let mut row = vecops::zero(s.field(), m * n);
            for i in 0..m {
                if a[i].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !x[j].is_zero() {
                        row[i * n + j] = a[i].mul(&x[j]);
                    }
                }
            }
            row
        })
        .collect())
}

fn space_from_constraints(s: &MatSpace, rows: &[Vector]) -> Result<MatSpace> {
    let (m, n) = (s.rows(), s.cols());
    let f = s.field();
    let ker = if rows.is_empty() {
        (0..m * n).map(|i| vecops::unit(f, m * n, i)).collect()
    } else {
        Mat::from_rows(f, rows.to_vec()).try_kernel_basis()?
    };
    MatSpace::new(f, m, n, ker.into_iter().map(|v| Mat::from_entries(f, m, n, v)).collect())
}

fn reduce_rows(f: &Field, rows: Vec<Vector>) -> Vec<Vector> {
    if rows.is_empty() {
        return rows;
    }
    Mat::from_rows(f, rows).row_space_basis()
}

/// Primitive grid points of height ≤ `h`, in a scrambled deterministic order.
fn grid_points(f: &Field, n: usize, h: i64, skip: usize, count: usize) -> Vec<Vector> {
    let side = (2 * h + 1) as u64;
    let total = side.saturating_pow(n as u32);
    // odd multiplier coprime to side^n walks the whole grid
    let mut mult = 0x9E37_79B9_7F4A_7C15u64 % total.max(1);
    while num_integer::gcd(mult, total) != 1 {
        mult += 1;
    }
    let mut out = Vec::with_capacity(count);
    let mut seen = 0usize;
    for i in 0..total {
        let idx = ((i as u128 * mult as u128) % total as u128) as u64;
        let c: Vec<i64> = fpfast::digits(idx, side, n).iter().map(|&d| d as i64 - h).collect();
        if c.iter().all(|&v| v == 0) || c.iter().fold(0i64, |g, &v| num_integer::gcd(g, v)) != 1 {
            continue;
        }
        seen += 1;
        if seen <= skip {
            continue;
        }
        out.push(c.iter().map(|&v| f.from_i64(v)).collect());
        if out.len() == count {
            break;
        }
    }
    out
}

/// `R(S) = {g : g(x) ∈ Sx for all x}`.
///
/// `Exact` enumerates every projective point over a prime field. `Sampled`
/// intersects over grid points, one round per height, and stops once a
/// round leaves the dimension unchanged and every basis element passes at
/// fresh points; the result contains `R(S)`.
pub fn reflexive_closure(s: &MatSpace, mode: ClosureMode) -> Result<ReflexiveClosure> {
    let f = s.field().clone();
    let n = s.cols();
    match mode {
        ClosureMode::Exact => {
            let p = match f {
                Field::Fp(p) => p,
                _ => return Err(Error::PreconditionFailed("exact reflexive closure needs a prime field".into())),
            };
            let pts = fpfast::projective_vectors(p, n)?;
            let mut rows = Vec::new();
            for chunk in pts.chunks(64) {
                let batch: Vec<Vec<Vector>> = chunk
                    .par_iter()
                    .map(|x| closure_constraints(s, &x.iter().map(|&c| Scalar::fp(c, p)).collect::<Vector>()))
                    .collect::<Result<_>>()?;
                rows.extend(batch.into_iter().flatten());
                rows = reduce_rows(&f, rows);
            }
            let space = space_from_constraints(s, &rows)?;
            let dim = space.dim();
            Ok(ReflexiveClosure { space, exact: true, rounds: 1, dims: vec![dim] })
        }
        ClosureMode::Sampled(count) => {
            let mut rows = Vec::new();
            let mut dims = Vec::new();
            for round in 1..=CLOSURE_MAX_ROUNDS {
                let pts = grid_points(&f, n, round as i64, 0, count);
                let batch: Vec<Vec<Vector>> = pts.par_iter().map(|x| closure_constraints(s, x)).collect::<Result<_>>()?;
                rows.extend(batch.into_iter().flatten());
                rows = reduce_rows(&f, rows);
                let space = space_from_constraints(s, &rows)?;
                dims.push(space.dim());
                let stable = dims.len() >= 2 && dims[dims.len() - 1] == dims[dims.len() - 2];
                if stable {
                    let fresh = grid_points(&f, n, round as i64 + 1, count, count.min(16));
                    let ok = fresh.iter().all(|x| {
                        let sx = s.evaluation_matrix(x);
                        let r = sx.rank();
                        space.basis().iter().all(|b| Mat::hstack(&[&sx, &Mat::column(&f, &b.mul_vec(x))]).rank() == r)
                    });
                    if ok {
                        return Ok(ReflexiveClosure { space, exact: false, rounds: round, dims });
                    }
                }
            }
            Err(Error::NotStabilized(format!("dimensions per round {dims:?}")))
        }
    }
}

/// Data of the rectification of one reflection `s` along `X0 = x0 + (λ0,μ0)`.
#[derive(Clone, Debug)]
pub struct RectifyResult {
    pub axis: Vector,
    /// The reflection `s` of `A ⊕ K²`.
    pub s: Mat,
    pub a_vec: Vector,
    pub b_vec: Vector,
    pub f1: Mat,
    pub f2: Mat,
    pub g1: Mat,
    pub g2: Mat,
    /// The `q`-reflection of `A` along `x0`.
    pub r: Mat,
    /// `Γ(s(X),−) = G ∘ Γ(H(X),−) ∘ F` for all `X`; `F = (f1 ⊕ f2)⁻¹`.
    pub f: Mat,
    pub g: Mat,
    pub h: Mat,
}

pub fn rectify(t: &TwistedSpace, axis: &[Scalar]) -> Result<RectifyResult> {
    rectify_in(&t.algebra, axis)
}

/// Rectification inside the twisted space of `alg`.
pub fn rectify_in(alg: &LdbAlgebra, axis: &[Scalar]) -> Result<RectifyResult> {
    let d = alg.dim();
    let f = alg.field();
    if axis.len() != d + 2 {
        return Err(Error::DimensionMismatch(format!("axis of length {} in A ⊕ K² of dimension {}", axis.len(), d + 2)));
    }
    let x0 = &axis[..d];
    if vecops::is_zero(x0) {
        return Err(Error::AxisInsideK2);
    }
    let qt = qtilde_of(&alg.q);
    let s = qt.reflection(axis)?;
    let (l0, m0) = (&axis[d], &axis[d + 1]);
    let q0 = alg.q.evaluate(x0)?;
    let ls = alg.star.left(x0);
    let lb = alg.bullet.left(x0);
    let id = Mat::identity(f, d);
    let qi = id.scale(&q0);
    let e_l = vecops::unit(f, d + 2, d);
    let e_m = vecops::unit(f, d + 2, d + 1);
    let a_vec = s.mul_vec(&e_l);
    let b_vec = s.mul_vec(&e_m);
    // f1(y) = (q0 y, −λ0 x0•y), f2(z) = (−μ0 x0⋆z, q0 z)
    let f1 = Mat::vstack(&[&qi, &lb.scale(&l0.neg())]);
    let f2 = Mat::vstack(&[&ls.scale(&m0.neg()), &qi]);
    // g1(y) = (q0 y, μ0 x0•y), g2(z) = (λ0 x0⋆z, q0 z)
    let g1 = Mat::vstack(&[&qi, &lb.scale(m0)]);
    let g2 = Mat::vstack(&[&ls.scale(l0), &qi]);
    let f_proof = Mat::hstack(&[&f1, &f2]);
    let g = Mat::hstack(&[&g1, &g2]);
    let fl = f_proof.inverse().ok_or(Error::SingularTransform)?;
    if g.inverse().is_none() {
        return Err(Error::SingularTransform);
    }
    let r = alg.q.reflection(x0)?;
    let h = Mat::block_diag(&[&r, &Mat::identity(f, 2)]);
    if h.mul_vec(&e_l) != e_l || h.mul_vec(&e_m) != e_m {
        return Err(Error::IdentityViolated("H moves the K² plane".into()));
    }
    for k in 0..d + 2 {
        let x = vecops::unit(f, d + 2, k);
        let lhs = gamma_of(alg, &s.mul_vec(&x));
        let rhs = g.mul(&gamma_of(alg, &h.mul_vec(&x))).mul(&fl);
        if lhs != rhs {
            return Err(Error::IdentityViolated(format!("rectification identity fails on basis vector {k}")));
        }
    }
    Ok(RectifyResult { axis: axis.to_vec(), s, a_vec, b_vec, f1, f2, g1, g2, r, f: fl, g, h })
}

/// `Γ(u(X),−) = G ∘ Γ(H(X),−) ∘ F`, with `H` fixing `K²` pointwise.
#[derive(Clone, Debug)]
pub struct OrthogonalRectification {
    pub f: Mat,
    pub g: Mat,
    pub h: Mat,
    pub axes: Vec<Vector>,
}

/// Composes single rectifications along `u = s_{a_1} ∘ ⋯ ∘ s_{a_k}`.
pub fn rectify_axes(t: &TwistedSpace, axes: &[Vector]) -> Result<OrthogonalRectification> {
    let d = t.d();
    let f = t.field();
    let mut fm = Mat::identity(f, 2 * d);
    let mut gm = Mat::identity(f, 2 * d);
    let mut hm = Mat::identity(f, d + 2);
    let id_d = Mat::identity(f, d);
    for a in axes {
        // B = (A, h(x)⋆y, h(x)•y) with h the A-block of H
        let hb = hm.block(0, d, 0, d);
        let b = weak_equivalence_transport(&t.algebra, &hb, &id_d, &id_d)?;
        let step = rectify_in(&b, a)?;
        gm = gm.mul(&step.g);
        fm = step.f.mul(&fm);
        hm = hm.mul(&step.h);
    }
    let u = t.qtilde.reflection_product(axes)?;
    for k in 0..d + 2 {
        let x = vecops::unit(f, d + 2, k);
        if t.gamma(&u.mul_vec(&x)) != gm.mul(&t.gamma(&hm.mul_vec(&x))).mul(&fm) {
            return Err(Error::IdentityViolated(format!("composite rectification fails on basis vector {k}")));
        }
    }
    Ok(OrthogonalRectification { f: fm, g: gm, h: hm, axes: axes.to_vec() })
}

pub fn rectify_orthogonal(t: &TwistedSpace, u: &Mat) -> Result<OrthogonalRectification> {
    let axes = t.qtilde.decompose_into_reflections(u, &t.k2())?;
    rectify_axes(t, &axes)
}

/// `F: x+(λ,μ) ↦ f(x)+(λ,μ)` and `G: (y,z) ↦ (h⁻¹(y), g(z))` with
/// `Γ_B(X,−) = G⁻¹ ∘ Γ_A(F(X),−) ∘ G`.
pub fn similarity_from_equivalence(a: &LdbAlgebra, b: &LdbAlgebra, f: &Mat, g: &Mat, h: &Mat) -> Result<(Mat, Mat)> {
    let d = a.dim();
    if b.dim() != d {
        return Err(Error::NotAnEquivalence("dimensions differ".into()));
    }
    let t = weak_equivalence_transport(a, f, g, h).map_err(|e| Error::NotAnEquivalence(e.to_string()))?;
    if t.star != b.star || t.bullet != b.bullet {
        return Err(Error::NotAnEquivalence("(f,g,h) does not carry ⋆,• onto ⋆′,•′".into()));
    }
    let fld = a.field();
    let big_f = Mat::block_diag(&[f, &Mat::identity(fld, 2)]);
    let hi = h.inverse().ok_or(Error::SingularTransform)?;
    let big_g = Mat::block_diag(&[&hi, g]);
    let gi = big_g.inverse().ok_or(Error::SingularTransform)?;
    for k in 0..d + 2 {
        let x = vecops::unit(fld, d + 2, k);
        if gamma_of(b, &x) != gi.mul(&gamma_of(a, &big_f.mul_vec(&x))).mul(&big_g) {
            return Err(Error::IdentityViolated(format!("similarity fails on basis vector {k}")));
        }
    }
    Ok((big_f, big_g))
}

/// `Γ_{(A,•,⋆)}(x+(λ,μ),−) = T⁻¹ ∘ Γ_{(A,⋆,•)}(x+(μ,λ),−) ∘ T`, `T(y,z) = (z,y)`.
pub fn swap_similarity_check(a: &LdbAlgebra) -> Result<Mat> {
    let d = a.dim();
    let f = a.field();
    let sw = crate::ldb::swap_laws(a)?;
    let id = Mat::identity(f, d);
    let z = Mat::zeros(f, d, d);
    let top = Mat::hstack(&[&z, &id]);
    let bottom = Mat::hstack(&[&id, &z]);
    let tmat = Mat::vstack(&[&top, &bottom]);
    for k in 0..d + 2 {
        let x = vecops::unit(f, d + 2, k);
        let mut xs = x.clone();
        xs.swap(d, d + 1);
        if gamma_of(&sw, &x) != tmat.mul(&gamma_of(a, &xs)).mul(&tmat) {
            return Err(Error::IdentityViolated(format!("twist similarity fails on basis vector {k}")));
        }
    }
    Ok(tmat)
}

/// `Γ(v)² = Γ((λ+μ)x + (λ²+q(x), μ²+q(x)))` coefficientwise.
pub fn jordan_square_check(t: &TwistedSpace) -> Result<()> {
    let d = t.d();
    let f = t.field();
    let n = d + 2;
    let jv = |v: &[Scalar]| -> Vector {
        let x = &v[..d];
        let (l, m) = (&v[d], &v[d + 1]);
        let qx = t.algebra.q.evaluate(x).unwrap();
        let mut out = vecops::scale(x, &l.add(m));
        out.push(l.mul(l).add(&qx));
        out.push(m.mul(m).add(&qx));
        out
    };
    let basis: Vec<Mat> = (0..n).map(|k| t.gamma(&vecops::unit(f, n, k))).collect();
    for k in 0..n {
        let ek = vecops::unit(f, n, k);
        if basis[k].mul(&basis[k]) != t.gamma(&jv(&ek)) {
            return Err(Error::IdentityViolated(format!("square coefficient at e_{k}")));
        }
        for l in k + 1..n {
            let el = vecops::unit(f, n, l);
            let sum = vecops::add(&ek, &el);
            let cross: Vector = vecops::sub(&vecops::sub(&jv(&sum), &jv(&ek)), &jv(&el));
            let lhs = basis[k].mul(&basis[l]).add(&basis[l].mul(&basis[k]));
            if lhs != t.gamma(&cross) {
                return Err(Error::IdentityViolated(format!("cross coefficient at e_{k}, e_{l}")));
            }
        }
    }
    Ok(())
}

/// `H` equivalent to `{Γ(x + λ(α,1))}`: `Γ(H0) = G · Γ(A ⊕ K(α,1)) · F`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub alpha: Scalar,
    pub g: Mat,
    pub f: Mat,
    /// Axes of the Witt step `u` with `u(K(−α,1)) = D`.
    pub witt_axes: Vec<Vector>,
    /// `α ∉ range(q)` certificate when one applies.
    pub certificate: Option<NonisotropyReason>,
}

pub fn hyperplane_normal_form(t: &TwistedSpace, h: &Hyperplane) -> Result<NormalForm> {
    let d = t.d();
    let f = t.field();
    if f.characteristic() == 2 {
        return Err(Error::CharMismatch("normal form needs characteristic ≠ 2".into()));
    }
    if h.basis.len() != d + 1 || vecops::rank(f, &h.basis) != d + 1 {
        return Err(Error::DimensionMismatch("hyperplane needs d+1 independent vectors".into()));
    }
    let polar = t.qtilde.polar();
    let hb = Mat::from_rows(f, h.basis.clone()).mul(&polar);
    let dl = hb.try_kernel_basis()?;
    let delta = dl.into_iter().next().ok_or_else(|| Error::PreconditionFailed("no orthogonal line".into()))?;
    let alpha = t.qtilde.evaluate(&delta)?;
    if alpha.is_zero() {
        return Err(Error::PreconditionFailed("orthogonal line is isotropic, so H is isotropic".into()));
    }
    let delta_p = t.lambda_mu(&alpha.neg(), &f.one());
    let witt = t.qtilde.line_step(&delta_p, &delta)?;
    let axes = t.qtilde.avoid_axes(&witt, &t.k2())?;
    let rect = rectify_axes(t, &axes)?;
    let mut nb: Vec<Vector> = (0..d).map(|i| vecops::unit(f, d + 2, i)).collect();
    nb.push(t.lambda_mu(&alpha, &f.one()));
    let target: Vec<Mat> = nb.iter().map(|z| rect.g.mul(&t.gamma(z)).mul(&rect.f)).collect();
    let hs = hyperplane_space(t, h)?;
    let ts = MatSpace::spanned_by(f, 2 * d, 2 * d, &target);
    if !hs.same_span(&ts) {
        return Err(Error::IdentityViolated("normal-form equivalence does not map onto H".into()));
    }
    let certificate = match t.algebra.q.represents(&alpha) {
        Ok(Representation::NotRepresented(r)) => Some(r),
        _ => None,
    };
    Ok(NormalForm { alpha, g: rect.g, f: rect.f, witt_axes: axes, certificate })
}

/// A nondegenerate bilinear form `B` with `B·f` alternating for every `f ∈ S`
/// (square `S`), when one exists among small combinations of the solutions.
pub fn alternating_gauge(s: &MatSpace) -> Result<Option<Mat>> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::NotSquare);
    }
    let f = s.field();
    let mut rows: Vec<Vector> = Vec::new();
    for m in s.basis() {
        // (B m)_{ij} = Σ_k B_{ik} m_{kj}; unknown B_{ik} at i*n+k
        let entry = |i: usize, j: usize| -> Vector {
            let mut r = vecops::zero(f, n * n);
            for k in 0..n {
                r[i * n + k] = m.get(k, j).clone();
            }
            r
        };
        for i in 0..n {
            rows.push(entry(i, i));
            for j in i + 1..n {
                rows.push(vecops::add(&entry(i, j), &entry(j, i)));
            }
        }
    }
    let sols = Mat::from_rows(f, rows).try_kernel_basis()?;
    let mats: Vec<Mat> = sols.into_iter().map(|v| Mat::from_entries(f, n, n, v)).collect();
    for m in &mats {
        if m.try_rank()? == n {
            return Ok(Some(m.clone()));
        }
    }
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            for c in 1..=3 {
                let m = mats[i].add(&mats[j].scale(&f.from_i64(c)));
                if m.try_rank()? == n {
                    return Ok(Some(m));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldb::{make_quadratic_ext, QuadraticKind};

    fn gaussian() -> TwistedSpace {
        let f = Field::Q;
        build_twisted(&make_quadratic_ext(&f, QuadraticKind::Kummer(f.from_i64(-1))).unwrap()).unwrap()
    }

    #[test]
    fn gaussian_twisted_basics() {
        let t = gaussian();
        assert_eq!(t.space.dim(), 4);
        assert_eq!(lld_kernel_dim_check(&t).unwrap(), KernelCheck::Strata);
        let st = rank_dichotomy_check(&t).unwrap();
        assert!(st.isotropic > 0);
        jordan_square_check(&t).unwrap();
    }

    #[test]
    fn gaussian_rectify_trivial_axis() {
        let t = gaussian();
        let f = Field::Q;
        let x = t.vector(&[f.one(), f.zero()], &f.zero(), &f.zero());
        let r = rectify(&t, &x).unwrap();
        assert_eq!(r.a_vec, t.lambda_mu(&f.one(), &f.zero()));
        assert_eq!(r.b_vec, t.lambda_mu(&f.zero(), &f.one()));
    }

    fn quaternions() -> TwistedSpace {
        let f = Field::Q;
        let m1 = f.from_i64(-1);
        build_twisted(&crate::ldb::make_quaternion(&f, &m1, &m1).unwrap()).unwrap()
    }

    fn f9() -> TwistedSpace {
        let f = Field::prime(3).unwrap();
        build_twisted(&make_quadratic_ext(&f, QuadraticKind::Kummer(f.from_i64(-1))).unwrap()).unwrap()
    }

    #[test]
    fn f9_exhaustive_checks() {
        let t = f9();
        // (y,z) ∈ F_3^4 up to scaling
        assert_eq!(lld_kernel_dim_check(&t).unwrap(), KernelCheck::Exhaustive { points: 40 });
        let st = rank_dichotomy_check(&t).unwrap();
        assert!(st.exhaustive);
        assert_eq!(st.tested, 40);
        let r = reflexive_closure(&t.space, ClosureMode::Exact).unwrap();
        assert_eq!(r.space.dim(), 6);
        assert!(r.space.contains_space(&t.space));
    }

    #[test]
    fn quaternion_rectify_and_swap() {
        let t = quaternions();
        let f = Field::Q;
        let i = vecops::unit(&f, 4, 1);
        let x = t.vector(&i, &f.from_i64(2), &f.zero());
        let r = rectify(&t, &x).unwrap();
        assert_eq!(r.r, t.algebra.q.reflection(&i).unwrap());
        swap_similarity_check(&t.algebra).unwrap();
        jordan_square_check(&t).unwrap();
    }

    #[test]
    fn composite_rectification() {
        let t = gaussian();
        let f = Field::Q;
        let axes = vec![
            t.vector(&[f.one(), f.one()], &f.one(), &f.zero()),
            t.vector(&[f.zero(), f.one()], &f.from_i64(2), &f.one()),
            t.vector(&[f.from_i64(3), f.zero()], &f.zero(), &f.from_i64(-1)),
        ];
        let r = rectify_axes(&t, &axes).unwrap();
        assert_eq!(r.h.block(2, 4, 2, 4), Mat::identity(&f, 2));
    }

    #[test]
    fn gaussian_hyperplane_three() {
        let t = gaussian();
        let h = nonisotropic_hyperplane(&t, &Field::Q.from_i64(3)).unwrap();
        let m = verify_hyperplane_minrank(&t, &h, 3).unwrap();
        assert_eq!(m.mrk, 4);
        assert_eq!(m.search_min, Some(4));
        assert!(matches!(nonisotropic_hyperplane(&t, &Field::Q.from_i64(2)), Err(Error::AlphaInRange(_))));
    }

    #[test]
    fn normal_form_of_tilted_hyperplane() {
        let t = gaussian();
        let f = Field::Q;
        // orthogonal to δ = (1,0,1,−1): q̃(δ) = 1 + 1 = 2
        let delta = t.vector(&[f.one(), f.zero()], &f.one(), &f.from_i64(-1));
        let polar = t.qtilde.polar();
        let row = Mat::from_rows(&f, vec![delta.clone()]).mul(&polar);
        let basis = row.try_kernel_basis().unwrap();
        let h = Hyperplane { basis, alpha: None, certificate: None };
        let nf = hyperplane_normal_form(&t, &h).unwrap();
        assert_eq!(nf.alpha, f.from_i64(2));
        assert!(nf.witt_axes.len() <= 4);
    }
}
