//! Local linear dependence through the dual space `Ŝ`, rank-optimal
//! operators, and checkers for the minimal-rank theorems on LLD spaces.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactalg::modular::{self, rank_mod, rref_mod};
use crate::exactalg::{vecops, Field, Mat, Scalar, SimpleExtension, Vector};
use crate::fpfast::{self, FpBasis, ENUMERATION_CAP};
use crate::matspace::{MatSpace, HEIGHT_SEARCH_CAP};

/// Summary of the dual-space analysis of an operator space.
#[derive(Clone, Debug)]
pub struct LldReport {
    pub space: MatSpace,
    pub c_max: usize,
    pub rank_optimal_point: Vector,
    pub rank_optimal_rank: usize,
    pub kernel_basis_of_phi: Vec<Mat>,
    pub witness_small_rank: Option<(Mat, usize)>,
}

impl LldReport {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_lld(&self) -> bool {
        self.c_max >= 1
    }

    /// `φ = [f ↦ f(x)]` at the rank-optimal point, as an `m × dim S` matrix.
    pub fn phi(&self) -> Mat {
        self.space.evaluation_matrix(&self.rank_optimal_point)
    }
}

/// `T = Ker φ` and `V0 = im φ` for a rank-optimal `φ`.
#[derive(Clone, Debug)]
pub struct SmallRankWitness {
    pub t: Vec<Mat>,
    pub v0: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct AmitsurCheck {
    pub r: usize,
    pub n: usize,
    pub bound: usize,
    pub kernel_upper_rank: usize,
    pub holds: bool,
}

/// The two cases of the dichotomy; in the `c` version the threshold is `n − c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dichotomy {
    AllRanksAtMostNminus1,
    KernelRanksBelowNminus1,
}

#[derive(Clone, Debug)]
pub struct DichotomyReport {
    pub case: Dichotomy,
    pub c: usize,
    /// `n − c`.
    pub bound: usize,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct HyperplaneBound {
    pub n: usize,
    pub mrk: usize,
    pub exact: bool,
    pub witness: Mat,
    /// `None` when `#K > n ≥ 2` fails.
    pub bound_2n2_ok: Option<bool>,
    pub bound_binom_ok: bool,
}

/// An `L`-linear complement given by `L`-generators and the induced `K`-basis.
#[derive(Clone, Debug)]
pub struct ExtensionComplement {
    pub l_basis: Vec<Vector>,
    pub k_basis: Vec<Vector>,
}

/// The operators `f ↦ f(e_j)` spanning `Ŝ`.
pub fn dual_generators(s: &MatSpace) -> Vec<Mat> {
    let f = s.field();
    (0..s.cols()).map(|j| s.evaluation_matrix(&vecops::unit(f, s.cols(), j))).collect()
}

/// The operator space whose dual space is spanned by the given `m × s`
/// matrices `M_1, …, M_d`: operators `K^d → K^m` with `f_i(e_j) = M_j e_i`.
pub fn space_with_dual(m: &[Mat]) -> Result<MatSpace> {
    let first = m.first().ok_or(Error::EmptyBasis)?;
    let field = first.field().clone();
    let (rows, s) = first.shape();
    let d = m.len();
    let basis: Vec<Mat> = (0..s)
        .map(|i| Mat::from_fn(&field, rows, d, |r, j| m[j].get(r, i).clone()))
        .collect();
    MatSpace::new(&field, rows, d, basis)
}

fn residues(v: &[u64], p: u64) -> Vector {
    v.iter().map(|&x| Scalar::fp(x, p)).collect()
}

fn nonzero_operators(s: &MatSpace) -> Result<()> {
    if s.dim() == 0 {
        Err(Error::EmptyBasis)
    } else {
        Ok(())
    }
}

/// A point `x` maximising `rk φ_x` and that rank.
///
/// Exhaustive over small prime fields (first maximiser in projective order);
/// otherwise the lexicographically smallest point of `{0, …, r}^n` attaining
/// the generic rank `r`.
pub fn rank_optimal_point(s: &MatSpace) -> Result<(Vector, usize)> {
    let f = s.field();
    let ncols = s.cols();
    if s.dim() == 0 || ncols == 0 {
        return Ok((vecops::zero(f, ncols), 0));
    }
    let gens = dual_generators(s);
    if let Field::Fp(p) = f {
        if fpfast::projective_count(*p, ncols) <= ENUMERATION_CAP {
            let fb = FpBasis::new(*p, s.rows(), s.dim(), &gens);
            let (r, x) = fb.max_rank()?;
            return Ok((residues(&x, *p), r));
        }
    }
    let dual = MatSpace::spanned_by(f, s.rows(), s.dim(), &gens);
    let r = dual.upper_rank()?;
    if !f.larger_than(r) {
        return Err(Error::EnumerationTooLarge(fpfast::projective_count(f.order().unwrap(), ncols)));
    }
    grid_search(s, r)
}

fn grid_search(s: &MatSpace, r: usize) -> Result<(Vector, usize)> {
    let f = s.field();
    let n = s.cols();
    let side = r as u64 + 1;
    let total = fpfast::pow_u128(side, n);
    if total > HEIGHT_SEARCH_CAP {
        return Err(Error::EnumerationTooLarge(total));
    }
    for idx in 1..total as u64 {
        let mut x = vec![f.zero(); n];
        let mut i = idx;
        for j in (0..n).rev() {
            x[j] = f.from_i64((i % side) as i64);
            i /= side;
        }
        let ev = s.evaluation_matrix(&x);
        if modular::rank_lower_bound(&ev, 1) == r || ev.try_rank()? == r {
            return Ok((x, r));
        }
    }
    Err(Error::NoWitnessFound("no grid point attains the generic rank".into()))
}

/// Computes `c_max = dim S − urk(Ŝ)` with a rank-optimal point and `Ker φ`.
pub fn analyze(s: &MatSpace) -> Result<LldReport> {
    let (x, r) = rank_optimal_point(s)?;
    let kernel: Vec<Mat> = if s.dim() == 0 {
        vec![]
    } else {
        s.evaluation_matrix(&x).try_kernel_basis()?.iter().map(|v| s.element(v)).collect()
    };
    let witness = kernel.iter().map(|k| (k.clone(), k.rank())).min_by_key(|w| w.1);
    Ok(LldReport {
        space: s.clone(),
        c_max: s.dim() - r,
        rank_optimal_point: x,
        rank_optimal_rank: r,
        kernel_basis_of_phi: kernel,
        witness_small_rank: witness,
    })
}

/// `S` is `c`-LLD.
pub fn is_c_lld(s: &MatSpace, c: usize) -> Result<bool> {
    Ok(c <= analyze(s)?.c_max)
}

/// Checks `im f ⊆ im φ` for every `f ∈ Ker φ`, `φ` rank-optimal.
pub fn basic_lemma_check(s: &MatSpace) -> Result<bool> {
    let rep = analyze(s)?;
    if !s.field().larger_than(rep.rank_optimal_rank) {
        return Err(Error::PreconditionFailed(format!(
            "#K > r fails: r = {} and the field has {} elements",
            rep.rank_optimal_rank,
            s.field().order().unwrap()
        )));
    }
    let phi = rep.phi();
    for f in &rep.kernel_basis_of_phi {
        if Mat::hstack(&[&phi, f]).try_rank()? != rep.rank_optimal_rank {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A subspace `T` of dimension `≥ c` whose ranges all lie in a subspace `V0`
/// of dimension `≤ dim S − c`.
pub fn small_rank_witness(s: &MatSpace, c: usize) -> Result<SmallRankWitness> {
    if c == 0 {
        return Ok(SmallRankWitness { t: s.basis().to_vec(), v0: s.essential_range() });
    }
    let rep = analyze(s)?;
    if c > rep.c_max {
        return Err(Error::PreconditionFailed(format!("the space is not {c}-LLD (c_max = {})", rep.c_max)));
    }
    if !s.field().larger_than(s.dim() - c) {
        return Err(Error::PreconditionFailed(format!("#K > n - c = {} fails", s.dim() - c)));
    }
    Ok(SmallRankWitness { t: rep.kernel_basis_of_phi.clone(), v0: rep.phi().column_space_basis() })
}

/// `#{f ∈ S : rk f ≤ dim S − c}`, zero included; errors if it is below `q^c`.
pub fn count_small_rank(s: &MatSpace, c: usize) -> Result<u64> {
    let q = s.field().order().ok_or_else(|| Error::PreconditionFailed("finite field required".into()))?;
    nonzero_operators(s)?;
    let rep = analyze(s)?;
    if c > rep.c_max {
        return Err(Error::PreconditionFailed(format!("the space is not {c}-LLD (c_max = {})", rep.c_max)));
    }
    let hist = s.rank_histogram()?;
    let bound = s.dim() - c;
    let count: u64 = hist.iter().take(bound + 1).sum();
    if (count as u128) < fpfast::pow_u128(q, c) {
        return Err(Error::IdentityViolated(format!("only {count} elements of rank at most {bound}, fewer than q^c")));
    }
    Ok(count)
}

/// Checks `urk(Ker φ) ≤ binom(r+1, 2) + r(n − r)`.
pub fn amitsur_bound_check(s: &MatSpace) -> Result<AmitsurCheck> {
    let rep = analyze(s)?;
    if !rep.is_lld() {
        return Err(Error::PreconditionFailed("the space is not LLD".into()));
    }
    let (r, n) = (rep.rank_optimal_rank, s.dim());
    let bound = r * (r + 1) / 2 + r * (n - r);
    let ker = MatSpace::new(s.field(), s.rows(), s.cols(), rep.kernel_basis_of_phi.clone())?;
    let u = ker.upper_rank()?;
    Ok(AmitsurCheck { r, n, bound, kernel_upper_rank: u, holds: u <= bound })
}

/// A nonzero operator of rank `< dim S` in an LLD space.
pub fn basic_theorem_witness(s: &MatSpace) -> Result<(Mat, usize)> {
    let rep = analyze(s)?;
    if !rep.is_lld() {
        return Err(Error::PreconditionFailed("the space is not LLD".into()));
    }
    let n = s.dim();
    if let Some(fb) = s.fp_basis() {
        if fpfast::projective_count(fb.p, fb.dim()) <= ENUMERATION_CAP {
            let mr = s.min_rank(0)?;
            if mr.mrk_upper >= n {
                return Err(Error::IdentityViolated(format!("every nonzero operator has rank at least {n}")));
            }
            return Ok((mr.witness, mr.mrk_upper));
        }
    }
    if !s.field().larger_than(n - 1) {
        return Err(Error::PreconditionFailed("#K ≥ n fails and enumeration is infeasible".into()));
    }
    let (f, r) = rep.witness_small_rank.expect("LLD spaces have a nonzero kernel");
    Ok((f, r))
}

/// The dichotomy for LLD spaces that are not 2-LLD.
///
/// `not_2lld` is the caller's claim and is verified.
pub fn dichotomy_check(s: &MatSpace, not_2lld: bool) -> Result<DichotomyReport> {
    nonzero_operators(s)?;
    let rep = analyze(s)?;
    if rep.c_max == 0 {
        return Err(Error::PreconditionFailed("the space is not LLD".into()));
    }
    if !not_2lld || rep.c_max >= 2 {
        return Err(Error::PreconditionFailed(format!("the space must not be 2-LLD (c_max = {})", rep.c_max)));
    }
    if !s.field().larger_than(s.dim() - 1) {
        return Err(Error::PreconditionFailed(format!("#K ≥ n = {} fails", s.dim())));
    }
    bounded_kernel_ranks(s, &rep, 1)
}

/// The `c` version with `c = c_max`, where the space is not `(c+1)`-LLD.
pub fn refined_corollary_check(s: &MatSpace) -> Result<DichotomyReport> {
    nonzero_operators(s)?;
    let rep = analyze(s)?;
    let c = rep.c_max;
    if c == 0 {
        return Err(Error::PreconditionFailed("the space is not LLD".into()));
    }
    if !s.field().larger_than(s.dim() - c) {
        return Err(Error::PreconditionFailed(format!("#K > n - c = {} fails", s.dim() - c)));
    }
    bounded_kernel_ranks(s, &rep, c)
}

fn bounded_kernel_ranks(s: &MatSpace, rep: &LldReport, c: usize) -> Result<DichotomyReport> {
    let bound = s.dim() - c;
    let u = s.upper_rank()?;
    if u <= bound {
        return Ok(DichotomyReport {
            case: Dichotomy::AllRanksAtMostNminus1,
            c,
            bound,
            detail: format!("urk(S) = {u}"),
        });
    }
    if let Field::Fp(p) = s.field() {
        let pts = fpfast::projective_count(*p, s.cols());
        let per = fpfast::projective_count(*p, c);
        if pts.saturating_mul(per) <= 1 << 26 {
            let (count, worst) = exhaustive_kernel_ranks(s, *p, rep.rank_optimal_rank)?;
            if worst >= bound {
                return Err(Error::DichotomyViolated(format!(
                    "a kernel operator of a rank-optimal φ has rank {worst} ≥ {bound} while urk(S) = {u}"
                )));
            }
            return Ok(DichotomyReport {
                case: Dichotomy::KernelRanksBelowNminus1,
                c,
                bound,
                detail: format!("{count} rank-optimal points, largest kernel rank {worst}"),
            });
        }
    }
    if c != 1 {
        return Err(Error::Undecided("kernel ranks over all rank-optimal points are not certified".into()));
    }
    match cofactor_certificate(s, bound) {
        Ok(Some(worst)) => Ok(DichotomyReport {
            case: Dichotomy::KernelRanksBelowNminus1,
            c,
            bound,
            detail: format!("cofactor certificate, largest generic kernel rank {worst}"),
        }),
        Ok(None) | Err(Error::DegreeCapExceeded(_)) => {
            Err(Error::Undecided("no certificate bounds the kernel ranks of every rank-optimal φ".into()))
        }
        Err(e) => Err(e),
    }
}

/// Scans every projective `x` with `rk φ_x = r` and returns the number of
/// such points and the largest rank met in the kernels.
fn exhaustive_kernel_ranks(s: &MatSpace, p: u64, r: usize) -> Result<(u64, usize)> {
    let (m, n, d) = (s.rows(), s.cols(), s.dim());
    let gens = FpBasis::new(p, m, d, &dual_generators(s));
    let ops = FpBasis::new(p, m, n, s.basis());
    let count = fpfast::projective_count(p, n) as u64;
    let (hits, worst) = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = fpfast::projective_point(i, p, n);
            let mut ev = gens.combine(&x);
            if rank_mod(&mut ev.clone(), m, d, p) != r {
                return (0u64, 0usize);
            }
            let kernel = kernel_mod(&mut ev, m, d, p);
            let kb: Vec<Vec<u64>> = kernel.iter().map(|k| ops.combine(k)).collect();
            let ks = FpBasis { p, rows: m, cols: n, basis: kb };
            (1, ks.max_rank().map(|t| t.0).unwrap_or(usize::MAX))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    if worst == usize::MAX {
        return Err(Error::EnumerationTooLarge(fpfast::projective_count(p, d - r)));
    }
    Ok((hits, worst))
}

fn kernel_mod(a: &mut [u64], rows: usize, cols: usize, p: u64) -> Vec<Vec<u64>> {
    let piv = rref_mod(a, rows, cols, p);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !piv.contains(c)) {
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (i, &pc) in piv.iter().enumerate() {
            let x = a[i * cols + free];
            v[pc] = if x == 0 { 0 } else { p - x };
        }
        out.push(v);
    }
    out
}

/// For `c = 1`: with `Ŝ` generic of rank `n − 1`, the cofactor vectors of
/// the `(n−1)`-row subsets span `Ker φ_x` wherever they do not vanish, so
/// generic ranks of the matching operators bound every kernel rank.
/// Returns the largest generic rank when it is below `bound`.
fn cofactor_certificate(s: &MatSpace, bound: usize) -> Result<Option<usize>> {
    const SUBSET_CAP: usize = 64;
    let (m, n) = (s.rows(), s.dim());
    if n < 2 || binomial(m, n - 1) > SUBSET_CAP as u128 {
        return Ok(None);
    }
    let f = s.field();
    let vars = f.fresh_vars("y", s.cols());
    let ext = f.extend(&vars)?;
    let k = f.nvars();
    let y: Vector = (0..s.cols()).map(|j| ext.var(k + j)).collect();
    let sy = s.extend_scalars(&ext)?;
    let ev = sy.evaluation_matrix(&y);
    let basis = sy.basis();
    let mut worst = 0;
    for rows in subsets(m, n - 1) {
        let sub = Mat::from_fn(&ext, n - 1, n, |i, j| ev.get(rows[i], j).clone());
        let mut acc = Mat::zeros(&ext, s.rows(), s.cols());
        let mut nonzero = false;
        for j in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = Mat::from_fn(&ext, n - 1, n - 1, |a, b| sub.get(a, keep[b]).clone()).try_det()?;
            if minor.is_zero() {
                continue;
            }
            nonzero = true;
            let coef = if j % 2 == 0 { minor } else { minor.neg() };
            acc = acc.add(&basis[j].scale(&coef));
        }
        if !nonzero {
            continue;
        }
        let r = acc.try_rank()?;
        if r >= bound {
            return Ok(None);
        }
        worst = worst.max(r);
    }
    Ok(Some(worst))
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { break };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Minimal rank of a hyperplane `T` of an `(n+1)`-dimensional LLD space,
/// compared with `2n − 2` and `binom(n+1, 2)`.
pub fn hyperplane_minrank_bound(s: &MatSpace, t: &MatSpace, height: u32) -> Result<HyperplaneBound> {
    let n = t.dim();
    if n == 0 || n + 1 != s.dim() {
        return Err(Error::PreconditionFailed(format!("dim T = {n} is not dim S - 1 = {}", s.dim() as i64 - 1)));
    }
    if !s.contains_space(t) {
        return Err(Error::PreconditionFailed("T is not contained in S".into()));
    }
    if !analyze(s)?.is_lld() {
        return Err(Error::PreconditionFailed("S is not LLD".into()));
    }
    let mr = t.min_rank(height)?;
    let exact = mr.exact || t.field().is_finite();
    let bound_2n2_ok = if n >= 2 && t.field().larger_than(n) { Some(mr.mrk_upper <= 2 * n - 2) } else { None };
    Ok(HyperplaneBound {
        n,
        mrk: mr.mrk_upper,
        exact,
        witness: mr.witness,
        bound_2n2_ok,
        bound_binom_ok: mr.mrk_upper <= n * (n + 1) / 2,
    })
}

/// An `L`-subspace `W′` of `L^k` with `L^k = W ⊕ W′`, for a `K`-subspace `W`
/// (coordinates on `K^{dk}`) of dimension divisible by `d = [L : K]`.
pub fn field_extension_complement(ext: &SimpleExtension, k: usize, w: &[Vector]) -> Result<ExtensionComplement> {
    let f = ext.base();
    let p = f.order().ok_or_else(|| Error::PreconditionFailed("finite base field required".into()))?;
    let d = ext.degree();
    let dim = d * k;
    if w.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch(format!("vectors of W must have length {dim}")));
    }
    if vecops::rank(f, w) != w.len() {
        return Err(Error::PreconditionFailed("W is given by dependent vectors".into()));
    }
    if w.len() % d != 0 {
        return Err(Error::PreconditionFailed(format!("dim W = {} is not a multiple of {d}", w.len())));
    }
    let t: Vector = (0..d).map(|i| if i == 1 || d == 1 && i == 0 { f.one() } else { f.zero() }).collect();
    let tk = ext.action_on_power(&t, k);
    let orbit = |x: &Vector| -> Vec<Vector> {
        let mut out = vec![x.clone()];
        for _ in 1..d {
            let next = tk.mul_vec(out.last().unwrap());
            out.push(next);
        }
        out
    };
    let candidates = fpfast::projective_vectors(p, dim)?;
    let mut cur: Vec<Vector> = w.to_vec();
    let mut l_basis = Vec::new();
    let mut k_basis = Vec::new();
    while cur.len() < dim {
        let found = candidates.iter().map(|c| residues(c, p)).find(|x| {
            let mut trial = cur.clone();
            trial.extend(orbit(x));
            vecops::rank(f, &trial) == cur.len() + d
        });
        let x = found.ok_or_else(|| Error::NoWitnessFound("no x with Lx ∩ W = 0".into()))?;
        let o = orbit(&x);
        cur.extend(o.iter().cloned());
        k_basis.extend(o);
        l_basis.push(x);
    }
    Ok(ExtensionComplement { l_basis, k_basis })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn projections(f: &Field) -> MatSpace {
        MatSpace::new(f, 1, 2, vec![Mat::from_i64(f, &[&[1, 0]]), Mat::from_i64(f, &[&[0, 1]])]).unwrap()
    }

    #[test]
    fn projections_are_lld() {
        for f in [Field::Q, Field::Fp(3)] {
            let rep = analyze(&projections(&f)).unwrap();
            assert_eq!(rep.c_max, 1);
            assert_eq!(rep.rank_optimal_rank, 1);
            assert_eq!(rep.kernel_basis_of_phi.len(), 1);
            assert!(basic_lemma_check(&projections(&f)).unwrap());
        }
    }

    #[test]
    fn identity_is_not_lld() {
        let f = Field::Q;
        let s = MatSpace::new(&f, 2, 2, vec![Mat::identity(&f, 2)]).unwrap();
        assert_eq!(analyze(&s).unwrap().c_max, 0);
    }

    #[test]
    fn mata4_is_3_lld() {
        let s = MatSpace::alternating(&Field::Fp(3), 4);
        let rep = analyze(&s).unwrap();
        assert_eq!(rep.c_max, 3);
        let a = amitsur_bound_check(&s).unwrap();
        assert_eq!(a.bound, 15);
        assert!(a.holds);
    }

    #[test]
    fn mata4_f2_count() {
        let s = MatSpace::alternating(&Field::Fp(2), 4);
        assert_eq!(count_small_rank(&s, 3).unwrap(), 36);
    }

    #[test]
    fn subsets_enumerate() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn dual_roundtrip() {
        let s = MatSpace::alternating(&Field::Q, 3);
        let back = space_with_dual(&dual_generators(&s)).unwrap();
        assert_eq!(back, s);
    }
}
