//! Generalized Heisenberg groups `H_β = V × F_q` with `(v,r)(w,s) = (v+w, r+s+β(v,w))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldCtx, Fq};
use crate::linalg::{LinalgError, MatrixFq};
use crate::orbits::{BudgetExceeded, LinearAction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeisError {
    #[error("vector length {got} does not match form dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("element does not belong to the field of the form")]
    ContextMismatch,
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A bilinear form `β(v,w) = vᵀBw` on `F_q^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    gram: MatrixFq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisElement {
    pub v: Vec<Fq>,
    pub r: Fq,
}

/// Lie algebra coordinates `(v, t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeisAlgebraElement {
    pub v: Vec<Fq>,
    pub t: Fq,
}

/// A functional `λ = (w, s)` with `λ(v, t) = <w, v> + s t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisFunctional {
    pub w: Vec<Fq>,
    pub s: Fq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CensusRow {
    pub e: u32,
    pub size: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitCensus {
    pub rows: Vec<CensusRow>,
    pub total_orbits: u64,
    pub total_mass: u64,
}

impl OrbitCensus {
    /// Groups orbit sizes into rows; `None` if some size is not an even power of `q`.
    pub fn from_sizes(q: u32, sizes: impl IntoIterator<Item = u64>) -> Option<Self> {
        let mut counts = std::collections::BTreeMap::new();
        for size in sizes {
            let e = even_power_exponent(q, size)?;
            *counts.entry(e).or_insert(0u64) += 1;
        }
        Some(Self::from_rows(q, counts.into_iter().collect()))
    }

    fn from_rows(q: u32, rows: Vec<(u32, u64)>) -> Self {
        let rows: Vec<CensusRow> = rows
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|(e, count)| CensusRow {
                e,
                size: (q as u64).pow(2 * e),
                count,
            })
            .collect();
        OrbitCensus {
            total_orbits: rows.iter().map(|r| r.count).sum(),
            total_mass: rows.iter().map(|r| r.count * r.size).sum(),
            rows,
        }
    }

    /// `Σ count · (q^e)^2`, which equals the group order for a complete census.
    pub fn sum_of_squares(&self) -> u64 {
        self.rows.iter().map(|r| r.count * r.size).sum()
    }
}

/// `e` with `size = q^{2e}`.
pub fn even_power_exponent(q: u32, size: u64) -> Option<u32> {
    let mut e = 0;
    let mut s = 1u64;
    let q2 = (q as u64) * (q as u64);
    while s < size {
        s = s.checked_mul(q2)?;
        e += 1;
    }
    (s == size).then_some(e)
}

/// A brute-force orbit with its lexicographically smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeisOrbit {
    pub representative: HeisFunctional,
    pub size: u64,
}

impl BilinearForm {
    pub fn new(gram: MatrixFq) -> Result<Self, HeisError> {
        if !gram.is_square() {
            return Err(LinalgError::ShapeMismatch("Gram matrix must be square".into()).into());
        }
        Ok(BilinearForm { gram })
    }

    pub fn from_ints(ctx: &FieldCtx, gram: &[Vec<i64>]) -> Result<Self, HeisError> {
        if gram.is_empty() {
            return Ok(Self::zero(ctx, 0));
        }
        Self::new(MatrixFq::from_ints(ctx, gram)?)
    }

    pub fn zero(ctx: &FieldCtx, n: usize) -> Self {
        BilinearForm {
            gram: MatrixFq::zeros(ctx, n, n),
        }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> Self {
        BilinearForm {
            gram: MatrixFq::identity(ctx, n),
        }
    }

    /// `β(x, y) = Σ_{i≤k} x_i y_{i+k}` on `F_q^{2k}`.
    pub fn standard_symplectic(ctx: &FieldCtx, k: usize) -> Self {
        let mut gram = MatrixFq::zeros(ctx, 2 * k, 2 * k);
        for i in 0..k {
            gram.set(i, i + k, ctx.one());
        }
        BilinearForm { gram }
    }

    /// Entries drawn uniformly from `F_q` with a seeded ChaCha generator.
    pub fn random(ctx: &FieldCtx, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gram = MatrixFq::zeros(ctx, n, n);
        for i in 0..n {
            for j in 0..n {
                gram.set(i, j, Fq(rng.gen_range(0..ctx.q())));
            }
        }
        BilinearForm { gram }
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.gram.ctx()
    }

    pub fn n(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &MatrixFq {
        &self.gram
    }

    fn check_vec(&self, v: &[Fq]) -> Result<(), HeisError> {
        if v.len() != self.n() {
            return Err(HeisError::DimensionMismatch {
                expected: self.n(),
                got: v.len(),
            });
        }
        if v.iter().any(|x| x.index() >= self.ctx().q()) {
            return Err(HeisError::ContextMismatch);
        }
        Ok(())
    }

    fn check_scalar(&self, x: Fq) -> Result<(), HeisError> {
        if x.index() >= self.ctx().q() {
            return Err(HeisError::ContextMismatch);
        }
        Ok(())
    }

    pub fn eval(&self, v: &[Fq], w: &[Fq]) -> Fq {
        let ctx = self.ctx();
        let bw = self.gram.mul_vec(w).expect("length checked by caller");
        v.iter()
            .zip(&bw)
            .fold(ctx.zero(), |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b)))
    }

    /// `vᵀB`, the coordinates of `β(v, ·)`.
    pub fn left_dual(&self, v: &[Fq]) -> Vec<Fq> {
        self.gram.transpose().mul_vec(v).expect("length checked by caller")
    }

    /// `Bᵀ - B`.
    pub fn antisymmetric_part(&self) -> MatrixFq {
        self.gram.antisymmetrize().expect("Gram matrix is square")
    }

    pub fn antisymmetric_rank(&self) -> usize {
        self.antisymmetric_part().rank()
    }

    /// The form with Gram matrix `B + S`.
    pub fn perturbed(&self, s: &MatrixFq) -> Result<Self, HeisError> {
        Self::new(self.gram.add(s)?)
    }

    pub fn identity_element(&self) -> HeisElement {
        HeisElement {
            v: vec![self.ctx().zero(); self.n()],
            r: self.ctx().zero(),
        }
    }

    pub fn element(&self, v: Vec<Fq>, r: Fq) -> Result<HeisElement, HeisError> {
        self.check_vec(&v)?;
        self.check_scalar(r)?;
        Ok(HeisElement { v, r })
    }

    pub fn functional(&self, w: Vec<Fq>, s: Fq) -> Result<HeisFunctional, HeisError> {
        self.check_vec(&w)?;
        self.check_scalar(s)?;
        Ok(HeisFunctional { w, s })
    }

    pub fn multiply(&self, g: &HeisElement, h: &HeisElement) -> Result<HeisElement, HeisError> {
        self.check_vec(&g.v)?;
        self.check_vec(&h.v)?;
        self.check_scalar(g.r)?;
        self.check_scalar(h.r)?;
        let ctx = self.ctx();
        let v = g.v.iter().zip(&h.v).map(|(&a, &b)| ctx.add(a, b)).collect();
        let r = ctx.add(ctx.add(g.r, h.r), self.eval(&g.v, &h.v));
        Ok(HeisElement { v, r })
    }

    /// `(-v, β(v,v) - r)`, the two-sided inverse under the group law.
    pub fn inverse(&self, g: &HeisElement) -> HeisElement {
        let ctx = self.ctx();
        HeisElement {
            v: g.v.iter().map(|&a| ctx.neg(a)).collect(),
            r: ctx.sub(self.eval(&g.v, &g.v), g.r),
        }
    }

    fn upper_matrix(&self, v: &[Fq], corner: Fq, diag: Fq) -> MatrixFq {
        let ctx = self.ctx();
        let n = self.n();
        let mut m = MatrixFq::zeros(ctx, n + 2, n + 2);
        for i in 0..n + 2 {
            m.set(i, i, diag);
        }
        for (i, &x) in v.iter().enumerate() {
            m.set(0, i + 1, x);
        }
        for (i, x) in self.left_dual(v).into_iter().enumerate() {
            m.set(i + 1, n + 1, x);
        }
        m.set(0, n + 1, corner);
        m
    }

    /// Unitriangular matrix with first row `(1, v, r)` and last column `β(v, ·)`.
    ///
    /// The matrix product realizes the law with `β(w, v)` in place of `β(v, w)`, so
    /// `embed(g) embed(h) = embed(h g)`; the two laws agree when `β` is symmetric.
    pub fn embed_matrix(&self, g: &HeisElement) -> MatrixFq {
        self.upper_matrix(&g.v, g.r, self.ctx().one())
    }

    pub fn algebra_matrix(&self, x: &HeisAlgebraElement) -> MatrixFq {
        self.upper_matrix(&x.v, x.t, self.ctx().zero())
    }

    /// `(v, r - β(v,v)/2)`.
    pub fn log(&self, g: &HeisElement) -> HeisAlgebraElement {
        let ctx = self.ctx();
        let half = ctx.mul(ctx.half(), self.eval(&g.v, &g.v));
        HeisAlgebraElement {
            v: g.v.clone(),
            t: ctx.sub(g.r, half),
        }
    }

    pub fn exp(&self, x: &HeisAlgebraElement) -> HeisElement {
        let ctx = self.ctx();
        let half = ctx.mul(ctx.half(), self.eval(&x.v, &x.v));
        HeisElement {
            v: x.v.clone(),
            r: ctx.add(x.t, half),
        }
    }

    /// `[(v,t), (w,u)] = (0, β(w,v) - β(v,w))`.
    pub fn bracket(&self, x: &HeisAlgebraElement, y: &HeisAlgebraElement) -> HeisAlgebraElement {
        let ctx = self.ctx();
        HeisAlgebraElement {
            v: vec![ctx.zero(); self.n()],
            t: ctx.sub(self.eval(&y.v, &x.v), self.eval(&x.v, &y.v)),
        }
    }

    /// `g.λ = (w + s(Bᵀ - B)v, s)`.
    pub fn coadjoint_act(&self, g: &HeisElement, lambda: &HeisFunctional) -> Result<HeisFunctional, HeisError> {
        self.check_vec(&g.v)?;
        self.check_vec(&lambda.w)?;
        let ctx = self.ctx();
        let shift = self.antisymmetric_part().mul_vec(&g.v)?;
        let w = lambda
            .w
            .iter()
            .zip(&shift)
            .map(|(&a, &b)| ctx.add(a, ctx.mul(lambda.s, b)))
            .collect();
        Ok(HeisFunctional { w, s: lambda.s })
    }

    /// `λ(x) = <w, v> + s t`.
    pub fn pairing(&self, lambda: &HeisFunctional, x: &HeisAlgebraElement) -> Fq {
        let ctx = self.ctx();
        lambda
            .w
            .iter()
            .zip(&x.v)
            .fold(ctx.mul(lambda.s, x.t), |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b)))
    }

    /// Lie algebra basis `e_1, …, e_n, e_0` as `(n+2)×(n+2)` matrices; coordinates are `(v, t)`.
    pub fn algebra_basis(&self) -> Vec<MatrixFq> {
        let ctx = self.ctx();
        let n = self.n();
        let mut basis: Vec<MatrixFq> = (0..n)
            .map(|i| {
                let mut v = vec![ctx.zero(); n];
                v[i] = ctx.one();
                self.algebra_matrix(&HeisAlgebraElement { v, t: ctx.zero() })
            })
            .collect();
        basis.push(MatrixFq::elementary(ctx, n + 2, n + 2, 0, n + 1));
        basis
    }

    /// Dual action of the generators `(c e_i, 0)`, `c` running over an `F_p`-basis of `F_q`.
    fn dual_generators(&self) -> Vec<MatrixFq> {
        let ctx = self.ctx();
        let n = self.n();
        let anti = self.antisymmetric_part();
        let mut gens = Vec::new();
        for i in 0..n {
            for c in ctx.prime_basis() {
                // (w, s) ↦ (w + s c (Bᵀ-B) e_i, s)
                let mut g = MatrixFq::identity(ctx, n + 1);
                for row in 0..n {
                    g.set(row, n, ctx.mul(c, anti.get(row, i)));
                }
                gens.push(g);
            }
        }
        gens
    }

    /// Orbits on the dual space by breadth-first closure, in order of representative.
    pub fn enumerate_orbits_brute(&self, budget: u64) -> Result<(OrbitCensus, Vec<HeisOrbit>), HeisError> {
        let ctx = self.ctx();
        let n = self.n();
        let action = LinearAction::new(ctx, n + 1, &self.dual_generators());
        let records = action.orbits(budget, false)?;
        let orbits: Vec<HeisOrbit> = records
            .into_iter()
            .map(|r| HeisOrbit {
                representative: HeisFunctional {
                    w: r.representative[..n].to_vec(),
                    s: r.representative[n],
                },
                size: r.size,
            })
            .collect();
        let census = OrbitCensus::from_sizes(ctx.q(), orbits.iter().map(|o| o.size))
            .expect("coadjoint orbit sizes are even powers of q");
        Ok((census, orbits))
    }

    /// The census from the rank of `Bᵀ - B`.
    pub fn classify_orbits_closed_form(&self) -> OrbitCensus {
        let q = self.ctx().q() as u64;
        let n = self.n() as u32;
        let rk = self.antisymmetric_rank() as u32;
        if rk == 0 {
            return OrbitCensus::from_rows(q as u32, vec![(0, q.pow(n + 1))]);
        }
        OrbitCensus::from_rows(
            q as u32,
            vec![(0, q.pow(n)), (rk / 2, (q - 1) * q.pow(n - rk))],
        )
    }

    pub fn random_element(&self, rng: &mut impl Rng) -> HeisElement {
        let q = self.ctx().q();
        HeisElement {
            v: (0..self.n()).map(|_| Fq(rng.gen_range(0..q))).collect(),
            r: Fq(rng.gen_range(0..q)),
        }
    }

    pub fn random_functional(&self, rng: &mut impl Rng) -> HeisFunctional {
        let g = self.random_element(rng);
        HeisFunctional { w: g.v, s: g.r }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> FieldCtx {
        FieldCtx::prime(5).unwrap()
    }

    fn e12(ctx: &FieldCtx) -> BilinearForm {
        BilinearForm::from_ints(ctx, &[vec![0, 1], vec![0, 0]]).unwrap()
    }

    fn el(ctx: &FieldCtx, v: &[i64], r: i64) -> HeisElement {
        HeisElement {
            v: v.iter().map(|&x| ctx.from_int(x)).collect(),
            r: ctx.from_int(r),
        }
    }

    fn func(ctx: &FieldCtx, w: &[i64], s: i64) -> HeisFunctional {
        let g = el(ctx, w, s);
        HeisFunctional { w: g.v, s: g.r }
    }

    #[test]
    fn multiplication_examples() {
        let ctx = f5();
        let b = e12(&ctx);
        let id = b.identity_element();
        let g = el(&ctx, &[3, 4], 2);
        assert_eq!(b.multiply(&g, &id).unwrap(), g);
        assert_eq!(
            b.multiply(&el(&ctx, &[1, 0], 0), &el(&ctx, &[0, 1], 0)).unwrap(),
            el(&ctx, &[1, 1], 1)
        );
        assert_eq!(
            b.multiply(&el(&ctx, &[0, 1], 0), &el(&ctx, &[1, 0], 0)).unwrap(),
            el(&ctx, &[1, 1], 0)
        );
        let bad = HeisElement { v: vec![Fq(7), Fq(0)], r: Fq(0) };
        assert_eq!(b.multiply(&g, &bad), Err(HeisError::ContextMismatch));
        assert!(matches!(
            b.multiply(&g, &el(&ctx, &[1], 0)),
            Err(HeisError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        let ctx = f5();
        let b = e12(&ctx);
        assert_eq!(b.inverse(&b.identity_element()), b.identity_element());
        assert_eq!(b.inverse(&el(&ctx, &[1, 0], 2)), el(&ctx, &[4, 0], 3));
        let i1 = BilinearForm::identity(&ctx, 1);
        assert_eq!(i1.inverse(&el(&ctx, &[1], 0)), el(&ctx, &[4], 1));
    }

    #[test]
    fn inverse_is_two_sided_and_unique() {
        let ctx = FieldCtx::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..5 {
            let b = BilinearForm::random(&ctx, 3, seed);
            for _ in 0..40 {
                let g = b.random_element(&mut rng);
                let gi = b.inverse(&g);
                assert_eq!(b.multiply(&g, &gi).unwrap(), b.identity_element());
                assert_eq!(b.multiply(&gi, &g).unwrap(), b.identity_element());
                // Any right inverse has v-part -v; the r-part is then forced.
                for r in ctx.elements() {
                    let cand = HeisElement { v: gi.v.clone(), r };
                    let is_inv = b.multiply(&g, &cand).unwrap() == b.identity_element();
                    assert_eq!(is_inv, r == gi.r);
                }
                // The printed formula (-v, -β(v,v)) fails whenever r != 2β(v,v).
                let printed = HeisElement { v: gi.v.clone(), r: ctx.neg(b.eval(&g.v, &g.v)) };
                let two_bvv = ctx.add(b.eval(&g.v, &g.v), b.eval(&g.v, &g.v));
                assert_eq!(
                    b.multiply(&g, &printed).unwrap() == b.identity_element(),
                    g.r == two_bvv
                );
            }
        }
    }

    #[test]
    fn multiplication_is_associative() {
        let ctx = FieldCtx::new(3, 2).unwrap();
        let b = BilinearForm::random(&ctx, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let (g, h, k) = (
                b.random_element(&mut rng),
                b.random_element(&mut rng),
                b.random_element(&mut rng),
            );
            let lhs = b.multiply(&b.multiply(&g, &h).unwrap(), &k).unwrap();
            let rhs = b.multiply(&g, &b.multiply(&h, &k).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn embedding_example() {
        let ctx = f5();
        let b = e12(&ctx);
        assert_eq!(b.embed_matrix(&b.identity_element()), MatrixFq::identity(&ctx, 4));
        let m = b.embed_matrix(&el(&ctx, &[1, 2], 3));
        assert_eq!(m.row(0), &[Fq(1), Fq(1), Fq(2), Fq(3)]);
        assert_eq!(m.get(1, 3), Fq(0));
        assert_eq!(m.get(2, 3), Fq(1));
        assert!(m.is_unitriangular());
        // Transposition swaps the first row and last column.
        let t = m.transpose();
        for i in 0..4 {
            assert_eq!(t.get(i, 0), m.get(0, i));
            assert_eq!(t.get(3, i), m.get(i, 3));
        }
    }

    #[test]
    fn embedding_reverses_products_of_the_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut strict_mismatch = 0;
        for (q, n) in [(5, 1), (5, 2), (7, 3), (7, 4)] {
            let ctx = FieldCtx::prime(q).unwrap();
            for seed in 0..4 {
                let b = BilinearForm::random(&ctx, n, seed);
                let sym = {
                    let s = b.gram().add(&b.gram().transpose()).unwrap();
                    BilinearForm::new(s).unwrap()
                };
                for _ in 0..200 / 16 {
                    let g = b.random_element(&mut rng);
                    let h = b.random_element(&mut rng);
                    let prod = b.embed_matrix(&g).mul(&b.embed_matrix(&h)).unwrap();
                    assert_eq!(prod, b.embed_matrix(&b.multiply(&h, &g).unwrap()));
                    if prod != b.embed_matrix(&b.multiply(&g, &h).unwrap()) {
                        strict_mismatch += 1;
                    }
                    let sprod = sym.embed_matrix(&g).mul(&sym.embed_matrix(&h)).unwrap();
                    assert_eq!(sprod, sym.embed_matrix(&sym.multiply(&g, &h).unwrap()));
                }
            }
        }
        assert!(strict_mismatch > 0);
    }

    #[test]
    fn log_examples_and_matrix_consistency() {
        let ctx = f5();
        let b = e12(&ctx);
        let z = b.log(&b.identity_element());
        assert!(z.v.iter().all(|x| x.is_zero()) && z.t.is_zero());
        assert_eq!(b.log(&el(&ctx, &[1, 1], 1)).t, Fq(3));
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for seed in 0..4 {
            let b = BilinearForm::random(&ctx, 3, seed);
            for _ in 0..25 {
                let g = b.random_element(&mut rng);
                let lm = b.embed_matrix(&g).log_unipotent().unwrap();
                let x = b.log(&g);
                assert_eq!(lm.get(0, b.n() + 1), x.t);
                assert_eq!(lm, b.algebra_matrix(&x));
                assert_eq!(b.exp(&x), g);
                assert_eq!(b.algebra_matrix(&x).exp_nilpotent().unwrap(), b.embed_matrix(&g));
            }
        }
    }

    #[test]
    fn bracket_examples() {
        let ctx = f5();
        let b = e12(&ctx);
        let x = b.log(&el(&ctx, &[1, 0], 0));
        let y = b.log(&el(&ctx, &[0, 1], 0));
        assert!(b.bracket(&x, &x).t.is_zero());
        assert_eq!(b.bracket(&x, &y).t, Fq(4));
        assert_eq!(b.bracket(&y, &x).t, Fq(1));
        // Matches the matrix commutator of the embedded algebra.
        let c = b.algebra_matrix(&x).commutator(&b.algebra_matrix(&y)).unwrap();
        assert_eq!(c, b.algebra_matrix(&b.bracket(&x, &y)));
    }

    #[test]
    fn coadjoint_examples() {
        let ctx = f5();
        let b = e12(&ctx);
        let g = el(&ctx, &[1, 0], 0);
        let lam = func(&ctx, &[0, 0], 1);
        assert_eq!(b.coadjoint_act(&g, &lam).unwrap(), func(&ctx, &[0, 1], 1));
        let flat = func(&ctx, &[2, 3], 0);
        assert_eq!(b.coadjoint_act(&el(&ctx, &[4, 4], 2), &flat).unwrap(), flat);
        assert_eq!(b.coadjoint_act(&b.identity_element(), &lam).unwrap(), lam);
    }

    /// `g.λ` from the trace-form picture: conjugate the lower-triangular matrix of `λ` and
    /// fold its bottom row back through `β(·, f)`.
    fn coadjoint_by_matrices(b: &BilinearForm, g: &HeisElement, lam: &HeisFunctional) -> HeisFunctional {
        let ctx = b.ctx();
        let n = b.n();
        let mut ml = MatrixFq::zeros(ctx, n + 2, n + 2);
        for i in 0..n {
            ml.set(i + 1, 0, lam.w[i]);
        }
        ml.set(n + 1, 0, lam.s);
        let gm = b.embed_matrix(g);
        let conj = gm.mul(&ml).unwrap().mul(&gm.inverse().unwrap()).unwrap();
        let col: Vec<Fq> = (0..n).map(|i| conj.get(i + 1, 0)).collect();
        let row: Vec<Fq> = (0..n).map(|i| conj.get(n + 1, i + 1)).collect();
        let folded = b.gram().mul_vec(&row).unwrap();
        HeisFunctional {
            w: col.iter().zip(&folded).map(|(&a, &c)| ctx.add(a, c)).collect(),
            s: conj.get(n + 1, 0),
        }
    }

    #[test]
    fn coadjoint_agrees_with_trace_form_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for q in [5, 7] {
            let ctx = FieldCtx::prime(q).unwrap();
            for seed in 0..5 {
                let b = BilinearForm::random(&ctx, 3, seed);
                for _ in 0..20 {
                    let g = b.random_element(&mut rng);
                    let lam = b.random_functional(&mut rng);
                    assert_eq!(b.coadjoint_act(&g, &lam).unwrap(), coadjoint_by_matrices(&b, &g, &lam));
                }
            }
        }
    }

    #[test]
    fn coadjoint_is_an_action() {
        let ctx = FieldCtx::prime(7).unwrap();
        let b = BilinearForm::random(&ctx, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..200 {
            let g = b.random_element(&mut rng);
            let h = b.random_element(&mut rng);
            let lam = b.random_functional(&mut rng);
            let gh = b.multiply(&g, &h).unwrap();
            let lhs = b.coadjoint_act(&gh, &lam).unwrap();
            let rhs = b.coadjoint_act(&g, &b.coadjoint_act(&h, &lam).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pairing_examples() {
        let ctx = f5();
        let b = e12(&ctx);
        let x = HeisAlgebraElement { v: vec![Fq(2), Fq(3)], t: Fq(4) };
        assert_eq!(b.pairing(&func(&ctx, &[0, 0], 1), &x), Fq(4));
        let x0 = HeisAlgebraElement { v: vec![Fq(2), Fq(3)], t: Fq(0) };
        assert_eq!(b.pairing(&func(&ctx, &[1, 0], 0), &x0), Fq(2));
    }

    fn row(e: u32, size: u64, count: u64) -> CensusRow {
        CensusRow { e, size, count }
    }

    #[test]
    fn census_examples() {
        let ctx = f5();
        let b1 = BilinearForm::from_ints(&ctx, &[vec![3]]).unwrap();
        let (c1, _) = b1.enumerate_orbits_brute(crate::orbits::DEFAULT_BUDGET).unwrap();
        assert_eq!(c1.rows, vec![row(0, 1, 25)]);

        let b = e12(&ctx);
        let (brute, orbits) = b.enumerate_orbits_brute(crate::orbits::DEFAULT_BUDGET).unwrap();
        assert_eq!(brute.rows, vec![row(0, 1, 25), row(1, 25, 4)]);
        assert_eq!(brute.total_orbits, 29);
        assert_eq!(brute.total_mass, 125);
        assert_eq!(b.classify_orbits_closed_form(), brute);
        // Representatives of the big orbits are ((0,0), s).
        let big: Vec<_> = orbits.iter().filter(|o| o.size == 25).map(|o| o.representative.clone()).collect();
        assert_eq!(big, (1..5).map(|s| func(&ctx, &[0, 0], s)).collect::<Vec<_>>());

        let sym = BilinearForm::identity(&ctx, 3);
        assert_eq!(sym.classify_orbits_closed_form().rows, vec![row(0, 1, 625)]);

        let sp = BilinearForm::standard_symplectic(&ctx, 2);
        assert_eq!(sp.antisymmetric_rank(), 4);
        let c = sp.classify_orbits_closed_form();
        assert_eq!(c.rows[1], row(2, 625, 4));
    }

    #[test]
    fn brute_force_matches_closed_form_over_extension_field() {
        let ctx = FieldCtx::new(3, 2).unwrap();
        for seed in 0..5 {
            let b = BilinearForm::random(&ctx, 3, seed);
            let (brute, _) = b.enumerate_orbits_brute(crate::orbits::DEFAULT_BUDGET).unwrap();
            assert_eq!(brute, b.classify_orbits_closed_form());
            assert_eq!(brute.total_mass, 9u64.pow(4));
        }
    }

    #[test]
    fn budget_errors() {
        let ctx = f5();
        let b = BilinearForm::zero(&ctx, 4);
        assert!(matches!(b.enumerate_orbits_brute(100), Err(HeisError::Budget(_))));
    }

    #[test]
    fn even_power_detection() {
        assert_eq!(even_power_exponent(5, 1), Some(0));
        assert_eq!(even_power_exponent(5, 25), Some(1));
        assert_eq!(even_power_exponent(5, 5), None);
        assert_eq!(even_power_exponent(7, 2401), Some(2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn antisymmetric_rank_is_even(seed in any::<u64>(), n in 1usize..6, qi in 0usize..3) {
                let ctx = FieldCtx::prime([5, 7, 11][qi]).unwrap();
                let b = BilinearForm::random(&ctx, n, seed);
                prop_assert_eq!(b.antisymmetric_rank() % 2, 0);
            }

            #[test]
            fn census_depends_only_on_antisymmetric_part(seed in any::<u64>(), n in 1usize..4) {
                let ctx = FieldCtx::prime(5).unwrap();
                let b = BilinearForm::random(&ctx, n, seed);
                let s = BilinearForm::random(&ctx, n, seed ^ 0x5EED);
                let sym = s.gram().add(&s.gram().transpose()).unwrap();
                let b2 = b.perturbed(&sym).unwrap();
                prop_assert_eq!(b.classify_orbits_closed_form(), b2.classify_orbits_closed_form());
                let budget = crate::orbits::DEFAULT_BUDGET;
                prop_assert_eq!(b.enumerate_orbits_brute(budget).unwrap().0, b2.enumerate_orbits_brute(budget).unwrap().0);
            }
        }
    }
}
