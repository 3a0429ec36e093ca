//! Two-layered orthogonal Heisenberg groups `Hei₂(B_{n+1})`, `Hei₂(D_{n+1})` as `A ⋊ B`,
//! with the little-group census of their irreducible characters.
//!
//! `A = exp` of the first-column root span (coordinates `a_1, …, a_{-1}`), `B = exp` of the
//! second-column span (coordinates `b_2, …, b_{-2}`); both orders are the canonical root order.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldCtx, Fq};
use crate::kirillov::{DegreeCount, KirillovError, UnipotentGroupSpec};
use crate::linalg::{LinalgError, MatrixFq, SpanSolver};
use crate::orbits::{space_size, BudgetExceeded, LinearAction};
use crate::roots::{abelian_ideal_check, matrices, Family, RootError, RootSystemType, RootVector, Subalgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MackeyError {
    #[error("Hei2 is defined here for families B, C, D; got {0}")]
    UnsupportedFamily(Family),
    #[error("parameter n must be at least 2, got {0}")]
    ParameterTooSmall(usize),
    #[error("characteristic {0} must exceed 3")]
    CharacteristicTooSmall(u32),
    #[error("family C: the first-column ideal is not abelian, so the little group method does not apply")]
    NonAbelianIdeal,
    #[error("semidirect decomposition failed: {0}")]
    SemidirectViolation(String),
    #[error("coordinate vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Kirillov(#[from] KirillovError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hei2Spec {
    pub family: Family,
    pub n: usize,
    pub ctx: FieldCtx,
}

impl Hei2Spec {
    pub fn new(family: Family, n: usize, ctx: &FieldCtx) -> Result<Self, MackeyError> {
        if family == Family::A {
            return Err(MackeyError::UnsupportedFamily(family));
        }
        if n < 2 {
            return Err(MackeyError::ParameterTooSmall(n));
        }
        if ctx.p() <= 3 {
            return Err(MackeyError::CharacteristicTooSmall(ctx.p()));
        }
        Ok(Hei2Spec {
            family,
            n,
            ctx: ctx.clone(),
        })
    }

    /// Dimension of `A`: `2n+1` for B, `2n` for C and D.
    pub fn k(&self) -> usize {
        match self.family {
            Family::D => 2 * self.n,
            _ => 2 * self.n + 1,
        }
    }

    pub fn root_system(&self) -> RootSystemType {
        RootSystemType::new(self.family, self.n + 1).expect("n >= 2")
    }

    fn q(&self) -> u64 {
        self.ctx.q() as u64
    }

    pub fn order_a(&self) -> u64 {
        self.q().pow(self.k() as u32)
    }

    pub fn order_b(&self) -> u64 {
        self.q().pow(self.k() as u32 - 2)
    }

    pub fn group_order(&self) -> u64 {
        self.order_a() * self.order_b()
    }

    /// The whole group as a generic unipotent group (all families).
    pub fn full_group(&self) -> Result<UnipotentGroupSpec, MackeyError> {
        Ok(UnipotentGroupSpec::from_roots(
            &self.root_system(),
            Subalgebra::Hei2,
            &self.ctx,
        )?)
    }

    /// Builds `A` and `B` and verifies the semidirect product structure.
    pub fn build_groups(&self) -> Result<Hei2Groups, MackeyError> {
        if self.family == Family::C {
            return Err(MackeyError::NonAbelianIdeal);
        }
        let t = self.root_system();
        let ctx = &self.ctx;
        let full = self.full_group()?;
        let hei2 = t.subalgebra_basis(Subalgebra::Hei2, ctx)?;
        let a_vecs: Vec<RootVector> = hei2.iter().filter(|v| v.root.col() == 1).cloned().collect();
        let b_vecs: Vec<RootVector> = hei2.iter().filter(|v| v.root.col() == 2).cloned().collect();
        let violation = |s: &str| MackeyError::SemidirectViolation(s.to_string());
        let a_check = abelian_ideal_check(ctx, &a_vecs, &hei2)?;
        if !a_check.is_abelian {
            return Err(violation("A is not abelian"));
        }
        if !a_check.is_ideal {
            return Err(violation("A is not normal"));
        }
        let b_check = abelian_ideal_check(ctx, &b_vecs, &hei2)?;
        if !b_check.is_subalgebra || !b_check.is_abelian {
            return Err(violation("B is not an abelian subgroup"));
        }
        if a_vecs.len() != self.k() || b_vecs.len() != self.k() - 2 {
            return Err(violation("unexpected dimensions"));
        }
        let a_basis = matrices(&a_vecs);
        let b_basis = matrices(&b_vecs);
        // Independence of the two spans gives A ∩ B = {1} and |A||B| = |G|.
        if SpanSolver::from_matrices(ctx, &[a_basis.clone(), b_basis.clone()].concat()).is_err() {
            return Err(violation("A and B spans intersect"));
        }
        let a_solver = SpanSolver::from_matrices(ctx, &a_basis)?;
        Ok(Hei2Groups {
            spec: self.clone(),
            a_roots: a_vecs.iter().map(|v| v.root.to_string()).collect(),
            b_roots: b_vecs.iter().map(|v| v.root.to_string()).collect(),
            a_basis,
            b_basis,
            a_solver,
            full,
            dual_cache: OnceLock::new(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LittleCase {
    WholeB,
    Hyperplane,
    Trivial,
    /// A stabilizer size outside the three expected values.
    Unexpected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LittleGroupDesc {
    pub case: LittleCase,
    /// For the hyperplane case, `c` with `B^ψ = {b : Σ c_j b_j = 0}`, first nonzero entry 1.
    pub normal_vector: Option<Vec<Fq>>,
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterOrbit {
    #[serde(serialize_with = "ser_indices")]
    pub representative: Vec<Fq>,
    pub size: u64,
    pub case: LittleCase,
}

fn ser_indices<S: serde::Serializer>(v: &[Fq], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.index()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MackeyRow {
    pub e: u32,
    pub degree: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub e: u32,
    pub degree: u64,
    pub computed: u64,
    pub printed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MackeyCensus {
    pub computed_rows: Vec<MackeyRow>,
    pub total: u64,
    pub group_order: u64,
    pub sum_of_squares: u64,
    pub sum_of_squares_ok: bool,
    pub paper_rows: Vec<MackeyRow>,
    pub paper_total: u64,
    pub paper_sum_of_squares: u64,
    pub paper_sum_of_squares_ok: bool,
    pub discrepancy_flags: Vec<Discrepancy>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BruteCensus {
    pub class_count: u64,
    pub per_degree: Option<Vec<DegreeCount>>,
}

/// `A ⋊ B` with coordinate charts and the full group.
#[derive(Debug)]
pub struct Hei2Groups {
    spec: Hei2Spec,
    pub a_roots: Vec<String>,
    pub b_roots: Vec<String>,
    a_basis: Vec<MatrixFq>,
    b_basis: Vec<MatrixFq>,
    a_solver: SpanSolver,
    full: UnipotentGroupSpec,
    dual_cache: OnceLock<Vec<MatrixFq>>,
}

impl Hei2Groups {
    pub fn spec(&self) -> &Hei2Spec {
        &self.spec
    }

    pub fn full_group(&self) -> &UnipotentGroupSpec {
        &self.full
    }

    fn ctx(&self) -> &FieldCtx {
        &self.spec.ctx
    }

    fn k(&self) -> usize {
        self.spec.k()
    }

    fn combine(&self, basis: &[MatrixFq], x: &[Fq]) -> MatrixFq {
        let size = self.full.ambient_size();
        let mut m = MatrixFq::zeros(self.ctx(), size, size);
        for (c, b) in x.iter().zip(basis) {
            if !c.is_zero() {
                m = m.add(&b.scalar_mul(*c)).expect("same shape");
            }
        }
        m
    }

    fn check(&self, x: &[Fq], expected: usize) -> Result<(), MackeyError> {
        if x.len() != expected {
            return Err(MackeyError::LengthMismatch { expected, got: x.len() });
        }
        Ok(())
    }

    pub fn a_matrix(&self, a: &[Fq]) -> Result<MatrixFq, MackeyError> {
        self.check(a, self.k())?;
        Ok(self.combine(&self.a_basis, a).exp_nilpotent()?)
    }

    pub fn b_matrix(&self, b: &[Fq]) -> Result<MatrixFq, MackeyError> {
        self.check(b, self.k() - 2)?;
        Ok(self.combine(&self.b_basis, b).exp_nilpotent()?)
    }

    /// Coordinates of an element of `A`.
    pub fn a_coords(&self, g: &MatrixFq) -> Result<Vec<Fq>, MackeyError> {
        self.a_solver
            .coords(g.log_unipotent()?.entries())
            .ok_or_else(|| MackeyError::SemidirectViolation("element is not in A".into()))
    }

    /// `b a b⁻¹` by matrix conjugation.
    pub fn conj_action(&self, b: &[Fq], a: &[Fq]) -> Result<Vec<Fq>, MackeyError> {
        let bm = self.b_matrix(b)?;
        let bi = self.b_matrix(&b.iter().map(|&x| self.ctx().neg(x)).collect::<Vec<_>>())?;
        let c = bm.mul(&self.a_matrix(a)?)?.mul(&bi)?;
        self.a_coords(&c)
    }

    /// Matrix of `a ↦ b a b⁻¹` on `A`-coordinates.
    pub fn conj_matrix(&self, b: &[Fq]) -> Result<MatrixFq, MackeyError> {
        let bm = self.b_matrix(b)?;
        let bi = self.b_matrix(&b.iter().map(|&x| self.ctx().neg(x)).collect::<Vec<_>>())?;
        let k = self.k();
        let mut m = MatrixFq::zeros(self.ctx(), k, k);
        for (j, e) in self.a_basis.iter().enumerate() {
            let c = self
                .a_solver
                .coords(bm.mul(e)?.mul(&bi)?.entries())
                .ok_or_else(|| MackeyError::SemidirectViolation("A is not normalized by B".into()))?;
            for (i, v) in c.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    /// Matrix of `x ↦ y` where `b.ψ_x = ψ_y`, i.e. `ψ_y(a) = ψ_x(b⁻¹ a b)`.
    pub fn dual_matrix(&self, b: &[Fq]) -> Result<MatrixFq, MackeyError> {
        let binv: Vec<Fq> = b.iter().map(|&x| self.ctx().neg(x)).collect();
        Ok(self.conj_matrix(&binv)?.transpose())
    }

    fn b_generators(&self) -> Vec<Vec<Fq>> {
        let mut out = Vec::new();
        for j in 0..self.k() - 2 {
            for c in self.ctx().prime_basis() {
                let mut b = vec![self.ctx().zero(); self.k() - 2];
                b[j] = c;
                out.push(b);
            }
        }
        out
    }

    pub fn dual_action(&self) -> Result<LinearAction, MackeyError> {
        let gens = self
            .b_generators()
            .iter()
            .map(|b| self.dual_matrix(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LinearAction::new(self.ctx(), self.k(), &gens))
    }

    /// All elements of `B` in coordinate order.
    fn b_elements(&self) -> Vec<Vec<Fq>> {
        let act = LinearAction::new(self.ctx(), self.k() - 2, &[]);
        (0..self.spec.order_b()).map(|c| act.decode_vec(c)).collect()
    }

    fn all_dual_matrices(&self, budget: u64) -> Result<&[MatrixFq], MackeyError> {
        space_size(self.ctx().q(), self.k() - 2, budget)?;
        if self.dual_cache.get().is_none() {
            let ms = self
                .b_elements()
                .iter()
                .map(|b| self.dual_matrix(b))
                .collect::<Result<Vec<_>, _>>()?;
            let _ = self.dual_cache.set(ms);
        }
        Ok(self.dual_cache.get().expect("initialized above"))
    }

    /// Stabilizer of `ψ_x` in `B`, by checking every `b`.
    pub fn little_group(&self, x: &[Fq], budget: u64) -> Result<LittleGroupDesc, MackeyError> {
        self.check(x, self.k())?;
        let mats = self.all_dual_matrices(budget)?;
        let elems = self.b_elements();
        let mut stab = Vec::new();
        for (b, m) in elems.iter().zip(mats) {
            if m.mul_vec(x)? == x {
                stab.push(b.clone());
            }
        }
        let size = stab.len() as u64;
        let q = self.spec.q();
        let ob = self.spec.order_b();
        let case = if size == ob {
            LittleCase::WholeB
        } else if size * q == ob {
            LittleCase::Hyperplane
        } else if size == 1 {
            LittleCase::Trivial
        } else {
            LittleCase::Unexpected
        };
        let normal_vector = if case == LittleCase::Hyperplane {
            let s = MatrixFq::from_rows(self.ctx(), stab)?;
            let kernel = s.rank_image_kernel().kernel_basis;
            (kernel.len() == 1).then(|| normalize(self.ctx(), &kernel[0]))
        } else {
            None
        };
        Ok(LittleGroupDesc {
            case,
            normal_vector,
            size,
        })
    }

    fn case_for_orbit_size(&self, size: u64) -> LittleCase {
        let q = self.spec.q();
        let ob = self.spec.order_b();
        match size {
            1 => LittleCase::WholeB,
            s if s == q => LittleCase::Hyperplane,
            s if s == ob => LittleCase::Trivial,
            _ => LittleCase::Unexpected,
        }
    }

    /// `B`-orbits on the characters `ψ_x` of `A`, ordered by representative.
    pub fn character_orbits(&self, budget: u64) -> Result<Vec<CharacterOrbit>, MackeyError> {
        let records = self.dual_action()?.orbits(budget, false)?;
        Ok(records
            .into_iter()
            .map(|r| CharacterOrbit {
                case: self.case_for_orbit_size(r.size),
                representative: r.representative,
                size: r.size,
            })
            .collect())
    }

    /// Each orbit contributes `|B^ψ| = |B| / |orbit|` characters of degree `|orbit|`.
    pub fn mackey_census(&self, budget: u64) -> Result<MackeyCensus, MackeyError> {
        let orbits = self.character_orbits(budget)?;
        let q = self.spec.q();
        let ob = self.spec.order_b();
        let mut by_degree: BTreeMap<u64, u64> = BTreeMap::new();
        for o in &orbits {
            *by_degree.entry(o.size).or_default() += ob / o.size;
        }
        let computed_rows: Vec<MackeyRow> = by_degree
            .into_iter()
            .map(|(degree, count)| MackeyRow {
                e: exponent(q, degree),
                degree,
                count,
            })
            .collect();
        let paper_rows = paper_rows(self.spec.family, self.spec.n, q);
        Ok(assemble_census(computed_rows, paper_rows, self.spec.group_order()))
    }

    /// Every pair `(a, b)` with equal matrices has `a = 0`, `b = 0`.
    pub fn verify_trivial_intersection(&self, budget: u64) -> Result<bool, MackeyError> {
        space_size(self.ctx().q(), self.k(), budget)?;
        let act_a = LinearAction::new(self.ctx(), self.k(), &[]);
        let b_mats: HashSet<Vec<u32>> = self
            .b_elements()
            .iter()
            .map(|b| Ok(self.b_matrix(b)?.entries().iter().map(|x| x.index()).collect()))
            .collect::<Result<_, MackeyError>>()?;
        let id: Vec<u32> = MatrixFq::identity(self.ctx(), self.full.ambient_size())
            .entries()
            .iter()
            .map(|x| x.index())
            .collect();
        for code in 0..self.spec.order_a() {
            let a = act_a.decode_vec(code);
            let m: Vec<u32> = self.a_matrix(&a)?.entries().iter().map(|x| x.index()).collect();
            if m != id && b_mats.contains(&m) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn normalize(ctx: &FieldCtx, v: &[Fq]) -> Vec<Fq> {
    let lead = v.iter().find(|x| !x.is_zero()).copied().unwrap_or(ctx.one());
    let inv = ctx.inv(lead).expect("nonzero");
    v.iter().map(|&x| ctx.mul(x, inv)).collect()
}

fn exponent(q: u64, degree: u64) -> u32 {
    let mut e = 0;
    let mut d = 1;
    while d < degree {
        d *= q;
        e += 1;
    }
    e
}

/// The printed table for `Hei₂(X_{n+1})`: `q^{k-2}`, `q^{k-2}(q^{k-2}-1)/(q-1)` and `(q-1)q`
/// characters of degrees `1`, `q`, `q^{k-2}`.
pub fn paper_rows(family: Family, n: usize, q: u64) -> Vec<MackeyRow> {
    let k = if family == Family::D { 2 * n } else { 2 * n + 1 } as u32;
    let m = q.pow(k - 2);
    vec![
        MackeyRow { e: 0, degree: 1, count: m },
        MackeyRow { e: 1, degree: q, count: m * (m - 1) / (q - 1) },
        MackeyRow { e: k - 2, degree: m, count: (q - 1) * q },
    ]
}

fn assemble_census(computed_rows: Vec<MackeyRow>, paper_rows: Vec<MackeyRow>, group_order: u64) -> MackeyCensus {
    let sq = |rows: &[MackeyRow]| rows.iter().map(|r| r.count * r.degree * r.degree).sum::<u64>();
    let sum_of_squares = sq(&computed_rows);
    let paper_sum_of_squares = sq(&paper_rows);
    let mut degrees: Vec<(u32, u64)> = computed_rows
        .iter()
        .chain(&paper_rows)
        .map(|r| (r.e, r.degree))
        .collect();
    degrees.sort_unstable();
    degrees.dedup();
    let lookup = |rows: &[MackeyRow], d: u64| rows.iter().find(|r| r.degree == d).map_or(0, |r| r.count);
    let discrepancy_flags = degrees
        .into_iter()
        .filter_map(|(e, degree)| {
            let computed = lookup(&computed_rows, degree);
            let printed = lookup(&paper_rows, degree);
            (computed != printed).then_some(Discrepancy {
                e,
                degree,
                computed,
                printed,
            })
        })
        .collect();
    MackeyCensus {
        total: computed_rows.iter().map(|r| r.count).sum(),
        paper_total: paper_rows.iter().map(|r| r.count).sum(),
        sum_of_squares_ok: sum_of_squares == group_order,
        paper_sum_of_squares_ok: paper_sum_of_squares == group_order,
        group_order,
        sum_of_squares,
        paper_sum_of_squares,
        computed_rows,
        paper_rows,
        discrepancy_flags,
    }
}

/// Mackey census; refuses family C.
pub fn mackey_census(spec: &Hei2Spec, budget: u64) -> Result<MackeyCensus, MackeyError> {
    spec.build_groups()?.mackey_census(budget)
}

/// Conjugacy-class count of the full group, with per-degree orbit counts.
pub fn brute_force_census(spec: &Hei2Spec, budget: u64) -> Result<BruteCensus, MackeyError> {
    let full = spec.full_group()?;
    let class_count = full.conjugacy_class_count(budget)?;
    let per_degree = match full.coadjoint_census(budget) {
        Ok(orbits) => Some(full.degree_counts(&orbits)),
        Err(KirillovError::Budget(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(BruteCensus {
        class_count,
        per_degree,
    })
}
