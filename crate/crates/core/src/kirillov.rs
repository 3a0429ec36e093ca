//! Orbit method for unipotent matrix groups given by a basis of their Lie algebra.
//!
//! Group elements are stored in log coordinates `x` with `g = exp(Σ x_i b_i)`. In these
//! coordinates conjugation by `g` is the linear map `Ad(g)`, so conjugacy classes are
//! `Ad`-orbits on `F_q^d`. Functionals use dual-basis coordinates and `g.λ = λ ∘ Ad(g⁻¹)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cyclotomic::{counts_as_integer, CyclotomicValue};
use crate::field::{FieldCtx, Fq};
use crate::heisenberg::{even_power_exponent, BilinearForm};
use crate::linalg::{rref_in_place, LinalgError, MatrixFq, SpanSolver};
use crate::orbits::{space_size, BudgetExceeded, LinearAction};
use crate::roots::{matrices, Family, RootError, RootSystemType, Subalgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KirillovError {
    #[error("coordinate vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("basis matrices must be square of size {0} over one field")]
    BadBasis(usize),
    #[error("basis matrices are linearly dependent")]
    LinearlyDependent,
    #[error("basis element {0} is not nilpotent")]
    NotNilpotent(usize),
    #[error("span is not closed under the bracket")]
    NotClosedUnderBracket,
    #[error("characteristic {p} must exceed {bound} ({what})")]
    CharacteristicTooSmall { p: u32, bound: usize, what: &'static str },
    #[error("orbit does not belong to this group")]
    OrbitSpecMismatch,
    #[error("inner product is not rational; inputs are not characters")]
    IrrationalInnerProduct,
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// A unipotent group `exp(n)` for a Lie algebra `n` of nilpotent matrices.
#[derive(Clone, Debug)]
pub struct UnipotentGroupSpec {
    ctx: FieldCtx,
    ambient_size: usize,
    basis: Vec<MatrixFq>,
    solver: SpanSolver,
    nilpotency_class: usize,
    associative_index: usize,
    lie_generators: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoadjointOrbit {
    #[serde(serialize_with = "ser_indices")]
    pub representative: Vec<Fq>,
    pub size: u64,
    pub e: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugacyClass {
    #[serde(serialize_with = "ser_indices")]
    pub representative: Vec<Fq>,
    pub size: u64,
}

fn ser_indices<S: serde::Serializer>(v: &[Fq], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.index()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeCount {
    pub e: u32,
    pub degree: u64,
    pub count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthoMode {
    Exhaustive,
    Subset,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthonormalityReport {
    pub mode: OrthoMode,
    pub characters_checked: usize,
    pub pairs_checked: usize,
    pub ok: bool,
    /// `(i, j, value)` for pairs whose inner product is not the Kronecker delta.
    pub failures: Vec<(usize, usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub dimension: usize,
    pub group_order: u64,
    pub orbit_count: u64,
    pub class_count: u64,
    pub orbits_equal_classes: bool,
    pub sum_of_squares: u64,
    pub sum_of_squares_ok: bool,
    pub orbit_sizes_even_powers: bool,
    pub orthonormality: OrthonormalityReport,
    pub degree_counts: Vec<DegreeCount>,
    pub passed: bool,
}

/// Work limit for exhaustive orthonormality checks (roughly elementary operations).
const EXHAUSTIVE_WORK: u128 = 500_000_000;
/// Group order above which orthonormality is only checked on a subset.
const EXHAUSTIVE_ORDER: u64 = 1_000_000;
const SUBSET_PER_DEGREE: usize = 3;

impl UnipotentGroupSpec {
    pub fn new(ctx: &FieldCtx, ambient_size: usize, basis: Vec<MatrixFq>) -> Result<Self, KirillovError> {
        if basis
            .iter()
            .any(|b| b.rows() != ambient_size || b.cols() != ambient_size || b.ctx() != ctx)
        {
            return Err(KirillovError::BadBasis(ambient_size));
        }
        let solver = match SpanSolver::from_matrices(ctx, &basis) {
            Ok(s) => s,
            Err(LinalgError::LinearlyDependent) => return Err(KirillovError::LinearlyDependent),
            Err(e) => return Err(e.into()),
        };
        if let Some(i) = basis.iter().position(|b| b.nilpotency_index().is_none()) {
            return Err(KirillovError::NotNilpotent(i));
        }
        let n2 = ambient_size * ambient_size;
        // Lower central series, tracked as spanning sets of flattened matrices.
        let mut derived = Vec::new();
        for (i, x) in basis.iter().enumerate() {
            for y in &basis[i + 1..] {
                let c = x.commutator(y)?;
                if !solver.contains(c.entries()) {
                    return Err(KirillovError::NotClosedUnderBracket);
                }
                derived.push(c.entries().to_vec());
            }
        }
        let mut nilpotency_class = usize::from(!basis.is_empty());
        let mut term = echelon(ctx, derived.clone(), n2);
        while !term.is_empty() {
            nilpotency_class += 1;
            let mut next = Vec::new();
            for t in &term {
                let tm = MatrixFq::from_rows(ctx, vec![t.clone()])?;
                let tm = reshape(&tm, ambient_size);
                for b in &basis {
                    next.push(b.commutator(&tm)?.entries().to_vec());
                }
            }
            term = echelon(ctx, next, n2);
        }
        // Associative powers of the span; the index is one more than the number of nonzero powers.
        let mut associative_index = 1;
        let mut prod = echelon(ctx, basis.iter().map(|b| b.entries().to_vec()).collect(), n2);
        while !prod.is_empty() {
            associative_index += 1;
            let mut next = Vec::new();
            for t in &prod {
                let tm = reshape(&MatrixFq::from_rows(ctx, vec![t.clone()])?, ambient_size);
                for b in &basis {
                    next.push(tm.mul(b)?.entries().to_vec());
                }
            }
            prod = echelon(ctx, next, n2);
        }
        let p = ctx.p();
        if p as usize <= nilpotency_class {
            return Err(KirillovError::CharacteristicTooSmall {
                p,
                bound: nilpotency_class,
                what: "nilpotency class",
            });
        }
        // exp and log use x^i / i! for i < m, so p must exceed m - 1.
        if (p as usize) < associative_index {
            return Err(KirillovError::CharacteristicTooSmall {
                p,
                bound: associative_index - 1,
                what: "largest nonzero power",
            });
        }
        // Basis elements spanning n modulo [n, n] generate n as a Lie algebra.
        let mut span = echelon(ctx, derived, n2);
        let mut lie_generators = Vec::new();
        for (i, b) in basis.iter().enumerate() {
            let mut trial = span.clone();
            trial.push(b.entries().to_vec());
            let trial = echelon(ctx, trial, n2);
            if trial.len() > span.len() {
                lie_generators.push(i);
                span = trial;
            }
        }
        Ok(UnipotentGroupSpec {
            ctx: ctx.clone(),
            ambient_size,
            basis,
            solver,
            nilpotency_class,
            associative_index,
            lie_generators,
        })
    }

    /// `H_β` with basis `e_1, …, e_n, e_0`; coordinates `(v, t)`.
    pub fn from_heisenberg(form: &BilinearForm) -> Result<Self, KirillovError> {
        Self::new(form.ctx(), form.n() + 2, form.algebra_basis())
    }

    /// The span of the root vectors of a named subalgebra.
    pub fn from_roots(t: &RootSystemType, name: Subalgebra, ctx: &FieldCtx) -> Result<Self, KirillovError> {
        let basis = t.subalgebra_basis(name, ctx)?;
        Self::new(ctx, t.ambient_size(), matrices(&basis))
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_size(&self) -> usize {
        self.ambient_size
    }

    pub fn basis(&self) -> &[MatrixFq] {
        &self.basis
    }

    pub fn nilpotency_class(&self) -> usize {
        self.nilpotency_class
    }

    /// Smallest `m` such that every product of `m` algebra elements vanishes.
    pub fn associative_index(&self) -> usize {
        self.associative_index
    }

    pub fn lie_generators(&self) -> &[usize] {
        &self.lie_generators
    }

    pub fn group_order(&self) -> u128 {
        (self.ctx.q() as u128).pow(self.dim() as u32)
    }

    fn check_len(&self, x: &[Fq]) -> Result<(), KirillovError> {
        if x.len() != self.dim() {
            return Err(KirillovError::LengthMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn algebra_matrix(&self, x: &[Fq]) -> Result<MatrixFq, KirillovError> {
        self.check_len(x)?;
        let flat = self.solver.combine(x, self.ambient_size * self.ambient_size);
        Ok(reshape(&MatrixFq::from_rows(&self.ctx, vec![flat])?, self.ambient_size))
    }

    /// Coordinates of a matrix in the span of the basis.
    pub fn algebra_coords(&self, m: &MatrixFq) -> Result<Vec<Fq>, KirillovError> {
        self.solver
            .coords(m.entries())
            .ok_or(KirillovError::NotClosedUnderBracket)
    }

    pub fn group_matrix(&self, x: &[Fq]) -> Result<MatrixFq, KirillovError> {
        Ok(self.algebra_matrix(x)?.exp_nilpotent()?)
    }

    pub fn group_coords(&self, g: &MatrixFq) -> Result<Vec<Fq>, KirillovError> {
        self.algebra_coords(&g.log_unipotent()?)
    }

    pub fn multiply(&self, x: &[Fq], y: &[Fq]) -> Result<Vec<Fq>, KirillovError> {
        let g = self.group_matrix(x)?.mul(&self.group_matrix(y)?)?;
        self.group_coords(&g)
    }

    pub fn inverse(&self, x: &[Fq]) -> Vec<Fq> {
        x.iter().map(|&a| self.ctx.neg(a)).collect()
    }

    pub fn identity(&self) -> Vec<Fq> {
        vec![self.ctx.zero(); self.dim()]
    }

    /// Matrix of `Ad(exp(X))` in the basis, columns indexed by basis elements.
    pub fn ad_matrix(&self, x: &[Fq]) -> Result<MatrixFq, KirillovError> {
        let g = self.group_matrix(x)?;
        let gi = self.group_matrix(&self.inverse(x))?;
        let d = self.dim();
        let mut out = MatrixFq::zeros(&self.ctx, d, d);
        for (j, b) in self.basis.iter().enumerate() {
            let c = self.algebra_coords(&g.mul(b)?.mul(&gi)?)?;
            for (i, v) in c.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// `λ(x) = Σ λ_i x_i`.
    pub fn pairing(&self, lambda: &[Fq], x: &[Fq]) -> Result<Fq, KirillovError> {
        self.check_len(lambda)?;
        self.check_len(x)?;
        let ctx = &self.ctx;
        Ok(lambda
            .iter()
            .zip(x)
            .fold(ctx.zero(), |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b))))
    }

    fn generator_elements(&self) -> Vec<Vec<Fq>> {
        let mut out = Vec::new();
        for &i in &self.lie_generators {
            for c in self.ctx.prime_basis() {
                let mut x = self.identity();
                x[i] = c;
                out.push(x);
            }
        }
        out
    }

    /// Conjugation action on log coordinates.
    pub fn adjoint_action(&self) -> Result<LinearAction, KirillovError> {
        let gens = self
            .generator_elements()
            .iter()
            .map(|x| self.ad_matrix(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LinearAction::new(&self.ctx, self.dim(), &gens))
    }

    /// Coadjoint action on dual coordinates: `λ ↦ Ad(g⁻¹)ᵀ λ`.
    pub fn coadjoint_action(&self) -> Result<LinearAction, KirillovError> {
        let gens = self
            .generator_elements()
            .iter()
            .map(|x| Ok(self.ad_matrix(&self.inverse(x))?.transpose()))
            .collect::<Result<Vec<_>, KirillovError>>()?;
        Ok(LinearAction::new(&self.ctx, self.dim(), &gens))
    }

    /// `g.λ` for a single group element.
    pub fn coadjoint_act(&self, g: &[Fq], lambda: &[Fq]) -> Result<Vec<Fq>, KirillovError> {
        self.check_len(lambda)?;
        Ok(self.ad_matrix(&self.inverse(g))?.transpose().mul_vec(lambda)?)
    }

    /// All coadjoint orbits, ordered by representative.
    pub fn coadjoint_census(&self, budget: u64) -> Result<Vec<CoadjointOrbit>, KirillovError> {
        let q = self.ctx.q();
        let records = self.coadjoint_action()?.orbits(budget, false)?;
        Ok(records
            .into_iter()
            .map(|r| CoadjointOrbit {
                e: even_power_exponent(q, r.size).unwrap_or(u32::MAX),
                representative: r.representative,
                size: r.size,
            })
            .collect())
    }

    pub fn conjugacy_classes(&self, budget: u64) -> Result<Vec<ConjugacyClass>, KirillovError> {
        let records = self.adjoint_action()?.orbits(budget, false)?;
        Ok(records
            .into_iter()
            .map(|r| ConjugacyClass {
                representative: r.representative,
                size: r.size,
            })
            .collect())
    }

    pub fn conjugacy_class_count(&self, budget: u64) -> Result<u64, KirillovError> {
        Ok(self.conjugacy_classes(budget)?.len() as u64)
    }

    /// Per-degree orbit counts.
    pub fn degree_counts(&self, orbits: &[CoadjointOrbit]) -> Vec<DegreeCount> {
        let q = self.ctx.q() as u64;
        let mut by_e: BTreeMap<u32, u64> = BTreeMap::new();
        for o in orbits {
            *by_e.entry(o.e).or_default() += 1;
        }
        by_e
            .into_iter()
            .map(|(e, count)| DegreeCount {
                e,
                degree: q.saturating_pow(e),
                count,
            })
            .collect()
    }

    fn orbit_members(&self, action: &LinearAction, orbit: &CoadjointOrbit) -> Result<Vec<u64>, KirillovError> {
        self.check_len(&orbit.representative)?;
        let members = action.orbit_of(&orbit.representative);
        if members.len() as u64 != orbit.size || action.decode_vec(members[0]) != orbit.representative {
            return Err(KirillovError::OrbitSpecMismatch);
        }
        Ok(members)
    }

    /// Counts `c_a = #{λ ∈ Ω : Tr λ(x) = a}` for each `x` in `points`.
    fn trace_counts(&self, action: &LinearAction, members: &[u64], points: &[Vec<Fq>]) -> Vec<Vec<i128>> {
        let p = self.ctx.p() as usize;
        let d = self.dim();
        let mut out = vec![vec![0i128; p]; points.len()];
        let mut buf = vec![0u32; d];
        let prime = self.ctx.is_prime_field();
        let pts: Vec<Vec<u32>> = points.iter().map(|x| x.iter().map(|v| v.index()).collect()).collect();
        for &m in members {
            action.decode(m, &mut buf);
            for (x, counts) in pts.iter().zip(out.iter_mut()) {
                let a = if prime {
                    let s: u64 = buf.iter().zip(x).map(|(&l, &v)| l as u64 * v as u64).sum();
                    (s % p as u64) as usize
                } else {
                    let lam: Vec<Fq> = buf.iter().map(|&v| Fq(v)).collect();
                    let xf: Vec<Fq> = x.iter().map(|&v| Fq(v)).collect();
                    let val = self.pairing(&lam, &xf).expect("lengths agree");
                    self.ctx.trace(val) as usize
                };
                counts[a] += 1;
            }
        }
        out
    }

    /// `χ_Ω(g) = q^{-e} Σ_{λ∈Ω} θ(λ(log g))`, with `g` given in log coordinates.
    pub fn kirillov_character(&self, orbit: &CoadjointOrbit, g: &[Fq]) -> Result<CyclotomicValue, KirillovError> {
        self.check_len(g)?;
        let action = self.coadjoint_action()?;
        let members = self.orbit_members(&action, orbit)?;
        let counts = self.trace_counts(&action, &members, &[g.to_vec()]);
        let denom = BigInt::from(self.ctx.q()).pow(orbit.e);
        Ok(CyclotomicValue::from_counts(self.ctx.p(), &counts[0], &denom))
    }

    /// `(1/|G|) Σ_g χ_1(g) conj(χ_2(g))`, summed over conjugacy classes.
    pub fn character_inner_product(
        &self,
        a: &CoadjointOrbit,
        b: &CoadjointOrbit,
        budget: u64,
    ) -> Result<BigRational, KirillovError> {
        let classes = self.conjugacy_classes(budget)?;
        let action = self.coadjoint_action()?;
        let reps: Vec<Vec<Fq>> = classes.iter().map(|c| c.representative.clone()).collect();
        let sizes: Vec<u64> = classes.iter().map(|c| c.size).collect();
        let ca = self.trace_counts(&action, &self.orbit_members(&action, a)?, &reps);
        let cb = self.trace_counts(&action, &self.orbit_members(&action, b)?, &reps);
        self.inner_from_counts(&ca, a.e, &cb, b.e, &sizes)
            .ok_or(KirillovError::IrrationalInnerProduct)
    }

    fn inner_from_counts(
        &self,
        ca: &[Vec<i128>],
        ea: u32,
        cb: &[Vec<i128>],
        eb: u32,
        sizes: &[u64],
    ) -> Option<BigRational> {
        let p = self.ctx.p() as usize;
        let mut acc = vec![0i128; p];
        for ((x, y), &sz) in ca.iter().zip(cb).zip(sizes) {
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0 {
                    continue;
                }
                for (j, &yj) in y.iter().enumerate() {
                    acc[(i + p - j) % p] += sz as i128 * xi * yj;
                }
            }
        }
        let q = BigInt::from(self.ctx.q());
        let denom = q.pow(ea + eb) * BigInt::from(self.group_order());
        counts_as_integer(&acc).map(|n| BigRational::new(BigInt::from(n), denom))
    }

    /// Orbit count, class count, sum of squares and orthonormality of the Kirillov characters.
    pub fn verify_orbit_method(&self, budget: u64) -> Result<VerificationReport, KirillovError> {
        let order = space_size(self.ctx.q(), self.dim(), budget)?;
        let orbits = self.coadjoint_census(budget)?;
        let classes = self.conjugacy_classes(budget)?;
        let even = orbits.iter().all(|o| o.e != u32::MAX);
        let sum_sq: u64 = orbits.iter().map(|o| o.size).sum();
        let degree_counts = self.degree_counts(&orbits);

        let action = self.coadjoint_action()?;
        let reps: Vec<Vec<Fq>> = classes.iter().map(|c| c.representative.clone()).collect();
        let sizes: Vec<u64> = classes.iter().map(|c| c.size).collect();
        let nc = classes.len() as u128;
        let no = orbits.len() as u128;
        let exhaustive = order <= EXHAUSTIVE_ORDER
            && (order as u128) * nc * self.dim() as u128 <= EXHAUSTIVE_WORK
            && no * no * nc <= EXHAUSTIVE_WORK;
        let chosen: Vec<usize> = if exhaustive {
            (0..orbits.len()).collect()
        } else {
            let mut per_e: BTreeMap<u32, usize> = BTreeMap::new();
            let mut work = 0u128;
            let mut chosen = Vec::new();
            for (i, o) in orbits.iter().enumerate() {
                let seen = per_e.entry(o.e).or_default();
                let cost = o.size as u128 * nc * self.dim() as u128;
                if *seen == 0 || (*seen < SUBSET_PER_DEGREE && work + cost <= EXHAUSTIVE_WORK) {
                    *seen += 1;
                    work += cost;
                    chosen.push(i);
                }
            }
            chosen
        };
        let counts: Vec<Vec<Vec<i128>>> = chosen
            .iter()
            .map(|&i| {
                let members = self.orbit_members(&action, &orbits[i])?;
                Ok(self.trace_counts(&action, &members, &reps))
            })
            .collect::<Result<_, KirillovError>>()?;
        let mut failures = Vec::new();
        let mut pairs = 0;
        for a in 0..chosen.len() {
            for b in a..chosen.len() {
                pairs += 1;
                let (oa, ob) = (&orbits[chosen[a]], &orbits[chosen[b]]);
                let expect = if a == b { BigRational::one() } else { BigRational::zero() };
                match self.inner_from_counts(&counts[a], oa.e, &counts[b], ob.e, &sizes) {
                    Some(v) if v == expect => {}
                    Some(v) => failures.push((chosen[a], chosen[b], v.to_string())),
                    None => failures.push((chosen[a], chosen[b], "irrational".into())),
                }
            }
        }
        let orthonormality = OrthonormalityReport {
            mode: if exhaustive { OrthoMode::Exhaustive } else { OrthoMode::Subset },
            characters_checked: chosen.len(),
            pairs_checked: pairs,
            ok: failures.is_empty(),
            failures,
        };
        let orbits_equal_classes = orbits.len() == classes.len();
        let sum_of_squares_ok = sum_sq == order;
        let passed = orbits_equal_classes && sum_of_squares_ok && even && orthonormality.ok;
        Ok(VerificationReport {
            dimension: self.dim(),
            group_order: order,
            orbit_count: orbits.len() as u64,
            class_count: classes.len() as u64,
            orbits_equal_classes,
            sum_of_squares: sum_sq,
            sum_of_squares_ok,
            orbit_sizes_even_powers: even,
            orthonormality,
            degree_counts,
            passed,
        })
    }
}

fn reshape(row: &MatrixFq, n: usize) -> MatrixFq {
    let rows = row.entries().chunks(n).map(|c| c.to_vec()).collect();
    MatrixFq::from_rows(row.ctx(), rows).expect("square reshape")
}

fn echelon(ctx: &FieldCtx, mut rows: Vec<Vec<Fq>>, ncols: usize) -> Vec<Vec<Fq>> {
    let r = rref_in_place(ctx, &mut rows, ncols).len();
    rows.truncate(r);
    rows
}

/// Named group families accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedFamily {
    GenHei,
    Hei2(Family),
    HeiA,
    Hei2A,
}

impl FromStr for NamedFamily {
    type Err = RootError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gen-hei" => Ok(NamedFamily::GenHei),
            "hei2-B" => Ok(NamedFamily::Hei2(Family::B)),
            "hei2-C" => Ok(NamedFamily::Hei2(Family::C)),
            "hei2-D" => Ok(NamedFamily::Hei2(Family::D)),
            "hei-A" => Ok(NamedFamily::HeiA),
            "hei2-A" => Ok(NamedFamily::Hei2A),
            _ => Err(RootError::Parse(s.to_string())),
        }
    }
}

impl fmt::Display for NamedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedFamily::GenHei => f.write_str("gen-hei"),
            NamedFamily::Hei2(fam) => write!(f, "hei2-{fam}"),
            NamedFamily::HeiA => f.write_str("hei-A"),
            NamedFamily::Hei2A => f.write_str("hei2-A"),
        }
    }
}

impl NamedFamily {
    /// Builds the group; `n` is the Heisenberg parameter for `hei2-X` (root system
    /// `X_{n+1}`) and the matrix size for the type-A patterns. `gen-hei` needs a form.
    pub fn build(self, ctx: &FieldCtx, n: usize, form: Option<&BilinearForm>) -> Result<UnipotentGroupSpec, KirillovError> {
        match self {
            NamedFamily::GenHei => {
                let zero = BilinearForm::zero(ctx, n);
                UnipotentGroupSpec::from_heisenberg(form.unwrap_or(&zero))
            }
            NamedFamily::Hei2(fam) => {
                let t = RootSystemType::new(fam, n + 1)?;
                UnipotentGroupSpec::from_roots(&t, Subalgebra::Hei2, ctx)
            }
            NamedFamily::HeiA => {
                let t = RootSystemType::new(Family::A, n)?;
                UnipotentGroupSpec::from_roots(&t, Subalgebra::Hei, ctx)
            }
            NamedFamily::Hei2A => {
                let t = RootSystemType::new(Family::A, n)?;
                UnipotentGroupSpec::from_roots(&t, Subalgebra::Hei2Layer, ctx)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{HeisAlgebraElement, HeisFunctional};
    use crate::orbits::DEFAULT_BUDGET;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f5() -> FieldCtx {
        FieldCtx::prime(5).unwrap()
    }

    fn hb(ctx: &FieldCtx) -> BilinearForm {
        BilinearForm::from_ints(ctx, &[vec![0, 1], vec![0, 0]]).unwrap()
    }

    fn random_coords(spec: &UnipotentGroupSpec, rng: &mut ChaCha8Rng) -> Vec<Fq> {
        (0..spec.dim()).map(|_| Fq(rng.gen_range(0..spec.ctx().q()))).collect()
    }

    #[test]
    fn construction_checks() {
        let ctx = f5();
        let e12 = MatrixFq::elementary(&ctx, 3, 3, 0, 1);
        let e23 = MatrixFq::elementary(&ctx, 3, 3, 1, 2);
        assert!(matches!(
            UnipotentGroupSpec::new(&ctx, 3, vec![e12.clone(), e23.clone()]),
            Err(KirillovError::NotClosedUnderBracket)
        ));
        assert!(matches!(
            UnipotentGroupSpec::new(&ctx, 3, vec![e12.clone(), e12.clone()]),
            Err(KirillovError::LinearlyDependent)
        ));
        assert!(matches!(
            UnipotentGroupSpec::new(&ctx, 3, vec![MatrixFq::identity(&ctx, 3)]),
            Err(KirillovError::NotNilpotent(0))
        ));
        let u3 = UnipotentGroupSpec::new(
            &ctx,
            3,
            vec![e12, e23, MatrixFq::elementary(&ctx, 3, 3, 0, 2)],
        )
        .unwrap();
        assert_eq!(u3.nilpotency_class(), 2);
        assert_eq!(u3.associative_index(), 3);
        assert_eq!(u3.lie_generators(), &[0, 1]);
    }

    #[test]
    fn small_characteristic_is_rejected() {
        // U_6 over F_5: products of five root vectors survive.
        let ctx = f5();
        let t = RootSystemType::new(Family::A, 6).unwrap();
        let all = matrices(&t.root_vectors(&ctx));
        assert!(matches!(
            UnipotentGroupSpec::new(&ctx, 6, all),
            Err(KirillovError::CharacteristicTooSmall { p: 5, .. })
        ));
        let hei2_b3 = NamedFamily::Hei2(Family::B).build(&ctx, 2, None).unwrap();
        assert_eq!(hei2_b3.associative_index(), 5);
    }

    #[test]
    fn pairing_matches_trace_form() {
        let ctx = FieldCtx::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = BilinearForm::random(&ctx, 3, 9);
        let spec = UnipotentGroupSpec::from_heisenberg(&b).unwrap();
        let n = b.n();
        for _ in 0..100 {
            let lam = b.random_functional(&mut rng);
            let g = b.random_element(&mut rng);
            let x = HeisAlgebraElement { v: g.v.clone(), t: g.r };
            let mut ml = MatrixFq::zeros(&ctx, n + 2, n + 2);
            for i in 0..n {
                ml.set(i + 1, 0, lam.w[i]);
            }
            ml.set(n + 1, 0, lam.s);
            let tr = ml.mul(&b.algebra_matrix(&x)).unwrap().trace();
            let lc = [lam.w.clone(), vec![lam.s]].concat();
            let xc = [x.v.clone(), vec![x.t]].concat();
            assert_eq!(spec.pairing(&lc, &xc).unwrap(), tr);
            assert_eq!(b.pairing(&lam, &x), tr);
        }
        let ctx = f5();
        let spec = UnipotentGroupSpec::from_heisenberg(&hb(&ctx)).unwrap();
        let t = ctx.from_int(3);
        assert_eq!(spec.pairing(&[Fq(0), Fq(0), Fq(1)], &[Fq(2), Fq(4), t]).unwrap(), t);
        assert_eq!(spec.pairing(&[Fq(1), Fq(0), Fq(0)], &[Fq(2), Fq(3), Fq(0)]).unwrap(), Fq(2));
        assert!(matches!(spec.pairing(&[Fq(1)], &[Fq(2)]), Err(KirillovError::LengthMismatch { .. })));
    }

    #[test]
    fn generic_coadjoint_action_matches_heisenberg_formula() {
        let ctx = FieldCtx::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for seed in 0..3 {
            let b = BilinearForm::random(&ctx, 3, seed);
            let spec = UnipotentGroupSpec::from_heisenberg(&b).unwrap();
            for _ in 0..30 {
                let g = b.random_element(&mut rng);
                let lam = b.random_functional(&mut rng);
                let x = b.log(&g);
                let xc = [x.v.clone(), vec![x.t]].concat();
                let lc = [lam.w.clone(), vec![lam.s]].concat();
                let got = spec.coadjoint_act(&xc, &lc).unwrap();
                let want = b.coadjoint_act(&g, &lam).unwrap();
                assert_eq!(got, [want.w, vec![want.s]].concat());
            }
        }
    }

    #[test]
    fn heisenberg_census_and_classes() {
        let ctx = f5();
        let b = hb(&ctx);
        let spec = UnipotentGroupSpec::from_heisenberg(&b).unwrap();
        let orbits = spec.coadjoint_census(DEFAULT_BUDGET).unwrap();
        let (brute, horbits) = b.enumerate_orbits_brute(DEFAULT_BUDGET).unwrap();
        assert_eq!(orbits.len() as u64, brute.total_orbits);
        for (o, h) in orbits.iter().zip(&horbits) {
            assert_eq!(o.representative, [h.representative.w.clone(), vec![h.representative.s]].concat());
            assert_eq!(o.size, h.size);
        }
        assert_eq!(spec.conjugacy_class_count(DEFAULT_BUDGET).unwrap(), 29);
    }

    #[test]
    fn abelian_group_has_singleton_orbits() {
        let ctx = f5();
        let spec = NamedFamily::GenHei.build(&ctx, 2, Some(&BilinearForm::identity(&ctx, 2))).unwrap();
        let orbits = spec.coadjoint_census(DEFAULT_BUDGET).unwrap();
        assert_eq!(orbits.len(), 125);
        assert!(orbits.iter().all(|o| o.size == 1));
        assert_eq!(spec.conjugacy_class_count(DEFAULT_BUDGET).unwrap(), 125);
    }

    #[test]
    fn character_values() {
        let ctx = f5();
        let b = hb(&ctx);
        let spec = UnipotentGroupSpec::from_heisenberg(&b).unwrap();
        let orbits = spec.coadjoint_census(DEFAULT_BUDGET).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let big = orbits.iter().find(|o| o.representative == vec![Fq(0), Fq(0), Fq(1)]).unwrap();
        assert_eq!(big.size, 25);
        assert_eq!(
            spec.kirillov_character(big, &spec.identity()).unwrap(),
            CyclotomicValue::from_rational(5, BigRational::from_integer(5.into()))
        );
        for _ in 0..30 {
            let g = random_coords(&spec, &mut rng);
            if g[..2].iter().any(|x| !x.is_zero()) {
                assert!(spec.kirillov_character(big, &g).unwrap().is_zero());
            }
        }
        // Degree-one characters: θ(<w, v>), multiplicative.
        for o in orbits.iter().filter(|o| o.size == 1) {
            let lam = HeisFunctional { w: o.representative[..2].to_vec(), s: o.representative[2] };
            for _ in 0..10 {
                let g = random_coords(&spec, &mut rng);
                let h = random_coords(&spec, &mut rng);
                let chi = |x: &[Fq]| spec.kirillov_character(o, x).unwrap();
                let expect = ctx.theta(b.pairing(&lam, &HeisAlgebraElement { v: g[..2].to_vec(), t: Fq(0) }));
                assert_eq!(chi(&g), expect);
                assert_eq!(chi(&spec.multiply(&g, &h).unwrap()), chi(&g).mul(&chi(&h)));
            }
        }
        let bogus = CoadjointOrbit { representative: vec![Fq(0), Fq(0), Fq(1)], size: 5, e: 0 };
        assert_eq!(spec.kirillov_character(&bogus, &spec.identity()), Err(KirillovError::OrbitSpecMismatch));
    }

    #[test]
    fn characters_are_class_functions() {
        let ctx = f5();
        let specs = [
            UnipotentGroupSpec::from_heisenberg(&BilinearForm::random(&ctx, 2, 4)).unwrap(),
            NamedFamily::HeiA.build(&ctx, 4, None).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for spec in &specs {
            let orbits = spec.coadjoint_census(DEFAULT_BUDGET).unwrap();
            let nontrivial: Vec<_> = orbits.iter().filter(|o| o.size > 1).take(3).collect();
            for _ in 0..500 / 6 {
                let g = random_coords(spec, &mut rng);
                let h = random_coords(spec, &mut rng);
                let hg = spec.multiply(&spec.multiply(&h, &g).unwrap(), &spec.inverse(&h)).unwrap();
                for o in &nontrivial {
                    assert_eq!(spec.kirillov_character(o, &g).unwrap(), spec.kirillov_character(o, &hg).unwrap());
                }
            }
        }
    }

    #[test]
    fn inner_products() {
        let ctx = f5();
        let spec = UnipotentGroupSpec::from_heisenberg(&hb(&ctx)).unwrap();
        let orbits = spec.coadjoint_census(DEFAULT_BUDGET).unwrap();
        let one = BigRational::one();
        assert_eq!(spec.character_inner_product(&orbits[0], &orbits[0], DEFAULT_BUDGET).unwrap(), one);
        let last = orbits.last().unwrap();
        assert_eq!(spec.character_inner_product(last, last, DEFAULT_BUDGET).unwrap(), one);
        assert!(spec.character_inner_product(&orbits[0], last, DEFAULT_BUDGET).unwrap().is_zero());
    }

    #[test]
    fn verification_reports() {
        let ctx = f5();
        let spec = UnipotentGroupSpec::from_heisenberg(&hb(&ctx)).unwrap();
        let r = spec.verify_orbit_method(DEFAULT_BUDGET).unwrap();
        assert!(r.passed);
        assert_eq!((r.orbit_count, r.class_count, r.sum_of_squares), (29, 29, 125));
        assert_eq!(r.orthonormality.mode, OrthoMode::Exhaustive);
        assert_eq!(r.orthonormality.pairs_checked, 29 * 30 / 2);

        let line = UnipotentGroupSpec::from_heisenberg(&BilinearForm::zero(&ctx, 0)).unwrap();
        let r = line.verify_orbit_method(DEFAULT_BUDGET).unwrap();
        assert!(r.passed);
        assert_eq!(r.class_count, 5);

        let d3 = NamedFamily::Hei2(Family::D).build(&ctx, 2, None).unwrap();
        let r = d3.verify_orbit_method(DEFAULT_BUDGET).unwrap();
        assert!(r.passed, "{r:?}");
        let counts: Vec<(u64, u64)> = r.degree_counts.iter().map(|d| (d.degree, d.count)).collect();
        assert_eq!(counts, vec![(1, 125), (5, 120), (25, 20)]);
    }

    #[test]
    fn extension_field_heisenberg() {
        let ctx = FieldCtx::new(3, 2).unwrap();
        let b = BilinearForm::standard_symplectic(&ctx, 1);
        let spec = UnipotentGroupSpec::from_heisenberg(&b).unwrap();
        let r = spec.verify_orbit_method(DEFAULT_BUDGET).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.orbit_count, 81 + 8);
    }

    #[test]
    fn named_family_parsing() {
        for s in ["gen-hei", "hei2-B", "hei2-C", "hei2-D", "hei-A", "hei2-A"] {
            assert_eq!(s.parse::<NamedFamily>().unwrap().to_string(), s);
        }
        assert!("hei3".parse::<NamedFamily>().is_err());
    }
}
