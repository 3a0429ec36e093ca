//! Exact univariate polynomials in `q` and in `v = q - 1`, interpolation of censuses across
//! prime powers, and the Isaacs nonnegativity check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::field::{FieldCtx, FieldError};
use crate::heisenberg::{BilinearForm, HeisError};
use crate::mackey::{mackey_census, Hei2Spec, MackeyError};
use crate::roots::Family;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("interpolation with degree bound {bound} needs {needed} points, got {got}")]
    InsufficientPoints { bound: usize, needed: usize, got: usize },
    #[error("abscissa q = {0} appears twice")]
    DuplicateAbscissa(u64),
    #[error("rank of B^T - B drifts across samples: {0:?}")]
    RankDrift(Vec<(u64, usize)>),
    #[error("Gram matrix must be square and nonempty")]
    BadGram,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Heis(#[from] HeisError),
    #[error(transparent)]
    Mackey(#[from] MackeyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Q,
    V,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn trim(mut c: Vec<BigRational>) -> Vec<BigRational> {
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    c
}

/// Substitutes `x = y + shift` into `Σ c_i x^i`.
fn shift(coeffs: &[BigRational], shift: i64) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); coeffs.len()];
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (j, slot) in out.iter_mut().enumerate().take(i + 1) {
            let b = binomial(BigInt::from(i), BigInt::from(j)) * BigInt::from(shift).pow((i - j) as u32);
            *slot += c * BigRational::from_integer(b);
        }
    }
    trim(out)
}

/// Coefficients in `v` of `Σ c_i q^i`, with `q = v + 1`.
pub fn to_v_basis(coeffs_q: &[BigRational]) -> Vec<BigRational> {
    shift(coeffs_q, 1)
}

/// Coefficients in `q` of `Σ c_i v^i`, with `v = q - 1`.
pub fn to_q_basis(coeffs_v: &[BigRational]) -> Vec<BigRational> {
    shift(coeffs_v, -1)
}

/// One polynomial held in both bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VPolynomial {
    pub coeffs_q: Vec<BigRational>,
    pub coeffs_v: Vec<BigRational>,
}

impl VPolynomial {
    pub fn zero() -> Self {
        VPolynomial {
            coeffs_q: Vec::new(),
            coeffs_v: Vec::new(),
        }
    }

    pub fn from_q(coeffs: Vec<BigRational>) -> Self {
        let coeffs_q = trim(coeffs);
        VPolynomial {
            coeffs_v: to_v_basis(&coeffs_q),
            coeffs_q,
        }
    }

    pub fn from_v(coeffs: Vec<BigRational>) -> Self {
        let coeffs_v = trim(coeffs);
        VPolynomial {
            coeffs_q: to_q_basis(&coeffs_v),
            coeffs_v,
        }
    }

    pub fn from_q_ints(coeffs: &[i64]) -> Self {
        Self::from_q(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn from_v_ints(coeffs: &[i64]) -> Self {
        Self::from_v(coeffs.iter().map(|&c| rat(c)).collect())
    }

    /// `c q^e`.
    pub fn monomial_q(c: BigRational, e: usize) -> Self {
        let mut v = vec![BigRational::zero(); e + 1];
        v[e] = c;
        Self::from_q(v)
    }

    /// `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs_q.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs_q.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs_q.len().max(other.coeffs_q.len());
        let get = |c: &[BigRational], i: usize| c.get(i).cloned().unwrap_or_else(BigRational::zero);
        Self::from_q((0..len).map(|i| get(&self.coeffs_q, i) + get(&other.coeffs_q, i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_q(self.coeffs_q.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs_q.len() + other.coeffs_q.len() - 1];
        for (i, a) in self.coeffs_q.iter().enumerate() {
            for (j, b) in other.coeffs_q.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_q(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::from_q_ints(&[1]), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, q: &BigRational) -> BigRational {
        self.coeffs_q
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * q + c)
    }

    pub fn eval_int(&self, q: u64) -> BigRational {
        self.eval(&BigRational::from_integer(BigInt::from(q)))
    }

    pub fn is_integer_in_q(&self) -> bool {
        self.coeffs_q.iter().all(|c| c.is_integer())
    }

    pub fn coeffs(&self, basis: Basis) -> &[BigRational] {
        match basis {
            Basis::Q => &self.coeffs_q,
            Basis::V => &self.coeffs_v,
        }
    }

    /// Serializable view `{"basis": .., "coeffs": [..]}` with exact strings.
    pub fn json(&self, basis: Basis) -> PolyJson<'_> {
        PolyJson { poly: self, basis }
    }

    fn fmt_basis(&self, basis: Basis, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = match basis {
            Basis::Q => "q",
            Basis::V => "v",
        };
        let c = self.coeffs(basis);
        if c.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, x) in c.iter().enumerate().rev() {
            if x.is_zero() {
                continue;
            }
            let mag = x.abs();
            if first {
                if x.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if x.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "{var}")?,
                (1, false) => write!(f, "{mag}{var}")?,
                (_, true) => write!(f, "{var}^{i}")?,
                (_, false) => write!(f, "{mag}{var}^{i}")?,
            }
        }
        Ok(())
    }

    pub fn display(&self, basis: Basis) -> String {
        struct D<'a>(&'a VPolynomial, Basis);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_basis(self.1, f)
            }
        }
        D(self, basis).to_string()
    }
}

pub struct PolyJson<'a> {
    poly: &'a VPolynomial,
    basis: Basis,
}

impl Serialize for PolyJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coeffs: Vec<String> = self.poly.coeffs(self.basis).iter().map(|c| c.to_string()).collect();
        let mut st = s.serialize_struct("Polynomial", 2)?;
        st.serialize_field("basis", &self.basis)?;
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

/// Serializes as both bases.
impl Serialize for VPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("VPolynomial", 2)?;
        st.serialize_field("q", &self.json(Basis::Q))?;
        st.serialize_field("v", &self.json(Basis::V))?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplePoint {
    pub q: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolyWarning {
    Overfit { q: u64, expected: String, observed: u64 },
    NonIntegerCoefficients,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Interpolation {
    pub poly: VPolynomial,
    pub warnings: Vec<PolyWarning>,
}

/// Lagrange interpolation through the first `degree_bound + 1` points; the rest are held out.
pub fn interpolate(points: &[SamplePoint], degree_bound: usize) -> Result<Interpolation, PolyError> {
    let needed = degree_bound + 1;
    if points.len() < needed {
        return Err(PolyError::InsufficientPoints {
            bound: degree_bound,
            needed,
            got: points.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for p in points {
        if !seen.insert(p.q) {
            return Err(PolyError::DuplicateAbscissa(p.q));
        }
    }
    let (fit, held) = points.split_at(needed);
    let mut poly = VPolynomial::zero();
    for (i, pi) in fit.iter().enumerate() {
        let mut basis = VPolynomial::from_q_ints(&[1]);
        let mut denom = BigRational::one();
        for (j, pj) in fit.iter().enumerate() {
            if i != j {
                basis = basis.mul(&VPolynomial::from_q(vec![rat(-(pj.q as i64)), rat(1)]));
                denom *= rat(pi.q as i64 - pj.q as i64);
            }
        }
        poly = poly.add(&basis.scale(&(BigRational::from_integer(pi.count.into()) / denom)));
    }
    let mut warnings = Vec::new();
    for p in held {
        let expected = poly.eval_int(p.q);
        if expected != BigRational::from_integer(p.count.into()) {
            warnings.push(PolyWarning::Overfit {
                q: p.q,
                expected: expected.to_string(),
                observed: p.count,
            });
        }
    }
    if !poly.is_integer_in_q() {
        warnings.push(PolyWarning::NonIntegerCoefficients);
    }
    Ok(Interpolation { poly, warnings })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsaacsResult {
    pub pass: bool,
    /// First `v`-coefficient (by degree) that is negative or non-integer.
    pub witness: Option<(usize, String)>,
}

pub fn isaacs_check(p: &VPolynomial) -> IsaacsResult {
    let witness = p
        .coeffs_v
        .iter()
        .enumerate()
        .find(|(_, c)| !c.is_integer() || c.is_negative())
        .map(|(i, c)| (i, c.to_string()));
    IsaacsResult {
        pass: witness.is_none(),
        witness,
    }
}

fn frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn v_times_shift(shift_pow: usize, coeffs_v_from: &[(usize, BigRational)]) -> VPolynomial {
    let q = VPolynomial::from_q_ints(&[0, 1]);
    let mut inner = vec![BigRational::zero(); 8];
    for (i, c) in coeffs_v_from {
        inner[*i] = c.clone();
    }
    q.pow(shift_pow as u32).mul(&VPolynomial::from_v(inner))
}

fn q_terms(terms: &[(usize, BigRational)]) -> VPolynomial {
    terms
        .iter()
        .fold(VPolynomial::zero(), |acc, (e, c)| acc.add(&VPolynomial::monomial_q(c.clone(), *e)))
}

/// `O_3` for type `A_{n-1}` as printed in the `q`-basis.
pub fn a_type_o3_q_form(n: i64) -> VPolynomial {
    let u = n as usize;
    q_terms(&[
        (u + 1, rat(n - 7)),
        (u, rat(n * n - 14 * n + 52)),
        (u - 1, frac(n.pow(3) - 30 * n * n + 293 * n - 906, 6)),
        (u - 2, -frac(n.pow(3) - 21 * n * n + 164 * n - 446, 2)),
        (u - 3, frac(n.pow(3) - 21 * n * n + 150 * n - 370, 2)),
        (u - 4, -frac(n.pow(3) - 27 * n * n + 206 * n - 498, 6)),
        (u - 5, -frac(n * n - 11 * n + 30, 2)),
    ])
}

/// `O_3` for type `A_{n-1}` as printed in the factored `v`-basis.
pub fn a_type_o3_v_form(n: i64) -> VPolynomial {
    v_times_shift(
        n as usize - 5,
        &[
            (6, rat(n - 7)),
            (5, rat(n * n - 8 * n + 10)),
            (4, frac(n.pow(3) - 37 * n + 24, 6)),
            (3, frac(n.pow(3) + 3 * n * n - 40 * n - 6, 6)),
        ],
    )
}

/// `O_3` for type `B_n` as printed in the `q`-basis.
pub fn b_type_o3_q_form(n: i64) -> VPolynomial {
    let u = n as usize;
    q_terms(&[
        (u + 3, rat(1)),
        (u + 2, rat(2 * n - 11)),
        (u + 1, rat(n * n - 12 * n + 39)),
        (u, frac(n.pow(3) - 24 * n * n + 185 * n - 300, 6)),
        (u - 1, -frac(n.pow(3) - 15 * n * n + 88 * n - 176, 2)),
        (u - 2, frac(n.pow(3) - 15 * n * n + 76 * n - 130, 2)),
        (u - 3, -frac(n.pow(3) - 21 * n * n + 110 * n - 174, 6)),
        (u - 4, -frac(n * n - 7 * n + 12, 2)),
    ])
}

/// `O_3` for type `B_n` as printed in the factored `v`-basis.
pub fn b_type_o3_v_form(n: i64) -> VPolynomial {
    v_times_shift(
        n as usize - 4,
        &[
            (7, rat(1)),
            (6, rat(2 * n - 4)),
            (5, rat(n * n - 6)),
            (4, frac(n.pow(3) + 6 * n * n + 5 * n - 60, 6)),
            (3, frac(n.pow(3) + 9 * n * n - 4 * n - 42, 6)),
            (2, rat(n * n + n - 5)),
            (1, rat(n - 1)),
        ],
    )
}

pub fn f4_o4() -> VPolynomial {
    VPolynomial::from_v_ints(&[0, 2, 24, 66, 79, 58, 28, 8, 1])
}

pub fn e7_o13() -> VPolynomial {
    VPolynomial::from_v_ints(&[0, 0, 3, 28, 68, 63, 24, 3])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReferenceEntry {
    pub name: String,
    pub n: Option<i64>,
    /// `q`-form equals `v`-form; `None` when only one form is printed.
    pub identity_holds: Option<bool>,
    /// `q`-form minus `v`-form, when nonzero.
    pub difference: Option<VPolynomial>,
    pub isaacs: IsaacsResult,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReferenceReport {
    pub entries: Vec<ReferenceEntry>,
    pub passed: bool,
}

fn identity_entry(name: &str, n: i64, q_form: VPolynomial, v_form: VPolynomial) -> ReferenceEntry {
    let diff = q_form.sub(&v_form);
    let isaacs = isaacs_check(&v_form);
    let holds = diff.is_zero();
    ReferenceEntry {
        name: name.to_string(),
        n: Some(n),
        identity_holds: Some(holds),
        difference: (!holds).then_some(diff),
        passed: holds && isaacs.pass,
        isaacs,
    }
}

fn single_entry(name: &str, p: VPolynomial) -> ReferenceEntry {
    let isaacs = isaacs_check(&p);
    ReferenceEntry {
        name: name.to_string(),
        n: None,
        identity_holds: None,
        difference: None,
        passed: isaacs.pass,
        isaacs,
    }
}

/// The printed `O_3` identities for `n = 7..=12` and the printed `F_4`, `E_7` polynomials.
pub fn verify_reference_polynomials() -> ReferenceReport {
    let mut entries = Vec::new();
    for n in 7..=12 {
        entries.push(identity_entry("A-type O3", n, a_type_o3_q_form(n), a_type_o3_v_form(n)));
    }
    for n in 7..=12 {
        entries.push(identity_entry("B-type O3", n, b_type_o3_q_form(n), b_type_o3_v_form(n)));
    }
    entries.push(single_entry("F4 O4", f4_o4()));
    entries.push(single_entry("E7 O13", e7_o13()));
    ReferenceReport {
        passed: entries.iter().all(|e| e.passed),
        entries,
    }
}

/// A family of groups whose character census is computed at each sampled `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CensusFamily {
    /// `H_β` with an integer Gram matrix reduced mod `p`.
    GenHeisenberg { gram: Vec<Vec<i64>> },
    Hei2 { family: Family, n: usize },
}

impl CensusFamily {
    pub fn degree_bound(&self) -> usize {
        match self {
            CensusFamily::GenHeisenberg { gram } => gram.len() + 1,
            CensusFamily::Hei2 { family, n } => {
                let k = if *family == Family::D { 2 * n } else { 2 * n + 1 };
                2 * k - 2
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CensusFamily::GenHeisenberg { gram } => format!("gen-hei n={} gram={gram:?}", gram.len()),
            CensusFamily::Hei2 { family, n } => format!("hei2-{family} n={n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyRow {
    pub e: u32,
    pub samples: Vec<SamplePoint>,
    pub poly: VPolynomial,
    pub display_q: String,
    pub display_v: String,
    pub warnings: Vec<PolyWarning>,
    pub isaacs: IsaacsResult,
    /// Agreement with the closed form, where one is known.
    pub symbolic_match: Option<bool>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyIsaacsReport {
    pub family: String,
    pub qs: Vec<u64>,
    pub degree_bound: usize,
    /// `rk(B^T - B)` at each sample, for gen-Heisenberg families.
    pub rank: Option<usize>,
    pub rows: Vec<FamilyRow>,
    pub passed: bool,
}

/// Census `e ↦ count` at one `q`, plus the antisymmetric rank for gen-Heisenberg.
fn census_at(family: &CensusFamily, q: u64, budget: u64) -> Result<(BTreeMap<u32, u64>, Option<usize>), PolyError> {
    let ctx: FieldCtx = q.to_string().parse()?;
    match family {
        CensusFamily::GenHeisenberg { gram } => {
            if gram.is_empty() || gram.iter().any(|r| r.len() != gram.len()) {
                return Err(PolyError::BadGram);
            }
            let form = BilinearForm::from_ints(&ctx, gram)?;
            let (census, _) = form.enumerate_orbits_brute(budget)?;
            let rows = census.rows.iter().map(|r| (r.e, r.count)).collect();
            Ok((rows, Some(form.antisymmetric_rank())))
        }
        CensusFamily::Hei2 { family, n } => {
            let spec = Hei2Spec::new(*family, *n, &ctx)?;
            let census = mackey_census(&spec, budget)?;
            let rows = census.computed_rows.iter().map(|r| (r.e, r.count)).collect();
            Ok((rows, None))
        }
    }
}

/// Closed forms `q^n` (e = 0) and `(q-1) q^{n-rk}` (e = rk/2) for `H_β`.
fn gen_hei_closed_form(n: usize, rk: usize, e: u32) -> Option<VPolynomial> {
    if rk == 0 {
        return (e == 0).then(|| VPolynomial::monomial_q(rat(1), n + 1));
    }
    if e == 0 {
        Some(VPolynomial::monomial_q(rat(1), n))
    } else if e as usize * 2 == rk {
        Some(VPolynomial::from_q_ints(&[-1, 1]).mul(&VPolynomial::monomial_q(rat(1), n - rk)))
    } else {
        None
    }
}

/// Interpolates each degree-exponent row of the census over `qs` and checks it in the `v`-basis.
pub fn family_isaacs(family: &CensusFamily, qs: &[u64], budget: u64) -> Result<FamilyIsaacsReport, PolyError> {
    let samples: Vec<(BTreeMap<u32, u64>, Option<usize>)> = qs
        .par_iter()
        .map(|&q| census_at(family, q, budget))
        .collect::<Result<_, _>>()?;
    let ranks: Vec<(u64, usize)> = qs
        .iter()
        .zip(&samples)
        .filter_map(|(&q, (_, r))| r.map(|r| (q, r)))
        .collect();
    if ranks.windows(2).any(|w| w[0].1 != w[1].1) {
        return Err(PolyError::RankDrift(ranks));
    }
    let rank = ranks.first().map(|r| r.1);
    let es: BTreeSet<u32> = samples.iter().flat_map(|(m, _)| m.keys().copied()).collect();
    let bound = family.degree_bound();
    let mut rows = Vec::new();
    for e in es {
        let points: Vec<SamplePoint> = qs
            .iter()
            .zip(&samples)
            .map(|(&q, (m, _))| SamplePoint {
                q,
                count: m.get(&e).copied().unwrap_or(0),
            })
            .collect();
        let interp = interpolate(&points, bound)?;
        let isaacs = isaacs_check(&interp.poly);
        let symbolic_match = match (family, rank) {
            (CensusFamily::GenHeisenberg { gram }, Some(rk)) => {
                gen_hei_closed_form(gram.len(), rk, e).map(|p| p == interp.poly)
            }
            _ => None,
        };
        rows.push(FamilyRow {
            e,
            display_q: interp.poly.display(Basis::Q),
            display_v: interp.poly.display(Basis::V),
            passed: isaacs.pass && interp.warnings.is_empty() && symbolic_match != Some(false),
            samples: points,
            poly: interp.poly,
            warnings: interp.warnings,
            isaacs,
            symbolic_match,
        });
    }
    Ok(FamilyIsaacsReport {
        family: family.label(),
        qs: qs.to_vec(),
        degree_bound: bound,
        rank,
        passed: rows.iter().all(|r| r.passed),
        rows,
    })
}

/// The smallest `count` prime powers whose characteristic exceeds `min_char`.
pub fn prime_powers_above(min_char: u64, count: usize) -> Vec<u64> {
    (2u64..)
        .filter(|&q| crate::field::prime_power(q).is_some_and(|(p, k)| p > min_char && FieldCtx::new(p, k).is_ok()))
        .take(count)
        .collect()
}
