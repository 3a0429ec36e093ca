//! Positive roots of types A, B, C, D, their root vectors in the classical matrix algebras,
//! and the Heisenberg-type subalgebras spanned by selected root vectors.
//!
//! Matrix rows and columns carry the labels `1..n` (type A), `1..n, -n..-1` (C, D) or
//! `1..n, 0, -n..-1` (B), in that positional order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, Fq};
use crate::linalg::{LinalgError, MatrixFq, SpanSolver};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("root {root} is not a positive root of {family}{n}")]
    InvalidRootForFamily { root: String, family: Family, n: usize },
    #[error("{name} is not defined for type {family}")]
    FamilyMismatch { name: &'static str, family: Family },
    #[error("rank {n} is too small for type {family} (need n >= 2)")]
    RankTooSmall { family: Family, n: usize },
    #[error("span of {0} is not closed under the bracket")]
    NotASubalgebra(&'static str),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = RootError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            _ => Err(RootError::Parse(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootSystemType {
    pub family: Family,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootKind {
    EpsMinus,
    EpsPlus,
    Eps,
    TwoEps,
}

/// `ε_i - ε_j`, `ε_i + ε_j`, `ε_i` or `2ε_i`; `j` is 0 for the last two kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Root {
    pub kind: RootKind,
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn eps_minus(i: usize, j: usize) -> Self {
        Root { kind: RootKind::EpsMinus, i, j }
    }

    pub fn eps_plus(i: usize, j: usize) -> Self {
        Root { kind: RootKind::EpsPlus, i, j }
    }

    pub fn eps(i: usize) -> Self {
        Root { kind: RootKind::Eps, i, j: 0 }
    }

    pub fn two_eps(i: usize) -> Self {
        Root { kind: RootKind::TwoEps, i, j: 0 }
    }

    /// `(row, col)`: `row(ε_i ∓ ε_j) = ±j`, `row(ε_i) = 0`, `row(2ε_i) = -i`, `col = i`.
    pub fn row_col(&self) -> (i64, i64) {
        let (i, j) = (self.i as i64, self.j as i64);
        let row = match self.kind {
            RootKind::EpsMinus => j,
            RootKind::EpsPlus => -j,
            RootKind::Eps => 0,
            RootKind::TwoEps => -i,
        };
        (row, i)
    }

    pub fn col(&self) -> usize {
        self.i
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RootKind::EpsMinus => write!(f, "e{}-e{}", self.i, self.j),
            RootKind::EpsPlus => write!(f, "e{}+e{}", self.i, self.j),
            RootKind::Eps => write!(f, "e{}", self.i),
            RootKind::TwoEps => write!(f, "2e{}", self.i),
        }
    }
}

impl FromStr for Root {
    type Err = RootError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RootError::Parse(s.to_string());
        let idx = |t: &str| t.strip_prefix('e').and_then(|x| x.parse::<usize>().ok()).ok_or_else(err);
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("2e") {
            return rest.parse().map(Root::two_eps).map_err(|_| err());
        }
        if let Some((a, b)) = s.split_once('-') {
            return Ok(Root::eps_minus(idx(a)?, idx(b)?));
        }
        if let Some((a, b)) = s.split_once('+') {
            return Ok(Root::eps_plus(idx(a)?, idx(b)?));
        }
        idx(s).map(Root::eps)
    }
}

impl Serialize for Root {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootVector {
    pub root: Root,
    pub matrix: MatrixFq,
}

/// Named subalgebras of the nilradical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subalgebra {
    /// First row and last column (type A).
    Hei,
    /// First two rows and last two columns (type A).
    Hei2Layer,
    /// Roots in columns 1 and 2 (types B, C, D).
    Hei2,
}

impl Subalgebra {
    fn name(self) -> &'static str {
        match self {
            Subalgebra::Hei => "hei_n",
            Subalgebra::Hei2Layer => "hei_n2",
            Subalgebra::Hei2 => "hei2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealCheck {
    pub is_subalgebra: bool,
    pub is_abelian: bool,
    pub is_ideal: bool,
    /// First pair of basis roots with a nonzero bracket, and that bracket.
    pub witness: Option<(Root, Root, MatrixFq)>,
}

impl RootSystemType {
    pub fn new(family: Family, n: usize) -> Result<Self, RootError> {
        if n < 2 {
            return Err(RootError::RankTooSmall { family, n });
        }
        Ok(RootSystemType { family, n })
    }

    pub fn ambient_size(&self) -> usize {
        match self.family {
            Family::A => self.n,
            Family::B => 2 * self.n + 1,
            Family::C | Family::D => 2 * self.n,
        }
    }

    /// Matrix position of a row/column label.
    pub fn position(&self, label: i64) -> usize {
        let n = self.n as i64;
        let size = self.ambient_size() as i64;
        let pos = match label {
            l if l > 0 => l - 1,
            0 => {
                assert_eq!(self.family, Family::B, "label 0 exists only in type B");
                n
            }
            l => size + l,
        };
        assert!(pos >= 0 && pos < size, "label {label} out of range");
        pos as usize
    }

    pub fn contains(&self, root: &Root) -> bool {
        let n = self.n;
        let pair_ok = 1 <= root.i && root.i < root.j && root.j <= n;
        let single_ok = 1 <= root.i && root.i <= n && root.j == 0;
        match (self.family, root.kind) {
            (_, RootKind::EpsMinus) => pair_ok,
            (Family::A, _) => false,
            (_, RootKind::EpsPlus) => pair_ok,
            (Family::B, RootKind::Eps) => single_ok,
            (Family::C, RootKind::TwoEps) => single_ok,
            _ => false,
        }
    }

    /// All positive roots, ordered by column and then by row position.
    pub fn positive_roots(&self) -> Vec<Root> {
        let n = self.n;
        let mut roots = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                roots.push(Root::eps_minus(i, j));
                if self.family != Family::A {
                    roots.push(Root::eps_plus(i, j));
                }
            }
            match self.family {
                Family::B => roots.push(Root::eps(i)),
                Family::C => roots.push(Root::two_eps(i)),
                _ => {}
            }
        }
        roots.sort_by_key(|r| {
            let (row, col) = r.row_col();
            (col, self.position(row))
        });
        roots
    }

    /// Gram matrix of the invariant form (identity for type A, which has none).
    pub fn form_matrix(&self, ctx: &FieldCtx) -> MatrixFq {
        let size = self.ambient_size();
        if self.family == Family::A {
            return MatrixFq::identity(ctx, size);
        }
        let mut j = MatrixFq::zeros(ctx, size, size);
        for i in 1..=self.n as i64 {
            let (a, b) = (self.position(i), self.position(-i));
            j.set(a, b, ctx.one());
            let sign = if self.family == Family::C { ctx.from_int(-1) } else { ctx.one() };
            j.set(b, a, sign);
        }
        if self.family == Family::B {
            let z = self.position(0);
            j.set(z, z, ctx.one());
        }
        j
    }

    /// `β(xu, v) + β(u, xv) = 0` for all basis vectors, i.e. `xᵀJ + Jx = 0`.
    pub fn in_classical_algebra(&self, x: &MatrixFq) -> bool {
        if self.family == Family::A {
            return x.trace().is_zero();
        }
        let j = self.form_matrix(x.ctx());
        let lhs = x.transpose().mul(&j).and_then(|a| a.add(&j.mul(x)?));
        lhs.map(|m| m.is_zero()).unwrap_or(false)
    }

    fn unit(&self, ctx: &FieldCtx, row: i64, col: i64) -> MatrixFq {
        let s = self.ambient_size();
        MatrixFq::elementary(ctx, s, s, self.position(row), self.position(col))
    }

    pub fn root_vector(&self, root: Root, ctx: &FieldCtx) -> Result<RootVector, RootError> {
        if !self.contains(&root) {
            return Err(RootError::InvalidRootForFamily {
                root: root.to_string(),
                family: self.family,
                n: self.n,
            });
        }
        let (i, j) = (root.i as i64, root.j as i64);
        let e = |r, c| self.unit(ctx, r, c);
        let matrix = match (self.family, root.kind) {
            (Family::A, _) => e(i, j),
            (_, RootKind::EpsMinus) => e(i, j).sub(&e(-j, -i))?,
            (Family::C, RootKind::EpsPlus) => e(i, -j).add(&e(j, -i))?,
            (_, RootKind::EpsPlus) => e(i, -j).sub(&e(j, -i))?,
            (_, RootKind::Eps) => e(i, 0).sub(&e(0, -i))?,
            (_, RootKind::TwoEps) => e(i, -i),
        };
        Ok(RootVector { root, matrix })
    }

    pub fn root_vectors(&self, ctx: &FieldCtx) -> Vec<RootVector> {
        self.positive_roots()
            .into_iter()
            .map(|r| self.root_vector(r, ctx).expect("positive roots are valid"))
            .collect()
    }

    /// Roots with the given columns, in canonical order.
    pub fn column_roots(&self, cols: &[usize]) -> Vec<Root> {
        self.positive_roots()
            .into_iter()
            .filter(|r| cols.contains(&r.col()))
            .collect()
    }

    pub fn subalgebra_roots(&self, name: Subalgebra) -> Result<Vec<Root>, RootError> {
        let n = self.n;
        let mismatch = || RootError::FamilyMismatch {
            name: name.name(),
            family: self.family,
        };
        match name {
            Subalgebra::Hei | Subalgebra::Hei2Layer => {
                if self.family != Family::A {
                    return Err(mismatch());
                }
                let layers = if name == Subalgebra::Hei { 1 } else { 2 };
                Ok(self
                    .positive_roots()
                    .into_iter()
                    .filter(|r| r.i <= layers || r.j + layers > n)
                    .collect())
            }
            Subalgebra::Hei2 => {
                if self.family == Family::A {
                    return Err(mismatch());
                }
                Ok(self.column_roots(&[1, 2]))
            }
        }
    }

    /// Root vectors spanning the named subalgebra; bracket closure is verified.
    pub fn subalgebra_basis(&self, name: Subalgebra, ctx: &FieldCtx) -> Result<Vec<RootVector>, RootError> {
        let basis: Vec<RootVector> = self
            .subalgebra_roots(name)?
            .into_iter()
            .map(|r| self.root_vector(r, ctx))
            .collect::<Result<_, _>>()?;
        if !abelian_ideal_check(ctx, &basis, &basis)?.is_subalgebra {
            return Err(RootError::NotASubalgebra(name.name()));
        }
        Ok(basis)
    }
}

/// Bracket closure, commutativity and ideal property of `span(sub)` inside `span(ambient)`.
pub fn abelian_ideal_check(
    ctx: &FieldCtx,
    sub: &[RootVector],
    ambient: &[RootVector],
) -> Result<IdealCheck, RootError> {
    let mats: Vec<MatrixFq> = sub.iter().map(|r| r.matrix.clone()).collect();
    let solver = SpanSolver::from_matrices(ctx, &mats)?;
    let mut is_subalgebra = true;
    let mut witness = None;
    for (a, x) in sub.iter().enumerate() {
        for y in &sub[a + 1..] {
            let c = x.matrix.commutator(&y.matrix)?;
            if c.is_zero() {
                continue;
            }
            if witness.is_none() {
                witness = Some((x.root, y.root, c.clone()));
            }
            if !solver.contains(c.entries()) {
                is_subalgebra = false;
            }
        }
    }
    let mut is_ideal = true;
    'outer: for z in ambient {
        for x in sub {
            let c = z.matrix.commutator(&x.matrix)?;
            if !solver.contains(c.entries()) {
                is_ideal = false;
                break 'outer;
            }
        }
    }
    Ok(IdealCheck {
        is_subalgebra,
        is_abelian: witness.is_none(),
        is_ideal,
        witness,
    })
}

/// Matrices of the given root vectors.
pub fn matrices(vectors: &[RootVector]) -> Vec<MatrixFq> {
    vectors.iter().map(|v| v.matrix.clone()).collect()
}

/// Entry of `m` at labelled position `(row, col)`.
pub fn labelled_entry(t: &RootSystemType, m: &MatrixFq, row: i64, col: i64) -> Fq {
    m.get(t.position(row), t.position(col))
}
