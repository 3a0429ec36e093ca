//! Dense matrices over `F_q`: products, elimination, and exp/log of nilpotent matrices.

use std::fmt;

use thiserror::Error;

use crate::field::{ElementRepr, FieldCtx, FieldError, Fq};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrices belong to different fields")]
    ContextMismatch,
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("characteristic {p} too small for nilpotency index {index}")]
    CharacteristicTooSmall { p: u32, index: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("vectors are linearly dependent")]
    LinearlyDependent,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct MatrixFq {
    rows: usize,
    cols: usize,
    data: Vec<Fq>,
    ctx: FieldCtx,
}

impl fmt::Debug for MatrixFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixFq {}x{} over F_{}", self.rows, self.cols, self.ctx)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Result of Gaussian elimination on a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankInfo {
    pub rank: usize,
    /// Basis of the column space, in reduced echelon form.
    pub image_basis: Vec<Vec<Fq>>,
    /// Basis of the right kernel `{x : A x = 0}`, one vector per free column.
    pub kernel_basis: Vec<Vec<Fq>>,
}

/// Reduced row-echelon form of `rows` in place; returns the pivot columns.
pub fn rref_in_place(ctx: &FieldCtx, rows: &mut [Vec<Fq>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = ctx.inv(rows[r][c]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = ctx.mul(*x, inv);
        }
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot).take(ncols) {
                    *x = ctx.sub(*x, ctx.mul(f, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Coordinates with respect to a fixed linearly independent family of vectors.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    ctx: FieldCtx,
    vectors: Vec<Vec<Fq>>,
    pivots: Vec<usize>,
    /// Inverse of the matrix `M[j][i] = vectors[i][pivots[j]]`.
    solve: MatrixFq,
}

impl SpanSolver {
    pub fn new(ctx: &FieldCtx, vectors: Vec<Vec<Fq>>, len: usize) -> Result<Self, LinalgError> {
        if vectors.iter().any(|v| v.len() != len) {
            return Err(LinalgError::ShapeMismatch("vectors of unequal length".into()));
        }
        let mut rows = vectors.clone();
        let pivots = rref_in_place(ctx, &mut rows, len);
        if pivots.len() < vectors.len() {
            return Err(LinalgError::LinearlyDependent);
        }
        let d = vectors.len();
        let mut pt = MatrixFq::zeros(ctx, d, d);
        for (i, v) in vectors.iter().enumerate() {
            for (j, &pc) in pivots.iter().enumerate() {
                pt.set(j, i, v[pc]);
            }
        }
        let solve = if d == 0 { pt } else { pt.inverse()? };
        Ok(SpanSolver {
            ctx: ctx.clone(),
            vectors,
            pivots,
            solve,
        })
    }

    pub fn from_matrices(ctx: &FieldCtx, mats: &[MatrixFq]) -> Result<Self, LinalgError> {
        let len = mats.first().map_or(0, |m| m.rows() * m.cols());
        Self::new(ctx, mats.iter().map(|m| m.entries().to_vec()).collect(), len)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Coordinates of `v`, assuming it lies in the span.
    pub fn coords_unchecked(&self, v: &[Fq]) -> Vec<Fq> {
        let rhs: Vec<Fq> = self.pivots.iter().map(|&p| v[p]).collect();
        if rhs.is_empty() {
            return rhs;
        }
        self.solve.mul_vec(&rhs).expect("sizes agree")
    }

    /// Coordinates of `v`, or `None` if `v` is outside the span.
    pub fn coords(&self, v: &[Fq]) -> Option<Vec<Fq>> {
        let c = self.coords_unchecked(v);
        (self.combine(&c, v.len()) == v).then_some(c)
    }

    pub fn combine(&self, c: &[Fq], len: usize) -> Vec<Fq> {
        let ctx = &self.ctx;
        let mut out = vec![ctx.zero(); len];
        for (ci, vec) in c.iter().zip(&self.vectors) {
            if ci.is_zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(vec) {
                *o = ctx.add(*o, ctx.mul(*ci, x));
            }
        }
        out
    }

    pub fn contains(&self, v: &[Fq]) -> bool {
        self.coords(v).is_some()
    }
}

impl MatrixFq {
    pub fn zeros(ctx: &FieldCtx, rows: usize, cols: usize) -> Self {
        MatrixFq {
            rows,
            cols,
            data: vec![Fq::ZERO; rows * cols],
            ctx: ctx.clone(),
        }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    /// `E_{i,j}` (0-based indices).
    pub fn elementary(ctx: &FieldCtx, rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(ctx, rows, cols);
        m.set(i, j, ctx.one());
        m
    }

    pub fn from_rows(ctx: &FieldCtx, rows: Vec<Vec<Fq>>) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(LinalgError::ShapeMismatch("ragged rows".into()));
        }
        for x in rows.iter().flatten() {
            ctx.element(x.index())?;
        }
        Ok(MatrixFq {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
            ctx: ctx.clone(),
        })
    }

    /// Integer entries reduced into the prime field.
    pub fn from_ints(ctx: &FieldCtx, rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| ctx.from_int(x)).collect())
            .collect();
        Self::from_rows(ctx, rows)
    }

    pub fn from_repr(ctx: &FieldCtx, rows: &[Vec<ElementRepr>]) -> Result<Self, LinalgError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_field(ctx)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(ctx, rows)
    }

    pub fn to_repr(&self) -> Vec<Vec<ElementRepr>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|&x| self.ctx.to_json_value(x)).collect())
            .collect()
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fq) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Fq] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    fn check_ctx(&self, other: &Self) -> Result<(), LinalgError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(LinalgError::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_ctx(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.ctx.add(a, b))
            .collect();
        Ok(MatrixFq { data, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|x| self.ctx.neg(x))
    }

    pub fn scalar_mul(&self, c: Fq) -> Self {
        self.map(|x| self.ctx.mul(c, x))
    }

    fn map(&self, f: impl Fn(Fq) -> Fq) -> Self {
        MatrixFq {
            data: self.data.iter().map(|&x| f(x)).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_ctx(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ctx = &self.ctx;
        let mut out = Self::zeros(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j);
                        out.set(i, j, ctx.add(cur, ctx.mul(a, b)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `A · x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[Fq]) -> Result<Vec<Fq>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} * vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let ctx = &self.ctx;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(ctx.zero(), |acc, (&a, &b)| ctx.add(acc, ctx.mul(a, b)))
            })
            .collect())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> Fq {
        (0..self.rows.min(self.cols)).fold(self.ctx.zero(), |acc, i| self.ctx.add(acc, self.get(i, i)))
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self, LinalgError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<Fq>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        rref_in_place(&self.ctx, &mut rows, self.cols).len()
    }

    /// Rank, canonical column-space basis and canonical kernel basis.
    pub fn rank_image_kernel(&self) -> RankInfo {
        let ctx = &self.ctx;
        let mut rows: Vec<Vec<Fq>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let pivots = rref_in_place(ctx, &mut rows, self.cols);
        let rank = pivots.len();
        let mut kernel_basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![ctx.zero(); self.cols];
            v[free] = ctx.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = ctx.neg(rows[r][free]);
            }
            kernel_basis.push(v);
        }
        let t = self.transpose();
        let mut trows: Vec<Vec<Fq>> = (0..t.rows).map(|i| t.row(i).to_vec()).collect();
        let tp = rref_in_place(ctx, &mut trows, t.cols);
        trows.truncate(tp.len());
        RankInfo {
            rank,
            image_basis: trows,
            kernel_basis,
        }
    }

    /// `Bᵀ - B`.
    pub fn antisymmetrize(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::ShapeMismatch("antisymmetrize needs a square matrix".into()));
        }
        self.transpose().sub(self)
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let ctx = &self.ctx;
        let mut rows: Vec<Vec<Fq>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| if i == j { ctx.one() } else { ctx.zero() }));
                r
            })
            .collect();
        let pivots = rref_in_place(ctx, &mut rows, 2 * n);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(LinalgError::Singular);
        }
        let data = rows.into_iter().flat_map(|r| r[n..].to_vec()).collect();
        Ok(MatrixFq {
            rows: n,
            cols: n,
            data,
            ctx: ctx.clone(),
        })
    }

    /// Smallest `m` with `A^m = 0`, or `None` if `A` is not nilpotent.
    ///
    /// Powers are checked up to the matrix size.
    pub fn nilpotency_index(&self) -> Option<usize> {
        if !self.is_square() {
            return None;
        }
        if self.is_zero() {
            return Some(if self.rows == 0 { 0 } else { 1 });
        }
        let mut pow = self.clone();
        for m in 2..=self.rows.max(1) {
            pow = pow.mul(self).ok()?;
            if pow.is_zero() {
                return Some(m);
            }
        }
        None
    }

    fn series_index(&self) -> Result<usize, LinalgError> {
        let m = self.nilpotency_index().ok_or(LinalgError::NotNilpotent)?;
        // Terms up to x^{m-1}/(m-1)! are needed, so (m-1)! must be invertible.
        let p = self.ctx.p();
        if m >= 2 && (m - 1) as u64 >= p as u64 {
            return Err(LinalgError::CharacteristicTooSmall { p, index: m - 1 });
        }
        Ok(m)
    }

    /// `exp(x) = Σ_{i<m} x^i / i!` for nilpotent `x` with `x^m = 0`.
    pub fn exp_nilpotent(&self) -> Result<Self, LinalgError> {
        let m = self.series_index()?;
        let ctx = &self.ctx;
        let n = self.rows;
        let mut acc = Self::identity(ctx, n);
        let mut term = Self::identity(ctx, n);
        for i in 1..m {
            term = term.mul(self)?.scalar_mul(ctx.inv_int(i as i64)?);
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// `log(g) = Σ_{i<m} (-1)^{i+1} (g - I)^i / i` for unipotent `g`.
    pub fn log_unipotent(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::ShapeMismatch("log of non-square matrix".into()));
        }
        let ctx = &self.ctx;
        let n = self.rows;
        let x = self.sub(&Self::identity(ctx, n))?;
        let m = x.series_index()?;
        let mut acc = Self::zeros(ctx, n, n);
        let mut pow = Self::identity(ctx, n);
        for i in 1..m {
            pow = pow.mul(&x)?;
            let c = ctx.inv_int(if i % 2 == 1 { i as i64 } else { -(i as i64) })?;
            acc = acc.add(&pow.scalar_mul(c))?;
        }
        Ok(acc)
    }

    pub fn is_strictly_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i + 1)).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_unitriangular(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.get(i, i) == self.ctx.one() && (0..i).all(|j| self.get(i, j).is_zero())
            })
    }
}
