//! Orbits of a finite group acting linearly on `F_q^d`, by breadth-first closure.
//!
//! Vectors are encoded in mixed radix `code = Σ x_i q^{d-1-i}`, so numeric order on codes is
//! lexicographic order on coordinates and the first unvisited code of a sweep is the smallest
//! member of its orbit.

use std::collections::HashSet;

use thiserror::Error;

use crate::field::{FieldCtx, Fq};
use crate::linalg::MatrixFq;

/// Default cap on the number of points an enumeration may touch.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("enumeration needs {required} points but the budget is {budget}")]
pub struct BudgetExceeded {
    pub required: u128,
    pub budget: u64,
}

/// Checks `q^d <= budget` and returns `q^d`.
pub fn space_size(q: u32, d: usize, budget: u64) -> Result<u64, BudgetExceeded> {
    let required = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(BudgetExceeded { required, budget });
    }
    Ok(required as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRecord {
    pub representative: Vec<Fq>,
    pub size: u64,
    /// Encoded members in BFS order, kept only when requested.
    pub members: Option<Vec<u64>>,
}

/// A set of invertible linear maps on `F_q^d` generating the acting group.
#[derive(Clone, Debug)]
pub struct LinearAction {
    ctx: FieldCtx,
    dim: usize,
    gens: Vec<Vec<u32>>,
}

impl LinearAction {
    /// Generators that are the identity are dropped.
    pub fn new(ctx: &FieldCtx, dim: usize, generators: &[MatrixFq]) -> Self {
        let id = MatrixFq::identity(ctx, dim);
        let gens = generators
            .iter()
            .filter(|g| **g != id)
            .map(|g| {
                assert_eq!((g.rows(), g.cols()), (dim, dim), "generator has wrong shape");
                g.entries().iter().map(|x| x.index()).collect()
            })
            .collect();
        LinearAction {
            ctx: ctx.clone(),
            dim,
            gens,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn num_generators(&self) -> usize {
        self.gens.len()
    }

    pub fn encode(&self, x: &[Fq]) -> u64 {
        let q = self.ctx.q() as u64;
        x.iter().fold(0, |acc, v| acc * q + v.index() as u64)
    }

    pub fn decode(&self, mut code: u64, out: &mut [u32]) {
        let q = self.ctx.q() as u64;
        for slot in out.iter_mut().rev() {
            *slot = (code % q) as u32;
            code /= q;
        }
    }

    pub fn decode_vec(&self, code: u64) -> Vec<Fq> {
        let mut buf = vec![0; self.dim];
        self.decode(code, &mut buf);
        buf.into_iter().map(Fq).collect()
    }

    /// Code of `g · x` for generator `g` and decoded input `x`.
    #[inline]
    fn apply_code(&self, g: &[u32], x: &[u32]) -> u64 {
        let d = self.dim;
        let q = self.ctx.q() as u64;
        let mut code = 0u64;
        if self.ctx.is_prime_field() {
            let p = q;
            for i in 0..d {
                let row = &g[i * d..(i + 1) * d];
                let s: u64 = row.iter().zip(x).map(|(&a, &b)| a as u64 * b as u64).sum();
                code = code * q + s % p;
            }
        } else {
            let ctx = &self.ctx;
            for i in 0..d {
                let row = &g[i * d..(i + 1) * d];
                let mut s = Fq::ZERO;
                for (&a, &b) in row.iter().zip(x) {
                    if a != 0 && b != 0 {
                        s = ctx.add(s, ctx.mul(Fq(a), Fq(b)));
                    }
                }
                code = code * q + s.index() as u64;
            }
        }
        code
    }

    /// All orbits, in increasing order of representative.
    pub fn orbits(&self, budget: u64, keep_members: bool) -> Result<Vec<OrbitRecord>, BudgetExceeded> {
        let total = space_size(self.ctx.q(), self.dim, budget)?;
        let mut visited = vec![0u64; (total as usize).div_ceil(64)];
        let mut queue: Vec<u64> = Vec::new();
        let mut buf = vec![0u32; self.dim];
        let mut out = Vec::new();
        for start in 0..total {
            if visited[(start >> 6) as usize] >> (start & 63) & 1 == 1 {
                continue;
            }
            visited[(start >> 6) as usize] |= 1 << (start & 63);
            queue.clear();
            queue.push(start);
            let mut head = 0;
            while head < queue.len() {
                self.decode(queue[head], &mut buf);
                head += 1;
                for g in &self.gens {
                    let c = self.apply_code(g, &buf);
                    let (w, b) = ((c >> 6) as usize, c & 63);
                    if visited[w] >> b & 1 == 0 {
                        visited[w] |= 1 << b;
                        queue.push(c);
                    }
                }
            }
            out.push(OrbitRecord {
                representative: self.decode_vec(start),
                size: queue.len() as u64,
                members: keep_members.then(|| queue.clone()),
            });
        }
        Ok(out)
    }

    /// Members of the orbit through `x`, sorted by code.
    pub fn orbit_of(&self, x: &[Fq]) -> Vec<u64> {
        let start = self.encode(x);
        let mut seen = HashSet::from([start]);
        let mut queue = vec![start];
        let mut buf = vec![0u32; self.dim];
        let mut head = 0;
        while head < queue.len() {
            self.decode(queue[head], &mut buf);
            head += 1;
            for g in &self.gens {
                let c = self.apply_code(g, &buf);
                if seen.insert(c) {
                    queue.push(c);
                }
            }
        }
        queue.sort_unstable();
        queue
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_action_has_singletons() {
        let ctx = FieldCtx::prime(5).unwrap();
        let act = LinearAction::new(&ctx, 2, &[MatrixFq::identity(&ctx, 2)]);
        let orbits = act.orbits(DEFAULT_BUDGET, false).unwrap();
        assert_eq!(orbits.len(), 25);
        assert!(orbits.iter().all(|o| o.size == 1));
    }

    #[test]
    fn shear_orbits_and_representatives() {
        // (x, y) -> (x + y, y): orbits are lines y = c for c != 0, points otherwise.
        let ctx = FieldCtx::prime(7).unwrap();
        let g = MatrixFq::from_ints(&ctx, &[vec![1, 1], vec![0, 1]]).unwrap();
        let act = LinearAction::new(&ctx, 2, &[g]);
        let orbits = act.orbits(DEFAULT_BUDGET, true).unwrap();
        assert_eq!(orbits.len(), 7 + 6);
        for o in &orbits {
            let members = o.members.as_ref().unwrap();
            assert_eq!(members.len() as u64, o.size);
            assert_eq!(*members.iter().min().unwrap(), act.encode(&o.representative));
            let mut sorted = members.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, act.orbit_of(&o.representative));
        }
        assert_eq!(orbits.iter().map(|o| o.size).sum::<u64>(), 49);
    }

    #[test]
    fn encoding_roundtrip_extension_field() {
        let ctx = FieldCtx::new(3, 2).unwrap();
        let act = LinearAction::new(&ctx, 3, &[]);
        for code in 0..729 {
            assert_eq!(act.encode(&act.decode_vec(code)), code);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let ctx = FieldCtx::prime(5).unwrap();
        let act = LinearAction::new(&ctx, 4, &[]);
        assert_eq!(
            act.orbits(100, false),
            Err(BudgetExceeded { required: 625, budget: 100 })
        );
    }
}
