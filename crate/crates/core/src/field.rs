//! Finite fields `F_q`, `q = p^k`, with the trace to `F_p` and the additive character.
//!
//! Elements are stored as a single integer in `[0, q)` holding the base-`p` digits of the
//! coefficient vector (constant term least significant). All arithmetic goes through an
//! explicit [`FieldCtx`]; there is no global field state.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::cyclotomic::CyclotomicValue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("operand does not belong to the field F_{q}")]
    ContextMismatch { q: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is not supported (p must be odd)")]
    UnsupportedCharacteristic(u64),
    #[error("no built-in modulus for F_{p}^{k}; supply one explicitly")]
    NoBuiltinModulus { p: u64, k: u32 },
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("modulus is reducible over F_{p}")]
    ReducibleModulus { p: u64 },
    #[error("field too large: q = {0}")]
    TooLarge(u64),
    #[error("cannot parse field specification {0:?}")]
    Parse(String),
}

/// An element of `F_q`, encoded as the base-`p` integer of its coefficient vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(pub(crate) u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);

    /// Raw encoding in `[0, q)`.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary field operations accepted by [`FieldCtx::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    /// Inverse of the first operand; the second is ignored.
    Inv,
    /// First operand raised to the integer encoded by the second operand.
    Pow,
}

/// Largest field order supported; keeps lookup tables small.
pub const MAX_ORDER: u64 = 1 << 16;

struct Inner {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    // Only populated for k > 1.
    add: Vec<u32>,
    neg: Vec<u32>,
    log: Vec<u32>,
    exp: Vec<u32>,
    trace: Vec<u32>,
}

/// Context for `F_q`: characteristic, degree, defining modulus and precomputed tables.
///
/// Cloning is cheap (shared tables).
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.0.p)
            .field("k", &self.0.k)
            .field("modulus", &self.0.modulus)
            .finish()
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.k == 1 {
            write!(f, "{}", self.0.p)
        } else {
            write!(f, "{}^{}", self.0.p, self.0.k)
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power into `(p, k)`, or `None` if `q` is not one.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let (mut rest, mut k) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Built-in irreducible moduli, coefficients least significant first (monic).
pub fn builtin_modulus(p: u64, k: u32) -> Option<Vec<u32>> {
    match (p, k) {
        (_, 1) => Some(vec![0, 1]),
        (3, 2) => Some(vec![1, 0, 1]),
        (3, 3) => Some(vec![1, 2, 0, 1]),
        (5, 2) => Some(vec![2, 0, 1]),
        (7, 2) => Some(vec![1, 0, 1]),
        _ => None,
    }
}

// Polynomials over F_p as coefficient vectors, least significant first.
fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_pow(m[dm], p - 2, p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &mi) in m.iter().enumerate() {
            let t = (c as u64 * mi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - t) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
    poly_rem(&out, m, p)
}

fn mod_pow(base: u32, mut e: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    acc as u32
}

fn digits(mut v: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(v % p);
        v /= p;
    }
    out
}

fn undigits(c: &[u32], p: u32) -> u32 {
    c.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let k = m.len() - 1;
    // No factor of degree d for 1 <= d <= k/2.
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut f = digits(low as u32, p, d as u32);
            f.push(1);
            if poly_rem(m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::with_modulus(p, &[0, 1])
    }

    /// `F_{p^k}` using a built-in modulus.
    pub fn new(p: u64, k: u32) -> Result<Self, FieldError> {
        let m = builtin_modulus(p, k).ok_or(FieldError::NoBuiltinModulus { p, k })?;
        Self::with_modulus(p, &m)
    }

    /// `F_p[t]/(modulus)`; the modulus is monic, least significant coefficient first.
    pub fn with_modulus(p: u64, modulus: &[u32]) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p == 2 {
            return Err(FieldError::UnsupportedCharacteristic(p));
        }
        if modulus.len() < 2 {
            return Err(FieldError::InvalidModulus("degree must be at least 1".into()));
        }
        if modulus.iter().any(|&c| c as u64 >= p) {
            return Err(FieldError::InvalidModulus(format!(
                "coefficients must lie in [0, {p})"
            )));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(FieldError::InvalidModulus("modulus must be monic".into()));
        }
        let k = (modulus.len() - 1) as u32;
        let q = (p as u128).pow(k);
        if q > MAX_ORDER as u128 {
            return Err(FieldError::TooLarge(q.min(u64::MAX as u128) as u64));
        }
        let (p, q) = (p as u32, q as u32);
        if k > 1 && !is_irreducible(modulus, p) {
            return Err(FieldError::ReducibleModulus { p: p as u64 });
        }
        let mut inner = Inner {
            p,
            k,
            q,
            modulus: modulus.to_vec(),
            add: Vec::new(),
            neg: Vec::new(),
            log: Vec::new(),
            exp: Vec::new(),
            trace: Vec::new(),
        };
        if k > 1 {
            inner.build_tables()?;
        }
        Ok(FieldCtx(Arc::new(inner)))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    #[inline]
    pub fn is_prime_field(&self) -> bool {
        self.0.k == 1
    }

    pub fn zero(&self) -> Fq {
        Fq(0)
    }

    pub fn one(&self) -> Fq {
        Fq(1)
    }

    /// Image of an integer under `Z -> F_p ⊆ F_q`.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.0.p as i64) as u32)
    }

    /// Element from its coefficient vector (length at most `k`, reduced mod `p`).
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<Fq, FieldError> {
        if coeffs.len() > self.0.k as usize {
            return Err(FieldError::ContextMismatch { q: self.0.q as u64 });
        }
        let c: Vec<u32> = coeffs
            .iter()
            .map(|&x| x.rem_euclid(self.0.p as i64) as u32)
            .collect();
        Ok(Fq(undigits(&c, self.0.p)))
    }

    /// Element from its raw encoding; fails if `index >= q`.
    pub fn element(&self, index: u32) -> Result<Fq, FieldError> {
        if index < self.0.q {
            Ok(Fq(index))
        } else {
            Err(FieldError::ContextMismatch { q: self.0.q as u64 })
        }
    }

    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        digits(a.0, self.0.p, self.0.k)
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.0.q).map(Fq)
    }

    /// `1, t, ..., t^{k-1}`: an `F_p`-basis of `F_q`.
    pub fn prime_basis(&self) -> Vec<Fq> {
        (0..self.0.k).map(|i| Fq(self.0.p.pow(i))).collect()
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        let s = &self.0;
        if s.k == 1 {
            let t = a.0 + b.0;
            Fq(if t >= s.p { t - s.p } else { t })
        } else {
            Fq(s.add[(a.0 * s.q + b.0) as usize])
        }
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        let s = &self.0;
        if s.k == 1 {
            Fq(if a.0 == 0 { 0 } else { s.p - a.0 })
        } else {
            Fq(s.neg[a.0 as usize])
        }
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        let s = &self.0;
        if s.k == 1 {
            Fq(((a.0 as u64 * b.0 as u64) % s.p as u64) as u32)
        } else if a.0 == 0 || b.0 == 0 {
            Fq(0)
        } else {
            let e = (s.log[a.0 as usize] + s.log[b.0 as usize]) % (s.q - 1);
            Fq(s.exp[e as usize])
        }
    }

    pub fn inv(&self, a: Fq) -> Result<Fq, FieldError> {
        let s = &self.0;
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        if s.k == 1 {
            Ok(Fq(mod_pow(a.0, s.p - 2, s.p)))
        } else {
            let e = (s.q - 1 - s.log[a.0 as usize]) % (s.q - 1);
            Ok(Fq(s.exp[e as usize]))
        }
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut acc = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of `n · 1` for a nonzero integer `n` prime to `p`.
    pub fn inv_int(&self, n: i64) -> Result<Fq, FieldError> {
        self.inv(self.from_int(n))
    }

    /// Checked binary operation; rejects operands outside this field.
    pub fn apply(&self, op: FieldOp, a: Fq, b: Fq) -> Result<Fq, FieldError> {
        let a = self.element(a.0)?;
        let b = self.element(b.0)?;
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Sub => Ok(self.sub(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Inv => self.inv(a),
            FieldOp::Pow => Ok(self.pow(a, b.0 as u64)),
        }
    }

    /// `Tr_{F_q/F_p}(a) = a + a^p + ... + a^{p^{k-1}}`, as an integer in `[0, p)`.
    pub fn trace(&self, a: Fq) -> u32 {
        let s = &self.0;
        if s.k == 1 {
            a.0
        } else {
            s.trace[a.0 as usize]
        }
    }

    /// `θ(a) = ζ_p^{Tr(a)}`.
    pub fn theta(&self, a: Fq) -> CyclotomicValue {
        CyclotomicValue::zeta_power(self.0.p, self.trace(a) as i64)
    }

    /// `1/2` in this field.
    pub fn half(&self) -> Fq {
        self.inv_int(2).expect("odd characteristic")
    }

    /// Symmetric-free integer view used for JSON output: the coefficient vector for `k > 1`,
    /// the plain residue otherwise.
    pub fn to_json_value(&self, a: Fq) -> ElementRepr {
        if self.0.k == 1 {
            ElementRepr::Scalar(a.0)
        } else {
            ElementRepr::Coeffs(self.coeffs(a))
        }
    }
}

/// Serialized form of a field element.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum ElementRepr {
    Scalar(u32),
    Coeffs(Vec<u32>),
}

impl ElementRepr {
    pub fn to_field(&self, ctx: &FieldCtx) -> Result<Fq, FieldError> {
        match self {
            ElementRepr::Scalar(v) if ctx.k() == 1 => ctx.element(*v),
            ElementRepr::Scalar(v) => Ok(ctx.from_int(*v as i64)),
            ElementRepr::Coeffs(c) => {
                let c: Vec<i64> = c.iter().map(|&x| x as i64).collect();
                ctx.from_coeffs(&c)
            }
        }
    }
}

impl Inner {
    fn build_tables(&mut self) -> Result<(), FieldError> {
        let (p, k, q) = (self.p, self.k, self.q);
        let n = q as usize;
        self.add = vec![0; n * n];
        self.neg = vec![0; n];
        for a in 0..q {
            let da = digits(a, p, k);
            let nd: Vec<u32> = da.iter().map(|&x| (p - x) % p).collect();
            self.neg[a as usize] = undigits(&nd, p);
            for b in 0..q {
                let db = digits(b, p, k);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                self.add[(a * q + b) as usize] = undigits(&s, p);
            }
        }
        // Find a primitive element and tabulate its powers.
        let m = self.modulus.clone();
        'search: for g in 2..q {
            let gp = {
                let mut d = digits(g, p, k);
                poly_trim(&mut d);
                d
            };
            let mut exp = vec![0u32; n - 1];
            let mut log = vec![u32::MAX; n];
            let mut cur = vec![1u32];
            for e in 0..(q - 1) {
                let mut padded = cur.clone();
                padded.resize(k as usize, 0);
                let v = undigits(&padded, p);
                if log[v as usize] != u32::MAX {
                    continue 'search;
                }
                log[v as usize] = e;
                exp[e as usize] = v;
                cur = poly_mul_mod(&cur, &gp, &m, p);
            }
            self.exp = exp;
            self.log = log;
            break;
        }
        if self.exp.is_empty() {
            return Err(FieldError::ReducibleModulus { p: p as u64 });
        }
        let ctx_like = |a: u32, b: u32| -> u32 {
            if a == 0 || b == 0 {
                0
            } else {
                self.exp[((self.log[a as usize] + self.log[b as usize]) % (q - 1)) as usize]
            }
        };
        let mut trace = vec![0u32; n];
        for a in 0..q {
            // a^{p^i} via repeated p-th powers.
            let mut term = a;
            let mut acc = 0u32;
            for _ in 0..k {
                acc = self.add[(acc * q + term) as usize];
                let mut t = 1u32;
                for _ in 0..p {
                    t = ctx_like(t, term);
                }
                term = t;
            }
            // The trace lies in F_p, i.e. only the constant digit may be nonzero.
            debug_assert!(acc < p);
            trace[a as usize] = acc;
        }
        self.trace = trace;
        Ok(())
    }
}

impl FromStr for FieldCtx {
    type Err = FieldError;

    /// Parses `"p"` or `"p^k"` (built-in modulus for `k > 1`); a bare prime power such as
    /// `"25"` is accepted as well.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || FieldError::Parse(s.to_string());
        if let Some((p, k)) = s.split_once('^') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let k: u32 = k.trim().parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            return FieldCtx::new(p, k);
        }
        let q: u64 = s.parse().map_err(|_| bad())?;
        let (p, k) = prime_power(q).ok_or(FieldError::NotPrime(q))?;
        FieldCtx::new(p, k)
    }
}
