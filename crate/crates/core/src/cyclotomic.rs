//! Exact elements of `Q(ζ_p)` written as `Σ c_a ζ_p^a`, `0 <= a < p`.
//!
//! The canonical form eliminates `ζ^{p-1}` through `1 + ζ + ... + ζ^{p-1} = 0`, so the stored
//! coefficient of `ζ^{p-1}` is always zero and equality is coefficientwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicValue {
    p: u32,
    coeffs: Vec<BigRational>,
}

impl CyclotomicValue {
    pub fn zero(p: u32) -> Self {
        CyclotomicValue {
            p,
            coeffs: vec![BigRational::zero(); p as usize],
        }
    }

    pub fn one(p: u32) -> Self {
        Self::from_rational(p, BigRational::one())
    }

    pub fn from_rational(p: u32, r: BigRational) -> Self {
        let mut v = Self::zero(p);
        v.coeffs[0] = r;
        v
    }

    /// `ζ_p^e` for any integer exponent.
    pub fn zeta_power(p: u32, e: i64) -> Self {
        let mut raw = vec![BigRational::zero(); p as usize];
        raw[e.rem_euclid(p as i64) as usize] = BigRational::one();
        Self::from_raw(p, raw)
    }

    /// Builds a value from arbitrary (non-canonical) coefficients.
    pub fn from_raw(p: u32, mut coeffs: Vec<BigRational>) -> Self {
        assert_eq!(coeffs.len(), p as usize, "coefficient vector must have length p");
        let last = std::mem::take(&mut coeffs[p as usize - 1]);
        if !last.is_zero() {
            for c in coeffs.iter_mut().take(p as usize - 1) {
                *c -= &last;
            }
        }
        CyclotomicValue { p, coeffs }
    }

    /// From integer counts `c_a` of `ζ^a`, divided by `denom`.
    pub fn from_counts(p: u32, counts: &[i128], denom: &BigInt) -> Self {
        let raw = counts
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c), denom.clone()))
            .collect();
        Self::from_raw(p, raw)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        CyclotomicValue { p: self.p, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CyclotomicValue {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let p = self.p as usize;
        let mut raw = vec![BigRational::zero(); p];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if !cb.is_zero() {
                    raw[(a + b) % p] += ca * cb;
                }
            }
        }
        Self::from_raw(self.p, raw)
    }

    /// Complex conjugation `ζ^a ↦ ζ^{-a}`.
    pub fn conj(&self) -> Self {
        let p = self.p as usize;
        let mut raw = vec![BigRational::zero(); p];
        for (a, c) in self.coeffs.iter().enumerate() {
            raw[(p - a) % p] = c.clone();
        }
        Self::from_raw(self.p, raw)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    /// The value as a rational number, if it lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coeffs[0].clone())
    }

    /// Floating approximation `(re, im)`; for diagnostics and tests only.
    pub fn to_complex(&self) -> (f64, f64) {
        let p = self.p as f64;
        self.coeffs
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (a, c)| {
                let w = c.to_f64().unwrap_or(f64::NAN);
                let ang = 2.0 * std::f64::consts::PI * a as f64 / p;
                (re + w * ang.cos(), im + w * ang.sin())
            })
    }

    pub fn is_nonnegative_rational(&self) -> bool {
        self.as_rational().is_some_and(|r| !r.is_negative())
    }
}

/// Reduces a length-`p` integer count vector to canonical form and returns it as a rational
/// number if it is one (all non-constant canonical coefficients vanish).
pub fn counts_as_integer(counts: &[i128]) -> Option<i128> {
    let last = *counts.last()?;
    let canon: Vec<i128> = counts[..counts.len() - 1].iter().map(|c| c - last).collect();
    canon[1..].iter().all(|&c| c == 0).then_some(canon[0])
}
