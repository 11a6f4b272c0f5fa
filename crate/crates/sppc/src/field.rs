//! Prime-field arithmetic plus the univariate polynomial toolkit used by every
//! layer above: Lagrange interpolation, multipoint evaluation, and the node
//! product / synthetic division helpers the decoder builds on.
//!
//! A [`Field`] is a context for one prime modulus. Elements are plain residues
//! wrapped in [`Fe`]; they do not carry the modulus, so mixing elements from
//! different contexts is a caller bug (guarded by debug assertions only).
//! Every arithmetic call bumps an operation counter, which is the only
//! complexity observable the crate exposes; algorithms are the plain
//! quadratic ones, which is all desk-scale parameters need.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not a prime >= 2")]
    NonPrimeModulus(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("duplicate interpolation node {0}")]
    DuplicateNode(u64),
}

/// Residue in `[0, q)`. Only a [`Field`] can produce one, which keeps the
/// range invariant out of every arithmetic routine.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Fe(u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn val(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    if n % 3 == 0 {
        return n == 3;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Smallest prime `>= n`. Desk-scale moduli only, so trial division is fine.
pub fn smallest_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Arithmetic context for the prime field `F_q`.
///
/// Immutable after construction and shareable across threads; the operation
/// counter is the one piece of interior mutability and is purely an
/// observability aid (each add/sub/neg/mul counts 1, inversions and powers
/// count their constituent multiplications).
#[derive(Debug)]
pub struct Field {
    q: u64,
    ops: AtomicU64,
}

impl Field {
    pub fn new(q: u64) -> Result<Field, FieldError> {
        if !is_prime(q) {
            return Err(FieldError::NonPrimeModulus(q));
        }
        Ok(Field { q, ops: AtomicU64::new(0) })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn op_count(&self) -> u64 {
        self.ops.load(Ordering::Relaxed)
    }

    fn tick(&self, n: u64) {
        self.ops.fetch_add(n, Ordering::Relaxed);
    }

    /// Reduce an arbitrary integer into the field.
    pub fn elem(&self, v: u64) -> Fe {
        Fe(v % self.q)
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        self.elem(1)
    }

    fn check(&self, a: Fe) {
        debug_assert!(a.0 < self.q, "element {} outside field of order {}", a.0, self.q);
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        self.check(a);
        self.check(b);
        self.tick(1);
        let s = a.0 + b.0;
        Fe(if s >= self.q { s - self.q } else { s })
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.check(a);
        self.check(b);
        self.tick(1);
        Fe(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.q - b.0 })
    }

    pub fn neg(&self, a: Fe) -> Fe {
        self.check(a);
        self.tick(1);
        Fe(if a.0 == 0 { 0 } else { self.q - a.0 })
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        self.check(a);
        self.check(b);
        self.tick(1);
        Fe(((a.0 as u128 * b.0 as u128) % self.q as u128) as u64)
    }

    /// Repeated squaring; counts one op per multiplication performed.
    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        self.check(a);
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn rand(&self, rng: &mut impl Rng) -> Fe {
        Fe(rng.gen_range(0..self.q))
    }

    pub fn rand_nonzero(&self, rng: &mut impl Rng) -> Fe {
        debug_assert!(self.q > 1);
        Fe(rng.gen_range(1..self.q))
    }
}

/// Dense univariate polynomial, coefficients lowest degree first.
/// Invariant: the last coefficient is nonzero (the zero polynomial is the
/// empty vector), so `degree` is `coeffs.len() - 1` when present.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct UniPoly {
    coeffs: Vec<Fe>,
}

impl UniPoly {
    pub fn zero() -> UniPoly {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Fe) -> UniPoly {
        UniPoly::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<Fe>) -> UniPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Coefficient of `x^i`; zero beyond the stored length.
    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, f: &Field, x: Fe) -> Fe {
        let mut acc = f.zero();
        for &c in self.coeffs.iter().rev() {
            acc = f.add(f.mul(acc, x), c);
        }
        acc
    }

    pub fn add(&self, f: &Field, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        UniPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, f: &Field, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect();
        UniPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, f: &Field, c: Fe) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, f: &Field, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(a, b));
            }
        }
        UniPoly::from_coeffs(coeffs)
    }

    /// Multiply by the linear factor `(x - root)`.
    pub fn mul_linear(&self, f: &Field, root: Fe) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let neg_root = f.neg(root);
        let mut coeffs = vec![Fe::ZERO; self.coeffs.len() + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            coeffs[i] = f.add(coeffs[i], f.mul(a, neg_root));
            coeffs[i + 1] = f.add(coeffs[i + 1], a);
        }
        UniPoly::from_coeffs(coeffs)
    }

    pub fn div_rem(&self, f: &Field, divisor: &UniPoly) -> Result<(UniPoly, UniPoly), FieldError> {
        let dd = divisor.degree().ok_or(FieldError::ZeroDivisor)?;
        let lead_inv = f.inv(*divisor.coeffs.last().unwrap())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((UniPoly::zero(), self.clone()));
        }
        let mut quot = vec![Fe::ZERO; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = f.mul(rem[i], lead_inv);
            quot[i - dd] = c;
            if !c.is_zero() {
                for j in 0..=dd {
                    rem[i - dd + j] = f.sub(rem[i - dd + j], f.mul(c, divisor.coeffs[j]));
                }
            }
        }
        Ok((UniPoly::from_coeffs(quot), UniPoly::from_coeffs(rem)))
    }
}

/// `prod_i (x - xs[i])`, the monic node product over the given points.
pub fn node_product(f: &Field, xs: &[Fe]) -> UniPoly {
    let mut p = UniPoly::constant(f.one());
    for &x in xs {
        p = p.mul_linear(f, x);
    }
    p
}

/// Unique polynomial of degree `< points.len()` through the given points.
/// Duplicate x nodes are rejected; the empty set interpolates to zero.
///
/// Quadratic: one node product, then one synthetic division per node.
pub fn lagrange_interpolate(f: &Field, points: &[(Fe, Fe)]) -> Result<UniPoly, FieldError> {
    for (i, &(xi, _)) in points.iter().enumerate() {
        for &(xj, _) in &points[i + 1..] {
            if xi == xj {
                return Err(FieldError::DuplicateNode(xi.val()));
            }
        }
    }
    let master = node_product(f, &points.iter().map(|&(x, _)| x).collect::<Vec<_>>());
    let mut acc = UniPoly::zero();
    for &(xi, yi) in points {
        if yi.is_zero() {
            continue;
        }
        // master / (x - xi) by synthetic division, then normalize at xi.
        let (basis, rem) = master.div_rem(f, &UniPoly::from_coeffs(vec![f.neg(xi), f.one()]))?;
        debug_assert!(rem.is_zero());
        let denom = basis.eval(f, xi);
        acc = acc.add(f, &basis.scale(f, f.mul(yi, f.inv(denom)?)));
    }
    Ok(acc)
}

/// Horner evaluation at each point in turn.
pub fn multipoint_eval(f: &Field, p: &UniPoly, xs: &[Fe]) -> Vec<Fe> {
    xs.iter().map(|&x| p.eval(f, x)).collect()
}
