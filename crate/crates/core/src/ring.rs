//! Exact arithmetic over `Z_p` and dense polynomials with coefficients in `Z_p`.
//!
//! Moduli are limited to `u64`; products are reduced through `u128`. The
//! oblivious linear evaluation protocol accepts any modulus `p >= 2`, while
//! interpolation and mask sampling need a prime (and, for masks, odd) modulus.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("operation requires an odd prime modulus, got {0}")]
    EvenModulus(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("value {value} is not a canonical residue mod {modulus}")]
    NonCanonical { value: u64, modulus: u64 },
    #[error("duplicate root {0}")]
    DuplicateRoot(u64),
    #[error("duplicate interpolation abscissa {0}")]
    DuplicateAbscissa(u64),
    #[error("interpolation needs at least one point")]
    NoPoints,
    #[error("{0} has no inverse mod {1}")]
    NotInvertible(u64, u64),
}

/// The modulus `p` of `Z_p`, together with the result of a primality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus {
    p: u64,
    is_prime: bool,
}

impl Modulus {
    pub fn new(p: u64) -> Result<Self, RingError> {
        if p < 2 {
            return Err(RingError::ModulusTooSmall(p));
        }
        Ok(Self {
            p,
            is_prime: is_prime(p),
        })
    }

    /// Like [`Modulus::new`] but rejects composite moduli.
    pub fn prime(p: u64) -> Result<Self, RingError> {
        let m = Self::new(p)?;
        m.require_prime()?;
        Ok(m)
    }

    pub fn value(&self) -> u64 {
        self.p
    }

    pub fn is_prime(&self) -> bool {
        self.is_prime
    }

    pub fn require_prime(&self) -> Result<(), RingError> {
        if self.is_prime {
            Ok(())
        } else {
            Err(RingError::NotPrime(self.p))
        }
    }

    /// Number of bits needed to write any residue: `ceil(log2 p)`.
    pub fn bit_width(&self) -> usize {
        (64 - (self.p - 1).leading_zeros()) as usize
    }

    pub fn element(&self, value: u64) -> Result<ZpElement, RingError> {
        if value >= self.p {
            return Err(RingError::NonCanonical {
                value,
                modulus: self.p,
            });
        }
        Ok(ZpElement {
            value,
            modulus: *self,
        })
    }

    /// Reduces an arbitrary integer into `Z_p`.
    pub fn reduce(&self, value: u64) -> ZpElement {
        ZpElement {
            value: value % self.p,
            modulus: *self,
        }
    }

    pub fn reduce_signed(&self, value: i128) -> ZpElement {
        ZpElement {
            value: value.rem_euclid(self.p as i128) as u64,
            modulus: *self,
        }
    }

    pub fn zero(&self) -> ZpElement {
        self.reduce(0)
    }

    pub fn one(&self) -> ZpElement {
        self.reduce(1)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> ZpElement {
        self.reduce(rng.random_range(0..self.p))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> ZpElement {
        self.reduce(rng.random_range(1..self.p))
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.p as u128) as u64
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    fn inv(&self, a: u64) -> Result<u64, RingError> {
        // extended Euclid over i128, works for any modulus when gcd(a, p) = 1
        let (mut r0, mut r1) = (self.p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            return Err(RingError::NotInvertible(a, self.p));
        }
        Ok(t0.rem_euclid(self.p as i128) as u64)
    }
}

impl TryFrom<u64> for Modulus {
    type Error = RingError;

    fn try_from(p: u64) -> Result<Self, Self::Error> {
        Modulus::new(p)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.p
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact below 2^64.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A canonical residue in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZpElement {
    value: u64,
    modulus: Modulus,
}

impl ZpElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &ZpElement) -> Result<(), RingError> {
        if self.modulus.p != other.modulus.p {
            return Err(RingError::ModulusMismatch(self.modulus.p, other.modulus.p));
        }
        Ok(())
    }

    pub fn add(&self, other: &ZpElement) -> Result<ZpElement, RingError> {
        self.check(other)?;
        Ok(self.with(self.modulus.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &ZpElement) -> Result<ZpElement, RingError> {
        self.check(other)?;
        Ok(self.with(self.modulus.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &ZpElement) -> Result<ZpElement, RingError> {
        self.check(other)?;
        Ok(self.with(self.modulus.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> ZpElement {
        self.with(self.modulus.sub(0, self.value))
    }

    pub fn inv(&self) -> Result<ZpElement, RingError> {
        Ok(self.with(self.modulus.inv(self.value)?))
    }

    pub fn pow(&self, exp: u64) -> ZpElement {
        self.with(pow_mod(self.value, exp, self.modulus.p))
    }

    /// Euler's criterion; only meaningful for an odd prime modulus.
    pub fn is_quadratic_residue(&self) -> bool {
        if self.value == 0 {
            return true;
        }
        self.pow((self.modulus.p - 1) / 2).value == 1
    }

    fn with(&self, value: u64) -> ZpElement {
        ZpElement {
            value,
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for ZpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An evaluation `(x, y)` used as interpolation input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalPoint {
    pub x: ZpElement,
    pub y: ZpElement,
}

impl EvalPoint {
    pub fn new(x: ZpElement, y: ZpElement) -> Result<Self, RingError> {
        x.check(&y)?;
        Ok(Self { x, y })
    }
}

/// Dense polynomial over `Z_p`, coefficients in ascending degree.
///
/// The zero polynomial is the empty coefficient list; any other polynomial
/// has a nonzero leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<u64>,
    modulus: Modulus,
}

impl Polynomial {
    pub fn zero(modulus: Modulus) -> Self {
        Self {
            coeffs: Vec::new(),
            modulus,
        }
    }

    pub fn constant(c: ZpElement) -> Self {
        Self::from_raw(vec![c.value], c.modulus)
    }

    /// Builds a polynomial from ascending coefficients, reducing each mod `p`.
    pub fn from_coeffs(coeffs: &[u64], modulus: Modulus) -> Self {
        Self::from_raw(coeffs.iter().map(|&c| c % modulus.p).collect(), modulus)
    }

    /// `slope * x + intercept`.
    pub fn linear(slope: ZpElement, intercept: ZpElement) -> Result<Self, RingError> {
        slope.check(&intercept)?;
        Ok(Self::from_raw(
            vec![intercept.value, slope.value],
            slope.modulus,
        ))
    }

    fn from_raw(mut coeffs: Vec<u64>, modulus: Modulus) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs, modulus }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> ZpElement {
        self.modulus
            .reduce(self.coeffs.get(i).copied().unwrap_or(0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    fn check(&self, other: &Polynomial) -> Result<(), RingError> {
        if self.modulus.p != other.modulus.p {
            return Err(RingError::ModulusMismatch(self.modulus.p, other.modulus.p));
        }
        Ok(())
    }

    /// Horner evaluation.
    pub fn eval(&self, x: ZpElement) -> Result<ZpElement, RingError> {
        if x.modulus.p != self.modulus.p {
            return Err(RingError::ModulusMismatch(self.modulus.p, x.modulus.p));
        }
        let m = &self.modulus;
        let acc = self
            .coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| m.add(m.mul(acc, x.value), c));
        Ok(m.reduce(acc))
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, RingError> {
        self.check(other)?;
        let m = self.modulus;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| m.add(self.raw(i), other.raw(i))).collect();
        Ok(Self::from_raw(coeffs, m))
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, RingError> {
        self.check(other)?;
        let m = self.modulus;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| m.sub(self.raw(i), other.raw(i))).collect();
        Ok(Self::from_raw(coeffs, m))
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, RingError> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.modulus));
        }
        let m = self.modulus;
        let mut coeffs = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = m.add(coeffs[i + j], m.mul(a, b));
            }
        }
        Ok(Self::from_raw(coeffs, m))
    }

    pub fn scale(&self, k: ZpElement) -> Result<Polynomial, RingError> {
        if k.modulus.p != self.modulus.p {
            return Err(RingError::ModulusMismatch(self.modulus.p, k.modulus.p));
        }
        let m = self.modulus;
        Ok(Self::from_raw(
            self.coeffs.iter().map(|&c| m.mul(c, k.value)).collect(),
            m,
        ))
    }

    /// `P(x + shift)`, via Horner's scheme on polynomials.
    pub fn shift(&self, shift: ZpElement) -> Result<Polynomial, RingError> {
        let m = self.modulus;
        let x_plus = Self::linear(m.one(), shift)?;
        let mut acc = Self::zero(m);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&x_plus)?.add(&Self::constant(m.reduce(c)))?;
        }
        Ok(acc)
    }

    fn raw(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Divides by `(x - root)`, returning the quotient; the remainder is dropped.
    fn div_linear(&self, root: u64) -> Polynomial {
        let m = self.modulus;
        if self.coeffs.len() < 2 {
            return Self::zero(m);
        }
        let mut quotient = vec![0u64; self.coeffs.len() - 1];
        let mut carry = 0;
        for i in (1..self.coeffs.len()).rev() {
            carry = m.add(self.coeffs[i], m.mul(carry, root));
            quotient[i - 1] = carry;
        }
        Self::from_raw(quotient, m)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Monic polynomial whose roots are exactly `roots`.
pub fn poly_from_roots(roots: &[ZpElement], modulus: Modulus) -> Result<Polynomial, RingError> {
    let mut seen = HashSet::new();
    let mut acc = Polynomial::constant(modulus.one());
    for r in roots {
        if r.modulus.p != modulus.p {
            return Err(RingError::ModulusMismatch(modulus.p, r.modulus.p));
        }
        if !seen.insert(r.value) {
            return Err(RingError::DuplicateRoot(r.value));
        }
        acc = acc.mul(&Polynomial::linear(modulus.one(), r.neg())?)?;
    }
    Ok(acc)
}

/// Lagrange interpolation through `points`; the result has degree `< points.len()`.
pub fn poly_interpolate(points: &[EvalPoint]) -> Result<Polynomial, RingError> {
    let first = points.first().ok_or(RingError::NoPoints)?;
    let m = first.x.modulus;
    m.require_prime()?;
    let mut seen = HashSet::new();
    for pt in points {
        if pt.x.modulus.p != m.p {
            return Err(RingError::ModulusMismatch(m.p, pt.x.modulus.p));
        }
        if pt.y.modulus.p != m.p {
            return Err(RingError::ModulusMismatch(m.p, pt.y.modulus.p));
        }
        if !seen.insert(pt.x.value) {
            return Err(RingError::DuplicateAbscissa(pt.x.value));
        }
    }

    // N(x) = prod (x - x_i); the i-th basis numerator is N(x) / (x - x_i).
    let xs: Vec<ZpElement> = points.iter().map(|pt| pt.x).collect();
    let master = poly_from_roots(&xs, m)?;
    let mut acc = Polynomial::zero(m);
    for pt in points {
        let numerator = master.div_linear(pt.x.value);
        let denom = numerator.eval(pt.x)?;
        let weight = pt.y.mul(&denom.inv()?)?;
        acc = acc.add(&numerator.scale(weight)?)?;
    }
    Ok(acc)
}

/// Samples a polynomial with no root anywhere in `Z_p`.
///
/// The result is a nonzero constant times `max_degree / 2` monic irreducible
/// quadratics `x^2 + bx + c`, each accepted when its discriminant is a
/// quadratic non-residue.
pub fn sample_rootfree_poly<R: Rng + ?Sized>(
    max_degree: usize,
    modulus: Modulus,
    rng: &mut R,
) -> Result<Polynomial, RingError> {
    modulus.require_prime()?;
    if modulus.p == 2 {
        return Err(RingError::EvenModulus(modulus.p));
    }
    let mut acc = Polynomial::constant(modulus.random_nonzero(rng));
    for _ in 0..max_degree / 2 {
        acc = acc.mul(&sample_irreducible_quadratic(modulus, rng))?;
    }
    Ok(acc)
}

fn sample_irreducible_quadratic<R: Rng + ?Sized>(modulus: Modulus, rng: &mut R) -> Polynomial {
    let four = modulus.reduce(4);
    loop {
        let b = modulus.random(rng);
        let c = modulus.random(rng);
        // same modulus throughout, arithmetic cannot fail
        let disc = b
            .mul(&b)
            .and_then(|bb| bb.sub(&four.mul(&c)?))
            .expect("shared modulus");
        if !disc.is_quadratic_residue() {
            return Polynomial::from_raw(vec![c.value, b.value, 1], modulus);
        }
    }
}
