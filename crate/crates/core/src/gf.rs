//! Finite fields GF(p^n) in the polynomial basis.
//!
//! An element `a = Σ a_i α^i` (α a root of the field polynomial) is stored by
//! its integer index `Σ a_i p^i`. Under `x² + x + 1` this reproduces the usual
//! labelling `0, 1, 2 = α, 3 = α + 1` of GF(4).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted.
pub const MAX_ORDER: u32 = 1 << 16;

/// Fields up to this order get precomputed addition and multiplication tables.
pub const TABLE_LIMIT: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{n} exceeds the supported maximum {max}")]
    TooLarge { p: u32, n: u32, max: u32 },
    #[error("polynomial must be monic of degree {expected} with coefficients below {p}")]
    BadPolynomial { expected: u32, p: u32 },
    #[error("polynomial {0:?} is reducible")]
    Reducible(Vec<u32>),
    #[error("polynomial index {index} out of range for degree {n} over Z_{p}")]
    BadPolynomialIndex { p: u32, n: u32, index: u64 },
    #[error("element index {index} out of range for a field of order {order}")]
    ElementOutOfRange { index: u64, order: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// A field element, identified by its canonical index in `[0, d)`.
///
/// Elements do not carry their field; every operation goes through a
/// [`Field`], which validates indices on construction via [`Field::elem`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Element from a raw index the caller knows to be below the field order.
#[inline]
pub(crate) fn elem_unchecked(index: u32) -> Elem {
    Elem(index)
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone)]
pub struct Field {
    p: u32,
    n: u32,
    d: u32,
    /// Non-leading coefficients `c_0 .. c_{n-1}` of the monic field polynomial.
    poly: Vec<u32>,
    add_table: Option<Vec<u16>>,
    mul_table: Option<Vec<u16>>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.poly == other.poly
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}; {})", self.p, self.n, self.poly_string())
    }
}

impl fmt::Display for Field {
    /// The textual descriptor `p n poly_index`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.p, self.n, self.poly_index())
    }
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u32;
    while (q as u64) * (q as u64) <= p as u64 {
        if p % q == 0 {
            return false;
        }
        q += 1;
    }
    true
}

/// If `d` is a prime power `p^n`, returns `(p, n)`.
pub fn prime_power(d: u32) -> Option<(u32, u32)> {
    if d < 2 {
        return None;
    }
    let p = (2..=d).find(|q| d % q == 0)?;
    let mut rest = d;
    let mut n = 0;
    while rest % p == 0 {
        rest /= p;
        n += 1;
    }
    (rest == 1).then_some((p, n))
}

fn checked_order(p: u32, n: u32) -> Result<u32, GfError> {
    let too_large = GfError::TooLarge { p, n, max: MAX_ORDER };
    let mut d: u64 = 1;
    for _ in 0..n {
        d *= p as u64;
        if d > MAX_ORDER as u64 {
            return Err(too_large);
        }
    }
    Ok(d as u32)
}

// Polynomials over Z_p as low-to-high coefficient vectors, no trailing zeros.

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Remainder of `num` modulo the monic polynomial `den`.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(num.to_vec());
    let dd = den.len() - 1;
    while r.len() > dd {
        let shift = r.len() - 1 - dd;
        let lead = *r.last().unwrap();
        for (i, &c) in den.iter().enumerate() {
            let idx = shift + i;
            r[idx] = (r[idx] + p - (lead * c) % p) % p;
        }
        r = trim(r);
    }
    r
}

/// Full coefficient list (leading 1 included) of the monic polynomial with
/// index `index` among degree-`deg` polynomials over Z_p.
fn monic_from_index(p: u32, deg: u32, mut index: u64) -> Vec<u32> {
    let mut c = Vec::with_capacity(deg as usize + 1);
    for _ in 0..deg {
        c.push((index % p as u64) as u32);
        index /= p as u64;
    }
    c.push(1);
    c
}

/// Trial division against every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(p: u32, full: &[u32]) -> bool {
    let deg = full.len() as u32 - 1;
    for k in 1..=deg / 2 {
        let count = (p as u64).pow(k);
        for idx in 0..count {
            let div = monic_from_index(p, k, idx);
            if poly_rem(full, &div, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// All monic irreducible polynomials of degree `n` over Z_p, as
/// non-leading coefficient lists ordered by polynomial index.
pub fn irreducible_polys(p: u32, n: u32) -> Result<Vec<Vec<u32>>, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    if n == 0 {
        return Err(GfError::ZeroDegree);
    }
    let count = checked_order(p, n)? as u64;
    Ok((0..count)
        .map(|i| monic_from_index(p, n, i))
        .filter(|f| is_irreducible(p, f))
        .map(|mut f| {
            f.pop();
            f
        })
        .collect())
}

impl Field {
    /// Builds GF(p^n). With `poly = None` the irreducible polynomial of
    /// smallest index is used. A supplied polynomial is the full low-to-high
    /// coefficient list, leading 1 included.
    pub fn new(p: u32, n: u32, poly: Option<&[u32]>) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if n == 0 {
            return Err(GfError::ZeroDegree);
        }
        let d = checked_order(p, n)?;
        let full = match poly {
            Some(c) => {
                if c.len() != n as usize + 1 || c[n as usize] != 1 || c.iter().any(|&x| x >= p) {
                    return Err(GfError::BadPolynomial { expected: n, p });
                }
                if !is_irreducible(p, c) {
                    return Err(GfError::Reducible(c.to_vec()));
                }
                c.to_vec()
            }
            None => (0..d as u64)
                .map(|i| monic_from_index(p, n, i))
                .find(|f| is_irreducible(p, f))
                .expect("an irreducible polynomial exists in every degree"),
        };
        let mut poly = full;
        poly.pop();
        Ok(Self::build(p, n, d, poly))
    }

    /// Builds a field from its textual descriptor parts.
    pub fn from_descriptor(p: u32, n: u32, poly_index: u64) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if n == 0 {
            return Err(GfError::ZeroDegree);
        }
        let d = checked_order(p, n)?;
        if poly_index >= d as u64 {
            return Err(GfError::BadPolynomialIndex { p, n, index: poly_index });
        }
        Field::new(p, n, Some(&monic_from_index(p, n, poly_index)))
    }

    /// Default field of order `d`, if `d` is a prime power.
    pub fn of_order(d: u32) -> Result<Field, GfError> {
        match prime_power(d) {
            Some((p, n)) => Field::new(p, n, None),
            None => Err(GfError::NotPrime(d)),
        }
    }

    fn build(p: u32, n: u32, d: u32, poly: Vec<u32>) -> Field {
        let mut f = Field {
            p,
            n,
            d,
            poly,
            add_table: None,
            mul_table: None,
            neg: Vec::new(),
            inv: Vec::new(),
        };
        f.neg = (0..d).map(|a| f.neg_raw(a)).collect();
        f.inv = (0..d)
            .map(|a| if a == 0 { 0 } else { f.pow_raw(a, d as u64 - 2) })
            .collect();
        if d <= TABLE_LIMIT {
            let sz = (d * d) as usize;
            let mut add = Vec::with_capacity(sz);
            let mut mul = Vec::with_capacity(sz);
            for a in 0..d {
                for b in 0..d {
                    add.push(f.add_raw(a, b) as u16);
                    mul.push(f.mul_raw(a, b) as u16);
                }
            }
            f.add_table = Some(add);
            f.mul_table = Some(mul);
        }
        f
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.d
    }

    /// Non-leading coefficients of the field polynomial, low to high.
    pub fn poly(&self) -> &[u32] {
        &self.poly
    }

    /// Full coefficient list of the field polynomial, leading 1 included.
    pub fn poly_full(&self) -> Vec<u32> {
        let mut c = self.poly.clone();
        c.push(1);
        c
    }

    pub fn poly_index(&self) -> u64 {
        self.poly
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    /// Human readable polynomial, e.g. `x^2 + x + 1`.
    pub fn poly_string(&self) -> String {
        let full = self.poly_full();
        let mut terms = Vec::new();
        for (i, &c) in full.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
            terms.push(match i {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{i}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    pub fn has_tables(&self) -> bool {
        self.add_table.is_some()
    }

    /// Checked element constructor.
    pub fn elem(&self, index: u64) -> Result<Elem, GfError> {
        if index < self.d as u64 {
            Ok(Elem(index as u32))
        } else {
            Err(GfError::ElementOutOfRange { index, order: self.d })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.d).map(Elem)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (1..self.d).map(Elem)
    }

    pub fn contains(&self, a: Elem) -> bool {
        a.0 < self.d
    }

    /// Coefficient vector `(a_0, .., a_{n-1})` of `a`.
    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        let mut v = a.0;
        (0..self.n)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem, GfError> {
        if coeffs.len() != self.n as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(GfError::BadPolynomial { expected: self.n, p: self.p });
        }
        Ok(Elem(coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)))
    }

    fn add_raw(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.n {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    fn neg_raw(&self, a: u32) -> u32 {
        let mut a = a;
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.n {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }

    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        let n = self.n as usize;
        let ca = self.coeffs(Elem(a));
        let cb = self.coeffs(Elem(b));
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // x^n = -(c_0 + .. + c_{n-1} x^{n-1})
        for top in (n..2 * n - 1).rev() {
            let lead = prod[top];
            if lead == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &c) in self.poly.iter().enumerate() {
                let idx = top - n + i;
                prod[idx] = (prod[idx] + (p - (lead * c as u64) % p)) % p;
            }
        }
        prod[..n]
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * p + c) as u32
    }

    fn pow_raw(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(self.contains(a) && self.contains(b));
        match &self.add_table {
            Some(t) => Elem(t[(a.0 * self.d + b.0) as usize] as u32),
            None => Elem(self.add_raw(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(self.contains(a) && self.contains(b));
        match &self.mul_table {
            Some(t) => Elem(t[(a.0 * self.d + b.0) as usize] as u32),
            None => Elem(self.mul_raw(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GfError> {
        if a.is_zero() {
            Err(GfError::ZeroInverse)
        } else {
            Ok(Elem(self.inv[a.0 as usize]))
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        Elem(self.pow_raw(a.0, e))
    }

    /// Reverses the coefficient vector: coefficient `k` moves to `n - 1 - k`.
    pub fn reverse(&self, a: Elem) -> Elem {
        let mut c = self.coeffs(a);
        c.reverse();
        Elem(c.iter().rev().fold(0, |acc, &x| acc * self.p + x))
    }

    /// Coefficient-wise inner product `Σ a_i b_i mod p`.
    pub fn dot(&self, a: Elem, b: Elem) -> u32 {
        let (mut x, mut y) = (a.0, b.0);
        let mut acc = 0u64;
        for _ in 0..self.n {
            acc += ((x % self.p) * (y % self.p)) as u64;
            x /= self.p;
            y /= self.p;
        }
        (acc % self.p as u64) as u32
    }

    /// The d×d addition table, row-major, as element indices.
    pub fn add_table(&self) -> Vec<Vec<u32>> {
        self.elements()
            .map(|a| self.elements().map(|b| self.add(a, b).0).collect())
            .collect()
    }

    /// The d×d multiplication table, row-major, as element indices.
    pub fn mul_table(&self) -> Vec<Vec<u32>> {
        self.elements()
            .map(|a| self.elements().map(|b| self.mul(a, b).0).collect())
            .collect()
    }

    /// On-the-fly arithmetic, bypassing the tables. Used to cross-check them.
    pub fn add_untabled(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.add_raw(a.0, b.0))
    }

    pub fn mul_untabled(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.mul_raw(a.0, b.0))
    }
}
