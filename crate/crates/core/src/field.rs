//! Arithmetic in F_q and vectors over it.
//!
//! Prime fields compute modulo p directly; small prime-power fields
//! (extension degree 2 or 3) are table-driven: a generator is found once at
//! construction and multiplication/inversion go through log/antilog tables.
//! Elements of an extension field are encoded as base-p digit strings, so
//! addition is digit-wise and never consults the tables.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("q = {q} is not a prime power")]
    NotPrimePower { q: u32 },
    #[error("unsupported field size q = {q}: {reason}")]
    UnsupportedField { q: u32, reason: String },
    #[error("modulus {modulus:?} is not monic of degree {degree} or not irreducible over F_{p}")]
    BadModulus { p: u32, degree: u32, modulus: Vec<u32> },
    #[error("inverse of zero in F_{q}")]
    ZeroInverse { q: u32 },
    #[error("value {value} is out of range for F_{q}")]
    ValueOutOfRange { value: u32, q: u32 },
    #[error("characters are only available over F_2 (got q = {q})")]
    CharRequiresBinary { q: u32 },
}

/// Largest field size for which extension tables are built.
const MAX_TABLE_Q: u32 = 4096;

/// An element of F_q, stored as a natural number in `[0, q)`.
///
/// For extension fields the value encodes the coefficient vector of the
/// residue polynomial in base p, least significant digit first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FqElement(u32);

impl FqElement {
    pub const ZERO: FqElement = FqElement(0);
    pub const ONE: FqElement = FqElement(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Description of a finite field F_q with q = p^e.
///
/// For e > 1 the field carries a monic irreducible modulus over F_p
/// (coefficients in ascending degree order, length e + 1) together with the
/// log/antilog tables derived from a fixed generator.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    q: u32,
    p: u32,
    e: u32,
    modulus: Option<Vec<u32>>,
    // log[a] for a in 1..q, antilog[i] = g^i for i in 0..q-1.
    log: Vec<u32>,
    antilog: Vec<u32>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

/// Factor q as p^e with p prime, if possible.
fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u32;
    while p.saturating_mul(p) <= q {
        if q.is_multiple_of(p) {
            let mut rest = q;
            let mut e = 0u32;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            return if rest == 1 { Some((p, e)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

/// Default irreducible modulus over F_p for extension degree e, ascending
/// coefficients. Covers the desk-scale fields; anything else must supply a
/// modulus explicitly.
fn default_modulus(p: u32, e: u32) -> Option<Vec<u32>> {
    match (p, e) {
        (2, 2) => Some(vec![1, 1, 1]),    // x^2 + x + 1
        (2, 3) => Some(vec![1, 1, 0, 1]), // x^3 + x + 1
        (3, 2) => Some(vec![1, 0, 1]),    // x^2 + 1
        _ => None,
    }
}

fn digits(value: u32, p: u32, e: u32) -> Vec<u32> {
    let mut v = value;
    let mut out = Vec::with_capacity(e as usize);
    for _ in 0..e {
        out.push(v % p);
        v /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Multiply two residue polynomials modulo the (monic) modulus over F_p.
fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let e = modulus.len() - 1;
    let mut prod = vec![0u32; 2 * e];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // Reduce: x^e = -(modulus[0..e]) since the modulus is monic.
    for k in (e..2 * e).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (j, &mj) in modulus.iter().take(e).enumerate() {
            let sub = (c * mj) % p;
            prod[k - e + j] = (prod[k - e + j] + p * p - sub) % p;
        }
    }
    prod.truncate(e);
    prod
}

impl FieldSpec {
    /// Field of size q with the default modulus when q is a proper prime power.
    pub fn new(q: u32) -> Result<FieldSpec, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotPrimePower { q })?;
        if e == 1 {
            return Self::build(q, p, e, None);
        }
        let modulus = default_modulus(p, e).ok_or_else(|| FieldError::UnsupportedField {
            q,
            reason: format!("no default modulus for p = {p}, e = {e}; supply one explicitly"),
        })?;
        Self::build(q, p, e, Some(modulus))
    }

    /// Field of size q over an explicit monic irreducible modulus
    /// (ascending coefficients, length e + 1).
    pub fn with_modulus(q: u32, modulus: Vec<u32>) -> Result<FieldSpec, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotPrimePower { q })?;
        if e == 1 {
            return Err(FieldError::UnsupportedField {
                q,
                reason: "prime fields take no modulus".into(),
            });
        }
        Self::build(q, p, e, Some(modulus))
    }

    fn build(q: u32, p: u32, e: u32, modulus: Option<Vec<u32>>) -> Result<FieldSpec, FieldError> {
        if e > 1 {
            if q > MAX_TABLE_Q || e > 3 {
                return Err(FieldError::UnsupportedField {
                    q,
                    reason: "extension degree above 3 or table size exceeded".into(),
                });
            }
            let m = modulus.as_ref().expect("extension field requires modulus");
            let bad = || FieldError::BadModulus {
                p,
                degree: e,
                modulus: m.clone(),
            };
            if m.len() != e as usize + 1 || m[e as usize] != 1 || m.iter().any(|&c| c >= p) {
                return Err(bad());
            }
            // Degree 2 or 3: irreducible over F_p iff it has no root.
            for x in 0..p {
                let mut val = 0u64;
                for &c in m.iter().rev() {
                    val = (val * x as u64 + c as u64) % p as u64;
                }
                if val == 0 {
                    return Err(bad());
                }
            }
        }
        let mut spec = FieldSpec {
            q,
            p,
            e,
            modulus,
            log: Vec::new(),
            antilog: Vec::new(),
        };
        spec.build_tables();
        Ok(spec)
    }

    /// Log/antilog tables from the first generator of the multiplicative group.
    fn build_tables(&mut self) {
        let q = self.q;
        for g in 1..q {
            let mut antilog = Vec::with_capacity(q as usize - 1);
            let mut cur = FqElement::ONE;
            let gen = FqElement(g);
            loop {
                antilog.push(cur.0);
                cur = self.mul_direct(cur, gen);
                if cur == FqElement::ONE {
                    break;
                }
            }
            if antilog.len() == q as usize - 1 {
                let mut log = vec![0u32; q as usize];
                for (i, &a) in antilog.iter().enumerate() {
                    log[a as usize] = i as u32;
                }
                self.log = log;
                self.antilog = antilog;
                return;
            }
        }
        unreachable!("multiplicative group of a finite field is cyclic");
    }

    /// Multiplication without tables, used only while building them.
    fn mul_direct(&self, a: FqElement, b: FqElement) -> FqElement {
        if self.e == 1 {
            FqElement(((a.0 as u64 * b.0 as u64) % self.q as u64) as u32)
        } else {
            let m = self.modulus.as_ref().unwrap();
            let prod = poly_mul_mod(
                &digits(a.0, self.p, self.e),
                &digits(b.0, self.p, self.e),
                m,
                self.p,
            );
            FqElement(undigits(&prod, self.p))
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    pub fn element(&self, value: u32) -> Result<FqElement, FieldError> {
        if value < self.q {
            Ok(FqElement(value))
        } else {
            Err(FieldError::ValueOutOfRange { value, q: self.q })
        }
    }

    /// All field elements in value order.
    pub fn elements(&self) -> impl Iterator<Item = FqElement> {
        (0..self.q).map(FqElement)
    }

    pub fn add(&self, a: FqElement, b: FqElement) -> FqElement {
        if self.e == 1 {
            let s = a.0 + b.0;
            FqElement(if s >= self.q { s - self.q } else { s })
        } else {
            // Digit-wise addition in base p.
            let (mut out, mut scale, mut x, mut y) = (0u32, 1u32, a.0, b.0);
            for _ in 0..self.e {
                out += ((x % self.p + y % self.p) % self.p) * scale;
                x /= self.p;
                y /= self.p;
                scale *= self.p;
            }
            FqElement(out)
        }
    }

    pub fn neg(&self, a: FqElement) -> FqElement {
        if self.e == 1 {
            FqElement(if a.0 == 0 { 0 } else { self.q - a.0 })
        } else {
            let (mut out, mut scale, mut x) = (0u32, 1u32, a.0);
            for _ in 0..self.e {
                let d = x % self.p;
                out += (if d == 0 { 0 } else { self.p - d }) * scale;
                x /= self.p;
                scale *= self.p;
            }
            FqElement(out)
        }
    }

    pub fn sub(&self, a: FqElement, b: FqElement) -> FqElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElement, b: FqElement) -> FqElement {
        if a.is_zero() || b.is_zero() {
            return FqElement::ZERO;
        }
        let order = self.q - 1;
        let idx = (self.log[a.0 as usize] + self.log[b.0 as usize]) % order;
        FqElement(self.antilog[idx as usize])
    }

    pub fn inv(&self, a: FqElement) -> Result<FqElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse { q: self.q });
        }
        let order = self.q - 1;
        let idx = (order - self.log[a.0 as usize]) % order;
        Ok(FqElement(self.antilog[idx as usize]))
    }

    pub fn vector(&self, values: &[u32]) -> Result<FqVector, FieldError> {
        let entries = values
            .iter()
            .map(|&v| self.element(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FqVector { entries })
    }

    pub fn zero_vector(&self, n: usize) -> FqVector {
        FqVector {
            entries: vec![FqElement::ZERO; n],
        }
    }

    pub fn vec_add(&self, u: &FqVector, v: &FqVector) -> FqVector {
        assert_eq!(u.len(), v.len(), "vector length mismatch");
        FqVector {
            entries: u
                .entries
                .iter()
                .zip(&v.entries)
                .map(|(&a, &b)| self.add(a, b))
                .collect(),
        }
    }

    pub fn vec_scale(&self, c: FqElement, v: &FqVector) -> FqVector {
        FqVector {
            entries: v.entries.iter().map(|&a| self.mul(c, a)).collect(),
        }
    }

    /// Standard bilinear form u . v.
    pub fn dot(&self, u: &FqVector, v: &FqVector) -> FqElement {
        assert_eq!(u.len(), v.len(), "vector length mismatch");
        u.entries
            .iter()
            .zip(&v.entries)
            .fold(FqElement::ZERO, |acc, (&a, &b)| {
                self.add(acc, self.mul(a, b))
            })
    }

    /// Sign character over F_2 on tuples: (-1)^(sum_i alpha_i . x_i).
    ///
    /// Only the binary field has a real-valued nontrivial character, which is
    /// all the unsymmetrized builders need; general q never touches
    /// characters because the subspace programs are already rational.
    pub fn char_value(&self, alpha: &[FqVector], x: &[FqVector]) -> Result<i32, FieldError> {
        if self.q != 2 {
            return Err(FieldError::CharRequiresBinary { q: self.q });
        }
        assert_eq!(alpha.len(), x.len(), "tuple shape mismatch");
        let mut acc = FqElement::ZERO;
        for (a, b) in alpha.iter().zip(x) {
            acc = self.add(acc, self.dot(a, b));
        }
        Ok(if acc.is_zero() { 1 } else { -1 })
    }
}

/// A length-n vector over F_q.
///
/// Ordering is lexicographic on entry values, which fixes the canonical
/// enumeration order used by the subspace lattice.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FqVector {
    entries: Vec<FqElement>,
}

impl FqVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> FqElement {
        self.entries[i]
    }

    pub fn entries(&self) -> &[FqElement] {
        &self.entries
    }

    pub fn set_entry(&mut self, i: usize, v: FqElement) {
        self.entries[i] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Number of nonzero entries.
    pub fn hamming_weight(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_zero()).count()
    }

    /// Entries as a digit string over the alphabet of F_q (hex digits).
    pub fn digit_string(&self) -> String {
        self.entries
            .iter()
            .map(|e| std::char::from_digit(e.value(), 16).expect("q <= 16 digit"))
            .collect()
    }
}
