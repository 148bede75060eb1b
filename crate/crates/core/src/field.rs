//! Exact arithmetic in the tower `F_p ⊂ F_q = F_{p^n} ⊂ F_{q^m}`.
//!
//! Elements of the top field are written as polynomials in `Y` of degree
//! below `m` whose coefficients are elements of `F_q`, which in turn are
//! polynomials in `X` of degree below `n` over `F_p`. The canonical index of
//! an element is the integer whose base-`p` digits are these `n·m`
//! coefficients, least significant first. The embedded copy of `F_q` is
//! therefore exactly the set of indices below `q`, so [`SubElement`] and
//! [`Element`] share one index space.
//!
//! Both moduli are chosen canonically (the monic irreducible minimising the
//! integer formed by its lower coefficients), so `(p, n, m)` determines the
//! context. Construction uses schoolbook polynomial arithmetic once; after
//! that every operation is a table lookup (discrete logarithms for products,
//! Zech logarithms or XOR for sums).

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

/// Default bound on `q^m`.
pub const DEFAULT_MAX_ORDER: u64 = 65_536;
/// Absolute bound on `q^m` regardless of overrides; indices must fit the tables.
pub const HARD_MAX_ORDER: u64 = 1 << 24;
/// Environment variable consulted by [`size_cap_from_env`].
pub const SIZE_CAP_ENV: &str = "LTPERM_MAX_FIELD_SIZE";

const NO_LOG: u32 = u32::MAX;

/// An element of the top field `F_{q^m}`, identified by its canonical index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(pub(crate) u32);

/// An element of the intermediate field `F_q`, identified by its canonical index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubElement(pub(crate) u32);

impl Element {
    pub const ZERO: Element = Element(0);
    pub const ONE: Element = Element(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl SubElement {
    pub const ZERO: SubElement = SubElement(0);
    pub const ONE: SubElement = SubElement(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Anything carrying a canonical field index; lets table utilities work at
/// either level of the tower.
pub trait Indexed: Copy {
    fn index(self) -> u32;
}

impl Indexed for Element {
    fn index(self) -> u32 {
        self.0
    }
}

impl Indexed for SubElement {
    fn index(self) -> u32 {
        self.0
    }
}

impl From<SubElement> for Element {
    fn from(c: SubElement) -> Self {
        Element(c.0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for SubElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degrees must be positive (n = {n}, m = {m})")]
    ZeroDegree { n: u64, m: u64 },
    #[error("field of order {p}^({n}*{m}) exceeds the size cap {cap}")]
    TooLarge { p: u64, n: u64, m: u64, cap: u64 },
    #[error("inversion of zero")]
    ZeroInverse,
    #[error("index {index} out of range for a field with {order} elements")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("malformed coefficients: {0}")]
    MalformedCoeffs(String),
    #[error("element {0} does not lie in the subfield F_q")]
    NotInSubfield(Element),
    #[error("internal arithmetic error: {0}")]
    Internal(String),
}

/// Which level of the tower a primitive element is requested for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// `F_q`, returned embedded in `F_{q^m}`.
    Inner,
    /// `F_{q^m}`.
    Outer,
}

/// Reads the size cap from [`SIZE_CAP_ENV`], falling back to [`DEFAULT_MAX_ORDER`].
pub fn size_cap_from_env() -> u64 {
    std::env::var(SIZE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .unwrap_or(DEFAULT_MAX_ORDER)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Immutable description of the tower `F_p ⊂ F_q ⊂ F_{q^m}` with its lookup
/// tables. Cloning is cheap.
#[derive(Clone)]
pub struct FieldCtx {
    t: Arc<Tables>,
}

struct Tables {
    p: u32,
    n: usize,
    m: usize,
    q: u32,
    order: u32,
    f_mod: Vec<u32>,
    g_mod: Vec<u32>,
    /// `p^i` for `i < n·m`.
    digit_weight: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    frob: Vec<u32>,
    trace: Vec<u32>,
    generator: u32,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.t.p)
            .field("n", &self.t.n)
            .field("m", &self.t.m)
            .field("f_mod", &self.t.f_mod)
            .field("g_mod", &self.t.g_mod)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.t, &other.t) || (self.t.p == other.t.p && self.t.n == other.t.n && self.t.m == other.t.m)
    }
}

impl Eq for FieldCtx {}

/// Builds the canonical tower with the default size cap.
pub fn make_field(p: u64, n: u64, m: u64) -> Result<FieldCtx, FieldError> {
    FieldCtx::new(p, n, m)
}

impl FieldCtx {
    pub fn new(p: u64, n: u64, m: u64) -> Result<Self, FieldError> {
        Self::with_cap(p, n, m, DEFAULT_MAX_ORDER)
    }

    pub fn with_cap(p: u64, n: u64, m: u64, cap: u64) -> Result<Self, FieldError> {
        if n == 0 || m == 0 {
            return Err(FieldError::ZeroDegree { n, m });
        }
        let too_large = FieldError::TooLarge { p, n, m, cap };
        let cap = cap.min(HARD_MAX_ORDER);
        // Reject absurd parameters before the primality scan.
        if p > cap {
            return Err(too_large);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let digits = n.checked_mul(m).ok_or(too_large.clone())?;
        let mut order: u64 = 1;
        for _ in 0..digits {
            order = order.checked_mul(p).ok_or(too_large.clone())?;
            if order > cap {
                return Err(too_large);
            }
        }
        Ok(FieldCtx {
            t: Arc::new(Tables::build(p as u32, n as usize, m as usize)?),
        })
    }

    pub fn p(&self) -> u32 {
        self.t.p
    }

    pub fn n(&self) -> usize {
        self.t.n
    }

    pub fn m(&self) -> usize {
        self.t.m
    }

    /// Size of the intermediate field, `p^n`.
    pub fn q(&self) -> u32 {
        self.t.q
    }

    /// Size of the top field, `q^m`.
    pub fn order(&self) -> u32 {
        self.t.order
    }

    /// Inner modulus over `F_p`, monic, lowest coefficient first.
    pub fn f_mod(&self) -> &[u32] {
        &self.t.f_mod
    }

    /// Outer modulus over `F_q`, monic, lowest coefficient first.
    pub fn g_mod(&self) -> Vec<SubElement> {
        self.t.g_mod.iter().map(|&c| SubElement(c)).collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + Clone {
        (0..self.t.order).map(Element)
    }

    pub fn sub_elements(&self) -> impl Iterator<Item = SubElement> + Clone {
        (0..self.t.q).map(SubElement)
    }

    pub fn element(&self, index: u64) -> Result<Element, FieldError> {
        if index < self.t.order as u64 {
            Ok(Element(index as u32))
        } else {
            Err(FieldError::IndexOutOfRange {
                index,
                order: self.t.order as u64,
            })
        }
    }

    pub fn sub_element(&self, index: u64) -> Result<SubElement, FieldError> {
        if index < self.t.q as u64 {
            Ok(SubElement(index as u32))
        } else {
            Err(FieldError::IndexOutOfRange {
                index,
                order: self.t.q as u64,
            })
        }
    }

    /// `F_p` coefficients of an element of `F_q`, lowest first.
    pub fn sub_coeffs(&self, c: SubElement) -> Vec<u32> {
        let mut v = c.0;
        (0..self.t.n)
            .map(|_| {
                let d = v % self.t.p;
                v /= self.t.p;
                d
            })
            .collect()
    }

    pub fn sub_from_coeffs(&self, coeffs: &[u64]) -> Result<SubElement, FieldError> {
        if coeffs.len() != self.t.n {
            return Err(FieldError::MalformedCoeffs(format!(
                "expected {} coefficients over F_{}, got {}",
                self.t.n,
                self.t.p,
                coeffs.len()
            )));
        }
        let mut index = 0u32;
        for (i, &c) in coeffs.iter().enumerate() {
            if c >= self.t.p as u64 {
                return Err(FieldError::MalformedCoeffs(format!(
                    "coefficient {c} is not reduced mod {}",
                    self.t.p
                )));
            }
            index += c as u32 * self.t.digit_weight[i];
        }
        Ok(SubElement(index))
    }

    /// Coefficients of `x` over `F_q` in the power basis `1, Y, …, Y^{m-1}`.
    pub fn coords(&self, x: Element) -> Vec<SubElement> {
        let mut v = x.0;
        (0..self.t.m)
            .map(|_| {
                let d = v % self.t.q;
                v /= self.t.q;
                SubElement(d)
            })
            .collect()
    }

    pub fn from_coords(&self, coords: &[SubElement]) -> Element {
        debug_assert_eq!(coords.len(), self.t.m);
        let mut index = 0u32;
        let mut w = 1u32;
        for c in coords {
            index += c.0 * w;
            w = w.wrapping_mul(self.t.q);
        }
        Element(index)
    }

    /// Nested coefficient form `[[c_0..c_{n-1}], …]`, little-endian in both layers.
    pub fn coeffs(&self, x: Element) -> Vec<Vec<u32>> {
        self.coords(x).into_iter().map(|c| self.sub_coeffs(c)).collect()
    }

    pub fn from_coeffs(&self, coeffs: &[Vec<u64>]) -> Result<Element, FieldError> {
        if coeffs.len() != self.t.m {
            return Err(FieldError::MalformedCoeffs(format!(
                "expected {} coefficients over F_q, got {}",
                self.t.m,
                coeffs.len()
            )));
        }
        let coords = coeffs
            .iter()
            .map(|c| self.sub_from_coeffs(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.from_coords(&coords))
    }

    pub fn embed(&self, c: SubElement) -> Element {
        Element(c.0)
    }

    pub fn project(&self, x: Element) -> Result<SubElement, FieldError> {
        if x.0 < self.t.q {
            Ok(SubElement(x.0))
        } else {
            Err(FieldError::NotInSubfield(x))
        }
    }

    pub fn in_subfield(&self, x: Element) -> bool {
        x.0 < self.t.q
    }

    /// The integer `c·1` in the prime field, embedded.
    pub fn from_int(&self, c: i64) -> Element {
        Element(c.rem_euclid(self.t.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        let t = &*self.t;
        if t.p == 2 {
            return Element(a.0 ^ b.0);
        }
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let la = t.log[a.0 as usize];
        let lb = t.log[b.0 as usize];
        let d = if lb >= la { lb - la } else { lb + (t.order - 1) - la };
        let z = t.zech[d as usize];
        if z == NO_LOG {
            Element::ZERO
        } else {
            Element(t.exp[(la + z) as usize])
        }
    }

    #[inline]
    pub fn neg(&self, a: Element) -> Element {
        let t = &*self.t;
        if t.p == 2 || a.0 == 0 {
            return a;
        }
        Element(t.exp[(t.log[a.0 as usize] + (t.order - 1) / 2) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Element, b: Element) -> Element {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a.0 == 0 || b.0 == 0 {
            return Element::ZERO;
        }
        let t = &*self.t;
        Element(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Element) -> Result<Element, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let t = &*self.t;
        let l = t.log[a.0 as usize];
        Ok(Element(t.exp[((t.order - 1 - l) % (t.order - 1)) as usize]))
    }

    pub fn div(&self, a: Element, b: Element) -> Result<Element, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Element, e: u64) -> Element {
        if e == 0 {
            return Element::ONE;
        }
        if a.0 == 0 {
            return Element::ZERO;
        }
        let t = &*self.t;
        let qm1 = (t.order - 1) as u64;
        let l = (t.log[a.0 as usize] as u64 * (e % qm1)) % qm1;
        Element(t.exp[l as usize])
    }

    /// `c·a` for `c` in the prime field.
    pub fn scale_int(&self, c: u32, a: Element) -> Element {
        self.mul(Element(c % self.t.p), a)
    }

    #[inline]
    pub fn fq_add(&self, a: SubElement, b: SubElement) -> SubElement {
        SubElement(self.add(a.into(), b.into()).0)
    }

    #[inline]
    pub fn fq_sub(&self, a: SubElement, b: SubElement) -> SubElement {
        SubElement(self.sub(a.into(), b.into()).0)
    }

    #[inline]
    pub fn fq_neg(&self, a: SubElement) -> SubElement {
        SubElement(self.neg(a.into()).0)
    }

    #[inline]
    pub fn fq_mul(&self, a: SubElement, b: SubElement) -> SubElement {
        SubElement(self.mul(a.into(), b.into()).0)
    }

    pub fn fq_inv(&self, a: SubElement) -> Result<SubElement, FieldError> {
        Ok(SubElement(self.inv(a.into())?.0))
    }

    pub fn fq_pow(&self, a: SubElement, e: u64) -> SubElement {
        SubElement(self.pow(a.into(), e).0)
    }

    /// `c·x` for `c ∈ F_q`.
    #[inline]
    pub fn scale(&self, c: SubElement, x: Element) -> Element {
        self.mul(c.into(), x)
    }

    /// `x^{q^i}`.
    #[inline]
    pub fn frobenius(&self, x: Element, i: usize) -> Element {
        let mut y = x.0;
        for _ in 0..(i % self.t.m) {
            y = self.t.frob[y as usize];
        }
        Element(y)
    }

    /// Relative trace `x + x^q + … + x^{q^{m-1}}`.
    #[inline]
    pub fn trace(&self, x: Element) -> SubElement {
        SubElement(self.t.trace[x.0 as usize])
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, x: Element) -> Option<u64> {
        if x.0 == 0 {
            return None;
        }
        let qm1 = (self.t.order - 1) as u64;
        let l = self.t.log[x.0 as usize] as u64;
        Some(qm1 / l.gcd(&qm1))
    }

    /// The element of smallest canonical index generating the multiplicative
    /// group of the requested level.
    pub fn find_primitive(&self, level: Level) -> Element {
        match level {
            Level::Outer => Element(self.t.generator),
            Level::Inner => {
                let target = (self.t.q - 1) as u64;
                (1..self.t.q)
                    .map(Element)
                    .find(|&x| self.mult_order(x) == Some(target))
                    .expect("every finite field has a primitive element")
            }
        }
    }

    pub fn is_primitive(&self, x: Element) -> bool {
        self.mult_order(x) == Some((self.t.order - 1) as u64)
    }

    /// Elements of `F_q` as a slice-friendly vector, embedded.
    pub fn subfield(&self) -> Vec<Element> {
        (0..self.t.q).map(Element).collect()
    }

    /// The `F_p`-basis `p^i` (i.e. the unit coefficient vectors) of `F_{q^m}`.
    pub fn prime_basis(&self) -> Vec<Element> {
        self.t.digit_weight.iter().map(|&w| Element(w)).collect()
    }

    /// Table of an `F_p`-linear map, built from its values on [`Self::prime_basis`].
    pub fn linear_table(&self, on_basis: &[Element]) -> Vec<Element> {
        let t = &*self.t;
        debug_assert_eq!(on_basis.len(), t.digit_weight.len());
        let mut table = vec![Element::ZERO; t.order as usize];
        for i in 1..t.order {
            // Lowest nonzero base-p digit position of i.
            let mut pos = 0usize;
            let mut v = i;
            while v % t.p == 0 {
                v /= t.p;
                pos += 1;
            }
            let prev = (i - t.digit_weight[pos]) as usize;
            table[i as usize] = self.add(table[prev], on_basis[pos]);
        }
        table
    }

    /// Digit-wise addition, independent of the logarithm tables.
    pub fn add_by_digits(&self, a: Element, b: Element) -> Element {
        let t = &*self.t;
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        for &w in &t.digit_weight {
            out += ((x % t.p + y % t.p) % t.p) * w;
            x /= t.p;
            y /= t.p;
        }
        Element(out)
    }

    /// Product computed by schoolbook polynomial arithmetic in both layers,
    /// independent of the logarithm tables.
    pub fn mul_by_polynomials(&self, a: Element, b: Element) -> Element {
        let t = &*self.t;
        let inner = SlowInner {
            p: t.p,
            n: t.n,
            f_mod: &t.f_mod,
        };
        let outer = QuotientRing {
            base: &inner,
            modulus: &t.g_mod,
        };
        Element(outer.mul(a.0, b.0))
    }
}

// ---------------------------------------------------------------------------
// Construction-time arithmetic
// ---------------------------------------------------------------------------

/// A field whose elements are the indices `0..size`.
trait BaseField {
    fn size(&self) -> u32;
    fn add(&self, a: u32, b: u32) -> u32;
    fn neg(&self, a: u32) -> u32;
    fn mul(&self, a: u32, b: u32) -> u32;

    fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }
}

struct PrimeField {
    p: u32,
}

impl BaseField for PrimeField {
    fn size(&self) -> u32 {
        self.p
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }
    fn neg(&self, a: u32) -> u32 {
        (self.p - a) % self.p
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }
}

/// `F_p[X]/(f)` by schoolbook arithmetic, used as the base of the outer layer
/// when no tables exist yet.
struct SlowInner<'a> {
    p: u32,
    n: usize,
    f_mod: &'a [u32],
}

impl BaseField for SlowInner<'_> {
    fn size(&self) -> u32 {
        self.p.pow(self.n as u32)
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        digit_add(self.p, self.n, a, b)
    }
    fn neg(&self, a: u32) -> u32 {
        digit_neg(self.p, self.n, a)
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        let pf = PrimeField { p: self.p };
        QuotientRing {
            base: &pf,
            modulus: self.f_mod,
        }
        .mul(a, b)
    }
}

/// `F_q` with discrete-log tables, used as the base of the outer layer.
struct TabledInner {
    p: u32,
    n: usize,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl BaseField for TabledInner {
    fn size(&self) -> u32 {
        self.p.pow(self.n as u32)
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        digit_add(self.p, self.n, a, b)
    }
    fn neg(&self, a: u32) -> u32 {
        digit_neg(self.p, self.n, a)
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }
}

fn digit_add(p: u32, digits: usize, a: u32, b: u32) -> u32 {
    let (mut x, mut y) = (a, b);
    let mut out = 0u32;
    let mut w = 1u32;
    for _ in 0..digits {
        out += ((x % p + y % p) % p) * w;
        x /= p;
        y /= p;
        w = w.wrapping_mul(p);
    }
    out
}

fn digit_neg(p: u32, digits: usize, a: u32) -> u32 {
    let mut x = a;
    let mut out = 0u32;
    let mut w = 1u32;
    for _ in 0..digits {
        out += ((p - x % p) % p) * w;
        x /= p;
        w = w.wrapping_mul(p);
    }
    out
}

/// `base[Z]/(modulus)` with elements encoded as base-`size` integers.
struct QuotientRing<'a, B: BaseField> {
    base: &'a B,
    modulus: &'a [u32],
}

impl<B: BaseField> QuotientRing<'_, B> {
    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn decode(&self, x: u32) -> Vec<u32> {
        let s = self.base.size();
        let mut v = x;
        (0..self.degree())
            .map(|_| {
                let d = v % s;
                v /= s;
                d
            })
            .collect()
    }

    fn encode(&self, c: &[u32]) -> u32 {
        let s = self.base.size();
        c.iter().rev().fold(0u32, |acc, &d| acc * s + d)
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        let (a, b) = (self.decode(a), self.decode(b));
        let prod = poly_mul(self.base, &a, &b);
        let r = poly_rem(self.base, &prod, self.modulus);
        self.encode(&r)
    }

    fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

fn poly_mul<B: BaseField>(f: &B, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m`, padded to `deg m` coefficients.
fn poly_rem<B: BaseField>(f: &B, a: &[u32], m: &[u32]) -> Vec<u32> {
    let d = m.len() - 1;
    let mut r = a.to_vec();
    if r.len() < d {
        r.resize(d, 0);
        return r;
    }
    for top in (d..r.len()).rev() {
        let c = r[top];
        if c == 0 {
            continue;
        }
        for (i, &mi) in m.iter().enumerate().take(d + 1) {
            let k = top - d + i;
            r[k] = f.sub(r[k], f.mul(c, mi));
        }
    }
    r.truncate(d);
    r
}

fn is_zero_poly(a: &[u32]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Monic polynomial of degree `d` whose lower coefficients are the base-`size`
/// digits of `code`.
fn monic_from_code(size: u32, d: usize, mut code: u64) -> Vec<u32> {
    let mut c = Vec::with_capacity(d + 1);
    for _ in 0..d {
        c.push((code % size as u64) as u32);
        code /= size as u64;
    }
    c.push(1);
    c
}

/// Trial division by every monic polynomial of degree at most `deg/2`.
fn is_irreducible<B: BaseField>(f: &B, poly: &[u32]) -> bool {
    let d = poly.len() - 1;
    let s = f.size() as u64;
    for e in 1..=d / 2 {
        for code in 0..s.pow(e as u32) {
            let g = monic_from_code(f.size(), e, code);
            if is_zero_poly(&poly_rem(f, poly, &g)) {
                return false;
            }
        }
    }
    true
}

/// Canonical modulus: the monic irreducible of degree `d` with the smallest
/// integer `Σ c_i s^i` over its lower coefficients.
fn canonical_irreducible<B: BaseField>(f: &B, d: usize) -> Result<Vec<u32>, FieldError> {
    let s = f.size() as u64;
    let total = s
        .checked_pow(d as u32)
        .ok_or_else(|| FieldError::Internal("modulus search space overflow".into()))?;
    (0..total)
        .map(|code| monic_from_code(f.size(), d, code))
        .find(|g| is_irreducible(f, g))
        .ok_or_else(|| FieldError::Internal(format!("no irreducible of degree {d} found")))
}

/// Smallest-index generator of the unit group of `ring` plus its exp/log tables.
/// `exp` has length `2(size-1)` so sums of two logarithms index it directly.
fn log_tables<B: BaseField>(ring: &QuotientRing<'_, B>) -> Result<(u32, Vec<u32>, Vec<u32>), FieldError> {
    let size = (ring.base.size() as u64).pow(ring.degree() as u32);
    let qm1 = size - 1;
    let factors = prime_factors(qm1);
    let generator = (1..size as u32)
        .find(|&x| factors.iter().all(|&r| ring.pow(x, qm1 / r) != 1))
        .ok_or_else(|| FieldError::Internal("no primitive element found".into()))?;
    let mut exp = vec![0u32; 2 * qm1 as usize];
    let mut log = vec![NO_LOG; size as usize];
    let mut cur = 1u32;
    for i in 0..qm1 as usize {
        if log[cur as usize] != NO_LOG {
            return Err(FieldError::Internal("generator has short order".into()));
        }
        exp[i] = cur;
        exp[i + qm1 as usize] = cur;
        log[cur as usize] = i as u32;
        cur = ring.mul(cur, generator);
    }
    if cur != 1 {
        return Err(FieldError::Internal("generator order mismatch".into()));
    }
    Ok((generator, exp, log))
}

impl Tables {
    fn build(p: u32, n: usize, m: usize) -> Result<Self, FieldError> {
        let prime = PrimeField { p };
        let f_mod = if n == 1 {
            vec![0, 1]
        } else {
            canonical_irreducible(&prime, n)?
        };
        let inner_ring = QuotientRing {
            base: &prime,
            modulus: &f_mod,
        };
        let (_, inner_exp, inner_log) = log_tables(&inner_ring)?;
        let inner = TabledInner {
            p,
            n,
            exp: inner_exp,
            log: inner_log,
        };
        let q = inner.size();
        let g_mod = if m == 1 {
            vec![0, 1]
        } else {
            canonical_irreducible(&inner, m)?
        };
        if !is_irreducible(&prime, &f_mod) || !is_irreducible(&inner, &g_mod) {
            return Err(FieldError::Internal("modulus failed irreducibility".into()));
        }
        let outer_ring = QuotientRing {
            base: &inner,
            modulus: &g_mod,
        };
        let (generator, exp, log) = log_tables(&outer_ring)?;
        let order = q.pow(m as u32);
        let digit_weight: Vec<u32> = (0..n * m).map(|i| p.pow(i as u32)).collect();

        let mut t = Tables {
            p,
            n,
            m,
            q,
            order,
            f_mod,
            g_mod,
            digit_weight,
            exp,
            log,
            zech: Vec::new(),
            frob: Vec::new(),
            trace: Vec::new(),
            generator,
        };
        if p != 2 {
            let qm1 = order - 1;
            t.zech = (0..qm1)
                .map(|d| {
                    let s = digit_add(p, n * m, 1, t.exp[d as usize]);
                    if s == 0 {
                        NO_LOG
                    } else {
                        t.log[s as usize]
                    }
                })
                .collect();
        }
        let mut ctx = FieldCtx { t: Arc::new(t) };
        let frob: Vec<u32> = (0..order).map(|x| ctx.pow(Element(x), q as u64).0).collect();
        tables_mut(&mut ctx)?.frob = frob;
        let mut trace = Vec::with_capacity(order as usize);
        for x in 0..order {
            let mut acc = Element::ZERO;
            let mut y = Element(x);
            for _ in 0..m {
                acc = ctx.add(acc, y);
                y = Element(ctx.t.frob[y.0 as usize]);
            }
            if acc.0 >= q {
                return Err(FieldError::Internal(format!("trace of {x} left the subfield")));
            }
            trace.push(acc.0);
        }
        tables_mut(&mut ctx)?.trace = trace;
        Arc::try_unwrap(ctx.t).map_err(|_| FieldError::Internal("shared tables".into()))
    }
}

fn tables_mut(ctx: &mut FieldCtx) -> Result<&mut Tables, FieldError> {
    Arc::get_mut(&mut ctx.t).ok_or_else(|| FieldError::Internal("shared tables".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> FieldCtx {
        make_field(3, 1, 2).unwrap()
    }

    #[test]
    fn canonical_moduli() {
        assert_eq!(
            make_field(2, 1, 2).unwrap().g_mod(),
            vec![SubElement(1), SubElement(1), SubElement(1)]
        );
        assert_eq!(
            make_field(3, 1, 2).unwrap().g_mod(),
            vec![SubElement(1), SubElement(0), SubElement(1)]
        );
        assert_eq!(
            make_field(2, 1, 3).unwrap().g_mod(),
            vec![SubElement(1), SubElement(1), SubElement(0), SubElement(1)]
        );
        assert_eq!(make_field(2, 1, 2).unwrap().f_mod(), &[0, 1]);
        // F_4 = F_2[X]/(X^2+X+1) as the inner field of F_16 over F_4.
        assert_eq!(make_field(2, 2, 2).unwrap().f_mod(), &[1, 1, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_field(4, 1, 2).unwrap_err(), FieldError::NotPrime(4));
        assert!(matches!(make_field(2, 1, 17), Err(FieldError::TooLarge { .. })));
        assert!(matches!(make_field(3, 0, 2), Err(FieldError::ZeroDegree { .. })));
        assert!(FieldCtx::with_cap(2, 1, 17, 1 << 17).is_ok());
    }

    #[test]
    fn f9_arithmetic() {
        let k = f9();
        let alpha = k.element(3).unwrap();
        let two = k.from_int(2);
        assert_eq!(k.mul(alpha, alpha), two);
        let one_plus_alpha = k.add(Element::ONE, alpha);
        assert_eq!(k.pow(one_plus_alpha, 4), two);
        assert_eq!(k.inv(two).unwrap(), two);
        assert_eq!(k.inv(Element::ZERO), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn f9_frobenius_and_trace() {
        let k = f9();
        let alpha = k.element(3).unwrap();
        let two_alpha = k.scale_int(2, alpha);
        assert_eq!(k.frobenius(alpha, 1), two_alpha);
        let one_plus_alpha = k.add(Element::ONE, alpha);
        assert_eq!(k.frobenius(one_plus_alpha, 1), k.add(Element::ONE, two_alpha));
        for x in k.elements() {
            assert_eq!(k.frobenius(x, 2), x);
        }
        assert_eq!(k.trace(Element::ONE), SubElement(2));
        assert_eq!(k.trace(alpha), SubElement(0));
        assert_eq!(k.trace(one_plus_alpha), SubElement(2));
    }

    #[test]
    fn primitive_elements() {
        let k = f9();
        assert_eq!(k.find_primitive(Level::Outer), Element(4));
        assert_eq!(make_field(2, 1, 1).unwrap().find_primitive(Level::Inner), Element::ONE);
        assert_eq!(make_field(2, 1, 2).unwrap().find_primitive(Level::Outer), Element(2));
        let k = make_field(2, 2, 2).unwrap();
        let g = k.find_primitive(Level::Inner);
        assert!(k.in_subfield(g));
        assert_eq!(k.mult_order(g), Some(3));
    }

    #[test]
    fn embed_project() {
        let k = f9();
        assert_eq!(k.embed(SubElement(0)), Element::ZERO);
        assert_eq!(k.project(k.embed(SubElement(2))).unwrap(), SubElement(2));
        assert!(k.project(Element(3)).is_err());
        for c in k.sub_elements() {
            assert_eq!(k.frobenius(k.embed(c), 1), k.embed(c));
        }
    }

    #[test]
    fn coefficient_round_trip() {
        let k = make_field(3, 2, 2).unwrap();
        for x in k.elements() {
            let c: Vec<Vec<u64>> = k
                .coeffs(x)
                .into_iter()
                .map(|v| v.into_iter().map(u64::from).collect())
                .collect();
            assert_eq!(k.from_coeffs(&c).unwrap(), x);
        }
        assert!(k.from_coeffs(&[vec![0, 0]]).is_err());
        assert!(k.from_coeffs(&[vec![0, 3], vec![0, 0]]).is_err());
    }

    #[test]
    fn tables_match_schoolbook() {
        for &(p, n, m) in &[(2, 1, 4), (3, 1, 3), (2, 2, 2), (3, 2, 2), (5, 1, 2), (2, 3, 2)] {
            let k = make_field(p, n, m).unwrap();
            for a in k.elements() {
                for b in k.elements() {
                    assert_eq!(k.mul(a, b), k.mul_by_polynomials(a, b), "({p},{n},{m}) {a}*{b}");
                    assert_eq!(k.add(a, b), k.add_by_digits(a, b));
                }
            }
        }
    }

    #[test]
    fn linear_table_reproduces_frobenius() {
        let k = make_field(3, 2, 2).unwrap();
        let basis: Vec<Element> = k.prime_basis().into_iter().map(|e| k.frobenius(e, 1)).collect();
        let table = k.linear_table(&basis);
        for x in k.elements() {
            assert_eq!(table[x.0 as usize], k.frobenius(x, 1));
        }
    }
}
