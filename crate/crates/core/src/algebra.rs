//! Exact arithmetic in a small finite field `F_q` and in the polynomial ring `F_q[Y]`.
//!
//! Field elements are integer codes in `[0, q)`. The base-`p` digits of a code are the
//! coordinates of the element in the polynomial basis `1, g, g^2, ...` of `F_q` over `F_p`,
//! where `g` is a root of the field modulus. Multiplication goes through log/antilog
//! tables built once per field, addition through a full `q x q` table.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1024;

/// Degree of the zero polynomial. Strictly below every degree that can occur and
/// absorbing under the additions performed in degree formulas.
pub const NEG_INF: i64 = i64::MIN / 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("inversion of zero")]
    InversionOfZero,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("coefficient {value} out of range for q = {q}")]
    CoefficientOutOfRange { value: u64, q: u32 },
    #[error("invalid field: {0}")]
    InvalidField(String),
}

/// An element of `F_q`, stored as its code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Builds an element from its code. The caller guarantees `code < q`.
    pub const fn from_code(code: u16) -> Self {
        FieldElement(code)
    }

    pub const fn code(self) -> u16 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The finite field `F_q`, `q = p^e <= 1024`, with its arithmetic tables.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    e: u32,
    q: u32,
    /// Monic irreducible polynomial over `F_p`, lowest degree first, length `e + 1`.
    modulus: Vec<u32>,
    add: Vec<u16>,
    neg: Vec<u16>,
    /// `exp[i] = g^i` for `i < 2(q-1)`, doubled so that log sums need no reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` modulo the monic polynomial `m`, both over `F_p`, lowest degree first.
fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        if lead != 0 {
            let shift = r.len() - 1 - dm;
            for (i, &c) in m.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn fp_is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    // Trial division by every monic polynomial of degree 1..=deg/2.
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut n = idx;
            for _ in 0..d {
                div.push((n % p as u64) as u32);
                n /= p as u64;
            }
            div.push(1);
            if fp_rem(m, &div, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// The field of prime order `p`.
    pub fn prime(p: u32) -> Result<Self, AlgebraError> {
        Self::new(p, 1)
    }

    /// `F_{p^e}` with the first monic irreducible modulus of degree `e` in code order.
    pub fn new(p: u32, e: u32) -> Result<Self, AlgebraError> {
        Self::check_order(p, e)?;
        if e == 1 {
            return Self::with_modulus(p, 1, &[0, 1]);
        }
        let count = (p as u64).pow(e);
        for idx in 0..count {
            let mut m = Vec::with_capacity(e as usize + 1);
            let mut n = idx;
            for _ in 0..e {
                m.push((n % p as u64) as u32);
                n /= p as u64;
            }
            m.push(1);
            if m[0] != 0 && fp_is_irreducible(&m, p) {
                return Self::with_modulus(p, e, &m);
            }
        }
        Err(AlgebraError::InvalidField(format!("no irreducible polynomial of degree {e} over F_{p}")))
    }

    /// Parses `q` as a prime power and builds the field with the default modulus.
    pub fn from_order(q: u32) -> Result<Self, AlgebraError> {
        let (p, e) = prime_power(q).ok_or_else(|| AlgebraError::InvalidField(format!("{q} is not a prime power")))?;
        Self::new(p, e)
    }

    fn check_order(p: u32, e: u32) -> Result<u32, AlgebraError> {
        if !is_prime(p) {
            return Err(AlgebraError::InvalidField(format!("{p} is not prime")));
        }
        if e == 0 {
            return Err(AlgebraError::InvalidField("extension degree must be at least 1".into()));
        }
        let q = (p as u64).checked_pow(e).filter(|&q| q <= MAX_ORDER as u64);
        q.map(|q| q as u32)
            .ok_or_else(|| AlgebraError::InvalidField(format!("{p}^{e} exceeds {MAX_ORDER}")))
    }

    /// `F_{p^e}` with an explicit monic modulus over `F_p` (lowest degree first, length `e + 1`).
    /// The modulus is ignored for `e = 1`.
    pub fn with_modulus(p: u32, e: u32, modulus: &[u32]) -> Result<Self, AlgebraError> {
        let q = Self::check_order(p, e)?;
        let modulus: Vec<u32> = if e == 1 {
            vec![0, 1]
        } else {
            if modulus.len() != e as usize + 1 || modulus.iter().any(|&c| c >= p) || modulus[e as usize] != 1 {
                return Err(AlgebraError::InvalidField(format!(
                    "modulus must be a monic polynomial of degree {e} over F_{p}"
                )));
            }
            if !fp_is_irreducible(modulus, p) {
                return Err(AlgebraError::InvalidField("modulus is reducible".into()));
            }
            modulus.to_vec()
        };

        let digits = |mut x: u32| -> Vec<u32> {
            let mut d = Vec::with_capacity(e as usize);
            for _ in 0..e {
                d.push(x % p);
                x /= p;
            }
            d
        };
        let encode = |d: &[u32]| -> u32 { d.iter().rev().fold(0, |acc, &c| acc * p + c) };

        let mut add = vec![0u16; (q * q) as usize];
        let mut neg = vec![0u16; q as usize];
        for x in 0..q {
            let dx = digits(x);
            let nd: Vec<u32> = dx.iter().map(|&c| (p - c) % p).collect();
            neg[x as usize] = encode(&nd) as u16;
            for y in 0..q {
                let dy = digits(y);
                let s: Vec<u32> = dx.iter().zip(&dy).map(|(&a, &b)| (a + b) % p).collect();
                add[(x * q + y) as usize] = encode(&s) as u16;
            }
        }

        let slow_mul = |x: u32, y: u32| -> u32 {
            let dx = digits(x);
            let dy = digits(y);
            let mut prod = vec![0u32; 2 * e as usize];
            for (i, &a) in dx.iter().enumerate() {
                for (j, &b) in dy.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + a * b) % p;
                }
            }
            let mut r = fp_rem(&prod, &modulus, p);
            r.resize(e as usize, 0);
            encode(&r)
        };

        // Find a generator of the multiplicative group.
        let order = q - 1;
        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u16; q as usize];
        let mut found = false;
        for g in 1..q {
            let mut x = 1u32;
            let mut seen = 0;
            let mut powers = Vec::with_capacity(order as usize);
            loop {
                powers.push(x as u16);
                x = slow_mul(x, g);
                seen += 1;
                if x == 1 || seen > order {
                    break;
                }
            }
            if seen == order {
                for (i, &v) in powers.iter().enumerate() {
                    exp[i] = v;
                    exp[i + order as usize] = v;
                    log[v as usize] = i as u16;
                }
                found = true;
                break;
            }
        }
        if !found {
            return Err(AlgebraError::InvalidField("no primitive element found".into()));
        }

        Ok(FieldCtx { p, e, q, modulus, add, neg, exp, log })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Field modulus over `F_p`, lowest degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn element(&self, code: u32) -> Result<FieldElement, AlgebraError> {
        if code < self.q {
            Ok(FieldElement(code as u16))
        } else {
            Err(AlgebraError::CoefficientOutOfRange { value: code as u64, q: self.q })
        }
    }

    /// All elements in code order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q as u16).map(FieldElement)
    }

    /// The nonzero elements `k^x` in code order.
    pub fn units(&self) -> impl Iterator<Item = FieldElement> {
        (1..self.q as u16).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        FieldElement(self.add[x.0 as usize * self.q as usize + y.0 as usize])
    }

    #[inline]
    pub fn neg(&self, x: FieldElement) -> FieldElement {
        FieldElement(self.neg[x.0 as usize])
    }

    #[inline]
    pub fn sub(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        if x.0 == 0 || y.0 == 0 {
            return FieldElement::ZERO;
        }
        let l = self.log[x.0 as usize] as usize + self.log[y.0 as usize] as usize;
        FieldElement(self.exp[l])
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement, AlgebraError> {
        if x.0 == 0 {
            return Err(AlgebraError::InversionOfZero);
        }
        let order = (self.q - 1) as usize;
        let l = self.log[x.0 as usize] as usize;
        Ok(FieldElement(self.exp[(order - l) % order]))
    }

    /// `-1` in the field.
    pub fn minus_one(&self) -> FieldElement {
        self.neg(FieldElement::ONE)
    }

    // ---- polynomials ----

    pub fn poly_add(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.coeffs.get(i).copied().unwrap_or_default();
            let y = b.coeffs.get(i).copied().unwrap_or_default();
            out.push(self.add(x, y));
        }
        Poly::from_coeffs(out)
    }

    pub fn poly_neg(&self, a: &Poly) -> Poly {
        Poly { coeffs: a.coeffs.iter().map(|&c| self.neg(c)).collect() }
    }

    pub fn poly_sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.poly_add(a, &self.poly_neg(b))
    }

    pub fn poly_mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![FieldElement::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn poly_scale(&self, a: &Poly, c: FieldElement) -> Poly {
        Poly::from_coeffs(a.coeffs.iter().map(|&x| self.mul(x, c)).collect())
    }

    /// Euclidean division: `a = quot * b + rem` with `deg rem < deg b`.
    pub fn poly_divmod(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly), AlgebraError> {
        if b.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let db = b.coeffs.len() - 1;
        let lead_inv = self.inv(b.coeffs[db])?;
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return Ok((Poly::zero(), a.clone()));
        }
        let mut quot = vec![FieldElement::ZERO; rem.len() - db];
        for k in (0..quot.len()).rev() {
            let c = self.mul(rem[k + db], lead_inv);
            quot[k] = c;
            if c.is_zero() {
                continue;
            }
            for (i, &y) in b.coeffs.iter().enumerate() {
                rem[k + i] = self.sub(rem[k + i], self.mul(c, y));
            }
        }
        rem.truncate(db);
        Ok((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    /// Monic gcd (zero when both inputs are zero).
    pub fn poly_gcd(&self, a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = self.poly_divmod(&x, &y).expect("nonzero divisor");
            x = y;
            y = r;
        }
        self.poly_monic(&x)
    }

    /// Scales a nonzero polynomial to leading coefficient 1; zero maps to zero.
    pub fn poly_monic(&self, a: &Poly) -> Poly {
        match a.leading() {
            None => Poly::zero(),
            Some(c) => self.poly_scale(a, self.inv(c).expect("nonzero leading coefficient")),
        }
    }

    /// Parses a polynomial in the grammar `c`, `c*Y`, `c*Y^k`, `Y`, `Y^k` joined by `+`.
    pub fn parse_poly(&self, text: &str) -> Result<Poly, AlgebraError> {
        parse_poly_with(text, |v| {
            if v < self.q as u64 {
                Ok(FieldElement(v as u16))
            } else {
                Err(AlgebraError::CoefficientOutOfRange { value: v, q: self.q })
            }
        })
        .map(|terms| {
            let mut acc = Poly::zero();
            for (c, k) in terms {
                acc = self.poly_add(&acc, &Poly::monomial(c, k));
            }
            acc
        })
    }
}

/// Splits `q` as `p^e` with `p` prime.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut n = q;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    (n == 1).then_some((p, e))
}

/// Parses a modulus over `F_p` using the polynomial grammar (coefficients reduced mod `p`
/// are rejected rather than reduced).
pub fn parse_fp_poly(text: &str, p: u32) -> Result<Vec<u32>, AlgebraError> {
    let terms = parse_poly_with(text, |v| {
        if v < p as u64 {
            Ok(FieldElement(v as u16))
        } else {
            Err(AlgebraError::CoefficientOutOfRange { value: v, q: p })
        }
    })?;
    let mut out: Vec<u32> = Vec::new();
    for (c, k) in terms {
        if out.len() <= k {
            out.resize(k + 1, 0);
        }
        out[k] = (out[k] + c.0 as u32) % p;
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    Ok(out)
}

fn parse_poly_with(
    text: &str,
    coeff: impl Fn(u64) -> Result<FieldElement, AlgebraError>,
) -> Result<Vec<(FieldElement, usize)>, AlgebraError> {
    let chars: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let mut pos = 0usize;
    let at = |pos: usize| chars.get(pos).map(|&(i, _)| i).unwrap_or(text.len());
    let syntax = |pos: usize, msg: &str| AlgebraError::Syntax { pos, msg: msg.to_string() };

    let read_int = |pos: &mut usize| -> Option<u64> {
        let start = *pos;
        let mut v: u64 = 0;
        while let Some(&(_, c)) = chars.get(*pos) {
            match c.to_digit(10) {
                Some(d) => {
                    v = v.saturating_mul(10).saturating_add(d as u64);
                    *pos += 1;
                }
                None => break,
            }
        }
        (*pos > start).then_some(v)
    };

    if chars.is_empty() {
        return Err(syntax(0, "empty polynomial"));
    }
    let mut terms = Vec::new();
    loop {
        let term_start = at(pos);
        let c = match read_int(&mut pos) {
            Some(v) => {
                let c = coeff(v)?;
                if chars.get(pos).map(|&(_, ch)| ch) == Some('*') {
                    pos += 1;
                    if !matches!(chars.get(pos), Some(&(_, 'Y' | 'y'))) {
                        return Err(syntax(at(pos), "expected `Y` after `*`"));
                    }
                } else {
                    terms.push((c, 0));
                    if !next_plus(&chars, &mut pos) {
                        break;
                    }
                    continue;
                }
                c
            }
            None => {
                if !matches!(chars.get(pos), Some(&(_, 'Y' | 'y'))) {
                    return Err(syntax(term_start, "expected a coefficient or `Y`"));
                }
                FieldElement::ONE
            }
        };
        // At `Y`.
        pos += 1;
        let mut k = 1usize;
        if chars.get(pos).map(|&(_, ch)| ch) == Some('^') {
            pos += 1;
            let e_pos = at(pos);
            k = read_int(&mut pos).ok_or_else(|| syntax(e_pos, "expected an exponent"))? as usize;
            if k > 1 << 16 {
                return Err(syntax(e_pos, "exponent too large"));
            }
        }
        terms.push((c, k));
        if !next_plus(&chars, &mut pos) {
            break;
        }
    }
    if pos < chars.len() {
        return Err(syntax(at(pos), "unexpected character"));
    }
    Ok(terms)
}

fn next_plus(chars: &[(usize, char)], pos: &mut usize) -> bool {
    if chars.get(*pos).map(|&(_, c)| c) == Some('+') {
        *pos += 1;
        true
    } else {
        false
    }
}

/// A polynomial in `F_q[Y]`, coefficients lowest degree first, no stored leading zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![FieldElement::ONE] }
    }

    /// `Y`.
    pub fn y() -> Self {
        Poly::monomial(FieldElement::ONE, 1)
    }

    /// `Y^k`.
    pub fn y_pow(k: usize) -> Self {
        Poly::monomial(FieldElement::ONE, k)
    }

    pub fn constant(c: FieldElement) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn monomial(c: FieldElement, k: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![FieldElement::ZERO; k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    /// Builds a polynomial from coefficients (lowest degree first), stripping leading zeros.
    pub fn from_coeffs(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Builds a polynomial from raw codes. Codes must be below the field order.
    pub fn from_codes(codes: &[u16]) -> Self {
        Poly::from_coeffs(codes.iter().map(|&c| FieldElement(c)).collect())
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> FieldElement {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with [`NEG_INF`] for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> i64 {
        if self.coeffs.is_empty() {
            NEG_INF
        } else {
            self.coeffs.len() as i64 - 1
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    /// `deg(a - b)` without field arithmetic: the highest index where the coefficients differ.
    #[inline]
    pub fn deg_diff(a: &Poly, b: &Poly) -> i64 {
        let n = a.coeffs.len().max(b.coeffs.len());
        for i in (0..n).rev() {
            if a.coeff(i) != b.coeff(i) {
                return i as i64;
            }
        }
        NEG_INF
    }

    /// Ordering by degree, then coefficient codes from the leading one down.
    pub fn cmp_canonical(&self, other: &Poly) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_canonical(other)
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let c = self.coeffs[k];
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (k, c.0) {
                (0, v) => write!(f, "{v}")?,
                (1, 1) => write!(f, "Y")?,
                (1, v) => write!(f, "{v}*Y")?,
                (k, 1) => write!(f, "Y^{k}")?,
                (k, v) => write!(f, "{v}*Y^{k}")?,
            }
        }
        Ok(())
    }
}

/// All nonconstant polynomials with `min_deg <= deg <= max_deg`, ordered by degree and then
/// by coefficient codes from the leading coefficient down.
pub fn enumerate_polys(ctx: &FieldCtx, min_deg: usize, max_deg: usize) -> Vec<Poly> {
    let q = ctx.order() as usize;
    let mut out = Vec::new();
    for d in min_deg.max(1)..=max_deg {
        let count = (q - 1) * q.pow(d as u32);
        out.reserve(count);
        for idx in 0..count {
            // idx enumerates (lead, c_{d-1}, ..., c_0) in lexicographic order.
            let mut coeffs = vec![FieldElement::ZERO; d + 1];
            let mut n = idx;
            for slot in coeffs.iter_mut().take(d) {
                *slot = FieldElement((n % q) as u16);
                n /= q;
            }
            coeffs[d] = FieldElement((n + 1) as u16);
            out.push(Poly { coeffs });
        }
    }
    out
}
