//! Truncated Laurent series in `Y^{-1}` over `F_q`, i.e. elements of `F_q((Y^{-1}))`.
//!
//! Every value carries the lowest degree whose coefficient is trusted. Arithmetic propagates
//! that bound, and any question whose answer depends on an untrusted coefficient is answered
//! with [`LaurentError::InsufficientPrecision`] instead of a guess.

use std::fmt;

use thiserror::Error;

use crate::algebra::{FieldCtx, FieldElement, Poly};
use crate::cfword::CFWord;

/// Precision marker for exactly known values (finite Laurent polynomials).
pub const EXACT: i64 = i64::MIN / 8;

/// Default cap for auto-deepening, in coefficients.
pub const DEFAULT_PRECISION_CAP: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("insufficient precision ({certified} terms certified)")]
    InsufficientPrecision { certified: usize },
    #[error("division by zero series")]
    DivisionByZero,
    #[error("precision exhausted after deepening to {cap} coefficients")]
    PrecisionExhausted { cap: usize },
}

impl LaurentError {
    fn short() -> Self {
        LaurentError::InsufficientPrecision { certified: 0 }
    }
}

/// A Laurent series known down to degree `prec`.
///
/// `coeffs[i]` is the coefficient of `Y^(top - i)`. A nonzero leading coefficient is stored
/// whenever the value is certified nonzero. For finite precision the stored coefficients run
/// exactly down to `prec`; for exact values everything below the last stored term is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    top: i64,
    coeffs: Vec<FieldElement>,
    prec: i64,
}

impl LaurentSeries {
    pub fn zero() -> Self {
        LaurentSeries { top: 0, coeffs: Vec::new(), prec: EXACT }
    }

    /// `O(Y^prec)`: nothing known above `prec` except that it vanishes there.
    pub fn unknown(prec: i64) -> Self {
        LaurentSeries { top: prec - 1, coeffs: Vec::new(), prec }
    }

    /// `c * Y^k`, exact.
    pub fn monomial(c: FieldElement, k: i64) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentSeries { top: k, coeffs: vec![c], prec: EXACT }
    }

    pub fn from_poly(p: &Poly) -> Self {
        if p.is_zero() {
            return Self::zero();
        }
        let coeffs: Vec<FieldElement> = p.coeffs().iter().rev().copied().collect();
        LaurentSeries { top: p.degree(), coeffs, prec: EXACT }.normalized()
    }

    /// `num / den` expanded down to degree `prec` by long division.
    pub fn from_rational(ctx: &FieldCtx, num: &Poly, den: &Poly, prec: i64) -> Result<Self, LaurentError> {
        if den.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let dd = den.degree();
        let top = num.degree() - dd;
        let lead_inv = ctx.inv(den.leading().unwrap()).expect("nonzero");
        if top < prec {
            return Ok(Self::unknown(prec));
        }
        // Remainder as a dense vector in degrees (deg num) down to (prec + dd).
        let low = prec + dd;
        let n = (num.degree() - low + 1) as usize;
        let mut rem = vec![FieldElement::ZERO; n];
        for (k, &c) in num.coeffs().iter().enumerate() {
            let d = k as i64;
            if d >= low {
                rem[(num.degree() - d) as usize] = c;
            }
        }
        let den_desc: Vec<FieldElement> = den.coeffs().iter().rev().copied().collect();
        let len = (top - prec + 1) as usize;
        let mut coeffs = Vec::with_capacity(len);
        for i in 0..len {
            let c = ctx.mul(rem[i], lead_inv);
            coeffs.push(c);
            if c.is_zero() {
                continue;
            }
            for (j, &b) in den_desc.iter().enumerate() {
                if i + j < n {
                    rem[i + j] = ctx.sub(rem[i + j], ctx.mul(c, b));
                }
            }
        }
        Ok(LaurentSeries { top, coeffs, prec }.normalized())
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Degree of the leading stored term, if the value is certified nonzero.
    pub fn leading_degree(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.top)
    }

    pub fn is_certified_nonzero(&self) -> bool {
        !self.coeffs.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.is_exact()
    }

    /// `v(f) = -deg` of the leading term.
    pub fn valuation(&self) -> Result<i64, LaurentError> {
        self.leading_degree().map(|t| -t).ok_or_else(LaurentError::short)
    }

    /// Exact valuation when certified nonzero, otherwise the bound implied by the precision.
    pub fn valuation_lower_bound(&self) -> i64 {
        match self.leading_degree() {
            Some(t) => -t,
            None if self.is_exact() => i64::MAX,
            None => 1 - self.prec,
        }
    }

    /// Coefficient of `Y^d`; `None` when `d` is below the trusted precision.
    pub fn coeff(&self, d: i64) -> Option<FieldElement> {
        if d < self.prec {
            return None;
        }
        if d > self.top {
            return Some(FieldElement::ZERO);
        }
        Some(self.coeffs.get((self.top - d) as usize).copied().unwrap_or_default())
    }

    /// Lowest degree that is stored or implied; exact values report their last term.
    fn floor(&self) -> i64 {
        if self.is_exact() {
            self.top - self.coeffs.len() as i64 + 1
        } else {
            self.prec
        }
    }

    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.top -= lead as i64;
        }
        if self.is_exact() {
            while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                self.coeffs.pop();
            }
            if self.coeffs.is_empty() {
                self.top = 0;
            }
        } else if self.coeffs.is_empty() {
            self.top = self.prec - 1;
        }
        self
    }

    /// Drops every coefficient below `prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec <= self.prec {
            return self.clone();
        }
        let mut coeffs = Vec::new();
        let mut d = self.top.max(prec);
        while d >= prec {
            coeffs.push(self.coeff(d).unwrap_or_default());
            d -= 1;
        }
        LaurentSeries { top: self.top.max(prec), coeffs, prec }.normalized()
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let top = self.top.max(other.top);
        let low = if prec == EXACT { self.floor().min(other.floor()) } else { prec };
        if top < low {
            return Self::unknown(prec);
        }
        let coeffs = (0..=(top - low))
            .map(|i| {
                let d = top - i;
                ctx.add(self.coeff(d).unwrap_or_default(), other.coeff(d).unwrap_or_default())
            })
            .collect();
        LaurentSeries { top, coeffs, prec }.normalized()
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Self {
        LaurentSeries { top: self.top, coeffs: self.coeffs.iter().map(|&c| ctx.neg(c)).collect(), prec: self.prec }
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Self) -> Self {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn scale(&self, ctx: &FieldCtx, c: FieldElement) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentSeries { top: self.top, coeffs: self.coeffs.iter().map(|&x| ctx.mul(x, c)).collect(), prec: self.prec }
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Self) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero();
        }
        // An uncertified operand is bounded by its precision.
        let tf = self.top;
        let tg = other.top;
        let prec = tf.saturating_add(other.prec).max(tg.saturating_add(self.prec)).max(EXACT);
        let top = tf + tg;
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::unknown(prec);
        }
        let low = if prec == EXACT { self.floor() + other.floor() } else { prec };
        if top < low {
            return Self::unknown(prec);
        }
        let n = (top - low + 1) as usize;
        let mut coeffs = vec![FieldElement::ZERO; n];
        for (i, &a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n - i) {
                coeffs[i + j] = ctx.add(coeffs[i + j], ctx.mul(a, b));
            }
        }
        LaurentSeries { top, coeffs, prec }.normalized()
    }

    pub fn inv(&self, ctx: &FieldCtx) -> Result<Self, LaurentError> {
        if self.is_exact_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if self.coeffs.is_empty() {
            return Err(LaurentError::short());
        }
        let c0_inv = ctx.inv(self.coeffs[0]).expect("nonzero leading");
        if self.is_exact() {
            if self.coeffs.len() == 1 {
                return Ok(LaurentSeries { top: -self.top, coeffs: vec![c0_inv], prec: EXACT });
            }
            // An exact non-monomial has an infinite inverse; the caller must truncate first.
            return Err(LaurentError::short());
        }
        let n = self.coeffs.len();
        let mut d = Vec::with_capacity(n);
        d.push(c0_inv);
        for k in 1..n {
            let mut s = FieldElement::ZERO;
            for i in 1..=k {
                s = ctx.add(s, ctx.mul(self.coeffs[i], d[k - i]));
            }
            d.push(ctx.neg(ctx.mul(c0_inv, s)));
        }
        Ok(LaurentSeries { top: -self.top, coeffs: d, prec: self.prec - 2 * self.top }.normalized())
    }

    pub fn div(&self, ctx: &FieldCtx, other: &Self) -> Result<Self, LaurentError> {
        Ok(self.mul(ctx, &other.inv(ctx)?))
    }

    /// The sum of the terms of degree `>= 0`.
    pub fn polynomial_part(&self) -> Result<Poly, LaurentError> {
        if self.prec > 0 {
            return Err(LaurentError::short());
        }
        if self.top < 0 {
            return Ok(Poly::zero());
        }
        let coeffs = (0..=self.top).map(|d| self.coeff(d).unwrap_or_default()).collect();
        Ok(Poly::from_coeffs(coeffs))
    }

    /// Renders the terms of degree `>= min_deg` as `c_k*Y^k + ...`.
    pub fn format_to(&self, min_deg: i64) -> String {
        let mut parts = Vec::new();
        let mut d = self.top;
        let stop = min_deg.max(self.floor());
        while d >= stop && !self.coeffs.is_empty() {
            let c = self.coeff(d).unwrap_or_default();
            if !c.is_zero() {
                parts.push(match (d, c.code()) {
                    (0, v) => format!("{v}"),
                    (1, 1) => "Y".to_string(),
                    (d, 1) => format!("Y^{d}"),
                    (1, v) => format!("{v}*Y"),
                    (d, v) => format!("{v}*Y^{d}"),
                });
            }
            d -= 1;
        }
        if !self.is_exact() && min_deg <= self.prec {
            parts.push(format!("O(Y^{})", self.prec));
        } else if !self.is_exact() || parts.is_empty() {
            if parts.is_empty() {
                parts.push("0".into());
            }
            if !self.is_exact() {
                parts.push("...".into());
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_to(self.floor()))
    }
}

/// Evaluates a continued-fraction word to all coefficients of degree `>= prec`.
///
/// Quadratic words are evaluated through the convergent `p_n / q_n` with `n` large enough that
/// `|w - p_n/q_n| = q^{-(deg q_n + deg q_{n+1})}` lies strictly below `Y^prec`.
pub fn series_from_cf(ctx: &FieldCtx, w: &CFWord, prec: i64) -> LaurentSeries {
    let (mut p_prev, mut q_prev) = (Poly::one(), Poly::zero());
    let (mut p_cur, mut q_cur) = (w.a0().clone(), Poly::one());
    let mut i = 1usize;
    loop {
        let Some(a) = w.letter(i) else {
            return LaurentSeries::from_rational(ctx, &p_cur, &q_cur, prec).expect("nonzero denominator");
        };
        let q_next_deg = q_cur.degree() + a.degree();
        if -(q_cur.degree() + q_next_deg) < prec {
            return LaurentSeries::from_rational(ctx, &p_cur, &q_cur, prec).expect("nonzero denominator");
        }
        let p_next = ctx.poly_add(&ctx.poly_mul(a, &p_cur), &p_prev);
        let q_next = ctx.poly_add(&ctx.poly_mul(a, &q_cur), &q_prev);
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        i += 1;
    }
}

/// Partial quotients certified by the precision of `f`, at most `max_terms` of them, and
/// whether the expansion stopped for a certified reason (term budget or exact termination).
pub fn cf_prefix_from_series(ctx: &FieldCtx, f: &LaurentSeries, max_terms: usize) -> (Vec<Poly>, bool) {
    let mut terms = Vec::new();
    let mut x = f.clone();
    loop {
        if terms.len() == max_terms {
            return (terms, true);
        }
        let Ok(a) = x.polynomial_part() else {
            return (terms, false);
        };
        let rem = x.sub(ctx, &LaurentSeries::from_poly(&a));
        terms.push(a);
        if rem.is_exact_zero() {
            return (terms, true);
        }
        match rem.inv(ctx) {
            Ok(next) => x = next,
            Err(_) => return (terms, false),
        }
    }
}

/// The classical continued-fraction algorithm in `F_q((Y^{-1}))`.
pub fn cf_from_series(ctx: &FieldCtx, f: &LaurentSeries, max_terms: usize) -> Result<Vec<Poly>, LaurentError> {
    let (terms, complete) = cf_prefix_from_series(ctx, f, max_terms);
    if complete {
        Ok(terms)
    } else {
        Err(LaurentError::InsufficientPrecision { certified: terms.len() })
    }
}

/// Retries `f` with precision `-start, -2 start, ...` until it stops reporting insufficient
/// precision or the number of coefficients exceeds `cap`.
pub fn with_deepening<T>(
    start: usize,
    cap: usize,
    mut f: impl FnMut(i64) -> Result<T, LaurentError>,
) -> Result<T, LaurentError> {
    let mut n = start.max(1);
    loop {
        match f(-(n as i64)) {
            Err(LaurentError::InsufficientPrecision { .. }) => {
                if n >= cap {
                    return Err(LaurentError::PrecisionExhausted { cap });
                }
                n = (n * 2).min(cap);
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfword::CFWord;

    fn k2() -> FieldCtx {
        FieldCtx::prime(2).unwrap()
    }

    fn poly(ctx: &FieldCtx, s: &str) -> Poly {
        ctx.parse_poly(s).unwrap()
    }

    #[test]
    fn inverse_of_monomial_is_exact() {
        let k = k2();
        let f = LaurentSeries::monomial(FieldElement::ONE, -1);
        assert_eq!(f.inv(&k).unwrap(), LaurentSeries::from_poly(&Poly::y()));
        let g = f.truncate(-10);
        let inv = g.inv(&k).unwrap();
        assert_eq!(inv.leading_degree(), Some(1));
        assert_eq!(inv.precision(), -8);
        assert_eq!(inv.coeff(0), Some(FieldElement::ZERO));
    }

    #[test]
    fn char_two_cancellation() {
        let k = k2();
        let a = LaurentSeries::from_poly(&poly(&k, "Y+1"));
        let b = LaurentSeries::from_poly(&Poly::y());
        assert_eq!(a.add(&k, &b), LaurentSeries::from_poly(&Poly::one()));
    }

    #[test]
    fn geometric_series_inverse() {
        let k = k2();
        let f = LaurentSeries::from_poly(&poly(&k, "Y+1")).truncate(-20);
        let inv = f.inv(&k).unwrap();
        for d in inv.precision()..=-1 {
            assert_eq!(inv.coeff(d), Some(FieldElement::ONE), "degree {d}");
        }
        assert_eq!(inv.coeff(0), Some(FieldElement::ZERO));
        let back = inv.mul(&k, &f);
        assert_eq!(back.leading_degree(), Some(0));
        for d in back.precision()..0 {
            assert_eq!(back.coeff(d), Some(FieldElement::ZERO));
        }
    }

    #[test]
    fn from_rational_matches_multiplication() {
        let k = FieldCtx::prime(3).unwrap();
        let num = poly(&k, "2*Y^3+Y+1");
        let den = poly(&k, "Y^2+2*Y+2");
        let s = LaurentSeries::from_rational(&k, &num, &den, -30).unwrap();
        let back = s.mul(&k, &LaurentSeries::from_poly(&den));
        let expect = LaurentSeries::from_poly(&num);
        for d in back.precision()..=3 {
            assert_eq!(back.coeff(d), expect.coeff(d), "degree {d}");
        }
    }

    #[test]
    fn polynomial_part_examples() {
        let k = FieldCtx::prime(3).unwrap();
        let f = LaurentSeries::from_poly(&poly(&k, "Y+1"))
            .add(&k, &LaurentSeries::monomial(FieldElement::ONE, -1))
            .truncate(-5);
        assert_eq!(f.polynomial_part().unwrap(), poly(&k, "Y+1"));
        let g = LaurentSeries::monomial(FieldElement::ONE, -1).add(&k, &LaurentSeries::monomial(FieldElement::ONE, -2));
        assert_eq!(g.polynomial_part().unwrap(), Poly::zero());
        let h = LaurentSeries::from_poly(&poly(&k, "2*Y^2"))
            .add(&k, &LaurentSeries::monomial(FieldElement::ONE, -3))
            .truncate(-4);
        assert_eq!(h.polynomial_part().unwrap(), poly(&k, "2*Y^2"));
        assert!(LaurentSeries::unknown(1).polynomial_part().is_err());
    }

    #[test]
    fn series_from_finite_and_periodic_words() {
        let k = k2();
        let w = CFWord::parse(&k, "[0;|Y]").unwrap();
        let s = series_from_cf(&k, &w, -8);
        assert_eq!(s.valuation().unwrap(), 1);
        // alpha^2 + Y alpha + 1 vanishes to the working precision.
        let y = LaurentSeries::from_poly(&Poly::y());
        let res = s.mul(&k, &s).add(&k, &y.mul(&k, &s)).add(&k, &LaurentSeries::from_poly(&Poly::one()));
        assert!(!res.is_certified_nonzero());
        assert!(res.valuation_lower_bound() >= 8);

        let finite = CFWord::parse(&k, "[Y; Y]").unwrap();
        let s = series_from_cf(&k, &finite, -6);
        assert_eq!(s.format_to(-6), "Y + Y^-1 + O(Y^-6)");
    }

    #[test]
    fn cf_of_series_examples() {
        let k = k2();
        let s = LaurentSeries::from_rational(&k, &poly(&k, "Y^2+1"), &Poly::y(), -20).unwrap();
        // The exact value is the Laurent polynomial Y + Y^-1.
        let exact = LaurentSeries::from_poly(&Poly::y()).add(&k, &LaurentSeries::monomial(FieldElement::ONE, -1));
        assert_eq!(cf_from_series(&k, &exact, 10).unwrap(), vec![Poly::y(), Poly::y()]);
        let (prefix, complete) = cf_prefix_from_series(&k, &s, 10);
        assert_eq!(prefix, vec![Poly::y(), Poly::y()]);
        assert!(!complete);

        let inv_y = LaurentSeries::monomial(FieldElement::ONE, -1);
        assert_eq!(cf_from_series(&k, &inv_y, 10).unwrap(), vec![Poly::zero(), Poly::y()]);

        let w = CFWord::parse(&k, "[0;|Y]").unwrap();
        let s = series_from_cf(&k, &w, -30);
        let terms = cf_from_series(&k, &s, 11).unwrap();
        assert_eq!(terms[0], Poly::zero());
        assert!(terms[1..].iter().all(|t| *t == Poly::y()));
    }

    #[test]
    fn insufficient_precision_reports_certified_terms() {
        let k = k2();
        let w = CFWord::parse(&k, "[0;|Y]").unwrap();
        let s = series_from_cf(&k, &w, -6);
        match cf_from_series(&k, &s, 100) {
            Err(LaurentError::InsufficientPrecision { certified }) => assert!((2..=5).contains(&certified)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deepening_stops_at_cap() {
        let mut calls = 0;
        let r: Result<(), _> = with_deepening(4, 64, |_| {
            calls += 1;
            Err(LaurentError::short())
        });
        assert_eq!(r, Err(LaurentError::PrecisionExhausted { cap: 64 }));
        assert_eq!(calls, 5);
        let r = with_deepening(4, 64, |p| if p <= -16 { Ok(p) } else { Err(LaurentError::short()) });
        assert_eq!(r, Ok(-16));
    }
}
