//! Eventually periodic continued-fraction words `[a0; a1, ..., ar | b1, ..., bs]`.
//!
//! A word with an empty period is a finite continued fraction (an element of `F_q(Y)`);
//! otherwise it denotes a quadratic power series. Canonical words have nonconstant partial
//! quotients, a primitive period, and a preperiod whose last letter differs from the last
//! period letter, so two canonical words denote the same series exactly when they are equal.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{AlgebraError, FieldCtx, FieldElement, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfError {
    #[error("partial quotient {0} is constant")]
    ConstantPartialQuotient(String),
    #[error("word has no period (rational value)")]
    NotQuadratic,
    #[error("word is not purely periodic")]
    NotPurelyPeriodic,
    #[error("invalid twist: {0}")]
    InvalidTwist(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An eventually periodic continued-fraction word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CFWord {
    a0: Poly,
    preperiod: Vec<Poly>,
    period: Vec<Poly>,
}

/// Which letters a twist multiplies by `a` (the others get `a^{-1}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `a0` gets `a`, `a1` gets `a^{-1}`, ...
    Even,
    /// `a0` gets `a^{-1}`, `a1` gets `a`, ...
    Odd,
}

/// Selects one of the purely periodic words `tau_{j,a}` or its mirrored counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwistSpec {
    /// Rotation offset, 1-based.
    pub j: usize,
    pub a: FieldElement,
    pub mirrored: bool,
}

/// Degree statistics of the periodic tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfStats {
    /// Largest degree in the period.
    pub max: i64,
    /// Largest sum of degrees of two cyclically adjacent letters.
    pub max_pair: i64,
    /// Smallest degree in the period.
    pub min: i64,
}

/// Distance `|f - g| = q^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Equal,
    Exponent(i64),
}

/// Convergents `p_k / q_k` for `k = 0..=n`, seeded with `p_{-1} = 1`, `q_{-1} = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergents {
    pub p: Vec<Poly>,
    pub q: Vec<Poly>,
}

impl Convergents {
    /// `p_k`, with `k = -1` allowed.
    pub fn p(&self, k: isize) -> Poly {
        if k < 0 {
            Poly::one()
        } else {
            self.p[k as usize].clone()
        }
    }

    /// `q_k`, with `k = -1` allowed.
    pub fn q(&self, k: isize) -> Poly {
        if k < 0 {
            Poly::zero()
        } else {
            self.q[k as usize].clone()
        }
    }

    /// `p_k q_{k-1} - p_{k-1} q_k`.
    pub fn determinant(&self, ctx: &FieldCtx, k: usize) -> Poly {
        let k = k as isize;
        ctx.poly_sub(&ctx.poly_mul(&self.p(k), &self.q(k - 1)), &ctx.poly_mul(&self.p(k - 1), &self.q(k)))
    }
}

/// Length of the primitive root of `w` (the smallest `d | len` with `w` `d`-periodic),
/// from the border (failure) function.
pub fn primitive_root_len<T: PartialEq>(w: &[T]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let mut border = vec![0usize; n];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && w[i] != w[k] {
            k = border[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        border[i] = k;
    }
    let p = n - border[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

/// The lexicographically least rotation under [`Poly`]'s canonical order.
pub fn min_rotation(w: &[Poly]) -> Vec<Poly> {
    let n = w.len();
    let mut best = 0;
    for start in 1..n {
        let cand = (0..n).map(|i| &w[(start + i) % n]);
        let cur = (0..n).map(|i| &w[(best + i) % n]);
        if cand.lt(cur) {
            best = start;
        }
    }
    (0..n).map(|i| w[(best + i) % n].clone()).collect()
}

/// Canonical representative of the cyclic class of `w`: primitive root, least rotation.
pub fn cyclic_class(w: &[Poly]) -> Vec<Poly> {
    let p = primitive_root_len(w);
    min_rotation(&w[..p])
}

/// Multiplies `w[i]` by `a^{(-1)^(i + offset)}`.
fn twist_letters(ctx: &FieldCtx, w: &[Poly], a: FieldElement, offset: usize) -> Vec<Poly> {
    let a_inv = ctx.inv(a).expect("unit");
    w.iter()
        .enumerate()
        .map(|(i, x)| ctx.poly_scale(x, if (i + offset) % 2 == 0 { a } else { a_inv }))
        .collect()
}

/// Alternating twist of a cyclic word by `a`, starting with `a` at index 0. An odd-length
/// word is unrolled to double length when `a^2 != 1` so that the result is again periodic.
pub fn twist_cyclic(ctx: &FieldCtx, w: &[Poly], a: FieldElement) -> Vec<Poly> {
    let odd_unroll = w.len() % 2 == 1 && ctx.mul(a, a) != FieldElement::ONE;
    let base: Vec<Poly> = if odd_unroll { w.iter().chain(w.iter()).cloned().collect() } else { w.to_vec() };
    let t = twist_letters(ctx, &base, a, 0);
    let p = primitive_root_len(&t);
    t[..p].to_vec()
}

/// Cyclic classes of every alternating twist of `period` and of its reversal. These are the
/// periods of all series in the orbit of the quadratic with this period and its conjugate.
pub fn orbit_classes(ctx: &FieldCtx, period: &[Poly]) -> HashSet<Vec<Poly>> {
    let reversed: Vec<Poly> = period.iter().rev().cloned().collect();
    let mut out = HashSet::new();
    for base in [period, &reversed[..]] {
        for a in ctx.units() {
            out.insert(cyclic_class(&twist_cyclic(ctx, base, a)));
        }
    }
    out
}

/// Every periodic tail that can follow a prefix of `f` inside an approximant from the orbit
/// of the quadratic with period `period`: all rotations of all twisted and mirrored
/// variants, deduplicated and sorted.
pub fn orbit_tails(ctx: &FieldCtx, period: &[Poly]) -> Vec<Vec<Poly>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for class in orbit_classes(ctx, period) {
        let n = class.len();
        for start in 0..n {
            let rot: Vec<Poly> = (0..n).map(|i| class[(start + i) % n].clone()).collect();
            if seen.insert(rot.clone()) {
                out.push(rot);
            }
        }
    }
    out.sort();
    out
}

impl CFWord {
    /// Builds and canonicalizes a word.
    pub fn new(a0: Poly, preperiod: Vec<Poly>, period: Vec<Poly>) -> Result<Self, CfError> {
        CFWord { a0, preperiod, period }.canonicalize()
    }

    /// Builds a word without canonicalizing it.
    pub fn raw(a0: Poly, preperiod: Vec<Poly>, period: Vec<Poly>) -> Self {
        CFWord { a0, preperiod, period }
    }

    /// `[0; | w]`.
    pub fn purely_periodic(period: Vec<Poly>) -> Result<Self, CfError> {
        Self::new(Poly::zero(), Vec::new(), period)
    }

    pub fn a0(&self) -> &Poly {
        &self.a0
    }

    pub fn preperiod(&self) -> &[Poly] {
        &self.preperiod
    }

    pub fn period(&self) -> &[Poly] {
        &self.period
    }

    pub fn is_quadratic(&self) -> bool {
        !self.period.is_empty()
    }

    /// Letter `a_i` (`i = 0` is `a0`), or `None` past the end of a finite word.
    pub fn letter(&self, i: usize) -> Option<&Poly> {
        if i == 0 {
            return Some(&self.a0);
        }
        let r = self.preperiod.len();
        if i <= r {
            return Some(&self.preperiod[i - 1]);
        }
        if self.period.is_empty() {
            return None;
        }
        Some(&self.period[(i - r - 1) % self.period.len()])
    }

    fn require_quadratic(&self) -> Result<(), CfError> {
        if self.is_quadratic() {
            Ok(())
        } else {
            Err(CfError::NotQuadratic)
        }
    }

    /// Primitive period, and absorption of a preperiod letter equal to the last period letter
    /// into a rotated period. Idempotent; the represented series is unchanged.
    pub fn canonicalize(&self) -> Result<Self, CfError> {
        if let Some(c) = self.preperiod.iter().chain(&self.period).find(|x| x.is_constant()) {
            return Err(CfError::ConstantPartialQuotient(c.to_string()));
        }
        let mut pre = self.preperiod.clone();
        let p = primitive_root_len(&self.period);
        let mut per = self.period[..p].to_vec();
        while !per.is_empty() && pre.last().is_some_and(|x| x == per.last().unwrap()) {
            pre.pop();
            per.rotate_right(1);
        }
        Ok(CFWord { a0: self.a0.clone(), preperiod: pre, period: per })
    }

    /// The series `a * w` when `parity` is [`Parity::Even`], i.e.
    /// `[a a0; a^{-1} a1, a a2, ...]`; odd parity swaps the roles of `a` and `a^{-1}`.
    pub fn twist(&self, ctx: &FieldCtx, a: FieldElement, parity: Parity) -> Result<Self, CfError> {
        if a.is_zero() {
            return Err(CfError::InvalidTwist("twist by zero".into()));
        }
        let a = match parity {
            Parity::Even => a,
            Parity::Odd => ctx.inv(a)?,
        };
        let a_inv = ctx.inv(a)?;
        let factor = |i: usize| if i % 2 == 0 { a } else { a_inv };
        let r = self.preperiod.len();
        let a0 = ctx.poly_scale(&self.a0, factor(0));
        let pre: Vec<Poly> = self.preperiod.iter().enumerate().map(|(i, x)| ctx.poly_scale(x, factor(i + 1))).collect();
        let s = self.period.len();
        let unroll = s % 2 == 1 && a != a_inv;
        let len = if unroll { 2 * s } else { s };
        let per: Vec<Poly> = (0..len).map(|k| ctx.poly_scale(&self.period[k % s], factor(r + 1 + k))).collect();
        CFWord::new(a0, pre, per)
    }

    /// Letter-wise negation, the series `-w`.
    pub fn negate(&self, ctx: &FieldCtx) -> Self {
        let neg = |xs: &[Poly]| xs.iter().map(|x| ctx.poly_neg(x)).collect();
        CFWord { a0: ctx.poly_neg(&self.a0), preperiod: neg(&self.preperiod), period: neg(&self.period) }
    }

    /// Convergents `p_k / q_k` for `k <= n`, unrolling the period as needed.
    pub fn convergents(&self, ctx: &FieldCtx, n: usize) -> Convergents {
        let mut p = Vec::with_capacity(n + 1);
        let mut q = Vec::with_capacity(n + 1);
        p.push(self.a0.clone());
        q.push(Poly::one());
        let (mut p_prev, mut q_prev) = (Poly::one(), Poly::zero());
        for i in 1..=n {
            let Some(a) = self.letter(i) else { break };
            let pk = ctx.poly_add(&ctx.poly_mul(a, &p[i - 1]), &p_prev);
            let qk = ctx.poly_add(&ctx.poly_mul(a, &q[i - 1]), &q_prev);
            p_prev = p[i - 1].clone();
            q_prev = q[i - 1].clone();
            p.push(pk);
            q.push(qk);
        }
        Convergents { p, q }
    }

    /// Galois conjugate of `tau = [b1; | b2, ..., bs, b1]`, namely `-[0; | bs, ..., b2, b1]`.
    pub fn galois_conjugate_period(&self, ctx: &FieldCtx) -> Result<Self, CfError> {
        self.require_quadratic()?;
        if !self.preperiod.is_empty() || Some(&self.a0) != self.period.last() {
            return Err(CfError::NotPurelyPeriodic);
        }
        // The letters b1..bs are a0 followed by the period without its last letter.
        let s = self.period.len();
        let mut b: Vec<Poly> = Vec::with_capacity(s);
        b.push(self.a0.clone());
        b.extend_from_slice(&self.period[..s - 1]);
        b.reverse();
        CFWord::new(Poly::zero(), Vec::new(), b).map(|w| w.negate(ctx))
    }

    /// The primitive minimal polynomial `A X^2 + B X + C` with `A` monic.
    pub fn minimal_polynomial(&self, ctx: &FieldCtx) -> Result<(Poly, Poly, Poly), CfError> {
        self.require_quadratic()?;
        // theta = [| b1..bs] satisfies theta = (P theta + P') / (Q theta + Q').
        let theta = CFWord::raw(self.period[0].clone(), self.period[1..].to_vec(), Vec::new());
        let s = self.period.len() - 1;
        let tc = theta.convergents(ctx, s);
        let (pp, pp1) = (tc.p(s as isize), tc.p(s as isize - 1));
        let (qq, qq1) = (tc.q(s as isize), tc.q(s as isize - 1));
        // Q theta^2 + (Q' - P) theta - P' = 0.
        let f2 = qq;
        let f1 = ctx.poly_sub(&qq1, &pp);
        let f0 = ctx.poly_neg(&pp1);

        // alpha = (a theta + b) / (c theta + d), theta = (d alpha - b) / (-c alpha + a).
        let r = self.preperiod.len();
        let prefix = CFWord::raw(self.a0.clone(), self.preperiod.clone(), Vec::new());
        let ac = prefix.convergents(ctx, r);
        let (a, b) = (ac.p(r as isize), ac.p(r as isize - 1));
        let (c, d) = (ac.q(r as isize), ac.q(r as isize - 1));
        // u = d X - b, v = -c X + a, as (X^1, X^0) coefficient pairs.
        let u = (d.clone(), ctx.poly_neg(&b));
        let v = (ctx.poly_neg(&c), a.clone());
        let sq = |x: &(Poly, Poly), y: &(Poly, Poly)| -> [Poly; 3] {
            [
                ctx.poly_mul(&x.0, &y.0),
                ctx.poly_add(&ctx.poly_mul(&x.0, &y.1), &ctx.poly_mul(&x.1, &y.0)),
                ctx.poly_mul(&x.1, &y.1),
            ]
        };
        let uu = sq(&u, &u);
        let uv = sq(&u, &v);
        let vv = sq(&v, &v);
        let coeff = |i: usize| {
            let t = ctx.poly_add(&ctx.poly_mul(&f2, &uu[i]), &ctx.poly_mul(&f1, &uv[i]));
            ctx.poly_add(&t, &ctx.poly_mul(&f0, &vv[i]))
        };
        let (big_a, big_b, big_c) = (coeff(0), coeff(1), coeff(2));
        let g = ctx.poly_gcd(&ctx.poly_gcd(&big_a, &big_b), &big_c);
        let reduce = |x: &Poly| ctx.poly_divmod(x, &g).expect("nonzero content").0;
        let (big_a, big_b, big_c) = (reduce(&big_a), reduce(&big_b), reduce(&big_c));
        let lead_inv = ctx.inv(big_a.leading().expect("irrational root")).expect("unit");
        Ok((ctx.poly_scale(&big_a, lead_inv), ctx.poly_scale(&big_b, lead_inv), ctx.poly_scale(&big_c, lead_inv)))
    }

    /// Exponent `e` with `h(w) = 1/|w - w^sigma| = q^e`.
    pub fn height(&self) -> Result<i64, CfError> {
        self.require_quadratic()?;
        let last = self.period.last().unwrap();
        match self.preperiod.last() {
            None => Ok(-last.degree()),
            Some(ar) => {
                let sum: i64 = self.preperiod.iter().map(Poly::degree).sum();
                debug_assert!(ar != last, "canonical words have a_r != b_s");
                Ok(2 * sum - ar.degree() - last.degree() + Poly::deg_diff(ar, last))
            }
        }
    }

    /// Degree statistics over one period.
    pub fn cf_stats(&self) -> Result<CfStats, CfError> {
        self.require_quadratic()?;
        Ok(period_stats(&self.period))
    }

    /// Parses `[a0; p1, p2 | b1, b2]`; without `|` the word is finite.
    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self, CfError> {
        let raw = Self::parse_raw(ctx, text)?;
        raw.canonicalize()
    }

    /// Parses without canonicalizing.
    pub fn parse_raw(ctx: &FieldCtx, text: &str) -> Result<Self, CfError> {
        let syntax = |pos: usize, msg: &str| CfError::Syntax { pos, msg: msg.to_string() };
        let start = text.find(|c: char| !c.is_whitespace()).ok_or_else(|| syntax(0, "empty word"))?;
        let end = text.rfind(|c: char| !c.is_whitespace()).unwrap();
        if !text[start..].starts_with('[') {
            return Err(syntax(start, "expected `[`"));
        }
        if !text[..=end].ends_with(']') {
            return Err(syntax(end, "expected `]`"));
        }
        let inner_off = start + 1;
        let inner = &text[inner_off..end];
        let parse_poly = |s: &str, off: usize| -> Result<Poly, CfError> {
            ctx.parse_poly(s).map_err(|e| match e {
                AlgebraError::Syntax { pos, msg } => CfError::Syntax { pos: off + pos, msg },
                other => CfError::Algebra(other),
            })
        };
        let parse_list = |s: &str, off: usize| -> Result<Vec<Poly>, CfError> {
            if s.trim().is_empty() {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            let mut pos = off;
            for item in s.split(',') {
                if item.trim().is_empty() {
                    return Err(syntax(pos, "empty partial quotient"));
                }
                out.push(parse_poly(item, pos)?);
                pos += item.len() + 1;
            }
            Ok(out)
        };
        let (a0_text, rest) = match inner.find(';') {
            Some(i) => (&inner[..i], Some((&inner[i + 1..], inner_off + i + 1))),
            None => (inner, None),
        };
        let a0 = parse_poly(a0_text, inner_off)?;
        let (pre, per) = match rest {
            None => (Vec::new(), Vec::new()),
            Some((r, off)) => match r.find('|') {
                Some(i) => {
                    let per = parse_list(&r[i + 1..], off + i + 1)?;
                    if per.is_empty() {
                        return Err(syntax(off + i + 1, "empty period after `|`"));
                    }
                    (parse_list(&r[..i], off)?, per)
                }
                None => (parse_list(r, off)?, Vec::new()),
            },
        };
        Ok(CFWord::raw(a0, pre, per))
    }
}

pub(crate) fn period_stats(period: &[Poly]) -> CfStats {
    let degs: Vec<i64> = period.iter().map(Poly::degree).collect();
    let s = degs.len();
    CfStats {
        max: *degs.iter().max().unwrap(),
        min: *degs.iter().min().unwrap(),
        max_pair: (0..s).map(|i| degs[i] + degs[(i + 1) % s]).max().unwrap(),
    }
}

impl fmt::Display for CFWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[Poly]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        if self.period.is_empty() {
            if self.preperiod.is_empty() {
                write!(f, "[{}]", self.a0)
            } else {
                write!(f, "[{}; {}]", self.a0, join(&self.preperiod))
            }
        } else if self.preperiod.is_empty() {
            write!(f, "[{}; | {}]", self.a0, join(&self.period))
        } else {
            write!(f, "[{}; {} | {}]", self.a0, join(&self.preperiod), join(&self.period))
        }
    }
}

/// The periodic tail inserted by `tau_{j,a}` (or its mirrored form) after a prefix: the
/// letters `a b_j, a^{-1} b_{j+1}, ...` (mirrored: `a^{-1} b_{j-1}, a b_{j-2}, ...`) over one
/// primitive period.
pub fn select_tail(ctx: &FieldCtx, base_period: &[Poly], spec: TwistSpec) -> Result<Vec<Poly>, CfError> {
    let s = base_period.len();
    if s == 0 {
        return Err(CfError::NotQuadratic);
    }
    if spec.a.is_zero() || spec.j == 0 || spec.j > s {
        return Err(CfError::InvalidTwist(format!("j = {} must lie in [1, {s}] and a must be nonzero", spec.j)));
    }
    let j0 = spec.j - 1;
    let seq: Vec<Poly> = if spec.mirrored {
        (0..s).map(|i| base_period[(j0 + 2 * s - 1 - i) % s].clone()).collect()
    } else {
        (0..s).map(|i| base_period[(j0 + i) % s].clone()).collect()
    };
    let a = if spec.mirrored { ctx.inv(spec.a)? } else { spec.a };
    Ok(twist_cyclic(ctx, &seq, a))
}

/// `tau_{j,a}` (or the mirrored `tau'_{j,a}`) as a word `[x1; | x2, ..., xL, x1]` whose
/// letter sequence is the selected tail repeated.
pub fn select_tau(ctx: &FieldCtx, base_period: &[Poly], spec: TwistSpec) -> Result<CFWord, CfError> {
    let tail = select_tail(ctx, base_period, spec)?;
    let mut period = tail[1..].to_vec();
    period.push(tail[0].clone());
    CFWord::new(tail[0].clone(), Vec::new(), period)
}

/// Distance exponent between two canonical words.
pub fn distance(f: &CFWord, g: &CFWord) -> Distance {
    if f == g {
        return Distance::Equal;
    }
    if f.a0 != g.a0 {
        return Distance::Exponent(-Poly::deg_diff(&f.a0, &g.a0));
    }
    let bound = f.preperiod.len() + g.preperiod.len() + 2 * (f.period.len() + g.period.len()) + 2;
    let mut sum = 0i64;
    let mut i = 1;
    loop {
        match (f.letter(i), g.letter(i)) {
            (None, None) => return Distance::Equal,
            (Some(x), None) | (None, Some(x)) => return Distance::Exponent(2 * sum + x.degree()),
            (Some(x), Some(y)) if x != y => {
                return Distance::Exponent(2 * sum + x.degree() + y.degree() - Poly::deg_diff(x, y));
            }
            (Some(x), Some(_)) => sum += x.degree(),
        }
        i += 1;
        if i > bound {
            // Distinct canonical words cannot agree this long (Fine and Wilf).
            debug_assert!(false, "non-canonical words passed to distance");
            return Distance::Equal;
        }
    }
}

/// Whether `f` lies in the orbit of `g` or of its conjugate under `PGL_2(F_q[Y])`.
pub fn equivalent(ctx: &FieldCtx, f: &CFWord, g: &CFWord) -> Result<bool, CfError> {
    f.require_quadratic()?;
    g.require_quadratic()?;
    let fc = cyclic_class(&f.period);
    if f.period.len() != g.period.len() && f.period.len() != 2 * g.period.len() && 2 * f.period.len() != g.period.len()
    {
        return Ok(false);
    }
    Ok(orbit_classes(ctx, &g.period).contains(&fc))
}
