//! Approximation constants, membership in the spectrum, Hall-ray bounds and Hurwitz
//! exponents, all computed combinatorially on continued-fraction words.
//!
//! Every value is an integer exponent `m` standing for `q^{-m}`.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{enumerate_polys, FieldCtx, Poly};
use crate::cfword::{cyclic_class, orbit_classes, orbit_tails, select_tail, CFWord, CfError, TwistSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("word has no period")]
    NotQuadratic,
    #[error("f lies in the orbit of alpha; the approximation constant is undefined there")]
    InTheta,
    #[error("match length {t} exceeds the Fine-Wilf bound {limit}: f lies in the orbit")]
    ThetaMembership { t: usize, limit: usize },
    #[error("exponent {m} at or above the Hall bound {bound} was not found")]
    HallBoundViolation { m: i64, bound: i64 },
    #[error("no canonical approximant along any tail")]
    NoApproximant,
    #[error(transparent)]
    Cf(#[from] CfError),
}

/// `c = q^{-m}` for a finite exponent, or the axiomatic value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxConstant {
    Finite(i64),
    ZeroAxiomatic,
}

/// How a prefix of `f` meets a selected periodic tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchContext {
    pub r: usize,
    pub t: usize,
    pub s_prime_letter: Poly,
    pub last_letter: Poly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Approximant {
    /// `a_r` equals the last tail letter; the approximant is produced at another position.
    Skip,
    Exponent { m: i64, context: MatchContext },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumReport {
    pub q: u32,
    pub alpha_period: Vec<Poly>,
    /// Exponents `m < hall_start` with `q^{-m}` in the spectrum.
    pub exponents_below_bound: Vec<i64>,
    pub hall_start: i64,
    pub hall_bound_coarse: i64,
    pub hurwitz_exponent: i64,
    pub verification_margin: i64,
    pub contains_zero: bool,
    pub zero_is_axiomatic: bool,
}

impl SpectrumReport {
    pub fn contains(&self, m: i64) -> bool {
        m >= self.hall_start || self.exponents_below_bound.binary_search(&m).is_ok()
    }
}

pub const DEFAULT_MARGIN: i64 = 5;

/// Exponent of `|f - beta| h(beta)` where `beta` continues `a_0 .. a_r` by `tail^∞`.
/// `a(k)` returns `a_{r+k}`.
fn exponent_core<'a>(
    a: impl Fn(usize) -> &'a Poly,
    limit: usize,
    tail: &'a [Poly],
) -> Result<Option<(i64, usize, &'a Poly)>, SpectrumError> {
    let l = tail.len();
    let ar = a(0);
    let last = &tail[l - 1];
    if ar == last {
        return Ok(None);
    }
    let mut t = 0;
    let mut sum = 0;
    while a(t + 1) == &tail[t % l] {
        sum += tail[t % l].degree();
        t += 1;
        if t >= limit {
            return Err(SpectrumError::ThetaMembership { t, limit });
        }
    }
    let next = a(t + 1);
    let sp = &tail[t % l];
    let m = 2 * sum + ar.degree() + last.degree() - Poly::deg_diff(ar, last) + next.degree() + sp.degree()
        - Poly::deg_diff(next, sp);
    Ok(Some((m, t, sp)))
}

/// Exponent for the approximant `[a0; a1, ..., a_r, overline(tau)]`, where `tau` is purely
/// periodic (its letters from index 0 repeat with the period length).
pub fn approximant_exponent(f: &CFWord, r: usize, tau: &CFWord) -> Result<Approximant, SpectrumError> {
    if !f.is_quadratic() || !tau.is_quadratic() {
        return Err(SpectrumError::NotQuadratic);
    }
    assert!(r >= 1, "approximant position starts at 1");
    let l = tau.period().len();
    let tail: Vec<Poly> = (0..l).map(|i| tau.letter(i).unwrap().clone()).collect();
    let limit = f.preperiod().len() + f.period().len() + l;
    let hit = exponent_core(|k| f.letter(r + k).unwrap(), limit, &tail)?;
    Ok(match hit {
        None => Approximant::Skip,
        Some((m, t, sp)) => Approximant::Exponent {
            m,
            context: MatchContext { r, t, s_prime_letter: sp.clone(), last_letter: tail[l - 1].clone() },
        },
    })
}

/// Largest exponent over the positions of one period of `period` (cyclic) against `tail`.
fn tail_max(period: &[Poly], tail: &[Poly]) -> Result<Option<i64>, SpectrumError> {
    let n = period.len();
    let limit = n + tail.len();
    let mut best = None;
    for i in 0..n {
        if let Some((m, _, _)) = exponent_core(|k| &period[(i + k) % n], limit, tail)? {
            best = best.max(Some(m));
        }
    }
    Ok(best)
}

/// Exponent of `liminf_r |f - alpha_{r,j,a}| h(alpha_{r,j,a})` for one twist selection, or
/// `None` if every approximant along this selection is produced at another position.
pub fn ell(ctx: &FieldCtx, f: &CFWord, alpha_period: &[Poly], spec: TwistSpec) -> Result<Option<i64>, SpectrumError> {
    if !f.is_quadratic() {
        return Err(SpectrumError::NotQuadratic);
    }
    let tail = select_tail(ctx, alpha_period, spec)?;
    tail_max(f.period(), &tail)
}

/// Precomputed orbit data of a quadratic `alpha`: its period, the cyclic classes of the
/// periods in its orbit, and every periodic tail an approximant can end with.
#[derive(Debug, Clone)]
pub struct Orbit {
    period: Vec<Poly>,
    classes: HashSet<Vec<Poly>>,
    tails: Vec<Vec<Poly>>,
}

impl Orbit {
    pub fn new(ctx: &FieldCtx, alpha: &CFWord) -> Result<Self, SpectrumError> {
        if !alpha.is_quadratic() {
            return Err(SpectrumError::NotQuadratic);
        }
        let period = alpha.period().to_vec();
        Ok(Orbit { classes: orbit_classes(ctx, &period), tails: orbit_tails(ctx, &period), period })
    }

    pub fn period(&self) -> &[Poly] {
        &self.period
    }

    pub fn tails(&self) -> &[Vec<Poly>] {
        &self.tails
    }

    /// Whether a series with this (cyclic) period lies in the orbit.
    pub fn contains_period(&self, period: &[Poly]) -> bool {
        self.classes.contains(&cyclic_class(period))
    }

    /// Exponent of `c_alpha(f)` for `f` with the given period.
    pub fn exponent(&self, period: &[Poly]) -> Result<i64, SpectrumError> {
        if self.contains_period(period) {
            return Err(SpectrumError::InTheta);
        }
        let mut best = None;
        for tail in &self.tails {
            best = best.max(tail_max(period, tail)?);
        }
        best.ok_or(SpectrumError::NoApproximant)
    }
}

/// `c_alpha(f)`; depends only on the orbit of `alpha` and on the tail of `f`.
pub fn approx_constant(ctx: &FieldCtx, alpha: &CFWord, f: &CFWord) -> Result<ApproxConstant, SpectrumError> {
    if !f.is_quadratic() {
        return Err(SpectrumError::NotQuadratic);
    }
    Ok(ApproxConstant::Finite(Orbit::new(ctx, alpha)?.exponent(f.period())?))
}

/// `(coarse, refined)` starts of the Hall ray.
pub fn hall_bound(alpha: &CFWord) -> Result<(i64, i64), SpectrumError> {
    if !alpha.is_quadratic() {
        return Err(SpectrumError::NotQuadratic);
    }
    let b = alpha.period();
    let s = b.len();
    let d = b.iter().map(Poly::degree).max().unwrap();
    let sum: i64 = b.iter().map(Poly::degree).sum();
    let follow = (0..s).filter(|&i| b[i].degree() == d).map(|i| b[(i + 1) % s].degree()).min().unwrap();
    Ok((2 * d * (s as i64 + 1), 2 * sum + d + follow))
}

/// Factors `W0` (including the empty word) of the orbit tails with `2 Σ deg W0 <= max_m - 2`.
fn tail_factors(orbit: &Orbit, max_m: i64) -> Vec<Vec<Poly>> {
    let mut out: HashSet<Vec<Poly>> = HashSet::new();
    out.insert(Vec::new());
    for tail in orbit.tails() {
        let mut w = Vec::new();
        let mut sum = 0;
        for k in 0.. {
            let x = &tail[k % tail.len()];
            sum += x.degree();
            if 2 * sum > max_m - 2 {
                break;
            }
            w.push(x.clone());
            out.insert(w.clone());
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort();
    v
}

/// Every exponent realised by the structured candidates `[0; overline(P1 W0 P2)]` whose
/// middle factor satisfies `2 Σ deg W0 <= max_m - 2`, capped at `max_m`.
pub fn candidate_exponents(ctx: &FieldCtx, alpha: &CFWord, max_m: i64) -> Result<BTreeSet<i64>, SpectrumError> {
    let orbit = Orbit::new(ctx, alpha)?;
    let d = orbit.period().iter().map(Poly::degree).max().unwrap() as usize;
    let polys = enumerate_polys(ctx, 1, d + 1);
    let factors = tail_factors(&orbit, max_m);
    let jobs: Vec<(usize, usize)> =
        (0..factors.len()).flat_map(|w| (0..polys.len()).map(move |p| (w, p))).collect();
    jobs.par_iter()
        .map(|&(w, p1)| {
            let mut found = BTreeSet::new();
            let mut word = Vec::with_capacity(factors[w].len() + 2);
            for p2 in &polys {
                word.clear();
                word.push(polys[p1].clone());
                word.extend_from_slice(&factors[w]);
                word.push(p2.clone());
                match orbit.exponent(&word) {
                    Ok(m) if m <= max_m => {
                        found.insert(m);
                    }
                    Ok(_) | Err(SpectrumError::InTheta) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(found)
        })
        .try_reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            Ok(a)
        })
}

/// Whether `q^{-m}` is in the spectrum of `alpha`.
pub fn membership(ctx: &FieldCtx, alpha: &CFWord, m: i64) -> Result<bool, SpectrumError> {
    if m < 2 {
        return Ok(false);
    }
    Ok(candidate_exponents(ctx, alpha, m)?.contains(&m))
}

/// Smallest `m` with `q^{-m}` in the spectrum.
pub fn hurwitz(ctx: &FieldCtx, alpha: &CFWord) -> Result<i64, SpectrumError> {
    let (_, refined) = hall_bound(alpha)?;
    for m in 2..refined {
        if membership(ctx, alpha, m)? {
            return Ok(m);
        }
    }
    Ok(refined)
}

/// All exponents up to `hall_start + margin`, with the Hall ray verified over the margin.
pub fn spectrum(ctx: &FieldCtx, alpha: &CFWord, margin: i64) -> Result<SpectrumReport, SpectrumError> {
    let (coarse, refined) = hall_bound(alpha)?;
    let found = candidate_exponents(ctx, alpha, refined + margin)?;
    if let Some(m) = (refined..=refined + margin).find(|m| !found.contains(m)) {
        return Err(SpectrumError::HallBoundViolation { m, bound: refined });
    }
    Ok(SpectrumReport {
        q: ctx.order(),
        alpha_period: alpha.period().to_vec(),
        exponents_below_bound: found.iter().copied().filter(|&m| m < refined).collect(),
        hall_start: refined,
        hall_bound_coarse: coarse,
        hurwitz_exponent: *found.iter().next().unwrap(),
        verification_margin: margin,
        contains_zero: true,
        zero_is_axiomatic: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FieldElement;

    fn k(q: u32) -> FieldCtx {
        FieldCtx::from_order(q).unwrap()
    }

    fn w(ctx: &FieldCtx, s: &str) -> CFWord {
        CFWord::parse(ctx, s).unwrap()
    }

    fn cst(ctx: &FieldCtx, a: &str, f: &str) -> Result<ApproxConstant, SpectrumError> {
        approx_constant(ctx, &w(ctx, a), &w(ctx, f))
    }

    #[test]
    fn approximant_examples() {
        let k2 = k(2);
        let tau = w(&k2, "[Y; | Y]");
        let m = |f: &str, r| match approximant_exponent(&w(&k2, f), r, &tau).unwrap() {
            Approximant::Exponent { m, context } => (m, context.t),
            Approximant::Skip => panic!("unexpected skip"),
        };
        assert_eq!(m("[0; | Y^2]", 1), (2, 0));
        assert_eq!(m("[0; | Y^2, Y, Y^2]", 1), (4, 1));
        let tau2 = w(&k2, "[Y^2; | Y^2]");
        assert_eq!(approximant_exponent(&w(&k2, "[0; | Y, Y^2]"), 2, &tau2).unwrap(), Approximant::Skip);
    }

    #[test]
    fn match_limit_flags_orbit_members() {
        let k2 = k(2);
        let tau = w(&k2, "[Y; | Y]");
        let f = w(&k2, "[0; Y^2 | Y]");
        assert!(matches!(approximant_exponent(&f, 1, &tau), Err(SpectrumError::ThetaMembership { .. })));
    }

    #[test]
    fn ell_examples() {
        let k2 = k(2);
        let y = vec![Poly::y()];
        let spec = TwistSpec { j: 1, a: FieldElement::ONE, mirrored: false };
        assert_eq!(ell(&k2, &w(&k2, "[0; | Y^2, Y^2]"), &y, spec).unwrap(), Some(2));
        assert_eq!(ell(&k2, &w(&k2, "[0; | Y^2, Y^2, Y+1]"), &y, spec).unwrap(), Some(3));
        let mirrored = TwistSpec { mirrored: true, ..spec };
        let f = w(&k2, "[0; | Y^2, Y+1, Y^3]");
        assert_eq!(ell(&k2, &f, &y, spec).unwrap(), ell(&k2, &f, &y, mirrored).unwrap());
    }

    #[test]
    fn approx_constant_examples() {
        let k2 = k(2);
        assert_eq!(cst(&k2, "[0; | Y]", "[0; | Y^2, Y^2]").unwrap(), ApproxConstant::Finite(2));
        assert_eq!(cst(&k2, "[0; | Y]", "[0; | Y^3]").unwrap(), ApproxConstant::Finite(2));
        assert_eq!(cst(&k2, "[0; | Y, Y^4, Y+1, Y^4+1]", "[0; | Y^2]").unwrap(), ApproxConstant::Finite(3));
        assert_eq!(cst(&k2, "[0; | Y, Y^2]", "[Y; Y^3 | Y^2, Y]"), Err(SpectrumError::InTheta));
        assert_eq!(cst(&k2, "[0; | Y]", "[0; Y]"), Err(SpectrumError::NotQuadratic));
    }

    #[test]
    fn hall_bound_examples() {
        let k2 = k(2);
        assert_eq!(hall_bound(&w(&k2, "[0; | Y]")).unwrap(), (4, 4));
        assert_eq!(hall_bound(&w(&k2, "[0; | Y, Y^4, Y+1, Y^4+1]")).unwrap(), (40, 25));
        assert_eq!(hall_bound(&w(&k2, "[0; | Y^2]")).unwrap().0, 8);
        assert_eq!(hall_bound(&w(&k2, "[0; Y]")), Err(SpectrumError::NotQuadratic));
    }

    #[test]
    fn membership_examples() {
        let k2 = k(2);
        let a = w(&k2, "[0; | Y]");
        assert!(membership(&k2, &a, 2).unwrap());
        assert!(!membership(&k2, &a, 1).unwrap());
        let five = w(&k2, "[0; | Y, Y^4, Y+1, Y^4+1]");
        assert!(!membership(&k2, &five, 2).unwrap());
        assert_eq!(hurwitz(&k2, &five).unwrap(), 3);
    }

    #[test]
    fn spectrum_of_degree_one_period() {
        let k2 = k(2);
        let rep = spectrum(&k2, &w(&k2, "[0; | Y]"), DEFAULT_MARGIN).unwrap();
        assert_eq!(rep.hall_start, 4);
        assert_eq!(rep.exponents_below_bound, vec![2, 3]);
        assert_eq!(rep.hurwitz_exponent, 2);
        assert!(rep.contains(17) && !rep.contains(1));
    }
}
