#![allow(dead_code)]

use quadspec::algebra::{FieldCtx, FieldElement, Poly};
use quadspec::cfword::CFWord;
use rand::Rng;

pub fn field(q: u32) -> FieldCtx {
    FieldCtx::from_order(q).unwrap()
}

pub fn word(ctx: &FieldCtx, s: &str) -> CFWord {
    CFWord::parse(ctx, s).unwrap()
}

pub fn poly(ctx: &FieldCtx, s: &str) -> Poly {
    ctx.parse_poly(s).unwrap()
}

pub fn polys(ctx: &FieldCtx, xs: &[&str]) -> Vec<Poly> {
    xs.iter().map(|s| poly(ctx, s)).collect()
}

/// `[0; | letters]`.
pub fn periodic(ctx: &FieldCtx, xs: &[&str]) -> CFWord {
    CFWord::purely_periodic(polys(ctx, xs)).unwrap()
}

/// Uniform degree in `[min_deg, max_deg]`, then uniform coefficients with nonzero lead.
pub fn random_poly(rng: &mut impl Rng, ctx: &FieldCtx, min_deg: usize, max_deg: usize) -> Poly {
    let q = ctx.order();
    let d = rng.gen_range(min_deg..=max_deg);
    let mut c: Vec<FieldElement> = (0..d).map(|_| ctx.element(rng.gen_range(0..q)).unwrap()).collect();
    c.push(ctx.element(rng.gen_range(1..q)).unwrap());
    Poly::from_coeffs(c)
}

/// A polynomial of degree `>= 1` or a constant, for integer parts.
pub fn random_any_poly(rng: &mut impl Rng, ctx: &FieldCtx, max_deg: usize) -> Poly {
    if rng.gen_bool(0.3) {
        Poly::constant(ctx.element(rng.gen_range(0..ctx.order())).unwrap())
    } else {
        random_poly(rng, ctx, 1, max_deg)
    }
}

pub fn random_letters(rng: &mut impl Rng, ctx: &FieldCtx, len: usize, min_deg: usize, max_deg: usize) -> Vec<Poly> {
    (0..len).map(|_| random_poly(rng, ctx, min_deg, max_deg)).collect()
}

/// A canonical quadratic word with random integer part and preperiod.
pub fn random_word(rng: &mut impl Rng, ctx: &FieldCtx, max_pre: usize, max_period: usize, max_deg: usize) -> CFWord {
    let a0 = random_any_poly(rng, ctx, max_deg);
    let pre_len = rng.gen_range(0..=max_pre);
    let per_len = rng.gen_range(1..=max_period);
    let pre = random_letters(rng, ctx, pre_len, 1, max_deg);
    let per = random_letters(rng, ctx, per_len, 1, max_deg);
    CFWord::new(a0, pre, per).unwrap()
}

/// A canonical purely periodic word with letter degrees in `[min_deg, max_deg]`.
pub fn random_periodic(rng: &mut impl Rng, ctx: &FieldCtx, max_period: usize, min_deg: usize, max_deg: usize) -> CFWord {
    let len = rng.gen_range(1..=max_period);
    CFWord::purely_periodic(random_letters(rng, ctx, len, min_deg, max_deg)).unwrap()
}
