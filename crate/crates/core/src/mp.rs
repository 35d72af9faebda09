//! Thin complex arithmetic over `astro_float::BigFloat` plus a
//! multiprecision Gauss–Legendre rule.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) type Rule = (Vec<BigFloat>, Vec<BigFloat>);

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

pub(crate) struct Ctx {
    pub p: usize,
    pub cc: Consts,
}

impl Ctx {
    pub fn new(bits: usize) -> Self {
        let p = bits.div_ceil(64) * 64;
        Self { p, cc: Consts::new().expect("astro-float constants cache") }
    }

    pub fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn int(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.p)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }
}

pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((m, _, s, e, _)) => {
            let top = *m.last().unwrap_or(&0) as f64;
            let v = top * 2f64.powi(e - 64);
            if s == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

#[derive(Clone)]
pub(crate) struct C {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl C {
    pub fn zero(ctx: &Ctx) -> Self {
        Self { re: ctx.f(0.0), im: ctx.f(0.0) }
    }

    pub fn from_c64(ctx: &Ctx, z: Complex64) -> Self {
        Self { re: ctx.f(z.re), im: ctx.f(z.im) }
    }

    pub fn real(x: BigFloat, ctx: &Ctx) -> Self {
        Self { re: x, im: ctx.f(0.0) }
    }

    pub fn add(&self, o: &C, p: usize) -> C {
        C { re: self.re.add(&o.re, p, RM), im: self.im.add(&o.im, p, RM) }
    }

    pub fn sub(&self, o: &C, p: usize) -> C {
        C { re: self.re.sub(&o.re, p, RM), im: self.im.sub(&o.im, p, RM) }
    }

    pub fn mul(&self, o: &C, p: usize) -> C {
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        C { re, im }
    }

    pub fn scale(&self, s: &BigFloat, p: usize) -> C {
        C { re: self.re.mul(s, p, RM), im: self.im.mul(s, p, RM) }
    }

    pub fn abs(&self, p: usize) -> BigFloat {
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM).sqrt(p, RM)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    /// `exp(x + i y)`.
    pub fn exp(&self, ctx: &mut Ctx) -> C {
        let p = ctx.p;
        self.exp_at(p, ctx)
    }

    /// `exp(x + i y)` at precision `p`.
    pub fn exp_at(&self, p: usize, ctx: &mut Ctx) -> C {
        let m = self.re.exp(p, RM, &mut ctx.cc);
        if self.im.is_zero() {
            return C::real(m, ctx);
        }
        let c = self.im.cos(p, RM, &mut ctx.cc);
        let s = self.im.sin(p, RM, &mut ctx.cc);
        C { re: m.mul(&c, p, RM), im: m.mul(&s, p, RM) }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` at the context precision,
/// refined from double-precision seeds by Newton steps.
pub(crate) fn gauss_legendre(ctx: &Ctx, n: usize) -> Arc<Rule> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<Rule>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().expect("rule cache").get(&(n, ctx.p)) {
        return r.clone();
    }
    let r = Arc::new(build_rule(ctx, n));
    cache.lock().expect("rule cache").insert((n, ctx.p), r.clone());
    r
}

fn build_rule(ctx: &Ctx, n: usize) -> Rule {
    let p = ctx.p;
    let seed = crate::quad::GaussLegendre::new(n);
    let one = ctx.f(1.0);
    let two = ctx.f(2.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let steps = (p as f64 / 50.0).log2().ceil() as usize + 2;
    for &x0 in &seed.nodes {
        let mut x = ctx.f(x0);
        let mut dp = ctx.f(1.0);
        for _ in 0..steps {
            let (pn, d) = legendre(ctx, n, &x);
            x = x.sub(&pn.div(&d, p, RM), p, RM);
            dp = d;
        }
        let (_, d) = legendre(ctx, n, &x);
        if !d.is_zero() {
            dp = d;
        }
        let w = two.div(&one.sub(&x.mul(&x, p, RM), p, RM).mul(&dp.mul(&dp, p, RM), p, RM), p, RM);
        nodes.push(x);
        weights.push(w);
    }
    (nodes, weights)
}

fn legendre(ctx: &Ctx, n: usize, x: &BigFloat) -> (BigFloat, BigFloat) {
    let p = ctx.p;
    let mut p0 = ctx.f(1.0);
    let mut p1 = x.clone();
    for k in 2..=n {
        let a = ctx.int((2 * k - 1) as i64).mul(x, p, RM).mul(&p1, p, RM);
        let b = ctx.int((k - 1) as i64).mul(&p0, p, RM);
        let p2 = a.sub(&b, p, RM).div(&ctx.int(k as i64), p, RM);
        p0 = p1;
        p1 = p2;
    }
    let num = ctx.int(n as i64).mul(&x.mul(&p1, p, RM).sub(&p0, p, RM), p, RM);
    let den = x.mul(x, p, RM).sub(&ctx.f(1.0), p, RM);
    (p1, num.div(&den, p, RM))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn high_precision_rule_integrates_exp() {
        let mut ctx = Ctx::new(256);
        let rule = gauss_legendre(&ctx, 24);
        let (x, w) = (&rule.0, &rule.1);
        let p = ctx.p;
        let mut s = ctx.f(0.0);
        for (xi, wi) in x.iter().zip(w.iter()) {
            s = s.add(&wi.mul(&xi.exp(p, RM, &mut ctx.cc), p, RM), p, RM);
        }
        // e - 1/e
        let e = ctx.f(1.0).exp(p, RM, &mut ctx.cc);
        let want = e.sub(&ctx.f(1.0).div(&e, p, RM), p, RM);
        let err = s.sub(&want, p, RM).abs();
        let digits = to_f64(&err);
        assert!(digits.abs() < 1e-60, "{digits:e}");
    }

    #[test]
    fn conversion_round_trips() {
        let ctx = Ctx::new(128);
        for v in [1.0, -2.5, 3.5e-200, 7.25e150] {
            assert_eq!(to_f64(&ctx.f(v)), v);
        }
    }
}
