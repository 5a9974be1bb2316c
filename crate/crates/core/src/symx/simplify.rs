//! Rational normal form: a polynomial numerator over a product of monic
//! polynomial factors, with common factors cancelled by exact division.
//! Transcendental and root subterms are treated as opaque atoms.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Zero};

use super::expr::{Expr, Kind};
use super::Rational;

/// Largest polynomial (in terms) the simplifier builds before giving up.
const TERM_LIMIT: usize = 4000;

type Mono = Vec<(u32, u32)>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly(BTreeMap<Mono, Rational>);

struct TooBig;

type R<T> = core::result::Result<T, TooBig>;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(x, e)), Some(&(y, f))) if x == y => {
                out.push((x, e + f));
                i += 1;
                j += 1;
            }
            (Some(&(x, e)), Some(&(y, _))) if x < y => {
                out.push((x, e));
                i += 1;
            }
            (Some(_), Some(&(y, f))) => {
                out.push((y, f));
                j += 1;
            }
            (Some(&p), None) => {
                out.push(p);
                i += 1;
            }
            (None, Some(&p)) => {
                out.push(p);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// `a / b` if `b` divides `a`.
fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut out = Vec::new();
    let mut j = 0;
    for &(x, e) in a {
        if let Some(&(y, f)) = b.get(j) {
            if y < x {
                return None;
            }
            if y == x {
                j += 1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((x, e - f));
                }
                continue;
            }
        }
        out.push((x, e));
    }
    if j < b.len() {
        return None;
    }
    Some(out)
}

/// Lexicographic order, smaller atom index most significant.
fn mono_cmp(a: &Mono, b: &Mono) -> Ordering {
    for k in 0.. {
        return match (a.get(k), b.get(k)) {
            (None, None) => Ordering::Equal,
            (Some(_), None) => Ordering::Greater,
            (None, Some(_)) => Ordering::Less,
            (Some(&(x, e)), Some(&(y, f))) => {
                if x < y {
                    Ordering::Greater
                } else if x > y {
                    Ordering::Less
                } else if e != f {
                    e.cmp(&f)
                } else {
                    continue;
                }
            }
        };
    }
    unreachable!()
}

impl Poly {
    fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    fn constant(c: Rational) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Vec::new(), c);
        }
        Poly(m)
    }

    fn atom(i: u32) -> Poly {
        let mut m = BTreeMap::new();
        m.insert(alloc::vec![(i, 1)], Rational::one());
        Poly(m)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn as_const(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    fn check(self) -> R<Poly> {
        if self.0.len() > TERM_LIMIT {
            Err(TooBig)
        } else {
            Ok(self)
        }
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(acc) => {
                *acc += c;
                if acc.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, c);
            }
        }
    }

    fn add(&self, o: &Poly) -> R<Poly> {
        let mut out = self.clone();
        for (m, c) in &o.0 {
            out.add_term(m.clone(), c.clone());
        }
        out.check()
    }

    fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    fn mul(&self, o: &Poly) -> R<Poly> {
        if self.0.len().saturating_mul(o.0.len()) > TERM_LIMIT * 8 {
            return Err(TooBig);
        }
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            for (n, d) in &o.0 {
                out.add_term(mono_mul(m, n), c * d);
            }
        }
        out.check()
    }

    fn pow(&self, k: u32) -> R<Poly> {
        let mut out = Poly::constant(Rational::one());
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    fn leading(&self) -> Option<(&Mono, &Rational)> {
        self.0.iter().max_by(|a, b| mono_cmp(a.0, b.0))
    }

    /// Exact quotient `self / d`, if `d` divides `self`.
    fn div_exact(&self, d: &Poly) -> R<Option<Poly>> {
        let (dm, dc) = match d.leading() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Ok(None),
        };
        let mut r = self.clone();
        let mut q = Poly::zero();
        let mut steps = 0;
        while let Some((rm, rc)) = r.leading() {
            steps += 1;
            if steps > TERM_LIMIT {
                return Err(TooBig);
            }
            let Some(t) = mono_div(rm, &dm) else {
                return Ok(None);
            };
            let c = rc / &dc;
            let mut term = Poly::zero();
            term.add_term(t.clone(), c.clone());
            q.add_term(t, c);
            r = r.add(&term.mul(d)?.scale(&-Rational::one()))?;
        }
        Ok(Some(q))
    }

    /// Smallest exponent of each atom over all terms.
    fn mono_gcd(&self) -> Mono {
        let mut it = self.0.keys();
        let Some(first) = it.next() else {
            return Vec::new();
        };
        let mut g = first.clone();
        for m in it {
            g.retain_mut(|(x, e)| match m.iter().find(|(y, _)| y == x) {
                Some(&(_, f)) => {
                    *e = (*e).min(f);
                    true
                }
                None => false,
            });
        }
        g
    }

    fn div_mono(&self, m: &Mono) -> Poly {
        Poly(
            self.0
                .iter()
                .map(|(n, c)| (mono_div(n, m).unwrap(), c.clone()))
                .collect(),
        )
    }
}

/// `num / prod(den_i^e_i)` with monic, non-constant factors.
#[derive(Clone, Debug)]
struct Rat {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl Rat {
    fn poly(p: Poly) -> Rat {
        Rat {
            num: p,
            den: Vec::new(),
        }
    }

    fn cancel(mut self) -> R<Rat> {
        if self.num.is_zero() {
            self.den.clear();
            return Ok(self);
        }
        for (f, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(f)? {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
        Ok(self)
    }

    fn den_factor(den: &mut Vec<(Poly, u32)>, f: Poly, e: u32) {
        match den.iter_mut().find(|(g, _)| *g == f) {
            Some((_, acc)) => *acc += e,
            None => den.push((f, e)),
        }
    }

    fn mul(&self, o: &Rat) -> R<Rat> {
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            Rat::den_factor(&mut den, f.clone(), *e);
        }
        Rat {
            num: self.num.mul(&o.num)?,
            den,
        }
        .cancel()
    }

    fn add(&self, o: &Rat) -> R<Rat> {
        if self.den.is_empty() && o.den.is_empty() {
            return Ok(Rat::poly(self.num.add(&o.num)?));
        }
        let mut lcm: Vec<(Poly, u32)> = self.den.clone();
        for (f, e) in &o.den {
            match lcm.iter_mut().find(|(g, _)| g == f) {
                Some((_, acc)) => *acc = (*acc).max(*e),
                None => lcm.push((f.clone(), *e)),
            }
        }
        let lift = |r: &Rat| -> R<Poly> {
            let mut p = r.num.clone();
            for (f, e) in &lcm {
                let have = r.den.iter().find(|(g, _)| g == f).map_or(0, |(_, k)| *k);
                if *e > have {
                    p = p.mul(&f.pow(*e - have)?)?;
                }
            }
            Ok(p)
        };
        let num = lift(self)?.add(&lift(o)?)?;
        Rat { num, den: lcm }.cancel()
    }

    fn recip(&self) -> Option<R<Rat>> {
        if self.num.is_zero() {
            return None;
        }
        Some((|| {
            let g = self.num.mono_gcd();
            let rest = self.num.div_mono(&g);
            let (_, lc) = rest.leading().unwrap();
            let lc = lc.clone();
            let mut den = Vec::new();
            for &(x, e) in &g {
                den.push((Poly::atom(x), e));
            }
            let mut num = Poly::constant(lc.recip());
            if rest.as_const().is_none() {
                den.push((rest.scale(&lc.recip()), 1));
            }
            for (f, e) in &self.den {
                num = num.mul(&f.pow(*e)?)?;
            }
            Rat { num, den }.cancel()
        })())
    }
}

struct Ctx {
    atoms: Vec<Expr>,
    /// Root atoms: index, order and the radicand.
    roots: BTreeMap<u32, (u32, Rat)>,
    memo: BTreeMap<usize, Option<Rat>>,
}

impl Ctx {
    fn atom(&mut self, e: Expr) -> u32 {
        match self.atoms.iter().position(|a| *a == e) {
            Some(i) => i as u32,
            None => {
                self.atoms.push(e);
                (self.atoms.len() - 1) as u32
            }
        }
    }

    /// Replace `root^k` (and higher powers) by the radicand.
    fn reduce_roots(&self, r: Rat) -> R<Rat> {
        let hit = r.num.0.keys().any(|m| {
            m.iter()
                .any(|(x, e)| self.roots.get(x).is_some_and(|(k, _)| e >= k))
        });
        if !hit {
            return Ok(r);
        }
        let mut acc = Rat::poly(Poly::zero());
        for (m, c) in &r.num.0 {
            let mut mono = Vec::new();
            let mut factor = Rat::poly(Poly::constant(c.clone()));
            for &(x, e) in m {
                match self.roots.get(&x) {
                    Some((k, arg)) if e >= *k => {
                        for _ in 0..e / k {
                            factor = factor.mul(arg)?;
                        }
                        if e % k > 0 {
                            mono.push((x, e % k));
                        }
                    }
                    _ => mono.push((x, e)),
                }
            }
            let mut p = Poly::zero();
            p.add_term(mono, Rational::one());
            acc = acc.add(&factor.mul(&Rat::poly(p))?)?;
        }
        acc.mul(&Rat {
            num: Poly::constant(Rational::one()),
            den: r.den,
        })
    }

    fn convert(&mut self, e: &Expr) -> Option<R<Rat>> {
        if let Some(r) = self.memo.get(&e.node_id()) {
            return r.clone().map(Ok);
        }
        let out = self.convert_inner(e);
        let stored = match &out {
            Some(Ok(r)) => Some(r.clone()),
            _ => None,
        };
        if stored.is_some() {
            self.memo.insert(e.node_id(), stored);
        }
        out
    }

    fn convert_inner(&mut self, e: &Expr) -> Option<R<Rat>> {
        Some(match e.kind() {
            Kind::Const(c) => Ok(Rat::poly(Poly::constant(c.clone()))),
            Kind::Var(_) => {
                let i = self.atom(e.clone());
                Ok(Rat::poly(Poly::atom(i)))
            }
            Kind::Add(ts) => {
                let mut acc = Rat::poly(Poly::zero());
                for t in ts {
                    let r = match self.convert(t)? {
                        Ok(r) => r,
                        Err(b) => return Some(Err(b)),
                    };
                    acc = match acc.add(&r) {
                        Ok(a) => a,
                        Err(b) => return Some(Err(b)),
                    };
                }
                Ok(acc)
            }
            Kind::Mul(fs) => {
                let mut acc = Rat::poly(Poly::constant(Rational::one()));
                for f in fs {
                    let r = match self.convert(f)? {
                        Ok(r) => r,
                        Err(b) => return Some(Err(b)),
                    };
                    acc = match acc.mul(&r).and_then(|a| self.reduce_roots(a)) {
                        Ok(a) => a,
                        Err(b) => return Some(Err(b)),
                    };
                }
                Ok(acc)
            }
            Kind::Pow(b, k) => {
                let base = match self.convert(b)? {
                    Ok(r) => r,
                    Err(t) => return Some(Err(t)),
                };
                let base = if *k < 0 {
                    match base.recip()? {
                        Ok(r) => r,
                        Err(t) => return Some(Err(t)),
                    }
                } else {
                    base
                };
                let mut acc = Rat::poly(Poly::constant(Rational::one()));
                for _ in 0..k.unsigned_abs() {
                    acc = match acc.mul(&base).and_then(|a| self.reduce_roots(a)) {
                        Ok(a) => a,
                        Err(t) => return Some(Err(t)),
                    };
                }
                Ok(acc)
            }
            Kind::Func(f, a) => {
                let arg = simplify_in(self, a)?;
                let i = self.atom(Expr::apply(*f, arg));
                Ok(Rat::poly(Poly::atom(i)))
            }
            Kind::Root(a, k) => {
                let arg_rat = match self.convert(a)? {
                    Ok(r) => r,
                    Err(t) => return Some(Err(t)),
                };
                let arg = self.to_expr(&arg_rat);
                let ex = arg.root(*k);
                if !matches!(ex.kind(), Kind::Root(..)) {
                    return self.convert_inner(&ex);
                }
                let i = self.atom(ex);
                self.roots.insert(i, (*k, arg_rat));
                Ok(Rat::poly(Poly::atom(i)))
            }
        })
    }

    fn poly_expr(&self, p: &Poly) -> Expr {
        let mut terms: Vec<(&Mono, &Rational)> = p.0.iter().collect();
        terms.sort_by(|a, b| mono_cmp(b.0, a.0));
        Expr::sum(terms.into_iter().map(|(m, c)| {
            let mut fs = alloc::vec![Expr::constant(c.clone())];
            for &(x, e) in m {
                fs.push(self.atoms[x as usize].pow(e as i32));
            }
            Expr::product(fs)
        }))
    }

    fn to_expr(&self, r: &Rat) -> Expr {
        let mut fs = alloc::vec![self.poly_expr(&r.num)];
        for (f, e) in &r.den {
            fs.push(self.poly_expr(f).pow(-(*e as i32)));
        }
        Expr::product(fs)
    }
}

fn simplify_in(ctx: &mut Ctx, e: &Expr) -> Option<Expr> {
    match ctx.convert(e)? {
        Ok(r) => Some(ctx.to_expr(&r)),
        Err(TooBig) => None,
    }
}

/// Rational normal form of `e`, or `e` itself when the form would exceed the
/// size limit or a denominator is identically zero.
pub fn simplify(e: &Expr) -> Expr {
    if matches!(e.kind(), Kind::Const(_) | Kind::Var(_)) {
        return e.clone();
    }
    let mut ctx = Ctx {
        atoms: Vec::new(),
        roots: BTreeMap::new(),
        memo: BTreeMap::new(),
    };
    simplify_in(&mut ctx, e).unwrap_or_else(|| e.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symx::{is_zero, parse, Vocabulary, ZeroTestConfig};
    use alloc::string::ToString;

    fn p(s: &str) -> Expr {
        parse(s, &Vocabulary::new(["a", "b", "x", "y", "z"])).unwrap()
    }

    fn check(src: &str, want: &str) {
        let e = p(src);
        let s = simplify(&e);
        assert!(
            is_zero(&(&s - &e), &ZeroTestConfig::default()).unwrap(),
            "{} -> {}",
            src,
            s
        );
        assert_eq!(s.to_string(), p(want).to_string(), "{}", src);
    }

    #[test]
    fn cancels_common_factors() {
        check("1/((a + 1)*x) + a/((a + 1)*x)", "1/x");
        check("(x**2 - y**2)/(x - y)", "x + y");
        check("(x + 1)**2 - x**2 - 2*x", "1");
        check("x*y/x", "y");
        check("(a*x + a)/(x + 1)", "a");
    }

    #[test]
    fn keeps_atoms() {
        let e = p("sin(x)**2*(x+1)/(x + 1)");
        let s = simplify(&e);
        assert_eq!(s, p("sin(x)**2"));
        let r = p("root(x, 2)*root(x, 2)*y");
        assert_eq!(simplify(&r), p("x*y"));
    }

    #[test]
    fn leaves_zero_denominators_alone() {
        let e = p("1/(x - x)");
        assert_eq!(simplify(&e), e);
    }
}
