use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Variable name. Cheap to clone, compared by content.
pub type Symbol = Arc<str>;

/// Elementary function tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            _ => return None,
        })
    }
}

/// Node payload of an [`Expr`].
///
/// Quotients are products with negative integer powers. `Root(e, k)` is the
/// principal real `k`-th root; it only appears as the local inverse of a
/// power substitution.
#[derive(Debug)]
pub enum Kind {
    Const(Rational),
    Var(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, i32),
    Func(Func, Expr),
    Root(Expr, u32),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
    /// One bit per variable-name hash; a cleared bit proves absence.
    bloom: u64,
    /// Contains a transcendental or root node (evaluated in floating point).
    approx: bool,
}

/// Immutable, shareable expression tree.
///
/// Constructors apply only local simplifications: constant folding, 0/1
/// absorption, flattening, collection of syntactically equal terms and
/// factors, and power merging. Two expressions that differ only in the order
/// of sum terms or product factors compare equal.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

const TAG_CONST: u64 = 0x9e37_79b9_7f4a_7c15;
const TAG_VAR: u64 = 0xc2b2_ae3d_27d4_eb4f;
const TAG_ADD: u64 = 0x1656_67b1_9e37_79f9;
const TAG_MUL: u64 = 0x85eb_ca77_c2b2_ae63;
const TAG_POW: u64 = 0x27d4_eb2f_1656_67c5;
const TAG_FUNC: u64 = 0xff51_afd7_ed55_8ccd;
const TAG_ROOT: u64 = 0xc4ce_b9fe_1a85_ec53;

fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub(crate) fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn hash_bigint(n: &BigInt) -> u64 {
    let (sign, digits) = n.to_u64_digits();
    let mut h = mix(sign as u64 + 1);
    for d in digits {
        h = mix(h ^ d);
    }
    h
}

pub(crate) fn bloom_bit(name: &str) -> u64 {
    1u64 << (fnv(name.as_bytes()) % 64)
}

impl Expr {
    fn from_kind(kind: Kind) -> Expr {
        let (hash, bloom, approx) = match &kind {
            Kind::Const(c) => (
                mix(TAG_CONST ^ hash_bigint(c.numer()) ^ mix(hash_bigint(c.denom()))),
                0,
                false,
            ),
            Kind::Var(s) => (mix(TAG_VAR ^ fnv(s.as_bytes())), bloom_bit(s), false),
            Kind::Add(ts) | Kind::Mul(ts) => {
                let tag = if matches!(kind, Kind::Add(_)) {
                    TAG_ADD
                } else {
                    TAG_MUL
                };
                let mut h: u64 = 0;
                let mut bloom = 0;
                let mut approx = false;
                for t in ts {
                    h = h.wrapping_add(mix(t.0.hash));
                    bloom |= t.0.bloom;
                    approx |= t.0.approx;
                }
                (mix(tag ^ h), bloom, approx)
            }
            Kind::Pow(b, k) => (
                mix(TAG_POW ^ b.0.hash ^ mix(*k as i64 as u64)),
                b.0.bloom,
                b.0.approx,
            ),
            Kind::Func(f, a) => (mix(TAG_FUNC ^ a.0.hash ^ (*f as u64 + 1)), a.0.bloom, true),
            Kind::Root(a, k) => (
                mix(TAG_ROOT ^ a.0.hash ^ mix(u64::from(*k))),
                a.0.bloom,
                true,
            ),
        };
        Expr(Arc::new(Node {
            kind,
            hash,
            bloom,
            approx,
        }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Structural hash (insensitive to the order of sum terms / product factors).
    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub(crate) fn bloom(&self) -> u64 {
        self.0.bloom
    }

    pub(crate) fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// True if the tree contains `sin`, `cos`, `exp`, `ln` or a root.
    pub fn is_approximate(&self) -> bool {
        self.0.approx
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::from_kind(Kind::Const(c))
    }

    pub fn int(i: i64) -> Expr {
        Expr::constant(Rational::from_integer(BigInt::from(i)))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::constant(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: impl Into<Symbol>) -> Expr {
        Expr::from_kind(Kind::Var(name.into()))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.kind() {
            Kind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self.kind() {
            Kind::Var(s) => Some(s),
            _ => None,
        }
    }

    /// Syntactic zero (the constant `0`).
    pub fn is_zero_literal(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one_literal(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    /// Syntactic occurrence of a variable.
    pub fn contains_var(&self, name: &str) -> bool {
        if self.0.bloom & bloom_bit(name) == 0 {
            return false;
        }
        let mut seen = BTreeSet::new();
        self.contains_var_inner(name, &mut seen)
    }

    fn contains_var_inner(&self, name: &str, seen: &mut BTreeSet<usize>) -> bool {
        if self.0.bloom & bloom_bit(name) == 0 || !seen.insert(self.node_id()) {
            return false;
        }
        match self.kind() {
            Kind::Const(_) => false,
            Kind::Var(s) => &**s == name,
            Kind::Add(ts) | Kind::Mul(ts) => ts.iter().any(|t| t.contains_var_inner(name, seen)),
            Kind::Pow(b, _) => b.contains_var_inner(name, seen),
            Kind::Func(_, a) | Kind::Root(a, _) => a.contains_var_inner(name, seen),
        }
    }

    /// All variables occurring syntactically.
    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Symbol>, seen: &mut BTreeSet<usize>) {
        if self.0.bloom == 0 || !seen.insert(self.node_id()) {
            return;
        }
        match self.kind() {
            Kind::Const(_) => {}
            Kind::Var(s) => {
                out.insert(s.clone());
            }
            Kind::Add(ts) | Kind::Mul(ts) => ts.iter().for_each(|t| t.collect_vars(out, seen)),
            Kind::Pow(b, _) => b.collect_vars(out, seen),
            Kind::Func(_, a) | Kind::Root(a, _) => a.collect_vars(out, seen),
        }
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        fn walk(e: &Expr, seen: &mut BTreeSet<usize>) {
            if !seen.insert(e.node_id()) {
                return;
            }
            match e.kind() {
                Kind::Const(_) | Kind::Var(_) => {}
                Kind::Add(ts) | Kind::Mul(ts) => ts.iter().for_each(|t| walk(t, seen)),
                Kind::Pow(b, _) => walk(b, seen),
                Kind::Func(_, a) | Kind::Root(a, _) => walk(a, seen),
            }
        }
        let mut seen = BTreeSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    /// Sum with like-term collection.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut flat: Vec<Expr> = Vec::new();
        for t in terms {
            match t.kind() {
                Kind::Add(ts) => flat.extend(ts.iter().cloned()),
                _ => flat.push(t),
            }
        }
        let mut constant = Rational::zero();
        let mut groups: Vec<(Expr, Rational)> = Vec::new();
        for t in flat {
            let (c, rest) = split_coeff(&t);
            match rest {
                None => constant += c,
                Some(rest) => match groups.iter_mut().find(|(r, _)| *r == rest) {
                    Some((_, acc)) => *acc += c,
                    None => groups.push((rest, c)),
                },
            }
        }
        let mut out: Vec<Expr> = groups
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(rest, c)| with_coeff(c, rest))
            .collect();
        if !constant.is_zero() {
            out.push(Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_kind(Kind::Add(out)),
        }
    }

    /// Product with power collection; `0·anything = 0`.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coeff = Rational::one();
        let mut groups: Vec<(Expr, i32)> = Vec::new();
        let mut queue: Vec<Expr> = factors.into_iter().collect();
        queue.reverse();
        while let Some(f) = queue.pop() {
            match f.kind() {
                Kind::Const(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= c;
                }
                Kind::Mul(fs) => queue.extend(fs.iter().rev().cloned()),
                _ => {
                    let (base, k) = match f.kind() {
                        Kind::Pow(b, k) => (b.clone(), *k),
                        _ => (f.clone(), 1),
                    };
                    match groups.iter_mut().find(|(b, _)| *b == base) {
                        Some((_, acc)) => match acc.checked_add(k) {
                            Some(s) => *acc = s,
                            None => groups.push((base, k)),
                        },
                        None => groups.push((base, k)),
                    }
                }
            }
        }
        let mut out: Vec<Expr> = Vec::new();
        let mut again: Vec<Expr> = Vec::new();
        for (base, k) in groups {
            if k == 0 {
                continue;
            }
            match base.kind() {
                Kind::Root(_, r) if k % (*r as i32) == 0 => again.push(base.pow(k)),
                _ if k == 1 => out.push(base),
                _ => out.push(Expr::from_kind(Kind::Pow(base, k))),
            }
        }
        if !again.is_empty() {
            out.extend(again);
            out.push(Expr::constant(coeff));
            return Expr::product(out);
        }
        if out.is_empty() {
            return Expr::constant(coeff);
        }
        if coeff.is_one() && out.len() == 1 {
            return out.pop().unwrap();
        }
        if !coeff.is_one() {
            out.insert(0, Expr::constant(coeff));
        }
        Expr::from_kind(Kind::Mul(out))
    }

    /// Integer power. `x^0 = 1`, nested powers merge, powers distribute over products.
    pub fn pow(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return self.clone();
        }
        match self.kind() {
            Kind::Const(c) => {
                if c.is_zero() && k < 0 {
                    Expr::from_kind(Kind::Pow(self.clone(), k))
                } else {
                    Expr::constant(rational_pow(c, k))
                }
            }
            Kind::Pow(b, m) => match m.checked_mul(k) {
                Some(mk) => b.pow(mk),
                None => Expr::from_kind(Kind::Pow(self.clone(), k)),
            },
            Kind::Mul(fs) => Expr::product(fs.iter().map(|f| f.pow(k))),
            Kind::Root(a, r) if k % (*r as i32) == 0 => a.pow(k / *r as i32),
            _ => Expr::from_kind(Kind::Pow(self.clone(), k)),
        }
    }

    pub fn recip(&self) -> Expr {
        self.pow(-1)
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            match f {
                Func::Sin if c.is_zero() => return Expr::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return Expr::one(),
                Func::Ln if c.is_one() => return Expr::zero(),
                _ => {}
            }
        }
        if let (Func::Ln, Kind::Func(Func::Exp, inner)) = (f, arg.kind()) {
            return inner.clone();
        }
        Expr::from_kind(Kind::Func(f, arg))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self.clone())
    }
    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self.clone())
    }
    pub fn ln(&self) -> Expr {
        Expr::apply(Func::Ln, self.clone())
    }

    /// Principal real `k`-th root. Exact for perfect powers of rationals.
    pub fn root(&self, k: u32) -> Expr {
        assert!(k >= 1, "root index must be positive");
        if k == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            if let Some(r) = exact_root(c, k) {
                return Expr::constant(r);
            }
        }
        Expr::from_kind(Kind::Root(self.clone(), k))
    }
}

fn rational_pow(c: &Rational, k: i32) -> Rational {
    let base = if k < 0 { c.recip() } else { c.clone() };
    let mut out = Rational::one();
    for _ in 0..k.unsigned_abs() {
        out *= &base;
    }
    out
}

fn exact_root(c: &Rational, k: u32) -> Option<Rational> {
    if c.is_negative() && k % 2 == 0 {
        return None;
    }
    let neg = c.is_negative();
    let n = c.numer().abs().nth_root(k);
    let d = c.denom().nth_root(k);
    let cand = Rational::new(n, d);
    if rational_pow(&cand, k as i32) == c.abs() {
        Some(if neg { -cand } else { cand })
    } else {
        None
    }
}

/// Split `t` into its constant coefficient and the remaining factor.
fn split_coeff(t: &Expr) -> (Rational, Option<Expr>) {
    match t.kind() {
        Kind::Const(c) => (c.clone(), None),
        Kind::Mul(fs) => match fs[0].kind() {
            Kind::Const(c) => {
                let rest = if fs.len() == 2 {
                    fs[1].clone()
                } else {
                    Expr::from_kind(Kind::Mul(fs[1..].to_vec()))
                };
                (c.clone(), Some(rest))
            }
            _ => (Rational::one(), Some(t.clone())),
        },
        _ => (Rational::one(), Some(t.clone())),
    }
}

fn with_coeff(c: Rational, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    let mut fs = Vec::new();
    fs.push(Expr::constant(c));
    match rest.kind() {
        Kind::Mul(rs) => fs.extend(rs.iter().cloned()),
        _ => fs.push(rest),
    }
    Expr::from_kind(Kind::Mul(fs))
}

fn multiset_eq(a: &[Expr], b: &[Expr]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = alloc::vec![false; b.len()];
    'outer: for x in a {
        for (j, y) in b.iter().enumerate() {
            if !used[j] && x == y {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Const(a), Kind::Const(b)) => a == b,
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::Add(a), Kind::Add(b)) | (Kind::Mul(a), Kind::Mul(b)) => multiset_eq(a, b),
            (Kind::Pow(a, m), Kind::Pow(b, n)) => m == n && a == b,
            (Kind::Func(f, a), Kind::Func(g, b)) => f == g && a == b,
            (Kind::Root(a, m), Kind::Root(b, n)) => m == n && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Expr {
        Expr::int(i)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Expr {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a, b]));
binop!(Sub, sub, |a, b| Expr::sum([a, -b]));
binop!(Mul, mul, |a, b| Expr::product([a, b]));
binop!(Div, div, |a, b| Expr::product([a, b.recip()]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

// ---------------------------------------------------------------------------
// Printing. Output re-parses to an equal expression.

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 3;

fn leading_negative(e: &Expr) -> bool {
    match e.kind() {
        Kind::Const(c) => c.is_negative(),
        Kind::Mul(fs) => fs[0].as_const().is_some_and(Signed::is_negative),
        _ => false,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: &Rational, ctx: u8) -> fmt::Result {
    let compound = c.is_negative() || !c.is_integer();
    if compound && ctx > PREC_ADD {
        write!(f, "(")?;
    }
    if c.is_integer() {
        write!(f, "{}", c.numer())?;
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())?;
    }
    if compound && ctx > PREC_ADD {
        write!(f, ")")?;
    }
    Ok(())
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, ctx: u8) -> fmt::Result {
    match e.kind() {
        Kind::Const(c) => write_const(f, c, ctx),
        Kind::Var(s) => write!(f, "{}", s),
        Kind::Add(ts) => {
            if ctx > PREC_ADD {
                write!(f, "(")?;
            }
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_expr(f, t, PREC_ADD)?;
                } else if leading_negative(t) {
                    write!(f, " - ")?;
                    write_expr(f, &-t, PREC_ADD)?;
                } else {
                    write!(f, " + ")?;
                    write_expr(f, t, PREC_ADD)?;
                }
            }
            if ctx > PREC_ADD {
                write!(f, ")")?;
            }
            Ok(())
        }
        Kind::Mul(fs) => write_product(f, fs, ctx),
        Kind::Pow(b, k) => {
            if *k < 0 {
                if ctx > PREC_ADD {
                    write!(f, "(")?;
                }
                write!(f, "1/")?;
                write_power(f, b, -*k)?;
                if ctx > PREC_ADD {
                    write!(f, ")")?;
                }
                Ok(())
            } else {
                write_power(f, b, *k)
            }
        }
        Kind::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, 0)?;
            write!(f, ")")
        }
        Kind::Root(a, k) => {
            write!(f, "root(")?;
            write_expr(f, a, 0)?;
            write!(f, ", {})", k)
        }
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, b: &Expr, k: i32) -> fmt::Result {
    if k == 1 {
        return write_expr(f, b, PREC_POW);
    }
    write_expr(f, b, PREC_POW + 1)?;
    write!(f, "**{}", k)
}

fn write_product(f: &mut fmt::Formatter<'_>, fs: &[Expr], ctx: u8) -> fmt::Result {
    let (coeff, rest) = match fs[0].as_const() {
        Some(c) => (c.clone(), &fs[1..]),
        None => (Rational::one(), fs),
    };
    let negative = coeff.is_negative();
    let coeff = coeff.abs();
    let mut num: Vec<(&Expr, i32)> = Vec::new();
    let mut den: Vec<(&Expr, i32)> = Vec::new();
    for x in rest {
        match x.kind() {
            Kind::Pow(b, k) if *k < 0 => den.push((b, -*k)),
            Kind::Pow(b, k) => num.push((b, *k)),
            _ => num.push((x, 1)),
        }
    }
    let wrap = ctx > PREC_MUL || (negative && ctx > PREC_ADD);
    if wrap {
        write!(f, "(")?;
    }
    if negative {
        write!(f, "-")?;
    }
    let mut first = true;
    if !coeff.numer().is_one() || num.is_empty() {
        write!(f, "{}", coeff.numer())?;
        first = false;
    }
    for (b, k) in &num {
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write_power(f, b, *k)?;
    }
    let den_count = den.len() + usize::from(!coeff.denom().is_one());
    if den_count > 0 {
        write!(f, "/")?;
        if den_count > 1 {
            write!(f, "(")?;
        }
        let mut first = true;
        if !coeff.denom().is_one() {
            write!(f, "{}", coeff.denom())?;
            first = false;
        }
        for (b, k) in &den {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write_power(f, b, *k)?;
        }
        if den_count > 1 {
            write!(f, ")")?;
        }
    }
    if wrap {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn x() -> Expr {
        Expr::var("x")
    }
    fn y() -> Expr {
        Expr::var("y")
    }

    #[test]
    fn like_terms_collect() {
        let e = &(&x() * &y()) * Expr::int(2) + Expr::int(3) * (y() * x());
        assert_eq!(e, Expr::int(5) * x() * y());
        assert_eq!((x() - x()), Expr::zero());
    }

    #[test]
    fn powers_merge_and_cancel() {
        let e = x().pow(2) * x().pow(-2);
        assert!(e.is_one_literal());
        assert_eq!(x().pow(2).pow(3), x().pow(6));
        assert_eq!((x() * y()).pow(2), x().pow(2) * y().pow(2));
        let s = x() + Expr::one();
        assert!((&s / &s).is_one_literal());
    }

    #[test]
    fn zero_absorbs() {
        assert!((Expr::zero() * (x() + y())).is_zero_literal());
        assert_eq!(Expr::zero() + x(), x());
        assert_eq!(Expr::one() * x(), x());
    }

    #[test]
    fn order_insensitive_equality() {
        assert_eq!(x() + y(), y() + x());
        assert_eq!(x() * y() * Expr::int(3), Expr::int(3) * y() * x());
        assert_ne!(x() - y(), y() - x());
    }

    #[test]
    fn root_of_perfect_power_is_exact() {
        assert_eq!(Expr::frac(4, 9).root(2), Expr::frac(2, 3));
        assert_eq!(Expr::int(-8).root(3), Expr::int(-2));
        assert!(matches!(Expr::int(2).root(2).kind(), Kind::Root(_, 2)));
        assert_eq!(x().root(2).pow(4), x().pow(2));
    }

    #[test]
    fn display_forms() {
        assert_eq!(
            (x() * Expr::var("x4") - Expr::var("x5")).to_string(),
            "x*x4 - x5"
        );
        assert_eq!((Expr::var("x4") + Expr::one()).to_string(), "x4 + 1");
        assert_eq!((x() / (y() + Expr::one())).to_string(), "x/(y + 1)");
        assert_eq!((-x()).to_string(), "-x");
        assert_eq!((Expr::frac(3, 4) * x()).to_string(), "3*x/4");
        assert_eq!(y().recip().to_string(), "1/y");
        assert_eq!((x() + y()).pow(2).to_string(), "(x + y)**2");
        assert_eq!(x().sin().to_string(), "sin(x)");
    }
}
