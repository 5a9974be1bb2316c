use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::expr::{bloom_bit, Expr, Kind, Symbol};

/// Variable bindings for [`substitute`].
pub type Bindings = BTreeMap<Symbol, Expr>;

struct Subst<'a> {
    map: &'a Bindings,
    mask: u64,
    memo: BTreeMap<usize, Expr>,
}

impl Subst<'_> {
    fn go(&mut self, e: &Expr) -> Expr {
        if e.bloom() & self.mask == 0 {
            return e.clone();
        }
        if let Some(r) = self.memo.get(&e.node_id()) {
            return r.clone();
        }
        let r = match e.kind() {
            Kind::Const(_) => e.clone(),
            Kind::Var(s) => self.map.get(s).cloned().unwrap_or_else(|| e.clone()),
            Kind::Add(ts) => Expr::sum(ts.iter().map(|t| self.go(t)).collect::<Vec<_>>()),
            Kind::Mul(fs) => Expr::product(fs.iter().map(|f| self.go(f)).collect::<Vec<_>>()),
            Kind::Pow(b, k) => self.go(b).pow(*k),
            Kind::Func(f, a) => Expr::apply(*f, self.go(a)),
            Kind::Root(a, k) => self.go(a).root(*k),
        };
        self.memo.insert(e.node_id(), r.clone());
        r
    }
}

/// Simultaneous substitution; unbound variables are left alone.
pub fn substitute(e: &Expr, bindings: &Bindings) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    let mask = bindings.keys().fold(0, |m, k| m | bloom_bit(k));
    Subst {
        map: bindings,
        mask,
        memo: BTreeMap::new(),
    }
    .go(e)
}

pub fn substitute_one(e: &Expr, var: &Symbol, by: &Expr) -> Expr {
    let mut b = Bindings::new();
    b.insert(var.clone(), by.clone());
    substitute(e, &b)
}
