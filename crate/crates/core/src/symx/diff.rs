use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::expr::{bloom_bit, Expr, Func, Kind};

struct Diff<'a> {
    var: &'a str,
    bit: u64,
    memo: BTreeMap<usize, Expr>,
}

impl Diff<'_> {
    fn go(&mut self, e: &Expr) -> Expr {
        if e.bloom() & self.bit == 0 {
            return Expr::zero();
        }
        if let Some(d) = self.memo.get(&e.node_id()) {
            return d.clone();
        }
        let d = match e.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Var(s) => {
                if &**s == self.var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Add(ts) => Expr::sum(ts.iter().map(|t| self.go(t)).collect::<Vec<_>>()),
            Kind::Mul(fs) => {
                let mut terms = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    let df = self.go(f);
                    if df.is_zero_literal() {
                        continue;
                    }
                    let mut prod = Vec::with_capacity(fs.len());
                    prod.push(df);
                    prod.extend(
                        fs.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, g)| g.clone()),
                    );
                    terms.push(Expr::product(prod));
                }
                Expr::sum(terms)
            }
            Kind::Pow(b, k) => {
                let db = self.go(b);
                Expr::product([Expr::int(i64::from(*k)), b.pow(*k - 1), db])
            }
            Kind::Func(f, a) => {
                let da = self.go(a);
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Exp => e.clone(),
                    Func::Ln => a.recip(),
                };
                outer * da
            }
            Kind::Root(a, k) => {
                let da = self.go(a);
                Expr::product([e.clone(), da, Expr::frac(1, i64::from(*k)), a.recip()])
            }
        };
        self.memo.insert(e.node_id(), d.clone());
        d
    }
}

/// Exact partial derivative `∂e/∂var`.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    Diff {
        var,
        bit: bloom_bit(var),
        memo: BTreeMap::new(),
    }
    .go(e)
}

/// Partial derivatives with respect to each variable in order.
pub fn gradient<S: AsRef<str>>(e: &Expr, vars: &[S]) -> Vec<Expr> {
    vars.iter().map(|v| differentiate(e, v.as_ref())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symx::{parse, Vocabulary};

    fn p(s: &str) -> Expr {
        parse(s, &Vocabulary::new(["x", "y", "x1", "x6", "x7", "x8"])).unwrap()
    }

    #[test]
    fn rules() {
        assert_eq!(differentiate(&p("x6*(x7 - x8 + x1)"), "x7"), p("x6"));
        assert!(differentiate(&p("3"), "x").is_zero_literal());
        assert_eq!(differentiate(&p("ln(x)"), "x"), p("1/x"));
        assert_eq!(differentiate(&p("x**3"), "x"), p("3*x**2"));
        assert_eq!(differentiate(&p("sin(x*y)"), "x"), p("y*cos(x*y)"));
        assert_eq!(differentiate(&p("1/x"), "x"), p("-1/x**2"));
    }

    #[test]
    fn untouched_variable_is_zero() {
        assert!(differentiate(&p("x**2 + sin(x)"), "y").is_zero_literal());
    }
}
