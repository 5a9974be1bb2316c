use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::flatness::{AffineSystem, Verdict};
use crate::symx::{depends_on, is_zero, Expr, Symbol, ZeroTestConfig};
use crate::Result;

/// Block assignment of the states for the triangular form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularPattern {
    /// `x_{1,1}` and `x_{1,2}` chains, top variable first.
    pub x1: [Vec<Symbol>; 2],
    /// `x_2^1, ..., x_2^{n2}`.
    pub x2: Vec<Symbol>,
    /// `x_{3,1}` and `x_{3,2}` chains, top variable first.
    pub x3: [Vec<Symbol>; 2],
}

impl TriangularPattern {
    /// Standard names `x1_j^k`, `x2^k`, `x3_j^k`.
    pub fn standard(chains: [usize; 2], n2: usize, n3: usize) -> Self {
        let chain = |p: &str, j: usize, len: usize| {
            (1..=len)
                .map(|k| format!("{}_{}^{}", p, j, k).into())
                .collect()
        };
        TriangularPattern {
            x1: [chain("x1", 1, chains[0]), chain("x1", 2, chains[1])],
            x2: (1..=n2).map(|k| format!("x2^{}", k).into()).collect(),
            x3: [chain("x3", 1, n3), chain("x3", 2, n3)],
        }
    }

    /// Chained-form names `x^1, ..., x^n`.
    pub fn chained(n: usize) -> Self {
        TriangularPattern {
            x1: [Vec::new(), Vec::new()],
            x2: (1..=n).map(|k| format!("x^{}", k).into()).collect(),
            x3: [Vec::new(), Vec::new()],
        }
    }

    /// `(n_{1,1}, n_{1,2}, n_2, n_3)`.
    pub fn lengths(&self) -> (usize, usize, usize, usize) {
        (
            self.x1[0].len(),
            self.x1[1].len(),
            self.x2.len(),
            self.x3[0].len(),
        )
    }

    pub fn n(&self) -> usize {
        let (a, b, c, d) = self.lengths();
        a + b + c + 2 * d
    }

    /// All states in block order.
    pub fn order(&self) -> Vec<Symbol> {
        self.x1[0]
            .iter()
            .chain(&self.x1[1])
            .chain(&self.x2)
            .chain(&self.x3[0])
            .chain(&self.x3[1])
            .cloned()
            .collect()
    }

    /// Check the invariants against a state list.
    pub fn validate(&self, states: &[Symbol]) -> core::result::Result<(), String> {
        if self.x2.len() < 3 {
            return Err(format!(
                "the x2 block needs at least 3 states, got {}",
                self.x2.len()
            ));
        }
        if self.x3[0].len() != self.x3[1].len() {
            return Err("the x3 chains must have equal length".into());
        }
        let order = self.order();
        let set: BTreeSet<&Symbol> = order.iter().collect();
        if set.len() != order.len() {
            return Err("a state is assigned to two blocks".into());
        }
        let have: BTreeSet<&Symbol> = states.iter().collect();
        if set != have {
            return Err("the blocks do not partition the states".into());
        }
        Ok(())
    }
}

/// Per-equation verdicts of [`verify_triangular_form`].
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularCheck {
    pub equations: Vec<(String, Verdict)>,
}

impl TriangularCheck {
    pub fn passes(&self) -> bool {
        !self.equations.is_empty() && self.equations.iter().all(|(_, v)| v.is_pass())
    }

    pub fn failures(&self) -> impl Iterator<Item = &(String, Verdict)> {
        self.equations.iter().filter(|(_, v)| !v.is_pass())
    }
}

fn verdict(r: Result<Option<String>>) -> Verdict {
    match r {
        Ok(None) => Verdict::Pass,
        Ok(Some(msg)) => Verdict::Fail(msg),
        Err(e) if e.is_undecided() => Verdict::Undecided(format!("{}", e)),
        Err(e) => Verdict::Fail(format!("{}", e)),
    }
}

fn equal(lhs: &Expr, rhs: &Expr, cfg: &ZeroTestConfig) -> Result<Option<String>> {
    Ok(if is_zero(&(lhs - rhs), cfg)? {
        None
    } else {
        Some(format!("right-hand side is {} instead of {}", lhs, rhs))
    })
}

fn free_of(e: &Expr, vars: &[Symbol], what: &str, cfg: &ZeroTestConfig) -> Result<Option<String>> {
    for v in vars {
        if e.contains_var(v) && depends_on(e, v, cfg)? {
            return Ok(Some(format!("{} depends on {}", what, v)));
        }
    }
    Ok(None)
}

/// Check that `sys` is in the triangular form described by `pattern`.
pub fn verify_triangular_form(
    sys: &AffineSystem,
    pattern: &TriangularPattern,
    cfg: &ZeroTestConfig,
) -> TriangularCheck {
    let mut equations = Vec::new();
    if let Err(msg) = pattern.validate(sys.states()) {
        equations.push(("pattern".into(), Verdict::Fail(msg)));
        return TriangularCheck { equations };
    }
    let u = sys.input_symbols();
    let f = sys.rhs(&u);
    let rhs = |s: &Symbol| f[sys.state_index(s).unwrap()].clone();
    let var = |s: &Symbol| Expr::var(s.clone());
    let (_, _, n2, n3) = pattern.lengths();
    let x2 = &pattern.x2;
    let top = |j: usize| {
        if n3 == 0 {
            var(&u[j])
        } else {
            var(&pattern.x3[j][0])
        }
    };
    let name = |s: &Symbol| format!("d/dt {}", s);

    for j in 0..2 {
        let chain = &pattern.x1[j];
        for (k, s) in chain.iter().enumerate() {
            let want = chain.get(k + 1).map(var).unwrap_or_else(|| var(&x2[j]));
            equations.push((name(s), verdict(equal(&rhs(s), &want, cfg))));
        }
    }

    equations.push((name(&x2[0]), verdict(equal(&rhs(&x2[0]), &top(1), cfg))));
    let x3_all: Vec<Symbol> = pattern.x3[0]
        .iter()
        .chain(&pattern.x3[1])
        .cloned()
        .collect();
    for j in 1..n2 - 1 {
        let s = &x2[j];
        let v = verdict((|| {
            let e = rhs(s);
            let drift = &e - var(&x2[j + 1]) * top(1);
            let mut banned: Vec<Symbol> = x2[j + 2..].to_vec();
            banned.extend(x3_all.iter().cloned());
            banned.extend(u.iter().cloned());
            free_of(&drift, &banned, &format!("a2^{}", j + 1), cfg)
        })());
        equations.push((name(s), v));
    }
    equations.push((
        name(&x2[n2 - 1]),
        verdict(equal(&rhs(&x2[n2 - 1]), &top(0), cfg)),
    ));

    for j in 0..2 {
        let chain = &pattern.x3[j];
        for (k, s) in chain.iter().enumerate() {
            let want = chain.get(k + 1).map(var).unwrap_or_else(|| var(&u[j]));
            equations.push((name(s), verdict(equal(&rhs(s), &want, cfg))));
        }
    }
    TriangularCheck { equations }
}
