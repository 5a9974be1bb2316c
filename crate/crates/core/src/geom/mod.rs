//! Vector fields, one-forms, distributions and the flag constructions
//! built from Lie brackets.

mod dist;
mod flags;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::symx::{differentiate, Expr, Symbol};

pub use dist::{Codistribution, Distribution};
pub use flags::{
    annihilator, cauchy_characteristics, derived_flag_step, involutive_closure, is_involutive,
    kernel, lie_flag_step,
};

/// Ordered state coordinates shared by fields over one state space.
pub type States = Arc<[Symbol]>;

pub fn states<I, S>(names: I) -> States
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names
        .into_iter()
        .map(|s| Symbol::from(s.as_ref()))
        .collect()
}

/// Components `v^i` of `v = v^i ∂_{x^i}` in state order.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField(pub Vec<Expr>);

/// Coefficients `ω_i` of `ω = ω_i dx^i` in state order.
#[derive(Clone, PartialEq, Eq)]
pub struct OneForm(pub Vec<Expr>);

impl VectorField {
    pub fn zero(n: usize) -> Self {
        VectorField(alloc::vec![Expr::zero(); n])
    }

    /// The coordinate field `∂_{x^i}`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut v = VectorField::zero(n);
        v.0[i] = Expr::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[Expr] {
        &self.0
    }

    pub fn is_zero_literal(&self) -> bool {
        self.0.iter().all(Expr::is_zero_literal)
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField(self.0.iter().map(|c| c * f).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Directional derivative `L_v f`.
    pub fn apply(&self, f: &Expr, states: &[Symbol]) -> Expr {
        let terms: Vec<Expr> = self
            .0
            .iter()
            .zip(states)
            .filter(|(c, s)| !c.is_zero_literal() && f.contains_var(s))
            .map(|(c, s)| c * differentiate(f, s))
            .collect();
        Expr::sum(terms)
    }
}

impl OneForm {
    pub fn zero(n: usize) -> Self {
        OneForm(alloc::vec![Expr::zero(); n])
    }

    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut w = OneForm::zero(n);
        w.0[i] = Expr::one();
        w
    }

    /// Exterior derivative `df` of a function.
    pub fn exact(f: &Expr, states: &[Symbol]) -> Self {
        OneForm(states.iter().map(|s| differentiate(f, s)).collect())
    }

    pub fn components(&self) -> &[Expr] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `⟨ω, v⟩ = ω_i v^i`.
    pub fn pair(&self, v: &VectorField) -> Expr {
        Expr::sum(
            self.0
                .iter()
                .zip(&v.0)
                .filter(|(a, b)| !a.is_zero_literal() && !b.is_zero_literal())
                .map(|(a, b)| a * b)
                .collect::<Vec<_>>(),
        )
    }
}

/// `[v, w]^i = v^k ∂_k w^i - w^k ∂_k v^i`.
pub fn lie_bracket(v: &VectorField, w: &VectorField, states: &[Symbol]) -> VectorField {
    VectorField(
        (0..states.len())
            .map(|i| v.apply(&w.0[i], states) - w.apply(&v.0[i], states))
            .collect(),
    )
}

/// `k`-fold Lie derivative `L_v^k f`.
pub fn lie_derivative(f: &Expr, v: &VectorField, k: usize, states: &[Symbol]) -> Expr {
    let mut out = f.clone();
    for _ in 0..k {
        out = v.apply(&out, states);
    }
    out
}

fn write_components(f: &mut fmt::Formatter<'_>, c: &[Expr]) -> fmt::Result {
    write!(f, "[")?;
    for (i, e) in c.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}", e)?;
    }
    write!(f, "]")
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_components(f, &self.0)
    }
}

impl fmt::Debug for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_components(f, &self.0)
    }
}

/// Render `v` as `c1*∂x1 + ...` over the given coordinates.
pub fn display_field(v: &VectorField, states: &[Symbol]) -> alloc::string::String {
    use alloc::string::String;
    use core::fmt::Write;
    let mut s = String::new();
    for (c, x) in v.0.iter().zip(states) {
        if c.is_zero_literal() {
            continue;
        }
        if !s.is_empty() {
            s.push_str(" + ");
        }
        if c.is_one_literal() {
            let _ = write!(s, "d/d{}", x);
        } else {
            let _ = write!(s, "({})*d/d{}", c, x);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Render `ω` as `c1*dx1 + ...`.
pub fn display_form(w: &OneForm, states: &[Symbol]) -> alloc::string::String {
    use alloc::string::String;
    use core::fmt::Write;
    let mut s = String::new();
    for (c, x) in w.0.iter().zip(states) {
        if c.is_zero_literal() {
            continue;
        }
        if !s.is_empty() {
            s.push_str(" + ");
        }
        if c.is_one_literal() {
            let _ = write!(s, "d{}", x);
        } else {
            let _ = write!(s, "({})*d{}", c, x);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}
