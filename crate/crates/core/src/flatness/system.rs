use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fieldla::{generic_rank, FnMatrix};
use crate::geom::{States, VectorField};
use crate::symx::{
    differentiate, substitute, Bindings, Confidence, Expr, Symbol, Vocabulary, ZeroTestConfig,
};
use crate::{Error, Result};

/// `ẋ = a(x) + b1(x) u1 + b2(x) u2`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSystem {
    name: String,
    states: States,
    params: Vec<Symbol>,
    drift: VectorField,
    inputs: [VectorField; 2],
}

impl AffineSystem {
    /// Build a system, checking shapes and that every expression only uses
    /// declared states and parameters.
    pub fn new(
        name: impl Into<String>,
        states: States,
        params: Vec<Symbol>,
        drift: VectorField,
        b1: VectorField,
        b2: VectorField,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::Precondition(
                "a system needs at least one state".into(),
            ));
        }
        for (label, f) in [("drift", &drift), ("b1", &b1), ("b2", &b2)] {
            if f.len() != n {
                return Err(Error::Shape(format!(
                    "{} has {} components for {} states",
                    label,
                    f.len(),
                    n
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for s in states.iter().chain(params.iter()) {
            if !seen.insert(s.clone()) {
                return Err(Error::Precondition(format!("`{}` declared twice", s)));
            }
        }
        for f in [&drift, &b1, &b2] {
            for e in f.components() {
                if let Some(v) = e.vars().into_iter().find(|v| !seen.contains(v)) {
                    return Err(Error::Undeclared(String::from(&*v)));
                }
            }
        }
        Ok(AffineSystem {
            name: name.into(),
            states,
            params,
            drift,
            inputs: [b1, b2],
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn states(&self) -> &States {
        &self.states
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn drift(&self) -> &VectorField {
        &self.drift
    }

    pub fn input(&self, j: usize) -> &VectorField {
        &self.inputs[j]
    }

    pub fn inputs(&self) -> &[VectorField; 2] {
        &self.inputs
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.states.iter().chain(self.params.iter()))
    }

    pub fn state_index(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| &**x == s)
    }

    /// Same input fields, zero drift.
    pub fn driftless(&self) -> AffineSystem {
        AffineSystem {
            drift: VectorField::zero(self.n()),
            ..self.clone()
        }
    }

    pub fn exprs(&self) -> impl Iterator<Item = &Expr> {
        self.drift
            .components()
            .iter()
            .chain(self.inputs[0].components())
            .chain(self.inputs[1].components())
    }

    pub fn confidence(&self) -> Confidence {
        Confidence::of(self.exprs())
    }

    /// The inputs must be independent at generic points.
    pub fn check_inputs(&self, cfg: &ZeroTestConfig) -> Result<()> {
        let m = FnMatrix::from_rows(
            self.inputs
                .iter()
                .map(|b| b.components().to_vec())
                .collect(),
            self.n(),
        )?;
        if generic_rank(&m, cfg)? != 2 {
            return Err(Error::Precondition(
                "input vector fields are dependent at generic points".into(),
            ));
        }
        Ok(())
    }

    /// Right-hand side with explicit input symbols.
    pub fn rhs(&self, u: &[Symbol; 2]) -> Vec<Expr> {
        let (u1, u2) = (Expr::var(u[0].clone()), Expr::var(u[1].clone()));
        (0..self.n())
            .map(|i| {
                Expr::sum([
                    self.drift.0[i].clone(),
                    &self.inputs[0].0[i] * &u1,
                    &self.inputs[1].0[i] * &u2,
                ])
            })
            .collect()
    }

    /// Split a right-hand side that is affine in the input symbols.
    pub fn from_rhs(
        name: impl Into<String>,
        states: States,
        params: Vec<Symbol>,
        f: &[Expr],
        u: &[Symbol; 2],
    ) -> Result<Self> {
        let mut zero = Bindings::new();
        zero.insert(u[0].clone(), Expr::zero());
        zero.insert(u[1].clone(), Expr::zero());
        let drift = VectorField(f.iter().map(|e| substitute(e, &zero)).collect());
        let b1 = VectorField(
            f.iter()
                .map(|e| substitute(&differentiate(e, &u[0]), &zero))
                .collect(),
        );
        let b2 = VectorField(
            f.iter()
                .map(|e| substitute(&differentiate(e, &u[1]), &zero))
                .collect(),
        );
        AffineSystem::new(name, states, params, drift, b1, b2)
    }

    /// Permute the state order.
    pub fn reorder(&self, order: &[Symbol]) -> Result<Self> {
        if order.len() != self.n() {
            return Err(Error::Shape("reordering must list every state".into()));
        }
        let idx: Vec<usize> = order
            .iter()
            .map(|s| {
                self.state_index(s)
                    .ok_or_else(|| Error::Undeclared(String::from(&**s)))
            })
            .collect::<Result<_>>()?;
        let pick = |v: &VectorField| VectorField(idx.iter().map(|&i| v.0[i].clone()).collect());
        AffineSystem::new(
            self.name.clone(),
            order.iter().cloned().collect(),
            self.params.clone(),
            pick(&self.drift),
            pick(&self.inputs[0]),
            pick(&self.inputs[1]),
        )
    }

    /// Input symbol names that clash with no state or parameter.
    pub fn input_symbols(&self) -> [Symbol; 2] {
        let taken = |s: &str| self.states.iter().chain(&self.params).any(|x| &**x == s);
        let mut base = String::from("u");
        while taken(&format!("{}1", base)) || taken(&format!("{}2", base)) {
            base.push('_');
        }
        [format!("{}1", base).into(), format!("{}2", base).into()]
    }
}
