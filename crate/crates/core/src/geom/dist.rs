use alloc::vec::Vec;
use core::fmt;

use super::{display_field, display_form, OneForm, States, VectorField};
use crate::fieldla::{FnMatrix, SampledSpan};
use crate::symx::{Expr, ZeroTestConfig};
use crate::Result;

/// Span of vector fields, stored as a generically independent spanning set.
///
/// The dimension is the number of kept generators; it was established with
/// the sampling seed recorded in [`Distribution::seed`].
#[derive(Clone)]
pub struct Distribution {
    states: States,
    gens: Vec<VectorField>,
    span: SampledSpan,
}

/// Span of one-forms, same conventions as [`Distribution`].
#[derive(Clone)]
pub struct Codistribution {
    states: States,
    gens: Vec<OneForm>,
    span: SampledSpan,
}

impl Distribution {
    /// The zero distribution.
    pub fn zero(states: States, cfg: &ZeroTestConfig) -> Self {
        let n = states.len();
        Distribution {
            states,
            gens: Vec::new(),
            span: SampledSpan::new(n, cfg),
        }
    }

    /// Span of `gens`; dependent generators are dropped in order.
    pub fn span<I>(states: States, gens: I, cfg: &ZeroTestConfig) -> Result<Self>
    where
        I: IntoIterator<Item = VectorField>,
    {
        let mut d = Distribution::zero(states, cfg);
        d.extend(gens)?;
        Ok(d)
    }

    /// `span{∂_{x^i} : i in idx}`.
    pub fn coordinates(states: States, idx: &[usize], cfg: &ZeroTestConfig) -> Result<Self> {
        let n = states.len();
        Distribution::span(
            states,
            idx.iter().map(|&i| VectorField::coordinate(n, i)),
            cfg,
        )
    }

    /// The full tangent space.
    pub fn full(states: States, cfg: &ZeroTestConfig) -> Result<Self> {
        let idx: Vec<usize> = (0..states.len()).collect();
        Distribution::coordinates(states, &idx, cfg)
    }

    /// Add generators; returns how many were independent.
    pub fn extend<I>(&mut self, gens: I) -> Result<usize>
    where
        I: IntoIterator<Item = VectorField>,
    {
        let mut added = 0;
        for g in gens {
            if self.span.rank() == self.states.len() {
                break;
            }
            if g.is_zero_literal() {
                continue;
            }
            if self.span.push(g.0.clone())? {
                self.gens.push(g);
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn states(&self) -> &States {
        &self.states
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn seed(&self) -> u64 {
        self.span.config().seed
    }

    pub fn config(&self) -> &ZeroTestConfig {
        self.span.config()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.states.len()
    }

    pub fn matrix(&self) -> FnMatrix {
        FnMatrix::from_rows(
            self.gens.iter().map(|g| g.0.clone()).collect(),
            self.states.len(),
        )
        .expect("generators match the state count")
    }

    pub fn contains(&self, v: &VectorField) -> Result<bool> {
        if self.is_full() {
            return Ok(true);
        }
        self.span.clone().contains(&v.0)
    }

    /// `other ⊂ self`.
    pub fn contains_all(&self, other: &Distribution) -> Result<bool> {
        if other.dim() > self.dim() {
            return Ok(false);
        }
        let mut s = self.span.clone();
        for g in &other.gens {
            if !s.contains(&g.0)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality as mutual containment.
    pub fn equals(&self, other: &Distribution) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.contains_all(other)?)
    }

    /// `self + other`.
    pub fn sum(&self, other: &Distribution) -> Result<Distribution> {
        let mut d = self.clone();
        d.extend(other.gens.iter().cloned())?;
        Ok(d)
    }

    pub fn with(&self, gens: impl IntoIterator<Item = VectorField>) -> Result<Distribution> {
        let mut d = self.clone();
        d.extend(gens)?;
        Ok(d)
    }

    /// Component matrix rendered with state names.
    pub fn describe(&self) -> Vec<alloc::string::String> {
        self.gens
            .iter()
            .map(|g| display_field(g, &self.states))
            .collect()
    }

    /// Indices of coordinates `x^i` with `∂_{x^i}` in this distribution.
    pub fn coordinate_directions(&self) -> Result<Vec<usize>> {
        let n = self.states.len();
        let mut out = Vec::new();
        let mut s = self.span.clone();
        for i in 0..n {
            if s.contains(&VectorField::coordinate(n, i).0)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Pairings of every generator with `w`.
    pub fn pairings(&self, w: &OneForm) -> Vec<Expr> {
        self.gens.iter().map(|g| w.pair(g)).collect()
    }
}

impl Codistribution {
    pub fn zero(states: States, cfg: &ZeroTestConfig) -> Self {
        let n = states.len();
        Codistribution {
            states,
            gens: Vec::new(),
            span: SampledSpan::new(n, cfg),
        }
    }

    pub fn span<I>(states: States, gens: I, cfg: &ZeroTestConfig) -> Result<Self>
    where
        I: IntoIterator<Item = OneForm>,
    {
        let mut d = Codistribution::zero(states, cfg);
        d.extend(gens)?;
        Ok(d)
    }

    pub fn extend<I>(&mut self, gens: I) -> Result<usize>
    where
        I: IntoIterator<Item = OneForm>,
    {
        let mut added = 0;
        for g in gens {
            if self.span.rank() == self.states.len() {
                break;
            }
            if g.0.iter().all(Expr::is_zero_literal) {
                continue;
            }
            if self.span.push(g.0.clone())? {
                self.gens.push(g);
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn states(&self) -> &States {
        &self.states
    }

    pub fn generators(&self) -> &[OneForm] {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn seed(&self) -> u64 {
        self.span.config().seed
    }

    pub fn contains(&self, w: &OneForm) -> Result<bool> {
        if self.dim() == self.states.len() {
            return Ok(true);
        }
        self.span.clone().contains(&w.0)
    }

    pub fn contains_all(&self, other: &Codistribution) -> Result<bool> {
        if other.dim() > self.dim() {
            return Ok(false);
        }
        let mut s = self.span.clone();
        for g in &other.gens {
            if !s.contains(&g.0)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equals(&self, other: &Codistribution) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.contains_all(other)?)
    }

    pub fn sum(&self, other: &Codistribution) -> Result<Codistribution> {
        let mut d = self.clone();
        d.extend(other.gens.iter().cloned())?;
        Ok(d)
    }

    pub fn with(&self, gens: impl IntoIterator<Item = OneForm>) -> Result<Codistribution> {
        let mut d = self.clone();
        d.extend(gens)?;
        Ok(d)
    }

    pub fn describe(&self) -> Vec<alloc::string::String> {
        self.gens
            .iter()
            .map(|g| display_form(g, &self.states))
            .collect()
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{{}}}", self.describe().join(", "))
    }
}

impl fmt::Debug for Codistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{{}}}", self.describe().join(", "))
    }
}
