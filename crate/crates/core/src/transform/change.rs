use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::flatness::AffineSystem;
use crate::geom::VectorField;
use crate::symx::{
    differentiate, is_zero, simplify, solve_for, solve_for_local, substitute, Bindings, Expr,
    Symbol, ZeroTestConfig,
};
use crate::{Error, Result};

/// `new := def`, replacing the coordinate `replaced`; `inverse` expresses
/// `replaced` in the coordinates after the step.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryStep {
    pub new: Symbol,
    pub def: Expr,
    pub replaced: Symbol,
    pub inverse: Expr,
}

impl ElementaryStep {
    pub fn is_rename(&self) -> bool {
        self.def.as_var() == Some(&self.replaced)
    }
}

/// An ordered composition of elementary coordinate substitutions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoordChange {
    steps: Vec<ElementaryStep>,
}

/// Invert `new = def` in `target`, exactly if possible, otherwise on the
/// principal-root branch.
pub(crate) fn invert(
    new: &Symbol,
    def: &Expr,
    target: &Symbol,
    cfg: &ZeroTestConfig,
) -> Result<Expr> {
    match solve_for(new, def, target, cfg) {
        Ok(e) => Ok(simplify(&e)),
        Err(Error::NotInvertible { .. }) => solve_for_local(new, def, target, cfg),
        Err(e) => Err(e),
    }
}

impl CoordChange {
    pub fn identity() -> Self {
        CoordChange::default()
    }

    pub fn steps(&self) -> &[ElementaryStep] {
        &self.steps
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Coordinate names after all steps, starting from `states`.
    pub fn final_states(&self, states: &[Symbol]) -> Result<Vec<Symbol>> {
        let mut cur = states.to_vec();
        for s in &self.steps {
            let i = slot(&cur, &s.replaced)?;
            cur[i] = s.new.clone();
        }
        Ok(cur)
    }

    /// Append `new := def` replacing `replaced`, given the coordinates
    /// current at that point.
    pub fn push(
        &mut self,
        current: &[Symbol],
        new: impl Into<Symbol>,
        def: Expr,
        replaced: &Symbol,
        cfg: &ZeroTestConfig,
    ) -> Result<&ElementaryStep> {
        let new = new.into();
        slot(current, replaced)?;
        if current.iter().any(|s| *s == new && s != replaced) {
            return Err(Error::Precondition(format!(
                "`{}` is already a coordinate",
                new
            )));
        }
        for v in def.vars() {
            if !current.contains(&v) {
                return Err(Error::Undeclared(String::from(&*v)));
            }
        }
        let inverse = invert(&new, &def, replaced, cfg)?;
        self.steps.push(ElementaryStep {
            new,
            def,
            replaced: replaced.clone(),
            inverse,
        });
        Ok(self.steps.last().unwrap())
    }

    /// Append `new := def`, replacing the last declared coordinate the
    /// definition can be solved for.
    pub fn push_auto(
        &mut self,
        current: &[Symbol],
        new: impl Into<Symbol>,
        def: Expr,
        cfg: &ZeroTestConfig,
    ) -> Result<&ElementaryStep> {
        let new = new.into();
        let mut last = None;
        for v in current.iter().rev() {
            if !def.contains_var(v) {
                continue;
            }
            match invert(&new, &def, v, cfg) {
                Ok(_) => {
                    last = Some(v.clone());
                    break;
                }
                Err(Error::NotInvertible { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let Some(r) = last else {
            return Err(Error::NotInvertible {
                target: String::from(&*new),
                expr: format!("{}", def),
            });
        };
        self.push(current, new, def, &r, cfg)
    }

    pub(crate) fn push_step(&mut self, step: ElementaryStep) {
        self.steps.push(step);
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &CoordChange) -> CoordChange {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        CoordChange { steps }
    }

    /// The inverse change: the steps in reverse, each solved the other way.
    pub fn inverse(&self) -> CoordChange {
        CoordChange {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| ElementaryStep {
                    new: s.replaced.clone(),
                    def: s.inverse.clone(),
                    replaced: s.new.clone(),
                    inverse: s.def.clone(),
                })
                .collect(),
        }
    }

    /// The new coordinates as functions of `states`.
    pub fn forward(&self, states: &[Symbol]) -> Result<Vec<(Symbol, Expr)>> {
        let mut cur: Vec<(Symbol, Expr)> = states
            .iter()
            .map(|s| (s.clone(), Expr::var(s.clone())))
            .collect();
        for s in &self.steps {
            let b: Bindings = cur.iter().cloned().collect();
            let i = cur
                .iter()
                .position(|(n, _)| *n == s.replaced)
                .ok_or_else(|| Error::Undeclared(String::from(&*s.replaced)))?;
            cur[i] = (s.new.clone(), substitute(&s.def, &b));
        }
        Ok(cur)
    }

    /// `states` as functions of the new coordinates.
    pub fn inverse_map(&self, states: &[Symbol]) -> Result<Vec<(Symbol, Expr)>> {
        let mut inv: Vec<(Symbol, Expr)> = states
            .iter()
            .map(|s| (s.clone(), Expr::var(s.clone())))
            .collect();
        let mut cur = states.to_vec();
        for s in &self.steps {
            let i = slot(&cur, &s.replaced)?;
            cur[i] = s.new.clone();
            let mut b = Bindings::new();
            b.insert(s.replaced.clone(), s.inverse.clone());
            for (_, e) in inv.iter_mut() {
                *e = substitute(e, &b);
            }
        }
        Ok(inv)
    }

    /// `forward` followed by `inverse_map` is the identity on `states`.
    pub fn check_round_trip(&self, states: &[Symbol], cfg: &ZeroTestConfig) -> Result<bool> {
        let fwd: Bindings = self.forward(states)?.into_iter().collect();
        for (s, e) in self.inverse_map(states)? {
            if !is_zero(&(substitute(&e, &fwd) - Expr::var(s)), cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn slot(cur: &[Symbol], s: &Symbol) -> Result<usize> {
    cur.iter()
        .position(|x| x == s)
        .ok_or_else(|| Error::Undeclared(String::from(&**s)))
}

/// Time derivative of `e` along the right-hand side `f` over `states`.
pub(crate) fn dot(e: &Expr, states: &[Symbol], f: &[Expr]) -> Expr {
    Expr::sum(
        states
            .iter()
            .zip(f)
            .filter(|(s, _)| e.contains_var(s))
            .map(|(s, fi)| differentiate(e, s) * fi),
    )
}

/// One elementary step applied to a right-hand side.
pub(crate) fn replay(states: &mut [Symbol], f: &mut [Expr], step: &ElementaryStep) -> Result<()> {
    let i = slot(states, &step.replaced)?;
    let fnew = simplify(&dot(&step.def, states, f));
    states[i] = step.new.clone();
    f[i] = fnew;
    let mut b = Bindings::new();
    b.insert(step.replaced.clone(), step.inverse.clone());
    for e in f.iter_mut() {
        *e = simplify(&substitute(e, &b));
    }
    Ok(())
}

/// The system in the coordinates defined by `change`; each new coordinate
/// keeps the slot of the one it replaced.
pub fn pushforward(sys: &AffineSystem, change: &CoordChange) -> Result<AffineSystem> {
    let finals = change.final_states(sys.states())?;
    let u = super::fresh_inputs(sys.states().iter().chain(sys.params()).chain(finals.iter()));
    let mut states = sys.states().to_vec();
    let mut f = sys.rhs(&u);
    for s in change.steps() {
        replay(&mut states, &mut f, s)?;
    }
    AffineSystem::from_rhs(sys.name(), states.into(), sys.params().to_vec(), &f, &u)
}

/// `ū = g(x) + M(x) u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Feedback {
    pub g: [Expr; 2],
    pub m: [[Expr; 2]; 2],
}

impl Default for Feedback {
    fn default() -> Self {
        Feedback::identity()
    }
}

impl Feedback {
    pub fn identity() -> Self {
        Feedback {
            g: [Expr::zero(), Expr::zero()],
            m: [[Expr::one(), Expr::zero()], [Expr::zero(), Expr::one()]],
        }
    }

    pub fn det(&self) -> Expr {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn check(&self, cfg: &ZeroTestConfig) -> Result<()> {
        if is_zero(&self.det(), cfg)? {
            return Err(Error::Precondition("feedback matrix is singular".into()));
        }
        Ok(())
    }

    /// `M^{-1}` by the adjugate formula.
    pub fn m_inverse(&self) -> [[Expr; 2]; 2] {
        let d = self.det();
        let m = &self.m;
        [
            [&m[1][1] / &d, -(&m[0][1] / &d)],
            [-(&m[1][0] / &d), &m[0][0] / &d],
        ]
    }

    /// `u = -M^{-1} g + M^{-1} ū`.
    pub fn inverse(&self) -> Feedback {
        let mi = self.m_inverse();
        let g = [0, 1].map(|j| -(&mi[j][0] * &self.g[0] + &mi[j][1] * &self.g[1]));
        Feedback { g, m: mi }
    }

    /// Substitute the state coordinates with `b` in every entry.
    pub fn substitute(&self, b: &Bindings) -> Feedback {
        Feedback {
            g: [0, 1].map(|j| substitute(&self.g[j], b)),
            m: [0, 1].map(|j| [0, 1].map(|k| substitute(&self.m[j][k], b))),
        }
    }
}

/// The system with new inputs `ū` defined by `f`: `a' = a - B M^{-1} g`,
/// `B' = B M^{-1}`.
pub fn apply_feedback(
    sys: &AffineSystem,
    f: &Feedback,
    cfg: &ZeroTestConfig,
) -> Result<AffineSystem> {
    f.check(cfg)?;
    let mi = f.m_inverse();
    let h = [0, 1].map(|j| &mi[j][0] * &f.g[0] + &mi[j][1] * &f.g[1]);
    let b = sys.inputs();
    let n = sys.n();
    let col = |k: usize| {
        VectorField(
            (0..n)
                .map(|i| &b[0].0[i] * &mi[0][k] + &b[1].0[i] * &mi[1][k])
                .collect(),
        )
    };
    let drift = VectorField(
        (0..n)
            .map(|i| &sys.drift().0[i] - (&b[0].0[i] * &h[0] + &b[1].0[i] * &h[1]))
            .collect(),
    );
    AffineSystem::new(
        sys.name(),
        sys.states().clone(),
        sys.params().to_vec(),
        drift,
        col(0),
        col(1),
    )
}
